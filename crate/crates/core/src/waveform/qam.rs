use crate::error::{Error, Result};
use crate::C64;

/// Square Gray-coded QAM normalized to unit average power.
///
/// Per-axis levels are `(2i − (S−1))·a` for `i < S = √P`, with
/// `a = √(3 / (2(P−1)))`, so neighbours sit `√(6/(P−1))` apart.
#[derive(Clone, Debug, PartialEq)]
pub struct Qam {
    order: usize,
    side: usize,
    bits_per_axis: usize,
    scale: f64,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Qam {
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() || order.trailing_zeros() % 2 != 0 {
            return Err(Error::UnsupportedQam(order));
        }
        let bits_per_axis = order.trailing_zeros() as usize / 2;
        let side = 1usize << bits_per_axis;
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        Ok(Qam { order, side, bits_per_axis, scale })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    fn level(&self, i: usize) -> f64 {
        (2.0 * i as f64 - (self.side as f64 - 1.0)) * self.scale
    }

    fn nearest_index(&self, v: f64) -> usize {
        let i = ((v / self.scale + (self.side as f64 - 1.0)) / 2.0).round();
        i.clamp(0.0, (self.side - 1) as f64) as usize
    }

    pub fn points(&self) -> Vec<C64> {
        let mut pts = Vec::with_capacity(self.order);
        for i in 0..self.side {
            for q in 0..self.side {
                pts.push(C64::new(self.level(i), self.level(q)));
            }
        }
        pts
    }

    pub fn average_power(&self) -> f64 {
        self.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    fn axis_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, b| (acc << 1) | (*b as usize & 1))
    }

    /// Maps bits (MSB first, in-phase axis first) to symbols.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<C64>> {
        let bps = self.bits_per_symbol();
        if bits.len() % bps != 0 {
            return Err(Error::Dimension(format!("{} bits is not a multiple of {bps}", bits.len())));
        }
        Ok(bits
            .chunks(bps)
            .map(|c| {
                let (bi, bq) = c.split_at(self.bits_per_axis);
                let i = gray_inverse(self.axis_bits(bi));
                let q = gray_inverse(self.axis_bits(bq));
                C64::new(self.level(i), self.level(q))
            })
            .collect())
    }

    /// The decision function η: nearest constellation point.
    pub fn decide(&self, v: C64) -> C64 {
        C64::new(self.level(self.nearest_index(v.re)), self.level(self.nearest_index(v.im)))
    }

    pub fn decide_all(&self, v: &[C64]) -> Vec<C64> {
        v.iter().map(|z| self.decide(*z)).collect()
    }

    /// Bits of the nearest constellation point.
    pub fn demap(&self, v: C64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.bits_per_symbol());
        for axis in [v.re, v.im] {
            let g = gray(self.nearest_index(axis));
            for b in (0..self.bits_per_axis).rev() {
                out.push(((g >> b) & 1) as u8);
            }
        }
        out
    }

    pub fn demap_all(&self, v: &[C64]) -> Vec<u8> {
        v.iter().flat_map(|z| self.demap(*z)).collect()
    }
}
