use ndarray::ArrayView1;

use crate::linalg::norm_sqr;
use crate::waveform::Qam;
use crate::C64;

/// Signal and residual energies of one MF output; sums over symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinrMeasurement {
    pub signal: f64,
    pub residual: f64,
}

impl SinrMeasurement {
    /// `Σ signal / Σ residual`; `+∞` for an exact output.
    pub fn sinr(&self) -> f64 {
        if self.residual > 0.0 {
            self.signal / self.residual
        } else {
            f64::INFINITY
        }
    }

    pub fn add(&mut self, other: SinrMeasurement) {
        self.signal += other.signal;
        self.residual += other.residual;
    }
}

/// Splits `x̃` into the useful part `(‖h‖²/(M·β))·x` and everything else.
pub fn measure_empirical_sinr(
    x_tilde: &[C64],
    x_true: &[C64],
    h_true: ArrayView1<C64>,
    beta_home: f64,
) -> SinrMeasurement {
    assert_eq!(x_tilde.len(), x_true.len());
    let g = norm_sqr(h_true) / (h_true.len() as f64 * beta_home);
    let mut out = SinrMeasurement::default();
    for (xt, x) in x_tilde.iter().zip(x_true) {
        let s = x * g;
        out.signal += s.norm_sqr();
        out.residual += (xt - s).norm_sqr();
    }
    out
}

/// Bit errors of hard decisions against the transmitted bits.
pub fn count_ber(x_hat: &[C64], bits_true: &[u8], qam: &Qam) -> (u64, u64) {
    let bits = qam.demap_all(x_hat);
    assert_eq!(bits.len(), bits_true.len());
    let errors = bits.iter().zip(bits_true).filter(|(a, b)| a != b).count();
    (errors as u64, bits.len() as u64)
}

/// Sorted `(value, F(value))` pairs of the empirical distribution; NaNs are
/// dropped and ties collapse onto their last rank.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (i, x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = f,
            _ => out.push((*x, f)),
        }
    }
    out
}
