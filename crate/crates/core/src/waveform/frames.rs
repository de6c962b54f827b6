use ndarray::{s, Array2};
use rand::Rng;

use super::pilots::PilotBook;
use super::qam::Qam;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::matmul;
use crate::rng::complex_normal;
use crate::sysmodel::{ChannelRealization, PowerAllocation};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UserScheme {
    /// Pilot over the first τ symbols, then data.
    Tp,
    /// Data plus pilot over the whole slot.
    Sp,
    /// Silent for τ symbols, then data plus pilot.
    HybridSp,
    /// Data over the whole slot, no pilot. Never estimated.
    Interferer,
}

/// Per-user scheme assignment for one transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePlan {
    pub schemes: Vec<UserScheme>,
    pub tau: usize,
}

impl FramePlan {
    pub fn all_sp(n: usize) -> Self {
        FramePlan { schemes: vec![UserScheme::Sp; n], tau: 0 }
    }

    pub fn all_tp(n: usize, tau: usize) -> Self {
        FramePlan { schemes: vec![UserScheme::Tp; n], tau }
    }

    /// Hybrid frame; τ collapses to 0 when nobody uses TP.
    pub fn hybrid(n: usize, tp_users: &[usize], tau: usize) -> Self {
        let mut schemes = vec![UserScheme::HybridSp; n];
        for &u in tp_users {
            schemes[u] = UserScheme::Tp;
        }
        FramePlan { schemes, tau: if tp_users.is_empty() { 0 } else { tau } }
    }

    pub fn with_interferers(mut self, users: impl IntoIterator<Item = usize>) -> Self {
        for u in users {
            self.schemes[u] = UserScheme::Interferer;
        }
        self
    }

    pub fn sp_users(&self) -> Vec<usize> {
        self.users_with(|s| matches!(s, UserScheme::Sp | UserScheme::HybridSp))
    }

    pub fn tp_users(&self) -> Vec<usize> {
        self.users_with(|s| s == UserScheme::Tp)
    }

    fn users_with(&self, f: impl Fn(UserScheme) -> bool) -> Vec<usize> {
        (0..self.schemes.len()).filter(|&u| f(self.schemes[u])).collect()
    }

    /// SP pilot length: the full slot, or what remains after TP training.
    pub fn sp_length(&self, c_u: usize) -> usize {
        if self.schemes.contains(&UserScheme::Sp) {
            c_u
        } else {
            c_u - self.tau
        }
    }

    /// Number of data symbols carried by a user.
    pub fn data_len(&self, user: usize, c_u: usize) -> usize {
        match self.schemes[user] {
            UserScheme::Sp | UserScheme::Interferer => c_u,
            UserScheme::Tp | UserScheme::HybridSp => c_u - self.tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataModel {
    Qam(Qam),
    /// Unit-variance complex Gaussian symbols; no bits.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet {
    /// Transmitted symbols, one row per user, `C_u` columns.
    pub symbols: Array2<C64>,
    pub data: Vec<Vec<C64>>,
    pub bits: Vec<Vec<u8>>,
    pub plan: FramePlan,
}

pub fn assemble_frames<R: Rng + ?Sized>(
    config: &SystemConfig,
    book: &PilotBook,
    powers: &PowerAllocation,
    plan: &FramePlan,
    data_model: &DataModel,
    rng: &mut R,
) -> Result<FrameSet> {
    let n = plan.schemes.len();
    let c_u = config.c_u;
    let tau = plan.tau;
    if powers.len() != n {
        return Err(Error::Dimension(format!("{} powers for {n} users", powers.len())));
    }
    let mut symbols = Array2::zeros((n, c_u));
    let mut data = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(n);
    for u in 0..n {
        let len = plan.data_len(u, c_u);
        let (x, b) = match data_model {
            DataModel::Qam(q) => {
                let b: Vec<u8> = (0..len * q.bits_per_symbol()).map(|_| rng.random_range(0..2u8)).collect();
                (q.modulate(&b)?, b)
            }
            DataModel::Gaussian => ((0..len).map(|_| complex_normal(rng, 1.0)).collect(), Vec::new()),
        };
        let mut row = symbols.row_mut(u);
        let amp = powers.q[u].sqrt();
        match plan.schemes[u] {
            UserScheme::Tp => {
                let phi = book.tp_pilot(u)?;
                for t in 0..tau {
                    row[t] = phi[t] * amp;
                }
                for (t, v) in x.iter().enumerate() {
                    row[tau + t] = v * amp;
                }
            }
            UserScheme::Sp | UserScheme::HybridSp => {
                let p = book.sp_pilot(u)?;
                let offset = c_u - p.len();
                for (t, v) in x.iter().enumerate() {
                    row[offset + t] = v * powers.rho_d[u] + p[t] * powers.rho_p[u];
                }
            }
            UserScheme::Interferer => {
                for (t, v) in x.iter().enumerate() {
                    row[t] = v * amp;
                }
            }
        }
        data.push(x);
        bits.push(b);
    }
    Ok(FrameSet { symbols, data, bits, plan: plan.clone() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedBlock {
    /// `M×C_u` observation.
    pub y: Array2<C64>,
    pub sigma2: f64,
}

impl ReceivedBlock {
    /// Columns `from..` of the observation.
    pub fn tail(&self, from: usize) -> ndarray::ArrayView2<'_, C64> {
        self.y.slice(s![.., from..])
    }

    pub fn head(&self, to: usize) -> ndarray::ArrayView2<'_, C64> {
        self.y.slice(s![.., ..to])
    }
}

/// `Y = H·S + W` with `W` i.i.d. CN(0, σ²).
pub fn synthesize_received<R: Rng + ?Sized>(
    channels: &ChannelRealization,
    frames: &FrameSet,
    sigma2: f64,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    if channels.h.ncols() != frames.symbols.nrows() {
        return Err(Error::Dimension(format!(
            "{} channel columns for {} frames",
            channels.h.ncols(),
            frames.symbols.nrows()
        )));
    }
    let mut y = matmul(channels.h.view(), frames.symbols.view());
    if sigma2 > 0.0 {
        for v in y.iter_mut() {
            *v += complex_normal(rng, sigma2);
        }
    }
    Ok(ReceivedBlock { y, sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::sysmodel::{draw_channels, PathLossMap};
    use crate::waveform::{make_pilot_books, SpLayout};
    use ndarray::array;

    fn small_cfg() -> SystemConfig {
        SystemConfig { l: 7, c_u: 40, ..SystemConfig::default() }
    }

    #[test]
    fn pure_pilot_when_no_data_power() {
        let cfg = small_cfg();
        let plan = FramePlan::all_sp(35);
        let book = make_pilot_books(&cfg, &plan, SpLayout::Dft).unwrap();
        let pw = PowerAllocation::uniform(35, 1.0).with_split(0.0);
        let f =
            assemble_frames(&cfg, &book, &pw, &plan, &DataModel::Qam(Qam::new(4).unwrap()), &mut seeded(1)).unwrap();
        let p = book.sp_pilot(3).unwrap();
        for t in 0..40 {
            assert!((f.symbols[[3, t]] - p[t]).norm() < 1e-15);
        }
    }

    #[test]
    fn sp_frame_energy() {
        let cfg = small_cfg();
        let plan = FramePlan::all_sp(35);
        let book = make_pilot_books(&cfg, &plan, SpLayout::Dft).unwrap();
        let pw = PowerAllocation::uniform(35, 2.0).with_split(0.4);
        let mut rng = seeded(2);
        let trials = 400;
        let mut e = 0.0;
        for _ in 0..trials {
            let f = assemble_frames(&cfg, &book, &pw, &plan, &DataModel::Qam(Qam::new(16).unwrap()), &mut rng).unwrap();
            e += f.symbols.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let per_symbol = e / (trials * 35 * 40) as f64;
        assert!((per_symbol - 2.0).abs() < 0.02, "{per_symbol}");
    }

    #[test]
    fn tp_pilot_phase_has_exact_power() {
        let cfg = small_cfg();
        let plan = FramePlan::all_tp(35, cfg.tau);
        let book = make_pilot_books(&cfg, &plan, SpLayout::Dft).unwrap();
        let pw = PowerAllocation::uniform(35, 3.0);
        let f = assemble_frames(&cfg, &book, &pw, &plan, &DataModel::Gaussian, &mut seeded(3)).unwrap();
        for u in 0..35 {
            for t in 0..cfg.tau {
                assert!((f.symbols[[u, t]].norm_sqr() - 3.0).abs() < 1e-12);
            }
            assert_eq!(f.data[u].len(), 35);
        }
    }

    #[test]
    fn hybrid_sp_users_are_silent_during_training() {
        let cfg = small_cfg();
        let plan = FramePlan::hybrid(35, &[0, 1, 2], cfg.tau);
        let book = make_pilot_books(&cfg, &plan, SpLayout::Dft).unwrap();
        assert_eq!(book.sp_len(), 35);
        let pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let f = assemble_frames(&cfg, &book, &pw, &plan, &DataModel::Gaussian, &mut seeded(4)).unwrap();
        for u in 3..35 {
            assert!((0..cfg.tau).all(|t| f.symbols[[u, t]] == C64::new(0.0, 0.0)));
            assert!(f.symbols[[u, cfg.tau]].norm() > 0.0);
        }
        let empty = FramePlan::hybrid(35, &[], cfg.tau);
        assert_eq!(empty.tau, 0);
    }

    #[test]
    fn synthesis_basics() {
        let cfg = SystemConfig { l: 1, m: 1, c_u: 1, ..SystemConfig::default() }.with_users_per_cell(1);
        let frames = FrameSet {
            symbols: array![[C64::new(2.0, 0.0)]],
            data: vec![vec![]],
            bits: vec![vec![]],
            plan: FramePlan::all_sp(1),
        };
        let h = ChannelRealization { h: array![[C64::new(1.0, 0.0)]] };
        let y = synthesize_received(&h, &frames, 0.0, &mut seeded(0)).unwrap();
        assert_eq!(y.y[[0, 0]], C64::new(2.0, 0.0));
        let zero = ChannelRealization { h: array![[C64::new(0.0, 0.0)]] };
        assert_eq!(synthesize_received(&zero, &frames, 0.0, &mut seeded(0)).unwrap().y[[0, 0]], C64::new(0.0, 0.0));
        let _ = cfg;
    }

    #[test]
    fn received_energy_matches_expectation() {
        let cfg = SystemConfig { c_u: 40, m: 20, ..SystemConfig::default() };
        let plan = FramePlan::all_sp(35);
        let book = make_pilot_books(&cfg, &plan, SpLayout::Dft).unwrap();
        let beta = PathLossMap::from_fn(7, 5, |_, _| 0.8).unwrap();
        let q = 1.5;
        let pw = PowerAllocation::uniform(35, q).with_split(0.5);
        let sigma2 = 0.1;
        let mut rng = seeded(9);
        let trials = 1000;
        let mut e = 0.0;
        for _ in 0..trials {
            let h = draw_channels(&beta, 0, cfg.m, &mut rng);
            let f = assemble_frames(&cfg, &book, &pw, &plan, &DataModel::Qam(Qam::new(4).unwrap()), &mut rng).unwrap();
            let y = synthesize_received(&h, &f, sigma2, &mut rng).unwrap();
            e += y.y.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let mc = (cfg.m * cfg.c_u) as f64;
        let expected = 35.0 * mc * 0.8 * q + mc * sigma2;
        let measured = e / trials as f64;
        assert!((measured / expected - 1.0).abs() < 0.02, "{measured} vs {expected}");
    }
}
