//! Non-iterative least-squares channel estimation and matched-filter detection.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{correlate, hermitian_project, norm_sqr};
use crate::sysmodel::PowerAllocation;
use crate::waveform::{FramePlan, PilotBook, Qam, ReceivedBlock, UserScheme};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateScheme {
    Tp,
    Sp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub user: usize,
    pub scheme: EstimateScheme,
    pub h_hat: Array1<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    /// Soft MF output.
    pub x_tilde: Vec<C64>,
    /// `η(x̃)`.
    pub x_hat: Vec<C64>,
}

/// `ĥ = Y_p·φ*/(τ√q)` on the `M×τ` training slice.
pub fn tp_ls_estimate(y_pilot: ArrayView2<C64>, book: &PilotBook, user: usize, q: f64) -> Result<ChannelEstimate> {
    let phi = book.tp_pilot(user)?;
    if y_pilot.ncols() != phi.len() {
        return Err(Error::Dimension(format!("pilot slice has {} columns, tau = {}", y_pilot.ncols(), phi.len())));
    }
    let s = 1.0 / (phi.len() as f64 * q.sqrt());
    let h_hat = correlate(y_pilot, phi).mapv(|z| z * s);
    Ok(ChannelEstimate { user, scheme: EstimateScheme::Tp, h_hat })
}

/// Scales a pilot correlation `Y·p*` into an SP estimate. Shared with the
/// iterative estimator so both paths round identically.
pub(crate) fn sp_scale(correlation: Array1<C64>, len: usize, rho_p: f64) -> Array1<C64> {
    let s = 1.0 / (len as f64 * rho_p);
    correlation.mapv(|z| z * s)
}

/// `ĥ = Y·p*/(len·ρ_p)` where `len` is the pilot length.
pub fn sp_ls_estimate(y: ArrayView2<C64>, pilot: ArrayView1<C64>, rho_p: f64, user: usize) -> Result<ChannelEstimate> {
    if !(rho_p > 0.0) {
        return Err(Error::ZeroPilotAmplitude(rho_p));
    }
    if y.ncols() != pilot.len() {
        return Err(Error::Dimension(format!("{} columns for a pilot of length {}", y.ncols(), pilot.len())));
    }
    let h_hat = sp_scale(correlate(y, pilot), pilot.len(), rho_p);
    Ok(ChannelEstimate { user, scheme: EstimateScheme::Sp, h_hat })
}

/// `x̃ᵀ = ĥᴴ(Y − ρ_p·ĥ·pᵀ)/(M·ρ_d·β_home)`, then `x̂ = η(x̃)`.
pub fn mf_detect_sp(
    y: ArrayView2<C64>,
    h_hat: ArrayView1<C64>,
    rho_d: f64,
    rho_p: f64,
    beta_home: f64,
    pilot: ArrayView1<C64>,
    qam: &Qam,
) -> DetectionResult {
    debug_assert!(rho_d > 0.0 && beta_home > 0.0);
    let m = h_hat.len() as f64;
    let energy = norm_sqr(h_hat) * rho_p;
    let s = 1.0 / (m * rho_d * beta_home);
    let x_tilde: Vec<C64> =
        hermitian_project(h_hat, y).iter().zip(pilot.iter()).map(|(v, p)| (v - p * energy) * s).collect();
    let x_hat = qam.decide_all(&x_tilde);
    DetectionResult { x_tilde, x_hat }
}

/// `x̃ᵀ = ĥᴴY_d/(M·√q·β_home)` on the data slice, then `x̂ = η(x̃)`.
pub fn mf_detect_tp(
    y_data: ArrayView2<C64>,
    h_hat: ArrayView1<C64>,
    beta_home: f64,
    q: f64,
    qam: &Qam,
) -> DetectionResult {
    let m = h_hat.len() as f64;
    let s = 1.0 / (m * q.sqrt() * beta_home);
    let x_tilde: Vec<C64> = hermitian_project(h_hat, y_data).iter().map(|v| v * s).collect();
    let x_hat = qam.decide_all(&x_tilde);
    DetectionResult { x_tilde, x_hat }
}

/// Estimates for `users` under a hybrid frame: TP users from the first τ
/// columns, SP users from the remaining `C_u − τ` columns.
pub fn hybrid_estimates(
    rx: &ReceivedBlock,
    book: &PilotBook,
    plan: &FramePlan,
    powers: &PowerAllocation,
    users: &[usize],
) -> Result<Vec<ChannelEstimate>> {
    let c_u = rx.y.ncols();
    users
        .iter()
        .map(|&u| match plan.schemes.get(u) {
            Some(UserScheme::Tp) => tp_ls_estimate(rx.head(plan.tau), book, u, powers.q[u]),
            Some(UserScheme::Sp) | Some(UserScheme::HybridSp) => {
                let p = book.sp_pilot(u)?;
                sp_ls_estimate(rx.tail(c_u - p.len()), p, powers.rho_p[u], u)
            }
            _ => Err(Error::UserNotPartitioned(u)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::linalg::dot_conj;
    use crate::rng::seeded;
    use crate::sysmodel::{draw_channels, PathLossMap};
    use crate::waveform::{assemble_frames, make_pilot_books, synthesize_received, DataModel, SpLayout};
    use ndarray::Array2;
    use proptest::prelude::*;

    fn qpsk() -> Qam {
        Qam::new(4).unwrap()
    }

    fn transmit(
        cfg: &SystemConfig,
        plan: &FramePlan,
        beta: &PathLossMap,
        powers: &PowerAllocation,
        sigma2: f64,
        seed: u64,
    ) -> (Array2<C64>, PilotBook, crate::waveform::FrameSet, ReceivedBlock) {
        let mut rng = seeded(seed);
        let book = make_pilot_books(cfg, plan, SpLayout::Dft).unwrap();
        let h = draw_channels(beta, 0, cfg.m, &mut rng);
        let f = assemble_frames(cfg, &book, powers, plan, &DataModel::Qam(qpsk()), &mut rng).unwrap();
        let rx = synthesize_received(&h, &f, sigma2, &mut rng).unwrap();
        (h.h, book, f, rx)
    }

    fn max_abs_diff(a: ArrayView1<C64>, b: ArrayView1<C64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn tp_exact_without_reuse() {
        let cfg = SystemConfig { l: 7, m: 16, ..SystemConfig::default() }.with_reuse(7);
        let beta = PathLossMap::from_fn(7, 5, |_, u| 0.3 + 0.02 * u as f64).unwrap();
        let pw = PowerAllocation::uniform(35, 1.7);
        let plan = FramePlan::all_tp(35, cfg.tau);
        let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 1);
        for u in 0..35 {
            let e = tp_ls_estimate(rx.head(cfg.tau), &book, u, 1.7).unwrap();
            assert!(max_abs_diff(e.h_hat.view(), h.column(u)) < 1e-12);
        }
    }

    #[test]
    fn tp_contamination_is_co_pilot_sum() {
        let cfg = SystemConfig { l: 7, m: 8, ..SystemConfig::default() }.with_reuse(1);
        let beta = PathLossMap::from_fn(7, 5, |_, u| 1.0 / (1.0 + u as f64)).unwrap();
        let pw = PowerAllocation::uniform(35, 1.0);
        let plan = FramePlan::all_tp(35, cfg.tau);
        let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 2);
        let e = tp_ls_estimate(rx.head(cfg.tau), &book, 2, 1.0).unwrap();
        let mut expect = Array1::zeros(cfg.m);
        for cell in 0..7 {
            expect = expect + h.column(cell * 5 + 2);
        }
        assert!(max_abs_diff(e.h_hat.view(), expect.view()) < 1e-12);
        assert!(matches!(tp_ls_estimate(rx.head(cfg.tau), &book, 99, 1.0), Err(Error::UnknownPilot(99))));
    }

    #[test]
    fn tp_noise_error_variance() {
        let cfg = SystemConfig { l: 1, m: 50, ..SystemConfig::default() }.with_users_per_cell(4);
        let beta = PathLossMap::from_fn(1, 4, |_, _| 1.0).unwrap();
        let q = 2.0;
        let sigma2 = 0.3;
        let pw = PowerAllocation::uniform(4, q);
        let plan = FramePlan::all_tp(4, cfg.tau);
        let trials = 1000;
        let mut err = 0.0;
        for t in 0..trials {
            let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, sigma2, 100 + t);
            let e = tp_ls_estimate(rx.head(cfg.tau), &book, 0, q).unwrap();
            err += norm_sqr((&e.h_hat - &h.column(0)).view());
        }
        let expected = cfg.m as f64 * sigma2 / (cfg.tau as f64 * q);
        let measured = err / trials as f64;
        assert!((measured / expected - 1.0).abs() < 0.05, "{measured} vs {expected}");
    }

    #[test]
    fn sp_exact_for_pure_pilot() {
        let cfg = SystemConfig { l: 1, m: 12, c_u: 10, ..SystemConfig::default() }.with_users_per_cell(1);
        let beta = PathLossMap::new(1, 1, vec![1.3]).unwrap();
        let pw = PowerAllocation::uniform(1, 1.0).with_split(0.0);
        let plan = FramePlan::all_sp(1);
        let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 3);
        let e = sp_ls_estimate(rx.y.view(), book.sp_pilot(0).unwrap(), pw.rho_p[0], 0).unwrap();
        assert!(max_abs_diff(e.h_hat.view(), h.column(0)) < 1e-12);
        assert_eq!(sp_ls_estimate(rx.y.view(), book.sp_pilot(0).unwrap(), 0.0, 0), Err(Error::ZeroPilotAmplitude(0.0)));
    }

    #[test]
    fn sp_single_user_error_identity() {
        let cfg = SystemConfig { l: 1, m: 6, c_u: 16, ..SystemConfig::default() }.with_users_per_cell(1);
        let beta = PathLossMap::new(1, 1, vec![1.0]).unwrap();
        let pw = PowerAllocation::uniform(1, 1.0).with_split(0.6);
        let plan = FramePlan::all_sp(1);
        let (h, book, f, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 4);
        let p = book.sp_pilot(0).unwrap();
        let e = sp_ls_estimate(rx.y.view(), p, pw.rho_p[0], 0).unwrap();
        let x = Array1::from(f.data[0].clone());
        let c = dot_conj(x.view(), p) * (pw.rho_d[0] / (cfg.c_u as f64 * pw.rho_p[0]));
        let expect = h.column(0).mapv(|z| z * c);
        assert!(max_abs_diff((&e.h_hat - &h.column(0)).view(), expect.view()) < 1e-12);
    }

    #[test]
    fn sp_error_second_moment() {
        let cfg = SystemConfig { m: 2000, ..SystemConfig::default() };
        let beta = PathLossMap::from_fn(7, 5, |_, u| if u % 5 == 0 { 1.0 } else { 0.5 }).unwrap();
        let pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let plan = FramePlan::all_sp(35);
        let trials = 40;
        let mut err = 0.0;
        for t in 0..trials {
            let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 200 + t);
            let e = sp_ls_estimate(rx.y.view(), book.sp_pilot(0).unwrap(), pw.rho_p[0], 0).unwrap();
            err += norm_sqr((&e.h_hat - &h.column(0)).view()) / cfg.m as f64;
        }
        let sum_beta: f64 = beta.at_bs(0).iter().sum();
        let expected = 0.5 * sum_beta / (cfg.c_u as f64 * 0.5);
        let measured = err / trials as f64;
        assert!((measured / expected - 1.0).abs() < 0.1, "{measured} vs {expected}");
    }

    #[test]
    fn mf_with_perfect_estimate_recovers_data() {
        let cfg = SystemConfig { l: 1, m: 4000, c_u: 20, ..SystemConfig::default() }.with_users_per_cell(1);
        let beta = PathLossMap::new(1, 1, vec![1.0]).unwrap();
        let pw = PowerAllocation::uniform(1, 1.0).with_split(0.5);
        let plan = FramePlan::all_sp(1);
        let (h, book, f, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 5);
        let p = book.sp_pilot(0).unwrap();
        let d = mf_detect_sp(rx.y.view(), h.column(0), pw.rho_d[0], pw.rho_p[0], 1.0, p, &qpsk());
        let gain = norm_sqr(h.column(0)) / cfg.m as f64;
        for (xt, x) in d.x_tilde.iter().zip(&f.data[0]) {
            assert!((xt - x * gain).norm() < 1e-10);
        }
        assert_eq!(d.x_hat, f.data[0]);
    }

    #[test]
    fn mf_tp_noiseless_recovery() {
        let cfg = SystemConfig { l: 1, m: 64, c_u: 30, ..SystemConfig::default() }.with_users_per_cell(1);
        let beta = PathLossMap::new(1, 1, vec![0.7]).unwrap();
        let pw = PowerAllocation::uniform(1, 2.0);
        let plan = FramePlan::all_tp(1, cfg.tau);
        let (_, book, f, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 6);
        let e = tp_ls_estimate(rx.head(cfg.tau), &book, 0, 2.0).unwrap();
        let d = mf_detect_tp(rx.tail(cfg.tau), e.h_hat.view(), 0.7, 2.0, &qpsk());
        assert_eq!(d.x_hat, f.data[0]);
        let bits = qpsk().demap_all(&d.x_hat);
        assert_eq!(bits, f.bits[0]);
    }

    #[test]
    fn qpsk_decisions_ignore_beta_scale() {
        let cfg = SystemConfig { m: 32, c_u: 40, ..SystemConfig::default() };
        let beta = PathLossMap::from_fn(7, 5, |_, _| 0.4).unwrap();
        let pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let plan = FramePlan::all_sp(35);
        let (_, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.1, 7);
        let p = book.sp_pilot(0).unwrap();
        let e = sp_ls_estimate(rx.y.view(), p, pw.rho_p[0], 0).unwrap();
        let a = mf_detect_sp(rx.y.view(), e.h_hat.view(), pw.rho_d[0], pw.rho_p[0], 0.4, p, &qpsk());
        let b = mf_detect_sp(rx.y.view(), e.h_hat.view(), pw.rho_d[0], pw.rho_p[0], 4.0, p, &qpsk());
        assert_eq!(a.x_hat, b.x_hat);
        for (x, y) in a.x_tilde.iter().zip(&b.x_tilde) {
            assert!((x - y * 10.0).norm() < 1e-9 * x.norm().max(1.0));
        }
    }

    #[test]
    fn hybrid_degenerate_partitions() {
        let cfg = SystemConfig { m: 10, c_u: 50, ..SystemConfig::default() };
        let beta = PathLossMap::from_fn(7, 5, |_, _| 0.5).unwrap();
        let pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let all: Vec<usize> = (0..35).collect();

        let tp_plan = FramePlan::hybrid(35, &all, cfg.tau);
        let (_, book, _, rx) = transmit(&cfg, &tp_plan, &beta, &pw, 0.1, 8);
        let hy = hybrid_estimates(&rx, &book, &tp_plan, &pw, &[0, 3]).unwrap();
        assert_eq!(hy[1], tp_ls_estimate(rx.head(cfg.tau), &book, 3, 1.0).unwrap());

        let sp_plan = FramePlan::hybrid(35, &[], cfg.tau);
        let (_, book, _, rx) = transmit(&cfg, &sp_plan, &beta, &pw, 0.1, 9);
        let hy = hybrid_estimates(&rx, &book, &sp_plan, &pw, &[4]).unwrap();
        assert_eq!(hy[0], sp_ls_estimate(rx.y.view(), book.sp_pilot(4).unwrap(), pw.rho_p[4], 4).unwrap());

        let with_int = FramePlan::all_sp(35).with_interferers([7]);
        assert_eq!(hybrid_estimates(&rx, &book, &with_int, &pw, &[7]), Err(Error::UserNotPartitioned(7)));
    }

    #[test]
    fn hybrid_sp_error_matches_sp_only_sum() {
        // TP users silent on data: the SP error only sees SP users.
        let cfg = SystemConfig { m: 3000, c_u: 45, ..SystemConfig::default() };
        let beta = PathLossMap::from_fn(7, 5, |j, u| if u / 5 == j { 1.0 } else { 0.6 }).unwrap();
        let tp: Vec<usize> = (0..35).filter(|u| u % 5 != 0).collect();
        let plan = FramePlan::hybrid(35, &tp, cfg.tau);
        let mut pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        for &u in &tp {
            pw.q[u] = 1e-12;
        }
        let trials = 30;
        let mut err = 0.0;
        for t in 0..trials {
            let (h, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.0, 300 + t);
            let e = hybrid_estimates(&rx, &book, &plan, &pw, &[0]).unwrap();
            err += norm_sqr((&e[0].h_hat - &h.column(0)).view()) / cfg.m as f64;
        }
        let sp_len = (cfg.c_u - cfg.tau) as f64;
        let sum: f64 = (0..35).filter(|u| u % 5 == 0).map(|u| 0.5 * beta.get(0, u)).sum();
        let expected = sum / (sp_len * 0.5);
        let measured = err / trials as f64;
        assert!((measured / expected - 1.0).abs() < 0.1, "{measured} vs {expected}");
    }

    proptest! {
        #[test]
        fn sp_estimate_is_linear(scale in -5.0f64..5.0, seed in 0u64..1000) {
            let cfg = SystemConfig { m: 6, c_u: 40, ..SystemConfig::default() };
            let beta = PathLossMap::from_fn(7, 5, |_, _| 0.5).unwrap();
            let pw = PowerAllocation::uniform(35, 1.0).with_split(0.5);
            let plan = FramePlan::all_sp(35);
            let (_, book, _, rx) = transmit(&cfg, &plan, &beta, &pw, 0.1, seed);
            let p = book.sp_pilot(1).unwrap();
            let a = sp_ls_estimate(rx.y.view(), p, pw.rho_p[1], 1).unwrap();
            let ys = rx.y.mapv(|z| z * scale);
            let b = sp_ls_estimate(ys.view(), p, pw.rho_p[1], 1).unwrap();
            for (x, y) in a.h_hat.iter().zip(b.h_hat.iter()) {
                prop_assert!((x * scale - y).norm() <= 1e-10 * (1.0 + y.norm()));
            }
        }
    }
}
