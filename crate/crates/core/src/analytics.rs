//! Closed-form SINR, rate, power-split and crossover expressions.
//!
//! Empty interference sums yield `f64::INFINITY`. Gains passed in may be raw
//! (with the matching [`PowerAllocation`]) or already normalized with unit
//! powers; every expression here is invariant under that reduction.

use statrs::function::erf::{erfc, erfc_inv};

use crate::config::SystemConfig;
use crate::hybrid::Partition;
use crate::sysmodel::{PathLossMap, PowerAllocation};

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] on (0, 1).
pub fn q_inverse(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// How SINR maps to spectral efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RateCap {
    /// `log2(1 + SINR)`; infinite SINR gives infinite rate.
    #[default]
    Gaussian,
    /// `min(log2(1 + SINR), log2 P)`.
    Constellation(usize),
}

impl RateCap {
    pub fn rate(self, weight: f64, sinr: f64) -> f64 {
        let r = (1.0 + sinr).log2();
        weight
            * match self {
                RateCap::Gaussian => r,
                RateCap::Constellation(p) => r.min((p as f64).log2()),
            }
    }
}

/// Cells sharing TP pilots with cell `j` (including `j`).
pub fn co_pilot_cells(l: usize, r: usize, j: usize) -> Vec<usize> {
    (0..l).filter(|c| c % r == j % r).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct AnalyticInputs<'a> {
    pub beta: &'a PathLossMap,
    pub powers: &'a PowerAllocation,
    pub config: &'a SystemConfig,
}

impl<'a> AnalyticInputs<'a> {
    pub fn new(beta: &'a PathLossMap, powers: &'a PowerAllocation, config: &'a SystemConfig) -> Self {
        AnalyticInputs { beta, powers, config }
    }

    fn user(&self, cell: usize, m: usize) -> usize {
        cell * self.beta.users_per_cell() + m
    }

    /// Power-weighted gain `β·q` of `user` at BS `j`.
    fn gain(&self, j: usize, user: usize) -> f64 {
        self.beta.get(j, user) * self.powers.q[user]
    }
}

/// TP SINR of user `m` in cell `j` as `M → ∞`: own gain squared over the
/// co-pilot gains squared, all weighted by transmit power.
pub fn sinr_tp_asymptotic(inputs: &AnalyticInputs, j: usize, m: usize) -> f64 {
    let c = inputs.config;
    let own = inputs.gain(j, inputs.user(j, m)).powi(2);
    let contamination: f64 = co_pilot_cells(inputs.beta.n_cells(), c.r, j)
        .into_iter()
        .filter(|&l| l != j)
        .map(|l| inputs.gain(j, inputs.user(l, m)).powi(2))
        .sum();
    ratio(own, contamination)
}

pub fn rate_tp(config: &SystemConfig, sinr: f64, cap: RateCap) -> f64 {
    cap.rate((config.c_u - config.tau) as f64 / config.c as f64, sinr)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// SP SINR at finite `M` for the non-iterative estimator. The double sum
/// runs over all ordered pairs of distinct users, both different from the
/// target.
pub fn sinr_sp_finite_m(inputs: &AnalyticInputs, j: usize, m: usize) -> f64 {
    let c = inputs.config;
    let p = inputs.powers;
    let n_users = inputs.beta.n_users();
    let u = inputs.user(j, m);
    let beta = inputs.beta.at_bs(j);
    let (mm, cu) = (c.m as f64, c.c_u as f64);
    let own = p.rho_d[u].powi(2) * beta[u];
    let scale = cu * p.rho_p[u].powi(2) * own * beta[u];

    let mut self_term = 0.0;
    let mut data_total = 0.0;
    for n in 0..n_users {
        self_term += p.rho_d[n].powi(2) * p.q[n] * beta[n].powi(2);
        data_total += p.rho_d[n].powi(2) * beta[n];
    }
    let mut cross = 0.0;
    let mut pairs = 0.0;
    for n in (0..n_users).filter(|&n| n != u) {
        cross += beta[n] * p.q[n];
        pairs += beta[n] * p.q[n] * (data_total - p.rho_d[n].powi(2) * beta[n]);
    }
    1.0 / (self_term / scale + (cross / own + pairs / scale) / mm)
}

/// SP SINR of the non-iterative estimator as `M → ∞`.
pub fn sinr_sp_asymptotic(inputs: &AnalyticInputs, j: usize, m: usize) -> f64 {
    let p = inputs.powers;
    let u = inputs.user(j, m);
    let beta = inputs.beta.at_bs(j);
    let interference: f64 =
        (0..inputs.beta.n_users()).map(|n| p.rho_d[n].powi(2) * p.q[n] * beta[n].powi(2)).sum::<f64>()
            / inputs.config.c_u as f64;
    ratio(p.rho_p[u].powi(2) * p.rho_d[u].powi(2) * beta[u].powi(2), interference)
}

pub fn rate_sp(config: &SystemConfig, sinr: f64, cap: RateCap) -> f64 {
    cap.rate(config.c_u as f64 / config.c as f64, sinr)
}

/// Lower bound on the SP SINR for a common data fraction `λ²` under
/// statistics-aware power control. Zero at the endpoints.
pub fn sinr_sp_lower_bound(l: usize, k: usize, c_u: usize, m: usize, lambda2: f64) -> f64 {
    if !(lambda2 > 0.0 && lambda2 < 1.0) {
        return 0.0;
    }
    let n = (l * k) as f64;
    let (cu, mm) = (c_u as f64, m as f64);
    let mu2 = 1.0 - lambda2;
    1.0 / (n / (cu * mu2) + ((n - 1.0) / lambda2 + (n - 1.0).powi(2) / (cu * mu2)) / mm)
}

/// Data fraction maximizing the lower bound, as `((λ², μ²) exact, (λ², μ²) approx)`.
pub fn optimal_rho(m: usize, l: usize, k: usize, c_u: usize) -> ((f64, f64), (f64, f64)) {
    let n = (l * k) as f64;
    let (cu, mm) = (c_u as f64, m as f64);
    let exact = 1.0 / (1.0 + ((n / cu + (n - 1.0).powi(2) / (mm * cu)) / ((n - 1.0) / mm)).sqrt());
    let approx = 1.0 / (1.0 + ((mm + n) / cu).sqrt());
    ((exact, 1.0 - exact), (approx, 1.0 - approx))
}

/// Uplink length beyond which SP beats TP for user `m` of cell `j`.
pub fn kappa(inputs: &AnalyticInputs, j: usize, m: usize) -> f64 {
    let p = inputs.powers;
    let u = inputs.user(j, m);
    let beta = inputs.beta.at_bs(j);
    let sp: f64 = (0..inputs.beta.n_users()).map(|n| p.rho_d[n].powi(2) * p.q[n] * beta[n].powi(2)).sum::<f64>()
        * p.q[u].powi(2)
        / (p.rho_p[u].powi(2) * p.rho_d[u].powi(2));
    let tp: f64 = co_pilot_cells(inputs.beta.n_cells(), inputs.config.r, j)
        .into_iter()
        .filter(|&l| l != j)
        .map(|l| inputs.gain(j, inputs.user(l, m)).powi(2))
        .sum();
    ratio(sp, tp)
}

/// κ for unit home gains, common cross gain `beta`, `r = 1` and `ρ_d² = ρ_p²`.
pub fn kappa_symmetric(k: usize, l: usize, beta: f64) -> f64 {
    2.0 * k as f64 * (1.0 + 1.0 / ((l as f64 - 1.0) * beta * beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PilotKind {
    Tp,
    Sp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserRate {
    pub user: usize,
    pub kind: PilotKind,
    pub sinr: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridRates {
    pub users: Vec<UserRate>,
    pub tp_sum: f64,
    pub sp_sum: f64,
}

impl HybridRates {
    pub fn sum(&self) -> f64 {
        self.tp_sum + self.sp_sum
    }
}

/// Asymptotic rates of the users of cell `j` in a hybrid frame. TP users see
/// only co-pilot TP users; SP users see only SP users, over a pilot of
/// `C_u − τ` symbols. Users in neither set are silent. τ drops to 0 when
/// nobody uses TP.
pub fn hybrid_rates(inputs: &AnalyticInputs, partition: &Partition, j: usize, cap: RateCap) -> HybridRates {
    let c = inputs.config;
    let p = inputs.powers;
    let k = inputs.beta.users_per_cell();
    let tau = if partition.u_tp.is_empty() { 0 } else { c.tau };
    let slot = (c.c_u - tau) as f64;
    let weight = slot / c.c as f64;
    let beta = inputs.beta.at_bs(j);
    let sp_interference: f64 =
        partition.u_sp.iter().map(|&n| p.rho_d[n].powi(2) * p.q[n] * beta[n].powi(2)).sum::<f64>() / slot;
    let co_pilot = co_pilot_cells(inputs.beta.n_cells(), c.r, j);

    let mut out = HybridRates { users: Vec::new(), tp_sum: 0.0, sp_sum: 0.0 };
    for m in 0..k {
        let u = inputs.user(j, m);
        let (kind, sinr) = if partition.u_tp.contains(&u) {
            let contamination: f64 = co_pilot
                .iter()
                .filter(|&&l| l != j && partition.u_tp.contains(&inputs.user(l, m)))
                .map(|&l| inputs.gain(j, inputs.user(l, m)).powi(2))
                .sum();
            (PilotKind::Tp, ratio(inputs.gain(j, u).powi(2), contamination))
        } else if partition.u_sp.contains(&u) {
            let own = p.rho_p[u].powi(2) * p.rho_d[u].powi(2) * beta[u].powi(2);
            (PilotKind::Sp, ratio(own, sp_interference))
        } else {
            continue;
        };
        let rate = cap.rate(weight, sinr);
        match kind {
            PilotKind::Tp => out.tp_sum += rate,
            PilotKind::Sp => out.sp_sum += rate,
        }
        out.users.push(UserRate { user: u, kind, sinr, rate });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::normalize;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Unit home gains, common cross gain `b`.
    fn symmetric(l: usize, k: usize, b: f64) -> PathLossMap {
        PathLossMap::from_fn(l, k, |j, u| if u / k == j { 1.0 } else { b }).unwrap()
    }

    fn cfg(l: usize, k: usize, m: usize, c_u: usize) -> SystemConfig {
        SystemConfig { l, m, c_u, c: 2 * c_u.max(100), ..SystemConfig::default() }.with_users_per_cell(k)
    }

    /// Literal tuple-indexed evaluation of the finite-M SP SINR.
    fn finite_m_oracle(beta: &PathLossMap, p: &PowerAllocation, c: &SystemConfig, j: usize, m: usize) -> f64 {
        let (l, k) = (beta.n_cells(), beta.users_per_cell());
        let (mm, cu) = (c.m as f64, c.c_u as f64);
        let u = j * k + m;
        let b = |cell: usize, idx: usize| beta.get(j, cell * k + idx);
        let (rd, rp, q) = (|n: usize| p.rho_d[n].powi(2), |n: usize| p.rho_p[n].powi(2), |n: usize| p.q[n]);
        let bm = b(j, m);
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        let mut t3 = 0.0;
        for l1 in 0..l {
            for k1 in 0..k {
                let n1 = l1 * k + k1;
                t1 += rd(n1) * q(n1) * b(l1, k1).powi(2) / (cu * rp(u) * rd(u) * bm * bm);
                if (l1, k1) == (j, m) {
                    continue;
                }
                t2 += b(l1, k1) * q(n1) / (rd(u) * bm);
                for l2 in 0..l {
                    for k2 in 0..k {
                        if (l2, k2) == (l1, k1) {
                            continue;
                        }
                        let n2 = l2 * k + k2;
                        t3 += rd(n2) * b(l1, k1) * b(l2, k2) * q(n1) / (cu * rp(u) * rd(u) * bm * bm);
                    }
                }
            }
        }
        1.0 / (t1 + (t2 + t3) / mm)
    }

    #[test]
    fn optimal_rho_reference_values() {
        let ((exact, mu_exact), (approx, mu_approx)) = optimal_rho(100, 7, 5, 100);
        assert!((exact - 0.4608).abs() < 5e-4, "{exact}");
        assert!((approx - 0.4626).abs() < 5e-4, "{approx}");
        assert_eq!(exact + mu_exact, 1.0);
        assert_eq!(approx + mu_approx, 1.0);
        let (far, _) = optimal_rho(1_000_000_000, 7, 5, 100);
        assert!(far.0 < 0.01 && far.0 > 0.0);
    }

    #[test]
    fn lower_bound_peaks_at_optimum() {
        for (m, l, k, c_u) in [(100, 7, 5, 100), (300, 7, 10, 70), (50, 19, 2, 40)] {
            let (exact, _) = optimal_rho(m, l, k, c_u);
            let grid: Vec<f64> = (1..10_000).map(|i| i as f64 / 10_000.0).collect();
            let best = grid
                .iter()
                .copied()
                .max_by(|a, b| sinr_sp_lower_bound(l, k, c_u, m, *a).total_cmp(&sinr_sp_lower_bound(l, k, c_u, m, *b)))
                .unwrap();
            assert!((best - exact.0).abs() <= 1e-4 + 1e-12, "{best} vs {}", exact.0);
        }
        assert_eq!(sinr_sp_lower_bound(7, 5, 100, 100, 0.0), 0.0);
        assert_eq!(sinr_sp_lower_bound(7, 5, 100, 100, 1.0), 0.0);
    }

    #[test]
    fn kappa_reference_values() {
        assert!((kappa_symmetric(5, 7, 1.0) - 11.667).abs() < 1e-3);
        assert!((kappa_symmetric(5, 7, 0.5) - 16.667).abs() < 1e-3);
        assert!(kappa_symmetric(5, 7, 1e-6) > 1e10);
        let c = cfg(7, 5, 100, 100);
        let beta = symmetric(7, 5, 0.5);
        let p = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        assert_relative_eq!(kappa(&inputs, 0, 2), kappa_symmetric(5, 7, 0.5), max_relative = 1e-12);
    }

    #[test]
    fn crossover_at_kappa() {
        let beta = symmetric(7, 5, 0.5);
        let p = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        for (c_u, sp_wins) in [(18, true), (15, false)] {
            let c = cfg(7, 5, 100, c_u);
            let inputs = AnalyticInputs::new(&beta, &p, &c);
            let sp = sinr_sp_asymptotic(&inputs, 0, 0);
            let tp = sinr_tp_asymptotic(&inputs, 0, 0);
            assert_relative_eq!(sp, c_u as f64 / 25.0, max_relative = 1e-12);
            assert_eq!(sp > tp, sp_wins);
        }
    }

    #[test]
    fn tp_examples() {
        let c = cfg(7, 1, 100, 100);
        let beta = symmetric(7, 1, 0.5);
        let p = PowerAllocation::uniform(7, 1.0);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        assert_relative_eq!(sinr_tp_asymptotic(&inputs, 0, 0), 1.0 / 1.5, max_relative = 1e-12);
        let no_reuse = c.clone().with_reuse(7);
        let inputs = AnalyticInputs::new(&beta, &p, &no_reuse);
        assert_eq!(sinr_tp_asymptotic(&inputs, 0, 0), f64::INFINITY);
        assert_eq!(rate_tp(&no_reuse, f64::INFINITY, RateCap::Constellation(16)), (100.0 - 7.0) / 200.0 * 4.0);
        let c35 = SystemConfig { tau: 35, c_u: 100, c: 200, ..SystemConfig::default() };
        assert_relative_eq!(rate_tp(&c35, 1.0, RateCap::Gaussian), 0.325);
    }

    #[test]
    fn asymptotic_sp_examples() {
        let c = cfg(7, 5, 100, 100);
        let beta = symmetric(7, 5, 1.0);
        let p = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        assert_relative_eq!(sinr_sp_asymptotic(&inputs, 0, 0), 100.0 / 70.0, max_relative = 1e-12);

        let single = PathLossMap::new(1, 1, vec![1.0]).unwrap();
        let q = 3.0;
        let ps = PowerAllocation::uniform(1, q).with_split(0.4);
        let c1 = cfg(1, 1, 100, 64);
        let inputs = AnalyticInputs::new(&single, &ps, &c1);
        assert_relative_eq!(sinr_sp_asymptotic(&inputs, 0, 0), 64.0 * ps.rho_p[0].powi(2) / q, max_relative = 1e-12);
    }

    #[test]
    fn finite_m_matches_tuple_oracle_and_symmetric_value() {
        let c = cfg(7, 5, 100, 100);
        let beta = symmetric(7, 5, 1.0);
        let p = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        let got = sinr_sp_finite_m(&inputs, 0, 0);
        // 35·0.5/(100·0.25) + (34/0.5 + 34·(17.5 − 0.5)/(100·0.25))/100
        let hand = 1.0 / (0.7 + (68.0 + 23.12) / 100.0);
        assert_relative_eq!(got, hand, max_relative = 1e-12);
        assert_relative_eq!(got, finite_m_oracle(&beta, &p, &c, 0, 0), max_relative = 1e-12);
    }

    #[test]
    fn sp_rate_weight() {
        let c = cfg(7, 5, 100, 100);
        assert_relative_eq!(rate_sp(&c, 1.0, RateCap::Gaussian), 0.5);
        assert_eq!(rate_sp(&c, 1e9, RateCap::Constellation(16)), 0.5 * 4.0);
    }

    #[test]
    fn hybrid_degenerates_to_tp() {
        let c = cfg(7, 5, 100, 100);
        let beta = symmetric(7, 5, 0.3);
        let p = PowerAllocation::uniform(35, 1.0).with_split(0.5);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        let all = Partition::all_tp(35);
        let h = hybrid_rates(&inputs, &all, 0, RateCap::Gaussian);
        for ur in &h.users {
            let sinr = sinr_tp_asymptotic(&inputs, 0, ur.user);
            assert_relative_eq!(ur.sinr, sinr, max_relative = 1e-12);
            assert_relative_eq!(ur.rate, rate_tp(&c, sinr, RateCap::Gaussian), max_relative = 1e-12);
        }
    }

    #[test]
    fn hybrid_single_sp_user() {
        let c = cfg(1, 2, 100, 100);
        let beta = PathLossMap::new(1, 2, vec![1.0, 1.0]).unwrap();
        let p = PowerAllocation::uniform(2, 1.0).with_split(0.3);
        let inputs = AnalyticInputs::new(&beta, &p, &c);
        let part = Partition::new(BTreeSet::from([0]), BTreeSet::from([1]), 2).unwrap();
        let h = hybrid_rates(&inputs, &part, 0, RateCap::Gaussian);
        let sp = h.users.iter().find(|u| u.kind == PilotKind::Sp).unwrap();
        assert_relative_eq!(sp.sinr, (100.0 - c.tau as f64) * 0.7, max_relative = 1e-12);
    }

    #[test]
    fn q_function_values() {
        assert_relative_eq!(q_function(0.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(q_function(1.0), 0.158_655_253_931_457_05, max_relative = 1e-10);
        assert_relative_eq!(q_inverse(q_function(1.7)), 1.7, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn finite_m_tuple_oracle_random(
            l in prop::sample::select(vec![1usize, 2, 3]),
            k in 1usize..4,
            seed in any::<u64>(),
        ) {
            let n = l * k;
            let mut s = seed;
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64) / ((1u64 << 53) as f64) };
            let beta = PathLossMap::from_fn(l, k, |_, _| 0.05 + next()).unwrap();
            let mut p = PowerAllocation::uniform(n, 1.0);
            for u in 0..n {
                p.q[u] = 0.5 + next();
                let f = 0.1 + 0.8 * next();
                p.rho_d[u] = (f * p.q[u]).sqrt();
                p.rho_p[u] = ((1.0 - f) * p.q[u]).sqrt();
            }
            let c = cfg(l, k, 37, 20);
            let inputs = AnalyticInputs::new(&beta, &p, &c);
            for j in 0..l {
                for m in 0..k {
                    let a = sinr_sp_finite_m(&inputs, j, m);
                    let b = finite_m_oracle(&beta, &p, &c, j, m);
                    prop_assert!((a - b).abs() <= 1e-10 * b.abs());
                }
            }
        }

        #[test]
        fn equivalent_system_invariance(seed in any::<u64>(), lambda2 in 0.1f64..0.9) {
            let mut s = seed;
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64) / ((1u64 << 53) as f64) };
            let beta = PathLossMap::from_fn(3, 2, |_, _| 0.05 + 2.0 * next()).unwrap();
            let mut p = PowerAllocation::uniform(6, 1.0);
            for u in 0..6 { p.q[u] = 0.2 + 3.0 * next(); }
            let p = p.with_split(lambda2);
            let (bar, pn) = normalize(&beta, &p);
            let c = cfg(3, 2, 64, 30);
            let raw = AnalyticInputs::new(&beta, &p, &c);
            let eq = AnalyticInputs::new(&bar, &pn, &c);
            for m in 0..2 {
                let a = sinr_sp_finite_m(&raw, 0, m);
                let b = sinr_sp_finite_m(&eq, 0, m);
                prop_assert!((a - b).abs() <= 1e-9 * a);
                let a = sinr_sp_asymptotic(&raw, 0, m);
                let b = sinr_sp_asymptotic(&eq, 0, m);
                prop_assert!((a - b).abs() <= 1e-9 * a);
                let a = sinr_tp_asymptotic(&raw, 0, m);
                let b = sinr_tp_asymptotic(&eq, 0, m);
                prop_assert!((a - b).abs() <= 1e-9 * a);
            }
        }

        #[test]
        fn finite_m_converges_to_asymptotic(seed in any::<u64>()) {
            let mut s = seed;
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64) / ((1u64 << 53) as f64) };
            let beta = PathLossMap::from_fn(7, 2, |j, u| if u / 2 == j { 1.0 } else { next() }).unwrap();
            let p = PowerAllocation::uniform(14, 1.0).with_split(0.4);
            let c = cfg(7, 2, 1_000_000_000_000, 50);
            let inputs = AnalyticInputs::new(&beta, &p, &c);
            let a = sinr_sp_finite_m(&inputs, 0, 1);
            let b = sinr_sp_asymptotic(&inputs, 0, 1);
            prop_assert!((a - b).abs() <= 1e-6 * b);
        }

        #[test]
        fn lower_bound_below_asymptotic_symmetric(l in 2usize..8, k in 1usize..6, m in 10usize..500, lambda2 in 0.05f64..0.95) {
            let c_u = (l * k).max(10) + 5;
            let c = cfg(l, k, m, c_u);
            let beta = PathLossMap::from_fn(l, k, |_, _| 1.0).unwrap();
            let p = PowerAllocation::uniform(l * k, 1.0).with_split(lambda2);
            let inputs = AnalyticInputs::new(&beta, &p, &c);
            let lb = sinr_sp_lower_bound(l, k, c_u, m, lambda2);
            prop_assert!(lb <= sinr_sp_asymptotic(&inputs, 0, 0) * (1.0 + 1e-12));
            prop_assert!(lb <= sinr_sp_finite_m(&inputs, 0, 0) * (1.0 + 1e-12));
        }

        #[test]
        fn lower_bound_holds_for_bounded_cross_gains(seed in any::<u64>(), lambda2 in 0.05f64..0.95) {
            let mut s = seed;
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64) / ((1u64 << 53) as f64) };
            let (l, k) = (7, 3);
            let beta = PathLossMap::from_fn(l, k, |j, u| if u / k == j { 1.0 } else { next() }).unwrap();
            let p = PowerAllocation::uniform(l * k, 1.0).with_split(lambda2);
            let c = cfg(l, k, 120, 40);
            let inputs = AnalyticInputs::new(&beta, &p, &c);
            let lb = sinr_sp_lower_bound(l, k, 40, 120, lambda2);
            for m in 0..k {
                prop_assert!(lb <= sinr_sp_finite_m(&inputs, 0, m) * (1.0 + 1e-12));
            }
        }
    }
}
