//! Data-aided iterative SP channel estimation with decision feedback.
//!
//! Users are swept in decreasing order of their gain at the estimating BS.
//! Per-user vectors in this module are indexed by user, not by sweep rank;
//! `order[r]` is the user at rank `r`.

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::analytics::{q_function, q_inverse};
use crate::error::{Error, Result};
use crate::estimators::{mf_detect_sp, sp_scale, DetectionResult};
use crate::linalg::{correlate, dot_conj};
use crate::sysmodel::PowerAllocation;
use crate::waveform::{PilotBook, Qam};
use crate::C64;

/// How the feedback sets are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// One set, fixed before the first iteration: user `m` is fed back iff
    /// its own feedback lowers its predicted interference.
    #[default]
    Fixed,
    /// Re-evaluated for every target and iteration by `α < γ`.
    PerIteration,
    /// No feedback; every iteration repeats the non-iterative estimate.
    Empty,
    /// Every user is always fed back.
    All,
}

/// Decision-error variance of square `P`-QAM at MF-error variance `I`.
pub fn alpha_pqam(interference: f64, qam_order: usize) -> Result<f64> {
    if interference < 0.0 || interference.is_nan() {
        return Err(Error::NegativeInterference(interference));
    }
    let p = qam_order as f64;
    let c = 24.0 / (p.sqrt() * (p.sqrt() + 1.0));
    if interference == 0.0 {
        return Ok(0.0);
    }
    Ok(c * q_function((3.0 / (p - 1.0) / interference).sqrt()))
}

/// Largest `I` with `alpha_pqam(I) < γ`. Zero when no `I` qualifies and
/// infinite when every `I` does.
pub fn threshold_f(gamma: f64, qam_order: usize) -> f64 {
    let p = qam_order as f64;
    let arg = gamma * p.sqrt() * (p.sqrt() + 1.0) / 24.0;
    if arg <= 0.0 {
        return 0.0;
    }
    if arg >= 0.5 {
        return f64::INFINITY;
    }
    (3.0 / (p - 1.0)) / q_inverse(arg).powi(2)
}

/// α and ψ of every user after one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationStats {
    pub alpha: Vec<f64>,
    pub psi: Vec<f64>,
}

impl IterationStats {
    /// α = 1, ψ = 0: nothing has been decided yet.
    pub fn initial(n: usize) -> Self {
        IterationStats { alpha: vec![1.0; n], psi: vec![0.0; n] }
    }
}

/// Second-order statistics needed to predict interference at one BS.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictor {
    /// Gains at the estimating BS, by user.
    pub beta: Vec<f64>,
    pub rho_d2: Vec<f64>,
    pub rho_p2: Vec<f64>,
    pub sigma2: f64,
    pub antennas: usize,
    pub c_u: usize,
    pub qam_order: usize,
    beta_sum: f64,
}

impl Predictor {
    pub fn new(
        beta: &[f64],
        powers: &PowerAllocation,
        sigma2: f64,
        antennas: usize,
        c_u: usize,
        qam_order: usize,
    ) -> Self {
        Predictor {
            beta: beta.to_vec(),
            rho_d2: powers.rho_d.iter().map(|r| r * r).collect(),
            rho_p2: powers.rho_p.iter().map(|r| r * r).collect(),
            sigma2,
            antennas,
            c_u,
            qam_order,
            beta_sum: beta.iter().sum(),
        }
    }

    pub fn n_users(&self) -> usize {
        self.beta.len()
    }

    fn m(&self) -> f64 {
        self.antennas as f64
    }

    /// `β_k² + β_k·Σβ/M`.
    fn power_term(&self, k: usize) -> f64 {
        self.beta[k] * self.beta[k] + self.beta[k] * self.beta_sum / self.m()
    }

    /// ψ of `target`. Users for which `in_set` holds contribute their
    /// decision-error terms: from `current` if `ahead(k)`, else from
    /// `previous`. All other users contribute their full data power.
    pub fn psi_recursion(
        &self,
        target: usize,
        in_set: impl Fn(usize) -> bool,
        ahead: impl Fn(usize) -> bool,
        current: &IterationStats,
        previous: &IterationStats,
    ) -> f64 {
        let m2 = self.m() * self.m();
        let mut acc = 0.0;
        for k in 0..self.n_users() {
            let a = self.power_term(k);
            acc += self.rho_d2[k]
                * if in_set(k) {
                    let s = if ahead(k) { current } else { previous };
                    let (al, ps) = (s.alpha[k], s.psi[k]);
                    a * al + (1.0 + al) * ps / m2
                } else {
                    a
                };
        }
        acc += self.sigma2 * self.beta_sum / self.m();
        m2 / (self.c_u as f64 * self.rho_p2[target]) * acc
    }

    /// Predicted MF-error variance of `target` given its ψ.
    pub fn predict_interference(&self, target: usize, psi: f64) -> f64 {
        let (b, r2, m) = (self.beta[target], self.rho_d2[target], self.m());
        ((self.beta_sum - b) * b / (m * r2) + self.sigma2 * b / (m * r2) + psi / (m * m * r2)) / (b * b)
    }

    /// Largest decision-error variance for which feeding back user `k`
    /// lowers the interference of others.
    pub fn gamma(&self, k: usize, psi_k: f64) -> f64 {
        let a = self.power_term(k);
        let e = psi_k / (self.m() * self.m());
        (a - e) / (a + e)
    }

    fn alpha_of(&self, interference: f64) -> f64 {
        alpha_pqam(interference, self.qam_order).expect("predicted interference is non-negative")
    }

    /// Fixed-rule membership: feeding back user `k`'s own data at the
    /// second iteration beats no feedback at the first.
    pub fn fixed_member(&self, k: usize) -> bool {
        let n = self.n_users();
        let zero = IterationStats::initial(n);
        let psi1 = self.psi_recursion(k, |_| false, |_| false, &zero, &zero);
        let i1 = self.predict_interference(k, psi1);
        let mut first = zero.clone();
        first.alpha[k] = self.alpha_of(i1);
        first.psi[k] = psi1;
        let psi2 = self.psi_recursion(k, |u| u == k, |_| false, &first, &first);
        self.predict_interference(k, psi2) < i1
    }
}

/// Users sorted by decreasing gain; equal gains keep index order.
pub fn sweep_order(beta: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..beta.len()).collect();
    order.sort_by(|&a, &b| beta[b].total_cmp(&beta[a]));
    order
}

/// Predicted statistics and feedback sets for every iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub order: Vec<usize>,
    /// `stats[i]` after iteration `i`; `stats[0]` is the initial state.
    pub stats: Vec<IterationStats>,
    /// `interference[i][k]` is the predicted `I` of user `k` at iteration
    /// `i ≥ 1`; row 0 is unused and zero.
    pub interference: Vec<Vec<f64>>,
    /// `sets[i][m]`: users fed back when estimating `m` at iteration `i ≥ 1`.
    pub sets: Vec<Vec<Vec<usize>>>,
}

impl Schedule {
    pub fn iterations(&self) -> usize {
        self.stats.len() - 1
    }
}

pub fn predict_schedule(predictor: &Predictor, iterations: usize, rule: SelectionRule) -> Schedule {
    let n = predictor.n_users();
    let order = sweep_order(&predictor.beta);
    let mut rank = vec![0; n];
    for (r, &u) in order.iter().enumerate() {
        rank[u] = r;
    }
    let fixed: Vec<bool> = match rule {
        SelectionRule::Fixed => (0..n).map(|k| predictor.fixed_member(k)).collect(),
        SelectionRule::All => vec![true; n],
        _ => vec![false; n],
    };
    let mut stats = vec![IterationStats::initial(n)];
    let mut interference = vec![vec![0.0; n]];
    let mut sets = vec![vec![Vec::new(); n]];
    // accept[k]: α_k < γ_k with the latest stats of k.
    let mut accept_prev = vec![false; n];
    for _ in 1..=iterations {
        let prev = stats.last().expect("initial stats").clone();
        let mut cur = prev.clone();
        let mut accept_cur = accept_prev.clone();
        let mut row_i = vec![0.0; n];
        let mut row_sets = vec![Vec::new(); n];
        for &m in &order {
            let member = |k: usize| match rule {
                SelectionRule::PerIteration => {
                    if rank[k] < rank[m] {
                        accept_cur[k]
                    } else {
                        accept_prev[k]
                    }
                }
                _ => fixed[k],
            };
            let set: Vec<usize> = (0..n).filter(|&k| member(k)).collect();
            let psi = predictor.psi_recursion(m, member, |k| rank[k] < rank[m], &cur, &prev);
            let i_m = predictor.predict_interference(m, psi);
            let alpha = predictor.alpha_of(i_m);
            cur.psi[m] = psi;
            cur.alpha[m] = alpha;
            accept_cur[m] = alpha < predictor.gamma(m, psi);
            row_i[m] = i_m;
            row_sets[m] = set;
        }
        stats.push(cur);
        interference.push(row_i);
        sets.push(row_sets);
        accept_prev = accept_cur;
    }
    Schedule { order, stats, interference, sets }
}

/// One feedback term applied in the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub target: usize,
    pub source: usize,
    /// Iteration whose estimates of `source` were used.
    pub source_iteration: usize,
}

/// Estimates and detections after a run of the iterative estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationState {
    /// Iterations completed.
    pub i: usize,
    pub order: Vec<usize>,
    pub h_hat: Vec<Array1<C64>>,
    pub x_hat: Vec<Vec<C64>>,
    /// Detections of every user after each iteration; `history[i − 1]`.
    pub history: Vec<Vec<DetectionResult>>,
    pub alpha: Vec<f64>,
    pub psi: Vec<f64>,
    pub interference: Vec<f64>,
    /// Feedback sets of the final iteration, by target user.
    pub user_sets: Vec<Vec<usize>>,
}

/// Received block and the per-user quantities the sweep needs. Every user
/// must carry an SP pilot spanning the whole block.
#[derive(Clone, Copy, Debug)]
pub struct IterativeInputs<'a> {
    pub y: ArrayView2<'a, C64>,
    pub book: &'a PilotBook,
    pub powers: &'a PowerAllocation,
    pub qam: &'a Qam,
}

pub fn iterative_estimate(
    inputs: &IterativeInputs,
    predictor: &Predictor,
    schedule: &Schedule,
) -> Result<IterationState> {
    run(inputs, predictor, schedule, None)
}

/// As [`iterative_estimate`], also recording every feedback term.
pub fn iterative_estimate_traced(
    inputs: &IterativeInputs,
    predictor: &Predictor,
    schedule: &Schedule,
) -> Result<(IterationState, Vec<TraceEntry>)> {
    let mut trace = Vec::new();
    let state = run(inputs, predictor, schedule, Some(&mut trace))?;
    Ok((state, trace))
}

fn run(
    inputs: &IterativeInputs,
    predictor: &Predictor,
    schedule: &Schedule,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<IterationState> {
    let n = predictor.n_users();
    let (rows, c_u) = inputs.y.dim();
    if n > c_u {
        return Err(Error::PilotCapacity { users: n, length: c_u });
    }
    if schedule.iterations() == 0 {
        return Err(Error::InvalidConfig("at least one iteration is required".into()));
    }
    if inputs.powers.len() != n || schedule.order.len() != n {
        return Err(Error::Dimension(format!("{n} gains, {} powers", inputs.powers.len())));
    }
    let pilots = (0..n).map(|u| inputs.book.sp_pilot(u)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = pilots.iter().find(|p| p.len() != c_u) {
        return Err(Error::Dimension(format!("pilot of length {} in a block of {c_u}", p.len())));
    }
    if let Some(&r) = inputs.powers.rho_p.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::ZeroPilotAmplitude(r));
    }
    let mut rank = vec![0; n];
    for (r, &u) in schedule.order.iter().enumerate() {
        rank[u] = r;
    }
    let mut h_prev: Vec<Array1<C64>> = vec![Array1::zeros(rows); n];
    let mut x_prev: Vec<Array1<C64>> = vec![Array1::zeros(c_u); n];
    let mut history = Vec::with_capacity(schedule.iterations());
    for i in 1..=schedule.iterations() {
        let mut h_cur = h_prev.clone();
        let mut x_cur = x_prev.clone();
        let mut detections: Vec<Option<DetectionResult>> = vec![None; n];
        for &m in &schedule.order {
            let p = pilots[m];
            let mut corr = correlate(inputs.y, p);
            for &k in &schedule.sets[i][m] {
                let ahead = rank[k] < rank[m];
                let (h, x) = if ahead { (&h_cur[k], &x_cur[k]) } else { (&h_prev[k], &x_prev[k]) };
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEntry {
                        iteration: i,
                        target: m,
                        source: k,
                        source_iteration: if ahead { i } else { i - 1 },
                    });
                }
                let w = dot_conj(x.view(), p) * inputs.powers.rho_d[k];
                corr.zip_mut_with(h, |c, hv| *c -= hv * w);
            }
            let h_hat = sp_scale(corr, c_u, inputs.powers.rho_p[m]);
            let det = mf_detect_sp(
                inputs.y,
                h_hat.view(),
                inputs.powers.rho_d[m],
                inputs.powers.rho_p[m],
                predictor.beta[m],
                p,
                inputs.qam,
            );
            x_cur[m] = Array1::from(det.x_hat.clone());
            h_cur[m] = h_hat;
            detections[m] = Some(det);
        }
        history.push(detections.into_iter().map(|d| d.expect("every user is swept")).collect());
        h_prev = h_cur;
        x_prev = x_cur;
    }
    let last = schedule.iterations();
    Ok(IterationState {
        i: last,
        order: schedule.order.clone(),
        h_hat: h_prev,
        x_hat: x_prev.into_iter().map(|x| x.to_vec()).collect(),
        history,
        alpha: schedule.stats[last].alpha.clone(),
        psi: schedule.stats[last].psi.clone(),
        interference: schedule.interference[last].clone(),
        user_sets: schedule.sets[last].clone(),
    })
}
