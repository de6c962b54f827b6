use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{count_ber, empirical_cdf, measure_empirical_sinr, SinrMeasurement};
use super::records::{ExperimentKind, Method, Metric, MetricsRecord, UserTag};
use crate::analytics::{hybrid_rates, sinr_sp_finite_m, sinr_tp_asymptotic, AnalyticInputs, RateCap};
use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    hybrid_estimates, mf_detect_sp, mf_detect_tp, sp_ls_estimate, tp_ls_estimate, DetectionResult,
};
use crate::hybrid::{greedy_partition, CostModel, Partition};
use crate::iterative::{iterative_estimate, predict_schedule, IterativeInputs, Predictor, Schedule};
use crate::rng::{Purpose, StreamKey};
use crate::sysmodel::{
    draw_channels, normalize, path_loss, place_users, received_sir, statistics_aware_power, PathLossMap,
    PowerAllocation,
};
use crate::waveform::{
    assemble_frames, make_pilot_books, synthesize_received, DataModel, FramePlan, FrameSet, PilotBook, Qam, SpLayout,
    UserScheme,
};
use crate::REFERENCE_CELL;

/// Monte-Carlo settings; which fields matter depends on the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentParams {
    /// Trials per sweep point; placements for `sinr_cdf`.
    pub trials: usize,
    /// M values, K values, or user-circle radii in metres. Unused by `sinr_cdf`.
    pub sweep: Vec<f64>,
    /// Channel and data realizations per placement (`sinr_cdf`).
    pub realizations: usize,
    /// Antennas per user (`ber_vs_k`).
    pub m_per_k: usize,
    /// Received power target of SP users (`sum_rate_vs_sir`).
    pub sp_omega: f64,
    /// Transmit power of TP users and outer-tier interferers (`sum_rate_vs_sir`).
    pub tp_power: f64,
    /// Cells over which users are partitioned and rates reported (`sum_rate_vs_sir`).
    pub central_cells: usize,
    /// Greedy partitioner accepts only strict cost decreases.
    pub strict_greedy: bool,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            trials: 200,
            sweep: vec![50.0, 100.0, 200.0, 300.0],
            realizations: 20,
            m_per_k: 50,
            sp_omega: 10.0,
            tp_power: 1.0,
            central_cells: 7,
            strict_greedy: false,
        }
    }
}

impl ExperimentParams {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = ExperimentParams::default();
        match kind {
            ExperimentKind::SinrVsM | ExperimentKind::RateVsM => base,
            ExperimentKind::SinrCdf => ExperimentParams { trials: 100, sweep: Vec::new(), ..base },
            ExperimentKind::BerVsK => {
                ExperimentParams { trials: 200, sweep: (1..=10).map(f64::from).collect(), ..base }
            }
            ExperimentKind::SumRateVsSir => {
                ExperimentParams { trials: 100, sweep: (2..=9).map(|r| f64::from(r) * 100.0).collect(), ..base }
            }
        }
    }
}

impl ExperimentKind {
    /// System parameters the experiment starts from before overrides.
    pub fn default_config(self) -> SystemConfig {
        let base = SystemConfig::default();
        let uniform = Scenario::Uniform { cell_radius_m: 1000.0, min_dist_m: 100.0 };
        match self {
            ExperimentKind::SinrVsM => base,
            ExperimentKind::RateVsM => SystemConfig { qam_order: 16, ..base },
            ExperimentKind::SinrCdf => SystemConfig { scenario: uniform, ..base },
            ExperimentKind::BerVsK => SystemConfig { scenario: uniform, c_u: 70, ..base },
            ExperimentKind::SumRateVsSir => SystemConfig { l: 19, m: 200, c_u: 40, ..base },
        }
    }

    fn sweep_var(self) -> &'static str {
        match self {
            ExperimentKind::SinrVsM | ExperimentKind::RateVsM => "M",
            ExperimentKind::SinrCdf => "sinr_db",
            ExperimentKind::BerVsK => "K",
            ExperimentKind::SumRateVsSir => "sir_db",
        }
    }
}

/// Runs one experiment. Trials run on `threads` workers (the global pool
/// when `None`); results are reduced in trial order, so the output does not
/// depend on the thread count.
pub fn run_experiment(
    config: &SystemConfig,
    kind: ExperimentKind,
    params: &ExperimentParams,
    threads: Option<usize>,
) -> Result<Vec<MetricsRecord>> {
    config.validate()?;
    if params.trials == 0 {
        return Err(Error::InvalidSweep("trials must be at least 1".into()));
    }
    let go = || match kind {
        ExperimentKind::SinrVsM | ExperimentKind::RateVsM | ExperimentKind::BerVsK => link_sweep(config, kind, params),
        ExperimentKind::SinrCdf => sinr_cdf(config, params),
        ExperimentKind::SumRateVsSir => sum_rate_sweep(config, params),
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

fn positive_integer(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e7 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidSweep(format!("{what} = {v} is not a positive integer")))
    }
}

#[allow(clippy::too_many_arguments)]
fn record(
    kind: ExperimentKind,
    method: Method,
    sweep_value: f64,
    user: UserTag,
    metric: Metric,
    value: f64,
    trials: usize,
    analytic_value: Option<f64>,
) -> MetricsRecord {
    MetricsRecord {
        experiment: kind,
        method,
        sweep_var: kind.sweep_var().to_string(),
        sweep_value,
        user,
        metric,
        value,
        trials,
        analytic_value,
    }
}

/// Runs `trials` independent trials in parallel and returns them in order.
fn run_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(f).collect()
}

/// Everything a link-level trial needs that depends only on the layout.
struct LinkSetup {
    cfg: SystemConfig,
    beta_bar: PathLossMap,
    tp_powers: PowerAllocation,
    sp_powers: PowerAllocation,
    tp_plan: FramePlan,
    sp_plan: FramePlan,
    tp_book: PilotBook,
    sp_book: PilotBook,
    predictor: Predictor,
    schedule: Schedule,
    qam: Qam,
}

impl LinkSetup {
    fn new(cfg: &SystemConfig, key: StreamKey) -> Result<Self> {
        let n = cfg.n_users();
        if n > cfg.c_u {
            return Err(Error::PilotCapacity { users: n, length: cfg.c_u });
        }
        let layout = place_users(cfg, &mut key.stream(Purpose::Layout))?;
        let beta = path_loss(&layout, cfg.path_loss_exponent)?;
        let lambda2 = cfg.data_fraction(cfg.c_u);
        let stat = statistics_aware_power(&beta, cfg.omega)?;
        let (beta_bar, sp_powers) = normalize(&beta, &stat.with_split(lambda2));
        let tp_powers = PowerAllocation::uniform(n, 1.0);
        let tp_plan = FramePlan::all_tp(n, cfg.tau);
        let sp_plan = FramePlan::all_sp(n);
        let tp_book = make_pilot_books(cfg, &tp_plan, SpLayout::Dft)?;
        let sp_book = make_pilot_books(cfg, &sp_plan, SpLayout::Dft)?;
        let predictor = Predictor::new(
            beta_bar.at_bs(REFERENCE_CELL),
            &sp_powers,
            cfg.noise_variance(),
            cfg.m,
            cfg.c_u,
            cfg.qam_order,
        );
        let schedule = predict_schedule(&predictor, cfg.iterations, cfg.selection_rule);
        Ok(LinkSetup {
            cfg: cfg.clone(),
            beta_bar,
            tp_powers,
            sp_powers,
            tp_plan,
            sp_plan,
            tp_book,
            sp_book,
            predictor,
            schedule,
            qam: Qam::new(cfg.qam_order)?,
        })
    }

    fn methods(&self) -> Vec<Method> {
        let mut m = vec![Method::TpLs, Method::SpNoniter];
        m.extend((1..=self.cfg.iterations).map(Method::SpIter));
        m
    }

    /// Closed-form SINR of each reference-cell user, per method.
    fn analytic(&self) -> Vec<Vec<f64>> {
        let k = self.cfg.k;
        let tp = AnalyticInputs::new(&self.beta_bar, &self.tp_powers, &self.cfg);
        let sp = AnalyticInputs::new(&self.beta_bar, &self.sp_powers, &self.cfg);
        let mut out = vec![
            (0..k).map(|m| sinr_tp_asymptotic(&tp, REFERENCE_CELL, m)).collect(),
            (0..k).map(|m| sinr_sp_finite_m(&sp, REFERENCE_CELL, m)).collect(),
        ];
        for i in 1..=self.cfg.iterations {
            out.push((0..k).map(|m| 1.0 / self.schedule.interference[i][REFERENCE_CELL * k + m]).collect());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct UserAccum {
    sinr: SinrMeasurement,
    errors: u64,
    bits: u64,
}

impl UserAccum {
    fn add(&mut self, o: UserAccum) {
        self.sinr.add(o.sinr);
        self.errors += o.errors;
        self.bits += o.bits;
    }
}

/// Per method, per reference-cell user.
type LinkTally = Vec<Vec<UserAccum>>;

fn tally(
    det: &DetectionResult,
    frames: &FrameSet,
    user: usize,
    h: ndarray::ArrayView1<crate::C64>,
    beta_home: f64,
    qam: &Qam,
    gaussian: bool,
) -> UserAccum {
    let x = &frames.data[user];
    let sinr = measure_empirical_sinr(&det.x_tilde, x, h, beta_home);
    let (errors, bits) = if gaussian { (0, 0) } else { count_ber(&det.x_hat, &frames.bits[user], qam) };
    UserAccum { sinr, errors, bits }
}

/// One channel draw, one TP transmission and one SP transmission.
fn link_trial(setup: &LinkSetup, key: StreamKey) -> Result<LinkTally> {
    let cfg = &setup.cfg;
    let k = cfg.k;
    let sigma2 = cfg.noise_variance();
    let data = DataModel::Qam(setup.qam.clone());
    let ch = draw_channels(&setup.beta_bar, REFERENCE_CELL, cfg.m, &mut key.stream(Purpose::Channels));
    let refs: Vec<usize> = (0..k).map(|m| REFERENCE_CELL * k + m).collect();
    let beta0 = setup.beta_bar.at_bs(REFERENCE_CELL);
    let mut out = Vec::new();

    let tp = assemble_frames(
        cfg,
        &setup.tp_book,
        &setup.tp_powers,
        &setup.tp_plan,
        &data,
        &mut key.stream(Purpose::Data(0)),
    )?;
    let rx = synthesize_received(&ch, &tp, sigma2, &mut key.stream(Purpose::Noise(0)))?;
    let mut row = Vec::with_capacity(k);
    for &u in &refs {
        let est = tp_ls_estimate(rx.head(cfg.tau), &setup.tp_book, u, 1.0)?;
        let det = mf_detect_tp(rx.tail(cfg.tau), est.h_hat.view(), beta0[u], 1.0, &setup.qam);
        row.push(tally(&det, &tp, u, ch.h.column(u), beta0[u], &setup.qam, false));
    }
    out.push(row);

    let sp = assemble_frames(
        cfg,
        &setup.sp_book,
        &setup.sp_powers,
        &setup.sp_plan,
        &data,
        &mut key.stream(Purpose::Data(1)),
    )?;
    let rx = synthesize_received(&ch, &sp, sigma2, &mut key.stream(Purpose::Noise(1)))?;
    let p = &setup.sp_powers;
    let mut row = Vec::with_capacity(k);
    for &u in &refs {
        let pilot = setup.sp_book.sp_pilot(u)?;
        let est = sp_ls_estimate(rx.y.view(), pilot, p.rho_p[u], u)?;
        let det = mf_detect_sp(rx.y.view(), est.h_hat.view(), p.rho_d[u], p.rho_p[u], beta0[u], pilot, &setup.qam);
        row.push(tally(&det, &sp, u, ch.h.column(u), beta0[u], &setup.qam, false));
    }
    out.push(row);

    let inputs = IterativeInputs { y: rx.y.view(), book: &setup.sp_book, powers: p, qam: &setup.qam };
    let state = iterative_estimate(&inputs, &setup.predictor, &setup.schedule)?;
    for dets in &state.history {
        out.push(refs.iter().map(|&u| tally(&dets[u], &sp, u, ch.h.column(u), beta0[u], &setup.qam, false)).collect());
    }
    Ok(out)
}

fn merge(total: &mut LinkTally, t: LinkTally) {
    for (a, b) in total.iter_mut().zip(t) {
        for (x, y) in a.iter_mut().zip(b) {
            x.add(y);
        }
    }
}

fn link_point_config(
    base: &SystemConfig,
    kind: ExperimentKind,
    v: f64,
    params: &ExperimentParams,
) -> Result<SystemConfig> {
    let cfg = match kind {
        ExperimentKind::BerVsK => {
            let k = positive_integer(v, "K")?;
            SystemConfig { m: params.m_per_k * k, ..base.clone().with_users_per_cell(k) }
        }
        _ => SystemConfig { m: positive_integer(v, "M")?, ..base.clone() },
    };
    cfg.validate()?;
    if cfg.n_users() > cfg.c_u {
        return Err(Error::InvalidSweep(format!("{} users exceed C_u = {}", cfg.n_users(), cfg.c_u)));
    }
    Ok(cfg)
}

fn link_sweep(base: &SystemConfig, kind: ExperimentKind, params: &ExperimentParams) -> Result<Vec<MetricsRecord>> {
    if params.sweep.is_empty() {
        return Err(Error::InvalidSweep("empty sweep".into()));
    }
    let cap = RateCap::Constellation(base.qam_order);
    let mut records = Vec::new();
    for (pi, &v) in params.sweep.iter().enumerate() {
        let cfg = link_point_config(base, kind, v, params)?;
        let fixed_layout = matches!(cfg.scenario, Scenario::Circle { .. });
        let shared =
            if fixed_layout { Some(LinkSetup::new(&cfg, StreamKey::new(cfg.seed, pi as u64, 0))?) } else { None };
        let results = run_trials(params.trials, |t| {
            let key = StreamKey::new(cfg.seed, pi as u64, t as u64);
            let owned;
            let setup = match &shared {
                Some(s) => s,
                None => {
                    owned = LinkSetup::new(&cfg, key)?;
                    &owned
                }
            };
            Ok((link_trial(setup, key)?, setup.analytic()))
        })?;
        let methods = match &shared {
            Some(s) => s.methods(),
            None => LinkSetup::new(&cfg, StreamKey::new(cfg.seed, pi as u64, 0))?.methods(),
        };
        let k = cfg.k;
        let mut total: LinkTally = vec![vec![UserAccum::default(); k]; methods.len()];
        let mut analytic = vec![vec![0.0; k]; methods.len()];
        for (t, a) in results {
            merge(&mut total, t);
            for (row, arow) in analytic.iter_mut().zip(a) {
                for (x, y) in row.iter_mut().zip(arow) {
                    *x += y / params.trials as f64;
                }
            }
        }
        for (mi, &method) in methods.iter().enumerate() {
            let weight = |m: Method| {
                let len = if m == Method::TpLs { cfg.c_u - cfg.tau } else { cfg.c_u };
                len as f64 / cfg.c as f64
            };
            match kind {
                ExperimentKind::SinrVsM => {
                    let mut pooled = SinrMeasurement::default();
                    for m in 0..k {
                        pooled.add(total[mi][m].sinr);
                        let value = total[mi][m].sinr.sinr();
                        records.push(record(
                            kind,
                            method,
                            v,
                            UserTag::User(m),
                            Metric::Sinr,
                            value,
                            params.trials,
                            Some(analytic[mi][m]),
                        ));
                    }
                    let mean_analytic = analytic[mi].iter().sum::<f64>() / k as f64;
                    records.push(record(
                        kind,
                        method,
                        v,
                        UserTag::All,
                        Metric::Sinr,
                        pooled.sinr(),
                        params.trials,
                        Some(mean_analytic),
                    ));
                }
                ExperimentKind::RateVsM => {
                    let w = weight(method);
                    let mut sum = (0.0, 0.0);
                    for m in 0..k {
                        let r = cap.rate(w, total[mi][m].sinr.sinr());
                        let ra = cap.rate(w, analytic[mi][m]);
                        sum.0 += r / k as f64;
                        sum.1 += ra / k as f64;
                        records.push(record(
                            kind,
                            method,
                            v,
                            UserTag::User(m),
                            Metric::Rate,
                            r,
                            params.trials,
                            Some(ra),
                        ));
                    }
                    records.push(record(
                        kind,
                        method,
                        v,
                        UserTag::All,
                        Metric::Rate,
                        sum.0,
                        params.trials,
                        Some(sum.1),
                    ));
                }
                _ => {
                    let (e, b) = total[mi].iter().fold((0u64, 0u64), |acc, u| (acc.0 + u.errors, acc.1 + u.bits));
                    let ber = if b > 0 { e as f64 / b as f64 } else { 0.0 };
                    records.push(record(kind, method, v, UserTag::All, Metric::Ber, ber, params.trials, None));
                }
            }
        }
    }
    Ok(records)
}

fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Per-user SINR, each averaged over `realizations` draws for one placement.
fn sinr_cdf(base: &SystemConfig, params: &ExperimentParams) -> Result<Vec<MetricsRecord>> {
    let kind = ExperimentKind::SinrCdf;
    if params.realizations == 0 {
        return Err(Error::InvalidSweep("realizations must be at least 1".into()));
    }
    let cfg = base.clone();
    if cfg.n_users() > cfg.c_u {
        return Err(Error::InvalidSweep(format!("{} users exceed C_u = {}", cfg.n_users(), cfg.c_u)));
    }
    let r = params.realizations;
    let results = run_trials(params.trials, |placement| {
        let setup = LinkSetup::new(&cfg, StreamKey::new(cfg.seed, 0, placement as u64))?;
        let mut total: Option<LinkTally> = None;
        for i in 0..r {
            let key = StreamKey::new(cfg.seed, 1, (placement * r + i) as u64);
            let t = link_trial(&setup, key)?;
            match total.as_mut() {
                Some(acc) => merge(acc, t),
                None => total = Some(t),
            }
        }
        let total = total.expect("at least one realization");
        let sinr: Vec<Vec<f64>> = total.iter().map(|row| row.iter().map(|u| u.sinr.sinr()).collect()).collect();
        Ok((setup.methods(), sinr, setup.analytic()))
    })?;
    let methods = results[0].0.clone();
    let mut records = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        let empirical: Vec<f64> = results.iter().flat_map(|(_, s, _)| s[mi].iter().map(|&x| to_db(x))).collect();
        let mut analytic: Vec<f64> = results.iter().flat_map(|(_, _, a)| a[mi].iter().map(|&x| to_db(x))).collect();
        analytic.sort_by(f64::total_cmp);
        for (x, f) in empirical_cdf(&empirical) {
            let fa = analytic.partition_point(|&a| a <= x) as f64 / analytic.len() as f64;
            records.push(record(kind, method, x, UserTag::All, Metric::Cdf, f, params.trials, Some(fa)));
        }
    }
    Ok(records)
}

/// One of the three pilot systems compared in the sum-rate experiment.
struct RateSystem {
    method: Method,
    plan: FramePlan,
    book: PilotBook,
    beta_bar: PathLossMap,
    powers: PowerAllocation,
    analytic_sum: f64,
}

fn sum_rate_sweep(base: &SystemConfig, params: &ExperimentParams) -> Result<Vec<MetricsRecord>> {
    let kind = ExperimentKind::SumRateVsSir;
    if params.sweep.is_empty() {
        return Err(Error::InvalidSweep("empty sweep".into()));
    }
    let central = params.central_cells;
    if central == 0 || central > base.l {
        return Err(Error::InvalidSweep(format!("central_cells = {central} must lie in 1..=L")));
    }
    if !(params.sp_omega > 0.0 && params.tp_power > 0.0) {
        return Err(Error::InvalidSweep("sp_omega and tp_power must be positive".into()));
    }
    let radius = base.scenario.cell_radius_m();
    let mut records = Vec::new();
    for (pi, &v) in params.sweep.iter().enumerate() {
        if !(v > 0.0 && v < radius) {
            return Err(Error::InvalidSweep(format!("user radius {v} m outside (0, {radius})")));
        }
        let cfg = SystemConfig {
            scenario: Scenario::Circle { cell_radius_m: radius, user_circle_radius_m: v },
            ..base.clone()
        };
        let (sir, systems, sp_count) = rate_systems(&cfg, params, pi)?;
        let refs: Vec<usize> = (0..cfg.k).map(|m| REFERENCE_CELL * cfg.k + m).collect();
        let qam = Qam::new(cfg.qam_order)?;
        let sigma2 = cfg.noise_variance();
        let results = run_trials(params.trials, |t| {
            let key = StreamKey::new(cfg.seed, pi as u64, t as u64);
            let mut out = Vec::with_capacity(systems.len());
            for (si, s) in systems.iter().enumerate() {
                let ch = draw_channels(&s.beta_bar, REFERENCE_CELL, cfg.m, &mut key.stream(Purpose::Channels));
                let frames = assemble_frames(
                    &cfg,
                    &s.book,
                    &s.powers,
                    &s.plan,
                    &DataModel::Gaussian,
                    &mut key.stream(Purpose::Data(si as u32)),
                )?;
                let rx = synthesize_received(&ch, &frames, sigma2, &mut key.stream(Purpose::Noise(si as u32)))?;
                let est = hybrid_estimates(&rx, &s.book, &s.plan, &s.powers, &refs)?;
                let beta0 = s.beta_bar.at_bs(REFERENCE_CELL);
                let mut row = Vec::with_capacity(refs.len());
                for e in &est {
                    let u = e.user;
                    let det = if s.plan.schemes[u] == UserScheme::Tp {
                        mf_detect_tp(rx.tail(s.plan.tau), e.h_hat.view(), beta0[u], 1.0, &qam)
                    } else {
                        let p = s.book.sp_pilot(u)?;
                        let y = rx.tail(cfg.c_u - p.len());
                        mf_detect_sp(y, e.h_hat.view(), s.powers.rho_d[u], s.powers.rho_p[u], beta0[u], p, &qam)
                    };
                    row.push(measure_empirical_sinr(&det.x_tilde, &frames.data[u], ch.h.column(u), beta0[u]));
                }
                out.push(row);
            }
            Ok(out)
        })?;
        let mut total = vec![vec![SinrMeasurement::default(); refs.len()]; systems.len()];
        for t in results {
            for (a, b) in total.iter_mut().zip(t) {
                for (x, y) in a.iter_mut().zip(b) {
                    x.add(y);
                }
            }
        }
        let sir_db = to_db(sir);
        for (s, tot) in systems.iter().zip(&total) {
            let sum: f64 = refs
                .iter()
                .zip(tot)
                .map(|(&u, m)| RateCap::Gaussian.rate(s.plan.data_len(u, cfg.c_u) as f64 / cfg.c as f64, m.sinr()))
                .sum();
            records.push(record(
                kind,
                s.method,
                sir_db,
                UserTag::All,
                Metric::SumRate,
                sum,
                params.trials,
                Some(s.analytic_sum),
            ));
        }
        records.push(record(
            kind,
            Method::Hybrid,
            sir_db,
            UserTag::All,
            Metric::SpUsers,
            sp_count as f64,
            params.trials,
            None,
        ));
    }
    Ok(records)
}

/// Received SIR at the reference cell, the all-TP, all-SP and hybrid
/// systems, and the number of reference-cell SP users in the hybrid one.
fn rate_systems(cfg: &SystemConfig, params: &ExperimentParams, point: usize) -> Result<(f64, Vec<RateSystem>, usize)> {
    let (k, central) = (cfg.k, params.central_cells);
    let n = cfg.n_users();
    let n_central = central * k;
    let layout = place_users(cfg, &mut StreamKey::new(cfg.seed, point as u64, 0).stream(Purpose::Layout))?;
    let beta = path_loss(&layout, cfg.path_loss_exponent)?;
    let inner_cfg = SystemConfig { l: central, ..cfg.clone() };
    let inner = beta.restrict(central);
    let (unit, _) = normalize(&inner, &statistics_aware_power(&inner, 1.0)?);
    let sir = received_sir(&unit, 1.0, REFERENCE_CELL);

    let hybrid_lambda2 = inner_cfg.data_fraction(cfg.c_u - cfg.tau);
    let model = CostModel::from_config(&inner_cfg, 1.0 - hybrid_lambda2);
    let greedy = greedy_partition(&unit, &model, params.strict_greedy);

    let outer: Vec<usize> = (n_central..n).collect();
    let candidates = [
        (Method::TpLs, Partition::all_tp(n_central)),
        (Method::SpNoniter, Partition::all_sp(n_central)),
        (Method::Hybrid, greedy.partition.clone()),
    ];
    let mut systems = Vec::with_capacity(3);
    for (method, partition) in candidates {
        let tp: Vec<usize> = partition.u_tp.iter().copied().collect();
        let plan = match method {
            Method::SpNoniter => FramePlan::all_sp(n),
            _ => FramePlan::hybrid(n, &tp, cfg.tau),
        }
        .with_interferers(outer.iter().copied());
        let slot = plan.sp_length(cfg.c_u);
        let lambda2 = inner_cfg.data_fraction(slot);
        let mut powers = PowerAllocation::uniform(n, params.tp_power);
        for &u in &partition.u_sp {
            let q = params.sp_omega / beta.home(u);
            powers.q[u] = q;
            powers.rho_d[u] = (lambda2 * q).sqrt();
            powers.rho_p[u] = ((1.0 - lambda2) * q).sqrt();
        }
        let book = make_pilot_books(cfg, &plan, SpLayout::Dft)?;
        let (beta_bar, powers) = normalize(&beta, &powers);
        let inner_bar = beta_bar.restrict(central);
        let inner_powers = PowerAllocation {
            q: powers.q[..n_central].to_vec(),
            rho_d: powers.rho_d[..n_central].to_vec(),
            rho_p: powers.rho_p[..n_central].to_vec(),
        };
        let analytic = hybrid_rates(
            &AnalyticInputs::new(&inner_bar, &inner_powers, &inner_cfg),
            &partition,
            REFERENCE_CELL,
            RateCap::Gaussian,
        );
        systems.push(RateSystem { method, plan, book, beta_bar, powers, analytic_sum: analytic.sum() });
    }
    let sp_count = greedy.partition.u_sp.iter().filter(|&&u| u / k == REFERENCE_CELL).count();
    Ok((sir, systems, sp_count))
}
