use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superpilot::analytics::{kappa_symmetric, optimal_rho, q_function, sinr_sp_lower_bound};
use superpilot::hybrid::CostModel;
use superpilot::iterative::alpha_pqam;
use superpilot::simharness::{run_experiment, ExperimentKind};
use superpilot::SystemConfig;
use superpilot_cli::spec::{parse_config, OutputFormat};
use superpilot_cli::{csv_out, partition, plot, CliError};

/// Multi-cell massive MIMO pilot-scheme experiments.
///
/// Every global flag can also be set through a `SUPERPILOT_*` environment
/// variable; command-line values win.
#[derive(Debug, Parser)]
#[command(name = "superpilot", version)]
struct Cli {
    /// Experiment spec (TOML).
    #[arg(long, global = true, env = "SUPERPILOT_SPEC")]
    spec: Option<PathBuf>,
    /// Output CSV; stdout when absent and the spec names none.
    #[arg(long, global = true, env = "SUPERPILOT_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "SUPERPILOT_SEED")]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true, env = "SUPERPILOT_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, env = "SUPERPILOT_TRIALS")]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a spec file.
    Run { spec: Option<PathBuf> },
    /// List experiment names.
    ListExperiments,
    /// Evaluate a closed-form expression, e.g. `analytic optimal-rho m=100 l=7 k=5 c_u=100`.
    Analytic {
        #[arg(value_enum)]
        formula: Formula,
        /// `key=value` arguments.
        params: Vec<String>,
    },
    /// Split users between TP and SP pilots for a path-loss table.
    Partition {
        /// CSV with header `bs_cell,user_cell,user_index,beta`.
        beta_csv: PathBuf,
        /// TP pilot reuse factor.
        #[arg(long, default_value_t = SystemConfig::default().r)]
        reuse: usize,
        #[arg(long = "c-u", default_value_t = SystemConfig::default().c_u)]
        c_u: usize,
        /// TP pilot length; `reuse·K` when absent.
        #[arg(long)]
        tau: Option<usize>,
        /// SP pilot power fraction.
        #[arg(long = "rho-p2", default_value_t = 0.5)]
        rho_p2: f64,
        /// Accept a move only if it strictly lowers the cost.
        #[arg(long)]
        strict: bool,
        /// Exhaustive search (at most 16 users).
        #[arg(long = "brute-force")]
        brute_force: bool,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum Formula {
    OptimalRho,
    KappaSymmetric,
    SinrLowerBound,
    AlphaPqam,
    QFunction,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                eprintln!("error[usage]: invalid arguments");
            }
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { ref spec } => run(spec.clone().or(cli.spec.clone()), &cli),
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{}\t{}", k.name(), k.description());
            }
            Ok(())
        }
        Command::Analytic { formula, ref params } => analytic(formula, params),
        Command::Partition { ref beta_csv, reuse, c_u, tau, rho_p2, strict, brute_force } => {
            let file = std::fs::File::open(beta_csv).map_err(|e| CliError::Io { path: beta_csv.clone(), source: e })?;
            let beta = partition::read_beta_csv(file)?;
            let tau = tau.unwrap_or(reuse * beta.users_per_cell());
            if reuse == 0 || tau > c_u {
                return Err(CliError::Config(format!(
                    "need reuse >= 1 and tau <= c_u, got reuse={reuse} tau={tau} c_u={c_u}"
                )));
            }
            if !(rho_p2 > 0.0 && rho_p2 <= 1.0) {
                return Err(CliError::Config(format!("rho_p2 must lie in (0, 1], got {rho_p2}")));
            }
            let model = CostModel { r: reuse, sp_len: c_u - tau, rho_p2 };
            let report = partition::solve(&beta, &model, strict, brute_force)?;
            let stdout = std::io::stdout();
            partition::write_partition(&report, beta.users_per_cell(), stdout.lock())
                .map_err(|e| CliError::Io { path: "<stdout>".into(), source: std::io::Error::other(e.to_string()) })?;
            eprintln!("cost={} sp_users={}", report.cost, report.partition.u_sp.len());
            Ok(())
        }
    }
}

fn run(spec_path: Option<PathBuf>, cli: &Cli) -> Result<(), CliError> {
    let path = spec_path.ok_or_else(|| CliError::Config("no spec given (positional or --spec)".into()))?;
    let mut spec = parse_config(&path)?;
    if let Some(seed) = cli.seed {
        spec.config.seed = seed;
    }
    if let Some(t) = cli.trials {
        spec.params.trials = t;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let records = run_experiment(&spec.config, spec.kind, &spec.params, cli.threads)?;
    match cli.out.clone().or(spec.output.clone()) {
        Some(out) => {
            csv_out::emit_csv(&records, &out)?;
            if spec.format == OutputFormat::CsvPlotScript {
                plot::emit_script(spec.kind, &out)?;
            }
        }
        None => {
            if spec.format == OutputFormat::CsvPlotScript {
                return Err(CliError::Config("csv+plot-script needs an output path".into()));
            }
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            csv_out::write_csv(&records, &mut lock)
                .map_err(|e| CliError::Io { path: "<stdout>".into(), source: std::io::Error::other(e.to_string()) })?;
            lock.flush().map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?;
        }
    }
    Ok(())
}

fn analytic(formula: Formula, params: &[String]) -> Result<(), CliError> {
    let mut kv = BTreeMap::new();
    for p in params {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got `{p}`")))?;
        let v: f64 = v.parse().map_err(|_| CliError::Config(format!("`{k}` is not a number: `{v}`")))?;
        kv.insert(k.to_ascii_lowercase(), v);
    }
    let mut take = |key: &str| kv.remove(key).ok_or_else(|| CliError::Config(format!("missing parameter `{key}`")));
    let count = |key: &str, v: f64| {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Config(format!("`{key}` must be a non-negative integer, got {v}")))
        }
    };
    let out: Vec<(&str, f64)> = match formula {
        Formula::OptimalRho => {
            let (m, l, k, c_u) = (take("m")?, take("l")?, take("k")?, take("c_u")?);
            let ((l2, m2), (al2, am2)) =
                optimal_rho(count("m", m)?, count("l", l)?, count("k", k)?, count("c_u", c_u)?);
            vec![("lambda2", l2), ("mu2", m2), ("lambda2_approx", al2), ("mu2_approx", am2)]
        }
        Formula::KappaSymmetric => {
            let (k, l, beta) = (take("k")?, take("l")?, take("beta")?);
            vec![("kappa", kappa_symmetric(count("k", k)?, count("l", l)?, beta))]
        }
        Formula::SinrLowerBound => {
            let (l, k, c_u, m, lambda2) = (take("l")?, take("k")?, take("c_u")?, take("m")?, take("lambda2")?);
            let v = sinr_sp_lower_bound(count("l", l)?, count("k", k)?, count("c_u", c_u)?, count("m", m)?, lambda2);
            vec![("sinr", v)]
        }
        Formula::AlphaPqam => {
            let (i, p) = (take("i")?, take("p")?);
            vec![("alpha", alpha_pqam(i, count("p", p)?).map_err(|e| CliError::Config(e.to_string()))?)]
        }
        Formula::QFunction => vec![("q", q_function(take("x")?))],
    };
    if let Some(extra) = kv.keys().next() {
        return Err(CliError::Config(format!("unknown parameter `{extra}`")));
    }
    for (name, v) in out {
        println!("{name}={v}");
    }
    Ok(())
}
