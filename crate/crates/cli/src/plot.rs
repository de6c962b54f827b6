//! Static plotting script emitted next to a CSV for `format = "csv+plot-script"`.

use std::path::{Path, PathBuf};

use superpilot::simharness::ExperimentKind;

use crate::CliError;

/// `<csv>.plot.py`
pub fn script_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".plot.py");
    csv.with_file_name(name)
}

pub fn script(kind: ExperimentKind, csv: &Path) -> String {
    let (metric, xlabel, ylabel, logy) = match kind {
        ExperimentKind::SinrVsM => ("sinr", "M", "SINR [dB]", false),
        ExperimentKind::RateVsM => ("rate", "M", "rate [bps/Hz]", false),
        ExperimentKind::SinrCdf => ("cdf", "SINR [dB]", "CDF", false),
        ExperimentKind::BerVsK => ("ber", "K", "BER", true),
        ExperimentKind::SumRateVsSir => ("sum_rate", "SIR [dB]", "sum rate [bps/Hz]", false),
    };
    let db = kind == ExperimentKind::SinrVsM;
    format!(
        r#"import csv, math, sys
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv:?}
series = {{}}
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        if row["metric"] != "{metric}" or row["user"] != "all":
            continue
        v = float(row["value"])
        if {db} and v > 0:
            v = 10 * math.log10(v)
        series.setdefault(row["method"], []).append((float(row["sweep_value"]), v))
for method, pts in sorted(series.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
plt.xlabel("{xlabel}")
plt.ylabel("{ylabel}")
if {logy}:
    plt.yscale("log")
plt.grid(True)
plt.legend()
plt.savefig(path + ".png", dpi=150)
"#,
        csv = csv.display().to_string(),
        db = if db { "True" } else { "False" },
        logy = if logy { "True" } else { "False" },
    )
}

pub fn emit_script(kind: ExperimentKind, csv: &Path) -> Result<PathBuf, CliError> {
    let path = script_path(csv);
    std::fs::write(&path, script(kind, csv)).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    Ok(path)
}
