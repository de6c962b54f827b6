//! Path-loss CSV input for the `partition` subcommand.
//!
//! Header `bs_cell,user_cell,user_index,beta`; one row per (BS, user) pair,
//! every pair of an `L`-cell, `K`-users-per-cell system present exactly once.

use std::io::{Read, Write};

use serde::Deserialize;
use superpilot::hybrid::{brute_force_partition, greedy_partition, CostModel, Partition};
use superpilot::sysmodel::PathLossMap;

use crate::CliError;

#[derive(Debug, Deserialize)]
struct Row {
    bs_cell: usize,
    user_cell: usize,
    user_index: usize,
    beta: f64,
}

pub fn read_beta_csv<R: Read>(input: R) -> Result<PathLossMap, CliError> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(|e| CliError::Input(e.to_string()))?;
    if headers.iter().ne(["bs_cell", "user_cell", "user_index", "beta"]) {
        return Err(CliError::Input("expected header bs_cell,user_cell,user_index,beta".into()));
    }
    let rows: Vec<Row> = rd.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Input(e.to_string()))?;
    if rows.is_empty() {
        return Err(CliError::Input("no path-loss rows".into()));
    }
    let l = rows.iter().map(|r| r.bs_cell.max(r.user_cell)).max().unwrap_or(0) + 1;
    let k = rows.iter().map(|r| r.user_index).max().unwrap_or(0) + 1;
    let mut beta = vec![f64::NAN; l * l * k];
    for r in &rows {
        if !(r.beta.is_finite() && r.beta >= 0.0) {
            return Err(CliError::Input(format!("beta must be finite and non-negative, got {}", r.beta)));
        }
        let slot = &mut beta[r.bs_cell * l * k + r.user_cell * k + r.user_index];
        if !slot.is_nan() {
            return Err(CliError::Input(format!(
                "duplicate row bs_cell={} user_cell={} user_index={}",
                r.bs_cell, r.user_cell, r.user_index
            )));
        }
        *slot = r.beta;
    }
    if let Some(i) = beta.iter().position(|b| b.is_nan()) {
        let (bs, u) = (i / (l * k), i % (l * k));
        return Err(CliError::Input(format!("missing row bs_cell={bs} user_cell={} user_index={}", u / k, u % k)));
    }
    PathLossMap::new(l, k, beta).map_err(|e| CliError::Input(e.to_string()))
}

pub struct PartitionReport {
    pub partition: Partition,
    pub cost: f64,
}

pub fn solve(
    beta: &PathLossMap,
    model: &CostModel,
    strict: bool,
    brute_force: bool,
) -> Result<PartitionReport, CliError> {
    if brute_force {
        let (partition, cost) = brute_force_partition(beta, model).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(PartitionReport { partition, cost })
    } else {
        let g = greedy_partition(beta, model, strict);
        Ok(PartitionReport { cost: g.cost(), partition: g.partition })
    }
}

/// `user_cell,user_index,set` rows, users in flattened order.
pub fn write_partition<W: Write>(report: &PartitionReport, k: usize, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["user_cell", "user_index", "set"])?;
    let n = report.partition.u_tp.len() + report.partition.u_sp.len();
    for u in 0..n {
        let set = if report.partition.u_sp.contains(&u) { "SP" } else { "TP" };
        w.write_record([(u / k).to_string(), (u % k).to_string(), set.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
