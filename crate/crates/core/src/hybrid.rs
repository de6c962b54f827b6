//! Interference cost of a TP/SP user partition and the greedy partitioner.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::analytics::co_pilot_cells;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::sysmodel::PathLossMap;

/// Disjoint TP and SP user sets, by flattened user index.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Partition {
    pub u_tp: BTreeSet<usize>,
    pub u_sp: BTreeSet<usize>,
}

impl Partition {
    pub fn new(u_tp: BTreeSet<usize>, u_sp: BTreeSet<usize>, n_users: usize) -> Result<Self> {
        if let Some(u) = u_tp.intersection(&u_sp).next() {
            return Err(Error::InvalidConfig(format!("user {u} is in both sets")));
        }
        if let Some(u) = u_tp.iter().chain(&u_sp).find(|&&u| u >= n_users) {
            return Err(Error::UserNotPartitioned(*u));
        }
        Ok(Partition { u_tp, u_sp })
    }

    pub fn all_tp(n: usize) -> Self {
        Partition { u_tp: (0..n).collect(), u_sp: BTreeSet::new() }
    }

    pub fn all_sp(n: usize) -> Self {
        Partition { u_tp: BTreeSet::new(), u_sp: (0..n).collect() }
    }

    /// Partition from a bit mask; bit `u` set means SP.
    pub fn from_mask(mask: u32, n: usize) -> Self {
        let (sp, tp): (Vec<usize>, Vec<usize>) = (0..n).partition(|u| mask >> u & 1 == 1);
        Partition { u_tp: tp.into_iter().collect(), u_sp: sp.into_iter().collect() }
    }

    pub fn covers(&self, n: usize) -> bool {
        self.u_tp.len() + self.u_sp.len() == n && (0..n).all(|u| self.u_tp.contains(&u) || self.u_sp.contains(&u))
    }

    fn move_to_sp(&self, u: usize) -> Self {
        let mut next = self.clone();
        next.u_tp.remove(&u);
        next.u_sp.insert(u);
        next
    }
}

/// Parameters of the interference cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    /// TP pilot reuse factor.
    pub r: usize,
    /// SP pilot length `C_u − τ`; also the SP capacity.
    pub sp_len: usize,
    /// Pilot power fraction of SP users.
    pub rho_p2: f64,
}

impl CostModel {
    pub fn from_config(config: &SystemConfig, rho_p2: f64) -> Self {
        CostModel { r: config.r, sp_len: config.c_u - config.tau, rho_p2 }
    }
}

/// Pilot contamination that TP user `user` causes at the other BSs reusing
/// its pilot: `Σ β²[ℓ][user]` over co-pilot cells `ℓ` whose same-index user
/// is also TP.
pub fn interference_tp(user: usize, partition: &Partition, beta: &PathLossMap, r: usize) -> f64 {
    let k = beta.users_per_cell();
    let (j, m) = (user / k, user % k);
    co_pilot_cells(beta.n_cells(), r, j)
        .into_iter()
        .filter(|&l| l != j && partition.u_tp.contains(&(l * k + m)))
        .map(|l| beta.get(l, user).powi(2))
        .sum()
}

/// Data interference that SP user `user` causes to the SP estimates: for
/// every SP user, add `β²` of `user` at that user's home BS, scaled by
/// `1/((C_u − τ)ρ_p²)`.
pub fn interference_sp(user: usize, partition: &Partition, beta: &PathLossMap, sp_len: usize, rho_p2: f64) -> f64 {
    let s: f64 = partition.u_sp.iter().map(|&n| beta.get(beta.cell_of(n), user).powi(2)).sum();
    s / (sp_len as f64 * rho_p2)
}

/// Sum over users of the branch cost matching their set.
pub fn total_cost(partition: &Partition, beta: &PathLossMap, model: &CostModel) -> f64 {
    let tp: f64 = partition.u_tp.iter().map(|&u| interference_tp(u, partition, beta, model.r)).sum();
    let sp: f64 = partition.u_sp.iter().map(|&u| interference_sp(u, partition, beta, model.sp_len, model.rho_p2)).sum();
    tp + sp
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOutcome {
    pub partition: Partition,
    /// Cost before any move, then after each accepted move.
    pub costs: Vec<f64>,
    /// Users moved to SP, in order.
    pub moves: Vec<usize>,
}

impl GreedyOutcome {
    pub fn cost(&self) -> f64 {
        *self.costs.last().expect("initial cost is always recorded")
    }
}

/// Starts from all-TP and repeatedly moves the TP user causing the most
/// contamination to SP while the total cost does not increase (strictly
/// decreases in `strict` mode) and SP capacity remains. Ties go to the
/// lowest user index.
pub fn greedy_partition(beta: &PathLossMap, model: &CostModel, strict: bool) -> GreedyOutcome {
    let mut partition = Partition::all_tp(beta.n_users());
    let mut cost = total_cost(&partition, beta, model);
    let mut out = GreedyOutcome { partition: partition.clone(), costs: vec![cost], moves: Vec::new() };
    while !partition.u_tp.is_empty() && partition.u_sp.len() < model.sp_len {
        let mut pick = None;
        let mut worst = f64::NEG_INFINITY;
        for &u in &partition.u_tp {
            let i = interference_tp(u, &partition, beta, model.r);
            if i > worst {
                worst = i;
                pick = Some(u);
            }
        }
        let Some(u) = pick else { break };
        let next = partition.move_to_sp(u);
        let next_cost = total_cost(&next, beta, model);
        let accept = if strict { next_cost < cost } else { next_cost <= cost };
        if !accept {
            break;
        }
        partition = next;
        cost = next_cost;
        out.costs.push(cost);
        out.moves.push(u);
    }
    out.partition = partition;
    out
}

/// Exhaustive minimum-cost partition subject to the SP capacity. Ties go
/// to the partition with the smallest SP bit mask.
pub fn brute_force_partition(beta: &PathLossMap, model: &CostModel) -> Result<(Partition, f64)> {
    let n = beta.n_users();
    if n > 16 {
        return Err(Error::TooManyUsers(n));
    }
    let best = (0u32..1 << n)
        .into_par_iter()
        .filter(|mask| mask.count_ones() as usize <= model.sp_len)
        .map(|mask| (total_cost(&Partition::from_mask(mask, n), beta, model), mask))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("the all-TP partition is always feasible");
    Ok((Partition::from_mask(best.1, n), best.0))
}
