use ndarray::{s, Array2, ArrayView1};

use super::frames::{FramePlan, UserScheme};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::C64;

/// `n×n` DFT matrix with unit-modulus entries; columns are orthogonal with
/// squared norm `n`.
pub fn dft_matrix(n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |(t, c)| {
        let phase = -std::f64::consts::TAU * ((t * c) % n.max(1)) as f64 / n as f64;
        C64::from_polar(1.0, phase)
    })
}

/// Arrangement of the SP pilot matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpLayout {
    /// One DFT matrix, SP users on consecutive columns.
    #[default]
    Dft,
    /// One scaled DFT block per cell, each cell's users inside its block.
    BlockDiagonal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PilotBook {
    /// `τ×τ`, columns φ.
    pub tp_matrix: Array2<C64>,
    pub tp_assignment: Vec<Option<usize>>,
    /// `len×len`, columns p; `len` is C_u, or C_u − τ in a hybrid frame.
    pub sp_matrix: Array2<C64>,
    pub sp_assignment: Vec<Option<usize>>,
}

impl PilotBook {
    pub fn tau(&self) -> usize {
        self.tp_matrix.nrows()
    }

    pub fn sp_len(&self) -> usize {
        self.sp_matrix.nrows()
    }

    pub fn tp_pilot(&self, user: usize) -> Result<ArrayView1<'_, C64>> {
        match self.tp_assignment.get(user).copied().flatten() {
            Some(b) if b < self.tau() => Ok(self.tp_matrix.column(b)),
            _ => Err(Error::UnknownPilot(user)),
        }
    }

    pub fn sp_pilot(&self, user: usize) -> Result<ArrayView1<'_, C64>> {
        match self.sp_assignment.get(user).copied().flatten() {
            Some(c) => Ok(self.sp_matrix.column(c)),
            None => Err(Error::UnknownPilot(user)),
        }
    }
}

/// Builds the books for a frame plan.
///
/// TP user `(ℓ, k)` gets pilot `(ℓ mod r)·K + k`, so cells congruent modulo
/// `r` share pilots. SP users take consecutive columns in user order.
pub fn make_pilot_books(config: &SystemConfig, plan: &FramePlan, layout: SpLayout) -> Result<PilotBook> {
    let n = plan.schemes.len();
    if n != config.n_users() {
        return Err(Error::Dimension(format!("plan covers {n} users, config has {}", config.n_users())));
    }
    let k = config.k;
    let has_tp = plan.schemes.contains(&UserScheme::Tp);
    let tau = plan.tau;
    if has_tp && tau != config.r * k {
        return Err(Error::InvalidConfig(format!("tau = {tau} must equal r*K = {}", config.r * k)));
    }
    let tp_assignment = plan
        .schemes
        .iter()
        .enumerate()
        .map(|(u, s)| (*s == UserScheme::Tp).then(|| ((u / k) % config.r) * k + u % k))
        .collect();

    let sp_len = plan.sp_length(config.c_u);
    let sp_users: Vec<usize> = plan.sp_users();
    if sp_users.len() > sp_len {
        return Err(Error::PilotCapacity { users: sp_users.len(), length: sp_len });
    }
    let mut sp_assignment = vec![None; n];
    let sp_matrix = match layout {
        SpLayout::Dft => {
            for (col, u) in sp_users.iter().enumerate() {
                sp_assignment[*u] = Some(col);
            }
            dft_matrix(sp_len)
        }
        SpLayout::BlockDiagonal => {
            let l = config.l;
            if sp_len % l != 0 || k > sp_len / l {
                return Err(Error::PilotCapacity { users: k, length: sp_len / l });
            }
            let seg = sp_len / l;
            let mut p = Array2::zeros((sp_len, sp_len));
            let block = dft_matrix(seg).mapv(|z| z * (l as f64).sqrt());
            for c in 0..l {
                p.slice_mut(s![c * seg..(c + 1) * seg, c * seg..(c + 1) * seg]).assign(&block);
            }
            for u in sp_users {
                sp_assignment[u] = Some((u / k) * seg + u % k);
            }
            p
        }
    };
    Ok(PilotBook { tp_matrix: dft_matrix(if has_tp { tau } else { 0 }), tp_assignment, sp_matrix, sp_assignment })
}
