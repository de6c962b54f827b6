//! Cell geometry, user placement, path loss, power control and channels.

use ndarray::Array2;
use rand::Rng;

use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::complex_normal;
use crate::C64;

pub type Point = [f64; 2];

/// Hexagon centres for `l` cells of circumradius `radius`: the reference
/// cell first, then each tier counter-clockwise from the +x axis.
pub fn hex_centers(l: usize, radius: f64) -> Result<Vec<Point>> {
    let tiers: i64 = match l {
        1 => 0,
        7 => 1,
        19 => 2,
        _ => return Err(Error::UnsupportedLayout(l)),
    };
    let s3 = 3f64.sqrt();
    let mut cells = Vec::new();
    for q in -tiers..=tiers {
        for r in -tiers..=tiers {
            let ring = q.abs().max(r.abs()).max((q + r).abs());
            if ring > tiers {
                continue;
            }
            let x = s3 * radius * (q as f64 + r as f64 / 2.0);
            let y = 1.5 * radius * r as f64;
            let angle = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            cells.push((ring, angle, [x, y]));
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(cells.into_iter().map(|c| c.2).collect())
}

/// Point-in-hexagon test for a pointy-top hexagon centred at the origin.
pub fn inside_hexagon(p: Point, radius: f64) -> bool {
    let apothem = 3f64.sqrt() / 2.0 * radius;
    [0.0f64, 60.0, 120.0].iter().all(|deg| {
        let (s, c) = deg.to_radians().sin_cos();
        (p[0] * c + p[1] * s).abs() <= apothem
    })
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserLayout {
    /// Flattened user positions, index `ℓ·K + k`.
    pub positions: Vec<Point>,
    pub bs_positions: Vec<Point>,
    pub cell_of: Vec<usize>,
    pub users_per_cell: usize,
    pub cell_radius_m: f64,
}

impl UserLayout {
    pub fn n_users(&self) -> usize {
        self.positions.len()
    }

    pub fn n_cells(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn distance(&self, bs: usize, user: usize) -> f64 {
        dist(self.bs_positions[bs], self.positions[user])
    }
}

pub fn place_users<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<UserLayout> {
    let radius = config.scenario.cell_radius_m();
    let bs_positions = hex_centers(config.l, radius)?;
    let k = config.k;
    let mut positions = Vec::with_capacity(config.l * k);
    let mut cell_of = Vec::with_capacity(config.l * k);
    for (cell, c) in bs_positions.iter().enumerate() {
        for idx in 0..k {
            let offset = match config.scenario {
                Scenario::Circle { user_circle_radius_m, .. } => {
                    let (s, co) = (std::f64::consts::TAU * idx as f64 / k as f64).sin_cos();
                    [user_circle_radius_m * co, user_circle_radius_m * s]
                }
                Scenario::Uniform { cell_radius_m, min_dist_m } => {
                    if !(min_dist_m < cell_radius_m) {
                        return Err(Error::InvalidConfig("min_dist_m must be below cell_radius_m".into()));
                    }
                    let half_h = 3f64.sqrt() / 2.0 * cell_radius_m;
                    loop {
                        let p = [rng.random_range(-cell_radius_m..=cell_radius_m), rng.random_range(-half_h..=half_h)];
                        if inside_hexagon(p, cell_radius_m) && p[0].hypot(p[1]) >= min_dist_m {
                            break p;
                        }
                    }
                }
            };
            positions.push([c[0] + offset[0], c[1] + offset[1]]);
            cell_of.push(cell);
        }
    }
    Ok(UserLayout { positions, bs_positions, cell_of, users_per_cell: k, cell_radius_m: radius })
}

/// Large-scale coefficients `β[j][ℓ][k]`, stored BS-major so that
/// `at_bs(j)` is a slice over flattened users.
#[derive(Clone, Debug, PartialEq)]
pub struct PathLossMap {
    l: usize,
    k: usize,
    beta: Vec<f64>,
}

impl PathLossMap {
    /// Builds a map from a flat `L·(L·K)` vector in `[j][ℓ·K + k]` order.
    pub fn new(l: usize, k: usize, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != l * l * k {
            return Err(Error::Dimension(format!("expected {} gains, got {}", l * l * k, beta.len())));
        }
        if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::InvalidConfig(format!("path-loss gain {b} is not a finite non-negative value")));
        }
        Ok(PathLossMap { l, k, beta })
    }

    pub fn from_fn(l: usize, k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = l * k;
        let beta = (0..l * n).map(|i| f(i / n, i % n)).collect();
        Self::new(l, k, beta)
    }

    pub fn n_cells(&self) -> usize {
        self.l
    }

    pub fn users_per_cell(&self) -> usize {
        self.k
    }

    pub fn n_users(&self) -> usize {
        self.l * self.k
    }

    pub fn cell_of(&self, user: usize) -> usize {
        user / self.k
    }

    /// β between BS `bs` and flattened user `user`.
    pub fn get(&self, bs: usize, user: usize) -> f64 {
        self.beta[bs * self.n_users() + user]
    }

    pub fn at_bs(&self, bs: usize) -> &[f64] {
        let n = self.n_users();
        &self.beta[bs * n..(bs + 1) * n]
    }

    pub fn home(&self, user: usize) -> f64 {
        self.get(self.cell_of(user), user)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }

    /// Restriction to the first `l` cells (BSs and their users).
    pub fn restrict(&self, l: usize) -> Self {
        let k = self.k;
        Self::from_fn(l, k, |j, n| self.get(j, n)).expect("restriction of a valid map")
    }
}

/// `β = (d / R)^(−exponent)`, so a cell-edge user has β = 1.
pub fn path_loss(layout: &UserLayout, exponent: f64) -> Result<PathLossMap> {
    let l = layout.n_cells();
    let n = layout.n_users();
    let mut beta = Vec::with_capacity(l * n);
    for j in 0..l {
        for u in 0..n {
            let d = layout.distance(j, u);
            if d <= 0.0 {
                return Err(Error::ZeroDistance { bs: j, user: u });
            }
            beta.push((d / layout.cell_radius_m).powf(-exponent));
        }
    }
    PathLossMap::new(l, layout.users_per_cell, beta)
}

/// Per-user transmit power and its data/pilot amplitude split.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation {
    pub q: Vec<f64>,
    pub rho_d: Vec<f64>,
    pub rho_p: Vec<f64>,
}

impl PowerAllocation {
    /// Power `q` for everyone, all of it on data.
    pub fn uniform(n: usize, q: f64) -> Self {
        PowerAllocation { q: vec![q; n], rho_d: vec![q.sqrt(); n], rho_p: vec![0.0; n] }
    }

    /// Splits each user's power into `ρ_d² = λ²q` and `ρ_p² = (1−λ²)q`.
    pub fn with_split(mut self, lambda2: f64) -> Self {
        for i in 0..self.q.len() {
            self.rho_d[i] = (lambda2 * self.q[i]).sqrt();
            self.rho_p[i] = ((1.0 - lambda2) * self.q[i]).sqrt();
        }
        self
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// `q = ω / β_home`, so every user arrives at its own BS with power ω.
/// The returned allocation puts all power on data; see [`PowerAllocation::with_split`].
pub fn statistics_aware_power(beta: &PathLossMap, omega: f64) -> Result<PowerAllocation> {
    let q = (0..beta.n_users())
        .map(|u| {
            let h = beta.home(u);
            if h > 0.0 {
                Ok(omega / h)
            } else {
                Err(Error::InvalidConfig(format!("user {u} has zero home gain")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rho_d = q.iter().map(|v| v.sqrt()).collect();
    Ok(PowerAllocation { rho_p: vec![0.0; q.len()], q, rho_d })
}

/// Equivalent system: gains absorb the transmit power (`β̄ = βq`) and the
/// amplitudes are rescaled so that `ρ̄_d² + ρ̄_p² = 1`.
pub fn normalize(beta: &PathLossMap, powers: &PowerAllocation) -> (PathLossMap, PowerAllocation) {
    let n = beta.n_users();
    let bar = PathLossMap::from_fn(beta.n_cells(), beta.users_per_cell(), |j, u| beta.get(j, u) * powers.q[u])
        .expect("scaled map stays valid");
    let mut p = PowerAllocation { q: vec![1.0; n], rho_d: vec![0.0; n], rho_p: vec![0.0; n] };
    for u in 0..n {
        let s = powers.q[u].sqrt();
        p.rho_d[u] = powers.rho_d[u] / s;
        p.rho_p[u] = powers.rho_p[u] / s;
    }
    (bar, p)
}

/// Channel matrix at one BS; column `n` is the channel of flattened user `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: Array2<C64>,
}

pub fn draw_channels<R: Rng + ?Sized>(beta: &PathLossMap, bs: usize, m: usize, rng: &mut R) -> ChannelRealization {
    let gains = beta.at_bs(bs);
    let mut h = Array2::zeros((m, gains.len()));
    for mut row in h.rows_mut() {
        for (v, b) in row.iter_mut().zip(gains) {
            *v = complex_normal(rng, 1.0) * b.sqrt();
        }
    }
    ChannelRealization { h }
}

/// Received SIR of a user in cell `j` on normalized gains; `+∞` with no interferers.
pub fn received_sir(beta_bar: &PathLossMap, omega: f64, j: usize) -> f64 {
    let interference: f64 =
        (0..beta_bar.n_users()).filter(|&u| beta_bar.cell_of(u) != j).map(|u| beta_bar.get(j, u).powi(2)).sum();
    if interference > 0.0 {
        omega / interference
    } else {
        f64::INFINITY
    }
}
