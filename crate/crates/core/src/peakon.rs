//! Singular solutions: weighted point momenta on `M` evolving under the
//! collective Hamiltonian `H = h o J_L`, plus the grid right-hand side of the
//! EPAut equations in one dimension.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3xX};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{AmbientManifold, LeftField, TestField};
use crate::error::{Error, Result};
use crate::grid::SourceManifold;
use crate::lie::{wrap_angle, AlgebraElement, CoalgebraElement, StructureGroup};
use crate::momentum::{jl, jl_eval, jr};
use crate::phase::CotangentState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GreensKernel {
    /// `exp(-|x|/alpha) / (2 alpha)` on the line.
    Peakon { alpha: f64 },
    /// Periodic Green's function of `1 - alpha^2 d^2/dx^2` on a circle of circumference `2 pi`.
    PeriodicPeakon { alpha: f64 },
    /// `exp(-|x|^2 / (2 alpha^2))` in any dimension.
    Gaussian { alpha: f64 },
}

impl GreensKernel {
    pub fn alpha(&self) -> f64 {
        match *self {
            GreensKernel::Peakon { alpha } | GreensKernel::PeriodicPeakon { alpha } | GreensKernel::Gaussian { alpha } => alpha,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let a = self.alpha();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("kernel length scale must be positive, got {a}")));
        }
        if dim != 1 && !matches!(self, GreensKernel::Gaussian { .. }) {
            return Err(Error::InvalidInput("peaked kernels are one-dimensional".into()));
        }
        Ok(())
    }

    pub fn value(&self, dx: &[f64]) -> f64 {
        match *self {
            GreensKernel::Peakon { alpha } => (-dx[0].abs() / alpha).exp() / (2.0 * alpha),
            GreensKernel::PeriodicPeakon { alpha } => {
                let x = wrap_angle(dx[0]).abs();
                ((x - PI) / alpha).cosh() / (2.0 * alpha * (PI / alpha).sinh())
            }
            GreensKernel::Gaussian { alpha } => {
                let r2: f64 = dx.iter().map(|x| x * x).sum();
                (-r2 / (2.0 * alpha * alpha)).exp()
            }
        }
    }

    /// Gradient; the peaked kernels take `G'(0) = 0`.
    pub fn gradient(&self, dx: &[f64]) -> DVector<f64> {
        match *self {
            GreensKernel::Peakon { alpha } => {
                let x = dx[0];
                let s = if x == 0.0 { 0.0 } else { x.signum() };
                DVector::from_element(1, -s * self.value(dx) / alpha)
            }
            GreensKernel::PeriodicPeakon { alpha } => {
                let x = wrap_angle(dx[0]);
                let s = if x == 0.0 { 0.0 } else { x.signum() };
                let g = ((x.abs() - PI) / alpha).sinh() / (2.0 * alpha * alpha * (PI / alpha).sinh());
                DVector::from_element(1, s * g)
            }
            GreensKernel::Gaussian { alpha } => {
                let v = self.value(dx);
                DVector::from_iterator(dx.len(), dx.iter().map(|x| -x * v / (alpha * alpha)))
            }
        }
    }
}

/// Kernels for the velocity (`g1`) and gauge (`g2`) sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernels {
    pub g1: GreensKernel,
    pub g2: GreensKernel,
}

impl Kernels {
    pub fn peakon(alpha1: f64, alpha2: f64) -> Self {
        Self { g1: GreensKernel::Peakon { alpha: alpha1 }, g2: GreensKernel::Peakon { alpha: alpha2 } }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.g1.validate(dim)?;
        self.g2.validate(dim)
    }
}

fn delta(z: &CotangentState, i: usize, j: usize) -> Vec<f64> {
    (0..z.d()).map(|k| z.q[(i, k)] - z.q[(j, k)]).collect()
}

/// `1/2 sum_ij w_i w_j [P_i . P_j G1(Q_i - Q_j) + tau*(sigma_i, sigma_j) G2(Q_i - Q_j)]`.
pub fn collective_hamiltonian(z: &CotangentState, k: &Kernels) -> f64 {
    let w = z.source.weights();
    let n = z.n();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                let dx = delta(z, i, j);
                s += w[i] * w[j] * (z.p.row(i).dot(&z.p.row(j)) * k.g1.value(&dx) + z.group.cotau_pair(&z.sigma[i], &z.sigma[j]) * k.g2.value(&dx));
            }
            0.5 * s
        })
        .sum()
}

/// Gauge velocities `xi_i = sum_j w_j G2(Q_i - Q_j) sigma_j^sharp`.
pub fn gauge_velocities(z: &CotangentState, k: &Kernels) -> Vec<AlgebraElement> {
    let w = z.source.weights();
    (0..z.n())
        .map(|i| {
            let mut xi = AlgebraElement::zero();
            for j in 0..z.n() {
                xi += z.group.sharp(&z.sigma[j]) * (w[j] * k.g2.value(&delta(z, i, j)));
            }
            xi
        })
        .collect()
}

/// Hamiltonian vector field in chart coordinates `(Qdot, Pdot, xi, sigmadot)`,
/// with `xi = gamma_dot gamma^{-1}`.
pub fn eom_rhs(z: &CotangentState, k: &Kernels) -> DVector<f64> {
    let l = z.layout();
    let w = z.source.weights();
    let n = z.n();
    let xi = gauge_velocities(z, k);
    let rows: Vec<(DVector<f64>, DVector<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut qd = DVector::zeros(l.d);
            let mut pd = DVector::zeros(l.d);
            for j in 0..n {
                let dx = delta(z, i, j);
                let pj = z.momentum(j);
                qd += &pj * (w[j] * k.g1.value(&dx));
                let c = z.p.row(i).dot(&z.p.row(j)) * k.g1.gradient(&dx) + k.g2.gradient(&dx) * z.group.cotau_pair(&z.sigma[i], &z.sigma[j]);
                pd -= c * w[j];
            }
            (qd, pd)
        })
        .collect();
    let mut t = DVector::zeros(l.dim());
    for i in 0..n {
        for j in 0..l.d {
            t[l.q(i, j)] = rows[i].0[j];
            t[l.p(i, j)] = rows[i].1[j];
        }
        l.set_eta(&mut t, i, &xi[i]);
        l.set_s(&mut t, i, &-z.group.coad(&xi[i], &z.sigma[i]));
    }
    t
}

/// Chart gradient of `H` (the `eta` block vanishes).
pub fn hamiltonian_gradient(z: &CotangentState, k: &Kernels) -> DVector<f64> {
    let l = z.layout();
    let w = z.source.weights();
    let rhs = eom_rhs(z, k);
    let mut g = DVector::zeros(l.dim());
    for i in 0..z.n() {
        for j in 0..l.d {
            g[l.q(i, j)] = -w[i] * rhs[l.p(i, j)];
            g[l.p(i, j)] = w[i] * rhs[l.q(i, j)];
        }
        let xi = l.get_eta(&rhs, i);
        for a in 0..l.m {
            g[l.s(i, a)] = w[i] * xi.0[a];
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit midpoint in `(Q, P, sigma)` with exponential gauge update.
    #[default]
    Midpoint,
    /// Fourth-order symmetric triple-jump composition of the midpoint step.
    Composition4,
}

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITERS: usize = 50;

/// One implicit-midpoint step. `sigma` and `gamma` are moved by the same
/// rotation `exp(dt xi_mid)`, which is the midpoint rule for the frozen
/// linear field and keeps `|sigma|` and `Ad*_gamma sigma` exact.
pub fn midpoint_step(z: &CotangentState, dt: f64, k: &Kernels) -> Result<CotangentState> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(Error::InvalidInput(format!("time step must be finite and nonzero, got {dt}")));
    }
    let l = z.layout();
    let group = z.group;
    let mut next = z.clone();
    let mut mid = z.clone();
    let mut update = f64::INFINITY;
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let f = eom_rhs(&mid, k);
        let mut cand = z.clone();
        for i in 0..l.n {
            for j in 0..l.d {
                cand.q[(i, j)] = z.q[(i, j)] + dt * f[l.q(i, j)];
                cand.p[(i, j)] = z.p[(i, j)] + dt * f[l.p(i, j)];
            }
            let rot = group.exp(&(l.get_eta(&f, i) * dt));
            cand.sigma[i] = group.co_adjoint(&rot.inverse(), &z.sigma[i]);
            cand.gamma[i] = rot * z.gamma[i];
        }
        update = (&cand.q - &next.q).amax().max((&cand.p - &next.p).amax());
        for i in 0..l.n {
            update = update.max((cand.sigma[i] - next.sigma[i]).0.amax());
        }
        next = cand;
        for i in 0..l.n {
            for j in 0..l.d {
                mid.q[(i, j)] = 0.5 * (z.q[(i, j)] + next.q[(i, j)]);
                mid.p[(i, j)] = 0.5 * (z.p[(i, j)] + next.p[(i, j)]);
            }
            mid.sigma[i] = (z.sigma[i] + next.sigma[i]) * 0.5;
        }
        if update <= FIXED_POINT_TOL {
            return Ok(next);
        }
    }
    Err(Error::NoConvergence { iterations: FIXED_POINT_MAX_ITERS, update })
}

/// Advance by `dt` with the chosen scheme.
pub fn step(z: &CotangentState, dt: f64, k: &Kernels, scheme: Scheme) -> Result<CotangentState> {
    match scheme {
        Scheme::Midpoint => midpoint_step(z, dt, k),
        Scheme::Composition4 => {
            let c = 2f64.powf(1.0 / 3.0);
            let w1 = 1.0 / (2.0 - c);
            let w0 = -c / (2.0 - c);
            let a = midpoint_step(z, w1 * dt, k)?;
            let b = midpoint_step(&a, w0 * dt, k)?;
            midpoint_step(&b, w1 * dt, k)
        }
    }
}

/// Velocity and gauge fields `u(x) = sum w_i P_i G1(x - Q_i)`,
/// `nu(x) = sum w_i sigma_i^sharp G2(x - Q_i)` carried by the singular solution.
#[derive(Debug, Clone)]
pub struct SingularFields {
    pub kernels: Kernels,
    pub points: Vec<Vec<f64>>,
    pub momenta: Vec<DVector<f64>>,
    pub charges: Vec<AlgebraElement>,
    pub dim: usize,
}

impl SingularFields {
    pub fn new(z: &CotangentState, k: &Kernels) -> Self {
        let w = z.source.weights();
        Self {
            kernels: *k,
            points: (0..z.n()).map(|i| z.point(i)).collect(),
            momenta: (0..z.n()).map(|i| z.momentum(i) * w[i]).collect(),
            charges: (0..z.n()).map(|i| z.group.sharp(&z.sigma[i]) * w[i]).collect(),
            dim: z.d(),
        }
    }

    fn dx(&self, x: &[f64], i: usize) -> Vec<f64> {
        x.iter().zip(&self.points[i]).map(|(a, b)| a - b).collect()
    }
}

impl TestField for SingularFields {
    fn velocity(&self, x: &[f64]) -> DVector<f64> {
        let mut u = DVector::zeros(self.dim);
        for i in 0..self.points.len() {
            u += &self.momenta[i] * self.kernels.g1.value(&self.dx(x, i));
        }
        u
    }

    fn gauge(&self, x: &[f64]) -> AlgebraElement {
        let mut nu = AlgebraElement::zero();
        for i in 0..self.points.len() {
            nu += self.charges[i] * self.kernels.g2.value(&self.dx(x, i));
        }
        nu
    }
}

impl LeftField for SingularFields {
    fn velocity_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut du = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.points.len() {
            du += &self.momenta[i] * self.kernels.g1.gradient(&self.dx(x, i)).transpose();
        }
        du
    }

    fn gauge_jacobian(&self, x: &[f64]) -> Matrix3xX<f64> {
        let mut dn = Matrix3xX::zeros(self.dim);
        for i in 0..self.points.len() {
            let g = self.kernels.g2.gradient(&self.dx(x, i));
            for c in 0..self.dim {
                for a in 0..3 {
                    dn[(a, c)] += self.charges[i].0[a] * g[c];
                }
            }
        }
        dn
    }
}

/// Sample the carried fields at points `xs` (rows).
pub fn reconstruct_fields(z: &CotangentState, k: &Kernels, xs: &[Vec<f64>]) -> (Vec<DVector<f64>>, Vec<AlgebraElement>) {
    let f = SingularFields::new(z, k);
    xs.par_iter().map(|x| (f.velocity(x), f.gauge(x))).unzip()
}

/// Right-hand side of the EPAut equations on a periodic grid in one dimension:
/// `m_t = -(u m)_x - m u_x - n . nu_x`, `n_t = -(u n)_x - ad*_nu n`.
pub fn epaut_rhs(
    grid: &SourceManifold,
    group: StructureGroup,
    m: &[f64],
    n: &[CoalgebraElement],
    u: &[f64],
    nu: &[AlgebraElement],
) -> Result<(Vec<f64>, Vec<CoalgebraElement>)> {
    let len = grid.len();
    if [m.len(), n.len(), u.len(), nu.len()].iter().any(|&l| l != len) {
        return Err(Error::ShapeMismatch("fields must be sampled on the grid".into()));
    }
    let um: Vec<f64> = u.iter().zip(m).map(|(a, b)| a * b).collect();
    let d_um = grid.derivative(&um)?;
    let du = grid.derivative(u)?;
    let dnu = grid.derivative_algebra(nu)?;
    let mut un = vec![AlgebraElement::zero(); len];
    for i in 0..len {
        un[i] = AlgebraElement(n[i].0 * u[i]);
    }
    let d_un = grid.derivative_algebra(&un)?;
    let mdot = (0..len).map(|i| -(d_um[i] + m[i] * du[i]) - n[i].pair(&dnu[i])).collect();
    let ndot = (0..len).map(|i| -CoalgebraElement(d_un[i].0) - group.coad(&nu[i], &n[i])).collect();
    Ok((mdot, ndot))
}

/// Weak form of the EPAut equations tested against `f`:
/// `d/dt <J_L, f> = -<J_L, [X, f]>` with `X` the carried fields.
pub fn weak_form(z: &CotangentState, k: &Kernels, f: &dyn LeftField) -> f64 {
    let x = SingularFields::new(z, k);
    let w = z.source.weights();
    let group = z.group;
    (0..z.n())
        .map(|i| {
            let q = z.point(i);
            let (u, u2) = (x.velocity(&q), f.velocity(&q));
            let (nu, nu2) = (x.gauge(&q), f.gauge(&q));
            let p = z.momentum(i);
            let s = &z.sigma[i];
            let vel = f.velocity_jacobian(&q) * &u - x.velocity_jacobian(&q) * &u2;
            let gauge = AlgebraElement(f.gauge_jacobian(&q) * &u - x.gauge_jacobian(&q) * &u2) - group.ad(&nu, &nu2);
            w[i] * (p.dot(&vel) + s.pair(&gauge))
        })
        .sum()
}

/// Snapshot diagnostics along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    /// `max_i |Ad*_{gamma_i} sigma_i - (same at t = 0)|`.
    pub charge_drift: f64,
    /// `max_i | |sigma_i| - |sigma_i(0)| |`.
    pub casimir_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<CotangentState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.diagnostics[0].energy;
        self.diagnostics.iter().map(|d| (d.energy - h0).abs() / h0.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
    }

    pub fn max_charge_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.charge_drift).fold(0.0, f64::max)
    }

    pub fn max_casimir_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.casimir_drift).fold(0.0, f64::max)
    }
}

/// Integrate `steps` steps, storing every `stride`-th snapshot (and the last).
pub fn integrate(z0: &CotangentState, k: &Kernels, dt: f64, steps: usize, stride: usize, scheme: Scheme) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    k.validate(z0.d())?;
    let stride = stride.max(1);
    let charges0 = jr(z0)?.nu;
    let norms0: Vec<f64> = z0.sigma.iter().map(|s| s.norm()).collect();
    let diag = |z: &CotangentState, t: f64| -> Result<Diagnostics> {
        let c = jr(z)?.nu;
        Ok(Diagnostics {
            t,
            energy: collective_hamiltonian(z, k),
            charge_drift: c.iter().zip(&charges0).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max),
            casimir_drift: z.sigma.iter().zip(&norms0).map(|(s, n)| (s.norm() - n).abs()).fold(0.0, f64::max),
        })
    };
    let mut states = vec![z0.clone()];
    let mut diagnostics = vec![diag(z0, 0.0)?];
    let mut z = z0.clone();
    for s in 1..=steps {
        z = step(&z, dt, k, scheme)?;
        if s % stride == 0 || s == steps {
            diagnostics.push(diag(&z, s as f64 * dt)?);
            states.push(z.clone());
        }
    }
    Ok(Trajectory { dt: dt * stride as f64, states, diagnostics })
}

/// Largest mismatch between the central time difference of `<J_L, f>` along
/// stored snapshots and the weak form, over interior snapshots and test fields.
pub fn weak_consistency<F: LeftField + Sync>(traj: &Trajectory, k: &Kernels, tests: &[F]) -> f64 {
    let s = &traj.states;
    if s.len() < 3 {
        return 0.0;
    }
    let times = traj.times();
    (1..s.len() - 1)
        .into_par_iter()
        .map(|i| {
            let (mp, mm) = (jl(&s[i + 1]), jl(&s[i - 1]));
            let h = times[i + 1] - times[i - 1];
            tests
                .iter()
                .map(|f| ((jl_eval(&mp, f) - jl_eval(&mm, f)) / h - weak_form(&s[i], k, f)).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Sorted, separated peakons on the line with positive momenta increasing
/// towards the front, so no pair approaches.
pub fn peakon_ensemble<R: Rng + ?Sized>(rng: &mut R, n: usize, group: StructureGroup, sigma_scale: f64) -> CotangentState {
    let source = SourceManifold::point_cloud(vec![1.0; n]).expect("unit weights");
    let q = DMatrix::from_fn(n, 1, |i, _| -(n as f64) + 2.0 * i as f64 + rng.random_range(-0.3..0.3));
    let p = DMatrix::from_fn(n, 1, |i, _| 0.5 + 0.2 * i as f64 + rng.random_range(0.0..0.1));
    let gamma = (0..n).map(|_| group.random_element(rng)).collect();
    let sigma = (0..n).map(|_| group.random_coalgebra(rng, sigma_scale)).collect();
    CotangentState::new(source, AmbientManifold::euclidean(1), group, q, p, gamma, sigma).expect("consistent ensemble")
}
