//! Discretized cotangent bundle of `Emb(S, M) x F(S, O)` in right-trivialized
//! coordinates `(Q, P, gamma, sigma)`.
//!
//! Chart tangent vectors are flat vectors with per-node blocks
//! `[dQ (d), dP (d), eta (dim o), dsigma (dim o)]`, where `eta = (d gamma) gamma^{-1}`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{AmbientKind, AmbientManifold};
use crate::error::{Error, Result};
use crate::grid::SourceManifold;
use crate::lie::{AlgebraElement, CoalgebraElement, GroupElement, StructureGroup};

pub const DEFAULT_EPS_REG: f64 = 1e-8;
pub const DEFAULT_EPS_EMB: f64 = 1e-6;

/// Index arithmetic for chart vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartLayout {
    pub n: usize,
    pub d: usize,
    pub m: usize,
}

impl ChartLayout {
    pub fn stride(&self) -> usize {
        2 * self.d + 2 * self.m
    }

    pub fn dim(&self) -> usize {
        self.n * self.stride()
    }

    pub fn q(&self, i: usize, j: usize) -> usize {
        i * self.stride() + j
    }

    pub fn p(&self, i: usize, j: usize) -> usize {
        i * self.stride() + self.d + j
    }

    pub fn eta(&self, i: usize, a: usize) -> usize {
        i * self.stride() + 2 * self.d + a
    }

    pub fn s(&self, i: usize, a: usize) -> usize {
        i * self.stride() + 2 * self.d + self.m + a
    }

    pub fn get_eta(&self, t: &DVector<f64>, i: usize) -> AlgebraElement {
        let mut v = AlgebraElement::zero();
        for a in 0..self.m {
            v.0[a] = t[self.eta(i, a)];
        }
        v
    }

    pub fn get_s(&self, t: &DVector<f64>, i: usize) -> CoalgebraElement {
        let mut v = CoalgebraElement::zero();
        for a in 0..self.m {
            v.0[a] = t[self.s(i, a)];
        }
        v
    }

    pub fn set_eta(&self, t: &mut DVector<f64>, i: usize, v: &AlgebraElement) {
        for a in 0..self.m {
            t[self.eta(i, a)] = v.0[a];
        }
    }

    pub fn set_s(&self, t: &mut DVector<f64>, i: usize, v: &CoalgebraElement) {
        for a in 0..self.m {
            t[self.s(i, a)] = v.0[a];
        }
    }
}

/// Tangent to the base `(Q, gamma)`: `V_Q` and right-trivialized `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseTangent {
    pub vq: DMatrix<f64>,
    pub eta: Vec<AlgebraElement>,
}

impl BaseTangent {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { vq: DMatrix::zeros(n, d), eta: vec![AlgebraElement::zero(); n] }
    }
}

/// Point of the discretized phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentState {
    pub source: SourceManifold,
    pub ambient: AmbientManifold,
    pub group: StructureGroup,
    /// `N x d`, lifted coordinates on the torus.
    pub q: DMatrix<f64>,
    /// `N x d`, momentum per unit source volume.
    pub p: DMatrix<f64>,
    pub gamma: Vec<GroupElement>,
    pub sigma: Vec<CoalgebraElement>,
}

impl CotangentState {
    pub fn new(
        source: SourceManifold,
        ambient: AmbientManifold,
        group: StructureGroup,
        q: DMatrix<f64>,
        p: DMatrix<f64>,
        gamma: Vec<GroupElement>,
        sigma: Vec<CoalgebraElement>,
    ) -> Result<Self> {
        let n = source.len();
        let d = ambient.dim;
        if q.shape() != (n, d) || p.shape() != (n, d) || gamma.len() != n || sigma.len() != n {
            return Err(Error::ShapeMismatch(format!("state fields do not match {n} nodes in dimension {d}")));
        }
        if !q.iter().chain(p.iter()).all(|v| v.is_finite()) || !sigma.iter().all(|s| s.is_finite()) {
            return Err(Error::InvalidInput("state contains non-finite values".into()));
        }
        if let Some(g) = gamma.iter().find(|g| !group.check_member(g)) {
            return Err(Error::InvalidInput(format!("gamma value {g:?} is not in {group}")));
        }
        Ok(Self { source, ambient, group, q, p, gamma, sigma })
    }

    pub fn n(&self) -> usize {
        self.source.len()
    }

    pub fn d(&self) -> usize {
        self.ambient.dim
    }

    pub fn m(&self) -> usize {
        self.group.dim()
    }

    pub fn layout(&self) -> ChartLayout {
        ChartLayout { n: self.n(), d: self.d(), m: self.m() }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.q.row(i).iter().copied().collect()
    }

    pub fn momentum(&self, i: usize) -> DVector<f64> {
        self.p.row(i).transpose()
    }

    /// `|P_i|^2 + |sigma_i|^2` minimized over nodes.
    pub fn min_regularity(&self) -> (usize, f64) {
        (0..self.n())
            .map(|i| (i, (self.p.row(i).norm_squared() + self.sigma[i].norm_squared()).sqrt()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn is_regular(&self, eps_reg: f64) -> bool {
        self.min_regularity().1 >= eps_reg
    }

    pub fn require_regular(&self, eps_reg: f64) -> Result<()> {
        let (node, value) = self.min_regularity();
        if value < eps_reg {
            return Err(Error::NotRegular { node, value });
        }
        Ok(())
    }

    /// `min dist(Q_i, Q_j) / |x_i - x_j|` over node pairs (plain minimum distance on a point cloud).
    pub fn embedding_ratio(&self) -> f64 {
        let n = self.n();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let dq = self.ambient.distance(&self.point(i), &self.point(j));
                let dx = if self.source.is_grid() {
                    crate::lie::wrap_angle(self.source.nodes()[i] - self.source.nodes()[j]).abs()
                } else {
                    1.0
                };
                best = best.min(dq / dx);
            }
        }
        best
    }

    /// Spectral `DQ` (`N x d`), winding-aware on the torus.
    pub fn dq(&self) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.n(), self.d());
        for j in 0..self.d() {
            let col: Vec<f64> = self.q.column(j).iter().copied().collect();
            let dcol = match self.ambient.kind {
                AmbientKind::Torus => self.source.derivative_lifted(&col)?,
                AmbientKind::Euclidean => self.source.derivative(&col)?,
            };
            out.set_column(j, &DVector::from_vec(dcol));
        }
        Ok(out)
    }

    /// Spectral derivative of an `N x d` field without winding.
    pub fn d_field(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.source.derivative_matrix()? * f)
    }

    pub fn logderiv(&self) -> Result<Vec<AlgebraElement>> {
        self.source.logderiv_right(self.group, &self.gamma)
    }

    /// Move along a chart direction: additive in `(Q, P, sigma)`, `gamma -> exp(eps eta) gamma`.
    pub fn retract(&self, t: &DVector<f64>, eps: f64) -> Self {
        let l = self.layout();
        let mut z = self.clone();
        for i in 0..l.n {
            for j in 0..l.d {
                z.q[(i, j)] += eps * t[l.q(i, j)];
                z.p[(i, j)] += eps * t[l.p(i, j)];
            }
            let eta = l.get_eta(t, i);
            z.gamma[i] = self.group.exp(&(eta * eps)) * self.gamma[i];
            z.sigma[i] = self.sigma[i] + l.get_s(t, i) * eps;
        }
        z
    }

    /// Chart difference `(z2 - z1)` for nearby states, `eta` via the group log.
    pub fn chart_difference(&self, other: &Self) -> Result<DVector<f64>> {
        let l = self.layout();
        let mut t = DVector::zeros(l.dim());
        for i in 0..l.n {
            for j in 0..l.d {
                t[l.q(i, j)] = other.q[(i, j)] - self.q[(i, j)];
                t[l.p(i, j)] = other.p[(i, j)] - self.p[(i, j)];
            }
            let eta = self.group.log(&(other.gamma[i] * self.gamma[i].inverse()))?;
            l.set_eta(&mut t, i, &eta);
            l.set_s(&mut t, i, &(other.sigma[i] - self.sigma[i]));
        }
        Ok(t)
    }

    /// `sum_i w_i [P_i . V_Q + <sigma_i, eta_i>]`.
    pub fn pairing(&self, v: &BaseTangent) -> f64 {
        let w = self.source.weights();
        (0..self.n())
            .map(|i| w[i] * (self.p.row(i).dot(&v.vq.row(i)) + self.sigma[i].pair(&v.eta[i])))
            .sum()
    }

    /// Base part of a chart tangent.
    pub fn base_part(&self, t: &DVector<f64>) -> BaseTangent {
        let l = self.layout();
        let mut b = BaseTangent::zeros(l.n, l.d);
        for i in 0..l.n {
            for j in 0..l.d {
                b.vq[(i, j)] = t[l.q(i, j)];
            }
            b.eta[i] = l.get_eta(t, i);
        }
        b
    }

    /// Canonical symplectic form in the chart:
    /// `sum_i w_i [dQ1.dP2 - dP1.dQ2 + <ds2, eta1> - <ds1, eta2> - <sigma, [eta1, eta2]>]`.
    pub fn omega(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&self.omega_apply(b))
    }

    /// `Omega_mat b` with `omega(a, b) = a^T Omega_mat b`.
    pub fn omega_apply(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = self.layout();
        let w = self.source.weights();
        let mut out = DVector::zeros(l.dim());
        for i in 0..l.n {
            for j in 0..l.d {
                out[l.q(i, j)] = w[i] * b[l.p(i, j)];
                out[l.p(i, j)] = -w[i] * b[l.q(i, j)];
            }
            let eta = l.get_eta(b, i);
            let br = self.group.coad(&eta, &self.sigma[i]);
            for a in 0..l.m {
                // -<sigma, [e_a, eta]> = <ad*_eta sigma, e_a>
                out[l.eta(i, a)] = w[i] * (b[l.s(i, a)] + br.0[a]);
                out[l.s(i, a)] = -w[i] * b[l.eta(i, a)];
            }
        }
        out
    }

    /// Dense `Omega_mat`.
    pub fn omega_matrix(&self) -> DMatrix<f64> {
        let dim = self.layout().dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = DVector::zeros(dim);
        for c in 0..dim {
            e[c] = 1.0;
            m.set_column(c, &self.omega_apply(&e));
            e[c] = 0.0;
        }
        m
    }
}
