//! The two momentum maps of the cotangent phase space and their derivatives.
//!
//! `J_L` is kept as a list of weighted point momenta and only ever evaluated
//! against test fields. `J_R` is a one-form density `alpha` on `S` (absent on
//! a point cloud) together with the charge field `nu = Ad*_gamma sigma`.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{LeftField, RightAlgebraElement, TestField};
use crate::error::Result;
use crate::lie::{AlgebraElement, CoalgebraElement, GroupElement, StructureGroup};
use crate::phase::{BaseTangent, CotangentState};

/// Dirac list `(Q_i, w_i P_i, w_i sigma_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracMomentum {
    pub points: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub charges: Vec<CoalgebraElement>,
}

impl DiracMomentum {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn jl(z: &CotangentState) -> DiracMomentum {
    let w = z.source.weights();
    DiracMomentum {
        points: (0..z.n()).map(|i| z.point(i)).collect(),
        momenta: (0..z.n()).map(|i| z.p.row(i).iter().map(|v| v * w[i]).collect()).collect(),
        charges: (0..z.n()).map(|i| z.sigma[i] * w[i]).collect(),
    }
}

/// `sum_i [w_i P_i . u(Q_i) + <w_i sigma_i, nu(Q_i)>]`.
pub fn jl_eval(m: &DiracMomentum, f: &dyn TestField) -> f64 {
    (0..m.len())
        .map(|i| {
            let u = f.velocity(&m.points[i]);
            let p: f64 = m.momenta[i].iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            p + m.charges[i].pair(&f.gauge(&m.points[i]))
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RightMomentum {
    /// One-form density samples (representative of the class modulo exact forms).
    pub alpha: Option<Vec<f64>>,
    pub nu: Vec<CoalgebraElement>,
}

impl RightMomentum {
    /// `sum_i w_i (alpha_i v_i + <nu_i, zeta_i>)`.
    pub fn pair(&self, weights: &[f64], e: &RightAlgebraElement) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nu.len() {
            s += weights[i] * self.nu[i].pair(&e.zeta[i]);
            if let Some(a) = &self.alpha {
                s += weights[i] * a[i] * e.v[i];
            }
        }
        s
    }

    /// `int alpha`, the invariant of the class of `alpha` modulo exact forms on the circle.
    pub fn alpha_mean(&self, weights: &[f64]) -> Option<f64> {
        self.alpha.as_ref().map(|a| a.iter().zip(weights).map(|(x, w)| x * w).sum())
    }

    /// Distance between classes: difference of `int alpha` plus the max charge difference.
    pub fn class_distance(&self, other: &Self, weights: &[f64]) -> f64 {
        let da = match (self.alpha_mean(weights), other.alpha_mean(weights)) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => 0.0,
        };
        da + self.nu_distance(other)
    }

    /// Distance using full `alpha` samples (no quotient by exact forms).
    pub fn full_distance(&self, other: &Self) -> f64 {
        let da = match (&self.alpha, &other.alpha) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            _ => 0.0,
        };
        da + self.nu_distance(other)
    }

    pub fn nu_distance(&self, other: &Self) -> f64 {
        self.nu.iter().zip(&other.nu).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)
    }
}

/// `alpha = P . DQ + <sigma, delta^r gamma>`, `nu = Ad*_gamma sigma`.
pub fn jr(z: &CotangentState) -> Result<RightMomentum> {
    let nu = z.sigma.iter().zip(&z.gamma).map(|(s, g)| z.group.co_adjoint(g, s)).collect();
    if !z.source.is_grid() {
        return Ok(RightMomentum { alpha: None, nu });
    }
    let dq = z.dq()?;
    let lr = z.logderiv()?;
    let alpha = (0..z.n()).map(|i| z.p.row(i).dot(&dq.row(i)) + z.sigma[i].pair(&lr[i])).collect();
    Ok(RightMomentum { alpha: Some(alpha), nu })
}

/// `<alpha_q, xi_Q(q)>` for a base generator.
pub fn generic_momentum_eval(z: &CotangentState, generator: &BaseTangent) -> f64 {
    z.pairing(generator)
}

/// Exact derivative of the discrete `jl_eval` along a chart tangent.
pub fn jl_tangent(z: &CotangentState, f: &dyn LeftField, t: &DVector<f64>) -> f64 {
    let l = z.layout();
    let w = z.source.weights();
    let mut s = 0.0;
    for i in 0..z.n() {
        let x = z.point(i);
        let u = f.velocity(&x);
        let du = f.velocity_jacobian(&x);
        let nu = f.gauge(&x);
        let dnu = f.gauge_jacobian(&x);
        let dq = DVector::from_fn(l.d, |j, _| t[l.q(i, j)]);
        let dp = DVector::from_fn(l.d, |j, _| t[l.p(i, j)]);
        let p = z.momentum(i);
        s += w[i] * (dp.dot(&u) + p.dot(&(du * &dq)) + l.get_s(t, i).pair(&nu) + z.sigma[i].0.dot(&(dnu * dq)));
    }
    s
}

/// Gradient of `jl_eval(., f)` in chart coordinates (one row of `djl`).
pub fn jl_gradient(z: &CotangentState, f: &dyn LeftField) -> DVector<f64> {
    let l = z.layout();
    let w = z.source.weights();
    let mut g = DVector::zeros(l.dim());
    for i in 0..z.n() {
        let x = z.point(i);
        let u = f.velocity(&x);
        let nu = f.gauge(&x);
        let gq = f.velocity_jacobian(&x).transpose() * z.momentum(i) + f.gauge_jacobian(&x).transpose() * z.sigma[i].0;
        for j in 0..l.d {
            g[l.q(i, j)] = w[i] * gq[j];
            g[l.p(i, j)] = w[i] * u[j];
        }
        for a in 0..l.m {
            g[l.s(i, a)] = w[i] * nu.0[a];
        }
    }
    g
}

/// Jacobian of `J_L` tested against `basis`: rows are test fields, columns chart coordinates.
pub fn djl<F: LeftField + Sync>(z: &CotangentState, basis: &[F]) -> DMatrix<f64> {
    let rows: Vec<DVector<f64>> = basis.par_iter().map(|f| jl_gradient(z, f)).collect();
    let mut m = DMatrix::zeros(rows.len(), z.layout().dim());
    for (r, row) in rows.iter().enumerate() {
        m.set_row(r, &row.transpose());
    }
    m
}

/// Exact derivative of the discrete `J_R` along a chart tangent.
pub fn jr_tangent(z: &CotangentState, t: &DVector<f64>) -> Result<RightMomentum> {
    let l = z.layout();
    let n = z.n();
    let j: Vec<AlgebraElement> = (0..n).map(|i| l.get_eta(t, i)).collect();
    let ds: Vec<CoalgebraElement> = (0..n).map(|i| l.get_s(t, i)).collect();
    let nu = (0..n).map(|i| z.group.co_adjoint(&z.gamma[i], &(z.group.coad(&j[i], &z.sigma[i]) + ds[i]))).collect();
    if !z.source.is_grid() {
        return Ok(RightMomentum { alpha: None, nu });
    }
    let dq = z.dq()?;
    let lr = z.logderiv()?;
    let vq = DMatrix::from_fn(n, l.d, |i, k| t[l.q(i, k)]);
    let dvq = z.d_field(&vq)?;
    let dlr = d_logderiv_discrete(z, &j)?;
    let alpha = (0..n)
        .map(|i| {
            let dp = DVector::from_fn(l.d, |k, _| t[l.p(i, k)]);
            dp.dot(&dq.row(i).transpose()) + z.p.row(i).dot(&dvq.row(i)) + ds[i].pair(&lr[i]) + z.sigma[i].pair(&dlr[i])
        })
        .collect();
    Ok(RightMomentum { alpha: Some(alpha), nu })
}

/// Exact variation of the discrete right log-derivative `vee((D G)_i G_i^T)`
/// along `delta G_k = j_k G_k`.
fn d_logderiv_discrete(z: &CotangentState, j: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
    let group = z.group;
    match group {
        StructureGroup::Circle => z.source.derivative_algebra(j),
        StructureGroup::Rotation3 => {
            let d = z.source.derivative_matrix()?;
            let n = z.n();
            let mats: Vec<Matrix3<f64>> = z.gamma.iter().map(GroupElement::matrix).collect();
            let jg: Vec<Matrix3<f64>> = (0..n).map(|k| group.hat(&j[k]) * mats[k]).collect();
            let dg = z.source.matrix_derivative(&z.gamma)?;
            Ok((0..n)
                .map(|i| {
                    let mut acc = Matrix3::zeros();
                    for k in 0..n {
                        let c = d[(i, k)];
                        if c != 0.0 {
                            acc += jg[k] * c;
                        }
                    }
                    let gi_t = mats[i].transpose();
                    group.vee(&(acc * gi_t - dg[i] * gi_t * group.hat(&j[i])))
                })
                .collect())
        }
    }
}

/// Jacobian of `J_R` tested against right algebra elements: rows are test
/// elements, columns chart coordinates.
pub fn djr(z: &CotangentState, basis: &[RightAlgebraElement]) -> Result<DMatrix<f64>> {
    let dim = z.layout().dim();
    let w = z.source.weights().to_vec();
    let cols: Vec<Result<DVector<f64>>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            let mut e = DVector::zeros(dim);
            e[c] = 1.0;
            let dm = jr_tangent(z, &e)?;
            Ok(DVector::from_iterator(basis.len(), basis.iter().map(|b| dm.pair(&w, b))))
        })
        .collect();
    let mut m = DMatrix::zeros(basis.len(), dim);
    for (c, col) in cols.into_iter().enumerate() {
        m.set_column(c, &col?);
    }
    Ok(m)
}
