//! Truncated bases of the two Lie algebras acting on the phase space.
//!
//! Left elements `(u, nu)` are a vector field and an algebra-valued function
//! on the ambient manifold `M`, built from scalar modes with closed-form
//! values and gradients. Right elements `(v, zeta)` are sampled fields on `S`.

use nalgebra::{DMatrix, DVector, Matrix3xX};
use serde::{Deserialize, Serialize};

use crate::grid::SourceManifold;
use crate::lie::{AlgebraElement, StructureGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientKind {
    Euclidean,
    /// Flat torus with period `2 pi` in every coordinate. Points are stored lifted.
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientManifold {
    pub kind: AmbientKind,
    pub dim: usize,
}

impl AmbientManifold {
    pub fn euclidean(dim: usize) -> Self {
        assert!(dim >= 1);
        Self { kind: AmbientKind::Euclidean, dim }
    }

    pub fn torus(dim: usize) -> Self {
        assert!(dim >= 1);
        Self { kind: AmbientKind::Torus, dim }
    }

    pub fn is_torus(&self) -> bool {
        self.kind == AmbientKind::Torus
    }

    /// Distance, using the shortest periodic image on the torus.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                let d = if self.is_torus() { crate::lie::wrap_angle(d) } else { d };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Default truncated scalar basis: Fourier modes on the torus,
    /// Hermite functions on Euclidean space.
    pub fn scalar_modes(&self, k: usize) -> Vec<ScalarMode> {
        match self.kind {
            AmbientKind::Torus => fourier_modes(self.dim, k),
            AmbientKind::Euclidean => hermite_modes(self.dim, k, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trig {
    Cos,
    Sin,
}

/// Real scalar function on `M` with closed-form gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalarMode {
    Fourier { k: Vec<i64>, trig: Trig },
    /// `prod_j He_{n_j}(x_j/s)/sqrt(n_j!) * exp(-|x|^2 / (4 s^2))`.
    Hermite { degrees: Vec<usize>, scale: f64 },
}

impl ScalarMode {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }

    pub fn value_grad(&self, x: &[f64]) -> (f64, DVector<f64>) {
        match self {
            ScalarMode::Fourier { k, trig } => {
                let phase: f64 = k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
                let (s, c) = phase.sin_cos();
                let kv = DVector::from_iterator(k.len(), k.iter().map(|a| *a as f64));
                match trig {
                    Trig::Cos => (c, kv * (-s)),
                    Trig::Sin => (s, kv * c),
                }
            }
            ScalarMode::Hermite { degrees, scale } => {
                let d = degrees.len();
                let mut h = vec![0.0; d];
                let mut dh = vec![0.0; d];
                for j in 0..d {
                    let (v, dv) = hermite(degrees[j], x[j] / scale);
                    h[j] = v;
                    dh[j] = dv / scale;
                }
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let env = (-r2 / (4.0 * scale * scale)).exp();
                let prod: f64 = h.iter().product();
                let mut grad = DVector::zeros(d);
                for j in 0..d {
                    let others: f64 = (0..d).filter(|&i| i != j).map(|i| h[i]).product();
                    grad[j] = env * (others * dh[j] - prod * x[j] / (2.0 * scale * scale));
                }
                (prod * env, grad)
            }
        }
    }
}

/// Normalized probabilists' Hermite polynomial and its derivative.
fn hermite(n: usize, y: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, y);
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = p0;
    for k in 1..n {
        let p2 = y * p1 - k as f64 * p0;
        prev = p1;
        p0 = p1;
        p1 = p2;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = fact.sqrt();
    (p1 / norm, n as f64 * prev / norm)
}

/// Fourier modes with `|k|_1 <= kmax`, one representative of each `+-k` pair.
pub fn fourier_modes(dim: usize, kmax: usize) -> Vec<ScalarMode> {
    let mut out = vec![ScalarMode::Fourier { k: vec![0; dim], trig: Trig::Cos }];
    let km = kmax as i64;
    let mut k = vec![-km; dim];
    loop {
        let l1: i64 = k.iter().map(|v| v.abs()).sum();
        let first_nonzero = k.iter().find(|v| **v != 0).copied();
        if l1 <= km && first_nonzero.is_some_and(|v| v > 0) {
            out.push(ScalarMode::Fourier { k: k.clone(), trig: Trig::Cos });
            out.push(ScalarMode::Fourier { k: k.clone(), trig: Trig::Sin });
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < km {
                k[i] += 1;
                for v in k.iter_mut().skip(i + 1) {
                    *v = -km;
                }
                break;
            }
        }
    }
}

/// Hermite functions of total degree `<= kmax`.
pub fn hermite_modes(dim: usize, kmax: usize, scale: f64) -> Vec<ScalarMode> {
    let mut out = Vec::new();
    let mut deg = vec![0usize; dim];
    loop {
        if deg.iter().sum::<usize>() <= kmax {
            out.push(ScalarMode::Hermite { degrees: deg.clone(), scale });
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if deg[i] < kmax {
                deg[i] += 1;
                for v in deg.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Value-level access to a left test field `(u, nu)`.
pub trait TestField: Sync {
    fn velocity(&self, x: &[f64]) -> DVector<f64>;
    fn gauge(&self, x: &[f64]) -> AlgebraElement;
}

/// A left field with first derivatives.
pub trait LeftField: TestField {
    /// `Du`, rows indexed by component, columns by direction.
    fn velocity_jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// `D nu`, a `3 x d` matrix (unused rows zero for `U(1)`).
    fn gauge_jacobian(&self, x: &[f64]) -> Matrix3xX<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Velocity(usize),
    Gauge(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftTerm {
    pub coef: f64,
    pub mode: ScalarMode,
    pub slot: Slot,
}

/// Element `(u, nu)` of the semidirect product algebra as a finite sum of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftAlgebraElement {
    pub dim: usize,
    pub terms: Vec<LeftTerm>,
}

impl LeftAlgebraElement {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn single(dim: usize, mode: ScalarMode, slot: Slot) -> Self {
        Self { dim, terms: vec![LeftTerm { coef: 1.0, mode, slot }] }
    }

    /// Constant vector field `e`.
    pub fn constant_velocity(e: &[f64]) -> Self {
        let dim = e.len();
        let mode = ScalarMode::Fourier { k: vec![0; dim], trig: Trig::Cos };
        let terms = e.iter().enumerate().map(|(j, c)| LeftTerm { coef: *c, mode: mode.clone(), slot: Slot::Velocity(j) }).collect();
        Self { dim, terms }
    }

    /// Constant gauge field `nu = xi`.
    pub fn constant_gauge(dim: usize, xi: &AlgebraElement) -> Self {
        let mode = ScalarMode::Fourier { k: vec![0; dim], trig: Trig::Cos };
        let terms = (0..3).map(|a| LeftTerm { coef: xi.0[a], mode: mode.clone(), slot: Slot::Gauge(a) }).collect();
        Self { dim, terms }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coef *= s);
        out
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn velocity_part(&self) -> Self {
        Self { dim: self.dim, terms: self.terms.iter().filter(|t| matches!(t.slot, Slot::Velocity(_))).cloned().collect() }
    }

    pub fn gauge_part(&self) -> Self {
        Self { dim: self.dim, terms: self.terms.iter().filter(|t| matches!(t.slot, Slot::Gauge(_))).cloned().collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }
}

impl TestField for LeftAlgebraElement {
    fn velocity(&self, x: &[f64]) -> DVector<f64> {
        let mut u = DVector::zeros(self.dim);
        for t in &self.terms {
            if let Slot::Velocity(j) = t.slot {
                u[j] += t.coef * t.mode.value(x);
            }
        }
        u
    }

    fn gauge(&self, x: &[f64]) -> AlgebraElement {
        let mut nu = AlgebraElement::zero();
        for t in &self.terms {
            if let Slot::Gauge(a) = t.slot {
                nu.0[a] += t.coef * t.mode.value(x);
            }
        }
        nu
    }
}

impl LeftField for LeftAlgebraElement {
    fn velocity_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut du = DMatrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            if let Slot::Velocity(j) = t.slot {
                let (_, g) = t.mode.value_grad(x);
                for c in 0..self.dim {
                    du[(j, c)] += t.coef * g[c];
                }
            }
        }
        du
    }

    fn gauge_jacobian(&self, x: &[f64]) -> Matrix3xX<f64> {
        let mut dn = Matrix3xX::zeros(self.dim);
        for t in &self.terms {
            if let Slot::Gauge(a) = t.slot {
                let (_, g) = t.mode.value_grad(x);
                for c in 0..self.dim {
                    dn[(a, c)] += t.coef * g[c];
                }
            }
        }
        dn
    }
}

/// Semidirect bracket `[(u, nu), (u', nu')]` in the right-invariant
/// convention, evaluated pointwise:
/// `(Du u' - Du' u, D nu u' - D nu' u + [nu, nu'])`.
///
/// With this sign, `d/de jl(exp(e xi) . z)(xi') = -jl(z)([xi, xi'])`.
pub struct SemidirectBracket<'a> {
    pub group: StructureGroup,
    pub a: &'a dyn LeftField,
    pub b: &'a dyn LeftField,
}

impl TestField for SemidirectBracket<'_> {
    fn velocity(&self, x: &[f64]) -> DVector<f64> {
        let (u, u2) = (self.a.velocity(x), self.b.velocity(x));
        self.a.velocity_jacobian(x) * u2 - self.b.velocity_jacobian(x) * u
    }

    fn gauge(&self, x: &[f64]) -> AlgebraElement {
        let (u, u2) = (self.a.velocity(x), self.b.velocity(x));
        let lie = AlgebraElement(self.a.gauge_jacobian(x) * u2 - self.b.gauge_jacobian(x) * u);
        lie + self.group.ad(&self.a.gauge(x), &self.b.gauge(x))
    }
}

/// Left basis up to truncation `k`: every scalar mode in every velocity and gauge slot.
pub fn left_basis(ambient: &AmbientManifold, group: StructureGroup, k: usize) -> Vec<LeftAlgebraElement> {
    let modes = ambient.scalar_modes(k);
    let mut out = Vec::with_capacity(modes.len() * (ambient.dim + group.dim()));
    for mode in &modes {
        for j in 0..ambient.dim {
            out.push(LeftAlgebraElement::single(ambient.dim, mode.clone(), Slot::Velocity(j)));
        }
        for a in 0..group.dim() {
            out.push(LeftAlgebraElement::single(ambient.dim, mode.clone(), Slot::Gauge(a)));
        }
    }
    out
}

/// Element `(v, zeta)` of the right algebra, sampled on `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RightAlgebraElement {
    pub v: Vec<f64>,
    pub zeta: Vec<AlgebraElement>,
}

impl RightAlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self { v: vec![0.0; n], zeta: vec![AlgebraElement::zero(); n] }
    }

    pub fn has_velocity(&self) -> bool {
        self.v.iter().any(|x| *x != 0.0)
    }
}

fn circle_modes(kmax: usize) -> Vec<(usize, Trig)> {
    let mut out = vec![(0, Trig::Cos)];
    for k in 1..=kmax {
        out.push((k, Trig::Cos));
        out.push((k, Trig::Sin));
    }
    out
}

fn circle_mode_samples(source: &SourceManifold, k: usize, trig: Trig) -> Vec<f64> {
    source
        .nodes()
        .iter()
        .map(|x| match trig {
            Trig::Cos => (k as f64 * x).cos(),
            Trig::Sin => (k as f64 * x).sin(),
        })
        .collect()
}

/// Right basis: Fourier modes up to `k` for `v` and each `zeta` component on the
/// grid; on a point cloud, `zeta` supported on single nodes.
pub fn right_basis(source: &SourceManifold, group: StructureGroup, k: usize) -> Vec<RightAlgebraElement> {
    let n = source.len();
    let mut out = Vec::new();
    if source.is_grid() {
        for (kk, trig) in circle_modes(k) {
            let s = circle_mode_samples(source, kk, trig);
            out.push(RightAlgebraElement { v: s.clone(), zeta: vec![AlgebraElement::zero(); n] });
            for a in 0..group.dim() {
                let zeta = s.iter().map(|c| group.basis(a) * *c).collect();
                out.push(RightAlgebraElement { v: vec![0.0; n], zeta });
            }
        }
    } else {
        for i in 0..n {
            for a in 0..group.dim() {
                let mut e = RightAlgebraElement::zero(n);
                e.zeta[i] = group.basis(a);
                out.push(e);
            }
        }
    }
    out
}

/// Volume-preserving right basis: constant `v` (rotations of the circle) and
/// Fourier modes for `zeta`.
pub fn right_basis_vol(source: &SourceManifold, group: StructureGroup, k: usize) -> Vec<RightAlgebraElement> {
    right_basis(source, group, k)
        .into_iter()
        .filter(|e| !e.has_velocity() || e.v.iter().all(|x| (x - e.v[0]).abs() < 1e-14))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(mode: &ScalarMode, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|j| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[j] += h;
                m[j] -= h;
                (mode.value(&p) - mode.value(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn mode_gradients_match_finite_differences() {
        let x = [0.3, -0.7];
        for mode in fourier_modes(2, 3).iter().chain(hermite_modes(2, 5, 1.0).iter()) {
            let (_, g) = mode.value_grad(&x);
            let fd = fd_grad(mode, &x);
            for j in 0..2 {
                assert!((g[j] - fd[j]).abs() < 1e-8, "{mode:?}");
            }
        }
    }

    #[test]
    fn basis_counts() {
        assert_eq!(fourier_modes(1, 8).len(), 17);
        // |k1| + |k2| <= 2 has 13 lattice points
        assert_eq!(fourier_modes(2, 2).len(), 13);
        assert_eq!(hermite_modes(2, 3, 1.0).len(), 10);
        let b = left_basis(&AmbientManifold::torus(1), StructureGroup::Rotation3, 4);
        assert_eq!(b.len(), 9 * 4);
        let g = SourceManifold::periodic_grid(16).unwrap();
        assert_eq!(right_basis(&g, StructureGroup::Circle, 3).len(), 7 * 2);
        assert_eq!(right_basis_vol(&g, StructureGroup::Circle, 3).len(), 1 + 7);
        let pc = SourceManifold::point_cloud(vec![1.0; 5]).unwrap();
        assert_eq!(right_basis(&pc, StructureGroup::Rotation3, 3).len(), 15);
    }

    #[test]
    fn hermite_recurrence() {
        // He_3(y) = y^3 - 3y
        let (v, d) = hermite(3, 1.5);
        let n = 6f64.sqrt();
        assert!((v - (1.5f64.powi(3) - 4.5) / n).abs() < 1e-14);
        assert!((d - (3.0 * 2.25 - 3.0) / n).abs() < 1e-14);
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let g = StructureGroup::Rotation3;
        let basis = left_basis(&AmbientManifold::torus(2), g, 2);
        let a = basis[3].sum(&basis[7].scaled(0.5)).sum(&basis[20]);
        let b = basis[11].sum(&basis[24].scaled(-1.5)).sum(&basis[2]);
        let x = [0.4, 1.1];
        let ab = SemidirectBracket { group: g, a: &a, b: &b };
        let ba = SemidirectBracket { group: g, a: &b, b: &a };
        assert!((ab.velocity(&x) + ba.velocity(&x)).norm() < 1e-14);
        assert!((ab.gauge(&x) + ba.gauge(&x)).norm() < 1e-14);
    }
}
