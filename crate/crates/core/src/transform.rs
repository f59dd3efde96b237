//! Left and right transformers, their actions on base and phase space, and
//! the infinitesimal generators.
//!
//! Left: `(phi, a)` acts by `(Q, gamma) -> (phi o Q, (a o Q) gamma)`.
//! Right: `(psi, b)` acts by `(Q, gamma) -> (Q o psi, (gamma o psi) b)`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3xX};

use crate::basis::{AmbientKind, LeftAlgebraElement, LeftField, RightAlgebraElement, TestField};
use crate::error::{Error, Result};
use crate::grid::GridDiffeo;
use crate::lie::{AlgebraElement, GroupElement, StructureGroup};
use crate::phase::{BaseTangent, CotangentState};

/// Diffeomorphism of `M` with exact first derivative and inverse.
pub trait AmbientDiffeo: Send + Sync + Debug {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64>;
}

/// Map `M -> O` with its left logarithmic derivative `a^{-1} da` (a `3 x d` matrix).
pub trait GaugeMap: Send + Sync + Debug {
    fn value(&self, x: &DVector<f64>) -> GroupElement;
    fn left_logderiv(&self, x: &DVector<f64>) -> Matrix3xX<f64>;
}

#[derive(Debug, Clone)]
pub struct Identity;

impl AmbientDiffeo for Identity {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(x.len(), x.len())
    }
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }
}

#[derive(Debug, Clone)]
pub struct Affine {
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl Affine {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let inverse = matrix.clone().try_inverse().ok_or_else(|| Error::InvalidInput("affine map is singular".into()))?;
        Ok(Self { matrix, inverse, offset })
    }

    pub fn translation(offset: DVector<f64>) -> Self {
        let d = offset.len();
        Self { matrix: DMatrix::identity(d, d), inverse: DMatrix::identity(d, d), offset }
    }
}

impl AmbientDiffeo for Affine {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.offset
    }
    fn jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.matrix.clone()
    }
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.inverse * (y - &self.offset)
    }
}

/// Time-`t` map of the velocity of a left field, by implicit midpoint steps.
///
/// The Jacobian is the exact derivative of the discrete map, and the inverse
/// is the same scheme run backwards, so the three stay mutually consistent.
#[derive(Debug, Clone)]
pub struct Flow {
    pub field: LeftAlgebraElement,
    pub time: f64,
    pub steps: usize,
}

impl Flow {
    pub fn new(field: LeftAlgebraElement, time: f64) -> Self {
        let steps = (time.abs() / 0.02).ceil().max(1.0) as usize;
        Self { field: field.velocity_part(), time, steps }
    }

    fn step(&self, x: &DVector<f64>, h: f64) -> (DVector<f64>, DMatrix<f64>) {
        let mut y = x + self.field.velocity(x.as_slice()) * h;
        for _ in 0..100 {
            let mid = (x + &y) * 0.5;
            let next = x + self.field.velocity(mid.as_slice()) * h;
            let diff = (&next - &y).norm();
            y = next;
            if diff <= 1e-15 * (1.0 + y.norm()) {
                break;
            }
        }
        let mid = (x + &y) * 0.5;
        let du = self.field.velocity_jacobian(mid.as_slice()) * (0.5 * h);
        let d = x.len();
        let lhs = DMatrix::identity(d, d) - &du;
        let rhs = DMatrix::identity(d, d) + du;
        let jac = lhs.lu().solve(&rhs).expect("small steps keep I - h Du / 2 invertible");
        (y, jac)
    }

    fn run(&self, x: &DVector<f64>, sign: f64) -> (DVector<f64>, DMatrix<f64>) {
        let h = sign * self.time / self.steps as f64;
        let d = x.len();
        let mut y = x.clone();
        let mut jac = DMatrix::identity(d, d);
        for _ in 0..self.steps {
            let (next, j) = self.step(&y, h);
            jac = j * jac;
            y = next;
        }
        (y, jac)
    }
}

impl AmbientDiffeo for Flow {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.run(x, 1.0).0
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.run(x, 1.0).1
    }
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        self.run(y, -1.0).0
    }
}

#[derive(Debug, Clone)]
pub struct ComposedDiffeo {
    pub outer: Arc<dyn AmbientDiffeo>,
    pub inner: Arc<dyn AmbientDiffeo>,
}

impl AmbientDiffeo for ComposedDiffeo {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.outer.apply(&self.inner.apply(x))
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.outer.jacobian(&self.inner.apply(x)) * self.inner.jacobian(x)
    }
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        self.inner.apply_inverse(&self.outer.apply_inverse(y))
    }
}

#[derive(Debug, Clone)]
pub struct InverseDiffeo(pub Arc<dyn AmbientDiffeo>);

impl AmbientDiffeo for InverseDiffeo {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.apply_inverse(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.jacobian(&self.0.apply_inverse(x)).try_inverse().expect("diffeomorphism has invertible Jacobian")
    }
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        self.0.apply(y)
    }
}

#[derive(Debug, Clone)]
pub struct ConstantGauge {
    pub value: GroupElement,
    pub dim: usize,
}

impl GaugeMap for ConstantGauge {
    fn value(&self, _x: &DVector<f64>) -> GroupElement {
        self.value
    }
    fn left_logderiv(&self, _x: &DVector<f64>) -> Matrix3xX<f64> {
        Matrix3xX::zeros(self.dim)
    }
}

/// `a(x) = exp(s nu(x))`; `a^{-1} da = J_r(s nu) s D nu`.
#[derive(Debug, Clone)]
pub struct ExpGauge {
    pub group: StructureGroup,
    pub field: LeftAlgebraElement,
    pub scale: f64,
}

impl GaugeMap for ExpGauge {
    fn value(&self, x: &DVector<f64>) -> GroupElement {
        self.group.exp(&(self.field.gauge(x.as_slice()) * self.scale))
    }
    fn left_logderiv(&self, x: &DVector<f64>) -> Matrix3xX<f64> {
        let nu = self.field.gauge(x.as_slice()) * self.scale;
        self.group.right_jacobian(&nu) * self.field.gauge_jacobian(x.as_slice()) * self.scale
    }
}

fn adjoint_columns(group: StructureGroup, g: &GroupElement, m: &Matrix3xX<f64>) -> Matrix3xX<f64> {
    let mut out = m.clone();
    for c in 0..m.ncols() {
        let col = group.adjoint(g, &AlgebraElement(m.column(c).into()));
        out.set_column(c, &col.0);
    }
    out
}

/// `x -> a1(phi2(x)) a2(x)`.
#[derive(Debug, Clone)]
pub struct ComposedGauge {
    pub group: StructureGroup,
    pub outer: Arc<dyn GaugeMap>,
    pub inner_diffeo: Arc<dyn AmbientDiffeo>,
    pub inner: Arc<dyn GaugeMap>,
}

impl GaugeMap for ComposedGauge {
    fn value(&self, x: &DVector<f64>) -> GroupElement {
        self.outer.value(&self.inner_diffeo.apply(x)) * self.inner.value(x)
    }
    fn left_logderiv(&self, x: &DVector<f64>) -> Matrix3xX<f64> {
        let y = self.inner_diffeo.apply(x);
        let pulled = self.outer.left_logderiv(&y) * self.inner_diffeo.jacobian(x);
        let a2 = self.inner.value(x);
        adjoint_columns(self.group, &a2.inverse(), &pulled) + self.inner.left_logderiv(x)
    }
}

/// `y -> a(phi^{-1}(y))^{-1}`.
#[derive(Debug, Clone)]
pub struct InverseGauge {
    pub group: StructureGroup,
    pub gauge: Arc<dyn GaugeMap>,
    pub diffeo: Arc<dyn AmbientDiffeo>,
}

impl GaugeMap for InverseGauge {
    fn value(&self, y: &DVector<f64>) -> GroupElement {
        self.gauge.value(&self.diffeo.apply_inverse(y)).inverse()
    }
    fn left_logderiv(&self, y: &DVector<f64>) -> Matrix3xX<f64> {
        let x = self.diffeo.apply_inverse(y);
        let a = self.gauge.value(&x);
        let jinv = self.diffeo.jacobian(&x).try_inverse().expect("diffeomorphism has invertible Jacobian");
        -adjoint_columns(self.group, &a, &self.gauge.left_logderiv(&x)) * jinv
    }
}

/// Element `(phi, a)` of `Diff(M) x| F(M, O)`.
#[derive(Debug, Clone)]
pub struct LeftTransformer {
    pub group: StructureGroup,
    pub dim: usize,
    pub phi: Arc<dyn AmbientDiffeo>,
    pub a: Arc<dyn GaugeMap>,
}

fn probe_points(dim: usize) -> Vec<DVector<f64>> {
    (0..6)
        .map(|k| DVector::from_fn(dim, |j, _| ((k * 7 + j * 3) as f64 * 0.61).sin() * 1.3))
        .collect()
}

impl LeftTransformer {
    /// Builds a transformer after checking the supplied derivatives and
    /// inverse by central finite differences at fixed probe points.
    pub fn new(group: StructureGroup, dim: usize, phi: Arc<dyn AmbientDiffeo>, a: Arc<dyn GaugeMap>) -> Result<Self> {
        let t = Self { group, dim, phi, a };
        t.check_derivatives()?;
        Ok(t)
    }

    pub fn check_derivatives(&self) -> Result<()> {
        let h = 1e-5;
        for x in probe_points(self.dim) {
            let back = self.phi.apply_inverse(&self.phi.apply(&x));
            if (&back - &x).norm() > 1e-8 {
                return Err(Error::InconsistentDerivative(format!("inverse round trip misses by {:e}", (&back - &x).norm())));
            }
            let jac = self.phi.jacobian(&x);
            let lld = self.a.left_logderiv(&x);
            let ax = self.a.value(&x).inverse().matrix();
            for j in 0..self.dim {
                let mut e = DVector::zeros(self.dim);
                e[j] = h;
                let fd = (self.phi.apply(&(&x + &e)) - self.phi.apply(&(&x - &e))) / (2.0 * h);
                let res = (fd - jac.column(j)).norm() / (1.0 + jac.column(j).norm());
                let da = (self.a.value(&(&x + &e)).matrix() - self.a.value(&(&x - &e)).matrix()) / (2.0 * h);
                let fd_lld = self.group.vee(&(ax * da));
                let col: nalgebra::Vector3<f64> = lld.column(j).into();
                let res_a = (fd_lld.0 - col).norm() / (1.0 + col.norm());
                if res > 1e-6 || res_a > 1e-6 {
                    return Err(Error::InconsistentDerivative(format!("finite-difference residual {:e}", res.max(res_a))));
                }
            }
        }
        Ok(())
    }

    pub fn identity(group: StructureGroup, dim: usize) -> Self {
        Self { group, dim, phi: Arc::new(Identity), a: Arc::new(ConstantGauge { value: group.identity(), dim }) }
    }

    pub fn translation(group: StructureGroup, offset: DVector<f64>) -> Self {
        let dim = offset.len();
        Self { group, dim, phi: Arc::new(Affine::translation(offset)), a: Arc::new(ConstantGauge { value: group.identity(), dim }) }
    }

    pub fn constant_gauge(group: StructureGroup, dim: usize, g: GroupElement) -> Self {
        Self { group, dim, phi: Arc::new(Identity), a: Arc::new(ConstantGauge { value: g, dim }) }
    }

    pub fn with_gauge(mut self, a: Arc<dyn GaugeMap>) -> Self {
        self.a = a;
        self
    }

    /// `(flow of eps u, exp(eps nu))`: a curve through the identity with velocity `(u, nu)`.
    pub fn along(group: StructureGroup, elem: &LeftAlgebraElement, eps: f64) -> Self {
        let dim = elem.dim;
        let phi: Arc<dyn AmbientDiffeo> = if elem.velocity_part().is_zero() {
            Arc::new(Identity)
        } else {
            Arc::new(Flow::new(elem.clone(), eps))
        };
        Self { group, dim, phi, a: Arc::new(ExpGauge { group, field: elem.gauge_part(), scale: eps }) }
    }

    /// `(phi1 o phi2, (a1 o phi2) a2)`.
    pub fn compose(&self, other: &LeftTransformer) -> Self {
        Self {
            group: self.group,
            dim: self.dim,
            phi: Arc::new(ComposedDiffeo { outer: self.phi.clone(), inner: other.phi.clone() }),
            a: Arc::new(ComposedGauge { group: self.group, outer: self.a.clone(), inner_diffeo: other.phi.clone(), inner: other.a.clone() }),
        }
    }

    /// `(phi^{-1}, a^{-1} o phi^{-1})`.
    pub fn inverse(&self) -> Self {
        Self {
            group: self.group,
            dim: self.dim,
            phi: Arc::new(InverseDiffeo(self.phi.clone())),
            a: Arc::new(InverseGauge { group: self.group, gauge: self.a.clone(), diffeo: self.phi.clone() }),
        }
    }

    /// Automorphism of `M x O`: `(x, g) -> (phi(x), a(x) g)`.
    pub fn apply_automorphism(&self, x: &DVector<f64>, g: &GroupElement) -> (DVector<f64>, GroupElement) {
        (self.phi.apply(x), self.a.value(x) * *g)
    }
}

fn row_vec(m: &DMatrix<f64>, i: usize) -> DVector<f64> {
    m.row(i).transpose()
}

/// `(Q, gamma) -> (phi o Q, (a o Q) gamma)`.
pub fn act_left(t: &LeftTransformer, z: &CotangentState) -> CotangentState {
    let mut out = z.clone();
    for i in 0..z.n() {
        let x = row_vec(&z.q, i);
        out.q.set_row(i, &t.phi.apply(&x).transpose());
        out.gamma[i] = t.a.value(&x) * z.gamma[i];
    }
    out
}

/// Cotangent lift of the left action:
/// `P' = Dphi^{-T} (P - (a^{-1} da)^T sigma)`, `sigma' = Ad*_{a^{-1}} sigma`.
pub fn coact_left(t: &LeftTransformer, z: &CotangentState) -> CotangentState {
    let mut out = act_left(t, z);
    for i in 0..z.n() {
        let x = row_vec(&z.q, i);
        let a = t.a.value(&x);
        let lld = t.a.left_logderiv(&x);
        let shifted = row_vec(&z.p, i) - lld.transpose() * z.sigma[i].0;
        let jt = t.phi.jacobian(&x).transpose();
        let p_new = jt.lu().solve(&shifted).expect("diffeomorphism has invertible Jacobian");
        out.p.set_row(i, &p_new.transpose());
        out.sigma[i] = z.group.co_adjoint(&a.inverse(), &z.sigma[i]);
    }
    out
}

/// Tangent lift of the left action: `V' = Dphi V`, `eta' = Ad_a (eta + a^{-1} da [V])`.
pub fn tangent_left(t: &LeftTransformer, z: &CotangentState, v: &BaseTangent) -> BaseTangent {
    let mut out = v.clone();
    for i in 0..z.n() {
        let x = row_vec(&z.q, i);
        let vx = row_vec(&v.vq, i);
        out.vq.set_row(i, &(t.phi.jacobian(&x) * &vx).transpose());
        let lld = AlgebraElement(t.a.left_logderiv(&x) * vx);
        out.eta[i] = z.group.adjoint(&t.a.value(&x), &(v.eta[i] + lld));
    }
    out
}

/// Element `(psi, b)` of `Diff(S) x| F(S, O)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RightTransformer {
    pub psi: GridDiffeo,
    pub b: Vec<GroupElement>,
}

impl RightTransformer {
    pub fn identity(z: &CotangentState) -> Self {
        Self { psi: GridDiffeo::identity(&z.source), b: vec![z.group.identity(); z.n()] }
    }

    /// `(x + eps v, exp(eps zeta))`: a curve through the identity with velocity `(v, zeta)`.
    pub fn along(z: &CotangentState, elem: &RightAlgebraElement, eps: f64) -> Result<Self> {
        let n = z.n();
        let psi = if z.source.is_grid() {
            let dv = z.source.derivative(&elem.v)?;
            GridDiffeo {
                values: z.source.nodes().iter().zip(&elem.v).map(|(x, v)| x + eps * v).collect(),
                jacobian: dv.iter().map(|d| 1.0 + eps * d).collect(),
            }
        } else {
            if elem.has_velocity() {
                return Err(Error::PointCloudHasNoDerivative);
            }
            GridDiffeo { values: z.source.nodes().to_vec(), jacobian: vec![1.0; n] }
        };
        let b = elem.zeta.iter().map(|x| z.group.exp(&(*x * eps))).collect();
        Ok(Self { psi, b })
    }
}

fn resample_columns(z: &CotangentState, f: &DMatrix<f64>, psi: &GridDiffeo, lifted: bool) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(f.nrows(), f.ncols());
    for j in 0..f.ncols() {
        let col: Vec<f64> = f.column(j).iter().copied().collect();
        let r = if lifted { z.source.resample_lifted(&col, psi)? } else { z.source.resample(&col, psi)? };
        out.set_column(j, &DVector::from_vec(r));
    }
    Ok(out)
}

fn is_identity_diffeo(z: &CotangentState, psi: &GridDiffeo) -> bool {
    psi.values.iter().zip(z.source.nodes()).all(|(a, b)| a == b)
}

/// `(Q, gamma) -> (Q o psi, (gamma o psi) b)`.
pub fn act_right(z: &CotangentState, t: &RightTransformer) -> Result<CotangentState> {
    let mut out = z.clone();
    if !is_identity_diffeo(z, &t.psi) {
        out.q = resample_columns(z, &z.q, &t.psi, z.ambient.kind == AmbientKind::Torus)?;
        out.gamma = z.source.resample_group(z.group, &z.gamma, &t.psi)?;
    }
    for (g, b) in out.gamma.iter_mut().zip(&t.b) {
        *g = *g * *b;
    }
    Ok(out)
}

/// Cotangent lift of the right action: `P' = (P o psi) Jac`, `sigma' = (sigma o psi) Jac`.
pub fn coact_right(z: &CotangentState, t: &RightTransformer) -> Result<CotangentState> {
    let mut out = act_right(z, t)?;
    if !is_identity_diffeo(z, &t.psi) {
        let p = resample_columns(z, &z.p, &t.psi, false)?;
        let sig = DMatrix::from_fn(z.n(), z.m(), |i, a| z.sigma[i].0[a]);
        let sig = resample_columns(z, &sig, &t.psi, false)?;
        for i in 0..z.n() {
            let jac = t.psi.jacobian[i];
            out.p.set_row(i, &(p.row(i) * jac));
            let mut s = crate::lie::CoalgebraElement::zero();
            for a in 0..z.m() {
                s.0[a] = sig[(i, a)] * jac;
            }
            out.sigma[i] = s;
        }
    }
    Ok(out)
}

/// Tangent lift of the right action (base part).
pub fn tangent_right(z: &CotangentState, t: &RightTransformer, v: &BaseTangent) -> Result<BaseTangent> {
    let mut out = v.clone();
    if !is_identity_diffeo(z, &t.psi) {
        out.vq = resample_columns(z, &v.vq, &t.psi, false)?;
        let eta = DMatrix::from_fn(z.n(), 3, |i, a| v.eta[i].0[a]);
        let eta = resample_columns(z, &eta, &t.psi, false)?;
        out.eta = (0..z.n()).map(|i| AlgebraElement::new(eta[(i, 0)], eta[(i, 1)], eta[(i, 2)])).collect();
    }
    // d(gamma b) (gamma b)^{-1} = (d gamma) gamma^{-1}: right translation leaves eta unchanged
    Ok(out)
}

/// Base generator of the left action: `(u o Q, nu o Q)`.
pub fn generator_left(elem: &dyn TestField, z: &CotangentState) -> BaseTangent {
    let mut out = BaseTangent::zeros(z.n(), z.d());
    for i in 0..z.n() {
        let x = z.point(i);
        out.vq.set_row(i, &elem.velocity(&x).transpose());
        out.eta[i] = elem.gauge(&x);
    }
    out
}

/// Base generator of the right action: `(DQ v, (delta^r gamma) v + Ad_gamma zeta)`.
pub fn generator_right(elem: &RightAlgebraElement, z: &CotangentState) -> Result<BaseTangent> {
    let mut out = BaseTangent::zeros(z.n(), z.d());
    let (dq, lr) = if elem.has_velocity() {
        (Some(z.dq()?), Some(z.logderiv()?))
    } else {
        (None, None)
    };
    for i in 0..z.n() {
        let mut eta = z.group.adjoint(&z.gamma[i], &elem.zeta[i]);
        if let (Some(dq), Some(lr)) = (&dq, &lr) {
            out.vq.set_row(i, &(dq.row(i) * elem.v[i]));
            eta += lr[i] * elem.v[i];
        }
        out.eta[i] = eta;
    }
    Ok(out)
}

/// Cotangent-lifted left generator in chart coordinates:
/// `(u(Q), -(Du)^T P - (D nu)^T sigma, nu(Q), -ad*_{nu(Q)} sigma)`.
pub fn cotangent_generator_left(elem: &dyn LeftField, z: &CotangentState) -> DVector<f64> {
    let l = z.layout();
    let mut t = DVector::zeros(l.dim());
    for i in 0..z.n() {
        let x = z.point(i);
        let u = elem.velocity(&x);
        let du = elem.velocity_jacobian(&x);
        let nu = elem.gauge(&x);
        let dnu = elem.gauge_jacobian(&x);
        let dp = -(du.transpose() * z.momentum(i)) - dnu.transpose() * z.sigma[i].0;
        for j in 0..l.d {
            t[l.q(i, j)] = u[j];
            t[l.p(i, j)] = dp[j];
        }
        l.set_eta(&mut t, i, &nu);
        l.set_s(&mut t, i, &-z.group.coad(&nu, &z.sigma[i]));
    }
    t
}

/// Cotangent-lifted right generator in chart coordinates:
/// `(DQ v, D(P v), (delta^r gamma) v + Ad_gamma zeta, D(sigma v))`.
pub fn cotangent_generator_right(elem: &RightAlgebraElement, z: &CotangentState) -> Result<DVector<f64>> {
    let l = z.layout();
    let base = generator_right(elem, z)?;
    let mut t = DVector::zeros(l.dim());
    let (dpv, dsv) = if elem.has_velocity() {
        let pv = DMatrix::from_fn(z.n(), z.d(), |i, j| z.p[(i, j)] * elem.v[i]);
        let sv = DMatrix::from_fn(z.n(), z.m(), |i, a| z.sigma[i].0[a] * elem.v[i]);
        (z.d_field(&pv)?, z.d_field(&sv)?)
    } else {
        (DMatrix::zeros(z.n(), z.d()), DMatrix::zeros(z.n(), z.m()))
    };
    for i in 0..z.n() {
        for j in 0..l.d {
            t[l.q(i, j)] = base.vq[(i, j)];
            t[l.p(i, j)] = dpv[(i, j)];
        }
        l.set_eta(&mut t, i, &base.eta[i]);
        for a in 0..l.m {
            t[l.s(i, a)] = dsv[(i, a)];
        }
    }
    Ok(t)
}
