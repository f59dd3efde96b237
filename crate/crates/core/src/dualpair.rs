//! Numerical certificates for the dual pair: symplectic orthogonality of the
//! two orbit families, kernel versus orbit span, and the constructive
//! witnesses of transitivity.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{left_basis, AmbientKind, LeftAlgebraElement, LeftField, RightAlgebraElement, TestField};
use crate::error::{Error, Result};
use crate::grid::{GridDiffeo, SourceManifold, TrigInterpolant};
use crate::lie::{wrap_angle, AlgebraElement};
use crate::momentum::{jl, jl_eval};
use crate::phase::{CotangentState, DEFAULT_EPS_REG};
use crate::samples;
use crate::transform::{coact_right, cotangent_generator_left, cotangent_generator_right, RightTransformer};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Columns are cotangent-lifted left generators.
pub fn left_generators<F: LeftField + Sync>(z: &CotangentState, basis: &[F]) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = basis.par_iter().map(|f| cotangent_generator_left(f, z)).collect();
    stack_columns(z.layout().dim(), &cols)
}

/// Columns are cotangent-lifted right generators.
pub fn right_generators(z: &CotangentState, basis: &[RightAlgebraElement]) -> Result<DMatrix<f64>> {
    let cols: Result<Vec<DVector<f64>>> = basis.par_iter().map(|e| cotangent_generator_right(e, z)).collect();
    Ok(stack_columns(z.layout().dim(), &cols?))
}

fn stack_columns(dim: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, cols.len());
    for (c, col) in cols.iter().enumerate() {
        m.set_column(c, col);
    }
    m
}

/// `max_ij |a_i^T Omega b_j| / (|Omega a_i| |b_j|)`, zero columns skipped.
pub fn orthogonality_residual(z: &CotangentState, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || b.ncols() == 0 {
        return 0.0;
    }
    // Omega^T = -Omega, so a^T Omega b = -(Omega a)^T b
    let oa: Vec<DVector<f64>> = (0..a.ncols()).into_par_iter().map(|i| z.omega_apply(&a.column(i).into_owned())).collect();
    let bn: Vec<f64> = (0..b.ncols()).map(|j| b.column(j).norm()).collect();
    oa.par_iter()
        .map(|o| {
            let on = o.norm();
            if on == 0.0 {
                return 0.0;
            }
            (0..b.ncols())
                .filter(|&j| bn[j] > 0.0)
                .map(|j| o.dot(&b.column(j)).abs() / (on * bn[j]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Comparison of the null space of a momentum Jacobian with an orbit span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub chart_dim: usize,
    pub jacobian_rank: usize,
    pub kernel_dim: usize,
    pub orbit_dim: usize,
    /// `kernel_dim - orbit_dim`.
    pub excess: i64,
    /// `max_j |J g_j| / (|J|_2 |g_j|)` over orbit generators.
    pub inclusion_residual: f64,
    /// Cosines of the principal angles between orbit span and kernel, descending.
    pub cosines: Vec<f64>,
    /// `1 - |V_ker^T U_orbit|_F^2 / kernel_dim`: fraction of the kernel not
    /// reached by the orbit span.
    pub gap: f64,
}

/// Kernel of `jac` against the span of `orbit` columns at a regular state.
pub fn kernel_vs_orbit(z: &CotangentState, jac: &DMatrix<f64>, orbit: &DMatrix<f64>) -> Result<KernelReport> {
    z.require_regular(DEFAULT_EPS_REG)?;
    subspace_report(jac, orbit)
}

/// Same comparison without the regularity precondition; used to witness the
/// failure of transitivity where `(P, sigma)` vanishes.
pub fn transitivity_defect(jac: &DMatrix<f64>, orbit: &DMatrix<f64>) -> Result<KernelReport> {
    subspace_report(jac, orbit)
}

fn subspace_report(jac: &DMatrix<f64>, orbit: &DMatrix<f64>) -> Result<KernelReport> {
    let dim = jac.ncols();
    if orbit.nrows() != dim {
        return Err(Error::ShapeMismatch(format!("orbit vectors have length {}, chart has {dim}", orbit.nrows())));
    }
    // pad to square so the SVD returns a full right basis
    let mut sq = DMatrix::zeros(dim.max(jac.nrows()), dim);
    sq.rows_mut(0, jac.nrows()).copy_from(jac);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::InvalidInput("SVD failed".into()))?;
    let smax = svd.singular_values.max();
    let tol = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let kernel_idx: Vec<usize> = (0..dim).filter(|&i| svd.singular_values[i] <= tol).collect();
    let rank = dim - kernel_idx.len();
    let mut vker = DMatrix::zeros(dim, kernel_idx.len());
    for (c, &i) in kernel_idx.iter().enumerate() {
        vker.set_column(c, &vt.row(i).transpose());
    }
    let uo = orthonormal_span(orbit);
    let inclusion = (0..orbit.ncols())
        .filter_map(|j| {
            let g = orbit.column(j);
            let gn = g.norm();
            (gn > 0.0 && smax > 0.0).then(|| (jac * g).norm() / (smax * gn))
        })
        .fold(0.0, f64::max);
    let (cosines, gap) = if vker.ncols() == 0 || uo.ncols() == 0 {
        (Vec::new(), if vker.ncols() == 0 { 0.0 } else { 1.0 })
    } else {
        let c = vker.transpose() * &uo;
        let cos: Vec<f64> = c.clone().svd(false, false).singular_values.iter().map(|s| s.min(1.0)).collect();
        let mut cos = cos;
        cos.sort_by(|a, b| b.total_cmp(a));
        (cos, 1.0 - c.norm_squared() / vker.ncols() as f64)
    };
    Ok(KernelReport {
        chart_dim: dim,
        jacobian_rank: rank,
        kernel_dim: vker.ncols(),
        orbit_dim: uo.ncols(),
        excess: vker.ncols() as i64 - uo.ncols() as i64,
        inclusion_residual: inclusion,
        cosines,
        gap,
    })
}

/// Orthonormal basis of the column span, numerical rank by `RANK_TOL`.
pub fn orthonormal_span(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > RANK_TOL * smax).collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Checks of the trivialized symplectic form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub dim: usize,
    /// Largest relative mismatch between `Omega(a, b)` and `-d theta(a, b)`
    /// computed through the exponential chart.
    pub max_rel_err: f64,
    pub skew_residual: f64,
    pub condition_number: f64,
}

/// One-form `theta = P dQ + <sigma, d gamma gamma^{-1}>` pulled back through the
/// chart `x -> (Q + x_Q, P + x_P, exp(x_eta) gamma, sigma + x_s)`, evaluated on
/// the constant coordinate field `b` at `x`.
fn chart_theta(z: &CotangentState, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let l = z.layout();
    let w = z.source.weights();
    let mut s = 0.0;
    for i in 0..l.n {
        for j in 0..l.d {
            s += w[i] * (z.p[(i, j)] + x[l.p(i, j)]) * b[l.q(i, j)];
        }
        let jl = z.group.left_jacobian(&l.get_eta(x, i));
        let eta = AlgebraElement(jl * l.get_eta(b, i).0);
        s += w[i] * (z.sigma[i] + l.get_s(x, i)).pair(&eta);
    }
    s
}

/// Compare the chart form with `-d theta` by central differences on random
/// tangent pairs.
pub fn validate_chart<R: Rng + ?Sized>(rng: &mut R, z: &CotangentState, pairs: usize) -> ChartReport {
    let l = z.layout();
    let h = 1e-5;
    let mut max_rel: f64 = 0.0;
    for _ in 0..pairs {
        let a = samples::random_tangent(rng, &l);
        let b = samples::random_tangent(rng, &l);
        let d_a_thb = (chart_theta(z, &(&a * h), &b) - chart_theta(z, &(&a * -h), &b)) / (2.0 * h);
        let d_b_tha = (chart_theta(z, &(&b * h), &a) - chart_theta(z, &(&b * -h), &a)) / (2.0 * h);
        let oracle = -(d_a_thb - d_b_tha);
        let val = z.omega(&a, &b);
        max_rel = max_rel.max((val - oracle).abs() / oracle.abs().max(1e-12));
    }
    let om = z.omega_matrix();
    let skew = (&om + om.transpose()).amax();
    let sv = om.singular_values();
    let cond = sv.max() / sv.min();
    ChartReport { dim: l.dim(), max_rel_err: max_rel, skew_residual: skew, condition_number: cond }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Isotropy element built from a conormal target: vanishes on `N = Q(S)` and
/// moves the momenta there by the target.
#[derive(Debug, Clone)]
pub struct IsotropyField {
    dim: usize,
    radius: f64,
    curve: Vec<TrigInterpolant>,
    nodes: Vec<Vec<f64>>,
    lambda: Vec<TrigInterpolant>,
    p_sharp: Vec<TrigInterpolant>,
    sigma_sharp: Vec<TrigInterpolant>,
    zero: bool,
}

impl IsotropyField {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn curve_eval(&self, s: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let mut v = DVector::zeros(self.dim);
        let mut d1 = DVector::zeros(self.dim);
        let mut d2 = DVector::zeros(self.dim);
        for (j, it) in self.curve.iter().enumerate() {
            let (a, b, c) = it.eval(s);
            v[j] = a;
            d1[j] = b;
            d2[j] = c;
        }
        (v, d1, d2)
    }

    /// Nearest-point parameter on the curve, by Newton from the closest node.
    pub fn project(&self, y: &[f64]) -> Result<Option<(f64, DVector<f64>)>> {
        let yv = DVector::from_column_slice(y);
        let (i0, d0) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, q)| (i, (DVector::from_column_slice(q) - &yv).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("curve has nodes");
        let h = 2.0 * std::f64::consts::PI / self.nodes.len() as f64;
        if d0 > self.radius + h * 10.0 {
            return Ok(None);
        }
        let mut s = i0 as f64 * h;
        for _ in 0..60 {
            let (q, d1, d2) = self.curve_eval(s);
            let r = &q - &yv;
            let g = r.dot(&d1);
            let hess = d1.norm_squared() + r.dot(&d2);
            if hess <= 0.0 {
                return Err(Error::ProjectionFailed(format!("non-convex distance at parameter {s}")));
            }
            let step = g / hess;
            s -= step;
            if step.abs() < 1e-15 * (1.0 + s.abs()) {
                let (q, _, _) = self.curve_eval(s);
                return Ok(Some((s, q)));
            }
        }
        let (q, _, _) = self.curve_eval(s);
        let r = &q - &yv;
        let (_, d1, _) = self.curve_eval(s);
        if r.dot(&d1).abs() < 1e-12 * (1.0 + r.norm()) {
            Ok(Some((s, q)))
        } else {
            Err(Error::ProjectionFailed(format!("projection did not converge near node {i0}")))
        }
    }

    /// Scalar `f(y) = chi(dist) lambda(p(y)) . (y - p(y))` and the parameter of `p(y)`.
    fn scalar(&self, y: &[f64]) -> Option<(f64, f64)> {
        if self.zero {
            return None;
        }
        let (s, p) = self.project(y).ok().flatten()?;
        let diff = DVector::from_column_slice(y) - p;
        let dist = diff.norm();
        if dist >= self.radius {
            return None;
        }
        let chi = 1.0 - smooth_step((2.0 * dist / self.radius) - 1.0);
        let lam = DVector::from_iterator(self.dim, self.lambda.iter().map(|it| it.value(s)));
        Some((chi * lam.dot(&diff), s))
    }

    fn fd_columns(&self, x: &[f64], f: impl Fn(&[f64]) -> DVector<f64>, rows: usize) -> DMatrix<f64> {
        let h = 1e-5;
        let mut m = DMatrix::zeros(rows, self.dim);
        for c in 0..self.dim {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += h;
            xm[c] -= h;
            m.set_column(c, &((f(&xp) - f(&xm)) / (2.0 * h)));
        }
        m
    }
}

impl TestField for IsotropyField {
    fn velocity(&self, x: &[f64]) -> DVector<f64> {
        match self.scalar(x) {
            Some((f, s)) => DVector::from_iterator(self.dim, self.p_sharp.iter().map(|it| -f * it.value(s))),
            None => DVector::zeros(self.dim),
        }
    }

    fn gauge(&self, x: &[f64]) -> AlgebraElement {
        match self.scalar(x) {
            Some((f, s)) => {
                let mut nu = AlgebraElement::zero();
                for (a, it) in self.sigma_sharp.iter().enumerate() {
                    nu.0[a] = -f * it.value(s);
                }
                nu
            }
            None => AlgebraElement::zero(),
        }
    }
}

impl LeftField for IsotropyField {
    fn velocity_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        self.fd_columns(x, |y| self.velocity(y), self.dim)
    }

    fn gauge_jacobian(&self, x: &[f64]) -> nalgebra::Matrix3xX<f64> {
        let m = self.fd_columns(x, |y| DVector::from_column_slice(self.gauge(y).0.as_slice()), 3);
        nalgebra::Matrix3xX::from_fn(self.dim, |r, c| m[(r, c)])
    }
}

#[derive(Debug, Clone)]
pub struct IsotropyWitness {
    pub field: IsotropyField,
    /// `max_i |delta P_i - P'_i|` for the cotangent generator of the field.
    pub residual: f64,
    /// `max_i |(u, nu)(Q_i)|`: the field must fix `N` pointwise.
    pub isotropy_defect: f64,
    /// Largest nodewise relative error of the two proof terms against the
    /// fractions `|P|^2 / (|P|^2 + |sigma|^2)` and `|sigma|^2 / (...)` of `P'`.
    pub split_error: f64,
}

/// Reach estimate of the curve `Q(S)`: minimum of curvature radius and half the
/// distance between parameter-separated nodes.
pub fn reach_estimate(z: &CotangentState) -> Result<f64> {
    let dq = z.dq()?;
    let ddq = z.d_field(&dq)?;
    let n = z.n();
    let mut reach = f64::INFINITY;
    for i in 0..n {
        let a = dq.row(i);
        let b = ddq.row(i);
        let cross2 = a.norm_squared() * b.norm_squared() - a.dot(&b).powi(2);
        if cross2 > 0.0 {
            reach = reach.min(a.norm().powi(3) / cross2.sqrt());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (j - i).min(n + i - j) * 4 >= n {
                reach = reach.min(0.5 * z.ambient.distance(&z.point(i), &z.point(j)));
            }
        }
    }
    Ok(reach)
}

/// Build the isotropy witness for a conormal target `target` (`N x d`).
pub fn isotropy_witness(z: &CotangentState, target: &DMatrix<f64>) -> Result<IsotropyWitness> {
    if z.ambient.kind != AmbientKind::Euclidean {
        return Err(Error::InvalidInput("the isotropy witness is built for Euclidean ambient space".into()));
    }
    if target.shape() != (z.n(), z.d()) {
        return Err(Error::ShapeMismatch("target must be N x d".into()));
    }
    z.require_regular(DEFAULT_EPS_REG)?;
    let dq = z.dq()?;
    for i in 0..z.n() {
        let t = target.row(i);
        let res = t.dot(&dq.row(i)).abs();
        if res > 1e-8 * t.norm().max(1.0) * dq.row(i).norm() {
            return Err(Error::NotConormal { node: i, residual: res });
        }
    }
    let group = z.group;
    let n = z.n();
    let col = |m: &DMatrix<f64>, j: usize| -> Vec<f64> { m.column(j).iter().copied().collect() };
    let denom: Vec<f64> = (0..n).map(|i| z.p.row(i).norm_squared() + group.cotau_pair(&z.sigma[i], &z.sigma[i])).collect();
    let lam = DMatrix::from_fn(n, z.d(), |i, j| target[(i, j)] / denom[i]);
    let ss: Vec<AlgebraElement> = z.sigma.iter().map(|s| group.sharp(s)).collect();
    let curve = (0..z.d()).map(|j| z.source.interpolant(&col(&z.q, j))).collect::<Result<_>>()?;
    let lambda = (0..z.d()).map(|j| z.source.interpolant(&col(&lam, j))).collect::<Result<_>>()?;
    let p_sharp = (0..z.d()).map(|j| z.source.interpolant(&col(&z.p, j))).collect::<Result<_>>()?;
    let sigma_sharp = (0..3)
        .map(|a| z.source.interpolant(&ss.iter().map(|s| s.0[a]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let field = IsotropyField {
        dim: z.d(),
        radius: 0.5 * reach_estimate(z)?,
        curve,
        nodes: (0..n).map(|i| z.point(i)).collect(),
        lambda,
        p_sharp,
        sigma_sharp,
        zero: target.amax() == 0.0,
    };
    let tmax = target.amax();
    let mut residual: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut split: f64 = 0.0;
    for i in 0..n {
        let x = z.point(i);
        defect = defect.max(field.velocity(&x).amax()).max(field.gauge(&x).0.amax());
        let tp = -(field.velocity_jacobian(&x).transpose() * z.momentum(i));
        let ts = -(field.gauge_jacobian(&x).transpose() * z.sigma[i].0);
        let t = target.row(i).transpose();
        residual = residual.max((&tp + &ts - &t).amax());
        let tn = t.norm();
        if tn > 1e-3 * tmax {
            let fp = z.p.row(i).norm_squared() / denom[i];
            split = split.max((&tp - &t * fp).norm() / tn).max((&ts - &t * (1.0 - fp)).norm() / tn);
        }
    }
    Ok(IsotropyWitness { field, residual, isotropy_defect: defect, split_error: split })
}

/// Random smooth conormal target `a(s) n(s)` along a planar curve.
pub fn random_conormal_target<R: Rng + ?Sized>(rng: &mut R, z: &CotangentState) -> Result<DMatrix<f64>> {
    if z.d() != 2 {
        return Err(Error::InvalidInput("conormal targets are generated for planar curves".into()));
    }
    let dq = z.dq()?;
    let a = samples::fourier_field(rng, z.source.nodes(), 2, 0.3);
    let c = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Ok(DMatrix::from_fn(z.n(), 2, |i, j| {
        let t = dq.row(i);
        let nrm = [-t[1], t[0]];
        c * (1.0 + a[i]) * nrm[j] / t.norm()
    }))
}

/// Largest discrepancy of two states in the same chart (`Q` wrapped on the torus).
pub fn state_distance(a: &CotangentState, b: &CotangentState) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..a.n() {
        d = d.max(a.ambient.distance(&a.point(i), &b.point(i)));
        d = d.max((a.p.row(i) - b.p.row(i)).amax());
        d = d.max((a.sigma[i] - b.sigma[i]).0.amax());
        d = d.max(a.gamma[i].distance(&b.gamma[i]));
    }
    d
}

fn level_set_residual(z1: &CotangentState, z2: &CotangentState, basis: &[LeftAlgebraElement]) -> f64 {
    let (m1, m2) = (jl(z1), jl(z2));
    basis.iter().map(|f| (jl_eval(&m1, f) - jl_eval(&m2, f)).abs()).fold(0.0, f64::max)
}

/// Recover `(psi, b)` with `coact_right(z1, (psi, b)) = z2` from two states in
/// the same `J_L` level set.
pub fn reconstruct_right(z1: &CotangentState, z2: &CotangentState) -> Result<RightTransformer> {
    let tol = 1e-6;
    if z1.n() != z2.n() || z1.d() != z2.d() || z1.group != z2.group || z1.source.kind() != z2.source.kind() {
        return Err(Error::ShapeMismatch("states live on different discretizations".into()));
    }
    let n = z1.n();
    let psi = if z1.source.is_grid() {
        match_parameterizations(z1, z2)?
    } else {
        let dist = (0..n).map(|i| z1.ambient.distance(&z1.point(i), &z2.point(i))).fold(0.0, f64::max);
        if dist > tol {
            return Err(Error::ImagesDiffer { distance: dist });
        }
        GridDiffeo { values: z1.source.nodes().to_vec(), jacobian: vec![1.0; n] }
    };
    let basis = left_basis(&z1.ambient, z1.group, 3);
    let scale = basis.iter().map(|f| jl_eval(&jl(z1), f).abs()).fold(1.0, f64::max);
    let res = level_set_residual(z1, z2, &basis);
    if res > tol * scale {
        return Err(Error::NotInLevelSet { residual: res });
    }
    let g1 = if z1.source.is_grid() { z1.source.resample_group(z1.group, &z1.gamma, &psi)? } else { z1.gamma.clone() };
    let b = g1.iter().zip(&z2.gamma).map(|(a, c)| a.inverse() * *c).collect();
    let t = RightTransformer { psi, b };
    let back = coact_right(z1, &t)?;
    let miss = state_distance(&back, z2);
    if miss > tol * (1.0 + z2.p.amax()) {
        return Err(Error::NotInLevelSet { residual: miss });
    }
    Ok(t)
}

fn match_parameterizations(z1: &CotangentState, z2: &CotangentState) -> Result<GridDiffeo> {
    let torus = z1.ambient.is_torus();
    let comps: Vec<Vec<f64>> = (0..z1.d()).map(|j| z1.q.column(j).iter().copied().collect()).collect();
    let targets: Vec<Vec<f64>> = (0..z2.n()).map(|i| z2.point(i)).collect();
    match_curves(&z1.source, &comps, &vec![torus; z1.d()], &targets)
}

type CurveEval = Box<dyn Fn(f64) -> (f64, f64, f64)>;

/// Parameterization `psi` with `c1(psi(x_i)) = y_i`, where `c1` is the
/// spectral interpolant of the component samples `comps` (angle-valued where
/// `periodic`). Newton on the squared distance, started at the nearest node.
pub(crate) fn match_curves(source: &SourceManifold, comps: &[Vec<f64>], periodic: &[bool], targets: &[Vec<f64>]) -> Result<GridDiffeo> {
    let curves = comps
        .iter()
        .zip(periodic)
        .map(|(c, &per)| -> Result<CurveEval> {
            if per {
                let f = source.lifted_interpolant(c)?;
                Ok(Box::new(move |s| f.eval(s)))
            } else {
                let f = source.interpolant(c)?;
                Ok(Box::new(move |s| f.eval(s)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let eval = |s: f64| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let mut v = DVector::zeros(curves.len());
        let mut d1 = v.clone();
        let mut d2 = v.clone();
        for (j, c) in curves.iter().enumerate() {
            let (a, b, e) = c(s);
            v[j] = a;
            d1[j] = b;
            d2[j] = e;
        }
        (v, d1, d2)
    };
    let residual = |q: &DVector<f64>, y: &[f64]| -> DVector<f64> {
        DVector::from_iterator(q.len(), q.iter().zip(y).zip(periodic).map(|((a, b), &per)| if per { wrap_angle(a - b) } else { a - b }))
    };
    let nodes = source.nodes();
    let n = source.len();
    if targets.len() != n {
        return Err(Error::ShapeMismatch(format!("expected {n} target points, got {}", targets.len())));
    }
    let at_nodes: Vec<DVector<f64>> = (0..n).map(|k| DVector::from_fn(comps.len(), |j, _| comps[j][k])).collect();
    let mut raw = Vec::with_capacity(n);
    for y in targets {
        let start = (0..n)
            .min_by(|&a, &b| residual(&at_nodes[a], y).norm().total_cmp(&residual(&at_nodes[b], y).norm()))
            .expect("nonempty grid");
        let mut s = nodes[start];
        let mut converged = false;
        for _ in 0..60 {
            let (q, d1, d2) = eval(s);
            let r = residual(&q, y);
            let hess = d1.norm_squared() + r.dot(&d2);
            if hess <= 0.0 {
                break;
            }
            let step = r.dot(&d1) / hess;
            s -= step;
            if step.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        let dist = residual(&eval(s).0, y).norm();
        if !converged || dist > 1e-8 {
            return Err(Error::ImagesDiffer { distance: dist });
        }
        raw.push(s);
    }
    let mut values = Vec::with_capacity(n);
    values.push(wrap_angle(raw[0]));
    for i in 1..n {
        let prev = values[i - 1];
        values.push(prev + wrap_angle(raw[i] - prev));
    }
    GridDiffeo::from_samples(source, values)
}
