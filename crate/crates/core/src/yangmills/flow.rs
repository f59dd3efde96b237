//! Time-`t` maps of observables and the cocycle `B` of the prequantum extension.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::{left_jacobian_block, point_omega, retract_point, trivialized_hvf, Observable, PhasePoint, PointTangent};
use super::state::{jr_vol, VolState};
use crate::error::{Error, Result};
use crate::grid::gauss_legendre;
use crate::lie::{AlgebraElement, GroupElement, StructureGroup};

pub const FLOW_FIXED_POINT_TOL: f64 = 1e-14;
pub const FLOW_MAX_ITERS: usize = 100;

/// Time-`time` map of the Hamiltonian field of `observable`, computed with a
/// fixed number of fourth-order composition steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFlow {
    pub observable: Observable,
    pub time: f64,
    pub steps: usize,
}

fn midpoint_exp_step(h: &Observable, pt: &PhasePoint, dt: f64) -> Result<PhasePoint> {
    let group = h.group;
    let mut next = pt.clone();
    let mut update = f64::INFINITY;
    for _ in 0..FLOW_MAX_ITERS {
        let mid = PhasePoint { q: (&pt.q + &next.q) * 0.5, p: (&pt.p + &next.p) * 0.5, sigma: (pt.sigma + next.sigma) * 0.5, g: pt.g };
        let v = trivialized_hvf(h, &mid);
        let rot = group.exp(&(v.xi * dt));
        let cand = PhasePoint { q: &pt.q + v.dq * dt, p: &pt.p + v.dp * dt, sigma: group.co_adjoint(&rot.inverse(), &pt.sigma), g: rot * pt.g };
        update = (&cand.q - &next.q).amax().max((&cand.p - &next.p).amax()).max((cand.sigma - next.sigma).0.amax());
        let scale = 1.0 + cand.q.amax().max(cand.p.amax()).max(cand.sigma.0.amax());
        next = cand;
        if update <= FLOW_FIXED_POINT_TOL * scale {
            return Ok(next);
        }
    }
    Err(Error::NoConvergence { iterations: FLOW_MAX_ITERS, update })
}

impl HamiltonianFlow {
    pub fn new(observable: Observable, time: f64) -> Self {
        let steps = ((time.abs() / 0.02).ceil() as usize).max(1);
        Self { observable, time, steps }
    }

    pub fn with_steps(observable: Observable, time: f64, steps: usize) -> Self {
        Self { observable, time, steps: steps.max(1) }
    }

    pub fn identity(dim: usize, group: StructureGroup) -> Self {
        Self { observable: Observable::zero(dim, group), time: 0.0, steps: 1 }
    }

    pub fn is_identity(&self) -> bool {
        self.time == 0.0 || self.observable.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn apply(&self, pt: &PhasePoint) -> Result<PhasePoint> {
        if self.is_identity() {
            return Ok(pt.clone());
        }
        if !self.time.is_finite() {
            return Err(Error::InvalidInput(format!("flow time must be finite, got {}", self.time)));
        }
        let c = 2f64.powf(1.0 / 3.0);
        let w1 = 1.0 / (2.0 - c);
        let w0 = -c / (2.0 - c);
        let dt = self.time / self.steps as f64;
        let mut x = pt.clone();
        for _ in 0..self.steps {
            x = midpoint_exp_step(&self.observable, &x, w1 * dt)?;
            x = midpoint_exp_step(&self.observable, &x, w0 * dt)?;
            x = midpoint_exp_step(&self.observable, &x, w1 * dt)?;
        }
        Ok(x)
    }

    /// Pushforward of a tangent by central differences of the flow.
    pub fn push_tangent(&self, pt: &PhasePoint, v: &PointTangent, eps: f64) -> Result<PointTangent> {
        let group = self.observable.group;
        let a = self.apply(&retract_point(group, pt, v, eps))?;
        let b = self.apply(&retract_point(group, pt, v, -eps))?;
        let s = 0.5 / eps;
        Ok(PointTangent { dq: (a.q - b.q) * s, dp: (a.p - b.p) * s, xi: group.log(&(a.g * b.g.inverse()))? * s, dsigma: (a.sigma - b.sigma) * s })
    }

    /// `|omega(phi_* a, phi_* b) - omega(a, b)|` relative to `|a| |b|`.
    pub fn symplecticity_defect(&self, pt: &PhasePoint, a: &PointTangent, b: &PointTangent) -> Result<f64> {
        let group = self.observable.group;
        let eps = 1e-5;
        let img = self.apply(pt)?;
        let (pa, pb) = (self.push_tangent(pt, a, eps)?, self.push_tangent(pt, b, eps)?);
        let before = point_omega(group, pt, a, b);
        let after = point_omega(group, &img, &pa, &pb);
        let norm = |t: &PointTangent| (t.dq.norm_squared() + t.dp.norm_squared() + t.xi.norm_squared() + t.dsigma.norm_squared()).sqrt();
        Ok((after - before).abs() / (norm(a) * norm(b)).max(f64::MIN_POSITIVE))
    }

    /// Nodewise application to a loop.
    pub fn apply_state(&self, z: &VolState) -> Result<VolState> {
        let pts = (0..z.n()).into_par_iter().map(|i| self.apply(&z.phase_point(i))).collect::<Result<Vec<_>>>()?;
        let mut out = z.clone();
        for (i, pt) in pts.iter().enumerate() {
            out.set_phase_point(i, pt);
        }
        Ok(out)
    }
}

/// Conservation of `J_R^vol` along a chromomorphism flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherReport {
    pub times: Vec<f64>,
    /// `|int alpha(t) - int alpha(0)|`.
    pub alpha_drift: Vec<f64>,
    /// `max_x |nu(t) - nu(0)|`.
    pub charge_drift: Vec<f64>,
    pub max_drift: f64,
}

/// Flow `z` by the chromomorphism of `h` up to `time` with steps `dt`,
/// recording the drift of `J_R^vol` every `stride` steps.
pub fn chromo_noether(z: &VolState, h: &Observable, time: f64, dt: f64, stride: usize) -> Result<(VolState, NoetherReport)> {
    if !(dt > 0.0) || !dt.is_finite() || !(time >= 0.0) {
        return Err(Error::InvalidInput(format!("need dt > 0 and time >= 0, got dt={dt}, time={time}")));
    }
    let steps = (time / dt).round() as usize;
    let stride = stride.max(1);
    let w = z.source.weights().to_vec();
    let j0 = jr_vol(z)?;
    let a0 = j0.alpha_mean(&w).unwrap_or(0.0);
    let flow = HamiltonianFlow::with_steps(h.clone(), dt, 1);
    let mut report = NoetherReport { times: vec![0.0], alpha_drift: vec![0.0], charge_drift: vec![0.0], max_drift: 0.0 };
    let mut cur = z.clone();
    for k in 1..=steps {
        cur = flow.apply_state(&cur)?;
        if k % stride == 0 || k == steps {
            let j = jr_vol(&cur)?;
            let da = (j.alpha_mean(&w).unwrap_or(0.0) - a0).abs();
            let dn = j.nu_distance(&j0);
            report.times.push(k as f64 * dt);
            report.alpha_drift.push(da);
            report.charge_drift.push(dn);
            report.max_drift = report.max_drift.max(da).max(dn);
        }
    }
    Ok((cur, report))
}

/// Composition `f_1 o f_2 o ... o f_k` (the last flow is applied first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowChain {
    pub flows: Vec<HamiltonianFlow>,
}

impl FlowChain {
    pub fn single(f: HamiltonianFlow) -> Self {
        Self { flows: vec![f] }
    }

    pub fn identity() -> Self {
        Self { flows: Vec::new() }
    }

    /// `self o other`.
    pub fn compose(&self, other: &FlowChain) -> Self {
        Self { flows: self.flows.iter().chain(other.flows.iter()).cloned().collect() }
    }

    pub fn apply(&self, pt: &PhasePoint) -> Result<PhasePoint> {
        let mut x = pt.clone();
        for f in self.flows.iter().rev() {
            x = f.apply(&x)?;
        }
        Ok(x)
    }

    pub fn is_identity(&self) -> bool {
        self.flows.iter().all(HamiltonianFlow::is_identity)
    }
}

/// Chart `(q, p, x, sigma)` with `g = exp(x) g_ref`, in which the canonical
/// one-form reads `theta(v) = p . v_q + <sigma, J_l(x) v_x>`.
#[derive(Debug, Clone, Copy)]
pub struct CocycleChart {
    pub group: StructureGroup,
    pub dim: usize,
    pub reference: GroupElement,
}

impl CocycleChart {
    fn len(&self) -> usize {
        2 * self.dim + 2 * self.group.dim()
    }

    pub fn coords(&self, pt: &PhasePoint) -> Result<DVector<f64>> {
        let (d, m) = (self.dim, self.group.dim());
        let x = self.group.log(&(pt.g * self.reference.inverse()))?;
        let mut v = DVector::zeros(self.len());
        v.rows_mut(0, d).copy_from(&pt.q);
        v.rows_mut(d, d).copy_from(&pt.p);
        v.rows_mut(2 * d, m).copy_from_slice(x.coords(m));
        v.rows_mut(2 * d + m, m).copy_from_slice(pt.sigma.coords(m));
        Ok(v)
    }

    pub fn point(&self, c: &DVector<f64>) -> PhasePoint {
        let (d, m) = (self.dim, self.group.dim());
        let x = AlgebraElement::from_coords(c.rows(2 * d, m).as_slice());
        PhasePoint {
            q: c.rows(0, d).into_owned(),
            p: c.rows(d, d).into_owned(),
            sigma: crate::lie::CoalgebraElement::from_coords(c.rows(2 * d + m, m).as_slice()),
            g: self.group.exp(&x) * self.reference,
        }
    }

    pub fn theta(&self, c: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let (d, m) = (self.dim, self.group.dim());
        let x = AlgebraElement::from_coords(c.rows(2 * d, m).as_slice());
        let jv = left_jacobian_block(self.group, &x) * v.rows(2 * d, m);
        c.rows(d, d).dot(&v.rows(0, d)) + c.rows(2 * d + m, m).dot(&jv)
    }
}

/// Tolerances for the adaptive Gauss-Legendre quadrature of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub tolerance: f64,
    pub max_panels: usize,
    pub order: usize,
    pub fd_step: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_panels: 16, order: 8, fd_step: 1e-6 }
    }
}

/// `int_c (theta - f^* theta)` along the straight chart path from `a` to `b`.
pub fn path_integral(f: &FlowChain, a: &PhasePoint, b: &PhasePoint, opts: &QuadratureOptions) -> Result<f64> {
    if f.is_identity() {
        return Ok(0.0);
    }
    let group = match a.g {
        GroupElement::Circle(_) => StructureGroup::Circle,
        GroupElement::Rotation(_) => StructureGroup::Rotation3,
    };
    let chart = CocycleChart { group, dim: a.q.len(), reference: a.g };
    let ca = chart.coords(a)?;
    let cb = chart.coords(b)?;
    let dir = &cb - &ca;
    let integrand = |s: f64| -> Result<f64> {
        let c = &ca + &dir * s;
        let h = opts.fd_step;
        let img = f.apply(&chart.point(&c))?;
        let plus = chart.coords(&f.apply(&chart.point(&(&c + &dir * h)))?)?;
        let minus = chart.coords(&f.apply(&chart.point(&(&c - &dir * h)))?)?;
        let mut dimg = (plus - minus) / (2.0 * h);
        // the circle chart is an unreduced angle; undo jumps by whole turns
        if group == StructureGroup::Circle {
            let k = 2 * chart.dim;
            dimg[k] -= (dimg[k] * 2.0 * h / std::f64::consts::TAU).round() * std::f64::consts::TAU / (2.0 * h);
        }
        Ok(chart.theta(&c, &dir) - chart.theta(&chart.coords(&img)?, &dimg))
    };
    let quad = |panels: usize| -> Result<f64> {
        let nodes = gauss_legendre(0.0, 1.0, opts.order, panels);
        let vals = nodes.par_iter().map(|(s, _)| integrand(*s)).collect::<Result<Vec<_>>>()?;
        Ok(nodes.iter().zip(vals).map(|((_, w), v)| w * v).sum())
    };
    let mut panels = 1;
    let mut prev = quad(panels)?;
    let mut difference = f64::INFINITY;
    while panels < opts.max_panels {
        panels *= 2;
        let cur = quad(panels)?;
        difference = (cur - prev).abs();
        if difference <= opts.tolerance * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged { difference })
}

/// `B(f1, f2)(p0) = int_{p0}^{f2(p0)} (theta - f1^* theta)` along the straight chart path.
pub fn cocycle_b(f1: &FlowChain, f2: &FlowChain, p0: &PhasePoint, opts: &QuadratureOptions) -> Result<f64> {
    let p1 = f2.apply(p0)?;
    path_integral(f1, p0, &p1, opts)
}

/// `B(g, h) + B(gh, k) - B(h, k) - B(g, hk)` at `p0`.
pub fn cocycle_identity_residual(g: &FlowChain, h: &FlowChain, k: &FlowChain, p0: &PhasePoint, opts: &QuadratureOptions) -> Result<f64> {
    let gh = g.compose(h);
    let hk = h.compose(k);
    Ok(cocycle_b(g, h, p0, opts)? + cocycle_b(&gh, k, p0, opts)? - cocycle_b(h, k, p0, opts)? - cocycle_b(g, &hk, p0, opts)?)
}

/// `B_{p1}(g, h) - B_{p0}(g, h) - (c(gh) - c(g) - c(h))` with `c(f) = int_{p0}^{p1} (theta - f^* theta)`.
pub fn base_point_residual(g: &FlowChain, h: &FlowChain, p0: &PhasePoint, p1: &PhasePoint, opts: &QuadratureOptions) -> Result<f64> {
    let lhs = cocycle_b(g, h, p1, opts)? - cocycle_b(g, h, p0, opts)?;
    let c = |f: &FlowChain| path_integral(f, p0, p1, opts);
    let gh = g.compose(h);
    Ok(lhs - (c(&gh)? - c(g)? - c(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn near_point(rng: &mut ChaCha8Rng, group: StructureGroup) -> PhasePoint {
        let mut pt = PhasePoint::random(rng, 2, group);
        pt.g = group.exp(&group.random_algebra(rng, 0.3));
        pt
    }

    fn random_chain(rng: &mut ChaCha8Rng, group: StructureGroup) -> FlowChain {
        FlowChain::single(HamiltonianFlow::new(Observable::random(rng, 2, group, 0.15), 1.0))
    }

    #[test]
    fn flow_conserves_its_observable_and_charge() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let h = Observable::random(&mut rng, 2, group, 0.3);
            let pt = PhasePoint::random(&mut rng, 2, group);
            let f = HamiltonianFlow::new(h.clone(), 1.0);
            let out = f.apply(&pt).unwrap();
            let drift = (h.value(&out) - h.value(&pt)).abs();
            assert!(drift < 1e-8, "{group}: {drift}");
            assert!((group.co_adjoint(&out.g, &out.sigma) - group.co_adjoint(&pt.g, &pt.sigma)).norm() < 1e-13);
            let back = HamiltonianFlow::new(h, -1.0).apply(&out).unwrap();
            assert!((&back.q - &pt.q).norm() + (&back.p - &pt.p).norm() + (back.sigma - pt.sigma).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_charge_flow_is_a_rotation() {
        let group = StructureGroup::Rotation3;
        let xi = AlgebraElement::new(0.3, -0.2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let pt = PhasePoint::random(&mut rng, 1, group);
        let out = HamiltonianFlow::new(Observable::linear_charge(1, group, &xi), 0.7).apply(&pt).unwrap();
        assert!(out.g.distance(&(group.exp(&(xi * 0.7)) * pt.g)) < 1e-13);
        let flow_back = HamiltonianFlow::new(Observable::linear_momentum(group, &[1.5]), 2.0).apply(&pt).unwrap();
        assert!((flow_back.q[0] - pt.q[0] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn b_vanishes_for_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let opts = QuadratureOptions::default();
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let p0 = near_point(&mut rng, group);
            let f = random_chain(&mut rng, group);
            assert_eq!(cocycle_b(&FlowChain::identity(), &f, &p0, &opts).unwrap(), 0.0);
            let id = FlowChain::single(HamiltonianFlow::identity(2, group));
            assert_eq!(cocycle_b(&id, &f, &p0, &opts).unwrap(), 0.0);
            assert!(cocycle_b(&f, &id, &p0, &opts).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn b_is_a_cocycle_and_base_point_changes_by_a_coboundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let opts = QuadratureOptions::default();
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let (g, h, k) = (random_chain(&mut rng, group), random_chain(&mut rng, group), random_chain(&mut rng, group));
            let p0 = near_point(&mut rng, group);
            let p1 = near_point(&mut rng, group);
            let r = cocycle_identity_residual(&g, &h, &k, &p0, &opts).unwrap();
            assert!(r.abs() < 1e-6, "{group}: {r}");
            let b = base_point_residual(&g, &h, &p0, &p1, &opts).unwrap();
            assert!(b.abs() < 1e-6, "{group}: {b}");
            assert!(cocycle_b(&g, &h, &p0, &opts).unwrap().abs() > 1e-6);
        }
    }

    #[test]
    fn flows_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let f = HamiltonianFlow::new(Observable::random(&mut rng, 2, group, 0.3), 1.0);
            let pt = PhasePoint::random(&mut rng, 2, group);
            let mut tangent = || PointTangent {
                dq: DVector::from_fn(2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)),
                dp: DVector::from_fn(2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)),
                xi: AlgebraElement::from_coords(&[0.3, -0.2, 0.1][..group.dim()]),
                dsigma: crate::lie::CoalgebraElement::from_coords(&[-0.4, 0.5, 0.2][..group.dim()]),
            };
            let (a, b) = (tangent(), tangent());
            let defect = f.symplecticity_defect(&pt, &a, &b).unwrap();
            assert!(defect < 1e-6, "{group}: {defect}");
        }
    }

    #[test]
    fn right_momentum_is_conserved_along_chromomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = VolState::new(crate::samples::band_limited_grid_state(&mut rng, 32, 2, group)).unwrap();
            let basis = Observable::basis(2, group, 1, 1);
            let h = basis[rand::Rng::random_range(&mut rng, 0..basis.len())].scaled(0.25);
            let (end, rep) = chromo_noether(&z, &h, 0.5, 1e-2, 5).unwrap();
            assert!(rep.max_drift < 1e-6, "{group}: {}", rep.max_drift);
            assert!(end.z.chart_difference(&z.z).unwrap().norm() > 1e-6);
            assert!(chromo_noether(&z, &h, 1.0, 0.0, 1).is_err());
        }
    }
}
