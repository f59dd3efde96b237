//! Embedded loops in `T*M x o*` with a gauge frame, the volume-preserving
//! right action and the two momentum maps.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::observable::{trivialized_hvf, Observable, PhasePoint};
use crate::basis::{AmbientKind, RightAlgebraElement};
use crate::error::{Error, Result};
use crate::grid::GridDiffeo;
use crate::lie::{wrap_angle, AlgebraElement, CoalgebraElement};
use crate::momentum::{self, RightMomentum};
use crate::phase::{CotangentState, DEFAULT_EPS_EMB};
use crate::transform::{self, RightTransformer};

/// Maximum `|psi' - 1|` accepted for a volume-preserving diffeomorphism.
pub const VOLUME_TOL: f64 = 1e-6;

/// Grid state on the torus whose image `eta = (Q, P, sigma)` embeds the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct VolState {
    pub z: CotangentState,
}

impl Deref for VolState {
    type Target = CotangentState;
    fn deref(&self) -> &CotangentState {
        &self.z
    }
}

impl VolState {
    pub fn new(z: CotangentState) -> Result<Self> {
        Self::with_tolerance(z, DEFAULT_EPS_EMB)
    }

    pub fn with_tolerance(z: CotangentState, eps_emb: f64) -> Result<Self> {
        if !z.source.is_grid() {
            return Err(Error::PointCloudHasNoDerivative);
        }
        if z.ambient.kind != AmbientKind::Torus {
            return Err(Error::InvalidInput("the volume-preserving pair lives on the flat torus".into()));
        }
        let s = Self { z };
        let ratio = s.embedding_separation();
        if ratio < eps_emb {
            return Err(Error::InvalidInput(format!("image of (Q, P, sigma) is not embedded: separation ratio {ratio:e}")));
        }
        Ok(s)
    }

    pub fn phase_point(&self, i: usize) -> PhasePoint {
        PhasePoint { q: self.q.row(i).transpose(), p: self.z.momentum(i), sigma: self.sigma[i], g: self.gamma[i] }
    }

    pub fn set_phase_point(&mut self, i: usize, pt: &PhasePoint) {
        self.z.q.set_row(i, &pt.q.transpose());
        self.z.p.set_row(i, &pt.p.transpose());
        self.z.sigma[i] = pt.sigma;
        self.z.gamma[i] = pt.g;
    }

    /// `min_{i != j} |eta_i - eta_j| / |x_i - x_j|`.
    pub fn embedding_separation(&self) -> f64 {
        let n = self.n();
        let nodes = self.source.nodes();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut d2 = 0.0;
                for k in 0..self.d() {
                    let dq = wrap_angle(self.q[(i, k)] - self.q[(j, k)]);
                    let dp = self.p[(i, k)] - self.p[(j, k)];
                    d2 += dq * dq + dp * dp;
                }
                d2 += (self.sigma[i] - self.sigma[j]).norm_squared();
                best = best.min(d2.sqrt() / wrap_angle(nodes[i] - nodes[j]).abs());
            }
        }
        best
    }
}

/// Largest deviation of `psi'` from one.
pub fn volume_deviation(psi: &GridDiffeo) -> f64 {
    psi.jacobian.iter().map(|j| (j - 1.0).abs()).fold(0.0, f64::max)
}

/// `(Q, P, sigma, gamma) -> (Q o psi, P o psi, sigma o psi, (gamma o psi) b)` for volume-preserving `psi`.
pub fn vol_act_right(z: &VolState, t: &RightTransformer) -> Result<VolState> {
    let deviation = volume_deviation(&t.psi);
    if deviation > VOLUME_TOL {
        return Err(Error::NotVolumePreserving { deviation });
    }
    act_without_density(z, t)
}

/// Composition with `psi` and right translation by `b`, ignoring `psi'`.
pub fn act_without_density(z: &VolState, t: &RightTransformer) -> Result<VolState> {
    let mut out = transform::act_right(&z.z, t)?;
    let mut p = DMatrix::zeros(z.n(), z.d());
    for j in 0..z.d() {
        let col: Vec<f64> = z.p.column(j).iter().copied().collect();
        p.set_column(j, &DVector::from_vec(z.source.resample(&col, &t.psi)?));
    }
    out.p = p;
    let mut sig = vec![CoalgebraElement::zero(); z.n()];
    for a in 0..z.m() {
        let col: Vec<f64> = z.sigma.iter().map(|s| s.0[a]).collect();
        for (s, v) in sig.iter_mut().zip(z.source.resample(&col, &t.psi)?) {
            s.0[a] = v;
        }
    }
    out.sigma = sig;
    Ok(VolState { z: out })
}

/// `int_S omega(eta(x))(t1(x), t2(x))` over the loop.
pub fn omega_bar(z: &VolState, t1: &DVector<f64>, t2: &DVector<f64>) -> f64 {
    z.omega(t1, t2)
}

/// `J_L^vol(z)(h) = int h(Q, P, sigma)`.
pub fn jl_vol(z: &VolState, h: &Observable) -> f64 {
    let w = z.source.weights();
    (0..z.n()).map(|i| w[i] * h.value(&z.phase_point(i))).sum()
}

/// `J_R^vol`, compared through `int alpha` and the charge field.
pub fn jr_vol(z: &VolState) -> Result<RightMomentum> {
    momentum::jr(&z.z)
}

/// Derivative of `J_R^vol` along a chart tangent using the variation formula
/// of the log-derivative, `delta(delta^r gamma) = D j + [j, delta^r gamma]`.
pub fn d_jr_vol(z: &VolState, t: &DVector<f64>) -> Result<RightMomentum> {
    let l = z.layout();
    let n = z.n();
    let group = z.group;
    let j: Vec<AlgebraElement> = (0..n).map(|i| l.get_eta(t, i)).collect();
    let dq = z.dq()?;
    let lr = z.logderiv()?;
    let vq = DMatrix::from_fn(n, l.d, |i, k| t[l.q(i, k)]);
    let dvq = z.d_field(&vq)?;
    let dj = z.source.derivative_algebra(&j)?;
    let mut alpha = Vec::with_capacity(n);
    let mut nu = Vec::with_capacity(n);
    for i in 0..n {
        let ds = group.coad(&j[i], &z.sigma[i]) + l.get_s(t, i);
        let dp = DVector::from_fn(l.d, |k, _| t[l.p(i, k)]);
        alpha.push(dp.dot(&dq.row(i).transpose()) + z.p.row(i).dot(&dvq.row(i)) + ds.pair(&lr[i]) + z.sigma[i].pair(&dj[i]));
        nu.push(group.co_adjoint(&z.gamma[i], &ds));
    }
    Ok(RightMomentum { alpha: Some(alpha), nu })
}

/// Nodewise Hamiltonian field of `h`, as a chart tangent.
pub fn chromo_generator(h: &Observable, z: &VolState) -> DVector<f64> {
    let l = z.layout();
    let mut t = DVector::zeros(l.dim());
    for i in 0..z.n() {
        let v = trivialized_hvf(h, &z.phase_point(i));
        for k in 0..l.d {
            t[l.q(i, k)] = v.dq[k];
            t[l.p(i, k)] = v.dp[k];
        }
        l.set_eta(&mut t, i, &v.xi);
        l.set_s(&mut t, i, &v.dsigma);
    }
    t
}

/// Generator of the volume-preserving right action: `v` must be constant.
pub fn vol_generator_right(elem: &RightAlgebraElement, z: &VolState) -> Result<DVector<f64>> {
    if elem.v.iter().any(|x| (x - elem.v[0]).abs() > 1e-12) {
        return Err(Error::NotVolumePreserving { deviation: elem.v.iter().map(|x| (x - elem.v[0]).abs()).fold(0.0, f64::max) });
    }
    transform::cotangent_generator_right(elem, &z.z)
}

/// Columns are chromomorphism generators of the given observables.
pub fn chromo_generators(z: &VolState, basis: &[Observable]) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = basis.par_iter().map(|h| chromo_generator(h, z)).collect();
    DMatrix::from_columns(&cols)
}

pub fn vol_right_generators(z: &VolState, basis: &[RightAlgebraElement]) -> Result<DMatrix<f64>> {
    let cols = basis.iter().map(|e| vol_generator_right(e, z)).collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::right_basis_vol;
    use crate::dualpair::orthogonality_residual;
    use crate::lie::StructureGroup;
    use crate::samples;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vol_state(rng: &mut ChaCha8Rng, n: usize, dim: usize, group: StructureGroup) -> VolState {
        VolState::new(samples::band_limited_grid_state(rng, n, dim, group)).unwrap()
    }

    #[test]
    fn rejects_non_embedded_and_non_volume_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mut z = samples::band_limited_grid_state(&mut rng, 16, 1, StructureGroup::Circle);
        let pc = samples::point_cloud_state(&mut rng, 4, crate::basis::AmbientManifold::torus(1), StructureGroup::Circle);
        assert!(matches!(VolState::new(pc), Err(Error::PointCloudHasNoDerivative)));
        // fold the loop onto itself
        for i in 0..16 {
            let x = z.source.nodes()[i];
            z.q[(i, 0)] = x.sin();
            z.p[(i, 0)] = 1.0;
            z.sigma[i] = CoalgebraElement::scalar(1.0);
        }
        assert!(VolState::new(z.clone()).is_err());
        let v = vol_state(&mut rng, 16, 1, StructureGroup::Circle);
        let t = RightTransformer { psi: samples::smooth_diffeo(&mut rng, &v.source, 0.2), b: vec![StructureGroup::Circle.identity(); 16] };
        assert!(matches!(vol_act_right(&v, &t), Err(Error::NotVolumePreserving { .. })));
    }

    #[test]
    fn jl_vol_is_invariant_under_volume_preserving_transformers() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = vol_state(&mut rng, 32, 2, group);
            let t = RightTransformer { psi: GridDiffeo::shift(&z.source, rng.random_range(-3.0..3.0)), b: samples::smooth_gauge(&mut rng, &z.source, group, 0.5) };
            let z2 = vol_act_right(&z, &t).unwrap();
            for h in Observable::basis(2, group, 1, 2) {
                let (a, b) = (jl_vol(&z, &h), jl_vol(&z2, &h));
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn d_jr_vol_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let h = 1e-5;
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = vol_state(&mut rng, 32, 2, group);
            for _ in 0..5 {
                let t = samples::smooth_tangent(&mut rng, &z.source, &z.layout());
                let an = d_jr_vol(&z, &t).unwrap();
                let exact = momentum::jr_tangent(&z.z, &t).unwrap();
                let (p, m) = (jr_vol(&VolState { z: z.retract(&t, h) }).unwrap(), jr_vol(&VolState { z: z.retract(&t, -h) }).unwrap());
                let a = an.alpha.as_ref().unwrap();
                let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                for i in 0..z.n() {
                    let fd = (p.alpha.as_ref().unwrap()[i] - m.alpha.as_ref().unwrap()[i]) / (2.0 * h);
                    assert!((fd - a[i]).abs() < 1e-6 * scale, "{group}: {fd} {}", a[i]);
                    assert!((exact.alpha.as_ref().unwrap()[i] - a[i]).abs() < 1e-10 * scale);
                    let fdn = (p.nu[i] - m.nu[i]) * (0.5 / h);
                    assert!((fdn - an.nu[i]).norm() < 1e-6 * an.nu[i].norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn generator_families_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            for dim in [1, 2] {
                let z = vol_state(&mut rng, 32, dim, group);
                let a = chromo_generators(&z, &Observable::basis(dim, group, 1, 2));
                let b = vol_right_generators(&z, &right_basis_vol(&z.source, group, 4)).unwrap();
                let r = orthogonality_residual(&z.z, &a, &b);
                assert!(r < 1e-10, "{group} d={dim}: {r}");
            }
        }
    }

    #[test]
    fn right_momentum_is_hamiltonian_for_right_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = vol_state(&mut rng, 32, 2, group);
            let w = z.source.weights().to_vec();
            for e in right_basis_vol(&z.source, group, 2) {
                let x = vol_generator_right(&e, &z).unwrap();
                let t = samples::smooth_tangent(&mut rng, &z.source, &z.layout());
                let dj = d_jr_vol(&z, &t).unwrap().pair(&w, &e);
                assert!((z.omega(&x, &t) - dj).abs() < 1e-9 * dj.abs().max(1.0));
            }
        }
    }

    #[test]
    fn chromo_generators_lie_in_kernel_of_right_momentum() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = vol_state(&mut rng, 32, 2, group);
            let w = z.source.weights().to_vec();
            for h in Observable::basis(2, group, 1, 1) {
                let d = d_jr_vol(&z, &chromo_generator(&h, &z)).unwrap();
                let mean = d.alpha_mean(&w).unwrap();
                assert!(mean.abs() < 1e-10, "{mean}");
                assert!(d.nu.iter().all(|v| v.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn omega_bar_and_jl_vol_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let z = vol_state(&mut rng, 16, 2, StructureGroup::Rotation3);
        let (a, b) = (samples::random_tangent(&mut rng, &z.layout()), samples::random_tangent(&mut rng, &z.layout()));
        assert!((omega_bar(&z, &a, &b) + omega_bar(&z, &b, &a)).abs() < 1e-14);
        assert_eq!(omega_bar(&z, &a, &DVector::zeros(a.len())), 0.0);
        let rep = crate::dualpair::validate_chart(&mut rng, &z.z, 5);
        assert!(rep.max_rel_err < 1e-5, "{rep:?}");
        let total = jl_vol(&z, &Observable::constant(2, z.group, 1.0));
        assert!((total - z.source.total_volume()).abs() < 1e-13);
        let c = [0.4, -0.9];
        let lin = jl_vol(&z, &Observable::linear_momentum(z.group, &c));
        let direct: f64 = (0..z.n()).map(|i| z.source.weights()[i] * (c[0] * z.p[(i, 0)] + c[1] * z.p[(i, 1)])).sum();
        assert!((lin - direct).abs() < 1e-13);
    }

    #[test]
    fn chromo_generator_is_the_flow_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let eps = 1e-5;
        for group in [StructureGroup::Circle, StructureGroup::Rotation3] {
            let z = vol_state(&mut rng, 16, 2, group);
            let h = Observable::random(&mut rng, 2, group, 0.5);
            let gen = chromo_generator(&h, &z);
            let plus = crate::yangmills::HamiltonianFlow::with_steps(h.clone(), eps, 1).apply_state(&z).unwrap();
            let minus = crate::yangmills::HamiltonianFlow::with_steps(h.clone(), -eps, 1).apply_state(&z).unwrap();
            let fd = minus.chart_difference(&plus.z).unwrap() / (2.0 * eps);
            assert!((&fd - &gen).norm() < 1e-6 * gen.norm(), "{group}");
            assert_eq!(chromo_generator(&Observable::constant(2, group, 3.0), &z).norm(), 0.0);
        }
    }
}
