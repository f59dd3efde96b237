//! Acceptance criteria. Prints one PASS/FAIL line per criterion and fails if any is red.
//!
//! Run with `cargo test -p epaut-core --test acceptance`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use epaut_core::basis::{left_basis, right_basis, right_basis_vol};
use epaut_core::dualpair::{
    isotropy_witness, kernel_vs_orbit, left_generators, orthogonality_residual, random_conormal_target, reconstruct_right, right_generators,
    transitivity_defect,
};
use epaut_core::lie::wrap_angle;
use epaut_core::momentum::{djl, djr, jl, jl_eval, jr};
use epaut_core::peakon::{collective_hamiltonian, integrate, peakon_ensemble, weak_consistency, Kernels, Scheme};
use epaut_core::samples;
use epaut_core::transform::coact_right;
use epaut_core::yangmills::observable::left_jacobian_block;
use epaut_core::yangmills::state::act_without_density;
use epaut_core::yangmills::{
    chromo_generators, chromo_noether, cocycle_b, cocycle_identity_residual, base_point_residual, d_jr_vol, jl_vol, jr_vol, reconstruct_vol, rho,
    trivialized_hvf, vol_act_right, vol_right_generators, CanonicalPoint, FlowChain, HamiltonianFlow, Observable, PhasePoint, QuadratureOptions,
    VolState,
};
use epaut_core::{AlgebraElement, AmbientManifold, CoalgebraElement, CotangentState, Error, GridDiffeo, GroupElement, RightTransformer, StructureGroup};

const GROUPS: [StructureGroup; 2] = [StructureGroup::Circle, StructureGroup::Rotation3];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

// written straight to the process stdout so the lines survive test capture
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn run(id: usize, title: &str, budget_s: Option<f64>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f));
    let secs = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match res {
        Ok(o) => (o.passed, o.detail),
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    if let Some(b) = budget_s {
        if secs > b {
            passed = false;
            detail.push_str(&format!("; over the {b:.0} s budget"));
        }
    }
    emit(&format!("criterion {id:>2} {}  {title}: {detail} [{secs:.1} s]", if passed { "PASS" } else { "FAIL" }));
    passed
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

fn c1_orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    let mut dense_check = 0.0f64;
    for s in 0..20 {
        let group = GROUPS[s % 2];
        let d = 1 + (s / 2) % 2;
        let z = samples::band_limited_grid_state(&mut rng, 32, d, group);
        let a = left_generators(&z, &left_basis(&z.ambient, group, 8));
        let b = right_generators(&z, &right_basis(&z.source, group, 8)).unwrap();
        worst = worst.max(orthogonality_residual(&z, &a, &b));
        if s < 2 {
            // dense cross-check with the assembled form matrix
            let m = a.transpose() * z.omega_matrix() * &b;
            let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max) * b.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
            dense_check = dense_check.max(m.amax() / scale);
        }
    }
    outcome(worst < 1e-8 && dense_check < 1e-8, format!("max normalized |A^T Omega B| = {worst:.2e}, dense check {dense_check:.2e} (tol 1e-8)"))
}

fn c2_kernel_inclusion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut inclusion = 0.0f64;
    let mut monotone = true;
    let mut sweeps = Vec::new();
    for group in GROUPS {
        for d in [1, 2] {
            let z = samples::band_limited_grid_state(&mut rng, 32, d, group);
            let mut gaps_l = Vec::new();
            let mut gaps_r = Vec::new();
            for k in [4, 8, 12] {
                let lb = left_basis(&z.ambient, group, k);
                let rb = right_basis(&z.source, group, k);
                let l = kernel_vs_orbit(&z, &djl(&z, &lb), &right_generators(&z, &rb).unwrap()).unwrap();
                let r = kernel_vs_orbit(&z, &djr(&z, &rb).unwrap(), &left_generators(&z, &lb)).unwrap();
                inclusion = inclusion.max(l.inclusion_residual).max(r.inclusion_residual);
                gaps_l.push(l.gap);
                gaps_r.push(r.gap);
            }
            for g in [&gaps_l, &gaps_r] {
                monotone &= g.windows(2).all(|w| w[1] <= 1.1 * w[0] + 1e-12);
            }
            sweeps.push(format!("{group} d={d} L{:.2e}->{:.2e}->{:.2e} R{:.2e}->{:.2e}->{:.2e}", gaps_l[0], gaps_l[1], gaps_l[2], gaps_r[0], gaps_r[1], gaps_r[2]));
        }
    }
    outcome(inclusion < 1e-8 && monotone, format!("inclusion {inclusion:.2e} (tol 1e-8), gaps monotone={monotone}: {}", sweeps.join("; ")))
}

fn c3_necessity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut excess = Vec::new();
    let mut regular_excess = Vec::new();
    for group in GROUPS {
        let ambient = AmbientManifold::euclidean(2);
        let mut z = samples::point_cloud_state(&mut rng, 3, ambient, group);
        let lb = left_basis(&ambient, group, 4);
        let rb = right_basis(&z.source, group, 0);
        regular_excess.push(kernel_vs_orbit(&z, &djl(&z, &lb), &right_generators(&z, &rb).unwrap()).unwrap().excess);
        z.p.row_mut(1).fill(0.0);
        z.sigma[1] = CoalgebraElement::zero();
        excess.push(transitivity_defect(&djl(&z, &lb), &right_generators(&z, &rb).unwrap()).unwrap().excess);
    }
    let ok = excess.iter().all(|&e| e >= 1) && regular_excess.iter().all(|&e| e == 0);
    outcome(ok, format!("kernel excess with a zeroed node {excess:?} (need >= 1), regular {regular_excess:?}"))
}

fn c4_isotropy_witness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let (mut residual, mut split) = (0.0f64, 0.0f64);
    for s in 0..10 {
        let z = samples::grid_state(&mut rng, 64, AmbientManifold::euclidean(2), GROUPS[s % 2]);
        let t = random_conormal_target(&mut rng, &z).unwrap();
        let w = isotropy_witness(&z, &t).unwrap();
        residual = residual.max(w.residual);
        split = split.max(w.split_error);
    }
    outcome(residual < 1e-4 && split < 1e-3, format!("residual {residual:.2e} (tol 1e-4), fraction split error {split:.2e} (tol 1e-3)"))
}

fn c5_peakon_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let k = Kernels::peakon(1.0, 1.0);
    let group = StructureGroup::Rotation3;
    let z0 = peakon_ensemble(&mut rng, 5, group, 0.1);
    let traj = integrate(&z0, &k, 1e-3, 10_000, 100, Scheme::Composition4).unwrap();
    let h0 = collective_hamiltonian(&z0, &k);
    let charge0: Vec<CoalgebraElement> = (0..5).map(|i| group.co_adjoint(&z0.gamma[i], &z0.sigma[i])).collect();
    let (mut dh, mut dc, mut ds) = (0.0f64, 0.0f64, 0.0f64);
    for z in &traj.states {
        dh = dh.max(rel((collective_hamiltonian(z, &k) - h0).abs(), h0.abs()));
        for i in 0..5 {
            dc = dc.max((group.co_adjoint(&z.gamma[i], &z.sigma[i]) - charge0[i]).norm());
            ds = ds.max((z.sigma[i].norm() - z0.sigma[i].norm()).abs());
        }
    }
    let t_end = traj.diagnostics.last().map(|d| d.t).unwrap_or(0.0);
    let ok = dh < 1e-8 && dc < 1e-8 && ds < 1e-10 && (t_end - 10.0).abs() < 1e-9;
    outcome(ok, format!("t_end {t_end}, rel H drift {dh:.2e} (1e-8), charge drift {dc:.2e} (1e-8), |sigma| drift {ds:.2e} (1e-10)"))
}

fn c6_weak_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let k = Kernels::peakon(1.0, 1.0);
    let z0 = peakon_ensemble(&mut rng, 5, StructureGroup::Rotation3, 0.1);
    let tests = left_basis(&z0.ambient, z0.group, 3);
    let dts = [4e-3, 2e-3, 1e-3];
    let res: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let steps = (1.0 / dt as f64).round() as usize;
            let traj = integrate(&z0, &k, dt, steps, 1, Scheme::Midpoint).unwrap();
            weak_consistency(&traj, &k, &tests)
        })
        .collect();
    // least-squares slope of log r against log dt
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let ok = (1.7..=2.3).contains(&slope);
    outcome(ok, format!("residuals {:.2e}, {:.2e}, {:.2e}; order {slope:.3} (need [1.7, 2.3])", res[0], res[1], res[2]))
}

// central difference of a canonical Hamiltonian field pushed through rho
fn hvf_oracle(rng: &mut ChaCha8Rng, group: StructureGroup) -> f64 {
    let (d, m) = (2, group.dim());
    let h = Observable::random(rng, d, group, 0.5);
    let base = group.random_element(rng);
    let x = group.random_algebra(rng, 0.7);
    let mut c: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    c.extend_from_slice(x.coords(m));
    c.extend((0..d).map(|_| rng.random_range(-1.0..1.0)));
    c.extend((0..m).map(|_| rng.random_range(-1.0..1.0)));
    let c = DVector::from_vec(c);
    let point = |v: &DVector<f64>| -> PhasePoint {
        let cp = CanonicalPoint {
            q: v.rows(0, d).into_owned(),
            x: AlgebraElement::from_coords(v.rows(d, m).as_slice()),
            p: v.rows(d + m, d).into_owned(),
            alpha: v.rows(2 * d + m, m).into_owned(),
        };
        rho(&cp, &base, group).unwrap()
    };
    let eps = 1e-5;
    let n = d + m;
    let grad = DVector::from_fn(2 * n, |i, _| {
        let mut a = c.clone();
        let mut b = c.clone();
        a[i] += eps;
        b[i] -= eps;
        (h.value(&point(&a)) - h.value(&point(&b))) / (2.0 * eps)
    });
    let xc = DVector::from_fn(2 * n, |i, _| if i < n { grad[i + n] } else { -grad[i - n] });
    let (pp, pm) = (point(&(&c + &xc * eps)), point(&(&c - &xc * eps)));
    let pt = point(&c);
    let v = trivialized_hvf(&h, &pt);
    let xi = left_jacobian_block(group, &x) * xc.rows(d, m);
    let dsigma = (pp.sigma - pm.sigma) * (0.5 / eps);
    let err2 = (&v.dq - xc.rows(0, d)).norm_squared()
        + (&v.dp - xc.rows(d + m, d)).norm_squared()
        + (DVector::from_column_slice(v.xi.coords(m)) - xi).norm_squared()
        + (v.dsigma - dsigma).norm_squared();
    let scale2 = v.dq.norm_squared() + v.dp.norm_squared() + v.xi.norm_squared() + v.dsigma.norm_squared();
    rel(err2.sqrt(), scale2.sqrt())
}

fn logderiv_oracle(rng: &mut ChaCha8Rng, group: StructureGroup) -> f64 {
    let grid = epaut_core::SourceManifold::periodic_grid(64).unwrap();
    let gamma = samples::smooth_gauge(rng, &grid, group, 0.5);
    let m = group.dim();
    let comps: Vec<Vec<f64>> = (0..m).map(|_| samples::fourier_field(rng, grid.nodes(), 2, 1.0)).collect();
    let j: Vec<AlgebraElement> = (0..64).map(|i| AlgebraElement::from_coords(&comps.iter().map(|c| c[i]).collect::<Vec<_>>())).collect();
    let eps = 1e-5;
    let moved = |s: f64| -> Vec<GroupElement> { gamma.iter().zip(&j).map(|(g, a)| group.exp(&(*a * s)) * *g).collect() };
    let (lp, lm) = (grid.logderiv_right(group, &moved(eps)).unwrap(), grid.logderiv_right(group, &moved(-eps)).unwrap());
    let an = grid.d_logderiv(group, &gamma, &j).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..64 {
        num += ((lp[i] - lm[i]) * (0.5 / eps) - an[i]).norm_squared();
        den += an[i].norm_squared();
    }
    rel(num.sqrt(), den.sqrt())
}

fn jr_vol_oracle(rng: &mut ChaCha8Rng, group: StructureGroup) -> f64 {
    let z = VolState::new(samples::band_limited_grid_state(rng, 32, 2, group)).unwrap();
    let t = samples::smooth_tangent(rng, &z.source, &z.layout());
    let an = d_jr_vol(&z, &t).unwrap();
    let eps = 1e-5;
    let p = jr_vol(&VolState { z: z.retract(&t, eps) }).unwrap();
    let m = jr_vol(&VolState { z: z.retract(&t, -eps) }).unwrap();
    let (pa, ma, aa) = (p.alpha.unwrap(), m.alpha.unwrap(), an.alpha.unwrap());
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..z.n() {
        num += ((pa[i] - ma[i]) / (2.0 * eps) - aa[i]).powi(2) + ((p.nu[i] - m.nu[i]) * (0.5 / eps) - an.nu[i]).norm_squared();
        den += aa[i].powi(2) + an.nu[i].norm_squared();
    }
    rel(num.sqrt(), den.sqrt())
}

fn djl_oracle(rng: &mut ChaCha8Rng, group: StructureGroup, d: usize) -> f64 {
    let z = samples::band_limited_grid_state(rng, 32, d, group);
    let lb = left_basis(&z.ambient, group, 4);
    let t = samples::random_tangent(rng, &z.layout());
    let an = djl(&z, &lb) * &t;
    let eps = 1e-5;
    let (mp, mm) = (jl(&z.retract(&t, eps)), jl(&z.retract(&t, -eps)));
    let fd = DVector::from_iterator(lb.len(), lb.iter().map(|f| (jl_eval(&mp, f) - jl_eval(&mm, f)) / (2.0 * eps)));
    rel((fd - &an).norm(), an.norm())
}

fn djr_oracle(rng: &mut ChaCha8Rng, group: StructureGroup, d: usize) -> f64 {
    let z = samples::band_limited_grid_state(rng, 32, d, group);
    let rb = right_basis(&z.source, group, 4);
    let t = samples::smooth_tangent(rng, &z.source, &z.layout());
    let an = djr(&z, &rb).unwrap() * &t;
    let eps = 1e-5;
    let w = z.source.weights().to_vec();
    let (mp, mm) = (jr(&z.retract(&t, eps)).unwrap(), jr(&z.retract(&t, -eps)).unwrap());
    let fd = DVector::from_iterator(rb.len(), rb.iter().map(|e| (mp.pair(&w, e) - mm.pair(&w, e)) / (2.0 * eps)));
    rel((fd - &an).norm(), an.norm())
}

fn c7_derivative_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst = [0.0f64; 5];
    for s in 0..50 {
        let group = GROUPS[s % 2];
        let d = 1 + (s / 2) % 2;
        worst[0] = worst[0].max(logderiv_oracle(&mut rng, group));
        worst[1] = worst[1].max(hvf_oracle(&mut rng, group));
        worst[2] = worst[2].max(jr_vol_oracle(&mut rng, group));
        worst[3] = worst[3].max(djl_oracle(&mut rng, group, d));
        worst[4] = worst[4].max(djr_oracle(&mut rng, group, d));
    }
    let ok = worst.iter().all(|&w| w < 1e-6);
    outcome(
        ok,
        format!(
            "max rel err over 50 inputs: d_logderiv {:.1e}, trivialized_hvf {:.1e}, d_jr_vol {:.1e}, dJ_L {:.1e}, dJ_R {:.1e} (tol 1e-6)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn near_point(rng: &mut ChaCha8Rng, group: StructureGroup) -> PhasePoint {
    let mut pt = PhasePoint::random(rng, 2, group);
    pt.g = group.exp(&group.random_algebra(rng, 0.3));
    pt
}

fn c8_cocycle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let opts = QuadratureOptions::default();
    let (mut ident, mut base, mut b_id) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..10 {
        let group = GROUPS[s % 2];
        let mut chain = || FlowChain::single(HamiltonianFlow::new(Observable::random(&mut rng, 2, group, 0.15), 1.0));
        let (g, h, k) = (chain(), chain(), chain());
        let (p0, p1) = (near_point(&mut rng, group), near_point(&mut rng, group));
        ident = ident.max(cocycle_identity_residual(&g, &h, &k, &p0, &opts).unwrap().abs());
        base = base.max(base_point_residual(&g, &h, &p0, &p1, &opts).unwrap().abs());
        let id = FlowChain::single(HamiltonianFlow::identity(2, group));
        b_id = b_id.max(cocycle_b(&id, &g, &p0, &opts).unwrap().abs()).max(cocycle_b(&FlowChain::identity(), &h, &p1, &opts).unwrap().abs());
    }
    let ok = ident < 1e-6 && base < 1e-6 && b_id <= opts.tolerance;
    outcome(ok, format!("cocycle identity {ident:.2e} (1e-6), base-point coboundary {base:.2e} (1e-6), |B(id, phi)| = {b_id:.1e}"))
}

fn c9_vol_noether() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut drift = 0.0f64;
    for group in GROUPS {
        let z = VolState::new(samples::band_limited_grid_state(&mut rng, 64, 2, group)).unwrap();
        // quadratic p-dependence blows up in finite time (p' ~ -p^2); degree <= 1 flows are complete
        let basis = Observable::basis(2, group, 1, 1);
        for _ in 0..3 {
            let h = basis[rng.random_range(0..basis.len())].scaled(0.25);
            let (_, rep) = chromo_noether(&z, &h, 1.0, 1e-3, 100).unwrap();
            drift = drift.max(rep.max_drift);
        }
    }
    let mut invariance = 0.0f64;
    for s in 0..10 {
        let group = GROUPS[s % 2];
        let z = VolState::new(samples::band_limited_grid_state(&mut rng, 32, 2, group)).unwrap();
        let t = RightTransformer { psi: GridDiffeo::shift(&z.source, rng.random_range(-3.0..3.0)), b: samples::smooth_gauge(&mut rng, &z.source, group, 0.5) };
        let z2 = vol_act_right(&z, &t).unwrap();
        for h in Observable::basis(2, group, 1, 2) {
            let (a, b) = (jl_vol(&z, &h), jl_vol(&z2, &h));
            invariance = invariance.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    let mut ortho = 0.0f64;
    for group in GROUPS {
        for d in [1, 2] {
            let z = VolState::new(samples::band_limited_grid_state(&mut rng, 32, d, group)).unwrap();
            let a = chromo_generators(&z, &Observable::basis(d, group, 1, 2));
            let b = vol_right_generators(&z, &right_basis_vol(&z.source, group, 4)).unwrap();
            ortho = ortho.max(orthogonality_residual(&z.z, &a, &b));
        }
    }
    let ok = drift < 1e-6 && invariance < 1e-8 && ortho < 1e-8;
    outcome(ok, format!("J_R^vol drift {drift:.2e} (1e-6), J_L^vol invariance {invariance:.2e} (1e-8), generator orthogonality {ortho:.2e} (1e-8)"))
}

fn transformer_error(r: &RightTransformer, t: &RightTransformer) -> f64 {
    let dpsi = r.psi.values.iter().zip(&t.psi.values).map(|(a, b)| wrap_angle(a - b).abs()).fold(0.0, f64::max);
    let db = r.b.iter().zip(&t.b).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    dpsi.max(db)
}

fn c10_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let (mut err_r, mut err_v) = (0.0f64, 0.0f64);
    let mut rejected = 0;
    let mut attempts = 0;
    for group in GROUPS {
        for ambient in [AmbientManifold::torus(2), AmbientManifold::euclidean(2)] {
            let z1: CotangentState = samples::grid_state(&mut rng, 64, ambient, group);
            let t = RightTransformer { psi: samples::smooth_diffeo(&mut rng, &z1.source, 0.2), b: samples::smooth_gauge(&mut rng, &z1.source, group, 0.4) };
            let z2 = coact_right(&z1, &t).unwrap();
            err_r = err_r.max(transformer_error(&reconstruct_right(&z1, &z2).unwrap(), &t));
            let mut off = z2.clone();
            off.p[(5, 0)] += 0.1;
            attempts += 1;
            rejected += matches!(reconstruct_right(&z1, &off), Err(Error::NotInLevelSet { .. })) as usize;
        }
        let z = VolState::new(samples::band_limited_grid_state(&mut rng, 32, 2, group)).unwrap();
        let t = RightTransformer { psi: GridDiffeo::shift(&z.source, rng.random_range(-3.0..3.0)), b: samples::smooth_gauge(&mut rng, &z.source, group, 0.5) };
        let z2 = vol_act_right(&z, &t).unwrap();
        err_v = err_v.max(transformer_error(&reconstruct_vol(&z, &z2).unwrap(), &t));
        // same image, wrong density: off the J_L^vol level set
        let warp = RightTransformer { psi: samples::smooth_diffeo(&mut rng, &z.source, 0.2), b: vec![group.identity(); z.n()] };
        let warped = act_without_density(&z, &warp).unwrap();
        attempts += 1;
        rejected += matches!(reconstruct_vol(&z, &warped), Err(Error::NotVolumePreserving { .. })) as usize;
        let mut moved = z2.clone();
        moved.z.p[(3, 0)] += 0.1;
        attempts += 1;
        rejected += matches!(reconstruct_vol(&z, &moved), Err(Error::ImagesDiffer { .. } | Error::NotInLevelSet { .. })) as usize;
    }
    let ok = err_r < 1e-6 && err_v < 1e-6 && rejected == attempts;
    outcome(ok, format!("reconstruct_right error {err_r:.2e}, reconstruct_vol error {err_v:.2e} (1e-6), rejected {rejected}/{attempts} off-level-set inputs"))
}

#[test]
fn acceptance_criteria() {
    let results = [
        run(1, "left/right generator orthogonality", Some(30.0), c1_orthogonality),
        run(2, "kernel inclusion and gap convergence", Some(120.0), c2_kernel_inclusion),
        run(3, "kernel excess at a zeroed node", Some(30.0), c3_necessity),
        run(4, "isotropy witness", None, c4_isotropy_witness),
        run(5, "peakon conservation", Some(60.0), c5_peakon_conservation),
        run(6, "weak consistency order", None, c6_weak_consistency),
        run(7, "derivative oracles", None, c7_derivative_oracles),
        run(8, "prequantum cocycle", None, c8_cocycle),
        run(9, "volume-preserving Noether", None, c9_vol_noether),
        run(10, "round-trip reconstructions", None, c10_reconstruction),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    emit(&format!("acceptance: {passed}/{} criteria passed", results.len()));
    assert_eq!(passed, results.len(), "acceptance criteria failed");
}
