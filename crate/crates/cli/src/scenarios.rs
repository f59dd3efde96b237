//! Scenario orchestration: each scenario fills a `Report` and writes its CSV files.

use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use epaut_core::basis::{left_basis, right_basis, right_basis_vol};
use epaut_core::dualpair::{
    isotropy_witness, kernel_vs_orbit, left_generators, orthogonality_residual, random_conormal_target, reconstruct_right, right_generators,
    transitivity_defect, validate_chart,
};
use epaut_core::io::{write_diagnostics_csv, write_rows_csv, write_trajectory_csv, Report};
use epaut_core::lie::wrap_angle;
use epaut_core::momentum::{djl, djr, jl, jl_eval, jr};
use epaut_core::peakon::{integrate, peakon_ensemble, weak_consistency, Scheme, Trajectory};
use epaut_core::samples;
use epaut_core::transform::coact_right;
use epaut_core::yangmills::observable::left_jacobian_block;
use epaut_core::yangmills::state::act_without_density;
use epaut_core::yangmills::{
    base_point_residual, chromo_generators, chromo_noether, cocycle_b, cocycle_identity_residual, d_jr_vol, jl_vol, jr_vol, reconstruct_vol, rho,
    trivialized_hvf, vol_act_right, vol_right_generators, CanonicalPoint, FlowChain, HamiltonianFlow, Observable, PhasePoint, QuadratureOptions,
    VolState,
};
use epaut_core::{
    AlgebraElement, AmbientManifold, CoalgebraElement, CotangentState, Error, GridDiffeo, GroupElement, RightTransformer, SourceManifold, StructureGroup,
};

use crate::config::{InitialState, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Simulate,
    DualPair,
    VolDualPair,
    Conservation,
    Derivatives,
    Noether,
    Cocycle,
}

impl Scenario {
    pub fn report_name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::DualPair => "verify_dual_pair",
            Scenario::VolDualPair => "verify_vol_dual_pair",
            Scenario::Conservation => "verify_conservation",
            Scenario::Derivatives => "verify_derivatives",
            Scenario::Noether => "verify_noether",
            Scenario::Cocycle => "cocycle",
        }
    }

    pub fn run(self, cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &Path, report: &mut Report) -> Result<()> {
        match self {
            Scenario::Simulate => simulate(cfg, rng, out, report),
            Scenario::DualPair => dual_pair(cfg, rng, report),
            Scenario::VolDualPair => vol_dual_pair(cfg, rng, report),
            Scenario::Conservation => conservation(cfg, rng, out, report),
            Scenario::Derivatives => derivatives(cfg, rng, report),
            Scenario::Noether => noether(cfg, rng, out, report),
            Scenario::Cocycle => cocycle(cfg, rng, report),
        }
    }
}

fn tag(group: StructureGroup) -> &'static str {
    match group {
        StructureGroup::Circle => "u1",
        StructureGroup::Rotation3 => "so3",
    }
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

fn single_peakon(cfg: &RunConfig, group: StructureGroup) -> Result<CotangentState> {
    let mut s = [0.0; 3];
    for (a, v) in cfg.sigma0.iter().take(group.dim()).enumerate() {
        s[a] = *v;
    }
    Ok(CotangentState::new(
        SourceManifold::point_cloud(vec![cfg.weight])?,
        AmbientManifold::euclidean(1),
        group,
        DMatrix::zeros(1, 1),
        DMatrix::from_element(1, 1, cfg.p0),
        vec![group.identity()],
        vec![CoalgebraElement::new(s[0], s[1], s[2])],
    )?)
}

/// Largest deviation of a single-peakon trajectory from uniform translation
/// and constant-rate gauge rotation.
fn closed_form_error(cfg: &RunConfig, traj: &Trajectory) -> f64 {
    let z0 = &traj.states[0];
    let group = z0.group;
    let (w, p0, s0) = (cfg.weight, z0.p[(0, 0)], z0.sigma[0]);
    let speed = w * p0 * cfg.kernels.g1.value(&[0.0]);
    let rate = group.sharp(&s0) * (w * cfg.kernels.g2.value(&[0.0]));
    traj.states
        .iter()
        .zip(&traj.diagnostics)
        .map(|(z, d)| {
            let t = d.t;
            let eq = (z.q[(0, 0)] - (z0.q[(0, 0)] + speed * t)).abs();
            let ep = (z.p[(0, 0)] - p0).abs();
            let es = (z.sigma[0] - s0).norm();
            let eg = match (z.gamma[0], z0.gamma[0]) {
                (GroupElement::Circle(a), GroupElement::Circle(a0)) => (a - a0 - rate.0[0] * t).abs(),
                (g, g0) => g.distance(&(group.exp(&(rate * t)) * g0)),
            };
            eq.max(ep).max(es).max(eg)
        })
        .fold(0.0, f64::max)
}

fn simulate(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &Path, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    report.measure("steps", steps as f64, "1");
    for group in cfg.group.groups() {
        let g = tag(group);
        let z0 = match cfg.initial {
            InitialState::Ensemble => peakon_ensemble(rng, cfg.nodes, group, cfg.sigma_scale),
            InitialState::Single => single_peakon(cfg, group)?,
        };
        let traj = integrate(&z0, &cfg.kernels, cfg.dt, steps, cfg.stride, cfg.scheme)?;
        let traj_file = format!("trajectory_{g}.csv");
        let diag_file = format!("diagnostics_{g}.csv");
        write_trajectory_csv(&out.join(&traj_file), &traj).with_context(|| format!("writing {traj_file}"))?;
        write_diagnostics_csv(&out.join(&diag_file), &traj.diagnostics).with_context(|| format!("writing {diag_file}"))?;
        report.files.push(traj_file);
        report.files.push(diag_file);
        report.measure(&format!("{g}.energy_initial"), traj.diagnostics[0].energy, "energy");
        report.check(&format!("{g}.energy_rel_drift"), traj.max_energy_drift(), "1", tol.energy);
        report.check(&format!("{g}.charge_drift"), traj.max_charge_drift(), "charge", tol.charge);
        report.check(&format!("{g}.casimir_drift"), traj.max_casimir_drift(), "charge", tol.casimir);
        if cfg.initial == InitialState::Single {
            report.check(&format!("{g}.closed_form_error"), closed_form_error(cfg, &traj), "length", tol.closed_form);
        }
    }
    Ok(())
}

fn dual_pair(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let combos: Vec<(StructureGroup, usize)> = cfg.group.groups().into_iter().flat_map(|g| cfg.dims.iter().map(move |&d| (g, d))).collect();

    let mut ortho = 0.0f64;
    for s in 0..cfg.states {
        let (group, d) = combos[s % combos.len()];
        let z = samples::band_limited_grid_state(rng, cfg.n, d, group);
        let a = left_generators(&z, &left_basis(&z.ambient, group, cfg.k));
        let b = right_generators(&z, &right_basis(&z.source, group, cfg.k))?;
        ortho = ortho.max(orthogonality_residual(&z, &a, &b));
        if s == 0 {
            report.measure("chart_dim", z.layout().dim() as f64, "1");
            report.measure("left_generators", a.ncols() as f64, "1");
            report.measure("right_generators", b.ncols() as f64, "1");
        }
    }
    report.check("orthogonality_residual", ortho, "1", tol.orthogonality);

    let mut inclusion = 0.0f64;
    for &(group, d) in &combos {
        let z = samples::band_limited_grid_state(rng, cfg.n, d, group);
        let key = format!("{}.d{d}", tag(group));
        let mut gaps = [Vec::new(), Vec::new()];
        for &k in &cfg.k_sweep {
            let lb = left_basis(&z.ambient, group, k);
            let rb = right_basis(&z.source, group, k);
            let l = kernel_vs_orbit(&z, &djl(&z, &lb), &right_generators(&z, &rb)?)?;
            let r = kernel_vs_orbit(&z, &djr(&z, &rb)?, &left_generators(&z, &lb))?;
            inclusion = inclusion.max(l.inclusion_residual).max(r.inclusion_residual);
            for (side, rep) in [("left", &l), ("right", &r)] {
                report.measure(&format!("{key}.k{k}.{side}_kernel_dim"), rep.kernel_dim as f64, "1");
                report.measure(&format!("{key}.k{k}.{side}_orbit_dim"), rep.orbit_dim as f64, "1");
                report.measure(&format!("{key}.k{k}.{side}_gap"), rep.gap, "1");
                if let Some(c) = rep.cosines.last() {
                    report.measure(&format!("{key}.k{k}.{side}_min_cosine"), *c, "1");
                }
            }
            gaps[0].push(l.gap);
            gaps[1].push(r.gap);
        }
        for (side, g) in ["left", "right"].iter().zip(&gaps) {
            if !g.windows(2).all(|w| w[1] <= (1.0 + tol.gap_noise) * w[0] + 1e-12) {
                report.warn(format!("{key} {side} kernel-orbit gap is not decreasing in K: {g:?}"));
            }
        }
    }
    report.check("kernel_inclusion_residual", inclusion, "1", tol.inclusion);

    for group in cfg.group.groups() {
        let ambient = AmbientManifold::euclidean(2);
        let mut z = samples::point_cloud_state(rng, 3, ambient, group);
        let lb = left_basis(&ambient, group, 4);
        let rb = right_basis(&z.source, group, 0);
        z.p.row_mut(1).fill(0.0);
        z.sigma[1] = CoalgebraElement::zero();
        let rep = transitivity_defect(&djl(&z, &lb), &right_generators(&z, &rb)?)?;
        report.measure(&format!("{}.zeroed_node_kernel_excess", tag(group)), rep.excess as f64, "1");
        report.require(&format!("{}.zeroed_node_has_kernel_excess", tag(group)), rep.excess >= 1);
    }

    let (mut residual, mut split) = (0.0f64, 0.0f64);
    let groups = cfg.group.groups();
    for s in 0..cfg.states.min(10) {
        let z = samples::grid_state(rng, 2 * cfg.n, AmbientManifold::euclidean(2), groups[s % groups.len()]);
        let t = random_conormal_target(rng, &z)?;
        let w = isotropy_witness(&z, &t)?;
        residual = residual.max(w.residual);
        split = split.max(w.split_error);
    }
    report.check("isotropy_witness_residual", residual, "momentum", tol.witness_residual);
    report.check("isotropy_split_error", split, "1", tol.witness_split);

    let (mut chart, mut cond) = (0.0f64, 0.0f64);
    for group in cfg.group.groups() {
        let z = samples::grid_state(rng, 8, AmbientManifold::torus(2), group);
        let rep = validate_chart(rng, &z, 10);
        chart = chart.max(rep.max_rel_err);
        cond = cond.max(rep.condition_number);
    }
    report.check("chart_form_rel_error", chart, "1", tol.chart);
    report.measure("chart_condition_number", cond, "1");

    let mut err = 0.0f64;
    let mut rejected = true;
    for group in cfg.group.groups() {
        let z1 = samples::grid_state(rng, 2 * cfg.n, AmbientManifold::torus(2), group);
        let t = RightTransformer { psi: samples::smooth_diffeo(rng, &z1.source, 0.2), b: samples::smooth_gauge(rng, &z1.source, group, 0.4) };
        let z2 = coact_right(&z1, &t)?;
        err = err.max(transformer_error(&reconstruct_right(&z1, &z2)?, &t));
        let mut off = z2.clone();
        off.p[(1, 0)] += 0.1;
        rejected &= matches!(reconstruct_right(&z1, &off), Err(Error::NotInLevelSet { .. }));
    }
    report.check("reconstruct_right_error", err, "1", tol.reconstruction);
    report.require("reconstruct_right_rejects_off_level_set", rejected);
    Ok(())
}

fn transformer_error(r: &RightTransformer, t: &RightTransformer) -> f64 {
    let dpsi = r.psi.values.iter().zip(&t.psi.values).map(|(a, b)| wrap_angle(a - b).abs()).fold(0.0, f64::max);
    let db = r.b.iter().zip(&t.b).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    dpsi.max(db)
}

fn vol_dual_pair(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let mut ortho = 0.0f64;
    for group in cfg.group.groups() {
        for &d in &cfg.dims {
            let z = VolState::new(samples::band_limited_grid_state(rng, cfg.n, d, group))?;
            let a = chromo_generators(&z, &Observable::basis(d, group, 1, 2));
            let b = vol_right_generators(&z, &right_basis_vol(&z.source, group, cfg.k))?;
            ortho = ortho.max(orthogonality_residual(&z.z, &a, &b));
        }
    }
    report.check("omega_bar_orthogonality", ortho, "1", tol.orthogonality);

    let groups = cfg.group.groups();
    let d = *cfg.dims.iter().max().unwrap_or(&2);
    let mut invariance = 0.0f64;
    for s in 0..cfg.states.min(10) {
        let group = groups[s % groups.len()];
        let z = VolState::new(samples::band_limited_grid_state(rng, cfg.n, d, group))?;
        let t = RightTransformer { psi: GridDiffeo::shift(&z.source, rng.random_range(-3.0..3.0)), b: samples::smooth_gauge(rng, &z.source, group, 0.5) };
        let z2 = vol_act_right(&z, &t)?;
        for h in Observable::basis(d, group, 1, 2) {
            let (a, b) = (jl_vol(&z, &h), jl_vol(&z2, &h));
            invariance = invariance.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    report.check("jl_vol_invariance", invariance, "1", tol.invariance);

    let mut err = 0.0f64;
    let mut rejected = true;
    for &group in &groups {
        let z = VolState::new(samples::band_limited_grid_state(rng, cfg.n, d, group))?;
        let t = RightTransformer { psi: GridDiffeo::shift(&z.source, rng.random_range(-3.0..3.0)), b: samples::smooth_gauge(rng, &z.source, group, 0.5) };
        let z2 = vol_act_right(&z, &t)?;
        err = err.max(transformer_error(&reconstruct_vol(&z, &z2)?, &t));
        let warp = RightTransformer { psi: samples::smooth_diffeo(rng, &z.source, 0.2), b: vec![group.identity(); z.n()] };
        rejected &= matches!(reconstruct_vol(&z, &act_without_density(&z, &warp)?), Err(Error::NotVolumePreserving { .. }));
    }
    report.check("reconstruct_vol_error", err, "1", tol.reconstruction);
    report.require("reconstruct_vol_rejects_non_volume_preserving", rejected);
    Ok(())
}

fn conservation(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &Path, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    for group in cfg.group.groups() {
        let g = tag(group);
        let z0 = peakon_ensemble(rng, cfg.nodes, group, cfg.sigma_scale);
        let traj = integrate(&z0, &cfg.kernels, cfg.dt, steps, cfg.stride, cfg.scheme)?;
        let file = format!("conservation_{g}.csv");
        write_diagnostics_csv(&out.join(&file), &traj.diagnostics)?;
        report.files.push(file);
        report.check(&format!("{g}.energy_rel_drift"), traj.max_energy_drift(), "1", tol.energy);
        report.check(&format!("{g}.charge_drift"), traj.max_charge_drift(), "charge", tol.charge);
        report.check(&format!("{g}.casimir_drift"), traj.max_casimir_drift(), "charge", tol.casimir);

        let tests = left_basis(&z0.ambient, group, 3);
        let mut rows = Vec::new();
        for &dt in &cfg.order_dts {
            let n = (cfg.order_t_end / dt).round().max(2.0) as usize;
            let tr = integrate(&z0, &cfg.kernels, dt, n, 1, Scheme::Midpoint)?;
            rows.push((dt, weak_consistency(&tr, &cfg.kernels, &tests)));
        }
        for (dt, r) in &rows {
            report.measure(&format!("{g}.weak_residual_dt{dt:e}"), *r, "momentum/time");
        }
        let order = loglog_slope(&rows);
        report.measure(&format!("{g}.weak_consistency_order"), order, "1");
        report.require(&format!("{g}.weak_consistency_order_in_range"), order >= tol.order_min && order <= tol.order_max);
    }
    Ok(())
}

fn loglog_slope(rows: &[(f64, f64)]) -> f64 {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn derivatives(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let h = tol.fd_step;
    let combos: Vec<(StructureGroup, usize)> = cfg.group.groups().into_iter().flat_map(|g| cfg.dims.iter().map(move |&d| (g, d))).collect();
    let mut worst = [0.0f64; 5];
    for s in 0..cfg.derivative_samples {
        let (group, d) = combos[s % combos.len()];
        worst[0] = worst[0].max(logderiv_check(rng, group, cfg.n, h)?);
        worst[1] = worst[1].max(hvf_check(rng, group, h)?);
        worst[2] = worst[2].max(jr_vol_check(rng, group, cfg.n, h)?);
        worst[3] = worst[3].max(djl_check(rng, group, d, cfg.n, h));
        worst[4] = worst[4].max(djr_check(rng, group, d, cfg.n, h)?);
    }
    for (name, w) in ["d_logderiv", "trivialized_hvf", "d_jr_vol", "djl", "djr"].iter().zip(worst) {
        report.check(&format!("{name}_rel_error"), w, "1", tol.derivative);
    }
    Ok(())
}

fn logderiv_check(rng: &mut ChaCha8Rng, group: StructureGroup, n: usize, h: f64) -> Result<f64> {
    let grid = SourceManifold::periodic_grid(2 * n)?;
    let gamma = samples::smooth_gauge(rng, &grid, group, 0.5);
    let comps: Vec<Vec<f64>> = (0..group.dim()).map(|_| samples::fourier_field(rng, grid.nodes(), 2, 1.0)).collect();
    let j: Vec<AlgebraElement> = (0..grid.len()).map(|i| AlgebraElement::from_coords(&comps.iter().map(|c| c[i]).collect::<Vec<_>>())).collect();
    let moved = |s: f64| -> Vec<GroupElement> { gamma.iter().zip(&j).map(|(g, a)| group.exp(&(*a * s)) * *g).collect() };
    let (lp, lm) = (grid.logderiv_right(group, &moved(h))?, grid.logderiv_right(group, &moved(-h))?);
    let an = grid.d_logderiv(group, &gamma, &j)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.len() {
        num += ((lp[i] - lm[i]) * (0.5 / h) - an[i]).norm_squared();
        den += an[i].norm_squared();
    }
    Ok(rel(num.sqrt(), den.sqrt()))
}

/// Trivialized field against the canonical field of `h o rho`, pushed forward by differences.
fn hvf_check(rng: &mut ChaCha8Rng, group: StructureGroup, h: f64) -> Result<f64> {
    let (d, m) = (2, group.dim());
    let obs = Observable::random(rng, d, group, 0.5);
    let base = group.random_element(rng);
    let x = group.random_algebra(rng, 0.7);
    let mut c: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    c.extend_from_slice(x.coords(m));
    c.extend((0..d).map(|_| rng.random_range(-1.0..1.0)));
    c.extend((0..m).map(|_| rng.random_range(-1.0..1.0)));
    let c = DVector::from_vec(c);
    let point = |v: &DVector<f64>| -> Result<PhasePoint> {
        let cp = CanonicalPoint {
            q: v.rows(0, d).into_owned(),
            x: AlgebraElement::from_coords(v.rows(d, m).as_slice()),
            p: v.rows(d + m, d).into_owned(),
            alpha: v.rows(2 * d + m, m).into_owned(),
        };
        Ok(rho(&cp, &base, group)?)
    };
    let half = d + m;
    let mut grad = DVector::zeros(2 * half);
    for i in 0..2 * half {
        let mut a = c.clone();
        let mut b = c.clone();
        a[i] += h;
        b[i] -= h;
        grad[i] = (obs.value(&point(&a)?) - obs.value(&point(&b)?)) / (2.0 * h);
    }
    let xc = DVector::from_fn(2 * half, |i, _| if i < half { grad[i + half] } else { -grad[i - half] });
    let (pp, pm) = (point(&(&c + &xc * h))?, point(&(&c - &xc * h))?);
    let v = trivialized_hvf(&obs, &point(&c)?);
    let xi = left_jacobian_block(group, &x) * xc.rows(d, m);
    let err2 = (&v.dq - xc.rows(0, d)).norm_squared()
        + (&v.dp - xc.rows(d + m, d)).norm_squared()
        + (DVector::from_column_slice(v.xi.coords(m)) - xi).norm_squared()
        + (v.dsigma - (pp.sigma - pm.sigma) * (0.5 / h)).norm_squared();
    let scale2 = v.dq.norm_squared() + v.dp.norm_squared() + v.xi.norm_squared() + v.dsigma.norm_squared();
    Ok(rel(err2.sqrt(), scale2.sqrt()))
}

fn jr_vol_check(rng: &mut ChaCha8Rng, group: StructureGroup, n: usize, h: f64) -> Result<f64> {
    let z = VolState::new(samples::band_limited_grid_state(rng, n, 2, group))?;
    let t = samples::smooth_tangent(rng, &z.source, &z.layout());
    let an = d_jr_vol(&z, &t)?;
    let p = jr_vol(&VolState { z: z.retract(&t, h) })?;
    let m = jr_vol(&VolState { z: z.retract(&t, -h) })?;
    let (pa, ma, aa) = (p.alpha.unwrap_or_default(), m.alpha.unwrap_or_default(), an.alpha.unwrap_or_default());
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..aa.len() {
        num += ((pa[i] - ma[i]) / (2.0 * h) - aa[i]).powi(2) + ((p.nu[i] - m.nu[i]) * (0.5 / h) - an.nu[i]).norm_squared();
        den += aa[i].powi(2) + an.nu[i].norm_squared();
    }
    Ok(rel(num.sqrt(), den.sqrt()))
}

fn djl_check(rng: &mut ChaCha8Rng, group: StructureGroup, d: usize, n: usize, h: f64) -> f64 {
    let z = samples::band_limited_grid_state(rng, n, d, group);
    let lb = left_basis(&z.ambient, group, 4);
    let t = samples::random_tangent(rng, &z.layout());
    let an = djl(&z, &lb) * &t;
    let (mp, mm) = (jl(&z.retract(&t, h)), jl(&z.retract(&t, -h)));
    let fd = DVector::from_iterator(lb.len(), lb.iter().map(|f| (jl_eval(&mp, f) - jl_eval(&mm, f)) / (2.0 * h)));
    rel((fd - &an).norm(), an.norm())
}

fn djr_check(rng: &mut ChaCha8Rng, group: StructureGroup, d: usize, n: usize, h: f64) -> Result<f64> {
    let z = samples::band_limited_grid_state(rng, n, d, group);
    let rb = right_basis(&z.source, group, 4);
    let t = samples::smooth_tangent(rng, &z.source, &z.layout());
    let an = djr(&z, &rb)? * &t;
    let w = z.source.weights().to_vec();
    let (mp, mm) = (jr(&z.retract(&t, h))?, jr(&z.retract(&t, -h))?);
    let fd = DVector::from_iterator(rb.len(), rb.iter().map(|e| (mp.pair(&w, e) - mm.pair(&w, e)) / (2.0 * h)));
    Ok(rel((fd - &an).norm(), an.norm()))
}

fn noether(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &Path, report: &mut Report) -> Result<()> {
    let d = *cfg.dims.iter().max().unwrap_or(&2);
    let stride = ((cfg.noether_t / cfg.noether_dt).round() as usize / 100).max(1);
    let mut drift = 0.0f64;
    for group in cfg.group.groups() {
        let z = VolState::new(samples::band_limited_grid_state(rng, cfg.noether_n, d, group))?;
        // degree <= 1 in p keeps the flows complete on the run interval
        let basis = Observable::basis(d, group, 1, 1);
        for f in 0..cfg.noether_flows {
            let idx = rng.random_range(0..basis.len());
            let h = basis[idx].scaled(0.25);
            let (_, rep) = chromo_noether(&z, &h, cfg.noether_t, cfg.noether_dt, stride)?;
            let file = format!("noether_{}_{f}.csv", tag(group));
            let rows: Vec<Vec<f64>> = (0..rep.times.len()).map(|i| vec![rep.times[i], rep.alpha_drift[i], rep.charge_drift[i]]).collect();
            write_rows_csv(&out.join(&file), &["t", "alpha_drift", "charge_drift"], &rows)?;
            report.files.push(file);
            report.measure(&format!("{}.flow{f}.basis_index", tag(group)), idx as f64, "1");
            report.measure(&format!("{}.flow{f}.drift", tag(group)), rep.max_drift, "momentum");
            drift = drift.max(rep.max_drift);
        }
    }
    report.check("jr_vol_drift", drift, "momentum", cfg.tolerances.noether);
    Ok(())
}

fn near_point(rng: &mut ChaCha8Rng, group: StructureGroup) -> PhasePoint {
    let mut pt = PhasePoint::random(rng, 2, group);
    pt.g = group.exp(&group.random_algebra(rng, 0.3));
    pt
}

fn cocycle(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    let tol = &cfg.tolerances;
    let opts = QuadratureOptions::default();
    let groups = cfg.group.groups();
    let (mut ident, mut base, mut b_id) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..cfg.cocycle_triples {
        let group = groups[s % groups.len()];
        let mut chain = || FlowChain::single(HamiltonianFlow::new(Observable::random(rng, 2, group, 0.15), 1.0));
        let (g, h, k) = (chain(), chain(), chain());
        let (p0, p1) = (near_point(rng, group), near_point(rng, group));
        report.measure(&format!("triple{s}.b_gh"), cocycle_b(&g, &h, &p0, &opts)?, "action");
        ident = ident.max(cocycle_identity_residual(&g, &h, &k, &p0, &opts)?.abs());
        base = base.max(base_point_residual(&g, &h, &p0, &p1, &opts)?.abs());
        let id = FlowChain::single(HamiltonianFlow::identity(2, group));
        b_id = b_id.max(cocycle_b(&id, &g, &p0, &opts)?.abs());
    }
    report.check("cocycle_identity_residual", ident, "action", tol.cocycle);
    report.check("base_point_coboundary_residual", base, "action", tol.cocycle);
    report.check("b_identity_abs", b_id, "action", opts.tolerance);
    Ok(())
}
