//! Recovery of a volume-preserving right transformer between two states with
//! the same left momentum.

use super::observable::Observable;
use super::state::{jl_vol, vol_act_right, volume_deviation, VolState, VOLUME_TOL};
use crate::dualpair::{match_curves, state_distance};
use crate::error::{Error, Result};
use crate::transform::RightTransformer;

/// Largest `|jl_vol(z1, h) - jl_vol(z2, h)|` over `basis`.
pub fn vol_level_set_residual(z1: &VolState, z2: &VolState, basis: &[Observable]) -> f64 {
    basis.iter().map(|h| (jl_vol(z1, h) - jl_vol(z2, h)).abs()).fold(0.0, f64::max)
}

/// Find `(psi, b)` with `vol_act_right(z1, (psi, b)) = z2`.
pub fn reconstruct_vol(z1: &VolState, z2: &VolState) -> Result<RightTransformer> {
    let tol = 1e-6;
    if z1.n() != z2.n() || z1.d() != z2.d() || z1.group != z2.group {
        return Err(Error::ShapeMismatch("states live on different discretizations".into()));
    }
    let (d, m) = (z1.d(), z1.m());
    let mut comps: Vec<Vec<f64>> = (0..d).map(|j| z1.q.column(j).iter().copied().collect()).collect();
    comps.extend((0..d).map(|j| z1.p.column(j).iter().copied().collect::<Vec<_>>()));
    comps.extend((0..m).map(|a| z1.sigma.iter().map(|s| s.0[a]).collect::<Vec<_>>()));
    let mut periodic = vec![true; d];
    periodic.extend(vec![false; d + m]);
    let targets: Vec<Vec<f64>> = (0..z2.n())
        .map(|i| {
            let mut y = z2.point(i);
            y.extend(z2.p.row(i).iter());
            y.extend_from_slice(z2.sigma[i].coords(m));
            y
        })
        .collect();
    let psi = match_curves(&z1.source, &comps, &periodic, &targets)?;
    let deviation = volume_deviation(&psi);
    if deviation > VOLUME_TOL {
        return Err(Error::NotVolumePreserving { deviation });
    }
    let basis = Observable::basis(d, z1.group, 1, 2);
    let scale = basis.iter().map(|h| jl_vol(z1, h).abs()).fold(1.0, f64::max);
    let res = vol_level_set_residual(z1, z2, &basis);
    if res > tol * scale {
        return Err(Error::NotInLevelSet { residual: res });
    }
    let g1 = z1.source.resample_group(z1.group, &z1.gamma, &psi)?;
    let b = g1.iter().zip(&z2.gamma).map(|(a, c)| a.inverse() * *c).collect();
    let t = RightTransformer { psi, b };
    let back = vol_act_right(z1, &t)?;
    let miss = state_distance(&back.z, &z2.z);
    if miss > tol * (1.0 + z2.p.amax()) {
        return Err(Error::NotInLevelSet { residual: miss });
    }
    Ok(t)
}
