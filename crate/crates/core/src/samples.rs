//! Seeded random states, tangents and transformers.
//!
//! Grid states are band-limited with few modes, so spectral products and
//! compositions stay well below the Nyquist limit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::basis::{AmbientKind, AmbientManifold};
use crate::grid::{GridDiffeo, SourceManifold};
use crate::lie::{AlgebraElement, CoalgebraElement, GroupElement, StructureGroup};
use crate::phase::{ChartLayout, CotangentState};

/// Random trigonometric polynomial of degree `kmax` sampled at `nodes`.
pub fn fourier_field<R: Rng + ?Sized>(rng: &mut R, nodes: &[f64], kmax: usize, amp: f64) -> Vec<f64> {
    let mut coef = Vec::with_capacity(2 * kmax + 1);
    for _ in 0..(2 * kmax + 1) {
        coef.push(rng.random_range(-amp..=amp));
    }
    nodes
        .iter()
        .map(|&x| {
            let mut v = coef[0];
            for k in 1..=kmax {
                v += coef[2 * k - 1] * (k as f64 * x).cos() + coef[2 * k] * (k as f64 * x).sin();
            }
            v
        })
        .collect()
}

fn smooth_group_field<R: Rng + ?Sized>(rng: &mut R, nodes: &[f64], group: StructureGroup, amp: f64) -> Vec<GroupElement> {
    let comps: Vec<Vec<f64>> = (0..group.dim()).map(|_| fourier_field(rng, nodes, 1, amp)).collect();
    (0..nodes.len())
        .map(|i| {
            let c: Vec<f64> = comps.iter().map(|f| f[i]).collect();
            group.exp(&AlgebraElement::from_coords(&c))
        })
        .collect()
}

fn smooth_coalgebra_field<R: Rng + ?Sized>(rng: &mut R, nodes: &[f64], group: StructureGroup, kmax: usize, amp: f64) -> Vec<CoalgebraElement> {
    let comps: Vec<Vec<f64>> = (0..group.dim()).map(|_| fourier_field(rng, nodes, kmax, amp)).collect();
    (0..nodes.len())
        .map(|i| CoalgebraElement::from_coords(&comps.iter().map(|f| f[i]).collect::<Vec<_>>()))
        .collect()
}

/// Smooth embedding of the circle: winding once around the first torus
/// direction, or a perturbed unit circle in the plane.
pub fn smooth_embedding<R: Rng + ?Sized>(rng: &mut R, source: &SourceManifold, ambient: AmbientManifold) -> DMatrix<f64> {
    let nodes = source.nodes();
    let n = nodes.len();
    let d = ambient.dim;
    let mut q = DMatrix::zeros(n, d);
    match ambient.kind {
        AmbientKind::Torus => {
            let wiggle = fourier_field(rng, nodes, 1, 0.05);
            for i in 0..n {
                q[(i, 0)] = nodes[i] + wiggle[i];
            }
            for j in 1..d {
                let c = rng.random_range(0.0..2.0 * PI);
                let f = fourier_field(rng, nodes, 1, 0.3);
                for i in 0..n {
                    q[(i, j)] = c + f[i];
                }
            }
        }
        AmbientKind::Euclidean => {
            assert!(d >= 2, "a circle does not embed in the line");
            let r = fourier_field(rng, nodes, 2, 0.05);
            let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            for i in 0..n {
                let rad = 1.0 + r[i];
                q[(i, 0)] = shift[0] + rad * nodes[i].cos();
                q[(i, 1)] = shift[1] + rad * nodes[i].sin();
                for j in 2..d {
                    q[(i, j)] = shift[j];
                }
            }
        }
    }
    q
}

/// Random smooth state on a periodic grid of `n` nodes.
pub fn grid_state<R: Rng + ?Sized>(rng: &mut R, n: usize, ambient: AmbientManifold, group: StructureGroup) -> CotangentState {
    let source = SourceManifold::periodic_grid(n).expect("valid grid size");
    let nodes = source.nodes().to_vec();
    let q = smooth_embedding(rng, &source, ambient);
    let mut p = DMatrix::zeros(n, ambient.dim);
    for j in 0..ambient.dim {
        p.set_column(j, &DVector::from_vec(fourier_field(rng, &nodes, 2, 1.0)));
    }
    let gamma = smooth_group_field(rng, &nodes, group, 0.3);
    let sigma = smooth_coalgebra_field(rng, &nodes, group, 2, 1.0);
    CotangentState::new(source, ambient, group, q, p, gamma, sigma).expect("consistent sample state")
}

/// Random point-cloud state with well separated points.
pub fn point_cloud_state<R: Rng + ?Sized>(rng: &mut R, n: usize, ambient: AmbientManifold, group: StructureGroup) -> CotangentState {
    let weights = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let source = SourceManifold::point_cloud(weights).expect("positive weights");
    let d = ambient.dim;
    let (lo, hi) = match ambient.kind {
        AmbientKind::Torus => (0.0, 2.0 * PI),
        AmbientKind::Euclidean => (-2.0, 2.0),
    };
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < n {
        let cand: Vec<f64> = (0..d).map(|_| rng.random_range(lo..hi)).collect();
        if pts.iter().all(|p| ambient.distance(p, &cand) > 0.3) {
            pts.push(cand);
        }
    }
    let q = DMatrix::from_fn(n, d, |i, j| pts[i][j]);
    let p = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    let gamma = (0..n).map(|_| group.random_element(rng)).collect();
    let sigma = (0..n).map(|_| group.random_coalgebra(rng, 1.0)).collect();
    CotangentState::new(source, ambient, group, q, p, gamma, sigma).expect("consistent sample state")
}

pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, layout: &ChartLayout) -> DVector<f64> {
    DVector::from_fn(layout.dim(), |_, _| rng.random_range(-1.0..1.0))
}

/// Band-limited chart tangent on a grid state (degree-2 modes in every slot).
pub fn smooth_tangent<R: Rng + ?Sized>(rng: &mut R, source: &SourceManifold, layout: &ChartLayout) -> DVector<f64> {
    let mut t = DVector::zeros(layout.dim());
    let stride = layout.stride();
    for c in 0..stride {
        let f = fourier_field(rng, source.nodes(), 2, 1.0);
        for i in 0..layout.n {
            t[i * stride + c] = f[i];
        }
    }
    t
}

/// Random smooth orientation-preserving diffeomorphism `x + eps f(x)` of the circle.
pub fn smooth_diffeo<R: Rng + ?Sized>(rng: &mut R, grid: &SourceManifold, amp: f64) -> GridDiffeo {
    let (a, b, c) = (rng.random_range(-amp..amp), rng.random_range(-amp..amp), rng.random_range(-PI..PI));
    GridDiffeo::from_fn(grid, |x| x + c + a * x.sin() + 0.5 * b * (2.0 * x).cos(), |x| 1.0 + a * x.cos() - b * (2.0 * x).sin())
        .expect("small amplitude keeps the map monotone")
}

/// Random smooth gauge field `b = exp(A)`.
pub fn smooth_gauge<R: Rng + ?Sized>(rng: &mut R, grid: &SourceManifold, group: StructureGroup, amp: f64) -> Vec<GroupElement> {
    smooth_group_field(rng, grid.nodes(), group, amp)
}

/// Regular grid state whose fields are all trigonometric polynomials of low
/// degree: `Q` is a straight closed geodesic of the torus, `gamma` a rotation
/// with at most one winding about a random axis (or a smooth angle for
/// `U(1)`). Compositions `u o Q` with Fourier test fields stay band-limited,
/// so spectral identities hold to rounding.
pub fn band_limited_grid_state<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, group: StructureGroup) -> CotangentState {
    let source = SourceManifold::periodic_grid(n).expect("valid grid size");
    let nodes = source.nodes().to_vec();
    let ambient = AmbientManifold::torus(dim);
    let directions: &[[i32; 2]] = if dim == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1], [1, -1]] };
    let dir = directions[rng.random_range(0..directions.len())];
    let mut q = DMatrix::zeros(n, dim);
    for j in 0..dim {
        let c = rng.random_range(0.0..2.0 * PI);
        let w = if j < 2 { dir[j] as f64 } else { 0.0 };
        for i in 0..n {
            q[(i, j)] = c + w * nodes[i];
        }
    }
    let mut p = DMatrix::zeros(n, dim);
    for j in 0..dim {
        p.set_column(j, &DVector::from_vec(fourier_field(rng, &nodes, 2, 1.0)));
    }
    let gamma = match group {
        StructureGroup::Circle => {
            let w = rng.random_range(0..2) as f64;
            let f = fourier_field(rng, &nodes, 1, 0.3);
            nodes.iter().zip(f).map(|(x, v)| GroupElement::Circle(w * x + v)).collect()
        }
        StructureGroup::Rotation3 => {
            let a = group.random_element(rng);
            let b = group.random_element(rng);
            let w = rng.random_range(0..2) as f64;
            nodes.iter().map(|x| a * group.exp(&AlgebraElement::new(0.0, 0.0, w * x)) * b).collect()
        }
    };
    let sigma = smooth_coalgebra_field(rng, &nodes, group, 2, 1.0);
    let z = CotangentState::new(source, ambient, group, q, p, gamma, sigma).expect("consistent sample state");
    if z.is_regular(crate::phase::DEFAULT_EPS_REG) {
        z
    } else {
        band_limited_grid_state(rng, n, dim, group)
    }
}
