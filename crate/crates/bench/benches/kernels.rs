use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epaut_core::basis::{left_basis, right_basis};
use epaut_core::dualpair::{left_generators, orthogonality_residual, right_generators};
use epaut_core::momentum::{djr, jr};
use epaut_core::peakon::{peakon_ensemble, step, Kernels, Scheme};
use epaut_core::samples;
use epaut_core::yangmills::{epautvol_rhs, HamiltonianFlow, Observable, PhasePoint, TorusGrid};
use epaut_core::{AlgebraElement, StructureGroup};

fn dual_pair(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z = samples::band_limited_grid_state(&mut rng, 32, 2, StructureGroup::Rotation3);
    let lb = left_basis(&z.ambient, z.group, 8);
    let rb = right_basis(&z.source, z.group, 8);
    c.bench_function("orthogonality N=32 K=8 so3 d=2", |b| {
        b.iter(|| {
            let a = left_generators(&z, &lb);
            let r = right_generators(&z, &rb).unwrap();
            orthogonality_residual(&z, &a, &r)
        })
    });
    c.bench_function("jr N=32 so3 d=2", |b| b.iter(|| jr(&z).unwrap()));
    c.bench_function("djr N=32 K=8 so3 d=2", |b| b.iter(|| djr(&z, &rb).unwrap()));
}

fn peakons(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z = peakon_ensemble(&mut rng, 5, StructureGroup::Rotation3, 0.1);
    let k = Kernels::peakon(1.0, 1.0);
    c.bench_function("peakon midpoint step n=5", |b| b.iter(|| step(&z, 1e-3, &k, Scheme::Midpoint).unwrap()));
    c.bench_function("peakon composition4 step n=5", |b| b.iter(|| step(&z, 1e-3, &k, Scheme::Composition4).unwrap()));
}

fn yang_mills(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = Observable::random(&mut rng, 2, StructureGroup::Rotation3, 0.3);
    let pt = PhasePoint::random(&mut rng, 2, StructureGroup::Rotation3);
    let flow = HamiltonianFlow::new(h, 1.0);
    c.bench_function("hamiltonian flow t=1 so3", |b| b.iter(|| flow.apply(&pt).unwrap()));

    let grid = TorusGrid::new(32, 2).unwrap();
    let u = vec![grid.sample(|x| x[0].sin() * x[1].cos()), grid.sample(|x| -x[0].cos() * x[1].sin())];
    let nu: Vec<AlgebraElement> = (0..grid.len()).map(|i| AlgebraElement::new(grid.point(i)[0].sin(), 0.1, 0.0)).collect();
    c.bench_function("epautvol rhs 32x32 so3", |b| b.iter(|| epautvol_rhs(&grid, StructureGroup::Rotation3, &u, &nu).unwrap()));
}

criterion_group!(benches, dual_pair, peakons, yang_mills);
criterion_main!(benches);
