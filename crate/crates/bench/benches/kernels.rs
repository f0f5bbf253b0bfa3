use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qphase_bench::{coherent, oscillator};
use qphase_core::dynamics::{Dynamics, Propagator, QRefresh};
use qphase_core::fermi::{fermi_operator_residual, fermi_set_quadratic};
use qphase_core::states::{Potential, StateSpec};
use qphase_core::symplectic::{capacity_quadratic, random_positive_definite, williamson_spectrum, QuadraticForm};
use qphase_core::wavefield::quantum_potential;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn fields(c: &mut Criterion) {
    let mut group = c.benchmark_group("quantum_potential");
    for n in [16, 32, 64] {
        let wf = coherent(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &wf, |b, wf| {
            b.iter(|| quantum_potential(black_box(wf)).unwrap())
        });
    }
    group.finish();

    let wf = oscillator(3);
    c.bench_function("fermi_operator_residual/1d", |b| b.iter(|| fermi_operator_residual(black_box(&wf)).unwrap()));
}

fn propagation(c: &mut Criterion) {
    let harmonic = Potential::Harmonic { mass: 1.0, omega: 1.0 };
    let wf = coherent(32);
    let mut group = c.benchmark_group("step_32cubed");
    for (name, dynamics) in [
        ("schrodinger", Dynamics::Schrodinger),
        ("classical_half_step", Dynamics::Classical(QRefresh::HalfStep)),
    ] {
        let mut prop = Propagator::new(wf.grid(), wf.params(), &harmonic, dynamics).unwrap();
        let mut psi = wf.psi().to_vec();
        group.bench_function(name, |b| b.iter(|| prop.step(black_box(&mut psi), 1e-3).unwrap()));
    }
    group.finish();
}

fn geometry(c: &mut Criterion) {
    let set = fermi_set_quadratic(&StateSpec::coherent3d(1.0)).unwrap();
    c.bench_function("capacity/coherent", |b| b.iter(|| capacity_quadratic(black_box(&set.form)).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let q = QuadraticForm::new(random_positive_definite(6, 0.5, &mut rng), 1.0).unwrap();
    c.bench_function("williamson/n3", |b| b.iter(|| williamson_spectrum(black_box(&q)).unwrap()));
}

criterion_group!(benches, fields, propagation, geometry);
criterion_main!(benches);
