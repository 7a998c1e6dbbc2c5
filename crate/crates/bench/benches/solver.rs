use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array2;
use tdsr_core::{
    DomainSpec, EtdCoefficients, GradientFlow, ModelKind, ModelSpec, NeumannModel, PeriodicModel, SolverControls,
    StepGeometry, StepHistory, TdsrSolver,
};

const DT: f64 = 1e-3;

fn primed<M: GradientFlow>(model: M, phi0: Array2<M::Coef>) -> (TdsrSolver<M>, StepHistory<M::Coef>) {
    let mut solver = TdsrSolver::new(model, SolverControls::default());
    let mut history = solver.initial_history(phi0, 0.0).unwrap();
    for order in 0..2 {
        solver.step(&mut history, DT, order).unwrap();
    }
    (solver, history)
}

fn bench_step<M: GradientFlow>(
    c: &mut Criterion,
    name: &str,
    solver: &mut TdsrSolver<M>,
    history: &StepHistory<M::Coef>,
) {
    c.bench_function(name, |b| {
        b.iter_batched(
            || history.clone(),
            |mut h| solver.step(&mut h, DT, 2).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn periodic_steps(c: &mut Criterion) {
    for (kind, nodes) in [
        (ModelKind::AllenCahn, 128),
        (ModelKind::MbeSlope, 128),
        (ModelKind::Pfc, 256),
    ] {
        let length = if kind == ModelKind::Pfc { 32.0 } else { 2.0 * PI };
        let spec = ModelSpec::new(kind, 0.01, DomainSpec::Periodic { length, nodes });
        let model = PeriodicModel::new(spec).unwrap();
        let k = 2.0 * PI / length;
        let u = model
            .space()
            .grid()
            .sample(|x, y| 0.1 * (2.0 * k * x).sin() * (3.0 * k * y).cos());
        let phi0 = model.from_nodal(&u).unwrap();
        let (mut solver, history) = primed(model, phi0);
        bench_step(
            c,
            &format!("etd3 step {} n={nodes}", kind.name()),
            &mut solver,
            &history,
        );
    }
}

fn neumann_step(c: &mut Criterion) {
    let degree = 64;
    let spec = ModelSpec::new(
        ModelKind::CahnHilliard,
        2.5e-3,
        DomainSpec::Neumann {
            a: -1.0,
            b: 1.0,
            degree,
        },
    );
    let model = NeumannModel::new(spec).unwrap();
    let x = model.coordinates();
    let u = Array2::from_shape_fn((x.len(), x.len()), |(i, j)| {
        0.1 * (PI * x[i]).cos() * (2.0 * PI * x[j]).cos()
    });
    let phi0 = model.from_nodal(&u).unwrap();
    let (mut solver, history) = primed(model, phi0);
    bench_step(
        c,
        &format!("etd3 step cahn-hilliard degree={degree}"),
        &mut solver,
        &history,
    );
}

fn coefficients(c: &mut Criterion) {
    let symbols = Array2::from_shape_fn((256, 256), |(i, j)| -((i * i + j * j) as f64));
    let geom = StepGeometry::new(DT, 0.7, 2).unwrap();
    c.bench_function("etd3 coefficients 256x256", |b| {
        b.iter(|| EtdCoefficients::new(geom, &symbols).unwrap())
    });
}

criterion_group!(benches, periodic_steps, neumann_step, coefficients);
criterion_main!(benches);
