use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use sdpinn_bench::{kdv_net, kdv_points};
use sdpinn_core::geometry::partition;
use sdpinn_core::jet::{jet_eval, JetAdjoint, Tape};
use sdpinn_core::lbfgs::{minimize, OptimConfig};
use sdpinn_core::problems::Problem;
use sdpinn_core::symmetry::kdv_translation;

fn bench_jets(c: &mut Criterion) {
    let (arch, params) = kdv_net();
    let points = kdv_points(2000);

    c.bench_function("jet_eval_single", |b| {
        b.iter(|| jet_eval(params.as_slice(), &arch, 0.3, 0.4).unwrap())
    });

    let mut group = c.benchmark_group("taylor_batch");
    group.throughput(Throughput::Elements(points.len() as u64));
    group.bench_function("forward_2000", |b| {
        let mut tape = Tape::new();
        let mut jets = Vec::new();
        b.iter(|| tape.forward(params.as_slice(), &arch, &points, &mut jets).unwrap())
    });
    group.bench_function("forward_backward_2000", |b| {
        let mut tape = Tape::new();
        let mut jets = Vec::new();
        let mut grad = vec![0.0; arch.param_count()];
        let adjoints =
            vec![JetAdjoint { du: 1.0, du_t: 0.5, du_x: 0.2, du_xx: 0.1, du_xxx: 1.0 }; points.len()];
        b.iter(|| {
            tape.forward(params.as_slice(), &arch, &points, &mut jets).unwrap();
            grad.iter_mut().for_each(|g| *g = 0.0);
            tape.backward(params.as_slice(), &arch, &adjoints, &mut grad);
        })
    });
    group.finish();
}

fn bench_lbfgs(c: &mut Criterion) {
    c.bench_function("lbfgs_rosenbrock", |b| {
        let obj = |p: &[f64], g: &mut [f64]| {
            let (x, y) = (p[0], p[1]);
            g[0] = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
            g[1] = 200.0 * (y - x * x);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        b.iter(|| minimize(obj, &[-1.2, 1.0], &OptimConfig::default()).unwrap())
    });
}

fn bench_geometry(c: &mut Criterion) {
    let problem = Problem::kdv(20.0);
    let part = partition(problem.rect(), &kdv_translation(), &[-0.5]).unwrap();
    let triangle = part.subdomains[0].clone();

    c.bench_function("lhs_rejection_2000", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                seed
            },
            |s| triangle.sample_collocation_lhs(2000, s).unwrap(),
            BatchSize::SmallInput,
        )
    });

    c.bench_function("forcing_kdv", |b| {
        b.iter(|| problem.forcing(0.37, 0.61).unwrap())
    });
}

criterion_group!(benches, bench_jets, bench_lbfgs, bench_geometry);
criterion_main!(benches);
