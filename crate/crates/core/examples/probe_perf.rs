use std::time::Instant;
use sdpinn_core::jet::{Tape, JetAdjoint};
use sdpinn_core::mlp::{init_xavier, Architecture};

fn main() {
    let arch = Architecture::hidden(4, 40).unwrap();
    let params = init_xavier(&arch, 1);
    let points: Vec<(f64, f64)> = (0..2300)
        .map(|i| (-1.0 + 2.0 * (i as f64 / 2300.0), 0.5 * (i as f64 / 2300.0)))
        .collect();
    let mut tape = Tape::new();
    let mut jets = Vec::new();
    let mut grad = vec![0.0; arch.param_count()];
    let adj = vec![JetAdjoint { du: 1.0, du_t: 0.5, du_x: 0.2, du_xx: 0.0, du_xxx: 1.0 }; points.len()];
    tape.forward(params.as_slice(), &arch, &points, &mut jets).unwrap();
    let t0 = Instant::now();
    let iters = 100;
    for _ in 0..iters {
        tape.forward(params.as_slice(), &arch, &points, &mut jets).unwrap();
        grad.iter_mut().for_each(|g| *g = 0.0);
        tape.backward(params.as_slice(), &arch, &adj, &mut grad);
    }
    println!("fwd+bwd: {:.2} ms/eval", t0.elapsed().as_secs_f64() / iters as f64 * 1e3);
}
