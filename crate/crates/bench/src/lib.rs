//! Shared setup helpers for the kernel benchmarks.

use sdpinn_core::mlp::{init_xavier, Architecture, ParameterVector};

/// The network shape used by the KdV experiments.
pub fn kdv_net() -> (Architecture, ParameterVector) {
    let arch = Architecture::hidden(4, 40).unwrap();
    let params = init_xavier(&arch, 7);
    (arch, params)
}

/// A batch of collocation-like points covering the KdV rectangle.
pub fn kdv_points(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let a = i as f64 / n as f64;
            (-1.0 + 2.0 * a, (a * 7.0).fract())
        })
        .collect()
}
