//! Taylor-mode automatic differentiation through the network.
//!
//! Every scalar flowing through the network is a truncated polynomial in two
//! nilpotent directions,
//!
//! ```text
//!   c0 + c1·dx + c2·dx² + c3·dx³ + ct·dt      (dx⁴ = dt² = dx·dt = 0)
//! ```
//!
//! seeded at the inputs with `x -> (x, 1, 0, 0; 0)` and `t -> (t, 0, 0, 0; 1)`.
//! The algebra is graded, so dropping the mixed `dxⁱ·dt` monomials is exact
//! for the pure coefficients we extract: `u = c0`, `u_x = c1`, `u_xx = 2·c2`,
//! `u_xxx = 6·c3`, `u_t = ct`. Affine layers act channel-wise and the tanh
//! activation follows the order-3 composition recurrence.
//!
//! Losses built from jets are differentiated with respect to the network
//! parameters by reverse accumulation over all five coefficient channels:
//! [`Tape::forward`] caches pre- and post-activations for a batch of points,
//! [`Tape::backward`] propagates a per-point [`JetAdjoint`] back to the flat
//! parameter gradient. Batches are laid out channel-major (`[n × 5·P]`
//! row-major matrices) so the layer transforms are plain dgemm calls.

mod dd;
mod fd;

pub use dd::Dd;
pub use fd::fd_oracle;

use matrixmultiply::dgemm;

use crate::error::{Error, Result};
use crate::mlp::Architecture;

/// Number of Taylor coefficient channels: value, dx, dx², dx³, dt.
pub(crate) const CHANNELS: usize = 5;

/// Value and input-derivatives of the network output at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    /// Solution value `u`.
    pub u: f64,
    /// First time derivative `u_t`.
    pub u_t: f64,
    /// First space derivative `u_x`.
    pub u_x: f64,
    /// Second space derivative `u_xx`.
    pub u_xx: f64,
    /// Third space derivative `u_xxx`.
    pub u_xxx: f64,
}

impl Jet {
    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.u_t.is_finite()
            && self.u_x.is_finite()
            && self.u_xx.is_finite()
            && self.u_xxx.is_finite()
    }

    /// Named entries, handy for reporting and tolerance checks.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("u", self.u),
            ("u_t", self.u_t),
            ("u_x", self.u_x),
            ("u_xx", self.u_xx),
            ("u_xxx", self.u_xxx),
        ]
    }
}

/// Partial derivatives of a scalar loss with respect to one jet's entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetAdjoint {
    pub du: f64,
    pub du_t: f64,
    pub du_x: f64,
    pub du_xx: f64,
    pub du_xxx: f64,
}

impl JetAdjoint {
    pub const ZERO: JetAdjoint = JetAdjoint {
        du: 0.0,
        du_t: 0.0,
        du_x: 0.0,
        du_xx: 0.0,
        du_xxx: 0.0,
    };
}

/// tanh and its first four derivatives expressed through `y = tanh(z)`.
#[inline]
fn tanh_derivatives(y: f64) -> (f64, f64, f64, f64) {
    let t1 = 1.0 - y * y;
    let t2 = -2.0 * y * t1;
    let t3 = 2.0 * t1 * (2.0 * y * y - t1);
    let t4 = -4.0 * t1 * t2 + 8.0 * y * t1 * t1 + 4.0 * y * y * t2;
    (t1, t2, t3, t4)
}

struct LayerBuf {
    /// Pre-activations, `n_out × 5P` row-major.
    z: Vec<f64>,
    /// Post-activations (tanh of `z`); empty for the output layer.
    a: Vec<f64>,
}

/// Reusable forward cache for a batch of evaluation points.
///
/// One tape per training session; buffers are grown on demand and reused
/// across objective evaluations so the hot path does not allocate.
pub struct Tape {
    n_points: usize,
    a0: Vec<f64>,
    layers: Vec<LayerBuf>,
    /// Ping-pong adjoint buffers for the backward sweep.
    zbar: Vec<f64>,
    abar: Vec<f64>,
}

impl Tape {
    pub fn new() -> Self {
        Self {
            n_points: 0,
            a0: Vec::new(),
            layers: Vec::new(),
            zbar: Vec::new(),
            abar: Vec::new(),
        }
    }

    /// Evaluates jets for all `points`, caching activations for [`Self::backward`].
    pub fn forward(
        &mut self,
        params: &[f64],
        arch: &Architecture,
        points: &[(f64, f64)],
        jets: &mut Vec<Jet>,
    ) -> Result<()> {
        arch.check_params(params)?;
        for &(x, t) in points {
            if !x.is_finite() || !t.is_finite() {
                return Err(Error::Domain(format!("non-finite input point ({x}, {t})")));
            }
        }
        let p = points.len();
        self.n_points = p;
        let cols = CHANNELS * p;

        // Seed the inputs: x -> (x, 1, 0, 0; 0), t -> (t, 0, 0, 0; 1).
        self.a0.clear();
        self.a0.resize(2 * cols, 0.0);
        for (i, &(x, t)) in points.iter().enumerate() {
            self.a0[i] = x;
            self.a0[p + i] = 1.0;
            self.a0[cols + i] = t;
            self.a0[cols + 4 * p + i] = 1.0;
        }

        let n_layers = arch.layer_count();
        while self.layers.len() < n_layers {
            self.layers.push(LayerBuf { z: Vec::new(), a: Vec::new() });
        }

        for l in 0..n_layers {
            let (n_in, n_out) = arch.layer_dims(l);
            let (w, b) = arch.layer_view(params, l);
            let last = l + 1 == n_layers;

            // Split so the input activations of the previous layer can be
            // borrowed while writing this layer's buffers.
            let (done, rest) = self.layers.split_at_mut(l);
            let a_in: &[f64] = if l == 0 { &self.a0 } else { &done[l - 1].a };
            let buf = &mut rest[0];
            buf.z.clear();
            buf.z.resize(n_out * cols, 0.0);

            if p > 0 {
                unsafe {
                    dgemm(
                        n_out,
                        n_in,
                        cols,
                        1.0,
                        w.as_ptr(),
                        n_in as isize,
                        1,
                        a_in.as_ptr(),
                        cols as isize,
                        1,
                        0.0,
                        buf.z.as_mut_ptr(),
                        cols as isize,
                        1,
                    );
                }
            }
            // Biases are constants: they contribute to the value channel only.
            for (j, bj) in b.iter().enumerate() {
                for v in &mut buf.z[j * cols..j * cols + p] {
                    *v += bj;
                }
            }

            if !last {
                buf.a.clear();
                buf.a.resize(n_out * cols, 0.0);
                for j in 0..n_out {
                    let z = &buf.z[j * cols..(j + 1) * cols];
                    let a = &mut buf.a[j * cols..(j + 1) * cols];
                    for i in 0..p {
                        let (z1, z2, z3, zt) = (z[p + i], z[2 * p + i], z[3 * p + i], z[4 * p + i]);
                        let y = z[i].tanh();
                        let (t1, t2, t3, _) = tanh_derivatives(y);
                        a[i] = y;
                        a[p + i] = t1 * z1;
                        a[2 * p + i] = t1 * z2 + 0.5 * t2 * z1 * z1;
                        a[3 * p + i] = t1 * z3 + t2 * z1 * z2 + t3 / 6.0 * z1 * z1 * z1;
                        a[4 * p + i] = t1 * zt;
                    }
                }
            }
        }

        // Output layer is affine with width 1: read the five channels off.
        jets.clear();
        jets.reserve(p);
        let out = &self.layers[n_layers - 1].z;
        for i in 0..p {
            jets.push(Jet {
                u: out[i],
                u_x: out[p + i],
                u_xx: 2.0 * out[2 * p + i],
                u_xxx: 6.0 * out[3 * p + i],
                u_t: out[4 * p + i],
            });
        }
        Ok(())
    }

    /// Reverse-accumulates `sum_i adjoint_i · jet_i` into `grad`.
    ///
    /// `grad` must have the architecture's parameter count and is accumulated
    /// into (callers zero it per evaluation). Must follow a [`Self::forward`]
    /// call with the same `params`, `arch` and point count.
    pub fn backward(
        &mut self,
        params: &[f64],
        arch: &Architecture,
        adjoints: &[JetAdjoint],
        grad: &mut [f64],
    ) {
        let p = self.n_points;
        assert_eq!(adjoints.len(), p, "one adjoint per forward point");
        assert_eq!(grad.len(), arch.param_count());
        let cols = CHANNELS * p;
        if p == 0 {
            return;
        }

        // Seed the output-layer adjoint from the jet entries; the coefficient
        // channels carry c2 = u_xx/2 and c3 = u_xxx/6, hence the factors.
        self.zbar.clear();
        self.zbar.resize(cols, 0.0);
        for (i, adj) in adjoints.iter().enumerate() {
            self.zbar[i] = adj.du;
            self.zbar[p + i] = adj.du_x;
            self.zbar[2 * p + i] = 2.0 * adj.du_xx;
            self.zbar[3 * p + i] = 6.0 * adj.du_xxx;
            self.zbar[4 * p + i] = adj.du_t;
        }

        for l in (0..arch.layer_count()).rev() {
            let (n_in, n_out) = arch.layer_dims(l);
            let (w, _) = arch.layer_view(params, l);
            let off = arch.layer_offset(l);
            let a_in: &[f64] = if l == 0 { &self.a0 } else { &self.layers[l - 1].a };

            // Bias gradient: value channel only.
            for j in 0..n_out {
                let mut s = 0.0;
                for i in 0..p {
                    s += self.zbar[j * cols + i];
                }
                grad[off + n_in * n_out + j] += s;
            }
            // Weight gradient: W̄ += z̄ · a_inᵀ, summed over all channels.
            unsafe {
                dgemm(
                    n_out,
                    cols,
                    n_in,
                    1.0,
                    self.zbar.as_ptr(),
                    cols as isize,
                    1,
                    a_in.as_ptr(),
                    1,
                    cols as isize,
                    1.0,
                    grad[off..off + n_in * n_out].as_mut_ptr(),
                    n_in as isize,
                    1,
                );
            }
            if l == 0 {
                break;
            }
            // Activation adjoint: ā = Wᵀ · z̄.
            self.abar.clear();
            self.abar.resize(n_in * cols, 0.0);
            unsafe {
                dgemm(
                    n_in,
                    n_out,
                    cols,
                    1.0,
                    w.as_ptr(),
                    1,
                    n_in as isize,
                    self.zbar.as_ptr(),
                    cols as isize,
                    1,
                    0.0,
                    self.abar.as_mut_ptr(),
                    cols as isize,
                    1,
                );
            }
            // Pull the adjoint through tanh onto the previous pre-activations.
            let prev = &self.layers[l - 1];
            self.zbar.clear();
            self.zbar.resize(n_in * cols, 0.0);
            for j in 0..n_in {
                let z = &prev.z[j * cols..(j + 1) * cols];
                let y = &prev.a[j * cols..(j + 1) * cols];
                let ab = &self.abar[j * cols..(j + 1) * cols];
                let zb = &mut self.zbar[j * cols..(j + 1) * cols];
                for i in 0..p {
                    let (z1, z2, z3, zt) = (z[p + i], z[2 * p + i], z[3 * p + i], z[4 * p + i]);
                    let (t1, t2, t3, t4) = tanh_derivatives(y[i]);
                    let (a0, a1, a2, a3, at) =
                        (ab[i], ab[p + i], ab[2 * p + i], ab[3 * p + i], ab[4 * p + i]);
                    let d2_z0 = t2 * z2 + 0.5 * t3 * z1 * z1;
                    let d3_z0 = t2 * z3 + t3 * z1 * z2 + t4 / 6.0 * z1 * z1 * z1;
                    zb[i] = a0 * t1 + a1 * t2 * z1 + a2 * d2_z0 + a3 * d3_z0 + at * t2 * zt;
                    zb[p + i] = a1 * t1 + a2 * t2 * z1 + a3 * d2_z0;
                    zb[2 * p + i] = a2 * t1 + a3 * t2 * z1;
                    zb[3 * p + i] = a3 * t1;
                    zb[4 * p + i] = at * t1;
                }
            }
        }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// Exact (to machine precision) value and partials of the network at one point.
pub fn jet_eval(params: &[f64], arch: &Architecture, x: f64, t: f64) -> Result<Jet> {
    let mut tape = Tape::new();
    let mut jets = Vec::with_capacity(1);
    tape.forward(params, arch, &[(x, t)], &mut jets)?;
    Ok(jets[0])
}

/// Jets at many points without retaining the cache.
pub fn jet_eval_batch(params: &[f64], arch: &Architecture, points: &[(f64, f64)]) -> Result<Vec<Jet>> {
    let mut tape = Tape::new();
    let mut jets = Vec::with_capacity(points.len());
    tape.forward(params, arch, points, &mut jets)?;
    Ok(jets)
}

/// A scalar loss built from batched jets and, possibly, the raw parameters.
///
/// `eval` receives the jets at [`Self::points`] and the full parameter slice
/// (which may extend past the network parameters, e.g. with an inverse-problem
/// scalar). It returns the loss value, fills `jet_adjoints[i]` with the
/// loss derivative with respect to `jets[i]`, and accumulates any direct
/// parameter dependence into `param_grad`.
pub trait BatchObjective {
    fn points(&self) -> &[(f64, f64)];
    fn eval(
        &self,
        jets: &[Jet],
        params: &[f64],
        jet_adjoints: &mut [JetAdjoint],
        param_grad: &mut [f64],
    ) -> f64;
}

/// Loss value and full parameter gradient of a jet-based objective.
///
/// `params` must start with the network parameters for `arch`; any trailing
/// entries are auxiliary scalars visible to the objective. The gradient has
/// the same length as `params`.
pub fn loss_gradient(
    arch: &Architecture,
    params: &[f64],
    objective: &dyn BatchObjective,
) -> Result<(f64, Vec<f64>)> {
    let n_net = arch.param_count();
    if params.len() < n_net {
        return Err(Error::Config(format!(
            "parameter vector has length {}, needs at least {n_net}",
            params.len()
        )));
    }
    let net = &params[..n_net];
    let mut tape = Tape::new();
    let mut jets = Vec::new();
    tape.forward(net, arch, objective.points(), &mut jets)?;

    let mut grad = vec![0.0; params.len()];
    let mut adjoints = vec![JetAdjoint::ZERO; jets.len()];
    let loss = objective.eval(&jets, params, &mut adjoints, &mut grad);
    tape.backward(net, arch, &adjoints, &mut grad[..n_net]);

    if !loss.is_finite() {
        return Err(Error::Numerical(format!("loss evaluated to {loss}")));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "gradient entry {i} evaluated to {}",
            grad[i]
        )));
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{init_xavier, ParameterVector};

    fn tanh_x_net() -> (Architecture, ParameterVector) {
        let arch = Architecture::new(vec![2, 1, 1]).unwrap();
        (arch, ParameterVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0]))
    }

    #[test]
    fn tanh_net_jet_at_origin() {
        let (arch, params) = tanh_x_net();
        let jet = jet_eval(params.as_slice(), &arch, 0.0, 0.0).unwrap();
        assert!((jet.u - 0.0).abs() < 1e-15);
        assert!((jet.u_t - 0.0).abs() < 1e-15);
        assert!((jet.u_x - 1.0).abs() < 1e-15);
        assert!((jet.u_xx - 0.0).abs() < 1e-15);
        // tanh'''(0) = -2
        assert!((jet.u_xxx - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_network_has_zero_jet() {
        let arch = Architecture::hidden(3, 7).unwrap();
        let params = ParameterVector::zeros(arch.param_count());
        let jet = jet_eval(params.as_slice(), &arch, 0.3, 0.8).unwrap();
        assert_eq!(jet, Jet::default());
    }

    #[test]
    fn time_independent_network_has_zero_u_t() {
        // tanh(x) toy net ignores t entirely.
        let (arch, params) = tanh_x_net();
        for &(x, t) in &[(0.1, 0.9), (-0.7, 0.2), (1.3, -2.0)] {
            let jet = jet_eval(params.as_slice(), &arch, x, t).unwrap();
            assert_eq!(jet.u_t, 0.0);
        }
    }

    #[test]
    fn jet_value_matches_plain_forward() {
        let arch = Architecture::hidden(4, 40).unwrap();
        let params = init_xavier(&arch, 3);
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..1000 {
            let (x, t) = (next(), 0.5 * (next() + 1.0));
            let jet = jet_eval(params.as_slice(), &arch, x, t).unwrap();
            let u = crate::mlp::forward(params.as_slice(), &arch, x, t).unwrap();
            assert_eq!(jet.u, u, "jet value and forward must share the result");
        }
    }

    #[test]
    fn doubling_output_weights_doubles_the_jet() {
        let arch = Architecture::hidden(2, 6).unwrap();
        let params = init_xavier(&arch, 11);
        let mut doubled = params.clone();
        let last = arch.layer_count() - 1;
        let off = arch.layer_offset(last);
        for v in &mut doubled.values[off..] {
            *v *= 2.0;
        }
        let j1 = jet_eval(params.as_slice(), &arch, 0.4, 0.6).unwrap();
        let j2 = jet_eval(doubled.as_slice(), &arch, 0.4, 0.6).unwrap();
        for ((_, a), (_, b)) in j1.entries().iter().zip(j2.entries().iter()) {
            assert!((2.0 * a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }

    #[test]
    fn batch_matches_single_point_evaluation() {
        let arch = Architecture::hidden(3, 9).unwrap();
        let params = init_xavier(&arch, 21);
        let points: Vec<(f64, f64)> = (0..17)
            .map(|i| (-1.0 + 0.11 * i as f64, 0.05 * i as f64))
            .collect();
        let jets = jet_eval_batch(params.as_slice(), &arch, &points).unwrap();
        for (i, &(x, t)) in points.iter().enumerate() {
            let single = jet_eval(params.as_slice(), &arch, x, t).unwrap();
            assert_eq!(jets[i], single);
        }
    }

    #[test]
    fn non_finite_input_is_a_domain_error() {
        let (arch, params) = tanh_x_net();
        assert!(matches!(
            jet_eval(params.as_slice(), &arch, f64::NAN, 0.0),
            Err(Error::Domain(_))
        ));
    }

    struct HalfNormSquared;
    impl BatchObjective for HalfNormSquared {
        fn points(&self) -> &[(f64, f64)] {
            &[]
        }
        fn eval(
            &self,
            _jets: &[Jet],
            params: &[f64],
            _jet_adjoints: &mut [JetAdjoint],
            param_grad: &mut [f64],
        ) -> f64 {
            for (g, p) in param_grad.iter_mut().zip(params) {
                *g += p;
            }
            0.5 * params.iter().map(|p| p * p).sum::<f64>()
        }
    }

    #[test]
    fn quadratic_objective_gradient_is_identity() {
        let arch = Architecture::new(vec![2, 2, 1]).unwrap();
        let params = init_xavier(&arch, 5);
        let (loss, grad) = loss_gradient(&arch, params.as_slice(), &HalfNormSquared).unwrap();
        let expect = 0.5 * params.values.iter().map(|p| p * p).sum::<f64>();
        assert!((loss - expect).abs() < 1e-15);
        assert_eq!(grad, params.values);
    }

    struct Constant;
    impl BatchObjective for Constant {
        fn points(&self) -> &[(f64, f64)] {
            &[]
        }
        fn eval(&self, _: &[Jet], _: &[f64], _: &mut [JetAdjoint], _: &mut [f64]) -> f64 {
            3.5
        }
    }

    #[test]
    fn constant_objective_has_zero_gradient() {
        let arch = Architecture::new(vec![2, 2, 1]).unwrap();
        let params = init_xavier(&arch, 6);
        let (loss, grad) = loss_gradient(&arch, params.as_slice(), &Constant).unwrap();
        assert_eq!(loss, 3.5);
        assert!(grad.iter().all(|&g| g == 0.0));
    }
}
