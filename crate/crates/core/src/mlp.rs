//! Fully-connected tanh network: architecture, Xavier initialization and the
//! plain forward pass.
//!
//! Parameters live in a single flat vector, layer by layer: the weight matrix
//! of each layer in row-major order, followed by that layer's biases. All
//! derivative work is done in [`crate::jet`]; this module only evaluates the
//! network value.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Layer widths of a fully-connected network, e.g. `[2, 40, 40, 40, 40, 1]`.
///
/// The input width is fixed at 2 (space `x` and time `t`), the output width
/// at 1, and at least one hidden layer is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    widths: Vec<usize>,
}

impl Architecture {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::Config(format!(
                "architecture needs at least one hidden layer, got widths {widths:?}"
            )));
        }
        if widths[0] != 2 || *widths.last().unwrap() != 1 {
            return Err(Error::Config(format!(
                "architecture must map 2 inputs (x, t) to 1 output, got widths {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::Config(format!(
                "all layer widths must be positive, got {widths:?}"
            )));
        }
        Ok(Self { widths })
    }

    /// `depth` hidden layers of `width` neurons each.
    pub fn hidden(depth: usize, width: usize) -> Result<Self> {
        let mut widths = Vec::with_capacity(depth + 2);
        widths.push(2);
        widths.extend(std::iter::repeat_n(width, depth));
        widths.push(1);
        Self::new(widths)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    /// Number of affine layers (= number of weight matrices).
    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// Input and output width of affine layer `l`.
    pub fn layer_dims(&self, l: usize) -> (usize, usize) {
        (self.widths[l], self.widths[l + 1])
    }

    /// Total parameter count: sum over layers of `n_in * n_out + n_out`.
    pub fn param_count(&self) -> usize {
        (0..self.layer_count())
            .map(|l| {
                let (n_in, n_out) = self.layer_dims(l);
                n_in * n_out + n_out
            })
            .sum()
    }

    /// Offset of layer `l`'s weights in the flat parameter vector.
    pub(crate) fn layer_offset(&self, l: usize) -> usize {
        (0..l)
            .map(|k| {
                let (n_in, n_out) = self.layer_dims(k);
                n_in * n_out + n_out
            })
            .sum()
    }

    /// Weight matrix and bias slices of layer `l`.
    pub fn layer_view<'a>(&self, params: &'a [f64], l: usize) -> (&'a [f64], &'a [f64]) {
        let (n_in, n_out) = self.layer_dims(l);
        let off = self.layer_offset(l);
        (
            &params[off..off + n_in * n_out],
            &params[off + n_in * n_out..off + n_in * n_out + n_out],
        )
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Config(format!(
                "parameter vector has length {}, architecture {:?} needs {}",
                params.len(),
                self.widths,
                self.param_count()
            )));
        }
        Ok(())
    }
}

/// Flattened trainable weights and biases of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Splits the flat vector into per-layer (weights, biases) views.
    pub fn unflatten<'a>(&'a self, arch: &Architecture) -> Result<Vec<(&'a [f64], &'a [f64])>> {
        arch.check_params(&self.values)?;
        Ok((0..arch.layer_count())
            .map(|l| arch.layer_view(&self.values, l))
            .collect())
    }

    /// Rebuilds the flat vector from per-layer weight and bias slices.
    pub fn flatten(arch: &Architecture, layers: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        if layers.len() != arch.layer_count() {
            return Err(Error::Config(format!(
                "expected {} layers, got {}",
                arch.layer_count(),
                layers.len()
            )));
        }
        let mut values = Vec::with_capacity(arch.param_count());
        for (l, (w, b)) in layers.iter().enumerate() {
            let (n_in, n_out) = arch.layer_dims(l);
            if w.len() != n_in * n_out || b.len() != n_out {
                return Err(Error::Config(format!(
                    "layer {l} shape mismatch: got {}x{} weights, {} biases",
                    w.len() / n_in.max(1),
                    n_in,
                    b.len()
                )));
            }
            values.extend_from_slice(w);
            values.extend_from_slice(b);
        }
        Ok(Self { values })
    }
}

/// Xavier/Glorot uniform initialization: weights drawn from
/// `U(-sqrt(6/(n_in+n_out)), +sqrt(6/(n_in+n_out)))` per layer, biases zero.
///
/// Deterministic for a given seed; the generator is a portable ChaCha stream
/// so stored seeds replay identically across platforms.
pub fn init_xavier(arch: &Architecture, seed: u64) -> ParameterVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(arch.param_count());
    for l in 0..arch.layer_count() {
        let (n_in, n_out) = arch.layer_dims(l);
        let bound = (6.0 / (n_in + n_out) as f64).sqrt();
        for _ in 0..n_in * n_out {
            values.push(rng.random_range(-bound..bound));
        }
        values.extend(std::iter::repeat_n(0.0, n_out));
    }
    ParameterVector { values }
}

/// Plain forward evaluation of the network value `u(x, t)`.
///
/// Shares the evaluation path with [`crate::jet::jet_eval`], so the returned
/// value equals the jet's `u` entry bit for bit.
pub fn forward(params: &[f64], arch: &Architecture, x: f64, t: f64) -> Result<f64> {
    Ok(crate::jet::jet_eval(params, arch, x, t)?.u)
}

/// Forward evaluation over many points; used for stitching solution grids.
pub fn forward_batch(params: &[f64], arch: &Architecture, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    let mut tape = crate::jet::Tape::new();
    let mut jets = Vec::new();
    let mut out = Vec::with_capacity(points.len());
    for chunk in points.chunks(2048) {
        tape.forward(params, arch, chunk, &mut jets)?;
        out.extend(jets.iter().map(|j| j.u));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single hidden neuron computing tanh(x): w = [1, 0], b = 0, output
    /// weight 1, output bias 0.
    pub(crate) fn tanh_x_net() -> (Architecture, ParameterVector) {
        let arch = Architecture::new(vec![2, 1, 1]).unwrap();
        let params = ParameterVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0]);
        (arch, params)
    }

    #[test]
    fn param_count_matches_formula() {
        let arch = Architecture::hidden(4, 40).unwrap();
        // 2*40+40 + 3*(40*40+40) + 40*1+1
        assert_eq!(arch.param_count(), 5081);
    }

    #[test]
    fn xavier_is_deterministic_and_bounded() {
        let arch = Architecture::hidden(4, 40).unwrap();
        let a = init_xavier(&arch, 7);
        let b = init_xavier(&arch, 7);
        assert_eq!(a, b);
        let c = init_xavier(&arch, 8);
        assert_ne!(a, c);

        for l in 0..arch.layer_count() {
            let (n_in, n_out) = arch.layer_dims(l);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            let (w, biases) = arch.layer_view(a.as_slice(), l);
            assert!(w.iter().all(|v| v.abs() <= bound));
            assert!(biases.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_parameters_evaluate_to_zero() {
        let arch = Architecture::hidden(2, 5).unwrap();
        let params = ParameterVector::zeros(arch.param_count());
        let u = forward(params.as_slice(), &arch, 0.3, -0.7).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn toy_net_is_tanh_of_x() {
        let (arch, params) = tanh_x_net();
        let u = forward(params.as_slice(), &arch, 0.5, 0.9).unwrap();
        assert!((u - 0.5f64.tanh()).abs() < 1e-15);
        assert!((u - 0.46211715726000974).abs() < 1e-12);
    }

    #[test]
    fn flatten_unflatten_round_trips() {
        let arch = Architecture::new(vec![2, 3, 2, 1]).unwrap();
        let params = init_xavier(&arch, 42);
        let views = params.unflatten(&arch).unwrap();
        let layers: Vec<(Vec<f64>, Vec<f64>)> =
            views.iter().map(|(w, b)| (w.to_vec(), b.to_vec())).collect();
        let rebuilt = ParameterVector::flatten(&arch, &layers).unwrap();
        assert_eq!(params, rebuilt);
    }

    #[test]
    fn shape_mismatch_is_a_config_error() {
        let arch = Architecture::hidden(2, 4).unwrap();
        let params = ParameterVector::zeros(arch.param_count() - 1);
        assert!(matches!(
            forward(params.as_slice(), &arch, 0.0, 0.0),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn invalid_architectures_are_rejected() {
        assert!(Architecture::new(vec![2, 1]).is_err());
        assert!(Architecture::new(vec![3, 4, 1]).is_err());
        assert!(Architecture::new(vec![2, 4, 2]).is_err());
        assert!(Architecture::new(vec![2, 0, 1]).is_err());
    }
}
