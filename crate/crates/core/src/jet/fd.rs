//! Finite-difference oracle for the jet entries.
//!
//! Independent of the Taylor-mode path in every way that matters: the network
//! is re-evaluated in double-double arithmetic at stencil points and the five
//! partials are formed from central differences (5-point stencil for u_xxx).
//! With the function values accurate to ~1e-31 the stencil error is pure
//! truncation, O(h²) with the solution's higher derivatives as constants.

use super::dd::Dd;
use super::Jet;
use crate::error::{Error, Result};
use crate::mlp::Architecture;

/// Network forward pass in double-double arithmetic.
fn forward_dd(params: &[f64], arch: &Architecture, x: Dd, t: Dd) -> Dd {
    let mut act = vec![x, t];
    let mut next: Vec<Dd> = Vec::new();
    for l in 0..arch.layer_count() {
        let (n_in, n_out) = arch.layer_dims(l);
        let (w, b) = arch.layer_view(params, l);
        next.clear();
        for j in 0..n_out {
            let mut z = Dd::from_f64(b[j]);
            for i in 0..n_in {
                z = z.add(act[i].mul_f64(w[j * n_in + i]));
            }
            next.push(if l + 1 == arch.layer_count() { z } else { z.tanh() });
        }
        std::mem::swap(&mut act, &mut next);
    }
    act[0]
}

/// Central finite differences for the same five partials as [`super::jet_eval`].
///
/// u_x and u_t use the 2-point central stencil, u_xx the 3-point stencil and
/// u_xxx the 5-point stencil `[f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)] / 2h³`.
pub fn fd_oracle(params: &[f64], arch: &Architecture, x: f64, t: f64, h: f64) -> Result<Jet> {
    arch.check_params(params)?;
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let f = |xx: Dd, tt: Dd| forward_dd(params, arch, xx, tt);
    let xd = Dd::from_f64(x);
    let td = Dd::from_f64(t);
    let hd = Dd::from_f64(h);

    let f0 = f(xd, td);
    let fxp = f(xd.add(hd), td);
    let fxm = f(xd.sub(hd), td);
    let fxpp = f(xd.add(hd.mul_f64(2.0)), td);
    let fxmm = f(xd.sub(hd.mul_f64(2.0)), td);
    let ftp = f(xd, td.add(hd));
    let ftm = f(xd, td.sub(hd));

    let two_h = hd.mul_f64(2.0);
    let h2 = hd.mul(hd);
    let two_h3 = h2.mul(hd).mul_f64(2.0);

    let u_x = fxp.sub(fxm).div(two_h);
    let u_t = ftp.sub(ftm).div(two_h);
    let u_xx = fxp.sub(f0.mul_f64(2.0)).add(fxm).div(h2);
    let u_xxx = fxpp
        .sub(fxp.mul_f64(2.0))
        .add(fxm.mul_f64(2.0))
        .sub(fxmm)
        .div(two_h3);

    Ok(Jet {
        u: f0.to_f64(),
        u_t: u_t.to_f64(),
        u_x: u_x.to_f64(),
        u_xx: u_xx.to_f64(),
        u_xxx: u_xxx.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::ParameterVector;

    #[test]
    fn tanh_net_third_derivative_at_origin() {
        let arch = Architecture::new(vec![2, 1, 1]).unwrap();
        let params = ParameterVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0]);
        let jet = fd_oracle(params.as_slice(), &arch, 0.0, 0.0, 1e-4).unwrap();
        assert!((jet.u_xxx + 2.0).abs() < 1e-6, "u_xxx = {}", jet.u_xxx);
        assert!(jet.u.abs() < 1e-12);
        assert!((jet.u_x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_network_is_identically_zero() {
        let arch = Architecture::hidden(2, 3).unwrap();
        let params = ParameterVector::zeros(arch.param_count());
        let jet = fd_oracle(params.as_slice(), &arch, 0.2, 0.7, 1e-4).unwrap();
        assert_eq!(jet, Jet::default());
    }

    #[test]
    fn rejects_non_positive_step() {
        let arch = Architecture::hidden(2, 3).unwrap();
        let params = ParameterVector::zeros(arch.param_count());
        assert!(fd_oracle(params.as_slice(), &arch, 0.0, 0.0, 0.0).is_err());
    }
}
