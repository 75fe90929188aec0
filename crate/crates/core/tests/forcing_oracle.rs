//! Independent substitution oracle for the forcing closed forms.
//!
//! The exact solutions are re-evaluated in double-double arithmetic, their
//! derivatives taken by central finite differences, and the equation's
//! left-hand side assembled numerically — a route fully separate from the
//! closed-form forcing implementations.

use sdpinn_core::jet::Dd;
use sdpinn_core::problems::Problem;

/// u_kdv in double-double: s² + b·sin(πs) with s = x − 2t.
fn kdv_u(b: f64, x: Dd, t: Dd) -> Dd {
    let s = x.sub(t.mul_f64(2.0));
    s.mul(s).add(Dd::PI.mul(s).sin().mul_f64(b))
}

/// u_nvf in double-double: t·(20·sech(ξ) + ξ²) with ξ = x/t².
fn nvf_u(x: Dd, t: Dd) -> Dd {
    let xi = x.div(t.mul(t));
    t.mul(xi.sech().mul_f64(20.0).add(xi.mul(xi)))
}

struct FdJet {
    u: Dd,
    u_t: Dd,
    u_x: Dd,
    u_xx: Dd,
    u_xxx: Dd,
}

fn fd_jet(u: &dyn Fn(Dd, Dd) -> Dd, x: f64, t: f64, h: f64) -> FdJet {
    let (xd, td, hd) = (Dd::from_f64(x), Dd::from_f64(t), Dd::from_f64(h));
    let f0 = u(xd, td);
    let fxp = u(xd.add(hd), td);
    let fxm = u(xd.sub(hd), td);
    let fxpp = u(xd.add(hd.mul_f64(2.0)), td);
    let fxmm = u(xd.sub(hd.mul_f64(2.0)), td);
    let ftp = u(xd, td.add(hd));
    let ftm = u(xd, td.sub(hd));
    FdJet {
        u: f0,
        u_t: ftp.sub(ftm).div(hd.mul_f64(2.0)),
        u_x: fxp.sub(fxm).div(hd.mul_f64(2.0)),
        u_xx: fxp.sub(f0.mul_f64(2.0)).add(fxm).div(hd.mul(hd)),
        u_xxx: fxpp
            .sub(fxp.mul_f64(2.0))
            .add(fxm.mul_f64(2.0))
            .sub(fxmm)
            .div(hd.mul(hd).mul(hd).mul_f64(2.0)),
    }
}

#[test]
fn kdv_forcing_matches_the_substitution_oracle() {
    for b in [5.0, 20.0] {
        let problem = Problem::kdv(b);
        for i in 0..60 {
            let x = -0.97 + 1.9 * (i % 10) as f64 / 9.0;
            let t = 0.05 + 0.9 * (i / 10) as f64 / 5.0;
            let jet = fd_jet(&|xd, td| kdv_u(b, xd, td), x, t, 1e-5);
            // u_t + u·u_x + u_xxx assembled in double-double.
            let mu_fd = jet.u_t.add(jet.u.mul(jet.u_x)).add(jet.u_xxx).to_f64();
            let mu = problem.forcing(x, t).unwrap();
            let rel = (mu - mu_fd).abs() / mu_fd.abs().max(1e-6);
            assert!(rel < 1e-6, "b={b} at ({x}, {t}): {mu} vs {mu_fd} (rel {rel:.2e})");
        }
    }
}

#[test]
fn nvf_forcing_matches_the_substitution_oracle() {
    let problem = Problem::nvf();
    for i in 0..60 {
        let x = -0.95 + 1.9 * (i % 10) as f64 / 9.0;
        let t = 0.55 + 0.4 * (i / 10) as f64 / 5.0;
        let jet = fd_jet(&nvf_u, x, t, 1e-5);
        // u_t + u·u_x − 3u²u_x² − u³u_xx assembled in double-double.
        let u = jet.u;
        let mu_fd = jet
            .u_t
            .add(u.mul(jet.u_x))
            .sub(u.mul(u).mul(jet.u_x).mul(jet.u_x).mul_f64(3.0))
            .sub(u.mul(u).mul(u).mul(jet.u_xx))
            .to_f64();
        let mu = problem.forcing(x, t).unwrap();
        let rel = (mu - mu_fd).abs() / mu_fd.abs().max(1.0);
        assert!(rel < 1e-6, "at ({x}, {t}): {mu} vs {mu_fd} (rel {rel:.2e})");
    }
}

#[test]
fn exact_jets_match_the_finite_difference_route() {
    for problem in [Problem::kdv(20.0), Problem::nvf()] {
        let u: Box<dyn Fn(Dd, Dd) -> Dd> = match problem.name() {
            "kdv" => Box::new(|x, t| kdv_u(20.0, x, t)),
            _ => Box::new(nvf_u),
        };
        let rect = problem.rect();
        for i in 0..25 {
            let x = rect.x_min + 0.03 + (rect.x_max - rect.x_min - 0.06) * (i % 5) as f64 / 4.0;
            let t = rect.t_min + 0.03 + (rect.t_max - rect.t_min - 0.06) * (i / 5) as f64 / 4.0;
            let fd = fd_jet(&u, x, t, 1e-5);
            let jet = problem.exact_jet(x, t).unwrap();
            for (name, a, b) in [
                ("u", jet.u, fd.u.to_f64()),
                ("u_t", jet.u_t, fd.u_t.to_f64()),
                ("u_x", jet.u_x, fd.u_x.to_f64()),
                ("u_xx", jet.u_xx, fd.u_xx.to_f64()),
                ("u_xxx", jet.u_xxx, fd.u_xxx.to_f64()),
            ] {
                let rel = (a - b).abs() / b.abs().max(1e-3);
                assert!(rel < 1e-5, "{} {name} at ({x}, {t}): {a} vs {b}", problem.name());
            }
        }
    }
}
