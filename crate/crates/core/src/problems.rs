//! The two benchmark problems with manufactured solutions.
//!
//! Both equations are forced so that a chosen closed-form solution holds
//! exactly; the forcing, initial/boundary data and error grids all derive
//! from that solution.
//!
//! * KdV: `u_t + λ·u·u_x + u_xxx = μ(x, t)` on `[-1, 1] × [0, 1]` with
//!   solution `u = s² + b·sin(πs)`, `s = x − 2t` (forward problems use
//!   λ = 1; the inverse problem recovers λ). Admits the translation group
//!   `(x, t, u) -> (x + 2ε, t + ε, u)`.
//! * NVF: `u_t + u·u_x − (u³·u_x)_x = μ(x, t)` on `[-1, 1] × [0.5, 1]` with
//!   solution `u = t·F(x/t²)`, `F(ξ) = 20·sech(ξ) + ξ²`. Admits the scaling
//!   group `(x, t, u) -> (ε²x, εt, εu)`.
//!
//! The conservative NVF term is expanded as `(u³u_x)_x = 3u²u_x² + u³u_xx`
//! so the residual needs nothing beyond the jet entries.

use crate::error::{Error, Result};
use crate::geometry::DomainRect;
use crate::jet::{Jet, JetAdjoint};
use crate::symmetry::{kdv_translation, nvf_scaling, SymmetryGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Kdv,
    Nvf,
}

/// A PDE benchmark: rectangle, exact solution, forcing, residual and the
/// attached symmetry group.
#[derive(Debug, Clone)]
pub struct Problem {
    kind: ProblemKind,
    rect: DomainRect,
    /// Solution amplitude `b` (KdV only).
    amplitude: f64,
    group: SymmetryGroup,
}

impl Problem {
    /// Forced KdV with solution amplitude `b`.
    pub fn kdv(b: f64) -> Problem {
        Problem {
            kind: ProblemKind::Kdv,
            rect: DomainRect::new(-1.0, 1.0, 0.0, 1.0).unwrap(),
            amplitude: b,
            group: kdv_translation(),
        }
    }

    /// Forced nonlinear-viscous-fluid equation.
    pub fn nvf() -> Problem {
        Problem {
            kind: ProblemKind::Nvf,
            rect: DomainRect::new(-1.0, 1.0, 0.5, 1.0).unwrap(),
            amplitude: 0.0,
            group: nvf_scaling(),
        }
    }

    pub fn by_name(name: &str, b: f64) -> Result<Problem> {
        match name {
            "kdv" => Ok(Problem::kdv(b)),
            "nvf" => Ok(Problem::nvf()),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProblemKind::Kdv => "kdv",
            ProblemKind::Nvf => "nvf",
        }
    }

    pub fn rect(&self) -> DomainRect {
        self.rect
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    /// Whether the parameter λ multiplies a term of this problem's residual
    /// (only the KdV advection term carries it).
    pub fn supports_inverse(&self) -> bool {
        self.kind == ProblemKind::Kdv
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if self.kind == ProblemKind::Nvf && t == 0.0 {
            return Err(Error::Domain("the NVF solution t·F(x/t²) is undefined at t = 0".into()));
        }
        Ok(())
    }

    /// Closed-form exact solution.
    pub fn exact_solution(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.kind {
            ProblemKind::Kdv => {
                let s = x - 2.0 * t;
                s * s + self.amplitude * (std::f64::consts::PI * s).sin()
            }
            ProblemKind::Nvf => {
                let xi = x / (t * t);
                t * (20.0 * sech(xi) + xi * xi)
            }
        })
    }

    /// Exact jet from closed-form derivatives of the manufactured solution.
    pub fn exact_jet(&self, x: f64, t: f64) -> Result<Jet> {
        self.check_time(t)?;
        Ok(match self.kind {
            ProblemKind::Kdv => {
                let pi = std::f64::consts::PI;
                let b = self.amplitude;
                let s = x - 2.0 * t;
                let u_x = 2.0 * s + b * pi * (pi * s).cos();
                Jet {
                    u: s * s + b * (pi * s).sin(),
                    u_x,
                    u_xx: 2.0 - b * pi * pi * (pi * s).sin(),
                    u_xxx: -b * pi * pi * pi * (pi * s).cos(),
                    u_t: -2.0 * u_x,
                }
            }
            ProblemKind::Nvf => {
                let xi = x / (t * t);
                let (f, f1, f2, f3) = nvf_profile(xi);
                Jet {
                    u: t * f,
                    u_x: f1 / t,
                    u_xx: f2 / (t * t * t),
                    u_xxx: f3 / t.powi(5),
                    u_t: f - 2.0 * xi * f1,
                }
            }
        })
    }

    /// Forcing μ(x, t) obtained by substituting the exact solution into the
    /// equation's left-hand side, in closed form.
    pub fn forcing(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.kind {
            ProblemKind::Kdv => {
                let pi = std::f64::consts::PI;
                let b = self.amplitude;
                let s = x - 2.0 * t;
                let u = s * s + b * (pi * s).sin();
                // u_t + u·u_x + u_xxx with u_t = -2·u_x:
                (u - 2.0) * (2.0 * s + b * pi * (pi * s).cos()) - b * pi * pi * pi * (pi * s).cos()
            }
            ProblemKind::Nvf => {
                // With u = t·F(ξ), ξ = x/t², the left-hand side collapses to
                // a function of ξ alone: F − 2ξF' + FF' − 3F²F'² − F³F''.
                let xi = x / (t * t);
                let (f, f1, f2, _) = nvf_profile(xi);
                f - 2.0 * xi * f1 + f * f1 - 3.0 * f * f * f1 * f1 - f * f * f * f2
            }
        })
    }

    /// PDE residual of a jet at `(x, t)`; forward problems use λ = 1.
    pub fn residual(&self, jet: &Jet, x: f64, t: f64, lambda: f64) -> Result<f64> {
        let mu = self.forcing(x, t)?;
        Ok(match self.kind {
            ProblemKind::Kdv => jet.u_t + lambda * jet.u * jet.u_x + jet.u_xxx - mu,
            ProblemKind::Nvf => {
                jet.u_t + jet.u * jet.u_x
                    - 3.0 * jet.u * jet.u * jet.u_x * jet.u_x
                    - jet.u * jet.u * jet.u * jet.u_xx
                    - mu
            }
        })
    }

    /// Derivative of the residual with respect to the jet entries and to λ.
    pub fn residual_adjoint(&self, jet: &Jet, lambda: f64) -> (JetAdjoint, f64) {
        match self.kind {
            ProblemKind::Kdv => (
                JetAdjoint {
                    du: lambda * jet.u_x,
                    du_x: lambda * jet.u,
                    du_t: 1.0,
                    du_xxx: 1.0,
                    ..JetAdjoint::ZERO
                },
                jet.u * jet.u_x,
            ),
            ProblemKind::Nvf => {
                let u = jet.u;
                (
                    JetAdjoint {
                        du: jet.u_x - 6.0 * u * jet.u_x * jet.u_x - 3.0 * u * u * jet.u_xx,
                        du_x: u - 6.0 * u * u * jet.u_x,
                        du_xx: -u * u * u,
                        du_t: 1.0,
                        ..JetAdjoint::ZERO
                    },
                    0.0,
                )
            }
        }
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// The NVF profile F(ξ) = 20·sech(ξ) + ξ² and its first three derivatives.
fn nvf_profile(xi: f64) -> (f64, f64, f64, f64) {
    let s = sech(xi);
    let th = xi.tanh();
    let f = 20.0 * s + xi * xi;
    let f1 = -20.0 * s * th + 2.0 * xi;
    let f2 = 20.0 * s * (th * th - s * s) + 2.0;
    let f3 = 20.0 * s * th * (5.0 * s * s - th * th);
    (f, f1, f2, f3)
}
