//! Minimal double-double arithmetic for the finite-difference oracles.
//!
//! A `Dd` is an unevaluated sum `hi + lo` of two doubles giving ~31 decimal
//! digits. Finite-difference stencils for third derivatives divide by `h³`;
//! at `h = 1e-4` any f64 rounding in the function values is amplified by
//! 1e12, so the oracle evaluates the network (and the manufactured
//! solutions) in double-double to keep the stencil error truncation-limited.
//!
//! Only the operations the oracles need are implemented: field arithmetic,
//! `exp`, `sin`, `cos` and `tanh`.
// Inherent add/sub/mul/div keep call sites explicit about the dd arithmetic;
// the long constant literals document the full double-double values.
#![allow(clippy::should_implement_trait, clippy::excessive_precision)]

/// Double-double number: value is `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns (s, err) with s = fl(a+b), a+b = s+err exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free sum assuming |a| >= |b|.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

/// Error-free product via FMA: a*b = p + err exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// π to double-double precision.
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224646799147353207e-16,
    };
    /// ln 2 to double-double precision.
    const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319046813846299558e-17,
    };
    /// 2π to double-double precision.
    const TWO_PI: Dd = Dd {
        hi: 2.0 * std::f64::consts::PI,
        lo: 2.449293598294706414e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        Dd::renorm(s, e)
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        Dd::renorm(p, e)
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::renorm(s, e + q3)
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> Dd {
        self.add(Dd::from_f64(rhs))
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        Dd::renorm(p, e + self.lo * rhs)
    }

    /// Exact scaling by a power of two.
    #[inline]
    fn ldexp(self, n: i32) -> Dd {
        let s = (n as f64).exp2();
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    /// exp(x) via range reduction x = m·ln2 + r and a Taylor sum in r.
    pub fn exp(self) -> Dd {
        if self.hi > 700.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let m = (self.hi / std::f64::consts::LN_2).round();
        let r = self.sub(Dd::LN2.mul_f64(m));
        // Taylor: sum_{k} r^k / k!, |r| <= ln2/2. Divisors are exact small
        // integers, so each term keeps double-double accuracy.
        let mut sum = Dd::ONE.add(r);
        let mut term = r;
        for k in 2..32 {
            term = term.mul(r).div(Dd::from_f64(k as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        sum.ldexp(m as i32)
    }

    /// sin and cos from one range reduction modulo 2π.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let n = (self.hi / (2.0 * std::f64::consts::PI)).round();
        let r = self.sub(Dd::TWO_PI.mul_f64(n));
        // Taylor sums; |r| <= π + eps so ~40 terms reach quad precision.
        let r2 = r.mul(r).neg();
        let mut sin = r;
        let mut term = r;
        let mut k = 1.0;
        for _ in 0..26 {
            term = term.mul(r2).div(Dd::from_f64((k + 1.0) * (k + 2.0)));
            sin = sin.add(term);
            k += 2.0;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        let mut cos = Dd::ONE;
        let mut term = Dd::ONE;
        let mut k = 0.0;
        for _ in 0..26 {
            term = term.mul(r2).div(Dd::from_f64((k + 1.0) * (k + 2.0)));
            cos = cos.add(term);
            k += 2.0;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        (sin, cos)
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    /// tanh(x); Taylor for tiny arguments, exp-based elsewhere.
    pub fn tanh(self) -> Dd {
        let ax = self.abs();
        if ax.hi < 1e-3 {
            // x - x³/3 + 2x⁵/15 - 17x⁷/315 + 62x⁹/2835
            let x2 = self.mul(self);
            let x3 = x2.mul(self);
            let x5 = x3.mul(x2);
            let x7 = x5.mul(x2);
            let x9 = x7.mul(x2);
            return self
                .sub(x3.mul_f64(1.0 / 3.0))
                .add(x5.mul_f64(2.0 / 15.0))
                .sub(x7.mul_f64(17.0 / 315.0))
                .add(x9.mul_f64(62.0 / 2835.0));
        }
        let e = ax.mul_f64(-2.0).exp();
        let t = Dd::ONE.sub(e).div(Dd::ONE.add(e));
        if self.hi < 0.0 {
            t.neg()
        } else {
            t
        }
    }

    /// sech(x) = 2 / (eˣ + e⁻ˣ).
    pub fn sech(self) -> Dd {
        let e = self.abs().exp();
        Dd::from_f64(2.0).div(e.add(Dd::ONE.div(e)))
    }
}
