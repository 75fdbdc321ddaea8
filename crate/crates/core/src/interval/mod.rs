//! Outward-rounded interval arithmetic.
//!
//! Every operation returns an interval containing the exact image of its operands. Basic
//! arithmetic and `sqrt` use emulated directed rounding (see [`round`]), the elementary
//! functions `exp` and `ln` widen the libm result by one ulp on each side.

mod hfun;
mod matrix;
mod round;
mod vector;

pub use hfun::{safe_h, safe_h_deriv, HParams};
pub use matrix::IntervalMatrix;
pub use vector::IntervalVector;

pub(crate) use round::add_up;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` of reals with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(x: Interval) -> Self {
        [x.lo, x.hi]
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    /// Enclosure of pi: `PI < pi < next_up(PI)`.
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: 3.141_592_653_589_793_6,
    };

    /// Builds `[lo, hi]`, rejecting NaN, unordered endpoints and empty infinite ends.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`. Panics on NaN or infinite input.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval needs a finite value, got {x}");
        Interval { lo: x, hi: x }
    }

    /// Parses a decimal literal and returns an interval guaranteed to contain it.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let t = text.trim();
        let x: f64 = t
            .parse()
            .map_err(|_| Error::Input(format!("not a decimal number: {t:?}")))?;
        if !x.is_finite() {
            return Err(Error::Input(format!("not a finite number: {t:?}")));
        }
        // Integers below 2^53 are exact; anything else may have been rounded by the parser.
        if x.fract() == 0.0 && x.abs() < 9.0e15 && t.bytes().all(|b| b.is_ascii_digit() || b == b'-' || b == b'+') {
            return Ok(Interval::point(x));
        }
        Ok(Interval {
            lo: x.next_down(),
            hi: x.next_up(),
        })
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY {
            return 0.0;
        }
        if self.lo == f64::NEG_INFINITY {
            return f64::MIN;
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound of the width.
    pub fn width(&self) -> f64 {
        round::sub_up(self.hi, self.lo)
    }

    /// Upper bound of the radius around `mid()`.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        round::sub_up(m, self.lo).max(round::sub_up(self.hi, m))
    }

    /// Largest absolute value.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn abs(&self) -> Interval {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        Interval::ONE.div(self)
    }

    /// Interval quotient; fails when the divisor contains zero.
    pub fn div(&self, rhs: &Interval) -> Result<Interval> {
        if rhs.contains_zero() {
            return Err(Error::Domain(format!("division by {rhs} which contains zero")));
        }
        let (a, b) = (self, rhs);
        let cands_lo = [
            round::div_down(a.lo, b.lo),
            round::div_down(a.lo, b.hi),
            round::div_down(a.hi, b.lo),
            round::div_down(a.hi, b.hi),
        ];
        let cands_hi = [
            round::div_up(a.lo, b.lo),
            round::div_up(a.lo, b.hi),
            round::div_up(a.hi, b.lo),
            round::div_up(a.hi, b.hi),
        ];
        Ok(Interval {
            lo: cands_lo.into_iter().fold(f64::INFINITY, f64::min),
            hi: cands_hi.into_iter().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Multiplication by a scalar given exactly as an `f64`.
    pub fn scale(&self, c: f64) -> Interval {
        *self * Interval::point(c)
    }

    /// Non-negative integer power, sharp for even exponents.
    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        let pow_down = |x: f64| (1..n).fold(x, |acc, _| round::mul_down(acc, x));
        let pow_up = |x: f64| (1..n).fold(x, |acc, _| round::mul_up(acc, x));
        if self.lo >= 0.0 {
            Interval {
                lo: pow_down(self.lo),
                hi: pow_up(self.hi),
            }
        } else if self.hi <= 0.0 {
            let m = Interval {
                lo: pow_down(-self.hi),
                hi: pow_up(-self.lo),
            };
            if n % 2 == 0 {
                m
            } else {
                -m
            }
        } else if n % 2 == 0 {
            Interval {
                lo: 0.0,
                hi: pow_up(self.mag()),
            }
        } else {
            Interval {
                lo: -pow_up(-self.lo),
                hi: pow_up(self.hi),
            }
        }
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(Error::Domain(format!("sqrt of {self}")));
        }
        Ok(Interval {
            lo: round::sqrt_down(self.lo),
            hi: round::sqrt_up(self.hi),
        })
    }

    /// Enclosure of `{e^x : x in self}`; overflow saturates to `+inf`, underflow to `0`.
    pub fn exp(&self) -> Interval {
        let lo = if self.lo == 0.0 {
            1.0
        } else {
            let e = self.lo.exp();
            if e == 0.0 {
                0.0
            } else {
                e.next_down().max(0.0)
            }
        };
        let hi = if self.hi == 0.0 {
            1.0
        } else {
            let e = self.hi.exp();
            if e.is_infinite() {
                e
            } else {
                e.next_up()
            }
        };
        Interval { lo, hi }
    }

    /// Natural logarithm; requires a strictly positive lower endpoint.
    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::Domain(format!("ln of {self}")));
        }
        let lo = if self.lo == 1.0 { 0.0 } else { self.lo.ln().next_down() };
        let hi = if self.hi == 1.0 {
            0.0
        } else if self.hi.is_infinite() {
            f64::INFINITY
        } else {
            self.hi.ln().next_up()
        };
        Ok(Interval { lo, hi })
    }

    /// Positive real `n`-th root of a non-negative interval.
    pub fn nth_root(&self, n: u32) -> Result<Interval> {
        match n {
            0 => Err(Error::Domain("zeroth root".into())),
            1 => Ok(*self),
            2 => self.sqrt(),
            _ => {
                if self.lo < 0.0 {
                    return Err(Error::Domain(format!("root of {self}")));
                }
                let inv = Interval::ONE.div(&Interval::point(n as f64))?;
                let lo = if self.lo == 0.0 {
                    0.0
                } else {
                    (Interval::point(self.lo).ln()? * inv).exp().lo
                };
                let hi = (Interval::point(self.hi).ln()? * inv).exp().hi;
                Ok(Interval { lo, hi })
            }
        }
    }

    /// Cosine on arguments with `|x| <= 2`, by a Taylor polynomial with a Lagrange remainder.
    pub(crate) fn cos_small(&self) -> Result<Interval> {
        if self.mag() > 2.0 {
            return Err(Error::Domain(format!("cos_small argument {self} outside [-2, 2]")));
        }
        const TERMS: u32 = 14;
        let x2 = self.sqr();
        // Horner in x^2: sum_{k=0}^{TERMS-1} (-1)^k x^{2k} / (2k)!
        let mut acc = Interval::ZERO;
        for k in (0..TERMS).rev() {
            let denom = ((2 * k + 1) * (2 * k + 2)) as f64;
            acc = Interval::ONE - (x2 * acc).div(&Interval::point(denom))?;
        }
        // |R| <= |x|^{2 TERMS} / (2 TERMS)!; with |x| <= 2 this is below 2^28 / 28! < 1e-21.
        let mut fact = Interval::ONE;
        for j in 1..=(2 * TERMS) {
            fact = fact * Interval::point(j as f64);
        }
        let bound = self.abs().powi(2 * TERMS).div(&fact)?.hi;
        Ok(acc + Interval { lo: -bound, hi: bound })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::add_down(self.lo, rhs.lo),
            hi: round::add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::sub_down(self.lo, rhs.hi),
            hi: round::sub_up(self.hi, rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        // Sign-case dispatch keeps the common cases to two products.
        if a.lo >= 0.0 && b.lo >= 0.0 {
            return Interval {
                lo: round::mul_down(a.lo, b.lo),
                hi: round::mul_up(a.hi, b.hi),
            };
        }
        if a.hi <= 0.0 && b.hi <= 0.0 {
            return Interval {
                lo: round::mul_down(a.hi, b.hi),
                hi: round::mul_up(a.lo, b.lo),
            };
        }
        let lo = [
            round::mul_down(a.lo, b.lo),
            round::mul_down(a.lo, b.hi),
            round::mul_down(a.hi, b.lo),
            round::mul_down(a.hi, b.hi),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        let hi = [
            round::mul_up(a.lo, b.lo),
            round::mul_up(a.lo, b.hi),
            round::mul_up(a.hi, b.lo),
            round::mul_up(a.hi, b.hi),
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn rejects_unordered_and_nan() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(f64::INFINITY, f64::INFINITY).is_err());
    }

    #[test]
    fn exact_endpoint_arithmetic() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(-1.0, 1.0) * iv(-1.0, 1.0), iv(-1.0, 1.0));
        assert_eq!(iv(1.0, 2.0) - iv(3.0, 4.0), iv(-3.0, -1.0));
        assert_eq!(iv(1.0, 2.0).div(&iv(4.0, 8.0)).unwrap(), iv(0.125, 0.5));
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        assert!(matches!(iv(1.0, 2.0).div(&iv(-1.0, 1.0)), Err(Error::Domain(_))));
        assert!(iv(0.0, 0.0).recip().is_err());
    }

    #[test]
    fn exp_of_zero_is_one() {
        let e = Interval::ZERO.exp();
        assert!(e.contains(1.0));
        assert!(e.lo() >= 1.0f64.next_down() && e.hi() <= 1.0f64.next_up());
    }

    #[test]
    fn exp_underflow_saturates() {
        let e = iv(-1.0e300, -750.0).exp();
        assert_eq!(e.lo(), 0.0);
        assert!(e.hi() <= f64::MIN_POSITIVE);
    }

    #[test]
    fn exp_overflow_saturates() {
        let e = iv(0.0, 800.0).exp();
        assert_eq!(e.hi(), f64::INFINITY);
        assert_eq!(e.lo(), 1.0);
    }

    #[test]
    fn even_powers_are_nonnegative() {
        assert_eq!(iv(-2.0, 1.0).powi(2), iv(0.0, 4.0));
        assert_eq!(iv(-2.0, 1.0).powi(3), iv(-8.0, 1.0));
        assert_eq!(iv(-3.0, -2.0).powi(2), iv(4.0, 9.0));
    }

    #[test]
    fn roots_contain_exact_values() {
        assert_eq!(iv(4.0, 9.0).sqrt().unwrap(), iv(2.0, 3.0));
        let r = iv(8.0, 8.0).nth_root(3).unwrap();
        assert!(r.contains(2.0));
        assert!(r.width() < 1e-14);
    }

    #[test]
    fn ln_contains_exact_values() {
        let l = iv(1.0, std::f64::consts::E).ln().unwrap();
        assert_eq!(l.lo(), 0.0);
        assert!(l.contains(1.0));
        assert!(iv(0.0, 1.0).ln().is_err());
    }

    #[test]
    fn pi_enclosure_is_one_ulp() {
        assert_eq!(Interval::PI.hi(), Interval::PI.lo().next_up());
    }

    #[test]
    fn cos_small_encloses_known_values() {
        let c = (Interval::PI.div(&iv(3.0, 3.0)).unwrap()).cos_small().unwrap();
        assert!(c.contains(0.5));
        assert!(c.width() < 1e-15);
        let c0 = Interval::ZERO.cos_small().unwrap();
        assert!(c0.contains(1.0));
    }

    #[test]
    fn decimal_parsing_contains_the_literal() {
        assert_eq!(Interval::from_decimal("1").unwrap(), Interval::ONE);
        let tenth = Interval::from_decimal("0.1").unwrap();
        assert!(tenth.lo() < 0.1 && 0.1 < tenth.hi());
        assert!(Interval::from_decimal("abc").is_err());
    }

    #[test]
    fn hull_and_intersection() {
        let a = iv(0.0, 1.0);
        let b = iv(0.5, 2.0);
        assert_eq!(a.hull(&b), iv(0.0, 2.0));
        assert_eq!(a.intersect(&b), Some(iv(0.5, 1.0)));
        assert_eq!(a.intersect(&iv(3.0, 4.0)), None);
    }
}
