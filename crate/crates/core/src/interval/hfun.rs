//! Enclosures of `h_{k,a;m}(s) = s^{-k} exp(-a / s^m)` on `s >= 0`.
//!
//! The function extends continuously by `0` at `s = 0` whenever `a > 0`, but the textbook
//! formula divides by zero there. For fixed `a > 0` and `k >= 1` it is increasing on
//! `(0, s*)` and decreasing on `(s*, inf)` with `s* = (m a / k)^{1/m}`; for `k = 0` it is
//! increasing everywhere. It is decreasing in `a`. The enclosure over an interval therefore
//! only needs the endpoint values, plus the peak value whenever `s*` lies inside.

use super::Interval;
use crate::error::{Error, Result};

/// Parameters `(k, alpha, m)` of the family `h_{k,alpha;m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HParams {
    pub k: u32,
    pub alpha: Interval,
    pub m: u32,
}

impl HParams {
    pub fn new(k: u32, alpha: Interval, m: u32) -> Result<Self> {
        if alpha.lo() < 0.0 {
            return Err(Error::Domain(format!("alpha = {alpha} has a negative part")));
        }
        if m == 0 {
            return Err(Error::Domain("m must be positive".into()));
        }
        Ok(HParams { k, alpha, m })
    }

    /// `h_{k,1;m}`.
    pub fn unit(k: u32, m: u32) -> Self {
        HParams {
            k,
            alpha: Interval::ONE,
            m,
        }
    }
}

/// Natural interval extension of `exp(-k ln t - a t^{-m})` for `t.lo > 0`.
fn h_natural(k: u32, alpha: Interval, m: u32, t: Interval) -> Result<Interval> {
    let inv_pow = t.recip()?.powi(m);
    let mut exponent = -(alpha * inv_pow);
    if k > 0 {
        exponent = exponent - Interval::point(k as f64) * t.ln()?;
    }
    Ok(exponent.exp())
}

/// Enclosure of `h` at a single point `t >= 0` for a single exponent weight `a >= 0`.
fn h_point(k: u32, a: f64, m: u32, t: f64) -> Result<Interval> {
    if t == 0.0 {
        return if a > 0.0 {
            Ok(Interval::ZERO)
        } else if k == 0 {
            Ok(Interval::ONE)
        } else {
            Err(Error::Singularity(format!("h_{{{k},0;{m}}} is unbounded at s = 0")))
        };
    }
    h_natural(k, Interval::point(a), m, Interval::point(t))
}

/// Rigorous enclosure of `{ t^{-k} e^{-a/t^m} : t in s, a in p.alpha }`, with value `0` at `t = 0`.
pub fn safe_h(p: &HParams, s: Interval) -> Result<Interval> {
    let HParams { k, alpha, m } = *p;
    if alpha.lo() < 0.0 {
        return Err(Error::Domain(format!("alpha = {alpha} has a negative part")));
    }
    if s.lo() < 0.0 || !s.is_finite() {
        return Err(Error::Domain(format!("h evaluated on {s}, need 0 <= s < inf")));
    }
    if k > 0 && alpha.lo() == 0.0 && s.lo() == 0.0 {
        return Err(Error::Singularity(format!(
            "h_{{{k},{alpha};{m}}} is unbounded near s = 0"
        )));
    }

    // Largest value: smallest alpha, at an endpoint or at the interior peak.
    let a_min = alpha.lo();
    let mut upper = h_point(k, a_min, m, s.lo())?.hi().max(h_point(k, a_min, m, s.hi())?.hi());
    if k > 0 && a_min > 0.0 {
        let ratio = Interval::point(m as f64) * Interval::point(a_min);
        let peak = ratio.div(&Interval::point(k as f64))?.nth_root(m)?;
        if peak.intersect(&s).is_some() {
            upper = upper.max(h_natural(k, Interval::point(a_min), m, peak)?.hi());
        }
    }

    // Smallest value: largest alpha, always at an endpoint (the function is unimodal or monotone).
    let a_max = alpha.hi();
    let lower = h_point(k, a_max, m, s.lo())?.lo().min(h_point(k, a_max, m, s.hi())?.lo());

    Interval::new(lower.max(0.0), upper)
}

/// Enclosure of `d/ds h_{k,a;m}(s)`, via `m a h_{k+m+1,a;m}(s) - k h_{k+1,a;m}(s)`.
pub fn safe_h_deriv(p: &HParams, s: Interval) -> Result<Interval> {
    let HParams { k, alpha, m } = *p;
    let lead = safe_h(&HParams { k: k + m + 1, ..*p }, s)?;
    let mut d = Interval::point(m as f64) * alpha * lead;
    if k > 0 {
        let tail = safe_h(&HParams { k: k + 1, ..*p }, s)?;
        d = d - Interval::point(k as f64) * tail;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> Interval {
        Interval::point(x)
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn tabulated_values_of_h_111() {
        let p = HParams::unit(1, 1);
        let cases = [
            (0.1, 4.539992e-4),
            (0.05, 4.12230724e-8),
            (0.02, 9.6437492e-21),
            (0.01, 3.720076e-42),
        ];
        for (s, expected) in cases {
            let h = safe_h(&p, pt(s)).unwrap();
            assert!(rel(h.mid(), expected) < 1e-6, "s = {s}: {h}");
            assert!(h.width() <= 1e-12 * h.mid());
        }
    }

    #[test]
    fn enclosure_from_zero_uses_the_limit() {
        let h = safe_h(&HParams::unit(1, 1), iv(0.0, 0.02)).unwrap();
        assert_eq!(h.lo(), 0.0);
        assert!(rel(h.hi(), 9.6437492e-21) < 1e-6);
    }

    #[test]
    fn trivial_member_is_one() {
        let p = HParams::new(0, Interval::ZERO, 3).unwrap();
        let h = safe_h(&p, iv(0.5, 1.0)).unwrap();
        assert!(h.contains(1.0) && h.width() < 1e-15);
    }

    #[test]
    fn straddling_the_peak_includes_the_maximum() {
        // h_{1,1;1} peaks at s = 1 with value e^{-1}.
        let h = safe_h(&HParams::unit(1, 1), iv(0.5, 2.0)).unwrap();
        assert!(h.contains((-1.0f64).exp()));
        assert!(h.hi() < (-1.0f64).exp() * (1.0 + 1e-14));
        let low = (2.0f64 * (-2.0f64).exp()).min(0.5 * (-0.5f64).exp());
        assert!(h.lo() <= low && h.lo() > low * (1.0 - 1e-14));
    }

    #[test]
    fn interval_alpha_uses_monotone_decrease() {
        let p = HParams::new(1, iv(0.5, 1.0), 1).unwrap();
        let h = safe_h(&p, pt(0.1)).unwrap();
        assert!(h.contains(10.0 * (-5.0f64).exp()));
        assert!(h.contains(10.0 * (-10.0f64).exp()));
    }

    #[test]
    fn errors_on_bad_domains() {
        assert!(HParams::new(1, iv(-0.1, 1.0), 1).is_err());
        let zero_alpha = HParams::new(1, Interval::ZERO, 1).unwrap();
        assert!(matches!(safe_h(&zero_alpha, iv(0.0, 1.0)), Err(Error::Singularity(_))));
        assert!(matches!(safe_h(&HParams::unit(1, 1), iv(-1.0, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_matches_closed_form() {
        // d/ds h_{1,1;1}(s) = h_{2,1;1}(s)(1/s - 1) = 100 e^{-10} * 9 at s = 0.1
        let d = safe_h_deriv(&HParams::unit(1, 1), pt(0.1)).unwrap();
        let exact = 100.0 * (-10.0f64).exp() * 9.0;
        assert!(rel(d.mid(), exact) < 1e-12);
        let h = |s: f64| (-1.0 / s).exp() / s;
        let fd = (h(0.1 + 1e-6) - h(0.1 - 1e-6)) / 2e-6;
        assert!(rel(d.mid(), fd) < 1e-6, "{d} vs {fd}");
    }

    #[test]
    fn derivative_vanishes_at_the_horizon() {
        for m in 1..=3 {
            for k in 0..=3 {
                let d = safe_h_deriv(&HParams::unit(k, m), Interval::ZERO).unwrap();
                assert!(d.contains(0.0) && d.width() <= 1e-14);
            }
        }
    }
}
