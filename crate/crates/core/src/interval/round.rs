//! Directed rounding for the four basic operations and `sqrt`.
//!
//! Each operation is computed in round-to-nearest and the exact rounding error is recovered
//! with an error-free transform (TwoSum for addition, FMA residuals for the rest). The sign of
//! that error tells whether the nearest result sits above or below the exact value, so the
//! result is moved by at most one ulp and only when it is inexact. Where the error-free
//! transforms stop being exact (deep underflow) the result is widened by one ulp instead.

/// Below this magnitude FMA residuals may be rounded away by gradual underflow.
const TINY: f64 = 1.0e-270;
/// Above this magnitude residuals of quotients may overflow.
const HUGE: f64 = 1.0e270;

#[inline]
fn overflow_down(s: f64) -> f64 {
    if s > 0.0 {
        f64::MAX
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
fn overflow_up(s: f64) -> f64 {
    if s > 0.0 {
        f64::INFINITY
    } else {
        f64::MIN
    }
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if a.is_finite() && b.is_finite() { overflow_down(s) } else { s };
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if a.is_finite() && b.is_finite() { overflow_up(s) } else { s };
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Sign of the exact product, ignoring zeros.
#[inline]
fn product_sign(a: f64, b: f64) -> f64 {
    if (a < 0.0) == (b < 0.0) {
        1.0
    } else {
        -1.0
    }
}

/// Rounds an inexact `p` downward by one ulp, never crossing zero against the exact sign.
#[inline]
fn widen_down(p: f64, sign: f64) -> f64 {
    let d = p.next_down();
    if sign > 0.0 && d < 0.0 {
        0.0
    } else {
        d
    }
}

#[inline]
fn widen_up(p: f64, sign: f64) -> f64 {
    let u = p.next_up();
    if sign < 0.0 && u > 0.0 {
        -0.0
    } else {
        u
    }
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    // Interval convention: 0 * inf = 0.
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if a.is_finite() && b.is_finite() { overflow_down(p) } else { p };
    }
    if p.abs() < TINY {
        return widen_down(p, product_sign(a, b));
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if a.is_finite() && b.is_finite() { overflow_up(p) } else { p };
    }
    if p.abs() < TINY {
        return widen_up(p, product_sign(a, b));
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a/b - q` for the rounded quotient `q`, or `None` when the residual is unreliable.
#[inline]
fn quotient_error_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if q.abs() < TINY || q.abs() > HUGE || a.abs() < TINY || a.abs() > HUGE {
        return None;
    }
    let r = (-q).mul_add(b, a);
    Some(if r == 0.0 { 0.0 } else { r.signum() * b.signum() })
}

/// Caller guarantees `b != 0`.
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if b.is_infinite() || a.is_infinite() {
        return q;
    }
    if q.is_infinite() {
        return overflow_down(q);
    }
    match quotient_error_sign(a, b, q) {
        Some(e) if e < 0.0 => q.next_down(),
        Some(_) => q,
        None => widen_down(q, product_sign(a, b)),
    }
}

pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if b.is_infinite() || a.is_infinite() {
        return q;
    }
    if q.is_infinite() {
        return overflow_up(q);
    }
    match quotient_error_sign(a, b, q) {
        Some(e) if e > 0.0 => q.next_up(),
        Some(_) => q,
        None => widen_up(q, product_sign(a, b)),
    }
}

/// Caller guarantees `a >= 0`.
pub(crate) fn sqrt_down(a: f64) -> f64 {
    let q = a.sqrt();
    if a == 0.0 || a.is_infinite() {
        return q;
    }
    if a < TINY {
        return widen_down(q, 1.0);
    }
    if (-q).mul_add(q, a) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

pub(crate) fn sqrt_up(a: f64) -> f64 {
    let q = a.sqrt();
    if a == 0.0 || a.is_infinite() {
        return q;
    }
    if a < TINY {
        return q.next_up();
    }
    if (-q).mul_add(q, a) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0), 4.0);
        assert_eq!(add_up(2.0, 4.0), 6.0);
        assert_eq!(mul_down(1.5, 2.0), 3.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sqrt_down(9.0), 3.0);
    }

    #[test]
    fn inexact_operations_bracket_the_nearest_result() {
        let lo = div_down(1.0, 3.0);
        let hi = div_up(1.0, 3.0);
        assert_eq!(hi, lo.next_up());
        assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);

        let lo = add_down(0.1, 0.2);
        let hi = add_up(0.1, 0.2);
        assert_eq!(hi, lo.next_up());

        let lo = sqrt_down(2.0);
        let hi = sqrt_up(2.0);
        assert_eq!(hi, lo.next_up());
    }

    #[test]
    fn overflow_saturates_in_the_right_direction() {
        assert_eq!(mul_down(1e200, 1e200), f64::MAX);
        assert_eq!(mul_up(1e200, 1e200), f64::INFINITY);
        assert_eq!(mul_up(-1e200, 1e200), f64::MIN);
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(mul_down(0.0, f64::INFINITY), 0.0);
        assert_eq!(mul_up(f64::NEG_INFINITY, 0.0), 0.0);
    }

    #[test]
    fn underflowing_products_keep_sign() {
        let tiny = f64::MIN_POSITIVE;
        assert!(mul_down(tiny, tiny) >= 0.0);
        assert!(mul_up(tiny, tiny) > 0.0);
        assert!(mul_up(-tiny, tiny) <= 0.0);
    }
}
