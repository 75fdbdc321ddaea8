//! Lyapunov domain of the horizon equilibrium at the origin.
//!
//! With `L = s^2 + sum x_i^2` and `f(0) = 0`, the mean-value form gives
//! `dL/dτ = 2 y·f(y) = y^T A(ξ) y` with `A = J + J^T` evaluated on the segment `[0, y]`.
//! A bound `λ_max(A) <= -c` over a convex box containing the origin therefore yields
//! `dL/dτ <= -c L` on that box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::model::{desing_jacobian, CompactState, ProblemParams};

/// Spacing of the fixed grid along which `s` is subdivided. A fixed grid keeps the bound
/// monotone under box inclusion.
const S_GRID: f64 = 1.0 / 128.0;

/// Candidate scalings of the `s` row used in the Gershgorin bound.
const S_SCALINGS: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

const EPSILON_MARGIN: f64 = 0.9;

/// `L(s, x) = s^2 + sum x_i^2`.
pub fn lyapunov_value(c: &CompactState) -> Interval {
    c.x.iter().fold(c.s.sqr(), |acc, x| acc + x.sqr())
}

/// Box `s in [0, s_bar]`, `|x_i| <= r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateBox {
    s_bar: f64,
    x_radius: f64,
}

impl CandidateBox {
    pub fn new(s_bar: f64, x_radius: f64) -> Result<Self> {
        if !(s_bar > 0.0 && s_bar.is_finite()) || !(x_radius > 0.0 && x_radius <= 1.0) {
            return Err(Error::Parameter(format!(
                "need s_bar > 0 and 0 < r <= 1, got ({s_bar}, {x_radius})"
            )));
        }
        Ok(CandidateBox { s_bar, x_radius })
    }

    pub fn s_bar(&self) -> f64 {
        self.s_bar
    }

    pub fn x_radius(&self) -> f64 {
        self.x_radius
    }

    pub fn s_range(&self) -> Interval {
        Interval::new(0.0, self.s_bar).expect("positive s_bar")
    }

    /// Pieces of `[0, s_bar]` cut at multiples of the fixed grid spacing.
    fn s_pieces(&self) -> Vec<Interval> {
        let mut pieces = Vec::new();
        let mut k = 0u32;
        loop {
            let lo = k as f64 * S_GRID;
            let hi = ((k + 1) as f64 * S_GRID).min(self.s_bar);
            pieces.push(Interval::new(lo, hi).expect("ordered grid"));
            if hi >= self.s_bar {
                return pieces;
            }
            k += 1;
        }
    }

    pub fn contains(&self, c: &CompactState) -> bool {
        c.s.is_subset(&self.s_range())
            && c.x.iter().all(|x| x.lo() >= -self.x_radius && x.hi() <= self.x_radius)
    }
}

/// Validated box with sublevel `epsilon` and decay constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovDomain {
    pub candidate: CandidateBox,
    pub epsilon: f64,
    pub c: f64,
}

/// `A = J + J^T`.
pub fn symmetric_part(j: &IntervalMatrix) -> Result<IntervalMatrix> {
    j.add(&j.transpose())
}

/// Upper bound of `λ_max` for every symmetric matrix in `a`, from Gershgorin discs of
/// `D^{-1} A D` with `D = diag(d)`.
pub fn gershgorin_bound(a: &IntervalMatrix, d: &[f64]) -> f64 {
    (0..a.rows())
        .map(|i| {
            let mut acc = Interval::point(a[(i, i)].hi());
            for j in (0..a.cols()).filter(|&j| j != i) {
                let ratio = Interval::point(d[j]).div(&Interval::point(d[i])).expect("positive scale");
                acc = acc + Interval::point(a[(i, j)].mag()) * ratio;
            }
            acc.hi()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Bound of `λ_max(A)` over the box, minimized over the candidate scalings.
pub fn max_eigenvalue_bound(p: &ProblemParams, b: &CandidateBox) -> Result<f64> {
    let r = Interval::new(-b.x_radius, b.x_radius)?;
    let x = IntervalVector::new(vec![r; p.n() - 2]);
    let mut worst = vec![f64::NEG_INFINITY; S_SCALINGS.len()];
    for s in b.s_pieces() {
        let cs = CompactState::new(p, s, x.clone())?;
        let a = symmetric_part(&desing_jacobian(p, &cs)?)?;
        for (w, &scale) in worst.iter_mut().zip(&S_SCALINGS) {
            let mut d = vec![1.0; p.dim()];
            d[p.s_slot()] = scale;
            *w = w.max(gershgorin_bound(&a, &d));
        }
    }
    Ok(worst.into_iter().fold(f64::INFINITY, f64::min))
}

/// `0.9 min(min(s_bar, r)^2, 1)`, rounded down.
fn epsilon_for(b: &CandidateBox) -> f64 {
    let side = Interval::point(b.s_bar.min(b.x_radius)).sqr();
    let capped = if side.lo() >= 1.0 { Interval::ONE } else { side };
    (capped * Interval::point(EPSILON_MARGIN)).lo()
}

/// Certifies `λ_max(J + J^T) <= -c < 0` on the box.
pub fn validate_domain(p: &ProblemParams, b: &CandidateBox) -> Result<LyapunovDomain> {
    let bound = match max_eigenvalue_bound(p, b) {
        Ok(v) => v,
        Err(Error::Singularity(msg) | Error::Domain(msg)) => {
            return Err(Error::ValidationFailure(msg));
        }
        Err(e) => return Err(e),
    };
    if !(bound < 0.0) {
        return Err(Error::ValidationFailure(format!(
            "Gershgorin bound {bound:e} is not negative on s <= {}, |x| <= {}",
            b.s_bar, b.x_radius
        )));
    }
    Ok(LyapunovDomain {
        candidate: *b,
        epsilon: epsilon_for(b),
        c: -bound,
    })
}

/// Shrinks a square box from `sqrt(target)/0.9` until it validates.
pub fn find_domain(p: &ProblemParams, epsilon_target: f64) -> Result<LyapunovDomain> {
    if !(epsilon_target > 0.0 && epsilon_target <= 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon target must lie in (0, 1], got {epsilon_target}"
        )));
    }
    let mut side = (epsilon_target.sqrt() / EPSILON_MARGIN).min(1.0);
    let mut last = None;
    for _ in 0..60 {
        match validate_domain(p, &CandidateBox::new(side, side)?) {
            Ok(d) => return Ok(d),
            Err(Error::ValidationFailure(msg)) => last = Some(msg),
            Err(e) => return Err(e),
        }
        side *= 0.7;
    }
    Err(Error::ValidationFailure(format!(
        "no Lyapunov domain found: {}",
        last.unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: u32) -> ProblemParams {
        ProblemParams::new(n, m, Interval::ONE).unwrap()
    }

    #[test]
    fn value_at_simple_states() {
        let p = params(6, 1);
        assert_eq!(lyapunov_value(&CompactState::origin(&p)), Interval::ZERO);
        let mut c = CompactState::origin(&p);
        c.s = Interval::point(0.1);
        assert!(lyapunov_value(&c).contains(0.01));
        assert!(lyapunov_value(&c).width() < 1e-17);
    }

    #[test]
    fn tiny_box_has_rate_two_lambda() {
        let d = validate_domain(&params(6, 1), &CandidateBox::new(1e-12, 1e-12).unwrap()).unwrap();
        assert!((1.9..=2.0).contains(&d.c), "c = {}", d.c);
    }

    #[test]
    fn feasible_levels() {
        let d = find_domain(&params(6, 1), 8.02e-4).unwrap();
        assert!(d.epsilon >= 8.02e-4, "{d:?}");
        let d = find_domain(&params(6, 2), 7.74e-2).unwrap();
        assert!(d.epsilon >= 7.74e-2, "{d:?}");
    }

    #[test]
    fn small_target_on_coarse_grid() {
        let d = find_domain(&params(4, 1), 1e-6).unwrap();
        assert!((1.5..=2.1).contains(&d.c), "c = {}", d.c);
    }

    #[test]
    fn target_above_one_is_rejected() {
        assert!(find_domain(&params(6, 1), 10.0).is_err());
    }

    #[test]
    fn sublevel_set_lies_in_the_box() {
        let d = find_domain(&params(6, 1), 8.02e-4).unwrap();
        let side = d.candidate.s_bar().min(d.candidate.x_radius());
        assert!(d.epsilon.sqrt() < side && d.epsilon <= 1.0);
    }
}
