//! Interval Taylor method with a mean-value form and QR recoordination of the error set.
//!
//! The enclosure of the flow is kept as a parallelepiped `c + B r` with a point centre `c`,
//! a point (nearly orthogonal) basis `B` and an interval radius `r`. One step:
//!
//! 1. a-priori tube `T` with `Y0 + [0,h] f(T) ⊆ T`, so every solution stays in `T`;
//! 2. point Taylor polynomial `Φ(c)` plus Lagrange remainder `h^{p+1} y_{p+1}(T)`;
//! 3. interval Jacobian `A = DΦ(Y0) B` of the Taylor polynomial over the start box;
//! 4. new basis from the QR factor of `mid(A)`, with a verified enclosure of its inverse.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::taylor::{Dual, Tape};

/// Autonomous system `y' = f(y)` whose solutions can be enclosed.
pub trait OdeSystem {
    /// Straight-line program used for Taylor coefficients.
    fn tape(&self) -> &Tape;

    fn dim(&self) -> usize {
        self.tape().dim()
    }

    /// Interval field evaluation used for the a-priori tube.
    fn field(&self, y: &IntervalVector) -> Result<IntervalVector> {
        self.tape().eval(y.as_slice()).map(IntervalVector::new)
    }

    /// Rejects boxes outside the region where the system is valid.
    fn admit(&self, _y: &IntervalVector) -> Result<()> {
        Ok(())
    }
}

/// A system given directly by its tape.
#[derive(Debug, Clone)]
pub struct TapeSystem(pub Tape);

impl OdeSystem for TapeSystem {
    fn tape(&self) -> &Tape {
        &self.0
    }
}

/// Parallelepiped `c + B r`.
#[derive(Debug, Clone)]
pub struct LohnerSet {
    center: Vec<f64>,
    basis: DMatrix<f64>,
    radius: IntervalVector,
}

impl LohnerSet {
    pub fn from_box(y: &IntervalVector) -> Result<Self> {
        let center = y.mid();
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("cannot centre an unbounded box {y:?}")));
        }
        let radius = y.sub(&IntervalVector::from_points(&center))?;
        Ok(LohnerSet {
            basis: DMatrix::identity(y.len(), y.len()),
            center,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Interval hull of the parallelepiped.
    pub fn hull(&self) -> IntervalVector {
        let br = point_mul_vec(&self.basis, &self.radius);
        self.center
            .iter()
            .zip(br.iter())
            .map(|(c, b)| Interval::point(*c) + *b)
            .collect()
    }
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct LohnerStep {
    pub set: LohnerSet,
    /// Box enclosure of the solution set at the end of the step.
    pub enclosure: IntervalVector,
    /// Box enclosure of all solutions over the whole step.
    pub tube: IntervalVector,
    /// Step size suggested for the next step.
    pub next_h: f64,
}

/// Numerical controls of a single step.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub order: usize,
    pub tube_inflation: f64,
    pub tol: f64,
}

const TUBE_ITERATIONS: usize = 12;

fn step_failure(reason: impl Into<String>) -> Error {
    Error::StepFailure {
        tau: f64::NAN,
        reason: reason.into(),
    }
}

/// Inflates each component by `(factor - 1)` of its width plus a relative amount of its magnitude.
fn inflate(y: &IntervalVector, factor: f64) -> IntervalVector {
    y.iter()
        .map(|a| {
            let grow = (factor - 1.0) * a.width() + 1e-15 * a.mag();
            let lo = a.lo() - grow;
            let hi = a.hi() + grow;
            Interval::new(lo, hi).unwrap_or(*a).hull(a)
        })
        .collect()
}

/// A box `T` with `y0 + [0,h] f(T) ⊆ T`; returns the verified `y0 + [0,h] f(T)`.
pub fn apriori_enclosure<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &IntervalVector,
    h: f64,
    inflation: f64,
) -> Result<IntervalVector> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(step_failure(format!("invalid step {h}")));
    }
    sys.admit(y0)?;
    let span = Interval::new(0.0, h)?;
    let mut tube = y0.add(&sys.field(y0)?.scale(span))?;
    for _ in 0..TUBE_ITERATIONS {
        tube = inflate(&tube, inflation);
        sys.admit(&tube)?;
        let next = y0.add(&sys.field(&tube)?.scale(span))?;
        if next.is_subset(&tube) {
            return Ok(next);
        }
        tube = next.hull(&tube)?;
    }
    Err(step_failure(format!("no contracting tube for h = {h}")))
}

/// `B r` for a point matrix and an interval vector.
fn point_mul_vec(b: &DMatrix<f64>, r: &IntervalVector) -> IntervalVector {
    (0..b.nrows())
        .map(|i| (0..b.ncols()).map(|j| Interval::point(b[(i, j)]) * r[j]).sum())
        .collect()
}

fn to_interval(b: &DMatrix<f64>) -> IntervalMatrix {
    IntervalMatrix::from_fn(b.nrows(), b.ncols(), |i, j| Interval::point(b[(i, j)]))
}

/// `sum_k c_k h^k` by Horner's rule.
fn horner(coeffs: impl DoubleEndedIterator<Item = Interval>, h: Interval) -> Interval {
    coeffs.rev().fold(Interval::ZERO, |acc, c| acc * h + c)
}

/// Enclosure of `Q^{-1}` for a nearly orthogonal point matrix `Q`.
fn verified_inverse(q: &DMatrix<f64>) -> Result<IntervalMatrix> {
    let qt = to_interval(&q.transpose());
    let residual = IntervalMatrix::identity(q.nrows()).sub(&qt.mul_mat(&to_interval(q))?)?;
    let delta = residual.norm_inf();
    if !(delta < 0.5) {
        return Err(step_failure(format!("basis too far from orthogonal ({delta})")));
    }
    // |Q^{-1} - Q^T| <= delta / (1 - delta) * |Q^T|
    let d = Interval::point(delta);
    let eta = (d.div(&(Interval::ONE - d))? * Interval::point(qt.norm_inf())).hi();
    let pad = Interval::new(-eta, eta)?;
    Ok(IntervalMatrix::from_fn(q.nrows(), q.ncols(), |i, j| qt[(i, j)] + pad))
}

/// One step of length `h` from `set`.
pub fn lohner_step<S: OdeSystem + ?Sized>(
    sys: &S,
    set: &LohnerSet,
    h: f64,
    ctl: &StepControl,
) -> Result<LohnerStep> {
    let d = set.dim();
    let p = ctl.order;
    let tape = sys.tape();
    let y0 = set.hull();
    let tube = apriori_enclosure(sys, &y0, h, ctl.tube_inflation)?;
    let hi = Interval::point(h);

    let centre: Vec<Interval> = set.center.iter().map(|&c| Interval::point(c)).collect();
    let pc = tape.ode_coefficients(&centre, p)?;
    let phi: IntervalVector = (0..d)
        .map(|i| horner(pc.iter().map(|ck| ck[i]), hi))
        .collect();

    let rc = tape.ode_coefficients(tube.as_slice(), p + 1)?;
    let hp = hi.powi(p as u32 + 1);
    let remainder: IntervalVector = rc[p + 1].iter().map(|a| *a * hp).collect();

    let seeds: Vec<Dual> = y0
        .iter()
        .enumerate()
        .map(|(i, v)| Dual::variable(*v, i, d))
        .collect();
    let dc = tape.ode_coefficients(&seeds, p)?;
    let jac = IntervalMatrix::from_fn(d, d, |i, j| horner(dc.iter().map(|ck| ck[i].grad[j]), hi));

    let v = phi.add(&remainder)?;
    let a = jac.mul_mat(&to_interval(&set.basis))?;
    let new_center = v.mid();
    if new_center.iter().any(|c| !c.is_finite()) {
        return Err(step_failure("unbounded enclosure"));
    }

    // Columns that carry the most volume go first so the QR basis follows them.
    let am = DMatrix::from_row_slice(d, d, &a.mid());
    let weight = |j: usize| am.column(j).norm() * set.radius[j].width();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)));
    let sorted = DMatrix::from_fn(d, d, |i, j| am[(i, perm[j])]);
    let q = sorted.qr().q();
    let qinv = verified_inverse(&q)?;

    let offset = v.sub(&IntervalVector::from_points(&new_center))?;
    let radius = qinv
        .mul_mat(&a)?
        .mul_vec(&set.radius)?
        .add(&qinv.mul_vec(&offset)?)?;
    let new_set = LohnerSet {
        center: new_center,
        basis: q,
        radius,
    };

    let via_basis = new_set.hull();
    let direct = v.add(&a.mul_vec(&set.radius)?)?;
    let enclosure = via_basis
        .intersect(&direct)?
        .and_then(|e| e.intersect(&tube).ok().flatten())
        .ok_or_else(|| step_failure("inconsistent enclosures"))?;

    Ok(LohnerStep {
        set: new_set,
        enclosure,
        tube,
        next_h: suggest_step(&pc, ctl.tol),
    })
}

/// Step size from the decay of the last two point Taylor coefficients.
fn suggest_step(pc: &[Vec<Interval>], tol: f64) -> f64 {
    let p = pc.len() - 1;
    let norm = |k: usize| pc[k].iter().map(Interval::mag).fold(0.0, f64::max);
    let scale = norm(0).max(1.0);
    [p - 1, p]
        .into_iter()
        .filter(|&k| k > 0 && norm(k) > 0.0)
        .map(|k| (tol * scale / norm(k)).powf(1.0 / k as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Driver settings for [`integrate_system`].
#[derive(Debug, Clone, Copy)]
pub struct DriverOptions {
    pub control: StepControl,
    pub h0: f64,
    pub hmin: f64,
    pub hmax: f64,
    pub max_steps: usize,
    pub max_halvings: u32,
}

/// One accepted step of [`integrate_system`].
#[derive(Debug, Clone)]
pub struct VectorStep {
    /// Time range covered by the step; the state is valid at its upper end.
    pub tau: Interval,
    pub state: IntervalVector,
    pub tube: IntervalVector,
}

/// Integrates from `y0` until `tau_end` (if any) is reached or `stop` returns true.
///
/// Failed steps are retried with half the step size. The error of the last attempt is
/// returned when the step size drops below `hmin` or the retry budget is spent.
pub fn integrate_system<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &IntervalVector,
    tau_end: Option<f64>,
    opts: &DriverOptions,
    mut stop: impl FnMut(&VectorStep) -> Result<bool>,
) -> Result<Vec<VectorStep>> {
    sys.admit(y0)?;
    let mut set = LohnerSet::from_box(y0)?;
    let mut tau = Interval::ZERO;
    let mut h = opts.h0.min(opts.hmax);
    let mut steps: Vec<VectorStep> = Vec::new();

    loop {
        if let Some(end) = tau_end {
            if tau.mid() >= end {
                return Ok(steps);
            }
        }
        if steps.len() >= opts.max_steps {
            return Err(Error::BudgetExhausted { steps: steps.len() });
        }
        sys.admit(&set.hull())?;

        let mut h_try = h;
        if let Some(end) = tau_end {
            h_try = h_try.min(end - tau.mid());
        }
        let mut halvings = 0;
        let accepted = loop {
            match lohner_step(sys, &set, h_try, &opts.control) {
                Ok(s) => break s,
                Err(e @ (Error::StepFailure { .. }
                | Error::Domain(_)
                | Error::Singularity(_)
                | Error::ReframeNeeded { .. })) => {
                    halvings += 1;
                    h_try /= 2.0;
                    if halvings > opts.max_halvings || h_try < opts.hmin {
                        return Err(match e {
                            Error::StepFailure { reason, .. } => Error::StepFailure {
                                tau: tau.hi(),
                                reason,
                            },
                            Error::Domain(reason) | Error::Singularity(reason) => {
                                Error::StepFailure {
                                    tau: tau.hi(),
                                    reason,
                                }
                            }
                            other => other,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        };

        let end = Interval::point(tau.lo()) + Interval::point(h_try);
        let end = Interval::new(end.lo(), (Interval::point(tau.hi()) + Interval::point(h_try)).hi())?;
        let step = VectorStep {
            tau: Interval::new(tau.lo(), end.hi())?,
            state: accepted.enclosure,
            tube: accepted.tube,
        };
        tau = end;
        h = accepted.next_h.min(2.0 * h_try).min(opts.hmax).max(opts.hmin);
        set = accepted.set;
        let done = stop(&step)?;
        steps.push(step);
        if done {
            return Ok(steps);
        }
    }
}
