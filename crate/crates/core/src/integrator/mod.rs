//! Validated integration of the desingularized system, augmented with physical time.
//!
//! The state vector is the slot-ordered compact state followed by `t`, whose rate is
//! `dt/dτ = h_{1,1;m}(s)`.

mod lohner;

pub use lohner::{
    apriori_enclosure as apriori_enclosure_system, integrate_system, lohner_step, DriverOptions,
    LohnerSet, LohnerStep, OdeSystem, StepControl, TapeSystem, VectorStep,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{safe_h, HParams, Interval, IntervalVector};
use crate::model::{desing_field, CompactState, ProblemParams};
use crate::taylor::{Expr, Tape, TapeBuilder};

/// Compact state together with physical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState {
    pub c: CompactState,
    pub t: Interval,
}

impl AugmentedState {
    pub fn new(c: CompactState, t: Interval) -> Self {
        AugmentedState { c, t }
    }

    /// Slots followed by `t`.
    pub fn to_vector(&self) -> IntervalVector {
        let mut v = self.c.to_slots().into_vec();
        v.push(self.t);
        IntervalVector::new(v)
    }

    pub fn from_vector(p: &ProblemParams, v: &IntervalVector) -> Result<Self> {
        if v.len() != p.n() {
            return Err(Error::Dimension {
                expected: p.n(),
                found: v.len(),
            });
        }
        let slots: IntervalVector = v.iter().take(p.dim()).copied().collect();
        Ok(AugmentedState {
            c: CompactState::from_slots(&slots),
            t: v[p.dim()],
        })
    }
}

/// One accepted integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnclosureStep {
    /// Range of the step; `state` is valid at `tau.hi`.
    pub tau: Interval,
    pub state: AugmentedState,
    /// Valid over the whole of `tau`.
    pub tube: AugmentedState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub order: usize,
    pub h0: f64,
    pub hmin: f64,
    pub tube_inflation: f64,
    pub max_steps: usize,
    /// Largest step size.
    pub hmax: f64,
    /// Local error target for step size selection.
    pub tol: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            order: 10,
            h0: 1e-2,
            hmin: 1e-8,
            tube_inflation: 1.1,
            max_steps: 1_000_000,
            hmax: 0.5,
            tol: 1e-16,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Parameter(format!("order must be at least 2, got {}", self.order)));
        }
        if !(self.hmin > 0.0) {
            return Err(Error::Parameter(format!("hmin must be positive, got {}", self.hmin)));
        }
        if !(self.h0 >= self.hmin) || !(self.hmax >= self.hmin) {
            return Err(Error::Parameter("h0 and hmax must be at least hmin".into()));
        }
        if !(self.tube_inflation > 1.0) {
            return Err(Error::Parameter(format!(
                "tube_inflation must exceed 1, got {}",
                self.tube_inflation
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        Ok(())
    }

    fn driver(&self) -> DriverOptions {
        DriverOptions {
            control: StepControl {
                order: self.order,
                tube_inflation: self.tube_inflation,
                tol: self.tol,
            },
            h0: self.h0,
            hmin: self.hmin,
            hmax: self.hmax,
            max_steps: self.max_steps,
            max_halvings: 30,
        }
    }
}

/// The augmented desingularized field as an [`OdeSystem`].
#[derive(Debug, Clone)]
pub struct BlowupSystem {
    params: ProblemParams,
    tape: Tape,
}

impl BlowupSystem {
    pub fn new(p: &ProblemParams) -> Self {
        BlowupSystem {
            params: *p,
            tape: build_tape(p),
        }
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }
}

fn build_tape(p: &ProblemParams) -> Tape {
    let (n, m, c) = (p.n(), p.m(), p.center());
    let lambda = p.lambda();
    let n_sq = Interval::point((n * n) as f64);
    let mut b = TapeBuilder::new(n);

    let s = b.var(p.s_slot());
    let rs = b.recip(s);
    let rsm = b.powi(rs, m);
    let neg_rsm = b.neg(rsm);
    let e1 = b.exp(neg_rsm);
    let h1 = b.mul(rs, e1);
    let one = b.constant(Interval::ONE);

    // x at grid index i; None for the zero boundary values.
    let node = |b: &mut TapeBuilder, i: usize| -> Option<Expr> {
        if i == 0 || i == n {
            None
        } else if i == c {
            Some(one)
        } else {
            Some(b.var(i - 1))
        }
    };
    let laplacian = |b: &mut TapeBuilder, i: usize| -> Expr {
        let mid = node(b, i).expect("interior index");
        let mut acc = b.scale(Interval::point(-2.0), mid);
        for j in [i - 1, i + 1] {
            if let Some(e) = node(b, j) {
                acc = b.add(acc, e);
            }
        }
        b.scale(n_sq, acc)
    };

    let delta_c = laplacian(&mut b, c);
    let mut outputs = Vec::with_capacity(n);
    for i in 1..n {
        if i == c {
            let a = b.mul(e1, delta_c);
            let a = b.neg(a);
            let ls = b.scale(lambda, s);
            outputs.push(b.sub(a, ls));
            continue;
        }
        let x = b.var(i - 1);
        let xh = b.mul(x, h1);
        let coupling = b.mul(xh, delta_c);
        let decay = b.scale(lambda, x);
        let delta_i = laplacian(&mut b, i);
        let diffusion = b.mul(h1, delta_i);
        let xm = b.powi(x, m);
        let w = b.sub(xm, one);
        let arg = b.mul(w, rsm);
        let g = b.exp(arg);
        let reaction = b.scale(lambda, g);
        let f = b.sub(diffusion, coupling);
        let f = b.sub(f, decay);
        outputs.push(b.add(f, reaction));
    }
    outputs.push(h1);
    b.finish(outputs)
}

impl OdeSystem for BlowupSystem {
    fn tape(&self) -> &Tape {
        &self.tape
    }

    fn field(&self, y: &IntervalVector) -> Result<IntervalVector> {
        let a = AugmentedState::from_vector(&self.params, y)?;
        let mut f = desing_field(&self.params, &a.c)?.into_vec();
        f.push(safe_h(&HParams::unit(1, self.params.m()), a.c.s)?);
        Ok(IntervalVector::new(f))
    }

    fn admit(&self, y: &IntervalVector) -> Result<()> {
        let a = AugmentedState::from_vector(&self.params, y)?;
        if let Some((index, upper)) = a.c.max_x() {
            if upper > 1.0 {
                return Err(Error::ReframeNeeded { index, upper });
            }
        }
        if a.c.s.lo() < 0.0 {
            return Err(Error::StepFailure {
                tau: f64::NAN,
                reason: format!("s = {} crosses the horizon", a.c.s),
            });
        }
        Ok(())
    }
}

/// When to end [`integrate`].
pub enum StopCondition<'a> {
    /// Integrate up to this `τ`.
    AtTau(f64),
    /// Stop after the first step for which the predicate holds.
    When(Box<dyn FnMut(&EnclosureStep) -> Result<bool> + 'a>),
}

/// A-priori tube for one step of length `h` from `a`.
pub fn apriori_enclosure(
    p: &ProblemParams,
    a: &AugmentedState,
    h: f64,
    opts: &IntegratorOptions,
) -> Result<AugmentedState> {
    let sys = BlowupSystem::new(p);
    let tube = lohner::apriori_enclosure(&sys, &a.to_vector(), h, opts.tube_inflation)?;
    AugmentedState::from_vector(p, &tube)
}

/// A single step of length `h` starting from the box `a`.
pub fn step(
    p: &ProblemParams,
    a: &AugmentedState,
    h: f64,
    opts: &IntegratorOptions,
) -> Result<EnclosureStep> {
    opts.validate()?;
    let sys = BlowupSystem::new(p);
    let set = LohnerSet::from_box(&a.to_vector())?;
    let s = lohner_step(&sys, &set, h, &opts.driver().control)?;
    Ok(EnclosureStep {
        tau: Interval::new(0.0, h)?,
        state: AugmentedState::from_vector(p, &s.enclosure)?,
        tube: AugmentedState::from_vector(p, &s.tube)?,
    })
}

/// Integrates from `a0` until `stop` fires.
///
/// Lower bounds of `t` are carried forward, since `t` never decreases.
pub fn integrate(
    p: &ProblemParams,
    a0: &AugmentedState,
    stop: StopCondition<'_>,
    opts: &IntegratorOptions,
) -> Result<Vec<EnclosureStep>> {
    opts.validate()?;
    let sys = BlowupSystem::new(p);
    let mut t_floor = a0.t.lo();
    let mut out: Vec<EnclosureStep> = Vec::new();
    let (tau_end, mut predicate) = match stop {
        StopCondition::AtTau(t) => (Some(t), None),
        StopCondition::When(f) => (None, Some(f)),
    };
    integrate_system(&sys, &a0.to_vector(), tau_end, &opts.driver(), |vs| {
        let mut state = AugmentedState::from_vector(p, &vs.state)?;
        let mut tube = AugmentedState::from_vector(p, &vs.tube)?;
        state.t = raise_lower(state.t, t_floor);
        tube.t = raise_lower(tube.t, t_floor);
        t_floor = state.t.lo();
        let step = EnclosureStep {
            tau: vs.tau,
            state,
            tube,
        };
        let done = match predicate.as_mut() {
            Some(f) => f(&step)?,
            None => false,
        };
        out.push(step);
        Ok(done)
    })?;
    Ok(out)
}

fn raise_lower(t: Interval, floor: f64) -> Interval {
    if t.lo() >= floor {
        t
    } else {
        Interval::new(floor.min(t.hi()), t.hi()).unwrap_or(t)
    }
}
