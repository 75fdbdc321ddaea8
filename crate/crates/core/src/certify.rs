//! Blow-up time certification: domain validation, integration into the trap, tail estimate.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, AugmentedState, EnclosureStep, IntegratorOptions, StopCondition};
use crate::interval::Interval;
use crate::lyapunov::{find_domain, lyapunov_value, LyapunovDomain};
use crate::model::{compactify, desing_field, CompactState, PhysState, ProblemParams};

/// Fraction of `epsilon` that `L` must fall below before the run may stop.
pub const TRAP_MARGIN: f64 = 0.9;

/// `L.hi < epsilon` and `s.lo > 0`.
pub fn trap_check(dom: &LyapunovDomain, a: &AugmentedState) -> bool {
    lyapunov_value(&a.c).hi() < dom.epsilon && a.c.s.lo() > 0.0
}

/// Upper bound `2/(c m) exp(-1/l_up^{m/2})` of the physical time left after `L <= l_up`.
pub fn tail_bound(dom: &LyapunovDomain, m: u32, l_up: f64) -> Result<f64> {
    if !(l_up > 0.0) {
        return Err(Error::Domain(format!("tail bound needs L > 0, got {l_up}")));
    }
    if l_up > dom.epsilon {
        return Err(Error::Domain(format!(
            "L = {l_up} lies outside the sublevel set epsilon = {}",
            dom.epsilon
        )));
    }
    let l = Interval::point(l_up);
    let root = if m % 2 == 0 {
        l.powi(m / 2)
    } else {
        l.sqrt()?.powi(m)
    };
    let decay = (-root.recip()?).exp();
    let factor = Interval::point(2.0).div(&(Interval::point(dom.c) * Interval::point(m as f64)))?;
    Ok((factor * decay).hi())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub integrator: IntegratorOptions,
    /// Target sublevel for the Lyapunov domain search.
    pub epsilon_target: f64,
    /// The run continues inside the trap until the tail bound falls below this.
    pub tail_target: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            integrator: IntegratorOptions::default(),
            epsilon_target: 1.0,
            tail_target: 1e-100,
        }
    }
}

/// Verified enclosure of the blow-up time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub n: usize,
    pub m: u32,
    pub lambda: Interval,
    pub epsilon: f64,
    pub c: f64,
    pub tau_bar: f64,
    pub t_bar: Interval,
    pub tail: f64,
    pub t_max: Interval,
    pub l_at_tau_bar: Interval,
    pub steps: usize,
    pub wall_time_sec: f64,
}

impl BlowupCertificate {
    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.m, self.lambda)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }
}

/// Certificate plus the validated trajectory that produced it.
#[derive(Debug, Clone)]
pub struct CertifiedRun {
    pub certificate: BlowupCertificate,
    pub domain: LyapunovDomain,
    pub trajectory: Vec<EnclosureStep>,
}

pub fn certify_blowup(
    p: &ProblemParams,
    u0: &PhysState,
    opts: &CertifyOptions,
) -> Result<BlowupCertificate> {
    certify_blowup_traced(p, u0, opts).map(|r| r.certificate)
}

/// Runs the certification and keeps the trajectory.
pub fn certify_blowup_traced(
    p: &ProblemParams,
    u0: &PhysState,
    opts: &CertifyOptions,
) -> Result<CertifiedRun> {
    let start = Instant::now();
    if !(opts.tail_target > 0.0) {
        return Err(Error::Parameter("tail target must be positive".into()));
    }

    let at_origin = desing_field(p, &CompactState::origin(p))?;
    if at_origin.iter().any(|f| !f.contains_zero()) {
        return Err(Error::ValidationFailure("the origin is not an equilibrium".into()));
    }
    let domain = find_domain(p, opts.epsilon_target)?;

    let a0 = AugmentedState::new(compactify(p, u0)?, Interval::ZERO);
    let m = p.m();
    let level = (Interval::point(domain.epsilon) * Interval::point(TRAP_MARGIN)).lo();
    let stop = StopCondition::When(Box::new(|step: &EnclosureStep| {
        let l = lyapunov_value(&step.state.c).hi();
        if l >= level || !trap_check(&domain, &step.state) {
            return Ok(false);
        }
        Ok(tail_bound(&domain, m, l)? <= opts.tail_target)
    }));
    let trajectory = integrate(p, &a0, stop, &opts.integrator)?;
    let last = trajectory.last().ok_or_else(|| Error::BudgetExhausted { steps: 0 })?;

    let l_at_tau_bar = lyapunov_value(&last.state.c);
    let tail = tail_bound(&domain, m, l_at_tau_bar.hi())?;
    let t_bar = last.state.t;
    let t_max = Interval::new(t_bar.lo(), crate::interval::add_up(t_bar.hi(), tail))?;

    Ok(CertifiedRun {
        certificate: BlowupCertificate {
            n: p.n(),
            m,
            lambda: p.lambda(),
            epsilon: domain.epsilon,
            c: domain.c,
            tau_bar: last.tau.hi(),
            t_bar,
            tail,
            t_max,
            l_at_tau_bar,
            steps: trajectory.len(),
            wall_time_sec: start.elapsed().as_secs_f64(),
        },
        domain,
        trajectory,
    })
}

/// Least-squares fit of `u = C [ln(1/(T - t))]^{1/m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub c: f64,
    /// Root mean square of the relative residuals.
    pub residual: f64,
    pub points: usize,
}

pub const MIN_RATE_POINTS: usize = 10;

/// Fits `C` to samples `(t, u)` with `t < t_max`.
pub fn fit_rate(samples: &[(f64, f64)], t_max: f64, m: u32) -> Result<RateFit> {
    let rows: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, u)| *t < t_max && u.is_finite() && *u > 0.0)
        .map(|&(t, u)| ((1.0 / (t_max - t)).ln().powf(1.0 / m as f64), u))
        .filter(|(g, _)| g.is_finite() && *g > 0.0)
        .collect();
    if rows.len() < MIN_RATE_POINTS {
        return Err(Error::InsufficientData {
            usable: rows.len(),
            required: MIN_RATE_POINTS,
        });
    }
    let c = rows.iter().map(|(g, u)| g * u).sum::<f64>() / rows.iter().map(|(g, _)| g * g).sum::<f64>();
    let mse = rows.iter().map(|(g, u)| ((u - c * g) / u).powi(2)).sum::<f64>() / rows.len() as f64;
    Ok(RateFit {
        c,
        residual: mse.sqrt(),
        points: rows.len(),
    })
}

/// Non-rigorous rate fit on the last decade of time before blow-up.
///
/// Uses midpoints of steps with `s > 0` whose distance to the blow-up time lies in
/// `(1000 w, T/10]`, where `w` bounds the width of the time enclosures.
pub fn rate_diagnostic(cert: &BlowupCertificate, trajectory: &[EnclosureStep]) -> Result<RateFit> {
    let big_t = cert.t_max.mid();
    let samples: Vec<(f64, f64)> = trajectory
        .iter()
        .filter(|st| st.state.c.s.lo() > 0.0)
        .filter_map(|st| {
            let t = st.state.t;
            let gap = big_t - t.mid();
            let resolution = 1e3 * t.width().max(cert.t_max.width());
            (gap > resolution && gap <= 0.1 * big_t).then(|| (t.mid(), 1.0 / st.state.c.s.mid()))
        })
        .collect();
    fit_rate(&samples, big_t, cert.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalVector;
    use crate::lyapunov::CandidateBox;

    fn domain(epsilon: f64, c: f64) -> LyapunovDomain {
        LyapunovDomain {
            candidate: CandidateBox::new(1.0, 0.5).unwrap(),
            epsilon,
            c,
        }
    }

    fn state(p: &ProblemParams, s: Interval) -> AugmentedState {
        AugmentedState::new(
            CompactState::new(p, s, IntervalVector::zeros(p.n() - 2)).unwrap(),
            Interval::ZERO,
        )
    }

    #[test]
    fn trap_requires_strict_interior_and_positive_s() {
        let p = ProblemParams::new(6, 1, Interval::ONE).unwrap();
        let d = domain(8.02e-4, 2.0);
        assert!(trap_check(&d, &state(&p, Interval::point(1e-3))));
        assert!(!trap_check(&d, &state(&p, Interval::new(0.0, 1e-3).unwrap())));
        let edge = domain(0.25, 2.0);
        assert!(!trap_check(&edge, &state(&p, Interval::point(0.5))));
    }

    #[test]
    fn tail_values() {
        let d = domain(8.02e-4, 1.0);
        let t = tail_bound(&d, 1, 8.02e-4).unwrap();
        let exact = 2.0 * (-1.0 / 8.02e-4f64.sqrt()).exp();
        assert!(t >= exact && t <= exact * (1.0 + 1e-12), "{t} vs {exact}");
        assert!((9.0e-16..9.6e-16).contains(&t));
        let t = tail_bound(&d, 1, 2e-6).unwrap();
        assert!(t > 0.0 && t < 1e-306, "{t:e}");
        assert!(tail_bound(&d, 1, 0.0).is_err());
        let wide = domain(0.09, 1.0);
        assert!(tail_bound(&wide, 2, 4e-3).unwrap() < tail_bound(&wide, 2, 8e-3).unwrap());
    }

    #[test]
    fn fit_recovers_its_own_model() {
        let (c0, big_t) = (1.3, 0.02);
        for m in [1, 2] {
            let samples: Vec<(f64, f64)> = (1..=40)
                .map(|k| {
                    let t = big_t - 1e-3 * 0.8f64.powi(k);
                    (t, c0 * (1.0 / (big_t - t)).ln().powf(1.0 / m as f64))
                })
                .collect();
            let fit = fit_rate(&samples, big_t, m).unwrap();
            assert!((fit.c - c0).abs() < 0.013 && fit.residual < 1e-12);
        }
    }

    #[test]
    fn few_points_are_rejected() {
        let samples = [(0.5, 1.0); 3];
        assert!(matches!(
            fit_rate(&samples, 1.0, 1),
            Err(Error::InsufficientData { usable: 3, .. })
        ));
    }
}
