use blowup_core::certify::*;
use blowup_core::error::Error;
use blowup_core::integrator::IntegratorOptions;
use blowup_core::interval::{Interval, IntervalVector};
use blowup_core::model::*;
use num_rational::BigRational;

fn run(n: usize, m: u32, opts: &CertifyOptions) -> blowup_core::error::Result<CertifiedRun> {
    let p = ProblemParams::new(n, m, Interval::ONE).unwrap();
    let kind = if m == 1 { InitialKind::CosineM1 } else { InitialKind::CosineM2 };
    certify_blowup_traced(&p, &initial_data(&kind, &p).unwrap(), opts)
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

#[test]
fn certificate_is_coherent() {
    for m in [1, 2] {
        let r = run(6, m, &CertifyOptions::default()).unwrap();
        let c = &r.certificate;
        assert!(c.t_max.lo() <= c.t_bar.lo() && c.t_bar.lo() <= c.t_bar.hi() && c.t_bar.hi() <= c.t_max.hi());
        assert_eq!(c.t_max.lo(), c.t_bar.lo());
        // t_max.hi is t_bar.hi + tail rounded up to the next float
        let exact = q(c.t_bar.hi()) + q(c.tail);
        assert!(q(c.t_max.hi()) >= exact);
        assert!(q(c.t_max.hi().next_down()) < exact);
        assert!(c.tail >= 0.0 && c.tail <= 1e-100);
        assert!(c.l_at_tau_bar.hi() < c.epsilon && c.epsilon <= 1.0 && c.c > 0.0);
        assert_eq!(c.steps, r.trajectory.len());
        assert_eq!(c.tau_bar, r.trajectory.last().unwrap().tau.hi());
        let last = &r.trajectory.last().unwrap().state;
        assert!(trap_check(&r.domain, last));
    }
}

#[test]
fn runs_are_deterministic() {
    let a = run(6, 2, &CertifyOptions::default()).unwrap().certificate;
    let b = run(6, 2, &CertifyOptions::default()).unwrap().certificate;
    let strip = |c: &BlowupCertificate| BlowupCertificate { wall_time_sec: 0.0, ..c.clone() };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn tighter_tolerances_stay_consistent() {
    let a = run(6, 1, &CertifyOptions::default()).unwrap().certificate;
    let mut opts = CertifyOptions::default();
    opts.integrator = IntegratorOptions { tol: 1e-18, order: 12, ..Default::default() };
    let b = run(6, 1, &opts).unwrap().certificate;
    assert!(a.t_max.intersect(&b.t_max).is_some(), "{} vs {}", a.t_max, b.t_max);
}

#[test]
fn json_round_trip_is_exact() {
    let c = run(6, 1, &CertifyOptions::default()).unwrap().certificate;
    let text = c.to_json().unwrap();
    assert_eq!(BlowupCertificate::from_json(&text).unwrap(), c);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["c", "epsilon", "l_at_tau_bar", "lambda", "m", "n", "steps", "t_bar", "t_max", "tail", "tau_bar", "wall_time_sec"]
    );
    assert!(value["t_max"].as_array().unwrap().len() == 2);
}

#[test]
fn a_single_step_budget_is_exhausted() {
    let opts = CertifyOptions {
        integrator: IntegratorOptions { max_steps: 1, ..Default::default() },
        ..Default::default()
    };
    assert!(matches!(run(6, 1, &opts), Err(Error::BudgetExhausted { .. })));
}

#[test]
fn off_centre_peaks_need_another_chart() {
    let p = ProblemParams::new(6, 1, Interval::ONE).unwrap();
    let u = PhysState::new(&p, IntervalVector::from_points(&[1.0, 4.0, 3.0, 1.0, 0.5])).unwrap();
    assert!(matches!(
        certify_blowup(&p, &u, &CertifyOptions::default()),
        Err(Error::ReframeNeeded { .. })
    ));
}

#[test]
fn rate_fit_on_a_validated_run() {
    let r = run(6, 1, &CertifyOptions::default()).unwrap();
    let fit = rate_diagnostic(&r.certificate, &r.trajectory).unwrap();
    assert!(fit.points >= MIN_RATE_POINTS && fit.residual <= 0.1, "{fit:?}");
    // a constant trajectory carries no usable points
    let frozen: Vec<_> = r.trajectory.iter().take(1).cloned().collect();
    assert!(matches!(
        rate_diagnostic(&r.certificate, &frozen),
        Err(Error::InsufficientData { .. })
    ));
}
