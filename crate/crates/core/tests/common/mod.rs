//! Float and rational oracles shared by the integration tests.
#![allow(dead_code)]

use blowup_core::interval::{Interval, IntervalVector};
use blowup_core::lyapunov::CandidateBox;
use blowup_core::model::*;
use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SAMPLES: usize = 100_000;

/// Augmented desingularized field in plain floats, slot order followed by `t`.
pub fn float_field(n: usize, m: u32, lambda: f64, y: &[f64]) -> Vec<f64> {
    let c = n / 2;
    let s = y[c - 1];
    let x = |i: usize| -> f64 {
        if i == 0 || i == n {
            0.0
        } else if i == c {
            1.0
        } else {
            y[i - 1]
        }
    };
    let n_sq = (n * n) as f64;
    let lap = |i: usize| n_sq * (x(i - 1) - 2.0 * x(i) + x(i + 1));
    let sm = s.powi(m as i32);
    let h0 = (-1.0 / sm).exp();
    let h1 = h0 / s;
    let mut f: Vec<f64> = (1..n)
        .map(|i| {
            if i == c {
                -h0 * lap(c) - lambda * s
            } else {
                let xi = x(i);
                -xi * h1 * lap(c) - lambda * xi + h1 * lap(i) + lambda * (-(1.0 - xi.powi(m as i32)) / sm).exp()
            }
        })
        .collect();
    f.push(h1);
    f
}

/// Adaptive Dormand-Prince 5(4) with mixed absolute/relative tolerance.
pub fn dopri(f: &dyn Fn(&[f64]) -> Vec<f64>, y0: &[f64], span: f64, tol: f64) -> Vec<f64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0,
    ];
    let _ = C;
    let d = y0.len();
    let mut y = y0.to_vec();
    let mut done = 0.0;
    let mut h = (span / 100.0).min(1e-3);
    while done < span {
        h = h.min(span - done);
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for stage in 0..7 {
            let ys: Vec<f64> = (0..d)
                .map(|i| y[i] + h * (0..stage).map(|j| A[stage][j] * k[j][i]).sum::<f64>())
                .collect();
            k.push(f(&ys));
        }
        let y5: Vec<f64> = (0..d).map(|i| y[i] + h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>()).collect();
        let err = (0..d)
            .map(|i| {
                let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                (e / (tol * (1.0 + y[i].abs().max(y5[i].abs())))).abs()
            })
            .fold(0.0, f64::max);
        if err <= 1.0 {
            done += h;
            y = y5;
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    y
}

/// Containment with slack equal to the reference tolerance.
pub fn contains_with_slack(b: &IntervalVector, y: &[f64], tol: f64) -> bool {
    b.iter().zip(y).all(|(iv, v)| {
        let slack = tol * (1.0 + v.abs());
        iv.lo() - slack <= *v && *v <= iv.hi() + slack
    })
}

pub fn random_state(rng: &mut ChaCha8Rng, p: &ProblemParams, s_range: (f64, f64)) -> CompactState {
    let s = rng.gen_range(s_range.0..s_range.1);
    let x = (0..p.n() - 2).map(|_| Interval::point(rng.gen_range(-0.5..0.95))).collect();
    CompactState::new(p, Interval::point(s), x).unwrap()
}

/// Grid values `u_0..=u_n` of a compact point, from plain floats.
pub fn physical(p: &ProblemParams, c: &CompactState) -> Vec<f64> {
    let n = p.n();
    let s = c.s.mid();
    (0..=n)
        .map(|i| match i {
            0 => 0.0,
            i if i == n => 0.0,
            i if i == p.center() => 1.0 / s,
            i => c.neighbor(i).mid() / s,
        })
        .collect()
}

/// `h_{1,1;m}(s)` times the pushforward of the original field under `u -> (1/u_c, u_i/u_c)`.
pub fn pushforward(p: &ProblemParams, c: &CompactState) -> Vec<f64> {
    let (n, m, lambda) = (p.n(), p.m() as i32, p.lambda().mid());
    let u = physical(p, c);
    let n_sq = (n * n) as f64;
    let du: Vec<f64> = (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                0.0
            } else {
                n_sq * (u[i - 1] - 2.0 * u[i] + u[i + 1]) + lambda * u[i].powi(m).exp()
            }
        })
        .collect();
    let s = c.s.mid();
    let h1 = (-1.0 / s.powi(m)).exp() / s;
    let cc = p.center();
    (1..n)
        .map(|i| {
            if i == cc {
                -s * s * du[cc] * h1
            } else {
                let x = u[i] * s;
                s * (du[i] - x * du[cc]) * h1
            }
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

pub fn field_at(p: &ProblemParams, slots: &[f64]) -> Vec<f64> {
    let c = CompactState::from_slots(&IntervalVector::from_points(slots));
    desing_field(p, &c).unwrap().mid()
}

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn encloses(iv: Interval, exact: &BigRational) -> bool {
    q(iv.lo()) <= *exact && *exact <= q(iv.hi())
}

/// Random finite float with a wide spread of magnitudes.
pub fn wide_float(rng: &mut ChaCha8Rng) -> f64 {
    let mantissa: f64 = rng.gen_range(1.0..2.0);
    let exponent: i32 = rng.gen_range(-40..40);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => sign * rng.gen_range(0..5) as f64,
        _ => sign * mantissa * 2f64.powi(exponent),
    }
}

pub fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let a = wide_float(rng);
    let b = if rng.gen_bool(0.3) {
        a
    } else if rng.gen_bool(0.5) {
        a + wide_float(rng).abs() * 1e-3
    } else {
        wide_float(rng)
    };
    Interval::new(a.min(b), a.max(b)).unwrap()
}

pub fn sample(rng: &mut ChaCha8Rng, iv: Interval) -> f64 {
    let t: f64 = rng.gen();
    match rng.gen_range(0..8) {
        0 => iv.lo(),
        1 => iv.hi(),
        _ => (iv.lo() + t * (iv.hi() - iv.lo())).clamp(iv.lo(), iv.hi()),
    }
}

pub fn fuzz_binary(seed: u64, op: impl Fn(Interval, Interval) -> Option<Interval>, exact: impl Fn(&BigRational, &BigRational) -> Option<BigRational>) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut checked = 0;
    while checked < SAMPLES {
        let (a, b) = (random_interval(&mut rng), random_interval(&mut rng));
        let Some(r) = op(a, b) else { continue };
        let (x, y) = (sample(&mut rng, a), sample(&mut rng, b));
        let Some(e) = exact(&q(x), &q(y)) else { continue };
        checked += 1;
        if !encloses(r, &e) {
            violations += 1;
            eprintln!("violation: {a} op {b} = {r}, sample ({x}, {y})");
        }
    }
    violations
}

pub fn random_point(rng: &mut ChaCha8Rng, p: &ProblemParams, b: &CandidateBox) -> CompactState {
    let s = rng.gen_range(0.0..=b.s_bar());
    let r = b.x_radius();
    let x = (0..p.n() - 2).map(|_| Interval::point(rng.gen_range(-r..=r))).collect();
    CompactState::new(p, Interval::point(s), x).unwrap()
}

pub fn lambda_max(p: &ProblemParams, c: &CompactState) -> f64 {
    let j = desing_jacobian(p, c).unwrap();
    let d = p.dim();
    let a = DMatrix::from_fn(d, d, |i, k| j[(i, k)].mid() + j[(k, i)].mid());
    SymmetricEigen::new(a).eigenvalues.max()
}