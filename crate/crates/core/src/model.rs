//! The discretized reaction-diffusion system, its directional compactification at the centre
//! node, and the desingularized vector field that is regular up to the horizon `s = 0`.
//!
//! Vectors over the compactified coordinates use *slot order*: slot `i - 1` holds grid index
//! `i` for `i = 1..n-1`, and the centre slot `n/2 - 1` holds `s`. This matches the natural
//! ordering `(x_1, .., x_{n/2-1}, s, x_{n/2+1}, .., x_{n-1})`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{safe_h, HParams, Interval, IntervalMatrix, IntervalVector};

/// Grid size `n`, exponent `m` and reaction coefficient `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: usize,
    m: u32,
    lambda: Interval,
}

impl ProblemParams {
    pub fn new(n: usize, m: u32, lambda: Interval) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::Parameter(format!("n must be even, got {n}")));
        }
        if n < 4 {
            return Err(Error::Parameter(format!("n must be at least 4, got {n}")));
        }
        if m == 0 {
            return Err(Error::Parameter("m must be positive".into()));
        }
        if lambda.lo() <= 0.0 {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ProblemParams { n, m, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn lambda(&self) -> Interval {
        self.lambda
    }

    /// Grid index `n/2` of the compactified component.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Slot holding `s` in slot-ordered vectors.
    pub fn s_slot(&self) -> usize {
        self.n / 2 - 1
    }

    /// Number of unknowns, `n - 1`.
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    fn n_sq(&self) -> Interval {
        Interval::point((self.n * self.n) as f64)
    }
}

/// Physical state `u_1..u_{n-1}`; the boundary values `u_0 = u_n = 0` are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysState {
    pub u: IntervalVector,
}

impl PhysState {
    pub fn new(p: &ProblemParams, u: IntervalVector) -> Result<Self> {
        if u.len() != p.dim() {
            return Err(Error::Dimension {
                expected: p.dim(),
                found: u.len(),
            });
        }
        Ok(PhysState { u })
    }

    /// `u_i` for grid index `i` in `0..=n`.
    pub fn at(&self, i: usize) -> Interval {
        let n = self.u.len() + 1;
        if i == 0 || i == n {
            Interval::ZERO
        } else {
            self.u[i - 1]
        }
    }
}

/// Compactified state `(s, x_i)` for `i != n/2`; `x` is stored in ascending grid index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactState {
    pub s: Interval,
    pub x: IntervalVector,
}

impl CompactState {
    pub fn new(p: &ProblemParams, s: Interval, x: IntervalVector) -> Result<Self> {
        if x.len() != p.n() - 2 {
            return Err(Error::Dimension {
                expected: p.n() - 2,
                found: x.len(),
            });
        }
        Ok(CompactState { s, x })
    }

    pub fn origin(p: &ProblemParams) -> Self {
        CompactState {
            s: Interval::ZERO,
            x: IntervalVector::zeros(p.n() - 2),
        }
    }

    fn n(&self) -> usize {
        self.x.len() + 2
    }

    /// Position of grid index `i` (`i != n/2`) inside `x`.
    pub fn x_pos(&self, i: usize) -> usize {
        let c = self.n() / 2;
        debug_assert!(i >= 1 && i < self.n() && i != c);
        if i < c {
            i - 1
        } else {
            i - 2
        }
    }

    /// Grid index of position `j` in `x`.
    pub fn grid_index(&self, j: usize) -> usize {
        let c = self.n() / 2;
        if j + 1 < c {
            j + 1
        } else {
            j + 2
        }
    }

    /// `x_i` at grid index `i` in `0..=n`, with the conventions `x_0 = x_n = 0`, `x_{n/2} = 1`.
    pub fn neighbor(&self, i: usize) -> Interval {
        let n = self.n();
        if i == 0 || i == n {
            Interval::ZERO
        } else if i == n / 2 {
            Interval::ONE
        } else {
            self.x[self.x_pos(i)]
        }
    }

    pub fn to_slots(&self) -> IntervalVector {
        let c = self.n() / 2;
        (1..self.n())
            .map(|i| if i == c { self.s } else { self.x[self.x_pos(i)] })
            .collect()
    }

    pub fn from_slots(v: &IntervalVector) -> Self {
        let n = v.len() + 1;
        let c = n / 2;
        let x = (1..n).filter(|&i| i != c).map(|i| v[i - 1]).collect();
        CompactState { s: v[c - 1], x }
    }

    /// Largest `x_i` upper bound with its grid index.
    pub fn max_x(&self) -> Option<(usize, f64)> {
        self.x
            .iter()
            .enumerate()
            .map(|(j, xi)| (self.grid_index(j), xi.hi()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Choice of initial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    /// `u_i(0) = 2.5 (1 - cos(2 pi y_i))`
    CosineM1,
    /// `u_i(0) = 1 - cos(2 pi y_i)`
    CosineM2,
    /// Plain text, one decimal value per line, exactly `n - 1` lines.
    File(PathBuf),
}

/// Enclosure of `cos(2 pi j / n)` for even `n` and `0 <= j <= n`.
fn cos_two_pi_frac(j: usize, n: usize) -> Result<Interval> {
    let j = j.min(n - j);
    let (j, sign) = if 4 * j <= n { (j, 1.0) } else { (n / 2 - j, -1.0) };
    let arg = (Interval::PI * Interval::point(2.0 * j as f64)).div(&Interval::point(n as f64))?;
    Ok(arg.cos_small()?.scale(sign))
}

pub fn initial_data(kind: &InitialKind, p: &ProblemParams) -> Result<PhysState> {
    let n = p.n();
    let u: IntervalVector = match kind {
        InitialKind::CosineM1 | InitialKind::CosineM2 => {
            let amp = if *kind == InitialKind::CosineM1 {
                Interval::point(2.5)
            } else {
                Interval::ONE
            };
            (1..n)
                .map(|i| Ok(amp * (Interval::ONE - cos_two_pi_frac(i, n)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .collect()
        }
        InitialKind::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            parse_initial_values(&text, p)?
        }
    };
    PhysState::new(p, u)
}

/// Parses the initial-data file format.
pub fn parse_initial_values(text: &str, p: &ProblemParams) -> Result<IntervalVector> {
    let lines: Vec<&str> = text.trim_end().lines().collect();
    if lines.len() != p.dim() {
        return Err(Error::Input(format!(
            "expected {} values, found {} lines",
            p.dim(),
            lines.len()
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(k, line)| {
            Interval::from_decimal(line).map_err(|_| Error::Input(format!("line {}: {line:?}", k + 1)))
        })
        .collect::<Result<Vec<_>>>()
        .map(IntervalVector::new)
}

/// Right-hand side of the discretized system with the standard Dirichlet Laplacian.
pub fn original_field(p: &ProblemParams, u: &PhysState) -> Result<IntervalVector> {
    if u.u.len() != p.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            found: u.u.len(),
        });
    }
    let n_sq = p.n_sq();
    let two = Interval::point(2.0);
    Ok((1..p.n())
        .map(|i| {
            let lap = n_sq * (u.at(i - 1) - two * u.at(i) + u.at(i + 1));
            lap + p.lambda() * u.at(i).powi(p.m()).exp()
        })
        .collect())
}

/// Maps `u` to `(s, x)` with `u_{n/2} = 1/s`, `u_i = x_i / s`.
pub fn compactify(p: &ProblemParams, u: &PhysState) -> Result<CompactState> {
    let c = p.center();
    let peak = u.at(c);
    if peak.lo() <= 0.0 {
        return Err(Error::Domain(format!("u_{c} = {peak} is not positive")));
    }
    let s = peak.recip()?;
    let mut x = Vec::with_capacity(p.n() - 2);
    for i in (1..p.n()).filter(|&i| i != c) {
        let xi = u.at(i).div(&peak)?;
        if xi.hi() > 1.0 {
            return Err(Error::ReframeNeeded {
                index: i,
                upper: xi.hi(),
            });
        }
        x.push(xi);
    }
    CompactState::new(p, s, IntervalVector::new(x))
}

pub fn decompactify(p: &ProblemParams, cs: &CompactState) -> Result<PhysState> {
    if cs.s.lo() <= 0.0 {
        return Err(Error::Singularity(format!(
            "s = {} touches the horizon and has no physical image",
            cs.s
        )));
    }
    let c = p.center();
    let peak = cs.s.recip()?;
    let u = (1..p.n())
        .map(|i| if i == c { Ok(peak) } else { cs.neighbor(i).div(&cs.s) })
        .collect::<Result<Vec<_>>>()?;
    PhysState::new(p, IntervalVector::new(u))
}

/// `Delta_i = N^2 (x_{i-1} - 2 x_i + x_{i+1})` with the slot conventions of [`CompactState::neighbor`].
fn laplacian(p: &ProblemParams, cs: &CompactState, i: usize) -> Interval {
    p.n_sq() * (cs.neighbor(i - 1) - Interval::point(2.0) * cs.neighbor(i) + cs.neighbor(i + 1))
}

fn check_admissible(p: &ProblemParams, cs: &CompactState) -> Result<()> {
    if cs.x.len() != p.n() - 2 {
        return Err(Error::Dimension {
            expected: p.n() - 2,
            found: cs.x.len(),
        });
    }
    if let Some((i, upper)) = cs.max_x() {
        if upper > 1.0 {
            return Err(Error::Domain(format!(
                "x_{i} <= {upper} exceeds 1, the exponent weight 1 - x_i^m turns negative"
            )));
        }
    }
    Ok(())
}

/// `1 - x^m` as an exponent weight, clamped at zero from below only when `x <= 1` holds.
fn weight(xi: Interval, m: u32) -> Interval {
    Interval::ONE - xi.powi(m)
}

/// The desingularized vector field in slot order.
pub fn desing_field(p: &ProblemParams, cs: &CompactState) -> Result<IntervalVector> {
    check_admissible(p, cs)?;
    let (m, lambda, c) = (p.m(), p.lambda(), p.center());
    let s = cs.s;
    let h1 = safe_h(&HParams::unit(1, m), s)?;
    let h0 = safe_h(&HParams::unit(0, m), s)?;
    let delta_c = laplacian(p, cs, c);

    (1..p.n())
        .map(|i| {
            if i == c {
                return Ok(-(h0 * delta_c) - lambda * s);
            }
            let xi = cs.neighbor(i);
            let g = safe_h(&HParams::new(0, weight(xi, m), m)?, s)?;
            Ok(-(xi * h1 * delta_c) - lambda * xi + h1 * laplacian(p, cs, i) + lambda * g)
        })
        .collect::<Result<Vec<_>>>()
        .map(IntervalVector::new)
}

/// Closed-form Jacobian of [`desing_field`] in slot order.
pub fn desing_jacobian(p: &ProblemParams, cs: &CompactState) -> Result<IntervalMatrix> {
    check_admissible(p, cs)?;
    let (n, m, lambda, c) = (p.n(), p.m(), p.lambda(), p.center());
    let mf = Interval::point(m as f64);
    let n_sq = p.n_sq();
    let s = cs.s;

    let h0 = safe_h(&HParams::unit(0, m), s)?;
    let h1 = safe_h(&HParams::unit(1, m), s)?;
    let h2 = safe_h(&HParams::unit(2, m), s)?;
    let h_m1 = safe_h(&HParams::unit(m + 1, m), s)?;
    let h_m2 = safe_h(&HParams::unit(m + 2, m), s)?;
    // (1 - m s^{-m}) h_{2,1;m}, written without division.
    let dh1 = h2 - mf * h_m2;
    let delta_c = laplacian(p, cs, c);

    let mut jac = IntervalMatrix::zeros(n - 1, n - 1);
    let slot = |i: usize| i - 1;

    jac[(slot(c), slot(c))] = -(mf * h_m1 * delta_c) - lambda;
    for j in [c - 1, c + 1] {
        jac[(slot(c), slot(j))] = -(n_sq * h0);
    }

    for i in (1..n).filter(|&i| i != c) {
        let xi = cs.neighbor(i);
        let w = weight(xi, m);
        let h_w_m1 = safe_h(&HParams::new(m + 1, w, m)?, s)?;
        let h_w_m = safe_h(&HParams::new(m, w, m)?, s)?;

        let delta_i = laplacian(p, cs, i);
        jac[(slot(i), slot(c))] =
            dh1 * (xi * delta_c - delta_i) - lambda * mf * (xi.powi(m) - Interval::ONE) * h_w_m1;

        // d/dx_i of lambda e^{-(1 - x_i^m)/s^m} is +m lambda x_i^{m-1} h_{m,1-x_i^m;m}.
        let diag = -(h1 * delta_c) - lambda - Interval::point(2.0) * n_sq * h1
            + mf * lambda * xi.powi(m - 1) * h_w_m;
        jac[(slot(i), slot(i))] = jac[(slot(i), slot(i))] + diag;
        for j in [c - 1, c + 1] {
            jac[(slot(i), slot(j))] = jac[(slot(i), slot(j))] - n_sq * xi * h1;
        }
        if i - 1 != c && i - 1 != 0 {
            jac[(slot(i), slot(i - 1))] = jac[(slot(i), slot(i - 1))] + n_sq * h1;
        }
        if i + 1 != c && i + 1 != n {
            jac[(slot(i), slot(i + 1))] = jac[(slot(i), slot(i + 1))] + n_sq * h1;
        }
    }
    Ok(jac)
}
