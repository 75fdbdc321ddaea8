//! Expression tapes with Taylor-mode evaluation.
//!
//! A [`Tape`] records an autonomous vector field `y' = f(y)` as a straight-line program.
//! [`Tape::ode_coefficients`] computes the normalized Taylor coefficients `y_k = y^{(k)}(0)/k!`
//! of the solution through `y(0) = y0` by the usual recurrences, one order at a time, so the
//! total cost is quadratic in the order. Coefficients are generic over [`Coeff`]: plain
//! intervals give enclosures of `y_k`, [`Dual`] numbers additionally carry `d y_k / d y0`.

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Scalar type carried through the Taylor recurrences.
pub trait Coeff: Clone {
    fn zero_like(&self) -> Self;
    fn constant_like(c: Interval, like: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: Interval) -> Self;
    fn recip(&self) -> Result<Self>;
    fn exp(&self) -> Self;
}

impl Coeff for Interval {
    fn zero_like(&self) -> Self {
        Interval::ZERO
    }

    fn constant_like(c: Interval, _: &Self) -> Self {
        c
    }

    fn add(&self, o: &Self) -> Self {
        *self + *o
    }

    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }

    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }

    fn neg(&self) -> Self {
        -*self
    }

    fn scale(&self, c: Interval) -> Self {
        *self * c
    }

    fn recip(&self) -> Result<Self> {
        Interval::recip(self)
    }

    fn exp(&self) -> Self {
        Interval::exp(self)
    }
}

/// Forward-mode dual number: a value and its gradient with respect to the seeded variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: Interval,
    pub grad: Vec<Interval>,
}

impl Dual {
    pub fn variable(value: Interval, index: usize, dim: usize) -> Self {
        let mut grad = vec![Interval::ZERO; dim];
        grad[index] = Interval::ONE;
        Dual { value, grad }
    }

    pub fn constant(value: Interval, dim: usize) -> Self {
        Dual {
            value,
            grad: vec![Interval::ZERO; dim],
        }
    }
}

impl Coeff for Dual {
    fn zero_like(&self) -> Self {
        Dual::constant(Interval::ZERO, self.grad.len())
    }

    fn constant_like(c: Interval, like: &Self) -> Self {
        Dual::constant(c, like.grad.len())
    }

    fn add(&self, o: &Self) -> Self {
        Dual {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| *a + *b).collect(),
        }
    }

    fn sub(&self, o: &Self) -> Self {
        Dual {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| *a - *b).collect(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Dual {
            value: self.value * o.value,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| *a * o.value + self.value * *b)
                .collect(),
        }
    }

    fn neg(&self) -> Self {
        Dual {
            value: -self.value,
            grad: self.grad.iter().map(|a| -*a).collect(),
        }
    }

    fn scale(&self, c: Interval) -> Self {
        Dual {
            value: self.value * c,
            grad: self.grad.iter().map(|a| *a * c).collect(),
        }
    }

    fn recip(&self) -> Result<Self> {
        let r = self.value.recip()?;
        let d = -(r * r);
        Ok(Dual {
            value: r,
            grad: self.grad.iter().map(|a| *a * d).collect(),
        })
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        Dual {
            value: e,
            grad: self.grad.iter().map(|a| *a * e).collect(),
        }
    }
}

/// Handle to a node of a tape under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expr(usize);

#[derive(Debug, Clone)]
enum Op {
    Var(usize),
    Const(Interval),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Neg(usize),
    Scale(Interval, usize),
    Recip(usize),
    Exp(usize),
}

#[derive(Debug, Clone)]
pub struct TapeBuilder {
    ops: Vec<Op>,
    n_vars: usize,
}

impl TapeBuilder {
    pub fn new(n_vars: usize) -> Self {
        TapeBuilder {
            ops: Vec::new(),
            n_vars,
        }
    }

    fn push(&mut self, op: Op) -> Expr {
        self.ops.push(op);
        Expr(self.ops.len() - 1)
    }

    pub fn var(&mut self, i: usize) -> Expr {
        assert!(i < self.n_vars, "variable {i} out of range");
        self.push(Op::Var(i))
    }

    pub fn constant(&mut self, c: Interval) -> Expr {
        self.push(Op::Const(c))
    }

    pub fn add(&mut self, a: Expr, b: Expr) -> Expr {
        self.push(Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Expr, b: Expr) -> Expr {
        self.push(Op::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Expr, b: Expr) -> Expr {
        self.push(Op::Mul(a.0, b.0))
    }

    pub fn neg(&mut self, a: Expr) -> Expr {
        self.push(Op::Neg(a.0))
    }

    pub fn scale(&mut self, c: Interval, a: Expr) -> Expr {
        self.push(Op::Scale(c, a.0))
    }

    pub fn recip(&mut self, a: Expr) -> Expr {
        self.push(Op::Recip(a.0))
    }

    pub fn exp(&mut self, a: Expr) -> Expr {
        self.push(Op::Exp(a.0))
    }

    /// `a^k` by repeated multiplication.
    pub fn powi(&mut self, a: Expr, k: u32) -> Expr {
        if k == 0 {
            return self.constant(Interval::ONE);
        }
        (1..k).fold(a, |acc, _| self.mul(acc, a))
    }

    /// Finishes an autonomous field with one output per variable.
    pub fn finish(self, outputs: Vec<Expr>) -> Tape {
        assert_eq!(outputs.len(), self.n_vars, "one output per state variable");
        Tape {
            ops: self.ops,
            outputs: outputs.into_iter().map(|e| e.0).collect(),
        }
    }
}

/// Straight-line program of an autonomous vector field.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Plain evaluation of the field.
    pub fn eval<C: Coeff>(&self, y: &[C]) -> Result<Vec<C>> {
        self.check_dim(y.len())?;
        let series: Vec<Vec<C>> = y.iter().map(|c| vec![c.clone()]).collect();
        let mut vals: Vec<Vec<C>> = Vec::with_capacity(self.ops.len());
        for (idx, op) in self.ops.iter().enumerate() {
            let v = node_coeff(op, idx, 0, &vals, &series, &y[0])?;
            vals.push(vec![v]);
        }
        Ok(self.outputs.iter().map(|&o| vals[o][0].clone()).collect())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() || found == 0 {
            return Err(Error::Dimension {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// Taylor coefficients `y_0..=y_order` of the solution through `y0`, indexed `[k][i]`.
    pub fn ode_coefficients<C: Coeff>(&self, y0: &[C], order: usize) -> Result<Vec<Vec<C>>> {
        self.check_dim(y0.len())?;
        let like = &y0[0];
        let mut series: Vec<Vec<C>> = y0.iter().map(|c| vec![c.clone()]).collect();
        let mut vals: Vec<Vec<C>> = vec![Vec::with_capacity(order); self.ops.len()];
        for k in 0..order {
            for (idx, op) in self.ops.iter().enumerate() {
                let v = node_coeff(op, idx, k, &vals, &series, like)?;
                vals[idx].push(v);
            }
            let inv = Interval::ONE.div(&Interval::point((k + 1) as f64))?;
            for (i, &o) in self.outputs.iter().enumerate() {
                let next = vals[o][k].scale(inv);
                series[i].push(next);
            }
        }
        Ok((0..=order)
            .map(|k| series.iter().map(|s| s[k].clone()).collect())
            .collect())
    }
}

/// Coefficient `k` of node `idx`, given coefficients `0..k` of every node and `0..=k` of its inputs.
fn node_coeff<C: Coeff>(
    op: &Op,
    idx: usize,
    k: usize,
    vals: &[Vec<C>],
    series: &[Vec<C>],
    like: &C,
) -> Result<C> {
    Ok(match *op {
        Op::Var(i) => series[i][k].clone(),
        Op::Const(c) => {
            if k == 0 {
                C::constant_like(c, like)
            } else {
                like.zero_like()
            }
        }
        Op::Add(a, b) => vals[a][k].add(&vals[b][k]),
        Op::Sub(a, b) => vals[a][k].sub(&vals[b][k]),
        Op::Neg(a) => vals[a][k].neg(),
        Op::Scale(c, a) => vals[a][k].scale(c),
        Op::Mul(a, b) => {
            let (a, b) = (&vals[a], &vals[b]);
            (1..=k).fold(a[0].mul(&b[k]), |acc, j| acc.add(&a[j].mul(&b[k - j])))
        }
        Op::Recip(a) => {
            let a = &vals[a];
            if k == 0 {
                a[0].recip()?
            } else {
                // r_k = -r_0 sum_{j=1..k} a_j r_{k-j}
                let r = &vals[idx];
                let sum = (2..=k).fold(a[1].mul(&r[k - 1]), |acc, j| acc.add(&a[j].mul(&r[k - j])));
                r[0].mul(&sum).neg()
            }
        }
        Op::Exp(a) => {
            let a = &vals[a];
            if k == 0 {
                a[0].exp()
            } else {
                // e_k = (1/k) sum_{j=1..k} j a_j e_{k-j}
                let e = &vals[idx];
                let sum = (2..=k).fold(a[1].mul(&e[k - 1]), |acc, j| {
                    acc.add(&a[j].mul(&e[k - j]).scale(Interval::point(j as f64)))
                });
                sum.scale(Interval::ONE.div(&Interval::point(k as f64))?)
            }
        }
    })
}
