use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Interval;
use crate::error::{Error, Result};

/// A dense vector of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(entries: Vec<Interval>) -> Self {
        IntervalVector(entries)
    }

    pub fn zeros(len: usize) -> Self {
        IntervalVector(vec![Interval::ZERO; len])
    }

    pub fn from_points(xs: &[f64]) -> Self {
        IntervalVector(xs.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Interval> {
        self.0
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    fn check_len(&self, other: &IntervalVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &IntervalVector) -> Result<IntervalVector> {
        self.check_len(other)?;
        Ok(IntervalVector(
            self.0.iter().zip(&other.0).map(|(a, b)| *a + *b).collect(),
        ))
    }

    pub fn sub(&self, other: &IntervalVector) -> Result<IntervalVector> {
        self.check_len(other)?;
        Ok(IntervalVector(
            self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect(),
        ))
    }

    pub fn scale(&self, c: Interval) -> IntervalVector {
        IntervalVector(self.0.iter().map(|a| *a * c).collect())
    }

    pub fn dot(&self, other: &IntervalVector) -> Result<Interval> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| *a * *b).sum())
    }

    pub fn hull(&self, other: &IntervalVector) -> Result<IntervalVector> {
        self.check_len(other)?;
        Ok(IntervalVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect(),
        ))
    }

    /// Componentwise intersection; `None` if any component is disjoint.
    pub fn intersect(&self, other: &IntervalVector) -> Result<Option<IntervalVector>> {
        self.check_len(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalVector))
    }

    pub fn is_subset(&self, other: &IntervalVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset(b))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;

    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a IntervalVector {
    type Item = &'a Interval;
    type IntoIter = std::slice::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
