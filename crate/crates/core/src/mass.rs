//! Sparse basic probability assignments and the functions derived from them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::{Error, PropSet, Result};

/// Tolerance on the total mass of a mass function.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Under-commitment smaller than this is rounding noise and is not moved to Θ.
const DEFICIT_FLOOR: f64 = 1e-12;

/// A mass function over a frame of `width` propositions.
///
/// Only focal sets (positive mass) are stored, so the size is bounded by the
/// number of assignments rather than by `2^width`. Iteration follows the
/// canonical `PropSet` order, which fixes every summation order downstream.
/// A mass function is *open-world* when the empty set carries mass; only the
/// Smets rule produces those.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    width: usize,
    focal: BTreeMap<PropSet, f64>,
}

impl MassFunction {
    /// Total ignorance: all mass on Θ.
    pub fn vacuous(width: usize) -> MassFunction {
        let mut focal = BTreeMap::new();
        focal.insert(PropSet::full(width), 1.0);
        MassFunction { width, focal }
    }

    /// Validates operator-entered assignments.
    ///
    /// Zero masses are dropped, repeated sets are summed, and any deficit below
    /// one is assigned to Θ.
    pub fn from_assignments<I>(width: usize, assignments: I) -> Result<MassFunction>
    where
        I: IntoIterator<Item = (PropSet, f64)>,
    {
        let mut focal: BTreeMap<PropSet, f64> = BTreeMap::new();
        let mut sum = 0.0;
        for (set, mass) in assignments {
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidMass(mass));
            }
            if set.is_empty() {
                return Err(Error::EmptyFocalSet);
            }
            if let Some(index) = set.max_index().filter(|&m| m >= width) {
                return Err(Error::ForeignSet { index, size: width });
            }
            if mass == 0.0 {
                continue;
            }
            sum += mass;
            *focal.entry(set).or_insert(0.0) += mass;
        }
        if sum > 1.0 + MASS_TOLERANCE {
            return Err(Error::MassSumExceeded { sum });
        }
        let deficit = 1.0 - sum;
        if deficit > DEFICIT_FLOOR {
            *focal.entry(PropSet::full(width)).or_insert(0.0) += deficit;
        }
        Ok(MassFunction { width, focal })
    }

    /// Wraps an already-computed map, dropping zero entries. Used by the
    /// combination and translation routines whose outputs are normalized by
    /// construction.
    pub(crate) fn from_map(width: usize, mut focal: BTreeMap<PropSet, f64>) -> MassFunction {
        focal.retain(|_, m| *m != 0.0);
        MassFunction { width, focal }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Focal sets with their masses, in canonical order.
    pub fn focal_sets(&self) -> impl Iterator<Item = (&PropSet, f64)> + '_ {
        self.focal.iter().map(|(s, m)| (s, *m))
    }

    pub fn len(&self) -> usize {
        self.focal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn mass(&self, set: &PropSet) -> f64 {
        self.focal.get(set).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.focal.values().fold(0.0, |acc, m| acc + m)
    }

    pub fn theta(&self) -> PropSet {
        PropSet::full(self.width)
    }

    pub fn is_open_world(&self) -> bool {
        self.focal.contains_key(&PropSet::empty())
    }

    /// Mass on the empty set ("unknown" under the open-world reading).
    pub fn unknown_mass(&self) -> f64 {
        self.mass(&PropSet::empty())
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.get(&self.theta()) == Some(&1.0)
    }

    /// The closed-world part, rescaled by `1 / (1 - m(∅))`. `None` when all
    /// mass sits on the empty set.
    pub fn conditioned(&self) -> Option<MassFunction> {
        if !self.is_open_world() {
            return Some(self.clone());
        }
        let kept: BTreeMap<PropSet, f64> = self
            .focal
            .iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|(s, m)| (s.clone(), *m))
            .collect();
        let surviving: f64 = kept.values().sum();
        if kept.is_empty() || surviving <= 0.0 {
            return None;
        }
        Some(MassFunction::from_map(
            self.width,
            kept.into_iter().map(|(s, m)| (s, m / surviving)).collect(),
        ))
    }

    pub(crate) fn check_member(&self, a: &PropSet) -> Result<()> {
        match a.max_index() {
            Some(index) if index >= self.width => Err(Error::ForeignSet {
                index,
                size: self.width,
            }),
            _ => Ok(()),
        }
    }

    pub(crate) fn ensure_closed_world(&self) -> Result<()> {
        if self.is_open_world() {
            Err(Error::OpenWorldInput)
        } else {
            Ok(())
        }
    }

    /// Bel(a): mass of nonempty focal sets contained in `a`.
    pub fn belief(&self, a: &PropSet) -> Result<f64> {
        self.check_member(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| !b.is_empty() && b.is_subset(a))
            .fold(0.0, |acc, (_, m)| acc + m))
    }

    /// Pl(a): mass of focal sets meeting `a`.
    pub fn plausibility(&self, a: &PropSet) -> Result<f64> {
        self.check_member(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| b.intersects(a))
            .fold(0.0, |acc, (_, m)| acc + m))
    }

    /// q(a): mass of focal sets containing `a`.
    pub fn commonality(&self, a: &PropSet) -> Result<f64> {
        self.check_member(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| a.is_subset(b))
            .fold(0.0, |acc, (_, m)| acc + m))
    }

    /// Focal sets ordered by descending mass, ties in canonical order.
    pub fn ranked(&self) -> Vec<(&PropSet, f64)> {
        let mut v: Vec<_> = self.focal_sets().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}
