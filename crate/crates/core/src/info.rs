//! Commonality-based measure of information.
//!
//! `I(bel) = -Σ log2 q(a)` over subsets `a` of the frame with `q(a) > 0`.
//! Commonalities multiply under unnormalized combination, so `I` adds up
//! across combined evidence whenever no commonality is zero.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::{Error, MassFunction, PropSet, Result};

/// Largest frame for which the whole subset lattice is enumerated.
pub const DEFAULT_EXPLANATION_CAP: usize = 20;

/// Dense tables above this width would not fit in memory whatever the cap.
const DENSE_LIMIT: usize = 26;

/// Most subsets the restricted (large-frame) lattice may hold.
pub const RESTRICTED_FAMILY_LIMIT: usize = 4096;

/// Exact `I(bel)` in bits, enumerating all `2^n` subsets.
pub fn info_measure(m: &MassFunction, cap: usize) -> Result<f64> {
    Ok(information(commonality_table(m, cap)?.iter().copied()))
}

/// `-Σ log2 q` over the positive values.
pub fn information(q: impl Iterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    for v in q {
        if v > 0.0 {
            total -= libm::log2(v);
        }
    }
    total
}

/// `q(a)` for every subset `a`, indexed by the bit mask of `a`.
///
/// Built with the superset-sum (zeta) transform in `O(n 2^n)`.
pub fn commonality_table(m: &MassFunction, cap: usize) -> Result<Vec<f64>> {
    let n = m.width();
    if n > cap || n > DENSE_LIMIT {
        return Err(Error::FrameTooLarge { size: n, cap: cap.min(DENSE_LIMIT) });
    }
    let mut q = alloc::vec![0.0f64; 1usize << n];
    for (s, mass) in m.focal_sets() {
        let mask = s.to_mask().expect("width <= DENSE_LIMIT") as usize;
        q[mask] += mass;
    }
    for bit in 0..n {
        let b = 1usize << bit;
        for mask in 0..q.len() {
            if mask & b == 0 {
                q[mask] += q[mask | b];
            }
        }
    }
    Ok(q)
}

/// `q(a)` for each `a` of `family`, straight from the definition.
pub fn commonalities_on(m: &MassFunction, family: &[PropSet]) -> Vec<f64> {
    family
        .iter()
        .map(|a| {
            m.focal_sets()
                .filter(|(b, _)| a.is_subset(b))
                .fold(0.0, |acc, (_, v)| acc + v)
        })
        .collect()
}

/// Closure of `sets` under pairwise union, or `None` once it would exceed
/// `limit` members.
pub fn union_closure<'a>(sets: impl IntoIterator<Item = &'a PropSet>, limit: usize) -> Option<Vec<PropSet>> {
    let mut family: BTreeSet<PropSet> = BTreeSet::new();
    let mut frontier: Vec<PropSet> = Vec::new();
    for s in sets {
        if family.insert(s.clone()) {
            frontier.push(s.clone());
        }
    }
    if family.len() > limit {
        return None;
    }
    while let Some(s) = frontier.pop() {
        let snapshot: Vec<PropSet> = family.iter().cloned().collect();
        for t in &snapshot {
            let u = s.union(t);
            if family.insert(u.clone()) {
                if family.len() > limit {
                    return None;
                }
                frontier.push(u);
            }
        }
    }
    Some(family.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(ix: &[usize]) -> PropSet {
        PropSet::from_indices(ix.iter().copied())
    }

    #[test]
    fn vacuous_carries_no_information() {
        for n in [1, 3, 8] {
            assert_eq!(info_measure(&MassFunction::vacuous(n), DEFAULT_EXPLANATION_CAP).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_bits_for_half_half() {
        let m = MassFunction::from_assignments(2, [(s(&[0]), 0.5), (s(&[0, 1]), 0.5)]).unwrap();
        assert_abs_diff_eq!(info_measure(&m, 20).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(commonality_table(&m, 20).unwrap(), [1.0, 1.0, 0.5, 0.5]);
    }

    #[test]
    fn certain_singleton_excludes_zero_commonalities() {
        // q(∅)=1, q({A})=1, q({B})=0, q(Θ)=0: every counted term is log2 1.
        let m = MassFunction::from_assignments(2, [(s(&[0]), 1.0)]).unwrap();
        assert_eq!(info_measure(&m, 20).unwrap(), 0.0);
    }

    #[test]
    fn dense_table_matches_definition() {
        let m = MassFunction::from_assignments(4, [(s(&[0, 2]), 0.3), (s(&[1]), 0.2), (s(&[0, 1, 3]), 0.1)])
            .unwrap();
        let table = commonality_table(&m, 20).unwrap();
        for mask in 0..16u64 {
            let a = PropSet::from_mask(mask);
            assert_abs_diff_eq!(table[mask as usize], m.commonality(&a).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn frames_over_the_cap_are_refused() {
        let m = MassFunction::vacuous(21);
        assert_eq!(
            info_measure(&m, DEFAULT_EXPLANATION_CAP).unwrap_err(),
            Error::FrameTooLarge { size: 21, cap: 20 }
        );
    }

    #[test]
    fn union_closure_is_closed_and_bounded() {
        let sets = [s(&[0]), s(&[1]), s(&[2])];
        let fam = union_closure(sets.iter(), 100).unwrap();
        assert_eq!(fam.len(), 7);
        for a in &fam {
            for b in &fam {
                assert!(fam.contains(&a.union(b)));
            }
        }
        assert!(union_closure(sets.iter(), 5).is_none());
    }
}
