//! Support / uncertainty / against summaries of a body of evidence.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Boe, PropSet};

#[derive(Debug, Clone, PartialEq)]
pub struct ConclusionRow {
    pub statement: PropSet,
    /// Bel(A).
    pub support: f64,
    /// Pl(A) - Bel(A).
    pub uncertainty: f64,
    /// Bel(not A).
    pub against: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConclusionReport {
    pub boe_id: String,
    pub rows: Vec<ConclusionRow>,
    /// Dempster's conflict `K`, zero when not applicable.
    pub conflict: f64,
    /// Mass on ∅ for open-world results.
    pub unknown_mass: f64,
}

/// Builds the report for a BOE.
///
/// Candidate statements are the nonempty focal sets and their atoms; a
/// candidate is listed when it has positive support or positive mass. Rows
/// are ordered by size, then canonically. Open-world evidence is reported on
/// its conditioned closed-world part, with `m(∅)` as `unknown_mass`.
pub fn conclusion_report(boe: &Boe) -> ConclusionReport {
    let unknown_mass = boe.masses.unknown_mass();
    let mut report = ConclusionReport {
        boe_id: boe.id.clone(),
        rows: Vec::new(),
        conflict: 0.0,
        unknown_mass,
    };
    let Some(closed) = boe.masses.conditioned() else {
        return report;
    };
    let width = closed.width();
    let mut candidates: BTreeSet<PropSet> = BTreeSet::new();
    for (s, _) in closed.focal_sets() {
        candidates.insert(s.clone());
        candidates.extend(s.iter().map(PropSet::singleton));
    }
    let mut rows: Vec<ConclusionRow> = candidates
        .into_iter()
        .filter_map(|a| {
            let support = closed.belief(&a).ok()?;
            if support <= 0.0 && closed.mass(&a) <= 0.0 {
                return None;
            }
            let against = closed.belief(&a.complement(width)).ok()?;
            let uncertainty = (1.0 - support - against).max(0.0);
            Some(ConclusionRow {
                statement: a,
                support,
                uncertainty,
                against,
            })
        })
        .collect();
    rows.sort_by(|x, y| {
        x.statement
            .len()
            .cmp(&y.statement.len())
            .then_with(|| x.statement.iter().cmp(y.statement.iter()))
    });
    report.rows = rows;
    report
}

impl ConclusionReport {
    pub fn with_conflict(mut self, conflict: f64) -> ConclusionReport {
        self.conflict = conflict;
        self
    }

    /// The best-supported single proposition, ties broken by index.
    pub fn leading_atom(&self) -> Option<&ConclusionRow> {
        self.atoms_by_support().into_iter().next()
    }

    fn atoms_by_support(&self) -> Vec<&ConclusionRow> {
        let mut atoms: Vec<&ConclusionRow> = self.rows.iter().filter(|r| r.statement.len() == 1).collect();
        atoms.sort_by(|a, b| b.support.total_cmp(&a.support).then_with(|| a.statement.cmp(&b.statement)));
        atoms
    }

    /// True when the best-supported single proposition leads the runner-up by
    /// less than `margin`.
    pub fn is_inconclusive(&self, margin: f64) -> bool {
        let atoms = self.atoms_by_support();
        let top = atoms.first().map_or(0.0, |r| r.support);
        let second = atoms.get(1).map_or(0.0, |r| r.support);
        top - second < margin
    }
}
