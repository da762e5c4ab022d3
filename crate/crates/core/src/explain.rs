//! Influence ranking of the evidence behind a conclusion.
//!
//! Under the conjunctive rules each contribution is scored by its standalone
//! information `I(bel_i)`; since commonalities multiply, these scores add up
//! to the information of the unnormalized combination whenever all
//! commonalities are positive. A leave-one-out score is reported alongside.
//! The averaging rule has no such decomposition, so there the leave-one-out
//! change is the primary score.
//!
//! Frames wider than the cap are scored on the union-closure of the focal
//! sets instead of the whole lattice, and the report is marked inexact.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::info::{commonalities_on, commonality_table, information, union_closure, RESTRICTED_FAMILY_LIMIT};
use crate::{Error, FusionRule, MassFunction, PropSet, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfluenceMethod {
    /// Standalone information of each contribution.
    Standalone,
    /// Absolute change in the combination's information when the
    /// contribution is left out.
    LeaveOneOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceEntry {
    pub boe_id: String,
    pub influence: f64,
    pub share: f64,
    /// Secondary leave-one-out score (signed), for cross-checking.
    pub leave_one_out: f64,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceReport {
    pub conclusion_id: String,
    /// Sorted by descending influence; vacuous evidence last, then by id.
    pub entries: Vec<InfluenceEntry>,
    pub most_influential: String,
    pub least_influential: String,
    /// False when the frame exceeded the cap and a restricted lattice was used.
    pub exact: bool,
    pub method: InfluenceMethod,
}

/// Per-contribution commonalities on a shared set of subsets.
struct Lattice {
    q: Vec<Vec<f64>>,
    exact: bool,
}

impl Lattice {
    fn build(contributions: &[(&str, &MassFunction)], cap: usize) -> Lattice {
        let tables: Option<Vec<Vec<f64>>> = contributions
            .iter()
            .map(|(_, m)| commonality_table(m, cap).ok())
            .collect();
        if let Some(q) = tables {
            return Lattice { q, exact: true };
        }
        let width = contributions[0].1.width();
        let focal = contributions
            .iter()
            .flat_map(|(_, m)| m.focal_sets().map(|(s, _)| s))
            .filter(|s| !s.is_empty());
        let family = union_closure(focal, RESTRICTED_FAMILY_LIMIT).unwrap_or_else(|| {
            // Closure too large: fall back to the focal sets themselves.
            let mut sets: Vec<PropSet> = contributions
                .iter()
                .flat_map(|(_, m)| m.focal_sets().map(|(s, _)| s.clone()))
                .filter(|s| !s.is_empty())
                .collect();
            sets.push(PropSet::full(width));
            sets.sort();
            sets.dedup();
            sets
        });
        Lattice {
            q: contributions.iter().map(|(_, m)| commonalities_on(m, &family)).collect(),
            exact: false,
        }
    }

    fn points(&self) -> usize {
        self.q[0].len()
    }

    /// Information of the unnormalized combination of `members`:
    /// commonalities multiply, so logs add over subsets where all are positive.
    fn conjunctive(&self, members: &[usize]) -> f64 {
        let mut total = 0.0;
        for a in 0..self.points() {
            if members.iter().all(|&i| self.q[i][a] > 0.0) {
                for &i in members {
                    total -= libm::log2(self.q[i][a]);
                }
            }
        }
        total
    }

    /// Information of the average of `members`; commonality is linear in mass.
    fn averaged(&self, members: &[usize]) -> f64 {
        let n = members.len() as f64;
        information((0..self.points()).map(|a| members.iter().map(|&i| self.q[i][a]).sum::<f64>() / n))
    }

    fn combined(&self, rule: FusionRule, members: &[usize]) -> f64 {
        match rule {
            FusionRule::Dempster | FusionRule::Smets => self.conjunctive(members),
            FusionRule::Dependent => self.averaged(members),
        }
    }
}

/// Ranks `contributions` (id, post-discount/post-translation masses, all on
/// one frame) by their influence on a conclusion fused with `rule`.
pub fn influence(
    conclusion_id: &str,
    contributions: &[(&str, &MassFunction)],
    rule: FusionRule,
    cap: usize,
) -> Result<InfluenceReport> {
    let Some(first) = contributions.first() else {
        return Err(Error::EmptyContributions);
    };
    let width = first.1.width();
    for (_, m) in contributions {
        if m.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: m.width(),
            });
        }
    }
    // Fixed summation order, whatever order the caller listed them in.
    let mut sorted: Vec<(&str, &MassFunction)> = contributions.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let contributions = &sorted[..];
    let lattice = Lattice::build(contributions, cap);
    let all: Vec<usize> = (0..contributions.len()).collect();
    let whole = lattice.combined(rule, &all);
    let method = match rule {
        FusionRule::Dependent if contributions.len() > 1 => InfluenceMethod::LeaveOneOut,
        _ => InfluenceMethod::Standalone,
    };

    let mut entries: Vec<InfluenceEntry> = contributions
        .iter()
        .enumerate()
        .map(|(i, (id, m))| {
            let standalone = information(lattice.q[i].iter().copied());
            let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
            let leave_one_out = if rest.is_empty() {
                standalone
            } else {
                whole - lattice.combined(rule, &rest)
            };
            let influence = match method {
                InfluenceMethod::Standalone => standalone,
                InfluenceMethod::LeaveOneOut => libm::fabs(leave_one_out),
            };
            InfluenceEntry {
                boe_id: id.to_string(),
                influence,
                share: 0.0,
                leave_one_out,
                vacuous: m.is_vacuous(),
            }
        })
        .collect();

    let total: f64 = entries.iter().map(|e| e.influence).sum();
    let even = 1.0 / entries.len() as f64;
    for e in &mut entries {
        e.share = if total > 0.0 { e.influence / total } else { even };
    }
    entries.sort_by(|a, b| {
        b.influence
            .total_cmp(&a.influence)
            .then(a.vacuous.cmp(&b.vacuous))
            .then_with(|| a.boe_id.cmp(&b.boe_id))
    });
    Ok(InfluenceReport {
        conclusion_id: conclusion_id.to_string(),
        most_influential: entries[0].boe_id.clone(),
        least_influential: entries[entries.len() - 1].boe_id.clone(),
        entries,
        exact: lattice.exact,
        method,
    })
}

fn percent(share: f64) -> String {
    format!("{:.1}%", share * 100.0)
}

/// A one-paragraph summary naming the most and least influential sources.
/// `names` maps BOE ids to source names; unmapped ids are printed as-is.
pub fn explanation_text(report: &InfluenceReport, names: &BTreeMap<String, String>) -> String {
    let name = |id: &str| names.get(id).cloned().unwrap_or_else(|| id.to_string());
    let entries = &report.entries;
    let mut text = String::new();
    if entries.len() == 1 {
        text.push_str(&format!(
            "{} is the only contributing source; the conclusion rests on one source.",
            name(&entries[0].boe_id)
        ));
    } else {
        let top = entries[0].influence;
        let leaders: Vec<&InfluenceEntry> = entries.iter().filter(|e| e.influence == top).collect();
        if leaders.len() == entries.len() {
            let listed: Vec<String> = leaders.iter().map(|e| name(&e.boe_id)).collect();
            text.push_str(&format!(
                "{} had equal influence on the conclusion ({} each; listed in BOE id order).",
                listed.join(", "),
                percent(entries[0].share)
            ));
        } else {
            if leaders.len() == 1 {
                text.push_str(&format!(
                    "{} had the most influence on the conclusion ({} of the information).",
                    name(&leaders[0].boe_id),
                    percent(leaders[0].share)
                ));
            } else {
                let listed: Vec<String> = leaders.iter().map(|e| name(&e.boe_id)).collect();
                text.push_str(&format!(
                    "{} tied for the most influence on the conclusion ({} each; listed in BOE id order).",
                    listed.join(" and "),
                    percent(leaders[0].share)
                ));
            }
            let last = &entries[entries.len() - 1];
            text.push_str(&format!(
                " {} had the least influence ({}).",
                name(&last.boe_id),
                percent(last.share)
            ));
        }
    }
    if report.method == InfluenceMethod::LeaveOneOut {
        text.push_str(" Influence is the change in information when each source is left out.");
    }
    if !report.exact {
        text.push_str(" Scores were computed on a restricted lattice because the frame is large.");
    }
    text
}
