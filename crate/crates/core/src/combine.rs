//! Discounting and combination of evidence.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::boe::check_same_frame;
use crate::{Boe, Confidence, Error, MassFunction, PropSet, Result};

/// Largest number of focal sets a combination may produce before it is
/// refused as a resource error.
pub const MAX_FOCAL_SETS: usize = 100_000;

/// Discount rates applied by confidence level before a fusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoDiscountConfig {
    pub rate_certain: f64,
    pub rate_probable: f64,
    pub rate_possible: f64,
    pub enabled: bool,
}

impl Default for AutoDiscountConfig {
    fn default() -> Self {
        AutoDiscountConfig {
            rate_certain: 0.0,
            rate_probable: 0.2,
            rate_possible: 0.4,
            enabled: true,
        }
    }
}

impl AutoDiscountConfig {
    pub fn disabled() -> Self {
        AutoDiscountConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn rate_for(&self, confidence: Confidence) -> f64 {
        match confidence {
            Confidence::Certain => self.rate_certain,
            Confidence::Probable => self.rate_probable,
            Confidence::Possible => self.rate_possible,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.rate_certain, self.rate_probable, self.rate_possible] {
            check_rate(r)?;
        }
        Ok(())
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::InvalidRate(rate))
    }
}

/// Moves a fraction `rate` of every focal mass onto Θ.
pub fn discount(m: &MassFunction, rate: f64) -> Result<MassFunction> {
    check_rate(rate)?;
    m.ensure_closed_world()?;
    let keep = 1.0 - rate;
    let theta = m.theta();
    let mut out: BTreeMap<PropSet, f64> = m
        .focal_sets()
        .map(|(s, mass)| (s.clone(), keep * mass))
        .collect();
    *out.entry(theta).or_insert(0.0) += rate;
    Ok(MassFunction::from_map(m.width(), out))
}

/// Discounts by the rate the configuration assigns to `confidence`; the
/// identity when auto-discounting is disabled.
pub fn auto_discount(
    m: &MassFunction,
    confidence: Confidence,
    cfg: &AutoDiscountConfig,
) -> Result<MassFunction> {
    if !cfg.enabled {
        return Ok(m.clone());
    }
    discount(m, cfg.rate_for(confidence))
}

/// The combination rules offered to the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionRule {
    /// Normalized conjunctive combination.
    Dempster,
    /// Unnormalized conjunctive combination; conflict stays on ∅.
    Smets,
    /// Focal-set-wise averaging, for evidence that is not independent.
    Dependent,
}

impl FusionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionRule::Dempster => "dempster",
            FusionRule::Smets => "smets",
            FusionRule::Dependent => "dependent",
        }
    }
}

impl core::str::FromStr for FusionRule {
    type Err = ();
    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "dempster" => Ok(FusionRule::Dempster),
            "smets" => Ok(FusionRule::Smets),
            "dependent" => Ok(FusionRule::Dependent),
            _ => Err(()),
        }
    }
}

/// Result of a fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub masses: MassFunction,
    /// Dempster's conflict `K`; zero for the other rules.
    pub conflict: f64,
}

fn check_inputs(inputs: &[&MassFunction]) -> Result<usize> {
    if inputs.len() < 2 {
        return Err(Error::TooFewInputs {
            needed: 2,
            got: inputs.len(),
        });
    }
    let width = inputs[0].width();
    for m in &inputs[1..] {
        if m.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: m.width(),
            });
        }
    }
    Ok(width)
}

/// Unnormalized product of two mass functions.
fn conjunctive_pair(a: &MassFunction, b: &MassFunction) -> Result<MassFunction> {
    let mut out: BTreeMap<PropSet, f64> = BTreeMap::new();
    for (sa, ma) in a.focal_sets() {
        for (sb, mb) in b.focal_sets() {
            *out.entry(sa.intersection(sb)).or_insert(0.0) += ma * mb;
            if out.len() > MAX_FOCAL_SETS {
                return Err(Error::ResourceLimit {
                    focal_sets: out.len(),
                    limit: MAX_FOCAL_SETS,
                });
            }
        }
    }
    Ok(MassFunction::from_map(a.width(), out))
}

fn conjunctive(inputs: &[&MassFunction]) -> Result<MassFunction> {
    let mut acc = conjunctive_pair(inputs[0], inputs[1])?;
    for m in &inputs[2..] {
        acc = conjunctive_pair(&acc, m)?;
    }
    Ok(acc)
}

/// Smets' unnormalized rule. Conflict is kept on the empty set.
///
/// Open-world inputs are accepted, so partial results can be combined
/// further.
pub fn fuse_smets(inputs: &[&MassFunction]) -> Result<MassFunction> {
    check_inputs(inputs)?;
    conjunctive(inputs)
}

/// Dempster's rule over two or more closed-world inputs.
///
/// `K` is one minus the mass that survives the full unnormalized product, so
/// it does not depend on fold order.
pub fn fuse_dempster(inputs: &[&MassFunction]) -> Result<Fused> {
    let width = check_inputs(inputs)?;
    for m in inputs {
        m.ensure_closed_world()?;
    }
    let product = conjunctive(inputs)?;
    let surviving: f64 = product
        .focal_sets()
        .filter(|(s, _)| !s.is_empty())
        .map(|(_, m)| m)
        .sum();
    if surviving <= 0.0 {
        return Err(Error::TotalConflict);
    }
    let normalized = product
        .focal_sets()
        .filter(|(s, _)| !s.is_empty())
        .map(|(s, m)| (s.clone(), m / surviving))
        .collect();
    Ok(Fused {
        masses: MassFunction::from_map(width, normalized),
        // rounding can push the surviving mass a hair above one
        conflict: (1.0 - surviving).max(0.0),
    })
}

/// Averages the inputs focal set by focal set.
///
/// Per-set contributions are summed in sorted order, so the result does not
/// depend on input order.
pub fn fuse_dependent(inputs: &[&MassFunction]) -> Result<MassFunction> {
    let width = check_inputs(inputs)?;
    for m in inputs {
        m.ensure_closed_world()?;
    }
    let mut parts: BTreeMap<PropSet, Vec<f64>> = BTreeMap::new();
    for m in inputs {
        for (s, mass) in m.focal_sets() {
            parts.entry(s.clone()).or_default().push(mass);
        }
    }
    let n = inputs.len() as f64;
    let out = parts
        .into_iter()
        .map(|(s, mut v)| {
            v.sort_by(f64::total_cmp);
            (s, v.iter().sum::<f64>() / n)
        })
        .collect();
    Ok(MassFunction::from_map(width, out))
}

/// Fuses BOEs that share a frame with the chosen rule.
pub fn fuse(boes: &[&Boe], rule: FusionRule) -> Result<Fused> {
    check_same_frame(boes)?;
    let masses: Vec<&MassFunction> = boes.iter().map(|b| &b.masses).collect();
    match rule {
        FusionRule::Dempster => fuse_dempster(&masses),
        FusionRule::Smets => {
            for m in &masses {
                m.ensure_closed_world()?;
            }
            Ok(Fused {
                masses: fuse_smets(&masses)?,
                conflict: 0.0,
            })
        }
        FusionRule::Dependent => Ok(Fused {
            masses: fuse_dependent(&masses)?,
            conflict: 0.0,
        }),
    }
}

/// Dempster fusion with and without confidence-driven discounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ZadehComparison {
    pub plain: Fused,
    pub discounted: Fused,
    /// Rate applied to each input on the discounted side.
    pub rates: Vec<f64>,
}

/// Shows how auto-discounting softens near-total conflict: each input is
/// fused once as given and once after discounting by its confidence rate.
pub fn zadeh_guard_demo(
    inputs: &[(&MassFunction, Confidence)],
    cfg: &AutoDiscountConfig,
) -> Result<ZadehComparison> {
    let raw: Vec<&MassFunction> = inputs.iter().map(|(m, _)| *m).collect();
    let plain = fuse_dempster(&raw)?;
    let cfg = AutoDiscountConfig { enabled: true, ..*cfg };
    let rates: Vec<f64> = inputs.iter().map(|(_, c)| cfg.rate_for(*c)).collect();
    let softened = inputs
        .iter()
        .zip(&rates)
        .map(|((m, _), r)| discount(m, *r))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&MassFunction> = softened.iter().collect();
    let discounted = fuse_dempster(&refs)?;
    Ok(ZadehComparison {
        plain,
        discounted,
        rates,
    })
}
