//! Bodies of evidence: a mass function plus where it came from.

use alloc::string::{String, ToString};

use crate::{Error, Frame, MassFunction, PropSet, Result};

/// Operator confidence in an information source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Confidence {
    Certain,
    #[default]
    Probable,
    Possible,
}

impl Confidence {
    pub const ALL: [Confidence; 3] = [Confidence::Certain, Confidence::Probable, Confidence::Possible];

    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::Certain => "certain",
            Confidence::Probable => "probable",
            Confidence::Possible => "possible",
        }
    }
}

impl core::str::FromStr for Confidence {
    type Err = ();
    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "certain" => Ok(Confidence::Certain),
            "probable" => Ok(Confidence::Probable),
            "possible" => Ok(Confidence::Possible),
            _ => Err(()),
        }
    }
}

/// How the evidence reached the system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntryPath {
    StaticKb,
    AutomatedFeed,
    #[default]
    Manual,
}

impl EntryPath {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryPath::StaticKb => "static_kb",
            EntryPath::AutomatedFeed => "automated_feed",
            EntryPath::Manual => "manual",
        }
    }
}

impl core::str::FromStr for EntryPath {
    type Err = ();
    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "static_kb" => Ok(EntryPath::StaticKb),
            "automated_feed" => Ok(EntryPath::AutomatedFeed),
            "manual" => Ok(EntryPath::Manual),
            _ => Err(()),
        }
    }
}

/// Provenance of a body of evidence.
///
/// `independent` records the operator's judgment that the evidence is not
/// based on the same observations as other evidence being fused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMeta {
    pub name: String,
    pub confidence: Confidence,
    pub independent: bool,
    pub entry_path: EntryPath,
    /// Milliseconds since the Unix epoch.
    pub timestamp: Option<i64>,
}

impl SourceMeta {
    pub fn new(name: &str) -> SourceMeta {
        SourceMeta {
            name: name.to_string(),
            confidence: Confidence::default(),
            independent: true,
            entry_path: EntryPath::default(),
            timestamp: None,
        }
    }

    pub fn with_confidence(mut self, confidence: Confidence) -> SourceMeta {
        self.confidence = confidence;
        self
    }

    pub fn with_entry_path(mut self, entry_path: EntryPath) -> SourceMeta {
        self.entry_path = entry_path;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoeKind {
    /// Entered directly (knowledge base, feed, or operator).
    Initial,
    /// Produced by discounting, translating, or fusing other evidence.
    Secondary,
}

/// A body of evidence on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Boe {
    pub id: String,
    pub frame_id: String,
    pub masses: MassFunction,
    pub source: SourceMeta,
    pub kind: BoeKind,
}

/// Validates entered assignments on `frame` and wraps them as an initial BOE.
pub fn make_boe(
    id: &str,
    frame: &Frame,
    assignments: impl IntoIterator<Item = (PropSet, f64)>,
    source: SourceMeta,
) -> Result<Boe> {
    let masses = MassFunction::from_assignments(frame.len(), assignments)?;
    Ok(Boe {
        id: id.to_string(),
        frame_id: frame.id().to_string(),
        masses,
        source,
        kind: BoeKind::Initial,
    })
}

impl Boe {
    /// A secondary BOE with the same frame and source as `self`.
    pub fn derive(&self, id: &str, masses: MassFunction) -> Boe {
        Boe {
            id: id.to_string(),
            frame_id: self.frame_id.clone(),
            masses,
            source: self.source.clone(),
            kind: BoeKind::Secondary,
        }
    }

    pub fn is_open_world(&self) -> bool {
        self.masses.is_open_world()
    }

    pub fn check_frame(&self, frame: &Frame) -> Result<()> {
        if self.frame_id != frame.id() {
            return Err(Error::FrameMismatch {
                expected: frame.id().to_string(),
                found: self.frame_id.clone(),
            });
        }
        if self.masses.width() != frame.len() {
            return Err(Error::WidthMismatch {
                expected: frame.len(),
                found: self.masses.width(),
            });
        }
        Ok(())
    }

    pub fn belief(&self, a: &PropSet) -> Result<f64> {
        self.masses.belief(a)
    }

    pub fn plausibility(&self, a: &PropSet) -> Result<f64> {
        self.masses.plausibility(a)
    }

    pub fn commonality(&self, a: &PropSet) -> Result<f64> {
        self.masses.commonality(a)
    }
}

/// Fails unless every BOE sits on the same frame as the first.
pub(crate) fn check_same_frame(boes: &[&Boe]) -> Result<()> {
    if let Some(first) = boes.first() {
        for b in &boes[1..] {
            if b.frame_id != first.frame_id {
                return Err(Error::FrameMismatch {
                    expected: first.frame_id.clone(),
                    found: b.frame_id.clone(),
                });
            }
        }
    }
    Ok(())
}
