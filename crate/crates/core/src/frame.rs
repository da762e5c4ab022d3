//! Frames of discernment.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, PropSet, Result};

/// A named set of mutually exclusive propositions, exactly one of which holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    id: String,
    label: String,
    propositions: Vec<String>,
    index: BTreeMap<String, usize>,
}

/// Builds a frame whose label equals its id.
pub fn make_frame<S: AsRef<str>>(id: &str, propositions: &[S]) -> Result<Frame> {
    Frame::new(id, id, propositions.iter().map(|p| p.as_ref().to_string()).collect())
}

impl Frame {
    pub fn new(id: &str, label: &str, propositions: Vec<String>) -> Result<Frame> {
        if id.is_empty() {
            return Err(Error::EmptyFrameId);
        }
        if propositions.is_empty() {
            return Err(Error::EmptyFrame(id.to_string()));
        }
        let mut index = BTreeMap::new();
        for (i, p) in propositions.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::EmptyLabel { frame: id.to_string() });
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicateLabel {
                    frame: id.to_string(),
                    label: p.clone(),
                });
            }
        }
        Ok(Frame {
            id: id.to_string(),
            label: label.to_string(),
            propositions,
            index,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    /// Number of propositions.
    pub fn len(&self) -> usize {
        self.propositions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.propositions.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownLabel {
            frame: self.id.clone(),
            label: label.to_string(),
        })
    }

    /// The set named by a list of proposition labels.
    pub fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<PropSet> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    /// Θ, the set of every proposition.
    pub fn theta(&self) -> PropSet {
        PropSet::full(self.len())
    }

    pub fn labels_of<'a>(&'a self, set: &PropSet) -> Result<Vec<&'a str>> {
        set.iter()
            .map(|i| {
                self.propositions.get(i).map(String::as_str).ok_or(Error::ForeignSet {
                    index: i,
                    size: self.len(),
                })
            })
            .collect()
    }

    /// Human-readable form such as `{Oberon, Collins}`; the full set prints as `Θ`.
    pub fn describe(&self, set: &PropSet) -> String {
        if set.is_full(self.len()) && self.len() > 1 {
            return "Θ".to_string();
        }
        let mut out = String::from("{");
        for (n, i) in set.iter().enumerate() {
            if n > 0 {
                out.push_str(", ");
            }
            match self.propositions.get(i) {
                Some(p) => out.push_str(p),
                None => out.push('?'),
            }
        }
        out.push('}');
        out
    }
}
