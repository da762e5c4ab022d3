//! Knowledge-base files: frames, compatibility relations and static evidence.
//!
//! A knowledge base is one UTF-8 JSON document (extension `.horizon.json`).
//! Writing is canonical: object keys sorted, arrays in declaration order and
//! masses with 17 significant digits, so a load/save cycle is byte-stable.

use std::io::{Read, Write};
use std::path::Path;

use horizon_core::{
    make_boe, Boe, CompatibilityRelation, Confidence, Direction, EntryPath, Frame, FrameGallery, PropSet,
    SourceMeta,
};
use serde::{Deserialize, Serialize};

use crate::wire::Mass17;

pub const KB_VERSION: &str = "1";
pub const KB_EXTENSION: &str = ".horizon.json";

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("cannot read or write knowledge base: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported knowledge base version {found:?}, expected {KB_VERSION:?}")]
    Version { found: String },
    #[error("knowledge base must define at least one frame")]
    NoFrames,
    #[error("{context}: {source}")]
    Invalid {
        context: String,
        source: horizon_core::Error,
    },
    #[error("{context}: {message}")]
    Field { context: String, message: String },
    #[error("relation {a} <-> {b} has no pair(s) {}", fmt_pairs(.pairs))]
    MissingPairs {
        a: String,
        b: String,
        pairs: Vec<(String, String)>,
    },
}

fn fmt_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(x, y)| format!("({x}, {y})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl KbError {
    pub(crate) fn from_json(e: serde_json::Error) -> KbError {
        KbError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }

    fn invalid(context: String) -> impl FnOnce(horizon_core::Error) -> KbError {
        move |source| KbError::Invalid { context, source }
    }
}

// Serialized shapes. Fields are declared in key order.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDoc {
    pub frames: Vec<FrameDoc>,
    #[serde(default)]
    pub meta: MetaDoc,
    #[serde(default)]
    pub relations: Vec<RelationDoc>,
    #[serde(default)]
    pub static_boes: Vec<StaticBoeDoc>,
    pub version: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaDoc {
    #[serde(default)]
    pub created: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub propositions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub a: String,
    pub b: String,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticBoeDoc {
    pub frame: String,
    pub id: String,
    pub masses: Vec<MassDoc>,
    pub source: SourceDoc,
}

/// One mass assignment; `set` lists proposition labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassDoc {
    pub mass: Mass17,
    pub set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independent: Option<bool>,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
}

impl SourceDoc {
    pub fn from_meta(meta: &SourceMeta) -> SourceDoc {
        SourceDoc {
            confidence: Some(meta.confidence.as_str().to_string()),
            entry_path: Some(meta.entry_path.as_str().to_string()),
            independent: Some(meta.independent),
            name: meta.name.clone(),
            timestamp: meta.timestamp,
        }
    }

    /// Resolves the source; `default_path` fills a missing entry path.
    pub fn to_meta(&self, default_path: EntryPath) -> Result<SourceMeta, String> {
        let confidence = match &self.confidence {
            None => Confidence::default(),
            Some(c) => c
                .parse()
                .map_err(|_| format!("unknown confidence {c:?} (expected certain, probable or possible)"))?,
        };
        let entry_path = match &self.entry_path {
            None => default_path,
            Some(p) => p
                .parse()
                .map_err(|_| format!("unknown entry path {p:?} (expected static_kb, automated_feed or manual)"))?,
        };
        Ok(SourceMeta {
            name: self.name.clone(),
            confidence,
            independent: self.independent.unwrap_or(true),
            entry_path,
            timestamp: self.timestamp,
        })
    }
}

impl MassDoc {
    /// Mass documents for every focal set of `boe`, in canonical set order.
    /// The empty set (open-world mass) is written as `[]`.
    pub fn list(frame: &Frame, masses: &horizon_core::MassFunction) -> Vec<MassDoc> {
        masses
            .focal_sets()
            .map(|(s, m)| MassDoc {
                mass: Mass17(m),
                set: frame
                    .labels_of(s)
                    .expect("focal sets fit their frame")
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
            })
            .collect()
    }
}

/// Resolves label-based assignments on `frame`.
pub fn resolve_masses(frame: &Frame, masses: &[MassDoc]) -> Result<Vec<(PropSet, f64)>, horizon_core::Error> {
    masses
        .iter()
        .map(|m| Ok((frame.set_of(&m.set)?, m.mass.0)))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KbMeta {
    pub name: String,
    pub version: String,
    /// Creation instant as written in the file (RFC 3339 by convention).
    pub created: String,
}

/// A validated knowledge base. Values are never modified in place: edits
/// return a new knowledge base.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    pub gallery: FrameGallery,
    pub static_boes: Vec<Boe>,
    pub meta: KbMeta,
}

impl KnowledgeBase {
    pub fn from_doc(doc: &KbDoc) -> Result<KnowledgeBase, KbError> {
        if doc.version != KB_VERSION {
            return Err(KbError::Version {
                found: doc.version.clone(),
            });
        }
        if doc.frames.is_empty() {
            return Err(KbError::NoFrames);
        }
        let mut gallery = FrameGallery::new();
        for f in &doc.frames {
            let label = f.label.as_deref().unwrap_or(&f.id);
            let frame = Frame::new(&f.id, label, f.propositions.clone())
                .map_err(KbError::invalid(format!("frame {:?}", f.id)))?;
            gallery
                .add_frame(frame)
                .map_err(KbError::invalid(format!("frame {:?}", f.id)))?;
        }
        for r in &doc.relations {
            gallery
                .add_relation(&r.a, &r.b, &r.pairs, false)
                .map_err(KbError::invalid(format!("relation {} <-> {}", r.a, r.b)))?;
        }
        let mut static_boes: Vec<Boe> = Vec::with_capacity(doc.static_boes.len());
        for b in &doc.static_boes {
            let context = format!("static BOE {:?}", b.id);
            if static_boes.iter().any(|x| x.id == b.id) {
                return Err(KbError::Field {
                    context,
                    message: "duplicate BOE id".into(),
                });
            }
            let frame = gallery.frame(&b.frame).map_err(KbError::invalid(context.clone()))?;
            let source = b.source.to_meta(EntryPath::StaticKb).map_err(|message| KbError::Field {
                context: context.clone(),
                message,
            })?;
            let assignments = resolve_masses(frame, &b.masses).map_err(KbError::invalid(context.clone()))?;
            let boe = make_boe(&b.id, frame, assignments, source).map_err(KbError::invalid(context))?;
            static_boes.push(boe);
        }
        Ok(KnowledgeBase {
            gallery,
            static_boes,
            meta: KbMeta {
                name: doc.meta.name.clone(),
                version: doc.meta.version.clone(),
                created: doc.meta.created.clone(),
            },
        })
    }

    pub fn to_doc(&self) -> KbDoc {
        let frames = self
            .gallery
            .frames()
            .iter()
            .map(|f| FrameDoc {
                id: f.id().to_string(),
                label: (f.label() != f.id()).then(|| f.label().to_string()),
                propositions: f.propositions().to_vec(),
            })
            .collect();
        let relations = self
            .gallery
            .relations()
            .iter()
            .map(|r| {
                let fa = self.gallery.frame(r.frame_a()).expect("registered frame");
                let fb = self.gallery.frame(r.frame_b()).expect("registered frame");
                RelationDoc {
                    a: r.frame_a().to_string(),
                    b: r.frame_b().to_string(),
                    pairs: r
                        .pairs()
                        .map(|(i, j)| (fa.propositions()[i].clone(), fb.propositions()[j].clone()))
                        .collect(),
                }
            })
            .collect();
        let static_boes = self
            .static_boes
            .iter()
            .map(|b| {
                let frame = self.gallery.frame(&b.frame_id).expect("registered frame");
                StaticBoeDoc {
                    frame: b.frame_id.clone(),
                    id: b.id.clone(),
                    masses: MassDoc::list(frame, &b.masses),
                    source: SourceDoc::from_meta(&b.source),
                }
            })
            .collect();
        KbDoc {
            frames,
            meta: MetaDoc {
                created: self.meta.created.clone(),
                name: self.meta.name.clone(),
                version: self.meta.version.clone(),
            },
            relations,
            static_boes,
            version: KB_VERSION.to_string(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<KnowledgeBase, KbError> {
        let doc: KbDoc = serde_json::from_str(text).map_err(KbError::from_json)?;
        KnowledgeBase::from_doc(&doc)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_doc()).expect("knowledge base serializes");
        out.push('\n');
        out
    }

    /// Reads and validates a knowledge base.
    pub fn load(mut source: impl Read) -> Result<KnowledgeBase, KbError> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        KnowledgeBase::from_json_str(&text)
    }

    pub fn save(&self, mut sink: impl Write) -> Result<(), KbError> {
        sink.write_all(self.to_json_string().as_bytes())?;
        sink.flush()?;
        Ok(())
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
        KnowledgeBase::load(std::fs::File::open(path)?)
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    /// A copy whose `a`/`b` relation has `add` inserted and `remove` deleted.
    /// Pairs are (label in `a`, label in `b`). A missing relation starts empty.
    pub fn edit_relation<S: AsRef<str>>(
        &self,
        a: &str,
        b: &str,
        add: &[(S, S)],
        remove: &[(S, S)],
    ) -> Result<KnowledgeBase, KbError> {
        let context = || format!("relation {a} <-> {b}");
        let fa = self.gallery.frame(a).map_err(KbError::invalid(context()))?;
        let fb = self.gallery.frame(b).map_err(KbError::invalid(context()))?;
        let (relation, flipped) = match self.gallery.relation_between(a, b) {
            Some(hop) => (hop.relation.clone(), hop.direction == Direction::BToA),
            None => (
                CompatibilityRelation::new(fa, fb, []).map_err(KbError::invalid(context()))?,
                false,
            ),
        };
        let resolve = |pairs: &[(S, S)]| -> Result<Vec<(usize, usize)>, KbError> {
            pairs
                .iter()
                .map(|(x, y)| {
                    let i = fa.index_of(x.as_ref()).map_err(KbError::invalid(context()))?;
                    let j = fb.index_of(y.as_ref()).map_err(KbError::invalid(context()))?;
                    Ok(if flipped { (j, i) } else { (i, j) })
                })
                .collect()
        };
        let edited = relation.edited(&resolve(add)?, &resolve(remove)?).map_err(|missing| {
            let pairs = missing
                .into_iter()
                .map(|(i, j)| {
                    let (i, j) = if flipped { (j, i) } else { (i, j) };
                    (fa.propositions()[i].clone(), fb.propositions()[j].clone())
                })
                .collect();
            KbError::MissingPairs {
                a: a.to_string(),
                b: b.to_string(),
                pairs,
            }
        })?;
        let mut next = self.clone();
        next.gallery
            .insert_relation(edited, true)
            .map_err(KbError::invalid(context()))?;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
      "version": "1",
      "meta": {"name": "t"},
      "frames": [
        {"id": "class", "propositions": ["Oberon", "Collins"]},
        {"id": "country", "propositions": ["Australia", "Canada"]}
      ],
      "relations": [{"a": "class", "b": "country", "pairs": [["Oberon", "Canada"]]}],
      "static_boes": [
        {"id": "s1", "frame": "class", "masses": [{"set": ["Oberon"], "mass": 0.25}],
         "source": {"name": "db"}}
      ]
    }"#;

    #[test]
    fn loads_and_defaults() {
        let kb = KnowledgeBase::from_json_str(SMALL).unwrap();
        assert_eq!(kb.gallery.frames().len(), 2);
        let b = &kb.static_boes[0];
        assert_eq!(b.source.entry_path, EntryPath::StaticKb);
        assert_eq!(b.source.confidence, Confidence::Probable);
        assert_eq!(b.masses.mass(&PropSet::full(2)), 0.75);
    }

    #[test]
    fn round_trip_is_identity_and_stable() {
        let kb = KnowledgeBase::from_json_str(SMALL).unwrap();
        let once = kb.to_json_string();
        let again = KnowledgeBase::from_json_str(&once).unwrap();
        assert_eq!(again, kb);
        assert_eq!(again.to_json_string(), once);
        assert!(once.contains("0.25000000000000000"));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = KnowledgeBase::from_json_str("{\n  \"frames\": [,]\n}").unwrap_err();
        match err {
            KbError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_frames_are_rejected() {
        let err = KnowledgeBase::from_json_str(r#"{"version":"1","frames":[]}"#).unwrap_err();
        assert!(matches!(err, KbError::NoFrames));
        assert_eq!(err.to_string(), "knowledge base must define at least one frame");
    }

    #[test]
    fn wrong_version_is_rejected() {
        let err = KnowledgeBase::from_json_str(r#"{"version":"2","frames":[{"id":"f","propositions":["a"]}]}"#)
            .unwrap_err();
        assert!(matches!(err, KbError::Version { .. }));
    }

    #[test]
    fn mass_sum_names_the_boe() {
        let text = SMALL.replace("0.25", "0.7}, {\"set\": [\"Collins\"], \"mass\": 0.5");
        let err = KnowledgeBase::from_json_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"s1\""), "{msg}");
        assert!(msg.contains("1.2"), "{msg}");
    }

    #[test]
    fn unknown_confidence_is_a_diagnostic() {
        let text = SMALL.replace(r#"{"name": "db"}"#, r#"{"name": "db", "confidence": "sure"}"#);
        let err = KnowledgeBase::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("sure"));
    }

    #[test]
    fn edit_adds_and_removes() {
        let kb = KnowledgeBase::from_json_str(SMALL).unwrap();
        let added = kb.edit_relation("class", "country", &[("Collins", "Australia")], &[]).unwrap();
        let hop = added.gallery.relation_between("class", "country").unwrap();
        assert!(hop.relation.contains_pair((1, 0)));
        // reversed orientation names the same pair
        let removed = added
            .edit_relation("country", "class", &[], &[("Australia", "Collins")])
            .unwrap();
        assert_eq!(removed, kb);
        // the original is untouched
        assert!(!kb.gallery.relation_between("class", "country").unwrap().relation.contains_pair((1, 0)));
        let err = kb.edit_relation("class", "country", &[], &[("Collins", "Canada")]).unwrap_err();
        assert_eq!(err.to_string(), "relation class <-> country has no pair(s) (Collins, Canada)");
    }
}
