//! Compatibility relations between frames and translation of evidence.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Boe, BoeKind, Error, Frame, MassFunction, PropSet, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AToB,
    BToA,
}

impl Direction {
    pub fn reverse(self) -> Direction {
        match self {
            Direction::AToB => Direction::BToA,
            Direction::BToA => Direction::AToB,
        }
    }
}

/// Element-level pairs stating which propositions of two frames can hold at
/// the same time. Stored once per unordered frame pair and usable in either
/// direction; many-to-many pairings are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityRelation {
    frame_a: String,
    frame_b: String,
    size_a: usize,
    size_b: usize,
    pairs: BTreeSet<(usize, usize)>,
    // per-element images, indexed by source element
    forward: Vec<PropSet>,
    backward: Vec<PropSet>,
}

impl CompatibilityRelation {
    pub fn new(
        a: &Frame,
        b: &Frame,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<CompatibilityRelation> {
        if a.id() == b.id() {
            return Err(Error::SelfRelation(a.id().to_string()));
        }
        let mut rel = CompatibilityRelation {
            frame_a: a.id().to_string(),
            frame_b: b.id().to_string(),
            size_a: a.len(),
            size_b: b.len(),
            pairs: BTreeSet::new(),
            forward: Vec::new(),
            backward: Vec::new(),
        };
        for (i, j) in pairs {
            if i >= rel.size_a {
                return Err(Error::ForeignSet { index: i, size: rel.size_a });
            }
            if j >= rel.size_b {
                return Err(Error::ForeignSet { index: j, size: rel.size_b });
            }
            rel.pairs.insert((i, j));
        }
        rel.rebuild();
        Ok(rel)
    }

    /// Builds a relation from proposition labels.
    pub fn from_labels<S: AsRef<str>>(
        a: &Frame,
        b: &Frame,
        pairs: &[(S, S)],
    ) -> Result<CompatibilityRelation> {
        let idx = pairs
            .iter()
            .map(|(x, y)| Ok((a.index_of(x.as_ref())?, b.index_of(y.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        CompatibilityRelation::new(a, b, idx)
    }

    fn rebuild(&mut self) {
        self.forward = alloc::vec![PropSet::empty(); self.size_a];
        self.backward = alloc::vec![PropSet::empty(); self.size_b];
        for &(i, j) in &self.pairs {
            self.forward[i].insert(j);
            self.backward[j].insert(i);
        }
    }

    pub fn frame_a(&self) -> &str {
        &self.frame_a
    }

    pub fn frame_b(&self) -> &str {
        &self.frame_b
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains_pair(&self, pair: (usize, usize)) -> bool {
        self.pairs.contains(&pair)
    }

    pub fn source(&self, dir: Direction) -> &str {
        match dir {
            Direction::AToB => &self.frame_a,
            Direction::BToA => &self.frame_b,
        }
    }

    pub fn target(&self, dir: Direction) -> &str {
        self.source(dir.reverse())
    }

    fn sizes(&self, dir: Direction) -> (usize, usize) {
        match dir {
            Direction::AToB => (self.size_a, self.size_b),
            Direction::BToA => (self.size_b, self.size_a),
        }
    }

    /// The direction that reads from `frame_id`, if the relation touches it.
    pub fn direction_from(&self, frame_id: &str) -> Option<Direction> {
        if frame_id == self.frame_a {
            Some(Direction::AToB)
        } else if frame_id == self.frame_b {
            Some(Direction::BToA)
        } else {
            None
        }
    }

    /// A copy with `add` inserted and `remove` deleted. Fails with every
    /// pair of `remove` that is not present.
    pub fn edited(
        &self,
        add: &[(usize, usize)],
        remove: &[(usize, usize)],
    ) -> core::result::Result<CompatibilityRelation, Vec<(usize, usize)>> {
        let mut rel = self.clone();
        for &p in add {
            if p.0 < rel.size_a && p.1 < rel.size_b {
                rel.pairs.insert(p);
            }
        }
        let missing: Vec<_> = remove.iter().copied().filter(|p| !rel.pairs.remove(p)).collect();
        if !missing.is_empty() {
            return Err(missing);
        }
        rel.rebuild();
        Ok(rel)
    }

    /// Union of the partners of every element of `s`.
    pub fn image(&self, s: &PropSet, dir: Direction) -> Result<PropSet> {
        let table = match dir {
            Direction::AToB => &self.forward,
            Direction::BToA => &self.backward,
        };
        let mut out = PropSet::empty();
        for i in s.iter() {
            let partners = table.get(i).ok_or(Error::ForeignSet {
                index: i,
                size: table.len(),
            })?;
            out = out.union(partners);
        }
        Ok(out)
    }
}

/// Output of a translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub masses: MassFunction,
    /// Mass whose focal set had no compatible proposition on the target side;
    /// it is moved to the target Θ.
    pub loss: f64,
}

/// Moves each focal mass to the image of its set.
///
/// Mass on the source Θ stays uncommitted and lands on the target Θ, even
/// when some target propositions have no partner; translating total
/// ignorance yields total ignorance.
pub fn translate(m: &MassFunction, rel: &CompatibilityRelation, dir: Direction) -> Result<Translation> {
    let (source, target) = rel.sizes(dir);
    if m.width() != source {
        return Err(Error::WidthMismatch {
            expected: source,
            found: m.width(),
        });
    }
    m.ensure_closed_world()?;
    let theta = PropSet::full(target);
    let mut out: BTreeMap<PropSet, f64> = BTreeMap::new();
    let mut loss = 0.0;
    for (s, mass) in m.focal_sets() {
        if s.is_full(source) {
            *out.entry(theta.clone()).or_insert(0.0) += mass;
            continue;
        }
        let mut img = rel.image(s, dir)?;
        if img.is_empty() {
            loss += mass;
            img = theta.clone();
        }
        *out.entry(img).or_insert(0.0) += mass;
    }
    Ok(Translation {
        masses: MassFunction::from_map(target, out),
        loss,
    })
}

/// One step of a translation path.
#[derive(Debug, Clone, Copy)]
pub struct Hop<'a> {
    pub relation: &'a CompatibilityRelation,
    pub direction: Direction,
}

impl Hop<'_> {
    pub fn from(&self) -> &str {
        self.relation.source(self.direction)
    }

    pub fn to(&self) -> &str {
        self.relation.target(self.direction)
    }
}

/// A translated BOE together with what the translation cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedBoe {
    pub boe: Boe,
    pub loss: f64,
    /// Frames visited, starting with the source frame. A single entry means
    /// the BOE was already on the target frame.
    pub path: Vec<String>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// The frames of a domain and the compatibility relations between them.
///
/// An undirected graph that need not be connected. Frames and relations keep
/// their registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameGallery {
    frames: Vec<Frame>,
    frame_index: BTreeMap<String, usize>,
    relations: Vec<CompatibilityRelation>,
    relation_index: BTreeMap<(String, String), usize>,
}

impl FrameGallery {
    pub fn new() -> FrameGallery {
        FrameGallery::default()
    }

    pub fn add_frame(&mut self, frame: Frame) -> Result<()> {
        if self.frame_index.contains_key(frame.id()) {
            return Err(Error::DuplicateFrame(frame.id().to_string()));
        }
        self.frame_index.insert(frame.id().to_string(), self.frames.len());
        self.frames.push(frame);
        Ok(())
    }

    pub fn frame(&self, id: &str) -> Result<&Frame> {
        self.frame_index
            .get(id)
            .map(|&i| &self.frames[i])
            .ok_or_else(|| Error::UnknownFrame(id.to_string()))
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn relations(&self) -> &[CompatibilityRelation] {
        &self.relations
    }

    /// Registers a relation given by label pairs. An existing relation on the
    /// same frame pair is replaced only when `replace` is set.
    pub fn add_relation<S: AsRef<str>>(
        &mut self,
        a: &str,
        b: &str,
        pairs: &[(S, S)],
        replace: bool,
    ) -> Result<&CompatibilityRelation> {
        let rel = CompatibilityRelation::from_labels(self.frame(a)?, self.frame(b)?, pairs)?;
        self.insert_relation(rel, replace)
    }

    pub fn insert_relation(
        &mut self,
        rel: CompatibilityRelation,
        replace: bool,
    ) -> Result<&CompatibilityRelation> {
        let fa = self.frame(rel.frame_a())?;
        let fb = self.frame(rel.frame_b())?;
        if fa.len() != rel.size_a || fb.len() != rel.size_b {
            return Err(Error::WidthMismatch {
                expected: fa.len(),
                found: rel.size_a,
            });
        }
        let key = pair_key(rel.frame_a(), rel.frame_b());
        let slot = match self.relation_index.get(&key) {
            Some(_) if !replace => {
                return Err(Error::DuplicateRelation {
                    a: rel.frame_a.clone(),
                    b: rel.frame_b.clone(),
                })
            }
            Some(&i) => {
                self.relations[i] = rel;
                i
            }
            None => {
                self.relation_index.insert(key, self.relations.len());
                self.relations.push(rel);
                self.relations.len() - 1
            }
        };
        Ok(&self.relations[slot])
    }

    /// The relation linking two frames and the direction reading from `from`.
    pub fn relation_between(&self, from: &str, to: &str) -> Option<Hop<'_>> {
        let &i = self.relation_index.get(&pair_key(from, to))?;
        let relation = &self.relations[i];
        let direction = relation.direction_from(from)?;
        Some(Hop { relation, direction })
    }

    /// Frames linked to `id`, sorted by id.
    pub fn neighbors(&self, id: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .relations
            .iter()
            .filter_map(|r| {
                if r.frame_a == id {
                    Some(r.frame_b.as_str())
                } else if r.frame_b == id {
                    Some(r.frame_a.as_str())
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// A shortest chain of relations from `from` to `to`.
    ///
    /// Breadth-first search expanding neighbors in id order, so among paths of
    /// equal length the one whose frame-id sequence is lexicographically
    /// smallest wins.
    pub fn translation_path(&self, from: &str, to: &str) -> Result<Vec<Hop<'_>>> {
        self.frame(from)?;
        self.frame(to)?;
        if from == to {
            return Ok(Vec::new());
        }
        let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(from);
        parent.insert(from, from);
        'search: while let Some(node) = queue.pop_front() {
            for next in self.neighbors(node) {
                if parent.contains_key(next) {
                    continue;
                }
                parent.insert(next, node);
                if next == to {
                    break 'search;
                }
                queue.push_back(next);
            }
        }
        if !parent.contains_key(to) {
            return Err(Error::UnreachableFrame {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        let mut frames = alloc::vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            frames.push(cur);
        }
        frames.reverse();
        Ok(frames
            .windows(2)
            .map(|w| self.relation_between(w[0], w[1]).expect("path edge exists"))
            .collect())
    }

    /// Translates a closed-world BOE to `target` along the shortest path.
    /// The result is secondary even when no hop was needed.
    pub fn translate_to(&self, boe: &Boe, target: &str, new_id: &str) -> Result<TranslatedBoe> {
        if boe.is_open_world() {
            return Err(Error::OpenWorldInput);
        }
        boe.check_frame(self.frame(&boe.frame_id)?)?;
        let hops = self.translation_path(&boe.frame_id, target)?;
        let mut masses = boe.masses.clone();
        let mut loss = 0.0;
        let mut path = alloc::vec![boe.frame_id.clone()];
        for hop in &hops {
            let t = translate(&masses, hop.relation, hop.direction)?;
            masses = t.masses;
            loss += t.loss;
            path.push(hop.to().to_string());
        }
        Ok(TranslatedBoe {
            boe: Boe {
                id: new_id.to_string(),
                frame_id: target.to_string(),
                masses,
                source: boe.source.clone(),
                kind: BoeKind::Secondary,
            },
            loss,
            path,
        })
    }
}
