//! Seeded synthetic workload: frames, a tree of compatibility relations and
//! sparse BOEs, run through a session as discount, translate and fuse phases.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use horizon_core::{Frame, FrameGallery, FusionRule};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::engine::{EngineError, LogRecord, NodeId, Session};
use crate::kb::{KnowledgeBase, MassDoc, SourceDoc};
use crate::wire::Mass17;

/// Most focal sets per generated BOE, Θ included.
pub const MAX_FOCAL: usize = 64;
/// Largest generated non-Θ focal set.
const MAX_SET: usize = 8;

/// `count:min-max:mean` frame sizes, for example `16:8-352:211`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameShape {
    pub count: usize,
    pub min: usize,
    pub max: usize,
    pub mean: usize,
}

impl Default for FrameShape {
    fn default() -> Self {
        FrameShape {
            count: 16,
            min: 8,
            max: 352,
            mean: 211,
        }
    }
}

impl FromStr for FrameShape {
    type Err = String;
    fn from_str(s: &str) -> Result<FrameShape, String> {
        let bad = || format!("frame shape {s:?} is not count:min-max:mean");
        let mut parts = s.split(':');
        let (Some(count), Some(range), Some(mean), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let (min, max) = range.split_once('-').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let shape = FrameShape {
            count: num(count)?,
            min: num(min)?,
            max: num(max)?,
            mean: num(mean)?,
        };
        if shape.count == 0 || shape.min == 0 || shape.min > shape.max || !(shape.min..=shape.max).contains(&shape.mean) {
            return Err(format!("frame shape {s:?} needs count > 0 and 0 < min <= mean <= max"));
        }
        Ok(shape)
    }
}

impl fmt::Display for FrameShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.count, self.min, self.max, self.mean)
    }
}

/// `discounts,translations,fusions`, for example `25,29,35`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub discounts: usize,
    pub translations: usize,
    pub fusions: usize,
}

impl Default for OpCounts {
    fn default() -> Self {
        OpCounts {
            discounts: 25,
            translations: 29,
            fusions: 35,
        }
    }
}

impl FromStr for OpCounts {
    type Err = String;
    fn from_str(s: &str) -> Result<OpCounts, String> {
        let n: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("op counts {s:?} is not discounts,translations,fusions"))?;
        match n[..] {
            [discounts, translations, fusions] => Ok(OpCounts {
                discounts,
                translations,
                fusions,
            }),
            _ => Err(format!("op counts {s:?} is not discounts,translations,fusions")),
        }
    }
}

impl fmt::Display for OpCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.discounts, self.translations, self.fusions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub boes: usize,
    pub frames: FrameShape,
    pub ops: OpCounts,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            boes: 35,
            frames: FrameShape::default(),
            ops: OpCounts::default(),
            seed: 1,
        }
    }
}

/// A generated workload: a knowledge base plus the operations to run on it,
/// grouped by phase.
#[derive(Debug, Clone)]
pub struct Workload {
    pub kb: KnowledgeBase,
    pub entries: Vec<LogRecord>,
    pub discounts: Vec<LogRecord>,
    pub translations: Vec<LogRecord>,
    pub fusions: Vec<LogRecord>,
}

impl Workload {
    /// SHA-256 over the canonical KB document and every operation record.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kb.to_json_string().as_bytes());
        for phase in [&self.entries, &self.discounts, &self.translations, &self.fusions] {
            h.update(serde_json::to_vec(phase).expect("records serialize"));
        }
        format!("{:x}", h.finalize())
    }

    pub fn frame_sizes(&self) -> Vec<usize> {
        self.kb.gallery.frames().iter().map(Frame::len).collect()
    }
}

fn frame_sizes(shape: &FrameShape, rng: &mut ChaCha8Rng) -> Vec<usize> {
    // The extremes appear once each; the rest are uniform on a range
    // centered on the mean.
    let lo = (2 * shape.mean).saturating_sub(shape.max).max(shape.min);
    let hi = (2 * shape.mean).saturating_sub(lo).min(shape.max);
    (0..shape.count)
        .map(|i| match i {
            0 => shape.min,
            1 => shape.max,
            _ => rng.random_range(lo..=hi),
        })
        .collect()
}

fn labels(frame: usize, size: usize) -> Vec<String> {
    (0..size).map(|j| format!("f{frame}p{j}")).collect()
}

/// Builds the workload for `cfg`. Identical configs give identical workloads.
pub fn generate(cfg: &BenchConfig) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = frame_sizes(&cfg.frames, &mut rng);
    let mut gallery = FrameGallery::new();
    for (i, &n) in sizes.iter().enumerate() {
        let frame = Frame::new(&format!("f{i}"), &format!("frame {i}"), labels(i, n)).expect("generated frame");
        gallery.add_frame(frame).expect("unique frame ids");
    }
    // A random tree: frame i links to an earlier frame.
    for i in 1..sizes.len() {
        let parent = rng.random_range(0..i);
        let (na, nb) = (sizes[i], sizes[parent]);
        let mut pairs = Vec::new();
        for x in 0..na {
            for _ in 0..rng.random_range(1..=2) {
                pairs.push((x, rng.random_range(0..nb)));
            }
        }
        for y in 0..nb {
            pairs.push((rng.random_range(0..na), y));
        }
        let a = gallery.frames()[i].clone();
        let b = gallery.frames()[parent].clone();
        let rel = horizon_core::CompatibilityRelation::new(&a, &b, pairs).expect("in-range pairs");
        gallery.insert_relation(rel, false).expect("tree edges are unique");
    }
    let kb = KnowledgeBase {
        gallery,
        ..KnowledgeBase::default()
    };

    let confidences = ["certain", "probable", "possible"];
    let mut entries = Vec::with_capacity(cfg.boes);
    let mut boe_frames = Vec::with_capacity(cfg.boes);
    for b in 0..cfg.boes {
        let f = rng.random_range(0..sizes.len());
        let n = sizes[f];
        let frame = &kb.gallery.frames()[f];
        let k = rng.random_range(1..MAX_FOCAL);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let theta_weight: f64 = rng.random_range(0.2..1.0);
        let total: f64 = weights.iter().sum::<f64>() + theta_weight;
        let masses = weights
            .iter()
            .map(|w| {
                let size = rng.random_range(1..=MAX_SET.min(n));
                let mut ix = sample(&mut rng, n, size).into_vec();
                ix.sort_unstable();
                MassDoc {
                    mass: Mass17(w / total),
                    set: ix.into_iter().map(|j| frame.propositions()[j].clone()).collect(),
                }
            })
            .collect();
        boe_frames.push(f);
        entries.push(LogRecord::Submit {
            frame: frame.id().to_string(),
            masses,
            source: SourceDoc {
                confidence: Some(confidences[rng.random_range(0..3)].to_string()),
                entry_path: Some("automated_feed".into()),
                independent: Some(true),
                name: format!("sensor {b}"),
                timestamp: None,
            },
            result: None,
        });
    }

    // Node ids are assigned in execution order, so the ops can name them
    // ahead of time: BOE b is node b+1, and every op adds one node.
    let mut next = cfg.boes as u64 + 1;
    let mut current: Vec<NodeId> = (1..=cfg.boes as u64).map(NodeId).collect();
    let mut discounts = Vec::new();
    if cfg.boes > 0 {
        for i in 0..cfg.ops.discounts {
            let b = i % cfg.boes;
            let rate = (rng.random_range(5..=50) as f64) / 100.0;
            discounts.push(LogRecord::Discount {
                node: current[b],
                rate,
                result: Some(NodeId(next)),
            });
            current[b] = NodeId(next);
            next += 1;
        }
    }
    let mut translations = Vec::new();
    let mut partners = Vec::new();
    if cfg.boes > 0 {
        for j in 0..cfg.ops.translations {
            let (b, partner) = (j % cfg.boes, (j + 1) % cfg.boes);
            translations.push(LogRecord::Translate {
                node: current[partner],
                target: format!("f{}", boe_frames[b]),
                result: Some(NodeId(next)),
            });
            partners.push(NodeId(next));
            next += 1;
        }
    }
    let rules = [FusionRule::Dempster, FusionRule::Smets, FusionRule::Dependent];
    let mut fusions = Vec::new();
    if cfg.boes > 0 {
        for j in 0..cfg.ops.fusions {
            let b = j % cfg.boes;
            let other = partners.get(j).copied().unwrap_or(current[b]);
            fusions.push(LogRecord::Fuse {
                nodes: vec![current[b], other],
                rule: Some(rules[j % 3]),
                target: Some(format!("f{}", boe_frames[b])),
                auto_discount: Some(false),
                result: Some(NodeId(next)),
            });
            next += 1;
        }
    }
    Workload {
        kb,
        entries,
        discounts,
        translations,
        fusions,
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub workload_digest: String,
    /// SHA-256 over the exported node values after the run.
    pub result_digest: String,
    pub frame_sizes: Vec<usize>,
    pub nodes: usize,
    pub phases: Vec<(&'static str, Duration)>,
    pub total: Duration,
}

fn run_phase(session: &mut Session, records: &[LogRecord]) -> Result<Duration, EngineError> {
    let start = Instant::now();
    for r in records {
        session.apply(r.clone())?;
    }
    Ok(start.elapsed())
}

/// Generates and runs a workload, timing each phase.
pub fn run(cfg: &BenchConfig) -> Result<BenchReport, EngineError> {
    let start = Instant::now();
    let workload = generate(cfg);
    let generated = start.elapsed();
    let mut session = Session::new(workload.kb.clone());
    let mut phases = vec![("generate", generated)];
    phases.push(("enter", run_phase(&mut session, &workload.entries)?));
    phases.push(("discount", run_phase(&mut session, &workload.discounts)?));
    phases.push(("translate", run_phase(&mut session, &workload.translations)?));
    phases.push(("fuse", run_phase(&mut session, &workload.fusions)?));
    let total = start.elapsed();
    let nodes: Vec<_> = session.nodes().map(|n| session.node_doc(n)).collect();
    let result_digest = format!(
        "{:x}",
        Sha256::digest(serde_json::to_vec(&nodes).expect("nodes serialize"))
    );
    Ok(BenchReport {
        config: *cfg,
        workload_digest: workload.digest(),
        result_digest,
        frame_sizes: workload.frame_sizes(),
        nodes: session.node_count(),
        phases,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!("16:8-352:211".parse::<FrameShape>().unwrap(), FrameShape::default());
        assert_eq!("25,29,35".parse::<OpCounts>().unwrap(), OpCounts::default());
        assert!("16:8-352".parse::<FrameShape>().is_err());
        assert!("4:10-5:7".parse::<FrameShape>().is_err());
        assert!("1,2".parse::<OpCounts>().is_err());
    }

    #[test]
    fn sizes_follow_the_shape() {
        let w = generate(&BenchConfig::default());
        let sizes = w.frame_sizes();
        assert_eq!(sizes.len(), 16);
        assert_eq!(*sizes.iter().min().unwrap(), 8);
        assert_eq!(*sizes.iter().max().unwrap(), 352);
        assert!(sizes.iter().all(|&n| (8..=352).contains(&n)));
        assert_eq!(w.entries.len(), 35);
        assert_eq!((w.discounts.len(), w.translations.len(), w.fusions.len()), (25, 29, 35));
    }

    #[test]
    fn same_seed_same_digest() {
        let cfg = BenchConfig {
            boes: 6,
            frames: "4:8-40:20".parse().unwrap(),
            ops: "3,4,5".parse().unwrap(),
            seed: 9,
        };
        assert_eq!(generate(&cfg).digest(), generate(&cfg).digest());
        let other = BenchConfig { seed: 10, ..cfg };
        assert_ne!(generate(&cfg).digest(), generate(&other).digest());
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.result_digest, b.result_digest);
        assert_eq!(a.nodes, 6 + 3 + 4 + 5);
    }
}
