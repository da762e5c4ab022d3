//! Analysis sessions: live evidence, the lineage of derived evidence, and an
//! append-only operation log that replays to identical values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use horizon_core::{
    conclusion_report, discount, explanation_text, fuse, influence, make_boe, AutoDiscountConfig, Boe, BoeKind,
    Confidence, ConclusionReport, EntryPath, FusionRule, InfluenceReport, SourceMeta, DEFAULT_EXPLANATION_CAP,
};
use serde::{Deserialize, Serialize};

use crate::kb::{resolve_masses, KbDoc, KbError, KnowledgeBase, MassDoc, SourceDoc};
use crate::wire;

pub const SESSION_FORMAT: &str = "horizon-session";
pub const SESSION_VERSION: &str = "1";
/// Support margin below which a conclusion is flagged inconclusive.
pub const DEFAULT_INCONCLUSIVE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = std::num::ParseIntError;
    /// Accepts `n7` as well as a bare `7`.
    fn from_str(s: &str) -> Result<NodeId, Self::Err> {
        s.strip_prefix('n').unwrap_or(s).parse().map(NodeId)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Core(#[from] horizon_core::Error),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is disabled")]
    NodeDisabled(NodeId),
    #[error("node {0} is not a fusion result")]
    NotFused(NodeId),
    #[error("node {node} did not take part in fusion {fused}")]
    NotAnInput { node: NodeId, fused: NodeId },
    #[error("{survivors} input(s) would remain; a fusion needs at least 2")]
    TooFewSurvivors { survivors: usize },
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid inconclusive margin {0}")]
    InvalidMargin(f64),
    #[error("operation cancelled")]
    Cancelled,
    #[error("replay diverged at log entry {position}: {detail}")]
    Replay { position: usize, detail: String },
    #[error("session document: {0}")]
    Format(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

/// How a node's evidence was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeOp {
    Entered,
    Discounted {
        rate: f64,
    },
    AutoDiscounted {
        rate: f64,
    },
    Translated {
        /// Frames visited, source first.
        path: Vec<String>,
        loss: f64,
    },
    Fused {
        #[serde(with = "wire::rule")]
        rule: FusionRule,
        conflict: f64,
    },
}

/// What a fusion node needs to be recomputed with edits.
#[derive(Debug, Clone, PartialEq)]
pub struct FuseRecipe {
    pub inputs: Vec<NodeId>,
    /// Per input: the input, then any nodes the pipeline derived from it.
    /// The last entry is what entered the combination.
    pub chains: Vec<Vec<NodeId>>,
    pub rule: FusionRule,
    pub target: String,
    /// Auto-discount settings in force when the fusion ran.
    pub auto_discount: AutoDiscountConfig,
    pub rediscount: BTreeMap<NodeId, f64>,
}

impl FuseRecipe {
    pub fn contributions(&self) -> Vec<NodeId> {
        self.chains.iter().map(|c| *c.last().expect("nonempty chain")).collect()
    }

    fn input_for(&self, node: NodeId) -> Option<NodeId> {
        self.chains.iter().find(|c| c.contains(&node)).map(|c| c[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineageNode {
    pub id: NodeId,
    pub boe: Boe,
    pub op: NodeOp,
    pub inputs: Vec<NodeId>,
    /// Excluded from new fusions and from what-if recomputation.
    pub disabled: bool,
    /// Whether this value already carries its source's confidence discount.
    pub confidence_applied: bool,
    pub recipe: Option<FuseRecipe>,
}

/// One operation of a session log or a script.
///
/// `result`, when present, is the node the operation produced; replay checks
/// it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogRecord {
    Submit {
        frame: String,
        masses: Vec<MassDoc>,
        source: SourceDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<NodeId>,
    },
    Discount {
        node: NodeId,
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<NodeId>,
    },
    Translate {
        node: NodeId,
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<NodeId>,
    },
    Fuse {
        nodes: Vec<NodeId>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "wire::opt_rule")]
        rule: Option<FusionRule>,
        /// Defaults to the frame of the first node.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
        /// Overrides the session's auto-discount switch for this fusion.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        auto_discount: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<NodeId>,
    },
    WhatIf {
        node: NodeId,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        disable: Vec<NodeId>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        rediscount: BTreeMap<NodeId, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<NodeId>,
    },
    SetDisabled {
        node: NodeId,
        disabled: bool,
    },
    Configure {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        auto_discount: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_certain: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_probable: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_possible: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inconclusive_margin: Option<f64>,
    },
}

impl LogRecord {
    pub fn result(&self) -> Option<NodeId> {
        match self {
            LogRecord::Submit { result, .. }
            | LogRecord::Discount { result, .. }
            | LogRecord::Translate { result, .. }
            | LogRecord::Fuse { result, .. }
            | LogRecord::WhatIf { result, .. } => *result,
            LogRecord::SetDisabled { .. } | LogRecord::Configure { .. } => None,
        }
    }

    fn set_result(&mut self, id: Option<NodeId>) {
        match self {
            LogRecord::Submit { result, .. }
            | LogRecord::Discount { result, .. }
            | LogRecord::Translate { result, .. }
            | LogRecord::Fuse { result, .. }
            | LogRecord::WhatIf { result, .. } => *result = id,
            LogRecord::SetDisabled { .. } | LogRecord::Configure { .. } => {}
        }
    }
}

/// A conclusion together with the inconclusiveness flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Conclusion {
    pub node: NodeId,
    pub frame_id: String,
    pub report: ConclusionReport,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub node: NodeId,
    pub report: InfluenceReport,
    pub text: String,
}

/// Serialized node value, used by session export and replay checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub disabled: bool,
    pub frame: String,
    pub id: NodeId,
    pub inputs: Vec<NodeId>,
    pub kind: String,
    pub masses: Vec<MassDoc>,
    pub op: NodeOp,
    pub source: SourceDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDoc {
    pub format: String,
    pub kb: KbDoc,
    pub log: Vec<LogRecord>,
    pub nodes: Vec<NodeDoc>,
    pub version: String,
}

static NEVER: AtomicBool = AtomicBool::new(false);

/// A single-writer analysis workspace.
#[derive(Debug, Clone)]
pub struct Session {
    kb: KnowledgeBase,
    nodes: BTreeMap<NodeId, LineageNode>,
    log: Vec<LogRecord>,
    next_id: u64,
    auto_discount: AutoDiscountConfig,
    inconclusive_margin: f64,
    explanation_cap: usize,
}

/// Nodes produced by one operation, committed only when it succeeds.
struct Staged {
    next_id: u64,
    nodes: Vec<LineageNode>,
}

impl Staged {
    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn push(&mut self, boe: Boe, op: NodeOp, inputs: Vec<NodeId>, confidence_applied: bool) -> NodeId {
        let id = self.id();
        let boe = Boe {
            id: id.to_string(),
            ..boe
        };
        self.nodes.push(LineageNode {
            id,
            boe,
            op,
            inputs,
            disabled: false,
            confidence_applied,
            recipe: None,
        });
        id
    }
}

fn check_cancel(cancel: &AtomicBool) -> Result<()> {
    if cancel.load(Ordering::Relaxed) {
        Err(EngineError::Cancelled)
    } else {
        Ok(())
    }
}

impl Session {
    /// A session over `kb`; its static BOEs become the first entered nodes.
    pub fn new(kb: KnowledgeBase) -> Session {
        let mut nodes = BTreeMap::new();
        let mut next_id = 1;
        for b in &kb.static_boes {
            let id = NodeId(next_id);
            next_id += 1;
            let boe = Boe {
                id: id.to_string(),
                ..b.clone()
            };
            nodes.insert(
                id,
                LineageNode {
                    id,
                    boe,
                    op: NodeOp::Entered,
                    inputs: Vec::new(),
                    disabled: false,
                    confidence_applied: false,
                    recipe: None,
                },
            );
        }
        Session {
            kb,
            nodes,
            log: Vec::new(),
            next_id,
            auto_discount: AutoDiscountConfig::default(),
            inconclusive_margin: DEFAULT_INCONCLUSIVE_MARGIN,
            explanation_cap: DEFAULT_EXPLANATION_CAP,
        }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LineageNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Result<&LineageNode> {
        self.nodes.get(&id).ok_or(EngineError::UnknownNode(id))
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    /// Number of operations applied so far.
    pub fn log_position(&self) -> usize {
        self.log.len()
    }

    pub fn auto_discount(&self) -> &AutoDiscountConfig {
        &self.auto_discount
    }

    pub fn inconclusive_margin(&self) -> f64 {
        self.inconclusive_margin
    }

    /// Frame-size limit for exact explanations. Not logged: it never changes
    /// node values.
    pub fn set_explanation_cap(&mut self, cap: usize) {
        self.explanation_cap = cap;
    }

    /// Applies one operation and appends it to the log. On error the session
    /// is unchanged.
    pub fn apply(&mut self, record: LogRecord) -> Result<Option<NodeId>> {
        self.apply_cancelable(record, &NEVER)
    }

    /// As [`Session::apply`], abandoning the operation (and leaving the session
    /// at its prior log position) once `cancel` is set.
    pub fn apply_cancelable(&mut self, mut record: LogRecord, cancel: &AtomicBool) -> Result<Option<NodeId>> {
        check_cancel(cancel)?;
        let result = match &record {
            LogRecord::Submit {
                frame, masses, source, ..
            } => Some(self.exec_submit(frame, masses, source)?),
            LogRecord::Discount { node, rate, .. } => Some(self.exec_discount(*node, *rate)?),
            LogRecord::Translate { node, target, .. } => Some(self.exec_translate(*node, target)?),
            LogRecord::Fuse {
                nodes,
                rule,
                target,
                auto_discount,
                ..
            } => Some(self.exec_fuse(nodes, *rule, target.as_deref(), *auto_discount, cancel)?),
            LogRecord::WhatIf {
                node,
                disable,
                rediscount,
                ..
            } => Some(self.exec_what_if(*node, disable, rediscount, cancel)?),
            LogRecord::SetDisabled { node, disabled } => {
                self.nodes
                    .get_mut(node)
                    .ok_or(EngineError::UnknownNode(*node))?
                    .disabled = *disabled;
                None
            }
            LogRecord::Configure {
                auto_discount,
                rate_certain,
                rate_probable,
                rate_possible,
                inconclusive_margin,
            } => {
                let mut cfg = self.auto_discount;
                if let Some(on) = auto_discount {
                    cfg.enabled = *on;
                }
                cfg.rate_certain = rate_certain.unwrap_or(cfg.rate_certain);
                cfg.rate_probable = rate_probable.unwrap_or(cfg.rate_probable);
                cfg.rate_possible = rate_possible.unwrap_or(cfg.rate_possible);
                cfg.validate()?;
                let margin = inconclusive_margin.unwrap_or(self.inconclusive_margin);
                if !(0.0..=1.0).contains(&margin) {
                    return Err(EngineError::InvalidMargin(margin));
                }
                self.auto_discount = cfg;
                self.inconclusive_margin = margin;
                None
            }
        };
        record.set_result(result);
        self.log.push(record);
        Ok(result)
    }

    fn staged(&self) -> Staged {
        Staged {
            next_id: self.next_id,
            nodes: Vec::new(),
        }
    }

    fn commit(&mut self, staged: Staged) {
        self.next_id = staged.next_id;
        for n in staged.nodes {
            self.nodes.insert(n.id, n);
        }
    }

    fn live(&self, id: NodeId) -> Result<&LineageNode> {
        let n = self.node(id)?;
        if n.disabled {
            return Err(EngineError::NodeDisabled(id));
        }
        Ok(n)
    }

    fn exec_submit(&mut self, frame_id: &str, masses: &[MassDoc], source: &SourceDoc) -> Result<NodeId> {
        let frame = self.kb.gallery.frame(frame_id)?;
        let meta = source
            .to_meta(EntryPath::Manual)
            .map_err(EngineError::InvalidSource)?;
        let assignments = resolve_masses(frame, masses)?;
        let mut staged = self.staged();
        let id = staged.id();
        let boe = make_boe(&id.to_string(), frame, assignments, meta)?;
        staged.nodes.push(LineageNode {
            id,
            boe,
            op: NodeOp::Entered,
            inputs: Vec::new(),
            disabled: false,
            confidence_applied: false,
            recipe: None,
        });
        self.commit(staged);
        Ok(id)
    }

    fn exec_discount(&mut self, node: NodeId, rate: f64) -> Result<NodeId> {
        let input = self.live(node)?;
        let masses = discount(&input.boe.masses, rate)?;
        let boe = input.boe.derive("", masses);
        let applied = input.confidence_applied;
        let mut staged = self.staged();
        let id = staged.push(boe, NodeOp::Discounted { rate }, vec![node], applied);
        self.commit(staged);
        Ok(id)
    }

    fn exec_translate(&mut self, node: NodeId, target: &str) -> Result<NodeId> {
        let input = self.live(node)?;
        let t = self.kb.gallery.translate_to(&input.boe, target, "")?;
        let applied = input.confidence_applied;
        let mut staged = self.staged();
        let op = NodeOp::Translated {
            path: t.path,
            loss: t.loss,
        };
        let id = staged.push(t.boe, op, vec![node], applied);
        self.commit(staged);
        Ok(id)
    }

    fn exec_fuse(
        &mut self,
        nodes: &[NodeId],
        rule: Option<FusionRule>,
        target: Option<&str>,
        auto: Option<bool>,
        cancel: &AtomicBool,
    ) -> Result<NodeId> {
        let rule = rule.unwrap_or(FusionRule::Dempster);
        let target = match target {
            Some(t) => t.to_string(),
            None => match nodes.first() {
                Some(&first) => self.node(first)?.boe.frame_id.clone(),
                None => {
                    return Err(horizon_core::Error::TooFewInputs { needed: 2, got: 0 }.into());
                }
            },
        };
        let mut cfg = self.auto_discount;
        if let Some(on) = auto {
            cfg.enabled = on;
        }
        let (staged, id) = self.pipeline(nodes, rule, &target, cfg, &BTreeMap::new(), cancel)?;
        self.commit(staged);
        Ok(id)
    }

    fn exec_what_if(
        &mut self,
        fused: NodeId,
        disable: &[NodeId],
        rediscount: &BTreeMap<NodeId, f64>,
        cancel: &AtomicBool,
    ) -> Result<NodeId> {
        let recipe = self
            .node(fused)?
            .recipe
            .clone()
            .ok_or(EngineError::NotFused(fused))?;
        let resolve = |n: NodeId| recipe.input_for(n).ok_or(EngineError::NotAnInput { node: n, fused });
        let mut excluded = Vec::new();
        for &n in disable {
            excluded.push(resolve(n)?);
        }
        let mut overrides = recipe.rediscount.clone();
        for (&n, &rate) in rediscount {
            overrides.insert(resolve(n)?, rate);
        }
        let survivors: Vec<NodeId> = recipe
            .inputs
            .iter()
            .copied()
            .filter(|n| !excluded.contains(n) && !self.nodes[n].disabled)
            .collect();
        if survivors.len() < 2 {
            return Err(EngineError::TooFewSurvivors {
                survivors: survivors.len(),
            });
        }
        overrides.retain(|n, _| survivors.contains(n));
        let (staged, id) = self.pipeline(
            &survivors,
            recipe.rule,
            &recipe.target,
            recipe.auto_discount,
            &overrides,
            cancel,
        )?;
        self.commit(staged);
        Ok(id)
    }

    /// Auto-discount (or an explicit re-discount), translation to `target`,
    /// then fusion. Stages that would not change a value are skipped.
    fn pipeline(
        &self,
        inputs: &[NodeId],
        rule: FusionRule,
        target: &str,
        cfg: AutoDiscountConfig,
        rediscount: &BTreeMap<NodeId, f64>,
        cancel: &AtomicBool,
    ) -> Result<(Staged, NodeId)> {
        if inputs.len() < 2 {
            return Err(horizon_core::Error::TooFewInputs {
                needed: 2,
                got: inputs.len(),
            }
            .into());
        }
        cfg.validate()?;
        self.kb.gallery.frame(target)?;
        let mut staged = self.staged();
        let mut chains = Vec::with_capacity(inputs.len());
        let mut entering: Vec<Boe> = Vec::with_capacity(inputs.len());
        let mut all_applied = true;
        for &input in inputs {
            check_cancel(cancel)?;
            let node = self.live(input)?;
            let mut chain = vec![input];
            let mut boe = node.boe.clone();
            let mut applied = node.confidence_applied;
            if let Some(&rate) = rediscount.get(&input) {
                let masses = discount(&boe.masses, rate)?;
                let id = staged.push(boe.derive("", masses), NodeOp::Discounted { rate }, vec![input], true);
                boe = staged.nodes.last().expect("just pushed").boe.clone();
                chain.push(id);
                applied = true;
            } else if cfg.enabled && !applied {
                let rate = cfg.rate_for(boe.source.confidence);
                applied = true;
                if rate > 0.0 {
                    let masses = discount(&boe.masses, rate)?;
                    let id = staged.push(
                        boe.derive("", masses),
                        NodeOp::AutoDiscounted { rate },
                        vec![input],
                        true,
                    );
                    boe = staged.nodes.last().expect("just pushed").boe.clone();
                    chain.push(id);
                }
            }
            if boe.frame_id != target {
                check_cancel(cancel)?;
                let t = self.kb.gallery.translate_to(&boe, target, "")?;
                let from = *chain.last().expect("nonempty chain");
                let op = NodeOp::Translated {
                    path: t.path,
                    loss: t.loss,
                };
                let id = staged.push(t.boe, op, vec![from], applied);
                boe = staged.nodes.last().expect("just pushed").boe.clone();
                chain.push(id);
            }
            all_applied &= applied;
            entering.push(boe);
            chains.push(chain);
        }
        check_cancel(cancel)?;
        let refs: Vec<&Boe> = entering.iter().collect();
        let fused = fuse(&refs, rule)?;
        check_cancel(cancel)?;
        let contributions: Vec<NodeId> = chains.iter().map(|c| *c.last().expect("nonempty chain")).collect();
        let names: Vec<String> = contributions.iter().map(NodeId::to_string).collect();
        let source = SourceMeta {
            name: format!("{} fusion of {}", rule.as_str(), names.join(", ")),
            confidence: Confidence::Certain,
            independent: true,
            entry_path: EntryPath::Manual,
            timestamp: None,
        };
        let boe = Boe {
            id: String::new(),
            frame_id: target.to_string(),
            masses: fused.masses,
            source,
            kind: BoeKind::Secondary,
        };
        let op = NodeOp::Fused {
            rule,
            conflict: fused.conflict,
        };
        let id = staged.push(boe, op, contributions, all_applied);
        staged.nodes.last_mut().expect("just pushed").recipe = Some(FuseRecipe {
            inputs: inputs.to_vec(),
            chains,
            rule,
            target: target.to_string(),
            auto_discount: cfg,
            rediscount: rediscount.clone(),
        });
        Ok((staged, id))
    }

    /// Enters a BOE given as (labels, mass) assignments.
    pub fn submit_boe<S: AsRef<str>>(
        &mut self,
        frame_id: &str,
        assignments: &[(&[S], f64)],
        source: &SourceMeta,
    ) -> Result<NodeId> {
        let masses = assignments
            .iter()
            .map(|(labels, mass)| MassDoc {
                mass: wire::Mass17(*mass),
                set: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            })
            .collect();
        self.apply(LogRecord::Submit {
            frame: frame_id.to_string(),
            masses,
            source: SourceDoc::from_meta(source),
            result: None,
        })
        .map(|r| r.expect("submit produces a node"))
    }

    pub fn discount(&mut self, node: NodeId, rate: f64) -> Result<NodeId> {
        self.apply(LogRecord::Discount {
            node,
            rate,
            result: None,
        })
        .map(|r| r.expect("discount produces a node"))
    }

    pub fn translate(&mut self, node: NodeId, target: &str) -> Result<NodeId> {
        self.apply(LogRecord::Translate {
            node,
            target: target.to_string(),
            result: None,
        })
        .map(|r| r.expect("translate produces a node"))
    }

    /// Fuses `nodes` on `target`. `auto_discount` overrides the session
    /// switch for this fusion only.
    pub fn run_fusion(
        &mut self,
        nodes: &[NodeId],
        rule: FusionRule,
        target: &str,
        auto_discount: Option<bool>,
    ) -> Result<NodeId> {
        self.apply(LogRecord::Fuse {
            nodes: nodes.to_vec(),
            rule: Some(rule),
            target: Some(target.to_string()),
            auto_discount,
            result: None,
        })
        .map(|r| r.expect("fusion produces a node"))
    }

    /// Recomputes fusion `node` without the inputs in `disable` and with the
    /// given discount rates replacing auto-discounting. Nodes named may be
    /// recipe inputs or any node the pipeline derived from them.
    pub fn what_if(&mut self, node: NodeId, disable: &[NodeId], rediscount: &BTreeMap<NodeId, f64>) -> Result<NodeId> {
        self.apply(LogRecord::WhatIf {
            node,
            disable: disable.to_vec(),
            rediscount: rediscount.clone(),
            result: None,
        })
        .map(|r| r.expect("what-if produces a node"))
    }

    pub fn set_disabled(&mut self, node: NodeId, disabled: bool) -> Result<()> {
        self.apply(LogRecord::SetDisabled { node, disabled }).map(|_| ())
    }

    pub fn set_auto_discount(&mut self, enabled: bool) -> Result<()> {
        self.apply(LogRecord::Configure {
            auto_discount: Some(enabled),
            rate_certain: None,
            rate_probable: None,
            rate_possible: None,
            inconclusive_margin: None,
        })
        .map(|_| ())
    }

    pub fn conclusion_of(&self, node: NodeId) -> Result<Conclusion> {
        let n = self.node(node)?;
        let conflict = match n.op {
            NodeOp::Fused { conflict, .. } => conflict,
            _ => 0.0,
        };
        let report = conclusion_report(&n.boe).with_conflict(conflict);
        let inconclusive = report.is_inconclusive(self.inconclusive_margin);
        Ok(Conclusion {
            node,
            frame_id: n.boe.frame_id.clone(),
            report,
            inconclusive,
        })
    }

    /// Influence of each contribution on a fused node; any other node is its
    /// own single contribution.
    pub fn explanation_of(&self, node: NodeId) -> Result<Explanation> {
        let n = self.node(node)?;
        let (ids, rule) = match (&n.recipe, &n.op) {
            (Some(recipe), _) => (recipe.contributions(), recipe.rule),
            (None, NodeOp::Fused { rule, .. }) => (n.inputs.clone(), *rule),
            (None, _) => (vec![node], FusionRule::Smets),
        };
        let mut contributions = Vec::with_capacity(ids.len());
        let mut names = BTreeMap::new();
        for id in &ids {
            let c = self.node(*id)?;
            contributions.push((c.boe.id.as_str(), &c.boe.masses));
            names.insert(c.boe.id.clone(), c.boe.source.name.clone());
        }
        let report = influence(&n.boe.id, &contributions, rule, self.explanation_cap)?;
        let text = explanation_text(&report, &names);
        Ok(Explanation { node, report, text })
    }

    pub fn node_doc(&self, node: &LineageNode) -> NodeDoc {
        let frame = self
            .kb
            .gallery
            .frame(&node.boe.frame_id)
            .expect("nodes live on registered frames");
        NodeDoc {
            disabled: node.disabled,
            frame: node.boe.frame_id.clone(),
            id: node.id,
            inputs: node.inputs.clone(),
            kind: match node.boe.kind {
                BoeKind::Initial => "initial",
                BoeKind::Secondary => "secondary",
            }
            .to_string(),
            masses: MassDoc::list(frame, &node.boe.masses),
            op: node.op.clone(),
            source: SourceDoc::from_meta(&node.boe.source),
        }
    }

    pub fn to_doc(&self) -> SessionDoc {
        SessionDoc {
            format: SESSION_FORMAT.to_string(),
            kb: self.kb.to_doc(),
            log: self.log.clone(),
            nodes: self.nodes.values().map(|n| self.node_doc(n)).collect(),
            version: SESSION_VERSION.to_string(),
        }
    }

    /// The session as a UTF-8 JSON document: KB snapshot, log and node values.
    pub fn export(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_doc()).expect("session serializes");
        out.push('\n');
        out
    }

    /// Rebuilds a session by replaying a log against `kb`.
    pub fn replay(kb: KnowledgeBase, log: &[LogRecord]) -> Result<Session> {
        let mut session = Session::new(kb);
        for (position, record) in log.iter().enumerate() {
            let produced = session
                .apply(record.clone())
                .map_err(|e| EngineError::Replay {
                    position,
                    detail: e.to_string(),
                })?;
            if let Some(expected) = record.result() {
                if produced != Some(expected) {
                    return Err(EngineError::Replay {
                        position,
                        detail: format!("expected node {expected}, produced {produced:?}"),
                    });
                }
            }
        }
        Ok(session)
    }

    pub fn from_doc(doc: &SessionDoc) -> Result<Session> {
        if doc.format != SESSION_FORMAT {
            return Err(EngineError::Format(format!("unknown format {:?}", doc.format)));
        }
        if doc.version != SESSION_VERSION {
            return Err(EngineError::Format(format!(
                "unsupported version {:?}, expected {SESSION_VERSION:?}",
                doc.version
            )));
        }
        let kb = KnowledgeBase::from_doc(&doc.kb)?;
        let session = Session::replay(kb, &doc.log)?;
        let replayed: Vec<NodeDoc> = session.nodes.values().map(|n| session.node_doc(n)).collect();
        if replayed.len() != doc.nodes.len() {
            return Err(EngineError::Replay {
                position: doc.log.len(),
                detail: format!("{} nodes recorded, {} replayed", doc.nodes.len(), replayed.len()),
            });
        }
        if let Some((want, got)) = doc.nodes.iter().zip(&replayed).find(|(a, b)| a != b) {
            return Err(EngineError::Replay {
                position: doc.log.len(),
                detail: format!("node {} differs from its recorded value (replayed {})", want.id, got.id),
            });
        }
        Ok(session)
    }

    pub fn import(text: &str) -> Result<Session> {
        let doc: SessionDoc = serde_json::from_str(text).map_err(|e| EngineError::Format(e.to_string()))?;
        Session::from_doc(&doc)
    }
}
