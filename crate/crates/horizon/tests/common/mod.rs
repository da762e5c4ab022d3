#![allow(dead_code)]

use std::path::PathBuf;

use horizon::engine::{NodeId, Session};
use horizon::kb::KnowledgeBase;
use horizon_core::{Confidence, EntryPath, FusionRule, SourceMeta};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn sample_path() -> PathBuf {
    data_dir().join("sample.horizon.json")
}

pub fn sample_kb() -> KnowledgeBase {
    KnowledgeBase::load_path(sample_path()).unwrap()
}

pub fn source(name: &str, confidence: Confidence) -> SourceMeta {
    SourceMeta::new(name).with_confidence(confidence)
}

pub struct EyeWitness {
    pub session: Session,
    pub eye: NodeId,
    pub sonar: NodeId,
    pub intel: NodeId,
    pub fused: NodeId,
}

/// Three sources on three frames fused on the classification frame; the
/// eye-witness report is by far the most specific.
pub fn eye_witness() -> EyeWitness {
    let mut session = Session::new(sample_kb());
    let eye = session
        .submit_boe(
            "classification",
            &[(&["Oberon"][..], 0.7), (&["Oberon", "Collins"][..], 0.2)],
            &source("Eye-Witness", Confidence::Certain),
        )
        .unwrap();
    let sonar = session
        .submit_boe(
            "type",
            &[(&["SSK"][..], 0.5), (&["SSK", "SSN"][..], 0.2)],
            &source("Towed array", Confidence::Probable).with_entry_path(EntryPath::AutomatedFeed),
        )
        .unwrap();
    let intel = session
        .submit_boe(
            "country",
            &[(&["Australia", "Canada"][..], 0.3)],
            &source("Intelligence summary", Confidence::Possible),
        )
        .unwrap();
    let fused = session
        .run_fusion(&[eye, sonar, intel], FusionRule::Dempster, "classification", None)
        .unwrap();
    EyeWitness {
        session,
        eye,
        sonar,
        intel,
        fused,
    }
}

/// A session exercising every operation, with exactly 35 nodes.
pub fn recorded_session() -> Session {
    let mut s = eye_witness().session;
    let a = s
        .submit_boe("classification", &[(&["Kilo"][..], 0.6), (&["Song"][..], 0.1)], &source("ESM", Confidence::Probable))
        .unwrap();
    let b = s
        .submit_boe("speed", &[(&["17"][..], 0.5), (&["17", "20"][..], 0.3)], &source("Doppler", Confidence::Possible))
        .unwrap();
    let c = s
        .submit_boe("diesels", &[(&["2"][..], 0.4)], &source("Acoustic count", Confidence::Certain))
        .unwrap();
    let d = s
        .submit_boe("threat", &[(&["High"][..], 0.5)], &source("Threat board", Confidence::Probable))
        .unwrap();
    let da = s.discount(a, 0.1).unwrap();
    let tb = s.translate(b, "classification").unwrap();
    let tc = s.translate(c, "type").unwrap();
    let f1 = s
        .run_fusion(&[da, tb, c], FusionRule::Smets, "classification", None)
        .unwrap();
    let f2 = s
        .run_fusion(&[tc, NodeId(2)], FusionRule::Dependent, "type", Some(false))
        .unwrap();
    s.set_auto_discount(false).unwrap();
    let f3 = s
        .run_fusion(&[a, d, NodeId(1)], FusionRule::Dempster, "category", None)
        .unwrap();
    s.set_disabled(d, true).unwrap();
    let w = s.what_if(f3, &[], &Default::default()).unwrap();
    let _ = (f1, f2, w);
    let mut i = 0;
    while s.node_count() < 35 {
        s.submit_boe("shafts", &[(&["1"][..], 0.05 * i as f64)], &source(&format!("filler {i}"), Confidence::Certain))
            .unwrap();
        i += 1;
    }
    assert_eq!(s.node_count(), 35);
    s
}
