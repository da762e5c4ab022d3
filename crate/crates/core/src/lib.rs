//! Evidential reasoning over frames of discernment.
//!
//! Bodies of evidence are sparse mass functions over subsets of a frame. The
//! crate provides belief, plausibility and commonality, discounting, the
//! Dempster, Smets (unnormalized) and dependent-evidence fusion rules,
//! translation between frames linked by compatibility relations, and an
//! influence ranking built on the commonality-based information measure.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boe;
pub mod combine;
pub mod compat;
mod error;
pub mod explain;
pub mod frame;
pub mod info;
pub mod mass;
pub mod propset;
pub mod report;

pub use boe::{make_boe, Boe, BoeKind, Confidence, EntryPath, SourceMeta};
pub use combine::{
    auto_discount, discount, fuse, fuse_dempster, fuse_dependent, fuse_smets, zadeh_guard_demo,
    AutoDiscountConfig, Fused, FusionRule, ZadehComparison, MAX_FOCAL_SETS,
};
pub use compat::{translate, CompatibilityRelation, Direction, FrameGallery, Hop, TranslatedBoe, Translation};
pub use error::{Error, Result};
pub use explain::{explanation_text, influence, InfluenceEntry, InfluenceMethod, InfluenceReport};
pub use frame::{make_frame, Frame};
pub use info::{info_measure, DEFAULT_EXPLANATION_CAP};
pub use mass::MassFunction;
pub use propset::PropSet;
pub use report::{conclusion_report, ConclusionReport, ConclusionRow};
