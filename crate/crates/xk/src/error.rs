use thiserror::Error;

use crate::registry::GammaId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("schedule violation: {0}")]
    ScheduleViolation(String),
    #[error("index {index} outside schedule of length {len}")]
    IndexOutOfSchedule { index: usize, len: usize },
    #[error("age {age} exceeds n_{j} = {limit}")]
    AgeOverflow { j: usize, age: u64, limit: String },
    #[error("weight mismatch: {0}")]
    WeightMismatch(String),
    #[error("odd-weight rule violated: {0}")]
    OddWeightRuleViolation(String),
    #[error("unknown element {0}")]
    UnknownGamma(GammaId),
    #[error("payload support outside window: {0}")]
    SupportOutOfWindow(String),
    #[error("malformed element draft: {0}")]
    InvalidDraft(String),
    #[error("stage {requested} not materialized (generated up to {available})")]
    StageOverflow { requested: u32, available: u32 },
    #[error("base element has no evaluation analysis")]
    BaseHasNoAnalysis,
    #[error("first cut {p1} is below 2j = {min}")]
    CutTooSmall { p1: u32, min: u32 },
    #[error("net too large: {count} elements exceed cap {cap}")]
    NetTooLarge { count: usize, cap: usize },
    #[error("stage {stage} family {family}: {count} elements exceed cap {cap}")]
    CombinatorialBlowup { stage: u32, family: String, count: usize, cap: usize },
    #[error("cached coordinates are stale")]
    StaleCache,
    #[error("support of size {size} exceeds brute-force cap {cap}")]
    BruteForceCapExceeded { size: usize, cap: usize },
    #[error("not a block sequence: {0}")]
    NotBlockSequence(String),
    #[error("not a skipped block sequence: {0}")]
    NotSkippedBlock(String),
    #[error("sequence is not a certified RIS: {0}")]
    NotCertifiedRIS(String),
    #[error("no annihilating functional for block {0}")]
    AnnihilatorMissing(usize),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("tree-like property fails: {0}")]
    TreelikeViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
