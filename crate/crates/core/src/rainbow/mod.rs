//! The staged construction of a transversal and its building blocks.

mod augment;
mod params;
mod pipeline;
mod reserve;
mod stages;

pub use augment::{
    augmenting_rainbow, build_reach, greedy_rainbow, trace_back, AugmentConfig, AugmentReport,
    ReachState, ReachStep, ReachTermination, TraceError, TraceEvent, TraceResult,
};
pub use params::{log2_ceil, PipelineParams};
pub use pipeline::{
    augment_best, augment_restarts, pipeline_graph, robust_core, solve_auto, solve_pipeline, solve_pipeline_observed, AutoOutcome,
    CoreRun, FailureReport, Method, PipelineObserver, PipelineOutcome, Stage, StageLog,
    StageRecord, AUTO_EXACT_MAX_ORDER, AUTO_RESTARTS,
};
pub use reserve::{reservation_stats, reserve_colours, sample_reserved, ReservationSplit, ReservationStats};
pub use stages::{
    classify_hard_leftovers, final_core, finish_m3, greedy_m0, trim_core, Check, ChoiceCensus,
    FinalCore, HardLeftovers, M0Failure, M3Failure, TrimmedCore,
};
