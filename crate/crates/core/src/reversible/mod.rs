//! Lowering of LUT networks to scheduled single-target gates.

mod lower;
mod schedule;
mod stg;

pub use lower::{RevKind, RevNetwork, RevNode, RevNodeId, RevPart};
pub use schedule::{
    bennett_schedule, schedule_from_strategy, validate_schedule, validate_strategy, Direction, ScheduleReport,
    ScheduleStep, StgSchedule, DEFAULT_VALIDATION_INPUTS,
};
pub use stg::SingleTargetGate;
