//! Time sequences, loop schedules, nested intervals of start displacements,
//! and shadowing checks for orbits that follow a prescribed symbol sequence.

mod alpha;
mod nested;
mod shadow;
mod symbols;
mod times;

pub use alpha::{alpha_bound_check, fit_remainder_constant, AlphaCheck, AlphaLevel};
pub use nested::{
    aleph_diameter, construct_backward, construct_nested, disjoint, null_construction, ConstructionConfig, Level,
    NestedIntervals,
};
pub use shadow::{
    calibrate_c_star, shadow_orbit, verify_shadowing, write_shadow_csv, ShadowOrbit, ShadowReport, ShadowWindow,
    WindowMode, C_STAR,
};
pub use symbols::{SymbolSequence, Tail, TimeSide};
pub use times::{
    build_time_sequence, loop_schedule, GapMode, LoopSchedule, Spacing, TimeOptions, TimeSequence, ZeroWindow,
    GAP_SLACK,
};
