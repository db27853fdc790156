//! Virtual-time cost model: per-task lane loads, a discrete-event list scheduler,
//! run metrics and worker-scaling reports.

mod cost;
mod metrics;
mod scaling;
mod sim;

pub use cost::{cost_of, CostModel, Lane, TaskLoad};
pub use metrics::{format_checksum, merge_passes, mteps, PassVolume, RunMetrics};
pub(crate) use metrics::{collect_metrics, MetricsInput};
pub use scaling::{scaling_report, ScalingRow};
pub use sim::{lane_timelines, simulate_schedule, stage_busy, union_length, Schedule, ScheduledTask};
