//! Plot-data emission: CSV trace/aggregate writers and the serializable
//! bounds overlay. Output is data-only; rendering is left to external tools.
//!
//! Agent and arm ids are 1-indexed in every emitted artifact, matching the
//! edge-list convention. Numbers are written with shortest-round-trip
//! formatting, so re-running the same build on the same configuration
//! reproduces byte-identical files.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::simulation::{AggregateResult, RegretTrace};

/// Per-run trace rows: `run,t,agent,arm,reward,cumulative_regret`.
pub fn write_trace_csv<W: Write>(out: &mut W, run: usize, trace: &RegretTrace) -> io::Result<()> {
    for t in 0..trace.horizon {
        for agent in 0..trace.agents {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                run,
                t + 1,
                agent + 1,
                trace.selections[agent][t] + 1,
                trace.rewards[agent][t],
                trace.cumulative_regret[agent][t],
            )?;
        }
    }
    Ok(())
}

pub fn trace_csv_header() -> &'static str {
    "run,t,agent,arm,reward,cumulative_regret"
}

/// Aggregate rows: `t,agent,mean_cum_regret`.
pub fn write_aggregate_csv<W: Write>(out: &mut W, result: &AggregateResult) -> io::Result<()> {
    writeln!(out, "{}", aggregate_csv_header())?;
    for t in 0..result.horizon {
        for agent in 0..result.agents {
            writeln!(
                out,
                "{},{},{}",
                t + 1,
                agent + 1,
                result.mean_cumulative_regret[agent][t],
            )?;
        }
    }
    Ok(())
}

pub fn aggregate_csv_header() -> &'static str {
    "t,agent,mean_cum_regret"
}

/// Theoretical reference values for one suboptimal arm at the horizon.
/// `None` marks arms where a quantity is undefined (zero gap).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsOverlay {
    /// 1-indexed arm id.
    pub arm: usize,
    pub gap: f64,
    pub fusion_center_lower: Option<f64>,
    pub theorem1: Option<f64>,
    pub theorem2: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_layout() {
        let trace = RegretTrace {
            horizon: 2,
            agents: 1,
            arms: 2,
            selections: vec![vec![0, 1]],
            rewards: vec![vec![1.5, -0.25]],
            cumulative_regret: vec![vec![0.0, 2.0]],
            pull_counts: vec![vec![1, 1]],
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, 0, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0,1,1,1,1.5,0\n0,2,1,2,-0.25,2\n");
    }
}
