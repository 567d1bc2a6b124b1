//! Per-step Monte Carlo trajectories as CSV.

use std::io::{self, Write};

use gicfb_core::{Schedule, SimStats};

use crate::fmt_num;

pub const CSV_SCHEMA_LINE: &str = "# gicfb-trajectory v1";
pub const CSV_COLUMNS: [&str; 12] = [
    "n",
    "power_target",
    "power_1",
    "power_2",
    "rho_target",
    "rho_hat",
    "rho_se",
    "err_1",
    "err_2",
    "rate_1_bpu",
    "rate_2_bpu",
    "power_se_1",
];

pub fn write_csv<W: Write>(stats: &SimStats, sched: &Schedule, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_SCHEMA_LINE}")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for k in 0..stats.corr_trajectory.len() {
        let n = k + 1;
        let target = sched.step(n).copied();
        let (p, r) = target.map_or((f64::NAN, f64::NAN), |s| (s.power, s.rho));
        w.write_record([
            n.to_string(),
            fmt_num(p),
            fmt_num(stats.power_trajectory[0][k]),
            fmt_num(stats.power_trajectory[1][k]),
            fmt_num(r),
            fmt_num(stats.corr_trajectory[k]),
            fmt_num(stats.corr_se[k]),
            fmt_num(stats.err_trajectory[0][k]),
            fmt_num(stats.err_trajectory[1][k]),
            fmt_num(stats.rate_trajectory[0][k]),
            fmt_num(stats.rate_trajectory[1][k]),
            fmt_num(stats.power_se[0][k]),
        ])?;
    }
    w.flush()
}
