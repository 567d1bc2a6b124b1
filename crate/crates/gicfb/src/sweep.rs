//! Rate-versus-alpha sweeps at fixed SNR, written as CSV.

use std::io::{self, Write};

use gicfb_core::rate::{kramer_solution, symmetric_rate, ChannelParams, DEFAULT_GRID_STEP};
use gicfb_core::{Error, Result};
use rayon::prelude::*;

use crate::fmt_num;

/// First line of every sweep file.
pub const CSV_SCHEMA_LINE: &str = "# gicfb-sweep v1";
pub const CSV_COLUMNS: [&str; 8] = [
    "alpha",
    "snr_db",
    "inr_db",
    "rate_proposed_bpu",
    "rate_kramer_bpu",
    "rho_opt",
    "b_opt",
    "beta_opt",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub snr_db: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    /// Correlation grid resolution.
    pub grid_step: f64,
    /// Use `a = -P^((alpha-1)/2)` instead of the positive gain.
    pub negative_a: bool,
}

impl SweepSpec {
    pub fn new(snr_db: f64, alpha_min: f64, alpha_max: f64, alpha_step: f64) -> Self {
        SweepSpec {
            snr_db,
            alpha_min,
            alpha_max,
            alpha_step,
            grid_step: DEFAULT_GRID_STEP,
            negative_a: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::Domain {
                what: "snr_db",
                value: self.snr_db,
            });
        }
        if !(self.alpha_step > 0.0 && self.alpha_step.is_finite()) {
            return Err(Error::Domain {
                what: "alpha step",
                value: self.alpha_step,
            });
        }
        if !(self.alpha_min < self.alpha_max) || !self.alpha_max.is_finite() {
            return Err(Error::Domain {
                what: "alpha range upper end",
                value: self.alpha_max,
            });
        }
        Ok(())
    }

    /// `alpha_min, alpha_min + step, ...` up to `alpha_max` inclusive, snapped
    /// to a 1e-12 lattice so that e.g. `alpha = 1` is hit exactly.
    pub fn alphas(&self) -> Vec<f64> {
        let span = (self.alpha_max - self.alpha_min) / self.alpha_step;
        let count = (span + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| {
                let alpha = self.alpha_min + k as f64 * self.alpha_step;
                (alpha * 1e12).round() / 1e12
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub snr_db: f64,
    pub inr_db: f64,
    pub rate_proposed_bits_per_use: f64,
    pub rate_kramer_bits_per_use: f64,
    pub rho_opt: f64,
    pub b_opt: f64,
    pub beta_opt: f64,
}

pub fn sweep_row(alpha: f64, spec: &SweepSpec) -> Result<SweepRow> {
    let p = 10f64.powf(spec.snr_db / 10.0);
    let mut ch = ChannelParams::from_alpha(alpha, p)?;
    if spec.negative_a {
        ch = ch.with_flipped_sign();
    }
    let ours = symmetric_rate(&ch, spec.grid_step)?;
    let kramer = kramer_solution(&ch)?;
    Ok(SweepRow {
        alpha,
        snr_db: spec.snr_db,
        inr_db: 10.0 * ch.inr().log10(),
        rate_proposed_bits_per_use: ours.rate_bits_per_use,
        rate_kramer_bits_per_use: kramer.rate_bits_per_use,
        rho_opt: ours.solution.rho,
        b_opt: ours.solution.b,
        beta_opt: ours.solution.beta,
    })
}

/// One row per alpha, in ascending alpha order. Rows are computed in
/// parallel; the result does not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.alphas()
        .par_iter()
        .map(|&alpha| sweep_row(alpha, spec))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_SCHEMA_LINE}")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            fmt_num(r.alpha),
            fmt_num(r.snr_db),
            fmt_num(r.inr_db),
            fmt_num(r.rate_proposed_bits_per_use),
            fmt_num(r.rate_kramer_bits_per_use),
            fmt_num(r.rho_opt),
            fmt_num(r.b_opt),
            fmt_num(r.beta_opt),
        ])?;
    }
    w.flush()
}
