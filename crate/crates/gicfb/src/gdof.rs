//! Finite-SNR degrees-of-freedom tables.

use gicfb_core::rate::gdof_ratio_with_step;
use gicfb_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdofRow {
    pub power: f64,
    /// `R_sym / log2(SNR)` with the rate in bits/s/Hz.
    pub ratio: f64,
    /// Kramer code's degrees of freedom, `(1 + alpha) / 4`.
    pub kramer_reference: f64,
}

pub fn gdof_table(alpha: f64, powers: &[f64], grid_step: f64) -> Result<Vec<GdofRow>> {
    if !(alpha > 1.0) {
        return Err(Error::Domain {
            what: "alpha (degrees of freedom need alpha > 1)",
            value: alpha,
        });
    }
    powers
        .iter()
        .map(|&power| {
            Ok(GdofRow {
                power,
                ratio: gdof_ratio_with_step(alpha, power, grid_step)?,
                kramer_reference: (1.0 + alpha) / 4.0,
            })
        })
        .collect()
}
