//! File formats, tables and reports for `gicfb-core`, plus the `gicfb`
//! command-line tool.

pub mod gdof;
pub mod report;
pub mod sweep;
pub mod trajectory;

/// Numbers in data files: scientific notation with 15 significant digits.
pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:.14e}")
}
