//! Command-line front end: argument parsing, figure sweeps, CSV/JSON/SVG output.

pub mod app;
pub mod figures;
pub mod format;
pub mod svg;

pub use app::run;
