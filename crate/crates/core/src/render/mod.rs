//! Deterministic emitters: CSV/JSON/plain-text tables, ASCII and SVG charts.

pub mod chart;
pub mod table;
pub mod xml;

pub use chart::{nice_ticks, render_ascii, render_svg, ChartSeries, ChartSpec, SeriesStyle};
pub use table::{Cell, Table};
