//! ASCII and SVG chart rendering for time series and tcptrace data.
//!
//! Both renderers are pure string builders: identical specs produce
//! byte-identical output.

use std::fmt::Write as _;

use crate::render::xml::escape_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Step,
    Marks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub label: String,
    pub style: SeriesStyle,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<ChartSeries>,
    /// Plot cells across (ASCII). Minimum 20.
    pub width: usize,
    /// Plot cells down (ASCII). Minimum 5.
    pub height: usize,
}

impl ChartSpec {
    pub fn new(title: &str, x_label: &str, y_label: &str, series: Vec<ChartSeries>) -> ChartSpec {
        ChartSpec {
            title: title.to_owned(),
            x_label: x_label.to_owned(),
            y_label: y_label.to_owned(),
            series,
            width: 72,
            height: 16,
        }
    }

    fn validate(&self) {
        assert!(!self.series.is_empty(), "chart needs at least one series");
        assert!(self.width >= 20, "chart width below 20");
        assert!(self.height >= 5, "chart height below 5");
    }

    /// Data ranges padded to non-degenerate spans; y spans down to 0.
    fn ranges(&self) -> (f64, f64, f64, f64) {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        let mut y_min = 0.0f64;
        for series in &self.series {
            for &(x, y) in &series.points {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !x_min.is_finite() {
            (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_max <= x_min {
            x_max = x_min + 1.0;
        }
        if y_max <= y_min {
            y_max = y_min + 1.0;
        }
        (x_min, x_max, y_min, y_max)
    }
}

const GLYPHS: [char; 6] = ['*', '+', 'o', 'x', '#', '@'];
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Shortest exact decimal form (1/2/5-step tick values stay compact).
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    format!("{v}")
}

/// 1/2/5 × 10ⁿ step covering span/target.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    mag * factor
}

fn ticks_at(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let eps = (hi - lo) * 1e-9;
    let mut ticks = Vec::new();
    let q = lo / step;
    // snap before ceiling so float error cannot skip a tick at the low edge
    let mut k = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.ceil() };
    loop {
        let value = k * step;
        if value > hi + eps {
            break;
        }
        ticks.push(if value == 0.0 { 0.0 } else { value });
        k += 1.0;
    }
    ticks
}

/// Tick positions at multiples of a nice step inside [lo, hi].
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi - lo).is_finite() || hi <= lo {
        return vec![lo];
    }
    let mut step = nice_step(hi - lo, target);
    loop {
        let ticks = ticks_at(lo, hi, step);
        if ticks.len() >= 2 {
            return ticks;
        }
        // a sparse grid can strand a single tick inside the range; refine
        // to the next smaller 1/2/5 step until two multiples fit
        let mag = 10f64.powf(step.log10().floor());
        let norm = step / mag;
        step = if norm > 4.0 {
            2.0 * mag
        } else if norm > 1.5 {
            mag
        } else {
            0.5 * mag
        };
    }
}

/// Text chart: `height` plot rows with min/max y labels, an axis line and
/// an x-label line (height+2 lines total), then a legend line when more
/// than one series is drawn.
pub fn render_ascii(spec: &ChartSpec) -> String {
    spec.validate();
    let (w, h) = (spec.width, spec.height);
    let (x_min, x_max, y_min, y_max) = spec.ranges();
    let col = |x: f64| (((x - x_min) / (x_max - x_min)) * (w - 1) as f64).round() as usize;
    let row = |y: f64| {
        let r = (((y - y_min) / (y_max - y_min)) * (h - 1) as f64).round() as usize;
        h - 1 - r.min(h - 1)
    };

    let mut grid = vec![vec![' '; w]; h];
    for (si, series) in spec.series.iter().enumerate() {
        let glyph = GLYPHS[si % GLYPHS.len()];
        let pts = &series.points;
        for pair in pts.windows(2) {
            let (x0, y0) = pair[0];
            let (x1, y1) = pair[1];
            let (c0, c1) = (col(x0), col(x1));
            #[allow(clippy::needless_range_loop)] // the row index varies per column
            for c in c0..=c1 {
                let y = match series.style {
                    SeriesStyle::Marks => continue,
                    SeriesStyle::Step => y0,
                    SeriesStyle::Line => {
                        if c1 == c0 {
                            y0
                        } else {
                            y0 + (y1 - y0) * (c - c0) as f64 / (c1 - c0) as f64
                        }
                    }
                };
                grid[row(y)][c] = glyph;
            }
        }
        for &(x, y) in pts {
            grid[row(y)][col(x)] = glyph;
        }
    }

    let y_top = fmt_num(y_max);
    let y_bot = fmt_num(y_min);
    let gutter = y_top.len().max(y_bot.len());
    let mut out = String::new();
    for (r, cells) in grid.iter().enumerate() {
        let label = if r == 0 {
            &y_top
        } else if r == h - 1 {
            &y_bot
        } else {
            ""
        };
        let _ = write!(out, "{label:>gutter$}|");
        let line: String = cells.iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let _ = writeln!(out, "{}+{}", " ".repeat(gutter), "-".repeat(w));
    let left = fmt_num(x_min);
    let right = fmt_num(x_max);
    let pad = w.saturating_sub(left.len() + right.len()).max(1);
    let _ = writeln!(
        out,
        "{}{left}{}{right}  [x: {}, y: {}]",
        " ".repeat(gutter + 1),
        " ".repeat(pad),
        spec.x_label,
        spec.y_label,
    );
    if spec.series.len() > 1 {
        let entries: Vec<String> = spec
            .series
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{} {}", GLYPHS[i % GLYPHS.len()], s.label))
            .collect();
        let _ = writeln!(out, "legend: {}", entries.join("  "));
    }
    out
}

/// SVG 1.1 document with axes, nice-number ticks, one path (line/step) or
/// mark group per non-empty series, and a legend.
pub fn render_svg(spec: &ChartSpec) -> String {
    spec.validate();
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const L: f64 = 64.0;
    const R: f64 = 624.0;
    const T: f64 = 30.0;
    const B: f64 = 356.0;
    let (x_min, x_max, y_min, y_max) = spec.ranges();
    let px = |x: f64| L + (x - x_min) / (x_max - x_min) * (R - L);
    let py = |y: f64| B - (y - y_min) / (y_max - y_min) * (B - T);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    svg.push_str("<rect width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n");
    let _ = writeln!(
        svg,
        "<text x=\"320\" y=\"18\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{}</text>",
        escape_text(&spec.title)
    );

    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{B}\" stroke=\"#000000\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{L}\" y1=\"{B}\" x2=\"{R}\" y2=\"{B}\" stroke=\"#000000\"/>"
    );

    for tick in nice_ticks(x_min, x_max, 6) {
        let x = px(tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{B}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000000\"/>",
            B + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            B + 16.0,
            escape_text(&fmt_num(tick))
        );
    }
    for tick in nice_ticks(y_min, y_max, 5) {
        let y = py(tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{L}\" y2=\"{y:.2}\" stroke=\"#000000\"/>",
            L - 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            L - 7.0,
            y + 4.0,
            escape_text(&fmt_num(tick))
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"390\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{}</text>",
        (L + R) / 2.0,
        escape_text(&spec.x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{0:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 14 {0:.2})\">{1}</text>",
        (T + B) / 2.0,
        escape_text(&spec.y_label)
    );

    for (si, series) in spec.series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        if series.points.is_empty() {
            continue;
        }
        match series.style {
            SeriesStyle::Line | SeriesStyle::Step => {
                let mut d = String::new();
                for (i, &(x, y)) in series.points.iter().enumerate() {
                    if i == 0 {
                        let _ = write!(d, "M{:.2},{:.2}", px(x), py(y));
                    } else if series.style == SeriesStyle::Step {
                        let prev_y = series.points[i - 1].1;
                        let _ = write!(d, " L{:.2},{:.2}", px(x), py(prev_y));
                        let _ = write!(d, " L{:.2},{:.2}", px(x), py(y));
                    } else {
                        let _ = write!(d, " L{:.2},{:.2}", px(x), py(y));
                    }
                }
                let _ = writeln!(
                    svg,
                    "<path fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" d=\"{d}\"/>"
                );
            }
            SeriesStyle::Marks => {
                let _ = writeln!(svg, "<g fill=\"{color}\">");
                for &(x, y) in &series.points {
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\"/>",
                        px(x),
                        py(y)
                    );
                }
                svg.push_str("</g>\n");
            }
        }
    }

    for (si, series) in spec.series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let y = T + 14.0 * si as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            R - 150.0,
            y
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>",
            R - 136.0,
            y + 9.0,
            escape_text(&series.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
