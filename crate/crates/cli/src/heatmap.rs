//! Deterministic SVG heatmaps of values on an R×R grid.

use std::fmt::Write;
use std::path::Path;

use crate::output::write_atomic;
use crate::CliError;

const PLOT: f64 = 400.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 40.0;
const LEGEND_X: f64 = LEFT + PLOT + 30.0;
const LEGEND_W: f64 = 20.0;

// viridis, sampled at five evenly spaced stops
const STOPS: [[u8; 3]; 5] = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];

/// Values on a cell-centred grid; `values[i * resolution + j]` sits at the
/// i-th x cell and j-th y cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub resolution: usize,
    pub values: Vec<f64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub title: String,
}

/// Colour at `t ∈ [0, 1]` on the linear scale.
pub fn color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    std::array::from_fn(|c| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8)
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn checked_range(grid: &HeatmapGrid) -> Result<(f64, f64), CliError> {
    let r = grid.resolution;
    if r == 0 || grid.values.len() != r * r {
        return Err(CliError::Config(format!("heatmap needs {r}×{r} values, got {}", grid.values.len())));
    }
    if let Some(k) = grid.values.iter().position(|v| !v.is_finite()) {
        return Err(CliError::Numerical(format!("non-finite heatmap value at cell ({}, {})", k / r, k % r)));
    }
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Fill colour of every cell, in the same order as `values`.
pub fn cell_colors(grid: &HeatmapGrid) -> Result<Vec<String>, CliError> {
    let (lo, hi) = checked_range(grid)?;
    let span = hi - lo;
    Ok(grid.values.iter().map(|&v| hex(color(if span > 0.0 { (v - lo) / span } else { 0.0 }))).collect())
}

pub fn render_heatmap(grid: &HeatmapGrid) -> Result<String, CliError> {
    let (lo, hi) = checked_range(grid)?;
    let fills = cell_colors(grid)?;
    let r = grid.resolution;
    let cell = PLOT / r as f64;
    let width = LEGEND_X + LEGEND_W + 100.0;
    let height = TOP + PLOT + 50.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + PLOT / 2.0,
        escape(&grid.title)
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for i in 0..r {
        for j in 0..r {
            // y grows upwards in the plot
            let x = LEFT + i as f64 * cell;
            let y = TOP + (r - 1 - j) as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{cell:.3}" height="{cell:.3}" fill="{}"/>"#,
                fills[i * r + j]
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#);

    let small = r#"font-family="sans-serif" font-size="11""#;
    let bottom = TOP + PLOT;
    let (x0, x1) = grid.x_range;
    let (y0, y1) = grid.y_range;
    let _ = writeln!(s, r#"<text x="{LEFT}" y="{}" {small} text-anchor="start">{x0:.3}</text>"#, bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" {small} text-anchor="end">{x1:.3}</text>"#, LEFT + PLOT, bottom + 16.0);
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" {small} text-anchor="middle">x</text>"#, LEFT + PLOT / 2.0, bottom + 32.0);
    let _ = writeln!(s, r#"<text x="{}" y="{bottom}" {small} text-anchor="end">{y0:.3}</text>"#, LEFT - 6.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" {small} text-anchor="end">{y1:.3}</text>"#, LEFT - 6.0, TOP + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" {small} text-anchor="middle">y</text>"#, LEFT - 30.0, TOP + PLOT / 2.0);

    let _ = writeln!(s, r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#);
    for (k, c) in STOPS.iter().enumerate() {
        let _ = writeln!(s, r#"<stop offset="{:.2}" stop-color="{}"/>"#, k as f64 / (STOPS.len() - 1) as f64, hex(*c));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let legend_fill = if hi > lo { "url(#scale)".to_string() } else { hex(color(0.0)) };
    let _ = writeln!(
        s,
        r#"<rect x="{LEGEND_X}" y="{TOP}" width="{LEGEND_W}" height="{PLOT}" fill="{legend_fill}" stroke="black"/>"#
    );
    let lx = LEGEND_X + LEGEND_W + 6.0;
    let _ = writeln!(s, r#"<text x="{lx}" y="{}" {small}>max {hi:.4e}</text>"#, TOP + 10.0);
    let _ = writeln!(s, r#"<text x="{lx}" y="{bottom}" {small}>min {lo:.4e}</text>"#);
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `grid` and write it atomically to `path`.
pub fn emit_heatmap(grid: &HeatmapGrid, path: &Path) -> Result<(), CliError> {
    let svg = render_heatmap(grid)?;
    write_atomic(path, svg.as_bytes())
}
