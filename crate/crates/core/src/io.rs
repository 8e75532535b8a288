//! Trace export: CSV, JSON reports and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::geometry::Vec2;
use crate::integrator::{Diagnostics, GeodesicState, Trace};

pub const CSV_HEADER: &str = "t,u,v,du,dv,speed,kappa,gV";

/// Format with 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (s, d) in trace.states.iter().zip(&trace.diagnostics) {
        let row = [s.t, s.pos[0], s.pos[1], s.vel[0], s.vel[1], d.speed, d.kappa, d.g_v];
        let cells: Vec<String> = row.iter().map(|x| num(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse CSV produced by [`trace_to_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<GeodesicState>, Vec<Diagnostics>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(GeoError::Argument(format!("unexpected CSV header {other:?}"))),
    }
    let mut states = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| GeoError::Argument(format!("CSV row {}: {e}", i + 2)))?;
        if cells.len() != 8 {
            return Err(GeoError::Argument(format!("CSV row {} has {} columns", i + 2, cells.len())));
        }
        states.push(GeodesicState::new(cells[0], [cells[1], cells[2]], [cells[3], cells[4]]));
        diags.push(Diagnostics { speed: cells[5], kappa: cells[6], g_v: cells[7] });
    }
    Ok((states, diags))
}

pub fn write_csv(trace: &Trace, path: &Path) -> Result<()> {
    write_text(path, &trace_to_csv(trace))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| GeoError::Argument(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| GeoError::Argument(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| GeoError::Argument(format!("{}: {e}", path.display())))
}

/// A time-stamped planar curve to plot.
#[derive(Debug, Clone)]
pub struct PlotCurve {
    pub label: String,
    pub times: Vec<f64>,
    pub points: Vec<Vec2>,
}

impl PlotCurve {
    /// Chart coordinates of a trace.
    pub fn from_trace(label: &str, trace: &Trace) -> Self {
        Self { label: label.to_string(), times: trace.times(), points: trace.states.iter().map(|s| s.pos).collect() }
    }

    /// Orthographic projection of 3D points seen from the given azimuth and
    /// elevation (radians).
    pub fn projected(label: &str, times: Vec<f64>, points: &[[f64; 3]], azimuth: f64, elevation: f64) -> Self {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        let points = points
            .iter()
            .map(|p| {
                let x = -sa * p[0] + ca * p[1];
                let y = -se * ca * p[0] - se * sa * p[1] + ce * p[2];
                [x, y]
            })
            .collect();
        Self { label: label.to_string(), times, points }
    }
}

#[derive(Debug, Clone)]
pub struct PlotStyle {
    pub title: String,
    pub width: u32,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self { title: String::new(), width: 800 }
    }
}

fn polyline(out: &mut String, class: &str, pts: &[Vec2]) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|p| format!("{:.6},{:.6}", p[0], -p[1])).collect();
    let _ = writeln!(out, r#"  <polyline class="{class}" points="{}"/>"#, coords.join(" "));
}

/// Render curves as SVG. The viewport is the data bounding box with a 5%
/// margin; samples with `t < 0` go in a dashed polyline that shares the
/// `t = 0` point with the solid one.
pub fn plot_svg(curves: &[PlotCurve], style: &PlotStyle) -> Result<String> {
    if curves.is_empty() || curves.iter().any(|c| c.points.is_empty()) {
        return Err(GeoError::Argument("nothing to plot".into()));
    }
    let all = curves.iter().flat_map(|c| c.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let w = (x1 - x0).max(1e-9);
    let h = (y1 - y0).max(1e-9);
    let (mx, my) = (0.05 * w, 0.05 * h);
    let (vx, vy, vw, vh) = (x0 - mx, -(y1 + my), w + 2.0 * mx, h + 2.0 * my);
    let width = style.width;
    let height = ((width as f64) * vh / vw).round().clamp(50.0, 4.0 * width as f64) as u32;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#
    );
    if !style.title.is_empty() {
        let _ = writeln!(out, "  <title>{}</title>", escape(&style.title));
    }
    out.push_str("  <style>polyline{fill:none;stroke:black;stroke-width:1.5;vector-effect:non-scaling-stroke}.dashed{stroke-dasharray:6 4}</style>\n");
    for c in curves {
        let _ = writeln!(out, r#" <g id="{}">"#, escape(&c.label));
        let split = c.times.iter().position(|t| *t >= 0.0).unwrap_or(c.times.len());
        if split > 0 {
            let end = (split + 1).min(c.points.len());
            polyline(&mut out, "dashed", &c.points[..end]);
        }
        if split < c.points.len() {
            polyline(&mut out, "solid", &c.points[split..]);
        }
        out.push_str(" </g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartGeometry, VectorFieldSpec};
    use crate::integrator::{integrate, integrate_two_sided, IntegratorSettings};

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn rejects_bad_csv() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
    }

    #[test]
    fn straight_line_is_one_solid_polyline() {
        let st = GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]);
        let tr = integrate(&ChartGeometry::euclidean(), &VectorFieldSpec::zero(), &st, &IntegratorSettings::rk4(0.1, 0.0, 1.0)).unwrap();
        let svg = plot_svg(&[PlotCurve::from_trace("line", &tr)], &PlotStyle::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(r#"class="solid""#));
    }

    #[test]
    fn two_sided_trace_splits_at_zero() {
        let st = GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]);
        let tr = integrate_two_sided(&ChartGeometry::euclidean(), &VectorFieldSpec::zero(), &st, &IntegratorSettings::rk4(0.5, 0.0, 1.0), -1.0, 1.0).unwrap();
        let svg = plot_svg(&[PlotCurve::from_trace("g", &tr)], &PlotStyle::default()).unwrap();
        assert!(svg.contains(r#"<polyline class="dashed" points="-1.000000,-0.000000 -0.500000,-0.000000 0.000000,-0.000000"/>"#), "{svg}");
        assert!(svg.contains(r#"<polyline class="solid" points="0.000000,-0.000000 0.500000"#));
    }

    #[test]
    fn empty_plot_is_an_error() {
        assert!(plot_svg(&[], &PlotStyle::default()).is_err());
    }
}
