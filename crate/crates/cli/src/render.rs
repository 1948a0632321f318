//! Deterministic SVG plots rendered from emitted data files alone.

use std::fmt::Write as _;
use std::path::Path;

use quasilines::levelset::ComponentClass;
use quasilines::topology::{zone_svg, ZoneRecord};
use serde::{Deserialize, Serialize};

use crate::stages::{CensusData, LevelsetData, SublevelData};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// `levelset.json`
    Levelset,
    /// `sublevel.json`
    Sublevel,
    /// `trajectory-*.csv`
    Trajectory,
    /// `zones.json`
    ZoneMap,
    /// `census.json`
    Histogram,
    /// `section-*.csv`
    Section,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub width: f64,
    pub height: f64,
    /// `[x_min, x_max, y_min, y_max]`; the data bounds when absent.
    pub viewport: Option<[f64; 4]>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> Self {
        Self {
            kind,
            width: 600.0,
            height: 600.0,
            viewport: None,
        }
    }
}

const MARGIN: f64 = 30.0;

struct Canvas {
    width: f64,
    height: f64,
    vp: [f64; 4],
    body: String,
}

impl Canvas {
    /// Equal scaling on both axes when `equal` is set.
    fn new(spec: &PlotSpec, bounds: [f64; 4], equal: bool) -> Self {
        let mut vp = spec.viewport.unwrap_or(bounds);
        for k in [0, 2] {
            if !(vp[k + 1] > vp[k]) || !vp[k].is_finite() || !vp[k + 1].is_finite() {
                let c = if vp[k].is_finite() { vp[k] } else { 0.0 };
                vp[k] = c - 1.0;
                vp[k + 1] = c + 1.0;
            }
        }
        if equal {
            let (pw, ph) = (spec.width - 2.0 * MARGIN, spec.height - 2.0 * MARGIN);
            let scale = ((vp[1] - vp[0]) / pw).max((vp[3] - vp[2]) / ph);
            let (cx, cy) = (0.5 * (vp[0] + vp[1]), 0.5 * (vp[2] + vp[3]));
            vp = [
                cx - 0.5 * scale * pw,
                cx + 0.5 * scale * pw,
                cy - 0.5 * scale * ph,
                cy + 0.5 * scale * ph,
            ];
        }
        Self {
            width: spec.width,
            height: spec.height,
            vp,
            body: String::new(),
        }
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.vp[0]) / (self.vp[1] - self.vp[0]) * (self.width - 2.0 * MARGIN)
    }

    fn y(&self, y: f64) -> f64 {
        self.height
            - MARGIN
            - (y - self.vp[2]) / (self.vp[3] - self.vp[2]) * (self.height - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: &[[f64; 2]], closed: bool, stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", self.x(p[0]), self.y(p[1])))
            .collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            "<{tag} points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            coords.join(" ")
        );
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let (a, b) = (self.x(x0), self.x(x1));
        let (c, d) = (self.y(y1), self.y(y0));
        let _ = writeln!(
            self.body,
            "<rect x=\"{a:.2}\" y=\"{c:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
            b - a,
            d - c
        );
    }

    fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(self.body, "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"12\" font-family=\"sans-serif\">{s}</text>");
    }

    fn finish(self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = self.width,
            h = self.height
        );
        let _ = writeln!(
            s,
            "<!-- {} {} -->",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        );
        let _ = writeln!(s, "<title>{title}</title>");
        let _ = writeln!(
            s,
            "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
            self.width, self.height
        );
        s.push_str(&self.body);
        let _ = writeln!(
            s,
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#000000\"/>",
            self.width - 2.0 * MARGIN,
            self.height - 2.0 * MARGIN
        );
        s.push_str("</svg>\n");
        s
    }
}

fn bad(kind: PlotKind, e: impl std::fmt::Display) -> CliError {
    CliError::MissingData(format!("{kind:?} data: {e}"))
}

fn window_bounds(center: [f64; 2], half: [f64; 2]) -> [f64; 4] {
    [
        center[0] - half[0],
        center[0] + half[0],
        center[1] - half[1],
        center[1] + half[1],
    ]
}

fn point_bounds(pts: impl Iterator<Item = [f64; 2]>) -> [f64; 4] {
    pts.fold(
        [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ],
        |b, p| {
            [
                b[0].min(p[0]),
                b[1].max(p[0]),
                b[2].min(p[1]),
                b[3].max(p[1]),
            ]
        },
    )
}

fn parse_csv(bytes: &[u8], kind: PlotKind) -> Result<Vec<Vec<f64>>, CliError> {
    crate::io::parse_csv(bytes).map_err(|e| bad(kind, e))
}

/// Renders `spec` from the content of its data file.
pub fn render_bytes(spec: &PlotSpec, data: &[u8]) -> Result<String, CliError> {
    let kind = spec.kind;
    match kind {
        PlotKind::Levelset => {
            let d: LevelsetData = serde_json::from_slice(data).map_err(|e| bad(kind, e))?;
            let mut c = Canvas::new(
                spec,
                window_bounds(d.window.center, d.window.half_extent),
                true,
            );
            for (comp, class) in d.components.iter().zip(&d.classes) {
                let stroke = match class {
                    ComponentClass::Closed => "#1f5fbf",
                    ComponentClass::OpenSpanning => "#c0392b",
                    ComponentClass::Truncated => "#909090",
                };
                c.polyline(&comp.points, comp.closed, stroke, 1.0);
            }
            Ok(c.finish(&format!("level set V = {}", d.eps)))
        }
        PlotKind::Sublevel => {
            let d: SublevelData = serde_json::from_slice(data).map_err(|e| bad(kind, e))?;
            let b = window_bounds(d.window.center, d.window.half_extent);
            let mut c = Canvas::new(spec, b, true);
            let hx = (b[1] - b[0]) / d.nx.max(1) as f64;
            let hy = (b[3] - b[2]) / d.ny.max(1) as f64;
            for &[j, i0, i1] in &d.runs {
                let y0 = b[2] + j as f64 * hy;
                c.rect(
                    b[0] + i0 as f64 * hx,
                    b[0] + i1 as f64 * hx,
                    y0,
                    y0 + hy,
                    "#3c3c3c",
                );
            }
            Ok(c.finish(&format!("filled: V <= {}", d.eps)))
        }
        PlotKind::Trajectory => {
            let rows = parse_csv(data, kind)?;
            let pts: Vec<[f64; 2]> = rows
                .iter()
                .filter(|r| r.len() >= 3)
                .map(|r| [r[1], r[2]])
                .collect();
            let mut c = Canvas::new(spec, point_bounds(pts.iter().copied()), true);
            c.polyline(&pts, false, "#1f5fbf", 0.6);
            Ok(c.finish("trajectory"))
        }
        PlotKind::Section => {
            let rows = parse_csv(data, kind)?;
            let pts: Vec<[f64; 2]> = rows
                .iter()
                .filter(|r| r.len() >= 2)
                .map(|r| [r[0], r[1]])
                .collect();
            let mut c = Canvas::new(spec, point_bounds(pts.iter().copied()), false);
            for p in &pts {
                let _ = writeln!(
                    c.body,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1\" fill=\"#000000\"/>",
                    c.x(p[0]),
                    c.y(p[1])
                );
            }
            Ok(c.finish("section (x, px)"))
        }
        PlotKind::Histogram => {
            let d: CensusData = serde_json::from_slice(data).map_err(|e| bad(kind, e))?;
            let h = &d.report.histogram;
            let top = h.iter().copied().max().unwrap_or(0).max(1) as f64;
            let mut c = Canvas::new(spec, [0.0, 180.0, 0.0, 1.05 * top], false);
            let w = 180.0 / h.len().max(1) as f64;
            for (i, &n) in h.iter().enumerate() {
                if n > 0 {
                    c.rect(i as f64 * w, (i + 1) as f64 * w, 0.0, n as f64, "#5a7fa8");
                }
            }
            for &a in &d.level_line_angles {
                let x = c.x(a);
                let _ = writeln!(
                    c.body,
                    "<line x1=\"{x:.2}\" y1=\"{MARGIN}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>",
                    c.height - MARGIN
                );
            }
            for p in &d.report.peaks {
                let (x, y) = (c.x(p.angle_deg), MARGIN - 4.0);
                let _ = writeln!(
                    c.body,
                    "<path d=\"M{:.2},{:.2} l-4,-6 h8 z\" fill=\"#000000\"/>",
                    x, y
                );
            }
            let ybase = c.height - MARGIN + 16.0;
            for a in [0.0, 90.0, 180.0] {
                let x = c.x(a) - 8.0;
                c.text(x, ybase, &format!("{a}°"));
            }
            Ok(c.finish(&format!("ballistic directions at energy {}", d.eps)))
        }
        PlotKind::ZoneMap => {
            let recs: Vec<ZoneRecord> = serde_json::from_slice(data).map_err(|e| bad(kind, e))?;
            Ok(zone_svg(&recs))
        }
    }
}

/// Renders `spec` from the data file at `path`.
pub fn render(spec: &PlotSpec, path: &Path) -> Result<String, CliError> {
    let data = std::fs::read(path)
        .map_err(|e| CliError::MissingData(format!("{}: {e}", path.display())))?;
    render_bytes(spec, &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_levelset_is_a_valid_canvas() {
        let d = LevelsetData {
            eps: 5.0,
            window: quasilines::levelset::Window::square([0.0, 0.0], 3.0),
            cells_per_period: 16,
            closed: 0,
            open_spanning: 0,
            truncated: 0,
            classes: Vec::new(),
            components: Vec::new(),
        };
        let svg = render_bytes(
            &PlotSpec::new(PlotKind::Levelset),
            &serde_json::to_vec(&d).unwrap(),
        )
        .unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn missing_file_is_reported() {
        let err = render(
            &PlotSpec::new(PlotKind::Trajectory),
            Path::new("/nonexistent/t.csv"),
        )
        .unwrap_err();
        assert!(matches!(err, CliError::MissingData(_)));
    }

    #[test]
    fn trajectory_renders_deterministically() {
        let csv = b"t,x,y,px,py\n0,0,0,1,0\n1,1,0.5,1,0\n2,2,0,1,0\n";
        let a = render_bytes(&PlotSpec::new(PlotKind::Trajectory), csv).unwrap();
        let b = render_bytes(&PlotSpec::new(PlotKind::Trajectory), csv).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("<polyline"));
    }
}
