//! CSV, JSON and SVG output.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analytic::{
    boundary_i_curve, boundary_ii_curve, lowfreq_curve, BoundaryCurve, BOUNDARY_II_MAX_GBAR1,
};
use crate::eigensolve::GroundSolution;
use crate::error::{Error, Result};
use crate::fockspace::ParitySector;
use crate::model::ModelParams;
use crate::observables::ObservableSet;
use crate::sweep::{AxisParam, AxisScale, PhaseDiagram, PointRecord, PointResult};

/// Sweep CSV columns, in order.
pub const CSV_COLUMNS: [&str; 21] = [
    "g1",
    "g2",
    "g2_tilde",
    "omega",
    "Omega",
    "chi",
    "energy",
    "gap",
    "sigma_z",
    "sigma_x",
    "photon_number",
    "displacement",
    "spp_corr",
    "tpp_corr",
    "p2_ratio",
    "rho_plus",
    "x_tilde_plus",
    "x_tilde_minus",
    "branch",
    "n_max_used",
    "degenerate",
];

/// Columns that a sweep may choose to fill.
pub const OBSERVABLE_COLUMNS: [&str; 13] = [
    "energy",
    "gap",
    "sigma_z",
    "sigma_x",
    "photon_number",
    "displacement",
    "spp_corr",
    "tpp_corr",
    "p2_ratio",
    "rho_plus",
    "x_tilde_plus",
    "x_tilde_minus",
    "branch",
];

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn param_fields(p: &ModelParams) -> [String; 6] {
    [
        format_number(p.g1),
        format_number(p.g2),
        format_number(p.g2_tilde()),
        format_number(p.omega),
        format_number(p.big_omega),
        format_number(p.chi),
    ]
}

/// Numeric value of an observable column for one solved point.
pub fn field_value(r: &PointResult, field: &str) -> Option<f64> {
    let o = &r.observables;
    Some(match field {
        "energy" => r.energy,
        "gap" => r.gap,
        "sigma_z" => o.sigma_z,
        "sigma_x" => o.sigma_x,
        "photon_number" => o.photon_number,
        "displacement" => o.displacement,
        "spp_corr" => o.spp_correlation,
        "tpp_corr" => o.tpp_correlation,
        "p2_ratio" => o.p2_ratio,
        "rho_plus" => o.rho_plus,
        "x_tilde_plus" => o.x_tilde_plus?,
        "x_tilde_minus" => o.x_tilde_minus?,
        "n_max_used" => r.n_max_used as f64,
        _ => return None,
    })
}

struct CountingWriter<W> {
    inner: W,
    count: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n as u64;
        Ok(n)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Writes the diagram in grid order; returns the byte count. An `error`
/// column is appended only when some point failed.
pub fn write_csv<W: Write>(d: &PhaseDiagram, out: W) -> Result<u64> {
    let with_errors = d.rows.iter().any(|r| r.outcome.is_err());
    let mut w = csv::Writer::from_writer(CountingWriter {
        inner: out,
        count: 0,
    });
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_errors {
        header.push("error");
    }
    w.write_record(&header)?;
    for row in &d.rows {
        w.write_record(csv_row(d, row, with_errors))?;
    }
    w.flush()?;
    let inner = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(inner.count)
}

fn csv_row(d: &PhaseDiagram, row: &PointRecord, with_errors: bool) -> Vec<String> {
    let mut fields: Vec<String> = param_fields(&row.params).into();
    match &row.outcome {
        Ok(r) => {
            for col in &CSV_COLUMNS[6..] {
                let selected = d.spec.selects(col);
                let text = match *col {
                    "branch" => r
                        .branch
                        .as_ref()
                        .filter(|_| selected)
                        .map(|b| b.label.to_string())
                        .unwrap_or_default(),
                    "n_max_used" => r.n_max_used.to_string(),
                    "degenerate" => r.degenerate.to_string(),
                    c if selected => field_value(r, c).map(format_number).unwrap_or_default(),
                    _ => String::new(),
                };
                fields.push(text);
            }
            if with_errors {
                fields.push(String::new());
            }
        }
        Err(msg) => {
            fields.extend(std::iter::repeat_n(String::new(), CSV_COLUMNS.len() - 6));
            fields.push(msg.clone());
        }
    }
    fields
}

/// One parsed CSV row; empty fields become `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub g1: f64,
    pub g2: f64,
    pub g2_tilde: f64,
    pub omega: f64,
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    pub chi: f64,
    pub energy: Option<f64>,
    pub gap: Option<f64>,
    pub sigma_z: Option<f64>,
    pub sigma_x: Option<f64>,
    pub photon_number: Option<f64>,
    pub displacement: Option<f64>,
    pub spp_corr: Option<f64>,
    pub tpp_corr: Option<f64>,
    pub p2_ratio: Option<f64>,
    pub rho_plus: Option<f64>,
    pub x_tilde_plus: Option<f64>,
    pub x_tilde_minus: Option<f64>,
    pub branch: Option<String>,
    pub n_max_used: Option<usize>,
    pub degenerate: Option<bool>,
    #[serde(default)]
    pub error: Option<String>,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|rec| rec.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    /// Blue at −1, white at 0, red at +1.
    Diverging,
    /// White at the low end to dark blue at the high end.
    Sequential,
}

const BLUE: [f64; 3] = [33.0, 102.0, 172.0];
const WHITE: [f64; 3] = [247.0, 247.0, 247.0];
const RED: [f64; 3] = [178.0, 24.0, 43.0];
const BLANK: [f64; 3] = [255.0, 255.0, 255.0];
const DARK: [f64; 3] = [8.0, 48.0, 107.0];

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [u8; 3] {
    let c = |i: usize| (a[i] + (b[i] - a[i]) * t).round().clamp(0.0, 255.0) as u8;
    [c(0), c(1), c(2)]
}

impl Colormap {
    /// Piecewise-linear color of `v` over `domain`, clamped at the ends.
    ///
    /// Diverging: `t = (v − lo)/(hi − lo)`; blue→white on `[0, ½]`,
    /// white→red on `[½, 1]`. Sequential: white→dark on `[0, 1]`.
    pub fn color(self, v: f64, domain: (f64, f64)) -> [u8; 3] {
        let (lo, hi) = domain;
        let t = if hi > lo {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        match self {
            Colormap::Diverging if t < 0.5 => lerp(BLUE, WHITE, 2.0 * t),
            Colormap::Diverging => lerp(WHITE, RED, 2.0 * t - 1.0),
            Colormap::Sequential => lerp(BLANK, DARK, t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStyle {
    pub colormap: Colormap,
    /// Color domain; diverging maps default to `[−1, 1]`, sequential maps
    /// to the data range.
    pub domain: Option<(f64, f64)>,
    pub width: u32,
    pub height: u32,
    pub overlay: Vec<BoundaryCurve>,
}

impl HeatmapStyle {
    /// Diverging for signed order parameters, sequential otherwise.
    pub fn for_field(field: &str) -> Self {
        let colormap = match field {
            "sigma_z" | "x_tilde_plus" | "x_tilde_minus" | "displacement" | "spp_corr" => {
                Colormap::Diverging
            }
            _ => Colormap::Sequential,
        };
        Self {
            colormap,
            domain: None,
            width: 640,
            height: 520,
            overlay: Vec::new(),
        }
    }
}

/// Plot coordinate of a parameter: g1 in units of g_s, g2 and g2~ in units
/// of g_t, ω as is.
fn axis_coordinate(name: AxisParam, p: &ModelParams) -> f64 {
    match name {
        AxisParam::G1 => p.g1 / p.g_s(),
        AxisParam::G2 => p.g2 / p.g_t(),
        AxisParam::G2Tilde => p.g2_tilde() / p.g_t(),
        AxisParam::Omega => p.omega,
    }
}

fn axis_title(name: AxisParam) -> &'static str {
    match name {
        AxisParam::G1 => "g1 / g_s",
        AxisParam::G2 => "g2 / g_t",
        AxisParam::G2Tilde => "g2~ / g_t",
        AxisParam::Omega => "omega",
    }
}

/// Fractional grid index of `v` among monotone `coords`; `None` outside.
fn fractional_index(coords: &[f64], v: f64, log: bool) -> Option<f64> {
    let map = |x: f64| if log { x.ln() } else { x };
    let n = coords.len();
    if n == 1 {
        return ((v - coords[0]).abs() < 1e-12).then_some(0.0);
    }
    let (a, b) = (map(coords[0]), map(coords[n - 1]));
    let t = map(v);
    let (lo, hi) = (a.min(b), a.max(b));
    if !(t >= lo - 1e-9 * (hi - lo) && t <= hi + 1e-9 * (hi - lo)) {
        return None;
    }
    for i in 0..n - 1 {
        let (x0, x1) = (map(coords[i]), map(coords[i + 1]));
        if (t - x0) * (t - x1) <= 0.0 {
            let f = if x1 != x0 { (t - x0) / (x1 - x0) } else { 0.0 };
            return Some(i as f64 + f);
        }
    }
    None
}

fn short(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Renders `field` as one rect per grid cell with axes in g_s / g_t units
/// and the style's boundary curves as dashed paths.
pub fn render_heatmap_svg(d: &PhaseDiagram, field: &str, style: &HeatmapStyle) -> Result<String> {
    let (n1, n2) = d.shape();
    if d.rows.len() != n1 * n2
        || d.rows
            .iter()
            .enumerate()
            .any(|(k, r)| r.i1 * n2 + r.i2 != k)
    {
        return Err(Error::NonRectangularGrid(format!(
            "{} rows for a {n1}x{n2} grid",
            d.rows.len()
        )));
    }
    if !(CSV_COLUMNS[6..].contains(&field) && field != "branch" && field != "degenerate") {
        return Err(Error::InvalidParams(format!(
            "{field:?} is not a numeric column"
        )));
    }
    let values: Vec<Option<f64>> = d
        .rows
        .iter()
        .map(|r| r.outcome.as_ref().ok().and_then(|o| field_value(o, field)))
        .collect();
    let domain = style.domain.unwrap_or_else(|| match style.colormap {
        Colormap::Diverging => (-1.0, 1.0),
        Colormap::Sequential => {
            let (lo, hi) = values
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            if lo.is_finite() {
                (lo, hi)
            } else {
                (0.0, 1.0)
            }
        }
    });

    let (w, h) = (style.width as f64, style.height as f64);
    let (left, right, top, bottom) = (70.0, 110.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let cw = pw / n1 as f64;
    let ch = ph / n2 as f64;
    let x_of = |fi: f64| left + (fi + 0.5) * cw;
    let y_of = |fj: f64| top + ph - (fj + 0.5) * ch;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (k, v) in values.iter().enumerate() {
        let (i, j) = (k / n2, k % n2);
        let fill = match v {
            Some(v) => {
                let [r, g, b] = style.colormap.color(*v, domain);
                format!("#{r:02x}{g:02x}{b:02x}")
            }
            None => "#9e9e9e".into(),
        };
        let x = left + i as f64 * cw;
        let y = top + ph - (j as f64 + 1.0) * ch;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            cw + 0.01,
            ch + 0.01
        );
    }
    let _ = writeln!(s, "</g>");

    // axes and ticks
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let c1: Vec<f64> = (0..n1)
        .map(|i| axis_coordinate(d.spec.axis1.name, &d.get(i, 0).params))
        .collect();
    let ticks = 5usize;
    for t in 0..ticks {
        let fi = (n1 - 1) as f64 * t as f64 / (ticks - 1) as f64;
        let idx = fi.round() as usize;
        let x = x_of(idx as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="black"/><text x="{x:.3}" y="{:.3}" font-size="11" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            short(c1[idx])
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 18.0,
        axis_title(d.spec.axis1.name)
    );
    let c2: Option<Vec<f64>> = d.spec.axis2.map(|a| {
        (0..n2)
            .map(|j| axis_coordinate(a.name, &d.get(0, j).params))
            .collect()
    });
    if let (Some(a2), Some(c2)) = (d.spec.axis2, &c2) {
        for t in 0..ticks {
            let fj = (n2 - 1) as f64 * t as f64 / (ticks - 1) as f64;
            let idx = fj.round() as usize;
            let y = y_of(idx as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{:.3}" y1="{y:.3}" x2="{left}" y2="{y:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{}</text>"#,
                left - 5.0,
                left - 8.0,
                y + 4.0,
                short(c2[idx])
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.3}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.3})">{}</text>"#,
            top + ph / 2.0,
            top + ph / 2.0,
            axis_title(a2.name)
        );
    }

    // overlays, only on coupling-coupling panels at fixed frequency
    if let (Some(a2), Some(c2)) = (d.spec.axis2, &c2) {
        let coupling = |n: AxisParam| n != AxisParam::Omega;
        if coupling(d.spec.axis1.name) && coupling(a2.name) {
            let p0 = d.rows[0].params;
            let coord = |name: AxisParam, g1: f64, g2t: f64| match name {
                AxisParam::G1 => g1 / p0.g_s(),
                AxisParam::G2 => g2t / (1.0 + p0.chi) / p0.g_t(),
                AxisParam::G2Tilde => g2t / p0.g_t(),
                AxisParam::Omega => f64::NAN,
            };
            let log1 = d.spec.axis1.scale == AxisScale::Log;
            let log2 = a2.scale == AxisScale::Log;
            let _ = writeln!(
                s,
                r#"<g clip-path="url(#plot)" fill="none" stroke="black" stroke-width="1.5">"#
            );
            for curve in &style.overlay {
                let dash = match curve.kind {
                    crate::analytic::BoundaryKind::II
                    | crate::analytic::BoundaryKind::NumericalII => "8,3,2,3",
                    _ => "6,4",
                };
                let mut path = String::new();
                let mut pen_down = false;
                for &(g1, g2t) in &curve.points {
                    let fi = fractional_index(&c1, coord(d.spec.axis1.name, g1, g2t), log1);
                    let fj = fractional_index(c2, coord(a2.name, g1, g2t), log2);
                    match (fi, fj) {
                        (Some(fi), Some(fj)) => {
                            let _ = write!(
                                path,
                                "{}{:.3},{:.3} ",
                                if pen_down { "L" } else { "M" },
                                x_of(fi),
                                y_of(fj)
                            );
                            pen_down = true;
                        }
                        _ => pen_down = false,
                    }
                }
                if !path.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<path d="{}" stroke-dasharray="{dash}"><title>{}</title></path>"#,
                        path.trim_end(),
                        curve.kind.label()
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }
    }

    // color bar
    let bx = left + pw + 30.0;
    let steps = 64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let v = domain.0 + (domain.1 - domain.0) * t;
        let [r, g, b] = style.colormap.color(v, domain);
        let y = top + ph - (k as f64 + 1.0) * ph / steps as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{bx:.3}" y="{y:.3}" width="16" height="{:.3}" fill="#{r:02x}{g:02x}{b:02x}" shape-rendering="crispEdges"/>"##,
            ph / steps as f64 + 0.01
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{bx:.3}" y="{top}" width="16" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, y) in [(domain.1, top + 4.0), (domain.0, top + ph)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{y:.3}" font-size="11">{}</text>"#,
            bx + 20.0,
            short(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{field}</text>"#,
        bx + 8.0,
        top - 10.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
struct ParamsEcho {
    omega: f64,
    #[serde(rename = "Omega")]
    big_omega: f64,
    g1: f64,
    g2: f64,
    chi: f64,
    g2_tilde: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SolutionDocument<'a> {
    params: ParamsEcho,
    energy: f64,
    excited_energy: f64,
    gap: f64,
    n_max_used: usize,
    residual: f64,
    degenerate: bool,
    reliable: bool,
    sector: Option<&'static str>,
    sigma_z: f64,
    sigma_x: f64,
    photon_number: f64,
    displacement: f64,
    spp_corr: f64,
    tpp_corr: f64,
    p2_ratio: f64,
    rho_plus: f64,
    rho_minus: f64,
    x_tilde_plus: Option<f64>,
    x_tilde_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<&'a [f64]>,
}

/// Single JSON object with the scalar results and a parameter echo; the
/// coefficient vector is included only when `include_coeffs` is set.
pub fn write_solution_json<W: Write>(
    sol: &GroundSolution,
    obs: &ObservableSet,
    include_coeffs: bool,
    out: W,
) -> Result<u64> {
    let p = &sol.params;
    let doc = SolutionDocument {
        params: ParamsEcho {
            omega: p.omega,
            big_omega: p.big_omega,
            g1: p.g1,
            g2: p.g2,
            chi: p.chi,
            g2_tilde: p.g2_tilde(),
        },
        energy: sol.energy,
        excited_energy: sol.excited_energy,
        gap: sol.gap,
        n_max_used: sol.n_max_used,
        residual: sol.residual,
        degenerate: sol.degenerate,
        reliable: obs.reliable,
        sector: sol.sector.map(|s| match s {
            ParitySector::Even => "even",
            ParitySector::Odd => "odd",
        }),
        sigma_z: obs.sigma_z,
        sigma_x: obs.sigma_x,
        photon_number: obs.photon_number,
        displacement: obs.displacement,
        spp_corr: obs.spp_correlation,
        tpp_corr: obs.tpp_correlation,
        p2_ratio: obs.p2_ratio,
        rho_plus: obs.rho_plus,
        rho_minus: obs.rho_minus,
        x_tilde_plus: obs.x_tilde_plus,
        x_tilde_minus: obs.x_tilde_minus,
        coeffs: include_coeffs.then_some(sol.coeffs.as_slice()),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    let mut out = out;
    out.write_all(&bytes)?;
    Ok(bytes.len() as u64)
}

/// Boundary curves in the sweep schema plus a trailing `kind` column.
pub fn write_boundary_csv<W: Write>(curves: &[BoundaryCurve], out: W) -> Result<u64> {
    let mut w = csv::Writer::from_writer(CountingWriter {
        inner: out,
        count: 0,
    });
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    header.push("kind");
    w.write_record(&header)?;
    for c in curves {
        for &(g1, g2t) in &c.points {
            let p = c.params.with_g1(g1).with_g2_tilde(g2t);
            let mut fields: Vec<String> = param_fields(&p).into();
            fields.extend(std::iter::repeat_n(String::new(), CSV_COLUMNS.len() - 6));
            fields.push(c.kind.label().to_string());
            w.write_record(&fields)?;
        }
    }
    w.flush()?;
    let inner = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(inner.count)
}

/// Analytic boundary curves named `lowfreq`, `I` or `II`, traced at the
/// fixed frequencies of a diagram.
pub fn overlay_curves(d: &PhaseDiagram, names: &[String]) -> Result<Vec<BoundaryCurve>> {
    let p = d
        .rows
        .first()
        .map(|r| r.params)
        .ok_or_else(|| Error::Config("empty diagram".into()))?;
    let ratios: Vec<f64> = (0..=400)
        .map(|k| -0.999 + 1.998 * k as f64 / 400.0)
        .collect();
    names
        .iter()
        .map(|name| match name.as_str() {
            "lowfreq" => lowfreq_curve(&p, &ratios),
            "I" => boundary_i_curve(&p, &ratios),
            "II" => {
                let gbar1: Vec<f64> = (0..=400)
                    .map(|k| 1.0 + 1e-3 + (BOUNDARY_II_MAX_GBAR1 - 1.0 - 1e-3) * k as f64 / 400.0)
                    .collect();
                boundary_ii_curve(&p, &gbar1)
            }
            other => Err(Error::Config(format!(
                "unknown overlay {other:?} (expected lowfreq, I or II)"
            ))),
        })
        .collect()
}

/// One named polyline for [`render_line_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const SERIES_COLORS: [&str; 6] = [
    "#2166ac", "#b2182b", "#1b7837", "#762a83", "#e08214", "#404040",
];

/// Plain line chart: one polyline per series, linear axes spanning the
/// data, legend in the top-right corner. Non-finite points break the line.
pub fn render_line_svg(
    series: &[Series],
    x_title: &str,
    y_title: &str,
    width: u32,
    height: u32,
) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let (w, h) = (width as f64, height as f64);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in 0..5 {
        let f = t as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="middle">{}</text>"#,
            px(xv),
            top + ph + 16.0,
            short(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(yv) + 4.0,
            short(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{x_title}</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.3}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.3})">{y_title}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, series) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &series.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(
                    path,
                    "{}{:.3},{:.3} ",
                    if pen_down { "L" } else { "M" },
                    px(x),
                    py(y)
                );
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = top + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="2"/><text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{}</text>"#,
            left + pw - 30.0,
            left + pw - 10.0,
            left + pw - 36.0,
            ly + 4.0,
            series.label
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{ground_state, TruncationPolicy};
    use crate::model::CouplingUnit;
    use crate::observables::compute_observables;
    use crate::sweep::{run_sweep, Axis, FixedParams, SweepSpec};

    fn small_diagram() -> PhaseDiagram {
        let mut f = FixedParams::new(0.1, 1.0, 0.0);
        f.g2 = "1e-8gt".parse().unwrap();
        let spec = SweepSpec::new(
            Axis::new(AxisParam::G1, 0.0, 2.0, 4).with_unit(CouplingUnit::Gs),
            Some(Axis::new(AxisParam::G2Tilde, -0.5, 0.5, 3).with_unit(CouplingUnit::Gt)),
            f,
        );
        run_sweep(&spec).unwrap()
    }

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            1.0,
            -0.5,
            1e-10,
            1.234_567_890_123_456_7e-300,
            6.02e23,
            0.1 + 0.2,
            -2.5e-7,
        ] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(1e-10), "1e-10");
        assert_eq!(format_number(0.25), "0.25");
    }

    #[test]
    fn csv_round_trip() {
        let d = small_diagram();
        let mut buf = Vec::new();
        let n = write_csv(&d, &mut buf).unwrap();
        assert_eq!(n as usize, buf.len());
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 13);
        let recs = read_csv(buf.as_slice()).unwrap();
        for (rec, row) in recs.iter().zip(&d.rows) {
            let r = row.outcome.as_ref().unwrap();
            assert_eq!(rec.g1, row.params.g1);
            assert_eq!(rec.g2_tilde, row.params.g2_tilde());
            assert_eq!(rec.energy, Some(r.energy));
            assert_eq!(rec.sigma_z, Some(r.observables.sigma_z));
            assert_eq!(rec.p2_ratio, Some(r.observables.p2_ratio));
            assert_eq!(rec.x_tilde_minus, r.observables.x_tilde_minus);
            assert_eq!(
                rec.branch.as_deref(),
                Some(r.branch.as_ref().unwrap().label.as_str())
            );
            assert_eq!(rec.degenerate, Some(r.degenerate));
        }
    }

    #[test]
    fn error_rows_keep_parameters() {
        let spec = SweepSpec::new(
            Axis::new(AxisParam::G2, 0.0, 0.06, 2),
            None,
            FixedParams::new(0.1, 1.0, 0.0),
        );
        let d = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let recs = read_csv(buf.as_slice()).unwrap();
        assert_eq!(recs[0].error, None);
        assert_eq!(recs[1].g2, 0.06);
        assert_eq!(recs[1].energy, None);
        assert!(recs[1]
            .error
            .as_ref()
            .unwrap()
            .contains("spectral collapse"));
    }

    #[test]
    fn colormap_is_piecewise_linear() {
        let dv = Colormap::Diverging;
        assert_eq!(dv.color(-1.0, (-1.0, 1.0)), [33, 102, 172]);
        assert_eq!(dv.color(0.0, (-1.0, 1.0)), [247, 247, 247]);
        assert_eq!(dv.color(1.0, (-1.0, 1.0)), [178, 24, 43]);
        assert_eq!(dv.color(5.0, (-1.0, 1.0)), [178, 24, 43]);
        assert_eq!(dv.color(0.5, (-1.0, 1.0)), lerp(WHITE, RED, 0.5));
        assert_eq!(Colormap::Sequential.color(0.0, (0.0, 2.0)), [255, 255, 255]);
    }

    #[test]
    fn svg_is_deterministic_and_complete() {
        let d = small_diagram();
        let mut style = HeatmapStyle::for_field("sigma_z");
        let p = d.rows[0].params;
        style
            .overlay
            .push(lowfreq_curve(&p, &[-0.5, 0.0, 0.5]).unwrap());
        let a = render_heatmap_svg(&d, "sigma_z", &style).unwrap();
        let b = render_heatmap_svg(&d, "sigma_z", &style).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(r#"xmlns="http://www.w3.org/2000/svg""#));
        // clip, background, frame and color-bar frame besides 64 color-bar steps
        assert_eq!(a.matches("<rect x=").count() - 64 - 4, 12);
        assert!(a.contains("stroke-dasharray"));
        assert!(a.ends_with("</svg>\n"));
        assert!(render_heatmap_svg(&d, "branch", &style).is_err());
    }

    #[test]
    fn non_rectangular_grid() {
        let mut d = small_diagram();
        d.rows.pop();
        assert!(matches!(
            render_heatmap_svg(&d, "sigma_z", &HeatmapStyle::for_field("sigma_z")),
            Err(Error::NonRectangularGrid(_))
        ));
    }

    #[test]
    fn solution_json() {
        let p = ModelParams::new(0.001, 1.0, 0.0, 0.0, 0.0);
        let sol = ground_state(&p, &TruncationPolicy::for_params(&p)).unwrap();
        let obs = compute_observables(&sol, &p).unwrap();
        let mut buf = Vec::new();
        write_solution_json(&sol, &obs, false, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["energy"].as_f64(), Some(sol.energy));
        assert!((v["energy"].as_f64().unwrap() + 0.5).abs() < 1e-12);
        assert!((v["sigma_x"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        assert!(v.get("coeffs").is_none());
        let mut dump = Vec::new();
        write_solution_json(&sol, &obs, true, &mut dump).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&dump).unwrap();
        assert_eq!(
            v["coeffs"].as_array().unwrap().len(),
            2 * (sol.n_max_used + 1)
        );
    }

    #[test]
    fn boundary_csv_has_kind() {
        let p = ModelParams::new(0.001, 1.0, 0.0, 0.0, 1.0);
        let c = lowfreq_curve(&p, &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_boundary_csv(&[c], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].ends_with(",degenerate,kind"));
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with(",lowfreq"));
    }

    #[test]
    fn overlays_by_name() {
        let d = small_diagram();
        let names: Vec<String> = ["lowfreq", "I", "II"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let curves = overlay_curves(&d, &names).unwrap();
        assert_eq!(curves.len(), 3);
        assert!(curves.iter().all(|c| !c.points.is_empty()));
        assert!(overlay_curves(&d, &["III".to_string()]).is_err());
    }

    #[test]
    fn line_chart_paths() {
        let series = vec![
            Series {
                label: "a".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN), (3.0, 0.5)],
            },
            Series {
                label: "b".into(),
                points: vec![(0.0, 0.0), (3.0, 3.0)],
            },
        ];
        let svg = render_line_svg(&series, "x", "y", 400, 300);
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<path").count(), 2);
        // the NaN sample lifts the pen once
        assert_eq!(svg.matches(" M").count() + svg.matches("\"M").count(), 3);
        assert_eq!(svg, render_line_svg(&series, "x", "y", 400, 300));
    }
}
