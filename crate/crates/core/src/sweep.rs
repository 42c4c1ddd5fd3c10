//! Parameter-grid sweeps and transition detection.
//!
//! Grid points are solved independently and collected by grid index, so the
//! output does not depend on the number of worker threads.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eigensolve::{ground_state, TruncationPolicy};
use crate::error::{Error, Result};
use crate::model::{derive_scales, Coupling, CouplingUnit, ModelParams};
use crate::observables::{compute_observables, ObservableSet};
use crate::report::OBSERVABLE_COLUMNS;
use crate::wavefunction::{
    classify_branch_with, evaluate_default, BranchClass, BranchLabel, ClassifierConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    G1,
    /// Bare two-photon coupling.
    G2,
    /// `(1 + χ) g2`; swept at fixed χ.
    G2Tilde,
    Omega,
}

impl AxisParam {
    pub fn label(self) -> &'static str {
        match self {
            AxisParam::G1 => "g1",
            AxisParam::G2 => "g2",
            AxisParam::G2Tilde => "g2_tilde",
            AxisParam::Omega => "omega",
        }
    }

    fn family(self) -> u8 {
        match self {
            AxisParam::G1 => 0,
            AxisParam::G2 | AxisParam::G2Tilde => 1,
            AxisParam::Omega => 2,
        }
    }

    /// Value of this parameter in `p`, in energy units.
    pub fn read(self, p: &ModelParams) -> f64 {
        match self {
            AxisParam::G1 => p.g1,
            AxisParam::G2 => p.g2,
            AxisParam::G2Tilde => p.g2_tilde(),
            AxisParam::Omega => p.omega,
        }
    }

    /// `p` with this parameter set to `value` (energy units).
    pub fn apply(self, p: &ModelParams, value: f64) -> ModelParams {
        match self {
            AxisParam::G1 => p.with_g1(value),
            AxisParam::G2 => p.with_g2(value),
            AxisParam::G2Tilde => p.with_g2_tilde(value),
            AxisParam::Omega => p.with_omega(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisParam,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub scale: AxisScale,
    /// Unit of `min` and `max`, resolved per point.
    #[serde(default)]
    pub unit: CouplingUnit,
}

impl Axis {
    pub fn new(name: AxisParam, min: f64, max: f64, n_points: usize) -> Self {
        Self {
            name,
            min,
            max,
            n_points,
            scale: AxisScale::Linear,
            unit: CouplingUnit::Energy,
        }
    }

    pub fn with_unit(mut self, unit: CouplingUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn with_scale(mut self, scale: AxisScale) -> Self {
        self.scale = scale;
        self
    }

    /// Grid coordinates in the axis unit.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * t,
                    AxisScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Config(format!(
                "axis {} needs at least 2 points",
                self.name.label()
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Config(format!(
                "axis {} has non-finite bounds",
                self.name.label()
            )));
        }
        if self.scale == AxisScale::Log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(Error::Config(format!(
                "log axis {} needs positive bounds",
                self.name.label()
            )));
        }
        if self.name == AxisParam::Omega && self.unit != CouplingUnit::Energy {
            return Err(Error::Config(
                "the omega axis takes plain energy units".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters held fixed across the grid. Couplings may carry `gs`/`gt`
/// units, resolved against each point's frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub omega: f64,
    #[serde(rename = "Omega", default = "unit_omega")]
    pub big_omega: f64,
    #[serde(default)]
    pub g1: Coupling,
    #[serde(default)]
    pub g2: Coupling,
    /// Overrides `g2` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2_tilde: Option<Coupling>,
    #[serde(default)]
    pub chi: f64,
}

fn unit_omega() -> f64 {
    1.0
}

impl FixedParams {
    pub fn new(omega: f64, big_omega: f64, chi: f64) -> Self {
        Self {
            omega,
            big_omega,
            g1: Coupling::default(),
            g2: Coupling::default(),
            g2_tilde: None,
            chi,
        }
    }
}

/// An SVG panel requested alongside the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgRequest {
    pub field: String,
    pub path: String,
    /// Any of `lowfreq`, `I`, `II`.
    #[serde(default)]
    pub overlays: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Vec<SvgRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub fixed: FixedParams,
    /// CSV observable columns to fill; empty means all.
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub policy: Option<TruncationPolicy>,
    #[serde(default = "one_job")]
    pub jobs: usize,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    /// Wave-function grid size used for branch classification.
    #[serde(default = "default_wave_points")]
    pub wave_points: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one_job() -> usize {
    1
}

pub const DEFAULT_WAVE_POINTS: usize = 801;

fn default_wave_points() -> usize {
    DEFAULT_WAVE_POINTS
}

impl SweepSpec {
    pub fn new(axis1: Axis, axis2: Option<Axis>, fixed: FixedParams) -> Self {
        Self {
            axis1,
            axis2,
            fixed,
            observables: Vec::new(),
            policy: None,
            jobs: 1,
            classifier: ClassifierConfig::default(),
            wave_points: DEFAULT_WAVE_POINTS,
            output: OutputSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name.family() == self.axis1.name.family() {
                return Err(Error::Config("axes must sweep distinct parameters".into()));
            }
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.wave_points < crate::wavefunction::MIN_GRID_POINTS {
            return Err(Error::Config("wave_points must be at least 64".into()));
        }
        for name in &self.observables {
            if !OBSERVABLE_COLUMNS.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown observable {name:?}")));
            }
        }
        if let Some(policy) = &self.policy {
            policy
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.n_points, self.axis2.map_or(1, |a| a.n_points))
    }

    pub fn selects(&self, column: &str) -> bool {
        self.observables.is_empty() || self.observables.iter().any(|c| c == column)
    }

    /// Parameters at grid index `(i1, i2)`.
    pub fn point(&self, i1: usize, i2: usize) -> ModelParams {
        let v1 = self.axis1.values()[i1];
        let v2 = self.axis2.map(|a| (a, a.values()[i2]));
        let f = &self.fixed;
        let mut omega = f.omega;
        for (axis, v) in [(self.axis1, v1)].into_iter().chain(v2) {
            if axis.name == AxisParam::Omega {
                omega = v;
            }
        }
        let mut p = ModelParams::new(omega, f.big_omega, 0.0, 0.0, f.chi);
        p = p.with_g1(f.g1.resolve(omega, f.big_omega));
        p = match f.g2_tilde {
            Some(t) => p.with_g2_tilde(t.resolve(omega, f.big_omega)),
            None => p.with_g2(f.g2.resolve(omega, f.big_omega)),
        };
        for (axis, v) in [(self.axis1, v1)].into_iter().chain(v2) {
            if axis.name != AxisParam::Omega {
                let raw = Coupling {
                    value: v,
                    unit: axis.unit,
                }
                .resolve(omega, f.big_omega);
                p = axis.name.apply(&p, raw);
            }
        }
        p
    }
}

/// Solved quantities at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub energy: f64,
    pub gap: f64,
    pub observables: ObservableSet,
    pub branch: Option<BranchClass>,
    pub n_max_used: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub i1: usize,
    pub i2: usize,
    pub params: ModelParams,
    /// Error message for points that could not be solved.
    pub outcome: std::result::Result<PointResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub spec: SweepSpec,
    /// Row-major: `i1` outer, `i2` inner.
    pub rows: Vec<PointRecord>,
}

impl PhaseDiagram {
    pub fn shape(&self) -> (usize, usize) {
        self.spec.shape()
    }

    pub fn get(&self, i1: usize, i2: usize) -> &PointRecord {
        &self.rows[i1 * self.shape().1 + i2]
    }

    pub fn success_fraction(&self) -> f64 {
        let ok = self.rows.iter().filter(|r| r.outcome.is_ok()).count();
        ok as f64 / self.rows.len().max(1) as f64
    }

    /// Points along one axis with the other index held at `line_index`.
    pub fn line(&self, along: Along, line_index: usize) -> Vec<&PointRecord> {
        let (n1, n2) = self.shape();
        match along {
            Along::Axis1 => (0..n1).map(|i| self.get(i, line_index)).collect(),
            Along::Axis2 => (0..n2).map(|j| self.get(line_index, j)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Along {
    Axis1,
    Axis2,
}

/// Ground state, observables and (optionally) the branch label at `p`.
pub fn solve_point(
    p: &ModelParams,
    policy: &TruncationPolicy,
    classify: Option<(&ClassifierConfig, usize)>,
) -> Result<PointResult> {
    let sol = ground_state(p, policy)?;
    let observables = compute_observables(&sol, p)?;
    let branch = match classify {
        Some((cfg, n_points)) => {
            let scales = derive_scales(p)?;
            let grid = evaluate_default(&sol, &scales, n_points)?;
            Some(classify_branch_with(&grid, &scales, cfg))
        }
        None => None,
    };
    Ok(PointResult {
        energy: sol.energy,
        gap: sol.gap,
        observables,
        branch,
        n_max_used: sol.n_max_used,
        degenerate: sol.degenerate,
    })
}

fn map_ordered<T, F>(items: &[(usize, usize)], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            return Ok(pool.install(|| items.par_iter().map(|&(i, j)| f(i, j)).collect()));
        }
    }
    let _ = jobs;
    Ok(items.iter().map(|&(i, j)| f(i, j)).collect())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<PhaseDiagram> {
    spec.validate()?;
    let (n1, n2) = spec.shape();
    let indices: Vec<(usize, usize)> = (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
    let classify = spec.selects("branch");
    let rows = map_ordered(&indices, spec.jobs, |i1, i2| {
        let params = spec.point(i1, i2);
        let policy = spec
            .policy
            .unwrap_or_else(|| TruncationPolicy::for_params(&params));
        let outcome = solve_point(
            &params,
            &policy,
            classify.then_some((&spec.classifier, spec.wave_points)),
        )
        .map_err(|e| e.to_string());
        PointRecord {
            i1,
            i2,
            params,
            outcome,
        }
    })?;
    Ok(PhaseDiagram {
        spec: spec.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    I,
    II,
    LowFreqMerged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    SigmaXSlope,
    BranchChange,
    SigmaZJump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub kind: TransitionKind,
    /// Swept parameter in energy units.
    pub location: f64,
    pub bracket: (f64, f64),
    pub detector: Detector,
    /// Every detector that fired within the merged cell group.
    pub coincident: Vec<Detector>,
}

/// Peak slope must exceed this multiple of the median slope.
pub const SLOPE_PROMINENCE: f64 = 3.0;

/// Adjacent-point change in ⟨σz⟩ that counts as a jump.
pub const SIGMA_Z_JUMP: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
struct Detection {
    kind: TransitionKind,
    location: f64,
    bracket: (f64, f64),
    detector: Detector,
    strength: f64,
}

fn branch_kind(a: BranchLabel, b: BranchLabel) -> Option<TransitionKind> {
    use BranchLabel::*;
    match (a, b) {
        (Single, Double) | (Double, Single) => Some(TransitionKind::I),
        (Double, Broken) | (Broken, Double) => Some(TransitionKind::II),
        (Single, Broken) | (Broken, Single) => Some(TransitionKind::LowFreqMerged),
        _ => None,
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Location of the largest central-difference slope `|Δy/Δx|` when it is an
/// interior local maximum exceeding `SLOPE_PROMINENCE` times the median.
/// Returns `(location, bracket, peak slope)`.
pub fn slope_peak(xs: &[f64], ys: &[f64]) -> Option<(f64, (f64, f64), f64)> {
    slope_peak_above(xs, ys, SLOPE_PROMINENCE)
}

fn slope_peak_above(xs: &[f64], ys: &[f64], prominence: f64) -> Option<(f64, (f64, f64), f64)> {
    let n = xs.len();
    if n < 5 {
        return None;
    }
    // slopes[k] belongs to xs[k + 1]
    let slopes: Vec<f64> = (1..n - 1)
        .map(|i| ((ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1])).abs())
        .collect();
    let (k, &peak) = slopes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    if k == 0 || k + 1 == slopes.len() || !(peak > prominence * median(&slopes)) {
        return None;
    }
    let i = k + 1;
    let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
    let (s0, s1, s2) = (slopes[k - 1], slopes[k], slopes[k + 1]);
    // vertex of the parabola through the three slope samples
    let num = (x1 - x0).powi(2) * (s1 - s2) - (x1 - x2).powi(2) * (s1 - s0);
    let den = (x1 - x0) * (s1 - s2) - (x1 - x2) * (s1 - s0);
    let mut loc = if den != 0.0 { x1 - 0.5 * num / den } else { x1 };
    let margin = 1e-9 * (x2 - x0);
    if !(loc > x0 + margin && loc < x2 - margin) {
        loc = x1;
    }
    Some((loc, (x0, x2), peak))
}

/// Transitions along one line of a diagram. Detections closer than one grid
/// cell are merged; a branch change decides the kind when present.
pub fn detect_transitions(
    d: &PhaseDiagram,
    along: Along,
    line_index: usize,
) -> Vec<TransitionPoint> {
    let axis = match along {
        Along::Axis1 => d.spec.axis1,
        Along::Axis2 => match d.spec.axis2 {
            Some(a) => a,
            None => return Vec::new(),
        },
    };
    let points: Vec<(f64, &PointResult)> = d
        .line(along, line_index)
        .into_iter()
        .filter_map(|r| {
            r.outcome
                .as_ref()
                .ok()
                .map(|o| (axis.name.read(&r.params), o))
        })
        .collect();
    detect_in_line(&points)
}

/// Same as [`detect_transitions`] on an explicit `(coordinate, result)` line.
pub fn detect_in_line(points: &[(f64, &PointResult)]) -> Vec<TransitionPoint> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let sx: Vec<f64> = points.iter().map(|p| p.1.observables.sigma_x).collect();
    let mut found: Vec<Detection> = Vec::new();

    if let Some((loc, bracket, peak)) = slope_peak(&xs, &sx) {
        found.push(Detection {
            kind: TransitionKind::I,
            location: loc,
            bracket,
            detector: Detector::SigmaXSlope,
            strength: peak,
        });
    }
    for i in 0..n - 1 {
        let (a, b) = (points[i].1, points[i + 1].1);
        let mid = 0.5 * (xs[i] + xs[i + 1]);
        let dz = (b.observables.sigma_z - a.observables.sigma_z).abs();
        if dz > SIGMA_Z_JUMP {
            found.push(Detection {
                kind: TransitionKind::II,
                location: mid,
                bracket: (xs[i], xs[i + 1]),
                detector: Detector::SigmaZJump,
                strength: dz,
            });
        }
        if let (Some(ba), Some(bb)) = (&a.branch, &b.branch) {
            if let Some(kind) = branch_kind(ba.label, bb.label) {
                found.push(Detection {
                    kind,
                    location: mid,
                    bracket: (xs[i], xs[i + 1]),
                    detector: Detector::BranchChange,
                    strength: 1.0,
                });
            }
        }
    }
    found.sort_by(|a, b| a.location.total_cmp(&b.location));

    let cell = xs
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let mut groups: Vec<Vec<Detection>> = Vec::new();
    for det in found {
        match groups.last_mut() {
            Some(g) if det.location - g.last().unwrap().location <= cell * (1.0 + 1e-9) => {
                g.push(det)
            }
            _ => groups.push(vec![det]),
        }
    }
    // A line crosses each boundary once, so neighbouring points of the same
    // kind describe one boundary seen by different detectors.
    let mut out: Vec<TransitionPoint> = Vec::new();
    for t in groups.into_iter().map(|g| merge_group(&g)) {
        match out.last_mut() {
            Some(last) if last.kind == t.kind => {
                let mut coincident = last.coincident.clone();
                for d in &t.coincident {
                    if !coincident.contains(d) {
                        coincident.push(*d);
                    }
                }
                if location_priority(t.kind, t.detector)
                    > location_priority(last.kind, last.detector)
                {
                    *last = t;
                }
                last.coincident = coincident;
            }
            _ => out.push(t),
        }
    }
    out
}

/// Which detector places a boundary of the given kind: ⟨σx⟩ for I, the
/// branch label otherwise.
fn location_priority(kind: TransitionKind, detector: Detector) -> u8 {
    match (kind, detector) {
        (TransitionKind::I, Detector::SigmaXSlope) => 2,
        (TransitionKind::I, _) => 1,
        (_, Detector::BranchChange) => 2,
        (_, Detector::SigmaZJump) => 1,
        (_, Detector::SigmaXSlope) => 0,
    }
}

fn merge_group(g: &[Detection]) -> TransitionPoint {
    let mut coincident: Vec<Detector> = Vec::new();
    for d in g {
        if !coincident.contains(&d.detector) {
            coincident.push(d.detector);
        }
    }
    let branch: Vec<&Detection> = g
        .iter()
        .filter(|d| d.detector == Detector::BranchChange)
        .collect();
    let strongest = |det: Detector| {
        g.iter()
            .filter(|d| d.detector == det)
            .max_by(|a, b| a.strength.total_cmp(&b.strength))
    };
    let (lead, kind) = if let Some(first) = branch.first() {
        let kinds: Vec<TransitionKind> = branch.iter().map(|d| d.kind).collect();
        let kind = if kinds.contains(&TransitionKind::LowFreqMerged)
            || (kinds.contains(&TransitionKind::I) && kinds.contains(&TransitionKind::II))
        {
            TransitionKind::LowFreqMerged
        } else {
            first.kind
        };
        (**first, kind)
    } else if let Some(z) = strongest(Detector::SigmaZJump) {
        let kind = if coincident.contains(&Detector::SigmaXSlope) {
            TransitionKind::LowFreqMerged
        } else {
            TransitionKind::II
        };
        (*z, kind)
    } else {
        (g[0], g[0].kind)
    };
    TransitionPoint {
        kind,
        location: lead.location,
        bracket: lead.bracket,
        detector: lead.detector,
        coincident,
    }
}

/// Knobs for [`locate_boundary_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateOptions {
    /// `|⟨σz⟩|` above this counts as symmetry broken.
    pub sigma_z_threshold: f64,
    pub classifier: ClassifierConfig,
    pub wave_points: usize,
    pub policy: Option<TruncationPolicy>,
    /// Coarse samples used to isolate the slope peak before refinement.
    pub slope_scan_points: usize,
    pub max_iterations: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self {
            sigma_z_threshold: 0.05,
            classifier: ClassifierConfig::default(),
            wave_points: DEFAULT_WAVE_POINTS,
            policy: None,
            slope_scan_points: 21,
            max_iterations: 60,
        }
    }
}

pub fn locate_boundary(
    p_base: &ModelParams,
    swept: AxisParam,
    bracket: (f64, f64),
    detector: Detector,
    tol: f64,
) -> Result<TransitionPoint> {
    locate_boundary_with(
        p_base,
        swept,
        bracket,
        detector,
        tol,
        &LocateOptions::default(),
    )
}

fn point_result(p: &ModelParams, opts: &LocateOptions, classify: bool) -> Result<PointResult> {
    let policy = opts
        .policy
        .unwrap_or_else(|| TruncationPolicy::for_params(p));
    solve_point(
        p,
        &policy,
        classify.then_some((&opts.classifier, opts.wave_points)),
    )
}

/// Refines a transition inside `bracket` (energy units of `swept`) to a
/// width of at most `tol`.
///
/// `SigmaZJump` bisects on `|⟨σz⟩| > sigma_z_threshold`, `BranchChange` on
/// the branch label; `SigmaXSlope` maximizes `|∂⟨σx⟩/∂x|` by golden-section
/// search after a coarse scan.
pub fn locate_boundary_with(
    p_base: &ModelParams,
    swept: AxisParam,
    bracket: (f64, f64),
    detector: Detector,
    tol: f64,
    opts: &LocateOptions,
) -> Result<TransitionPoint> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bracket ({lo}, {hi}) and tolerance {tol} must be ordered and positive"
        )));
    }
    let at = |v: f64| swept.apply(p_base, v);
    match detector {
        Detector::SigmaXSlope => return locate_slope_peak(p_base, swept, bracket, tol, opts),
        Detector::SigmaZJump => {
            let broken = |v: f64| -> Result<bool> {
                Ok(point_result(&at(v), opts, false)?.observables.sigma_z.abs()
                    > opts.sigma_z_threshold)
            };
            let lo_state = broken(lo)?;
            if lo_state == broken(hi)? {
                return Err(Error::NoSignChange);
            }
            for _ in 0..opts.max_iterations {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if broken(mid)? == lo_state {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(TransitionPoint {
                kind: TransitionKind::II,
                location: 0.5 * (lo + hi),
                bracket: (lo, hi),
                detector,
                coincident: vec![detector],
            })
        }
        Detector::BranchChange => {
            let label = |v: f64| -> Result<BranchLabel> {
                Ok(point_result(&at(v), opts, true)?
                    .branch
                    .map(|b| b.label)
                    .unwrap_or(BranchLabel::Single))
            };
            let lo_label = label(lo)?;
            let mut hi_label = label(hi)?;
            if lo_label == hi_label {
                return Err(Error::NoSignChange);
            }
            for _ in 0..opts.max_iterations {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let m = label(mid)?;
                if m == lo_label {
                    lo = mid;
                } else {
                    hi = mid;
                    hi_label = m;
                }
            }
            let kind = branch_kind(lo_label, hi_label).unwrap_or(TransitionKind::I);
            Ok(TransitionPoint {
                kind,
                location: 0.5 * (lo + hi),
                bracket: (lo, hi),
                detector,
                coincident: vec![detector],
            })
        }
    }
}

fn locate_slope_peak(
    p_base: &ModelParams,
    swept: AxisParam,
    bracket: (f64, f64),
    tol: f64,
    opts: &LocateOptions,
) -> Result<TransitionPoint> {
    let sigma_x = |v: f64| -> Result<f64> {
        Ok(point_result(&swept.apply(p_base, v), opts, false)?
            .observables
            .sigma_x)
    };
    let n = opts.slope_scan_points.max(5);
    let (a, b) = bracket;
    let xs: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    let ys = xs.iter().map(|&x| sigma_x(x)).collect::<Result<Vec<_>>>()?;
    // inside a user bracket any interior maximum counts; a kink-shaped
    // response has no prominent peak but still a well-defined onset
    let (_, (mut lo, mut hi), _) = slope_peak_above(&xs, &ys, 1.0).ok_or(Error::NoSignChange)?;

    let h = (0.25 * tol).max(1e-9 * (b - a));
    let slope =
        |v: f64| -> Result<f64> { Ok(((sigma_x(v + h)? - sigma_x(v - h)?) / (2.0 * h)).abs()) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (slope(c)?, slope(d)?);
    for _ in 0..opts.max_iterations {
        if hi - lo <= tol {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = slope(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = slope(d)?;
        }
    }
    Ok(TransitionPoint {
        kind: TransitionKind::I,
        location: 0.5 * (lo + hi),
        bracket: (lo, hi),
        detector: Detector::SigmaXSlope,
        coincident: vec![Detector::SigmaXSlope],
    })
}

/// Observables on either side of a ⟨σz⟩ jump along g1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasurement {
    pub location: f64,
    pub before: ObservableSet,
    pub after: ObservableSet,
}

impl JumpMeasurement {
    pub fn sigma_x_jump(&self) -> f64 {
        self.after.sigma_x - self.before.sigma_x
    }

    pub fn sigma_z_jump(&self) -> f64 {
        self.after.sigma_z - self.before.sigma_z
    }
}

/// Locates the ⟨σz⟩ jump in `g1_bracket` to width `tol` and evaluates the
/// observables `step` outside each end of the final bracket. At finite
/// frequency the jump is smoothed over a window, so `step` should clear it.
pub fn measure_jump(
    p_base: &ModelParams,
    g1_bracket: (f64, f64),
    tol: f64,
    step: f64,
) -> Result<JumpMeasurement> {
    let t = locate_boundary(p_base, AxisParam::G1, g1_bracket, Detector::SigmaZJump, tol)?;
    let opts = LocateOptions::default();
    let side = |g1: f64| -> Result<ObservableSet> {
        Ok(point_result(&p_base.with_g1(g1), &opts, false)?.observables)
    };
    Ok(JumpMeasurement {
        location: t.location,
        before: side(t.bracket.0 - step)?,
        after: side(t.bracket.1 + step)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriplePoint {
    pub g1_star: f64,
    /// `g2~` at the merge point.
    pub g2_star: f64,
    /// Half-widths of the bracketing intervals in g1 and g2~.
    pub uncertainty: (f64, f64),
}

/// Number of g1 samples per line in [`estimate_triple_point`].
pub const TRIPLE_LINE_POINTS: usize = 41;
const TRIPLE_LEVELS: usize = 13;
const TRIPLE_REFINEMENTS: usize = 8;

/// Separation of boundaries I and II along g1 at fixed `g2~`; `None` when
/// they coincide within `tol`.
fn boundary_separation(
    p_base: &ModelParams,
    g2_tilde: f64,
    g1_range: (f64, f64),
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let p = p_base.with_g2_tilde(g2_tilde);
    let spec = SweepSpec::new(
        Axis::new(AxisParam::G1, g1_range.0, g1_range.1, TRIPLE_LINE_POINTS),
        None,
        FixedParams {
            g2_tilde: Some(Coupling::energy(g2_tilde)),
            ..FixedParams::new(p.omega, p.big_omega, p.chi)
        },
    );
    let d = run_sweep(&spec)?;
    let found = detect_transitions(&d, Along::Axis1, 0);
    let first = |k: TransitionKind| found.iter().find(|t| t.kind == k).map(|t| t.location);
    Ok(
        match (first(TransitionKind::I), first(TransitionKind::II)) {
            (Some(a), Some(b)) if (b - a).abs() > tol => Some((a, b)),
            (Some(a), None) if first(TransitionKind::LowFreqMerged).is_none() => {
                Some((a, f64::NAN))
            }
            _ => None,
        },
    )
}

/// Descends in `g2~` from `g2_range.1` and returns the smallest value at
/// which boundaries I and II still coincide along g1 within `tol`.
pub fn estimate_triple_point(
    p_base: &ModelParams,
    g1_range: (f64, f64),
    g2_range: (f64, f64),
    tol: f64,
) -> Result<TriplePoint> {
    let (g1_lo, g1_hi) = g1_range;
    let (g2_lo, g2_hi) = g2_range;
    if !(g1_hi > g1_lo) || !(g2_hi > g2_lo) || !(g2_lo > 0.0) {
        return Err(Error::InvalidParams(
            "ranges must be ordered and the g2~ range positive".into(),
        ));
    }
    if tol >= g1_hi - g1_lo {
        return Err(Error::NotFound(format!(
            "tolerance {tol} is wider than the g1 range"
        )));
    }
    let merged_at =
        |g2: f64| -> Result<bool> { Ok(boundary_separation(p_base, g2, g1_range, tol)?.is_none()) };
    let ratio = (g2_lo / g2_hi).powf(1.0 / (TRIPLE_LEVELS - 1) as f64);
    let mut coincident = g2_hi;
    if !merged_at(coincident)? {
        return Err(Error::NotFound(
            "boundaries are already separate at the top of the g2~ range".into(),
        ));
    }
    let mut separated = None;
    for k in 1..TRIPLE_LEVELS {
        let g2 = g2_hi * ratio.powi(k as i32);
        if merged_at(g2)? {
            coincident = g2;
        } else {
            separated = Some(g2);
            break;
        }
    }
    let Some(mut sep) = separated else {
        return Err(Error::NotFound(
            "boundaries coincide down to the bottom of the g2~ range".into(),
        ));
    };
    for _ in 0..TRIPLE_REFINEMENTS {
        let mid = (coincident * sep).sqrt();
        if merged_at(mid)? {
            coincident = mid;
        } else {
            sep = mid;
        }
    }
    // g1 of the merged transition at the estimate
    let p = p_base.with_g2_tilde(coincident);
    let spec = SweepSpec::new(
        Axis::new(AxisParam::G1, g1_lo, g1_hi, TRIPLE_LINE_POINTS),
        None,
        FixedParams {
            g2_tilde: Some(Coupling::energy(coincident)),
            ..FixedParams::new(p.omega, p.big_omega, p.chi)
        },
    );
    let d = run_sweep(&spec)?;
    let found = detect_transitions(&d, Along::Axis1, 0);
    let at = found
        .iter()
        .find(|t| t.kind != TransitionKind::I)
        .or(found.first())
        .ok_or_else(|| Error::NotFound("no transition on the merge line".into()))?;
    let cell = (g1_hi - g1_lo) / (TRIPLE_LINE_POINTS - 1) as f64;
    Ok(TriplePoint {
        g1_star: at.location,
        g2_star: coincident,
        uncertainty: (cell, (coincident - sep) / 2.0),
    })
}
