//! Real-space spin components and branch classification.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::default_half_width;
use crate::eigensolve::GroundSolution;
use crate::error::{Error, Result};
use crate::model::DerivedScales;

pub const MIN_GRID_POINTS: usize = 64;

/// Allowed deviation of the grid norm from 1 before the grid is rejected.
pub const NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    pub x: Vec<f64>,
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
    pub dx: f64,
}

impl WaveGrid {
    pub fn density(&self) -> Vec<f64> {
        self.psi_plus
            .iter()
            .zip(&self.psi_minus)
            .map(|(a, b)| a * a + b * b)
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.dx
    }
}

/// `(x_min, x_max)` spanning both potential minima.
pub fn default_range(scales: &DerivedScales) -> (f64, f64) {
    let h = default_half_width(scales);
    (-h, h)
}

// Rescale whenever a running value leaves [2^-RESCALE_BITS, 2^RESCALE_BITS].
const RESCALE_BITS: i32 = 400;

/// `π^{-1/4} e^{-x²/2}` as `(mantissa, exponent)` with value `m·2^e`.
fn ground_hermite(x: f64) -> (f64, i32) {
    let log2 = -x * x / (2.0 * std::f64::consts::LN_2);
    let e = log2.floor();
    let m = (log2 - e).exp2() * std::f64::consts::PI.powf(-0.25);
    (m, e as i32)
}

fn pow2(e: i32) -> f64 {
    // exp2 saturates cleanly to 0 or inf outside the representable range
    (e as f64).exp2()
}

/// Evaluates `Σ_n a_n φ_n(x)` and `Σ_n b_n φ_n(x)` at one point.
fn hermite_sums(x: f64, a: &[f64], b: &[f64]) -> (f64, f64) {
    let (mut cur, mut exp) = ground_hermite(x);
    let mut prev = 0.0;
    let mut sa = a[0] * cur;
    let mut sb = b[0] * cur;
    for n in 1..a.len() {
        let nf = n as f64;
        let next = x * (2.0 / nf).sqrt() * cur - ((nf - 1.0) / nf).sqrt() * prev;
        prev = cur;
        cur = next;
        sa += a[n] * cur;
        sb += b[n] * cur;
        let mag = cur.abs().max(prev.abs());
        if mag > pow2(RESCALE_BITS) || (mag < pow2(-RESCALE_BITS) && mag > 0.0) {
            let k = mag.log2().floor() as i32;
            let f = pow2(-k);
            cur *= f;
            prev *= f;
            sa *= f;
            sb *= f;
            exp += k;
        }
    }
    let f = pow2(exp);
    (sa * f, sb * f)
}

/// Normalized Hermite functions `φ_0..=φ_n_max` at `x`, each scaled back to
/// plain doubles (underflowed entries are 0).
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut cur, mut exp) = ground_hermite(x);
    let mut prev = 0.0;
    out.push(cur * pow2(exp));
    for n in 1..=n_max {
        let nf = n as f64;
        let next = x * (2.0 / nf).sqrt() * cur - ((nf - 1.0) / nf).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > pow2(RESCALE_BITS) || (mag < pow2(-RESCALE_BITS) && mag > 0.0) {
            let k = mag.log2().floor() as i32;
            cur *= pow2(-k);
            prev *= pow2(-k);
            exp += k;
        }
        out.push(cur * pow2(exp));
    }
    out
}

/// Spin components `ψ_s(x) = Σ_n c(n, s) φ_n(x)` on a uniform grid.
pub fn evaluate_wavefunction(
    sol: &GroundSolution,
    x_min: f64,
    x_max: f64,
    n_points: usize,
) -> Result<WaveGrid> {
    if n_points < MIN_GRID_POINTS {
        return Err(Error::InvalidParams(format!(
            "n_points = {n_points} is below {MIN_GRID_POINTS}"
        )));
    }
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidParams(format!(
            "grid range [{x_min}, {x_max}] is empty"
        )));
    }
    let up: Vec<f64> = sol.coeffs.iter().step_by(2).copied().collect();
    let down: Vec<f64> = sol.coeffs.iter().skip(1).step_by(2).copied().collect();
    let dx = (x_max - x_min) / (n_points - 1) as f64;
    let x: Vec<f64> = (0..n_points).map(|i| x_min + dx * i as f64).collect();
    let (psi_plus, psi_minus) = x.iter().map(|&xi| hermite_sums(xi, &up, &down)).unzip();
    let grid = WaveGrid {
        x,
        psi_plus,
        psi_minus,
        dx,
    };
    let norm = grid.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::GridTooCoarse { norm });
    }
    Ok(grid)
}

/// Same as [`evaluate_wavefunction`] on the default range.
pub fn evaluate_default(
    sol: &GroundSolution,
    scales: &DerivedScales,
    n_points: usize,
) -> Result<WaveGrid> {
    let (lo, hi) = default_range(scales);
    evaluate_wavefunction(sol, lo, hi, n_points)
}

/// Writes `x, psi_plus, psi_minus, density` with six significant digits.
pub fn write_wavefunction_csv<W: Write>(grid: &WaveGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "psi_plus", "psi_minus", "density"])?;
    for (i, rho) in grid.density().into_iter().enumerate() {
        w.write_record([
            sig6(grid.x[i]),
            sig6(grid.psi_plus[i]),
            sig6(grid.psi_minus[i]),
            sig6(rho),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-4..1e6).contains(&a) {
        let digits = 5 - a.log10().floor() as i32;
        let s = format!("{:.*}", digits.max(0) as usize, v);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.5e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchLabel {
    Single,
    Double,
    Broken,
}

impl BranchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Single => "single",
            BranchLabel::Double => "double",
            BranchLabel::Broken => "broken",
        }
    }
}

impl std::fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BranchLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(BranchLabel::Single),
            "double" => Ok(BranchLabel::Double),
            "broken" => Ok(BranchLabel::Broken),
            other => Err(Error::InvalidParams(format!(
                "unknown branch label {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchClass {
    pub label: BranchLabel,
    pub peak_count: usize,
    /// `(W_R − W_L) / (W_R + W_L)`
    pub asymmetry: f64,
    pub peak_positions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Peaks lower than this fraction of the maximum density are ignored.
    pub peak_height: f64,
    /// Minimum distance between two counted peaks.
    pub peak_separation: f64,
    /// Minority-side mass required for a double branch.
    pub minority_mass: f64,
    pub asymmetry: f64,
    /// Dominant peak must sit at least this fraction of `max(1, min|x0|)`
    /// away from the origin for a broken branch.
    pub displacement: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            peak_height: 0.05,
            peak_separation: 2.0,
            minority_mass: 0.2,
            asymmetry: 0.6,
            displacement: 0.3,
        }
    }
}

pub fn classify_branch(grid: &WaveGrid, scales: &DerivedScales) -> BranchClass {
    classify_branch_with(grid, scales, &ClassifierConfig::default())
}

pub fn classify_branch_with(
    grid: &WaveGrid,
    scales: &DerivedScales,
    cfg: &ClassifierConfig,
) -> BranchClass {
    let rho = grid.density();
    let n = rho.len();
    let top = rho.iter().copied().fold(0.0, f64::max);

    // local maxima, tallest first, thinned by separation
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let l = if i == 0 {
                f64::NEG_INFINITY
            } else {
                rho[i - 1]
            };
            let r = if i + 1 == n {
                f64::NEG_INFINITY
            } else {
                rho[i + 1]
            };
            rho[i] >= cfg.peak_height * top && rho[i] > 0.0 && rho[i] >= l && rho[i] > r
        })
        .collect();
    candidates.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    let mut peaks: Vec<usize> = Vec::new();
    for i in candidates {
        if peaks
            .iter()
            .all(|&j| (grid.x[i] - grid.x[j]).abs() >= cfg.peak_separation)
        {
            peaks.push(i);
        }
    }

    let (mut w_left, mut w_right) = (0.0, 0.0);
    for (xi, r) in grid.x.iter().zip(&rho) {
        if *xi < 0.0 {
            w_left += r;
        } else if *xi > 0.0 {
            w_right += r;
        } else {
            w_left += r / 2.0;
            w_right += r / 2.0;
        }
    }
    let total = w_left + w_right;
    let asymmetry = if total > 0.0 {
        (w_right - w_left) / total
    } else {
        0.0
    };
    let minority = if total > 0.0 {
        w_left.min(w_right) / total
    } else {
        0.0
    };

    let dominant = peaks.first().map(|&i| grid.x[i]).unwrap_or(0.0);
    let reach = cfg.displacement * scales.x0_plus.abs().min(scales.x0_minus.abs()).max(1.0);
    let label = if peaks.len() >= 2 && minority >= cfg.minority_mass {
        BranchLabel::Double
    } else if asymmetry.abs() >= cfg.asymmetry && dominant.abs() >= reach {
        BranchLabel::Broken
    } else {
        BranchLabel::Single
    };
    let mut peak_positions: Vec<f64> = peaks.iter().map(|&i| grid.x[i]).collect();
    peak_positions.sort_by(f64::total_cmp);
    BranchClass {
        label,
        peak_count: peaks.len(),
        asymmetry,
        peak_positions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{ground_state, TruncationPolicy};
    use crate::model::{derive_scales, ModelParams};

    fn params(omega: f64, gbar1: f64, gbar2: f64) -> ModelParams {
        let base = ModelParams::new(omega, 1.0, 0.0, 0.0, 0.0);
        base.with_g1(gbar1 * base.g_s())
            .with_g2_tilde(gbar2 * base.g_t())
    }

    fn solve_grid(p: &ModelParams) -> (WaveGrid, DerivedScales) {
        let sol = ground_state(p, &TruncationPolicy::for_params(p)).unwrap();
        let s = derive_scales(p).unwrap();
        (evaluate_default(&sol, &s, 1601).unwrap(), s)
    }

    #[test]
    fn hermite_orthonormality() {
        let (lo, hi, n) = (-30.0, 30.0, 6001);
        let dx = (hi - lo) / (n - 1) as f64;
        let table: Vec<Vec<f64>> = (0..n)
            .map(|i| hermite_functions(lo + dx * i as f64, 200))
            .collect();
        for m in [0usize, 1, 7, 50, 120, 199, 200] {
            for k in [0usize, 1, 8, 50, 121, 200] {
                let s: f64 = table.iter().map(|row| row[m] * row[k]).sum::<f64>() * dx;
                let expected = if m == k { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-8, "<{m}|{k}> = {s}");
            }
        }
    }

    #[test]
    fn hermite_far_tail_is_finite() {
        let phi = hermite_functions(60.0, 4000);
        assert!(phi.iter().all(|v| v.is_finite()));
        assert_eq!(phi[0], 0.0);
        // φ_n peaks near x = √(2n), so n ≈ 1800 is significant at x = 60
        assert!(phi[1800].abs() > 1e-3);
    }

    #[test]
    fn vacuum_components() {
        let (g, s) = solve_grid(&params(0.1, 0.0, 0.0));
        let pi4 = std::f64::consts::PI.powf(-0.25);
        for i in (0..g.x.len()).step_by(97) {
            let gauss = pi4 * (-g.x[i] * g.x[i] / 2.0).exp() / std::f64::consts::SQRT_2;
            assert!((g.psi_plus[i].abs() - gauss).abs() < 1e-12);
            assert!((g.psi_plus[i] + g.psi_minus[i]).abs() < 1e-12);
        }
        assert!((g.norm() - 1.0).abs() < 1e-6);
        let c = classify_branch(&g, &s);
        assert_eq!(c.label, BranchLabel::Single);
        assert_eq!(c.peak_count, 1);
        assert!(c.asymmetry.abs() < 1e-12);
        assert!(c.peak_positions[0].abs() < g.dx);
    }

    #[test]
    fn rejects_short_grid() {
        let p = params(0.1, 0.0, 0.0);
        let sol = ground_state(&p, &TruncationPolicy::default()).unwrap();
        assert!(evaluate_wavefunction(&sol, -5.0, 5.0, 10).is_err());
        assert!(matches!(
            evaluate_wavefunction(&sol, -0.5, 0.5, 100),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn symmetric_doublet_and_broken_branches() {
        let (g, s) = solve_grid(&params(0.001, 1.5, 0.0));
        let n = g.x.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert!((g.psi_plus[i].abs() - g.psi_minus[j].abs()).abs() < 1e-9);
        }
        assert_eq!(classify_branch(&g, &s).label, BranchLabel::Double);

        for sign in [1.0, -1.0] {
            let (g, s) = solve_grid(&params(0.001, 1.5, sign * 1e-10));
            let c = classify_branch(&g, &s);
            assert_eq!(c.label, BranchLabel::Broken);
            // spin down dominates for g2 > 0 and its well lies at x > 0
            assert!(c.asymmetry * sign > 0.6);
        }
    }

    fn two_gaussians(a: f64, wa: f64, b: f64, wb: f64) -> WaveGrid {
        let n = 801;
        let dx = 40.0 / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| -20.0 + dx * i as f64).collect();
        let amp = |x: f64, c: f64, w: f64| {
            w.sqrt() * (-(x - c).powi(2) / 2.0).exp() * std::f64::consts::PI.powf(-0.25)
        };
        let psi_plus = x.iter().map(|&xi| amp(xi, a, wa)).collect();
        let psi_minus = x.iter().map(|&xi| amp(xi, b, wb)).collect();
        WaveGrid {
            x,
            psi_plus,
            psi_minus,
            dx,
        }
    }

    fn mirrored(g: &WaveGrid) -> WaveGrid {
        let mut m = g.clone();
        m.psi_plus.reverse();
        m.psi_minus.reverse();
        m
    }

    #[test]
    fn mirror_invariance() {
        let s = derive_scales(&params(0.01, 1.5, 0.01)).unwrap();
        for (a, wa, b, wb) in [
            (-6.0, 0.5, 6.0, 0.5),
            (-6.0, 0.05, 7.0, 0.95),
            (-5.0, 0.3, 8.0, 0.7),
            (0.0, 0.5, 0.0, 0.5),
        ] {
            let g = two_gaussians(a, wa, b, wb);
            let c = classify_branch(&g, &s);
            let cm = classify_branch(&mirrored(&g), &s);
            assert_eq!(c.label, cm.label);
            assert_eq!(c.peak_count, cm.peak_count);
            assert!((c.asymmetry + cm.asymmetry).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_header_and_six_digits() {
        let (g, _) = solve_grid(&params(0.1, 0.0, 0.0));
        let mut buf = Vec::new();
        write_wavefunction_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,psi_plus,psi_minus,density"));
        assert_eq!(text.lines().count(), g.x.len() + 1);
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(-12345.678), "-12345.7");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(1.234567e-9), "1.23457e-9");
    }
}
