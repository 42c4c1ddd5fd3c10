//! Closed-form results of the displaced-oscillator picture: effective
//! potentials, the semiclassical ground energy, the three transition
//! boundaries and the jump magnitudes at the low-frequency boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_scales, validate, DerivedScales, ModelParams, SpinBranch};

/// Decay constant closing the double→broken boundary estimate.
pub const DELTA_C: f64 = 0.367_879_441_171_442_33; // e^-1

/// Number of scan points used before golden-section refinement.
pub const SEMICLASSICAL_SCAN_POINTS: usize = 2001;

/// Largest g1/g_s for which [`boundary_ii`] is evaluated.
pub const BOUNDARY_II_MAX_GBAR1: f64 = 4.0;

/// Spin-resolved effective potentials at one point, in units of ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotential {
    pub v_plus: f64,
    pub v_minus: f64,
}

/// Harmonic part `m ϖ² (x − x0)² / 2` of the potential for one spin.
pub fn harmonic_part(scales: &DerivedScales, branch: SpinBranch, x: f64) -> f64 {
    let dx = x - scales.x0(branch);
    scales.stiffness(branch) * dx * dx / 2.0
}

/// `v±(x) = m± ϖ±² (x − x0,±)² / 2 + b±`.
pub fn effective_potential(p: &ModelParams, x: f64) -> Result<EffectivePotential> {
    let scales = derive_scales(p)?;
    if scales.g2_tilde_prime.abs() >= 1.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(potential_from_scales(&scales, x))
}

pub(crate) fn potential_from_scales(scales: &DerivedScales, x: f64) -> EffectivePotential {
    EffectivePotential {
        v_plus: harmonic_part(scales, SpinBranch::Plus, x) + scales.bias_plus,
        v_minus: harmonic_part(scales, SpinBranch::Minus, x) + scales.bias_minus,
    }
}

/// Lower eigenvalue of the 2×2 adiabatic matrix
/// `[[ω v+ + ε0, Ω/2], [Ω/2, ω v− + ε0]]` at displacement `x`.
pub fn adiabatic_lower(p: &ModelParams, scales: &DerivedScales, x: f64) -> f64 {
    let v = potential_from_scales(scales, x);
    let a = p.omega * v.v_plus + scales.eps0;
    let b = p.omega * v.v_minus + scales.eps0;
    let half_diff = (a - b) / 2.0;
    (a + b) / 2.0 - (half_diff * half_diff + p.big_omega * p.big_omega / 4.0).sqrt()
}

/// Result of minimizing the lower adiabatic surface over `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalMinimum {
    pub energy: f64,
    /// Location of the global minimum; the `x >= 0` one when the two wells
    /// are mirror images.
    pub x_star: f64,
    /// True when the surface has two distinct local minima.
    pub double_well: bool,
}

/// Half-width of the default displacement window, `max(8, 1.3 max|x0,±| + 8)`.
pub fn default_half_width(scales: &DerivedScales) -> f64 {
    (1.3 * scales.x0_max() + 8.0).max(8.0)
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Semiclassical (`p² → 0`) ground energy. A lower bound on the exact
/// ground energy, used to place the eigensolver shift.
pub fn semiclassical_energy(p: &ModelParams) -> Result<SemiclassicalMinimum> {
    validate(p)?;
    let scales = derive_scales(p)?;
    let half = default_half_width(&scales);
    let n = SEMICLASSICAL_SCAN_POINTS;
    let step = 2.0 * half / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half + step * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| adiabatic_lower(p, &scales, x)).collect();
    let f = |x: f64| adiabatic_lower(p, &scales, x);

    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::INFINITY } else { ys[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { ys[i + 1] };
        if ys[i] <= left && ys[i] < right || ys[i] < left && ys[i] <= right {
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(n - 1)];
            let (x, y) = golden_section(f, lo, hi, 1e-12);
            let (x, y) = if y <= ys[i] { (x, y) } else { (xs[i], ys[i]) };
            if !minima.iter().any(|&(xm, _)| (xm - x).abs() < 2.0 * step) {
                minima.push((x, y));
            }
        }
    }
    let (mut x_star, energy) =
        minima.iter().copied().fold(
            (0.0, f64::INFINITY),
            |acc, m| if m.1 < acc.1 { m } else { acc },
        );
    let double_well = minima.len() >= 2;
    if p.g2 == 0.0 {
        // Mirror-symmetric surface: report the non-negative well.
        x_star = x_star.abs();
    }
    Ok(SemiclassicalMinimum {
        energy,
        x_star,
        double_well,
    })
}

/// Low-frequency boundary `g1c = g_s √(1 − g2~²/g_t²)`.
pub fn boundary_lowfreq(omega: f64, big_omega: f64, _chi: f64, g2_tilde: f64) -> Result<f64> {
    check_freqs(omega, big_omega)?;
    let g_s = (omega * big_omega).sqrt() / 2.0;
    let g_t = omega / 2.0;
    let r = g2_tilde / g_t;
    if r.abs() >= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "|g2~|/g_t = {} must be below 1",
            r.abs()
        )));
    }
    Ok(g_s * (1.0 - r * r).sqrt())
}

/// Single→double boundary `g1c^I ≈ √(ω² + √(ω⁴ + g_s⁴))`, independent of g2
/// below the triple point.
pub fn boundary_i(omega: f64, big_omega: f64) -> Result<f64> {
    check_freqs(omega, big_omega)?;
    let g_s = (omega * big_omega).sqrt() / 2.0;
    Ok((omega * omega + (omega.powi(4) + g_s.powi(4)).sqrt()).sqrt())
}

/// Displacement renormalization and hopping correction entering the
/// double→broken boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaronQuantities {
    /// ζ = √(1 − ḡ1⁻⁴)
    pub zeta: f64,
    /// t = (1 − ζ)²/2 + ω/(ḡ1² Ω)
    pub t: f64,
    pub delta_c: f64,
}

impl PolaronQuantities {
    pub fn new(omega: f64, big_omega: f64, gbar1: f64) -> Result<Self> {
        check_freqs(omega, big_omega)?;
        if !(gbar1 > 1.0) {
            return Err(Error::OutOfDomain(format!(
                "g1/g_s = {gbar1} must exceed 1"
            )));
        }
        let zeta = (1.0 - gbar1.powi(-4)).sqrt();
        let t = (1.0 - zeta).powi(2) / 2.0 + omega / (gbar1 * gbar1 * big_omega);
        Ok(Self {
            zeta,
            t,
            delta_c: DELTA_C,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIi {
    /// |g2~c^II| / g_t
    pub gbar2: f64,
    /// Set when the exponential underflows or ḡ1 lies beyond the evaluated
    /// range; `gbar2` is then 0.
    pub underflow: bool,
}

/// Double→broken boundary in units of g_t:
///
/// ```text
/// ḡ2c = (1 − t) exp[−ζ² ḡ1² Ω / (2ω)] / (δc ζ³ ḡ1²)
/// ```
pub fn boundary_ii(omega: f64, big_omega: f64, gbar1: f64) -> Result<BoundaryIi> {
    let q = PolaronQuantities::new(omega, big_omega, gbar1)?;
    if gbar1 > BOUNDARY_II_MAX_GBAR1 {
        return Ok(BoundaryIi {
            gbar2: 0.0,
            underflow: true,
        });
    }
    let exponent = q.zeta * q.zeta * gbar1 * gbar1 * big_omega / (2.0 * omega);
    let value = (1.0 - q.t) * (-exponent).exp() / (q.delta_c * q.zeta.powi(3) * gbar1 * gbar1);
    if value == 0.0 || !value.is_normal() {
        return Ok(BoundaryIi {
            gbar2: 0.0,
            underflow: true,
        });
    }
    Ok(BoundaryIi {
        gbar2: value,
        underflow: false,
    })
}

/// ⟨σx⟩ jump across the low-frequency boundary, `2 g2~² / (g2~² + g_t²)`.
pub fn jump_sigma_x(g2_tilde: f64, g_t: f64) -> f64 {
    2.0 * g2_tilde * g2_tilde / (g2_tilde * g2_tilde + g_t * g_t)
}

/// ⟨σz⟩ jump across the low-frequency boundary, `−2 g2~ g_t / (g2~² + g_t²)`.
pub fn jump_sigma_z(g2_tilde: f64, g_t: f64) -> f64 {
    -2.0 * g2_tilde * g_t / (g2_tilde * g2_tilde + g_t * g_t)
}

fn check_freqs(omega: f64, big_omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite() && big_omega > 0.0 && big_omega.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "frequencies must be positive and finite (omega = {omega}, Omega = {big_omega})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    LowFreq,
    I,
    II,
    NumericalI,
    NumericalII,
}

impl BoundaryKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundaryKind::LowFreq => "lowfreq",
            BoundaryKind::I => "I",
            BoundaryKind::II => "II",
            BoundaryKind::NumericalI => "numerical_I",
            BoundaryKind::NumericalII => "numerical_II",
        }
    }
}

/// A transition line in the (g1, g2~) plane, both coordinates in energy
/// units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    pub points: Vec<(f64, f64)>,
    /// Parameters held fixed while tracing; g1 and g2 are not meaningful.
    pub params: ModelParams,
}

/// `g1c(g2~)` for the listed ratios `g2~/g_t`, sorted by g2~.
pub fn lowfreq_curve(p: &ModelParams, gbar2: &[f64]) -> Result<BoundaryCurve> {
    let g_t = p.g_t();
    let mut points = gbar2
        .iter()
        .map(|&r| {
            Ok((
                boundary_lowfreq(p.omega, p.big_omega, p.chi, r * g_t)?,
                r * g_t,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(BoundaryCurve {
        kind: BoundaryKind::LowFreq,
        points,
        params: *p,
    })
}

/// Vertical line `g1 = g1c^I` across the listed ratios `g2~/g_t`.
pub fn boundary_i_curve(p: &ModelParams, gbar2: &[f64]) -> Result<BoundaryCurve> {
    let g1c = boundary_i(p.omega, p.big_omega)?;
    let mut points: Vec<(f64, f64)> = gbar2.iter().map(|&r| (g1c, r * p.g_t())).collect();
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(BoundaryCurve {
        kind: BoundaryKind::I,
        points,
        params: *p,
    })
}

/// `g2~c^II(g1)` for the listed ratios `g1/g_s` (all > 1). Underflowed
/// points are dropped.
pub fn boundary_ii_curve(p: &ModelParams, gbar1: &[f64]) -> Result<BoundaryCurve> {
    let mut points = Vec::with_capacity(gbar1.len());
    for &r in gbar1 {
        let b = boundary_ii(p.omega, p.big_omega, r)?;
        if !b.underflow {
            points.push((r * p.g_s(), b.gbar2 * p.g_t()));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(BoundaryCurve {
        kind: BoundaryKind::II,
        points,
        params: *p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(omega: f64, gbar1: f64, gbar2: f64, chi: f64) -> ModelParams {
        let base = ModelParams::new(omega, 1.0, 0.0, 0.0, chi);
        base.with_g1(gbar1 * base.g_s())
            .with_g2_tilde(gbar2 * base.g_t())
    }

    #[test]
    fn potentials_balance_at_origin() {
        let p = params(0.1, 1.3, 0.4, 0.0);
        let s = derive_scales(&p).unwrap();
        let v = effective_potential(&p, 0.0).unwrap();
        let expected = s.g1_prime.powi(2) / (2.0 * (1.0 - s.g2_tilde_prime.powi(2)));
        assert!((v.v_plus - expected).abs() < 1e-12 * expected);
        assert!((v.v_minus - expected).abs() < 1e-12 * expected);
        let hp_plus = harmonic_part(&s, SpinBranch::Plus, 0.0);
        let hp_expected = (1.0 - s.g2_tilde_prime) * s.g1_prime.powi(2)
            / (2.0 * (1.0 - s.g2_tilde_prime.powi(2)));
        assert!((hp_plus - hp_expected).abs() < 1e-12 * hp_expected);
    }

    #[test]
    fn pure_single_photon_potentials() {
        let p = params(0.1, 0.8, 0.0, 0.0);
        let g1p = derive_scales(&p).unwrap().g1_prime;
        for x in [-3.0, -0.5, 0.0, 1.7] {
            let v = effective_potential(&p, x).unwrap();
            assert!((v.v_plus - (x + g1p).powi(2) / 2.0).abs() < 1e-12);
            assert!((v.v_minus - (x - g1p).powi(2) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_two_photon_potentials() {
        // g1 = 0, g2~' = 0.4
        let p = params(0.1, 0.0, 0.4, 0.0);
        for x in [-2.0, 0.0, 1.5] {
            let v = effective_potential(&p, x).unwrap();
            assert!((v.v_plus - 1.4 * x * x / 2.0).abs() < 1e-12);
            assert!((v.v_minus - 0.6 * x * x / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn semiclassical_below_threshold() {
        let p = params(0.001, 0.5, 0.0, 0.0);
        let m = semiclassical_energy(&p).unwrap();
        assert!(m.x_star.abs() < 1e-5, "x_star {}", m.x_star);
        assert!(!m.double_well);
        assert!((m.energy + 0.5005).abs() < 1e-12);
    }

    #[test]
    fn semiclassical_deep_double_well() {
        let p = params(0.001, 3.0, 0.0, 0.0);
        let s = derive_scales(&p).unwrap();
        let m = semiclassical_energy(&p).unwrap();
        assert!(m.double_well);
        assert!(m.x_star > 0.0);
        let zeta = (1.0 - 3f64.powi(-4)).sqrt();
        assert!((m.x_star - zeta * s.g1_prime).abs() < 1e-6 * s.g1_prime);
        // tunneling correction to ε0 is O(Ω²/(ω g1'²))
        assert!((m.energy - s.eps0).abs() < 0.02 * s.eps0.abs());
    }

    #[test]
    fn lowfreq_boundary_values() {
        let (omega, big) = (0.001f64, 1.0f64);
        let g_s = (omega * big).sqrt() / 2.0;
        let g_t = omega / 2.0;
        assert!((boundary_lowfreq(omega, big, 0.0, 0.0).unwrap() - g_s).abs() < 1e-16);
        assert!((boundary_lowfreq(omega, big, 0.0, 0.6 * g_t).unwrap() - 0.8 * g_s).abs() < 1e-15);
        assert!(boundary_lowfreq(omega, big, 0.0, 0.999_999 * g_t).unwrap() < 2e-3 * g_s);
        assert!(matches!(
            boundary_lowfreq(omega, big, 0.0, g_t),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn boundary_i_values() {
        let g = boundary_i(0.1, 1.0).unwrap();
        // √(0.01 + √(1e-4 + 6.25e-4))
        let expected = (0.01f64 + (1e-4f64 + 0.000_625).sqrt()).sqrt();
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.192_160_4).abs() < 1e-6);
        let g_s = 0.1f64.sqrt() / 2.0_f64;
        assert!((g / g_s - 1.215_3).abs() < 1e-4);
        let tiny = boundary_i(1e-8, 1.0).unwrap();
        assert!((tiny / (1e-8f64.sqrt() / 2.0) - 1.0f64).abs() < 1e-6);
    }

    #[test]
    fn boundary_ii_reference_point() {
        let q = PolaronQuantities::new(0.1, 1.0, 1.5).unwrap();
        assert!((q.zeta - 0.895_806).abs() < 1e-6);
        assert!((q.t - 0.049_872).abs() < 1e-6);
        let b = boundary_ii(0.1, 1.0, 1.5).unwrap();
        assert!(!b.underflow);
        // independent evaluation of the printed expression
        let zeta: f64 = (1.0 - 1.5f64.powi(-4)).sqrt();
        let t = (1.0 - zeta).powi(2) / 2.0 + 0.1 / (2.25 * 1.0);
        let exponent = zeta * zeta * 2.25 * 1.0 / 0.2;
        assert!((exponent - 9.027_8).abs() < 1e-4);
        let reference = (-exponent).exp() / ((-1f64).exp() * zeta.powi(3) * 2.25 / (1.0 - t));
        assert!((b.gbar2 - reference).abs() < 1e-15 * reference);
        assert!((b.gbar2 - 1.914e-4).abs() < 1e-6);
    }

    #[test]
    fn boundary_ii_vanishes_at_low_frequency() {
        let hi = boundary_ii(0.1, 1.0, 1.5).unwrap().gbar2;
        let lo = boundary_ii(0.01, 1.0, 1.5).unwrap().gbar2;
        let lower = boundary_ii(0.001, 1.0, 1.5).unwrap();
        assert!(lo < 1e-30 * hi);
        assert!(lower.underflow && lower.gbar2 == 0.0);
    }

    #[test]
    fn boundary_ii_domain() {
        assert!(matches!(
            boundary_ii(0.1, 1.0, 1.0),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            boundary_ii(0.1, 1.0, 0.7),
            Err(Error::OutOfDomain(_))
        ));
        let far = boundary_ii(0.1, 1.0, 4.5).unwrap();
        assert!(far.underflow && far.gbar2 == 0.0);
    }

    #[test]
    fn boundary_ii_decreasing() {
        for &omega in &[0.2, 0.1, 0.05] {
            let mut prev = f64::INFINITY;
            let mut g = 1.2;
            while g <= 4.0 {
                let b = boundary_ii(omega, 1.0, g).unwrap();
                if b.underflow {
                    break;
                }
                assert!(b.gbar2 < prev, "omega {omega} g {g}");
                prev = b.gbar2;
                g += 0.01;
            }
        }
    }

    #[test]
    fn jump_values() {
        assert!((jump_sigma_x(1.0, 1.0) - 1.0).abs() < 1e-16);
        assert!((jump_sigma_z(1.0, 1.0) + 1.0).abs() < 1e-16);
        assert_eq!(jump_sigma_x(0.0, 1.0), 0.0);
        assert_eq!(jump_sigma_z(0.0, 1.0), 0.0);
        assert!((jump_sigma_x(0.5, 1.0) - 0.4).abs() < 1e-15);
        assert!((jump_sigma_z(0.5, 1.0) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn jumps_lie_on_unit_circle() {
        for i in -200..=200 {
            let g = i as f64 * 0.013;
            let dx = jump_sigma_x(g, 0.7);
            let dz = jump_sigma_z(g, 0.7);
            assert!(((dx - 1.0).powi(2) + dz * dz - 1.0).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn potential_balance(
            omega in 1e-4f64..1.0,
            gbar1 in -3.0f64..3.0,
            gbar2 in -0.99f64..0.99,
            chi in 0.0f64..1.0,
        ) {
            let p = params(omega, gbar1, gbar2, chi);
            prop_assume!(validate(&p).is_ok());
            let v = effective_potential(&p, 0.0).unwrap();
            let scale = v.v_plus.abs().max(1.0);
            prop_assert!((v.v_plus - v.v_minus).abs() <= 1e-12 * scale);
        }
    }
}
