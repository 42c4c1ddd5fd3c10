//! Ground-state expectation values.

use serde::{Deserialize, Serialize};

use crate::eigensolve::GroundSolution;
use crate::error::{Error, Result};
use crate::model::{derive_scales, DerivedScales, ModelParams};

/// Spin components below this weight make x̃± undefined.
pub const MIN_COMPONENT_WEIGHT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub sigma_z: f64,
    pub sigma_x: f64,
    /// ⟨a†a⟩
    pub photon_number: f64,
    /// ⟨a† + a⟩
    pub displacement: f64,
    /// ⟨σz (a† + a)⟩
    pub spp_correlation: f64,
    /// ⟨σz [(a†)² + a²]⟩
    pub tpp_correlation: f64,
    /// ⟨p²⟩ / ⟨p²⟩_vacuum with ⟨p²⟩_vacuum = 1/2
    pub p2_ratio: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub x_tilde_plus: Option<f64>,
    pub x_tilde_minus: Option<f64>,
    /// False when the ground doublet is degenerate to machine precision, in
    /// which case ⟨σz⟩, ⟨a† + a⟩ and x̃± describe an arbitrary mixture.
    pub reliable: bool,
}

/// Per-spin sums over the coefficient vector.
#[derive(Debug, Clone, Copy, Default)]
struct SpinMoments {
    weight: f64,
    number: f64,
    /// ⟨a† + a⟩ within the component
    displacement: f64,
    /// ⟨(a†)² + a²⟩ within the component
    pair: f64,
}

fn spin_moments(coeffs: &[f64], s: usize) -> SpinMoments {
    let levels = coeffs.len() / 2;
    let c = |n: usize| coeffs[2 * n + s];
    let mut m = SpinMoments::default();
    for n in 0..levels {
        let cn = c(n);
        let nf = n as f64;
        m.weight += cn * cn;
        m.number += nf * cn * cn;
        if n + 1 < levels {
            m.displacement += 2.0 * (nf + 1.0).sqrt() * cn * c(n + 1);
        }
        if n + 2 < levels {
            m.pair += 2.0 * ((nf + 1.0) * (nf + 2.0)).sqrt() * cn * c(n + 2);
        }
    }
    m
}

pub fn compute_observables(sol: &GroundSolution, p: &ModelParams) -> Result<ObservableSet> {
    let coeffs = &sol.coeffs;
    if coeffs.len() % 2 != 0 || coeffs.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 2 * (sol.n_max_used + 1),
            got: coeffs.len(),
        });
    }
    let up = spin_moments(coeffs, 0);
    let down = spin_moments(coeffs, 1);
    let total = up.weight + down.weight;
    let sigma_z = (up.weight - down.weight) / total;
    let sigma_x = 2.0 * coeffs.chunks_exact(2).map(|c| c[0] * c[1]).sum::<f64>() / total;
    let photon_number = (up.number + down.number) / total;
    let displacement = (up.displacement + down.displacement) / total;
    let spp_correlation = (up.displacement - down.displacement) / total;
    let tpp_correlation = (up.pair - down.pair) / total;
    // ⟨p²⟩ = (⟨a†a⟩ + ⟨aa†⟩ − ⟨a†²⟩ − ⟨a²⟩)/2 = (2N + 1 − ⟨a†² + a²⟩)/2
    let pair_total = (up.pair + down.pair) / total;
    let p2 = (2.0 * photon_number + 1.0 - pair_total) / 2.0;
    let rho_plus = (1.0 + sigma_z) / 2.0;
    let rho_minus = (1.0 - sigma_z) / 2.0;

    let scales = derive_scales(p)?;
    let (x_tilde_plus, x_tilde_minus) = match spin_filtered_displacement(sol, &scales) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(Error::UndefinedForZeroG2) | Err(Error::VanishingWeight { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(ObservableSet {
        sigma_z,
        sigma_x,
        photon_number,
        displacement,
        spp_correlation,
        tpp_correlation,
        p2_ratio: p2 / 0.5,
        rho_plus,
        rho_minus,
        x_tilde_plus,
        x_tilde_minus,
        reliable: !sol.degenerate,
    })
}

/// `x̃± = ⟨a† + a⟩± / (√2 ρ± |x0,sign(−g2~)|)`, where `⟨·⟩±` is taken within
/// the unnormalized spin-± component.
pub fn spin_filtered_displacement(
    sol: &GroundSolution,
    scales: &DerivedScales,
) -> Result<(f64, f64)> {
    if scales.g2_tilde == 0.0 {
        return Err(Error::UndefinedForZeroG2);
    }
    let up = spin_moments(&sol.coeffs, 0);
    let down = spin_moments(&sol.coeffs, 1);
    let total = up.weight + down.weight;
    let (rho_plus, rho_minus) = (up.weight / total, down.weight / total);
    let rho_min = rho_plus.min(rho_minus);
    if rho_min <= MIN_COMPONENT_WEIGHT {
        return Err(Error::VanishingWeight { rho: rho_min });
    }
    let x0 = if scales.g2_tilde > 0.0 {
        scales.x0_minus
    } else {
        scales.x0_plus
    }
    .abs();
    let denom = std::f64::consts::SQRT_2 * x0;
    if denom == 0.0 {
        // g1 = 0: no displacement to normalize by
        return Ok((0.0, 0.0));
    }
    Ok((
        up.displacement / total / (denom * rho_plus),
        down.displacement / total / (denom * rho_minus),
    ))
}

/// ⟨σz (a†a + aa†)⟩, the Stark-term partner of ⟨σz[(a†)² + a²]⟩ in
/// `∂E/∂g2`.
pub fn sigma_z_number_correlation(sol: &GroundSolution) -> f64 {
    let up = spin_moments(&sol.coeffs, 0);
    let down = spin_moments(&sol.coeffs, 1);
    let total = up.weight + down.weight;
    ((2.0 * up.number + up.weight) - (2.0 * down.number + down.weight)) / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{ground_state, TruncationPolicy};

    fn params(omega: f64, gbar1: f64, gbar2: f64, chi: f64) -> ModelParams {
        let base = ModelParams::new(omega, 1.0, 0.0, 0.0, chi);
        base.with_g1(gbar1 * base.g_s())
            .with_g2_tilde(gbar2 * base.g_t())
    }

    fn solve(p: &ModelParams) -> (GroundSolution, ObservableSet) {
        let sol = ground_state(p, &TruncationPolicy::for_params(p)).unwrap();
        let obs = compute_observables(&sol, p).unwrap();
        (sol, obs)
    }

    #[test]
    fn decoupled_vacuum() {
        let p = params(0.1, 0.0, 0.0, 0.0);
        let (_, o) = solve(&p);
        assert!((o.sigma_x + 1.0).abs() < 1e-12);
        assert!(o.sigma_z.abs() < 1e-12);
        assert!(o.photon_number.abs() < 1e-12);
        assert!((o.p2_ratio - 1.0).abs() < 1e-12);
        assert_eq!(o.x_tilde_plus, None);
        assert!(o.reliable);
    }

    #[test]
    fn rho_identity_and_bloch_bound() {
        let p = params(0.1, 1.3, 0.2, 0.0);
        let (sol, o) = solve(&p);
        assert!((o.rho_plus + o.rho_minus - 1.0).abs() < 1e-12);
        let up: f64 = sol.coeffs.iter().step_by(2).map(|c| c * c).sum();
        assert!((up - o.rho_plus).abs() < 1e-12);
        assert!(o.sigma_x.powi(2) + o.sigma_z.powi(2) <= 1.0 + 1e-12);
    }

    #[test]
    fn no_displacement_without_single_photon_coupling() {
        let p = params(0.1, 0.0, 0.05, 0.0);
        let (sol, o) = solve(&p);
        assert!(o.displacement.abs() < 1e-12);
        let s = derive_scales(&p).unwrap();
        let (a, b) = spin_filtered_displacement(&sol, &s).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn filtered_displacement_undefined_at_zero_g2() {
        let p = params(0.1, 0.5, 0.0, 0.0);
        let (sol, _) = solve(&p);
        let s = derive_scales(&p).unwrap();
        assert!(matches!(
            spin_filtered_displacement(&sol, &s),
            Err(Error::UndefinedForZeroG2)
        ));
    }

    #[test]
    fn weak_coupling_flat_region() {
        let p = params(0.001, 0.5, 0.3, 0.0);
        let (_, o) = solve(&p);
        assert!(o.sigma_z.abs() < 0.02, "sigma_z {}", o.sigma_z);
        assert!((o.sigma_x + 1.0).abs() < 0.02, "sigma_x {}", o.sigma_x);
    }
}
