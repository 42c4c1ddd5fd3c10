//! Physical parameters and the effective displaced-oscillator scales.
//!
//! Writing `a = (x + ip)/√2` turns each spin-z block of the Hamiltonian into
//! a displaced, squeezed oscillator
//!
//! ```text
//! h± = ω (p² / 2m± + v±(x)) + ε0,   v± = m± ϖ±² (x − x0,±)² / 2 + b±
//! ```
//!
//! [`DerivedScales`] holds every symbol of that decomposition in dimensionless
//! form (lengths in oscillator units, potentials in units of ω).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the Hamiltonian. All energies share one user-chosen unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Boson frequency ω.
    pub omega: f64,
    /// Qubit splitting Ω.
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    /// Single-photon coupling g1.
    pub g1: f64,
    /// Two-photon coupling g2.
    pub g2: f64,
    /// Weight of the Stark-like term χ(a†a + aa†); 0 for the conventional
    /// two-photon model, 1 for the quadratic `(a† + a)²` form.
    pub chi: f64,
}

impl ModelParams {
    pub fn new(omega: f64, big_omega: f64, g1: f64, g2: f64, chi: f64) -> Self {
        Self {
            omega,
            big_omega,
            g1,
            g2,
            chi,
        }
    }

    /// Critical single-photon coupling √(ωΩ)/2 of the linear model.
    pub fn g_s(&self) -> f64 {
        (self.omega * self.big_omega).sqrt() / 2.0
    }

    /// Two-photon collapse scale ω/2.
    pub fn g_t(&self) -> f64 {
        self.omega / 2.0
    }

    /// Effective two-photon coupling (1 + χ) g2.
    pub fn g2_tilde(&self) -> f64 {
        (1.0 + self.chi) * self.g2
    }

    /// Copy with g2 chosen so that (1 + χ) g2 equals `g2_tilde`.
    pub fn with_g2_tilde(mut self, g2_tilde: f64) -> Self {
        self.g2 = g2_tilde / (1.0 + self.chi);
        self
    }

    pub fn with_g1(mut self, g1: f64) -> Self {
        self.g1 = g1;
        self
    }

    pub fn with_g2(mut self, g2: f64) -> Self {
        self.g2 = g2;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    fn check_frequencies(&self) -> Result<()> {
        let finite = [self.omega, self.big_omega, self.g1, self.g2, self.chi]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.big_omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Omega must be positive, got {}",
                self.big_omega
            )));
        }
        Ok(())
    }
}

/// Spin-z branch label: `Plus` is spin up (σz = +1), `Minus` spin down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinBranch {
    Plus,
    Minus,
}

impl fmt::Display for SpinBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinBranch::Plus => f.write_str("spin-up"),
            SpinBranch::Minus => f.write_str("spin-down"),
        }
    }
}

/// Every derived scale of the displaced-oscillator decomposition.
///
/// Primed couplings are dimensionless: `g1' = √2 g1/ω`, `g2' = 2 g2/ω`,
/// `g2~' = 2 (1+χ) g2/ω`. Potentials `b±` are in units of ω, `eps0` is an
/// energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub g_s: f64,
    pub g_t: f64,
    pub g2_tilde: f64,
    pub g1_prime: f64,
    pub g2_prime: f64,
    pub g2_tilde_prime: f64,
    pub gbar1: f64,
    pub gbar2: f64,
    pub mass_plus: f64,
    pub mass_minus: f64,
    /// ϖ±². Negative values signal spectral collapse.
    pub varpi_plus_sq: f64,
    pub varpi_minus_sq: f64,
    /// ϖ±, NaN when the corresponding square is negative.
    pub varpi_plus: f64,
    pub varpi_minus: f64,
    pub x0_plus: f64,
    pub x0_minus: f64,
    pub bias_plus: f64,
    pub bias_minus: f64,
    pub eps0: f64,
}

impl DerivedScales {
    pub fn mass(&self, branch: SpinBranch) -> f64 {
        match branch {
            SpinBranch::Plus => self.mass_plus,
            SpinBranch::Minus => self.mass_minus,
        }
    }

    pub fn varpi(&self, branch: SpinBranch) -> f64 {
        match branch {
            SpinBranch::Plus => self.varpi_plus,
            SpinBranch::Minus => self.varpi_minus,
        }
    }

    pub fn x0(&self, branch: SpinBranch) -> f64 {
        match branch {
            SpinBranch::Plus => self.x0_plus,
            SpinBranch::Minus => self.x0_minus,
        }
    }

    pub fn bias(&self, branch: SpinBranch) -> f64 {
        match branch {
            SpinBranch::Plus => self.bias_plus,
            SpinBranch::Minus => self.bias_minus,
        }
    }

    /// Potential stiffness m±ϖ±², equal to 1 ± g2~'.
    pub fn stiffness(&self, branch: SpinBranch) -> f64 {
        match branch {
            SpinBranch::Plus => self.mass_plus * self.varpi_plus_sq,
            SpinBranch::Minus => self.mass_minus * self.varpi_minus_sq,
        }
    }

    /// Largest potential displacement max(|x0,+|, |x0,-|).
    pub fn x0_max(&self) -> f64 {
        self.x0_plus.abs().max(self.x0_minus.abs())
    }
}

pub fn derive_scales(p: &ModelParams) -> Result<DerivedScales> {
    p.check_frequencies()?;
    let omega = p.omega;
    let g_s = p.g_s();
    let g_t = p.g_t();
    let g2_tilde = p.g2_tilde();
    let g1_prime = std::f64::consts::SQRT_2 * p.g1 / omega;
    let g2_prime = 2.0 * p.g2 / omega;
    let g2_tilde_prime = 2.0 * g2_tilde / omega;
    let denom = 1.0 - g2_tilde_prime * g2_tilde_prime;
    if denom == 0.0 {
        return Err(Error::DegenerateScale);
    }

    let chi_term = p.chi * g2_prime;
    let mass_plus = 1.0 / (1.0 - g2_prime + chi_term);
    let mass_minus = 1.0 / (1.0 + g2_prime - chi_term);
    let varpi_plus_sq = (1.0 + chi_term).powi(2) - g2_prime * g2_prime;
    let varpi_minus_sq = (1.0 - chi_term).powi(2) - g2_prime * g2_prime;
    let g1p_sq = g1_prime * g1_prime;

    Ok(DerivedScales {
        g_s,
        g_t,
        g2_tilde,
        g1_prime,
        g2_prime,
        g2_tilde_prime,
        gbar1: p.g1 / g_s,
        gbar2: g2_tilde / g_t,
        mass_plus,
        mass_minus,
        varpi_plus_sq,
        varpi_minus_sq,
        varpi_plus: varpi_plus_sq.sqrt(),
        varpi_minus: varpi_minus_sq.sqrt(),
        x0_plus: -g1_prime / (1.0 + g2_tilde_prime),
        x0_minus: g1_prime / (1.0 - g2_tilde_prime),
        bias_plus: g2_tilde_prime * g1p_sq / (2.0 * denom),
        bias_minus: -g2_tilde_prime * g1p_sq / (2.0 * denom),
        eps0: -(g1p_sq / denom + 1.0) * omega / 2.0,
    })
}

/// Checks that the Hamiltonian is bounded below: ϖ±² > 0 and |g2~'| < 1,
/// with strict inequalities.
pub fn validate(p: &ModelParams) -> Result<()> {
    p.check_frequencies()?;
    let g2_prime = 2.0 * p.g2 / p.omega;
    let g2_tilde_prime = 2.0 * p.g2_tilde() / p.omega;
    let chi_term = p.chi * g2_prime;
    let varpi_plus_sq = (1.0 + chi_term).powi(2) - g2_prime * g2_prime;
    let varpi_minus_sq = (1.0 - chi_term).powi(2) - g2_prime * g2_prime;
    if varpi_plus_sq <= 0.0 {
        return Err(Error::SpectralCollapse {
            branch: SpinBranch::Plus,
            reason: format!("varpi+^2 = {varpi_plus_sq} <= 0"),
        });
    }
    if varpi_minus_sq <= 0.0 {
        return Err(Error::SpectralCollapse {
            branch: SpinBranch::Minus,
            reason: format!("varpi-^2 = {varpi_minus_sq} <= 0"),
        });
    }
    if g2_tilde_prime.abs() >= 1.0 {
        let branch = if g2_tilde_prime > 0.0 {
            SpinBranch::Minus
        } else {
            SpinBranch::Plus
        };
        return Err(Error::SpectralCollapse {
            branch,
            reason: format!("|g2~'| = {} >= 1", g2_tilde_prime.abs()),
        });
    }
    Ok(())
}

/// Unit attached to a coupling value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingUnit {
    /// Plain energy units.
    #[default]
    Energy,
    /// Multiples of `g_s = √(ωΩ)/2`.
    Gs,
    /// Multiples of `g_t = ω/2`.
    Gt,
}

/// A coupling written as `<float>`, `<float>gs` or `<float>gt`.
///
/// The suffix binds tighter than the sign: `-0.5gt` is `-(0.5 g_t)`. Units
/// are resolved against the frequencies of the point being solved.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coupling {
    pub value: f64,
    pub unit: CouplingUnit,
}

impl Coupling {
    pub fn energy(value: f64) -> Self {
        Self {
            value,
            unit: CouplingUnit::Energy,
        }
    }

    pub fn resolve(&self, omega: f64, big_omega: f64) -> f64 {
        match self.unit {
            CouplingUnit::Energy => self.value,
            CouplingUnit::Gs => self.value * (omega * big_omega).sqrt() / 2.0,
            CouplingUnit::Gt => self.value * omega / 2.0,
        }
    }
}

impl std::str::FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, unit) = if let Some(v) = t.strip_suffix("gs") {
            (v, CouplingUnit::Gs)
        } else if let Some(v) = t.strip_suffix("gt") {
            (v, CouplingUnit::Gt)
        } else {
            (t, CouplingUnit::Energy)
        };
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("cannot parse coupling {s:?}")))?;
        if !value.is_finite() {
            return Err(Error::InvalidParams(format!(
                "coupling {s:?} is not finite"
            )));
        }
        Ok(Self { value, unit })
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            CouplingUnit::Energy => write!(f, "{}", self.value),
            CouplingUnit::Gs => write!(f, "{}gs", self.value),
            CouplingUnit::Gt => write!(f, "{}gt", self.value),
        }
    }
}

impl Serialize for Coupling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.unit {
            CouplingUnit::Energy => s.serialize_f64(self.value),
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Coupling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Coupling::energy(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
