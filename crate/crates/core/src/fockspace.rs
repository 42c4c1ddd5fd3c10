//! Truncated Fock ⊗ spin basis and the banded Hamiltonian.
//!
//! Basis states are interleaved, `index = 2n + s` with `s = 0` for spin up
//! (σz = +1) and `s = 1` for spin down. In this ordering σx couples offset 1,
//! `a† + a` offset 2 and `(a†)² + a²` offset 4, so the Hamiltonian has half
//! bandwidth 4 regardless of the truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, ModelParams};

/// Truncation of the bosonic mode: Fock levels `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_max: usize,
}

impl BasisSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::TruncationTooSmall { n_max });
        }
        Ok(Self { n_max })
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Basis index of `|n, s⟩`, `s = 0` up, `s = 1` down.
    pub fn index(n: usize, s: usize) -> usize {
        2 * n + s
    }
}

/// Real symmetric band matrix; only the diagonal and the `half_bandwidth`
/// upper diagonals are stored.
///
/// Diagonal `k` lives at `bands[k * dim .. (k + 1) * dim]` and entry `i` of it
/// is `A[i][i + k]`; the last `k` slots of each diagonal are unused zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    dim: usize,
    half_bandwidth: usize,
    bands: Vec<f64>,
}

impl BandedSymMatrix {
    pub fn zeros(dim: usize, half_bandwidth: usize) -> Self {
        Self {
            dim,
            half_bandwidth,
            bands: vec![0.0; dim * (half_bandwidth + 1)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, 0);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let k = c - r;
        if k > self.half_bandwidth || c >= self.dim {
            0.0
        } else {
            self.bands[k * self.dim + r]
        }
    }

    /// Sets `(i, j)` and, implicitly, `(j, i)`.
    ///
    /// # Panics
    /// If the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let k = c - r;
        assert!(
            k <= self.half_bandwidth && c < self.dim,
            "entry ({i}, {j}) outside band"
        );
        self.bands[k * self.dim + r] = value;
    }

    /// Diagonal `k` (`A[i][i+k]` for `i in 0..dim-k`).
    pub fn diagonal(&self, k: usize) -> &[f64] {
        let start = k * self.dim;
        &self.bands[start..start + self.dim - k]
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: out.len(),
            });
        }
        let main = self.diagonal(0);
        for i in 0..self.dim {
            out[i] = main[i] * v[i];
        }
        for k in 1..=self.half_bandwidth.min(self.dim.saturating_sub(1)) {
            let d = self.diagonal(k);
            for (i, &a) in d.iter().enumerate() {
                out[i] += a * v[i + k];
                out[i + k] += a * v[i];
            }
        }
        Ok(())
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.half_bandwidth);
                let hi = (i + self.half_bandwidth).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin lower bound on the smallest eigenvalue.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.half_bandwidth);
                let hi = (i + self.half_bandwidth).min(self.dim - 1);
                let off: f64 = (lo..=hi)
                    .filter(|&j| j != i)
                    .map(|j| self.get(i, j).abs())
                    .sum();
                self.get(i, i) - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Dense row-major copy, for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }
}

/// Full Hamiltonian in the interleaved basis.
pub fn build_hamiltonian(p: &ModelParams, basis: BasisSpec) -> Result<BandedSymMatrix> {
    validate(p)?;
    if basis.n_max < 2 {
        return Err(Error::TruncationTooSmall { n_max: basis.n_max });
    }
    let mut h = BandedSymMatrix::zeros(basis.dim(), 4);
    let n_max = basis.n_max;
    for n in 0..=n_max {
        let nf = n as f64;
        for (s, sign) in [(0usize, 1.0f64), (1, -1.0)] {
            let i = BasisSpec::index(n, s);
            h.set(i, i, p.omega * nf + sign * p.g2 * p.chi * (2.0 * nf + 1.0));
            if n < n_max {
                h.set(
                    i,
                    BasisSpec::index(n + 1, s),
                    sign * p.g1 * (nf + 1.0).sqrt(),
                );
            }
            if n + 1 < n_max {
                h.set(
                    i,
                    BasisSpec::index(n + 2, s),
                    sign * p.g2 * ((nf + 1.0) * (nf + 2.0)).sqrt(),
                );
            }
        }
        h.set(
            BasisSpec::index(n, 0),
            BasisSpec::index(n, 1),
            p.big_omega / 2.0,
        );
    }
    Ok(h)
}

/// Eigenspaces of the parity of the g2 = 0 Hamiltonian.
///
/// `Even` is the sector holding the decoupled ground state `|0⟩|−x⟩`: Fock
/// levels with even `n` carry σx = −1 and odd `n` carry σx = +1. `Odd` is
/// the complement. Equivalently `Even` is the −1 eigenspace of
/// `exp(iπ a†a) σx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParitySector {
    Even,
    Odd,
}

impl ParitySector {
    /// σx eigenvalue carried by Fock level `n` in this sector.
    pub fn sigma_x_of(self, n: usize) -> f64 {
        let even_n = n % 2 == 0;
        match (self, even_n) {
            (ParitySector::Even, true) | (ParitySector::Odd, false) => -1.0,
            _ => 1.0,
        }
    }

    /// Embeds a sector vector (indexed by `n`) into the interleaved basis.
    pub fn embed(self, sector_vec: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * sector_vec.len()];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (n, &c) in sector_vec.iter().enumerate() {
            out[2 * n] = c * r;
            out[2 * n + 1] = self.sigma_x_of(n) * c * r;
        }
        out
    }
}

/// Tridiagonal Hamiltonian of one parity sector, dimension `n_max + 1`.
pub fn build_parity_sector(
    p: &ModelParams,
    basis: BasisSpec,
    sector: ParitySector,
) -> Result<BandedSymMatrix> {
    if p.g2 != 0.0 {
        return Err(Error::ParityBroken { g2: p.g2 });
    }
    validate(p)?;
    if basis.n_max < 2 {
        return Err(Error::TruncationTooSmall { n_max: basis.n_max });
    }
    let dim = basis.n_max + 1;
    let mut h = BandedSymMatrix::zeros(dim, 1);
    for n in 0..dim {
        let nf = n as f64;
        h.set(
            n,
            n,
            p.omega * nf + sector.sigma_x_of(n) * p.big_omega / 2.0,
        );
        if n + 1 < dim {
            h.set(n, n + 1, p.g1 * (nf + 1.0).sqrt());
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum())
            .collect()
    }

    /// Deterministic filler without pulling in an RNG.
    fn pseudo(i: usize) -> f64 {
        ((i as f64 * 0.618_033_988_749_895 + 0.1).fract() - 0.5) * 2.0
    }

    #[test]
    fn first_row_elements() {
        let p = ModelParams::new(0.1, 1.0, 0.2, 0.01, 1.0);
        let h = build_hamiltonian(&p, BasisSpec::new(10).unwrap()).unwrap();
        assert_eq!(h.half_bandwidth(), 4);
        assert!((h.get(0, 0) - p.g2 * p.chi).abs() < 1e-16);
        assert_eq!(h.get(0, 1), 0.5);
        assert!((h.get(0, 2) - p.g1).abs() < 1e-16);
        assert!((h.get(0, 4) - 2f64.sqrt() * p.g2).abs() < 1e-16);
        // spin-down copies carry the opposite sign
        assert!((h.get(1, 3) + p.g1).abs() < 1e-16);
        assert!((h.get(1, 1) + p.g2 * p.chi).abs() < 1e-16);
    }

    #[test]
    fn decoupled_limit_is_block_diagonal() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.0, 0.0);
        let h = build_hamiltonian(&p, BasisSpec::new(6).unwrap()).unwrap();
        let d = h.dim();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j {
                    0.1 * (i / 2) as f64
                } else if i / 2 == j / 2 {
                    0.5
                } else {
                    0.0
                };
                assert!((h.get(i, j) - expected).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let mut m = BandedSymMatrix::zeros(10, 3);
        for k in 0..=3 {
            for i in 0..10 - k {
                m.set(i, i + k, pseudo(13 * i + k));
            }
        }
        let v: Vec<f64> = (0..10).map(|i| pseudo(i + 100)).collect();
        let dense = m.to_dense();
        let expected = dense_mul(&dense, 10, &v);
        let got = m.apply(&v).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
        // unit vectors reproduce columns
        for j in 0..10 {
            let mut e = vec![0.0; 10];
            e[j] = 1.0;
            let col = m.apply(&e).unwrap();
            for i in 0..10 {
                assert_eq!(col[i], dense[i * 10 + j]);
            }
        }
    }

    #[test]
    fn identity_apply() {
        let v: Vec<f64> = (0..7).map(pseudo).collect();
        assert_eq!(BandedSymMatrix::identity(7).apply(&v).unwrap(), v);
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let m = BandedSymMatrix::identity(4);
        assert!(matches!(
            m.apply(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn truncation_too_small() {
        assert!(matches!(
            BasisSpec::new(1),
            Err(Error::TruncationTooSmall { n_max: 1 })
        ));
        let p = ModelParams::new(0.1, 1.0, 0.1, 0.0, 0.0);
        assert!(build_hamiltonian(&p, BasisSpec { n_max: 1 }).is_err());
    }

    #[test]
    fn collapse_is_rejected() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.06, 0.0);
        assert!(matches!(
            build_hamiltonian(&p, BasisSpec::new(8).unwrap()),
            Err(Error::SpectralCollapse { .. })
        ));
    }

    #[test]
    fn symmetric_dense_expansion() {
        let p = ModelParams::new(0.3, 1.2, 0.37, -0.04, 0.5);
        let h = build_hamiltonian(&p, BasisSpec::new(12).unwrap()).unwrap();
        let n = h.dim();
        let d = h.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i * n + j], d[j * n + i]);
            }
        }
    }

    /// exp(iπ a†a) σx as a dense matrix.
    fn parity_dense(n_max: usize) -> Vec<f64> {
        let dim = 2 * (n_max + 1);
        let mut p = vec![0.0; dim * dim];
        for n in 0..=n_max {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            p[(2 * n) * dim + 2 * n + 1] = sign;
            p[(2 * n + 1) * dim + 2 * n] = sign;
        }
        p
    }

    fn commutator_max(p: &ModelParams, n_max: usize) -> f64 {
        let h = build_hamiltonian(p, BasisSpec::new(n_max).unwrap())
            .unwrap()
            .to_dense();
        let par = parity_dense(n_max);
        let dim = 2 * (n_max + 1);
        let inner = 2 * (n_max - 1);
        let mut worst: f64 = 0.0;
        for i in 0..inner {
            for j in 0..inner {
                let mut ph = 0.0;
                let mut hp = 0.0;
                for k in 0..dim {
                    ph += par[i * dim + k] * h[k * dim + j];
                    hp += h[i * dim + k] * par[k * dim + j];
                }
                worst = worst.max((ph - hp).abs());
            }
        }
        worst
    }

    #[test]
    fn parity_commutes_without_two_photon_term() {
        let p = ModelParams::new(0.1, 1.0, 0.4, 0.0, 1.0);
        assert!(commutator_max(&p, 20) < 1e-12);
    }

    #[test]
    fn parity_breaking_is_linear_in_g2() {
        let base = ModelParams::new(0.1, 1.0, 0.4, 0.0, 0.0);
        let c1 = commutator_max(&base.with_g2(1e-4), 20);
        let c2 = commutator_max(&base.with_g2(2e-4), 20);
        assert!(c1 > 0.0);
        assert!((c2 / c1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn parity_sectors_partition_basis() {
        let p = ModelParams::new(0.1, 1.0, 0.2, 0.0, 0.0);
        let basis = BasisSpec::new(30).unwrap();
        let even = build_parity_sector(&p, basis, ParitySector::Even).unwrap();
        let odd = build_parity_sector(&p, basis, ParitySector::Odd).unwrap();
        assert_eq!(even.dim() + odd.dim(), basis.dim());
        assert_eq!(even.half_bandwidth(), 1);
    }

    #[test]
    fn sector_equals_projected_hamiltonian() {
        // U^T H U with U the embedding must reproduce the sector matrix.
        let p = ModelParams::new(0.2, 1.0, 0.3, 0.0, 0.0);
        let basis = BasisSpec::new(9).unwrap();
        let h = build_hamiltonian(&p, basis).unwrap();
        for sector in [ParitySector::Even, ParitySector::Odd] {
            let hs = build_parity_sector(&p, basis, sector).unwrap();
            let m = basis.n_max + 1;
            for a in 0..m {
                let mut ea = vec![0.0; m];
                ea[a] = 1.0;
                let ua = sector.embed(&ea);
                let hua = h.apply(&ua).unwrap();
                for b in 0..m {
                    let mut eb = vec![0.0; m];
                    eb[b] = 1.0;
                    let ub = sector.embed(&eb);
                    let elem: f64 = ub.iter().zip(&hua).map(|(x, y)| x * y).sum();
                    assert!((elem - hs.get(a, b)).abs() < 1e-14, "{sector:?} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn sector_rejects_two_photon_coupling() {
        let p = ModelParams::new(0.1, 1.0, 0.2, 1e-12, 0.0);
        assert!(matches!(
            build_parity_sector(&p, BasisSpec::new(10).unwrap(), ParitySector::Even),
            Err(Error::ParityBroken { .. })
        ));
    }

    #[test]
    fn decoupled_even_sector_spectrum() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.0, 0.0);
        let h = build_parity_sector(&p, BasisSpec::new(8).unwrap(), ParitySector::Even).unwrap();
        for n in 0..=8 {
            let expected = 0.1 * n as f64 + if n % 2 == 0 { -0.5 } else { 0.5 };
            assert!((h.get(n, n) - expected).abs() < 1e-15);
        }
        let lowest = (0..=8).map(|n| h.get(n, n)).fold(f64::INFINITY, f64::min);
        assert_eq!(lowest, -0.5);
    }
}
