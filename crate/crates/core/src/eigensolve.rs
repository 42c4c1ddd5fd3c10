//! Lowest eigenpairs of the banded Hamiltonian.
//!
//! The iterative path builds a Krylov basis of `(H − σ)⁻¹` from a banded
//! LDLᵀ factorization, keeps it fully orthogonal, and extracts Ritz pairs
//! by Rayleigh–Ritz on `H` itself. Working with `H` rather than the
//! tridiagonal of the inverse keeps nearly degenerate doublets resolved down
//! to splittings many orders below the shift distance.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analytic::semiclassical_energy;
use crate::error::{Error, Result};
use crate::fockspace::{
    build_hamiltonian, build_parity_sector, BandedSymMatrix, BasisSpec, ParitySector,
};
use crate::model::{derive_scales, validate, ModelParams};

/// Largest dimension for which the dense fallback is attempted.
pub const DENSE_FALLBACK_MAX_DIM: usize = 512;

/// Banded LDLᵀ factorization without pivoting.
///
/// Fine for the positive definite `H − σ` produced by a shift below the
/// spectrum; for an indefinite shift it still succeeds unless a pivot
/// vanishes, and the pivot signs then give the inertia.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    dim: usize,
    bw: usize,
    /// Row `i` holds `L[i][i - bw + t]` at `t`.
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

impl BandedLdlt {
    pub fn factor(m: &BandedSymMatrix, shift: f64) -> Result<Self> {
        let n = m.dim();
        let bw = m.half_bandwidth();
        let mut lower = vec![0.0; n * bw];
        let mut pivots = vec![0.0; n];
        let scale = m.norm_inf().max(shift.abs()).max(f64::MIN_POSITIVE);
        let tiny = 1e3 * f64::EPSILON * scale;
        // l_at(i, j) for j in [i-bw, i)
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut d = m.get(j, j) - shift;
            for k in k0..j {
                let l = lower[j * bw + (k + bw - j)];
                d -= l * l * pivots[k];
            }
            if d.abs() <= tiny || !d.is_finite() {
                return Err(Error::FactorizationSingular { shift });
            }
            pivots[j] = d;
            for i in (j + 1)..(j + 1 + bw).min(n) {
                let mut s = m.get(i, j);
                for k in i.saturating_sub(bw)..j {
                    s -= lower[i * bw + (k + bw - i)] * lower[j * bw + (k + bw - j)] * pivots[k];
                }
                lower[i * bw + (j + bw - i)] = s / d;
            }
        }
        Ok(Self {
            dim: n,
            bw,
            lower,
            pivots,
        })
    }

    /// Number of eigenvalues below the shift (Sylvester inertia).
    pub fn negative_count(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    /// Solves `(A − σ) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.dim, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.lower[i * bw + (k + bw - i)] * b[k];
            }
            b[i] = s;
        }
        for i in 0..n {
            b[i] /= self.pivots[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for r in (i + 1)..(i + 1 + bw).min(n) {
                s -= self.lower[r * bw + (i + bw - r)] * b[r];
            }
            b[i] = s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMethod {
    /// Shift-invert Krylov, dense fallback on failure for small matrices.
    Auto,
    Krylov,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Residual target relative to `scale`.
    pub tol: f64,
    /// Spectral scale the residual is measured against; defaults to the
    /// matrix infinity norm.
    pub scale: Option<f64>,
    /// Shift below the wanted eigenvalues; defaults to a Gershgorin bound.
    pub shift: Option<f64>,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub method: SolverMethod,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            scale: None,
            shift: None,
            max_basis: 80,
            max_restarts: 30,
            method: SolverMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// ‖H v − λ v‖₂
    pub residual: f64,
}

/// Deterministic start vector: a unit-mean sequence with a golden-ratio
/// modulation so that no symmetry sector is missed.
pub fn seed_vector(dim: usize, salt: usize) -> Vec<f64> {
    let phi = 0.618_033_988_749_894_9;
    let offset = 0.5 * salt as f64 + 0.1;
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + ((i as f64 + offset) * phi * (1.0 + salt as f64)).fract() - 0.5)
        .collect();
    normalize(&mut v);
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthogonalizes `w` against `basis` twice; returns the norm before and
/// after.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> (f64, f64) {
    let before = norm(w);
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
    (before, norm(w))
}

/// Flips the sign so that the largest-magnitude component is positive.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `k` lowest eigenpairs of `m`, ascending.
pub fn extremal_eigenpairs(
    m: &BandedSymMatrix,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    if k == 0 || k > 4 || k > m.dim() {
        return Err(Error::InvalidParams(format!(
            "requested {k} eigenpairs from a {}-dimensional matrix (1..=4 allowed)",
            m.dim()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    match opts.method {
        SolverMethod::Dense => dense_eigenpairs(m, k),
        SolverMethod::Krylov => krylov_eigenpairs(m, k, opts),
        SolverMethod::Auto => match krylov_eigenpairs(m, k, opts) {
            Err(Error::NoConvergence { .. }) | Err(Error::FactorizationSingular { .. })
                if m.dim() <= DENSE_FALLBACK_MAX_DIM =>
            {
                dense_eigenpairs(m, k)
            }
            other => other,
        },
    }
}

fn dense_eigenpairs(m: &BandedSymMatrix, k: usize) -> Result<Vec<EigenPair>> {
    let n = m.dim();
    let a = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order
        .into_iter()
        .take(k)
        .map(|idx| {
            let mut vector: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            normalize(&mut vector);
            canonical_sign(&mut vector);
            let value = eig.eigenvalues[idx];
            let residual = residual_of(m, value, &vector)?;
            Ok(EigenPair {
                value,
                vector,
                residual,
            })
        })
        .collect()
}

fn residual_of(m: &BandedSymMatrix, value: f64, v: &[f64]) -> Result<f64> {
    let mut hv = m.apply(v)?;
    axpy(-value, v, &mut hv);
    Ok(norm(&hv))
}

/// Factors `H − σ` with `σ` moved down until it lies below the spectrum.
fn factor_below_spectrum(m: &BandedSymMatrix, shift: f64, scale: f64) -> Result<(BandedLdlt, f64)> {
    let mut sigma = shift;
    let mut step = 1e-3 * scale.max(f64::MIN_POSITIVE);
    let lower_bound = m.gershgorin_lower() - 1e-3 * scale;
    for _ in 0..80 {
        match BandedLdlt::factor(m, sigma) {
            Ok(f) if f.negative_count() == 0 => return Ok((f, sigma)),
            Ok(_) | Err(Error::FactorizationSingular { .. }) => {
                sigma -= step;
                step *= 2.0;
                if sigma < lower_bound {
                    sigma = lower_bound;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::FactorizationSingular { shift: sigma })
}

struct RitzState {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn rayleigh_ritz(
    basis: &[Vec<f64>],
    images: &[Vec<f64>],
    projected: &DMatrix<f64>,
    k: usize,
) -> RitzState {
    let m = basis.len();
    let g = projected.view((0, 0), (m, m)).into_owned();
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let dim = basis[0].len();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &idx in order.iter().take(k.min(m)) {
        let theta = eig.eigenvalues[idx];
        let y = eig.eigenvectors.column(idx);
        let mut x = vec![0.0; dim];
        let mut hx = vec![0.0; dim];
        for (j, (v, w)) in basis.iter().zip(images).enumerate() {
            axpy(y[j], v, &mut x);
            axpy(y[j], w, &mut hx);
        }
        let xn = normalize(&mut x);
        hx.iter_mut().for_each(|h| *h /= xn);
        axpy(-theta, &x, &mut hx);
        values.push(theta);
        residuals.push(norm(&hx));
        vectors.push(x);
    }
    RitzState {
        values,
        vectors,
        residuals,
    }
}

fn krylov_eigenpairs(m: &BandedSymMatrix, k: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let dim = m.dim();
    let scale = opts
        .scale
        .unwrap_or_else(|| m.norm_inf())
        .max(f64::MIN_POSITIVE);
    let target = opts.tol * scale;
    let shift = opts
        .shift
        .unwrap_or_else(|| m.gershgorin_lower() - 1e-3 * scale);
    let (fact, _sigma) = factor_below_spectrum(m, shift, scale)?;

    let max_basis = opts.max_basis.max(k + 8).min(dim);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut projected = DMatrix::<f64>::zeros(max_basis, max_basis);
    let mut salt = 0usize;
    let mut next = seed_vector(dim, salt);
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0usize;

    for restart in 0..=opts.max_restarts {
        loop {
            // expand with (H − σ)⁻¹ next, orthogonalized
            let mut w = next.clone();
            if !basis.is_empty() || restart > 0 {
                fact.solve_in_place(&mut w);
            }
            iterations += 1;
            let (before, after) = orthogonalize(&basis, &mut w);
            if after <= 1e-10 * before || after == 0.0 {
                // invariant subspace: continue from a fresh deterministic vector
                salt += 1;
                if salt > 64 {
                    break;
                }
                next = seed_vector(dim, salt);
                let (b2, a2) = orthogonalize(&basis, &mut next);
                if a2 <= 1e-10 * b2 {
                    break;
                }
                normalize(&mut next);
                continue;
            }
            normalize(&mut w);
            let hw = m.apply(&w)?;
            let j = basis.len();
            for (i, v) in basis.iter().enumerate() {
                let g = dot(v, &hw);
                projected[(i, j)] = g;
                projected[(j, i)] = g;
            }
            projected[(j, j)] = dot(&w, &hw);
            next = w.clone();
            basis.push(w);
            images.push(hw);

            let len = basis.len();
            let check = len >= k && (len % 4 == 0 || len == max_basis || len == dim);
            if check {
                let ritz = rayleigh_ritz(&basis, &images, &projected, k);
                let worst = ritz.residuals.iter().copied().fold(0.0, f64::max);
                best_residual = best_residual.min(worst);
                if ritz.values.len() == k && worst <= target {
                    return Ok(finish(ritz));
                }
                if len == max_basis || len == dim {
                    if len == dim {
                        // complete basis: Ritz pairs are exact up to rounding
                        return Ok(finish(ritz));
                    }
                    // thick restart: keep a few Ritz vectors, expand from the
                    // least converged residual direction
                    let keep = (k + 2).min(len);
                    let wide = rayleigh_ritz(&basis, &images, &projected, keep);
                    let worst_idx = ritz
                        .residuals
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    let mut seed = ritz.vectors[worst_idx].clone();
                    let hs = m.apply(&seed)?;
                    let theta = ritz.values[worst_idx];
                    // residual direction r = H x − θ x
                    seed.iter_mut()
                        .zip(&hs)
                        .for_each(|(s, h)| *s = h - theta * *s);
                    basis.clear();
                    images.clear();
                    projected.fill(0.0);
                    for x in wide.vectors {
                        let mut x = x;
                        let (_, a) = orthogonalize(&basis, &mut x);
                        if a < 1e-12 {
                            continue;
                        }
                        normalize(&mut x);
                        let hx = m.apply(&x)?;
                        let j = basis.len();
                        for (i, v) in basis.iter().enumerate() {
                            let g = dot(v, &hx);
                            projected[(i, j)] = g;
                            projected[(j, i)] = g;
                        }
                        projected[(j, j)] = dot(&x, &hx);
                        basis.push(x);
                        images.push(hx);
                    }
                    next = seed;
                    break;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        iterations,
        best_residual,
    })
}

fn finish(ritz: RitzState) -> Vec<EigenPair> {
    ritz.values
        .into_iter()
        .zip(ritz.vectors)
        .zip(ritz.residuals)
        .map(|((value, mut vector), residual)| {
            canonical_sign(&mut vector);
            EigenPair {
                value,
                vector,
                residual,
            }
        })
        .collect()
}

/// Adaptive truncation schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub n_initial: usize,
    pub growth_factor: f64,
    /// Absolute energy tolerance between successive truncations.
    pub energy_tol: f64,
    /// Allowed probability weight in the top 10% of Fock levels.
    pub tail_tol: f64,
    pub n_cap: usize,
}

impl TruncationPolicy {
    /// Defaults scaled to the qubit splitting: energy tolerance `1e-10 Ω`.
    pub fn for_params(p: &ModelParams) -> Self {
        Self {
            energy_tol: 1e-10 * p.big_omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_initial < 8 {
            return Err(Error::InvalidParams("n_initial must be at least 8".into()));
        }
        if !(self.growth_factor >= 1.5) {
            return Err(Error::InvalidParams(
                "growth_factor must be at least 1.5".into(),
            ));
        }
        if self.n_cap < self.n_initial {
            return Err(Error::InvalidParams("n_cap must be >= n_initial".into()));
        }
        if !(self.energy_tol > 0.0 && self.tail_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            n_initial: 32,
            growth_factor: 1.5,
            energy_tol: 1e-10,
            tail_tol: 1e-12,
            n_cap: 16384,
        }
    }
}

/// One rung of the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationStep {
    pub n_max: usize,
    pub energy: f64,
    pub tail_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSolution {
    pub energy: f64,
    pub excited_energy: f64,
    pub gap: f64,
    /// Coefficients over `|n, s⟩`, index `2n + s`.
    pub coeffs: Vec<f64>,
    pub n_max_used: usize,
    pub residual: f64,
    pub degenerate: bool,
    pub params: ModelParams,
    pub spectral_scale: f64,
    /// Parity sector of the state when solved through the g2 = 0 route.
    pub sector: Option<ParitySector>,
    pub ladder: Vec<TruncationStep>,
}

impl GroundSolution {
    pub fn degeneracy_threshold(&self) -> f64 {
        degeneracy_threshold(self.spectral_scale)
    }
}

/// `max(Ω, ω n_max, |g1| √n_max, |g2| n_max)`
pub fn spectral_scale(p: &ModelParams, n_max: usize) -> f64 {
    let n = n_max as f64;
    p.big_omega
        .max(p.omega * n)
        .max(p.g1.abs() * n.sqrt())
        .max(p.g2.abs() * n)
}

/// Doublets split by less than this are treated as degenerate.
pub fn degeneracy_threshold(scale: f64) -> f64 {
    100.0 * f64::EPSILON * scale
}

/// Starting truncation `max(n_initial, ⌈x0²/2 + 10 √(x0²/2) + 20⌉)`.
pub fn initial_truncation(p: &ModelParams, policy: &TruncationPolicy) -> Result<usize> {
    let scales = derive_scales(p)?;
    let half_sq = scales.x0_max().powi(2) / 2.0;
    let estimate = (half_sq + 10.0 * half_sq.sqrt() + 20.0).ceil();
    if !estimate.is_finite() || estimate > policy.n_cap as f64 {
        return Ok(policy.n_cap.max(policy.n_initial));
    }
    Ok(policy.n_initial.max(estimate as usize))
}

fn tail_weight(coeffs: &[f64], n_max: usize) -> f64 {
    let levels = n_max + 1;
    let top = ((levels as f64) * 0.1).ceil() as usize;
    let first = levels - top.max(1);
    coeffs[2 * first..].iter().map(|c| c * c).sum()
}

struct FixedSolve {
    energy: f64,
    excited: f64,
    coeffs: Vec<f64>,
    residual: f64,
    sector: Option<ParitySector>,
}

fn shift_for(p: &ModelParams) -> Result<f64> {
    let sc = semiclassical_energy(p)?;
    Ok(sc.energy - 0.5 * p.omega)
}

/// Lowest two states at a fixed truncation.
pub fn solve_fixed(p: &ModelParams, n_max: usize, method: SolverMethod) -> Result<GroundSolution> {
    let basis = BasisSpec::new(n_max)?;
    validate(p)?;
    let fixed = solve_fixed_inner(p, basis, method)?;
    let scale = spectral_scale(p, n_max);
    Ok(assemble(p, fixed, n_max, scale, Vec::new()))
}

fn solve_fixed_inner(
    p: &ModelParams,
    basis: BasisSpec,
    method: SolverMethod,
) -> Result<FixedSolve> {
    let scale = spectral_scale(p, basis.n_max);
    let opts = EigenOptions {
        tol: 1e-12,
        scale: Some(scale),
        shift: Some(shift_for(p)?),
        method,
        ..EigenOptions::default()
    };
    if p.g2 == 0.0 {
        let even = extremal_eigenpairs(
            &build_parity_sector(p, basis, ParitySector::Even)?,
            2,
            &opts,
        )?;
        let odd =
            extremal_eigenpairs(&build_parity_sector(p, basis, ParitySector::Odd)?, 2, &opts)?;
        let threshold = degeneracy_threshold(scale);
        let (ground, sector, other) = if odd[0].value < even[0].value - threshold {
            (&odd, ParitySector::Odd, &even)
        } else {
            (&even, ParitySector::Even, &odd)
        };
        let excited = ground[1].value.min(other[0].value);
        let mut coeffs = sector.embed(&ground[0].vector);
        canonical_sign(&mut coeffs);
        Ok(FixedSolve {
            energy: ground[0].value,
            excited,
            coeffs,
            residual: ground[0].residual,
            sector: Some(sector),
        })
    } else {
        let h = build_hamiltonian(p, basis)?;
        let pairs = extremal_eigenpairs(&h, 2, &opts)?;
        Ok(FixedSolve {
            energy: pairs[0].value,
            excited: pairs[1].value,
            coeffs: pairs[0].vector.clone(),
            residual: pairs[0].residual,
            sector: None,
        })
    }
}

fn assemble(
    p: &ModelParams,
    fixed: FixedSolve,
    n_max: usize,
    scale: f64,
    ladder: Vec<TruncationStep>,
) -> GroundSolution {
    let gap = (fixed.excited - fixed.energy).max(0.0);
    GroundSolution {
        energy: fixed.energy,
        excited_energy: fixed.excited,
        gap,
        coeffs: fixed.coeffs,
        n_max_used: n_max,
        residual: fixed.residual,
        degenerate: gap < degeneracy_threshold(scale),
        params: *p,
        spectral_scale: scale,
        sector: fixed.sector,
        ladder,
    }
}

/// Ground state with adaptive truncation.
///
/// Truncations grow geometrically until the ground energy changes by less
/// than `energy_tol` between rungs and the top 10% of Fock levels carry
/// less than `tail_tol` of the weight. The returned state is the one at the
/// smaller truncation of the converged pair. At `g2 = 0` the two parity
/// sectors are solved separately.
pub fn ground_state(p: &ModelParams, policy: &TruncationPolicy) -> Result<GroundSolution> {
    ground_state_with(p, policy, SolverMethod::Auto)
}

pub fn ground_state_with(
    p: &ModelParams,
    policy: &TruncationPolicy,
    method: SolverMethod,
) -> Result<GroundSolution> {
    validate(p)?;
    policy.validate()?;
    let mut n_max = initial_truncation(p, policy)?;
    let mut ladder: Vec<TruncationStep> = Vec::new();
    let mut previous: Option<(usize, FixedSolve)> = None;
    loop {
        let fixed = solve_fixed_inner(p, BasisSpec::new(n_max)?, method)?;
        let tail = tail_weight(&fixed.coeffs, n_max);
        ladder.push(TruncationStep {
            n_max,
            energy: fixed.energy,
            tail_weight: tail,
        });
        if let Some((n_prev, prev)) = previous.take() {
            let prev_tail = ladder[ladder.len() - 2].tail_weight;
            if (fixed.energy - prev.energy).abs() < policy.energy_tol && prev_tail < policy.tail_tol
            {
                let scale = spectral_scale(p, n_prev);
                return Ok(assemble(p, prev, n_prev, scale, ladder));
            }
        }
        if n_max >= policy.n_cap {
            return Err(Error::TruncationCapExceeded {
                cap: policy.n_cap,
                last_n_max: n_max,
            });
        }
        let grown = ((n_max as f64) * policy.growth_factor).ceil() as usize;
        previous = Some((n_max, fixed));
        n_max = grown.min(policy.n_cap).max(n_max + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(i: usize) -> f64 {
        ((i as f64 * 0.754_877_666_246_692_7 + 0.3).fract() - 0.5) * 2.0
    }

    fn random_banded(dim: usize, bw: usize, salt: usize) -> BandedSymMatrix {
        let mut m = BandedSymMatrix::zeros(dim, bw);
        for k in 0..=bw {
            for i in 0..dim - k {
                m.set(i, i + k, pseudo(salt * 7919 + 31 * i + k));
            }
        }
        m
    }

    #[test]
    fn ldlt_solves_and_counts_inertia() {
        let m = random_banded(40, 3, 1);
        let dense = dense_eigenpairs(&m, 4).unwrap();
        let sigma = (dense[1].value + dense[2].value) / 2.0;
        let f = BandedLdlt::factor(&m, sigma).unwrap();
        assert_eq!(f.negative_count(), 2);
        let x: Vec<f64> = (0..40).map(|i| pseudo(i + 500)).collect();
        let mut b = m.apply(&x).unwrap();
        axpy(-sigma, &x, &mut b);
        f.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-8);
        }
    }

    #[test]
    fn krylov_matches_dense_on_random_matrices() {
        for salt in 0..6 {
            let dim = 50 + 60 * salt;
            let m = random_banded(dim, 4, salt + 3);
            let opts = EigenOptions {
                method: SolverMethod::Krylov,
                max_basis: 120,
                ..EigenOptions::default()
            };
            let it = extremal_eigenpairs(&m, 3, &opts).unwrap();
            let de = dense_eigenpairs(&m, 3).unwrap();
            for (a, b) in it.iter().zip(&de) {
                assert!(
                    (a.value - b.value).abs() <= 1e-10 * b.value.abs().max(1.0),
                    "dim {dim}: {} vs {}",
                    a.value,
                    b.value
                );
            }
        }
    }

    #[test]
    fn decoupled_ground_vector() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.0, 0.0);
        let h = build_hamiltonian(&p, BasisSpec::new(30).unwrap()).unwrap();
        let opts = EigenOptions {
            method: SolverMethod::Krylov,
            ..EigenOptions::default()
        };
        let pairs = extremal_eigenpairs(&h, 1, &opts).unwrap();
        assert!((pairs[0].value + 0.5).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = &pairs[0].vector;
        assert!((v[0].abs() - r).abs() < 1e-10);
        assert!((v[0] + v[1]).abs() < 1e-10);
        assert!(v[2..].iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn rejects_bad_requests() {
        let m = BandedSymMatrix::identity(10);
        assert!(extremal_eigenpairs(&m, 0, &EigenOptions::default()).is_err());
        assert!(extremal_eigenpairs(&m, 5, &EigenOptions::default()).is_err());
        let bad = EigenOptions {
            tol: 0.0,
            ..EigenOptions::default()
        };
        assert!(extremal_eigenpairs(&m, 1, &bad).is_err());
    }

    #[test]
    fn trivial_ground_state_first_pass() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.0, 0.0);
        let policy = TruncationPolicy::default();
        let sol = ground_state(&p, &policy).unwrap();
        assert!((sol.energy + 0.5).abs() < 1e-12);
        assert_eq!(sol.n_max_used, policy.n_initial);
    }

    #[test]
    fn policy_validation() {
        let mut p = TruncationPolicy::default();
        p.n_initial = 4;
        assert!(p.validate().is_err());
        let mut p = TruncationPolicy::default();
        p.growth_factor = 1.2;
        assert!(p.validate().is_err());
        let mut p = TruncationPolicy::default();
        p.n_cap = 10;
        assert!(p.validate().is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let base = ModelParams::new(0.001, 1.0, 0.0, 0.0, 0.0);
        let p = base
            .with_g1(2.0 * base.g_s())
            .with_g2_tilde(0.5 * base.g_t());
        let policy = TruncationPolicy {
            n_cap: 64,
            ..TruncationPolicy::default()
        };
        assert!(matches!(
            ground_state(&p, &policy),
            Err(Error::TruncationCapExceeded { cap: 64, .. })
        ));
    }

    #[test]
    fn sector_route_at_zero_two_photon_coupling() {
        let base = ModelParams::new(0.1, 1.0, 0.0, 0.0, 0.0);
        let p = base.with_g1(1.2 * base.g_s());
        let sol = ground_state(&p, &TruncationPolicy::default()).unwrap();
        assert!(sol.sector.is_some());
        let full = solve_fixed(&p.with_g2(1e-300), sol.n_max_used, SolverMethod::Dense).unwrap();
        assert!((sol.energy - full.energy).abs() < 1e-10);
    }
}
