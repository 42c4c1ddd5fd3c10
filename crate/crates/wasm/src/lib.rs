//! Three operations for the browser page: a single ground state, its
//! position-space profile, and a line scan in g1. Couplings arrive in units
//! of `g_s` (g1) and `g_t` (effective g2) and every result is a JSON string.

use rabiq::eigensolve::{ground_state, GroundSolution, TruncationPolicy};
use rabiq::model::{derive_scales, validate};
use rabiq::observables::compute_observables;
use rabiq::wavefunction::{classify_branch, evaluate_default};
use rabiq::ModelParams;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest line scan the page may request.
pub const MAX_SCAN_POINTS: usize = 201;

fn params(omega: f64, big_omega: f64, g1_gs: f64, g2_tilde_gt: f64, chi: f64) -> ModelParams {
    let p = ModelParams::new(omega, big_omega, 0.0, 0.0, chi);
    p.with_g1(g1_gs * p.g_s())
        .with_g2_tilde(g2_tilde_gt * p.g_t())
}

fn solve(p: &ModelParams) -> rabiq::Result<GroundSolution> {
    validate(p)?;
    ground_state(p, &TruncationPolicy::for_params(p))
}

#[derive(Serialize)]
struct PointView {
    energy: f64,
    gap: f64,
    sigma_z: f64,
    sigma_x: f64,
    photon_number: f64,
    p2_ratio: f64,
    n_max_used: usize,
    degenerate: bool,
}

#[derive(Serialize)]
struct ProfileView {
    x: Vec<f64>,
    density: Vec<f64>,
    psi_plus: Vec<f64>,
    psi_minus: Vec<f64>,
    label: &'static str,
    peak_positions: Vec<f64>,
}

#[derive(Serialize)]
struct ScanView {
    g1_over_gs: Vec<f64>,
    sigma_z: Vec<Option<f64>>,
    sigma_x: Vec<Option<f64>>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn point_json(
    omega: f64,
    big_omega: f64,
    g1_gs: f64,
    g2_tilde_gt: f64,
    chi: f64,
) -> Result<String, String> {
    let p = params(omega, big_omega, g1_gs, g2_tilde_gt, chi);
    let sol = solve(&p).map_err(|e| e.to_string())?;
    let obs = compute_observables(&sol, &p).map_err(|e| e.to_string())?;
    to_json(&PointView {
        energy: sol.energy,
        gap: sol.gap,
        sigma_z: obs.sigma_z,
        sigma_x: obs.sigma_x,
        photon_number: obs.photon_number,
        p2_ratio: obs.p2_ratio,
        n_max_used: sol.n_max_used,
        degenerate: sol.degenerate,
    })
}

pub fn profile_json(
    omega: f64,
    big_omega: f64,
    g1_gs: f64,
    g2_tilde_gt: f64,
    chi: f64,
    points: usize,
) -> Result<String, String> {
    let p = params(omega, big_omega, g1_gs, g2_tilde_gt, chi);
    let run = || -> rabiq::Result<ProfileView> {
        let sol = solve(&p)?;
        let scales = derive_scales(&p)?;
        let grid = evaluate_default(&sol, &scales, points.clamp(51, 2001))?;
        let class = classify_branch(&grid, &scales);
        Ok(ProfileView {
            density: grid.density(),
            x: grid.x,
            psi_plus: grid.psi_plus,
            psi_minus: grid.psi_minus,
            label: class.label.as_str(),
            peak_positions: class.peak_positions,
        })
    };
    to_json(&run().map_err(|e| e.to_string())?)
}

/// Points that fail to converge are reported as `null`.
pub fn scan_json(
    omega: f64,
    big_omega: f64,
    g2_tilde_gt: f64,
    chi: f64,
    g1_max_gs: f64,
    points: usize,
) -> Result<String, String> {
    let n = points.clamp(2, MAX_SCAN_POINTS);
    if !(g1_max_gs > 0.0) {
        return Err("g1 range must be positive".into());
    }
    validate(&params(omega, big_omega, 0.0, g2_tilde_gt, chi)).map_err(|e| e.to_string())?;
    let mut view = ScanView {
        g1_over_gs: Vec::with_capacity(n),
        sigma_z: Vec::with_capacity(n),
        sigma_x: Vec::with_capacity(n),
    };
    for i in 0..n {
        let g1 = g1_max_gs * i as f64 / (n - 1) as f64;
        let p = params(omega, big_omega, g1, g2_tilde_gt, chi);
        let obs = solve(&p).and_then(|s| compute_observables(&s, &p)).ok();
        view.g1_over_gs.push(g1);
        view.sigma_z.push(obs.as_ref().map(|o| o.sigma_z));
        view.sigma_x.push(obs.as_ref().map(|o| o.sigma_x));
    }
    to_json(&view)
}

#[wasm_bindgen]
pub fn solve_point(
    omega: f64,
    big_omega: f64,
    g1_gs: f64,
    g2_tilde_gt: f64,
    chi: f64,
) -> Result<String, JsError> {
    point_json(omega, big_omega, g1_gs, g2_tilde_gt, chi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density_profile(
    omega: f64,
    big_omega: f64,
    g1_gs: f64,
    g2_tilde_gt: f64,
    chi: f64,
    points: usize,
) -> Result<String, JsError> {
    profile_json(omega, big_omega, g1_gs, g2_tilde_gt, chi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn scan_g1(
    omega: f64,
    big_omega: f64,
    g2_tilde_gt: f64,
    chi: f64,
    g1_max_gs: f64,
    points: usize,
) -> Result<String, JsError> {
    scan_json(omega, big_omega, g2_tilde_gt, chi, g1_max_gs, points).map_err(|e| JsError::new(&e))
}
