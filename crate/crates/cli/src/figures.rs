//! Pinned figure configurations for `rabiq reproduce`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use rabiq::analytic::{
    boundary_i, boundary_ii, jump_sigma_x, jump_sigma_z, BoundaryCurve, BoundaryKind,
};
use rabiq::eigensolve::{ground_state, TruncationPolicy};
use rabiq::model::{derive_scales, Coupling};
use rabiq::report::{format_number, render_line_svg, write_boundary_csv, Series};
use rabiq::sweep::{
    detect_transitions, estimate_triple_point, measure_jump, run_sweep, Along, Axis, AxisParam,
    FixedParams, SweepSpec, TransitionKind,
};
use rabiq::wavefunction::{classify_branch, evaluate_default, write_wavefunction_csv};
use rabiq::ModelParams;

use crate::{create, execute_sweep, CliResult, Failure};

const FIG1A: &str = include_str!("../fixtures/fig1a.toml");
const FIG1F: &str = include_str!("../fixtures/fig1f.toml");
const FIG2C: &str = include_str!("../fixtures/fig2c.toml");
const FIG2D: &str = include_str!("../fixtures/fig2d.toml");
const FIG3CD: &str = include_str!("../fixtures/fig3cd.toml");
const FIG3E: &str = include_str!("../fixtures/fig3e.toml");

pub const FIGURES: [&str; 6] = ["1a", "1f", "2c", "2d", "3cd", "3e"];

fn parse<T: serde::de::DeserializeOwned>(text: &str, name: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| Failure::Usage(format!("fixture {name}: {e}")))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn sweep_fixture(text: &str, name: &str, out_dir: &Path, jobs: Option<usize>) -> CliResult {
    let mut spec = SweepSpec::from_toml_str(text)
        .map_err(|e| Failure::Usage(format!("fixture {name}: {e}")))?;
    if let Some(j) = jobs {
        spec.jobs = j.max(1);
    }
    execute_sweep(&spec, Some(out_dir))?;
    Ok(())
}

pub fn reproduce(figure: &str, out_dir: &Path, jobs: Option<usize>) -> CliResult {
    match figure {
        "1a" => sweep_fixture(FIG1A, "fig1a", out_dir, jobs),
        "1f" => fig1f(out_dir),
        "2c" => fig2c(out_dir),
        "2d" => fig2d(out_dir, jobs),
        "3cd" => sweep_fixture(FIG3CD, "fig3cd", out_dir, jobs),
        "3e" => fig3e(out_dir, jobs),
        other => Err(Failure::Usage(format!(
            "unknown figure {other:?}; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}

#[derive(Deserialize)]
struct WaveRun {
    label: String,
    g2: Coupling,
}

#[derive(Deserialize)]
struct Fig1f {
    omega: f64,
    #[serde(rename = "Omega")]
    big_omega: f64,
    chi: f64,
    g1: Coupling,
    points: usize,
    runs: Vec<WaveRun>,
}

fn fig1f(out_dir: &Path) -> CliResult {
    let cfg: Fig1f = parse(FIG1F, "fig1f")?;
    let (w, big) = (cfg.omega, cfg.big_omega);
    let mut series = Vec::new();
    for run in &cfg.runs {
        let p = ModelParams::new(
            w,
            big,
            cfg.g1.resolve(w, big),
            run.g2.resolve(w, big),
            cfg.chi,
        );
        let sol = ground_state(&p, &TruncationPolicy::for_params(&p))?;
        let scales = derive_scales(&p)?;
        // common window so the three profiles overlay
        let wide = derive_scales(&p.with_g2(0.0))?;
        let grid = evaluate_default(&sol, &wide, cfg.points)?;
        let label = classify_branch(&grid, &scales).label;
        let mut f = create(&out_dir.join(format!("fig1f_{}.csv", run.label)))?;
        write_wavefunction_csv(&grid, &mut f)?;
        f.flush()?;
        series.push(Series {
            label: format!("g2 = {} ({label})", run.g2),
            points: grid.x.iter().copied().zip(grid.density()).collect(),
        });
    }
    write_text(
        &out_dir.join("fig1f.svg"),
        &render_line_svg(&series, "x", "density", 640, 420),
    )
}

#[derive(Deserialize)]
struct Fig2c {
    omega: f64,
    #[serde(rename = "Omega")]
    big_omega: f64,
    chi: f64,
    gbar2: Vec<f64>,
    tol: f64,
    step: f64,
}

fn fig2c(out_dir: &Path) -> CliResult {
    let cfg: Fig2c = parse(FIG2C, "fig2c")?;
    let base = ModelParams::new(cfg.omega, cfg.big_omega, 0.0, 0.0, cfg.chi);
    let (gs, gt) = (base.g_s(), base.g_t());
    let mut rows = String::from("g2_tilde_over_gt,g1c_over_gs,jump_sigma_x,jump_sigma_x_formula,jump_sigma_z,jump_sigma_z_formula\n");
    let mut sx = (Vec::new(), Vec::new());
    let mut sz = (Vec::new(), Vec::new());
    for &r in &cfg.gbar2 {
        let p = base.with_g2_tilde(r * gt);
        let near = gs * (1.0 - r * r).sqrt();
        let m = measure_jump(&p, (0.5 * near, 1.25 * near), cfg.tol * gs, cfg.step * gs)?;
        let (fx, fz) = (jump_sigma_x(r * gt, gt), jump_sigma_z(r * gt, gt));
        rows.push_str(
            &[
                r,
                m.location / gs,
                m.sigma_x_jump(),
                fx,
                m.sigma_z_jump(),
                fz,
            ]
            .map(format_number)
            .join(","),
        );
        rows.push('\n');
        sx.0.push((r, m.sigma_x_jump()));
        sx.1.push((r, fx));
        sz.0.push((r, m.sigma_z_jump()));
        sz.1.push((r, fz));
    }
    write_text(&out_dir.join("fig2c.csv"), &rows)?;
    let series = vec![
        Series {
            label: "sigma_x jump".into(),
            points: sx.0,
        },
        Series {
            label: "sigma_x formula".into(),
            points: sx.1,
        },
        Series {
            label: "sigma_z jump".into(),
            points: sz.0,
        },
        Series {
            label: "sigma_z formula".into(),
            points: sz.1,
        },
    ];
    write_text(
        &out_dir.join("fig2c.svg"),
        &render_line_svg(&series, "g2~ / g_t", "jump", 640, 420),
    )
}

#[derive(Deserialize)]
struct Fig2d {
    omegas: Vec<f64>,
    sweep: SweepSpec,
}

fn fig2d(out_dir: &Path, jobs: Option<usize>) -> CliResult {
    let cfg: Fig2d = parse(FIG2D, "fig2d")?;
    let mut series = Vec::new();
    for &omega in &cfg.omegas {
        let mut spec = cfg.sweep.clone();
        spec.fixed.omega = omega;
        if let Some(j) = jobs {
            spec.jobs = j.max(1);
        }
        spec.output.csv = Some(format!("fig2d_omega_{omega:e}.csv"));
        spec.validate()?;
        let d = execute_sweep(&spec, Some(out_dir))?;
        let line = |f: fn(&rabiq::sweep::PointResult) -> f64| -> Vec<(f64, f64)> {
            d.rows
                .iter()
                .map(|r| {
                    let x = r.params.g1 / r.params.g_s();
                    (x, r.outcome.as_ref().map(f).unwrap_or(f64::NAN))
                })
                .collect()
        };
        series.push(Series {
            label: format!("sigma_z, omega = {omega:e}"),
            points: line(|o| o.observables.sigma_z),
        });
        series.push(Series {
            label: format!("sigma_x, omega = {omega:e}"),
            points: line(|o| o.observables.sigma_x),
        });
    }
    write_text(
        &out_dir.join("fig2d.svg"),
        &render_line_svg(&series, "g1 / g_s", "expectation", 720, 460),
    )
}

#[derive(Deserialize)]
struct Fig3e {
    omega: f64,
    #[serde(rename = "Omega")]
    big_omega: f64,
    chi: f64,
    g1_range: (f64, f64),
    line_points: usize,
    g2_range: (f64, f64),
    levels: Vec<f64>,
    tol: f64,
}

#[derive(Serialize)]
struct TripleDocument {
    omega: f64,
    #[serde(rename = "Omega")]
    big_omega: f64,
    g1_star_over_gs: f64,
    g2_tilde_star_over_gt: f64,
    g1_uncertainty_over_gs: f64,
    g2_tilde_uncertainty_over_gt: f64,
}

fn fig3e(out_dir: &Path, jobs: Option<usize>) -> CliResult {
    let cfg: Fig3e = parse(FIG3E, "fig3e")?;
    let base = ModelParams::new(cfg.omega, cfg.big_omega, 0.0, 0.0, cfg.chi);
    let (gs, gt) = (base.g_s(), base.g_t());

    let mut numerical_i = Vec::new();
    let mut numerical_ii = Vec::new();
    for &level in &cfg.levels {
        let mut fixed = FixedParams::new(cfg.omega, cfg.big_omega, cfg.chi);
        fixed.g2_tilde = Some(Coupling::energy(level * gt));
        let mut spec = SweepSpec::new(
            Axis::new(
                AxisParam::G1,
                cfg.g1_range.0 * gs,
                cfg.g1_range.1 * gs,
                cfg.line_points,
            ),
            None,
            fixed,
        );
        spec.jobs = jobs.unwrap_or(1).max(1);
        let d = run_sweep(&spec)?;
        for t in detect_transitions(&d, Along::Axis1, 0) {
            match t.kind {
                TransitionKind::I => numerical_i.push((t.location, level * gt)),
                TransitionKind::II | TransitionKind::LowFreqMerged => {
                    numerical_ii.push((t.location, level * gt))
                }
            }
        }
    }
    let curves = [
        BoundaryCurve {
            kind: BoundaryKind::NumericalI,
            points: numerical_i.clone(),
            params: base,
        },
        BoundaryCurve {
            kind: BoundaryKind::NumericalII,
            points: numerical_ii.clone(),
            params: base,
        },
    ];
    let mut f = create(&out_dir.join("fig3e.csv"))?;
    write_boundary_csv(&curves, &mut f)?;
    f.flush()?;

    let t = estimate_triple_point(
        &base,
        (cfg.g1_range.0 * gs, cfg.g1_range.1 * gs),
        (cfg.g2_range.0 * gt, cfg.g2_range.1 * gt),
        cfg.tol * gs,
    )?;
    let doc = TripleDocument {
        omega: cfg.omega,
        big_omega: cfg.big_omega,
        g1_star_over_gs: t.g1_star / gs,
        g2_tilde_star_over_gt: t.g2_star / gt,
        g1_uncertainty_over_gs: t.uncertainty.0 / gs,
        g2_tilde_uncertainty_over_gt: t.uncertainty.1 / gt,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(rabiq::Error::from)?;
    write_text(&out_dir.join("fig3e.json"), &(json + "\n"))?;

    // g1 / g_s against log10(g2~ / g_t)
    let to_plot = |pts: &[(f64, f64)]| -> Vec<(f64, f64)> {
        pts.iter()
            .map(|&(g1, g2)| ((g2 / gt).log10(), g1 / gs))
            .collect()
    };
    let closed_i = boundary_i(cfg.omega, cfg.big_omega)? / gs;
    let lo = cfg
        .levels
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .log10();
    let hi = cfg
        .levels
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .log10();
    let closed_ii: Vec<(f64, f64)> = (0..=60)
        .filter_map(|k| {
            let gbar1 = 1.01 + 2.99 * k as f64 / 60.0;
            let b = boundary_ii(cfg.omega, cfg.big_omega, gbar1).ok()?;
            let x = b.gbar2.log10();
            (!b.underflow && x >= lo && x <= hi).then_some((x, gbar1))
        })
        .collect();
    let series = vec![
        Series {
            label: "numerical I".into(),
            points: to_plot(&numerical_i),
        },
        Series {
            label: "numerical II".into(),
            points: to_plot(&numerical_ii),
        },
        Series {
            label: "closed-form I".into(),
            points: vec![(lo, closed_i), (hi, closed_i)],
        },
        Series {
            label: "closed-form II".into(),
            points: closed_ii,
        },
        Series {
            label: "merge point".into(),
            points: vec![
                ((t.g2_star / gt).log10(), t.g1_star / gs - 0.02),
                ((t.g2_star / gt).log10(), t.g1_star / gs + 0.02),
            ],
        },
    ];
    write_text(
        &out_dir.join("fig3e.svg"),
        &render_line_svg(&series, "log10(g2~ / g_t)", "g1 / g_s", 640, 420),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        for (text, name) in [(FIG1A, "1a"), (FIG3CD, "3cd")] {
            SweepSpec::from_toml_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        let f: Fig2d = parse(FIG2D, "2d").unwrap();
        f.sweep.validate().unwrap();
        assert_eq!(f.omegas.len(), 3);
        let _: Fig1f = parse(FIG1F, "1f").unwrap();
        let _: Fig2c = parse(FIG2C, "2c").unwrap();
        let _: Fig3e = parse(FIG3E, "3e").unwrap();
    }
}
