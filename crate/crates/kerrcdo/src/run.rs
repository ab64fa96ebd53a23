//! Scenario drivers.

use std::collections::BTreeMap;
use std::time::Instant;

use kerrcdo_core::cdo::{convergence_scan, CdoParams};
use kerrcdo_core::fock::{cat_state, density_from_pure, fidelity, tensor, DensityMatrix};
use kerrcdo_core::mzi::{prepare_superposition, superposition_target, MziParams};
use kerrcdo_core::tomography::{sample_chi_grid, wigner_direct_many, wigner_from_chi, ChiGrid, TomographySetup, WignerGrid};
use kerrcdo_core::{Complex64, ModeState};
use serde_json::{json, Value};

use crate::config::{Job, Scenario};
use crate::output::{num, OutputDir, RunReport, AMPLITUDE_HEADER, CHI_HEADER, SCAN_HEADER, WIGNER_HEADER};
use crate::state::sign_symbol;
use crate::value::Cplx;
use crate::CliError;

type Summary = BTreeMap<String, Value>;

struct Outcome {
    summary: Summary,
    tolerances_met: bool,
}

/// Run one job, writing its files and `report.json` into `job.out`.
pub fn run(job: &Job) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut out = OutputDir::create(&job.out)?;
    let outcome = match job.scenario {
        Scenario::CdoFidelity => cdo_fidelity(job, &mut out)?,
        Scenario::Prepare | Scenario::Cat => prepare(job, &mut out)?,
        Scenario::Chi => chi(job, &mut out)?,
        Scenario::Wigner => wigner(job, &mut out)?,
    };
    let report = RunReport {
        scenario: job.scenario,
        config: job.echo(),
        files: out.files().to_vec(),
        summary: outcome.summary,
        tolerances_met: outcome.tolerances_met,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    report.write(out.root())?;
    Ok(report)
}

fn cplx(z: Complex64) -> Value {
    Value::String(Cplx(z).to_string())
}

fn cdo_fidelity(job: &Job, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let probe_b = ModeState::from_amplitudes(vec![
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ])?;
    let probe = tensor(&job.state.build(job.dim_a)?, &probe_b);
    let scan = match convergence_scan(job.beta, &job.thetas, &probe) {
        Ok(scan) => scan,
        Err(e) => {
            let theta = job.thetas.iter().find(|&&t| convergence_scan(job.beta, &[t], &probe).is_err());
            return Err(match theta {
                Some(t) => CliError::Config(format!("theta = {t}: {e}")),
                None => e.into(),
            });
        }
    };
    let rows = scan
        .rows
        .iter()
        .map(|r| vec![num(r.theta), num(r.alpha.re), num(r.alpha.im), num(r.infidelity)]);
    out.csv("cdo_scan.csv", &SCAN_HEADER, rows)?;
    let orders: Vec<Value> = scan.rows.iter().map(|r| r.order.map_or(Value::Null, Value::from)).collect();
    out.json(
        "cdo_scan.json",
        &json!({
            "beta": cplx(job.beta),
            "theta": job.thetas,
            "dim_a": job.dim_a.get(),
            "dim_b": 2,
            "probe_a": job.state.to_string(),
            "probe_b": "(|0> + |1>)/sqrt2",
            "monotone_decreasing": scan.monotone_decreasing,
            "local_order": orders,
        }),
    )?;
    let mut summary = Summary::new();
    summary.insert("rows".into(), scan.rows.len().into());
    summary.insert("monotone_decreasing".into(), scan.monotone_decreasing.into());
    summary.insert("estimated_order".into(), scan.estimated_order().map_or(Value::Null, Value::from));
    let worst = scan.rows.iter().map(|r| r.infidelity).fold(0.0, f64::max);
    summary.insert("max_infidelity".into(), worst.into());
    Ok(Outcome { summary, tolerances_met: true })
}

fn prepare(job: &Job, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let psi = job.state.build(job.dim_a)?;
    let params = MziParams::balanced(CdoParams::from_beta(job.beta, job.theta())?, job.mode.into());
    let heralded = prepare_superposition(&psi, job.sign, &params)?;
    let target = match job.scenario {
        Scenario::Cat => cat_state(job.alpha0, job.sign, job.dim_a)?,
        _ => superposition_target(&psi, job.beta, job.sign)?,
    };
    let state = &heralded.conditional_state;
    let fid = fidelity(state, &target)?;
    let table: Vec<Value> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| json!({ "n": n, "re": a.re, "im": a.im, "probability": a.norm_sqr() }))
        .collect();
    let rows = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| vec![n.to_string(), num(a.re), num(a.im), num(a.norm_sqr())]);
    out.csv("amplitudes.csv", &AMPLITUDE_HEADER, rows)?;
    out.json(
        "prepared.json",
        &json!({
            "input": job.state.to_string(),
            "beta": cplx(job.beta),
            "sign": sign_symbol(job.sign),
            "theta": job.theta(),
            "alpha": cplx(params.cdo().alpha()),
            "eta": params.eta(),
            "mode": job.mode,
            "dim_a": job.dim_a.get(),
            "detector": format!("{:?}", heralded.event),
            "success_probability": heralded.probability,
            "fidelity_to_target": fid,
            "target": match job.scenario {
                Scenario::Cat => format!("cat {} {}", Cplx(job.alpha0), sign_symbol(job.sign)),
                _ => format!("|psi> {} D(beta)|psi>", sign_symbol(job.sign)),
            },
            "amplitudes": table,
        }),
    )?;
    let mut summary = Summary::new();
    summary.insert("success_probability".into(), heralded.probability.into());
    summary.insert("fidelity".into(), fid.into());
    summary.insert("mean_photon_number".into(), state.mean_photon_number().into());
    summary.insert("tail_mass".into(), state.tail_mass().into());
    let met = job.min_fidelity.is_none_or(|m| fid >= m);
    Ok(Outcome { summary, tolerances_met: met })
}

fn setup(job: &Job) -> TomographySetup {
    TomographySetup { theta: job.theta(), mode: job.mode.into() }
}

fn write_chi(job: &Job, out: &mut OutputDir, grid: &ChiGrid) -> Result<Summary, CliError> {
    let rows = grid.samples.iter().map(|s| {
        vec![
            num(s.beta.re),
            num(s.beta.im),
            num(s.chi.re),
            num(s.chi.im),
            num(s.dp0),
            num(s.dp_half_pi),
            s.shots.map_or(String::new(), |m| m.to_string()),
        ]
    });
    out.csv("chi.csv", &CHI_HEADER, rows)?;
    let max_beta = grid.samples.iter().map(|s| s.beta.norm()).fold(0.0, f64::max);
    out.json(
        "chi.json",
        &json!({
            "state": job.state.to_string(),
            "theta": job.theta(),
            "alpha": "i beta / theta",
            "alpha_max_abs": max_beta / job.theta().abs(),
            "mode": job.mode,
            "dim_a": job.dim_a.get(),
            "grid": { "half_extent": grid.half_extent(), "spacing": grid.spacing, "side": grid.side() },
            "xi0": [0.0, std::f64::consts::FRAC_PI_2],
            "shots": job.shots.map(|s| s.shots),
            "seed": job.shots.map(|s| s.seed),
            "efficiency": job.shots.map(|s| s.efficiency),
        }),
    )?;
    let n = grid.half_points as isize;
    let boundary = grid
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let (i, j) = ((k % grid.side()) as isize - n, (k / grid.side()) as isize - n);
            i.abs() == n || j.abs() == n
        })
        .map(|(_, s)| s.chi.norm())
        .fold(0.0, f64::max);
    let origin = grid.at(0, 0).chi;
    let mut summary = Summary::new();
    summary.insert("chi_origin".into(), cplx(origin));
    summary.insert("max_abs_chi".into(), grid.samples.iter().map(|s| s.chi.norm()).fold(0.0, f64::max).into());
    summary.insert("boundary_max_abs_chi".into(), boundary.into());
    summary.insert("conjugation_defect".into(), grid.conjugation_defect().into());
    summary.insert("points".into(), grid.samples.len().into());
    Ok(summary)
}

fn measure(job: &Job) -> Result<(DensityMatrix, ChiGrid), CliError> {
    let rho = density_from_pure(&job.state.build(job.dim_a)?);
    let grid = sample_chi_grid(&setup(job), &rho, job.grid.b, job.grid.h, job.shots)?;
    Ok((rho, grid))
}

fn chi(job: &Job, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let (_, grid) = measure(job)?;
    Ok(Outcome { summary: write_chi(job, out, &grid)?, tolerances_met: true })
}

fn wigner(job: &Job, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let (rho, grid) = measure(job)?;
    let mut summary = write_chi(job, out, &grid)?;
    let w: WignerGrid = wigner_from_chi(&grid, job.grid.z, job.grid.g)?;
    let points: Vec<Complex64> = (0..w.values.len()).map(|k| w.point(k)).collect();
    let oracle = wigner_direct_many(&rho, &points)?;
    let max_error = w.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rows = points.iter().zip(&w.values).map(|(z, v)| vec![num(z.re), num(z.im), num(*v)]);
    out.csv("wigner.csv", &WIGNER_HEADER, rows)?;
    out.json(
        "wigner.json",
        &json!({
            "state": job.state.to_string(),
            "theta": job.theta(),
            "mode": job.mode,
            "dim_a": job.dim_a.get(),
            "chi_grid": { "half_extent": w.source.0, "spacing": w.source.1 },
            "grid": { "half_extent": job.grid.z, "spacing": w.spacing, "side": w.side() },
            "shots": job.shots.map(|s| s.shots),
            "seed": job.shots.map(|s| s.seed),
            "efficiency": job.shots.map(|s| s.efficiency),
            "max_imaginary_residue": w.max_imaginary_residue,
        }),
    )?;
    summary.insert("w_origin".into(), w.at(0, 0).into());
    summary.insert("normalization".into(), w.normalization().into());
    summary.insert("max_error".into(), max_error.into());
    summary.insert("max_imaginary_residue".into(), w.max_imaginary_residue.into());
    summary.insert("imaginary_residue_ok".into(), w.is_consistent().into());
    let met = job.max_error.is_none_or(|m| max_error <= m);
    Ok(Outcome { summary, tolerances_met: met })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::state::StateSpec;

    fn job(scenario: Scenario, cfg: RunConfig, dir: &std::path::Path) -> Job {
        Job::resolve(scenario, RunConfig { out: Some(dir.to_path_buf()), ..cfg }).unwrap()
    }

    #[test]
    fn scan_writes_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&job(Scenario::CdoFidelity, RunConfig::default(), dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join("cdo_scan.csv")).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(report.summary["monotone_decreasing"], Value::Bool(true));
        for f in &report.files {
            assert!(std::fs::metadata(dir.path().join(f)).unwrap().len() > 0);
        }
    }

    #[test]
    fn switch_state() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { beta: Some(Cplx::new(2.0, 0.0)), ..Default::default() };
        let report = run(&job(Scenario::Prepare, cfg, dir.path())).unwrap();
        let p = report.summary["success_probability"].as_f64().unwrap();
        assert!((p - 0.5 * (1.0 + (-2.0f64).exp())).abs() < 1e-12);
        assert!(report.summary["fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn tolerance_miss_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            state: Some(StateSpec::Fock(1)),
            grid_b: Some(2.0),
            grid_h: Some(0.25),
            grid_z: Some(1.0),
            max_error: Some(1e-9),
            ..Default::default()
        };
        let report = run(&job(Scenario::Wigner, cfg, dir.path())).unwrap();
        assert!(!report.tolerances_met);
    }
}
