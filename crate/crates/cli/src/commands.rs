use std::fs;
use std::io::Write;
use std::path::Path;

use carousel_core::flow::{integrate_orbit_with, Method, OrbitOptions};
use carousel_core::par::Execution;
use carousel_core::period::{
    audit_parabolic_bounds, energy_grid, period, period_scan, turning_points, write_scan_csv,
    BoundAudit, DEGENERATE_GAP,
};
use carousel_core::polygon::{
    carousel_defect, mean_inscribed_side, midpoint_parallel_defect, CurveSpec,
};
use carousel_core::rigidity::{feasibility_scan, period_bounds, ProofReport};
use carousel_core::scalar::{
    hamiltonian, in_admissible_region, AngleState, EnergyLevel, H_BOUNDARY, H_MAX,
    LINEARIZED_PERIOD, PERIOD_LOWER_BOUND, PERIOD_UPPER_BOUND,
};
use carousel_core::tracer::{closure_scan, closure_start, trace, write_closure_csv, write_trajectory_csv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{EnergyRange, Format, RunConfig, UsageError};
use crate::{svg, Command, RunError, Status};

const AUDIT_GRID: usize = 1001;
const DEFECT_SAMPLES: usize = 64;
const FRAMES: usize = 6;

pub(crate) fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Status, RunError> {
    match cmd {
        Command::PeriodScan => period_scan_cmd(cfg),
        Command::Orbit => orbit_cmd(cfg),
        Command::Reconstruct => reconstruct_cmd(cfg),
        Command::ClosureScan => closure_scan_cmd(cfg),
        Command::VerifyBounds => verify_bounds_cmd(cfg),
        Command::VerifyProof => verify_proof_cmd(cfg),
        Command::Levelsets => levelsets_cmd(cfg),
        Command::CarouselDefect => carousel_defect_cmd(cfg),
    }
}

fn failed(e: impl std::fmt::Display) -> RunError {
    RunError::Failed(e.to_string())
}

/// Writes `name` under the output directory; without one, only the primary
/// artifact is printed to stdout.
fn emit(cfg: &RunConfig, name: &str, content: &[u8], primary: bool) -> Result<(), RunError> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(Path::new(dir).join(name), content)?;
        }
        None if primary => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content)?;
            stdout.flush()?;
        }
        None => {}
    }
    Ok(())
}

fn grid(cfg: &RunConfig, default: EnergyRange) -> Vec<EnergyLevel> {
    let (range, warning) = cfg.grid_or(default);
    if let Some(w) = warning {
        eprintln!("{w}");
    }
    energy_grid(range.low, range.high, range.count)
}

fn json_line(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string(value).expect("serialisable");
    s.push('\n');
    s.into_bytes()
}

fn period_scan_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let levels = grid(cfg, EnergyRange::new(H_BOUNDARY + 1e-3, H_MAX - 1e-3, 50));
    let rows = period_scan(&levels, AUDIT_GRID, Execution::Parallel).map_err(failed)?;
    let slack = cfg.tolerance("audit_slack");
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_scan_csv(&rows, &mut buf)?;
            emit(cfg, "period_scan.csv", &buf, true)?;
        }
        Format::Json => emit(cfg, "period_scan.json", &json_line(&rows), true)?,
    }
    let ok = rows.iter().all(|r| {
        r.lower_margin >= -slack
            && r.upper_margin >= -slack
            && PERIOD_LOWER_BOUND < r.period
            && r.period < PERIOD_UPPER_BOUND
    });
    Ok(if ok { Status::Pass } else { Status::AuditFailed })
}

/// Starting state and energy from `--start`, else `(u_-, u_-)` on the
/// single `--h` level, else `H = 2.5`.
fn start_state(cfg: &RunConfig) -> Result<(AngleState, EnergyLevel), RunError> {
    if let Some(s) = cfg.start {
        if !in_admissible_region(s) {
            return Err(UsageError(format!("start ({}, {}) lies outside the region", s.x, s.y)).into());
        }
        return Ok((s, hamiltonian(s)));
    }
    let h = match cfg.h_grid {
        Some(r) if r.count == 1 => r.clamped(),
        Some(_) => return Err(UsageError("expected a single energy, e.g. --h 2.5".into()).into()),
        None => (EnergyRange::new(2.5, 2.5, 1), None),
    };
    if let Some(w) = h.1 {
        eprintln!("{w}");
    }
    let h = EnergyLevel(h.0.low);
    let tp = turning_points(h).map_err(failed)?;
    Ok((AngleState::new(tp.u_minus, tp.u_minus), h))
}

fn orbit_period(h: EnergyLevel) -> Result<f64, RunError> {
    if H_MAX - h.value() <= DEGENERATE_GAP {
        Ok(LINEARIZED_PERIOD)
    } else {
        Ok(period(h).map_err(failed)?.period)
    }
}

fn orbit_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let (s0, h) = start_state(cfg)?;
    let t = orbit_period(h)?;
    let opts = OrbitOptions {
        record_every: ((0.005 / cfg.step).round() as usize).max(1),
        ..OrbitOptions::default()
    };
    let orbit = integrate_orbit_with(s0, t, cfg.step, Method::FixedRk4, &opts).map_err(failed)?;
    let mut csv = String::from("t,x,y,H\n");
    for s in &orbit.samples {
        csv.push_str(&format!("{},{},{},{}\n", s.t, s.state.x, s.state.y, hamiltonian(s.state).value()));
    }
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(cfg, "orbit.csv", csv.as_bytes(), true)?,
        Format::Json => {
            let summary = json!({
                "H": h.value(),
                "T": t,
                "start": [s0.x, s0.y],
                "samples": orbit.samples.len(),
                "H_drift": orbit.h_max_drift,
            });
            emit(cfg, "orbit.json", &json_line(&summary), true)?;
        }
    }
    let states: Vec<AngleState> = orbit.samples.iter().map(|s| s.state).collect();
    let title = format!("Orbit at H = {}", h.value());
    emit(cfg, "orbit.svg", svg::orbit_portrait(&title, &states).as_bytes(), false)?;
    Ok(Status::Pass)
}

fn reconstruct_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let (s0, h) = start_state(cfg)?;
    let t = orbit_period(h)?;
    let duration = match cfg.start {
        None => closure_start(h).map_err(failed)?.1,
        Some(_) => 1.05 * t,
    };
    let flow = trace(s0, duration, cfg.step).map_err(failed)?;
    let summary = json!({
        "H": h.value(),
        "start": [s0.x, s0.y],
        "closure_time": flow.closure_time,
        "closure_defect": flow.closure_defect,
        "swept_perimeter": flow.swept_perimeter(),
        "radius_residual": flow.radius_residual,
        "return_time": flow.return_time,
        "max_side_error": flow.max_side_error(),
    });
    let mut csv = Vec::new();
    write_trajectory_csv(&flow, &mut csv)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(cfg, "trajectory.csv", &csv, true)?;
            emit(cfg, "summary.json", &json_line(&summary), false)?;
        }
        Format::Json => {
            emit(cfg, "summary.json", &json_line(&summary), true)?;
            emit(cfg, "trajectory.csv", &csv, false)?;
        }
    }
    let frames: Vec<(f64, _)> = (0..FRAMES)
        .map(|k| {
            let target = t * k as f64 / FRAMES as f64;
            let idx = flow
                .times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            (flow.times[idx], flow.positions[idx])
        })
        .collect();
    let title = format!("Hexagon frames at H = {}", h.value());
    emit(cfg, "hexagons.svg", svg::hexagon_frames(&title, &frames).as_bytes(), false)?;
    Ok(Status::Pass)
}

fn closure_scan_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let levels = grid(cfg, EnergyRange::new(H_BOUNDARY + 0.01, H_MAX - 0.01, 10));
    let rows = closure_scan(&levels, cfg.step, Execution::Parallel).map_err(failed)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_closure_csv(&rows, &mut buf)?;
            emit(cfg, "closure_scan.csv", &buf, true)?;
        }
        Format::Json => emit(cfg, "closure_scan.json", &json_line(&rows), true)?,
    }
    Ok(Status::Pass)
}

const BOUNDS_HEADER: &str = "H,lower_margin,upper_margin,curvature_margin,f_curvature_margin,g_floor_margin,g_identity_residual,T,T_lower_margin,T_upper_margin,pass";

fn verify_bounds_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let levels = grid(cfg, EnergyRange::new(H_BOUNDARY + 1e-6, H_MAX - 1e-6, 50));
    let slack = cfg.tolerance("audit_slack");
    let identity_tol = cfg.tolerances.get("identity").copied().unwrap_or(1e-12);
    let rows: Vec<(BoundAudit, f64, bool)> = carousel_core::par::map_ordered(
        Execution::Parallel,
        &levels,
        |&h| -> Result<_, RunError> {
            let a = audit_parabolic_bounds(h, AUDIT_GRID).map_err(failed)?;
            let t = period(h).map_err(failed)?.period;
            let pass = [
                a.lower_margin,
                a.upper_margin,
                a.curvature_margin,
                a.f_curvature_margin,
                a.g_floor_margin,
            ]
            .iter()
            .all(|&m| m >= -slack)
                && a.g_identity_residual <= identity_tol
                && PERIOD_LOWER_BOUND < t
                && t < PERIOD_UPPER_BOUND;
            Ok((a, t, pass))
        },
    )
    .into_iter()
    .collect::<Result<_, _>>()?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = format!("{BOUNDS_HEADER}\n");
            for (a, t, pass) in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    a.h,
                    a.lower_margin,
                    a.upper_margin,
                    a.curvature_margin,
                    a.f_curvature_margin,
                    a.g_floor_margin,
                    a.g_identity_residual,
                    t,
                    t - PERIOD_LOWER_BOUND,
                    PERIOD_UPPER_BOUND - t,
                    pass
                ));
            }
            emit(cfg, "verify_bounds.csv", out.as_bytes(), true)?;
        }
        Format::Json => {
            let value: Vec<_> = rows
                .iter()
                .map(|(a, t, pass)| {
                    json!({
                        "audit": a,
                        "T": t,
                        "T_lower_margin": t - PERIOD_LOWER_BOUND,
                        "T_upper_margin": PERIOD_UPPER_BOUND - t,
                        "pass": pass,
                    })
                })
                .collect();
            emit(cfg, "verify_bounds.json", &json_line(&value), true)?;
        }
    }
    let failures = rows.iter().filter(|r| !r.2).count();
    if failures > 0 {
        eprintln!("{failures} of {} levels failed the audit", rows.len());
        Ok(Status::AuditFailed)
    } else {
        Ok(Status::Pass)
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn verify_proof_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let bounds = period_bounds();
    let rows = feasibility_scan(cfg.kmax, cfg.mmax, bounds);
    let report = ProofReport::from_scan(bounds, &rows);
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            emit(cfg, "proof.json", s.as_bytes(), true)?;
        }
        Format::Csv => {
            let mut out = String::from("k,m,required_low,required_high,feasible,reason\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.k,
                    r.m,
                    r.required.low,
                    r.required.high,
                    r.feasible,
                    csv_quote(&r.reason)
                ));
            }
            emit(cfg, "proof.csv", out.as_bytes(), true)?;
        }
    }
    Ok(if report.is_contradiction() {
        Status::Pass
    } else {
        Status::AuditFailed
    })
}

/// Samples of the level curve `H = level`, traced by the flow over one period
/// from the diagonal point `(u_-, u_-)`.
fn level_curve(level: f64, step: f64) -> Result<Vec<AngleState>, RunError> {
    let h = EnergyLevel(level);
    let tp = turning_points(h).map_err(failed)?;
    let t = orbit_period(h)?;
    let opts = OrbitOptions {
        record_every: ((t / step / 1000.0).floor() as usize).max(1),
        ..OrbitOptions::default()
    };
    let orbit = integrate_orbit_with(
        AngleState::new(tp.u_minus, tp.u_minus),
        t,
        step,
        Method::FixedRk4,
        &opts,
    )
    .map_err(failed)?;
    Ok(orbit.samples.iter().map(|s| s.state).collect())
}

fn levelsets_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    let levels = cfg.levels.clone().unwrap_or_else(|| {
        vec![H_BOUNDARY + 0.01, 2.45, 2.5, 2.55, H_MAX - 0.05]
    });
    let mut curves = Vec::with_capacity(levels.len());
    for level in levels {
        let (r, warning) = EnergyRange::new(level, level, 1).clamped();
        if let Some(w) = warning {
            eprintln!("{w}");
        }
        curves.push((r.low, level_curve(r.low, cfg.step)?));
    }
    emit(cfg, "levelsets.svg", svg::level_sets(&curves).as_bytes(), true)?;
    Ok(Status::Pass)
}

fn random_curves(count: usize, seed: u64) -> Vec<CurveSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a: f64 = rng.random_range(1.0..3.0);
            let ratio: f64 = rng.random_range(0.3..1.0);
            CurveSpec::Ellipse { a, b: a * ratio }
        })
        .collect()
}

fn carousel_defect_cmd(cfg: &RunConfig) -> Result<Status, RunError> {
    if cfg.n < 3 {
        return Err(UsageError(format!("--n {} must be at least 3", cfg.n)).into());
    }
    let specs = match cfg.random {
        Some(count) => random_curves(count, cfg.seed),
        None => vec![cfg.curve.unwrap_or(CurveSpec::Ellipse { a: 2.0, b: 1.0 })],
    };
    let rows: Vec<(String, f64, f64, f64)> = specs
        .iter()
        .map(|spec| {
            let curve = spec.build().map_err(|e| RunError::Usage(e.to_string()))?;
            let defect = carousel_defect(curve.as_ref(), cfg.n, DEFECT_SAMPLES).map_err(failed)?;
            let side = mean_inscribed_side(curve.as_ref(), cfg.n, DEFECT_SAMPLES).map_err(failed)?;
            let mid = midpoint_parallel_defect(curve.as_ref(), cfg.n, 0.0, 1e-4).map_err(failed)?;
            Ok((spec.to_string(), defect, side, mid))
        })
        .collect::<Result<_, RunError>>()?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("curve,n,defect,mean_side,midpoint_defect\n");
            for (c, d, s, m) in &rows {
                out.push_str(&format!("{},{},{d},{s},{m}\n", csv_quote(c), cfg.n));
            }
            emit(cfg, "carousel_defect.csv", out.as_bytes(), true)?;
        }
        Format::Json => {
            let value: Vec<_> = rows
                .iter()
                .map(|(c, d, s, m)| {
                    json!({"curve": c, "n": cfg.n, "defect": d, "mean_side": s, "midpoint_defect": m})
                })
                .collect();
            emit(cfg, "carousel_defect.json", &json_line(&value), true)?;
        }
    }
    Ok(Status::Pass)
}
