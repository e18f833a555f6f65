//! Implementations behind the CLI subcommands. Each command reads its
//! inputs through [`super::config::RunConfig`], writes its outputs under
//! the configured `out` directory, and returns a summary for the caller to
//! print. All pipeline computation is single-threaded and deterministic;
//! only the benchmark's wall-clock columns vary between runs.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::Vector3;
use serde::Serialize;

use crate::decoder;
use crate::error::{Error, Result};
use crate::mesh::HeightFieldMesh;
use crate::metrics::{self, EvalReport, SurfaceDistance};
use crate::patterns::{self, DemoShape, GeoTrajectory, PatternKind};
use crate::spherelets::{CellState, GridSpec, PointCloud, SurfaceAtlas};

use super::config::RunConfig;
use super::formats;

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    Ok(())
}

fn build_grid(cfg: &RunConfig, cloud: &PointCloud) -> Result<SurfaceAtlas> {
    match (&cfg.v_lines, &cfg.h_lines) {
        (None, None) => SurfaceAtlas::build_uniform(cloud, cfg.nv, cfg.nh),
        (v, h) => {
            let grid = GridSpec::new(
                v.clone().unwrap_or_default(),
                h.clone().unwrap_or_default(),
            )?;
            SurfaceAtlas::build(cloud, grid)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaneSummary {
    pub origin: [f64; 3],
    pub normal: [f64; 3],
    pub axis1: [f64; 3],
    pub axis2: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub col: usize,
    pub row: usize,
    pub count: usize,
    pub center: [f64; 3],
    pub radius: f64,
}

/// JSON summary produced by `fit-atlas`.
#[derive(Debug, Clone, Serialize)]
pub struct AtlasSummary {
    pub plane: PlaneSummary,
    pub v_lines: Vec<f64>,
    pub h_lines: Vec<f64>,
    pub cells_fitted: usize,
    pub cells_empty: usize,
    pub cells_degenerate: usize,
    pub cells: Vec<CellSummary>,
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn summarize_atlas(atlas: &SurfaceAtlas) -> AtlasSummary {
    let plane = atlas.plane();
    let grid = atlas.grid();
    let mut cells = Vec::new();
    let mut empty = 0usize;
    let mut degenerate = 0usize;
    for row in 0..grid.n_rows() {
        for col in 0..grid.n_cols() {
            match atlas.cell_state(col, row) {
                CellState::Fitted(fit) => cells.push(CellSummary {
                    col,
                    row,
                    count: fit.count,
                    center: vec3(&fit.sphere.center()),
                    radius: fit.sphere.radius(),
                }),
                CellState::TooFew { .. } => empty += 1,
                CellState::Degenerate { .. } => degenerate += 1,
            }
        }
    }
    AtlasSummary {
        plane: PlaneSummary {
            origin: vec3(&plane.origin),
            normal: vec3(&plane.normal),
            axis1: vec3(&plane.axis1),
            axis2: vec3(&plane.axis2),
        },
        v_lines: grid.v_lines().to_vec(),
        h_lines: grid.h_lines().to_vec(),
        cells_fitted: cells.len(),
        cells_empty: empty,
        cells_degenerate: degenerate,
        cells,
    }
}

/// `fit-atlas`: builds the surface atlas and writes its JSON summary.
pub fn cmd_fit_atlas(cfg: &RunConfig) -> Result<(AtlasSummary, PathBuf)> {
    ensure_out_dir(cfg)?;
    let cloud = formats::parse_cloud(cfg.require_cloud()?)?;
    let atlas = build_grid(cfg, &cloud)?;
    let summary = summarize_atlas(&atlas);
    let path = formats::write_json(cfg.out.join("atlas_summary.json"), &summary)?;
    Ok((summary, path))
}

/// `gen-demo`: writes a synthetic demonstration trajectory CSV.
pub fn cmd_gen_demo(cfg: &RunConfig) -> Result<PathBuf> {
    ensure_out_dir(cfg)?;
    let shape = DemoShape::parse(&cfg.demo_shape)?;
    let sphere = crate::manifold::Sphere::new(
        Vector3::new(cfg.demo_center[0], cfg.demo_center[1], cfg.demo_center[2]),
        cfg.demo_radius,
    )?;
    let traj = patterns::synth_demo(shape, &sphere, cfg.demo_samples, cfg.demo_periods)?;
    let path = cfg.out.join(format!("demo_{}.csv", shape.name()));
    formats::write_trajectory(&path, &traj)?;
    Ok(path)
}

/// Outcome of `imitate`.
#[derive(Debug, Clone)]
pub struct ImitateOutcome {
    pub predicted_path: PathBuf,
    pub eval_path: Option<PathBuf>,
    pub report: Option<EvalReport>,
    pub warnings: Vec<String>,
}

/// `imitate`: trains on the demonstration, decodes the query times, writes
/// the predicted trajectory CSV and (when ground truth covers any query
/// time) an evaluation JSON.
///
/// Reproduction residuals come from query times that coincide with
/// demonstration times; generalization residuals come from query times
/// found in the optional `eval.truth` trajectory.
pub fn cmd_imitate(cfg: &RunConfig) -> Result<ImitateOutcome> {
    ensure_out_dir(cfg)?;
    let cloud = formats::parse_cloud(cfg.require_cloud()?)?;
    let atlas = build_grid(cfg, &cloud)?;
    let loaded = formats::parse_trajectory(cfg.require_demo()?)?;
    let mut warnings = loaded.warnings.clone();
    let demo = loaded.trajectory;

    let queries = match &cfg.queries {
        Some(q) => q.expand()?,
        None => demo.times(),
    };
    let kernel = cfg.kernel()?;
    let dec = cfg.decoder()?;
    let predicted = decoder::imitate(&demo, kernel, cfg.lambda, &atlas, &queries, &dec)?;
    let predicted_path = cfg.out.join("predicted.csv");
    formats::write_trajectory(&predicted_path, &predicted)?;

    // Assemble ground truth: demonstration times count as reproduction,
    // times from the optional truth file as generalization.
    let truth_gen = match &cfg.eval_truth {
        Some(path) => {
            let t = formats::parse_trajectory(path)?;
            warnings.extend(t.warnings);
            Some(t.trajectory)
        }
        None => None,
    };
    let same_time = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
    let mut repro_pred = Vec::new();
    let mut repro_truth = Vec::new();
    let mut gen_pred = Vec::new();
    let mut gen_truth = Vec::new();
    for (t, p) in predicted.samples() {
        if let Some(hit) = demo.samples().iter().find(|(dt, _)| same_time(*t, *dt)) {
            repro_pred.push((*t, *p));
            repro_truth.push(*hit);
        } else if let Some(truth) = &truth_gen {
            if let Some(hit) = truth.samples().iter().find(|(dt, _)| same_time(*t, *dt)) {
                gen_pred.push((*t, *p));
                gen_truth.push(*hit);
            }
        }
    }

    let mut eval_path = None;
    let mut report = None;
    if !repro_pred.is_empty() {
        let distance = match cfg.eval_distance.as_str() {
            "atlas" => SurfaceDistance::Atlas(&atlas),
            _ => SurfaceDistance::UnitSphereArc,
        };
        let repro = metrics::reproduction_error(
            &GeoTrajectory::new(repro_pred)?,
            &GeoTrajectory::new(repro_truth)?,
            &distance,
        )?;
        let gen = if gen_pred.is_empty() {
            None
        } else {
            Some(metrics::generalization_error(
                &GeoTrajectory::new(gen_pred)?,
                &GeoTrajectory::new(gen_truth)?,
                &distance,
            )?)
        };
        let r = EvalReport::new(&repro, gen.as_ref(), distance.kind());
        eval_path = Some(formats::write_json(cfg.out.join("eval.json"), &r)?);
        report = Some(r);
    }

    Ok(ImitateOutcome {
        predicted_path,
        eval_path,
        report,
        warnings,
    })
}

/// One row of the geodesic benchmark table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub pair: usize,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    pub spherelet_distance: f64,
    pub oracle_distance: f64,
    pub relative_error: f64,
    pub spherelet_time_s: f64,
    pub oracle_time_s: f64,
}

/// Aggregate results of `bench-geodesic`.
#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub pairs: usize,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    pub mean_spherelet_time_s: f64,
    pub mean_oracle_time_s: f64,
    pub speedup: f64,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn rand_index(state: &mut u64, n: usize) -> usize {
    (splitmix(state) % n as u64) as usize
}

/// `bench-geodesic`: compares spherelet distances against the mesh
/// shortest-path reference on deterministic pseudo-random vertex pairs and
/// writes a CSV table plus a JSON summary.
pub fn cmd_bench_geodesic(cfg: &RunConfig) -> Result<(BenchSummary, PathBuf)> {
    ensure_out_dir(cfg)?;
    let cloud = formats::parse_cloud(cfg.require_cloud()?)?;
    let atlas = build_grid(cfg, &cloud)?;
    let mesh = HeightFieldMesh::from_cloud(&cloud, cfg.bench_mesh, cfg.bench_mesh)?;

    let mut state = cfg.bench_seed.wrapping_mul(2).wrapping_add(1);
    let mut rows: Vec<BenchRow> = Vec::with_capacity(cfg.bench_pairs);
    let mut attempts = 0usize;
    while rows.len() < cfg.bench_pairs {
        attempts += 1;
        if attempts > cfg.bench_pairs * 200 {
            return Err(Error::Config(
                "could not sample enough liftable benchmark pairs".into(),
            ));
        }
        let a = mesh.vertex(
            rand_index(&mut state, mesh.nx()),
            rand_index(&mut state, mesh.ny()),
        );
        let b = mesh.vertex(
            rand_index(&mut state, mesh.nx()),
            rand_index(&mut state, mesh.ny()),
        );
        if (a - b).norm() < 1e-9 {
            continue;
        }
        let t0 = Instant::now();
        let spherelet = match atlas.geodesic_distance(&a, &b) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let spherelet_time = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let oracle = mesh.reference_distance(&a, &b);
        let oracle_time = t1.elapsed().as_secs_f64();
        let rel = (spherelet - oracle).abs() / oracle.max(f64::MIN_POSITIVE);
        rows.push(BenchRow {
            pair: rows.len(),
            ax: a.x,
            ay: a.y,
            az: a.z,
            bx: b.x,
            by: b.y,
            bz: b.z,
            spherelet_distance: spherelet,
            oracle_distance: oracle,
            relative_error: rel,
            spherelet_time_s: spherelet_time,
            oracle_time_s: oracle_time,
        });
    }

    let csv_path = cfg.out.join("bench_geodesic.csv");
    let mut csv = String::from(
        "pair,ax,ay,az,bx,by,bz,spherelet_distance,oracle_distance,relative_error,spherelet_time_s,oracle_time_s\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.pair,
            r.ax,
            r.ay,
            r.az,
            r.bx,
            r.by,
            r.bz,
            r.spherelet_distance,
            r.oracle_distance,
            r.relative_error,
            r.spherelet_time_s,
            r.oracle_time_s
        ));
    }
    fs::write(&csv_path, csv)?;

    let n = rows.len() as f64;
    let mean_sph = rows.iter().map(|r| r.spherelet_time_s).sum::<f64>() / n;
    let mean_orc = rows.iter().map(|r| r.oracle_time_s).sum::<f64>() / n;
    let summary = BenchSummary {
        pairs: rows.len(),
        mean_relative_error: rows.iter().map(|r| r.relative_error).sum::<f64>() / n,
        max_relative_error: rows.iter().map(|r| r.relative_error).fold(0.0, f64::max),
        mean_spherelet_time_s: mean_sph,
        mean_oracle_time_s: mean_orc,
        speedup: mean_orc / mean_sph.max(f64::MIN_POSITIVE),
    };
    formats::write_json(cfg.out.join("bench_summary.json"), &summary)?;
    Ok((summary, csv_path))
}

/// JSON report written by `check-pattern`.
#[derive(Debug, Clone, Serialize)]
pub struct PatternOutput {
    pub kind: String,
    pub period: f64,
    pub residual: f64,
    pub colinearity_defect: f64,
    pub mean_step: f64,
    pub periods: usize,
    pub tolerance: f64,
    pub passes: bool,
    pub classified: String,
}

/// `check-pattern`: measures a trajectory's residuals against one pattern
/// kind and classifies it. Large residuals are reported, not errors.
pub fn cmd_check_pattern(cfg: &RunConfig) -> Result<(PatternOutput, PathBuf)> {
    ensure_out_dir(cfg)?;
    let loaded = formats::parse_trajectory(cfg.require_demo()?)?;
    let traj = loaded.trajectory;
    let period = cfg
        .pattern_period
        .or(traj.period())
        .ok_or_else(|| Error::Config("pattern.period is required".into()))?;
    let kind = PatternKind::parse(&cfg.pattern_kind)?;

    // Distances on the unit sphere unless an atlas is configured.
    let cloud = match &cfg.cloud {
        Some(path) => Some(formats::parse_cloud(path)?),
        None => None,
    };
    let atlas = match &cloud {
        Some(c) => Some(build_grid(cfg, c)?),
        None => None,
    };
    let distance = match &atlas {
        Some(a) => SurfaceDistance::Atlas(a),
        None => SurfaceDistance::UnitSphereArc,
    };
    let dist_fn = |a: &Vector3<f64>, b: &Vector3<f64>| distance.distance(a, b);

    let report = patterns::check_pattern(&traj, period, kind, &dist_fn)?;
    let classified = patterns::classify_pattern(&traj, period, &dist_fn, cfg.pattern_tolerance)?;
    let out = PatternOutput {
        kind: kind.name().into(),
        period,
        residual: report.residual,
        colinearity_defect: report.colinearity_defect,
        mean_step: report.mean_step,
        periods: report.periods,
        tolerance: cfg.pattern_tolerance,
        passes: report.max_residual() <= cfg.pattern_tolerance,
        classified: classified.name().into(),
    };
    let path = formats::write_json(cfg.out.join("pattern_report.json"), &out)?;
    Ok((out, path))
}

/// `evaluate`: compares a predicted trajectory against ground truth with
/// matching time stamps, splitting reproduction from generalization at
/// `eval.train_n` (all samples count as reproduction when unset).
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<(EvalReport, PathBuf)> {
    ensure_out_dir(cfg)?;
    let pred_path = cfg
        .eval_pred
        .as_deref()
        .ok_or_else(|| Error::Config("eval.pred is required".into()))?;
    let truth_path = cfg
        .eval_truth
        .as_deref()
        .ok_or_else(|| Error::Config("eval.truth is required".into()))?;
    let pred = formats::parse_trajectory(pred_path)?.trajectory;
    let truth = formats::parse_trajectory(truth_path)?.trajectory;
    if pred.len() != truth.len() {
        return Err(Error::TimestampMismatch(pred.len().min(truth.len())));
    }
    let n = cfg.eval_train_n.unwrap_or(pred.len()).min(pred.len());
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }

    let cloud = match &cfg.cloud {
        Some(path) => Some(formats::parse_cloud(path)?),
        None => None,
    };
    let atlas = match (&cloud, cfg.eval_distance.as_str()) {
        (Some(c), "atlas") => Some(build_grid(cfg, c)?),
        (None, "atlas") => {
            return Err(Error::Config(
                "eval.distance = atlas requires input.cloud".into(),
            ))
        }
        _ => None,
    };
    let distance = match &atlas {
        Some(a) => SurfaceDistance::Atlas(a),
        None => SurfaceDistance::UnitSphereArc,
    };

    let split = |traj: &GeoTrajectory| -> Result<(GeoTrajectory, Option<GeoTrajectory>)> {
        let samples = traj.samples();
        let head = GeoTrajectory::new(samples[..n].to_vec())?;
        let tail = if n < samples.len() {
            Some(GeoTrajectory::new(samples[n..].to_vec())?)
        } else {
            None
        };
        Ok((head, tail))
    };
    let (pred_head, pred_tail) = split(&pred)?;
    let (truth_head, truth_tail) = split(&truth)?;

    let repro = metrics::reproduction_error(&pred_head, &truth_head, &distance)?;
    let gen = match (pred_tail, truth_tail) {
        (Some(p), Some(t)) => Some(metrics::generalization_error(&p, &t, &distance)?),
        _ => None,
    };
    let report = EvalReport::new(&repro, gen.as_ref(), distance.kind());
    let path = formats::write_json(cfg.out.join("eval.json"), &report)?;
    Ok((report, path))
}
