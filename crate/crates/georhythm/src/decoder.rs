//! The structured predictor: for each query time, minimize the
//! score-weighted sum of squared geodesic distances to the demonstration
//! points by Riemannian gradient descent on the surface atlas.
//!
//! Each iterate lives on the sphere of its current grid cell. A step
//! follows the exponential map in the descent direction, then re-lifts the
//! result through the projection plane, which switches spherelets whenever
//! the step crosses a grid line. Scores may be negative (they come from a
//! ridge regression), so the objective can be non-convex; the decoder
//! reports the local minimizer reached from its initialization.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::manifold::{self, TangentVector};
use crate::patterns::GeoTrajectory;
use crate::scores::ScoreModel;
use crate::spherelets::SurfaceAtlas;

/// How predictions are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Start from the demonstration point with the nearest time stamp.
    NearestTrainingPoint,
    /// Start from the previous query's prediction (falls back to the
    /// nearest training point for the first query). Imposes sequential
    /// order across queries.
    PreviousPrediction,
}

/// Riemannian gradient descent settings.
#[derive(Debug, Clone, Copy)]
pub struct DecoderConfig {
    /// Base step size, in arc-length units per unit gradient.
    pub step_size: f64,
    pub max_iterations: usize,
    /// Convergence is declared on the Riemannian gradient norm, which stays
    /// meaningful near flat regions where objective deltas vanish.
    pub gradient_tolerance: f64,
    pub init_strategy: InitStrategy,
    /// Backtracking (halving) line search with an Armijo acceptance test.
    pub line_search: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            step_size: 0.1,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            init_strategy: InitStrategy::PreviousPrediction,
            line_search: true,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Config("decoder step size must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("decoder needs at least one iteration".into()));
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return Err(Error::Config("gradient tolerance must be positive".into()));
        }
        Ok(())
    }
}

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

/// One decoded output point with convergence metadata.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub time: f64,
    pub point: Vector3<f64>,
    /// Final objective value in the raw (unnormalized) score units.
    pub objective_value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Result of a direct weighted-objective minimization.
#[derive(Debug, Clone, Copy)]
pub struct MinimizeResult {
    pub point: Vector3<f64>,
    /// Objective value at `point`, in the units of the supplied weights.
    pub objective_value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// The decoding objective: `sum_n alpha_n * D(p, p_n)^2` with `D` the atlas
/// geodesic distance.
pub fn objective(
    atlas: &SurfaceAtlas,
    alphas: &[f64],
    demos: &[Vector3<f64>],
    p: &Vector3<f64>,
) -> Result<f64> {
    if alphas.len() != demos.len() {
        return Err(Error::Config(format!(
            "{} scores for {} demonstration points",
            alphas.len(),
            demos.len()
        )));
    }
    let mut total = 0.0;
    for (a, q) in alphas.iter().zip(demos) {
        let d = atlas.geodesic_distance(p, q)?;
        total += a * d * d;
    }
    Ok(total)
}

/// Distance to one demo point and the unit tangent at `p` along the first
/// geodesic segment toward it (`None` when the distance vanishes).
fn distance_and_direction(
    atlas: &SurfaceAtlas,
    p: &Vector3<f64>,
    demo: &Vector3<f64>,
) -> Result<(f64, Option<Vector3<f64>>)> {
    let legs = atlas.geodesic_legs(p, demo)?;
    let total: f64 = legs.iter().map(|l| l.arc).sum();
    for leg in &legs {
        if leg.arc > 1e-12 * (1.0 + total) {
            let lv = manifold::log_map(&leg.sphere, &leg.start, &leg.end)?;
            let n = lv.vec.norm();
            if n > 0.0 {
                return Ok((total, Some(lv.vec / n)));
            }
        }
    }
    Ok((total, None))
}

/// Euclidean gradient of the objective: `-2 sum_n alpha_n D_n u_n`, with
/// `u_n` the unit tangent at `p` pointing along the geodesic toward demo
/// `n`. A coincident demo contributes nothing (its distance factor is
/// zero); the derivative of the geodesic distance with respect to the
/// endpoint is taken on the first arc's sphere, which is exact for
/// single-sphere paths and first-order accurate across cells.
pub fn euclidean_gradient(
    atlas: &SurfaceAtlas,
    alphas: &[f64],
    demos: &[Vector3<f64>],
    p: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    if alphas.len() != demos.len() {
        return Err(Error::Config(format!(
            "{} scores for {} demonstration points",
            alphas.len(),
            demos.len()
        )));
    }
    let mut grad = Vector3::zeros();
    for (a, q) in alphas.iter().zip(demos) {
        let (d, dir) = distance_and_direction(atlas, p, q)?;
        if let Some(u) = dir {
            grad -= 2.0 * a * d * u;
        }
    }
    Ok(grad)
}

/// The Euclidean gradient projected onto the tangent plane of `p`'s local
/// spherelet.
pub fn riemannian_gradient(
    atlas: &SurfaceAtlas,
    alphas: &[f64],
    demos: &[Vector3<f64>],
    p: &Vector3<f64>,
) -> Result<TangentVector> {
    let g = euclidean_gradient(atlas, alphas, demos, p)?;
    let sphere = atlas.cell_for_point(p)?.sphere;
    manifold::project_tangent(&sphere, p, &g)
}

/// Projects a point through the plane onto its cell's spherelet.
fn relift(atlas: &SurfaceAtlas, p: &Vector3<f64>) -> Result<Vector3<f64>> {
    atlas.lift_to_surface(atlas.plane().to_plane(p))
}

/// Minimizes `sum_n alpha_n D(p, p_n)^2` over the atlas surface by
/// Riemannian gradient descent from `init`. The argmin is invariant to a
/// positive rescaling of the weights, so they are normalized internally to
/// keep gradient magnitudes and step sizes scale-free; the reported
/// objective is in the units of the weights as given. Non-convergence is
/// reported in the result, not as an error.
pub fn frechet_minimize(
    atlas: &SurfaceAtlas,
    alphas: &[f64],
    demos: &[Vector3<f64>],
    init: &Vector3<f64>,
    cfg: &DecoderConfig,
) -> Result<MinimizeResult> {
    cfg.validate()?;
    if alphas.len() != demos.len() {
        return Err(Error::Config(format!(
            "{} scores for {} demonstration points",
            alphas.len(),
            demos.len()
        )));
    }
    let mut p = relift(atlas, init).map_err(|_| Error::InitNotLiftable)?;

    let scale: f64 = alphas.iter().map(|a| a.abs()).sum();
    if scale == 0.0 {
        // Every weight is zero (a kernel's deep far field after
        // underflow): the objective is identically zero and the
        // initialization already minimizes it.
        return Ok(MinimizeResult {
            point: p,
            objective_value: 0.0,
            iterations_used: 0,
            converged: true,
        });
    }
    let normed: Vec<f64> = alphas.iter().map(|a| a / scale).collect();

    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let g = riemannian_gradient(atlas, &normed, demos, &p)?;
        let gnorm = g.norm();
        if gnorm < cfg.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let sphere = atlas.cell_for_point(&p)?.sphere;
        let f0 = objective(atlas, &normed, demos, &p)?;
        let mut eta = cfg.step_size;
        let mut accepted = None;
        let tries = if cfg.line_search { MAX_BACKTRACKS } else { 1 };
        for _ in 0..tries {
            let candidate = manifold::exp_map(
                &sphere,
                &TangentVector {
                    base: p,
                    vec: -eta * g.vec,
                },
            )
            .and_then(|stepped| relift(atlas, &stepped));
            if let Ok(cand) = candidate {
                if !cfg.line_search {
                    accepted = Some(cand);
                    break;
                }
                if let Ok(f1) = objective(atlas, &normed, demos, &cand) {
                    if f1 <= f0 - ARMIJO_C * eta * gnorm * gnorm {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            eta *= 0.5;
        }
        match accepted {
            Some(cand) => p = cand,
            // No acceptable step at any scale: numerical floor reached.
            None => break,
        }
    }

    let objective_value = scale * objective(atlas, &normed, demos, &p)?;
    Ok(MinimizeResult {
        point: p,
        objective_value,
        iterations_used: iterations,
        converged,
    })
}

/// Decodes one query time: computes the scores, then minimizes the
/// weighted objective from the warm start (or the nearest-in-time
/// demonstration point).
pub fn predict(
    model: &ScoreModel,
    atlas: &SurfaceAtlas,
    demos: &[Vector3<f64>],
    t: f64,
    cfg: &DecoderConfig,
    warm_start: Option<Vector3<f64>>,
) -> Result<Prediction> {
    if demos.len() != model.n() {
        return Err(Error::Config(format!(
            "model trained on {} times but {} demonstration points given",
            model.n(),
            demos.len()
        )));
    }
    let raw = model.scores(t)?;
    let init = warm_start.unwrap_or_else(|| {
        let times = model.times();
        let mut best = 0;
        for (i, ti) in times.iter().enumerate() {
            if (ti - t).abs() < (times[best] - t).abs() {
                best = i;
            }
        }
        demos[best]
    });
    let result = frechet_minimize(atlas, raw.as_slice(), demos, &init, cfg)?;
    Ok(Prediction {
        time: t,
        point: result.point,
        objective_value: result.objective_value,
        iterations_used: result.iterations_used,
        converged: result.converged,
    })
}

/// End-to-end imitation: trains the score model once on the demonstration,
/// then decodes every query time in order, warm-starting each prediction
/// from the previous one when the strategy asks for it.
pub fn imitate(
    demos: &GeoTrajectory,
    kernel: KernelSpec,
    lambda: f64,
    atlas: &SurfaceAtlas,
    query_times: &[f64],
    cfg: &DecoderConfig,
) -> Result<GeoTrajectory> {
    if demos.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let model = ScoreModel::train(kernel, &demos.times(), lambda)?;
    let points = demos.points();
    for p in &points {
        atlas.cell_for_point(p)?;
    }
    let mut samples = Vec::with_capacity(query_times.len());
    let mut previous: Option<Vector3<f64>> = None;
    for &t in query_times {
        let warm = match cfg.init_strategy {
            InitStrategy::PreviousPrediction => previous,
            InitStrategy::NearestTrainingPoint => None,
        };
        // A prediction can stop at the very rim of the liftable region
        // (negative scores make the objective decrease away from the
        // data); when such a warm start no longer lifts, restart from the
        // nearest training point instead of failing the whole run.
        let pred = match predict(&model, atlas, &points, t, cfg, warm) {
            Err(Error::InitNotLiftable) if warm.is_some() => {
                predict(&model, atlas, &points, t, cfg, None)?
            }
            other => other?,
        };
        previous = Some(pred.point);
        samples.push((t, pred.point));
    }
    GeoTrajectory::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherelets::{GridSpec, PointCloud};

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Single-cell atlas over a cap of the unit sphere around `axis`.
    fn cap_atlas(axis: Vector3<f64>, half_angle: f64, state: &mut u64) -> SurfaceAtlas {
        let axis = axis.normalize();
        let e1 = if axis.x.abs() < 0.9 {
            Vector3::x().cross(&axis).normalize()
        } else {
            Vector3::y().cross(&axis).normalize()
        };
        let e2 = axis.cross(&e1);
        let mut pts = Vec::with_capacity(600);
        for _ in 0..600 {
            let z = (half_angle.cos() + (1.0 - half_angle.cos()) * lcg(state)).clamp(-1.0, 1.0);
            let phi = 2.0 * std::f64::consts::PI * lcg(state);
            let s = (1.0 - z * z).sqrt();
            pts.push(z * axis + s * (phi.cos() * e1 + phi.sin() * e2));
        }
        SurfaceAtlas::build(&PointCloud::new(pts).unwrap(), GridSpec::single_cell()).unwrap()
    }

    /// Cap points for test demos.
    fn cap_point(axis: &Vector3<f64>, polar: f64, azimuth: f64) -> Vector3<f64> {
        let axis = axis.normalize();
        let e1 = if axis.x.abs() < 0.9 {
            Vector3::x().cross(&axis).normalize()
        } else {
            Vector3::y().cross(&axis).normalize()
        };
        let e2 = axis.cross(&e1);
        polar.cos() * axis + polar.sin() * (azimuth.cos() * e1 + azimuth.sin() * e2)
    }

    fn diag_axis() -> Vector3<f64> {
        Vector3::new(1.0, 1.0, 1.0).normalize()
    }

    #[test]
    fn objective_examples() {
        let mut state = 101u64;
        let atlas = cap_atlas(diag_axis(), 1.25, &mut state);
        let x = Vector3::x();
        let y = Vector3::y();
        let z = Vector3::z();
        // Coincident demo with weight one scores zero.
        let f = objective(&atlas, &[1.0], &[x], &x).unwrap();
        assert!(f.abs() <= 1e-12);
        // A zero weight drops its term.
        let d = atlas.geodesic_distance(&x, &y).unwrap();
        let f = objective(&atlas, &[1.0, 0.0], &[y, z], &x).unwrap();
        assert!((f - d * d).abs() <= 1e-9);
        // Two quarter-circle demos with unit weights.
        let f = objective(&atlas, &[1.0, 1.0], &[y, z], &x).unwrap();
        let quarter = std::f64::consts::FRAC_PI_2;
        assert!(
            (f - 2.0 * quarter * quarter).abs() <= 1e-6,
            "objective {f} vs {}",
            2.0 * quarter * quarter
        );
    }

    #[test]
    fn gradient_single_demo_quarter_circle() {
        let mut state = 103u64;
        let atlas = cap_atlas(diag_axis(), 1.25, &mut state);
        let g = euclidean_gradient(&atlas, &[1.0], &[Vector3::y()], &Vector3::x()).unwrap();
        // -2 * D * u with D = pi/2 and u = (0,1,0).
        let expected = Vector3::new(0.0, -std::f64::consts::PI, 0.0);
        assert!((g - expected).norm() <= 1e-6, "gradient {g:?}");
        // Zero at the demo itself.
        let g0 = euclidean_gradient(&atlas, &[1.0], &[Vector3::x()], &Vector3::x()).unwrap();
        assert!(g0.norm() <= 1e-9);
    }

    #[test]
    fn riemannian_gradient_is_tangent_and_contractive() {
        let mut state = 107u64;
        let atlas = cap_atlas(diag_axis(), 1.2, &mut state);
        let axis = diag_axis();
        let p = cap_point(&axis, 0.4, 1.0);
        let demos = [cap_point(&axis, 0.7, 2.5), cap_point(&axis, 0.5, 4.2)];
        let alphas = [0.8, 0.5];
        let eg = euclidean_gradient(&atlas, &alphas, &demos, &p).unwrap();
        let rg = riemannian_gradient(&atlas, &alphas, &demos, &p).unwrap();
        assert!(rg.norm() <= eg.norm() + 1e-12);
        let sphere = atlas.cell_for_point(&p).unwrap().sphere;
        let u = (p - sphere.center()).normalize();
        assert!(u.dot(&rg.vec).abs() <= 1e-9 * rg.norm().max(1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut state = 109u64;
        let atlas = cap_atlas(diag_axis(), 1.2, &mut state);
        let axis = diag_axis();
        let h = 1e-5;
        for trial in 0..40 {
            let n_demos = 1 + trial % 5;
            let demos: Vec<Vector3<f64>> = (0..n_demos)
                .map(|_| {
                    cap_point(
                        &axis,
                        0.9 * lcg(&mut state),
                        2.0 * std::f64::consts::PI * lcg(&mut state),
                    )
                })
                .collect();
            let alphas: Vec<f64> = (0..n_demos).map(|_| 2.0 * lcg(&mut state) - 0.5).collect();
            let p = cap_point(
                &axis,
                0.8 * lcg(&mut state),
                2.0 * std::f64::consts::PI * lcg(&mut state),
            );
            let sphere = atlas.cell_for_point(&p).unwrap().sphere;
            let rg = riemannian_gradient(&atlas, &alphas, &demos, &p).unwrap();
            if rg.norm() < 1e-6 {
                continue;
            }
            // Tangent frame at p.
            let u = (p - sphere.center()).normalize();
            let e1 = if u.x.abs() < 0.9 {
                Vector3::x().cross(&u).normalize()
            } else {
                Vector3::y().cross(&u).normalize()
            };
            let e2 = u.cross(&e1);
            let fd = |dir: Vector3<f64>| -> f64 {
                let fp = objective(
                    &atlas,
                    &alphas,
                    &demos,
                    &manifold::exp_map(&sphere, &TangentVector { base: p, vec: h * dir }).unwrap(),
                )
                .unwrap();
                let fm = objective(
                    &atlas,
                    &alphas,
                    &demos,
                    &manifold::exp_map(&sphere, &TangentVector { base: p, vec: -h * dir }).unwrap(),
                )
                .unwrap();
                (fp - fm) / (2.0 * h)
            };
            let g_fd = fd(e1) * e1 + fd(e2) * e2;
            let err = (g_fd - rg.vec).norm() / rg.norm();
            assert!(err <= 1e-4, "fd mismatch {err} at trial {trial}");
        }
    }

    fn unit_config() -> DecoderConfig {
        DecoderConfig::default()
    }

    #[test]
    fn predict_single_demo_converges_to_it() {
        let mut state = 113u64;
        let atlas = cap_atlas(diag_axis(), 1.2, &mut state);
        let axis = diag_axis();
        let demo = cap_point(&axis, 0.5, 1.0);
        let traj = GeoTrajectory::new(vec![(0.0, demo)]).unwrap();
        let model = ScoreModel::train(KernelSpec::se(1.0, 1.0).unwrap(), &traj.times(), 0.01).unwrap();
        let pred = predict(&model, &atlas, &traj.points(), 3.0, &unit_config(), None).unwrap();
        let arc = pred.point.normalize().dot(&demo.normalize()).clamp(-1.0, 1.0).acos();
        assert!(arc <= 1e-6, "distance to demo {arc}");
        assert!(pred.converged);
    }

    #[test]
    fn predict_two_equal_demos_returns_geodesic_midpoint() {
        let mut state = 127u64;
        let atlas = cap_atlas(diag_axis(), 1.25, &mut state);
        let demos = vec![(0.0, Vector3::x()), (1.0, Vector3::y())];
        let traj = GeoTrajectory::new(demos).unwrap();
        // A long length-scale gives the two demos near-equal scores at the
        // midpoint time.
        let model =
            ScoreModel::train(KernelSpec::se(1.0, 1e6).unwrap(), &traj.times(), 0.01).unwrap();
        let pred = predict(&model, &atlas, &traj.points(), 0.5, &unit_config(), None).unwrap();
        let mid = Vector3::new(1.0, 1.0, 0.0) / 2.0_f64.sqrt();
        assert!(
            (pred.point - mid).norm() <= 1e-5,
            "midpoint off by {:e}",
            (pred.point - mid).norm()
        );
    }

    #[test]
    fn descent_reduces_objective() {
        let mut state = 131u64;
        let atlas = cap_atlas(diag_axis(), 1.2, &mut state);
        let axis = diag_axis();
        let demos: Vec<(f64, Vector3<f64>)> = (0..5)
            .map(|i| {
                (
                    i as f64,
                    cap_point(&axis, 0.2 + 0.12 * i as f64, 1.3 * i as f64),
                )
            })
            .collect();
        let traj = GeoTrajectory::new(demos).unwrap();
        let model =
            ScoreModel::train(KernelSpec::se(1.0, 2.0).unwrap(), &traj.times(), 0.01).unwrap();
        let points = traj.points();
        let raw = model.scores(2.3).unwrap();
        let alphas: Vec<f64> = {
            let s: f64 = raw.iter().map(|a| a.abs()).sum();
            raw.iter().map(|a| a / s).collect()
        };
        let start = points[4];
        let f_start = objective(&atlas, &alphas, &points, &start).unwrap();
        let pred = predict(&model, &atlas, &points, 2.3, &unit_config(), Some(start)).unwrap();
        let f_end = objective(&atlas, &alphas, &points, &pred.point).unwrap();
        assert!(f_end <= f_start + 1e-12);
        // The line search can stall once objective deltas fall below f64
        // resolution; the gradient must still be essentially zero there.
        let g = riemannian_gradient(&atlas, &alphas, &points, &pred.point).unwrap();
        assert!(g.norm() <= 1e-6, "final gradient {}", g.norm());
    }

    #[test]
    fn imitate_empty_queries_gives_empty_trajectory() {
        let mut state = 137u64;
        let atlas = cap_atlas(diag_axis(), 1.2, &mut state);
        let axis = diag_axis();
        let demo = GeoTrajectory::new(vec![
            (0.0, cap_point(&axis, 0.3, 0.0)),
            (1.0, cap_point(&axis, 0.4, 1.0)),
        ])
        .unwrap();
        let out = imitate(
            &demo,
            KernelSpec::se(1.0, 1.0).unwrap(),
            0.01,
            &atlas,
            &[],
            &unit_config(),
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn imitate_periodic_scores_give_periodic_output() {
        let mut state = 139u64;
        let axis = diag_axis();
        let atlas = cap_atlas(axis, 1.3, &mut state);
        // A periodic demo sampled over two periods of 8.
        let base: Vec<(f64, Vector3<f64>)> = (0..8)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                (
                    j as f64,
                    cap_point(&axis, 0.45 + 0.1 * (2.0 * th).sin(), th.sin() * 0.8),
                )
            })
            .collect();
        let mut samples = base.clone();
        samples.extend(base.iter().map(|(t, p)| (t + 8.0, *p)));
        let demo = GeoTrajectory::new(samples).unwrap();
        let kernel = KernelSpec::periodic(1.0, 0.5, 8.0).unwrap();
        let queries: Vec<f64> = (0..8).map(|i| 0.5 + i as f64).collect();
        let shifted: Vec<f64> = queries.iter().map(|t| t + 8.0).collect();
        let a = imitate(&demo, kernel, 0.01, &atlas, &queries, &unit_config()).unwrap();
        let b = imitate(&demo, kernel, 0.01, &atlas, &shifted, &unit_config()).unwrap();
        for (pa, pb) in a.samples().iter().zip(b.samples()) {
            let arc = pa.1.normalize().dot(&pb.1.normalize()).clamp(-1.0, 1.0).acos();
            assert!(arc <= 1e-6, "periodicity transfer violated: {arc}");
        }
    }
}
