//! Generators and checkers for periodic and quasi-periodic geometric
//! trajectories, plus the synthetic demonstrations used by the experiments.
//!
//! A trajectory is *periodic* when each period repeats the last exactly,
//! *arithmetic* when each period steps by a parallel-transported drift of
//! fixed arc length, and *cumulative* when the step at period `a` has arc
//! length `a` times the base drift. The checkers measure the distance
//! relations these definitions imply: equal consecutive steps for the
//! arithmetic kind, steps growing as `a` for the cumulative kind, and
//! colinearity of three consecutive period images along one geodesic.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::manifold::{self, Sphere, TangentVector};

/// A time-stamped sequence of 3-D points, optionally with a known period.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoTrajectory {
    samples: Vec<(f64, Vector3<f64>)>,
    period: Option<f64>,
}

impl GeoTrajectory {
    /// Builds a trajectory; times must be strictly increasing.
    pub fn new(samples: Vec<(f64, Vector3<f64>)>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::NonMonotoneTrajectory(w[1].0));
            }
        }
        Ok(GeoTrajectory {
            samples,
            period: None,
        })
    }

    pub fn with_period(samples: Vec<(f64, Vector3<f64>)>, period: f64) -> Result<Self> {
        let mut t = Self::new(samples)?;
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidHyperparameter {
                name: "period",
                value: period,
            });
        }
        t.period = Some(period);
        Ok(t)
    }

    pub fn samples(&self) -> &[(f64, Vector3<f64>)] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn points(&self) -> Vec<Vector3<f64>> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// The three rhythmic pattern kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Periodic,
    Arithmetic,
    Cumulative,
}

impl PatternKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(PatternKind::Periodic),
            "arithmetic" => Ok(PatternKind::Arithmetic),
            "cumulative" => Ok(PatternKind::Cumulative),
            other => Err(Error::Config(format!(
                "unknown pattern kind '{other}' (expected periodic, arithmetic, or cumulative)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::Periodic => "periodic",
            PatternKind::Arithmetic => "arithmetic",
            PatternKind::Cumulative => "cumulative",
        }
    }
}

/// Classification outcome of [`classify_pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternClass {
    Periodic,
    Arithmetic,
    Cumulative,
    Aperiodic,
}

impl PatternClass {
    pub fn name(&self) -> &'static str {
        match self {
            PatternClass::Periodic => "periodic",
            PatternClass::Arithmetic => "arithmetic",
            PatternClass::Cumulative => "cumulative",
            PatternClass::Aperiodic => "aperiodic",
        }
    }
}

/// Residual report from [`check_pattern`].
#[derive(Debug, Clone, Copy)]
pub struct PatternReport {
    pub kind: PatternKind,
    /// Max defining residual: consecutive-step distance for periodic, step
    /// equality defect for arithmetic, scaled-step defect for cumulative.
    pub residual: f64,
    /// Max defect of `D(P_{a-1}, P_{a+1}) = D(P_{a-1}, P_a) + D(P_a, P_{a+1})`
    /// (zero by convention for the periodic kind).
    pub colinearity_defect: f64,
    /// Mean per-period step distance; tells drifting patterns from the
    /// degenerate zero-drift case.
    pub mean_step: f64,
    /// Number of aligned periods found.
    pub periods: usize,
}

impl PatternReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.max(self.colinearity_defect)
    }
}

/// Drift field: given `(tau, P(tau))`, returns the tangent vector at
/// `P(tau)` that sets the per-period step. Continuity of the field is the
/// caller's responsibility.
pub type DriftField<'a> = dyn Fn(f64, &Vector3<f64>) -> Vector3<f64> + 'a;

/// Surface distance callback used by the pattern checkers.
pub type DistanceFn<'a> = dyn Fn(&Vector3<f64>, &Vector3<f64>) -> Result<f64> + 'a;

fn require_base_within_period(base: &GeoTrajectory) -> Result<f64> {
    let period = base.period().ok_or_else(|| {
        Error::Config("base trajectory needs a period for pattern extension".into())
    })?;
    if base.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let last = base.samples().last().unwrap().0;
    if last >= period {
        return Err(Error::Config(format!(
            "base trajectory must lie within [0, {period}), last time is {last}"
        )));
    }
    Ok(period)
}

/// Repeats the base period verbatim: `P(tau + a T) = P(tau)`.
pub fn extend_periodic(base: &GeoTrajectory, n_periods: usize) -> Result<GeoTrajectory> {
    let period = require_base_within_period(base)?;
    let mut samples = Vec::with_capacity(base.len() * n_periods.max(1));
    for a in 0..n_periods.max(1) {
        for (t, p) in base.samples() {
            samples.push((t + a as f64 * period, *p));
        }
    }
    GeoTrajectory::with_period(samples, period)
}

fn extend_with_drift(
    base: &GeoTrajectory,
    sphere: &Sphere,
    drift: &DriftField,
    n_periods: usize,
    cumulative: bool,
) -> Result<GeoTrajectory> {
    let period = require_base_within_period(base)?;
    for (_, p) in base.samples() {
        if !sphere.contains(p) {
            return Err(Error::OffSphere {
                dist: ((p - sphere.center()).norm() - sphere.radius()).abs(),
                radius: sphere.radius(),
            });
        }
    }
    let limit = std::f64::consts::PI * sphere.radius();
    let n = base.len();
    let mut samples: Vec<(f64, Vector3<f64>)> = base.samples().to_vec();
    let mut previous: Vec<Vector3<f64>> = base.points();
    for a in 1..n_periods.max(1) {
        let scale = if cumulative { a as f64 } else { 1.0 };
        let mut current = Vec::with_capacity(n);
        for j in 0..n {
            let (tau, p0) = base.samples()[j];
            let c = drift(tau, &p0);
            let radial = (p0 - sphere.center()).normalize().dot(&c).abs();
            if radial > 1e-9 * c.norm().max(f64::MIN_POSITIVE) * sphere.radius().max(1.0) {
                return Err(Error::Config(format!(
                    "drift vector at tau = {tau} is not tangent to the sphere"
                )));
            }
            let step = scale * c.norm();
            if step >= limit {
                return Err(Error::DriftTooLarge { step, limit });
            }
            let carried = manifold::parallel_transport(
                sphere,
                &p0,
                &previous[j],
                &TangentVector {
                    base: p0,
                    vec: scale * c,
                },
            )?;
            current.push(manifold::exp_map(sphere, &carried)?);
        }
        for (j, p) in current.iter().enumerate() {
            samples.push((base.samples()[j].0 + a as f64 * period, *p));
        }
        previous = current;
    }
    GeoTrajectory::with_period(samples, period)
}

/// Quasi-periodic extension with a fixed transported step per period:
/// each period's image is the exponential of the drift carried from the
/// base period to the previous period's point.
pub fn extend_arithmetic(
    base: &GeoTrajectory,
    sphere: &Sphere,
    drift: &DriftField,
    n_periods: usize,
) -> Result<GeoTrajectory> {
    extend_with_drift(base, sphere, drift, n_periods, false)
}

/// Quasi-periodic extension whose step into period `a` is `a * c(tau)`.
pub fn extend_cumulative(
    base: &GeoTrajectory,
    sphere: &Sphere,
    drift: &DriftField,
    n_periods: usize,
) -> Result<GeoTrajectory> {
    extend_with_drift(base, sphere, drift, n_periods, true)
}

/// Groups samples into aligned period chains `P_a(tau)`.
fn period_chains(traj: &GeoTrajectory, period: f64) -> Result<Vec<Vec<Vector3<f64>>>> {
    if traj.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let tol = 1e-9 * period.max(1.0);
    let t0 = traj.samples()[0].0;
    let base: Vec<(f64, Vector3<f64>)> = traj
        .samples()
        .iter()
        .take_while(|(t, _)| t - t0 < period - tol)
        .cloned()
        .collect();
    let mut chains: Vec<Vec<Vector3<f64>>> = base.iter().map(|(_, p)| vec![p.to_owned()]).collect();
    let mut idx = base.len();
    let mut a = 1usize;
    'periods: loop {
        for (j, (tau, _)) in base.iter().enumerate() {
            let want = tau + a as f64 * period;
            while idx < traj.len() && traj.samples()[idx].0 < want - tol {
                idx += 1;
            }
            if idx < traj.len() && (traj.samples()[idx].0 - want).abs() <= tol {
                chains[j].push(traj.samples()[idx].1);
                idx += 1;
            } else if j == 0 && idx >= traj.len() {
                break 'periods;
            } else {
                return Err(Error::MisalignedSampling(want));
            }
        }
        a += 1;
    }
    if a < 3 {
        return Err(Error::MisalignedSampling(t0 + a as f64 * period));
    }
    Ok(chains)
}

/// Measures how far a trajectory is from the given pattern kind: the max
/// defining residual together with the colinearity defect over all sampled
/// phases and periods.
pub fn check_pattern(
    traj: &GeoTrajectory,
    period: f64,
    kind: PatternKind,
    distance: &DistanceFn,
) -> Result<PatternReport> {
    let chains = period_chains(traj, period)?;
    let periods = chains[0].len();
    let mut residual: f64 = 0.0;
    let mut colinearity: f64 = 0.0;
    let mut step_sum = 0.0;
    let mut step_count = 0usize;
    for chain in &chains {
        let d: Vec<f64> = chain
            .windows(2)
            .map(|w| distance(&w[0], &w[1]))
            .collect::<Result<_>>()?;
        for &s in &d {
            step_sum += s;
            step_count += 1;
        }
        match kind {
            PatternKind::Periodic => {
                for &s in &d {
                    residual = residual.max(s);
                }
            }
            PatternKind::Arithmetic => {
                for w in d.windows(2) {
                    residual = residual.max((w[0] - w[1]).abs());
                }
            }
            PatternKind::Cumulative => {
                for (a, w) in d.windows(2).enumerate() {
                    // w[0] is the step into period a+1, w[1] into a+2.
                    residual = residual.max((w[0] / (a + 1) as f64 - w[1] / (a + 2) as f64).abs());
                }
            }
        }
        if kind != PatternKind::Periodic {
            for a in 1..chain.len() - 1 {
                let span = distance(&chain[a - 1], &chain[a + 1])?;
                let d1 = distance(&chain[a - 1], &chain[a])?;
                let d2 = distance(&chain[a], &chain[a + 1])?;
                colinearity = colinearity.max((span - d1 - d2).abs());
            }
        }
    }
    Ok(PatternReport {
        kind,
        residual,
        colinearity_defect: colinearity,
        mean_step: step_sum / step_count.max(1) as f64,
        periods,
    })
}

/// Classifies a trajectory by exclusive precedence: periodic (zero steps)
/// first, then arithmetic, then cumulative, else aperiodic. The precedence
/// resolves the degenerate overlap where a periodic trajectory also
/// satisfies the drift relations with zero drift.
pub fn classify_pattern(
    traj: &GeoTrajectory,
    period: f64,
    distance: &DistanceFn,
    tolerance: f64,
) -> Result<PatternClass> {
    let periodic = check_pattern(traj, period, PatternKind::Periodic, distance)?;
    if periodic.residual <= tolerance {
        return Ok(PatternClass::Periodic);
    }
    let arithmetic = check_pattern(traj, period, PatternKind::Arithmetic, distance)?;
    if arithmetic.max_residual() <= tolerance {
        return Ok(PatternClass::Arithmetic);
    }
    let cumulative = check_pattern(traj, period, PatternKind::Cumulative, distance)?;
    if cumulative.max_residual() <= tolerance {
        return Ok(PatternClass::Cumulative);
    }
    Ok(PatternClass::Aperiodic)
}

/// Built-in demonstration shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoShape {
    /// Open stroke: three quarters of a small circle at latitude 30 deg,
    /// traversed once. `n_periods` is ignored.
    CShape,
    /// Figure-eight repeated periodically.
    Infinity,
    /// Figure-eight with a cumulative latitude drift.
    Spiral,
}

impl DemoShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "c_shape" | "c-shape" | "cshape" => Ok(DemoShape::CShape),
            "infinity" => Ok(DemoShape::Infinity),
            "spiral" => Ok(DemoShape::Spiral),
            other => Err(Error::Config(format!(
                "unknown demo shape '{other}' (expected c_shape, infinity, or spiral)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DemoShape::CShape => "c_shape",
            DemoShape::Infinity => "infinity",
            DemoShape::Spiral => "spiral",
        }
    }
}

/// Longitude amplitude of the figure-eight, radians.
pub const INFINITY_LON_AMPLITUDE: f64 = 0.8;
/// Latitude amplitude of the figure-eight, radians.
pub const INFINITY_LAT_AMPLITUDE: f64 = 0.4;
/// Per-period drift of the spiral, radians of arc.
pub const SPIRAL_DRIFT: f64 = 0.05;
/// Latitude of the C-shaped stroke, radians.
pub const C_SHAPE_LATITUDE: f64 = std::f64::consts::FRAC_PI_6;
/// Azimuthal sweep of the C-shaped stroke.
pub const C_SHAPE_SWEEP: f64 = 1.5 * std::f64::consts::PI;

fn latlon_point(sphere: &Sphere, lat: f64, lon: f64) -> Vector3<f64> {
    sphere.center()
        + sphere.radius() * Vector3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
}

/// Unit tangent in the increasing-latitude direction.
fn latitude_tangent(sphere: &Sphere, p: &Vector3<f64>) -> Vector3<f64> {
    let u = (p - sphere.center()) / sphere.radius();
    let lat = u.z.clamp(-1.0, 1.0).asin();
    let lon = u.y.atan2(u.x);
    Vector3::new(-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos())
}

/// Emits a synthetic demonstration on the sphere. Time stamps are sample
/// indices, so the trajectory period equals `n_samples` time units.
pub fn synth_demo(
    shape: DemoShape,
    sphere: &Sphere,
    n_samples: usize,
    n_periods: usize,
) -> Result<GeoTrajectory> {
    if n_samples < 2 {
        return Err(Error::Config("n_samples must be at least 2".into()));
    }
    if n_periods == 0 {
        return Err(Error::Config("n_periods must be at least 1".into()));
    }
    let period = n_samples as f64;
    match shape {
        DemoShape::CShape => {
            let samples = (0..n_samples)
                .map(|j| {
                    let phi = C_SHAPE_SWEEP * j as f64 / (n_samples - 1) as f64;
                    (j as f64, latlon_point(sphere, C_SHAPE_LATITUDE, phi))
                })
                .collect();
            GeoTrajectory::with_period(samples, period)
        }
        DemoShape::Infinity => {
            let base = infinity_base(sphere, n_samples)?;
            extend_periodic(&base, n_periods)
        }
        DemoShape::Spiral => {
            let base = infinity_base(sphere, n_samples)?;
            let drift = move |_tau: f64, p: &Vector3<f64>| {
                SPIRAL_DRIFT * sphere.radius() * latitude_tangent(sphere, p)
            };
            extend_cumulative(&base, sphere, &drift, n_periods)
        }
    }
}

fn infinity_base(sphere: &Sphere, n_samples: usize) -> Result<GeoTrajectory> {
    let samples = (0..n_samples)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_samples as f64;
            let lon = INFINITY_LON_AMPLITUDE * theta.sin();
            let lat = INFINITY_LAT_AMPLITUDE * (2.0 * theta).sin();
            (j as f64, latlon_point(sphere, lat, lon))
        })
        .collect();
    GeoTrajectory::with_period(samples, n_samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::great_circle_distance;

    fn unit() -> Sphere {
        Sphere::unit()
    }

    fn dist_on<'a>(s: &'a Sphere) -> impl Fn(&Vector3<f64>, &Vector3<f64>) -> Result<f64> + 'a {
        move |a, b| great_circle_distance(s, a, b)
    }

    fn small_base(s: &Sphere, n: usize) -> GeoTrajectory {
        let samples = (0..n)
            .map(|j| {
                let phi = 0.8 * j as f64 / n as f64;
                (j as f64, latlon_point(s, 0.2, phi))
            })
            .collect();
        GeoTrajectory::with_period(samples, n as f64).unwrap()
    }

    /// Meridian drift keeps every transported step on one great circle, so
    /// the colinearity identities hold exactly.
    fn meridian_drift(s: &Sphere, scale: f64) -> impl Fn(f64, &Vector3<f64>) -> Vector3<f64> + '_ {
        move |_tau, p| scale * s.radius() * latitude_tangent(s, p)
    }

    #[test]
    fn trajectory_times_must_increase() {
        let p = Vector3::x();
        assert!(GeoTrajectory::new(vec![(0.0, p), (0.0, p)]).is_err());
        assert!(GeoTrajectory::new(vec![(1.0, p), (0.5, p)]).is_err());
        assert!(GeoTrajectory::new(vec![]).unwrap().is_empty());
    }

    #[test]
    fn periodic_extension_repeats_exactly() {
        let s = unit();
        let base = small_base(&s, 10);
        let one = extend_periodic(&base, 1).unwrap();
        assert_eq!(one.samples(), base.samples());
        let five = extend_periodic(&base, 5).unwrap();
        assert_eq!(five.len(), 50);
        for a in 0..5 {
            for j in 0..10 {
                assert_eq!(five.samples()[a * 10 + j].1, base.samples()[j].1);
            }
        }
        let d = dist_on(&s);
        let report = check_pattern(&five, 10.0, PatternKind::Periodic, &d).unwrap();
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.periods, 5);
    }

    #[test]
    fn arithmetic_zero_drift_is_periodic() {
        let s = unit();
        let base = small_base(&s, 8);
        let drift = |_: f64, _: &Vector3<f64>| Vector3::zeros();
        let out = extend_arithmetic(&base, &s, &drift, 4).unwrap();
        let per = extend_periodic(&base, 4).unwrap();
        for (a, b) in out.samples().iter().zip(per.samples()) {
            assert!((a.1 - b.1).norm() <= 1e-12);
        }
    }

    #[test]
    fn arithmetic_consecutive_steps_equal_drift_norm() {
        let s = unit();
        let base = small_base(&s, 6);
        let drift = meridian_drift(&s, 0.05);
        let out = extend_arithmetic(&base, &s, &drift, 5).unwrap();
        let d = dist_on(&s);
        let report = check_pattern(&out, 6.0, PatternKind::Arithmetic, &d).unwrap();
        assert!(report.residual <= 1e-9, "{}", report.residual);
        assert!((report.mean_step - 0.05).abs() <= 1e-9);
        assert!(report.colinearity_defect <= 1e-6);
    }

    #[test]
    fn cumulative_steps_scale_with_period_index() {
        let s = unit();
        let base = small_base(&s, 6);
        let drift = meridian_drift(&s, 0.05);
        let out = extend_cumulative(&base, &s, &drift, 5).unwrap();
        let d = dist_on(&s);
        let report = check_pattern(&out, 6.0, PatternKind::Cumulative, &d).unwrap();
        assert!(report.residual <= 1e-9, "{}", report.residual);
        assert!(report.colinearity_defect <= 1e-6);
        for a in 1..5 {
            let prev = out.samples()[(a - 1) * 6].1;
            let cur = out.samples()[a * 6].1;
            let step = great_circle_distance(&s, &prev, &cur).unwrap();
            assert!((step - a as f64 * 0.05).abs() <= 1e-9);
        }
    }

    #[test]
    fn cumulative_first_period_matches_arithmetic() {
        let s = unit();
        let base = small_base(&s, 6);
        let drift = meridian_drift(&s, 0.04);
        let ar = extend_arithmetic(&base, &s, &drift, 2).unwrap();
        let cu = extend_cumulative(&base, &s, &drift, 2).unwrap();
        assert_eq!(ar.samples(), cu.samples());
    }

    #[test]
    fn cut_locus_violation_errors() {
        let s = unit();
        let base = small_base(&s, 4);
        let drift = meridian_drift(&s, 0.9);
        // Step into period 4 would have arc length 3.6 > pi.
        assert!(matches!(
            extend_cumulative(&base, &s, &drift, 5),
            Err(Error::DriftTooLarge { .. })
        ));
    }

    #[test]
    fn generator_checker_duality() {
        let s = unit();
        let base = small_base(&s, 6);
        let drift = meridian_drift(&s, 0.05);
        let d = dist_on(&s);
        let tol = 1e-6;

        let periodic = extend_periodic(&base, 5).unwrap();
        let arithmetic = extend_arithmetic(&base, &s, &drift, 5).unwrap();
        let cumulative = extend_cumulative(&base, &s, &drift, 5).unwrap();

        assert_eq!(
            classify_pattern(&periodic, 6.0, &d, tol).unwrap(),
            PatternClass::Periodic
        );
        assert_eq!(
            classify_pattern(&arithmetic, 6.0, &d, tol).unwrap(),
            PatternClass::Arithmetic
        );
        assert_eq!(
            classify_pattern(&cumulative, 6.0, &d, tol).unwrap(),
            PatternClass::Cumulative
        );

        // Nonzero-drift outputs fail the other kinds' checks outright.
        assert!(check_pattern(&arithmetic, 6.0, PatternKind::Periodic, &d)
            .unwrap()
            .residual
            > tol);
        assert!(check_pattern(&arithmetic, 6.0, PatternKind::Cumulative, &d)
            .unwrap()
            .residual
            > tol);
        assert!(check_pattern(&cumulative, 6.0, PatternKind::Periodic, &d)
            .unwrap()
            .residual
            > tol);
        assert!(check_pattern(&cumulative, 6.0, PatternKind::Arithmetic, &d)
            .unwrap()
            .residual
            > tol);
    }

    #[test]
    fn aperiodic_walk_reports_large_residuals() {
        let s = unit();
        let samples: Vec<(f64, Vector3<f64>)> = (0..24)
            .map(|j| {
                let t = j as f64;
                let lat = 0.5 * (1.3 * t).sin() + 0.2 * (0.7 * t).cos();
                let lon = 0.9 * (0.9 * t).sin();
                (t, latlon_point(&s, lat, lon))
            })
            .collect();
        let traj = GeoTrajectory::new(samples).unwrap();
        let d = dist_on(&s);
        assert_eq!(
            classify_pattern(&traj, 6.0, &d, 1e-6).unwrap(),
            PatternClass::Aperiodic
        );
    }

    #[test]
    fn misaligned_sampling_errors() {
        let s = unit();
        let base = small_base(&s, 5);
        let mut samples = extend_periodic(&base, 4).unwrap().samples().to_vec();
        samples.remove(12);
        let traj = GeoTrajectory::new(samples).unwrap();
        let d = dist_on(&s);
        assert!(matches!(
            check_pattern(&traj, 5.0, PatternKind::Periodic, &d),
            Err(Error::MisalignedSampling(_))
        ));
    }

    #[test]
    fn synth_demos_lie_on_sphere() {
        let s = Sphere::new(Vector3::new(1.0, -2.0, 3.0), 2.0).unwrap();
        for shape in [DemoShape::CShape, DemoShape::Infinity, DemoShape::Spiral] {
            let traj = synth_demo(shape, &s, 20, 4).unwrap();
            for (_, p) in traj.samples() {
                assert!(
                    ((p - s.center()).norm() - s.radius()).abs() <= 1e-12 * s.radius(),
                    "{shape:?} sample off sphere"
                );
            }
        }
    }

    #[test]
    fn synth_infinity_is_periodic() {
        let s = unit();
        let traj = synth_demo(DemoShape::Infinity, &s, 20, 4).unwrap();
        let d = dist_on(&s);
        let report = check_pattern(&traj, 20.0, PatternKind::Periodic, &d).unwrap();
        assert!(report.residual <= 1e-9);
        assert_eq!(report.periods, 4);
    }

    #[test]
    fn synth_spiral_is_cumulative() {
        let s = unit();
        let traj = synth_demo(DemoShape::Spiral, &s, 20, 4).unwrap();
        let d = dist_on(&s);
        let report = check_pattern(&traj, 20.0, PatternKind::Cumulative, &d).unwrap();
        assert!(report.max_residual() <= 1e-6, "{}", report.max_residual());
    }

    #[test]
    fn synth_cshape_is_a_single_stroke() {
        let s = unit();
        let traj = synth_demo(DemoShape::CShape, &s, 40, 3).unwrap();
        assert_eq!(traj.len(), 40);
        let first = traj.samples()[0].1;
        let last = traj.samples()[39].1;
        assert!((first - last).norm() > 0.5, "stroke must stay open");
    }
}
