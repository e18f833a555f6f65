//! Imitation quality metrics: mean reproduction error over the training
//! times and mean generalization error over held-out times, under a
//! pluggable surface distance.

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{self, Sphere};
use crate::patterns::GeoTrajectory;
use crate::spherelets::SurfaceAtlas;

/// The distance used to compare predicted and demonstrated points.
pub enum SurfaceDistance<'a> {
    /// `arccos(a . b)` on the unit sphere at the origin.
    UnitSphereArc,
    /// Great-circle distance on an explicit sphere.
    Sphere(&'a Sphere),
    /// Spherelet-atlas geodesic distance.
    Atlas(&'a SurfaceAtlas),
}

impl SurfaceDistance<'_> {
    pub fn distance(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<f64> {
        match self {
            SurfaceDistance::UnitSphereArc => {
                Ok(a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos())
            }
            SurfaceDistance::Sphere(s) => manifold::great_circle_distance(s, a, b),
            SurfaceDistance::Atlas(atlas) => atlas.geodesic_distance(a, b),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SurfaceDistance::UnitSphereArc => "arccos_unit_sphere",
            SurfaceDistance::Sphere(_) => "great_circle",
            SurfaceDistance::Atlas(_) => "atlas_geodesic",
        }
    }
}

/// Mean error plus the per-point residuals behind it.
#[derive(Debug, Clone)]
pub struct ErrorStats {
    pub mean: f64,
    pub residuals: Vec<f64>,
}

fn residuals(
    pred: &GeoTrajectory,
    truth: &GeoTrajectory,
    distance: &SurfaceDistance,
) -> Result<Vec<f64>> {
    if pred.len() != truth.len() {
        return Err(Error::TimestampMismatch(pred.len().min(truth.len())));
    }
    let mut out = Vec::with_capacity(pred.len());
    for (i, (p, t)) in pred.samples().iter().zip(truth.samples()).enumerate() {
        if (p.0 - t.0).abs() > 1e-9 * p.0.abs().max(1.0) {
            return Err(Error::TimestampMismatch(i));
        }
        out.push(distance.distance(&p.1, &t.1)?);
    }
    Ok(out)
}

/// Mean distance between prediction and truth over the training times.
pub fn reproduction_error(
    pred: &GeoTrajectory,
    truth: &GeoTrajectory,
    distance: &SurfaceDistance,
) -> Result<ErrorStats> {
    if pred.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let residuals = residuals(pred, truth, distance)?;
    Ok(ErrorStats {
        mean: residuals.iter().sum::<f64>() / residuals.len() as f64,
        residuals,
    })
}

/// Mean distance between prediction and truth over held-out times.
pub fn generalization_error(
    pred: &GeoTrajectory,
    truth: &GeoTrajectory,
    distance: &SurfaceDistance,
) -> Result<ErrorStats> {
    if pred.is_empty() {
        return Err(Error::EmptyGeneralizationSet);
    }
    let residuals = residuals(pred, truth, distance)?;
    Ok(ErrorStats {
        mean: residuals.iter().sum::<f64>() / residuals.len() as f64,
        residuals,
    })
}

/// Evaluation summary; serialized as JSON with lowercase snake_case keys.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub c_t: f64,
    pub c_g: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub distance_kind: String,
    /// Training residuals first, then generalization residuals.
    pub residuals: Vec<f64>,
}

impl EvalReport {
    pub fn new(
        reproduction: &ErrorStats,
        generalization: Option<&ErrorStats>,
        distance_kind: &str,
    ) -> Self {
        let n = reproduction.residuals.len();
        let g = generalization.map(|g| g.residuals.len()).unwrap_or(0);
        let mut residuals = reproduction.residuals.clone();
        if let Some(gen) = generalization {
            residuals.extend_from_slice(&gen.residuals);
        }
        EvalReport {
            c_t: reproduction.mean,
            c_g: generalization.map(|g| g.mean),
            n,
            m: n + g,
            distance_kind: distance_kind.to_string(),
            residuals,
        }
    }
}
