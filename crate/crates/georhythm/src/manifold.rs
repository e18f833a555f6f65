//! Exact geometric primitives on a sphere of arbitrary center and radius:
//! exponential and logarithm maps, tangent projection, parallel transport,
//! and great-circle distance. These are the building blocks for spherelets,
//! the decoder, and the quasi-periodic trajectory generators.
//!
//! All operations are pure and `Sphere` is immutable, so everything here is
//! safe to call concurrently.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Relative tolerance (times the radius) for "point lies on the sphere"
/// preconditions. Lifted points from spherelets carry projection round-off.
pub const ON_SPHERE_TOL: f64 = 1e-6;

/// Angular margin before the cut locus where the log map is refused.
const CUT_LOCUS_MARGIN: f64 = 1e-6;

/// A sphere `{ p : ||p - center|| = radius }` in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    center: Vector3<f64>,
    radius: f64,
}

/// A vector in the tangent plane of a sphere at `base`.
///
/// `vec` is orthogonal to the radial direction at `base`; its Euclidean norm
/// is an arc length on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: Vector3<f64>,
    pub vec: Vector3<f64>,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

impl Sphere {
    pub fn new(center: Vector3<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidHyperparameter {
                name: "radius",
                value: radius,
            });
        }
        Ok(Sphere { center, radius })
    }

    /// The unit sphere centered at the origin.
    pub fn unit() -> Self {
        Sphere {
            center: Vector3::zeros(),
            radius: 1.0,
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether `p` lies on the sphere within the relative tolerance.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        ((p - self.center).norm() - self.radius).abs() <= ON_SPHERE_TOL * self.radius
    }

    fn require_on_sphere(&self, p: &Vector3<f64>) -> Result<()> {
        let dist = ((p - self.center).norm() - self.radius).abs();
        if dist <= ON_SPHERE_TOL * self.radius {
            Ok(())
        } else {
            Err(Error::OffSphere {
                dist,
                radius: self.radius,
            })
        }
    }

    /// Unit radial direction at `p`.
    fn unit_at(&self, p: &Vector3<f64>) -> Vector3<f64> {
        (p - self.center).normalize()
    }

    /// Radially projects `p` onto the sphere surface.
    pub fn project_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.center + self.radius * self.unit_at(p)
    }
}

/// Follows the great circle from `v.base` in direction `v.vec` for arc
/// length `||v.vec||`.
pub fn exp_map(s: &Sphere, v: &TangentVector) -> Result<Vector3<f64>> {
    s.require_on_sphere(&v.base)?;
    let arc = v.vec.norm();
    if arc == 0.0 {
        return Ok(v.base);
    }
    let u = s.unit_at(&v.base);
    // Strip any radial round-off from the direction before following it.
    let tangential = v.vec - u * u.dot(&v.vec);
    let tn = tangential.norm();
    if tn == 0.0 {
        return Ok(v.base);
    }
    let dir = tangential / tn;
    let angle = arc / s.radius();
    let moved = u * angle.cos() + dir * angle.sin();
    Ok(s.center() + s.radius() * moved.normalize())
}

/// Inverse of the exponential map: the tangent vector at `base` whose
/// great-circle flow reaches `target`. Its norm equals the great-circle
/// distance. Undefined at the cut locus (antipodal points).
pub fn log_map(s: &Sphere, base: &Vector3<f64>, target: &Vector3<f64>) -> Result<TangentVector> {
    s.require_on_sphere(base)?;
    s.require_on_sphere(target)?;
    let u1 = s.unit_at(base);
    let u2 = s.unit_at(target);
    let c = u1.dot(&u2).clamp(-1.0, 1.0);
    let angle = c.acos();
    if angle >= std::f64::consts::PI - CUT_LOCUS_MARGIN {
        return Err(Error::CutLocus);
    }
    if angle == 0.0 {
        return Ok(TangentVector {
            base: *base,
            vec: Vector3::zeros(),
        });
    }
    let w = u2 - c * u1;
    let wn = w.norm();
    if wn == 0.0 {
        return Ok(TangentVector {
            base: *base,
            vec: Vector3::zeros(),
        });
    }
    Ok(TangentVector {
        base: *base,
        vec: (angle * s.radius() / wn) * w,
    })
}

/// Orthogonal projection of an ambient vector onto the tangent plane at
/// `base`, computed as `v - u (u . v)` with `u` the unit radial direction.
///
/// The unnormalized projector `r^2 I - p p^T` differs from this by the
/// positive scalar `r^2`, which downstream gradient steps absorb into the
/// step size; the normalized form keeps step tuning radius-independent.
pub fn project_tangent(s: &Sphere, base: &Vector3<f64>, v: &Vector3<f64>) -> Result<TangentVector> {
    s.require_on_sphere(base)?;
    let u = s.unit_at(base);
    Ok(TangentVector {
        base: *base,
        vec: v - u * u.dot(v),
    })
}

/// Parallel transport of a tangent vector along the geodesic from `from` to
/// `to`. Preserves the norm; the result is tangent at `to`.
pub fn parallel_transport(
    s: &Sphere,
    from: &Vector3<f64>,
    to: &Vector3<f64>,
    v: &TangentVector,
) -> Result<TangentVector> {
    s.require_on_sphere(from)?;
    s.require_on_sphere(to)?;
    let l_ft = log_map(s, from, to)?;
    let d2 = l_ft.vec.norm_squared();
    if d2 == 0.0 {
        return Ok(TangentVector {
            base: *to,
            vec: v.vec,
        });
    }
    let l_tf = log_map(s, to, from)?;
    let coef = l_ft.vec.dot(&v.vec) / d2;
    let transported = v.vec - coef * (l_ft.vec + l_tf.vec);
    // Remove radial round-off at the destination.
    let u = s.unit_at(to);
    let clean = transported - u * u.dot(&transported);
    // Transport is an isometry; restore the exact norm lost to round-off.
    let n = clean.norm();
    let vec = if n > 0.0 {
        clean * (v.vec.norm() / n)
    } else {
        clean
    };
    Ok(TangentVector { base: *to, vec })
}

/// Great-circle distance `r * arccos(u_a . u_b)`, clamped against round-off.
pub fn great_circle_distance(s: &Sphere, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<f64> {
    s.require_on_sphere(a)?;
    s.require_on_sphere(b)?;
    Ok(s.radius() * s.unit_at(a).dot(&s.unit_at(b)).clamp(-1.0, 1.0).acos())
}
