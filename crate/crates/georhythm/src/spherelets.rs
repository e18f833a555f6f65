//! Surface approximation by grid-partitioned osculating spheres.
//!
//! A point cloud is projected onto the plane of its two largest principal
//! components; a grid on that plane partitions the cloud into cells, and
//! each cell with enough points gets a closed-form sphere fit. Geodesic
//! distances between surface points are then sums of great-circle arcs, one
//! arc per traversed cell, with the arc endpoints obtained by lifting the
//! straight in-plane segment's grid crossings back to the cell spheres.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::manifold::Sphere;

/// Condition-number limit on the fit covariance before a patch is declared
/// degenerate (coplanar or collinear points).
const FIT_CONDITION_LIMIT: f64 = 1e12;

/// A 3-D point cloud in consistent length units.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::CloudTooSmall { got: 0, need: 1 });
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The projection plane: origin at the cloud centroid, normal along the
/// least principal component, two in-plane axes along the remaining
/// principal directions. The triad is right-handed and orthonormal.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionPlane {
    pub origin: Vector3<f64>,
    pub axis1: Vector3<f64>,
    pub axis2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl ProjectionPlane {
    /// In-plane coordinates of a 3-D point.
    pub fn to_plane(&self, p: &Vector3<f64>) -> (f64, f64) {
        let d = p - self.origin;
        (d.dot(&self.axis1), d.dot(&self.axis2))
    }

    /// Signed offset of a point along the normal.
    pub fn offset(&self, p: &Vector3<f64>) -> f64 {
        (p - self.origin).dot(&self.normal)
    }

    /// The 3-D point on the plane with the given in-plane coordinates.
    pub fn from_plane(&self, q: (f64, f64)) -> Vector3<f64> {
        self.origin + q.0 * self.axis1 + q.1 * self.axis2
    }
}

/// Grid lines on the projection plane. Vertical lines are constant first
/// coordinate, horizontal lines constant second coordinate; zero lines in
/// either direction means a single cell spanning the whole plane (outermost
/// cells always extend to infinity).
#[derive(Debug, Clone, Default)]
pub struct GridSpec {
    v_lines: Vec<f64>,
    h_lines: Vec<f64>,
}

impl GridSpec {
    pub fn new(v_lines: Vec<f64>, h_lines: Vec<f64>) -> Result<Self> {
        for lines in [&v_lines, &h_lines] {
            if lines.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(
                    "grid line coordinates must be strictly increasing".into(),
                ));
            }
            if lines.iter().any(|l| !l.is_finite()) {
                return Err(Error::Config("grid line coordinates must be finite".into()));
            }
        }
        Ok(GridSpec { v_lines, h_lines })
    }

    /// A grid with no lines: one cell covering the whole plane.
    pub fn single_cell() -> Self {
        GridSpec::default()
    }

    /// `nv` x `nh` equally spaced interior lines over the given in-plane
    /// bounding box.
    pub fn uniform(nv: usize, nh: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        let lines = |n: usize, (lo, hi): (f64, f64)| -> Vec<f64> {
            (1..=n)
                .map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
                .collect()
        };
        GridSpec::new(lines(nv, x_range), lines(nh, y_range))
    }

    pub fn v_lines(&self) -> &[f64] {
        &self.v_lines
    }

    pub fn h_lines(&self) -> &[f64] {
        &self.h_lines
    }

    pub fn n_cols(&self) -> usize {
        self.v_lines.len() + 1
    }

    pub fn n_rows(&self) -> usize {
        self.h_lines.len() + 1
    }

    /// Cell containing an in-plane point. Cells are half-open `[lo, hi)`:
    /// a point exactly on a line belongs to the higher-index cell.
    pub fn cell_of(&self, q: (f64, f64)) -> (usize, usize) {
        let col = self.v_lines.partition_point(|&l| l <= q.0);
        let row = self.h_lines.partition_point(|&l| l <= q.1);
        (col, row)
    }
}

/// One fitted grid cell.
#[derive(Debug, Clone, Copy)]
pub struct CellFit {
    pub sphere: Sphere,
    /// Mean of the cell's data points; picks the lift side.
    pub centroid: Vector3<f64>,
    pub count: usize,
}

/// State of one grid cell after the atlas build.
#[derive(Debug, Clone, Copy)]
pub enum CellState {
    Fitted(CellFit),
    /// Fewer than four points landed in the cell.
    TooFew { count: usize },
    /// Enough points, but the sphere fit was ill-posed.
    Degenerate { count: usize },
}

impl CellState {
    pub fn fit(&self) -> Option<&CellFit> {
        match self {
            CellState::Fitted(f) => Some(f),
            _ => None,
        }
    }
}

/// The computable surface: projection plane, grid, and one osculating
/// sphere per non-empty cell. Immutable after construction; distance
/// queries are pure.
#[derive(Debug, Clone)]
pub struct SurfaceAtlas {
    plane: ProjectionPlane,
    grid: GridSpec,
    cells: Vec<CellState>,
}

/// Fits an osculating sphere to a patch of points by minimizing the
/// algebraic loss `sum((|x - O|^2 - r^2)^2)` in closed form: the center is
/// `O = Lambda^{-1} theta / 2` with `Lambda` the scatter matrix and `theta`
/// the third-moment vector, and the radius is the mean distance of the
/// points to the center.
pub fn fit_spherelet(points: &[Vector3<f64>]) -> Result<Sphere> {
    if points.len() < 4 {
        return Err(Error::CloudTooSmall {
            got: points.len(),
            need: 4,
        });
    }
    let m = points.len() as f64;
    let mean: Vector3<f64> = points.iter().sum::<Vector3<f64>>() / m;
    let mean_sq = points.iter().map(|p| p.norm_squared()).sum::<f64>() / m;

    let mut lambda = Matrix3::zeros();
    let mut theta = Vector3::zeros();
    for p in points {
        let y = p - mean;
        lambda += y * y.transpose();
        theta += (p.norm_squared() - mean_sq) * y;
    }

    let eig = SymmetricEigen::new(lambda);
    let emax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let emin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if !(emin > 0.0) || emax / emin > FIT_CONDITION_LIMIT {
        return Err(Error::DegeneratePatch);
    }

    let center = lambda
        .lu()
        .solve(&(0.5 * theta))
        .ok_or(Error::DegeneratePatch)?;
    let radius = points.iter().map(|p| (p - center).norm()).sum::<f64>() / m;
    Sphere::new(center, radius)
}

/// Projection plane from the data covariance: normal along the eigenvector
/// with the smallest eigenvalue, origin at the centroid, axes along the two
/// remaining principal directions. The normal is oriented so that the
/// majority of points have nonnegative offset.
pub fn projection_plane(cloud: &PointCloud) -> Result<ProjectionPlane> {
    if cloud.len() < 3 {
        return Err(Error::CloudTooSmall {
            got: cloud.len(),
            need: 3,
        });
    }
    let m = cloud.len() as f64;
    let mean: Vector3<f64> = cloud.points().iter().sum::<Vector3<f64>>() / m;
    let mut cov = Matrix3::zeros();
    for p in cloud.points() {
        let y = p - mean;
        cov += y * y.transpose() / m;
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e_small = eig.eigenvalues[order[0]];
    let e_mid = eig.eigenvalues[order[1]];
    let e_large = eig.eigenvalues[order[2]];
    let _ = e_small;
    if !(e_mid > 1e-12 * e_large.max(f64::MIN_POSITIVE)) {
        return Err(Error::CollinearCloud);
    }

    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let axis1: Vector3<f64> = eig.eigenvectors.column(order[2]).into_owned().normalize();
    let mut axis2: Vector3<f64> = eig.eigenvectors.column(order[1]).into_owned().normalize();

    let nonneg = cloud
        .points()
        .iter()
        .filter(|p| (*p - mean).dot(&normal) >= 0.0)
        .count();
    if 2 * nonneg < cloud.len() {
        normal = -normal;
    }
    if axis1.cross(&axis2).dot(&normal) < 0.0 {
        axis2 = -axis2;
    }

    Ok(ProjectionPlane {
        origin: mean,
        axis1,
        axis2,
        normal,
    })
}

impl SurfaceAtlas {
    /// Builds the atlas: projection plane, per-cell point assignment, and a
    /// sphere fit for every cell holding at least four points. Cells with
    /// too few points or an ill-posed fit stay empty (paths through them
    /// fail loudly); an atlas with zero fitted cells is an error.
    pub fn build(cloud: &PointCloud, grid: GridSpec) -> Result<Self> {
        let plane = projection_plane(cloud)?;
        Self::build_with_plane(cloud, plane, grid)
    }

    /// Builds with `nv` x `nh` uniform grid lines spanning the cloud's
    /// in-plane bounding box.
    pub fn build_uniform(cloud: &PointCloud, nv: usize, nh: usize) -> Result<Self> {
        let plane = projection_plane(cloud)?;
        let mut x = (f64::MAX, f64::MIN);
        let mut y = (f64::MAX, f64::MIN);
        for p in cloud.points() {
            let q = plane.to_plane(p);
            x = (x.0.min(q.0), x.1.max(q.0));
            y = (y.0.min(q.1), y.1.max(q.1));
        }
        let grid = GridSpec::uniform(nv, nh, x, y)?;
        Self::build_with_plane(cloud, plane, grid)
    }

    fn build_with_plane(cloud: &PointCloud, plane: ProjectionPlane, grid: GridSpec) -> Result<Self> {
        let n_cells = grid.n_cols() * grid.n_rows();
        let mut buckets: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); n_cells];
        for p in cloud.points() {
            let (col, row) = grid.cell_of(plane.to_plane(p));
            buckets[col + row * grid.n_cols()].push(*p);
        }
        let mut cells = Vec::with_capacity(n_cells);
        let mut fitted = 0usize;
        for bucket in &buckets {
            if bucket.len() < 4 {
                cells.push(CellState::TooFew {
                    count: bucket.len(),
                });
                continue;
            }
            match fit_spherelet(bucket) {
                Ok(sphere) => {
                    let centroid =
                        bucket.iter().sum::<Vector3<f64>>() / bucket.len() as f64;
                    fitted += 1;
                    cells.push(CellState::Fitted(CellFit {
                        sphere,
                        centroid,
                        count: bucket.len(),
                    }));
                }
                Err(Error::DegeneratePatch) => cells.push(CellState::Degenerate {
                    count: bucket.len(),
                }),
                Err(e) => return Err(e),
            }
        }
        if fitted == 0 {
            return Err(Error::NoFittableCells);
        }
        Ok(SurfaceAtlas { plane, grid, cells })
    }

    pub fn plane(&self) -> &ProjectionPlane {
        &self.plane
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cell_state(&self, col: usize, row: usize) -> &CellState {
        &self.cells[col + row * self.grid.n_cols()]
    }

    /// The fitted cells, as `(col, row, fit)` in row-major order.
    pub fn fitted_cells(&self) -> impl Iterator<Item = (usize, usize, &CellFit)> {
        let n_cols = self.grid.n_cols();
        self.cells.iter().enumerate().filter_map(move |(i, c)| {
            c.fit().map(|f| (i % n_cols, i / n_cols, f))
        })
    }

    pub fn n_fitted(&self) -> usize {
        self.cells.iter().filter(|c| c.fit().is_some()).count()
    }

    fn fit_at(&self, q: (f64, f64)) -> Result<&CellFit> {
        let (col, row) = self.grid.cell_of(q);
        self.cell_state(col, row)
            .fit()
            .ok_or(Error::EmptyCell { col, row })
    }

    /// The fitted cell containing a surface point's in-plane projection.
    pub fn cell_for_point(&self, p: &Vector3<f64>) -> Result<&CellFit> {
        self.fit_at(self.plane.to_plane(p))
    }

    /// Perpendicularly lifts an in-plane point onto the sphere of its cell,
    /// choosing the intersection nearer the cell's data centroid.
    pub fn lift_to_surface(&self, q: (f64, f64)) -> Result<Vector3<f64>> {
        let fit = self.fit_at(q)?;
        lift_onto(&self.plane, fit, q)
    }

    /// Intersection points of the straight in-plane segment between the
    /// projections of `a` and `b` with the grid lines it crosses, lifted to
    /// the surface and ordered along the segment. Each crossing is lifted
    /// here on the sphere of the cell preceding it; distance computation
    /// re-lifts per adjacent segment.
    pub fn segmentation_points(
        &self,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
    ) -> Result<Vec<Vector3<f64>>> {
        let qa = self.plane.to_plane(a);
        let qb = self.plane.to_plane(b);
        self.fit_at(qa)?;
        self.fit_at(qb)?;
        let crossings = segment_crossings(&self.grid, qa, qb);
        let mut out = Vec::with_capacity(crossings.len());
        let mut t_prev = 0.0;
        for &(t, q) in &crossings {
            let t_mid = 0.5 * (t_prev + t);
            let q_mid = lerp2(qa, qb, t_mid);
            let fit = self
                .fit_at(q_mid)
                .map_err(|_| Error::PathLeavesSurface)?;
            out.push(lift_onto(&self.plane, fit, q)?);
            t_prev = t;
        }
        // The final segment's cell must be fitted too.
        let q_mid = lerp2(qa, qb, 0.5 * (t_prev + 1.0));
        self.fit_at(q_mid).map_err(|_| Error::PathLeavesSurface)?;
        Ok(out)
    }

    /// Approximate geodesic distance between two surface points: the sum of
    /// great-circle arc lengths along the lifted straight in-plane segment,
    /// each arc measured on the sphere of the cell it traverses.
    pub fn geodesic_distance(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<f64> {
        Ok(self.geodesic_legs(a, b)?.iter().map(|l| l.arc).sum())
    }

    /// The per-segment legs of the geodesic approximation. The first leg
    /// starts exactly at `a`, the last ends exactly at `b`; interior
    /// waypoints are grid-crossing lifts onto each leg's own sphere.
    pub(crate) fn geodesic_legs(
        &self,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
    ) -> Result<Vec<GeodesicLeg>> {
        let qa = self.plane.to_plane(a);
        let qb = self.plane.to_plane(b);
        self.fit_at(qa)?;
        self.fit_at(qb)?;
        let crossings = segment_crossings(&self.grid, qa, qb);

        let mut ts = Vec::with_capacity(crossings.len() + 2);
        ts.push((0.0, qa));
        ts.extend(crossings.iter().copied());
        ts.push((1.0, qb));

        let mut legs = Vec::with_capacity(ts.len() - 1);
        for w in ts.windows(2) {
            let (t0, q0) = w[0];
            let (t1, q1) = w[1];
            let q_mid = lerp2(qa, qb, 0.5 * (t0 + t1));
            let fit = self
                .fit_at(q_mid)
                .map_err(|_| Error::PathLeavesSurface)?;
            let start = if t0 == 0.0 {
                *a
            } else {
                lift_onto(&self.plane, fit, q0)?
            };
            let end = if t1 == 1.0 {
                *b
            } else {
                lift_onto(&self.plane, fit, q1)?
            };
            let sphere = fit.sphere;
            let u0 = (start - sphere.center()).normalize();
            let u1 = (end - sphere.center()).normalize();
            let arc = sphere.radius() * u0.dot(&u1).clamp(-1.0, 1.0).acos();
            legs.push(GeodesicLeg { sphere, start, end, arc });
        }
        Ok(legs)
    }
}

/// One great-circle arc of a multi-sphere geodesic approximation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GeodesicLeg {
    pub sphere: Sphere,
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub arc: f64,
}

fn lerp2(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// Grid-line crossings of the in-plane segment `qa -> qb`, as
/// `(parameter, point)` sorted by parameter. Touching a line exactly at an
/// endpoint does not count as a crossing.
fn segment_crossings(grid: &GridSpec, qa: (f64, f64), qb: (f64, f64)) -> Vec<(f64, (f64, f64))> {
    let mut out: Vec<(f64, (f64, f64))> = Vec::new();
    for &lv in grid.v_lines() {
        if (qa.0 - lv) * (qb.0 - lv) < 0.0 {
            let t = (lv - qa.0) / (qb.0 - qa.0);
            out.push((t, (lv, qa.1 + t * (qb.1 - qa.1))));
        }
    }
    for &lh in grid.h_lines() {
        if (qa.1 - lh) * (qb.1 - lh) < 0.0 {
            let t = (lh - qa.1) / (qb.1 - qa.1);
            out.push((t, (qa.0 + t * (qb.0 - qa.0), lh)));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Intersects the perpendicular through an in-plane point with a cell's
/// sphere, picking the intersection nearer the cell's data centroid.
fn lift_onto(plane: &ProjectionPlane, fit: &CellFit, q: (f64, f64)) -> Result<Vector3<f64>> {
    let base = plane.from_plane(q);
    let m = base - fit.sphere.center();
    let b = plane.normal.dot(&m);
    let c = m.norm_squared() - fit.sphere.radius() * fit.sphere.radius();
    let disc = b * b - c;
    if disc < 0.0 {
        return Err(Error::NotLiftable);
    }
    let sq = disc.sqrt();
    // Numerically stable quadratic roots for s^2 + 2 b s + c = 0.
    let (s1, s2) = if b >= 0.0 {
        let t = -b - sq;
        (t, if t != 0.0 { c / t } else { -b + sq })
    } else {
        let t = -b + sq;
        (t, if t != 0.0 { c / t } else { -b - sq })
    };
    let p1 = base + s1 * plane.normal;
    let p2 = base + s2 * plane.normal;
    let pick = if (p1 - fit.centroid).norm_squared() <= (p2 - fit.centroid).norm_squared() {
        p1
    } else {
        p2
    };
    // Snap onto the sphere to shed quadratic round-off.
    Ok(fit.sphere.project_point(&pick))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Deterministic points on the upper half (z >= eps) of a sphere.
    fn hemisphere_points(
        center: Vector3<f64>,
        radius: f64,
        n: usize,
        state: &mut u64,
    ) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let z = lcg(state); // [0, 1): upper hemisphere
            let phi = 2.0 * std::f64::consts::PI * lcg(state);
            let s = (1.0 - z * z).sqrt();
            out.push(center + radius * Vector3::new(s * phi.cos(), s * phi.sin(), z));
        }
        out
    }

    #[test]
    fn fit_octahedron_recovers_unit_sphere() {
        let pts = vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, -1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, 0.0, -1.0),
        ];
        let s = fit_spherelet(&pts).unwrap();
        assert!(s.center().norm() <= 1e-12);
        assert!((s.radius() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fit_recovers_exact_hemisphere_samples() {
        let mut state = 17u64;
        for trial in 0..10 {
            let center = Vector3::new(
                10.0 * lcg(&mut state) - 5.0,
                10.0 * lcg(&mut state) - 5.0,
                10.0 * lcg(&mut state) - 5.0,
            );
            let radius = 0.5 + 4.5 * lcg(&mut state);
            let pts = hemisphere_points(center, radius, 50 + trial, &mut state);
            let s = fit_spherelet(&pts).unwrap();
            assert!(
                (s.center() - center).norm() <= 1e-9 * radius,
                "center error {:e}",
                (s.center() - center).norm() / radius
            );
            assert!((s.radius() - radius).abs() <= 1e-9 * radius);
        }
    }

    /// Independent oracle: Gauss-Newton on the algebraic loss itself,
    /// started away from the answer. The closed form must agree.
    fn algebraic_loss_gauss_newton(
        pts: &[Vector3<f64>],
        mut center: Vector3<f64>,
        mut r2: f64,
    ) -> (Vector3<f64>, f64) {
        use nalgebra::{Matrix4, Vector4};
        for _ in 0..200 {
            // residual_i = |x - O|^2 - r2; jacobian rows [-2 (x - O), -1]
            let mut jtj = Matrix4::zeros();
            let mut jtr = Vector4::zeros();
            for p in pts {
                let d = p - center;
                let res = d.norm_squared() - r2;
                let jrow = Vector4::new(-2.0 * d.x, -2.0 * d.y, -2.0 * d.z, -1.0);
                jtj += jrow * jrow.transpose();
                jtr += jrow * res;
            }
            for i in 0..4 {
                jtj[(i, i)] += 1e-12;
            }
            let step = jtj.lu().solve(&jtr).unwrap();
            center -= Vector3::new(step[0], step[1], step[2]);
            r2 -= step[3];
            if step.norm() < 1e-14 {
                break;
            }
        }
        (center, r2.max(0.0).sqrt())
    }

    #[test]
    fn fit_matches_nonlinear_least_squares_oracle_on_noisy_data() {
        let mut state = 23u64;
        let center = Vector3::new(1.0, -2.0, 0.5);
        let radius = 2.0;
        for _ in 0..5 {
            let mut pts = hemisphere_points(center, radius, 120, &mut state);
            for p in &mut pts {
                // Box-Muller noise, sigma = 1e-3 * r.
                let (u1, u2) = (lcg(&mut state).max(1e-12), lcg(&mut state));
                let g = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                *p += 1e-3 * radius * g * (*p - center).normalize();
            }
            let closed = fit_spherelet(&pts).unwrap();
            let (o_gn, _r_gn) = algebraic_loss_gauss_newton(
                &pts,
                center + Vector3::new(0.3, -0.2, 0.4),
                (radius * 1.2).powi(2),
            );
            // Same minimizer of the same loss.
            assert!(
                (closed.center() - o_gn).norm() <= 1e-6 * radius,
                "closed-form vs Gauss-Newton center gap {:e}",
                (closed.center() - o_gn).norm()
            );
            // And close to the generating sphere.
            assert!((closed.center() - center).norm() <= 1e-2 * radius);
        }
    }

    #[test]
    fn fit_rejects_coplanar_points() {
        let pts: Vec<Vector3<f64>> = (0..20)
            .map(|i| Vector3::new(i as f64, (i * i % 7) as f64, 0.0))
            .collect();
        assert!(matches!(fit_spherelet(&pts), Err(Error::DegeneratePatch)));
    }

    #[test]
    fn fit_needs_four_points() {
        let pts = vec![Vector3::x(), Vector3::y(), Vector3::z()];
        assert!(matches!(
            fit_spherelet(&pts),
            Err(Error::CloudTooSmall { need: 4, .. })
        ));
    }

    #[test]
    fn plane_normal_of_flat_cloud() {
        let mut state = 31u64;
        let pts: Vec<Vector3<f64>> = (0..200)
            .map(|_| {
                Vector3::new(
                    4.0 * lcg(&mut state) - 2.0,
                    2.0 * lcg(&mut state) - 1.0,
                    1e-8 * (lcg(&mut state) - 0.5),
                )
            })
            .collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let plane = projection_plane(&cloud).unwrap();
        assert!(plane.normal.z.abs() >= 1.0 - 1e-6);
        let mean = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
        assert!((plane.origin - mean).norm() <= 1e-12);
        // Right-handed orthonormal triad.
        assert!((plane.axis1.cross(&plane.axis2) - plane.normal).norm() <= 1e-10);
        assert!(plane.axis1.dot(&plane.axis2).abs() <= 1e-10);
    }

    #[test]
    fn plane_normal_of_hemisphere_is_near_axis() {
        let mut state = 37u64;
        let pts = hemisphere_points(Vector3::zeros(), 1.0, 400, &mut state);
        let plane = projection_plane(&PointCloud::new(pts).unwrap()).unwrap();
        let angle = plane.normal.dot(&Vector3::z()).abs().clamp(-1.0, 1.0).acos();
        assert!(angle <= 5.0_f64.to_radians(), "angle {angle}");
    }

    #[test]
    fn plane_rejects_collinear_cloud() {
        let pts: Vec<Vector3<f64>> = (0..30).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(
            projection_plane(&PointCloud::new(pts).unwrap()),
            Err(Error::CollinearCloud)
        ));
    }

    #[test]
    fn atlas_single_cell_recovers_sphere() {
        let mut state = 41u64;
        let pts = hemisphere_points(Vector3::zeros(), 1.0, 300, &mut state);
        let cloud = PointCloud::new(pts).unwrap();
        let atlas = SurfaceAtlas::build(&cloud, GridSpec::single_cell()).unwrap();
        assert_eq!(atlas.n_fitted(), 1);
        let fit = atlas.fitted_cells().next().unwrap().2;
        assert!(fit.sphere.center().norm() <= 1e-9);
        assert!((fit.sphere.radius() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn atlas_split_sphere_gives_matching_spherelets() {
        let mut state = 43u64;
        let pts = hemisphere_points(Vector3::zeros(), 1.0, 600, &mut state);
        let cloud = PointCloud::new(pts).unwrap();
        let atlas = SurfaceAtlas::build(&cloud, GridSpec::new(vec![0.0], vec![]).unwrap()).unwrap();
        assert_eq!(atlas.n_fitted(), 2);
        let fits: Vec<&CellFit> = atlas.fitted_cells().map(|(_, _, f)| f).collect();
        assert!((fits[0].sphere.center() - fits[1].sphere.center()).norm() <= 1e-8);
        assert!((fits[0].sphere.radius() - fits[1].sphere.radius()).abs() <= 1e-8);
    }

    #[test]
    fn atlas_two_bumps_fit_their_own_spheres() {
        // Two spherical caps side by side, valley at x = 0.
        let mut state = 47u64;
        let s1 = (Vector3::new(-2.0, 0.0, -0.5), 1.5);
        let s2 = (Vector3::new(2.0, 0.0, -1.0), 2.0);
        let mut pts = Vec::new();
        for (c, r) in [s1, s2] {
            for _ in 0..400 {
                let z = 0.6 + 0.4 * lcg(&mut state); // top cap only
                let phi = 2.0 * std::f64::consts::PI * lcg(&mut state);
                let s = (1.0 - z * z).sqrt();
                pts.push(c + r * Vector3::new(s * phi.cos(), s * phi.sin(), z));
            }
        }
        let cloud = PointCloud::new(pts).unwrap();
        let plane = projection_plane(&cloud).unwrap();
        // Valley in plane coordinates: project the midpoint.
        let valley = plane.to_plane(&Vector3::zeros()).0;
        let atlas = SurfaceAtlas::build(&cloud, GridSpec::new(vec![valley], vec![]).unwrap()).unwrap();
        assert_eq!(atlas.n_fitted(), 2);
        for (_, _, fit) in atlas.fitted_cells() {
            let (truth_c, truth_r) = if fit.sphere.center().x < 0.0 { s1 } else { s2 };
            assert!(
                (fit.sphere.center() - truth_c).norm() <= 0.02 * truth_r,
                "center off by {:e}",
                (fit.sphere.center() - truth_c).norm()
            );
            assert!((fit.sphere.radius() - truth_r).abs() <= 0.02 * truth_r);
        }
    }

    /// A canonical single-cell atlas on the unit sphere for lift and
    /// distance tests: plane near z = 0, lift side up.
    fn unit_atlas(state: &mut u64, grid: GridSpec) -> SurfaceAtlas {
        let pts = hemisphere_points(Vector3::zeros(), 1.0, 500, state);
        SurfaceAtlas::build(&PointCloud::new(pts).unwrap(), grid).unwrap()
    }

    #[test]
    fn lift_examples() {
        let mut state = 53u64;
        let atlas = unit_atlas(&mut state, GridSpec::single_cell());
        // The in-plane projection of the top of the sphere lifts back to it.
        let top = atlas.plane().normal;
        let q = atlas.plane().to_plane(&top);
        let lifted = atlas.lift_to_surface(q).unwrap();
        assert!((lifted - top).norm() <= 1e-6);
        // Perpendicularity: a lifted point projects back to its input.
        for _ in 0..50 {
            let q = (0.9 * (2.0 * lcg(&mut state) - 1.0), 0.9 * (2.0 * lcg(&mut state) - 1.0));
            if q.0 * q.0 + q.1 * q.1 >= 0.98 {
                continue;
            }
            let p = atlas.lift_to_surface(q).unwrap();
            let back = atlas.plane().to_plane(&p);
            assert!((back.0 - q.0).abs() <= 1e-9 && (back.1 - q.1).abs() <= 1e-9);
        }
        // Far outside the shadow: not liftable.
        assert!(matches!(
            atlas.lift_to_surface((5.0, 0.0)),
            Err(Error::NotLiftable)
        ));
    }

    #[test]
    fn lift_tangency_hits_equator() {
        let mut state = 59u64;
        let atlas = unit_atlas(&mut state, GridSpec::single_cell());
        // In-plane distance ~radius from the axis: the lift grazes the
        // sphere near the plane of its center.
        let fit = atlas.fitted_cells().next().unwrap().2;
        let cq = atlas.plane().to_plane(&fit.sphere.center());
        let q = (cq.0 + fit.sphere.radius(), cq.1);
        let p = atlas.lift_to_surface(q).unwrap();
        let offset = (p - fit.sphere.center()).dot(&atlas.plane().normal);
        assert!(offset.abs() <= 1e-4, "offset {offset}");
    }

    #[test]
    fn segmentation_same_cell_is_empty() {
        let mut state = 61u64;
        let atlas = unit_atlas(&mut state, GridSpec::new(vec![0.9], vec![0.9]).unwrap());
        let a = atlas.lift_to_surface((0.1, 0.1)).unwrap();
        let b = atlas.lift_to_surface((0.4, 0.3)).unwrap();
        assert!(atlas.segmentation_points(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn segmentation_single_crossing_on_line() {
        let mut state = 67u64;
        let atlas = unit_atlas(&mut state, GridSpec::new(vec![0.0], vec![]).unwrap());
        let a = atlas.lift_to_surface((-0.4, 0.1)).unwrap();
        let b = atlas.lift_to_surface((0.5, -0.2)).unwrap();
        let seg = atlas.segmentation_points(&a, &b).unwrap();
        assert_eq!(seg.len(), 1);
        let q = atlas.plane().to_plane(&seg[0]);
        assert!(q.0.abs() <= 1e-9, "crossing x = {}", q.0);
    }

    #[test]
    fn segmentation_matches_2d_intersection_oracle() {
        let mut state = 71u64;
        let grid = GridSpec::new(vec![-0.2, 0.25], vec![0.05]).unwrap();
        let atlas = unit_atlas(&mut state, grid);
        let qa = (-0.5, -0.3);
        let qb = (0.55, 0.35);
        let a = atlas.lift_to_surface(qa).unwrap();
        let b = atlas.lift_to_surface(qb).unwrap();
        let seg = atlas.segmentation_points(&a, &b).unwrap();
        assert_eq!(seg.len(), 3);
        // Oracle: direct 2-D parameters of each line crossing, sorted.
        let mut expected: Vec<f64> = vec![
            (-0.2 - qa.0) / (qb.0 - qa.0),
            (0.25 - qa.0) / (qb.0 - qa.0),
            (0.05 - qa.1) / (qb.1 - qa.1),
        ];
        expected.sort_by(f64::total_cmp);
        let mut last = -1.0;
        for (p, t_exp) in seg.iter().zip(expected) {
            let q = atlas.plane().to_plane(p);
            let t = (q.0 - qa.0) / (qb.0 - qa.0);
            assert!((t - t_exp).abs() <= 1e-9);
            assert!(t > last, "crossings must be ordered");
            last = t;
        }
    }

    #[test]
    fn geodesic_single_cell_matches_great_circle() {
        let mut state = 73u64;
        let atlas = unit_atlas(&mut state, GridSpec::single_cell());
        let a = atlas.lift_to_surface((0.0, 0.0)).unwrap();
        let b = atlas.lift_to_surface((0.6, 0.0)).unwrap();
        let d = atlas.geodesic_distance(&a, &b).unwrap();
        let expected = a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos();
        assert!((d - expected).abs() <= 1e-6 * expected);
        assert_eq!(atlas.geodesic_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_two_cells_same_sphere_near_great_circle() {
        let mut state = 79u64;
        let atlas = unit_atlas(&mut state, GridSpec::new(vec![0.0], vec![]).unwrap());
        // Pairs in a modest cap: the straight in-plane path then deviates
        // from the geodesic's projection by a bounded amount.
        for _ in 0..50 {
            let q1 = (-0.3 * lcg(&mut state) - 0.02, 0.3 * (2.0 * lcg(&mut state) - 1.0));
            let q2 = (0.3 * lcg(&mut state) + 0.02, 0.3 * (2.0 * lcg(&mut state) - 1.0));
            let a = atlas.lift_to_surface(q1).unwrap();
            let b = atlas.lift_to_surface(q2).unwrap();
            let d = atlas.geodesic_distance(&a, &b).unwrap();
            let truth = a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos();
            assert!(
                (d - truth).abs() <= 1e-3 * truth,
                "multi-cell distance {d} vs great circle {truth}"
            );
        }
    }

    #[test]
    fn geodesic_symmetry() {
        let mut state = 83u64;
        let atlas = unit_atlas(&mut state, GridSpec::new(vec![-0.2, 0.2], vec![0.0]).unwrap());
        for _ in 0..30 {
            let q1 = (0.8 * (2.0 * lcg(&mut state) - 1.0), 0.8 * (2.0 * lcg(&mut state) - 1.0));
            let q2 = (0.8 * (2.0 * lcg(&mut state) - 1.0), 0.8 * (2.0 * lcg(&mut state) - 1.0));
            if q1.0 * q1.0 + q1.1 * q1.1 > 0.8 || q2.0 * q2.0 + q2.1 * q2.1 > 0.8 {
                continue;
            }
            let a = atlas.lift_to_surface(q1).unwrap();
            let b = atlas.lift_to_surface(q2).unwrap();
            let dab = atlas.geodesic_distance(&a, &b).unwrap();
            let dba = atlas.geodesic_distance(&b, &a).unwrap();
            assert!((dab - dba).abs() <= 1e-9 * dab.max(1.0));
        }
    }

    #[test]
    fn path_through_empty_cell_fails() {
        let mut state = 89u64;
        // Points only on two opposite sides of the plane x-axis band.
        let mut pts = Vec::new();
        for _ in 0..300 {
            let z = 0.3 + 0.68 * lcg(&mut state);
            let phi = 2.0 * std::f64::consts::PI * lcg(&mut state);
            let s = (1.0 - z * z).sqrt();
            let p = Vector3::new(s * phi.cos(), s * phi.sin(), z);
            // Carve out a band: keep |x| > 0.35 only.
            if p.x.abs() > 0.35 {
                pts.push(p);
            }
        }
        let cloud = PointCloud::new(pts).unwrap();
        let plane = projection_plane(&cloud).unwrap();
        // Grid lines isolating the empty band around x ~ 0.
        let l1 = plane.to_plane(&Vector3::new(-0.33, 0.0, 0.944)).0;
        let l2 = plane.to_plane(&Vector3::new(0.33, 0.0, 0.944)).0;
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let atlas = SurfaceAtlas::build(&cloud, GridSpec::new(vec![lo, hi], vec![]).unwrap());
        let atlas = match atlas {
            Ok(a) => a,
            Err(_) => return, // grid orientation made every cell sparse; nothing to test
        };
        let a = atlas.lift_to_surface((lo - 0.3, 0.0));
        let b = atlas.lift_to_surface((hi + 0.3, 0.0));
        if let (Ok(a), Ok(b)) = (a, b) {
            assert!(matches!(
                atlas.geodesic_distance(&a, &b),
                Err(Error::PathLeavesSurface) | Err(Error::EmptyCell { .. })
            ));
        }
    }
}
