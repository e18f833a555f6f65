//! Learning and replaying rhythmic trajectories constrained to curved
//! surfaces.
//!
//! The pipeline has three legs:
//!
//! 1. **Kernel scores** ([`kernels`], [`scores`]): kernel ridge regression
//!    over time stamps produces a score vector `alpha(t)` for any query
//!    time. The kernel family (squared exponential, periodic, or their
//!    quasi-periodic product) decides how the learned motion generalizes
//!    beyond the demonstration.
//! 2. **Surface geometry** ([`manifold`], [`spherelets`]): the constraint
//!    surface is approximated by a grid of osculating spheres fitted to a
//!    point cloud, giving closed-form geodesic distances.
//! 3. **Decoding** ([`decoder`]): each query time's output point minimizes
//!    the score-weighted sum of squared geodesic distances to the
//!    demonstration points, by Riemannian gradient descent on the sphere
//!    atlas.
//!
//! [`patterns`] generates and checks periodic and quasi-periodic synthetic
//! trajectories, [`metrics`] scores reproduction and generalization
//! quality, and [`io`] holds file formats, configuration, and the command
//! implementations behind the `georhythm` binary.
//!
//! Time stamps are dimensionless reals; all angles are radians and all
//! lengths are in the units of the input data.

pub mod decoder;
pub mod error;
pub mod io;
pub mod kernels;
pub mod manifold;
pub mod mesh;
pub mod metrics;
pub mod patterns;
pub mod scores;
pub mod spherelets;

pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use manifold::{Sphere, TangentVector};
pub use patterns::GeoTrajectory;
pub use scores::ScoreModel;
pub use spherelets::{GridSpec, PointCloud, SurfaceAtlas};
