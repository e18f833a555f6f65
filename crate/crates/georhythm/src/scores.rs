//! Kernel ridge regression scores.
//!
//! Training factorizes the regularized system matrix `K + lambda*N*I` once;
//! each query then costs one kernel cross-vector and a pair of triangular
//! solves, yielding the score vector
//! `alpha(t) = (K + lambda*N*I)^{-1} k(t)`
//! that weights per-demonstration losses in the decoder. The surrogate-space
//! feature vectors behind the regression are never materialized; the scores
//! are all the decoder needs.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::kernels::{self, KernelSpec};

/// A trained score model: training times, kernel, regularization weight, and
/// the triangular factorization of `K + lambda*N*I`.
///
/// Immutable after construction; `scores` is pure, so one model can be shared
/// across threads and queried in parallel.
#[derive(Debug, Clone)]
pub struct ScoreModel {
    times: Vec<f64>,
    kernel: KernelSpec,
    lambda: f64,
    factor: Cholesky<f64, Dyn>,
}

impl ScoreModel {
    /// Factorizes `K + lambda*N*I` over the training times.
    ///
    /// Times need not be sorted or distinct; the ridge term keeps the system
    /// positive definite even for repeated stamps. On a failed factorization
    /// one retry is made with a jitter of `1e-10 * trace(K)/N` added to the
    /// diagonal, after which the model reports the matrix as not positive
    /// definite.
    pub fn train(kernel: KernelSpec, times: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NonpositiveRegularization);
        }
        let gram = kernels::gram(&kernel, times)?;
        let n = gram.n();
        let ridge = lambda * n as f64;
        let mut system = gram.entries().clone();
        for i in 0..n {
            system[(i, i)] += ridge;
        }
        let factor = match Cholesky::new(system.clone()) {
            Some(f) => f,
            None => {
                let jitter = 1e-10 * gram.entries().trace() / n as f64;
                let mut retry = system;
                for i in 0..n {
                    retry[(i, i)] += jitter;
                }
                Cholesky::new(retry).ok_or(Error::GramNotPositiveDefinite)?
            }
        };
        Ok(ScoreModel {
            times: times.to_vec(),
            kernel,
            lambda,
            factor,
        })
    }

    /// Score vector `alpha(t)` for an arbitrary query time.
    ///
    /// Solved through the stored factorization; no explicit inverse is ever
    /// formed. Recomputed per query — callers that revisit the same time can
    /// cache on their side.
    pub fn scores(&self, query: f64) -> Result<DVector<f64>> {
        let k = kernels::cross_vector(&self.kernel, query, &self.times)?;
        Ok(self.factor.solve(&k))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Reconstructs the system matrix from the stored factor (`L L^T`).
    pub fn reconstruct_system(&self) -> DMatrix<f64> {
        let l = self.factor.l();
        &l * l.transpose()
    }
}
