//! Scalar reproducing kernels over time stamps and Gram-matrix construction.
//!
//! Three kernel families are provided: the squared exponential (SE), the
//! periodic kernel (PER), and their product, the quasi-periodic kernel (QP).
//! Time is treated as a dimensionless real; hyperparameters are expressed in
//! the same units as the time stamps fed to the model.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Squared exponential hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeParams {
    pub sigma: f64,
    pub length_scale: f64,
}

/// Periodic kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicParams {
    pub sigma: f64,
    pub length_scale: f64,
    pub period: f64,
}

/// A validated kernel specification.
///
/// Hyperparameters are checked once at construction; evaluation assumes a
/// valid spec and stays branch-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Se(SeParams),
    Periodic(PeriodicParams),
    QuasiPeriodic { se: SeParams, per: PeriodicParams },
}

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidHyperparameter { name, value })
    }
}

impl KernelSpec {
    /// Squared exponential kernel `sigma^2 exp(-(t-t')^2 / (2 l^2))`.
    pub fn se(sigma: f64, length_scale: f64) -> Result<Self> {
        Ok(KernelSpec::Se(SeParams {
            sigma: check_positive("sigma_s", sigma)?,
            length_scale: check_positive("l_s", length_scale)?,
        }))
    }

    /// Periodic kernel `sigma^2 exp(-2 sin^2(pi (t-t') / p) / l^2)`.
    pub fn periodic(sigma: f64, length_scale: f64, period: f64) -> Result<Self> {
        Ok(KernelSpec::Periodic(PeriodicParams {
            sigma: check_positive("sigma_p", sigma)?,
            length_scale: check_positive("l_p", length_scale)?,
            period: check_positive("period", period)?,
        }))
    }

    /// Quasi-periodic kernel: the product of an SE and a periodic kernel
    /// evaluated at the same pair of times.
    pub fn quasi_periodic(
        sigma_s: f64,
        l_s: f64,
        sigma_p: f64,
        l_p: f64,
        period: f64,
    ) -> Result<Self> {
        Ok(KernelSpec::QuasiPeriodic {
            se: SeParams {
                sigma: check_positive("sigma_s", sigma_s)?,
                length_scale: check_positive("l_s", l_s)?,
            },
            per: PeriodicParams {
                sigma: check_positive("sigma_p", sigma_p)?,
                length_scale: check_positive("l_p", l_p)?,
                period: check_positive("period", period)?,
            },
        })
    }

    /// Evaluates the kernel at a pair of times.
    pub fn eval(&self, t: f64, t2: f64) -> f64 {
        match self {
            KernelSpec::Se(p) => eval_se(p, t, t2),
            KernelSpec::Periodic(p) => eval_periodic(p, t, t2),
            KernelSpec::QuasiPeriodic { se, per } => {
                eval_se(se, t, t2) * eval_periodic(per, t, t2)
            }
        }
    }

    /// The value at zero lag, `k(t, t)`.
    pub fn zero_lag(&self) -> f64 {
        match self {
            KernelSpec::Se(p) => p.sigma * p.sigma,
            KernelSpec::Periodic(p) => p.sigma * p.sigma,
            KernelSpec::QuasiPeriodic { se, per } => {
                se.sigma * se.sigma * per.sigma * per.sigma
            }
        }
    }

    /// The kernel's period, if it has one (PER and QP).
    pub fn period(&self) -> Option<f64> {
        match self {
            KernelSpec::Se(_) => None,
            KernelSpec::Periodic(p) => Some(p.period),
            KernelSpec::QuasiPeriodic { per, .. } => Some(per.period),
        }
    }
}

fn eval_se(p: &SeParams, t: f64, t2: f64) -> f64 {
    let d = t - t2;
    p.sigma * p.sigma * (-d * d / (2.0 * p.length_scale * p.length_scale)).exp()
}

fn eval_periodic(p: &PeriodicParams, t: f64, t2: f64) -> f64 {
    let s = (std::f64::consts::PI * (t - t2) / p.period).sin();
    p.sigma * p.sigma * (-2.0 * s * s / (p.length_scale * p.length_scale)).exp()
}

/// Dense symmetric Gram matrix `K[i][j] = k(times[i], times[j])`.
///
/// Each off-diagonal pair is computed once and mirrored, so symmetry is
/// exact. Demonstration lengths stay in the low thousands, where dense
/// storage is the right trade-off.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(i) = times.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFiniteTime(i));
    }
    Ok(())
}

/// Builds the Gram matrix of a kernel over a set of training times.
pub fn gram(spec: &KernelSpec, times: &[f64]) -> Result<GramMatrix> {
    check_times(times)?;
    let n = times.len();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        entries[(i, i)] = spec.eval(times[i], times[i]);
        for j in (i + 1)..n {
            let v = spec.eval(times[i], times[j]);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries })
}

/// Cross-covariance vector `k_i = k(query, times[i])`.
pub fn cross_vector(spec: &KernelSpec, query: f64, times: &[f64]) -> Result<DVector<f64>> {
    check_times(times)?;
    if !query.is_finite() {
        return Err(Error::NonFiniteQuery);
    }
    Ok(DVector::from_iterator(
        times.len(),
        times.iter().map(|&t| spec.eval(query, t)),
    ))
}
