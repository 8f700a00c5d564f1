//! User service-valuation distributions and virtual values.
//!
//! Every stage price solves `φ(p) = Δ` where `φ(v) = v − (1 − F(v)) / f(v)`
//! is the virtual value. Regular distributions (nondecreasing `φ`) make that
//! root unique, so the pricing recursion only ever needs `φ⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, invalid, Error, Result};

/// Quantile at which the unbounded exponential support is cut for grid checks.
pub const EXPONENTIAL_GRID_QUANTILE: f64 = 0.9999;

const BISECTION_TOL: f64 = 1e-10;

/// A continuous valuation distribution with a density on its support.
pub trait ValuationDistribution {
    fn cdf(&self, v: f64) -> f64;

    fn pdf(&self, v: f64) -> f64;

    /// Support bounds `(lower, upper)`; `upper` may be `f64::INFINITY`.
    fn support(&self) -> (f64, f64);

    /// Inverse CDF for `u` in `[0, 1)`.
    fn quantile(&self, u: f64) -> f64;

    /// `v − (1 − F(v)) / f(v)`, defined wherever the density is positive.
    fn virtual_value(&self, v: f64) -> Result<f64> {
        let density = self.pdf(v);
        if !(density > 0.0) {
            let (lower, upper) = self.support();
            return Err(Error::OutsideSupport {
                value: v,
                lower,
                upper,
            });
        }
        Ok(v - (1.0 - self.cdf(v)) / density)
    }

    /// The `v` with `φ(v) = target`, clamped to the support.
    ///
    /// The default bisects on `φ`, which is valid for any regular distribution.
    fn inverse_virtual_value(&self, target: f64) -> f64 {
        let (lower, upper) = self.support();
        let phi = |v: f64| self.virtual_value(v).unwrap_or(f64::NAN);
        if target <= phi(lower) {
            return lower;
        }
        let mut hi = if upper.is_finite() {
            if target >= phi(upper) {
                return upper;
            }
            upper
        } else {
            let mut hi = lower.abs().max(1.0);
            while phi(hi) < target {
                hi *= 2.0;
            }
            hi
        };
        let mut lo = lower;
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Finite window used for grid-based regularity checks.
    fn regularity_window(&self) -> (f64, f64) {
        let (lower, upper) = self.support();
        if upper.is_finite() {
            (lower, upper)
        } else {
            (lower, self.quantile(EXPONENTIAL_GRID_QUANTILE))
        }
    }
}

/// Valuation families supported by the pricing engine.
///
/// Serialized as `{"kind":"exponential","rate":1.0}` or
/// `{"kind":"uniform","lower":5.0,"upper":15.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub enum ValuationModel {
    /// Mean `1 / rate`, support `[0, ∞)`.
    Exponential { rate: f64 },
    /// Support `[lower, upper]`.
    Uniform { lower: f64, upper: f64 },
}

impl ValuationModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        check_positive("rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && lower.is_finite()) {
            return Err(invalid("lower", format!("{lower} must be nonnegative")));
        }
        if !(upper > lower && upper.is_finite()) {
            return Err(invalid(
                "upper",
                format!("{upper} must exceed lower bound {lower}"),
            ));
        }
        Ok(Self::Uniform { lower, upper })
    }

    /// Uniform model with the given mean and variance.
    ///
    /// A zero variance yields a width-`1e-6` uniform standing in for a point mass.
    pub fn uniform_with_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(invalid("variance", format!("{variance} must be nonnegative")));
        }
        let half_width = if variance == 0.0 {
            0.5e-6
        } else {
            (3.0 * variance).sqrt()
        };
        if mean - half_width < 0.0 {
            return Err(invalid(
                "variance",
                format!("variance {variance} pushes the lower bound of a mean-{mean} uniform below zero"),
            ));
        }
        Self::uniform(mean - half_width, mean + half_width)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }

    /// Probability that a valuation is at least `price`.
    pub fn survival(&self, price: f64) -> f64 {
        1.0 - self.cdf(price)
    }

    /// `E[(v − θ)⁺]`, the expected surplus above a threshold.
    pub fn expected_excess(&self, threshold: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if threshold <= 0.0 {
                    1.0 / rate - threshold
                } else {
                    (-rate * threshold).exp() / rate
                }
            }
            Self::Uniform { lower, upper } => {
                if threshold < lower {
                    0.5 * (lower + upper) - threshold
                } else if threshold > upper {
                    0.0
                } else {
                    (upper - threshold).powi(2) / (2.0 * (upper - lower))
                }
            }
        }
    }

    /// Inverse-CDF sample from a uniform draw in `[0, 1)`.
    pub fn sample(&self, uniform_draw: f64) -> f64 {
        self.quantile(uniform_draw)
    }
}

impl ValuationDistribution for ValuationModel {
    fn cdf(&self, v: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if v <= 0.0 {
                    0.0
                } else {
                    -(-rate * v).exp_m1()
                }
            }
            Self::Uniform { lower, upper } => ((v - lower) / (upper - lower)).clamp(0.0, 1.0),
        }
    }

    fn pdf(&self, v: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if v < 0.0 {
                    0.0
                } else {
                    rate * (-rate * v).exp()
                }
            }
            Self::Uniform { lower, upper } => {
                if v < lower || v > upper {
                    0.0
                } else {
                    1.0 / (upper - lower)
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Uniform { lower, upper } => (lower, upper),
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { lower, upper } => lower + u * (upper - lower),
        }
    }

    fn virtual_value(&self, v: f64) -> Result<f64> {
        let (lower, upper) = self.support();
        if !(v >= lower && v <= upper) {
            return Err(Error::OutsideSupport {
                value: v,
                lower,
                upper,
            });
        }
        Ok(match *self {
            Self::Exponential { rate } => v - 1.0 / rate,
            Self::Uniform { upper, .. } => 2.0 * v - upper,
        })
    }

    fn inverse_virtual_value(&self, target: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => (target + 1.0 / rate).max(0.0),
            Self::Uniform { lower, upper } => (0.5 * (target + upper)).clamp(lower, upper),
        }
    }
}

/// True iff `φ` is nondecreasing on `grid_points` evenly spaced points of the
/// support (exponential supports are cut at the 0.9999 quantile).
pub fn check_regularity<D: ValuationDistribution + ?Sized>(model: &D, grid_points: usize) -> bool {
    if grid_points < 2 {
        return false;
    }
    let (lo, hi) = model.regularity_window();
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut previous = f64::NEG_INFINITY;
    for i in 0..grid_points {
        let v = if i + 1 == grid_points {
            hi
        } else {
            lo + step * i as f64
        };
        let Ok(phi) = model.virtual_value(v) else {
            return false;
        };
        if phi < previous - 1e-12 * previous.abs().max(1.0) {
            return false;
        }
        previous = phi;
    }
    true
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawModel {
    Exponential { rate: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl TryFrom<RawModel> for ValuationModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        match raw {
            RawModel::Exponential { rate } => Self::exponential(rate),
            RawModel::Uniform { lower, upper } => Self::uniform(lower, upper),
        }
    }
}

impl From<ValuationModel> for RawModel {
    fn from(model: ValuationModel) -> Self {
        match model {
            ValuationModel::Exponential { rate } => RawModel::Exponential { rate },
            ValuationModel::Uniform { lower, upper } => RawModel::Uniform { lower, upper },
        }
    }
}
