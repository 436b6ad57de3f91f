//! Phase-space (Wigner) representation of Gaussian states.
//!
//! For a Gaussian state with no x-y correlations the Wigner function is a
//! product of two normal densities in the quadratures, and its moments are
//! symmetrically ordered operator moments. The photon-number observable
//! appears as `x² + y² - 1/2`, so the squared-quadrature/photon-number
//! correlation can be evaluated entirely from fourth-order phase-space
//! moments - a third, measurement-free route to the same quantity the
//! closed-form and Fock-space paths compute.

use crate::error::{Error, Result};
use crate::gaussian::GaussianXYState;
use crate::resolution::Resolution;

/// Highest total moment order supported by the recursion.
pub const MAX_MOMENT_ORDER: usize = 8;

/// A Gaussian Wigner function, axis-aligned in the `x` and `y` quadratures.
#[derive(Debug, Clone, Copy)]
pub struct GaussianWigner {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl GaussianWigner {
    pub fn new(mean_x: f64, mean_y: f64, var_x: f64, var_y: f64) -> Result<Self> {
        for (name, v) in [("var_x", var_x), ("var_y", var_y)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    constraint: "finite and positive",
                });
            }
        }
        if !mean_x.is_finite() || !mean_y.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: if mean_x.is_finite() { mean_y } else { mean_x },
                constraint: "finite",
            });
        }
        Ok(Self {
            mean_x,
            mean_y,
            var_x,
            var_y,
        })
    }

    /// The vacuum: centered, `var_x = var_y = 1/4`.
    pub fn vacuum() -> Self {
        Self {
            mean_x: 0.0,
            mean_y: 0.0,
            var_x: 0.25,
            var_y: 0.25,
        }
    }

    /// Squeezed vacuum with `var_x = e^(-2r)/4`, `var_y = e^(2r)/4`.
    pub fn squeezed(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                constraint: "finite",
            });
        }
        Self::new(0.0, 0.0, 0.25 * (-2.0 * r).exp(), 0.25 * (2.0 * r).exp())
    }

    /// Coherent state displaced to `(mean_x, mean_y)` with vacuum variances.
    pub fn coherent(mean_x: f64, mean_y: f64) -> Result<Self> {
        Self::new(mean_x, mean_y, 0.25, 0.25)
    }

    /// The Wigner density at a phase-space point.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let gx = (-(x - self.mean_x) * (x - self.mean_x) / (2.0 * self.var_x)).exp();
        let gy = (-(y - self.mean_y) * (y - self.mean_y) / (2.0 * self.var_y)).exp();
        gx * gy / (2.0 * std::f64::consts::PI * (self.var_x * self.var_y).sqrt())
    }

    /// Raw phase-space moment `<x^i y^j>`, equal to the symmetrically ordered
    /// operator moment of the same quadrature powers.
    pub fn moment(&self, order_x: usize, order_y: usize) -> Result<f64> {
        if order_x + order_y > MAX_MOMENT_ORDER {
            return Err(Error::UnsupportedMomentOrder {
                order_x,
                order_y,
                max_total: MAX_MOMENT_ORDER,
            });
        }
        Ok(normal_raw_moment(self.mean_x, self.var_x, order_x)
            * normal_raw_moment(self.mean_y, self.var_y, order_y))
    }

    /// Symmetrically ordered mean photon number `<x² + y²> - 1/2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.var_x + self.mean_x * self.mean_x + self.var_y + self.mean_y * self.mean_y - 0.5
    }

    /// Covariance of the squared `x` quadrature with the photon number,
    /// `Cov(x², x² + y² - 1/2)`, evaluated from fourth-order moments.
    pub fn intensity_correlation(&self) -> f64 {
        let x2 = self.moment(2, 0).expect("order 2 is supported");
        let y2 = self.moment(0, 2).expect("order 2 is supported");
        let x4 = self.moment(4, 0).expect("order 4 is supported");
        let x2y2 = self.moment(2, 2).expect("order 4 is supported");
        (x4 - x2 * x2) + (x2y2 - x2 * y2)
    }

    /// The signal's Wigner function after the quadrature coupling of strength
    /// `f`: the meter feeds `f²/4` of extra noise into `y` while `x` passes
    /// through untouched.
    pub fn after_coupling(&self, f: f64) -> Result<Self> {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidParameter {
                name: "f",
                value: f,
                constraint: "finite and positive",
            });
        }
        Self::new(
            self.mean_x,
            self.mean_y,
            self.var_x,
            self.var_y + 0.25 * f * f,
        )
    }
}

/// Wigner function of the signal after the measurement interaction at the
/// given resolution, before any readout conditioning: the meter coupling
/// `f = 1/(2 dx)` adds `f²/4` to the `y` variance and touches nothing else.
pub fn post_interaction_wigner(input: GaussianWigner, res: Resolution) -> GaussianWigner {
    let f = res.coupling();
    GaussianWigner {
        var_y: input.var_y + 0.25 * f * f,
        ..input
    }
}

impl From<GaussianXYState> for GaussianWigner {
    fn from(s: GaussianXYState) -> Self {
        Self {
            mean_x: s.mean_x,
            mean_y: s.mean_y,
            var_x: s.var_x,
            var_y: s.var_y,
        }
    }
}

/// Raw moment `E[z^k]` of a normal distribution, by the recursion
/// `M_k = mu M_(k-1) + (k-1) v M_(k-2)`.
fn normal_raw_moment(mu: f64, v: f64, k: usize) -> f64 {
    let mut prev = 1.0; // M_0
    if k == 0 {
        return prev;
    }
    let mut cur = mu; // M_1
    for j in 2..=k {
        let next = mu * cur + (j as f64 - 1.0) * v * prev;
        prev = cur;
        cur = next;
    }
    cur
}
