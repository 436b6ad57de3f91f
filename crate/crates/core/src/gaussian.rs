//! Closed-form results for a finite-resolution `x`-quadrature measurement of
//! the vacuum state.
//!
//! A readout with resolution `dx` applied to the vacuum produces an outcome
//! density that is the vacuum position density (variance 1/4) convolved with
//! the readout noise (variance dx²). Conditioning on an outcome `x_m` leaves a
//! Gaussian state whose moments, photon content, and rare-event ("quantum
//! jump") statistics all have closed forms. This module is the analytic
//! reference path; the Fock-space and two-mode modules must reproduce it.

use crate::error::{Error, Result};
use crate::fock::QuadratureGrid;
use crate::integrate::adaptive_simpson;
use crate::resolution::Resolution;

/// Relative tolerance for the adaptive quadrature used by
/// [`analytic_correlation`].
pub const CORRELATION_REL_TOL: f64 = 1e-10;

/// Normalization defect allowed for the outcome density integrated over a
/// decomposition grid.
pub const DECOMPOSITION_NORM_TOL: f64 = 1e-8;

/// First and second moments of a Gaussian state in the `x`/`y` quadrature
/// plane. The uncertainty product can never fall below the vacuum value 1/16.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianXYState {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl GaussianXYState {
    pub fn new(mean_x: f64, mean_y: f64, var_x: f64, var_y: f64) -> Result<Self> {
        if !(var_x > 0.0) || !(var_y > 0.0) {
            return Err(Error::InvalidParameter {
                name: "var",
                value: var_x.min(var_y),
                constraint: "variances must be positive",
            });
        }
        if var_x * var_y < 1.0 / 16.0 - 1e-12 {
            return Err(Error::InvalidParameter {
                name: "var_x * var_y",
                value: var_x * var_y,
                constraint: ">= 1/16 - 1e-12 (uncertainty bound)",
            });
        }
        Ok(Self {
            mean_x,
            mean_y,
            var_x,
            var_y,
        })
    }

    /// Vacuum moments: centered, symmetric, variance 1/4 in both quadratures.
    pub fn vacuum() -> Self {
        Self {
            mean_x: 0.0,
            mean_y: 0.0,
            var_x: 0.25,
            var_y: 0.25,
        }
    }

    /// Mean photon number `<x²> + <y²> - 1/2` of these Gaussian moments.
    pub fn mean_photon_number(&self) -> f64 {
        self.var_x + self.mean_x * self.mean_x + self.var_y + self.mean_y * self.mean_y - 0.5
    }
}

/// Variance `dx² + 1/4` of the measurement outcome on the vacuum.
pub fn outcome_variance(res: Resolution) -> f64 {
    res.dx() * res.dx() + 0.25
}

/// Probability density of outcome `x_m` on the vacuum: a centered Gaussian of
/// variance `dx² + 1/4`.
pub fn outcome_pdf(res: Resolution, x_m: f64) -> f64 {
    gaussian_pdf(x_m, outcome_variance(res))
}

/// Gaussian moments of the conditional state after reading out `x_m`.
///
/// The conditional mean is the outcome shrunk by `1/(1 + 4 dx²)`; the `x`
/// variance drops below 1/4 (conditioning sharpens) while the `y` variance
/// grows so that the uncertainty product stays exactly 1/16: the conditional
/// state is a pure minimum-uncertainty state for every outcome.
pub fn post_state(res: Resolution, x_m: f64) -> GaussianXYState {
    let d2 = res.dx() * res.dx();
    let denom = 1.0 + 4.0 * d2;
    GaussianXYState {
        mean_x: x_m / denom,
        mean_y: 0.0,
        var_x: d2 / denom,
        var_y: denom / (16.0 * d2),
    }
}

/// Mean photon number of the conditional state after outcome `x_m`:
/// `1/(16 dx² (1+4dx²)) + x_m²/(1+4dx²)²`.
pub fn post_photon_expectation(res: Resolution, x_m: f64) -> f64 {
    let d2 = res.dx() * res.dx();
    let denom = 1.0 + 4.0 * d2;
    1.0 / (16.0 * d2 * denom) + x_m * x_m / (denom * denom)
}

/// Correlation `C(x_m²; <n>)` between the squared outcome and the conditional
/// photon number, evaluated by numerical integration of the outcome-averaged
/// moments built from [`outcome_pdf`] and [`post_photon_expectation`].
///
/// The closed-form value is exactly 1/8 for every resolution; this routine
/// must reproduce it to 1e-9, which makes it a sharp self-test of the
/// quadrature layer.
pub fn analytic_correlation(res: Resolution) -> Result<f64> {
    let sigma = outcome_variance(res).sqrt();
    let (lo, hi) = (-8.0 * sigma, 8.0 * sigma);
    let t_x2n = adaptive_simpson(
        |x| x * x * post_photon_expectation(res, x) * outcome_pdf(res, x),
        lo,
        hi,
        CORRELATION_REL_TOL,
        1e-14,
    )?;
    let t_n = adaptive_simpson(
        |x| post_photon_expectation(res, x) * outcome_pdf(res, x),
        lo,
        hi,
        CORRELATION_REL_TOL,
        1e-14,
    )?;
    let t_x2 = adaptive_simpson(
        |x| x * x * outcome_pdf(res, x),
        lo,
        hi,
        CORRELATION_REL_TOL,
        1e-14,
    )?;
    Ok(t_x2n - t_x2 * t_n)
}

/// Probability density that the measurement leaves the field in the vacuum
/// *and* reports `x_m`: the squared vacuum-to-vacuum amplitude of the
/// measurement kernel.
pub fn no_jump_pdf(res: Resolution, x_m: f64) -> f64 {
    let d2 = res.dx() * res.dx();
    let k = 1.0 + 8.0 * d2;
    (32.0 * d2 / (std::f64::consts::PI * k * k)).sqrt() * (-4.0 * x_m * x_m / k).exp()
}

/// Total probability that the measurement excites the field out of the vacuum:
/// `1 - sqrt(8 dx² / (1 + 8 dx²))`.
pub fn jump_probability(res: Resolution) -> f64 {
    let d2 = res.dx() * res.dx();
    1.0 - (8.0 * d2 / (1.0 + 8.0 * d2)).sqrt()
}

/// Second moment of the outcome conditioned on having excited the field,
/// `1/4 + dx² (2 + sqrt(1 + 1/(8 dx²)))`.
///
/// Divided by the unconditional second moment `1/4 + dx²` this exceeds 1 for
/// every resolution and approaches 3 as `dx` grows: outcomes that excite the
/// field are systematically far from the center.
pub fn conditional_second_moment(res: Resolution) -> f64 {
    let d2 = res.dx() * res.dx();
    0.25 + d2 * (2.0 + (1.0 + 1.0 / (8.0 * d2)).sqrt())
}

/// Location `|x_m|` of the maximum of the excitation density [`no_jump_pdf`]
/// subtracted from [`outcome_pdf`].
///
/// For small `dx` the difference is monotone decreasing from zero, so the
/// argmax sits at the origin; past the threshold the stationarity condition
/// has the closed form below. (The strongest *relative* enhancement over the
/// total density always sits in the far tail; this is the absolute peak.)
pub fn jump_peak_location(res: Resolution) -> f64 {
    let s2 = outcome_variance(res);
    let k = 8.0 * s2 - 1.0; // = 1 + 8 dx²
    let l = 64.0 * res.dx() * s2.powf(1.5) / (k * k);
    if l <= 1.0 {
        return 0.0;
    }
    (2.0 * s2 * k * l.ln()).sqrt()
}

/// Pointwise split of the outcome density into its no-excitation and
/// excitation parts over a grid, with the closed-form excitation statistics.
#[derive(Debug, Clone)]
pub struct JumpDecomposition {
    grid: QuadratureGrid,
    pub p_total: Vec<f64>,
    pub p_zero: Vec<f64>,
    pub p_jump: Vec<f64>,
    pub jump_probability: f64,
    pub conditional_second_moment: f64,
}

impl JumpDecomposition {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Grid quadrature of the excitation density; must agree with the
    /// closed-form [`jump_probability`] for compliant grids.
    pub fn integrated_jump_probability(&self) -> f64 {
        self.grid.integrate(&self.p_jump)
    }

    /// Grid quadrature of `x_m²` against the normalized excitation density.
    pub fn integrated_conditional_second_moment(&self) -> f64 {
        let weighted: Vec<f64> = self
            .p_jump
            .iter()
            .zip(self.grid.points())
            .map(|(p, &x)| x * x * p)
            .collect();
        self.grid.integrate(&weighted) / self.integrated_jump_probability()
    }
}

/// Split the outcome density on `grid` into no-excitation and excitation
/// parts.
///
/// The grid must cover at least six standard deviations of the outcome
/// density on both sides and resolve it well enough to integrate to 1 within
/// 1e-8.
pub fn jump_decomposition(res: Resolution, grid: &QuadratureGrid) -> Result<JumpDecomposition> {
    let sigma = outcome_variance(res).sqrt();
    let required = 6.0 * sigma;
    if grid.min() > -required || grid.max() < required {
        return Err(Error::GridRange {
            lo: grid.min(),
            hi: grid.max(),
            required_lo: -required,
            required_hi: required,
            context: "jump_decomposition outcome grid",
        });
    }
    let p_total: Vec<f64> = grid.points().iter().map(|&x| outcome_pdf(res, x)).collect();
    let p_zero: Vec<f64> = grid.points().iter().map(|&x| no_jump_pdf(res, x)).collect();
    let p_jump: Vec<f64> = p_total
        .iter()
        .zip(&p_zero)
        .map(|(t, z)| t - z)
        .collect();
    let norm = grid.integrate(&p_total);
    if (norm - 1.0).abs() > DECOMPOSITION_NORM_TOL {
        return Err(Error::InvalidGrid {
            reason: "grid too coarse: outcome density does not integrate to 1 within 1e-8",
        });
    }
    Ok(JumpDecomposition {
        grid: grid.clone(),
        p_total,
        p_zero,
        p_jump,
        jump_probability: jump_probability(res),
        conditional_second_moment: conditional_second_moment(res),
    })
}

fn gaussian_pdf(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}
