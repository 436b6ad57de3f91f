//! Measurement resolution of the quadrature readout.

use crate::error::{Error, Result};

/// Smallest supported resolution; below this the conditional anti-squeezing
/// (variance growing like 1/dx²) exhausts f64 range in downstream formulas.
pub const MIN_DX: f64 = 1e-6;

/// Resolution `dx` of a finite-precision `x`-quadrature readout, equivalently
/// the coupling strength `f = 1/(2 dx)` of the entangling interaction that
/// realizes it.
///
/// Only `dx` is stored; [`Resolution::coupling`] derives `f` on demand, so the
/// relation `f = 1/(2 dx)` holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    dx: f64,
}

impl Resolution {
    /// Resolution from the readout uncertainty `dx`.
    pub fn from_dx(dx: f64) -> Result<Self> {
        if !dx.is_finite() || dx < MIN_DX {
            return Err(Error::InvalidResolution { dx, min: MIN_DX });
        }
        Ok(Self { dx })
    }

    /// Resolution from the interaction coupling `f`; `dx = 1/(2 f)`.
    ///
    /// Note `coupling()` recomputes `1/(2 dx)`, which can differ from the
    /// given `f` by one ulp.
    pub fn from_coupling(f: f64) -> Result<Self> {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "f",
                value: f,
                constraint: "finite and positive",
            });
        }
        Self::from_dx(0.5 / f)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coupling strength `f = 1/(2 dx)`.
    pub fn coupling(&self) -> f64 {
        0.5 / self.dx
    }
}
