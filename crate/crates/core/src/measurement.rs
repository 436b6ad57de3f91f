//! Finite-resolution quadrature measurement in the truncated Fock space.
//!
//! The measurement with outcome `x_m` is represented by the positive operator
//!
//! ```text
//! P(x_m) = (2 pi dx²)^(-1/4) exp(-(x_m - x)² / (4 dx²))
//! ```
//!
//! built by applying the Gaussian weight to the eigenvalues of the truncated
//! `x` quadrature. Its square integrates to the identity over outcomes, so
//! repeated application implements a proper measurement; conditioning,
//! outcome densities, and outcome-averaged operator moments all follow from
//! the same eigensystem. This is the brute-force path that must reproduce the
//! closed-form Gaussian results.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{build_operators, FockVector, OperatorMatrix, XEigen};
use crate::integrate::adaptive_simpson;
use crate::resolution::Resolution;

/// Smallest Fock dimension for which the measurement kernel resolves the
/// Gaussian weight structure.
pub const MIN_MEASUREMENT_DIM: usize = 16;

/// Rows/columns excluded from the top of the truncated space when evaluating
/// operator products: products of the quadrature operators are exact on the
/// block below the top two levels.
pub const EDGE_EXCLUSION: usize = 2;

/// Maximum probability weight a state may carry in the excluded edge levels
/// before operator-product expectations are refused.
pub const EDGE_CONTAMINATION_TOL: f64 = 1e-6;

/// Relative tolerance of the outcome integrals in [`correlation_routes`].
pub const MEASUREMENT_REL_TOL: f64 = 1e-8;

/// Allowed disagreement between the two independent correlation routes.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-6;

/// Conditional-state densities below this cannot be renormalized meaningfully.
const DENSITY_FLOOR: f64 = 1e-300;

/// The measurement operator for one specific outcome.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    res: Resolution,
    x_m: f64,
    matrix: OperatorMatrix,
    range_warning: bool,
}

impl MeasurementOperator {
    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn outcome(&self) -> f64 {
        self.x_m
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    /// True when `|x_m|` exceeds the largest eigenvalue of the truncated `x`
    /// operator; the kernel is then evaluated outside the representable
    /// quadrature range and conditional states lean on the truncation edge.
    pub fn range_warning(&self) -> bool {
        self.range_warning
    }
}

/// Gaussian kernel weights on the `x` eigenvalues for outcome `x_m`.
pub fn kernel_weights(eig: &XEigen, res: Resolution, x_m: f64) -> DVector<f64> {
    let dx2 = res.dx() * res.dx();
    let norm = (2.0 * std::f64::consts::PI * dx2).powf(-0.25);
    DVector::from_iterator(
        eig.dim(),
        eig.nodes()
            .iter()
            .map(|&l| norm * (-(x_m - l) * (x_m - l) / (4.0 * dx2)).exp()),
    )
}

/// Build the measurement operator for outcome `x_m` at dimension `dim`.
pub fn build_measurement_operator(
    res: Resolution,
    x_m: f64,
    dim: usize,
) -> Result<MeasurementOperator> {
    if dim < MIN_MEASUREMENT_DIM {
        return Err(Error::DimensionTooSmall {
            dim,
            min: MIN_MEASUREMENT_DIM,
            context: "measurement operator",
        });
    }
    if !x_m.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x_m",
            value: x_m,
            constraint: "finite outcome",
        });
    }
    let eig = XEigen::new(dim)?;
    let w = kernel_weights(&eig, res, x_m);
    // matrix = V diag(w) Vᵀ, assembled in real arithmetic.
    let mut scaled = eig.vectors().clone();
    for (q, mut col) in scaled.column_iter_mut().enumerate() {
        col *= w[q];
    }
    let real = &scaled * eig.vectors().transpose();
    let entries = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(real[(i, j)], 0.0));
    Ok(MeasurementOperator {
        res,
        x_m,
        matrix: OperatorMatrix::hermitian(entries)?,
        range_warning: x_m.abs() > eig.max_node(),
    })
}

/// Conditional state and outcome density from applying a measurement operator.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub post: FockVector,
    /// Probability density of the outcome: `<state| P² |state>`.
    pub density: f64,
}

/// Condition `state` on the outcome represented by `op`.
pub fn apply_measurement(state: &FockVector, op: &MeasurementOperator) -> Result<MeasurementOutcome> {
    if state.dim() != op.matrix.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.matrix.dim(),
            actual: state.dim(),
            context: "apply_measurement",
        });
    }
    let projected = op.matrix.apply(state.amps());
    let density: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
    if density <= DENSITY_FLOOR {
        return Err(Error::VanishingDensity { density });
    }
    let scale = Complex64::new(1.0 / density.sqrt(), 0.0);
    let post = FockVector::new(projected * scale)?;
    Ok(MeasurementOutcome { post, density })
}

/// Photon-number distribution `|<n|state>|²`.
pub fn photon_distribution(state: &FockVector) -> Vec<f64> {
    state.number_probabilities()
}

/// The three operator-ordering expectations that distinguish a photon-number
/// readout taken before, after, or symmetrically around a quadrature factor.
#[derive(Debug, Clone, Copy)]
pub struct OrderingExpectations {
    /// `<x n x>`
    pub xnx: f64,
    /// `<(x² n + n x²)/2>`
    pub sym: f64,
    /// `xnx - sym`; equals 1/4 on any state clear of the truncation edge.
    pub difference: f64,
}

/// Evaluate `<x n x>` and `<(x²n + nx²)/2>` with all operator products
/// restricted to the interior block (the state must carry less than
/// [`EDGE_CONTAMINATION_TOL`] weight in the top [`EDGE_EXCLUSION`] levels).
pub fn ordering_expectations(state: &FockVector) -> Result<OrderingExpectations> {
    let dim = state.dim();
    if dim < 4 {
        return Err(Error::DimensionTooSmall {
            dim,
            min: 4,
            context: "ordering_expectations",
        });
    }
    let edge = state.edge_weight(EDGE_EXCLUSION);
    if edge >= EDGE_CONTAMINATION_TOL {
        return Err(Error::EdgeContamination {
            weight: edge,
            levels: EDGE_EXCLUSION,
            tolerance: EDGE_CONTAMINATION_TOL,
        });
    }
    // Restrict to the interior block by dropping the (negligible) edge
    // amplitudes; operator products are then exact.
    let mut amps = state.amps().clone();
    for k in dim - EDGE_EXCLUSION..dim {
        amps[k] = Complex64::new(0.0, 0.0);
    }
    let ops = build_operators(dim)?;
    let xphi = ops.x.apply(&amps);
    let n_xphi = ops.n.apply(&xphi);
    let xnx = xphi.dotc(&n_xphi);

    let x2phi = ops.x.apply(&xphi);
    let nphi = ops.n.apply(&amps);
    // <x²n> = <x²phi | n phi>; <nx²> is its conjugate, so sym is the real part.
    let x2n = x2phi.dotc(&nphi);
    let sym = x2n.re;

    debug_assert!(xnx.im.abs() < 1e-12);
    Ok(OrderingExpectations {
        xnx: xnx.re,
        sym,
        difference: xnx.re - sym,
    })
}

/// Reusable measurement machinery for many outcomes on a fixed dimension:
/// one eigendecomposition serves every `x_m`.
pub struct MeasurementKernel {
    res: Resolution,
    eig: XEigen,
}

/// A state re-expressed in the `x` eigenbasis, ready for fast conditioning.
pub struct PreparedState {
    coeffs: DVector<Complex64>,
}

impl PreparedState {
    /// Coefficients in the `x` eigenbasis.
    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }
}

impl MeasurementKernel {
    pub fn new(res: Resolution, dim: usize) -> Result<Self> {
        if dim < MIN_MEASUREMENT_DIM {
            return Err(Error::DimensionTooSmall {
                dim,
                min: MIN_MEASUREMENT_DIM,
                context: "measurement kernel",
            });
        }
        Ok(Self {
            res,
            eig: XEigen::new(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn eigen(&self) -> &XEigen {
        &self.eig
    }

    pub fn prepare(&self, state: &FockVector) -> Result<PreparedState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
                context: "measurement kernel prepare",
            });
        }
        Ok(PreparedState {
            coeffs: self.eig.to_eigenbasis(state.amps()),
        })
    }

    /// Outcome density `<state|P(x_m)²|state> = sum_k w_k² |c_k|²`.
    pub fn outcome_density(&self, prep: &PreparedState, x_m: f64) -> f64 {
        let dx2 = self.res.dx() * self.res.dx();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * dx2).sqrt();
        self.eig
            .nodes()
            .iter()
            .zip(prep.coeffs.iter())
            .map(|(&l, c)| norm * (-(x_m - l) * (x_m - l) / (2.0 * dx2)).exp() * c.norm_sqr())
            .sum()
    }

    /// Unnormalized conditional amplitudes `P(x_m) |state>` in the number
    /// basis; its squared norm is the outcome density.
    pub fn conditional_unnormalized(&self, prep: &PreparedState, x_m: f64) -> DVector<Complex64> {
        let w = kernel_weights(&self.eig, self.res, x_m);
        let scaled = DVector::from_iterator(
            self.dim(),
            prep.coeffs.iter().zip(w.iter()).map(|(c, &wk)| c * wk),
        );
        self.eig.from_eigenbasis(&scaled)
    }

    /// Mean and variance of `x` in `state`, read off the eigenbasis weights.
    pub fn quadrature_moments(&self, prep: &PreparedState) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (k, c) in prep.coeffs.iter().enumerate() {
            let p = c.norm_sqr();
            let l = self.eig.nodes()[k];
            m1 += l * p;
            m2 += l * l * p;
        }
        (m1, m2 - m1 * m1)
    }
}

/// The correlation between squared outcome and conditional photon number,
/// evaluated by two independent routes.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationRoutes {
    /// Outcome-moment route: integrate `x_m²` against the photon expectation
    /// of each conditional state.
    pub outcome_moment: f64,
    /// Operator route: outcome-average of the symmetrized operator
    /// `(x²n + 2xnx + nx²)/4` minus the product of averaged factors.
    pub operator_form: f64,
}

/// Compute the squared-outcome/photon-number correlation for `state` through
/// both routes and verify they agree within [`ROUTE_AGREEMENT_TOL`].
pub fn correlation_routes(state: &FockVector, res: Resolution) -> Result<CorrelationRoutes> {
    let dim = state.dim();
    let kernel = MeasurementKernel::new(res, dim)?;
    let prep = kernel.prepare(state)?;

    let (mean_x, var_x) = kernel.quadrature_moments(&prep);
    let sigma = (var_x + res.dx() * res.dx()).sqrt();
    let (lo, hi) = (mean_x - 8.0 * sigma, mean_x + 8.0 * sigma);

    let ops = build_operators(dim)?;
    let x2 = ops.x.matmul(&ops.x)?;
    let xnx = ops.x.matmul(&ops.n)?.matmul(&ops.x)?;
    let x2n = x2.matmul(&ops.n)?;
    let nx2 = ops.n.matmul(&x2)?;
    // (x²n + 2xnx + nx²): the symmetrized photon readout of the operator route.
    let sym4 = OperatorMatrix::general(
        x2n.entries() + xnx.entries().scale(2.0) + nx2.entries(),
    );

    let quad = |f: &mut dyn FnMut(f64) -> f64| -> Result<f64> {
        adaptive_simpson(f, lo, hi, MEASUREMENT_REL_TOL, 1e-12)
    };

    let number_density = |x: f64| {
        let u = kernel.conditional_unnormalized(&prep, x);
        u.iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum::<f64>()
    };

    let t_x2n = quad(&mut |x| x * x * number_density(x))?;
    let t_n = quad(&mut |x| number_density(x))?;
    let t_x2p = quad(&mut |x| x * x * kernel.outcome_density(&prep, x))?;
    let outcome_moment = t_x2n - t_x2p * t_n;

    let t_sym = quad(&mut |x| {
        let u = kernel.conditional_unnormalized(&prep, x);
        u.dotc(&sym4.apply(&u)).re
    })?;
    let t_x2av = quad(&mut |x| {
        let u = kernel.conditional_unnormalized(&prep, x);
        u.dotc(&x2.apply(&u)).re
    })?;
    let operator_form = 0.25 * t_sym - t_n * t_x2av;

    let tol = ROUTE_AGREEMENT_TOL * outcome_moment.abs().max(1.0);
    if (outcome_moment - operator_form).abs() > tol {
        return Err(Error::RouteDisagreement {
            value_a: outcome_moment,
            value_b: operator_form,
            tolerance: ROUTE_AGREEMENT_TOL,
            context: "squared-outcome/photon-number correlation",
        });
    }
    Ok(CorrelationRoutes {
        outcome_moment,
        operator_form,
    })
}

/// The operator-route correlation value, cross-checked against the
/// outcome-moment route before being returned.
pub fn correlation_operator_form(state: &FockVector, res: Resolution) -> Result<f64> {
    correlation_routes(state, res).map(|r| r.operator_form)
}
