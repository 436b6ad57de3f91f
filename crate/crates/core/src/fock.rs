//! Truncated Fock-space representation of a single bosonic mode.
//!
//! Conventions used throughout the crate:
//!
//! * quadratures `x = (a + a†)/2`, `y = (a - a†)/(2i)`, so `[x, y] = i/2`
//!   and the vacuum has `<x²> = <y²> = 1/4`;
//! * `n + 1/2 = x² + y²`;
//! * position wavefunctions normalized as `psi_0(x) = (2/pi)^(1/4) exp(-x²)`.
//!
//! All operators live on the first `dim` number states. Truncation corrupts
//! matrix products only in the top rows/columns, so identities are checked on
//! interior blocks and states must keep their weight away from the edge.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity residual allowed for operators flagged hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Amplitude budget that truncating constructors are allowed to lose.
pub const LEAKAGE_BUDGET: f64 = 1e-8;

/// Slack on the norm of a state vector (roundoff from unitary-ish transforms).
const NORM_SLACK: f64 = 1e-9;

/// A pure state on the first `dim` number states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<Complex64>,
}

impl FockVector {
    /// Wrap raw number-state amplitudes.
    ///
    /// Requires `dim >= 2`, finite entries, and squared norm in `(0, 1 + 1e-9]`:
    /// states are normalized up to declared truncation leakage, never
    /// super-normalized.
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::DimensionTooSmall {
                dim: amps.len(),
                min: 2,
                context: "state vector",
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amps",
                value: f64::NAN,
                constraint: "all amplitudes finite",
            });
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= 0.0 || norm_sqr > 1.0 + NORM_SLACK {
            return Err(Error::InvalidParameter {
                name: "norm_sqr",
                value: norm_sqr,
                constraint: "0 < sum(|amps|^2) <= 1 + 1e-9",
            });
        }
        Ok(Self { amps })
    }

    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        Self::new(DVector::from_vec(amps))
    }

    /// The vacuum state `|0>`.
    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::basis(dim, 0)
    }

    /// The number state `|n>`.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall {
                dim,
                min: 2,
                context: "state vector",
            });
        }
        if n >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: n + 1,
                context: "basis index must lie below dim",
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Amplitude lost to truncation: `1 - sum(|amps|^2)`, clamped at zero.
    pub fn leakage(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    /// Probability weight carried by the top `levels` number states.
    pub fn edge_weight(&self, levels: usize) -> f64 {
        let dim = self.dim();
        let start = dim.saturating_sub(levels);
        (start..dim).map(|n| self.amps[n].norm_sqr()).sum()
    }

    /// Photon-number probabilities `|<n|state>|^2`.
    pub fn number_probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// A linear operator on the truncated number basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wrap a matrix that is asserted hermitian; the residual
    /// `max |M - M†|` must not exceed [`HERMITICITY_TOL`].
    pub fn hermitian(entries: DMatrix<Complex64>) -> Result<Self> {
        assert_eq!(entries.nrows(), entries.ncols(), "operator must be square");
        let residual = hermiticity_residual(&entries);
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                residual,
                tolerance: HERMITICITY_TOL,
            });
        }
        Ok(Self {
            entries,
            hermitian: true,
        })
    }

    /// Wrap a matrix with no hermiticity claim.
    pub fn general(entries: DMatrix<Complex64>) -> Self {
        assert_eq!(entries.nrows(), entries.ncols(), "operator must be square");
        Self {
            entries,
            hermitian: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.entries)
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }

    /// Matrix product `self * other`. The result carries no hermiticity claim.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
                context: "operator product",
            });
        }
        Ok(Self::general(&self.entries * &other.entries))
    }
}

fn hermiticity_residual(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest entry magnitude of `a - b` outside the top `exclude` rows/columns.
pub fn max_interior_abs_diff(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    exclude: usize,
) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let n = a.nrows().saturating_sub(exclude);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// The quadrature and number operators on a common truncated basis.
pub struct FockOperators {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub n: OperatorMatrix,
    pub a: OperatorMatrix,
}

/// Build `x`, `y`, `n`, and the lowering operator `a` at dimension `dim`.
pub fn build_operators(dim: usize) -> Result<FockOperators> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall {
            dim,
            min: 2,
            context: "build_operators",
        });
    }
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    let x = (&a + &adag).scale(0.5);
    // y = (a - a†)/(2i) = -i/2 (a - a†)
    let y = (&a - &adag) * Complex64::new(0.0, -0.5);
    let mut nmat = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..dim {
        nmat[(k, k)] = Complex64::new(k as f64, 0.0);
    }
    Ok(FockOperators {
        x: OperatorMatrix::hermitian(x)?,
        y: OperatorMatrix::hermitian(y)?,
        n: OperatorMatrix::hermitian(nmat)?,
        a: OperatorMatrix::general(a),
    })
}

/// `<state| op |state>`. Real to within 1e-12 whenever `op` is hermitian.
pub fn expectation(state: &FockVector, op: &OperatorMatrix) -> Result<Complex64> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: state.dim(),
            context: "expectation value",
        });
    }
    let applied = op.apply(state.amps());
    Ok(state.amps().dotc(&applied))
}

/// A strictly ascending quadrature grid with positive integration weights.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidGrid {
                reason: "points and weights must have equal length",
            });
        }
        if points.len() < 2 {
            return Err(Error::InvalidGrid {
                reason: "grid needs at least two points",
            });
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid {
                reason: "points must be strictly ascending",
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidGrid {
                reason: "weights must be positive",
            });
        }
        Ok(Self { points, weights })
    }

    /// Uniform symmetric grid on `[-span, span]` with trapezoidal weights and
    /// spacing at most `max_step`.
    pub fn uniform(span: f64, max_step: f64) -> Result<Self> {
        if !(span > 0.0) || !(max_step > 0.0) {
            return Err(Error::InvalidGrid {
                reason: "span and step must be positive",
            });
        }
        let n = ((2.0 * span / max_step).ceil() as usize).max(1) + 1;
        let step = 2.0 * span / (n - 1) as f64;
        let points: Vec<f64> = (0..n).map(|k| -span + step * k as f64).collect();
        let mut weights = vec![step; n];
        weights[0] = 0.5 * step;
        weights[n - 1] = 0.5 * step;
        Self::new(points, weights)
    }

    /// Default grid for dimension `dim`: spans the classical turning region
    /// of the highest retained number state plus a Gaussian tail margin.
    pub fn for_dim(dim: usize) -> Result<Self> {
        Self::uniform((dim as f64).sqrt() + 4.0, 0.02)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Quadrature sum of real samples taken on this grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Evaluate `psi_0 .. psi_{dim-1}` at a single point by the normalized
/// three-term recurrence (stable in the upward direction).
pub fn hermite_point(x: f64, dim: usize) -> Vec<f64> {
    let u = std::f64::consts::SQRT_2 * x;
    let mut out = Vec::with_capacity(dim);
    out.push((2.0 / std::f64::consts::PI).powf(0.25) * (-x * x).exp());
    if dim >= 2 {
        out.push(std::f64::consts::SQRT_2 * u * out[0]);
    }
    for n in 1..dim.saturating_sub(1) {
        let np1 = (n + 1) as f64;
        let next = (2.0 / np1).sqrt() * u * out[n] - (n as f64 / np1).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Matrix of the first `dim` position wavefunctions sampled on `grid`
/// (row `n`, column `k` holds `psi_n(grid.points[k])`).
///
/// The grid must cover `[-(sqrt(dim)+4), sqrt(dim)+4]`; outside that span the
/// top retained wavefunctions lose norm and the rows stop being orthonormal
/// under the grid weights.
pub fn hermite_wavefunctions(grid: &QuadratureGrid, dim: usize) -> Result<DMatrix<f64>> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall {
            dim,
            min: 2,
            context: "hermite_wavefunctions",
        });
    }
    let required = (dim as f64).sqrt() + 4.0;
    let slack = 1e-9;
    if grid.min() > -required + slack || grid.max() < required - slack {
        return Err(Error::GridRange {
            lo: grid.min(),
            hi: grid.max(),
            required_lo: -required,
            required_hi: required,
            context: "hermite_wavefunctions",
        });
    }
    let npts = grid.len();
    let mut m = DMatrix::<f64>::zeros(dim, npts);
    for (k, &x) in grid.points().iter().enumerate() {
        let col = hermite_point(x, dim);
        for n in 0..dim {
            m[(n, k)] = col[n];
        }
    }
    Ok(m)
}

/// Position-representation samples of `state` on the grid underlying
/// `wavefns` (as produced by [`hermite_wavefunctions`]).
pub fn to_position_values(state: &FockVector, wavefns: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if state.dim() != wavefns.nrows() {
        return Err(Error::DimensionMismatch {
            expected: wavefns.nrows(),
            actual: state.dim(),
            context: "to_position_values",
        });
    }
    let npts = wavefns.ncols();
    let mut out = vec![Complex64::new(0.0, 0.0); npts];
    for n in 0..state.dim() {
        let amp = state.amps()[n];
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o += amp * wavefns[(n, k)];
        }
    }
    Ok(out)
}

/// Project grid samples of a wavefunction back onto number-state amplitudes.
pub fn state_from_position(
    values: &[Complex64],
    grid: &QuadratureGrid,
    wavefns: &DMatrix<f64>,
) -> Result<FockVector> {
    if values.len() != grid.len() || wavefns.ncols() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: values.len(),
            context: "state_from_position",
        });
    }
    let dim = wavefns.nrows();
    let mut amps = DVector::<Complex64>::zeros(dim);
    for n in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &v) in values.iter().enumerate() {
            acc += grid.weights()[k] * wavefns[(n, k)] * v;
        }
        amps[n] = acc;
    }
    FockVector::new(amps)
}

/// Coherent state `|alpha>` truncated to `dim` levels.
///
/// Errors if the truncation would drop more than [`LEAKAGE_BUDGET`] of the
/// probability, reporting the smallest adequate dimension.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<FockVector> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall {
            dim,
            min: 2,
            context: "coherent_state",
        });
    }
    let mut amps = DVector::<Complex64>::zeros(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut kept = 0.0f64;
    for n in 0..dim {
        amps[n] = c;
        kept += c.norm_sqr();
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    let leakage = (1.0 - kept).max(0.0);
    if leakage > LEAKAGE_BUDGET {
        return Err(Error::Truncation {
            leakage,
            budget: LEAKAGE_BUDGET,
            required_dim: required_coherent_dim(alpha),
            context: "coherent_state",
        });
    }
    FockVector::new(amps)
}

/// Smallest dimension keeping coherent-state truncation leakage within budget.
pub fn required_coherent_dim(alpha: Complex64) -> usize {
    let mut p = (-alpha.norm_sqr()).exp();
    let mut kept = 0.0f64;
    let mut n = 0usize;
    while kept < 1.0 - LEAKAGE_BUDGET && n < (1 << 20) {
        kept += p;
        p *= alpha.norm_sqr() / (n + 1) as f64;
        n += 1;
    }
    n.max(2)
}

/// Squeezed vacuum with `<x²> = exp(-2r)/4`, truncated to `dim` levels.
pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<FockVector> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall {
            dim,
            min: 2,
            context: "squeezed_vacuum",
        });
    }
    if !r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "finite squeezing parameter",
        });
    }
    let mut amps = DVector::<Complex64>::zeros(dim);
    let mut kept = 0.0f64;
    let mut c = 1.0 / r.cosh().sqrt();
    let t = r.tanh();
    let mut m = 0usize;
    while 2 * m < dim {
        amps[2 * m] = Complex64::new(c, 0.0);
        kept += c * c;
        // ratio of successive even amplitudes: -tanh(r) sqrt((2m+1)/(2m+2))
        c *= -t * ((2 * m + 1) as f64 / (2 * m + 2) as f64).sqrt();
        m += 1;
    }
    let leakage = (1.0 - kept).max(0.0);
    if leakage > LEAKAGE_BUDGET {
        return Err(Error::Truncation {
            leakage,
            budget: LEAKAGE_BUDGET,
            required_dim: required_squeezed_dim(r),
            context: "squeezed_vacuum",
        });
    }
    FockVector::new(amps)
}

/// Smallest dimension keeping squeezed-vacuum truncation leakage within budget.
pub fn required_squeezed_dim(r: f64) -> usize {
    let t = r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    let mut kept = 0.0f64;
    let mut m = 0usize;
    while kept < 1.0 - LEAKAGE_BUDGET && m < (1 << 19) {
        kept += c * c;
        c *= -t * ((2 * m + 1) as f64 / (2 * m + 2) as f64).sqrt();
        m += 1;
    }
    (2 * m).max(2)
}

/// Eigendecomposition of the truncated `x` quadrature: `x = V diag(nodes) Vᵀ`
/// with `nodes` ascending and `V` real orthogonal.
///
/// Because `y = R† x R` with `R = diag((-i)^n)`, this one real symmetric
/// decomposition also yields the `y` eigensystem; no complex solver is needed.
#[derive(Debug, Clone)]
pub struct XEigen {
    nodes: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl XEigen {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall {
                dim,
                min: 2,
                context: "x-quadrature eigensystem",
            });
        }
        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for n in 1..dim {
            let v = 0.5 * (n as f64).sqrt();
            x[(n - 1, n)] = v;
            x[(n, n - 1)] = v;
        }
        let eig = x.symmetric_eigen();
        // nalgebra returns eigenpairs unsorted; order them ascending.
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let nodes = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::<f64>::zeros(dim, dim);
        for (new_col, &old_col) in order.iter().enumerate() {
            vectors.set_column(new_col, &eig.eigenvectors.column(old_col));
        }
        Ok(Self { nodes, vectors })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Eigenvalues of the truncated `x` operator, ascending.
    pub fn nodes(&self) -> &DVector<f64> {
        &self.nodes
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn max_node(&self) -> f64 {
        self.nodes[self.dim() - 1].abs().max(self.nodes[0].abs())
    }

    /// Coordinates of a number-basis vector in the `x` eigenbasis: `Vᵀ v`.
    pub fn to_eigenbasis(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        real_tr_mul_complex(&self.vectors, v)
    }

    /// Back to the number basis: `V c`.
    pub fn from_eigenbasis(&self, c: &DVector<Complex64>) -> DVector<Complex64> {
        real_mul_complex(&self.vectors, c)
    }
}

/// `m * v` for real `m` and complex `v`, via two real mat-vec products.
pub(crate) fn real_mul_complex(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
    let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
    let mre = m * re;
    let mim = m * im;
    DVector::from_iterator(
        mre.len(),
        mre.iter().zip(mim.iter()).map(|(&r, &i)| Complex64::new(r, i)),
    )
}

/// `mᵀ * v` for real `m` and complex `v`.
pub(crate) fn real_tr_mul_complex(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
    let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
    let mre = m.tr_mul(&re);
    let mim = m.tr_mul(&im);
    DVector::from_iterator(
        mre.len(),
        mre.iter().zip(mim.iter()).map(|(&r, &i)| Complex64::new(r, i)),
    )
}
