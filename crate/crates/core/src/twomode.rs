//! Explicit two-mode realization of the finite-resolution measurement: a
//! signal mode entangled with a meter mode through the quadrature coupling
//! `U = exp(-i 2 f x_S y_M)`, followed by a position readout of the meter.
//!
//! In the Heisenberg picture the coupling shifts `x_M -> x_M + f x_S` and
//! `y_S -> y_S - f y_M`, leaving `x_S` untouched: reading the meter position
//! measures the signal quadrature with resolution `dx = 1/(2f)` while evading
//! measurement backaction on `x_S` itself. Projecting the meter at `x_meter`
//! must reproduce the single-mode measurement kernel at outcome
//! `x_m = x_meter / f` — that equivalence is the point of this module: it is
//! the independent oracle for the measurement path.
//!
//! Joint kets are indexed signal-major: basis state `(n_s, n_m)` lives at
//! flat index `n_s * dim_m + n_m`, matching the Kronecker-product convention
//! `A_S ⊗ B_M`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{hermite_point, FockVector, OperatorMatrix, XEigen};

/// Unitarity defect allowed for the assembled coupling unitary.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Smallest per-mode dimension for which materializing the coupling unitary
/// makes sense; below this the truncated quadrature spectra are too sparse
/// for the joint construction to be meaningful.
pub const MIN_UNITARY_DIM: usize = 16;

/// Conditional-state densities below this cannot be renormalized.
const DENSITY_FLOOR: f64 = 1e-300;

/// Meter dimension that keeps the meter displacement induced by a coupling
/// `f` representable on top of `dim_s` signal levels: the displacement adds
/// up to about `f²` photons per unit of signal `x²`, and the signal spectrum
/// extends to `x² ~ dim_s / 2`.
pub fn recommended_meter_dim(dim_s: usize, f: f64) -> usize {
    dim_s + (8.0 * f * f).ceil() as usize
}

/// Coupling strength realized by a parametric amplifier of gain `a` whose
/// idler output is read out: `f = (a² - 1)/a`.
pub fn coupling_from_gain(a: f64) -> f64 {
    (a * a - 1.0) / a
}

/// Inverse of [`coupling_from_gain`] on `a >= 1`.
pub fn gain_from_coupling(f: f64) -> f64 {
    0.5 * (f + (f * f + 4.0).sqrt())
}

/// A pure state of the signal-meter pair; `amps[(n_s, n_m)]` is the joint
/// number-basis amplitude.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    f: f64,
    amps: DMatrix<Complex64>,
}

impl TwoModeState {
    pub fn coupling(&self) -> f64 {
        self.f
    }

    pub fn dim_s(&self) -> usize {
        self.amps.nrows()
    }

    pub fn dim_m(&self) -> usize {
        self.amps.ncols()
    }

    pub fn amps(&self) -> &DMatrix<Complex64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Expectation of a signal-mode operator: `<A ⊗ I>`.
    pub fn signal_expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if op.dim() != self.dim_s() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_s(),
                actual: op.dim(),
                context: "signal expectation",
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.dim_m() {
            let col = self.amps.column(m).clone_owned();
            let applied = op.apply(&col);
            acc += col.dotc(&applied);
        }
        Ok(acc)
    }

    /// Expectation of a meter-mode operator: `<I ⊗ B>`.
    pub fn meter_expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if op.dim() != self.dim_m() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m(),
                actual: op.dim(),
                context: "meter expectation",
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..self.dim_s() {
            let row = self.amps.row(n).transpose();
            let applied = op.apply(&row);
            acc += row.dotc(&applied);
        }
        Ok(acc)
    }

    /// Probability weight in the top `levels` meter levels; large values mean
    /// the meter space is too small for the displacement it has to absorb.
    pub fn meter_edge_weight(&self, levels: usize) -> f64 {
        let start = self.dim_m().saturating_sub(levels);
        (start..self.dim_m())
            .map(|m| self.amps.column(m).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

/// Phase factors `i^m` used to map the `x` eigensystem onto the `y`
/// quadrature: `y = R† x R` with `R = diag((-i)^m)`.
fn i_power(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Entangle `signal` with a vacuum meter through `exp(-i 2 f x_S y_M)`.
///
/// Evaluated in the factored eigenbasis of `x_S ⊗ y_M`: the signal goes to
/// the `x` eigenbasis, the meter vacuum to the `y` eigenbasis, the coupling
/// contributes one phase per eigenvalue pair, and two real matrix products
/// bring the result back to the joint number basis. The full unitary is never
/// materialized.
pub fn entangle(signal: &FockVector, f: f64, dim_m: usize) -> Result<TwoModeState> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter {
            name: "f",
            value: f,
            constraint: "finite and positive",
        });
    }
    let dim_s = signal.dim();
    let needed = recommended_meter_dim(dim_s, f);
    if dim_m < needed {
        return Err(Error::DimensionTooSmall {
            dim: dim_m,
            min: needed,
            context: "meter space for this coupling",
        });
    }
    let eig_s = XEigen::new(dim_s)?;
    let eig_m = XEigen::new(dim_m)?;

    // Signal in the x_S eigenbasis.
    let s = eig_s.to_eigenbasis(signal.amps());
    // Meter vacuum in the y_M eigenbasis: R|0> = |0>, so the coefficients are
    // the first row of the meter eigenvector matrix.
    let c: Vec<f64> = (0..dim_m).map(|q| eig_m.vectors()[(0, q)]).collect();

    // t[p, q] = s_p c_q exp(-i 2 f lambda_p mu_q)
    let mut t_re = DMatrix::<f64>::zeros(dim_s, dim_m);
    let mut t_im = DMatrix::<f64>::zeros(dim_s, dim_m);
    for p in 0..dim_s {
        let sp = s[p];
        let lp = eig_s.nodes()[p];
        for q in 0..dim_m {
            let theta = -2.0 * f * lp * eig_m.nodes()[q];
            let phase = Complex64::new(theta.cos(), theta.sin());
            let v = sp * c[q] * phase;
            t_re[(p, q)] = v.re;
            t_im[(p, q)] = v.im;
        }
    }

    // amps[n, m] = i^m * (V_S t V_Mᵀ)[n, m]
    let back_re = eig_s.vectors() * &t_re * eig_m.vectors().transpose();
    let back_im = eig_s.vectors() * &t_im * eig_m.vectors().transpose();
    let mut amps = DMatrix::<Complex64>::zeros(dim_s, dim_m);
    for m in 0..dim_m {
        let ph = i_power(m);
        for n in 0..dim_s {
            amps[(n, m)] = ph * Complex64::new(back_re[(n, m)], back_im[(n, m)]);
        }
    }
    Ok(TwoModeState { f, amps })
}

/// The coupling unitary materialized as a joint-basis matrix.
pub struct CouplingUnitary {
    f: f64,
    dim_s: usize,
    dim_m: usize,
    matrix: DMatrix<Complex64>,
}

impl CouplingUnitary {
    pub fn coupling(&self) -> f64 {
        self.f
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Apply to a joint state laid out signal-major.
    pub fn apply(&self, joint: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let dim = self.dim_s * self.dim_m;
        if joint.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: joint.len(),
                context: "coupling unitary apply",
            });
        }
        Ok(&self.matrix * joint)
    }

    /// Max deviation of `U† U e_j` from `e_j` over a spread of probe columns.
    pub fn unitarity_probe(&self) -> f64 {
        let dim = self.dim_s * self.dim_m;
        let probes = 8.min(dim);
        let mut worst = 0.0f64;
        for k in 0..probes {
            let j = k * (dim - 1) / probes.max(1);
            let e = self.matrix.column(j).clone_owned();
            let back = self.matrix.adjoint() * &e;
            for (i, z) in back.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((z - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    /// Full unitarity residual `max |U†U - I|`; quadratic in the joint
    /// dimension, intended for moderate sizes in tests.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim_s * self.dim_m;
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

/// Materialize `exp(-i 2 f x_S y_M)` on the truncated joint space.
///
/// Built from the Kronecker eigensystem: with `x_S = V_S Λ V_Sᵀ` and
/// `y_M = W diag(μ) W†` (`W = R† V_M`), the unitary is
/// `(V_S ⊗ W) diag(exp(-i 2 f λ_p μ_q)) (V_S ⊗ W)†`, assembled per signal
/// eigenindex to avoid any full joint-dimension matrix product.
pub fn build_coupling_unitary(f: f64, dim_s: usize, dim_m: usize) -> Result<CouplingUnitary> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter {
            name: "f",
            value: f,
            constraint: "finite and positive",
        });
    }
    if dim_s < MIN_UNITARY_DIM || dim_m < MIN_UNITARY_DIM {
        return Err(Error::DimensionTooSmall {
            dim: dim_s.min(dim_m),
            min: MIN_UNITARY_DIM,
            context: "coupling unitary",
        });
    }
    let eig_s = XEigen::new(dim_s)?;
    let eig_m = XEigen::new(dim_m)?;
    let vs = eig_s.vectors();
    let vm = eig_m.vectors();

    let dim = dim_s * dim_m;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    let mut cos_q = DMatrix::<f64>::zeros(dim_m, dim_m);
    let mut sin_q = DMatrix::<f64>::zeros(dim_m, dim_m);
    for p in 0..dim_s {
        let lp = eig_s.nodes()[p];
        // K_p = V_M diag(exp(-i 2 f λ_p μ)) V_Mᵀ, split into real and
        // imaginary parts to stay on the fast real matmul path.
        for q in 0..dim_m {
            let theta = -2.0 * f * lp * eig_m.nodes()[q];
            cos_q[(q, q)] = theta.cos();
            sin_q[(q, q)] = theta.sin();
        }
        let k_re = vm * &cos_q * vm.transpose();
        let k_im = vm * &sin_q * vm.transpose();

        // U[(i j),(k l)] += V_S[i,p] V_S[k,p] i^(j-l) K_p[j,l]
        for i in 0..dim_s {
            let vip = vs[(i, p)];
            if vip == 0.0 {
                continue;
            }
            for k in 0..dim_s {
                let coeff = vip * vs[(k, p)];
                let row0 = i * dim_m;
                let col0 = k * dim_m;
                for j in 0..dim_m {
                    for l in 0..dim_m {
                        let kp = Complex64::new(k_re[(j, l)], k_im[(j, l)]);
                        let ph = i_power((j + 4 * dim_m - l) % 4);
                        u[(row0 + j, col0 + l)] += coeff * ph * kp;
                    }
                }
            }
        }
    }
    let unitary = CouplingUnitary {
        f,
        dim_s,
        dim_m,
        matrix: u,
    };
    let defect = unitary.unitarity_probe();
    if defect > UNITARITY_TOL {
        return Err(Error::Truncation {
            leakage: defect,
            budget: UNITARITY_TOL,
            required_dim: recommended_meter_dim(dim_s, f).max(2 * dim_m),
            context: "coupling unitary: unitarity defect, enlarge the meter space",
        });
    }
    Ok(unitary)
}

/// Result of reading the meter position on an entangled pair.
#[derive(Debug, Clone)]
pub struct MeterProjection {
    /// Normalized signal state conditioned on the meter reading.
    pub conditional_signal: FockVector,
    /// Joint probability density of the meter reading.
    pub joint_density: f64,
    /// The equivalent single-mode outcome: `x_m = x_meter / f`.
    pub equivalent_outcome: f64,
}

/// Project the meter of `joint` onto the position eigenvalue `x_meter`.
pub fn meter_projection(joint: &TwoModeState, x_meter: f64) -> Result<MeterProjection> {
    if !x_meter.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x_meter",
            value: x_meter,
            constraint: "finite meter position",
        });
    }
    let h = hermite_point(x_meter, joint.dim_m());
    let mut cond = DVector::<Complex64>::zeros(joint.dim_s());
    for n in 0..joint.dim_s() {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..joint.dim_m() {
            acc += joint.amps()[(n, m)] * h[m];
        }
        cond[n] = acc;
    }
    let density: f64 = cond.iter().map(|z| z.norm_sqr()).sum();
    if density <= DENSITY_FLOOR {
        return Err(Error::VanishingDensity { density });
    }
    let scale = Complex64::new(1.0 / density.sqrt(), 0.0);
    Ok(MeterProjection {
        conditional_signal: FockVector::new(cond * scale)?,
        joint_density: density,
        equivalent_outcome: x_meter / joint.coupling(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_operators, coherent_state};
    use approx::assert_abs_diff_eq;

    #[test]
    fn gain_conversion_round_trip() {
        assert_abs_diff_eq!(coupling_from_gain(2.0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(gain_from_coupling(1.5), 2.0, epsilon = 1e-12);
        for f in [0.3, 1.0, 2.5] {
            assert_abs_diff_eq!(coupling_from_gain(gain_from_coupling(f)), f, epsilon = 1e-12);
        }
    }

    #[test]
    fn meter_sizing_rule() {
        assert_eq!(recommended_meter_dim(32, 1.0), 40);
        assert_eq!(recommended_meter_dim(32, 0.5), 34);
        assert_eq!(recommended_meter_dim(32, 2.0), 64);
    }

    #[test]
    fn undersized_meter_is_rejected_with_advice() {
        let vac = FockVector::vacuum(32).unwrap();
        match entangle(&vac, 2.0, 48) {
            Err(Error::DimensionTooSmall { min, .. }) => assert_eq!(min, 64),
            other => panic!("expected dimension advice, got {other:?}"),
        }
    }

    #[test]
    fn entangled_vacuum_reduced_moments() {
        let f = 1.0;
        let dim_s = 32;
        let dim_m = 48;
        let vac = FockVector::vacuum(dim_s).unwrap();
        let joint = entangle(&vac, f, dim_m).unwrap();

        assert_abs_diff_eq!(joint.norm_sqr(), 1.0, epsilon = 1e-12);

        let ops_s = build_operators(dim_s).unwrap();
        let x2 = ops_s.x.matmul(&ops_s.x).unwrap();
        let y2 = ops_s.y.matmul(&ops_s.y).unwrap();

        // x_S commutes with the coupling: untouched.
        let mean_x2 = joint.signal_expectation(&x2).unwrap().re;
        assert_abs_diff_eq!(mean_x2, 0.25, epsilon = 1e-10);

        // y_S picks up the meter fluctuations: 1/4 + f²/4.
        let mean_y2 = joint.signal_expectation(&y2).unwrap().re;
        assert_abs_diff_eq!(mean_y2, 0.25 + f * f * 0.25, epsilon = 1e-6);

        // Photon injection into the vacuum signal: f²/4.
        let mean_n = joint.signal_expectation(&ops_s.n).unwrap().re;
        assert_abs_diff_eq!(mean_n, f * f * 0.25, epsilon = 1e-6);

        // The meter absorbs f² <x_S²> photons.
        let ops_m = build_operators(dim_m).unwrap();
        let meter_n = joint.meter_expectation(&ops_m.n).unwrap().re;
        assert_abs_diff_eq!(meter_n, f * f * 0.25, epsilon = 1e-6);

        assert!(joint.meter_edge_weight(4) < 1e-12);
    }

    #[test]
    fn joint_wavefunction_matches_displaced_vacuum_profile() {
        // The joint position amplitude must be the signal wavefunction times
        // a vacuum profile displaced by f * x_s in the meter coordinate.
        let f = 1.0;
        let dim_s = 24;
        let dim_m = 48;
        let vac = FockVector::vacuum(dim_s).unwrap();
        let joint = entangle(&vac, f, dim_m).unwrap();

        let norm0 = (2.0 / std::f64::consts::PI).powf(0.25);
        let mut worst = 0.0f64;
        for is in -6..=6 {
            let xs = 0.5 * is as f64;
            let hs = hermite_point(xs, dim_s);
            for im in -8..=8 {
                let xm = 0.5 * im as f64;
                let hm = hermite_point(xm, dim_m);
                let mut amp = Complex64::new(0.0, 0.0);
                for n in 0..dim_s {
                    for m in 0..dim_m {
                        amp += joint.amps()[(n, m)] * hs[n] * hm[m];
                    }
                }
                let d = xm - f * xs;
                let expected = hs[0] * norm0 * (-d * d).exp();
                worst = worst.max((amp - Complex64::new(expected, 0.0)).norm());
            }
        }
        assert!(worst < 1e-6, "joint wavefunction deviates by {worst}");
    }

    #[test]
    fn unitary_matches_factored_entangle() {
        let f = 0.7;
        let dim_s = 16;
        let dim_m = 24;
        let u = build_coupling_unitary(f, dim_s, dim_m).unwrap();

        let signal = coherent_state(Complex64::new(0.4, -0.3), dim_s).unwrap();
        let joint_factored = entangle(&signal, f, dim_m).unwrap();

        let mut joint_vec = DVector::<Complex64>::zeros(dim_s * dim_m);
        for n in 0..dim_s {
            joint_vec[n * dim_m] = signal.amps()[n]; // meter vacuum
        }
        let applied = u.apply(&joint_vec).unwrap();
        let mut worst = 0.0f64;
        for n in 0..dim_s {
            for m in 0..dim_m {
                worst = worst.max((applied[n * dim_m + m] - joint_factored.amps()[(n, m)]).norm());
            }
        }
        assert!(worst < 1e-10, "unitary and factored paths differ by {worst}");
    }

    #[test]
    fn unitarity_residuals_are_tiny() {
        let u = build_coupling_unitary(0.5, 16, 18).unwrap();
        assert!(u.unitarity_probe() <= 1e-8);
        assert!(u.unitarity_residual() <= 1e-12);
    }

    #[test]
    fn unitary_construction_rejects_small_spaces() {
        assert!(matches!(
            build_coupling_unitary(0.5, 8, 24),
            Err(Error::DimensionTooSmall { min: 16, .. })
        ));
        assert!(matches!(
            build_coupling_unitary(0.5, 24, 8),
            Err(Error::DimensionTooSmall { min: 16, .. })
        ));
    }

    /// Meter levels excluded from the Heisenberg interior block below. The
    /// coupling displaces a meter level `l` upward by roughly
    /// `2 f λ_max √l + (f λ_max)²` levels (`λ_max` = largest signal
    /// eigenvalue), so entries within that reach of the meter edge are
    /// corrupted; at f = 0.5 and dims 16x40 the residual measured at
    /// exclusions {16, 20, 24, 28} decays 7e-1, 8e-3, 3e-6, 6e-11.
    const HEISENBERG_METER_EXCLUSION: usize = 28;

    #[test]
    fn heisenberg_transform_of_meter_quadrature() {
        // U†(I⊗x_M)U = I⊗x_M + f x_S⊗I on the interior block, and
        // U†(x_S⊗I)U = x_S⊗I everywhere (the generator commutes with x_S
        // exactly, even truncated: backaction evasion is not approximate).
        let f = 0.5;
        let dim_s = 16;
        let dim_m = 40;
        let u = build_coupling_unitary(f, dim_s, dim_m).unwrap();
        let ops_s = build_operators(dim_s).unwrap();
        let ops_m = build_operators(dim_m).unwrap();
        let dim = dim_s * dim_m;
        let mut xm_joint = DMatrix::<Complex64>::zeros(dim, dim);
        let mut xs_joint = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim_s {
            for j in 0..dim_m {
                for l in 0..dim_m {
                    xm_joint[(i * dim_m + j, i * dim_m + l)] = ops_m.x.entries()[(j, l)];
                }
                for k in 0..dim_s {
                    xs_joint[(i * dim_m + j, k * dim_m + j)] = ops_s.x.entries()[(i, k)];
                }
            }
        }

        let transformed = u.matrix().adjoint() * &xm_joint * u.matrix();
        let expected = &xm_joint + xs_joint.scale(f);
        let m_keep = dim_m - HEISENBERG_METER_EXCLUSION;
        let mut worst = 0.0f64;
        for i in 0..dim_s {
            for j in 0..m_keep {
                for k in 0..dim_s {
                    for l in 0..m_keep {
                        let r = i * dim_m + j;
                        let c = k * dim_m + l;
                        worst = worst.max((transformed[(r, c)] - expected[(r, c)]).norm());
                    }
                }
            }
        }
        assert!(worst <= 1e-6, "meter-quadrature transform residual {worst}");

        let evaded = u.matrix().adjoint() * &xs_joint * u.matrix();
        let mut worst_x = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                worst_x = worst_x.max((evaded[(r, c)] - xs_joint[(r, c)]).norm());
            }
        }
        assert!(worst_x <= 1e-10, "signal quadrature disturbed by {worst_x}");
    }

    #[test]
    fn meter_projection_matches_conditional_geometry() {
        // f = 1 (dx = 0.5), meter reading -0.5 => outcome x_m = -0.5: the
        // conditional signal is shifted to -0.25 and squeezed to var 1/8.
        let f = 1.0;
        let dim_s = 32;
        let dim_m = 48;
        let vac = FockVector::vacuum(dim_s).unwrap();
        let joint = entangle(&vac, f, dim_m).unwrap();
        let proj = meter_projection(&joint, -0.5).unwrap();
        assert_abs_diff_eq!(proj.equivalent_outcome, -0.5, epsilon = 1e-15);

        let ops = build_operators(dim_s).unwrap();
        let x2 = ops.x.matmul(&ops.x).unwrap();
        let mean_x = crate::fock::expectation(&proj.conditional_signal, &ops.x)
            .unwrap()
            .re;
        let mean_x2 = crate::fock::expectation(&proj.conditional_signal, &x2)
            .unwrap()
            .re;
        assert_abs_diff_eq!(mean_x, -0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(mean_x2 - mean_x * mean_x, 0.125, epsilon = 1e-8);
    }

    #[test]
    fn joint_density_normalizes_over_meter_readings() {
        // The meter-reading density for a vacuum signal is Gaussian with
        // variance (1 + f²)/4; whatever its shape, it must integrate to 1.
        for f in [0.5, 1.0] {
            let dim_s = 24;
            let dim_m = 48;
            let vac = FockVector::vacuum(dim_s).unwrap();
            let joint = entangle(&vac, f, dim_m).unwrap();
            let sigma = (f * f * 0.25 + 0.25).sqrt();
            let total = crate::integrate::adaptive_simpson(
                |x_meter| match meter_projection(&joint, x_meter) {
                    Ok(p) => p.joint_density,
                    Err(_) => 0.0,
                },
                -8.0 * sigma,
                8.0 * sigma,
                1e-10,
                1e-12,
            )
            .unwrap();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn projection_fidelity_against_measurement_kernel() {
        use crate::measurement::{apply_measurement, build_measurement_operator};
        use crate::resolution::Resolution;

        let f = 1.0;
        let dim_s = 32;
        let dim_m = 48;
        let vac = FockVector::vacuum(dim_s).unwrap();
        let joint = entangle(&vac, f, dim_m).unwrap();
        let res = Resolution::from_coupling(f).unwrap();

        for xm in [-1.5, -0.5, 0.0, 0.8, 2.0] {
            let x_meter = f * xm;
            let proj = meter_projection(&joint, x_meter).unwrap();
            let op = build_measurement_operator(res, xm, dim_s).unwrap();
            let direct = apply_measurement(&vac, &op).unwrap();
            let overlap = proj
                .conditional_signal
                .amps()
                .dotc(direct.post.amps())
                .norm_sqr();
            assert!(
                overlap >= 1.0 - 1e-6,
                "fidelity {overlap} at outcome {xm}"
            );
        }
    }
}
