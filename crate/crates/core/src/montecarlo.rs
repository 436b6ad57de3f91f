//! Monte Carlo simulation of repeated finite-resolution quadrature
//! measurements with photon counting on the conditional states.
//!
//! Each trial draws a measurement outcome `x_m` from the exact outcome
//! density, draws a photon number from the exact conditional distribution at
//! that outcome, and applies a detector model (quantum efficiency and an
//! overall current scale). Sampling is exact, so estimator means must agree
//! with the closed-form and Fock-space paths within statistical error - that
//! three-way agreement is the cross-check this module exists for.
//!
//! Reproducibility contract: a run is fully determined by `(seed, trials,
//! substreams)`. Trials are partitioned into `substreams` independent
//! counter-based RNG streams derived from the one seed, so the same seed
//! gives bit-identical trials regardless of how many worker threads execute
//! them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockVector, XEigen};
use crate::measurement::{kernel_weights, MeasurementKernel};
use crate::resolution::Resolution;

/// Fixed number of batches used for error bars; also the default number of
/// RNG substreams.
pub const BATCH_COUNT: usize = 32;

/// Default substream count (equal to the batch count so batches and streams
/// coincide).
pub const DEFAULT_SUBSTREAMS: usize = 32;

/// Counter-based generator behind the substreams.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Fewest trials for which batched error bars make sense.
pub const MIN_TRIALS: usize = 1000;

/// Fewest detected events needed for a conditional estimate.
pub const MIN_DETECTED: usize = 30;

/// Grid density for tabulating non-vacuum outcome distributions.
const OUTCOME_GRID_POINTS: usize = 4001;

/// Input state of the measured mode.
#[derive(Debug, Clone)]
pub enum InputState {
    /// The vacuum: outcome sampling uses the exact Gaussian density.
    Vacuum,
    /// Coherent state of the given amplitude.
    Coherent(Complex64),
    /// Squeezed vacuum with `<x²> = exp(-2r)/4`.
    Squeezed(f64),
    /// Arbitrary truncated number-basis state.
    Custom(FockVector),
}

impl InputState {
    /// Materialize the descriptor at dimension `dim`, enforcing the library
    /// truncation budget for the parametric families.
    pub fn to_fock(&self, dim: usize) -> Result<FockVector> {
        match self {
            InputState::Vacuum => FockVector::vacuum(dim),
            InputState::Coherent(alpha) => crate::fock::coherent_state(*alpha, dim),
            InputState::Squeezed(r) => crate::fock::squeezed_vacuum(*r, dim),
            InputState::Custom(v) => {
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: v.dim(),
                        context: "sampler input state",
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

/// Photon detector placed after the quadrature measurement.
#[derive(Debug, Clone, Copy)]
pub struct DetectorModel {
    /// Probability that a trial with at least one photon registers a count.
    pub eta: f64,
    /// Overall current scale of the readout; pure bookkeeping, carried into
    /// reports so downstream consumers can convert to instrument units.
    pub xi: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, xi: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                constraint: "in (0, 1]",
            });
        }
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
                constraint: "finite and positive",
            });
        }
        Ok(Self { eta, xi })
    }

    /// Ideal detector: every photon-carrying trial registers.
    pub fn ideal() -> Self {
        Self { eta: 1.0, xi: 1.0 }
    }
}

/// One simulated measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    /// Quadrature outcome.
    pub x_m: f64,
    /// Photon number drawn from the conditional distribution.
    pub n: u32,
    /// Whether the detector registered a count (n >= 1 and the efficiency
    /// draw succeeded).
    pub detected: bool,
}

/// A reproducible set of trials.
#[derive(Debug, Clone)]
pub struct TrialSet {
    records: Vec<TrialRecord>,
    seed: u64,
    substreams: usize,
    eta: f64,
    xi: f64,
}

impl TrialSet {
    /// Wrap externally produced records (for tests and replay tooling).
    pub fn from_records(records: Vec<TrialRecord>, seed: u64, detector: DetectorModel) -> Self {
        Self {
            records,
            seed,
            substreams: DEFAULT_SUBSTREAMS,
            eta: detector.eta,
            xi: detector.xi,
        }
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substreams(&self) -> usize {
        self.substreams
    }

    pub fn detector(&self) -> DetectorModel {
        DetectorModel {
            eta: self.eta,
            xi: self.xi,
        }
    }
}

/// A point estimate with its error bar and the sampling parameters behind it.
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// How the error bar was computed.
    pub method: &'static str,
}

/// Knobs for the sampler that tests may pin down.
#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    /// Number of independent RNG substreams the trials are partitioned into.
    pub substreams: usize,
    /// Fock-space dimension used for conditional photon sampling.
    pub dim: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            substreams: DEFAULT_SUBSTREAMS,
            dim: 64,
        }
    }
}

/// Tabulated inverse-CDF sampler for the outcome density of a non-vacuum
/// input, linear between grid points.
struct OutcomeTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl OutcomeTable {
    fn build(kernel: &MeasurementKernel, state: &FockVector, span: f64) -> Result<Self> {
        let prep = kernel.prepare(state)?;
        let n = OUTCOME_GRID_POINTS;
        let step = 2.0 * span / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -span + step * i as f64).collect();
        let pdf: Vec<f64> = xs.iter().map(|&x| kernel.outcome_density(&prep, x)).collect();
        // Trapezoid CDF, normalized to 1 so interpolation stays in range.
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * step;
        }
        let total = cdf[n - 1];
        if !(total > 0.9999) {
            return Err(Error::InvalidGrid {
                reason: "outcome table span does not capture the distribution",
            });
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(Self { xs, cdf })
    }

    fn invert(&self, u: f64) -> f64 {
        // Binary search for the bracketing segment, then linear interpolation.
        let n = self.cdf.len();
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c0 = self.cdf[lo];
        let c1 = self.cdf[hi];
        if c1 <= c0 {
            return self.xs[lo];
        }
        let t = (u - c0) / (c1 - c0);
        self.xs[lo] + t * (self.xs[hi] - self.xs[lo])
    }
}

/// Shared per-run context for trial generation.
struct TrialContext<'a> {
    res: Resolution,
    eig: &'a XEigen,
    coeffs: Vec<f64>,
    coeffs_im: Vec<f64>,
    table: Option<OutcomeTable>,
    detector: DetectorModel,
}

impl TrialContext<'_> {
    /// Conditional photon-number CDF at outcome `x_m`.
    ///
    /// Writes the running cumulative probabilities into `cdf` (normalized to
    /// end at 1) and returns the unnormalized total density. The scratch
    /// slices hold the weighted eigenbasis coefficients so per-trial work
    /// allocates nothing.
    fn conditional_cdf(
        &self,
        x_m: f64,
        scratch_re: &mut [f64],
        scratch_im: &mut [f64],
        cdf: &mut [f64],
    ) -> f64 {
        let dim = self.coeffs.len();
        let w = kernel_weights(self.eig, self.res, x_m);
        // Weighted eigenbasis coefficients.
        for k in 0..dim {
            scratch_re[k] = w[k] * self.coeffs[k];
            scratch_im[k] = w[k] * self.coeffs_im[k];
        }
        // Back to the number basis: amplitude_n = sum_k V[n,k] scratch[k].
        let v = self.eig.vectors();
        let mut acc = 0.0;
        for n in 0..dim {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..dim {
                re += v[(n, k)] * scratch_re[k];
                im += v[(n, k)] * scratch_im[k];
            }
            acc += re * re + im * im;
            cdf[n] = acc;
        }
        cdf[..dim]
            .iter_mut()
            .for_each(|c| *c /= acc.max(f64::MIN_POSITIVE));
        acc
    }

    fn run_substream(&self, stream: u64, seed: u64, count: usize) -> Vec<TrialRecord> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let dim = self.coeffs.len();
        let mut scratch_re = vec![0.0f64; dim];
        let mut scratch_im = vec![0.0f64; dim];
        let mut cdf = vec![0.0f64; dim];
        let sigma = crate::gaussian::outcome_variance(self.res).sqrt();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let x_m = match &self.table {
                None => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sigma * z
                }
                Some(table) => {
                    let u: f64 = rng.gen();
                    table.invert(u)
                }
            };
            self.conditional_cdf(x_m, &mut scratch_re, &mut scratch_im, &mut cdf);
            let u: f64 = rng.gen();
            let mut n = 0usize;
            while n + 1 < dim && cdf[n] < u {
                n += 1;
            }
            let detected = if n >= 1 {
                let d: f64 = rng.gen();
                d < self.detector.eta
            } else {
                false
            };
            out.push(TrialRecord {
                x_m,
                n: n as u32,
                detected,
            });
        }
        out
    }
}

/// Generate `trials` measurement trials with default sampler options.
pub fn sample_trials(
    input: &InputState,
    res: Resolution,
    detector: DetectorModel,
    trials: usize,
    seed: u64,
) -> Result<TrialSet> {
    sample_trials_with(input, res, detector, trials, seed, SamplerOptions::default())
}

/// Generate trials with explicit sampler options.
pub fn sample_trials_with(
    input: &InputState,
    res: Resolution,
    detector: DetectorModel,
    trials: usize,
    seed: u64,
    options: SamplerOptions,
) -> Result<TrialSet> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    if options.substreams == 0 || trials < options.substreams {
        return Err(Error::InvalidParameter {
            name: "substreams",
            value: options.substreams as f64,
            constraint: "at least 1 and no more than the trial count",
        });
    }
    let state = input.to_fock(options.dim)?;
    let kernel = MeasurementKernel::new(res, options.dim)?;
    let prep = kernel.prepare(&state)?;

    let table = match input {
        InputState::Vacuum => None,
        _ => {
            // Span covering both the state's spread and the kernel width.
            let span = ((options.dim as f64).sqrt() + 4.0) + 6.0 * res.dx();
            Some(OutcomeTable::build(&kernel, &state, span)?)
        }
    };

    let ctx = TrialContext {
        res,
        eig: kernel.eigen(),
        coeffs: prep.coeffs().iter().map(|c| c.re).collect(),
        coeffs_im: prep.coeffs().iter().map(|c| c.im).collect(),
        table,
        detector,
    };

    // Fixed partition of trials across substreams: substream k handles
    // counts[k] trials regardless of thread scheduling.
    let base = trials / options.substreams;
    let extra = trials % options.substreams;
    let counts: Vec<usize> = (0..options.substreams)
        .map(|k| base + usize::from(k < extra))
        .collect();

    let mut chunks: Vec<Vec<TrialRecord>> = Vec::new();
    (0..options.substreams)
        .into_par_iter()
        .map(|k| ctx.run_substream(k as u64, seed, counts[k]))
        .collect_into_vec(&mut chunks);

    let mut records = Vec::with_capacity(trials);
    for chunk in chunks {
        records.extend(chunk);
    }
    Ok(TrialSet {
        records,
        seed,
        substreams: options.substreams,
        eta: detector.eta,
        xi: detector.xi,
    })
}

/// Split records into `BATCH_COUNT` contiguous batches.
fn batch_ranges(len: usize) -> Vec<(usize, usize)> {
    let base = len / BATCH_COUNT;
    let extra = len % BATCH_COUNT;
    let mut out = Vec::with_capacity(BATCH_COUNT);
    let mut start = 0;
    for k in 0..BATCH_COUNT {
        let size = base + usize::from(k < extra);
        out.push((start, start + size));
        start += size;
    }
    out
}

/// Standard error from the spread of per-batch means.
fn batch_std_error(batch_means: &[f64]) -> f64 {
    let b = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / b;
    let var = batch_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (b - 1.0);
    (var / b).sqrt()
}

/// Estimate the covariance `<x_m² n> - <x_m²><n>` from trials.
pub fn estimate_correlation(set: &TrialSet) -> Result<EstimatorReport> {
    if set.len() < MIN_TRIALS {
        return Err(Error::TooFewTrials {
            got: set.len(),
            min: MIN_TRIALS,
        });
    }
    let recs = set.records();
    let total = recs.len() as f64;
    let mut sum_x2 = 0.0;
    let mut sum_n = 0.0;
    let mut sum_x2n = 0.0;
    let mut batch_means = Vec::with_capacity(BATCH_COUNT);
    for (lo, hi) in batch_ranges(recs.len()) {
        let mut bx2 = 0.0;
        let mut bn = 0.0;
        let mut bx2n = 0.0;
        for r in &recs[lo..hi] {
            let x2 = r.x_m * r.x_m;
            let n = f64::from(r.n);
            bx2 += x2;
            bn += n;
            bx2n += x2 * n;
        }
        let size = (hi - lo) as f64;
        batch_means.push(bx2n / size - (bx2 / size) * (bn / size));
        sum_x2 += bx2;
        sum_n += bn;
        sum_x2n += bx2n;
    }
    let estimate = sum_x2n / total - (sum_x2 / total) * (sum_n / total);
    Ok(EstimatorReport {
        estimate,
        std_error: batch_std_error(&batch_means),
        n_trials: recs.len(),
        seed: set.seed(),
        method: "batch-means-32",
    })
}

/// Jump statistics recovered from detected events.
#[derive(Debug, Clone)]
pub struct JumpStatistics {
    /// Fraction of trials with a detected count, corrected for detector
    /// efficiency: estimates the probability that the measurement scattered
    /// the state out of the zero-photon component.
    pub jump_fraction: EstimatorReport,
    /// Mean of `x_m²` over detected trials divided by the unconditional mean
    /// of `x_m²`; detector efficiency cancels in this ratio.
    pub conditional_ratio: EstimatorReport,
    /// Number of detected events that entered the conditional estimate.
    pub detected_events: usize,
}

/// Estimate jump statistics from trials.
pub fn jump_statistics(set: &TrialSet) -> Result<JumpStatistics> {
    if set.len() < MIN_TRIALS {
        return Err(Error::TooFewTrials {
            got: set.len(),
            min: MIN_TRIALS,
        });
    }
    let recs = set.records();
    let eta = set.detector().eta;
    let detected_events = recs.iter().filter(|r| r.detected).count();
    if detected_events < MIN_DETECTED {
        return Err(Error::InsufficientEvents {
            got: detected_events,
            min: MIN_DETECTED,
        });
    }

    // Per-batch tallies.
    let ranges = batch_ranges(recs.len());
    let mut frac_means = Vec::with_capacity(BATCH_COUNT);
    let mut b_det = vec![0.0f64; BATCH_COUNT];
    let mut b_det_x2 = vec![0.0f64; BATCH_COUNT];
    let mut b_all_x2 = vec![0.0f64; BATCH_COUNT];
    let mut b_size = vec![0.0f64; BATCH_COUNT];
    for (k, &(lo, hi)) in ranges.iter().enumerate() {
        let mut det = 0.0;
        let mut det_x2 = 0.0;
        let mut all_x2 = 0.0;
        for r in &recs[lo..hi] {
            let x2 = r.x_m * r.x_m;
            all_x2 += x2;
            if r.detected {
                det += 1.0;
                det_x2 += x2;
            }
        }
        let size = (hi - lo) as f64;
        frac_means.push(det / size / eta);
        b_det[k] = det;
        b_det_x2[k] = det_x2;
        b_all_x2[k] = all_x2;
        b_size[k] = size;
    }

    let total = recs.len() as f64;
    let det_total: f64 = b_det.iter().sum();
    let jump_estimate = det_total / total / eta;
    let jump_fraction = EstimatorReport {
        estimate: jump_estimate,
        std_error: batch_std_error(&frac_means),
        n_trials: recs.len(),
        seed: set.seed(),
        method: "batch-means-32",
    };

    // Ratio of means; error bar by leave-one-batch-out jackknife, which
    // handles the nonlinearity of the ratio.
    let det_x2_total: f64 = b_det_x2.iter().sum();
    let all_x2_total: f64 = b_all_x2.iter().sum();
    let ratio = (det_x2_total / det_total) / (all_x2_total / total);
    let mut jack = Vec::with_capacity(BATCH_COUNT);
    for k in 0..BATCH_COUNT {
        let det = det_total - b_det[k];
        let det_x2 = det_x2_total - b_det_x2[k];
        let all_x2 = all_x2_total - b_all_x2[k];
        let size = total - b_size[k];
        if det <= 0.0 {
            return Err(Error::InsufficientEvents {
                got: detected_events,
                min: MIN_DETECTED,
            });
        }
        jack.push((det_x2 / det) / (all_x2 / size));
    }
    let b = BATCH_COUNT as f64;
    let jack_mean = jack.iter().sum::<f64>() / b;
    let jack_var = jack
        .iter()
        .map(|j| (j - jack_mean) * (j - jack_mean))
        .sum::<f64>()
        * (b - 1.0)
        / b;
    let conditional_ratio = EstimatorReport {
        estimate: ratio,
        std_error: jack_var.sqrt(),
        n_trials: detected_events,
        seed: set.seed(),
        method: "jackknife-32-batch",
    };

    Ok(JumpStatistics {
        jump_fraction,
        conditional_ratio,
        detected_events,
    })
}
