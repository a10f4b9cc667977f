//! Seeded Monte Carlo probes of kernel distributions and estimator properties.
//!
//! Every probe is a pure function of its inputs and seed: draws are split into
//! fixed-size blocks, each with its own ChaCha stream, so results do not
//! depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{MomentError, Result};
use crate::estimators::{
    trimmed_sd_eq1, trimmed_sd_eq2, whl_central_moment, whl_standardized_moment, Sample,
};
use crate::kernels::{eval_psi, psi_unchecked, support_bounds, KernelOrder};
use crate::lstat::{LEstimatorSpec, TrimSpec};
use crate::numeric::{mean, mix_seed, sample_variance, sorted_quantile};
use crate::pseudosample::{sort_values, PseudoPlan};
use crate::report::Record;

/// Smallest number of draws accepted by the shape probes.
pub const MIN_PROBE_DRAWS: usize = 100_000;
const PROBE_BLOCK: usize = 1 << 14;
/// Kernel histograms span these quantiles of the draws; the rest is counted
/// in `below` / `above`.
pub const KERNEL_CLIP: (f64, f64) = (0.005, 0.995);
/// A bin-to-bin drop counts against monotonicity only when it exceeds this
/// many Poisson standard errors.
pub const MONOTONE_SLACK: f64 = 3.0;

/// Rule-of-thumb bin count `ceil(2 N^(1/3))`.
pub fn default_bins(n: usize) -> usize {
    (2.0 * (n as f64).cbrt()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values left of the first edge.
    pub below: u64,
    /// Values right of the last edge.
    pub above: u64,
}

impl Histogram {
    /// Equal-width bins on `[lo, hi]`; the last bin is closed.
    pub fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(MomentError::arg(format!(
                "histogram needs bins > 0 and lo < hi, got {bins} on [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        let mut h = Histogram {
            edges,
            counts: vec![0; bins],
            below: 0,
            above: 0,
        };
        for &v in values {
            if v < lo {
                h.below += 1;
            } else if v > hi {
                h.above += 1;
            } else {
                let i = (((v - lo) / width) as usize).min(bins - 1);
                h.counts[i] += 1;
            }
        }
        Ok(h)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin holding `x`, if it lies within the edges.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let width = (hi - lo) / self.bins() as f64;
        Some((((x - lo) / width) as usize).min(self.bins() - 1))
    }

    pub fn mode_bin(&self) -> usize {
        // First maximum, for determinism.
        let max = *self.counts.iter().max().unwrap();
        self.counts.iter().position(|&c| c == max).unwrap()
    }
}

/// Fraction of adjacent bin pairs whose count does not drop significantly
/// when moving toward the last bin.
///
/// A drop from `a` to `b` is significant when `b < a - 3 sqrt(a + b)`.
pub fn monotone_fraction(counts: &[u64]) -> f64 {
    if counts.len() < 2 {
        return 1.0;
    }
    let ok = counts
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0] as f64, w[1] as f64);
            b >= a - MONOTONE_SLACK * (a + b).sqrt()
        })
        .count();
    ok as f64 / (counts.len() - 1) as f64
}

/// Which distribution a [`ShapeProbe`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `X - X'` restricted to `X < X'`.
    PairwiseDifference,
    /// `psi_k` over independent `k`-tuples.
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeProbe {
    pub probe: ProbeKind,
    pub family: Family,
    /// Kernel order; absent for the pairwise-difference probe.
    pub k: Option<usize>,
    pub n_draws: usize,
    pub seed: u64,
    pub histogram: Histogram,
    pub median: f64,
    pub sigma: f64,
    pub median_over_sigma: f64,
    pub mode_bin: usize,
    pub zero_bin: Option<usize>,
    /// Monotone fraction rising into the mode (toward zero for pairwise differences).
    pub monotone_left: f64,
    /// Monotone fraction falling away from the mode; 1 when there is no right side.
    pub monotone_right: f64,
    /// Mode bin within one bin of the zero bin and both monotone fractions >= 0.9.
    pub unimodal_like: bool,
}

impl Record for ShapeProbe {
    const NAME: &'static str = "shape-probe";
}

fn check_draws(n: usize) -> Result<()> {
    if n < MIN_PROBE_DRAWS {
        return Err(MomentError::arg(format!(
            "probes need at least {MIN_PROBE_DRAWS} draws, got {n}"
        )));
    }
    Ok(())
}

/// `n` values of `stat` over groups of `width` i.i.d. family draws.
fn blocked_draws<F>(family: &Family, n: usize, width: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let blocks = n.div_ceil(PROBE_BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = PROBE_BLOCK.min(n - b * PROBE_BLOCK);
            let raw = family.sample_with(&mut rng, len * width);
            raw.chunks_exact(width).map(&stat).collect()
        })
        .collect();
    parts.concat()
}

fn sd(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Histogram of `X - X'` over ordered pairs (`X < X'`) on `[min, 0]`, with the
/// monotone fraction toward zero in `monotone_left`.
pub fn pairwise_diff_shape(
    family: &Family,
    n: usize,
    seed: u64,
    bins: Option<usize>,
) -> Result<ShapeProbe> {
    check_draws(n)?;
    let bins = bins.unwrap_or_else(|| default_bins(n));
    let d = sort_values(blocked_draws(family, n, 2, seed, |p| -(p[0] - p[1]).abs()))?;
    let lo = d[0];
    let hist = Histogram::build(&d, lo, 0.0, bins)?;
    let median = sorted_quantile(&d, 0.5);
    let sigma = sd(&d);
    let left = monotone_fraction(&hist.counts);
    let mode_bin = hist.mode_bin();
    let zero_bin = hist.bin_of(0.0);
    Ok(ShapeProbe {
        probe: ProbeKind::PairwiseDifference,
        family: *family,
        k: None,
        n_draws: n,
        seed,
        median,
        sigma,
        median_over_sigma: median.abs() / sigma,
        mode_bin,
        zero_bin,
        monotone_left: left,
        monotone_right: 1.0,
        unimodal_like: near(mode_bin, zero_bin) && left >= 0.9,
        histogram: hist,
    })
}

fn near(mode: usize, zero: Option<usize>) -> bool {
    zero.is_some_and(|z| mode.abs_diff(z) <= 1)
}

/// Distribution of `psi_k` over independent `k`-tuples, `k` in {3, 4}.
pub fn kernel_dist_probe(
    family: &Family,
    k: usize,
    n: usize,
    seed: u64,
    bins: Option<usize>,
) -> Result<ShapeProbe> {
    if !(3..=4).contains(&k) {
        return Err(MomentError::arg(format!(
            "kernel probe supports k in {{3, 4}}, got {k}"
        )));
    }
    check_draws(n)?;
    let bins = bins.unwrap_or_else(|| default_bins(n));
    let v = sort_values(blocked_draws(family, n, k, seed, psi_unchecked))?;
    let lo = sorted_quantile(&v, KERNEL_CLIP.0);
    let hi = sorted_quantile(&v, KERNEL_CLIP.1);
    let hist = Histogram::build(&v, lo, hi, bins)?;
    let median = sorted_quantile(&v, 0.5);
    let sigma = sd(&v);
    let mode_bin = hist.mode_bin();
    let zero_bin = hist.bin_of(0.0);
    let left = monotone_fraction(&hist.counts[..=mode_bin]);
    let right_rev: Vec<u64> = hist.counts[mode_bin..].iter().rev().copied().collect();
    let right = monotone_fraction(&right_rev);
    Ok(ShapeProbe {
        probe: ProbeKind::Kernel,
        family: *family,
        k: Some(k),
        n_draws: n,
        seed,
        median,
        sigma,
        median_over_sigma: median.abs() / sigma,
        mode_bin,
        zero_bin,
        monotone_left: left,
        monotone_right: right,
        unimodal_like: near(mode_bin, zero_bin) && left >= 0.9 && right >= 0.9,
        histogram: hist,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComparison {
    pub family: Family,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub eps: f64,
    pub seed: u64,
    pub mean_eq1: Vec<f64>,
    pub mean_eq2: Vec<f64>,
    pub var_eq1: Vec<f64>,
    pub var_eq2: Vec<f64>,
    /// `var_eq1 / var_eq2`.
    pub ratio: Vec<f64>,
    /// Ratio of squared coefficients of variation, free of the two estimators' scale.
    pub cv2_ratio: Vec<f64>,
    /// `ratio > 1` at every `n`.
    pub dominates: bool,
    /// `ratio` non-decreasing along `n_values`.
    pub non_decreasing: bool,
}

impl Record for VarianceComparison {
    const NAME: &'static str = "variance-comparison";
}

/// Replicated comparison of the order-statistic and pairwise trimmed standard
/// deviations at breakdown `eps` (`eps0 = eps`, `gamma = 1` for the pairwise
/// one). Both are computed on the same replicate sample.
pub fn variance_comparison(
    family: &Family,
    n_values: &[usize],
    eps: f64,
    replications: usize,
    seed: u64,
) -> Result<VarianceComparison> {
    if replications < 100 {
        return Err(MomentError::arg(format!(
            "need at least 100 replications, got {replications}"
        )));
    }
    if n_values.is_empty() || n_values.iter().any(|&n| n < 10) {
        return Err(MomentError::arg("every n must be at least 10"));
    }
    let plan = PseudoPlan::exact();
    let mut out = VarianceComparison {
        family: *family,
        n_values: n_values.to_vec(),
        replications,
        eps,
        seed,
        mean_eq1: vec![],
        mean_eq2: vec![],
        var_eq1: vec![],
        var_eq2: vec![],
        ratio: vec![],
        cv2_ratio: vec![],
        dominates: false,
        non_decreasing: false,
    };
    for &n in n_values {
        let pairs = (0..replications)
            .into_par_iter()
            .map(|r| {
                let s = Sample::new(family.sample(n, mix_seed(seed, n as u64, r as u64)))?;
                Ok((
                    trimmed_sd_eq1(&s, eps)?.value,
                    trimmed_sd_eq2(&s, eps, 1.0, &plan)?.value,
                ))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (ma, mb) = (mean(&a), mean(&b));
        let (va, vb) = (sample_variance(&a), sample_variance(&b));
        out.mean_eq1.push(ma);
        out.mean_eq2.push(mb);
        out.var_eq1.push(va);
        out.var_eq2.push(vb);
        out.ratio.push(va / vb);
        out.cv2_ratio.push((va / (ma * ma)) / (vb / (mb * mb)));
    }
    out.dominates = out.ratio.iter().all(|&r| r > 1.0);
    out.non_decreasing = out.ratio.windows(2).all(|w| w[1] >= w[0]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportProbe {
    pub k: usize,
    pub resolution: usize,
    pub evaluations: u64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
    pub bound_min: f64,
    pub bound_max: f64,
    /// Largest distance between an observed extremum and its bound.
    pub max_abs_error: f64,
}

impl Record for SupportProbe {
    const NAME: &'static str = "support-probe";
}

/// Grid search of `psi_k` over tuples with minimum 0 and maximum 1; the
/// middle `k - 2` coordinates range over `{0, 1/r, ..., 1}`.
pub fn support_bound_probe(k: usize, resolution: usize) -> Result<SupportProbe> {
    if !(2..=5).contains(&k) {
        return Err(MomentError::arg(format!(
            "support probe supports k in 2..=5, got {k}"
        )));
    }
    if resolution < 20 {
        return Err(MomentError::arg(format!(
            "resolution must be at least 20, got {resolution}"
        )));
    }
    let order = KernelOrder::new(k)?;
    let free = k - 2;
    let side = resolution + 1;
    let total = side.pow(free as u32);
    let point = |mut idx: usize| -> Vec<f64> {
        let mut t = vec![0.0; k];
        t[k - 1] = 1.0;
        for slot in t.iter_mut().skip(1).take(free) {
            *slot = (idx % side) as f64 / resolution as f64;
            idx /= side;
        }
        t
    };
    type Best = (f64, usize, f64, usize);
    let (mn, imn, mx, imx): Best = (0..total)
        .into_par_iter()
        .map(|i| {
            let v = psi_unchecked(&point(i));
            (v, i, v, i)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                let lo = if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    (b.0, b.1)
                } else {
                    (a.0, a.1)
                };
                let hi = if b.2 > a.2 || (b.2 == a.2 && b.3 < a.3) {
                    (b.2, b.3)
                } else {
                    (a.2, a.3)
                };
                (lo.0, lo.1, hi.0, hi.1)
            },
        );
    let (bmin, bmax) = support_bounds(order, -1.0)?;
    Ok(SupportProbe {
        k,
        resolution,
        evaluations: total as u64,
        observed_min: mn,
        observed_max: mx,
        argmin: point(imn),
        argmax: point(imx),
        bound_min: bmin,
        bound_max: bmax,
        max_abs_error: (mn - bmin).abs().max((mx - bmax).abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub trials: usize,
    pub estimator_trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Max of `|psi(lambda t + mu) - lambda^k psi(t)| / |lambda^k psi(t)|`.
    pub kernel_max_rel_dev: f64,
    /// Same with `lambda = 1`.
    pub shift_max_rel_dev: f64,
    /// `psi(-t) == -psi(t)` bit for bit at every odd-order trial.
    pub odd_negation_exact: bool,
    /// Max of `|S(lambda x + mu) - S(x)| / max(|S(x)|, 1)` for the standardized
    /// moment `S`, a scale-free quantity of order one.
    pub estimator_max_rel_dev: f64,
    pub passed: bool,
}

impl Record for EquivarianceReport {
    const NAME: &'static str = "equivariance";
}

pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Randomized location-scale checks: `trials` kernel tuples with `k <= 6`,
/// and `max(trials / 20, 50)` standardized-moment estimates under `lambda > 0`.
pub fn equivariance_suite(trials: usize, seed: u64) -> Result<EquivarianceReport> {
    if trials < 100 {
        return Err(MomentError::arg(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let kernel: Vec<(f64, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1, i as u64));
            let k = rng.random_range(2..=6usize);
            let order = KernelOrder::new(k)?;
            let t: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mag = 10f64.powf(rng.random_range(-1.0..1.0));
            let lambda = if rng.random::<bool>() { mag } else { -mag };
            let mu = rng.random_range(-10.0..10.0);
            let base = eval_psi(order, &t)?;
            let mapped: Vec<f64> = t.iter().map(|x| lambda * x + mu).collect();
            let shifted: Vec<f64> = t.iter().map(|x| x + mu).collect();
            let negated: Vec<f64> = t.iter().map(|x| -x).collect();
            let dev = rel(eval_psi(order, &mapped)?, lambda.powi(k as i32) * base);
            let shift = rel(eval_psi(order, &shifted)?, base);
            let flip = k % 2 == 0 || eval_psi(order, &negated)? == -base;
            Ok((dev, shift, flip))
        })
        .collect::<Result<_>>()?;
    let estimator_trials = (trials / 20).max(50);
    let trim = TrimSpec::symmetric(0.1)?;
    let plan = PseudoPlan::exact();
    let est: Vec<f64> = (0..estimator_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2, i as u64));
            let n = rng.random_range(6..=16usize);
            let order = KernelOrder::new(rng.random_range(3..=4usize))?;
            let x = Sample::new(Family::normal(0.0, 1.0)?.sample_with(&mut rng, n))?;
            let lambda = 10f64.powf(rng.random_range(-1.0..1.0));
            let mu = rng.random_range(-10.0..10.0);
            let lest = LEstimatorSpec::TrimmedMean;
            let a = whl_standardized_moment(&x, order, &trim, &trim, &lest, &plan)?.value;
            let b =
                whl_standardized_moment(&x.affine(lambda, mu)?, order, &trim, &trim, &lest, &plan)?
                    .value;
            Ok((a - b).abs() / a.abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let kernel_max_rel_dev = max(&mut kernel.iter().map(|r| r.0));
    let shift_max_rel_dev = max(&mut kernel.iter().map(|r| r.1));
    let odd_negation_exact = kernel.iter().all(|r| r.2);
    let estimator_max_rel_dev = max(&mut est.iter().copied());
    let tol = EQUIVARIANCE_TOLERANCE;
    Ok(EquivarianceReport {
        trials,
        estimator_trials,
        seed,
        tolerance: tol,
        kernel_max_rel_dev,
        shift_max_rel_dev,
        odd_negation_exact,
        estimator_max_rel_dev,
        passed: kernel_max_rel_dev <= tol
            && shift_max_rel_dev <= tol
            && odd_negation_exact
            && estimator_max_rel_dev <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConsistency {
    pub n: usize,
    pub k: usize,
    pub eps0: f64,
    pub draws: u64,
    pub seeds: Vec<u64>,
    pub exact: f64,
    pub estimates: Vec<f64>,
    pub rel_devs: Vec<f64>,
    pub tolerance: f64,
    pub passes: usize,
}

impl Record for McConsistency {
    const NAME: &'static str = "mc-consistency";
}

/// Monte Carlo trimmed-mean estimates against the exact one, one per seed.
pub fn mc_plan_consistency(
    sample: &Sample,
    k: KernelOrder,
    eps0: f64,
    draws: u64,
    seeds: &[u64],
    tolerance: f64,
) -> Result<McConsistency> {
    let trim = TrimSpec::symmetric(eps0)?;
    let lest = LEstimatorSpec::TrimmedMean;
    let exact = whl_central_moment(sample, k, &trim, &lest, &PseudoPlan::exact())?.value;
    let estimates = seeds
        .iter()
        .map(|&s| {
            Ok(
                whl_central_moment(sample, k, &trim, &lest, &PseudoPlan::monte_carlo(draws, s))?
                    .value,
            )
        })
        .collect::<Result<Vec<f64>>>()?;
    let rel_devs: Vec<f64> = estimates
        .iter()
        .map(|&e| (e - exact).abs() / exact.abs())
        .collect();
    Ok(McConsistency {
        n: sample.len(),
        k: k.get(),
        eps0,
        draws,
        seeds: seeds.to_vec(),
        exact,
        passes: rel_devs.iter().filter(|&&d| d <= tolerance).count(),
        estimates,
        rel_devs,
        tolerance,
    })
}
