//! Moment estimators built on the pseudo-sample, plus classical comparators.

use serde::{Deserialize, Serialize};

use crate::error::{MomentError, Result};
use crate::kernels::KernelOrder;
use crate::lstat::{breakdown_from_block, LEstimatorSpec, TrimSpec};
use crate::numeric::{compensated_sum, mean, sample_variance, snap};
use crate::pseudosample::{build_pseudosample, PseudoPlan};

/// A non-empty collection of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MomentError::arg("sample is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(MomentError::NonFinite(format!("sample value {v}")));
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `lambda * x + mu` applied elementwise.
    pub fn affine(&self, lambda: f64, mu: f64) -> Result<Sample> {
        Sample::new(self.0.iter().map(|x| lambda * x + mu).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = MomentError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Sample::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Vec<f64> {
        s.0
    }
}

/// An estimate together with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub k: usize,
    pub eps0: f64,
    pub gamma: f64,
    /// Sample-level breakdown point.
    pub eps: f64,
    pub n: usize,
    pub pseudo_n: u64,
    pub method: String,
    pub plan: String,
    pub seed: Option<u64>,
}

/// Weighted Hodges-Lehmann `k`th central moment: `lest` with `trim` applied to
/// the sorted kernel pseudo-sample.
///
/// With `eps0 = 0` and the trimmed mean this is the U-statistic, i.e. the
/// minimum-variance unbiased estimator of the `k`th central moment.
pub fn whl_central_moment(
    sample: &Sample,
    k: KernelOrder,
    trim: &TrimSpec,
    lest: &LEstimatorSpec,
    plan: &PseudoPlan,
) -> Result<MomentEstimate> {
    if k.get() > sample.len() {
        return Err(MomentError::arg(format!(
            "kernel order {k} exceeds sample size {}",
            sample.len()
        )));
    }
    let pseudo = build_pseudosample(sample.values(), k, plan)?;
    let value = lest.apply(&pseudo, trim)?;
    Ok(MomentEstimate {
        value,
        k: k.get(),
        eps0: trim.eps0(),
        gamma: trim.gamma(),
        eps: trim.breakdown(k.get()),
        n: sample.len(),
        pseudo_n: pseudo.len() as u64,
        method: format!("whl-central-moment/{}", lest.label()),
        plan: plan.label().into(),
        seed: plan.seed(),
    })
}

/// Weighted Hodges-Lehmann standardized `k`th moment: the `k`th central
/// moment estimate over the variance estimate raised to `k/2`.
///
/// Reports the smaller of the two breakdown points.
pub fn whl_standardized_moment(
    sample: &Sample,
    k: KernelOrder,
    trim_num: &TrimSpec,
    trim_den: &TrimSpec,
    lest: &LEstimatorSpec,
    plan: &PseudoPlan,
) -> Result<MomentEstimate> {
    if k.get() < 3 {
        return Err(MomentError::arg("standardized moments need k >= 3"));
    }
    let num = whl_central_moment(sample, k, trim_num, lest, plan)?;
    let two = KernelOrder::new(2)?;
    let den = whl_central_moment(sample, two, trim_den, lest, plan)?;
    if den.value.is_nan() || den.value <= 0.0 {
        return Err(MomentError::DegenerateSample(format!(
            "variance estimate is {}, cannot standardize",
            den.value
        )));
    }
    Ok(MomentEstimate {
        value: num.value / den.value.powf(k.get() as f64 / 2.0),
        eps: num.eps.min(den.eps),
        method: format!("whl-standardized-moment/{}", lest.label()),
        ..num
    })
}

/// Trimmed standard deviation over halved squared pairwise differences: the
/// square root of the trimmed mean of the sorted `psi_2` pseudo-sample.
///
/// Untrimmed, this is exactly the Bessel-corrected sample standard deviation.
pub fn trimmed_sd_eq2(
    sample: &Sample,
    eps0: f64,
    gamma: f64,
    plan: &PseudoPlan,
) -> Result<MomentEstimate> {
    let trim = TrimSpec::new(eps0, gamma)?;
    let two = KernelOrder::new(2)?;
    let var = whl_central_moment(sample, two, &trim, &LEstimatorSpec::TrimmedMean, plan)?;
    Ok(MomentEstimate {
        value: var.value.sqrt(),
        method: "trimmed-sd/pairwise".into(),
        ..var
    })
}

/// Trimmed standard deviation over symmetric order-statistic differences:
/// `sqrt(mean((X_(i) - X_(n-i+1))^2))` for 1-based `i` in
/// `floor(n/2)+1 ..= floor(n(1-eps))` of the ascending sample.
pub fn trimmed_sd_eq1(sample: &Sample, eps: f64) -> Result<MomentEstimate> {
    if !(0.0..0.5).contains(&eps) {
        return Err(MomentError::arg(format!(
            "eps must be in [0, 1/2), got {eps}"
        )));
    }
    let n = sample.len();
    if n < 2 {
        return Err(MomentError::arg("need at least two observations"));
    }
    let mut x = sample.values().to_vec();
    x.sort_by(f64::total_cmp);
    let lo = n / 2 + 1;
    let hi = snap(n as f64 * (1.0 - eps)).floor() as usize;
    if hi < lo {
        return Err(MomentError::DegenerateTrim {
            len: n,
            eps0: eps,
            gamma: 1.0,
        });
    }
    let sum = compensated_sum((lo..=hi).map(|i| {
        let d = x[i - 1] - x[n - i];
        d * d
    }));
    Ok(MomentEstimate {
        value: (sum / (hi - lo + 1) as f64).sqrt(),
        k: 2,
        eps0: eps,
        gamma: 1.0,
        eps,
        n,
        pseudo_n: (n - n / 2) as u64,
        method: "trimmed-sd/order-statistics".into(),
        plan: "exact".into(),
        seed: None,
    })
}

/// Plug-in central moment `(1/n) sum (x - mean)^k`.
pub fn sample_central_moment(sample: &Sample, k: u32) -> f64 {
    let m = mean(sample.values());
    compensated_sum(sample.values().iter().map(|x| (x - m).powi(k as i32))) / sample.len() as f64
}

/// Closed-form unbiased central-moment estimators (h-statistics) for `k` in 2..=4.
pub fn unbiased_moment_oracle(sample: &Sample, k: u32) -> Result<f64> {
    let n = sample.len();
    if !(2..=4).contains(&k) {
        return Err(MomentError::arg(format!(
            "closed forms exist here for k in 2..=4, got {k}"
        )));
    }
    if n < k as usize {
        return Err(MomentError::arg(format!("need n >= {k}, got {n}")));
    }
    let nf = n as f64;
    Ok(match k {
        2 => sample_variance(sample.values()),
        3 => nf * nf / ((nf - 1.0) * (nf - 2.0)) * sample_central_moment(sample, 3),
        _ => {
            let m2 = sample_central_moment(sample, 2);
            let m4 = sample_central_moment(sample, 4);
            nf * ((nf * nf - 2.0 * nf + 3.0) * m4 - 3.0 * (2.0 * nf - 3.0) * m2 * m2)
                / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0))
        }
    })
}

/// Convenience wrapper: sample-level breakdown of a `(eps0, k)` pair.
pub fn breakdown(eps0: f64, k: usize) -> Result<f64> {
    breakdown_from_block(eps0, k)
}
