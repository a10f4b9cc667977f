//! L-estimators over a sorted sequence.
//!
//! Trimming keeps the 1-based positions `ceil(N*gamma*eps0) + 1 ..= floor(N*(1-eps0))`
//! of an ascending sequence of length `N`: `eps0` is the upper trimming
//! fraction and `gamma * eps0` the lower one. Trimming acts on positions, so
//! tied values are never merged.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MomentError, Result};
use crate::numeric::{compensated_sum, snap};

/// Trimming parameters on the pseudo-sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimSpec {
    eps0: f64,
    gamma: f64,
}

impl TrimSpec {
    pub fn new(eps0: f64, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps0) {
            return Err(MomentError::arg(format!(
                "eps0 must be in [0, 1), got {eps0}"
            )));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(MomentError::arg(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        if gamma * eps0 + eps0 >= 1.0 {
            return Err(MomentError::arg(format!(
                "(1 + gamma) * eps0 must be < 1, got gamma={gamma}, eps0={eps0}"
            )));
        }
        Ok(TrimSpec { eps0, gamma })
    }

    /// Symmetric trimming (`gamma = 1`).
    pub fn symmetric(eps0: f64) -> Result<Self> {
        TrimSpec::new(eps0, 1.0)
    }

    pub fn none() -> Self {
        TrimSpec {
            eps0: 0.0,
            gamma: 1.0,
        }
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Sample-level breakdown point for a kernel of order `k`.
    pub fn breakdown(&self, k: usize) -> f64 {
        breakdown_from_block(self.eps0, k).expect("eps0 validated on construction")
    }

    /// Zero-based index range retained from a sorted sequence of length `len`.
    pub fn window(&self, len: usize) -> Result<Range<usize>> {
        let n = len as f64;
        let lo = snap(n * self.gamma * self.eps0).ceil() as usize;
        let hi = snap(n * (1.0 - self.eps0)).floor() as usize;
        if hi <= lo {
            return Err(MomentError::DegenerateTrim {
                len,
                eps0: self.eps0,
                gamma: self.gamma,
            });
        }
        Ok(lo..hi)
    }
}

impl Default for TrimSpec {
    fn default() -> Self {
        TrimSpec::none()
    }
}

/// Weight profile over the retained window: `weight(position, window_len)`.
#[derive(Clone)]
pub struct WeightScheme {
    name: String,
    weight: Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>,
}

impl WeightScheme {
    pub fn new<F>(name: impl Into<String>, weight: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        WeightScheme {
            name: name.into(),
            weight: Arc::new(weight),
        }
    }

    /// Equal weights; reproduces the trimmed mean.
    pub fn uniform() -> Self {
        WeightScheme::new("uniform", |_, len| 1.0 / len as f64)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn weights(&self, len: usize) -> Result<Vec<f64>> {
        let w: Vec<f64> = (0..len).map(|i| (self.weight)(i, len)).collect();
        if let Some(bad) = w.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(MomentError::Configuration(format!(
                "weight scheme '{}' produced weight {bad}",
                self.name
            )));
        }
        let total = compensated_sum(w.iter().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(MomentError::Configuration(format!(
                "weight scheme '{}' sums to {total} over {len} positions",
                self.name
            )));
        }
        Ok(w)
    }
}

impl fmt::Debug for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightScheme")
            .field("name", &self.name)
            .finish()
    }
}

/// Which L-estimator is applied to the retained window.
#[derive(Debug, Clone, Default)]
pub enum LEstimatorSpec {
    #[default]
    TrimmedMean,
    Median,
    Weighted(WeightScheme),
}

impl LEstimatorSpec {
    pub fn label(&self) -> String {
        match self {
            LEstimatorSpec::TrimmedMean => "trimmed-mean".into(),
            LEstimatorSpec::Median => "median".into(),
            LEstimatorSpec::Weighted(w) => format!("weighted:{}", w.name()),
        }
    }

    /// Applies the estimator to an ascending sequence.
    pub fn apply(&self, sorted: &[f64], trim: &TrimSpec) -> Result<f64> {
        match self {
            LEstimatorSpec::TrimmedMean => trimmed_mean(sorted, trim),
            LEstimatorSpec::Median => {
                check_sorted(sorted)?;
                median_sorted(&sorted[trim.window(sorted.len())?])
            }
            LEstimatorSpec::Weighted(scheme) => {
                check_sorted(sorted)?;
                let kept = &sorted[trim.window(sorted.len())?];
                let w = scheme.weights(kept.len())?;
                Ok(compensated_sum(kept.iter().zip(&w).map(|(x, w)| x * w)))
            }
        }
    }
}

fn check_sorted(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(MomentError::NonFinite(format!("{v} in sorted input")));
    }
    match values.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(MomentError::Unsorted(i + 1)),
        None => Ok(()),
    }
}

/// Mean of the retained window of an ascending sequence.
pub fn trimmed_mean(sorted: &[f64], trim: &TrimSpec) -> Result<f64> {
    check_sorted(sorted)?;
    let kept = &sorted[trim.window(sorted.len())?];
    Ok(compensated_sum(kept.iter().copied()) / kept.len() as f64)
}

pub fn median_sorted(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    if n == 0 {
        return Err(MomentError::arg("median of an empty sequence"));
    }
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// `1 - (1 - eps0)^(1/k)`: the sample-level breakdown point induced by
/// trimming a fraction `eps0` of a pseudo-sample built from `k`-subsets.
pub fn breakdown_from_block(eps0: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&eps0) {
        return Err(MomentError::arg(format!(
            "eps0 must be in [0, 1), got {eps0}"
        )));
    }
    if k == 0 {
        return Err(MomentError::arg("block size must be at least 1"));
    }
    Ok(-((-eps0).ln_1p() / k as f64).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_to_ten() -> Vec<f64> {
        (1..=10).map(f64::from).collect()
    }

    #[test]
    fn trim_spec_validation() {
        assert!(TrimSpec::new(-0.1, 1.0).is_err());
        assert!(TrimSpec::new(1.0, 0.0).is_err());
        assert!(TrimSpec::new(0.5, 1.0).is_err());
        assert!(TrimSpec::new(0.3, -1.0).is_err());
        assert!(TrimSpec::new(0.49, 1.0).is_ok());
        assert!(TrimSpec::new(0.9, 0.0).is_ok());
    }

    #[test]
    fn trimmed_mean_examples() {
        let t = TrimSpec::symmetric(0.1).unwrap();
        assert_eq!(trimmed_mean(&one_to_ten(), &t).unwrap(), 5.5);
        let t = TrimSpec::symmetric(1.0 / 3.0).unwrap();
        assert_eq!(trimmed_mean(&[1.0, 2.0, 3.0], &t).unwrap(), 2.0);
        let s = [-4.0, -1.0, 0.5, 2.0, 9.0];
        for gamma in [0.0, 1.0, 7.0] {
            let t = TrimSpec::new(0.0, gamma).unwrap();
            assert_eq!(trimmed_mean(&s, &t).unwrap(), 6.5 / 5.0);
        }
    }

    #[test]
    fn one_third_trims_to_the_middle() {
        // 1/3 in binary rounds so that 3 * (1/3) and 3 * (1 - 1/3) are not
        // integers; the window must still be exactly position 2.
        let t = TrimSpec::symmetric(1.0 / 3.0).unwrap();
        assert_eq!(t.window(3).unwrap(), 1..2);
    }

    #[test]
    fn asymmetric_window() {
        // gamma = 0: nothing trimmed below, top 20% trimmed above.
        let t = TrimSpec::new(0.2, 0.0).unwrap();
        assert_eq!(t.window(10).unwrap(), 0..8);
        let t = TrimSpec::new(0.1, 3.0).unwrap();
        assert_eq!(t.window(10).unwrap(), 3..9);
    }

    #[test]
    fn errors() {
        let t = TrimSpec::symmetric(0.1).unwrap();
        assert_eq!(
            trimmed_mean(&[3.0, 1.0, 2.0], &t),
            Err(MomentError::Unsorted(1))
        );
        assert!(matches!(
            trimmed_mean(&[1.0, f64::NAN], &t),
            Err(MomentError::NonFinite(_))
        ));
        assert!(matches!(
            trimmed_mean(&[1.0], &TrimSpec::symmetric(0.4).unwrap()),
            Err(MomentError::DegenerateTrim { .. })
        ));
        assert!(trimmed_mean(&[], &TrimSpec::none()).is_err());
        assert!(median_sorted(&[]).is_err());
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_sorted(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(median_sorted(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median_sorted(&[5.0]).unwrap(), 5.0);
    }

    #[test]
    fn apply_dispatch() {
        let t = TrimSpec::symmetric(0.1).unwrap();
        assert_eq!(
            LEstimatorSpec::TrimmedMean
                .apply(&one_to_ten(), &t)
                .unwrap(),
            5.5
        );
        assert_eq!(
            LEstimatorSpec::Median
                .apply(&[1.0, 2.0, 100.0], &TrimSpec::none())
                .unwrap(),
            2.0
        );
        let uniform = LEstimatorSpec::Weighted(WeightScheme::uniform());
        let s = [0.5, 1.0, 1.5, 4.0, 7.0, 7.5, 20.0, 21.0];
        let a = uniform.apply(&s, &t).unwrap();
        let b = LEstimatorSpec::TrimmedMean.apply(&s, &t).unwrap();
        assert!((a - b).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn weighted_scheme_must_be_normalized() {
        let bad = LEstimatorSpec::Weighted(WeightScheme::new("double", |_, len| 2.0 / len as f64));
        assert!(matches!(
            bad.apply(&[1.0, 2.0], &TrimSpec::none()),
            Err(MomentError::Configuration(_))
        ));
        let neg =
            LEstimatorSpec::Weighted(WeightScheme::new(
                "neg",
                |i, _| if i == 0 { -1.0 } else { 2.0 },
            ));
        assert!(matches!(
            neg.apply(&[1.0, 2.0], &TrimSpec::none()),
            Err(MomentError::Configuration(_))
        ));
        // Triangular weights peaking mid-window.
        let tri = WeightScheme::new("triangle", |i, len| {
            let c = (len as f64 - 1.0) / 2.0;
            let raw = |j: usize| 1.0 + c - (j as f64 - c).abs();
            raw(i) / (0..len).map(raw).sum::<f64>()
        });
        let v = LEstimatorSpec::Weighted(tri)
            .apply(&[1.0, 2.0, 3.0], &TrimSpec::none())
            .unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn breakdown_examples() {
        assert!((breakdown_from_block(0.19, 2).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(breakdown_from_block(0.0, 5).unwrap(), 0.0);
        assert!((breakdown_from_block(0.271, 3).unwrap() - 0.1).abs() < 1e-15);
        assert!((breakdown_from_block(0.3, 1).unwrap() - 0.3).abs() < 1e-16);
        assert!(breakdown_from_block(1.0, 2).is_err());
        assert!(breakdown_from_block(-0.1, 2).is_err());
        assert!(breakdown_from_block(0.1, 0).is_err());
    }

    proptest! {
        #[test]
        fn breakdown_round_trips(eps0 in 0.0f64..0.999, k in 1usize..13) {
            let eps = breakdown_from_block(eps0, k).unwrap();
            prop_assert!((0.0..1.0).contains(&eps));
            let back = 1.0 - (1.0 - eps).powi(k as i32);
            prop_assert!((back - eps0).abs() <= 1e-14);
        }

        #[test]
        fn breakdown_is_monotone(a in 0.0f64..0.99, b in 0.0f64..0.99, k in 1usize..13) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(breakdown_from_block(lo, k).unwrap() <= breakdown_from_block(hi, k).unwrap());
        }

        #[test]
        fn window_size_formula(len in 1usize..500, eps0 in 0.0f64..0.45, gamma in 0.0f64..1.2) {
            prop_assume!((1.0 + gamma) * eps0 < 1.0);
            let t = TrimSpec::new(eps0, gamma).unwrap();
            let n = len as f64;
            let expected = snap(n * (1.0 - eps0)).floor() as i64 - snap(n * gamma * eps0).ceil() as i64;
            match t.window(len) {
                Ok(w) => prop_assert_eq!(w.len() as i64, expected),
                Err(_) => prop_assert!(expected < 1),
            }
        }

        #[test]
        fn affine_equivariance(
            mut s in prop::collection::vec(-100.0f64..100.0, 1..60),
            lambda in 0.01f64..10.0,
            mu in -50.0f64..50.0,
            eps0 in 0.0f64..0.3,
        ) {
            s.sort_by(f64::total_cmp);
            let t = TrimSpec::symmetric(eps0).unwrap();
            prop_assume!(t.window(s.len()).is_ok());
            let moved: Vec<f64> = s.iter().map(|x| lambda * x + mu).collect();
            for est in [LEstimatorSpec::TrimmedMean, LEstimatorSpec::Median] {
                let a = est.apply(&moved, &t).unwrap();
                let b = lambda * est.apply(&s, &t).unwrap() + mu;
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()) + lambda * 100.0));
            }
        }

        #[test]
        fn untrimmed_mean_is_arithmetic_mean(s in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            let direct = s.iter().sum::<f64>() / s.len() as f64;
            let tm = trimmed_mean(&sorted, &TrimSpec::none()).unwrap();
            let scale = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
            prop_assert!((tm - direct).abs() <= 1e-13 * direct.abs().max(scale));
        }
    }
}
