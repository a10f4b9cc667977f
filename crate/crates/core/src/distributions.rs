//! Parametric families, quantile averages and the congruence analyzer.
//!
//! A family is congruent in a parameter when moving that parameter moves
//! every quantile average `QA(eps, gamma) = (Q(gamma*eps) + Q(1-eps)) / 2`
//! in the same direction for all `eps` in `(0, 1/(1+gamma)]`. The analyzer
//! estimates `dQA/dtheta` by central differences on a geometric `eps` grid and
//! checks that the nonzero signs agree.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma as gamma_fn, gamma_lr, gamma_ur};

use crate::error::{MomentError, Result};

/// A parametric distribution.
///
/// `GeneralizedGaussian` has density proportional to
/// `exp(-(|x - mu| / sigma)^beta)`: `beta = 2` is a normal with standard
/// deviation `sigma / sqrt(2)`, `beta = 1` a Laplace with scale `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Weibull { shape: f64, scale: f64 },
    Pareto { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Gamma { shape: f64, scale: f64 },
    GeneralizedGaussian { mu: f64, sigma: f64, beta: f64 },
    Uniform { a: f64, b: f64 },
}

/// Population mean, or a tag when it diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanValue {
    Finite(f64),
    Infinite,
}

impl MeanValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanValue::Finite(v) => Some(v),
            MeanValue::Infinite => None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(MomentError::arg(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MomentError::arg(format!("{name} must be finite, got {v}")))
    }
}

impl Family {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Family::Weibull { shape, scale }.validated()
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Family::Pareto { shape, scale }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Family::Lognormal { mu, sigma }.validated()
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Family::Gamma { shape, scale }.validated()
    }

    pub fn generalized_gaussian(mu: f64, sigma: f64, beta: f64) -> Result<Self> {
        Family::GeneralizedGaussian { mu, sigma, beta }.validated()
    }

    /// Normal with the given mean and standard deviation.
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Family::generalized_gaussian(mean, sd * std::f64::consts::SQRT_2, 2.0)
    }

    /// Laplace with location `mu` and scale `b`.
    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        Family::generalized_gaussian(mu, b, 1.0)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Family::Uniform { a, b }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Family::Weibull { shape, scale }
            | Family::Pareto { shape, scale }
            | Family::Gamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
            }
            Family::Lognormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
            }
            Family::GeneralizedGaussian { mu, sigma, beta } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
                positive("beta", beta)?;
            }
            Family::Uniform { a, b } => {
                finite("a", a)?;
                finite("b", b)?;
                if a >= b {
                    return Err(MomentError::arg(format!(
                        "uniform needs a < b, got a={a}, b={b}"
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Weibull { .. } => "weibull",
            Family::Pareto { .. } => "pareto",
            Family::Lognormal { .. } => "lognormal",
            Family::Gamma { .. } => "gamma",
            Family::GeneralizedGaussian { .. } => "gengauss",
            Family::Uniform { .. } => "uniform",
        }
    }

    /// Parameters by name, in canonical order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Family::Weibull { shape, scale } => vec![("alpha", shape), ("lambda", scale)],
            Family::Pareto { shape, scale } => vec![("alpha", shape), ("xm", scale)],
            Family::Lognormal { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            Family::Gamma { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Family::GeneralizedGaussian { mu, sigma, beta } => {
                vec![("mu", mu), ("sigma", sigma), ("beta", beta)]
            }
            Family::Uniform { a, b } => vec![("a", a), ("b", b)],
        }
    }

    fn canonical_param(&self, name: &str) -> Option<&'static str> {
        let alias = match (self, name) {
            (Family::Weibull { .. }, "shape") | (Family::Pareto { .. }, "shape") => "alpha",
            (Family::Weibull { .. }, "scale") => "lambda",
            (Family::Pareto { .. }, "scale") => "xm",
            _ => name,
        };
        self.params()
            .into_iter()
            .map(|(n, _)| n)
            .find(|n| *n == alias)
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        let canon = self
            .canonical_param(name)
            .ok_or_else(|| self.unknown_param(name))?;
        Ok(self
            .params()
            .into_iter()
            .find(|(n, _)| *n == canon)
            .map(|(_, v)| v)
            .unwrap())
    }

    fn unknown_param(&self, name: &str) -> MomentError {
        let known: Vec<_> = self.params().into_iter().map(|(n, _)| n).collect();
        MomentError::arg(format!(
            "{} has no parameter '{name}' (known: {})",
            self.name(),
            known.join(", ")
        ))
    }

    /// Copy of the family with one parameter replaced; the result is validated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Family> {
        let canon = self
            .canonical_param(name)
            .ok_or_else(|| self.unknown_param(name))?;
        let mut f = *self;
        match (&mut f, canon) {
            (Family::Weibull { shape, .. } | Family::Pareto { shape, .. }, "alpha") => {
                *shape = value
            }
            (Family::Weibull { scale, .. }, "lambda") | (Family::Pareto { scale, .. }, "xm") => {
                *scale = value
            }
            (Family::Gamma { shape, .. }, "shape") => *shape = value,
            (Family::Gamma { scale, .. }, "scale") => *scale = value,
            (Family::Lognormal { mu, .. } | Family::GeneralizedGaussian { mu, .. }, "mu") => {
                *mu = value
            }
            (
                Family::Lognormal { sigma, .. } | Family::GeneralizedGaussian { sigma, .. },
                "sigma",
            ) => *sigma = value,
            (Family::GeneralizedGaussian { beta, .. }, "beta") => *beta = value,
            (Family::Uniform { a, .. }, "a") => *a = value,
            (Family::Uniform { b, .. }, "b") => *b = value,
            _ => unreachable!("canonical parameter names cover every variant"),
        }
        f.validated()
    }

    /// True when the support is a subset of `[0, inf)`.
    pub fn positive_support(&self) -> bool {
        match *self {
            Family::Weibull { .. }
            | Family::Pareto { .. }
            | Family::Lognormal { .. }
            | Family::Gamma { .. } => true,
            Family::GeneralizedGaussian { .. } => false,
            Family::Uniform { a, .. } => a >= 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            Family::GeneralizedGaussian { .. } | Family::Uniform { .. }
        )
    }

    /// Quantile function on the open interval `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(MomentError::arg(format!(
                "probability must be in (0, 1), got {p}"
            )));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            Family::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            Family::Pareto { shape, scale } => scale * (-(-p).ln_1p() / shape).exp(),
            Family::Lognormal { mu, sigma } => {
                (mu - std::f64::consts::SQRT_2 * sigma * erfc_inv(2.0 * p)).exp()
            }
            Family::Gamma { shape, scale } => scale * gamma_quantile(shape, p),
            Family::GeneralizedGaussian { mu, sigma, beta } => {
                if beta == 2.0 {
                    mu - sigma * erfc_inv(2.0 * p)
                } else if beta == 1.0 {
                    if p < 0.5 {
                        mu + sigma * (2.0 * p).ln()
                    } else {
                        mu - sigma * (2.0 * (1.0 - p)).ln()
                    }
                } else {
                    let r = gamma_quantile(1.0 / beta, (2.0 * p - 1.0).abs()).powf(1.0 / beta);
                    if p < 0.5 {
                        mu - sigma * r
                    } else {
                        mu + sigma * r
                    }
                }
            }
            Family::Uniform { a, b } => a + (b - a) * p,
        }
    }

    /// Distribution function; NaN for NaN input.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            Family::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Family::Pareto { shape, scale } => {
                if x <= scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
            Family::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * erfc(-(x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_lr(shape, x / scale)
                }
            }
            Family::GeneralizedGaussian { mu, sigma, beta } => {
                let z = (x - mu) / sigma;
                if beta == 2.0 {
                    0.5 * erfc(-z)
                } else if z == 0.0 {
                    0.5
                } else if z.is_infinite() {
                    if z < 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    let half = 0.5 * gamma_lr(1.0 / beta, z.abs().powf(beta));
                    if z < 0.0 {
                        0.5 - half
                    } else {
                        0.5 + half
                    }
                }
            }
            Family::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
        }
    }

    pub fn mean(&self) -> MeanValue {
        MeanValue::Finite(match *self {
            Family::Weibull { shape, scale } => scale * gamma_fn(1.0 + 1.0 / shape),
            Family::Pareto { shape, scale } => {
                if shape <= 1.0 {
                    return MeanValue::Infinite;
                }
                shape * scale / (shape - 1.0)
            }
            Family::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Family::Gamma { shape, scale } => shape * scale,
            Family::GeneralizedGaussian { mu, .. } => mu,
            Family::Uniform { a, b } => 0.5 * (a + b),
        })
    }

    pub fn median(&self) -> f64 {
        self.quantile_unchecked(0.5)
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    /// Draws from a caller-owned generator.
    ///
    /// Families with a closed-form quantile use inverse-transform sampling;
    /// gamma-based families use a gamma variate generator instead of the
    /// iterative inverse CDF.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match *self {
            Family::Gamma { shape, scale } => {
                let g = rand_distr::Gamma::new(shape, scale).expect("validated parameters");
                (0..n).map(|_| g.sample(rng)).collect()
            }
            Family::GeneralizedGaussian { mu, sigma, beta } if beta != 1.0 && beta != 2.0 => {
                let g = rand_distr::Gamma::new(1.0 / beta, 1.0).expect("validated parameters");
                (0..n)
                    .map(|_| {
                        let r = g.sample(rng).powf(1.0 / beta);
                        if rng.random::<bool>() {
                            mu + sigma * r
                        } else {
                            mu - sigma * r
                        }
                    })
                    .collect()
            }
            _ => (0..n)
                .map(|_| self.quantile_unchecked(Open01.sample(rng)))
                .collect(),
        }
    }
}

/// Unit-scale gamma quantile: the statrs inverse CDF polished by Newton steps
/// on whichever tail is smaller, which brings the round-trip error from
/// about 1e-10 down to rounding level.
fn gamma_quantile(shape: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let g = statrs::distribution::Gamma::new(shape, 1.0).expect("validated parameters");
    let mut x = g.inverse_cdf(p);
    for _ in 0..6 {
        let dens = g.pdf(x);
        if !(x > 0.0 && dens > 0.0 && dens.is_finite()) {
            break;
        }
        let resid = if p < 0.5 {
            gamma_lr(shape, x) - p
        } else {
            (1.0 - p) - gamma_ur(shape, x)
        };
        let next = x - resid / dens;
        let next = if next > 0.0 { next } else { 0.5 * x };
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
        x = next;
        if done {
            break;
        }
    }
    x
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self
            .params()
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

impl FromStr for Family {
    type Err = MomentError;

    /// Parses `name` or `name:key=value,key=value`. Names: weibull, pareto,
    /// lognormal, gamma, gengauss, normal (keys mu, sd or sigma), laplace (keys mu, b),
    /// uniform. Omitted keys take defaults.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        let mut pairs = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| MomentError::arg(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| MomentError::arg(format!("bad number '{v}' for {k}")))?;
            pairs.push((k.trim().to_ascii_lowercase(), v));
        }
        let mut take = |keys: &[&str], default: f64| -> f64 {
            match pairs.iter().position(|(k, _)| keys.contains(&k.as_str())) {
                Some(i) => pairs.remove(i).1,
                None => default,
            }
        };
        let family = match name.to_ascii_lowercase().as_str() {
            "weibull" => Family::weibull(
                take(&["alpha", "shape"], 1.0),
                take(&["lambda", "scale"], 1.0),
            ),
            "pareto" => Family::pareto(take(&["alpha", "shape"], 3.0), take(&["xm", "scale"], 1.0)),
            "lognormal" => Family::lognormal(take(&["mu"], 0.0), take(&["sigma"], 1.0)),
            "gamma" => Family::gamma(take(&["shape"], 2.0), take(&["scale"], 1.0)),
            "gengauss" | "generalized-gaussian" => Family::generalized_gaussian(
                take(&["mu"], 0.0),
                take(&["sigma"], 1.0),
                take(&["beta"], 2.0),
            ),
            "normal" => Family::normal(take(&["mu", "mean"], 0.0), take(&["sd", "sigma"], 1.0)),
            "laplace" => Family::laplace(take(&["mu"], 0.0), take(&["b", "scale"], 1.0)),
            "uniform" => Family::uniform(take(&["a"], 0.0), take(&["b"], 1.0)),
            other => return Err(MomentError::arg(format!("unknown family '{other}'"))),
        }?;
        if let Some((k, _)) = pairs.first() {
            return Err(MomentError::arg(format!(
                "unknown parameter '{k}' for {name}"
            )));
        }
        Ok(family)
    }
}

/// `(Q(gamma*eps) + Q(1-eps)) / 2`.
pub fn quantile_average(f: &Family, eps: f64, gamma: f64) -> Result<f64> {
    let (a, b) = qa_quantiles(f, eps, gamma)?;
    Ok(0.5 * (a + b))
}

/// The two quantiles `Q(gamma*eps)` and `Q(1-eps)`.
fn qa_quantiles(f: &Family, eps: f64, gamma: f64) -> Result<(f64, f64)> {
    let lo = gamma * eps;
    let hi = 1.0 - eps;
    if !(lo > 0.0 && lo < 1.0 && hi > 0.0 && hi < 1.0) {
        return Err(MomentError::arg(format!(
            "quantile average needs 0 < gamma*eps < 1 and 0 < 1-eps < 1, got eps={eps}, gamma={gamma}"
        )));
    }
    Ok((f.quantile(lo)?, f.quantile(hi)?))
}

/// Central-difference step used when none is given: `max(1e-6, 1e-4 |theta|)`.
pub fn default_step(theta: f64) -> f64 {
    (1e-4 * theta.abs()).max(1e-6)
}

/// Derivative magnitudes below this are treated as zero.
pub const SIGN_DEAD_BAND: f64 = 1e-12;

/// Central-difference estimate of `dQA/dtheta` with its rounding noise floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaPartial {
    pub derivative: f64,
    /// Size of the derivative that rounding in the two QA evaluations alone could produce.
    pub noise_floor: f64,
}

impl QaPartial {
    /// `+1`, `-1`, or `0` inside the dead-band or the noise floor.
    pub fn sign(&self) -> i8 {
        if self.derivative.abs() < SIGN_DEAD_BAND.max(self.noise_floor) {
            0
        } else if self.derivative > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Nonzero by the dead-band but not distinguishable from rounding noise.
    pub fn is_noisy(&self) -> bool {
        self.derivative.abs() >= SIGN_DEAD_BAND && self.derivative.abs() < self.noise_floor
    }
}

pub fn qa_partial(f: &Family, param: &str, eps: f64, gamma: f64, h: f64) -> Result<QaPartial> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MomentError::arg(format!("step must be > 0, got {h}")));
    }
    let theta = f.param(param)?;
    let (ua, ub) = qa_quantiles(&f.with_param(param, theta + h)?, eps, gamma)?;
    let (da, db) = qa_quantiles(&f.with_param(param, theta - h)?, eps, gamma)?;
    // Rounding is relative to each quantile, not to their average, which can
    // cancel to zero for symmetric families.
    let magnitude = 0.5 * (ua.abs() + ub.abs() + da.abs() + db.abs());
    Ok(QaPartial {
        derivative: (0.5 * (ua + ub) - 0.5 * (da + db)) / (2.0 * h),
        noise_floor: 256.0 * f64::EPSILON * magnitude / (2.0 * h),
    })
}

/// Sign of `dQA/dtheta` at one `eps`.
pub fn qa_partial_sign(f: &Family, param: &str, eps: f64, gamma: f64, h: f64) -> Result<i8> {
    Ok(qa_partial(f, param, eps, gamma, h)?.sign())
}

/// Closed-form `dQA/dsigma` for the lognormal family.
pub fn lognormal_qa_sigma_derivative(mu: f64, sigma: f64, eps: f64, gamma: f64) -> Result<f64> {
    let f = Family::lognormal(mu, sigma)?;
    let lo = gamma * eps;
    let hi = 1.0 - eps;
    let zl = erfc_inv(2.0 * lo);
    let zh = erfc_inv(2.0 * hi);
    let s2 = std::f64::consts::SQRT_2;
    Ok(0.5 * (-s2 * zl * f.quantile(lo)? - s2 * zh * f.quantile(hi)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Congruent,
    NonCongruent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Congruent => "congruent",
            Verdict::NonCongruent => "non-congruent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceVerdict {
    pub family: String,
    pub param: String,
    pub gamma: f64,
    pub eps: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub signs: Vec<i8>,
    pub noisy: Vec<bool>,
    pub verdict: Verdict,
}

/// Smallest `eps` on the congruence grid.
pub const GRID_GUARD: f64 = 1e-4;
/// Default number of grid points.
pub const DEFAULT_GRID: usize = 64;

/// Geometric grid from [`GRID_GUARD`] to `1/(1+gamma)`, endpoints included.
pub fn eps_grid(gamma: f64, size: usize) -> Vec<f64> {
    let top = 1.0 / (1.0 + gamma);
    let ratio = top / GRID_GUARD;
    (0..size)
        .map(|i| {
            if i + 1 == size {
                top
            } else {
                GRID_GUARD * ratio.powf(i as f64 / (size - 1) as f64)
            }
        })
        .collect()
}

pub fn congruence_check(
    f: &Family,
    param: &str,
    gamma: f64,
    grid_size: usize,
) -> Result<CongruenceVerdict> {
    congruence_check_with_step(f, param, gamma, grid_size, None)
}

/// As [`congruence_check`] with an explicit finite-difference step.
pub fn congruence_check_with_step(
    f: &Family,
    param: &str,
    gamma: f64,
    grid_size: usize,
    step: Option<f64>,
) -> Result<CongruenceVerdict> {
    if grid_size < 8 {
        return Err(MomentError::arg(format!(
            "grid needs at least 8 points, got {grid_size}"
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(MomentError::arg(format!(
            "gamma must be > 0 for the congruence grid, got {gamma}"
        )));
    }
    let h = step.unwrap_or_else(|| default_step(f.param(param).unwrap_or(0.0)));
    let eps = eps_grid(gamma, grid_size);
    let partials = eps
        .iter()
        .map(|&e| qa_partial(f, param, e, gamma, h))
        .collect::<Result<Vec<_>>>()?;
    let signs: Vec<i8> = partials.iter().map(QaPartial::sign).collect();
    let noisy: Vec<bool> = partials.iter().map(QaPartial::is_noisy).collect();
    let has_pos = signs.contains(&1);
    let has_neg = signs.contains(&-1);
    let verdict = match (has_pos && has_neg, noisy.contains(&true)) {
        (false, _) => Verdict::Congruent,
        (true, true) => Verdict::Inconclusive,
        (true, false) => Verdict::NonCongruent,
    };
    Ok(CongruenceVerdict {
        family: f.to_string(),
        param: f.canonical_param(param).unwrap_or(param).to_string(),
        gamma,
        eps,
        derivatives: partials.iter().map(|p| p.derivative).collect(),
        signs,
        noisy,
        verdict,
    })
}
