//! The `k`th central-moment kernel.
//!
//! For `k` i.i.d. draws the kernel
//!
//! ```text
//! psi_k(x_1..x_k) = sum_{j=0}^{k-2} (-1)^j / (k-j) * sum x_{i1}^{k-j} x_{i2} ... x_{i(j+1)}
//!                   + (-1)^{k-1} (k-1) x_1 ... x_k
//! ```
//!
//! has expectation equal to the population central moment `mu_k`. The inner
//! sum runs over a distinguished index `i1` and an unordered set of `j`
//! further indices, all distinct.
//!
//! [`eval_psi`] is the production evaluator: it centers the tuple first (the
//! kernel is location invariant) and uses closed forms for `k <= 4`.
//! [`eval_psi_expanded`] evaluates the literal monomial expansion and is kept
//! as an independent route for cross-checks.

use std::sync::OnceLock;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{MomentError, Result};
use crate::numeric::CompensatedSum;

/// Largest supported kernel order.
pub const MAX_ORDER: usize = 12;

/// Moment order `k`, validated to `2..=MAX_ORDER`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct KernelOrder(usize);

impl KernelOrder {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(MomentError::arg(format!(
                "kernel order must be at least 2, got {k}"
            )));
        }
        if k > MAX_ORDER {
            return Err(MomentError::UnsupportedOrder { k, max: MAX_ORDER });
        }
        Ok(KernelOrder(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for KernelOrder {
    type Error = MomentError;

    fn try_from(k: usize) -> Result<Self> {
        KernelOrder::new(k)
    }
}

impl From<KernelOrder> for usize {
    fn from(k: KernelOrder) -> usize {
        k.0
    }
}

impl std::fmt::Display for KernelOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn check_tuple(k: KernelOrder, values: &[f64]) -> Result<()> {
    if values.len() != k.get() {
        return Err(MomentError::arg(format!(
            "kernel of order {k} needs {k} values, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(MomentError::NonFinite(format!("kernel argument {v}")));
    }
    Ok(())
}

/// Evaluates `psi_k` at `values`.
pub fn eval_psi(k: KernelOrder, values: &[f64]) -> Result<f64> {
    check_tuple(k, values)?;
    Ok(psi_unchecked(values))
}

/// Evaluates the literal monomial expansion of `psi_k` without centering.
pub fn eval_psi_expanded(k: KernelOrder, values: &[f64]) -> Result<f64> {
    check_tuple(k, values)?;
    Ok(monomial_table(k.get()).eval(values))
}

/// Hot-path evaluator; the order is `values.len()`, which the caller has
/// already validated against [`MAX_ORDER`].
pub(crate) fn psi_unchecked(values: &[f64]) -> f64 {
    match values.len() {
        2 => psi2(values[0], values[1]),
        3 => psi3(values),
        4 => psi4(values),
        k => {
            let mut centered = [0.0; MAX_ORDER];
            let m = values.iter().sum::<f64>() / k as f64;
            for (c, v) in centered.iter_mut().zip(values) {
                *c = v - m;
            }
            monomial_table(k).eval(&centered[..k])
        }
    }
}

/// `(x1 - x2)^2 / 2`.
pub fn psi2(x1: f64, x2: f64) -> f64 {
    let d = x1 - x2;
    0.5 * d * d
}

/// `(3/2) * sum (x_i - mean)^3`, the third h-statistic at `n = 3`.
fn psi3(x: &[f64]) -> f64 {
    let m = (x[0] + x[1] + x[2]) / 3.0;
    let (a, b, c) = (x[0] - m, x[1] - m, x[2] - m);
    1.5 * (a * a * a + b * b * b + c * c * c)
}

/// `(22 m4 - 30 m2^2) / 3`, the fourth h-statistic at `n = 4`, with `m_r` the
/// plug-in central moments of the four values.
fn psi4(x: &[f64]) -> f64 {
    let m = (x[0] + x[1] + x[2] + x[3]) * 0.25;
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for v in x {
        let d = v - m;
        let d2 = d * d;
        s2 += d2;
        s4 += d2 * d2;
    }
    let m2 = s2 * 0.25;
    let m4 = s4 * 0.25;
    (22.0 * m4 - 30.0 * m2 * m2) / 3.0
}

#[derive(Debug, Clone, Copy)]
struct Monomial {
    coef: f64,
    lead: u8,
    power: u8,
    // Bit i set: x_i appears with exponent one.
    others: u16,
}

#[derive(Debug)]
struct MonomialTable {
    k: usize,
    terms: Vec<Monomial>,
}

impl MonomialTable {
    fn build(k: usize) -> Self {
        let mut terms = Vec::new();
        for j in 0..=k - 2 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let coef = sign / (k - j) as f64;
            for lead in 0..k {
                for mask in 0u16..(1u16 << k) {
                    if mask & (1 << lead) == 0 && mask.count_ones() as usize == j {
                        terms.push(Monomial {
                            coef,
                            lead: lead as u8,
                            power: (k - j) as u8,
                            others: mask,
                        });
                    }
                }
            }
        }
        let sign = if (k - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        terms.push(Monomial {
            coef: sign * (k - 1) as f64,
            lead: 0,
            power: 1,
            others: ((1u16 << k) - 1) & !1,
        });
        MonomialTable { k, terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.k);
        let k = self.k;
        let mut pow = [[1.0f64; MAX_ORDER + 1]; MAX_ORDER];
        for (i, row) in pow.iter_mut().enumerate().take(k) {
            for p in 1..=k {
                row[p] = row[p - 1] * x[i];
            }
        }
        let term = |m: &Monomial| {
            let mut t = m.coef * pow[m.lead as usize][m.power as usize];
            let mut bits = m.others;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                t *= x[i];
                bits &= bits - 1;
            }
            t
        };
        if k >= 4 {
            let mut acc = CompensatedSum::default();
            for m in &self.terms {
                acc.add(term(m));
            }
            acc.value()
        } else {
            self.terms.iter().map(term).sum()
        }
    }
}

fn monomial_table(k: usize) -> &'static MonomialTable {
    static TABLES: [OnceLock<MonomialTable>; MAX_ORDER + 1] =
        [const { OnceLock::new() }; MAX_ORDER + 1];
    TABLES[k].get_or_init(|| MonomialTable::build(k))
}

/// Number of monomials in the expansion of `psi_k`.
pub fn monomial_count(k: KernelOrder) -> usize {
    monomial_table(k.get()).terms.len()
}

fn binomial_f64(n: usize, r: usize) -> f64 {
    (0..r)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

/// Kernel value at the two-level configuration with `i` copies of `a`
/// followed by `k - i` copies of `b`: `C(k,i)^{-1} (-1)^{1+i} (a-b)^k`.
pub fn boundary_value(k: KernelOrder, i: usize, a: f64, b: f64) -> Result<f64> {
    let k = k.get();
    if i == 0 || i >= k {
        return Err(MomentError::arg(format!(
            "boundary split i={i} must be in 1..={}",
            k - 1
        )));
    }
    let sign = if (1 + i).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (a - b).powi(k as i32) / binomial_f64(k, i))
}

/// Infimum and supremum of `psi_k` over tuples whose range is `-delta`
/// (`delta = min - max <= 0`).
///
/// For `k >= 3` this is `(-C(k, m)^{-1} (-delta)^k, (-delta)^k / k)` with
/// `m = 1` for odd `k` and `m = 2` for even `k`. For `k = 2` the kernel is
/// constant on such tuples and both ends equal `delta^2 / 2`.
pub fn support_bounds(k: KernelOrder, delta: f64) -> Result<(f64, f64)> {
    if delta > 0.0 || !delta.is_finite() {
        return Err(MomentError::arg(format!(
            "range difference must be <= 0, got {delta}"
        )));
    }
    let k = k.get();
    let span = (-delta).powi(k as i32);
    if k == 2 {
        return Ok((span / 2.0, span / 2.0));
    }
    let m = if k.is_multiple_of(2) { 2 } else { 1 };
    Ok((-span / binomial_f64(k, m), span / k as f64))
}

/// The two alternating binomial sums used in the location-cancellation
/// argument, in exact rational arithmetic:
///
/// ```text
/// S1 = sum_{g=k-h+1}^{k-1} (-1)^{g+1} C(h-1, g-k+h-1)                      == (-1)^k
/// S2 = sum_{g=k-h+1}^{k-1} (-1)^{g+1} C(h-1, g-k+h-1) (g-k+h-1)/(k-g+1)    == (h-2)(-1)^k
/// ```
pub fn lemma_identity_sums_exact(k: i64, h: i64) -> Result<(Ratio<i64>, Ratio<i64>)> {
    if h < 2 || h > k || k > 40 {
        return Err(MomentError::arg(format!(
            "need 2 <= h <= k <= 40, got k={k}, h={h}"
        )));
    }
    let choose = |n: i64, r: i64| -> i64 {
        if r < 0 || r > n {
            return 0;
        }
        let r = r.min(n - r);
        (0..r).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
    };
    let mut s1 = Ratio::from_integer(0);
    let mut s2 = Ratio::from_integer(0);
    for g in (k - h + 1)..=(k - 1) {
        let sign = if (g + 1) % 2 == 0 { 1 } else { -1 };
        let c = sign * choose(h - 1, g - k + h - 1);
        s1 += Ratio::from_integer(c);
        s2 += Ratio::new(c * (g - k + h - 1), k - g + 1);
    }
    Ok((s1, s2))
}

/// Floating-point view of [`lemma_identity_sums_exact`].
pub fn lemma_identity_sums(k: i64, h: i64) -> Result<(f64, f64)> {
    let (s1, s2) = lemma_identity_sums_exact(k, h)?;
    let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
    Ok((f(s1), f(s2)))
}
