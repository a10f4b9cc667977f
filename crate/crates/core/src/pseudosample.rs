//! Materializes the sorted pseudo-sample of kernel values.
//!
//! Exact mode evaluates the kernel on every `k`-subset of the sample. The
//! rank space `0..C(n,k)` is split into fixed-size chunks, each chunk is
//! unranked to its first combination and then walked in lexicographic order,
//! so chunks are independent and can run on any worker.
//!
//! Monte Carlo mode draws `B` subsets of `k` distinct indices, uniformly and
//! independently. Draw `d` belongs to block `d / DRAW_BLOCK`, and every block
//! owns a ChaCha stream keyed by `(seed, block)`; the output therefore does not
//! depend on how blocks are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MomentError, Result};
use crate::kernels::{psi_unchecked, KernelOrder, MAX_ORDER};
use crate::numeric::binomial;

/// Default cap on the number of combinations enumerated in exact mode.
pub const DEFAULT_BUDGET: u64 = 50_000_000;
/// Default number of combinations per exact-mode work unit.
pub const DEFAULT_CHUNK: u64 = 1 << 16;
/// Monte Carlo draws per RNG substream.
pub const DRAW_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PlanMode {
    Exact,
    MonteCarlo { draws: u64, seed: u64 },
}

/// How the pseudo-sample is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoPlan {
    pub mode: PlanMode,
    /// Maximum `C(n,k)` accepted in exact mode.
    pub budget: u64,
    /// Combinations per exact-mode work unit.
    pub chunk: u64,
}

impl PseudoPlan {
    pub fn exact() -> Self {
        PseudoPlan {
            mode: PlanMode::Exact,
            budget: DEFAULT_BUDGET,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn monte_carlo(draws: u64, seed: u64) -> Self {
        PseudoPlan {
            mode: PlanMode::MonteCarlo { draws, seed },
            ..PseudoPlan::exact()
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_chunk(mut self, chunk: u64) -> Self {
        self.chunk = chunk;
        self
    }

    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            PlanMode::Exact => None,
            PlanMode::MonteCarlo { seed, .. } => Some(seed),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.mode {
            PlanMode::Exact => "exact",
            PlanMode::MonteCarlo { .. } => "monte-carlo",
        }
    }

    /// Pseudo-sample size this plan produces for a sample of size `n`.
    pub fn pseudo_len(&self, n: usize, k: KernelOrder) -> Result<u64> {
        self.validate()?;
        if n < k.get() {
            return Err(MomentError::arg(format!(
                "sample size {n} is below kernel order {k}"
            )));
        }
        match self.mode {
            PlanMode::Exact => {
                let c = count_combinations(n as u64, k.get() as u64)?;
                if c > self.budget {
                    return Err(MomentError::Capacity {
                        needed: c,
                        budget: self.budget,
                    });
                }
                Ok(c)
            }
            PlanMode::MonteCarlo { draws, .. } => Ok(draws),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.chunk == 0 {
            return Err(MomentError::Configuration(
                "chunk size must be positive".into(),
            ));
        }
        if let PlanMode::MonteCarlo { draws: 0, .. } = self.mode {
            return Err(MomentError::Configuration(
                "Monte Carlo needs at least one draw".into(),
            ));
        }
        Ok(())
    }
}

impl Default for PseudoPlan {
    fn default() -> Self {
        PseudoPlan::exact()
    }
}

/// Exact `C(n, k)`; overflow past 64 bits is an error.
pub fn count_combinations(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Err(MomentError::arg(format!(
            "need 0 <= k <= n, got n={n}, k={k}"
        )));
    }
    binomial(n, k).ok_or(MomentError::Overflow { n, k })
}

/// A lexicographic rank in the space of `k`-subsets of `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinationRank {
    pub rank: u64,
    pub n: u64,
    pub k: u64,
}

/// The `rank`-th strictly increasing `k`-subset of `0..n` in lexicographic order.
pub fn unrank(r: CombinationRank) -> Result<Vec<usize>> {
    let CombinationRank { mut rank, n, k } = r;
    let total = count_combinations(n, k)?;
    if rank >= total {
        return Err(MomentError::arg(format!(
            "rank {rank} out of range for C({n},{k}) = {total}"
        )));
    }
    let mut out = Vec::with_capacity(k as usize);
    let mut next = 0u64;
    for slot in 0..k {
        let remaining = k - slot - 1;
        loop {
            // Subsets whose current slot is `next` and whose tail comes from above it.
            let block = binomial(n - next - 1, remaining).expect("bounded by total");
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next as usize);
        next += 1;
    }
    Ok(out)
}

/// Inverse of [`unrank`].
pub fn rank(n: u64, subset: &[usize]) -> Result<u64> {
    let k = subset.len() as u64;
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.last().is_some_and(|&x| x as u64 >= n) {
        return Err(MomentError::arg(
            "subset must be strictly increasing and below n",
        ));
    }
    let mut r = 0u64;
    let mut prev = 0u64;
    for (slot, &x) in subset.iter().enumerate() {
        let remaining = k - slot as u64 - 1;
        for skipped in prev..x as u64 {
            r += binomial(n - skipped - 1, remaining).ok_or(MomentError::Overflow { n, k })?;
        }
        prev = x as u64 + 1;
    }
    Ok(r)
}

/// Advances `idx` to the lexicographically next `k`-subset of `0..n`.
/// Returns `false` after the last subset.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn check_sample(sample: &[f64], k: KernelOrder) -> Result<()> {
    if sample.len() < k.get() {
        return Err(MomentError::arg(format!(
            "sample size {} is below kernel order {k}",
            sample.len()
        )));
    }
    if let Some(v) = sample.iter().find(|v| !v.is_finite()) {
        return Err(MomentError::NonFinite(format!("sample value {v}")));
    }
    Ok(())
}

/// Kernel values of the exact ranks `start..end`, in rank order.
fn enumerate_range(sample: &[f64], k: usize, start: u64, end: u64) -> Vec<f64> {
    let n = sample.len();
    let mut idx = unrank(CombinationRank {
        rank: start,
        n: n as u64,
        k: k as u64,
    })
    .expect("chunk start within range");
    let mut buf = [0.0; MAX_ORDER];
    let mut out = Vec::with_capacity((end - start) as usize);
    for _ in start..end {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = sample[i];
        }
        out.push(psi_unchecked(&buf[..k]));
        next_combination(&mut idx, n);
    }
    out
}

/// Kernel values of every `k`-subset, in lexicographic rank order (unsorted).
pub fn enumerate_exact(sample: &[f64], k: KernelOrder, plan: &PseudoPlan) -> Result<Vec<f64>> {
    check_sample(sample, k)?;
    let total = plan.pseudo_len(sample.len(), k)?;
    let chunk = plan.chunk;
    let chunks = total.div_ceil(chunk);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| enumerate_range(sample, k.get(), c * chunk, ((c + 1) * chunk).min(total)))
        .collect();
    Ok(parts.concat())
}

/// Kernel values of `draws` uniformly drawn `k`-subsets, in draw order (unsorted).
pub fn draw_monte_carlo(sample: &[f64], k: KernelOrder, draws: u64, seed: u64) -> Result<Vec<f64>> {
    check_sample(sample, k)?;
    if draws == 0 {
        return Err(MomentError::Configuration(
            "Monte Carlo needs at least one draw".into(),
        ));
    }
    let n = sample.len();
    let k = k.get();
    let blocks = draws.div_ceil(DRAW_BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = DRAW_BLOCK.min(draws - b * DRAW_BLOCK) as usize;
            let mut idx = [0usize; MAX_ORDER];
            let mut buf = [0.0; MAX_ORDER];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let mut filled = 0;
                while filled < k {
                    let cand = rng.random_range(0..n);
                    if !idx[..filled].contains(&cand) {
                        idx[filled] = cand;
                        filled += 1;
                    }
                }
                for (b, &i) in buf.iter_mut().zip(&idx[..k]) {
                    *b = sample[i];
                }
                out.push(psi_unchecked(&buf[..k]));
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

/// Sorts kernel values ascending; a NaN kernel value is an input error.
pub fn sort_values(mut values: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(MomentError::NonFinite(format!("kernel value {v}")));
    }
    values.par_sort_unstable_by(f64::total_cmp);
    Ok(values)
}

/// The ascending pseudo-sample for `plan`.
pub fn build_pseudosample(sample: &[f64], k: KernelOrder, plan: &PseudoPlan) -> Result<Vec<f64>> {
    plan.validate()?;
    let values = match plan.mode {
        PlanMode::Exact => enumerate_exact(sample, k, plan)?,
        PlanMode::MonteCarlo { draws, seed } => draw_monte_carlo(sample, k, draws, seed)?,
    };
    sort_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::eval_psi;
    use proptest::prelude::*;

    fn ko(k: usize) -> KernelOrder {
        KernelOrder::new(k).unwrap()
    }

    /// Lexicographic subsets by plain recursion, independent of the ranking code.
    fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_combinations(3, 2).unwrap(), 3);
        assert_eq!(count_combinations(30, 4).unwrap(), 27405);
        assert_eq!(count_combinations(5, 0).unwrap(), 1);
        assert!(matches!(
            count_combinations(100, 50),
            Err(MomentError::Overflow { .. })
        ));
        assert!(count_combinations(2, 3).is_err());
    }

    #[test]
    fn unrank_examples() {
        let u = |rank, n, k| unrank(CombinationRank { rank, n, k }).unwrap();
        assert_eq!(u(0, 4, 2), vec![0, 1]);
        assert_eq!(u(5, 4, 2), vec![2, 3]);
        assert_eq!(u(9, 5, 3), vec![2, 3, 4]);
        assert!(unrank(CombinationRank {
            rank: 10,
            n: 5,
            k: 3
        })
        .is_err());
    }

    #[test]
    fn unrank_matches_recursive_enumeration() {
        for n in 1..=9u64 {
            for k in 0..=n {
                let subsets = all_subsets(n as usize, k as usize);
                assert_eq!(subsets.len() as u64, count_combinations(n, k).unwrap());
                for (r, s) in subsets.iter().enumerate() {
                    assert_eq!(
                        &unrank(CombinationRank {
                            rank: r as u64,
                            n,
                            k
                        })
                        .unwrap(),
                        s
                    );
                    assert_eq!(rank(n, s).unwrap(), r as u64);
                }
            }
        }
    }

    #[test]
    fn successor_walks_in_rank_order() {
        let mut idx = vec![0, 1, 2];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 6) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, all_subsets(6, 3));
    }

    #[test]
    fn pseudosample_examples() {
        let p = build_pseudosample(&[0.0, 1.0, 2.0], ko(2), &PseudoPlan::exact()).unwrap();
        assert_eq!(p, vec![0.5, 0.5, 2.0]);
        let p = build_pseudosample(&[0.0, 1.0, 3.0], ko(3), &PseudoPlan::exact()).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0] - 10.0 / 3.0).abs() < 1e-14);
        let p = build_pseudosample(&[2.5; 4], ko(4), &PseudoPlan::exact()).unwrap();
        assert_eq!(p, vec![0.0]);
    }

    #[test]
    fn errors() {
        assert!(build_pseudosample(&[1.0], ko(2), &PseudoPlan::exact()).is_err());
        let big: Vec<f64> = (0..200).map(f64::from).collect();
        assert!(matches!(
            build_pseudosample(&big, ko(4), &PseudoPlan::exact()),
            Err(MomentError::Capacity { .. })
        ));
        assert!(matches!(
            build_pseudosample(&[1.0, 2.0], ko(2), &PseudoPlan::monte_carlo(0, 1)),
            Err(MomentError::Configuration(_))
        ));
        assert!(matches!(
            build_pseudosample(&[1.0, f64::INFINITY], ko(2), &PseudoPlan::exact()),
            Err(MomentError::NonFinite(_))
        ));
        assert!(sort_values(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn chunked_enumeration_equals_direct() {
        let sample: Vec<f64> = (0..15)
            .map(|i| ((i * 37) % 11) as f64 * 0.7 - 2.0)
            .collect();
        for k in 2..=5 {
            let mut direct: Vec<f64> = all_subsets(15, k)
                .iter()
                .map(|s| {
                    eval_psi(ko(k), &s.iter().map(|&i| sample[i]).collect::<Vec<_>>()).unwrap()
                })
                .collect();
            for chunk in [1, 7, 64, 1 << 16] {
                let plan = PseudoPlan::exact().with_chunk(chunk);
                let got = enumerate_exact(&sample, ko(k), &plan).unwrap();
                assert_eq!(got, direct, "k={k}, chunk={chunk}");
            }
            direct.sort_by(f64::total_cmp);
            assert_eq!(
                build_pseudosample(&sample, ko(k), &PseudoPlan::exact()).unwrap(),
                direct
            );
        }
    }

    #[test]
    fn monte_carlo_is_seeded_and_pool_independent() {
        let sample: Vec<f64> = (0..25).map(|i| (i as f64).sqrt()).collect();
        let plan = PseudoPlan::monte_carlo(3 * DRAW_BLOCK + 17, 42);
        let a = build_pseudosample(&sample, ko(3), &plan).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = single.install(|| build_pseudosample(&sample, ko(3), &plan).unwrap());
        assert_eq!(a.len() as u64, 3 * DRAW_BLOCK + 17);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = build_pseudosample(
            &sample,
            ko(3),
            &PseudoPlan::monte_carlo(3 * DRAW_BLOCK + 17, 43),
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn monte_carlo_draws_are_uniform_over_subsets() {
        // With n = k + 1 each draw omits exactly one index; the value of psi
        // identifies the omitted index, so counts must be near draws / n.
        let sample = [0.0, 1.0, 3.0, 7.0];
        let draws = 40_000u64;
        let vals = draw_monte_carlo(&sample, ko(3), draws, 9).unwrap();
        let mut exact = enumerate_exact(&sample, ko(3), &PseudoPlan::exact()).unwrap();
        exact.sort_by(f64::total_cmp);
        exact.dedup();
        assert_eq!(exact.len(), 4);
        for target in exact {
            let c = vals.iter().filter(|v| (**v - target).abs() < 1e-12).count() as f64;
            let expected = draws as f64 / 4.0;
            // 5 standard deviations of a binomial(40000, 1/4) count.
            assert!((c - expected).abs() < 5.0 * (draws as f64 * 0.25 * 0.75).sqrt());
        }
    }

    #[test]
    fn draws_use_distinct_indices() {
        // With n == k every draw must be the full sample: a single kernel value.
        let sample = [1.0, 4.0, 9.0];
        let vals = draw_monte_carlo(&sample, ko(3), 100, 3).unwrap();
        let exact = eval_psi(ko(3), &sample).unwrap();
        assert!(vals.iter().all(|v| (v - exact).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn rank_round_trip(n in 1u64..40, k_frac in 0.0f64..1.0, r_frac in 0.0f64..1.0) {
            let k = ((n as f64) * k_frac) as u64;
            let total = count_combinations(n, k).unwrap();
            let r = ((total as f64) * r_frac) as u64 % total;
            let s = unrank(CombinationRank { rank: r, n, k }).unwrap();
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.iter().all(|&x| (x as u64) < n));
            prop_assert_eq!(rank(n, &s).unwrap(), r);
        }

        #[test]
        fn output_is_sorted(sample in prop::collection::vec(-10.0f64..10.0, 4..12), k in 2usize..5) {
            let p = build_pseudosample(&sample, ko(k), &PseudoPlan::exact()).unwrap();
            prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
