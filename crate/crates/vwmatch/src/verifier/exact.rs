//! Exact-arithmetic discrete Perturbed-Greedy used by the verifier.
//!
//! Identities over the probability space must hold with zero error, so the
//! runner never compares floats: all perturbed scores `b_u * psi(i)` are
//! computed once as exact rationals (every finite f64 is an exact rational)
//! and collapsed to dense integer ranks. Ties are exact score equalities.

use num::rational::BigRational;
use num::{BigInt, One, Zero};

use crate::instance::{OfflineId, OnlineId, VertexWeightedInstance};

/// Exact rational for a finite f64.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("weight must be finite")
}

/// Discrete `psi(i) = 1 - ((k-1)/k)^(k-i+1)`, exactly.
pub fn psi_exact(k: u32, i: u32) -> BigRational {
    debug_assert!((1..=k).contains(&i));
    let base = BigRational::new(BigInt::from(k - 1), BigInt::from(k));
    let mut p = BigRational::one();
    for _ in 0..(k - i + 1) {
        p *= &base;
    }
    BigRational::one() - p
}

/// Outcome of one run: matches in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub match_online: Vec<Option<OfflineId>>,
    pub match_offline: Vec<Option<OnlineId>>,
}

impl RunOutcome {
    pub fn is_matched(&self, u: OfflineId) -> bool {
        self.match_offline[u].is_some()
    }
}

/// Discrete Perturbed-Greedy evaluated through an exact rank table.
pub struct DiscreteRunner<'a> {
    inst: &'a VertexWeightedInstance,
    pub k: u32,
    /// `rank[u * k + i - 1]`: dense rank of the exact score `b_u psi(i)`,
    /// larger is better; equal ranks are exact ties.
    rank: Vec<u32>,
    /// exact scores, same indexing as `rank`
    scores: Vec<BigRational>,
    pub mutant: bool,
}

impl<'a> DiscreteRunner<'a> {
    pub fn new(inst: &'a VertexWeightedInstance, k: u32, mutant: bool) -> Self {
        assert!(k >= 1);
        let n = inst.n_offline();
        let mut scores = Vec::with_capacity(n * k as usize);
        let psi: Vec<BigRational> = (1..=k).map(|i| psi_exact(k, i)).collect();
        for u in 0..n {
            let w = rational_from_f64(inst.weight(u));
            for p in &psi {
                scores.push(&w * p);
            }
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].cmp(&scores[b]));
        let mut rank = vec![0u32; scores.len()];
        let mut current = 0u32;
        for (pos, &idx) in order.iter().enumerate() {
            if pos > 0 && scores[idx] != scores[order[pos - 1]] {
                current += 1;
            }
            rank[idx] = current;
        }
        DiscreteRunner { inst, k, rank, scores, mutant }
    }

    pub fn instance(&self) -> &'a VertexWeightedInstance {
        self.inst
    }

    pub fn score(&self, u: OfflineId, position: u32) -> &BigRational {
        &self.scores[u * self.k as usize + position as usize - 1]
    }

    fn rank_of(&self, u: OfflineId, position: u32) -> u32 {
        self.rank[u * self.k as usize + position as usize - 1]
    }

    /// Run the algorithm for one position assignment `sigma` (1-based
    /// positions, indexed by offline id).
    pub fn run(&self, sigma: &[u32]) -> RunOutcome {
        debug_assert_eq!(sigma.len(), self.inst.n_offline());
        let mut match_online = vec![None; self.inst.n_online()];
        let mut match_offline = vec![None; self.inst.n_offline()];
        let midpoint = self.inst.arrival().len() / 2;
        for (arrival_idx, &v) in self.inst.arrival().iter().enumerate() {
            // the mutant flips the comparator from the middle arrival
            // onward, preferring the lowest perturbed score; the greedy
            // property the analysis relies on is destroyed mid-run
            let reversed = self.mutant && arrival_idx >= midpoint;
            let mut best: Option<(u32, OfflineId)> = None;
            for &u in self.inst.neighbors_of_online(v) {
                if match_offline[u].is_some() {
                    continue;
                }
                let r = self.rank_of(u, sigma[u]);
                let wins = match best {
                    None => true,
                    Some((br, bu)) => {
                        if reversed {
                            r < br || (r == br && u > bu)
                        } else {
                            r > br || (r == br && u < bu)
                        }
                    }
                };
                if wins {
                    best = Some((r, u));
                }
            }
            if let Some((_, u)) = best {
                match_offline[u] = Some(v);
                match_online[v] = Some(u);
            }
        }
        RunOutcome { match_online, match_offline }
    }
}

/// Decode an assignment code into `sigma` with positions in `1..=k`.
pub fn sigma_from_code(mut code: u64, k: u32, n: usize) -> Vec<u32> {
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        sigma.push((code % k as u64) as u32 + 1);
        code /= k as u64;
    }
    sigma
}

pub fn code_from_sigma(sigma: &[u32], k: u32) -> u64 {
    let mut code = 0u64;
    for &p in sigma.iter().rev() {
        code = code * k as u64 + (p - 1) as u64;
    }
    code
}

/// `sigma_u^i`: move only `u` to position `i`.
pub fn reposition(sigma: &[u32], u: OfflineId, i: u32) -> Vec<u32> {
    let mut s = sigma.to_vec();
    s[u] = i;
    s
}

/// `k^n` with overflow guard.
pub fn state_count(k: u32, n: usize) -> Option<u64> {
    let mut total: u64 = 1;
    for _ in 0..n {
        total = total.checked_mul(k as u64)?;
    }
    Some(total)
}

/// Zero rational, handy for fold seeds.
pub fn zero() -> BigRational {
    BigRational::zero()
}
