//! Exhaustive enumeration of the discrete probability space `[k]^n` and the
//! event tables of the analysis: matched occurrences `Q_t`, unmatched
//! occurrences `R_t` (restricted to optimally matched vertices), marginal
//! losses `S_t`, expected gains `x_t` and marginal losses `alpha_t`.

use std::collections::HashSet;

use num::rational::BigRational;
use num::{BigInt, Zero};
use rayon::prelude::*;

use crate::instance::{OfflineId, OptimalAnnotation};

use super::exact::{rational_from_f64, reposition, sigma_from_code, DiscreteRunner};

/// An occurrence in the probability space: the assignment (encoded) and the
/// offline vertex. The position `t` is implicit in the table bucket.
pub type Occurrence = (u64, OfflineId);

#[derive(Debug, Clone)]
pub struct EventTables {
    pub k: u32,
    pub n: usize,
    /// matched occurrences per position (index `t-1`)
    pub q: Vec<Vec<Occurrence>>,
    /// unmatched occurrences of optimally matched vertices per position
    pub r: Vec<Vec<Occurrence>>,
    /// marginal loss occurrences per position
    pub s: Vec<Vec<Occurrence>>,
    /// expected gain per position
    pub x: Vec<BigRational>,
    /// expected marginal loss per position
    pub alpha: Vec<BigRational>,
    /// `B = OPT(G) / k`
    pub per_position_opt: BigRational,
    pub opt: BigRational,
    /// `|U| = |V|` and `M*(G)` is a perfect matching
    pub perfect: bool,
}

impl EventTables {
    pub fn q_set(&self, t: u32) -> HashSet<Occurrence> {
        self.q[t as usize - 1].iter().copied().collect()
    }

    pub fn s_set(&self, t: u32) -> HashSet<Occurrence> {
        self.s[t as usize - 1].iter().copied().collect()
    }
}

/// Enumerate all of `[k]^n`, running the discrete algorithm once per
/// assignment (plus one repositioned run per unmatched occurrence for the
/// marginal-loss test). Ranges of assignment codes are processed in
/// parallel and merged by exact addition.
pub fn enumerate_events(
    runner: &DiscreteRunner<'_>,
    annotation: &OptimalAnnotation,
    states: u64,
) -> EventTables {
    let inst = runner.instance();
    let k = runner.k;
    let n = inst.n_offline();
    let optimally_matched: Vec<bool> = {
        let mut v = vec![false; n];
        for u in annotation.optimally_matched() {
            v[u] = true;
        }
        v
    };

    #[derive(Default)]
    struct Partial {
        q: Vec<Vec<Occurrence>>,
        r: Vec<Vec<Occurrence>>,
        s: Vec<Vec<Occurrence>>,
        /// per (t, u) counts used for the exact expectation sums
        q_count: Vec<u64>,
        s_count: Vec<u64>,
    }

    let chunk = 1u64 << 14;
    let n_chunks = states.div_ceil(chunk);
    let merged: Partial = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut p = Partial {
                q: vec![Vec::new(); k as usize],
                r: vec![Vec::new(); k as usize],
                s: vec![Vec::new(); k as usize],
                q_count: vec![0; k as usize * n],
                s_count: vec![0; k as usize * n],
            };
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(states);
            for code in lo..hi {
                let sigma = sigma_from_code(code, k, n);
                let out = runner.run(&sigma);
                for u in 0..n {
                    let t = sigma[u];
                    let slot = (t as usize - 1) * n + u;
                    if out.is_matched(u) {
                        p.q[t as usize - 1].push((code, u));
                        p.q_count[slot] += 1;
                    } else if optimally_matched[u] {
                        p.r[t as usize - 1].push((code, u));
                        // marginal iff matched when moved one position lower
                        let marginal = t == 1 || {
                            let moved = reposition(&sigma, u, t - 1);
                            runner.run(&moved).is_matched(u)
                        };
                        if marginal {
                            p.s[t as usize - 1].push((code, u));
                            p.s_count[slot] += 1;
                        }
                    }
                }
            }
            p
        })
        .reduce(
            || Partial {
                q: vec![Vec::new(); k as usize],
                r: vec![Vec::new(); k as usize],
                s: vec![Vec::new(); k as usize],
                q_count: vec![0; k as usize * n],
                s_count: vec![0; k as usize * n],
            },
            |mut a, b| {
                for t in 0..k as usize {
                    a.q[t].extend(&b.q[t]);
                    a.r[t].extend(&b.r[t]);
                    a.s[t].extend(&b.s[t]);
                }
                for i in 0..a.q_count.len() {
                    a.q_count[i] += b.q_count[i];
                    a.s_count[i] += b.s_count[i];
                }
                a
            },
        );

    let weights: Vec<BigRational> =
        (0..n).map(|u| rational_from_f64(inst.weight(u))).collect();
    let states_rat = BigRational::from_integer(BigInt::from(states));
    let expectation = |counts: &[u64], t: usize| -> BigRational {
        let mut sum = BigRational::zero();
        for u in 0..n {
            let c = counts[t * n + u];
            if c > 0 {
                sum += &weights[u] * BigRational::from_integer(BigInt::from(c));
            }
        }
        sum / &states_rat
    };
    let x: Vec<BigRational> = (0..k as usize).map(|t| expectation(&merged.q_count, t)).collect();
    let alpha: Vec<BigRational> =
        (0..k as usize).map(|t| expectation(&merged.s_count, t)).collect();

    let opt: BigRational = annotation
        .optimally_matched()
        .map(|u| weights[u].clone())
        .fold(BigRational::zero(), |a, b| a + b);
    let per_position_opt = &opt / BigRational::from_integer(BigInt::from(k));
    let perfect = inst.n_offline() == inst.n_online()
        && annotation.matching.len() == inst.n_offline();

    let mut tables = EventTables {
        k,
        n,
        q: merged.q,
        r: merged.r,
        s: merged.s,
        x,
        alpha,
        per_position_opt,
        opt,
        perfect,
    };
    for t in 0..k as usize {
        tables.q[t].sort_unstable();
        tables.r[t].sort_unstable();
        tables.s[t].sort_unstable();
    }
    tables
}
