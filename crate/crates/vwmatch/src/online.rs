//! Online matching policies: Greedy, Ranking, Perturbed-Greedy (continuous
//! and discrete) and MSVV budget scaling.
//!
//! All runs are pure functions of their inputs; randomness enters only
//! through an explicit [`PositionAssignment`] or permutation, so trials can
//! be evaluated in parallel and replayed from seeds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Matching, OfflineId, OnlineId, VertexWeightedInstance};
use crate::reduction::BudgetedAllocationInstance;

/// One realization of the per-offline-vertex randomness: continuous
/// `x_u in [0,1]` or discrete positions `sigma(u) in {1..k}`.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionAssignment {
    Continuous(Vec<f64>),
    Discrete { k: u32, values: Vec<u32> },
}

impl PositionAssignment {
    pub fn len(&self) -> usize {
        match self {
            PositionAssignment::Continuous(v) => v.len(),
            PositionAssignment::Discrete { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mirror a continuous assignment: `x_u -> 1 - x_u`.
    pub fn mirrored(&self) -> Option<PositionAssignment> {
        match self {
            PositionAssignment::Continuous(v) => Some(PositionAssignment::Continuous(
                v.iter().map(|x| 1.0 - x).collect(),
            )),
            PositionAssignment::Discrete { .. } => None,
        }
    }
}

/// The perturbation function applied to weights.
///
/// The discrete variant uses `psi(i) = 1 - (1 - 1/k)^(k-i+1)`, which is
/// non-increasing in `i` with `psi(1) = 1 - (1-1/k)^k` and `psi(k) = 1/k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Psi {
    /// `psi(x) = 1 - e^{-(1-x)}`
    ContinuousDecreasing,
    /// `psi(x) = 1 - e^{-x}`
    ContinuousIncreasing,
    Discrete { k: u32 },
}

impl Psi {
    pub fn eval_continuous(self, x: f64) -> f64 {
        match self {
            Psi::ContinuousDecreasing => 1.0 - (-(1.0 - x)).exp(),
            Psi::ContinuousIncreasing => 1.0 - (-x).exp(),
            Psi::Discrete { .. } => panic!("discrete psi evaluated on a continuous draw"),
        }
    }

    /// `psi(i)` for `i in 1..=k`.
    pub fn eval_discrete(k: u32, i: u32) -> f64 {
        debug_assert!((1..=k).contains(&i));
        1.0 - (1.0 - 1.0 / k as f64).powi((k - i + 1) as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub online: OnlineId,
    pub matched: Option<OfflineId>,
    /// Selection score of the winner (`b_u` for Greedy, `b_u * psi` for
    /// Perturbed-Greedy); `None` for Ranking or when unmatched.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matching: Matching,
    pub trace: Vec<TraceEntry>,
}

impl MatchResult {
    pub fn gain(&self, inst: &VertexWeightedInstance) -> f64 {
        self.matching.gain(inst)
    }

    /// The per-arrival decisions, ignoring scores. Two runs are considered
    /// trace-equal when these agree.
    pub fn decisions(&self) -> Vec<(OnlineId, Option<OfflineId>)> {
        self.trace.iter().map(|t| (t.online, t.matched)).collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OnlineError {
    #[error("permutation is not a permutation of the offline ids")]
    BadPermutation,
    #[error("assignment does not cover every offline vertex ({got} of {want})")]
    AssignmentSize { got: usize, want: usize },
    #[error("assignment mode does not match the perturbation function")]
    ModeMismatch,
}

/// Generic arrival loop: match each arriving online vertex to the unmatched
/// neighbor that maximizes `key`, ties to the lowest vertex id. `key` may be
/// `None` to leave an arriving vertex unmatched only when it has no
/// unmatched neighbor at all (never happens here; all policies are maximal).
fn run_with_key<F: Fn(OfflineId) -> f64>(
    inst: &VertexWeightedInstance,
    key: F,
    record_score: bool,
) -> MatchResult {
    let mut matched_offline = vec![false; inst.n_offline()];
    let mut pairs = Vec::new();
    let mut trace = Vec::with_capacity(inst.n_online());
    for &v in inst.arrival() {
        let mut best: Option<(f64, OfflineId)> = None;
        for &u in inst.neighbors_of_online(v) {
            if matched_offline[u] {
                continue;
            }
            let s = key(u);
            match best {
                None => best = Some((s, u)),
                Some((bs, bu)) => {
                    if s > bs || (s == bs && u < bu) {
                        best = Some((s, u));
                    }
                }
            }
        }
        match best {
            Some((s, u)) => {
                matched_offline[u] = true;
                pairs.push((u, v));
                trace.push(TraceEntry {
                    online: v,
                    matched: Some(u),
                    score: record_score.then_some(s),
                });
            }
            None => trace.push(TraceEntry { online: v, matched: None, score: None }),
        }
    }
    MatchResult { matching: Matching::new(pairs), trace }
}

/// Greedy: match each arrival to the unmatched neighbor of maximum `b_u`.
pub fn run_greedy(inst: &VertexWeightedInstance) -> MatchResult {
    run_with_key(inst, |u| inst.weight(u), true)
}

/// Ranking: match each arrival to its unmatched neighbor appearing earliest
/// in the given permutation of offline ids.
pub fn run_ranking(
    inst: &VertexWeightedInstance,
    permutation: &[OfflineId],
) -> Result<MatchResult, OnlineError> {
    let n = inst.n_offline();
    if permutation.len() != n {
        return Err(OnlineError::BadPermutation);
    }
    let mut rank = vec![usize::MAX; n];
    for (pos, &u) in permutation.iter().enumerate() {
        if u >= n || rank[u] != usize::MAX {
            return Err(OnlineError::BadPermutation);
        }
        rank[u] = pos;
    }
    // earliest in permutation == maximal negated rank; ranks are distinct so
    // the id tie-break never fires
    Ok(run_with_key(inst, |u| -(rank[u] as f64), false))
}

/// Perturbed-Greedy: match each arrival to the unmatched neighbor with the
/// highest value of `b_u * psi(x_u)` (continuous) or `b_u * psi(sigma(u))`
/// (discrete).
pub fn run_perturbed_greedy(
    inst: &VertexWeightedInstance,
    assignment: &PositionAssignment,
    psi: Psi,
) -> Result<MatchResult, OnlineError> {
    if assignment.len() != inst.n_offline() {
        return Err(OnlineError::AssignmentSize {
            got: assignment.len(),
            want: inst.n_offline(),
        });
    }
    let scores: Vec<f64> = match (assignment, psi) {
        (PositionAssignment::Continuous(xs), Psi::ContinuousDecreasing)
        | (PositionAssignment::Continuous(xs), Psi::ContinuousIncreasing) => xs
            .iter()
            .enumerate()
            .map(|(u, &x)| inst.weight(u) * psi.eval_continuous(x))
            .collect(),
        (PositionAssignment::Discrete { k, values }, Psi::Discrete { k: pk }) if *k == pk => {
            values
                .iter()
                .enumerate()
                .map(|(u, &i)| inst.weight(u) * Psi::eval_discrete(*k, i))
                .collect()
        }
        _ => return Err(OnlineError::ModeMismatch),
    };
    Ok(run_with_key(inst, |u| scores[u], true))
}

/// Sampling mode for [`sample_assignment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentMode {
    Continuous,
    Discrete { k: u32 },
}

/// Independent uniform draws per offline vertex, deterministic given seed.
pub fn sample_assignment(
    inst: &VertexWeightedInstance,
    mode: AssignmentMode,
    seed: u64,
) -> PositionAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        AssignmentMode::Continuous => PositionAssignment::Continuous(
            (0..inst.n_offline()).map(|_| rng.gen::<f64>()).collect(),
        ),
        AssignmentMode::Discrete { k } => PositionAssignment::Discrete {
            k,
            values: (0..inst.n_offline()).map(|_| rng.gen_range(1..=k)).collect(),
        },
    }
}

/// Sample a uniformly random permutation of the offline ids.
pub fn sample_permutation(inst: &VertexWeightedInstance, seed: u64) -> Vec<OfflineId> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<OfflineId> = (0..inst.n_offline()).collect();
    perm.shuffle(&mut rng);
    perm
}

/// Outcome of an allocation run: per-agent item sets and total revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationOutcome {
    /// items allocated to each agent, in allocation order
    pub items_per_agent: Vec<Vec<usize>>,
    pub revenue: f64,
}

impl AllocationOutcome {
    pub fn spend(&self, alloc: &BudgetedAllocationInstance, agent: usize) -> f64 {
        let a = &alloc.agents()[agent];
        a.budget.min(self.items_per_agent[agent].len() as f64 * a.bid)
    }
}

/// MSVV budget scaling: allocate each arriving item to the interested,
/// non-exhausted agent maximizing `b_i * psi(T_i)` with
/// `psi(T) = 1 - e^{-(1-T)}` and `T_i` the spent budget fraction. Ties go
/// to the lowest agent id. Deterministic.
pub fn run_msvv(alloc: &BudgetedAllocationInstance) -> AllocationOutcome {
    let agents = alloc.agents();
    let mut counts = vec![0u64; agents.len()];
    let mut items_per_agent = vec![Vec::new(); agents.len()];
    for &item in alloc.items() {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..agents.len() {
            if !alloc.is_interested(i, item) {
                continue;
            }
            let spent = agents[i].budget.min(counts[i] as f64 * agents[i].bid);
            if spent >= agents[i].budget {
                continue; // exhausted
            }
            let t = spent / agents[i].budget;
            let s = agents[i].bid * (1.0 - (-(1.0 - t)).exp());
            match best {
                None => best = Some((s, i)),
                Some((bs, bi)) => {
                    if s > bs || (s == bs && i < bi) {
                        best = Some((s, i));
                    }
                }
            }
        }
        if let Some((_, i)) = best {
            counts[i] += 1;
            items_per_agent[i].push(item);
        }
    }
    let revenue = (0..agents.len())
        .map(|i| agents[i].budget.min(counts[i] as f64 * agents[i].bid))
        .sum();
    AllocationOutcome { items_per_agent, revenue }
}
