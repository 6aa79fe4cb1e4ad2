//! Seeded, deterministic generators for the adversarial and demonstration
//! instance families used in the experiments.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::{OfflineVertex, VertexWeightedInstance};
use crate::io::EdgeWeightedStar;
use crate::reduction::{Agent, BudgetedAllocationInstance};

/// The upper-triangular hardness family: online `v_j` is adjacent to
/// offline `u_j..u_{n-1}`, unit weights. The unique perfect matching is the
/// diagonal and the family is adversarial for Ranking.
pub fn gen_upper_triangular(n: usize) -> VertexWeightedInstance {
    let mut edges = Vec::new();
    for j in 0..n {
        for u in j..n {
            edges.push((u, j));
        }
    }
    VertexWeightedInstance::with_natural_arrival(vec![OfflineVertex::unit(1.0); n], n, edges)
}

/// Disjoint copies of the 4-vertex gadget on which Greedy earns
/// `(1+eps)` out of `(2+eps)`: `u1` has weight `1+eps`, `u2` weight 1,
/// `v1 ~ {u1, u2}` arrives first, `v2 ~ {u1}` second. With `swap` the
/// weights are exchanged, which is the Ranking-adversarial variant.
pub fn gen_greedy_gadget(eps: f64, copies: usize, swap: bool) -> VertexWeightedInstance {
    let (w1, w2) = if swap { (1.0, 1.0 + eps) } else { (1.0 + eps, 1.0) };
    let mut offline = Vec::new();
    let mut edges = Vec::new();
    for c in 0..copies {
        let u1 = 2 * c;
        let u2 = 2 * c + 1;
        let v1 = 2 * c;
        let v2 = 2 * c + 1;
        offline.push(OfflineVertex::unit(w1));
        offline.push(OfflineVertex::unit(w2));
        edges.push((u1, v1));
        edges.push((u2, v1));
        edges.push((u1, v2));
    }
    VertexWeightedInstance::with_natural_arrival(offline, 2 * copies, edges)
}

/// Two instances over the identical weight multiset `{1, 1, h, h}` that
/// want opposite strategies: `G1` has equal weights within each component
/// (Ranking-favorable), `G2` skewed weights within each component
/// (Greedy-favorable). Each component is a hard 2x2 graph.
pub fn gen_skew_pair() -> (VertexWeightedInstance, VertexWeightedInstance) {
    let h = 100.0;
    // G1: component A weights (1, 1), component B weights (h, h);
    // in each component v1 ~ {a, b}, v2 ~ {a}.
    let g1 = VertexWeightedInstance::with_natural_arrival(
        vec![
            OfflineVertex::unit(1.0),
            OfflineVertex::unit(1.0),
            OfflineVertex::unit(h),
            OfflineVertex::unit(h),
        ],
        4,
        vec![(0, 0), (1, 0), (0, 1), (2, 2), (3, 2), (2, 3)],
    );
    // G2: both components weighted (h, 1); v1 ~ {hi, lo}, v2 ~ {lo}, so
    // Greedy takes hi then lo (optimal) while Ranking misses lo half the
    // time.
    let g2 = VertexWeightedInstance::with_natural_arrival(
        vec![
            OfflineVertex::unit(h),
            OfflineVertex::unit(1.0),
            OfflineVertex::unit(h),
            OfflineVertex::unit(1.0),
        ],
        4,
        vec![(0, 0), (1, 0), (1, 1), (2, 2), (3, 2), (3, 3)],
    );
    (g1, g2)
}

/// The 2x2 canonical hard instance with weight ratio `alpha >= 1`:
/// `b_{u0} = alpha`, `b_{u1} = 1`, `v0 ~ {u0, u1}`, `v1 ~ {u0}`.
pub fn gen_canonical_2x2(alpha: f64) -> VertexWeightedInstance {
    VertexWeightedInstance::with_natural_arrival(
        vec![OfflineVertex::unit(alpha), OfflineVertex::unit(1.0)],
        2,
        vec![(0, 0), (1, 0), (0, 1)],
    )
}

/// The edge-weighted star distribution of the hardness demonstration:
/// vector `i` (1-based) is `(D^i, D^{i+1}, ..., D^n, 0, ...)`, each chosen
/// with probability `1/n`. `OPT = D^n` for every vector.
pub fn gen_edge_weight_hard(n: usize, d: f64) -> EdgeWeightedStar {
    let mut vectors = Vec::with_capacity(n);
    for i in 1..=n {
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let exp = i + j;
            v.push(if exp <= n { d.powi(exp as i32) } else { 0.0 });
        }
        vectors.push(v);
    }
    EdgeWeightedStar {
        n,
        d,
        vectors,
        probabilities: vec![1.0 / n as f64; n],
    }
}

/// Expected value of the fixed stopping rule that matches the `k`-th
/// arrival (1-based), under the star distribution.
pub fn star_rule_expected_value(star: &EdgeWeightedStar, k: usize) -> f64 {
    star.vectors
        .iter()
        .zip(&star.probabilities)
        .map(|(v, p)| p * v.get(k - 1).copied().unwrap_or(0.0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDist {
    Uniform,
    LogNormal,
    TwoPointSkew,
}

#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub n_offline: usize,
    pub n_online: usize,
    pub edge_prob: f64,
    pub weight_dist: WeightDist,
    pub seed: u64,
}

/// Seeded random bipartite family for corpus tests.
pub fn gen_random(spec: &RandomSpec) -> VertexWeightedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut offline = Vec::with_capacity(spec.n_offline);
    for _ in 0..spec.n_offline {
        let w = match spec.weight_dist {
            WeightDist::Uniform => rng.gen_range(0.1..10.0),
            WeightDist::LogNormal => {
                let z: f64 = rng.gen_range(-2.0..2.0);
                z.exp()
            }
            WeightDist::TwoPointSkew => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    100.0
                }
            }
        };
        offline.push(OfflineVertex::unit(w));
    }
    let mut edges = Vec::new();
    for u in 0..spec.n_offline {
        for v in 0..spec.n_online {
            if rng.gen_bool(spec.edge_prob) {
                edges.push((u, v));
            }
        }
    }
    VertexWeightedInstance::with_natural_arrival(offline, spec.n_online, edges)
}

#[derive(Debug, Clone)]
pub struct RandomAllocationSpec {
    pub n_agents: usize,
    pub n_items: usize,
    pub interest_prob: f64,
    pub max_budget: u64,
    pub max_bid: u64,
    pub seed: u64,
}

/// Seeded random single-bid allocation family with integer budgets and
/// bids, so revenue comparisons stay exact in f64.
pub fn gen_random_allocation(spec: &RandomAllocationSpec) -> BudgetedAllocationInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut agents = Vec::with_capacity(spec.n_agents);
    for _ in 0..spec.n_agents {
        let bid = rng.gen_range(1..=spec.max_bid) as f64;
        let budget = rng.gen_range(1..=spec.max_budget) as f64;
        agents.push(Agent { budget, bid });
    }
    let mut interest = Vec::with_capacity(spec.n_agents);
    for _ in 0..spec.n_agents {
        let set: Vec<usize> =
            (0..spec.n_items).filter(|_| rng.gen_bool(spec.interest_prob)).collect();
        interest.push(set);
    }
    BudgetedAllocationInstance::new(agents, (0..spec.n_items).collect(), interest)
}
