//! Exact offline oracles for `OPT(G)` and the canonical optimal matching
//! `M*(G)`.
//!
//! The exact solver exploits that edge `(u, v)` carries weight `b_u`: the
//! offline vertex sets that are simultaneously matchable form a transversal
//! matroid over `U`, so scanning `U` by descending weight and keeping every
//! vertex that still admits an augmenting path maximizes the total weight.
//! Among optimal matchings the solver returns the lexicographically least
//! pair set. A brute-force enumerator validates the solver on tiny
//! instances.

use thiserror::Error;

use crate::instance::{Matching, OfflineId, OnlineId, OptimalAnnotation, VertexWeightedInstance};

/// Comparison slack for float weight sums; integer and small rational
/// weights stay exact in f64.
const VALUE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ExactSolver,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub optimum_value: f64,
    pub annotation: OptimalAnnotation,
    pub method: OracleMethod,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {0} vertices, brute-force guard is {1}")]
    SizeGuard(usize, usize),
}

pub const BRUTE_FORCE_GUARD: usize = 20;

fn values_eq(a: f64, b: f64) -> bool {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= VALUE_EPS * scale
}

/// Incremental Kuhn matching used for matroid independence tests.
struct Matcher<'a> {
    inst: &'a VertexWeightedInstance,
    /// online -> offline
    match_online: Vec<Option<OfflineId>>,
    /// offline -> online
    match_offline: Vec<Option<OnlineId>>,
    online_alive: Vec<bool>,
    offline_alive: Vec<bool>,
}

impl<'a> Matcher<'a> {
    fn new(inst: &'a VertexWeightedInstance) -> Self {
        Matcher {
            inst,
            match_online: vec![None; inst.n_online()],
            match_offline: vec![None; inst.n_offline()],
            online_alive: vec![true; inst.n_online()],
            offline_alive: vec![true; inst.n_offline()],
        }
    }

    fn try_augment(&mut self, u: OfflineId) -> bool {
        let mut visited = vec![false; self.inst.n_online()];
        self.dfs(u, &mut visited)
    }

    fn dfs(&mut self, u: OfflineId, visited: &mut [bool]) -> bool {
        for &v in self.inst.neighbors_of_offline(u) {
            if !self.online_alive[v] || visited[v] {
                continue;
            }
            visited[v] = true;
            match self.match_online[v] {
                None => {
                    self.match_online[v] = Some(u);
                    self.match_offline[u] = Some(v);
                    return true;
                }
                Some(w) => {
                    if self.offline_alive[w] && self.dfs(w, visited) {
                        self.match_online[v] = Some(u);
                        self.match_offline[u] = Some(v);
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Maximum total weight achievable on the sub-instance restricted to the
/// given alive vertex sets.
fn max_value_restricted(
    inst: &VertexWeightedInstance,
    offline_alive: &[bool],
    online_alive: &[bool],
) -> f64 {
    let mut order: Vec<OfflineId> = (0..inst.n_offline()).filter(|&u| offline_alive[u]).collect();
    order.sort_by(|&a, &b| {
        inst.weight(b)
            .partial_cmp(&inst.weight(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut m = Matcher::new(inst);
    m.online_alive.copy_from_slice(online_alive);
    m.offline_alive.copy_from_slice(offline_alive);
    let mut total = 0.0;
    for u in order {
        if m.try_augment(u) {
            total += inst.weight(u);
        }
    }
    total
}

/// Maximum-weight value of the instance (arrival order is irrelevant).
pub fn optimal_value(inst: &VertexWeightedInstance) -> f64 {
    let expanded;
    let inst = if inst.has_unit_capacities() {
        inst
    } else {
        expanded = inst.expand_capacities();
        &expanded.instance
    };
    max_value_restricted(
        inst,
        &vec![true; inst.n_offline()],
        &vec![true; inst.n_online()],
    )
}

/// Exact solver: optimum value plus the canonical (lexicographically least)
/// optimal matching. Instances with capacities are expanded internally; the
/// annotation then refers to the expanded instance.
pub fn solve_optimal(inst: &VertexWeightedInstance) -> OracleResult {
    let expanded;
    let inst = if inst.has_unit_capacities() {
        inst
    } else {
        expanded = inst.expand_capacities();
        &expanded.instance
    };
    let n_off = inst.n_offline();
    let n_on = inst.n_online();
    let all_off = vec![true; n_off];
    let all_on = vec![true; n_on];
    let opt = max_value_restricted(inst, &all_off, &all_on);

    // Fix pairs greedily in lexicographic order: (u, v) is kept iff some
    // optimal matching extends the pairs fixed so far together with it.
    let mut offline_alive = all_off;
    let mut online_alive = all_on;
    let mut fixed_gain = 0.0;
    let mut pairs = Vec::new();
    for u in 0..n_off {
        if values_eq(fixed_gain, opt) {
            // a lex-least sequence ends as soon as the prefix is optimal
            break;
        }
        offline_alive[u] = false;
        let mut chosen = None;
        for &v in inst.neighbors_of_offline(u) {
            if !online_alive[v] {
                continue;
            }
            online_alive[v] = false;
            let rest = max_value_restricted(inst, &offline_alive, &online_alive);
            if values_eq(fixed_gain + inst.weight(u) + rest, opt) {
                chosen = Some(v);
                break;
            }
            online_alive[v] = true;
        }
        if let Some(v) = chosen {
            fixed_gain += inst.weight(u);
            pairs.push((u, v));
        }
    }
    let matching = Matching::new(pairs);
    debug_assert!(values_eq(matching.gain(inst), opt));
    OracleResult {
        optimum_value: opt,
        annotation: OptimalAnnotation::from_matching(matching, n_off),
        method: OracleMethod::ExactSolver,
    }
}

/// Enumerate every matching of a tiny instance and return the maximum gain
/// with the lexicographically least maximizer.
pub fn brute_force_optimal(inst: &VertexWeightedInstance) -> Result<OracleResult, OracleError> {
    let expanded;
    let inst = if inst.has_unit_capacities() {
        inst
    } else {
        expanded = inst.expand_capacities();
        &expanded.instance
    };
    let total = inst.n_offline() + inst.n_online();
    if total > BRUTE_FORCE_GUARD {
        return Err(OracleError::SizeGuard(total, BRUTE_FORCE_GUARD));
    }
    let mut best_value = 0.0;
    let mut best: Matching = Matching::empty();
    let mut used = vec![false; inst.n_offline()];
    let mut pairs = Vec::new();
    enumerate(inst, 0, &mut used, &mut pairs, &mut best_value, &mut best);
    Ok(OracleResult {
        optimum_value: best_value,
        annotation: OptimalAnnotation::from_matching(best, inst.n_offline()),
        method: OracleMethod::BruteForce,
    })
}

fn enumerate(
    inst: &VertexWeightedInstance,
    v: OnlineId,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(OfflineId, OnlineId)>,
    best_value: &mut f64,
    best: &mut Matching,
) {
    if v == inst.n_online() {
        let m = Matching::new(pairs.clone());
        let value = m.gain(inst);
        if values_eq(value, *best_value) {
            // Matching's derived Ord is lexicographic on the sorted pair list
            if m < *best {
                *best = m;
            }
        } else if value > *best_value {
            *best_value = value;
            *best = m;
        }
        return;
    }
    enumerate(inst, v + 1, used, pairs, best_value, best);
    for &u in inst.neighbors_of_online(v) {
        if !used[u] {
            used[u] = true;
            pairs.push((u, v));
            enumerate(inst, v + 1, used, pairs, best_value, best);
            pairs.pop();
            used[u] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::OfflineVertex;

    fn two_by_two_unit() -> VertexWeightedInstance {
        VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0), OfflineVertex::unit(1.0)],
            2,
            vec![(0, 0), (1, 0), (0, 1)],
        )
    }

    #[test]
    fn perfect_matching_value() {
        let r = solve_optimal(&two_by_two_unit());
        assert_eq!(r.optimum_value, 2.0);
        assert_eq!(r.annotation.matching.pairs(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn greedy_gadget_optimum() {
        // u0: 1.01, u1: 1.0; v0 ~ {u0, u1}, v1 ~ {u0}
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.01), OfflineVertex::unit(1.0)],
            2,
            vec![(0, 0), (1, 0), (0, 1)],
        );
        let r = brute_force_optimal(&inst).unwrap();
        assert!((r.optimum_value - 2.01).abs() < 1e-12);
        assert_eq!(solve_optimal(&inst).optimum_value, r.optimum_value);
    }

    #[test]
    fn isolated_heavy_vertex_excluded() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(100.0), OfflineVertex::unit(1.0)],
            1,
            vec![(1, 0)],
        );
        let r = solve_optimal(&inst);
        assert_eq!(r.optimum_value, 1.0);
        assert_eq!(r.annotation.partner[0], None);
    }

    #[test]
    fn empty_graph_and_single_edge() {
        let empty = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(3.0)],
            1,
            vec![],
        );
        assert_eq!(brute_force_optimal(&empty).unwrap().optimum_value, 0.0);
        let single = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(7.0)],
            1,
            vec![(0, 0)],
        );
        assert_eq!(brute_force_optimal(&single).unwrap().optimum_value, 7.0);
        assert_eq!(solve_optimal(&single).optimum_value, 7.0);
    }

    #[test]
    fn guard_is_enforced() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0); 15],
            15,
            vec![],
        );
        assert!(matches!(
            brute_force_optimal(&inst),
            Err(OracleError::SizeGuard(30, BRUTE_FORCE_GUARD))
        ));
    }

    #[test]
    fn canonical_matching_is_lex_least() {
        // complete 2x2 with equal weights: both perfect matchings optimal,
        // lex-least pair set is {(0,0),(1,1)}
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0), OfflineVertex::unit(1.0)],
            2,
            vec![(0, 0), (0, 1), (1, 0), (1, 1)],
        );
        let r = solve_optimal(&inst);
        assert_eq!(r.annotation.matching.pairs(), &[(0, 0), (1, 1)]);
        let b = brute_force_optimal(&inst).unwrap();
        assert_eq!(b.annotation.matching, r.annotation.matching);
    }
}
