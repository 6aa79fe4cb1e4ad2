//! Exhaustive verification of the unweighted random-permutation analysis.
//!
//! For small instances with a perfect matching, enumerate all `n!`
//! priority orders, run Ranking under each, and check the classic
//! machinery: the top-priority vertex is always matched, the per-rank
//! matching probabilities satisfy `1 - x_t <= (1/n) sum_{s <= t} x_s`, and
//! the fixed-rank charging sets are pairwise disjoint.

use std::collections::{HashMap, HashSet};

use crate::instance::{OfflineId, VertexWeightedInstance};
use crate::online::run_ranking;
use crate::oracle;

use super::CheckReport;

/// Guard on `n!` enumeration.
pub const WARMUP_GUARD_N: usize = 8;

/// Per-rank matching probabilities of unweighted Ranking, from exhaustive
/// enumeration of all priority orders.
#[derive(Debug, Clone)]
pub struct WarmupTables {
    pub n: usize,
    /// `x[t-1]`: probability that the vertex at rank `t` is matched
    pub x: Vec<f64>,
    /// raw matched counts per rank; the denominator is `n!`
    pub matched: Vec<u64>,
    pub total: u64,
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[OfflineId])) {
    let mut perm: Vec<OfflineId> = (0..n).collect();
    // Heap's algorithm, iterative form
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Enumerate all priority orders and tabulate per-rank matching counts.
pub fn warmup_tables(inst: &VertexWeightedInstance) -> WarmupTables {
    let n = inst.n_offline();
    assert!(n <= WARMUP_GUARD_N, "n! enumeration guard");
    let mut matched = vec![0u64; n];
    let mut total = 0u64;
    for_each_permutation(n, |perm| {
        total += 1;
        let out = run_ranking(inst, perm).expect("valid permutation");
        for (rank, &u) in perm.iter().enumerate() {
            if out.matching.partner_of_offline(u).is_some() {
                matched[rank] += 1;
            }
        }
    });
    let x = matched.iter().map(|&m| m as f64 / total as f64).collect();
    WarmupTables { n, x, matched, total }
}

/// Move `u` to 0-based rank `i`, keeping the relative order of the rest.
fn move_to_rank(perm: &[OfflineId], u: OfflineId, i: usize) -> Vec<OfflineId> {
    let mut out: Vec<OfflineId> = perm.iter().copied().filter(|&w| w != u).collect();
    out.insert(i, u);
    out
}

/// Run every warmup check on one instance. Requires unit weights, unit
/// capacities and a perfect matching.
pub fn check_warmup(inst: &VertexWeightedInstance) -> CheckReport {
    let mut report = CheckReport::new("warmup-unweighted");
    let n = inst.n_offline();
    assert!(inst.has_unit_capacities());
    assert!(inst.offline_vertices().iter().all(|o| o.weight == 1.0));
    let annotation = oracle::solve_optimal(inst).annotation;
    assert_eq!(annotation.matching.len(), n, "perfect matching required");

    let tables = warmup_tables(inst);

    // the top-priority vertex is matched by its first arriving neighbor
    report.cases += 1;
    if (tables.x[0] - 1.0).abs() > 0.0 {
        report.fail(format!("x_1 = {} != 1", tables.x[0]));
    }

    // the recurrence bound 1 - x_t <= (1/n) sum_{s <= t} x_s; counts are
    // integers over n!, so compare in integers to avoid rounding
    for t in 1..=n {
        report.cases += 1;
        let lhs = n as u64 * (tables.total - tables.matched[t - 1]);
        let rhs: u64 = tables.matched[..t].iter().sum();
        if lhs > rhs {
            report.fail(format!("rank {t}: 1 - x_t > prefix mean ({lhs} > {rhs})"));
        }
    }

    // fixed-rank charging sets are pairwise disjoint: for an order where the
    // rank-t vertex u is unmatched, moving u to rank i leaves the optimal
    // partner v* matched; the charged occurrences (order, matched vertex)
    // never collide across sources at the same t
    for t in 1..=n {
        let mut seen: HashMap<(Vec<OfflineId>, OfflineId), Vec<OfflineId>> = HashMap::new();
        let mut failures: Vec<String> = Vec::new();
        let mut cases = 0u64;
        for_each_permutation(n, |perm| {
            let u = perm[t - 1];
            let out = run_ranking(inst, perm).expect("valid permutation");
            if out.matching.partner_of_offline(u).is_some() {
                return;
            }
            let v_star = annotation.partner[u].expect("perfect matching");
            let mut targets: HashSet<(Vec<OfflineId>, OfflineId)> = HashSet::new();
            for i in 0..n {
                cases += 1;
                let moved = move_to_rank(perm, u, i);
                let moved_out = run_ranking(inst, &moved).expect("valid permutation");
                match moved_out.matching.partner_of_online(v_star) {
                    None => failures.push(format!(
                        "perm={perm:?} t={t}: optimal partner unmatched after move to {i}"
                    )),
                    Some(w) => {
                        // the replacement sits at rank <= t
                        let rank = moved.iter().position(|&x| x == w).unwrap() + 1;
                        if rank > t {
                            failures.push(format!(
                                "perm={perm:?} t={t}: charged vertex at rank {rank} > t"
                            ));
                        }
                        targets.insert((moved, w));
                    }
                }
            }
            for target in targets {
                if let Some(prev) = seen.insert(target, perm.to_vec()) {
                    failures.push(format!(
                        "t={t}: charging sets of {prev:?} and {perm:?} collide"
                    ));
                }
            }
        });
        report.cases += cases;
        for f in failures {
            report.fail(f);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_upper_triangular;
    use crate::instance::OfflineVertex;

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut seen = HashSet::new();
        for_each_permutation(4, |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn single_edge_always_matches() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0)],
            1,
            vec![(0, 0)],
        );
        let t = warmup_tables(&inst);
        assert_eq!(t.x, vec![1.0]);
        assert!(check_warmup(&inst).passed);
    }

    #[test]
    fn upper_triangular_families_pass() {
        for n in 2..=5 {
            let inst = gen_upper_triangular(n);
            let report = check_warmup(&inst);
            assert!(report.passed, "n = {n}: {:?}", report.violations);
        }
    }

    #[test]
    fn complete_graph_matches_everything() {
        // complete bipartite: Ranking produces a perfect matching always
        let n = 4;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                edges.push((u, v));
            }
        }
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0); n],
            n,
            edges,
        );
        let t = warmup_tables(&inst);
        assert!(t.x.iter().all(|&x| x == 1.0));
    }
}
