//! The single-bids reduction from online budgeted allocation to
//! vertex-weighted matching, with both solution mappings.
//!
//! Agent `i` with budget `B_i` and bid `b_i` becomes `n_i` offline vertices
//! of weight `b_i` (where `n_i` is the largest integer with
//! `n_i * b_i <= B_i`) plus one residual vertex of weight
//! `r_i = B_i - n_i * b_i` when `r_i > 0`. Items become the online side in
//! arrival order.

use thiserror::Error;

use crate::instance::{Matching, OfflineId, OfflineVertex, VertexWeightedInstance};
use crate::online::AllocationOutcome;

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub budget: f64,
    pub bid: f64,
}

/// Agents with budgets and single bid values, plus an item stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetedAllocationInstance {
    agents: Vec<Agent>,
    /// item ids in arrival order; ids are dense 0..m-1
    items: Vec<usize>,
    /// per agent, the item ids it bids on (sorted)
    interest: Vec<Vec<usize>>,
}

impl BudgetedAllocationInstance {
    pub fn new(agents: Vec<Agent>, items: Vec<usize>, mut interest: Vec<Vec<usize>>) -> Self {
        for set in &mut interest {
            set.sort_unstable();
            set.dedup();
        }
        BudgetedAllocationInstance { agents, items, interest }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn interest_of(&self, agent: usize) -> &[usize] {
        &self.interest[agent]
    }

    pub fn is_interested(&self, agent: usize, item: usize) -> bool {
        self.interest[agent].binary_search(&item).is_ok()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, a) in self.agents.iter().enumerate() {
            // NaN budgets and bids are reported too
            if a.budget <= 0.0 || a.budget.is_nan() {
                out.push(format!("agent {i} has non-positive budget {}", a.budget));
            }
            if a.bid <= 0.0 || a.bid.is_nan() {
                out.push(format!("agent {i} has non-positive bid {}", a.bid));
            }
        }
        let m = self.items.len();
        let mut seen = vec![false; m];
        for &j in &self.items {
            if j >= m || seen[j] {
                out.push(format!("item ids must be a dense permutation, got {j}"));
                break;
            }
            seen[j] = true;
        }
        for (i, set) in self.interest.iter().enumerate() {
            for &j in set {
                if j >= m {
                    out.push(format!("agent {i} interested in missing item {j}"));
                }
            }
        }
        out
    }
}

/// Where an offline vertex of the reduction image came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    FullCopy,
    Residual,
}

/// The vertex-weighted image of a single-bid allocation instance.
#[derive(Debug, Clone)]
pub struct ReductionImage {
    pub instance: VertexWeightedInstance,
    /// offline vertex -> (agent, kind)
    pub origin: Vec<(usize, VertexKind)>,
    /// per agent: (n_i, r_i)
    pub counts: Vec<(u64, f64)>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("item {item} allocated to uninterested agent {agent}")]
    Uninterested { agent: usize, item: usize },
    #[error("item {item} allocated more than once")]
    DuplicateItem { item: usize },
}

/// Largest `n` with `n * bid <= budget`, robust to float division noise.
fn full_copies(budget: f64, bid: f64) -> u64 {
    let mut n = (budget / bid).floor() as i64;
    while (n + 1) as f64 * bid <= budget {
        n += 1;
    }
    while n > 0 && n as f64 * bid > budget {
        n -= 1;
    }
    n.max(0) as u64
}

/// Single-bid expansion: `n_i` full copies plus a residual vertex.
pub fn reduce_single_bid(alloc: &BudgetedAllocationInstance) -> ReductionImage {
    let mut offline = Vec::new();
    let mut origin = Vec::new();
    let mut counts = Vec::new();
    let mut edges = Vec::new();
    for (i, a) in alloc.agents().iter().enumerate() {
        let n_i = full_copies(a.budget, a.bid);
        let r_i = a.budget - n_i as f64 * a.bid;
        counts.push((n_i, r_i));
        for _ in 0..n_i {
            let id = offline.len();
            offline.push(OfflineVertex::unit(a.bid));
            origin.push((i, VertexKind::FullCopy));
            for &item in alloc.interest_of(i) {
                edges.push((id, item));
            }
        }
        if r_i > 0.0 {
            let id = offline.len();
            offline.push(OfflineVertex::unit(r_i));
            origin.push((i, VertexKind::Residual));
            for &item in alloc.interest_of(i) {
                edges.push((id, item));
            }
        }
    }
    let instance = VertexWeightedInstance::new(
        offline,
        alloc.n_items(),
        edges,
        alloc.items().to_vec(),
    );
    ReductionImage { instance, origin, counts }
}

impl ReductionImage {
    pub fn n_agents(&self) -> usize {
        self.counts.len()
    }
}

/// Read an allocation off a matching on the image.
/// Revenue is computed on the allocation side and always dominates the
/// matching gain.
pub fn lift_matching_to_allocation(
    image: &ReductionImage,
    alloc: &BudgetedAllocationInstance,
    matching: &Matching,
) -> AllocationOutcome {
    let mut items_per_agent: Vec<Vec<usize>> = vec![Vec::new(); alloc.agents().len()];
    for &(u, v) in matching.pairs() {
        let (agent, _) = image.origin[u];
        items_per_agent[agent].push(v);
    }
    for set in &mut items_per_agent {
        set.sort_unstable();
    }
    let revenue = alloc
        .agents()
        .iter()
        .zip(&items_per_agent)
        .map(|(a, items)| a.budget.min(items.len() as f64 * a.bid))
        .sum();
    AllocationOutcome { items_per_agent, revenue }
}

/// Turn a feasible allocation into a matching on the
/// image with gain equal to the allocation revenue. Full copies are used
/// first; the residual vertex only when the agent pays its full budget.
pub fn lift_allocation_to_matching(
    image: &ReductionImage,
    alloc: &BudgetedAllocationInstance,
    items_per_agent: &[Vec<usize>],
) -> Result<Matching, ReductionError> {
    let mut item_seen = vec![false; alloc.n_items()];
    let mut pairs = Vec::new();
    for (i, items) in items_per_agent.iter().enumerate() {
        for &item in items {
            if !alloc.is_interested(i, item) {
                return Err(ReductionError::Uninterested { agent: i, item });
            }
            if item_seen[item] {
                return Err(ReductionError::DuplicateItem { item });
            }
            item_seen[item] = true;
        }
        let (n_i, r_i) = image.counts[i];
        // the agent's offline vertices, full copies first then residual
        let mut vertices: Vec<OfflineId> = image
            .origin
            .iter()
            .enumerate()
            .filter(|&(_, &(a, kind))| a == i && kind == VertexKind::FullCopy)
            .map(|(id, _)| id)
            .collect();
        if r_i > 0.0 {
            vertices.extend(
                image
                    .origin
                    .iter()
                    .enumerate()
                    .filter(|&(_, &(a, kind))| a == i && kind == VertexKind::Residual)
                    .map(|(id, _)| id),
            );
        }
        // match at most n_i + 1 items; beyond that the agent pays B_i anyway
        let take = items.len().min(n_i as usize + if r_i > 0.0 { 1 } else { 0 });
        for (slot, &item) in items.iter().take(take).enumerate() {
            pairs.push((vertices[slot], item));
        }
    }
    Ok(Matching::new(pairs))
}

/// Definitional oracle: enumerate every item-to-agent assignment of a tiny
/// allocation instance and return the maximum revenue.
pub const ALLOCATION_BRUTE_FORCE_GUARD: usize = 6;

#[derive(Debug, Error)]
pub enum AllocationOracleError {
    #[error("instance has {0} items, brute-force guard is {1}")]
    SizeGuard(usize, usize),
}

pub fn brute_force_optimal_allocation(
    alloc: &BudgetedAllocationInstance,
) -> Result<(f64, Vec<Vec<usize>>), AllocationOracleError> {
    let m = alloc.n_items();
    if m > ALLOCATION_BRUTE_FORCE_GUARD {
        return Err(AllocationOracleError::SizeGuard(m, ALLOCATION_BRUTE_FORCE_GUARD));
    }
    let n = alloc.agents().len();
    let mut best = (0.0, vec![Vec::new(); n]);
    let base = n as u64 + 1; // digit n means unallocated
    let states = base.pow(m as u32);
    for code in 0..states {
        let mut c = code;
        let mut assignment = Vec::with_capacity(m);
        for _ in 0..m {
            assignment.push((c % base) as usize);
            c /= base;
        }
        if !(0..m).all(|j| assignment[j] == n || alloc.is_interested(assignment[j], j)) {
            continue;
        }
        let mut counts = vec![0u64; n];
        for j in 0..m {
            if assignment[j] < n {
                counts[assignment[j]] += 1;
            }
        }
        let revenue: f64 = (0..n)
            .map(|i| {
                let a = &alloc.agents()[i];
                a.budget.min(counts[i] as f64 * a.bid)
            })
            .sum();
        if revenue > best.0 {
            let mut sets = vec![Vec::new(); n];
            for j in 0..m {
                if assignment[j] < n {
                    sets[assignment[j]].push(j);
                }
            }
            best = (revenue, sets);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(budget: f64, bid: f64) -> Agent {
        Agent { budget, bid }
    }

    #[test]
    fn copies_and_residual() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(10.0, 3.0)],
            vec![0],
            vec![vec![0]],
        );
        let image = reduce_single_bid(&alloc);
        assert_eq!(image.counts, vec![(3, 1.0)]);
        let weights: Vec<f64> = image
            .instance
            .offline_vertices()
            .iter()
            .map(|o| o.weight)
            .collect();
        assert_eq!(weights, vec![3.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn exact_division_has_no_residual() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(6.0, 3.0)],
            vec![0],
            vec![vec![0]],
        );
        let image = reduce_single_bid(&alloc);
        assert_eq!(image.counts, vec![(2, 0.0)]);
        assert_eq!(image.instance.n_offline(), 2);
    }

    #[test]
    fn bid_above_budget_gives_single_residual_vertex() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(2.0, 3.0)],
            vec![0],
            vec![vec![0]],
        );
        let image = reduce_single_bid(&alloc);
        assert_eq!(image.counts, vec![(0, 2.0)]);
        assert_eq!(image.instance.n_offline(), 1);
        assert_eq!(image.instance.weight(0), 2.0);
    }

    #[test]
    fn lift_matching_revenue_dominates_gain() {
        // agent (B=10, b=3): all four copies matched -> gain 10, revenue
        // min(10, 12) = 10
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(10.0, 3.0)],
            (0..4).collect(),
            vec![(0..4).collect()],
        );
        let image = reduce_single_bid(&alloc);
        let matching = Matching::new(vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        let out = lift_matching_to_allocation(&image, &alloc, &matching);
        assert_eq!(out.revenue, 10.0);
        assert_eq!(matching.gain(&image.instance), 10.0);
        // only two full copies matched -> revenue 6 equals gain 6
        let partial = Matching::new(vec![(0, 0), (1, 1)]);
        let out = lift_matching_to_allocation(&image, &alloc, &partial);
        assert_eq!(out.revenue, 6.0);
    }

    #[test]
    fn lift_allocation_matches_value() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(10.0, 3.0)],
            (0..4).collect(),
            vec![(0..4).collect()],
        );
        let image = reduce_single_bid(&alloc);
        // |S_i| = 4 >= n_i + 1: agent pays B_i = 10
        let m = lift_allocation_to_matching(&image, &alloc, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(m.gain(&image.instance), 10.0);
        // |S_i| = 2 <= n_i: pays 6
        let m = lift_allocation_to_matching(&image, &alloc, &[vec![1, 3]]).unwrap();
        assert_eq!(m.gain(&image.instance), 6.0);
        // empty allocation -> empty matching
        let m = lift_allocation_to_matching(&image, &alloc, &[vec![]]).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn lift_allocation_rejects_uninterested() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(5.0, 1.0)],
            vec![0, 1],
            vec![vec![0]],
        );
        let image = reduce_single_bid(&alloc);
        assert_eq!(
            lift_allocation_to_matching(&image, &alloc, &[vec![1]]),
            Err(ReductionError::Uninterested { agent: 0, item: 1 })
        );
    }

    #[test]
    fn brute_force_allocation_small() {
        let alloc = BudgetedAllocationInstance::new(
            vec![agent(2.0, 2.0), agent(3.0, 2.0)],
            (0..3).collect(),
            vec![vec![0, 1], vec![1, 2]],
        );
        let (rev, sets) = brute_force_optimal_allocation(&alloc).unwrap();
        // agent 0 takes one of {0,1} (pays 2), agent 1 takes two of {1,2}
        // (pays min(3,4)=3) -> 5
        assert_eq!(rev, 5.0);
        let m = lift_allocation_to_matching(&reduce_single_bid(&alloc), &alloc, &sets).unwrap();
        assert_eq!(m.gain(&reduce_single_bid(&alloc).instance), 5.0);
    }
}
