//! Canonical data model: instances, matchings and optimal-matching
//! annotations.
//!
//! Vertex ids are dense integers `0..n-1` per side. Instances are immutable
//! after construction and safe to share across parallel workers.

use std::collections::BTreeMap;

pub type OfflineId = usize;
pub type OnlineId = usize;

/// An offline vertex with its weight `b_u` and capacity `c_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineVertex {
    pub weight: f64,
    pub capacity: u32,
}

impl OfflineVertex {
    pub fn unit(weight: f64) -> Self {
        OfflineVertex { weight, capacity: 1 }
    }
}

/// A bipartite instance `G(U, V, E, {b_u})` with a fixed arrival order of
/// the online side.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeightedInstance {
    offline: Vec<OfflineVertex>,
    n_online: usize,
    /// Raw edge list as given, `(offline, online)`. May contain dangling
    /// endpoints before validation.
    edges: Vec<(OfflineId, OnlineId)>,
    /// Arrival order of online vertices.
    arrival: Vec<OnlineId>,
    adj_offline: Vec<Vec<OnlineId>>,
    adj_online: Vec<Vec<OfflineId>>,
}

/// A violation found by [`VertexWeightedInstance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeWeight { offline: OfflineId, weight: f64 },
    ZeroCapacity { offline: OfflineId },
    DanglingEdge { offline: OfflineId, online: OnlineId },
    DuplicateEdge { offline: OfflineId, online: OnlineId },
    ArrivalNotPermutation { detail: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NegativeWeight { offline, weight } => {
                write!(f, "offline vertex {offline} has negative weight {weight}")
            }
            Violation::ZeroCapacity { offline } => {
                write!(f, "offline vertex {offline} has capacity 0")
            }
            Violation::DanglingEdge { offline, online } => {
                write!(f, "edge ({offline}, {online}) references a missing vertex")
            }
            Violation::DuplicateEdge { offline, online } => {
                write!(f, "edge ({offline}, {online}) appears more than once")
            }
            Violation::ArrivalNotPermutation { detail } => {
                write!(f, "arrival order is not a permutation of online ids: {detail}")
            }
        }
    }
}

impl VertexWeightedInstance {
    /// Build an instance from raw parts. Construction is total; call
    /// [`validate`](Self::validate) to find invariant violations.
    pub fn new(
        offline: Vec<OfflineVertex>,
        n_online: usize,
        mut edges: Vec<(OfflineId, OnlineId)>,
        arrival: Vec<OnlineId>,
    ) -> Self {
        edges.sort_unstable();
        let mut adj_offline = vec![Vec::new(); offline.len()];
        let mut adj_online = vec![Vec::new(); n_online];
        for &(u, v) in &edges {
            if u < offline.len() && v < n_online && adj_offline[u].last() != Some(&v) {
                adj_offline[u].push(v);
            }
        }
        for (u, vs) in adj_offline.iter().enumerate() {
            for &v in vs {
                adj_online[v].push(u);
            }
        }
        for vs in &mut adj_online {
            vs.sort_unstable();
        }
        VertexWeightedInstance {
            offline,
            n_online,
            edges,
            arrival,
            adj_offline,
            adj_online,
        }
    }

    /// Convenience constructor with arrival order `0..n_online`.
    pub fn with_natural_arrival(
        offline: Vec<OfflineVertex>,
        n_online: usize,
        edges: Vec<(OfflineId, OnlineId)>,
    ) -> Self {
        let arrival = (0..n_online).collect();
        Self::new(offline, n_online, edges, arrival)
    }

    pub fn n_offline(&self) -> usize {
        self.offline.len()
    }

    pub fn n_online(&self) -> usize {
        self.n_online
    }

    pub fn weight(&self, u: OfflineId) -> f64 {
        self.offline[u].weight
    }

    pub fn capacity(&self, u: OfflineId) -> u32 {
        self.offline[u].capacity
    }

    pub fn offline_vertices(&self) -> &[OfflineVertex] {
        &self.offline
    }

    pub fn edges(&self) -> &[(OfflineId, OnlineId)] {
        &self.edges
    }

    pub fn arrival(&self) -> &[OnlineId] {
        &self.arrival
    }

    /// Neighbors of an offline vertex, ascending.
    pub fn neighbors_of_offline(&self, u: OfflineId) -> &[OnlineId] {
        &self.adj_offline[u]
    }

    /// Neighbors of an online vertex, ascending.
    pub fn neighbors_of_online(&self, v: OnlineId) -> &[OfflineId] {
        &self.adj_online[v]
    }

    pub fn has_edge(&self, u: OfflineId, v: OnlineId) -> bool {
        u < self.offline.len() && self.adj_offline[u].binary_search(&v).is_ok()
    }

    pub fn has_unit_capacities(&self) -> bool {
        self.offline.iter().all(|o| o.capacity == 1)
    }

    /// Total function: returns every invariant violation, empty iff valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (u, o) in self.offline.iter().enumerate() {
            // NaN weights are reported too
            if o.weight < 0.0 || o.weight.is_nan() {
                out.push(Violation::NegativeWeight { offline: u, weight: o.weight });
            }
            if o.capacity == 0 {
                out.push(Violation::ZeroCapacity { offline: u });
            }
        }
        for w in self.edges.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateEdge { offline: w[0].0, online: w[0].1 });
            }
        }
        for &(u, v) in &self.edges {
            if u >= self.offline.len() || v >= self.n_online {
                out.push(Violation::DanglingEdge { offline: u, online: v });
            }
        }
        if self.arrival.len() != self.n_online {
            out.push(Violation::ArrivalNotPermutation {
                detail: format!("length {} != {}", self.arrival.len(), self.n_online),
            });
        } else {
            let mut seen = vec![false; self.n_online];
            for &v in &self.arrival {
                if v >= self.n_online || seen[v] {
                    out.push(Violation::ArrivalNotPermutation {
                        detail: format!("bad or repeated id {v}"),
                    });
                    break;
                }
                seen[v] = true;
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Replace every offline vertex `u` by `c_u` unit-capacity copies
    /// `(u,1)..(u,c_u)`, each with weight `b_u` and the same neighborhood.
    /// Copies are ordered so that lower copy index gets the smaller id.
    pub fn expand_capacities(&self) -> CapacityExpansion {
        let mut offline = Vec::new();
        let mut copy_to_original = Vec::new();
        let mut edges = Vec::new();
        for (u, o) in self.offline.iter().enumerate() {
            for _ in 0..o.capacity.max(1) {
                let id = offline.len();
                offline.push(OfflineVertex::unit(o.weight));
                copy_to_original.push(u);
                for &v in &self.adj_offline[u] {
                    edges.push((id, v));
                }
            }
        }
        let instance =
            VertexWeightedInstance::new(offline, self.n_online, edges, self.arrival.clone());
        CapacityExpansion { instance, copy_to_original }
    }
}

/// A unit-capacity instance produced by capacity expansion, with the
/// copy-to-original map needed to lift matchings back.
#[derive(Debug, Clone)]
pub struct CapacityExpansion {
    pub instance: VertexWeightedInstance,
    pub copy_to_original: Vec<OfflineId>,
}

impl CapacityExpansion {
    /// Lift a matching on the expanded instance back to the original.
    pub fn lift_back(&self, matching: &Matching) -> Matching {
        let pairs = matching
            .pairs()
            .iter()
            .map(|&(copy, v)| (self.copy_to_original[copy], v))
            .collect();
        Matching::new(pairs)
    }
}

/// A set of matched `(offline, online)` pairs. Gain is always recomputed
/// from the instance weights.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Matching {
    pairs: Vec<(OfflineId, OnlineId)>,
}

impl Matching {
    pub fn new(mut pairs: Vec<(OfflineId, OnlineId)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Matching { pairs }
    }

    pub fn empty() -> Self {
        Matching { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(OfflineId, OnlineId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn partner_of_offline(&self, u: OfflineId) -> Option<OnlineId> {
        self.pairs.iter().find(|&&(a, _)| a == u).map(|&(_, v)| v)
    }

    pub fn partner_of_online(&self, v: OnlineId) -> Option<OfflineId> {
        self.pairs.iter().find(|&&(_, b)| b == v).map(|&(a, _)| a)
    }

    /// Sum of `b_u` over matched pairs; an offline vertex with capacity
    /// `c_u` counts at most `c_u` times.
    pub fn gain(&self, instance: &VertexWeightedInstance) -> f64 {
        let mut used: BTreeMap<OfflineId, u32> = BTreeMap::new();
        let mut total = 0.0;
        for &(u, _) in &self.pairs {
            let n = used.entry(u).or_insert(0);
            if *n < instance.capacity(u) {
                *n += 1;
                total += instance.weight(u);
            }
        }
        total
    }

    /// Feasibility on an instance: every pair is an edge, each online vertex
    /// appears at most once, each offline vertex at most `c_u` times.
    pub fn is_feasible(&self, instance: &VertexWeightedInstance) -> bool {
        let mut online_used = vec![false; instance.n_online()];
        let mut offline_used = vec![0u32; instance.n_offline()];
        for &(u, v) in &self.pairs {
            if u >= instance.n_offline() || v >= instance.n_online() {
                return false;
            }
            if !instance.has_edge(u, v) || online_used[v] {
                return false;
            }
            online_used[v] = true;
            offline_used[u] += 1;
            if offline_used[u] > instance.capacity(u) {
                return false;
            }
        }
        true
    }
}

/// A fixed optimal offline matching `M*(G)` and the partner map `u -> u*`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalAnnotation {
    pub matching: Matching,
    /// `partner[u]` is the optimal partner `u*` of `u`, if `u` is matched
    /// by `M*(G)`.
    pub partner: Vec<Option<OnlineId>>,
}

impl OptimalAnnotation {
    pub fn from_matching(matching: Matching, n_offline: usize) -> Self {
        let mut partner = vec![None; n_offline];
        for &(u, v) in matching.pairs() {
            partner[u] = Some(v);
        }
        OptimalAnnotation { matching, partner }
    }

    /// Offline vertices matched by `M*(G)` (the set `U-bar`).
    pub fn optimally_matched(&self) -> impl Iterator<Item = OfflineId> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(u, p)| p.map(|_| u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> VertexWeightedInstance {
        // v0 ~ {u0, u1}, v1 ~ {u0}
        VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0), OfflineVertex::unit(1.0)],
            2,
            vec![(0, 0), (1, 0), (0, 1)],
        )
    }

    #[test]
    fn well_formed_instance_validates() {
        assert!(two_by_two().validate().is_empty());
    }

    #[test]
    fn dangling_edge_reported() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0)],
            1,
            vec![(0, 0), (5, 0)],
        );
        let v = inst.validate();
        assert_eq!(v, vec![Violation::DanglingEdge { offline: 5, online: 0 }]);
    }

    #[test]
    fn negative_weight_reported() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(-1.0)],
            1,
            vec![(0, 0)],
        );
        assert_eq!(
            inst.validate(),
            vec![Violation::NegativeWeight { offline: 0, weight: -1.0 }]
        );
    }

    #[test]
    fn bad_arrival_reported() {
        let inst = VertexWeightedInstance::new(
            vec![OfflineVertex::unit(1.0)],
            2,
            vec![(0, 0)],
            vec![0, 0],
        );
        assert!(matches!(
            inst.validate()[0],
            Violation::ArrivalNotPermutation { .. }
        ));
    }

    #[test]
    fn expand_unit_capacity_is_identity_up_to_relabeling() {
        let inst = two_by_two();
        let exp = inst.expand_capacities();
        assert_eq!(exp.instance, inst);
        assert_eq!(exp.copy_to_original, vec![0, 1]);
    }

    #[test]
    fn expand_capacity_three_makes_three_copies() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex { weight: 5.0, capacity: 3 }],
            1,
            vec![(0, 0)],
        );
        let exp = inst.expand_capacities();
        assert_eq!(exp.instance.n_offline(), 3);
        for u in 0..3 {
            assert_eq!(exp.instance.weight(u), 5.0);
            assert_eq!(exp.instance.neighbors_of_offline(u), &[0]);
        }
        assert!(exp.instance.validate().is_empty());
    }

    #[test]
    fn lift_back_respects_capacity_and_gain() {
        // u0 has capacity 2, weight 3; u1 capacity 1, weight 1; three
        // online vertices all adjacent to both. Brute-force all matchings of
        // the expanded instance and check feasibility and gain of the lift.
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![
                OfflineVertex { weight: 3.0, capacity: 2 },
                OfflineVertex { weight: 1.0, capacity: 1 },
            ],
            3,
            vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)],
        );
        let exp = inst.expand_capacities();
        let e = &exp.instance;
        // enumerate all matchings of the expanded (3 offline x 3 online) graph
        let mut stack = vec![(0usize, Vec::new(), vec![false; e.n_offline()])];
        while let Some((v, pairs, used)) = stack.pop() {
            if v == e.n_online() {
                let m = Matching::new(pairs.clone());
                assert!(m.is_feasible(e));
                let lifted = exp.lift_back(&m);
                assert!(lifted.is_feasible(&inst));
                assert_eq!(lifted.gain(&inst), m.gain(e));
                // no original vertex used beyond its capacity
                let mut count = vec![0u32; inst.n_offline()];
                for &(u, _) in lifted.pairs() {
                    count[u] += 1;
                }
                for (u, &c) in count.iter().enumerate() {
                    assert!(c <= inst.capacity(u));
                }
                continue;
            }
            stack.push((v + 1, pairs.clone(), used.clone()));
            for &u in e.neighbors_of_online(v) {
                if !used[u] {
                    let mut p = pairs.clone();
                    let mut us = used.clone();
                    p.push((u, v));
                    us[u] = true;
                    stack.push((v + 1, p, us));
                }
            }
        }
    }

    #[test]
    fn gain_invariant_under_pair_reordering() {
        let inst = two_by_two();
        let a = Matching::new(vec![(0, 1), (1, 0)]);
        let b = Matching::new(vec![(1, 0), (0, 1)]);
        assert_eq!(a, b);
        assert_eq!(a.gain(&inst), b.gain(&inst));
    }
}
