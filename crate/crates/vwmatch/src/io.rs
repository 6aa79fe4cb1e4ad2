//! Versioned JSON file formats.
//!
//! Writers are byte-stable: object keys are emitted in sorted order and
//! floats use a fixed 17-significant-digit scientific format, so the same
//! data always serializes to identical bytes. Readers accept any JSON field
//! order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instance::{OfflineVertex, VertexWeightedInstance};
use crate::reduction::{Agent, BudgetedAllocationInstance};

pub const INSTANCE_FORMAT_VERSION: u32 = 1;
pub const ALLOCATION_FORMAT_VERSION: u32 = 1;
pub const STAR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("malformed document: {0}")]
    Malformed(String),
}

/// 17-significant-digit float formatting used by all byte-stable writers.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

fn fmt_usize_list(ids: &[usize]) -> String {
    let mut s = String::from("[");
    for (i, v) in ids.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s.push(']');
    s
}

/// Serialize an instance to the canonical byte-stable document.
pub fn instance_to_json(inst: &VertexWeightedInstance) -> String {
    let mut s = String::from("{");
    let _ = write!(s, "\"arrival\":{},", fmt_usize_list(inst.arrival()));
    s.push_str("\"edges\":[");
    for (i, &(u, v)) in inst.edges().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "[{u},{v}]");
    }
    s.push_str("],\"offline\":[");
    for (u, o) in inst.offline_vertices().iter().enumerate() {
        if u > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"capacity\":{},\"id\":{},\"weight\":{}}}",
            o.capacity,
            u,
            fmt_f64(o.weight)
        );
    }
    let online: Vec<usize> = (0..inst.n_online()).collect();
    let _ = write!(
        s,
        "],\"online\":{},\"version\":{}}}",
        fmt_usize_list(&online),
        INSTANCE_FORMAT_VERSION
    );
    s
}

#[derive(Deserialize)]
struct InstanceDoc {
    version: u32,
    offline: Vec<OfflineDoc>,
    online: Vec<usize>,
    edges: Vec<(usize, usize)>,
    arrival: Vec<usize>,
}

#[derive(Deserialize)]
struct OfflineDoc {
    id: usize,
    weight: f64,
    #[serde(default = "default_capacity")]
    capacity: u32,
}

fn default_capacity() -> u32 {
    1
}

pub fn instance_from_json(text: &str) -> Result<VertexWeightedInstance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.version != INSTANCE_FORMAT_VERSION {
        return Err(IoError::Version(doc.version));
    }
    let mut offline = vec![None; doc.offline.len()];
    for o in &doc.offline {
        if o.id >= offline.len() || offline[o.id].is_some() {
            return Err(IoError::Malformed(format!(
                "offline ids must be dense and unique, got {}",
                o.id
            )));
        }
        offline[o.id] = Some(OfflineVertex { weight: o.weight, capacity: o.capacity });
    }
    let offline: Vec<OfflineVertex> = offline.into_iter().map(|o| o.unwrap()).collect();
    let n_online = doc.online.len();
    let mut seen = vec![false; n_online];
    for &v in &doc.online {
        if v >= n_online || seen[v] {
            return Err(IoError::Malformed(format!(
                "online ids must be dense and unique, got {v}"
            )));
        }
        seen[v] = true;
    }
    Ok(VertexWeightedInstance::new(offline, n_online, doc.edges, doc.arrival))
}

pub fn write_instance(path: &Path, inst: &VertexWeightedInstance) -> Result<(), IoError> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<VertexWeightedInstance, IoError> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

/// SHA-256 of the canonical serialization, as lowercase hex.
pub fn instance_hash(inst: &VertexWeightedInstance) -> String {
    let digest = Sha256::digest(instance_to_json(inst).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialize a budgeted-allocation instance to the canonical document.
pub fn allocation_to_json(alloc: &BudgetedAllocationInstance) -> String {
    let mut s = String::from("{\"agents\":[");
    for (i, a) in alloc.agents().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"bid\":{},\"budget\":{},\"id\":{}}}",
            fmt_f64(a.bid),
            fmt_f64(a.budget),
            i
        );
    }
    s.push_str("],\"interest\":{");
    for i in 0..alloc.agents().len() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "\"{}\":{}", i, fmt_usize_list(alloc.interest_of(i)));
    }
    let _ = write!(
        s,
        "}},\"items\":{},\"version\":{}}}",
        fmt_usize_list(alloc.items()),
        ALLOCATION_FORMAT_VERSION
    );
    s
}

#[derive(Deserialize)]
struct AllocationDoc {
    version: u32,
    agents: Vec<AgentDoc>,
    items: Vec<usize>,
    interest: BTreeMap<String, Vec<usize>>,
}

#[derive(Deserialize)]
struct AgentDoc {
    id: usize,
    budget: f64,
    bid: f64,
}

pub fn allocation_from_json(text: &str) -> Result<BudgetedAllocationInstance, IoError> {
    let doc: AllocationDoc = serde_json::from_str(text)?;
    if doc.version != ALLOCATION_FORMAT_VERSION {
        return Err(IoError::Version(doc.version));
    }
    let mut agents = vec![None; doc.agents.len()];
    for a in &doc.agents {
        if a.id >= agents.len() || agents[a.id].is_some() {
            return Err(IoError::Malformed(format!(
                "agent ids must be dense and unique, got {}",
                a.id
            )));
        }
        agents[a.id] = Some(Agent { budget: a.budget, bid: a.bid });
    }
    let agents: Vec<Agent> = agents.into_iter().map(|a| a.unwrap()).collect();
    let mut interest = vec![Vec::new(); agents.len()];
    for (key, items) in &doc.interest {
        let id: usize = key
            .parse()
            .map_err(|_| IoError::Malformed(format!("bad interest key {key}")))?;
        if id >= agents.len() {
            return Err(IoError::Malformed(format!("interest references agent {id}")));
        }
        interest[id] = items.clone();
    }
    Ok(BudgetedAllocationInstance::new(agents, doc.items, interest))
}

pub fn write_allocation(path: &Path, alloc: &BudgetedAllocationInstance) -> Result<(), IoError> {
    std::fs::write(path, allocation_to_json(alloc))?;
    Ok(())
}

pub fn read_allocation(path: &Path) -> Result<BudgetedAllocationInstance, IoError> {
    allocation_from_json(&std::fs::read_to_string(path)?)
}

/// The edge-weighted star distribution of the hardness demonstration:
/// a single offline vertex and `n` equiprobable weight vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightedStar {
    pub n: usize,
    pub d: f64,
    pub vectors: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

pub fn star_to_json(star: &EdgeWeightedStar) -> String {
    let mut s = String::from("{");
    let _ = write!(s, "\"D\":{},\"n\":{},\"probabilities\":[", fmt_f64(star.d), star.n);
    for (i, p) in star.probabilities.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_f64(*p));
    }
    s.push_str("],\"vectors\":[");
    for (i, vec) in star.vectors.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for (j, w) in vec.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*w));
        }
        s.push(']');
    }
    let _ = write!(s, "],\"version\":{}}}", STAR_FORMAT_VERSION);
    s
}

#[derive(Deserialize)]
struct StarDoc {
    version: u32,
    #[serde(rename = "D")]
    d: f64,
    n: usize,
    vectors: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

pub fn star_from_json(text: &str) -> Result<EdgeWeightedStar, IoError> {
    let doc: StarDoc = serde_json::from_str(text)?;
    if doc.version != STAR_FORMAT_VERSION {
        return Err(IoError::Version(doc.version));
    }
    Ok(EdgeWeightedStar {
        n: doc.n,
        d: doc.d,
        vectors: doc.vectors,
        probabilities: doc.probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip_is_byte_stable() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![
                OfflineVertex { weight: 1.01, capacity: 2 },
                OfflineVertex::unit(1.0),
            ],
            2,
            vec![(0, 0), (1, 0), (0, 1)],
        );
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(instance_to_json(&back), text);
    }

    #[test]
    fn rejects_unknown_version() {
        let inst = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0)],
            1,
            vec![(0, 0)],
        );
        let text = instance_to_json(&inst).replace("\"version\":1", "\"version\":9");
        assert!(matches!(instance_from_json(&text), Err(IoError::Version(9))));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(1.0)],
            1,
            vec![(0, 0)],
        );
        let b = VertexWeightedInstance::with_natural_arrival(
            vec![OfflineVertex::unit(2.0)],
            1,
            vec![(0, 0)],
        );
        assert_eq!(instance_hash(&a), instance_hash(&a));
        assert_ne!(instance_hash(&a), instance_hash(&b));
    }
}
