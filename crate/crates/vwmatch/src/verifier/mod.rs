//! Mechanical verification of the discrete competitive analysis on small
//! instances.
//!
//! The verifier enumerates the whole probability space `[k]^n`, builds the
//! event tables and checks, in exact rational arithmetic: the
//! matched/unmatched partition, the repositioning lemma and its
//! symmetric-difference path structure, the marginal-loss threshold
//! property, the expected-gain identities, disjointness of the charging
//! map restricted to marginal losses, and the final inequality chain.
//! Beyond the enumeration guard it degrades to a sampled, clearly labeled
//! statistical mode.

pub mod events;
pub mod exact;
pub mod twobytwo;
pub mod warmup;

use std::collections::{HashMap, HashSet};

use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{OfflineId, OptimalAnnotation, VertexWeightedInstance};
use crate::io::instance_hash;
use crate::oracle;

pub use events::{enumerate_events, EventTables, Occurrence};
pub use exact::{
    code_from_sigma, psi_exact, rational_from_f64, reposition, sigma_from_code, state_count,
    DiscreteRunner,
};
pub use twobytwo::{analyze_2x2, TwoByTwoAnalysis};

/// Default enumeration guard on `k^n`.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("instance is invalid: {0:?}")]
    InvalidInstance(Vec<String>),
    #[error("verifier requires unit capacities; expand first")]
    NonUnitCapacities,
    #[error("k^n = {states} exceeds the enumeration guard {guard}; use statistical mode")]
    GuardExceeded { states: u64, guard: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// number of individual assertions evaluated
    pub cases: u64,
    pub violations: Vec<String>,
    pub info: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            cases: 0,
            violations: Vec::new(),
            info: Vec::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        if self.violations.len() < 50 {
            self.violations.push(msg);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableDump {
    pub x: Vec<String>,
    pub alpha: Vec<String>,
    pub x_f64: Vec<f64>,
    pub alpha_f64: Vec<f64>,
    pub opt: String,
    pub per_position_opt: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifierMode {
    Exact,
    Statistical,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifierReport {
    pub instance_hash: String,
    pub k: u32,
    pub mode: VerifierMode,
    pub checks: Vec<CheckReport>,
    pub tables: Option<TableDump>,
}

impl VerifierReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub struct Verifier<'a> {
    inst: &'a VertexWeightedInstance,
    pub k: u32,
    runner: DiscreteRunner<'a>,
    pub annotation: OptimalAnnotation,
    guard: u64,
    states: u64,
}

impl<'a> Verifier<'a> {
    pub fn new(
        inst: &'a VertexWeightedInstance,
        k: u32,
        mutant: bool,
    ) -> Result<Self, VerifierError> {
        let violations = inst.validate();
        if !violations.is_empty() {
            return Err(VerifierError::InvalidInstance(
                violations.iter().map(|v| v.to_string()).collect(),
            ));
        }
        if !inst.has_unit_capacities() {
            return Err(VerifierError::NonUnitCapacities);
        }
        let annotation = oracle::solve_optimal(inst).annotation;
        let states = state_count(k, inst.n_offline()).unwrap_or(u64::MAX);
        Ok(Verifier {
            inst,
            k,
            runner: DiscreteRunner::new(inst, k, mutant),
            annotation,
            guard: ENUMERATION_GUARD,
            states,
        })
    }

    pub fn with_guard(mut self, guard: u64) -> Self {
        self.guard = guard;
        self
    }

    pub fn states(&self) -> u64 {
        self.states
    }

    pub fn within_guard(&self) -> bool {
        self.states <= self.guard
    }

    pub fn runner(&self) -> &DiscreteRunner<'a> {
        &self.runner
    }

    fn psi(&self, t: u32) -> BigRational {
        psi_exact(self.k, t)
    }

    pub fn enumerate_events(&self) -> Result<EventTables, VerifierError> {
        if !self.within_guard() {
            return Err(VerifierError::GuardExceeded { states: self.states, guard: self.guard });
        }
        Ok(enumerate_events(&self.runner, &self.annotation, self.states))
    }

    /// Charging-map targets `f(sigma, t, u)`: for each reposition `i`, the
    /// occurrence of the vertex to which `u*` is matched. `Err` carries the
    /// first `i` at which `u*` stays unmatched (a repositioning-lemma violation).
    fn charge_targets(&self, sigma: &[u32], u: OfflineId) -> Result<Vec<(u64, u32, OfflineId)>, u32> {
        let u_star = self.annotation.partner[u].expect("u must be optimally matched");
        let mut targets = Vec::with_capacity(self.k as usize);
        for i in 1..=self.k {
            let moved = reposition(sigma, u, i);
            let out = self.runner.run(&moved);
            match out.match_online[u_star] {
                None => return Err(i),
                Some(u_prime) => {
                    targets.push((code_from_sigma(&moved, self.k), moved[u_prime], u_prime))
                }
            }
        }
        Ok(targets)
    }

    /// `Q_t` and `R_t` partition the occurrences of optimally matched
    /// vertices at every position.
    pub fn check_partition(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("partition");
        let n = self.inst.n_offline();
        let opt_matched: HashSet<OfflineId> = self.annotation.optimally_matched().collect();
        let per_pair = self.states / self.k as u64; // k^(n-1)
        let expected = opt_matched.len() as u64 * per_pair;
        for t in 1..=self.k {
            let q = &tables.q[t as usize - 1];
            let r = &tables.r[t as usize - 1];
            report.cases += 1;
            let q_opt = q.iter().filter(|&&(_, u)| opt_matched.contains(&u)).count() as u64;
            if q_opt + r.len() as u64 != expected {
                report.fail(format!(
                    "position {t}: |Q restricted to U-bar| + |R| = {} != {}",
                    q_opt + r.len() as u64,
                    expected
                ));
            }
            let q_set: HashSet<Occurrence> = q.iter().copied().collect();
            if r.iter().any(|occ| q_set.contains(occ)) {
                report.fail(format!("position {t}: Q and R overlap"));
            }
            // every occurrence of any vertex appears in exactly one bucket
            let total_at_t = n as u64 * per_pair;
            if (q.len() + r.len()) as u64 > total_at_t {
                report.fail(format!("position {t}: more occurrences than the space holds"));
            }
        }
        report
    }

    /// Repositioning lemma: for every unmatched occurrence `(sigma, t, u)`
    /// and every `i`, the algorithm matches `u*` under `sigma_u^i` to some
    /// `u'` with `psi(t) b_u <= psi(sigma_u^i(u')) b_{u'}`.
    pub fn check_repositioning_lemma(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("repositioning-lemma");
        for t in 1..=self.k {
            for &(code, u) in &tables.r[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                report.cases += self.k as u64;
                match self.charge_targets(&sigma, u) {
                    Err(i) => report.fail(format!(
                        "sigma={sigma:?} t={t} u={u}: u* unmatched under reposition i={i}"
                    )),
                    Ok(targets) => {
                        let lhs = self.runner.score(u, t);
                        for &(_, s, u_prime) in &targets {
                            if lhs > self.runner.score(u_prime, s) {
                                report.fail(format!(
                                    "sigma={sigma:?} t={t} u={u}: psi(t) b_u > \
                                     psi({s}) b_{{{u_prime}}}"
                                ));
                            }
                        }
                    }
                }
            }
        }
        report
    }

    /// Symmetric-difference path structure for one repositioning with
    /// `i < t = sigma(u)` of an occurrence where `u` is unmatched.
    pub fn check_symmetric_difference_path(
        &self,
        sigma: &[u32],
        u: OfflineId,
        i: u32,
    ) -> CheckReport {
        let mut report = CheckReport::new("symmetric-difference-path");
        let t = sigma[u];
        let base = self.runner.run(sigma);
        assert!(!base.is_matched(u), "precondition: u unmatched under sigma");
        assert!(i < t, "precondition: i < t");
        let moved_sigma = reposition(sigma, u, i);
        let moved = self.runner.run(&moved_sigma);
        report.cases += 1;

        // online vertices with different matches, in arrival order
        let diff: Vec<usize> = self
            .inst
            .arrival()
            .iter()
            .copied()
            .filter(|&v| base.match_online[v] != moved.match_online[v])
            .collect();
        if diff.is_empty() {
            return report; // matchings identical; nothing to verify
        }
        // invariant: v_1 matches u, and v_j matches m_sigma(v_{j-1})
        if moved.match_online[diff[0]] != Some(u) {
            report.fail(format!(
                "sigma={sigma:?} u={u} i={i}: first differing vertex {} does not match u",
                diff[0]
            ));
        }
        for j in 1..diff.len() {
            let expected = base.match_online[diff[j - 1]];
            if expected.is_none() {
                report.fail(format!(
                    "sigma={sigma:?} u={u} i={i}: interior path vertex {} was unmatched in sigma",
                    diff[j - 1]
                ));
                break;
            }
            if moved.match_online[diff[j]] != expected {
                report.fail(format!(
                    "sigma={sigma:?} u={u} i={i}: vertex {} does not continue the path",
                    diff[j]
                ));
            }
        }
        // the path consumes matches one-for-one: at most the last vertex may
        // gain a match it did not have
        for (j, &v) in diff.iter().enumerate() {
            if j + 1 < diff.len() && base.match_online[v].is_none() {
                report.fail(format!(
                    "sigma={sigma:?} u={u} i={i}: non-terminal vertex {v} unmatched in sigma"
                ));
            }
        }
        report
    }

    /// Sweep the path check over every unmatched occurrence and every lower
    /// reposition.
    pub fn check_symmetric_difference_paths(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("symmetric-difference-paths");
        for t in 2..=self.k {
            for &(code, u) in &tables.r[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                for i in 1..t {
                    let single = self.check_symmetric_difference_path(&sigma, u, i);
                    report.cases += single.cases;
                    if !single.passed {
                        report.passed = false;
                        for v in single.violations {
                            if report.violations.len() < 50 {
                                report.violations.push(v);
                            }
                        }
                    }
                }
            }
        }
        report
    }

    /// Marginal-loss structure: the threshold property of `S_t`, the
    /// explicit one-to-one map `g : R_t -> union of S_s (s <= t)` and the
    /// expected-gain identities.
    pub fn check_marginal_structure(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("marginal-structure");
        // threshold property on S_t: matched at i iff i < t
        for t in 1..=self.k {
            for &(code, u) in &tables.s[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                for i in 1..=self.k {
                    report.cases += 1;
                    let moved = self.runner.run(&reposition(&sigma, u, i));
                    if moved.is_matched(u) != (i < t) {
                        report.fail(format!(
                            "sigma={sigma:?} t={t} u={u}: matched-at-{i} violates threshold"
                        ));
                    }
                }
            }
        }
        // informational: how the threshold behaves on R_t \ S_t
        let mut non_marginal = 0u64;
        let mut non_marginal_threshold = 0u64;
        for t in 1..=self.k {
            let s_set = tables.s_set(t);
            for &(code, u) in &tables.r[t as usize - 1] {
                if s_set.contains(&(code, u)) {
                    continue;
                }
                non_marginal += 1;
                let sigma = sigma_from_code(code, self.k, tables.n);
                let threshold = (1..=self.k).all(|i| {
                    self.runner.run(&reposition(&sigma, u, i)).is_matched(u) == (i < t)
                });
                if threshold {
                    non_marginal_threshold += 1;
                }
            }
        }
        report.info.push(format!(
            "threshold property on R\\S: {non_marginal_threshold} of {non_marginal} \
             non-marginal occurrences satisfy it"
        ));

        // the map g: lowest reposition at which u stays unmatched
        let s_sets: Vec<HashSet<Occurrence>> = (1..=self.k).map(|t| tables.s_set(t)).collect();
        for t in 1..=self.k {
            let mut images: HashMap<(u64, u32, OfflineId), (u64, OfflineId)> = HashMap::new();
            for &(code, u) in &tables.r[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                let lowest = (1..=self.k)
                    .find(|&i| !self.runner.run(&reposition(&sigma, u, i)).is_matched(u));
                report.cases += 1;
                let Some(i) = lowest else {
                    report.fail(format!("sigma={sigma:?} t={t} u={u}: no unmatched reposition"));
                    continue;
                };
                if i > t {
                    report.fail(format!(
                        "sigma={sigma:?} t={t} u={u}: g image at position {i} > t"
                    ));
                    continue;
                }
                let moved = reposition(&sigma, u, i);
                let image_code = code_from_sigma(&moved, self.k);
                if !s_sets[i as usize - 1].contains(&(image_code, u)) {
                    report.fail(format!(
                        "sigma={sigma:?} t={t} u={u}: g image not a marginal loss at {i}"
                    ));
                }
                if let Some(prev) = images.insert((image_code, i, u), (code, u)) {
                    report.fail(format!(
                        "g collides: images of {prev:?} and {:?} agree at position {i}",
                        (code, u)
                    ));
                }
            }
        }

        // expected-gain identities
        let mut partial = BigRational::zero();
        for t in 1..=self.k as usize {
            partial += &tables.alpha[t - 1];
            report.cases += 1;
            let rhs = &tables.per_position_opt - &partial;
            if tables.perfect {
                if tables.x[t - 1] != rhs {
                    report.fail(format!("x_{t} != B - sum of alpha (exact identity)"));
                }
            } else if tables.x[t - 1] < rhs {
                report.fail(format!("x_{t} < B - sum of alpha (imperfect-matching bound)"));
            }
        }
        if tables.perfect {
            let total_loss: BigRational = (1..=self.k as usize)
                .map(|t| &tables.per_position_opt - &tables.x[t - 1])
                .fold(BigRational::zero(), |a, b| a + b);
            let weighted: BigRational = (1..=self.k as usize)
                .map(|t| {
                    BigRational::from_integer(BigInt::from(self.k as usize - t + 1))
                        * &tables.alpha[t - 1]
                })
                .fold(BigRational::zero(), |a, b| a + b);
            report.cases += 1;
            if total_loss != weighted {
                report.fail("total loss != sum (k-t+1) alpha_t".to_string());
            }
        }
        report
    }

    /// Disjointness of the charging map restricted to marginal losses, and
    /// the expected non-disjointness on plain unmatched occurrences.
    pub fn check_charging_disjointness(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("charging-disjointness");
        let q_sets: Vec<HashSet<Occurrence>> = (1..=self.k).map(|t| tables.q_set(t)).collect();
        let mut seen: HashMap<(u64, u32, OfflineId), (u64, u32, OfflineId)> = HashMap::new();
        for t in 1..=self.k {
            for &(code, u) in &tables.s[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                report.cases += 1;
                let targets = match self.charge_targets(&sigma, u) {
                    Ok(ts) => ts,
                    Err(i) => {
                        report.fail(format!(
                            "sigma={sigma:?} t={t} u={u}: u* unmatched at reposition {i}"
                        ));
                        continue;
                    }
                };
                if targets.len() != self.k as usize {
                    report.fail(format!(
                        "sigma={sigma:?} t={t} u={u}: {} targets instead of k",
                        targets.len()
                    ));
                }
                for &(tc, s, u_prime) in &targets {
                    if !q_sets[s as usize - 1].contains(&(tc, u_prime)) {
                        report.fail(format!(
                            "sigma={sigma:?} t={t} u={u}: target at {s} is not matched"
                        ));
                    }
                    if let Some(other) = seen.insert((tc, s, u_prime), (code, t, u)) {
                        report.fail(format!(
                            "target collision between sources {other:?} and {:?}",
                            (code, t, u)
                        ));
                    }
                }
            }
        }

        // recorded fact: on R the maps of (sigma, t, u) and (sigma_u^j, j, u)
        // coincide whenever u is unmatched in both
        let mut demonstrated = 0u64;
        'outer: for t in 1..=self.k {
            for &(code, u) in &tables.r[t as usize - 1] {
                let sigma = sigma_from_code(code, self.k, tables.n);
                for j in (t + 1)..=self.k {
                    let moved = reposition(&sigma, u, j);
                    if self.runner.run(&moved).is_matched(u) {
                        continue;
                    }
                    let a = self.charge_targets(&sigma, u);
                    let b = self.charge_targets(&moved, u);
                    if let (Ok(mut a), Ok(mut b)) = (a, b) {
                        a.sort_unstable();
                        b.sort_unstable();
                        if a == b {
                            demonstrated += 1;
                        }
                    }
                    if demonstrated >= 5 {
                        break 'outer;
                    }
                }
            }
        }
        report.info.push(format!(
            "non-disjointness on R demonstrated for {demonstrated} source pairs"
        ));
        report
    }

    /// The inequality chain: the per-source charging bound, its summed
    /// forms, the coefficient bound and the final gain bound.
    pub fn check_inequality_chain(&self, tables: &EventTables) -> CheckReport {
        let mut report = CheckReport::new("inequality-chain");
        let k = self.k;
        let k_rat = BigRational::from_integer(BigInt::from(k));
        let psi: Vec<BigRational> = (1..=k).map(|t| self.psi(t)).collect();

        // per marginal-loss source: psi(t) b_u <= (1/k) sum psi(s) b_{u'}
        for t in 1..=k {
            for &(code, u) in &tables.s[t as usize - 1] {
                let sigma = sigma_from_code(code, k, tables.n);
                report.cases += 1;
                if let Ok(targets) = self.charge_targets(&sigma, u) {
                    let rhs: BigRational = targets
                        .iter()
                        .map(|&(_, s, u_prime)| self.runner.score(u_prime, s).clone())
                        .fold(BigRational::zero(), |a, b| a + b)
                        / &k_rat;
                    if *self.runner.score(u, t) > rhs {
                        report.fail(format!(
                            "sigma={sigma:?} t={t} u={u}: charging bound violated"
                        ));
                    }
                } else {
                    report.fail(format!("sigma={sigma:?} t={t} u={u}: u* unmatched"));
                }
            }
        }

        // summed form: sum psi(t) alpha_t <= (1/k) sum psi(t) x_t
        let lhs: BigRational = (0..k as usize)
            .map(|t| &psi[t] * &tables.alpha[t])
            .fold(BigRational::zero(), |a, b| a + b);
        let rhs_x: BigRational = (0..k as usize)
            .map(|t| &psi[t] * &tables.x[t])
            .fold(BigRational::zero(), |a, b| a + b)
            / &k_rat;
        report.cases += 1;
        if lhs > rhs_x {
            report.fail("sum psi(t) alpha_t > (1/k) sum psi(t) x_t".to_string());
        }
        if tables.perfect {
            // substitute the gain identity: same bound through B - sum alpha
            let mut partial = BigRational::zero();
            let rhs_subst: BigRational = (0..k as usize)
                .map(|t| {
                    partial += &tables.alpha[t];
                    &psi[t] * (&tables.per_position_opt - &partial)
                })
                .fold(BigRational::zero(), |a, b| a + b)
                / &k_rat;
            report.cases += 1;
            if rhs_subst != rhs_x {
                report.fail("substituted gain identity disagrees".to_string());
            }
        }

        // rearranged form: sum alpha_t (psi(t) + sum_{s>=t} psi(s)/k)
        //                  <= (B/k) sum psi(t)
        let mut suffix = BigRational::zero();
        let mut coeffs = vec![BigRational::zero(); k as usize];
        for t in (0..k as usize).rev() {
            suffix += &psi[t];
            coeffs[t] = &psi[t] + &suffix / &k_rat;
        }
        let lhs18: BigRational = (0..k as usize)
            .map(|t| &tables.alpha[t] * &coeffs[t])
            .fold(BigRational::zero(), |a, b| a + b);
        let psi_sum: BigRational = psi.iter().cloned().fold(BigRational::zero(), |a, b| a + b);
        let rhs18 = &tables.per_position_opt * &psi_sum / &k_rat;
        report.cases += 1;
        if tables.perfect && lhs18 > rhs18 {
            report.fail("rearranged inequality violated".to_string());
        }

        // coefficient bound: psi(t) + sum_{s>=t} psi(s)/k >= (k-t+1)/k
        for t in 1..=k as usize {
            report.cases += 1;
            let bound = BigRational::new(BigInt::from(k as usize - t + 1), BigInt::from(k));
            if coeffs[t - 1] < bound {
                report.fail(format!("coefficient bound fails at t={t}"));
            }
        }

        // final gain bound for perfect-matching instances:
        // sum x_t >= (1 - sum psi(t)/k) OPT
        if tables.perfect {
            report.cases += 1;
            let gain: BigRational =
                tables.x.iter().cloned().fold(BigRational::zero(), |a, b| a + b);
            let factor = BigRational::one() - &psi_sum / &k_rat;
            if gain < factor * &tables.opt {
                report.fail("total gain below the guaranteed factor".to_string());
            }
        }

        let psi_over_k = (&psi_sum / &k_rat).to_f64().unwrap_or(f64::NAN);
        report.info.push(format!(
            "sum psi(t)/k = {psi_over_k:.6} (limit 1/e = {:.6})",
            1.0 / std::f64::consts::E
        ));
        report
    }

    /// Run every exact check.
    pub fn run_all(&self) -> Result<VerifierReport, VerifierError> {
        let tables = self.enumerate_events()?;
        let checks = vec![
            self.check_partition(&tables),
            self.check_repositioning_lemma(&tables),
            self.check_symmetric_difference_paths(&tables),
            self.check_marginal_structure(&tables),
            self.check_charging_disjointness(&tables),
            self.check_inequality_chain(&tables),
        ];
        Ok(VerifierReport {
            instance_hash: instance_hash(self.inst),
            k: self.k,
            mode: VerifierMode::Exact,
            checks,
            tables: Some(dump_tables(&tables)),
        })
    }

    /// Statistical fallback beyond the enumeration guard: spot-checks the
    /// repositioning lemma on sampled assignments.
    pub fn run_statistical(&self, samples: u64, seed: u64) -> VerifierReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = CheckReport::new("repositioning-lemma-sampled");
        let opt_matched: Vec<OfflineId> = self.annotation.optimally_matched().collect();
        for _ in 0..samples {
            let sigma: Vec<u32> = (0..self.inst.n_offline())
                .map(|_| rng.gen_range(1..=self.k))
                .collect();
            let out = self.runner.run(&sigma);
            for &u in &opt_matched {
                if out.is_matched(u) {
                    continue;
                }
                let t = sigma[u];
                report.cases += self.k as u64;
                match self.charge_targets(&sigma, u) {
                    Err(i) => report.fail(format!(
                        "sampled sigma={sigma:?} t={t} u={u}: u* unmatched at reposition {i}"
                    )),
                    Ok(targets) => {
                        for &(_, s, u_prime) in &targets {
                            if self.runner.score(u, t) > self.runner.score(u_prime, s) {
                                report.fail(format!(
                                    "sampled sigma={sigma:?} t={t} u={u}: charging bound"
                                ));
                            }
                        }
                    }
                }
            }
        }
        report.info.push(format!(
            "statistical mode: {samples} of {} assignments sampled",
            self.states
        ));
        VerifierReport {
            instance_hash: instance_hash(self.inst),
            k: self.k,
            mode: VerifierMode::Statistical,
            checks: vec![report],
            tables: None,
        }
    }

    /// Monte-Carlo estimates of the per-position expected gains, with
    /// standard errors. Used to cross-check the exact tables.
    pub fn sampled_gain_estimates(&self, trials: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.k as usize;
        let mut sum = vec![0.0; k];
        let mut sum_sq = vec![0.0; k];
        for _ in 0..trials {
            let sigma: Vec<u32> = (0..self.inst.n_offline())
                .map(|_| rng.gen_range(1..=self.k))
                .collect();
            let out = self.runner.run(&sigma);
            let mut gain_at = vec![0.0; k];
            for u in 0..self.inst.n_offline() {
                if out.is_matched(u) {
                    gain_at[sigma[u] as usize - 1] += self.inst.weight(u);
                }
            }
            for t in 0..k {
                sum[t] += gain_at[t];
                sum_sq[t] += gain_at[t] * gain_at[t];
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / trials as f64).collect();
        let se: Vec<f64> = (0..k)
            .map(|t| {
                let var = (sum_sq[t] / trials as f64 - mean[t] * mean[t]).max(0.0);
                (var / trials as f64).sqrt()
            })
            .collect();
        (mean, se)
    }
}

fn dump_tables(tables: &EventTables) -> TableDump {
    TableDump {
        x: tables.x.iter().map(|r| r.to_string()).collect(),
        alpha: tables.alpha.iter().map(|r| r.to_string()).collect(),
        x_f64: tables.x.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
        alpha_f64: tables.alpha.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
        opt: tables.opt.to_string(),
        per_position_opt: tables.per_position_opt.to_string(),
    }
}

/// `sum psi(t) / k` for the discrete perturbation at a given `k`; tends to
/// `1/e` as `k` grows.
pub fn psi_sum_over_k(k: u32) -> f64 {
    let sum: f64 = (1..=k).map(|t| crate::online::Psi::eval_discrete(k, t)).sum();
    sum / k as f64
}
