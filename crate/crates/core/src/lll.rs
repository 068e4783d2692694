//! Chernoff bounds, the asymmetric Local Lemma condition, and a Moser–Tardos
//! resampling engine.
//!
//! Probability bookkeeping here is `f64`; nothing in this module feeds an
//! exact comparison downstream.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `Pr[Z ≥ λμ] ≤ e^{−λμ/K}`, for `λ ≥ 7`.
    Upper,
    /// `Pr[Z ≥ (1+λ)μ] ≤ e^{−λ²μ/3K}`, for `λ ∈ (0,1)`.
    UpperSmall,
    /// `Pr[Z ≤ (1−λ)μ] ≤ e^{−λ²μ/2K}`, for `λ ∈ (0,1)`.
    Lower,
}

/// Tail bound for a sum of independent variables in `[0, K]` with mean `μ`.
pub fn chernoff_bound(mu: f64, k: f64, lambda: f64, tail: Tail) -> Result<f64> {
    if !(mu >= 0.0) || !(k > 0.0) || !mu.is_finite() || !k.is_finite() {
        return Err(Error::InvalidParams(format!("need mu >= 0 and K > 0, got mu={mu}, K={k}")));
    }
    let exponent = match tail {
        Tail::Upper => {
            if !(lambda >= 7.0) {
                return Err(Error::InvalidParams(format!("upper tail needs lambda >= 7, got {lambda}")));
            }
            lambda * mu / k
        }
        Tail::UpperSmall | Tail::Lower => {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::InvalidParams(format!("lambda must lie in (0,1), got {lambda}")));
            }
            let d = if tail == Tail::UpperSmall { 3.0 } else { 2.0 };
            lambda * lambda * mu / (d * k)
        }
    };
    Ok((-exponent).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub id: String,
    /// Unnormalized weights of the values `0..weights.len()`.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub id: String,
    /// Variable indices.
    pub scope: Vec<usize>,
    /// Upper bound on the probability of the event.
    pub bound: f64,
    /// Weight in the asymmetric condition, in `(0,1)`.
    pub x: f64,
    /// The event occurs iff the scope variables take one of these tuples.
    #[serde(default)]
    pub forbidden: Vec<Vec<usize>>,
    /// Group labels for the group-disjoint dependency refinement.
    #[serde(default)]
    pub groups: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSystem {
    pub variables: Vec<Variable>,
    pub events: Vec<Event>,
    /// When set, two events that both carry group labels depend on each other
    /// only if their labels intersect.
    #[serde(default)]
    pub group_refinement: bool,
}

impl EventSystem {
    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            if v.weights.is_empty() || v.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                return Err(Error::InvalidParams(format!("variable {} has bad weights", v.id)));
            }
            if v.weights.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidParams(format!("variable {} has zero total weight", v.id)));
            }
        }
        for e in &self.events {
            if !(e.x > 0.0 && e.x < 1.0) {
                return Err(Error::InvalidParams(format!("event {} has x outside (0,1)", e.id)));
            }
            if !(e.bound >= 0.0 && e.bound <= 1.0) {
                return Err(Error::InvalidParams(format!("event {} has bound outside [0,1]", e.id)));
            }
            if let Some(&v) = e.scope.iter().find(|&&v| v >= self.variables.len()) {
                return Err(Error::InvalidParams(format!("event {} names variable #{v}", e.id)));
            }
            for t in &e.forbidden {
                if t.len() != e.scope.len() {
                    return Err(Error::InvalidParams(format!("event {} has a tuple of wrong arity", e.id)));
                }
                for (&v, &val) in e.scope.iter().zip(t) {
                    if val >= self.variables[v].weights.len() {
                        return Err(Error::InvalidParams(format!("event {} names value {val}", e.id)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dependent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (ea, eb) = (&self.events[a], &self.events[b]);
        if self.group_refinement && !ea.groups.is_empty() && !eb.groups.is_empty() {
            return ea.groups.iter().any(|g| eb.groups.contains(g));
        }
        ea.scope.iter().any(|v| eb.scope.contains(v))
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.events.len()).filter(|&b| self.dependent(a, b)).collect()
    }

    pub fn occurs(&self, event: usize, assignment: &[usize]) -> bool {
        let e = &self.events[event];
        e.forbidden
            .iter()
            .any(|t| e.scope.iter().zip(t).all(|(&v, &val)| assignment[v] == val))
    }

    /// Exact probability of an event under the product distribution.
    pub fn probability(&self, event: usize) -> f64 {
        let e = &self.events[event];
        let tuples: BTreeSet<&Vec<usize>> = e.forbidden.iter().collect();
        tuples
            .iter()
            .map(|t| {
                e.scope
                    .iter()
                    .zip(t.iter())
                    .map(|(&v, &val)| {
                        let w = &self.variables[v].weights;
                        w[val] / w.iter().sum::<f64>()
                    })
                    .product::<f64>()
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LllCheck {
    pub holds: bool,
    /// Per event: `ln(x·Π(1−x_j)) − (1−ε)·ln(bound)`; nonnegative iff the
    /// strengthened inequality holds for that event.
    pub log_slack: Vec<f64>,
}

/// Evaluates `Pr^{1−ε}[E] ≤ x(E)·Π_{E'∈Γ(E)} (1 − x(E'))` for every event,
/// with `Pr` taken from each event's stated bound.
pub fn lll_condition_check(sys: &EventSystem, epsilon: f64) -> Result<LllCheck> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParams(format!("epsilon must lie in [0,1), got {epsilon}")));
    }
    sys.validate()?;
    let log_slack: Vec<f64> = (0..sys.events.len())
        .map(|a| {
            let e = &sys.events[a];
            let rhs = e.x.ln() + sys.neighbors(a).iter().map(|&b| (-sys.events[b].x).ln_1p()).sum::<f64>();
            if e.bound == 0.0 {
                f64::INFINITY
            } else {
                rhs - (1.0 - epsilon) * e.bound.ln()
            }
        })
        .collect();
    Ok(LllCheck { holds: log_slack.iter().all(|s| *s >= 0.0), log_slack })
}

/// Summary form for event families too large to list: an event of this
/// family has probability at most `e^{log_bound}`, weight `e^{log_x}`, and
/// depends on at most `count` events of weight `e^{log_x}` for every listed
/// neighbor class.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyBound {
    pub log_bound: f64,
    pub log_x: f64,
    pub neighbors: Vec<NeighborClass>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborClass {
    pub count: f64,
    pub log_x: f64,
}

/// Log-slack of the strengthened condition for a family summary.
pub fn family_log_slack(f: &FamilyBound, epsilon: f64) -> f64 {
    let product: f64 = f
        .neighbors
        .iter()
        .map(|n| n.count * (-n.log_x.exp()).ln_1p())
        .sum();
    f.log_x + product - (1.0 - epsilon) * f.log_bound
}

/// `Σ x/(1−x)`: expected resampling bound when the condition holds.
pub fn mt_resample_bound(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x / (1.0 - x)).sum()
}

/// `n·ln(1/δ)·max(1−x)^{−1}` with `δ = min_E x(E)·Π_{Γ(E)} (1−x)`.
pub fn hss_resample_bound(sys: &EventSystem) -> f64 {
    let n = sys.variables.len() as f64;
    let log_delta = (0..sys.events.len())
        .map(|a| {
            sys.events[a].x.ln()
                + sys.neighbors(a).iter().map(|&b| (-sys.events[b].x).ln_1p()).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    let max_inv = sys
        .events
        .iter()
        .map(|e| 1.0 / (1.0 - e.x))
        .fold(1.0, f64::max);
    if sys.events.is_empty() {
        0.0
    } else {
        n * (-log_delta) * max_inv
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolatedEvent {
    /// Stable id used for ordering and statistics.
    pub id: usize,
    /// Variables to resample, in any order.
    pub scope: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MtStats {
    pub resamples: usize,
    pub per_event: BTreeMap<usize, usize>,
}

/// Moser–Tardos loop over caller-owned state. `sample` draws variable `v`
/// afresh; `detect` returns the next violated event under the caller's scan
/// order, or `None` when the state is acceptable.
pub fn run_moser_tardos<S, R: Rng + ?Sized>(
    state: &mut S,
    num_vars: usize,
    rng: &mut R,
    max_resamples: usize,
    mut sample: impl FnMut(&mut S, usize, &mut R),
    mut detect: impl FnMut(&S) -> Option<ViolatedEvent>,
) -> Result<MtStats> {
    for v in 0..num_vars {
        sample(state, v, rng);
    }
    let mut stats = MtStats::default();
    while let Some(ev) = detect(state) {
        if stats.resamples >= max_resamples {
            let mut top: Vec<(usize, usize)> = stats.per_event.iter().map(|(&e, &c)| (c, e)).collect();
            top.sort_unstable_by(|a, b| b.cmp(a));
            let top: Vec<String> = top.iter().take(5).map(|(c, e)| format!("event {e}: {c}")).collect();
            return Err(Error::NonTerminated(format!(
                "resampling limit {max_resamples} reached; most frequent: {}",
                top.join(", ")
            )));
        }
        let mut scope = ev.scope.clone();
        scope.sort_unstable();
        scope.dedup();
        for v in scope {
            sample(state, v, rng);
        }
        stats.resamples += 1;
        *stats.per_event.entry(ev.id).or_default() += 1;
    }
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MtPolicy {
    /// Only events whose bound is at least this are checked.
    pub core_threshold: f64,
    pub max_resamples: usize,
}

impl Default for MtPolicy {
    fn default() -> Self {
        MtPolicy { core_threshold: 0.0, max_resamples: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtOutcome {
    pub assignment: Vec<usize>,
    pub stats: MtStats,
}

/// Runs the engine on an explicit event system; violated events are picked
/// lowest index first.
pub fn moser_tardos<R: Rng + ?Sized>(sys: &EventSystem, rng: &mut R, policy: MtPolicy) -> Result<MtOutcome> {
    sys.validate()?;
    let dists: Vec<WeightedIndex<f64>> = sys
        .variables
        .iter()
        .map(|v| WeightedIndex::new(&v.weights).map_err(|e| Error::InvalidParams(e.to_string())))
        .collect::<Result<_>>()?;
    let core: Vec<usize> = (0..sys.events.len())
        .filter(|&e| sys.events[e].bound >= policy.core_threshold)
        .collect();
    let mut assignment = vec![0usize; sys.variables.len()];
    let stats = run_moser_tardos(
        &mut assignment,
        sys.variables.len(),
        rng,
        policy.max_resamples,
        |a, v, rng| a[v] = dists[v].sample(rng),
        |a| {
            core.iter()
                .find(|&&e| sys.occurs(e, a))
                .map(|&e| ViolatedEvent { id: e, scope: sys.events[e].scope.clone() })
        },
    )?;
    Ok(MtOutcome { assignment, stats })
}

/// Random satisfiable 3-CNF on `n` variables whose clause dependency graph
/// has maximum degree one: variables are split into consecutive triples and
/// each triple carries one or two clauses with distinct sign patterns.
/// Clause events get `x = 1/2`.
pub fn sparse_three_sat<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<EventSystem> {
    if n < 3 {
        return Err(Error::InvalidParams("need at least three variables".into()));
    }
    let variables = (0..n)
        .map(|v| Variable { id: format!("v{v}"), weights: vec![1.0, 1.0] })
        .collect();
    let mut events = Vec::new();
    for t in 0..n / 3 {
        let scope: Vec<usize> = (3 * t..3 * t + 3).collect();
        let clauses = rng.gen_range(1..=2);
        let first: u8 = rng.gen_range(0..8);
        let mut patterns = vec![first];
        if clauses == 2 {
            patterns.push((first + rng.gen_range(1..8)) % 8);
        }
        for pat in patterns {
            // A clause is violated by exactly one assignment of its variables.
            let tuple: Vec<usize> = (0..3).map(|b| ((pat >> b) & 1) as usize).collect();
            events.push(Event {
                id: format!("c{}", events.len()),
                scope: scope.clone(),
                bound: 0.125,
                x: 0.5,
                forbidden: vec![tuple],
                groups: vec![],
            });
        }
    }
    Ok(EventSystem { variables, events, group_refinement: false })
}

pub fn parse_event_fixture(text: &str) -> Result<EventSystem> {
    parse_event_fixture_bytes(text.as_bytes())
}

pub fn parse_event_fixture_bytes(bytes: &[u8]) -> Result<EventSystem> {
    let sys: EventSystem = serde_json::from_slice(bytes)?;
    sys.validate()?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn upper_form_at_seven() {
        let b = chernoff_bound(1.0, 1.0, 7.0, Tail::Upper).unwrap();
        assert!((b - (-7.0f64).exp()).abs() < 1e-15);
        assert!(chernoff_bound(1.0, 1.0, 6.9, Tail::Upper).is_err());
        assert!(chernoff_bound(1.0, 1.0, 1.0, Tail::Lower).is_err());
    }

    #[test]
    fn small_lambda_tends_to_one() {
        for tail in [Tail::UpperSmall, Tail::Lower] {
            assert!(chernoff_bound(5.0, 1.0, 1e-9, tail).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn independent_events_pass() {
        let sys = EventSystem {
            variables: vec![
                Variable { id: "a".into(), weights: vec![1.0, 1.0] },
                Variable { id: "b".into(), weights: vec![1.0, 1.0] },
            ],
            events: vec![
                Event { id: "e0".into(), scope: vec![0], bound: 0.25, x: 0.5, forbidden: vec![vec![1]], groups: vec![] },
                Event { id: "e1".into(), scope: vec![1], bound: 0.25, x: 0.5, forbidden: vec![vec![1]], groups: vec![] },
            ],
            group_refinement: false,
        };
        let c = lll_condition_check(&sys, 0.0).unwrap();
        assert!(c.holds);
        assert_eq!(sys.neighbors(0), Vec::<usize>::new());
    }

    #[test]
    fn no_events_returns_first_sample() {
        let sys = EventSystem {
            variables: vec![Variable { id: "a".into(), weights: vec![1.0, 3.0] }],
            events: vec![],
            group_refinement: false,
        };
        let out = moser_tardos(&sys, &mut ChaCha8Rng::seed_from_u64(0), MtPolicy::default()).unwrap();
        assert_eq!(out.stats.resamples, 0);
    }

    #[test]
    fn three_sat_is_solved_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sys = sparse_three_sat(30, &mut rng).unwrap();
        assert!(lll_condition_check(&sys, 0.0).unwrap().holds);
        let run = |seed| moser_tardos(&sys, &mut ChaCha8Rng::seed_from_u64(seed), MtPolicy::default()).unwrap();
        let a = run(9);
        assert_eq!(a, run(9));
        assert!((0..sys.events.len()).all(|e| !sys.occurs(e, &a.assignment)));
    }

    #[test]
    fn resample_limit_is_reported() {
        // An event that always occurs.
        let sys = EventSystem {
            variables: vec![Variable { id: "a".into(), weights: vec![1.0] }],
            events: vec![Event { id: "e".into(), scope: vec![0], bound: 1.0, x: 0.5, forbidden: vec![vec![0]], groups: vec![] }],
            group_refinement: false,
        };
        let err = moser_tardos(&sys, &mut ChaCha8Rng::seed_from_u64(0), MtPolicy { core_threshold: 0.0, max_resamples: 10 });
        assert!(matches!(err, Err(Error::NonTerminated(_))));
    }

    #[test]
    fn fixture_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = sparse_three_sat(9, &mut rng).unwrap();
        let text = serde_json::to_string(&sys).unwrap();
        assert_eq!(parse_event_fixture(&text).unwrap(), sys);
    }
}
