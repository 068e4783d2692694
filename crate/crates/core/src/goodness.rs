//! δ-good heavy assignments: flow certification, subset enumeration,
//! witnesses and the boundary/deficiency bookkeeping.
//!
//! `f` is δ-good when every subset `S` of machines satisfies
//! `|S ∩ X| + w[S,S] ≤ (2−δ)|S|`, with `X = f(J_H)`. Equivalently, light load
//! can be routed so each machine `i` receives at most `1[i∉X] + 1 − δ`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::canonical::{CanonicalInstance, HeavyAssignment, IntegralLights};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::rational::{ceil_int, format_rational, int, parse_rational, Rational};

/// Fractional light routing: for each type `(h,k)`, the load sent to `h` and
/// to `k`.
pub type Placement = BTreeMap<(usize, usize), (Rational, Rational)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub delta: Rational,
    pub slack: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodnessResult {
    pub good: bool,
    /// Present when `good`.
    pub placement: Option<Placement>,
    /// Present when not `good`: a violated subset read off a minimum cut.
    pub witness: Option<Witness>,
}

/// `|T| + w[S,S] − (2−δ)|S|`.
pub fn witness_slack(ci: &CanonicalInstance, s: &[usize], t_count: usize, delta: &Rational) -> Rational {
    let inside: BTreeSet<usize> = s.iter().copied().collect();
    let w_ss: Rational = ci
        .w
        .iter()
        .filter(|((h, k), _)| inside.contains(h) && inside.contains(k))
        .map(|(_, v)| v)
        .sum();
    int(t_count as i64) + w_ss - (int(2) - delta) * int(s.len() as i64)
}

pub fn make_witness(ci: &CanonicalInstance, x: &[bool], s: Vec<usize>, delta: &Rational) -> Witness {
    let t: Vec<usize> = s.iter().copied().filter(|&i| x[i]).collect();
    let slack = witness_slack(ci, &s, t.len(), delta);
    Witness { s, t, delta: delta.clone(), slack }
}

pub fn is_delta_good(ci: &CanonicalInstance, f: &HeavyAssignment, delta: &Rational) -> Result<GoodnessResult> {
    ci.validate_assignment(f)?;
    let m = ci.num_machines();
    let x = f.image(m);
    let caps: Vec<Rational> = (0..m)
        .map(|i| {
            let free = if x[i] { Rational::zero() } else { Rational::one() };
            free + Rational::one() - delta
        })
        .collect();
    if let Some(i) = (0..m).find(|&i| caps[i].is_negative()) {
        let witness = make_witness(ci, &x, vec![i], delta);
        return Ok(GoodnessResult { good: false, placement: None, witness: Some(witness) });
    }
    let types: Vec<((usize, usize), Rational)> = ci.w.iter().map(|(&k, v)| (k, v.clone())).collect();
    let source = 0;
    let sink = 1;
    let a0 = 2;
    let m0 = a0 + types.len();
    let mut net = FlowNetwork::new(m0 + m, source, sink);
    let mut arcs = Vec::with_capacity(types.len());
    for (a, ((h, k), w)) in types.iter().enumerate() {
        net.add_arc(source, a0 + a, w.clone());
        let to_h = if h != k { Some(net.add_arc(a0 + a, m0 + h, w.clone())) } else { None };
        let to_k = net.add_arc(a0 + a, m0 + k, w.clone());
        arcs.push((to_h, to_k));
    }
    for (i, cap) in caps.iter().enumerate() {
        net.add_arc(m0 + i, sink, cap.clone());
    }
    let result = net.max_flow();
    let demand: Rational = types.iter().map(|(_, w)| w).sum();
    if result.value == demand {
        let placement = types
            .iter()
            .zip(&arcs)
            .map(|((key, _), (to_h, to_k))| {
                let h = to_h.map(|a| result.flow[a].clone()).unwrap_or_else(Rational::zero);
                (*key, (h, result.flow[*to_k].clone()))
            })
            .collect();
        return Ok(GoodnessResult { good: true, placement: Some(placement), witness: None });
    }
    let s: Vec<usize> = (0..m).filter(|&i| result.source_side[m0 + i]).collect();
    let witness = make_witness(ci, &x, s, delta);
    debug_assert!(witness.slack.is_positive());
    Ok(GoodnessResult { good: false, placement: None, witness: Some(witness) })
}

pub const BRUTE_FORCE_MAX_MACHINES: usize = 25;

/// Enumerates every nonempty `S ⊆ M`; returns whether `f` is δ-good and the
/// witness of maximum slack (smallest mask on ties) if not.
pub fn delta_good_bruteforce(
    ci: &CanonicalInstance,
    f: &HeavyAssignment,
    delta: &Rational,
) -> Result<(bool, Option<Witness>)> {
    ci.validate_assignment(f)?;
    let m = ci.num_machines();
    if m > BRUTE_FORCE_MAX_MACHINES {
        return Err(Error::BudgetExceeded(format!(
            "subset enumeration over {m} machines (limit {BRUTE_FORCE_MAX_MACHINES})"
        )));
    }
    let x = f.image(m);
    let entries: Vec<(u32, &Rational)> =
        ci.w.iter().map(|(&(h, k), v)| ((1u32 << h) | (1u32 << k), v)).collect();
    let two = int(2) - delta;
    let mut best: Option<(Rational, u32)> = None;
    for mask in 1u32..(1u32 << m) {
        let size = mask.count_ones() as i64;
        let t = (0..m).filter(|&i| mask & (1 << i) != 0 && x[i]).count() as i64;
        let w_ss: Rational = entries.iter().filter(|(b, _)| b & mask == *b).map(|(_, v)| *v).sum();
        let slack = int(t) + w_ss - &two * int(size);
        if slack.is_positive() && best.as_ref().map_or(true, |(b, _)| &slack > b) {
            best = Some((slack, mask));
        }
    }
    Ok(match best {
        None => (true, None),
        Some((_, mask)) => {
            let s = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            (false, Some(make_witness(ci, &x, s, delta)))
        }
    })
}

/// Weakly connected components of `G_w[S]`, each sorted.
pub fn components(ci: &CanonicalInstance, s: &[usize]) -> Vec<Vec<usize>> {
    let inside: BTreeSet<usize> = s.iter().copied().collect();
    let adj = ci.undirected_adjacency();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in &inside {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if inside.contains(&v) && seen.insert(v) {
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn is_connected(ci: &CanonicalInstance, s: &[usize]) -> bool {
    components(ci, s).len() <= 1
}

/// Splits a witness along the components of `G_w[S]` and returns the piece of
/// largest slack; it is again a witness since the slacks add up.
pub fn connected_refinement(ci: &CanonicalInstance, x: &[bool], w: &Witness) -> Witness {
    components(ci, &w.s)
        .into_iter()
        .map(|c| make_witness(ci, x, c, &w.delta))
        .max_by(|a, b| a.slack.cmp(&b.slack).then_with(|| b.s.cmp(&a.s)))
        .unwrap_or_else(|| w.clone())
}

/// Largest δ for which `f` is δ-good, `min_S (2|S| − |S∩X| − w[S,S]) / |S|`,
/// with a placement certifying it. `None` when there are no machines.
pub fn best_goodness(ci: &CanonicalInstance, f: &HeavyAssignment) -> Result<Option<(Rational, Placement)>> {
    let m = ci.num_machines();
    if m == 0 {
        return Ok(None);
    }
    let x = f.image(m);
    let ratio = |s: &[usize]| {
        let w = make_witness(ci, &x, s.to_vec(), &Rational::zero());
        // slack at δ=0 is |T| + w_SS − 2|S|; the ratio is −slack/|S|.
        -w.slack / int(s.len() as i64)
    };
    let mut delta = ratio(&(0..m).collect::<Vec<_>>());
    for _ in 0..(4 * m + 64) {
        let r = is_delta_good(ci, f, &delta)?;
        if r.good {
            return Ok(Some((delta, r.placement.expect("good result has a placement"))));
        }
        let w = r.witness.expect("bad result has a witness");
        let next = ratio(&w.s);
        if next >= delta {
            return Err(Error::Internal("goodness search did not decrease".into()));
        }
        delta = next;
    }
    Err(Error::Internal("goodness search did not converge".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetStats {
    pub w_ss: Rational,
    pub bnd: Rational,
    pub phi: Rational,
    pub z_sum: Rational,
}

/// Per-machine deficiency `φ_h = 1 − z_h − Σ_k (w[k,h](1−z_h) + w[h,k] z_k)`.
pub fn deficiencies(ci: &CanonicalInstance) -> Vec<Rational> {
    ci.machine_loads().into_iter().map(|l| Rational::one() - l).collect()
}

pub fn subset_stats(ci: &CanonicalInstance, s: &[usize]) -> SubsetStats {
    let inside: BTreeSet<usize> = s.iter().copied().collect();
    let one = Rational::one();
    let mut w_ss = Rational::zero();
    let mut bnd = Rational::zero();
    for (&(h, k), w) in &ci.w {
        let (ih, ik) = (inside.contains(&h), inside.contains(&k));
        if ih && ik {
            w_ss += w;
        }
        if h != k {
            // Term of machine k: w[h,k](1−z_k); term of machine h: w[h,k] z_k.
            if ik && !ih {
                bnd += w * (&one - &ci.z[k]);
            }
            if ih && !ik {
                bnd += w * &ci.z[k];
            }
        }
    }
    let phi_all = deficiencies(ci);
    SubsetStats {
        w_ss,
        bnd,
        phi: inside.iter().map(|&i| &phi_all[i]).sum(),
        z_sum: inside.iter().map(|&i| &ci.z[i]).sum(),
    }
}

/// Rounds a fractional placement to whole jobs of size `eps`: machine `i`
/// accepts at most `ceil(frac_i / eps)` jobs, so its light load grows by less
/// than `eps`. `w` must be a multiple of `eps` entrywise.
pub fn integral_light_assignment(
    ci: &CanonicalInstance,
    placement: &Placement,
    eps: &Rational,
) -> Result<IntegralLights> {
    let m = ci.num_machines();
    let mut frac = vec![Rational::zero(); m];
    let mut counts = Vec::new();
    for (&(h, k), w) in &ci.w {
        let n = w / eps;
        if !n.is_integer() {
            return Err(Error::Precondition(format!(
                "w[{},{}] = {} is not a multiple of eps",
                ci.machines[h],
                ci.machines[k],
                format_rational(w)
            )));
        }
        let (to_h, to_k) = placement.get(&(h, k)).cloned().ok_or_else(|| {
            Error::Precondition(format!("placement misses type ({}, {})", ci.machines[h], ci.machines[k]))
        })?;
        if &to_h + &to_k != *w || to_h.is_negative() || to_k.is_negative() {
            return Err(Error::Precondition("placement does not split w exactly".into()));
        }
        frac[h] += to_h;
        frac[k] += to_k;
        let n: i64 = n.to_integer().try_into().map_err(|_| Error::BudgetExceeded("job count".into()))?;
        counts.push(((h, k), n));
    }
    let source = 0;
    let sink = 1;
    let a0 = 2;
    let m0 = a0 + counts.len();
    let mut net: FlowNetwork<i64> = FlowNetwork::new(m0 + m, source, sink);
    let mut arcs = Vec::new();
    for (a, &((h, k), n)) in counts.iter().enumerate() {
        net.add_arc(source, a0 + a, n);
        let to_h = if h != k { Some(net.add_arc(a0 + a, m0 + h, n)) } else { None };
        let to_k = net.add_arc(a0 + a, m0 + k, n);
        arcs.push((to_h, to_k));
    }
    for (i, fr) in frac.iter().enumerate() {
        let cap: i64 = ceil_int(&(fr / eps))
            .try_into()
            .map_err(|_| Error::BudgetExceeded("machine capacity".into()))?;
        net.add_arc(m0 + i, sink, cap);
    }
    let r = net.max_flow();
    let total: i64 = counts.iter().map(|(_, n)| n).sum();
    if r.value != total {
        return Err(Error::Internal("integral light routing lost jobs".into()));
    }
    Ok(counts
        .iter()
        .zip(&arcs)
        .map(|(&(key, _), &(to_h, to_k))| {
            let on_h = to_h.map_or(0, |a| r.flow[a]) as usize;
            (key, (on_h, r.flow[to_k] as usize))
        })
        .collect())
}

/// Per-machine light load of an integral placement.
pub fn integral_light_loads(ci: &CanonicalInstance, lights: &IntegralLights, eps: &Rational) -> Vec<Rational> {
    let mut load = vec![Rational::zero(); ci.num_machines()];
    for (&(h, k), &(on_h, on_k)) in lights {
        if h != k {
            load[h] += eps * int(on_h as i64);
        }
        load[k] += eps * int(on_k as i64);
    }
    load
}

/// Per-machine light load of a fractional placement.
pub fn placement_loads(ci: &CanonicalInstance, placement: &Placement) -> Vec<Rational> {
    let mut load = vec![Rational::zero(); ci.num_machines()];
    for (&(h, k), (to_h, to_k)) in placement {
        load[h] += to_h;
        load[k] += to_k;
    }
    load
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    pub delta: String,
    pub slack: String,
}

impl WitnessDoc {
    pub fn from_witness(machines: &[String], w: &Witness) -> Self {
        WitnessDoc {
            s: w.s.iter().map(|&i| machines[i].clone()).collect(),
            t: w.t.iter().map(|&i| machines[i].clone()).collect(),
            delta: format_rational(&w.delta),
            slack: format_rational(&w.slack),
        }
    }

    pub fn into_witness(self, machines: &[String]) -> Result<Witness> {
        let index = crate::instance::index_machines(machines)?;
        let look = |v: &[String]| {
            v.iter()
                .map(|m| index.get(m.as_str()).copied().ok_or_else(|| Error::Parse(format!("unknown machine {m:?}"))))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Witness {
            s: look(&self.s)?,
            t: look(&self.t)?,
            delta: parse_rational(&self.delta)?,
            slack: parse_rational(&self.slack)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::Group;
    use crate::rational::rat;

    /// Two machines with `w[a,b] = w[b,a] = 4/5` and a heavy job fixed on `a`.
    fn pair() -> (CanonicalInstance, HeavyAssignment) {
        let ci = CanonicalInstance {
            machines: vec!["a".into(), "b".into()],
            groups: vec![Group { job: "g0".into(), machines: vec![0] }],
            w: BTreeMap::from([((0, 1), rat(4, 5)), ((1, 0), rat(4, 5))]),
            z: vec![rat(1, 5), rat(1, 5)],
            p: int(5),
            q: int(5),
            theta: int(0),
        };
        (ci, HeavyAssignment { machine_of: vec![0] })
    }

    #[test]
    fn pair_threshold_is_seven_tenths() {
        let (ci, f) = pair();
        assert!(is_delta_good(&ci, &f, &rat(7, 10)).unwrap().good);
        assert!(!is_delta_good(&ci, &f, &rat(71, 100)).unwrap().good);
        let (good, w) = delta_good_bruteforce(&ci, &f, &rat(4, 5)).unwrap();
        assert!(!good);
        let w = w.unwrap();
        assert_eq!((w.s, w.t, w.slack), (vec![0, 1], vec![0], rat(1, 5)));
        let (best, _) = best_goodness(&ci, &f).unwrap().unwrap();
        assert_eq!(best, rat(7, 10));
    }

    #[test]
    fn empty_instance_is_good() {
        let ci = CanonicalInstance {
            machines: vec![],
            groups: vec![],
            w: BTreeMap::new(),
            z: vec![],
            p: int(1),
            q: int(1),
            theta: int(0),
        };
        let f = HeavyAssignment { machine_of: vec![] };
        assert_eq!(delta_good_bruteforce(&ci, &f, &int(0)).unwrap(), (true, None));
        assert!(is_delta_good(&ci, &f, &int(1)).unwrap().good);
    }

    #[test]
    fn stats_identity_on_pair() {
        let (ci, _) = pair();
        for s in [vec![], vec![0], vec![1], vec![0, 1]] {
            let st = subset_stats(&ci, &s);
            assert_eq!(st.phi + st.z_sum + st.w_ss + st.bnd, int(s.len() as i64));
        }
        assert_eq!(subset_stats(&ci, &[0, 1]).bnd, int(0));
    }

    #[test]
    fn split_light_job_lands_whole() {
        let ci = CanonicalInstance {
            machines: vec!["a".into(), "b".into()],
            groups: vec![Group { job: "g".into(), machines: vec![0] }],
            w: BTreeMap::from([((1, 0), rat(1, 4))]),
            z: vec![rat(2, 5), int(0)],
            p: int(5),
            q: int(4),
            theta: int(0),
        };
        let placement = BTreeMap::from([((1, 0), (rat(1, 8), rat(1, 8)))]);
        let lights = integral_light_assignment(&ci, &placement, &rat(1, 4)).unwrap();
        let (on_h, on_k) = lights[&(1, 0)];
        assert_eq!(on_h + on_k, 1);
        let loads = integral_light_loads(&ci, &lights, &rat(1, 4));
        let frac = placement_loads(&ci, &placement);
        for i in 0..2 {
            assert!(loads[i] <= &frac[i] + rat(1, 4));
        }
    }
}
