//! Halving `q` (light-load granularity) and `p` (heavy-mass granularity) of a
//! canonical instance by randomized rounding, repaired with Moser–Tardos
//! resampling, until both are at most `q0`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::canonical::{check_canonical, CanonicalInstance, CanonicalParams};
use crate::error::{Error, Result};
use crate::lll::{run_moser_tardos, ViolatedEvent};
use crate::rational::{int, to_f64, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct CoarsenConfig {
    /// Target granularity; both `p` and `q` end at most this.
    pub q0: u64,
    /// `c` in the per-step increment `c·√(ln x / x)`.
    pub step_coeff: f64,
    /// Largest witness size tracked; `None` means `⌈2 ln m / ln q⌉`.
    pub s_max: Option<usize>,
    /// Cap on the number of connected sets visited while enumerating.
    pub enum_budget: usize,
    pub max_resamples: usize,
    /// `δ` at which witnesses of the input instance are tracked.
    pub witness_delta: Rational,
}

impl Default for CoarsenConfig {
    fn default() -> Self {
        CoarsenConfig {
            q0: 100,
            step_coeff: 8.0,
            s_max: None,
            enum_budget: 200_000,
            max_resamples: 100_000,
            witness_delta: Rational::zero(),
        }
    }
}

impl CoarsenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q0 < 100 {
            return Err(Error::InvalidParams(format!("q0 must be at least 100, got {}", self.q0)));
        }
        if !(self.step_coeff > 0.0) || !self.step_coeff.is_finite() {
            return Err(Error::InvalidParams("step coefficient must be positive".into()));
        }
        if self.s_max == Some(0) {
            return Err(Error::InvalidParams("s_max must be at least 1".into()));
        }
        Ok(())
    }

    /// `c·√(ln x / x)` as a float.
    pub fn step_f64(&self, x: &Rational) -> f64 {
        let x = to_f64(x);
        self.step_coeff * (x.ln() / x).sqrt()
    }

    /// The increment rounded up to a multiple of `10⁻⁹`.
    pub fn step(&self, x: &Rational) -> Rational {
        let v = self.step_f64(x);
        let scaled = (v * 1e9).ceil() as i64 + 1;
        Rational::new(scaled.into(), 1_000_000_000i64.into())
    }

    pub fn s_max_for(&self, m: usize, q: &Rational) -> usize {
        self.s_max.unwrap_or_else(|| {
            let lq = to_f64(q).ln();
            if m <= 1 || lq <= 0.0 {
                1
            } else {
                ((2.0 * (m as f64).ln() / lq).ceil() as usize).max(1)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Core witnesses

/// A connected set `S` of the light load graph together with the least `|T|`
/// that makes `(S, T)` a witness; every `T ⊆ S` at least that large is one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoreWitness {
    pub s: Vec<usize>,
    pub t_min: usize,
}

/// `w[S,S]`, diagonal entries included.
pub fn w_inside(ci: &CanonicalInstance, s: &[usize]) -> Rational {
    let inside: BTreeSet<usize> = s.iter().copied().collect();
    ci.w.iter()
        .filter(|((h, k), _)| inside.contains(h) && inside.contains(k))
        .map(|(_, v)| v)
        .sum()
}

/// Least `t ≥ 0` with `t + w_ss > (2−δ)|S|`, if it does not exceed `|S|`.
pub fn least_witness_size(size: usize, w_ss: &Rational, delta: &Rational) -> Option<usize> {
    let need = (int(2) - delta) * int(size as i64) - w_ss;
    let t = if need.is_negative() {
        0
    } else {
        (need.floor().to_integer() + num_bigint::BigInt::one()).to_usize()?
    };
    (t <= size).then_some(t)
}

/// Calls `visit` once per connected vertex set of size at most `s_max`
/// (each set is grown from its smallest vertex, so none repeats).
pub fn for_each_connected_set(
    adj: &[BTreeSet<usize>],
    s_max: usize,
    budget: usize,
    mut visit: impl FnMut(&[usize]),
) -> Result<usize> {
    let n = adj.len();
    let mut count = 0usize;
    #[allow(clippy::too_many_arguments)]
    fn extend(
        root: usize,
        sub: &mut Vec<usize>,
        ext: Vec<usize>,
        adj: &[BTreeSet<usize>],
        s_max: usize,
        budget: usize,
        count: &mut usize,
        visit: &mut dyn FnMut(&[usize]),
    ) -> Result<()> {
        *count += 1;
        if *count > budget {
            return Err(Error::BudgetExceeded(format!(
                "connected-set enumeration stopped after {budget} sets"
            )));
        }
        visit(sub);
        if sub.len() == s_max {
            return Ok(());
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &adj[w] {
                if u > root
                    && !sub.contains(&u)
                    && !next.contains(&u)
                    && u != w
                    && !sub.iter().any(|&s| adj[s].contains(&u))
                {
                    next.push(u);
                }
            }
            sub.push(w);
            extend(root, sub, next, adj, s_max, budget, count, visit)?;
            sub.pop();
        }
        Ok(())
    }
    for v in 0..n {
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        let mut sub = vec![v];
        extend(v, &mut sub, ext, adj, s_max, budget, &mut count, &mut visit)?;
    }
    Ok(count)
}

/// All connected δ-witnesses with `|S| ≤ s_max`, sorted by `S`.
pub fn enumerate_core_witnesses(
    ci: &CanonicalInstance,
    delta: &Rational,
    s_max: usize,
    budget: usize,
) -> Result<Vec<CoreWitness>> {
    if s_max == 0 {
        return Err(Error::InvalidParams("s_max must be at least 1".into()));
    }
    let adj = ci.undirected_adjacency();
    let mut out = Vec::new();
    for_each_connected_set(&adj, s_max, budget, |s| {
        let mut s = s.to_vec();
        s.sort_unstable();
        if let Some(t_min) = least_witness_size(s.len(), &w_inside(ci, &s), delta) {
            out.push(CoreWitness { s, t_min });
        }
    })?;
    out.sort();
    Ok(out)
}

/// Whether `(S, T)` with `|T| = t` is a δ-witness of `ci`.
pub fn is_witness(ci: &CanonicalInstance, s: &[usize], t: usize, delta: &Rational) -> bool {
    int(t as i64) + w_inside(ci, s) > (int(2) - delta) * int(s.len() as i64)
}

// ---------------------------------------------------------------------------
// Events as linear forms in 0/1 variables

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Machine load above `1 + θ′`.
    Load,
    /// A tracked witness that stopped being one.
    Witness,
    /// A group whose z-mass fell below the coverage floor.
    Coverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Gt,
    Le,
    Lt,
}

#[derive(Clone, Debug)]
struct LinearEvent {
    kind: EventKind,
    base: Rational,
    /// `(variable, coefficient)`; the variable contributes `coef·unit` when
    /// raised.
    terms: Vec<(usize, Rational)>,
    cmp: Cmp,
    limit: Rational,
    /// Also occurs when the sum is exactly zero.
    nonzero: bool,
}

impl LinearEvent {
    fn occurs(&self, raised: &[bool], unit: &Rational) -> bool {
        let mut v = self.base.clone();
        for (var, c) in &self.terms {
            if raised[*var] {
                v += c * unit;
            }
        }
        let hit = match self.cmp {
            Cmp::Gt => v > self.limit,
            Cmp::Le => v <= self.limit,
            Cmp::Lt => v < self.limit,
        };
        hit || (self.nonzero && v.is_zero())
    }

    fn scope(&self) -> Vec<usize> {
        self.terms.iter().map(|(v, _)| *v).collect()
    }
}

/// One bad event of a reduction step, with the bound and LLL weight used in
/// its analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadEventRecord {
    pub kind: EventKind,
    /// Machine index, witness index, or group index.
    pub scope_id: usize,
    /// Variable indices the event depends on.
    pub vars: Vec<usize>,
    pub bound: f64,
    pub x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    HalveQ,
    HalveP,
}

/// Trace row for one reduction step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub kind: StepKind,
    pub p: String,
    pub q: String,
    pub theta: String,
    /// θ (and, for `HalveQ`, δ) increment of this step.
    pub increment: String,
    pub variables: usize,
    pub raised: usize,
    pub load_events: usize,
    pub witness_events: usize,
    pub coverage_events: usize,
    pub resamples: usize,
    pub resamples_by_kind: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceOutcome {
    pub ci: CanonicalInstance,
    pub record: StepRecord,
    /// Witnesses tracked on the input; each is a witness of the output at
    /// the raised δ.
    pub cores: Vec<CoreWitness>,
    pub increment: Rational,
    pub events: Vec<BadEventRecord>,
}

fn kind_name(k: EventKind) -> &'static str {
    match k {
        EventKind::Load => "load",
        EventKind::Witness => "witness",
        EventKind::Coverage => "coverage",
    }
}

fn run_events<R: Rng + ?Sized>(
    events: &[LinearEvent],
    probs: &[f64],
    unit: &Rational,
    rng: &mut R,
    max_resamples: usize,
) -> Result<(Vec<bool>, BTreeMap<String, usize>, usize)> {
    let mut raised = vec![false; probs.len()];
    let stats = run_moser_tardos(
        &mut raised,
        probs.len(),
        rng,
        max_resamples,
        |r, v, rng| r[v] = rng.gen_bool(probs[v].clamp(0.0, 1.0)),
        |r| {
            events
                .iter()
                .enumerate()
                .find(|(_, e)| e.occurs(r, unit))
                .map(|(id, e)| ViolatedEvent { id, scope: e.scope() })
        },
    )?;
    let mut by_kind = BTreeMap::new();
    for (&id, &n) in &stats.per_event {
        *by_kind.entry(kind_name(events[id].kind).to_string()).or_insert(0) += n;
    }
    Ok((raised, by_kind, stats.resamples))
}

fn precheck(ci: &CanonicalInstance, cfg: &CoarsenConfig) -> Result<()> {
    cfg.validate()?;
    check_canonical(ci, &CanonicalParams::of(ci)).into_result()
}

fn count(events: &[LinearEvent], k: EventKind) -> usize {
    events.iter().filter(|e| e.kind == k).count()
}

/// Halves `q`: each `w[h,k] < 2/q` becomes `2/q` with probability `q·w/2`
/// and `0` otherwise, resampled until no machine exceeds `1 + θ′` and every
/// tracked δ-witness stays a δ′-witness.
pub fn reduce_q<R: Rng + ?Sized>(
    ci: &CanonicalInstance,
    delta: &Rational,
    rng: &mut R,
    cfg: &CoarsenConfig,
) -> Result<ReduceOutcome> {
    precheck(ci, cfg)?;
    let q0 = int(cfg.q0 as i64);
    if ci.q < ci.p || ci.q < q0 {
        return Err(Error::Precondition(format!("halving q needs q ≥ max(p, q0); q={}, p={}", ci.q, ci.p)));
    }
    let m = ci.num_machines();
    let unit = int(2) / &ci.q;
    let inc = cfg.step(&ci.q);
    let theta2 = &ci.theta + &inc;
    let delta2 = delta + &inc;
    let one = Rational::one();

    let entries: Vec<((usize, usize), Rational)> = ci.w.iter().map(|(&k, v)| (k, v.clone())).collect();
    let mut var_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut probs = Vec::new();
    for (key, w) in &entries {
        if w < &unit {
            var_of.insert(*key, probs.len());
            probs.push(to_f64(&(w * &ci.q / int(2))));
        }
    }
    // Load of machine h: z_h + Σ_k w[k,h](1−z_h) + Σ_k w[h,k] z_k + w[h,h].
    let mut events = Vec::new();
    let mut base = ci.z.clone();
    let mut terms: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m];
    for ((h, k), w) in &entries {
        let contrib: Vec<(usize, Rational)> = if h == k {
            vec![(*h, one.clone())]
        } else {
            vec![(*k, &one - &ci.z[*k]), (*h, ci.z[*k].clone())]
        };
        for (i, c) in contrib {
            match var_of.get(&(*h, *k)) {
                Some(&v) => terms[i].push((v, c)),
                None => base[i] += w * c,
            }
        }
    }
    for h in 0..m {
        events.push(LinearEvent {
            kind: EventKind::Load,
            base: base[h].clone(),
            terms: std::mem::take(&mut terms[h]),
            cmp: Cmp::Gt,
            limit: &one + &theta2,
            nonzero: false,
        });
    }
    let s_max = cfg.s_max_for(m, &ci.q);
    let cores = enumerate_core_witnesses(ci, delta, s_max, cfg.enum_budget)?;
    for c in &cores {
        let inside: BTreeSet<usize> = c.s.iter().copied().collect();
        let mut b = int(c.t_min as i64);
        let mut t = Vec::new();
        for ((h, k), w) in &entries {
            if inside.contains(h) && inside.contains(k) {
                match var_of.get(&(*h, *k)) {
                    Some(&v) => t.push((v, one.clone())),
                    None => b += w,
                }
            }
        }
        events.push(LinearEvent {
            kind: EventKind::Witness,
            base: b,
            terms: t,
            cmp: Cmp::Le,
            limit: (int(2) - &delta2) * int(c.s.len() as i64),
            nonzero: false,
        });
    }
    let (raised, by_kind, resamples) = run_events(&events, &probs, &unit, rng, cfg.max_resamples)?;

    let mut w2 = BTreeMap::new();
    for (key, w) in entries {
        match var_of.get(&key) {
            Some(&v) if raised[v] => {
                w2.insert(key, unit.clone());
            }
            Some(_) => {}
            None => {
                w2.insert(key, w);
            }
        }
    }
    let out = CanonicalInstance { w: w2, q: &ci.q / int(2), theta: theta2, ..ci.clone() };
    check_canonical(&out, &CanonicalParams::of(&out)).into_result()?;
    debug_assert!(cores.iter().all(|c| is_witness(&out, &c.s, c.t_min, &delta2)));

    let qf = to_f64(&ci.q);
    let q2 = qf / 2.0;
    let dv = to_f64(&inc);
    let records = events
        .iter()
        .enumerate()
        .map(|(idx, e)| {
            let (scope_id, bound, x) = match e.kind {
                EventKind::Load => (idx, (-dv * dv * q2 / 3.3).exp(), qf.powf(-7.0)),
                _ => {
                    let s = cores[idx - m].s.len() as f64;
                    (idx - m, (-dv * dv * q2 * s / 4.0).exp(), qf.powf(-7.0 * s))
                }
            };
            BadEventRecord { kind: e.kind, scope_id, vars: e.scope(), bound: bound.min(1.0), x }
        })
        .collect();
    let record = StepRecord {
        kind: StepKind::HalveQ,
        p: ci.p.to_string(),
        q: ci.q.to_string(),
        theta: ci.theta.to_string(),
        increment: inc.to_string(),
        variables: probs.len(),
        raised: raised.iter().filter(|&&r| r).count(),
        load_events: count(&events, EventKind::Load),
        witness_events: count(&events, EventKind::Witness),
        coverage_events: 0,
        resamples,
        resamples_by_kind: by_kind,
    };
    Ok(ReduceOutcome { ci: out, record, cores, increment: inc, events: records })
}

/// Halves `p`: each `0 < z_h < 2/p` becomes `2/p` with probability `p·z_h/2`
/// and `0` otherwise, resampled until no machine exceeds `1 + θ′` and every
/// group keeps z-mass at least `0.2 − θ′` (and positive). Machines with
/// `z′ = 0` leave their groups; load of type `(h,k)` with `z′_k = 0` becomes
/// type `(k,k)`.
pub fn reduce_p<R: Rng + ?Sized>(ci: &CanonicalInstance, rng: &mut R, cfg: &CoarsenConfig) -> Result<ReduceOutcome> {
    precheck(ci, cfg)?;
    let q0 = int(cfg.q0 as i64);
    if ci.p < ci.q || ci.p < q0 {
        return Err(Error::Precondition(format!("halving p needs p ≥ max(q, q0); p={}, q={}", ci.p, ci.q)));
    }
    let m = ci.num_machines();
    let unit = int(2) / &ci.p;
    let inc = cfg.step(&ci.p);
    let theta2 = &ci.theta + &inc;
    let one = Rational::one();

    let mut var_of: Vec<Option<usize>> = vec![None; m];
    let mut probs = Vec::new();
    for i in 0..m {
        if ci.z[i].is_positive() && ci.z[i] < unit {
            var_of[i] = Some(probs.len());
            probs.push(to_f64(&(&ci.z[i] * &ci.p / int(2))));
        }
    }
    let in_w: Vec<Rational> = {
        let mut v = vec![Rational::zero(); m];
        for (&(h, k), w) in &ci.w {
            if h != k {
                v[k] += w;
            }
        }
        v
    };
    let mut events = Vec::new();
    for h in 0..m {
        // z′_h(1 − in_h) + in_h + w[h,h] + Σ_k w[h,k] z′_k
        let mut base = &in_w[h] + ci.w_at(h, h);
        let mut terms = Vec::new();
        let mut add = |i: usize, c: Rational, base: &mut Rational| match var_of[i] {
            Some(v) => terms.push((v, c)),
            None => *base += c * &ci.z[i],
        };
        add(h, &one - &in_w[h], &mut base);
        for (&(a, k), w) in ci.w.range((h, 0)..(h + 1, 0)) {
            if a == h && k != h {
                add(k, w.clone(), &mut base);
            }
        }
        events.push(LinearEvent {
            kind: EventKind::Load,
            base,
            terms,
            cmp: Cmp::Gt,
            limit: &one + &theta2,
            nonzero: false,
        });
    }
    let floor = Rational::new(1.into(), 5.into()) - &theta2;
    for g in &ci.groups {
        let mut base = Rational::zero();
        let mut terms = Vec::new();
        for &i in &g.machines {
            match var_of[i] {
                Some(v) => terms.push((v, one.clone())),
                None => base += &ci.z[i],
            }
        }
        events.push(LinearEvent {
            kind: EventKind::Coverage,
            base,
            terms,
            cmp: Cmp::Lt,
            limit: floor.clone(),
            nonzero: true,
        });
    }
    let (raised, by_kind, resamples) = run_events(&events, &probs, &unit, rng, cfg.max_resamples)?;

    let z2: Vec<Rational> = (0..m)
        .map(|i| match var_of[i] {
            Some(v) if raised[v] => unit.clone(),
            Some(_) => Rational::zero(),
            None => ci.z[i].clone(),
        })
        .collect();
    let mut w2: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for (&(h, k), w) in &ci.w {
        let key = if h != k && z2[k].is_zero() { (k, k) } else { (h, k) };
        *w2.entry(key).or_insert_with(Rational::zero) += w;
    }
    let mut groups = ci.groups.clone();
    for g in &mut groups {
        g.machines.retain(|&i| z2[i].is_positive());
    }
    let out = CanonicalInstance {
        groups,
        w: w2,
        z: z2,
        p: &ci.p / int(2),
        theta: theta2,
        ..ci.clone()
    };
    check_canonical(&out, &CanonicalParams::of(&out)).into_result()?;

    let pf = to_f64(&ci.p);
    let dv = to_f64(&inc);
    let bound = (-dv * dv * pf / 8.0).exp().min(1.0);
    let records = events
        .iter()
        .enumerate()
        .map(|(idx, e)| BadEventRecord {
            kind: e.kind,
            scope_id: if e.kind == EventKind::Load { idx } else { idx - m },
            vars: e.scope(),
            bound,
            x: bound.max(f64::MIN_POSITIVE) * std::f64::consts::E,
        })
        .collect();
    let record = StepRecord {
        kind: StepKind::HalveP,
        p: ci.p.to_string(),
        q: ci.q.to_string(),
        theta: ci.theta.to_string(),
        increment: inc.to_string(),
        variables: probs.len(),
        raised: raised.iter().filter(|&&r| r).count(),
        load_events: count(&events, EventKind::Load),
        witness_events: 0,
        coverage_events: count(&events, EventKind::Coverage),
        resamples,
        resamples_by_kind: by_kind,
    };
    Ok(ReduceOutcome { ci: out, record, cores: Vec::new(), increment: inc, events: records })
}

/// `w[M,h] ≤ 1.1` and `w[h,M] ≤ 1.1·p` for every machine.
pub fn degree_bounds_hold(ci: &CanonicalInstance) -> bool {
    let lim = Rational::new(11.into(), 10.into());
    let lim_out = &lim * &ci.p;
    let inw = ci.in_weight();
    let outw = ci.out_weight();
    (0..ci.num_machines()).all(|h| {
        // Diagonal load counts as neither incoming nor outgoing.
        let diag = ci.w_at(h, h);
        &inw[h] - &diag <= lim && &outw[h] - &diag <= lim_out
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarsenResult {
    pub ci: CanonicalInstance,
    pub steps: Vec<StepRecord>,
    /// Sum of θ increments.
    pub theta_increase: Rational,
    /// Sum of δ increments (q-halving steps only): a δ-good assignment of
    /// the output is `(δ − delta_increase)`-good for the input as far as the
    /// tracked witnesses go.
    pub delta_increase: Rational,
}

/// Alternates [`reduce_q`] and [`reduce_p`] until `p, q < max(…, q0)`
/// fails for both: `q ≥ max(p, q0)` halves `q`, else `p ≥ max(q, q0)` halves
/// `p`, else stop.
pub fn coarsen_pipeline<R: Rng + ?Sized>(
    ci: &CanonicalInstance,
    cfg: &CoarsenConfig,
    rng: &mut R,
) -> Result<CoarsenResult> {
    precheck(ci, cfg)?;
    let q0 = int(cfg.q0 as i64);
    let mut cur = ci.clone();
    let mut steps = Vec::new();
    let mut theta_increase = Rational::zero();
    let mut delta_increase = Rational::zero();
    let mut delta = cfg.witness_delta.clone();
    loop {
        let out = if cur.q >= cur.p && cur.q >= q0 {
            let o = reduce_q(&cur, &delta, rng, cfg)?;
            delta += &o.increment;
            delta_increase += &o.increment;
            o
        } else if cur.p >= cur.q && cur.p >= q0 {
            reduce_p(&cur, rng, cfg)?
        } else {
            break;
        };
        theta_increase += &out.increment;
        steps.push(out.record);
        cur = out.ci;
    }
    Ok(CoarsenResult { ci: cur, steps, theta_increase, delta_increase })
}

/// `Σ_k c·√(ln(2^k x0) / (2^k x0))` over `k ≥ 0`, truncated once terms drop
/// below `1e-18`; the total θ growth of halving from far above down to `x0`.
pub fn halving_increment_sum(x0: f64, coeff: f64) -> f64 {
    let mut total = 0.0;
    let mut x = x0;
    loop {
        let t = coeff * (x.ln() / x).sqrt();
        total += t;
        if t < 1e-18 {
            return total;
        }
        x *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::Group;
    use crate::goodness::delta_good_bruteforce;
    use crate::rational::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair() -> CanonicalInstance {
        CanonicalInstance {
            machines: vec!["a".into(), "b".into()],
            groups: vec![
                Group { job: "g".into(), machines: vec![0] },
                Group { job: "h".into(), machines: vec![1] },
            ],
            w: BTreeMap::from([((1, 0), rat(4, 5)), ((0, 1), rat(4, 5))]),
            z: vec![rat(1, 5), rat(1, 5)],
            p: int(5),
            q: int(2),
            theta: Rational::zero(),
        }
    }

    #[test]
    fn no_witnesses_without_load() {
        let mut ci = pair();
        ci.w.clear();
        assert!(enumerate_core_witnesses(&ci, &rat(1, 2), 3, 1000).unwrap().is_empty());
    }

    #[test]
    fn pair_witnesses_match_subsets() {
        let ci = pair();
        let d = rat(4, 5);
        let cores = enumerate_core_witnesses(&ci, &d, 2, 1000).unwrap();
        // {a}: t ≥ 1.2 → none; {b}: none; {a,b}: t + 1.6 > 2.4 → t ≥ 1.
        assert_eq!(cores, vec![CoreWitness { s: vec![0, 1], t_min: 1 }]);
        let f = crate::canonical::HeavyAssignment { machine_of: vec![0, 1] };
        let (good, _) = delta_good_bruteforce(&ci, &f, &d).unwrap();
        assert!(!good);
    }

    #[test]
    fn connected_sets_of_a_path() {
        let adj = vec![BTreeSet::from([1]), BTreeSet::from([0, 2]), BTreeSet::from([1])];
        let mut sets = Vec::new();
        let n = for_each_connected_set(&adj, 3, 100, |s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            sets.push(s)
        })
        .unwrap();
        sets.sort();
        assert_eq!(n, 6);
        assert_eq!(sets, vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![1], vec![1, 2], vec![2]]);
        assert!(matches!(
            for_each_connected_set(&adj, 3, 2, |_| {}),
            Err(Error::BudgetExceeded(_))
        ));
    }

    fn wide() -> CanonicalInstance {
        CanonicalInstance {
            machines: vec!["a".into(), "b".into(), "c".into()],
            groups: vec![Group { job: "h".into(), machines: vec![0, 1] }],
            w: BTreeMap::from([((2, 0), rat(1, 2)), ((2, 1), rat(1, 8))]),
            z: vec![rat(1, 5), rat(1, 200), Rational::zero()],
            p: int(200),
            q: int(8),
            theta: Rational::zero(),
        }
    }

    #[test]
    fn reduce_p_rounds_small_mass() {
        let ci = wide();
        check_canonical(&ci, &CanonicalParams::of(&ci)).into_result().unwrap();
        let cfg = CoarsenConfig::default();
        for seed in 0..20 {
            let out = reduce_p(&ci, &mut ChaCha8Rng::seed_from_u64(seed), &cfg).unwrap();
            assert_eq!(out.ci.p, int(100));
            let z = &out.ci.z[1];
            assert!(z.is_zero() || *z == rat(1, 100));
            if z.is_zero() {
                assert_eq!(out.ci.groups[0].machines, vec![0]);
                assert_eq!(out.ci.w_at(1, 1), rat(1, 8));
            }
        }
    }

    #[test]
    fn identity_below_q0() {
        let ci = pair();
        let out = coarsen_pipeline(&ci, &CoarsenConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.ci, ci);
        assert!(out.steps.is_empty());
    }

    #[test]
    fn reduce_q_keeps_large_entries() {
        let mut ci = wide();
        ci.p = int(100);
        ci.z[1] = rat(1, 100);
        ci.q = int(400);
        ci.w.insert((2, 1), rat(1, 400));
        let cfg = CoarsenConfig::default();
        let out = reduce_q(&ci, &Rational::zero(), &mut ChaCha8Rng::seed_from_u64(3), &cfg).unwrap();
        assert_eq!(out.ci.q, int(200));
        assert_eq!(out.ci.w_at(2, 0), rat(1, 2));
        let w = out.ci.w_at(2, 1);
        assert!(w.is_zero() || w == rat(1, 200));
    }

    #[test]
    fn increment_sum_is_finite() {
        let s = halving_increment_sum(100.0, 8.0);
        assert!(s > 8.0 * (100f64.ln() / 100.0).sqrt());
        assert!(s.is_finite());
    }
}
