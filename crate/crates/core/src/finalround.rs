//! Final rounding of a canonical instance with small `p, q`: classify
//! machines and edges, break red cycles, sample heavy jobs proportionally to
//! `z`, and resample until no bad event occurs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{lst_round, GapInstance};
use crate::canonical::{check_canonical, CanonicalInstance, CanonicalParams, HeavyAssignment};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::goodness::{deficiencies, is_delta_good};
use crate::lll::{run_moser_tardos, ViolatedEvent};
use crate::rational::{from_f64_exact, int, rat, to_f64, Rational};

/// Tunable constants. Unset derived values follow `δ0 = 1/(34 c2 c3 ln q)`,
/// `δ = 1/(340 c2² c3 ln³ q)` and `L = ⌈10 ln q⌉`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinalConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub l: Option<usize>,
    pub delta0: Option<f64>,
    pub delta: Option<f64>,
    pub max_resamples: usize,
    /// Largest accepted `θ` (exclusive).
    pub theta_limit: f64,
    /// Skip the `θ` limit.
    pub allow_large_theta: bool,
}

impl Default for FinalConstants {
    fn default() -> Self {
        FinalConstants {
            c1: 12.0,
            c2: 300.0,
            c3: 200.0,
            l: None,
            delta0: None,
            delta: None,
            max_resamples: 100_000,
            theta_limit: 0.05,
            allow_large_theta: false,
        }
    }
}

/// Constants evaluated at a particular `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub q: Rational,
    pub ln_q: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub l: usize,
    pub delta0: Rational,
    pub delta: Rational,
    /// Edges with `w ≥ dense` are dense.
    pub dense: Rational,
    /// Machines with dense out-mass `≥ out_dense` are out-dense.
    pub out_dense: Rational,
    pub a_limit: Rational,
    pub c_limit: f64,
    pub d_limit: Rational,
}

fn exact(x: f64, what: &str) -> Result<Rational> {
    from_f64_exact(x).map_err(|_| Error::InvalidParams(format!("{what} is not finite")))
}

impl FinalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.l == Some(0) {
            return Err(Error::InvalidParams("L must be positive".into()));
        }
        for (name, v) in [("delta0", self.delta0), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::InvalidParams(format!("{name} must lie in (0,1)")));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, q: &Rational) -> Result<Resolved> {
        self.validate()?;
        let ln_q = to_f64(q).ln();
        if !(ln_q > 0.0) {
            return Err(Error::InvalidParams(format!("q must exceed 1, got {q}")));
        }
        let delta0 = self.delta0.unwrap_or(1.0 / (34.0 * self.c2 * self.c3 * ln_q));
        let delta = self
            .delta
            .unwrap_or(1.0 / (340.0 * self.c2 * self.c2 * self.c3 * ln_q.powi(3)));
        Ok(Resolved {
            q: q.clone(),
            ln_q,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            l: self.l.unwrap_or((10.0 * ln_q).ceil() as usize).max(1),
            delta0: exact(delta0, "delta0")?,
            delta: exact(delta, "delta")?,
            dense: exact(1.0 / (self.c2 * ln_q), "dense threshold")?,
            out_dense: exact(1.0 / self.c3, "out-dense threshold")?,
            a_limit: exact(self.c1 * ln_q, "load threshold")?,
            c_limit: 17.0 * self.c2 * ln_q,
            d_limit: rat(1, 10),
        })
    }
}

impl Resolved {
    /// `δ·δ0 / (2 c1 ln q)`: goodness when no bad event occurs.
    pub fn delta_star(&self) -> Result<Rational> {
        let denom = exact(2.0 * self.c1 * self.ln_q, "2 c1 ln q")?;
        Ok(&self.delta * &self.delta0 / denom)
    }
}

// ---------------------------------------------------------------------------
// Removing θ

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInstance {
    /// `(q′, q′, 0)` form with `w` scaled by `0.6/(0.6+θ)`.
    pub ci: CanonicalInstance,
    /// `4θ`: charged against the final goodness.
    pub surcharge: Rational,
    pub factor: Rational,
}

/// Scales light load by `0.6/(0.6+θ)` so that loads are at most one, and
/// raises `q` to `(0.6+θ)·q0/0.6` with `q0 = max(p, q)`.
pub fn scale_theta_to_zero(ci: &CanonicalInstance, consts: &FinalConstants) -> Result<ScaledInstance> {
    if ci.theta.is_negative() {
        return Err(Error::Precondition("θ must be nonnegative".into()));
    }
    if !consts.allow_large_theta && to_f64(&ci.theta) >= consts.theta_limit {
        return Err(Error::Precondition(format!(
            "θ = {} is not below {}; pass the override to continue",
            ci.theta, consts.theta_limit
        )));
    }
    let six = rat(3, 5);
    let factor = &six / (&six + &ci.theta);
    let q0 = std::cmp::max(ci.p.clone(), ci.q.clone());
    let q2 = &q0 / &factor;
    let w = ci.w.iter().map(|(&k, v)| (k, v * &factor)).collect();
    let out = CanonicalInstance {
        w,
        p: q2.clone(),
        q: q2,
        theta: Rational::zero(),
        ..ci.clone()
    };
    let params = CanonicalParams {
        coverage_floor: Some(rat(1, 5) - &ci.theta),
        ..CanonicalParams::of(&out)
    };
    check_canonical(&out, &params).into_result()?;
    Ok(ScaledInstance { ci: out, surcharge: int(4) * &ci.theta, factor })
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub phi: Vec<Rational>,
    pub red: Vec<bool>,
    /// Off-diagonal edges with `w ≥ 1/(c2 ln q)`.
    pub dense: BTreeSet<(usize, usize)>,
    pub in_dense: Vec<bool>,
    pub out_dense: Vec<bool>,
    /// Red edge into each machine, by source.
    pub red_parent: Vec<Option<usize>>,
}

impl Classification {
    pub fn red_edges(&self) -> Vec<(usize, usize)> {
        self.red_parent
            .iter()
            .enumerate()
            .filter_map(|(h, k)| k.map(|k| (k, h)))
            .collect()
    }
}

/// Labels machines and edges; red edges are left empty (see
/// [`color_red_edges`]).
pub fn classify(ci: &CanonicalInstance, r: &Resolved) -> Classification {
    let m = ci.num_machines();
    let phi = deficiencies(ci);
    let red = (0..m).map(|h| &phi[h] + &ci.z[h] < r.delta0).collect();
    let dense: BTreeSet<(usize, usize)> = ci
        .w
        .iter()
        .filter(|(&(h, k), w)| h != k && **w >= r.dense)
        .map(|(&e, _)| e)
        .collect();
    let mut in_dense = vec![false; m];
    let mut out_mass = vec![Rational::zero(); m];
    for &(h, k) in &dense {
        in_dense[k] = true;
        out_mass[h] += &ci.z[k];
    }
    let out_dense = out_mass.iter().map(|v| v >= &r.out_dense).collect();
    Classification { phi, red, dense, in_dense, out_dense, red_parent: vec![None; m] }
}

/// For each red in-dense machine `h`, picks its dense in-edge `(k,h)` of
/// least `k` and colors it red when `k` is red and out-sparse.
pub fn color_red_edges(_ci: &CanonicalInstance, cls: &mut Classification) {
    let mut chosen: Vec<Option<usize>> = vec![None; cls.red.len()];
    for &(k, h) in &cls.dense {
        if chosen[h].is_none() {
            chosen[h] = Some(k);
        }
    }
    for h in 0..cls.red.len() {
        cls.red_parent[h] = match chosen[h] {
            Some(k) if cls.red[h] && cls.red[k] && !cls.out_dense[k] => Some(k),
            _ => None,
        };
    }
}

/// Directed red cycles, each listed from its least machine.
pub fn red_cycles(parent: &[Option<usize>], allowed: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let n = parent.len();
    let step = |h: usize| parent[h].filter(|&k| allowed(k) && allowed(h));
    // 0 = unvisited, 1 = on the current walk, 2 = done
    let mut state = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = Some(start);
        while let Some(h) = cur {
            if state[h] == 2 {
                break;
            }
            if state[h] == 1 {
                let pos = walk.iter().position(|&v| v == h).expect("on walk");
                let mut cyc: Vec<usize> = walk[pos..].to_vec();
                let min_pos = cyc.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap_or(0);
                cyc.rotate_left(min_pos);
                cycles.push(cyc);
                break;
            }
            state[h] = 1;
            walk.push(h);
            cur = step(h);
        }
        for v in walk {
            state[v] = 2;
        }
    }
    cycles.sort();
    cycles
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruning {
    /// `M′_j ⊆ M_j`, aligned with the groups.
    pub groups: Vec<Vec<usize>>,
    pub removed: Vec<usize>,
    pub cycles: usize,
    pub skipped: usize,
    /// Every group kept at least `0.49` of its z-mass.
    pub mass_ok: bool,
}

/// Removes one machine of every red cycle from the groups, choosing which by
/// slot rounding of the uniform fractional choice. Cycles with two machines
/// of one group, or with a machine in no group, never lie inside `X`.
pub fn eliminate_red_cycles(ci: &CanonicalInstance, cls: &Classification) -> Result<Pruning> {
    let owner = ci.group_of();
    let cycles = red_cycles(&cls.red_parent, |_| true);
    let mut items: Vec<&Vec<usize>> = Vec::new();
    let mut skipped = 0;
    for c in &cycles {
        let gs: Vec<Option<usize>> = c.iter().map(|&h| owner[h]).collect();
        let distinct: BTreeSet<usize> = gs.iter().flatten().copied().collect();
        if gs.iter().any(Option::is_none) || distinct.len() < c.len() {
            skipped += 1;
        } else {
            items.push(c);
        }
    }
    let mut groups: Vec<Vec<usize>> = ci.groups.iter().map(|g| g.machines.clone()).collect();
    let mut removed = Vec::new();
    if !items.is_empty() {
        let gap = GapInstance {
            groups: ci.groups.len(),
            loads: items
                .iter()
                .map(|c| c.iter().map(|&h| (owner[h].expect("checked"), ci.z[h].clone())).collect())
                .collect(),
        };
        let frac: Vec<BTreeMap<usize, Rational>> = items
            .iter()
            .map(|c| {
                let share = Rational::new(BigInt::one(), BigInt::from(c.len()));
                c.iter().map(|&h| (owner[h].expect("checked"), share.clone())).collect()
            })
            .collect();
        let assign = lst_round(&gap, &frac)?;
        for (c, &g) in items.iter().zip(&assign) {
            let h = *c.iter().find(|&&h| owner[h] == Some(g)).ok_or_else(|| {
                Error::Internal("cycle assigned to a group it does not meet".into())
            })?;
            groups[g].retain(|&i| i != h);
            removed.push(h);
        }
    }
    removed.sort_unstable();
    let keep = rat(49, 100);
    let mass_ok = ci.groups.iter().zip(&groups).all(|(g, kept)| {
        let total: Rational = g.machines.iter().map(|&i| &ci.z[i]).sum();
        let left: Rational = kept.iter().map(|&i| &ci.z[i]).sum();
        left >= &keep * total
    });
    if let Some(g) = groups.iter().position(Vec::is_empty) {
        return Err(Error::Internal(format!("red cycle pruning emptied group {}", ci.groups[g].job)));
    }
    Ok(Pruning { groups, removed, cycles: cycles.len(), skipped, mass_ok })
}

/// Whether red edges inside `keep` contain a cycle.
pub fn has_red_cycle_within(cls: &Classification, keep: &[bool]) -> bool {
    !red_cycles(&cls.red_parent, |h| keep[h]).is_empty()
}

// ---------------------------------------------------------------------------
// Sampling

/// Draws a machine of `machines` with probability exactly proportional to
/// `z`.
pub fn sample_proportional<R: Rng + ?Sized>(machines: &[usize], z: &[Rational], rng: &mut R) -> Result<usize> {
    if machines.is_empty() {
        return Err(Error::Precondition("cannot sample from an empty group".into()));
    }
    if machines.len() == 1 {
        return Ok(machines[0]);
    }
    let lcm = machines.iter().fold(BigInt::one(), |acc, &i| acc.lcm(z[i].denom()));
    let weights: Vec<BigInt> = machines.iter().map(|&i| z[i].numer() * (&lcm / z[i].denom())).collect();
    let total: BigInt = weights.iter().sum();
    if total.sign() != Sign::Plus || weights.iter().any(|w| w.is_negative()) {
        return Err(Error::Precondition("group has no positive mass".into()));
    }
    let mut r = rng.gen_biguint_below(total.magnitude());
    for (&i, w) in machines.iter().zip(&weights) {
        let w = w.magnitude();
        if &r < w {
            return Ok(i);
        }
        r -= w;
    }
    unreachable!("draw below total weight")
}

/// Probability that machine `i` receives a heavy job.
pub fn inclusion_probabilities(ci: &CanonicalInstance, groups: &[Vec<usize>]) -> Vec<Rational> {
    let mut p = vec![Rational::zero(); ci.num_machines()];
    for g in groups {
        let total: Rational = g.iter().map(|&i| &ci.z[i]).sum();
        if total.is_positive() {
            for &i in g {
                p[i] = &ci.z[i] / &total;
            }
        }
    }
    p
}

// ---------------------------------------------------------------------------
// Bad events

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BadKind {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadEvent {
    pub kind: BadKind,
    /// Machine `h` for A/C/D; least machine of the component for B.
    pub at: usize,
    /// Machines whose heavy-job status the event depends on.
    pub relevant: Vec<usize>,
}

/// Connected components of `X ∩ R` under red edges, as sorted lists.
pub fn red_components(cls: &Classification, xr: &[bool]) -> Vec<Vec<usize>> {
    let n = xr.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, h) in cls.red_edges() {
        if xr[k] && xr[h] {
            adj[k].push(h);
            adj[h].push(k);
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !xr[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    comp.push(b);
                    queue.push_back(b);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// All events that occur under `f`, ordered by kind then machine.
pub fn detect_bad_events(
    ci: &CanonicalInstance,
    cls: &Classification,
    r: &Resolved,
    f: &HeavyAssignment,
) -> Vec<BadEvent> {
    let m = ci.num_machines();
    let x = f.image(m);
    let xr: Vec<bool> = (0..m).map(|i| x[i] && cls.red[i]).collect();
    let one = Rational::one();
    let mut a_sum = vec![Rational::zero(); m];
    let mut c_count = vec![0usize; m];
    let mut d_sum = vec![Rational::zero(); m];
    let mut out_n: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut dense_out: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut both_n: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (&(h, k), w) in &ci.w {
        if h == k {
            continue;
        }
        out_n[h].push(k);
        both_n[h].insert(k);
        both_n[k].insert(h);
        if cls.dense.contains(&(h, k)) {
            dense_out[h].push(k);
        }
        if xr[k] {
            a_sum[h] += w;
            if cls.dense.contains(&(h, k)) {
                c_count[h] += 1;
            }
            // Machine h's D-sum counts out-edges to X∩R ...
            d_sum[h] += w * &ci.z[k];
        }
        if xr[h] {
            // ... and in-edges from X∩R.
            d_sum[k] += w * (&one - &ci.z[k]);
        }
    }
    let mut out = Vec::new();
    for h in 0..m {
        if a_sum[h] > r.a_limit {
            out.push(BadEvent { kind: BadKind::A, at: h, relevant: out_n[h].clone() });
        }
    }
    for comp in red_components(cls, &xr) {
        if comp.len() >= r.l {
            out.push(BadEvent { kind: BadKind::B, at: comp[0], relevant: comp });
        }
    }
    for h in 0..m {
        if c_count[h] as f64 > r.c_limit {
            out.push(BadEvent { kind: BadKind::C, at: h, relevant: dense_out[h].clone() });
        }
    }
    for h in 0..m {
        if !cls.in_dense[h] && d_sum[h] > r.d_limit {
            out.push(BadEvent { kind: BadKind::D, at: h, relevant: both_n[h].iter().copied().collect() });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Conditions that imply goodness

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarCheck {
    /// `Σ_{k∈X∩R} w[h,k] ≤ c1 ln q` for every `h`.
    pub load_ok: bool,
    /// `min_{T⊆X∩R} φ(T) + z(T) + bnd(T) − δ|T|` (zero for `T = ∅`).
    pub min_excess: Rational,
    pub subset_ok: bool,
}

/// Checks the two conditions under which `f` is `δ·δ0/(2 c1 ln q)`-good.
/// The subset condition is a minimum cut: `T` is the source side.
pub fn check_star_conditions(
    ci: &CanonicalInstance,
    cls: &Classification,
    r: &Resolved,
    f: &HeavyAssignment,
    delta: &Rational,
) -> StarCheck {
    let m = ci.num_machines();
    let x = f.image(m);
    let xr: Vec<bool> = (0..m).map(|i| x[i] && cls.red[i]).collect();
    let mut load = vec![Rational::zero(); m];
    for (&(h, k), w) in &ci.w {
        if h != k && xr[k] {
            load[h] += w;
        }
    }
    let load_ok = load.iter().all(|l| l <= &r.a_limit);

    let one = Rational::one();
    let (source, sink) = (m, m + 1);
    let mut net = FlowNetwork::new(m + 2, source, sink);
    let mut constant = Rational::zero();
    for h in (0..m).filter(|&h| xr[h]) {
        let c = &cls.phi[h] + &ci.z[h] - delta;
        if c.is_positive() {
            net.add_arc(h, sink, c);
        } else if c.is_negative() {
            constant += &c;
            net.add_arc(source, h, -c);
        }
    }
    // a[h→k] = w[k,h](1−z_h) + w[h,k] z_k is paid when h ∈ T and k ∉ T.
    let mut pair: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for (&(h, k), w) in &ci.w {
        if h == k {
            continue;
        }
        if xr[k] {
            *pair.entry((k, h)).or_insert_with(Rational::zero) += w * (&one - &ci.z[k]);
        }
        if xr[h] {
            *pair.entry((h, k)).or_insert_with(Rational::zero) += w * &ci.z[k];
        }
    }
    for ((a, b), v) in pair {
        if v.is_positive() {
            net.add_arc(a, if xr[b] { b } else { sink }, v);
        }
    }
    let min_excess = net.max_flow().value + constant;
    StarCheck { load_ok, subset_ok: !min_excess.is_negative(), min_excess }
}

// ---------------------------------------------------------------------------
// Driver

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalStats {
    pub red: usize,
    pub dense_edges: usize,
    pub red_edges: usize,
    pub red_cycles: usize,
    pub skipped_cycles: usize,
    pub removed: usize,
    pub pruning_mass_ok: bool,
    pub resamples: usize,
    pub resamples_by_kind: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinalRoundResult {
    pub f: HeavyAssignment,
    /// `δ·δ0/(2 c1 ln q)`.
    pub delta_star: Rational,
    /// `4θ`.
    pub surcharge: Rational,
    /// `delta_star − surcharge`.
    pub delta_report: Rational,
    /// `is_delta_good(input, f, delta_report)`.
    pub verified: bool,
    pub stars: StarCheck,
    pub stats: FinalStats,
    pub resolved: Resolved,
}

const KIND_SLOTS: usize = 4;

fn kind_of(id: usize) -> BadKind {
    [BadKind::A, BadKind::B, BadKind::C, BadKind::D][id % KIND_SLOTS]
}

pub fn final_round<R: Rng + ?Sized>(
    ci: &CanonicalInstance,
    rng: &mut R,
    consts: &FinalConstants,
) -> Result<FinalRoundResult> {
    check_canonical(ci, &CanonicalParams::of(ci)).into_result()?;
    let scaled = scale_theta_to_zero(ci, consts)?;
    let sc = &scaled.ci;
    let r = consts.resolve(&sc.q)?;
    let mut cls = classify(sc, &r);
    color_red_edges(sc, &mut cls);
    let pruning = eliminate_red_cycles(sc, &cls)?;
    let owner = sc.group_of();

    let mut f = HeavyAssignment { machine_of: vec![0; sc.groups.len()] };
    let groups = &pruning.groups;
    let stats = run_moser_tardos(
        &mut f,
        groups.len(),
        rng,
        consts.max_resamples,
        |f, j, rng| f.machine_of[j] = sample_proportional(&groups[j], &sc.z, rng).expect("nonempty groups"),
        |f| {
            detect_bad_events(sc, &cls, &r, f).into_iter().next().map(|e| {
                let scope: BTreeSet<usize> = e.relevant.iter().filter_map(|&i| owner[i]).collect();
                ViolatedEvent { id: e.at * KIND_SLOTS + e.kind as usize, scope: scope.into_iter().collect() }
            })
        },
    )?;
    let mut by_kind = BTreeMap::new();
    for (&id, &n) in &stats.per_event {
        *by_kind.entry(format!("{:?}", kind_of(id))).or_insert(0) += n;
    }

    let delta_star = r.delta_star()?;
    let delta_report = &delta_star - &scaled.surcharge;
    let verified = is_delta_good(ci, &f, &delta_report)?.good;
    let stars = check_star_conditions(sc, &cls, &r, &f, &r.delta);
    Ok(FinalRoundResult {
        f,
        delta_star,
        surcharge: scaled.surcharge.clone(),
        delta_report,
        verified,
        stars,
        stats: FinalStats {
            red: cls.red.iter().filter(|&&b| b).count(),
            dense_edges: cls.dense.len(),
            red_edges: cls.red_edges().len(),
            red_cycles: pruning.cycles,
            skipped_cycles: pruning.skipped,
            removed: pruning.removed.len(),
            pruning_mass_ok: pruning.mass_ok,
            resamples: stats.resamples,
            resamples_by_kind: by_kind,
        },
        resolved: r,
    })
}

// ---------------------------------------------------------------------------
// Branching-process bound on red trees

/// An undirected tree on `0..n`, rooted at `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl RootedTree {
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut kids = vec![Vec::new(); self.n];
        let mut seen = vec![false; self.n];
        seen[self.root] = true;
        let mut queue = VecDeque::from([self.root]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    kids[a].push(b);
                    queue.push_back(b);
                }
            }
        }
        kids
    }

    /// Connected vertex sets containing the root, of exactly `size` nodes.
    pub fn rooted_sets(&self, size: usize) -> Vec<Vec<usize>> {
        let kids = self.children();
        let mut out = Vec::new();
        fn grow(set: &mut Vec<usize>, frontier: Vec<usize>, size: usize, kids: &[Vec<usize>], out: &mut Vec<Vec<usize>>) {
            if set.len() == size {
                let mut s = set.clone();
                s.sort_unstable();
                out.push(s);
                return;
            }
            // Branch on the first frontier vertex: take it or drop it for good.
            let Some((&v, rest)) = frontier.split_first() else { return };
            let mut with = rest.to_vec();
            with.extend(&kids[v]);
            set.push(v);
            grow(set, with, size, kids, out);
            set.pop();
            grow(set, rest.to_vec(), size, kids, out);
        }
        if size >= 1 && self.n > 0 {
            grow(&mut vec![self.root], kids[self.root].clone(), size, &kids, &mut out);
        }
        out
    }
}

/// `Σ_{S ∋ root, |S| = L, S connected} Π_{i∈S} p_i`.
pub fn rooted_set_probability_sum(tree: &RootedTree, p: &[f64], size: usize) -> f64 {
    tree.rooted_sets(size).iter().map(|s| s.iter().map(|&i| p[i]).product::<f64>()).sum()
}

/// Probability that the branching process (root kept w.p. `4p_root`, each
/// child of a kept node kept w.p. `4p`) yields exactly `s`.
pub fn branching_probability(tree: &RootedTree, p: &[f64], s: &[usize]) -> f64 {
    let kids = tree.children();
    let inside: BTreeSet<usize> = s.iter().copied().collect();
    if !inside.contains(&tree.root) {
        return 1.0 - 4.0 * p[tree.root];
    }
    let mut prob = 1.0;
    for &v in s {
        prob *= 4.0 * p[v];
        for &u in &kids[v] {
            if !inside.contains(&u) {
                prob *= 1.0 - 4.0 * p[u];
            }
        }
    }
    prob
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::Group;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_green() -> CanonicalInstance {
        CanonicalInstance {
            machines: vec!["a".into(), "b".into(), "c".into()],
            groups: vec![Group { job: "h".into(), machines: vec![0, 1] }],
            w: BTreeMap::from([((2, 0), rat(1, 4)), ((2, 1), rat(1, 4))]),
            z: vec![rat(1, 5), rat(1, 5), Rational::zero()],
            p: int(100),
            q: int(100),
            theta: Rational::zero(),
        }
    }

    #[test]
    fn theta_zero_is_identity() {
        let ci = all_green();
        let s = scale_theta_to_zero(&ci, &FinalConstants::default()).unwrap();
        assert_eq!(s.ci.w, ci.w);
        assert_eq!(s.ci.q, int(100));
        assert!(s.surcharge.is_zero());
        let mut big = ci.clone();
        big.theta = rat(1, 20);
        assert!(scale_theta_to_zero(&big, &FinalConstants::default()).is_err());
    }

    #[test]
    fn isolated_zero_machine_is_green() {
        let mut ci = all_green();
        ci.machines.push("d".into());
        ci.z.push(Rational::zero());
        let r = FinalConstants::default().resolve(&ci.q).unwrap();
        let cls = classify(&ci, &r);
        assert_eq!(cls.phi[3], Rational::one());
        assert!(!cls.red[3]);
    }

    #[test]
    fn all_green_accepts_first_sample() {
        let ci = all_green();
        let out = final_round(&ci, &mut ChaCha8Rng::seed_from_u64(1), &FinalConstants::default()).unwrap();
        assert_eq!(out.stats.resamples, 0);
        assert_eq!(out.stats.red, 0);
        assert!(out.verified);
        assert!(out.stars.load_ok && out.stars.subset_ok);
    }

    #[test]
    fn proportional_sampling_of_singleton() {
        let z = vec![rat(1, 3)];
        assert_eq!(sample_proportional(&[0], &z, &mut ChaCha8Rng::seed_from_u64(0)).unwrap(), 0);
        assert!(sample_proportional(&[], &z, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn functional_graph_cycles() {
        // 0→1→2→0, 3→4
        let parent = vec![Some(2), Some(0), Some(1), None, Some(3)];
        assert_eq!(red_cycles(&parent, |_| true), vec![vec![0, 2, 1]]);
        assert!(red_cycles(&parent, |h| h != 1).is_empty());
    }

    #[test]
    fn path_rooted_sets() {
        let t = RootedTree { n: 4, edges: vec![(0, 1), (1, 2), (0, 3)], root: 0 };
        let sets = t.rooted_sets(2);
        assert_eq!(sets, vec![vec![0, 1], vec![0, 3]]);
        assert_eq!(t.rooted_sets(4).len(), 1);
    }
}
