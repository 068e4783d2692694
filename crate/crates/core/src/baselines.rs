//! Reference algorithms: the slot-matching (2−ε)-approximation, rounding for
//! generalized assignment, and an exact optimum by enumeration.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::instance::{validate_instance, Instance, Job, Schedule};
use crate::rational::{floor_int, int, Rational};

// ---------------------------------------------------------------------------
// Bipartite matching

/// Maximum matching by Hopcroft–Karp. Returns, for each left vertex, its
/// matched right vertex.
pub fn hopcroft_karp(left: usize, right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let mut match_l: Vec<Option<usize>> = vec![None; left];
    let mut match_r: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![INF; left];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    None => found = true,
                    Some(u2) if dist[u2] == INF => {
                        dist[u2] = dist[u] + 1;
                        queue.push_back(u2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return match_l;
        }
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            match_l: &mut [Option<usize>],
            match_r: &mut [Option<usize>],
        ) -> bool {
            for &v in &adj[u] {
                let ok = match match_r[v] {
                    None => true,
                    Some(u2) => dist[u2] == dist[u] + 1 && augment(u2, adj, dist, match_l, match_r),
                };
                if ok {
                    match_l[u] = Some(v);
                    match_r[v] = Some(u);
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..left {
            if match_l[u].is_none() {
                augment(u, adj, &mut dist, &mut match_l, &mut match_r);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Slot matching

/// Per machine: `⌊T⌋` heavy slots (any eligible job) and `⌊T/ε⌋ − ⌊T⌋` light
/// slots (light jobs only). Returns `None` when no matching covers all jobs.
pub fn matching_baseline(inst: &Instance, t: &Rational) -> Result<Option<Schedule>> {
    validate_instance(inst).into_result()?;
    if !t.is_positive() {
        return Err(Error::InvalidParams("T must be positive".into()));
    }
    let n_jobs = inst.heavy.len() + inst.light.len();
    let cap = |v: Rational| -> usize {
        let f = floor_int(&v);
        usize::try_from(f).unwrap_or(usize::MAX).min(n_jobs)
    };
    let heavy_slots = cap(t.clone());
    let all_slots = cap(t / &inst.eps);
    let light_slots = all_slots.saturating_sub(heavy_slots);
    // Right vertices: machine-major, heavy slots first.
    let per_machine = heavy_slots + light_slots;
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n_jobs);
    for job in &inst.heavy {
        adj.push(
            job.eligible
                .iter()
                .flat_map(|&i| (0..heavy_slots).map(move |s| i * per_machine + s))
                .collect(),
        );
    }
    for job in &inst.light {
        adj.push(
            job.eligible
                .iter()
                .flat_map(|&i| (0..per_machine).map(move |s| i * per_machine + s))
                .collect(),
        );
    }
    let matching = hopcroft_karp(n_jobs, inst.num_machines() * per_machine, &adj);
    if matching.iter().any(Option::is_none) {
        return Ok(None);
    }
    let mut sched = Schedule::new();
    for (idx, (_, job)) in inst.jobs().enumerate() {
        sched.assign(job.id.clone(), matching[idx].expect("all matched") / per_machine);
    }
    Ok(Some(sched))
}

/// Every value `a + b·ε` with `0 ≤ a ≤ #heavy`, `0 ≤ b ≤ #light`, sorted.
pub fn candidate_makespans(inst: &Instance) -> Vec<Rational> {
    let mut set = BTreeSet::new();
    for a in 0..=inst.heavy.len() {
        for b in 0..=inst.light.len() {
            set.insert(int(a as i64) + &inst.eps * int(b as i64));
        }
    }
    set.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineResult {
    /// Smallest candidate `T` at which the slot matching exists.
    pub t: Rational,
    pub schedule: Schedule,
    pub makespan: Rational,
}

/// Binary search over [`candidate_makespans`] for the smallest feasible `T`.
pub fn matching_baseline_search(inst: &Instance) -> Result<Option<BaselineResult>> {
    let cands: Vec<Rational> = candidate_makespans(inst).into_iter().filter(|t| t.is_positive()).collect();
    if inst.heavy.is_empty() && inst.light.is_empty() {
        return Ok(Some(BaselineResult { t: Rational::zero(), schedule: Schedule::new(), makespan: Rational::zero() }));
    }
    let (mut lo, mut hi) = (0usize, cands.len());
    let mut best = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match matching_baseline(inst, &cands[mid])? {
            Some(s) => {
                best = Some((cands[mid].clone(), s));
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    match best {
        None => Ok(None),
        Some((t, schedule)) => {
            let makespan = crate::instance::makespan(inst, &schedule)?;
            Ok(Some(BaselineResult { t, schedule, makespan }))
        }
    }
}

// ---------------------------------------------------------------------------
// Generalized assignment rounding

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapInstance {
    pub groups: usize,
    /// Per item: eligible group → load. Missing groups are excluded.
    pub loads: Vec<BTreeMap<usize, Rational>>,
}

impl GapInstance {
    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.loads.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidParams(format!("item {i} has no eligible group")));
            }
            if l.keys().any(|&g| g >= self.groups) || l.values().any(|v| v.is_negative()) {
                return Err(Error::InvalidParams(format!("item {i} has a bad load entry")));
            }
        }
        Ok(())
    }

    pub fn fractional_loads(&self, frac: &[BTreeMap<usize, Rational>]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.groups];
        for (l, y) in self.loads.iter().zip(frac) {
            for (g, v) in y {
                out[*g] += v * &l[g];
            }
        }
        out
    }

    pub fn integral_loads(&self, assign: &[usize]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.groups];
        for (l, &g) in self.loads.iter().zip(assign) {
            out[g] += &l[&g];
        }
        out
    }
}

/// Slot rounding for generalized assignment: every group's integral load is
/// at most its fractional load plus the largest load of an item it could
/// receive. Each group gets `⌈Σ y⌉` unit slots filled by items in decreasing
/// load order; an item-saturating matching on the slot support exists and is
/// returned.
pub fn lst_round(gap: &GapInstance, frac: &[BTreeMap<usize, Rational>]) -> Result<Vec<usize>> {
    gap.validate()?;
    if frac.len() != gap.loads.len() {
        return Err(Error::InvalidParams("fractional solution has the wrong item count".into()));
    }
    for (i, y) in frac.iter().enumerate() {
        let s: Rational = y.values().sum();
        if s != Rational::one() || y.values().any(|v| v.is_negative()) {
            return Err(Error::InvalidParams(format!("item {i} is not fully and nonnegatively assigned")));
        }
        if y.iter().any(|(g, v)| v.is_positive() && !gap.loads[i].contains_key(g)) {
            return Err(Error::InvalidParams(format!("item {i} uses an excluded group")));
        }
    }
    let mut slot_group = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); frac.len()];
    for g in 0..gap.groups {
        let mut items: Vec<(Rational, usize, Rational)> = frac
            .iter()
            .enumerate()
            .filter_map(|(i, y)| y.get(&g).filter(|v| v.is_positive()).map(|v| (gap.loads[i][&g].clone(), i, v.clone())))
            .collect();
        items.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut room = Rational::zero();
        for (_, i, mut v) in items {
            while v.is_positive() {
                if room.is_zero() {
                    slot_group.push(g);
                    room = Rational::one();
                }
                let slot = slot_group.len() - 1;
                if adj[i].last() != Some(&slot) {
                    adj[i].push(slot);
                }
                let take = if v < room { v.clone() } else { room.clone() };
                v -= &take;
                room -= &take;
            }
        }
    }
    let matching = hopcroft_karp(frac.len(), slot_group.len(), &adj);
    matching
        .iter()
        .map(|m| m.map(|s| slot_group[s]))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Internal("slot rounding left an item unmatched".into()))
}

// ---------------------------------------------------------------------------
// Fallback: fractional assignment at the smallest feasible T, then rounding.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FallbackResult {
    /// Smallest `T` for which jobs fit fractionally with loads `≤ T`.
    pub lp_bound: Rational,
    pub schedule: Schedule,
    pub makespan: Rational,
}

fn fractional_assignment_at(inst: &Instance, t: &Rational) -> (bool, Vec<BTreeMap<usize, Rational>>, Vec<usize>) {
    let jobs: Vec<(&Job, Rational)> = inst.jobs().map(|(k, j)| (j, inst.size_of(k))).collect();
    let m = inst.num_machines();
    let (source, sink, j0) = (0, 1, 2);
    let m0 = j0 + jobs.len();
    let mut net = FlowNetwork::new(m0 + m, source, sink);
    let mut arcs = Vec::new();
    for (idx, (job, p)) in jobs.iter().enumerate() {
        net.add_arc(source, j0 + idx, p.clone());
        let mut mine = Vec::new();
        if p <= t {
            for &i in &job.eligible {
                mine.push((i, net.add_arc(j0 + idx, m0 + i, p.clone())));
            }
        }
        arcs.push(mine);
    }
    for i in 0..m {
        net.add_arc(m0 + i, sink, t.clone());
    }
    let r = net.max_flow();
    let total: Rational = jobs.iter().map(|(_, p)| p.clone()).sum();
    let frac = arcs
        .iter()
        .zip(&jobs)
        .map(|(mine, (_, p))| {
            mine.iter()
                .filter(|(_, a)| r.flow[*a].is_positive())
                .map(|&(i, a)| (i, &r.flow[a] / p))
                .collect()
        })
        .collect();
    // Jobs on the source side whose neighbours are all on the source side
    // form the violated set when infeasible.
    let stuck: Vec<usize> = (0..jobs.len())
        .filter(|&idx| {
            r.source_side[j0 + idx]
                && jobs[idx].0.eligible.iter().all(|&i| r.source_side[m0 + i])
                && jobs[idx].1 <= *t
        })
        .collect();
    (r.value == total, frac, stuck)
}

/// Generalized-assignment fallback: finds the least `T` admitting a
/// fractional assignment (exact, by parametric max-flow) and rounds it.
/// The result has makespan at most `T + 1`.
pub fn lst_fallback(inst: &Instance) -> Result<FallbackResult> {
    validate_instance(inst).into_result()?;
    let m = inst.num_machines();
    if inst.heavy.is_empty() && inst.light.is_empty() {
        return Ok(FallbackResult { lp_bound: Rational::zero(), schedule: Schedule::new(), makespan: Rational::zero() });
    }
    let sizes: Vec<Rational> = inst.jobs().map(|(k, _)| inst.size_of(k)).collect();
    let largest = sizes.iter().max().cloned().unwrap_or_else(Rational::zero);
    let total: Rational = sizes.iter().sum();
    let mut t = std::cmp::max(largest, total / int(m as i64));
    let jobs: Vec<&Job> = inst.jobs().map(|(_, j)| j).collect();
    let frac = loop {
        let (ok, frac, stuck) = fractional_assignment_at(inst, &t);
        if ok {
            break frac;
        }
        let demand: Rational = stuck.iter().map(|&j| sizes[j].clone()).sum();
        let machines: BTreeSet<usize> = stuck.iter().flat_map(|&j| jobs[j].eligible.iter().copied()).collect();
        let next = if machines.is_empty() { t.clone() } else { demand / int(machines.len() as i64) };
        if next <= t {
            // Growing T to admit more jobs is the only remaining move.
            let bigger = sizes.iter().filter(|p| **p > t).min().cloned();
            match bigger {
                Some(b) => t = b,
                None => return Err(Error::Internal("parametric search stalled".into())),
            }
        } else {
            t = next;
        }
    };
    let gap = GapInstance {
        groups: m,
        loads: jobs
            .iter()
            .zip(&sizes)
            .map(|(j, p)| j.eligible.iter().map(|&i| (i, p.clone())).collect())
            .collect(),
    };
    let assign = lst_round(&gap, &frac)?;
    let mut schedule = Schedule::new();
    for (j, &i) in jobs.iter().zip(&assign) {
        schedule.assign(j.id.clone(), i);
    }
    let makespan = crate::instance::makespan(inst, &schedule)?;
    Ok(FallbackResult { lp_bound: t, schedule, makespan })
}

// ---------------------------------------------------------------------------
// Exact optimum

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceBudget {
    /// Maximum number of heavy placements (partial or complete) visited.
    pub max_nodes: u64,
}

impl Default for BruteForceBudget {
    fn default() -> Self {
        BruteForceBudget { max_nodes: 5_000_000 }
    }
}

/// Light jobs grouped by eligible set.
struct LightClasses {
    sets: Vec<Vec<usize>>,
    jobs: Vec<Vec<usize>>,
}

fn light_classes(inst: &Instance) -> LightClasses {
    let mut by_set: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (j, job) in inst.light.iter().enumerate() {
        let mut s = job.eligible.clone();
        s.sort_unstable();
        by_set.entry(s).or_default().push(j);
    }
    let (sets, jobs) = by_set.into_iter().unzip();
    LightClasses { sets, jobs }
}

/// Places light jobs with at most `caps[i]` on machine `i`; returns the
/// per-class per-machine counts when all fit.
fn place_lights(classes: &LightClasses, m: usize, caps: &[i64]) -> Option<Vec<Vec<(usize, i64)>>> {
    let (source, sink, c0) = (0, 1, 2);
    let m0 = c0 + classes.sets.len();
    let mut net: FlowNetwork<i64> = FlowNetwork::new(m0 + m, source, sink);
    let mut arcs = Vec::new();
    let mut total = 0;
    for (c, set) in classes.sets.iter().enumerate() {
        let n = classes.jobs[c].len() as i64;
        total += n;
        net.add_arc(source, c0 + c, n);
        arcs.push(set.iter().map(|&i| (i, net.add_arc(c0 + c, m0 + i, n))).collect::<Vec<_>>());
    }
    for (i, &cap) in caps.iter().enumerate() {
        net.add_arc(m0 + i, sink, cap.max(0));
    }
    let r = net.max_flow();
    (r.value == total).then(|| {
        arcs.iter()
            .map(|a| a.iter().map(|&(i, arc)| (i, r.flow[arc])).collect())
            .collect()
    })
}

/// Least makespan over light completions of fixed heavy counts, if below
/// `limit`.
fn best_light_completion(
    inst: &Instance,
    classes: &LightClasses,
    heavy: &[i64],
    limit: Option<&Rational>,
) -> Option<(Rational, Vec<Vec<(usize, i64)>>)> {
    let m = inst.num_machines();
    let hmax = heavy.iter().copied().max().unwrap_or(0);
    let mut cands: BTreeSet<Rational> = BTreeSet::new();
    let distinct: BTreeSet<i64> = heavy.iter().copied().collect();
    for &h in &distinct {
        for b in 0..=inst.light.len() {
            let t = int(h) + &inst.eps * int(b as i64);
            if t >= int(hmax) && limit.map_or(true, |l| &t < l) {
                cands.insert(t);
            }
        }
    }
    let cands: Vec<Rational> = cands.into_iter().collect();
    let caps_at = |t: &Rational| -> Vec<i64> {
        heavy
            .iter()
            .map(|&h| {
                let room = (t - int(h)) / &inst.eps;
                i64::try_from(floor_int(&room)).unwrap_or(i64::MAX / 4)
            })
            .collect()
    };
    let (mut lo, mut hi) = (0usize, cands.len());
    let mut found = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match place_lights(classes, m, &caps_at(&cands[mid])) {
            Some(p) => {
                found = Some((cands[mid].clone(), p));
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    found
}

/// Optimal makespan of a light completion for a fixed heavy assignment,
/// together with the completed schedule.
pub fn optimal_light_completion(inst: &Instance, heavy_machine: &[usize]) -> Result<(Rational, Schedule)> {
    let m = inst.num_machines();
    let mut heavy = vec![0i64; m];
    for &i in heavy_machine {
        heavy[i] += 1;
    }
    let classes = light_classes(inst);
    let (t, placement) = best_light_completion(inst, &classes, &heavy, None)
        .ok_or_else(|| Error::Internal("light completion found no candidate".into()))?;
    let mut sched = Schedule::new();
    for (job, &i) in inst.heavy.iter().zip(heavy_machine) {
        sched.assign(job.id.clone(), i);
    }
    assign_lights(inst, &classes, &placement, &mut sched);
    Ok((t, sched))
}

fn assign_lights(inst: &Instance, classes: &LightClasses, placement: &[Vec<(usize, i64)>], sched: &mut Schedule) {
    for (c, per_machine) in placement.iter().enumerate() {
        let mut jobs = classes.jobs[c].iter();
        for &(i, n) in per_machine {
            for _ in 0..n {
                let j = jobs.next().expect("flow respects class size");
                sched.assign(inst.light[*j].id.clone(), i);
            }
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    classes: LightClasses,
    heavy_classes: Vec<(Vec<usize>, Vec<usize>)>,
    counts: Vec<i64>,
    /// Per heavy class, per eligible machine, how many jobs go there.
    choice: Vec<Vec<i64>>,
    best: Option<(Rational, Vec<Vec<i64>>, Vec<Vec<(usize, i64)>>)>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn lower_bound_ok(&self, hmax: i64) -> bool {
        self.best.as_ref().map_or(true, |(b, _, _)| int(hmax) < *b)
    }

    fn class(&mut self, c: usize) -> Result<()> {
        if c == self.heavy_classes.len() {
            let limit = self.best.as_ref().map(|(b, _, _)| b.clone());
            if let Some((t, p)) = best_light_completion(self.inst, &self.classes, &self.counts, limit.as_ref()) {
                self.best = Some((t, self.choice.clone(), p));
            }
            return Ok(());
        }
        let n = self.heavy_classes[c].1.len() as i64;
        self.place(c, 0, n)
    }

    fn place(&mut self, c: usize, pos: usize, left: i64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!("more than {} heavy placements", self.budget)));
        }
        let machines = self.heavy_classes[c].0.clone();
        if pos + 1 == machines.len() {
            let i = machines[pos];
            self.counts[i] += left;
            self.choice[c][pos] = left;
            if self.lower_bound_ok(self.counts[i]) {
                self.class(c + 1)?;
            }
            self.counts[i] -= left;
            self.choice[c][pos] = 0;
            return Ok(());
        }
        let i = machines[pos];
        for k in 0..=left {
            self.counts[i] += k;
            self.choice[c][pos] = k;
            if self.lower_bound_ok(self.counts[i]) {
                self.place(c, pos + 1, left - k)?;
            }
            self.counts[i] -= k;
            self.choice[c][pos] = 0;
        }
        Ok(())
    }
}

/// Exact optimum. Heavy jobs with equal eligible sets are interchangeable, so
/// only their per-machine counts are enumerated; each complete heavy
/// placement is finished with an optimal light placement (max-flow plus
/// binary search over the finitely many candidate makespans).
pub fn brute_force_opt(inst: &Instance) -> Result<(Rational, Schedule)> {
    brute_force_opt_with(inst, BruteForceBudget::default())
}

pub fn brute_force_opt_with(inst: &Instance, budget: BruteForceBudget) -> Result<(Rational, Schedule)> {
    validate_instance(inst).into_result()?;
    let m = inst.num_machines();
    let mut by_set: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (j, job) in inst.heavy.iter().enumerate() {
        let mut s = job.eligible.clone();
        s.sort_unstable();
        by_set.entry(s).or_default().push(j);
    }
    let heavy_classes: Vec<(Vec<usize>, Vec<usize>)> = by_set.into_iter().collect();
    let choice = heavy_classes.iter().map(|(s, _)| vec![0; s.len()]).collect();
    let mut search = Search {
        inst,
        classes: light_classes(inst),
        heavy_classes,
        counts: vec![0; m],
        choice,
        best: None,
        nodes: 0,
        budget: budget.max_nodes,
    };
    // A good incumbent makes pruning effective.
    if let Some(b) = matching_baseline_search(inst)? {
        let mut counts = vec![0i64; m];
        let heavy_machine: Vec<usize> = inst.heavy.iter().map(|j| b.schedule.assignment[&j.id]).collect();
        for &i in &heavy_machine {
            counts[i] += 1;
        }
        let choice = search
            .heavy_classes
            .iter()
            .map(|(set, jobs)| {
                set.iter()
                    .map(|&i| jobs.iter().filter(|&&j| heavy_machine[j] == i).count() as i64)
                    .collect()
            })
            .collect();
        if let Some((t, p)) = best_light_completion(inst, &search.classes, &counts, None) {
            search.best = Some((t, choice, p));
        }
    }
    search.class(0)?;
    let (t, choice, placement) = search
        .best
        .ok_or_else(|| Error::Internal("enumeration found no schedule".into()))?;
    let mut sched = Schedule::new();
    for ((set, jobs), counts) in search.heavy_classes.iter().zip(&choice) {
        let mut it = jobs.iter();
        for (&i, &k) in set.iter().zip(counts) {
            for _ in 0..k {
                sched.assign(inst.heavy[*it.next().expect("count matches")].id.clone(), i);
            }
        }
    }
    assign_lights(inst, &search.classes, &placement, &mut sched);
    Ok((t, sched))
}

/// Optimum by trying every assignment of every job (for cross-checking on
/// tiny instances).
pub fn exhaustive_opt(inst: &Instance, max_assignments: u64) -> Result<Rational> {
    validate_instance(inst).into_result()?;
    let jobs: Vec<(Rational, &Job)> = inst.jobs().map(|(k, j)| (inst.size_of(k), j)).collect();
    let total: u64 = jobs
        .iter()
        .try_fold(1u64, |acc, (_, j)| acc.checked_mul(j.eligible.len() as u64))
        .unwrap_or(u64::MAX);
    if total > max_assignments {
        return Err(Error::BudgetExceeded(format!("{total} assignments")));
    }
    let mut best: Option<Rational> = None;
    let mut loads = vec![Rational::zero(); inst.num_machines()];
    fn go(k: usize, jobs: &[(Rational, &Job)], loads: &mut Vec<Rational>, best: &mut Option<Rational>) {
        if k == jobs.len() {
            let mk = loads.iter().max().cloned().unwrap_or_else(Rational::zero);
            if best.as_ref().map_or(true, |b| &mk < b) {
                *best = Some(mk);
            }
            return;
        }
        for &i in &jobs[k].1.eligible {
            loads[i] += &jobs[k].0;
            go(k + 1, jobs, loads, best);
            loads[i] -= &jobs[k].0;
        }
    }
    go(0, &jobs, &mut loads, &mut best);
    Ok(best.unwrap_or_else(Rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_vertex_cover, makespan, Graph};
    use crate::rational::rat;

    #[test]
    fn matching_on_tiny_bipartite_graph() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = hopcroft_karp(3, 3, &adj);
        assert!(m.iter().all(Option::is_some));
    }

    #[test]
    fn light_only_machine_caps() {
        let inst = Instance {
            eps: rat(1, 3),
            machines: vec!["a".into(), "b".into()],
            heavy: vec![],
            light: (0..6).map(|j| Job::new(format!("l{j}"), vec![0, 1])).collect(),
        };
        let s = matching_baseline(&inst, &int(1)).unwrap().unwrap();
        assert_eq!(makespan(&inst, &s).unwrap(), int(1));
        assert!(matching_baseline(&inst, &rat(2, 3)).unwrap().is_none());
    }

    #[test]
    fn lst_two_items_two_groups() {
        let gap = GapInstance {
            groups: 2,
            loads: vec![
                BTreeMap::from([(0, int(1)), (1, int(1))]),
                BTreeMap::from([(0, int(1)), (1, int(1))]),
            ],
        };
        let half = rat(1, 2);
        let frac = vec![
            BTreeMap::from([(0, half.clone()), (1, half.clone())]),
            BTreeMap::from([(0, half.clone()), (1, half)]),
        ];
        let a = lst_round(&gap, &frac).unwrap();
        let loads = gap.integral_loads(&a);
        let fl = gap.fractional_loads(&frac);
        for g in 0..2 {
            assert!(loads[g] <= &fl[g] + int(1));
        }
    }

    #[test]
    fn single_machine_opt_is_total_load() {
        let inst = Instance {
            eps: rat(1, 4),
            machines: vec!["a".into()],
            heavy: vec![Job::new("h", vec![0])],
            light: (0..3).map(|j| Job::new(format!("l{j}"), vec![0])).collect(),
        };
        assert_eq!(brute_force_opt(&inst).unwrap().0, rat(7, 4));
    }

    #[test]
    fn triangle_family_has_opt_one() {
        let inst = gen_vertex_cover(&Graph::triangle(), 2, &rat(1, 6)).unwrap();
        let (opt, sched) = brute_force_opt(&inst).unwrap();
        assert_eq!(opt, int(1));
        assert_eq!(makespan(&inst, &sched).unwrap(), int(1));
    }

    #[test]
    fn fallback_is_within_one_of_bound() {
        let inst = Instance {
            eps: rat(1, 2),
            machines: vec!["a".into()],
            heavy: vec![Job::new("h", vec![0])],
            light: vec![Job::new("l", vec![0])],
        };
        let r = lst_fallback(&inst).unwrap();
        assert_eq!(r.lp_bound, rat(3, 2));
        assert!(r.makespan <= r.lp_bound + int(1));
    }
}
