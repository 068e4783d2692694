//! Canonical instances and the reduction from a feasible LP(ρ,δ) point.
//!
//! A canonical instance keeps, for every (replacement) heavy job, a group of
//! machines; groups are disjoint. Light load is summarized by the matrix `w`,
//! where `w[h,k]` is the load of type-(h,k) jobs: they sit on `k` unless `k`
//! receives a heavy job, in which case the `z_k` fraction moves to `h`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{index_machines, Instance, Schedule};
use crate::linprog::FractionalSolution;
use crate::rational::{format_rational, int, parse_rational, rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub job: String,
    /// Sorted machine indices.
    pub machines: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalInstance {
    pub machines: Vec<String>,
    /// Sorted by job id.
    pub groups: Vec<Group>,
    /// Positive entries only. `(h, h)` entries are type-(h,h) load.
    pub w: BTreeMap<(usize, usize), Rational>,
    pub z: Vec<Rational>,
    pub p: Rational,
    pub q: Rational,
    pub theta: Rational,
}

/// Heavy assignment on a canonical instance: one machine per group, aligned
/// with [`CanonicalInstance::groups`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyAssignment {
    pub machine_of: Vec<usize>,
}

impl HeavyAssignment {
    /// Indicator of `X = f(J_H)`.
    pub fn image(&self, m: usize) -> Vec<bool> {
        let mut x = vec![false; m];
        for &i in &self.machine_of {
            x[i] = true;
        }
        x
    }
}

impl CanonicalInstance {
    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn w_at(&self, h: usize, k: usize) -> Rational {
        self.w.get(&(h, k)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Machine → group index.
    pub fn group_of(&self) -> Vec<Option<usize>> {
        let mut g = vec![None; self.num_machines()];
        for (j, group) in self.groups.iter().enumerate() {
            for &i in &group.machines {
                g[i] = Some(j);
            }
        }
        g
    }

    /// Left side of the per-machine load bound:
    /// `z_h + Σ_k w[k,h](1−z_h) + Σ_k w[h,k] z_k`.
    pub fn machine_loads(&self) -> Vec<Rational> {
        let one = Rational::one();
        let mut load = self.z.clone();
        for (&(h, k), w) in &self.w {
            if h == k {
                load[h] += w;
            } else {
                load[k] += w * (&one - &self.z[k]);
                load[h] += w * &self.z[k];
            }
        }
        load
    }

    /// `Σ_k w[k,h]` per machine `h`.
    pub fn in_weight(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.num_machines()];
        for (&(_, k), w) in &self.w {
            v[k] += w;
        }
        v
    }

    /// `Σ_k w[h,k]` per machine `h`.
    pub fn out_weight(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.num_machines()];
        for (&(h, _), w) in &self.w {
            v[h] += w;
        }
        v
    }

    /// Undirected adjacency of the light load graph (positive off-diagonal
    /// entries of `w`).
    pub fn undirected_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.num_machines()];
        for &(h, k) in self.w.keys() {
            if h != k {
                adj[h].insert(k);
                adj[k].insert(h);
            }
        }
        adj
    }

    pub fn validate_assignment(&self, f: &HeavyAssignment) -> Result<()> {
        if f.machine_of.len() != self.groups.len() {
            return Err(Error::InvalidSchedule(format!(
                "assignment covers {} groups, instance has {}",
                f.machine_of.len(),
                self.groups.len()
            )));
        }
        for (g, &i) in self.groups.iter().zip(&f.machine_of) {
            if !g.machines.contains(&i) {
                return Err(Error::InvalidSchedule(format!(
                    "heavy job {:?} placed outside its group",
                    g.job
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Property checks

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalParams {
    pub p: Rational,
    pub q: Rational,
    pub theta: Rational,
    /// Lower bound for `Σ_{i∈M_j} z_i`; `None` means `0.2 − θ`.
    pub coverage_floor: Option<Rational>,
}

impl CanonicalParams {
    pub fn new(p: Rational, q: Rational, theta: Rational) -> Self {
        CanonicalParams { p, q, theta, coverage_floor: None }
    }

    pub fn of(ci: &CanonicalInstance) -> Self {
        Self::new(ci.p.clone(), ci.q.clone(), ci.theta.clone())
    }

    fn floor(&self) -> Rational {
        self.coverage_floor.clone().unwrap_or_else(|| rat(1, 5) - &self.theta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalViolation {
    /// P1: machine in two groups.
    SharedMachine { machine: String },
    /// P2: light load with an illegal type.
    BadType { h: String, k: String },
    /// P3: `z_i = 0` but in a group, or `z_i > 0` and in none.
    GroupSupport { machine: String },
    /// P4: `z_i` outside `{0} ∪ [1/p, 0.4]`.
    ZRange { machine: String },
    /// P5: positive `w` below `1/q`.
    SmallLoad { h: String, k: String },
    /// P6: group's z-mass below the floor.
    Coverage { job: String },
    /// P7: machine load above `1 + θ`.
    Overload { machine: String },
    /// Structural problems (negative entries, bad indices, empty groups).
    Malformed(String),
}

impl std::fmt::Display for CanonicalViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CanonicalViolation::SharedMachine { machine } => {
                write!(f, "P1: machine {machine} lies in two groups")
            }
            CanonicalViolation::BadType { h, k } => write!(f, "P2: w[{h},{k}] must be zero"),
            CanonicalViolation::GroupSupport { machine } => {
                write!(f, "P3: z and group membership disagree on {machine}")
            }
            CanonicalViolation::ZRange { machine } => write!(f, "P4: z[{machine}] out of range"),
            CanonicalViolation::SmallLoad { h, k } => write!(f, "P5: w[{h},{k}] below 1/q"),
            CanonicalViolation::Coverage { job } => write!(f, "P6: group {job} under-covered"),
            CanonicalViolation::Overload { machine } => {
                write!(f, "P7: machine {machine} overloaded")
            }
            CanonicalViolation::Malformed(s) => write!(f, "malformed: {s}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CanonicalReport {
    pub violations: Vec<CanonicalViolation>,
}

impl CanonicalReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            let v: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Precondition(v.join("; ")))
        }
    }
}

pub fn check_canonical(ci: &CanonicalInstance, params: &CanonicalParams) -> CanonicalReport {
    let m = ci.num_machines();
    let name = |i: usize| ci.machines.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
    let mut out = Vec::new();
    if ci.z.len() != m {
        out.push(CanonicalViolation::Malformed(format!("{} z values for {m} machines", ci.z.len())));
        return CanonicalReport { violations: out };
    }
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for (j, g) in ci.groups.iter().enumerate() {
        if g.machines.is_empty() {
            out.push(CanonicalViolation::Malformed(format!("group {} is empty", g.job)));
        }
        for &i in &g.machines {
            if i >= m {
                out.push(CanonicalViolation::Malformed(format!("group {} names #{i}", g.job)));
                continue;
            }
            if owner[i].is_some() && owner[i] != Some(j) {
                out.push(CanonicalViolation::SharedMachine { machine: name(i) });
            }
            owner[i] = Some(j);
        }
    }
    for (&(h, k), w) in &ci.w {
        if h >= m || k >= m {
            out.push(CanonicalViolation::Malformed(format!("w entry ({h},{k}) out of range")));
            continue;
        }
        if !w.is_positive() {
            out.push(CanonicalViolation::Malformed(format!("w[{},{}] not positive", name(h), name(k))));
            continue;
        }
        let bad = if h != k { ci.z[k].is_zero() } else { ci.z[h].is_positive() };
        if bad {
            out.push(CanonicalViolation::BadType { h: name(h), k: name(k) });
        }
        if w * &params.q < Rational::one() {
            out.push(CanonicalViolation::SmallLoad { h: name(h), k: name(k) });
        }
    }
    let cap = rat(2, 5);
    for i in 0..m {
        let z = &ci.z[i];
        if z.is_zero() != owner[i].is_none() {
            out.push(CanonicalViolation::GroupSupport { machine: name(i) });
        }
        if z.is_negative() || z > &cap || (z.is_positive() && z * &params.p < Rational::one()) {
            out.push(CanonicalViolation::ZRange { machine: name(i) });
        }
    }
    let floor = params.floor();
    for g in &ci.groups {
        let s: Rational = g.machines.iter().filter(|&&i| i < m).map(|&i| &ci.z[i]).sum();
        if s < floor {
            out.push(CanonicalViolation::Coverage { job: g.job.clone() });
        }
    }
    if out.iter().all(|v| !matches!(v, CanonicalViolation::Malformed(_))) {
        let bound = Rational::one() + &params.theta;
        for (i, load) in ci.machine_loads().iter().enumerate() {
            if load > &bound {
                out.push(CanonicalViolation::Overload { machine: name(i) });
            }
        }
    }
    CanonicalReport { violations: out }
}

// ---------------------------------------------------------------------------
// Cycle rotation

/// Finds one cycle in a multigraph given as an edge list. Returns the edge
/// indices in cycle order.
fn find_cycle(nodes: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for (e, &(u, v)) in edges.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            adj[u].push((v, e));
            adj[v].push((u, e));
            continue;
        }
        // u and v already connected through forest edges: recover the path.
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(a) = queue.pop_front() {
            if a == v {
                break;
            }
            for &(b, eb) in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    prev[b] = Some((a, eb));
                    queue.push_back(b);
                }
            }
        }
        let mut path = Vec::new();
        let mut a = v;
        while let Some((pa, ea)) = prev[a] {
            path.push(ea);
            a = pa;
        }
        path.reverse();
        path.push(e);
        return Some(path);
    }
    None
}

/// Heavy edge `(job, position in eligible list)`.
type EdgeRef = (usize, usize);

fn heavy_edges(inst: &Instance, sol: &FractionalSolution) -> (Vec<EdgeRef>, Vec<(usize, usize)>) {
    let m = inst.num_machines();
    let mut refs = Vec::new();
    let mut ends = Vec::new();
    for (j, job) in inst.heavy.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            if sol.x_heavy[j][t].is_positive() {
                refs.push((j, t));
                ends.push((i, m + j));
            }
        }
    }
    (refs, ends)
}

/// Rotates even cycles of the heavy support until it is a forest. Returns the
/// new solution and the number of rotations; `z` and light `x` are untouched.
pub fn rotate_heavy_cycles(inst: &Instance, sol: &FractionalSolution) -> (FractionalSolution, usize) {
    let mut sol = sol.clone();
    let nodes = inst.num_machines() + inst.heavy.len();
    let mut rotations = 0;
    loop {
        let (refs, ends) = heavy_edges(inst, &sol);
        let Some(cycle) = find_cycle(nodes, &ends) else { break };
        let red: Vec<EdgeRef> = cycle.iter().step_by(2).map(|&e| refs[e]).collect();
        let black: Vec<EdgeRef> = cycle.iter().skip(1).step_by(2).map(|&e| refs[e]).collect();
        let step = red
            .iter()
            .map(|&(j, t)| sol.x_heavy[j][t].clone())
            .min()
            .expect("cycle is nonempty");
        for (j, t) in red {
            sol.x_heavy[j][t] -= &step;
        }
        for (j, t) in black {
            sol.x_heavy[j][t] += &step;
        }
        rotations += 1;
    }
    (sol, rotations)
}

pub fn heavy_edge_count(inst: &Instance, sol: &FractionalSolution) -> usize {
    heavy_edges(inst, sol).0.len()
}

/// Rotates cycles among non-tight light edges (`x + z < 1`) so they form a
/// forest, keeping `x + z ≤ 1` on every edge.
pub fn rotate_light_cycles(
    inst: &Instance,
    x_light: &mut [Vec<Rational>],
    z: &[Rational],
) -> usize {
    let m = inst.num_machines();
    let nodes = m + inst.light.len();
    let one = Rational::one();
    let mut rotations = 0;
    loop {
        let mut refs = Vec::new();
        let mut ends = Vec::new();
        for (j, job) in inst.light.iter().enumerate() {
            for (t, &i) in job.eligible.iter().enumerate() {
                let x = &x_light[j][t];
                if x.is_positive() && x + &z[i] < one {
                    refs.push((j, t));
                    ends.push((i, m + j));
                }
            }
        }
        let Some(cycle) = find_cycle(nodes, &ends) else { break };
        let red: Vec<EdgeRef> = cycle.iter().step_by(2).map(|&e| refs[e]).collect();
        let black: Vec<EdgeRef> = cycle.iter().skip(1).step_by(2).map(|&e| refs[e]).collect();
        let down = red.iter().map(|&(j, t)| x_light[j][t].clone()).min();
        let up = black
            .iter()
            .map(|&(j, t)| &one - &z[inst.light[j].eligible[t]] - &x_light[j][t])
            .min();
        let step = down.into_iter().chain(up).min().expect("cycle is nonempty");
        for (j, t) in red {
            x_light[j][t] -= &step;
        }
        for (j, t) in black {
            x_light[j][t] += &step;
        }
        rotations += 1;
    }
    rotations
}

// ---------------------------------------------------------------------------
// Heavy forest decomposition

/// One piece τ′ of the heavy forest after deleting light parent edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyTree {
    pub root: usize,
    /// Non-root heavy job → its parent machine.
    pub job_parent: BTreeMap<usize, usize>,
    /// Machine → its parent heavy job.
    pub machine_parent: BTreeMap<usize, usize>,
    /// Machines with a child job, in increasing order.
    pub inner: Vec<usize>,
    pub leaves: Vec<usize>,
}

impl HeavyTree {
    /// Original heavy job → machine, when the extra job lands on `leaf`: jobs
    /// on the root-to-leaf path move to their child, the rest to their parent.
    pub fn assignment_for_leaf(&self, leaf: usize) -> Result<BTreeMap<usize, usize>> {
        if !self.leaves.contains(&leaf) {
            return Err(Error::InvalidSchedule(format!("machine #{leaf} is not a leaf of this tree")));
        }
        let mut out: BTreeMap<usize, usize> = self.job_parent.clone();
        let mut machine = leaf;
        loop {
            let job = self.machine_parent[&machine];
            out.insert(job, machine);
            if job == self.root {
                break;
            }
            machine = self.job_parent[&job];
        }
        Ok(out)
    }
}

pub fn decompose_heavy_forest(inst: &Instance, sol: &FractionalSolution) -> Result<Vec<HeavyTree>> {
    let m = inst.num_machines();
    let half = rat(1, 2);
    // Node ids: machines 0..m, heavy jobs m..; edges carry x.
    let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m + inst.heavy.len()];
    for (j, job) in inst.heavy.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            let x = &sol.x_heavy[j][t];
            if x.is_positive() {
                adj[i].push((m + j, x.clone()));
                adj[m + j].push((i, x.clone()));
            }
        }
    }
    let mut visited = vec![false; m + inst.heavy.len()];
    let mut trees = Vec::new();
    for root in 0..inst.heavy.len() {
        if visited[m + root] {
            continue;
        }
        // Walk the whole tree, cutting job–parent edges with x ≤ 1/2; each cut
        // job starts a new piece.
        let mut piece_of: BTreeMap<usize, usize> = BTreeMap::from([(m + root, 0)]);
        let mut trees_here = vec![HeavyTree {
            root,
            job_parent: BTreeMap::new(),
            machine_parent: BTreeMap::new(),
            inner: Vec::new(),
            leaves: Vec::new(),
        }];
        visited[m + root] = true;
        let mut stack = vec![(m + root, usize::MAX)];
        while let Some((u, from)) = stack.pop() {
            let pu = piece_of[&u];
            for (v, x) in &adj[u] {
                let v = *v;
                if v == from {
                    continue;
                }
                if visited[v] {
                    return Err(Error::Internal("heavy support is not a forest".into()));
                }
                visited[v] = true;
                if u >= m {
                    // job u → child machine v
                    piece_of.insert(v, pu);
                    trees_here[pu].machine_parent.insert(v, u - m);
                } else if x > &half {
                    piece_of.insert(v, pu);
                    trees_here[pu].job_parent.insert(v - m, u);
                } else {
                    piece_of.insert(v, trees_here.len());
                    trees_here.push(HeavyTree {
                        root: v - m,
                        job_parent: BTreeMap::new(),
                        machine_parent: BTreeMap::new(),
                        inner: Vec::new(),
                        leaves: Vec::new(),
                    });
                }
                stack.push((v, u));
            }
        }
        for tree in &mut trees_here {
            let mut children: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in tree.job_parent.values() {
                *children.entry(i).or_default() += 1;
            }
            if let Some((&i, _)) = children.iter().find(|(_, &c)| c > 1) {
                return Err(Error::Internal(format!(
                    "machine {} has two heavy children above 1/2",
                    inst.machines[i]
                )));
            }
            for &i in tree.machine_parent.keys() {
                if children.contains_key(&i) {
                    tree.inner.push(i);
                } else {
                    tree.leaves.push(i);
                }
            }
        }
        trees.extend(trees_here);
    }
    Ok(trees)
}

// ---------------------------------------------------------------------------
// Light jobs

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LightTyping {
    /// `w[h,k] = ε · |types[(h,k)]|`.
    pub w: BTreeMap<(usize, usize), Rational>,
    /// Light job indices per type, increasing.
    pub types: BTreeMap<(usize, usize), Vec<usize>>,
    /// Light job index → machine.
    pub permanent: BTreeMap<usize, usize>,
    pub rotations: usize,
}

/// Rotates non-tight light cycles, permanently places non-leaf jobs of the
/// non-tight forest, and types the rest. `z` must already be scaled so that
/// `x + z ≤ 1` holds on every light edge.
pub fn process_light_jobs(
    inst: &Instance,
    x_light: &[Vec<Rational>],
    z: &[Rational],
) -> Result<LightTyping> {
    let m = inst.num_machines();
    let one = Rational::one();
    let mut x: Vec<Vec<Rational>> = x_light.to_vec();
    for (j, job) in inst.light.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            if &x[j][t] + &z[i] > one {
                return Err(Error::Precondition(format!(
                    "light edge ({}, {}) violates x + z <= 1",
                    job.id, inst.machines[i]
                )));
            }
        }
    }
    let rotations = rotate_light_cycles(inst, &mut x, z);

    let tight = |j: usize, t: usize| {
        let i = inst.light[j].eligible[t];
        x[j][t].is_positive() && &x[j][t] + &z[i] == one
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + inst.light.len()];
    for (j, job) in inst.light.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            if x[j][t].is_positive() && !tight(j, t) {
                adj[i].push(m + j);
                adj[m + j].push(i);
            }
        }
    }
    let mut permanent = BTreeMap::new();
    let mut visited = vec![false; m + inst.light.len()];
    for root in 0..inst.light.len() {
        if visited[m + root] || adj[m + root].is_empty() {
            continue;
        }
        visited[m + root] = true;
        let mut stack = vec![m + root];
        while let Some(u) = stack.pop() {
            let children: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            if u >= m && !children.is_empty() {
                permanent.insert(u - m, *children.iter().min().expect("nonempty"));
            }
            for v in children {
                visited[v] = true;
                stack.push(v);
            }
        }
    }

    let mut types: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (j, job) in inst.light.iter().enumerate() {
        if permanent.contains_key(&j) {
            continue;
        }
        let positive: Vec<usize> = (0..job.eligible.len()).filter(|&t| x[j][t].is_positive()).collect();
        let tights: Vec<usize> = positive.iter().copied().filter(|&t| tight(j, t)).collect();
        let loose: Vec<usize> = positive.iter().copied().filter(|&t| !tight(j, t)).collect();
        let key = match (tights.as_slice(), loose.as_slice()) {
            ([k], []) => {
                let k = job.eligible[*k];
                (k, k)
            }
            ([k], [h]) => (job.eligible[*h], job.eligible[*k]),
            _ => {
                return Err(Error::Internal(format!(
                    "light job {} has {} tight and {} non-tight edges after rotation",
                    job.id,
                    tights.len(),
                    loose.len()
                )));
            }
        };
        types.entry(key).or_default().push(j);
    }
    let w = types
        .iter()
        .map(|(&key, jobs)| (key, &inst.eps * int(jobs.len() as i64)))
        .collect();
    Ok(LightTyping { w, types, permanent, rotations })
}

// ---------------------------------------------------------------------------
// Full reduction and lift

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupOrigin {
    Inner { tree: usize, machine: usize },
    Leaves { tree: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovedMachine {
    pub machine: usize,
    pub group: String,
    pub z: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    pub trees: Vec<HeavyTree>,
    /// Aligned with the canonical groups.
    pub origins: Vec<GroupOrigin>,
    pub permanent: BTreeMap<usize, usize>,
    pub types: BTreeMap<(usize, usize), Vec<usize>>,
    pub z_scale: Rational,
    pub removed: Vec<RemovedMachine>,
    pub heavy_rotations: usize,
    pub light_rotations: usize,
}

pub fn to_canonical(
    inst: &Instance,
    sol: &FractionalSolution,
    rho: &Rational,
    delta: &Rational,
) -> Result<(CanonicalInstance, Lift)> {
    let m = inst.num_machines();
    let theta = rho * delta;
    if delta.is_negative() || theta >= rat(1, 5) {
        return Err(Error::InvalidParams(format!(
            "rho*delta = {} must lie in [0, 1/5)",
            format_rational(&theta)
        )));
    }
    let (sol, heavy_rotations) = rotate_heavy_cycles(inst, sol);
    let trees = decompose_heavy_forest(inst, &sol)?;
    let z_scale = Rational::one() - rho;
    let mut z: Vec<Rational> = sol.z.iter().map(|v| v * &z_scale).collect();

    let mut groups = Vec::new();
    let mut origins = Vec::new();
    for (t, tree) in trees.iter().enumerate() {
        let root = &inst.heavy[tree.root].id;
        for &i in &tree.inner {
            groups.push(Group { job: format!("{root}@{}", inst.machines[i]), machines: vec![i] });
            origins.push(GroupOrigin::Inner { tree: t, machine: i });
        }
        groups.push(Group { job: format!("{root}@leaves"), machines: tree.leaves.clone() });
        origins.push(GroupOrigin::Leaves { tree: t });
    }

    let cutoff = if m == 0 { Rational::zero() } else { &theta / int(m as i64) };
    let mut removed = Vec::new();
    for g in &mut groups {
        g.machines.retain(|&i| {
            let keep = z[i] >= cutoff && z[i].is_positive();
            if !keep {
                removed.push(RemovedMachine { machine: i, group: g.job.clone(), z: z[i].clone() });
            }
            keep
        });
        g.machines.sort_unstable();
    }
    for r in &removed {
        z[r.machine] = Rational::zero();
    }
    if let Some(g) = groups.iter().find(|g| g.machines.is_empty()) {
        return Err(Error::Internal(format!("group {} lost every machine", g.job)));
    }

    let typing = process_light_jobs(inst, &sol.x_light, &z)?;

    let p = if delta.is_positive() {
        int(m as i64) / &theta
    } else {
        z.iter()
            .filter(|v| v.is_positive())
            .min()
            .map(|v| Rational::one() / v)
            .unwrap_or_else(Rational::one)
    };
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| groups[a].job.cmp(&groups[b].job));
    let ci = CanonicalInstance {
        machines: inst.machines.clone(),
        groups: order.iter().map(|&g| groups[g].clone()).collect(),
        w: typing.w,
        z,
        p,
        q: Rational::one() / &inst.eps,
        theta,
    };
    let lift = Lift {
        trees,
        origins: order.iter().map(|&g| origins[g].clone()).collect(),
        permanent: typing.permanent,
        types: typing.types,
        z_scale,
        removed,
        heavy_rotations,
        light_rotations: typing.rotations,
    };
    Ok((ci, lift))
}

/// Integral light placement on a canonical instance: for each type `(h,k)`,
/// how many of its jobs go to `h` and how many to `k` (for `h = k` only the
/// second count is used).
pub type IntegralLights = BTreeMap<(usize, usize), (usize, usize)>;

pub fn lift_assignment(
    inst: &Instance,
    ci: &CanonicalInstance,
    lift: &Lift,
    f: &HeavyAssignment,
    lights: &IntegralLights,
) -> Result<Schedule> {
    ci.validate_assignment(f)?;
    let mut sched = Schedule::new();
    let mut leaf_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (origin, &i) in lift.origins.iter().zip(&f.machine_of) {
        if let GroupOrigin::Leaves { tree } = origin {
            leaf_of.insert(*tree, i);
        }
    }
    for (t, tree) in lift.trees.iter().enumerate() {
        let leaf = *leaf_of
            .get(&t)
            .ok_or_else(|| Error::Internal("tree without a leaf group".into()))?;
        for (job, machine) in tree.assignment_for_leaf(leaf)? {
            sched.assign(inst.heavy[job].id.clone(), machine);
        }
    }
    for (&j, &i) in &lift.permanent {
        sched.assign(inst.light[j].id.clone(), i);
    }
    for (&(h, k), jobs) in &lift.types {
        let (on_h, on_k) = lights.get(&(h, k)).copied().unwrap_or((0, 0));
        let on_h = if h == k { 0 } else { on_h };
        if on_h + on_k != jobs.len() {
            return Err(Error::InvalidSchedule(format!(
                "light placement for type ({}, {}) covers {} of {} jobs",
                inst.machines[h],
                inst.machines[k],
                on_h + on_k,
                jobs.len()
            )));
        }
        for (n, &j) in jobs.iter().enumerate() {
            sched.assign(inst.light[j].id.clone(), if n < on_h { h } else { k });
        }
    }
    Ok(sched)
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CanonicalDoc {
    pub machines: Vec<String>,
    pub groups: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub w: Vec<(String, String, String)>,
    pub z: BTreeMap<String, String>,
    pub p: String,
    pub q: String,
    pub theta: String,
}

impl CanonicalDoc {
    pub fn from_canonical(ci: &CanonicalInstance) -> Self {
        let name = |i: usize| ci.machines[i].clone();
        CanonicalDoc {
            machines: ci.machines.clone(),
            groups: ci
                .groups
                .iter()
                .map(|g| (g.job.clone(), g.machines.iter().map(|&i| name(i)).collect()))
                .collect(),
            w: ci
                .w
                .iter()
                .map(|(&(h, k), v)| (name(h), name(k), format_rational(v)))
                .collect(),
            z: ci
                .z
                .iter()
                .enumerate()
                .map(|(i, v)| (name(i), format_rational(v)))
                .collect(),
            p: format_rational(&ci.p),
            q: format_rational(&ci.q),
            theta: format_rational(&ci.theta),
        }
    }

    pub fn into_canonical(self) -> Result<CanonicalInstance> {
        let index = index_machines(&self.machines)?;
        let lookup = |m: &str| {
            index
                .get(m)
                .copied()
                .ok_or_else(|| Error::Parse(format!("unknown machine {m:?}")))
        };
        let mut groups = Vec::new();
        for (job, ms) in self.groups {
            let mut machines = ms.iter().map(|m| lookup(m)).collect::<Result<Vec<_>>>()?;
            machines.sort_unstable();
            machines.dedup();
            groups.push(Group { job, machines });
        }
        let mut w = BTreeMap::new();
        for (h, k, v) in self.w {
            let v = parse_rational(&v)?;
            if !v.is_zero() {
                let key = (lookup(&h)?, lookup(&k)?);
                if w.insert(key, v).is_some() {
                    return Err(Error::Parse(format!("w[{h},{k}] given twice")));
                }
            }
        }
        let mut z = vec![Rational::zero(); self.machines.len()];
        for (m, v) in self.z {
            z[lookup(&m)?] = parse_rational(&v)?;
        }
        Ok(CanonicalInstance {
            machines: self.machines,
            groups,
            w,
            z,
            p: parse_rational(&self.p)?,
            q: parse_rational(&self.q)?,
            theta: parse_rational(&self.theta)?,
        })
    }
}

pub fn parse_canonical(text: &str) -> Result<CanonicalInstance> {
    parse_canonical_bytes(text.as_bytes())
}

pub fn parse_canonical_bytes(bytes: &[u8]) -> Result<CanonicalInstance> {
    let doc: CanonicalDoc = serde_json::from_slice(bytes)?;
    doc.into_canonical()
}

pub fn canonical_to_json(ci: &CanonicalInstance) -> String {
    serde_json::to_string_pretty(&CanonicalDoc::from_canonical(ci)).expect("canonical serializes")
}
