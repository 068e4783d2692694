//! Instances of (1,ε)-restricted assignment, schedules, generators and the
//! JSON document format.
//!
//! Machines are addressed by their position in [`Instance::machines`]; the
//! string ids only matter at the file boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: String,
    /// Indices into [`Instance::machines`].
    pub eligible: Vec<usize>,
}

impl Job {
    pub fn new(id: impl Into<String>, eligible: Vec<usize>) -> Self {
        Job { id: id.into(), eligible }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Size of every light job. Heavy jobs have size 1.
    pub eps: Rational,
    pub machines: Vec<String>,
    pub heavy: Vec<Job>,
    pub light: Vec<Job>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JobKind {
    Heavy,
    Light,
}

impl Instance {
    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn jobs(&self) -> impl Iterator<Item = (JobKind, &Job)> {
        self.heavy
            .iter()
            .map(|j| (JobKind::Heavy, j))
            .chain(self.light.iter().map(|j| (JobKind::Light, j)))
    }

    pub fn size_of(&self, kind: JobKind) -> Rational {
        match kind {
            JobKind::Heavy => Rational::one(),
            JobKind::Light => self.eps.clone(),
        }
    }

    pub fn machine_index(&self, id: &str) -> Option<usize> {
        self.machines.iter().position(|m| m == id)
    }

    pub fn total_load(&self) -> Rational {
        int(self.heavy.len() as i64) + &self.eps * int(self.light.len() as i64)
    }
}

/// Total mapping job id → machine index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub assignment: BTreeMap<String, usize>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, job: impl Into<String>, machine: usize) {
        self.assignment.insert(job.into(), machine);
    }

    pub fn machine_of(&self, job: &str) -> Option<usize> {
        self.assignment.get(job).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EpsNotPositive,
    EpsAboveOne,
    NoMachines,
    DuplicateMachine(String),
    DuplicateJob(String),
    EmptyEligible(String),
    UnknownMachine { job: String, machine: usize },
    DuplicateEligible { job: String, machine: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EpsNotPositive => write!(f, "eps must be positive"),
            Violation::EpsAboveOne => write!(f, "eps must be at most 1"),
            Violation::NoMachines => write!(f, "instance has jobs but no machines"),
            Violation::DuplicateMachine(m) => write!(f, "machine id {m:?} repeated"),
            Violation::DuplicateJob(j) => write!(f, "job id {j:?} repeated"),
            Violation::EmptyEligible(j) => write!(f, "job {j:?} has an empty eligible set"),
            Violation::UnknownMachine { job, machine } => {
                write!(f, "job {job:?} lists unknown machine index {machine}")
            }
            Violation::DuplicateEligible { job, machine } => {
                write!(f, "job {job:?} lists machine index {machine} twice")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidInstance(msg.join("; ")))
        }
    }
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    if !inst.eps.is_positive() {
        violations.push(Violation::EpsNotPositive);
    } else if inst.eps > Rational::one() {
        violations.push(Violation::EpsAboveOne);
    }
    if inst.machines.is_empty() && (!inst.heavy.is_empty() || !inst.light.is_empty()) {
        violations.push(Violation::NoMachines);
    }
    let mut seen = HashSet::new();
    for m in &inst.machines {
        if !seen.insert(m.as_str()) {
            violations.push(Violation::DuplicateMachine(m.clone()));
        }
    }
    let mut seen_jobs = HashSet::new();
    for (_, job) in inst.jobs() {
        if !seen_jobs.insert(job.id.as_str()) {
            violations.push(Violation::DuplicateJob(job.id.clone()));
        }
        if job.eligible.is_empty() {
            violations.push(Violation::EmptyEligible(job.id.clone()));
        }
        let mut seen_m = HashSet::new();
        for &m in &job.eligible {
            if m >= inst.machines.len() {
                violations.push(Violation::UnknownMachine { job: job.id.clone(), machine: m });
            } else if !seen_m.insert(m) {
                violations.push(Violation::DuplicateEligible { job: job.id.clone(), machine: m });
            }
        }
    }
    ValidationReport { violations }
}

/// Checks that `sched` assigns every job exactly once to an eligible machine.
pub fn validate_schedule(inst: &Instance, sched: &Schedule) -> Result<()> {
    let mut known = HashSet::new();
    for (_, job) in inst.jobs() {
        known.insert(job.id.as_str());
        match sched.assignment.get(&job.id) {
            None => {
                return Err(Error::InvalidSchedule(format!("job {:?} is not assigned", job.id)));
            }
            Some(m) if !job.eligible.contains(m) => {
                return Err(Error::InvalidSchedule(format!(
                    "job {:?} assigned to ineligible machine {}",
                    job.id,
                    inst.machines.get(*m).map(String::as_str).unwrap_or("<unknown>")
                )));
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = sched.assignment.keys().find(|j| !known.contains(j.as_str())) {
        return Err(Error::InvalidSchedule(format!("job {extra:?} does not exist")));
    }
    Ok(())
}

/// Per-machine loads of a valid schedule.
pub fn machine_loads(inst: &Instance, sched: &Schedule) -> Result<Vec<Rational>> {
    validate_schedule(inst, sched)?;
    let mut heavy = vec![0i64; inst.num_machines()];
    let mut light = vec![0i64; inst.num_machines()];
    for job in &inst.heavy {
        heavy[sched.assignment[&job.id]] += 1;
    }
    for job in &inst.light {
        light[sched.assignment[&job.id]] += 1;
    }
    Ok(heavy
        .iter()
        .zip(&light)
        .map(|(&h, &l)| int(h) + &inst.eps * int(l))
        .collect())
}

pub fn makespan(inst: &Instance, sched: &Schedule) -> Result<Rational> {
    Ok(machine_loads(inst, sched)?
        .into_iter()
        .max()
        .unwrap_or_else(Rational::zero))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EligibilitySize {
    Fixed { size: usize },
    Uniform { min: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub machines: usize,
    pub heavy: usize,
    pub light: usize,
    pub eps: Rational,
    pub eligibility: EligibilitySize,
    pub seed: u64,
}

fn check_gen_params(p: &GenParams) -> Result<(usize, usize)> {
    if p.machines == 0 {
        return Err(Error::InvalidParams("need at least one machine".into()));
    }
    if !p.eps.is_positive() || p.eps > Rational::one() {
        return Err(Error::InvalidParams("eps must lie in (0, 1]".into()));
    }
    let (lo, hi) = match p.eligibility {
        EligibilitySize::Fixed { size } => (size, size),
        EligibilitySize::Uniform { min, max } => (min, max),
    };
    if lo == 0 || lo > hi || hi > p.machines {
        return Err(Error::InvalidParams(format!(
            "eligibility sizes {lo}..={hi} incompatible with {} machines",
            p.machines
        )));
    }
    Ok((lo, hi))
}

fn machine_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("m{i}")).collect()
}

fn random_subset(rng: &mut ChaCha8Rng, m: usize, lo: usize, hi: usize) -> Vec<usize> {
    let k = rng.gen_range(lo..=hi);
    let mut all: Vec<usize> = (0..m).collect();
    all.shuffle(rng);
    let mut s: Vec<usize> = all.into_iter().take(k).collect();
    s.sort_unstable();
    s
}

/// Uniformly random eligibility sets. Deterministic in `params.seed`.
pub fn gen_random(params: &GenParams) -> Result<Instance> {
    let (lo, hi) = check_gen_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let heavy = (0..params.heavy)
        .map(|j| Job::new(format!("h{j}"), random_subset(&mut rng, params.machines, lo, hi)))
        .collect();
    let light = (0..params.light)
        .map(|j| Job::new(format!("l{j}"), random_subset(&mut rng, params.machines, lo, hi)))
        .collect();
    Ok(Instance {
        eps: params.eps.clone(),
        machines: machine_names(params.machines),
        heavy,
        light,
    })
}

/// Instance with a hidden schedule of makespan at most 1: heavy jobs are
/// planted on distinct machines and light jobs fill the remaining machines up
/// to `floor(1/eps)` each, then every job gets extra random eligible machines.
pub fn gen_planted(params: &GenParams) -> Result<Instance> {
    let (lo, hi) = check_gen_params(params)?;
    let per_machine = crate::rational::floor_int(&(Rational::one() / &params.eps));
    let per_machine: usize = per_machine.try_into().unwrap_or(usize::MAX);
    let light_machines = params.machines.saturating_sub(params.heavy);
    if params.heavy > params.machines
        || (params.light > 0 && light_machines.saturating_mul(per_machine) < params.light)
    {
        return Err(Error::InvalidParams(
            "not enough machines to plant a makespan-1 schedule".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..params.machines).collect();
    order.shuffle(&mut rng);
    let with_home = |home: usize, rng: &mut ChaCha8Rng| {
        let mut s = random_subset(rng, params.machines, lo, hi);
        if !s.contains(&home) {
            s.pop();
            s.push(home);
            s.sort_unstable();
        }
        s
    };
    let heavy = (0..params.heavy)
        .map(|j| Job::new(format!("h{j}"), with_home(order[j], &mut rng)))
        .collect();
    let light = (0..params.light)
        .map(|j| {
            let home = order[params.heavy + j % light_machines.max(1)];
            Job::new(format!("l{j}"), with_home(home, &mut rng))
        })
        .collect();
    Ok(Instance {
        eps: params.eps.clone(),
        machines: machine_names(params.machines),
        heavy,
        light,
    })
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::new();
        self.edges.iter().all(|&(u, v)| {
            u != v && u < self.n && v < self.n && seen.insert((u.min(v), u.max(v)))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn is_cubic(&self) -> bool {
        self.degrees().iter().all(|&d| d == 3)
    }

    pub fn triangle() -> Self {
        Graph { n: 3, edges: vec![(0, 1), (1, 2), (0, 2)] }
    }

    /// Size of a minimum vertex cover by subset enumeration (n ≤ 25).
    pub fn min_vertex_cover(&self) -> Result<usize> {
        if self.n > 25 {
            return Err(Error::BudgetExceeded(format!("{} vertices", self.n)));
        }
        let mut best = self.n;
        for mask in 0u32..(1u32 << self.n) {
            let size = mask.count_ones() as usize;
            if size < best
                && self
                    .edges
                    .iter()
                    .all(|&(u, v)| mask & (1 << u) != 0 || mask & (1 << v) != 0)
            {
                best = size;
            }
        }
        Ok(best)
    }
}

/// Random simple cubic graph on `n` vertices (`n` even, ≥ 4) by the pairing
/// model with rejection.
pub fn random_cubic_graph(n: usize, rng: &mut impl Rng) -> Result<Graph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidParams(format!("no cubic graph on {n} vertices")));
    }
    for _ in 0..10_000 {
        let mut points: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
        points.shuffle(rng);
        let edges: Vec<(usize, usize)> = points
            .chunks(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        let g = Graph { n, edges };
        if g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::Internal("pairing model kept rejecting".into()))
}

/// Hardness family: one machine per vertex, `n − k` heavy jobs eligible
/// everywhere, and `1/(3·eps)` light jobs per edge eligible on its endpoints.
pub fn gen_vertex_cover(graph: &Graph, k: usize, eps: &Rational) -> Result<Instance> {
    if !graph.is_simple() {
        return Err(Error::InvalidParams("graph is not simple".into()));
    }
    if !eps.is_positive() {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let per_edge = Rational::one() / (int(3) * eps);
    if !per_edge.is_integer() || !per_edge.is_positive() {
        return Err(Error::InvalidParams(format!(
            "1/(3*eps) = {} is not a positive integer",
            format_rational(&per_edge)
        )));
    }
    if k > graph.n {
        return Err(Error::InvalidParams(format!("K = {k} exceeds {} vertices", graph.n)));
    }
    let per_edge: usize = per_edge
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidParams("1/(3*eps) too large".into()))?;
    let all: Vec<usize> = (0..graph.n).collect();
    let heavy = (0..graph.n - k)
        .map(|j| Job::new(format!("h{j}"), all.clone()))
        .collect();
    let mut light = Vec::new();
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        for t in 0..per_edge {
            light.push(Job::new(format!("e{e}_{t}"), vec![u.min(v), u.max(v)]));
        }
    }
    Ok(Instance {
        eps: eps.clone(),
        machines: (0..graph.n).map(|v| format!("v{v}")).collect(),
        heavy,
        light,
    })
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct JobDoc {
    pub id: String,
    pub eligible: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub eps: String,
    pub machines: Vec<String>,
    #[serde(default)]
    pub heavy: Vec<JobDoc>,
    #[serde(default)]
    pub light: Vec<JobDoc>,
}

pub(crate) fn index_machines(machines: &[String]) -> Result<HashMap<&str, usize>> {
    let mut index = HashMap::new();
    for (i, m) in machines.iter().enumerate() {
        if index.insert(m.as_str(), i).is_some() {
            return Err(Error::Parse(format!("machine id {m:?} repeated")));
        }
    }
    Ok(index)
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance> {
        let eps = parse_rational(&self.eps)?;
        let index = index_machines(&self.machines)?;
        let convert = |jobs: Vec<JobDoc>| -> Result<Vec<Job>> {
            jobs.into_iter()
                .map(|j| {
                    let eligible = j
                        .eligible
                        .iter()
                        .map(|m| {
                            index.get(m.as_str()).copied().ok_or_else(|| {
                                Error::Parse(format!("job {:?} names unknown machine {m:?}", j.id))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Job { id: j.id, eligible })
                })
                .collect()
        };
        let heavy = convert(self.heavy)?;
        let light = convert(self.light)?;
        Ok(Instance { eps, machines: self.machines, heavy, light })
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let convert = |jobs: &[Job]| {
            jobs.iter()
                .map(|j| JobDoc {
                    id: j.id.clone(),
                    eligible: j
                        .eligible
                        .iter()
                        .map(|&m| inst.machines.get(m).cloned().unwrap_or_else(|| m.to_string()))
                        .collect(),
                })
                .collect()
        };
        InstanceDoc {
            eps: format_rational(&inst.eps),
            machines: inst.machines.clone(),
            heavy: convert(&inst.heavy),
            light: convert(&inst.light),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    doc.into_instance()
}

pub fn parse_instance_bytes(bytes: &[u8]) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_slice(bytes)?;
    doc.into_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("instance serializes")
}

/// Parses a `{job_id: machine_id}` document against `inst`'s machine ids.
pub fn parse_schedule(inst: &Instance, text: &str) -> Result<Schedule> {
    parse_schedule_bytes(inst, text.as_bytes())
}

pub fn parse_schedule_bytes(inst: &Instance, bytes: &[u8]) -> Result<Schedule> {
    let doc: BTreeMap<String, String> = serde_json::from_slice(bytes)?;
    let index = index_machines(&inst.machines)?;
    let mut sched = Schedule::new();
    for (job, m) in doc {
        let i = index
            .get(m.as_str())
            .copied()
            .ok_or_else(|| Error::Parse(format!("schedule names unknown machine {m:?}")))?;
        sched.assign(job, i);
    }
    Ok(sched)
}

pub fn schedule_to_json(inst: &Instance, sched: &Schedule) -> String {
    let doc: BTreeMap<&str, &str> = sched
        .assignment
        .iter()
        .map(|(j, &m)| (j.as_str(), inst.machines[m].as_str()))
        .collect();
    serde_json::to_string_pretty(&doc).expect("schedule serializes")
}

/// Heavy-job count and light-job count per machine.
pub fn load_profile(inst: &Instance, sched: &Schedule) -> BTreeMap<usize, (usize, usize)> {
    let heavy_ids: BTreeSet<&str> = inst.heavy.iter().map(|j| j.id.as_str()).collect();
    let mut out = BTreeMap::new();
    for (job, &m) in &sched.assignment {
        let e = out.entry(m).or_insert((0, 0));
        if heavy_ids.contains(job.as_str()) {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    out
}
