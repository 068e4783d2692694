//! The relaxation LP(ρ,δ) as a feasibility problem.
//!
//! Rows, per machine `i` and job `j`:
//!
//! | tag | row |
//! |---|---|
//! | `assign` | `Σ_i x_ij = 1` for every job |
//! | `heavy_mass` | `Σ_{heavy j} x_ij − z_i = 0` |
//! | `mass_cap` | `z_i ≤ 1` |
//! | `load` | `z_i + ε Σ_{light j} x_ij ≤ 1 + ρδ` |
//! | `light_pair` | `(1−ρ) z_i + x_ij ≤ 1` for every eligible light pair |
//!
//! Variables are nonnegative. The solver is a dense phase-1 simplex in `f64`;
//! its final basis is then re-solved in exact rational arithmetic so the
//! returned solution satisfies every row with zero residual.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::{Instance, JobKind, Schedule};
use crate::rational::{format_rational, int, rat, snap_rational, to_f64, Rational};

pub const TAU_LP: f64 = 1e-9;

pub fn default_rho() -> Rational {
    rat(3, 5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowTag {
    Assign,
    HeavyMass,
    MassCap,
    Load,
    LightPair,
    Bound,
}

impl RowTag {
    pub fn name(self) -> &'static str {
        match self {
            RowTag::Assign => "assign",
            RowTag::HeavyMass => "heavy_mass",
            RowTag::MassCap => "mass_cap",
            RowTag::Load => "load",
            RowTag::LightPair => "light_pair",
            RowTag::Bound => "bound",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub tag: RowTag,
    pub label: String,
    pub coefs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X { kind: JobKind, job: usize, machine: usize },
    Z { machine: usize },
}

#[derive(Clone, Debug)]
pub struct LpModel {
    pub rho: Rational,
    pub delta: Rational,
    pub vars: Vec<Var>,
    pub var_names: Vec<String>,
    pub rows: Vec<Row>,
    heavy_offsets: Vec<usize>,
    light_offsets: Vec<usize>,
    z_offset: usize,
}

/// `x` values aligned with each job's `eligible` list, plus one `z` per machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalSolution {
    pub x_heavy: Vec<Vec<Rational>>,
    pub x_light: Vec<Vec<Rational>>,
    pub z: Vec<Rational>,
}

impl FractionalSolution {
    pub fn x(&self, kind: JobKind) -> &Vec<Vec<Rational>> {
        match kind {
            JobKind::Heavy => &self.x_heavy,
            JobKind::Light => &self.x_light,
        }
    }
}

pub fn build_lp(inst: &Instance, rho: &Rational, delta: &Rational) -> LpModel {
    let m = inst.num_machines();
    let mut vars = Vec::new();
    let mut var_names = Vec::new();
    let mut heavy_offsets = Vec::new();
    let mut light_offsets = Vec::new();
    for (kind, jobs, offsets) in [
        (JobKind::Heavy, &inst.heavy, &mut heavy_offsets),
        (JobKind::Light, &inst.light, &mut light_offsets),
    ] {
        for (j, job) in jobs.iter().enumerate() {
            offsets.push(vars.len());
            for &i in &job.eligible {
                vars.push(Var::X { kind, job: j, machine: i });
                var_names.push(format!("x[{},{}]", job.id, inst.machines[i]));
            }
        }
    }
    let z_offset = vars.len();
    for i in 0..m {
        vars.push(Var::Z { machine: i });
        var_names.push(format!("z[{}]", inst.machines[i]));
    }

    let one = Rational::one();
    let mut rows = Vec::new();
    for (jobs, offsets) in [(&inst.heavy, &heavy_offsets), (&inst.light, &light_offsets)] {
        for (j, job) in jobs.iter().enumerate() {
            rows.push(Row {
                tag: RowTag::Assign,
                label: job.id.clone(),
                coefs: (0..job.eligible.len()).map(|t| (offsets[j] + t, one.clone())).collect(),
                rel: Relation::Eq,
                rhs: one.clone(),
            });
        }
    }
    let mut heavy_at: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut light_at: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, job) in inst.heavy.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            heavy_at[i].push(heavy_offsets[j] + t);
        }
    }
    for (j, job) in inst.light.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            light_at[i].push(light_offsets[j] + t);
        }
    }
    for i in 0..m {
        let mut coefs: Vec<(usize, Rational)> =
            heavy_at[i].iter().map(|&v| (v, one.clone())).collect();
        coefs.push((z_offset + i, -one.clone()));
        rows.push(Row {
            tag: RowTag::HeavyMass,
            label: inst.machines[i].clone(),
            coefs,
            rel: Relation::Eq,
            rhs: Rational::zero(),
        });
    }
    for i in 0..m {
        rows.push(Row {
            tag: RowTag::MassCap,
            label: inst.machines[i].clone(),
            coefs: vec![(z_offset + i, one.clone())],
            rel: Relation::Le,
            rhs: one.clone(),
        });
    }
    let cap = &one + rho * delta;
    for i in 0..m {
        let mut coefs = vec![(z_offset + i, one.clone())];
        coefs.extend(light_at[i].iter().map(|&v| (v, inst.eps.clone())));
        rows.push(Row {
            tag: RowTag::Load,
            label: inst.machines[i].clone(),
            coefs,
            rel: Relation::Le,
            rhs: cap.clone(),
        });
    }
    let shrink = &one - rho;
    for (j, job) in inst.light.iter().enumerate() {
        for (t, &i) in job.eligible.iter().enumerate() {
            rows.push(Row {
                tag: RowTag::LightPair,
                label: format!("{},{}", job.id, inst.machines[i]),
                coefs: vec![(z_offset + i, shrink.clone()), (light_offsets[j] + t, one.clone())],
                rel: Relation::Le,
                rhs: one.clone(),
            });
        }
    }
    LpModel {
        rho: rho.clone(),
        delta: delta.clone(),
        vars,
        var_names,
        rows,
        heavy_offsets,
        light_offsets,
        z_offset,
    }
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn rows_with_tag(&self, tag: RowTag) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }

    pub fn to_values(&self, sol: &FractionalSolution) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.vars.len()];
        for (xs, offsets) in [(&sol.x_heavy, &self.heavy_offsets), (&sol.x_light, &self.light_offsets)]
        {
            for (j, row) in xs.iter().enumerate() {
                for (t, x) in row.iter().enumerate() {
                    v[offsets[j] + t] = x.clone();
                }
            }
        }
        for (i, z) in sol.z.iter().enumerate() {
            v[self.z_offset + i] = z.clone();
        }
        v
    }

    pub fn from_values(&self, inst: &Instance, v: &[Rational]) -> FractionalSolution {
        let take = |jobs: &[crate::instance::Job], offsets: &[usize]| {
            jobs.iter()
                .enumerate()
                .map(|(j, job)| (0..job.eligible.len()).map(|t| v[offsets[j] + t].clone()).collect())
                .collect()
        };
        FractionalSolution {
            x_heavy: take(&inst.heavy, &self.heavy_offsets),
            x_light: take(&inst.light, &self.light_offsets),
            z: (0..inst.num_machines()).map(|i| v[self.z_offset + i].clone()).collect(),
        }
    }

    /// Rows violated by `values` in exact arithmetic, with their signed residual
    /// (`lhs − rhs`). Negative variables are reported under the `bound` tag.
    pub fn violations(&self, values: &[Rational]) -> Vec<(RowTag, String, Rational)> {
        let mut out = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if v.is_negative() {
                out.push((RowTag::Bound, self.var_names[k].clone(), v.clone()));
            }
        }
        for row in &self.rows {
            let lhs: Rational = row.coefs.iter().map(|(k, c)| c * &values[*k]).sum();
            if !row.rel.holds(&lhs, &row.rhs) {
                out.push((row.tag, row.label.clone(), lhs - &row.rhs));
            }
        }
        out
    }

    /// Plain-text dump: one row per line, `tag label: coef*var + ... rel rhs`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            let terms: Vec<String> = row
                .coefs
                .iter()
                .map(|(k, c)| format!("{}*{}", format_rational(c), self.var_names[*k]))
                .collect();
            let _ = writeln!(
                s,
                "{} {}: {} {} {}",
                row.tag.name(),
                row.label,
                terms.join(" + "),
                row.rel.symbol(),
                format_rational(&row.rhs)
            );
        }
        s
    }
}

pub fn check_solution(
    inst: &Instance,
    sol: &FractionalSolution,
    rho: &Rational,
    delta: &Rational,
) -> Vec<(RowTag, String, Rational)> {
    let model = build_lp(inst, rho, delta);
    model.violations(&model.to_values(sol))
}

/// The 0/1 solution induced by an integral schedule.
pub fn indicator_solution(inst: &Instance, sched: &Schedule) -> Result<FractionalSolution> {
    crate::instance::validate_schedule(inst, sched)?;
    let ind = |jobs: &[crate::instance::Job]| -> Vec<Vec<Rational>> {
        jobs.iter()
            .map(|job| {
                let at = sched.assignment[&job.id];
                job.eligible
                    .iter()
                    .map(|&i| if i == at { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect()
    };
    let x_heavy = ind(&inst.heavy);
    let mut z = vec![Rational::zero(); inst.num_machines()];
    for (job, xs) in inst.heavy.iter().zip(&x_heavy) {
        for (&i, x) in job.eligible.iter().zip(xs) {
            z[i] += x;
        }
    }
    Ok(FractionalSolution { x_heavy, x_light: ind(&inst.light), z })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfeasibleReport {
    /// Optimal phase-1 objective (total artificial mass), positive.
    pub phase1_objective: f64,
    pub pivots: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible(FractionalSolution),
    Infeasible(InfeasibleReport),
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    /// Consecutive degenerate pivots after which the entering rule switches
    /// from steepest reduced cost to Bland's rule.
    pub degenerate_switch: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_pivots: 200_000, degenerate_switch: 50 }
    }
}

pub fn solve_feasibility(model: &LpModel, inst: &Instance) -> Result<LpOutcome> {
    solve_feasibility_with(model, inst, SimplexOptions::default())
}

const PIVOT_TOL: f64 = 1e-9;

pub fn solve_feasibility_with(
    model: &LpModel,
    inst: &Instance,
    opts: SimplexOptions,
) -> Result<LpOutcome> {
    let n = model.num_vars();
    let m = model.rows.len();
    // Column layout: structural, then one indicator per row (slack for ≤,
    // artificial for = and ≥), then one surplus per ≥ row.
    let mut rels = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    for row in &model.rows {
        let flip = row.rhs.is_negative();
        signs.push(if flip { -1.0 } else { 1.0 });
        rels.push(match (row.rel, flip) {
            (Relation::Eq, _) => Relation::Eq,
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
        });
    }
    let surplus_cols: Vec<Option<usize>> = {
        let mut next = n + m;
        rels.iter()
            .map(|r| {
                if *r == Relation::Ge {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let cols = n + m + surplus_cols.iter().flatten().count();
    let width = cols + 1;
    let is_artificial = |c: usize| c >= n && c < n + m && rels[c - n] != Relation::Le;

    let mut t = vec![0.0f64; m * width];
    for (r, row) in model.rows.iter().enumerate() {
        for (k, c) in &row.coefs {
            t[r * width + k] += signs[r] * to_f64(c);
        }
        t[r * width + n + r] = 1.0;
        if let Some(s) = surplus_cols[r] {
            t[r * width + s] = -1.0;
        }
        t[r * width + cols] = signs[r] * to_f64(&row.rhs);
    }
    let mut basis: Vec<usize> = (0..m).map(|r| n + r).collect();
    // Reduced costs of the phase-1 objective Σ artificials.
    let mut d = vec![0.0f64; width];
    for r in 0..m {
        if is_artificial(n + r) {
            for c in 0..width {
                d[c] -= t[r * width + c];
            }
        }
    }
    for r in 0..m {
        if is_artificial(n + r) {
            d[n + r] = 0.0;
        }
    }

    let mut pivots = 0;
    let mut degenerate_run = 0;
    loop {
        let bland = degenerate_run >= opts.degenerate_switch;
        let mut entering = None;
        let mut best = -PIVOT_TOL;
        for (c, &dc) in d.iter().enumerate().take(cols) {
            if is_artificial(c) {
                continue;
            }
            if dc < best {
                entering = Some(c);
                if bland {
                    break;
                }
                best = dc;
            }
        }
        let Some(e) = entering else { break };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let a = t[r * width + e];
            if a > PIVOT_TOL {
                let ratio = t[r * width + cols] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-12
                            || (ratio <= best_ratio + 1e-12 && basis[r] < basis[l])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(l) = leave else {
            // Phase 1 is bounded below by zero, so this cannot happen with a
            // consistent tableau.
            return Err(Error::Internal("phase-1 simplex reported an unbounded ray".into()));
        };
        if pivots >= opts.max_pivots {
            return Err(Error::NonTerminated(format!(
                "simplex hit the pivot limit {} ({} rows, {} columns)",
                opts.max_pivots, m, cols
            )));
        }
        if best_ratio.abs() < 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(&mut t, &mut d, width, l, e);
        basis[l] = e;
        pivots += 1;
    }

    let phase1 = -d[cols];
    if phase1 > TAU_LP {
        return Ok(LpOutcome::Infeasible(InfeasibleReport {
            phase1_objective: phase1,
            pivots,
            status: format!("phase-1 optimum {phase1:.3e} exceeds tolerance {TAU_LP:.0e}"),
        }));
    }

    let values = exact_basic_solution(model, &rels, &surplus_cols, &basis, n)
        .filter(|v| model.violations(v).is_empty())
        .or_else(|| {
            // Fallback: snap the floating-point basic solution.
            let mut v = vec![Rational::zero(); n];
            for (r, &b) in basis.iter().enumerate() {
                if b < n {
                    v[b] = snap_rational(t[r * width + cols].max(0.0), 1_000_000_000_000);
                }
            }
            let sol = renormalize(inst, model.from_values(inst, &v));
            let v = model.to_values(&sol);
            model.violations(&v).is_empty().then_some(v)
        });
    match values {
        Some(v) => Ok(LpOutcome::Feasible(model.from_values(inst, &v))),
        None => Err(Error::Internal(format!(
            "simplex basis after {pivots} pivots does not reproduce a feasible point exactly"
        ))),
    }
}

fn pivot(t: &mut [f64], d: &mut [f64], width: usize, l: usize, e: usize) {
    let m = t.len() / width;
    let p = t[l * width + e];
    for c in 0..width {
        t[l * width + c] /= p;
    }
    let (before, rest) = t.split_at_mut(l * width);
    let (prow, after) = rest.split_at_mut(width);
    let eliminate = |row: &mut [f64]| {
        let f = row[e];
        if f != 0.0 {
            for (x, &y) in row.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            row[e] = 0.0;
        }
    };
    for r in 0..l {
        eliminate(&mut before[r * width..(r + 1) * width]);
    }
    for r in 0..(m - l - 1) {
        eliminate(&mut after[r * width..(r + 1) * width]);
    }
    eliminate(d);
}

fn exact_basic_solution(
    model: &LpModel,
    rels: &[Relation],
    surplus_cols: &[Option<usize>],
    basis: &[usize],
    n: usize,
) -> Option<Vec<Rational>> {
    let m = model.rows.len();
    let col_pos: BTreeMap<usize, usize> = basis.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let mut rows: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); m];
    let mut rhs = Vec::with_capacity(m);
    for (r, row) in model.rows.iter().enumerate() {
        let sign = if row.rhs.is_negative() { -Rational::one() } else { Rational::one() };
        for (k, c) in &row.coefs {
            if let Some(&p) = col_pos.get(k) {
                *rows[r].entry(p).or_insert_with(Rational::zero) += &sign * c;
            }
        }
        if let Some(&p) = col_pos.get(&(n + r)) {
            rows[r].insert(p, Rational::one());
        }
        if let Some(s) = surplus_cols[r] {
            if let Some(&p) = col_pos.get(&s) {
                rows[r].insert(p, -Rational::one());
            }
        }
        rows[r].retain(|_, v| !v.is_zero());
        rhs.push(&sign * &row.rhs);
    }
    let u = solve_sparse(rows, rhs)?;
    let mut v = vec![Rational::zero(); n];
    for (p, &c) in basis.iter().enumerate() {
        if c < n {
            v[c] = u[p].clone();
        } else if c < n + m && rels[c - n] != Relation::Le && !u[p].is_zero() {
            return None;
        }
    }
    Some(v)
}

/// Solves a square sparse system exactly. Returns `None` when singular.
pub fn solve_sparse(mut rows: Vec<BTreeMap<usize, Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let k = rows.len();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            if c >= k {
                return None;
            }
            col_rows[c].insert(r);
        }
    }
    let mut done_row = vec![false; k];
    let mut order = Vec::with_capacity(k);
    let mut by_nnz: BTreeSet<(usize, usize)> = rows.iter().enumerate().map(|(r, row)| (row.len(), r)).collect();
    while let Some(&(nnz, r)) = by_nnz.iter().next() {
        by_nnz.remove(&(nnz, r));
        if nnz == 0 {
            return None;
        }
        let c = *rows[r].keys().min_by_key(|&&c| (col_rows[c].len(), c))?;
        done_row[r] = true;
        let prow = rows[r].clone();
        let pval = prow[&c].clone();
        let prhs = rhs[r].clone();
        let others: Vec<usize> = col_rows[c].iter().copied().filter(|&o| !done_row[o]).collect();
        for o in others {
            by_nnz.remove(&(rows[o].len(), o));
            let f = &rows[o][&c] / &pval;
            for (&cc, v) in &prow {
                let entry = rows[o].entry(cc).or_insert_with(Rational::zero);
                *entry -= &f * v;
                if entry.is_zero() {
                    rows[o].remove(&cc);
                    col_rows[cc].remove(&o);
                } else {
                    col_rows[cc].insert(o);
                }
            }
            rhs[o] = &rhs[o] - &f * &prhs;
            by_nnz.insert((rows[o].len(), o));
        }
        for &cc in prow.keys() {
            col_rows[cc].remove(&r);
        }
        order.push((r, c));
    }
    let mut x: Vec<Option<Rational>> = vec![None; k];
    for &(r, c) in order.iter().rev() {
        let mut acc = rhs[r].clone();
        for (&cc, v) in &rows[r] {
            if cc != c {
                acc -= v * x[cc].as_ref()?;
            }
        }
        x[c] = Some(acc / &rows[r][&c]);
    }
    x.into_iter().collect()
}

/// Rescales each job's `x` row so it sums to exactly one and recomputes `z`
/// from the heavy rows.
pub fn renormalize(inst: &Instance, mut sol: FractionalSolution) -> FractionalSolution {
    for xs in sol.x_heavy.iter_mut().chain(sol.x_light.iter_mut()) {
        let s: Rational = xs.iter().sum();
        if s.is_positive() {
            for x in xs.iter_mut() {
                *x = &*x / &s;
            }
        }
    }
    sol.z = vec![Rational::zero(); inst.num_machines()];
    for (job, xs) in inst.heavy.iter().zip(&sol.x_heavy) {
        for (&i, x) in job.eligible.iter().zip(xs) {
            sol.z[i] += x;
        }
    }
    sol
}

/// Convenience: build and solve in one call.
pub fn solve_lp(inst: &Instance, rho: &Rational, delta: &Rational) -> Result<LpOutcome> {
    solve_feasibility(&build_lp(inst, rho, delta), inst)
}

/// Smallest integer multiple count helper used by tests: `1 + ρδ`.
pub fn machine_cap(rho: &Rational, delta: &Rational) -> Rational {
    int(1) + rho * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;

    fn inst(heavy: usize, light: usize, eps: Rational) -> Instance {
        Instance {
            eps,
            machines: vec!["a".into()],
            heavy: (0..heavy).map(|j| Job::new(format!("h{j}"), vec![0])).collect(),
            light: (0..light).map(|j| Job::new(format!("l{j}"), vec![0])).collect(),
        }
    }

    #[test]
    fn row_counts() {
        let model = build_lp(&inst(1, 1, rat(1, 2)), &default_rho(), &rat(0, 1));
        assert_eq!(model.rows.len(), 6);
        let model = build_lp(&inst(2, 0, rat(1, 2)), &default_rho(), &rat(0, 1));
        assert_eq!(model.rows_with_tag(RowTag::LightPair), 0);
    }

    #[test]
    fn single_heavy_is_feasible() {
        let i = inst(1, 0, rat(1, 2));
        match solve_lp(&i, &default_rho(), &rat(0, 1)).unwrap() {
            LpOutcome::Feasible(sol) => {
                assert_eq!(sol.x_heavy, vec![vec![int(1)]]);
                assert_eq!(sol.z, vec![int(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heavy_plus_light_on_one_machine_is_infeasible() {
        let i = inst(1, 1, rat(1, 2));
        assert!(!solve_lp(&i, &default_rho(), &rat(0, 1)).unwrap().is_feasible());
    }

    #[test]
    fn sparse_solver_matches_hand_solution() {
        // x + y = 3, x − y = 1
        let rows = vec![
            BTreeMap::from([(0, int(1)), (1, int(1))]),
            BTreeMap::from([(0, int(1)), (1, int(-1))]),
        ];
        let x = solve_sparse(rows, vec![int(3), int(1)]).unwrap();
        assert_eq!(x, vec![int(2), int(1)]);
        let singular = vec![BTreeMap::from([(0, int(1))]), BTreeMap::from([(0, int(2))])];
        assert!(solve_sparse(singular, vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn dump_lists_every_row() {
        let model = build_lp(&inst(1, 1, rat(1, 2)), &default_rho(), &rat(1, 10));
        let dump = model.dump();
        assert_eq!(dump.lines().count(), 6);
        assert!(dump.contains("load a: 1*z[a] + 1/2*x[l0,a] <= 53/50"));
    }
}
