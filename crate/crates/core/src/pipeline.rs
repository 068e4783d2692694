//! End-to-end solve: LP, canonical reduction, coarsening, final rounding,
//! lift, and integral light placement, with the goodness losses itemized.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{lst_fallback, optimal_light_completion};
use crate::canonical::{check_canonical, to_canonical, CanonicalInstance, CanonicalParams, HeavyAssignment};
use crate::coarsen::{coarsen_pipeline, CoarsenConfig, StepRecord};
use crate::error::{Error, Result};
use crate::finalround::{final_round, FinalConstants, FinalStats};
use crate::goodness::{best_goodness, integral_light_assignment, is_delta_good};
use crate::instance::{makespan, validate_instance, validate_schedule, Instance, Schedule};
use crate::linprog::{default_rho, solve_lp, LpOutcome};
use crate::rational::{format_rational, int, parse_rational, Rational};

/// Substream indices of the per-solve generator.
pub const STREAM_COARSEN: u64 = 1;
pub const STREAM_FINAL: u64 = 2;

/// Generator for one module: the 64-bit seed selects the key, the module
/// selects the ChaCha stream.
pub fn module_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Overridable constants, as read from a JSON file. Every field is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub q0: u64,
    pub step_coeff: f64,
    pub s_max: Option<usize>,
    pub enum_budget: usize,
    pub coarsen_max_resamples: usize,
    #[serde(rename = "final")]
    pub final_round: FinalConstants,
}

impl Default for Constants {
    fn default() -> Self {
        let c = CoarsenConfig::default();
        Constants {
            q0: c.q0,
            step_coeff: c.step_coeff,
            s_max: c.s_max,
            enum_budget: c.enum_budget,
            coarsen_max_resamples: c.max_resamples,
            final_round: FinalConstants::default(),
        }
    }
}

impl Constants {
    /// Small constants that keep every stage meaningful on instances with
    /// tens of machines: tiny θ steps so the final round accepts the
    /// coarsened instance, and `c2, c3` small enough that some machines and
    /// edges classify as red or dense.
    pub fn desk_scale() -> Self {
        Constants {
            q0: 100,
            step_coeff: 0.002,
            final_round: FinalConstants {
                c1: 2.0,
                c2: 2.0,
                c3: 4.0,
                delta0: Some(0.01),
                delta: Some(0.05),
                ..FinalConstants::default()
            },
            ..Constants::default()
        }
    }

    pub fn coarsen_config(&self) -> CoarsenConfig {
        CoarsenConfig {
            q0: self.q0,
            step_coeff: self.step_coeff,
            s_max: self.s_max,
            enum_budget: self.enum_budget,
            max_resamples: self.coarsen_max_resamples,
            witness_delta: Rational::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.coarsen_config().validate()?;
        self.final_round.validate()
    }
}

pub fn parse_constants(text: &str) -> Result<Constants> {
    parse_constants_bytes(text.as_bytes())
}

pub fn parse_constants_bytes(bytes: &[u8]) -> Result<Constants> {
    let c: Constants = serde_json::from_slice(bytes)?;
    c.validate()?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub rho: Rational,
    pub delta: Rational,
    pub constants: Constants,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rho: default_rho(),
            delta: Rational::new(1.into(), 20.into()),
            constants: Constants::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    Pipeline,
    Fallback,
}

/// Goodness bookkeeping. `delta_guaranteed = delta_star − theta_surcharge −
/// coarsen_loss`; the lifted schedule has makespan at most
/// `2 − best_delta + lift_term`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaLedger {
    pub delta_star: String,
    pub theta_surcharge: String,
    pub coarsen_loss: String,
    /// `16·√(ln q0 / q0)`, for comparison with `coarsen_loss`.
    pub coarsen_loss_nominal: f64,
    pub delta_guaranteed: String,
    /// Largest δ for which the final heavy assignment is δ-good on the
    /// canonical instance built from the LP.
    pub best_delta: String,
    /// `2ε`: whole light jobs and permanently placed light jobs.
    pub lift_term: String,
    pub makespan_bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub schedule_valid: bool,
    pub canonical_valid: bool,
    /// `is_delta_good` on the coarsened instance at `delta_report`.
    pub final_round_good: bool,
    /// `is_delta_good` on the LP's canonical instance at `delta_guaranteed`.
    pub transfer_good: bool,
    pub makespan_within_bound: bool,
    pub load_and_subset_conditions: bool,
}

impl Verification {
    pub fn all(&self) -> bool {
        self.schedule_valid
            && self.canonical_valid
            && self.final_round_good
            && self.transfer_good
            && self.makespan_within_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalSummary {
    pub groups: usize,
    pub light_types: usize,
    pub p: String,
    pub q: String,
    pub theta: String,
    pub heavy_rotations: usize,
    pub light_rotations: usize,
    pub removed_machines: usize,
    pub permanent_lights: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarsenSummary {
    pub steps: Vec<StepRecord>,
    pub theta_increase: String,
    pub delta_increase: String,
    pub final_p: String,
    pub final_q: String,
    pub final_theta: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub canonical: CanonicalSummary,
    pub coarsen: CoarsenSummary,
    pub final_round: FinalStats,
    pub delta_report: String,
    pub ledger: DeltaLedger,
    pub verification: Verification,
    /// Makespan after re-placing light jobs optimally around the same heavy
    /// assignment.
    pub polished_makespan: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FallbackReport {
    pub phase1_objective: f64,
    /// Least `T` admitting a fractional assignment; the schedule is within
    /// `T + 1`.
    pub lp_bound: String,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub path: SolvePath,
    pub schedule: Schedule,
    pub makespan: Rational,
    pub pipeline: Option<PipelineReport>,
    pub fallback: Option<FallbackReport>,
    /// The canonical instance built from the LP, when the LP was feasible.
    pub canonical: Option<CanonicalInstance>,
    /// Input of the final round, its heavy assignment, and the δ it reports.
    pub coarse: Option<CanonicalInstance>,
    pub heavy: Option<HeavyAssignment>,
    pub delta_report: Option<Rational>,
}

#[derive(Serialize)]
struct OutcomeDoc<'a> {
    path: SolvePath,
    makespan: String,
    schedule: BTreeMap<&'a str, &'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pipeline: Option<&'a PipelineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fallback: Option<&'a FallbackReport>,
}

impl SolveOutcome {
    pub fn to_json(&self, inst: &Instance) -> String {
        let doc = OutcomeDoc {
            path: self.path,
            makespan: format_rational(&self.makespan),
            schedule: self
                .schedule
                .assignment
                .iter()
                .map(|(j, &m)| (j.as_str(), inst.machines[m].as_str()))
                .collect(),
            pipeline: self.pipeline.as_ref(),
            fallback: self.fallback.as_ref(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    pub fn verified(&self) -> bool {
        match (&self.pipeline, &self.fallback) {
            (Some(p), _) => p.verification.all(),
            (None, Some(f)) => f.within_bound,
            _ => false,
        }
    }
}

fn s(r: &Rational) -> String {
    format_rational(r)
}

fn fallback(inst: &Instance, phase1_objective: f64) -> Result<SolveOutcome> {
    let r = lst_fallback(inst)?;
    validate_schedule(inst, &r.schedule)?;
    let within = r.makespan <= &r.lp_bound + int(1);
    Ok(SolveOutcome {
        path: SolvePath::Fallback,
        makespan: r.makespan,
        fallback: Some(FallbackReport { phase1_objective, lp_bound: s(&r.lp_bound), within_bound: within }),
        schedule: r.schedule,
        pipeline: None,
        canonical: None,
        coarse: None,
        heavy: None,
        delta_report: None,
    })
}

/// Runs the whole rounding. An infeasible LP switches to the
/// generalized-assignment fallback.
pub fn solve(inst: &Instance, cfg: &SolveConfig) -> Result<SolveOutcome> {
    validate_instance(inst).into_result()?;
    cfg.constants.validate()?;
    if inst.num_machines() == 0 {
        return Err(Error::InvalidInstance("no machines".into()));
    }
    let sol = match solve_lp(inst, &cfg.rho, &cfg.delta)? {
        LpOutcome::Feasible(sol) => sol,
        LpOutcome::Infeasible(rep) => return fallback(inst, rep.phase1_objective),
    };
    let (ci0, lift) = to_canonical(inst, &sol, &cfg.rho, &cfg.delta)?;
    let canonical_valid = check_canonical(&ci0, &CanonicalParams::of(&ci0)).is_valid();

    let coarse = coarsen_pipeline(&ci0, &cfg.constants.coarsen_config(), &mut module_rng(cfg.seed, STREAM_COARSEN))?;
    let fr = final_round(&coarse.ci, &mut module_rng(cfg.seed, STREAM_FINAL), &cfg.constants.final_round)?;
    let f = fr.f.clone();
    ci0.validate_assignment(&f)?;

    let delta_guaranteed = &fr.delta_report - &coarse.delta_increase;
    let transfer_good = is_delta_good(&ci0, &f, &delta_guaranteed)?.good;
    let (best_delta, placement) = best_goodness(&ci0, &f)?
        .ok_or_else(|| Error::Internal("no machines in canonical instance".into()))?;
    let lights = integral_light_assignment(&ci0, &placement, &inst.eps)?;
    let schedule = crate::canonical::lift_assignment(inst, &ci0, &lift, &f, &lights)?;
    let schedule_valid = validate_schedule(inst, &schedule).is_ok();
    let mk = makespan(inst, &schedule)?;
    let lift_term = int(2) * &inst.eps;
    let bound = int(2) - &best_delta + &lift_term;

    let heavy_machine: Vec<usize> = inst.heavy.iter().map(|j| schedule.assignment[&j.id]).collect();
    let (polished, _) = optimal_light_completion(inst, &heavy_machine)?;

    let q0 = cfg.constants.q0 as f64;
    let ledger = DeltaLedger {
        delta_star: s(&fr.delta_star),
        theta_surcharge: s(&fr.surcharge),
        coarsen_loss: s(&coarse.delta_increase),
        coarsen_loss_nominal: 16.0 * (q0.ln() / q0).sqrt(),
        delta_guaranteed: s(&delta_guaranteed),
        best_delta: s(&best_delta),
        lift_term: s(&lift_term),
        makespan_bound: s(&bound),
    };
    let verification = Verification {
        schedule_valid,
        canonical_valid,
        final_round_good: fr.verified,
        transfer_good,
        makespan_within_bound: mk <= bound,
        load_and_subset_conditions: fr.stars.load_ok && fr.stars.subset_ok,
    };
    let report = PipelineReport {
        canonical: CanonicalSummary {
            groups: ci0.groups.len(),
            light_types: ci0.w.len(),
            p: s(&ci0.p),
            q: s(&ci0.q),
            theta: s(&ci0.theta),
            heavy_rotations: lift.heavy_rotations,
            light_rotations: lift.light_rotations,
            removed_machines: lift.removed.len(),
            permanent_lights: lift.permanent.len(),
        },
        coarsen: CoarsenSummary {
            steps: coarse.steps,
            theta_increase: s(&coarse.theta_increase),
            delta_increase: s(&coarse.delta_increase),
            final_p: s(&coarse.ci.p),
            final_q: s(&coarse.ci.q),
            final_theta: s(&coarse.ci.theta),
        },
        final_round: fr.stats,
        delta_report: s(&fr.delta_report),
        ledger,
        verification,
        polished_makespan: s(&polished),
    };
    Ok(SolveOutcome {
        path: SolvePath::Pipeline,
        schedule,
        makespan: mk,
        pipeline: Some(report),
        fallback: None,
        canonical: Some(ci0),
        coarse: Some(coarse.ci),
        heavy: Some(f),
        delta_report: Some(fr.delta_report),
    })
}

/// Reads a rational-valued CLI flag.
pub fn parse_param(name: &str, text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|e| Error::InvalidParams(format!("{name}: {e}")))
}

/// Checks that `δ` and `ρ` are usable: `ρ ∈ (0,1)`, `δ ≥ 0`, `ρδ < 1/5`.
pub fn check_lp_params(rho: &Rational, delta: &Rational) -> Result<()> {
    if !rho.is_positive() || rho >= &Rational::one() {
        return Err(Error::InvalidParams("rho must lie in (0,1)".into()));
    }
    if delta.is_negative() || rho * delta >= Rational::new(1.into(), 5.into()) {
        return Err(Error::InvalidParams("need delta >= 0 and rho*delta < 1/5".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;
    use crate::rational::rat;

    #[test]
    fn one_machine_gets_everything() {
        let inst = Instance {
            eps: rat(1, 4),
            machines: vec!["a".into()],
            heavy: vec![],
            light: (0..3).map(|j| Job::new(format!("l{j}"), vec![0])).collect(),
        };
        let out = solve(&inst, &SolveConfig::default()).unwrap();
        assert_eq!(out.path, SolvePath::Pipeline);
        assert_eq!(out.makespan, rat(3, 4));
        assert!(out.verified(), "{}", out.to_json(&inst));
    }

    #[test]
    fn overfull_machine_falls_back() {
        let inst = Instance {
            eps: rat(1, 2),
            machines: vec!["a".into()],
            heavy: vec![Job::new("h", vec![0]), Job::new("g", vec![0])],
            light: vec![],
        };
        let out = solve(&inst, &SolveConfig::default()).unwrap();
        assert_eq!(out.path, SolvePath::Fallback);
        assert_eq!(out.makespan, int(2));
        assert!(out.verified());
    }

    #[test]
    fn constants_round_trip() {
        let c = Constants::desk_scale();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_constants(&text).unwrap(), c);
        assert_eq!(parse_constants("{}").unwrap(), Constants::default());
        assert!(parse_constants("{\"q0\": 5}").is_err());
        assert!(parse_constants("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn streams_differ() {
        use rand::Rng;
        let a: u64 = module_rng(7, STREAM_COARSEN).gen();
        let b: u64 = module_rng(7, STREAM_FINAL).gen();
        assert_ne!(a, b);
    }
}
