//! Experiment grids: generate or load instances, run the pipeline per seed,
//! compare against the matching baseline and (when small) the exact optimum.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `instance` | generated index or file stem |
//! | `family` | `random`, `planted`, `vertex-cover` or `dir` |
//! | `seed` | pipeline seed |
//! | `machines`, `heavy`, `light`, `eps` | instance shape |
//! | `label` | vertex-cover family: `yes` when K is the minimum cover size, `no` below it |
//! | `opt` | exact optimum, when the instance has at most `brute_force_max_jobs` jobs |
//! | `path` | `pipeline` or `fallback` |
//! | `makespan` | pipeline schedule |
//! | `polished_makespan` | same heavy placement, light jobs re-placed optimally |
//! | `baseline_makespan` | slot-matching baseline |
//! | `ratio`, `baseline_ratio` | makespan / opt |
//! | `baseline_within_2_minus_eps` | baseline ≤ (2−ε)·opt, exact |
//! | `coarsen_steps`, `coarsen_resamples` | parameter-halving steps and their resamples |
//! | `final_resamples`, `bad_a` .. `bad_d` | final-round resamples, by event kind |
//! | `red_machines` | red machines in the final round |
//! | `verified` | every verification flag of the solve report |
//! | `error` | failure message; the other result columns are then empty |

use std::path::{Path, PathBuf};

use heavylight::baselines::{brute_force_opt, matching_baseline_search};
use heavylight::instance::{
    gen_planted, gen_random, gen_vertex_cover, parse_instance, random_cubic_graph, EligibilitySize, GenParams,
    Instance,
};
use heavylight::pipeline::{check_lp_params, parse_param, solve, Constants, SolveConfig, SolvePath};
use heavylight::rational::{format_rational, int, to_f64, Rational};
use heavylight::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub min: usize,
    pub max: usize,
}

impl Span {
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(self.min..=self.max.max(self.min))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub count: usize,
    pub machines: Span,
    pub heavy: Span,
    pub light: Span,
    /// Cycled through by instance index.
    pub eps: Vec<String>,
    pub eligibility: EligibilitySize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Source {
    Random(GridParams),
    Planted(GridParams),
    /// Alternates YES (K = minimum cover) and NO (K = minimum − 1) instances.
    VertexCover {
        count: usize,
        vertices: usize,
        #[serde(default = "default_vc_eps")]
        eps: String,
        #[serde(default)]
        seed: u64,
    },
    /// Every `*.json` instance in a directory, relative to the config file.
    Dir { path: PathBuf },
}

fn default_vc_eps() -> String {
    "1/6".into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Desk,
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: Source,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_rho")]
    pub rho: String,
    #[serde(default = "default_delta")]
    pub delta: String,
    #[serde(default)]
    pub preset: Preset,
    /// Replaces the preset entirely when present.
    #[serde(default)]
    pub constants: Option<Constants>,
    #[serde(default = "default_bf")]
    pub brute_force_max_jobs: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_rho() -> String {
    "0.6".into()
}
fn default_delta() -> String {
    "1/20".into()
}
fn default_bf() -> usize {
    14
}

impl ExperimentConfig {
    pub fn validate(&self) -> heavylight::Result<()> {
        check_lp_params(&parse_param("rho", &self.rho)?, &parse_param("delta", &self.delta)?)?;
        self.constants().validate()?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidParams("seeds must not be empty".into()));
        }
        if let Source::Random(g) | Source::Planted(g) = &self.source {
            if g.eps.is_empty() {
                return Err(Error::InvalidParams("eps list must not be empty".into()));
            }
            for e in &g.eps {
                parse_param("eps", e)?;
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> Constants {
        match (&self.constants, self.preset) {
            (Some(c), _) => c.clone(),
            (None, Preset::Desk) => Constants::desk_scale(),
            (None, Preset::Asymptotic) => Constants::default(),
        }
    }
}

pub fn parse_experiment_config(text: &str) -> heavylight::Result<ExperimentConfig> {
    parse_experiment_config_bytes(text.as_bytes())
}

pub fn parse_experiment_config_bytes(bytes: &[u8]) -> heavylight::Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_slice(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub family: String,
    pub seed: Option<u64>,
    pub machines: Option<usize>,
    pub heavy: Option<usize>,
    pub light: Option<usize>,
    pub eps: Option<String>,
    pub label: Option<String>,
    pub opt: Option<String>,
    pub path: Option<String>,
    pub makespan: Option<String>,
    pub polished_makespan: Option<String>,
    pub baseline_makespan: Option<String>,
    pub ratio: Option<String>,
    pub baseline_ratio: Option<String>,
    pub baseline_within_2_minus_eps: Option<bool>,
    pub coarsen_steps: Option<usize>,
    pub coarsen_resamples: Option<usize>,
    pub final_resamples: Option<usize>,
    pub bad_a: Option<usize>,
    pub bad_b: Option<usize>,
    pub bad_c: Option<usize>,
    pub bad_d: Option<usize>,
    pub red_machines: Option<usize>,
    pub verified: Option<bool>,
    pub error: Option<String>,
}

/// One generated or loaded instance, or the reason it could not be made.
pub struct Item {
    pub name: String,
    pub family: &'static str,
    pub label: Option<String>,
    pub instance: Result<Instance, String>,
}

fn grid_instance(g: &GridParams, i: usize, planted: bool) -> heavylight::Result<Instance> {
    let seed = g.seed.wrapping_add(i as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let machines = g.machines.draw(&mut rng).max(1);
    let eps = parse_param("eps", &g.eps[i % g.eps.len()])?;
    let mut heavy = g.heavy.draw(&mut rng);
    let mut light = g.light.draw(&mut rng);
    if planted {
        heavy = heavy.min(machines);
        let per = heavylight::rational::floor_int(&(Rational::from_integer(1.into()) / &eps));
        let per: usize = per.try_into().unwrap_or(usize::MAX);
        light = light.min((machines - heavy).saturating_mul(per));
    }
    let eligibility = match g.eligibility {
        EligibilitySize::Fixed { size } => EligibilitySize::Fixed { size: size.min(machines) },
        EligibilitySize::Uniform { min, max } => EligibilitySize::Uniform {
            min: min.min(machines),
            max: max.min(machines),
        },
    };
    let params = GenParams { machines, heavy, light, eps, eligibility, seed };
    if planted {
        gen_planted(&params)
    } else {
        gen_random(&params)
    }
}

pub fn collect_items(source: &Source, base: &Path) -> Result<Vec<Item>, CliError> {
    let items = match source {
        Source::Random(g) | Source::Planted(g) => {
            let planted = matches!(source, Source::Planted(_));
            let family = if planted { "planted" } else { "random" };
            (0..g.count)
                .map(|i| Item {
                    name: i.to_string(),
                    family,
                    label: None,
                    instance: grid_instance(g, i, planted).map_err(|e| e.to_string()),
                })
                .collect()
        }
        Source::VertexCover { count, vertices, eps, seed } => {
            let eps = parse_param("eps", eps)?;
            (0..*count)
                .map(|i| {
                    let yes = i % 2 == 0;
                    let made = (|| {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                        let g = random_cubic_graph(*vertices, &mut rng)?;
                        let mvc = g.min_vertex_cover()?;
                        let k = if yes { mvc } else { mvc.saturating_sub(1) };
                        gen_vertex_cover(&g, k, &eps)
                    })();
                    Item {
                        name: i.to_string(),
                        family: "vertex-cover",
                        label: Some(if yes { "yes" } else { "no" }.into()),
                        instance: made.map_err(|e| e.to_string()),
                    }
                })
                .collect()
        }
        Source::Dir { path } => {
            let dir = base.join(path);
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| CliError::Io(dir.clone(), e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            files
                .into_iter()
                .map(|p| Item {
                    name: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                    family: "dir",
                    label: None,
                    instance: std::fs::read_to_string(&p)
                        .map_err(|e| e.to_string())
                        .and_then(|t| parse_instance(&t).map_err(|e| e.to_string())),
                })
                .collect()
        }
    };
    Ok(items)
}

fn ratio(a: &Rational, b: &Rational) -> Option<String> {
    (*b > Rational::from_integer(0.into())).then(|| format!("{:.6}", to_f64(&(a / b))))
}

fn rows_for(item: &Item, cfg: &ExperimentConfig, solve_cfg: &SolveConfig) -> Vec<Row> {
    let blank = Row {
        instance: item.name.clone(),
        family: item.family.into(),
        label: item.label.clone(),
        ..Row::default()
    };
    let inst = match &item.instance {
        Ok(i) => i,
        Err(e) => return vec![Row { error: Some(e.clone()), ..blank }],
    };
    let shape = Row {
        machines: Some(inst.num_machines()),
        heavy: Some(inst.heavy.len()),
        light: Some(inst.light.len()),
        eps: Some(format_rational(&inst.eps)),
        ..blank
    };
    let mut errors = Vec::new();
    let opt = if inst.heavy.len() + inst.light.len() <= cfg.brute_force_max_jobs {
        brute_force_opt(inst).map(|(v, _)| v).map_err(|e| errors.push(format!("opt: {e}"))).ok()
    } else {
        None
    };
    let baseline = match matching_baseline_search(inst) {
        Ok(b) => b.map(|b| b.makespan),
        Err(e) => {
            errors.push(format!("baseline: {e}"));
            None
        }
    };
    let base_row = Row {
        opt: opt.as_ref().map(format_rational),
        baseline_makespan: baseline.as_ref().map(format_rational),
        baseline_ratio: baseline.as_ref().zip(opt.as_ref()).and_then(|(b, o)| ratio(b, o)),
        baseline_within_2_minus_eps: baseline
            .as_ref()
            .zip(opt.as_ref())
            .map(|(b, o)| *b <= (int(2) - &inst.eps) * o),
        ..shape
    };
    cfg.seeds
        .iter()
        .map(|&seed| {
            let mut row = Row { seed: Some(seed), ..base_row.clone() };
            let mut errs = errors.clone();
            match solve(inst, &SolveConfig { seed, ..solve_cfg.clone() }) {
                Ok(out) => {
                    row.path = Some(
                        match out.path {
                            SolvePath::Pipeline => "pipeline",
                            SolvePath::Fallback => "fallback",
                        }
                        .into(),
                    );
                    row.makespan = Some(format_rational(&out.makespan));
                    row.ratio = opt.as_ref().and_then(|o| ratio(&out.makespan, o));
                    row.verified = Some(out.verified());
                    if let Some(p) = &out.pipeline {
                        row.polished_makespan = Some(p.polished_makespan.clone());
                        row.coarsen_steps = Some(p.coarsen.steps.len());
                        row.coarsen_resamples = Some(p.coarsen.steps.iter().map(|s| s.resamples).sum());
                        let k = &p.final_round.resamples_by_kind;
                        let get = |name: &str| Some(k.get(name).copied().unwrap_or(0));
                        row.final_resamples = Some(p.final_round.resamples);
                        row.bad_a = get("A");
                        row.bad_b = get("B");
                        row.bad_c = get("C");
                        row.bad_d = get("D");
                        row.red_machines = Some(p.final_round.red);
                    }
                }
                Err(e) => errs.push(format!("solve: {e}")),
            }
            if !errs.is_empty() {
                row.error = Some(errs.join("; "));
            }
            row
        })
        .collect()
}

/// Rows in input order (instance, then seed), whatever order they finish in.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<Row>, CliError> {
    cfg.validate()?;
    let solve_cfg = SolveConfig {
        rho: parse_param("rho", &cfg.rho)?,
        delta: parse_param("delta", &cfg.delta)?,
        constants: cfg.constants(),
        seed: 0,
    };
    let items = collect_items(&cfg.source, base)?;
    let work = || -> Vec<Row> {
        items
            .par_iter()
            .map(|it| rows_for(it, cfg, &solve_cfg))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
            .map(|pool| pool.install(work)),
        None => Ok(work()),
    }
}

pub fn rows_to_csv(rows: &[Row]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Written even when there are no rows.
pub const HEADER: [&str; 26] = [
    "instance",
    "family",
    "seed",
    "machines",
    "heavy",
    "light",
    "eps",
    "label",
    "opt",
    "path",
    "makespan",
    "polished_makespan",
    "baseline_makespan",
    "ratio",
    "baseline_ratio",
    "baseline_within_2_minus_eps",
    "coarsen_steps",
    "coarsen_resamples",
    "final_resamples",
    "bad_a",
    "bad_b",
    "bad_c",
    "bad_d",
    "red_machines",
    "verified",
    "error",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        parse_experiment_config(
            r#"{"source": {"family": "random", "count": 3,
                "machines": {"min": 2, "max": 4}, "heavy": {"min": 1, "max": 3},
                "light": {"min": 0, "max": 4}, "eps": ["1/2", "1/3"],
                "eligibility": {"kind": "uniform", "min": 1, "max": 2}},
               "seeds": [1, 2]}"#,
        )
        .unwrap()
    }

    #[test]
    fn header_matches_row_fields() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(Row::default()).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
    }

    #[test]
    fn rows_keep_input_order() {
        let rows = run_experiment(&small(), Path::new(".")).unwrap();
        let keys: Vec<(String, Option<u64>)> = rows.iter().map(|r| (r.instance.clone(), r.seed)).collect();
        let want: Vec<(String, Option<u64>)> = (0..3)
            .flat_map(|i| [1, 2].map(|s| (i.to_string(), Some(s))))
            .collect();
        assert_eq!(keys, want);
    }

    #[test]
    fn empty_grid_still_has_header() {
        let csv = rows_to_csv(&[]).unwrap();
        assert_eq!(csv.trim_end(), HEADER.join(","));
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(parse_experiment_config(r#"{"source": {"family": "dir", "path": "x"}, "bogus": 1}"#).is_err());
        assert!(parse_experiment_config(r#"{"source": {"family": "dir", "path": "x"}, "seeds": []}"#).is_err());
    }
}
