//! Scenario runner behind the `dendro` binary.
//!
//! A run is deterministic given its config. Reports are JSON, tables CSV,
//! and every rational is written as `p/q`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chaos::{self, ChaosParams, SetFamily};
use crate::error::Error;
use crate::exact_builder;
use crate::gallery::{self, Counterexample};
use crate::length_expanding::zigzag;
use crate::metric_tree::{Dendrite, PointRef, Region};
use crate::odometer::{self, Address};
use crate::rational::{self, serde_opt_q, serde_q, Q};
use crate::tree_map::TreeMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

pub const SEED_ENV: &str = "DENDRO_SEED";

/// Where a scenario gets its map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MapSource {
    File { path: PathBuf },
    Counterexample { name: String, size: usize },
    Tent,
}

/// The fixed set for the exactness scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedSpec {
    /// Arc between two named points (marked names or `v<id>`).
    Arc {
        from: String,
        to: String,
    },
    Point {
        at: String,
    },
}

impl FixedSpec {
    /// `"A"` or `"base"` is the base arc of a comb, `"x:y"` an arc between named points.
    pub fn parse_arc(s: &str) -> Result<Self, Error> {
        match s {
            "A" | "base" => Ok(FixedSpec::Arc { from: "base_left".into(), to: "base_right".into() }),
            _ => {
                let (a, b) =
                    s.split_once(':').ok_or_else(|| Error::Parse(format!("arc {s:?} is not A, base or from:to")))?;
                Ok(FixedSpec::Arc { from: a.into(), to: b.into() })
            }
        }
    }

    fn region(&self, d: &Dendrite) -> Result<Region, Error> {
        match self {
            FixedSpec::Arc { from, to } => d.geodesic(&named_point(d, from)?, &named_point(d, to)?),
            FixedSpec::Point { at } => d.point_region(&named_point(d, at)?),
        }
    }
}

fn named_point(d: &Dendrite, name: &str) -> Result<PointRef, Error> {
    if let Ok(p) = d.marked(name) {
        return Ok(p.clone());
    }
    let id = name
        .strip_prefix('v')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&v| v < d.vertex_count())
        .ok_or_else(|| Error::InvalidPoint(format!("no marked point or vertex {name:?}")))?;
    Ok(PointRef::Vertex(id))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum Scenario {
    OdometerDiam {
        alpha: Address,
        steps: usize,
    },
    GchVerdict {
        map: MapSource,
        family: FamilyChoice,
        n0: usize,
        horizon: usize,
        /// Li-Yorke pairs to sample; 0 skips sampling.
        ly_pairs: usize,
        #[serde(with = "serde_q")]
        delta: Q,
        #[serde(with = "serde_opt_q")]
        epsilon: Option<Q>,
    },
    Exactness {
        dendrite: PathBuf,
        fixed: FixedSpec,
        #[serde(with = "serde_q")]
        q: Q,
        #[serde(with = "serde_q")]
        rho: Q,
        n_max: usize,
        splits: u32,
    },
}

/// A set family before the seed is known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyChoice {
    Balls { levels: u32 },
    FreeArcs,
    Subdendrites { count: usize },
}

impl FamilyChoice {
    fn resolve(&self, seed: Option<u64>) -> Result<SetFamily, Error> {
        Ok(match self {
            FamilyChoice::Balls { levels } => SetFamily::Balls { levels: *levels },
            FamilyChoice::FreeArcs => SetFamily::FreeArcs,
            FamilyChoice::Subdendrites { count } => SetFamily::Subdendrites { count: *count, seed: need_seed(seed)? },
        })
    }

    fn sampled(&self) -> bool {
        matches!(self, FamilyChoice::Subdendrites { .. })
    }
}

fn need_seed(seed: Option<u64>) -> Result<u64, Error> {
    seed.ok_or_else(|| Error::InvalidArgument(format!("sampled runs need --seed or {SEED_ENV}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn is_sampled(&self) -> bool {
        match &self.scenario {
            Scenario::GchVerdict { family, ly_pairs, .. } => family.sampled() || *ly_pairs > 0,
            _ => false,
        }
    }
}

/// Which step of a run failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Build,
    Check,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Build => "build",
            Stage::Check => "check",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug)]
pub struct RunError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for RunError {}

fn at(stage: Stage) -> impl Fn(Error) -> RunError {
    move |error| RunError { stage, error }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The finite horizon gave no verdict either way.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Success => EXIT_OK,
            Outcome::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

pub fn load_map(src: &MapSource) -> Result<TreeMap, Error> {
    match src {
        MapSource::File { path } => TreeMap::from_json(&fs::read_to_string(path)?),
        MapSource::Tent => zigzag(2),
        MapSource::Counterexample { name, size } => match gallery::build_counterexample(name, *size)? {
            Counterexample::Gch(sys) => Ok(sys.map),
            Counterexample::Gehman(g) => Ok(g.map),
            Counterexample::CantorShift(_) => {
                Err(Error::InvalidArgument("cantor_shift is symbolic and has no tree map".into()))
            }
        },
    }
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| at(Stage::Write)(e.into()))?;
    }
    fs::write(path, contents).map_err(|e| at(Stage::Write)(e.into()))
}

/// Rows `n, ell, diam` of `diam H^n(K_α)`.
pub fn odometer_csv(alpha: &Address, steps: usize) -> String {
    let mut out = String::from("n,ell,diam\n");
    for (n, ell, diam) in odometer::fiber_traj_rows(alpha, steps) {
        out.push_str(&format!("{n},{ell},{}\n", rational::fmt(&diam)));
    }
    out
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    if config.is_sampled() {
        need_seed(config.seed).map_err(at(Stage::Config))?;
    }
    match &config.scenario {
        Scenario::OdometerDiam { alpha, steps } => {
            write(&config.out, &odometer_csv(alpha, *steps))?;
            Ok(RunOutput {
                outcome: Outcome::Success,
                files: vec![config.out.clone()],
                summary: format!("{} rows for alpha = {alpha}", steps + 1),
            })
        }
        Scenario::GchVerdict { map, family, n0, horizon, ly_pairs, delta, epsilon } => {
            let f = load_map(map).map_err(at(Stage::Load))?;
            let fam = family.resolve(config.seed).map_err(at(Stage::Config))?;
            let params = ChaosParams { n0: *n0, horizon: *horizon, tolerance: Q::from_integer(0.into()) };
            let mut report = chaos::verdict(&f, &fam, &params).map_err(at(Stage::Check))?;
            if *ly_pairs > 0 {
                let eps = epsilon.clone().unwrap_or_else(|| chaos::default_epsilon(f.domain()));
                let seed = need_seed(config.seed).map_err(at(Stage::Config))?;
                report.ly_sample =
                    Some(chaos::ly_sample(&f, *ly_pairs, *horizon, delta, &eps, seed).map_err(at(Stage::Check))?);
            }
            write(&config.out, &report.to_json())?;
            let mut files = vec![config.out.clone()];
            let members = fam.generate(f.domain());
            if members.len() >= 2 {
                let csv_path = config.out.with_extension("csv");
                write(&csv_path, &chaos::trajectory_csv(&f, &members[0], &members[1], *horizon))?;
                files.push(csv_path);
            }
            Ok(RunOutput {
                outcome: if report.chaos_evidence { Outcome::Success } else { Outcome::Inconclusive },
                files,
                summary: format!(
                    "members {} prox_pass {} sens0_pass {} eta_estimate {}",
                    report.members,
                    report.prox_pass,
                    report.sens0_pass,
                    rational::fmt(&report.eta_estimate)
                ),
            })
        }
        Scenario::Exactness { dendrite, fixed, q, rho, n_max, splits } => {
            let text = fs::read_to_string(dendrite).map_err(|e| at(Stage::Load)(e.into()))?;
            let d = Dendrite::from_json(&text).map_err(at(Stage::Load))?;
            let a = fixed.region(&d).map_err(at(Stage::Config))?;
            let ex = exact_builder::build_exact(&d, &a, q, rho).map_err(at(Stage::Build))?;
            let cert = ex.verify(*n_max, *splits).map_err(at(Stage::Check))?;
            write(&config.out, &serde_json::to_string_pretty(&cert).expect("certificate serializes"))?;
            let covered = cert.entries.iter().filter(|c| c.n.is_some()).count();
            Ok(RunOutput {
                outcome: if cert.all_covered { Outcome::Success } else { Outcome::Inconclusive },
                files: vec![config.out.clone()],
                summary: format!("{covered}/{} pieces cover their goal within {n_max}", cert.entries.len()),
            })
        }
    }
}
