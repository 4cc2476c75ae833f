#![allow(clippy::large_enum_variant)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dendro::experiment::{self, ExperimentConfig, FamilyChoice, FixedSpec, MapSource, Scenario, EXIT_FAILURE};
use dendro::gallery::{self, Counterexample};
use dendro::odometer;
use dendro::rational::{self, Q};

#[derive(Parser)]
#[command(name = "dendro", version, about = "Exact experiments with maps on dendrites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    OdometerDiam,
    GchVerdict,
    Exactness,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Balls,
    FreeArcs,
    Subdendrites,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario from flags or from a JSON config.
    Run {
        #[arg(long, value_enum, required_unless_present = "config")]
        scenario: Option<ScenarioName>,
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        #[arg(long, default_value = "1^inf")]
        alpha: String,
        #[arg(long, default_value_t = 2187)]
        steps: usize,
        /// Tree map JSON file.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Build the map from a named counterexample instead of a file.
        #[arg(long, conflicts_with = "map")]
        counterexample: Option<String>,
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[arg(long, value_enum, default_value = "balls")]
        family: FamilyName,
        #[arg(long, default_value_t = 4)]
        levels: u32,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long = "N", default_value_t = 200)]
        horizon: usize,
        #[arg(long = "N0", default_value_t = 0)]
        n0: usize,
        #[arg(long, default_value_t = 0)]
        ly_pairs: usize,
        #[arg(long, default_value = "1/1000")]
        delta: String,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        dendrite: Option<PathBuf>,
        /// `A` for the base arc, or `from:to` with marked names or `v<id>`.
        #[arg(long, default_value = "A")]
        arc: String,
        /// Fix a point instead of an arc.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value = "1/2")]
        q: String,
        #[arg(long, default_value = "6/5")]
        rho: String,
        #[arg(long, default_value_t = 64)]
        nmax: usize,
        #[arg(long, default_value_t = 1)]
        splits: u32,
        #[arg(long, env = experiment::SEED_ENV)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write a dendrite descriptor.
    Gen {
        family: String,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long)]
        arms: Option<usize>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        qmax: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write the tree map of a named counterexample.
    Build {
        name: String,
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Rectangles of the odometer space pattern as CSV.
    ExportPattern {
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// List dendrite families and counterexamples.
    List,
}

const PATTERN_DEPTH_CAP: u32 = 8;

fn parse_q(s: &str) -> Result<Q, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("dendro: {msg}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, String> {
    match cmd {
        Cmd::Run {
            scenario,
            config,
            alpha,
            steps,
            map,
            counterexample,
            size,
            family,
            levels,
            count,
            horizon,
            n0,
            ly_pairs,
            delta,
            epsilon,
            dendrite,
            arc,
            point,
            q,
            rho,
            nmax,
            splits,
            seed,
            out,
        } => {
            let cfg = if let Some(path) = config {
                let text = fs::read_to_string(&path).map_err(|e| format!("config stage failed: {e}"))?;
                let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| format!("config stage failed: {e}"))?;
                cfg.seed = cfg.seed.or(seed);
                cfg
            } else {
                let scenario = match scenario.expect("clap requires scenario or config") {
                    ScenarioName::OdometerDiam => Scenario::OdometerDiam {
                        alpha: alpha.parse().map_err(|e| format!("config stage failed: {e}"))?,
                        steps,
                    },
                    ScenarioName::GchVerdict => Scenario::GchVerdict {
                        map: match (map, counterexample) {
                            (Some(path), _) => MapSource::File { path },
                            (None, Some(name)) => MapSource::Counterexample { name, size },
                            (None, None) => MapSource::Tent,
                        },
                        family: match family {
                            FamilyName::Balls => FamilyChoice::Balls { levels },
                            FamilyName::FreeArcs => FamilyChoice::FreeArcs,
                            FamilyName::Subdendrites => FamilyChoice::Subdendrites { count },
                        },
                        n0,
                        horizon,
                        ly_pairs,
                        delta: parse_q(&delta)?,
                        epsilon: epsilon.as_deref().map(parse_q).transpose()?,
                    },
                    ScenarioName::Exactness => Scenario::Exactness {
                        dendrite: dendrite.ok_or("exactness needs --dendrite")?,
                        fixed: match point {
                            Some(at) => FixedSpec::Point { at },
                            None => FixedSpec::parse_arc(&arc).map_err(|e| e.to_string())?,
                        },
                        q: parse_q(&q)?,
                        rho: parse_q(&rho)?,
                        n_max: nmax,
                        splits,
                    },
                };
                let out = out.unwrap_or_else(|| {
                    PathBuf::from(match scenario {
                        Scenario::OdometerDiam { .. } => "diam.csv",
                        Scenario::GchVerdict { .. } => "report.json",
                        Scenario::Exactness { .. } => "certificate.json",
                    })
                });
                ExperimentConfig { scenario, seed, out }
            };
            let res = experiment::run(&cfg).map_err(|e| e.to_string())?;
            for f in &res.files {
                println!("wrote {}", f.display());
            }
            println!("{}", res.summary);
            Ok(res.exit_code())
        }
        Cmd::Gen { family, depth, arms, q, qmax, out } => {
            let ratio = q.as_deref().map(parse_q).transpose()?;
            let desc = gallery::descriptor_from_params(&family, depth, arms, ratio, qmax).map_err(|e| e.to_string())?;
            let d = gallery::generate(&desc).map_err(|e| e.to_string())?;
            fs::write(&out, d.to_json()).map_err(|e| e.to_string())?;
            println!("wrote {} ({} vertices, {} edges)", out.display(), d.vertex_count(), d.edge_count());
            Ok(0)
        }
        Cmd::Build { name, size, out } => {
            let json =
                match gallery::build_counterexample(&name, size).map_err(|e| format!("build stage failed: {e}"))? {
                    Counterexample::Gch(sys) => sys.map.to_json(),
                    Counterexample::Gehman(g) => g.map.to_json(),
                    Counterexample::CantorShift(_) => return Err("cantor_shift is symbolic and has no tree map".into()),
                };
            if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            }
            fs::write(&out, json).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Cmd::ExportPattern { depth, out } => {
            if depth > PATTERN_DEPTH_CAP {
                return Err(format!("depth is capped at {PATTERN_DEPTH_CAP}"));
            }
            fs::write(&out, odometer::pattern_csv(depth)).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Cmd::List => {
            for name in gallery::FAMILIES {
                let c = gallery::classify_name(name).map_err(|e| e.to_string())?;
                println!(
                    "{name}: completely_regular={} all_orders_finite={} in_theorem_class={}",
                    c.completely_regular, c.all_orders_finite, c.in_theorem_class
                );
            }
            for name in gallery::COUNTEREXAMPLES {
                println!("{name}");
            }
            Ok(0)
        }
    }
}
