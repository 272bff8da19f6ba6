//! `nslimit`: limits of NS and pluri-Bergman measures from dual graph models.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nslimit_core::dsl::{emit_model, parse_model};
use nslimit_core::emit::{self, Names};
use nslimit_core::limits::{
    dimension_summary, mu_infinity_fixed_b, mu_infinity_fixed_qb, ns_limit_measure, pb_limit_measure,
    pushforward_to_fiber, pushforward_to_hyb, stable_curve_ns_measure,
};
use nslimit_core::local::experiments::{norm_asymptotics_experiment, pairing_experiment, region_mass_experiment};
use nslimit_core::local::genus0::Genus0Options;
use nslimit_core::local::{LaurentFamily, OptimizerSpec, QuadratureSpec};
use nslimit_core::reduction::{classify, essential_skeleton, minimal_snc_model, stable_dual_graph};
use nslimit_core::{validate, DualGraphModel, Error, Result};

#[derive(Parser)]
#[command(name = "nslimit", version, about = "Limit NS and pluri-Bergman measures of degenerating curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model.
    Validate(ModelArgs),
    /// Contract to the minimal snc model and print the domination log.
    Reduce(ModelArgs),
    /// Stable dual graph of the minimal model.
    StableGraph(ModelArgs),
    /// Essential skeleton as a metric graph.
    Skeleton(ModelArgs),
    /// Limit NS or pluri-Bergman measure, pushed to a target space.
    Measure {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value = "cc")]
        push: Push,
        /// Estimate NS masses of rigid genus-0 components numerically.
        #[arg(long)]
        estimate: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Limit of the NS measures as m grows.
    Limit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// NS limit on the stable curve.
    StableMeasure(ModelArgs),
    /// Dimension count (2m−1)(g−1) + deg B = s + Σ h⁰.
    Dims(ModelArgs),
    /// Chart-scale convergence experiment.
    Verify {
        #[arg(long, value_enum)]
        experiment: Experiment,
        /// Comma-separated, strictly increasing log|t|⁻¹ values.
        #[arg(long, value_delimiter = ',', required = true)]
        logt: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// A family `c@alpha,beta + ...`; repeat for several. Defaults depend on the experiment.
        #[arg(long)]
        family: Vec<String>,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        chain_length: u32,
        /// Region `alpha,beta` in log|w|/log|t| for region-mass.
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.4])]
        region: Vec<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Model file.
    path: PathBuf,
    /// Also write a Graphviz rendering here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ns,
    Pb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Push {
    Cc,
    Hyb,
    Fiber,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "fixed-B")]
    FixedB,
    #[value(name = "fixed-QB")]
    FixedQb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Norm,
    RegionMass,
    Pairing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Columns,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome { text, code }) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            print!("{}", emit::to_text(&emit::error(&e)));
            eprintln!("nslimit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn json(value: Value) -> Self {
        Outcome { text: emit::to_text(&value), code: 0 }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn write_dot(path: &Option<PathBuf>, text: impl FnOnce() -> String) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, text()).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Parsed and validated model.
fn load(args: &ModelArgs) -> Result<DualGraphModel> {
    let doc = parse_model(&read(&args.path)?).map_err(Error::Parse)?;
    validate(&doc.model).into_result()?;
    Ok(doc.model)
}

/// Minimal snc model of a validated input.
fn load_minimal(args: &ModelArgs) -> Result<DualGraphModel> {
    Ok(minimal_snc_model(&load(args)?)?.0)
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Validate(args) => {
            let doc = parse_model(&read(&args.path)?).map_err(Error::Parse)?;
            let report = validate(&doc.model);
            let mut out = emit::validation(&report);
            if !report.has_errors() {
                out["model"] = emit::model(&doc.model);
                out["classes"] = emit::classes(&classify(&doc.model)?, &doc.model);
                write_dot(&args.dot, || emit::dot(&doc.model, None))?;
            }
            let code = if report.has_errors() { 1 } else { 0 };
            Ok(Outcome { text: emit::to_text(&out), code })
        }
        Command::Reduce(args) => {
            let model = load(&args)?;
            let (minimal, map) = minimal_snc_model(&model)?;
            write_dot(&args.dot, || emit::dot(&minimal, None))?;
            let names = Names(vec![&model, &minimal]);
            Ok(Outcome::json(json!({
                "model": emit::model(&minimal),
                "text": emit_model(&minimal),
                "log": emit::domination(&map, &names),
                "warnings": validate(&minimal).warnings().map(|d| d.message.clone()).collect::<Vec<_>>(),
            })))
        }
        Command::StableGraph(args) => {
            let model = load_minimal(&args)?;
            write_dot(&args.dot, || emit::dot(&model, None))?;
            let graph = stable_dual_graph(&model)?;
            Ok(Outcome::json(emit::stable_graph(&graph, &Names(vec![&model]))))
        }
        Command::Skeleton(args) => {
            let model = load(&args)?;
            let (graph, minimal) = essential_skeleton(&model)?;
            write_dot(&args.dot, || emit::dot(&minimal, None))?;
            Ok(Outcome::json(emit::metric_graph(&graph, &Names(vec![&minimal]))))
        }
        Command::Measure { model: args, kind, push, estimate, seed } => {
            let model = load_minimal(&args)?;
            let options = Genus0Options { optimizer: OptimizerSpec::default().with_seed(seed), ..Default::default() };
            let measure = match kind {
                Kind::Ns => ns_limit_measure(&model, estimate.then_some(&options))?,
                Kind::Pb => pb_limit_measure(&model)?,
            };
            write_dot(&args.dot, || emit::dot(&model, Some(&measure)))?;
            let names = Names(vec![&model]);
            let value = match push {
                Push::Cc => emit::cc_measure(&measure, &names),
                Push::Hyb => emit::hyb_measure(&pushforward_to_hyb(&measure, &model)?, &names),
                Push::Fiber => emit::fiber_measure(&pushforward_to_fiber(&measure), &names),
            };
            Ok(Outcome::json(value))
        }
        Command::Limit { model: args, mode } => {
            let model = load_minimal(&args)?;
            write_dot(&args.dot, || emit::dot(&model, None))?;
            let measure = match mode {
                Mode::FixedB => mu_infinity_fixed_b(&model)?,
                Mode::FixedQb => mu_infinity_fixed_qb(&model)?,
            };
            Ok(Outcome::json(emit::hyb_measure(&measure, &Names(vec![&model]))))
        }
        Command::StableMeasure(args) => {
            let model = load_minimal(&args)?;
            write_dot(&args.dot, || emit::dot(&model, None))?;
            let graph = stable_dual_graph(&model)?;
            let measure = stable_curve_ns_measure(&graph, model.m())?;
            Ok(Outcome::json(emit::stable_curve_measure(&measure, &graph, &Names(vec![&model]))))
        }
        Command::Dims(args) => {
            let model = load_minimal(&args)?;
            write_dot(&args.dot, || emit::dot(&model, None))?;
            Ok(Outcome::json(emit::dimensions(&dimension_summary(&model)?, &model)))
        }
        Command::Verify { experiment, logt, seed, family, m, chain_length, region, format } => {
            let families = families(experiment, &family, m, chain_length)?;
            let spec = QuadratureSpec::default();
            let optimizer = OptimizerSpec::default().with_seed(seed);
            let result = match experiment {
                Experiment::Norm => {
                    let [f] = families.as_slice() else {
                        return Err(Error::InvalidInput("the norm experiment takes exactly one family".into()));
                    };
                    norm_asymptotics_experiment(f, chain_length, &logt, &spec)?
                }
                Experiment::RegionMass => {
                    let &[alpha, beta] = region.as_slice() else {
                        return Err(Error::InvalidInput("--region takes two numbers alpha,beta".into()));
                    };
                    region_mass_experiment(&families, (alpha, beta), &|_| 1.0, &logt, &spec, &optimizer)?
                }
                Experiment::Pairing => pairing_experiment(&families, &logt, &spec, &optimizer)?,
            };
            let text = match format {
                Format::Json => emit::to_text(&serde_json::to_value(&result).expect("serializable")),
                Format::Columns => result.to_columns(),
            };
            Ok(Outcome { text, code: 0 })
        }
    }
}

fn families(experiment: Experiment, given: &[String], m: u32, chain_length: u32) -> Result<Vec<LaurentFamily>> {
    if !given.is_empty() {
        return given.iter().map(|text| LaurentFamily::parse(text, m, chain_length)).collect();
    }
    let defaults = match experiment {
        Experiment::Norm => vec![LaurentFamily::perturbed_pole(m, 0.3)?],
        Experiment::RegionMass => vec![LaurentFamily::monomial(m, m)?, LaurentFamily::monomial(m, m - 1)?],
        Experiment::Pairing => vec![LaurentFamily::perturbed_pole(m, 0.3)?, LaurentFamily::monomial(m, m - 1)?],
    };
    defaults.into_iter().map(|f| f.with_chain_length(chain_length)).collect()
}
