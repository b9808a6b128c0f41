//! Batch command-line front end: ingest and validate borehole CSVs, generate
//! synthetic datasets, run the granulation pipeline, inspect rules, and
//! export prediction grids.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data validation error,
//! 3 no feasible candidate.

mod config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lugeon_core::data::{dataset_to_csv, granules_to_csv, parse_borehole_csv_report};
use lugeon_core::nfis::TskRuleBase;
use lugeon_core::pipeline::{
    predict_grid, run_close_open, run_rst_branch, AggregatedBox, CandidateModel, GridSpec,
    SweepAxis,
};
use lugeon_core::rst::rules_to_text;
use lugeon_core::som::{codebook_to_csv, extract_crisp_granules};
use lugeon_core::Error;

use config::{parse_synth_config, RunConfig};

#[derive(Parser)]
#[command(name = "lugeon", version, about = "Granular permeability analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Nfis,
    Rst,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a borehole CSV and write the accepted rows plus a report.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Exit 0 even when some rows were rejected.
        #[arg(long)]
        allow_partial: bool,
    },
    /// Generate a synthetic dataset from a TOML recipe.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the granulation pipeline and write all artifacts to a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
        /// Overwrite an existing output directory.
        #[arg(long)]
        force: bool,
        /// Override the pipeline seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the rules of a saved model in readable form.
    Rules {
        #[arg(long)]
        model: PathBuf,
    },
    /// Evaluate a saved model over a 2-D sweep and write a grid CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Swept axis as name:min:max:steps, e.g. z:1150:1210:25
        #[arg(long)]
        axis1: String,
        #[arg(long)]
        axis2: String,
        /// Fixed input as name=value; repeat per input.
        #[arg(long = "fixed")]
        fixed: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also render an SVG heat map to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

/// Command failures carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem (exit 1).
    Config(String),
    /// Input data failed validation (exit 2).
    Data(String),
    /// The pipeline finished without a feasible candidate (exit 3).
    NoFeasible(Box<AggregatedBox>),
}

impl CliError {
    fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    fn data(err: Error) -> Self {
        match err {
            Error::NoFeasibleCandidate(b) => CliError::NoFeasible(b),
            e @ (Error::RowParse { .. }
            | Error::MissingColumn(_)
            | Error::EmptyInput
            | Error::DegenerateFeature(_)) => CliError::Data(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::NoFeasible(_) => 3,
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    config_path: String,
    input_paths: Vec<String>,
    output_dir: String,
    seed: u64,
    tool_version: String,
    timestamp_unix: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2; usage problems are exit 1 here
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(msg) => eprintln!("error: {msg}"),
                CliError::Data(msg) => eprintln!("data error: {msg}"),
                CliError::NoFeasible(_) => {
                    eprintln!("error: no candidate met the feasibility criteria")
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { csv, out, allow_partial } => cmd_ingest(&csv, &out, allow_partial),
        Command::Synth { config, out } => cmd_synth(&config, &out),
        Command::Run { config, out, mode, force, seed } => cmd_run(&config, &out, mode, force, seed),
        Command::Rules { model } => cmd_rules(&model),
        Command::Predict { model, axis1, axis2, fixed, out, svg } => {
            cmd_predict(&model, &axis1, &axis2, &fixed, &out, svg.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_ingest(csv: &Path, out: &Path, allow_partial: bool) -> Result<(), CliError> {
    let text = read(csv)?;
    let report = parse_borehole_csv_report(&text).map_err(CliError::data)?;

    let mut lines = Vec::new();
    lines.push(format!(
        "{} accepted, {} rejected",
        report.dataset.len(),
        report.rejected.len()
    ));
    for w in &report.warnings {
        lines.push(format!("warning: {w}"));
    }
    for r in &report.rejected {
        lines.push(format!("rejected line {}: field `{}`: {}", r.line, r.field, r.reason));
    }
    let report_text = lines.join("\n") + "\n";

    write(out, &dataset_to_csv(&report.dataset))?;
    let report_path = out.with_extension("report.txt");
    write(&report_path, &report_text)?;
    print!("{report_text}");

    if report.rejected.is_empty() || allow_partial {
        Ok(())
    } else {
        Err(CliError::Data(format!("{} rows rejected", report.rejected.len())))
    }
}

fn cmd_synth(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = parse_synth_config(&read(config)?)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let spec = cfg.to_spec(base)?;
    let dataset = lugeon_core::data::generate_synthetic(&spec).map_err(CliError::data)?;
    write(out, &dataset_to_csv(&dataset))?;
    println!("wrote {} synthetic records to {}", dataset.len(), out.display());
    Ok(())
}

fn prepare_out_dir(out: &Path, force: bool) -> Result<(), CliError> {
    if out.exists() {
        if !force {
            return Err(CliError::config(format!(
                "output directory {} exists; pass --force to overwrite",
                out.display()
            )));
        }
    } else {
        fs::create_dir_all(out)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    }
    Ok(())
}

fn cmd_run(
    config_path: &Path,
    out: &Path,
    mode: Mode,
    force: bool,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let cfg = RunConfig::parse(&read(config_path)?)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let (dataset, input_paths) = cfg.load_dataset(base)?;
    let pipeline_cfg = cfg.pipeline_config(seed_override);
    prepare_out_dir(out, force)?;

    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        input_paths,
        output_dir: out.display().to_string(),
        seed: pipeline_cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write(
        &out.join("manifest.json"),
        &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest serializes")),
    )?;

    let mut rules_text = String::new();
    let mut nfis_outcome: Result<(), CliError> = Ok(());

    if mode != Mode::Rst {
        match run_close_open(&dataset, &pipeline_cfg) {
            Ok((best, agg)) => {
                write(&out.join("box.csv"), &agg.to_csv())?;
                write_selected_model(out, &best, &pipeline_cfg, &dataset)?;
                rules_text.push_str(&tsk_rules_text(&best.rulebase));
                if let Some(grid) = &cfg.grid {
                    let spec = grid.to_spec();
                    let cells = predict_grid(&best.rulebase, &spec).map_err(CliError::data)?;
                    write(&out.join("grid.csv"), &lugeon_core::pipeline::grid_to_csv(&spec, &cells))?;
                }
                println!(
                    "selected model: {} rules, error level {:.4}",
                    best.n_rules, best.error_level
                );
            }
            Err(Error::NoFeasibleCandidate(agg)) => {
                write(&out.join("box.csv"), &agg.to_csv())?;
                nfis_outcome = Err(CliError::NoFeasible(agg));
            }
            Err(e) => return Err(CliError::data(e)),
        }
    }

    if mode != Mode::Nfis {
        let branch = run_rst_branch(&dataset, cfg.rst.levels).map_err(CliError::data)?;
        write(&out.join("rst_table.csv"), &branch.table.to_csv())?;
        rules_text.push_str(&rst_rules_text(&branch));
    }

    write(&out.join("rules.txt"), &rules_text)?;
    nfis_outcome
}

fn write_selected_model(
    out: &Path,
    best: &CandidateModel,
    cfg: &lugeon_core::pipeline::PipelineConfig,
    dataset: &lugeon_core::data::Dataset,
) -> Result<(), CliError> {
    write(&out.join("selected_model.json"), &format!("{}\n", best.rulebase.to_json()))?;
    write(&out.join("som_codebook.csv"), &codebook_to_csv(&best.som))?;
    // granules as the SOM actually summarized them during the run
    let (train, _) =
        lugeon_core::data::split_train_test(dataset, &cfg.split).map_err(CliError::data)?;
    let train = if cfg.normalize_for_som {
        train.normalize().map_err(CliError::data)?
    } else {
        train
    };
    let mut granules =
        extract_crisp_granules(&best.som, &train.samples()).map_err(CliError::data)?;
    if let Some(norm) = &train.normalization {
        for row in &mut granules.x {
            *row = norm.invert(row);
        }
    }
    write(&out.join("granules.csv"), &granules_to_csv(&granules).map_err(CliError::data)?)?;
    Ok(())
}

fn tsk_rules_text(rb: &TskRuleBase) -> String {
    let mut out = format!("TSK rule base ({} inputs, {} rules)\n", rb.n_inputs(), rb.n_rules());
    for (k, rule) in rb.rules.iter().enumerate() {
        out.push_str(&format!("rule {}: if ", k + 1));
        for (j, (name, mf)) in rb.input_names.iter().zip(&rule.premises).enumerate() {
            if j > 0 {
                out.push_str(" and ");
            }
            out.push_str(&format!("{name} is {:?}(c={}, sigma={})", mf.kind, mf.c, mf.sigma));
        }
        out.push_str(&format!("\n        then y = {}", rule.consequent[0]));
        for (name, p) in rb.input_names.iter().zip(&rule.consequent[1..]) {
            out.push_str(&format!(" + {p}*{name}"));
        }
        out.push('\n');
    }
    out
}

fn rst_rules_text(branch: &lugeon_core::pipeline::RstBranch) -> String {
    let mut out = String::from("\nRST analysis\n");
    out.push_str("reducts:");
    for reduct in &branch.reducts {
        if reduct.is_empty() {
            out.push_str(" {}");
        } else {
            out.push_str(&format!(" {{{}}}", reduct.join(", ")));
        }
    }
    out.push('\n');
    out.push_str(&format!("decision rules over the first reduct ({} rules):\n", branch.rules.len()));
    out.push_str(&rules_to_text(&branch.rules));
    out
}

fn cmd_rules(model: &Path) -> Result<(), CliError> {
    let rb = TskRuleBase::from_json(&read(model)?)
        .map_err(|e| CliError::config(format!("{}: {e}", model.display())))?;
    print!("{}", tsk_rules_text(&rb));
    Ok(())
}

fn parse_axis(text: &str) -> Result<SweepAxis, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::config(format!(
            "axis `{text}` must be name:min:max:steps"
        )));
    }
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| CliError::config(format!("`{s}` in axis `{text}` is not a number")))
    };
    Ok(SweepAxis {
        feature: parts[0].to_string(),
        min: num(parts[1])?,
        max: num(parts[2])?,
        steps: num(parts[3])? as usize,
    })
}

fn cmd_predict(
    model: &Path,
    axis1: &str,
    axis2: &str,
    fixed: &[String],
    out: &Path,
    svg_path: Option<&Path>,
) -> Result<(), CliError> {
    let rb = TskRuleBase::from_json(&read(model)?)
        .map_err(|e| CliError::config(format!("{}: {e}", model.display())))?;
    let mut fixed_pairs = Vec::new();
    for item in fixed {
        let (name, value) = item.split_once('=').ok_or_else(|| {
            CliError::config(format!("fixed input `{item}` must be name=value"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::config(format!("`{value}` in `{item}` is not a number")))?;
        fixed_pairs.push((name.to_string(), value));
    }
    let spec = GridSpec {
        axis1: parse_axis(axis1)?,
        axis2: parse_axis(axis2)?,
        fixed: fixed_pairs,
    };
    let cells = predict_grid(&rb, &spec).map_err(CliError::data)?;
    write(out, &lugeon_core::pipeline::grid_to_csv(&spec, &cells))?;
    if let Some(path) = svg_path {
        write(path, &svg::render_heatmap(&spec, &cells))?;
    }
    let underflows = cells.iter().filter(|c| c.underflow).count();
    println!(
        "wrote {} cells to {} ({} underflow fallback{})",
        cells.len(),
        out.display(),
        underflows,
        if underflows == 1 { "" } else { "s" }
    );
    Ok(())
}
