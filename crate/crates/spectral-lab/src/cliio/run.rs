//! Subcommand dispatch for the `spectral-lab` binary.

use clap::{Parser, Subcommand};
use serde_json::json;
use std::ffi::OsString;
use std::path::PathBuf;

use crate::circuit::{build_circuit, init_params};
use crate::cliio::config::{
    entanglement_from_config, parse_config, ExperimentConfig, ExperimentKind, Profile, RunConfig,
};
use crate::cliio::output::RunWriter;
use crate::cliio::plot::plot_trace;
use crate::error::{Error, Result};
use crate::experiments::{
    default_deltas, entanglement_sweep, init_sweep, make_target, perturbation_report, train,
    SweepBase, TrainOptions,
};
use crate::simcore::Observable;
use crate::spectrum::redundancy_profile;
use crate::theory::{random_instance_bound_suite, BoundSuiteConfig, BoundSummary};
use crate::util::derived_seed;

/// Spectral analysis laboratory for reuploader-style parameterised quantum
/// circuits: redundancy profiles, spectral training dynamics, perturbation
/// robustness, and numeric verification of the gradient bounds.
#[derive(Debug, Parser)]
#[command(name = "spectral-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; omitted fields fall back to the profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (experiments) or output file (plot).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Built-in preset used when no --config is given.
    #[arg(long, global = true, value_enum, default_value = "desk")]
    profile: Profile,

    /// Replace init.seed with N and target.phase_seed with N+1.
    #[arg(long, global = true)]
    seed_override: Option<u64>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the redundancy profile of the configured encoding.
    Redundancy,
    /// Train one model and record the spectral dynamics trace.
    Train,
    /// Train, then measure coefficient robustness under isotropic
    /// parameter perturbations.
    Robustness,
    /// Compare epochs-to-convergence across entanglement layouts.
    EntangleSweep,
    /// Measure initial coefficient magnitudes across init scales.
    InitSweep,
    /// Run the randomized gradient-bound verification suite.
    VerifyBounds,
    /// Render a trace CSV as an SVG heatmap (epoch × frequency).
    Plot {
        /// Long-format trace CSV (epoch,omega,value).
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("SPECTRAL_LAB_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            Error::Config(format!(
                "SPECTRAL_LAB_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
        if threads == 0 {
            return Err(Error::Config(
                "SPECTRAL_LAB_THREADS must be a positive integer".into(),
            ));
        }
        // ignore the error if a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

fn resolve_config(cli: &Cli, kind: ExperimentKind) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => cli.profile.config(),
    };
    if let Some(seed) = cli.seed_override {
        config.init.seed = seed;
        config.target.phase_seed = seed.wrapping_add(1);
    }
    if let Some(out) = &cli.out {
        config.output.directory = out.to_string_lossy().into_owned();
    }
    match &config.experiment {
        Some(experiment) if experiment.kind != kind => {
            return Err(Error::Config(format!(
                "config selects experiment '{}' but the subcommand is '{}'",
                experiment.kind.name(),
                kind.name()
            )));
        }
        Some(_) => {}
        None => config.experiment = Some(ExperimentConfig::bare(kind)),
    }
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::ConfigViolations(violations));
    }
    Ok(config)
}

fn train_options(config: &RunConfig) -> TrainOptions {
    TrainOptions {
        learning_rate: config.training.learning_rate,
        epochs: config.training.epochs,
        eval_every: config.training.eval_every,
        grid_size: config.training.grid_size,
        omega_max_track: config.training.omega_max_track,
        early_stop_loss: config.training.early_stop_loss,
    }
}

fn sweep_base(config: &RunConfig) -> Result<SweepBase> {
    let experiment = config.experiment.as_ref();
    Ok(SweepBase {
        qubits: config.circuit.n,
        layers: config.circuit.layers,
        encoding: config.encoding_scheme()?,
        observable: Observable {
            qubit: config.circuit.observable_qubit,
        },
        init_sigma: config.init.sigma,
        target_frequencies: config.target.frequencies.clone(),
        target_amplitudes: config.target.amplitudes.clone(),
        options: train_options(config),
        threshold: experiment.and_then(|e| e.threshold).unwrap_or(0.9),
        hold: experiment.and_then(|e| e.hold).unwrap_or(2),
    })
}

fn writer_for(config: &RunConfig) -> Result<RunWriter> {
    let config_json = serde_json::to_string_pretty(config)? + "\n";
    RunWriter::new(PathBuf::from(&config.output.directory).as_path(), &config_json)
}

fn run_redundancy(config: &RunConfig, quiet: bool) -> Result<()> {
    let encoding = config.encoding_scheme()?;
    let spectrum = redundancy_profile(&encoding, config.circuit.n, config.circuit.layers)?;
    let mut writer = writer_for(config)?;
    writer.write_file("spectrum.csv", spectrum.to_csv().as_bytes())?;
    writer.write_json("spectrum.json", &spectrum.to_json())?;
    writer.write_json(
        "summary.json",
        &json!({
            "experiment": "redundancy",
            "max_frequency": spectrum.max_frequency(),
            "accessible_frequencies": spectrum.len(),
            "pair_total": spectrum.total().to_string(),
        }),
    )?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "redundancy: {} accessible frequencies, max {}",
            spectrum.len(),
            spectrum.max_frequency()
        );
    }
    Ok(())
}

struct TrainedRun {
    circuit: crate::circuit::ReuploaderCircuit,
    trace: crate::experiments::TrainingTrace,
}

fn run_training(config: &RunConfig) -> Result<TrainedRun> {
    let circuit = build_circuit(
        config.circuit.n,
        config.circuit.layers,
        config.encoding_scheme()?,
        config.entanglement_generator()?,
        Observable {
            qubit: config.circuit.observable_qubit,
        },
    )?;
    let params = init_params(&circuit, config.init.sigma, config.init.seed)?;
    let target = make_target(
        &config.target.frequencies,
        &config.target.amplitudes,
        config.target.phase_seed,
    )?;
    let trace = train(&circuit, &params, &target, &train_options(config))?;
    Ok(TrainedRun { circuit, trace })
}

fn write_training_artifacts(writer: &mut RunWriter, run: &TrainedRun) -> Result<()> {
    writer.write_file("trace.csv", run.trace.to_csv().as_bytes())?;
    writer.write_file("loss.csv", run.trace.loss_csv().as_bytes())?;
    let final_snapshot = run.trace.snapshots.last();
    if let Some(snapshot) = final_snapshot {
        writer.write_file("snapshot_final.csv", snapshot.to_csv().as_bytes())?;
        writer.write_json("snapshot_final.json", &snapshot.to_json())?;
    }
    writer.write_params("params_final.bin", run.trace.final_params.values())?;
    Ok(())
}

fn train_summary(config: &RunConfig, run: &TrainedRun) -> serde_json::Value {
    json!({
        "experiment": "train",
        "final_loss": run.trace.final_loss(),
        "evaluations": run.trace.eval_epochs.len(),
        "last_epoch": run.trace.eval_epochs.last().copied().unwrap_or(0),
        "diverged": run.trace.diverged,
        "parameter_count": run.circuit.parameter_count(),
        "init_sigma": config.init.sigma,
        "init_variance": config.init.sigma * config.init.sigma,
    })
}

fn run_train(config: &RunConfig, quiet: bool) -> Result<()> {
    let run = run_training(config)?;
    let mut writer = writer_for(config)?;
    write_training_artifacts(&mut writer, &run)?;
    writer.write_json("summary.json", &train_summary(config, &run))?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "train: final loss {:.3e} after {} epochs{}",
            run.trace.final_loss(),
            run.trace.eval_epochs.last().copied().unwrap_or(0),
            if run.trace.diverged { " (diverged)" } else { "" }
        );
    }
    Ok(())
}

fn run_robustness(config: &RunConfig, quiet: bool) -> Result<()> {
    let experiment = config.experiment.as_ref().expect("validated");
    let run = run_training(config)?;
    let deltas = experiment.deltas.clone().unwrap_or_else(default_deltas);
    let n_directions = experiment.n_directions.unwrap_or(100);
    let direction_seed = experiment
        .direction_seed
        .unwrap_or_else(|| derived_seed(config.init.seed, 3));
    let report = perturbation_report(
        &run.circuit,
        &run.trace.final_params,
        &deltas,
        n_directions,
        &config.target.frequencies,
        config.training.grid_size,
        direction_seed,
    )?;
    let mut writer = writer_for(config)?;
    write_training_artifacts(&mut writer, &run)?;
    writer.write_file("robustness.csv", report.to_csv().as_bytes())?;
    writer.write_json(
        "summary.json",
        &json!({
            "experiment": "robustness",
            "final_loss": run.trace.final_loss(),
            "deltas": report.deltas,
            "n_directions": report.samples_per_delta,
            "direction_seed": direction_seed,
            "init_sigma": config.init.sigma,
            "init_variance": config.init.sigma * config.init.sigma,
        }),
    )?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "robustness: {} deltas × {} directions over {} frequencies",
            report.deltas.len(),
            report.samples_per_delta,
            report.omegas.len()
        );
    }
    Ok(())
}

fn run_entangle_sweep(config: &RunConfig, quiet: bool) -> Result<()> {
    let experiment = config.experiment.as_ref().expect("validated");
    let layouts = experiment
        .layouts
        .as_ref()
        .ok_or_else(|| Error::Config("entangle-sweep requires experiment.layouts".into()))?
        .iter()
        .map(entanglement_from_config)
        .collect::<Result<Vec<_>>>()?;
    let seeds = experiment
        .seeds
        .clone()
        .ok_or_else(|| Error::Config("entangle-sweep requires experiment.seeds".into()))?;
    let base = sweep_base(config)?;
    let table = entanglement_sweep(&base, &layouts, &seeds)?;

    let mut means = Vec::new();
    for layout in &layouts {
        for &omega in &config.target.frequencies {
            means.push(json!({
                "layout": layout.label(),
                "omega": omega,
                "mean_epochs": table.mean_epochs(&layout.label(), omega),
            }));
        }
    }
    let mut writer = writer_for(config)?;
    writer.write_file("convergence.csv", table.to_csv().as_bytes())?;
    writer.write_json(
        "summary.json",
        &json!({
            "experiment": "entangle-sweep",
            "threshold": base.threshold,
            "hold": base.hold,
            "epochs_budget": table.epochs_budget,
            "means": means,
        }),
    )?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "entangle-sweep: {} layouts × {} seeds, {} rows",
            layouts.len(),
            seeds.len(),
            table.rows.len()
        );
    }
    Ok(())
}

fn run_init_sweep(config: &RunConfig, quiet: bool) -> Result<()> {
    let experiment = config.experiment.as_ref().expect("validated");
    let sigmas = experiment
        .sigmas
        .clone()
        .ok_or_else(|| Error::Config("init-sweep requires experiment.sigmas".into()))?;
    let seeds = experiment
        .seeds
        .clone()
        .ok_or_else(|| Error::Config("init-sweep requires experiment.seeds".into()))?;
    let with_training = experiment.train.unwrap_or(false);
    let base = sweep_base(config)?;
    let sweep = init_sweep(
        &base,
        config.entanglement_generator()?,
        &sigmas,
        &seeds,
        with_training,
    )?;
    let mut writer = writer_for(config)?;
    writer.write_file("init_coefficients.csv", sweep.to_csv().as_bytes())?;
    for (sigma, seed, trace) in &sweep.traces {
        let name = format!("trace_sigma{sigma}_seed{seed}.csv");
        writer.write_file(&name, trace.to_csv().as_bytes())?;
    }
    writer.write_json(
        "summary.json",
        &json!({
            "experiment": "init-sweep",
            "sigmas": sigmas,
            "variances": sigmas.iter().map(|s| s * s).collect::<Vec<_>>(),
            "seeds": seeds,
            "trained": with_training,
        }),
    )?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "init-sweep: {} sigmas × {} seeds{}",
            sigmas.len(),
            seeds.len(),
            if with_training { " (with training)" } else { "" }
        );
    }
    Ok(())
}

fn run_verify_bounds(config: &RunConfig, quiet: bool) -> Result<()> {
    let experiment = config.experiment.as_ref().expect("validated");
    let suite = BoundSuiteConfig {
        instances: experiment.instances.unwrap_or(100),
        seed: experiment.suite_seed.unwrap_or(BoundSuiteConfig::default().seed),
        ..BoundSuiteConfig::default()
    };
    let (reports, summary) = random_instance_bound_suite(&suite)?;
    let mut csv = String::from("instance,k,omega,lhs,rhs,slack\n");
    for (instance, report) in reports.iter().enumerate() {
        for row in &report.rows {
            csv.push_str(&format!(
                "{instance},{},{},{},{},{}\n",
                row.parameter,
                crate::util::fmt_omega(row.omega),
                crate::util::fmt_f64(row.lhs),
                crate::util::fmt_f64(row.rhs),
                crate::util::fmt_f64(row.slack)
            ));
        }
    }
    let mut writer = writer_for(config)?;
    writer.write_file("bounds.csv", csv.as_bytes())?;
    writer.write_json("summary.json", &BoundSummaryJson::from(&summary))?;
    writer.finish()?;
    if !quiet {
        eprintln!(
            "verify-bounds: {} instances, {} rows, {} violations, min slack {:.3e}",
            summary.instances, summary.rows, summary.violations, summary.min_slack
        );
    }
    if summary.violations > 0 {
        return Err(Error::Numeric(format!(
            "{} bound violations detected",
            summary.violations
        )));
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct BoundSummaryJson {
    instances: usize,
    rows: usize,
    violations: usize,
    min_slack: f64,
}

impl From<&BoundSummary> for BoundSummaryJson {
    fn from(s: &BoundSummary) -> Self {
        BoundSummaryJson {
            instances: s.instances,
            rows: s.rows,
            violations: s.violations,
            min_slack: s.min_slack,
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Redundancy => run_redundancy(&resolve_config(cli, ExperimentKind::Redundancy)?, cli.quiet),
        Command::Train => run_train(&resolve_config(cli, ExperimentKind::Train)?, cli.quiet),
        Command::Robustness => {
            run_robustness(&resolve_config(cli, ExperimentKind::Robustness)?, cli.quiet)
        }
        Command::EntangleSweep => {
            run_entangle_sweep(&resolve_config(cli, ExperimentKind::EntangleSweep)?, cli.quiet)
        }
        Command::InitSweep => {
            run_init_sweep(&resolve_config(cli, ExperimentKind::InitSweep)?, cli.quiet)
        }
        Command::VerifyBounds => {
            run_verify_bounds(&resolve_config(cli, ExperimentKind::VerifyBounds)?, cli.quiet)
        }
        Command::Plot { input } => {
            let out = cli
                .out
                .clone()
                .ok_or_else(|| Error::Config("plot requires --out FILE".into()))?;
            plot_trace(input, &out)
        }
    }
}

/// Parse argv and run; returns the process exit code
/// (0 ok, 2 config, 3 numeric, 4 size, 5 io).
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // help/version exit cleanly; usage errors map to the config category
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
