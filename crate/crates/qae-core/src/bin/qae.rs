use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qae_core::es::EsConfig;
use qae_core::experiment::{
    artifact_paths, chart::chart_from_sweep_csv, compare_strategies, derive_seed, read_manifest,
    replay_manifest, run_single, run_sweep, write_manifest, write_strategy_csv, write_sweep_csv,
    write_trace, ExperimentConfig, ScheduleShape,
};
use qae_core::qae::{qae_pure_bound, PrSource, ReferenceStrategy};
use qae_core::qinfo::FidelityConvention;
use qae_core::states::StateFamilySpec;

#[derive(Parser)]
#[command(name = "qae", version, about = "Quantum-autoencoder laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a state family member as JSON.
    State(StateArgs),
    /// Print the pure-reference compression bound for a state.
    Bound(StateArgs),
    /// Train one autoencoder and write manifest, trace, and result CSV.
    Train(TrainArgs),
    /// Train across a parameter grid and write the sweep CSV.
    Sweep(SweepArgs),
    /// Compare grid / bound / guess blend-ratio strategies on shared encoders.
    ComparePr(SweepArgs),
    /// Render a sweep CSV as an SVG line chart.
    Chart(ChartArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Thermal,
    Werner,
    Blended,
    Haar,
    Mixed,
    BasisZero,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefKind {
    Trash,
    Pure,
    Mix,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityKind {
    Squared,
    Root,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// State family.
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Inverse temperature (thermal); scalar or start:stop:step.
    #[arg(long)]
    beta: Option<String>,
    /// Werner parameter; scalar or start:stop:step.
    #[arg(long)]
    alpha: Option<String>,
    /// Pure-state weight (blended); scalar or start:stop:step.
    #[arg(long)]
    p0: Option<String>,
    /// Trash qubits.
    #[arg(long, default_value_t = 1)]
    na: usize,
    /// Latent qubits.
    #[arg(long, default_value_t = 1)]
    nb: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Hybrid cost weight w in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    w: f64,
    /// Reference strategy.
    #[arg(long = "ref", value_enum, default_value = "trash")]
    reference: RefKind,
    /// Blend-ratio source for --ref mix: grid, bound, guess, or a float.
    #[arg(long)]
    pr: Option<String>,
    /// Fidelity convention.
    #[arg(long, value_enum, default_value = "squared")]
    fidelity: FidelityKind,
    /// Replicates per grid point.
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker thread count (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the optimizer iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args)]
struct StateArgs {
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Replay a previously written manifest instead of training.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ChartArgs {
    /// Sweep CSV produced by the sweep subcommand.
    #[arg(long)]
    csv: PathBuf,
    /// Output SVG path.
    #[arg(long, default_value = "out/chart.svg")]
    out: PathBuf,
}

fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    if let Ok(v) = text.parse::<f64>() {
        return Ok(vec![v]);
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("'{text}' is neither a float nor start:stop:step"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(format!("invalid range '{text}': need stop >= start, step > 0"));
    }
    let mut values = Vec::new();
    let mut k = 0usize;
    loop {
        let v = start + k as f64 * step;
        if v > stop + 1e-9 {
            break;
        }
        // Snap accumulated floating-point error so grid labels stay clean.
        values.push((v * 1e12).round() / 1e12);
        k += 1;
    }
    Ok(values)
}

struct FamilyGrid {
    spec: StateFamilySpec,
    grid: Vec<f64>,
}

fn build_family(args: &FamilyArgs) -> Result<FamilyGrid, String> {
    let n = args.na + args.nb;
    let dim = 1usize << n;
    let take = |opt: &Option<String>, name: &str| -> Result<Vec<f64>, String> {
        opt.as_deref()
            .map(parse_values)
            .transpose()?
            .ok_or_else(|| format!("--{name} is required for this family"))
    };
    let (spec, grid) = match args.family {
        FamilyKind::Thermal => {
            let values = take(&args.beta, "beta")?;
            (
                StateFamilySpec::Thermal {
                    n_qubits: n,
                    beta: values[0],
                },
                values,
            )
        }
        FamilyKind::Werner => {
            if args.na != args.nb {
                return Err("werner states need na == nb".into());
            }
            let values = take(&args.alpha, "alpha")?;
            (
                StateFamilySpec::Werner {
                    subsystem_dim: 1 << args.na,
                    alpha: values[0],
                },
                values,
            )
        }
        FamilyKind::Blended => {
            let values = take(&args.p0, "p0")?;
            (
                StateFamilySpec::Blended {
                    dim,
                    p0: values[0],
                    psi_seed: args.seed,
                },
                values,
            )
        }
        FamilyKind::Haar => (
            StateFamilySpec::HaarPure {
                dim,
                seed: args.seed,
            },
            vec![],
        ),
        FamilyKind::Mixed => (StateFamilySpec::MaximallyMixed { dim }, vec![]),
        FamilyKind::BasisZero => (StateFamilySpec::BasisZero { dim }, vec![]),
    };
    Ok(FamilyGrid { spec, grid })
}

fn build_strategy(kind: RefKind, pr: &Option<String>) -> Result<ReferenceStrategy, String> {
    match kind {
        RefKind::Trash => Ok(ReferenceStrategy::TrashClone),
        RefKind::Pure => Ok(ReferenceStrategy::PureZero),
        RefKind::Mix => {
            let source = match pr.as_deref() {
                None | Some("grid") => PrSource::Grid {
                    candidates: PrSource::default_grid(),
                },
                Some("bound") => PrSource::Bound,
                Some("guess") => PrSource::Guess,
                Some(text) => {
                    let p_r = text
                        .parse::<f64>()
                        .map_err(|_| format!("--pr must be grid, bound, guess, or a float; got '{text}'"))?;
                    PrSource::Fixed { p_r }
                }
            };
            Ok(ReferenceStrategy::MixBlend { p_source: source })
        }
    }
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let family = build_family(&args.family)?;
    let strategy = build_strategy(args.reference, &args.pr)?;
    let mut es = EsConfig::default_for_qubits(args.family.na + args.family.nb);
    if let Some(cap) = args.max_iters {
        es.max_iterations = cap;
    }
    let config = ExperimentConfig {
        family: family.spec,
        grid: family.grid,
        n_a: args.family.na,
        n_b: args.family.nb,
        w: args.w,
        strategy,
        es,
        schedule: ScheduleShape::default(),
        fidelity: match args.fidelity {
            FidelityKind::Squared => FidelityConvention::Squared,
            FidelityKind::Root => FidelityConvention::Root,
        },
        replicates: args.replicates,
        master_seed: args.family.seed,
        workers: args.workers,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn matrix_json(family: &StateFamilySpec) -> Result<serde_json::Value, String> {
    let rho = family.build().map_err(|e| e.to_string())?;
    let m = rho.matrix();
    let dim = m.rows();
    let rows: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|i| (0..dim).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    Ok(serde_json::json!({
        "family": family.label(),
        "parameter": family.parameter(),
        "dim": dim,
        "matrix": rows,
    }))
}

fn cmd_state(args: &StateArgs) -> Result<(), String> {
    let family = build_family(&args.family)?;
    let mut spec = family.spec;
    if let Some(&first) = family.grid.first() {
        spec = spec.with_parameter(first);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&matrix_json(&spec)?).map_err(|e| e.to_string())?
    );
    Ok(())
}

fn cmd_bound(args: &StateArgs) -> Result<(), String> {
    let family = build_family(&args.family)?;
    let values: Vec<Option<f64>> = if family.grid.is_empty() {
        vec![None]
    } else {
        family.grid.iter().map(|&v| Some(v)).collect()
    };
    for value in values {
        let spec = match value {
            Some(v) => family.spec.with_parameter(v),
            None => family.spec.clone(),
        };
        let rho = spec.build().map_err(|e| e.to_string())?;
        let bound = qae_pure_bound(&rho, args.family.nb).map_err(|e| e.to_string())?;
        match value {
            Some(v) => println!("{} {v} {bound}", spec.label()),
            None => println!("{} {bound}", spec.label()),
        }
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<(), String> {
    if let Some(path) = &args.replay {
        let manifest = read_manifest(path).map_err(|e| e.to_string())?;
        let j_d = replay_manifest(&manifest).map_err(|e| e.to_string())?;
        let drift = (j_d - manifest.record.j_d).abs();
        println!("replayed j_d={j_d:.12} recorded j_d={:.12} drift={drift:.3e}", manifest.record.j_d);
        return if drift <= 1e-9 {
            Ok(())
        } else {
            Err(format!("replay drift {drift:.3e} exceeds 1e-9"))
        };
    }
    let mut config = build_config(&args.run)?;
    let value = config.grid.first().copied();
    if let Some(v) = value {
        config.family = config.family.with_parameter(v);
    }
    config.grid.clear();
    let seed = derive_seed(
        config.master_seed,
        config.family.label(),
        value.unwrap_or(0.0),
        0,
    );
    let outcome = run_single(&config, seed).map_err(|e| e.to_string())?;
    let (csv, manifest, trace) = artifact_paths(&args.run.out, "train");
    write_sweep_csv(&csv, std::slice::from_ref(&outcome.record)).map_err(|e| e.to_string())?;
    write_manifest(&manifest, &outcome.manifest).map_err(|e| e.to_string())?;
    write_trace(&trace, &outcome.trace).map_err(|e| e.to_string())?;
    let r = &outcome.record;
    println!(
        "{} parameter={:?} j_pure={:.6} j_qmi={:.6} j_e={:.6} j_d={:.6} bound={:.6} iterations={}",
        r.family, r.parameter, r.j_pure, r.j_qmi, r.j_e, r.j_d, r.bound, r.iterations
    );
    println!("wrote {} {} {}", csv.display(), manifest.display(), trace.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), String> {
    let config = build_config(&args.run)?;
    let sweep = run_sweep(&config).map_err(|e| e.to_string())?;
    let csv = args.run.out.join("sweep.csv");
    write_sweep_csv(&csv, &sweep.records).map_err(|e| e.to_string())?;
    for outcome in &sweep.outcomes {
        let stem = format!(
            "point_{}_{}",
            outcome
                .record
                .parameter
                .map(|p| format!("{p:.4}"))
                .unwrap_or_else(|| "none".into()),
            outcome.record.replicate
        );
        let (_, manifest, trace) = artifact_paths(&args.run.out, &stem);
        write_manifest(&manifest, &outcome.manifest).map_err(|e| e.to_string())?;
        write_trace(&trace, &outcome.trace).map_err(|e| e.to_string())?;
    }
    let failed = sweep.records.iter().filter(|r| r.status != "ok").count();
    println!(
        "wrote {} ({} rows, {} failed)",
        csv.display(),
        sweep.records.len(),
        failed
    );
    Ok(())
}

fn cmd_compare(args: &SweepArgs) -> Result<(), String> {
    let config = build_config(&args.run)?;
    let rows = compare_strategies(&config).map_err(|e| e.to_string())?;
    let csv = args.run.out.join("compare_pr.csv");
    write_strategy_csv(&csv, &rows).map_err(|e| e.to_string())?;
    for row in &rows {
        println!(
            "{} parameter={:?} strategy={} p_r={:.4} j_d={:.6} bound={:.6}",
            row.family, row.parameter, row.strategy, row.p_r, row.j_d, row.bound
        );
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_chart(args: &ChartArgs) -> Result<(), String> {
    let chart = chart_from_sweep_csv(&args.csv).map_err(|e| e.to_string())?;
    chart.write_svg(&args.out).map_err(|e| e.to_string())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::State(args) => cmd_state(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ComparePr(args) => cmd_compare(args),
        Command::Chart(args) => cmd_chart(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
