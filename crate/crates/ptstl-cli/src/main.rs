//! `ptstl` — simulate labeled plants, mine controllable-cause formulas,
//! run cause-avoiding controllers, and drive the full iterative synthesis
//! pipeline, all from reproducible seeded configs.

use std::fmt;
use std::io::{stdin, stdout, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ptstl::control::{check_guarantee, run_closed_loop, synthesize_iterative, SynthesisRun};
use ptstl::io::{
    read_dataset, visit_ratios, write_dataset, write_heatmap_csv, write_heatmap_svg,
    write_mine_report, write_synthesis_report, ClauseScore, DatasetMeta, PlantKind, RunConfig,
};
use ptstl::logic::parse_formula;
use ptstl::mining::{
    confusion_counts, formula_search, score_cause, CauseClause, CombinedCause, Dataset,
    ParameterDomain,
};
use ptstl::plants::external::serve_plant;
use ptstl::plants::simulate_random;
use ptstl::seed::derive_seed;

/// Errors that should print usage guidance and exit 1.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "ptstl",
    version,
    about = "Mine controllable causes of unwanted events from labeled traces and \
             synthesize feedback controllers that avoid them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigOpts {
    /// Run config file (.cfg, TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in plant to use when no config is given: `grid` or `traffic`.
    #[arg(long)]
    plant: Option<String>,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of traces override.
    #[arg(long)]
    traces: Option<usize>,
    /// Trace length override.
    #[arg(long)]
    length: Option<usize>,
    /// Min operator count of mined general parts.
    #[arg(long)]
    oc_min: Option<u32>,
    /// Max operator count of mined general parts.
    #[arg(long)]
    oc_max: Option<u32>,
    /// Clause budget per formula search.
    #[arg(long)]
    max_causes: Option<usize>,
    /// Minimum F_beta gain per accepted clause.
    #[arg(long)]
    min_gain: Option<f64>,
    /// F_beta weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Stop bound on the closed-loop violation rate.
    #[arg(long)]
    bound: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ConfigOpts {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.plant) {
            (Some(path), _) => RunConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            (None, Some(kind)) => match kind.as_str() {
                "grid" => RunConfig::default_for(PlantKind::Grid),
                "traffic" => RunConfig::default_for(PlantKind::Traffic),
                other => {
                    return Err(usage(format!(
                        "unknown built-in plant `{other}` (expected `grid` or `traffic`)"
                    )))
                }
            },
            (None, None) => {
                return Err(usage("either --config or --plant is required"));
            }
        };
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        if let Some(traces) = self.traces {
            cfg.run.traces = traces;
        }
        if let Some(length) = self.length {
            cfg.run.length = length;
        }
        if let Some(oc_min) = self.oc_min {
            cfg.search.oc_min = oc_min;
        }
        if let Some(oc_max) = self.oc_max {
            cfg.search.oc_max = oc_max;
        }
        if let Some(max_causes) = self.max_causes {
            cfg.search.max_clauses = max_causes;
        }
        if let Some(min_gain) = self.min_gain {
            cfg.search.min_gain = min_gain;
        }
        if let Some(beta) = self.beta {
            cfg.search.beta = beta;
        }
        if let Some(bound) = self.bound {
            cfg.run.bound = bound;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant under random controls into a labeled dataset.
    Simulate(ConfigOpts),
    /// Mine a combined cause formula from a dataset file.
    Mine {
        /// Dataset file (.jsonl).
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Simulate the plant in closed loop with a cause-avoiding controller.
    Control {
        /// Cause formula file (.ptstl).
        #[arg(long)]
        formula: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Run the full iterative mine-control-simulate refinement loop.
    Synthesize(ConfigOpts),
    /// Score a formula as a classifier against a dataset.
    Eval {
        /// Formula file (.ptstl).
        #[arg(long)]
        formula: PathBuf,
        /// Dataset file (.jsonl).
        #[arg(long)]
        data: PathBuf,
        /// F_beta weight.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Emit per-cell visit ratios of a grid dataset as SVG + CSV.
    Heatmap {
        /// Dataset file (.jsonl).
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Serve the configured plant over the external-plant line protocol on
    /// stdin/stdout.
    Serve(ConfigOpts),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.is::<UsageError>() => {
            eprintln!("usage error: {err}");
            eprintln!("run `ptstl --help` for usage");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(opts) => simulate(&opts),
        Command::Mine { data, opts } => mine(&data, &opts),
        Command::Control { formula, opts } => control(&formula, &opts),
        Command::Synthesize(opts) => synthesize(&opts),
        Command::Eval {
            formula,
            data,
            beta,
        } => eval(&formula, &data, beta),
        Command::Heatmap { data, opts } => heatmap(&data, &opts),
        Command::Serve(opts) => serve(&opts),
    }
}

fn simulate(opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let mut resolved = cfg.build_plant()?;
    let data = simulate_random(
        resolved.plant.as_mut(),
        resolved.labeler.as_ref(),
        cfg.run.traces,
        cfg.run.length,
        cfg.run.seed,
    )?;
    let meta = DatasetMeta {
        plant: resolved.name.clone(),
        seed: cfg.run.seed,
        generator: "simulate random-control".into(),
    };
    let dataset_path = opts.out.join("dataset.jsonl");
    write_dataset(&dataset_path, &data, &meta)?;
    cfg.emit_resolved(&opts.out.join("config.resolved.cfg"))?;
    println!(
        "wrote {} ({} traces, {} violations of {} points, rate {:.4})",
        dataset_path.display(),
        data.len(),
        data.violations(),
        data.total_points(),
        data.violation_rate(),
    );
    Ok(())
}

fn load_formula_file(path: &Path, n: usize, m: usize) -> Result<CombinedCause> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading formula file {}", path.display()))?;
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "false" {
        return Ok(CombinedCause::empty());
    }
    let phi = parse_formula(trimmed, n, m)?;
    clauses_of(&phi)
        .ok_or_else(|| anyhow::anyhow!("formula is not a disjunction of cause clauses: {phi}"))
        .map(CombinedCause::from_clauses)
}

/// Recognizes the mined shape `(G-[1,b] u_j = c & F-[1,1] phi) | ...` so a
/// formula file round-trips into controller clauses.
fn clauses_of(phi: &ptstl::logic::Formula) -> Option<Vec<CauseClause>> {
    use ptstl::logic::Formula::{And, Control, Historically, Once, Or};
    match phi {
        Or(l, r) => {
            let mut left = clauses_of(l)?;
            left.extend(clauses_of(r)?);
            Some(left)
        }
        And(l, r) => {
            let (
                Historically { child, window },
                Once {
                    child: general,
                    window: general_window,
                },
            ) = (l.as_ref(), r.as_ref())
            else {
                return None;
            };
            let Control { var, value } = child.as_ref() else {
                return None;
            };
            if window.lo() != 1 || general_window.lo() != 1 || general_window.hi() != 1 {
                return None;
            }
            CauseClause::new(*var, *value, window.hi(), general.as_ref().clone())
                .ok()
                .map(|c| vec![c])
        }
        _ => None,
    }
}

fn write_formula_file(path: &Path, cause: &CombinedCause) -> Result<()> {
    let mut text = cause.to_string();
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn mine(data_path: &Path, opts: &ConfigOpts) -> Result<()> {
    // Mining needs no plant; a bare `--plant grid` default or any config
    // supplies the search and domain sections.
    let cfg = match (&opts.config, &opts.plant) {
        (None, None) => {
            let mut tweaked = opts.clone();
            tweaked.plant = Some("grid".into());
            tweaked.resolve()?
        }
        _ => opts.resolve()?,
    };
    let (data, _meta) = read_dataset(data_path)?;
    let params = cfg.search_params()?;
    let domain = match cfg.domain.state_grids.clone() {
        Some(grids) => ParameterDomain::new(
            grids,
            data.control_space().sets().to_vec(),
            cfg.domain.clause_bounds.clone(),
            cfg.domain.inner_bounds.clone(),
        )?,
        None => ParameterDomain::from_dataset(&data, cfg.domain.state_step)?
            .with_clause_bounds(cfg.domain.clause_bounds.clone())?
            .with_inner_bounds(cfg.domain.inner_bounds.clone())?,
    };
    let psi = formula_search(&params, &data, &domain)?;
    let formula_path = opts.out.join("cause.ptstl");
    write_formula_file(&formula_path, &psi)?;
    write_mine_report(
        &opts.out.join("mine_report.csv"),
        &clause_scores(&psi, &data, params.beta)?,
    )?;
    let (counts, score) = score_cause(&psi, &data, params.beta)?;
    println!("mined: {psi}");
    println!(
        "tp={} fp={} tn={} fn={} F_{}={:.6}",
        counts.true_positives,
        counts.false_positives,
        counts.true_negatives,
        counts.false_negatives,
        params.beta,
        score
    );
    println!("wrote {}", formula_path.display());
    Ok(())
}

fn clause_scores(psi: &CombinedCause, data: &Dataset, beta: f64) -> Result<Vec<ClauseScore>> {
    let mut rows = Vec::new();
    for end in 1..=psi.len() {
        let clause = &psi.clauses()[end - 1];
        let own = confusion_counts(&clause.formula(), data)?;
        let prefix = CombinedCause::from_clauses(psi.clauses()[..end].to_vec());
        let (_, cumulative) = score_cause(&prefix, data, beta)?;
        rows.push(ClauseScore {
            clause: clause.to_string(),
            tp: own.true_positives,
            fp: own.false_positives,
            tn: own.true_negatives,
            fn_: own.false_negatives,
            f_beta: own.f_beta(beta),
            cumulative_f_beta: cumulative,
        });
    }
    Ok(rows)
}

fn control(formula_path: &Path, opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let mut resolved = cfg.build_plant()?;
    let cause = load_formula_file(
        formula_path,
        resolved.plant.state_dim(),
        resolved.plant.control_dim(),
    )?;
    let guarantee = check_guarantee(&cause, &resolved.plant.control_space());
    let data = run_closed_loop(
        resolved.plant.as_mut(),
        resolved.labeler.as_ref(),
        &cause,
        cfg.run.traces,
        cfg.run.length,
        cfg.run.seed,
        cfg.fallback_mode()?,
    )?;
    let meta = DatasetMeta {
        plant: resolved.name.clone(),
        seed: cfg.run.seed,
        generator: format!("control with {cause}"),
    };
    let dataset_path = opts.out.join("dataset.jsonl");
    write_dataset(&dataset_path, &data, &meta)?;
    cfg.emit_resolved(&opts.out.join("config.resolved.cfg"))?;
    println!(
        "closed loop: {} violations of {} points (rate {:.4}), avoidance guarantee: {}",
        data.violations(),
        data.total_points(),
        data.violation_rate(),
        guarantee,
    );
    println!("wrote {}", dataset_path.display());
    Ok(())
}

fn synthesize(opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let mut resolved = cfg.build_plant()?;
    let synth_cfg = cfg.synthesis_config()?;
    let (psi, run) = synthesize_iterative(
        resolved.plant.as_mut(),
        resolved.labeler.as_ref(),
        &synth_cfg,
    )?;
    let guarantee = check_guarantee(&psi, &resolved.plant.control_space());

    write_formula_file(&opts.out.join("cause.ptstl"), &psi)?;
    write_synthesis_report(&opts.out.join("report.csv"), &run)?;
    cfg.emit_resolved(&opts.out.join("config.resolved.cfg"))?;
    replay_iteration_datasets(&cfg, resolved.name.clone(), &run, &opts.out)?;

    for record in &run.iterations {
        match &record.mined {
            Some(mined) => println!(
                "iter {:>2}: V={} of {}  mined {}  (tp={} fp={})",
                record.index,
                record.violations,
                record.points,
                mined.cause,
                mined.true_positives,
                mined.false_positives
            ),
            None => println!(
                "iter {:>2}: V={} of {}",
                record.index, record.violations, record.points
            ),
        }
    }
    println!(
        "outcome: {:?}, final rate {:.4}",
        run.outcome, run.final_rate
    );
    println!("combined cause: {psi}");
    println!("avoidance guarantee: {guarantee}");
    Ok(())
}

/// Re-simulates each iteration's dataset from its recorded formula prefix
/// and the derived per-iteration seed, and writes it alongside the report.
fn replay_iteration_datasets(
    cfg: &RunConfig,
    plant_name: String,
    run: &SynthesisRun,
    out: &Path,
) -> Result<()> {
    let mut resolved = cfg.build_plant()?;
    let mut psi = CombinedCause::empty();
    for record in &run.iterations {
        let seed = derive_seed(cfg.run.seed, "iteration", (record.index - 1) as u64);
        let data = if record.index == 1 {
            simulate_random(
                resolved.plant.as_mut(),
                resolved.labeler.as_ref(),
                cfg.run.traces,
                cfg.run.length,
                seed,
            )?
        } else {
            run_closed_loop(
                resolved.plant.as_mut(),
                resolved.labeler.as_ref(),
                &psi,
                cfg.run.traces,
                cfg.run.length,
                seed,
                cfg.fallback_mode()?,
            )?
        };
        debug_assert_eq!(data.violations(), record.violations);
        let meta = DatasetMeta {
            plant: plant_name.clone(),
            seed,
            generator: format!("synthesize iteration {}", record.index),
        };
        write_dataset(
            &out.join(format!("iter_{:03}.jsonl", record.index)),
            &data,
            &meta,
        )?;
        if let Some(mined) = &record.mined {
            psi.extend_dedup(&mined.cause);
        }
    }
    Ok(())
}

fn eval(formula_path: &Path, data_path: &Path, beta: f64) -> Result<()> {
    let (data, _) = read_dataset(data_path)?;
    let text = std::fs::read_to_string(formula_path)
        .with_context(|| format!("reading formula file {}", formula_path.display()))?;
    let phi = parse_formula(text.trim(), data.state_dim(), data.control_dim())?;
    let counts = confusion_counts(&phi, &data)?;
    println!(
        "tp={} fp={} tn={} fn={} beta={} f_beta={:.6}",
        counts.true_positives,
        counts.false_positives,
        counts.true_negatives,
        counts.false_negatives,
        beta,
        counts.f_beta(beta)
    );
    Ok(())
}

fn heatmap(data_path: &Path, opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let grid = cfg.grid_config()?;
    let (data, _) = read_dataset(data_path)?;
    let report = visit_ratios(&data, &grid)?;
    let svg = opts.out.join("heatmap.svg");
    let csv = opts.out.join("heatmap.csv");
    write_heatmap_svg(&svg, &report, &grid)?;
    write_heatmap_csv(&csv, &report)?;
    println!("wrote {} and {}", svg.display(), csv.display());
    Ok(())
}

fn serve(opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    if cfg.plant.kind == PlantKind::External {
        return Err(usage("serve exposes built-in plants; pick grid or traffic"));
    }
    let mut resolved = cfg.build_plant()?;
    let input = BufReader::new(stdin().lock());
    let out = stdout();
    serve_plant(resolved.plant.as_mut(), input, out.lock())?;
    out.lock().flush()?;
    Ok(())
}
