//! Command-line front end: parse, classify, select extrapolation bounds,
//! run synthesis, optionally validate against the brute-force oracle, and
//! emit text, JSON, DOT, or benchmark CSV.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pzone_core::engine::{
    cycle_synth, eef, export_graph, Caps, CycleOptions, ExplorationStats, GraphFormat,
    Termination,
};
use pzone_core::extrapolation::{select_mode, ModeReport, ModeSelection, PtaClass, RequestedMode};
use pzone_core::model::{parse_model, LocId, Pta};
use pzone_core::oracle::{default_sampler, validate, Property, ValidationReport};

/// Exact parameter synthesis for parametric timed automata with zone
/// extrapolation.
#[derive(Parser)]
#[command(name = "pzone", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the parameter valuations satisfying a property.
    Check(CheckArgs),
    /// Run every model in a directory with and without extrapolation and
    /// tabulate times as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Mode {
    None,
    M,
    Vecm,
    Auto,
}

impl Mode {
    fn requested(self) -> RequestedMode {
        match self {
            Mode::None => RequestedMode::None,
            Mode::M => RequestedMode::M,
            Mode::Vecm => RequestedMode::VecM,
            Mode::Auto => RequestedMode::Auto,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("property").required(true).args(["reach", "cycle"])))]
struct CheckArgs {
    /// Model file in the pzone language.
    model: PathBuf,
    /// Reachability synthesis targeting these locations (comma-separated).
    #[arg(long, value_delimiter = ',')]
    reach: Option<Vec<String>>,
    /// Cycle (liveness) synthesis through these accepting locations.
    #[arg(long, value_delimiter = ',')]
    cycle: Option<Vec<String>>,
    /// Extrapolation mode; `auto` picks the strongest applicable bounds.
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Stop after exploring this many symbolic states (0 = unlimited).
    #[arg(long, default_value_t = 0)]
    max_states: usize,
    /// Stop expanding beyond this path depth (0 = unlimited).
    #[arg(long, default_value_t = 0)]
    max_depth: usize,
    /// Emit the result as JSON on stdout.
    #[arg(long)]
    json: bool,
    /// Write the explored zone graph in DOT format to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Cross-check the result against the brute-force oracle.
    #[arg(long)]
    validate: bool,
    /// Apply the cycle-synthesis parameter-bounding correction on the
    /// L side as well (interpretation; the published argument covers U).
    #[arg(long)]
    liveness_l_side: bool,
    /// Seed of the validation sampler (PZONE_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .pta models.
    dir: PathBuf,
    /// Wall-clock timeout per run, in seconds.
    #[arg(long, default_value_t = 5)]
    timeout: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct PropertyDoc {
    kind: &'static str,
    locations: Vec<String>,
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    property: PropertyDoc,
    mode_report: &'a ModeReport,
    result: Vec<String>,
    stats: &'a ExplorationStats,
    termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_applied: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    liveness_guaranteed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<&'a ValidationReport>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Check(args) => check(args),
        Command::Bench(args) => bench(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve_locations(a: &Pta, names: &[String]) -> Result<BTreeSet<LocId>> {
    let mut out = BTreeSet::new();
    for name in names {
        let id = a
            .location_named(name)
            .ok_or_else(|| anyhow!("unknown location `{name}`"))?;
        out.insert(id);
    }
    if out.is_empty() {
        bail!("the property needs at least one location");
    }
    Ok(out)
}

fn check(args: CheckArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("cannot read {}", args.model.display()))?;
    let a = match parse_model(&text) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}:{e}", args.model.display());
            return Ok(ExitCode::from(1));
        }
    };
    let seed = match std::env::var("PZONE_SEED") {
        Ok(s) => s
            .parse::<u64>()
            .map_err(|_| anyhow!("PZONE_SEED must be an integer"))?,
        Err(_) => args.seed,
    };
    let sel: ModeSelection = select_mode(&a, args.mode.requested());
    let caps = Caps { max_states: args.max_states, max_depth: args.max_depth };

    let started = Instant::now();
    let (kind, locations, constraint, stats, correction_applied) = if let Some(names) =
        &args.reach
    {
        let targets = resolve_locations(&a, names)?;
        let (k, stats) = eef(&a, &targets, &sel.bounds, caps);
        ("reach", targets, k, stats, None)
    } else {
        let names = args.cycle.as_ref().expect("clap enforces the property group");
        let accepting = resolve_locations(&a, names)?;
        let opts = CycleOptions { apply_correction: true, l_side: args.liveness_l_side };
        let run = cycle_synth(&a, &accepting, &sel, caps, opts);
        ("cycle", accepting, run.constraint, run.stats, Some(run.correction_applied))
    };
    let elapsed = started.elapsed();

    let validation = if args.validate {
        let samples = default_sampler(&a, &sel, seed);
        let property = match kind {
            "reach" => Property::Reach(locations.clone()),
            _ => Property::Cycle(locations.clone()),
        };
        Some(validate(&a, &constraint, &property, &samples))
    } else {
        None
    };

    if let Some(path) = &args.dot {
        let dot = export_graph(&a, &sel.bounds, caps, GraphFormat::Dot);
        std::fs::write(path, dot).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let location_names: Vec<String> = locations
        .iter()
        .map(|l| a.locations[l.0].name.clone())
        .collect();
    let rendered = constraint.in_source_units(&a.scale).render_disjuncts();
    // Cycle results are guaranteed sound either on bounded domains or
    // after the parameter-bounding correction.
    let liveness_guaranteed = correction_applied
        .map(|c| c || sel.report.class == PtaClass::Bounded);

    if args.json {
        let doc = CheckDoc {
            property: PropertyDoc { kind, locations: location_names.clone() },
            mode_report: &sel.report,
            result: rendered.clone(),
            stats: &stats,
            termination: stats.termination,
            correction_applied,
            liveness_guaranteed,
            validation: validation.as_ref(),
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("model: {}", args.model.display());
        println!("property: {} {}", kind, location_names.join(","));
        println!(
            "class: {}, mode: {}{}",
            serde_json::to_value(sel.report.class)?
                .as_str()
                .unwrap_or("?"),
            sel.report.mode,
            if sel.report.fallback { " (fallback)" } else { "" }
        );
        let bounds: Vec<String> = sel
            .report
            .bounds
            .iter()
            .map(|(clock, b)| format!("{clock}: {b}"))
            .collect();
        println!("bounds: {}", bounds.join(", "));
        if let Some(lp) = &sel.report.lp_hat {
            println!("parameter bound: {lp}");
        }
        if rendered.is_empty() {
            println!("result: false");
        } else {
            for d in &rendered {
                println!("result: {d}");
            }
        }
        if let Some(g) = liveness_guaranteed {
            if !g {
                println!(
                    "warning: cycle synthesis on this class has no soundness guarantee"
                );
            }
        }
        println!(
            "stats: {} states explored, {} extrapolation members, depth {}",
            stats.states_explored, stats.split_states, stats.max_depth
        );
        println!(
            "termination: {}",
            match stats.termination {
                Termination::Complete => "complete",
                Termination::CapReached => "cap reached",
            }
        );
        println!("time: {:.3} s", elapsed.as_secs_f64());
        if let Some(v) = &validation {
            println!(
                "validation: {} samples, {} agree, {} counterexamples",
                v.samples,
                v.agreements,
                v.counterexamples.len()
            );
            for c in &v.counterexamples {
                println!("  counterexample: {:?}", c);
            }
        }
    }

    let code = match stats.termination {
        Termination::Complete => ExitCode::SUCCESS,
        Termination::CapReached => ExitCode::from(2),
    };
    Ok(code)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum RunStatus {
    Complete,
    CapReached,
    Timeout,
    Error,
}

impl RunStatus {
    fn name(self) -> &'static str {
        match self {
            RunStatus::Complete => "complete",
            RunStatus::CapReached => "cap_reached",
            RunStatus::Timeout => "timeout",
            RunStatus::Error => "error",
        }
    }
}

/// Runs `pzone check` on one model in a subprocess, killing it at the
/// deadline; timed-out runs are charged the full timeout, the usual
/// convention for mean computation.
fn timed_run(model: &Path, reach: &str, mode: &str, timeout: Duration) -> Result<(f64, RunStatus)> {
    let exe = std::env::current_exe().context("cannot locate the pzone binary")?;
    let started = Instant::now();
    let mut child = std::process::Command::new(exe)
        .arg("check")
        .arg(model)
        .arg("--reach")
        .arg(reach)
        .arg("--mode")
        .arg(mode)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()
        .context("cannot spawn the check subprocess")?;
    loop {
        if let Some(status) = child.try_wait()? {
            let secs = started.elapsed().as_secs_f64();
            let status = match status.code() {
                Some(0) => RunStatus::Complete,
                Some(2) => RunStatus::CapReached,
                _ => RunStatus::Error,
            };
            return Ok((secs, status));
        }
        if started.elapsed() >= timeout {
            child.kill().ok();
            child.wait().ok();
            return Ok((timeout.as_secs_f64(), RunStatus::Timeout));
        }
        std::thread::sleep(Duration::from_millis(2));
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut models: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .with_context(|| format!("cannot read {}", args.dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pta"))
        .collect();
    models.sort();
    let timeout = Duration::from_secs(args.timeout);

    let mut lines = vec![
        "model,property,none_time_s,none_status,auto_time_s,auto_status".to_string(),
    ];
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for model in &models {
        let text = std::fs::read_to_string(model)?;
        let a = parse_model(&text)
            .map_err(|e| anyhow!("{}:{e}", model.display()))?;
        // Default benchmark property: reach the accepting locations, or
        // the last location when none is marked.
        let mut targets = a.accepting_locations();
        if targets.is_empty() {
            targets.push(LocId(a.locations.len() - 1));
        }
        let reach: Vec<String> = targets
            .iter()
            .map(|l| a.locations[l.0].name.clone())
            .collect();
        let reach = reach.join(",");
        let (none_t, none_s) = timed_run(model, &reach, "none", timeout)?;
        let (auto_t, auto_s) = timed_run(model, &reach, "auto", timeout)?;
        let name = model
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        lines.push(format!(
            "{name},reach {reach},{none_t:.3},{},{auto_t:.3},{}",
            none_s.name(),
            auto_s.name()
        ));
        rows.push((none_t, auto_t));
    }

    if !rows.is_empty() {
        let n = rows.len() as f64;
        let mean_none: f64 = rows.iter().map(|r| r.0).sum::<f64>() / n;
        let mean_auto: f64 = rows.iter().map(|r| r.1).sum::<f64>() / n;
        // Normalized means: each run divided by the slower of the pair.
        let norm = |f: fn(&(f64, f64)) -> f64| -> f64 {
            rows.iter()
                .map(|r| {
                    let worst = r.0.max(r.1);
                    if worst == 0.0 {
                        1.0
                    } else {
                        f(r) / worst
                    }
                })
                .sum::<f64>()
                / n
        };
        lines.push(format!("mean,,{mean_none:.3},,{mean_auto:.3},"));
        lines.push(format!(
            "normalized_mean,,{:.3},,{:.3},",
            norm(|r| r.0),
            norm(|r| r.1)
        ));
    }

    let csv = lines.join("\n") + "\n";
    match &args.csv {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}
