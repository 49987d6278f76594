use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use reline_core::dsp::DEFAULT_MA_WINDOW;
use reline_core::export::{cloud_ply, ec_trace_csv, grid_csv};
use reline_core::mission::{
    load_map, mission_report, run_pass1, run_pass2, save_map, BranchMap, EcTrace, MissionConfig,
    MissionError, MissionLog, StoredCloud, StoredGrid,
};
use reline_core::world::{build_scenario, templates, LinerSpec, PipeScenario, ScenarioConfig};

const OUT_DIR_ENV: &str = "RELINE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "reline",
    version,
    about = "In-pipe branch relocation and machining simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a scenario file from a built-in template or an existing config.
    Gen {
        /// Template name (lab8m, table1) or path to a scenario config.
        source: String,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run one mission pass and write its artifacts.
    Run {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        pass: u8,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, env = OUT_DIR_ENV, default_value = "reline-out")]
        out: PathBuf,
        /// Branch map from pass 1, required for pass 2.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Override a config value, `key.path=value`; `mission.` targets the mission settings.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Export a stored artifact as CSV or PLY.
    Export {
        kind: ExportKind,
        /// Run directory.
        #[arg(long)]
        run: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Branch id; the first stored item when omitted.
        #[arg(long)]
        id: Option<String>,
    },
    /// Rebuild the mission report from a run directory.
    Report {
        #[arg(long)]
        run: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportKind {
    EcTrace,
    Cloud,
    Grid,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Abort(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Abort(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Abort(m) | CliError::Io(m) => m,
        }
    }
}

impl From<MissionError> for CliError {
    fn from(e: MissionError) -> Self {
        match e {
            MissionError::Io(_) | MissionError::Parse(_) | MissionError::Format(_) => {
                CliError::Io(e.to_string())
            }
            MissionError::Precondition(_) => CliError::Usage(e.to_string()),
            _ => CliError::Abort(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}

fn load_scenario_config(path: &Path) -> CliResult<ScenarioConfig> {
    ScenarioConfig::from_json(&read(path)?)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_artifact<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    if !path.exists() {
        return Err(CliError::Io(format!("not found: {}", path.display())));
    }
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Set a dotted path inside a JSON document; every segment must already exist.
fn set_path(doc: &mut Value, key: &str, raw: &str) -> CliResult<()> {
    let mut node = doc;
    for part in key.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Usage(format!("unknown override key '{key}'")))?;
    }
    *node = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

fn apply_overrides<T>(value: &T, overrides: &[(String, String)]) -> CliResult<T>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    if overrides.is_empty() {
        return serde_json::from_value(serde_json::to_value(value).expect("config serializes"))
            .map_err(|e| CliError::Usage(e.to_string()));
    }
    let mut doc = serde_json::to_value(value).expect("config serializes");
    for (k, v) in overrides {
        set_path(&mut doc, k, v)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid override: {e}")))
}

fn cmd_gen(source: &str, out: Option<&Path>) -> CliResult<()> {
    let config = match templates::by_name(source) {
        Some(c) => c,
        None if Path::new(source).is_file() => load_scenario_config(Path::new(source))?,
        None => {
            return Err(CliError::Usage(format!(
                "unknown template '{source}' (expected one of {} or a config file)",
                templates::NAMES.join(", ")
            )))
        }
    };
    build_scenario(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(out, &(config.to_json() + "\n"))
}

struct RunArgs<'a> {
    pass: u8,
    scenario: &'a Path,
    seed: u64,
    out: &'a Path,
    map: Option<&'a Path>,
    overrides: &'a [String],
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    if args.pass == 2 && args.map.is_none() {
        return Err(CliError::Usage("pass 2 needs --map".into()));
    }
    let mut scenario_sets = Vec::new();
    let mut mission_sets = Vec::new();
    for raw in args.overrides {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override '{raw}' is not key=value")))?;
        match k.strip_prefix("mission.") {
            Some(rest) => mission_sets.push((rest.to_string(), v.to_string())),
            None => scenario_sets.push((k.to_string(), v.to_string())),
        }
    }
    let config = apply_overrides(&load_scenario_config(args.scenario)?, &scenario_sets)?;
    let mut mission = apply_overrides(
        &MissionConfig::from_scenario_config(&config, args.seed),
        &mission_sets,
    )?;
    mission.seed = args.seed;
    let scenario = build_scenario(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = args.out;

    let (map, logs, after, log_name) = match args.pass {
        1 => {
            let run = run_pass1(&scenario, &mission)?;
            write(&out.join("clouds.json"), &to_json(&run.clouds))?;
            (
                run.map,
                vec![run.log],
                run.scenario_after,
                "pass1_log.jsonl",
            )
        }
        _ => {
            let map_path = args.map.expect("checked above");
            let map = load_map(map_path)?;
            let lined = if scenario.is_lined() {
                scenario.clone()
            } else {
                scenario
                    .relined(LinerSpec::default())
                    .map_err(|e| CliError::Usage(e.to_string()))?
            };
            let run = run_pass2(&lined, &map, &mission)?;
            write(&out.join("ec_traces.json"), &to_json(&run.traces))?;
            write(&out.join("grids.json"), &to_json(&run.grids))?;
            let mut logs = Vec::new();
            let pass1_log = map_path
                .parent()
                .unwrap_or(Path::new("."))
                .join("pass1_log.jsonl");
            if pass1_log.is_file() {
                logs.push(MissionLog::from_jsonl(&read(&pass1_log)?)?);
            }
            logs.push(run.log);
            (run.map, logs, run.scenario_after, "pass2_log.jsonl")
        }
    };

    save_map(&map, &out.join("branch_map.json"))?;
    let own_log = logs.last().expect("at least one log");
    write(&out.join(log_name), &own_log.to_jsonl())?;
    if args.pass == 2 && logs.len() == 2 && !out.join("pass1_log.jsonl").exists() {
        write(&out.join("pass1_log.jsonl"), &logs[0].to_jsonl())?;
    }
    write(&out.join("scenario.json"), &(config.to_json() + "\n"))?;
    let after_config =
        ScenarioConfig::from_scenario(&after, config.sensors.clone(), config.machining.clone());
    write(
        &out.join("scenario_after.json"),
        &(after_config.to_json() + "\n"),
    )?;
    write_report(out, &logs, &map, Some(&scenario))?;
    eprintln!(
        "pass {} complete: {} entries, artifacts in {}",
        args.pass,
        map.entries.len(),
        out.display()
    );
    Ok(())
}

fn write_report(
    dir: &Path,
    logs: &[MissionLog],
    map: &BranchMap,
    truth: Option<&PipeScenario>,
) -> CliResult<String> {
    let report = mission_report(logs, map, truth);
    write(&dir.join("report.txt"), &report.text)?;
    write(&dir.join("distances.csv"), &report.distances_csv)?;
    write(&dir.join("machining.csv"), &report.machining_csv)?;
    Ok(report.text)
}

fn cmd_report(run: &Path, out: Option<&Path>) -> CliResult<()> {
    let map = load_map(&run.join("branch_map.json"))?;
    let mut logs = Vec::new();
    for name in ["pass1_log.jsonl", "pass2_log.jsonl"] {
        let path = run.join(name);
        if path.is_file() {
            logs.push(MissionLog::from_jsonl(&read(&path)?)?);
        }
    }
    let scenario_path = run.join("scenario.json");
    let truth = if scenario_path.is_file() {
        Some(
            build_scenario(&load_scenario_config(&scenario_path)?)
                .map_err(|e| CliError::Io(e.to_string()))?,
        )
    } else {
        None
    };
    let text = write_report(run, &logs, &map, truth.as_ref())?;
    emit(out, &text)
}

fn pick<'a, T>(
    items: &'a [T],
    id: Option<&str>,
    item_id: impl Fn(&T) -> &str,
    what: &str,
) -> CliResult<&'a T> {
    match id {
        Some(id) => items.iter().find(|t| item_id(t) == id),
        None => items.first(),
    }
    .ok_or_else(|| {
        CliError::Io(format!(
            "not found: {what}{}",
            id.map(|i| format!(" for {i}")).unwrap_or_default()
        ))
    })
}

fn cmd_export(kind: ExportKind, run: &Path, out: &Path, id: Option<&str>) -> CliResult<()> {
    let text = match kind {
        ExportKind::EcTrace => {
            let traces: Vec<EcTrace> = load_artifact(&run.join("ec_traces.json"))?;
            let trace = pick(&traces, id, |t| &t.id, "eddy-current trace")?;
            ec_trace_csv(trace, DEFAULT_MA_WINDOW).map_err(|e| CliError::Io(e.to_string()))?
        }
        ExportKind::Cloud => {
            let clouds: Vec<StoredCloud> = load_artifact(&run.join("clouds.json"))?;
            cloud_ply(&pick(&clouds, id, |c| &c.id, "point cloud")?.cloud)
        }
        ExportKind::Grid => {
            let grids: Vec<StoredGrid> = load_artifact(&run.join("grids.json"))?;
            grid_csv(&pick(&grids, id, |g| &g.id, "radial grid")?.grid)
        }
    };
    write(out, &text)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen { source, out } => cmd_gen(&source, out.as_deref()),
        Command::Run {
            pass,
            scenario,
            seed,
            out,
            map,
            overrides,
        } => cmd_run(RunArgs {
            pass,
            scenario: &scenario,
            seed,
            out: &out,
            map: map.as_deref(),
            overrides: &overrides,
        }),
        Command::Export { kind, run, out, id } => cmd_export(kind, &run, &out, id.as_deref()),
        Command::Report { run, out } => cmd_report(&run, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
