//! Command-line front end: `analyze`, `simulate`, `verify`, `symmetrise`.
//!
//! Every run writes a `<command>.manifest.json` into the output directory
//! listing the seed, the configuration and every emitted file. Exit codes:
//! 0 when all requested checks pass, 1 on other failures, 2 on malformed
//! input, 3 on an invariant violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::content::Content;
use crate::dynamics::{integrate, IntegratorConfig, Method};
use crate::equilibrium::{solve_nash, verify_preference_nash};
use crate::error::{Error, Result};
use crate::fuzz::{self, random_interior};
use crate::game::{Game, MixedProfile, Mode};
use crate::graph::PreferenceGraph;
use crate::symmetrise::symmetrise;
use crate::verify::{self, Scope};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Slack for the per-step monotonicity check on `x_H`.
pub const MONOTONE_SLACK: f64 = 1e-8;
/// Allowed drift of each population's total mass.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "attractor",
    version,
    about = "Replicator attractors of zero-sum games"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Directory receiving reports, artifacts and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Rk4Log,
    Rk4Direct,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4Log => Method::Rk4Log,
            MethodArg::Rk4Direct => Method::Rk4Direct,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preference graph, sink component, attractor and Nash certificate.
    Analyze {
        game: PathBuf,
        /// Write the preference graph with the sink shaded.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Integrate the replicator dynamic and record x_H along the way.
    Simulate {
        game: PathBuf,
        /// `uniform`, `random`, or explicit coordinates; the two players of a
        /// non-symmetric game are separated by `;`.
        #[arg(long, default_value = "uniform", allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk4Log)]
        method: MethodArg,
        #[arg(long, default_value = "trajectory.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "trajectory.svg")]
        svg: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Randomised invariant suites over seeded random games.
    Verify {
        #[arg(long, default_value = "all")]
        scope: Scope,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Write the von Neumann symmetrisation as a symmetric game file.
    Symmetrise {
        game: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Simulate { .. } => "simulate",
            Command::Verify { .. } => "verify",
            Command::Symmetrise { .. } => "symmetrise",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    pub seed: u64,
    pub config: Value,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub summary: Value,
}

/// Result of a command before the manifest is written.
struct Run {
    input: Option<PathBuf>,
    config: Value,
    outputs: Vec<PathBuf>,
    passed: bool,
    /// Exit code when `passed` is false.
    failure_code: i32,
    summary: Value,
    text: String,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::InvalidGame(_)
        | Error::Dimension(_)
        | Error::WrongMode { .. }
        | Error::InvalidMixedProfile(_)
        | Error::InvalidConfig(_)
        | Error::Json(_)
        | Error::Io(_) => EXIT_INPUT,
        Error::Certification(_) | Error::Diverged { .. } => EXIT_VIOLATION,
        Error::Incomparable(..) | Error::Solver(_) => EXIT_FAILURE,
    }
}

/// Runs the parsed command, printing the report to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn execute(cli: &Cli, out: &mut impl Write, err: &mut impl Write) -> i32 {
    match run(cli, err) {
        Ok(run) => {
            let code = if run.passed {
                EXIT_OK
            } else {
                run.failure_code
            };
            match write_manifest(cli, run, out) {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    exit_code(&e)
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn write_manifest(cli: &Cli, run: Run, out: &mut impl Write) -> Result<()> {
    let name = cli.command.name();
    let manifest_path = cli.out_dir.join(format!("{name}.manifest.json"));
    let mut outputs: Vec<String> = run.outputs.iter().map(|p| display(p)).collect();
    outputs.push(display(&manifest_path));
    let manifest = RunManifest {
        command: name.to_string(),
        input: run.input.as_deref().map(display),
        seed: cli.seed,
        config: run.config,
        outputs,
        passed: run.passed,
        summary: run.summary,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, format!("{text}\n"))?;
    match cli.format {
        Format::Json => writeln!(out, "{text}")?,
        Format::Text => write!(out, "{}", run.text)?,
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn run(cli: &Cli, err: &mut impl Write) -> Result<Run> {
    fs::create_dir_all(&cli.out_dir)?;
    match &cli.command {
        Command::Analyze { game, dot } => analyze(cli, game, dot.as_deref()),
        Command::Simulate {
            game,
            start,
            horizon,
            step,
            method,
            csv,
            svg,
            no_svg,
        } => {
            let svg = (!no_svg).then_some(svg.as_path());
            simulate(cli, game, start, *horizon, *step, *method, csv, svg)
        }
        Command::Verify { scope, count } => verify_cmd(cli, *scope, *count, err),
        Command::Symmetrise { game, output } => symmetrise_cmd(cli, game, output.as_deref()),
    }
}

fn resolve(cli: &Cli, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        cli.out_dir.join(p)
    }
}

pub fn load_game(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    Game::from_json(&text)
}

fn analyze(cli: &Cli, path: &Path, dot: Option<&Path>) -> Result<Run> {
    let game = load_game(path)?;
    let pg = PreferenceGraph::build(&game);
    let scc = pg.scc();
    let sink = pg.sink_component()?;
    let content = Content::new(&game, sink.clone());
    let attractor = content.report(&game);
    let cert = solve_nash(&game)?;
    let nash = cert.report(&game);
    let pn = verify_preference_nash(&game)?;
    let passed = pn.passed && cert.in_sink && cert.support_strongly_connected;

    let mut outputs = Vec::new();
    if let Some(dot) = dot {
        let target = resolve(cli, dot);
        fs::write(&target, pg.to_dot(&sink))?;
        outputs.push(target);
    }
    let arcs: Vec<Value> = pg
        .arcs()
        .iter()
        .map(|a| json!([pg.label(a.source), pg.label(a.target), a.weight.to_string()]))
        .collect();
    let report = json!({
        "mode": game.mode(),
        "rows": game.rows(),
        "cols": game.cols(),
        "graph": {
            "nodes": pg.node_count(),
            "arcs": arcs,
            "ties": pg.ties().len(),
            "components": scc.len(),
            "strongly_connected": scc.len() == 1,
        },
        "attractor": attractor,
        "nash": nash,
        "preference_nash": pn,
    });
    let report_path = cli.out_dir.join("analysis.json");
    fs::write(
        &report_path,
        format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    outputs.push(report_path);

    let mut text = String::new();
    text.push_str(&format!(
        "game: {} {}x{}\n",
        game.mode(),
        game.rows(),
        game.cols()
    ));
    text.push_str(&format!(
        "preference graph: {} nodes, {} arcs, {} tied pairs, {} components\n",
        pg.node_count(),
        pg.arcs().len(),
        pg.ties().len(),
        scc.len()
    ));
    text.push_str(&format!("sink: {{{}}}\n", attractor.sink.join(" ")));
    let parts: Vec<&str> = attractor
        .maximal_subgames
        .iter()
        .map(|s| s.description.as_str())
        .collect();
    text.push_str(&format!("attractor: {}\n", parts.join(" u ")));
    if attractor.is_whole_game {
        text.push_str("attractor is the whole strategy space\n");
    }
    let eq: Vec<String> = nash
        .equilibrium
        .iter()
        .map(|v| {
            format!(
                "({})",
                v.iter()
                    .map(|x| format!("{x:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    text.push_str(&format!(
        "nash equilibrium: {} value {:.6}\n",
        eq.join(" "),
        nash.value + 0.0
    ));
    text.push_str(&format!(
        "essential subgame: {} (in sink: {}, strongly connected: {})\n",
        pn.essential_subgame, pn.in_sink, pn.strongly_connected
    ));

    Ok(Run {
        input: Some(path.to_path_buf()),
        config: json!({ "dot": dot.map(display) }),
        outputs,
        passed,
        failure_code: EXIT_VIOLATION,
        summary: json!({
            "sink": attractor.sink,
            "attractor": parts,
            "value": nash.value,
            "essential_subgame": pn.essential_subgame,
        }),
        text,
    })
}

/// Parses `uniform`, `random` or explicit coordinates.
pub fn parse_start(game: &Game, spec: &str, seed: u64) -> Result<MixedProfile> {
    match spec.trim() {
        "uniform" => Ok(MixedProfile::uniform(game)),
        "random" => Ok(random_interior(game, &mut fuzz::rng(seed))),
        explicit => {
            let parts = explicit
                .split(';')
                .map(|part| {
                    part.split(',')
                        .map(|v| {
                            v.trim().parse::<f64>().map_err(|_| {
                                Error::InvalidMixedProfile(format!("not a number: {v:?}"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            MixedProfile::for_game(game, parts)
        }
    }
}

/// `Σ x*_s ln x_s` (summed over populations) for a fully mixed equilibrium
/// `x*`; it is constant along interior replicator orbits.
fn first_integral(eq: &MixedProfile, z: &MixedProfile) -> f64 {
    eq.parts()
        .iter()
        .zip(z.parts())
        .map(|(e, x)| e.iter().zip(x.iter()).map(|(a, b)| a * b.ln()).sum::<f64>())
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    path: &Path,
    start: &str,
    horizon: f64,
    step: f64,
    method: MethodArg,
    csv: &Path,
    svg: Option<&Path>,
) -> Result<Run> {
    let game = load_game(path)?;
    let z0 = parse_start(&game, start, cli.seed)?;
    let cfg = IntegratorConfig {
        method: method.into(),
        ..IntegratorConfig::new(step, horizon)
    };
    cfg.validate()?;
    let sink = PreferenceGraph::build(&game).sink_component()?;
    let tr = integrate(&game, &z0, &cfg, Some(&sink))?;

    let mut outputs = Vec::new();
    let csv_path = resolve(cli, csv);
    fs::write(&csv_path, tr.to_csv()?)?;
    outputs.push(csv_path);
    if let Some(svg) = svg {
        let svg_path = resolve(cli, svg);
        fs::write(&svg_path, tr.to_svg())?;
        outputs.push(svg_path);
    }

    let masses = tr.mass.as_deref().unwrap_or(&[]);
    let final_mass = masses.last().copied().unwrap_or(1.0);
    let drift = tr.max_simplex_drift();
    let faces = tr.faces_preserved();
    let monotone = tr.monotonicity_violation(MONOTONE_SLACK);

    let cert = solve_nash(&game)?;
    let fully_mixed = cert
        .equilibrium
        .parts()
        .iter()
        .all(|v| v.iter().all(|&x| x > 0.0));
    let interior = z0.parts().iter().all(|v| v.iter().all(|&x| x > 0.0));
    let conserved = (fully_mixed && interior).then(|| {
        let values: Vec<f64> = tr
            .states
            .iter()
            .map(|z| first_integral(&cert.equilibrium, z))
            .collect();
        let initial = values[0];
        let max_drift = values
            .iter()
            .map(|v| (v - initial).abs())
            .fold(0.0, f64::max);
        json!({ "initial": initial, "final": values[values.len() - 1], "max_drift": max_drift })
    });

    let passed = drift <= DRIFT_TOLERANCE && faces && monotone.is_none();
    let final_state: Vec<Vec<f64>> = tr.last().parts().iter().map(|v| v.to_vec()).collect();
    let summary = json!({
        "steps": tr.len() - 1,
        "final_time": tr.times[tr.times.len() - 1],
        "final_state": final_state,
        "final_x_h": final_mass,
        "final_distance": 1.0 - final_mass,
        "max_simplex_drift": drift,
        "faces_preserved": faces,
        "monotonicity_violation_step": monotone,
        "first_integral": conserved,
    });

    let mut text = format!("steps: {}\nfinal x_H: {final_mass:.12}\n", tr.len() - 1);
    text.push_str(&format!("distance to content: {:.3e}\n", 1.0 - final_mass));
    text.push_str(&format!("max simplex drift: {drift:.3e}\n"));
    if let Some(c) = &conserved {
        text.push_str(&format!(
            "first integral drift: {:.3e}\n",
            c["max_drift"].as_f64().unwrap_or(0.0)
        ));
    }
    if let Some(k) = monotone {
        text.push_str(&format!("x_H decreased at step {k}\n"));
    }

    Ok(Run {
        input: Some(path.to_path_buf()),
        config: json!({
            "start": start,
            "horizon": horizon,
            "step": step,
            "method": method,
            "csv": display(csv),
            "svg": svg.map(display),
        }),
        outputs,
        passed,
        failure_code: EXIT_VIOLATION,
        summary,
        text,
    })
}

fn verify_cmd(cli: &Cli, scope: Scope, count: usize, err: &mut impl Write) -> Result<Run> {
    if count == 0 {
        writeln!(
            err,
            "warning: --count 0 checks nothing; the pass is vacuous"
        )?;
    }
    let reports = verify::run(scope, cli.seed, count);
    let passed = reports.iter().all(|r| r.passed);
    let mut outputs = Vec::new();
    let report_path = cli.out_dir.join("verify.json");
    fs::write(
        &report_path,
        format!("{}\n", serde_json::to_string_pretty(&reports)?),
    )?;
    outputs.push(report_path);
    if !passed {
        let failures: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
        let path = cli.out_dir.join("counterexamples.json");
        let cex: Vec<Value> = failures
            .iter()
            .map(|r| json!({ "scope": r.scope, "counterexamples": r.counterexamples }))
            .collect();
        fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&cex)?))?;
        outputs.push(path);
    }

    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!(
            "{:<15} {} {}/{} games passed (seed {})\n",
            r.scope.to_string(),
            if r.passed { "PASS" } else { "FAIL" },
            r.count - r.failed,
            r.count,
            r.seed
        ));
        for (k, v) in &r.metrics {
            text.push_str(&format!("    {k}: {v}\n"));
        }
        for c in &r.counterexamples {
            text.push_str(&format!("    game #{}: {}\n", c.index, c.detail));
        }
    }
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "scope": r.scope, "passed": r.passed, "failed": r.failed, "count": r.count }))
        .collect();
    Ok(Run {
        input: None,
        config: json!({ "scope": scope, "count": count }),
        outputs,
        passed,
        failure_code: EXIT_VIOLATION,
        summary: Value::Array(summary),
        text,
    })
}

fn symmetrise_cmd(cli: &Cli, path: &Path, output: Option<&Path>) -> Result<Run> {
    let game = load_game(path)?;
    if game.mode() == Mode::Symmetric {
        return Err(Error::WrongMode {
            expected: "non-symmetric",
        });
    }
    let s = symmetrise(&game)?;
    let target = match output {
        Some(p) => resolve(cli, p),
        None => {
            let stem = path
                .file_stem()
                .map_or("game".into(), |s| s.to_string_lossy());
            cli.out_dir.join(format!("{stem}.sym.json"))
        }
    };
    fs::write(&target, format!("{}\n", s.to_game()?.to_json()))?;
    let violations = s.antisymmetry_violations().len();
    let text = format!(
        "wrote {}x{} symmetrisation to {}\n",
        s.size(),
        s.size(),
        target.display()
    );
    Ok(Run {
        input: Some(path.to_path_buf()),
        config: json!({ "output": output.map(display) }),
        outputs: vec![target],
        passed: violations == 0,
        failure_code: EXIT_VIOLATION,
        summary: json!({ "size": s.size(), "antisymmetry_violations": violations }),
        text,
    })
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    execute(
        &cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
