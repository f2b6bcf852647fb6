//! Subcommand definitions and their implementations. Every command turns
//! its resolved inputs into a list of output files; writing the files and
//! the manifest is shared.

use std::path::{Path, PathBuf};

use arbodyn::bifurcation::{
    bifurcation_coefficients, coexistence_window, parameter_sweep, SweepRow,
};
use arbodyn::equilibria::{disease_free_states, solve_endemic, Equilibrium};
use arbodyn::model::STATE_NAMES;
use arbodyn::ode::Tolerances;
use arbodyn::sensitivity::{global_analysis, local_indices, LhsConfig};
use arbodyn::sim::{
    integrate, run_strategy, uniform_times, Control, PulseSchedule, Strategy, StrategyLevels,
    StrategyOptions, Trajectory, STRATEGY_HORIZON,
};
use arbodyn::stability::Stability;
use arbodyn::thresholds::ThresholdReport;
use arbodyn::{ModelError, ModelVariant, ParamId, State};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, parse_schedule, parse_state, read_text, RunConfig};
use crate::error::{CliError, Result};
use crate::manifest::{Inputs, Manifest};
use crate::output::{num, write_file, write_outputs, OutputFile, Table};
use crate::selfcheck;
use crate::svg::{self, Series};

#[derive(Debug, Parser)]
#[command(
    name = "arbodyn",
    version,
    about = "Arboviral disease control model toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file of `key = value` lines; missing keys keep their
    /// baseline value.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Integration {
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    /// Absolute tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Initial state file of `name = value` lines.
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold quantities.
    Thresholds,
    /// Disease-free and endemic equilibria with their stability.
    Equilibria,
    /// Equilibrium branches along a parameter sweep.
    Bifurcation {
        /// Parameter to sweep.
        #[arg(long, default_value = "beta_hv")]
        param: String,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        /// Number of sweep points.
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        svg: bool,
    },
    /// Integrate the model with an optional pulse schedule.
    Simulate {
        #[arg(long, default_value_t = STRATEGY_HORIZON)]
        horizon: f64,
        /// Number of evenly spaced output times including both ends.
        #[arg(long, default_value_t = STRATEGY_HORIZON as usize + 1)]
        samples: usize,
        /// Pulse schedule file, one `control level period duration start end` per line.
        #[arg(long, value_name = "FILE")]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        integration: Integration,
    },
    /// Run one control strategy over a grid of control levels.
    Strategy {
        /// Strategy tag, A to F.
        #[arg(long)]
        tag: String,
        /// Levels for one control, `control=v1,v2,...`; repeat for several
        /// controls. The runs cover the cartesian product.
        #[arg(long = "level", value_name = "CONTROL=LEVELS")]
        levels: Vec<String>,
        #[arg(long, default_value_t = STRATEGY_HORIZON)]
        horizon: f64,
        #[arg(long, default_value_t = STRATEGY_HORIZON as usize + 1)]
        samples: usize,
        #[command(flatten)]
        integration: Integration,
    },
    /// Sensitivity of the basic reproduction number.
    Sensitivity {
        #[command(subcommand)]
        mode: SensitivityMode,
    },
    /// Run the reference checks and write their measurements.
    Selfcheck,
    /// Repeat a run from its manifest.
    Replay {
        /// Manifest written by an earlier run.
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SensitivityMode {
    /// Normalized forward sensitivity indices at the configured parameters.
    Local {
        #[arg(long)]
        svg: bool,
    },
    /// Latin hypercube sampling with partial rank correlations.
    Global {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ranges file, one `parameter lo hi` per line.
        #[arg(long, value_name = "FILE")]
        ranges: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Thresholds => "thresholds",
            Command::Equilibria => "equilibria",
            Command::Bifurcation { .. } => "bifurcation",
            Command::Simulate { .. } => "simulate",
            Command::Strategy { .. } => "strategy",
            Command::Sensitivity {
                mode: SensitivityMode::Local { .. },
            } => "sensitivity_local",
            Command::Sensitivity {
                mode: SensitivityMode::Global { .. },
            } => "sensitivity_global",
            Command::Selfcheck => "selfcheck",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Flags whose values are files; their contents go into the manifest
/// instead of their paths.
const FILE_FLAGS: [&str; 5] = ["--config", "--out", "--schedule", "--init", "--ranges"];

/// Arguments worth recording: everything except the program name and the
/// file-valued flags.
pub fn recorded_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if FILE_FLAGS.contains(&a.as_str()) {
            it.next();
        } else if !FILE_FLAGS.iter().any(|f| a.starts_with(&format!("{f}="))) {
            out.push(a.clone());
        }
    }
    out
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    /// Short report for the terminal.
    pub report: String,
}

/// Parses `argv` (program name first), runs the command and writes its
/// outputs. Returns the terminal report.
pub fn run(argv: &[String]) -> Result<String> {
    let cli = Cli::try_parse_from(argv)?;
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli.common.out);
    }
    let inputs = resolve_inputs(&cli)?;
    execute(&cli, &inputs, &recorded_args(argv), &cli.common.out)
}

fn replay(path: &Path, out: &Path) -> Result<String> {
    let text = read_text(path)?;
    let manifest = Manifest::parse(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rec = manifest.replay().map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut argv = vec!["arbodyn".to_string()];
    argv.extend(rec.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: format!("recorded arguments do not parse: {e}"),
    })?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            message: "a replay manifest cannot itself be replayed".into(),
        });
    }
    execute(&cli, &rec.inputs, &rec.args, out)
}

fn resolve_inputs(cli: &Cli) -> Result<Inputs> {
    let mut config = match &cli.common.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    let mut init = None;
    let mut ranges = None;
    match &cli.command {
        Command::Simulate {
            schedule,
            integration,
            ..
        } => {
            if let Some(path) = schedule {
                let mut entries = config.schedule.entries.clone();
                entries.extend(parse_schedule(path)?);
                config.schedule = PulseSchedule::new(entries)?;
            }
            if let Some(path) = &integration.init {
                init = Some(parse_state(path, &State::strategy_initial())?);
            }
        }
        Command::Strategy { integration, .. } => {
            if let Some(path) = &integration.init {
                init = Some(parse_state(path, &State::strategy_initial())?);
            }
        }
        Command::Sensitivity {
            mode: SensitivityMode::Global {
                ranges: Some(path), ..
            },
        } => {
            let text = read_text(path)?;
            ranges = Some(LhsConfig::parse_ranges(&text).map_err(|e| CliError::Input {
                path: path.clone(),
                message: e.to_string(),
            })?);
        }
        _ => {}
    }
    Ok(Inputs {
        config,
        init,
        ranges,
    })
}

fn execute(cli: &Cli, inputs: &Inputs, args: &[String], out: &Path) -> Result<String> {
    let name = cli.command.name();
    let result = match &cli.command {
        Command::Thresholds => thresholds(inputs)?,
        Command::Equilibria => equilibria(inputs)?,
        Command::Bifurcation {
            param,
            lo,
            hi,
            n,
            svg,
        } => bifurcation(inputs, param, *lo, *hi, *n, *svg)?,
        Command::Simulate {
            horizon,
            samples,
            integration,
            ..
        } => simulate(inputs, *horizon, *samples, integration)?,
        Command::Strategy {
            tag,
            levels,
            horizon,
            samples,
            integration,
        } => strategy(inputs, tag, levels, *horizon, *samples, integration)?,
        Command::Sensitivity {
            mode: SensitivityMode::Local { svg },
        } => sensitivity_local(inputs, *svg)?,
        Command::Sensitivity {
            mode: SensitivityMode::Global { n, seed, svg, .. },
        } => sensitivity_global(inputs, *n, *seed, *svg)?,
        Command::Selfcheck => self_check()?,
        Command::Replay { .. } => unreachable!("replay is dispatched before execution"),
    };
    write_outputs(out, &result.files)?;
    let mut manifest = Manifest::new(name);
    manifest.record_inputs(inputs, args);
    manifest.record_outputs(&result.files);
    write_file(
        &out.join(format!("{name}_manifest.txt")),
        manifest.to_text().as_bytes(),
    )?;
    Ok(result.report)
}

fn tolerances(i: &Integration) -> Tolerances {
    Tolerances {
        rtol: i.rtol,
        atol: i.atol,
    }
}

fn thresholds(inputs: &Inputs) -> Result<RunOutput> {
    let rep = ThresholdReport::compute(&inputs.config.params)?;
    let mut t = Table::new(&["name", "value", "applicable"]);
    for (name, value, applicable) in rep.rows() {
        t.push(vec![name.to_string(), num(value), applicable.to_string()]);
    }
    let file = OutputFile::csv("thresholds.csv", &t)?;
    let report = String::from_utf8_lossy(&file.bytes).replace("\r\n", "\n");
    Ok(RunOutput {
        files: vec![file],
        report,
    })
}

fn equilibrium_row(label: &str, e: &Equilibrium) -> Vec<String> {
    let mut row = vec![label.to_string(), e.kind.as_str().to_string()];
    row.extend(e.state.y.iter().map(|&v| num(v)));
    row.push(num(e.lambda));
    row.push(num(e.residual));
    row.push(num(e.stability.modulus));
    row.push(e.stability.verdict.as_str().to_string());
    row
}

fn equilibria(inputs: &Inputs) -> Result<RunOutput> {
    let (p, v) = (&inputs.config.params, inputs.config.variant);
    let mut header = vec!["label", "kind"];
    header.extend(STATE_NAMES);
    header.extend(["lambda", "residual", "max_real_part", "stability"]);
    let mut t = Table::new(&header);
    let (e0, e1) = disease_free_states(p, v)?;
    t.push(equilibrium_row("E0", &e0));
    let mut report = format!("trivial: {}\n", e0.stability.verdict.as_str());
    if let Some(e1) = &e1 {
        t.push(equilibrium_row("E1", e1));
        report.push_str(&format!(
            "disease-free: {}\n",
            e1.stability.verdict.as_str()
        ));
        for (i, e) in solve_endemic(p, v)?.iter().enumerate() {
            t.push(equilibrium_row(&format!("EE{}", i + 1), e));
            report.push_str(&format!(
                "endemic {}: lambda {:.6e}, {}\n",
                i + 1,
                e.lambda,
                e.stability.verdict.as_str()
            ));
        }
    } else {
        report.push_str("no vector population at equilibrium\n");
    }
    Ok(RunOutput {
        files: vec![OutputFile::csv("equilibria.csv", &t)?],
        report,
    })
}

fn parse_param(key: &str) -> Result<ParamId> {
    ParamId::from_key(key)
        .ok_or_else(|| ModelError::InvalidConfig(format!("unknown parameter `{key}`")).into())
}

fn bifurcation(
    inputs: &Inputs,
    param: &str,
    lo: f64,
    hi: f64,
    n: usize,
    svg: bool,
) -> Result<RunOutput> {
    let (p, v) = (&inputs.config.params, inputs.config.variant);
    let id = parse_param(param)?;
    let rows = parameter_sweep(p, v, id, lo, hi, n)?;
    let mut t = Table::new(&[
        param,
        "R0",
        "branch",
        "lambda_root",
        "E_h",
        "E_v",
        "stable",
        "error",
    ]);
    for r in &rows {
        t.push(vec![
            num(r.value),
            num(r.r0),
            r.branch.to_string(),
            num(r.lambda_root),
            num(r.e_h),
            num(r.e_v),
            r.stability.map(|s| s.as_str()).unwrap_or("").to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    let mut files = vec![OutputFile::csv("bifurcation.csv", &t)?];
    let mut report = format!("{} rows over {param} in [{lo}, {hi}]\n", rows.len());

    let mut summary = Table::new(&["quantity", "value"]);
    let tol = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);
    match coexistence_window(p, v, id, lo, hi, n, tol)? {
        Some(((a, b), (ra, rb))) => {
            summary.push(vec!["window_lo".into(), num(a)]);
            summary.push(vec!["window_hi".into(), num(b)]);
            summary.push(vec!["reproduction_number_lo".into(), num(ra)]);
            summary.push(vec!["reproduction_number_hi".into(), num(rb)]);
            report.push_str(&format!(
                "two endemic equilibria for {param} in ({a:.6}, {b:.6})\n"
            ));
        }
        None => report.push_str("no coexistence window\n"),
    }
    if v == ModelVariant::FULL && id == ParamId::BetaHv {
        match bifurcation_coefficients(p) {
            Ok(c) => {
                summary.push(vec!["beta_star".into(), num(c.beta_star)]);
                summary.push(vec!["A1".into(), num(c.a1)]);
                summary.push(vec!["A2".into(), num(c.a2)]);
                summary.push(vec!["A1_transcribed".into(), num(c.a1_published())]);
                summary.push(vec!["direction".into(), c.direction.as_str().to_string()]);
                report.push_str(&format!(
                    "A1 = {:.6e}, A2 = {:.6e}: {} bifurcation\n",
                    c.a1,
                    c.a2,
                    c.direction.as_str()
                ));
            }
            Err(e) => report.push_str(&format!("bifurcation coefficients unavailable: {e}\n")),
        }
    }
    files.push(OutputFile::csv("bifurcation_summary.csv", &summary)?);
    if svg {
        files.push(OutputFile::text("bifurcation.svg", bifurcation_svg(&rows)));
    }
    Ok(RunOutput { files, report })
}

/// Branch segments of `E_h` against `R0`, broken wherever the branch or its
/// stability changes. Unstable segments are dashed.
pub fn bifurcation_svg(rows: &[SweepRow]) -> String {
    let branches = rows.iter().map(|r| r.branch).max().unwrap_or(0);
    let mut series = Vec::new();
    for b in 0..=branches {
        let mut current: Option<Series> = None;
        for r in rows.iter().filter(|r| r.branch == b && r.error.is_none()) {
            let dashed = r.stability != Some(Stability::Stable);
            match &mut current {
                Some(s) if s.dashed == dashed => s.points.push((r.r0, r.e_h)),
                _ => {
                    if let Some(s) = current.take() {
                        series.push(s);
                    }
                    current = Some(Series {
                        label: format!(
                            "{} {}",
                            if b == 0 {
                                "disease-free".to_string()
                            } else {
                                format!("endemic {b}")
                            },
                            if dashed { "unstable" } else { "stable" }
                        ),
                        points: vec![(r.r0, r.e_h)],
                        dashed,
                        color: svg::color(b),
                    });
                }
            }
        }
        series.extend(current);
    }
    svg::line_plot("Bifurcation diagram", "R0", "E_h", &series)
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut header = vec!["t"];
    header.extend(STATE_NAMES);
    header.push("cumulative_infections");
    let mut t = Table::new(&header);
    for ((time, st), c) in tr
        .times
        .iter()
        .zip(&tr.states)
        .zip(&tr.cumulative_infections)
    {
        let mut row = vec![num(*time)];
        row.extend(st.y.iter().map(|&v| num(v)));
        row.push(num(*c));
        t.push(row);
    }
    t
}

fn simulate(inputs: &Inputs, horizon: f64, samples: usize, i: &Integration) -> Result<RunOutput> {
    let c = &inputs.config;
    let init = inputs.init.unwrap_or_else(State::strategy_initial);
    let tr = integrate(
        &c.params,
        c.variant,
        &init,
        (0.0, horizon),
        &c.schedule,
        &tolerances(i),
        &uniform_times(0.0, horizon, samples),
    )?;
    let mut files = vec![OutputFile::csv("trajectory.csv", &trajectory_table(&tr))?];
    if i.svg {
        let series = [
            Series {
                label: "infected humans".into(),
                points: tr.times.iter().copied().zip(tr.infected_humans()).collect(),
                dashed: false,
                color: svg::color(0),
            },
            Series {
                label: "infected vectors".into(),
                points: tr
                    .times
                    .iter()
                    .copied()
                    .zip(tr.infected_vectors())
                    .collect(),
                dashed: false,
                color: svg::color(1),
            },
        ];
        files.push(OutputFile::text(
            "trajectory.svg",
            svg::line_plot("Simulation", "t (days)", "individuals", &series),
        ));
    }
    let last = tr.last().copied().unwrap_or(init);
    let report = format!(
        "t = {horizon}: infected humans {:.6e}, infected vectors {:.6e}, cumulative infections {:.6e}\n",
        last.y[arbodyn::model::idx::E_H] + last.y[arbodyn::model::idx::I_H],
        last.y[arbodyn::model::idx::E_V] + last.y[arbodyn::model::idx::I_V],
        tr.cumulative_infections.last().copied().unwrap_or(0.0)
    );
    Ok(RunOutput { files, report })
}

/// Levels swept when none are given on the command line.
pub fn default_levels(tag: Strategy) -> Vec<StrategyLevels> {
    let single = [0.0, 0.2, 0.4, 0.6, 0.8];
    let base = StrategyLevels::default();
    match tag {
        Strategy::A => single
            .iter()
            .map(|&a| StrategyLevels { alpha_1: a, ..base })
            .collect(),
        Strategy::B => single
            .iter()
            .map(|&c| StrategyLevels { c_m: c, ..base })
            .collect(),
        Strategy::C => single
            .iter()
            .map(|&e| StrategyLevels {
                eta_1: e,
                eta_2: e,
                ..base
            })
            .collect(),
        Strategy::D => [1.0, 0.8, 0.6, 0.4, 0.2]
            .iter()
            .map(|&a| StrategyLevels { alpha_2: a, ..base })
            .collect(),
        Strategy::E => grid(&[
            (Control::Alpha1, vec![0.0, 0.4, 0.8]),
            (Control::Cm, vec![0.0, 0.2, 0.4]),
        ]),
        Strategy::F => grid(&[
            (Control::Alpha1, vec![0.0, 0.4, 0.8]),
            (Control::Alpha2, vec![1.0, 0.6, 0.2]),
        ]),
    }
}

/// Cartesian product of per-control levels, the first control varying slowest.
pub fn grid(levels: &[(Control, Vec<f64>)]) -> Vec<StrategyLevels> {
    let mut out = vec![StrategyLevels::default()];
    for (c, values) in levels {
        out = out
            .iter()
            .flat_map(|base| {
                values.iter().map(move |&v| {
                    let mut l = *base;
                    l.set(*c, v);
                    l
                })
            })
            .collect();
    }
    out
}

/// Parses one `--level control=v1,v2` argument.
pub fn parse_level(text: &str) -> std::result::Result<(Control, Vec<f64>), ModelError> {
    let bad = |m: String| ModelError::InvalidConfig(m);
    let (key, values) = text
        .split_once('=')
        .ok_or_else(|| bad(format!("level `{text}`: expected `control=v1,v2,...`")))?;
    let c = Control::from_key(key.trim())
        .ok_or_else(|| bad(format!("unknown control `{}`", key.trim())))?;
    let values = values
        .split(',')
        .map(|v| {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("level `{v}` is not a number")))?;
            c.param().check(x)?;
            Ok(x)
        })
        .collect::<std::result::Result<Vec<f64>, ModelError>>()?;
    if values.is_empty() {
        return Err(bad(format!("no levels for `{key}`")));
    }
    Ok((c, values))
}

fn strategy(
    inputs: &Inputs,
    tag: &str,
    levels: &[String],
    horizon: f64,
    samples: usize,
    i: &Integration,
) -> Result<RunOutput> {
    let tag = Strategy::parse(tag)?;
    let runs = if levels.is_empty() {
        default_levels(tag)
    } else {
        let parsed = levels
            .iter()
            .map(|l| parse_level(l))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for (c, _) in &parsed {
            if !tag.varied().contains(c) {
                return Err(ModelError::InvalidConfig(format!(
                    "strategy {} does not vary `{}`",
                    tag.as_str(),
                    c.key()
                ))
                .into());
            }
        }
        grid(&parsed)
    };
    let opts = StrategyOptions {
        horizon,
        init: inputs.init.unwrap_or_else(State::strategy_initial),
        tol: tolerances(i),
        samples,
    };
    let controls = tag.varied();
    let mut header: Vec<&str> = vec!["run"];
    header.extend(controls.iter().map(|c| c.key()));
    header.extend([
        "cumulative_infections",
        "peak_infected_humans",
        "final_infected_humans",
        "final_infected_vectors",
        "final_eggs",
        "final_larvae",
    ]);
    let mut summary = Table::new(&header);
    let mut files = Vec::new();
    let mut series = Vec::new();
    let mut report = String::new();
    for (k, l) in runs.iter().enumerate() {
        let (tr, s) = run_strategy(tag, &inputs.config.params, l, &opts)?;
        let mut row = vec![k.to_string()];
        row.extend(controls.iter().map(|&c| num(l.get(c))));
        row.extend(
            [
                s.cumulative_infections,
                s.peak_infected_humans,
                s.final_infected_humans,
                s.final_infected_vectors,
                s.final_eggs,
                s.final_larvae,
            ]
            .map(num),
        );
        summary.push(row);
        let label = controls
            .iter()
            .map(|&c| format!("{}={}", c.key(), l.get(c)))
            .collect::<Vec<_>>()
            .join(" ");
        report.push_str(&format!(
            "run {k} ({label}): cumulative infections {:.6e}\n",
            s.cumulative_infections
        ));
        series.push(Series {
            label,
            points: tr.times.iter().copied().zip(tr.infected_humans()).collect(),
            dashed: false,
            color: svg::color(k),
        });
        files.push(OutputFile::csv(
            format!("strategy_{}_run{k}.csv", tag.as_str()),
            &trajectory_table(&tr),
        )?);
    }
    files.insert(
        0,
        OutputFile::csv(format!("strategy_{}_summary.csv", tag.as_str()), &summary)?,
    );
    if i.svg {
        files.push(OutputFile::text(
            format!("strategy_{}.svg", tag.as_str()),
            svg::line_plot(
                &format!("Strategy {}", tag.as_str()),
                "t (days)",
                "infected humans",
                &series,
            ),
        ));
    }
    Ok(RunOutput { files, report })
}

fn sensitivity_local(inputs: &Inputs, svg: bool) -> Result<RunOutput> {
    let t = local_indices(&inputs.config.params)?;
    let mut table = Table::new(&["parameter", "index"]);
    let ranked = t.ranked();
    for r in &ranked {
        table.push(vec![r.param.key().to_string(), num(r.index)]);
    }
    let mut files = vec![OutputFile::csv("local.csv", &table)?];
    if svg {
        let entries: Vec<(String, f64)> = ranked
            .iter()
            .map(|r| (r.param.key().to_string(), r.index))
            .collect();
        files.push(OutputFile::text(
            "local.svg",
            svg::tornado("Local sensitivity of R0", "index", &entries),
        ));
    }
    let report = format!(
        "R0 = {:.6e}; largest index: {}\n",
        t.r0,
        ranked[0].param.key()
    );
    Ok(RunOutput { files, report })
}

fn sensitivity_global(inputs: &Inputs, n: usize, seed: u64, svg: bool) -> Result<RunOutput> {
    let p = &inputs.config.params;
    let cfg = match &inputs.ranges {
        Some(ranges) => LhsConfig {
            n,
            seed,
            ranges: ranges.clone(),
        },
        None => LhsConfig::with_defaults(p, n, seed),
    };
    let rep = global_analysis(p, &cfg)?;
    let mut table = Table::new(&["parameter", "prcc"]);
    let ranked = rep.ranked();
    for (id, c) in &ranked {
        table.push(vec![id.key().to_string(), c.map(num).unwrap_or_default()]);
    }
    let mut stats = Table::new(&["quantity", "value"]);
    stats.push(vec!["mean".into(), num(rep.mean)]);
    stats.push(vec!["std".into(), num(rep.std)]);
    stats.push(vec!["p_gt_1".into(), num(rep.p_gt_1)]);
    let mut files = vec![
        OutputFile::csv("global.csv", &table)?,
        OutputFile::csv("global_stats.csv", &stats)?,
    ];
    if svg {
        let entries: Vec<(String, f64)> = ranked
            .iter()
            .filter_map(|(id, c)| c.map(|c| (id.key().to_string(), c)))
            .collect();
        files.push(OutputFile::text(
            "global.svg",
            svg::tornado("Partial rank correlation with R0", "PRCC", &entries),
        ));
        files.push(OutputFile::text(
            "global_r0.svg",
            svg::histogram("Sampled R0", "R0", &rep.r0, 40),
        ));
    }
    let report = format!(
        "n = {n}, seed = {seed}: mean R0 {:.4}, std {:.4}, P(R0 > 1) {:.4}\n",
        rep.mean, rep.std, rep.p_gt_1
    );
    Ok(RunOutput { files, report })
}

fn self_check() -> Result<RunOutput> {
    let results = selfcheck::run_all();
    let mut report = String::new();
    for r in &results {
        report.push_str(&format!(
            "{} {:>2} {}\n",
            if r.passed() { "PASS" } else { "FAIL" },
            r.id,
            r.name
        ));
    }
    Ok(RunOutput {
        files: vec![
            OutputFile::csv("selfcheck.csv", &selfcheck::results_table(&results))?,
            OutputFile::csv("selfcheck_summary.csv", &selfcheck::summary_table(&results))?,
        ],
        report,
    })
}
