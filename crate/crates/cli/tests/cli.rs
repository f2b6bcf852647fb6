use std::fs;
use std::path::Path;
use std::process::Command;

use arbodyn::ode::Tolerances;
use arbodyn::sim::{integrate, uniform_times, PulseSchedule};
use arbodyn::thresholds::ThresholdReport;
use arbodyn::{ModelParams, ModelVariant, State};
use arbodyn_cli::output::Table;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> String {
    let mut argv = vec!["arbodyn".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(dir.to_string_lossy().into_owned());
    arbodyn_cli::run(&argv).unwrap_or_else(|e| panic!("{args:?}: {e}"))
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_arbodyn"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn table(dir: &Path, name: &str) -> Table {
    Table::from_csv(&read(dir, name)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Runs a command, replays its manifest into a fresh directory and checks
/// that every file, the manifest included, comes out byte-identical.
fn assert_replays(args: &[&str], manifest: &str) {
    let inputs = TempDir::new().unwrap();
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix("@") {
            Some(spec) => {
                let (name, text) = spec.split_once(':').unwrap();
                write(inputs.path(), name, &text.replace(';', "\n"))
            }
            None => a.to_string(),
        })
        .collect();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(first.path(), &refs);
    // The inputs are gone; the manifest alone must be enough.
    drop(inputs);
    let m = first.path().join(manifest).to_string_lossy().into_owned();
    run(second.path(), &["replay", &m]);
    let mut names: Vec<_> = fs::read_dir(first.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 2);
    for n in names {
        let n = n.to_string_lossy();
        assert_eq!(read(first.path(), &n), read(second.path(), &n), "{n}");
    }
}

#[test]
fn thresholds_follow_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p.txt", "# override\nbeta_hv = 0.0105\n");
    let report = run(dir.path(), &["thresholds", "--config", &cfg]);
    assert!(report.starts_with("name,value,applicable\n"));
    let t = table(dir.path(), "thresholds.csv");
    let want =
        ThresholdReport::compute(&ModelParams::baseline().with(arbodyn::ParamId::BetaHv, 0.0105))
            .unwrap();
    let r0: f64 = t.rows.iter().find(|r| r[0] == "R0").unwrap()[1]
        .parse()
        .unwrap();
    assert_eq!(r0, want.r0);
    let manifest = String::from_utf8(read(dir.path(), "thresholds_manifest.txt")).unwrap();
    assert!(manifest.contains("param.beta_hv = 1.05e-2\n"));
    assert!(!manifest.contains("p.txt"));
}

#[test]
fn trajectory_csv_round_trips_bitwise() {
    let dir = TempDir::new().unwrap();
    run(
        dir.path(),
        &["simulate", "--horizon", "30", "--samples", "7"],
    );
    let t = table(dir.path(), "trajectory.csv");
    let p = ModelParams::baseline();
    let tr = integrate(
        &p,
        ModelVariant::FULL,
        &State::strategy_initial(),
        (0.0, 30.0),
        &PulseSchedule::empty(),
        &Tolerances::default(),
        &uniform_times(0.0, 30.0, 7),
    )
    .unwrap();
    let s_h = t.column("S_h").unwrap();
    let want: Vec<f64> = tr.states.iter().map(|s| s.y[0]).collect();
    assert_eq!(s_h, want);
    assert_eq!(
        t.column("cumulative_infections").unwrap(),
        tr.cumulative_infections
    );
}

#[test]
fn bifurcation_svg_dashes_unstable_branches() {
    let dir = TempDir::new().unwrap();
    let cfg_text = "Lambda_h = 10\nepsilon = 1\nbeta_vh = 0.8\neta_h = 1\neta_v = 1\nsigma = 0.01428\ndelta = 1\nalpha_1 = 0.001\nalpha_2 = 1\nc_m = 0.0001\nGamma_E = 1e5\nGamma_L = 5e4\n";
    let cfg = write(dir.path(), "back.txt", cfg_text);
    run(
        dir.path(),
        &[
            "bifurcation",
            "--config",
            &cfg,
            "--hi",
            "0.2",
            "--n",
            "41",
            "--svg",
        ],
    );
    let svg = String::from_utf8(read(dir.path(), "bifurcation.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.contains("endemic 1 unstable"));
    let summary = table(dir.path(), "bifurcation_summary.csv");
    let direction = summary.rows.iter().find(|r| r[0] == "direction").unwrap();
    assert_eq!(direction[1], "backward");
    let t = table(dir.path(), "bifurcation.csv");
    assert_eq!(t.header[0], "beta_hv");
}

#[test]
fn equilibria_without_vectors_lists_only_the_trivial_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p.txt", "mu_b = 0.001\n");
    let report = run(dir.path(), &["equilibria", "--config", &cfg]);
    assert!(report.contains("no vector population"));
    let t = table(dir.path(), "equilibria.csv");
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0][1], "trivial");
}

#[test]
fn strategy_grid_covers_the_product_of_levels() {
    let dir = TempDir::new().unwrap();
    run(
        dir.path(),
        &[
            "strategy",
            "--tag",
            "E",
            "--level",
            "alpha_1=0,0.5",
            "--level",
            "c_m=0,0.2,0.4",
            "--horizon",
            "50",
            "--samples",
            "11",
        ],
    );
    let t = table(dir.path(), "strategy_E_summary.csv");
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.header[1..3], ["alpha_1", "c_m"]);
    assert!(dir.path().join("strategy_E_run5.csv").exists());
}

#[test]
fn every_command_replays_exactly() {
    assert_replays(
        &[
            "thresholds",
            "--config",
            "@p.txt:beta_hv = 0.2;variant = mass-action",
        ],
        "thresholds_manifest.txt",
    );
    assert_replays(&["equilibria"], "equilibria_manifest.txt");
    assert_replays(
        &[
            "bifurcation",
            "--param",
            "a",
            "--lo",
            "0.1",
            "--hi",
            "2",
            "--n",
            "9",
            "--svg",
        ],
        "bifurcation_manifest.txt",
    );
    assert_replays(
        &[
            "simulate",
            "--horizon",
            "40",
            "--samples",
            "9",
            "--svg",
            "--config",
            "@p.txt:pulse = c_m 0.2 7 1 0 20",
            "--schedule",
            "@s.txt:eta_1 0.1 15 1 0 30",
            "--init",
            "@i.txt:S_h = 900;I_v = 50",
        ],
        "simulate_manifest.txt",
    );
    assert_replays(
        &[
            "strategy",
            "--tag",
            "B",
            "--level",
            "c_m=0.1,0.3",
            "--horizon",
            "30",
            "--samples",
            "4",
        ],
        "strategy_manifest.txt",
    );
    assert_replays(
        &["sensitivity", "local", "--svg"],
        "sensitivity_local_manifest.txt",
    );
    assert_replays(
        &[
            "sensitivity",
            "global",
            "--n",
            "200",
            "--seed",
            "4",
            "--svg",
            "--ranges",
            "@r.txt:alpha_1 0 0.8;theta 0.05 0.2",
        ],
        "sensitivity_global_manifest.txt",
    );
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.txt", "a = 1\nalpha_1 = 1.5\n");
    let out = dir.path().to_string_lossy().into_owned();
    let (code, err) = exit_code(&["thresholds", "--config", &bad, "--out", &out]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2") && err.contains("alpha_1"), "{err}");

    let (code, _) = exit_code(&["simulate", "--horizon", "nope", "--out", &out]);
    assert_eq!(code, 2);

    let missing = dir.path().join("missing.txt");
    let (code, _) = exit_code(&[
        "thresholds",
        "--config",
        &missing.to_string_lossy(),
        "--out",
        &out,
    ]);
    assert_eq!(code, 1);

    // A sweep needs a persistent vector population.
    let dead = write(dir.path(), "dead.txt", "mu_b = 0.001\n");
    let (code, err) = exit_code(&["bifurcation", "--config", &dead, "--n", "3", "--out", &out]);
    assert_eq!(code, 3, "{err}");

    let (code, _) = exit_code(&["thresholds", "--out", &out]);
    assert_eq!(code, 0);
}
