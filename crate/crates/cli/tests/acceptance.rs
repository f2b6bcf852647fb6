//! Acceptance suite: runs every reference check at its stated tolerance and
//! prints one PASS or FAIL line per criterion, followed by the measured
//! values. Exits nonzero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use arbodyn_cli::selfcheck::{self, CheckResult};

fn print(r: &CheckResult) {
    println!(
        "{} {:>2} {} ({:.2} s)",
        if r.passed() { "PASS" } else { "FAIL" },
        r.id,
        r.name,
        r.elapsed.as_secs_f64()
    );
    if let Some(limit) = r.time_limit {
        if !r.within_time() {
            println!("       over the time limit of {} s", limit.as_secs_f64());
        }
    }
    for m in &r.measurements {
        println!(
            "       [{}] {}: {:.6e} (target {:.6e}, tolerance {:.1e})",
            if m.pass { "ok" } else { "x" },
            m.quantity,
            m.value,
            m.target,
            m.tolerance
        );
    }
    for n in &r.notes {
        println!("       note: {n}");
    }
}

fn selfcheck_outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_arbodyn"))
        .arg("selfcheck")
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| format!("cannot run selfcheck: {e}"))?;
    if !status.status.success() {
        return Err(format!(
            "selfcheck exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.map_err(|e| e.to_string())?;
            let bytes = std::fs::read(e.path()).map_err(|e| e.to_string())?;
            Ok((e.file_name().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> bool {
    let base = std::env::temp_dir().join(format!("arbodyn-acceptance-{}", std::process::id()));
    let (a, b) = (base.join("first"), base.join("second"));
    let outcome = selfcheck_outputs(&a).and_then(|x| Ok((x, selfcheck_outputs(&b)?)));
    let _ = std::fs::remove_dir_all(&base);
    match outcome {
        Ok((x, y)) => {
            let names: Vec<&str> = x.iter().map(|f| f.0.as_str()).collect();
            let same = x == y
                && names.iter().any(|n| n.ends_with(".csv"))
                && names.iter().any(|n| n.ends_with("manifest.txt"));
            println!("{} 10 determinism", if same { "PASS" } else { "FAIL" });
            println!("       files compared: {}", names.join(", "));
            for ((n, p), (_, q)) in x.iter().zip(&y) {
                if p != q {
                    println!("       [x] {n} differs between runs");
                }
            }
            same
        }
        Err(e) => {
            println!("FAIL 10 determinism");
            println!("       {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    for &(id, _, _) in selfcheck::CHECKS.iter() {
        let r = selfcheck::run_check(id).expect("listed check");
        print(&r);
        if !r.passed() {
            failed += 1;
        }
    }
    if !determinism() {
        failed += 1;
    }
    println!("\n{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
