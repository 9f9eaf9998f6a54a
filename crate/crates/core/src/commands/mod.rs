//! The `kdac-kit` subcommands. Each takes a resolved [`RunConfig`], writes
//! its outputs with the effective configuration echoed as a `#` header, and
//! returns a report the caller can inspect.

pub mod bench;
pub mod config;
pub mod curves;
pub mod gradcheck;
pub mod timing;

pub use config::{parse_config, Command, Overrides, RunConfig};

use std::path::Path;

use crate::error::Result;

/// Writes `contents` to `path`, creating parent directories.
pub(crate) fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Runs `command` with an optional config file and flag overrides, writing
/// a human-readable summary to `stdout` (timings to `stderr`). Returns the
/// process exit status; configuration problems surface as `Err` with
/// [`crate::Error::exit_code`] 2.
pub fn execute(
    command: Command,
    config_path: Option<&Path>,
    flags: &Overrides,
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
) -> Result<i32> {
    let cfg = parse_config(command, config_path, flags)?;
    match command {
        Command::Gradcheck => {
            let report = gradcheck::run_gradcheck(&cfg)?;
            if cfg.out.is_none() {
                stdout.write_all(report.render(&cfg).as_bytes())?;
            }
            for c in report.failures() {
                writeln!(
                    stderr,
                    "FAIL {}/{}: worst {} > tolerance {}",
                    c.family, c.name, c.worst, c.tolerance
                )?;
            }
            writeln!(
                stdout,
                "{} checks in {} families, {} failed",
                report.checks.len(),
                report.families().len(),
                report.failures().count()
            )?;
            Ok(report.exit_code())
        }
        Command::Curves => {
            for c in curves::run_curves(&cfg)? {
                match &c.path {
                    Some(p) => writeln!(stdout, "wrote {}", p.display())?,
                    None => stdout.write_all(c.render(&cfg).as_bytes())?,
                }
            }
            Ok(0)
        }
        Command::Bench => {
            let report = bench::run_bench(&cfg)?;
            if report.files.is_empty() {
                stdout.write_all(report.to_table(&cfg).as_bytes())?;
            }
            for p in &report.files {
                writeln!(stdout, "wrote {}", p.display())?;
            }
            for row in &report.rows {
                writeln!(stderr, "{}: {:.3} s", row.activation.tag(), row.wall_time.as_secs_f64())?;
            }
            Ok(0)
        }
        Command::Timing => {
            let report = timing::run_timing(&cfg)?;
            if cfg.out.is_none() {
                stdout.write_all(report.render(&cfg).as_bytes())?;
            } else if let Some(r) = report.kdac_relu_ratio() {
                writeln!(stdout, "kdac/relu median ratio {r:.3}")?;
            }
            Ok(0)
        }
    }
}
