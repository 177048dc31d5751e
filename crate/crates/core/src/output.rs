//! CSV and plot-data files, and the `fit`, `table` and `plotdata` commands.
//!
//! All floats are written with 17 significant digits so output is byte-stable
//! and parses back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{run_scenario, run_table, Scenario, TableRow};
use crate::network::format_f64;
use crate::refine::{RefinementTrace, TraceRow};

pub const TRACE_HEADER: &str =
    "iteration,eval_x,target,classical_output,quantum_output,classical_error,quantum_error,accepted";
pub const TABLE_HEADER: &str = "function,noise_percent,seed,initial_error,final_error";

pub fn trace_to_csv(trace: &RefinementTrace) -> String {
    let mut out = String::with_capacity(64 + trace.len() * 160);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        let fields = [
            r.iteration.to_string(),
            format_f64(r.eval_x),
            format_f64(r.target),
            format_f64(r.classical_output),
            format_f64(r.quantum_output),
            format_f64(r.classical_error),
            format_f64(r.quantum_error),
            u8::from(r.accepted).to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parses a trace written by [`trace_to_csv`]. Errors carry 1-based line numbers.
pub fn trace_from_csv(text: &str) -> Result<RefinementTrace> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TRACE_HEADER => {}
        Some(_) => return Err(Error::parse(1, "unexpected trace header")),
        None => return Err(Error::parse(1, "empty trace file")),
    }

    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                line_no,
                format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let num = |idx: usize, name: &str| -> Result<f64> {
            fields[idx]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(line_no, format!("bad {name} {:?}: {e}", fields[idx])))
        };
        let iteration = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::parse(line_no, format!("bad iteration {:?}: {e}", fields[0])))?;
        let accepted = match fields[7].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    line_no,
                    format!("bad accepted flag {other:?}"),
                ));
            }
        };
        rows.push(TraceRow {
            iteration,
            eval_x: num(1, "eval_x")?,
            target: num(2, "target")?,
            classical_output: num(3, "classical_output")?,
            quantum_output: num(4, "quantum_output")?,
            classical_error: num(5, "classical_error")?,
            quantum_error: num(6, "quantum_error")?,
            accepted,
        });
    }
    Ok(RefinementTrace { rows })
}

pub fn table_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let seed = r.seed.map_or_else(|| "mean".to_string(), |s| s.to_string());
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.function,
            format_f64(r.noise_percent),
            seed,
            format_f64(r.initial_error),
            format_f64(r.final_error)
        ));
    }
    out
}

/// `x target classical quantum` per row.
pub fn outputs_dat(trace: &RefinementTrace) -> String {
    let mut out = String::from("# x target classical quantum\n");
    for r in &trace.rows {
        out.push_str(&format!(
            "{} {} {} {}\n",
            format_f64(r.eval_x),
            format_f64(r.target),
            format_f64(r.classical_output),
            format_f64(r.quantum_output)
        ));
    }
    out
}

/// `iteration classical_error quantum_error` per row.
pub fn errors_dat(trace: &RefinementTrace) -> String {
    let mut out = String::from("# iteration classical_error quantum_error\n");
    for r in &trace.rows {
        out.push_str(&format!(
            "{} {} {}\n",
            r.iteration,
            format_f64(r.classical_error),
            format_f64(r.quantum_error)
        ));
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create output directory {}: {e}", dir.display()),
        ))
    })
}

pub fn scenario_from_config(config: &RunConfig) -> Scenario {
    Scenario {
        function: config.function,
        noise_percent: config.noise_percent,
        seed: config.seed,
        schedule: config.schedule,
        bounds: config.bounds,
        grid_size: config.grid_size,
    }
}

/// Runs one scenario; writes `trace.csv` and `network.txt` (the refined network).
pub fn cmd_fit(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let result = run_scenario(&scenario_from_config(config))?;
    ensure_dir(&config.output_dir)?;
    Ok(vec![
        write_file(
            &config.output_dir,
            "trace.csv",
            &trace_to_csv(&result.trace),
        )?,
        write_file(&config.output_dir, "network.txt", &result.refined.to_text())?,
    ])
}

/// Runs the (function x noise level x seed) sweep; writes `table.csv`.
pub fn cmd_table(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let rows = run_table(&config.seeds, &config.table_config())?;
    ensure_dir(&config.output_dir)?;
    Ok(vec![write_file(
        &config.output_dir,
        "table.csv",
        &table_to_csv(&rows),
    )?])
}

/// Converts a trace CSV into `outputs.dat` and `errors.dat`.
pub fn cmd_plotdata(trace_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(trace_path)?;
    let trace = trace_from_csv(&text)?;
    ensure_dir(out_dir)?;
    Ok(vec![
        write_file(out_dir, "outputs.dat", &outputs_dat(&trace))?,
        write_file(out_dir, "errors.dat", &errors_dat(&trace))?,
    ])
}
