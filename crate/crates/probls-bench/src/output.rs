//! Trace/summary/aggregate writers. All files are written atomically
//! (temp file in the target directory, then rename).

use std::path::Path;

use probls::driver::RunTrace;
use serde::Serialize;

use crate::CliError;

pub const TRACE_HEADER: &str =
    "step,loss,t_accepted,step_size,evals,sigma_f,sigma_df,p_wolfe,forced";

pub fn atomic_write(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.step,
            r.loss,
            r.t_accepted,
            r.step_size,
            r.evals,
            r.sigma_f,
            r.sigma_df,
            r.p_wolfe,
            r.forced
        ));
    }
    out
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<(), CliError> {
    atomic_write(path, &trace_csv(trace))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    atomic_write(path, &(text + "\n"))
}

/// Mean and twice the (population) standard deviation of a sample.
pub fn mean_and_2sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, 2.0 * var.sqrt())
}
