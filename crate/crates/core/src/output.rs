//! Trace CSV and run summary serialization.
//!
//! Reals are printed with 17 significant digits, so two runs produce
//! byte-identical files exactly when their states agree bit for bit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sampler::{Algorithm, ChainRecord};

/// Round-trip-exact rendering of an `f64`.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_owned() } else { "-inf".to_owned() }
    } else {
        format!("{v:.16e}")
    }
}

/// Writes `step,accepted,x_1..x_n,d_1..d_m,log_pi_joint,log_q`, one row per
/// step starting at 1. The initial state is not written.
pub fn write_trace_csv<W: Write>(record: &ChainRecord, mut w: W) -> Result<()> {
    let n = record.initial.x.len();
    let m = record.initial.d.len();
    let mut header = vec!["step".to_owned(), "accepted".to_owned()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=m).map(|i| format!("d_{i}")));
    header.push("log_pi_joint".to_owned());
    header.push("log_q".to_owned());
    writeln!(w, "{}", header.join(","))?;

    let mut line = String::new();
    for (s, acc) in record.states.iter().zip(&record.accept_flags) {
        line.clear();
        line.push_str(&s.step_index.to_string());
        line.push(',');
        line.push(if *acc { '1' } else { '0' });
        for v in s.x.iter().chain(s.d.iter()) {
            line.push(',');
            line.push_str(&fmt_real(*v));
        }
        line.push(',');
        line.push_str(&fmt_real(s.log_pi_joint));
        line.push(',');
        line.push_str(&fmt_real(s.log_q));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub acceptance_rate: f64,
    pub n_steps: usize,
    pub n_accepted: usize,
    pub n_optfail: usize,
    pub seed: u64,
    /// `None` for the one-dimensional legacy sampler.
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
    pub jacobian_mode: String,
    pub algorithm: Algorithm,
    pub wall_seconds: f64,
    pub config: serde_json::Value,
}

impl RunSummary {
    pub fn from_record(record: &ChainRecord, wall_seconds: f64, config: serde_json::Value) -> Self {
        let c = &record.config;
        let augmented = c.algorithm == Algorithm::Augmented;
        Self {
            acceptance_rate: record.acceptance_rate(),
            n_steps: c.n_steps,
            n_accepted: record.n_accepted,
            n_optfail: record.n_optfail,
            seed: record.seed,
            rho: augmented.then_some(c.rho),
            gamma: augmented.then_some(c.gamma),
            jacobian_mode: if augmented { c.jacobian_mode.as_str().to_owned() } else { "marginal".to_owned() },
            algorithm: c.algorithm,
            wall_seconds,
            config,
        }
    }
}

pub fn write_summary_json<W: Write>(summary: &RunSummary, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, summary).map_err(|e| crate::error::Error::Io(e.to_string()))
}
