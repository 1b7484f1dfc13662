//! CSV and JSON emission.
//!
//! Every real number printed to CSV uses 17-significant-digit scientific
//! notation, which round-trips to the identical f64 bit pattern on parse.

use std::io::Write;
use std::path::Path;

use taustep_core::mc::RiskTable;

use crate::error::{Result, io_err};

/// Full round-trip decimal formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const RISK_TABLE_HEADER: &str = "theta,tau,mse_tau_mle,se_tau_mle,mse_tau_bayes,se_tau_bayes,\
mse_l_mle,se_l_mle,mse_l_bayes,se_l_bayes,kappa,kappa_tilde";

/// Renders the risk table in the fixed column order.
pub fn risk_table_csv(table: &RiskTable) -> String {
    let mut out = String::with_capacity(64 + table.cells.len() * 220);
    out.push_str(RISK_TABLE_HEADER);
    out.push('\n');
    for cell in &table.cells {
        let fields = [
            fmt_f64(cell.theta),
            cell.tau.to_string(),
            fmt_f64(cell.mse_tau_mle),
            fmt_f64(cell.se_tau_mle),
            fmt_f64(cell.mse_tau_bayes),
            fmt_f64(cell.se_tau_bayes),
            fmt_f64(cell.mse_l_mle),
            fmt_f64(cell.se_l_mle),
            fmt_f64(cell.mse_l_bayes),
            fmt_f64(cell.se_l_bayes),
            fmt_f64(cell.kappa),
            fmt_f64(cell.kappa_tilde),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes to the path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(io_err(format!("writing {}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(io_err("writing to stdout"))
        }
    }
}
