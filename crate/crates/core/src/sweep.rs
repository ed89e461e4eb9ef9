// SPDX-License-Identifier: Apache-2.0

//! Precision against probe number: bound, Heisenberg and classical lines.

use rayon::prelude::*;
use serde::Serialize;

use crate::ce::ce_sdp_bound;
use crate::channel::{Channel, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::qfi::{crlb, optimize_input_with, OracleOptions};

pub const CSV_HEADER: &str = "n,dphi_bound_ce,dphi_heisenberg,dphi_classical,dphi_oracle";

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub n_max: usize,
    /// Largest `N` for the oracle column; 0 disables it.
    pub oracle_max_n: usize,
    pub restarts: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_max: 100,
            oracle_max_n: 0,
            restarts: 8,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// `NaN` when no bound with `1/√N` scaling is certified.
    pub dphi_bound_ce: f64,
    pub dphi_heisenberg: f64,
    pub dphi_classical: f64,
    pub dphi_oracle: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub bound_const: Option<f64>,
    pub single_probe_qfi: f64,
    pub rows: Vec<SweepRow>,
    /// First `N` with `bound_const/√N` strictly above `1/N`.
    pub crossover: Option<usize>,
    pub notices: Vec<String>,
}

pub fn sweep(ch: &Channel, opts: &SweepOptions) -> Result<Sweep> {
    if opts.n_max == 0 {
        return Err(Error::Input("n-max must be at least 1".into()));
    }
    let oracle_opts = OracleOptions {
        restarts: opts.restarts.max(1),
        seed: opts.seed,
        budget: opts.budget,
        ..OracleOptions::default()
    };
    let ce = ce_sdp_bound(ch)?;
    let bound_const = ce.bound_const.filter(|c| c.is_finite());
    let single = optimize_input_with(ch, 1, &oracle_opts)?.best_qfi;

    let oracle_ns: Vec<usize> = (1..=opts.n_max.min(opts.oracle_max_n)).collect();
    let oracle: Vec<(usize, Result<f64>)> = oracle_ns
        .par_iter()
        .map(|&n| (n, optimize_input_with(ch, n, &oracle_opts).map(|r| r.delta_phi)))
        .collect();
    let mut notices = Vec::new();
    let mut oracle_values = vec![None; opts.n_max + 1];
    for (n, r) in oracle {
        match r {
            Ok(v) => oracle_values[n] = Some(v),
            Err(Error::Budget { required, limit }) => notices.push(format!(
                "oracle skipped for N = {n}: needs {required} entries, budget {limit}"
            )),
            Err(e) => return Err(e),
        }
    }

    let rows: Vec<SweepRow> = (1..=opts.n_max)
        .map(|n| {
            let nf = n as f64;
            SweepRow {
                n,
                dphi_bound_ce: bound_const.map_or(f64::NAN, |c| c / nf.sqrt()),
                dphi_heisenberg: 1.0 / nf,
                dphi_classical: crlb(nf * single, 1),
                dphi_oracle: oracle_values[n],
            }
        })
        .collect();
    // Exact ties (N = 1/const²) are not crossings; rounding must not make them one.
    let crossover = rows
        .iter()
        .find(|r| r.dphi_bound_ce > r.dphi_heisenberg * (1.0 + 1e-12))
        .map(|r| r.n);
    Ok(Sweep {
        bound_const,
        single_probe_qfi: single,
        rows,
        crossover,
        notices,
    })
}

impl Sweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                format_float(r.dphi_bound_ce),
                format_float(r.dphi_heisenberg),
                format_float(r.dphi_classical),
                r.dphi_oracle.map(format_float).unwrap_or_default(),
            ));
        }
        out
    }
}

/// Twelve significant digits, shortest of fixed or exponent notation,
/// trailing zeros removed (C's `%.12g`).
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const P: i32 = 12;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build, ModelName, ModelSpec};

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(0.75), "0.75");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(2f64.sqrt()), "1.41421356237");
        assert_eq!(format_float(1.5e-5), "1.5e-05");
        assert_eq!(format_float(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_float(100.0), "100");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(-0.0001), "-0.0001");
    }

    #[test]
    fn dephasing_bound_column() {
        let ch = build(&ModelSpec::new(ModelName::Dephasing, 0.8).unwrap(), 0.0).unwrap();
        let s = sweep(
            &ch,
            &SweepOptions {
                n_max: 100,
                restarts: 2,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        for r in &s.rows {
            assert!((r.dphi_bound_ce - 0.75 / (r.n as f64).sqrt()).abs() < 1e-8);
        }
        // 0.75/√N > 1/N first at N = 2.
        assert_eq!(s.crossover, Some(2));
        assert!(s.to_csv().starts_with(CSV_HEADER));
        assert_eq!(s.to_csv().lines().count(), 101);
    }
}
