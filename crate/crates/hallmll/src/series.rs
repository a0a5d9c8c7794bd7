//! Time series and global balance records shared by the solvers and the
//! CLI layer.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Trapezoid rule over sampled rates: `cum[i] = integral of d up to t[i]`.
pub fn cumulative_trapezoid(times: &[f64], rates: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), rates.len());
    let mut cum = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            acc += (times[i] - times[i - 1]) * 0.5 * (rates[i] + rates[i - 1]);
        }
        cum.push(acc);
    }
    cum
}

/// A global balance record: conserved-with-dissipation quantity `value`
/// (an energy or a helicity), its dissipation rate, the running time
/// integral of the rate, and the residual
/// `value(t) + cum_dissipation(t) - value(0)`.
#[derive(Clone, Debug)]
pub struct BalanceSeries {
    pub law: String,
    pub times: Vec<f64>,
    pub value: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub cum_dissipation: Vec<f64>,
    pub residual: Vec<f64>,
}

impl BalanceSeries {
    pub fn from_rates(
        law: impl Into<String>,
        times: Vec<f64>,
        value: Vec<f64>,
        dissipation: Vec<f64>,
    ) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "balance report needs at least 2 samples, got {}",
                times.len()
            )));
        }
        let cum = cumulative_trapezoid(&times, &dissipation);
        let residual: Vec<f64> = value
            .iter()
            .zip(&cum)
            .map(|(v, c)| v + c - value[0])
            .collect();
        Ok(Self {
            law: law.into(),
            times,
            value,
            dissipation,
            cum_dissipation: cum,
            residual,
        })
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual.last().unwrap()
    }

    /// CSV rows `t,<value>,D,cumD,residual` with shortest round-trip float
    /// formatting. `value_column` names the second column (`E` or `H`).
    pub fn to_csv(&self, value_column: &str, header_comment: &str) -> String {
        let mut out = String::new();
        if !header_comment.is_empty() {
            let _ = writeln!(out, "# {header_comment}");
        }
        let _ = writeln!(out, "t,{value_column},D,cumD,residual");
        for i in 0..self.times.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.times[i],
                self.value[i],
                self.dissipation[i],
                self.cum_dissipation[i],
                self.residual[i]
            );
        }
        out
    }
}

/// Least-squares slope of `ln(value)` against `ln(x)`, with its R^2.
/// Returns `None` when any value is too small to take a log of (the
/// all-zero ladder of an exactly conserved quantity).
pub fn log_log_slope(xs: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != values.len() || xs.len() < 2 {
        return None;
    }
    if values.iter().any(|&v| v.abs() < 1e-300) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}
