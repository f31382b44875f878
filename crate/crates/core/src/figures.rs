//! Data series for the elaborateness-vs-`q` and key-variables-vs-`r` plots.

use serde::{Deserialize, Serialize};

use crate::baseline::{report_stats, solve_baseline, ModelParams};
use crate::dist::XDist;
use crate::error::Result;

/// A named numeric table, one row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Elaborateness against `q` on 21 points, `r = 0.5`, `r0 = 1`, `x ~ Normal(1, 1/2)`.
pub fn fig3(beta: f64, tol: f64) -> Result<Table> {
    let d = XDist::normal(1.0, 0.5)?;
    let mut rows = Vec::new();
    for q in linspace(0.0, 1.0, 21) {
        let p = ModelParams::new(1.0, beta, q, 0.5, 1.0, d)?;
        let eq = solve_baseline(&p, tol)?;
        rows.push(vec![
            q,
            eq.x_low,
            eq.x_high,
            report_stats(&p, &eq).elaborateness,
        ]);
    }
    Ok(Table {
        name: String::new(),
        title: format!("elaborateness vs q, beta={beta}, r0=1, r=0.5, mu0=1, sigma_x=0.5"),
        columns: strings(&["q", "x_low", "x_high", "elaborateness"]),
        rows,
    })
}

/// `r` from 0.05 to 3 in steps of 0.05, without `r = r0 = 1`.
pub fn fig4_r_grid() -> Vec<f64> {
    (1..=60)
        .filter(|&i| i != 20)
        .map(|i| i as f64 * 0.05)
        .collect()
}

/// Thresholds, firm values at the thresholds and the non-disclosure price
/// against `r`, at `β = 0.7`, `q = 0.8`, `r0 = μ0 = 1`.
pub fn fig4(sigma: f64, tol: f64) -> Result<Table> {
    let d = XDist::normal(1.0, sigma)?;
    let mut rows = Vec::new();
    for r in fig4_r_grid() {
        let p = ModelParams::new(1.0, 0.7, 0.8, r, 1.0, d)?;
        let eq = solve_baseline(&p, tol)?;
        rows.push(vec![
            r,
            eq.x_low,
            eq.x_high,
            r * eq.x_low,
            r * eq.x_high,
            r * eq.mu_nd,
        ]);
    }
    Ok(Table {
        name: String::new(),
        title: format!("key variables vs r, beta=0.7, q=0.8, r0=1, mu0=1, sigma_x={sigma}"),
        columns: strings(&[
            "r",
            "x_low",
            "x_high",
            "value_low",
            "value_high",
            "nd_price",
        ]),
        rows,
    })
}

fn select(t: &Table, name: &str, title: &str, cols: &[&str]) -> Table {
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| t.columns.iter().position(|x| x == c).unwrap())
        .collect();
    Table {
        name: name.to_string(),
        title: format!("{title}; {}", t.title),
        columns: strings(cols),
        rows: t
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect(),
    }
}

/// The six panels: `fig3a`, `fig3b`, `fig4a` to `fig4d`.
pub fn all_figures(tol: f64) -> Result<Vec<Table>> {
    let mut a = fig3(0.5, tol)?;
    a.name = "fig3a".into();
    let mut b = fig3(0.7, tol)?;
    b.name = "fig3b".into();
    let narrow = fig4(0.5, tol)?;
    let wide = fig4(20.0, tol)?;
    Ok(vec![
        a,
        b,
        select(
            &narrow,
            "fig4a",
            "disclosure thresholds",
            &["r", "x_low", "x_high"],
        ),
        select(
            &narrow,
            "fig4b",
            "firm value at the thresholds",
            &["r", "value_low", "value_high"],
        ),
        select(&narrow, "fig4c", "non-disclosure price", &["r", "nd_price"]),
        select(&wide, "fig4d", "non-disclosure price", &["r", "nd_price"]),
    ])
}
