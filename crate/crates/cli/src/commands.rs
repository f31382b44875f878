use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use disclosure_core::comparative::FD_STEP;
use disclosure_core::deviation::{deviation_table, ext_deviation_table, x_grid, DeviationTable};
use disclosure_core::extension::{ext_report_stats, verify_bayes_ext};
use disclosure_core::figures::all_figures;
use disclosure_core::sim::analytic_response_rate;
use disclosure_core::{
    ext_sensitivity_analytic, ext_sensitivity_fd, report_stats, sensitivity_analytic,
    sensitivity_fd, simulate, solve_baseline, solve_extension, stats_sensitivity_analytic,
    stats_sensitivity_fd, verify_bayes, Case, ExtCase, RBar, RDistribution, ReportStats, SimConfig,
    SimModel, StatsSensitivity, ThresholdSensitivity,
};

use crate::config::{Command, MethodKind, ModelKind, Param, Point, RunConfig};
use crate::output::{
    field, fmt_num, to_json, write_csv, write_human, write_table_csv, Record, Value,
};

/// Points on the `x` axis per instance in `check-deviations`.
const DEVIATION_GRID: usize = 201;
/// Largest tolerated gain of a deviation over the equilibrium action.
const DEVIATION_TOL: f64 = 1e-9;

pub fn run(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        Command::Solve => {
            single_point(cfg)?;
            let rec = solve_record(cfg, &cfg.point, true)?;
            emit(cfg, &[title(cfg, "equilibrium")], vec![rec])
        }
        Command::Sweep => {
            if cfg.grid.is_empty() {
                bail!("sweep needs at least one --grid param=min:max:steps");
            }
            let recs = over_cells(cfg, |pt| solve_record(cfg, pt, false));
            emit(cfg, &[title(cfg, "equilibrium sweep")], recs)
        }
        Command::Sensitivity => {
            let recs = map_cells(cfg, |pt| sensitivity_record(cfg, pt))?;
            emit(
                cfg,
                &[title(cfg, "threshold and report-statistic derivatives")],
                recs,
            )
        }
        Command::CheckDeviations => run_deviations(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::Figures => run_figures(cfg),
    }
}

fn single_point(cfg: &RunConfig) -> Result<()> {
    if !cfg.grid.is_empty() {
        bail!(
            "{:?} takes a single parameter point; use sweep for grids",
            cfg.command
        );
    }
    Ok(())
}

fn title(cfg: &RunConfig, what: &str) -> String {
    let model = match cfg.model {
        ModelKind::Baseline => "baseline",
        ModelKind::Extension => "firm-response extension",
    };
    format!("{what}, {model} model")
}

fn model_params(cfg: &RunConfig, pt: &Point) -> Record {
    let skip = match cfg.model {
        ModelKind::Baseline => Param::P,
        ModelKind::Extension => Param::Q,
    };
    Param::ALL
        .into_iter()
        .filter(|&p| p != skip)
        .map(|p| field(p.name(), pt.get(p)))
        .collect()
}

/// Runs `f` on every cell in parallel, keeping grid order. Failed cells
/// become rows with a status message and blank results.
fn over_cells<F>(cfg: &RunConfig, f: F) -> Vec<Record>
where
    F: Fn(&Point) -> Result<Record> + Sync,
{
    let cells = cfg.cells();
    let results: Vec<Result<Record>> = cells.par_iter().map(|pt| f(pt)).collect();
    let template: Option<Vec<String>> = results
        .iter()
        .find_map(|r| r.as_ref().ok())
        .map(|r| r.iter().map(|(k, _)| k.clone()).collect());
    cells
        .iter()
        .zip(results)
        .map(|(pt, res)| match res {
            Ok(mut rec) => {
                rec.push(field("status", "ok"));
                rec
            }
            Err(e) => {
                let mut rec = model_params(cfg, pt);
                if let Some(names) = &template {
                    for name in &names[rec.len()..] {
                        rec.push((name.clone(), Value::Num(f64::NAN)));
                    }
                }
                rec.push(field("status", format!("{e:#}")));
                rec
            }
        })
        .collect()
}

/// Like `over_cells`, but a single point (no grid) reports its error.
fn map_cells<F>(cfg: &RunConfig, f: F) -> Result<Vec<Record>>
where
    F: Fn(&Point) -> Result<Record> + Sync,
{
    if cfg.grid.is_empty() {
        Ok(vec![f(&cfg.point)?])
    } else {
        Ok(over_cells(cfg, f))
    }
}

fn emit(cfg: &RunConfig, comments: &[String], recs: Vec<Record>) -> Result<()> {
    let single = cfg.grid.is_empty() && recs.len() == 1;
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    if cfg.json {
        let json = if single {
            to_json(&recs[0])
        } else {
            serde_json::Value::Array(recs.iter().map(to_json).collect())
        };
        serde_json::to_writer_pretty(&mut sink, &json)?;
        writeln!(sink)?;
    } else if single && cfg.out.is_none() {
        write_human(&mut sink, &recs[0])?;
    } else {
        write_csv(&mut sink, comments, &recs)?;
    }
    sink.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot write {}", path.display()))
}

fn case_name(c: Case) -> &'static str {
    match c {
        Case::Short => "short",
        Case::Long => "long",
    }
}

fn ext_case_name(c: ExtCase) -> &'static str {
    match c {
        ExtCase::BelowRbar => "below_r_bar",
        ExtCase::AboveRbar => "above_r_bar",
    }
}

fn stats_fields(rec: &mut Record, s: &ReportStats) {
    rec.extend([
        field("freq_neg", s.freq_neg),
        field("freq_pos", s.freq_pos),
        field("elaborateness", s.elaborateness),
        field("extremity_neg", s.extremity_neg),
        field("extremity_pos", s.extremity_pos),
        field("extremity", s.extremity),
        field("misleading_prob", s.misleading_prob),
        field("price_reaction", s.price_reaction),
    ]);
}

fn regions(x_low: f64, x_high: f64, position: &str) -> String {
    format!(
        "elaborate if x <= {}; simple if {} < x < {}; elaborate if x >= {}; {position} after a simple report",
        fmt_num(x_low),
        fmt_num(x_low),
        fmt_num(x_high),
        fmt_num(x_high)
    )
}

fn solve_record(cfg: &RunConfig, pt: &Point, with_regions: bool) -> Result<Record> {
    let mut rec = model_params(cfg, pt);
    match cfg.model {
        ModelKind::Baseline => {
            let p = cfg.baseline(pt)?;
            let eq = solve_baseline(&p, cfg.tol)?;
            rec.extend([
                field("case", case_name(eq.case)),
                field("x_low", eq.x_low),
                field("x_high", eq.x_high),
                field("mu_nd", eq.mu_nd),
                field("nd_price", p.r_obs * eq.mu_nd),
                field("neutral_point", eq.neutral_point),
                field("residual", eq.residual),
                field("bayes_gap", verify_bayes(&p, &eq)),
            ]);
            stats_fields(&mut rec, &report_stats(&p, &eq));
            if with_regions {
                let pos = match eq.case {
                    Case::Short => "short",
                    Case::Long => "long",
                };
                rec.push(field("regions", regions(eq.x_low, eq.x_high, pos)));
            }
        }
        ModelKind::Extension => {
            let e = cfg.extension(pt)?;
            let eq = solve_extension(&e, cfg.tol)?;
            let (r_bar, corner) = match eq.r_bar {
                RBar::Finite(v) => (v, "no"),
                RBar::Infinite => (f64::INFINITY, "yes"),
            };
            rec.extend([
                field("case", ext_case_name(eq.case)),
                field("r_bar", r_bar),
                field("r_bar_corner", corner),
                field("x_low", eq.x_low_p),
                field("x_high", eq.x_high_p),
                field("mu_nd", eq.mu_nd),
                field("firm_threshold", eq.mu_nd),
                field("nd_price", e.r_obs * eq.mu_nd),
                field("neutral_point", eq.neutral_point),
                field("residual", eq.residual),
                field("bayes_gap", verify_bayes_ext(&e, &eq)),
                field("response_rate", analytic_response_rate(&e, &eq)),
            ]);
            stats_fields(&mut rec, &ext_report_stats(&e, &eq));
            if with_regions {
                let pos = match eq.case {
                    ExtCase::BelowRbar => "short",
                    ExtCase::AboveRbar => "long",
                };
                rec.push(field(
                    "regions",
                    format!(
                        "{}; firm responds if x > {}",
                        regions(eq.x_low_p, eq.x_high_p, pos),
                        fmt_num(eq.mu_nd)
                    ),
                ));
            }
        }
    }
    Ok(rec)
}

fn threshold_fields(rec: &mut Record, prefix: &str, s: &ThresholdSensitivity) {
    rec.extend([
        field(&format!("{prefix}d_xlow_d_beta"), s.d_xlow_d_beta),
        field(&format!("{prefix}d_xhigh_d_beta"), s.d_xhigh_d_beta),
        field(&format!("{prefix}d_xlow_d_q"), s.d_xlow_d_q),
        field(&format!("{prefix}d_xhigh_d_q"), s.d_xhigh_d_q),
    ]);
}

fn stats_derivative_fields(rec: &mut Record, prefix: &str, s: &StatsSensitivity) {
    for (wrt, d) in [("beta", &s.d_beta), ("q", &s.d_q)] {
        rec.extend([
            field(&format!("{prefix}d_misleading_d_{wrt}"), d.misleading_prob),
            field(
                &format!("{prefix}d_price_reaction_d_{wrt}"),
                d.price_reaction,
            ),
            field(&format!("{prefix}d_extremity_d_{wrt}"), d.extremity),
            field(&format!("{prefix}d_elaborateness_d_{wrt}"), d.elaborateness),
        ]);
    }
}

fn sensitivity_record(cfg: &RunConfig, pt: &Point) -> Result<Record> {
    let mut rec = model_params(cfg, pt);
    let analytic = matches!(cfg.method, MethodKind::Analytic | MethodKind::Both);
    let fd = matches!(cfg.method, MethodKind::Fd | MethodKind::Both);
    let fd_prefix = if analytic { "fd_" } else { "" };
    match cfg.model {
        ModelKind::Baseline => {
            let p = cfg.baseline(pt)?;
            let eq = solve_baseline(&p, cfg.tol)?;
            rec.extend([
                field("case", case_name(eq.case)),
                field("x_low", eq.x_low),
                field("x_high", eq.x_high),
            ]);
            if analytic {
                threshold_fields(&mut rec, "", &sensitivity_analytic(&p, &eq));
                stats_derivative_fields(&mut rec, "", &stats_sensitivity_analytic(&p, &eq));
            }
            if fd {
                threshold_fields(&mut rec, fd_prefix, &sensitivity_fd(&p, FD_STEP, cfg.tol)?);
                let s = stats_sensitivity_fd(&p, FD_STEP, cfg.tol)?;
                stats_derivative_fields(&mut rec, fd_prefix, &s);
            }
        }
        ModelKind::Extension => {
            let e = cfg.extension(pt)?;
            let eq = solve_extension(&e, cfg.tol)?;
            rec.extend([
                field("case", ext_case_name(eq.case)),
                field("x_low", eq.x_low_p),
                field("x_high", eq.x_high_p),
            ]);
            let mut push = |prefix: &str, d_low: f64, d_high: f64| {
                rec.push(field(&format!("{prefix}d_xlow_d_beta"), d_low));
                rec.push(field(&format!("{prefix}d_xhigh_d_beta"), d_high));
            };
            if analytic {
                let s = ext_sensitivity_analytic(&e, &eq);
                push("", s.d_xlow_d_beta, s.d_xhigh_d_beta);
            }
            if fd {
                let s = ext_sensitivity_fd(&e, FD_STEP, cfg.tol)?;
                push(fd_prefix, s.d_xlow_d_beta, s.d_xhigh_d_beta);
            }
        }
    }
    Ok(rec)
}

fn deviation_record(cfg: &RunConfig, pt: &Point) -> Result<(Record, bool)> {
    let mut rec = model_params(cfg, pt);
    let (table, x_low, x_high, neutral): (DeviationTable, f64, f64, f64) = match cfg.model {
        ModelKind::Baseline => {
            let p = cfg.baseline(pt)?;
            let eq = solve_baseline(&p, cfg.tol)?;
            rec.push(field("case", case_name(eq.case)));
            let xs = x_grid(&p.x_dist, eq.x_low, eq.x_high, DEVIATION_GRID);
            (
                deviation_table(&p, &eq, &xs),
                eq.x_low,
                eq.x_high,
                eq.neutral_point,
            )
        }
        ModelKind::Extension => {
            let e = cfg.extension(pt)?;
            let eq = solve_extension(&e, cfg.tol)?;
            rec.push(field("case", ext_case_name(eq.case)));
            let xs = x_grid(&e.x_dist, eq.x_low_p, eq.x_high_p, DEVIATION_GRID);
            let t = ext_deviation_table(&e, &eq, &xs);
            (t, eq.x_low_p, eq.x_high_p, eq.neutral_point)
        }
    };
    let contains = x_low <= neutral && neutral <= x_high;
    let ok = contains && table.max_gain <= DEVIATION_TOL;
    let (state, action) = match (&table.worst, table.max_gain > DEVIATION_TOL) {
        (Some((s, a)), true) => (s.to_string(), a.to_string()),
        _ => (String::new(), String::new()),
    };
    rec.extend([
        field("x_low", x_low),
        field("x_high", x_high),
        field("neutral_point", neutral),
        field("neutral_inside", if contains { "yes" } else { "no" }),
        field("entries", table.entries.len() as f64),
        field("max_gain", table.max_gain),
        field("worst_state", state),
        field("worst_action", action),
        field("verdict", if ok { "equilibrium" } else { "violated" }),
    ]);
    Ok((rec, ok))
}

fn run_deviations(cfg: &RunConfig) -> Result<()> {
    let recs = map_cells(cfg, |pt| deviation_record(cfg, pt).map(|(r, _)| r))?;
    let bad = recs
        .iter()
        .filter(|r| {
            !r.iter()
                .any(|(k, v)| k == "verdict" && *v == Value::Text("equilibrium".into()))
        })
        .count();
    let comment = format!(
        "deviation check, {} model, {DEVIATION_GRID} x points, tolerance {DEVIATION_TOL:e}",
        match cfg.model {
            ModelKind::Baseline => "baseline",
            ModelKind::Extension => "firm-response extension",
        }
    );
    emit(cfg, &[comment], recs.clone())?;
    if bad > 0 {
        bail!(
            "{bad} of {} instances have a profitable deviation or failed to solve",
            recs.len()
        );
    }
    Ok(())
}

fn run_simulate(cfg: &RunConfig) -> Result<()> {
    single_point(cfg)?;
    let pt = &cfg.point;
    let model = match cfg.model {
        ModelKind::Baseline => SimModel::Baseline(cfg.baseline(pt)?),
        ModelKind::Extension => SimModel::Extension(cfg.extension(pt)?),
    };
    let mut sim = SimConfig::new(model, cfg.paths, cfg.seed)?;
    sim.tol = cfg.tol;
    if let Some(s) = cfg.r_sigma {
        sim.r_dist = RDistribution::log_normal(pt.r0, s)?;
    }
    let report = simulate(&sim)?;

    if cfg.json || cfg.out.is_some() {
        let mut sink: Box<dyn Write> = match &cfg.out {
            Some(path) => Box::new(BufWriter::new(create(path)?)),
            None => Box::new(io::stdout().lock()),
        };
        serde_json::to_writer_pretty(&mut sink, &report)?;
        writeln!(sink)?;
        return Ok(sink.flush()?);
    }

    let mut rec = model_params(cfg, pt);
    rec.extend([
        field("paths", report.n_paths as f64),
        field("seed", report.seed as f64),
    ]);
    let estimates = [
        (
            "mu_nd",
            &report.empirical_mu_nd,
            report.analytic.map(|a| a.mu_nd),
        ),
        (
            "elaborate_freq",
            &report.elaborate_freq,
            report.analytic.map(|a| a.elaborate_freq),
        ),
        (
            "misleading_freq",
            &report.misleading_freq,
            report.analytic.map(|a| a.misleading_freq),
        ),
    ];
    for (name, est, target) in estimates {
        rec.push(field(name, est.mean));
        rec.push(field(&format!("{name}_se"), est.se));
        if let Some(t) = target {
            rec.push(field(&format!("{name}_analytic"), t));
            rec.push(field(&format!("{name}_z"), est.z_score(t)));
        }
    }
    if let Some(est) = &report.response_rate {
        rec.push(field("response_rate", est.mean));
        rec.push(field("response_rate_se", est.se));
        if let Some(t) = report.analytic.and_then(|a| a.response_rate) {
            rec.push(field("response_rate_analytic", t));
        }
    }
    let profits = &report.mean_profit_by_type;
    rec.extend([
        field("profit_informed", profits.informed.mean),
        field("profit_partially_informed", profits.partially_informed.mean),
        field("profit_uninformed", profits.uninformed.mean),
        field(
            "uninformed_max_abs_profit",
            report.uninformed_max_abs_profit,
        ),
    ]);
    write_human(io::stdout().lock(), &rec)
}

fn run_figures(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    for t in all_figures(cfg.tol)? {
        let path = dir.join(format!("{}.csv", t.name));
        let mut w = BufWriter::new(create(&path)?);
        write_table_csv(&mut w, &[t.title.clone()], &t.columns, &t.rows)?;
        w.flush()?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
