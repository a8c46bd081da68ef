use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::similarity::LabeledMatrix;

use super::{MetricReport, ModelReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Both,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "both" => Ok(ReportFormat::Both),
            other => Err(Error::invalid(format!("unknown report format `{other}`"))),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_json(report: &MetricReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Rounds to four decimals and drops trailing zeros, keeping one digit
/// after the point: `1.0`, `0.99`, `0.9923`.
pub fn format_trimmed(x: f64) -> String {
    let s = format!("{x:.4}");
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

pub fn format_risk(risk: f64, low: f64, high: f64) -> String {
    format!(
        "{},CI=({}, {})",
        format_trimmed(risk),
        format_trimmed(low),
        format_trimmed(high)
    )
}

fn cell<T>(o: &Outcome<T>, f: impl FnOnce(&T) -> String) -> String {
    match o {
        Outcome::Ok { value } => f(value),
        Outcome::Skipped { reason, .. } => format!("skipped ({})", reason_code(*reason)),
    }
}

fn reason_code(r: crate::outcome::SkipReason) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn opt4(x: Option<f64>) -> String {
    x.map(f4).unwrap_or_else(|| "n/a".into())
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn skipped_notes(m: &ModelReport) -> Vec<String> {
    let mut notes = Vec::new();
    let mut note = |metric: &str, o: Option<(&crate::outcome::SkipReason, &String)>| {
        if let Some((r, d)) = o {
            notes.push(format!("{}: {metric} skipped ({}): {d}", m.name, reason_code(*r)));
        }
    };
    fn skip<T>(o: &Outcome<T>) -> Option<(&crate::outcome::SkipReason, &String)> {
        match o {
            Outcome::Skipped { reason, detail } => Some((reason, detail)),
            Outcome::Ok { .. } => None,
        }
    }
    note("distance privacy", skip(&m.distance_privacy));
    note("singling out", skip(&m.singling_out));
    note("linkability", skip(&m.linkability));
    note("inference", skip(&m.inference));
    for (secret, r) in &m.inference_sweep {
        note(&format!("inference on `{secret}`"), skip(r));
    }
    note("similarity", skip(&m.similarity));
    if let Some(s) = m.similarity.value() {
        note("Wasserstein", skip(&s.wasserstein));
        note("KS", skip(&s.ks));
        note("Pearson correlation", skip(&s.corr_pearson));
        note("Spearman correlation", skip(&s.corr_spearman));
        note("NMI", skip(&s.nmi));
        note("JS", skip(&s.js));
        note("basic statistics", skip(&s.stats_diff));
    }
    for (learner, u) in &m.utility {
        note(&format!("utility ({learner})"), skip(u));
    }
    notes
}

/// Model-by-metric tables for privacy, similarity and utility.
pub fn render_markdown(report: &MetricReport) -> String {
    let mut out = String::new();
    let meta = &report.metadata;
    let _ = writeln!(out, "# Synthetic data evaluation\n");
    let _ = writeln!(
        out,
        "Original: `{}` ({} rows, {} columns). Seed {}. {} {}.\n",
        meta.config.original_path.display(),
        meta.original_rows,
        meta.original_columns.len(),
        meta.config.seed,
        meta.tool,
        meta.version
    );

    let _ = writeln!(out, "## Distance-based privacy\n");
    let rows: Vec<Vec<String>> = report
        .models
        .values()
        .map(|m| match &m.distance_privacy {
            Outcome::Ok { value: d } => vec![
                m.name.clone(),
                format!("{:.2}", d.disco),
                format!("{:.2}", d.rep_u),
                format!("{:.2}", d.nndr),
                format!("{:.2}", d.dcr),
                format!("{:.2}", d.nnaa),
            ],
            skipped => {
                let c = cell(skipped, |_| String::new());
                vec![m.name.clone(), c.clone(), c.clone(), c.clone(), c.clone(), c]
            }
        })
        .collect();
    table(&mut out, &["Model", "DiSCO", "repU", "NNDR", "DCR", "NNAA"], &rows);

    let _ = writeln!(out, "## Attack-based privacy\n");
    let risk = |o: &Outcome<crate::attack_privacy::RiskEstimate>| {
        cell(o, |r| format_risk(r.risk, r.ci_low, r.ci_high))
    };
    let rows: Vec<Vec<String>> = report
        .models
        .values()
        .map(|m| vec![m.name.clone(), risk(&m.singling_out), risk(&m.linkability), risk(&m.inference)])
        .collect();
    table(&mut out, &["Model", "Singling out", "Linkability", "Inference"], &rows);
    for m in report.models.values().filter(|m| !m.inference_sweep.is_empty()) {
        let _ = writeln!(out, "Inference risk per secret column, `{}`:\n", m.name);
        let rows: Vec<Vec<String>> = m.inference_sweep.iter().map(|(c, r)| vec![c.clone(), risk(r)]).collect();
        table(&mut out, &["Secret", "Inference"], &rows);
    }

    let _ = writeln!(out, "## Statistical similarity\n");
    let rows: Vec<Vec<String>> = report
        .models
        .values()
        .map(|m| match m.similarity.value() {
            Some(s) => vec![
                m.name.clone(),
                cell(&s.wasserstein, |v| f4(*v)),
                cell(&s.ks, |v| f4(*v)),
                format!("[{}; {}]", cell(&s.corr_pearson, |v| f4(*v)), cell(&s.corr_spearman, |v| f4(*v))),
                cell(&s.nmi, |v| f4(*v)),
                cell(&s.js, |v| f4(*v)),
                cell(&s.stats_diff, |d| format!("({}, {}, {})", f4(d.mean_diff), f4(d.median_diff), f4(d.var_diff))),
            ],
            None => {
                let c = cell(&m.similarity, |_| String::new());
                vec![m.name.clone(), c.clone(), c.clone(), c.clone(), c.clone(), c.clone(), c]
            }
        })
        .collect();
    table(
        &mut out,
        &["Model", "WS", "KS", "Corr [P; S]", "NMI", "JS", "Stats diff (mean, median, var)"],
        &rows,
    );
    if let Some(mode) = report.models.values().find_map(|m| m.similarity.value().map(|s| s.wasserstein_mode)) {
        let name = serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(out, "WS computed in `{name}` mode.\n");
    }

    let _ = writeln!(out, "## Machine-learning utility\n");
    let mut rows = Vec::new();
    for m in report.models.values() {
        for (learner, u) in &m.utility {
            rows.push(match u {
                Outcome::Ok { value: u } => vec![
                    m.name.clone(),
                    learner.clone(),
                    f4(u.trtr.accuracy),
                    f4(u.tstr.accuracy),
                    f4(u.trtr.f1),
                    f4(u.tstr.f1),
                    opt4(u.trtr.auc),
                    opt4(u.tstr.auc),
                ],
                skipped => {
                    let c = cell(skipped, |_| String::new());
                    let mut r = vec![m.name.clone(), learner.clone()];
                    r.extend(std::iter::repeat_n(c, 6));
                    r
                }
            });
        }
    }
    table(
        &mut out,
        &["Model", "Learner", "Acc TRTR", "Acc TSTR", "F1 TRTR", "F1 TSTR", "AUC TRTR", "AUC TSTR"],
        &rows,
    );

    let mut notes: Vec<String> = meta.caps.notes.clone();
    notes.extend(meta.notes.iter().cloned());
    for m in report.models.values() {
        notes.extend(skipped_notes(m));
    }
    if !notes.is_empty() {
        let _ = writeln!(out, "## Notes\n");
        for n in notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `report.json` and/or `report.md` into `dir`.
pub fn emit_report(report: &MetricReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        let p = dir.join("report.json");
        write_file(&p, &render_json(report)?)?;
        written.push(p);
    }
    if matches!(format, ReportFormat::Markdown | ReportFormat::Both) {
        let p = dir.join("report.md");
        write_file(&p, &render_markdown(report))?;
        written.push(p);
    }
    Ok(written)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn num(x: f64) -> String {
    crate::tabular::format_number(x)
}

fn outcome_num(o: &Outcome<f64>) -> String {
    o.value().map(|v| num(*v)).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn write_matrix(path: &Path, m: &LabeledMatrix) -> Result<()> {
    let mut header = vec![String::new()];
    header.extend(m.names.iter().cloned());
    let rows: Vec<Vec<String>> = m
        .names
        .iter()
        .zip(&m.values)
        .map(|(name, row)| {
            let mut r = vec![name.clone()];
            r.extend(row.iter().map(|v| v.map(num).unwrap_or_default()));
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Writes the plot-ready CSV series into `dir/plots` and returns their paths.
pub fn emit_plot_data(report: &MetricReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    let mut written = Vec::new();
    let sims: Vec<(&str, &crate::similarity::SimilarityReport)> = report
        .models
        .values()
        .filter_map(|m| m.similarity.value().map(|s| (m.name.as_str(), s)))
        .collect();
    let mut emit = |name: String, header: Vec<String>, rows: Vec<Vec<String>>| -> Result<()> {
        let p = plots.join(name);
        write_csv(&p, &header, &rows)?;
        written.push(p);
        Ok(())
    };

    emit(
        "ks_overall.csv".into(),
        strs(&["model", "ks"]),
        sims.iter().map(|(m, s)| vec![m.to_string(), outcome_num(&s.ks)]).collect(),
    )?;
    let per_column = |pick: fn(&crate::similarity::SimilarityReport) -> &Vec<(String, f64)>| {
        sims.iter()
            .flat_map(|(m, s)| pick(s).iter().map(move |(c, v)| vec![m.to_string(), c.clone(), num(*v)]))
            .collect::<Vec<_>>()
    };
    emit("ks_per_column.csv".into(), strs(&["model", "column", "ks"]), per_column(|s| &s.detail.ks_per_column))?;
    emit("js_per_column.csv".into(), strs(&["model", "column", "js"]), per_column(|s| &s.detail.js_per_column))?;
    emit(
        "wasserstein_per_column.csv".into(),
        strs(&["model", "column", "wasserstein"]),
        per_column(|s| &s.detail.wasserstein_per_column),
    )?;

    let mut stats_rows = Vec::new();
    for (m, s) in &sims {
        for c in &s.detail.column_stats {
            for (stat, o, y) in [
                ("mean", c.original.mean, c.synthetic.mean),
                ("median", c.original.median, c.synthetic.median),
                ("variance", c.original.variance, c.synthetic.variance),
            ] {
                stats_rows.push(vec![m.to_string(), c.column.clone(), stat.into(), num(o), num(y)]);
            }
        }
    }
    emit(
        "basic_stats.csv".into(),
        strs(&["model", "column", "statistic", "original", "synthetic"]),
        stats_rows,
    )?;

    let sample = report.metadata.config.wasserstein_sample_size;
    let mode_rows: Vec<Vec<String>> = sims
        .iter()
        .filter_map(|(m, s)| {
            s.detail.wasserstein_modes.as_ref().map(|w| {
                vec![m.to_string(), outcome_num(&w.exact_1d), outcome_num(&w.sampled), outcome_num(&w.sinkhorn)]
            })
        })
        .collect();
    if !mode_rows.is_empty() {
        emit(
            "wasserstein_modes.csv".into(),
            vec!["model".into(), "exact_1d".into(), format!("sampled_{sample}"), "sinkhorn".into()],
            mode_rows,
        )?;
    }

    type Pick = fn(&crate::similarity::SimilarityDetail) -> &Option<(LabeledMatrix, LabeledMatrix)>;
    let matrices: [(&str, Pick); 3] = [
        ("corr_pearson", |d| &d.pearson),
        ("corr_spearman", |d| &d.spearman),
        ("nmi", |d| &d.nmi),
    ];
    for (stem, pick) in matrices {
        let mut original_done = false;
        for (m, s) in &sims {
            if let Some((o, y)) = pick(&s.detail) {
                if !original_done {
                    let p = plots.join(format!("{stem}_original.csv"));
                    write_matrix(&p, o)?;
                    written.push(p);
                    original_done = true;
                }
                let p = plots.join(format!("{stem}_{}.csv", file_safe(m)));
                write_matrix(&p, y)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
