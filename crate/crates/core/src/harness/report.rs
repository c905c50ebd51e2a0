//! Report files: ranking table, per-run metrics, prediction series and SVG
//! plots.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{rank_complete, ExperimentResult, RankRow};
use crate::error::{Error, Result};

/// `model,signals,rmspe_j1,...,rmspe_jMax,mean`.
pub fn ranking_csv(rows: &[RankRow]) -> String {
    let js: BTreeSet<usize> = rows.iter().flat_map(|r| r.rmspe_by_j.keys().copied()).collect();
    let mut out = String::from("model,signals");
    for j in &js {
        let _ = write!(out, ",rmspe_j{j}");
    }
    out.push_str(",mean\n");
    for r in rows {
        let _ = write!(out, "{},{}", r.model, r.signals);
        for j in &js {
            match r.rmspe_by_j.get(j) {
                Some(v) => {
                    let _ = write!(out, ",{v:.4}");
                }
                None => out.push(','),
            }
        }
        let _ = writeln!(out, ",{:.4}", r.mean);
    }
    out
}

/// `coin,model,signals,k,j,mape,mape_ci,rmspe,rmspe_ci,maxape,rmse,n,error`;
/// failed runs keep their row with empty metrics and the error message.
pub fn metrics_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from("coin,model,signals,k,j,mape,mape_ci,rmspe,rmspe_ci,maxape,rmse,n,error\n");
    for r in results {
        let c = &r.config;
        let _ = write!(out, "{},{},{},{},{}", c.coin, c.model, c.signals_label(), c.k, c.j);
        match (&r.metrics, &r.error) {
            (Some(m), None) => {
                let _ = writeln!(
                    out,
                    ",{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},",
                    m.mape, m.mape_ci_halfwidth, m.rmspe, m.rmspe_ci_halfwidth, m.maxape, m.rmse, m.n
                );
            }
            (_, err) => {
                let msg = err.as_deref().unwrap_or("no metrics").replace(['"', '\n'], " ");
                let _ = writeln!(out, ",,,,,,,,\"{msg}\"");
            }
        }
    }
    out
}

/// `date,true_usd,pred_usd`.
pub fn predictions_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("date,true_usd,pred_usd\n");
    for p in &result.predictions {
        let _ = writeln!(out, "{},{:.6},{:.6}", p.date, p.true_usd, p.pred_usd);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of true price high (solid) against predictions (dashed with
/// point markers).
pub fn render_svg(result: &ExperimentResult) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;
    let c = &result.config;
    let pts = &result.predictions;
    let title = format!("{} {} {} (j={})", c.coin, c.model, c.signals_label(), c.j);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(&title)
    );
    let (lo, hi) = pts
        .iter()
        .flat_map(|p| [p.true_usd, p.pred_usd])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0), lo.max(0.0) + 1.0) };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let n = pts.len().max(2) - 1;
    let x = |i: usize| LEFT + pw * i as f64 / n as f64;
    let y = |v: f64| TOP + ph * (1.0 - (v - lo) / (hi - lo));

    let _ = writeln!(
        out,
        r#"<polyline points="{LEFT},{TOP} {LEFT},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    for (v, anchor) in [(lo, TOP + ph), (hi, TOP)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{anchor:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.2}</text>"#,
            LEFT - 6.0
        );
    }
    if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            TOP + ph + 16.0,
            first.date
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            LEFT + pw,
            TOP + ph + 16.0,
            last.date
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">date ({}, forecast j={})</text>"#,
        LEFT + pw / 2.0,
        H - 16.0,
        escape(&c.coin),
        c.j
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 {})">price high (USD)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    let line = |f: &dyn Fn(usize) -> f64| {
        (0..pts.len())
            .map(|i| format!("{:.2},{:.2}", x(i), y(f(i))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
        line(&|i| pts[i].true_usd)
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1" stroke-dasharray="4 2"/>"##,
        line(&|i| pts[i].pred_usd)
    );
    for (i, p) in pts.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#c0392b"/>"##,
            x(i),
            y(p.pred_usd)
        );
    }
    let lx = LEFT + 10.0;
    let _ = writeln!(
        out,
        r##"<line x1="{lx}" y1="{TOP}" x2="{}" y2="{TOP}" stroke="#1f4e9c" stroke-width="1.5"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">true</text>"##,
        lx + 20.0,
        lx + 25.0,
        TOP + 4.0
    );
    let _ = writeln!(
        out,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-dasharray="4 2"/><circle cx="{}" cy="{}" r="2" fill="#c0392b"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">predicted</text>"##,
        TOP + 14.0,
        lx + 20.0,
        TOP + 14.0,
        lx + 10.0,
        TOP + 14.0,
        lx + 25.0,
        TOP + 18.0
    );
    out.push_str("</svg>\n");
    out
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `ranking.csv`, `metrics.csv` and, per successful run,
/// `predictions_<id>.csv` and `plot_<id>.svg`. Returns the paths written.
pub fn emit_report(results: &[ExperimentResult], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::Empty("nothing to report".into()));
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let (rows, dropped) = rank_complete(results);
    for label in dropped {
        log::warn!("{label} left out of the ranking: incomplete (coin, j) coverage");
    }
    write(dir.join("ranking.csv"), &ranking_csv(&rows), &mut written)?;
    write(dir.join("metrics.csv"), &metrics_csv(results), &mut written)?;
    for r in results.iter().filter(|r| r.is_ok()) {
        let id = r.config.id();
        write(dir.join(format!("predictions_{id}.csv")), &predictions_csv(r), &mut written)?;
        write(dir.join(format!("plot_{id}.svg")), &render_svg(r), &mut written)?;
    }
    Ok(written)
}
