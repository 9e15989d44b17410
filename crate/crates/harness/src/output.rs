//! CSV, summary and gnuplot emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use relaxbl_core::schemes::{Grid1D, SolutionState};

use crate::error::Result;
use crate::study::{Comparison, ErrorReport, SchemeErrors};

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_solution_csv(path: &Path, grid: &Grid1D, state: &SolutionState, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for j in 0..state.num_points() {
        let mut row = vec![num(grid.x(j))];
        row.extend(state.point(j).iter().map(|&v| num(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors_csv(path: &Path, report: &ErrorReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["N_x", "h", "L1", "L2", "Linf"])?;
    for r in &report.rows {
        if let Ok((n, _)) = &r.outcome {
            w.write_record([r.nx.to_string(), num(r.h), num(n.l1), num(n.l2), num(n.linf)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `x`, then per component: reference, upwind, BAP and both errors.
pub fn write_compare_csv(path: &Path, c: &Comparison, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string()];
    for n in names {
        for p in ["ref", "upwind", "bap", "err_upwind", "err_bap"] {
            header.push(format!("{p}_{n}"));
        }
    }
    w.write_record(&header)?;
    for j in 0..c.reference.num_points() {
        let mut row = vec![num(c.grid.x(j))];
        for k in 0..c.reference.n {
            let r = c.reference.point(j)[k];
            let u = c.upwind.point(j)[k];
            let b = c.bap.point(j)[k];
            row.extend([num(r), num(u), num(b), num((u - r).abs()), num((b - r).abs())]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn convergence_summary(report: &ErrorReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "example {} scheme {}", report.example, report.scheme);
    let _ = writeln!(s, "{:>6} {:>12} {:>12} {:>12} {:>12} {:>9}", "N_x", "h", "L1", "L2", "Linf", "seconds");
    for r in &report.rows {
        match &r.outcome {
            Ok((n, secs)) => {
                let _ = writeln!(
                    s,
                    "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>9.3}",
                    r.nx, r.h, n.l1, n.l2, n.linf, secs
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{:>6} {:>12.4e} FAILED: {e}", r.nx, r.h);
            }
        }
    }
    let [l1, l2, li] = report.slopes;
    let _ = writeln!(s, "slopes: L1 {l1}  L2 {l2}  Linf {li}");
    s
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" ")
}

fn scheme_lines(s: &mut String, label: &str, e: &SchemeErrors) {
    let _ = writeln!(s, "{label}:");
    let _ = writeln!(s, "  boundary point error   {}", fmt_vec(&e.boundary));
    let _ = writeln!(s, "  sup error              {}", fmt_vec(&e.sup));
    let _ = writeln!(s, "  interior sup error     {}", fmt_vec(&e.interior_sup));
    let _ = writeln!(s, "  interior mean error    {}", fmt_vec(&e.interior_mean));
    if let Some(v) = &e.interface_sup {
        let _ = writeln!(s, "  interface nbhd sup     {}", fmt_vec(v));
    }
    if let Some(v) = &e.interface_point {
        let _ = writeln!(s, "  interface point error  {}", fmt_vec(v));
    }
}

pub fn compare_summary(example: &str, c: &Comparison, names: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "example {example} N_x {} (components {})", c.nx, names.join(", "));
    scheme_lines(&mut s, "upwind", &c.upwind_errors);
    scheme_lines(&mut s, "bap", &c.bap_errors);
    let _ = writeln!(s, "seconds: upwind {:.3} bap {:.3}", c.seconds[0], c.seconds[1]);
    s
}

/// Gnuplot script plotting columns 2.. of each CSV against column 1.
/// `every` subsamples the points (cosmetic only).
pub fn gnuplot_script(title: &str, files: &[(PathBuf, Vec<String>)], logscale: bool, every: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    if logscale {
        let _ = writeln!(s, "set logscale xy");
    }
    let mut plots = Vec::new();
    for (file, cols) in files {
        let name = file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        for (i, _) in cols.iter().enumerate() {
            let style = if logscale { "linespoints" } else { "points" };
            plots.push(format!("'{name}' every {every} using 1:{} with {style}", i + 2));
        }
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Log-log plot of `errors.csv`.
pub fn errors_gnuplot(example: &str, file: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title 'errors, example {example}'");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'h'");
    let _ = writeln!(
        s,
        "plot '{file}' using 2:3 with linespoints, '{file}' using 2:4 with linespoints, '{file}' using 2:5 with linespoints"
    );
    s
}
