//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use relaxbl_core::models::{default_gkc_samples, gkc_sample_ratio, jinxin_as_linear, jinxin_boundary_row};

use crate::config::{ExperimentConfig, Resolved, SchemeName};
use crate::error::{HarnessError, Result};
use crate::examples::{example, ProblemDef, EXAMPLE_IDS};
use crate::output::{
    compare_summary, convergence_summary, errors_gnuplot, gnuplot_script, write_compare_csv, write_errors_csv, write_solution_csv,
};
use crate::study::{compare_schemes, convergence_study, prepare_reference, run_single};

#[derive(Parser, Debug)]
#[command(name = "relaxbl", about = "Upwind and boundary-aware relaxation schemes: runs, convergence studies, comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scheme and write solution CSVs.
    Run(Common),
    /// Error norms over several resolutions, with fitted slopes.
    Convergence(Common),
    /// Upwind and BAP side by side against the reference.
    Compare(Common),
    /// Sampled generalized Kreiss condition for the boundary condition.
    GkcCheck(Common),
    /// List the registered examples.
    ListExamples,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeName>,
}

fn parse_scheme(s: &str) -> std::result::Result<SchemeName, String> {
    match s {
        "upwind" => Ok(SchemeName::Upwind),
        "bap" => Ok(SchemeName::Bap),
        _ => Err(format!("expected upwind or bap, got '{s}'")),
    }
}

impl Common {
    fn resolve(&self) -> Result<Resolved> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(e) = &self.example {
            cfg.example = Some(e.clone());
            cfg.custom = None;
        }
        if cfg.example.is_none() && cfg.custom.is_none() {
            return Err(HarnessError::Usage("give --example ID or --config FILE".into()));
        }
        if self.nx.is_some() {
            cfg.nx = self.nx.clone();
        }
        if self.eps.is_some() {
            cfg.epsilon = self.eps;
        }
        if self.p.is_some() {
            cfg.p = self.p;
        }
        if self.scheme.is_some() {
            cfg.scheme = self.scheme;
        }
        if self.out.is_some() {
            cfg.out_dir = self.out.clone();
        }
        cfg.resolve()
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("relaxbl: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::ListExamples => {
            print!("{}", list_examples()?);
            Ok(())
        }
        Command::Run(c) => cmd_run(&c.resolve()?),
        Command::Convergence(c) => cmd_convergence(&c.resolve()?),
        Command::Compare(c) => cmd_compare(&c.resolve()?),
        Command::GkcCheck(c) => {
            let r = c.resolve()?;
            let (min, evaluated, skipped) = gkc_check(&r)?;
            println!("example {}: minimum sampled GKC ratio {min:.6e} ({evaluated} samples, {skipped} skipped)", r.example.id);
            Ok(())
        }
    }
}

pub fn list_examples() -> Result<String> {
    let mut s = String::new();
    for id in EXAMPLE_IDS {
        let ex = example(id, None)?;
        let _ = writeln!(s, "{:<3} {}\n    {}", ex.id, ex.title, ex.summary);
    }
    Ok(s)
}

fn out_dir(r: &Resolved) -> Result<&Path> {
    std::fs::create_dir_all(&r.out_dir)?;
    Ok(&r.out_dir)
}

pub fn cmd_run(r: &Resolved) -> Result<()> {
    let dir = out_dir(r)?;
    let fine = prepare_reference(r)?;
    let names = &r.example.component_names;
    let mut summary = String::new();
    let mut files = Vec::new();
    for &nx in &r.example.nx {
        let run = run_single(r, nx, r.scheme, fine.as_ref())?;
        for st in &run.snapshots {
            let p = dir.join(format!("solution_{}_nx{nx}_t{:.6}.csv", r.scheme, st.time));
            write_solution_csv(&p, &run.grid, st, names)?;
            files.push((p, names.clone()));
        }
        let p = dir.join(format!("reference_nx{nx}.csv"));
        write_solution_csv(&p, &run.grid, &run.reference, names)?;
        files.push((p, names.clone()));
        let _ = writeln!(
            summary,
            "example {} scheme {} N_x {nx}: tau {:.4e}, {} steps, L1 {:.4e} L2 {:.4e} Linf {:.4e} ({:.3} s)",
            r.example.id, r.scheme, run.tau, run.steps, run.norms.l1, run.norms.l2, run.norms.linf, run.seconds
        );
    }
    std::fs::write(dir.join("summary.txt"), &summary)?;
    std::fs::write(
        dir.join("solution.gp"),
        gnuplot_script(&format!("example {}", r.example.id), &files, false, 1),
    )?;
    print!("{summary}");
    Ok(())
}

pub fn cmd_convergence(r: &Resolved) -> Result<()> {
    let dir = out_dir(r)?;
    let report = convergence_study(r)?;
    let p = dir.join("errors.csv");
    write_errors_csv(&p, &report)?;
    let summary = convergence_summary(&report);
    std::fs::write(dir.join("summary.txt"), &summary)?;
    std::fs::write(dir.join("errors.gp"), errors_gnuplot(&r.example.id, "errors.csv"))?;
    print!("{summary}");
    if report.failures().next().is_some() {
        return Err(HarnessError::Numerical(relaxbl_core::Error::InvalidInput(
            "some resolutions failed; see summary.txt".into(),
        )));
    }
    Ok(())
}

pub fn cmd_compare(r: &Resolved) -> Result<()> {
    let dir = out_dir(r)?;
    let fine = prepare_reference(r)?;
    let names = &r.example.component_names;
    let mut summary = String::new();
    let mut files = Vec::new();
    for &nx in &r.example.nx {
        let c = compare_schemes(r, nx, fine.as_ref())?;
        let p = dir.join(format!("compare_nx{nx}.csv"));
        write_compare_csv(&p, &c, names)?;
        let cols = names
            .iter()
            .flat_map(|n| ["ref", "upwind", "bap", "err_upwind", "err_bap"].map(|k| format!("{k}_{n}")))
            .collect();
        files.push((p, cols));
        summary.push_str(&compare_summary(&r.example.id, &c, names));
    }
    std::fs::write(dir.join("summary.txt"), &summary)?;
    // Subsampling in the plot is cosmetic; the CSV holds every point.
    let every = (r.example.nx.iter().copied().max().unwrap_or(100) / 100).max(1);
    std::fs::write(
        dir.join("compare.gp"),
        gnuplot_script(&format!("example {}", r.example.id), &files, false, every),
    )?;
    print!("{summary}");
    Ok(())
}

/// Minimum sampled GKC ratio, number of evaluated and skipped samples.
/// Nonlinear Jin-Xin problems are linearized at `u = 0`.
pub fn gkc_check(r: &Resolved) -> Result<(f64, usize, usize)> {
    let sys = match &r.example.problem {
        ProblemDef::Linear(s) => s.clone(),
        ProblemDef::JinXin(m) => {
            let a = (m.flux_derivative)(0.0);
            let (bu, bv) = m.bc_coeffs;
            let mut s = jinxin_as_linear(a, m.epsilon);
            s.b = jinxin_boundary_row(a, bu, bv);
            s
        }
        _ => {
            return Err(HarnessError::Config(format!(
                "example {} has no physical boundary condition to check",
                r.example.id
            )))
        }
    };
    let rep = gkc_sample_ratio(&sys, &default_gkc_samples())?;
    if rep.evaluated == 0 {
        return Err(HarnessError::Numerical(relaxbl_core::Error::InvalidInput(
            "no GKC sample could be evaluated".into(),
        )));
    }
    Ok((rep.min_ratio, rep.evaluated, rep.skipped.len()))
}
