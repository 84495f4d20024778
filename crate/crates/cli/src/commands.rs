use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use smwave_core::experiments::StudyConfig;
use smwave_core::{
    expand, run_convergence_study, run_rate_example, solve, ConvergenceReport, Partition,
    StochasticMeasurePath,
};

use crate::config::RunConfig;
use crate::CliError;

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn finish(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush()?;
    Ok(())
}

/// `meta.txt`: result notes as comments, then the effective configuration.
fn write_meta(
    out: &Path,
    command: &str,
    config: &RunConfig,
    notes: &[String],
) -> Result<(), CliError> {
    let mut w = create(out, "meta.txt")?;
    writeln!(w, "# smwave {command}")?;
    for n in notes {
        writeln!(w, "# {n}")?;
    }
    writeln!(w)?;
    w.write_all(config.to_toml().as_bytes())?;
    finish(w)
}

fn path(config: &RunConfig) -> Result<StochasticMeasurePath, CliError> {
    let partition = Partition::new(config.n_cells)?;
    Ok(config.generator()?.generate(partition, config.seed)?)
}

fn write_path(out: &Path, path: &StochasticMeasurePath) -> Result<(), CliError> {
    let mut w = create(out, "path.csv")?;
    path.write_csv(&mut w)?;
    finish(w)
}

pub fn generate(config: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let path = path(config)?;
    write_path(out, &path)?;
    let notes = vec![format!(
        "generator={} n_cells={}",
        path.generator(),
        path.n_cells()
    )];
    write_meta(out, "generate", config, &notes)?;
    Ok(notes)
}

pub fn expand_cmd(config: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let section = RunConfig::require(&config.expand, "expand")?;
    let path = path(config)?;
    let expansion = expand(&path, section.max_order);
    write_path(out, &path)?;
    let mut w = create(out, "expansion.csv")?;
    expansion.write_csv(&mut w)?;
    finish(w)?;
    let mut notes = vec![format!("max_order={}", section.max_order)];
    if expansion.is_aliased() {
        notes.push(format!(
            "orders >= {} alias lower frequencies of the {}-cell grid",
            path.n_cells() / 2,
            path.n_cells()
        ));
    }
    write_meta(out, "expand", config, &notes)?;
    Ok(notes)
}

pub fn solve_cmd(config: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let section = config.solve.clone().unwrap_or_default();
    let (problem, grid) = (config.problem()?, config.grid()?);
    let path = path(config)?;
    let expansion = section.mode.order().map(|k| expand(&path, k));
    let field = solve(
        problem,
        grid,
        &path,
        expansion.as_ref(),
        section.mode,
        &section.options,
    )?;
    let mut w = create(out, "field.csv")?;
    field.write_csv(&mut w)?;
    finish(w)?;
    let notes = vec![format!(
        "mode={} iterations={} residual={:e}",
        field.mode(),
        field.iterations_used(),
        field.residual()
    )];
    write_meta(out, "solve", config, &notes)?;
    Ok(notes)
}

fn write_report(out: &Path, report: &ConvergenceReport) -> Result<Vec<String>, CliError> {
    let mut w = create(out, "report.csv")?;
    report.write_report_csv(&mut w)?;
    finish(w)?;
    let mut w = create(out, "raw.csv")?;
    report.write_raw_csv(&mut w)?;
    finish(w)?;
    let v = report.verdict();
    let mut notes = vec![
        format!(
            "generator={} family={:?} replicas_ok={} replicas_failed={}",
            report.generator, report.family, report.replicas_ok, report.replicas_failed
        ),
        format!(
            "median_ratio={:.4} p90_ratio={:.4} inversions={} verdict={}",
            v.median_ratio,
            v.p90_ratio,
            v.inversions,
            if v.pass { "pass" } else { "fail" }
        ),
    ];
    if let Some(fit) = report.fit {
        notes.push(format!(
            "slope={:.4} intercept={:.4} fit_residual={:.3e}",
            fit.slope, fit.intercept, fit.residual
        ));
    }
    Ok(notes)
}

fn study(config: &RunConfig) -> Result<&StudyConfig, CliError> {
    RunConfig::require(&config.study, "study")
}

pub fn converge(config: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let study = study(config)?;
    let (problem, grid, generator) = (config.problem()?, config.grid()?, config.generator()?);
    let report = run_convergence_study(problem, grid, generator, study)?;
    let notes = write_report(out, &report)?;
    write_meta(out, "converge", config, &notes)?;
    Ok(notes)
}

pub fn rate(config: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let section = RunConfig::require(&config.rate, "rate")?;
    let stochastic = if section.stochastic {
        Some((config.problem()?, config.grid()?, study(config)?))
    } else {
        None
    };
    let example = run_rate_example(&section.spec, &section.table, stochastic)?;
    let mut w = create(out, "rate.csv")?;
    example.write_deterministic_csv(&mut w)?;
    finish(w)?;
    let mut notes = match example.fit {
        Some(fit) => vec![format!(
            "deterministic slope={:.4} intercept={:.4} fit_residual={:.3e} points={}",
            fit.slope, fit.intercept, fit.residual, fit.used
        )],
        None => vec!["deterministic errors too small to fit a rate".to_string()],
    };
    if let Some(report) = &example.stochastic {
        notes.extend(write_report(out, report)?);
    }
    write_meta(out, "rate", config, &notes)?;
    Ok(notes)
}
