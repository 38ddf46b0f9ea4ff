//! Configuration-driven front end: each command resolves an
//! [`ExperimentConfig`], runs one analysis and writes its data files plus a
//! `manifest.json` into the output directory.

pub mod config;
pub mod output;

use std::path::PathBuf;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{classical_markov, liouvillian, DensityMatrix};
use crate::dynamics::{marginals, relax_classical, relax_quantum, ProbabilityVector};
use crate::error::{Error, Result};
use crate::transitions::{locate_crossing, locate_qc, size_scan, sweep, uniform_grid, WalkFamily};

pub use config::{ExperimentConfig, InitialState, ModelKind, Overrides, ScanKind};
pub use output::{format_number, RunManifest};
use output::{unix_now, Csv, OutputSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Sweep,
    Relax,
    Locate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Relax => "relax",
            Command::Locate => "locate",
        }
    }
}

/// Process exit status for an error: 2 for bad configuration, 3 for
/// numerical failure, 1 for anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

/// Runs `command` on a fully resolved configuration inside a pool of
/// `threads` workers (the global pool when `None`).
pub fn run(command: Command, config: ExperimentConfig, threads: Option<usize>) -> Result<RunManifest> {
    let config = config.resolved();
    config.validate()?;
    match threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
            pool.install(|| execute(command, &config))
        }
        None => execute(command, &config),
    }
}

fn execute(command: Command, config: &ExperimentConfig) -> Result<RunManifest> {
    let started = unix_now();
    let mut outputs = OutputSet::new();
    match command {
        Command::Spectrum => spectrum(config, &mut outputs)?,
        Command::Sweep => sweep_cmd(config, &mut outputs)?,
        Command::Relax => relax(config, &mut outputs)?,
        Command::Locate => locate(config, &mut outputs)?,
    }
    let dir: PathBuf = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    outputs.write(&dir, command.name(), config, started)
}

#[derive(Serialize)]
struct ModeRecord {
    mu: Complex64,
    lambda: Complex64,
    right: Vec<Complex64>,
}

#[derive(Serialize)]
struct SpectrumFile {
    beta: f64,
    q: f64,
    dim: usize,
    biorthonormal: bool,
    near_ep: bool,
    condition: f64,
    db_residual: f64,
    modes: Vec<ModeRecord>,
}

fn spectrum(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let family = config.family()?;
    let (beta, q) = (config.beta()?, config.q()?);
    let p = family.spectrum(beta, q)?;
    let d = &p.decomposition;
    let file = SpectrumFile {
        beta,
        q,
        dim: d.dim(),
        biorthonormal: d.is_biorthonormal(),
        near_ep: d.is_near_ep(),
        condition: d.condition(),
        db_residual: p.db_residual,
        modes: d
            .modes()
            .iter()
            .map(|m| ModeRecord {
                mu: m.mu,
                lambda: m.lambda,
                right: m.right.iter().copied().collect(),
            })
            .collect(),
    };
    out.add_json("spectrum.json", &file)
}

fn sweep_cmd(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let family = config.family()?;
    let (lo, hi) = config.window()?;
    let grid = uniform_grid(lo, hi, config.grid()?)?;
    let table = sweep(&family, &grid, config.q()?)?;

    let header: Vec<String> = [
        "beta",
        "re_lambda2",
        "im_lambda2",
        "re_lambda3",
        "im_lambda3",
        "g",
        "db_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut csv = Csv::new(&header);
    for r in &table.records {
        csv.row(
            &format_number(r.beta),
            [
                r.lambda2.re,
                r.lambda2.im,
                r.lambda3.re,
                r.lambda3.im,
                r.g,
                r.db_residual,
            ],
        );
    }
    out.add("sweep.csv", csv.into_string());

    let n = table.branches.first().map_or(0, Vec::len);
    let mut header = vec!["beta".to_string()];
    for b in 1..=n {
        header.push(format!("re_branch{b}"));
        header.push(format!("im_branch{b}"));
    }
    let mut csv = Csv::new(&header);
    for (r, row) in table.records.iter().zip(&table.branches) {
        csv.row(&format_number(r.beta), row.iter().flat_map(|l| [l.re, l.im]));
    }
    out.add("branches.csv", csv.into_string());
    Ok(())
}

fn initial_populations(config: &ExperimentConfig, n: usize) -> Result<ProbabilityVector> {
    match config.initial.unwrap_or_default() {
        InitialState::Uniform => Ok(ProbabilityVector::uniform(n)),
        InitialState::Site(k) if (1..=n).contains(&k) => ProbabilityVector::basis(n, k - 1),
        InitialState::Site(k) => Err(Error::Config(format!("initial site {k} outside 1..={n}"))),
    }
}

fn relax(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    let family = config.family()?;
    let (beta, q, steps) = (config.beta()?, config.q()?, config.steps()?);
    let n = family.dim();
    let u = family.unitary(beta)?;
    let p0 = initial_populations(config, n)?;

    let mut header = vec!["step".to_string()];
    header.extend((1..=n).map(|k| format!("p_{k}")));
    let (populations, coherences): (Vec<DVector<f64>>, Option<Vec<f64>>) = if q == 1.0 {
        let t = relax_classical(&classical_markov(&u), &p0, steps)?;
        (t.states().iter().map(|p| p.vector().clone()).collect(), None)
    } else {
        header.push("coh_norm".into());
        let rho0 = DensityMatrix::from_populations(p0.as_slice())?;
        let t = relax_quantum(&liouvillian(&u, q)?, &rho0, steps)?;
        let pops = t.states().iter().map(|r| DVector::from_vec(r.populations())).collect();
        (
            pops,
            Some(t.states().iter().map(DensityMatrix::coherence_norm).collect()),
        )
    };

    let mut csv = Csv::new(&header);
    for (k, p) in populations.iter().enumerate() {
        let extra = coherences.as_ref().map(|c| c[k]);
        csv.row(&k.to_string(), p.iter().copied().chain(extra));
    }
    out.add("relax.csv", csv.into_string());

    if let WalkFamily::Coined { length } = family {
        let mut header = vec!["step".to_string()];
        header.extend((1..=length).map(|l| format!("p_site_{l}")));
        let mut csv = Csv::new(&header);
        for (k, p) in populations.iter().enumerate() {
            let m = marginals(&ProbabilityVector::new(p.clone())?, length)?;
            csv.row(&k.to_string(), m.as_slice().iter().copied());
        }
        out.add("marginals.csv", csv.into_string());
    }
    Ok(())
}

#[derive(Serialize)]
struct SizeEntry {
    #[serde(rename = "L")]
    length: usize,
    report: crate::transitions::TransitionReport,
}

fn locate(config: &ExperimentConfig, out: &mut OutputSet) -> Result<()> {
    match config.scan.unwrap_or_default() {
        ScanKind::Beta => {
            let report = locate_crossing(&config.family()?, config.window()?, config.q()?)?;
            out.add_json("locate.json", &report)
        }
        ScanKind::Qc => {
            let report = locate_qc(&config.family()?, config.window()?)?;
            out.add_json("locate.json", &report)
        }
        ScanKind::Size => {
            if config.model != ModelKind::Coined {
                return Err(Error::Config("size scan applies to the coined model".into()));
            }
            let lengths = config.lengths.clone().unwrap_or_else(|| vec![3, 4, 5]);
            let entries: Vec<SizeEntry> = size_scan(&lengths)?
                .into_iter()
                .map(|(length, report)| SizeEntry { length, report })
                .collect();
            out.add_json("locate.json", &entries)
        }
    }
}
