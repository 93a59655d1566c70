//! Command-line front end. `run` returns the report text and the exit code so
//! the binary stays a thin wrapper and tests can drive every subcommand.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bigrid::{DyadicRect, Geometry};
use crate::constructions::{
    carleson_family_weight, default_embedding_delta, default_rec_delta, embedding_example, potential_example,
    rec_example, simple_example, Instance,
};
use crate::error::{Error, Result};
use crate::functionals::oracle::{brute_box, brute_carleson, brute_rec, oracle_energy, ENERGY_ORACLE_DEPTH, SUBSET_ORACLE_DEPTH};
use crate::functionals::{
    box_constant, carleson_constant, energy, potential, rec_constant, ConstantReport,
};
use crate::io;
use crate::maximal::{argmax_decomposition, maximal_function, maximal_norm_lower_bound, sparse_selection, weight_from_function};
use crate::measure::Measure;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::report::{Relation, RunReport};
use crate::verify::{self, constants_report, Fits, DOR_INSTANCES};
use crate::weight::Weight;

#[derive(Parser, Debug)]
#[command(name = "bicarleson", version, about = "Carleson-type conditions on finite dyadic bi-trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Simple,
    Potential,
    Rec,
    Embedding,
    Family,
    Dor,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct InstanceArgs {
    /// Depth parameter (a power of two for the staircase examples)
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Alternative to `--N`: N = 2^M
    #[arg(long = "M")]
    pub m: Option<u32>,
    /// Number of intermediate scales (embedding example)
    #[arg(long = "K")]
    pub k: Option<u32>,
    /// Mass scale as p/q
    #[arg(long)]
    pub delta: Option<String>,
    /// JSON list of rectangles (family example)
    #[arg(long = "family-file")]
    pub family_file: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct FileArgs {
    /// Manifest written by `construct`
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Geometry depth; defaults to the finest level in the measure file
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write measure, weight, and set files of a construction
    Construct {
        #[arg(long, value_enum)]
        example: Example,
        #[command(flatten)]
        params: InstanceArgs,
        /// Output directory
        #[arg(long, default_value = "instance")]
        out: PathBuf,
    },
    /// Run the inequality battery of an example; exit code 0 iff every check holds
    Verify {
        #[arg(long, value_enum)]
        example: Example,
        #[command(flatten)]
        params: InstanceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fitted constant for the REC example's Carleson bound
        #[arg(long = "c-fit")]
        c_fit: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box, Carleson, REC, and embedding constants of a measure and weight
    Constants {
        #[command(flatten)]
        files: FileArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Potential at given rectangles and the energy
    Potential {
        #[command(flatten)]
        files: FileArgs,
        /// Rectangles `x:l/i,y:l/i`
        #[arg(long = "at")]
        at: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strong maximal function, argmax weight, and norm ascent
    Maximal {
        #[command(flatten)]
        files: FileArgs,
        /// Step function file `[{rect, value}]`
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fractional sparse selection or an infeasibility certificate
    Sparse {
        #[command(flatten)]
        files: FileArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced searches against brute-force enumeration at small depth
    Oracle {
        #[command(flatten)]
        files: FileArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Report text and exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
    pub out: Option<PathBuf>,
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    fn report(r: RunReport, out: Option<PathBuf>) -> Self {
        let code = if r.all_hold() { 0 } else { 1 };
        Self { text: r.to_json(), code, out, timings: r.timings }
    }
}

fn delta_of(p: &InstanceArgs) -> Result<Option<Rational>> {
    p.delta.as_deref().map(parse_rational).transpose()
}

fn n_of(p: &InstanceArgs) -> Result<u64> {
    match (p.n, p.m) {
        (Some(n), _) => Ok(n),
        (None, Some(m)) if m < 63 => Ok(1u64 << m),
        _ => Err(Error::BadParameter("--N (or --M) is required".into())),
    }
}

fn family_of(p: &InstanceArgs) -> Result<Vec<DyadicRect>> {
    let f = p.family_file.as_ref().ok_or_else(|| Error::BadParameter("--family-file is required".into()))?;
    io::rects_from_json(&io::read(f)?)
}

pub fn build_instance(example: Example, p: &InstanceArgs) -> Result<Instance> {
    let delta = delta_of(p)?;
    match example {
        Example::Simple => simple_example(n_of(p)?),
        Example::Potential => {
            let n = n_of(p)?;
            potential_example(n, &delta.unwrap_or_else(|| default_rec_delta(n)))
        }
        Example::Rec => {
            let n = n_of(p)?;
            rec_example(n, &delta.unwrap_or_else(|| default_rec_delta(n)))
        }
        Example::Embedding => {
            let n = n_of(p)?;
            embedding_example(n, &delta.unwrap_or_else(|| default_embedding_delta(n)), p.k.unwrap_or(1))
        }
        Example::Family => carleson_family_weight(&family_of(p)?),
        Example::Dor => Err(Error::BadParameter("the dor battery has no instance files".into())),
    }
}

struct Loaded {
    geometry: Geometry,
    mu: Measure,
    alpha: Weight,
}

fn load(files: &FileArgs) -> Result<Loaded> {
    if let Some(m) = &files.instance {
        let inst = io::read_instance(m)?;
        return Ok(Loaded { geometry: inst.geometry, mu: inst.test_measure().clone(), alpha: inst.alpha });
    }
    let mpath = files.measure.as_ref().ok_or_else(|| Error::BadParameter("--measure or --instance is required".into()))?;
    let mu = io::measure_from_json(&io::read(mpath)?, files.depth.map(Geometry::new))?;
    let weight_text = match &files.weight {
        Some(w) => io::read(w)?,
        None => "[]".to_string(),
    };
    let alpha = io::weight_from_json(&weight_text)?;
    let depth = mu.geometry().depth.max(alpha.max_level());
    let geometry = Geometry::new(files.depth.unwrap_or(depth));
    for r in alpha.rects() {
        geometry.check(r)?;
    }
    let mu = mu.with_geometry(geometry)?;
    Ok(Loaded { geometry, mu, alpha })
}

fn cmd_construct(example: Example, p: &InstanceArgs, out: &Path) -> Result<Outcome> {
    let inst = build_instance(example, p)?;
    let manifest = io::write_instance(&inst, out)?;
    let summary = json!({
        "manifest": manifest.to_string_lossy(),
        "params": io::params_value(&inst.params),
        "depth": inst.geometry.depth,
        "atoms": inst.mu.atoms().len(),
        "test_measure_atoms": inst.nu.as_ref().map(|n| n.atoms().len()),
        "weight_entries": inst.alpha.len(),
        "sets": inst.sets.keys().collect::<Vec<_>>(),
    });
    Ok(Outcome { text: serde_json::to_string_pretty(&summary)?, code: 0, out: None, timings: Vec::new() })
}

fn cmd_verify(example: Example, p: &InstanceArgs, seed: u64, c_fit: Option<&str>) -> Result<RunReport> {
    let mut fits = Fits::default();
    if let Some(c) = c_fit {
        fits.carleson = parse_rational(c)?;
    }
    match example {
        Example::Simple => verify::verify_simple(n_of(p)?),
        Example::Potential => verify::verify_potential(n_of(p)?, delta_of(p)?, seed, &fits),
        Example::Rec => verify::verify_rec(n_of(p)?, delta_of(p)?, &fits),
        Example::Embedding => verify::verify_embedding(n_of(p)?, delta_of(p)?, p.k.unwrap_or(1), seed, &fits),
        Example::Family => verify::verify_family(&family_of(p)?),
        Example::Dor => {
            let n = u32::try_from(n_of(p)?).map_err(|_| Error::BadParameter("N too large".into()))?;
            verify::verify_dor(n, seed, DOR_INSTANCES)
        }
    }
}

fn cmd_constants(files: &FileArgs) -> Result<RunReport> {
    let l = load(files)?;
    let mut report = RunReport::new("constants", json!({ "depth": l.geometry.depth }), None);
    constants_report(&mut report, &l.alpha, &l.mu, &[], true)?;
    Ok(report)
}

fn cmd_potential(files: &FileArgs, at: &[String]) -> Result<RunReport> {
    let l = load(files)?;
    let mut report = RunReport::new("potential", json!({ "depth": l.geometry.depth }), None);
    report.value("energy", &energy(&l.alpha, &l.mu, &l.mu));
    for s in at {
        let r: DyadicRect = s.parse()?;
        l.geometry.check(&r)?;
        report.value(format!("V({r})"), &potential(&l.alpha, &l.mu, &r));
    }
    Ok(report)
}

fn cmd_maximal(files: &FileArgs, function: &Path, rounds: usize) -> Result<RunReport> {
    let l = load(files)?;
    let psi = io::step_function_from_json(&io::read(function)?)?;
    let mut report = RunReport::new("maximal", json!({ "depth": l.geometry.depth, "rounds": rounds }), None);
    let m = report.timed("maximal", || maximal_function(&l.mu, &psi, &l.geometry))?;
    let dec = argmax_decomposition(&l.mu, &psi, &l.geometry)?;
    let alpha = weight_from_function(&l.mu, &psi, &l.geometry)?;
    let seq = report.timed("ascent", || maximal_norm_lower_bound(&l.mu, &psi, &l.geometry, rounds))?;
    let (lhs, rhs) = crate::maximal::backward_identity(&l.mu, &psi, &l.geometry)?;
    report.check("backward identity", lhs, Relation::Eq, rhs.clone());
    report.value("maximal square integral", &rhs);
    let c = carleson_constant(&alpha, &l.mu)?;
    report.check("constructed weight carleson <= 1", c.lower.clone(), Relation::Le, Rational::from_integer(1.into()));
    report.constant(c);
    let weight: Vec<_> = alpha.iter().map(|(r, v)| json!({ "rect": r, "value": format_rational(v) })).collect();
    report.detail = Some(json!({
        "maximal": m,
        "classes": dec.classes,
        "weight": weight,
        "ascent": seq.iter().map(format_rational).collect::<Vec<_>>(),
    }));
    Ok(report)
}

fn cmd_sparse(files: &FileArgs) -> Result<RunReport> {
    let l = load(files)?;
    let mut report = RunReport::new("sparse", json!({ "depth": l.geometry.depth }), None);
    let sel = report.timed("selection", || sparse_selection(&l.alpha, &l.mu))?;
    report.detail = Some(serde_json::to_value(&sel)?);
    Ok(report)
}

fn cmd_oracle(files: &FileArgs) -> Result<RunReport> {
    let l = load(files)?;
    let g = l.geometry;
    let mut report = RunReport::new("oracle", json!({ "depth": g.depth }), None);
    if g.depth <= ENERGY_ORACLE_DEPTH {
        report.check("energy = oracle", energy(&l.alpha, &l.mu, &l.mu), Relation::Eq, oracle_energy(&l.alpha, &l.mu, &l.mu, &g)?);
        report.check("box = brute force", box_constant(&l.alpha, &l.mu).lower, Relation::Eq, brute_box(&l.alpha, &l.mu, &g)?);
    }
    if g.depth <= SUBSET_ORACLE_DEPTH {
        let c: ConstantReport = carleson_constant(&l.alpha, &l.mu)?;
        report.check("carleson = brute force", c.lower.clone(), Relation::Eq, brute_carleson(&l.alpha, &l.mu, &g)?.0);
        let r = rec_constant(&l.alpha, &l.mu)?;
        report.check("rec = brute force", r.lower.clone(), Relation::Eq, brute_rec(&l.alpha, &l.mu, &g)?.0);
    }
    if report.checks.is_empty() {
        return Err(Error::CapExceeded { size: g.depth as usize, cap: ENERGY_ORACLE_DEPTH as usize });
    }
    Ok(report)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Construct { example, params, out } => cmd_construct(*example, params, out),
        Command::Verify { example, params, seed, c_fit, out } => {
            Ok(Outcome::report(cmd_verify(*example, params, *seed, c_fit.as_deref())?, out.clone()))
        }
        Command::Constants { files, out } => Ok(Outcome::report(cmd_constants(files)?, out.clone())),
        Command::Potential { files, at, out } => Ok(Outcome::report(cmd_potential(files, at)?, out.clone())),
        Command::Maximal { files, function, rounds, out } => {
            Ok(Outcome::report(cmd_maximal(files, function, *rounds)?, out.clone()))
        }
        Command::Sparse { files, out } => Ok(Outcome::report(cmd_sparse(files)?, out.clone())),
        Command::Oracle { files, out } => Ok(Outcome::report(cmd_oracle(files)?, out.clone())),
    }
}

/// Parses `args`, runs the command, writes the report, and returns the exit code.
/// Timings and failures go to stderr, never into the report.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            for (label, secs) in &o.timings {
                eprintln!("time {label}: {secs:.3}s");
            }
            let written = match &o.out {
                Some(p) => std::fs::write(p, format!("{}\n", o.text)).map_err(Error::from),
                None => {
                    println!("{}", o.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if o.code != 0 {
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(&o.text) {
                    if let Some(name) = v["checks"].as_array().and_then(|cs| cs.iter().find(|c| c["holds"] == false)).map(|c| c["name"].clone()) {
                        eprintln!("failed: {}", name.as_str().unwrap_or_default());
                    }
                }
            }
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
