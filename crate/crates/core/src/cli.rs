//! Command line front end. Every command returns its output and exit code so
//! that it can be driven in-process.
//!
//! Exit codes: 0 success, 1 a verification found a mismatch, 2 usage, parse
//! or precondition error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cells::{Cell, CellRecord};
use crate::classify::{
    bijection_exists_p, bijection_exists_q, construct_bijection_q, count_lambda_n, verify_bijection_q,
};
use crate::error::Error;
use crate::formula::{parse_with, Assignment, Formula, ScalarField};
use crate::gen::Gen;
use crate::grid::Grid;
use crate::lambda::LambdaSort;
use crate::padic::Prime;
use crate::qe::{eliminate_all, to_cells, Oracle};
use crate::skolem::{synthesize_section, verify_section};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Scalars {
    #[default]
    Q,
    Z,
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// The prime p.
    #[arg(long, global = true, default_value_t = 3)]
    pub p: u64,
    /// Default sort Λ_{n,m}: n.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: u32,
    /// Default sort Λ_{n,m}: m.
    #[arg(long, global = true, default_value_t = 1)]
    pub m: u32,
    /// Valuation window of test grids.
    #[arg(long, global = true, default_value_t = 8)]
    pub window: i64,
    /// Unit digits of test grids.
    #[arg(long, global = true, default_value_t = 2)]
    pub digits: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Request disjoint cells (the cell output is always disjoint).
    #[arg(long, global = true)]
    pub disjoint: bool,
    /// Scalar field for variable coefficients.
    #[arg(long, global = true, value_enum, default_value_t = Scalars::Q)]
    pub scalars: Scalars,
    /// Largest number of grid points checked per formula; larger grids are
    /// sampled with the seed.
    #[arg(long, global = true, default_value_t = 2000)]
    pub points: usize,
}

impl RunConfig {
    pub fn prime(&self) -> Result<Prime, Error> {
        Prime::new(self.p)
    }

    fn field(&self) -> ScalarField {
        match self.scalars {
            Scalars::Q => ScalarField::Rationals,
            Scalars::Z => ScalarField::Integers,
        }
    }

    fn grid(&self) -> Result<Grid, Error> {
        Ok(Grid::new(self.prime()?, self.window, self.digits))
    }

    /// Grid points over `vars`, sampled down to `self.points`.
    fn points(&self, vars: &[String], salt: u64) -> Result<Vec<Assignment>, Error> {
        let grid = self.grid()?;
        let per_var = grid.offsets().len() as f64;
        if per_var.powi(vars.len() as i32) <= self.points as f64 {
            return Ok(grid.points(vars));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        Ok(grid.sample_points(vars, self.points, &mut rng))
    }
}

#[derive(Debug, Parser)]
#[command(name = "semiaffine", version, about = "Cells, quantifier elimination, sections and classification over Q_p")]
pub struct Cli {
    #[command(flatten)]
    pub cfg: RunConfig,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eliminate quantifiers and decompose the result into cells.
    Qe { formula: String },
    /// Compare the eliminated formula with the witness oracle on the grid.
    /// Without a formula, a seeded random corpus is checked.
    Check {
        formula: Option<String>,
        /// Corpus size.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Synthesize and verify a section of a cell given as JSON (or @file).
    Skolem { cell: String },
    /// Classification questions.
    Classify {
        #[command(subcommand)]
        what: ClassifyCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClassifyCmd {
    /// Count the n-th power classes Λ_n (uses --n).
    Count,
    /// Bijection between Q_{n,m} and Q_{n2,m2}.
    Q { n: u32, m: u32, n2: u32, m2: u32 },
    /// Bijection between P_n and P_{n2}.
    P { n: u32, n2: u32 },
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Outcome {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

/// `qe`: the quantifier-free equivalent and its cells along the last free
/// variable.
pub fn cmd_qe(text: &str, cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.prime()?;
    let phi = parse_with(text, p, cfg.field())?;
    let qf = eliminate_all(&phi, p)?;
    let vars: Vec<String> = qf.free_vars().into_iter().collect();
    let cells = match vars.split_last() {
        Some((t, xs)) => Some(to_cells(&qf, t, xs, p)?.to_record()),
        None => None,
    };
    let out = match cfg.format {
        Format::Json => pretty(&json!({
            "input": phi.to_text(p),
            "qf": qf.to_text(p),
            "cells": cells,
        })),
        Format::Text => {
            let mut s = format!("{}\n", qf.to_text(p));
            if let Some(u) = cells {
                s += &format!("cells in ({}) along {}: {}\n", u.vars.join(", "), u.var, u.cells.len());
                for c in &u.cells {
                    s += &serde_json::to_string(c).expect("json");
                    s.push('\n');
                }
            }
            s
        }
    };
    Ok(Outcome::ok(out))
}

/// Margin of witness orders for the oracle on `phi`.
pub fn oracle_margin(phi: &Formula) -> i64 {
    2 + phi.sorts().iter().map(|s| (s.n + s.m) as i64).max().unwrap_or(2)
}

struct CheckLine {
    input: String,
    qf: String,
    points: usize,
    mismatches: Vec<Assignment>,
}

fn check_one(phi: &Formula, cfg: &RunConfig, salt: u64) -> Result<CheckLine, Error> {
    let p = cfg.prime()?;
    let qf = eliminate_all(phi, p)?;
    let oracle = Oracle::new(p, oracle_margin(phi));
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let pts = cfg.points(&vars, salt)?;
    let mut mismatches = Vec::new();
    for s in &pts {
        if qf.eval(s, p)? != oracle.eval(phi, s)? {
            mismatches.push(s.clone());
        }
    }
    Ok(CheckLine {
        input: phi.to_text(p),
        qf: qf.to_text(p),
        points: pts.len(),
        mismatches,
    })
}

fn show_point(s: &Assignment) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// The seeded corpus of `check` without a formula.
pub fn corpus(cfg: &RunConfig, count: usize) -> Result<Vec<Formula>, Error> {
    let p = cfg.prime()?;
    let sorts = [LambdaSort::new(p, cfg.n, cfg.m)?, LambdaSort::new(p, 1, 1)?];
    let mut gen = Gen::new(p, cfg.seed);
    let names = ["x", "y"].map(String::from);
    let mut out = Vec::new();
    for i in 0..count {
        let xv = &names[..1 + i % 2];
        let q = ["t".to_string(), "s".to_string()];
        let depth = if i % 4 == 3 { 2 } else { 1 };
        out.push(gen.formula(xv, &q[..depth], &sorts, 2));
    }
    Ok(out)
}

/// `check`: eliminated formula versus the oracle at grid points.
pub fn cmd_check(text: Option<&str>, count: usize, cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.prime()?;
    let formulas = match text {
        Some(t) => vec![parse_with(t, p, cfg.field())?],
        None => corpus(cfg, count)?,
    };
    let mut lines = Vec::new();
    for (i, phi) in formulas.iter().enumerate() {
        lines.push(check_one(phi, cfg, i as u64)?);
    }
    let bad: usize = lines.iter().map(|l| l.mismatches.len()).sum();
    let total: usize = lines.iter().map(|l| l.points).sum();
    let out = match cfg.format {
        Format::Json => pretty(&json!({
            "formulas": lines.iter().map(|l| json!({
                "input": l.input,
                "qf": l.qf,
                "points": l.points,
                "mismatches": l.mismatches.iter().map(show_point).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "points": total,
            "mismatches": bad,
        })),
        Format::Text => {
            let mut s = String::new();
            for l in &lines {
                s += &format!("{}\n  qf: {}\n  {} mismatches / {} points\n", l.input, l.qf, l.mismatches.len(), l.points);
                for m in l.mismatches.iter().take(5) {
                    s += &format!("  mismatch at {}\n", show_point(m));
                }
            }
            if lines.len() > 1 {
                s += &format!("total: {bad} mismatches / {total} points\n");
            }
            s
        }
    };
    Ok(Outcome {
        code: if bad == 0 { 0 } else { 1 },
        stdout: out,
        stderr: String::new(),
    })
}

/// `skolem`: a section of the cell and its verification on the grid.
pub fn cmd_skolem(cell_json: &str, cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.prime()?;
    let text = match cell_json.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?,
        None => cell_json.to_string(),
    };
    let rec: CellRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
        pos: e.column(),
        msg: e.to_string(),
    })?;
    let cell = Cell::from_record(&rec, p)?;
    let g = synthesize_section(&cell, cfg.field())?;
    let rep = verify_section(&g, &cell, &cfg.points(&cell.xvars, 0)?)?;
    let out = match cfg.format {
        Format::Json => pretty(&json!({ "section": g.to_record(p), "report": rep })),
        Format::Text => {
            let mut s = String::new();
            for pc in &g.pieces {
                let comps: Vec<String> = pc.components.iter().map(|f| crate::formula::poly_to_string(f, p)).collect();
                s += &format!("if {} then ({})\n", pc.guard.to_text(p), comps.join(", "));
            }
            s += &format!(
                "{} violations / {} points ({} in the projection)\n",
                rep.violations.len(),
                rep.points,
                rep.in_projection
            );
            for v in rep.violations.iter().take(5) {
                s += &format!("  {v}\n");
            }
            s
        }
    };
    Ok(Outcome {
        code: if rep.ok() { 0 } else { 1 },
        stdout: out,
        stderr: String::new(),
    })
}

/// `classify`.
pub fn cmd_classify(what: &ClassifyCmd, cfg: &RunConfig) -> Result<Outcome, Error> {
    let p = cfg.prime()?;
    let json_out = cfg.format == Format::Json;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let out = match *what {
        ClassifyCmd::Count => {
            let t = count_lambda_n(p, cfg.n)?;
            if json_out {
                pretty(&json!(t))
            } else {
                format!("p n #Lambda_n\n{} {} {}\nrepresentatives: {:?}\n", t.p, t.n, t.count, t.representatives)
            }
        }
        ClassifyCmd::Q { n, m, n2, m2 } => {
            let v = bijection_exists_q(p, n, m, n2, m2);
            let why = if m >= m2 {
                format!("n2 = {n2}, n*p^(m-m2) = {n}*{p}^{}", m - m2)
            } else {
                format!("n = {n}, n2*p^(m2-m) = {n2}*{p}^{}", m2 - m)
            };
            let check = if v {
                let (f, g) = construct_bijection_q(p, n, m, n2, m2)?;
                let rep = verify_bijection_q(&f, &g, p, (n, m), (n2, m2), cfg.window)?;
                Some((f.to_record(p), rep))
            } else {
                None
            };
            if json_out {
                pretty(&json!({ "bijection": v, "arithmetic": why, "map": check.as_ref().map(|c| &c.0), "report": check.as_ref().map(|c| &c.1) }))
            } else {
                let mut s = format!("{} ({why})\n", yes(v));
                if let Some((f, rep)) = &check {
                    for pc in &f.pieces {
                        s += &format!("if {} then {}\n", pc.guard, pc.components.join(", "));
                    }
                    s += &format!("{} violations / {} classes, {} points\n", rep.violations.len(), rep.classes, rep.points);
                }
                s
            }
        }
        ClassifyCmd::P { n, n2 } => {
            let v = bijection_exists_p(p, n, n2)?;
            let (a, b) = (count_lambda_n(p, n)?.count, count_lambda_n(p, n2)?.count);
            let why = format!("#Lambda_{n} = {a}, #Lambda_{n2} = {b}");
            if json_out {
                pretty(&json!({ "bijection": v, "arithmetic": why }))
            } else {
                format!("{} ({why})\n", yes(v))
            }
        }
    };
    Ok(Outcome::ok(out))
}

/// Runs a parsed command line.
pub fn dispatch(cli: &Cli) -> Outcome {
    let r = match &cli.cmd {
        Command::Qe { formula } => cmd_qe(formula, &cli.cfg),
        Command::Check { formula, count } => cmd_check(formula.as_deref(), *count, &cli.cfg),
        Command::Skolem { cell } => cmd_skolem(cell, &cli.cfg),
        Command::Classify { what } => cmd_classify(what, &cli.cfg),
    };
    r.unwrap_or_else(|e| Outcome::error(&e))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            Outcome {
                code,
                stdout: if code == 0 { text.clone() } else { String::new() },
                stderr: if code == 0 { String::new() } else { text },
            }
        }
    }
}
