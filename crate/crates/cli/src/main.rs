use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqih::classify::{self, ModelIso};
use eqih::equivariant::{self, default_nu, Equivariant};
use eqih::homalg::check_exact;
use eqih::localize::{self, LambdaUModule};
use eqih::model::{validate, Model, Perversity};
use eqih::perverse::PerverseData;
use eqih::ratla::{fmt_rational, Matrix};
use eqih::spectral::{self, BasicSpectral};
use eqih::{fixtures, selftest, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

const SCHEMA: &str = "eqih-report/1";

#[derive(Parser)]
#[command(name = "eqih", version, about = "Equivariant intersection cohomology of modelled circle actions")]
struct Cli {
    /// Print a readable summary instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model axioms.
    Validate {
        file: Option<PathBuf>,
        /// Also check the Euler filtration bound, levels within degree and
        /// product compatibility.
        #[arg(long)]
        strict: bool,
    },
    /// IH_p(B) and IH_p(X) with the Gysin sequence check.
    Cohomology {
        file: Option<PathBuf>,
        #[arg(short, long = "perversity", allow_hyphen_values = true)]
        p: String,
    },
    /// Gysin term, co-Gysin complex, both long exact sequences and eub.
    Gysin {
        file: Option<PathBuf>,
        #[arg(short, long = "perversity", allow_hyphen_values = true)]
        p: String,
    },
    /// Equivariant cohomology as a module over Q[u].
    Equivariant {
        file: Option<PathBuf>,
        #[arg(short, long = "perversity", allow_hyphen_values = true)]
        p: String,
        /// Truncation degree (default: top degree + 6).
        #[arg(long)]
        nu: Option<usize>,
    },
    /// Pages of the basic spectral sequence.
    Spectral {
        file: Option<PathBuf>,
        #[arg(short, long = "perversity", allow_hyphen_values = true)]
        p: String,
        /// Report pages 0..=R (default: all computed pages).
        #[arg(long)]
        pages: Option<usize>,
        /// Compare d3 with the composite formula.
        #[arg(long)]
        d3_check: bool,
    },
    /// The Skjelbred sequence at the zero perversity.
    Skjelbred { file: Option<PathBuf> },
    /// Ranks after inverting u and the localized Gysin sequence.
    Localize {
        file: Option<PathBuf>,
        #[arg(short, long = "perversity", allow_hyphen_values = true)]
        p: String,
        /// Compare with the cone formula.
        #[arg(long)]
        cone_check: bool,
    },
    /// Compare two models through an isomorphism.
    Compare {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        iso: PathBuf,
    },
    /// Write a built-in model as JSON.
    Fixture {
        /// HOPF, ROT, CONE2, NOPERV or RANDOM(seed,size).
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Check the models on all cores.
        #[arg(long)]
        parallel: bool,
    },
}

enum Failure {
    Input(String),
    Property(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Property(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(bool, Value), Failure>;

fn read_input(file: Option<&Path>) -> std::result::Result<String, Failure> {
    let mut text = String::new();
    match file {
        Some(path) => {
            text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        }
        None => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn parse_model(file: Option<&Path>) -> std::result::Result<Model, Failure> {
    Ok(Model::from_json(&read_input(file)?)?)
}

/// A model that satisfies the basic axioms; anything else is an input error.
fn load_model(file: Option<&Path>) -> std::result::Result<Model, Failure> {
    let m = parse_model(file)?;
    let report = validate(&m, false);
    if let Some(bad) = report.failed().first() {
        return Err(Failure::Input(format!("invalid model: {} ({})", bad.axiom, bad.detail)));
    }
    Ok(m)
}

fn perversity(m: &Model, s: &str) -> std::result::Result<Perversity, Failure> {
    let p = Perversity::parse(s)?;
    m.check_perversity(&p)?;
    Ok(m.normalize(&p))
}

fn matrix_json(m: &Matrix) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "entries": (0..m.rows()).map(|r| m.row(r).iter().map(fmt_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn cohomology(m: &Model, p: &Perversity) -> Outcome {
    let data = PerverseData::build(m, p)?;
    let eq1 = equivariant::build_eq1(m, p, &data)?;
    let les = equivariant::gysin_les(m, &data, &eq1)?;
    let pass = les.exactness.pass && les.connecting_is_eub;
    Ok((
        pass,
        json!({
            "perversity": p.to_string(),
            "ih_b": data.h_omega.dims(),
            "ih_x": les.ih_x,
            "gysin_exact": les.exactness.pass,
            "connecting_is_eub": les.connecting_is_eub,
        }),
    ))
}

fn gysin(m: &Model, p: &Perversity) -> Outcome {
    let data = PerverseData::build(m, p)?;
    let eq1 = equivariant::build_eq1(m, p, &data)?;
    let les = equivariant::gysin_les(m, &data, &eq1)?;
    let co = check_exact(&data.cogysin_les.sequence);
    let pass = les.exactness.pass && les.connecting_is_eub && co.pass;
    Ok((
        pass,
        json!({
            "perversity": p.to_string(),
            "ih_b": data.h_omega.dims(),
            "h_gysin": data.h_gysin.dims(),
            "h_cogysin": data.h_cogysin.dims(),
            "eub": data.eub.iter().map(matrix_json).collect::<Vec<_>>(),
            "gysin_sequence": {
                "exactness": to_value(&les.exactness),
                "connecting_is_eub": les.connecting_is_eub,
                "ih_x": les.ih_x,
            },
            "cogysin_sequence": {
                "exactness": to_value(&co),
                "connecting": data.cogysin_les.connecting.iter().map(matrix_json).collect::<Vec<_>>(),
            },
        }),
    ))
}

fn equivariant_report(m: &Model, p: &Perversity, nu: Option<usize>) -> Outcome {
    let nu = nu.unwrap_or_else(|| default_nu(m));
    let data = PerverseData::build(m, p)?;
    let eq = Equivariant::build(m, p, &data, nu)?;
    let eg = equivariant::equivariant_gysin(m, &data, &eq)?;
    let pass = eg.exactness.pass && eg.decomposition_ok() && eg.u_linear && eg.maps_commute_with_u;
    Ok((
        pass,
        json!({
            "perversity": p.to_string(),
            "nu": nu,
            "dims": eq.dims(),
            "u_ranks": eq.u_ranks(),
            "equivariant_gysin": {
                "exactness": to_value(&eg.exactness),
                "decomposition": to_value(&eg.decomposition),
                "u_linear": eg.u_linear,
                "maps_commute_with_u": eg.maps_commute_with_u,
            },
        }),
    ))
}

fn spectral_report(m: &Model, p: &Perversity, pages: Option<usize>, d3: bool) -> Outcome {
    let data = PerverseData::build(m, p)?;
    let eq = Equivariant::build(m, p, &data, default_nu(m))?;
    let bs = BasicSpectral::compute(m, p, &data, &eq, None)?;
    let last = bs.ss.pages.len() - 1;
    let shown = pages.map_or(last, |r| r.min(last));
    let page_json: Vec<Value> = (0..=shown)
        .map(|r| {
            let page = bs.ss.page(r);
            let cells: Vec<Value> =
                page.dims_table().into_iter().map(|((i, j), d)| json!({"i": i, "j": j, "dim": d})).collect();
            json!({"r": r, "cells": cells})
        })
        .collect();
    let props = bs.properties(&eq);
    let mut pass = props.iter().all(|c| c.pass);
    let mut body = json!({
        "perversity": p.to_string(),
        "nmax": bs.nmax,
        "pages": page_json,
        "e_infinity_total": (0..=bs.nmax).map(|n| bs.ss.e_inf_total(n)).collect::<Vec<_>>(),
        "properties": to_value(&props),
    });
    if d3 {
        let cells = bs.d3_check(&data)?;
        pass &= cells.iter().all(|c| c.pass);
        body["d3"] = to_value(&cells);
    }
    Ok((pass, body))
}

fn skjelbred_report(m: &Model) -> Outcome {
    let zero = m.normalize(&m.zero_perversity());
    let data = PerverseData::build(m, &zero)?;
    if !spectral::skjelbred_eligible(&data) {
        return Err(Failure::Input("the Gysin term at the zero perversity differs from Ω_{−x̄}".into()));
    }
    let eq = Equivariant::build(m, &zero, &data, default_nu(m))?;
    let bs = BasicSpectral::compute(m, &zero, &data, &eq, None)?;
    let sk = spectral::skjelbred(m, &data, &eq, &bs)?;
    let pass = sk.exactness.pass && sk.lemma_checks.iter().all(|c| c.pass);
    Ok((
        pass,
        json!({
            "perversity": zero.to_string(),
            "h_k0": data.h_cogysin.dims(),
            "exactness": to_value(&sk.exactness),
            "beta_is_zero": sk.beta_is_zero,
            "lemma_checks": to_value(&sk.lemma_checks),
        }),
    ))
}

fn localize_report(m: &Model, p: &Perversity, cone: bool) -> Outcome {
    let nu = default_nu(m);
    let data = PerverseData::build(m, p)?;
    let eq = Equivariant::build(m, p, &data, nu)?;
    let module = LambdaUModule::from_equivariant(&eq);
    let il = localize::localize(&module)?;
    let eg = equivariant::equivariant_gysin(m, &data, &eq)?;
    let lg = localize::localized_gysin(&data, &il, &eg, nu)?;
    let (even, odd) = il.ranks();
    let mut pass = lg.pass;
    let mut body = json!({
        "perversity": p.to_string(),
        "even": even,
        "odd": odd,
        "stable_from": module.stable_from,
        "localized_gysin": to_value(&lg),
    });
    if cone {
        let check = localize::cone_formula_check(m, p, &il)?;
        pass &= check.pass;
        body["cone"] = to_value(&check);
    }
    Ok((pass, body))
}

fn compare(f1: &Path, f2: &Path, iso: &Path) -> Outcome {
    let m1 = load_model(Some(f1))?;
    let m2 = load_model(Some(f2))?;
    let iso = ModelIso::from_json(&read_input(Some(iso))?)?;
    iso.check(&m1, &m2)?;
    let optimal = classify::is_optimal(&iso, &m1, &m2)?;
    if !optimal {
        return Err(Failure::Input("the isomorphism does not preserve perverse strata".into()));
    }
    let rel = classify::f_related(&iso, &m1, &m2)?;
    if !rel.related {
        return Err(Failure::Input(format!("the Euler classes are not related: {}", rel.discrepancy.join(", "))));
    }
    let report = classify::consequence_check(&iso, &m1, &m2)?;
    Ok((report.pass, json!({"optimal": optimal, "relatedness": to_value(&rel), "consequence": to_value(&report)})))
}

fn fixture(name: &str, output: Option<&Path>) -> std::result::Result<(), Failure> {
    let m = fixtures::make(name)?;
    let text = m.to_json();
    match output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn selftest_report(seeds: u64, parallel: bool) -> Outcome {
    let criteria = if parallel {
        selftest::run_suite(seeds, |ms| ms.par_iter().map(selftest::check_model).collect())
    } else {
        selftest::run_sequential(seeds)
    };
    let pass = criteria.iter().all(|c| c.pass);
    let lines: Vec<String> = criteria.iter().map(|c| c.line()).collect();
    Ok((pass, json!({"seeds": seeds, "criteria": to_value(&criteria), "summary": lines})))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { file, strict } => {
            let m = parse_model(file.as_deref())?;
            let report = validate(&m, *strict);
            Ok((report.pass, json!({"model": m.name, "validation": to_value(&report)})))
        }
        Command::Cohomology { file, p } => {
            let m = load_model(file.as_deref())?;
            cohomology(&m, &perversity(&m, p)?)
        }
        Command::Gysin { file, p } => {
            let m = load_model(file.as_deref())?;
            gysin(&m, &perversity(&m, p)?)
        }
        Command::Equivariant { file, p, nu } => {
            let m = load_model(file.as_deref())?;
            equivariant_report(&m, &perversity(&m, p)?, *nu)
        }
        Command::Spectral { file, p, pages, d3_check } => {
            let m = load_model(file.as_deref())?;
            spectral_report(&m, &perversity(&m, p)?, *pages, *d3_check)
        }
        Command::Skjelbred { file } => skjelbred_report(&load_model(file.as_deref())?),
        Command::Localize { file, p, cone_check } => {
            let m = load_model(file.as_deref())?;
            localize_report(&m, &perversity(&m, p)?, *cone_check)
        }
        Command::Compare { file1, file2, iso } => compare(file1, file2, iso),
        Command::Fixture { .. } | Command::Selftest { .. } => unreachable!("handled in main"),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Cohomology { .. } => "cohomology",
        Command::Gysin { .. } => "gysin",
        Command::Equivariant { .. } => "equivariant",
        Command::Spectral { .. } => "spectral",
        Command::Skjelbred { .. } => "skjelbred",
        Command::Localize { .. } => "localize",
        Command::Compare { .. } => "compare",
        Command::Fixture { .. } => "fixture",
        Command::Selftest { .. } => "selftest",
    }
}

fn human(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if x.is_object() || (x.is_array() && !is_flat(x)) {
                    out.push_str(&format!("{pad}{k}:\n"));
                    human(x, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(x)));
                }
            }
        }
        Value::Array(xs) if !is_flat(v) => {
            for x in xs {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    human(x, indent + 1, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", inline(v))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(xs) => xs.iter().all(|x| !x.is_object() && !x.as_str().is_some_and(|s| s.contains(' ')) && is_flat(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) => format!("[{}]", xs.iter().map(inline).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn emit(cli: &Cli, status: &str, body: Value) {
    let report = json!({
        "schema": SCHEMA,
        "command": command_name(&cli.command),
        "status": status,
        "result": body,
    });
    if cli.human {
        let mut s = String::new();
        human(&report, 0, &mut s);
        print!("{s}");
    } else {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fixture { name, output } => match fixture(name, output.as_deref()) {
            Ok(()) => return ExitCode::SUCCESS,
            Err(e) => Err(e),
        },
        Command::Selftest { seeds, parallel } => selftest_report(*seeds, *parallel),
        _ => run(&cli),
    };
    match outcome {
        Ok((true, body)) => {
            emit(&cli, "pass", body);
            ExitCode::SUCCESS
        }
        Ok((false, body)) => {
            emit(&cli, "fail", body);
            ExitCode::from(1)
        }
        Err(Failure::Property(msg)) => {
            emit(&cli, "fail", json!({"error": msg}));
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("eqih: {msg}");
            emit(&cli, "input_error", json!({"error": msg}));
            ExitCode::from(2)
        }
    }
}
