use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cuspsym::bgtable::{bg_build, BgTable};
use cuspsym::cache::{cached_eis_series, Cache, CacheKey};
use cuspsym::cusp::{cusp_parts, sturm_bound, EisProductCombo};
use cuspsym::eisenstein::TorsionIndex;
use cuspsym::identities::{e2_generators, verify_divisor_sums, verify_master_convolution, verify_polynomial_identity};
use cuspsym::mu::{manin1_check, manin2_check, mu_eval, mu_eval_at};
use cuspsym::opens::CompactOpenM2;
use cuspsym::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cuspsym",
    version,
    about = "Eisenstein distributions, Manin relations and symbol tables, computed exactly"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Cache directory; the environment variable takes precedence.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Case {
    A,
    B,
    C,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// q-expansion of ε_{k,c}.
    Eisenstein {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        c1: i64,
        #[arg(long, default_value_t = 0)]
        c2: i64,
        #[arg(long, default_value_t = 20)]
        prec: usize,
    },
    /// μ(U) for a compact open given as "a11,a12,a21,a22 mod alpha [+ ...]".
    Mu {
        #[arg(long)]
        open: String,
        /// Level for the expansion; defaults to the natural level of U.
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long = "W", default_value_t = 2)]
        w: u32,
        #[arg(long, default_value_t = 10)]
        prec: usize,
    },
    /// Both Manin relations on the three residue cases.
    VerifyManin {
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "W", default_value_t = 3)]
        w: u32,
        /// Defaults to the Sturm bound of the top weight.
        #[arg(long)]
        prec: Option<usize>,
        #[arg(long, value_enum, default_value_t = Case::All)]
        case: Case,
    },
    /// Level-one identities, with stated forms checked against derived ones.
    VerifyIdentities {
        /// Bound for the divisor-sum identities.
        #[arg(long, default_value_t = 500)]
        nmax: usize,
        /// Bound for the series identities.
        #[arg(long, default_value_t = 20)]
        series_nmax: u32,
        #[arg(long, default_value_t = 50)]
        prec: usize,
    },
    /// Manin symbol table for Γ₁(N).
    BgTable {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        /// Defaults to the Sturm bound plus 8.
        #[arg(long)]
        prec: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cusp parts of an Eisenstein-product combination read from JSON.
    CuspPart {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        combo: PathBuf,
        #[arg(long)]
        prec: Option<usize>,
    },
}

enum Outcome {
    Pass(Value),
    Fail(Value),
}

fn case_open(case: Case, n: u32) -> Result<CompactOpenM2> {
    let s = match case {
        Case::A => "0,0,0,0 mod 1".to_string(),
        Case::B => format!("1/{n},0,1/{n},0 mod 1"),
        Case::C => format!("1/{n},2/{n},1/{n},4/{n} mod 1"),
        Case::All => unreachable!(),
    };
    s.parse()
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cache = Cache::from_env(cli.cache_dir.clone());
    match &cli.command {
        Command::Eisenstein { n, k, c1, c2, prec } => {
            let c = TorsionIndex::new(*n, *c1, *c2);
            let f = cached_eis_series(cache.as_ref(), *k, &c, *prec)?;
            Ok(Outcome::Pass(serde_json::to_value(&f)?))
        }
        Command::Mu { open, n, w, prec } => {
            let u: CompactOpenM2 = open.parse()?;
            let v = match n {
                Some(l) => mu_eval_at(&u, *l, *prec, *w)?,
                None => mu_eval(&u, *prec, *w)?,
            };
            Ok(Outcome::Pass(json!({ "open": u, "value": v })))
        }
        Command::VerifyManin { n, w, prec, case } => {
            let cases: Vec<(Case, &str)> = match case {
                Case::All => vec![(Case::A, "a"), (Case::B, "b"), (Case::C, "c")],
                Case::A => vec![(Case::A, "a")],
                Case::B => vec![(Case::B, "b")],
                Case::C => vec![(Case::C, "c")],
            };
            let prec = prec.unwrap_or_else(|| sturm_bound(*n, w + 2));
            let mut out = serde_json::Map::new();
            let mut pass = true;
            for (c, name) in cases {
                let u = case_open(c, *n)?;
                let m1 = manin1_check(&u, Some(*n), prec, *w)?;
                let m2 = manin2_check(&u, Some(*n), prec, *w)?;
                pass &= m1.pass && m2.pass;
                out.insert(name.into(), json!({ "man1": m1, "man2": m2 }));
            }
            let report = json!({ "level": n, "degree": w, "precision": prec, "cases": out, "pass": pass });
            Ok(if pass { Outcome::Pass(report) } else { Outcome::Fail(report) })
        }
        Command::VerifyIdentities { nmax, series_nmax, prec } => {
            let conv = verify_master_convolution(*series_nmax, *prec)?;
            let sums = verify_divisor_sums(*nmax);
            let poly = verify_polynomial_identity((*series_nmax).min(10), (*prec).min(30))?;
            let gens = e2_generators(8, *prec)?;
            let cor_ok = sums.iter().all(|r| r.derived_pass) && sums[0].stated_pass;
            let pass = conv.pass && cor_ok && poly.corrected.pass && gens.pass;
            let mut discrepancies: Vec<String> = sums
                .iter()
                .filter(|r| r.discrepancy)
                .map(|r| format!("{} fails first at n = {}", r.stated, r.stated_first_failure.unwrap()))
                .collect();
            if poly.discrepancy {
                discrepancies
                    .push("P-polynomial identity holds with +P_{n+1}P_2/(XY(X+Y)), not with the stated sign".into());
            }
            let report = json!({
                "master_convolution": conv,
                "divisor_sums": sums,
                "polynomial_identity": poly,
                "generators": gens,
                "discrepancies": discrepancies,
                "pass": pass,
            });
            Ok(if pass { Outcome::Pass(report) } else { Outcome::Fail(report) })
        }
        Command::BgTable { n, k, prec, out } => {
            let prec = prec.unwrap_or_else(|| sturm_bound(*n, *k) + 8);
            let table = match &cache {
                Some(c) => {
                    let key = CacheKey::new("bg-table", *n, *k, prec).degree(k.saturating_sub(2));
                    let valid = |s: &String| {
                        BgTable::from_json(s).is_ok_and(|t| t.level == *n && t.weight == *k && t.precision == prec)
                    };
                    let s = c.get_or_compute(&key, valid, || bg_build(*n, *k, Some(prec))?.to_json())?;
                    let t = BgTable::from_json(&s)?;
                    t.verify_relations()?;
                    t
                }
                None => bg_build(*n, *k, Some(prec))?,
            };
            let summary = json!({
                "level": n,
                "weight": k,
                "precision": prec,
                "sturm_bound": table.sturm_bound,
                "entries": table.entries.len(),
                "nonzero_entries": table.entries.values().filter(|e| !e.is_empty()).count(),
                "cusp_rank": table.cusp_rank(),
                "relations": "exact",
            });
            match out {
                Some(path) => {
                    table.export(path)?;
                    Ok(Outcome::Pass(json!({ "summary": summary, "out": path })))
                }
                None => {
                    let t: Value = serde_json::from_str(&table.to_json()?)?;
                    Ok(Outcome::Pass(json!({ "summary": summary, "table": t })))
                }
            }
        }
        Command::CuspPart { n, k, combo, prec } => {
            let text = std::fs::read_to_string(combo)?;
            let combo: EisProductCombo = serde_json::from_str(&text)?;
            if combo.level() != *n {
                return Err(Error::LevelMismatch(*n, combo.level()));
            }
            let prec = prec.unwrap_or_else(|| sturm_bound(*n, *k) + 8);
            let monos: Vec<_> = combo.monomials().collect();
            let parts = cusp_parts(&combo, &monos, *k, prec, None)?;
            let map: serde_json::Map<String, Value> = monos
                .iter()
                .zip(parts)
                .map(|((i, j), f)| Ok((format!("{i},{j}"), serde_json::to_value(&f)?)))
                .collect::<Result<_>>()?;
            Ok(Outcome::Pass(json!({ "level": n, "weight": k, "precision": prec, "parts": map })))
        }
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_leaf(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {x}\n")),
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_leaf(x) {
                    out.push_str(&format!("{pad}- {x}\n"));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 2, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{v}\n")),
    }
}

fn is_leaf(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()),
        _ => true,
    }
}

fn emit(format: Format, v: &Value) {
    match format {
        // serde_json maps are sorted, so output is deterministic
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("value serializes")),
        Format::Text => {
            let mut s = String::new();
            render_text(v, 0, &mut s);
            print!("{s}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass(v)) => {
            emit(cli.format, &v);
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(v)) => {
            emit(cli.format, &v);
            ExitCode::from(1)
        }
        Err(Error::RelationViolation(m)) => {
            emit(cli.format, &json!({ "error": "relation violation", "detail": m }));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
