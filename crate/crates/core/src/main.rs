use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use oeq::archive::DefectFile;
use oeq::catalogue::{self, resolve};
use oeq::grading::{enumerate_gradings, infer_weights, integer_rescale, weight_split_sets_in, Potential};
use oeq::groebner::{ResourceBudget, Status};
use oeq::mf::constraint_basis;
use oeq::poly::{fmt_rational, int, Polynomial};
use oeq::residue::qdim_unreduced;
use oeq::search::{search, Pin, SearchConfig};
use oeq::verify::verify_file;

// like println!, but a closed pipe (`oeq ... | head`) is not a panic
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "oeq", version, about = "Orbifold equivalences of quasi-homogeneous potentials")]
struct Cli {
    /// Machine-readable JSON instead of tables
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weights of a quasi-homogeneous polynomial (total weight 2)
    Weights { poly: String },
    /// Central charge of a polynomial or catalogue name
    Cc { potential: String },
    /// Weight split sets of V1(x) − V2(y) in integral units
    Wsplit { v1: String, v2: String },
    /// Admissible weight matrices of a given rank
    Gradings {
        v1: String,
        v2: String,
        #[arg(long)]
        rank: usize,
    },
    /// Verify an archived defect
    Verify {
        file: String,
        #[arg(long)]
        budget_secs: Option<f64>,
    },
    /// Quantum dimensions of an archived defect
    Qdim {
        file: String,
        #[arg(long)]
        budget_secs: Option<f64>,
    },
    /// Search for a graded defect of the given rank
    Search {
        #[arg(long)]
        v1: String,
        #[arg(long)]
        v2: String,
        #[arg(long)]
        rank: usize,
        /// Fix a coefficient, e.g. a3=1 (repeatable)
        #[arg(long = "pin")]
        pins: Vec<String>,
        #[arg(long)]
        budget_secs: Option<f64>,
        /// Decide every grading instead of stopping at the first solvable one
        #[arg(long)]
        exhaustive: bool,
        /// Skip the Q|y=0-first stage
        #[arg(long)]
        direct: bool,
    },
    /// Shipped potentials and known equivalences
    Catalogue {
        #[command(subcommand)]
        what: Option<CatCmd>,
    },
    /// Operations on the constraint ideal of an archived defect
    Ideal {
        #[command(subcommand)]
        what: IdealCmd,
    },
}

#[derive(Subcommand)]
enum CatCmd {
    List,
    Show { name: String },
    Equivalences,
}

#[derive(Subcommand)]
enum IdealCmd {
    /// Whether the constraints have a common solution
    Check {
        file: String,
        #[arg(long)]
        budget_secs: Option<f64>,
    },
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(1, e.to_string())
    }
}

fn budget(flag: Option<f64>) -> Result<Option<Duration>, Failure> {
    let secs = match flag {
        Some(s) => Some(s),
        None => match std::env::var("OEQ_BUDGET_SECS") {
            Ok(v) => Some(v.trim().parse::<f64>().map_err(|_| Failure(3, format!("OEQ_BUDGET_SECS={v} is not a number")))?),
            Err(_) => None,
        },
    };
    match secs {
        Some(s) if !(s > 0.0 && s.is_finite()) => Err(Failure(3, "budget must be a positive number of seconds".into())),
        Some(s) => Ok(Some(Duration::from_secs_f64(s))),
        None => Ok(None),
    }
}

fn resource(d: Option<Duration>) -> ResourceBudget {
    ResourceBudget { time_limit: d, ..Default::default() }
}

fn table(rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        say!("{}", line.join("  ").trim_end());
    }
}

fn print_json(v: &impl serde::Serialize) {
    say!("{}", serde_json::to_string_pretty(v).expect("serialisable"));
}

fn potential(spec: &str, prefix: &str) -> Result<Potential, Failure> {
    resolve(spec, prefix).map_err(|e| Failure(3, e.to_string()))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Weights { poly } => {
            let p = Polynomial::parse(&poly).map_err(|e| Failure(3, e.to_string()))?;
            let ws = infer_weights(&p, &int(2))?;
            let wi = integer_rescale(&ws);
            if json {
                let m: Vec<(String, String, i64)> =
                    ws.iter().map(|(v, w)| (v.name().to_string(), fmt_rational(w), wi.int_weight(v))).collect();
                print_json(&serde_json::json!({ "weights": m, "integral_total": wi.int_total() }));
            } else {
                let mut rows = vec![vec!["var".into(), "weight".into(), "integral".into()]];
                for (v, w) in ws.iter() {
                    rows.push(vec![v.name().into(), fmt_rational(w), wi.int_weight(v).to_string()]);
                }
                rows.push(vec!["total".into(), "2".into(), wi.int_total().to_string()]);
                table(&rows);
            }
        }
        Cmd::Cc { potential: spec } => {
            let v = match catalogue::lookup(&spec) {
                Some(e) => e.potential(),
                None => Potential::parse(&spec).map_err(|e| Failure(3, e.to_string()))?,
            };
            let c = fmt_rational(&v.central_charge());
            if json {
                print_json(&serde_json::json!({ "potential": v.poly.to_string(), "central_charge": c }));
            } else {
                say!("{c}");
            }
        }
        Cmd::Wsplit { v1, v2 } => {
            let (a, b) = (potential(&v1, "x")?, potential(&v2, "y")?);
            let w = integer_rescale(&a.ws.merged(&b.ws)?);
            let mut out = Vec::new();
            for v in [&a, &b] {
                for (m, s) in weight_split_sets_in(&v.poly, &w).sets {
                    out.push((Polynomial::term(int(1), m).to_string(), s.into_iter().collect::<Vec<_>>()));
                }
            }
            if json {
                print_json(&serde_json::json!({ "total": w.int_total(), "sets": out }));
            } else {
                let mut rows = vec![vec!["monomial".into(), format!("split weights (D = {})", w.int_total())]];
                for (m, s) in out {
                    rows.push(vec![m, s.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")]);
                }
                table(&rows);
            }
        }
        Cmd::Gradings { v1, v2, rank } => {
            let (a, b) = (potential(&v1, "x")?, potential(&v2, "y")?);
            let en = enumerate_gradings(&a, &b, rank)?;
            if json {
                print_json(&en);
            } else {
                let mut rows = vec![vec!["#".into(), "q".into(), "p".into(), "w(E)".into(), "fermions".into()]];
                for (i, c) in en.classes.iter().enumerate() {
                    let we: Vec<String> = c.grading.w_e().iter().map(|r| format!("{r:?}")).collect();
                    rows.push(vec![
                        (i + 1).to_string(),
                        format!("{:?}", c.grading.q),
                        format!("{:?}", c.grading.p),
                        we.join(" "),
                        if c.fermion_ok { "ok" } else { "-" }.into(),
                    ]);
                }
                table(&rows);
                say!("{} weight matrices ({} up to E/J exchange), D = {}", en.count(), en.count_up_to_swap(), en.total);
            }
        }
        Cmd::Verify { file, budget_secs } => {
            let f = DefectFile::load(&file).map_err(|e| Failure(3, e.to_string()))?;
            let r = verify_file(&f, &resource(budget(budget_secs)?))?;
            if json {
                say!("{}", r.to_json());
            } else {
                let s = |o: &Option<Polynomial>| o.as_ref().map_or("-".to_string(), Polynomial::to_string);
                let b = |o: Option<bool>| o.map_or("-".to_string(), |x| x.to_string());
                table(&[
                    vec!["defect".into(), r.name.clone()],
                    vec!["rank".into(), r.rank.to_string()],
                    vec!["ideal".into(), format!("{:?}", r.ideal)],
                    vec!["mf_ok".into(), r.mf_ok.to_string()],
                    vec!["graded_ok".into(), r.graded_ok.to_string()],
                    vec!["qL".into(), s(&r.ql)],
                    vec!["qR".into(), s(&r.qr)],
                    vec!["qL*qR".into(), s(&r.product)],
                    vec!["qL matches".into(), b(r.ql_match)],
                    vec!["qR matches".into(), b(r.qr_match)],
                ]);
                if let Some(e) = &r.error {
                    say!("error: {e}");
                }
            }
            if r.error.as_deref().is_some_and(|e| e.contains("time limit")) {
                return Ok(2);
            }
            return Ok(if r.ok() { 0 } else { 1 });
        }
        Cmd::Qdim { file, budget_secs } => {
            let f = DefectFile::load(&file).map_err(|e| Failure(3, e.to_string()))?;
            let d = f.to_defect()?;
            let raw = qdim_unreduced(&d)?;
            let gb = constraint_basis(&d.mf.constraints, &resource(budget(budget_secs)?))
                .map_err(|e| Failure(2, format!("constraint ideal: {e}")))?;
            let red = raw.reduced(gb.as_ref());
            let red_product = gb.as_ref().map_or(raw.product(), |g| g.normal_form(&raw.product()));
            if json {
                print_json(&serde_json::json!({
                    "qL": raw.ql.to_string(),
                    "qR": raw.qr.to_string(),
                    "product": raw.product().to_string(),
                    "reduced": { "qL": red.ql.to_string(), "qR": red.qr.to_string(), "product": red_product.to_string() },
                }));
            } else {
                let mut rows = vec![vec![String::new(), "computed".into(), "mod constraints".into()]];
                rows.push(vec!["qL".into(), raw.ql.to_string(), red.ql.to_string()]);
                rows.push(vec!["qR".into(), raw.qr.to_string(), red.qr.to_string()]);
                rows.push(vec!["qL*qR".into(), raw.product().to_string(), red_product.to_string()]);
                table(&rows);
            }
        }
        Cmd::Search { v1, v2, rank, pins, budget_secs, exhaustive, direct } => {
            let (a, b) = (potential(&v1, "x")?, potential(&v2, "y")?);
            let pins = pins.iter().map(|p| Pin::parse(p)).collect::<Result<Vec<_>, _>>().map_err(|e| Failure(3, e.to_string()))?;
            let cfg = SearchConfig { pins, budget: budget(budget_secs)?, exhaustive, direct, ..Default::default() };
            let r = search(&a, &b, rank, &cfg)?;
            say!("{}", r.to_json());
            return Ok(r.verdict.exit_code() as u8);
        }
        Cmd::Catalogue { what } => match what.unwrap_or(CatCmd::List) {
            CatCmd::List => {
                if json {
                    print_json(&catalogue::catalogue());
                } else {
                    let mut rows = vec![vec!["name".into(), "c".into(), "potential".into(), "families".into()]];
                    for e in catalogue::catalogue() {
                        rows.push(vec![e.name.clone(), fmt_rational(&e.central_charge), e.poly.to_string(), e.families.join(",")]);
                    }
                    table(&rows);
                }
            }
            CatCmd::Show { name } => {
                let e = catalogue::lookup(&name).ok_or_else(|| Failure(3, format!("no catalogue entry `{name}`")))?;
                let related: Vec<_> = catalogue::known_equivalences()
                    .into_iter()
                    .filter(|k| k.left.eq_ignore_ascii_case(&e.name) || k.right.eq_ignore_ascii_case(&e.name))
                    .collect();
                if json {
                    print_json(&serde_json::json!({ "entry": e, "equivalences": related }));
                } else {
                    let mut rows = vec![
                        vec!["name".into(), e.name.clone()],
                        vec!["potential".into(), e.poly.to_string()],
                        vec!["variables".into(), e.variables.join(" ")],
                        vec!["central charge".into(), fmt_rational(&e.central_charge)],
                        vec!["families".into(), e.families.join(", ")],
                    ];
                    for k in related {
                        rows.push(vec!["equivalent".into(), format!("{} ~ {} ({})", k.left, k.right, k.provenance)]);
                    }
                    table(&rows);
                }
            }
            CatCmd::Equivalences => {
                let all = catalogue::known_equivalences();
                if json {
                    print_json(&all);
                } else {
                    let mut rows = vec![vec!["V1".into(), "V2".into(), "provenance".into()]];
                    rows.extend(all.into_iter().map(|k| vec![k.left, k.right, k.provenance]));
                    table(&rows);
                }
            }
        },
        Cmd::Ideal { what: IdealCmd::Check { file, budget_secs } } => {
            let f = DefectFile::load(&file).map_err(|e| Failure(3, e.to_string()))?;
            let d = f.to_defect()?;
            let (status, detail) = match constraint_basis(&d.mf.constraints, &resource(budget(budget_secs)?)) {
                Ok(None) => (Status::Solvable, "no constraints".to_string()),
                Ok(Some(gb)) if gb.is_unit() => (Status::Unsolvable, "reduced basis is {1}".to_string()),
                Ok(Some(gb)) => (Status::Solvable, format!("reduced basis with {} elements", gb.generators().len())),
                Err(e) => (Status::Unknown, e.to_string()),
            };
            let verdict = match status {
                Status::Solvable => "proper",
                Status::Unsolvable => "unit",
                Status::Unknown => "unknown",
            };
            if json {
                print_json(&serde_json::json!({ "ideal": verdict, "detail": detail }));
            } else {
                say!("{verdict}");
            }
            return Ok(match status {
                Status::Solvable => 0,
                Status::Unsolvable => 1,
                Status::Unknown => 2,
            });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(Failure(c, msg)) => {
            eprintln!("oeq: {msg}");
            ExitCode::from(c)
        }
    }
}
