//! Command-line interface: classification, loop sets, neighbor tables, the
//! verification harness, the vertex census, elliptic neighborhoods and the
//! concrete-curve cross-check.
//!
//! Exit codes: 0 = success / all checks pass, 1 = some assertion failed,
//! 2 = usage error.

use crate::kernels::{
    class_sizes, eigen_setup, enumerate_kernels, find_loops, orbit_decompose, Scenario, VertexCase,
};
use crate::report::{
    self, neighbor_table, scenario_string, to_json, vertex_census, verify_tables, CurveTag,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "isoneigh",
    about = "Loop and neighbor structure of product vertices in (l,l)-isogeny graphs of superspecial abelian surfaces",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    E1728sq,
    E0sq,
    PairDistinct,
    SquareGeneric,
}

impl From<CaseArg> for VertexCase {
    fn from(c: CaseArg) -> VertexCase {
        match c {
            CaseArg::E1728sq => VertexCase::E1728Sq,
            CaseArg::E0sq => VertexCase::E0Sq,
            CaseArg::PairDistinct => VertexCase::PairDistinct,
            CaseArg::SquareGeneric => VertexCase::SquareGeneric,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Class labels and cardinalities of all maximal l-isotropic subgroups
    Classify {
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The loop set of a vertex
    Loops {
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The neighbor table of a vertex
    Table {
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute all tables up to a bound and check the closed forms
    Verify {
        #[arg(long, default_value_t = 13)]
        ell_max: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Census of product-type vertices at p
    Census {
        #[arg(long)]
        p: i64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// l-isogeny neighborhood of E_1728 or E_0
    Elliptic {
        #[arg(long, value_enum)]
        curve: CurveTag,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        p: i64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the symbolic classifier against curve arithmetic
    Concrete {
        #[arg(long)]
        case: CaseArg,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        ell: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_scenario(s: Option<&str>) -> Result<Option<Scenario>, String> {
    match s {
        None => Ok(None),
        Some("none") => Ok(Some(Scenario::NoSmallIsogeny)),
        Some("ell") => Ok(Some(Scenario::IsogenyDegreeEll)),
        Some(other) => {
            if let Some(d) = other.strip_prefix("d=") {
                let d: u64 = d
                    .parse()
                    .map_err(|_| format!("bad scenario degree: {other}"))?;
                Ok(Some(Scenario::IsogenyDegree(d)))
            } else {
                Err(format!("unknown scenario {other:?}; use none, ell or d=<int>"))
            }
        }
    }
}

fn emit(out: Option<&PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = std::io::stdout();
            stdout.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                writeln!(stdout)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ClassifyOut {
    case: VertexCase,
    ell: u64,
    scenario: Option<String>,
    classes: Vec<ClassRow>,
    orbit_stabilizer_verified: bool,
}

#[derive(Serialize)]
struct ClassRow {
    class: String,
    count: usize,
    orbits: usize,
    stabilizer_orders: Vec<usize>,
}

#[derive(Serialize)]
struct LoopsOut {
    case: VertexCase,
    ell: u64,
    scenario: Option<String>,
    loops: Vec<report::LoopRecord>,
}

/// Run the CLI; the return value is the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.cmd {
        Cmd::Classify { case, ell, scenario, format, out } => {
            let case = VertexCase::from(case);
            let scen = parse_scenario(scenario.as_deref())?;
            let setup = eigen_setup(case, ell).map_err(|e| e.to_string())?;
            let kernels = enumerate_kernels(ell);
            let sizes = class_sizes(&setup, &kernels);
            let orbits = orbit_decompose(&setup, &kernels);
            let mut rows: BTreeMap<String, ClassRow> = BTreeMap::new();
            for o in &orbits {
                let row = rows.entry(o.class.to_string()).or_insert_with(|| ClassRow {
                    class: o.class.to_string(),
                    count: 0,
                    orbits: 0,
                    stabilizer_orders: vec![],
                });
                row.orbits += 1;
                if !row.stabilizer_orders.contains(&o.stabilizer_order) {
                    row.stabilizer_orders.push(o.stabilizer_order);
                }
            }
            for (label, n) in &sizes {
                if let Some(row) = rows.get_mut(&label.to_string()) {
                    row.count = *n;
                }
            }
            let result = ClassifyOut {
                case,
                ell,
                scenario: scen.map(scenario_string),
                classes: rows.into_values().collect(),
                orbit_stabilizer_verified: true,
            };
            let content = match format {
                Format::Json => to_json(&result),
                Format::Csv => {
                    let mut s = String::from("case,ell,class,count\n");
                    for c in &result.classes {
                        s.push_str(&format!("{case:?},{ell},{},{}\n", c.class, c.count));
                    }
                    s
                }
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Loops { case, ell, scenario, format, out } => {
            let case = VertexCase::from(case);
            let scen = parse_scenario(scenario.as_deref())?;
            let setup = eigen_setup(case, ell).map_err(|e| e.to_string())?;
            let loops = find_loops(&setup, scen).map_err(|e| e.to_string())?;
            let records: Vec<report::LoopRecord> = loops
                .iter()
                .map(|k| report::LoopRecord {
                    kernel: k.to_string(),
                    class: crate::kernels::classify_one(&setup, k).to_string(),
                })
                .collect();
            let result = LoopsOut { case, ell, scenario: scen.map(scenario_string), loops: records };
            let content = match format {
                Format::Json => to_json(&result),
                Format::Csv => {
                    let mut s = String::from("case,ell,kernel,class\n");
                    for l in &result.loops {
                        s.push_str(&format!("{case:?},{ell},{},{}\n", l.kernel, l.class));
                    }
                    s
                }
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Table { case, ell, scenario, format, out } => {
            let case = VertexCase::from(case);
            let scen = parse_scenario(scenario.as_deref())?;
            let table = neighbor_table(case, ell, scen).map_err(|e| e.to_string())?;
            let content = match format {
                Format::Json => to_json(&table),
                Format::Csv => table.to_csv(),
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Verify { ell_max, format, out } => {
            let report = verify_tables(ell_max).map_err(|e| e.to_string())?;
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            let content = match format {
                Format::Json => to_json(&report),
                Format::Csv => report.to_csv(),
            };
            if out.is_some() {
                emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            }
            println!(
                "{} checks, {} failures",
                report.checks.len(),
                report.failures()
            );
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Cmd::Census { p, format, out } => {
            let census = vertex_census(p).map_err(|e| e.to_string())?;
            let content = match format {
                Format::Json => to_json(&census),
                Format::Csv => {
                    let j = &census.jacobian_as_printed;
                    format!(
                        "p,s_p2,product_type_count,jacobian_numerator,jacobian_denominator,jacobian_integral\n{},{},{},{},{},{}\n",
                        census.p, census.s_p2, census.product_type_count, j.numerator, j.denominator, j.integral
                    )
                }
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Elliptic { curve, ell, p, format, out } => {
            let n = report::elliptic_neighborhood(curve, ell, p).map_err(|e| e.to_string())?;
            let content = match format {
                Format::Json => to_json(&n),
                Format::Csv => format!(
                    "curve,ell,p,vertices,edges_per_vertex,loops,fp_rational_vertices\n{:?},{},{},{},{},{},{}\n",
                    n.curve, n.ell, n.p, n.vertices, n.edges_per_vertex, n.loops, n.fp_rational_vertices
                ),
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Concrete { case, p, ell, format, out } => {
            let case = VertexCase::from(case);
            let census =
                crate::concrete::concrete_kernel_census(case, p, ell).map_err(|e| e.to_string())?;
            let table = neighbor_table(case, ell, None).map_err(|e| e.to_string())?;
            let content = match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&table).unwrap();
                    v["concrete_agrees"] = serde_json::json!(census.concrete_agrees);
                    serde_json::to_string_pretty(&v).unwrap()
                }
                Format::Csv => {
                    let mut s = table.to_csv();
                    s.push_str(&format!("# concrete_agrees,{}\n", census.concrete_agrees));
                    s
                }
            };
            emit(out.as_ref(), &content).map_err(|e| e.to_string())?;
            Ok(if census.concrete_agrees { 0 } else { 1 })
        }
    }
}
