use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use delpezzo::certify::Tables;
use delpezzo::config::VerifyOptions;
use delpezzo::experiment::{run_density, ExperimentConfig, PlaceBudget, SCHEMA_VERSION};
use delpezzo::input::parse_surface_file;
use delpezzo::report::{analyze_lines, verify_suite, SurfaceAnalysis, VerifyDocument};
use delpezzo::surface::Budget;

#[derive(Parser)]
#[command(name = "delpezzo", version, about = "Exceptional curves, Weyl groups and Frobenius classes of cubic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check line counts, automorphism orders, stabilizer chains and the 27-line substructures.
    Verify(VerifyArgs),
    /// Analyse the surfaces listed in a file.
    Surface(SurfaceArgs),
    /// Certificate densities for random cubic surfaces over F_q(u).
    Density(DensityArgs),
    /// Dump the derived class and subgroup tables with their content hashes.
    Tables(TablesArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// All degrees (the default).
    #[arg(long, conflicts_with = "degree")]
    all: bool,
    /// A single degree 1..=7.
    #[arg(short = 'd', long = "degree", value_parser = clap::value_parser!(u32).range(1..=7))]
    degree: Option<u32>,
    /// Also compute Aut(Gamma_1) by search.
    #[arg(long)]
    full_aut: bool,
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Point counts over F_{Q^m} need Q^{3m} <= this.
    #[arg(long, default_value_t = Budget::default().points)]
    budget_points: u64,
    /// Line enumeration over F_{Q^m} needs Q^{4m} <= this.
    #[arg(long, default_value_t = Budget::default().lines)]
    budget_lines: u64,
    /// Largest extension degree searched for singular points.
    #[arg(long, default_value_t = Budget::default().singular_max_degree)]
    singular_max_degree: u32,
    /// Largest degree of the places of F_q(u) used as evidence.
    #[arg(long, default_value_t = PlaceBudget::default().max_place_degree)]
    max_place_degree: u32,
    #[arg(long, default_value_t = PlaceBudget::default().max_places)]
    max_places: usize,
}

impl BudgetArgs {
    fn place_budget(self) -> PlaceBudget {
        PlaceBudget {
            max_place_degree: self.max_place_degree,
            max_places: self.max_places,
            surface: Budget {
                points: self.budget_points,
                lines: self.budget_lines,
                singular_max_degree: self.singular_max_degree,
            },
        }
    }
}

#[derive(Args)]
struct SurfaceArgs {
    /// Surface file, one `p k : c1,...,c20` per line.
    file: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Prime field size.
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Coefficient degree bounds D.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
    degrees: Vec<u32>,
    /// Samples per degree bound.
    #[arg(short = 'n', long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let degree = if args.all { None } else { args.degree };
    let report = verify_suite(degree, VerifyOptions { full_aut_degree_one: args.full_aut })?;
    for r in &report.records {
        println!("{} {}: expected {} computed {}", if r.pass { "PASS" } else { "FAIL" }, r.claim, r.expected, r.computed);
    }
    let doc = VerifyDocument::new(report, Tables::get());
    if let Some(p) = &args.json {
        write_json(p, &doc)?;
    }
    if doc.all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failing claims:");
        for f in doc.report.failures() {
            eprintln!("  {}", f.claim);
        }
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_surface(args: SurfaceArgs) -> Result<ExitCode> {
    let src = fs::read_to_string(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let lines = parse_surface_file(&src)?;
    let doc = analyze_lines(&lines, &args.budget.place_budget(), Tables::get())?;
    match &args.json {
        Some(p) => {
            write_json(p, &doc)?;
            for e in &doc.surfaces {
                match &e.analysis {
                    SurfaceAnalysis::Finite(r) => println!(
                        "line {}: q={} {} rational_lines={} splitting_degree={:?} cycle_types={:?}",
                        e.line,
                        r.q,
                        verdict(&r.smoothness),
                        r.rational_lines.map_or("-".into(), |n| n.to_string()),
                        r.splitting_degree,
                        r.cycle_types
                    ),
                    SurfaceAnalysis::Family(r) => {
                        println!("line {}: h1={:?} exclusion={:?}", e.line, r.h1.kind, r.exclusion.kind)
                    }
                }
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict(c: &delpezzo::surface::SmoothnessCertificate) -> &'static str {
    use delpezzo::surface::SmoothnessCertificate::*;
    match c {
        SmoothCertified { .. } => "SmoothCertified",
        NotSmooth { .. } => "NotSmooth",
        Undetermined => "Undetermined",
    }
}

fn cmd_density(args: DensityArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        q: args.q,
        degrees: args.degrees,
        samples: args.samples,
        seed: args.seed,
        places: args.budget.place_budget(),
    };
    let report = run_density(&cfg)?;
    print!("{}", report.to_csv());
    if let Some(p) = &args.json {
        write_json(p, &report)?;
    }
    if let Some(p) = &args.csv {
        fs::write(p, report.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TablesDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    tables: &'a Tables,
}

fn cmd_tables(args: TablesArgs) -> Result<ExitCode> {
    let tables = Tables::get();
    let doc = TablesDocument { schema_version: SCHEMA_VERSION, tables };
    match &args.json {
        Some(p) => {
            write_json(p, &doc)?;
            for (name, hash) in &tables.hashes {
                println!("{name} {hash}");
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Density(a) => cmd_density(a),
        Command::Tables(a) => cmd_tables(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
