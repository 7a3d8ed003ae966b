//! `tropmod`: skeleta, toric ranks, component groups and Tamagawa numbers
//! of the modular curves X_0, X_1, X_sp, X_sp^+ at levels p^n M, plus the
//! self-verification suite.  Data goes to stdout (or `--output`), one-line
//! diagnostics to stderr; exit 0 on success, 1 on a domain error, 2 on a
//! verification failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use tropmod::cosets::{
    borel_double_cosets, borel_double_cosets_bruteforce, CurveFamily, DoubleCosetTable,
};
use tropmod::exec::ExecMode;
use tropmod::homology::{component_group, tamagawa, Normalization};
use tropmod::skeleton::{
    pruned_skeleton, pruned_skeleton_bruteforce, report, supersingular_count,
    supersingular_count_oracle, supersingular_types_for, toric_rank, CurveSpec,
};
use tropmod::verify;

#[derive(Parser)]
#[command(name = "tropmod", version, about = "Tropical invariants of modular curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for internal parallelism (1 forces sequential mode).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Enumeration cap for brute-force routes (overrides TROPMOD_CAP).
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Write output to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Curve family.
    #[arg(long, value_enum, default_value_t = Functor::Gamma0)]
    functor: Functor,
    /// The prime p >= 5.
    #[arg(short)]
    p: u64,
    /// Exponent of p in the level.
    #[arg(short, default_value_t = 1)]
    n: u32,
    /// Auxiliary level M coprime to p.
    #[arg(short = 'M', default_value_t = 1)]
    m: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Functor {
    Gamma0,
    Gamma1,
    Gamma1pm,
    Sp,
    SpPlus,
}

impl From<Functor> for CurveFamily {
    fn from(f: Functor) -> CurveFamily {
        match f {
            Functor::Gamma0 => CurveFamily::Gamma0,
            Functor::Gamma1 => CurveFamily::Gamma1,
            Functor::Gamma1pm => CurveFamily::Gamma1pm,
            Functor::Sp => CurveFamily::Sp,
            Functor::SpPlus => CurveFamily::SpPlus,
        }
    }
}

impl CurveArgs {
    fn spec(&self) -> tropmod::error::Result<CurveSpec> {
        CurveSpec::new(self.functor.into(), self.p, self.n, self.m)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Table,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Pruned skeleton of the curve, with the full invariant report.
    Skeleton {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Assemble the skeleton by explicit point enumeration instead of
        /// the closed orbit tables.
        #[arg(long)]
        brute_force: bool,
    },
    /// First Betti number of the pruned skeleton.
    ToricRank {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Component group of the tropical Jacobian.
    ComponentGroup {
        #[command(flatten)]
        curve: CurveArgs,
        /// Length normalization: krir, unit, or m:<int>.
        #[arg(long, default_value = "krir")]
        normalization: String,
        /// Report only the prime-to-2 part.
        #[arg(long)]
        odd_part: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Order of the component group at the integral normalization.
    Tamagawa {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Orbits of the Borel subgroup on the family's coset scheme.
    DoubleCosets {
        #[command(flatten)]
        curve: CurveArgs,
        /// Recompute the table by orbit search over all points.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Supersingular count and edge types at level M.
    Supersingular {
        #[command(flatten)]
        curve: CurveArgs,
        /// Also run the Hasse-polynomial oracle and compare counts.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run the verification suite.
    Verify {
        /// `all` or a criterion number 1-10.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn effective_cap(flag: Option<u64>) -> tropmod::error::Result<u64> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("TROPMOD_CAP") {
        Ok(s) => s.parse().map_err(|_| {
            tropmod::Error::domain(format!("TROPMOD_CAP must be an integer, got {s:?}"))
        }),
        Err(_) => Ok(tropmod::DEFAULT_CAP),
    }
}

fn table_lines(table: &DoubleCosetTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} classes, {} points\n",
        table.class_count(),
        table.total_size()
    ));
    out.push_str("rep\torbit\n");
    for entry in &table.entries {
        out.push_str(&format!("{}\t{}\n", entry.rep, entry.orbit));
    }
    out
}

/// Ok(output) on success; Err((code, message)) otherwise.
type RunResult = Result<String, (u8, String)>;

fn domain(e: tropmod::Error) -> (u8, String) {
    (1, e.to_string())
}

fn run(cli: &Cli) -> RunResult {
    let mode = match cli.jobs {
        Some(1) => ExecMode::Sequential,
        _ => ExecMode::Parallel,
    };
    match &cli.command {
        Command::Skeleton { curve, format, brute_force } => {
            let spec = curve.spec().map_err(domain)?;
            let g = if *brute_force {
                let cap = effective_cap(cli.cap).map_err(domain)?;
                pruned_skeleton_bruteforce(&spec, cap).map_err(domain)?
            } else {
                pruned_skeleton(&spec).map_err(domain)?
            };
            match format {
                Format::Json => {
                    let mut value = report(&spec).map_err(domain)?;
                    if *brute_force {
                        value["graph"] = g.to_json();
                    }
                    Ok(format!("{:#}\n", value))
                }
                Format::Dot => Ok(g.to_dot()),
                Format::Table => {
                    let data =
                        supersingular_types_for(spec.family, spec.p, spec.big_m).map_err(domain)?;
                    let mut out = format!(
                        "{spec}\ns={} u={} r1728={} r0={} toric_rank={}\nvertices={} edges={} total_length={}\n",
                        data.s,
                        data.u,
                        data.r_1728,
                        data.r_0,
                        toric_rank(&spec).map_err(domain)?,
                        g.vertices.len(),
                        g.edges.len(),
                        g.total_length(),
                    );
                    for e in &g.edges {
                        out.push_str(&format!(
                            "{} -- {}\tlen {}\ttower {}\n",
                            g.vertices[e.u].id, g.vertices[e.v].id, e.len, e.tower
                        ));
                    }
                    Ok(out)
                }
            }
        }
        Command::ToricRank { curve, format } => {
            let spec = curve.spec().map_err(domain)?;
            let rank = toric_rank(&spec).map_err(domain)?;
            match format {
                Format::Json => Ok(format!(
                    "{:#}\n",
                    serde_json::json!({"functor": spec.family.as_str(), "p": spec.p, "n": spec.n, "M": spec.big_m, "toric_rank": rank})
                )),
                Format::Dot => Err((1, "toric-rank has no dot form".to_string())),
                Format::Table => Ok(format!("{rank}\n")),
            }
        }
        Command::ComponentGroup { curve, normalization, odd_part, format } => {
            let spec = curve.spec().map_err(domain)?;
            let norm: Normalization = normalization.parse().map_err(domain)?;
            let mut group = component_group(&spec, &norm).map_err(domain)?;
            if *odd_part {
                group = group.odd_part();
            }
            match format {
                Format::Json => {
                    let invariants: Vec<String> =
                        group.invariants.iter().map(|d| d.to_string()).collect();
                    Ok(format!(
                        "{:#}\n",
                        serde_json::json!({
                            "functor": spec.family.as_str(), "p": spec.p, "n": spec.n,
                            "M": spec.big_m, "normalization": norm.to_string(),
                            "odd_part": odd_part, "free_rank": group.free_rank,
                            "invariants": invariants,
                        })
                    ))
                }
                Format::Dot => Err((1, "component-group has no dot form".to_string())),
                Format::Table => Ok(format!("{group}\n")),
            }
        }
        Command::Tamagawa { curve, format } => {
            let spec = curve.spec().map_err(domain)?;
            let order = tamagawa(&spec).map_err(domain)?;
            match format {
                Format::Json => Ok(format!(
                    "{:#}\n",
                    serde_json::json!({"functor": spec.family.as_str(), "p": spec.p, "n": spec.n, "M": spec.big_m, "tamagawa": order.to_string()})
                )),
                Format::Dot => Err((1, "tamagawa has no dot form".to_string())),
                Format::Table => Ok(format!("{order}\n")),
            }
        }
        Command::DoubleCosets { curve, brute_force, format } => {
            let spec = curve.spec().map_err(domain)?;
            let family: CurveFamily = spec.family;
            let table = if *brute_force {
                let cap = effective_cap(cli.cap).map_err(domain)?;
                borel_double_cosets_bruteforce(family, spec.p, spec.n, cap).map_err(domain)?
            } else {
                borel_double_cosets(family, spec.p, spec.n).map_err(domain)?
            };
            match format {
                Format::Json => Ok(format!("{:#}\n", table.to_json())),
                Format::Dot => Err((1, "double-cosets has no dot form".to_string())),
                Format::Table => Ok(table_lines(&table)),
            }
        }
        Command::Supersingular { curve, brute_force, format } => {
            let spec = curve.spec().map_err(domain)?;
            let data =
                supersingular_types_for(spec.family, spec.p, spec.big_m).map_err(domain)?;
            let oracle = if *brute_force {
                let cap = effective_cap(cli.cap).map_err(domain)?;
                let count = supersingular_count_oracle(spec.p, cap).map_err(domain)?;
                let closed = supersingular_count(spec.p).map_err(domain)?;
                if count != closed {
                    return Err((
                        2,
                        format!("oracle count {count} disagrees with closed form {closed}"),
                    ));
                }
                Some(count)
            } else {
                None
            };
            match format {
                Format::Json => {
                    let mut value = serde_json::json!({
                        "p": data.p, "M": data.big_m, "functor": spec.family.as_str(),
                        "s": data.s, "u": data.u, "r1728": data.r_1728, "r0": data.r_0,
                        "edges": data.edges,
                    });
                    if let Some(count) = oracle {
                        value["oracle_count"] = serde_json::json!(count);
                    }
                    Ok(format!("{:#}\n", value))
                }
                Format::Dot => Err((1, "supersingular has no dot form".to_string())),
                Format::Table => {
                    let edges: Vec<String> =
                        data.edges.iter().map(|b| b.to_string()).collect();
                    let mut out = format!(
                        "s={} u={} r1728={} r0={}\nedge types: {}\n",
                        data.s,
                        data.u,
                        data.r_1728,
                        data.r_0,
                        edges.join(",")
                    );
                    if let Some(count) = oracle {
                        out.push_str(&format!("oracle count: {count} (agrees)\n"));
                    }
                    Ok(out)
                }
            }
        }
        Command::Verify { suite, format } => {
            let reports = match suite.as_str() {
                "all" => verify::run_all(mode),
                s => {
                    let id: u32 = s.parse().map_err(|_| {
                        (1, format!("--suite must be `all` or a criterion number, got {s:?}"))
                    })?;
                    if !(1..=10).contains(&id) {
                        return Err((1, format!("criterion {id} does not exist (1-10)")));
                    }
                    vec![verify::run_criterion(id, mode)]
                }
            };
            let failed = reports.iter().filter(|r| !r.pass).count();
            let out = match format {
                Format::Json => format!("{:#}\n", serde_json::json!(reports)),
                Format::Dot => return Err((1, "verify has no dot form".to_string())),
                Format::Table => {
                    let mut out = String::new();
                    for r in &reports {
                        out.push_str(&format!(
                            "criterion {} ({}): {}\n",
                            r.id,
                            r.name,
                            if r.pass { "pass" } else { "fail" }
                        ));
                    }
                    out.push_str(&format!(
                        "{} of {} criteria pass\n",
                        reports.len() - failed,
                        reports.len()
                    ));
                    out
                }
            };
            if failed > 0 {
                Err((2, format!("{failed} criteria failed\n{out}")))
            } else {
                Ok(out)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, out) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{out}");
                let _ = std::io::stdout().flush();
            }
            ExitCode::SUCCESS
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
