use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ks_forge_core::analysis;
use ks_forge_core::assignments::{
    boolean_frame_function_exists, check_value_indefinite, exists_admissible, propagate, Premise, Propagation,
    SolverConfig,
};
use ks_forge_core::data;
use ks_forge_core::diagram::Diagram;
use ks_forge_core::numfmt::fmt17;
use ks_forge_core::par::Jobs;
use ks_forge_core::reductions::{
    construct_extended_witness, iterate_reduction_with, reduce_toward, strong_upper, StepConfig, StrongGadget,
    WitnessConfig, ZBranch,
};
use ks_forge_core::{Ray, Vector3};

/// Value-indefiniteness witnesses, admissible-assignment solving and
/// reduction-map analysis for three-dimensional observables.
#[derive(Parser, Debug)]
#[command(name = "ks-forge", version)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps, sampling and solver branches (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the orthogonality of every realized context. Exit 1 on failure.
    Validate {
        /// Diagram JSON file, or the name of a shipped data file.
        #[arg(long)]
        diagram: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Search for an admissible assignment. Exit 0 if one exists, 1 if not.
    Solve {
        #[arg(long)]
        diagram: String,
        /// `id=1`, `id=0` or `id=definite`; repeatable.
        #[arg(long = "premise")]
        premises: Vec<String>,
        /// Search Boolean frame functions (total {0,1} assignments) instead.
        #[arg(long)]
        frame: bool,
        /// Maximum number of search nodes.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Decide whether `a = 1` leaves `b` value indefinite. Exit 1 if it does
    /// (no admissible assignment with b defined), 0 otherwise.
    Indefinite {
        #[arg(long)]
        diagram: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Realize the reduction of (a, b) at overlap ⟨a|c⟩ = x.
    Reduce {
        /// Vector as comma-separated components, e.g. `1,0,0`.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, value_enum, default_value_t = Branch::Minus)]
        branch: Branch,
    },
    /// Iterate the reduction step until ⟨a|c_k⟩ ≤ 3/√14 (or --target).
    Iterate {
        /// Start from the canonical pair with this overlap.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        p1: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        b: Option<String>,
        #[arg(long)]
        target: Option<f64>,
        /// Allow overlaps below 3/√14.
        #[arg(long)]
        relaxed: bool,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
    /// Build the extended value-indefiniteness witness for a pair of rays.
    Witness {
        #[arg(long, conflicts_with_all = ["a", "b"])]
        overlap: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        b: Option<String>,
        /// Gadget closing each chain. `data` reads
        /// $KS_FORGE_DATA/strong_ks_24.json, falling back to the shipped
        /// constructed gadget.
        #[arg(long, value_enum, default_value_t = Strong::Data)]
        strong: Strong,
        /// Skip the solver certification.
        #[arg(long)]
        no_certify: bool,
    },
    /// Tabulate f, df/dp1 and p1 − f on an even grid (CSV). Exit 1 on any violation.
    Sweep {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Estimate the slope m of f at p1 = 1.
    Taylor,
    /// Classify b relative to the state a as parallel, orthogonal or indefinite.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
    },
    /// Monte Carlo estimate of the value-definite fraction of the sphere.
    Sample {
        #[arg(long, allow_hyphen_values = true, default_value = "1,0,0")]
        a: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Write a diagram as DOT or JSON, or list the shipped data files.
    Export {
        #[arg(long, required_unless_present = "list")]
        diagram: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Colour the DOT output by the propagation closure of these premises.
        #[arg(long = "premise")]
        premises: Vec<String>,
        /// Regenerate a shipped data file from the library instead of reading it.
        #[arg(long)]
        regenerate: bool,
        #[arg(long)]
        list: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Branch {
    Minus,
    Plus,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Strong {
    Data,
    Constructed,
    Absent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Dot,
    Json,
}

struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => match emit(cli.out.as_deref(), &out.text) {
            Ok(()) => ExitCode::from(out.code),
            Err(e) => {
                eprintln!("ks-forge: {e:#}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("ks-forge: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn jobs(cli: &Cli) -> Jobs {
    Jobs(cli.jobs)
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Validate { diagram, tol } => {
            let d = load_diagram(diagram)?;
            let report = d.validate(*tol);
            let code = u8::from(!report.pass);
            Ok(Output { text: pretty(&report)?, code })
        }
        Command::Solve { diagram, premises, frame, budget } => {
            let d = load_diagram(diagram)?;
            let premises = parse_premises(premises)?;
            let cfg = solver(cli, *budget);
            let verdict = if *frame {
                boolean_frame_function_exists(&d, &premises, &cfg)?
            } else {
                exists_admissible(&d, &premises, &cfg)?
            };
            Ok(Output { text: pretty(&verdict)?, code: verdict.exit_code() as u8 })
        }
        Command::Indefinite { diagram, a, b, budget } => {
            let d = load_diagram(diagram)?;
            let indefinite = check_value_indefinite(&d, a, b, &solver(cli, *budget))?;
            let text = pretty(&json!({ "a": a, "b": b, "indefinite": indefinite }))?;
            Ok(Output { text, code: u8::from(indefinite) })
        }
        Command::Reduce { a, b, x, branch } => {
            let branch = match branch {
                Branch::Minus => ZBranch::Minus,
                Branch::Plus => ZBranch::Plus,
            };
            let r = reduce_toward(parse_ray(a)?, parse_ray(b)?, *x, branch)?;
            let gadget: serde_json::Value = serde_json::from_str(&r.gadget.to_json()?)?;
            let text = pretty(&json!({
                "c": r.c.vector().to_array(),
                "c_local": r.c_local.to_array(),
                "gadget": gadget,
            }))?;
            Ok(Output::ok(text))
        }
        Command::Iterate { p1, a, b, target, relaxed, budget } => {
            let (a, b) = pair(*p1, a.as_deref(), b.as_deref())?;
            let cfg = StepConfig { relax_lower_bound: *relaxed, iteration_budget: *budget };
            let chain = iterate_reduction_with(a, b, target.unwrap_or_else(strong_upper), &cfg)?;
            let overlaps: Vec<String> = chain.iter().map(|t| fmt17(t.overlap_ac())).collect();
            eprintln!("{} step(s); ⟨a|c_k⟩ = {}", chain.len(), overlaps.last().map_or("-", String::as_str));
            Ok(Output::ok(serde_json::to_string_pretty(&chain)? + "\n"))
        }
        Command::Witness { overlap, a, b, strong, no_certify } => {
            let (a, b) = pair(*overlap, a.as_deref(), b.as_deref())?;
            let mut cfg = WitnessConfig {
                certify: !no_certify,
                solver: solver(cli, 100_000_000),
                ..Default::default()
            };
            cfg.gadget = match strong {
                Strong::Data => data::strong_gadget(cfg.tol, &cfg.solver)?,
                Strong::Constructed => StrongGadget::Constructed,
                Strong::Absent => StrongGadget::Absent,
            };
            let ws = construct_extended_witness(a, b, &cfg)?;
            eprintln!(
                "{} observables, {} contexts, {} chain step(s), certification: {:?}",
                ws.diagram.len(),
                ws.diagram.contexts().len(),
                ws.chain.len(),
                ws.certification
            );
            let code = u8::from(ws.certification == ks_forge_core::reductions::Certification::Refuted);
            Ok(Output { text: ws.to_json()? + "\n", code })
        }
        Command::Sweep { lo, hi, n } => {
            let sweep = analysis::sweep_f_with(*lo, *hi, *n, jobs(cli))?;
            for v in &sweep.violations {
                eprintln!("violation at row {}: {:?}", v.row, v.kind);
            }
            let code = u8::from(!sweep.violations.is_empty());
            Ok(Output { text: sweep.to_csv(), code })
        }
        Command::Taylor => {
            let t = analysis::taylor_estimate()?;
            Ok(Output::ok(pretty(&t)?))
        }
        Command::Classify { a, b, eps } => {
            let v = analysis::classify_observable(parse_ray(a)?, parse_ray(b)?, *eps);
            Ok(Output::ok(pretty(&v)?))
        }
        Command::Sample { a, samples, eps, seed } => {
            let r = analysis::measure_demo_with(parse_ray(a)?, *samples, *eps, *seed, jobs(cli))?;
            Ok(Output::ok(pretty(&r)?))
        }
        Command::Export { diagram, format, premises, regenerate, list } => {
            if *list {
                let mut text = String::new();
                for b in data::builtins() {
                    text.push_str(&format!("{}\t{}\n", b.name, b.summary));
                }
                return Ok(Output::ok(text));
            }
            let name = diagram.as_deref().expect("clap enforces --diagram");
            let d = if *regenerate {
                data::builtin(name)?.generate()?
            } else {
                load_diagram(name)?
            };
            match format {
                Format::Json => Ok(Output::ok(d.to_json()? + "\n")),
                Format::Dot => {
                    let premises = parse_premises(premises)?;
                    let colouring = match propagate(&d, &premises)? {
                        Propagation::Closure { assignment, .. } => Some(assignment),
                        Propagation::Conflict(c) => bail!("premises are contradictory:\n{}", c.narrative()),
                    };
                    Ok(Output::ok(d.export_dot(colouring.as_ref().filter(|_| !premises.is_empty()))))
                }
            }
        }
    }
}

fn solver(cli: &Cli, budget: u64) -> SolverConfig {
    SolverConfig { budget, parallel_branches: !jobs(cli).is_sequential() }
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// A file path, or failing that the name of a shipped data file.
fn load_diagram(arg: &str) -> Result<Diagram> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return Diagram::from_json(&text).with_context(|| format!("parsing {arg}"));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    data::load_diagram(stem).map_err(|_| anyhow!("{arg}: no such file or shipped data file"))
}

fn parse_premises(raw: &[String]) -> Result<Vec<Premise>> {
    raw.iter()
        .map(|s| s.parse::<Premise>().map_err(|e| anyhow!("bad premise `{s}`: {e}")))
        .collect()
}

fn parse_ray(s: &str) -> Result<Ray> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad vector component `{t}` in `{s}`")))
        .collect::<Result<_>>()?;
    let [x, y, z] = parts[..] else {
        bail!("vector `{s}` needs exactly three components");
    };
    let v = Vector3::new(x, y, z);
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-2 {
        bail!("vector `{s}` has norm {norm}; expected a unit vector");
    }
    if (norm - 1.0).abs() > 1e-6 {
        eprintln!("warning: normalizing `{s}` (norm {norm})");
    }
    Ok(Ray::normalize(v)?)
}

fn pair(overlap: Option<f64>, a: Option<&str>, b: Option<&str>) -> Result<(Ray, Ray)> {
    match (overlap, a, b) {
        (Some(p), _, _) => {
            if !(p > 0.0 && p < 1.0) {
                bail!("overlap {p} must lie strictly inside (0, 1)");
            }
            let b = Ray::normalize(Vector3::new(p, (1.0 - p * p).sqrt(), 0.0))?;
            Ok((Ray::x_axis(), b))
        }
        (None, Some(a), Some(b)) => Ok((parse_ray(a)?, parse_ray(b)?)),
        _ => bail!("give either an overlap or both --a and --b"),
    }
}
