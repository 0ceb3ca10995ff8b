//! `mdlab`: runs the MD5 orbit, foliation and index-invariant checks and
//! writes a versioned JSON report.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdlab_core::chern::FoliationType;
use mdlab_core::coadjoint::Covector;
use mdlab_core::foliation::{ActionSpec, Stratum};
use mdlab_core::lie::{FamilyId, Md5Family};

use commands::FoliationCheck;
use config::{Overrides, RunConfig};
use report::Report;

const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "mdlab",
    version,
    about = "Coadjoint orbits, foliations and K-theoretic index invariants of MD5 Lie groups"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON config file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
    #[arg(long, global = true)]
    quadrature_tol: Option<f64>,
    #[arg(long, global = true)]
    grid2d: Option<usize>,
    #[arg(long, global = true)]
    grid3d: Option<usize>,
    /// Half-line compactification scale L.
    #[arg(long, global = true)]
    truncation: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MDLAB_THREADS")]
    threads: Option<usize>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Family tag, e.g. 5_4_11.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda3: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
}

impl FamilyArgs {
    fn resolve(&self) -> Result<Option<Md5Family>, String> {
        let Some(tag) = &self.family else {
            return Ok(None);
        };
        let id = FamilyId::parse(tag).map_err(|e| e.to_string())?;
        let family = id
            .with_params(|name| match name {
                "lambda" => self.lambda,
                "lambda1" => self.lambda1,
                "lambda2" => self.lambda2,
                "lambda3" => self.lambda3,
                "phi" => self.phi,
                "mu" => self.mu,
                _ => None,
            })
            .map_err(|e| e.to_string())?;
        family.validate().map_err(|e| e.to_string())?;
        Ok(Some(family))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum TypeArg {
    F2,
    F3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ActionArg {
    Lambda12,
    Lambda14,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum StratumArg {
    V1,
    W1,
    V2,
    W2,
    V3,
    W3,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the algebra(s), check Jacobi and the derived ideal.
    Algebra {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Sample covectors and check orbit dimensions are 0 or 2.
    Mdcheck {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Compare the coadjoint flow with the closed-form orbit.
    Orbit {
        #[command(flatten)]
        family: FamilyArgs,
        /// Covector (alpha,beta,gamma,delta,sigma); random draws if omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        covector: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
        /// Number of `a` values on [-3, 3].
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Stratum preservation, leaf-space invariants and integrability.
    Foliation {
        #[arg(long, value_enum)]
        action: Option<ActionArg>,
        #[arg(long, value_enum, default_value = "all")]
        check: FoliationCheck,
        #[arg(long, value_enum, ignore_case = true)]
        stratum: Option<StratumArg>,
    },
    /// Enumerate exact completions of a six-term sequence.
    Sixterm {
        /// gamma1, gamma2, gamma3 or allZ.
        #[arg(long)]
        preset: String,
        /// Largest absolute matrix entry.
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// Compute the index invariant of C*(F2) or C*(F3).
    Invariants {
        #[arg(long = "type", value_enum, ignore_case = true)]
        kind: TypeArg,
        /// Grid size for the integrals of this type (3D for F2, 2D for F3).
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run the whole suite.
    Reproduce,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Algebra { .. } => "algebra",
            Command::Mdcheck { .. } => "mdcheck",
            Command::Orbit { .. } => "orbit",
            Command::Foliation { .. } => "foliation",
            Command::Sixterm { .. } => "sixterm",
            Command::Invariants { .. } => "invariants",
            Command::Reproduce => "reproduce",
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("mdlab: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let g = &cli.global;
    let mut overrides = Overrides {
        seed: g.seed,
        rank_tol: g.rank_tol,
        residual_tol: g.residual_tol,
        quadrature_tol: g.quadrature_tol,
        grid2d: g.grid2d,
        grid3d: g.grid3d,
        truncation: g.truncation,
        samples: g.samples,
        output: g.output.clone(),
    };
    if let Command::Invariants {
        kind,
        resolution: Some(n),
    } = &cli.command
    {
        match kind {
            TypeArg::F2 => overrides.grid3d = Some(*n),
            TypeArg::F3 => overrides.grid2d = Some(*n),
        }
    }
    let cfg = match RunConfig::load(g.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Some(n) = g.threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return usage(e);
        }
    }

    let checks = match &cli.command {
        Command::Algebra { family } => match family.resolve() {
            Ok(f) => commands::algebra(f, &cfg),
            Err(e) => return usage(e),
        },
        Command::Mdcheck { family } => match family.resolve() {
            Ok(f) => commands::mdcheck(f, &cfg),
            Err(e) => return usage(e),
        },
        Command::Orbit {
            family,
            covector,
            x,
            grid,
        } => {
            let f = match family.resolve() {
                Ok(Some(f)) => f,
                Ok(None) => return usage("orbit needs --family"),
                Err(e) => return usage(e),
            };
            if *grid < 2 {
                return usage("--grid must be at least 2");
            }
            let cov = match covector.as_deref() {
                None => None,
                Some(&[a, b, c, d, e]) => Some(Covector([a, b, c, d, e])),
                Some(v) => {
                    return usage(format!(
                        "--covector needs 5 comma-separated values (got {})",
                        v.len()
                    ))
                }
            };
            commands::orbit(f, cov, *x, *grid, &cfg)
        }
        Command::Foliation {
            action,
            check,
            stratum,
        } => {
            let action = action.map(|a| match a {
                ActionArg::Lambda12 => ActionSpec::Lambda12,
                ActionArg::Lambda14 => ActionSpec::Lambda14,
            });
            let stratum = stratum.map(|s| match s {
                StratumArg::V1 => Stratum::V1,
                StratumArg::W1 => Stratum::W1,
                StratumArg::V2 => Stratum::V2,
                StratumArg::W2 => Stratum::W2,
                StratumArg::V3 => Stratum::V3,
                StratumArg::W3 => Stratum::W3,
            });
            if let (Some(a), Some(s)) = (action, stratum) {
                if !a.strata().contains(&s) {
                    return usage(format!("stratum {s} is not preserved by {a}"));
                }
            }
            commands::foliation(action, *check, stratum, &cfg)
        }
        Command::Sixterm { preset, bound } => {
            if *bound < 0 {
                return usage("--bound must be non-negative");
            }
            commands::sixterm(preset, *bound)
        }
        Command::Invariants { kind, .. } => commands::invariants(
            match kind {
                TypeArg::F2 => FoliationType::F2,
                TypeArg::F3 => FoliationType::F3,
            },
            &cfg,
        ),
        Command::Reproduce => commands::reproduce(&cfg),
    };

    let report = Report::new(cli.command.name(), cfg.clone(), checks);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &cfg.output {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("mdlab: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if g.json {
        println!("{text}");
    } else {
        print!("{}", report.summary());
    }
    ExitCode::from(report.exit_code())
}
