mod commands;
mod config;
mod report;

use biocirc::associated::Hat;
use biocirc::kernels::Method;
use biocirc::verify::Suite;
use clap::{Parser, Subcommand};
use commands::{CliError, Ctx, VerifyArgs};
use config::{parse_tol, Format, KindArg, RunConfig, ZArg};
use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

/// Bi-orthogonal polynomial systems with 2j−k and j−2k moment structure.
#[derive(Parser, Debug)]
#[command(name = "biocirc", version)]
struct Cli {
    /// exp | expu:u=<complex> | fourier:<path.json>
    #[arg(long, global = true, default_value = "exp")]
    weight: String,
    /// 2jk or j2k
    #[arg(long, global = true, default_value = "2jk")]
    kind: KindArg,
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    offset: i64,
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,
    /// Evaluation points, comma separated, e.g. 0.5+0.1i,-1.5i
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<ZArg>,
    /// Tolerance override, name=value (verify: suite name)
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,
    /// Quadrature points
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moments w_k; the default range is the window of the size-n determinant.
    Moments {
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<i64>,
    },
    /// Structured determinants of sizes 0..=n.
    Det,
    /// Monic polynomials, norms and values for degrees 0..=n.
    Poly,
    /// Recurrence coefficients for degrees 0..=n.
    Recur,
    /// Reproducing kernel K_n(x, y) or L_n(x, y).
    Kernel {
        #[arg(long, default_value = "0.5+0.2i", allow_hyphen_values = true)]
        x: ZArg,
        #[arg(long, default_value = "1.3-0.4i", allow_hyphen_values = true)]
        y: ZArg,
        /// sum | master | cd; all three when omitted
        #[arg(long)]
        method: Option<String>,
    },
    /// Carathéodory and associated functions at the z points.
    Assoc {
        /// P, Q, R, S, Pdagger, Sdagger; the four primary ones when omitted
        #[arg(long, value_delimiter = ',')]
        hat: Vec<String>,
    },
    /// τ-function determinants 𝒯_{k,ℓ}(u) for k = 0..=n.
    Tau {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        u: ZArg,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        ell: i64,
    },
    /// Run identity suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long = "n-max", default_value_t = 5)]
        n_max: usize,
        /// Offsets for both kinds, comma separated; weight-dependent defaults otherwise
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        offsets: Option<Vec<i64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moments { .. } => "moments",
            Command::Det => "det",
            Command::Poly => "poly",
            Command::Recur => "recur",
            Command::Kernel { .. } => "kernel",
            Command::Assoc { .. } => "assoc",
            Command::Tau { .. } => "tau",
            Command::Verify { .. } => "verify",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("BIOCIRC_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::config(format!("BIOCIRC_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::config("BIOCIRC_THREADS must be positive"));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let cfg = RunConfig {
        command: cli.command.name().into(),
        weight: cli.weight.clone(),
        kind: cli.kind,
        offset: cli.offset,
        n: cli.n,
        z: cli.z.iter().map(|z| z.0).collect(),
        tolerances: cli.tolerances.iter().cloned().collect::<BTreeMap<_, _>>(),
        points: cli.points,
        format: cli.format,
        seed: cli.seed,
    };
    let ctx = Ctx::new(cfg)?;
    let (report, code) = match &cli.command {
        Command::Moments { lo, hi } => (commands::moments(&ctx, *lo, *hi)?, 0),
        Command::Det => (commands::det(&ctx)?, 0),
        Command::Poly => (commands::poly(&ctx)?, 0),
        Command::Recur => (commands::recur(&ctx)?, 0),
        Command::Kernel { x, y, method } => {
            let m = match method.as_deref() {
                None => None,
                Some("sum") => Some(Method::Sum),
                Some("master") => Some(Method::MasterDet),
                Some("cd") => Some(Method::Cd),
                Some(other) => return Err(CliError::config(format!("unknown method {other:?}"))),
            };
            (commands::kernel(&ctx, x.0, y.0, m)?, 0)
        }
        Command::Assoc { hat } => {
            let which = if hat.is_empty() {
                Hat::PRIMARY.to_vec()
            } else {
                hat.iter()
                    .map(|h| Hat::parse(h).ok_or_else(|| CliError::config(format!("unknown associated function {h:?}"))))
                    .collect::<Result<Vec<_>, _>>()?
            };
            (commands::assoc(&ctx, &which)?, 0)
        }
        Command::Tau { u, ell } => (commands::tau(&ctx, u.0, *ell)?, 0),
        Command::Verify { suite, n_max, offsets } => {
            let suites = Suite::parse(suite).ok_or_else(|| CliError::config(format!("unknown suite {suite:?}")))?;
            commands::verify(&ctx, &VerifyArgs { suites, n_max: *n_max, offsets: offsets.clone() })?
        }
    };
    let mut out = std::io::stdout().lock();
    // a closed pipe (e.g. `| head`) is not an error
    let _ = out.write_all(report.render(cli.format).as_bytes()).and_then(|_| out.flush());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
