//! Argument parsing and the five subcommands.

use crate::config::{default_bits, parse_bits, ConfigError, Suite, SuiteConfig};
use crate::suites::{aux_primes, field_of, parse_ideal, run_suite};
use clap::{Args, Parser, Subcommand};
use kforge_core::field::{HeckeCharacter, Ideal, RayClassGroup, RhoConvention};
use kforge_core::kronecker::{lprime_kronecker, CMData, Normalization};
use kforge_core::lfun::{functional_equation_lprime, zeta_star, RayClassField};
use kforge_core::precision::{decimal_short, rel_dist, PrecisionContext};
use kforge_core::units::{elliptic_unit, galois_orbit, law_tolerance, verify_integrality};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;

#[derive(Parser, Debug)]
#[command(name = "kforge", version, about = "L-values, elliptic units and Iwasawa checks over imaginary quadratic fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Precision in bits (default: KF_DEFAULT_BITS or 128).
    #[arg(long)]
    pub bits: Option<u32>,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// L'(chi, -j) from the lattice sum, next to the functional-equation value.
    Lvalue {
        /// d of Q(sqrt d).
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        /// n, "x,y" for (x + y w), hnf:a,b,c or prime:p:k.
        #[arg(long)]
        conductor: String,
        /// Character index in the ray class group (0 is trivial).
        #[arg(long = "char")]
        chi: usize,
        #[arg(long, default_value_t = 1)]
        j: u32,
        #[command(flatten)]
        common: Common,
    },
    /// zeta*(1 - m) of the ray class field of the conductor.
    ZetaStar {
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long, default_value = "1")]
        conductor: String,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        common: Common,
    },
    /// The elliptic unit of a conductor, its Galois orbit and integrality evidence.
    Eunit {
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long)]
        conductor: String,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the suites of a configuration file.
    Verify {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the randomized Iwasawa suite.
    Iwasawa {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(kforge_core::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(kforge_core::Error::Unsupported(_)) => 2,
            Failure::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Core(kforge_core::Error::Unsupported(m)) => write!(f, "unsupported regime: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<kforge_core::Error> for Failure {
    fn from(e: kforge_core::Error) -> Self {
        Failure::Core(e)
    }
}

#[derive(Serialize)]
struct Output<T: Serialize> {
    timestamp: String,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(body: T, out: &Option<String>) -> Result<(), Failure> {
    let o = Output { timestamp: chrono::Utc::now().to_rfc3339(), body };
    let text = serde_json::to_string_pretty(&o).expect("serializable output");
    write_out(&text, out)
}

fn write_out(text: &str, out: &Option<String>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Config(format!("{path}: {e}"))),
        None => {
            use std::io::Write;
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn ctx_of(c: &Common) -> Result<PrecisionContext, Failure> {
    let bits = match c.bits {
        Some(b) => parse_bits(&b.to_string())?,
        None => default_bits()?,
    };
    Ok(PrecisionContext::new(bits))
}

fn cmd_lvalue(field: i64, conductor: &str, chi: usize, j: u32, common: &Common) -> Result<i32, Failure> {
    let ctx = ctx_of(common)?;
    let k = field_of(field)?;
    let f = parse_ideal(k, conductor)?;
    let group = RayClassGroup::new(k, f)?;
    let chars = HeckeCharacter::all(&group);
    let ch = chars
        .get(chi)
        .ok_or_else(|| Failure::Config(format!("character index {chi} out of range 0..{}", chars.len())))?;
    if ch.is_trivial() {
        return Err(kforge_core::Error::Rejected("chi must be nontrivial".into()).into());
    }
    let cm = CMData::new(&group)?;
    let kron = lprime_kronecker(ch, j, &cm, Normalization::Identity, RhoConvention::Inverse, None, &ctx)?;
    let oracle = functional_equation_lprime(ch, j, &ctx)?;
    let r = rel_dist(&kron.value.value, &oracle.value.value);
    let tol = law_tolerance(&ctx);
    let accepted = r < tol;
    emit(
        json!({
            "field": field,
            "conductor": f,
            "bits": ctx.target_bits,
            "kronecker": kron,
            "oracle": oracle,
            "relative_difference": decimal_short(&r),
            "tolerance": decimal_short(&tol),
            "accepted": accepted,
        }),
        &common.out,
    )?;
    Ok(if accepted { 0 } else { 1 })
}

fn cmd_zeta_star(field: i64, conductor: &str, m: u32, common: &Common) -> Result<i32, Failure> {
    let ctx = ctx_of(common)?;
    let k = field_of(field)?;
    let f = parse_ideal(k, conductor)?;
    let rf = RayClassField::new(k, f)?;
    let z = zeta_star(&rf, m, &ctx)?;
    emit(
        json!({ "field": field, "conductor": f, "bits": ctx.target_bits, "degree": rf.degree(), "zeta_star": z }),
        &common.out,
    )?;
    Ok(0)
}

fn cmd_eunit(field: i64, conductor: &str, common: &Common) -> Result<i32, Failure> {
    let ctx = ctx_of(common)?;
    let k = field_of(field)?;
    let f = parse_ideal(k, conductor)?;
    let a: Ideal = aux_primes(k, &f, 1)[0];
    let spec = elliptic_unit(k, &f, &a, &ctx)?;
    let orbit = galois_orbit(&spec, &ctx)?;
    let integ = verify_integrality(k, &f, &a, &ctx)?;
    let accepted = integ.accepted;
    let orbit: Vec<_> = orbit.into_iter().map(|(class, v)| json!({ "class": class, "value": v })).collect();
    emit(
        json!({ "bits": ctx.target_bits, "unit": spec, "orbit": orbit, "integrality": integ }),
        &common.out,
    )?;
    Ok(if accepted { 0 } else { 1 })
}

fn load_config(path: &Option<String>) -> Result<SuiteConfig, Failure> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{p}: {e}")))?;
            Ok(SuiteConfig::parse(&text)?)
        }
        None => Ok(SuiteConfig::default_with_bits(default_bits()?)),
    }
}

fn cmd_verify(
    config: &Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    common: &Common,
    only: Option<Suite>,
) -> Result<i32, Failure> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if let Some(b) = common.bits {
        cfg.bits = vec![parse_bits(&b.to_string())?];
    }
    if let Some(s) = only {
        cfg.suites = vec![s];
        if config.is_none() {
            cfg.instances = 100;
        }
    }
    let out = common.out.clone().or_else(|| cfg.out.clone());
    let report = run_suite(&cfg)?;
    write_out(&report.to_json(), &out)?;
    Ok(report.exit_code())
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Lvalue { field, conductor, chi, j, common } => cmd_lvalue(*field, conductor, *chi, *j, common),
        Command::ZetaStar { field, conductor, m, common } => cmd_zeta_star(*field, conductor, *m, common),
        Command::Eunit { field, conductor, common } => cmd_eunit(*field, conductor, common),
        Command::Verify { config, seed, workers, common } => cmd_verify(config, *seed, *workers, common, None),
        Command::Iwasawa { config, seed, workers, common } => {
            cmd_verify(config, *seed, *workers, common, Some(Suite::Iwasawa))
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("kforge: {f}");
            f.exit_code()
        }
    }
}

