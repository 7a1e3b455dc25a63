//! `heckelab`: exact q-expansions, Hecke operators, subgroup counts and
//! Maeda-type scans from the command line.
//!
//! Exit status: 0 when the value was produced or every check passed, 1 when
//! a check failed (the report lists witnesses), 2 for usage and resource
//! errors.

mod commands;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "heckelab",
    version,
    about = "Exact arithmetic for level-one modular forms and Hecke operators"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Coefficient cache directory; created on demand.
    #[arg(long, global = true, env = "HECKELAB_CACHE")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Shorthand for --format json.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormName {
    Delta,
    C4,
    C6,
}

#[derive(Debug, Args)]
pub struct FormArgs {
    #[arg(long, value_enum, default_value_t = FormName::Delta)]
    pub form: FormName,
    #[arg(long, default_value_t = 1)]
    pub power: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    AsStated,
    Uniform3,
    Uniform2,
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    /// Compute a table and write it to the cache.
    Store(CacheKeyArgs),
    /// Print a cached table.
    Load(CacheKeyArgs),
    /// Validate a cache file.
    Verify {
        #[arg(long)]
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Tau,
    DeltaPow,
}

#[derive(Debug, Args)]
pub struct CacheKeyArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Power of Δ (ignored for tau).
    #[arg(long, default_value_t = 1)]
    pub i: u32,
    #[arg(long)]
    pub precision: usize,
    /// 0 for exact integers.
    #[arg(long, default_value_t = 0)]
    pub modulus: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ramanujan's τ(n), or τ over a range.
    Tau {
        #[arg(long)]
        n: u64,
        /// Print τ(n..=to).
        #[arg(long)]
        to: Option<u64>,
    },
    /// q-expansion of Δ, c4 or c6 raised to a power.
    Qexp {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        precision: usize,
        /// Reduce modulo M (0 for exact).
        #[arg(long, default_value_t = 0)]
        modulus: u64,
    },
    /// Coefficients of T_n applied to a form.
    HeckeApply {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        precision: usize,
    },
    /// Check T_m∘T_n = Σ d^{k−1} T_{mn/d²} on the basis of weight k.
    ComposeCheck {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        precision: usize,
    },
    /// Eigenvalue of T_n on a form.
    Eigen {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 20)]
        precision: usize,
    },
    /// The Δᵉ coordinate of T_n(Δᵉ).
    Bcoeff {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        e: u32,
        #[arg(long, default_value_t = 0)]
        modulus: u64,
    },
    /// Subgroups of type C_d × C_{m/d} in C_e × C_{mn/e}: formula against census.
    SubgroupCount {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        e: u64,
    },
    /// The generating-polynomial identity for the subgroup counts.
    SubgroupPoly {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        /// Print the ℓ-exponent table for exponents (m, n) instead.
        #[arg(long)]
        ell_table: bool,
    },
    /// σ(n) and ψ(n) census identities in C_n × C_n.
    Census {
        #[arg(long)]
        n: u64,
    },
    /// Characteristic polynomial of T_n on S_12d.
    Charpoly {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
    },
    /// Irreducibility and S_D Galois group of the T_n polynomial on S_12d.
    CertifyGalois {
        #[arg(long, default_value_t = 2)]
        n: u64,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = heckelab::galois::DEFAULT_PRIME_BUDGET)]
        budget: usize,
    },
    /// All d ≤ dmax with 3 | a_d(Δ^i) for every i < d.
    MaedaScan3 {
        #[arg(long)]
        dmax: u32,
    },
    /// All d ≤ dmax passing the 2-adic valuation condition.
    MaedaScan2 {
        #[arg(long)]
        dmax: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::AsStated)]
        mode: ModeArg,
    },
    /// Nonvanishing certificate for T_{dn} on S_12d.
    MaedaCert {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        side: u64,
        /// Skip the independent recomputation.
        #[arg(long)]
        no_verify: bool,
    },
    /// n·τ(n) ≡ σ(n) modulo 3, 8 or 16.
    RamanujanScan {
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        modulus: u64,
    },
    /// n·b_nᵉ ≡ σ(n) for e ≤ emax, n ≤ nmax.
    #[command(name = "thmE-scan")]
    ThmEScan {
        #[arg(long)]
        emax: u32,
        #[arg(long)]
        nmax: u64,
    },
    /// Cache maintenance.
    #[command(subcommand)]
    Cache(CacheCommand),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = if cli.global.json {
        Format::Json
    } else {
        cli.global.format
    };
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if out
                .write(format, &mut stdout)
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
