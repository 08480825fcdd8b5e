//! `hsdet`: exact determinantal moments, density reconstruction and
//! separability probabilities from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hsdet::bigreal::{bits_for_digits, format_sig};
use hsdet::cache::{MomentCache, VerifyOutcome};
use hsdet::mc::{estimate_moment, separability_fraction, Field};
use hsdet::moments::{moment, moment_table};
use hsdet::rebit::rebit_density_grid;
use hsdet::reconstruct::{intercept_sweep_with, legendre_coefficients, DensityEstimate};
use hsdet::series::separability_probability;
use hsdet::{BigReal, ExactRational, HalfIntegerAlpha, MomentFamily, MomentSequence};
use rayon::prelude::*;

/// Significant digits of every decimal in CSV output.
const OUTPUT_DIGITS: usize = 30;

#[derive(Parser)]
#[command(
    name = "hsdet",
    version,
    about = "Hilbert-Schmidt determinantal moments and separability probabilities"
)]
struct Cli {
    /// Directory holding cached moment tables. Without it moments are
    /// recomputed on every run.
    #[arg(long, global = true, env = "HSDET_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Precision {
    /// Working precision in decimal digits.
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u32).range(30..))]
    digits: u32,
}

#[derive(clap::Args)]
struct Source {
    /// balanced, unbalanced or rhodet.
    #[arg(long)]
    family: MomentFamily,
    /// Half-integer Dyson-index parameter (0.5, 1, 1.5, ...).
    #[arg(long)]
    alpha: HalfIntegerAlpha,
    /// Number of moments (the expansion degree).
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    n_moments: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Exact moments as CSV: n, moment, decimal.
    Moments {
        #[arg(long)]
        family: MomentFamily,
        #[arg(long)]
        alpha: HalfIntegerAlpha,
        /// Single moment order to print.
        #[arg(long, conflicts_with = "upto")]
        n: Option<u32>,
        /// Print all orders 0..=UPTO.
        #[arg(long)]
        upto: Option<u32>,
    },
    /// Reconstructed density and CDF on a grid: x, density, cdf.
    Reconstruct {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1001, value_parser = clap::value_parser!(u32).range(2..))]
        grid: u32,
        #[command(flatten)]
        precision: Precision,
    },
    /// Density at x = 0 for a list or range of alphas: alpha, intercept.
    Intercepts {
        #[arg(long)]
        family: MomentFamily,
        /// Comma list ("0.5,1,2") or range "start:stop[:step]".
        #[arg(long, default_value = "0.5:35:0.5")]
        alphas: String,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
        n_moments: u32,
        #[command(flatten)]
        precision: Precision,
    },
    /// Median of the reconstructed density.
    Median {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        precision: Precision,
    },
    /// Separability probability from the exact series.
    Sepprob {
        #[arg(long)]
        alpha: HalfIntegerAlpha,
        /// Bound on the neglected tail (a decimal or p/q literal).
        #[arg(long, default_value = "1e-30")]
        epsilon: String,
    },
    /// Closed-form two-rebit density on a grid: y, f.
    RebitDensity {
        #[arg(long, default_value_t = 1001, value_parser = clap::value_parser!(u32).range(2..))]
        grid: u32,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(30..))]
        digits: u32,
    },
    /// Monte Carlo check against the exact moments.
    Mc {
        #[arg(long, default_value = "unbalanced")]
        family: MomentFamily,
        #[arg(long)]
        field: Field,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Estimate the fraction with det ρ^PT ≥ 0 instead of a moment.
        #[arg(long)]
        separability: bool,
    },
    /// Inspect or maintain the moment cache.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheAction {
    List,
    Clear,
    Verify,
}

struct Session {
    cache: Option<MomentCache>,
    out: Box<dyn Write>,
}

impl Session {
    fn moments(
        &self,
        family: MomentFamily,
        alpha: HalfIntegerAlpha,
        n_max: u32,
    ) -> hsdet::Result<MomentSequence> {
        load_moments(self.cache.as_ref(), family, alpha, n_max)
    }

    fn csv(&mut self) -> csv::Writer<&mut dyn Write> {
        csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut *self.out as &mut dyn Write)
    }

    fn estimate(&self, source: &Source, digits: u32) -> Result<DensityEstimate> {
        let moments = self.moments(source.family, source.alpha, source.n_moments)?;
        let expansion = legendre_coefficients(&moments, source.n_moments as usize)?;
        Ok(DensityEstimate::new(expansion, digits))
    }
}

fn load_moments(
    cache: Option<&MomentCache>,
    family: MomentFamily,
    alpha: HalfIntegerAlpha,
    n_max: u32,
) -> hsdet::Result<MomentSequence> {
    match cache {
        Some(c) => c.moments(family, alpha, n_max),
        None => moment_table(family, alpha, n_max),
    }
}

fn sig(x: &BigReal) -> String {
    format_sig(x, OUTPUT_DIGITS)
}

fn decimal(q: &ExactRational) -> String {
    sig(&q.to_float(bits_for_digits(OUTPUT_DIGITS as u32 + 10)))
}

fn run(cli: Cli) -> Result<bool> {
    let cache = match &cli.cache_dir {
        Some(dir) => Some(MomentCache::open(dir)?),
        None => None,
    };
    let out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut ctx = Session { cache, out };
    let mut ok = true;

    match cli.command {
        Command::Moments {
            family,
            alpha,
            n,
            upto,
        } => {
            family.check_alpha(alpha)?;
            let rows: Vec<(u32, ExactRational)> = match (n, upto) {
                (Some(n), _) => vec![(n, moment(family, alpha, n)?)],
                (None, Some(upto)) => ctx
                    .moments(family, alpha, upto)?
                    .values
                    .into_iter()
                    .zip(0..)
                    .map(|(v, n)| (n, v))
                    .collect(),
                (None, None) => bail!("one of --n or --upto is required"),
            };
            let mut w = ctx.csv();
            w.write_record(["n", "moment", "decimal"])?;
            for (n, v) in rows {
                w.write_record([n.to_string(), v.to_string(), decimal(&v)])?;
            }
            w.flush()?;
        }
        Command::Reconstruct {
            source,
            grid,
            precision,
        } => {
            let est = ctx.estimate(&source, precision.digits)?;
            est.negativity_check(grid as usize);
            let rows = est
                .grid(grid as usize)
                .par_iter()
                .map(|x| Ok([sig(x), sig(&est.density(x)?), sig(&est.cdf(x)?)]))
                .collect::<hsdet::Result<Vec<_>>>()?;
            let mut w = ctx.csv();
            w.write_record(["x", "density", "cdf"])?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Command::Intercepts {
            family,
            alphas,
            n_moments,
            precision,
        } => {
            let alphas = HalfIntegerAlpha::parse_range(&alphas)?;
            for &a in &alphas {
                family.check_alpha(a)?;
            }
            let cache = ctx.cache.as_ref();
            let rows = intercept_sweep_with(&alphas, n_moments as usize, precision.digits, |a| {
                load_moments(cache, family, a, n_moments)
            });
            let mut w = ctx.csv();
            w.write_record(["alpha", "intercept"])?;
            for row in rows {
                let value = match row.intercept {
                    Ok(v) => sig(&v),
                    Err(e) => {
                        eprintln!("hsdet: alpha {}: {e}", row.alpha);
                        ok = false;
                        "NaN".to_string()
                    }
                };
                w.write_record([row.alpha.to_string(), value])?;
            }
            w.flush()?;
        }
        Command::Median { source, precision } => {
            let est = ctx.estimate(&source, precision.digits)?;
            let median = est.median()?;
            let mut w = ctx.csv();
            w.write_record(["family", "alpha", "n_moments", "median"])?;
            w.write_record([
                source.family.to_string(),
                source.alpha.to_string(),
                source.n_moments.to_string(),
                sig(&median),
            ])?;
            w.flush()?;
        }
        Command::Sepprob { alpha, epsilon } => {
            let eps = ExactRational::parse_literal(&epsilon)?;
            let s = separability_probability(alpha, &eps)?;
            let mut w = ctx.csv();
            w.write_record([
                "alpha",
                "partial_sum",
                "decimal",
                "terms_used",
                "tail_bound",
            ])?;
            w.write_record([
                alpha.to_string(),
                s.partial_sum.to_string(),
                s.partial_sum.to_decimal(50),
                s.terms_used.to_string(),
                s.tail_bound.to_decimal(6),
            ])?;
            w.flush()?;
        }
        Command::RebitDensity { grid, digits } => {
            let rows = rebit_density_grid(grid as usize, digits)?;
            let mut w = ctx.csv();
            w.write_record(["y", "f"])?;
            for (y, f) in rows {
                w.write_record([sig(&y), sig(&f)])?;
            }
            w.flush()?;
        }
        Command::Mc {
            family,
            field,
            n,
            samples,
            seed,
            separability,
        } => {
            let (statistic, est, exact) = if separability {
                let eps = ExactRational::parse_literal("1e-20")?;
                let p = separability_probability(field.alpha(), &eps)?.partial_sum;
                (
                    "separable_fraction".to_string(),
                    separability_fraction(field, samples, seed)?,
                    p,
                )
            } else {
                let est = estimate_moment(family, field, n, samples, seed)?;
                (
                    format!("{family}_moment_{n}"),
                    est,
                    moment(family, field.alpha(), n)?,
                )
            };
            let exact_f = exact.to_f64();
            let z = (est.mean - exact_f) / est.standard_error;
            let mut w = ctx.csv();
            w.write_record([
                "statistic",
                "field",
                "samples",
                "seed",
                "mean",
                "standard_error",
                "exact",
                "exact_decimal",
                "z",
            ])?;
            w.write_record([
                statistic,
                field.to_string(),
                est.samples.to_string(),
                seed.to_string(),
                format!("{:e}", est.mean),
                format!("{:e}", est.standard_error),
                exact.to_string(),
                format!("{exact_f:e}"),
                format!("{z:.3}"),
            ])?;
            w.flush()?;
        }
        Command::Cache { action } => {
            let Some(cache) = ctx.cache.take() else {
                bail!("cache commands need --cache-dir or HSDET_CACHE_DIR");
            };
            match action {
                CacheAction::List => {
                    let mut w = ctx.csv();
                    w.write_record(["family", "two_alpha", "order", "path"])?;
                    for e in cache.list()? {
                        w.write_record([
                            e.family.to_string(),
                            e.alpha.two_alpha().to_string(),
                            e.order.to_string(),
                            e.path.display().to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
                CacheAction::Clear => {
                    let removed = cache.clear()?;
                    writeln!(ctx.out, "removed {removed} cached tables")?;
                }
                CacheAction::Verify => {
                    let mut bad = Vec::new();
                    for report in cache.verify()? {
                        match &report.outcome {
                            VerifyOutcome::Ok { checked } => {
                                writeln!(
                                    ctx.out,
                                    "ok {} (entries {checked:?})",
                                    report.path.display()
                                )?;
                            }
                            VerifyOutcome::Corrupt { detail } => {
                                writeln!(ctx.out, "corrupt {}: {detail}", report.path.display())?;
                                bad.push(format!("{}: {detail}", report.path.display()));
                            }
                        }
                    }
                    ctx.out.flush()?;
                    if !bad.is_empty() {
                        bail!("corrupted cache file {}", bad.join("; "));
                    }
                }
            }
        }
    }
    ctx.out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("hsdet: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
