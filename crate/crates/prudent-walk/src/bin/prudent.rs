use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use prudent_walk::effective::{solve_tilts, ExcursionKernel, PStar};
use prudent_walk::enumerate::{
    count_excursion_set, count_prudent, count_two_sided_plus, ExactSampler, Family,
    DEFAULT_L_MAX,
};
use prudent_walk::error::Error;
use prudent_walk::io::{
    build_report, cache_dir_from_env, canonical_json, render_dataset, write_text, DatasetFormat,
    ReportConfig, SampleRecord,
};
use prudent_walk::sample::{
    sample_kinetic, stream_rng, StripCache, TwoSidedSampler, UniformIsSampler,
};
use prudent_walk::scaling::par_draws;
use prudent_walk::verify::run_all;

/// Excursion-renewal toolkit for the 2D uniform prudent walk.
#[derive(Parser)]
#[command(name = "prudent", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Omega,
    OmegaPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Kinetic,
    TwoSided,
    UniformIs,
    UniformExact,
}

#[derive(Subcommand)]
enum Command {
    /// Exact DFS counts of a path family.
    Count {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        l: usize,
        /// Restrict to the symmetry-reduced class (first step east, first
        /// vertical step north).
        #[arg(long)]
        reduced: bool,
        #[arg(long, default_value_t = DEFAULT_L_MAX)]
        l_max: usize,
    },
    /// Excursion-set sizes |I_t| and the kernel K(t) for t <= t-max.
    Excursions {
        #[arg(long, default_value_t = 18)]
        t_max: usize,
    },
    /// Solve the tilt constants and report the defining identities.
    Tilt {
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Draw paths and write them as CSV (sample_id, steps, weight).
    Sample {
        #[arg(long, value_enum)]
        law: LawArg,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Aggregate scaling report as JSON.
    Report {
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 3.0)]
        delta: f64,
        #[arg(long, default_value_t = 5.0)]
        kappa: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the acceptance suite; nonzero exit on any failure.
    Verify {
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Capacity(_) => 3,
        _ => 1,
    }
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> prudent_walk::Result<ExitCode> {
    match cli.command {
        Command::Count {
            family,
            l,
            reduced,
            l_max,
        } => {
            let table = match family {
                FamilyArg::Omega => count_prudent(l, reduced, l_max, false)?,
                FamilyArg::OmegaPlus => count_two_sided_plus(l, l_max)?,
            };
            let doc = json!({
                "family": table.family.tag(),
                "L": table.l,
                "count": table.count.to_string(),
            });
            println!("{}", serde_json::to_string(&doc).unwrap());
        }
        Command::Excursions { t_max } => {
            let kernel = ExcursionKernel::new(t_max.max(1));
            let mut rows = Vec::new();
            for t in 1..=t_max {
                let count = if t <= 24 {
                    Some(count_excursion_set(t)?.to_string())
                } else {
                    None
                };
                rows.push(json!({
                    "t": t,
                    "count": count,
                    "K": kernel.k(t)?,
                }));
            }
            println!("{}", canonical_json(&serde_json::Value::Array(rows)).trim_end());
        }
        Command::Tilt { tolerance } => {
            let tilt = solve_tilts(tolerance)?;
            let kernel = ExcursionKernel::new(1024);
            let (k_hat, tail) = kernel.k_hat(tilt.lambda_star)?;
            let g_hat = prudent_walk::effective::g_of_lambda(tilt.lambda_hat)?;
            let g_closed = 0.5 + (-2.0 * tilt.lambda_hat).exp() / 8.0;
            let doc = json!({
                "lambda_star": tilt.lambda_star,
                "alpha_star": tilt.alpha_star,
                "lambda_hat": tilt.lambda_hat,
                "lambda_double_star": tilt.lambda_double_star,
                "k_hat_at_lambda_star": k_hat,
                "k_hat_tail_bound": tail,
                "g_hat_identity_residual": g_hat - g_closed,
            });
            println!("{}", canonical_json(&doc).trim_end());
        }
        Command::Sample {
            law,
            length,
            n,
            seed,
            out,
            format,
            workers,
        } => {
            let format: DatasetFormat = format.parse()?;
            let records = with_workers(workers, || draw_records(law, length, n, seed))?;
            let text = render_dataset(&records, format);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Report {
            length,
            n,
            seed,
            eps,
            delta,
            kappa,
            alpha,
            out,
            workers,
        } => {
            let cfg = ReportConfig {
                l: length,
                eps,
                n_draws: n,
                seed,
                delta,
                kappa,
                alpha,
            };
            let doc = with_workers(workers, || build_report(&cfg))?;
            let text = canonical_json(&doc);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Verify { workers } => {
            let results = with_workers(workers, run_all);
            let mut all_pass = true;
            for r in &results {
                all_pass &= r.pass;
                let line = json!({
                    "criterion": r.name,
                    "pass": r.pass,
                    "seconds": (r.seconds * 10.0).round() / 10.0,
                    "details": r.details,
                });
                println!("{}", serde_json::to_string(&line).unwrap());
            }
            if !all_pass {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn draw_records(
    law: LawArg,
    length: usize,
    n: usize,
    seed: u64,
) -> prudent_walk::Result<Vec<SampleRecord>> {
    let records = match law {
        LawArg::Kinetic => par_draws(n, seed, |i, rng| SampleRecord {
            sample_id: i,
            path: sample_kinetic(length, rng),
            weight: 1.0,
        }),
        LawArg::TwoSided => {
            let pstar = PStar::standard()?;
            let rows: Vec<prudent_walk::Result<SampleRecord>> = par_draws(n, seed, |i, rng| {
                let sampler = TwoSidedSampler::new(&pstar);
                Ok(SampleRecord {
                    sample_id: i,
                    path: sampler.sample_path(length, rng)?,
                    weight: 1.0,
                })
            });
            rows.into_iter().collect::<prudent_walk::Result<_>>()?
        }
        LawArg::UniformIs => {
            let pstar = Arc::new(PStar::standard()?);
            let cache = Arc::new(match cache_dir_from_env() {
                Some(dir) => StripCache::with_disk(
                    pstar.tilt,
                    prudent_walk::io::TableCache::new(dir)?,
                ),
                None => StripCache::new(pstar.tilt),
            });
            let sampler = UniformIsSampler::new(Arc::clone(&pstar), cache);
            let rows: Vec<prudent_walk::Result<SampleRecord>> = par_draws(n, seed, |i, rng| {
                let w = sampler.sample(length, rng)?;
                Ok(SampleRecord {
                    sample_id: i,
                    path: w.path,
                    weight: w.weight,
                })
            });
            rows.into_iter().collect::<prudent_walk::Result<_>>()?
        }
        LawArg::UniformExact => {
            let family = Family::Omega;
            let sampler = ExactSampler::new(family, length, DEFAULT_L_MAX)?;
            (0..n as u64)
                .map(|i| {
                    let mut rng = stream_rng(seed, i);
                    SampleRecord {
                        sample_id: i,
                        path: sampler.sample(&mut rng).clone(),
                        weight: 1.0,
                    }
                })
                .collect()
        }
    };
    Ok(records)
}
