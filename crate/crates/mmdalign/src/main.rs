use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mmdalign::generate::{labeled_subset, synthetic_embeddings, EmbeddingSpec};
use mmdalign::io::{read_dataset_auto, write_dataset_csv, write_report, write_sweep_csv};
use mmdalign::{
    align_pair, angle_sweep, derive_seed, embedding_experiment, global_minimum, local_minima,
    run_simulated_experiment, simulate_domains, AlignSettings, AppError, EmbedConfig, ExperimentReport, Result,
    SimConfig,
};
use mmdalign_core::{DomainPair, RankTolerance};

#[derive(Parser)]
#[command(name = "mmdalign", version, about = "Align affinely shifted domains by minimizing MMD over orthogonal matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct AlignArgs {
    /// Gaussian kernel bandwidth σ².
    #[arg(long, default_value_t = 2.0)]
    sigma_sq: f64,
    /// Cayley step size.
    #[arg(long, default_value_t = 50.0)]
    tau: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
}

impl AlignArgs {
    fn settings(&self, labeled_fraction: Option<f64>) -> AlignSettings {
        let d = AlignSettings::default();
        AlignSettings {
            sigma_sq: self.sigma_sq,
            tau: self.tau,
            max_iters: self.max_iters,
            restarts: self.restarts,
            labeled_fraction: labeled_fraction.unwrap_or(d.labeled_fraction),
            ..d
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample the two-component mixture and write both observed domains.
    Simulate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        n: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Align two CSV domains and write the shared-space coordinates.
    Adapt {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[command(flatten)]
        align: AlignArgs,
        /// Select the restart with this fraction of labeled target rows.
        #[arg(long)]
        labeled_fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// MMD² over all 2×2 rotations and reflections for the simulated domains.
    Sweep {
        #[arg(long, default_value_t = 360)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Full mixture benchmark; writes report.json and sweep.csv.
    ExperimentSim {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        align: AlignArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// Binary-task grid over every class pair of two labeled embedding files
    /// (synthetic embeddings when no files are given).
    ExperimentEmbed {
        #[arg(long, requires = "target")]
        source: Option<PathBuf>,
        #[arg(long, requires = "source")]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value_t = 0.1)]
        labeled_fraction: f64,
        #[command(flatten)]
        align: AlignArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timing: bool,
    },
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn finish(mut report: ExperimentReport, start: Option<Instant>, path: &Path) -> Result<()> {
    report.runtime_ms = start.map(|s| s.elapsed().as_millis() as u64);
    write_report(&report, path)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { seed, n, out } => {
            let cfg = SimConfig { n, n_source: n / 2, ..SimConfig::new(seed) };
            let (z_a, z_b, x_a, x_b) = simulate_domains(&cfg)?;
            ensure_dir(&out)?;
            write_dataset_csv(&x_a, &out.join("source.csv"))?;
            write_dataset_csv(&x_b, &out.join("target.csv"))?;
            write_dataset_csv(&z_a, &out.join("latent_source.csv"))?;
            write_dataset_csv(&z_b, &out.join("latent_target.csv"))?;
        }
        Command::Adapt { source, target, p, align, labeled_fraction, seed, out, timing } => {
            let start = timing.then(Instant::now);
            let x_a = read_dataset_auto(&source)?;
            let x_b = read_dataset_auto(&target)?;
            let settings = align.settings(labeled_fraction);
            let labeled = match labeled_fraction {
                Some(f) if x_b.labels().is_some() && x_a.labels().is_some() => {
                    Some(x_b.select_rows(&labeled_subset(x_b.nrows(), f, derive_seed(seed, 1)))?)
                }
                Some(_) => return Err(AppError::Usage("--labeled-fraction needs labeled source and target".into())),
                None => None,
            };
            let pair = align_pair(&x_a, &x_b, labeled.as_ref(), p, &settings, derive_seed(seed, 0))?;
            let chosen = pair.semisupervised.unwrap_or(pair.unsupervised);
            let res = pair.result(chosen);
            ensure_dir(&out)?;
            write_dataset_csv(&res.z_a, &out.join("source_aligned.csv"))?;
            write_dataset_csv(&res.z_b, &out.join("target_aligned.csv"))?;
            let mut report = ExperimentReport::new(
                "adapt",
                serde_json::json!({
                    "source": source, "target": target, "p": p, "seed": seed,
                    "labeled_fraction": labeled_fraction, "align": settings,
                }),
            );
            report.seeds.insert("master".into(), seed);
            report.extras.insert("p".into(), pair.p.into());
            report.scenarios.push(mmdalign::ScenarioResult {
                name: if pair.semisupervised.is_some() { "semisupervised" } else { "unsupervised" }.into(),
                accuracy: pair.accuracy(chosen),
                mmd_before: Some(res.mmd_before),
                mmd_after: Some(res.mmd_after),
                selected_restart: Some(chosen),
                restarts: pair.restarts.clone(),
            });
            finish(report, start, &out.join("report.json"))?;
        }
        Command::Sweep { grid, seed, out } => {
            let cfg = SimConfig::new(seed);
            let (_, _, x_a, x_b) = simulate_domains(&cfg)?;
            let pair = DomainPair::fit(&x_a, &x_b, cfg.p, RankTolerance::default())?;
            let rows = angle_sweep(pair.z_a(), pair.z_b_prime(), grid, &cfg.align.kernel()?)?;
            write_sweep_csv(&rows, &out)?;
            let best = global_minimum(&rows).expect("grid is non-empty");
            eprintln!(
                "{} local minima; global minimum {} at alpha = {:.4} (mmd2 = {:.6})",
                local_minima(&rows).len(),
                best.family,
                best.alpha,
                best.mmd2
            );
        }
        Command::ExperimentSim { seed, align, out, timing } => {
            let cfg = SimConfig { align: align.settings(None), ..SimConfig::new(seed) };
            let report = run_simulated_experiment(&cfg, &out, timing)?;
            for s in &report.scenarios {
                eprintln!("{:<22} accuracy {:.4}", s.name, s.accuracy.unwrap_or(f64::NAN));
            }
        }
        Command::ExperimentEmbed { source, target, p, labeled_fraction, align, seed, out, timing } => {
            let start = timing.then(Instant::now);
            let (x_a, x_b) = match (source, target) {
                (Some(s), Some(t)) => (read_dataset_auto(&s)?, read_dataset_auto(&t)?),
                _ => {
                    let e = synthetic_embeddings(&EmbeddingSpec { seed, ..Default::default() })?;
                    (e.source, e.target)
                }
            };
            let cfg = EmbedConfig { seed, p, align: align.settings(Some(labeled_fraction)) };
            let report = embedding_experiment(&x_a, &x_b, &cfg)?;
            ensure_dir(&out)?;
            for key in ["tasks_ok", "improved_unsupervised", "improved_semisupervised"] {
                eprintln!("{key}: {}", report.extras[key]);
            }
            finish(report, start, &out.join("report.json"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
