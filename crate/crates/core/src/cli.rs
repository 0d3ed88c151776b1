//! Command-line driver: `fit`, `select`, `cluster`, `simulate`, `segment`.
//!
//! Exit codes: 0 success, 1 domain/format error, 2 usage error.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::fitter::{fit, FitConfig, InitMethod};
use crate::io::{
    load_csv, load_ppm, recolor_image, save_ppm, segment_image, write_labels_csv, ComponentCount,
};
use crate::model::MixtureModel;
use crate::selection::{map_classify, select_g};
use crate::simulate::{run_study, Study, StudySpec};

#[derive(Parser)]
#[command(
    name = "kentmix",
    about = "Fit mixtures of Kent distributions on the unit sphere, select the number of components, and cluster data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FitOpts {
    /// RNG seed shared by initialization restarts
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum BSLM iterations per restart
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    /// Number of seeded restarts; the best final likelihood wins
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Floor on beta
    #[arg(long, default_value_t = 1e-5)]
    bbar: f64,
    /// Floor on kappa - 2*beta
    #[arg(long, default_value_t = 1e-5)]
    kbar: f64,
    /// Relative early-stopping tolerance on the likelihood trace (0 disables)
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Initialization: spherical_kmeans or random_frames
    #[arg(long, default_value = "spherical_kmeans")]
    init: String,
}

impl FitOpts {
    fn to_config(&self, g: usize) -> Result<FitConfig> {
        let init_method: InitMethod = self.init.parse()?;
        Ok(FitConfig {
            g,
            max_iterations: self.max_iter,
            rel_tol: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            bbar: self.bbar,
            kbar: self.kbar,
            init_method,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a g-component mixture to CSV data and write the model JSON
    Fit {
        /// Input CSV with columns x,y,z (header optional)
        #[arg(long)]
        input: PathBuf,
        /// Number of mixture components
        #[arg(long)]
        g: usize,
        /// Project rows onto the unit sphere instead of requiring unit norm
        #[arg(long, default_value_t = false)]
        normalize: bool,
        #[command(flatten)]
        opts: FitOpts,
        /// Output model JSON path
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit every g in [gmin, gmax] and select by the penalized criterion
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        gmin: usize,
        #[arg(long)]
        gmax: usize,
        #[arg(long, default_value_t = false)]
        normalize: bool,
        #[command(flatten)]
        opts: FitOpts,
        /// Output CSV table (g,loglik,penalty,criterion,selected)
        #[arg(long)]
        output: PathBuf,
    },
    /// Classify CSV data with a fitted model (plug-in MAP rule)
    Cluster {
        /// Model JSON produced by `fit`
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = false)]
        normalize: bool,
        /// Output labels CSV (index,label)
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a seeded simulation study and write its metrics JSON
    Simulate {
        /// One of s1, s2, s3, s4
        #[arg(long)]
        study: String,
        /// Observations per repetition
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Number of repetitions
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Seed for data generation and fitting
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restarts per fit
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Maximum BSLM iterations per restart
        #[arg(long = "max-iter", default_value_t = 100)]
        max_iter: usize,
        /// Output JSON path
        #[arg(long)]
        output: PathBuf,
    },
    /// Segment a PPM image by clustering pixel colors on the sphere
    Segment {
        /// Input image (P3 or P6 PPM, maxval 255)
        #[arg(long)]
        image: PathBuf,
        /// Component count, or "auto" to select over g in [2, 10]
        #[arg(long)]
        g: String,
        #[command(flatten)]
        opts: FitOpts,
        /// Output per-pixel labels CSV (index,label; 0 = unmapped pixel)
        #[arg(long)]
        labels: PathBuf,
        /// Optional recolored PPM, each cluster painted with its mean RGB
        #[arg(long)]
        recolor: Option<PathBuf>,
    },
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("usage error: {msg}");
    2
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Fit {
            input,
            g,
            normalize,
            opts,
            output,
        } => {
            let cfg = opts.to_config(g)?;
            let dataset = load_csv(&input, normalize)?;
            let report = fit(&dataset.points, &cfg)?;
            std::fs::write(&output, report.model.to_canonical_json())?;
            println!(
                "fit: n={} g={} loglik={:.6} iterations={} converged={} restart={} -> {}",
                dataset.points.len(),
                g,
                report.loglik_trace.last().unwrap(),
                report.iterations_run,
                report.converged,
                report.restart_index_of_best,
                output.display()
            );
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
        Command::Select {
            input,
            gmin,
            gmax,
            normalize,
            opts,
            output,
        } => {
            if gmin < 1 || gmin > gmax {
                return Ok(usage_error(&format!(
                    "--gmin must satisfy 1 <= gmin <= gmax, got [{gmin}, {gmax}]"
                )));
            }
            let cfg = opts.to_config(gmin)?;
            let dataset = load_csv(&input, normalize)?;
            let table = select_g(&dataset.points, gmin, gmax, &cfg)?;
            std::fs::write(&output, table.to_csv())?;
            println!(
                "select: n={} range=[{gmin},{gmax}] selected g={} -> {}",
                dataset.points.len(),
                table.selected_g,
                output.display()
            );
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
        Command::Cluster {
            model,
            input,
            normalize,
            output,
        } => {
            let text = std::fs::read_to_string(&model)?;
            let model = MixtureModel::from_json(&text)?;
            let dataset = load_csv(&input, normalize)?;
            let labels = map_classify(&dataset.points, &model);
            write_labels_csv(&output, labels.labels())?;
            println!(
                "cluster: n={} g={} -> {}",
                dataset.points.len(),
                model.g(),
                output.display()
            );
            Ok(0)
        }
        Command::Simulate {
            study,
            n,
            reps,
            seed,
            restarts,
            max_iter,
            output,
        } => {
            let study: Study = study.parse()?;
            let spec = StudySpec {
                study,
                n,
                reps,
                seed,
            };
            let g = match study {
                Study::S1 | Study::S4 => 3,
                Study::S2 => 6,
                Study::S3 => 5,
            };
            let mut cfg = FitConfig::new(g);
            cfg.seed = seed;
            cfg.restarts = restarts;
            cfg.max_iterations = max_iter;
            let result = run_study(&spec, &cfg)?;
            std::fs::write(&output, result.to_json())?;
            println!(
                "simulate: study={} n={n} reps={reps} failed={} -> {}",
                study.name(),
                result.failed_reps,
                output.display()
            );
            Ok(0)
        }
        Command::Segment {
            image,
            g,
            opts,
            labels,
            recolor,
        } => {
            let count: ComponentCount = g.parse()?;
            let cfg = opts.to_config(match count {
                ComponentCount::Fixed(g) => g,
                ComponentCount::Auto => 2,
            })?;
            let img = load_ppm(&image)?;
            let seg = segment_image(&img, count, &cfg)?;
            write_labels_csv(&labels, &seg.labels)?;
            if let Some(path) = &recolor {
                let painted = recolor_image(&img, &seg.labels)?;
                save_ppm(path, &painted)?;
            }
            println!(
                "segment: {}x{} g={} -> {}",
                img.width,
                img.height,
                seg.model.g(),
                labels.display()
            );
            Ok(0)
        }
    }
}

/// Parses argv and dispatches; returns the process exit code.
pub fn cli_main<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
