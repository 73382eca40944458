use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use facref::config::Config;
use facref::error::{Error, Result};
use facref::features::compute_features;
use facref::io::{
    export_texture, read_model, read_opening_library, read_point_cloud, read_scan_spec,
    write_model, write_point_cloud, write_point_cloud_with_features,
};
use facref::pipeline::{build_report, evaluate_models, run_pipeline, PipelineOptions};
use facref::sim::simulate;

#[derive(Parser)]
#[command(
    name = "facref",
    version,
    about = "Refine LoD2 building models to LoD3 with mobile laser scans"
)]
struct Cli {
    /// Parameter file (TOML); built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scan of a ground-truth model.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the scan specification.
        #[arg(long)]
        seed: Option<u64>,
        /// Rays received per opening, used later by `eval`.
        #[arg(long)]
        rays_out: Option<PathBuf>,
    },
    /// Append geometric feature columns to a point cloud.
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine a model with a scan.
    Refine {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        /// LoD3 model; CityGML for .gml, JSON otherwise.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cloud_out: Option<PathBuf>,
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        grid_dump: Option<PathBuf>,
        #[arg(long)]
        dump_shapes: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a refined model and cloud against ground truth.
    Eval {
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Ray counts from `simulate --rays-out`; every opening counts as
        /// measured without it.
        #[arg(long)]
        rays: Option<PathBuf>,
        /// Refined cloud; labels are scored against its true labels.
        #[arg(long)]
        cloud: Option<PathBuf>,
        /// Input cloud, scored the same way for comparison.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Export façade textures as PGM images and label CSVs.
    Textures {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "model")]
        layer: Layer,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Layer {
    Model,
    Points,
    Posterior,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Simulate {
            model,
            spec,
            out,
            seed,
            rays_out,
        } => {
            let truth = read_model(&model)?;
            let mut spec = read_scan_spec(&spec)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let sim = simulate(&truth, &spec)?;
            write_point_cloud(&sim.cloud, &out)?;
            if let Some(p) = rays_out {
                write(
                    &p,
                    &serde_json::to_string_pretty(&sim.opening_rays)
                        .map_err(|e| Error::Schema(e.to_string()))?,
                )?;
            }
            println!("{} points from {} rays", sim.cloud.len(), sim.rays_cast);
        }
        Command::Features { input, out } => {
            let cloud = read_point_cloud(&input)?;
            let features = compute_features(&cloud, &config.features);
            write_point_cloud_with_features(&cloud, &features, &out)?;
            let missing = features.iter().filter(|f| f.is_none()).count();
            if missing > 0 {
                log::warn!("{missing} points have too few neighbors for features");
            }
        }
        Command::Refine {
            model,
            cloud,
            out,
            cloud_out,
            library,
            grid_dump,
            dump_shapes,
            report,
        } => {
            let base = read_model(&model)?;
            let input = read_point_cloud(&cloud)?;
            let library = library.as_deref().map(read_opening_library).transpose()?;
            let opts = PipelineOptions {
                library,
                grid_dump,
                shapes_dump: dump_shapes,
            };
            let result = run_pipeline(&base, &input, &config, &opts)?;
            write_model(&result.model, &out)?;
            if let Some(p) = cloud_out {
                write_point_cloud(&result.cloud, &p)?;
            }
            if let Some(p) = report {
                let timings = serde_json::to_value(&result.timings)
                    .map_err(|e| Error::Schema(e.to_string()))?;
                let summary = serde_json::json!({
                    "openings": result.model.openings.len(),
                    "relabeled_points": result.fusion.relabeled_points,
                    "dynamic_voxels": result.fusion.dynamic_voxels,
                    "warnings": result.warnings,
                    "timings": timings,
                    "params": config,
                });
                write(
                    &p,
                    &serde_json::to_string_pretty(&summary)
                        .map_err(|e| Error::Schema(e.to_string()))?,
                )?;
            }
            println!(
                "{} openings, {} points relabeled other",
                result.model.openings.len(),
                result.fusion.relabeled_points
            );
        }
        Command::Eval {
            pred,
            truth,
            rays,
            cloud,
            input,
            json,
        } => {
            let detection = match (pred, truth) {
                (Some(p), Some(t)) => {
                    let counts: Option<BTreeMap<String, usize>> = match rays {
                        Some(r) => Some(
                            serde_json::from_str(
                                &std::fs::read_to_string(&r).map_err(|e| Error::io(&r, e))?,
                            )
                            .map_err(|e| Error::Schema(e.to_string()))?,
                        ),
                        None => None,
                    };
                    let k_min = config.eval.k_min;
                    let measured = |id: &str| {
                        counts
                            .as_ref()
                            .is_none_or(|c| c.get(id).copied().unwrap_or(0) >= k_min)
                    };
                    Some(evaluate_models(
                        &read_model(&p)?,
                        &read_model(&t)?,
                        measured,
                        config.eval.iou_threshold,
                    )?)
                }
                (None, None) => None,
                _ => return Err(Error::Config("--pred and --truth go together".into())),
            };
            let refined = cloud.as_deref().map(read_point_cloud).transpose()?;
            let original = input.as_deref().map(read_point_cloud).transpose()?;
            let truth_cloud = refined.as_ref().or(original.as_ref());
            let report = build_report(
                &config,
                original.as_ref(),
                refined.as_ref(),
                truth_cloud,
                detection,
            )?;
            print!("{}", report.to_text());
            if let Some(p) = json {
                write(&p, &report.to_json()?)?;
            }
        }
        Command::Textures {
            model,
            cloud,
            out_dir,
            layer,
        } => {
            let base = read_model(&model)?;
            let input = read_point_cloud(&cloud)?;
            let result = run_pipeline(&base, &input, &config, &PipelineOptions::default())?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            for f in &result.facades {
                let stem = out_dir.join(&f.facade.id);
                let (pgm, _) = match layer {
                    Layer::Model => export_texture(&f.model_layer, &stem)?,
                    Layer::Points => export_texture(&f.points_layer, &stem)?,
                    Layer::Posterior => export_texture(&f.posterior, &stem)?,
                };
                println!("{}", pgm.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FACREF_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
