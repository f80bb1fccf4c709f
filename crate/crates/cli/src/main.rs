use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nrvqa::dataset::{parse_unlabeled_csv, Table};
use nrvqa::pca::cumulative_proportions;
use nrvqa::plot::{parse_scatter_csv, render_scatter_svg};
use nrvqa::ssim::ssim_per_frame;
use nrvqa::{
    apply_centering, covariance_matrix, cross_validate, eigendecompose, fit_centering,
    parse_feature_csv, read_yuv420p, Dataset, Pipeline, PipelineConfig, SigmaChoice,
};

#[derive(Parser)]
#[command(name = "nrvqa", version, about = "No-reference video quality estimation from bitstream features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Luma SSIM between two raw YUV 4:2:0 files
    Ssim {
        reference: PathBuf,
        distorted: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        /// Write per-frame scores as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the model bundle on a labelled feature CSV
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Predict SSIM for every row of a feature CSV
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Write predictions as CSV instead of printing them
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k-fold cross-validation of the whole pipeline
    Cv {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = nrvqa::eval::DEFAULT_FOLDS)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for cv_report.json, cv_report.txt and scatter.csv
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Eigenvalue spectrum of the (scaled) feature covariance
    Pca {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        no_scale: bool,
        #[arg(long, default_value = "0.95", value_parser = parse_threshold)]
        pca_threshold: Threshold,
    },
    /// SVG scatter of prediction against target
    Plot {
        scatter: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Box constraint on the dual coefficients
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// Half-width of the insensitive tube
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// RBF width, or "median" for the median pairwise distance
    #[arg(long, default_value = "median", value_parser = parse_sigma)]
    sigma: SigmaChoice,
    /// Cumulative variance share for PCA, or "off"
    #[arg(long, default_value = "0.95", value_parser = parse_threshold)]
    pca_threshold: Threshold,
    /// Center features without scaling to unit variance
    #[arg(long)]
    no_scale: bool,
}

impl ModelArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            scale: !self.no_scale,
            pca_threshold: self.pca_threshold.0,
            c: self.c,
            epsilon: self.epsilon,
            sigma: self.sigma,
            ..PipelineConfig::default()
        }
    }
}

fn parse_sigma(s: &str) -> Result<SigmaChoice, String> {
    if s == "median" {
        return Ok(SigmaChoice::Median);
    }
    s.parse::<f64>()
        .map(SigmaChoice::Fixed)
        .map_err(|_| format!("expected a number or \"median\", got `{s}`"))
}

/// PCA variance share; `None` disables PCA.
#[derive(Clone, Copy)]
struct Threshold(Option<f64>);

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    if s == "off" {
        return Ok(Threshold(None));
    }
    s.parse::<f64>()
        .map(|t| Threshold(Some(t)))
        .map_err(|_| format!("expected a number or \"off\", got `{s}`"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_feature_csv(&read_text(path)?).with_context(|| format!("invalid feature file {}", path.display()))
}

fn cmd_ssim(reference: &Path, distorted: &Path, width: usize, height: usize, out: Option<&Path>) -> Result<()> {
    let open = |p: &Path| fs::read(p).with_context(|| format!("cannot read {}", p.display()));
    let (r, d) = (open(reference)?, open(distorted)?);
    if r.len() != d.len() {
        bail!(
            "{} and {} differ in size ({} vs {} bytes) for {width}x{height} frames",
            reference.display(),
            distorted.display(),
            r.len(),
            d.len()
        );
    }
    let frames = |bytes: &[u8], p: &Path| {
        read_yuv420p(bytes, width, height).with_context(|| format!("cannot decode {}", p.display()))
    };
    let scores = ssim_per_frame(&frames(&r, reference)?, &frames(&d, distorted)?)?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    if let Some(out) = out {
        let mut csv = String::from("frame,ssim\n");
        for (i, s) in scores.iter().enumerate() {
            csv.push_str(&format!("{i},{s}\n"));
        }
        write_text(out, &csv)?;
    }
    println!("{mean:.6}");
    Ok(())
}

fn cmd_train(features: &Path, out: &Path, model: &ModelArgs) -> Result<()> {
    let dataset = load_dataset(features)?;
    let pipeline = Pipeline::fit_dataset(&dataset, &model.config())?;
    write_text(out, &pipeline.to_json()?)?;
    println!("trained on {} samples", dataset.len());
    match pipeline.retained_components() {
        Some(l) => println!("retained components: {l}"),
        None => println!("retained components: off"),
    }
    println!("support vectors: {}", pipeline.svr.support_vector_count());
    Ok(())
}

fn cmd_predict(model: &Path, features: &Path, out: Option<&Path>) -> Result<()> {
    let pipeline = Pipeline::from_json(&read_text(model)?)
        .with_context(|| format!("invalid model file {}", model.display()))?;
    let rows = parse_unlabeled_csv(&read_text(features)?)
        .with_context(|| format!("invalid feature file {}", features.display()))?;
    let labelled = rows.iter().all(|(_, t)| t.is_some());
    let mut csv = String::from(if labelled { "index,prediction,ssim\n" } else { "index,prediction\n" });
    for (i, (fv, target)) in rows.iter().enumerate() {
        let p = pipeline.predict(fv)?;
        match target.filter(|_| labelled) {
            Some(t) => csv.push_str(&format!("{i},{p},{t}\n")),
            None => csv.push_str(&format!("{i},{p}\n")),
        }
    }
    match out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_cv(features: &Path, k: usize, seed: u64, out: Option<&Path>, model: &ModelArgs) -> Result<()> {
    let dataset = load_dataset(features)?;
    let report = cross_validate(&dataset, k, &model.config(), seed)?;
    let table = report.to_text_table();
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_text(&dir.join("cv_report.json"), &report.to_json()?)?;
        write_text(&dir.join("cv_report.txt"), &table)?;
        write_text(&dir.join("scatter.csv"), &report.to_scatter_csv())?;
    }
    print!("{table}");
    Ok(())
}

fn cmd_pca(features: &Path, no_scale: bool, threshold: Option<f64>) -> Result<()> {
    let dataset = load_dataset(features)?;
    if dataset.len() < 2 {
        bail!("PCA needs at least 2 samples, got {}", dataset.len());
    }
    let table: Table = dataset.to_table();
    let centered = apply_centering(&fit_centering(&table, !no_scale)?, &table)?;
    let eigen = eigendecompose(&covariance_matrix(&centered)?)?;
    let cum = cumulative_proportions(&eigen.eigenvalues);

    println!("{:<10} {:>14} {:>12} {:>12}", "component", "eigenvalue", "proportion", "cumulative");
    let mut prev = 0.0;
    for (j, (lambda, c)) in eigen.eigenvalues.iter().zip(&cum).enumerate() {
        println!("{:<10} {:>14.6} {:>12.6} {:>12.6}", format!("pc{}", j + 1), lambda, c - prev, c);
        prev = *c;
    }
    if let Some(t) = threshold {
        let (l, share) = nrvqa::pca::select_components(&eigen.eigenvalues, t);
        println!("retained at {t}: {l} ({share:.6})");
    }
    Ok(())
}

fn cmd_plot(scatter: &Path, out: &Path) -> Result<()> {
    let points = parse_scatter_csv(&read_text(scatter)?)
        .with_context(|| format!("invalid scatter file {}", scatter.display()))?;
    write_text(out, &render_scatter_svg(&points))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ssim {
            reference,
            distorted,
            width,
            height,
            out,
        } => cmd_ssim(&reference, &distorted, width, height, out.as_deref()),
        Command::Train { features, out, model } => cmd_train(&features, &out, &model),
        Command::Predict { model, features, out } => cmd_predict(&model, &features, out.as_deref()),
        Command::Cv {
            features,
            k,
            seed,
            out,
            model,
        } => cmd_cv(&features, k, seed, out.as_deref(), &model),
        Command::Pca {
            features,
            no_scale,
            pca_threshold,
        } => cmd_pca(&features, no_scale, pca_threshold.0),
        Command::Plot { scatter, out } => cmd_plot(&scatter, &out),
    }
}

fn main() -> ExitCode {
    // Warnings only; the tool reads no environment variables.
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_timestamp(None)
        .init();

    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
