use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use fisherkit::ingestion;
use fisherkit::knn::Decision;
use fisherkit::pipeline::{self, Dim, ThresholdPolicy};
use fisherkit::synth::{self, SynthParams};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_REJECTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fisherkit",
    about = "Train and run a PCA+LDA+kNN image recognizer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// "auto" or a fixed positive dimension.
#[derive(Debug, Clone, Copy)]
struct DimArg(Dim);

impl FromStr for DimArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(DimArg(Dim::Auto));
        }
        let n: usize = s
            .parse()
            .map_err(|_| format!("expected \"auto\" or a positive integer, got {s:?}"))?;
        if n == 0 {
            return Err("dimension must be at least 1".into());
        }
        Ok(DimArg(Dim::Fixed(n)))
    }
}

/// "none", "auto:<margin>" or "fixed:<value>".
#[derive(Debug, Clone, Copy)]
struct ThresholdArg(ThresholdPolicy);

impl FromStr for ThresholdArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(ThresholdArg(ThresholdPolicy::None));
        }
        if let Some(margin) = s.strip_prefix("auto:") {
            let margin: f64 = margin
                .parse()
                .map_err(|_| format!("bad margin in {s:?}"))?;
            if margin <= 0.0 {
                return Err("margin must be positive".into());
            }
            return Ok(ThresholdArg(ThresholdPolicy::Auto(margin)));
        }
        if let Some(value) = s.strip_prefix("fixed:") {
            let value: f64 = value
                .parse()
                .map_err(|_| format!("bad value in {s:?}"))?;
            if value < 0.0 {
                return Err("threshold must be non-negative".into());
            }
            return Ok(ThresholdArg(ThresholdPolicy::Fixed(value)));
        }
        Err(format!(
            "expected \"none\", \"auto:<margin>\" or \"fixed:<value>\", got {s:?}"
        ))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a recognizer from a directory-per-class PGM gallery
    Train {
        /// Gallery root: <root>/<class>/<image>.pgm
        data_dir: PathBuf,
        /// Where to write the model file
        out_path: PathBuf,
        /// Retained PCA dimension ("auto" = p - C)
        #[arg(long, default_value = "auto")]
        pca_dim: DimArg,
        /// Fisher dimension ("auto" = C - 1)
        #[arg(long, default_value = "auto")]
        fisher_dim: DimArg,
        /// Neighbor count for kNN voting
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        /// Rejection threshold: none, auto:<margin>, or fixed:<value>
        #[arg(long, default_value = "none")]
        threshold: ThresholdArg,
    },
    /// Identify a probe image against a trained model
    Identify {
        model_path: PathBuf,
        image_path: PathBuf,
        /// Also print the full distance report
        #[arg(long)]
        report: bool,
    },
    /// Evaluate a model against a labeled gallery
    Eval {
        model_path: PathBuf,
        data_dir: PathBuf,
        /// Emit machine-readable class,total,correct,rejected lines
        #[arg(long)]
        machine: bool,
    },
    /// Print the contents of a model file
    Inspect { model_path: PathBuf },
    /// Generate a deterministic synthetic PGM gallery
    GenSynthetic {
        out_dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 4)]
        per_class: usize,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        height: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            data_dir,
            out_path,
            pca_dim,
            fisher_dim,
            k,
            threshold,
        } => cmd_train(&data_dir, &out_path, pca_dim.0, fisher_dim.0, k, threshold.0),
        Command::Identify {
            model_path,
            image_path,
            report,
        } => cmd_identify(&model_path, &image_path, report),
        Command::Eval {
            model_path,
            data_dir,
            machine,
        } => cmd_eval(&model_path, &data_dir, machine),
        Command::Inspect { model_path } => cmd_inspect(&model_path),
        Command::GenSynthetic {
            out_dir,
            classes,
            per_class,
            width,
            height,
            seed,
        } => cmd_gen_synthetic(&out_dir, classes, per_class, width, height, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn cmd_train(
    data_dir: &PathBuf,
    out_path: &PathBuf,
    pca_dim: Dim,
    fisher_dim: Dim,
    k: usize,
    threshold: ThresholdPolicy,
) -> fisherkit::Result<u8> {
    let gallery = ingestion::load_gallery(data_dir)?;
    let model = pipeline::train(&gallery, pca_dim, fisher_dim, k, threshold)?;
    pipeline::save_model(&model, out_path)?;
    let accuracy = pipeline::leave_one_out_accuracy(&model)?;
    println!(
        "trained: p={} C={} d={} f={} k={} threshold={} loo_accuracy={:.6}",
        model.exemplar_count(),
        model.class_names.len(),
        model.pca.d,
        model.fisher.fisher_dim(),
        model.k,
        render_threshold(model.threshold),
        accuracy
    );
    Ok(EXIT_OK)
}

fn render_threshold(threshold: Option<f64>) -> String {
    match threshold {
        Some(t) => format!("{t:.6}"),
        None => "none".into(),
    }
}

fn cmd_identify(model_path: &PathBuf, image_path: &PathBuf, report: bool) -> fisherkit::Result<u8> {
    let model = pipeline::load_model(model_path)?;
    let probe = ingestion::load_pgm(image_path)?;
    let (verdict, distances) = pipeline::identify(&model, &probe)?;
    let code = match verdict.decision {
        Decision::Identified(class) => {
            let votes: Vec<String> = verdict
                .votes
                .iter()
                .map(|(c, n)| format!("{}:{}", model.class_names[*c], n))
                .collect();
            println!(
                "IDENTIFIED {} min={:.6} votes={}",
                model.class_names[class],
                verdict.min_distance,
                votes.join(",")
            );
            EXIT_OK
        }
        Decision::Rejected => {
            println!(
                "REJECTED min={:.6} threshold={}",
                verdict.min_distance,
                render_threshold(verdict.threshold_used)
            );
            EXIT_REJECTED
        }
    };
    if report {
        println!("column_sum={:.6}", distances.column_sum);
        println!("sqrt_sum={:.6}", distances.sqrt_sum);
        println!("mean={:.6}", distances.mean);
        println!("min={:.6}", distances.min);
        println!("min_index={}", distances.min_index);
    }
    Ok(code)
}

fn cmd_eval(model_path: &PathBuf, data_dir: &PathBuf, machine: bool) -> fisherkit::Result<u8> {
    let model = pipeline::load_model(model_path)?;
    let gallery = ingestion::load_gallery(data_dir)?;
    let summary = pipeline::evaluate(&model, &gallery)?;
    if machine {
        for class in &summary.per_class {
            println!(
                "{},{},{},{}",
                class.name, class.total, class.correct, class.rejected
            );
        }
        println!(
            "TOTAL,{},{},{}",
            summary.total, summary.correct, summary.rejected
        );
    } else {
        for class in &summary.per_class {
            let accuracy = if class.total == 0 {
                0.0
            } else {
                class.correct as f64 / class.total as f64
            };
            println!(
                "class {}: total={} correct={} rejected={} accuracy={:.6}",
                class.name, class.total, class.correct, class.rejected, accuracy
            );
        }
        println!(
            "TOTAL: total={} correct={} rejected={} accuracy={:.6} mean_genuine_min={:.6}",
            summary.total,
            summary.correct,
            summary.rejected,
            summary.accuracy(),
            summary.mean_genuine_min_distance
        );
    }
    Ok(EXIT_OK)
}

fn cmd_inspect(model_path: &PathBuf) -> fisherkit::Result<u8> {
    let model = pipeline::load_model(model_path)?;
    println!("format_version: {}", model.format_version);
    println!(
        "dims: N={} d={} f={} p={} C={}",
        model.pixel_count(),
        model.pca.d,
        model.fisher.fisher_dim(),
        model.exemplar_count(),
        model.class_names.len()
    );
    println!("image: {}x{}", model.width, model.height);
    println!("k: {}", model.k);
    println!("threshold: {}", render_threshold(model.threshold));
    println!("classes: {}", model.class_names.join(", "));
    let top_pca: Vec<String> = model
        .pca
        .eigenvalues
        .iter()
        .take(5)
        .map(|v| format!("{v:.6}"))
        .collect();
    println!("pca_eigenvalues[..5]: {}", top_pca.join(", "));
    let fisher: Vec<String> = model
        .fisher
        .eigenvalues
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect();
    println!("fisher_eigenvalues: {}", fisher.join(", "));
    Ok(EXIT_OK)
}

fn cmd_gen_synthetic(
    out_dir: &PathBuf,
    classes: usize,
    per_class: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> fisherkit::Result<u8> {
    let params = SynthParams {
        classes,
        per_class,
        width,
        height,
        seed,
    };
    synth::generate_gallery(out_dir, &params)?;
    println!(
        "generated: {} classes x {} images, {}x{}, seed {} -> {}",
        classes,
        per_class,
        width,
        height,
        seed,
        out_dir.display()
    );
    Ok(EXIT_OK)
}
