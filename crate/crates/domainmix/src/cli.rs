//! Command-line front end: one binary exposing each library capability as a
//! subcommand.
//!
//! Every subcommand is deterministic under `--seed`, writes its data to files,
//! and reserves standard error for progress notes and error listings. Values
//! for the shared configuration flags resolve in three layers: built-in
//! defaults, then a `--config` file, then explicit flags. Exit codes separate
//! failure categories: `1` for bad flag or configuration values, `2` for
//! missing or malformed input data, and `3` for computations that fail their
//! numerical contract.

use std::ffi::OsString;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::augment::{apply_policy, AugPolicy, AugmentError, StylePool};
use crate::harness::{
    ablation_csv, ablation_matrix, compactness_metrics, pca_scatter_export, train_with,
    HarnessError, SynthSpec, TrainOptions,
};
use crate::image::ImageTensor;
use crate::io::{
    load_image, read_emb, rng_stream, save_image, semantic_shift, write_emb, RunConfig,
};
use crate::spectral::{decompose, fft2d, ifft2d};
use crate::vmf::{fit, sample, EmbeddingBatch, UnitVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A subcommand failure, categorized by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// A flag or configuration value is invalid.
    Usage(String),
    /// Input data is missing, unreadable, or malformed.
    Data(String),
    /// A computation failed its numerical contract.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::Numerical(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<crate::io::IoError> for CliError {
    fn from(e: crate::io::IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::BadLambda(_)
            | AugmentError::BadProbability(_)
            | AugmentError::BadSampler(_) => CliError::Usage(e.to_string()),
            AugmentError::ShapeMismatch(..)
            | AugmentError::EmptyBatch
            | AugmentError::EmptyStylePool => CliError::Data(e.to_string()),
            AugmentError::Spectral(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::BadSpec(_) | HarnessError::BadModel(_) => CliError::Usage(e.to_string()),
            HarnessError::Io(io) => CliError::Data(io.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "domainmix",
    version,
    about = "Frequency-domain style augmentation and hyperspherical feature analysis",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blend the amplitude spectra of a directory of images with random styles
    Augment(AugmentCmd),
    /// Export the amplitude and phase spectra of one image
    Spectrum(SpectrumCmd),
    /// Estimate the mean direction and concentration of each class in an embedding file
    VmfFit(VmfFitCmd),
    /// Draw unit vectors from a von Mises-Fisher distribution
    VmfSample(VmfSampleCmd),
    /// Train the small demonstration classifier on the synthetic two-domain task
    DemoTrain(DemoTrainCmd),
    /// Run the four-configuration training sweep and tabulate the results
    Ablate(AblateCmd),
    /// Report the feature-space compactness of an embedding file
    Metrics(MetricsCmd),
    /// Difference between the first rows of two embedding files
    SemanticShift(SemanticShiftCmd),
}

/// Flags shared by the subcommands that read the run configuration. Each flag
/// mirrors the config-file key of the same name (`--p-aug` is `p_aug` and so
/// on); a flag set on the command line overrides the file.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// Configuration file with `key = value` lines mirroring these flags
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Probability of augmenting each sample [default: 0.5]
    #[arg(long, value_name = "P")]
    p_aug: Option<f64>,
    /// Blend-weight distribution, one of uniform:LO,HI | beta:ALPHA | fixed:V
    /// [default: uniform:0,1] [config key: lambda_sampler]
    #[arg(long, visible_alias = "lambda-sampler", value_name = "SPEC")]
    sampler: Option<String>,
    /// Weight of the dispersion loss term [default: 0.005]
    #[arg(long, value_name = "W")]
    lambda_vmf: Option<f64>,
    /// Momentum of the prototype moving average [default: 0.99]
    #[arg(long, value_name = "M")]
    ema_momentum: Option<f64>,
    /// Initial concentration for every class [default: 10]
    #[arg(long, value_name = "K")]
    kappa_init: Option<f64>,
    /// Root seed for all random draws [default: 0]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Embedding dimension of the demonstration model [default: 16]
    #[arg(long, value_name = "D")]
    feature_dim: Option<usize>,
    /// Height of synthesized images [default: 24]
    #[arg(long, value_name = "H")]
    image_height: Option<usize>,
    /// Width of synthesized images [default: 24]
    #[arg(long, value_name = "W")]
    image_width: Option<usize>,
}

impl ConfigArgs {
    /// Resolves the layered configuration and validates the result.
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.p_aug {
            config.p_aug = v;
        }
        if let Some(spec) = &self.sampler {
            config.lambda_sampler = spec.parse().map_err(|e: AugmentError| {
                CliError::Usage(format!("--sampler: {e}"))
            })?;
        }
        if let Some(v) = self.lambda_vmf {
            config.lambda_vmf = v;
        }
        if let Some(v) = self.ema_momentum {
            config.ema_momentum = v;
        }
        if let Some(v) = self.kappa_init {
            config.kappa_init = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.feature_dim {
            config.feature_dim = v;
        }
        if let Some(v) = self.image_height {
            config.image_height = v;
        }
        if let Some(v) = self.image_width {
            config.image_width = v;
        }
        config.validate().map_err(CliError::Usage)?;
        Ok(config)
    }
}

#[derive(Args)]
struct AugmentCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory of content images (.ppm or .pgm) [config key: input_path]
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
    /// Directory of style images
    #[arg(long, value_name = "DIR")]
    styles: PathBuf,
    /// Output directory; receives one image per input plus augment_log.txt
    /// [config key: output_path]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumCmd {
    /// Image to analyze (.ppm or .pgm)
    #[arg(long, value_name = "IMG")]
    input: PathBuf,
    /// Output prefix; writes PREFIX_amplitude.pgm, PREFIX_phase.pgm, PREFIX.csv
    #[arg(long, value_name = "PREFIX")]
    out: PathBuf,
    /// Also invert the transform and fail unless the image is reproduced to 1e-9
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct VmfFitCmd {
    /// Embedding file to fit, one estimate per class with at least two rows
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output CSV with columns class,n,kappa,mu_0..mu_{d-1}
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct VmfSampleCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of vectors to draw
    #[arg(long, value_name = "N", default_value_t = 1000)]
    n: usize,
    /// Concentration of the distribution; falls back to --kappa-init [default: 10]
    #[arg(long, value_name = "K")]
    kappa: Option<f64>,
    /// Mean direction as comma-separated values, scaled to unit length;
    /// defaults to the first coordinate axis in --feature-dim dimensions
    #[arg(long, value_name = "V,V,..", allow_hyphen_values = true)]
    mu: Option<String>,
    /// Output embedding file; all rows carry class label 0
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct DemoTrainCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Passes over the training set
    #[arg(long, value_name = "N", default_value_t = 100)]
    epochs: usize,
    /// Samples per optimization step
    #[arg(long, value_name = "N", default_value_t = 64)]
    batch_size: usize,
    /// Step size of the gradient updates
    #[arg(long, value_name = "LR", default_value_t = 0.05)]
    learning_rate: f64,
    /// Output directory for the epoch log, summary, embeddings, and scatter
    /// plots [config key: output_path]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Training seeds per configuration row, starting at --seed
    #[arg(long, value_name = "N", default_value_t = 5)]
    seeds: usize,
    /// Passes over the training set per run
    #[arg(long, value_name = "N", default_value_t = 100)]
    epochs: usize,
    /// Samples per optimization step
    #[arg(long, value_name = "N", default_value_t = 64)]
    batch_size: usize,
    /// Step size of the gradient updates
    #[arg(long, value_name = "LR", default_value_t = 0.05)]
    learning_rate: f64,
    /// Output CSV file, one row per configuration [config key: output_path]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsCmd {
    /// Embedding file to analyze; rows are scaled to unit length first
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output text report
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write PREFIX.svg and PREFIX.csv, the batch projected onto its
    /// top two principal directions
    #[arg(long, value_name = "PREFIX")]
    scatter: Option<PathBuf>,
}

#[derive(Args)]
struct SemanticShiftCmd {
    /// Embedding file whose row 0 is the source-domain query
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    /// Embedding file whose row 0 is the target-domain query
    #[arg(long, value_name = "FILE")]
    target: PathBuf,
    /// Output: the difference vector as a one-row embedding file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// Parses `args` and runs the chosen subcommand, returning the process exit
/// code. All diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap formats help, version, and flag errors itself and knows
            // which of those are requests rather than failures.
            let failed = e.use_stderr();
            let _ = e.print();
            return if failed { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Augment(cmd) => run_augment(&cmd),
        Command::Spectrum(cmd) => run_spectrum(&cmd),
        Command::VmfFit(cmd) => run_vmf_fit(&cmd),
        Command::VmfSample(cmd) => run_vmf_sample(&cmd),
        Command::DemoTrain(cmd) => run_demo_train(&cmd),
        Command::Ablate(cmd) => run_ablate(&cmd),
        Command::Metrics(cmd) => run_metrics(&cmd),
        Command::SemanticShift(cmd) => run_semantic_shift(&cmd),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// The required in/out paths can come from a flag or from the config file.
fn require_path(
    flag: &Option<PathBuf>,
    from_config: &Option<String>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| from_config.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Usage(format!("{what} is required")))
}

/// Sorted paths of the `.ppm`/`.pgm` files directly inside `dir`.
fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("ppm" | "pgm")) {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no .ppm or .pgm images",
            dir.display()
        )));
    }
    Ok(paths)
}

/// Loads every path, reporting all failures rather than stopping at the first.
fn load_images(paths: &[PathBuf]) -> Result<Vec<ImageTensor>, CliError> {
    let mut images = Vec::with_capacity(paths.len());
    let mut failures = 0usize;
    for path in paths {
        match load_image(path) {
            Ok(image) => images.push(image),
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Data(format!("failed to load {failures} image(s)")));
    }
    Ok(images)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// `PREFIX` + `suffix` as a path, without treating the suffix as an extension.
fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_os_string();
    os.push(suffix);
    PathBuf::from(os)
}

fn run_augment(cmd: &AugmentCmd) -> Result<(), CliError> {
    let config = cmd.config.resolve()?;
    let input_dir = require_path(&cmd.input, &config.input_path, "--input (or input_path)")?;
    let out_dir = require_path(&cmd.out, &config.output_path, "--out (or output_path)")?;

    let content_paths = list_images(&input_dir)?;
    let contents = load_images(&content_paths)?;
    let styles = load_images(&list_images(&cmd.styles)?)?;
    let pool = StylePool::new(styles)?;

    let policy = AugPolicy::new(config.p_aug, config.lambda_sampler, config.seed)?;
    let (augmented, records) = apply_policy(&contents, &pool, &policy)?;

    create_dir(&out_dir)?;
    for (path, image) in content_paths.iter().zip(&augmented) {
        let name = path.file_name().expect("listed files have names");
        save_image(image, out_dir.join(name))?;
    }
    let mut log = String::new();
    for record in &records {
        let _ = writeln!(log, "{record}");
    }
    write_text(&out_dir.join("augment_log.txt"), &log)?;

    let applied = records.iter().filter(|r| r.applied).count();
    eprintln!(
        "augmented {applied} of {} image(s) into {}",
        records.len(),
        out_dir.display()
    );
    Ok(())
}

fn run_spectrum(cmd: &SpectrumCmd) -> Result<(), CliError> {
    let image = load_image(&cmd.input)?;
    let spec = fft2d(&image);
    let ap = decompose(&spec);
    let (h, w, c) = (ap.height(), ap.width(), ap.channels());
    let plane = h * w;

    // Channel-mean log amplitude, scaled so the brightest bin is white.
    let mut amp_plane = vec![0.0; plane];
    for (i, v) in amp_plane.iter_mut().enumerate() {
        let sum: f64 = (0..c).map(|ch| ap.amplitude()[ch * plane + i].ln_1p()).sum();
        *v = sum / c as f64;
    }
    let peak = amp_plane.iter().cloned().fold(0.0_f64, f64::max);
    if peak > 0.0 {
        for v in &mut amp_plane {
            *v /= peak;
        }
    }
    let amp_image = ImageTensor::new(h, w, 1, amp_plane)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let amp_path = with_suffix(&cmd.out, "_amplitude.pgm");
    save_image(&amp_image, &amp_path)?;

    // Phase of channel 0, mapped from (-pi, pi] onto (0, 1].
    let phase_plane: Vec<f64> = ap.phase()[..plane]
        .iter()
        .map(|&p| (p + std::f64::consts::PI) / std::f64::consts::TAU)
        .collect();
    let phase_image = ImageTensor::new(h, w, 1, phase_plane)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let phase_path = with_suffix(&cmd.out, "_phase.pgm");
    save_image(&phase_image, &phase_path)?;

    let mut csv = String::from("channel,u,v,amplitude,phase\n");
    for ch in 0..c {
        for u in 0..h {
            for v in 0..w {
                let i = ch * plane + u * w + v;
                let _ = writeln!(csv, "{ch},{u},{v},{},{}", ap.amplitude()[i], ap.phase()[i]);
            }
        }
    }
    let csv_path = with_suffix(&cmd.out, ".csv");
    write_text(&csv_path, &csv)?;
    eprintln!(
        "wrote {}, {}, {}",
        amp_path.display(),
        phase_path.display(),
        csv_path.display()
    );

    if cmd.verify {
        let recon = ifft2d(&spec).map_err(|e| CliError::Numerical(e.to_string()))?;
        let err = image.max_abs_diff(&recon);
        if err > 1e-9 {
            return Err(CliError::Numerical(format!(
                "round-trip error {err:e} exceeds 1e-9"
            )));
        }
        eprintln!("round-trip error {err:e}");
    }
    Ok(())
}

fn run_vmf_fit(cmd: &VmfFitCmd) -> Result<(), CliError> {
    let emb = read_emb(&cmd.input)?;
    let mut csv = String::from("class,n,kappa");
    for i in 0..emb.dim {
        let _ = write!(csv, ",mu_{i}");
    }
    csv.push('\n');

    let mut fitted = 0usize;
    for class in 0..emb.n_classes {
        let rows: Vec<usize> = (0..emb.n())
            .filter(|&i| emb.labels[i] as usize == class)
            .collect();
        if rows.len() < 2 {
            eprintln!("class {class}: {} sample(s), skipping", rows.len());
            continue;
        }
        let mut features = Vec::with_capacity(rows.len() * emb.dim);
        for &i in &rows {
            features.extend_from_slice(emb.row(i));
        }
        let (mu, kappa) =
            fit(&features, emb.dim).map_err(|e| CliError::Numerical(format!("class {class}: {e}")))?;
        let _ = write!(csv, "{class},{},{kappa}", rows.len());
        for v in mu.values() {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
        fitted += 1;
    }
    if fitted == 0 {
        return Err(CliError::Data(
            "no class has at least two samples".to_string(),
        ));
    }
    write_text(&cmd.out, &csv)?;
    eprintln!("fitted {fitted} class(es) into {}", cmd.out.display());
    Ok(())
}

fn run_vmf_sample(cmd: &VmfSampleCmd) -> Result<(), CliError> {
    let config = cmd.config.resolve()?;
    if cmd.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let kappa = cmd.kappa.unwrap_or(config.kappa_init);
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(CliError::Usage(format!(
            "--kappa must be finite and positive, got {kappa}"
        )));
    }
    let mu = match &cmd.mu {
        Some(text) => {
            let values = text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("--mu entry {t:?}: {e}")))
                })
                .collect::<Result<Vec<f64>, CliError>>()?;
            UnitVector::normalize(values).map_err(|e| CliError::Usage(format!("--mu: {e}")))?
        }
        None => UnitVector::axis(config.feature_dim, 0)
            .map_err(|e| CliError::Usage(format!("--feature-dim: {e}")))?,
    };

    let mut rng = rng_stream(config.seed, 0);
    let features = sample(&mu, kappa, cmd.n, &mut rng);
    write_emb(&cmd.out, mu.dim(), 1, &features, &vec![0; cmd.n])?;
    eprintln!(
        "sampled {} vector(s) of dimension {} into {}",
        cmd.n,
        mu.dim(),
        cmd.out.display()
    );
    Ok(())
}

/// The training fixture with the configured image size; every other knob of
/// the synthetic task stays at its committed default.
fn synth_spec_for(config: &RunConfig) -> SynthSpec {
    SynthSpec {
        height: config.image_height,
        width: config.image_width,
        ..SynthSpec::default()
    }
}

fn run_demo_train(cmd: &DemoTrainCmd) -> Result<(), CliError> {
    let config = cmd.config.resolve()?;
    let out_dir = require_path(&cmd.out, &config.output_path, "--out (or output_path)")?;
    let spec = synth_spec_for(&config);
    let options = TrainOptions {
        epochs: cmd.epochs,
        batch_size: cmd.batch_size,
        learning_rate: cmd.learning_rate,
    };

    eprintln!(
        "training {} epoch(s), {} classes, seed {}",
        options.epochs, spec.n_classes, config.seed
    );
    let report = train_with(&config, &spec, &options)?;

    create_dir(&out_dir)?;
    write_text(&out_dir.join("epochs.csv"), &report.epochs_csv())?;
    write_text(&out_dir.join("summary.txt"), &report.summary_text())?;
    for (name, metrics) in [("source", &report.source), ("shifted", &report.shifted)] {
        let batch = &metrics.embeddings;
        let labels: Vec<u32> = batch.labels().iter().map(|&l| l as u32).collect();
        write_emb(
            &out_dir.join(format!("{name}.emb")),
            batch.dim(),
            spec.n_classes,
            batch.features(),
            &labels,
        )?;
        pca_scatter_export(batch, &out_dir.join(format!("scatter_{name}")))?;
    }
    eprintln!(
        "source accuracy {:.4}, shifted accuracy {:.4}; wrote {}",
        report.source.accuracy,
        report.shifted.accuracy,
        out_dir.display()
    );
    Ok(())
}

fn run_ablate(cmd: &AblateCmd) -> Result<(), CliError> {
    let config = cmd.config.resolve()?;
    let out_path = require_path(&cmd.out, &config.output_path, "--out (or output_path)")?;
    let spec = synth_spec_for(&config);
    let options = TrainOptions {
        epochs: cmd.epochs,
        batch_size: cmd.batch_size,
        learning_rate: cmd.learning_rate,
    };

    eprintln!(
        "running 4 configurations x {} seed(s), {} epoch(s) each",
        cmd.seeds, options.epochs
    );
    let rows = ablation_matrix(&config, &spec, cmd.seeds, &options)?;
    for row in &rows {
        eprintln!(
            "{:<10} shifted accuracy {:.4} +- {:.4}, intra-class cosine {:.4} +- {:.4}",
            row.name,
            row.mean_shifted_accuracy,
            row.sd_shifted_accuracy,
            row.mean_intra_cosine,
            row.sd_intra_cosine
        );
    }
    write_text(&out_path, &ablation_csv(&rows))?;
    eprintln!("wrote {}", out_path.display());
    Ok(())
}

fn run_metrics(cmd: &MetricsCmd) -> Result<(), CliError> {
    let emb = read_emb(&cmd.input)?;
    let mut features = emb.features.clone();
    for (i, row) in features.chunks_exact_mut(emb.dim).enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(CliError::Data(format!("row {i} has zero norm")));
        }
        for v in row {
            *v /= norm;
        }
    }
    let labels: Vec<usize> = emb.labels.iter().map(|&l| l as usize).collect();
    let batch = EmbeddingBatch::new(emb.dim, features, labels)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let report = compactness_metrics(&batch);

    let mut text = String::new();
    let _ = writeln!(text, "samples: {}", batch.n());
    let _ = writeln!(text, "dim: {}", batch.dim());
    let _ = writeln!(text, "classes: {}", emb.n_classes);
    let _ = writeln!(text, "mean intra-class cosine: {}", report.mean_intra_cosine);
    match report.min_centroid_angle_deg {
        Some(angle) => {
            let _ = writeln!(text, "min centroid angle (deg): {angle}");
        }
        None => {
            let _ = writeln!(text, "min centroid angle (deg): n/a");
        }
    }
    let _ = writeln!(text, "per-class cosine:");
    for (class, cosine) in report.per_class_cosine.iter().enumerate() {
        match cosine {
            Some(v) => {
                let _ = writeln!(text, "  {class}: {v}");
            }
            None => {
                let _ = writeln!(text, "  {class}: n/a (fewer than two samples)");
            }
        }
    }
    write_text(&cmd.out, &text)?;

    if let Some(prefix) = &cmd.scatter {
        if batch.n() < 3 {
            return Err(CliError::Data(format!(
                "scatter needs at least 3 samples, got {}",
                batch.n()
            )));
        }
        pca_scatter_export(&batch, prefix)?;
        eprintln!(
            "wrote {}, {} and {}",
            cmd.out.display(),
            prefix.with_extension("svg").display(),
            prefix.with_extension("csv").display()
        );
    } else {
        eprintln!("wrote {}", cmd.out.display());
    }
    Ok(())
}

fn run_semantic_shift(cmd: &SemanticShiftCmd) -> Result<(), CliError> {
    let source = read_emb(&cmd.source)?;
    let target = read_emb(&cmd.target)?;
    for (emb, path) in [(&source, &cmd.source), (&target, &cmd.target)] {
        if emb.n() == 0 {
            return Err(CliError::Data(format!(
                "{}: no embedding rows",
                path.display()
            )));
        }
    }
    let delta = semantic_shift(source.row(0), target.row(0))?;
    write_emb(&cmd.out, delta.len(), 1, &delta, &[0])?;
    let norm = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
    eprintln!("shift norm {norm}; wrote {}", cmd.out.display());
    Ok(())
}
