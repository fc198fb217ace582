//! The `partwhole` command-line tool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{self, geodesic_error_curve, summarize, MetricsRecord, Suite, METRIC_COLUMNS};
use crate::formats::manifest::{read_dataset, read_triplets, write_dataset};
use crate::formats::{correspondence_csv, read_mesh, write_atomic, write_mesh};
use crate::geometry::{Point3, TriMesh};
use crate::pipeline::{self, IcpConfig};
use crate::synthdata::{DatasetConfig, Split};
use crate::train::{self, Checkpoint, Mode, TrainConfig, TrainOutputs, Trainer};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_FORMAT: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "partwhole", version, about = "Complete partial scans of articulated shapes and recover part-to-whole correspondence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset of posed subjects and partial scans.
    GenData(GenDataArgs),
    /// Train the network on a generated dataset.
    Train(TrainArgs),
    /// Complete one partial scan given a full shape in another pose.
    Complete(CompleteArgs),
    /// Evaluate a checkpoint on the test split of a dataset.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Total number of subjects.
    #[arg(long, default_value_t = 12)]
    pub subjects: u32,
    #[arg(long, default_value_t = 40)]
    pub poses: u32,
    #[arg(long, default_value_t = 10)]
    pub views: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Subjects per split as `train,val,test`; must sum to --subjects.
    #[arg(long)]
    pub split_spec: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint path; the log is written next to it as `.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Flat `key = value` training config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fixed_template: bool,
    /// Overrides the config's epoch count.
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Continue from the checkpoint at --out.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Args, Debug)]
pub struct CompleteArgs {
    #[arg(long)]
    pub part: PathBuf,
    #[arg(long)]
    pub full: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub correspondence: Option<PathBuf>,
    /// Scanner position used to orient estimated normals when the scan has
    /// none, as `x,y,z`.
    #[arg(long, default_value = "10,0,0")]
    pub viewpoint: String,
    /// Mode the checkpoint must have been trained in.
    #[arg(long, default_value = "normal")]
    pub mode: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Run a robustness sweep instead; its table is written to --out.
    #[arg(long)]
    pub robustness: Option<String>,
    /// Score the ground truth itself (checks the evaluation plumbing).
    #[arg(long, hide = true)]
    pub oracle: bool,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Io { .. } => EXIT_USAGE,
        Error::Data(_) | Error::EmptyProjection | Error::DegenerateGeometry(_) => EXIT_DATA,
        Error::Format { .. } | Error::CorruptCheckpoint { .. } | Error::UnsupportedVersion { .. } => EXIT_FORMAT,
    }
}

fn split_config(args: &GenDataArgs) -> Result<DatasetConfig> {
    if args.subjects == 0 {
        return Err(usage("--subjects must be at least 1"));
    }
    if args.poses < 2 {
        return Err(usage("--poses must be at least 2"));
    }
    if args.views == 0 {
        return Err(usage("--views must be at least 1"));
    }
    let (train, val, test) = match &args.split_spec {
        Some(spec) => {
            let parts: Vec<u32> = spec
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| usage(format!("--split-spec '{spec}' is not three counts like 8,2,2")))?;
            let [a, b, c] = parts[..] else {
                return Err(usage(format!("--split-spec '{spec}' needs exactly three counts")));
            };
            if a + b + c != args.subjects {
                return Err(usage(format!("--split-spec sums to {} but --subjects is {}", a + b + c, args.subjects)));
            }
            (a, b, c)
        }
        None if args.subjects < 3 => (args.subjects, 0, 0),
        None => {
            let held = ((args.subjects as f64 / 6.0).round() as u32).max(1);
            (args.subjects - 2 * held, held, held)
        }
    };
    if train == 0 {
        return Err(usage("at least one training subject is needed"));
    }
    Ok(DatasetConfig {
        train_subjects: train,
        val_subjects: val,
        test_subjects: test,
        poses_per_subject: args.poses,
        views: args.views,
        seed: args.seed,
    })
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let config = split_config(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let (manifest, _) = write_dataset(&args.out, &config)?;
    eprintln!(
        "wrote {} subjects ({} train, {} val, {} test) and {} triplets to {}",
        manifest.subjects.len(),
        config.train_subjects,
        config.val_subjects,
        config.test_subjects,
        manifest.triplets.len(),
        args.out.display()
    );
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let (_, dataset) = read_dataset(&args.data)?;
    let outputs = TrainOutputs::beside(&args.out);
    let mut trainer = if args.resume {
        let ck = Checkpoint::load(&args.out)?;
        let mut t = Trainer::from_checkpoint(ck)?;
        if let Some(e) = args.epochs {
            t.config.epochs = e;
        }
        t
    } else {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                TrainConfig::parse(&text, &path.display().to_string())?
            }
            None => TrainConfig::default(),
        };
        if args.fixed_template {
            cfg.mode = Mode::FixedTemplate;
        }
        if let Some(e) = args.epochs {
            cfg.epochs = e;
        }
        Trainer::new(cfg)?
    };
    let ck = train::train_loop(&mut trainer, &dataset, Some(&outputs), |e| {
        eprintln!("epoch {:>3}  train {:.6}  val {:.6}", e.epoch, e.train_loss, e.val_loss);
    })?;
    eprintln!(
        "{} mode, {} epochs; checkpoint {} and log {}",
        ck.mode().as_str(),
        ck.epoch,
        outputs.checkpoint.display(),
        outputs.log.display()
    );
    Ok(())
}

fn parse_point(s: &str) -> Result<Point3> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("'{s}' is not a point like 10,0,0")))?;
    match v[..] {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Point3::new(x, y, z)),
        _ => Err(usage(format!("'{s}' is not a point like 10,0,0"))),
    }
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<()> {
    let mode: Mode = args.mode.parse()?;
    let viewpoint = parse_point(&args.viewpoint)?;
    let part = read_mesh(&args.part)?.vertices;
    let full = read_mesh(&args.full)?;
    if full.faces.is_empty() {
        return Err(usage(format!("{} has no faces; the full shape must be a mesh", args.full.display())));
    }
    let ck = Checkpoint::load(&args.ckpt)?;
    if ck.mode() != mode {
        return Err(usage(format!(
            "{} was trained in {} mode; pass --mode {} to use it",
            args.ckpt.display(),
            ck.mode().as_str(),
            ck.mode().as_str()
        )));
    }
    let part = pipeline::ensure_normals(&part, &viewpoint)?;
    let result = pipeline::run(&part, &full, &ck.weights, &IcpConfig::default())?;
    write_mesh(&args.out, &result.aligned.clone().with_vertex_normals())?;
    if let Some(path) = &args.correspondence {
        write_atomic(path, correspondence_csv(&result.correspondence).as_bytes())?;
    }
    Ok(())
}

/// Geodesic thresholds reported by `eval`.
pub fn curve_thresholds() -> Vec<f64> {
    (0..=25).map(|i| i as f64 * 0.01).collect()
}

fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut s = format!("sample_id,{}\n", METRIC_COLUMNS.join(","));
    let row = |id: &str, v: [f64; 5]| format!("{id},{}\n", v.map(|x| x.to_string()).join(","));
    for r in records {
        s.push_str(&row(&r.sample_id, r.values()));
    }
    if !records.is_empty() {
        let (mean, std) = summarize(records);
        s.push_str(&row("mean", mean));
        s.push_str(&row("std", std));
    }
    s
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let (manifest, dataset) = read_dataset(&args.data)?;
    let ck = Checkpoint::load(&args.ckpt)?;
    let template = match ck.mode() {
        Mode::Normal => None,
        Mode::FixedTemplate => Some(train::fixed_template(&dataset, &ck.config)?.clone()),
    };
    let stored = read_triplets(&args.data, &manifest, &dataset, Split::Test)?;
    if stored.is_empty() {
        return Err(Error::Data("the dataset has no test triplets".into()));
    }
    if let Some(suite) = &args.robustness {
        let suite: Suite = suite.parse()?;
        let set: Vec<_> = stored.into_iter().map(|(_, t)| t).collect();
        let rows = eval::run_robustness_suite(&ck.weights, &set, template.as_ref(), suite, dataset.centimeter(), ck.config.seed)?;
        return write_atomic(&args.out, eval::robustness_csv(&rows).as_bytes());
    }
    let mut records = Vec::new();
    let (mut pred_all, mut gt_all) = (Vec::new(), Vec::new());
    let mut full_for_curve: Option<TriMesh> = None;
    let mut curves = Vec::new();
    for (id, t) in &stored {
        let full = template.clone().unwrap_or_else(|| t.full.clone());
        let gt_map = t.part_to_full();
        let (record, pred) = if args.oracle {
            let c = t.centered();
            let gt = TriMesh {
                vertices: c.target.vertices.select(&c.gt_map.target_indices),
                faces: c.full.faces.clone(),
            };
            (eval::evaluate_reconstruction(&gt, &gt, id.clone())?, gt_map.clone())
        } else {
            let (record, _) = eval::evaluate_triplet(&ck.weights, t, template.as_ref(), |p| Ok(p.clone()), id.clone())?;
            let run = pipeline::run(&t.part, &full, &ck.weights, &IcpConfig::default())?;
            (record, run.correspondence)
        };
        records.push(record);
        curves.push(geodesic_error_curve(&pred, &gt_map, &t.full, &curve_thresholds())?);
        pred_all.push(pred);
        gt_all.push(gt_map);
        full_for_curve.get_or_insert_with(|| t.full.clone());
    }
    write_atomic(&args.out, metrics_csv(&records).as_bytes())?;
    let mean_curve = eval::GeodesicCurve {
        thresholds: curve_thresholds(),
        fraction_correct: (0..curve_thresholds().len())
            .map(|k| curves.iter().map(|c| c.fraction_correct[k]).sum::<f64>() / curves.len() as f64)
            .collect(),
    };
    write_atomic(&geodesic_path(&args.out), mean_curve.to_csv().as_bytes())?;
    let (mean, std) = summarize(&records);
    for (k, name) in METRIC_COLUMNS.iter().enumerate() {
        eprintln!("{name:>15}: {:.6} ± {:.6}", mean[k], std[k]);
    }
    Ok(())
}

/// Where `eval` writes the mean geodesic error curve for metrics at `out`.
pub fn geodesic_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.geodesic.csv"))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Train(a) => cmd_train(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

/// Parses the process arguments, runs the command and maps failures to exit
/// codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
