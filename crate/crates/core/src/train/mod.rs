//! Training orchestration and checkpoint persistence.
//!
//! Every random draw is derived from `(seed, epoch, index)` rather than from a
//! running generator, so a run resumed from a checkpoint replays exactly the
//! samples an uninterrupted run would have seen.

mod checkpoint;
mod config;

use std::path::{Path, PathBuf};

pub use checkpoint::{Checkpoint, EpochLog, FORMAT_VERSION, MAGIC};
pub use config::{Mode, TrainConfig};

use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::net::{adam_step, init_weights, AdamState, NetworkWeights, PreparedSample};
use crate::synthdata::{sample_triplet, Dataset, Split, Triplet};

const VAL_STREAM: u64 = 0x5641_4c00;

/// SplitMix64 finalizer; decorrelates structured seed tuples.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th training triplet of `epoch`.
pub fn triplet_seed(seed: u64, epoch: u32, index: usize) -> u64 {
    mix(mix(mix(seed) ^ epoch as u64) ^ index as u64)
}

/// Averages per-sample gradients over the batch and takes one Adam step.
/// Returns the mean batch loss.
pub fn train_step(
    batch: &[PreparedSample<f32>],
    weights: &mut NetworkWeights<f32>,
    state: &mut AdamState<f32>,
    cfg: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let scale = 1.0 / batch.len() as f32;
    let mut grad = weights.zeros_like();
    let mut total = 0.0f64;
    for sample in batch {
        let l = crate::net::accumulate_gradient(weights, sample, cfg.alpha as f32, cfg.normal_gradient, scale, &mut grad)?;
        total += l as f64;
    }
    adam_step(weights, &grad, state, &cfg.adam());
    Ok(total / batch.len() as f64)
}

/// Loss of a sample without a weight update.
pub fn sample_loss(weights: &NetworkWeights<f32>, sample: &PreparedSample<f32>, alpha: f64) -> Result<f64> {
    let state = crate::net::forward(weights, &sample.part, &sample.full);
    let normals = crate::net::predicted_normals(state.output(), &sample.faces);
    Ok(crate::net::loss(state.output(), &normals, &sample.target, alpha as f32)? as f64)
}

/// Weights, optimizer state and bookkeeping of one training run.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub config: TrainConfig,
    pub weights: NetworkWeights<f32>,
    pub adam: AdamState<f32>,
    pub epoch: u32,
    pub history: Vec<EpochLog>,
    template: Option<TriMesh>,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Trainer> {
        config.validate()?;
        let weights = init_weights(config.seed, &config.architecture);
        let adam = AdamState::new(&weights);
        Ok(Trainer {
            config,
            weights,
            adam,
            epoch: 0,
            history: Vec::new(),
            template: None,
        })
    }

    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Trainer> {
        ckpt.config.validate()?;
        Ok(Trainer {
            config: ckpt.config,
            weights: ckpt.weights,
            adam: ckpt.adam,
            epoch: ckpt.epoch,
            history: ckpt.history,
            template: None,
        })
    }

    /// Sets the constant shape used in fixed-template mode.
    pub fn set_template(&mut self, template: TriMesh) {
        self.template = Some(template);
    }

    /// Picks the template from the dataset according to the config.
    pub fn attach_dataset(&mut self, dataset: &Dataset) -> Result<()> {
        if self.config.mode == Mode::FixedTemplate {
            self.template = Some(fixed_template(dataset, &self.config)?.clone());
        }
        Ok(())
    }

    pub fn prepare(&self, t: &Triplet) -> Result<PreparedSample<f32>> {
        match self.config.mode {
            Mode::Normal => PreparedSample::from_triplet(t, None),
            Mode::FixedTemplate => {
                let template = self
                    .template
                    .as_ref()
                    .ok_or_else(|| Error::invalid("fixed-template mode needs a template"))?;
                PreparedSample::from_triplet(t, Some(template))
            }
        }
    }

    pub fn step(&mut self, batch: &[Triplet]) -> Result<f64> {
        let prepared = batch.iter().map(|t| self.prepare(t)).collect::<Result<Vec<_>>>()?;
        self.step_prepared(&prepared)
    }

    pub fn step_prepared(&mut self, batch: &[PreparedSample<f32>]) -> Result<f64> {
        train_step(batch, &mut self.weights, &mut self.adam, &self.config)
    }

    pub fn mean_loss(&self, samples: &[PreparedSample<f32>]) -> Result<f64> {
        if samples.is_empty() {
            return Ok(f64::NAN);
        }
        let mut total = 0.0;
        for s in samples {
            total += sample_loss(&self.weights, s, self.config.alpha)?;
        }
        Ok(total / samples.len() as f64)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            weights: self.weights.clone(),
            adam: self.adam.clone(),
            epoch: self.epoch,
            history: self.history.clone(),
        }
    }

    /// Runs one epoch of `steps_per_epoch` steps on freshly sampled training
    /// triplets and returns the mean step loss.
    pub fn run_epoch(&mut self, dataset: &Dataset) -> Result<f64> {
        let b = self.config.batch_size;
        let steps = self.config.steps_per_epoch();
        let mut total = 0.0;
        for s in 0..steps {
            let batch = (0..b)
                .map(|k| sample_triplet(dataset, triplet_seed(self.config.seed, self.epoch, s * b + k), Split::Train))
                .collect::<Result<Vec<_>>>()?;
            total += self.step(&batch)?;
        }
        self.epoch += 1;
        Ok(if steps == 0 { f64::NAN } else { total / steps as f64 })
    }
}

pub fn fixed_template<'a>(dataset: &'a Dataset, cfg: &TrainConfig) -> Result<&'a TriMesh> {
    match cfg.template_subject_id {
        Some(id) => dataset
            .subject(id)
            .map(|s| &s.template)
            .ok_or_else(|| Error::Data(format!("template subject {id} is not in the dataset"))),
        None => dataset
            .default_template()
            .ok_or_else(|| Error::Data("dataset has no training subjects".into())),
    }
}

/// The fixed validation triplets: drawn from the validation subjects, or the
/// test subjects when there are none.
pub fn validation_set(dataset: &Dataset, cfg: &TrainConfig) -> Result<Vec<Triplet>> {
    let split = if dataset.pool(Split::Val).is_empty() {
        Split::Test
    } else {
        Split::Val
    };
    if dataset.pool(split).is_empty() {
        return Ok(Vec::new());
    }
    (0..cfg.val_triplets)
        .map(|k| sample_triplet(dataset, triplet_seed(cfg.seed ^ VAL_STREAM, 0, k), split))
        .collect()
}

/// Where `train_loop` writes its artifacts.
#[derive(Clone, Debug)]
pub struct TrainOutputs {
    pub checkpoint: PathBuf,
    pub log: PathBuf,
}

impl TrainOutputs {
    /// Checkpoint at `path`, log next to it with a `.csv` extension.
    pub fn beside(path: &Path) -> TrainOutputs {
        TrainOutputs {
            checkpoint: path.to_path_buf(),
            log: path.with_extension("csv"),
        }
    }
}

pub fn log_csv(history: &[EpochLog]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss\n");
    for h in history {
        s.push_str(&format!("{},{},{}\n", h.epoch, h.train_loss, h.val_loss));
    }
    s
}

/// Epoch-0 log row: losses of the untrained weights. The training column
/// uses the first `val_triplets` triplets the first epoch will draw.
fn initial_losses(trainer: &Trainer, dataset: &Dataset, val: &[PreparedSample<f32>]) -> Result<EpochLog> {
    let cfg = &trainer.config;
    let probe = (0..cfg.val_triplets.min(cfg.triplets_per_epoch))
        .map(|k| trainer.prepare(&sample_triplet(dataset, triplet_seed(cfg.seed, 0, k), Split::Train)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(EpochLog {
        epoch: 0,
        train_loss: trainer.mean_loss(&probe)?,
        val_loss: trainer.mean_loss(val)?,
    })
}

/// Trains until `trainer.config.epochs` epochs are complete, writing the
/// checkpoint and log after every epoch. A trainer restored from a
/// checkpoint continues where it stopped.
pub fn train_loop(
    trainer: &mut Trainer,
    dataset: &Dataset,
    outputs: Option<&TrainOutputs>,
    mut progress: impl FnMut(&EpochLog),
) -> Result<Checkpoint> {
    trainer.attach_dataset(dataset)?;
    let val: Vec<PreparedSample<f32>> = validation_set(dataset, &trainer.config)?
        .iter()
        .map(|t| trainer.prepare(t))
        .collect::<Result<_>>()?;
    let write = |t: &Trainer| -> Result<()> {
        if let Some(out) = outputs {
            t.checkpoint().save(&out.checkpoint)?;
            crate::formats::write_atomic(&out.log, log_csv(&t.history).as_bytes())?;
        }
        Ok(())
    };
    if trainer.epoch == 0 {
        if trainer.history.is_empty() {
            let entry = initial_losses(trainer, dataset, &val)?;
            trainer.history.push(entry);
            progress(&entry);
        }
        write(trainer)?;
    }
    while trainer.epoch < trainer.config.epochs {
        let train_loss = trainer.run_epoch(dataset)?;
        let entry = EpochLog {
            epoch: trainer.epoch,
            train_loss,
            val_loss: trainer.mean_loss(&val)?,
        };
        trainer.history.push(entry);
        progress(&entry);
        write(trainer)?;
    }
    Ok(trainer.checkpoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;
    use crate::net::Architecture;
    use crate::partiality::ViewSpec;
    use crate::synthdata::DatasetConfig;
    use std::sync::OnceLock;

    fn dataset() -> &'static Dataset {
        static D: OnceLock<Dataset> = OnceLock::new();
        D.get_or_init(|| {
            Dataset::generate(&DatasetConfig {
                train_subjects: 2,
                val_subjects: 1,
                test_subjects: 1,
                poses_per_subject: 3,
                views: 4,
                seed: 0,
            })
        })
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            batch_size: 2,
            epochs: 2,
            triplets_per_epoch: 4,
            val_triplets: 3,
            architecture: Architecture {
                encoder_widths: vec![16, 24, 32],
                latent_width: 32,
                generator_widths: vec![32, 16, 16],
            },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn identical_runs_give_identical_trajectories() {
        let run = || {
            let mut t = Trainer::new(small_config()).unwrap();
            let batch: Vec<Triplet> = (0..2).map(|k| sample_triplet(dataset(), k, Split::Train).unwrap()).collect();
            (0..10).map(|_| t.step(&batch).unwrap()).collect::<Vec<f64>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a[9] < a[0]);
    }

    #[test]
    fn stationary_sample_leaves_weights_unchanged() {
        let mut t = Trainer::new(small_config()).unwrap();
        let tri = sample_triplet(dataset(), 3, Split::Train).unwrap();
        let mut s = t.prepare(&tri).unwrap();
        let out = crate::net::forward(&t.weights, &s.part, &s.full).output().clone();
        let n = crate::net::predicted_normals(&out, &s.faces);
        s.target = ndarray::concatenate![ndarray::Axis(1), out, n];
        let before = t.weights.clone();
        let loss = t.step_prepared(&[s]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(t.weights, before);
    }

    #[test]
    fn translating_a_triplet_does_not_change_its_loss() {
        let t = Trainer::new(small_config()).unwrap();
        let tri = dataset()
            .triplet(0, 0, 1, &ViewSpec::at_azimuth(0.7))
            .unwrap();
        let offset = Vector3::new(0.3, -1.2, 0.5);
        let moved = Triplet {
            part: crate::geometry::PointCloud {
                positions: tri.part.positions.iter().map(|p| p + offset).collect(),
                normals: tri.part.normals.clone(),
            },
            full: tri.full.translated(&offset),
            target: tri.target.translated(&(offset * 2.0)),
            ..tri.clone()
        };
        let a = sample_loss(&t.weights, &t.prepare(&tri).unwrap(), 0.1).unwrap();
        let b = sample_loss(&t.weights, &t.prepare(&moved).unwrap(), 0.1).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn modes_agree_when_q_is_the_template() {
        let d = dataset();
        let tri = d.triplet(0, 0, 1, &ViewSpec::at_azimuth(1.0)).unwrap();
        let tri = Triplet {
            full: d.subject(0).unwrap().template.clone(),
            ..tri
        };
        let normal = Trainer::new(small_config()).unwrap();
        let mut fixed = Trainer::new(TrainConfig {
            mode: Mode::FixedTemplate,
            ..small_config()
        })
        .unwrap();
        fixed.attach_dataset(d).unwrap();
        let a = sample_loss(&normal.weights, &normal.prepare(&tri).unwrap(), 0.1).unwrap();
        let b = sample_loss(&fixed.weights, &fixed.prepare(&tri).unwrap(), 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_epochs_checkpoints_the_initial_weights() {
        let dir = tempfile::tempdir().unwrap();
        let out = TrainOutputs::beside(&dir.path().join("m.ckpt"));
        let cfg = TrainConfig {
            epochs: 0,
            ..small_config()
        };
        let mut t = Trainer::new(cfg.clone()).unwrap();
        let ck = train_loop(&mut t, dataset(), Some(&out), |_| {}).unwrap();
        assert_eq!(ck.weights, init_weights(cfg.seed, &cfg.architecture));
        assert_eq!(Checkpoint::load(&out.checkpoint).unwrap(), ck);
        let log = std::fs::read_to_string(&out.log).unwrap();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,"));
        assert_eq!(ck.history.len(), 1);
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            mode: Mode::FixedTemplate,
            ..small_config()
        };
        let mut full = Trainer::new(cfg.clone()).unwrap();
        let uninterrupted = train_loop(&mut full, dataset(), None, |_| {}).unwrap();

        let out = TrainOutputs::beside(&dir.path().join("half.ckpt"));
        let mut first = Trainer::new(TrainConfig { epochs: 1, ..cfg.clone() }).unwrap();
        train_loop(&mut first, dataset(), Some(&out), |_| {}).unwrap();
        let mut ck = Checkpoint::load(&out.checkpoint).unwrap();
        assert_eq!(ck.epoch, 1);
        assert_eq!(ck.mode(), Mode::FixedTemplate);
        ck.config.epochs = 2;
        let mut resumed = Trainer::from_checkpoint(ck).unwrap();
        let finished = train_loop(&mut resumed, dataset(), Some(&out), |_| {}).unwrap();
        assert_eq!(finished.weights, uninterrupted.weights);
        assert_eq!(finished.adam, uninterrupted.adam);
        assert_eq!(finished.history, uninterrupted.history);
        let log = std::fs::read_to_string(&out.log).unwrap();
        assert_eq!(log.lines().count(), 4);
    }
}
