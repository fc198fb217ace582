use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{AdamConfig, Architecture, NormalGradient};

/// Which full shape the network receives alongside the partial scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The subject's own full shape `Q` in another pose.
    #[default]
    Normal,
    /// One constant rest-pose template `T` for every sample.
    FixedTemplate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::FixedTemplate => "fixed_template",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Mode::Normal),
            "fixed_template" => Ok(Mode::FixedTemplate),
            other => Err(Error::invalid(format!("unknown mode '{other}' (expected normal or fixed_template)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: u32,
    pub triplets_per_epoch: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Subject whose rest template is `T` in fixed-template mode; defaults
    /// to the first training subject.
    pub template_subject_id: Option<u32>,
    pub normal_gradient: NormalGradient,
    pub val_triplets: usize,
    pub architecture: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 10,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 10,
            triplets_per_epoch: 2000,
            alpha: 0.1,
            seed: 0,
            mode: Mode::Normal,
            template_subject_id: None,
            normal_gradient: NormalGradient::Differentiable,
            val_triplets: 100,
            architecture: Architecture::default(),
        }
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<usize>, String> {
    value
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("bad list entry '{s}': {e}")))
        .collect()
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.triplets_per_epoch / self.batch_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::invalid("lr must be positive"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::invalid("alpha must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::invalid("Adam needs beta1, beta2 in [0, 1) and eps > 0"));
        }
        self.architecture.validate()
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("bad value '{v}': {e}"))
        }
        match key {
            "batch_size" => self.batch_size = num(value)?,
            "lr" => self.lr = num(value)?,
            "beta1" => self.beta1 = num(value)?,
            "beta2" => self.beta2 = num(value)?,
            "eps" => self.eps = num(value)?,
            "epochs" => self.epochs = num(value)?,
            "triplets_per_epoch" => self.triplets_per_epoch = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "seed" => self.seed = num(value)?,
            "mode" => self.mode = value.parse().map_err(|e: Error| e.to_string())?,
            "template_subject_id" => self.template_subject_id = Some(num(value)?),
            "normal_gradient" => {
                self.normal_gradient = match value {
                    "differentiable" => NormalGradient::Differentiable,
                    "frozen" => NormalGradient::Frozen,
                    other => return Err(format!("unknown normal_gradient '{other}'")),
                }
            }
            "val_triplets" => self.val_triplets = num(value)?,
            "encoder_widths" => self.architecture.encoder_widths = parse_list(value)?,
            "latent_width" => self.architecture.latent_width = num(value)?,
            "generator_widths" => self.architecture.generator_widths = parse_list(value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Parses flat `key = value` text on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Format {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected 'key = value'".into()))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let a = &self.architecture;
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "beta1 = {}", self.beta1);
        let _ = writeln!(s, "beta2 = {}", self.beta2);
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "triplets_per_epoch = {}", self.triplets_per_epoch);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        if let Some(t) = self.template_subject_id {
            let _ = writeln!(s, "template_subject_id = {t}");
        }
        let ng = match self.normal_gradient {
            NormalGradient::Differentiable => "differentiable",
            NormalGradient::Frozen => "frozen",
        };
        let _ = writeln!(s, "normal_gradient = {ng}");
        let _ = writeln!(s, "val_triplets = {}", self.val_triplets);
        let _ = writeln!(s, "encoder_widths = {}", join(&a.encoder_widths));
        let _ = writeln!(s, "latent_width = {}", a.latent_width);
        let _ = writeln!(s, "generator_widths = {}", join(&a.generator_widths));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = TrainConfig::default();
        cfg.mode = Mode::FixedTemplate;
        cfg.template_subject_id = Some(3);
        cfg.lr = 3.5e-4;
        cfg.architecture.generator_widths = vec![32, 16];
        assert_eq!(TrainConfig::parse(&cfg.to_text(), "x").unwrap(), cfg);
    }

    #[test]
    fn comments_and_defaults() {
        let cfg = TrainConfig::parse("# desk run\n\nepochs = 0\n  seed=7  \n", "c").unwrap();
        assert_eq!(cfg.epochs, 0);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.batch_size, 10);
    }

    #[test]
    fn unknown_keys_and_bad_values_report_lines() {
        match TrainConfig::parse("epochs = 1\nlearning_rate = 0.1\n", "cfg.txt") {
            Err(Error::Format { path, line, message }) => {
                assert_eq!((path.as_str(), line), ("cfg.txt", 2));
                assert!(message.contains("learning_rate"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(TrainConfig::parse("epochs = many", "c"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(TrainConfig::parse("no equals sign", "c"), Err(Error::Format { .. })));
        assert!(matches!(TrainConfig::parse("batch_size = 0", "c"), Err(Error::InvalidInput(_))));
        assert!(matches!(TrainConfig::parse("lr = -1", "c"), Err(Error::InvalidInput(_))));
        assert!(matches!(TrainConfig::parse("alpha = -0.1", "c"), Err(Error::InvalidInput(_))));
    }
}
