//! Binary checkpoint layout (all integers little-endian `u32`):
//!
//! ```text
//! "NRSW" | version | header_len | header (UTF-8 JSON)
//! tensor_count | { name_len | name | rank | dims[rank] | f32 data, row-major }*
//! ```
//!
//! The header holds the training config, epoch, Adam step and loss history.
//! Tensors are the network weights followed by the Adam moments.

use std::path::Path;

use ndarray::{ArrayViewMut, IxDyn};
use serde::{Deserialize, Serialize};

use super::config::{Mode, TrainConfig};
use crate::error::{Error, Result};
use crate::net::{AdamState, Architecture, NetworkWeights};

pub const MAGIC: &[u8; 4] = b"NRSW";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub weights: NetworkWeights<f32>,
    pub adam: AdamState<f32>,
    /// Completed epochs.
    pub epoch: u32,
    pub history: Vec<EpochLog>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: TrainConfig,
    architecture: Architecture,
    epoch: u32,
    adam_step: u64,
    history: Vec<EpochLog>,
}

impl Checkpoint {
    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f32])> {
        let mut out = Vec::new();
        for (prefix, w) in [("", &self.weights), ("adam.m.", &self.adam.m), ("adam.v.", &self.adam.v)] {
            for (name, layer) in w.named_layers() {
                out.push((
                    format!("{prefix}{name}.weight"),
                    layer.weight.shape().to_vec(),
                    layer.weight.as_slice().expect("standard layout"),
                ));
                out.push((
                    format!("{prefix}{name}.bias"),
                    layer.bias.shape().to_vec(),
                    layer.bias.as_slice().expect("standard layout"),
                ));
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.config.clone(),
            architecture: self.weights.architecture(),
            epoch: self.epoch,
            adam_step: self.adam.t,
            history: self.history.clone(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let tensors = self.tensors();
        let mut out = Vec::with_capacity(16 + header.len() + 12 * self.weights.parameter_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (name, dims, data) in tensors {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
            for d in dims {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for x in data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(r.corrupt_at(0, "bad magic bytes"));
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let header_len = r.u32("header length")? as usize;
        let header_at = r.pos;
        let header: Header =
            serde_json::from_slice(r.take(header_len, "header")?).map_err(|e| r.corrupt_at(header_at, &format!("bad header: {e}")))?;
        header
            .architecture
            .validate()
            .map_err(|e| r.corrupt_at(header_at, &e.to_string()))?;
        let mut weights = NetworkWeights::<f32>::zeros(&header.architecture);
        let mut adam = AdamState::new(&weights);
        adam.t = header.adam_step;
        let mut ckpt = Checkpoint {
            config: header.config,
            weights: weights.clone(),
            adam,
            epoch: header.epoch,
            history: header.history,
        };
        let expected: Vec<(String, Vec<usize>)> = ckpt.tensors().into_iter().map(|(n, d, _)| (n, d)).collect();
        let count = r.u32("tensor count")? as usize;
        if count != expected.len() {
            return Err(r.corrupt_at(r.pos - 4, &format!("expected {} tensors, found {count}", expected.len())));
        }
        let mut slots: Vec<ArrayViewMut<f32, IxDyn>> = Vec::new();
        let mut moments_m = ckpt.adam.m.clone();
        let mut moments_v = ckpt.adam.v.clone();
        for w in [&mut weights, &mut moments_m, &mut moments_v] {
            for l in w.layers_mut() {
                slots.push(l.weight.view_mut().into_dyn());
                slots.push(l.bias.view_mut().into_dyn());
            }
        }
        for ((name, dims), slot) in expected.iter().zip(slots.iter_mut()) {
            let at = r.pos;
            let len = r.u32("tensor name length")? as usize;
            let found = r.take(len, "tensor name")?;
            if found != name.as_bytes() {
                return Err(r.corrupt_at(at, &format!("expected tensor '{name}', found '{}'", String::from_utf8_lossy(found))));
            }
            let rank = r.u32("tensor rank")? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32("tensor dimension")? as usize);
            }
            if &shape != dims {
                return Err(r.corrupt_at(at, &format!("tensor '{name}' has shape {shape:?}, expected {dims:?}")));
            }
            let data = r.take(4 * slot.len(), "tensor data")?;
            for (dst, chunk) in slot.iter_mut().zip(data.chunks_exact(4)) {
                *dst = f32::from_le_bytes(chunk.try_into().unwrap());
            }
        }
        drop(slots);
        if r.pos != bytes.len() {
            return Err(r.corrupt_at(r.pos, "trailing bytes after the last tensor"));
        }
        ckpt.weights = weights;
        ckpt.adam.m = moments_m;
        ckpt.adam.v = moments_v;
        Ok(ckpt)
    }

    /// Writes atomically through a temporary file in the same directory.
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::formats::write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn corrupt_at(&self, offset: usize, reason: &str) -> Error {
        Error::CorruptCheckpoint {
            offset: offset as u64,
            reason: reason.to_string(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.corrupt_at(self.bytes.len(), &format!("file ends inside {what}")));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_weights;

    fn sample() -> Checkpoint {
        let mut config = TrainConfig::default();
        config.architecture = Architecture {
            encoder_widths: vec![4, 6],
            latent_width: 6,
            generator_widths: vec![5, 3],
        };
        config.mode = Mode::FixedTemplate;
        let weights = init_weights(9, &config.architecture);
        let mut adam = AdamState::new(&weights);
        adam.m = init_weights(10, &config.architecture);
        adam.v = init_weights(11, &config.architecture);
        adam.t = 42;
        Checkpoint {
            config,
            weights,
            adam,
            epoch: 3,
            history: vec![EpochLog {
                epoch: 1,
                train_loss: 0.5,
                val_loss: f64::from_bits(0x3fd5_5555_5555_5555),
            }],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        c.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes(), c.to_bytes());
        assert!(std::fs::read_dir(dir.path()).unwrap().count() == 1, "no temp file left behind");
    }

    #[test]
    fn every_truncation_is_reported_as_corrupt() {
        let bytes = sample().to_bytes();
        for cut in (0..bytes.len()).step_by(37).chain([bytes.len() - 1]) {
            match Checkpoint::from_bytes(&bytes[..cut]) {
                Err(Error::CorruptCheckpoint { offset, .. }) => assert!(offset as usize <= cut),
                other => panic!("cut at {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = sample().to_bytes();
        bytes[4] += 1;
        assert!(matches!(
            Checkpoint::from_bytes(&bytes),
            Err(Error::UnsupportedVersion { found: 2, expected: 1 })
        ));
        bytes[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(Error::CorruptCheckpoint { offset: 0, .. })));
    }

    #[test]
    fn tensor_records_follow_the_documented_layout() {
        let c = sample();
        let bytes = c.to_bytes();
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let mut pos = 12 + header_len;
        let count = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        assert_eq!(count as usize, 3 * 2 * c.weights.layers().len());
        pos += 4;
        let name_len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        assert_eq!(&bytes[pos + 4..pos + 4 + name_len], b"encoder.mlp.0.weight");
        pos += 4 + name_len;
        let rank = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        let d0 = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap());
        let d1 = u32::from_le_bytes(bytes[pos + 8..pos + 12].try_into().unwrap());
        assert_eq!((rank, d0, d1), (2, 4, 6));
        let first = f32::from_le_bytes(bytes[pos + 12..pos + 16].try_into().unwrap());
        let second = f32::from_le_bytes(bytes[pos + 16..pos + 20].try_into().unwrap());
        assert_eq!(first, c.weights.encoder.shared_mlp[0].weight[(0, 0)]);
        assert_eq!(second, c.weights.encoder.shared_mlp[0].weight[(0, 1)]);
    }
}
