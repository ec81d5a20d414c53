//! Self-describing binary checkpoints.
//!
//! Layout: the magic line `sparsetopic-checkpoint\n`, a little-endian `u64`
//! header length, a JSON header (format version, training config, vocabulary
//! and the name and shape of every tensor), then each tensor's values as
//! little-endian `f64` in header order. Raw bit patterns make the round trip
//! exact.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{GenerativeParams, ModelParams, TopicModel, TrainConfig};
use crate::net::{EncoderParams, ParamTensors};

pub const MAGIC: &[u8] = b"sparsetopic-checkpoint\n";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorHeader {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    config: TrainConfig,
    vocab: Vec<String>,
    tensors: Vec<TensorHeader>,
}

fn shapes(params: &ModelParams) -> Vec<Vec<usize>> {
    let enc = &params.encoder;
    let gen = &params.generative;
    let mut out = Vec::new();
    for layer in [&enc.layer1, &enc.layer2, &enc.mean_head, &enc.logstd_head] {
        out.push(layer.weights.shape().to_vec());
        out.push(layer.bias.shape().to_vec());
    }
    for a in [&gen.projection, &gen.topic_embeddings, &gen.word_embeddings] {
        out.push(a.shape().to_vec());
    }
    out
}

fn empty_params(cfg: &TrainConfig, vocab: usize) -> ModelParams {
    ModelParams {
        encoder: EncoderParams::zeros(vocab, cfg.hidden, cfg.latent_dim),
        generative: GenerativeParams::zeros(cfg.latent_dim, cfg.topics, cfg.embed_dim, vocab),
    }
}

pub fn write_checkpoint<W: Write>(model: &TopicModel, mut w: W) -> Result<()> {
    let params = model.params();
    let tensors = params
        .tensors()
        .into_iter()
        .zip(shapes(params))
        .map(|((name, _), shape)| TensorHeader { name: name.to_string(), shape })
        .collect();
    let header = Header {
        version: FORMAT_VERSION,
        config: model.config().clone(),
        vocab: model.vocab().terms().to_vec(),
        tensors,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for (_, data) in params.tensors() {
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<TopicModel> {
    let mut magic = vec![0u8; MAGIC.len()];
    r.read_exact(&mut magic).map_err(|_| Error::Checkpoint("file too short".into()))?;
    if magic != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > 1 << 32 {
        return Err(Error::Checkpoint("implausible header length".into()));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json).map_err(|_| Error::Checkpoint("truncated header".into()))?;

    // Check the version before interpreting the rest of the header so that
    // future layouts report a version error rather than a parse error.
    #[derive(Deserialize)]
    struct VersionOnly {
        version: u32,
    }
    let v: VersionOnly = serde_json::from_slice(&json).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if v.version != FORMAT_VERSION {
        return Err(Error::Version { found: v.version, expected: FORMAT_VERSION });
    }
    let header: Header = serde_json::from_slice(&json).map_err(|e| Error::Checkpoint(e.to_string()))?;
    header.config.validate()?;
    let vocab = Vocabulary::new(header.vocab)?;
    let mut params = empty_params(&header.config, vocab.len());

    let expected = shapes(&params);
    let names: Vec<&str> = params.tensors().into_iter().map(|(n, _)| n).collect();
    if header.tensors.len() != names.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} tensors, header lists {}",
            names.len(),
            header.tensors.len()
        )));
    }
    for ((t, name), shape) in header.tensors.iter().zip(&names).zip(&expected) {
        if t.name != *name || &t.shape != shape {
            return Err(Error::Checkpoint(format!(
                "tensor `{}` {:?} does not match configuration (`{name}` {:?})",
                t.name, t.shape, shape
            )));
        }
    }
    let mut buf = [0u8; 8];
    for (name, data) in params.tensors_mut() {
        for v in data.iter_mut() {
            r.read_exact(&mut buf).map_err(|_| Error::Checkpoint(format!("truncated data in `{name}`")))?;
            *v = f64::from_le_bytes(buf);
        }
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after tensor data".into()));
    }
    TopicModel::from_parts(header.config, vocab, params)
}

/// Writes to a sibling temporary file and renames it into place.
pub fn save(model: &TopicModel, path: &Path) -> Result<()> {
    let mut tmp: PathBuf = path.to_path_buf();
    let mut name = path
        .file_name()
        .ok_or_else(|| Error::Checkpoint(format!("invalid checkpoint path {}", path.display())))?
        .to_os_string();
    name.push(".tmp");
    tmp.set_file_name(name);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_checkpoint(model, &mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn load(path: &Path) -> Result<TopicModel> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
