//! Binary model files. All integers and reals are little-endian:
//!
//! ```text
//! magic    8 bytes  "SKIPTAG\0"
//! version  u32
//! config   str      key=value lines
//! words    u32 count, then str each (reserved entries excluded)
//! chars    u32 count, then u32 code point each
//! tags     u32 count, then str each
//! meta     u32 epochs, u32 best_epoch, f64 best_dev_accuracy, u64 updates
//! params   u32 count, then u32 rows, u32 cols, rows*cols f64 (row-major) each
//! ```
//!
//! A `str` is a u32 byte length followed by UTF-8 bytes.
use std::path::Path;

use super::config::{parse_config, tagger_config_text};
use crate::error::{Error, Result};
use crate::features::Vocab;
use crate::numerics::ParamSet;
use crate::tagger::{TaggerModel, TrainingMeta};

pub const MAGIC: &[u8; 8] = b"SKIPTAG\0";
pub const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("checkpoint field exceeds u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Corrupt(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Corrupt("invalid UTF-8".into()))
    }

    /// A count whose items take at least `min_item` bytes each.
    fn count(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()?;
        if n.saturating_mul(min_item) > self.bytes.len() - self.pos {
            return Err(Error::Corrupt(format!("truncated at byte {}", self.pos)));
        }
        Ok(n)
    }
}

pub fn checkpoint_bytes(model: &TaggerModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    w.str(&tagger_config_text(&model.config));
    let (words, chars, tags) = model.vocab.parts();
    w.u32(words.len());
    words.iter().for_each(|s| w.str(s));
    w.u32(chars.len());
    chars.iter().for_each(|&c| w.u32(c as usize));
    w.u32(tags.len());
    tags.iter().for_each(|s| w.str(s));
    let m = &model.meta;
    w.u32(m.epochs as usize);
    w.u32(m.best_epoch as usize);
    w.0.extend_from_slice(&m.best_dev_accuracy.to_le_bytes());
    w.0.extend_from_slice(&m.updates.to_le_bytes());
    let tensors = model.tensors();
    w.u32(tensors.len());
    for t in tensors {
        w.u32(t.rows());
        w.u32(t.cols());
        for v in t.data() {
            w.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.0
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<TaggerModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
        return Err(Error::BadMagic);
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            expected: VERSION,
        });
    }
    let (config, _) = parse_config(&r.str()?, Path::new("<checkpoint config>"))?;
    let words = (0..r.count(4)?)
        .map(|_| r.str())
        .collect::<Result<Vec<_>>>()?;
    let chars = (0..r.count(4)?)
        .map(|_| {
            let code = r.u32()? as u32;
            char::from_u32(code).ok_or_else(|| Error::Corrupt(format!("invalid char {code:#x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let tags = (0..r.count(4)?)
        .map(|_| r.str())
        .collect::<Result<Vec<_>>>()?;
    let meta = TrainingMeta {
        epochs: r.u32()? as u32,
        best_epoch: r.u32()? as u32,
        best_dev_accuracy: r.f64()?,
        updates: r.u64()?,
    };
    let mut model = TaggerModel::zeros(config, Vocab::from_parts(words, chars, tags)?)?;
    model.meta = meta;
    let count = r.count(8)?;
    let mut tensors = model.tensors_mut();
    if count != tensors.len() {
        return Err(Error::Corrupt(format!(
            "{count} parameter tensors, the configuration needs {}",
            tensors.len()
        )));
    }
    for (i, t) in tensors.iter_mut().enumerate() {
        let shape = (r.u32()?, r.u32()?);
        if shape != t.shape() {
            return Err(Error::Corrupt(format!(
                "tensor {i} is {shape:?}, expected {:?}",
                t.shape()
            )));
        }
        for v in t.data_mut() {
            *v = r.f64()?;
        }
        if !t.is_finite() {
            return Err(Error::Corrupt(format!(
                "tensor {i} holds non-finite values"
            )));
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(model)
}

/// Writes through a temporary sibling file, so a failed save leaves any
/// earlier checkpoint intact.
pub fn save_checkpoint(model: &TaggerModel, path: &Path) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, checkpoint_bytes(model)).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<TaggerModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes)
}
