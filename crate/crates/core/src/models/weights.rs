//! Named tensor collection and the MSRW weight file format.
//!
//! ```text
//! "MSRW" | u32 LE version (= 1) | u32 LE tensor count
//! per tensor: u16 LE name length | UTF-8 name | u8 rank
//!             | rank x u32 LE dims | prod(dims) x f32 LE values
//! ```
//!
//! No padding or alignment. Names are unique and their order is preserved.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use super::Tensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MSRW";
pub const MSRW_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelWeights {
    entries: IndexMap<String, Tensor>,
}

impl ModelWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends a tensor; duplicate names are rejected.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if name.len() > u16::MAX as usize {
            return Err(Error::Model(format!("tensor name too long ({} bytes)", name.len())));
        }
        if tensor.rank() > u8::MAX as usize {
            return Err(Error::Model(format!("{name}: rank {} too large", tensor.rank())));
        }
        if self.entries.contains_key(&name) {
            return Err(Error::Model(format!("duplicate tensor name {name:?}")));
        }
        self.entries.insert(name, tensor);
        Ok(())
    }

    pub(crate) fn put(&mut self, name: impl Into<String>, dims: &[usize], data: Vec<f32>) {
        let name = name.into();
        self.insert(name.clone(), Tensor::from_parts(dims.to_vec(), data))
            .unwrap_or_else(|e| panic!("building {name}: {e}"));
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::Model(format!("missing tensor {name:?}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| Error::Model(format!("missing tensor {name:?}")))
    }

    /// Values of `name`, checking that its shape is exactly `dims`.
    pub fn expect(&self, name: &str, dims: &[usize]) -> Result<&[f32]> {
        let t = self.get(name)?;
        if t.dims() != dims {
            return Err(Error::Model(format!(
                "weight shape mismatch for {name:?}: expected {dims:?}, found {:?}",
                t.dims()
            )));
        }
        Ok(t.data())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn num_params(&self) -> usize {
        self.entries.values().map(Tensor::numel).sum()
    }

    /// Sets every tensor whose name starts with one of `prefixes` to zero.
    pub fn zero_matching(&mut self, prefixes: &[&str]) {
        for (name, t) in self.entries.iter_mut() {
            if prefixes.iter().any(|p| name.starts_with(p)) {
                t.data_mut().iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.num_params() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&MSRW_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (name, t) in &self.entries {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(t.rank() as u8);
            for &d in t.dims() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parses a complete MSRW image; nothing is returned unless every byte
    /// is accounted for.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad MSRW magic".into()));
        }
        let version = r.u32()?;
        if version != MSRW_VERSION {
            return Err(Error::Format(format!("unsupported MSRW version {version}")));
        }
        let count = r.u32()? as usize;
        let mut out = ModelWeights::new();
        for _ in 0..count {
            let len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
                .to_owned();
            let rank = r.take(1)?[0] as usize;
            let dims = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            if dims.is_empty() || dims.contains(&0) {
                return Err(Error::Format(format!("{name}: invalid dims {dims:?}")));
            }
            let n = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|n| n.checked_mul(4).is_some_and(|b| b <= r.remaining()))
                .ok_or_else(|| Error::Format(format!("{name}: truncated tensor data")))?;
            let data: Vec<f32> = r
                .take(n * 4)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if out.entries.contains_key(&name) {
                return Err(Error::Format(format!("duplicate tensor name {name:?}")));
            }
            let t = Tensor::new(dims, data).map_err(|e| Error::Format(format!("{name}: {e}")))?;
            out.entries.insert(name, t);
        }
        if r.remaining() != 0 {
            return Err(Error::Format(format!("{} trailing bytes", r.remaining())));
        }
        Ok(out)
    }
}

pub fn save_weights(w: &ModelWeights, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, w.to_bytes()).map_err(Error::io(path))
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<ModelWeights> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    ModelWeights::from_bytes(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format(format!(
                "truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_is_twelve_bytes() {
        let bytes = ModelWeights::new().to_bytes();
        assert_eq!(bytes, b"MSRW\x01\x00\x00\x00\x00\x00\x00\x00");
        assert!(ModelWeights::from_bytes(&bytes).unwrap().is_empty());
    }

    #[test]
    fn single_tensor_layout() {
        let mut w = ModelWeights::new();
        w.insert("w1", Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap())
            .unwrap();
        let mut expect = b"MSRW".to_vec();
        expect.extend_from_slice(&[1, 0, 0, 0, 1, 0, 0, 0]);
        expect.extend_from_slice(&[2, 0, b'w', b'1', 2]);
        expect.extend_from_slice(&[2, 0, 0, 0, 2, 0, 0, 0]);
        for v in [1.0f32, 2.0, 3.0, 4.0] {
            expect.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(w.to_bytes(), expect);
        assert_eq!(ModelWeights::from_bytes(&expect).unwrap(), w);
    }

    #[test]
    fn rejects_corruption() {
        let mut w = ModelWeights::new();
        w.put("a", &[3], vec![1.0, 2.0, 3.0]);
        w.put("b", &[1, 2], vec![4.0, 5.0]);
        let good = w.to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[1] = b'X';
        assert!(matches!(ModelWeights::from_bytes(&bad_magic), Err(Error::Format(_))));

        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(matches!(ModelWeights::from_bytes(&bad_version), Err(Error::Format(_))));

        for cut in 0..good.len() {
            assert!(matches!(ModelWeights::from_bytes(&good[..cut]), Err(Error::Format(_))));
        }
        let mut trailing = good.clone();
        trailing.push(0);
        assert!(ModelWeights::from_bytes(&trailing).is_err());

        // rename "b" to "a"
        let mut dup = good.clone();
        let pos = dup.windows(3).position(|s| s == [1, 0, b'b']).unwrap();
        dup[pos + 2] = b'a';
        assert!(matches!(ModelWeights::from_bytes(&dup), Err(Error::Format(_))));
    }

    #[test]
    fn shape_checked_lookup() {
        let mut w = ModelWeights::new();
        w.put("k", &[2, 3], vec![0.0; 6]);
        assert!(w.expect("k", &[2, 3]).is_ok());
        assert!(matches!(w.expect("k", &[3, 2]), Err(Error::Model(_))));
        assert!(matches!(w.get("missing"), Err(Error::Model(_))));
        assert!(w.insert("k", Tensor::zeros(&[1])).is_err());
    }
}
