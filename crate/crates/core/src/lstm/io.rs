//! Binary container for [`TrainedModel`].
//!
//! Layout: the 8-byte magic `CSEERMDL`, a little-endian `u32` format
//! version, a `u64` header length, a UTF-8 JSON header describing shapes,
//! normalization, configuration and history, a `u64` parameter count, and
//! finally every parameter as a little-endian `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::train::{EpochStats, TrainConfig, TrainedModel};
use super::Network;
use crate::dataset::NormParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CSEERMDL";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    input_dim: usize,
    sizes: Vec<usize>,
    norm: NormParams,
    history: Vec<EpochStats>,
    best_epoch: usize,
    config: TrainConfig,
    k: usize,
    j: usize,
    feature_names: Vec<String>,
    meta: BTreeMap<String, String>,
}

impl TrainedModel {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            input_dim: self.network.input_dim(),
            sizes: self.network.sizes().to_vec(),
            norm: self.norm.clone(),
            history: self.history.clone(),
            best_epoch: self.best_epoch,
            config: self.config.clone(),
            k: self.k,
            j: self.j,
            feature_names: self.feature_names.clone(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let params = self.network.params();
        let mut out = Vec::with_capacity(8 + 4 + 8 + json.len() + 8 + 8 * params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(params.len() as u64).to_le_bytes());
        for p in params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(Error::ModelFormat("bad magic; not a model file".into()));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let header_len = cur.u64()? as usize;
        let header: Header = serde_json::from_slice(cur.take(header_len)?)
            .map_err(|e| Error::ModelFormat(format!("header: {e}")))?;
        let count = cur.u64()? as usize;
        let raw = cur.take(count.checked_mul(8).ok_or_else(|| Error::ModelFormat("overflow".into()))?)?;
        if cur.pos != bytes.len() {
            return Err(Error::ModelFormat("trailing bytes".into()));
        }
        let params = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let network = Network::from_parts(header.input_dim, header.sizes, params)?;
        Ok(TrainedModel {
            network,
            norm: header.norm,
            history: header.history,
            best_epoch: header.best_epoch,
            config: header.config,
            k: header.k,
            j: header.j,
            feature_names: header.feature_names,
            meta: header.meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|e| *e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::init_network;

    fn model() -> TrainedModel {
        let mut norm = NormParams {
            columns: BTreeMap::new(),
        };
        norm.columns.insert("price_high".into(), (0.1 + 0.2, 1.0 / 3.0 + 7.0));
        norm.columns.insert("r_vol".into(), (0.0, 17.0));
        TrainedModel {
            network: init_network(2, &[3, 2], 42).unwrap(),
            norm,
            history: vec![EpochStats {
                train_mse: 0.123456789012345,
                val_mse: 1e-7 / 3.0,
            }],
            best_epoch: 1,
            config: TrainConfig::default(),
            k: 2,
            j: 1,
            feature_names: vec!["price_high".into(), "r_vol".into()],
            meta: [("signals".to_string(), "R_Vol".to_string())].into_iter().collect(),
        }
    }

    #[test]
    fn bytes_round_trip_exactly() {
        let m = model();
        let bytes = m.to_bytes().unwrap();
        let back = TrainedModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes().unwrap(), bytes);
        let w = [0.2, 0.4, 0.6, 0.1];
        assert_eq!(
            back.network.predict_one(&w).unwrap().to_bits(),
            m.network.predict_one(&w).unwrap().to_bits()
        );
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = model().to_bytes().unwrap();
        assert!(TrainedModel::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(TrainedModel::from_bytes(b"NOTAMODEL").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(TrainedModel::from_bytes(&extra).is_err());
    }
}
