//! Binary network checkpoints.
//!
//! Layout, all little-endian: magic `HSDN1`, then `dense_layers`, `growth`,
//! `out_bands` and the parameter count as u64, `out_bands` wavelengths as
//! f64, then the parameters as f64.

use std::fs;
use std::path::Path;

use super::network::{Network, NetworkConfig};
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"HSDN1";

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub network: Network,
    pub wavelengths_nm: Vec<f64>,
}

impl Checkpoint {
    pub fn new(network: Network, wavelengths_nm: Vec<f64>) -> Result<Self> {
        if wavelengths_nm.len() != network.config().out_bands {
            return Err(Error::ShapeMismatch(format!(
                "{} wavelengths for {} output bands",
                wavelengths_nm.len(),
                network.config().out_bands
            )));
        }
        Ok(Self { network, wavelengths_nm })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let cfg = self.network.config();
        let params = self.network.params();
        let mut out = Vec::with_capacity(5 + 32 + 8 * (self.wavelengths_nm.len() + params.len()));
        out.extend_from_slice(MAGIC);
        for v in [cfg.dense_layers, cfg.growth, cfg.out_bands, params.len()] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for v in self.wavelengths_nm.iter().chain(params) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("checkpoint: {msg}"));
        let body = bytes.strip_prefix(MAGIC.as_slice()).ok_or_else(|| bad("bad magic"))?;
        if body.len() < 32 {
            return Err(bad("truncated header"));
        }
        let word = |i: usize| u64::from_le_bytes(body[i * 8..i * 8 + 8].try_into().unwrap()) as usize;
        let config = NetworkConfig {
            dense_layers: word(0),
            growth: word(1),
            out_bands: word(2),
        };
        let n_params = word(3);
        let floats = &body[32..];
        let expected = config
            .out_bands
            .checked_add(n_params)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| bad("size overflow"))?;
        if floats.len() != expected {
            return Err(bad(&format!("expected {expected} payload bytes, found {}", floats.len())));
        }
        let values: Vec<f64> = floats
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (wl, params) = values.split_at(config.out_bands);
        let network = Network::from_params(config, params.to_vec())?;
        Self::new(network, wl.to_vec())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let cfg = NetworkConfig {
            dense_layers: 2,
            growth: 4,
            out_bands: 3,
        };
        let ck = Checkpoint::new(Network::he_init(cfg, 5).unwrap(), vec![450.0, 550.0, 650.0]).unwrap();
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back.network.params(), ck.network.params());
        assert_eq!(back.wavelengths_nm, ck.wavelengths_nm);
        assert_eq!(back.network.config(), ck.network.config());
    }

    #[test]
    fn rejects_corruption() {
        assert!(Checkpoint::from_bytes(b"nope").is_err());
        let cfg = NetworkConfig::default();
        let wl = (0..15).map(|i| 400.0 + i as f64).collect();
        let mut bytes = Checkpoint::new(Network::zeros(cfg).unwrap(), wl).unwrap().to_bytes();
        bytes.pop();
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }
}
