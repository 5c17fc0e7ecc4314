//! Binary checkpoint:
//!
//! ```text
//! "MECMORL\0"            8 bytes magic
//! version                u32 LE
//! header length          u32 LE
//! header                 UTF-8 `key=value` lines
//! payload SHA-256        32 bytes
//! parameters             n × f64 LE
//! ```

use std::path::Path;

use mec_morl_core::nn::{Architecture, Layout, Network};
use mec_morl_core::{Preference, RewardScales};
use sha2::{Digest, Sha256};

use crate::{Failure, Result};

pub const MAGIC: &[u8; 8] = b"MECMORL\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub preference: Preference,
    pub scales: RewardScales,
    pub config_hash: String,
}

fn header(c: &Checkpoint) -> String {
    let l = c.network.layout();
    let a = l.arch;
    [
        format!("layout=encoder-trunk-residual"),
        format!("edges={}", l.edges),
        format!("bins={}", l.bins),
        format!("encoder={}", a.encoder),
        format!("trunk={}", a.trunk),
        format!("blocks={}", a.blocks),
        format!("omega_t={:?}", c.preference.delay),
        format!("omega_e={:?}", c.preference.energy),
        format!("alpha_t={:?}", c.scales.delay),
        format!("alpha_e={:?}", c.scales.energy),
        format!("config_hash={}", c.config_hash),
        format!("params={}", l.num_params()),
    ]
    .join("\n")
}

pub fn encode(c: &Checkpoint) -> Vec<u8> {
    let head = header(c);
    let payload: Vec<u8> = c.network.params().iter().flat_map(|p| p.to_le_bytes()).collect();
    let mut out = Vec::with_capacity(48 + head.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(head.len() as u32).to_le_bytes());
    out.extend_from_slice(head.as_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    out
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Data(format!("checkpoint: {}", msg.into()))
}

fn take<'a>(bytes: &'a [u8], at: &mut usize, n: usize) -> Result<&'a [u8]> {
    let s = bytes.get(*at..*at + n).ok_or_else(|| bad("truncated"))?;
    *at += n;
    Ok(s)
}

fn u32_at(bytes: &[u8], at: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, at, 4)?.try_into().unwrap()))
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut at = 0;
    if take(bytes, &mut at, 8)? != MAGIC {
        return Err(bad("not a checkpoint file (bad magic)"));
    }
    let version = u32_at(bytes, &mut at)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}, expected {VERSION}")));
    }
    let hlen = u32_at(bytes, &mut at)? as usize;
    let head = std::str::from_utf8(take(bytes, &mut at, hlen)?).map_err(|_| bad("header is not UTF-8"))?;
    let get = |k: &str| -> Result<&str> {
        head.lines()
            .find_map(|l| l.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| bad(format!("header lacks {k}")))
    };
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
        v.parse().map_err(|_| bad(format!("bad {k} value {v:?}")))
    }
    if get("layout")? != "encoder-trunk-residual" {
        return Err(bad(format!("unknown layout {:?}", get("layout")?)));
    }
    let arch = Architecture {
        encoder: num("encoder", get("encoder")?)?,
        trunk: num("trunk", get("trunk")?)?,
        blocks: num("blocks", get("blocks")?)?,
    };
    let layout = Layout::new(num("edges", get("edges")?)?, num("bins", get("bins")?)?, arch)
        .map_err(|e| bad(e.to_string()))?;
    let n: usize = num("params", get("params")?)?;
    if n != layout.num_params() {
        return Err(bad(format!("header says {n} parameters, layout has {}", layout.num_params())));
    }
    let digest = take(bytes, &mut at, 32)?.to_vec();
    let payload = take(bytes, &mut at, n * 8)?;
    if at != bytes.len() {
        return Err(bad("trailing bytes after parameters"));
    }
    if Sha256::digest(payload).as_slice() != digest.as_slice() {
        return Err(bad("parameter checksum mismatch (corrupt file)"));
    }
    let params: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let network = Network::from_params(layout, params).map_err(|e| bad(e.to_string()))?;
    let omega_t: f64 = num("omega_t", get("omega_t")?)?;
    let omega_e: f64 = num("omega_e", get("omega_e")?)?;
    let preference = Preference::new(omega_t).map_err(|e| bad(e.to_string()))?;
    if preference.energy != omega_e {
        return Err(bad("omega_t and omega_e do not sum to one"));
    }
    let scales = RewardScales::new(num("alpha_t", get("alpha_t")?)?, num("alpha_e", get("alpha_e")?)?)
        .map_err(|e| bad(e.to_string()))?;
    Ok(Checkpoint {
        network,
        preference,
        scales,
        config_hash: get("config_hash")?.to_string(),
    })
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    decode(&bytes).map_err(|e| match e {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}
