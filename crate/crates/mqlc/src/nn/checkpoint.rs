//! Binary checkpoint format: a JSON manifest (architecture name, shapes,
//! seed, version) followed by flat little-endian f64 arrays, one per named
//! parameter, in manifest order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ParameterSet;
use super::tensor::Tensor;
use super::NnError;

const MAGIC: &[u8; 8] = b"MQLCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckpointMeta {
    pub architecture: String,
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    meta: CheckpointMeta,
    sections: Vec<SectionEntry>,
}

#[derive(Serialize, Deserialize)]
struct SectionEntry {
    name: String,
    params: Vec<ParamEntry>,
}

#[derive(Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    rows: u64,
    cols: u64,
}

pub fn save_checkpoint(
    path: &Path,
    meta: &CheckpointMeta,
    sections: &[(&str, &ParameterSet)],
) -> Result<(), NnError> {
    let manifest = Manifest {
        meta: meta.clone(),
        sections: sections
            .iter()
            .map(|(name, ps)| SectionEntry {
                name: (*name).to_string(),
                params: ps
                    .iter()
                    .map(|(pname, t)| ParamEntry {
                        name: pname.to_string(),
                        rows: t.rows() as u64,
                        cols: t.cols() as u64,
                    })
                    .collect(),
            })
            .collect(),
    };
    let manifest_bytes =
        serde_json::to_vec(&manifest).map_err(|e| NnError::Checkpoint(e.to_string()))?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(manifest_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&manifest_bytes)?;
    for (_, ps) in sections {
        for (_, t) in ps.iter() {
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(
    path: &Path,
) -> Result<(CheckpointMeta, Vec<(String, ParameterSet)>), NnError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let manifest_len = u32::from_le_bytes(len_bytes) as usize;
    let mut manifest_bytes = vec![0u8; manifest_len];
    r.read_exact(&mut manifest_bytes)?;
    let manifest: Manifest =
        serde_json::from_slice(&manifest_bytes).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    if manifest.meta.version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!(
            "unsupported version {}",
            manifest.meta.version
        )));
    }

    let mut sections = Vec::with_capacity(manifest.sections.len());
    for section in &manifest.sections {
        let mut ps = ParameterSet::new();
        for p in &section.params {
            let count = (p.rows * p.cols) as usize;
            let mut buf = vec![0u8; count * 8];
            r.read_exact(&mut buf)?;
            let data: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            ps.insert(&p.name, Tensor::from_vec(p.rows as usize, p.cols as usize, data));
        }
        sections.push((section.name.clone(), ps));
    }
    Ok((manifest.meta, sections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ParamInit;

    #[test]
    fn round_trip_preserves_everything() {
        let mut init = ParamInit::new(42);
        let mut a = ParameterSet::new();
        a.insert("layer.w", init.weight(3, 4));
        a.insert("layer.b", init.bias(4));
        let mut b = ParameterSet::new();
        b.insert("head.w", init.weight(4, 2));

        let mut extra = BTreeMap::new();
        extra.insert("n_agents".to_string(), "2".to_string());
        let meta = CheckpointMeta {
            architecture: "test_net".to_string(),
            version: CHECKPOINT_VERSION,
            seed: 42,
            extra,
        };

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        save_checkpoint(&path, &meta, &[("a", &a), ("b", &b)]).unwrap();
        let (meta2, sections) = load_checkpoint(&path).unwrap();
        assert_eq!(meta, meta2);
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].0, "a");
        assert_eq!(sections[0].1, a);
        assert_eq!(sections[1].1, b);
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a checkpoint at all").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
