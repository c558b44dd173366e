use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::operators::{CuttingNet, DeepONetModel};
use crate::problems::{Dataset, Domain, Problem, Provenance, Resolution, Sample, SampleParams, SolutionField, Splits};

/// Version of the manifest and checkpoint layouts.
pub const FORMAT_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOB_FILE: &str = "data.bin";
pub const CONFIG_ECHO_FILE: &str = "config.json";

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()
    };
    if let Err(e) = write() {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(&tmp, e));
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// One array inside the blob.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    /// Byte offset into the blob.
    pub offset: u64,
    /// Length in bytes.
    pub length: u64,
}

/// Human-readable description of a dataset whose arrays live in a binary blob
/// of little-endian f64, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub problem: Problem,
    pub seed: u64,
    pub resolution: Resolution,
    pub domain: Domain,
    pub provenance: Provenance,
    pub splits: Splits,
    pub params: Vec<SampleParams>,
    pub blob: String,
    pub blob_bytes: u64,
    pub sha256: String,
    pub arrays: Vec<ArrayRecord>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn check_version(path: &Path, text: &[u8]) -> Result<()> {
    let probe: VersionProbe = serde_json::from_slice(text).map_err(|e| Error::Corruption {
        path: path.to_owned(),
        reason: format!("no readable format_version: {e}"),
    })?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            expected: FORMAT_VERSION,
            found: probe.format_version,
        });
    }
    Ok(())
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::Corruption {
        path: path.to_owned(),
        reason: reason.into(),
    }
}

/// Saves `data` as `dir/manifest.json` plus `dir/data.bin`; returns the manifest path.
pub fn save_dataset(data: &Dataset, dir: &Path) -> Result<PathBuf> {
    let first = data
        .samples
        .first()
        .ok_or_else(|| Error::Usage("cannot save an empty dataset".into()))?;
    let domain = first.field.domain;
    let m = first.field.sensors.len();
    if data
        .samples
        .iter()
        .any(|s| s.field.domain != domain || s.field.sensors.len() != m)
    {
        return Err(Error::Usage("samples do not share one grid".into()));
    }
    let n = data.samples.len();
    let mut blob = Vec::with_capacity(8 * n * (m + domain.len()));
    for s in &data.samples {
        s.field.sensors.iter().for_each(|v| blob.extend_from_slice(&v.to_le_bytes()));
    }
    let sensor_bytes = blob.len() as u64;
    for s in &data.samples {
        s.field.values.iter().for_each(|v| blob.extend_from_slice(&v.to_le_bytes()));
    }
    let arrays = vec![
        ArrayRecord {
            name: "sensors".into(),
            shape: vec![n, m],
            dtype: "f64le".into(),
            offset: 0,
            length: sensor_bytes,
        },
        ArrayRecord {
            name: "values".into(),
            shape: vec![n, domain.n_slices(), domain.slice_len()],
            dtype: "f64le".into(),
            offset: sensor_bytes,
            length: blob.len() as u64 - sensor_bytes,
        },
    ];
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        problem: data.problem,
        seed: data.seed,
        resolution: data.resolution,
        domain,
        provenance: first.field.provenance,
        splits: data.splits.clone(),
        params: data.samples.iter().map(|s| s.params).collect(),
        blob: BLOB_FILE.into(),
        blob_bytes: blob.len() as u64,
        sha256: hex::encode(Sha256::digest(&blob)),
        arrays,
    };
    atomic_write(&dir.join(BLOB_FILE), &blob)?;
    let path = dir.join(MANIFEST_FILE);
    save_json(&path, &manifest)?;
    Ok(path)
}

fn array<'a>(m: &'a DatasetManifest, name: &str, path: &Path) -> Result<&'a ArrayRecord> {
    m.arrays
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| corrupt(path, format!("missing array '{name}'")))
}

/// Loads a dataset written by [`save_dataset`], verifying version, sizes and checksum.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let text = read(manifest_path)?;
    check_version(manifest_path, &text)?;
    let m: DatasetManifest =
        serde_json::from_slice(&text).map_err(|e| corrupt(manifest_path, format!("bad manifest: {e}")))?;
    let blob_path = manifest_path.parent().unwrap_or(Path::new(".")).join(&m.blob);
    let blob = read(&blob_path)?;
    if blob.len() as u64 != m.blob_bytes {
        return Err(corrupt(
            &blob_path,
            format!("{} bytes, manifest says {}", blob.len(), m.blob_bytes),
        ));
    }
    if hex::encode(Sha256::digest(&blob)) != m.sha256 {
        return Err(corrupt(&blob_path, "checksum mismatch"));
    }
    let mut spans: Vec<(u64, u64)> = vec![];
    for a in &m.arrays {
        let elems: usize = a.shape.iter().product();
        if a.dtype != "f64le" || a.length != 8 * elems as u64 || a.offset + a.length > m.blob_bytes {
            return Err(corrupt(manifest_path, format!("array '{}' has an inconsistent record", a.name)));
        }
        spans.push((a.offset, a.offset + a.length));
    }
    spans.sort_unstable();
    if spans.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(corrupt(manifest_path, "overlapping arrays"));
    }
    let n = m.params.len();
    let sensors = array(&m, "sensors", manifest_path)?;
    let values = array(&m, "values", manifest_path)?;
    if sensors.shape.len() != 2
        || sensors.shape[0] != n
        || values.shape != [n, m.domain.n_slices(), m.domain.slice_len()]
    {
        return Err(corrupt(manifest_path, "array shapes do not match the grid"));
    }
    let split_ok = m
        .splits
        .train
        .iter()
        .chain(&m.splits.val)
        .chain(&m.splits.test)
        .all(|&i| i < n);
    if !split_ok {
        return Err(corrupt(manifest_path, "split index out of range"));
    }
    let floats = |a: &ArrayRecord| -> Vec<f64> {
        blob[a.offset as usize..(a.offset + a.length) as usize]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect()
    };
    let sv = floats(sensors);
    let vv = floats(values);
    let (ms, len) = (sensors.shape[1], m.domain.len());
    let samples = m
        .params
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let field = SolutionField::new(
                m.domain,
                sv[k * ms..(k + 1) * ms].to_vec(),
                vv[k * len..(k + 1) * len].to_vec(),
                m.provenance,
            )?;
            Ok(Sample { params: *p, field })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        problem: m.problem,
        resolution: m.resolution,
        seed: m.seed,
        samples,
        splits: m.splits,
    })
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|e| Error::Usage(e.to_string()))?;
    text.push(b'\n');
    atomic_write(path, &text)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_slice(&text).map_err(|e| corrupt(path, e.to_string()))
}

/// Writes the fully resolved configuration of a run into `dir`.
pub fn write_config_echo(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = dir.join(CONFIG_ECHO_FILE);
    save_json(&path, cfg)?;
    Ok(path)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint<T> {
    format_version: u32,
    kind: String,
    model: T,
}

fn save_checkpoint<T: Serialize>(path: &Path, kind: &str, model: &T) -> Result<()> {
    save_json(
        path,
        &Checkpoint {
            format_version: FORMAT_VERSION,
            kind: kind.into(),
            model,
        },
    )
}

fn load_checkpoint<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text = read(path)?;
    check_version(path, &text)?;
    let c: Checkpoint<T> = serde_json::from_slice(&text).map_err(|e| corrupt(path, e.to_string()))?;
    if c.kind != kind {
        return Err(corrupt(path, format!("holds a {} model, expected {kind}", c.kind)));
    }
    Ok(c.model)
}

pub fn save_cutnet(path: &Path, cnet: &CuttingNet) -> Result<()> {
    save_checkpoint(path, "cutnet", cnet)
}

pub fn load_cutnet(path: &Path) -> Result<CuttingNet> {
    let c: CuttingNet = load_checkpoint(path, "cutnet")?;
    c.validate().map_err(|e| corrupt(path, e.to_string()))?;
    Ok(c)
}

/// Saves a DeepONet (lifted or baseline; the mode is stored with it).
pub fn save_deeponet(path: &Path, model: &DeepONetModel) -> Result<()> {
    save_checkpoint(path, "deeponet", model)
}

pub fn load_deeponet(path: &Path) -> Result<DeepONetModel> {
    let m: DeepONetModel = load_checkpoint(path, "deeponet")?;
    m.validate().map_err(|e| corrupt(path, e.to_string()))?;
    Ok(m)
}
