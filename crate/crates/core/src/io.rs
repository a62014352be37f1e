//! Experiment configuration files, output directories with a hashed
//! manifest, and the binary checkpoint and kernel-dump formats.
//!
//! # Configuration
//!
//! TOML with four sections; every key is optional and unknown keys are errors.
//!
//! ```toml
//! [physics]
//! nu = 0.05
//! mu0 = 0.1
//! gamma = 0.1
//! eps0 = 0.05
//! alpha = 0.25
//! theta0 = 0.25
//! datum = "analytic"        # boundary_bump | detached | analytic
//! amplitude = 1.0
//!
//! [numerics]
//! k = 8
//! dt = 1e-3
//! t_final = 0.1
//! ny = 128
//! ymax = 8.0
//! quad_order = 4
//! solver = "mild"           # mild | direct | euler
//! nu_list = [4e-3, 2e-3, 1e-3, 5e-4]
//! gamma_grid = [0.05, 0.1, 0.2, 0.4]
//!
//! [norms]
//! n_mu = 32
//! kato_c = 1.0
//!
//! [io]
//! snapshot_every = 10
//! checkpoint = true
//! kernel_dump = false
//! ```
//!
//! # Checkpoint (`.nshs`, little-endian)
//!
//! | field | type |
//! |---|---|
//! | magic | `b"NSHS"` |
//! | version | `u32` |
//! | config block length | `u32`, then that many bytes of UTF-8 `key=value\n` lines |
//! | node count `n` | `u64`, then `n` × `f64` grid nodes |
//! | snapshot count | `u64` |
//! | per snapshot | `time: f64`, `K: u32`, then for `xi = -K..=K`, `n` × (`re: f64`, `im: f64`) |
//!
//! # Kernel dump (`.nshk`, little-endian)
//!
//! `b"NSHK"`, `version: u32`, `xi: i64`, `t: f64`, `nu: f64`, `n: u64`, then
//! `n * n` row-major `f64` entries.

use crate::field::{make_grid, ConfigError, FieldError, ModeField, RunConfig, VorticityState, YGrid};
use crate::kernels::KernelMatrix;
use crate::solvers::{Datum, SolverKind};
use crate::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("override `{0}`: expected section.key=value")]
    OverrideSyntax(String),
    #[error("override `{0}`: unknown key")]
    OverrideKey(String),
    #[error("override `{0}`: key is ambiguous, qualify it with a section")]
    OverrideAmbiguous(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid experiment settings: {0}")]
    Settings(String),
    #[error("malformed {kind} file: {reason}")]
    Format { kind: &'static str, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub nu: f64,
    pub mu0: f64,
    pub gamma: f64,
    pub eps0: f64,
    pub alpha: f64,
    pub theta0: f64,
    pub datum: Datum,
    pub amplitude: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let c = RunConfig::default();
        PhysicsSection {
            nu: c.nu,
            mu0: c.mu0,
            gamma: c.gamma,
            eps0: c.eps0,
            alpha: c.alpha,
            theta0: c.theta0,
            datum: Datum::Analytic,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub k: usize,
    pub dt: f64,
    pub t_final: f64,
    pub ny: usize,
    pub ymax: f64,
    pub quad_order: usize,
    pub solver: SolverKind,
    pub nu_list: Vec<f64>,
    pub gamma_grid: Vec<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let c = RunConfig::default();
        NumericsSection {
            k: c.k,
            dt: c.dt,
            t_final: c.t_final,
            ny: c.ny,
            ymax: c.ymax,
            quad_order: c.quad_order,
            solver: SolverKind::Mild,
            nu_list: vec![4e-3, 2e-3, 1e-3, 5e-4],
            gamma_grid: vec![0.05, 0.1, 0.2, 0.4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    pub n_mu: usize,
    /// Width factor of the near-wall dissipation strip `y <= kato_c * nu`.
    pub kato_c: f64,
}

impl Default for NormsSection {
    fn default() -> Self {
        NormsSection { n_mu: 32, kato_c: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSection {
    pub snapshot_every: usize,
    pub checkpoint: bool,
    pub kernel_dump: bool,
}

impl Default for IoSection {
    fn default() -> Self {
        IoSection { snapshot_every: RunConfig::default().snapshot_every, checkpoint: true, kernel_dump: false }
    }
}

/// Contents of an experiment file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub physics: PhysicsSection,
    pub numerics: NumericsSection,
    pub norms: NormsSection,
    pub io: IoSection,
}

const SECTIONS: [&str; 4] = ["physics", "numerics", "norms", "io"];

impl ExperimentConfig {
    pub fn run_config(&self) -> RunConfig {
        let (p, n) = (&self.physics, &self.numerics);
        RunConfig {
            nu: p.nu,
            mu0: p.mu0,
            gamma: p.gamma,
            eps0: p.eps0,
            alpha: p.alpha,
            theta0: p.theta0,
            k: n.k,
            dt: n.dt,
            t_final: n.t_final,
            ny: n.ny,
            ymax: n.ymax,
            quad_order: n.quad_order,
            snapshot_every: self.io.snapshot_every,
        }
    }

    pub fn norm_params(&self) -> crate::norms::NormParams {
        crate::norms::NormParams { n_mu: self.norms.n_mu, ..crate::norms::NormParams::from_config(&self.run_config()) }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        self.run_config().validate()?;
        let nl = &self.numerics.nu_list;
        if nl.iter().any(|&v| !(v > 0.0)) || nl.windows(2).any(|w| w[1] >= w[0]) {
            return Err(IoError::Settings(format!("numerics.nu_list must be positive and strictly decreasing, got {nl:?}")));
        }
        let gg = &self.numerics.gamma_grid;
        if gg.iter().any(|&v| !(v > 0.0)) || gg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(IoError::Settings(format!("numerics.gamma_grid must be positive and strictly increasing, got {gg:?}")));
        }
        if self.norms.n_mu < 2 {
            return Err(IoError::Settings(format!("norms.n_mu = {} must be at least 2", self.norms.n_mu)));
        }
        if !(self.norms.kato_c > 0.0) {
            return Err(IoError::Settings(format!("norms.kato_c = {} must be positive", self.norms.kato_c)));
        }
        if !(self.physics.amplitude.is_finite()) {
            return Err(IoError::Settings("physics.amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn section_of(key: &str, ov: &str) -> Result<&'static str, IoError> {
    let defaults = toml::Value::try_from(ExperimentConfig::default()).expect("defaults serialize");
    let owners: Vec<&'static str> =
        SECTIONS.iter().copied().filter(|s| defaults.get(s).and_then(|t| t.get(key)).is_some()).collect();
    match owners.as_slice() {
        [one] => Ok(one),
        [] => Err(IoError::OverrideKey(ov.to_string())),
        _ => Err(IoError::OverrideAmbiguous(ov.to_string())),
    }
}

/// Applies `section.key=value` overrides (a bare `key` is accepted when only
/// one section owns it) and deserializes with full type checking.
pub fn apply_overrides(mut table: toml::Table, overrides: &[String]) -> Result<ExperimentConfig, IoError> {
    for ov in overrides {
        let (lhs, rhs) = ov.split_once('=').ok_or_else(|| IoError::OverrideSyntax(ov.clone()))?;
        let lhs = lhs.trim();
        let (section, key) = match lhs.split_once('.') {
            Some((s, k)) => (s.to_string(), k.to_string()),
            None => (section_of(lhs, ov)?.to_string(), lhs.to_string()),
        };
        if !SECTIONS.contains(&section.as_str()) || key.is_empty() {
            return Err(IoError::OverrideKey(ov.clone()));
        }
        let sec = table.entry(section).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let sec = sec.as_table_mut().ok_or_else(|| IoError::Parse(format!("`{lhs}` is not inside a table")))?;
        sec.insert(key, parse_value(rhs.trim()));
    }
    toml::Value::Table(table).try_into::<ExperimentConfig>().map_err(|e| IoError::Parse(e.to_string()))
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<ExperimentConfig, IoError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let cfg = apply_overrides(table, overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, overrides and validates an experiment file.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    parse_config_str(&text, overrides)
}

// ---------------------------------------------------------------- outputs

/// One emitted file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub artifacts: Vec<ManifestEntry>,
}

/// Name of the index written next to the artifacts.
pub const MANIFEST_NAME: &str = "manifest.json";

/// An output file held in memory until emission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub kind: String,
    pub data: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, kind: &str, text: impl Into<String>) -> Self {
        Artifact { name: name.to_string(), kind: kind.to_string(), data: text.into().into_bytes() }
    }

    pub fn binary(name: &str, kind: &str, data: Vec<u8>) -> Self {
        Artifact { name: name.to_string(), kind: kind.to_string(), data }
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes all artifacts and the manifest into `dir`; on failure every file
/// written by this call is removed.
pub fn emit_outputs(dir: &Path, artifacts: &[Artifact]) -> Result<Manifest, IoError> {
    let wr = |p: &Path, e| IoError::Write { path: p.to_path_buf(), source: e };
    fs::create_dir_all(dir).map_err(|e| wr(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut manifest = Manifest { version: 1, artifacts: Vec::new() };
    let mut result = Ok(());
    for a in artifacts {
        let path = dir.join(&a.name);
        let res = path
            .parent()
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&path, &a.data))
            .map_err(|e| wr(&path, e));
        if let Err(e) = res {
            result = Err(e);
            break;
        }
        written.push(path);
        manifest.artifacts.push(ManifestEntry {
            path: a.name.clone(),
            kind: a.kind.clone(),
            bytes: a.data.len() as u64,
            sha256: sha256_hex(&a.data),
        });
    }
    if result.is_ok() {
        manifest.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        result = fs::write(&path, text).map_err(|e| wr(&path, e));
    }
    match result {
        Ok(()) => Ok(manifest),
        Err(e) => {
            for p in written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// Re-hashes every listed file; returns the paths whose contents differ.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, IoError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|source| IoError::Read { path: path.clone(), source })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| IoError::Format { kind: "manifest", reason: e.to_string() })?;
    let mut bad = Vec::new();
    for a in &manifest.artifacts {
        let p = dir.join(&a.path);
        let data = fs::read(&p).map_err(|source| IoError::Read { path: p.clone(), source })?;
        if sha256_hex(&data) != a.sha256 {
            bad.push(a.path.clone());
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------- binary formats

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NSHS";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const KERNEL_MAGIC: &[u8; 4] = b"NSHK";
pub const KERNEL_VERSION: u32 = 1;

/// `key=value` lines of the checkpoint config block.
pub fn config_block(cfg: &RunConfig, grid: &YGrid) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
    kv("nu", format!("{:e}", cfg.nu));
    kv("mu0", format!("{:e}", cfg.mu0));
    kv("gamma", format!("{:e}", cfg.gamma));
    kv("eps0", format!("{:e}", cfg.eps0));
    kv("alpha", format!("{:e}", cfg.alpha));
    kv("theta0", format!("{:e}", cfg.theta0));
    kv("k", cfg.k.to_string());
    kv("dt", format!("{:e}", cfg.dt));
    kv("t_final", format!("{:e}", cfg.t_final));
    kv("ny", cfg.ny.to_string());
    kv("ymax", format!("{:e}", cfg.ymax));
    kv("quad_order", cfg.quad_order.to_string());
    kv("snapshot_every", cfg.snapshot_every.to_string());
    kv("grid_nu", format!("{:e}", grid.nu_hint));
    out
}

pub fn encode_checkpoint(cfg: &RunConfig, snapshots: &[VorticityState]) -> Vec<u8> {
    let grid = &snapshots.first().expect("at least one snapshot").grid;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let block = config_block(cfg, grid);
    out.extend_from_slice(&(block.len() as u32).to_le_bytes());
    out.extend_from_slice(block.as_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    for y in &grid.nodes {
        out.extend_from_slice(&y.to_le_bytes());
    }
    out.extend_from_slice(&(snapshots.len() as u64).to_le_bytes());
    for s in snapshots {
        out.extend_from_slice(&s.time.to_le_bytes());
        out.extend_from_slice(&(s.k as u32).to_le_bytes());
        for m in &s.modes {
            for v in &m.values {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    out
}

/// Decoded checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub config: BTreeMap<String, String>,
    pub nodes: Vec<f64>,
    /// `(time, K, modes for xi = -K..=K)`.
    pub snapshots: Vec<(f64, usize, Vec<Vec<C64>>)>,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    kind: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IoError> {
        if self.data.len() - self.pos < n {
            return Err(IoError::Format { kind: self.kind, reason: format!("truncated at byte {}", self.pos) });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, IoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64, IoError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, IoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn count(&mut self, elem: usize) -> Result<usize, IoError> {
        let n = self.u64()? as usize;
        if n.checked_mul(elem).map_or(true, |b| b > self.data.len() - self.pos) {
            return Err(IoError::Format { kind: self.kind, reason: format!("count {n} exceeds file size") });
        }
        Ok(n)
    }

    fn magic(&mut self, m: &[u8; 4]) -> Result<(), IoError> {
        if self.take(4)? != m {
            return Err(IoError::Format { kind: self.kind, reason: "bad magic".into() });
        }
        Ok(())
    }
}

pub fn decode_checkpoint(data: &[u8]) -> Result<Checkpoint, IoError> {
    let mut r = Reader { data, pos: 0, kind: "checkpoint" };
    r.magic(CHECKPOINT_MAGIC)?;
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(IoError::Format { kind: "checkpoint", reason: format!("unsupported version {version}") });
    }
    let len = r.u32()? as usize;
    let block = std::str::from_utf8(r.take(len)?)
        .map_err(|e| IoError::Format { kind: "checkpoint", reason: e.to_string() })?;
    let mut config = BTreeMap::new();
    for line in block.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| IoError::Format { kind: "checkpoint", reason: format!("bad config line `{line}`") })?;
        config.insert(k.to_string(), v.to_string());
    }
    let n = r.count(8)?;
    let nodes = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let count = r.count(12)?;
    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let time = r.f64()?;
        let k = r.u32()? as usize;
        let mut modes = Vec::with_capacity(2 * k + 1);
        for _ in 0..2 * k + 1 {
            let vals = (0..n).map(|_| Ok(C64::new(r.f64()?, r.f64()?))).collect::<Result<Vec<_>, IoError>>()?;
            modes.push(vals);
        }
        snapshots.push((time, k, modes));
    }
    if r.pos != data.len() {
        return Err(IoError::Format { kind: "checkpoint", reason: format!("{} trailing bytes", data.len() - r.pos) });
    }
    Ok(Checkpoint { version, config, nodes, snapshots })
}

impl Checkpoint {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, IoError> {
        self.config
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| IoError::Format { kind: "checkpoint", reason: format!("missing or invalid `{key}`") })
    }

    pub fn run_config(&self) -> Result<RunConfig, IoError> {
        Ok(RunConfig {
            nu: self.get("nu")?,
            mu0: self.get("mu0")?,
            gamma: self.get("gamma")?,
            eps0: self.get("eps0")?,
            alpha: self.get("alpha")?,
            theta0: self.get("theta0")?,
            k: self.get("k")?,
            dt: self.get("dt")?,
            t_final: self.get("t_final")?,
            ny: self.get("ny")?,
            ymax: self.get("ymax")?,
            quad_order: self.get("quad_order")?,
            snapshot_every: self.get("snapshot_every")?,
        })
    }

    /// Rebuilds the grid and checks it reproduces the stored nodes exactly.
    pub fn grid(&self) -> Result<YGrid, IoError> {
        let g = make_grid(self.nodes.len(), self.get("ymax")?, self.get("grid_nu")?)?;
        if g.nodes != self.nodes {
            return Err(IoError::Format { kind: "checkpoint", reason: "stored nodes do not match the rebuilt grid".into() });
        }
        Ok(g)
    }

    pub fn states(&self) -> Result<Vec<VorticityState>, IoError> {
        let grid = Arc::new(self.grid()?);
        Ok(self
            .snapshots
            .iter()
            .map(|(time, k, modes)| {
                let k = *k as i64;
                let modes = modes
                    .iter()
                    .zip(-k..=k)
                    .map(|(v, xi)| ModeField { xi, values: v.clone(), grid: grid.clone() })
                    .collect();
                VorticityState { k: k as usize, grid: grid.clone(), modes, time: *time }
            })
            .collect())
    }
}

pub fn encode_kernel(k: &KernelMatrix) -> Vec<u8> {
    let n = k.grid.len();
    let mut out = Vec::with_capacity(40 + 8 * n * n);
    out.extend_from_slice(KERNEL_MAGIC);
    out.extend_from_slice(&KERNEL_VERSION.to_le_bytes());
    out.extend_from_slice(&k.xi.to_le_bytes());
    out.extend_from_slice(&k.t.to_le_bytes());
    out.extend_from_slice(&k.nu.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            out.extend_from_slice(&k.entries.get(i, j).to_le_bytes());
        }
    }
    out
}

/// Decoded kernel dump: `(xi, t, nu, n, row-major entries)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDump {
    pub xi: i64,
    pub t: f64,
    pub nu: f64,
    pub n: usize,
    pub entries: Vec<f64>,
}

pub fn decode_kernel(data: &[u8]) -> Result<KernelDump, IoError> {
    let mut r = Reader { data, pos: 0, kind: "kernel dump" };
    r.magic(KERNEL_MAGIC)?;
    let version = r.u32()?;
    if version != KERNEL_VERSION {
        return Err(IoError::Format { kind: "kernel dump", reason: format!("unsupported version {version}") });
    }
    let xi = r.i64()?;
    let t = r.f64()?;
    let nu = r.f64()?;
    let n = r.u64()? as usize;
    if n.checked_mul(n).and_then(|m| m.checked_mul(8)) != Some(data.len() - r.pos) {
        return Err(IoError::Format { kind: "kernel dump", reason: format!("size does not match n = {n}") });
    }
    let entries = (0..n * n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    Ok(KernelDump { xi, t, nu, n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn bare_override_resolves_section() {
        let c = parse_config_str("", &["ny=96".into()]).unwrap();
        assert_eq!(c.numerics.ny, 96);
    }
}
