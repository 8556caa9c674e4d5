//! Grid sweeps producing `(eigenvalues → parameters)` samples, plus
//! shuffling, splitting and CSV persistence with a checksummed manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sturm::{sample_potential, sl_eigenvalues, RobinBc, SymmetricPotential};
use crate::transmission::{galerkin_eigenvalues, LayeredIndex};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Sl,
    Te2,
    Te4,
}

/// Inclusive range `min, min + step, ..., max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let axis = Self { min, max, step };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidGrid(format!("step {} must be positive", self.step)));
        }
        if !(self.min <= self.max) {
            return Err(Error::InvalidGrid(format!("min {} exceeds max {}", self.min, self.max)));
        }
        Ok(())
    }

    /// `round((max - min) / step) + 1`.
    pub fn count(&self) -> usize {
        ((self.max - self.min) / self.step).round() as usize + 1
    }

    /// Grid point `i`, rounded to 12 decimals so that e.g. `2 + 3·0.1` prints as `2.3`.
    pub fn value(&self, i: usize) -> f64 {
        ((self.min + i as f64 * self.step) * 1e12).round() / 1e12
    }
}

/// A parameter sweep together with the solver settings used to label it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: ProblemKind,
    /// `b` for sl; `n_1, n_2, d_1` for te2; `n_1..n_4` for te4.
    pub axes: Vec<Axis>,
    /// Number of eigenvalues per sample.
    pub eigs: usize,
    /// Galerkin basis size (te only).
    pub n_r: usize,
    /// Largest angular order (te only).
    pub m_max: u32,
    /// Fixed jump radii (te4 only).
    pub jumps: Vec<f64>,
}

impl GridSpec {
    pub fn sl(b: Axis) -> Self {
        Self {
            kind: ProblemKind::Sl,
            axes: vec![b],
            eigs: 5,
            n_r: 0,
            m_max: 0,
            jumps: Vec::new(),
        }
    }

    /// `b ∈ [-20, 20]` step 0.04: 1001 samples.
    pub fn sl_default() -> Self {
        Self::sl(Axis { min: -20.0, max: 20.0, step: 0.04 })
    }

    /// Step 0.4: 101 samples.
    pub fn sl_desk() -> Self {
        Self::sl(Axis { min: -20.0, max: 20.0, step: 0.4 })
    }

    pub fn te2(n_step: f64, d_step: f64) -> Self {
        let n = Axis { min: 2.0, max: 10.0, step: n_step };
        Self {
            kind: ProblemKind::Te2,
            axes: vec![n, n, Axis { min: 0.1, max: 0.9, step: d_step }],
            eigs: 6,
            n_r: 12,
            m_max: 5,
            jumps: Vec::new(),
        }
    }

    /// 81·81·9 = 59049 samples.
    pub fn te2_default() -> Self {
        Self::te2(0.1, 0.1)
    }

    /// 41·41·9 = 15129 samples.
    pub fn te2_desk() -> Self {
        Self::te2(0.2, 0.1)
    }

    pub fn te4(n_step: f64) -> Self {
        let n = Axis { min: 2.0, max: 10.0, step: n_step };
        Self {
            kind: ProblemKind::Te4,
            axes: vec![n; 4],
            eigs: 6,
            n_r: 12,
            m_max: 5,
            jumps: vec![0.25, 0.5, 0.75],
        }
    }

    /// 33⁴ = 1185921 samples.
    pub fn te4_default() -> Self {
        Self::te4(0.25)
    }

    /// 17⁴ = 83521 samples.
    pub fn te4_desk() -> Self {
        Self::te4(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        let want = match self.kind {
            ProblemKind::Sl => 1,
            ProblemKind::Te2 => 3,
            ProblemKind::Te4 => 4,
        };
        if self.axes.len() != want {
            return Err(Error::InvalidGrid(format!("{:?} needs {want} axes, got {}", self.kind, self.axes.len())));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.eigs == 0 {
            return Err(Error::InvalidGrid("eigenvalue count must be positive".into()));
        }
        if self.kind == ProblemKind::Te4 && self.jumps.len() != 3 {
            return Err(Error::InvalidGrid("te4 needs three jump radii".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.axes.iter().map(Axis::count).product()
    }

    /// Parameter tuple of grid point `flat`, last axis fastest.
    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let c = axis.count();
            *slot = axis.value(flat % c);
            flat /= c;
        }
        out
    }

    pub fn target_count(&self) -> usize {
        match self.kind {
            ProblemKind::Sl => crate::sturm::SAMPLE_POINTS,
            ProblemKind::Te2 => 3,
            ProblemKind::Te4 => 4,
        }
    }
}

/// Feature rows (ascending eigenvalues) and target rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows vs {} target rows",
                features.len(),
                targets.len()
            )));
        }
        let data = Self { features, targets };
        for (name, rows) in [("feature", &data.features), ("target", &data.targets)] {
            if let Some(first) = rows.first() {
                if rows.iter().any(|r| r.len() != first.len()) {
                    return Err(Error::Dimension(format!("ragged {name} rows")));
                }
            }
        }
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn n_targets(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            features: rows.iter().map(|&i| self.features[i].clone()).collect(),
            targets: rows.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }

    /// CSV text: header `k1..kF,t1..tM`, shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = (1..=self.n_features())
            .map(|i| format!("k{i}"))
            .chain((1..=self.n_targets()).map(|i| format!("t{i}")))
            .collect();
        let mut record = csv::StringRecord::new();
        let result = w.write_record(&header).and_then(|_| {
            for (f, t) in self.features.iter().zip(&self.targets) {
                record.clear();
                for v in f.iter().chain(t) {
                    record.push_field(&v.to_string());
                }
                w.write_record(&record)?;
            }
            Ok(())
        });
        result.expect("writing to memory cannot fail");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Format(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if names.is_empty() || names == [""] {
            return Err(Error::Empty("data file"));
        }
        let n_features = names.iter().take_while(|n| n.starts_with('k')).count();
        if n_features == 0 || names[n_features..].iter().any(|n| !n.starts_with('t')) {
            return Err(Error::Format(format!("header must be k1..kF,t1..tM, got `{}`", names.join(","))));
        }
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            if record.len() != names.len() {
                return Err(Error::Parse {
                    row,
                    column: record.len().min(names.len()) + 1,
                    message: format!("expected {} columns, found {}", names.len(), record.len()),
                });
            }
            let mut values = Vec::with_capacity(record.len());
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("`{cell}` is not a number"),
                })?;
                values.push(v);
            }
            targets.push(values.split_off(n_features));
            features.push(values);
        }
        Self::new(features, targets)
    }
}

/// Reproducibility record stored next to a data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub spec: Option<GridSpec>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
    pub solver_version: String,
    pub samples: usize,
    pub skipped: usize,
    /// SHA-256 of the data file, hex.
    pub checksum: String,
}

impl DatasetManifest {
    pub fn new(spec: Option<GridSpec>, skipped: usize) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            spec,
            seed: None,
            generated_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            solver_version: env!("CARGO_PKG_VERSION").to_string(),
            samples: 0,
            skipped,
            checksum: String::new(),
        }
    }
}

/// Result of a sweep: the samples and how many grid points were skipped.
#[derive(Debug, Clone)]
pub struct Generated {
    pub data: Dataset,
    pub skipped: usize,
}

impl Generated {
    pub fn manifest(&self, spec: &GridSpec) -> DatasetManifest {
        DatasetManifest::new(Some(spec.clone()), self.skipped)
    }
}

fn check_increasing(features: &[f64], point: &[f64]) -> Result<()> {
    if features.windows(2).any(|w| !(w[1] > w[0])) || features.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFault(format!(
            "eigenvalues {features:?} at {point:?} are not strictly increasing"
        )));
    }
    Ok(())
}

/// Runs `label` on every grid point in parallel, keeping grid order.
fn sweep<F>(spec: &GridSpec, label: F) -> Result<Generated>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    spec.validate()?;
    let rows: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..spec.sample_count())
        .into_par_iter()
        .map(|i| {
            let point = spec.point(i);
            match label(&point) {
                Ok((f, t)) => {
                    check_increasing(&f, &point)?;
                    Ok(Some((f, t)))
                }
                Err(e) => {
                    log::warn!("skipping grid point {point:?}: {e}");
                    Ok(None)
                }
            }
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let (features, targets) = rows.into_iter().flatten().unzip();
    Ok(Generated {
        data: Dataset::new(features, targets)?,
        skipped,
    })
}

/// Lowest Neumann eigenvalues against the sampled potential, one row per `b`.
pub fn generate_sl(spec: &GridSpec) -> Result<Generated> {
    if spec.kind != ProblemKind::Sl {
        return Err(Error::InvalidGrid(format!("expected an sl grid, got {:?}", spec.kind)));
    }
    sweep(spec, |p| {
        let q = SymmetricPotential::new(p[0]);
        let eigs = sl_eigenvalues(&q, RobinBc::NEUMANN, spec.eigs)?.eigenvalues;
        Ok((eigs, sample_potential(&q).to_vec()))
    })
}

/// Lowest Galerkin transmission eigenvalues against the index parameters.
pub fn generate_te(spec: &GridSpec) -> Result<Generated> {
    let index_of = |p: &[f64]| -> Result<LayeredIndex> {
        match spec.kind {
            ProblemKind::Te2 => LayeredIndex::new(vec![p[0], p[1]], vec![p[2]]),
            ProblemKind::Te4 => LayeredIndex::new(p.to_vec(), spec.jumps.clone()),
            ProblemKind::Sl => Err(Error::InvalidGrid("expected a te grid, got Sl".into())),
        }
    };
    if spec.kind == ProblemKind::Sl {
        index_of(&[])?;
    }
    sweep(spec, |p| {
        let index = index_of(p)?;
        let eigs = galerkin_eigenvalues(&index, spec.m_max, spec.n_r, spec.eigs)?.values();
        Ok((eigs, p.to_vec()))
    })
}

pub fn generate(spec: &GridSpec) -> Result<Generated> {
    match spec.kind {
        ProblemKind::Sl => generate_sl(spec),
        _ => generate_te(spec),
    }
}

/// Seeded Fisher–Yates shuffle; the first `⌈fraction·N⌉` rows train.
pub fn shuffle_split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((train_fraction * data.len() as f64 - 1e-9).ceil() as usize).min(data.len());
    Ok((data.subset(&order[..n_train]), data.subset(&order[n_train..])))
}

/// `data.csv` → `data.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the CSV file and its manifest (checksum and sample count filled in).
pub fn save(data: &Dataset, path: &Path, manifest: &DatasetManifest) -> Result<DatasetManifest> {
    let text = data.to_csv();
    fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    let mut manifest = manifest.clone();
    manifest.samples = data.len();
    manifest.checksum = sha256_hex(text.as_bytes());
    let mpath = manifest_path(path);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;
    Ok(manifest)
}

/// Loads a CSV file, verifying it against its manifest when one exists.
pub fn load(path: &Path) -> Result<(Dataset, Option<DatasetManifest>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mpath = manifest_path(path);
    let manifest = if mpath.exists() {
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", mpath.display())))?;
        if manifest.format_version != MANIFEST_VERSION {
            return Err(Error::Format(format!("unknown manifest version {}", manifest.format_version)));
        }
        let actual = sha256_hex(&bytes);
        if actual != manifest.checksum {
            return Err(Error::Integrity(format!(
                "{} has checksum {actual}, manifest records {}",
                path.display(),
                manifest.checksum
            )));
        }
        Some(manifest)
    } else {
        None
    };
    let text = String::from_utf8(bytes).map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
    Ok((Dataset::from_csv(&text)?, manifest))
}
