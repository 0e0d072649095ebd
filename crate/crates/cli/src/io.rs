//! Serialized artifact formats: pair-dynamics and observable files (JSON),
//! weight files (JSON), and the packed snapshot container (binary, layout
//! documented in docs/FORMATS.md).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use qrpe_core::qla::{c, CMat};
use qrpe_core::reservoir::{InputNode, PairDynamics, PairKind, PairSource, ReservoirParams};
use qrpe_core::sampling::{Snapshot, SnapshotSet};
use qrpe_core::training::{FactoredTerm, Pauli, WeightVector};

use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"QRPS";
pub const SNAPSHOT_VERSION: u16 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` pairs.
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_cmat(&self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Format(format!(
                "matrix data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let [re, im] = self.data[i * self.cols + j];
                m[(i, j)] = c(re, im);
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsJson {
    pub j: f64,
    pub p1: f64,
    pub p2: f64,
    pub e1: f64,
    pub e2: f64,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default)]
    pub alpha2: f64,
    pub t: f64,
    pub hbar: f64,
}

impl ParamsJson {
    pub fn from_params(p: &ReservoirParams) -> Self {
        Self {
            j: p.j,
            p1: p.p1,
            p2: p.p2,
            e1: p.e1,
            e2: p.e2,
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            t: p.t,
            hbar: p.hbar,
        }
    }

    pub fn to_params(&self) -> ReservoirParams {
        ReservoirParams {
            j: self.j,
            p1: self.p1,
            p2: self.p2,
            e1: self.e1,
            e2: self.e2,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            t: self.t,
            hbar: self.hbar,
        }
    }
}

/// Portable pair-dynamics container: local dimension, provenance, and the
/// effect matrices. The dynamics matrix and its inverse are rebuilt
/// deterministically from the effects on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDynamicsFile {
    pub format: String,
    pub version: u32,
    pub local_dim: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsJson>,
    pub effects: Vec<MatrixJson>,
    pub cond: f64,
}

pub fn save_pair_dynamics(pd: &PairDynamics, path: &Path) -> Result<()> {
    let (kind, params) = match pd.source() {
        PairSource::Reservoir { kind, params, .. } => (
            match kind {
                PairKind::Qubit => "qubit".to_string(),
                PairKind::Bosonic => "bosonic".to_string(),
            },
            Some(ParamsJson::from_params(params)),
        ),
        PairSource::Mixture(_) => ("mixture".to_string(), None),
        PairSource::Synthetic(label) => (format!("synthetic:{label}"), None),
    };
    let file = PairDynamicsFile {
        format: "qrpe-pair-dynamics".into(),
        version: 1,
        local_dim: pd.local_dim(),
        kind,
        params,
        effects: pd.effects().iter().map(MatrixJson::from_cmat).collect(),
        cond: pd.cond(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_pair_dynamics(path: &Path) -> Result<PairDynamics> {
    let file: PairDynamicsFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format != "qrpe-pair-dynamics" || file.version != 1 {
        return Err(Error::Format(format!(
            "unsupported pair-dynamics file: {} v{}",
            file.format, file.version
        )));
    }
    let effects = file
        .effects
        .iter()
        .map(|m| m.to_cmat())
        .collect::<Result<Vec<_>>>()?;
    let source = match (file.kind.as_str(), &file.params) {
        ("qubit", Some(p)) => PairSource::Reservoir {
            kind: PairKind::Qubit,
            params: p.to_params(),
            input_node: InputNode::First,
        },
        ("bosonic", Some(p)) => PairSource::Reservoir {
            kind: PairKind::Bosonic,
            params: p.to_params(),
            input_node: InputNode::First,
        },
        _ => PairSource::Synthetic(file.kind.clone()),
    };
    Ok(PairDynamics::from_effects(effects, source)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PauliTermJson {
    pub coeff: f64,
    pub string: String,
}

/// Observable file: a dense matrix, a Pauli-sum, or both (they must agree).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Vec<PauliTermJson>>,
}

pub fn save_observable(name: &str, dims: &[usize], matrix: &CMat, path: &Path) -> Result<()> {
    let file = ObservableFile {
        format: "qrpe-observable".into(),
        version: 1,
        name: name.into(),
        dims: dims.to_vec(),
        matrix: Some(MatrixJson::from_cmat(matrix)),
        pauli: None,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

fn pauli_from_char(ch: char) -> Result<Pauli> {
    match ch {
        'I' => Ok(Pauli::I),
        'X' => Ok(Pauli::X),
        'Y' => Ok(Pauli::Y),
        'Z' => Ok(Pauli::Z),
        other => Err(Error::Format(format!("unknown Pauli label '{other}'"))),
    }
}

pub struct LoadedObservable {
    pub name: String,
    pub dims: Vec<usize>,
    pub matrix: CMat,
}

pub fn load_observable(path: &Path) -> Result<LoadedObservable> {
    let file: ObservableFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format != "qrpe-observable" || file.version != 1 {
        return Err(Error::Format(format!(
            "unsupported observable file: {} v{}",
            file.format, file.version
        )));
    }
    let total: usize = file.dims.iter().product();
    let matrix = match (&file.matrix, &file.pauli) {
        (Some(m), _) => m.to_cmat()?,
        (None, Some(terms)) => {
            if file.dims.iter().any(|&d| d != 2) {
                return Err(Error::Format(
                    "pauli-sum observables require qubit dims".into(),
                ));
            }
            let n = file.dims.len();
            let mut acc = CMat::zeros(total, total);
            for term in terms {
                if term.string.len() != n {
                    return Err(Error::Format(format!(
                        "pauli string '{}' does not match {} qubits",
                        term.string, n
                    )));
                }
                let mut m = qrpe_core::qla::identity(1);
                for ch in term.string.chars() {
                    m = qrpe_core::qla::kron(&m, &pauli_from_char(ch)?.matrix());
                }
                acc += m.scale(term.coeff);
            }
            acc
        }
        (None, None) => {
            return Err(Error::Format(
                "observable file needs a matrix or a pauli sum".into(),
            ))
        }
    };
    if matrix.nrows() != total {
        return Err(Error::Format(format!(
            "observable matrix is {}x{} but dims {:?} give {total}",
            matrix.nrows(),
            matrix.ncols(),
            file.dims
        )));
    }
    Ok(LoadedObservable {
        name: file.name,
        dims: file.dims,
        matrix,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactoredTermJson {
    pub coeff: f64,
    /// One entry per (copy, subsystem) slot; `null` marks identity slots.
    pub rows: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    pub copies: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factored: Option<Vec<FactoredTermJson>>,
}

pub fn save_weights(w: &WeightVector, path: &Path) -> Result<()> {
    let file = match w {
        WeightVector::Dense { dims, copies, w } => WeightsFile {
            format: "qrpe-weights".into(),
            version: 1,
            dims: dims.clone(),
            copies: *copies,
            dense: Some(w.clone()),
            factored: None,
        },
        WeightVector::Factored {
            dims,
            copies,
            terms,
        } => WeightsFile {
            format: "qrpe-weights".into(),
            version: 1,
            dims: dims.clone(),
            copies: *copies,
            dense: None,
            factored: Some(
                terms
                    .iter()
                    .map(|t| FactoredTermJson {
                        coeff: t.coeff,
                        rows: t.rows.clone(),
                    })
                    .collect(),
            ),
        },
    };
    fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<WeightVector> {
    let file: WeightsFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format != "qrpe-weights" || file.version != 1 {
        return Err(Error::Format(format!(
            "unsupported weights file: {} v{}",
            file.format, file.version
        )));
    }
    match (file.dense, file.factored) {
        (Some(w), None) => Ok(WeightVector::Dense {
            dims: file.dims,
            copies: file.copies,
            w,
        }),
        (None, Some(terms)) => Ok(WeightVector::Factored {
            dims: file.dims,
            copies: file.copies,
            terms: terms
                .into_iter()
                .map(|t| FactoredTerm {
                    coeff: t.coeff,
                    rows: t.rows,
                })
                .collect(),
        }),
        _ => Err(Error::Format(
            "weights file needs exactly one of dense or factored".into(),
        )),
    }
}

fn bits_per_subsystem(d: usize) -> u32 {
    let outcomes = (d * d) as u32;
    u32::BITS - (outcomes - 1).leading_zeros()
}

/// Writes the packed snapshot container (see docs/FORMATS.md for the exact
/// byte layout).
pub fn save_snapshots(ss: &SnapshotSet, path: &Path) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(ss.dims.len() as u16).to_le_bytes());
    for &d in &ss.dims {
        out.extend_from_slice(&(d as u16).to_le_bytes());
    }
    out.extend_from_slice(&ss.seed.to_le_bytes());
    out.extend_from_slice(&(ss.len() as u64).to_le_bytes());
    let source = ss.source.as_bytes();
    out.extend_from_slice(&(source.len() as u32).to_le_bytes());
    out.extend_from_slice(source);

    let bits: Vec<u32> = ss.dims.iter().map(|&d| bits_per_subsystem(d)).collect();
    let mut acc: u64 = 0;
    let mut filled: u32 = 0;
    for s in ss.snapshots() {
        for (j, &x) in s.outcomes.iter().enumerate() {
            acc |= (x as u64) << filled;
            filled += bits[j];
            while filled >= 8 {
                out.push((acc & 0xff) as u8);
                acc >>= 8;
                filled -= 8;
            }
        }
    }
    if filled > 0 {
        out.push((acc & 0xff) as u8);
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

pub fn load_snapshots(path: &Path) -> Result<SnapshotSet> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > buf.len() {
            return Err(Error::Format("snapshot file truncated".into()));
        }
        let slice = &buf[*pos..*pos + n];
        *pos += n;
        Ok(slice)
    };
    if take(&mut pos, 4)? != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let version = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n_sub = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap()) as usize;
    let mut dims = Vec::with_capacity(n_sub);
    for _ in 0..n_sub {
        dims.push(u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap()) as usize);
    }
    let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let source_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let source = String::from_utf8(take(&mut pos, source_len)?.to_vec())
        .map_err(|_| Error::Format("snapshot source is not UTF-8".into()))?;

    let bits: Vec<u32> = dims.iter().map(|&d| bits_per_subsystem(d)).collect();
    let mut acc: u64 = 0;
    let mut filled: u32 = 0;
    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let mut outcomes = Vec::with_capacity(n_sub);
        for (j, &d) in dims.iter().enumerate() {
            while filled < bits[j] {
                let byte = take(&mut pos, 1)?[0];
                acc |= (byte as u64) << filled;
                filled += 8;
            }
            let mask = (1u64 << bits[j]) - 1;
            let x = (acc & mask) as u16;
            if (x as usize) >= d * d {
                return Err(Error::Format(format!(
                    "snapshot outcome {x} out of range for local dim {d}"
                )));
            }
            acc >>= bits[j];
            filled -= bits[j];
            outcomes.push(x);
        }
        snapshots.push(Snapshot { outcomes });
    }
    Ok(SnapshotSet::new(dims, seed, source, snapshots))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub format: String,
    pub version: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub m_obs: usize,
    pub f_max: f64,
    pub quadratic: bool,
    pub n_sample: usize,
    pub k_batches: usize,
    pub batch_size: usize,
}
