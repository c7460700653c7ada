//! On-disk formats. Codes and plans serialize to JSON with every Pauli
//! rendered as a string; dense states dump to raw little-endian float64
//! pairs beside a small JSON sidecar. Struct field order is fixed, so a
//! given artifact always serializes to the same bytes.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelError, DensityMatrix};
use crate::code::{
    CodeError, EncoderPlan, EncoderStep, GaugeBasis, NominalGaugeState, StabilizerCode,
};
use crate::pauli::{pauli_from_string, CheckMatrix, PauliError, PauliOperator};
use crate::toric::{Orientation, ToricLattice};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("malformed file: {0}")]
    Malformed(String),
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogicalsFile {
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Z")]
    pub z: Vec<String>,
}

/// Code definition file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub name: String,
    pub n: usize,
    pub stabilizers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logicals: Option<LogicalsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrections: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
}

fn render(ops: &[PauliOperator]) -> Vec<String> {
    ops.iter().map(|p| p.to_string()).collect()
}

fn parse(strings: &[String], n: usize, what: &str) -> Result<Vec<PauliOperator>, FormatError> {
    strings
        .iter()
        .map(|s| {
            let op = pauli_from_string(s)?;
            if op.n() != n {
                return Err(FormatError::Malformed(format!(
                    "{what} {s} acts on {} qubits, file declares n = {n}",
                    op.n()
                )));
            }
            Ok(op)
        })
        .collect()
}

impl CodeFile {
    pub fn from_code(code: &StabilizerCode) -> Self {
        Self {
            name: code.name().to_string(),
            n: code.n(),
            stabilizers: render(code.generators()),
            logicals: None,
            corrections: None,
            distance: code.distance(),
        }
    }

    pub fn to_code(&self) -> Result<StabilizerCode, FormatError> {
        let generators = parse(&self.stabilizers, self.n, "stabilizer")?;
        let mut code = StabilizerCode::new(&self.name, self.n, generators)?;
        if let Some(d) = self.distance {
            code = code.with_distance(d);
        }
        Ok(code)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanStepFile {
    pub stabilizer: String,
    pub correction: String,
}

/// Serialized encoder plan: the ordered measure-and-correct pairs plus
/// everything needed to reconstruct the logical frame and the basin.
/// Basin generators are strings on the r-qubit gauge register.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub code: CodeFile,
    pub steps: Vec<PlanStepFile>,
    pub logicals: LogicalsFile,
    pub upload_qubits: Vec<usize>,
    pub gauge_qubits: Vec<usize>,
    pub basin_z: Vec<String>,
    pub basin_x: Vec<String>,
    pub nominal_gauge: String,
    pub free_gauge: Vec<bool>,
    pub permutation: Vec<usize>,
    pub order_robust: bool,
}

fn basin_strings(r: usize, rows: &CheckMatrix) -> Result<Vec<String>, FormatError> {
    rows.rows()
        .iter()
        .map(|row| Ok(PauliOperator::from_check_vector(r, row)?.to_string()))
        .collect()
}

impl PlanFile {
    pub fn from_plan(plan: &EncoderPlan) -> Result<Self, FormatError> {
        let r = plan.r();
        Ok(Self {
            code: CodeFile::from_code(plan.code()),
            steps: plan
                .steps()
                .iter()
                .map(|s| PlanStepFile {
                    stabilizer: s.stabilizer.to_string(),
                    correction: s.correction.to_string(),
                })
                .collect(),
            logicals: LogicalsFile {
                x: render(plan.logical_x()),
                z: render(plan.logical_z()),
            },
            upload_qubits: plan.upload_qubits().to_vec(),
            gauge_qubits: plan.gauge_qubits().to_vec(),
            basin_z: basin_strings(r, plan.basin_rz())?,
            basin_x: basin_strings(r, plan.basin_rx())?,
            nominal_gauge: plan.nominal_gauge().pattern_string(),
            free_gauge: plan.nominal_gauge().free_flags().to_vec(),
            permutation: plan.nominal_gauge().permutation().to_vec(),
            order_robust: plan.order_robust(),
        })
    }

    pub fn to_plan(&self) -> Result<EncoderPlan, FormatError> {
        let code = self.code.to_code()?;
        let n = code.n();
        let r = code.r();
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(EncoderStep {
                    stabilizer: pauli_from_string(&s.stabilizer)?,
                    correction: pauli_from_string(&s.correction)?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let logical_x = parse(&self.logicals.x, n, "logical X")?;
        let logical_z = parse(&self.logicals.z, n, "logical Z")?;
        let basin_rz = CheckMatrix::from_paulis(r, &parse(&self.basin_z, r, "basin generator")?)?;
        let basin_rx = CheckMatrix::from_paulis(r, &parse(&self.basin_x, r, "basin generator")?)?;
        let pattern = self
            .nominal_gauge
            .chars()
            .map(|c| match c {
                '+' => Ok(GaugeBasis::Plus),
                '0' => Ok(GaugeBasis::Zero),
                other => Err(FormatError::Malformed(format!(
                    "gauge pattern symbol {other}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nominal = NominalGaugeState::from_parts(
            pattern,
            self.free_gauge.clone(),
            self.gauge_qubits.clone(),
            self.permutation.clone(),
        )?;
        Ok(EncoderPlan::from_parts(
            code,
            steps,
            logical_x,
            logical_z,
            self.upload_qubits.clone(),
            self.gauge_qubits.clone(),
            basin_rz,
            basin_rx,
            nominal,
            self.order_robust,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub index: usize,
    pub orientation: String,
    pub row: usize,
    pub col: usize,
    pub region: String,
}

/// Torus dump: every edge with its coordinates and region label, the
/// generator list, and the ordered plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    pub l: usize,
    pub edges: Vec<EdgeFile>,
    pub generators: Vec<String>,
    pub plan: PlanFile,
}

impl LatticeFile {
    pub fn new(lat: &ToricLattice, plan: &EncoderPlan) -> Result<Self, FormatError> {
        let reg = lat.regions();
        let region_of = |e: usize| -> &'static str {
            if e == reg.a1 {
                "A1"
            } else if e == reg.a2 {
                "A2"
            } else if reg.b1.contains(&e) {
                "B1"
            } else if reg.b2.contains(&e) {
                "B2"
            } else if reg.c1.contains(&e) {
                "C1"
            } else if reg.c2.contains(&e) {
                "C2"
            } else {
                "D"
            }
        };
        let edges = (0..lat.n())
            .map(|e| {
                let (orientation, row, col) = lat.edge_coords(e);
                EdgeFile {
                    index: e,
                    orientation: match orientation {
                        Orientation::Horizontal => "horizontal".to_string(),
                        Orientation::Vertical => "vertical".to_string(),
                    },
                    row,
                    col,
                    region: region_of(e).to_string(),
                }
            })
            .collect();
        Ok(Self {
            l: lat.l(),
            edges,
            generators: render(plan.code().generators()),
            plan: PlanFile::from_plan(plan)?,
        })
    }
}

/// Sidecar describing a raw state dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSidecar {
    pub n: usize,
    pub description: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Dump a density matrix: row-major entries, each one a little-endian
/// (re, im) float64 pair, with a `<path>.json` sidecar.
pub fn write_state_dump(
    path: &Path,
    rho: &DensityMatrix<f64>,
    description: &str,
) -> Result<(), FormatError> {
    let m = rho.matrix();
    let mut bytes = Vec::with_capacity(m.len() * 16);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            bytes.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    std::fs::write(path, bytes)?;
    let sidecar = StateSidecar {
        n: rho.n(),
        description: description.to_string(),
    };
    std::fs::write(sidecar_path(path), to_json(&sidecar)?)?;
    Ok(())
}

pub fn read_state_dump(path: &Path) -> Result<(DensityMatrix<f64>, StateSidecar), FormatError> {
    let sidecar: StateSidecar =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let bytes = std::fs::read(path)?;
    let d = 1usize << sidecar.n;
    if bytes.len() != d * d * 16 {
        return Err(FormatError::Malformed(format!(
            "state dump holds {} bytes, expected {} for n = {}",
            bytes.len(),
            d * d * 16,
            sidecar.n
        )));
    }
    let mut m = DMatrix::zeros(d, d);
    for (k, chunk) in bytes.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        m[(k / d, k % d)] = Complex64::new(re, im);
    }
    Ok((DensityMatrix::new(sidecar.n, m)?, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::StateVector;
    use crate::code::synthesize_plan;
    use crate::codes::builtin;
    use crate::toric::{build_toric, toric_plan};

    #[test]
    fn code_file_round_trips() {
        let code = builtin("steane7").unwrap().code;
        let file = CodeFile::from_code(&code);
        let back = file.to_code().unwrap();
        assert_eq!(back.name(), code.name());
        assert_eq!(back.generators(), code.generators());
        assert_eq!(back.distance(), code.distance());
        let json = to_json(&file).unwrap();
        let reparsed: CodeFile = serde_json::from_str(&json).unwrap();
        assert_eq!(to_json(&reparsed).unwrap(), json);
    }

    #[test]
    fn optional_code_fields_may_be_absent() {
        let file: CodeFile = serde_json::from_str(
            r#"{"name": "pair", "n": 2, "stabilizers": ["ZZ"]}"#,
        )
        .unwrap();
        let code = file.to_code().unwrap();
        assert_eq!(code.r(), 1);
        assert_eq!(code.distance(), None);
    }

    #[test]
    fn mismatched_operator_length_is_rejected() {
        let file: CodeFile = serde_json::from_str(
            r#"{"name": "bad", "n": 3, "stabilizers": ["ZZ"]}"#,
        )
        .unwrap();
        assert!(matches!(file.to_code(), Err(FormatError::Malformed(_))));
    }

    #[test]
    fn plan_file_round_trips_through_json() {
        for name in ["repetition3", "perfect5", "steane7", "shor9"] {
            let plan = synthesize_plan(&builtin(name).unwrap().code).unwrap();
            let file = PlanFile::from_plan(&plan).unwrap();
            let json = to_json(&file).unwrap();
            let reparsed: PlanFile = serde_json::from_str(&json).unwrap();
            let back = reparsed.to_plan().unwrap();
            assert_eq!(back.steps(), plan.steps(), "{name}");
            assert_eq!(back.logical_x(), plan.logical_x());
            assert_eq!(back.logical_z(), plan.logical_z());
            assert_eq!(back.upload_qubits(), plan.upload_qubits());
            assert_eq!(back.basin_rz(), plan.basin_rz());
            assert_eq!(back.basin_rx(), plan.basin_rx());
            assert_eq!(
                back.nominal_gauge().pattern_string(),
                plan.nominal_gauge().pattern_string()
            );
            assert_eq!(to_json(&PlanFile::from_plan(&back).unwrap()).unwrap(), json);
        }
    }

    #[test]
    fn lattice_file_labels_every_edge() {
        let (lat, _) = build_toric(3).unwrap();
        let plan = toric_plan(&lat).unwrap();
        let file = LatticeFile::new(&lat, &plan).unwrap();
        assert_eq!(file.edges.len(), 18);
        let count = |tag: &str| file.edges.iter().filter(|e| e.region == tag).count();
        assert_eq!(count("A1"), 1);
        assert_eq!(count("A2"), 1);
        assert_eq!(count("B1"), 2);
        assert_eq!(count("C2"), 2);
        assert_eq!(count("D"), 8);
        assert_eq!(file.generators.len(), 16);
    }

    #[test]
    fn state_dump_round_trips() {
        let dir = std::env::temp_dir().join("dissenc-format-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.bin");
        let rho = StateVector::<f64>::product(&[
            crate::channels::QubitState::Plus,
            crate::channels::QubitState::MinusI,
        ])
        .unwrap()
        .density();
        write_state_dump(&path, &rho, "two-qubit probe").unwrap();
        let (back, sidecar) = read_state_dump(&path).unwrap();
        assert_eq!(sidecar.n, 2);
        assert_eq!(sidecar.description, "two-qubit probe");
        assert!(back.max_abs_diff(&rho) == 0.0);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
