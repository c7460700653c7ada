//! Built-in example codes together with their published logical operators,
//! correction operators, and basin generators. The test suite pins synthesis
//! output against these, and the CLI resolves them by name.

use crate::code::{CodeError, StabilizerCode};
use crate::pauli::{pauli_from_string, PauliOperator};

/// A code bundled with known-good companion operators. The basin generators
/// are given on the r-qubit gauge register, one Z-type and one X-type row
/// per logical qubit. Corrections pair with the standard-form generators
/// (for the repetition code those are {ZZI, ZIZ}, not the raw input list).
#[derive(Debug, Clone)]
pub struct BuiltinCode {
    pub code: StabilizerCode,
    pub logical_x: Vec<PauliOperator>,
    pub logical_z: Vec<PauliOperator>,
    pub corrections: Vec<PauliOperator>,
    pub basin_rz: Vec<PauliOperator>,
    pub basin_rx: Vec<PauliOperator>,
    pub basin_log2_dimension: usize,
    pub nominal_gauge_pattern: &'static str,
}

fn parse(strings: &[&str]) -> Vec<PauliOperator> {
    strings
        .iter()
        .map(|s| pauli_from_string(s).expect("built-in Pauli strings are well formed"))
        .collect()
}

fn build(
    name: &str,
    n: usize,
    distance: usize,
    stabilizers: &[&str],
    logical_x: &[&str],
    logical_z: &[&str],
    corrections: &[&str],
    basin_rz: &[&str],
    basin_rx: &[&str],
    basin_log2_dimension: usize,
    nominal_gauge_pattern: &'static str,
) -> Result<BuiltinCode, CodeError> {
    let code = StabilizerCode::new(name, n, parse(stabilizers))?.with_distance(distance);
    Ok(BuiltinCode {
        code,
        logical_x: parse(logical_x),
        logical_z: parse(logical_z),
        corrections: parse(corrections),
        basin_rz: parse(basin_rz),
        basin_rx: parse(basin_rx),
        basin_log2_dimension,
        nominal_gauge_pattern,
    })
}

/// Three-qubit repetition code (bit-flip code), one logical qubit.
pub fn repetition3() -> BuiltinCode {
    build(
        "repetition3",
        3,
        1,
        &["ZZI", "IZZ"],
        &["XXX"],
        &["ZII"],
        &["IXI", "IIX"],
        &["II"],
        &["XX"],
        1,
        "++",
    )
    .expect("repetition code data is consistent")
}

/// Shor's nine-qubit code, distance 3.
pub fn shor9() -> BuiltinCode {
    build(
        "shor9",
        9,
        3,
        &[
            "XXXIIXXXI",
            "XIIXXXXIX",
            "IZIIIIIZI",
            "IIZIIIIZI",
            "IIIZIIIIZ",
            "IIIIZIIIZ",
            "ZIIIIZIII",
            "ZIIIIIZII",
        ],
        &["XIIIIXXII"],
        &["ZIIIIIIZZ"],
        &[
            "IZIIIIIII",
            "IIIZIIIII",
            "IXIIIIIII",
            "IIXIIIIII",
            "IIIXIIIII",
            "IIIIXIIII",
            "IIIIIXIII",
            "IIIIIIXII",
        ],
        &["IIIIIIZZ"],
        &["IIIIXXII"],
        6,
        "++++++00",
    )
    .expect("Shor code data is consistent")
}

/// Steane's seven-qubit code, distance 3.
pub fn steane7() -> BuiltinCode {
    build(
        "steane7",
        7,
        3,
        &[
            "XIXXXII",
            "XXIXIXI",
            "IXXXIIX",
            "ZZIIZIZ",
            "ZIZIIZZ",
            "IIIZZZZ",
        ],
        &["XXXIIII"],
        &["ZIIIZZI"],
        &[
            "ZIZZIII",
            "ZZIZIII",
            "IZZZIII",
            "IXIIIII",
            "IIXIIII",
            "IIIXIII",
        ],
        &["IIIZZI"],
        &["XXIIII"],
        4,
        "+++000",
    )
    .expect("Steane code data is consistent")
}

/// The five-qubit perfect code, distance 3.
pub fn perfect5() -> BuiltinCode {
    build(
        "perfect5",
        5,
        3,
        &["YYZIZ", "XIXZZ", "XZZXI", "YZIZY"],
        &["XZIIZ"],
        &["ZZZZZ"],
        &["ZIXIX", "YIXXX", "YXXXI", "ZXIXI"],
        &["ZZZZ"],
        &["ZIIZ"],
        2,
        "0000",
    )
    .expect("five-qubit code data is consistent")
}

pub const BUILTIN_NAMES: [&str; 4] = ["repetition3", "shor9", "steane7", "perfect5"];

/// Look up a built-in code by name.
pub fn builtin(name: &str) -> Option<BuiltinCode> {
    match name {
        "repetition3" => Some(repetition3()),
        "shor9" => Some(shor9()),
        "steane7" => Some(steane7()),
        "perfect5" => Some(perfect5()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::validate_code;

    fn all() -> Vec<BuiltinCode> {
        BUILTIN_NAMES
            .iter()
            .map(|n| builtin(n).unwrap())
            .collect()
    }

    #[test]
    fn builtins_are_valid_codes() {
        for b in all() {
            let report = validate_code(&b.code);
            assert!(report.overall(), "{}: {}", b.code.name(), report.failure_summary());
            assert_eq!(b.logical_x.len(), b.code.m());
            assert_eq!(b.corrections.len(), b.code.r());
        }
    }

    #[test]
    fn listed_logicals_satisfy_commutation_relations() {
        for b in all() {
            for lx in &b.logical_x {
                for g in b.code.generators() {
                    assert!(lx.commutes_with(g).unwrap());
                }
            }
            for lz in &b.logical_z {
                for g in b.code.generators() {
                    assert!(lz.commutes_with(g).unwrap());
                }
            }
            for (i, lz) in b.logical_z.iter().enumerate() {
                for (j, lx) in b.logical_x.iter().enumerate() {
                    assert_eq!(!lz.commutes_with(lx).unwrap(), i == j);
                }
            }
        }
    }

    #[test]
    fn listed_corrections_satisfy_commutation_relations() {
        for b in all() {
            let sf = crate::code::standard_form(&b.code).unwrap();
            for (i, c) in b.corrections.iter().enumerate() {
                for (j, g) in sf.transformed_generators().iter().enumerate() {
                    assert_eq!(
                        !c.commutes_with(g).unwrap(),
                        i == j,
                        "{} correction {i} against generator {j}",
                        b.code.name()
                    );
                }
                for l in b.logical_x.iter().chain(&b.logical_z) {
                    assert!(c.commutes_with(l).unwrap());
                }
            }
        }
    }

    #[test]
    fn unknown_builtin_is_none() {
        assert!(builtin("nonesuch").is_none());
    }
}
