//! Sign-tracked stabilizer-state simulation of the measure-and-correct
//! maps, for codes too large to hold as dense matrices. A pure stabilizer
//! state on n qubits is stored as n independent commuting Hermitian Pauli
//! generators with explicit ±1 signs; measurements, corrections and
//! expectation readout all stay inside the group algebra, so every number
//! reported here is exact.

use std::collections::HashMap;

use crate::code::EncoderStep;
use crate::gf2::{gf2_solve, BitMatrix, Gf2Error};
use crate::pauli::{PauliError, PauliLetter, PauliOperator};
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableauError {
    #[error("invalid qubit symbol {0:?}; expected one of 0, 1, +, -")]
    InvalidSymbol(char),
    #[error("operator acts on {found} qubits, the tableau has {expected}")]
    Size { expected: usize, found: usize },
    #[error("operator {0} is not a sign-definite Hermitian Pauli")]
    NotHermitian(String),
    #[error("measured operator {0} must carry a +1 sign")]
    NotPlusSigned(String),
    #[error("forced outcome {forced:+} is impossible; the state fixes {actual:+}")]
    ForcedImpossible { forced: i8, actual: i8 },
    #[error("correction {correction} commutes with stabilizer {stabilizer}")]
    CommutingCorrection {
        stabilizer: PauliOperator,
        correction: PauliOperator,
    },
    #[error("upload specification has {found} symbols for {expected} logical qubits")]
    UploadLength { expected: usize, found: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// A pure stabilizer state, plus the observables whose expectations the
/// caller wants reported alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerTableau {
    n: usize,
    state_generators: Vec<PauliOperator>,
    tracked_observables: Vec<PauliOperator>,
}

impl StabilizerTableau {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn state_generators(&self) -> &[PauliOperator] {
        &self.state_generators
    }

    pub fn tracked_observables(&self) -> &[PauliOperator] {
        &self.tracked_observables
    }

    pub fn with_tracked_observables(
        mut self,
        observables: Vec<PauliOperator>,
    ) -> Result<Self, TableauError> {
        for op in &observables {
            self.check_size(op)?;
        }
        self.tracked_observables = observables;
        Ok(self)
    }

    fn check_size(&self, op: &PauliOperator) -> Result<(), TableauError> {
        if op.n() != self.n {
            return Err(TableauError::Size {
                expected: self.n,
                found: op.n(),
            });
        }
        Ok(())
    }

    /// Measure a +1-signed Hermitian Pauli. When the outcome is fixed by
    /// the state the update is trivial and the flag reports determinism;
    /// otherwise both outcomes have probability 1/2 and `forced_outcome`
    /// selects the branch to follow (+1 when absent), which is what
    /// exhaustive branch enumeration needs.
    pub fn measure_pauli(
        &self,
        s: &PauliOperator,
        forced_outcome: Option<i8>,
    ) -> Result<(i8, StabilizerTableau, bool), TableauError> {
        self.check_size(s)?;
        if !s.is_plus_signed() {
            return Err(TableauError::NotPlusSigned(s.to_string()));
        }
        let anticommuting: Vec<usize> = self
            .state_generators
            .iter()
            .enumerate()
            .filter_map(|(i, g)| (!g.commutes_with(s).expect("sizes checked")).then_some(i))
            .collect();

        if anticommuting.is_empty() {
            let outcome = self.definite_sign(s)?.expect(
                "a Pauli commuting with a full stabilizer group lies in it up to sign",
            );
            if let Some(forced) = forced_outcome {
                if forced != outcome {
                    return Err(TableauError::ForcedImpossible {
                        forced,
                        actual: outcome,
                    });
                }
            }
            return Ok((outcome, self.clone(), true));
        }

        let outcome = forced_outcome.unwrap_or(1);
        let pivot = anticommuting[0];
        let pivot_op = self.state_generators[pivot].clone();
        let mut generators = self.state_generators.clone();
        for &i in &anticommuting[1..] {
            generators[i] = generators[i].multiply(&pivot_op)?;
        }
        generators[pivot] = if outcome == 1 { s.clone() } else { s.negated() };
        Ok((
            outcome,
            StabilizerTableau {
                n: self.n,
                state_generators: generators,
                tracked_observables: self.tracked_observables.clone(),
            },
            false,
        ))
    }

    /// One measure-and-correct map: measure the stabilizer and conjugate
    /// the −1 branch by the correction, which must anticommute with it.
    /// Every returned tableau stabilizes the measured operator with sign
    /// +1.
    pub fn apply_encoding_map(
        &self,
        stabilizer: &PauliOperator,
        correction: &PauliOperator,
    ) -> Result<Vec<(f64, StabilizerTableau)>, TableauError> {
        self.check_size(correction)?;
        if correction.commutes_with(stabilizer)? {
            return Err(TableauError::CommutingCorrection {
                stabilizer: stabilizer.clone(),
                correction: correction.clone(),
            });
        }
        let (outcome, plus, deterministic) = self.measure_pauli(stabilizer, None)?;
        if deterministic {
            let leaf = if outcome == 1 {
                plus
            } else {
                plus.conjugate_by(correction)?
            };
            return Ok(vec![(1.0, leaf)]);
        }
        let (_, minus, _) = self.measure_pauli(stabilizer, Some(-1))?;
        Ok(vec![
            (0.5, plus),
            (0.5, minus.conjugate_by(correction)?),
        ])
    }

    /// Conjugation by a Pauli unitary: generators anticommuting with it
    /// flip sign, everything else is untouched.
    pub fn conjugate_by(&self, c: &PauliOperator) -> Result<StabilizerTableau, TableauError> {
        self.check_size(c)?;
        let state_generators = self
            .state_generators
            .iter()
            .map(|g| {
                if g.commutes_with(c).expect("sizes checked") {
                    g.clone()
                } else {
                    g.negated()
                }
            })
            .collect();
        Ok(StabilizerTableau {
            n: self.n,
            state_generators,
            tracked_observables: self.tracked_observables.clone(),
        })
    }

    /// Expectation of a Hermitian Pauli in the stabilizer state: ±1 when
    /// ±P lies in the group, 0 otherwise (the outcome is then unbiased).
    pub fn expectation(&self, p: &PauliOperator) -> Result<i8, TableauError> {
        self.check_size(p)?;
        if !p.is_hermitian() {
            return Err(TableauError::NotHermitian(p.to_string()));
        }
        if self
            .state_generators
            .iter()
            .any(|g| !g.commutes_with(p).expect("sizes checked"))
        {
            return Ok(0);
        }
        let sign = self.definite_sign(p)?.expect(
            "a Pauli commuting with a full stabilizer group lies in it up to sign",
        );
        Ok(sign)
    }

    /// Expectations of all tracked observables, in order.
    pub fn tracked_expectations(&self) -> Result<Vec<i8>, TableauError> {
        self.tracked_observables
            .iter()
            .map(|p| self.expectation(p))
            .collect()
    }

    // Sign of p relative to the group: Some(+1) if the generator product
    // with p's letters equals p, Some(-1) if it equals -p, None if the
    // letters are not in the span.
    fn definite_sign(&self, p: &PauliOperator) -> Result<Option<i8>, TableauError> {
        let rows: Vec<_> = self
            .state_generators
            .iter()
            .map(|g| g.check_vector())
            .collect();
        let matrix = BitMatrix::from_rows(rows, 2 * self.n)?;
        let combo = match gf2_solve(&matrix.transpose(), &p.check_vector()) {
            Ok(combo) => combo,
            Err(_) => return Ok(None),
        };
        let mut product = PauliOperator::identity(self.n);
        for i in combo.iter_ones() {
            product = product.multiply(&self.state_generators[i])?;
        }
        debug_assert_eq!(product.check_vector(), p.check_vector());
        let delta = (product.coefficient_exponent() + 4 - p.coefficient_exponent()) % 4;
        match delta {
            0 => Ok(Some(1)),
            2 => Ok(Some(-1)),
            _ => Err(TableauError::NotHermitian(p.to_string())),
        }
    }

    /// Canonical generator list: signed reduced row echelon form of the
    /// check matrix, with row operations carried out as operator products
    /// so the signs come along. Two tableaus describe the same state
    /// exactly when their canonical generators match.
    pub fn canonical_generators(&self) -> Vec<PauliOperator> {
        let mut rows = self.state_generators.clone();
        let mut vectors: Vec<_> = rows.iter().map(|g| g.check_vector()).collect();
        let mut rank = 0;
        for col in 0..2 * self.n {
            let Some(pivot) = (rank..rows.len()).find(|&i| vectors[i].get(col)) else {
                continue;
            };
            rows.swap(rank, pivot);
            vectors.swap(rank, pivot);
            let pivot_op = rows[rank].clone();
            let pivot_vec = vectors[rank].clone();
            for i in 0..rows.len() {
                if i != rank && vectors[i].get(col) {
                    rows[i] = rows[i].multiply(&pivot_op).expect("equal sizes");
                    vectors[i].xor_assign(&pivot_vec);
                }
            }
            rank += 1;
        }
        rows
    }

    fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(self.n * (self.n / 4 + 2));
        for g in self.canonical_generators() {
            let cv = g.check_vector();
            let mut byte = 0u8;
            for i in 0..cv.len() {
                byte = byte << 1 | cv.get(i) as u8;
                if i % 8 == 7 {
                    key.push(byte);
                    byte = 0;
                }
            }
            key.push(byte);
            key.push(g.coefficient_exponent());
        }
        key
    }

    /// Internal consistency: pairwise commuting, independent, Hermitian
    /// sign-definite generators.
    pub fn validate(&self) -> Result<(), TableauError> {
        for (i, g) in self.state_generators.iter().enumerate() {
            if !g.is_hermitian() {
                return Err(TableauError::NotHermitian(g.to_string()));
            }
            for h in &self.state_generators[..i] {
                if !g.commutes_with(h)? {
                    return Err(TableauError::NotHermitian(format!(
                        "anticommuting generators {h} and {g}"
                    )));
                }
            }
        }
        let rows: Vec<_> = self
            .state_generators
            .iter()
            .map(|g| g.check_vector())
            .collect();
        let rank = BitMatrix::from_rows(rows, 2 * self.n)?.rank();
        if rank != self.n {
            return Err(TableauError::Size {
                expected: self.n,
                found: rank,
            });
        }
        Ok(())
    }
}

/// Product stabilizer state from one symbol per qubit: 0 and 1 give
/// ±Z generators, + and - give ±X, i and j give ±Y.
pub fn tableau_from_product(spec: &str) -> Result<StabilizerTableau, TableauError> {
    let symbols: Vec<char> = spec.chars().collect();
    let n = symbols.len();
    let mut state_generators = Vec::with_capacity(n);
    for (i, symbol) in symbols.iter().enumerate() {
        let (letter, negate) = match symbol {
            '0' => (PauliLetter::Z, false),
            '1' => (PauliLetter::Z, true),
            '+' => (PauliLetter::X, false),
            '-' => (PauliLetter::X, true),
            'i' => (PauliLetter::Y, false),
            'j' => (PauliLetter::Y, true),
            other => return Err(TableauError::InvalidSymbol(*other)),
        };
        let g = PauliOperator::single(n, i, letter)?;
        state_generators.push(if negate { g.negated() } else { g });
    }
    Ok(StabilizerTableau {
        n,
        state_generators,
        tracked_observables: Vec::new(),
    })
}

/// Initial tableau for an encoder plan: the given symbols on the upload
/// qubits and the nominal pattern on the gauge qubits, free slots filled
/// with the pattern's own symbol just like the dense nominal state.
pub fn tableau_for_plan(
    plan: &crate::code::EncoderPlan,
    upload: &str,
) -> Result<StabilizerTableau, TableauError> {
    let symbols: Vec<char> = upload.chars().collect();
    if symbols.len() != plan.m() {
        return Err(TableauError::UploadLength {
            expected: plan.m(),
            found: symbols.len(),
        });
    }
    let mut spec = vec!['0'; plan.n()];
    for (i, &q) in plan.upload_qubits().iter().enumerate() {
        spec[q] = symbols[i];
    }
    let nominal = plan.nominal_gauge();
    for (j, &q) in plan.gauge_qubits().iter().enumerate() {
        spec[q] = nominal.pattern()[j].symbol();
    }
    tableau_from_product(&spec.into_iter().collect::<String>())
}

/// Exhaustive-or-sampled branch enumeration limits.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    /// Exact enumeration aborts in favor of sampling when the frontier of
    /// distinct states would exceed this many leaves.
    pub leaf_cap: usize,
    /// Trajectories drawn in sampling mode.
    pub samples: usize,
    pub seed: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            leaf_cap: 1 << 16,
            samples: 512,
            seed: 0,
        }
    }
}

/// Leaves of a measurement tree, deduplicated by canonical form.
#[derive(Debug, Clone)]
pub struct BranchSet {
    /// Distinct leaf states with their total probabilities.
    pub leaves: Vec<(f64, StabilizerTableau)>,
    /// Measurement histories the leaves account for.
    pub histories: u128,
    /// True when the enumeration fell back to seeded sampling.
    pub sampled: bool,
    /// Probability mass covered; 1 in exact mode.
    pub coverage: f64,
}

/// Run the ordered measure-and-correct steps on an initial stabilizer
/// state, following every branch. Identical intermediate states are
/// merged after each step, which is what keeps the frontier small: the
/// corrections are chosen to send both outcomes of a fresh measurement to
/// the same state. Past the leaf cap the walk restarts in sampling mode,
/// drawing whole trajectories with a seeded generator and reporting the
/// probability mass the distinct histories cover.
pub fn enumerate_branches(
    initial: &StabilizerTableau,
    steps: &[EncoderStep],
    limits: &EnumerationLimits,
) -> Result<BranchSet, TableauError> {
    let mut frontier: HashMap<Vec<u8>, (f64, u128, StabilizerTableau)> = HashMap::new();
    frontier.insert(initial.canonical_key(), (1.0, 1, initial.clone()));
    for step in steps {
        let mut next: HashMap<Vec<u8>, (f64, u128, StabilizerTableau)> = HashMap::new();
        let mut overflow = false;
        for (probability, histories, tableau) in frontier.values() {
            for (weight, branch) in
                tableau.apply_encoding_map(&step.stabilizer, &step.correction)?
            {
                let entry = next
                    .entry(branch.canonical_key())
                    .or_insert_with(|| (0.0, 0, branch));
                entry.0 += probability * weight;
                entry.1 += histories;
            }
            if next.len() > limits.leaf_cap {
                overflow = true;
                break;
            }
        }
        if overflow {
            return sample_branches(initial, steps, limits);
        }
        frontier = next;
    }
    let histories = frontier.values().map(|(_, h, _)| h).sum();
    Ok(BranchSet {
        leaves: frontier.into_values().map(|(p, _, t)| (p, t)).collect(),
        histories,
        sampled: false,
        coverage: 1.0,
    })
}

fn sample_branches(
    initial: &StabilizerTableau,
    steps: &[EncoderStep],
    limits: &EnumerationLimits,
) -> Result<BranchSet, TableauError> {
    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    let mut seen_histories: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut leaves: HashMap<Vec<u8>, (f64, StabilizerTableau)> = HashMap::new();
    for _ in 0..limits.samples {
        let mut tableau = initial.clone();
        let mut probability = 1.0;
        let mut history = Vec::new();
        for step in steps {
            let mut branches =
                tableau.apply_encoding_map(&step.stabilizer, &step.correction)?;
            if branches.len() == 1 {
                tableau = branches.pop().expect("just checked").1;
            } else {
                let pick = rng.random::<bool>() as usize;
                history.push(pick == 1);
                probability *= branches[pick].0;
                tableau = branches.swap_remove(pick).1;
            }
        }
        if seen_histories.insert(history, probability).is_none() {
            let entry = leaves
                .entry(tableau.canonical_key())
                .or_insert_with(|| (0.0, tableau));
            entry.0 += probability;
        }
    }
    Ok(BranchSet {
        leaves: leaves.into_values().map(|(p, t)| (p, t)).collect(),
        histories: seen_histories.len() as u128,
        sampled: true,
        coverage: seen_histories.values().sum(),
    })
}
