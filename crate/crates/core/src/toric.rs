//! Toric code on an L x L torus: one qubit per edge, plaquette and vertex
//! stabilizers, and a hand-built encoder plan whose corrections are all
//! single-qubit and whose validity rests on the measurement order.
//!
//! Layout. Grid points (row, col) live on Z_L x Z_L with rows growing
//! north and columns growing east. The horizontal edge h(r, c) leaves
//! point (r, c) eastward and gets index r*L + c; the vertical edge
//! v(r, c) leaves the same point northward and gets index L^2 + r*L + c.
//! The plaquette (r, c) is the unit cell whose southwest corner is point
//! (r, c); the vertex (r, c) is the set of four edges meeting that point.
//! All four-edge sets are stored in [north, east, south, west] order.
//!
//! The starred plaquette is cell (0, 0) and the starred vertex is point
//! (0, 0); their operators are the products of all the others and are the
//! two generators the code omits. The edges of the torus split into the
//! regions used everywhere below: the single edges A1 = h(0, 0) and
//! A2 = v(0, 0) carry the two uploaded qubits, B1 = {h(r, 0): r > 0} and
//! B2 = {v(0, c): c > 0} complete the two X loops, C1 = {h(0, c): c > 0}
//! and C2 = {v(r, 0): r > 0} complete the two Z loops, and D is the rest.

use crate::code::{
    CodeError, EncoderPlan, EncoderStep, GaugeBasis, NominalGaugeState, StabilizerCode,
};
use crate::gf2::BitVec;
use crate::pauli::{CheckMatrix, PauliError, PauliLetter, PauliOperator};
use crate::verify::{CheckResult, VerificationReport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("lattice size {0} is below the minimum of 2")]
    TooSmall(usize),
    #[error("correction {step} anticommutes with earlier stabilizer {earlier}")]
    Ordering { step: usize, earlier: usize },
    #[error("correction {step} commutes with its own stabilizer")]
    OwnStabilizer { step: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Which way an edge points, away from its base grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Disjoint edge sets covering the torus. The two A edges carry the
/// uploaded qubits; B and C edges complete the logical loops; D edges are
/// untouched by every basin generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regions {
    pub a1: usize,
    pub a2: usize,
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub d: Vec<usize>,
}

/// The L x L torus: edge indexing, the four-edge supports of every
/// plaquette and vertex, the starred pair, and the region assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricLattice {
    l: usize,
    /// Cell (r, c) at index r*L + c, edges in [N, E, S, W] order.
    plaquettes: Vec<[usize; 4]>,
    /// Point (r, c) at index r*L + c, edges in [N, E, S, W] order.
    vertices: Vec<[usize; 4]>,
    p_star: usize,
    v_star: usize,
    regions: Regions,
}

impl ToricLattice {
    fn new(l: usize) -> Self {
        let h = |r: usize, c: usize| (r % l) * l + (c % l);
        let v = |r: usize, c: usize| l * l + (r % l) * l + (c % l);
        let mut plaquettes = Vec::with_capacity(l * l);
        let mut vertices = Vec::with_capacity(l * l);
        for r in 0..l {
            for c in 0..l {
                plaquettes.push([h(r + 1, c), v(r, c + 1), h(r, c), v(r, c)]);
                vertices.push([v(r, c), h(r, c), v(r + l - 1, c), h(r, c + l - 1)]);
            }
        }
        let regions = Regions {
            a1: h(0, 0),
            a2: v(0, 0),
            b1: (1..l).map(|r| h(r, 0)).collect(),
            b2: (1..l).map(|c| v(0, c)).collect(),
            c1: (1..l).map(|c| h(0, c)).collect(),
            c2: (1..l).map(|r| v(r, 0)).collect(),
            d: (1..l)
                .flat_map(|r| (1..l).map(move |c| (r, c)))
                .flat_map(|(r, c)| [h(r, c), v(r, c)])
                .collect(),
        };
        Self {
            l,
            plaquettes,
            vertices,
            p_star: 0,
            v_star: 0,
            regions,
        }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Edge-qubit count, 2L^2.
    pub fn n(&self) -> usize {
        2 * self.l * self.l
    }

    /// Index of the horizontal edge leaving point (r, c) eastward.
    pub fn horizontal(&self, row: usize, col: usize) -> usize {
        (row % self.l) * self.l + col % self.l
    }

    /// Index of the vertical edge leaving point (r, c) northward.
    pub fn vertical(&self, row: usize, col: usize) -> usize {
        self.l * self.l + (row % self.l) * self.l + col % self.l
    }

    pub fn edge_index(&self, orientation: Orientation, row: usize, col: usize) -> usize {
        match orientation {
            Orientation::Horizontal => self.horizontal(row, col),
            Orientation::Vertical => self.vertical(row, col),
        }
    }

    /// Inverse of [`edge_index`](Self::edge_index).
    pub fn edge_coords(&self, index: usize) -> (Orientation, usize, usize) {
        let area = self.l * self.l;
        let (orientation, rest) = if index < area {
            (Orientation::Horizontal, index)
        } else {
            (Orientation::Vertical, index - area)
        };
        (orientation, rest / self.l, rest % self.l)
    }

    /// All L^2 plaquette supports, including the starred one.
    pub fn plaquettes(&self) -> &[[usize; 4]] {
        &self.plaquettes
    }

    /// All L^2 vertex supports, including the starred one.
    pub fn vertices(&self) -> &[[usize; 4]] {
        &self.vertices
    }

    pub fn plaquette_edges(&self, row: usize, col: usize) -> [usize; 4] {
        self.plaquettes[(row % self.l) * self.l + col % self.l]
    }

    pub fn vertex_edges(&self, row: usize, col: usize) -> [usize; 4] {
        self.vertices[(row % self.l) * self.l + col % self.l]
    }

    /// Cell index of the plaquette whose operator is omitted.
    pub fn p_star(&self) -> usize {
        self.p_star
    }

    /// Point index of the vertex whose operator is omitted.
    pub fn v_star(&self) -> usize {
        self.v_star
    }

    pub fn regions(&self) -> &Regions {
        &self.regions
    }
}

/// Build the lattice and its stabilizer code: Z on every plaquette except
/// the starred one, X on every vertex except the starred one, listed in
/// the order the encoder measures them. Sizes below 2 are rejected: L = 1
/// leaves no independent generators at all.
pub fn build_toric(l: usize) -> Result<(ToricLattice, StabilizerCode), ToricError> {
    if l < 2 {
        return Err(ToricError::TooSmall(l));
    }
    let lat = ToricLattice::new(l);
    let generators: Vec<PauliOperator> = vertex_order(l)
        .into_iter()
        .map(|(r, c)| pauli_on(lat.n(), PauliLetter::X, &lat.vertex_edges(r, c)))
        .chain(
            plaquette_order(l)
                .into_iter()
                .map(|(r, c)| pauli_on(lat.n(), PauliLetter::Z, &lat.plaquette_edges(r, c))),
        )
        .collect();
    let code = StabilizerCode::new(format!("toric:{l}"), lat.n(), generators)?.with_distance(l);
    Ok((lat, code))
}

/// The two logical pairs, as loops through the starred cell. X operators
/// run on horizontal-edge column 0 and vertical-edge row 0 (crossing the
/// torus the short way on the dual lattice); Z operators run on
/// horizontal-edge row 0 and vertical-edge column 0. Pair i overlaps only
/// on the single A_i edge, so canonical anticommutation holds.
pub fn toric_logicals(lat: &ToricLattice) -> [(PauliOperator, PauliOperator); 2] {
    let n = lat.n();
    let reg = lat.regions();
    let loop_support = |a: usize, rest: &[usize]| {
        let mut edges = vec![a];
        edges.extend_from_slice(rest);
        edges
    };
    let x1 = pauli_on(n, PauliLetter::X, &loop_support(reg.a1, &reg.b1));
    let z1 = pauli_on(n, PauliLetter::Z, &loop_support(reg.a1, &reg.c1));
    let x2 = pauli_on(n, PauliLetter::X, &loop_support(reg.a2, &reg.b2));
    let z2 = pauli_on(n, PauliLetter::Z, &loop_support(reg.a2, &reg.c2));
    [(x1, z1), (x2, z2)]
}

// Measurement sweeps. Each correction hands its flip to the next operator
// in its chain, so within a chain the receiver must come later. Vertex
// chains run north along each column and terminate by wrapping into row 0,
// whose own chain runs east and terminates on the omitted starred vertex;
// row 0 therefore comes after every column. Plaquette sweeps are the
// mirror image: west along each row into column 0, then south to the
// starred plaquette.

fn vertex_order(l: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(l * l - 1);
    for c in 0..l {
        for r in 1..l {
            order.push((r, c));
        }
    }
    for c in 1..l {
        order.push((0, c));
    }
    order
}

fn plaquette_order(l: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(l * l - 1);
    for r in 0..l {
        for c in (1..l).rev() {
            order.push((r, c));
        }
    }
    for r in (1..l).rev() {
        order.push((r, 0));
    }
    order
}

/// The ordered measure-and-correct steps: all vertex maps, then all
/// plaquette maps. Every correction is a single Pauli on one edge of its
/// own stabilizer: Z on the north edge of a bulk vertex, Z on the east
/// edge of a row-0 vertex, X on the west edge of a bulk plaquette, X on
/// the south edge of a column-0 plaquette. The required ordering property
/// (each correction commutes with every stabilizer measured before it) is
/// checked here rather than trusted.
pub fn toric_corrections(lat: &ToricLattice) -> Result<Vec<EncoderStep>, ToricError> {
    let n = lat.n();
    let mut steps = Vec::with_capacity(lat.n() - 2);
    for (r, c) in vertex_order(lat.l()) {
        let stabilizer = pauli_on(n, PauliLetter::X, &lat.vertex_edges(r, c));
        let edge = if r == 0 {
            lat.horizontal(0, c)
        } else {
            lat.vertical(r, c)
        };
        let correction = pauli_on(n, PauliLetter::Z, &[edge]);
        steps.push(EncoderStep {
            stabilizer,
            correction,
        });
    }
    for (r, c) in plaquette_order(lat.l()) {
        let stabilizer = pauli_on(n, PauliLetter::Z, &lat.plaquette_edges(r, c));
        let edge = if c == 0 {
            lat.horizontal(r, 0)
        } else {
            lat.vertical(r, c)
        };
        let correction = pauli_on(n, PauliLetter::X, &[edge]);
        steps.push(EncoderStep {
            stabilizer,
            correction,
        });
    }
    for (k, step) in steps.iter().enumerate() {
        if step.correction.commutes_with(&step.stabilizer)? {
            return Err(ToricError::OwnStabilizer { step: k });
        }
        for (j, earlier) in steps.iter().take(k).enumerate() {
            if !step.correction.commutes_with(&earlier.stabilizer)? {
                return Err(ToricError::Ordering { step: k, earlier: j });
            }
        }
    }
    Ok(steps)
}

/// The four commuting operators whose joint +1-eigenspace attracts, the
/// edges their nominal product state prepares, and the D edges whose state
/// never matters.
#[derive(Debug, Clone)]
pub struct ToricBasin {
    /// X on B1, Z on C1, X on B2, Z on C2, on the full register.
    pub generators: [PauliOperator; 4],
    /// Edges the nominal state prepares in |+>: B1 then B2.
    pub plus_edges: Vec<usize>,
    /// Edges the nominal state prepares in |0>: C1 then C2.
    pub zero_edges: Vec<usize>,
    /// D edges, unconstrained by every generator.
    pub unconstrained: Vec<usize>,
}

impl ToricBasin {
    /// log2 of the basin dimension: the four generators are independent,
    /// so of the 2L^2 - 2 gauge qubits all but four directions are free.
    pub fn log2_dimension(&self) -> usize {
        let n = self.generators[0].n();
        n - 2 - 4
    }
}

pub fn toric_basin(lat: &ToricLattice) -> ToricBasin {
    let n = lat.n();
    let reg = lat.regions();
    ToricBasin {
        generators: [
            pauli_on(n, PauliLetter::X, &reg.b1),
            pauli_on(n, PauliLetter::Z, &reg.c1),
            pauli_on(n, PauliLetter::X, &reg.b2),
            pauli_on(n, PauliLetter::Z, &reg.c2),
        ],
        plus_edges: reg.b1.iter().chain(&reg.b2).copied().collect(),
        zero_edges: reg.c1.iter().chain(&reg.c2).copied().collect(),
        unconstrained: reg.d.clone(),
    }
}

/// Assemble the full encoder plan: ordered steps, loop logicals, the two A
/// edges as uploads, and the basin restricted to the gauge register. The
/// plan is order sensitive, unlike synthesized ones.
pub fn toric_plan(lat: &ToricLattice) -> Result<EncoderPlan, ToricError> {
    let (_, code) = build_toric(lat.l())?;
    let steps = toric_corrections(lat)?;
    let [(x1, z1), (x2, z2)] = toric_logicals(lat);
    let basin = toric_basin(lat);
    let reg = lat.regions();

    let upload_qubits = vec![reg.a1, reg.a2];
    let gauge_qubits: Vec<usize> = (0..lat.n())
        .filter(|q| *q != reg.a1 && *q != reg.a2)
        .collect();

    let restrict = |op: &PauliOperator| op.restrict(&gauge_qubits);
    let r = gauge_qubits.len();
    let basin_rx = CheckMatrix::from_paulis(
        r,
        &[restrict(&basin.generators[0]), restrict(&basin.generators[2])],
    )?;
    let basin_rz = CheckMatrix::from_paulis(
        r,
        &[restrict(&basin.generators[1]), restrict(&basin.generators[3])],
    )?;

    let pattern = gauge_qubits
        .iter()
        .map(|q| {
            if basin.plus_edges.contains(q) {
                GaugeBasis::Plus
            } else {
                GaugeBasis::Zero
            }
        })
        .collect();
    let free = gauge_qubits
        .iter()
        .map(|q| basin.unconstrained.contains(q))
        .collect();
    let permutation: Vec<usize> = upload_qubits
        .iter()
        .chain(&gauge_qubits)
        .copied()
        .collect();
    let nominal =
        NominalGaugeState::from_parts(pattern, free, gauge_qubits.clone(), permutation)?;

    Ok(EncoderPlan::from_parts(
        code,
        steps,
        vec![x1, x2],
        vec![z1, z2],
        upload_qubits,
        gauge_qubits,
        basin_rz,
        basin_rx,
        nominal,
        false,
    )?)
}

/// Is every step of the plan confined to one of the declared
/// neighborhoods? A step's Kraus operators act as the identity outside
/// the union of its stabilizer and correction supports, so confinement of
/// that union is what quasi-locality asks.
pub fn check_quasi_locality(
    plan: &EncoderPlan,
    neighborhoods: &[Vec<usize>],
) -> VerificationReport {
    let mut report = VerificationReport::new(plan.code().name());
    let mut violations = Vec::new();
    let mut widest = 0usize;
    for (k, step) in plan.steps().iter().enumerate() {
        let mut support = step.stabilizer.support();
        support.extend(step.correction.support());
        support.sort_unstable();
        support.dedup();
        widest = widest.max(support.len());
        let confined = support.is_empty()
            || neighborhoods
                .iter()
                .any(|nb| support.iter().all(|q| nb.contains(q)));
        if !confined {
            violations.push(format!("step {k} escapes every declared neighborhood"));
        }
    }
    let details = if violations.is_empty() {
        format!("widest step support {widest}")
    } else {
        violations.join("; ")
    };
    report.push(CheckResult::exact(
        "steps_confined_to_neighborhoods",
        violations.len(),
        details,
    ));
    report
}

/// Do two measure-and-correct maps commute as channels? They do whenever
/// the stabilizers commute with each other and with both corrections: the
/// corrections themselves are allowed to anticommute, because swapping
/// them only flips the sign of one composed Kraus operator, and Kraus
/// operators carry no physical phase.
pub fn steps_commute_as_channels(a: &EncoderStep, b: &EncoderStep) -> Result<bool, PauliError> {
    Ok(a.stabilizer.commutes_with(&b.stabilizer)?
        && a.correction.commutes_with(&b.stabilizer)?
        && b.correction.commutes_with(&a.stabilizer)?)
}

/// Layered parallel schedule of a plan's steps. Step indices within one
/// layer pairwise commute as channels, and steps that fail to commute
/// keep their relative order across layers, so running the layers in
/// sequence reproduces the plan exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    layers: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Greedy layering: each step lands one layer above the latest earlier
/// step it fails to commute with.
pub fn parallel_schedule(plan: &EncoderPlan) -> Result<Schedule, PauliError> {
    let steps = plan.steps();
    let mut layer = vec![0usize; steps.len()];
    for k in 0..steps.len() {
        let mut level = 1;
        for j in 0..k {
            if !steps_commute_as_channels(&steps[j], &steps[k])? {
                level = level.max(layer[j] + 1);
            }
        }
        layer[k] = level;
    }
    let depth = layer.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for (k, &level) in layer.iter().enumerate() {
        layers[level - 1].push(k);
    }
    Ok(Schedule { layers })
}

fn pauli_on(n: usize, letter: PauliLetter, edges: &[usize]) -> PauliOperator {
    let mut x = BitVec::zeros(n);
    let mut z = BitVec::zeros(n);
    for &e in edges {
        match letter {
            PauliLetter::X => x.set(e, true),
            PauliLetter::Z => z.set(e, true),
            PauliLetter::Y => {
                x.set(e, true);
                z.set(e, true);
            }
            PauliLetter::I => {}
        }
    }
    PauliOperator::new(n, x, z, 0).expect("bit vectors sized to n")
}
