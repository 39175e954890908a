//! Dense complex linear algebra for systems of at most four qubits, together
//! with the tetrahedron geometry that the rest of the crate is built on.
//!
//! Qubit 0 is the most significant bit of a basis index, so a four-qubit
//! state is laid out as `|q0 q1 q2 q3⟩` with Alice on qubit 0.
//!
//! # Gauge of the tetrahedron states
//!
//! Only the rank-one projectors `|l⟩⟨l| = (1 + t_l·σ)/2` are physical. Each
//! `|l⟩` is taken as the eigenvector of `t_l·σ` whose first nonzero amplitude
//! is real and positive, and the partner state is its spin flip
//! `|l̄⟩ = -iσ_y K |l⟩` (complex conjugation followed by `-iσ_y`). The
//! antiunitary flip squares to `-1`, which gives `⟨l|k⟩ = ⟨k̄|l̄⟩` and
//! `⟨l|k̄⟩ = -⟨k|l̄⟩` for any choice of the individual phases. Products such
//! as `|l l̄⟩` are unchanged by rephasing `|l⟩`, so nothing downstream depends
//! on the gauge. The singlet is `(|01⟩ - |10⟩)/√2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::JointTable;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for operator identities (completeness, reconstruction).
pub const OPERATOR_TOL: f64 = 1e-10;
/// Tolerance for scalar identities (norms, traces, Hermiticity).
pub const SCALAR_TOL: f64 = 1e-12;

const MAX_DIM: usize = 16;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_dim(dim: usize) -> Result<usize> {
    if (2..=MAX_DIM).contains(&dim) && dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::BadDimension(dim))
    }
}

/// The three Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [CMatrix; 3] {
    let z = r(0.0);
    let one = r(1.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// first so round-off in the anti-Hermitian part cannot leak in.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * r(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// A real three-vector inside the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self([x, y, z]);
        if !v.norm().is_finite() || v.norm() > 1.0 + SCALAR_TOL {
            return Err(Error::InvalidVectors(format!(
                "Bloch vector ({x}, {y}, {z}) has norm {} > 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `t·σ` as a 2×2 matrix.
    pub fn sigma_dot(&self) -> CMatrix {
        let [sx, sy, sz] = pauli();
        sx * r(self.0[0]) + sy * r(self.0[1]) + sz * r(self.0[2])
    }
}

/// The four tetrahedron vectors `(±1, ±1, ±1)/√3` with an even number of
/// minus signs, in the order t_1..t_4.
pub fn tetrahedron_vectors() -> [BlochVector; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        BlochVector([s, s, s]),
        BlochVector([s, -s, -s]),
        BlochVector([-s, s, -s]),
        BlochVector([-s, -s, s]),
    ]
}

/// A state vector on `log2(dim)` qubits.
///
/// States built with [`PureState::new`] are unit-norm; the unnormalized
/// variants (Eve's ancilla components) carry `normalized == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
    normalized: bool,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let s = Self::unnormalized(amps)?;
        let n = s.norm_sqr();
        if (n - 1.0).abs() > SCALAR_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self {
            normalized: true,
            ..s
        })
    }

    pub fn unnormalized(amps: Vec<C64>) -> Result<Self> {
        check_dim(amps.len())?;
        Ok(Self {
            amps: CVector::from_vec(amps),
            normalized: false,
        })
    }

    pub(crate) fn from_vector(amps: CVector, normalized: bool) -> Result<Self> {
        check_dim(amps.len())?;
        Ok(Self { amps, normalized })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidOutcome { index, len: dim });
        }
        let mut v = vec![r(0.0); dim];
        v[index] = r(1.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let amps = self.amps.kronecker(&other.amps);
        Self::from_vector(amps, self.normalized && other.normalized)
    }

    /// Reorders qubits: qubit `i` of the result is qubit `order[i]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let n = self.num_qubits();
        check_permutation(order, n)?;
        let mut out = CVector::zeros(self.dim());
        for (old_index, amp) in self.amps.iter().enumerate() {
            let mut new_index = 0;
            for (new_pos, &old_pos) in order.iter().enumerate() {
                let bit = (old_index >> (n - 1 - old_pos)) & 1;
                new_index |= bit << (n - 1 - new_pos);
            }
            out[new_index] = *amp;
        }
        Self::from_vector(out, self.normalized)
    }

    /// Max-entry distance after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = self.inner(other);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            r(1.0)
        };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidSubsystems(format!(
            "permutation {order:?} has wrong length for {n} qubits"
        )));
    }
    for &q in order {
        if q >= n || seen[q] {
            return Err(Error::InvalidSubsystems(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        seen[q] = true;
    }
    Ok(())
}

/// The two-qubit singlet `(|01⟩ - |10⟩)/√2`.
pub fn singlet() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(vec![r(0.0), r(h), r(-h), r(0.0)]).expect("singlet is normalized")
}

/// Spin flip `-iσ_y K` of a single-qubit state: `(a, b) -> (-b*, a*)`.
pub fn spin_flip(state: &PureState) -> Result<PureState> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: state.dim(),
        });
    }
    let a = state.amps[0];
    let b = state.amps[1];
    PureState::from_vector(
        CVector::from_vec(vec![-b.conj(), a.conj()]),
        state.normalized,
    )
}

/// Hermitian operator on at most four qubits, possibly subnormalized.
///
/// The trace is stored as computed and never renormalized implicitly; use
/// [`DensityOperator::normalized`] for that.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    trace: f64,
}

impl DensityOperator {
    /// Hermitian and positive semidefinite (eigenvalues ≥ -1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let op = Self::hermitian(matrix)?;
        let min = op.min_eigenvalue();
        if min < -OPERATOR_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(op)
    }

    /// Hermitian only; positivity is left to [`Self::min_eigenvalue`].
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;
        let err = hermiticity_error(&matrix);
        if err > SCALAR_TOL {
            return Err(Error::NotHermitian(err));
        }
        let trace = matrix.trace().re;
        Ok(Self { matrix, trace })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let matrix = state.projector();
        let trace = matrix.trace().re;
        Self { matrix, trace }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::new(identity(dim) * r(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -OPERATOR_TOL
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        if self.trace <= 0.0 {
            return Err(Error::NotPositive(self.trace));
        }
        Ok(Self {
            matrix: &self.matrix * r(1.0 / self.trace),
            trace: 1.0,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// `tr[self · op]`, real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        // tr(AB) = Σ_ij A_ij B_ji
        let mut acc = r(0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        acc.re
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, unitary: &CMatrix) -> Result<Self> {
        Self::hermitian(unitary * &self.matrix * unitary.adjoint())
    }
}

impl From<&PureState> for DensityOperator {
    fn from(state: &PureState) -> Self {
        Self::from_pure(state)
    }
}

/// Positive operators with outcome labels, summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::MalformedTable("POVM without elements".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::DimensionMismatch {
                expected: elements.len(),
                actual: labels.len(),
            });
        }
        let dim = elements[0].nrows();
        check_dim(dim)?;
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: e.nrows(),
                });
            }
            let herm = hermiticity_error(e);
            if herm > SCALAR_TOL {
                return Err(Error::NotHermitian(herm));
            }
            let min = hermitian_eigenvalues(e)[0];
            if min < -OPERATOR_TOL {
                return Err(Error::NotPositive(min));
            }
            sum += e;
        }
        let err = max_abs_diff(&sum, &identity(dim));
        if err > OPERATOR_TOL {
            return Err(Error::IncompletePovm(err));
        }
        Ok(Self { elements, labels })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Result<&CMatrix> {
        self.elements.get(index).ok_or(Error::InvalidOutcome {
            index,
            len: self.elements.len(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `‖Σ_k E_k − 1‖_max`.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .elements
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
        max_abs_diff(&sum, &identity(dim))
    }
}

/// Outcome letters used throughout: A, B, C, D, then E for a fifth element.
pub fn letter_labels(count: usize) -> Vec<String> {
    (0..count)
        .map(|i| {
            char::from_u32('A' as u32 + i as u32)
                .map(String::from)
                .unwrap_or_else(|| format!("#{i}"))
        })
        .collect()
}

/// `P_k = (1 + t_k·σ)/4` for four unit vectors summing to zero.
pub fn povm_from_vectors(vectors: &[BlochVector]) -> Result<Povm> {
    check_tetrahedron(vectors)?;
    let elements = vectors
        .iter()
        .map(|t| (identity(2) + t.sigma_dot()) * r(0.25))
        .collect();
    Povm::new(elements, letter_labels(vectors.len()))
}

fn check_tetrahedron(vectors: &[BlochVector]) -> Result<()> {
    if vectors.len() != 4 {
        return Err(Error::InvalidVectors(format!(
            "expected 4 vectors, got {}",
            vectors.len()
        )));
    }
    for (k, v) in vectors.iter().enumerate() {
        if (v.norm() - 1.0).abs() > SCALAR_TOL {
            return Err(Error::InvalidVectors(format!(
                "t_{} has norm {}",
                k + 1,
                v.norm()
            )));
        }
    }
    let mut sum = [0.0; 3];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v.0) {
            *s += x;
        }
    }
    let resid = sum.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if resid > SCALAR_TOL {
        return Err(Error::InvalidVectors(format!(
            "vectors sum to {sum:?}, not zero"
        )));
    }
    Ok(())
}

/// The eight single-qubit tetrahedron states `|l⟩` and `|l̄⟩`.
#[derive(Debug, Clone)]
pub struct TetraStates {
    kets: [PureState; 4],
    flipped: [PureState; 4],
}

impl TetraStates {
    /// `|l⟩`, zero-based.
    pub fn ket(&self, l: usize) -> &PureState {
        &self.kets[l]
    }

    /// `|l̄⟩`, zero-based.
    pub fn flipped(&self, l: usize) -> &PureState {
        &self.flipped[l]
    }

    /// `|l, l̄⟩`.
    pub fn pair(&self, l: usize) -> PureState {
        self.kets[l].tensor(&self.flipped[l]).expect("2-qubit product")
    }

    /// `|l̄, l⟩`.
    pub fn pair_flipped(&self, l: usize) -> PureState {
        self.flipped[l].tensor(&self.kets[l]).expect("2-qubit product")
    }
}

/// Builds `|l⟩` and `|l̄⟩` and verifies the projector and phase relations.
pub fn tetra_states(vectors: &[BlochVector; 4]) -> Result<TetraStates> {
    check_tetrahedron(vectors)?;
    let mut kets = Vec::with_capacity(4);
    let mut flipped = Vec::with_capacity(4);
    for t in vectors {
        let ket = bloch_ket(t)?;
        flipped.push(spin_flip(&ket)?);
        kets.push(ket);
    }
    let states = TetraStates {
        kets: kets.try_into().expect("four kets"),
        flipped: flipped.try_into().expect("four flipped kets"),
    };
    verify_phase_conventions(&states, vectors)?;
    Ok(states)
}

/// Eigenvector of `t·σ` with eigenvalue +1, first nonzero amplitude real.
fn bloch_ket(t: &BlochVector) -> Result<PureState> {
    let [x, y, z] = t.components();
    // (1 + t·σ)/2 has columns proportional to the +1 eigenvector.
    let (a, b) = if z > -1.0 + 1e-6 {
        (r(1.0 + z), c(x, y))
    } else {
        (c(x, -y), r(1.0 - z))
    };
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let phase = if a.norm() > 0.0 { a.conj() / a.norm() } else { r(1.0) };
    PureState::new(vec![a * phase / norm, b * phase / norm])
}

fn verify_phase_conventions(states: &TetraStates, vectors: &[BlochVector; 4]) -> Result<()> {
    let half = identity(2) * r(0.5);
    for l in 0..4 {
        let target = &half + vectors[l].sigma_dot() * r(0.5);
        let err = max_abs_diff(&states.ket(l).projector(), &target);
        let err_bar = max_abs_diff(
            &states.flipped(l).projector(),
            &(&half - vectors[l].sigma_dot() * r(0.5)),
        );
        if err > OPERATOR_TOL || err_bar > OPERATOR_TOL {
            return Err(Error::Invariant(format!(
                "tetrahedron state {l} projector mismatch ({err:e}, {err_bar:e})"
            )));
        }
        for k in 0..4 {
            let lk = states.ket(l).inner(states.ket(k));
            let kl_bar = states.flipped(k).inner(states.flipped(l));
            let l_kbar = states.ket(l).inner(states.flipped(k));
            let k_lbar = states.ket(k).inner(states.flipped(l));
            if (lk - kl_bar).norm() > SCALAR_TOL || (l_kbar + k_lbar).norm() > SCALAR_TOL {
                return Err(Error::Invariant(format!(
                    "phase convention violated for (l, k) = ({l}, {k})"
                )));
            }
        }
    }
    Ok(())
}

fn check_subsystems(indices: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indices.len() {
        return Err(Error::InvalidSubsystems(format!(
            "duplicate qubit in {indices:?}"
        )));
    }
    if let Some(&q) = sorted.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "qubit {q} out of range for {n} qubits"
        )));
    }
    Ok(sorted)
}

/// Scatters the bits of `sub` (MSB first, one per entry of `positions`) into
/// a full `n`-qubit index.
fn scatter(sub: usize, positions: &[usize], n: usize) -> usize {
    let m = positions.len();
    positions.iter().enumerate().fold(0, |acc, (i, &q)| {
        acc | (((sub >> (m - 1 - i)) & 1) << (n - 1 - q))
    })
}

/// Traces out every qubit not listed in `keep`. Kept qubits stay in
/// ascending order.
pub fn partial_trace(op: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let n = op.num_qubits();
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("nothing to keep".into()));
    }
    let keep = check_subsystems(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kd = 1 << keep.len();
    let td = 1 << traced.len();
    let m = op.matrix();
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..kd {
        let fi = scatter(i, &keep, n);
        for j in 0..kd {
            let fj = scatter(j, &keep, n);
            let mut acc = r(0.0);
            for t in 0..td {
                let ft = scatter(t, &traced, n);
                acc += m[(fi | ft, fj | ft)];
            }
            out[(i, j)] = acc;
        }
    }
    DensityOperator::hermitian(out)
}

/// Embeds an operator acting on `targets` (in that order) into the full
/// `n`-qubit space, with identity elsewhere.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix> {
    if op.nrows() != 1 << targets.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            actual: op.nrows(),
        });
    }
    check_subsystems(targets, n)?;
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let dim = 1 << n;
    let sd = op.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for e in 0..(1 << rest.len()) {
        let fe = scatter(e, &rest, n);
        for i in 0..sd {
            let fi = scatter(i, targets, n) | fe;
            for j in 0..sd {
                let fj = scatter(j, targets, n) | fe;
                out[(fi, fj)] = op[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Born-rule joint distribution of several POVMs measured on disjoint
/// qubit sets of one state. Axis `i` of the table is `assignments[i]`.
pub fn born_joint(state: &DensityOperator, assignments: &[(&Povm, &[usize])]) -> Result<JointTable> {
    let n = state.num_qubits();
    let mut used = Vec::new();
    let mut embedded: Vec<Vec<CMatrix>> = Vec::with_capacity(assignments.len());
    for (povm, qubits) in assignments {
        if povm.num_qubits() != qubits.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits.len(),
                actual: povm.dim(),
            });
        }
        used.extend_from_slice(qubits);
        embedded.push(
            povm.elements()
                .iter()
                .map(|e| embed(e, qubits, n))
                .collect::<Result<_>>()?,
        );
    }
    check_subsystems(&used, n)?;

    let shape: Vec<usize> = assignments.iter().map(|(p, _)| p.len()).collect();
    let total: usize = shape.iter().product();
    let mut probs = Vec::with_capacity(total);
    let mut index = vec![0usize; shape.len()];
    for _ in 0..total {
        let mut op = identity(1 << n);
        for (axis, &k) in index.iter().enumerate() {
            op = op * &embedded[axis][k];
        }
        let p = state.expectation(&op);
        if p < -SCALAR_TOL {
            return Err(Error::NotPositive(p));
        }
        probs.push(p.max(0.0));
        // row-major increment
        for axis in (0..shape.len()).rev() {
            index[axis] += 1;
            if index[axis] < shape[axis] {
                break;
            }
            index[axis] = 0;
        }
    }
    let labels = assignments.iter().map(|(p, _)| p.labels().to_vec()).collect();
    JointTable::new(default_party_names(assignments.len()), labels, probs)
}

fn default_party_names(count: usize) -> Vec<String> {
    const NAMES: [&str; 3] = ["alice", "bob", "eve"];
    (0..count)
        .map(|i| NAMES.get(i).map(|s| s.to_string()).unwrap_or(format!("party{i}")))
        .collect()
}
