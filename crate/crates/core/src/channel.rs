//! The Alice–Bob source: a singlet mixed with white noise, measured by both
//! parties with aligned tetrahedron POVMs.

use std::io::Write;

use crate::error::{Error, Result};
use crate::qmath::{
    identity, kron, povm_from_vectors, r, singlet, tetrahedron_vectors, CMatrix, DensityOperator,
    Povm, SCALAR_TOL,
};

/// Separability boundary of the noisy singlet.
pub const SEPARABLE_NOISE: f64 = 2.0 / 3.0;

/// White-noise weight `ε ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseParameter(f64);

impl NoiseParameter {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::NoiseOutOfRange(eps));
        }
        Ok(Self(eps))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `ε < 2/3`: the shared state is entangled.
    pub fn is_entangled(self) -> bool {
        self.0 < SEPARABLE_NOISE
    }

    pub fn is_separable(self) -> bool {
        !self.is_entangled()
    }
}

/// Probability table over the outcomes of several parties, stored row-major
/// with the last party varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    parties: Vec<String>,
    labels: Vec<Vec<String>>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(parties: Vec<String>, labels: Vec<Vec<String>>, probs: Vec<f64>) -> Result<Self> {
        if parties.len() != labels.len() || parties.is_empty() {
            return Err(Error::MalformedTable(format!(
                "{} party names for {} label sets",
                parties.len(),
                labels.len()
            )));
        }
        let size: usize = labels.iter().map(Vec::len).product();
        if size != probs.len() || size == 0 {
            return Err(Error::MalformedTable(format!(
                "shape implies {size} entries, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::MalformedTable(format!("invalid probability {p}")));
        }
        Ok(Self {
            parties,
            labels,
            probs,
        })
    }

    /// Relative frequencies from raw counts.
    pub fn from_counts(
        parties: Vec<String>,
        labels: Vec<Vec<String>>,
        counts: &[u64],
    ) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCounts);
        }
        let probs = counts.iter().map(|&n| n as f64 / total as f64).collect();
        Self::new(parties, labels, probs)
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn shape(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= SCALAR_TOL
    }

    fn flat_index(&self, index: &[usize]) -> Result<usize> {
        let shape = self.shape();
        if index.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                expected: shape.len(),
                actual: index.len(),
            });
        }
        let mut flat = 0;
        for (&i, &n) in index.iter().zip(&shape) {
            if i >= n {
                return Err(Error::InvalidOutcome { index: i, len: n });
            }
            flat = flat * n + i;
        }
        Ok(flat)
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.probs[self.flat_index(index)?])
    }

    /// Multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        for axis in (0..shape.len()).rev() {
            out[axis] = flat % shape[axis];
            flat /= shape[axis];
        }
        out
    }

    /// Marginal over the listed axes, in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<Self> {
        let shape = self.shape();
        if axes.is_empty() || axes.iter().any(|&a| a >= shape.len()) {
            return Err(Error::MalformedTable(format!(
                "invalid marginal axes {axes:?}"
            )));
        }
        let mut seen = vec![false; shape.len()];
        for &a in axes {
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::MalformedTable(format!("repeated axis {a}")));
            }
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
        let mut probs = vec![0.0; out_shape.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let idx = self.unflatten(flat);
            let mut o = 0;
            for (&a, &n) in axes.iter().zip(&out_shape) {
                o = o * n + idx[a];
            }
            probs[o] += p;
        }
        Self::new(
            axes.iter().map(|&a| self.parties[a].clone()).collect(),
            axes.iter().map(|&a| self.labels[a].clone()).collect(),
            probs,
        )
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::Unnormalized(t));
        }
        Ok(Self {
            probs: self.probs.iter().map(|p| p / t).collect(),
            ..self.clone()
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with one column per party followed by `probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.parties.iter().map(String::as_str).collect();
        header.push("probability");
        w.write_record(&header)?;
        for (flat, p) in self.probs.iter().enumerate() {
            let idx = self.unflatten(flat);
            let mut row: Vec<String> = idx
                .iter()
                .enumerate()
                .map(|(axis, &i)| self.labels[axis][i].clone())
                .collect();
            row.push(format!("{p:.17e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `x·log₂x` with `0·log₂0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// The tetrahedron POVM `P_k = (1 + t_k·σ)/4`. Bob measures the same one.
pub fn tetra_povm() -> Povm {
    povm_from_vectors(&tetrahedron_vectors()).expect("tetrahedron vectors are valid")
}

/// `(1−ε)|s⟩⟨s| + (ε/4)·1`.
pub fn rho_ab(eps: NoiseParameter) -> DensityOperator {
    let e = eps.value();
    let m = singlet().projector() * r(1.0 - e) + identity(4) * r(e / 4.0);
    DensityOperator::new(m).expect("Werner state is a density operator")
}

/// 4×4 table with diagonal `x/16` and off-diagonal `(4−x)/48`.
pub fn tetra_form_table(x: f64, parties: [&str; 2]) -> JointTable {
    let mut probs = Vec::with_capacity(16);
    for k in 0..4 {
        for l in 0..4 {
            probs.push(if k == l { x / 16.0 } else { (4.0 - x) / 48.0 });
        }
    }
    let labels = crate::qmath::letter_labels(4);
    JointTable::new(
        parties.iter().map(|s| s.to_string()).collect(),
        vec![labels.clone(), labels],
        probs,
    )
    .expect("tetrahedron-form table is valid")
}

/// Alice–Bob outcome probabilities `p_kl`.
pub fn joint_probs_ab(eps: NoiseParameter) -> JointTable {
    tetra_form_table(eps.value(), ["alice", "bob"])
}

/// Linear-inversion reconstruction `ρ = Σ_kl (6P_k − 1) p_kl (6Q_l − 1)`.
///
/// The result is Hermitian but not forced positive; check
/// [`DensityOperator::min_eigenvalue`] on empirical input.
pub fn reconstruct_state(table: &JointTable) -> Result<DensityOperator> {
    if table.shape() != [4, 4] {
        return Err(Error::MalformedTable(format!(
            "expected a 4x4 table, got shape {:?}",
            table.shape()
        )));
    }
    if !table.is_normalized() {
        return Err(Error::Unnormalized(table.total()));
    }
    let povm = tetra_povm();
    let dual: Vec<CMatrix> = povm
        .elements()
        .iter()
        .map(|p| p * r(6.0) - identity(2))
        .collect();
    let mut rho = CMatrix::zeros(4, 4);
    for k in 0..4 {
        for l in 0..4 {
            rho += kron(&dual[k], &dual[l]) * r(table.get(&[k, l])?);
        }
    }
    DensityOperator::hermitian(rho)
}

/// `(1−ε/4)·log₂[(4−ε)/3] + (ε/4)·log₂ε`.
pub fn accessible_info_ab(eps: NoiseParameter) -> f64 {
    let e = eps.value();
    (1.0 - e / 4.0) * ((4.0 - e) / 3.0).log2() + xlog2x(e) / 4.0
}

/// Mutual information in bits of a normalized two-party table.
pub fn mutual_information(table: &JointTable) -> Result<f64> {
    if table.parties().len() != 2 {
        return Err(Error::MalformedTable(format!(
            "mutual information needs two parties, got {}",
            table.parties().len()
        )));
    }
    mutual_information_between(table, &[0], &[1])
}

/// Mutual information in bits between two disjoint groups of axes.
pub fn mutual_information_between(table: &JointTable, left: &[usize], right: &[usize]) -> Result<f64> {
    if !table.is_normalized() {
        return Err(Error::Unnormalized(table.total()));
    }
    let axes: Vec<usize> = left.iter().chain(right).copied().collect();
    let joint = table.marginal(&axes)?;
    let shape = joint.shape();
    let nl: usize = shape[..left.len()].iter().product();
    let nr: usize = shape[left.len()..].iter().product();
    let p = joint.probs();
    let mut pl = vec![0.0; nl];
    let mut pr = vec![0.0; nr];
    for i in 0..nl {
        for j in 0..nr {
            pl[i] += p[i * nr + j];
            pr[j] += p[i * nr + j];
        }
    }
    let mut info = 0.0;
    for i in 0..nl {
        for j in 0..nr {
            let pij = p[i * nr + j];
            if pij > 0.0 {
                info += pij * (pij / (pl[i] * pr[j])).log2();
            }
        }
    }
    Ok(info.max(0.0))
}
