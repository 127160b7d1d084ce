//! Sparse pure states of qubit arrays and small dense density operators.
//!
//! Qubit 0 is the leftmost character of a basis label, so the label `011`
//! on three qubits has qubit 0 in `|0⟩` and qubits 1, 2 in `|1⟩`. Internally
//! a label is the integer whose binary expansion is the label read left to
//! right, which makes numeric order and lexicographic order coincide.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Largest array a [`SparseState`] may describe.
pub const MAX_QUBITS: usize = 30;
/// Largest state that may be expanded into a dense vector or density matrix.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest subsystem a partial trace may keep.
pub const MAX_REDUCED_QUBITS: usize = 6;
/// Amplitudes below this magnitude are dropped from sparse storage.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Tolerance for normalization and trace checks.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Tolerance for Hermiticity of density operators.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Smallest eigenvalue tolerated when validating positivity.
pub const PSD_TOLERANCE: f64 = 1e-10;

fn check_qubits(n: usize, limit: usize, what: &str) -> Result<()> {
    if n == 0 || n > limit {
        return Err(Error::Size(format!(
            "{what} needs between 1 and {limit} qubits, got {n}"
        )));
    }
    Ok(())
}

#[inline]
fn bit_of(index: u64, n_qubits: usize, qubit: usize) -> u64 {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// A computational basis label on a fixed number of qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    n_qubits: usize,
    index: u64,
}

impl BasisLabel {
    pub fn new(n_qubits: usize, index: u64) -> Result<Self> {
        check_qubits(n_qubits, MAX_QUBITS, "basis label")?;
        if index >> n_qubits != 0 {
            return Err(Error::Index(format!(
                "basis index {index} does not fit in {n_qubits} qubits"
            )));
        }
        Ok(Self { n_qubits, index })
    }

    /// Label with `|1⟩` exactly on the given qubits.
    pub fn from_ones(n_qubits: usize, ones: &[usize]) -> Result<Self> {
        check_qubits(n_qubits, MAX_QUBITS, "basis label")?;
        let mut index = 0u64;
        for &q in ones {
            if q >= n_qubits {
                return Err(Error::Index(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            index |= 1 << (n_qubits - 1 - q);
        }
        Ok(Self { n_qubits, index })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn bit(&self, qubit: usize) -> bool {
        bit_of(self.index, self.n_qubits, qubit) == 1
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.bit(q)).collect()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut index = 0u64;
        for c in s.chars() {
            index = match c {
                '0' => index << 1,
                '1' => (index << 1) | 1,
                other => {
                    return Err(Error::parse(0, format!("invalid label character {other:?}")))
                }
            };
        }
        BasisLabel::new(s.len(), index)
    }
}

/// A normalized pure state stored as a map from basis labels to amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n_qubits: usize,
    amplitudes: BTreeMap<u64, Amplitude>,
}

impl SparseState {
    /// The all-zeros product state `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        let label = BasisLabel::new(n_qubits, index)?;
        Ok(Self {
            n_qubits,
            amplitudes: BTreeMap::from([(label.index, Amplitude::new(1.0, 0.0))]),
        })
    }

    /// Builds a state from `(index, amplitude)` pairs.
    ///
    /// Repeated indices are summed, tiny amplitudes are pruned and the
    /// result must already be normalized.
    pub fn from_amplitudes<I>(n_qubits: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Amplitude)>,
    {
        let state = Self::collect(n_qubits, entries)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization(format!(
                "squared norm is {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Like [`SparseState::from_amplitudes`] but rescales to unit norm.
    pub fn normalized<I>(n_qubits: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Amplitude)>,
    {
        let mut state = Self::collect(n_qubits, entries)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization("state has zero norm".into()));
        }
        for a in state.amplitudes.values_mut() {
            *a /= norm;
        }
        state.prune();
        Ok(state)
    }

    fn collect<I>(n_qubits: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Amplitude)>,
    {
        check_qubits(n_qubits, MAX_QUBITS, "state")?;
        let mut amplitudes = BTreeMap::new();
        for (index, amp) in entries {
            if index >> n_qubits != 0 {
                return Err(Error::Index(format!(
                    "basis index {index} does not fit in {n_qubits} qubits"
                )));
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::Normalization(format!(
                    "non-finite amplitude at index {index}"
                )));
            }
            *amplitudes.entry(index).or_insert(Amplitude::new(0.0, 0.0)) += amp;
        }
        let mut state = Self {
            n_qubits,
            amplitudes,
        };
        state.prune();
        Ok(state)
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn from_dense(n_qubits: usize, amplitudes: &[Amplitude]) -> Result<Self> {
        check_qubits(n_qubits, MAX_DENSE_QUBITS, "dense state")?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Dimension(format!(
                "dense vector has {} entries, expected {}",
                amplitudes.len(),
                1u64 << n_qubits
            )));
        }
        Self::from_amplitudes(
            n_qubits,
            amplitudes.iter().enumerate().map(|(i, &a)| (i as u64, a)),
        )
    }

    pub fn to_dense(&self) -> Result<Vec<Amplitude>> {
        check_qubits(self.n_qubits, MAX_DENSE_QUBITS, "dense state")?;
        let mut out = vec![Amplitude::new(0.0, 0.0); 1 << self.n_qubits];
        for (&i, &a) in &self.amplitudes {
            out[i as usize] = a;
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn support_size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, index: u64) -> Amplitude {
        self.amplitudes
            .get(&index)
            .copied()
            .unwrap_or(Amplitude::new(0.0, 0.0))
    }

    pub fn amplitude_of(&self, label: &BasisLabel) -> Amplitude {
        if label.n_qubits != self.n_qubits {
            return Amplitude::new(0.0, 0.0);
        }
        self.amplitude(label.index)
    }

    /// Stored entries in label order.
    pub fn iter(&self) -> impl Iterator<Item = (BasisLabel, Amplitude)> + '_ {
        let n_qubits = self.n_qubits;
        self.amplitudes
            .iter()
            .map(move |(&index, &a)| (BasisLabel { n_qubits, index }, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `|self⟩ ⊗ |other⟩`, with `self` occupying the leading qubits.
    pub fn tensor(&self, other: &SparseState) -> Result<SparseState> {
        let n_qubits = self.n_qubits + other.n_qubits;
        check_qubits(n_qubits, MAX_QUBITS, "tensor product")?;
        let mut amplitudes = BTreeMap::new();
        for (&i, &a) in &self.amplitudes {
            for (&j, &b) in &other.amplitudes {
                amplitudes.insert((i << other.n_qubits) | j, a * b);
            }
        }
        let mut out = SparseState {
            n_qubits,
            amplitudes,
        };
        out.prune();
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> Result<Amplitude> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        let (small, large, conj_small) = if self.amplitudes.len() <= other.amplitudes.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut sum = Amplitude::new(0.0, 0.0);
        for (i, &a) in &small.amplitudes {
            if let Some(&b) = large.amplitudes.get(i) {
                sum += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(sum)
    }

    /// `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn to_density(&self) -> Result<DensityOperator> {
        check_qubits(self.n_qubits, MAX_DENSE_QUBITS, "density operator")?;
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (&r, &a) in &self.amplitudes {
            for (&c, &b) in &self.amplitudes {
                m[(r as usize, c as usize)] = a * b.conj();
            }
        }
        Ok(DensityOperator {
            n_qubits: self.n_qubits,
            matrix: m,
        })
    }

    /// Debug dump: one `label re im` line per stored amplitude, in label order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (label, a) in self.iter() {
            out.push_str(&format!("{label} {} {}\n", fmt_real(a.re), fmt_real(a.im)));
        }
        out
    }
}

/// Shortest round-trip representation with negative zero folded to zero.
pub(crate) fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// A Hermitian, trace-one, positive semidefinite operator on a few qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates and wraps a dense matrix.
    pub fn from_matrix(n_qubits: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(n_qubits, MAX_DENSE_QUBITS, "density operator")?;
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Operator("matrix has non-finite entries".into()));
        }
        if !is_hermitian(&matrix, HERMITIAN_TOLERANCE) {
            return Err(Error::Operator("matrix is not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOLERANCE || trace.im.abs() > NORM_TOLERANCE {
            return Err(Error::Normalization(format!("trace is {trace}, expected 1")));
        }
        let min_eigen = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eigen < -PSD_TOLERANCE {
            return Err(Error::Operator(format!(
                "matrix has negative eigenvalue {min_eigen}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: DMatrix<Complex64>) -> Self {
        Self { n_qubits, matrix }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits, MAX_DENSE_QUBITS, "density operator")?;
        let dim = 1usize << n_qubits;
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        Ok(Self {
            n_qubits,
            matrix: m,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let mut sum = 0.0;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                sum += (self.matrix[(r, c)] * self.matrix[(c, r)]).re;
            }
        }
        sum
    }

    /// Convex combination `Σ pᵢ ρᵢ`.
    pub fn mixture(states: &[DensityOperator], probs: &[f64]) -> Result<DensityOperator> {
        if states.is_empty() {
            return Err(Error::Probability("mixture of zero states".into()));
        }
        if states.len() != probs.len() {
            return Err(Error::Probability(format!(
                "{} states but {} weights",
                states.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Probability("weights must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Probability(format!("weights sum to {total}, expected 1")));
        }
        let n_qubits = states[0].n_qubits;
        if states.iter().any(|s| s.n_qubits != n_qubits) {
            return Err(Error::Dimension("mixture of operators with different sizes".into()));
        }
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (s, &p) in states.iter().zip(probs) {
            m += &s.matrix * Complex64::new(p, 0.0);
        }
        Ok(Self {
            n_qubits,
            matrix: m,
        })
    }
}

pub(crate) fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Reduction to a subset of qubits.
pub trait PartialTrace {
    /// Traces out every qubit not in `keep`; the kept qubits appear in the
    /// order given, with `keep[0]` as the leading qubit of the result.
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator>;
}

fn validate_keep(n_qubits: usize, keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::Index("partial trace must keep at least one qubit".into()));
    }
    if keep.len() > MAX_REDUCED_QUBITS {
        return Err(Error::Size(format!(
            "partial trace keeps {} qubits, limit is {MAX_REDUCED_QUBITS}",
            keep.len()
        )));
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::Index(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if keep[..i].contains(&q) {
            return Err(Error::Index(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Splits a full index into (kept sub-index, remaining bits).
#[inline]
fn split_index(index: u64, n_qubits: usize, keep: &[usize], keep_mask: u64) -> (usize, u64) {
    let mut sub = 0usize;
    for &q in keep {
        sub = (sub << 1) | bit_of(index, n_qubits, q) as usize;
    }
    (sub, index & !keep_mask)
}

fn keep_mask(n_qubits: usize, keep: &[usize]) -> u64 {
    keep.iter().fold(0, |m, &q| m | 1 << (n_qubits - 1 - q))
}

impl PartialTrace for SparseState {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        validate_keep(self.n_qubits, keep)?;
        let mask = keep_mask(self.n_qubits, keep);
        let mut groups: BTreeMap<u64, Vec<(usize, Amplitude)>> = BTreeMap::new();
        for (&i, &a) in &self.amplitudes {
            let (sub, rest) = split_index(i, self.n_qubits, keep, mask);
            groups.entry(rest).or_default().push((sub, a));
        }
        let dim = 1usize << keep.len();
        let mut m = DMatrix::zeros(dim, dim);
        for group in groups.values() {
            for &(r, a) in group {
                for &(c, b) in group {
                    m[(r, c)] += a * b.conj();
                }
            }
        }
        Ok(DensityOperator::from_matrix_unchecked(keep.len(), m))
    }
}

impl PartialTrace for DensityOperator {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        validate_keep(self.n_qubits, keep)?;
        let n = self.n_qubits;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let scatter = |sub: usize, qubits: &[usize]| -> usize {
            let k = qubits.len();
            qubits.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                acc | (((sub >> (k - 1 - pos)) & 1) << (n - 1 - q))
            })
        };
        let dim = 1usize << keep.len();
        let mut m = DMatrix::zeros(dim, dim);
        for e in 0..1usize << traced.len() {
            let rest = scatter(e, &traced);
            for r in 0..dim {
                let full_r = rest | scatter(r, keep);
                for c in 0..dim {
                    m[(r, c)] += self.matrix[(full_r, rest | scatter(c, keep))];
                }
            }
        }
        Ok(DensityOperator::from_matrix_unchecked(keep.len(), m))
    }
}

pub fn new_zero_state(n_qubits: usize) -> Result<SparseState> {
    SparseState::zero(n_qubits)
}

pub fn tensor(a: &SparseState, b: &SparseState) -> Result<SparseState> {
    a.tensor(b)
}

pub fn inner(a: &SparseState, b: &SparseState) -> Result<Amplitude> {
    a.inner(b)
}

pub fn to_density(s: &SparseState) -> Result<DensityOperator> {
    s.to_density()
}

pub fn mixture(states: &[DensityOperator], probs: &[f64]) -> Result<DensityOperator> {
    DensityOperator::mixture(states, probs)
}

pub fn partial_trace<T: PartialTrace + ?Sized>(
    state: &T,
    keep: &[usize],
) -> Result<DensityOperator> {
    state.partial_trace(keep)
}
