//! Projective measurements, expectation values and equatorial correlators.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::state::{is_hermitian, DensityOperator, PartialTrace, SparseState, MAX_REDUCED_QUBITS};

/// Largest state (in qubits) a dense projective measurement may act on.
pub const MAX_MEASURED_QUBITS: usize = 8;
const PROJECTOR_TOLERANCE: f64 = 1e-10;

/// A complete set of orthogonal projectors with one real outcome label each.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    n_qubits: usize,
    projectors: Vec<DMatrix<Complex64>>,
    outcomes: Vec<f64>,
}

impl ProjectiveMeasurement {
    pub fn new(
        n_qubits: usize,
        projectors: Vec<DMatrix<Complex64>>,
        outcomes: Vec<f64>,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_MEASURED_QUBITS {
            return Err(Error::Size(format!(
                "measurements act on 1 to {MAX_MEASURED_QUBITS} qubits, got {n_qubits}"
            )));
        }
        if projectors.is_empty() || projectors.len() != outcomes.len() {
            return Err(Error::Operator(
                "need one outcome label per projector".into(),
            ));
        }
        let dim = 1usize << n_qubits;
        let mut total = DMatrix::<Complex64>::zeros(dim, dim);
        for p in &projectors {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "projector is {}x{}, expected {dim}x{dim}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if !is_hermitian(p, PROJECTOR_TOLERANCE) {
                return Err(Error::Operator("projector is not Hermitian".into()));
            }
            let sq = p * p;
            if (sq - p).iter().any(|z| z.norm() > PROJECTOR_TOLERANCE) {
                return Err(Error::Operator("projector is not idempotent".into()));
            }
            total += p;
        }
        let identity = DMatrix::<Complex64>::identity(dim, dim);
        if (total - identity).iter().any(|z| z.norm() > PROJECTOR_TOLERANCE) {
            return Err(Error::Operator("projectors do not sum to the identity".into()));
        }
        for (i, a) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(a) {
                return Err(Error::Operator(format!("outcome {a} listed twice")));
            }
        }
        Ok(Self {
            n_qubits,
            projectors,
            outcomes,
        })
    }

    /// Measures one qubit of an `n_qubits` array in the computational basis,
    /// reporting `a0` for `|0⟩` and `a1` for `|1⟩`.
    pub fn computational(n_qubits: usize, qubit: usize, a0: f64, a1: f64) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} out of range for {n_qubits} qubits"
            )));
        }
        if n_qubits > MAX_MEASURED_QUBITS {
            return Err(Error::Size(format!(
                "measurements act on at most {MAX_MEASURED_QUBITS} qubits"
            )));
        }
        let dim = 1usize << n_qubits;
        let shift = n_qubits - 1 - qubit;
        let proj = |value: usize| {
            DMatrix::from_fn(dim, dim, |r, c| {
                if r == c && (r >> shift) & 1 == value {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        Self::new(n_qubits, vec![proj(0), proj(1)], vec![a0, a1])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// The observable `Σ aᵢ Pᵢ`.
    pub fn observable(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        self.projectors
            .iter()
            .zip(&self.outcomes)
            .fold(DMatrix::zeros(dim, dim), |acc, (p, &a)| {
                acc + p * Complex64::new(a, 0.0)
            })
    }

    /// Outcome probabilities `⟨ψ|Pᵢ|ψ⟩` in projector order.
    pub fn probabilities(&self, state: &SparseState) -> Result<Vec<f64>> {
        let psi = self.dense_input(state)?;
        Ok(self
            .projectors
            .iter()
            .map(|p| {
                let projected = p * &psi;
                projected.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .collect())
    }

    fn dense_input(&self, state: &SparseState) -> Result<nalgebra::DVector<Complex64>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "measurement on {} qubits applied to {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(nalgebra::DVector::from_vec(state.to_dense()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: f64,
    pub probability: f64,
    pub post_state: SparseState,
}

/// Samples one outcome and collapses the state onto the matching projector.
pub fn measure<R: Rng + ?Sized>(
    state: &SparseState,
    m: &ProjectiveMeasurement,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let psi = m.dense_input(state)?;
    let projected: Vec<_> = m.projectors.iter().map(|p| p * &psi).collect();
    let probs: Vec<f64> = projected
        .iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            chosen = i;
            break;
        }
    }
    // Rounding can leave u just above the cumulative total; fall back to the
    // last branch with support.
    while probs[chosen] <= 0.0 {
        if chosen == 0 {
            return Err(Error::Internal("no outcome with nonzero probability".into()));
        }
        chosen -= 1;
    }
    let p = probs[chosen];
    let scale = 1.0 / p.sqrt();
    let post = SparseState::normalized(
        state.n_qubits(),
        projected[chosen]
            .iter()
            .enumerate()
            .map(|(i, &z)| (i as u64, z * scale)),
    )?;
    Ok(MeasurementRecord {
        outcome: m.outcomes[chosen],
        probability: p,
        post_state: post,
    })
}

/// `tr(ρ·O)` for a Hermitian observable.
pub fn expectation(rho: &DensityOperator, observable: &DMatrix<Complex64>) -> Result<f64> {
    let dim = rho.dim();
    if observable.nrows() != dim || observable.ncols() != dim {
        return Err(Error::Dimension(format!(
            "observable is {}x{}, state dimension is {dim}",
            observable.nrows(),
            observable.ncols()
        )));
    }
    if !is_hermitian(observable, 1e-10) {
        return Err(Error::Operator("observable is not Hermitian".into()));
    }
    let m = rho.matrix();
    let mut sum = Complex64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            sum += m[(r, c)] * observable[(c, r)];
        }
    }
    if sum.im.abs() > 1e-10 {
        return Err(Error::Internal(format!(
            "expectation has imaginary part {}",
            sum.im
        )));
    }
    Ok(sum.re)
}

/// Measurement direction `cos φ·σx + sin φ·σy` in the x–y plane of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct EquatorialSetting(pub f64);

impl EquatorialSetting {
    pub fn angle(self) -> f64 {
        self.0
    }

    /// The angle folded into `[0, 2π)`.
    pub fn normalized(self) -> f64 {
        self.0.rem_euclid(TAU)
    }

    pub fn observable(self) -> DMatrix<Complex64> {
        let (s, c) = self.0.sin_cos();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(c, -s),
                Complex64::new(c, s),
                Complex64::new(0.0, 0.0),
            ],
        )
    }
}

/// The entries `ρ[r][r̄]` coupling each basis index with its bitwise complement.
///
/// Equatorial observables are purely off-diagonal, so a tensor product of
/// them only sees these entries.
pub(crate) fn anti_diagonal(rho: &DensityOperator) -> Vec<Complex64> {
    let dim = rho.dim();
    (0..dim).map(|r| rho.get(r, dim - 1 - r)).collect()
}

/// Evaluates `Σ_r a[r]·exp(i Σ_k ±φ_k)` where the sign is `+` when qubit k
/// of `r` is `|0⟩`.
#[inline]
pub(crate) fn correlator_from_anti_diagonal(anti: &[Complex64], n: usize, angles: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (r, a) in anti.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let mut phase = 0.0;
        for (k, &phi) in angles.iter().enumerate() {
            if (r >> (n - 1 - k)) & 1 == 0 {
                phase += phi;
            } else {
                phase -= phi;
            }
        }
        let (s, c) = phase.sin_cos();
        sum += a.re * c - a.im * s;
    }
    sum
}

/// `⟨⊗ₖ (cos φₖ σx + sin φₖ σy)⟩` on a state of `settings.len()` qubits.
pub fn correlator(rho: &DensityOperator, settings: &[EquatorialSetting]) -> Result<f64> {
    let n = rho.n_qubits();
    if settings.len() != n {
        return Err(Error::Dimension(format!(
            "{} settings for a {n}-qubit state",
            settings.len()
        )));
    }
    if n > MAX_REDUCED_QUBITS {
        return Err(Error::Size(format!(
            "correlators use at most {MAX_REDUCED_QUBITS} parties"
        )));
    }
    let angles: Vec<f64> = settings.iter().map(|s| s.0).collect();
    Ok(correlator_from_anti_diagonal(&anti_diagonal(rho), n, &angles))
}

/// Joint distribution of the ±1 outcomes of per-qubit equatorial measurements.
///
/// Index `s` of the result encodes the outcome vector with bit k (qubit 0
/// leftmost) set when qubit k reads `−1`.
pub fn outcome_distribution(rho: &DensityOperator, settings: &[EquatorialSetting]) -> Result<Vec<f64>> {
    let n = rho.n_qubits();
    if settings.len() != n {
        return Err(Error::Dimension(format!(
            "{} settings for a {n}-qubit state",
            settings.len()
        )));
    }
    let dim = 1usize << n;
    let phases: Vec<Complex64> = settings
        .iter()
        .map(|s| Complex64::from_polar(1.0, s.0))
        .collect();
    let norm = 1.0 / dim as f64;
    let m = rho.matrix();
    let mut out = Vec::with_capacity(dim);
    for s in 0..dim {
        // eigenvector of outcome ±1 on qubit k is (|0⟩ ± e^{iφ}|1⟩)/√2
        let v: Vec<Complex64> = (0..dim)
            .map(|b| {
                let mut amp = Complex64::new(1.0, 0.0);
                for k in 0..n {
                    let shift = n - 1 - k;
                    if (b >> shift) & 1 == 1 {
                        amp *= phases[k];
                        if (s >> shift) & 1 == 1 {
                            amp = -amp;
                        }
                    }
                }
                amp
            })
            .collect();
        let mut p = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            let mut row = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                row += m[(r, c)] * v[c];
            }
            p += v[r].conj() * row;
        }
        out.push((p.re * norm).max(0.0));
    }
    Ok(out)
}

/// Source of freshly prepared copies of a memory array.
pub trait PreparationOracle: Sync {
    /// Prepares one fresh copy.
    fn prepare(&self) -> SparseState;
}

impl<F> PreparationOracle for F
where
    F: Fn() -> SparseState + Sync,
{
    fn prepare(&self) -> SparseState {
        self()
    }
}

impl PreparationOracle for SparseState {
    fn prepare(&self) -> SparseState {
        self.clone()
    }
}

/// Estimates a correlator from `shots` single-shot measurements on a reduced state.
///
/// Each shot is one draw of the joint ±1 outcome vector; only the parity of
/// that vector enters the estimate, so the number of `+1` products is drawn
/// from its binomial law directly.
pub fn sample_correlator_reduced<R: Rng + ?Sized>(
    rho: &DensityOperator,
    settings: &[EquatorialSetting],
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Range("shots must be positive".into()));
    }
    let dist = outcome_distribution(rho, settings)?;
    let p_plus: f64 = dist
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() % 2 == 0)
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let plus = Binomial::new(shots, p_plus)
        .map_err(|e| Error::Internal(format!("binomial sampler: {e}")))?
        .sample(rng);
    Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
}

/// Estimates a correlator on `subset` from `shots` identically prepared copies.
///
/// The copies are indistinguishable, so the oracle is asked for one
/// representative; every shot still stands for one consumed copy.
pub fn sample_correlator<O, R>(
    oracle: &O,
    subset: &[usize],
    settings: &[EquatorialSetting],
    shots: u64,
    rng: &mut R,
) -> Result<f64>
where
    O: PreparationOracle + ?Sized,
    R: Rng + ?Sized,
{
    let rho = oracle.prepare().partial_trace(subset)?;
    sample_correlator_reduced(&rho, settings, shots, rng)
}
