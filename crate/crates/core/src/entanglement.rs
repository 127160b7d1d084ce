//! GHZ and singlet states, and the Svetlichny witness for genuine
//! N-partite entanglement.
//!
//! The witness is built from the Mermin–Klyshko recursion
//! `S_N = M_{N−1}(A_N + A′_N) + M′_{N−1}(A_N − A′_N)` where
//! `M_{N−1} + i·M′_{N−1} = (−i)^{N−2} ∏_{k<N} (A_k + i·A′_k)`.
//! Expanded, every one of the `2^N` primed/unprimed setting choices
//! carries a ±1 coefficient. For two parties this is the CHSH combination
//! `E(ab) + E(ab′) + E(a′b) − E(a′b′)`; for three it is
//!
//! ```text
//! E(a′bc) + E(ab′c) + E(abc′) − E(a′b′c′) + E(ab′c′) + E(a′bc′) + E(a′b′c) − E(abc)
//! ```
//!
//! Biseparable states satisfy `|S_N| ≤ 2^(N−1)`; quantum states reach at
//! most `2^(N−1)·√2`, attained by `GHZ_N`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{anti_diagonal, correlator_from_anti_diagonal, EquatorialSetting};
use crate::state::{DensityOperator, SparseState, MAX_QUBITS, MAX_REDUCED_QUBITS};

/// Default relative violation margin in exact mode.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Default number of optimizer restarts.
pub const DEFAULT_RESTARTS: usize = 32;
/// Convergence tolerance on the witness value between coordinate sweeps.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const MAX_SWEEPS: usize = 2000;

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn make_ghz(n: usize) -> Result<SparseState> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::Range(format!(
            "GHZ states need 2 to {MAX_QUBITS} qubits, got {n}"
        )));
    }
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    SparseState::from_amplitudes(n, [(0, amp), ((1u64 << n) - 1, amp)])
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn make_singlet() -> SparseState {
    SparseState::from_amplitudes(
        2,
        [
            (0b01, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (0b10, Complex64::new(-FRAC_1_SQRT_2, 0.0)),
        ],
    )
    .expect("singlet is normalized")
}

/// One `(unprimed, primed)` equatorial setting pair per party.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvetlichnySettings {
    pub pairs: Vec<(EquatorialSetting, EquatorialSetting)>,
}

impl SvetlichnySettings {
    pub fn new(pairs: Vec<(EquatorialSetting, EquatorialSetting)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Range("Svetlichny settings need at least two parties".into()));
        }
        Ok(Self { pairs })
    }

    fn from_angles(angles: &[f64]) -> Self {
        Self {
            pairs: angles
                .chunks_exact(2)
                .map(|p| (EquatorialSetting(p[0].rem_euclid(TAU)), EquatorialSetting(p[1].rem_euclid(TAU))))
                .collect(),
        }
    }

    pub fn n_parties(&self) -> usize {
        self.pairs.len()
    }

    /// Settings for one term: party k uses its primed angle when bit k of
    /// `mask` (party 0 leftmost) is set.
    pub fn choose(&self, mask: usize) -> Vec<EquatorialSetting> {
        let n = self.pairs.len();
        self.pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, a_prime))| if (mask >> (n - 1 - k)) & 1 == 1 { a_prime } else { a })
            .collect()
    }
}

/// ±1 coefficient of every setting combination, indexed like
/// [`SvetlichnySettings::choose`].
pub fn svetlichny_coefficients(n: usize) -> Vec<i8> {
    assert!(n >= 2, "Svetlichny polynomial needs at least two parties");
    // i^m contributes (Re + Im) for an unprimed last party, (Re − Im) for a primed one.
    const UNPRIMED: [i8; 4] = [1, 1, -1, -1];
    const PRIMED: [i8; 4] = [1, -1, -1, 1];
    (0..1usize << n)
        .map(|mask| {
            let leading_primes = (mask >> 1).count_ones() as i64;
            let m = (leading_primes + 2 - n as i64).rem_euclid(4) as usize;
            if mask & 1 == 1 {
                PRIMED[m]
            } else {
                UNPRIMED[m]
            }
        })
        .collect()
}

pub fn biseparable_bound(n: usize) -> f64 {
    (1u64 << (n - 1)) as f64
}

pub fn quantum_max(n: usize) -> f64 {
    biseparable_bound(n) * SQRT_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvetlichnyResult {
    pub n_parties: usize,
    pub value: f64,
    pub biseparable_bound: f64,
    pub quantum_max: f64,
    pub margin: f64,
    pub violated: bool,
    pub settings: SvetlichnySettings,
}

impl SvetlichnyResult {
    pub(crate) fn new(value: f64, margin: f64, settings: SvetlichnySettings) -> Self {
        let n = settings.n_parties();
        let bound = biseparable_bound(n);
        Self {
            n_parties: n,
            value,
            biseparable_bound: bound,
            quantum_max: quantum_max(n),
            margin,
            violated: value.abs() > bound * (1.0 + margin),
            settings,
        }
    }
}

fn check_parties(rho: &DensityOperator) -> Result<usize> {
    let n = rho.n_qubits();
    if !(2..=MAX_REDUCED_QUBITS).contains(&n) {
        return Err(Error::Dimension(format!(
            "Svetlichny witness needs 2 to {MAX_REDUCED_QUBITS} parties, got {n}"
        )));
    }
    Ok(n)
}

/// Witness evaluation on a fixed state for arbitrary angle vectors
/// `[a₀, a′₀, a₁, a′₁, …]`.
struct Objective {
    n: usize,
    anti: Vec<Complex64>,
    coefficients: Vec<i8>,
}

impl Objective {
    fn new(rho: &DensityOperator) -> Result<Self> {
        let n = check_parties(rho)?;
        Ok(Self {
            n,
            anti: anti_diagonal(rho),
            coefficients: svetlichny_coefficients(n),
        })
    }

    /// True when every equatorial correlator of the state vanishes.
    fn is_identically_zero(&self) -> bool {
        self.anti.iter().all(|a| a.norm() < 1e-14)
    }

    fn value(&self, angles: &[f64]) -> f64 {
        let n = self.n;
        let mut chosen = vec![0.0; n];
        let mut total = 0.0;
        for (mask, &coef) in self.coefficients.iter().enumerate() {
            for (k, slot) in chosen.iter_mut().enumerate() {
                let primed = (mask >> (n - 1 - k)) & 1;
                *slot = angles[2 * k + primed];
            }
            total += coef as f64 * correlator_from_anti_diagonal(&self.anti, n, &chosen);
        }
        total
    }

    /// Coordinate ascent from `start`; each angle update is the exact
    /// maximizer of `A cos θ + B sin θ + C`.
    fn ascend(&self, mut angles: Vec<f64>, tolerance: f64) -> (f64, Vec<f64>) {
        let mut current = self.value(&angles);
        for _ in 0..MAX_SWEEPS {
            let before = current;
            for i in 0..angles.len() {
                angles[i] = 0.0;
                let f0 = self.value(&angles);
                angles[i] = PI;
                let f_pi = self.value(&angles);
                angles[i] = FRAC_PI_2;
                let f_half = self.value(&angles);
                let offset = 0.5 * (f0 + f_pi);
                let a = 0.5 * (f0 - f_pi);
                let b = f_half - offset;
                angles[i] = b.atan2(a);
                current = offset + a.hypot(b);
            }
            if current - before <= tolerance {
                break;
            }
        }
        (self.value(&angles), angles)
    }
}

/// The witness value `S_N(ρ)` for explicit settings.
pub fn svetlichny_value(rho: &DensityOperator, settings: &SvetlichnySettings) -> Result<f64> {
    let objective = Objective::new(rho)?;
    if settings.n_parties() != objective.n {
        return Err(Error::Dimension(format!(
            "{} setting pairs for a {}-qubit state",
            settings.n_parties(),
            objective.n
        )));
    }
    let angles: Vec<f64> = settings
        .pairs
        .iter()
        .flat_map(|&(a, b)| [a.0, b.0])
        .collect();
    Ok(objective.value(&angles))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub tolerance: f64,
    pub margin: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            tolerance: DEFAULT_TOLERANCE,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Maximizes `|S_N|` over equatorial settings by multi-start coordinate ascent.
///
/// Shifting both angles of one party by π negates every term, so maximizing
/// the signed value maximizes its magnitude. Restarts draw their starting
/// points from per-restart generators seeded by `rng`, which keeps results
/// independent of the thread count.
pub fn max_svetlichny<R: Rng + ?Sized>(
    rho: &DensityOperator,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<SvetlichnyResult> {
    let objective = Objective::new(rho)?;
    let n = objective.n;
    if objective.is_identically_zero() {
        let zeros = vec![0.0; 2 * n];
        return Ok(SvetlichnyResult::new(0.0, config.margin, SvetlichnySettings::from_angles(&zeros)));
    }
    let seeds: Vec<u64> = (0..config.restarts.max(1)).map(|_| rng.random()).collect();
    let runs: Vec<(f64, Vec<f64>)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut local = ChaCha8Rng::seed_from_u64(seed);
            let start: Vec<f64> = (0..2 * n).map(|_| local.random::<f64>() * TAU).collect();
            objective.ascend(start, config.tolerance)
        })
        .collect();
    let (value, angles) = runs
        .into_iter()
        .fold(None::<(f64, Vec<f64>)>, |best, run| match best {
            Some(b) if b.0 >= run.0 => Some(b),
            _ => Some(run),
        })
        .expect("at least one restart");
    Ok(SvetlichnyResult::new(value, config.margin, SvetlichnySettings::from_angles(&angles)))
}

/// Decides genuine N-partite entanglement by witness violation.
pub fn is_genuinely_entangled<R: Rng + ?Sized>(
    rho: &DensityOperator,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<(bool, SvetlichnyResult)> {
    let result = max_svetlichny(rho, config, rng)?;
    Ok((result.violated, result))
}

/// Settings maximizing the witness on `GHZ_N`.
///
/// On `GHZ_N` every correlator is `cos(Σφ)`; with unprimed angles 0 and
/// primed angles π/2 the terms with `j` primes contribute `cos(jπ/2)`, and
/// a common offset on party 0 rotates the sum onto its maximum.
pub fn ghz_optimal_settings(n: usize) -> Result<SvetlichnySettings> {
    if !(2..=MAX_REDUCED_QUBITS).contains(&n) {
        return Err(Error::Range(format!(
            "GHZ settings need 2 to {MAX_REDUCED_QUBITS} parties, got {n}"
        )));
    }
    let coefficients = svetlichny_coefficients(n);
    // Σ_mask c·e^{i j(mask) π/2} = R·e^{iψ}; choosing offset −ψ makes the sum real and maximal.
    let mut sum = Complex64::new(0.0, 0.0);
    for (mask, &c) in coefficients.iter().enumerate() {
        let j = mask.count_ones() as f64;
        sum += Complex64::from_polar(c as f64, j * FRAC_PI_2);
    }
    let offset = -sum.arg();
    let mut angles = vec![0.0; 2 * n];
    for k in 0..n {
        angles[2 * k + 1] = FRAC_PI_2;
    }
    angles[0] += offset;
    angles[1] += offset;
    Ok(SvetlichnySettings::from_angles(&angles))
}
