//! Shape retrieval from entangled memories by witness testing of qubit subsets.
//!
//! Every candidate subset of the array is reduced to its marginal state and
//! tested for genuine multipartite entanglement. Subsets holding exactly the
//! vertices of one stored shape carry a GHZ marginal and violate the
//! Svetlichny bound; any other subset is biseparable or classical and does
//! not.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::{
    ghz_optimal_settings, max_svetlichny, svetlichny_coefficients, OptimizerConfig,
    SvetlichnyResult, SvetlichnySettings, DEFAULT_MARGIN, DEFAULT_RESTARTS, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::image::{Grid, ShapeHeader};
use crate::measurement::{sample_correlator_reduced, PreparationOracle};
use crate::state::{PartialTrace, SparseState, MAX_REDUCED_QUBITS};

/// Probe levels used when no shape header is available.
pub const DEFAULT_PROBE_LEVELS: [usize; 4] = [5, 4, 3, 2];
/// Smallest shot count accepted per correlator. Shot mode widens the margin
/// to `5/√shots`; below 147 shots that pushes the threshold past the quantum
/// maximum `√2` times the bound and no shape could ever be detected.
pub const MIN_SHOTS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "shots", rename_all = "lowercase")]
pub enum RetrievalMode {
    Exact,
    Shots(u64),
}

/// Which subset sizes to probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbePlan {
    /// Per-shape vertex counts known in advance.
    Header(Vec<usize>),
    /// Subset sizes to try without knowing how many shapes exist.
    Levels(Vec<usize>),
}

impl ProbePlan {
    pub fn from_header(header: &ShapeHeader) -> Self {
        ProbePlan::Header(header.vertex_counts.clone())
    }

    /// Distinct subset sizes, largest first.
    pub fn levels(&self) -> Vec<usize> {
        let raw = match self {
            ProbePlan::Header(c) | ProbePlan::Levels(c) => c,
        };
        raw.iter().copied().sorted_unstable_by(|a, b| b.cmp(a)).dedup().collect()
    }
}

impl Default for ProbePlan {
    fn default() -> Self {
        ProbePlan::Levels(DEFAULT_PROBE_LEVELS.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub mode: RetrievalMode,
    pub plan: ProbePlan,
    pub margin: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Skip candidates that intersect shapes already found.
    pub skip_found: bool,
    pub workers: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            mode: RetrievalMode::Exact,
            plan: ProbePlan::default(),
            margin: DEFAULT_MARGIN,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            skip_found: true,
            workers: 1,
        }
    }
}

impl RetrievalConfig {
    /// Margin actually applied, widened in shot mode to cover sampling noise.
    pub fn effective_margin(&self) -> f64 {
        match self.mode {
            RetrievalMode::Exact => self.margin,
            RetrievalMode::Shots(s) => self.margin.max(5.0 / (s as f64).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetTest {
    pub subset: Vec<usize>,
    pub result: SvetlichnyResult,
    pub preparations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalReport {
    pub grid: Grid,
    pub mode: RetrievalMode,
    pub seed: u64,
    pub margin: f64,
    pub levels: Vec<usize>,
    pub found_shapes: Vec<Vec<usize>>,
    pub tests: Vec<SubsetTest>,
    pub total_preparations: u64,
    pub worst_case_bound: u128,
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn enumerate_candidates(n: usize, k: usize) -> Result<impl Iterator<Item = Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::Range(format!("cannot choose {k} of {n} qubits")));
    }
    Ok((0..n).combinations(k))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `∏ᵢ C(n − Σ_{j<i} Nⱼ, Nᵢ)`: the number of subset tests needed in the
/// worst case to place every shape in turn.
pub fn worst_case_arrays(n: usize, vertex_counts: &[usize]) -> Result<u128> {
    let total: usize = vertex_counts.iter().sum();
    if total > n || vertex_counts.contains(&0) {
        return Err(Error::Capacity(format!(
            "shapes with {vertex_counts:?} vertices do not fit in {n} qubits"
        )));
    }
    let mut remaining = n;
    let mut product = 1u128;
    for &c in vertex_counts {
        product = product
            .checked_mul(binomial(remaining, c))
            .ok_or_else(|| Error::Capacity("worst-case count overflows".into()))?;
        remaining -= c;
    }
    Ok(product)
}

fn subset_key(subset: &[usize]) -> u64 {
    subset.iter().fold(0u64, |m, &q| m | 1 << q)
}

fn intersects(subset: &[usize], found: &[Vec<usize>]) -> bool {
    found.iter().any(|s| s.iter().any(|q| subset.contains(q)))
}

struct Tester<'a> {
    state: Option<&'a SparseState>,
    oracle: &'a (dyn PreparationOracle + 'a),
    config: &'a RetrievalConfig,
    optimizer: OptimizerConfig,
    settings: Option<SvetlichnySettings>,
    coefficients: Vec<i8>,
}

impl Tester<'_> {
    fn test(&self, subset: &[usize]) -> Result<SubsetTest> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(subset_key(subset));
        match self.config.mode {
            RetrievalMode::Exact => {
                let state = self.state.expect("exact mode reads the state directly");
                let rho = state.partial_trace(subset)?;
                let result = max_svetlichny(&rho, &self.optimizer, &mut rng)?;
                Ok(SubsetTest {
                    subset: subset.to_vec(),
                    result,
                    preparations: 0,
                })
            }
            RetrievalMode::Shots(shots) => {
                let settings = self.settings.as_ref().expect("settings fixed per level");
                // one fresh array per shot; all copies are identical
                let rho = self.oracle.prepare().partial_trace(subset)?;
                let mut value = 0.0;
                for (mask, &c) in self.coefficients.iter().enumerate() {
                    let e = sample_correlator_reduced(&rho, &settings.choose(mask), shots, &mut rng)?;
                    value += c as f64 * e;
                }
                let combos = self.coefficients.len() as u64;
                Ok(SubsetTest {
                    subset: subset.to_vec(),
                    result: SvetlichnyResult::new(value, self.optimizer.margin, settings.clone()),
                    preparations: combos * shots,
                })
            }
        }
    }
}

/// Searches the array for shapes by testing candidate subsets, largest
/// probe level first.
pub fn find_shapes(
    oracle: &dyn PreparationOracle,
    grid: Grid,
    config: &RetrievalConfig,
) -> Result<RetrievalReport> {
    let n = grid.n_qubits();
    let levels = config.plan.levels();
    if levels.is_empty() {
        return Err(Error::Range("no vertex counts to probe".into()));
    }
    if let Some(&bad) = levels.iter().find(|&&l| !(2..=MAX_REDUCED_QUBITS).contains(&l)) {
        return Err(Error::Range(format!(
            "probe size {bad} outside 2..={MAX_REDUCED_QUBITS}"
        )));
    }
    if let RetrievalMode::Shots(s) = config.mode {
        if s < MIN_SHOTS {
            return Err(Error::Range(format!("shot mode needs at least {MIN_SHOTS} shots, got {s}")));
        }
    }
    let worst_case_bound = match &config.plan {
        ProbePlan::Header(counts) => {
            let mut sorted = counts.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            worst_case_arrays(n, &sorted)?
        }
        ProbePlan::Levels(_) => levels.iter().map(|&l| binomial(n, l)).sum(),
    };

    let exact_state = match config.mode {
        RetrievalMode::Exact => Some(oracle.prepare()),
        RetrievalMode::Shots(_) => None,
    };
    if let Some(s) = &exact_state {
        if s.n_qubits() != n {
            return Err(Error::Dimension(format!(
                "state has {} qubits, grid has {n}",
                s.n_qubits()
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let optimizer = OptimizerConfig {
        restarts: config.restarts,
        tolerance: DEFAULT_TOLERANCE,
        margin: config.effective_margin(),
    };

    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut tests = Vec::new();
    pool.install(|| -> Result<()> {
        for &level in &levels {
            if level > n {
                continue;
            }
            let tester = Tester {
                state: exact_state.as_ref(),
                oracle,
                config,
                optimizer,
                settings: match config.mode {
                    RetrievalMode::Shots(_) => Some(ghz_optimal_settings(level)?),
                    RetrievalMode::Exact => None,
                },
                coefficients: svetlichny_coefficients(level),
            };
            let above = found.clone();
            let candidates: Vec<Vec<usize>> = enumerate_candidates(n, level)?
                .filter(|c| !config.skip_found || !intersects(c, &above))
                .collect();

            let evaluated: Vec<Option<Result<SubsetTest>>> = if config.workers <= 1 {
                let mut level_found: Vec<Vec<usize>> = Vec::new();
                let mut out = Vec::with_capacity(candidates.len());
                for c in &candidates {
                    if config.skip_found && intersects(c, &level_found) {
                        out.push(None);
                        continue;
                    }
                    let t = tester.test(c);
                    if let Ok(t) = &t {
                        if t.result.violated {
                            level_found.push(t.subset.clone());
                        }
                    }
                    out.push(Some(t));
                }
                out
            } else {
                candidates.par_iter().map(|c| Some(tester.test(c))).collect()
            };

            // Sequential reducer: identical output for any worker count.
            for (candidate, outcome) in candidates.iter().zip(evaluated) {
                if config.skip_found && intersects(candidate, &found) {
                    continue;
                }
                let Some(test) = outcome else { continue };
                let test = test?;
                if test.result.violated {
                    if let Some(clash) = found.iter().find(|s| s.iter().any(|q| test.subset.contains(q))) {
                        return Err(Error::Consistency(format!(
                            "violating subsets {:?} and {:?} overlap",
                            clash, test.subset
                        )));
                    }
                    found.push(test.subset.clone());
                }
                tests.push(test);
            }
        }
        Ok(())
    })?;

    let total_preparations = tests.iter().map(|t: &SubsetTest| t.preparations).sum();
    Ok(RetrievalReport {
        grid,
        mode: config.mode,
        seed: config.seed,
        margin: config.effective_margin(),
        levels,
        found_shapes: found,
        tests,
        total_preparations,
        worst_case_bound,
    })
}

/// Vertex counts of the found shapes, sorted; positions and sizes are ignored.
pub fn recognize_scale_invariant(report: &RetrievalReport) -> Vec<usize> {
    report.found_shapes.iter().map(Vec::len).sorted_unstable().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemoryComparison {
    /// Multiset intersection of vertex counts.
    pub shared_counts: Vec<usize>,
    /// Both memories hold the same multiset of vertex counts.
    pub shape_similar: bool,
    /// Vertex sets found at the same positions in both memories.
    pub identical_shapes: Vec<Vec<usize>>,
    /// Same grid and the same vertex sets.
    pub identical: bool,
}

pub fn compare_memories(a: &RetrievalReport, b: &RetrievalReport) -> MemoryComparison {
    let ca = recognize_scale_invariant(a);
    let mut cb = recognize_scale_invariant(b);
    let mut shared = Vec::new();
    for c in &ca {
        if let Some(pos) = cb.iter().position(|x| x == c) {
            shared.push(*c);
            cb.remove(pos);
        }
    }
    let normalize = |r: &RetrievalReport| -> Vec<Vec<usize>> {
        r.found_shapes
            .iter()
            .map(|s| s.iter().copied().sorted_unstable().collect())
            .sorted()
            .collect()
    };
    let (sa, sb) = (normalize(a), normalize(b));
    let same_grid = a.grid == b.grid;
    let identical_shapes = if same_grid {
        sa.iter().filter(|s| sb.contains(s)).cloned().collect()
    } else {
        Vec::new()
    };
    MemoryComparison {
        shape_similar: ca == recognize_scale_invariant(b),
        shared_counts: shared,
        identical: same_grid && sa == sb,
        identical_shapes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{store_entangled, MemoryState, Shape, StorageMode, StoredImage};

    fn memory(w: usize, h: usize, shapes: Vec<Vec<(usize, usize)>>) -> MemoryState {
        let grid = Grid::new(w, h).unwrap();
        let shapes = shapes.into_iter().map(|v| Shape::new(v).unwrap()).collect();
        store_entangled(&StoredImage::new(grid, shapes, StorageMode::Entangled).unwrap()).unwrap()
    }

    fn exact(plan: ProbePlan) -> RetrievalConfig {
        RetrievalConfig { plan, ..Default::default() }
    }

    #[test]
    fn candidate_enumeration() {
        assert_eq!(enumerate_candidates(4, 3).unwrap().count(), 4);
        assert_eq!(enumerate_candidates(9, 3).unwrap().count(), 84);
        assert_eq!(enumerate_candidates(9, 3).unwrap().next().unwrap(), vec![0, 1, 2]);
        let all: Vec<_> = enumerate_candidates(5, 2).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(enumerate_candidates(3, 0), Err(Error::Range(_))));
        assert!(matches!(enumerate_candidates(3, 4), Err(Error::Range(_))));
    }

    #[test]
    fn worst_case_counts() {
        assert_eq!(worst_case_arrays(16, &[3, 3]).unwrap(), 560 * 286);
        assert_eq!(worst_case_arrays(16, &[3, 3]).unwrap(), 160_160);
        assert_eq!(worst_case_arrays(3, &[3]).unwrap(), 1);
        assert_eq!(worst_case_arrays(9, &[3]).unwrap(), 84);
        assert!(matches!(worst_case_arrays(5, &[3, 3]), Err(Error::Capacity(_))));
    }

    #[test]
    fn finds_two_triangles() {
        let m = memory(4, 4, vec![vec![(0, 0), (3, 0), (1, 2)], vec![(2, 1), (0, 3), (3, 3)]]);
        let report = find_shapes(&m.state, m.grid, &exact(ProbePlan::from_header(&m.header))).unwrap();
        assert_eq!(report.found_shapes, vec![vec![0, 3, 9], vec![6, 12, 15]]);
        assert_eq!(report.total_preparations, 0);
        assert_eq!(report.worst_case_bound, 160_160);
        assert_eq!(recognize_scale_invariant(&report), vec![3, 3]);
    }

    #[test]
    fn mixed_subset_does_not_violate() {
        let m = memory(3, 3, vec![vec![(0, 0), (1, 0), (2, 0)]]);
        let config = RetrievalConfig {
            skip_found: false,
            ..exact(ProbePlan::Header(vec![3]))
        };
        let report = find_shapes(&m.state, m.grid, &config).unwrap();
        let mixed = report.tests.iter().find(|t| t.subset == vec![0, 1, 4]).unwrap();
        assert!(!mixed.result.violated);
        assert_eq!(report.found_shapes, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn empty_image_tests_every_triple() {
        let m = MemoryState::initial(Grid::new(3, 3).unwrap()).unwrap();
        let report = find_shapes(&m.state, m.grid, &exact(ProbePlan::Levels(vec![3]))).unwrap();
        assert!(report.found_shapes.is_empty());
        assert_eq!(report.tests.len(), 84);
    }

    #[test]
    fn header_free_probe_finds_square_and_pair() {
        let m = memory(3, 3, vec![vec![(0, 0), (2, 0), (2, 2), (0, 2)], vec![(1, 0), (1, 1)]]);
        let report = find_shapes(&m.state, m.grid, &exact(ProbePlan::default())).unwrap();
        assert_eq!(recognize_scale_invariant(&report), vec![2, 4]);
        assert_eq!(report.levels, vec![5, 4, 3, 2]);
    }

    #[test]
    fn skip_and_parallel_paths_agree() {
        let m = memory(3, 3, vec![vec![(0, 0), (1, 1), (2, 2)], vec![(2, 0), (0, 2)]]);
        let base = exact(ProbePlan::Levels(vec![3, 2]));
        let seq = find_shapes(&m.state, m.grid, &base).unwrap();
        let par = find_shapes(&m.state, m.grid, &RetrievalConfig { workers: 4, ..base.clone() }).unwrap();
        assert_eq!(seq, par);
        let no_skip = find_shapes(&m.state, m.grid, &RetrievalConfig { skip_found: false, ..base }).unwrap();
        assert_eq!(no_skip.found_shapes, seq.found_shapes);
        assert!(no_skip.tests.len() > seq.tests.len());
    }

    #[test]
    fn shot_mode_accounting() {
        let m = memory(3, 3, vec![vec![(0, 0), (1, 0), (2, 1)]]);
        let config = RetrievalConfig {
            mode: RetrievalMode::Shots(512),
            plan: ProbePlan::Header(vec![3]),
            seed: 3,
            ..Default::default()
        };
        let report = find_shapes(&m.state, m.grid, &config).unwrap();
        assert_eq!(report.found_shapes, vec![vec![0, 1, 5]]);
        for t in &report.tests {
            assert_eq!(t.preparations, 8 * 512);
        }
        assert!(report.total_preparations as u128 <= report.worst_case_bound * 8 * 512);
        let too_few = RetrievalConfig { mode: RetrievalMode::Shots(10), ..config };
        assert!(matches!(find_shapes(&m.state, m.grid, &too_few), Err(Error::Range(_))));
    }

    #[test]
    fn contradictory_findings_are_reported() {
        // a generic entangled state with a threshold so low that overlapping pairs both "violate"
        let amps = [(0b000, 0.5), (0b011, 0.5), (0b101, 0.5), (0b110, 0.5)]
            .map(|(i, a)| (i, num_complex::Complex64::new(a, 0.0)));
        let state = SparseState::from_amplitudes(3, amps).unwrap();
        let grid = Grid::new(3, 1).unwrap();
        let sloppy = RetrievalConfig {
            plan: ProbePlan::Levels(vec![2]),
            margin: -0.99,
            skip_found: false,
            ..Default::default()
        };
        assert!(matches!(find_shapes(&state, grid, &sloppy), Err(Error::Consistency(_))));
    }

    #[test]
    fn compare_counts_and_positions() {
        let a = memory(4, 4, vec![vec![(0, 0), (1, 0), (0, 1)]]);
        let b = memory(4, 4, vec![vec![(2, 2), (3, 2), (3, 3)]]);
        let ra = find_shapes(&a.state, a.grid, &exact(ProbePlan::Header(vec![3]))).unwrap();
        let rb = find_shapes(&b.state, b.grid, &exact(ProbePlan::Header(vec![3]))).unwrap();
        let cmp = compare_memories(&ra, &rb);
        assert!(cmp.shape_similar);
        assert!(!cmp.identical);
        assert_eq!(cmp.shared_counts, vec![3]);
        assert!(cmp.identical_shapes.is_empty());
        let same = compare_memories(&ra, &ra);
        assert!(same.identical && same.shape_similar);
    }
}
