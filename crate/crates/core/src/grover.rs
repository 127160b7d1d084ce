//! Grover search over the cells of a classically stored image.
//!
//! The amplitudes of all marked addresses stay equal throughout the
//! algorithm, and so do those of all unmarked addresses, so the simulation
//! only tracks those two numbers.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{MemoryState, StorageMode};

/// Marked cells inside a padded power-of-two address space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleSpec {
    address_space: usize,
    grid_cells: usize,
    marked: BTreeSet<usize>,
}

impl OracleSpec {
    pub fn new(address_space: usize, grid_cells: usize, marked: BTreeSet<usize>) -> Result<Self> {
        if !address_space.is_power_of_two() || address_space < grid_cells {
            return Err(Error::Oracle(format!(
                "address space {address_space} must be a power of two covering {grid_cells} cells"
            )));
        }
        if let Some(&bad) = marked.iter().find(|&&a| a >= grid_cells) {
            return Err(Error::Oracle(format!(
                "marked address {bad} is outside the {grid_cells} grid cells"
            )));
        }
        Ok(Self {
            address_space,
            grid_cells,
            marked,
        })
    }

    /// Pads `grid_cells` to the next power of two, doubling further while
    /// more than a quarter of the addresses are marked.
    pub fn for_grid(grid_cells: usize, marked: BTreeSet<usize>) -> Result<Self> {
        let mut size = grid_cells.max(1).next_power_of_two();
        while 4 * marked.len() > size {
            size *= 2;
        }
        Self::new(size, grid_cells, marked)
    }

    pub fn address_space(&self) -> usize {
        self.address_space
    }

    pub fn grid_cells(&self) -> usize {
        self.grid_cells
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    pub fn is_marked(&self, address: usize) -> bool {
        self.marked.contains(&address)
    }
}

/// `sin²((2t+1)·arcsin √(m/n))`.
pub fn success_probability(n: usize, m: usize, iterations: usize) -> f64 {
    let theta = (m as f64 / n as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Per-address amplitudes `(marked, unmarked)` after `iterations` rounds of
/// phase flip followed by inversion about the mean.
pub fn amplitudes_after(n: usize, m: usize, iterations: usize) -> (f64, f64) {
    let start = 1.0 / (n as f64).sqrt();
    let (mut marked, mut unmarked) = (start, start);
    let (nf, mf) = (n as f64, m as f64);
    for _ in 0..iterations {
        let flipped = -marked;
        let mean = (mf * flipped + (nf - mf) * unmarked) / nf;
        marked = 2.0 * mean - flipped;
        unmarked = 2.0 * mean - unmarked;
    }
    (marked, unmarked)
}

/// Iteration count near `(π/4)·√(n/m)`, choosing between floor and ceiling
/// by exact success probability.
pub fn grover_iterations(n: usize, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::Oracle("no marked addresses".into()));
    }
    if m > n {
        return Err(Error::Oracle(format!("{m} marked addresses in a space of {n}")));
    }
    let ideal = FRAC_PI_4 * (n as f64 / m as f64).sqrt();
    let lo = (ideal.floor() as usize).max(1);
    let hi = (ideal.ceil() as usize).max(1);
    Ok(if success_probability(n, m, hi) > success_probability(n, m, lo) {
        hi
    } else {
        lo
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroverRun {
    pub iterations: usize,
    pub success_probability: f64,
    pub sampled_address: usize,
}

/// Runs amplitude amplification and draws one address from the final state.
pub fn grover_search<R: Rng + ?Sized>(oracle: &OracleSpec, rng: &mut R) -> Result<GroverRun> {
    let n = oracle.address_space;
    let m = oracle.marked.len();
    let iterations = grover_iterations(n, m)?;
    let (marked_amp, _) = amplitudes_after(n, m, iterations);
    let p = (m as f64 * marked_amp * marked_amp).clamp(0.0, 1.0);
    let sampled_address = if rng.random::<f64>() < p {
        *oracle
            .marked
            .iter()
            .nth(rng.random_range(0..m))
            .expect("index below marked count")
    } else if m == n {
        *oracle.marked.iter().next().expect("nonempty")
    } else {
        // k-th address not in the marked set
        let k = rng.random_range(0..n - m);
        let mut skipped = 0;
        let mut address = k;
        for &a in &oracle.marked {
            if a <= k + skipped {
                skipped += 1;
                address = k + skipped;
            } else {
                break;
            }
        }
        address
    };
    Ok(GroverRun {
        iterations,
        success_probability: p,
        sampled_address,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexSearch {
    pub address_space: usize,
    pub marked_count: usize,
    pub found: BTreeSet<usize>,
    pub runs: Vec<GroverRun>,
    /// Oracle calls inside Grover iterations plus one verification per run.
    pub oracle_queries: u64,
    pub complete: bool,
    /// Expected number of runs to see every marked address at least once.
    pub expected_runs: f64,
    pub expected_queries: f64,
}

/// Recovers the vertex cells of a classical memory by repeated Grover search.
pub fn locate_vertices_classical<R: Rng + ?Sized>(
    memory: &MemoryState,
    rng: &mut R,
    max_repeats: usize,
) -> Result<VertexSearch> {
    if memory.mode != StorageMode::Classical || memory.state.support_size() != 1 {
        return Err(Error::Mode(
            "Grover vertex search needs a classically stored image".into(),
        ));
    }
    let (label, _) = memory.state.iter().next().expect("one basis state");
    let marked: BTreeSet<usize> = label.ones().into_iter().collect();
    locate_marked(&OracleSpec::for_grid(memory.n_qubits(), marked)?, rng, max_repeats)
}

/// Repeats Grover search, checking every sampled address against the
/// oracle, until all marked addresses are seen or `max_repeats` runs are used.
pub fn locate_marked<R: Rng + ?Sized>(
    spec: &OracleSpec,
    rng: &mut R,
    max_repeats: usize,
) -> Result<VertexSearch> {
    let m = spec.marked.len();
    let mut out = VertexSearch {
        address_space: spec.address_space,
        marked_count: m,
        found: BTreeSet::new(),
        runs: Vec::new(),
        oracle_queries: 0,
        complete: m == 0,
        expected_runs: 0.0,
        expected_queries: 0.0,
    };
    if m == 0 {
        return Ok(out);
    }
    let t = grover_iterations(spec.address_space, m)?;
    let p = success_probability(spec.address_space, m, t);
    out.expected_runs = (1..=m).map(|j| m as f64 / (p * j as f64)).sum();
    out.expected_queries = out.expected_runs * (t + 1) as f64;
    while out.runs.len() < max_repeats && out.found.len() < m {
        let run = grover_search(spec, rng)?;
        out.oracle_queries += run.iterations as u64 + 1;
        if spec.is_marked(run.sampled_address) {
            out.found.insert(run.sampled_address);
        }
        out.runs.push(run);
    }
    out.complete = out.found.len() == m;
    Ok(out)
}
