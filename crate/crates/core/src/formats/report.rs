//! Report documents.
//!
//! Every report is a JSON object whose first two fields are `version` and
//! `command`, followed by `seed`; the remaining fields appear in the order
//! of the structs below. A plain-text rendering accompanies each document.

use serde::Serialize;

use crate::entanglement::SvetlichnyResult;
use crate::grover::VertexSearch;
use crate::image::Grid;
use crate::retrieval::{RetrievalMode, RetrievalReport};

pub const REPORT_VERSION: u32 = 1;

#[derive(Serialize)]
struct GridDoc {
    width: usize,
    height: usize,
}

impl From<Grid> for GridDoc {
    fn from(g: Grid) -> Self {
        Self {
            width: g.width,
            height: g.height,
        }
    }
}

#[derive(Serialize)]
struct TestDoc<'a> {
    subset: &'a [usize],
    value: f64,
    bound: f64,
    violated: bool,
    preparations: u64,
}

#[derive(Serialize)]
struct RetrievalDoc<'a> {
    version: u32,
    command: &'static str,
    seed: u64,
    grid: GridDoc,
    mode: &'static str,
    shots: Option<u64>,
    margin: f64,
    levels: &'a [usize],
    found_shapes: Vec<Vec<[usize; 2]>>,
    found_qubits: &'a [Vec<usize>],
    tests: Vec<TestDoc<'a>>,
    total_preparations: u64,
    worst_case_bound: u128,
}

fn coords(grid: Grid, qubits: &[usize]) -> Vec<[usize; 2]> {
    qubits
        .iter()
        .map(|&q| {
            let (x, y) = grid.coordinates(q);
            [x, y]
        })
        .collect()
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report documents serialize");
    s.push('\n');
    s
}

/// JSON document and text summary of a retrieval run.
pub fn retrieval_report(report: &RetrievalReport) -> (String, String) {
    let (mode, shots) = match report.mode {
        RetrievalMode::Exact => ("exact", None),
        RetrievalMode::Shots(s) => ("shots", Some(s)),
    };
    let doc = RetrievalDoc {
        version: REPORT_VERSION,
        command: "retrieve",
        seed: report.seed,
        grid: report.grid.into(),
        mode,
        shots,
        margin: report.margin,
        levels: &report.levels,
        found_shapes: report
            .found_shapes
            .iter()
            .map(|s| coords(report.grid, s))
            .collect(),
        found_qubits: &report.found_shapes,
        tests: report
            .tests
            .iter()
            .map(|t| TestDoc {
                subset: &t.subset,
                value: t.result.value,
                bound: t.result.biseparable_bound,
                violated: t.result.violated,
                preparations: t.preparations,
            })
            .collect(),
        total_preparations: report.total_preparations,
        worst_case_bound: report.worst_case_bound,
    };

    let mut text = format!(
        "retrieval on {}x{} grid, mode {mode}{}, seed {}\n",
        report.grid.width,
        report.grid.height,
        shots.map(|s| format!(" ({s} shots per correlator)")).unwrap_or_default(),
        report.seed
    );
    text.push_str(&format!(
        "probe levels {:?}, margin {}\n",
        report.levels, report.margin
    ));
    text.push_str(&format!("found {} shape(s)\n", report.found_shapes.len()));
    for shape in &report.found_shapes {
        let value = report
            .tests
            .iter()
            .find(|t| &t.subset == shape)
            .map(|t| t.result.value)
            .unwrap_or(f64::NAN);
        let pts: Vec<String> = coords(report.grid, shape)
            .iter()
            .map(|[x, y]| format!("({x},{y})"))
            .collect();
        text.push_str(&format!(
            "  {} vertices {} witness {:.6} > {}\n",
            shape.len(),
            pts.join(" "),
            value,
            report.tests.iter().find(|t| &t.subset == shape).map(|t| t.result.biseparable_bound).unwrap_or(0.0)
        ));
    }
    text.push_str(&format!(
        "subset tests {}, preparations {}, worst-case arrays {}\n",
        report.tests.len(),
        report.total_preparations,
        report.worst_case_bound
    ));
    (to_json(&doc), text)
}

#[derive(Serialize)]
struct WitnessDoc<'a> {
    version: u32,
    command: &'static str,
    seed: u64,
    state: &'a str,
    parties: usize,
    value: f64,
    biseparable_bound: f64,
    quantum_max: f64,
    margin: f64,
    violated: bool,
    angles: Vec<[f64; 2]>,
}

pub fn witness_report(state: &str, result: &SvetlichnyResult, seed: u64) -> (String, String) {
    let doc = WitnessDoc {
        version: REPORT_VERSION,
        command: "witness",
        seed,
        state,
        parties: result.n_parties,
        value: result.value,
        biseparable_bound: result.biseparable_bound,
        quantum_max: result.quantum_max,
        margin: result.margin,
        violated: result.violated,
        angles: result
            .settings
            .pairs
            .iter()
            .map(|(a, b)| [a.angle(), b.angle()])
            .collect(),
    };
    let mut text = format!(
        "witness for {state} ({} parties), seed {seed}\n\
         max value {:.6}, biseparable bound {}, quantum max {:.6}\n\
         verdict: {}\n",
        result.n_parties,
        result.value,
        result.biseparable_bound,
        result.quantum_max,
        if result.violated { "violated (genuinely entangled)" } else { "not violated" }
    );
    for (k, [a, b]) in doc.angles.iter().enumerate() {
        text.push_str(&format!("  party {k}: phi {a:.6} phi' {b:.6}\n"));
    }
    (to_json(&doc), text)
}

#[derive(Serialize)]
struct RunDoc {
    iterations: usize,
    success_probability: f64,
    sampled_address: usize,
    hit: bool,
}

#[derive(Serialize)]
struct GroverDoc {
    version: u32,
    command: &'static str,
    seed: u64,
    grid: GridDoc,
    address_space: usize,
    marked_count: usize,
    runs: Vec<RunDoc>,
    found: Vec<[usize; 2]>,
    found_qubits: Vec<usize>,
    oracle_queries: u64,
    expected_queries: f64,
    complete: bool,
}

/// `width` and `height` describe the searched cell array, which may be larger
/// than any simulated qubit grid.
pub fn grover_report(search: &VertexSearch, width: usize, height: usize, seed: u64) -> (String, String) {
    let found_qubits: Vec<usize> = search.found.iter().copied().collect();
    let doc = GroverDoc {
        version: REPORT_VERSION,
        command: "grover",
        seed,
        grid: GridDoc { width, height },
        address_space: search.address_space,
        marked_count: search.marked_count,
        runs: search
            .runs
            .iter()
            .map(|r| RunDoc {
                iterations: r.iterations,
                success_probability: r.success_probability,
                sampled_address: r.sampled_address,
                hit: search.found.contains(&r.sampled_address),
            })
            .collect(),
        found: found_qubits.iter().map(|&q| [q % width, q / width]).collect(),
        found_qubits: found_qubits.clone(),
        oracle_queries: search.oracle_queries,
        expected_queries: search.expected_queries,
        complete: search.complete,
    };
    let mut text = format!(
        "grover search on {}x{} grid (address space {}), seed {seed}\n",
        width, height, search.address_space
    );
    for (i, r) in search.runs.iter().enumerate() {
        text.push_str(&format!(
            "  run {}: {} iterations, success probability {:.6}, sampled {}\n",
            i + 1,
            r.iterations,
            r.success_probability,
            r.sampled_address
        ));
    }
    let pts: Vec<String> = doc.found.iter().map(|[x, y]| format!("({x},{y})")).collect();
    text.push_str(&format!(
        "recovered {} of {} vertices: {}\n",
        search.found.len(),
        search.marked_count,
        pts.join(" ")
    ));
    text.push_str(&format!(
        "oracle queries {} (expected {:.2}){}\n",
        search.oracle_queries,
        search.expected_queries,
        if search.complete { "" } else { ", INCOMPLETE" }
    ));
    (to_json(&doc), text)
}
