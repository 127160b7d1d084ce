//! Binary images on a qubit grid and the memory states that store them.
//!
//! Grid cell `(x, y)` is qubit `y·width + x`. A classical memory sets each
//! vertex qubit to `|1⟩`; an entangled memory prepares the vertices of every
//! shape in a joint GHZ state and leaves all other qubits in `|0⟩`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{Amplitude, SparseState, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size(format!("grid {width}x{height} is empty")));
        }
        match width.checked_mul(height) {
            Some(n) if n <= MAX_QUBITS => Ok(Self { width, height }),
            _ => Err(Error::Size(format!(
                "grid {width}x{height} exceeds {MAX_QUBITS} qubits"
            ))),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, (x, y): (usize, usize)) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major qubit index of cell `(x, y)`.
    pub fn qubit_index(&self, x: usize, y: usize) -> Result<usize> {
        if !self.contains((x, y)) {
            return Err(Error::Coordinate(format!(
                "({x},{y}) lies outside the {}x{} grid",
                self.width, self.height
            )));
        }
        Ok(y * self.width + x)
    }

    pub fn coordinates(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }
}

pub fn qubit_index(grid: &Grid, x: usize, y: usize) -> Result<usize> {
    grid.qubit_index(x, y)
}

/// Vertex coordinates of one polygon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Shape {
    vertices: Vec<(usize, usize)>,
}

impl Shape {
    pub fn new(vertices: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Range(format!(
                "a shape needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::Range(format!("vertex ({},{}) repeated", v.0, v.1)));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Sorted qubit indices of the vertices.
    pub fn qubits(&self, grid: &Grid) -> Result<Vec<usize>> {
        let mut out = self
            .vertices
            .iter()
            .map(|&(x, y)| grid.qubit_index(x, y))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageMode {
    Classical,
    Entangled,
}

impl StorageMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StorageMode::Classical => "classical",
            StorageMode::Entangled => "entangled",
        }
    }
}

impl std::str::FromStr for StorageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(StorageMode::Classical),
            "entangled" => Ok(StorageMode::Entangled),
            other => Err(Error::Mode(format!(
                "unknown storage mode {other:?}, expected classical or entangled"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoredImage {
    grid: Grid,
    shapes: Vec<Shape>,
    mode: StorageMode,
}

impl StoredImage {
    pub fn new(grid: Grid, shapes: Vec<Shape>, mode: StorageMode) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for shape in &shapes {
            for &(x, y) in shape.vertices() {
                let q = grid.qubit_index(x, y)?;
                if !seen.insert(q) && mode == StorageMode::Entangled {
                    return Err(Error::Overlap(format!(
                        "vertex ({x},{y}) belongs to more than one shape"
                    )));
                }
            }
        }
        Ok(Self { grid, shapes, mode })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn mode(&self) -> StorageMode {
        self.mode
    }

    /// Union of all vertex qubits.
    pub fn vertex_qubits(&self) -> BTreeSet<usize> {
        self.shapes
            .iter()
            .flat_map(|s| s.qubits(&self.grid).expect("validated on construction"))
            .collect()
    }
}

/// Classical side information kept next to the quantum array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeHeader {
    pub vertex_counts: Vec<usize>,
}

impl ShapeHeader {
    pub fn shape_count(&self) -> usize {
        self.vertex_counts.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    pub state: SparseState,
    pub grid: Grid,
    pub mode: StorageMode,
    pub header: ShapeHeader,
}

impl MemoryState {
    /// The empty memory `|0…0⟩` on a grid.
    pub fn initial(grid: Grid) -> Result<Self> {
        Ok(Self {
            state: SparseState::zero(grid.n_qubits())?,
            grid,
            mode: StorageMode::Classical,
            header: ShapeHeader {
                vertex_counts: Vec::new(),
            },
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.grid.n_qubits()
    }
}

fn header_of(image: &StoredImage) -> ShapeHeader {
    ShapeHeader {
        vertex_counts: image.shapes.iter().map(Shape::len).collect(),
    }
}

/// Stores the image as a single basis state with `|1⟩` on every vertex.
pub fn store_classical(image: &StoredImage) -> Result<MemoryState> {
    if image.mode != StorageMode::Classical {
        return Err(Error::Mode("store_classical needs a classical image".into()));
    }
    let n = image.grid.n_qubits();
    let ones: Vec<usize> = image.vertex_qubits().into_iter().collect();
    let label = crate::state::BasisLabel::from_ones(n, &ones)?;
    Ok(MemoryState {
        state: SparseState::basis(n, label.index())?,
        grid: image.grid,
        mode: StorageMode::Classical,
        header: header_of(image),
    })
}

/// Stores every shape as a GHZ state on its vertex qubits.
///
/// The result has `2^k` amplitudes of magnitude `2^(−k/2)` for `k` shapes,
/// one per subset of shapes whose vertices are all `|1⟩`.
pub fn store_entangled(image: &StoredImage) -> Result<MemoryState> {
    if image.mode != StorageMode::Entangled {
        return Err(Error::Mode("store_entangled needs an entangled image".into()));
    }
    let n = image.grid.n_qubits();
    let masks: Vec<u64> = image
        .shapes
        .iter()
        .map(|s| {
            let ones = s.qubits(&image.grid)?;
            Ok(crate::state::BasisLabel::from_ones(n, &ones)?.index())
        })
        .collect::<Result<_>>()?;
    let k = masks.len();
    if k > MAX_QUBITS / 2 {
        return Err(Error::Size(format!("{k} shapes exceed the array capacity")));
    }
    let amp = Amplitude::new(0.5f64.powf(k as f64 / 2.0), 0.0);
    let entries = (0..1u64 << k).map(|subset| {
        let label = masks
            .iter()
            .enumerate()
            .filter(|(i, _)| (subset >> i) & 1 == 1)
            .fold(0u64, |acc, (_, m)| acc | m);
        (label, amp)
    });
    Ok(MemoryState {
        state: SparseState::from_amplitudes(n, entries)?,
        grid: image.grid,
        mode: StorageMode::Entangled,
        header: header_of(image),
    })
}

pub fn store(image: &StoredImage) -> Result<MemoryState> {
    match image.mode {
        StorageMode::Classical => store_classical(image),
        StorageMode::Entangled => store_entangled(image),
    }
}

/// `⟨a|b⟩` for two memories on the same grid.
pub fn overlap(a: &MemoryState, b: &MemoryState) -> Result<Amplitude> {
    if a.grid != b.grid {
        return Err(Error::Dimension(format!(
            "memories on {}x{} and {}x{} grids",
            a.grid.width, a.grid.height, b.grid.width, b.grid.height
        )));
    }
    a.state.inner(&b.state)
}

/// `⟨Ψ|M|Ψ⟩` for the projector onto `GHZ` on `vertices` and `|0⟩` elsewhere.
pub fn ghz_projector_probability(m: &MemoryState, vertices: &[usize]) -> Result<f64> {
    let n = m.n_qubits();
    if vertices.is_empty() {
        return Err(Error::Index("vertex set is empty".into()));
    }
    for (i, &q) in vertices.iter().enumerate() {
        if q >= n {
            return Err(Error::Index(format!("qubit {q} out of range for {n} qubits")));
        }
        if vertices[..i].contains(&q) {
            return Err(Error::Index(format!("qubit {q} listed twice")));
        }
    }
    let ones = crate::state::BasisLabel::from_ones(n, vertices)?.index();
    let amp = (m.state.amplitude(0) + m.state.amplitude(ones)) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(amp.norm_sqr())
}
