//! Simulation of quantum image memories.
//!
//! Binary images made of polygon vertices are stored in a grid of qubits,
//! either classically (one basis state) or with the vertices of every shape
//! sharing a GHZ state. Shapes are read back by testing qubit subsets for
//! violation of the Svetlichny inequality, and classical memories can be
//! searched with Grover's algorithm.
//!
//! ```
//! use qimem::{find_shapes, store_entangled, Grid, ProbePlan, RetrievalConfig, Shape,
//!             StorageMode, StoredImage};
//!
//! let grid = Grid::new(3, 3)?;
//! let triangle = Shape::new(vec![(0, 0), (2, 0), (1, 2)])?;
//! let image = StoredImage::new(grid, vec![triangle], StorageMode::Entangled)?;
//! let memory = store_entangled(&image)?;
//! let config = RetrievalConfig { plan: ProbePlan::from_header(&memory.header), ..Default::default() };
//! let report = find_shapes(&memory.state, grid, &config)?;
//! assert_eq!(report.found_shapes, vec![vec![0, 2, 7]]);
//! # Ok::<(), qimem::Error>(())
//! ```

pub mod demos;
pub mod entanglement;
pub mod error;
pub mod formats;
pub mod grover;
pub mod image;
pub mod measurement;
pub mod retrieval;
pub mod state;

pub use entanglement::{
    ghz_optimal_settings, is_genuinely_entangled, make_ghz, make_singlet, max_svetlichny,
    svetlichny_value, OptimizerConfig, SvetlichnyResult, SvetlichnySettings,
};
pub use error::{Error, Result};
pub use grover::{grover_iterations, grover_search, locate_marked, locate_vertices_classical, OracleSpec, VertexSearch};
pub use image::{
    ghz_projector_probability, overlap, store, store_classical, store_entangled, Grid,
    MemoryState, Shape, ShapeHeader, StorageMode, StoredImage,
};
pub use measurement::{
    correlator, expectation, measure, sample_correlator, EquatorialSetting, PreparationOracle,
    ProjectiveMeasurement,
};
pub use retrieval::{
    compare_memories, enumerate_candidates, find_shapes, recognize_scale_invariant,
    worst_case_arrays, ProbePlan, RetrievalConfig, RetrievalMode, RetrievalReport,
};
pub use state::{
    inner, mixture, new_zero_state, partial_trace, tensor, to_density, Amplitude, BasisLabel,
    DensityOperator, PartialTrace, SparseState,
};
