//! Text formats: PBM bitmaps, shape specifications, state dumps and reports.

pub mod dump;
pub mod pbm;
pub mod report;
pub mod shapes;

pub use dump::{read_dump, write_dump};
pub use pbm::{parse_pbm, write_pbm, Bitmap};
pub use report::{grover_report, retrieval_report, witness_report, REPORT_VERSION};
pub use shapes::{parse_shape_spec, write_shape_spec, ShapeSpec};
