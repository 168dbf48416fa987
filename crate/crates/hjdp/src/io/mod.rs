//! Problem-specification parsing, the binary field container, and VTK/CSV
//! export.

pub mod config;
pub mod container;
pub mod export;

pub use config::{parse_config, BuiltinModel, ProblemConfig};
pub use container::{read_field, read_field_file, write_field, write_field_file};
pub use export::{export_csv_slice, export_vtk};
