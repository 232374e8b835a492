//! Loading, pairing, standardizing and summarizing tabular inputs.

mod cells;
mod matrix;
mod paired;
mod standardize;

pub use cells::{
    load_cell_table, percentile_levels, read_cell_table, summarize_cell_features, CellFeatureTable,
    CellRecord, CELL_ID_HEADER, DEFAULT_PERCENTILE_STEP,
};
pub use matrix::{
    format_number, load_matrix, read_matrix, write_matrix, write_matrix_to, LabeledMatrix,
    TableFormat, SAMPLE_ID_HEADER,
};
pub use paired::{align_samples, AlignmentReport, PairedDataset, MIN_SAMPLES};
pub use standardize::{standardize, DroppedColumn, StandardizedMatrix, DDOF, DEFAULT_VARIANCE_FLOOR};
