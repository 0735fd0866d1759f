//! File formats: RSAF feature files, matrix and affinity CSVs, dendrograms.

pub mod affinity;
pub mod dendrogram;
pub mod features;
pub mod matrix;

pub use affinity::{format_affinity, parse_affinity, read_affinity};
pub use dendrogram::{from_json, read_dendrogram_json, to_json, to_newick, write_dendrogram, DendrogramFormat};
pub use features::{decode_features, encode_features, parse_features_csv, read_features, write_features};
pub use matrix::{
    format_rdm, format_similarity, parse_matrix, read_matrix, read_rdm, read_similarity, write_matrix,
    write_rdm, write_similarity, LabeledMatrix,
};
