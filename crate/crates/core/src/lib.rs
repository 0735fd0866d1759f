//! Representation similarity analysis for comparing task-specific models.
//!
//! The pipeline runs on precomputed representations only:
//!
//! 1. [`rdm::compute_rdm`] turns a conditions × features matrix into a
//!    representational dissimilarity matrix (`1 - Pearson` between
//!    condition rows).
//! 2. [`similarity::similarity_matrix`] scores every pair of RDMs by the
//!    Spearman correlation of their lower triangles.
//! 3. [`clustering::cluster`] builds a task taxonomy from the similarity
//!    matrix, and [`clustering::cut`] flattens it.
//! 4. [`selection::rank_by_similarity`] ranks candidate source models for a
//!    probe task; [`selection::topk_agreement`] and
//!    [`selection::ranking_correlation`] compare such rankings with measured
//!    transfer performance.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod clustering;
pub mod error;
pub mod io;
pub mod rdm;
pub mod scalar;
pub mod selection;
pub mod similarity;
pub mod stats;
pub mod synthetic;
pub mod types;

pub use clustering::{cluster, cut, Dendrogram, Linkage, Merge};
pub use error::{Error, ErrorClass, Result};
pub use rdm::{compute_rdm, lower_triangle, DegeneratePolicy};
pub use scalar::Scalar;
pub use selection::{
    rank_by_similarity, ranking_correlation, stability_report, topk_agreement, AffinityTable, Orientation,
    StabilityRow,
};
pub use similarity::{matrix_correlation, rdm_similarity, similarity_matrix, MatrixCorrelationMode};
pub use stats::{pearson, rank_average_ties, spearman, Method, RankVector};
pub use synthetic::{generate, SyntheticGroup, SyntheticSpec};
pub use types::{FeatureMatrix, Rdm, Ranking, SimilarityMatrix, TaskId, TieRule};

pub type FeatureMatrix64 = FeatureMatrix<f64>;
pub type Rdm64 = Rdm<f64>;
pub type SimilarityMatrix64 = SimilarityMatrix<f64>;
pub type Ranking64 = Ranking<f64>;
pub type Dendrogram64 = Dendrogram<f64>;
pub type AffinityTable64 = AffinityTable<f64>;

pub type FeatureMatrix32 = FeatureMatrix<f32>;
pub type Rdm32 = Rdm<f32>;
pub type SimilarityMatrix32 = SimilarityMatrix<f32>;
pub type Ranking32 = Ranking<f32>;
pub type Dendrogram32 = Dendrogram<f32>;
pub type AffinityTable32 = AffinityTable<f32>;
