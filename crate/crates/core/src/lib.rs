//! Persistence-diagram analysis of 2-D scalar field time series.
//!
//! The pipeline has three stages:
//!
//! 1. [`field`] loads and prepares scalar fields; [`cubical`] turns each
//!    field into sublevel-set persistence diagrams on a torus or bounded
//!    (optionally masked) domain.
//! 2. [`metrics`] compares diagrams with exact bottleneck and degree-p
//!    Wasserstein distances.
//! 3. [`cloud`] treats a time series of diagrams as a point cloud in diagram
//!    space: distance matrices, speed profiles, Vietoris-Rips persistence,
//!    clustering, greedy subsampling, and the two-scale change-count
//!    estimator.
//!
//! [`synth`] generates fields, series, and point clouds with known topology
//! for tests and acceptance runs.

// `!(x > 0.0)` and friends deliberately reject NaN along with the
// out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod cubical;
pub mod diagram;
mod dsu;
pub mod error;
pub mod field;
pub mod metrics;
mod reduce;
pub mod synth;

pub use cloud::{
    cluster, distance_matrix, distance_matrix_with_threads, estimate_change_counts,
    rips_persistence, speed_profile, subsample, Clustering, DistanceMatrix, RipsFiltration,
    ScaleEstimate, SubsampleResult,
};
pub use cubical::{betti_direct, build_filtration, compute_persistence, field_persistence,
    CubicalFiltration};
pub use diagram::{DiagramSet, PersistencePoint};
pub use error::{CloudError, DiagramError, FieldError, MetricError, SynthError};
pub use field::{Boundary, FieldSeries, GridField};
pub use metrics::{
    bottleneck, bottleneck_matching, brute_force_matching, diagonal_distance, wasserstein,
    wasserstein_matching, MatchCost, Matching, Metric,
};
pub use synth::{
    gen_cloud, gen_field, gen_series, CloudTruth, FieldTruth, GeneratorKind, GeneratorSpec,
    GridSpec, SeriesTruth,
};
