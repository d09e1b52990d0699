//! Fractal interpolation: iterated function systems whose attractors are
//! graphs of continuous functions through prescribed data nodes.
//!
//! A system is a family of maps `w_n(x, y) = (L_n(x), F_n(x, y))` where the
//! `L_n` tile the data interval and the `F_n` contract vertically. The crate
//! builds such systems from data nodes ([`ifs_from_data`]) or from an
//! analytic function ([`ifs_from_analytic`]), then works with them four
//! ways:
//!
//! - **sampling**: the chaos game and the deterministic refinement operator
//!   draw the attractor ([`attractor`]);
//! - **evaluation**: pointwise values with certified error bounds, by
//!   branch preimage descent ([`attractor::evaluate`]);
//! - **continuation**: extending the function beyond its data interval
//!   along symbolic addresses, with nested domain intervals and ensembles
//!   of alternatives ([`continuation`]);
//! - **analysis**: Lipschitz and derivative series, double points, fractal
//!   dimension both solved and measured, and system comparison probes
//!   ([`analysis`]).
//!
//! [`registry`] ships ready-made example systems with closed-form oracles
//! where they exist; [`render`] and [`export`] turn results into PPM images
//! and CSV/JSON files.

pub mod analysis;
pub mod attractor;
pub mod continuation;
pub mod error;
pub mod export;
pub mod ifs;
pub mod registry;
pub mod render;
pub mod scalar;

pub use analysis::{
    address_of, addresses_of, box_dimension, compose_ifs, derivative_series, dimension_solve,
    double_points, lipschitz_bound, uniqueness_probe, Coding, DimensionMethod, DimensionResult,
    DoublePointSet, LipschitzBound, UniquenessReport,
};
pub use attractor::{
    bounding_box, chaos_game, chaos_game_2d, chaos_game_2d_tagged, chaos_game_tagged,
    chord_error_bound, evaluate, evaluate_error_bound, evaluate_many, evaluate_with_bound,
    graph_points, hausdorff_distance, hutchinson_step, one_sided_hausdorff, self_similarity_gap,
    w_operator, ChaosGameParams, PolylineApproximant, BURN_IN_DEFAULT, EVAL_DEPTH_DEFAULT,
};
pub use continuation::{
    agreement_check, continuation_cloud, continuation_probability_bound, continue_eval,
    domain_interval, domain_limit_kind, ensemble_words, Address, ContinuationResult, DomainLimit,
};
pub use error::{Error, Result};
pub use export::{
    csv_from_tagged, ensemble_bundle, parse_csv, system_from_json, tag_all, tag_by_branch,
    EnsembleBundle, EnsembleEntry,
};
pub use ifs::{
    ifs_from_analytic, ifs_from_data, Affine2D, Affine2DReport, AffineMap1D, BranchMap, DataNode,
    GeneralAffineIFS2D, InterpolationIFS, Interval, ValidationReport,
};
pub use registry::{
    get_example, list_examples, oracle_eval, ExampleEntry, ExampleInfo, ExampleSystem, Oracle,
};
pub use render::{palette, rasterize, Window};
pub use scalar::ScalarFn;
