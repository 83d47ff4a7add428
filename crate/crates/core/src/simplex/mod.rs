//! The ordered simplex `S_N`: permutations, the antisymmetric extension and
//! restriction maps, and sign statistics of sampled states.

pub mod kuhn;
pub mod permutation;
pub mod sample;

pub use kuhn::{
    antisymmetry_defect, cube_form, extend_from_simplex, flat_index, quasi_periodic_trace_defect, restrict_full_to_simplex,
    simplex_form, FormParts, SimplexFunction,
};
pub use permutation::Permutation;
pub use sample::{
    locate_cell, nodal_volume_estimate, positivity_report, random_simplex_sample, region_tag, restrict_to_simplex,
    restrict_to_simplex_function, PositivityReport, RegionTag, SimplexSample, DEFAULT_EPS_POS, MIN_NODAL_SAMPLE,
};
