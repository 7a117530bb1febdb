//! Aligned perturbation variants of curated bundles.

pub mod matrix;
pub mod mutation;
pub mod record;
pub mod removal;

pub use matrix::{assemble_variant_matrix, plan_assignments, review_queue, MatrixError, ReviewItem, VariantMatrix};
pub use mutation::{
    build_mutation_request, mutate_with_retry, validate_mutation, MutationError, MutationErrorKind, MutationFailure,
    MutationPlan, MutationSettings,
};
pub use record::PerturbationRecord;
pub use removal::{strip_description, strip_description_and_return, strip_return_tag};
