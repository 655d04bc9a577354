//! Flat manifolds `R^n / Gamma` in exact lattice coordinates: validation,
//! closed-geodesic enumeration and cleanliness of the fixed sets.

mod group;
pub mod linalg;
mod spectrum;

pub use group::{validate, BieberbachGroup, Check, Motion, ValidationReport};
pub use spectrum::{
    brute_force_spectrum, class_counts, cleanliness_diagnostic, fixed_lattice_gram_det,
    length_spectrum_flat, linearized_kernel, CleanEntry, ComponentGroup, FlatCleanReport,
    FlatComponent, FlatLengthEntry,
};
