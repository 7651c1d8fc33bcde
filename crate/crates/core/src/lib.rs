//! Disjointness preservers between rectangular matrix spaces.
//!
//! A linear map `Φ: M_{m,n} -> M_{r,s}` preserves disjointness when
//! `A^*B = 0` and `AB^* = 0` imply the same for `Φ(A)`, `Φ(B)`. Such maps
//! have the form `U · diag(A ⊗ Q1, Aᵗ ⊗ Q2, 0) · V`; this crate recovers
//! that form numerically, refutes non-preservers with explicit witness
//! pairs, and classifies maps as triple homomorphisms, partial isometry
//! preservers, Schatten isometries and Ky Fan isometries.
//!
//! ```
//! use preserver::{decompose, Field, LinMap, Tolerances};
//!
//! let phi = LinMap::transpose_map(2, 3, Field::Real);
//! let form = decompose(&phi, &Tolerances::default()).unwrap();
//! assert!(form.q1().is_empty());
//! assert_eq!(form.q2().len(), 1);
//! ```

pub mod canonical;
pub mod classify;
pub mod format;
pub mod genfuzz;
pub mod linmap;
pub mod matcore;

pub use canonical::{
    build, decompose, decompose_seeded, CanonicalForm, DecomposeFailure, FailureKind,
};
pub use classify::{ClassifierVerdict, ClassifyError, Detail, Verdict};
pub use linmap::{maps_equal, LinMap};
pub use matcore::{Field, Mat, Tolerances};
