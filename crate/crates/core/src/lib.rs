//! Schatten-class ideals at finite truncation.
//!
//! The crate builds matrices of multiplication operators `g ↦ f·g` on `L²(X)`
//! for finite descriptions of measure spaces, and of group-algebra operators
//! `Σ_x f(x) π(x)` for unitary representations of finite groups. On top of
//! those it computes Schatten p-norms, decides Schatten-ideal membership both
//! exactly (atomic support plus p-summability) and numerically (growth of
//! partial traces in a Gabor basis), and checks the exact sequences
//! `0 → ideal → S_p → quotient → 0`, their inclusions across `p`, and their
//! behaviour under unitary intertwiners.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex matrices, Jacobi SVD, elimination.
//! * [`measure`]: measure spaces, simple functions, closed-form integrals.
//! * [`schatten`]: norms, duality witnesses, ideal and containment checks.
//! * [`multiplication`]: truncated multiplication operators and membership.
//! * [`group`]: finite groups, unitary representations, pullback ideals.
//! * [`system`]: exact-sequence nodes, morphisms, directed systems, functors.
//! * [`verify`]: the end-to-end verification suite behind `verify-all`.

pub mod group;
pub mod linalg;
pub mod measure;
pub mod multiplication;
pub mod oracle;
pub mod par;
pub mod random;
pub mod schatten;
pub mod system;
pub mod verify;

pub use linalg::{ComplexMatrix, LinalgError, SingularValueList};
pub use measure::{MeasureError, MeasureSpace, SimpleFunction};
pub use num_complex::Complex64;
pub use par::Execution;
pub use schatten::{PExponent, SchattenError, SchattenReport};
