//! Complete decomposition of diagonalisable symmetric order-3 complex
//! tensors `T = sum_i u_i^(x)3` with linearly independent `u_i`, by a
//! randomized symmetric variant of Jennrich's algorithm.
//!
//! The crate is organized around the pipeline's layers:
//!
//! - [`numerics`]: emulated finite-precision arithmetic (`FpContext`) and the
//!   contracted dense complex primitives (inner product, multiply, invert).
//! - [`fptensor`]: the symmetric tensor type, slices, rank-one sums, the
//!   O(n^4) change-of-basis oracle, and the tensor file formats.
//! - [`tscb`]: the O(n^3) trace-after-change-of-basis routine that recovers
//!   scaling factors without forming the transformed tensor.
//! - [`spectral`]: eigenproblem condition numbers and the randomized
//!   diagonalisation backend with its forward-approximation wrapper.
//! - [`jennrich`]: the exact and finite-precision decomposition pipelines and
//!   the parameter schedule.
//! - [`randlab`]: grid sampling and Monte Carlo verification of the
//!   probabilistic guarantees.
//! - [`benchverify`]: instance generation with controlled condition number,
//!   factor matching up to permutation and cube roots of unity, benchmarks.
//!
//! ```
//! use tensorjenn::benchverify::{generate_instance, match_factors};
//! use tensorjenn::{decompose_fp, FpContext};
//!
//! // a dimension-6 tensor with condition number ~ 25 and known factors
//! let inst = generate_instance(6, 25.0, 42).unwrap();
//!
//! // recover the factors at host precision, forward accuracy 1e-4
//! let result = decompose_fp(&inst.t, inst.kappa * 1.05, 1e-4, &FpContext::exact(), 7).unwrap();
//! assert!(result.diagnostics.advisory.is_none());
//!
//! // align against the ground truth up to permutation and cube roots of unity
//! let m = match_factors(&result.vectors, &inst.u_rows()).unwrap();
//! assert!(m.max_error <= 1e-4);
//! ```

pub mod benchverify;
pub mod error;
pub mod fptensor;
pub mod jennrich;
pub mod numerics;
pub mod randlab;
pub mod spectral;
pub mod stream;
pub mod tscb;

pub use error::{Error, Result};
pub use fptensor::SymTensor3;
pub use jennrich::{decompose_exact, decompose_fp, DecompParams, DecompResult};
pub use numerics::{CMatrix, CVector, FpContext};
