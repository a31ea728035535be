//! Exact-arithmetic verification of the 2-class-group capitulation data of
//! the imaginary biquadratic fields k = Q(√(2p₁p₂), i), for primes
//! p₁ ≡ p₂ ≡ 1 (mod 4).
//!
//! The library computes, for an eligible pair of primes: generators of the
//! 2-class group of k, fundamental-unit systems of the unramified quadratic
//! extensions K₁ = k(√p₁), K₂ = k(√p₂), K₃ = k(√2), the capitulation kernels
//! in those extensions and in the genus field k* = Q(i, √2, √p₁, √p₂) — both
//! as predicted by the structure theorems and as recomputed by direct
//! principality search — and an independent class-number cross-check via
//! binary quadratic forms.
//!
//! ```
//! use capitulation::report::{run_pair, RunOptions};
//! use num_bigint::BigUint;
//!
//! let report = run_pair(
//!     &BigUint::from(5u32),
//!     &BigUint::from(13u32),
//!     &RunOptions::default(),
//! )
//! .unwrap();
//! assert!(report.passed());
//! assert_eq!(report.kernels["K1"].computed, "010+001");
//! ```

pub mod arith;
pub mod error;
pub mod forms;
pub mod gaussian;
pub mod kernels;
pub mod multiquad;
pub mod pell;
pub mod report;
pub mod units;

pub use error::{Error, Result};
