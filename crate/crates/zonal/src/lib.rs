//! Orbit growth in geometrically finite, essentially free, zonal Kleinian groups.
//!
//! A Kleinian group here is a discrete group `G` of isometries of hyperbolic
//! 2- or 3-space; *zonal* means it contains parabolic elements (cusps), and
//! *essentially free* means it is a free product of elementary subgroups —
//! rank-`r` parabolic factors `Z^r` and loxodromic cyclic factors — with no
//! further relations. For such groups every element has a unique normal form,
//! which makes the orbit `G(w)` enumerable by word length with no duplicates
//! and no discreteness heuristics.
//!
//! The toolkit is organized around the partial Poincaré sums
//!
//! ```text
//! P_n(z, w, s) = Σ_{|g| ≤ n} exp(−s · d(z, g(w))),
//! ```
//!
//! evaluated at (an estimate of) the critical exponent `δ` of the group. How
//! fast `P_n(z, w, δ)` grows in `n` is governed by a trichotomy in `δ` and the
//! maximal cusp rank `r_max`: a polynomial regime `n^{2δ − r_max}`, a boundary
//! regime `n / log n`, and a linear regime `n`. The crate provides
//!
//! * [`hyperbolic`] — half-plane/half-space models, Möbius isometries, and a
//!   numerically robust distance;
//! * [`presentation`] — free-product presentations, normal forms, and exact
//!   sphere counts of words by length;
//! * [`orbit`] — depth-first orbit enumeration, partial Poincaré sums, the
//!   orbit-counting function `N(R)`, and least-squares estimation of `δ`;
//! * [`asymptotics`] — closed-form models for the wandering rate `w_n`, the
//!   return sequence `ν_n`, the index `β`, regime classification, a
//!   convolution-bound diagnostic, and log-log model selection;
//! * [`sumlevel`] — exact rational Lebesgue measures `λ(C_n)` of the
//!   continued-fraction sum-level sets, the precision anchor for the boundary
//!   regime (the modular-group case);
//! * [`config`] / [`report`] — JSON group configurations and CSV/JSON report
//!   emission shared with the `zonal` command-line binary.
//!
//! Exact quantities (word counts, `λ(C_n)`) are computed in exact integer or
//! rational arithmetic and cross-checked against independent oracles;
//! floating-point sums use compensated summation and deterministic reduction
//! orders, so repeated runs give identical bytes.

pub mod asymptotics;
pub mod config;
pub mod hyperbolic;
pub mod orbit;
pub mod presentation;
pub mod report;
pub mod sumlevel;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
