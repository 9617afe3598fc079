//! Exact computation of equivariant intersection cohomology for finite
//! models of circle actions on stratified spaces.
//!
//! A [`model::Model`] is the orbit-space data of an action in finite form:
//! a graded ambient complex with per-stratum perverse-degree filtrations, an
//! Euler cocycle and the operator it induces. From it the crate builds
//!
//! - the perverse complexes `Ω_p`, the Gysin term `G_p` and the co-Gysin
//!   quotient `K_p` ([`perverse`]),
//! - the invariant-forms complex, the equivariant complex over `ℚ[u]` and
//!   both Gysin sequences ([`equivariant`]),
//! - the basic spectral sequence and the Skjelbred sequence ([`spectral`]),
//! - localization over `ℚ(u)` ([`localize`]),
//! - comparison of two models through an isomorphism ([`classify`]).
//!
//! All arithmetic is over the rationals ([`ratla`]); nothing is approximate.
//!
//! ```
//! use eqih::{fixtures, model::Perversity, perverse::PerverseData};
//!
//! let cone = fixtures::cone2();
//! let p = Perversity::parse("apex=2").unwrap();
//! let data = PerverseData::build(&cone, &p).unwrap();
//! assert_eq!(data.h_omega.dims(), vec![1, 0, 1]);
//! ```

pub mod classify;
pub mod equivariant;
pub mod error;
pub mod fixtures;
pub mod homalg;
pub mod localize;
pub mod model;
pub mod perverse;
pub mod ratla;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/perverse.md")]
    mod perverse {}
    #[doc = include_str!("../../../book/src/equivariant.md")]
    mod equivariant {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/localization.md")]
    mod localization {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
}
