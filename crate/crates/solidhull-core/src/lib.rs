//! Numerical toolkit for weighted sup-norm spaces of analytic functions on
//! the unit disc with weights `v(r) = exp(-a / (1 - r)^b)`, `a > 0`,
//! `0 < b <= 2`.
//!
//! The central objects are coefficient blocks: degree ranges
//! `(boundary(n), boundary(n+1)]` on which the weighted size of a power
//! series is captured, up to uniform constants, by a single weighted
//! `ell^2` quantity per block. This crate computes the ingredients of that
//! reduction and provides instruments to test each step numerically:
//!
//! - [`weight`]: the weight family and its derived constants;
//! - [`critical`]: per-degree critical radii `r_m` maximizing
//!   `r^m v(r)`, their defining equation, and closed-form expansions;
//! - [`blocks`]: block boundary schemes and the frame condition
//!   (consecutive critical radii must interlace the blocks);
//! - [`sequence`]: coefficient magnitude containers (dense, sparse,
//!   rule-backed) with ingestion and export;
//! - [`norms`]: canonical and explicit block norms, hull-norm profiles,
//!   and membership diagnostics;
//! - [`multipliers`]: mixed-norm `ell(p, q)` block spaces and
//!   coefficient-multiplier checks between them;
//! - [`lab`]: asymptotic law verification (expansions, ratio laws,
//!   two-sided bound surveys) and direct weighted sup-norm evaluation.
//!
//! Everything is generic over the scalar through the [`Real`] trait;
//! `F64`-suffixed aliases fix the common concrete choice.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub mod blocks;
pub mod critical;
pub mod error;
pub mod lab;
pub mod multipliers;
pub mod norms;
pub mod numeric;
pub mod sequence;
pub mod weight;

pub use blocks::{BlockMode, BlockScheme, FrameReport, FrameRow};
pub use critical::{critical_radius, gap_expansion, log_monomial_peak, CriticalRadius, ExpansionOrder, SolveOptions};
pub use error::{Error, Result};
pub use lab::{direct_norm_polynomial, order_fit, verify_proof_bounds, verify_radius_ratio, verify_rm_expansion, verify_weight_ratio, DirectNorm, ExpansionCheck, ProofBoundsReport, RatioAnchor};
pub use multipliers::{apply_multiplier, block_pq_norm, inverse_weight_multiplier, multiplier_check, multiplier_target, BlockSpaceSpec, MultiplierDiagnostic, MultiplierTarget};
pub use norms::{canonical_block_norm, compare_canonical_vs_explicit, explicit_block_norm, hull_norm_profile, membership_diagnostic, BlockNormProfile, ComparisonReport, ExplicitFormSpec, InnerFactor, LinearTermSign, MembershipReport, QuadCoeff, Verdict};
pub use sequence::{extremal_block_sequence, random_sequence, unit_envelope, CoefficientSequence, SequenceFormat};
pub use weight::{DerivedConstants, ExpWeightParams};

/// Scalar abstraction for every numeric routine in the crate: an IEEE-style
/// float with conversions, printable, and shareable across threads.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` literal into the scalar type (used for constants like
    /// tolerances and small integers in formulas).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts into any Real")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// [`ExpWeightParams`] over `f64`.
pub type ExpWeightParamsF64 = ExpWeightParams<f64>;
/// [`DerivedConstants`] over `f64`.
pub type DerivedConstantsF64 = DerivedConstants<f64>;
/// [`CriticalRadius`] over `f64`.
pub type CriticalRadiusF64 = CriticalRadius<f64>;
/// [`SolveOptions`] over `f64`.
pub type SolveOptionsF64 = SolveOptions<f64>;
/// [`BlockScheme`] over `f64`.
pub type BlockSchemeF64 = BlockScheme<f64>;
/// [`FrameReport`] over `f64`.
pub type FrameReportF64 = FrameReport<f64>;
/// [`CoefficientSequence`] over `f64`.
pub type CoefficientSequenceF64 = CoefficientSequence<f64>;
/// [`BlockNormProfile`] over `f64`.
pub type BlockNormProfileF64 = BlockNormProfile<f64>;
/// [`MembershipReport`] over `f64`.
pub type MembershipReportF64 = MembershipReport<f64>;
/// [`ComparisonReport`] over `f64`.
pub type ComparisonReportF64 = ComparisonReport<f64>;
/// [`BlockSpaceSpec`] over `f64`.
pub type BlockSpaceSpecF64 = BlockSpaceSpec<f64>;
/// [`MultiplierDiagnostic`] over `f64`.
pub type MultiplierDiagnosticF64 = MultiplierDiagnostic<f64>;
/// [`ExpansionCheck`] over `f64`.
pub type ExpansionCheckF64 = ExpansionCheck<f64>;
/// [`ProofBoundsReport`] over `f64`.
pub type ProofBoundsReportF64 = ProofBoundsReport<f64>;
/// [`DirectNorm`] over `f64`.
pub type DirectNormF64 = DirectNorm<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_lifts_f64_literals() {
        let x: f64 = Real::of(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = Real::of(1.5);
        assert_eq!(y, 1.5_f32);
    }

    #[test]
    fn f64_aliases_construct() {
        let params = ExpWeightParamsF64::new(1.0, 1.0).unwrap();
        assert_eq!(params.a(), 1.0);
        let opts = SolveOptionsF64::default();
        assert!(opts.tol > 0.0);
    }
}
