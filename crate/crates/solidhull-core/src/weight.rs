//! Radial weights `v(r) = exp(-a / (1 - r)^b)` on the unit disc and the
//! constants derived from the pair `(a, b)`.
//!
//! The admissible parameter range is `a > 0` and `0 < b <= 2`; the analysis
//! implemented by the rest of the crate breaks down beyond `b = 2`, so
//! larger exponents are rejected with a dedicated error rather than
//! producing quietly meaningless numbers.

use crate::error::{Error, Result};
use crate::Real;

/// Validated parameters of the weight `v(r) = exp(-a / (1 - r)^b)`.
///
/// Construction is the only way to obtain a value, so any instance is known
/// to satisfy `a > 0` and `0 < b <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpWeightParams<T> {
    a: T,
    b: T,
}

/// Constants attached to a weight parameter pair.
///
/// With `alpha = 2 + 2/b` and `beta = 1/(1 + b)`, the two are linked by the
/// identity `b * alpha * beta = 2`. `gap_coeff = (a*b)^beta` scales the
/// leading term of the critical-gap expansion and satisfies
/// `a * b * gap_coeff^(-b) = gap_coeff`. `block_scale` is the prefactor of
/// the canonical block boundaries `block_scale * n^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T> {
    pub alpha: T,
    pub beta: T,
    pub gap_coeff: T,
    pub block_scale: T,
}

impl<T: Real> ExpWeightParams<T> {
    /// Validate a parameter pair.
    ///
    /// # Errors
    /// `a` must be finite and positive (`InvalidParams` otherwise); `b`
    /// must lie in `(0, 2]` (`UnsupportedExponent` otherwise).
    pub fn new(a: T, b: T) -> Result<Self> {
        if !a.is_finite() || !(a > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "weight amplitude a must be finite and positive, got {a}"
            )));
        }
        if !(b > T::zero()) || !(b <= T::of(2.0)) {
            return Err(Error::UnsupportedExponent {
                b: b.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Constants derived from `(a, b)`; see [`DerivedConstants`].
    pub fn constants(&self) -> DerivedConstants<T> {
        let (a, b) = (self.a, self.b);
        let one = T::one();
        let two = T::of(2.0);
        let alpha = two + two / b;
        let beta = one / (one + b);
        let gap_coeff = (a * b).powf(beta);
        // Two regimes for the block prefactor: the generic one degenerates
        // as b -> 2, where a larger scale is required for the block frame
        // bounds to stay uniform.
        let block_scale = if self.b == two {
            let lo = two * a;
            let hi = two / a.sqrt();
            lo.max(hi)
        } else {
            b * a.powf(-one / b) * alpha.powf(-one - one / b)
        };
        DerivedConstants { alpha, beta, gap_coeff, block_scale }
    }

    /// Residuals of the two exact identities tying the constants together:
    /// `b*alpha*beta - 2` and `a*b*gap_coeff^(-b) - gap_coeff`.
    ///
    /// Both vanish in exact arithmetic; in floats they stay within a few
    /// ulps and make a convenient self-check.
    pub fn identity_residuals(&self) -> [T; 2] {
        let c = self.constants();
        let first = self.b * c.alpha * c.beta - T::of(2.0);
        let second = self.a * self.b * c.gap_coeff.powf(-self.b) - c.gap_coeff;
        [first, second]
    }

    /// `ln v(r) = -a / (1 - r)^b` for `0 <= r < 1`.
    ///
    /// # Errors
    /// Radii outside `[0, 1)` are a domain error: the weight is only
    /// defined inside the disc and vanishes too fast at the boundary for a
    /// limiting value to be useful.
    pub fn log_weight(&self, r: T) -> Result<T> {
        if !(r >= T::zero()) || !(r < T::one()) {
            return Err(Error::Domain(format!(
                "radius {r} is outside [0, 1)"
            )));
        }
        Ok(self.log_weight_gap(T::one() - r))
    }

    /// `ln v(1 - gap) = -a / gap^b` parameterized by the boundary gap.
    ///
    /// Working with the gap directly avoids the cancellation in `1 - r`
    /// when `r` is close to 1; callers that already track gaps should
    /// prefer this over [`Self::log_weight`]. `gap <= 0` yields `-inf`
    /// (the weight's boundary limit) rather than an error, since iterative
    /// solvers probe that edge transiently.
    pub fn log_weight_gap(&self, gap: T) -> T {
        if !(gap > T::zero()) {
            return T::neg_infinity();
        }
        -self.a / gap.powf(self.b)
    }

    /// `v(r)` itself; underflows to zero near the boundary, which is why
    /// the rest of the crate works with [`Self::log_weight`] instead.
    pub fn weight(&self, r: T) -> Result<T> {
        Ok(self.log_weight(r)?.exp())
    }
}
