//! Coefficient multipliers between the weighted space and `ell^p`.
//!
//! A sequence `lambda` multiplies the space into `ell^p` exactly when it
//! lies in a mixed-norm block space `ell^J(r, s)`: blocks of `J` carry an
//! inner `ell^r` norm and the block values an outer `ell^s` norm. The
//! target exponents `(r, s)` depend on `p` in three regimes (see
//! [`multiplier_target`]). On the concrete block weights this reduces to
//! weighted mixed norms of `lambda` over theorem-mode blocks, which
//! [`multiplier_check`] evaluates over a finite block range and
//! classifies with the same tail heuristics as the membership
//! diagnostics.
//!
//! Everything is computed in the log domain; per-coordinate block weights
//! are `exp` of the negated explicit block-norm exponent, i.e.
//! `w_{n,m} = exp(q n^2 - l n) * rho_n^{-m}` with `q`, `l`, `rho_n` drawn
//! from an [`ExplicitFormSpec`]. At `(a, b) = (1, 1)` this is literally
//! `e^{n^2} (1 - 1/n^2)^{-m}` on blocks `(n^4, (n+1)^4]`; for other
//! parameters the same construction is reported as "generalized".

use crate::blocks::{self, BlockMode};
use crate::error::{Error, Result};
use crate::numeric::{float_json, LogSumExpAcc};
use crate::norms::{ExplicitFormSpec, Verdict};
use crate::sequence::CoefficientSequence;
use crate::weight::ExpWeightParams;
use crate::Real;

/// Mixed-norm exponents `(r, s)` a multiplier into `ell^p` must satisfy.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierTarget<T> {
    /// Inner (within-block) exponent; `inf` encodes a sup.
    pub r: T,
    /// Outer (across-block) exponent.
    pub s: T,
    /// Which regime produced the pair: `'a'` for `1 <= p < 2`, `'b'` for
    /// `2 <= p < inf`, `'c'` for `p = inf`.
    pub case: char,
}

/// Map the target exponent `p` to the block-space exponents `(r, s)`.
///
/// * `1 <= p < 2`: `r = 2p / (2 - p)`, `s = p`;
/// * `2 <= p < inf`: `r = inf`, `s = p`;
/// * `p = inf`: `r = s = inf`.
///
/// # Errors
/// `p < 1` (or NaN) is not a norm exponent here.
pub fn multiplier_target<T: Real>(p: T) -> Result<MultiplierTarget<T>> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParams(format!(
            "multiplier exponent must satisfy p >= 1, got {p}"
        )));
    }
    let two = T::of(2.0);
    Ok(if p < two {
        MultiplierTarget { r: two * p / (two - p), s: p, case: 'a' }
    } else if p.is_finite() {
        MultiplierTarget { r: T::infinity(), s: p, case: 'b' }
    } else {
        MultiplierTarget { r: T::infinity(), s: T::infinity(), case: 'c' }
    })
}

/// A block partition together with mixed-norm exponents.
#[derive(Debug, Clone)]
pub struct BlockSpaceSpec<T> {
    boundaries: Vec<u64>,
    p: T,
    q: T,
}

impl<T: Real> BlockSpaceSpec<T> {
    /// Blocks `(boundaries[k], boundaries[k+1]]` with inner exponent `p`
    /// and outer exponent `q`, both in `[1, inf]`.
    pub fn new(boundaries: Vec<u64>, p: T, q: T) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidParams(
                "a block space needs at least two boundaries".into(),
            ));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "block boundaries must be strictly increasing".into(),
            ));
        }
        for e in [p, q] {
            if !(e >= T::one()) {
                return Err(Error::InvalidParams(format!(
                    "block-space exponents must satisfy e >= 1, got {e}"
                )));
            }
        }
        Ok(Self { boundaries, p, q })
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }
}

/// `ln` of the `ell^e` norm of a stream of log-domain magnitudes;
/// `e = inf` is the sup. Empty streams give `-inf`.
fn log_lp<T: Real>(terms: impl Iterator<Item = T>, e: T) -> T {
    if e.is_finite() {
        let mut acc = LogSumExpAcc::new();
        for t in terms {
            acc.push(e * t);
        }
        acc.value() / e
    } else {
        terms.fold(T::neg_infinity(), T::max)
    }
}

/// `ln` of the mixed block norm of `seq` in the given block space.
///
/// # Errors
/// Coefficients outside the covered index range `(first, last]` must be
/// zero; a nonzero one is reported as `OutOfRange`.
pub fn block_pq_norm<T: Real>(
    spec: &BlockSpaceSpec<T>,
    seq: &CoefficientSequence<T>,
) -> Result<T> {
    let first = *spec.boundaries.first().expect("validated: len >= 2");
    let last = *spec.boundaries.last().expect("validated: len >= 2");
    let mut outside = None;
    if seq.log_abs(0) > T::neg_infinity() {
        outside = Some(0);
    }
    let check_range = |from: u64, to: u64, outside: &mut Option<u64>| {
        seq.fold_block(from, to, (), |(), m, x| {
            if x > T::neg_infinity() && outside.is_none() {
                *outside = Some(m);
            }
        });
    };
    check_range(0, first, &mut outside);
    check_range(last, seq.support_bound(), &mut outside);
    if let Some(index) = outside {
        return Err(Error::OutOfRange { index, lo: first + 1, hi: last });
    }
    let block_values = spec.boundaries.windows(2).map(|w| {
        let mut inner = Vec::new();
        seq.fold_block(w[0], w[1], (), |(), _, x| inner.push(x));
        log_lp(inner.into_iter(), spec.p)
    });
    Ok(log_lp(block_values, spec.q))
}

/// `(q n^2 - l n, ln rho_n)`: the block-constant and per-degree parts of
/// the log block weight. Shared by the weight evaluation and by
/// [`inverse_weight_multiplier`] so the two cancel exactly, coordinate by
/// coordinate, in floating point.
fn weight_log_parts<T: Real>(
    params: &ExpWeightParams<T>,
    form: &ExplicitFormSpec,
    n: u64,
) -> Result<(T, T)> {
    let nn = T::of(n as f64);
    let quad_lin = form.quad_coeff(params) * nn * nn - form.linear_coeff(params) * nn;
    let log_inner = form.log_inner_factor(params, n)?;
    Ok((quad_lin, log_inner))
}

/// Boundedness diagnostic for a multiplier candidate.
#[derive(Debug, Clone)]
pub struct MultiplierDiagnostic<T> {
    pub target: MultiplierTarget<T>,
    /// `false` exactly at `(a, b) = (1, 1)`, where the block weights are
    /// the classical literal ones.
    pub generalized: bool,
    /// `(n, ln inner-norm of the weighted block)`.
    pub per_block: Vec<(u64, T)>,
    /// `ln` of the outer `ell^s` aggregate over the surveyed blocks.
    pub aggregate: T,
    pub tail_slope: Option<T>,
    pub verdict: Verdict,
}

impl<T: Real> MultiplierDiagnostic<T> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.target.case.to_string(),
            "inner_exponent": float_json(self.target.r),
            "outer_exponent": float_json(self.target.s),
            "generalized": self.generalized,
            "blocks": self.per_block.iter().map(|&(n, v)| serde_json::json!({
                "n": n,
                "log_value": float_json(v),
            })).collect::<Vec<_>>(),
            "aggregate_log": float_json(self.aggregate),
            "tail_slope": self.tail_slope.map(float_json),
            "verdict": self.verdict.label(),
        })
    }
}

/// Evaluate the weighted mixed norm that controls whether `lambda`
/// multiplies the space into `ell^p`, over blocks `n_lo ..= n_hi`.
///
/// Per coordinate the weight is `exp(q n^2 - l n - m ln rho_n)`; blocks
/// use the theorem-mode boundaries. The verdict applies the finite-range
/// tail heuristic to the per-block values: for finite `s` a summable
/// aggregate additionally needs those values to decay, so a `bounded`
/// verdict must be read together with `aggregate`.
///
/// # Errors
/// `n_lo` must be large enough that the inner radius factor is a genuine
/// radius (`Domain` otherwise, e.g. `n_lo = 1` at `b = 1`).
pub fn multiplier_check<T: Real>(
    params: &ExpWeightParams<T>,
    form: &ExplicitFormSpec,
    lambda: &CoefficientSequence<T>,
    p: T,
    n_lo: u64,
    n_hi: u64,
) -> Result<MultiplierDiagnostic<T>> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidParams(format!(
            "invalid block range {n_lo}..={n_hi}"
        )));
    }
    let target = multiplier_target(p)?;
    let mut per_block = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    for n in n_lo..=n_hi {
        let (quad_lin, log_inner) = weight_log_parts(params, form, n)?;
        let m_lo = blocks::integer_boundary(params, BlockMode::Theorem, n);
        let m_hi = blocks::integer_boundary(params, BlockMode::Theorem, n + 1);
        let mut terms = Vec::new();
        lambda.fold_block(m_lo, m_hi, (), |(), m, log_lambda| {
            if log_lambda > T::neg_infinity() {
                terms.push(log_lambda + (quad_lin - T::of(m as f64) * log_inner));
            }
        });
        per_block.push((n, log_lp(terms.into_iter(), target.r)));
    }
    let aggregate = log_lp(per_block.iter().map(|&(_, v)| v), target.s);
    let tail_slope = slope_of(&per_block, 2);
    let quarter = slope_of(&per_block, 4);
    let verdict = Verdict::classify(tail_slope, quarter, T::of(1e-2));
    let one = T::one();
    Ok(MultiplierDiagnostic {
        target,
        generalized: !(params.a() == one && params.b() == one),
        per_block,
        aggregate,
        tail_slope,
        verdict,
    })
}

fn slope_of<T: Real>(per_block: &[(u64, T)], denom: usize) -> Option<T> {
    let finite: Vec<(u64, T)> = per_block
        .iter()
        .filter(|(_, v)| v.is_finite())
        .copied()
        .collect();
    let count = finite.len().div_ceil(denom);
    if count < 2 {
        return None;
    }
    let tail = &finite[finite.len() - count..];
    let xs: Vec<T> = tail.iter().map(|&(n, _)| T::of(n as f64)).collect();
    let ys: Vec<T> = tail.iter().map(|&(_, v)| v).collect();
    crate::numeric::linear_fit(&xs, &ys).ok().map(|f| f.slope)
}

/// Coordinatewise product `|lambda_m| * |b_m|` (log-domain sum); the
/// result's support bound is the smaller of the two.
pub fn apply_multiplier<T: Real>(
    lambda: &CoefficientSequence<T>,
    seq: &CoefficientSequence<T>,
) -> CoefficientSequence<T> {
    let bound = lambda.support_bound().min(seq.support_bound());
    let lambda = lambda.clone();
    let seq = seq.clone();
    CoefficientSequence::from_rule(bound, move |m| {
        let a = lambda.log_abs(m);
        let b = seq.log_abs(m);
        // A zero coordinate zeroes the product even against an infinite
        // log on the other side.
        if a == T::neg_infinity() || b == T::neg_infinity() {
            T::neg_infinity()
        } else {
            a + b
        }
    })
}

/// The canonical multiplier candidate: `lambda_m = 1 / w_{n,m}` on each
/// theorem-mode block, i.e. exactly the reciprocal of the block weights
/// used by [`multiplier_check`]. Its weighted coordinates are all 1, so
/// its `p = inf` multiplier norm is exactly 1 — the boundary case of the
/// multiplier condition. Blocks whose inner factor is not a positive
/// radius (e.g. `n = 1` at `b = 1`, where the printed weight would be
/// infinite) carry zero coefficients instead.
pub fn inverse_weight_multiplier<T: Real>(
    params: &ExpWeightParams<T>,
    form: &ExplicitFormSpec,
    n_max: u64,
) -> CoefficientSequence<T> {
    let mut boundaries = Vec::with_capacity((n_max + 1) as usize);
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        boundaries.push(blocks::integer_boundary(params, BlockMode::Theorem, n));
        rows.push(weight_log_parts(params, form, n).ok());
    }
    boundaries.push(blocks::integer_boundary(params, BlockMode::Theorem, n_max + 1));
    let bound = *boundaries.last().expect("nonempty");
    let first = boundaries[0];
    CoefficientSequence::from_rule(bound, move |m| {
        if m <= first {
            return T::neg_infinity();
        }
        let k = boundaries.partition_point(|&b| b < m) - 1;
        match rows[k] {
            Some((quad_lin, log_inner)) => {
                -(quad_lin - T::of(m as f64) * log_inner)
            }
            None => T::neg_infinity(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::extremal_block_sequence;
    use proptest::prelude::*;

    fn params(a: f64, b: f64) -> ExpWeightParams<f64> {
        ExpWeightParams::new(a, b).unwrap()
    }

    #[test]
    fn target_exponents_cover_the_three_regimes() {
        let t = multiplier_target(1.0_f64).unwrap();
        assert_eq!((t.r, t.s, t.case), (2.0, 1.0, 'a'));
        let t = multiplier_target(1.5_f64).unwrap();
        assert_eq!((t.r, t.s, t.case), (6.0, 1.5, 'a'));
        let t = multiplier_target(2.0_f64).unwrap();
        assert_eq!((t.r, t.s, t.case), (f64::INFINITY, 2.0, 'b'));
        let t = multiplier_target(7.0_f64).unwrap();
        assert_eq!((t.r, t.s, t.case), (f64::INFINITY, 7.0, 'b'));
        let t = multiplier_target(f64::INFINITY).unwrap();
        assert_eq!((t.r, t.s, t.case), (f64::INFINITY, f64::INFINITY, 'c'));
        assert!(multiplier_target(0.5_f64).is_err());
        assert!(multiplier_target(f64::NAN).is_err());
    }

    #[test]
    fn block_norm_of_the_worked_example() {
        // Blocks (0, 2] and (2, 4] of (-, 1, 1, 1, 1): each inner ell^2
        // norm is sqrt(2); the outer sup keeps it.
        let spec = BlockSpaceSpec::new(vec![0, 2, 4], 2.0, f64::INFINITY).unwrap();
        let seq =
            CoefficientSequence::from_sparse((1..=4).map(|m| (m, 1.0)).collect()).unwrap();
        let v = block_pq_norm(&spec, &seq).unwrap();
        assert!((v - 0.5 * 2.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn block_norm_rejects_support_outside_the_range() {
        let spec = BlockSpaceSpec::new(vec![2, 8], 1.0, 1.0).unwrap();
        let inside = CoefficientSequence::unit_monomial(5);
        assert!(block_pq_norm(&spec, &inside).is_ok());
        for m in [0, 1, 2, 9] {
            let outside = CoefficientSequence::unit_monomial(m);
            assert!(
                matches!(
                    block_pq_norm(&spec, &outside).unwrap_err(),
                    Error::OutOfRange { index, .. } if index == m
                ),
                "index {m} should be out of range"
            );
        }
    }

    #[test]
    fn spec_validation() {
        assert!(BlockSpaceSpec::new(vec![3], 1.0, 1.0).is_err());
        assert!(BlockSpaceSpec::new(vec![3, 3], 1.0, 1.0).is_err());
        assert!(BlockSpaceSpec::new(vec![3, 4], 0.5, 1.0).is_err());
        assert!(BlockSpaceSpec::new(vec![3, 4], 1.0, f64::NAN).is_err());
        assert!(BlockSpaceSpec::new(vec![3, 4], 1.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn literal_block_weight_matches_frozen_value() {
        // At (1, 1) the weight on block 3 at degree 100 is
        // e^9 (1 - 1/9)^(-100): its log is 9 - 100 ln(8/9).
        let p = params(1.0, 1.0);
        let lambda = CoefficientSequence::unit_monomial(100);
        let d = multiplier_check(
            &p,
            &ExplicitFormSpec::printed(),
            &lambda,
            f64::INFINITY,
            2,
            4,
        )
        .unwrap();
        assert!(!d.generalized);
        assert_eq!(d.target.case, 'c');
        let block3 = d.per_block.iter().find(|&&(n, _)| n == 3).unwrap().1;
        assert!((block3 - 20.778303565638345).abs() < 1e-12, "got {block3}");
        assert_eq!(d.aggregate, block3, "sup over blocks picks the only finite one");
    }

    #[test]
    fn inverse_weight_multiplier_is_the_boundary_case() {
        let p = params(1.0, 1.0);
        let form = ExplicitFormSpec::printed();
        let lambda = inverse_weight_multiplier(&p, &form, 12);
        let d = multiplier_check(&p, &form, &lambda, f64::INFINITY, 2, 12).unwrap();
        // Every weighted coordinate cancels exactly, so each block's sup
        // and the aggregate are exactly 0 in floating point.
        for &(n, v) in &d.per_block {
            assert_eq!(v, 0.0, "block {n}");
        }
        assert_eq!(d.aggregate, 0.0);
        assert_eq!(d.verdict, Verdict::Bounded);
        // Block 1's inner factor vanishes at b = 1, so the candidate is
        // zero there rather than infinite.
        assert_eq!(lambda.log_abs(2), f64::NEG_INFINITY);
        assert_eq!(lambda.log_abs(16), f64::NEG_INFINITY);
        assert!(lambda.log_abs(17).is_finite());
    }

    #[test]
    fn check_requires_a_valid_starting_block() {
        let p = params(1.0, 1.0);
        let lambda = CoefficientSequence::unit_monomial(100);
        let err = multiplier_check(
            &p,
            &ExplicitFormSpec::printed(),
            &lambda,
            2.0,
            1,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "got {err:?}");
    }

    #[test]
    fn applying_a_multiplier_multiplies_magnitudes() {
        let a = CoefficientSequence::from_magnitudes(&[1.0_f64, 2.0, 0.0, 4.0]).unwrap();
        let b = CoefficientSequence::from_magnitudes(&[3.0_f64, 0.5, 7.0]).unwrap();
        let p = apply_multiplier(&a, &b);
        assert_eq!(p.support_bound(), 2);
        assert!((p.magnitude(0) - 3.0).abs() < 1e-15);
        assert!((p.magnitude(1) - 1.0).abs() < 1e-12);
        assert_eq!(p.magnitude(2), 0.0);
        assert_eq!(p.magnitude(3), 0.0);
    }

    #[test]
    fn weighted_extremal_product_stays_under_control() {
        // The inverse-weight multiplier applied to the extremal sequence
        // leaves per-coordinate logs bounded above: the n^2-scale growth
        // of the extremal entries is exactly offset by the weights.
        let p = params(1.0, 1.0);
        let form = ExplicitFormSpec::printed();
        let scheme = crate::blocks::BlockScheme::new(p, BlockMode::Theorem, 10).unwrap();
        let extremal =
            extremal_block_sequence(&scheme, &crate::critical::SolveOptions::default())
                .unwrap();
        let lambda = inverse_weight_multiplier(&p, &form, 10);
        let product = apply_multiplier(&lambda, &extremal);
        let mut sup = f64::NEG_INFINITY;
        for m in 0..=product.support_bound() {
            sup = sup.max(product.log_abs(m));
        }
        assert!(sup.is_finite());
        assert!(sup < 5.0, "sup of log product {sup}");
    }

    proptest! {
        // With p = q the block structure is invisible: the mixed norm is
        // the plain ell^p norm no matter how the boundaries fall.
        #[test]
        fn collapsed_exponents_reduce_to_ell_p(
            entries in proptest::collection::btree_map(3_u64..60, 0.01_f64..10.0, 1..20),
            cuts in proptest::collection::btree_set(3_u64..60, 0..6),
            p_idx in 0_usize..4,
        ) {
            let p = [1.0, 1.5, 2.0, 3.0][p_idx];
            let mut boundaries = vec![2_u64];
            boundaries.extend(cuts.iter().copied().filter(|&c| c > 2 && c < 60));
            boundaries.push(60);
            boundaries.dedup();
            let spec = BlockSpaceSpec::new(boundaries, p, p).unwrap();
            let seq = CoefficientSequence::from_sparse(
                entries.iter().map(|(&m, &x)| (m, x)).collect()
            ).unwrap();
            let got = block_pq_norm(&spec, &seq).unwrap();
            let direct = (1.0 / p) * entries.values().map(|x| x.powf(p)).sum::<f64>().ln();
            prop_assert!(
                (got - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                "{got} vs {direct}"
            );
        }

        // ell^p norms are nonincreasing in p.
        #[test]
        fn mixed_norm_is_monotone_in_the_exponent(
            entries in proptest::collection::btree_map(3_u64..60, 0.01_f64..10.0, 1..20),
            p1 in 1.0_f64..6.0,
            dp in 0.1_f64..6.0,
        ) {
            let p2 = p1 + dp;
            let seq = CoefficientSequence::from_sparse(
                entries.iter().map(|(&m, &x)| (m, x)).collect()
            ).unwrap();
            let norm_at = |p: f64| {
                let spec = BlockSpaceSpec::new(vec![2, 30, 60], p, p).unwrap();
                block_pq_norm(&spec, &seq).unwrap()
            };
            prop_assert!(norm_at(p2) <= norm_at(p1) + 1e-10);
        }

        #[test]
        fn product_log_is_sum_of_logs(
            xs in proptest::collection::vec(0.0_f64..10.0, 8),
            ys in proptest::collection::vec(0.0_f64..10.0, 8),
        ) {
            let a = CoefficientSequence::from_magnitudes(&xs).unwrap();
            let b = CoefficientSequence::from_magnitudes(&ys).unwrap();
            let p = apply_multiplier(&a, &b);
            for m in 0..8_u64 {
                let want = a.log_abs(m) + b.log_abs(m);
                let got = p.log_abs(m);
                if want.is_finite() {
                    prop_assert!((got - want).abs() < 1e-12);
                } else {
                    prop_assert_eq!(got, f64::NEG_INFINITY);
                }
            }
        }
    }
}
