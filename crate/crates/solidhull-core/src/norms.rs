//! Block norms on the coefficient side of the weighted space.
//!
//! The hull characterization trades the sup-norm of an analytic function
//! for per-block quantities of its coefficient magnitudes. Two versions
//! are implemented:
//!
//! * the *canonical* block norm, anchored at solved critical radii:
//!
//!   ```text
//!   N_n(b) = ln v(r_{M_n})
//!          + (1/2) ln sum_{M_n < m <= M_{n+1}} |b_m|^2 r_{M_n}^{2m}
//!   ```
//!
//! * the *explicit* block norm, a closed form in `n` that replaces both
//!   the weight value and the critical radius by elementary expressions
//!   on theorem-mode blocks `(n^alpha, (n+1)^alpha]`.
//!
//! The explicit form exists in several printed variants which differ in
//! the quadratic coefficient, the inner radius factor, and (for `b > 1`)
//! the sign of a linear correction; [`ExplicitFormSpec`] names the choices
//! so they can be compared experimentally instead of trusted blindly.
//! Membership diagnostics then reduce to "does the per-block profile stay
//! bounded as `n` grows", which [`membership_diagnostic`] estimates from
//! tail slopes — an honest finite-range heuristic, not a proof.

use rayon::prelude::*;

use crate::blocks::{self, BlockMode, BlockScheme};
use crate::critical::{critical_radius, SolveOptions};
use crate::error::{Error, Result};
use crate::numeric::{float_json, linear_fit, LogSumExpAcc};
use crate::sequence::CoefficientSequence;
use crate::weight::ExpWeightParams;
use crate::Real;

/// Coefficient of `n^2` in the explicit block weight exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadCoeff {
    /// `a * G^(-beta)` — the coefficient as usually stated.
    Stated,
    /// `a * G^(-b) = G / b` — the coefficient the weight asymptotics
    /// actually produce. The two agree exactly when `a * b = 1`.
    Derived,
}

/// Which closed form of the block's inner radius factor to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerFactor {
    /// `1 - G n^(-2/b)`, plus `beta G^2 n^(-4/b)` when `b > 1`: the
    /// two-term critical-gap expansion, valid for every admissible `b`.
    General,
    /// `1 - G^(-1) n^(-2/b) + beta G^(-2) n^(-4/b)`, a variant printed
    /// for `b = 2` with the gap coefficient inverted; defined only there.
    Specialized,
}

/// Sign of the linear correction `beta (a b)^(2 beta) n` in the explicit
/// weight exponent (present only for `b > 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearTermSign {
    Positive,
    Negative,
}

/// A fully specified variant of the explicit block norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplicitFormSpec {
    pub quad: QuadCoeff,
    pub inner: InnerFactor,
    pub linear_sign: LinearTermSign,
}

impl ExplicitFormSpec {
    /// The variant as usually printed.
    pub fn printed() -> Self {
        Self {
            quad: QuadCoeff::Stated,
            inner: InnerFactor::General,
            linear_sign: LinearTermSign::Positive,
        }
    }

    /// The variant whose pieces all match the derived asymptotics.
    pub fn corrected() -> Self {
        Self {
            quad: QuadCoeff::Derived,
            inner: InnerFactor::General,
            linear_sign: LinearTermSign::Negative,
        }
    }

    /// Every combination, for experiments that adjudicate between them.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(8);
        for quad in [QuadCoeff::Stated, QuadCoeff::Derived] {
            for inner in [InnerFactor::General, InnerFactor::Specialized] {
                for linear_sign in [LinearTermSign::Positive, LinearTermSign::Negative] {
                    out.push(Self { quad, inner, linear_sign });
                }
            }
        }
        out
    }

    /// Short human-readable tag, e.g. `stated/general/positive`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}",
            match self.quad {
                QuadCoeff::Stated => "stated",
                QuadCoeff::Derived => "derived",
            },
            match self.inner {
                InnerFactor::General => "general",
                InnerFactor::Specialized => "specialized",
            },
            match self.linear_sign {
                LinearTermSign::Positive => "positive",
                LinearTermSign::Negative => "negative",
            }
        )
    }

    /// The quadratic coefficient `q` in the weight exponent `-q n^2 + ...`.
    pub fn quad_coeff<T: Real>(&self, params: &ExpWeightParams<T>) -> T {
        let c = params.constants();
        match self.quad {
            QuadCoeff::Stated => params.a() * c.gap_coeff.powf(-c.beta),
            QuadCoeff::Derived => params.a() * c.gap_coeff.powf(-params.b()),
        }
    }

    /// The signed linear coefficient `l` in `-q n^2 + l n`; zero for
    /// `b <= 1`, where the expansion has no linear term.
    pub fn linear_coeff<T: Real>(&self, params: &ExpWeightParams<T>) -> T {
        if params.b() <= T::one() {
            return T::zero();
        }
        let c = params.constants();
        let ab = params.a() * params.b();
        let magnitude = c.beta * ab.powf(T::of(2.0) * c.beta);
        match self.linear_sign {
            LinearTermSign::Positive => magnitude,
            LinearTermSign::Negative => -magnitude,
        }
    }

    /// `ln` of the inner radius factor at block `n`.
    ///
    /// # Errors
    /// `Domain` where the factor is not a radius: nonpositive (too-small
    /// `n`), or the specialized form requested away from `b = 2`.
    pub fn log_inner_factor<T: Real>(
        &self,
        params: &ExpWeightParams<T>,
        n: u64,
    ) -> Result<T> {
        let c = params.constants();
        let b = params.b();
        let two = T::of(2.0);
        let nn = T::of(n as f64);
        let n_2b = nn.powf(-two / b);
        let x = match self.inner {
            InnerFactor::General => {
                let first = -c.gap_coeff * n_2b;
                if b > T::one() {
                    first + c.beta * c.gap_coeff * c.gap_coeff * n_2b * n_2b
                } else {
                    first
                }
            }
            InnerFactor::Specialized => {
                if b != two {
                    return Err(Error::Domain(format!(
                        "the specialized inner factor is defined only for b = 2, got b = {b}"
                    )));
                }
                let g_inv = c.gap_coeff.recip();
                -g_inv * n_2b + c.beta * g_inv * g_inv * n_2b * n_2b
            }
        };
        if !(x > -T::one()) {
            return Err(Error::Domain(format!(
                "inner radius factor is nonpositive at block n = {n}; the explicit form needs larger n"
            )));
        }
        Ok(x.ln_1p())
    }
}

/// Canonical block norm of block `n` of the scheme (its log).
///
/// Blocks with no nonzero coefficient give `-inf`.
pub fn canonical_block_norm<T: Real>(
    scheme: &BlockScheme<T>,
    seq: &CoefficientSequence<T>,
    n: u64,
    opts: &SolveOptions<T>,
) -> Result<T> {
    let (m_lo, m_hi) = scheme.block(n)?;
    let cp = critical_radius(scheme.params(), T::of(m_lo as f64), opts)?;
    let log_r = (-cp.gap).ln_1p();
    let log_v = scheme.params().log_weight_gap(cp.gap);
    let two = T::of(2.0);
    let acc = seq.fold_block(m_lo, m_hi, LogSumExpAcc::new(), |mut acc, m, log_abs| {
        acc.push(two * (log_abs + T::of(m as f64) * log_r));
        acc
    });
    Ok(log_v + T::of(0.5) * acc.value())
}

/// Explicit block norm of block `n` on theorem-mode boundaries (its log):
///
/// ```text
/// -q n^2 + l n + (1/2) ln sum_{n^alpha < m <= (n+1)^alpha} |b_m|^2 rho_n^(2m)
/// ```
///
/// with `q`, `l`, and the inner factor `rho_n` chosen by `form`.
pub fn explicit_block_norm<T: Real>(
    params: &ExpWeightParams<T>,
    form: &ExplicitFormSpec,
    seq: &CoefficientSequence<T>,
    n: u64,
) -> Result<T> {
    if n == 0 {
        return Err(Error::Domain(
            "explicit block norms start at block n = 1".into(),
        ));
    }
    let log_inner = form.log_inner_factor(params, n)?;
    let m_lo = blocks::integer_boundary(params, BlockMode::Theorem, n);
    let m_hi = blocks::integer_boundary(params, BlockMode::Theorem, n + 1);
    let two = T::of(2.0);
    let acc = seq.fold_block(m_lo, m_hi, LogSumExpAcc::new(), |mut acc, m, log_abs| {
        acc.push(two * (log_abs + T::of(m as f64) * log_inner));
        acc
    });
    let nn = T::of(n as f64);
    Ok(-form.quad_coeff(params) * nn * nn
        + form.linear_coeff(params) * nn
        + T::of(0.5) * acc.value())
}

/// Per-block canonical norms over a range, with summary statistics.
#[derive(Debug, Clone)]
pub struct BlockNormProfile<T> {
    pub a: T,
    pub b: T,
    pub mode: BlockMode,
    /// `(n, log N_n)`, in increasing `n`.
    pub per_block: Vec<(u64, T)>,
    /// Max of the stored logs (`-inf` if every block is empty).
    pub sup_log: T,
    /// First block attaining the sup; `None` when all blocks are empty.
    pub argmax_n: Option<u64>,
    /// Least-squares slope of `log N_n` against `n` over the final half
    /// of the finite entries; `None` with fewer than two such entries.
    pub tail_slope: Option<T>,
}

impl<T: Real> BlockNormProfile<T> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": float_json(self.a),
            "b": float_json(self.b),
            "mode": match self.mode {
                BlockMode::Canonical => "canonical",
                BlockMode::Theorem => "theorem",
            },
            "blocks": self.per_block.iter().map(|&(n, v)| serde_json::json!({
                "n": n,
                "log_value": float_json(v),
            })).collect::<Vec<_>>(),
            "sup_log": float_json(self.sup_log),
            "argmax_n": self.argmax_n,
            "tail_slope": self.tail_slope.map(float_json),
        })
    }
}

/// Slope of the final `1/denom` fraction of the finite entries.
fn slope_over_tail<T: Real>(per_block: &[(u64, T)], denom: usize) -> Option<T> {
    let finite: Vec<(T, T)> = per_block
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|&(n, v)| (T::of(n as f64), v))
        .collect();
    let count = finite.len().div_ceil(denom);
    if count < 2 {
        return None;
    }
    let tail = &finite[finite.len() - count..];
    let xs: Vec<T> = tail.iter().map(|&(x, _)| x).collect();
    let ys: Vec<T> = tail.iter().map(|&(_, y)| y).collect();
    linear_fit(&xs, &ys).ok().map(|f| f.slope)
}

/// Canonical block norms for `n_lo ..= n_hi` of the scheme.
pub fn hull_norm_profile<T: Real>(
    scheme: &BlockScheme<T>,
    seq: &CoefficientSequence<T>,
    n_lo: u64,
    n_hi: u64,
    opts: &SolveOptions<T>,
) -> Result<BlockNormProfile<T>> {
    if n_lo > n_hi {
        return Err(Error::InvalidParams(format!(
            "empty block range {n_lo}..={n_hi}"
        )));
    }
    let per_block: Vec<(u64, T)> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| canonical_block_norm(scheme, seq, n, opts).map(|v| (n, v)))
        .collect::<Result<_>>()?;
    let mut sup_log = T::neg_infinity();
    let mut argmax_n = None;
    for &(n, v) in &per_block {
        if v > sup_log {
            sup_log = v;
            argmax_n = Some(n);
        }
    }
    Ok(BlockNormProfile {
        a: scheme.params().a(),
        b: scheme.params().b(),
        mode: scheme.mode(),
        tail_slope: slope_over_tail(&per_block, 2),
        per_block,
        sup_log,
        argmax_n,
    })
}

/// Outcome of a finite-range boundedness estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Classify from a tail slope and a shorter (final-quarter) slope:
    /// growth beyond `tol` in the tail means growing; a flat tail whose
    /// final quarter nevertheless trends up is a trend break and stays
    /// inconclusive; otherwise bounded.
    pub fn classify<T: Real>(tail: Option<T>, quarter: Option<T>, tol: T) -> Self {
        match tail {
            None => Verdict::Inconclusive,
            Some(t) if !t.is_finite() => Verdict::Inconclusive,
            Some(t) if t > tol => Verdict::Growing,
            Some(_) => {
                if quarter.map_or(false, |q| q.is_finite() && q > tol) {
                    Verdict::Inconclusive
                } else {
                    Verdict::Bounded
                }
            }
        }
    }
}

/// A hull-norm profile together with its boundedness classification.
#[derive(Debug, Clone)]
pub struct MembershipReport<T> {
    pub profile: BlockNormProfile<T>,
    /// Slope magnitude treated as "flat" by the verdict.
    pub slope_tol: T,
    /// Slope over the final quarter of the finite entries.
    pub quarter_slope: Option<T>,
    /// Flat tail but a rising final quarter.
    pub trend_break: bool,
    pub verdict: Verdict,
}

impl<T: Real> MembershipReport<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.profile.to_json();
        let obj = v.as_object_mut().expect("profile serializes to an object");
        obj.insert("slope_tol".into(), float_json(self.slope_tol));
        obj.insert(
            "quarter_slope".into(),
            self.quarter_slope.map(float_json).into(),
        );
        obj.insert("trend_break".into(), self.trend_break.into());
        obj.insert("verdict".into(), self.verdict.label().into());
        v
    }
}

/// Estimate whether the canonical block norms of `seq` stay bounded.
///
/// This inspects only blocks `n_lo ..= n_hi`; a profile that looks flat
/// over a finite range proves nothing, which is why the result is a
/// [`Verdict`] and not a boolean.
pub fn membership_diagnostic<T: Real>(
    scheme: &BlockScheme<T>,
    seq: &CoefficientSequence<T>,
    n_lo: u64,
    n_hi: u64,
    slope_tol: T,
    opts: &SolveOptions<T>,
) -> Result<MembershipReport<T>> {
    let profile = hull_norm_profile(scheme, seq, n_lo, n_hi, opts)?;
    let quarter_slope = slope_over_tail(&profile.per_block, 4);
    let verdict = Verdict::classify(profile.tail_slope, quarter_slope, slope_tol);
    let trend_break = matches!(verdict, Verdict::Inconclusive)
        && profile.tail_slope.is_some()
        && quarter_slope.map_or(false, |q| q > slope_tol);
    Ok(MembershipReport { profile, slope_tol, quarter_slope, trend_break, verdict })
}

/// Per-block gap between the canonical and explicit block norms.
#[derive(Debug, Clone)]
pub struct ComparisonReport<T> {
    pub form: ExplicitFormSpec,
    /// `(n, canonical - explicit)` over blocks where both are finite;
    /// blocks without nonzero coefficients are skipped, so the report is
    /// empty for the zero sequence.
    pub diffs: Vec<(u64, T)>,
    pub min: Option<T>,
    pub max: Option<T>,
}

impl<T: Real> ComparisonReport<T> {
    /// Width of the difference band; small spread means the explicit form
    /// tracks the canonical norm up to a stable additive constant.
    pub fn spread(&self) -> Option<T> {
        match (self.min, self.max) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "form": self.form.label(),
            "diffs": self.diffs.iter().map(|&(n, d)| serde_json::json!({
                "n": n,
                "difference": float_json(d),
            })).collect::<Vec<_>>(),
            "min": self.min.map(float_json),
            "max": self.max.map(float_json),
            "spread": self.spread().map(float_json),
        })
    }
}

/// Compare the canonical block norm against an explicit variant on the
/// same theorem-mode blocks.
///
/// # Errors
/// The scheme must be theorem-mode — the explicit form's blocks are
/// `(n^alpha, (n+1)^alpha]`, and comparing across different partitions
/// would be meaningless.
pub fn compare_canonical_vs_explicit<T: Real>(
    scheme: &BlockScheme<T>,
    form: &ExplicitFormSpec,
    seq: &CoefficientSequence<T>,
    n_lo: u64,
    n_hi: u64,
    opts: &SolveOptions<T>,
) -> Result<ComparisonReport<T>> {
    if scheme.mode() != BlockMode::Theorem {
        return Err(Error::InvalidParams(
            "explicit-form comparisons need a theorem-mode scheme".into(),
        ));
    }
    let diffs: Vec<Option<(u64, T)>> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| -> Result<Option<(u64, T)>> {
            let canonical = canonical_block_norm(scheme, seq, n, opts)?;
            let explicit = explicit_block_norm(scheme.params(), form, seq, n)?;
            if canonical.is_finite() && explicit.is_finite() {
                Ok(Some((n, canonical - explicit)))
            } else {
                // Both are -inf exactly when the block has no nonzero
                // coefficient; the difference is undefined there.
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<(u64, T)> = diffs.into_iter().flatten().collect();
    let min = diffs.iter().map(|&(_, d)| d).reduce(T::min);
    let max = diffs.iter().map(|&(_, d)| d).reduce(T::max);
    Ok(ComparisonReport { form: *form, diffs, min, max })
}
