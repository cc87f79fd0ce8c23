//! Small numerical kernels used throughout the crate: stable log-domain
//! accumulation, golden-section maximization, and least-squares line fits.
//!
//! Everything here works in the log domain or on logarithms of data, because
//! the quantities this crate manipulates (weighted block norms, extremal
//! coefficients) routinely exceed the dynamic range of any float type.

use crate::error::{Error, Result};
use crate::Real;

/// A log-domain value as JSON: finite numbers stay numbers, while the
/// infinities (legitimate values here: empty blocks are `-inf`) become
/// the strings `"inf"` / `"-inf"` since JSON has no literal for them.
pub fn float_json<T: Real>(x: T) -> serde_json::Value {
    let x = x.to_f64().unwrap_or(f64::NAN);
    match serde_json::Number::from_f64(x) {
        Some(n) => serde_json::Value::Number(n),
        None if x == f64::INFINITY => serde_json::Value::String("inf".into()),
        None if x == f64::NEG_INFINITY => serde_json::Value::String("-inf".into()),
        None => serde_json::Value::String("nan".into()),
    }
}

/// `ln(exp(x) + exp(y))` without intermediate overflow.
///
/// `-inf` acts as the additive identity, so missing terms can be encoded
/// as `-inf` and dropped for free.
pub fn log_add_exp<T: Real>(x: T, y: T) -> T {
    if x == T::neg_infinity() {
        return y;
    }
    if y == T::neg_infinity() {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Streaming accumulator for `ln(sum exp(x_i))`.
///
/// Single pass with a running maximum: when a new maximum arrives the
/// accumulated sum is rescaled, so no term is ever exponentiated above 1.
/// An empty accumulator (or one fed only `-inf`) evaluates to `-inf`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExpAcc<T> {
    max: T,
    sum: T,
}

impl<T: Real> Default for LogSumExpAcc<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogSumExpAcc<T> {
    pub fn new() -> Self {
        Self { max: T::neg_infinity(), sum: T::zero() }
    }

    /// Absorb one log-domain term.
    pub fn push(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.sum = self.sum + (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + T::one();
            self.max = x;
        }
    }

    /// `ln(sum exp)` of everything pushed so far.
    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() || self.max == T::infinity() {
            return self.max;
        }
        self.max + self.sum.ln()
    }

    /// Largest term pushed so far.
    pub fn max_term(&self) -> T {
        self.max
    }
}

/// `ln(sum_i exp(x_i))` over a stream of log-domain terms; see
/// [`LogSumExpAcc`] for the incremental form.
pub fn log_sum_exp<T: Real, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut acc = LogSumExpAcc::new();
    for x in terms {
        acc.push(x);
    }
    acc.value()
}

/// Result of a golden-section search.
#[derive(Debug, Clone, Copy)]
pub struct GoldenMax<T> {
    /// Abscissa of the located maximum.
    pub x: T,
    /// Objective value at `x`.
    pub value: T,
    /// Number of objective evaluations spent.
    pub evaluations: usize,
}

/// Maximize a continuous function on `[lo, hi]` by golden-section search.
///
/// The bracket shrinks until its width falls below `xtol * max(1, |x|)` or
/// `max_iter` interior evaluations have been spent. The caller is expected
/// to have grid-bracketed a maximum first; on a multimodal objective this
/// converges to *some* local maximum inside the bracket.
pub fn golden_max<T: Real>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    xtol: T,
    max_iter: usize,
) -> GoldenMax<T> {
    let invphi = T::of(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * invphi;
    let mut d = a + (b - a) * invphi;
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evaluations = 2;
    while evaluations < max_iter {
        let mid = (a + b) * T::of(0.5);
        if (b - a).abs() <= xtol * T::one().max(mid.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc >= fd {
        GoldenMax { x: c, value: fc, evaluations }
    } else {
        GoldenMax { x: d, value: fd, evaluations }
    }
}

/// Least-squares line through `(x_i, y_i)`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination; 1 means a perfect fit.
    pub r_squared: T,
}

/// Ordinary least squares for `y = slope * x + intercept`.
///
/// # Errors
/// Needs at least two distinct abscissae; fewer points (or a degenerate
/// `x` spread) is a domain error.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams(format!(
            "linear_fit: {} abscissae vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Domain(
            "linear_fit needs at least two points".into(),
        ));
    }
    let n = T::of(xs.len() as f64);
    let sx = xs.iter().fold(T::zero(), |s, &x| s + x);
    let sy = ys.iter().fold(T::zero(), |s, &y| s + y);
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::Domain(
            "linear_fit: abscissae are all identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(LineFit { slope, intercept, r_squared })
}

/// Fit `|y| ~ C * x^order` by least squares on `(ln x, ln |y|)`.
///
/// This is the order-of-convergence estimator: `slope` is the fitted order
/// and `intercept` is `ln C`.
///
/// # Errors
/// Every `x` must be positive and every `y` nonzero and finite; a value
/// that cannot be logged is a domain error rather than a silent drop.
pub fn log_log_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "log_log_fit: nonpositive abscissa {x}"
            )));
        }
        let ay = y.abs();
        if !(ay > T::zero()) || !ay.is_finite() {
            return Err(Error::Domain(format!(
                "log_log_fit: ordinate {y} has no logarithm"
            )));
        }
        lx.push(x.ln());
        ly.push(ay.ln());
    }
    linear_fit(&lx, &ly)
}

/// `count` points geometrically spaced over `[lo, hi]` (both endpoints kept).
pub fn geometric_grid<T: Real>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if !(lo > T::zero()) || !(hi > lo) || count < 2 {
        return Err(Error::InvalidParams(format!(
            "geometric_grid: need 0 < lo < hi and count >= 2, got [{lo}, {hi}] x {count}"
        )));
    }
    let ratio = (hi / lo).ln() / T::of((count - 1) as f64);
    // Pin both endpoints and clamp the interior: `exp` of the accumulated
    // log can overshoot `hi` (or undershoot `lo`) by an ulp, and callers
    // treat the endpoints as hard domain limits.
    Ok((0..count)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == count - 1 {
                hi
            } else {
                (lo * (ratio * T::of(k as f64)).exp()).max(lo).min(hi)
            }
        })
        .collect())
}

/// Geometrically spaced *integers* over `[lo, hi]`, deduplicated and sorted.
pub fn integer_geometric_grid(lo: u64, hi: u64, count: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi <= lo || count < 2 {
        return Err(Error::InvalidParams(format!(
            "integer_geometric_grid: need 0 < lo < hi and count >= 2, got [{lo}, {hi}] x {count}"
        )));
    }
    let grid = geometric_grid(lo as f64, hi as f64, count)?;
    let mut out: Vec<u64> = grid.iter().map(|&x| x.round() as u64).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_add_exp_matches_direct_evaluation() {
        // ln(e^1 + e^2) computed to 20 digits externally.
        let expect = 2.313_261_687_518_222_8_f64;
        assert!((log_add_exp(1.0, 2.0) - expect).abs() < 1e-15);
        assert!((log_add_exp(2.0, 1.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn log_add_exp_handles_identities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.5), 3.5);
        assert_eq!(log_add_exp(3.5, f64::NEG_INFINITY), 3.5);
        assert_eq!(
            log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_sum_exp_empty_is_neg_infinity() {
        assert_eq!(log_sum_exp(std::iter::empty::<f64>()), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_sum_exp_survives_huge_shifts() {
        // ln(e^1000 + e^1000) = 1000 + ln 2; naive evaluation overflows.
        let got = log_sum_exp([1000.0_f64, 1000.0]);
        assert!((got - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn log_sum_exp_agrees_with_naive_sum(
            xs in proptest::collection::vec(-30.0_f64..30.0, 1..40)
        ) {
            let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
            let stable = log_sum_exp(xs.iter().copied());
            prop_assert!((naive - stable).abs() <= 1e-10 * (1.0 + naive.abs()));
        }

        #[test]
        fn log_sum_exp_is_shift_invariant(
            xs in proptest::collection::vec(-50.0_f64..50.0, 1..30),
            shift in -200.0_f64..200.0,
        ) {
            let base = log_sum_exp(xs.iter().copied());
            let shifted = log_sum_exp(xs.iter().map(|x| x + shift));
            prop_assert!((shifted - (base + shift)).abs() <= 1e-9 * (1.0 + base.abs() + shift.abs()));
        }
    }

    #[test]
    fn golden_max_finds_parabola_vertex() {
        let res = golden_max(|x: f64| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12, 500);
        assert!((res.x - 0.3).abs() < 1e-6);
        assert!(res.value > -1e-12);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0_f64, 2.0, 3.0, 4.0];
        let ys = [0.5_f64, 2.5, 4.5, 6.5];
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept + 1.5).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_log_fit_recovers_power_law() {
        let xs: Vec<f64> = (1..20).map(|k| 1.5_f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.75 * x.powf(-1.5)).collect();
        let fit = log_log_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 2.75_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_log_fit_rejects_zero_ordinates() {
        let err = log_log_fit(&[1.0, 2.0], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn geometric_grid_hits_endpoints() {
        let g = geometric_grid(1e2_f64, 1e6, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e2);
        assert_eq!(g[24], 1e6);
    }

    #[test]
    fn geometric_grid_never_leaves_its_interval() {
        // exp of the accumulated log used to overshoot the top endpoint
        // by an ulp (e.g. 1.0000000000000002 for hi = 1), which poisons
        // callers that treat hi as a hard domain limit.
        for count in [2usize, 3, 17, 256, 257] {
            let g = geometric_grid(0.223_f64, 1.0, count).unwrap();
            assert_eq!(*g.last().unwrap(), 1.0);
            assert_eq!(g[0], 0.223);
            assert!(g.iter().all(|&x| (0.223..=1.0).contains(&x)));
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn integer_grid_is_strictly_increasing() {
        let g = integer_geometric_grid(10, 500, 20).unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.first().unwrap(), 10);
        assert_eq!(*g.last().unwrap(), 500);
    }
}
