//! Coefficient-magnitude sequences and their ingestion.
//!
//! Solid-hull questions are phase-blind: only `|b_m|` ever matters. A
//! [`CoefficientSequence`] therefore models `m -> |b_m|` and offers three
//! storage strategies: a dense vector of magnitudes, a sorted sparse list,
//! and a rule evaluated on demand. Rule-backed sequences store *logs* of
//! magnitudes, because the interesting examples (extremal sequences) have
//! entries like `e^1900` that overflow every fixed-range float; dense and
//! sparse storage keeps raw magnitudes so that file round-trips are exact.
//! All consumers read through [`CoefficientSequence::log_abs`], which is
//! log-domain regardless of storage (`-inf` encodes a zero coefficient).

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::BlockScheme;
use crate::critical::{critical_radius, SolveOptions};
use crate::error::{Error, Result};
use crate::Real;

/// Input encodings accepted by [`CoefficientSequence::ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    /// A flat JSON array; each element is a nonnegative real or a
    /// two-element `[re, im]` array. Index = position.
    JsonArray,
    /// CSV rows `index,re,im` with strictly increasing indices; header
    /// optional; missing indices are implicit zeros.
    CsvComplex,
}

#[derive(Clone)]
enum Repr<T> {
    /// `dense[m] = |b_m|`.
    Dense(Vec<T>),
    /// `(m, |b_m|)`, strictly increasing in `m`.
    Sparse(Vec<(u64, T)>),
    /// `f(m) = ln |b_m|` for `m <= bound`, zero beyond.
    Rule {
        f: Arc<dyn Fn(u64) -> T + Send + Sync>,
        bound: u64,
    },
}

/// A sequence of coefficient magnitudes; see the module docs.
#[derive(Clone)]
pub struct CoefficientSequence<T> {
    repr: Repr<T>,
}

impl<T> fmt::Debug for CoefficientSequence<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Dense(v) => f.debug_struct("Dense").field("len", &v.len()).finish(),
            Repr::Sparse(v) => f.debug_tuple("Sparse").field(v).finish(),
            Repr::Rule { bound, .. } => {
                f.debug_struct("Rule").field("bound", bound).finish()
            }
        }
    }
}

impl<T: Real> CoefficientSequence<T> {
    /// Dense sequence from raw magnitudes.
    ///
    /// # Errors
    /// Magnitudes must be nonnegative and non-NaN.
    pub fn from_magnitudes(vals: &[T]) -> Result<Self> {
        if let Some(bad) = vals.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "magnitudes must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { repr: Repr::Dense(vals.to_vec()) })
    }

    /// Sparse sequence from `(index, magnitude)` pairs, in any order.
    ///
    /// # Errors
    /// Rejects negative magnitudes and duplicate indices.
    pub fn from_sparse(mut entries: Vec<(u64, T)>) -> Result<Self> {
        if let Some((m, v)) = entries.iter().find(|(_, v)| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "magnitude at index {m} must be finite and nonnegative, got {v}"
            )));
        }
        entries.sort_by_key(|&(m, _)| m);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams(format!(
                "duplicate coefficient index {}",
                w[0].0
            )));
        }
        Ok(Self { repr: Repr::Sparse(entries) })
    }

    /// Sequence defined by a log-magnitude rule on `0 ..= bound`; the rule
    /// is evaluated lazily and must be pure.
    pub fn from_rule(bound: u64, f: impl Fn(u64) -> T + Send + Sync + 'static) -> Self {
        Self { repr: Repr::Rule { f: Arc::new(f), bound } }
    }

    /// Sequence from a table of log-magnitudes (`-inf` for zeros); the
    /// log-domain sibling of [`Self::from_magnitudes`] for data whose
    /// linear form would overflow.
    pub fn from_log_magnitudes(logs: Vec<T>) -> Self {
        let bound = (logs.len() as u64).saturating_sub(1);
        Self::from_rule(bound, move |m| {
            logs.get(m as usize).copied().unwrap_or_else(T::neg_infinity)
        })
    }

    /// The single monomial `z^m` (unit magnitude).
    pub fn unit_monomial(m: u64) -> Self {
        Self { repr: Repr::Sparse(vec![(m, T::one())]) }
    }

    /// Largest index that may carry a nonzero coefficient.
    pub fn support_bound(&self) -> u64 {
        match &self.repr {
            Repr::Dense(v) => (v.len() as u64).saturating_sub(1),
            Repr::Sparse(v) => v.last().map_or(0, |&(m, _)| m),
            Repr::Rule { bound, .. } => *bound,
        }
    }

    /// `ln |b_m|`, `-inf` when the coefficient is zero or out of range.
    pub fn log_abs(&self, m: u64) -> T {
        match &self.repr {
            Repr::Dense(v) => v
                .get(m as usize)
                .map_or_else(T::neg_infinity, |x| x.ln()),
            Repr::Sparse(v) => match v.binary_search_by_key(&m, |&(i, _)| i) {
                Ok(k) => v[k].1.ln(),
                Err(_) => T::neg_infinity(),
            },
            Repr::Rule { f, bound } => {
                if m <= *bound {
                    f(m)
                } else {
                    T::neg_infinity()
                }
            }
        }
    }

    /// `|b_m|` itself; overflows to `inf` for log-native entries beyond
    /// float range, which is why computations use [`Self::log_abs`].
    pub fn magnitude(&self, m: u64) -> T {
        match &self.repr {
            Repr::Dense(v) => v.get(m as usize).copied().unwrap_or_else(T::zero),
            Repr::Sparse(v) => match v.binary_search_by_key(&m, |&(i, _)| i) {
                Ok(k) => v[k].1,
                Err(_) => T::zero(),
            },
            Repr::Rule { .. } => self.log_abs(m).exp(),
        }
    }

    /// Fold over the potentially nonzero entries with index in `(lo, hi]`,
    /// in increasing order, receiving log-magnitudes.
    ///
    /// Dense and rule-backed sequences visit every in-range index (the
    /// closure may see `-inf` entries and must treat them as zeros);
    /// sparse sequences visit only stored entries.
    pub fn fold_block<R>(
        &self,
        lo: u64,
        hi: u64,
        init: R,
        mut f: impl FnMut(R, u64, T) -> R,
    ) -> R {
        let mut acc = init;
        match &self.repr {
            Repr::Dense(v) => {
                let start = lo.saturating_add(1).min(v.len() as u64) as usize;
                let end = hi.saturating_add(1).min(v.len() as u64) as usize;
                for (off, x) in v[start..end].iter().enumerate() {
                    acc = f(acc, start as u64 + off as u64, x.ln());
                }
            }
            Repr::Sparse(v) => {
                let start = v.partition_point(|&(m, _)| m <= lo);
                for &(m, x) in &v[start..] {
                    if m > hi {
                        break;
                    }
                    acc = f(acc, m, x.ln());
                }
            }
            Repr::Rule { f: rule, bound } => {
                let top = hi.min(*bound);
                let mut m = lo.saturating_add(1);
                while m <= top {
                    acc = f(acc, m, rule(m));
                    m += 1;
                }
            }
        }
        acc
    }

    /// Read a sequence from a byte stream.
    ///
    /// # Errors
    /// Malformed input is reported with a line number where one exists;
    /// negative magnitudes and non-increasing CSV indices are validation
    /// errors.
    pub fn ingest(reader: impl Read, format: SequenceFormat) -> Result<Self> {
        match format {
            SequenceFormat::JsonArray => ingest_json(reader),
            SequenceFormat::CsvComplex => ingest_csv(reader),
        }
    }

    /// Serialize to the flat-JSON-array form accepted by
    /// [`Self::ingest`]; positions without a coefficient become `0`.
    ///
    /// # Errors
    /// Rule-backed sequences have no faithful finite serialization (their
    /// magnitudes overflow the numeric JSON range) and are rejected.
    pub fn to_json_array(&self) -> Result<serde_json::Value> {
        let vals: Vec<serde_json::Value> = match &self.repr {
            Repr::Dense(v) => v
                .iter()
                .map(|x| number(x.to_f64().unwrap_or(f64::NAN)))
                .collect::<Result<_>>()?,
            Repr::Sparse(entries) => {
                let len = entries.last().map_or(0, |&(m, _)| m + 1);
                let mut out = vec![number(0.0)?; len as usize];
                for &(m, x) in entries {
                    out[m as usize] = number(x.to_f64().unwrap_or(f64::NAN))?;
                }
                out
            }
            Repr::Rule { .. } => {
                return Err(Error::InvalidParams(
                    "rule-backed sequences cannot be serialized as a JSON array".into(),
                ))
            }
        };
        Ok(serde_json::Value::Array(vals))
    }
}

fn number(x: f64) -> Result<serde_json::Value> {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .ok_or_else(|| {
            Error::InvalidParams(format!("magnitude {x} is not JSON-representable"))
        })
}

fn ingest_json<T: Real>(reader: impl Read) -> Result<CoefficientSequence<T>> {
    let value: serde_json::Value =
        serde_json::from_reader(reader).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
    let arr = value.as_array().ok_or_else(|| {
        Error::InvalidParams("expected a JSON array of coefficients".into())
    })?;
    let mut vals = Vec::with_capacity(arr.len());
    for (m, item) in arr.iter().enumerate() {
        let mag = match item {
            serde_json::Value::Number(x) => {
                let x = x.as_f64().unwrap_or(f64::NAN);
                if !(x >= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "coefficient {m} must be a nonnegative magnitude, got {x}"
                    )));
                }
                x
            }
            serde_json::Value::Array(pair) if pair.len() == 2 => {
                let re = pair[0].as_f64().ok_or_else(|| bad_complex(m))?;
                let im = pair[1].as_f64().ok_or_else(|| bad_complex(m))?;
                re.hypot(im)
            }
            _ => return Err(bad_complex(m)),
        };
        vals.push(T::of(mag));
    }
    CoefficientSequence::from_magnitudes(&vals)
}

fn bad_complex(m: usize) -> Error {
    Error::InvalidParams(format!(
        "coefficient {m} must be a nonnegative real or a [re, im] pair"
    ))
}

fn ingest_csv<T: Real>(reader: impl Read) -> Result<CoefficientSequence<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut entries: Vec<(u64, T)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `index,re,im`, found {} fields", rec.len()),
            });
        }
        let parsed = (|| {
            let index = rec[0].parse::<u64>().ok()?;
            let re = rec[1].parse::<f64>().ok()?;
            let im = rec[2].parse::<f64>().ok()?;
            Some((index, re, im))
        })();
        let (index, re, im) = match parsed {
            Some(t) => t,
            // A single non-numeric leading row is tolerated as a header.
            None if k == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected numeric `index,re,im`, got {:?}", &rec),
                });
            }
        };
        if let Some(&(prev, _)) = entries.last() {
            if index <= prev {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "indices must be strictly increasing ({prev} then {index})"
                    ),
                });
            }
        }
        entries.push((index, T::of(re.hypot(im))));
    }
    CoefficientSequence::from_sparse(entries)
}

/// The per-block normalized extremal sequence of a block scheme.
///
/// For `m` in block `(M_n, M_{n+1}]` the log-magnitude is
///
/// ```text
/// ln |b_m| = -ln v(r_{M_n}) - m ln r_{M_n} - (1/2) ln(M_{n+1} - M_n)
/// ```
///
/// chosen so that each per-block term of the canonical hull norm equals 1
/// exactly: this sequence sits on the unit sphere of the block norm and is
/// the canonical boundary case for membership questions. Indices at or
/// below the first boundary carry no block and are zero.
pub fn extremal_block_sequence<T: Real>(
    scheme: &BlockScheme<T>,
    opts: &SolveOptions<T>,
) -> Result<CoefficientSequence<T>> {
    let params = *scheme.params();
    let mut boundaries = Vec::with_capacity((scheme.n_max() - scheme.n_min() + 2) as usize);
    for n in scheme.n_min()..=scheme.n_max() + 1 {
        boundaries.push(scheme.boundary(n)?);
    }
    // Per block: (-ln v(r_lo), ln r_lo, (1/2) ln width), precomputed so the
    // rule is a lookup plus two flops.
    let mut rows = Vec::with_capacity(boundaries.len() - 1);
    for w in boundaries.windows(2) {
        let cp = critical_radius(&params, T::of(w[0] as f64), opts)?;
        let log_r = (-cp.gap).ln_1p();
        let log_v = params.log_weight_gap(cp.gap);
        let half_ln_width = T::of(0.5) * T::of((w[1] - w[0]) as f64).ln();
        rows.push((log_v, log_r, half_ln_width));
    }
    let bound = *boundaries.last().expect("scheme has at least one block");
    let first = boundaries[0];
    Ok(CoefficientSequence::from_rule(bound, move |m| {
        if m <= first {
            return T::neg_infinity();
        }
        let k = boundaries.partition_point(|&b| b < m) - 1;
        let (log_v, log_r, half_ln_width) = rows[k];
        -log_v - T::of(m as f64) * log_r - half_ln_width
    }))
}

/// Reproducible random magnitudes dominated by an envelope:
/// `|b_m| = u_m * envelope_m` with `u_m` uniform on `[0, 1)`, so the
/// result is coordinatewise at most the envelope (solidity test fodder).
pub fn random_sequence<T: Real>(
    seed: u64,
    length: u64,
    envelope: &CoefficientSequence<T>,
) -> CoefficientSequence<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logs: Vec<T> = (0..length)
        .map(|m| envelope.log_abs(m) + T::of(rng.gen::<f64>().ln()))
        .collect();
    CoefficientSequence::from_log_magnitudes(logs)
}

/// An envelope of constant magnitude `1` on `0 ..= bound`, the usual
/// choice for polynomial test corpora.
pub fn unit_envelope<T: Real>(bound: u64) -> CoefficientSequence<T> {
    CoefficientSequence::from_rule(bound, |_| T::zero())
}
