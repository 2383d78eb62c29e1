//! Closed-form Hausdorff-dimension bounds for shrinking-target sets under
//! T_β, the piecewise classifier over exponent quadruples, and a registry
//! of worked speed-function pairs with known dimensions.
//!
//! All formula arithmetic is exact rational; infinity is handled as a
//! flag before any arithmetic. The classifier walks a fixed case ladder
//! (degenerate/infinite cases first, then the finite case table keyed on
//! the thresholds v/(2+v)), and each verdict records which case fired.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::BetaError;
use crate::exponents::{psi_exponents, ExponentQuadruple, ExtRat, SpeedFn};
use crate::precision::{rat_i64, rat_of, Rat};
use crate::Result;

// ---------------------------------------------------------------------------
// Closed-form evaluators
// ---------------------------------------------------------------------------

/// Dimension of the asymptotic shrinking-target set at exponent v:
/// 1/(1+v), and 0 at v = ∞.
pub fn sw_dimension(v: &ExtRat) -> Rat {
    match v {
        ExtRat::Infinite => Rat::zero(),
        ExtRat::Finite(v) => (rat_i64(1) + v).recip(),
    }
}

/// Outcome of the two-exponent level-set formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlOutcome {
    /// The level set is empty: v < v̂/(1−v̂).
    Empty,
    Dimension(Rat),
}

/// (v − v̂ − v·v̂)/((1+v)(v − v̂)) on v > 0, 0 < v̂ < 1, with the emptiness
/// test v < v̂/(1−v̂) applied first.
pub fn bl_dimension(v: &Rat, v_hat: &Rat) -> Result<BlOutcome> {
    if !v.is_positive() {
        return Err(BetaError::DomainError(format!("v must be > 0, got {v}")));
    }
    if !v_hat.is_positive() || v_hat >= &Rat::one() {
        return Err(BetaError::DomainError(format!(
            "v̂ must lie in (0, 1), got {v_hat}"
        )));
    }
    let threshold = v_hat / (Rat::one() - v_hat);
    if v < &threshold {
        return Ok(BlOutcome::Empty);
    }
    Ok(BlOutcome::Dimension(ratio_formula(v, v_hat)))
}

/// The shared rational form (v − w − v·w)/((1+v)(v − w)); at v = w = 0 the
/// continuous extension is 1.
fn ratio_formula(v: &Rat, w: &Rat) -> Rat {
    if v.is_zero() && w.is_zero() {
        return Rat::one();
    }
    let num = v - w - v * w;
    let den = (rat_i64(1) + v) * (v - w);
    num / den
}

/// Critical exponent of the covering series at ε′ = 0:
/// (v − v₂)/(…) with the same rational form; collapses to 1/(1+v) at
/// v₂ = 0.
pub fn covering_critical_exponent(v: &Rat, v2_lo: &Rat) -> Result<Rat> {
    if v <= v2_lo {
        return Err(BetaError::DomainError(format!(
            "need v > v2_lo, got v = {v}, v2_lo = {v2_lo}"
        )));
    }
    if v2_lo >= &Rat::one() {
        return Err(BetaError::DomainError(format!(
            "need v2_lo < 1, got {v2_lo}"
        )));
    }
    if v2_lo.is_negative() {
        return Err(BetaError::DomainError("need v2_lo ≥ 0".into()));
    }
    Ok(ratio_formula(v, v2_lo))
}

// ---------------------------------------------------------------------------
// The classifier
// ---------------------------------------------------------------------------

/// Verdict kind for a classified set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Countable,
    Empty,
    FullDimension,
    Interval,
}

/// Lower/upper Hausdorff-dimension bounds, or a countable/empty/full
/// verdict, together with the classifier case that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionVerdict {
    pub kind: VerdictKind,
    pub lower: Rat,
    pub upper: Rat,
    pub active_case: String,
}

impl DimensionVerdict {
    fn countable(case: &str) -> Self {
        DimensionVerdict {
            kind: VerdictKind::Countable,
            lower: Rat::zero(),
            upper: Rat::zero(),
            active_case: case.into(),
        }
    }

    fn interval(lower: Rat, upper: Rat, case: &str) -> Self {
        debug_assert!(lower <= upper, "bounds inverted in case {case}");
        DimensionVerdict {
            kind: VerdictKind::Interval,
            lower,
            upper,
            active_case: case.into(),
        }
    }
}

pub(crate) fn rat_text(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn rat_parse_frac(s: &str) -> Result<Rat> {
    crate::precision::parse_rational(s)
}

impl Serialize for DimensionVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DimensionVerdict", 4)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("lower", &rat_text(&self.lower))?;
        st.serialize_field("upper", &rat_text(&self.upper))?;
        st.serialize_field("active_case", &self.active_case)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DimensionVerdict {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: VerdictKind,
            lower: String,
            upper: String,
            active_case: String,
        }
        let raw = Raw::deserialize(d)?;
        Ok(DimensionVerdict {
            kind: raw.kind,
            lower: rat_parse_frac(&raw.lower).map_err(D::Error::custom)?,
            upper: rat_parse_frac(&raw.upper).map_err(D::Error::custom)?,
            active_case: raw.active_case,
        })
    }
}

/// ((1 − x)/(1 + x))² for 0 ≤ x ≤ 1.
fn square_bound(x: &Rat) -> Rat {
    let r = (Rat::one() - x) / (Rat::one() + x);
    &r * &r
}

/// v/(2+v), the threshold at which the ratio bound overtakes the square
/// bound; tends to 1 as v → ∞.
fn threshold(v: &ExtRat) -> Rat {
    match v {
        ExtRat::Infinite => Rat::one(),
        ExtRat::Finite(v) => v / (rat_i64(2) + v),
    }
}

/// Lower-bound ratio form at (v̄₁, v̄₂); 0 when v̄₁ = ∞ (its limit).
fn ratio_lower(v1_hi: &ExtRat, v2_hi: &Rat) -> Rat {
    match v1_hi {
        ExtRat::Infinite => Rat::zero(),
        ExtRat::Finite(v) => ratio_formula(v, v2_hi),
    }
}

/// Classify the intersection set from the exponent quadruple.
///
/// Case ladder, mutually exclusive in order: all-zero (full dimension);
/// v̲₂ = ∞ (countable); v̲₁ = ∞ (null); v̄₂ = ∞ (null); v̲₂ > 1
/// (countable); v̄₂ > 1 (upper bounds only); then the four finite cases
/// keyed on v̲₂ ≶ v̲₁/(2+v̲₁) and v̄₂ ≶ v̄₁/(2+v̄₁).
pub fn classify_bounds(q: &ExponentQuadruple) -> Result<DimensionVerdict> {
    q.validate()?;
    let zero = ExtRat::Finite(Rat::zero());
    if q.v1_lo == zero && q.v1_hi == zero && q.v2_lo == zero && q.v2_hi == zero {
        return Ok(DimensionVerdict {
            kind: VerdictKind::FullDimension,
            lower: Rat::one(),
            upper: Rat::one(),
            active_case: "all_zero_full".into(),
        });
    }
    if q.v2_lo.is_infinite() {
        return Ok(DimensionVerdict::countable("v2lo_infinite_countable"));
    }
    if q.v1_lo.is_infinite() {
        return Ok(DimensionVerdict::interval(
            Rat::zero(),
            Rat::zero(),
            "v1lo_infinite_null",
        ));
    }
    if q.v2_hi.is_infinite() {
        // A divergent uniform upper exponent forces ν = ∞ on the whole
        // uniform set, which is null.
        return Ok(DimensionVerdict::interval(
            Rat::zero(),
            Rat::zero(),
            "v2hi_infinite_null",
        ));
    }
    let v2_lo = q.v2_lo.as_rat().expect("finite").clone();
    let v2_hi = q.v2_hi.as_rat().expect("finite").clone();
    let v1_lo = q.v1_lo.as_rat().expect("finite").clone();
    if v2_lo > Rat::one() {
        return Ok(DimensionVerdict::countable("v2lo_above_one_countable"));
    }
    let upper_min = || {
        let inv = (rat_i64(1) + &v2_hi).recip();
        let sq = square_bound(&v2_lo);
        if inv < sq {
            inv
        } else {
            sq
        }
    };
    if v2_hi > Rat::one() {
        // Only upper bounds are available past exponent 1; the square
        // bound at v̲₂ stays valid on this side of the threshold split.
        return Ok(DimensionVerdict::interval(
            Rat::zero(),
            upper_min(),
            "upper_min_only",
        ));
    }
    // Finite table: v̲₂ ≤ v̄₂ ≤ 1.
    let a1 = threshold(&q.v1_lo);
    let a2 = threshold(&q.v1_hi);
    let lo_inner = v2_lo > a1; // square bound regime for the upper bound
    let hi_inner = v2_hi > a2; // square bound regime for the lower bound
    let verdict = match (hi_inner, lo_inner) {
        (true, true) => DimensionVerdict::interval(
            square_bound(&v2_hi),
            upper_min(),
            "lower_square_upper_min",
        ),
        (true, false) => DimensionVerdict::interval(
            square_bound(&v2_hi),
            ratio_formula(&v1_lo, &v2_lo),
            "lower_square_upper_ratio",
        ),
        (false, true) => DimensionVerdict::interval(
            ratio_lower(&q.v1_hi, &v2_hi),
            upper_min(),
            "lower_ratio_upper_min",
        ),
        (false, false) => DimensionVerdict::interval(
            ratio_lower(&q.v1_hi, &v2_hi),
            ratio_formula(&v1_lo, &v2_lo),
            "lower_ratio_upper_ratio",
        ),
    };
    if verdict.lower.is_negative() || verdict.upper > Rat::one() || verdict.lower > verdict.upper
    {
        return Err(BetaError::UnmatchedCase(format!(
            "bounds escaped [0,1]: {:?}",
            verdict
        )));
    }
    Ok(verdict)
}

/// Classify the uniform set from (v̲₂, v̄₂) alone.
pub fn classify_uniform(v2_lo: &ExtRat, v2_hi: &ExtRat) -> Result<DimensionVerdict> {
    if v2_lo.cmp_ext(v2_hi) == Ordering::Greater {
        return Err(BetaError::DomainError("v2: lower > upper".into()));
    }
    if let ExtRat::Finite(r) = v2_lo {
        if r.is_negative() {
            return Err(BetaError::DomainError("v2_lo negative".into()));
        }
    }
    match v2_lo {
        ExtRat::Infinite => return Ok(DimensionVerdict::countable("uniform_countable")),
        ExtRat::Finite(lo) if lo > &Rat::one() => {
            return Ok(DimensionVerdict::countable("uniform_countable"))
        }
        _ => {}
    }
    let lo = v2_lo.as_rat().expect("finite by the ladder").clone();
    match v2_hi {
        ExtRat::Infinite => Ok(DimensionVerdict::interval(
            Rat::zero(),
            Rat::zero(),
            "uniform_null",
        )),
        ExtRat::Finite(hi) => {
            let inv = (rat_i64(1) + hi).recip();
            let sq = square_bound(&lo);
            let upper = if inv < sq { inv } else { sq };
            if hi > &Rat::one() {
                Ok(DimensionVerdict::interval(
                    Rat::zero(),
                    upper,
                    "uniform_upper_only",
                ))
            } else {
                Ok(DimensionVerdict::interval(
                    square_bound(hi),
                    upper,
                    "uniform_two_sided",
                ))
            }
        }
    }
}

/// Whether the uniform set is contained in the asymptotic one:
/// true iff v̲₁ = v̄₁ = 0 and v̲₂ > 0.
pub fn inclusion_verdict(q: &ExponentQuadruple) -> bool {
    let zero = ExtRat::Finite(Rat::zero());
    q.v1_lo == zero && q.v1_hi == zero && q.v2_lo.cmp_ext(&zero) == Ordering::Greater
}

// ---------------------------------------------------------------------------
// Worked-example registry
// ---------------------------------------------------------------------------

/// How the pinned dimension of a worked example relates to the generic
/// classifier interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinnedMatch {
    /// Pinned value equals both bounds.
    Exact,
    /// Pinned value equals the lower bound and the upper is strictly
    /// larger; the sharp value comes from a per-example argument.
    LowerSharp,
    /// Pinned value equals the upper bound.
    UpperSharp,
}

/// A registered speed-function pair whose intersection dimension is
/// known exactly.
#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub id: &'static str,
    pub psi1: &'static str,
    pub psi2: &'static str,
    /// Known dimension of the intersection set.
    pub pinned: Rat,
    /// Audit note when the generic interval is strictly wider on the
    /// side the pinned value does not touch.
    pub note: Option<&'static str>,
}

/// The seven registered pairs.
pub fn worked_examples() -> Vec<WorkedExample> {
    vec![
        WorkedExample {
            id: "ex1",
            psi1: "rule(index=all, rate=0)",
            psi2: "rule(index=tower, rate=3); rule(index=all, rate=0)",
            pinned: rat_of(1, 4),
            note: None,
        },
        WorkedExample {
            id: "ex2",
            psi1: "rule(index=all, rate=0)",
            psi2: "rule(index=geom:4, rate=2); rule(index=all, rate=1/2)",
            pinned: rat_of(1, 9),
            note: None,
        },
        WorkedExample {
            id: "ex3",
            psi1: "rule(index=geom:3, rate=1/2); rule(index=all, rate=1)",
            psi2: "rule(index=geom:3, rate=1/2); rule(index=all, rate=1/6)",
            pinned: rat_of(1, 2),
            note: None,
        },
        WorkedExample {
            id: "ex4",
            psi1: "rule(index=all, rate=0)",
            psi2: "rule(index=geom:4, rate=3); rule(index=all, rate=1)",
            pinned: rat_i64(0),
            note: None,
        },
        WorkedExample {
            id: "ex5",
            psi1: "rule(index=arith:2,1, rate=3); rule(index=arith:2,0, rate=10/3)",
            psi2: "rule(index=arith:2,1, rate=21/32); rule(index=arith:2,0, rate=2/3)",
            pinned: rat_of(1, 25),
            note: Some(
                "pinned value sits on the lower bound; the generic upper bound \
                 (121/2809) is strictly larger and the sharp value relies on a \
                 per-example argument — flagged for audit",
            ),
        },
        WorkedExample {
            id: "ex6",
            psi1: "rule(index=all, rate=1)",
            psi2: "rule(index=arith:2,1, rate=0); rule(index=arith:2,0, rate=1/4)",
            pinned: rat_of(1, 3),
            note: None,
        },
        WorkedExample {
            id: "ex7",
            psi1: "rule(index=arith:2,1, rate=1/3); rule(index=arith:2,0, rate=2/3)",
            psi2: "rule(index=all, rate=2/11)",
            pinned: rat_of(9, 20),
            note: None,
        },
    ]
}

/// One end-to-end registry row: descriptor → exponents → verdict,
/// with the pinned dimension checked against the interval.
#[derive(Debug, Clone, Serialize)]
pub struct RegistryRow {
    pub id: &'static str,
    pub quadruple: [String; 4],
    pub verdict: DimensionVerdict,
    pub pinned: String,
    pub pinned_match: PinnedMatch,
    pub note: Option<&'static str>,
}

/// Run every registered pair end to end. Exact exponent extraction is
/// required; the pinned dimension must lie inside the classifier
/// interval.
pub fn run_worked_examples() -> Result<Vec<RegistryRow>> {
    let mut rows = Vec::new();
    for ex in worked_examples() {
        let p1 = SpeedFn::parse(ex.psi1)?;
        let p2 = SpeedFn::parse(ex.psi2)?;
        let e1 = psi_exponents(&p1, 1 << 12);
        let e2 = psi_exponents(&p2, 1 << 12);
        if !e1.exact || !e2.exact {
            return Err(BetaError::DomainError(format!(
                "{}: registry descriptors must support exact exponents",
                ex.id
            )));
        }
        let q = ExponentQuadruple::new(e1.lo, e1.hi, e2.lo, e2.hi)?;
        let verdict = classify_bounds(&q)?;
        if ex.pinned < verdict.lower || ex.pinned > verdict.upper {
            return Err(BetaError::DomainError(format!(
                "{}: pinned dimension {} outside classifier interval [{}, {}]",
                ex.id, ex.pinned, verdict.lower, verdict.upper
            )));
        }
        let pinned_match = if verdict.lower == verdict.upper {
            PinnedMatch::Exact
        } else if ex.pinned == verdict.lower {
            PinnedMatch::LowerSharp
        } else if ex.pinned == verdict.upper {
            PinnedMatch::UpperSharp
        } else {
            return Err(BetaError::DomainError(format!(
                "{}: pinned dimension strictly inside the generic interval",
                ex.id
            )));
        };
        rows.push(RegistryRow {
            id: ex.id,
            quadruple: [
                q.v1_lo.text(),
                q.v1_hi.text(),
                q.v2_lo.text(),
                q.v2_hi.text(),
            ],
            verdict,
            pinned: rat_text(&ex.pinned),
            pinned_match,
            note: ex.note,
        });
    }
    Ok(rows)
}
