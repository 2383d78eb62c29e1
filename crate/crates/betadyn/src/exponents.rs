//! Orbits of T_β, hitting analysis against speed functions ψ, run-length
//! decomposition of digit streams, and estimators for the asymptotic and
//! uniform approximation exponents.
//!
//! A speed function is a first-match-wins rule list. Each rule pairs an
//! index set (all n, an arithmetic progression, ⌊r^k⌋, k^k, or an
//! explicit list) with either a rate c — meaning ψ(n) = β^{−c·n} — or a
//! positive constant. The log-scale exponents liminf/limsup −log_β ψ(n)/n
//! are extracted exactly whenever it is decidable which rules fire
//! infinitely often; otherwise a sampled fallback is used.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::BetaError;
use crate::precision::{rat_i64, rat_to_f64, BetaValue, Rat, RealScalar};
use crate::symbolic::greedy_expand_with_orbit;
use crate::Result;

// ---------------------------------------------------------------------------
// Extended rationals and exponent quadruples
// ---------------------------------------------------------------------------

/// A nonnegative rational or +∞. Infinity is a flag, never a sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtRat {
    Finite(Rat),
    Infinite,
}

impl ExtRat {
    pub fn finite(r: Rat) -> Self {
        ExtRat::Finite(r)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRat::Infinite)
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(r) => Some(r),
            ExtRat::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRat::Finite(r) => rat_to_f64(r),
            ExtRat::Infinite => f64::INFINITY,
        }
    }

    pub fn cmp_ext(&self, other: &ExtRat) -> Ordering {
        match (self, other) {
            (ExtRat::Infinite, ExtRat::Infinite) => Ordering::Equal,
            (ExtRat::Infinite, _) => Ordering::Greater,
            (_, ExtRat::Infinite) => Ordering::Less,
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.cmp(b),
        }
    }

    /// Parse "inf", "p/q", or a decimal.
    pub fn parse(s: &str) -> Result<ExtRat> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtRat::Infinite);
        }
        Ok(ExtRat::Finite(crate::precision::parse_rational(t)?))
    }

    pub fn text(&self) -> String {
        match self {
            ExtRat::Finite(r) => format!("{r}"),
            ExtRat::Infinite => "inf".into(),
        }
    }
}

/// The four log-scale exponents (v̲₁, v̄₁, v̲₂, v̄₂).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentQuadruple {
    pub v1_lo: ExtRat,
    pub v1_hi: ExtRat,
    pub v2_lo: ExtRat,
    pub v2_hi: ExtRat,
}

impl ExponentQuadruple {
    pub fn new(v1_lo: ExtRat, v1_hi: ExtRat, v2_lo: ExtRat, v2_hi: ExtRat) -> Result<Self> {
        let q = ExponentQuadruple {
            v1_lo,
            v1_hi,
            v2_lo,
            v2_hi,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi, name) in [
            (&self.v1_lo, &self.v1_hi, "v1"),
            (&self.v2_lo, &self.v2_hi, "v2"),
        ] {
            if lo.cmp_ext(hi) == Ordering::Greater {
                return Err(BetaError::DomainError(format!("{name}: lower > upper")));
            }
            for v in [lo, hi] {
                if let ExtRat::Finite(r) = v {
                    if r.is_negative() {
                        return Err(BetaError::DomainError(format!("{name}: negative entry")));
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Speed functions
// ---------------------------------------------------------------------------

/// Index sets of the descriptor algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexSet {
    All,
    /// n ≡ residue (mod modulus).
    Arith { modulus: u64, residue: u64 },
    /// n = ⌊ratio^k⌋ for some k ≥ 1, ratio > 1.
    Geom { ratio: Rat },
    /// n = k^k for some k ≥ 1.
    Tower,
    List(Vec<u64>),
}

impl IndexSet {
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            IndexSet::All => true,
            IndexSet::Arith { modulus, residue } => n % modulus == residue % modulus,
            IndexSet::Geom { ratio } => geom_contains(ratio, n),
            IndexSet::Tower => tower_contains(n),
            IndexSet::List(v) => v.contains(&n),
        }
    }

    fn text(&self) -> String {
        match self {
            IndexSet::All => "all".into(),
            IndexSet::Arith { modulus, residue } => format!("arith:{modulus},{residue}"),
            IndexSet::Geom { ratio } => format!("geom:{ratio}"),
            IndexSet::Tower => "tower".into(),
            IndexSet::List(v) => format!(
                "list:{}",
                v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

fn geom_contains(ratio: &Rat, n: u64) -> bool {
    // n = ⌊ratio^k⌋: locate the candidate k by logs, verify exactly nearby.
    let r = rat_to_f64(ratio);
    if r <= 1.0 {
        return false;
    }
    let guess = (n.max(1) as f64).ln() / r.ln();
    let k0 = guess.round() as i64;
    for k in (k0 - 2).max(1)..=(k0 + 2).max(3) {
        let p = rat_pow(ratio, k as u32);
        let fl = crate::precision::rat_floor(&p);
        if let Some(v) = fl.to_u64() {
            if v == n {
                return true;
            }
        }
    }
    false
}

pub(crate) fn rat_pow(r: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    let mut sq = r.clone();
    let mut n = k;
    while n > 0 {
        if n & 1 == 1 {
            acc *= &sq;
        }
        sq = &sq * &sq;
        n >>= 1;
    }
    acc
}

fn tower_contains(n: u64) -> bool {
    tower_values().contains(&n)
}

pub(crate) fn tower_values() -> &'static [u64] {
    // k^k for k = 1..=15 (16^16 overflows u64).
    static VALS: [u64; 15] = [
        1,
        4,
        27,
        256,
        3125,
        46656,
        823543,
        16777216,
        387420489,
        10000000000,
        285311670611,
        8916100448256,
        302875106592253,
        11112006825558016,
        437893890380859375,
    ];
    &VALS
}

/// Value form of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleValue {
    /// ψ(n) = β^{−rate·n}.
    Rate(Rat),
    /// ψ(n) = c, a positive constant.
    Const(Rat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedRule {
    pub index: IndexSet,
    pub value: RuleValue,
}

/// A speed function ψ: ℕ → ℝ⁺ as a first-match-wins rule list. An
/// implicit trailing `rule(index=all, rate=0)` (i.e. ψ = 1) guarantees
/// the rules cover ℕ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedFn {
    pub rules: Vec<SpeedRule>,
}

/// ψ(n) in comparable form.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiValue {
    /// β^{−exponent} with a rational exponent (already multiplied by n).
    BetaPow(Rat),
    Const(Rat),
}

impl SpeedFn {
    pub fn new(mut rules: Vec<SpeedRule>) -> SpeedFn {
        let covered = rules.iter().any(|r| r.index == IndexSet::All);
        if !covered {
            rules.push(SpeedRule {
                index: IndexSet::All,
                value: RuleValue::Rate(Rat::zero()),
            });
        }
        SpeedFn { rules }
    }

    /// Constant-one speed function.
    pub fn one() -> SpeedFn {
        SpeedFn::new(vec![])
    }

    /// Uniform rate: ψ(n) = β^{−c·n}.
    pub fn uniform_rate(c: Rat) -> SpeedFn {
        SpeedFn::new(vec![SpeedRule {
            index: IndexSet::All,
            value: RuleValue::Rate(c),
        }])
    }

    /// First matching rule for n (n ≥ 1; the rule list always covers ℕ).
    pub fn rule_at(&self, n: u64) -> &SpeedRule {
        self.rules
            .iter()
            .find(|r| r.index.contains(n))
            .expect("rule list covers every n")
    }

    /// ψ(n) in comparable form.
    pub fn value_at(&self, n: u64) -> PsiValue {
        match &self.rule_at(n).value {
            RuleValue::Rate(c) => PsiValue::BetaPow(c * rat_i64(n as i64)),
            RuleValue::Const(c) => PsiValue::Const(c.clone()),
        }
    }

    /// Pointwise min(ψ, 1) in the descriptor algebra: negative rates are
    /// capped to rate 0 and constants above 1 to 1.
    pub fn normalize(&self) -> SpeedFn {
        let rules = self
            .rules
            .iter()
            .map(|r| SpeedRule {
                index: r.index.clone(),
                value: match &r.value {
                    RuleValue::Rate(c) if c.is_negative() => RuleValue::Rate(Rat::zero()),
                    RuleValue::Const(c) if c > &Rat::one() => RuleValue::Const(Rat::one()),
                    v => v.clone(),
                },
            })
            .collect();
        SpeedFn { rules }
    }

    pub fn text(&self) -> String {
        self.rules
            .iter()
            .map(|r| {
                let v = match &r.value {
                    RuleValue::Rate(c) => format!("rate={c}"),
                    RuleValue::Const(c) => format!("const={c}"),
                };
                format!("rule(index={}, {v})", r.index.text())
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Parse `rule(index=<all|arith:a,b|geom:r|tower|list:...>, rate=<q>)`
    /// joined by `;`, with an optional trailing `cap1` token applying
    /// [`SpeedFn::normalize`]. `const=<q>` is accepted in place of
    /// `rate=` for constant rules.
    pub fn parse(s: &str) -> Result<SpeedFn> {
        let mut rules = Vec::new();
        let mut cap = false;
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            if part == "cap1" {
                cap = true;
                continue;
            }
            rules.push(parse_rule(part)?);
        }
        let f = SpeedFn::new(rules);
        Ok(if cap { f.normalize() } else { f })
    }
}

fn parse_rule(s: &str) -> Result<SpeedRule> {
    let body = s
        .strip_prefix("rule(")
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| BetaError::Parse(format!("rule must look like rule(...), got {s:?}")))?;
    // Fields split on commas; index arguments may themselves contain
    // commas, so unprefixed fields continue the index argument.
    let mut index_part: Option<String> = None;
    let mut value_part: Option<String> = None;
    for field in body.split(',') {
        let field = field.trim();
        if let Some(v) = field.strip_prefix("index=") {
            index_part = Some(v.trim().to_string());
        } else if field.starts_with("rate=") || field.starts_with("const=") {
            value_part = Some(field.to_string());
        } else if !field.is_empty() {
            if let Some(ip) = &mut index_part {
                ip.push(',');
                ip.push_str(field);
            } else {
                return Err(BetaError::Parse(format!("unexpected field {field:?}")));
            }
        }
    }
    let index_part =
        index_part.ok_or_else(|| BetaError::Parse(format!("missing index= in {s:?}")))?;
    let value_part =
        value_part.ok_or_else(|| BetaError::Parse(format!("missing rate=/const= in {s:?}")))?;
    let index = parse_index(&index_part)?;
    let value = if let Some(v) = value_part.strip_prefix("rate=") {
        RuleValue::Rate(crate::precision::parse_rational(v)?)
    } else {
        let v = value_part.strip_prefix("const=").expect("checked prefix");
        let c = crate::precision::parse_rational(v)?;
        if !c.is_positive() {
            return Err(BetaError::Parse("const rule must be positive".into()));
        }
        RuleValue::Const(c)
    };
    Ok(SpeedRule { index, value })
}

fn parse_index(s: &str) -> Result<IndexSet> {
    let s = s.trim();
    if s == "all" {
        return Ok(IndexSet::All);
    }
    if s == "tower" {
        return Ok(IndexSet::Tower);
    }
    if let Some(rest) = s.strip_prefix("arith:") {
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| BetaError::Parse(format!("arith needs a,b in {s:?}")))?;
        let modulus: u64 = a
            .trim()
            .parse()
            .map_err(|_| BetaError::Parse(format!("bad modulus in {s:?}")))?;
        let residue: u64 = b
            .trim()
            .parse()
            .map_err(|_| BetaError::Parse(format!("bad residue in {s:?}")))?;
        if modulus == 0 {
            return Err(BetaError::Parse("arith modulus must be ≥ 1".into()));
        }
        return Ok(IndexSet::Arith { modulus, residue });
    }
    if let Some(rest) = s.strip_prefix("geom:") {
        let ratio = crate::precision::parse_rational(rest)?;
        if ratio <= Rat::one() {
            return Err(BetaError::Parse("geom ratio must be > 1".into()));
        }
        return Ok(IndexSet::Geom { ratio });
    }
    if let Some(rest) = s.strip_prefix("list:") {
        let v: Vec<u64> = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| BetaError::Parse(format!("bad list entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        return Ok(IndexSet::List(v));
    }
    Err(BetaError::Parse(format!("unknown index set {s:?}")))
}

// ---------------------------------------------------------------------------
// ψ exponents
// ---------------------------------------------------------------------------

/// Pointwise min(ψ, 1) in the descriptor algebra; see
/// [`SpeedFn::normalize`].
pub fn normalize_psi(psi: &SpeedFn) -> SpeedFn {
    psi.normalize()
}

/// liminf/limsup of −log_β ψ(n)/n.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiExponents {
    pub lo: ExtRat,
    pub hi: ExtRat,
    /// Whether the bounds were derived exactly from the rule algebra
    /// (otherwise they come from sampling up to the horizon).
    pub exact: bool,
}

/// Extract the exponent pair. Exact mode applies when, for every rule,
/// it is decidable whether the rule fires infinitely often after
/// first-match-wins shadowing; the paper-style descriptors (arithmetic
/// progressions, integer geometric indices, towers) are all decidable.
pub fn psi_exponents(psi: &SpeedFn, horizon: u64) -> PsiExponents {
    match exact_infinite_rules(psi) {
        Some(fires) => {
            let mut rates: Vec<Rat> = Vec::new();
            for (rule, inf) in psi.rules.iter().zip(&fires) {
                if !inf {
                    continue;
                }
                match &rule.value {
                    RuleValue::Rate(c) => rates.push(c.clone()),
                    // A constant value contributes −log_β c / n → 0.
                    RuleValue::Const(_) => rates.push(Rat::zero()),
                }
            }
            assert!(
                !rates.is_empty(),
                "covering rule list must fire somewhere infinitely often"
            );
            let lo = rates.iter().min().expect("nonempty").clone();
            let hi = rates.iter().max().expect("nonempty").clone();
            PsiExponents {
                lo: ExtRat::Finite(lo),
                hi: ExtRat::Finite(hi),
                exact: true,
            }
        }
        None => sampled_exponents(psi, horizon),
    }
}

fn sampled_exponents(psi: &SpeedFn, horizon: u64) -> PsiExponents {
    let horizon = horizon.max(16);
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for n in horizon / 2..=horizon {
        let v = match psi.value_at(n) {
            PsiValue::BetaPow(e) => e / rat_i64(n as i64),
            // −log_β c/n tends to 0; at the sampling tail use the limit.
            PsiValue::Const(_) => Rat::zero(),
        };
        lo = Some(match lo {
            Some(cur) => cur.min(v.clone()),
            None => v.clone(),
        });
        hi = Some(match hi {
            Some(cur) => cur.max(v),
            None => v,
        });
    }
    PsiExponents {
        lo: ExtRat::Finite(lo.unwrap_or_default()),
        hi: ExtRat::Finite(hi.unwrap_or_default()),
        exact: false,
    }
}

/// For each rule decide whether it fires infinitely often; `None` when
/// some rule is undecidable in the implemented algebra.
fn exact_infinite_rules(psi: &SpeedFn) -> Option<Vec<bool>> {
    let mut out = Vec::with_capacity(psi.rules.len());
    for (i, rule) in psi.rules.iter().enumerate() {
        let earlier = &psi.rules[..i];
        if earlier.iter().any(|r| r.index == IndexSet::All) {
            out.push(false);
            continue;
        }
        let earlier_arith: Vec<(u64, u64)> = earlier
            .iter()
            .filter_map(|r| match &r.index {
                IndexSet::Arith { modulus, residue } => Some((*modulus, *residue % *modulus)),
                _ => None,
            })
            .collect();
        let verdict = match &rule.index {
            IndexSet::List(_) => Some(false),
            IndexSet::All => Some(!arith_cover_everything(&earlier_arith)),
            IndexSet::Arith { modulus, residue } => Some(!arith_covers_class(
                &earlier_arith,
                *modulus,
                *residue % *modulus,
            )),
            IndexSet::Geom { ratio } => geom_fires_io(ratio, earlier, &earlier_arith),
            IndexSet::Tower => tower_fires_io(&earlier_arith),
        };
        {
            let v = verdict?;
            out.push(v)
        }
    }
    Some(out)
}

fn lcm_of(mods: &[(u64, u64)]) -> Option<u64> {
    let mut l: u64 = 1;
    for (m, _) in mods {
        l = l.checked_mul(m / l.gcd(m))?;
        if l > 1 << 20 {
            return None;
        }
    }
    Some(l)
}

fn arith_cover_everything(earlier: &[(u64, u64)]) -> bool {
    match lcm_of(earlier) {
        Some(l) => (0..l).all(|r| earlier.iter().any(|(m, b)| r % m == *b)),
        None => false,
    }
}

fn arith_covers_class(earlier: &[(u64, u64)], modulus: u64, residue: u64) -> bool {
    match lcm_of(&[earlier, &[(modulus, residue)]].concat()) {
        Some(l) => (0..l)
            .filter(|r| r % modulus == residue)
            .all(|r| earlier.iter().any(|(m, b)| r % m == *b)),
        None => false,
    }
}

fn geom_fires_io(
    ratio: &Rat,
    earlier: &[SpeedRule],
    earlier_arith: &[(u64, u64)],
) -> Option<bool> {
    // Earlier geometric rules swallow this one only when its ratio is an
    // integer power of theirs; partial overlap leaves infinitely many
    // escapes.
    for r in earlier {
        if let IndexSet::Geom { ratio: r2 } = &r.index {
            if ratio.is_integer() && r2.is_integer() {
                if integer_power_of(ratio.numer(), r2.numer()) {
                    return Some(false);
                }
            } else {
                return None;
            }
        }
    }
    if earlier_arith.is_empty() {
        return Some(true);
    }
    if !ratio.is_integer() {
        // ⌊r^k⌋ mod m is not eventually periodic for non-integer r.
        return None;
    }
    let l = lcm_of(earlier_arith)?;
    let r = ratio.numer().mod_floor(&BigInt::from(l)).to_u64()?;
    // r^k mod l is eventually periodic; scan past the preperiod.
    let mut v = r % l;
    let mut escaped = false;
    for k in 1..=(4 * l + 64) {
        if k > 1 {
            v = (v * (r % l)) % l;
        }
        if k > 64 && !earlier_arith.iter().any(|(m, b)| v % m == *b) {
            escaped = true;
            break;
        }
    }
    Some(escaped)
}

fn tower_fires_io(earlier_arith: &[(u64, u64)]) -> Option<bool> {
    if earlier_arith.is_empty() {
        return Some(true);
    }
    let l = lcm_of(earlier_arith)?;
    if l > 4096 {
        return None;
    }
    // k^k mod l is periodic in k (period divides lcm(l, λ(l))) once k
    // clears the prime powers of l; scan two coarse periods.
    let span = 2 * l * l + 64;
    let lb = BigInt::from(l);
    let mut escaped = false;
    for k in 64..=(64 + span) {
        let kb = BigInt::from(k % l);
        let v = kb.modpow(&BigInt::from(k), &lb).to_u64()?;
        if !earlier_arith.iter().any(|(m, b)| v % m == *b) {
            escaped = true;
            break;
        }
    }
    Some(escaped)
}

fn integer_power_of(big: &BigInt, base: &BigInt) -> bool {
    if base <= &BigInt::one() {
        return false;
    }
    let mut p = base.clone();
    while &p <= big {
        if &p == big {
            return true;
        }
        p *= base;
    }
    false
}

// ---------------------------------------------------------------------------
// Orbits and hitting analysis
// ---------------------------------------------------------------------------

/// The orbit x, Tx, …, T^{n−1}x with exact scalars, plus the index of the
/// first certified zero hit if any.
pub fn orbit(
    x: &RealScalar,
    beta: &BetaValue,
    n: usize,
) -> Result<(Vec<RealScalar>, Option<usize>)> {
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    let (_, mut pts) = greedy_expand_with_orbit(x, beta, n - 1)?;
    pts.truncate(n);
    let zero_at = pts.iter().position(|p| p.is_zero());
    Ok((pts, zero_at))
}

/// Certified comparison of an orbit value t ≥ 0 against ψ(n).
pub(crate) fn cmp_orbit_vs_psi(
    t: &RealScalar,
    psi: &PsiValue,
    beta: &BetaValue,
) -> Result<Ordering> {
    match psi {
        PsiValue::Const(c) => t.cmp_exact(&RealScalar::from_rational(c.clone())),
        PsiValue::BetaPow(e) => {
            if t.is_zero() {
                // ψ > 0 always.
                return Ok(Ordering::Less);
            }
            // t < β^{−e}  ⟺  t^q · β^p < 1 where e = p/q, q > 0.
            let q = e.denom().to_u32().filter(|&q| q <= 64).ok_or_else(|| {
                BetaError::InvalidParams(
                    "rate denominator too large for certified comparison".into(),
                )
            })?;
            let p = e
                .numer()
                .to_i64()
                .ok_or_else(|| BetaError::InvalidParams("rate numerator overflow".into()))?;
            let lhs = t.pow(q).mul(&beta.pow_scalar(p));
            lhs.cmp_exact(&RealScalar::one())
        }
    }
}

/// All n ∈ [1, horizon] with T^n x < ψ(n), each comparison certified.
pub fn hitting_times(
    x: &RealScalar,
    beta: &BetaValue,
    psi: &SpeedFn,
    horizon: usize,
) -> Result<Vec<u64>> {
    let (pts, zero_at) = orbit(x, beta, horizon + 1)?;
    let mut out = Vec::new();
    for n in 1..=horizon {
        let is_zero_here = zero_at.map(|z| n >= z).unwrap_or(false);
        let less = if is_zero_here {
            true
        } else {
            cmp_orbit_vs_psi(&pts[n], &psi.value_at(n as u64), beta)? == Ordering::Less
        };
        if less {
            out.push(n as u64);
        }
    }
    Ok(out)
}

/// Per-window verdicts: for each N in [n_lo, n_hi], whether some
/// n ∈ [0, N] has T^n x < ψ(N).
pub fn uniform_check(
    x: &RealScalar,
    beta: &BetaValue,
    psi: &SpeedFn,
    n_lo: usize,
    n_hi: usize,
) -> Result<Vec<(u64, bool)>> {
    let (pts, zero_at) = orbit(x, beta, n_hi + 1)?;
    let mut out = Vec::with_capacity(n_hi - n_lo + 1);
    // Running orbit minimum over [0, N].
    let mut min = pts[0].clone();
    let mut hit_zero = zero_at == Some(0);
    for n in 0..=n_hi {
        if n > 0 && !hit_zero {
            if zero_at.map(|z| n >= z).unwrap_or(false) {
                hit_zero = true;
            } else if pts[n].cmp_exact(&min)? == Ordering::Less {
                min = pts[n].clone();
            }
        }
        if n >= n_lo {
            let ok = hit_zero
                || cmp_orbit_vs_psi(&min, &psi.value_at(n.max(1) as u64), beta)?
                    == Ordering::Less;
            out.push((n as u64, ok));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Digit streams and witnesses
// ---------------------------------------------------------------------------

/// Position rule for a scheduled witness stream.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionRule {
    /// n_k = ⌊ratio^k⌋ (ratio > 1).
    Geometric(Rat),
    /// n_k = k^k.
    Tower,
    /// n_{k+1} = ⌈factor·m_k⌉: each block starts a fixed factor past the
    /// previous block's end.
    ChainedFromEnd(Rat),
}

/// Gap rule: where the closing digit m_k goes.
#[derive(Debug, Clone, PartialEq)]
pub enum GapRule {
    /// m_k = n_k + max(1, ⌊c·n_k⌋).
    Proportional(Rat),
    /// m_k = n_{k+1}: runs chained back to back.
    FullSpan,
}

/// Witness stream kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessKind {
    /// The infinite repetition of a digit word.
    Periodic(Vec<u32>),
    /// Runs at scheduled positions, with the region after each run filled
    /// by repeating 1s every gap length so no spurious longer run
    /// appears.
    Scheduled { position: PositionRule, gap: GapRule },
    /// Blocks 1 0^{⌊2^{a^{k²}}⌋} for k = 1, 2, …, truncated after
    /// `max_blocks` (the final block size then repeats forever).
    PsiA { a: Rat, max_blocks: usize },
}

/// A lazily generated digit stream.
#[derive(Debug, Clone)]
pub struct DigitStream {
    kind: StreamKind,
}

#[derive(Debug, Clone)]
enum StreamKind {
    Explicit { digits: Vec<u32>, terminating: bool },
    Periodic { word: Vec<u32> },
    Witness(WitnessKind),
    Expansion { x: RealScalar, beta: BetaValue },
}

impl DigitStream {
    pub fn from_digits(digits: Vec<u32>, terminating: bool) -> DigitStream {
        DigitStream {
            kind: StreamKind::Explicit { digits, terminating },
        }
    }

    /// The digit stream of d_β(x).
    pub fn from_expansion(x: RealScalar, beta: BetaValue) -> DigitStream {
        DigitStream {
            kind: StreamKind::Expansion { x, beta },
        }
    }

    /// Digits 1..=horizon plus whether the stream is certified to be
    /// eventually zero (terminating).
    pub fn prefix(&self, horizon: usize) -> Result<(Vec<u32>, bool)> {
        match &self.kind {
            StreamKind::Explicit { digits, terminating } => {
                let mut d = digits.clone();
                d.resize(horizon.max(d.len()), 0);
                d.truncate(horizon);
                Ok((d, *terminating))
            }
            StreamKind::Periodic { word } => {
                let terminating = word.iter().all(|&d| d == 0);
                let mut d = Vec::with_capacity(horizon);
                for i in 0..horizon {
                    d.push(word[i % word.len()]);
                }
                Ok((d, terminating))
            }
            StreamKind::Witness(k) => witness_prefix(k, horizon),
            StreamKind::Expansion { x, beta } => {
                let (w, pts) = greedy_expand_with_orbit(x, beta, horizon)?;
                let terminating = pts.iter().any(|p| p.is_zero());
                Ok((w.0, terminating))
            }
        }
    }
}

/// Build a witness stream, validating parameters.
pub fn witness_stream(kind: WitnessKind) -> Result<DigitStream> {
    match &kind {
        WitnessKind::Periodic(w) => {
            if w.is_empty() {
                return Err(BetaError::InvalidParams("empty periodic word".into()));
            }
            Ok(DigitStream {
                kind: StreamKind::Periodic { word: w.clone() },
            })
        }
        WitnessKind::Scheduled { position, gap } => {
            match position {
                PositionRule::Geometric(r) | PositionRule::ChainedFromEnd(r) => {
                    if r <= &Rat::one() {
                        return Err(BetaError::InvalidParams(
                            "position ratio must be > 1".into(),
                        ));
                    }
                }
                PositionRule::Tower => {}
            }
            if let GapRule::Proportional(c) = gap {
                if c.is_negative() {
                    return Err(BetaError::InvalidParams("gap factor must be ≥ 0".into()));
                }
            }
            Ok(DigitStream {
                kind: StreamKind::Witness(kind),
            })
        }
        WitnessKind::PsiA { a, max_blocks } => {
            if a <= &Rat::one() {
                return Err(BetaError::InvalidParams("psi_a needs a > 1".into()));
            }
            if *max_blocks == 0 || *max_blocks > 6 {
                return Err(BetaError::InvalidParams(
                    "psi_a blocks must be in 1..=6".into(),
                ));
            }
            Ok(DigitStream {
                kind: StreamKind::Witness(kind),
            })
        }
    }
}

fn witness_prefix(kind: &WitnessKind, horizon: usize) -> Result<(Vec<u32>, bool)> {
    match kind {
        WitnessKind::Periodic(_) => unreachable!("periodic handled by stream"),
        WitnessKind::Scheduled { position, gap } => {
            let pairs = schedule_pairs(position, gap, horizon as u64)?;
            let mut digits = vec![0u32; horizon];
            let put = |d: &mut Vec<u32>, p: u64| {
                if p >= 1 && (p as usize) <= horizon {
                    d[p as usize - 1] = 1;
                }
            };
            for i in 0..pairs.len() {
                let (n, m) = pairs[i];
                put(&mut digits, n);
                put(&mut digits, m);
                // Repeat 1s every (m − n) so the region up to the next
                // block start holds no run longer than m − n.
                let next = pairs.get(i + 1).map(|&(n2, _)| n2).unwrap_or(u64::MAX);
                let g = m - n;
                if g > 0 {
                    let mut p = m + g;
                    while p < next && p <= horizon as u64 {
                        put(&mut digits, p);
                        p += g;
                    }
                }
            }
            Ok((digits, false))
        }
        WitnessKind::PsiA { a, max_blocks } => {
            let mut digits = vec![0u32; horizon];
            let mut pos: u64 = 1;
            let mut block = 1usize;
            let mut last_len: u64 = 1;
            while (pos as usize) <= horizon {
                digits[pos as usize - 1] = 1;
                let len = if block <= *max_blocks {
                    let e = rat_pow(a, (block * block) as u32);
                    let b = floor_pow2(&e)?;
                    b.to_u64()
                        .ok_or_else(|| BetaError::InvalidParams("psi_a block exceeds the addressable horizon; use a scheduled surrogate".into()))?
                } else {
                    last_len
                };
                last_len = len;
                pos += len + 1;
                block += 1;
            }
            Ok((digits, false))
        }
    }
}

fn schedule_pairs(position: &PositionRule, gap: &GapRule, horizon: u64) -> Result<Vec<(u64, u64)>> {
    let position_at = |k: u32, prev_end: u64| -> u64 {
        match position {
            PositionRule::Geometric(r) => crate::precision::rat_floor(&rat_pow(r, k))
                .to_u64()
                .unwrap_or(u64::MAX),
            PositionRule::Tower => tower_values()
                .get(k as usize - 1)
                .copied()
                .unwrap_or(u64::MAX),
            PositionRule::ChainedFromEnd(r) => {
                if prev_end == 0 {
                    2
                } else {
                    let v = Rat::from_integer(BigInt::from(prev_end)) * r.clone();
                    let f = crate::precision::rat_floor(&v);
                    let n = f.to_u64().unwrap_or(u64::MAX);
                    if Rat::from_integer(BigInt::from(n)) == v {
                        n
                    } else {
                        n.saturating_add(1)
                    }
                }
            }
        }
    };
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut prev_end: u64 = 0;
    let mut k = 1u32;
    while k <= 200 {
        let n = position_at(k, prev_end);
        if n > horizon {
            break;
        }
        // n == prev_end means the closing digit of the previous run also
        // opens this one; only strict overlap is skipped.
        if n < prev_end {
            k += 1;
            continue;
        }
        let next_start = match position {
            PositionRule::ChainedFromEnd(_) => u64::MAX,
            _ => position_at(k + 1, 0),
        };
        let m = match gap {
            GapRule::Proportional(c) => {
                let g = crate::precision::rat_floor(&(c.clone() * rat_i64(n as i64)))
                    .to_u64()
                    .unwrap_or(0)
                    .max(1);
                n + g
            }
            GapRule::FullSpan => match position {
                PositionRule::ChainedFromEnd(_) => {
                    return Err(BetaError::InvalidParams(
                        "full-span gap needs geometric or tower positions".into(),
                    ))
                }
                _ => next_start,
            },
        };
        if next_start != u64::MAX && m > next_start {
            return Err(BetaError::InvalidParams(format!(
                "gap overruns the next scheduled position (m_k = {m} > n_(k+1) = {next_start})"
            )));
        }
        pairs.push((n, m));
        prev_end = m;
        k += 1;
    }
    Ok(pairs)
}

/// ⌊2^e⌋ for a nonnegative rational e, via certified dyadic enclosures
/// of the fractional power (iterated integer square roots of 2).
pub(crate) fn floor_pow2(e: &Rat) -> Result<BigUint> {
    if e.is_negative() {
        return Err(BetaError::InvalidParams("negative exponent".into()));
    }
    let s = crate::precision::rat_floor(e)
        .to_u64()
        .filter(|&s| s <= 60)
        .ok_or_else(|| BetaError::InvalidParams("block exponent too large; use a scheduled surrogate".into()))?;
    let f = e - Rat::from_integer(BigInt::from(s));
    if f.is_zero() {
        return Ok(BigUint::one() << s as usize);
    }
    // 2^f is irrational for f = p/q in lowest terms with q > 1, so a
    // tight enough enclosure decides the floor.
    let mut prec: usize = 96;
    loop {
        // Binary digits of f.
        let mut digits = Vec::with_capacity(prec);
        let mut r = f.clone();
        for _ in 0..prec {
            r *= rat_i64(2);
            if r >= Rat::one() {
                digits.push(true);
                r -= Rat::one();
            } else {
                digits.push(false);
            }
        }
        // Iterated square roots of 2 as scaled integers ≈ value·2^prec.
        let scale_bits = prec;
        let one_scaled = BigUint::one() << scale_bits;
        let mut roots_lo: Vec<BigUint> = Vec::with_capacity(digits.len());
        let mut cur = (BigUint::from(2u32) << (2 * scale_bits)).sqrt();
        for _ in 0..digits.len() {
            roots_lo.push(cur.clone());
            cur = (&cur << scale_bits).sqrt();
        }
        let mut lo = one_scaled.clone();
        let mut hi = one_scaled.clone();
        for (i, &bit) in digits.iter().enumerate() {
            if !bit {
                continue;
            }
            let rl = &roots_lo[i];
            let rh = rl + BigUint::one();
            lo = (&lo * rl) >> scale_bits;
            hi = ((&hi * &rh) >> scale_bits) + BigUint::one();
        }
        // Truncating f at prec binary digits undershoots 2^f by a factor
        // below 1 + 2^{-prec+1}; widen hi accordingly.
        hi = &hi + ((&hi >> (prec - 2)) + BigUint::one());
        let cand_lo = (&lo << s as usize) >> scale_bits;
        let cand_hi = (&hi << s as usize) >> scale_bits;
        if cand_lo == cand_hi {
            return Ok(cand_lo);
        }
        prec *= 2;
        if prec > 1 << 16 {
            return Err(BetaError::PrecisionExhausted {
                bits: prec as u32,
                context: "floor of dyadic power".into(),
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Run decomposition and exponent estimation
// ---------------------------------------------------------------------------

/// Maximal zero-run structure of a digit stream prefix.
#[derive(Debug, Clone)]
pub struct RunDecomposition {
    /// (n′_i, m′_i): consecutive nonzero positions with at least one zero
    /// strictly between.
    pub runs: Vec<(u64, u64)>,
    /// The greedy subsequence with strictly increasing gaps, following
    /// i_{k+1} = min{ i > i_k : m′_i − n′_i > m_k − n_k }.
    pub selected: Vec<(u64, u64)>,
    pub terminating: bool,
}

/// Scan a stream prefix into runs and the selected subsequence.
pub fn run_decomposition(stream: &DigitStream, horizon: usize) -> Result<RunDecomposition> {
    let (digits, terminating) = stream.prefix(horizon)?;
    let mut runs = Vec::new();
    let mut last_nonzero: Option<u64> = None;
    for (i, &d) in digits.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let pos = i as u64 + 1;
        if let Some(p) = last_nonzero {
            if pos > p + 1 {
                runs.push((p, pos));
            }
        }
        last_nonzero = Some(pos);
    }
    let mut selected: Vec<(u64, u64)> = Vec::new();
    for &(n, m) in &runs {
        match selected.last() {
            None => selected.push((n, m)),
            Some(&(ln, lm)) => {
                if m - n > lm - ln {
                    selected.push((n, m));
                }
            }
        }
    }
    Ok(RunDecomposition {
        runs,
        selected,
        terminating,
    })
}

/// Estimates of ν_β and ν̂_β from the run structure.
#[derive(Debug, Clone)]
pub struct ExponentEstimate {
    pub nu: ExtRat,
    pub nu_hat: ExtRat,
    pub horizon: usize,
    /// (n_k, (m_k − n_k)/n_k) over the selected runs.
    pub nu_series: Vec<(u64, Rat)>,
    /// (n_{k+1}, (m_k − n_k)/n_{k+1}) over consecutive selected runs.
    pub nu_hat_series: Vec<(u64, Rat)>,
}

/// Fraction of the selected runs forming the liminf/limsup tail window.
const TAIL_FRACTION: f64 = 0.5;

/// Estimate ν (max of tail (m_k−n_k)/n_k) and ν̂ (min of tail
/// (m_k−n_k)/n_{k+1}) over the selected runs; both ∞ for terminating
/// streams.
pub fn estimate_exponents(stream: &DigitStream, horizon: usize) -> Result<ExponentEstimate> {
    let rd = run_decomposition(stream, horizon)?;
    if rd.terminating {
        return Ok(ExponentEstimate {
            nu: ExtRat::Infinite,
            nu_hat: ExtRat::Infinite,
            horizon,
            nu_series: Vec::new(),
            nu_hat_series: Vec::new(),
        });
    }
    let k = rd.selected.len();
    if k < 3 {
        return Err(BetaError::InsufficientRuns(format!(
            "{k} selected runs within horizon {horizon}, need ≥ 3"
        )));
    }
    let nu_series: Vec<(u64, Rat)> = rd
        .selected
        .iter()
        .map(|&(n, m)| (n, rat_i64((m - n) as i64) / rat_i64(n as i64)))
        .collect();
    let nu_hat_series: Vec<(u64, Rat)> = rd
        .selected
        .windows(2)
        .map(|w| {
            let (n, m) = w[0];
            let (n2, _) = w[1];
            (n2, rat_i64((m - n) as i64) / rat_i64(n2 as i64))
        })
        .collect();
    let tail_start = ((k as f64) * (1.0 - TAIL_FRACTION)).floor() as usize;
    let nu = nu_series[tail_start.min(k - 1)..]
        .iter()
        .map(|(_, r)| r.clone())
        .max()
        .expect("nonempty tail");
    let hat_tail = tail_start.min(nu_hat_series.len().saturating_sub(1));
    let nu_hat = nu_hat_series[hat_tail..]
        .iter()
        .map(|(_, r)| r.clone())
        .min()
        .expect("nonempty tail");
    Ok(ExponentEstimate {
        nu: ExtRat::Finite(nu),
        nu_hat: ExtRat::Finite(nu_hat),
        horizon,
        nu_series,
        nu_hat_series,
    })
}
