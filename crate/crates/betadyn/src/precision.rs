//! Adaptive-precision real arithmetic with certified floor and comparison
//! decisions.
//!
//! The base β is either an exact rational (decimal literal) or the unique
//! root of an integer polynomial inside an isolating interval. Derived
//! quantities live in ℚ(β): they are kept as polynomials in β reduced
//! modulo the defining polynomial, so equalities are decided exactly and
//! enclosures are refined only to separate genuinely distinct reals. A
//! refinement budget (default 4096 bits, doubling from 128, overridable
//! via `BETADYN_PRECISION_BITS`) turns a failure to separate into a hard
//! error rather than a silent guess.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::BetaError;
use crate::Result;

pub type Rat = BigRational;

/// Starting working precision in bits.
pub const START_BITS: u32 = 128;
/// Default refinement budget in bits.
pub const DEFAULT_MAX_BITS: u32 = 4096;

static MAX_BITS: OnceLock<u32> = OnceLock::new();

/// Refinement budget in bits, read once from `BETADYN_PRECISION_BITS`.
pub fn max_precision_bits() -> u32 {
    *MAX_BITS.get_or_init(|| {
        std::env::var("BETADYN_PRECISION_BITS")
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&b: &u32| b >= START_BITS)
            .unwrap_or(DEFAULT_MAX_BITS)
    })
}

pub(crate) fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub(crate) fn rat_of(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "p/q", "p" or a decimal literal "d.ddd" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(BetaError::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| BetaError::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| BetaError::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(BetaError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| BetaError::Parse(format!("bad decimal in {s:?}")))?
        };
        if frac.is_empty() {
            return Ok(Rat::from_integer(i));
        }
        let f: BigInt = frac
            .parse()
            .map_err(|_| BetaError::Parse(format!("bad decimal in {s:?}")))?;
        if f.is_negative() {
            return Err(BetaError::Parse(format!("bad decimal in {s:?}")));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let abs = Rat::from_integer(i.abs()) + Rat::new(f, scale);
        return Ok(if sign < 0 { -abs } else { abs });
    }
    let i: BigInt = s
        .parse()
        .map_err(|_| BetaError::Parse(format!("bad rational {s:?}")))?;
    Ok(Rat::from_integer(i))
}

/// Floor of an exact rational.
pub fn rat_floor(x: &Rat) -> BigInt {
    x.numer().div_floor(x.denom())
}

fn two_pow_neg(bits: u32) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(2u32) << (bits as usize - 1))
}

// ---------------------------------------------------------------------------
// Integer polynomials
// ---------------------------------------------------------------------------

/// Dense integer polynomial, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + Rat::from_integer(c.clone());
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        if self.degree() == 0 {
            return IntPoly::new(vec![BigInt::zero()]);
        }
        IntPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Divide out the integer content and force a positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        let mut g = BigInt::zero();
        for c in &self.0 {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return self.clone();
        }
        let lead_neg = self.0.last().map(|c| c.is_negative()).unwrap_or(false);
        if lead_neg {
            g = -g;
        }
        IntPoly::new(self.0.iter().map(|c| c / &g).collect())
    }

    fn to_rat_vec(&self) -> Vec<Rat> {
        self.0.iter().map(|c| Rat::from_integer(c.clone())).collect()
    }

    fn from_rat_vec(v: &[Rat]) -> IntPoly {
        let mut denom = BigInt::one();
        for c in v {
            let g = denom.gcd(c.denom());
            denom = denom / g * c.denom();
        }
        IntPoly::new(
            v.iter()
                .map(|c| c.numer() * (&denom / c.denom()))
                .collect(),
        )
        .primitive()
    }

    /// Polynomial gcd over ℚ, returned primitive over ℤ.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.to_rat_vec();
        let mut b = other.to_rat_vec();
        loop {
            if rat_poly_is_zero(&b) {
                return IntPoly::from_rat_vec(&a);
            }
            let r = rat_poly_rem(&a, &b);
            a = b;
            b = r;
        }
    }

    /// Square-free part (same real roots, all simple).
    pub fn squarefree(&self) -> IntPoly {
        let d = self.derivative();
        let g = self.gcd(&d);
        if g.degree() == 0 {
            return self.primitive();
        }
        let q = rat_poly_div(&self.to_rat_vec(), &g.to_rat_vec());
        IntPoly::from_rat_vec(&q)
    }

    /// Number of distinct real roots in the half-open interval (lo, hi],
    /// by Sturm's theorem. Requires a square-free polynomial.
    pub fn count_roots(&self, lo: &Rat, hi: &Rat) -> usize {
        let chain = self.sturm_chain();
        let v_lo = sign_variations(&chain, lo);
        let v_hi = sign_variations(&chain, hi);
        v_lo.saturating_sub(v_hi)
    }

    fn sturm_chain(&self) -> Vec<Vec<Rat>> {
        let mut chain = vec![self.to_rat_vec(), self.derivative().to_rat_vec()];
        loop {
            let n = chain.len();
            let r = rat_poly_rem(&chain[n - 2], &chain[n - 1]);
            if rat_poly_is_zero(&r) {
                break;
            }
            chain.push(r.iter().map(|c| -c).collect());
        }
        chain
    }
}

fn rat_poly_trim(v: &mut Vec<Rat>) {
    while v.len() > 1 && v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
}

/// Scale by a positive constant to primitive integer coefficients; keeps
/// remainder chains from exploding and preserves every sign.
fn rat_poly_make_primitive(v: &mut [Rat]) {
    let mut den = BigInt::one();
    for c in v.iter() {
        let g = den.gcd(c.denom());
        den = den / g * c.denom();
    }
    let mut num = BigInt::zero();
    for c in v.iter() {
        num = num.gcd(&(c.numer() * (&den / c.denom())));
    }
    if num.is_zero() {
        return;
    }
    let scale = Rat::new(den, num.abs());
    for c in v.iter_mut() {
        *c = &*c * &scale;
    }
}

fn rat_poly_is_zero(v: &[Rat]) -> bool {
    v.iter().all(|c| c.is_zero())
}

fn rat_poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let (q, mut r) = rat_poly_divmod(a, b);
    let _ = q;
    rat_poly_make_primitive(&mut r);
    r
}

fn rat_poly_div(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    rat_poly_divmod(a, b).0
}

fn rat_poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = a.to_vec();
    rat_poly_trim(&mut r);
    let mut bb = b.to_vec();
    rat_poly_trim(&mut bb);
    let db = bb.len() - 1;
    let lead = bb[db].clone();
    assert!(!lead.is_zero(), "division by zero polynomial");
    if r.len() - 1 < db || rat_poly_is_zero(&r) {
        return (vec![Rat::zero()], r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    while r.len() > db && !rat_poly_is_zero(&r) {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        q[dr - db] = f.clone();
        for i in 0..=db {
            let t = &bb[i] * &f;
            r[dr - db + i] = &r[dr - db + i] - t;
        }
        rat_poly_trim(&mut r);
        if r.len() - 1 < db {
            break;
        }
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    (q, r)
}

fn sign_variations(chain: &[Vec<Rat>], x: &Rat) -> usize {
    let mut prev = 0i8;
    let mut n = 0;
    for p in chain {
        let mut acc = Rat::zero();
        for c in p.iter().rev() {
            acc = acc * x + c.clone();
        }
        let s = if acc.is_zero() {
            0
        } else if acc.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if prev != 0 && s != prev {
                n += 1;
            }
            prev = s;
        }
    }
    n
}

/// Sign evaluation of an integer polynomial at dyadic-refined rationals
/// x = n/(d₀·2^k), with the d₀-powers folded into the coefficients once.
/// Pure integer Horner — no rational reductions in bisection loops.
struct ScaledPoly {
    /// c_i · d₀^{D−i}, constant term first.
    scaled: Vec<BigInt>,
}

impl ScaledPoly {
    fn new(p: &IntPoly, d0: &BigInt) -> ScaledPoly {
        let d = p.degree();
        let mut pw = BigInt::one();
        let mut pows = vec![BigInt::one(); d + 1];
        for slot in pows.iter_mut().skip(1) {
            pw *= d0;
            *slot = pw.clone();
        }
        let scaled = p
            .0
            .iter()
            .enumerate()
            .map(|(i, c)| c * &pows[d - i])
            .collect();
        ScaledPoly { scaled }
    }

    /// Sign of P(n/(d₀·2^k)).
    fn sign_at(&self, n: &BigInt, k: u64) -> i32 {
        let d = self.scaled.len() - 1;
        let mut v = self.scaled[d].clone();
        for i in (0..d).rev() {
            let term = &self.scaled[i] << (k * (d - i) as u64);
            v = v * n + term;
        }
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Interval bisection state over numerators n/(d₀·2^k).
struct DyadicInterval {
    lo: BigInt,
    hi: BigInt,
    d0: BigInt,
    k: u64,
}

impl DyadicInterval {
    fn from_rats(lo: &Rat, hi: &Rat) -> DyadicInterval {
        let d0 = lo.denom() / lo.denom().gcd(hi.denom()) * hi.denom();
        DyadicInterval {
            lo: lo.numer() * (&d0 / lo.denom()),
            hi: hi.numer() * (&d0 / hi.denom()),
            d0,
            k: 0,
        }
    }

    fn lo_rat(&self) -> Rat {
        Rat::new(self.lo.clone(), &self.d0 << self.k)
    }

    fn hi_rat(&self) -> Rat {
        Rat::new(self.hi.clone(), &self.d0 << self.k)
    }

    /// One bisection step on a sign-changing interval; returns the exact
    /// rational root when the midpoint lands on it.
    fn step(&mut self, sp: &ScaledPoly, lo_sign: i32) -> Option<Rat> {
        let mid = &self.lo + &self.hi;
        self.k += 1;
        self.lo <<= 1;
        self.hi <<= 1;
        let s = sp.sign_at(&mid, self.k);
        if s == 0 {
            return Some(Rat::new(mid, &self.d0 << self.k));
        }
        if s == lo_sign {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
        None
    }
}

// ---------------------------------------------------------------------------
// The base β
// ---------------------------------------------------------------------------

/// How a base was specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BetaSpec {
    /// Exact rational from a decimal literal.
    Decimal(Rat),
    /// Integer-coefficient polynomial (constant term first) plus an
    /// isolating rational interval for the intended root.
    Poly { coeffs: Vec<BigInt>, lo: Rat, hi: Rat },
}

impl BetaSpec {
    /// Parse the textual grammar `dec:<digits>` or
    /// `poly:<c0,c1,...,cn>@[lo,hi]`.
    pub fn parse(s: &str) -> Result<BetaSpec> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("dec:") {
            return Ok(BetaSpec::Decimal(parse_rational(rest)?));
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let (cs, iv) = rest
                .split_once('@')
                .ok_or_else(|| BetaError::Parse(format!("missing @[lo,hi] in {s:?}")))?;
            let coeffs: Vec<BigInt> = cs
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse()
                        .map_err(|_| BetaError::Parse(format!("bad coefficient {c:?}")))
                })
                .collect::<Result<_>>()?;
            let iv = iv
                .trim()
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| BetaError::Parse(format!("bad interval in {s:?}")))?;
            let (lo, hi) = iv
                .split_once(',')
                .ok_or_else(|| BetaError::Parse(format!("bad interval in {s:?}")))?;
            return Ok(BetaSpec::Poly {
                coeffs,
                lo: parse_rational(lo)?,
                hi: parse_rational(hi)?,
            });
        }
        Err(BetaError::Parse(format!(
            "beta spec must start with dec: or poly:, got {s:?}"
        )))
    }
}

#[derive(Debug)]
enum BetaRepr {
    Rational(Rat),
    Algebraic {
        poly: IntPoly,
        // Isolating interval, refined in place; `bits` tracks the precision
        // already reached so repeated queries do not re-bisect.
        interval: RwLock<(Rat, Rat, u32)>,
    },
}

#[derive(Debug)]
pub(crate) struct BetaInner {
    repr: BetaRepr,
    digit_bound: u32,
    /// β⁻¹ as a polynomial in β (rational coefficients), for algebraic β.
    inv_coeffs: Vec<Rat>,
    /// Lazily extended digits of the expansion of 1 (see `symbolic`).
    pub(crate) d1_cache: RwLock<D1Cache>,
}

/// Cached state of the expansion of 1: digits computed so far, the orbit
/// point after them, and the terminating index if one was certified.
#[derive(Debug, Clone)]
#[derive(Default)]
pub(crate) struct D1Cache {
    pub digits: Vec<u32>,
    pub tail: Option<RealScalar>,
    pub terminated: Option<usize>,
}


/// The base β > 1 with an exactness guarantee for floor decisions.
#[derive(Clone)]
pub struct BetaValue {
    pub(crate) inner: Arc<BetaInner>,
}

impl fmt::Debug for BetaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.repr {
            BetaRepr::Rational(r) => write!(f, "BetaValue({r})"),
            BetaRepr::Algebraic { poly, .. } => {
                write!(f, "BetaValue(root of {:?})", poly.0)
            }
        }
    }
}

impl PartialEq for BetaValue {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        match (&self.inner.repr, &other.inner.repr) {
            (BetaRepr::Rational(a), BetaRepr::Rational(b)) => a == b,
            (BetaRepr::Algebraic { poly: p, .. }, BetaRepr::Algebraic { poly: q, .. }) => {
                p == q && {
                    let (a_lo, a_hi) = self.enclosure(START_BITS);
                    let (b_lo, b_hi) = other.enclosure(START_BITS);
                    a_lo <= b_hi && b_lo <= a_hi
                }
            }
            _ => false,
        }
    }
}

/// Build a [`BetaValue`] from a spec.
pub fn make_beta(spec: &BetaSpec) -> Result<BetaValue> {
    match spec {
        BetaSpec::Decimal(r) => beta_from_rational(r.clone()),
        BetaSpec::Poly { coeffs, lo, hi } => beta_from_poly(coeffs, lo, hi),
    }
}

/// Convenience: parse the textual grammar and build the value.
pub fn beta_from_str(s: &str) -> Result<BetaValue> {
    make_beta(&BetaSpec::parse(s)?)
}

/// Build directly from polynomial parts (constant term first).
pub fn beta_from_poly_parts(coeffs: &[BigInt], lo: &Rat, hi: &Rat) -> Result<BetaValue> {
    beta_from_poly(coeffs, lo, hi)
}

fn beta_from_rational(r: Rat) -> Result<BetaValue> {
    if r <= Rat::one() {
        return Err(BetaError::NotGreaterThanOne(format!("{r}")));
    }
    let digit_bound = rational_digit_bound(&r);
    Ok(BetaValue {
        inner: Arc::new(BetaInner {
            repr: BetaRepr::Rational(r),
            digit_bound,
            inv_coeffs: Vec::new(),
            d1_cache: RwLock::new(D1Cache::default()),
        }),
    })
}

fn rational_digit_bound(r: &Rat) -> u32 {
    let f = rat_floor(r);
    if r.is_integer() {
        (f - 1u32).to_u32().expect("digit bound fits u32")
    } else {
        f.to_u32().expect("digit bound fits u32")
    }
}

fn beta_from_poly(coeffs: &[BigInt], lo: &Rat, hi: &Rat) -> Result<BetaValue> {
    if lo >= hi {
        return Err(BetaError::RootNotIsolated(format!(
            "empty interval [{lo},{hi}]"
        )));
    }
    if lo.is_negative() || (lo.is_zero()) {
        // A valid base is > 1; an interval reaching 0 also breaks the
        // z-power stripping below.
        return Err(BetaError::RootNotIsolated(format!(
            "interval [{lo},{hi}] must have lo > 0"
        )));
    }
    let mut cs = coeffs.to_vec();
    // Strip roots at zero so the constant term is nonzero and β is a unit
    // of ℤ[β] localised at the constant term.
    while cs.first().map(|c| c.is_zero()).unwrap_or(false) && cs.len() > 1 {
        cs.remove(0);
    }
    let p = IntPoly::new(cs).squarefree();
    if p.degree() == 0 {
        return Err(BetaError::RootNotIsolated("constant polynomial".into()));
    }
    let mut lo = lo.clone();
    let hi = hi.clone();
    // Exact roots at the endpoints identify β as rational.
    if p.eval(&lo).is_zero() {
        if p.count_roots(&lo, &hi) > 0 {
            return Err(BetaError::RootNotIsolated(format!(
                "second root beyond endpoint {lo}"
            )));
        }
        return beta_from_rational(lo);
    }
    if p.eval(&hi).is_zero() {
        if p.count_roots(&lo, &hi) != 1 {
            return Err(BetaError::RootNotIsolated("extra interior root".into()));
        }
        return beta_from_rational(hi);
    }
    let n = p.count_roots(&lo, &hi);
    if n == 0 {
        return Err(BetaError::RootNotIsolated("no root in interval".into()));
    }
    if n > 1 {
        return Err(BetaError::RootNotIsolated(format!(
            "{n} roots in [{lo},{hi}]"
        )));
    }
    if hi <= Rat::one() {
        return Err(BetaError::NotGreaterThanOne(format!("root ≤ {hi}")));
    }
    if lo < Rat::one() {
        // The unique root must be > 1; check none of it lies in (lo, 1].
        if p.count_roots(&lo, &Rat::one()) > 0 {
            return Err(BetaError::NotGreaterThanOne("root ≤ 1".into()));
        }
        lo = Rat::one();
        if p.eval(&lo).is_zero() {
            return Err(BetaError::NotGreaterThanOne("root = 1".into()));
        }
    }
    // The interval now holds a single simple root with nonzero endpoint
    // values, so sign-change bisection is exact. An exact midpoint hit
    // means the root is rational after all.
    let mut iv = DyadicInterval::from_rats(&lo, &hi);
    let sp = ScaledPoly::new(&p, &iv.d0);
    let lo_sign = if p.eval(&lo).is_positive() { 1 } else { -1 };
    for _ in 0..START_BITS {
        if let Some(root) = iv.step(&sp, lo_sign) {
            return beta_from_rational(root);
        }
    }
    // β is now known irrational-or-deep; integers cannot straddle forever.
    let digit_bound = loop {
        let lo = iv.lo_rat();
        let hi = iv.hi_rat();
        let fl = rat_floor(&lo);
        let fh = rat_floor(&hi);
        if fl == fh && !hi.is_integer() {
            break fl.to_u32().expect("digit bound fits u32");
        }
        if let Some(root) = iv.step(&sp, lo_sign) {
            return beta_from_rational(root);
        }
    };
    let lo = iv.lo_rat();
    let hi = iv.hi_rat();
    let inv_coeffs = beta_inverse_coeffs(&p);
    Ok(BetaValue {
        inner: Arc::new(BetaInner {
            repr: BetaRepr::Algebraic {
                poly: p,
                interval: RwLock::new((lo, hi, START_BITS)),
            },
            digit_bound,
            inv_coeffs,
            d1_cache: RwLock::new(D1Cache::default()),
        }),
    })
}

/// β⁻¹ = −(c₁ + c₂β + … + c_dβ^{d−1})/c₀ from c₀ + c₁β + … + c_dβ^d = 0.
fn beta_inverse_coeffs(p: &IntPoly) -> Vec<Rat> {
    let c0 = p.0[0].clone();
    assert!(!c0.is_zero());
    p.0[1..]
        .iter()
        .map(|c| Rat::new(-c.clone(), c0.clone()))
        .collect()
}

impl BetaValue {
    /// ⌈β⌋: β−1 for integer β, else ⌊β⌋.
    pub fn digit_bound(&self) -> u32 {
        self.inner.digit_bound
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.inner.repr, BetaRepr::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match &self.inner.repr {
            BetaRepr::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Defining polynomial for algebraic β.
    pub fn poly(&self) -> Option<&IntPoly> {
        match &self.inner.repr {
            BetaRepr::Algebraic { poly, .. } => Some(poly),
            _ => None,
        }
    }

    /// Rational enclosure `lo ≤ β ≤ hi` of width at most 2^−bits.
    pub fn enclosure(&self, bits: u32) -> (Rat, Rat) {
        match &self.inner.repr {
            BetaRepr::Rational(r) => (r.clone(), r.clone()),
            BetaRepr::Algebraic { poly, interval } => {
                {
                    let g = interval.read().expect("beta interval lock");
                    if g.2 >= bits {
                        return (g.0.clone(), g.1.clone());
                    }
                }
                let mut g = interval.write().expect("beta interval lock");
                let target = two_pow_neg(bits);
                if g.0 == g.1 {
                    return (g.0.clone(), g.1.clone());
                }
                let mut iv = DyadicInterval::from_rats(&g.0, &g.1);
                let sp = ScaledPoly::new(poly, &iv.d0);
                let lo_sign = if poly.eval(&g.0).is_positive() { 1 } else { -1 };
                let mut width = &g.1 - &g.0;
                while width > target {
                    if let Some(root) = iv.step(&sp, lo_sign) {
                        // Rational root discovered late: collapse the
                        // enclosure to a point; all decisions become exact.
                        g.0 = root.clone();
                        g.1 = root;
                        g.2 = g.2.max(bits);
                        return (g.0.clone(), g.1.clone());
                    }
                    width /= rat_i64(2);
                }
                g.0 = iv.lo_rat();
                g.1 = iv.hi_rat();
                g.2 = g.2.max(bits);
                (g.0.clone(), g.1.clone())
            }
        }
    }

    /// β as a scalar in its own field.
    pub fn as_scalar(&self) -> RealScalar {
        match &self.inner.repr {
            BetaRepr::Rational(r) => RealScalar::from_rational(r.clone()),
            BetaRepr::Algebraic { .. } => RealScalar {
                repr: ScalarRepr::InBeta {
                    beta: self.clone(),
                    coeffs: vec![Rat::zero(), Rat::one()],
                },
            },
        }
    }

    /// β⁻¹ as a scalar.
    pub fn inv_scalar(&self) -> RealScalar {
        match &self.inner.repr {
            BetaRepr::Rational(r) => RealScalar::from_rational(r.recip()),
            BetaRepr::Algebraic { .. } => RealScalar {
                repr: ScalarRepr::InBeta {
                    beta: self.clone(),
                    coeffs: self.inner.inv_coeffs.clone(),
                },
            },
        }
    }

    /// β^e for integer e (negative allowed).
    pub fn pow_scalar(&self, e: i64) -> RealScalar {
        let base = if e >= 0 { self.as_scalar() } else { self.inv_scalar() };
        let mut acc = RealScalar::one();
        let mut n = e.unsigned_abs();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            n >>= 1;
        }
        acc
    }

    /// f64 approximation (for diagnostics and logs only).
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclosure(80);
        let mid = (lo + hi) / rat_i64(2);
        rat_to_f64(&mid)
    }

    /// Certified three-way comparison with another base. Equality across
    /// distinct polynomials is certified via a gcd witness.
    pub fn cmp_beta(&self, other: &BetaValue) -> Result<Ordering> {
        match (&self.inner.repr, &other.inner.repr) {
            (BetaRepr::Rational(a), BetaRepr::Rational(b)) => Ok(a.cmp(b)),
            _ => {
                let mut bits = START_BITS;
                loop {
                    let (alo, ahi) = self.enclosure(bits);
                    let (blo, bhi) = other.enclosure(bits);
                    if ahi < blo {
                        return Ok(Ordering::Less);
                    }
                    if bhi < alo {
                        return Ok(Ordering::Greater);
                    }
                    if alo == ahi && blo == bhi {
                        // Both enclosures collapsed to exact rationals.
                        return Ok(alo.cmp(&blo));
                    }
                    if bits == START_BITS {
                        if let (Some(p), Some(q)) = (self.poly(), other.poly()) {
                            let g = p.gcd(q);
                            if g.degree() >= 1 {
                                let lo = if alo > blo { alo.clone() } else { blo.clone() };
                                let hi = if ahi < bhi { ahi.clone() } else { bhi.clone() };
                                if lo <= hi && g.count_roots(&lo, &hi) >= 1 {
                                    return Ok(Ordering::Equal);
                                }
                            }
                        } else if let (Some(r), Some(p)) = (
                            self.as_rational().or(other.as_rational()),
                            self.poly().or(other.poly()),
                        ) {
                            if p.eval(r).is_zero() {
                                return Ok(Ordering::Equal);
                            }
                        }
                    }
                    if bits >= max_precision_bits() {
                        return Err(BetaError::PrecisionExhausted {
                            bits,
                            context: "comparing two bases".into(),
                        });
                    }
                    bits = (bits * 2).min(max_precision_bits());
                }
            }
        }
    }
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a scaled quotient for extreme magnitudes.
        let scaled = (r * Rat::from_integer(BigInt::from(1u64 << 53))).trunc();
        scaled.to_f64().map(|v| v / (1u64 << 53) as f64).unwrap_or(f64::NAN)
    })
}

// ---------------------------------------------------------------------------
// Scalars in ℚ(β)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) enum ScalarRepr {
    Rational(Rat),
    InBeta { beta: BetaValue, coeffs: Vec<Rat> },
}

/// A real number hosted either as an exact rational or as an element of
/// ℚ(β), with on-demand rational enclosures.
#[derive(Debug, Clone)]
pub struct RealScalar {
    pub(crate) repr: ScalarRepr,
}

impl RealScalar {
    pub fn from_rational(r: Rat) -> Self {
        RealScalar {
            repr: ScalarRepr::Rational(r),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat_i64(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_exact_rational(&self) -> Option<&Rat> {
        match &self.repr {
            ScalarRepr::Rational(r) => Some(r),
            _ => None,
        }
    }

    fn beta(&self) -> Option<&BetaValue> {
        match &self.repr {
            ScalarRepr::InBeta { beta, .. } => Some(beta),
            _ => None,
        }
    }

    fn coeffs_or_promote(&self, d: usize) -> Vec<Rat> {
        match &self.repr {
            ScalarRepr::Rational(r) => {
                let mut v = vec![Rat::zero(); d];
                v[0] = r.clone();
                v
            }
            ScalarRepr::InBeta { coeffs, .. } => {
                let mut v = coeffs.clone();
                v.resize(d.max(v.len()), Rat::zero());
                v
            }
        }
    }

    fn normalize(beta: BetaValue, mut coeffs: Vec<Rat>) -> RealScalar {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.iter().skip(1).all(|c| c.is_zero()) {
            return RealScalar::from_rational(coeffs.into_iter().next().unwrap_or_default());
        }
        RealScalar {
            repr: ScalarRepr::InBeta { beta, coeffs },
        }
    }

    fn binop(&self, other: &RealScalar, f: impl Fn(&Rat, &Rat) -> Rat) -> RealScalar {
        match (self.beta(), other.beta()) {
            (None, None) => {
                let a = self.is_exact_rational().expect("rational");
                let b = other.is_exact_rational().expect("rational");
                RealScalar::from_rational(f(a, b))
            }
            (b1, b2) => {
                let beta = b1.or(b2).expect("beta present").clone();
                if let (Some(x), Some(y)) = (b1, b2) {
                    assert!(
                        Arc::ptr_eq(&x.inner, &y.inner),
                        "mixed bases in scalar arithmetic"
                    );
                }
                let deg = beta.poly().map(|p| p.degree()).unwrap_or(1);
                let a = self.coeffs_or_promote(deg);
                let b = other.coeffs_or_promote(deg);
                let n = a.len().max(b.len());
                let mut out = Vec::with_capacity(n);
                let z = Rat::zero();
                for i in 0..n {
                    out.push(f(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)));
                }
                RealScalar::normalize(beta, out)
            }
        }
    }

    pub fn add(&self, other: &RealScalar) -> RealScalar {
        self.binop(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealScalar) -> RealScalar {
        self.binop(other, |a, b| a - b)
    }

    pub fn neg(&self) -> RealScalar {
        RealScalar::zero().sub(self)
    }

    pub fn mul(&self, other: &RealScalar) -> RealScalar {
        match (self.beta(), other.beta()) {
            (None, None) => RealScalar::from_rational(
                self.is_exact_rational().unwrap() * other.is_exact_rational().unwrap(),
            ),
            (b1, b2) => {
                let beta = b1.or(b2).expect("beta present").clone();
                if let (Some(x), Some(y)) = (b1, b2) {
                    assert!(
                        Arc::ptr_eq(&x.inner, &y.inner),
                        "mixed bases in scalar arithmetic"
                    );
                }
                let p = beta.poly().expect("algebraic base").clone();
                let a = self.coeffs_or_promote(1);
                let b = other.coeffs_or_promote(1);
                let mut prod = vec![Rat::zero(); a.len() + b.len() - 1];
                for (i, ca) in a.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (j, cb) in b.iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        prod[i + j] = &prod[i + j] + ca * cb;
                    }
                }
                let red = reduce_mod(&prod, &p);
                RealScalar::normalize(beta, red)
            }
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> RealScalar {
        self.mul(&RealScalar::from_rational(r.clone()))
    }

    pub fn pow(&self, e: u32) -> RealScalar {
        let mut acc = RealScalar::one();
        let mut sq = self.clone();
        let mut n = e;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            n >>= 1;
        }
        acc
    }

    /// Exact zero test: trivial for rationals; for ℚ(β) elements the
    /// numerator polynomial is reduced and, if β's polynomial is
    /// reducible, tested through a gcd witness on the isolating interval.
    pub fn is_zero(&self) -> bool {
        match &self.repr {
            ScalarRepr::Rational(r) => r.is_zero(),
            ScalarRepr::InBeta { beta, coeffs } => {
                if coeffs.iter().all(|c| c.is_zero()) {
                    return true;
                }
                let p = match beta.poly() {
                    Some(p) => p,
                    None => return false,
                };
                let (lo, hi) = beta.enclosure(START_BITS);
                if lo == hi {
                    // Point enclosure: β rational-in-disguise.
                    let mut acc = Rat::zero();
                    for c in coeffs.iter().rev() {
                        acc = acc * &lo + c.clone();
                    }
                    return acc.is_zero();
                }
                let f = IntPoly::from_rat_vec(coeffs);
                if f.is_zero() {
                    return true;
                }
                let g = f.gcd(p);
                if g.degree() == 0 {
                    return false;
                }
                g.count_roots(&lo, &hi) >= 1
            }
        }
    }

    /// Rational enclosure of width at most 2^−bits.
    pub fn enclosure(&self, bits: u32) -> (Rat, Rat) {
        match &self.repr {
            ScalarRepr::Rational(r) => (r.clone(), r.clone()),
            ScalarRepr::InBeta { beta, coeffs } => {
                let target = two_pow_neg(bits);
                let mut b = bits.max(START_BITS);
                loop {
                    let (lo, hi) = beta.enclosure(b);
                    let (elo, ehi) = horner_interval(coeffs, &lo, &hi);
                    if &ehi - &elo <= target || lo == hi {
                        return (elo, ehi);
                    }
                    b = b.saturating_mul(2);
                }
            }
        }
    }

    /// Certified sign. `PrecisionExhausted` only when the budget runs out
    /// on a value that is provably nonzero but not yet separated (which
    /// cannot happen for ℚ(β) elements — the zero test is exact — so the
    /// budget is a hard safety net).
    pub fn sign(&self) -> Result<Ordering> {
        match &self.repr {
            ScalarRepr::Rational(r) => Ok(r.cmp(&Rat::zero())),
            ScalarRepr::InBeta { .. } => {
                if self.is_zero() {
                    return Ok(Ordering::Equal);
                }
                let mut bits = START_BITS;
                loop {
                    let (lo, hi) = self.enclosure(bits);
                    if lo.is_positive() {
                        return Ok(Ordering::Greater);
                    }
                    if hi.is_negative() {
                        return Ok(Ordering::Less);
                    }
                    if lo == hi {
                        return Ok(lo.cmp(&Rat::zero()));
                    }
                    if bits >= max_precision_bits() {
                        return Err(BetaError::PrecisionExhausted {
                            bits,
                            context: "sign of scalar".into(),
                        });
                    }
                    bits = (bits * 2).min(max_precision_bits());
                }
            }
        }
    }

    /// Certified comparison, with the same refine-until-separated-or-
    /// certify-equal contract as [`safe_floor`].
    pub fn cmp_exact(&self, other: &RealScalar) -> Result<Ordering> {
        self.sub(other).sign()
    }

    pub fn is_negative(&self) -> Result<bool> {
        Ok(self.sign()? == Ordering::Less)
    }

    /// ⌊x⌋ with a certified decision: the enclosure is refined until it
    /// does not straddle an integer, or x is certified to be exactly an
    /// integer.
    pub fn floor(&self) -> Result<BigInt> {
        match &self.repr {
            ScalarRepr::Rational(r) => Ok(rat_floor(r)),
            ScalarRepr::InBeta { .. } => {
                let mut bits = START_BITS;
                loop {
                    let (lo, hi) = self.enclosure(bits);
                    if lo == hi {
                        return Ok(rat_floor(&lo));
                    }
                    let fl = rat_floor(&lo);
                    let fh = rat_floor(&hi);
                    if fl == fh && !hi.is_integer() {
                        return Ok(fl);
                    }
                    // At most a couple of integer candidates once narrow.
                    if &fh - &fl <= BigInt::one() {
                        let k = fh.clone();
                        let diff = self.sub(&RealScalar::from_rational(Rat::from_integer(
                            k.clone(),
                        )));
                        if diff.is_zero() {
                            return Ok(k);
                        }
                        match diff.sign()? {
                            Ordering::Less => return Ok(fl),
                            Ordering::Greater | Ordering::Equal => return Ok(k),
                        }
                    }
                    if bits >= max_precision_bits() {
                        return Err(BetaError::PrecisionExhausted {
                            bits,
                            context: "floor of scalar".into(),
                        });
                    }
                    bits = (bits * 2).min(max_precision_bits());
                }
            }
        }
    }

    /// f64 approximation (diagnostics only).
    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            ScalarRepr::Rational(r) => rat_to_f64(r),
            _ => {
                let (lo, hi) = self.enclosure(80);
                rat_to_f64(&((lo + hi) / rat_i64(2)))
            }
        }
    }

    /// Deterministic decimal rendering, truncated to `digits` places.
    pub fn decimal_string(&self, digits: u32) -> String {
        let r = match &self.repr {
            ScalarRepr::Rational(r) => r.clone(),
            _ => {
                // Width < 10^-(digits+2) makes the truncated digits stable.
                let need_bits = ((digits + 3) as f64 * 3.33).ceil() as u32;
                let (lo, _) = self.enclosure(need_bits.max(START_BITS));
                lo
            }
        };
        render_decimal(&r, digits)
    }
}

pub(crate) fn render_decimal(r: &Rat, digits: u32) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (a * Rat::from_integer(scale.clone())).floor();
    let scaled = scaled.numer().clone();
    let (int, frac) = scaled.div_rem(&scale);
    let frac_digits = frac.to_biguint().unwrap_or_else(BigUint::zero).to_string();
    let pad = "0".repeat(digits as usize - frac_digits.len().min(digits as usize));
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{pad}{frac_digits}")
    }
}

fn reduce_mod(coeffs: &[Rat], p: &IntPoly) -> Vec<Rat> {
    let d = p.degree();
    if coeffs.len() <= d {
        return coeffs.to_vec();
    }
    let pr = p.to_rat_vec();
    let mut r = coeffs.to_vec();
    let lead = pr[d].clone();
    for i in (d..r.len()).rev() {
        if r[i].is_zero() {
            continue;
        }
        let f = &r[i] / &lead;
        for j in 0..=d {
            let t = &pr[j] * &f;
            r[i - d + j] = &r[i - d + j] - t;
        }
    }
    r.truncate(d);
    if r.is_empty() {
        r.push(Rat::zero());
    }
    r
}

fn horner_interval(coeffs: &[Rat], lo: &Rat, hi: &Rat) -> (Rat, Rat) {
    let mut alo = Rat::zero();
    let mut ahi = Rat::zero();
    for c in coeffs.iter().rev() {
        // [alo,ahi] * [lo,hi] with lo ≥ 0 (β > 1), then + c.
        let c1 = &alo * lo;
        let c2 = &alo * hi;
        let c3 = &ahi * lo;
        let c4 = &ahi * hi;
        let mut nlo = c1.clone();
        let mut nhi = c1;
        for v in [c2, c3, c4] {
            if v < nlo {
                nlo = v.clone();
            }
            if v > nhi {
                nhi = v;
            }
        }
        alo = nlo + c.clone();
        ahi = nhi + c.clone();
    }
    (alo, ahi)
}

/// ⌊x⌋ for a scalar, with the certified-decision contract.
pub fn safe_floor(x: &RealScalar) -> Result<BigInt> {
    x.floor()
}

/// Certified three-way comparison of two scalars.
pub fn compare_exact(a: &RealScalar, b: &RealScalar) -> Result<Ordering> {
    a.cmp_exact(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> BetaValue {
        beta_from_str("poly:-1,-1,1@[1,2]").unwrap()
    }

    #[test]
    fn make_beta_golden() {
        let b = golden();
        assert_eq!(b.digit_bound(), 1);
        let (lo, hi) = b.enclosure(64);
        let phi = parse_rational("1.6180339887498948482045868343656381177203").unwrap();
        let slack = Rat::new(BigInt::one(), BigInt::from(10u32).pow(30));
        assert!(&lo - &slack <= phi && phi <= &hi + &slack);
        assert!(&hi - &lo <= Rat::new(BigInt::one(), BigInt::from(1u128 << 64)));
        // β² = β + 1 certified exactly.
        let s = b.as_scalar();
        let diff = s.pow(2).sub(&s).sub(&RealScalar::one());
        assert!(diff.is_zero());
    }

    #[test]
    fn make_beta_integer_and_decimal() {
        let two = beta_from_str("dec:2").unwrap();
        assert_eq!(two.digit_bound(), 1);
        assert!(two.is_rational());
        let b = beta_from_str("dec:2.5").unwrap();
        assert_eq!(b.digit_bound(), 2);
        assert_eq!(b.as_rational().unwrap(), &rat_of(5, 2));
    }

    #[test]
    fn make_beta_rejects_bad_specs() {
        assert!(matches!(
            beta_from_str("dec:0.9"),
            Err(BetaError::NotGreaterThanOne(_))
        ));
        // Two roots of z²-3z+2 = (z-1)(z-2) in [1/2, 3].
        assert!(matches!(
            beta_from_str("poly:2,-3,1@[1/2,3]"),
            Err(BetaError::RootNotIsolated(_))
        ));
        // Unique root but ≤ 1.
        assert!(matches!(
            beta_from_str("poly:-1,2@[1/4,1]"),
            Err(BetaError::NotGreaterThanOne(_))
        ));
    }

    #[test]
    fn poly_spec_with_rational_root_collapses() {
        // 2z - 3 has the rational root 3/2.
        let b = beta_from_str("poly:-3,2@[1,2]").unwrap();
        assert!(b.is_rational());
        assert_eq!(b.as_rational().unwrap(), &rat_of(3, 2));
        assert_eq!(b.digit_bound(), 1);
    }

    #[test]
    fn safe_floor_cases() {
        let x = RealScalar::from_rational(parse_rational("1.9999").unwrap());
        assert_eq!(safe_floor(&x).unwrap(), BigInt::from(1));
        let b = golden();
        let sq = b.as_scalar().pow(2);
        assert_eq!(safe_floor(&sq).unwrap(), BigInt::from(2));
        let two = RealScalar::from_int(2);
        assert_eq!(safe_floor(&two).unwrap(), BigInt::from(2));
        // β³ = β² + β = 2β + 1 ∈ (4.23, 4.24) → 4.
        let cube = b.as_scalar().pow(3);
        assert_eq!(safe_floor(&cube).unwrap(), BigInt::from(4));
    }

    #[test]
    fn compare_exact_cases() {
        let third = RealScalar::from_rational(rat_of(1, 3));
        let approx = RealScalar::from_rational(
            parse_rational("0.3333333333333333333333333333333333333333").unwrap(),
        );
        assert_eq!(compare_exact(&third, &approx).unwrap(), Ordering::Greater);
        let b = golden();
        // β − 1 = 1/β, certified through the defining identity.
        let lhs = b.as_scalar().sub(&RealScalar::one());
        let rhs = b.inv_scalar();
        assert_eq!(compare_exact(&lhs, &rhs).unwrap(), Ordering::Equal);
        assert_eq!(
            compare_exact(&RealScalar::zero(), &RealScalar::zero()).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn random_rational_floors_agree() {
        // Pseudo-random rationals via a fixed LCG; safe_floor must agree
        // with the exact rational floor.
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..1000 {
            let n = (next() % 2_000_000) as i64 - 1_000_000;
            let d = (next() % 999 + 1) as i64;
            let r = rat_of(n, d);
            let x = RealScalar::from_rational(r.clone());
            assert_eq!(safe_floor(&x).unwrap(), rat_floor(&r));
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let b = golden();
        let (mut lo, mut hi) = b.enclosure(START_BITS);
        for bits in [256u32, 512, 1024] {
            let (l2, h2) = b.enclosure(bits);
            assert!(l2 >= lo && h2 <= hi, "refinement widened the enclosure");
            lo = l2;
            hi = h2;
        }
    }

    #[test]
    fn comparisons_are_consistent_on_rationals() {
        let vals: Vec<Rat> = (-6..=6).map(|n| rat_of(n, 3)).collect();
        for a in &vals {
            for b in &vals {
                let sa = RealScalar::from_rational(a.clone());
                let sb = RealScalar::from_rational(b.clone());
                let ab = compare_exact(&sa, &sb).unwrap();
                let ba = compare_exact(&sb, &sa).unwrap();
                assert_eq!(ab, ba.reverse());
                for c in &vals {
                    let sc = RealScalar::from_rational(c.clone());
                    if ab != Ordering::Greater
                        && compare_exact(&sb, &sc).unwrap() != Ordering::Greater
                    {
                        assert_ne!(compare_exact(&sa, &sc).unwrap(), Ordering::Greater);
                    }
                }
            }
        }
    }

    #[test]
    fn sturm_counts_roots() {
        // z² - 2: one root in (1, 2], none in (2, 3].
        let p = IntPoly::new(vec![BigInt::from(-2), BigInt::zero(), BigInt::one()]);
        assert_eq!(p.count_roots(&rat_i64(1), &rat_i64(2)), 1);
        assert_eq!(p.count_roots(&rat_i64(2), &rat_i64(3)), 0);
        assert_eq!(p.count_roots(&rat_i64(-2), &rat_i64(2)), 2);
    }

    #[test]
    fn values_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<BetaValue>();
        assert_send_sync::<RealScalar>();
    }

    #[test]
    fn decimal_rendering() {
        let x = RealScalar::from_rational(rat_of(1, 8));
        assert_eq!(x.decimal_string(4), "0.1250");
        let b = golden();
        let s = b.as_scalar().decimal_string(10);
        assert_eq!(s, "1.6180339887");
    }
}
