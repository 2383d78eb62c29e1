//! Explicit Cantor-type subsets built from run schedules: digit templates
//! with padded markers, level-by-level Bernoulli masses, local-dimension
//! diagnostics, a box-counting estimator, and certified membership
//! checks against speed functions.
//!
//! A schedule fixes positions n_k < m_k < n_{k+1} with non-decreasing
//! gaps, forced 1s at n_k, m_k and t_k evenly spaced repeats before
//! n_{k+1}. Every forced 1 is substituted by the block 0^N 1 0^N, and
//! the remaining free positions range over admissible words of the
//! truncation base β_N. Mass splits uniformly across the fillers of each
//! free block and is carried unchanged through forced digits.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::error::BetaError;
use crate::exponents::{rat_pow, PsiValue, SpeedFn};
use crate::precision::{rat_floor, rat_i64, rat_to_f64, BetaValue, Rat};
use crate::symbolic::{
    eps_star_prefix, solve_beta_n, word_value, DigitWord,
};
use crate::Result;

/// Default cap on materialised template words per level.
pub const WORD_CAP: u64 = 1 << 18;

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

/// The run schedule of a Cantor construction, with the padded-layout
/// bookkeeping derived from it.
#[derive(Debug, Clone)]
pub struct CantorSchedule {
    pub v: Rat,
    pub v_hat: Rat,
    pub delta: Rat,
    /// Padding N: each forced 1 becomes 0^N 1 0^N, and fillers come from
    /// the truncation base β_N.
    pub pad: u64,
    pub levels: usize,
    /// Scheduled positions (pre-padding coordinates).
    pub n: Vec<u64>,
    pub m: Vec<u64>,
    /// Repeat counts: t_k is the largest t with m_k + t(m_k−n_k) < n_{k+1}.
    pub t: Vec<u64>,
    /// Padded coordinates: l_k/h_k are the first/last digits of the k-th
    /// level's opening/closing marker blocks; p_k the free length between
    /// repeats; q_k the end of the last repeat marker.
    pub l: Vec<u64>,
    pub h: Vec<u64>,
    pub p: Vec<u64>,
    pub q: Vec<u64>,
    /// Virtual n_{K+1}, continuing the base rule past the last level.
    pub next_start: u64,
    /// Positions adjusted away from the base floor formulas.
    pub repairs: usize,
}

/// Build a schedule for targets (v, v̂) with slack δ, padding N and K
/// levels.
///
/// Base positions follow ⌊((v+δ)/(v̂+δ))^k⌋ (or k^k when v̂+δ = 0) with
/// m_k = ⌊(1+v+δ)n_k⌋; the adjustment scales nothing but greedily
/// advances any n_{k+1} ≤ m_k and widens degenerate gaps, preserving gap
/// monotonicity. Repairs are counted.
pub fn build_schedule(
    v: &Rat,
    v_hat: &Rat,
    delta: &Rat,
    pad: u64,
    levels: usize,
) -> Result<CantorSchedule> {
    if v.is_negative() || v_hat.is_negative() || delta.is_negative() {
        return Err(BetaError::InfeasibleTargets("negative target".into()));
    }
    if v_hat < &Rat::one() {
        let threshold = v_hat / (Rat::one() - v_hat);
        if v < &threshold {
            return Err(BetaError::InfeasibleTargets(format!(
                "v = {v} < v̂/(1−v̂) = {threshold}"
            )));
        }
    } else {
        return Err(BetaError::InfeasibleTargets("v̂ must be < 1".into()));
    }
    if (v_hat + delta) >= Rat::one() {
        return Err(BetaError::InfeasibleTargets("v̂ + δ must be < 1".into()));
    }
    if levels < 2 {
        return Err(BetaError::DegenerateSchedule("need at least 2 levels".into()));
    }
    if pad == 0 {
        return Err(BetaError::DegenerateSchedule("padding must be ≥ 1".into()));
    }
    let vv = v + delta;
    let vh = v_hat + delta;
    let tower = vh.is_zero();
    if tower && levels + 1 > 15 {
        return Err(BetaError::DegenerateSchedule(
            "tower positions overflow past 14 levels".into(),
        ));
    }
    let base = |k: usize| -> Result<u64> {
        if tower {
            Ok(crate::exponents::tower_values()[k - 1])
        } else {
            let q = &vv / &vh;
            if q <= Rat::one() {
                return Err(BetaError::DegenerateSchedule(
                    "position ratio (v+δ)/(v̂+δ) must exceed 1".into(),
                ));
            }
            rat_floor(&rat_pow(&q, k as u32))
                .to_u64()
                .ok_or_else(|| BetaError::DegenerateSchedule("positions overflow u64".into()))
        }
    };
    let one_plus = Rat::one() + &vv;
    let close = |n: u64| -> u64 {
        rat_floor(&(&one_plus * rat_i64(n as i64)))
            .to_u64()
            .unwrap_or(u64::MAX)
    };
    let mut n = Vec::with_capacity(levels);
    let mut m = Vec::with_capacity(levels);
    let mut repairs = 0usize;
    for k in 1..=levels {
        let mut nk = base(k)?.max(1);
        if let Some(&prev_m) = m.last() {
            if nk <= prev_m {
                nk = prev_m + 1;
                repairs += 1;
            }
        }
        let mut mk = close(nk);
        if mk <= nk {
            mk = nk + 1;
            repairs += 1;
        }
        if k >= 2 {
            let prev_gap = m[k - 2] - n[k - 2];
            if mk - nk < prev_gap {
                mk = nk + prev_gap;
                repairs += 1;
            }
        }
        n.push(nk);
        m.push(mk);
    }
    let mut next_start = base(levels + 1)?.max(1);
    if next_start <= m[levels - 1] {
        next_start = m[levels - 1] + 1;
        repairs += 1;
    }
    let mut t = Vec::with_capacity(levels);
    for k in 0..levels {
        let next = if k + 1 < levels { n[k + 1] } else { next_start };
        let gap = m[k] - n[k];
        t.push((next - m[k] - 1) / gap);
    }
    // Padded bookkeeping.
    let big_n = pad;
    let mut l = Vec::with_capacity(levels);
    let mut h = Vec::with_capacity(levels);
    let mut p = Vec::with_capacity(levels);
    let mut q = Vec::with_capacity(levels);
    let mut t_before: u64 = 0;
    for k in 0..levels {
        let k1 = (k + 1) as u64;
        l.push(n[k] + 4 * (k1 - 1) * big_n + 2 * big_n * t_before);
        h.push(m[k] + 4 * k1 * big_n + 2 * big_n * t_before);
        p.push(m[k] - n[k] - 1);
        q.push(h[k] + t[k] * (m[k] - n[k]) + 2 * big_n * t[k]);
        t_before += t[k];
    }
    Ok(CantorSchedule {
        v: v.clone(),
        v_hat: v_hat.clone(),
        delta: delta.clone(),
        pad,
        levels,
        n,
        m,
        t,
        l,
        h,
        p,
        q,
        next_start,
        repairs,
    })
}

impl CantorSchedule {
    /// Residuals of the target ratios at the last level:
    /// |(m_K−n_K)/n_K − (v+δ)| and |(m_K−n_K)/n_{K+1} − (v̂+δ)|.
    pub fn ratio_residuals(&self) -> (Rat, Rat) {
        let k = self.levels - 1;
        let gap = rat_i64((self.m[k] - self.n[k]) as i64);
        let r1 = &gap / rat_i64(self.n[k] as i64) - (&self.v + &self.delta);
        let r2 = &gap / rat_i64(self.next_start as i64) - (&self.v_hat + &self.delta);
        (r1.abs(), r2.abs())
    }

    /// Position of the forced 1 inside the k-th opening marker
    /// (0-indexed level), 1-based digit position.
    pub fn hit_position(&self, k: usize) -> u64 {
        self.l[k] + self.pad
    }

    /// Position of the forced 1 inside the k-th closing marker.
    pub fn close_position(&self, k: usize) -> u64 {
        self.h[k] - self.pad
    }

    /// Length of the zero run directly after the k-th hit position.
    pub fn run_after_hit(&self, k: usize) -> u64 {
        self.close_position(k) - self.hit_position(k) - 1
    }

    /// Template depth through the last repeat marker of the last level.
    pub fn template_depth(&self) -> u64 {
        self.q[self.levels - 1]
    }

    /// Virtual l_{K+1}: where the next level's opening marker would
    /// start; the trailing free block ends just before it.
    fn virtual_next_l(&self) -> u64 {
        let t_total: u64 = self.t.iter().sum();
        self.next_start + 4 * (self.levels as u64) * self.pad + 2 * self.pad * t_total
    }

    /// The padded layout through the last level plus the trailing free
    /// block.
    pub(crate) fn segments(&self) -> Vec<Seg> {
        let mut segs = Vec::new();
        segs.push(Seg::Free(self.n[0] - 1));
        for k in 0..self.levels {
            segs.push(Seg::Marker);
            segs.push(Seg::Free0(self.m[k] - self.n[k] - 1));
            segs.push(Seg::Marker);
            for _ in 0..self.t[k] {
                segs.push(Seg::Free(self.p[k]));
                segs.push(Seg::Marker);
            }
            let next_l = if k + 1 < self.levels {
                self.l[k + 1]
            } else {
                self.virtual_next_l()
            };
            segs.push(Seg::Free(next_l - self.q[k] - 1));
        }
        segs.retain(|s| !matches!(s, Seg::Free(0) | Seg::Free0(0)));
        segs
    }
}

/// One layout segment. `Free0` is the forced zero run between the
/// opening and closing markers (fixed digits, not a filler block).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Seg {
    /// Filler block over Σ_{β_N}.
    Free(u64),
    /// Forced zeros.
    Free0(u64),
    /// 0^N 1 0^N.
    Marker,
}

// ---------------------------------------------------------------------------
// Filler space over β_N
// ---------------------------------------------------------------------------

/// Collapsed admissibility automaton of a simple Parry base, with
/// completion counts for uniform filler sampling. For ε* = w^∞ the tie
/// length only matters modulo |w|.
struct FillerSpace {
    eps: Vec<u32>,
    period: usize,
    digit_bound: u32,
    /// counts[r][s] = number of admissible completions of length r from
    /// collapsed state s.
    counts: Vec<Vec<BigUint>>,
}

impl FillerSpace {
    fn new(beta_n: &BetaValue, max_len: u64) -> Result<FillerSpace> {
        let probe = 4 * ((max_len as usize).min(64) + 4);
        let eps = eps_star_prefix(beta_n, probe)?;
        let (_, len) = eps.period.ok_or_else(|| {
            BetaError::DegenerateSchedule(
                "truncation base must have a terminating expansion of 1".into(),
            )
        })?;
        let period_word: Vec<u32> = eps.prefix.0[..len].to_vec();
        let digit_bound = beta_n.digit_bound();
        let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(max_len as usize + 1);
        counts.push(vec![BigUint::one(); len]);
        for r in 1..=max_len as usize {
            let mut row = vec![BigUint::zero(); len];
            #[allow(clippy::needless_range_loop)]
            for s in 0..len {
                let mut acc = BigUint::zero();
                for d in 0..=period_word[s].min(digit_bound) {
                    let ns = if d == period_word[s] { (s + 1) % len } else { 0 };
                    acc += &counts[r - 1][ns];
                }
                row[s] = acc;
            }
            counts.push(row);
        }
        Ok(FillerSpace {
            eps: period_word,
            period: len,
            digit_bound,
            counts,
        })
    }

    fn step(&self, s: usize, d: u32) -> Option<usize> {
        let e = self.eps[s];
        if d > e || d > self.digit_bound {
            return None;
        }
        Some(if d == e { (s + 1) % self.period } else { 0 })
    }

    fn count(&self, len: u64) -> &BigUint {
        &self.counts[len as usize][0]
    }

    /// The filler word of the given length at `index` in lexicographic
    /// order.
    fn unrank(&self, len: u64, index: &BigUint) -> Vec<u32> {
        let mut out = Vec::with_capacity(len as usize);
        let mut s = 0usize;
        let mut idx = index.clone();
        for r in (0..len as usize).rev() {
            let mut placed = false;
            for d in 0..=self.eps[s].min(self.digit_bound) {
                let ns = self.step(s, d).expect("digit within bound");
                let c = &self.counts[r][ns];
                if &idx < c {
                    out.push(d);
                    s = ns;
                    placed = true;
                    break;
                }
                idx -= c;
            }
            assert!(placed, "unrank index out of range");
        }
        out
    }

    /// Check a (possibly partial) filler is admissible for β_N, returning
    /// the end state.
    fn run(&self, w: &[u32]) -> Option<usize> {
        let mut s = 0usize;
        for &d in w {
            s = self.step(s, d)?;
        }
        Some(s)
    }
}

// ---------------------------------------------------------------------------
// Template words, masses, sampling
// ---------------------------------------------------------------------------

/// A template word with its exact Bernoulli mass.
#[derive(Debug, Clone)]
pub struct MeasuredCylinder {
    pub word: DigitWord,
    pub mass: Rat,
    pub level: u64,
}

fn push_marker(digits: &mut Vec<u32>, pad: u64, depth: u64) {
    for i in 0..(2 * pad + 1) {
        if digits.len() as u64 >= depth {
            return;
        }
        digits.push(if i == pad { 1 } else { 0 });
    }
}

/// All template words of the given depth, each with its exact mass.
/// Counts are capped before materialisation.
pub fn generate_level_words(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    depth: u64,
    cap: u64,
) -> Result<Vec<MeasuredCylinder>> {
    if depth > schedule.virtual_next_l() - 1 {
        return Err(BetaError::CapExceeded(format!(
            "depth {depth} beyond the generated template (max {})",
            schedule.virtual_next_l() - 1
        )));
    }
    let beta_n = solve_beta_n(beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .min(depth);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    // Cap check on the full product first.
    let mut total = BigUint::one();
    let mut consumed = 0u64;
    for seg in &segs {
        if consumed >= depth {
            break;
        }
        let left = depth - consumed;
        match seg {
            Seg::Free(l) => {
                let take = (*l).min(left);
                total *= fs.count(take);
                consumed += take;
            }
            Seg::Free0(l) => consumed += (*l).min(left),
            Seg::Marker => consumed += (2 * schedule.pad + 1).min(left),
        }
        if total > BigUint::from(cap) {
            return Err(BetaError::CapExceeded(format!(
                "level holds more than {cap} words"
            )));
        }
    }
    let mut out = Vec::new();
    let mut word: Vec<u32> = Vec::with_capacity(depth as usize);
    dfs_template(
        schedule, &fs, &segs, 0, depth, &mut word, &Rat::one(), &mut out,
    );
    Ok(out)
}

fn dfs_template(
    schedule: &CantorSchedule,
    fs: &FillerSpace,
    segs: &[Seg],
    seg_idx: usize,
    depth: u64,
    word: &mut Vec<u32>,
    mass: &Rat,
    out: &mut Vec<MeasuredCylinder>,
) {
    if word.len() as u64 >= depth || seg_idx >= segs.len() {
        out.push(MeasuredCylinder {
            word: DigitWord(word.clone()),
            mass: mass.clone(),
            level: word.len() as u64,
        });
        return;
    }
    let left = depth - word.len() as u64;
    match segs[seg_idx] {
        Seg::Free0(l) => {
            let take = l.min(left) as usize;
            word.extend(std::iter::repeat_n(0, take));
            dfs_template(schedule, fs, segs, seg_idx + 1, depth, word, mass, out);
            word.truncate(word.len() - take);
        }
        Seg::Marker => {
            let before = word.len();
            push_marker(word, schedule.pad, depth);
            dfs_template(schedule, fs, segs, seg_idx + 1, depth, word, mass, out);
            word.truncate(before);
        }
        Seg::Free(l) => {
            let take = l.min(left);
            let total = fs.count(take);
            let split = mass / Rat::from_integer(BigInt::from(total.clone()));
            // Lexicographic filler enumeration.
            let mut idx = BigUint::zero();
            while &idx < total {
                let filler = fs.unrank(take, &idx);
                let before = word.len();
                word.extend_from_slice(&filler);
                dfs_template(schedule, fs, segs, seg_idx + 1, depth, word, &split, out);
                word.truncate(before);
                idx += BigUint::one();
            }
        }
    }
}

/// Exact mass of a template word per the block-uniform distribution:
/// each (possibly partial) filler block of consumed length l contributes
/// a factor 1/#Σ^l_{β_N}; forced digits carry mass unchanged.
pub fn bernoulli_measure(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    w: &DigitWord,
) -> Result<Rat> {
    let beta_n = solve_beta_n(beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .min(w.len() as u64);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    let mut denom = BigUint::one();
    let mut pos = 0usize;
    let pad = schedule.pad as usize;
    for seg in &segs {
        if pos >= w.len() {
            break;
        }
        match seg {
            Seg::Free0(l) => {
                let take = (*l as usize).min(w.len() - pos);
                if w.0[pos..pos + take].iter().any(|&d| d != 0) {
                    return Err(BetaError::NotTemplateWord(format!(
                        "forced zero run violated near digit {pos}"
                    )));
                }
                pos += take;
            }
            Seg::Marker => {
                let take = (2 * pad + 1).min(w.len() - pos);
                for (i, &d) in w.0[pos..pos + take].iter().enumerate() {
                    let want = if i == pad { 1 } else { 0 };
                    if d != want {
                        return Err(BetaError::NotTemplateWord(format!(
                            "marker violated at digit {}",
                            pos + i
                        )));
                    }
                }
                pos += take;
            }
            Seg::Free(l) => {
                let take = (*l as usize).min(w.len() - pos);
                let filler = &w.0[pos..pos + take];
                if fs.run(filler).is_none() {
                    return Err(BetaError::NotTemplateWord(format!(
                        "filler not admissible for the truncation base near digit {pos}"
                    )));
                }
                denom *= &fs.counts[take][0];
                pos += take;
            }
        }
    }
    if pos < w.len() {
        return Err(BetaError::NotTemplateWord(
            "word extends beyond the generated template".into(),
        ));
    }
    Ok(Rat::new(BigInt::one(), BigInt::from(denom)))
}

/// Uniformly sample one template word of the given depth.
pub fn sample_word(
    schedule: &CantorSchedule,
    fs_beta: &BetaValue,
    depth: u64,
    rng: &mut StdRng,
) -> Result<Vec<u32>> {
    let beta_n = solve_beta_n(fs_beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .min(depth);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    sample_word_with(&fs, schedule, &segs, depth, rng)
}

fn sample_word_with(
    fs: &FillerSpace,
    schedule: &CantorSchedule,
    segs: &[Seg],
    depth: u64,
    rng: &mut StdRng,
) -> Result<Vec<u32>> {
    let mut word: Vec<u32> = Vec::with_capacity(depth as usize);
    for seg in segs {
        if word.len() as u64 >= depth {
            break;
        }
        let left = depth - word.len() as u64;
        match seg {
            Seg::Free0(l) => {
                word.extend(std::iter::repeat_n(0, (*l).min(left) as usize))
            }
            Seg::Marker => push_marker(&mut word, schedule.pad, depth),
            Seg::Free(l) => {
                let take = (*l).min(left);
                let total = fs.count(take);
                let idx = rng.gen_biguint_below(total);
                word.extend_from_slice(&fs.unrank(take, &idx));
            }
        }
    }
    Ok(word)
}

// ---------------------------------------------------------------------------
// Local dimension and box counting
// ---------------------------------------------------------------------------

/// log of a big count, stable for large values.
fn log_big(b: &BigUint) -> f64 {
    let bits = b.bits();
    if bits <= 52 {
        return b.to_f64().unwrap_or(1.0).ln();
    }
    let top = (b >> (bits - 52)).to_f64().unwrap_or(1.0);
    top.ln() + ((bits - 52) as f64) * std::f64::consts::LN_2
}

/// The series (k, log μ(I_{h_k}) / log |I_{h_k}|) at the closing-marker
/// milestones, with masses exact and |I_{h_k}| = β^{−h_k} certified via
/// the automaton state of a sample word (full cylinder at each h_k).
pub fn local_dimension_series(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    if k_max == 0 || k_max > schedule.levels {
        return Err(BetaError::DomainError(format!(
            "k_max must be in 1..={}",
            schedule.levels
        )));
    }
    let beta_n = solve_beta_n(beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    certify_milestones_full(schedule, beta, k_max)?;
    let (lo, hi) = beta.enclosure(80);
    let ln_beta = rat_to_f64(&((lo + hi) / rat_i64(2))).ln();
    let mut out = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let h = schedule.h[k];
        // Free digits strictly before h_k.
        let mut pos = 0u64;
        let mut log_mu = 0f64;
        for seg in &segs {
            if pos >= h {
                break;
            }
            match seg {
                Seg::Free0(l) => pos += l,
                Seg::Marker => pos += 2 * schedule.pad + 1,
                Seg::Free(l) => {
                    let take = (*l).min(h.saturating_sub(pos));
                    log_mu -= log_big(fs.count(take));
                    pos += l;
                }
            }
        }
        // ratio = log_β μ / log_β |I| with |I_{h_k}| = β^{−h_k}.
        let ratio = -log_mu / (h as f64 * ln_beta);
        out.push((k + 1, ratio));
    }
    Ok(out)
}

/// Certify that the cylinders at levels h_1..h_k are full: the sampled
/// zero-filler template word leaves the β-admissibility automaton in the
/// unconstrained state at each h_k (its ε*-tie is broken by the marker's
/// trailing zeros), so |I_{h_k}| = β^{−h_k} exactly.
fn certify_milestones_full(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    k_max: usize,
) -> Result<()> {
    let depth = schedule.h[k_max - 1];
    let mut word: Vec<u32> = Vec::with_capacity(depth as usize);
    for seg in schedule.segments() {
        if word.len() as u64 >= depth {
            break;
        }
        let left = depth - word.len() as u64;
        match seg {
            Seg::Free0(l) | Seg::Free(l) => {
                word.extend(std::iter::repeat_n(0, l.min(left) as usize))
            }
            Seg::Marker => push_marker(&mut word, schedule.pad, depth),
        }
    }
    let aut = crate::symbolic::Admissibility::new(beta, depth as usize)?;
    let mut st = 0usize;
    for (i, &d) in word.iter().enumerate() {
        st = aut.step(st, d).ok_or_else(|| {
            BetaError::NotAdmissible(format!("template word rejected at digit {i}"))
        })?;
        let pos = i as u64 + 1;
        if schedule.h[..k_max].contains(&pos) && st != 0 {
            return Err(BetaError::NotAdmissible(format!(
                "milestone cylinder at level {pos} is not full (state {st})"
            )));
        }
    }
    Ok(())
}

/// One cover point for the box-count regression.
#[derive(Debug, Clone, Copy)]
pub struct CoverPoint {
    /// log(1/ε) for the milestone scale ε.
    pub log_inv_scale: f64,
    /// log N(ε), the number of template cylinders at that scale.
    pub log_count: f64,
}

/// Cover points at the closing-marker milestones h_k for k in `ks`
/// (1-based), using exact cylinder counts.
pub fn milestone_cover_points(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    ks: &[usize],
) -> Result<Vec<CoverPoint>> {
    let beta_n = solve_beta_n(beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    let (lo, hi) = beta.enclosure(80);
    let ln_beta = rat_to_f64(&((lo + hi) / rat_i64(2))).ln();
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 || k > schedule.levels {
            return Err(BetaError::DomainError(format!(
                "milestone {k} outside 1..={}",
                schedule.levels
            )));
        }
        let h = schedule.h[k - 1];
        let mut pos = 0u64;
        let mut log_count = 0f64;
        for seg in &segs {
            if pos >= h {
                break;
            }
            match seg {
                Seg::Free0(l) => pos += l,
                Seg::Marker => pos += 2 * schedule.pad + 1,
                Seg::Free(l) => {
                    let take = (*l).min(h.saturating_sub(pos));
                    log_count += log_big(fs.count(take));
                    pos += l;
                }
            }
        }
        out.push(CoverPoint {
            log_inv_scale: h as f64 * ln_beta,
            log_count,
        });
    }
    Ok(out)
}

/// Least-squares slope of log N(ε) against log(1/ε), plus the largest
/// absolute residual. Needs at least 4 scales.
pub fn boxcount_estimate(points: &[CoverPoint]) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(BetaError::InsufficientScales(format!(
            "{} scales, need ≥ 4",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.log_inv_scale).sum::<f64>() / n;
    let my = points.iter().map(|p| p.log_count).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in points {
        let dx = p.log_inv_scale - mx;
        sxx += dx * dx;
        sxy += dx * (p.log_count - my);
    }
    if sxx == 0.0 {
        return Err(BetaError::InsufficientScales("degenerate scales".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = points
        .iter()
        .map(|p| (p.log_count - (slope * p.log_inv_scale + intercept)).abs())
        .fold(0.0f64, f64::max);
    Ok((slope, resid))
}

// ---------------------------------------------------------------------------
// Membership verification
// ---------------------------------------------------------------------------

/// Report of the certified membership checks on sampled deep endpoints.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub samples: usize,
    /// Milestones (1-based) whose scheduled run guarantees the hit
    /// inequality against ψ₁ at the realised position.
    pub checked_milestones: Vec<usize>,
    /// Guaranteed uniform window [N_lo, N_hi] against ψ₂, when nonempty.
    pub uniform_window: Option<(u64, u64)>,
    /// Certified-hit checks performed (digit-run certificates).
    pub hit_checks: usize,
    /// Certified window checks performed.
    pub window_checks: usize,
    /// Exact scalar comparisons performed at the deepest checked
    /// milestone of each sample.
    pub exact_checks: usize,
    pub violations: Vec<String>,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rate_of(psi: &SpeedFn, n: u64) -> Result<Rat> {
    match psi.value_at(n) {
        PsiValue::BetaPow(e) => Ok(e / rat_i64(n as i64)),
        PsiValue::Const(_) => Err(BetaError::InvalidParams(
            "membership checks need rate-form speed functions".into(),
        )),
    }
}

/// Sample template endpoints and certify the scheduled hits against ψ₁
/// and the uniform windows against ψ₂.
///
/// A milestone k is checkable when the scheduled zero run after its hit
/// position ñ_k already implies T^{ñ_k}x < ψ₁(ñ_k); a window N is inside
/// the guaranteed range when the preceding hit's run implies
/// T^{ñ}x < ψ₂(N). Checks then certify those digit runs on each sampled
/// word (and one exact scalar comparison per sample at the deepest
/// checkable milestone). Failures are reported as violations, not
/// errors.
pub fn verify_membership(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    psi1: &SpeedFn,
    psi2: &SpeedFn,
    samples: usize,
    seed: u64,
) -> Result<MembershipReport> {
    let depth = schedule.template_depth();
    let beta_n = solve_beta_n(beta, schedule.pad as usize)?;
    let segs = schedule.segments();
    let max_free = segs
        .iter()
        .filter_map(|s| match s {
            Seg::Free(l) => Some(*l),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .min(depth);
    let fs = FillerSpace::new(&beta_n, max_free)?;
    // Checkable milestones: scheduled run length covers the ψ₁ exponent.
    let mut checked = Vec::new();
    for k in 0..schedule.levels {
        let pos = schedule.hit_position(k);
        let run = schedule.run_after_hit(k);
        let need = rate_of(psi1, pos)? * rat_i64(pos as i64);
        if rat_i64(run as i64) >= need {
            checked.push(k + 1);
        }
    }
    // Guaranteed uniform range: find the smallest k₀ so every later
    // window is covered by its preceding hit's run.
    let deepest_close = schedule.close_position(schedule.levels - 1);
    let mut k0: Option<usize> = None;
    for start in 0..schedule.levels {
        let mut ok = true;
        for k in start..schedule.levels {
            let run = schedule.run_after_hit(k);
            let window_end = if k + 1 < schedule.levels {
                schedule.hit_position(k + 1) - 1
            } else {
                deepest_close
            };
            let worst = rate_of(psi2, window_end)? * rat_i64(window_end as i64);
            if rat_i64(run as i64) < worst {
                ok = false;
                break;
            }
        }
        if ok {
            k0 = Some(start);
            break;
        }
    }
    let uniform_window = k0.map(|k| (schedule.hit_position(k), deepest_close));

    let mut rng = StdRng::seed_from_u64(seed);
    let mut violations = Vec::new();
    // Incompatible speed functions are themselves failures: the schedule
    // then guarantees nothing to certify.
    if checked.is_empty() {
        violations.push(
            "no milestone's scheduled run covers the first speed function at its realised position"
                .into(),
        );
    }
    if k0.is_none() {
        violations.push(
            "no tail window is covered by the scheduled runs against the second speed function"
                .into(),
        );
    }
    let mut hit_checks = 0usize;
    let mut window_checks = 0usize;
    let mut exact_checks = 0usize;
    for s in 0..samples {
        let word = sample_word_with(&fs, schedule, &segs, depth, &mut rng)?;
        // Actual zero run after each hit position.
        let run_after = |pos: u64| -> u64 {
            let mut r = 0u64;
            let mut i = pos as usize; // 0-based index of the digit after pos
            while i < word.len() && word[i] == 0 {
                r += 1;
                i += 1;
            }
            r
        };
        for &k in &checked {
            let pos = schedule.hit_position(k - 1);
            let need = rate_of(psi1, pos)? * rat_i64(pos as i64);
            let actual = run_after(pos);
            hit_checks += 1;
            if rat_i64(actual as i64) < need {
                violations.push(format!(
                    "sample {s}: hit at {pos} has run {actual} < required {need}"
                ));
            }
        }
        if let Some(start) = k0 {
            for k in start..schedule.levels {
                let pos = schedule.hit_position(k);
                let window_end = if k + 1 < schedule.levels {
                    schedule.hit_position(k + 1) - 1
                } else {
                    deepest_close
                };
                let worst = rate_of(psi2, window_end)? * rat_i64(window_end as i64);
                let actual = run_after(pos);
                window_checks += (window_end - pos + 1) as usize;
                if rat_i64(actual as i64) < worst {
                    violations.push(format!(
                        "sample {s}: windows ({pos}..={window_end}) uncovered: run {actual} < {worst}"
                    ));
                }
            }
        }
        // One exact scalar comparison at the deepest checkable milestone.
        if let Some(&k) = checked.last() {
            let pos = schedule.hit_position(k - 1);
            let tail = &word[pos as usize..];
            let t = word_value(tail, beta);
            let cmp = crate::exponents::cmp_orbit_vs_psi(
                &t,
                &psi1.value_at(pos),
                beta,
            )?;
            exact_checks += 1;
            if cmp != Ordering::Less {
                violations.push(format!(
                    "sample {s}: exact comparison failed at milestone position {pos}"
                ));
            }
        }
    }
    Ok(MembershipReport {
        samples,
        checked_milestones: checked,
        uniform_window,
        hit_checks,
        window_checks,
        exact_checks,
        violations,
    })
}

/// Export `level,word,left,length,mass` CSV for a generated level.
pub fn cover_csv(
    schedule: &CantorSchedule,
    beta: &BetaValue,
    depth: u64,
    cap: u64,
    digits: u32,
) -> Result<String> {
    let words = generate_level_words(schedule, beta, depth, cap)?;
    let mut out = String::from("level,word,left,length,mass\n");
    for mc in &words {
        let cyl = crate::cylinders::cylinder_interval(&mc.word, beta)?;
        out.push_str(&format!(
            "{},{},{},{},{}/{}\n",
            mc.level,
            mc.word.text(),
            cyl.left.decimal_string(digits),
            cyl.length().decimal_string(digits),
            mc.mass.numer(),
            mc.mass.denom(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{beta_from_str, rat_of as pr_rat_of};
    use crate::symbolic::is_admissible;
    use std::collections::BTreeMap;

    fn two() -> BetaValue {
        beta_from_str("dec:2").unwrap()
    }

    fn reference_schedule(pad: u64, levels: usize) -> CantorSchedule {
        build_schedule(
            &rat_i64(2),
            &pr_rat_of(1, 2),
            &rat_i64(0),
            pad,
            levels,
        )
        .unwrap()
    }

    #[test]
    fn schedule_matches_floor_formulas() {
        let s = reference_schedule(8, 4);
        assert_eq!(s.n, vec![4, 16, 64, 256]);
        assert_eq!(s.m, vec![12, 48, 192, 768]);
        assert_eq!(s.t, vec![0, 0, 0, 0]);
        assert_eq!(s.repairs, 0);
        assert_eq!(s.next_start, 1024);
        // Padded bookkeeping.
        assert_eq!(s.l, vec![4, 48, 128, 352]);
        assert_eq!(s.h, vec![44, 112, 288, 896]);
        let (r1, r2) = s.ratio_residuals();
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn schedule_tower_branch() {
        let s = build_schedule(&rat_i64(1), &rat_i64(0), &rat_i64(0), 2, 3).unwrap();
        assert_eq!(s.n, vec![1, 4, 27]);
        assert_eq!(s.m, vec![2, 8, 54]);
        // t_3 = ⌊(256 − 54 − 1)/27⌋ with next_start = 4^4 = 256.
        assert_eq!(s.t, vec![1, 4, 7]);
    }

    #[test]
    fn schedule_infeasible() {
        assert!(matches!(
            build_schedule(&pr_rat_of(1, 3), &pr_rat_of(1, 2), &rat_i64(0), 4, 3),
            Err(BetaError::InfeasibleTargets(_))
        ));
    }

    #[test]
    fn schedule_invariants() {
        for (v, vh) in [(rat_i64(2), pr_rat_of(1, 2)), (rat_i64(3), pr_rat_of(1, 3))] {
            let s = build_schedule(&v, &vh, &pr_rat_of(1, 100), 4, 5).unwrap();
            for k in 0..s.levels {
                assert!(s.n[k] < s.m[k]);
                let next = if k + 1 < s.levels { s.n[k + 1] } else { s.next_start };
                assert!(s.m[k] < next);
                assert!(s.m[k] + s.t[k] * (s.m[k] - s.n[k]) < next);
                if k > 0 {
                    assert!(s.m[k] - s.n[k] >= s.m[k - 1] - s.n[k - 1]);
                }
            }
            // Final-level ratios land within 2% of the shifted targets.
            let (r1, r2) = s.ratio_residuals();
            let tol1 = (&v + pr_rat_of(1, 100)) * pr_rat_of(1, 50);
            let tol2 = (&vh + pr_rat_of(1, 100)) * pr_rat_of(1, 50);
            assert!(r1 <= tol1, "v residual {r1} too large");
            assert!(r2 <= tol2, "v̂ residual {r2} too large");
        }
    }

    #[test]
    fn template_length_sandwich_under_algebraic_base() {
        // Every template cylinder at level n satisfies
        // β^{-(n+N)} ≤ |I_n| ≤ β^{-n}.
        let g = crate::symbolic::tests::golden();
        let s = build_schedule(&rat_i64(2), &pr_rat_of(1, 2), &rat_i64(0), 3, 2).unwrap();
        for depth in [2u64, 3, s.l[0] + 1, s.h[0], s.h[0] + 2] {
            let words = generate_level_words(&s, &g, depth, 1 << 12).unwrap();
            let lower = g.pow_scalar(-((depth + s.pad) as i64));
            let upper = g.pow_scalar(-(depth as i64));
            for mc in words.iter().take(8) {
                let c = crate::cylinders::cylinder_interval(&mc.word, &g).unwrap();
                let len = c.length();
                assert_ne!(len.cmp_exact(&lower).unwrap(), Ordering::Less);
                assert_ne!(len.cmp_exact(&upper).unwrap(), Ordering::Greater);
            }
        }
    }

    #[test]
    fn local_dimension_tower_branch() {
        // v̂ = 0 schedules use tower positions; the series stays finite
        // and positive.
        let s = build_schedule(&rat_i64(1), &rat_i64(0), &rat_i64(0), 4, 3).unwrap();
        let series = local_dimension_series(&s, &two(), 3).unwrap();
        for (_, r) in &series {
            // The first milestone may carry no free digits yet (ratio 0).
            assert!(r.is_finite() && *r >= 0.0);
        }
        assert!(series.last().unwrap().1 > 0.0);
    }

    #[test]
    fn template_words_small() {
        // N = 2, so fillers come from the golden-ratio base (no 11), and
        // every word carries 0 0 1 0 0 at the first marker.
        let s = reference_schedule(2, 2);
        assert_eq!(s.n[0], 4);
        let depth = s.l[0] + 2 * s.pad; // through the first marker
        let words = generate_level_words(&s, &two(), depth, 1 << 12).unwrap();
        assert!(!words.is_empty());
        for mc in &words {
            assert_eq!(&mc.word.0[3..8], &[0, 0, 1, 0, 0]);
            assert!(is_admissible(&mc.word, &two()).unwrap());
        }
        // Fillers of length 3 over the golden base: 5 of them.
        assert_eq!(words.len(), 5);
        for mc in &words {
            assert_eq!(mc.mass, pr_rat_of(1, 5));
        }
    }

    #[test]
    fn mass_conservation_every_level() {
        let s = reference_schedule(2, 2);
        let b = two();
        for depth in [1u64, 2, 3, 5, 8, 11, 14, 20, 26, 30] {
            let words = generate_level_words(&s, &b, depth, 1 << 14).unwrap();
            // Distinct prefixes with their masses must sum to one.
            let mut seen = BTreeMap::new();
            for mc in words {
                seen.insert(mc.word.0.clone(), mc.mass);
            }
            let total: Rat = seen.values().cloned().sum();
            assert_eq!(total, Rat::one(), "level {depth} masses sum to {total}");
        }
    }

    #[test]
    fn measure_cases() {
        let s = reference_schedule(2, 2);
        let b = two();
        // Root word has mass 1.
        assert_eq!(
            bernoulli_measure(&s, &b, &DigitWord(Vec::new())).unwrap(),
            Rat::one()
        );
        // Length n < n_1: 1/#Σ^n of the truncation base (golden: 2, 3, 5).
        for (n, cnt) in [(1u64, 2i64), (2, 3), (3, 5)] {
            let words = generate_level_words(&s, &b, n, 1 << 10).unwrap();
            for mc in &words {
                assert_eq!(
                    bernoulli_measure(&s, &b, &mc.word).unwrap(),
                    pr_rat_of(1, cnt)
                );
            }
        }
        // Perturbing a forced digit is rejected.
        let words = generate_level_words(&s, &b, 8, 1 << 10).unwrap();
        let mut w = words[0].word.clone();
        w.0[5] = 0; // the marker's 1
        assert!(matches!(
            bernoulli_measure(&s, &b, &w),
            Err(BetaError::NotTemplateWord(_))
        ));
        let mut w = words[0].word.clone();
        w.0[3] = 1; // a marker zero
        assert!(matches!(
            bernoulli_measure(&s, &b, &w),
            Err(BetaError::NotTemplateWord(_))
        ));
    }

    #[test]
    fn sibling_masses_equal_and_sum() {
        // Complete filler blocks split the parent mass uniformly.
        let s = reference_schedule(2, 2);
        let b = two();
        let parent_depth = s.n[0] - 1; // end of the first free block
        let words = generate_level_words(&s, &b, parent_depth, 1 << 10).unwrap();
        let masses: Vec<Rat> = words.iter().map(|m| m.mass.clone()).collect();
        assert!(masses.windows(2).all(|w| w[0] == w[1]));
        let total: Rat = masses.into_iter().sum();
        assert_eq!(total, Rat::one());
    }

    #[test]
    fn milestones_are_full_cylinders() {
        let s = reference_schedule(2, 2);
        let b = two();
        // Direct is_full on a generated word cut at h_1.
        let words = generate_level_words(&s, &b, s.h[0], 1 << 14).unwrap();
        let w = &words[0].word;
        assert!(crate::cylinders::is_full(w, &b).unwrap());
        // And the golden base too (padding resets the tie state).
        let g = crate::symbolic::tests::golden();
        let sg = build_schedule(&rat_i64(2), &pr_rat_of(1, 2), &rat_i64(0), 3, 2).unwrap();
        let words = generate_level_words(&sg, &g, sg.h[0], 1 << 14).unwrap();
        for mc in words.iter().take(5) {
            assert!(is_admissible(&mc.word, &g).unwrap());
            assert!(crate::cylinders::is_full(&mc.word, &g).unwrap());
        }
    }

    #[test]
    fn local_dimension_trend() {
        // (v, v̂) = (2, 1/2), N = 8, β = 2: the milestone ratios approach
        // (1/9)·log₂ β_N.
        let s = reference_schedule(8, 4);
        let b = two();
        let series = local_dimension_series(&s, &b, 4).unwrap();
        assert_eq!(series.len(), 4);
        let bn = solve_beta_n(&b, 8).unwrap();
        let target = bn.to_f64().log2() / 9.0;
        let last = series.last().unwrap().1;
        assert!(
            (last - target).abs() < 0.05,
            "ratio {last} vs target {target}"
        );
        // Well-defined and finite at k = 1.
        assert!(series[0].1.is_finite() && series[0].1 > 0.0);
    }

    #[test]
    fn boxcount_synthetic_and_schedule() {
        // Middle-thirds control: N(ε_k) = 2^k at ε_k = 3^{-k}.
        let pts: Vec<CoverPoint> = (1..=8)
            .map(|k| CoverPoint {
                log_inv_scale: k as f64 * 3f64.ln(),
                log_count: k as f64 * 2f64.ln(),
            })
            .collect();
        let (slope, resid) = boxcount_estimate(&pts).unwrap();
        assert!((slope - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(resid < 1e-12);

        // Too few scales.
        assert!(matches!(
            boxcount_estimate(&pts[..3]),
            Err(BetaError::InsufficientScales(_))
        ));

        // Full binary tree: slope 1.
        let b = two();
        let pts: Vec<CoverPoint> = (4..=10)
            .map(|k| CoverPoint {
                log_inv_scale: k as f64 * 2f64.ln(),
                log_count: k as f64 * 2f64.ln(),
            })
            .collect();
        let (slope, _) = boxcount_estimate(&pts).unwrap();
        assert!((slope - 1.0).abs() < 0.02);

        // Schedule milestones against the local-dimension target.
        let s = reference_schedule(8, 5);
        let pts = milestone_cover_points(&s, &b, &[2, 3, 4, 5]).unwrap();
        let (slope, _) = boxcount_estimate(&pts).unwrap();
        let bn = solve_beta_n(&b, 8).unwrap();
        let target = bn.to_f64().log2() / 9.0;
        assert!(
            (slope - target).abs() < 0.08,
            "slope {slope} vs target {target}"
        );
    }

    #[test]
    fn membership_reference_config() {
        let s = reference_schedule(8, 4);
        let b = two();
        let psi1 = SpeedFn::uniform_rate(pr_rat_of(19, 10));
        let psi2 = SpeedFn::uniform_rate(pr_rat_of(9, 20));
        let report = verify_membership(&s, &b, &psi1, &psi2, 10, 7).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert!(!report.checked_milestones.is_empty());
        assert!(report.exact_checks == 10);
    }

    #[test]
    fn membership_catches_overclaimed_psi2() {
        // ψ₂ with rate 0.6 exceeds the v̂ = 1/2 target: no guaranteed
        // window survives, and the report says so.
        let s = reference_schedule(8, 4);
        let b = two();
        let psi1 = SpeedFn::uniform_rate(pr_rat_of(19, 10));
        let psi2 = SpeedFn::uniform_rate(pr_rat_of(3, 5));
        let report = verify_membership(&s, &b, &psi1, &psi2, 3, 7).unwrap();
        assert!(report.uniform_window.is_none());
        assert!(!report.passed());
    }

    #[test]
    fn filler_counts_match_general_automaton() {
        // The collapsed periodic automaton must agree with the general
        // failure-function automaton on completion counts, for every
        // truncation base used by the constructions.
        let bases = [
            (two(), vec![2usize, 4, 8]),
            (crate::symbolic::tests::golden(), vec![4usize, 8]),
        ];
        for (beta, pads) in bases {
            for pad in pads {
                let bn = solve_beta_n(&beta, pad).unwrap();
                let fs = FillerSpace::new(&bn, 20).unwrap();
                let general = crate::symbolic::admissible_counts(&bn, 20).unwrap();
                for l in 0..=20u64 {
                    assert_eq!(
                        fs.count(l),
                        &general[l as usize],
                        "count mismatch at length {l}, pad {pad}, β ≈ {}",
                        beta.to_f64()
                    );
                }
            }
        }
    }

    #[test]
    fn unranking_is_the_lexicographic_enumeration() {
        let bn = solve_beta_n(&two(), 8).unwrap();
        let fs = FillerSpace::new(&bn, 9).unwrap();
        for l in [1u64, 5, 9] {
            let words = match crate::symbolic::enumerate_admissible(&bn, l as usize, false)
                .unwrap()
            {
                crate::symbolic::Enumeration::Words(w) => w,
                _ => unreachable!(),
            };
            let total = fs.count(l).clone();
            assert_eq!(BigUint::from(words.len()), total);
            let mut idx = BigUint::zero();
            for w in words {
                assert_eq!(fs.unrank(l, &idx), w.0, "unrank({l}, {idx})");
                idx += BigUint::one();
            }
        }
    }

    #[test]
    fn sampled_words_admissible_and_template() {
        let s = reference_schedule(4, 3);
        let b = two();
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..5 {
            let w = sample_word(&s, &b, s.template_depth(), &mut rng).unwrap();
            let dw = DigitWord(w);
            assert!(is_admissible(&dw, &b).unwrap());
            let mass = bernoulli_measure(&s, &b, &dw).unwrap();
            assert!(mass.is_positive() && mass < Rat::one());
        }
    }
}
