//! Basic intervals I_n(ω): endpoints, lengths, full-cylinder detection,
//! level partitions, and search for the smallest full extension.
//!
//! Intervals are half-open [left, right). The right endpoint is the value
//! of the lexicographic successor word of the same length (1 when there
//! is none), which is exact under the scalar arithmetic and telescopes
//! level partitions to total length one.

use std::cmp::Ordering;

use crate::error::BetaError;
use crate::precision::{BetaValue, RealScalar};
use crate::symbolic::{
    enumerate_admissible_with_cap, greedy_expand, word_value, Admissibility, DigitWord,
    Enumeration, ENUM_MATERIALIZE_CAP,
};
use crate::Result;

/// An n-th order basic interval together with its word.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub word: DigitWord,
    pub left: RealScalar,
    pub right: RealScalar,
    pub order: usize,
}

impl Cylinder {
    pub fn length(&self) -> RealScalar {
        self.right.sub(&self.left)
    }
}

/// States of the admissibility automaton along a word, `states[i]` being
/// the state after i digits.
fn automaton_states(aut: &Admissibility, w: &[u32]) -> Option<Vec<usize>> {
    let mut states = Vec::with_capacity(w.len() + 1);
    let mut st = 0usize;
    states.push(st);
    for &d in w {
        st = aut.step(st, d)?;
        states.push(st);
    }
    Some(states)
}

/// Lexicographic successor of `w` within the admissible words of the same
/// length, or `None` when `w` is the largest one.
fn successor_word(aut: &Admissibility, w: &[u32]) -> Option<Vec<u32>> {
    let states = automaton_states(aut, w)?;
    for i in (0..w.len()).rev() {
        let bound = aut.max_digit(states[i]);
        if w[i] < bound {
            // Admissible digits form a contiguous range, so w[i]+1 is
            // acceptable here, and a zero tail is always admissible.
            let mut next = w[..i].to_vec();
            next.push(w[i] + 1);
            next.resize(w.len(), 0);
            return Some(next);
        }
    }
    None
}

/// The basic interval of an admissible word.
pub fn cylinder_interval(w: &DigitWord, beta: &BetaValue) -> Result<Cylinder> {
    let aut = Admissibility::new(beta, w.len().max(1))?;
    if automaton_states(&aut, &w.0).is_none() {
        return Err(BetaError::NotAdmissible(w.text()));
    }
    let left = word_value(&w.0, beta);
    let right = match successor_word(&aut, &w.0) {
        Some(next) => word_value(&next, beta),
        None => RealScalar::one(),
    };
    Ok(Cylinder {
        word: w.clone(),
        left,
        right,
        order: w.len(),
    })
}

/// Whether |I_n(w)| = β^{−n}, decided by certified equality.
pub fn is_full(w: &DigitWord, beta: &BetaValue) -> Result<bool> {
    let cyl = cylinder_interval(w, beta)?;
    let full_len = beta.pow_scalar(-(w.len() as i64));
    Ok(cyl.length().cmp_exact(&full_len)? == Ordering::Equal)
}

/// All order-n cylinders in increasing order; consecutive intervals abut
/// and the union is [0, 1).
pub fn partition_level(beta: &BetaValue, n: usize) -> Result<Vec<Cylinder>> {
    partition_level_with_cap(beta, n, ENUM_MATERIALIZE_CAP)
}

pub fn partition_level_with_cap(beta: &BetaValue, n: usize, cap: usize) -> Result<Vec<Cylinder>> {
    let words = match enumerate_admissible_with_cap(beta, n, false, cap)? {
        Enumeration::Words(w) => w,
        Enumeration::Count(_) => unreachable!("requested words"),
    };
    // Each right endpoint is the next word's left endpoint; compute the
    // values once.
    let mut values: Vec<RealScalar> = words.iter().map(|w| word_value(&w.0, beta)).collect();
    values.push(RealScalar::one());
    let mut out = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        out.push(Cylinder {
            word: w.clone(),
            left: values[i].clone(),
            right: values[i + 1].clone(),
            order: n,
        });
    }
    Ok(out)
}

/// The order-n basic interval containing x.
pub fn locate_cylinder(x: &RealScalar, beta: &BetaValue, n: usize) -> Result<Cylinder> {
    let w = greedy_expand(x, beta, n)?;
    cylinder_interval(&w, beta)
}

/// The minimal-order full cylinder I_{n+m}(w, w′) ⊆ I_n(w), searching
/// extensions of length m = 0, 1, …, max_extra in lexicographic order.
///
/// When found, the smallest-order property |I_{n+m}| ≥ |I_n(w)|/β is
/// asserted.
pub fn smallest_full_extension(
    w: &DigitWord,
    beta: &BetaValue,
    max_extra: usize,
) -> Result<Cylinder> {
    if !crate::symbolic::is_admissible(w, beta)? {
        return Err(BetaError::NotAdmissible(w.text()));
    }
    let base = cylinder_interval(w, beta)?;
    for extra in 0..=max_extra {
        let depth = w.len() + extra;
        let aut = Admissibility::new(beta, depth.max(1))?;
        let start = aut.run(&w.0).expect("admissible prefix");
        let mut ext = Vec::with_capacity(extra);
        if let Some(found) = dfs_full(&aut, beta, w, start, extra, &mut ext)? {
            let lhs = found.length().mul(&beta.as_scalar());
            debug_assert!(
                lhs.cmp_exact(&base.length())? != Ordering::Less,
                "smallest full extension shorter than |I_n|/β"
            );
            return Ok(found);
        }
    }
    Err(BetaError::NotFoundWithinBudget(format!(
        "no full extension of {} within {} extra digits",
        w.text(),
        max_extra
    )))
}

fn dfs_full(
    aut: &Admissibility,
    beta: &BetaValue,
    prefix: &DigitWord,
    state: usize,
    remaining: usize,
    ext: &mut Vec<u32>,
) -> Result<Option<Cylinder>> {
    if remaining == 0 {
        let mut w = prefix.0.clone();
        w.extend_from_slice(ext);
        let word = DigitWord(w);
        if is_full(&word, beta)? {
            return Ok(Some(cylinder_interval(&word, beta)?));
        }
        return Ok(None);
    }
    for d in 0..=aut.max_digit(state) {
        if let Some(s) = aut.step(state, d) {
            ext.push(d);
            if let Some(found) = dfs_full(aut, beta, prefix, s, remaining - 1, ext)? {
                return Ok(Some(found));
            }
            ext.pop();
        }
    }
    Ok(None)
}

/// Emit `word,left,right,length,is_full` CSV lines for a level partition.
pub fn partition_csv(beta: &BetaValue, n: usize, digits: u32) -> Result<String> {
    let cylinders = partition_level(beta, n)?;
    let mut out = String::from("word,left,right,length,is_full\n");
    let full_len = beta.pow_scalar(-(n as i64));
    for c in &cylinders {
        let full = c.length().cmp_exact(&full_len)? == Ordering::Equal;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.word.text(),
            c.left.decimal_string(digits),
            c.right.decimal_string(digits),
            c.length().decimal_string(digits),
            full
        ));
    }
    Ok(out)
}

/// Independent length oracle: |I_n(w)| = β^{−n} · value(σʲ ε*) where j is
/// the automaton state after w (the longest suffix of w matching ε*). The
/// shifted tail value follows u_j = β·u_{j−1} − ε*_j from u₀ = 1.
#[cfg(test)]
pub(crate) fn length_via_eps_tail(w: &DigitWord, beta: &BetaValue) -> Result<RealScalar> {
    use crate::symbolic::eps_star_prefix;
    let aut = Admissibility::new(beta, w.len().max(1))?;
    let j = aut
        .run(&w.0)
        .ok_or_else(|| BetaError::NotAdmissible(w.text()))?;
    let eps = eps_star_prefix(beta, w.len().max(1))?;
    let bs = beta.as_scalar();
    let mut u = RealScalar::one();
    for i in 0..j {
        let d = eps.digit(i).expect("eps digit within depth");
        u = bs.mul(&u).sub(&RealScalar::from_int(d as i64));
    }
    Ok(beta.pow_scalar(-(w.len() as i64)).mul(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{beta_from_str, compare_exact, parse_rational};
    use crate::symbolic::tests::{golden, tribonacci};
    use crate::symbolic::{enumerate_admissible, is_admissible};

    #[test]
    fn cylinder_examples() {
        let two = beta_from_str("dec:2").unwrap();
        let c = cylinder_interval(&DigitWord(vec![0]), &two).unwrap();
        assert_eq!(c.left.decimal_string(3), "0.000");
        assert_eq!(c.right.decimal_string(3), "0.500");

        let g = golden();
        let c = cylinder_interval(&DigitWord(vec![1]), &g).unwrap();
        // left = 1/β, right = 1, length = 1 − 1/β = β^{-2} for golden.
        assert_eq!(c.left.cmp_exact(&g.inv_scalar()).unwrap(), Ordering::Equal);
        assert_eq!(
            c.right.cmp_exact(&RealScalar::one()).unwrap(),
            Ordering::Equal
        );
        let expect = g.pow_scalar(-2);
        assert_eq!(
            compare_exact(&c.length(), &expect).unwrap(),
            Ordering::Equal
        );

        assert!(matches!(
            cylinder_interval(&DigitWord(vec![1, 1]), &g),
            Err(BetaError::NotAdmissible(_))
        ));
    }

    #[test]
    fn fullness_examples() {
        let two = beta_from_str("dec:2").unwrap();
        assert!(is_full(&DigitWord(vec![1, 0, 1]), &two).unwrap());
        let g = golden();
        assert!(!is_full(&DigitWord(vec![1]), &g).unwrap());
        assert!(is_full(&DigitWord(vec![0]), &g).unwrap());
        assert!(is_full(&DigitWord(vec![1, 0]), &g).unwrap());
    }

    #[test]
    fn partition_examples() {
        let two = beta_from_str("dec:2").unwrap();
        let p = partition_level(&two, 2).unwrap();
        assert_eq!(p.len(), 4);

        let g = golden();
        let p = partition_level(&g, 2).unwrap();
        assert_eq!(p.len(), 3);
        let total = p
            .iter()
            .fold(RealScalar::zero(), |acc, c| acc.add(&c.length()));
        assert_eq!(
            compare_exact(&total, &RealScalar::one()).unwrap(),
            Ordering::Equal
        );

        let p = partition_level(&g, 5).unwrap();
        assert_eq!(p.len(), 13);
        // Abutting and covering [0,1).
        assert!(p[0].left.is_zero());
        for i in 0..p.len() - 1 {
            assert_eq!(
                compare_exact(&p[i].right, &p[i + 1].left).unwrap(),
                Ordering::Equal
            );
        }
        assert_eq!(
            compare_exact(&p.last().unwrap().right, &RealScalar::one()).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn locate_examples() {
        let two = beta_from_str("dec:2").unwrap();
        let x = RealScalar::from_rational(parse_rational("0.3").unwrap());
        let c = locate_cylinder(&x, &two, 3).unwrap();
        assert_eq!(c.word.0, vec![0, 1, 0]);
        assert_eq!(c.left.decimal_string(4), "0.2500");
        assert_eq!(c.right.decimal_string(4), "0.3750");

        let g = golden();
        let c = locate_cylinder(&RealScalar::zero(), &g, 4).unwrap();
        assert_eq!(c.word.0, vec![0, 0, 0, 0]);
        let c = locate_cylinder(&g.inv_scalar(), &g, 2).unwrap();
        assert_eq!(c.word.0, vec![1, 0]);
    }

    #[test]
    fn smallest_full_extension_examples() {
        let two = beta_from_str("dec:2").unwrap();
        let c = smallest_full_extension(&DigitWord(vec![1, 0]), &two, 3).unwrap();
        assert_eq!(c.word.0, vec![1, 0]);

        let g = golden();
        let c = smallest_full_extension(&DigitWord(vec![1]), &g, 3).unwrap();
        assert_eq!(c.word.0, vec![1, 0]);
        let base = cylinder_interval(&DigitWord(vec![1]), &g).unwrap();
        assert_eq!(
            compare_exact(&c.length(), &base.length()).unwrap(),
            Ordering::Equal
        );

        let c = smallest_full_extension(&DigitWord(vec![1, 0, 1]), &g, 4).unwrap();
        let base = cylinder_interval(&DigitWord(vec![1, 0, 1]), &g).unwrap();
        let scaled = c.length().mul(&g.as_scalar());
        assert_ne!(
            compare_exact(&scaled, &base.length()).unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn successor_route_matches_orbit_route() {
        for beta in [
            beta_from_str("dec:2").unwrap(),
            beta_from_str("dec:2.5").unwrap(),
            golden(),
            tribonacci(),
        ] {
            for n in 1..=6usize {
                let words = match enumerate_admissible(&beta, n, false).unwrap() {
                    Enumeration::Words(w) => w,
                    _ => unreachable!(),
                };
                for w in words {
                    let c = cylinder_interval(&w, &beta).unwrap();
                    let oracle = length_via_eps_tail(&w, &beta).unwrap();
                    assert_eq!(
                        compare_exact(&c.length(), &oracle).unwrap(),
                        Ordering::Equal,
                        "length mismatch for {} at β ≈ {}",
                        w.text(),
                        beta.to_f64()
                    );
                }
            }
        }
    }

    #[test]
    fn lower_digit_fullness() {
        // Decreasing a nonzero last digit of an admissible word yields a
        // full cylinder; exhaustive at small length.
        for beta in [golden(), tribonacci(), beta_from_str("dec:2.5").unwrap()] {
            for n in 1..=5usize {
                let words = match enumerate_admissible(&beta, n, false).unwrap() {
                    Enumeration::Words(w) => w,
                    _ => unreachable!(),
                };
                for w in words {
                    let last = *w.0.last().unwrap();
                    for d in 0..last {
                        let mut v = w.0.clone();
                        *v.last_mut().unwrap() = d;
                        let word = DigitWord(v);
                        assert!(is_admissible(&word, &beta).unwrap());
                        assert!(
                            is_full(&word, &beta).unwrap(),
                            "lower-digit cylinder {} not full",
                            word.text()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn product_law_on_full_cylinders() {
        let g = golden();
        let words3 = match enumerate_admissible(&g, 3, false).unwrap() {
            Enumeration::Words(w) => w,
            _ => unreachable!(),
        };
        for w in &words3 {
            if !is_full(w, &g).unwrap() {
                continue;
            }
            let base = cylinder_interval(w, &g).unwrap();
            for wp in &words3 {
                let mut cat = w.0.clone();
                cat.extend_from_slice(&wp.0);
                let cat = DigitWord(cat);
                assert!(is_admissible(&cat, &g).unwrap());
                let whole = cylinder_interval(&cat, &g).unwrap();
                let rhs = base
                    .length()
                    .mul(&cylinder_interval(wp, &g).unwrap().length());
                assert_eq!(
                    compare_exact(&whole.length(), &rhs).unwrap(),
                    Ordering::Equal
                );
            }
        }
    }

    #[test]
    fn csv_shape() {
        let two = beta_from_str("dec:2").unwrap();
        let csv = partition_csv(&two, 1, 6).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "word,left,right,length,is_full");
        assert_eq!(lines[1], "0,0.000000,0.500000,0.500000,true");
        assert_eq!(lines[2], "1,0.500000,1.000000,0.500000,true");
    }
}
