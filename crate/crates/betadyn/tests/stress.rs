// Adversarial checks on the exact arithmetic.
use betadyn::precision::*;
use betadyn::symbolic::*;
use betadyn::cylinders::*;

#[test]
fn near_integer_orbits_golden() {
    // Powers of the golden ratio approach integers (Lucas numbers); floors
    // must be certified exactly.
    let g = beta_from_str("poly:-1,-1,1@[1,2]").unwrap();
    // Lucas numbers: β^n + (-1/β)^n = L_n, so ⌊β^n⌋ = L_n - 1 for even n
    // and L_n for odd n.
    let lucas: [i64; 13] = [2, 1, 3, 4, 7, 11, 18, 29, 47, 76, 123, 199, 322];
    for n in 1..=12usize {
        let p = g.pow_scalar(n as i64);
        let f = safe_floor(&p).unwrap();
        let want = if n % 2 == 0 { lucas[n] - 1 } else { lucas[n] };
        assert_eq!(f, num_bigint::BigInt::from(want), "floor of golden^{n}");
    }
}

#[test]
fn bigger_alphabet_partition() {
    // A base with digit bound 3 and a non-terminating expansion of 1.
    let b = beta_from_str("dec:3.7").unwrap();
    assert_eq!(b.digit_bound(), 3);
    let p = partition_level(&b, 6).unwrap();
    let mut total = RealScalar::zero();
    for c in &p {
        total = total.add(&c.length());
    }
    assert_eq!(
        compare_exact(&total, &RealScalar::one()).unwrap(),
        std::cmp::Ordering::Equal
    );
    // Every word round-trips through the locate operation.
    for c in p.iter().step_by(97) {
        let again = locate_cylinder(&c.left, &b, 6).unwrap();
        assert_eq!(again.word, c.word);
    }
}

#[test]
fn deep_refinement_separates_close_roots() {
    // Two algebraic numbers that agree to many digits: β_39 and β_40 of
    // base 2 differ by about 2^-40.
    let two = beta_from_str("dec:2").unwrap();
    let a = solve_beta_n(&two, 39).unwrap();
    let b = solve_beta_n(&two, 40).unwrap();
    assert_eq!(a.cmp_beta(&b).unwrap(), std::cmp::Ordering::Less);
    assert_eq!(b.cmp_beta(&two).unwrap(), std::cmp::Ordering::Less);
}
