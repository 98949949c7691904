//! Counting oracles for the free-product structure: an exhaustive word
//! generator and a brute-force lattice sphere counter, both written
//! independently of the closed forms they check.

use zonal::presentation::{
    examples, sphere_count_factor, sphere_counts_by_length, GroupPresentation, NormalWord,
    Syllable,
};

/// Counts `x ∈ Z^r` with `‖x‖₁ = k` by scanning the full cube. Deliberately
/// naive — the point is independence from the closed form.
fn lattice_sphere_by_scan(r: usize, k: i64) -> u128 {
    assert!((1..=3).contains(&r));
    let mut count = 0u128;
    let side = 2 * k + 1;
    let cells = side.pow(r as u32);
    for idx in 0..cells {
        let mut rest = idx;
        let mut l1 = 0;
        for _ in 0..r {
            l1 += (rest % side - k).abs();
            rest /= side;
        }
        if l1 == k {
            count += 1;
        }
    }
    count
}

#[test]
fn factor_spheres_match_the_lattice_scan() {
    for r in 1..=3usize {
        for k in 1..=12i64 {
            assert_eq!(
                sphere_count_factor(r, k as u64).unwrap(),
                lattice_sphere_by_scan(r, k),
                "r = {r}, k = {k}"
            );
        }
    }
}

/// The §-counting comparability in testable form: `2·k^{r−1} ≤ card ≤
/// 6·k^{r−1}` for every rank and radius, in exact integer arithmetic.
#[test]
fn factor_spheres_stay_in_the_polynomial_band() {
    for r in 1..=3usize {
        for k in 1..=10_000u64 {
            let card = sphere_count_factor(r, k).unwrap();
            let scale = u128::from(k).pow(r as u32 - 1);
            assert!(2 * scale <= card, "r = {r}, k = {k}: {card}");
            assert!(card <= 6 * scale, "r = {r}, k = {k}: {card}");
        }
    }
}

/// Appends every exponent vector in `Z^rank` of given ℓ1 weight to `out`.
fn exponent_vectors(rank: usize, weight: i64) -> Vec<Vec<i64>> {
    fn rec(rank: usize, weight: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rank == 1 {
            if weight == 0 {
                let mut v = prefix.clone();
                v.push(0);
                out.push(v);
            } else {
                for sign in [1, -1] {
                    let mut v = prefix.clone();
                    v.push(sign * weight);
                    out.push(v);
                }
            }
            return;
        }
        for part in 0..=weight {
            if part == 0 {
                prefix.push(0);
                rec(rank - 1, weight, prefix, out);
                prefix.pop();
            } else {
                for sign in [1, -1] {
                    prefix.push(sign * part);
                    rec(rank - 1, weight - part, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(rank, weight, &mut Vec::new(), &mut out);
    out
}

/// Every normal word of length exactly `n`, by direct recursion over
/// syllable decompositions: factors alternate, exponent vectors are nonzero.
fn words_of_length(gp: &GroupPresentation, n: u64) -> Vec<NormalWord> {
    fn rec(
        gp: &GroupPresentation,
        remaining: u64,
        last_factor: Option<usize>,
        prefix: &mut Vec<Syllable>,
        out: &mut Vec<NormalWord>,
    ) {
        if remaining == 0 {
            out.push(NormalWord::new(prefix.clone()));
            return;
        }
        for (i, factor) in gp.factors.iter().enumerate() {
            if last_factor == Some(i) {
                continue;
            }
            for weight in 1..=remaining {
                for exps in exponent_vectors(factor.rank(), weight as i64) {
                    prefix.push(Syllable::new(i, exps));
                    rec(gp, remaining - weight, Some(i), prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(gp, n, None, &mut Vec::new(), &mut out);
    out
}

#[test]
fn closed_form_counts_match_exhaustive_generation() {
    let cases: [(&str, GroupPresentation, u64); 3] = [
        ("gamma2", examples::gamma2(), 8),
        ("schottky", examples::schottky_default(), 8),
        ("rank2-cusp", examples::rank2_cusp(), 6),
    ];
    for (name, gp, n_max) in cases {
        let closed = sphere_counts_by_length(&gp, n_max).unwrap();
        for n in 0..=n_max {
            let words = words_of_length(&gp, n);
            assert_eq!(
                words.len() as u128,
                closed[n as usize],
                "{name}, sphere n = {n}"
            );
            for w in &words {
                w.check_normal(&gp).unwrap();
                assert_eq!(w.word_length(), n);
            }
        }
    }
}

#[test]
fn inversion_is_a_length_preserving_involution() {
    let gp = examples::rank2_cusp();
    for n in 0..=4u64 {
        for w in words_of_length(&gp, n) {
            let inv = w.inverse();
            inv.check_normal(&gp).unwrap();
            assert_eq!(inv.word_length(), n);
            assert_eq!(inv.inverse(), w);
        }
    }
}

/// A word times its inverse lands on the identity matrix, up to rounding
/// from the explicit generator entries.
#[test]
fn matrix_of_inverse_cancels() {
    use zonal::hyperbolic::Mobius;
    use zonal::presentation::matrix_of;

    let gp = examples::gamma2();
    for w in words_of_length(&gp, 5) {
        let m = matrix_of(&w, &gp).unwrap();
        let m_inv = matrix_of(&w.inverse(), &gp).unwrap();
        let prod = m.compose(&m_inv);
        let scale = prod.max_abs_entry();
        assert!(
            prod.approx_eq(&Mobius::identity(), 1e-9 * scale.max(1.0)),
            "w = {w:?}"
        );
    }
}
