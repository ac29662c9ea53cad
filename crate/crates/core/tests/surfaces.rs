use proptest::prelude::*;

use delpezzo::certify::{newton_power_sums, Tables};
use delpezzo::gf::{field, Elem};
use delpezzo::surface::{
    count_points, count_points_naive, examine_geometry, frobenius_class, Budget, CubicForm, SmoothnessCertificate,
};

fn budget() -> Budget {
    Budget { points: 5_000_000, lines: 100_000_000, singular_max_degree: 3 }
}

/// Permuted product of unit lower and upper triangular matrices, so always invertible.
fn invertible(p: u64, lower: &[u64], upper: &[u64], perm: &[usize]) -> [[Elem; 4]; 4] {
    let tri = |v: &[u64], i: usize, j: usize| -> u64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => v[i * 4 + j] % p,
            std::cmp::Ordering::Less => 0,
        }
    };
    let mut a = [[0 as Elem; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let s: u64 = (0..4).map(|k| tri(lower, i, k) * tri(upper, j, k)).sum();
            a[perm[i]][j] = (s % p) as Elem;
        }
    }
    a
}

fn form(p: u64, coeffs: &[u64]) -> Option<CubicForm> {
    let c: Vec<i64> = coeffs.iter().map(|&x| (x % p) as i64).collect();
    CubicForm::from_ints(field(p, 1).unwrap(), &c).ok()
}

fn verdict(c: &SmoothnessCertificate) -> u8 {
    match c {
        SmoothnessCertificate::SmoothCertified { .. } => 0,
        SmoothnessCertificate::NotSmooth { .. } => 1,
        SmoothnessCertificate::Undetermined => 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_count_matches_naive(p in prop::sample::select(vec![2u64, 3, 5]), coeffs in prop::collection::vec(0u64..7, 20)) {
        if let Some(f) = form(p, &coeffs) {
            prop_assert_eq!(count_points(&f), count_points_naive(&f));
        }
    }

    #[test]
    fn invariant_under_coordinate_change(
        p in prop::sample::select(vec![2u64, 3, 5]),
        coeffs in prop::collection::vec(0u64..5, 20),
        lower in prop::collection::vec(0u64..5, 16),
        upper in prop::collection::vec(0u64..5, 16),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let Some(f) = form(p, &coeffs) else { return Ok(()) };
        let g = f.transform(&invertible(p, &lower, &upper, &perm));
        prop_assert_eq!(count_points(&f), count_points(&g));
        let b = budget();
        let (df, dg) = (examine_geometry(&f, &b).unwrap(), examine_geometry(&g, &b).unwrap());
        prop_assert_eq!(verdict(&df.certificate), verdict(&dg.certificate));
        prop_assert_eq!(&df.line_counts, &dg.line_counts);
        if df.certificate.is_certified() {
            let t = &Tables::get().classes;
            prop_assert_eq!(frobenius_class(&f, &b, t).unwrap(), frobenius_class(&g, &b, t).unwrap());
        }
    }

    #[test]
    fn lefschetz_from_class(coeffs in prop::collection::vec(0u64..2, 20)) {
        let Some(f) = form(2, &coeffs) else { return Ok(()) };
        let b = budget();
        if !examine_geometry(&f, &b).unwrap().certificate.is_certified() {
            return Ok(());
        }
        let t = &Tables::get().classes;
        let classes = frobenius_class(&f, &b, t).unwrap();
        for m in 1..=6u32 {
            let qm = 1i128 << m;
            let n = count_points(&f.base_change(m).unwrap()) as i128;
            // every class still in play must predict the count
            for &c in &classes {
                let s = newton_power_sums(&t.class(c).char_poly, 6);
                prop_assert_eq!(n, qm * qm + qm * (1 + s[m as usize - 1] as i128) + 1);
            }
        }
    }
}
