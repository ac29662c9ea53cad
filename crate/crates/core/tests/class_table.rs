//! Character-theoretic oracles for the class table of W(E6) on the 27 lines.

use delpezzo::certify::{newton_power_sums, PicLattice, Tables};
use delpezzo::config::W_E6_ORDER;

fn weighted_sum(f: impl Fn(&delpezzo::certify::ClassRecord) -> i64) -> i64 {
    Tables::get().classes.classes.iter().map(|c| c.size as i64 * f(c)).sum()
}

#[test]
fn sizes_partition_the_group() {
    let t = &Tables::get().classes;
    assert_eq!(t.group_order, W_E6_ORDER);
    assert_eq!(t.len(), 25);
    assert_eq!(weighted_sum(|_| 1), W_E6_ORDER as i64);
    for c in &t.classes {
        assert_eq!(W_E6_ORDER % c.size, 0);
    }
}

#[test]
fn burnside_counts() {
    let g = W_E6_ORDER as i64;
    // one orbit on lines; three on ordered pairs (equal, meeting, skew)
    assert_eq!(weighted_sum(|c| c.fixed_lines[0] as i64), g);
    assert_eq!(weighted_sum(|c| (c.fixed_lines[0] as i64).pow(2)), 3 * g);
}

#[test]
fn lattice_character() {
    let g = W_E6_ORDER as i64;
    // Pic = trivial + irreducible reflection representation
    assert_eq!(weighted_sum(|c| c.traces[0]), g);
    assert_eq!(weighted_sum(|c| c.traces[0].pow(2)), 2 * g);
    assert_eq!(weighted_sum(|c| c.det), 0);
}

#[test]
fn stored_traces_match_char_polys() {
    for c in &Tables::get().classes.classes {
        let s = newton_power_sums(&c.char_poly, 2 * c.order as usize);
        for m in 1..=2 * c.order {
            assert_eq!(c.trace(m), 1 + s[m as usize - 1], "class {} power {m}", c.id);
        }
    }
}

#[test]
fn representatives_round_trip() {
    let t = &Tables::get().classes;
    for c in &t.classes {
        let rep = c.representative();
        assert_eq!(t.class_of(&rep), Some(c.id));
        assert_eq!(rep.cycle_type(), c.cycle_type);
        let lift = PicLattice::get().lift(&rep).unwrap();
        assert_eq!(lift.det(), c.det);
        assert_eq!(lift.root_char_poly(), c.char_poly);
    }
}

#[test]
fn hashes_are_stable_within_a_build() {
    let a = Tables::build().unwrap();
    assert_eq!(&a.hashes, &Tables::get().hashes);
    assert!(a.hashes.values().all(|h| h.len() == 64));
}
