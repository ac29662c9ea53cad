//! The blow-up model of the Picard lattice of a del Pezzo surface.
//!
//! For degree `d` the lattice is `Z^{1, 9-d}` with basis `H, E_1, ..., E_{9-d}`,
//! intersection form `diag(1, -1, ..., -1)` and canonical class
//! `K = -3H + E_1 + ... + E_{9-d}`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of coordinates `(h, e_1, ..., e_r)` meaning `h H + e_1 E_1 + ... + e_r E_r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![0; rank])
    }

    /// The class `H`.
    pub fn hyperplane(rank: usize) -> Self {
        let mut v = Self::zero(rank);
        v.0[0] = 1;
        v
    }

    /// The exceptional class `E_i` for `1 <= i < rank`.
    pub fn exceptional(rank: usize, i: usize) -> Self {
        assert!(i >= 1 && i < rank, "E_{i} out of range for rank {rank}");
        let mut v = Self::zero(rank);
        v.0[i] = 1;
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for LatticeVector {
    /// Prints e.g. `2H-E1-E2-E3-E4-E5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let name = if i == 0 { "H".to_string() } else { format!("E{i}") };
            let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 {
                out.push_str(&format!("{sign}{name}"));
            } else {
                out.push_str(&format!("{sign}{mag}{name}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Degree, rank and canonical class of the blow-up model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeContext {
    degree: u32,
    rank: usize,
    canonical_class: LatticeVector,
}

impl DegreeContext {
    /// Degrees 1 through 7. Degrees 8 and 9 are rejected.
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=7).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        let rank = 10 - degree as usize;
        let mut k = vec![1i64; rank];
        k[0] = -3;
        Ok(DegreeContext { degree, rank, canonical_class: LatticeVector(k) })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of blown-up points, `9 - d`.
    pub fn points(&self) -> usize {
        self.rank - 1
    }

    pub fn canonical_class(&self) -> &LatticeVector {
        &self.canonical_class
    }

    fn check(&self, v: &LatticeVector) -> Result<()> {
        if v.rank() != self.rank {
            return Err(Error::Dimension { expected: self.rank, found: v.rank() });
        }
        Ok(())
    }

    /// `v_0 w_0 - sum_{i>=1} v_i w_i`.
    pub fn pairing(&self, v: &LatticeVector, w: &LatticeVector) -> Result<i64> {
        self.check(v)?;
        self.check(w)?;
        Ok(pair_unchecked(v, w))
    }

    /// `v + (v . root) root`, the reflection in a root of self-intersection -2.
    pub fn reflect(&self, root: &LatticeVector, v: &LatticeVector) -> Result<LatticeVector> {
        self.check(root)?;
        self.check(v)?;
        if pair_unchecked(root, root) != -2 {
            return Err(Error::Precondition(format!("{root} is not a root")));
        }
        Ok(reflect_unchecked(root, v))
    }

    /// Vectors `v` with `v.v = norm` and `v.K = canonical_degree`, sorted lexicographically.
    fn enumerate_by_norm(&self, norm: i64, canonical_degree: i64) -> Vec<LatticeVector> {
        // With v = a H + sum c_i E_i:
        //   sum c_i = -3a - canonical_degree,  sum c_i^2 = a^2 - norm,
        // and Cauchy-Schwarz (sum c_i)^2 <= r sum c_i^2 bounds a.
        let r = self.points() as i64;
        let m = canonical_degree;
        // (3a + m)^2 <= r (a^2 - norm)  <=>  (9 - r) a^2 + 6 m a + m^2 + r norm <= 0
        let qa = 9 - r;
        let qb = 6 * m;
        let qc = m * m + r * norm;
        let disc = (qb * qb - 4 * qa * qc) as f64;
        let mut out = Vec::new();
        if disc < 0.0 {
            return out;
        }
        let lo = ((-(qb as f64) - disc.sqrt()) / (2 * qa) as f64).floor() as i64 - 1;
        let hi = ((-(qb as f64) + disc.sqrt()) / (2 * qa) as f64).ceil() as i64 + 1;
        for a in lo..=hi {
            let sum = -3 * a - m;
            let sumsq = a * a - norm;
            if sumsq < 0 || sum * sum > r * sumsq {
                continue;
            }
            let bound = (sumsq as f64).sqrt().floor() as i64;
            let mut coords = vec![0i64; self.rank];
            coords[0] = a;
            fill_coords(&mut coords, 1, sum, sumsq, bound, &mut out);
        }
        out.sort();
        out
    }

    /// All classes with `C.C = C.K = -1`, sorted lexicographically on coordinates.
    pub fn enumerate_exceptional_classes(&self) -> Vec<LatticeVector> {
        self.enumerate_by_norm(-1, -1)
    }

    /// All `v` with `v.v = -2` and `v.K = 0`.
    pub fn enumerate_roots(&self) -> Vec<LatticeVector> {
        self.enumerate_by_norm(-2, 0)
    }

    /// `H - E_1 - E_2 - E_3` (when at least three points are blown up) and `E_i - E_{i+1}`.
    pub fn simple_roots(&self) -> Vec<LatticeVector> {
        let r = self.points();
        let mut roots = Vec::new();
        if r >= 3 {
            let mut a0 = LatticeVector::hyperplane(self.rank);
            for i in 1..=3 {
                a0.0[i] = -1;
            }
            roots.push(a0);
        }
        for i in 1..r {
            let mut a = LatticeVector::zero(self.rank);
            a.0[i] = 1;
            a.0[i + 1] = -1;
            roots.push(a);
        }
        roots
    }

    /// A word in the simple reflections sending `e` to `E_{9-d}`.
    ///
    /// Found by breadth-first search over the orbit of `e`, so the word is as short as
    /// possible and deterministic.
    pub fn word_to_last_exceptional(&self, e: &LatticeVector) -> Result<Vec<usize>> {
        self.check(e)?;
        let target = LatticeVector::exceptional(self.rank, self.points());
        let simple = self.simple_roots();
        let mut parent: HashMap<LatticeVector, Option<(LatticeVector, usize)>> = HashMap::new();
        parent.insert(e.clone(), None);
        let mut queue = VecDeque::from([e.clone()]);
        while let Some(v) = queue.pop_front() {
            if v == target {
                let mut word = Vec::new();
                let mut cur = v;
                while let Some(Some((prev, s))) = parent.get(&cur).cloned() {
                    word.push(s);
                    cur = prev;
                }
                word.reverse();
                return Ok(word);
            }
            for (s, root) in simple.iter().enumerate() {
                let w = reflect_unchecked(root, &v);
                if !parent.contains_key(&w) {
                    parent.insert(w.clone(), Some((v.clone(), s)));
                    queue.push_back(w);
                }
            }
        }
        Err(Error::Precondition(format!("{e} is not in the Weyl orbit of E{}", self.points())))
    }

    /// Apply a word of simple reflections (leftmost applied first).
    pub fn apply_word(&self, word: &[usize], v: &LatticeVector) -> LatticeVector {
        let simple = self.simple_roots();
        word.iter().fold(v.clone(), |acc, &s| reflect_unchecked(&simple[s], &acc))
    }

    /// Blow-down transport for an exceptional class `e` of degree `d <= 6`.
    ///
    /// Returns pairs `(i, j)`: the class at index `i` of this degree (orthogonal to `e`)
    /// corresponds to the class at index `j` of degree `d + 1`. Indices refer to the
    /// canonical orderings of [`DegreeContext::enumerate_exceptional_classes`].
    pub fn blow_down_correspondence(&self, e: &LatticeVector) -> Result<Vec<(usize, usize)>> {
        self.check(e)?;
        if pair_unchecked(e, e) != -1 || pair_unchecked(e, &self.canonical_class) != -1 {
            return Err(Error::Precondition(format!("{e} is not an exceptional class")));
        }
        if self.degree >= 7 {
            return Err(Error::Precondition("blow-down needs degree <= 6".into()));
        }
        let up = DegreeContext::new(self.degree + 1)?;
        let classes = self.enumerate_exceptional_classes();
        let up_classes = up.enumerate_exceptional_classes();
        let up_index: BTreeMap<&LatticeVector, usize> =
            up_classes.iter().enumerate().map(|(j, v)| (v, j)).collect();
        let word = self.word_to_last_exceptional(e)?;
        let mut map = Vec::new();
        for (i, v) in classes.iter().enumerate() {
            if pair_unchecked(v, e) != 0 {
                continue;
            }
            let moved = self.apply_word(&word, v);
            debug_assert_eq!(*moved.0.last().unwrap(), 0);
            let truncated = LatticeVector(moved.0[..self.rank - 1].to_vec());
            let j = *up_index.get(&truncated).ok_or_else(|| {
                Error::Precondition(format!("{truncated} is not exceptional in degree {}", up.degree))
            })?;
            map.push((i, j));
        }
        Ok(map)
    }
}

pub(crate) fn pair_unchecked(v: &LatticeVector, w: &LatticeVector) -> i64 {
    let mut s = v.0[0] * w.0[0];
    for i in 1..v.0.len() {
        s -= v.0[i] * w.0[i];
    }
    s
}

pub(crate) fn reflect_unchecked(root: &LatticeVector, v: &LatticeVector) -> LatticeVector {
    let c = pair_unchecked(v, root);
    LatticeVector(v.0.iter().zip(&root.0).map(|(x, a)| x + c * a).collect())
}

fn fill_coords(
    coords: &mut [i64],
    pos: usize,
    sum: i64,
    sumsq: i64,
    bound: i64,
    out: &mut Vec<LatticeVector>,
) {
    let remaining = (coords.len() - pos) as i64;
    if remaining == 0 {
        if sum == 0 && sumsq == 0 {
            out.push(LatticeVector(coords.to_vec()));
        }
        return;
    }
    if sum * sum > remaining * sumsq {
        return;
    }
    for c in -bound..=bound {
        let rest = sumsq - c * c;
        if rest < 0 {
            continue;
        }
        coords[pos] = c;
        fill_coords(coords, pos + 1, sum - c, rest, bound, out);
    }
    coords[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> DegreeContext {
        DegreeContext::new(d).unwrap()
    }

    #[test]
    fn pairing_basics() {
        let c = ctx(3);
        let h = LatticeVector::hyperplane(7);
        assert_eq!(c.pairing(&h, &h).unwrap(), 1);
        assert_eq!(c.pairing(c.canonical_class(), c.canonical_class()).unwrap(), 3);
        let e1 = LatticeVector::exceptional(7, 1);
        let e2 = LatticeVector::exceptional(7, 2);
        assert_eq!(c.pairing(&e1, &e2).unwrap(), 0);
        assert!(matches!(c.pairing(&e1, &LatticeVector::zero(4)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn canonical_square_is_degree() {
        for d in 1..=7 {
            let c = ctx(d);
            assert_eq!(c.pairing(c.canonical_class(), c.canonical_class()).unwrap(), d as i64);
        }
    }

    #[test]
    fn unsupported_degrees() {
        assert!(matches!(DegreeContext::new(8), Err(Error::UnsupportedDegree(8))));
        assert!(matches!(DegreeContext::new(9), Err(Error::UnsupportedDegree(9))));
        assert!(DegreeContext::new(0).is_err());
    }

    /// Independent brute force over a box, used to check the bounded search.
    fn brute_force(c: &DegreeContext, norm: i64, kdeg: i64, box_size: i64) -> Vec<LatticeVector> {
        let mut out = Vec::new();
        let rank = c.rank();
        let mut coords = vec![-box_size; rank];
        loop {
            let v = LatticeVector(coords.clone());
            if pair_unchecked(&v, &v) == norm && pair_unchecked(&v, c.canonical_class()) == kdeg {
                out.push(v);
            }
            let mut i = 0;
            loop {
                if i == rank {
                    out.sort();
                    return out;
                }
                coords[i] += 1;
                if coords[i] > box_size {
                    coords[i] = -box_size;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn degree_seven_classes() {
        let c = ctx(7);
        let classes = c.enumerate_exceptional_classes();
        let expected = vec![
            LatticeVector(vec![0, 1, 0]),
            LatticeVector(vec![0, 0, 1]),
            LatticeVector(vec![1, -1, -1]),
        ];
        let mut sorted = expected.clone();
        sorted.sort();
        assert_eq!(classes, sorted);
        assert_eq!(classes, brute_force(&c, -1, -1, 4));
    }

    #[test]
    fn small_degrees_match_brute_force() {
        for d in 4..=7 {
            let c = ctx(d);
            assert_eq!(c.enumerate_exceptional_classes(), brute_force(&c, -1, -1, 3));
            assert_eq!(c.enumerate_roots(), brute_force(&c, -2, 0, 3));
        }
    }

    #[test]
    fn class_counts() {
        let counts: Vec<usize> =
            (1..=7).map(|d| ctx(d).enumerate_exceptional_classes().len()).collect();
        assert_eq!(counts, vec![240, 56, 27, 16, 10, 6, 3]);
    }

    #[test]
    fn root_counts() {
        assert_eq!(ctx(1).enumerate_roots().len(), 240);
        assert_eq!(ctx(2).enumerate_roots().len(), 126);
        assert_eq!(ctx(3).enumerate_roots().len(), 72);
        assert_eq!(ctx(6).enumerate_roots().len(), 8);
        for d in 1..=7 {
            let c = ctx(d);
            let mut a = LatticeVector::zero(c.rank());
            a.0[1] = 1;
            a.0[2] = -1;
            assert!(c.enumerate_roots().contains(&a));
        }
    }

    #[test]
    fn reflections() {
        let c = ctx(3);
        let e1 = LatticeVector::exceptional(7, 1);
        let e2 = LatticeVector::exceptional(7, 2);
        let e3 = LatticeVector::exceptional(7, 3);
        let h = LatticeVector::hyperplane(7);
        assert_eq!(c.reflect(&e1.sub(&e2), &e1).unwrap(), e2);
        let alpha0 = h.sub(&e1).sub(&e2).sub(&e3);
        assert_eq!(c.reflect(&alpha0, &e1).unwrap(), h.sub(&e2).sub(&e3));
        let e5 = LatticeVector::exceptional(7, 5);
        assert_eq!(c.reflect(&alpha0, &e5).unwrap(), e5);
        assert!(matches!(c.reflect(&e1, &e2), Err(Error::Precondition(_))));
    }

    #[test]
    fn intersection_ranges() {
        for d in 1..=7 {
            let c = ctx(d);
            let classes = c.enumerate_exceptional_classes();
            let max = match d {
                1 => 3,
                2 => 2,
                _ => 1,
            };
            let mut seen_max = 0;
            for (i, v) in classes.iter().enumerate() {
                for w in &classes[i + 1..] {
                    let p = pair_unchecked(v, w);
                    assert!((0..=max).contains(&p), "d={d}: {v}.{w} = {p}");
                    seen_max = seen_max.max(p);
                }
            }
            if d <= 6 {
                assert_eq!(seen_max, max, "d={d}");
            }
        }
    }

    #[test]
    fn reflections_permute_classes() {
        for d in 1..=7 {
            let c = ctx(d);
            let classes = c.enumerate_exceptional_classes();
            for root in c.simple_roots() {
                let mut image: Vec<_> =
                    classes.iter().map(|v| reflect_unchecked(&root, v)).collect();
                image.sort();
                assert_eq!(image, classes);
            }
        }
    }

    #[test]
    fn blow_down() {
        let c3 = ctx(3);
        let e6 = LatticeVector::exceptional(7, 6);
        let map = c3.blow_down_correspondence(&e6).unwrap();
        assert_eq!(map.len(), 16);
        let c6 = ctx(6);
        let map6 = c6.blow_down_correspondence(&LatticeVector::exceptional(4, 3)).unwrap();
        assert_eq!(map6.len(), 3);

        // E1 goes to E1 when no change of basis is needed.
        let classes = c3.enumerate_exceptional_classes();
        let up = ctx(4).enumerate_exceptional_classes();
        let e1 = classes.iter().position(|v| *v == LatticeVector::exceptional(7, 1)).unwrap();
        let &(_, j) = map.iter().find(|(i, _)| *i == e1).unwrap();
        assert_eq!(up[j], LatticeVector::exceptional(6, 1));
    }

    #[test]
    fn blow_down_preserves_intersections_everywhere() {
        for d in 1..=6 {
            let c = ctx(d);
            let up = ctx(d + 1);
            let classes = c.enumerate_exceptional_classes();
            let up_classes = up.enumerate_exceptional_classes();
            // a couple of classes per degree, including one needing a change of basis
            for e in [classes[0].clone(), classes[classes.len() / 2].clone()] {
                let map = c.blow_down_correspondence(&e).unwrap();
                assert_eq!(map.len(), up_classes.len());
                let mut targets: Vec<usize> = map.iter().map(|&(_, j)| j).collect();
                targets.sort();
                targets.dedup();
                assert_eq!(targets.len(), up_classes.len());
                for &(i1, j1) in &map {
                    for &(i2, j2) in &map {
                        assert_eq!(
                            pair_unchecked(&classes[i1], &classes[i2]),
                            pair_unchecked(&up_classes[j1], &up_classes[j2])
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn blow_down_rejects_non_exceptional() {
        let c = ctx(3);
        let h = LatticeVector::hyperplane(7);
        assert!(matches!(c.blow_down_correspondence(&h), Err(Error::Precondition(_))));
    }

    #[test]
    fn display() {
        let v = LatticeVector(vec![2, -1, -1, -1, -1, -1, 0]);
        assert_eq!(v.to_string(), "2H-E1-E2-E3-E4-E5");
        assert_eq!(LatticeVector(vec![0, 1, 0]).to_string(), "E1");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reflections_preserve_pairing(
                d in 1u32..=7,
                root_ix in 0usize..1000,
                v in proptest::collection::vec(-5i64..=5, 9),
                w in proptest::collection::vec(-5i64..=5, 9),
            ) {
                let c = DegreeContext::new(d).unwrap();
                let roots = c.enumerate_roots();
                let root = &roots[root_ix % roots.len()];
                let v = LatticeVector(v[..c.rank()].to_vec());
                let w = LatticeVector(w[..c.rank()].to_vec());
                let sv = c.reflect(root, &v).unwrap();
                let sw = c.reflect(root, &w).unwrap();
                prop_assert_eq!(c.pairing(&sv, &sw).unwrap(), c.pairing(&v, &w).unwrap());
                prop_assert_eq!(c.reflect(root, &sv).unwrap(), v);
            }
        }
    }
}
