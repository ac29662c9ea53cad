//! Permutation groups via a base and strong generating set.
//!
//! Permutations compose left to right: `p.then(q)` applies `p` first.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on full enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u16>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "()");
        }
        for c in self.cycles() {
            if c.len() > 1 {
                let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", s.join(","))?;
            }
        }
        Ok(())
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n > u16::MAX as usize {
            return Err(Error::InvalidPermutation(format!("degree {n} too large")));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images: images.into_iter().map(|x| x as u16).collect() })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n as u16).collect() }
    }

    /// Build from disjoint cycles on `0..n`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x >= n {
                    return Err(Error::PointOutOfRange { point: x, degree: n });
                }
                images[x] = c[(i + 1) % c.len()];
            }
        }
        Permutation::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Apply `self`, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: self.images.iter().map(|&x| other.images[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Permutation { images: inv }
    }

    pub fn pow(&self, mut e: u64) -> Permutation {
        let mut base = self.clone();
        let mut acc = Permutation::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    /// `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        g.inverse().then(self).then(g)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_parts(self.cycles().iter().map(|c| c.len()).collect())
    }

    pub fn order(&self) -> u64 {
        self.cycles().iter().fold(1u64, |acc, c| lcm(acc, c.len() as u64))
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &x)| *i == x as usize).count()
    }

    /// `+1` for even, `-1` for odd permutations.
    pub fn sign(&self) -> i32 {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Multiset of cycle lengths, stored sorted descending.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn from_parts(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn order(&self) -> u64 {
        self.parts.iter().fold(1, |acc, &p| lcm(acc, p as u64))
    }

    /// Fixed points of the `m`-th power of a permutation of this type.
    pub fn fixed_points_of_power(&self, m: u64) -> usize {
        self.parts.iter().filter(|&&p| m % p as u64 == 0).map(|&p| p).sum()
    }
}

impl fmt::Display for CycleType {
    /// Exponential notation, ascending: `1^3 2^12`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in &self.parts {
            *counts.entry(p).or_default() += 1;
        }
        let s: Vec<String> = counts.iter().map(|(p, c)| format!("{p}^{c}")).collect();
        f.write_str(&s.join(" "))
    }
}

impl FromStr for CycleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for tok in s.split_whitespace() {
            let (p, c) = tok
                .split_once('^')
                .ok_or_else(|| Error::Precondition(format!("bad cycle type token {tok:?}")))?;
            let p: usize = p.parse().map_err(|_| Error::Precondition(format!("bad part {p:?}")))?;
            let c: usize = c.parse().map_err(|_| Error::Precondition(format!("bad count {c:?}")))?;
            parts.extend(std::iter::repeat(p).take(c));
        }
        Ok(CycleType::from_parts(parts))
    }
}

impl Serialize for CycleType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CycleType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
struct Level {
    point: usize,
    gens: Vec<Permutation>,
    orbit: Vec<usize>,
    /// `transversal[b]` maps the level's base point to `b`.
    transversal: Vec<Option<Permutation>>,
}

impl Level {
    fn new(n: usize, point: usize) -> Self {
        let mut transversal = vec![None; n];
        transversal[point] = Some(Permutation::identity(n));
        Level { point, gens: Vec::new(), orbit: vec![point], transversal }
    }

    /// Extend the orbit after generators were added. Existing transversal entries are kept.
    fn extend_orbit(&mut self) {
        let mut i = 0;
        while i < self.orbit.len() {
            let b = self.orbit[i];
            let ub = self.transversal[b].clone().expect("orbit point has transversal");
            for s in &self.gens {
                let c = s.apply(b);
                if self.transversal[c].is_none() {
                    self.transversal[c] = Some(ub.then(s));
                    self.orbit.push(c);
                }
            }
            i += 1;
        }
    }
}

/// A permutation group with a base and strong generating set.
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
}

impl PermutationGroup {
    pub fn trivial(n: usize) -> Self {
        PermutationGroup { degree: n, generators: Vec::new(), levels: Vec::new() }
    }

    /// Deterministic Schreier-Sims.
    pub fn from_generators(n: usize, gens: &[Permutation]) -> Result<Self> {
        Self::with_base_prefix(n, gens, &[])
    }

    /// As [`PermutationGroup::from_generators`], with the base starting with `prefix`.
    pub fn with_base_prefix(n: usize, gens: &[Permutation], prefix: &[usize]) -> Result<Self> {
        for g in gens {
            if g.degree() != n {
                return Err(Error::InvalidPermutation(format!(
                    "generator of degree {} in a group of degree {n}",
                    g.degree()
                )));
            }
        }
        for &p in prefix {
            if p >= n {
                return Err(Error::PointOutOfRange { point: p, degree: n });
            }
        }
        let generators: Vec<Permutation> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut group = PermutationGroup { degree: n, generators: generators.clone(), levels: Vec::new() };
        for &p in prefix {
            if !group.levels.iter().any(|l| l.point == p) {
                group.levels.push(Level::new(n, p));
            }
        }
        for g in &generators {
            if group.levels.iter().all(|l| g.apply(l.point) == l.point) {
                let moved = (0..n).find(|&x| g.apply(x) != x).unwrap();
                group.levels.push(Level::new(n, moved));
            }
        }
        for i in 0..group.levels.len() {
            let fixing: Vec<Permutation> = generators
                .iter()
                .filter(|g| group.levels[..i].iter().all(|l| g.apply(l.point) == l.point))
                .cloned()
                .collect();
            group.levels[i].gens = fixing;
            group.levels[i].extend_orbit();
        }
        group.schreier_sims();
        // Drop trailing levels with trivial orbits that the prefix may have introduced.
        while group.levels.last().is_some_and(|l| l.orbit.len() == 1 && l.gens.is_empty()) {
            if prefix.len() >= group.levels.len() {
                break;
            }
            group.levels.pop();
        }
        Ok(group)
    }

    fn schreier_sims(&mut self) {
        let n = self.degree;
        let mut checked: Vec<HashSet<(usize, usize)>> = vec![HashSet::new(); self.levels.len()];
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let lvl = i as usize;
            let mut restart_at = None;
            'scan: for oi in 0..self.levels[lvl].orbit.len() {
                let b = self.levels[lvl].orbit[oi];
                for si in 0..self.levels[lvl].gens.len() {
                    if !checked[lvl].insert((b, si)) {
                        continue;
                    }
                    let level = &self.levels[lvl];
                    let s = &level.gens[si];
                    let ub = level.transversal[b].as_ref().unwrap();
                    let c = s.apply(b);
                    let uc = level.transversal[c].as_ref().unwrap();
                    let h = ub.then(s).then(&uc.inverse());
                    let (residue, j) = self.strip(h, lvl + 1);
                    if residue.is_identity() {
                        continue;
                    }
                    if j == self.levels.len() {
                        let moved = (0..n).find(|&x| residue.apply(x) != x).unwrap();
                        self.levels.push(Level::new(n, moved));
                        checked.push(HashSet::new());
                    }
                    for l in lvl + 1..=j {
                        self.levels[l].gens.push(residue.clone());
                        self.levels[l].extend_orbit();
                    }
                    restart_at = Some(j);
                    break 'scan;
                }
            }
            match restart_at {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }

    /// Sift `g` through the chain starting at level `from`. Returns the residue and the
    /// level at which sifting stopped (`levels.len()` if it passed every level).
    fn strip(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for j in from..self.levels.len() {
            let level = &self.levels[j];
            let b = g.apply(level.point);
            match &level.transversal[b] {
                None => return (g, j),
                Some(u) => g = g.then(&u.inverse()),
            }
        }
        (g, self.levels.len())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    /// All strong generators, without duplicates, in level order.
    pub fn strong_generators(&self) -> Vec<Permutation> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for l in &self.levels {
            for g in &l.gens {
                if seen.insert(g.clone()) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    /// Fundamental orbit sizes along the base.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// The order as `u64`; all groups handled here fit.
    pub fn order_u64(&self) -> u64 {
        self.levels.iter().map(|l| l.orbit.len() as u64).product()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        let (residue, _) = self.strip(p.clone(), 0);
        residue.is_identity()
    }

    pub fn orbit(&self, point: usize) -> Result<BTreeSet<usize>> {
        if point >= self.degree {
            return Err(Error::PointOutOfRange { point, degree: self.degree });
        }
        let mut seen = BTreeSet::from([point]);
        let mut stack = vec![point];
        while let Some(x) = stack.pop() {
            for g in &self.generators {
                let y = g.apply(x);
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        Ok(seen)
    }

    /// All orbits, each sorted, listed by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.degree];
        let mut out = Vec::new();
        for p in 0..self.degree {
            if assigned[p] {
                continue;
            }
            let orb = self.orbit(p).unwrap();
            for &x in &orb {
                assigned[x] = true;
            }
            out.push(orb.into_iter().collect());
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree == 0 || self.orbit(0).map(|o| o.len() == self.degree).unwrap_or(false)
    }

    /// The full stabilizer of `point`, with its own base and strong generators.
    pub fn stabilizer_of_point(&self, point: usize) -> Result<PermutationGroup> {
        if point >= self.degree {
            return Err(Error::PointOutOfRange { point, degree: self.degree });
        }
        let rebased = if self.levels.first().is_some_and(|l| l.point == point) {
            self.clone()
        } else {
            PermutationGroup::with_base_prefix(self.degree, &self.strong_generators(), &[point])?
        };
        let levels: Vec<Level> = rebased.levels.into_iter().skip(1).collect();
        let generators = levels.first().map(|l| l.gens.clone()).unwrap_or_default();
        Ok(PermutationGroup { degree: self.degree, generators, levels })
    }

    /// Every element exactly once, as products of transversal elements.
    pub fn enumerate_elements(&self, cap: u64) -> Result<ElementIter<'_>> {
        let order = self.order();
        if order > BigUint::from(cap) {
            return Err(Error::Capacity { order: order.to_string(), cap });
        }
        Ok(ElementIter::new(self))
    }

    pub fn cycle_type_census(&self, cap: u64) -> Result<BTreeSet<CycleType>> {
        Ok(self.enumerate_elements(cap)?.map(|g| g.cycle_type()).collect())
    }

    /// Element orders occurring in the group.
    pub fn order_census(&self, cap: u64) -> Result<BTreeSet<u64>> {
        Ok(self.enumerate_elements(cap)?.map(|g| g.order()).collect())
    }

    /// A uniformly random element: independent uniform transversal choices along the base.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Permutation {
        let mut g = Permutation::identity(self.degree);
        for level in self.levels.iter().rev() {
            let b = level.orbit[rng.gen_range(0..level.orbit.len())];
            g = g.then(level.transversal[b].as_ref().unwrap());
        }
        g
    }

    pub fn uniform_random_element(&self, seed: u64) -> Permutation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.random_element(&mut rng)
    }

    /// Conjugacy classes by orbit partition under conjugation, over full enumeration.
    pub fn conjugacy_classes(&self, cap: u64) -> Result<Vec<Vec<Permutation>>> {
        let elements: Vec<Permutation> = self.enumerate_elements(cap)?.collect();
        let index: HashMap<&Permutation, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let gens = if self.generators.is_empty() { self.strong_generators() } else { self.generators.clone() };
        let inv: Vec<Permutation> = gens.iter().map(|g| g.inverse()).collect();
        let mut class_of = vec![usize::MAX; elements.len()];
        let mut classes = Vec::new();
        for start in 0..elements.len() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let cid = classes.len();
            class_of[start] = cid;
            let mut members = vec![start];
            let mut i = 0;
            while i < members.len() {
                let x = &elements[members[i]];
                for (g, gi) in gens.iter().zip(&inv) {
                    let y = gi.then(x).then(g);
                    let yi = index[&y];
                    if class_of[yi] == usize::MAX {
                        class_of[yi] = cid;
                        members.push(yi);
                    }
                }
                i += 1;
            }
            let mut class: Vec<Permutation> = members.into_iter().map(|m| elements[m].clone()).collect();
            class.sort();
            classes.push(class);
        }
        classes.sort_by(|a, b| a[0].cmp(&b[0]));
        Ok(classes)
    }
}

/// Iterator over all group elements; see [`PermutationGroup::enumerate_elements`].
pub struct ElementIter<'a> {
    group: &'a PermutationGroup,
    /// Position in each level's orbit; level 0 varies fastest.
    digits: Vec<usize>,
    /// `prefix[i]` is the product of the chosen transversals of levels `i..`, deepest first.
    prefix: Vec<Permutation>,
    done: bool,
}

impl<'a> ElementIter<'a> {
    fn new(group: &'a PermutationGroup) -> Self {
        let k = group.levels.len();
        let mut it = ElementIter {
            group,
            digits: vec![0; k],
            prefix: vec![Permutation::identity(group.degree); k + 1],
            done: false,
        };
        it.recompute_from(k);
        it
    }

    fn recompute_from(&mut self, top: usize) {
        for i in (0..top).rev() {
            let level = &self.group.levels[i];
            let b = level.orbit[self.digits[i]];
            self.prefix[i] = self.prefix[i + 1].then(level.transversal[b].as_ref().unwrap());
        }
    }
}

impl Iterator for ElementIter<'_> {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        let out = self.prefix[0].clone();
        let k = self.digits.len();
        let mut i = 0;
        loop {
            if i == k {
                self.done = true;
                break;
            }
            self.digits[i] += 1;
            if self.digits[i] < self.group.levels[i].orbit.len() {
                self.recompute_from(i + 1);
                break;
            }
            self.digits[i] = 0;
            i += 1;
        }
        Some(out)
    }
}
