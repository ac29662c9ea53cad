//! Automorphisms and isomorphisms of edge-labeled complete graphs by equitable partition
//! refinement and backtracking.

use std::collections::BTreeMap;

use crate::permgroup::{Permutation, PermutationGroup};
use crate::Result;

/// A complete graph with an integer label on every ordered pair (symmetric).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    labels: Vec<i64>,
}

impl LabeledGraph {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut labels = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                labels.push(f(i, j));
            }
        }
        LabeledGraph { n, labels }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn label(&self, i: usize, j: usize) -> i64 {
        self.labels[i * self.n + j]
    }

    /// Whether `p` maps every label onto itself.
    pub fn preserved_by(&self, p: &Permutation) -> bool {
        p.degree() == self.n
            && (0..self.n).all(|i| (0..self.n).all(|j| self.label(i, j) == self.label(p.apply(i), p.apply(j))))
    }

    /// Whether `map` (vertex of `self` to vertex of `other`) preserves labels.
    pub fn is_isomorphism(&self, other: &LabeledGraph, map: &[usize]) -> bool {
        self.n == other.n
            && map.len() == self.n
            && (0..self.n).all(|i| (0..self.n).all(|j| self.label(i, j) == other.label(map[i], map[j])))
    }

    /// Distinct labels in ascending order.
    fn label_codes(&self) -> Vec<i64> {
        let mut v = self.labels.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Dense relabelling shared by both sides of a search so traces are comparable.
struct Coded<'a> {
    graph: &'a LabeledGraph,
    codes: Vec<u8>,
    nlabels: usize,
}

impl<'a> Coded<'a> {
    fn new(graph: &'a LabeledGraph, alphabet: &[i64]) -> Option<Self> {
        let index: BTreeMap<i64, u8> = alphabet.iter().enumerate().map(|(i, &l)| (l, i as u8)).collect();
        let codes = graph.labels.iter().map(|l| index.get(l).copied()).collect::<Option<Vec<u8>>>()?;
        Some(Coded { graph, codes, nlabels: alphabet.len() })
    }

    #[inline]
    fn code(&self, i: usize, j: usize) -> usize {
        self.codes[i * self.graph.n + j] as usize
    }

    /// Refine `cells` to the coarsest equitable partition, appending an invariant trace.
    fn refine(&self, cells: &mut Vec<Vec<usize>>, trace: &mut Vec<u32>) {
        let mut changed = true;
        while changed {
            changed = false;
            let mut s = 0;
            while s < cells.len() {
                let splitter = cells[s].clone();
                let mut c = 0;
                while c < cells.len() {
                    if cells[c].len() > 1 {
                        if let Some(parts) = self.split(&cells[c], &splitter, trace, c, s) {
                            let k = parts.len();
                            cells.splice(c..=c, parts);
                            changed = true;
                            c += k;
                            continue;
                        }
                    }
                    c += 1;
                }
                s += 1;
            }
        }
        trace.push(u32::MAX);
        trace.push(cells.len() as u32);
    }

    fn split(
        &self,
        cell: &[usize],
        splitter: &[usize],
        trace: &mut Vec<u32>,
        c: usize,
        s: usize,
    ) -> Option<Vec<Vec<usize>>> {
        let mut groups: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
        for &v in cell {
            let mut sig = vec![0u32; self.nlabels];
            for &u in splitter {
                sig[self.code(v, u)] += 1;
            }
            groups.entry(sig).or_default().push(v);
        }
        if groups.len() == 1 {
            return None;
        }
        trace.extend([c as u32, s as u32, groups.len() as u32]);
        let mut parts = Vec::with_capacity(groups.len());
        for (sig, members) in groups {
            trace.push(members.len() as u32);
            trace.extend(sig);
            parts.push(members);
        }
        Some(parts)
    }
}

fn individualize(cells: &[Vec<usize>], c: usize, x: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.extend_from_slice(&cells[..c]);
    out.push(vec![x]);
    out.push(cells[c].iter().copied().filter(|&y| y != x).collect());
    out.extend_from_slice(&cells[c + 1..]);
    out
}

fn first_nonsingleton(cells: &[Vec<usize>]) -> Option<usize> {
    cells.iter().position(|c| c.len() > 1)
}

/// Depth-first search for a label-preserving map sending the left partition onto the right
/// one cell by cell.
fn extend(left: &Coded, right: &Coded, lcells: Vec<Vec<usize>>, rcells: Vec<Vec<usize>>) -> Option<Vec<usize>> {
    let Some(c) = first_nonsingleton(&lcells) else {
        let mut map = vec![0; left.graph.n];
        for (l, r) in lcells.iter().zip(&rcells) {
            map[l[0]] = r[0];
        }
        return left.graph.is_isomorphism(right.graph, &map).then_some(map);
    };
    let x = lcells[c][0];
    let mut lnext = individualize(&lcells, c, x);
    let mut ltrace = Vec::new();
    left.refine(&mut lnext, &mut ltrace);
    for &y in &rcells[c] {
        let mut rnext = individualize(&rcells, c, y);
        let mut rtrace = Vec::new();
        right.refine(&mut rnext, &mut rtrace);
        if rtrace != ltrace || !same_shape(&lnext, &rnext) {
            continue;
        }
        if let Some(m) = extend(left, right, lnext.clone(), rnext) {
            return Some(m);
        }
    }
    None
}

fn same_shape(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.len() == y.len())
}

/// A label-preserving bijection from `a` to `b`, if one exists.
pub fn find_isomorphism(a: &LabeledGraph, b: &LabeledGraph) -> Option<Vec<usize>> {
    if a.n != b.n {
        return None;
    }
    let alphabet = a.label_codes();
    if alphabet != b.label_codes() {
        return None;
    }
    let left = Coded::new(a, &alphabet)?;
    let right = Coded::new(b, &alphabet)?;
    let mut lcells = vec![(0..a.n).collect::<Vec<_>>()];
    let mut rcells = vec![(0..b.n).collect::<Vec<_>>()];
    let (mut lt, mut rt) = (Vec::new(), Vec::new());
    left.refine(&mut lcells, &mut lt);
    right.refine(&mut rcells, &mut rt);
    if lt != rt || !same_shape(&lcells, &rcells) {
        return None;
    }
    extend(&left, &right, lcells, rcells)
}

/// The full group of label-preserving vertex permutations.
///
/// Walks the first-cell individualization path to get a base, then, from the deepest level up,
/// tests every candidate image of each base point that is not yet in the orbit of the
/// generators found so far.
pub fn automorphism_group(g: &LabeledGraph) -> Result<PermutationGroup> {
    let n = g.n;
    if n == 0 {
        return PermutationGroup::from_generators(0, &[]);
    }
    let alphabet = g.label_codes();
    let coded = Coded::new(g, &alphabet).expect("labels come from the graph");
    let mut cells = vec![(0..n).collect::<Vec<_>>()];
    coded.refine(&mut cells, &mut Vec::new());
    let mut path: Vec<(Vec<Vec<usize>>, usize, usize)> = Vec::new();
    while let Some(c) = first_nonsingleton(&cells) {
        let x = cells[c][0];
        let mut next = individualize(&cells, c, x);
        coded.refine(&mut next, &mut Vec::new());
        path.push((cells, c, x));
        cells = next;
    }
    let base: Vec<usize> = path.iter().map(|(_, _, x)| *x).collect();
    let mut found: Vec<(usize, Permutation)> = Vec::new();
    for (level, (cells, c, x)) in path.iter().enumerate().rev() {
        let gens: Vec<&Permutation> = found.iter().filter(|(l, _)| *l >= level).map(|(_, p)| p).collect();
        let mut orbit = orbit_of(*x, n, &gens);
        let mut lnext = individualize(cells, *c, *x);
        let mut ltrace = Vec::new();
        coded.refine(&mut lnext, &mut ltrace);
        for &y in &cells[*c] {
            if orbit[y] {
                continue;
            }
            let mut rnext = individualize(cells, *c, y);
            let mut rtrace = Vec::new();
            coded.refine(&mut rnext, &mut rtrace);
            if rtrace != ltrace || !same_shape(&lnext, &rnext) {
                continue;
            }
            if let Some(map) = extend(&coded, &coded, lnext.clone(), rnext) {
                let p = Permutation::new(map).expect("search returns bijections");
                found.push((level, p));
                let gens: Vec<&Permutation> =
                    found.iter().filter(|(l, _)| *l >= level).map(|(_, p)| p).collect();
                orbit = orbit_of(*x, n, &gens);
            }
        }
    }
    let gens: Vec<Permutation> = found.into_iter().map(|(_, p)| p).collect();
    PermutationGroup::with_base_prefix(n, &gens, &base)
}

fn orbit_of(x: usize, n: usize, gens: &[&Permutation]) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut stack = vec![x];
    while let Some(a) = stack.pop() {
        for g in gens {
            let b = g.apply(a);
            if !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}
