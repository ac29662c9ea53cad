//! Incidence graphs of exceptional curves, their automorphism groups, the Weyl group
//! action, and the substructures of the 27 lines (tritangent triangles, double-sixes,
//! triple-nines).

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::lattice::{pair_unchecked, reflect_unchecked, DegreeContext, LatticeVector};
use crate::permgroup::{Permutation, PermutationGroup};
use crate::refine::{self, LabeledGraph};
use crate::{Error, Result};

/// Numbers of exceptional curves, indexed by degree 1..=7.
pub const EXPECTED_CLASS_COUNTS: [usize; 7] = [240, 56, 27, 16, 10, 6, 3];
/// Orders of `W(E8), W(E7), W(E6), W(D5), S5, D6, S2`.
pub const EXPECTED_AUT_ORDERS: [u64; 7] = [696_729_600, 2_903_040, 51_840, 1_920, 120, 12, 2];
/// `2^7 * 3^4 * 5`.
pub const W_E6_ORDER: u64 = 128 * 81 * 5;

pub fn expected_class_count(d: u32) -> usize {
    EXPECTED_CLASS_COUNTS[d as usize - 1]
}

pub fn expected_aut_order(d: u32) -> u64 {
    EXPECTED_AUT_ORDERS[d as usize - 1]
}

/// The edge-labeled graph of exceptional curves; labels are intersection numbers.
#[derive(Clone, Debug)]
pub struct IncidenceGraph {
    ctx: DegreeContext,
    vertices: Vec<LatticeVector>,
    graph: LabeledGraph,
}

impl IncidenceGraph {
    pub fn build(ctx: &DegreeContext) -> Self {
        let vertices = ctx.enumerate_exceptional_classes();
        let graph = LabeledGraph::from_fn(vertices.len(), |i, j| pair_unchecked(&vertices[i], &vertices[j]));
        IncidenceGraph { ctx: ctx.clone(), vertices, graph }
    }

    pub fn for_degree(d: u32) -> Result<Self> {
        Ok(Self::build(&DegreeContext::new(d)?))
    }

    pub fn context(&self) -> &DegreeContext {
        &self.ctx
    }

    pub fn vertices(&self) -> &[LatticeVector] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn label(&self, i: usize, j: usize) -> i64 {
        self.graph.label(i, j)
    }

    pub fn labeled_graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn index_of(&self, v: &LatticeVector) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    /// Vertices meeting `i` with the given intersection number.
    pub fn neighbors(&self, i: usize, label: i64) -> Vec<usize> {
        (0..self.len()).filter(|&j| j != i && self.label(i, j) == label).collect()
    }

    pub fn automorphism_group(&self) -> Result<PermutationGroup> {
        refine::automorphism_group(&self.graph)
    }

    /// Simple-root reflections as permutations of the vertex list.
    pub fn weyl_generators(&self) -> Vec<Permutation> {
        let index: HashMap<&LatticeVector, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        self.ctx
            .simple_roots()
            .iter()
            .map(|root| {
                let images = self.vertices.iter().map(|v| index[&reflect_unchecked(root, v)]).collect();
                Permutation::new(images).expect("reflections permute exceptional classes")
            })
            .collect()
    }

    pub fn weyl_image(&self) -> Result<PermutationGroup> {
        PermutationGroup::from_generators(self.len(), &self.weyl_generators())
    }
}

/// The Weyl group generated by simple-root reflections, acting on the exceptional classes.
pub fn weyl_image(ctx: &DegreeContext) -> Result<PermutationGroup> {
    IncidenceGraph::build(ctx).weyl_image()
}

/// One verified claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim: String,
    pub expected: Value,
    pub computed: Value,
    pub pass: bool,
}

impl ClaimRecord {
    pub fn new(claim: impl Into<String>, expected: Value, computed: Value) -> Self {
        let pass = expected == computed;
        ClaimRecord { claim: claim.into(), expected, computed, pass }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<ClaimRecord>,
}

impl VerificationReport {
    pub fn push(&mut self, r: ClaimRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&ClaimRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }
}

/// Options for the per-degree check.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Compute `Aut(Gamma_1)` by search instead of only checking `W(E8) <= Aut(Gamma_1)`.
    pub full_aut_degree_one: bool,
}

/// Line count and automorphism order for one degree.
pub fn verify_degree(d: u32, opts: VerifyOptions) -> Result<VerificationReport> {
    let g = IncidenceGraph::for_degree(d)?;
    let mut report = VerificationReport::default();
    report.push(ClaimRecord::new(format!("d={d}: n_d"), json!(expected_class_count(d)), json!(g.len())));
    let w = g.weyl_image()?;
    let w_in_aut = w.generators().iter().all(|p| g.labeled_graph().preserved_by(p));
    report.push(ClaimRecord::new(format!("d={d}: W <= Aut(Gamma_d)"), json!(true), json!(w_in_aut)));
    report.push(ClaimRecord::new(
        format!("d={d}: |W|"),
        json!(expected_aut_order(d)),
        json!(w.order().to_string().parse::<u64>().unwrap_or(0)),
    ));
    if d >= 2 || opts.full_aut_degree_one {
        let aut = g.automorphism_group()?;
        report.push(ClaimRecord::new(
            format!("d={d}: |Aut(Gamma_d)|"),
            json!(expected_aut_order(d)),
            json!(aut.order_u64()),
        ));
    }
    Ok(report)
}

/// Every degree, plus `|W(E6)| = 2^7 3^4 5`.
pub fn verify_all_degrees(opts: VerifyOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    for d in 1..=7 {
        report.extend(verify_degree(d, opts)?);
    }
    report.push(ClaimRecord::new("|W(E6)| = 2^7*3^4*5", json!(W_E6_ORDER), json!(expected_aut_order(3))));
    Ok(report)
}

/// Orbit-stabilizer and blow-down transport for degree `d` in 1..=6.
pub fn stabilizer_chain_check(d: u32) -> Result<VerificationReport> {
    if !(1..=6).contains(&d) {
        return Err(Error::Precondition(format!("stabilizer chain needs 1 <= d <= 6, got {d}")));
    }
    let g = IncidenceGraph::for_degree(d)?;
    let up = IncidenceGraph::for_degree(d + 1)?;
    let ctx = g.context();
    let w = g.weyl_image()?;
    let mut report = VerificationReport::default();
    report.push(ClaimRecord::new(format!("d={d}: W transitive"), json!(true), json!(w.is_transitive())));

    let e = LatticeVector::exceptional(ctx.rank(), ctx.points());
    let p = g.index_of(&e).expect("E_last is exceptional");
    let stab = w.stabilizer_of_point(p)?;
    let aut_order = if d >= 2 { g.automorphism_group()?.order_u64() } else { w.order_u64() };
    report.push(ClaimRecord::new(
        format!("d={d}: |Stab(line)| = |Aut(Gamma_d)|/n_d"),
        json!(aut_order / g.len() as u64),
        json!(stab.order_u64()),
    ));

    let map = ctx.blow_down_correspondence(&e)?;
    let to_up: HashMap<usize, usize> = map.iter().copied().collect();
    let from_up: HashMap<usize, usize> = map.iter().map(|&(i, j)| (j, i)).collect();
    let mut transported = Vec::new();
    for s in stab.strong_generators() {
        let images: Vec<usize> = (0..up.len()).map(|j| to_up[&s.apply(from_up[&j])]).collect();
        transported.push(Permutation::new(images)?);
    }
    let preserves = transported.iter().all(|t| up.labeled_graph().preserved_by(t));
    report.push(ClaimRecord::new(
        format!("d={d}: transported stabilizer preserves Gamma_{}", d + 1),
        json!(true),
        json!(preserves),
    ));
    let image = PermutationGroup::from_generators(up.len(), &transported)?;
    let up_aut = up.automorphism_group()?.order_u64();
    report.push(ClaimRecord::new(
        format!("d={d}: transported stabilizer = Aut(Gamma_{})", d + 1),
        json!(up_aut),
        json!(image.order_u64()),
    ));
    report.push(ClaimRecord::new(
        format!("d={d}: transport is injective"),
        json!(stab.order_u64()),
        json!(image.order_u64()),
    ));
    Ok(report)
}

/// Bitmask of a set of lines (27 fits in 32 bits).
pub type LineSet = u32;

pub fn mask(lines: &[usize]) -> LineSet {
    lines.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn members(m: LineSet) -> Vec<usize> {
    (0..32).filter(|i| m & (1 << i) != 0).collect()
}

fn permute_mask(p: &Permutation, m: LineSet) -> LineSet {
    members(m).into_iter().fold(0, |acc, i| acc | (1 << p.apply(i)))
}

/// Two sixes `a` and `b`, with `a[i]` skew to `b[i]` and meeting every other `b[j]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DoubleSix {
    pub a: [usize; 6],
    pub b: [usize; 6],
}

impl DoubleSix {
    pub fn masks(&self) -> (LineSet, LineSet) {
        let (x, y) = (mask(&self.a), mask(&self.b));
        (x.min(y), x.max(y))
    }

    /// Whether `p` maps this double-six onto itself (possibly swapping the sixes).
    pub fn stabilized_by(&self, p: &Permutation) -> bool {
        let (x, y) = self.masks();
        let (px, py) = (permute_mask(p, x), permute_mask(p, y));
        (px.min(py), px.max(py)) == (x, y)
    }
}

/// A partition of the 27 lines into three trihedral-pair nines, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripleNine {
    pub nines: [LineSet; 3],
}

impl TripleNine {
    fn new(mut nines: [LineSet; 3]) -> Self {
        nines.sort_unstable();
        TripleNine { nines }
    }

    /// Each nine mapped to itself.
    pub fn componentwise_stabilized_by(&self, p: &Permutation) -> bool {
        self.nines.iter().all(|&n| permute_mask(p, n) == n)
    }

    /// The partition mapped to itself.
    pub fn stabilized_by(&self, p: &Permutation) -> bool {
        let mut img = self.nines.map(|n| permute_mask(p, n));
        img.sort_unstable();
        img == self.nines
    }
}

/// The 27 lines with their substructures.
#[derive(Clone, Debug)]
pub struct Schlafli {
    pub graph: IncidenceGraph,
    pub tritangents: Vec<[usize; 3]>,
    pub double_sixes: Vec<DoubleSix>,
    pub trihedral_nines: Vec<LineSet>,
    pub triple_nines: Vec<TripleNine>,
}

impl Schlafli {
    pub fn build() -> Self {
        let graph = IncidenceGraph::for_degree(3).expect("degree 3 is supported");
        let tritangents = enumerate_tritangent_triangles(&graph);
        let double_sixes = enumerate_double_sixes(&graph);
        let trihedral_nines = enumerate_trihedral_nines(&graph, &tritangents);
        let triple_nines = enumerate_triple_nines(&trihedral_nines);
        Schlafli { graph, tritangents, double_sixes, trihedral_nines, triple_nines }
    }

    pub fn tritangent_stabilized_by(t: &[usize; 3], p: &Permutation) -> bool {
        permute_mask(p, mask(t)) == mask(t)
    }

    /// Counts and transitivity of `group` on each collection.
    pub fn report(&self, group: &PermutationGroup) -> VerificationReport {
        let mut r = VerificationReport::default();
        r.push(ClaimRecord::new("tritangent triangles", json!(45), json!(self.tritangents.len())));
        let per_line: BTreeSet<usize> = (0..27)
            .map(|l| self.tritangents.iter().filter(|t| t.contains(&l)).count())
            .collect();
        r.push(ClaimRecord::new("triangles through each line", json!([5]), json!(per_line)));
        let meets: BTreeSet<usize> = (0..27).map(|l| self.graph.neighbors(l, 1).len()).collect();
        r.push(ClaimRecord::new("lines met by each line", json!([10]), json!(meets)));
        r.push(ClaimRecord::new("double-sixes", json!(36), json!(self.double_sixes.len())));
        r.push(ClaimRecord::new("trihedral-pair nines", json!(120), json!(self.trihedral_nines.len())));
        r.push(ClaimRecord::new("triple-nines", json!(40), json!(self.triple_nines.len())));

        let gens = group.generators();
        let tri: Vec<LineSet> = self.tritangents.iter().map(|t| mask(t)).collect();
        let tri_orbit = orbit_size(tri[0], gens, permute_mask);
        r.push(ClaimRecord::new("Aut transitive on tritangents", json!(tri.len()), json!(tri_orbit)));
        let ds: Vec<(LineSet, LineSet)> = self.double_sixes.iter().map(|d| d.masks()).collect();
        let ds_orbit = orbit_size(ds[0], gens, |p, (x, y)| {
            let (px, py) = (permute_mask(p, x), permute_mask(p, y));
            (px.min(py), px.max(py))
        });
        r.push(ClaimRecord::new("Aut transitive on double-sixes", json!(ds.len()), json!(ds_orbit)));
        let tn_orbit = orbit_size(self.triple_nines[0].nines, gens, |p, n| {
            let mut img = n.map(|m| permute_mask(p, m));
            img.sort_unstable();
            img
        });
        r.push(ClaimRecord::new("Aut transitive on triple-nines", json!(self.triple_nines.len()), json!(tn_orbit)));
        r
    }
}

fn orbit_size<T: Copy + Eq + std::hash::Hash>(
    start: T,
    gens: &[Permutation],
    act: impl Fn(&Permutation, T) -> T,
) -> usize {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = act(g, x);
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len()
}

/// Triples of lines whose classes sum to `-K`.
pub fn enumerate_tritangent_triangles(g: &IncidenceGraph) -> Vec<[usize; 3]> {
    let minus_k = g.context().canonical_class().scale(-1);
    let v = g.vertices();
    let mut out = Vec::new();
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            for c in b + 1..v.len() {
                if v[a].add(&v[b]).add(&v[c]) == minus_k {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn skew_sixes(g: &IncidenceGraph) -> Vec<[usize; 6]> {
    fn grow(g: &IncidenceGraph, cur: &mut Vec<usize>, start: usize, out: &mut Vec<[usize; 6]>) {
        if cur.len() == 6 {
            out.push(cur.as_slice().try_into().unwrap());
            return;
        }
        for x in start..g.len() {
            if cur.iter().all(|&y| g.label(x, y) == 0) {
                cur.push(x);
                grow(g, cur, x + 1, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(g, &mut Vec::new(), 0, &mut out);
    out
}

/// Every double-six, with `a` the lexicographically smaller six.
pub fn enumerate_double_sixes(g: &IncidenceGraph) -> Vec<DoubleSix> {
    let sixes = skew_sixes(g);
    let mut out = BTreeSet::new();
    for a in &sixes {
        let mut b = [usize::MAX; 6];
        let mut ok = true;
        for i in 0..6 {
            let partners: Vec<usize> = (0..g.len())
                .filter(|&x| !a.contains(&x))
                .filter(|&x| (0..6).all(|j| g.label(x, a[j]) == if i == j { 0 } else { 1 }))
                .collect();
            if partners.len() != 1 {
                ok = false;
                break;
            }
            b[i] = partners[0];
        }
        if !ok || !(0..6).all(|i| (0..6).all(|j| i == j || g.label(b[i], b[j]) == 0)) {
            continue;
        }
        let ds = if mask(a) < mask(&b) {
            DoubleSix { a: *a, b }
        } else {
            let mut pairs: Vec<(usize, usize)> = b.iter().copied().zip(a.iter().copied()).collect();
            pairs.sort_unstable();
            DoubleSix { a: pairs.iter().map(|p| p.0).collect::<Vec<_>>().try_into().unwrap(), b: pairs.iter().map(|p| p.1).collect::<Vec<_>>().try_into().unwrap() }
        };
        out.insert(ds);
    }
    out.into_iter().collect()
}

/// Line sets of trihedral pairs: nine lines arranged 3x3 with every row and column a
/// tritangent triangle.
pub fn enumerate_trihedral_nines(g: &IncidenceGraph, tritangents: &[[usize; 3]]) -> Vec<LineSet> {
    let _ = g;
    let masks: Vec<LineSet> = tritangents.iter().map(|t| mask(t)).collect();
    let mut nines = BTreeSet::new();
    for i in 0..masks.len() {
        for j in i + 1..masks.len() {
            if masks[i] & masks[j] != 0 {
                continue;
            }
            for k in j + 1..masks.len() {
                if (masks[i] | masks[j]) & masks[k] != 0 {
                    continue;
                }
                let nine = masks[i] | masks[j] | masks[k];
                // columns: tritangents inside the nine meeting each row once
                let columns: Vec<LineSet> = masks
                    .iter()
                    .copied()
                    .filter(|&c| c & nine == c)
                    .filter(|&c| [masks[i], masks[j], masks[k]].iter().all(|r| (c & r).count_ones() == 1))
                    .collect();
                let has_three_disjoint = columns.iter().enumerate().any(|(a, &ca)| {
                    columns[a + 1..].iter().enumerate().any(|(b, &cb)| {
                        ca & cb == 0
                            && columns[a + 1 + b + 1..].iter().any(|&cc| (ca | cb) & cc == 0)
                    })
                });
                if has_three_disjoint {
                    nines.insert(nine);
                }
            }
        }
    }
    nines.into_iter().collect()
}

/// Partitions of the 27 lines into three trihedral-pair nines.
pub fn enumerate_triple_nines(nines: &[LineSet]) -> Vec<TripleNine> {
    let all: LineSet = (1 << 27) - 1;
    let set: HashSet<LineSet> = nines.iter().copied().collect();
    let mut out = BTreeSet::new();
    for (i, &a) in nines.iter().enumerate() {
        for &b in &nines[i + 1..] {
            if a & b != 0 {
                continue;
            }
            let c = all & !(a | b);
            if set.contains(&c) {
                out.insert(TripleNine::new([a, b, c]));
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_seven_graph_is_a_path() {
        let g = IncidenceGraph::for_degree(7).unwrap();
        let mid = g.index_of(&LatticeVector(vec![1, -1, -1])).unwrap();
        let e1 = g.index_of(&LatticeVector(vec![0, 1, 0])).unwrap();
        let e2 = g.index_of(&LatticeVector(vec![0, 0, 1])).unwrap();
        assert_eq!(g.label(e1, mid), 1);
        assert_eq!(g.label(e2, mid), 1);
        assert_eq!(g.label(e1, e2), 0);
        for i in 0..3 {
            assert_eq!(g.label(i, i), -1);
        }
    }

    #[test]
    fn petersen_structure_in_degree_five() {
        let g = IncidenceGraph::for_degree(5).unwrap();
        let mut edges = 0;
        for i in 0..10 {
            assert_eq!(g.neighbors(i, 1).len(), 3);
            edges += g.neighbors(i, 1).len();
        }
        assert_eq!(edges / 2, 15);
    }

    #[test]
    fn cubic_lines_meet_ten() {
        let g = IncidenceGraph::for_degree(3).unwrap();
        for i in 0..27 {
            assert_eq!(g.neighbors(i, 1).len(), 10);
        }
    }

    #[test]
    fn small_automorphism_groups() {
        for (d, order) in [(7, 2), (6, 12), (5, 120), (4, 1920), (3, 51840)] {
            let g = IncidenceGraph::for_degree(d).unwrap();
            assert_eq!(g.automorphism_group().unwrap().order_u64(), order, "d={d}");
        }
    }

    #[test]
    fn weyl_orders() {
        for (d, order) in [(7, 2), (6, 12), (5, 120), (4, 1920), (3, 51840)] {
            assert_eq!(weyl_image(&DegreeContext::new(d).unwrap()).unwrap().order_u64(), order);
        }
    }

    #[test]
    fn degree_seven_orbits_and_stabilizer() {
        let g = IncidenceGraph::for_degree(7).unwrap();
        let w = g.weyl_image().unwrap();
        assert!(!w.is_transitive());
        let mid = g.index_of(&LatticeVector(vec![1, -1, -1])).unwrap();
        assert_eq!(w.orbit(mid).unwrap().len(), 1);
        let aut = g.automorphism_group().unwrap();
        assert_eq!(aut.stabilizer_of_point(mid).unwrap().order_u64(), 2);
    }

    #[test]
    fn chain_for_degree_three() {
        let r = stabilizer_chain_check(3).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
        let stab = r.records.iter().find(|c| c.claim.contains("Stab")).unwrap();
        assert_eq!(stab.computed, json!(1920));
    }

    #[test]
    fn chain_for_degree_six() {
        let r = stabilizer_chain_check(6).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures());
        let stab = r.records.iter().find(|c| c.claim.contains("Stab")).unwrap();
        assert_eq!(stab.computed, json!(2));
    }

    #[test]
    fn chain_rejects_degree_seven() {
        assert!(stabilizer_chain_check(7).is_err());
    }

    #[test]
    fn schlafli_counts() {
        let s = Schlafli::build();
        assert_eq!(s.tritangents.len(), 45);
        assert_eq!(s.double_sixes.len(), 36);
        assert_eq!(s.triple_nines.len(), 40);
        for ds in &s.double_sixes {
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        assert_eq!(s.graph.label(ds.a[i], ds.a[j]), 0);
                        assert_eq!(s.graph.label(ds.b[i], ds.b[j]), 0);
                    }
                    assert_eq!(s.graph.label(ds.a[i], ds.b[j]), if i == j { 0 } else { 1 });
                }
            }
        }
        let aut = s.graph.automorphism_group().unwrap();
        let r = s.report(&aut);
        assert!(r.all_pass(), "{:?}", r.failures());
    }

    #[test]
    fn tritangent_example_and_rejection() {
        let g = IncidenceGraph::for_degree(3).unwrap();
        let tris = enumerate_tritangent_triangles(&g);
        let e1 = g.index_of(&LatticeVector::exceptional(7, 1)).unwrap();
        let l12 = g.index_of(&LatticeVector(vec![1, -1, -1, 0, 0, 0, 0])).unwrap();
        // E1 + (H - E1 - E2) + (2H - E1 - E3 - E4 - E5 - E6) = 3H - sum E_i = -K
        let c = g.index_of(&LatticeVector(vec![2, -1, 0, -1, -1, -1, -1])).unwrap();
        let mut t = [e1, l12, c];
        t.sort();
        assert!(tris.contains(&t));
        // E1, E2, E3 are pairwise skew
        let skew: Vec<usize> = (1..=3).map(|i| g.index_of(&LatticeVector::exceptional(7, i)).unwrap()).collect();
        assert!(!tris.iter().any(|t| skew.iter().all(|x| t.contains(x))));
    }
}
