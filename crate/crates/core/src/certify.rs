//! Conjugacy-class tables of `W(E6)` acting on the 27 lines, cycle-type sets of stabilizer
//! subgroups, certificates drawn from Frobenius evidence, and a cyclic `H^1` oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{IncidenceGraph, Schlafli, W_E6_ORDER};
use crate::lattice::LatticeVector;
use crate::permgroup::{CycleType, Permutation};
use crate::surface::FrobeniusEvidence;
use crate::{Error, Result};

/// Index into [`ClassTable::classes`].
pub type ClassId = usize;

/// One conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub id: ClassId,
    pub cycle_type: CycleType,
    pub order: u64,
    pub size: u64,
    /// Characteristic polynomial on the rank-6 root lattice, constant term first.
    pub char_poly: Vec<i64>,
    /// Determinant on the lattice.
    pub det: i64,
    /// `fixed_lines[m-1]` = fixed lines of the `m`-th power, `m = 1..=order`.
    pub fixed_lines: Vec<usize>,
    /// `traces[m-1]` = trace of the `m`-th power on the rank-7 lattice, `m = 1..=order`.
    pub traces: Vec<i64>,
    /// Least element of the class, as images of the lines `0..27`.
    pub representative: Vec<usize>,
}

impl ClassRecord {
    pub fn representative(&self) -> Permutation {
        Permutation::new(self.representative.clone()).expect("stored representative is a permutation")
    }

    /// Trace on the rank-7 lattice of the `m`-th power (`m >= 1`).
    pub fn trace(&self, m: u64) -> i64 {
        self.traces[((m - 1) % self.order) as usize]
    }

    pub fn fixed_lines_of_power(&self, m: u64) -> usize {
        self.fixed_lines[((m - 1) % self.order) as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTable {
    pub group_order: u64,
    pub classes: Vec<ClassRecord>,
    pub cycle_types_separate: bool,
    pub char_polys_separate: bool,
}

impl ClassTable {
    pub fn class(&self, id: ClassId) -> &ClassRecord {
        &self.classes[id]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Classes agreeing with every trace and line count in the evidence.
    pub fn consistent_classes(&self, ev: &FrobeniusEvidence) -> Vec<ClassId> {
        self.classes
            .iter()
            .filter(|c| {
                ev.traces.iter().enumerate().all(|(i, &t)| c.trace(i as u64 + 1) == t)
                    && ev.line_counts.iter().enumerate().all(|(i, &l)| c.fixed_lines_of_power(i as u64 + 1) == l)
            })
            .map(|c| c.id)
            .collect()
    }

    pub fn class_of(&self, p: &Permutation) -> Option<ClassId> {
        let ct = p.cycle_type();
        let poly = if self.cycle_types_separate { None } else { Some(PicLattice::get().lift(p).ok()?.root_char_poly()) };
        self.classes
            .iter()
            .filter(|c| c.cycle_type == ct && poly.as_ref().map_or(true, |q| *q == c.char_poly))
            .map(|c| c.id)
            .next()
    }

    pub fn content_hash(&self) -> String {
        content_hash(self)
    }
}

/// SHA-256 of the compact JSON serialization, as lowercase hex.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("tables serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Integer square matrix, row-major.
pub type IntMatrix = Vec<Vec<i64>>;

/// The rank-7 lattice spanned by `H, E1..E6` with the 27 line classes.
pub struct PicLattice {
    graph: IncidenceGraph,
    /// Line indices of `E1..E6` and `H - E1 - E2`.
    e: [usize; 6],
    h12: usize,
}

/// A lattice automorphism induced by a permutation of the lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeLift {
    /// Column `j` is the image of basis vector `j`.
    pub matrix: IntMatrix,
}

impl PicLattice {
    pub fn new() -> Self {
        let graph = IncidenceGraph::for_degree(3).expect("degree 3 is supported");
        let e = [1, 2, 3, 4, 5, 6].map(|i| graph.index_of(&LatticeVector::exceptional(7, i)).unwrap());
        let h12 = graph.index_of(&LatticeVector(vec![1, -1, -1, 0, 0, 0, 0])).unwrap();
        PicLattice { graph, e, h12 }
    }

    pub fn get() -> &'static PicLattice {
        static CELL: OnceLock<PicLattice> = OnceLock::new();
        CELL.get_or_init(PicLattice::new)
    }

    pub fn graph(&self) -> &IncidenceGraph {
        &self.graph
    }

    /// The linear map sending each line class to the class of its image.
    pub fn lift(&self, sigma: &Permutation) -> Result<LatticeLift> {
        if sigma.degree() != 27 {
            return Err(Error::Dimension { expected: 27, found: sigma.degree() });
        }
        let v = |i: usize| &self.graph.vertices()[sigma.apply(i)];
        let h = v(self.e[0]).add(v(self.e[1])).add(v(self.h12));
        let mut cols = vec![h.0];
        cols.extend(self.e.iter().map(|&i| v(i).0.clone()));
        let matrix: IntMatrix = (0..7).map(|r| (0..7).map(|c| cols[c][r]).collect()).collect();
        let lift = LatticeLift { matrix };
        for (i, line) in self.graph.vertices().iter().enumerate() {
            if lift.apply(&line.0) != v(i).0 {
                return Err(Error::NotIncidencePreserving);
            }
        }
        Ok(lift)
    }
}

impl Default for PicLattice {
    fn default() -> Self {
        Self::new()
    }
}

impl LatticeLift {
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.matrix.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn trace(&self) -> i64 {
        (0..7).map(|i| self.matrix[i][i]).sum()
    }

    pub fn pow(&self, m: u64) -> LatticeLift {
        let mut acc = LatticeLift { matrix: identity(7) };
        for _ in 0..m {
            acc.matrix = matmul(&acc.matrix, &self.matrix);
        }
        acc
    }

    /// Characteristic polynomial on the rank-7 lattice, constant term first.
    pub fn char_poly(&self) -> Vec<i64> {
        char_poly(&self.matrix)
    }

    /// The rank-7 characteristic polynomial divided by `x - 1` (the eigenvalue on `K`).
    pub fn root_char_poly(&self) -> Vec<i64> {
        let c = self.char_poly();
        let n = c.len() - 1;
        let mut q = vec![0i64; n];
        let mut carry = 0;
        for i in (0..n).rev() {
            carry += c[i + 1];
            q[i] = carry;
        }
        debug_assert_eq!(carry + c[0], 0, "1 is an eigenvalue");
        q
    }

    pub fn det(&self) -> i64 {
        let c = self.char_poly();
        if (c.len() - 1) % 2 == 0 {
            c[0]
        } else {
            -c[0]
        }
    }
}

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

fn matmul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Faddeev-LeVerrier, constant term first.
fn char_poly(a: &IntMatrix) -> Vec<i64> {
    let n = a.len();
    let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut mk = vec![vec![0i128; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a128[i][l] * mk[l][j]).sum::<i128>();
            }
            next[i][i] += c[n - k + 1];
        }
        mk = next;
        let tr: i128 = (0..n).map(|i| (0..n).map(|l| a128[i][l] * mk[l][i]).sum::<i128>()).sum();
        c[n - k] = -tr / k as i128;
    }
    c.into_iter().map(|x| x as i64).collect()
}

/// Power sums `p_1..p_count` of the roots of a monic polynomial (constant term first).
pub fn newton_power_sums(poly: &[i64], count: usize) -> Vec<i64> {
    let n = poly.len() - 1;
    let a = |i: usize| poly[n - i];
    let mut p: Vec<i64> = Vec::with_capacity(count);
    for k in 1..=count {
        let mut s = if k <= n { k as i64 * a(k) } else { 0 };
        for i in 1..k.min(n + 1) {
            s += a(i) * p[k - i - 1];
        }
        p.push(-s);
    }
    p
}

/// The full class table, built by enumerating all 51840 elements.
pub fn build_class_table() -> Result<ClassTable> {
    let lattice = PicLattice::get();
    let group = lattice.graph.weyl_image()?;
    let classes = group.conjugacy_classes(W_E6_ORDER)?;
    let mut records = Vec::with_capacity(classes.len());
    for class in &classes {
        let rep = &class[0];
        let lift = lattice.lift(rep)?;
        let order = rep.order();
        let char_poly = lift.root_char_poly();
        let traces = newton_power_sums(&char_poly, order as usize).into_iter().map(|s| 1 + s).collect();
        let fixed_lines = (1..=order).map(|m| rep.pow(m).fixed_points()).collect();
        records.push(ClassRecord {
            id: 0,
            cycle_type: rep.cycle_type(),
            order,
            size: class.len() as u64,
            det: lift.det(),
            char_poly,
            fixed_lines,
            traces,
            representative: rep.images(),
        });
    }
    records.sort_by(|a, b| {
        (a.order, &a.cycle_type, &a.char_poly, &a.representative).cmp(&(
            b.order,
            &b.cycle_type,
            &b.char_poly,
            &b.representative,
        ))
    });
    for (i, r) in records.iter_mut().enumerate() {
        r.id = i;
    }
    let distinct = |key: &dyn Fn(&ClassRecord) -> String| {
        records.iter().map(key).collect::<BTreeSet<_>>().len() == records.len()
    };
    let cycle_types_separate = distinct(&|r| r.cycle_type.to_string());
    let char_polys_separate = distinct(&|r| format!("{:?}", r.char_poly));
    Ok(ClassTable { group_order: group.order_u64(), classes: records, cycle_types_separate, char_polys_separate })
}

/// Cycle types occurring in a subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCycleSet {
    pub name: String,
    pub order: u64,
    pub cycle_types: BTreeSet<CycleType>,
}

impl SubgroupCycleSet {
    /// Cycle types of an arbitrary subgroup given by generators.
    pub fn from_generators(name: impl Into<String>, gens: &[Permutation]) -> Result<Self> {
        let g = crate::permgroup::PermutationGroup::from_generators(27, gens)?;
        Ok(SubgroupCycleSet { name: name.into(), order: g.order_u64(), cycle_types: g.cycle_type_census(W_E6_ORDER)? })
    }

    pub fn contains(&self, ct: &CycleType) -> bool {
        self.cycle_types.contains(ct)
    }
}

pub const LINE_STAB: &str = "LineStab";
pub const DOUBLE_SIX_STAB: &str = "DoubleSixStab";
pub const TRITANGENT_STAB: &str = "TritangentStab";
pub const TRIPLE_NINE_COMPONENTWISE_STAB: &str = "TripleNineComponentwiseStab";
pub const TRIPLE_NINE_SET_STAB: &str = "TripleNineSetStab";
pub const EVEN_SUBGROUP: &str = "EvenSubgroup";

/// Stabilizers of one representative of each structure, in the default exclusion order.
pub fn build_subgroup_cycle_sets(table: &ClassTable) -> Result<Vec<SubgroupCycleSet>> {
    let lattice = PicLattice::get();
    let s = Schlafli::build();
    let group = lattice.graph.weyl_image()?;
    let ds = &s.double_sixes[0];
    let tri = s.tritangents[0];
    let tn = &s.triple_nines[0];
    type Pred<'a> = Box<dyn Fn(&Permutation) -> bool + 'a>;
    let preds: Vec<(&str, Pred)> = vec![
        (LINE_STAB, Box::new(|p: &Permutation| p.apply(0) == 0)),
        (DOUBLE_SIX_STAB, Box::new(|p: &Permutation| ds.stabilized_by(p))),
        (TRITANGENT_STAB, Box::new(|p: &Permutation| Schlafli::tritangent_stabilized_by(&tri, p))),
        (TRIPLE_NINE_COMPONENTWISE_STAB, Box::new(|p: &Permutation| tn.componentwise_stabilized_by(p))),
        (TRIPLE_NINE_SET_STAB, Box::new(|p: &Permutation| tn.stabilized_by(p))),
    ];
    let mut sets: Vec<SubgroupCycleSet> = preds
        .iter()
        .map(|(name, _)| SubgroupCycleSet { name: name.to_string(), order: 0, cycle_types: BTreeSet::new() })
        .collect();
    for p in group.enumerate_elements(W_E6_ORDER)? {
        let mut ct = None;
        for (set, (_, pred)) in sets.iter_mut().zip(&preds) {
            if pred(&p) {
                set.order += 1;
                set.cycle_types.insert(ct.get_or_insert_with(|| p.cycle_type()).clone());
            }
        }
    }
    let even: Vec<&ClassRecord> = table.classes.iter().filter(|c| c.det == 1).collect();
    sets.push(SubgroupCycleSet {
        name: EVEN_SUBGROUP.into(),
        order: even.iter().map(|c| c.size).sum(),
        cycle_types: even.iter().map(|c| c.cycle_type.clone()).collect(),
    });
    Ok(sets)
}

/// Every derived table with its content hash.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tables {
    pub classes: ClassTable,
    pub subgroups: Vec<SubgroupCycleSet>,
    pub hashes: BTreeMap<String, String>,
}

impl Tables {
    pub fn build() -> Result<Self> {
        let classes = build_class_table()?;
        let subgroups = build_subgroup_cycle_sets(&classes)?;
        let mut hashes = BTreeMap::new();
        hashes.insert("class_table".to_string(), content_hash(&classes));
        hashes.insert("subgroup_cycle_sets".to_string(), content_hash(&subgroups));
        Ok(Tables { classes, subgroups, hashes })
    }

    /// Tables built once per process.
    pub fn get() -> &'static Tables {
        static CELL: OnceLock<Tables> = OnceLock::new();
        CELL.get_or_init(|| Tables::build().expect("derived tables build"))
    }

    pub fn subgroup(&self, name: &str) -> Option<&SubgroupCycleSet> {
        self.subgroups.iter().find(|s| s.name == name)
    }
}

/// Frobenius evidence at one place.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub place: String,
    pub classes: Vec<ClassId>,
}

/// Per-place ambiguity sets, kept sorted by place so merging is order independent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTypeObservation {
    places: Vec<PlaceRecord>,
}

impl CycleTypeObservation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, place: impl Into<String>, mut classes: Vec<ClassId>) -> Result<()> {
        if classes.is_empty() {
            return Err(Error::Precondition("empty ambiguity set".into()));
        }
        classes.sort_unstable();
        classes.dedup();
        let rec = PlaceRecord { place: place.into(), classes };
        let at = self.places.binary_search(&rec).unwrap_or_else(|e| e);
        self.places.insert(at, rec);
        Ok(())
    }

    pub fn merge(&mut self, other: &CycleTypeObservation) {
        for r in &other.places {
            let at = self.places.binary_search(r).unwrap_or_else(|e| e);
            self.places.insert(at, r.clone());
        }
    }

    pub fn places(&self) -> &[PlaceRecord] {
        &self.places
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    /// Places whose entire ambiguity set avoids the cycle types of `h`.
    pub fn excluding_places(&self, h: &SubgroupCycleSet, table: &ClassTable) -> Vec<String> {
        self.places
            .iter()
            .filter(|r| r.classes.iter().all(|&c| !h.contains(&table.class(c).cycle_type)))
            .map(|r| r.place.clone())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CertificateKind {
    NoStableDoubleSix,
    NoStableTripleNine,
    H1Trivial,
    NotInListedSubgroups,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// Excluded subgroup name to the places excluding it.
    pub witnesses: BTreeMap<String, Vec<String>>,
    pub hashes: BTreeMap<String, String>,
}

impl Certificate {
    fn new(kind: CertificateKind, witnesses: BTreeMap<String, Vec<String>>, tables: &Tables) -> Self {
        Certificate { kind, witnesses, hashes: tables.hashes.clone() }
    }
}

/// No stable double-six and no triple-nine with each nine stable gives trivial `H^1`.
pub fn h1_certificate(obs: &CycleTypeObservation, tables: &Tables) -> Certificate {
    let mut witnesses = BTreeMap::new();
    for name in [DOUBLE_SIX_STAB, TRIPLE_NINE_COMPONENTWISE_STAB] {
        let h = tables.subgroup(name).expect("default subgroup present");
        let places = obs.excluding_places(h, &tables.classes);
        if !places.is_empty() {
            witnesses.insert(name.to_string(), places);
        }
    }
    let kind = match (witnesses.contains_key(DOUBLE_SIX_STAB), witnesses.contains_key(TRIPLE_NINE_COMPONENTWISE_STAB)) {
        (true, true) => CertificateKind::H1Trivial,
        (true, false) => CertificateKind::NoStableDoubleSix,
        (false, true) => CertificateKind::NoStableTripleNine,
        (false, false) => CertificateKind::Inconclusive,
    };
    if kind == CertificateKind::Inconclusive {
        witnesses.clear();
    }
    Certificate::new(kind, witnesses, tables)
}

/// `NotInListedSubgroups` when every listed subgroup is excluded by some place.
pub fn subgroup_exclusion_certificate(
    obs: &CycleTypeObservation,
    list: &[SubgroupCycleSet],
    tables: &Tables,
) -> Certificate {
    let mut witnesses = BTreeMap::new();
    for h in list {
        let places = obs.excluding_places(h, &tables.classes);
        if places.is_empty() {
            return Certificate::new(CertificateKind::Inconclusive, BTreeMap::new(), tables);
        }
        witnesses.insert(h.name.clone(), places);
    }
    if list.is_empty() {
        return Certificate::new(CertificateKind::Inconclusive, witnesses, tables);
    }
    Certificate::new(CertificateKind::NotInListedSubgroups, witnesses, tables)
}

/// `H^1(<sigma>, Pic)` as the nontrivial elementary divisors of `ker(Norm) / im(sigma - 1)`.
pub fn h1_cyclic_oracle(sigma: &Permutation) -> Result<Vec<u64>> {
    let lift = PicLattice::get().lift(sigma)?;
    let n = sigma.order();
    let m = &lift.matrix;
    let mut norm = vec![vec![0i128; 7]; 7];
    let mut power = identity(7);
    for _ in 0..n {
        for i in 0..7 {
            for j in 0..7 {
                norm[i][j] += power[i][j] as i128;
            }
        }
        power = matmul(&power, m);
    }
    let (v, vinv, rank) = column_echelon(norm);
    // columns rank.. of V span the kernel; rows rank.. of V^-1 give coordinates in that basis
    let mut m_minus_1: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    for (i, row) in m_minus_1.iter_mut().enumerate() {
        row[i] -= 1;
    }
    let coords = mat128(&vinv, &m_minus_1);
    for row in coords.iter().take(rank) {
        debug_assert!(row.iter().all(|&x| x == 0), "image lies in the kernel");
    }
    let _ = v;
    let c: Vec<Vec<i128>> = coords[rank..].to_vec();
    let kernel_rank = 7 - rank;
    if kernel_rank == 0 {
        return Ok(Vec::new());
    }
    let diag = smith_diagonal(c);
    let nonzero = diag.iter().filter(|&&d| d != 0).count();
    if nonzero < kernel_rank {
        return Err(Error::Precondition("cohomology of a finite group must be torsion".into()));
    }
    Ok(diag.into_iter().filter(|&d| d > 1).map(|d| d as u64).collect())
}

fn mat128(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    (0..a.len()).map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Unimodular column reduction `A V = [B | 0]`; returns `V`, `V^-1` and the rank.
fn column_echelon(mut a: Vec<Vec<i128>>) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, usize) {
    let rows = a.len();
    let n = a[0].len();
    let mut v: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut vinv = v.clone();
    let mut rank = 0;
    for r in 0..rows {
        if rank == n {
            break;
        }
        loop {
            // smallest nonzero entry among columns rank.. of row r
            let Some(p) = (rank..n).filter(|&c| a[r][c] != 0).min_by_key(|&c| a[r][c].abs()) else { break };
            swap_cols(&mut a, &mut v, &mut vinv, rank, p);
            let mut done = true;
            for c in rank + 1..n {
                let q = a[r][c] / a[r][rank];
                if q != 0 {
                    add_col(&mut a, &mut v, &mut vinv, c, rank, -q);
                }
                if a[r][c] != 0 {
                    done = false;
                }
            }
            if done {
                rank += 1;
                break;
            }
        }
    }
    (v, vinv, rank)
}

fn swap_cols(a: &mut [Vec<i128>], v: &mut [Vec<i128>], vinv: &mut [Vec<i128>], i: usize, j: usize) {
    if i == j {
        return;
    }
    for row in a.iter_mut().chain(v.iter_mut()) {
        row.swap(i, j);
    }
    vinv.swap(i, j);
}

/// Column `dst += k * column src`, with the inverse row operation on `V^-1`.
fn add_col(a: &mut [Vec<i128>], v: &mut [Vec<i128>], vinv: &mut [Vec<i128>], dst: usize, src: usize, k: i128) {
    for row in a.iter_mut().chain(v.iter_mut()) {
        row[dst] += k * row[src];
    }
    let (d, s) = (vinv[dst].clone(), &mut vinv[src]);
    for (x, y) in s.iter_mut().zip(d) {
        *x -= k * y;
    }
}

/// Diagonal of the Smith normal form, with `d_1 | d_2 | ...` (zeros last).
pub fn smith_diagonal(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let pivot = (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j))).filter(|&(i, j)| a[i][j] != 0).min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                let q = a[i][t] / a[t][t];
                for j in t..cols {
                    a[i][j] -= q * a[t][j];
                }
                if a[i][t] != 0 {
                    a.swap(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / a[t][t];
                for row in a.iter_mut() {
                    row[j] -= q * row[t];
                }
                if a[t][j] != 0 {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // the pivot must divide the remaining block
            let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0);
            match bad {
                Some((i, _)) => {
                    for j in t..cols {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag.resize(rows.min(cols), 0);
    let nz = diag.iter().filter(|&&d| d != 0).count();
    for i in 0..nz {
        for j in i + 1..nz {
            let g = gcd128(diag[i], diag[j]);
            let l = diag[i] / g * diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

fn gcd128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd128(b, a % b)
    }
}
