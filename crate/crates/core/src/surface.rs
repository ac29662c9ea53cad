//! Cubic surfaces over finite fields: points, lines, singular points, Frobenius traces and
//! the operational smoothness certificate.
//!
//! Coefficients follow the graded lexicographic monomial order with `x > y > z > w`:
//!
//! ```text
//! x^3 x^2y x^2z x^2w xy^2 xyz xyw xz^2 xzw xw^2 y^3 y^2z y^2w yz^2 yzw yw^2 z^3 z^2w zw^2 w^3
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::{ClassId, ClassTable, PicLattice};
use crate::gf::{embed, field, Elem, Field, UniPoly};
use crate::refine::{find_isomorphism, LabeledGraph};
use crate::{Error, Result};

/// Exponents of `(x, y, z, w)` for each coefficient slot.
pub const MONOMIALS: [[u8; 4]; 20] = [
    [3, 0, 0, 0],
    [2, 1, 0, 0],
    [2, 0, 1, 0],
    [2, 0, 0, 1],
    [1, 2, 0, 0],
    [1, 1, 1, 0],
    [1, 1, 0, 1],
    [1, 0, 2, 0],
    [1, 0, 1, 1],
    [1, 0, 0, 2],
    [0, 3, 0, 0],
    [0, 2, 1, 0],
    [0, 2, 0, 1],
    [0, 1, 2, 0],
    [0, 1, 1, 1],
    [0, 1, 0, 2],
    [0, 0, 3, 0],
    [0, 0, 2, 1],
    [0, 0, 1, 2],
    [0, 0, 0, 3],
];

pub const MONOMIAL_NAMES: [&str; 20] = [
    "x^3", "x^2y", "x^2z", "x^2w", "xy^2", "xyz", "xyw", "xz^2", "xzw", "xw^2", "y^3", "y^2z", "y^2w",
    "yz^2", "yzw", "yw^2", "z^3", "z^2w", "zw^2", "w^3",
];

pub fn monomial_index(e: [u8; 4]) -> usize {
    MONOMIALS.iter().position(|m| *m == e).expect("degree-3 exponent vector")
}

/// A projective point `(x : y : z : w)`.
pub type Point = [Elem; 4];

/// A term `c * x^a y^b z^c w^d` of a form of any degree.
#[derive(Clone, Copy, Debug)]
struct Term {
    coeff: Elem,
    exps: [u8; 4],
}

fn eval_terms(f: &Field, terms: &[Term], p: &Point) -> Elem {
    let mut pw = [[1 as Elem; 4]; 4];
    for v in 0..4 {
        for e in 1..4 {
            pw[v][e] = f.mul(pw[v][e - 1], p[v]);
        }
    }
    terms.iter().fold(0, |acc, t| {
        let mut m = t.coeff;
        for v in 0..4 {
            m = f.mul(m, pw[v][t.exps[v] as usize]);
        }
        f.add(acc, m)
    })
}

/// A cubic form with coefficients in a finite field.
#[derive(Clone)]
pub struct CubicForm {
    field: Arc<Field>,
    coeffs: [Elem; 20],
}

impl fmt::Debug for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CubicForm over {:?}: {:?}", self.field, self.coeffs)
    }
}

impl PartialEq for CubicForm {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.coeffs == o.coeffs
    }
}

impl CubicForm {
    pub fn new(field: Arc<Field>, coeffs: &[Elem]) -> Result<Self> {
        if coeffs.len() != 20 {
            return Err(Error::Dimension { expected: 20, found: coeffs.len() });
        }
        if coeffs.iter().any(|&c| c >= field.size()) {
            return Err(Error::Precondition("coefficient outside the field".into()));
        }
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::Precondition("the zero form does not define a surface".into()));
        }
        Ok(CubicForm { field, coeffs: coeffs.try_into().unwrap() })
    }

    /// Integer coefficients reduced into the prime subfield.
    pub fn from_ints(field: Arc<Field>, coeffs: &[i64]) -> Result<Self> {
        let c: Vec<Elem> = coeffs.iter().map(|&c| field.from_int(c)).collect();
        CubicForm::new(field, &c)
    }

    /// `x^3 + y^3 + z^3 + w^3` over `F_{p^k}`.
    pub fn fermat(p: u64, k: u32) -> Result<Self> {
        let mut c = [0i64; 20];
        for e in [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0], [0, 0, 0, 3]] {
            c[monomial_index(e)] = 1;
        }
        CubicForm::from_ints(field(p, k)?, &c)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem; 20] {
        &self.coeffs
    }

    /// Size of the base field.
    pub fn q(&self) -> u64 {
        self.field.size() as u64
    }

    fn terms(&self) -> Vec<Term> {
        self.coeffs
            .iter()
            .zip(MONOMIALS)
            .filter(|(&c, _)| c != 0)
            .map(|(&coeff, exps)| Term { coeff, exps })
            .collect()
    }

    /// Partial derivative terms in the variable `v`.
    fn partial_terms(&self, v: usize) -> Vec<Term> {
        let f = &self.field;
        self.terms()
            .into_iter()
            .filter(|t| t.exps[v] > 0)
            .filter_map(|t| {
                let coeff = f.mul(t.coeff, f.from_int(t.exps[v] as i64));
                let mut exps = t.exps;
                exps[v] -= 1;
                (coeff != 0).then_some(Term { coeff, exps })
            })
            .collect()
    }

    pub fn eval(&self, p: &Point) -> Elem {
        eval_terms(&self.field, &self.terms(), p)
    }

    pub fn gradient(&self, p: &Point) -> [Elem; 4] {
        let mut g = [0; 4];
        for (v, gv) in g.iter_mut().enumerate() {
            *gv = eval_terms(&self.field, &self.partial_terms(v), p);
        }
        g
    }

    /// The same form over `F_{Q^m}`.
    pub fn base_change(&self, m: u32) -> Result<CubicForm> {
        if m == 1 {
            return Ok(self.clone());
        }
        let big = field(self.field.p() as u64, self.field.k() * m)?;
        let e = embed(&self.field, &big)?;
        let coeffs: Vec<Elem> = self.coeffs.iter().map(|&c| e.apply(c)).collect();
        CubicForm::new(big, &coeffs)
    }

    /// `F(A x)` for a 4x4 matrix `A` (rows act on the coordinate vector).
    pub fn transform(&self, a: &[[Elem; 4]; 4]) -> CubicForm {
        let f = &self.field;
        let mut out = [0 as Elem; 20];
        for t in self.terms() {
            // linear forms substituted for each variable occurrence
            let mut forms: Vec<[Elem; 4]> = Vec::new();
            for v in 0..4 {
                for _ in 0..t.exps[v] {
                    forms.push(a[v]);
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        let c = f.mul(f.mul(forms[0][i], forms[1][j]), f.mul(forms[2][k], t.coeff));
                        if c == 0 {
                            continue;
                        }
                        let mut e = [0u8; 4];
                        e[i] += 1;
                        e[j] += 1;
                        e[k] += 1;
                        let ix = monomial_index(e);
                        out[ix] = f.add(out[ix], c);
                    }
                }
            }
        }
        CubicForm { field: self.field.clone(), coeffs: out }
    }
}

/// Restriction of a list of terms to the affine line `(x, y, z, 1)` as a polynomial in `z`.
struct ZSlices {
    /// For each power of z, the terms in `x`, `y` (the `w` exponent is dropped).
    by_power: [Vec<(Elem, u8, u8)>; 4],
}

impl ZSlices {
    fn new(terms: &[Term]) -> Self {
        let mut by_power: [Vec<(Elem, u8, u8)>; 4] = Default::default();
        for t in terms {
            by_power[t.exps[2] as usize].push((t.coeff, t.exps[0], t.exps[1]));
        }
        ZSlices { by_power }
    }

    #[inline]
    fn at(&self, f: &Field, xp: &[Elem; 4], yp: &[Elem; 4]) -> [Elem; 4] {
        let mut out = [0; 4];
        for (j, terms) in self.by_power.iter().enumerate() {
            let mut s = 0;
            for &(c, a, b) in terms {
                s = f.add(s, f.mul(c, f.mul(xp[a as usize], yp[b as usize])));
            }
            out[j] = s;
        }
        out
    }
}

fn powers(f: &Field, x: Elem) -> [Elem; 4] {
    let x2 = f.mul(x, x);
    [1, x, x2, f.mul(x2, x)]
}

fn degree_of(c: &[Elem]) -> Option<usize> {
    c.iter().rposition(|&a| a != 0)
}

/// Number of distinct roots in `F_Q` of a polynomial of degree at most 3 (all `Q` when zero).
pub fn count_roots_small(f: &Field, c: [Elem; 4]) -> u64 {
    let Some(deg) = degree_of(&c) else { return f.size() as u64 };
    match deg {
        0 => 0,
        1 => 1,
        _ => {
            let g = UniPoly::new(c.to_vec()).monic(f);
            let h = xq_minus_x(f, &g);
            if h.is_zero() {
                deg as u64
            } else {
                h.gcd(&g, f).degree().unwrap_or(0) as u64
            }
        }
    }
}

/// `z^Q - z mod g` for monic `g` of degree 2 or 3, using fixed-size residues.
fn xq_minus_x(f: &Field, g: &UniPoly) -> UniPoly {
    let n = g.degree().unwrap();
    let gc = g.coeffs();
    let mulmod = |a: &[Elem; 3], b: &[Elem; 3]| -> [Elem; 3] {
        let mut prod = [0 as Elem; 5];
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = f.add(prod[i + j], f.mul(a[i], b[j]));
            }
        }
        for d in (n..2 * n - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..n {
                prod[d - n + i] = f.sub(prod[d - n + i], f.mul(c, gc[i]));
            }
        }
        [prod[0], prod[1], prod[2]]
    };
    let mut base = [0 as Elem; 3];
    base[1] = 1;
    let mut acc = [1 as Elem, 0, 0];
    let mut e = f.size() as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &base);
        }
        base = mulmod(&base, &base);
        e >>= 1;
    }
    acc[1] = f.sub(acc[1], 1);
    UniPoly::new(acc[..n].to_vec())
}

/// Budgets deciding which extensions are examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Point counts over `F_{Q^m}` (and singular-point searches) need `Q^{3m} <= points`.
    pub points: u64,
    /// Line enumeration over `F_{Q^m}` needs `Q^{4m} <= lines`.
    pub lines: u64,
    /// Largest extension degree searched for singular points.
    pub singular_max_degree: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { points: 1_000_000_000, lines: 1_000_000_000_000, singular_max_degree: 4 }
    }
}

impl Budget {
    pub fn allows_points(&self, q: u64, m: u32) -> bool {
        (q as u128).pow(3 * m) <= self.points as u128
    }

    pub fn allows_lines(&self, q: u64, m: u32) -> bool {
        (q as u128).pow(4 * m) <= self.lines as u128
    }

    pub fn max_point_degree(&self, q: u64) -> u32 {
        (1..=64).take_while(|&m| self.allows_points(q, m)).last().unwrap_or(0)
    }

    pub fn max_line_degree(&self, q: u64) -> u32 {
        (1..=64).take_while(|&m| self.allows_lines(q, m)).last().unwrap_or(0)
    }
}

/// `#{P in P^3(F_Q) : F(P) = 0}`.
pub fn count_points(form: &CubicForm) -> u64 {
    let f = &*form.field;
    let q = f.size();
    let terms = form.terms();
    let slices = ZSlices::new(&terms);
    let mut total: u64 = (0..q)
        .map(|x| {
            let xp = powers(f, x);
            let mut n = 0;
            for y in 0..q {
                let yp = powers(f, y);
                n += count_roots_small(f, slices.at(f, &xp, &yp));
            }
            n
        })
        .sum();
    for x in 0..q {
        for y in 0..q {
            total += (eval_terms(f, &terms, &[x, y, 1, 0]) == 0) as u64;
        }
        total += (eval_terms(f, &terms, &[x, 1, 0, 0]) == 0) as u64;
    }
    total += (eval_terms(f, &terms, &[1, 0, 0, 0]) == 0) as u64;
    total
}

/// Point count by direct evaluation at every point; the oracle for [`count_points`].
pub fn count_points_naive(form: &CubicForm) -> u64 {
    let q = form.field.size();
    let mut n = 0;
    for_each_projective_point(q, |p| n += (form.eval(&p) == 0) as u64);
    n
}

fn for_each_projective_point(q: u32, mut visit: impl FnMut(Point)) {
    for x in 0..q {
        for y in 0..q {
            for z in 0..q {
                visit([x, y, z, 1]);
            }
            visit([x, y, 1, 0]);
        }
        visit([x, 1, 0, 0]);
    }
    visit([1, 0, 0, 0]);
}

/// `t_1, ..., t_m` with `#X(F_{Q^j}) = Q^{2j} + Q^j t_j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSequence {
    pub q: u64,
    pub values: Vec<i64>,
}

/// The trace `t` from a point count over a field of size `qm`.
pub fn trace_from_count(qm: u64, count: u64) -> Result<i64> {
    let num = count as i128 - (qm as i128).pow(2) - 1;
    if num % qm as i128 != 0 {
        return Err(Error::NotSmoothOrBadReduction(format!(
            "point count {count} over F_{qm} gives a non-integral trace"
        )));
    }
    let t = (num / qm as i128) as i64;
    if t.abs() > 7 {
        return Err(Error::NotSmoothOrBadReduction(format!("trace {t} over F_{qm} exceeds rank 7")));
    }
    Ok(t)
}

pub fn trace_sequence(form: &CubicForm, m_max: u32) -> Result<TraceSequence> {
    let mut values = Vec::new();
    for m in 1..=m_max {
        let big = form.base_change(m)?;
        values.push(trace_from_count(big.q(), count_points(&big))?);
    }
    Ok(TraceSequence { q: form.q(), values })
}

/// A line in `P^3` as the row space of a 2x4 matrix in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineInP3 {
    pub rows: [[Elem; 4]; 2],
    pub pivots: (usize, usize),
}

impl LineInP3 {
    /// Whether two distinct lines meet.
    pub fn meets(&self, other: &LineInP3, f: &Field) -> bool {
        let m = [self.rows[0], self.rows[1], other.rows[0], other.rows[1]];
        rank4(f, m) < 4
    }
}

fn rank4(f: &Field, mut m: [[Elem; 4]; 4]) -> usize {
    let mut rank = 0;
    for col in 0..4 {
        let Some(piv) = (rank..4).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][col]).unwrap();
        for r in 0..4 {
            if r != rank && m[r][col] != 0 {
                let c = f.mul(m[r][col], inv);
                for j in 0..4 {
                    m[r][j] = f.sub(m[r][j], f.mul(c, m[rank][j]));
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Lines found over one field.
#[derive(Clone, Debug)]
pub struct LineEnumeration {
    pub lines: Vec<LineInP3>,
    /// More than 27 lines: the surface cannot be smooth.
    pub not_smooth: bool,
}

/// Largest field size for line enumeration.
pub const DEFAULT_LINE_FIELD_CAP: u64 = 1 << 16;

/// Every line on the surface defined over the base field.
///
/// For a line spanned by RREF rows `r1`, `r2` the restriction is
/// `s^3 F(r1) + s^2 t (grad F(r1) . r2) + s t^2 (grad F(r2) . r1) + t^3 F(r2)`, and the free
/// entries of the two rows are independent, so candidate rows are filtered separately.
pub fn lines_on_surface(form: &CubicForm) -> Result<LineEnumeration> {
    let f = &*form.field;
    let q = f.size();
    if q as u64 > DEFAULT_LINE_FIELD_CAP {
        return Err(Error::Budget(format!("line enumeration over F_{q} exceeds cap")));
    }
    let terms = form.terms();
    let partials: Vec<Vec<Term>> = (0..4).map(|v| form.partial_terms(v)).collect();
    let grad = |p: &Point| -> [Elem; 4] {
        [0, 1, 2, 3].map(|v| eval_terms(f, &partials[v], p))
    };
    let dot = |a: &[Elem; 4], b: &Point| -> Elem {
        (0..4).fold(0, |acc, i| f.add(acc, f.mul(a[i], b[i])))
    };
    let mut lines = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let free1: Vec<usize> = (i + 1..4).filter(|&l| l != j).collect();
            let free2: Vec<usize> = (j + 1..4).collect();
            let rows1: Vec<(Point, [Elem; 4])> = rows_with_pattern(q, i, &free1)
                .filter(|r| eval_terms(f, &terms, r) == 0)
                .map(|r| (r, grad(&r)))
                .collect();
            if rows1.is_empty() {
                continue;
            }
            let rows2: Vec<(Point, [Elem; 4])> = rows_with_pattern(q, j, &free2)
                .filter(|r| eval_terms(f, &terms, r) == 0)
                .map(|r| (r, grad(&r)))
                .collect();
            for (r1, g1) in &rows1 {
                for (r2, g2) in &rows2 {
                    if dot(g1, r2) == 0 && dot(g2, r1) == 0 {
                        lines.push(LineInP3 { rows: [*r1, *r2], pivots: (i, j) });
                    }
                }
            }
        }
    }
    lines.sort();
    let not_smooth = lines.len() > 27;
    Ok(LineEnumeration { lines, not_smooth })
}

fn rows_with_pattern(q: u32, pivot: usize, free: &[usize]) -> impl Iterator<Item = Point> + '_ {
    let count = (q as u64).pow(free.len() as u32);
    (0..count).map(move |mut n| {
        let mut r = [0; 4];
        r[pivot] = 1;
        for &l in free {
            r[l] = (n % q as u64) as Elem;
            n /= q as u64;
        }
        r
    })
}

/// Brute-force line enumeration over all RREF matrices; the oracle for [`lines_on_surface`].
pub fn lines_on_surface_naive(form: &CubicForm) -> Vec<LineInP3> {
    let f = &*form.field;
    let q = f.size();
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let free1: Vec<usize> = (i + 1..4).filter(|&l| l != j).collect();
            let free2: Vec<usize> = (j + 1..4).collect();
            for r1 in rows_with_pattern(q, i, &free1) {
                for r2 in rows_with_pattern(q, j, &free2) {
                    // four coefficients of the binary cubic via symbolic expansion
                    let mut coeffs = [0 as Elem; 4];
                    for t in form.terms() {
                        let mut poly = vec![t.coeff];
                        for v in 0..4 {
                            for _ in 0..t.exps[v] {
                                let lin = [r1[v], r2[v]];
                                let mut next = vec![0; poly.len() + 1];
                                for (d, &c) in poly.iter().enumerate() {
                                    next[d] = f.add(next[d], f.mul(c, lin[0]));
                                    next[d + 1] = f.add(next[d + 1], f.mul(c, lin[1]));
                                }
                                poly = next;
                            }
                        }
                        for d in 0..4 {
                            coeffs[d] = f.add(coeffs[d], poly[d]);
                        }
                    }
                    if coeffs.iter().all(|&c| c == 0) {
                        out.push(LineInP3 { rows: [r1, r2], pivots: (i, j) });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// A point where `F` and all partial derivatives vanish, over the base field.
pub fn find_singular_point(form: &CubicForm) -> Option<Point> {
    let f = &*form.field;
    let q = f.size();
    let mut forms = vec![form.terms()];
    forms.extend((0..4).map(|v| form.partial_terms(v)));
    let slices: Vec<ZSlices> = forms.iter().map(|t| ZSlices::new(t)).collect();
    for x in 0..q {
        let xp = powers(f, x);
        for y in 0..q {
            let yp = powers(f, y);
            let mut g: Option<UniPoly> = None;
            let mut trivial = false;
            for s in &slices {
                let c = s.at(f, &xp, &yp);
                if degree_of(&c).is_none() {
                    continue;
                }
                let poly = UniPoly::new(c.to_vec());
                let next = match &g {
                    None => poly.monic(f),
                    Some(h) => h.gcd(&poly, f),
                };
                if next.degree() == Some(0) {
                    trivial = true;
                    break;
                }
                g = Some(next);
            }
            if trivial {
                continue;
            }
            let z = match g {
                None => Some(0),
                Some(h) => (0..q).find(|&z| h.eval(z, f) == 0),
            };
            if let Some(z) = z {
                return Some([x, y, z, 1]);
            }
        }
    }
    let singular_at = |p: &Point| forms.iter().all(|t| eval_terms(f, t, p) == 0);
    for x in 0..q {
        for y in 0..q {
            if singular_at(&[x, y, 1, 0]) {
                return Some([x, y, 1, 0]);
            }
        }
        if singular_at(&[x, 1, 0, 0]) {
            return Some([x, 1, 0, 0]);
        }
    }
    singular_at(&[1, 0, 0, 0]).then_some([1, 0, 0, 0])
}

/// Direct search over all points; the oracle for [`find_singular_point`].
pub fn has_singular_point_naive(form: &CubicForm) -> bool {
    let mut found = false;
    for_each_projective_point(form.field.size(), |p| {
        if !found && form.eval(&p) == 0 && form.gradient(&p) == [0; 4] {
            found = true;
        }
    });
    found
}

/// Result of the operational smoothness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum SmoothnessCertificate {
    /// Exactly 27 lines over `F_{Q^m}` whose intersection graph is isomorphic to the
    /// 27-line configuration; `isomorphism[i]` is the configuration vertex of line `i`.
    SmoothCertified { extension_degree: u32, isomorphism: Vec<usize> },
    NotSmooth { reason: String, extension_degree: u32, witness: Option<Vec<Vec<u32>>> },
    Undetermined,
}

impl SmoothnessCertificate {
    pub fn is_not_smooth(&self) -> bool {
        matches!(self, SmoothnessCertificate::NotSmooth { .. })
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, SmoothnessCertificate::SmoothCertified { .. })
    }
}

/// Intersection graph of a set of lines (labels 1 meet, 0 skew, -1 diagonal).
pub fn line_graph(lines: &[LineInP3], f: &Field) -> LabeledGraph {
    LabeledGraph::from_fn(lines.len(), |i, j| {
        if i == j {
            -1
        } else {
            lines[i].meets(&lines[j], f) as i64
        }
    })
}

/// Everything learned about one surface over `F_Q`: singular points, lines and point counts
/// over the extensions allowed by the budget.
#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub q: u64,
    pub certificate: SmoothnessCertificate,
    /// `line_counts[m-1]` = number of lines over `F_{Q^m}`.
    pub line_counts: Vec<usize>,
    /// Lines over the base field.
    pub rational_lines: Option<Vec<LineInP3>>,
    /// `traces[m-1] = t_m`.
    pub traces: Vec<i64>,
    /// Set when point counting produced an impossible trace.
    pub trace_error: Option<String>,
}

/// Singular-point search and line enumeration; fills the certificate and line counts.
pub fn examine_geometry(form: &CubicForm, budget: &Budget) -> Result<SurfaceData> {
    let q = form.q();
    let mut data = SurfaceData {
        q,
        certificate: SmoothnessCertificate::Undetermined,
        line_counts: Vec::new(),
        rational_lines: None,
        traces: Vec::new(),
        trace_error: None,
    };
    for m in 1..=budget.singular_max_degree {
        if !budget.allows_points(q, m) {
            break;
        }
        let big = form.base_change(m)?;
        if let Some(p) = find_singular_point(&big) {
            let witness = p.iter().map(|&c| big.field().coords(c)).collect();
            data.certificate = SmoothnessCertificate::NotSmooth {
                reason: "singular point".into(),
                extension_degree: m,
                witness: Some(witness),
            };
            return Ok(data);
        }
    }
    let gamma3 = PicLattice::get().graph();
    for m in 1..=budget.max_line_degree(q) {
        let big = form.base_change(m)?;
        let found = lines_on_surface(&big)?;
        data.line_counts.push(found.lines.len());
        if m == 1 {
            data.rational_lines = Some(found.lines.clone());
        }
        if found.not_smooth {
            data.certificate = SmoothnessCertificate::NotSmooth {
                reason: format!("{} lines", found.lines.len()),
                extension_degree: m,
                witness: None,
            };
            return Ok(data);
        }
        if found.lines.len() == 27 {
            let g = line_graph(&found.lines, big.field());
            data.certificate = match find_isomorphism(&g, gamma3.labeled_graph()) {
                Some(iso) => SmoothnessCertificate::SmoothCertified { extension_degree: m, isomorphism: iso },
                None => SmoothnessCertificate::NotSmooth {
                    reason: "27 lines not in Schlafli configuration".into(),
                    extension_degree: m,
                    witness: None,
                },
            };
            // every later extension sees the same 27 lines or a subset already counted
            return Ok(data);
        }
    }
    Ok(data)
}

/// The smoothness certificate on its own.
pub fn smoothness_certificate(form: &CubicForm, budget: &Budget) -> Result<SmoothnessCertificate> {
    Ok(examine_geometry(form, budget)?.certificate)
}

/// Evidence about the Frobenius permutation of the 27 lines.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusEvidence {
    pub traces: Vec<i64>,
    pub line_counts: Vec<usize>,
}

/// When to stop counting points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// Until a single class remains.
    Class,
    /// Until the remaining classes share one cycle type.
    CycleType,
}

fn resolved(classes: &[ClassId], table: &ClassTable, r: Resolution) -> bool {
    match r {
        Resolution::Class => classes.len() <= 1,
        Resolution::CycleType => classes.windows(2).all(|w| table.class(w[0]).cycle_type == table.class(w[1]).cycle_type),
    }
}

/// Classes of `W(E6)` consistent with the evidence, gathering point counts over successive
/// extensions until resolved or the budget runs out.
pub fn gather_evidence(
    form: &CubicForm,
    data: &mut SurfaceData,
    budget: &Budget,
    table: &ClassTable,
    resolution: Resolution,
) -> Result<Vec<ClassId>> {
    let q = form.q();
    let mut ev = FrobeniusEvidence { traces: data.traces.clone(), line_counts: data.line_counts.clone() };
    let mut classes = table.consistent_classes(&ev);
    let mut m = data.traces.len() as u32 + 1;
    while !classes.is_empty() && !resolved(&classes, table, resolution) && budget.allows_points(q, m) {
        let big = form.base_change(m)?;
        match trace_from_count(big.q(), count_points(&big)) {
            Ok(t) => {
                data.traces.push(t);
                ev.traces.push(t);
            }
            Err(e) => {
                data.trace_error = Some(e.to_string());
                return Err(e);
            }
        }
        classes = table.consistent_classes(&ev);
        m += 1;
    }
    if classes.is_empty() {
        return Err(Error::NotSmoothOrBadReduction("evidence matches no class of W(E6)".into()));
    }
    Ok(classes)
}

/// The Frobenius class (or the set of classes still possible).
pub fn frobenius_class(form: &CubicForm, budget: &Budget, table: &ClassTable) -> Result<Vec<ClassId>> {
    let mut data = examine_geometry(form, budget)?;
    if let SmoothnessCertificate::NotSmooth { reason, .. } = &data.certificate {
        return Err(Error::NotSmoothOrBadReduction(reason.clone()));
    }
    gather_evidence(form, &mut data, budget, table, Resolution::Class)
}

/// Order of the Frobenius class: a single value when pinned, otherwise the possible orders.
pub fn splitting_degree(form: &CubicForm, budget: &Budget, table: &ClassTable) -> Result<Vec<u64>> {
    let classes = frobenius_class(form, budget, table)?;
    let mut orders: Vec<u64> = classes.iter().map(|&c| table.class(c).order).collect();
    orders.sort_unstable();
    orders.dedup();
    Ok(orders)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(p: u64) -> CubicForm {
        let mut c = [0i64; 20];
        for e in [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0]] {
            c[monomial_index(e)] = 1;
        }
        CubicForm::from_ints(field(p, 1).unwrap(), &c).unwrap()
    }

    #[test]
    fn monomial_order_is_grlex() {
        for w in MONOMIALS.windows(2) {
            assert!(w[0] > w[1]);
        }
        for m in MONOMIALS {
            assert_eq!(m.iter().map(|&e| e as u32).sum::<u32>(), 3);
        }
    }

    #[test]
    fn fermat_over_f2_has_seven_points() {
        let f = CubicForm::fermat(2, 1).unwrap();
        assert_eq!(count_points(&f), 7);
        assert_eq!(count_points_naive(&f), 7);
    }

    #[test]
    fn triple_plane() {
        let mut c = [0i64; 20];
        c[0] = 1;
        let f = CubicForm::from_ints(field(2, 1).unwrap(), &c).unwrap();
        assert_eq!(count_points(&f), 7);
    }

    #[test]
    fn fast_count_matches_naive() {
        for (p, k) in [(2, 1), (2, 2), (3, 1), (5, 1), (2, 3), (7, 1)] {
            let fld = field(p, k).unwrap();
            for seed in 0..6u32 {
                let coeffs: Vec<Elem> =
                    (0..20u32).map(|i| (i * 7 + seed * 13 + i * i * seed) % fld.size()).collect();
                let Ok(form) = CubicForm::new(fld.clone(), &coeffs) else { continue };
                assert_eq!(count_points(&form), count_points_naive(&form), "p={p} k={k} seed={seed}");
            }
        }
    }

    #[test]
    fn root_counting() {
        let f = field(7, 1).unwrap();
        // (z-1)(z-2)(z-3)
        let g = UniPoly::new(vec![1, 0, 0, 1]); // z^3 + 1 splits over F_7
        assert_eq!(count_roots_small(&f, [1, 0, 0, 1]), 3);
        assert_eq!(crate::gf::roots(&g, &f).len(), 3);
        assert_eq!(count_roots_small(&f, [0, 0, 0, 0]), 7);
        assert_eq!(count_roots_small(&f, [3, 0, 0, 0]), 0);
        // z^2 (double root)
        assert_eq!(count_roots_small(&f, [0, 0, 1, 0]), 1);
        // z^2 + 1 has no roots mod 7
        assert_eq!(count_roots_small(&f, [1, 0, 1, 0]), 0);
    }

    #[test]
    fn fermat_lines() {
        let f7 = CubicForm::fermat(7, 1).unwrap();
        assert_eq!(lines_on_surface(&f7).unwrap().lines.len(), 27);
        let f2 = CubicForm::fermat(2, 1).unwrap();
        let l2 = lines_on_surface(&f2).unwrap().lines;
        assert_eq!(l2.len(), 3);
        assert_eq!(l2, lines_on_surface_naive(&f2));
        assert_eq!(lines_on_surface(&f2.base_change(2).unwrap()).unwrap().lines.len(), 27);
    }

    #[test]
    fn fast_lines_match_naive() {
        for (p, k) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let fld = field(p, k).unwrap();
            for seed in 0..4u32 {
                let coeffs: Vec<Elem> = (0..20u32).map(|i| (i * 3 + seed * 5 + i * seed) % fld.size()).collect();
                let Ok(form) = CubicForm::new(fld.clone(), &coeffs) else { continue };
                assert_eq!(lines_on_surface(&form).unwrap().lines, lines_on_surface_naive(&form));
            }
            let fermat = CubicForm::fermat(p, k).unwrap();
            assert_eq!(lines_on_surface(&fermat).unwrap().lines, lines_on_surface_naive(&fermat));
        }
    }

    #[test]
    fn cone_lines() {
        // lines through the vertex over the 9 points of the plane Fermat cubic over F_7
        let c = cone(7);
        let lines = lines_on_surface(&c).unwrap();
        assert_eq!(lines.lines.len(), 9);
        assert!(!lines.not_smooth);
        let over49 = lines_on_surface(&c.base_change(2).unwrap()).unwrap();
        assert!(over49.not_smooth);
        assert_eq!(over49.lines.len(), 63);
    }

    #[test]
    fn singular_points() {
        assert_eq!(find_singular_point(&cone(7)), Some([0, 0, 0, 1]));
        assert!(find_singular_point(&CubicForm::fermat(7, 1).unwrap()).is_none());
        assert!(find_singular_point(&CubicForm::fermat(3, 1).unwrap()).is_some());
        for (p, k) in [(2, 1), (3, 1), (5, 1), (2, 2)] {
            let fld = field(p, k).unwrap();
            for seed in 0..8u32 {
                let coeffs: Vec<Elem> = (0..20u32).map(|i| (i * i + seed * 11 + i * seed * 3) % fld.size()).collect();
                let Ok(form) = CubicForm::new(fld.clone(), &coeffs) else { continue };
                let fast = find_singular_point(&form);
                assert_eq!(fast.is_some(), has_singular_point_naive(&form), "p={p} seed={seed}");
                if let Some(pt) = fast {
                    assert_eq!(form.eval(&pt), 0);
                    assert_eq!(form.gradient(&pt), [0; 4]);
                }
            }
        }
    }

    #[test]
    fn smoothness_verdicts() {
        let budget = Budget::default();
        let c = smoothness_certificate(&CubicForm::fermat(7, 1).unwrap(), &budget).unwrap();
        match c {
            SmoothnessCertificate::SmoothCertified { extension_degree, isomorphism } => {
                assert_eq!(extension_degree, 1);
                assert_eq!(isomorphism.len(), 27);
            }
            other => panic!("{other:?}"),
        }
        assert!(smoothness_certificate(&cone(7), &budget).unwrap().is_not_smooth());
        assert!(smoothness_certificate(&CubicForm::fermat(3, 1).unwrap(), &budget).unwrap().is_not_smooth());
    }

    #[test]
    fn traces() {
        let f2 = CubicForm::fermat(2, 1).unwrap();
        let t = trace_sequence(&f2, 2).unwrap();
        assert_eq!(t.values[0], 1);
        // all 27 lines over F_4
        assert_eq!(t.values[1], 7);
        let c = cone(7);
        assert!(trace_sequence(&c, 1).is_err() || trace_sequence(&c, 1).unwrap().values[0].abs() <= 7);
    }

    #[test]
    fn transform_identity() {
        let f = CubicForm::fermat(5, 1).unwrap();
        let id = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        assert_eq!(f.transform(&id), f);
    }
}
