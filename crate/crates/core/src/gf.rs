//! Finite fields `F_{p^k}` as quotients of `F_p[x]` by the least monic irreducible of
//! degree `k`, univariate polynomials over them, and embeddings between fields.
//!
//! Elements are encoded as integers `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` where
//! `c_0 + c_1 x + ...` is the reduced representative. The prime subfield is therefore
//! `0..p`, and integer order is the fixed element ordering used for deterministic choices.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Field elements in their integer encoding.
pub type Elem = u32;

/// Largest field built by default (table-driven multiplication).
pub const DEFAULT_FIELD_CAP: u64 = 1 << 22;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Characteristic, degree and modulus of a field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    /// Monic, constant term first, length `k + 1`.
    pub modulus: Vec<u32>,
}

/// A finite field with log/antilog tables for `k > 1`.
pub struct Field {
    spec: FieldSpec,
    q: u32,
    /// `exp[i]` is `g^i` for a primitive element `g`; empty when `k == 1`.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.spec.p, self.spec.k)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

static FIELD_CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Field>>>> = OnceLock::new();

/// The field `F_{p^k}`, built once per process and shared.
pub fn field(p: u64, k: u32) -> Result<Arc<Field>> {
    field_with_cap(p, k, DEFAULT_FIELD_CAP)
}

pub fn field_with_cap(p: u64, k: u32, cap: u64) -> Result<Arc<Field>> {
    if !is_prime(p) || p > u32::MAX as u64 {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::Precondition("extension degree must be positive".into()));
    }
    let size = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
    if size > cap as u128 || (k > 1 && size > u32::MAX as u128) {
        return Err(Error::FieldTooLarge { size: size.min(u64::MAX as u128) as u64, cap });
    }
    let cache = FIELD_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&(p as u32, k)) {
        return Ok(f.clone());
    }
    let f = Arc::new(Field::build(p as u32, k));
    cache.lock().unwrap().insert((p as u32, k), f.clone());
    Ok(f)
}

impl Field {
    fn build(p: u32, k: u32) -> Field {
        if k == 1 {
            return Field { spec: FieldSpec { p, k, modulus: vec![0, 1] }, q: p, exp: Vec::new(), log: Vec::new() };
        }
        let prime = Field::build(p, 1);
        let modulus = least_irreducible(&prime, k as usize);
        let q = p.pow(k);
        let mut f = Field { spec: FieldSpec { p, k, modulus }, q, exp: Vec::new(), log: Vec::new() };
        // smallest primitive element by integer order
        let order = q as u64 - 1;
        let factors = prime_factors(order);
        let g = (2..q)
            .find(|&g| factors.iter().all(|&r| f.slow_pow(g, order / r) != 1))
            .unwrap_or(1);
        let mut exp = vec![0u32; q as usize - 1];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x;
            log[x as usize] = i as u32;
            x = f.slow_mul(x, g);
        }
        f.exp = exp;
        f.log = log;
        f
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn k(&self) -> u32 {
        self.spec.k
    }

    pub fn size(&self) -> u32 {
        self.q
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.q
    }

    /// Coordinates over the prime field, constant first.
    pub fn coords(&self, a: Elem) -> Vec<u32> {
        let p = self.spec.p;
        let mut a = a;
        (0..self.spec.k)
            .map(|_| {
                let c = a % p;
                a /= p;
                c
            })
            .collect()
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<Elem> {
        if coords.len() > self.spec.k as usize {
            return Err(Error::Dimension { expected: self.spec.k as usize, found: coords.len() });
        }
        let p = self.spec.p;
        Ok(coords.iter().rev().fold(0u32, |acc, &c| acc * p + c % p))
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.spec.p as i64) as u32
    }

    /// The class of `x` (the generator of the defining quotient).
    pub fn generator(&self) -> Elem {
        if self.spec.k == 1 {
            0
        } else {
            self.spec.p
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.spec.p;
        if p == 2 {
            return a ^ b;
        }
        if self.spec.k == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            let s = (a % p + b % p) % p;
            out += s * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.spec.p;
        if p == 2 {
            return a;
        }
        if self.spec.k == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            let c = a % p;
            out += ((p - c) % p) * place;
            place *= p;
            a /= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.spec.k == 1 {
            return ((a as u64 * b as u64) % self.spec.p as u64) as u32;
        }
        let n = self.q - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        if self.spec.k == 1 {
            return Ok(self.pow(a, self.spec.p as u64 - 2));
        }
        let n = self.q - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if self.spec.k > 1 {
            let n = (self.q - 1) as u64;
            return self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize];
        }
        let p = self.spec.p as u64;
        let (mut base, mut e, mut acc) = (a as u64, e, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u32
    }

    /// `a^p`.
    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.spec.p as u64)
    }

    /// Whether `a` is a square (for odd `q`; every element is a square when `p = 2`).
    pub fn is_square(&self, a: Elem) -> bool {
        if a == 0 || self.spec.p == 2 {
            return true;
        }
        self.pow(a, (self.q as u64 - 1) / 2) == 1
    }

    fn slow_mul(&self, a: Elem, b: Elem) -> Elem {
        let prime = Field::build(self.spec.p, 1);
        let pa = UniPoly::new(self.coords(a));
        let pb = UniPoly::new(self.coords(b));
        let m = UniPoly::new(self.spec.modulus.clone());
        let r = pa.mul(&pb, &prime).rem(&m, &prime).expect("modulus is monic");
        let mut c = r.coeffs;
        c.resize(self.spec.k as usize, 0);
        self.from_coords(&c).unwrap()
    }

    fn slow_pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Element by a checked handle.
    pub fn element(self: &Arc<Self>, value: Elem) -> Result<FieldElement> {
        if value >= self.q {
            return Err(Error::Precondition(format!("{value} is not an element of {self:?}")));
        }
        Ok(FieldElement { field: self.clone(), value })
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element together with its field, for checked arithmetic across field boundaries.
#[derive(Clone, Debug)]
pub struct FieldElement {
    field: Arc<Field>,
    value: Elem,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl FieldElement {
    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coords(&self) -> Vec<u32> {
        self.field.coords(self.value)
    }

    fn same(&self, o: &Self) -> Result<()> {
        if self.field != o.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    fn wrap(&self, value: Elem) -> FieldElement {
        FieldElement { field: self.field.clone(), value }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(self.wrap(self.field.add(self.value, o.value)))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(self.wrap(self.field.mul(self.value, o.value)))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.value, e))
    }

    pub fn frobenius(&self) -> Self {
        self.wrap(self.field.frobenius(self.value))
    }
}

/// A univariate polynomial, constant term first, trailing zeros stripped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UniPoly {
    coeffs: Vec<Elem>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Elem) -> Self {
        UniPoly::new(vec![c])
    }

    /// `x`.
    pub fn x() -> Self {
        UniPoly { coeffs: vec![0, 1] }
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn add(&self, o: &Self, f: &Field) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self, f: &Field) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn scale(&self, c: Elem, f: &Field) -> Self {
        UniPoly::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, o: &Self, f: &Field) -> Self {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    pub fn divrem(&self, d: &Self, f: &Field) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let inv_lead = f.inv(d.lead())?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((UniPoly::zero(), self.clone()));
        }
        let mut quot = vec![0; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = f.mul(r[i], inv_lead);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &dj) in d.coeffs.iter().enumerate() {
                r[i - dd + j] = f.sub(r[i - dd + j], f.mul(c, dj));
            }
        }
        r.truncate(dd);
        Ok((UniPoly::new(quot), UniPoly::new(r)))
    }

    pub fn rem(&self, d: &Self, f: &Field) -> Result<Self> {
        Ok(self.divrem(d, f)?.1)
    }

    pub fn monic(&self, f: &Field) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(f.inv(self.lead()).unwrap(), f)
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Self, f: &Field) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f).unwrap();
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u128, m: &Self, f: &Field) -> Result<Self> {
        let mut base = self.rem(m, f)?;
        let mut acc = UniPoly::constant(1).rem(m, f)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f).rem(m, f)?;
            }
            base = base.mul(&base, f).rem(m, f)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: Elem, f: &Field) -> Elem {
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &Field) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
                .collect(),
        )
    }

    /// Irreducibility over `f` by `gcd(self, x^{q^i} - x) = 1` for `i <= deg/2`.
    pub fn is_irreducible(&self, f: &Field) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        let q = f.size() as u128;
        let x = UniPoly::x();
        let mut xq = x.clone();
        for _ in 1..=n / 2 {
            xq = xq.powmod(q, self, f).unwrap();
            if xq.sub(&x, f).gcd(self, f).degree() != Some(0) {
                return false;
            }
        }
        true
    }

    /// Apply a coefficient map (e.g. an embedding).
    pub fn map(&self, g: impl Fn(Elem) -> Elem) -> Self {
        UniPoly::new(self.coeffs.iter().map(|&c| g(c)).collect())
    }

    /// Comma-separated coefficients, constant first (field elements as integer encodings).
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Monic polynomials of degree `deg` over `f`, in increasing integer encoding
/// (constant coefficient least significant).
fn monic_polys(f: &Field, deg: usize) -> impl Iterator<Item = UniPoly> + '_ {
    let q = f.size() as u64;
    let count = q.pow(deg as u32);
    (0..count).map(move |mut n| {
        let mut c = Vec::with_capacity(deg + 1);
        for _ in 0..deg {
            c.push((n % q) as u32);
            n /= q;
        }
        c.push(1);
        UniPoly::new(c)
    })
}

fn least_irreducible(prime: &Field, k: usize) -> Vec<u32> {
    monic_polys(prime, k)
        .find(|m| m.is_irreducible(prime))
        .expect("irreducibles of every degree exist")
        .coeffs
}

/// Cap on `q^s` when listing irreducibles.
pub const DEFAULT_IRREDUCIBLE_CAP: u64 = 1 << 20;

/// All monic irreducibles of degree `s` over `f`: the degree-`s` finite places of `F_q(u)`.
pub fn monic_irreducibles(f: &Field, s: usize) -> Result<Vec<UniPoly>> {
    let total = (f.size() as u64).checked_pow(s as u32).unwrap_or(u64::MAX);
    if total > DEFAULT_IRREDUCIBLE_CAP {
        return Err(Error::Budget(format!("{total} candidate polynomials exceed cap")));
    }
    Ok(monic_polys(f, s).filter(|m| m.is_irreducible(f)).collect())
}

/// A ring embedding `src -> dst` given by sending the generator of `src` to a root of its
/// modulus in `dst`.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: Arc<Field>,
    dst: Arc<Field>,
    table: Vec<Elem>,
}

impl Embedding {
    pub fn apply(&self, a: Elem) -> Elem {
        self.table[a as usize]
    }

    pub fn src(&self) -> &Arc<Field> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<Field> {
        &self.dst
    }
}

/// Embed `src` into `dst`; the generator goes to the least root of `src`'s modulus.
pub fn embed(src: &Arc<Field>, dst: &Arc<Field>) -> Result<Embedding> {
    if src.p() != dst.p() || dst.k() % src.k() != 0 {
        return Err(Error::Precondition(format!("cannot embed {src:?} into {dst:?}")));
    }
    let modulus = UniPoly::new(src.spec.modulus.clone());
    let root = if src.k() == 1 {
        0
    } else {
        dst.elements()
            .find(|&r| modulus.eval(r, dst) == 0)
            .ok_or_else(|| Error::Precondition("no root of the modulus found".into()))?
    };
    let table = src
        .elements()
        .map(|a| {
            let c = src.coords(a);
            c.iter().rev().fold(0, |acc, &ci| dst.add(dst.mul(acc, root), ci))
        })
        .collect();
    Ok(Embedding { src: src.clone(), dst: dst.clone(), table })
}

/// All roots of `poly` in `f`, ascending.
pub fn roots(poly: &UniPoly, f: &Field) -> Vec<Elem> {
    f.elements().filter(|&x| poly.eval(x, f) == 0).collect()
}
