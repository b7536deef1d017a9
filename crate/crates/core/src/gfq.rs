//! Exact arithmetic in prime-power fields 𝔽_{p^e}.
//!
//! Elements are stored as their integer encoding: the base-p digits of the
//! index are the coefficients of the polynomial-basis representation, least
//! significant coefficient first. That integer is also the on-disk format.
//!
//! The reduction modulus is the lexicographically least monic irreducible of
//! degree `e`, where candidates are ordered by the integer encoding of their
//! non-leading coefficients. Contexts are cached per `(p, e)` so repeated
//! construction of the same field is cheap and always yields the same tables.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;
const LOG_TABLE_LIMIT: u32 = 1 << 16;
const ADD_TABLE_LIMIT: u32 = 256;

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElem(pub(crate) u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Integer encoding of the element.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serialized field descriptor `{"p": int, "e": int}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub e: u32,
}

#[derive(Debug)]
enum Kind {
    Prime,
    Binary,
    Tables,
    Generic,
}

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, low coefficient first, length e + 1.
    modulus: Vec<u32>,
    kind: Kind,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Vec<u16>,
    /// Trace of each basis monomial X^i.
    trace_basis: Vec<u32>,
}

/// A finite field context. Immutable and cheap to clone.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.e == other.0.e
    }
}

impl Eq for FieldCtx {}

impl std::hash::Hash for FieldCtx {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.0.p, self.0.e).hash(state);
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "GF({})", self.0.p)
        } else {
            write!(f, "GF({}^{})", self.0.p, self.0.e)
        }
    }
}

fn cache() -> &'static Mutex<HashMap<(u32, u32), FieldCtx>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), FieldCtx>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
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

/// Splits a prime power `q` into `(p, e)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if !(2..=MAX_FIELD_ORDER).contains(&q) {
        return None;
    }
    let q = q as u32;
    let p = *prime_factors(q).first()?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn digits(mut x: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `f` modulo monic `g` over 𝔽_p. Both low-first.
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gc) in g.iter().enumerate() {
                let t = (lead as u64 * gc as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for k in 1..=deg / 2 {
        let count = (p as u64).pow(k as u32);
        for idx in 0..count {
            let mut g = digits(idx as u32, p, k);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible polynomial of degree `e` over 𝔽_p.
fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    for idx in 0..count {
        let mut f = digits(idx as u32, p, e as usize);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Inner {
    fn mul_generic(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        let e = self.e as usize;
        let da = digits(a, p, e);
        let db = digits(b, p, e);
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        let prod: Vec<u32> = prod.iter().map(|&c| (c % p as u64) as u32).collect();
        let mut r = poly_rem(&prod, &self.modulus, p);
        r.resize(e, 0);
        undigits(&r, p)
    }

    fn pow_generic(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_generic(acc, base);
            }
            base = self.mul_generic(base, base);
            exp >>= 1;
        }
        acc
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        let p = self.p;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.e {
            r += ((a % p + b % p) % p) * pw;
            pw *= p;
            a /= p;
            b /= p;
        }
        r
    }

    fn neg_digits(&self, mut a: u32) -> u32 {
        let p = self.p;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.e {
            r += ((p - a % p) % p) * pw;
            pw *= p;
            a /= p;
        }
        r
    }
}

impl FieldCtx {
    /// Builds 𝔽_{p^e}. Fails for non-prime `p`, `e < 1`, or `p^e > 2^20`.
    pub fn new(p: u32, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if e < 1 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or_else(|| {
                Error::InvalidField(format!("{p}^{e} exceeds the field order cap 2^20"))
            })? as u32;
        if let Some(ctx) = cache().lock().unwrap().get(&(p, e)) {
            return Ok(ctx.clone());
        }
        let ctx = FieldCtx(Arc::new(Self::build(p, e, q)));
        cache().lock().unwrap().insert((p, e), ctx.clone());
        Ok(ctx)
    }

    pub fn from_descriptor(desc: FieldDescriptor) -> Result<Self> {
        Self::new(desc.p, desc.e)
    }

    /// Field of order `q`, which must be a prime power.
    pub fn with_order(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a supported prime power")))?;
        Self::new(p, e)
    }

    fn build(p: u32, e: u32, q: u32) -> Inner {
        let modulus = least_irreducible(p, e);
        let mut inner = Inner {
            p,
            e,
            q,
            modulus,
            kind: Kind::Generic,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: Vec::new(),
            trace_basis: Vec::new(),
        };

        // Trace of X^i as the Frobenius orbit sum; the result lies in 𝔽_p.
        let mut trace_basis = Vec::with_capacity(e as usize);
        for i in 0..e {
            let x = p.pow(i);
            let mut y = x;
            let mut sum = 0;
            for _ in 0..e {
                sum = inner.add_digits(sum, y);
                y = inner.pow_generic(y, p as u64);
            }
            debug_assert!(sum < p, "trace must land in the prime field");
            trace_basis.push(sum);
        }
        inner.trace_basis = trace_basis;

        if e == 1 {
            inner.kind = Kind::Prime;
        } else if q <= LOG_TABLE_LIMIT {
            let factors = prime_factors(q - 1);
            let generator = (2..q)
                .find(|&g| {
                    factors
                        .iter()
                        .all(|&l| inner.pow_generic(g, ((q - 1) / l) as u64) != 1)
                })
                .expect("multiplicative group is cyclic");
            let order = (q - 1) as usize;
            let mut exp = vec![0u32; 2 * order];
            let mut log = vec![0u32; q as usize];
            let mut x = 1;
            for i in 0..order {
                exp[i] = x;
                exp[i + order] = x;
                log[x as usize] = i as u32;
                x = inner.mul_generic(x, generator);
            }
            inner.exp = exp;
            inner.log = log;
            if p == 2 {
                inner.kind = Kind::Binary;
            } else {
                inner.kind = Kind::Tables;
                if q <= ADD_TABLE_LIMIT {
                    let mut table = vec![0u16; (q * q) as usize];
                    for a in 0..q {
                        for b in 0..q {
                            table[(a * q + b) as usize] = inner.add_digits(a, b) as u16;
                        }
                    }
                    inner.add_table = table;
                }
            }
        }
        inner
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.0.e
    }

    /// Field order q = p^e.
    #[inline]
    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.e == 1
    }

    /// Reduction modulus, low coefficient first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.0.p,
            e: self.0.e,
        }
    }

    /// Decodes an integer-encoded element.
    pub fn elem(&self, index: u64) -> Result<FieldElem> {
        if index >= self.0.q as u64 {
            return Err(Error::InvalidInput(format!(
                "element {index} out of range for {self:?}"
            )));
        }
        Ok(FieldElem(index as u32))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() != self.0.e as usize || coeffs.iter().any(|&c| c >= self.0.p) {
            return Err(Error::InvalidInput(format!(
                "coefficient vector {coeffs:?} invalid for {self:?}"
            )));
        }
        Ok(FieldElem(undigits(coeffs, self.0.p)))
    }

    /// Polynomial-basis coefficients, low first.
    pub fn coeffs(&self, x: FieldElem) -> Vec<u32> {
        digits(x.0, self.0.p, self.0.e as usize)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.0.q).map(FieldElem)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(0..self.0.q))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let inner = &*self.0;
        FieldElem(match inner.kind {
            Kind::Prime => {
                let s = a.0 + b.0;
                if s >= inner.p {
                    s - inner.p
                } else {
                    s
                }
            }
            _ if inner.p == 2 => a.0 ^ b.0,
            _ if !inner.add_table.is_empty() => {
                inner.add_table[(a.0 * inner.q + b.0) as usize] as u32
            }
            _ => inner.add_digits(a.0, b.0),
        })
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let inner = &*self.0;
        FieldElem(match inner.kind {
            Kind::Prime => {
                if a.0 == 0 {
                    0
                } else {
                    inner.p - a.0
                }
            }
            _ if inner.p == 2 => a.0,
            _ => inner.neg_digits(a.0),
        })
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let inner = &*self.0;
        match inner.kind {
            Kind::Prime => FieldElem((a.0 as u64 * b.0 as u64 % inner.p as u64) as u32),
            Kind::Binary | Kind::Tables => {
                if a.0 == 0 || b.0 == 0 {
                    FieldElem::ZERO
                } else {
                    FieldElem(inner.exp[(inner.log[a.0 as usize] + inner.log[b.0 as usize]) as usize])
                }
            }
            Kind::Generic => FieldElem(inner.mul_generic(a.0, b.0)),
        }
    }

    /// `a + b·c`, the inner step of every dot product.
    #[inline]
    pub fn mul_add(&self, a: FieldElem, b: FieldElem, c: FieldElem) -> FieldElem {
        self.add(a, self.mul(b, c))
    }

    pub fn pow(&self, base: FieldElem, mut exp: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        let mut base = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            return None;
        }
        let inner = &*self.0;
        Some(match inner.kind {
            Kind::Binary | Kind::Tables => {
                let order = inner.q - 1;
                FieldElem(inner.exp[((order - inner.log[a.0 as usize]) % order) as usize])
            }
            _ => self.pow(a, inner.q as u64 - 2),
        })
    }

    pub fn frobenius(&self, x: FieldElem) -> FieldElem {
        self.pow(x, self.0.p as u64)
    }

    /// Absolute trace to 𝔽_p, returned as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, x: FieldElem) -> u32 {
        let inner = &*self.0;
        if inner.e == 1 {
            return x.0;
        }
        let p = inner.p;
        let mut v = x.0;
        let mut acc = 0u64;
        for &t in &inner.trace_basis {
            acc += (v % p) as u64 * t as u64;
            v /= p;
        }
        (acc % p as u64) as u32
    }

    /// Nontrivial additive character ψ_j(x) = exp(2πi·j·Tr(x)/p).
    pub fn character(&self, j: u32) -> Result<Character> {
        let p = self.0.p;
        if j.is_multiple_of(p) {
            return Err(Error::InvalidInput(format!(
                "character index {j} is trivial modulo {p}"
            )));
        }
        let roots = (0..p)
            .map(|t| {
                let k = (j as u64 * t as u64 % p as u64) as f64;
                Complex64::from_polar(1.0, TAU * k / p as f64)
            })
            .collect();
        Ok(Character {
            field: self.clone(),
            j: j % p,
            roots,
        })
    }

    pub fn char_psi(&self, j: u32, x: FieldElem) -> Result<Complex64> {
        Ok(self.character(j)?.eval(x))
    }

    /// Embedding of this field into its degree-`k` extension 𝔽_{q^k}, built
    /// directly over 𝔽_p. The generator X maps to the least root (by encoding)
    /// of this field's modulus in the extension.
    pub fn extension(&self, k: u32) -> Result<Embedding> {
        if k < 1 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let e = self
            .0
            .e
            .checked_mul(k)
            .ok_or_else(|| Error::InvalidField("extension degree overflow".into()))?;
        let target = FieldCtx::new(self.0.p, e)?;
        if k == 1 {
            return Ok(Embedding {
                source: self.clone(),
                target,
                map: None,
            });
        }
        if self.is_prime_field() {
            // Prime-subfield elements share their encoding.
            return Ok(Embedding {
                source: self.clone(),
                target,
                map: None,
            });
        }
        let modulus: Vec<FieldElem> = self.0.modulus.iter().map(|&c| FieldElem(c)).collect();
        let root = target
            .elements()
            .find(|&t| {
                modulus
                    .iter()
                    .rev()
                    .fold(FieldElem::ZERO, |acc, &c| target.add(target.mul(acc, t), c))
                    .is_zero()
            })
            .ok_or_else(|| Error::Internal("no root of the base modulus in extension".into()))?;
        let powers: Vec<FieldElem> = (0..self.0.e as u64).map(|i| target.pow(root, i)).collect();
        let map = self
            .elements()
            .map(|x| {
                self.coeffs(x)
                    .iter()
                    .zip(&powers)
                    .fold(FieldElem::ZERO, |acc, (&c, &pw)| {
                        target.add(acc, target.mul(FieldElem(c), pw))
                    })
            })
            .collect();
        Ok(Embedding {
            source: self.clone(),
            target,
            map: Some(map),
        })
    }
}

/// Field homomorphism 𝔽_q → 𝔽_{q^k}.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FieldCtx,
    target: FieldCtx,
    map: Option<Vec<FieldElem>>,
}

impl Embedding {
    pub fn source(&self) -> &FieldCtx {
        &self.source
    }

    pub fn target(&self) -> &FieldCtx {
        &self.target
    }

    #[inline]
    pub fn apply(&self, x: FieldElem) -> FieldElem {
        match &self.map {
            None => x,
            Some(map) => map[x.0 as usize],
        }
    }
}

/// A precomputed additive character.
#[derive(Clone, Debug)]
pub struct Character {
    field: FieldCtx,
    j: u32,
    roots: Vec<Complex64>,
}

impl Character {
    pub fn index(&self) -> u32 {
        self.j
    }

    #[inline]
    pub fn eval(&self, x: FieldElem) -> Complex64 {
        self.roots[self.field.trace(x) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields() -> Vec<FieldCtx> {
        [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (5, 2), (2, 8), (3, 5)]
            .iter()
            .map(|&(p, e)| FieldCtx::new(p, e).unwrap())
            .collect()
    }

    #[test]
    fn prime_field_has_modulus_x() {
        let f = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 2);
    }

    #[test]
    fn gf9_modulus_is_least_irreducible() {
        let f = FieldCtx::new(3, 2).unwrap();
        let m = f.modulus().to_vec();
        let eval = |poly: &[u32], x: u32| poly.iter().rev().fold(0, |acc, &c| (acc * x + c) % 3);
        // Oracle: a quadratic is irreducible iff it has no root in 𝔽_3.
        assert!((0..3).all(|x| eval(&m, x) != 0));
        let idx = m[0] + 3 * m[1];
        for smaller in 0..idx {
            let cand = [smaller % 3, smaller / 3, 1];
            assert!((0..3).any(|x| eval(&cand, x) == 0), "{cand:?} should be reducible");
        }
        assert_eq!(m, vec![1, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldCtx::new(4, 1), Err(Error::InvalidField(_))));
        assert!(FieldCtx::new(2, 0).is_err());
        assert!(FieldCtx::new(2, 21).is_err());
        assert!(FieldCtx::new(2, 20).is_ok());
    }

    #[test]
    fn trace_examples() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f2.trace(FieldElem::ONE), 1);
        for f in fields() {
            assert_eq!(f.trace(FieldElem::ZERO), 0);
        }
        // 𝔽_4 = 𝔽_2[x]/(x^2+x+1), generator g = x: g + g^2 = x + (x+1) = 1.
        let f4 = FieldCtx::new(2, 2).unwrap();
        let g = f4.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(f4.add(g, f4.mul(g, g)), FieldElem::ONE);
        assert_eq!(f4.trace(g), 1);
    }

    #[test]
    fn trace_matches_frobenius_sum() {
        for f in fields() {
            for x in f.elements().take(300) {
                let mut y = x;
                let mut sum = FieldElem::ZERO;
                for _ in 0..f.e() {
                    sum = f.add(sum, y);
                    y = f.frobenius(y);
                }
                assert!(sum.index() < f.p());
                assert_eq!(sum.index(), f.trace(x));
            }
        }
    }

    #[test]
    fn trace_is_linear_surjective_and_frobenius_invariant() {
        for f in fields() {
            let xs: Vec<_> = f.elements().take(60).collect();
            for &x in &xs {
                assert_eq!(f.trace(f.frobenius(x)), f.trace(x));
                for &y in &xs {
                    assert_eq!(f.trace(f.add(x, y)), (f.trace(x) + f.trace(y)) % f.p());
                }
            }
            let mut hit = vec![false; f.p() as usize];
            for x in f.elements() {
                hit[f.trace(x) as usize] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn character_examples() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert!((f2.char_psi(1, FieldElem::ZERO).unwrap() - 1.0).norm() < 1e-15);
        assert!((f2.char_psi(1, FieldElem::ONE).unwrap() + 1.0).norm() < 1e-15);
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((f3.char_psi(1, FieldElem::ONE).unwrap() - w).norm() < 1e-15);
        assert!(f3.char_psi(3, FieldElem::ONE).is_err());
    }

    #[test]
    fn characters_are_orthogonal_and_additive() {
        for f in fields() {
            for j in 1..f.p() {
                let psi = f.character(j).unwrap();
                let total: Complex64 = f.elements().map(|x| psi.eval(x)).sum();
                assert!(total.norm() < 1e-9, "{f:?} j={j}");
                for x in f.elements().take(20) {
                    for y in f.elements().take(20) {
                        let lhs = psi.eval(f.add(x, y));
                        let rhs = psi.eval(x) * psi.eval(y);
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn every_nonzero_element_has_order_dividing_q_minus_one() {
        for f in fields() {
            for x in f.elements().skip(1) {
                assert_eq!(f.pow(x, f.order() as u64 - 1), FieldElem::ONE);
                assert_eq!(f.mul(f.inv(x).unwrap(), x), FieldElem::ONE);
            }
        }
    }

    #[test]
    fn table_and_generic_paths_agree() {
        for f in fields() {
            for a in f.elements().take(64) {
                for b in f.elements().take(64) {
                    assert_eq!(f.mul(a, b).index(), f.0.mul_generic(a.index(), b.index()));
                    assert_eq!(f.add(a, b).index(), f.0.add_digits(a.index(), b.index()));
                }
            }
        }
    }

    #[test]
    fn extension_embedding_is_a_homomorphism() {
        for (p, e, k) in [(2, 1, 4), (3, 1, 3), (2, 2, 3), (3, 2, 2), (5, 1, 2)] {
            let f = FieldCtx::new(p, e).unwrap();
            let emb = f.extension(k).unwrap();
            let t = emb.target();
            assert_eq!(t.order() as u64, (f.order() as u64).pow(k));
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(emb.apply(f.add(a, b)), t.add(emb.apply(a), emb.apply(b)));
                    assert_eq!(emb.apply(f.mul(a, b)), t.mul(emb.apply(a), emb.apply(b)));
                }
            }
            assert_eq!(emb.apply(FieldElem::ONE), FieldElem::ONE);
        }
    }

    #[test]
    fn prime_power_splitting() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    proptest! {
        #[test]
        fn field_axioms(fi in 0usize..9, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = &fields()[fi];
            let q = f.order();
            let (a, b, c) = (FieldElem(a % q), FieldElem(b % q), FieldElem(c % q));
            prop_assert_eq!(f.mul(f.add(a, b), c), f.add(f.mul(a, c), f.mul(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(a, f.neg(a)), FieldElem::ZERO);
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
            }
        }
    }
}
