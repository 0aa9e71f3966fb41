//! Fixed-precision coefficient arithmetic.
//!
//! A [`CoefficientRing`] is either `Zp` or the ring of integers of its
//! unramified extension of degree `d`, truncated at `p^N`.  Elements
//! ([`RingElem`]) are stored as `d` residues modulo `p^N` with respect to the
//! power basis `1, α, …, α^{d-1}`, where `α` is a root of the lifted residue
//! modulus.  Because the extension is unramified, `p` is a uniformizer and the
//! valuation of an element is the minimum of the valuations of its coordinates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest supported `p^N`; keeps every sum of two residues inside `u128`.
const MODULUS_CAP: u128 = 1 << 126;

/// Valuation of a ring element; zero-at-precision never reports a plain integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    /// Exactly `v`, with `v < N`.
    Finite(u32),
    /// The element vanishes modulo `p^N`; its valuation is at least `N`.
    AtLeast(u32),
}

impl Valuation {
    /// The finite value, if any.
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Lower bound usable for comparisons (`AtLeast(N)` sorts after every finite value).
    pub fn key(self) -> u64 {
        match self {
            Valuation::Finite(v) => v as u64,
            Valuation::AtLeast(n) => n as u64 + (1 << 40),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// Binary operation selector for [`CoefficientRing::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    /// Inverse of the left operand; the right operand is ignored.
    Invert,
}

#[derive(Debug, PartialEq, Eq)]
struct RingSpec {
    prime: u64,
    degree: usize,
    precision: u32,
    modulus: u128,
    /// Monic residue modulus over `F_p`, constant term first, length `degree + 1`.
    residue_modulus: Vec<u64>,
}

/// `Zp` or an unramified extension of degree `d`, at precision `p^N`.
///
/// Cloning is cheap (shared immutable description).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientRing(Arc<RingSpec>);

/// An element of a [`CoefficientRing`]: `d` coordinates in `[0, p^N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElem {
    coords: SmallVec<[u128; 2]>,
}

impl RingElem {
    /// Coordinates with respect to the power basis of the residue modulus.
    pub fn coords(&self) -> &[u128] {
        &self.coords
    }

    /// The first coordinate (the whole element when `d = 1`).
    pub fn rational_part(&self) -> u128 {
        self.coords[0]
    }

    /// True when every coordinate is zero modulo `p^N`.
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl CoefficientRing {
    /// `Zp` (degree 1) or the unramified extension of degree `degree`, using the
    /// default residue modulus: `x² − c` with `c` the least quadratic non-residue
    /// for degree 2, the lexicographically first irreducible monic otherwise.
    pub fn new(prime: u64, degree: usize, precision: u32) -> Result<Self> {
        validate_prime(prime)?;
        let residue_modulus = default_residue_modulus(prime, degree)?;
        Self::with_residue_modulus(prime, precision, residue_modulus)
    }

    /// `Zp` at precision `p^precision`.
    pub fn zp(prime: u64, precision: u32) -> Result<Self> {
        Self::new(prime, 1, precision)
    }

    /// Unramified extension defined by an explicit monic residue modulus
    /// (constant term first).  The modulus must be irreducible modulo `p`.
    pub fn with_residue_modulus(prime: u64, precision: u32, residue_modulus: Vec<u64>) -> Result<Self> {
        validate_prime(prime)?;
        if precision == 0 {
            return Err(Error::input("precision", "precision exponent must be at least 1"));
        }
        let degree = residue_modulus.len().saturating_sub(1);
        if degree == 0 {
            return Err(Error::input("residue_modulus", "modulus must have degree at least 1"));
        }
        if *residue_modulus.last().unwrap() != 1 {
            return Err(Error::input("residue_modulus", "modulus must be monic"));
        }
        let residue_modulus: Vec<u64> = residue_modulus.iter().map(|&c| c % prime).collect();
        if !fp::is_irreducible(&residue_modulus, prime) {
            return Err(Error::input("residue_modulus", "modulus is not irreducible modulo p"));
        }
        let modulus = checked_pow(prime as u128, precision)
            .filter(|&m| m < MODULUS_CAP)
            .ok_or_else(|| Error::resource(format!("p^N = {prime}^{precision} exceeds 2^126")))?;
        Ok(CoefficientRing(Arc::new(RingSpec { prime, degree, precision, modulus, residue_modulus })))
    }

    pub fn prime(&self) -> u64 {
        self.0.prime
    }

    /// Unramified degree `d`.
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    /// Precision exponent `N`.
    pub fn precision(&self) -> u32 {
        self.0.precision
    }

    /// `p^N`.
    pub fn modulus(&self) -> u128 {
        self.0.modulus
    }

    /// Monic residue modulus over `F_p`, constant term first.
    pub fn residue_modulus(&self) -> &[u64] {
        &self.0.residue_modulus
    }

    /// The same ring at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::with_residue_modulus(self.prime(), precision, self.0.residue_modulus.clone())
    }

    pub fn zero(&self) -> RingElem {
        RingElem { coords: SmallVec::from_elem(0, self.degree()) }
    }

    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }

    /// Embeds a rational integer.
    pub fn from_int(&self, x: i128) -> RingElem {
        let mut e = self.zero();
        e.coords[0] = self.reduce_signed(x);
        e
    }

    /// Builds an element from coordinates (reduced modulo `p^N`).
    pub fn from_coords(&self, coords: &[u128]) -> Result<RingElem> {
        if coords.len() != self.degree() {
            return Err(Error::input(
                "coefficient",
                format!("expected {} coordinates, found {}", self.degree(), coords.len()),
            ));
        }
        Ok(RingElem { coords: coords.iter().map(|&c| c % self.modulus()).collect() })
    }

    /// Parses a base-10 integer string (optionally signed) into a residue mod `p^N`.
    pub fn parse_coordinate(&self, text: &str) -> Result<u128> {
        let t = text.trim();
        let (neg, digits) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::input("coefficient", format!("`{text}` is not a base-10 integer")));
        }
        let m = self.modulus();
        let mut acc: u128 = 0;
        for b in digits.bytes() {
            acc = add_mod(mul_mod(acc, 10, m), (b - b'0') as u128, m);
        }
        Ok(if neg { neg_mod(acc, m) } else { acc })
    }

    fn reduce_signed(&self, x: i128) -> u128 {
        let m = self.modulus();
        let r = x.unsigned_abs() % m;
        if x < 0 {
            neg_mod(r, m)
        } else {
            r
        }
    }

    /// Generic binary operation (see [`ArithOp`]).
    pub fn arith(&self, a: &RingElem, b: &RingElem, op: ArithOp) -> Result<RingElem> {
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Invert => self.invert(a)?,
        })
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let m = self.modulus();
        RingElem { coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| add_mod(x, y, m)).collect() }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let m = self.modulus();
        RingElem { coords: a.coords.iter().zip(&b.coords).map(|(&x, &y)| sub_mod(x, y, m)).collect() }
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        let m = self.modulus();
        RingElem { coords: a.coords.iter().map(|&x| neg_mod(x, m)).collect() }
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let m = self.modulus();
        let d = self.degree();
        if d == 1 {
            return RingElem { coords: SmallVec::from_elem(mul_mod(a.coords[0], b.coords[0], m), 1) };
        }
        let mut prod = vec![0u128; 2 * d - 1];
        for (i, &x) in a.coords.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coords.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x, y, m), m);
            }
        }
        // Reduce by the monic lift of the residue modulus (coefficients < p).
        let f = &self.0.residue_modulus;
        for k in (d..2 * d - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for i in 0..d {
                let t = mul_mod(c, f[i] as u128, m);
                prod[k - d + i] = sub_mod(prod[k - d + i], t, m);
            }
        }
        prod.truncate(d);
        RingElem { coords: prod.into_iter().collect() }
    }

    /// Multiplication by a rational integer residue.
    pub fn scale(&self, a: &RingElem, c: u128) -> RingElem {
        let m = self.modulus();
        RingElem { coords: a.coords.iter().map(|&x| mul_mod(x, c % m, m)).collect() }
    }

    /// `p`-adic valuation, `AtLeast(N)` for zero at precision.
    pub fn valuation(&self, a: &RingElem) -> Valuation {
        let n = self.precision();
        let v = a.coords.iter().filter(|&&c| c != 0).map(|&c| vp_u128(c, self.prime())).min();
        match v {
            Some(v) if v < n => Valuation::Finite(v),
            _ => Valuation::AtLeast(n),
        }
    }

    pub fn is_unit(&self, a: &RingElem) -> bool {
        self.valuation(a) == Valuation::Finite(0)
    }

    /// Inverse of a unit, exact at full precision.
    pub fn invert(&self, a: &RingElem) -> Result<RingElem> {
        let v = self.valuation(a);
        if v != Valuation::Finite(0) {
            return Err(Error::NonUnit { valuation: v.to_string() });
        }
        let p = self.prime();
        let residues: Vec<u64> = a.coords.iter().map(|&c| (c % p as u128) as u64).collect();
        let inv0 = fp::invert_mod(&residues, &self.0.residue_modulus, p)
            .ok_or_else(|| Error::NonUnit { valuation: "0 (residue not invertible)".into() })?;
        let mut x = RingElem { coords: inv0.iter().map(|&c| c as u128).collect() };
        // Newton iteration x <- x(2 - a x) doubles the p-adic precision.
        let two = self.from_int(2);
        let mut known = 1u32;
        while known < self.precision() {
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
            known = known.saturating_mul(2);
        }
        Ok(x)
    }

    /// Exact division by `p^k` of an element divisible by `p^k`; the top `k`
    /// digits of the result are unknown and reported as zero.
    pub fn div_p_pow(&self, a: &RingElem, k: u32) -> RingElem {
        let pk = (self.prime() as u128).pow(k);
        RingElem { coords: a.coords.iter().map(|&c| c / pk).collect() }
    }

    /// Multiplication by `p^k` (truncated at precision).
    pub fn mul_p_pow(&self, a: &RingElem, k: u32) -> RingElem {
        if k >= self.precision() {
            return self.zero();
        }
        self.scale(a, (self.prime() as u128).pow(k))
    }

    /// Canonical base-10 rendering: an integer for `d = 1`, `[a0,a1,…]` otherwise.
    pub fn render(&self, a: &RingElem) -> String {
        if self.degree() == 1 {
            a.coords[0].to_string()
        } else {
            let parts: Vec<String> = a.coords.iter().map(|c| c.to_string()).collect();
            format!("[{}]", parts.join(","))
        }
    }

    /// Coordinates as base-10 strings (the JSON wire format).
    pub fn to_strings(&self, a: &RingElem) -> Vec<String> {
        a.coords.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 1 {
            write!(f, "Z_{} mod {}^{}", self.prime(), self.prime(), self.precision())
        } else {
            write!(f, "O_{}(deg {}) mod {}^{}", self.prime(), self.degree(), self.prime(), self.precision())
        }
    }
}

fn validate_prime(p: u64) -> Result<()> {
    if p < 5 {
        return Err(Error::input("p", format!("prime must be at least 5, got {p}")));
    }
    if !is_prime(p) {
        return Err(Error::input("p", format!("{p} is not prime")));
    }
    Ok(())
}

fn default_residue_modulus(p: u64, d: usize) -> Result<Vec<u64>> {
    match d {
        0 => Err(Error::input("unramified_degree", "degree must be at least 1")),
        1 => Ok(vec![0, 1]),
        2 => {
            let c = (2..p).find(|&c| fp::pow_mod(c, (p - 1) / 2, p) == p - 1).expect("odd prime has a non-residue");
            Ok(vec![(p - c) % p, 0, 1])
        }
        _ => fp::first_irreducible(p, d)
            .ok_or_else(|| Error::resource(format!("no irreducible of degree {d} found by search"))),
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = fp::pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub(crate) fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// `v_p(x)` for nonzero `x`.
pub(crate) fn vp_u128(mut x: u128, p: u64) -> u32 {
    let p = p as u128;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

#[inline]
pub(crate) fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
pub(crate) fn neg_mod(a: u128, m: u128) -> u128 {
    if a == 0 {
        0
    } else {
        m - a
    }
}

/// `a·b mod m` for `m < 2^126`.
pub(crate) fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= 1 << 64 {
        return (a % m) * (b % m) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut r = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            r = add_mod(r, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    r
}

/// Polynomial arithmetic over the prime field (constant term first).
pub(crate) mod fp {
    pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
        let mut r = 1u64 % m;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                r = ((r as u128 * b as u128) % m as u128) as u64;
            }
            b = ((b as u128 * b as u128) % m as u128) as u64;
            e >>= 1;
        }
        r
    }

    #[inline]
    fn mulp(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(out)
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulp(x, y, p)) % p;
            }
        }
        trim(out)
    }

    /// Returns `(quotient, remainder)` of `a / b`, `b` nonzero.
    fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut r = trim(a.to_vec());
        let b = trim(b.to_vec());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = inv(*b.last().unwrap(), p);
        let mut q = vec![0u64; r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let c = mulp(*r.last().unwrap(), lead_inv, p);
            q[shift] = c;
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - mulp(c, bi, p)) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        divrem(&mul(a, b, p), f, p).1
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = divrem(&a, &b, p).1;
            a = b;
            b = r;
        }
        a
    }

    /// Ben-Or irreducibility test: `gcd(x^{p^i} − x, f) = 1` for `i ≤ deg f / 2`.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let d = f.len().saturating_sub(1);
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 1..=d / 2 {
            // xp <- xp^p mod f
            let mut acc = vec![1u64];
            let mut base = xp.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, &f, p);
                }
                base = mulmod(&base, &base, &f, p);
                e >>= 1;
            }
            xp = acc;
            let g = gcd(&f, &sub(&xp, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    /// Lexicographically first monic irreducible of degree `d`.
    pub fn first_irreducible(p: u64, d: usize) -> Option<Vec<u64>> {
        let total = (p as u128).checked_pow(d as u32)?;
        let limit = total.min(1 << 20);
        for idx in 0..limit {
            let mut f = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                f.push((t % p as u128) as u64);
                t /= p as u128;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return Some(f);
            }
        }
        None
    }

    /// Inverse of `a` in `F_p[x]/(f)`, padded to `deg f` coordinates.
    pub fn invert_mod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
        let d = f.len() - 1;
        // Extended Euclid on (f, a).
        let (mut r0, mut r1) = (trim(f.to_vec()), trim(a.to_vec()));
        let (mut t0, mut t1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let t2 = sub(&t0, &mul(&q, &t1, p), p);
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t2;
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv(r0[0], p);
        let mut out: Vec<u64> = divrem(&t0, f, p).1.iter().map(|&x| mulp(x, c, p)).collect();
        out.resize(d, 0);
        Some(out)
    }
}
