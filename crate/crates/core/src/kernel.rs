//! Word-level modular arithmetic for the hot loops.
//!
//! [`Zmod`] abstracts residues modulo `p^k` with lazily-reduced convolution
//! kernels; [`Narrow`] keeps residues in `u64` and accumulates products without
//! intermediate reduction, [`Wide`] handles any modulus below `2^126` by
//! splitting one operand into limbs so that `u128` accumulators never overflow.
//! [`PolyQuot`] is the quotient `(Z/p^k)[T]/(f)` for a monic `f`, used both for
//! `Zp[T]/ω_n` (level coinvariants) and `Zp[T]/Φ_j` (the ring of integers of
//! the `p^j`-th cyclotomic field in the variable `T = ζ − 1`).

use std::fmt::Debug;

use crate::padic::{add_mod, checked_pow, mul_mod, neg_mod, sub_mod};

/// Residues modulo `p^k` with fast polynomial kernels.
pub(crate) trait Zmod: Clone + Send + Sync {
    type W: Copy + Default + PartialEq + Debug + Send + Sync;

    fn prime(&self) -> u64;
    /// Current precision exponent `k`.
    fn digits(&self) -> u32;
    /// Same kernel at a smaller precision (`digits ≤ self.digits()`).
    fn lower(&self, digits: u32) -> Self;

    fn from_u128(&self, x: u128) -> Self::W;
    fn to_u128(&self, w: Self::W) -> u128;

    fn zero(&self) -> Self::W {
        Self::W::default()
    }
    fn is_zero(&self, w: Self::W) -> bool {
        w == Self::W::default()
    }
    fn add(&self, a: Self::W, b: Self::W) -> Self::W;
    fn sub(&self, a: Self::W, b: Self::W) -> Self::W;
    fn neg(&self, a: Self::W) -> Self::W;
    fn mul(&self, a: Self::W, b: Self::W) -> Self::W;

    /// Residue modulo `p`.
    fn residue(&self, w: Self::W) -> u64 {
        (self.to_u128(w) % self.prime() as u128) as u64
    }
    /// Exact division by `p^e` of a residue divisible by `p^e`.
    fn div_p_pow(&self, w: Self::W, e: u32) -> Self::W {
        self.from_u128(self.to_u128(w) / (self.prime() as u128).pow(e))
    }
    /// `v_p` of a residue, `None` for zero.
    fn vp(&self, w: Self::W) -> Option<u32> {
        let x = self.to_u128(w);
        if x == 0 {
            return None;
        }
        Some(crate::padic::vp_u128(x, self.prime()))
    }

    /// Full convolution `out[k] = Σ a[i]·b[k−i]`, reduced.
    fn convolve(&self, a: &[Self::W], b: &[Self::W]) -> Vec<Self::W>;
    /// `low + Σ_i high[i]·rows[i]`, reduced; every row has `low.len()` entries.
    fn fold(&self, low: &[Self::W], high: &[Self::W], rows: &[Vec<Self::W>]) -> Vec<Self::W>;
}

/// Largest `k ≤ want` with `p^{2k}·terms < 2^64`, i.e. the narrow kernel's reach.
pub(crate) fn narrow_digits(p: u64, want: u32, terms: usize) -> u32 {
    let mut k = 0;
    while k < want {
        let Some(m) = checked_pow(p as u128, k + 1) else { break };
        let bound = m.checked_mul(m).and_then(|x| x.checked_mul(terms.max(1) as u128 + 1));
        match bound {
            Some(b) if b < 1u128 << 64 => k += 1,
            _ => break,
        }
    }
    k
}

/// Residues `< 2^32`-ish in `u64`; products summed without reduction.
#[derive(Clone, Debug)]
pub(crate) struct Narrow {
    p: u64,
    k: u32,
    m: u64,
}

impl Narrow {
    /// `None` when `p^{2k}·terms` does not fit the accumulator.
    pub fn new(p: u64, k: u32, terms: usize) -> Option<Self> {
        if k == 0 || narrow_digits(p, k, terms) < k {
            return None;
        }
        Some(Narrow { p, k, m: (p as u64).pow(k) })
    }
}

impl Zmod for Narrow {
    type W = u64;

    fn prime(&self) -> u64 {
        self.p
    }
    fn digits(&self) -> u32 {
        self.k
    }
    fn lower(&self, digits: u32) -> Self {
        let k = digits.min(self.k);
        Narrow { p: self.p, k, m: self.p.pow(k) }
    }
    fn from_u128(&self, x: u128) -> u64 {
        (x % self.m as u128) as u64
    }
    fn to_u128(&self, w: u64) -> u128 {
        w as u128
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }
    #[inline]
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.m
    }

    fn convolve(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (la, lb) = (effective_len(a), effective_len(b));
        if la == 0 || lb == 0 {
            return Vec::new();
        }
        let (a, b) = if la <= lb { (&a[..la], &b[..lb]) } else { (&b[..lb], &a[..la]) };
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (o, &y) in out[i..i + b.len()].iter_mut().zip(b) {
                *o += x * y;
            }
        }
        for o in out.iter_mut() {
            *o %= self.m;
        }
        out
    }

    fn fold(&self, low: &[u64], high: &[u64], rows: &[Vec<u64>]) -> Vec<u64> {
        let mut out = low.to_vec();
        for (&h, row) in high.iter().zip(rows) {
            if h == 0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o += h * r;
            }
        }
        for o in out.iter_mut() {
            *o %= self.m;
        }
        out
    }
}

/// Any modulus below `2^126`, residues in `u128`, limb-split accumulation.
#[derive(Clone, Debug)]
pub(crate) struct Wide {
    p: u64,
    k: u32,
    m: u128,
    limb_bits: u32,
    limbs: u32,
}

impl Wide {
    /// `terms` bounds the number of products summed into one accumulator.
    pub fn new(p: u64, k: u32, terms: usize) -> Option<Self> {
        let m = checked_pow(p as u128, k)?;
        if m >= 1 << 126 {
            return None;
        }
        let mbits = 128 - m.leading_zeros();
        let tbits = 128 - (terms.max(1) as u128 + 1).leading_zeros();
        let spare = 127i64 - mbits as i64 - tbits as i64;
        if spare < 1 {
            return None;
        }
        let limb_bits = spare as u32;
        let limbs = mbits.div_ceil(limb_bits).max(1);
        Some(Wide { p, k, m, limb_bits, limbs })
    }

    fn combine(&self, accs: &[Vec<u128>]) -> Vec<u128> {
        let n = accs[0].len();
        let shift_ok = self.limbs > 1;
        (0..n)
            .map(|i| {
                let mut r = accs[self.limbs as usize - 1][i] % self.m;
                if shift_ok {
                    for l in (0..self.limbs as usize - 1).rev() {
                        r = ((r << self.limb_bits) % self.m + accs[l][i] % self.m) % self.m;
                    }
                }
                r
            })
            .collect()
    }

    fn split(&self, x: u128) -> impl Iterator<Item = u128> + '_ {
        let mask = (1u128 << self.limb_bits) - 1;
        (0..self.limbs).map(move |l| (x >> (l * self.limb_bits)) & mask)
    }
}

impl Zmod for Wide {
    type W = u128;

    fn prime(&self) -> u64 {
        self.p
    }
    fn digits(&self) -> u32 {
        self.k
    }
    fn lower(&self, digits: u32) -> Self {
        let k = digits.min(self.k);
        Wide { k, m: (self.p as u128).pow(k), ..self.clone() }
    }
    fn from_u128(&self, x: u128) -> u128 {
        x % self.m
    }
    fn to_u128(&self, w: u128) -> u128 {
        w
    }
    fn add(&self, a: u128, b: u128) -> u128 {
        add_mod(a, b, self.m)
    }
    fn sub(&self, a: u128, b: u128) -> u128 {
        sub_mod(a, b, self.m)
    }
    fn neg(&self, a: u128) -> u128 {
        neg_mod(a, self.m)
    }
    fn mul(&self, a: u128, b: u128) -> u128 {
        mul_mod(a, b, self.m)
    }

    fn convolve(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let (la, lb) = (effective_len(a), effective_len(b));
        if la == 0 || lb == 0 {
            return Vec::new();
        }
        let (a, b) = if la <= lb { (&a[..la], &b[..lb]) } else { (&b[..lb], &a[..la]) };
        let n = a.len() + b.len() - 1;
        let mut accs = vec![vec![0u128; n]; self.limbs as usize];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (l, xl) in self.split(x).enumerate() {
                if xl == 0 {
                    continue;
                }
                for (o, &y) in accs[l][i..i + b.len()].iter_mut().zip(b) {
                    *o += xl * y;
                }
            }
        }
        self.combine(&accs)
    }

    fn fold(&self, low: &[u128], high: &[u128], rows: &[Vec<u128>]) -> Vec<u128> {
        let n = low.len();
        let mut accs = vec![vec![0u128; n]; self.limbs as usize];
        accs[0].copy_from_slice(low);
        for (&h, row) in high.iter().zip(rows) {
            if h == 0 {
                continue;
            }
            for (l, hl) in self.split(h).enumerate() {
                if hl == 0 {
                    continue;
                }
                for (o, &r) in accs[l].iter_mut().zip(row) {
                    *o += hl * r;
                }
            }
        }
        self.combine(&accs)
    }
}

fn effective_len<W: Copy + Default + PartialEq>(a: &[W]) -> usize {
    let zero = W::default();
    a.iter().rposition(|&x| x != zero).map_or(0, |i| i + 1)
}

/// `(Z/p^k)[T]/(f)` for a monic `f` of degree `D ≥ 1`; elements are dense
/// vectors of length `D`.
#[derive(Clone, Debug)]
pub(crate) struct PolyQuot<Z: Zmod> {
    pub z: Z,
    deg: usize,
    /// Lower coefficients of `f` (the leading `1` is implicit).
    f_low: Vec<Z::W>,
    /// `table[i] = T^{D+i} mod f` for `i < D`.
    table: Vec<Vec<Z::W>>,
}

impl<Z: Zmod> PolyQuot<Z> {
    /// `f` is given by residues, constant first, including the leading `1`.
    pub fn new(z: Z, f: &[u128]) -> Self {
        let deg = f.len() - 1;
        let f_low: Vec<Z::W> = f[..deg].iter().map(|&c| z.from_u128(c)).collect();
        let mut table = Vec::with_capacity(deg);
        // T^D = −f_low
        let mut cur: Vec<Z::W> = f_low.iter().map(|&c| z.neg(c)).collect();
        for _ in 0..deg {
            table.push(cur.clone());
            // multiply by T
            let top = cur[deg - 1];
            let mut next = vec![z.zero(); deg];
            next[1..deg].copy_from_slice(&cur[..deg - 1]);
            for i in 0..deg {
                next[i] = z.sub(next[i], z.mul(top, f_low[i]));
            }
            cur = next;
        }
        PolyQuot { z, deg, f_low, table }
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    /// Same quotient at lower precision.
    pub fn lower(&self, digits: u32) -> Self {
        let z = self.z.lower(digits);
        let red = |v: &Vec<Z::W>| v.iter().map(|&c| z.from_u128(self.z.to_u128(c))).collect::<Vec<_>>();
        PolyQuot {
            f_low: red(&self.f_low),
            table: self.table.iter().map(red).collect(),
            deg: self.deg,
            z,
        }
    }

    pub fn zero(&self) -> Vec<Z::W> {
        vec![self.z.zero(); self.deg]
    }

    pub fn one(&self) -> Vec<Z::W> {
        let mut v = self.zero();
        v[0] = self.z.from_u128(1);
        v
    }

    pub fn is_zero(&self, a: &[Z::W]) -> bool {
        a.iter().all(|&c| self.z.is_zero(c))
    }

    /// Reduces a polynomial of any length modulo `f`.
    pub fn reduce(&self, coeffs: &[Z::W]) -> Vec<Z::W> {
        let d = self.deg;
        if coeffs.len() <= d {
            let mut v = coeffs.to_vec();
            v.resize(d, self.z.zero());
            return v;
        }
        if coeffs.len() <= 2 * d {
            return self.z.fold(&coeffs[..d], &coeffs[d..], &self.table);
        }
        // Horner over blocks of length D from the top: acc <- acc·T^D + block.
        let nblocks = coeffs.len().div_ceil(d);
        let mut acc = self.zero();
        for b in (0..nblocks).rev() {
            let start = b * d;
            let end = (start + d).min(coeffs.len());
            let mut block = coeffs[start..end].to_vec();
            block.resize(d, self.z.zero());
            acc = self.z.fold(&block, &acc, &self.table);
        }
        acc
    }

    /// Reduces polynomial residues given as `u128`.
    pub fn reduce_u128(&self, coeffs: &[u128]) -> Vec<Z::W> {
        let w: Vec<Z::W> = coeffs.iter().map(|&c| self.z.from_u128(c)).collect();
        self.reduce(&w)
    }

    pub fn mul(&self, a: &[Z::W], b: &[Z::W]) -> Vec<Z::W> {
        let prod = self.z.convolve(a, b);
        self.reduce(&prod)
    }

    pub fn add(&self, a: &[Z::W], b: &[Z::W]) -> Vec<Z::W> {
        a.iter().zip(b).map(|(&x, &y)| self.z.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[Z::W], b: &[Z::W]) -> Vec<Z::W> {
        a.iter().zip(b).map(|(&x, &y)| self.z.sub(x, y)).collect()
    }

    pub fn sub_assign(&self, a: &mut [Z::W], b: &[Z::W]) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x = self.z.sub(*x, y);
        }
    }

    /// `a·T^k mod f`.
    pub fn shift(&self, a: &[Z::W], k: usize) -> Vec<Z::W> {
        let mut v = vec![self.z.zero(); k];
        v.extend_from_slice(a);
        self.reduce(&v)
    }

    /// Elementwise reduction to a lower precision (the caller switches kernels).
    pub fn relower(&self, a: &[Z::W], to: &PolyQuot<Z>) -> Vec<Z::W> {
        a.iter().map(|&c| to.z.from_u128(self.z.to_u128(c))).collect()
    }

    /// Index of the first coefficient that is nonzero modulo `p` (the `T`-adic
    /// order of the residue), `None` if the element vanishes modulo `p`.
    pub fn t_order_mod_p(&self, a: &[Z::W]) -> Option<usize> {
        a.iter().position(|&c| self.z.residue(c) != 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mulmod(a: &[u128], b: &[u128], f: &[u128], m: u128) -> Vec<u128> {
        let d = f.len() - 1;
        let mut prod = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x, y, m), m);
            }
        }
        for k in (d..prod.len()).rev() {
            let c = prod[k];
            for i in 0..=d {
                prod[k - d + i] = sub_mod(prod[k - d + i], mul_mod(c, f[i], m), m);
            }
        }
        prod.truncate(d);
        prod
    }

    fn sample(len: usize, seed: u64, m: u128) -> Vec<u128> {
        let mut s = seed;
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s as u128 * 0x9E37_79B9_7F4A_7C15) % m
            })
            .collect()
    }

    #[test]
    fn narrow_and_wide_agree_with_schoolbook() {
        let p = 7u64;
        let f: Vec<u128> = {
            let mut f = sample(12, 3, 7u128.pow(24));
            f.push(1);
            f
        };
        for (k, seed) in [(9u32, 1u64), (24, 2)] {
            let m = 7u128.pow(k);
            let fr: Vec<u128> = f.iter().map(|c| c % m).collect();
            let a = sample(12, seed, m);
            let b = sample(12, seed + 10, m);
            let want = naive_mulmod(&a, &b, &fr, m);
            let wide = PolyQuot::new(Wide::new(p, k, 32).unwrap(), &fr);
            let aw: Vec<u128> = a.clone();
            assert_eq!(wide.mul(&aw, &b), want, "wide k={k}");
            if let Some(nz) = Narrow::new(p, k, 32) {
                let narrow = PolyQuot::new(nz, &fr);
                let an: Vec<u64> = a.iter().map(|&x| x as u64).collect();
                let bn: Vec<u64> = b.iter().map(|&x| x as u64).collect();
                let got: Vec<u128> = narrow.mul(&an, &bn).iter().map(|&x| x as u128).collect();
                assert_eq!(got, want, "narrow k={k}");
            }
        }
    }

    #[test]
    fn long_reduction_matches_iterated_shift() {
        let m = 5u128.pow(20);
        let f = vec![5, 10, 10, 5, 1]; // Φ_1 for p = 5
        let q = PolyQuot::new(Wide::new(5, 20, 16).unwrap(), &f);
        let long = sample(23, 9, m);
        let want = naive_mulmod(&long, &[1], &f, m);
        assert_eq!(q.reduce(&long), want);
    }

    #[test]
    fn narrow_reach() {
        assert_eq!(narrow_digits(7, 24, 343), 9);
        assert!(Narrow::new(7, 10, 343).is_none());
    }
}
