//! Layered computation of the `Zp`-structure of `coker(B)` over
//! `S = Zp[T]/ω_n`, without expanding to a `(g·p^n)`-square matrix.
//!
//! Write `Q = F/K_0` with `F = S^g` and `K_0` the column span of `B`, and let
//! `K_j = {x ∈ F : p^j x ∈ K_0}`.  Then
//! `c_j := dim_{F_p} F/(K_j + pF) = free_rank + #{torsion exponents > j}`, and
//! `K_{j+1} = (K_j ∩ pF)/p`.  Since `S/p = F_p[T]/T^L` (`L = p^n`) is a chain
//! ring, a Smith form of the generators of `K_j` modulo `p` yields both `c_j`
//! (from the pivot `T`-orders) and the syzygies whose lifts, divided by `p`,
//! generate `K_{j+1}`.  Every step is an exact operation over `S` modulo the
//! current power of `p`, which drops by one per round.
//!
//! Column operations, row operations and the elimination of unit pivots are
//! all isomorphisms of the cokernel; row operations and eliminations are
//! recorded in `uinv` so that the new generators of `K_{j+1}` (representatives
//! of `p^{j+1}`-torsion) can be mapped back to the original coordinates.

use crate::kernel::{narrow_digits, Narrow, PolyQuot, Wide, Zmod};
use crate::padic::fp;
use crate::presentation::ZpMatrix;

/// One generator of `Q[p^∞]` in the original coordinates: `vector[r]` is the
/// coefficient list (length `L`) of generator `r`, known modulo `p^digits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionGen {
    pub digits: u32,
    pub vector: Vec<Vec<u128>>,
}

#[derive(Clone, Debug)]
pub(crate) struct RunOutput {
    /// `c_0, c_1, …` for every round completed.
    pub c_seq: Vec<usize>,
    /// True when `c_j` reached the target free rank.
    pub terminated: bool,
    /// Generators of `Q[p^∞]` (only when tracking).
    pub gens: Vec<TorsionGen>,
}

/// Structure of a level, before certification bookkeeping.
#[derive(Clone, Debug)]
pub(crate) struct LayeredResult {
    pub c_seq: Vec<usize>,
    pub terminated: bool,
    pub gens: Vec<TorsionGen>,
}

/// Computes the layered invariants of `coker(B mod ω_n)` at level `n`.
///
/// `omega` lists the residues of `ω_n` (monic, degree `L`) at the matrix
/// precision.  `target` is the free `Zp`-rank when known; the run stops as
/// soon as `c_j` reaches it.  A cheap narrow-word run is attempted first and
/// the full-precision run is used when the narrow one cannot conclude.
pub(crate) fn layered(mat: &ZpMatrix, omega: &[u128], target: Option<usize>, track: bool) -> LayeredResult {
    let p = mat.prime;
    let n = mat.precision;
    let l = omega.len() - 1;
    let terms = l.max(mat.rows).max(2);
    if !track && target.is_some() {
        let kn = narrow_digits(p, n, terms);
        if kn >= 2 {
            if let Some(z) = Narrow::new(p, kn, terms) {
                let out = run(&PolyQuot::new(z, omega), mat, target, false);
                if out.terminated || kn == n {
                    return LayeredResult { c_seq: out.c_seq, terminated: out.terminated, gens: out.gens };
                }
            }
        }
    }
    if let Some(z) = Narrow::new(p, n, terms) {
        let out = run(&PolyQuot::new(z, omega), mat, target, track);
        return LayeredResult { c_seq: out.c_seq, terminated: out.terminated, gens: out.gens };
    }
    let z = Wide::new(p, n, terms).expect("precision below 2^126 is validated by the coefficient ring");
    let out = run(&PolyQuot::new(z, omega), mat, target, track);
    LayeredResult { c_seq: out.c_seq, terminated: out.terminated, gens: out.gens }
}

/// Mutable state of one layered run.
struct State<Z: Zmod> {
    q: PolyQuot<Z>,
    /// `cols[c][r]`: entry in current row `r` of generator column `c`.
    cols: Vec<Vec<Vec<Z::W>>>,
    rows: usize,
    /// `uinv[r]`: original-coordinate image of current basis vector `r`.
    uinv: Vec<Vec<Vec<Z::W>>>,
    track: bool,
}

pub(crate) fn run<Z: Zmod>(quot: &PolyQuot<Z>, mat: &ZpMatrix, target: Option<usize>, track: bool) -> RunOutput {
    let l = quot.deg();
    let g = mat.rows;
    let cols = (0..mat.cols)
        .map(|c| (0..g).map(|r| quot.reduce_u128(&mat.entries[r][c])).collect())
        .collect();
    let uinv = if track {
        (0..g)
            .map(|r| (0..g).map(|s| if r == s { quot.one() } else { quot.zero() }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut st = State { q: quot.clone(), cols, rows: g, uinv, track };
    st.drop_zero_columns();

    let mut c_seq = Vec::new();
    let mut gens = Vec::new();
    let mut terminated = false;
    loop {
        st.eliminate_units();
        let pivots = st.smith_mod_p();
        let c = pivots.iter().map(|&(_, _, v)| v).sum::<usize>() + (st.rows - pivots.len()) * l;
        c_seq.push(c);
        if target == Some(c) {
            terminated = true;
            break;
        }
        if target.is_some_and(|t| c < t) || st.q.z.digits() <= 1 {
            break;
        }
        let new = st.descend(&pivots);
        if st.track {
            for w in &new {
                if let Some(gen) = st.to_original(w) {
                    gens.push(gen);
                }
            }
        }
    }
    RunOutput { c_seq, terminated, gens }
}

impl<Z: Zmod> State<Z> {
    fn drop_zero_columns(&mut self) {
        let q = &self.q;
        self.cols.retain(|col| col.iter().any(|e| !q.is_zero(e)));
    }

    fn is_unit(&self, e: &[Z::W]) -> bool {
        self.q.z.residue(e[0]) != 0
    }

    /// Removes generator/relation pairs whose entry is a unit of `S`.
    fn eliminate_units(&mut self) {
        'outer: loop {
            for i in 0..self.rows {
                for c in 0..self.cols.len() {
                    if self.is_unit(&self.cols[c][i]) {
                        self.eliminate(i, c);
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }

    fn eliminate(&mut self, i: usize, c: usize) {
        let q = &self.q;
        let inv = s_inverse(q, &self.cols[c][i]);
        let pivot_col = self.cols.remove(c);
        for col in self.cols.iter_mut() {
            if q.is_zero(&col[i]) {
                continue;
            }
            let factor = q.mul(&col[i], &inv);
            for (r, e) in col.iter_mut().enumerate() {
                if r != i && !q.is_zero(&pivot_col[r]) {
                    let prod = q.mul(&factor, &pivot_col[r]);
                    q.sub_assign(e, &prod);
                }
            }
        }
        for col in self.cols.iter_mut() {
            col.remove(i);
        }
        if self.track {
            self.uinv.remove(i);
        }
        self.rows -= 1;
        self.drop_zero_columns();
    }

    fn residues(&self, e: &[Z::W]) -> Vec<u64> {
        e.iter().map(|&c| self.q.z.residue(c)).collect()
    }

    /// Smith form modulo `p` over `F_p[T]/T^L`, applied exactly over `S`.
    /// Returns pivots `(row, column, T-order)` in pivoting order.
    fn smith_mod_p(&mut self) -> Vec<(usize, usize, usize)> {
        let p = self.q.z.prime();
        let l = self.q.deg();
        let ncols = self.cols.len();
        let mut prow = vec![false; self.rows];
        let mut pcol = vec![false; ncols];
        let mut pivots = Vec::new();
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in (0..self.rows).filter(|&i| !prow[i]) {
                for c in (0..ncols).filter(|&c| !pcol[c]) {
                    if let Some(v) = self.q.t_order_mod_p(&self.cols[c][i]) {
                        if best.map_or(true, |(bv, _, _)| v < bv) {
                            best = Some((v, i, c));
                        }
                    }
                }
            }
            let Some((v, i, c)) = best else { break };
            let unit = self.residues(&self.cols[c][i]);
            let unit_inv = series_inverse(&unit[v..], l - v, p);
            // Row operations clear column c below/above the pivot.
            for i2 in (0..self.rows).filter(|&r| r != i && !prow[r]) {
                let b = self.residues(&self.cols[c][i2]);
                if b.iter().all(|&x| x == 0) {
                    continue;
                }
                let qq = self.lift(&series_mul(&b[v..], &unit_inv, l - v, p));
                for col in self.cols.iter_mut() {
                    if self.q.is_zero(&col[i]) {
                        continue;
                    }
                    let prod = self.q.mul(&qq, &col[i]);
                    self.q.sub_assign(&mut col[i2], &prod);
                }
                if self.track {
                    let src = self.uinv[i2].clone();
                    for (dst, s) in self.uinv[i].iter_mut().zip(&src) {
                        let prod = self.q.mul(&qq, s);
                        *dst = self.q.add(dst, &prod);
                    }
                }
            }
            // Column operations clear row i.
            for c2 in (0..ncols).filter(|&k| k != c && !pcol[k]) {
                let b = self.residues(&self.cols[c2][i]);
                if b.iter().all(|&x| x == 0) {
                    continue;
                }
                let qq = self.lift(&series_mul(&b[v..], &unit_inv, l - v, p));
                let pivot_col = self.cols[c].clone();
                for (e, pe) in self.cols[c2].iter_mut().zip(&pivot_col) {
                    if self.q.is_zero(pe) {
                        continue;
                    }
                    let prod = self.q.mul(&qq, pe);
                    self.q.sub_assign(e, &prod);
                }
            }
            prow[i] = true;
            pcol[c] = true;
            pivots.push((i, c, v));
        }
        pivots
    }

    fn lift(&self, small: &[u64]) -> Vec<Z::W> {
        let mut v: Vec<Z::W> = small.iter().map(|&x| self.q.z.from_u128(x as u128)).collect();
        v.resize(self.q.deg(), self.q.z.zero());
        v
    }

    /// Replaces the generators of `K_j` by generators of `K_{j+1}` and lowers
    /// the precision by one digit.  Returns the newly created generators.
    fn descend(&mut self, pivots: &[(usize, usize, usize)]) -> Vec<Vec<Vec<Z::W>>> {
        let l = self.q.deg();
        let lower = self.q.lower(self.q.z.digits() - 1);
        let div_p = |st: &Self, e: &[Z::W]| -> Vec<Z::W> {
            e.iter()
                .map(|&c| {
                    debug_assert_eq!(st.q.z.residue(c), 0, "syzygy lift must vanish mod p");
                    lower.z.from_u128(st.q.z.to_u128(st.q.z.div_p_pow(c, 1)))
                })
                .collect()
        };
        let mut is_pivot = vec![false; self.cols.len()];
        let mut kept = Vec::new();
        let mut fresh = Vec::new();
        for &(_, c, v) in pivots {
            is_pivot[c] = true;
            kept.push(self.cols[c].iter().map(|e| self.q.relower(e, &lower)).collect::<Vec<_>>());
            if v > 0 {
                let ext: Vec<Vec<Z::W>> =
                    self.cols[c].iter().map(|e| div_p(self, &self.q.shift(e, l - v))).collect();
                fresh.push(ext);
            }
        }
        for (c, col) in self.cols.iter().enumerate() {
            if !is_pivot[c] {
                fresh.push(col.iter().map(|e| div_p(self, e)).collect());
            }
        }
        if self.track {
            self.uinv = self
                .uinv
                .iter()
                .map(|col| col.iter().map(|e| self.q.relower(e, &lower)).collect())
                .collect();
        }
        self.q = lower;
        let q = &self.q;
        fresh.retain(|col: &Vec<Vec<Z::W>>| col.iter().any(|e| !q.is_zero(e)));
        self.cols = kept;
        self.cols.extend(fresh.iter().cloned());
        self.drop_zero_columns();
        fresh
    }

    /// Maps a vector in current coordinates to original coordinates.
    fn to_original(&self, w: &[Vec<Z::W>]) -> Option<TorsionGen> {
        let q = &self.q;
        let g = self.uinv.first().map(Vec::len)?;
        let mut out = vec![q.zero(); g];
        for (col, wi) in self.uinv.iter().zip(w) {
            if q.is_zero(wi) {
                continue;
            }
            for (o, u) in out.iter_mut().zip(col) {
                if !q.is_zero(u) {
                    let prod = q.mul(u, wi);
                    *o = q.add(o, &prod);
                }
            }
        }
        if out.iter().all(|e| q.is_zero(e)) {
            return None;
        }
        Some(TorsionGen {
            digits: q.z.digits(),
            vector: out.iter().map(|e| e.iter().map(|&c| q.z.to_u128(c)).collect()).collect(),
        })
    }
}

/// Inverse of a unit of `S` (constant term prime to `p`): inverse modulo
/// `(p, T^L)` followed by Newton lifting `x ← x(2 − ux)`.
fn s_inverse<Z: Zmod>(q: &PolyQuot<Z>, u: &[Z::W]) -> Vec<Z::W> {
    let p = q.z.prime();
    let l = q.deg();
    let ubar: Vec<u64> = u.iter().map(|&c| q.z.residue(c)).collect();
    let mut x: Vec<Z::W> = series_inverse(&ubar, l, p).iter().map(|&c| q.z.from_u128(c as u128)).collect();
    x.resize(l, q.z.zero());
    let two = {
        let mut t = q.zero();
        t[0] = q.z.from_u128(2);
        t
    };
    let mut prec = 1;
    while prec < q.z.digits() {
        let ux = q.mul(u, &x);
        x = q.mul(&x, &q.sub(&two, &ux));
        prec *= 2;
    }
    x
}

/// Inverse of a power series with unit constant term, modulo `(p, T^len)`.
fn series_inverse(a: &[u64], len: usize, p: u64) -> Vec<u64> {
    let a0inv = fp::inv(a[0] % p, p) as u128;
    let pp = p as u128;
    let mut out = vec![0u64; len];
    if len == 0 {
        return out;
    }
    out[0] = a0inv as u64;
    for k in 1..len {
        let mut s: u128 = 0;
        for i in 1..=k.min(a.len() - 1) {
            s += a[i] as u128 * out[k - i] as u128 % pp;
        }
        let s = (s % pp) as u64;
        out[k] = (((pp - s as u128) % pp) * a0inv % pp) as u64;
    }
    out
}

/// Product of two series modulo `(p, T^len)`.
fn series_mul(a: &[u64], b: &[u64], len: usize, p: u64) -> Vec<u64> {
    let pp = p as u128;
    let mut out = vec![0u128; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % pp;
        }
    }
    out.into_iter().map(|x| x as u64).collect()
}
