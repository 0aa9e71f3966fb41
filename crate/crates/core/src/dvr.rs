//! Rank of a relation matrix specialized at a primitive `p^j`-th root of
//! unity, i.e. over the discrete valuation ring `O_j = Zp[T]/Φ_j`.
//!
//! `O_j` is totally ramified of degree `D = φ(p^j)` with uniformizer `π = T`
//! (for `j = 0`, `O_0 = Zp` and `π = p`).  Elements are stored as residue
//! vectors on the basis `1, T, …, T^{D−1}`; with coefficients `c_i`,
//! `v_π = min_i (D·v_p(c_i) + i)`.  Division by the fixed element
//! `ε_v = p^{⌊v/D⌋}·T^{v mod D}` uses `p/T = −(Φ_j − p)/T`.
//!
//! Elimination is fraction-free: `row ← u·row − (b/ε_v)·pivot_row` with
//! `u = pivot/ε_v` a unit, so every stored entry stays exact modulo `π^{kD}`.
//! Entries of valuation `≥ kD` are zero at precision; a pivot within two
//! `p`-digits of that cap makes the rank uncertified.

use crate::kernel::{narrow_digits, Narrow, PolyQuot, Wide, Zmod};
use crate::presentation::ZpMatrix;

/// Outcome of a specialization-rank computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SpecializedRank {
    pub rank: usize,
    pub certified: bool,
}

/// Rank of `mat` over `Zp[T]/(phi)`; `phi` is `Φ_j` (monic residues, with
/// `phi = [0, 1]` standing for `Φ_0 = T`).
pub(crate) fn specialized_rank(mat: &ZpMatrix, phi: &[u128]) -> SpecializedRank {
    let full = mat.rows.min(mat.cols);
    if full == 0 {
        return SpecializedRank { rank: 0, certified: true };
    }
    let (p, n) = (mat.prime, mat.precision);
    let d = phi.len() - 1;
    let terms = d.max(2);
    let kn = narrow_digits(p, n, terms);
    if kn >= 3 && kn < n {
        if let Some(z) = Narrow::new(p, kn, terms) {
            let r = eliminate(&PolyQuot::new(z, phi), mat, phi);
            if r.rank == full && r.certified {
                return r;
            }
        }
    }
    if let Some(z) = Narrow::new(p, n, terms) {
        return eliminate(&PolyQuot::new(z, phi), mat, phi);
    }
    let z = Wide::new(p, n, terms).expect("precision below 2^126 is validated by the coefficient ring");
    eliminate(&PolyQuot::new(z, phi), mat, phi)
}

struct Dvr<'a, Z: Zmod> {
    q: &'a PolyQuot<Z>,
    /// `p/T` in `O_j` (unused for `j = 0`).
    p_over_t: Vec<Z::W>,
    /// `π`-adic precision `k·D`.
    cap: usize,
}

impl<Z: Zmod> Dvr<'_, Z> {
    fn valuation(&self, a: &[Z::W]) -> Option<usize> {
        let d = self.q.deg();
        let v = a
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| self.q.z.vp(c).map(|e| d * e as usize + i))
            .min()?;
        (v < self.cap).then_some(v)
    }

    /// `a / ε_v`, valid when `v_π(a) ≥ v`.
    fn div_eps(&self, a: &[Z::W], v: usize) -> Vec<Z::W> {
        let d = self.q.deg();
        let (e, r) = (v / d, v % d);
        let z = &self.q.z;
        let mut x: Vec<Z::W> = if e > 0 { a.iter().map(|&c| z.div_p_pow(c, e as u32)).collect() } else { a.to_vec() };
        for _ in 0..r {
            let a0 = z.div_p_pow(x[0], 1);
            let mut shifted: Vec<Z::W> = x[1..].to_vec();
            shifted.push(z.zero());
            // x/T = (x − x_0)/T + (x_0/p)·(p/T)
            let mut prod = z.convolve(&[a0], &self.p_over_t);
            prod.resize(d, z.zero());
            for (s, t) in shifted.iter_mut().zip(&prod) {
                *s = z.add(*s, *t);
            }
            x = shifted;
        }
        x
    }
}

fn eliminate<Z: Zmod>(q: &PolyQuot<Z>, mat: &ZpMatrix, phi: &[u128]) -> SpecializedRank {
    let d = q.deg();
    let z = &q.z;
    // p/T = −(Φ_j − p)/T = −(phi[1..]) as a degree < D polynomial.
    let p_over_t: Vec<Z::W> = phi[1..].iter().map(|&c| z.neg(z.from_u128(c))).collect();
    let dvr = Dvr { q, p_over_t, cap: z.digits() as usize * d };
    let mut m: Vec<Vec<Vec<Z::W>>> =
        mat.entries.iter().map(|row| row.iter().map(|e| q.reduce_u128(e)).collect()).collect();
    let mut active_rows: Vec<usize> = (0..mat.rows).collect();
    let mut active_cols: Vec<usize> = (0..mat.cols).collect();
    let mut rank = 0;
    let mut certified = true;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for &i in &active_rows {
            for &c in &active_cols {
                if let Some(v) = dvr.valuation(&m[i][c]) {
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, c));
                    }
                }
            }
        }
        let Some((v, i, c)) = best else { break };
        if v + 2 * d > dvr.cap {
            certified = false;
        }
        let u = dvr.div_eps(&m[i][c], v);
        active_rows.retain(|&r| r != i);
        active_cols.retain(|&k| k != c);
        let pivot_row = m[i].clone();
        for &i2 in &active_rows {
            if dvr.valuation(&m[i2][c]).is_none() {
                continue;
            }
            let b = dvr.div_eps(&m[i2][c], v);
            for &c2 in &active_cols {
                let left = q.mul(&u, &m[i2][c2]);
                let right = q.mul(&b, &pivot_row[c2]);
                m[i2][c2] = q.sub(&left, &right);
            }
        }
        rank += 1;
    }
    SpecializedRank { rank, certified }
}
