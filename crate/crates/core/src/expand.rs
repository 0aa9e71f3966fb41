//! Full expansion of a level to a matrix over the coefficient ring, and a
//! dense Smith normal form with unimodular transforms.
//!
//! This is the direct (and slow) route: `Λ/ω_n` is realized as a free module
//! with basis `1, T, …, T^{p^n − 1}`, each relation contributes its products
//! with every basis element, and the Smith form gives ranks and torsion
//! exponents at once.  It is used for small cases, as the `expanded`
//! coinvariant engine, and as an independent oracle for the layered engine.

use crate::error::Result;
use crate::padic::{CoefficientRing, RingElem, Valuation};
use crate::poly::{level_degree, omega, DegreeBudget, IwasawaPoly};
use crate::presentation::ModulePresentation;

/// Dense row-major matrix over a [`CoefficientRing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    ring: CoefficientRing,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl DenseMatrix {
    pub fn zeros(ring: &CoefficientRing, rows: usize, cols: usize) -> Self {
        DenseMatrix { ring: ring.clone(), rows, cols, data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: &CoefficientRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    /// Builds from integer rows.
    pub fn from_ints(ring: &CoefficientRing, rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(ring, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, ring.from_int(x));
            }
        }
        m
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, x: RingElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        let r = &self.ring;
        let mut out = Self::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, r.add(&cur, &r.mul(a, b)));
                }
            }
        }
        out
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(&self.ring, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    fn scale_row(&mut self, i: usize, c: &RingElem) {
        for j in 0..self.cols {
            let x = self.ring.mul(self.get(i, j), c);
            self.set(i, j, x);
        }
    }

    fn scale_col(&mut self, j: usize, c: &RingElem) {
        for i in 0..self.rows {
            let x = self.ring.mul(self.get(i, j), c);
            self.set(i, j, x);
        }
    }

    /// `row_dst −= c·row_src`.
    fn row_axpy(&mut self, dst: usize, c: &RingElem, src: usize) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = self.get(src, j);
            if s.is_zero() {
                continue;
            }
            let x = self.ring.sub(self.get(dst, j), &self.ring.mul(c, s));
            self.set(dst, j, x);
        }
    }

    /// `col_dst −= c·col_src`.
    fn col_axpy(&mut self, dst: usize, c: &RingElem, src: usize) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = self.get(i, src);
            if s.is_zero() {
                continue;
            }
            let x = self.ring.sub(self.get(i, dst), &self.ring.mul(c, s));
            self.set(i, dst, x);
        }
    }
}

/// Smith normal form `U·A·V = D` over a coefficient ring (a discrete
/// valuation ring with uniformizer `p`).
#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Valuations of the diagonal, weakly increasing; `AtLeast(N)` entries are
    /// zero at precision.
    pub exponents: Vec<Valuation>,
    /// Original `(row, col)` positions of the pivots, in pivoting order.
    pub rank_profile: Vec<(usize, usize)>,
    /// Exponents `≥ N − 2` are not certified.
    pub certified: Vec<bool>,
    pub u: DenseMatrix,
    pub u_inv: DenseMatrix,
    pub v: DenseMatrix,
    pub diagonal: DenseMatrix,
}

impl SmithForm {
    /// Number of pivots that are nonzero at precision.
    pub fn rank(&self) -> usize {
        self.exponents.iter().filter(|v| v.finite().is_some()).count()
    }
}

/// Smith normal form with minimum-valuation pivoting (ties: lowest row, then
/// lowest column).  The pivot row is normalized so the pivot is exactly `p^v`,
/// which keeps every elimination step exact modulo `p^N`.
pub fn smith_normal_form(a: &DenseMatrix) -> SmithForm {
    let ring = a.ring().clone();
    let n = ring.precision();
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = DenseMatrix::identity(&ring, rows);
    let mut u_inv = DenseMatrix::identity(&ring, rows);
    let mut v = DenseMatrix::identity(&ring, cols);
    // Track original indices for the rank profile.
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut col_ids: Vec<usize> = (0..cols).collect();
    let mut exponents = Vec::new();
    let mut rank_profile = Vec::new();
    for k in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if let Valuation::Finite(val) = ring.valuation(d.get(i, j)) {
                    if best.map_or(true, |(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((val, i, j)) = best else { break };
        d.swap_rows(k, i);
        u.swap_rows(k, i);
        u_inv.swap_cols(k, i);
        row_ids.swap(k, i);
        d.swap_cols(k, j);
        v.swap_cols(k, j);
        col_ids.swap(k, j);
        rank_profile.push((row_ids[k], col_ids[k]));
        // Normalize the pivot to p^val.
        let unit = ring.div_p_pow(d.get(k, k), val);
        let unit_inv = ring.invert(&unit).expect("pivot cofactor is a unit");
        d.scale_row(k, &unit_inv);
        u.scale_row(k, &unit_inv);
        u_inv.scale_col(k, &unit);
        for i2 in k + 1..rows {
            let b = d.get(i2, k).clone();
            if b.is_zero() {
                continue;
            }
            let f = ring.div_p_pow(&b, val);
            d.row_axpy(i2, &f, k);
            u.row_axpy(i2, &f, k);
            // U_inv ← U_inv·E^{-1}: column k += f·column i2.
            let neg = ring.neg(&f);
            u_inv.col_axpy(k, &neg, i2);
        }
        for j2 in k + 1..cols {
            let b = d.get(k, j2).clone();
            if b.is_zero() {
                continue;
            }
            let f = ring.div_p_pow(&b, val);
            d.col_axpy(j2, &f, k);
            v.col_axpy(j2, &f, k);
        }
        exponents.push(Valuation::Finite(val));
    }
    while exponents.len() < rows.min(cols) {
        exponents.push(Valuation::AtLeast(n));
    }
    let certified = exponents.iter().map(|e| e.finite().is_some_and(|x| x + 2 < n)).collect();
    SmithForm { exponents, rank_profile, certified, u, u_inv, v, diagonal: d }
}

/// One level of a presentation, fully expanded over the coefficient ring.
#[derive(Clone, Debug)]
pub struct FinLevelModule {
    pub level: u32,
    /// `p^n`.
    pub basis_len: usize,
    pub generators: usize,
    /// `(g·p^n) × (c·p^n + g·p^n)`: relation multiples, then `ω_n`-multiples
    /// of the generators (zero after reduction, kept for shape).
    pub matrix: DenseMatrix,
    /// Multiplication by `T` on the basis `{T^t e_i}` (column convention).
    pub t_action: DenseMatrix,
}

/// Row index of `T^t·e_i`.
fn basis_index(i: usize, t: usize, l: usize) -> usize {
    i * l + t
}

/// Expands `M` at level `n`.
pub fn expand_to_level(m: &ModulePresentation, n: u32, budget: DegreeBudget) -> Result<FinLevelModule> {
    let ring = m.ring();
    let l = level_degree(ring.prime(), n, budget)?;
    let w = omega(ring, n, budget)?;
    let g = m.generators();
    let c = m.relation_count();
    DegreeBudget::default().check(m.max_degree(), "relation entry degree")?;
    let mut mat = DenseMatrix::zeros(ring, g * l, c * l + g * l);
    for k in 0..c {
        for s in 0..l {
            let col = k * l + s;
            for i in 0..g {
                let e = m.entry(i, k);
                if e.is_zero() {
                    continue;
                }
                let red = e.shift(s).rem_monic(&w)?;
                for (t, coeff) in red.coeffs().iter().enumerate() {
                    mat.set(basis_index(i, t, l), col, coeff.clone());
                }
            }
        }
    }
    let mut t_action = DenseMatrix::zeros(ring, g * l, g * l);
    let t_pow_l = IwasawaPoly::monomial(ring, l).rem_monic(&w)?;
    for i in 0..g {
        for t in 0..l {
            let src = basis_index(i, t, l);
            if t + 1 < l {
                t_action.set(basis_index(i, t + 1, l), src, ring.one());
            } else {
                for (s, coeff) in t_pow_l.coeffs().iter().enumerate() {
                    t_action.set(basis_index(i, s, l), src, coeff.clone());
                }
            }
        }
    }
    Ok(FinLevelModule { level: n, basis_len: l, generators: g, matrix: mat, t_action })
}

/// Structure read off a Smith form of an expanded level.
#[derive(Clone, Debug)]
pub struct ExpandedStructure {
    pub free_rank: usize,
    /// Torsion exponents (`≥ 1`), weakly decreasing.
    pub torsion: Vec<u32>,
    pub certified: Vec<bool>,
    pub smith: SmithForm,
}

impl FinLevelModule {
    /// Ranks and torsion exponents of the cokernel.
    pub fn structure(&self) -> ExpandedStructure {
        let smith = smith_normal_form(&self.matrix);
        let rank = smith.rank();
        let free_rank = self.matrix.rows() - rank;
        let mut pairs: Vec<(u32, bool)> = smith
            .exponents
            .iter()
            .zip(&smith.certified)
            .filter_map(|(e, &c)| e.finite().filter(|&x| x > 0).map(|x| (x, c)))
            .collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        ExpandedStructure {
            free_rank,
            torsion: pairs.iter().map(|p| p.0).collect(),
            certified: pairs.iter().map(|p| p.1).collect(),
            smith,
        }
    }

    /// Coefficient-ring ranks of the `Φ_j`-isotypic parts of the free quotient,
    /// `j = 0..=level`: kernel rank of `Φ_j` applied to the induced action of
    /// `T` on `M_{Γ_n}/torsion`.  Returns `(ranks, certified)`.
    pub fn phi_component_ranks(&self, st: &ExpandedStructure) -> Result<(Vec<usize>, bool)> {
        let ring = self.matrix.ring();
        let rank = st.smith.rank();
        let total = self.matrix.rows();
        let free: Vec<usize> = (rank..total).collect();
        let conj = st.smith.u.mul(&self.t_action).mul(&st.smith.u_inv);
        let t_free = conj.select(&free, &free);
        let mut ranks = Vec::new();
        let mut certified = true;
        for j in 0..=self.level {
            let phi = crate::poly::cyclotomic(ring, j, DegreeBudget(usize::MAX))?;
            let val = eval_poly_at_matrix(&phi, &t_free);
            let s = smith_normal_form(&val);
            certified &= s.exponents.iter().zip(&s.certified).all(|(e, &c)| c || e.finite().is_none());
            ranks.push(free.len() - s.rank());
        }
        Ok((ranks, certified))
    }
}

/// Horner evaluation of a polynomial at a square matrix.
pub fn eval_poly_at_matrix(f: &IwasawaPoly, m: &DenseMatrix) -> DenseMatrix {
    let ring = m.ring();
    let n = m.rows();
    let mut acc = DenseMatrix::zeros(ring, n, n);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(m);
        for i in 0..n {
            let x = ring.add(acc.get(i, i), c);
            acc.set(i, i, x);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cyclotomic;

    fn zp(n: u32) -> CoefficientRing {
        CoefficientRing::zp(5, n).unwrap()
    }

    #[test]
    fn smith_examples() {
        let r = zp(10);
        let id = smith_normal_form(&DenseMatrix::from_ints(&r, &[vec![1, 0], vec![0, 1]]));
        assert_eq!(id.exponents, vec![Valuation::Finite(0), Valuation::Finite(0)]);
        let diag = smith_normal_form(&DenseMatrix::from_ints(&r, &[vec![5, 0], vec![0, 25]]));
        assert_eq!(diag.exponents, vec![Valuation::Finite(1), Valuation::Finite(2)]);
        let a = DenseMatrix::from_ints(&r, &[vec![5, 1], vec![0, 5]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.exponents, vec![Valuation::Finite(0), Valuation::Finite(2)]);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.diagonal);
        assert_eq!(s.u.mul(&s.u_inv), DenseMatrix::identity(&r, 2));
    }

    #[test]
    fn free_module_level_one() {
        let r = zp(10);
        let m = ModulePresentation::free(&r, 1);
        let lvl = expand_to_level(&m, 1, DegreeBudget::default()).unwrap();
        assert_eq!((lvl.matrix.rows(), lvl.matrix.cols()), (5, 5));
        let st = lvl.structure();
        assert_eq!(st.free_rank, 5);
        assert!(st.torsion.is_empty());
        assert_eq!(lvl.phi_component_ranks(&st).unwrap().0, vec![1, 4]);
    }

    #[test]
    fn cyclic_phi_one() {
        let r = zp(10);
        let f = cyclotomic(&r, 1, DegreeBudget::default()).unwrap();
        let m = ModulePresentation::cyclic(f);
        let l0 = expand_to_level(&m, 0, DegreeBudget::default()).unwrap().structure();
        assert_eq!((l0.free_rank, l0.torsion.clone()), (0, vec![1]));
        let lvl = expand_to_level(&m, 2, DegreeBudget::default()).unwrap();
        let st = lvl.structure();
        assert_eq!((st.free_rank, st.torsion.clone()), (4, vec![]));
        assert_eq!(lvl.phi_component_ranks(&st).unwrap().0, vec![0, 4, 0]);
    }
}
