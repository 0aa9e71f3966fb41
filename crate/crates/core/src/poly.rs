//! Polynomials in `T` over a [`CoefficientRing`], standing for elements of
//! `Λ = Zp[[T]]` (or `Λ_{O_p}`) modulo precision, together with the tower
//! polynomials `ω_n = (1+T)^{p^n} − 1` and `Φ_n = ω_n / ω_{n−1}` (`Φ_0 = T`).

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{mul_mod, vp_u128, CoefficientRing, RingElem, Valuation};

/// Maximum polynomial degree a computation may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeBudget(pub usize);

impl DegreeBudget {
    /// `4·p^{n_max}`: room for the expanded objects of every level up to `n_max`.
    pub fn for_levels(p: u64, n_max: u32) -> Self {
        DegreeBudget((p as usize).saturating_pow(n_max).saturating_mul(4))
    }

    pub fn check(self, degree: usize, what: &str) -> Result<()> {
        if degree > self.0 {
            Err(Error::resource(format!("{what} needs degree {degree}, budget is {}", self.0)))
        } else {
            Ok(())
        }
    }
}

impl Default for DegreeBudget {
    /// Generous cap for library callers that do not set a session budget.
    fn default() -> Self {
        DegreeBudget(1 << 16)
    }
}

/// `p^n` as a degree, with overflow reported as a budget failure.
pub fn level_degree(p: u64, n: u32, budget: DegreeBudget) -> Result<usize> {
    let d = (p as usize).checked_pow(n).ok_or_else(|| Error::resource(format!("p^{n} overflows")))?;
    budget.check(d, &format!("level {n}"))?;
    Ok(d)
}

/// Euler's totient of `p^n`, with `φ(p^0) := 1`.
pub fn phi_p_power(p: u64, n: u32) -> usize {
    if n == 0 {
        1
    } else {
        (p as usize).pow(n) - (p as usize).pow(n - 1)
    }
}

/// A polynomial in `T`, constant term first, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq)]
pub struct IwasawaPoly {
    ring: CoefficientRing,
    coeffs: Vec<RingElem>,
}

impl IwasawaPoly {
    /// Builds a polynomial from coefficients (constant term first).
    pub fn new(ring: &CoefficientRing, coeffs: Vec<RingElem>) -> Self {
        let mut p = IwasawaPoly { ring: ring.clone(), coeffs };
        p.trim();
        p
    }

    /// Polynomial with rational-integer coefficients (constant term first).
    pub fn from_ints(ring: &CoefficientRing, coeffs: &[i128]) -> Self {
        Self::new(ring, coeffs.iter().map(|&c| ring.from_int(c)).collect())
    }

    /// Polynomial with `Zp` coefficients given as residues modulo `p^N`.
    pub fn from_residues(ring: &CoefficientRing, coeffs: &[u128]) -> Self {
        let d = ring.degree();
        let coeffs = coeffs
            .iter()
            .map(|&c| {
                let mut v = vec![0u128; d];
                v[0] = c;
                ring.from_coords(&v).expect("degree-sized coordinates")
            })
            .collect();
        Self::new(ring, coeffs)
    }

    pub fn zero(ring: &CoefficientRing) -> Self {
        IwasawaPoly { ring: ring.clone(), coeffs: Vec::new() }
    }

    pub fn one(ring: &CoefficientRing) -> Self {
        Self::new(ring, vec![ring.one()])
    }

    /// Constant polynomial.
    pub fn constant(ring: &CoefficientRing, c: RingElem) -> Self {
        Self::new(ring, vec![c])
    }

    /// `T^k`.
    pub fn monomial(ring: &CoefficientRing, k: usize) -> Self {
        let mut coeffs = vec![ring.zero(); k + 1];
        coeffs[k] = ring.one();
        IwasawaPoly { ring: ring.clone(), coeffs }
    }

    /// `T`.
    pub fn t(ring: &CoefficientRing) -> Self {
        Self::monomial(ring, 1)
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[RingElem] {
        &self.coeffs
    }

    /// Coefficient of `T^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> RingElem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Value at `T = 0`.
    pub fn eval_at_zero(&self) -> RingElem {
        self.coeff(0)
    }

    /// Monic, with every lower coefficient of positive valuation.
    pub fn is_distinguished(&self) -> bool {
        let Some(deg) = self.degree() else { return false };
        if self.coeffs[deg] != self.ring.one() {
            return false;
        }
        self.coeffs[..deg].iter().all(|c| self.ring.valuation(c) != Valuation::Finite(0))
    }

    /// Minimal valuation of the coefficients (the `μ`-part of a polynomial).
    pub fn content_valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .map(|c| self.ring.valuation(c))
            .min_by_key(|v| v.key())
            .unwrap_or(Valuation::AtLeast(self.ring.precision()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.ring.add(&self.coeff(k), &other.coeff(k))).collect();
        Self::new(&self.ring, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.ring.sub(&self.coeff(k), &other.coeff(k))).collect();
        Self::new(&self.ring, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.ring, self.coeffs.iter().map(|c| self.ring.neg(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ring);
        }
        let r = &self.ring;
        let mut out = vec![r.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = r.add(&out[i + j], &r.mul(a, b));
            }
        }
        Self::new(r, out)
    }

    /// Multiplication by a ring element.
    pub fn scale(&self, c: &RingElem) -> Self {
        Self::new(&self.ring, self.coeffs.iter().map(|a| self.ring.mul(a, c)).collect())
    }

    /// Multiplication by `T^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.ring.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IwasawaPoly { ring: self.ring.clone(), coeffs }
    }

    /// Division with remainder by a monic polynomial (plain long division).
    pub fn divrem_monic(&self, g: &Self) -> Result<(Self, Self)> {
        let dg = g.degree().ok_or_else(|| Error::BadDivisor { reason: "divisor is zero".into() })?;
        if g.coeffs[dg] != self.ring.one() {
            return Err(Error::BadDivisor { reason: "divisor is not monic".into() });
        }
        let r = &self.ring;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dg {
            return Ok((Self::zero(r), self.clone()));
        }
        let mut quot = vec![r.zero(); rem.len() - dg];
        for k in (dg..rem.len()).rev() {
            let c = rem[k].clone();
            if c.is_zero() {
                continue;
            }
            quot[k - dg] = c.clone();
            for (i, gi) in g.coeffs.iter().enumerate() {
                rem[k - dg + i] = r.sub(&rem[k - dg + i], &r.mul(&c, gi));
            }
        }
        rem.truncate(dg);
        Ok((Self::new(r, quot), Self::new(r, rem)))
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, g: &Self) -> Result<Self> {
        Ok(self.divrem_monic(g)?.1)
    }

    /// Reduces every coordinate to a smaller precision (same prime and modulus).
    pub fn change_ring(&self, ring: &CoefficientRing) -> Result<Self> {
        if ring.prime() != self.ring.prime() || ring.degree() != self.ring.degree() {
            return Err(Error::input("ring", "incompatible coefficient rings"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| ring.from_coords(c.coords()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(ring, coeffs))
    }

    /// Canonical text form `c0 + c1*T + …` (nonzero terms only, `0` if zero).
    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = self.ring.render(c);
            terms.push(match k {
                0 => cs,
                1 => format!("{cs}*T"),
                _ => format!("{cs}*T^{k}"),
            });
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Debug for IwasawaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IwasawaPoly({})", self.render())
    }
}

impl fmt::Display for IwasawaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Row of binomial coefficients `C(m, k) mod p^N`, `k = 0..=m`.
///
/// Uses the multiplicative recurrence with the `p`-part tracked separately so
/// that no division by a multiple of `p` is ever performed.
pub fn binomial_row(ring: &CoefficientRing, m: usize) -> Vec<u128> {
    let p = ring.prime();
    let modulus = ring.modulus();
    let zp = CoefficientRing::zp(p, ring.precision()).expect("ring parameters already validated");
    let mut out = Vec::with_capacity(m + 1);
    let mut unit: u128 = 1;
    let mut pexp: u32 = 0;
    out.push(1 % modulus);
    for k in 1..=m {
        let num = (m - k + 1) as u128;
        let den = k as u128;
        let vn = vp_u128(num, p);
        let vd = vp_u128(den, p);
        let pp = p as u128;
        let num_u = num / pp.pow(vn);
        let den_u = den / pp.pow(vd);
        pexp = pexp + vn - vd;
        let den_inv = zp.invert(&zp.from_coords(&[den_u % modulus]).unwrap()).expect("p-free part is a unit");
        unit = mul_mod(mul_mod(unit, num_u, modulus), den_inv.rational_part(), modulus);
        let value = if pexp >= ring.precision() { 0 } else { mul_mod(unit, pp.pow(pexp), modulus) };
        out.push(value);
    }
    out
}

/// `(1+T)^m` in the ring.
pub fn one_plus_t_pow(ring: &CoefficientRing, m: usize) -> IwasawaPoly {
    IwasawaPoly::from_residues(ring, &binomial_row(ring, m))
}

/// `ω_n = (1+T)^{p^n} − 1`, a distinguished polynomial of degree `p^n`.
pub fn omega(ring: &CoefficientRing, n: u32, budget: DegreeBudget) -> Result<IwasawaPoly> {
    let deg = level_degree(ring.prime(), n, budget)?;
    Ok(one_plus_t_pow(ring, deg).sub(&IwasawaPoly::one(ring)))
}

/// `Φ_n = ω_n / ω_{n−1}` for `n ≥ 1`, and `Φ_0 = T`.
pub fn cyclotomic(ring: &CoefficientRing, n: u32, budget: DegreeBudget) -> Result<IwasawaPoly> {
    if n == 0 {
        return Ok(IwasawaPoly::t(ring));
    }
    let num = omega(ring, n, budget)?;
    let den = omega(ring, n - 1, budget)?;
    let (q, r) = num.divrem_monic(&den)?;
    debug_assert!(r.is_zero(), "ω_{{n-1}} divides ω_n exactly");
    Ok(q)
}

/// Division by a distinguished polynomial: `f = q·g + r` with `deg r < deg g`.
///
/// For polynomial `f` the Weierstrass quotient is itself a polynomial and
/// coincides with long division by the monic `g`.
pub fn weierstrass_divide(f: &IwasawaPoly, g: &IwasawaPoly) -> Result<(IwasawaPoly, IwasawaPoly)> {
    if !g.is_distinguished() {
        return Err(Error::BadDivisor {
            reason: format!("{} is not monic with non-unit lower coefficients", g.render()),
        });
    }
    if g.degree() == Some(0) {
        return Err(Error::BadDivisor { reason: "divisor must have degree at least 1".into() });
    }
    f.divrem_monic(g)
}

/// A product `∏ Φ_n^{m_n}` of tower polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharIdealRendering {
    /// Canonical text: `Φ_0^{a} · Φ_1^{b} · …`, zero multiplicities omitted, `1` if empty.
    pub text: String,
    /// Degree of the expanded product.
    pub degree: usize,
}

/// Canonical text of `∏ Φ_n^{m_n}` (zero multiplicities omitted; `1` for the unit ideal).
pub fn char_ideal_text(factors: &[(u32, u64)]) -> String {
    let parts: Vec<String> =
        factors.iter().filter(|(_, m)| *m > 0).map(|(n, m)| format!("Φ_{n}^{m}")).collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" · ")
    }
}

/// Renders a characteristic ideal and reports the degree of its generator.
pub fn char_ideal_render(p: u64, factors: &[(u32, u64)]) -> CharIdealRendering {
    let degree = factors.iter().map(|&(n, m)| phi_p_power(p, n) * m as usize).sum();
    CharIdealRendering { text: char_ideal_text(factors), degree }
}

/// Expanded generator `∏ Φ_n^{m_n}` (bounded by the degree budget).
pub fn char_ideal_poly(
    ring: &CoefficientRing,
    factors: &[(u32, u64)],
    budget: DegreeBudget,
) -> Result<IwasawaPoly> {
    let rendering = char_ideal_render(ring.prime(), factors);
    budget.check(rendering.degree, "characteristic ideal expansion")?;
    let mut acc = IwasawaPoly::one(ring);
    for &(n, m) in factors {
        let phi = cyclotomic(ring, n, budget)?;
        for _ in 0..m {
            acc = acc.mul(&phi);
        }
    }
    Ok(acc)
}
