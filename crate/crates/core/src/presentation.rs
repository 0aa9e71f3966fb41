//! Finitely presented Λ-modules as cokernels of relation matrices.
//!
//! A [`ModulePresentation`] with `g` generators and `c` relations is the
//! cokernel of `Λ^c → Λ^g`; relation `k` is column `k` of the matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::CoefficientRing;
use crate::poly::IwasawaPoly;

/// Current version tag written into every JSON document.
pub const SCHEMA_VERSION: &str = "1";

/// `Λ^g / (relation columns)` over a fixed coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulePresentation {
    ring: CoefficientRing,
    generators: usize,
    /// `generators` rows, each holding one entry per relation.
    relations: Vec<Vec<IwasawaPoly>>,
}

impl ModulePresentation {
    /// Validates shape and ring consistency.
    pub fn new(ring: &CoefficientRing, generators: usize, relations: Vec<Vec<IwasawaPoly>>) -> Result<Self> {
        let relations = if relations.is_empty() { vec![Vec::new(); generators] } else { relations };
        if relations.len() != generators {
            return Err(Error::input(
                "relations",
                format!("expected {generators} rows (one per generator), found {}", relations.len()),
            ));
        }
        let cols = relations.first().map_or(0, Vec::len);
        for (i, row) in relations.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::input(
                    "relations",
                    format!("row {i} has {} entries, expected {cols}", row.len()),
                ));
            }
            if row.iter().any(|e| e.ring() != ring) {
                return Err(Error::input("relations", format!("row {i} mixes coefficient rings")));
            }
        }
        Ok(ModulePresentation { ring: ring.clone(), generators, relations })
    }

    /// The free module `Λ^g`.
    pub fn free(ring: &CoefficientRing, generators: usize) -> Self {
        ModulePresentation { ring: ring.clone(), generators, relations: vec![Vec::new(); generators] }
    }

    /// The cyclic module `Λ/(f)`.
    pub fn cyclic(f: IwasawaPoly) -> Self {
        ModulePresentation { ring: f.ring().clone(), generators: 1, relations: vec![vec![f]] }
    }

    /// Builds from integer coefficient lists: `rows[i][k]` is entry `(i, k)`.
    pub fn from_int_rows(ring: &CoefficientRing, rows: &[Vec<Vec<i128>>]) -> Result<Self> {
        let relations = rows
            .iter()
            .map(|row| row.iter().map(|c| IwasawaPoly::from_ints(ring, c)).collect())
            .collect();
        Self::new(ring, rows.len(), relations)
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relation_count(&self) -> usize {
        self.relations.first().map_or(0, Vec::len)
    }

    pub fn relations(&self) -> &[Vec<IwasawaPoly>] {
        &self.relations
    }

    pub fn entry(&self, row: usize, col: usize) -> &IwasawaPoly {
        &self.relations[row][col]
    }

    /// Largest entry degree (0 for an empty matrix).
    pub fn max_degree(&self) -> usize {
        self.relations.iter().flatten().filter_map(IwasawaPoly::degree).max().unwrap_or(0)
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.ring != other.ring {
            return Err(Error::input("relations", "direct sum of presentations over different rings"));
        }
        let (c1, c2) = (self.relation_count(), other.relation_count());
        let zero = IwasawaPoly::zero(&self.ring);
        let mut rows = Vec::with_capacity(self.generators + other.generators);
        for row in &self.relations {
            let mut r = row.clone();
            r.extend(std::iter::repeat(zero.clone()).take(c2));
            rows.push(r);
        }
        for row in &other.relations {
            let mut r: Vec<IwasawaPoly> = std::iter::repeat(zero.clone()).take(c1).collect();
            r.extend(row.iter().cloned());
            rows.push(r);
        }
        Self::new(&self.ring, self.generators + other.generators, rows)
    }

    /// Direct sum of a list (the zero module for an empty list).
    pub fn direct_sum_all(ring: &CoefficientRing, parts: &[Self]) -> Result<Self> {
        parts.iter().try_fold(Self::free(ring, 0), |acc, m| acc.direct_sum(m))
    }

    /// Appends extra relation columns.
    pub fn with_extra_relations(&self, columns: &[Vec<IwasawaPoly>]) -> Result<Self> {
        let mut rows = self.relations.clone();
        for col in columns {
            if col.len() != self.generators {
                return Err(Error::input("relations", "extra relation has the wrong length"));
            }
            for (row, e) in rows.iter_mut().zip(col) {
                row.push(e.clone());
            }
        }
        Self::new(&self.ring, self.generators, rows)
    }

    /// Applies `f` to every entry (used for substitutions and reductions).
    pub fn map_entries(&self, f: impl Fn(&IwasawaPoly) -> Result<IwasawaPoly>) -> Result<Self> {
        let rows = self
            .relations
            .iter()
            .map(|row| row.iter().map(&f).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(&self.ring, self.generators, rows)
    }

    /// Restriction of scalars to `Zp`: each entry becomes a `d × d` block
    /// (the matrix of multiplication on the power basis of the residue
    /// modulus), each block entry a `Zp`-polynomial given by residues.
    ///
    /// Returned as `(rows, cols, entries[row][col] = coefficient residues)`.
    pub fn restrict_to_zp(&self) -> ZpMatrix {
        let d = self.ring.degree();
        let (g, c) = (self.generators, self.relation_count());
        let mut entries = vec![vec![Vec::new(); c * d]; g * d];
        let basis: Vec<_> = (0..d)
            .map(|k| {
                let mut v = vec![0u128; d];
                v[k] = 1;
                self.ring.from_coords(&v).expect("basis vector has d coordinates")
            })
            .collect();
        for i in 0..g {
            for j in 0..c {
                let e = &self.relations[i][j];
                for (cb, b) in basis.iter().enumerate() {
                    // column (j, cb) = entry · x^cb, split by coordinate r.
                    let prods: Vec<_> = e.coeffs().iter().map(|a| self.ring.mul(a, b)).collect();
                    for r in 0..d {
                        let mut poly: Vec<u128> = prods.iter().map(|x| x.coords()[r]).collect();
                        while poly.last() == Some(&0) {
                            poly.pop();
                        }
                        entries[i * d + r][j * d + cb] = poly;
                    }
                }
            }
        }
        ZpMatrix { prime: self.ring.prime(), precision: self.ring.precision(), rows: g * d, cols: c * d, entries }
    }
}

/// A relation matrix over `Zp[T]` given by residues modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpMatrix {
    pub prime: u64,
    pub precision: u32,
    pub rows: usize,
    pub cols: usize,
    /// `entries[row][col]` lists polynomial coefficients, constant first.
    pub entries: Vec<Vec<Vec<u128>>>,
}

impl ZpMatrix {
    /// Appends columns given as vectors of polynomials.
    pub fn with_columns(&self, extra: &[Vec<Vec<u128>>]) -> ZpMatrix {
        let mut m = self.clone();
        for col in extra {
            for (row, e) in m.entries.iter_mut().zip(col) {
                row.push(e.clone());
            }
        }
        m.cols += extra.len();
        m
    }
}

/// One coefficient in JSON: a bare integer string (degree 1 only), an integer,
/// or a list of coordinate strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientJson {
    Text(String),
    Int(i64),
    Coords(Vec<CoordinateJson>),
}

/// One coordinate: string (canonical) or integer (accepted on input).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordinateJson {
    Text(String),
    Int(i64),
}

/// Wire format of a [`ModulePresentation`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationJson {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    pub p: u64,
    #[serde(default = "default_degree")]
    pub unramified_degree: usize,
    pub precision: u32,
    pub generators: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_modulus: Option<Vec<u64>>,
    /// `relations[i][k]` is the polynomial in generator row `i`, relation `k`.
    #[serde(default)]
    pub relations: Vec<Vec<Vec<CoefficientJson>>>,
}

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

fn default_degree() -> usize {
    1
}

impl PresentationJson {
    /// Converts to a validated presentation.
    pub fn into_presentation(self) -> Result<ModulePresentation> {
        let ring = match self.residue_modulus {
            Some(m) => {
                if m.len() != self.unramified_degree + 1 {
                    return Err(Error::input("residue_modulus", "length must be unramified_degree + 1"));
                }
                CoefficientRing::with_residue_modulus(self.p, self.precision, m)?
            }
            None => CoefficientRing::new(self.p, self.unramified_degree, self.precision)?,
        };
        let d = ring.degree();
        let coord = |c: &CoordinateJson| -> Result<u128> {
            match c {
                CoordinateJson::Text(s) => ring.parse_coordinate(s),
                CoordinateJson::Int(i) => Ok(ring.from_int(*i as i128).rational_part()),
            }
        };
        let mut rows = Vec::with_capacity(self.relations.len());
        for (i, row) in self.relations.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (k, poly) in row.iter().enumerate() {
                let mut coeffs = Vec::with_capacity(poly.len());
                for c in poly {
                    let coords = match c {
                        CoefficientJson::Text(s) if d == 1 => vec![ring.parse_coordinate(s)?],
                        CoefficientJson::Int(x) if d == 1 => vec![ring.from_int(*x as i128).rational_part()],
                        CoefficientJson::Coords(v) => v.iter().map(coord).collect::<Result<Vec<_>>>()?,
                        _ => {
                            return Err(Error::input(
                                &format!("relations[{i}][{k}]"),
                                format!("coefficients need {d} coordinates"),
                            ))
                        }
                    };
                    coeffs.push(ring.from_coords(&coords).map_err(|e| match e {
                        Error::InvalidInput { message, .. } => {
                            Error::input(&format!("relations[{i}][{k}]"), message)
                        }
                        other => other,
                    })?);
                }
                out.push(IwasawaPoly::new(&ring, coeffs));
            }
            rows.push(out);
        }
        ModulePresentation::new(&ring, self.generators, rows)
    }

    /// Canonical wire form: every coefficient as a list of coordinate strings.
    pub fn from_presentation(m: &ModulePresentation) -> Self {
        let ring = m.ring();
        let residue_modulus = (ring.degree() > 1).then(|| ring.residue_modulus().to_vec());
        PresentationJson {
            schema_version: default_schema(),
            p: ring.prime(),
            unramified_degree: ring.degree(),
            precision: ring.precision(),
            generators: m.generators(),
            residue_modulus,
            relations: m
                .relations()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|poly| {
                            poly.coeffs()
                                .iter()
                                .map(|c| {
                                    CoefficientJson::Coords(
                                        ring.to_strings(c).into_iter().map(CoordinateJson::Text).collect(),
                                    )
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl ModulePresentation {
    /// Parses the JSON wire format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PresentationJson = serde_json::from_str(text).map_err(|e| {
            Error::input("presentation", e.to_string())
        })?;
        raw.into_presentation()
    }

    /// Serializes to the canonical JSON wire format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PresentationJson::from_presentation(self)).expect("presentation serializes")
    }
}
