//! Exact lattices and their shell structure.
//!
//! A [`Lattice`] stores an exact rational row basis (when one exists) and
//! its Gram matrix. Built-ins cover `Z^n`, `D_n`, `E8` and orthogonal direct
//! sums; arbitrary lattices can be loaded from a basis or a Gram matrix.

mod four_squares;
pub mod rational;
mod rotation;
mod shells;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rational::{determinant, gram_of_rows, int, is_integer, ldl, rat, Rational, RationalMatrix};

pub use four_squares::four_squares;
pub use rotation::{random_rotation, RotatedLattice, RotationMatrix};
pub use shells::{
    enumerate_shells, enumerate_shells_with, enumerate_vectors, EnumerationOptions, ShellSeries,
    ShellStrategy, DEFAULT_BUDGET,
};

#[derive(Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    basis: Option<RationalMatrix>,
    gram: RationalMatrix,
    name: Option<String>,
}

/// Names accepted by [`make_named`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeSpec {
    Zn(usize),
    Dn(usize),
    E8,
    DirectSum(Vec<LatticeSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityCertificate {
    /// Integral and unimodular: every sublattice has an integer Gram
    /// determinant `>= 1`, so covolume `>= 1` in its span.
    CertifiedStable,
    /// The integral-unimodular sufficient condition does not apply; nothing
    /// is claimed either way.
    NotApplicable,
}

impl Lattice {
    /// Lattice spanned by the rows of `basis`.
    pub fn from_basis(basis: RationalMatrix, name: Option<String>) -> Result<Lattice> {
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if basis.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidParameter("basis must be square".into()));
        }
        let gram = gram_of_rows(&basis);
        if ldl(&gram).is_none() {
            return Err(Error::InvalidParameter("basis is degenerate".into()));
        }
        Ok(Lattice {
            dim,
            basis: Some(basis),
            gram,
            name,
        })
    }

    /// Lattice known only through its Gram matrix.
    pub fn from_gram(gram: RationalMatrix, name: Option<String>) -> Result<Lattice> {
        let dim = gram.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if gram.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidParameter("gram must be square".into()));
        }
        if (0..dim).any(|i| (0..i).any(|j| gram[i][j] != gram[j][i])) {
            return Err(Error::InvalidParameter("gram must be symmetric".into()));
        }
        if ldl(&gram).is_none() {
            return Err(Error::InvalidParameter(
                "gram must be positive definite".into(),
            ));
        }
        Ok(Lattice {
            dim,
            basis: None,
            gram,
            name,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Option<&RationalMatrix> {
        self.basis.as_ref()
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("lattice{}", self.dim))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Lattice {
        self.name = Some(name.into());
        self
    }

    pub fn gram_determinant(&self) -> Rational {
        determinant(&self.gram)
    }

    pub fn covolume(&self) -> f64 {
        rational::to_f64(&self.gram_determinant()).sqrt()
    }

    pub fn is_integral(&self) -> bool {
        self.gram.iter().flatten().all(is_integer)
    }

    pub fn is_unimodular(&self) -> bool {
        self.gram_determinant().is_one()
    }

    /// Even lattice: integral with every diagonal Gram entry even.
    pub fn is_even(&self) -> bool {
        self.is_integral()
            && (0..self.dim).all(|i| (self.gram[i][i].numer() % BigInt::from(2)).is_zero())
    }

    pub fn is_self_dual(&self) -> bool {
        self.is_integral() && self.is_unimodular()
    }

    pub fn stability_certificate(&self) -> StabilityCertificate {
        if self.is_self_dual() {
            StabilityCertificate::CertifiedStable
        } else {
            StabilityCertificate::NotApplicable
        }
    }

    /// Ambient coordinates of the integer combination `coeffs` of basis rows.
    pub fn ambient_f64(&self, coeffs: &[i64]) -> Option<Vec<f64>> {
        let basis = self.basis.as_ref()?;
        let mut out = vec![0.0; self.dim];
        for (c, row) in coeffs.iter().zip(basis) {
            if *c == 0 {
                continue;
            }
            for (o, b) in out.iter_mut().zip(row) {
                *o += *c as f64 * rational::to_f64(b);
            }
        }
        Some(out)
    }

    pub fn basis_f64(&self) -> Option<Vec<Vec<f64>>> {
        self.basis.as_ref().map(|b| {
            b.iter()
                .map(|row| row.iter().map(rational::to_f64).collect())
                .collect()
        })
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_basis", &self.basis.is_some())
            .finish()
    }
}

pub fn is_integral(lattice: &Lattice) -> bool {
    lattice.is_integral()
}

pub fn is_unimodular(lattice: &Lattice) -> bool {
    lattice.is_unimodular()
}

pub fn stability_certificate(lattice: &Lattice) -> StabilityCertificate {
    lattice.stability_certificate()
}

pub fn zn(n: usize) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::InvalidParameter("Z^n needs n >= 1".into()));
    }
    Lattice::from_basis(rational::identity(n), Some(format!("Z{n}")))
}

/// `D_n = {x in Z^n : sum x_i even}` with basis `2e_1, e_i - e_1`.
pub fn dn(n: usize) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::InvalidParameter("D_n needs n >= 1".into()));
    }
    let mut basis = vec![vec![int(0); n]; n];
    basis[0][0] = int(2);
    for (i, row) in basis.iter_mut().enumerate().skip(1) {
        row[0] = int(-1);
        row[i] = int(1);
    }
    Lattice::from_basis(basis, Some(format!("D{n}")))
}

/// `E8 = D8 ∪ (D8 + (1/2,...,1/2))`, as the span of `2e_1`, the chain
/// `e_{i+1} - e_i` and the glue vector `(1/2, ..., 1/2)`.
pub fn e8() -> Lattice {
    let mut basis = vec![vec![int(0); 8]; 8];
    basis[0][0] = int(2);
    for i in 1..7 {
        basis[i][i - 1] = int(-1);
        basis[i][i] = int(1);
    }
    basis[7] = vec![rat(1, 2); 8];
    Lattice::from_basis(basis, Some("E8".into())).expect("E8 basis is nondegenerate")
}

/// Orthogonal direct sum; blocks occupy disjoint coordinate ranges.
pub fn direct_sum(parts: &[Lattice]) -> Result<Lattice> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("direct sum of nothing".into()));
    }
    let dim: usize = parts.iter().map(Lattice::dim).sum();
    let name = parts
        .iter()
        .map(Lattice::label)
        .collect::<Vec<_>>()
        .join("+");
    let mut gram = vec![vec![int(0); dim]; dim];
    let mut offset = 0;
    for p in parts {
        for i in 0..p.dim {
            for j in 0..p.dim {
                gram[offset + i][offset + j] = p.gram[i][j].clone();
            }
        }
        offset += p.dim;
    }
    let basis = if parts.iter().all(|p| p.basis.is_some()) {
        let mut basis = vec![vec![int(0); dim]; dim];
        let mut offset = 0;
        for p in parts {
            let b = p.basis.as_ref().expect("checked above");
            for i in 0..p.dim {
                for j in 0..p.dim {
                    basis[offset + i][offset + j] = b[i][j].clone();
                }
            }
            offset += p.dim;
        }
        Some(basis)
    } else {
        None
    };
    Ok(Lattice {
        dim,
        basis,
        gram,
        name: Some(name),
    })
}

/// `E8 ⊕ Z^{n-8}`, with `Z^0 = {0}` so that `n = 8` gives `E8` itself.
pub fn e8_plus_zn(n: usize) -> Result<Lattice> {
    match n {
        0..=7 => Err(Error::InvalidParameter(format!(
            "E8 ⊕ Z^(n-8) needs n >= 8, got {n}"
        ))),
        8 => Ok(e8()),
        _ => direct_sum(&[e8(), zn(n - 8)?]),
    }
}

pub fn make_named(spec: &LatticeSpec) -> Result<Lattice> {
    match spec {
        LatticeSpec::Zn(n) => zn(*n),
        LatticeSpec::Dn(n) => dn(*n),
        LatticeSpec::E8 => Ok(e8()),
        LatticeSpec::DirectSum(parts) => {
            let built = parts.iter().map(make_named).collect::<Result<Vec<_>>>()?;
            direct_sum(&built)
        }
    }
}

impl LatticeSpec {
    /// Parses `Z8`, `D8`, `E8`, `Zn(8)`, `Dn(8)` and sums such as `E8+Z4`.
    pub fn parse(text: &str) -> Result<LatticeSpec> {
        let parts: Vec<&str> = text.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            let specs = parts
                .iter()
                .map(|p| Self::parse_atom(p))
                .collect::<Result<Vec<_>>>()?;
            return Ok(LatticeSpec::DirectSum(specs));
        }
        Self::parse_atom(parts[0])
    }

    fn parse_atom(text: &str) -> Result<LatticeSpec> {
        let unknown = || Error::UnknownLattice(text.to_string());
        if text.eq_ignore_ascii_case("E8") {
            return Ok(LatticeSpec::E8);
        }
        let (family, rest) = text.split_at(text.chars().next().map_or(0, char::len_utf8));
        let digits = rest
            .strip_prefix("n(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(rest);
        let n: usize = digits.parse().map_err(|_| unknown())?;
        match family {
            "Z" | "z" => Ok(LatticeSpec::Zn(n)),
            "D" | "d" => Ok(LatticeSpec::Dn(n)),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSpec::Zn(n) => write!(f, "Z{n}"),
            LatticeSpec::Dn(n) => write!(f, "D{n}"),
            LatticeSpec::E8 => write!(f, "E8"),
            LatticeSpec::DirectSum(parts) => {
                let names: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "{}", names.join("+"))
            }
        }
    }
}

/// On-disk form: `{"dim": n, "basis": [[num, den], ...], "name": ...}` with
/// the basis flattened row-major. Gram-only lattices use `"gram"` instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<[i64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<[i64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn flatten(m: &RationalMatrix) -> Result<Vec<[i64; 2]>> {
    m.iter()
        .flatten()
        .map(|q| match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Ok([n, d]),
            _ => Err(Error::InvalidParameter(
                "entry does not fit in 64 bits".into(),
            )),
        })
        .collect()
}

fn unflatten(dim: usize, entries: &[[i64; 2]]) -> Result<RationalMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::InvalidParameter(format!(
            "expected {} entries for dim {dim}, found {}",
            dim * dim,
            entries.len()
        )));
    }
    if entries.iter().any(|[_, d]| *d == 0) {
        return Err(Error::InvalidParameter("zero denominator".into()));
    }
    Ok(entries
        .chunks(dim)
        .map(|row| row.iter().map(|[n, d]| rat(*n, *d)).collect())
        .collect())
}

impl Lattice {
    pub fn to_json(&self) -> Result<LatticeJson> {
        Ok(LatticeJson {
            dim: self.dim,
            basis: self.basis.as_ref().map(flatten).transpose()?,
            gram: if self.basis.is_none() {
                Some(flatten(&self.gram)?)
            } else {
                None
            },
            name: self.name.clone(),
        })
    }

    pub fn from_json(json: &LatticeJson) -> Result<Lattice> {
        match (&json.basis, &json.gram) {
            (Some(b), _) => Lattice::from_basis(unflatten(json.dim, b)?, json.name.clone()),
            (None, Some(g)) => Lattice::from_gram(unflatten(json.dim, g)?, json.name.clone()),
            (None, None) => Err(Error::InvalidParameter(
                "lattice needs a basis or gram".into(),
            )),
        }
    }
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json()
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Lattice, D::Error> {
        let json = LatticeJson::deserialize(d)?;
        Lattice::from_json(&json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zn_gram_is_identity() {
        let z3 = zn(3).unwrap();
        assert_eq!(z3.gram(), &rational::identity(3));
        assert!(z3.is_integral() && z3.is_unimodular());
    }

    #[test]
    fn e8_is_even_unimodular() {
        let e = e8();
        assert!(e.is_integral());
        assert!(e.is_even());
        assert_eq!(e.gram_determinant(), int(1));
        let glue = &e.basis().unwrap()[7];
        assert!(glue.iter().all(|q| *q == rat(1, 2)));
    }

    #[test]
    fn d8_has_determinant_four() {
        let d8 = dn(8).unwrap();
        assert!(d8.is_integral());
        assert_eq!(d8.gram_determinant(), int(4));
        assert!(!d8.is_unimodular());
        assert_eq!(
            d8.stability_certificate(),
            StabilityCertificate::NotApplicable
        );
    }

    #[test]
    fn direct_sum_dimension_and_determinant() {
        let l = direct_sum(&[e8(), zn(4).unwrap()]).unwrap();
        assert_eq!(l.dim(), 12);
        assert_eq!(l.gram_determinant(), int(1));
        assert_eq!(
            l.stability_certificate(),
            StabilityCertificate::CertifiedStable
        );
        assert_eq!(l.label(), "E8+Z4");
    }

    #[test]
    fn approximate_sqrt2_is_not_integral() {
        let s = rat(141_421, 100_000);
        let l = Lattice::from_basis(vec![vec![s.clone(), int(0)], vec![int(0), s]], None).unwrap();
        assert!(!l.is_integral());
        assert_eq!(l.gram()[0][0], rat(19_999_899_241, 10_000_000_000));
    }

    #[test]
    fn gram_only_lattice_is_not_certified() {
        let l =
            Lattice::from_gram(vec![vec![int(2), int(0)], vec![int(0), rat(1, 2)]], None).unwrap();
        assert!(!l.is_integral());
        assert!(l.is_unimodular());
        assert_eq!(
            l.stability_certificate(),
            StabilityCertificate::NotApplicable
        );
    }

    #[test]
    fn rejects_zero_dimension_and_bad_names() {
        assert!(zn(0).is_err());
        assert!(dn(0).is_err());
        assert!(matches!(
            LatticeSpec::parse("Q7"),
            Err(Error::UnknownLattice(_))
        ));
        assert!(matches!(
            LatticeSpec::parse("Zx"),
            Err(Error::UnknownLattice(_))
        ));
        assert!(make_named(&LatticeSpec::DirectSum(vec![])).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!(LatticeSpec::parse("Zn(8)").unwrap(), LatticeSpec::Zn(8));
        assert_eq!(
            LatticeSpec::parse("E8+Z4").unwrap(),
            LatticeSpec::DirectSum(vec![LatticeSpec::E8, LatticeSpec::Zn(4)])
        );
        assert_eq!(LatticeSpec::parse("D8").unwrap().to_string(), "D8");
    }

    #[test]
    fn rejects_indefinite_gram() {
        let g = vec![vec![int(1), int(2)], vec![int(2), int(1)]];
        assert!(Lattice::from_gram(g, None).is_err());
        let asym = vec![vec![int(2), int(1)], vec![int(0), int(2)]];
        assert!(Lattice::from_gram(asym, None).is_err());
    }

    #[test]
    fn json_round_trip_preserves_lattice() {
        let e = e8();
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("\"basis\":[[2,1]"));
        let back: Lattice = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        let g = Lattice::from_gram(vec![vec![int(2), int(1)], vec![int(1), int(2)]], None).unwrap();
        let back: Lattice = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
