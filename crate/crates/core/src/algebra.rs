//! Arrow algebras for diagram edges.
//!
//! Two backends are provided. [`ModExpTheory`] works over the objects
//! `unit` and `carrier`: `select(x)` picks the residue `x` of `Z_p` and
//! `pow(e)` raises a residue to the `e`-th power, with exponents kept
//! modulo `p - 1` because `Z_p*` is cyclic of that order.
//! [`MatrixMonoidTheory`] works over the single object `dot`: arrows are
//! square matrices over `Z_n` under multiplication, either named generators
//! or explicit literals. Composition is right to left: `compose(f, g)`
//! is `g` after `f`.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest modulus either theory accepts.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Largest matrix dimension the monoid theory accepts.
pub const MAX_DIM: usize = 16;

/// Objects that arrows run between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraObject {
    /// Terminal object; source of selections.
    Unit,
    /// The residue carrier of a modular exponentiation theory.
    Carrier,
    /// The single object of a matrix monoid.
    Dot,
}

impl AlgebraObject {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgebraObject::Unit => "unit",
            AlgebraObject::Carrier => "carrier",
            AlgebraObject::Dot => "dot",
        }
    }

    pub fn parse(s: &str) -> Option<AlgebraObject> {
        match s {
            "unit" => Some(AlgebraObject::Unit),
            "carrier" => Some(AlgebraObject::Carrier),
            "dot" => Some(AlgebraObject::Dot),
            _ => None,
        }
    }
}

impl fmt::Display for AlgebraObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for AlgebraObject {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// A square matrix over `Z_n`, stored row major with reduced entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    dim: usize,
    entries: Vec<u64>,
}

impl Matrix {
    /// Builds a matrix from rows, reducing entries modulo `modulus`.
    pub fn from_rows(rows: &[Vec<u64>], dim: usize, modulus: u64) -> Result<Matrix> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArrow {
                reason: format!("matrix is not {dim}x{dim}"),
            });
        }
        let entries = rows.iter().flatten().map(|&v| v % modulus).collect();
        Ok(Matrix { dim, entries })
    }

    /// The identity matrix.
    pub fn identity(dim: usize) -> Matrix {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        Matrix { dim, entries }
    }

    /// Matrix product `self * other` over `Z_modulus`.
    pub fn mul(&self, other: &Matrix, modulus: u64) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                // u128 accumulation: d * (2^31)^2 stays far below u128::MAX.
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += self.entries[i * d + k] as u128 * other.entries[k * d + j] as u128;
                }
                entries[i * d + j] = (acc % modulus as u128) as u64;
            }
        }
        Matrix { dim: d, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entries as rows, for serialization and display.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.dim).map(<[u64]>::to_vec).collect()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.rows();
        let mut seq = serializer.serialize_seq(Some(rows.len()))?;
        for row in rows {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// A monoid element: a declared generator by name, or a literal matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElemRef {
    Named(String),
    Lit(Matrix),
}

/// An edge label in one of the two theories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraArrow {
    /// `unit -> carrier`, picking the residue `x`.
    Select(u64),
    /// `carrier -> carrier`, raising to the `e`-th power.
    Pow(u64),
    /// `dot -> dot`, a monoid element.
    Elem(ElemRef),
}

impl fmt::Display for AlgebraArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraArrow::Select(x) => write!(f, "select({x})"),
            AlgebraArrow::Pow(e) => write!(f, "pow({e})"),
            AlgebraArrow::Elem(ElemRef::Named(n)) => f.write_str(n),
            AlgebraArrow::Elem(ElemRef::Lit(m)) => write!(f, "{m}"),
        }
    }
}

impl Serialize for AlgebraArrow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Fields are emitted in alphabetical order to keep output canonical.
        match self {
            AlgebraArrow::Select(x) => {
                let mut s = serializer.serialize_struct("Arrow", 2)?;
                s.serialize_field("op", "select")?;
                s.serialize_field("value", x)?;
                s.end()
            }
            AlgebraArrow::Pow(e) => {
                let mut s = serializer.serialize_struct("Arrow", 2)?;
                s.serialize_field("exp", e)?;
                s.serialize_field("op", "pow")?;
                s.end()
            }
            AlgebraArrow::Elem(ElemRef::Named(n)) => {
                let mut s = serializer.serialize_struct("Arrow", 2)?;
                s.serialize_field("name", n)?;
                s.serialize_field("op", "elem")?;
                s.end()
            }
            AlgebraArrow::Elem(ElemRef::Lit(m)) => {
                let mut s = serializer.serialize_struct("Arrow", 2)?;
                s.serialize_field("matrix", m)?;
                s.serialize_field("op", "elem")?;
                s.end()
            }
        }
    }
}

/// A value an arrow can be applied to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    /// The unique point of `unit`.
    Star,
    /// A residue in `Z_p`.
    Residue(u64),
    /// A matrix point of `dot`.
    Matrix(Matrix),
}

/// `base^exp mod m` by square and multiply.
pub fn modpow(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut base = base as u128 % m as u128;
    let mut acc: u128 = 1 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic trial-division primality check, valid for all `u64`
/// inputs reachable under [`MAX_MODULUS`].
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Exponentiation over `Z_p` for a prime `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModExpTheory {
    p: u64,
}

impl ModExpTheory {
    /// Requires `p` prime with `3 <= p <= 2^31`.
    pub fn new(p: u64) -> Result<ModExpTheory> {
        if !(3..=MAX_MODULUS).contains(&p) {
            return Err(Error::InvalidTheory {
                reason: format!("modulus {p} outside 3..=2^31"),
            });
        }
        if !is_prime(p) {
            return Err(Error::InvalidTheory {
                reason: format!("modulus {p} is not prime"),
            });
        }
        Ok(ModExpTheory { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Canonical exponent representative in `1..=p-1` for `e >= 1`.
    ///
    /// Exponents act through `x -> x^e mod p`, and on `Z_p*` that action
    /// depends only on `e mod (p-1)`; the class of 0 is represented by
    /// `p - 1` so the representative never collides with `pow(0)`.
    fn norm_exp(&self, e: u128) -> u64 {
        debug_assert!(e >= 1);
        let m = (self.p - 1) as u128;
        let r = e % m;
        if r == 0 {
            self.p - 1
        } else {
            r as u64
        }
    }

    /// A validated `select(x)` arrow with `x` reduced modulo `p`.
    pub fn select(&self, x: u64) -> AlgebraArrow {
        AlgebraArrow::Select(x % self.p)
    }

    /// A validated `pow(e)` arrow; `e = 0` is rejected because `x -> x^0`
    /// is not injective on `Z_p` and breaks exponent arithmetic.
    pub fn pow(&self, e: u64) -> Result<AlgebraArrow> {
        if e == 0 {
            return Err(Error::InvalidArrow {
                reason: "pow(0) is not a valid arrow; exponents start at 1".into(),
            });
        }
        Ok(AlgebraArrow::Pow(self.norm_exp(e as u128)))
    }
}

/// Square matrices over `Z_n` under multiplication, with named generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixMonoidTheory {
    modulus: u64,
    dim: usize,
    elements: BTreeMap<String, Matrix>,
    pools: BTreeMap<String, Vec<String>>,
}

impl MatrixMonoidTheory {
    /// Requires `2 <= modulus <= 2^31` and `1 <= dim <= 16`; pool members
    /// must be declared elements.
    pub fn new(
        modulus: u64,
        dim: usize,
        elements: BTreeMap<String, Matrix>,
        pools: BTreeMap<String, Vec<String>>,
    ) -> Result<MatrixMonoidTheory> {
        if !(2..=MAX_MODULUS).contains(&modulus) {
            return Err(Error::InvalidTheory {
                reason: format!("modulus {modulus} outside 2..=2^31"),
            });
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidTheory {
                reason: format!("dimension {dim} outside 1..={MAX_DIM}"),
            });
        }
        for (name, m) in &elements {
            if name.is_empty() {
                return Err(Error::InvalidTheory {
                    reason: "element names must be non-empty".into(),
                });
            }
            if m.dim() != dim {
                return Err(Error::InvalidTheory {
                    reason: format!("element {name:?} is not {dim}x{dim}"),
                });
            }
            if m.entries.iter().any(|&v| v >= modulus) {
                return Err(Error::InvalidTheory {
                    reason: format!("element {name:?} has entries outside Z_{modulus}"),
                });
            }
        }
        for (pool, members) in &pools {
            for member in members {
                if !elements.contains_key(member) {
                    return Err(Error::InvalidTheory {
                        reason: format!("pool {pool:?} lists undeclared element {member:?}"),
                    });
                }
            }
        }
        Ok(MatrixMonoidTheory {
            modulus,
            dim,
            elements,
            pools,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &BTreeMap<String, Matrix> {
        &self.elements
    }

    pub fn pools(&self) -> &BTreeMap<String, Vec<String>> {
        &self.pools
    }

    /// Arrow for a declared element.
    pub fn elem(&self, name: &str) -> Result<AlgebraArrow> {
        if self.elements.contains_key(name) {
            Ok(AlgebraArrow::Elem(ElemRef::Named(name.into())))
        } else {
            Err(Error::UnknownElement { name: name.into() })
        }
    }

    /// The matrix an element reference denotes.
    pub fn resolve(&self, elem: &ElemRef) -> Result<Matrix> {
        match elem {
            ElemRef::Named(name) => self
                .elements
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnknownElement { name: name.clone() }),
            ElemRef::Lit(m) => {
                if m.dim() != self.dim {
                    return Err(Error::InvalidArrow {
                        reason: format!("matrix literal is not {}x{}", self.dim, self.dim),
                    });
                }
                Ok(Matrix {
                    dim: m.dim,
                    entries: m.entries.iter().map(|&v| v % self.modulus).collect(),
                })
            }
        }
    }
}

/// One of the two arrow algebras.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraTheory {
    ModExp(ModExpTheory),
    MatrixMonoid(MatrixMonoidTheory),
}

impl AlgebraTheory {
    /// Source and target objects of an arrow, validating membership.
    pub fn objects_of(&self, arrow: &AlgebraArrow) -> Result<(AlgebraObject, AlgebraObject)> {
        match (self, arrow) {
            (AlgebraTheory::ModExp(_), AlgebraArrow::Select(_)) => {
                Ok((AlgebraObject::Unit, AlgebraObject::Carrier))
            }
            (AlgebraTheory::ModExp(_), AlgebraArrow::Pow(_)) => {
                Ok((AlgebraObject::Carrier, AlgebraObject::Carrier))
            }
            (AlgebraTheory::MatrixMonoid(_), AlgebraArrow::Elem(_)) => {
                Ok((AlgebraObject::Dot, AlgebraObject::Dot))
            }
            _ => Err(Error::InvalidArrow {
                reason: format!("arrow {arrow} does not belong to this theory"),
            }),
        }
    }

    /// Objects a node may carry in this theory.
    pub fn valid_object(&self, object: AlgebraObject) -> bool {
        match self {
            AlgebraTheory::ModExp(_) => {
                matches!(object, AlgebraObject::Unit | AlgebraObject::Carrier)
            }
            AlgebraTheory::MatrixMonoid(_) => matches!(object, AlgebraObject::Dot),
        }
    }

    /// Canonical form of an arrow: exponents reduced, selections reduced,
    /// names checked, matrix literals reduced entrywise.
    pub fn normalize(&self, arrow: &AlgebraArrow) -> Result<AlgebraArrow> {
        match (self, arrow) {
            (AlgebraTheory::ModExp(t), AlgebraArrow::Select(x)) => Ok(t.select(*x)),
            (AlgebraTheory::ModExp(t), AlgebraArrow::Pow(e)) => t.pow(*e),
            (AlgebraTheory::MatrixMonoid(t), AlgebraArrow::Elem(e)) => match e {
                ElemRef::Named(name) => t.elem(name),
                ElemRef::Lit(_) => Ok(AlgebraArrow::Elem(ElemRef::Lit(t.resolve(e)?))),
            },
            _ => Err(Error::InvalidArrow {
                reason: format!("arrow {arrow} does not belong to this theory"),
            }),
        }
    }

    /// Composite `then` after `first`.
    pub fn compose(&self, first: &AlgebraArrow, then: &AlgebraArrow) -> Result<AlgebraArrow> {
        match (self, first, then) {
            (AlgebraTheory::ModExp(t), AlgebraArrow::Select(x), AlgebraArrow::Pow(e)) => {
                Ok(t.select(modpow(*x, *e, t.p)))
            }
            (AlgebraTheory::ModExp(t), AlgebraArrow::Pow(e1), AlgebraArrow::Pow(e2)) => {
                if *e1 == 0 || *e2 == 0 {
                    return Err(Error::InvalidArrow {
                        reason: "pow(0) is not a valid arrow; exponents start at 1".into(),
                    });
                }
                Ok(AlgebraArrow::Pow(t.norm_exp(*e1 as u128 * *e2 as u128)))
            }
            (AlgebraTheory::ModExp(_), _, AlgebraArrow::Select(_)) => Err(Error::Composition {
                reason: format!(
                    "cannot compose {first} then {then}: selections start at unit and nothing ends there"
                ),
            }),
            (AlgebraTheory::MatrixMonoid(t), AlgebraArrow::Elem(f), AlgebraArrow::Elem(g)) => {
                let f = t.resolve(f)?;
                let g = t.resolve(g)?;
                // Right to left: the later arrow multiplies on the left.
                Ok(AlgebraArrow::Elem(ElemRef::Lit(g.mul(&f, t.modulus))))
            }
            _ => Err(Error::InvalidArrow {
                reason: format!("cannot compose {first} then {then} in this theory"),
            }),
        }
    }

    /// Semantic equality of arrows.
    ///
    /// For exponentiation this is extensional equality of the induced maps
    /// on `Z_p*`: selections agree on their residue, powers agree on the
    /// canonical exponent representative (the carrier is cyclic, so a
    /// primitive root separates distinct exponent classes). For the
    /// monoid it is equality of the denoted matrices.
    pub fn arrows_equal(&self, a: &AlgebraArrow, b: &AlgebraArrow) -> Result<bool> {
        match (self, a, b) {
            (AlgebraTheory::ModExp(_), _, _) => {
                let a = self.normalize(a)?;
                let b = self.normalize(b)?;
                Ok(match (&a, &b) {
                    (AlgebraArrow::Select(x), AlgebraArrow::Select(y)) => x == y,
                    (AlgebraArrow::Pow(e), AlgebraArrow::Pow(f)) => e == f,
                    _ => false,
                })
            }
            (AlgebraTheory::MatrixMonoid(t), AlgebraArrow::Elem(x), AlgebraArrow::Elem(y)) => {
                Ok(t.resolve(x)? == t.resolve(y)?)
            }
            _ => Err(Error::InvalidArrow {
                reason: "arrows do not belong to this theory".into(),
            }),
        }
    }

    /// Applies an arrow to a point.
    pub fn eval(&self, arrow: &AlgebraArrow, point: &Point) -> Result<Point> {
        match (self, arrow, point) {
            (AlgebraTheory::ModExp(t), AlgebraArrow::Select(x), Point::Star) => {
                Ok(Point::Residue(*x % t.p))
            }
            (AlgebraTheory::ModExp(t), AlgebraArrow::Pow(e), Point::Residue(r)) => {
                if *r >= t.p {
                    return Err(Error::Eval {
                        reason: format!("residue {r} outside Z_{}", t.p),
                    });
                }
                if *e == 0 {
                    return Err(Error::InvalidArrow {
                        reason: "pow(0) is not a valid arrow; exponents start at 1".into(),
                    });
                }
                Ok(Point::Residue(modpow(*r, *e, t.p)))
            }
            (AlgebraTheory::MatrixMonoid(t), AlgebraArrow::Elem(m), Point::Matrix(x)) => {
                if x.dim() != t.dim {
                    return Err(Error::Eval {
                        reason: format!("point is not {}x{}", t.dim, t.dim),
                    });
                }
                Ok(Point::Matrix(t.resolve(m)?.mul(x, t.modulus)))
            }
            _ => Err(Error::Eval {
                reason: format!("arrow {arrow} cannot be applied to this point"),
            }),
        }
    }
}

/// Verifies that every pair drawn from the two pools commutes pointwise,
/// returning the first offending pair otherwise.
pub fn check_pointwise_commuting(
    theory: &MatrixMonoidTheory,
    pool_a: &[String],
    pool_b: &[String],
) -> Result<()> {
    for a in pool_a {
        for b in pool_b {
            let ma = theory.resolve(&ElemRef::Named(a.clone()))?;
            let mb = theory.resolve(&ElemRef::Named(b.clone()))?;
            if ma.mul(&mb, theory.modulus) != mb.mul(&ma, theory.modulus) {
                return Err(Error::PoolsDoNotCommute {
                    left: a.clone(),
                    right: b.clone(),
                });
            }
        }
    }
    Ok(())
}
