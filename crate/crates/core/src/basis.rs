//! Orthonormal bases of qubit value distributions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::{eps, Scalar};
use crate::term::{name, Name, PureTerm, TermDist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("empty basis")]
    Empty,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("element not a qubit")]
    NotQubit { index: usize },
    #[error("elements {i},{j} not orthogonal (⟨·,·⟩ = {value})")]
    NotOrthogonal { i: usize, j: usize, value: String },
    #[error("too many elements for {dim} qubits")]
    TooMany { dim: usize },
}

#[derive(Debug)]
struct OrthoData {
    label: Option<Name>,
    dim: usize,
    elements: Vec<TermDist>,
}

/// A validated orthonormal set of n-qubit value distributions.
#[derive(Clone, Debug)]
pub struct OrthoBasis(Arc<OrthoData>);

/// Annotation on a binder: either the abstraction basis or an orthonormal one.
#[derive(Clone, Debug)]
pub enum Basis {
    Abs,
    Ortho(OrthoBasis),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub coefficients: Vec<Scalar>,
    pub residual: f64,
}

impl Decomposition {
    pub fn is_exact(&self) -> bool {
        self.residual < eps()
    }
}

/// True iff every support element is a right-associated n-tuple of kets
/// and the norm is one.
pub fn is_qubit(v: &TermDist, n: usize) -> bool {
    !v.is_zero() && v.terms().all(|t| t.ket_bits().is_some_and(|b| b.len() == n)) && (v.norm() - 1.0).abs() < eps()
}

/// Nesting of a ket tuple, e.g. `(k(kk))`; `None` for anything else.
fn tuple_shape(t: &PureTerm) -> Option<String> {
    match t {
        PureTerm::Ket0 | PureTerm::Ket1 => Some("k".to_string()),
        PureTerm::Pair(l, r) => Some(format!("({}{})", tuple_shape(l)?, tuple_shape(r)?)),
        _ => None,
    }
}

impl OrthoBasis {
    /// Elements must be unit ket-tuple distributions sharing one pair
    /// nesting, so products of bases validate alongside flat ket strings.
    pub fn new(elements: Vec<TermDist>) -> Result<OrthoBasis, BasisError> {
        let first = elements.first().ok_or(BasisError::Empty)?;
        let shape = first
            .terms()
            .next()
            .and_then(tuple_shape)
            .ok_or(BasisError::NotQubit { index: 0 })?;
        let dim = shape.bytes().filter(|&b| b == b'k').count();
        for (index, e) in elements.iter().enumerate() {
            let mut shapes = e.terms().map(tuple_shape);
            if e.terms().any(|t| t.qubit_bits().is_some_and(|b| b.len() != dim)) {
                return Err(BasisError::DimensionMismatch);
            }
            let uniform = shapes.all(|s| s.as_deref() == Some(shape.as_str()));
            if e.is_zero() || !uniform || (e.norm() - 1.0).abs() >= eps() {
                return Err(BasisError::NotQubit { index });
            }
        }
        for i in 0..elements.len() {
            for j in i + 1..elements.len() {
                let value = elements[i].inner(&elements[j]);
                if !value.is_zero() {
                    return Err(BasisError::NotOrthogonal {
                        i,
                        j,
                        value: value.to_string(),
                    });
                }
            }
        }
        if dim < usize::BITS as usize && elements.len() > 1usize << dim {
            return Err(BasisError::TooMany { dim });
        }
        Ok(OrthoBasis(Arc::new(OrthoData {
            label: None,
            dim,
            elements,
        })))
    }

    pub fn with_label(self, label: &str) -> OrthoBasis {
        OrthoBasis(Arc::new(OrthoData {
            label: Some(name(label)),
            dim: self.0.dim,
            elements: self.0.elements.clone(),
        }))
    }

    pub fn label(&self) -> Option<&str> {
        self.0.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn elements(&self) -> &[TermDist] {
        &self.0.elements
    }

    pub fn len(&self) -> usize {
        self.0.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elements.is_empty()
    }

    /// Whether the elements span the whole 2ⁿ-dimensional space.
    pub fn is_complete(&self) -> bool {
        self.dim() < usize::BITS as usize && self.len() == 1usize << self.dim()
    }

    pub fn decompose(&self, v: &TermDist) -> Result<Decomposition, BasisError> {
        if v.terms().any(|t| t.ket_bits().is_some_and(|b| b.len() != self.dim())) {
            return Err(BasisError::DimensionMismatch);
        }
        let coefficients: Vec<Scalar> = self.elements().iter().map(|b| b.inner(v)).collect();
        let mut rest = v.clone();
        for (b, c) in self.elements().iter().zip(&coefficients) {
            rest.add_scaled(b, -*c);
        }
        Ok(Decomposition {
            coefficients,
            residual: rest.norm(),
        })
    }

    pub fn in_span(&self, v: &TermDist) -> bool {
        self.decompose(v).is_ok_and(|d| d.is_exact())
    }

    pub fn contains(&self, v: &TermDist) -> bool {
        self.elements().iter().any(|b| b == v)
    }

    pub fn position(&self, v: &TermDist) -> Option<usize> {
        self.elements().iter().position(|b| b == v)
    }

    /// Same element set, ignoring order.
    pub fn same_set(&self, other: &OrthoBasis) -> bool {
        self.len() == other.len() && self.elements().iter().all(|e| other.contains(e))
    }

    /// Pairs `(bᵢ, cⱼ)` in lexicographic order of `(i, j)`.
    pub fn product(&self, other: &OrthoBasis) -> OrthoBasis {
        let elements = self
            .elements()
            .iter()
            .flat_map(|b| other.elements().iter().map(move |c| TermDist::pair(b, c)))
            .collect();
        OrthoBasis(Arc::new(OrthoData {
            label: None,
            dim: self.dim() + other.dim(),
            elements,
        }))
    }

    /// Recomposes `Σ cᵢ bᵢ`.
    pub fn recompose(&self, coefficients: &[Scalar]) -> TermDist {
        let mut out = TermDist::zero();
        for (b, c) in self.elements().iter().zip(coefficients) {
            out.add_scaled(b, *c);
        }
        out
    }
}

pub fn product_basis(left: &OrthoBasis, right: &OrthoBasis) -> OrthoBasis {
    left.product(right)
}

pub fn validate_basis(elements: Vec<TermDist>) -> Result<Basis, BasisError> {
    OrthoBasis::new(elements).map(Basis::Ortho)
}

impl PartialEq for OrthoBasis {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OrthoBasis {}

impl PartialOrd for OrthoBasis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrthoBasis {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.dim()
            .cmp(&other.dim())
            .then_with(|| self.elements().cmp(other.elements()))
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Basis {}

impl PartialOrd for Basis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Basis {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Basis::Abs, Basis::Abs) => Ordering::Equal,
            (Basis::Abs, Basis::Ortho(_)) => Ordering::Less,
            (Basis::Ortho(_), Basis::Abs) => Ordering::Greater,
            (Basis::Ortho(a), Basis::Ortho(b)) => a.cmp(b),
        }
    }
}

impl Basis {
    pub fn as_ortho(&self) -> Option<&OrthoBasis> {
        match self {
            Basis::Abs => None,
            Basis::Ortho(b) => Some(b),
        }
    }
}

/// `{|0>, |1>}`
pub fn computational() -> OrthoBasis {
    OrthoBasis::new(vec![TermDist::ket0(), TermDist::ket1()])
        .expect("computational basis")
        .with_label("B")
}

/// `{|+>, |->}`
pub fn diagonal() -> OrthoBasis {
    OrthoBasis::new(vec![TermDist::plus(), TermDist::minus()])
        .expect("diagonal basis")
        .with_label("X")
}

pub fn phi_plus() -> TermDist {
    bell_state(false, false)
}

pub fn phi_minus() -> TermDist {
    bell_state(false, true)
}

pub fn psi_plus() -> TermDist {
    bell_state(true, false)
}

pub fn psi_minus() -> TermDist {
    bell_state(true, true)
}

fn bell_state(flip: bool, negate: bool) -> TermDist {
    let a = TermDist::ket(&[false, flip]);
    let b = TermDist::ket(&[true, !flip]);
    let sum = if negate { a.sub(&b) } else { a.add(&b) };
    sum.scale(Scalar::inv_sqrt2())
}

/// `{Φ+, Φ-, Ψ+, Ψ-}`
pub fn bell() -> OrthoBasis {
    OrthoBasis::new(vec![phi_plus(), phi_minus(), psi_plus(), psi_minus()])
        .expect("Bell basis")
        .with_label("Bell")
}

/// Named bases visible to the parser.
#[derive(Clone, Debug)]
pub struct BasisEnv {
    bases: BTreeMap<String, OrthoBasis>,
}

impl Default for BasisEnv {
    fn default() -> Self {
        let mut bases = BTreeMap::new();
        for b in [computational(), diagonal(), bell()] {
            bases.insert(b.label().unwrap().to_string(), b);
        }
        BasisEnv { bases }
    }
}

impl BasisEnv {
    pub fn get(&self, label: &str) -> Option<&OrthoBasis> {
        self.bases.get(label)
    }

    pub fn insert(&mut self, label: &str, basis: OrthoBasis) {
        self.bases.insert(label.to_string(), basis.with_label(label));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &OrthoBasis)> {
        self.bases.iter().map(|(k, v)| (k.as_str(), v))
    }
}
