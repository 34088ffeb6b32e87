//! Basis-dependent substitution.
//!
//! A value is first expanded into weighted pieces according to the
//! annotation basis: projections onto basis elements for an orthonormal
//! basis, pure values for the abstraction basis. Each piece is then
//! substituted by plain substitution and the results recombined linearly.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::basis::{Basis, BasisError, OrthoBasis};
use crate::scalar::Scalar;
use crate::term::{name, Name, PureTerm, TermDist, ValueDist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstError {
    #[error("undefined: value not in span of annotation basis")]
    NotInSpan,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("not a pair distribution")]
    NotPairs,
    #[error("not in span of B1⊗B2")]
    NotInProductSpan,
    #[error("substituted value is not a closed value distribution")]
    NotClosedValue,
}

/// Weighted pieces of a value with respect to one annotation.
pub fn expand(v: &ValueDist, basis: &Basis) -> Result<Vec<(TermDist, Scalar)>, SubstError> {
    match basis {
        Basis::Abs => Ok(v.iter().map(|(t, c)| (TermDist::pure(t.clone()), *c)).collect()),
        Basis::Ortho(b) => project(v, b, SubstError::NotInSpan),
    }
}

fn project(v: &ValueDist, basis: &OrthoBasis, not_in_span: SubstError) -> Result<Vec<(TermDist, Scalar)>, SubstError> {
    let d = basis.decompose(v).map_err(|e| match e {
        BasisError::DimensionMismatch => SubstError::DimensionMismatch,
        _ => not_in_span.clone(),
    })?;
    if !d.is_exact() {
        return Err(not_in_span);
    }
    Ok(basis
        .elements()
        .iter()
        .zip(d.coefficients)
        .filter(|(_, c)| !c.is_zero())
        .map(|(b, c)| (b.clone(), c))
        .collect())
}

type PairPiece = ((TermDist, TermDist), Scalar);

/// Weighted pieces `(left, right)` of a pair distribution.
pub fn expand_tensor(v: &ValueDist, left: &Basis, right: &Basis) -> Result<Vec<PairPiece>, SubstError> {
    let mut halves = Vec::with_capacity(v.len());
    for (t, c) in v.iter() {
        match t {
            PureTerm::Pair(l, r) => halves.push(((**l).clone(), (**r).clone(), *c)),
            _ => return Err(SubstError::NotPairs),
        }
    }
    match (left, right) {
        (Basis::Ortho(b1), Basis::Ortho(b2)) => {
            let product = b1.product(b2);
            let d = product.decompose(v).map_err(|e| match e {
                BasisError::DimensionMismatch => SubstError::DimensionMismatch,
                _ => SubstError::NotInProductSpan,
            })?;
            if !d.is_exact() {
                return Err(SubstError::NotInProductSpan);
            }
            let mut out = Vec::new();
            for (k, c) in d.coefficients.into_iter().enumerate() {
                if !c.is_zero() {
                    let (i, j) = (k / b2.len(), k % b2.len());
                    out.push(((b1.elements()[i].clone(), b2.elements()[j].clone()), c));
                }
            }
            Ok(out)
        }
        (Basis::Abs, Basis::Abs) => Ok(halves
            .into_iter()
            .map(|(l, r, c)| ((TermDist::pure(l), TermDist::pure(r)), c))
            .collect()),
        (Basis::Abs, Basis::Ortho(b2)) => {
            let mut groups: BTreeMap<PureTerm, TermDist> = BTreeMap::new();
            for (l, r, c) in halves {
                groups.entry(l).or_default().add_term(r, c);
            }
            let mut out = Vec::new();
            for (l, rs) in groups {
                for (piece, c) in project(&rs, b2, SubstError::NotInProductSpan)? {
                    out.push(((TermDist::pure(l.clone()), piece), c));
                }
            }
            Ok(out)
        }
        (Basis::Ortho(b1), Basis::Abs) => {
            let mut groups: BTreeMap<PureTerm, TermDist> = BTreeMap::new();
            for (l, r, c) in halves {
                groups.entry(r).or_default().add_term(l, c);
            }
            let mut out = Vec::new();
            for (r, ls) in groups {
                for (piece, c) in project(&ls, b1, SubstError::NotInProductSpan)? {
                    out.push(((piece, TermDist::pure(r.clone())), c));
                }
            }
            Ok(out)
        }
    }
}

fn check_closed_value(v: &ValueDist) -> Result<(), SubstError> {
    if v.is_value() && v.is_closed() {
        Ok(())
    } else {
        Err(SubstError::NotClosedValue)
    }
}

/// `t⟨⟨v/x⟩⟩_B`
pub fn subst_basis(t: &TermDist, x: &str, v: &ValueDist, basis: &Basis) -> Result<TermDist, SubstError> {
    check_closed_value(v)?;
    let x = name(x);
    let mut out = TermDist::zero();
    for (piece, c) in expand(v, basis)? {
        out.add_scaled(&t.substitute(&[(x.clone(), &piece)]), c);
    }
    Ok(out)
}

/// `t⟨⟨v/x⊗y⟩⟩_{B1⊗B2}`
pub fn subst_tensor(
    t: &TermDist,
    x: &str,
    y: &str,
    v: &ValueDist,
    left: &Basis,
    right: &Basis,
) -> Result<TermDist, SubstError> {
    check_closed_value(v)?;
    let (x, y) = (name(x), name(y));
    let mut out = TermDist::zero();
    for ((a, b), c) in expand_tensor(v, left, right)? {
        out.add_scaled(&t.substitute(&[(x.clone(), &a), (y.clone(), &b)]), c);
    }
    Ok(out)
}

/// Substitution into the body of an abstraction (bound index 0).
pub(crate) fn subst_bound(body: &TermDist, v: &ValueDist, basis: &Basis) -> Result<TermDist, SubstError> {
    let mut out = TermDist::zero();
    for (piece, c) in expand(v, basis)? {
        out.add_scaled(&body.instantiate(&[(0, &piece)]), c);
    }
    Ok(out)
}

/// Substitution into the body of a `let` (bound indices 1 and 0).
pub(crate) fn subst_bound_tensor(
    body: &TermDist,
    v: &ValueDist,
    left: &Basis,
    right: &Basis,
) -> Result<TermDist, SubstError> {
    let mut out = TermDist::zero();
    for ((a, b), c) in expand_tensor(v, left, right)? {
        out.add_scaled(&body.instantiate(&[(1, &a), (0, &b)]), c);
    }
    Ok(out)
}

/// A finite set of basis-dependent substitutions of closed values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution {
    bindings: BTreeMap<Name, (ValueDist, Basis)>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn bind(mut self, x: &str, v: ValueDist, basis: Basis) -> Substitution {
        self.insert(x, v, basis);
        self
    }

    pub fn insert(&mut self, x: &str, v: ValueDist, basis: Basis) {
        self.bindings.insert(name(x), (v, basis));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &(ValueDist, Basis))> {
        self.bindings.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

pub fn apply_sigma(t: &TermDist, sigma: &Substitution) -> Result<TermDist, SubstError> {
    sigma
        .iter()
        .try_fold(t.clone(), |acc, (x, (v, b))| subst_basis(&acc, x, v, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{computational, diagonal, phi_plus};

    fn b() -> Basis {
        Basis::Ortho(computational())
    }

    fn x() -> Basis {
        Basis::Ortho(diagonal())
    }

    #[test]
    fn variable_over_computational() {
        let r = subst_basis(&TermDist::var("x"), "x", &TermDist::plus(), &b()).unwrap();
        assert_eq!(r, TermDist::plus());
    }

    #[test]
    fn substitution_does_not_commute_with_abstraction() {
        let t = TermDist::lam("x", b(), &TermDist::var("y"));
        let over_x = subst_basis(&t, "y", &TermDist::plus(), &x()).unwrap();
        assert_eq!(over_x, TermDist::lam("x", b(), &TermDist::plus()));
        let over_b = subst_basis(&t, "y", &TermDist::plus(), &b()).unwrap();
        let expected = TermDist::lam("x", b(), &TermDist::ket0())
            .add(&TermDist::lam("x", b(), &TermDist::ket1()))
            .scale(Scalar::inv_sqrt2());
        assert_eq!(over_b, expected);
        assert_ne!(over_x, over_b);
    }

    #[test]
    fn abstractions_are_not_in_orthonormal_spans() {
        let f = TermDist::lam("z", Basis::Abs, &TermDist::var("z"));
        assert_eq!(
            subst_basis(&TermDist::var("x"), "x", &f, &x()),
            Err(SubstError::NotInSpan)
        );
        assert_eq!(subst_basis(&TermDist::var("x"), "x", &f, &Basis::Abs).unwrap(), f);
    }

    #[test]
    fn swap_through_tensor_substitution() {
        let (a, bb) = (Scalar::new(0.6, 0.0), Scalar::new(0.0, 0.8));
        let v = TermDist::ket(&[false, true])
            .scale(a)
            .add(&TermDist::ket(&[true, false]).scale(bb));
        let t = TermDist::pair(&TermDist::var("y"), &TermDist::var("x"));
        let r = subst_tensor(&t, "x", "y", &v, &b(), &b()).unwrap();
        let expected = TermDist::ket(&[true, false])
            .scale(a)
            .add(&TermDist::ket(&[false, true]).scale(bb));
        assert_eq!(r, expected);
    }

    #[test]
    fn bell_state_is_recomposed() {
        let t = TermDist::pair(&TermDist::var("x"), &TermDist::var("y"));
        assert_eq!(subst_tensor(&t, "x", "y", &phi_plus(), &b(), &b()).unwrap(), phi_plus());
        assert_eq!(
            subst_tensor(&t, "x", "y", &phi_plus(), &Basis::Abs, &x()).unwrap(),
            phi_plus()
        );
    }

    #[test]
    fn tensor_substitution_rejects_non_pairs() {
        let t = TermDist::var("x");
        assert_eq!(
            subst_tensor(&t, "x", "y", &TermDist::ket0(), &b(), &b()),
            Err(SubstError::NotPairs)
        );
    }

    #[test]
    fn sigma_is_order_independent() {
        let t = TermDist::pair(&TermDist::var("x"), &TermDist::var("y"));
        let s1 = Substitution::new()
            .bind("x", TermDist::ket0(), b())
            .bind("y", TermDist::plus(), x());
        let r = apply_sigma(&t, &s1).unwrap();
        assert_eq!(r, TermDist::pair(&TermDist::ket0(), &TermDist::plus()));
        let s2 = Substitution::new()
            .bind("y", TermDist::plus(), x())
            .bind("x", TermDist::ket0(), b());
        assert_eq!(apply_sigma(&t, &s2).unwrap(), r);
        let single = Substitution::new().bind("x", TermDist::ket0(), b());
        assert_eq!(apply_sigma(&TermDist::var("x"), &single).unwrap(), TermDist::ket0());
    }

    #[test]
    fn wrong_width_reports_dimension_mismatch() {
        let r = subst_basis(&TermDist::var("x"), "x", &phi_plus(), &b());
        assert_eq!(r, Err(SubstError::DimensionMismatch));
    }
}
