//! Types and their unitary semantics: membership, realizers and subtyping.

use thiserror::Error;

use crate::basis::OrthoBasis;
use crate::eval::{eval, EvalError, DEFAULT_FUEL};
use crate::scalar::{eps, Scalar};
use crate::subst::subst_bound;
use crate::term::{PureTerm, TermDist};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Type {
    Basis(OrthoBasis),
    Arrow(Box<Type>, Box<Type>),
    Product(Box<Type>, Box<Type>),
    Sharp(Box<Type>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("membership undecidable for this domain")]
    Undecidable,
    #[error("subtyping not decided for this pair")]
    SubtypeUndecided,
    #[error("type has no finite generating set")]
    NoFiniteGenerators,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Three-valued answer of the subtyping procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Undecided,
}

/// Finite description of the semantics of a type, when one exists.
#[derive(Clone, Debug, PartialEq)]
pub enum SemSet {
    Elements(Vec<TermDist>),
    /// Unit vectors in the span of an orthonormal generating set.
    Span {
        generators: Vec<TermDist>,
        dim: usize,
    },
}

impl Type {
    pub fn basis(b: OrthoBasis) -> Type {
        Type::Basis(b)
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn product(a: Type, b: Type) -> Type {
        Type::Product(Box::new(a), Box::new(b))
    }

    pub fn sharp(a: Type) -> Type {
        Type::Sharp(Box::new(a))
    }

    /// Collapses nested ♯ everywhere.
    pub fn sharp_normalize(&self) -> Type {
        match self {
            Type::Basis(_) => self.clone(),
            Type::Arrow(a, b) => Type::arrow(a.sharp_normalize(), b.sharp_normalize()),
            Type::Product(a, b) => Type::product(a.sharp_normalize(), b.sharp_normalize()),
            Type::Sharp(a) => match a.sharp_normalize() {
                s @ Type::Sharp(_) => s,
                inner => Type::sharp(inner),
            },
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self.sharp_normalize(), Type::Sharp(_))
    }

    /// Basis types and products of them: the types with finite semantics.
    pub fn is_finite(&self) -> bool {
        match self {
            Type::Basis(_) => true,
            Type::Product(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }

    /// Enumerates the semantics of a finite type.
    pub fn elements(&self) -> Option<Vec<TermDist>> {
        match self {
            Type::Basis(b) => Some(b.elements().to_vec()),
            Type::Product(a, b) => {
                let (xs, ys) = (a.elements()?, b.elements()?);
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| TermDist::pair(x, y)))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// An orthonormal set whose unit span contains the semantics.
    pub fn generators(&self) -> Option<Vec<TermDist>> {
        match self {
            Type::Basis(b) => Some(b.elements().to_vec()),
            Type::Product(a, b) => {
                let (xs, ys) = (a.generators()?, b.generators()?);
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| TermDist::pair(x, y)))
                        .collect(),
                )
            }
            Type::Sharp(a) => a.generators(),
            Type::Arrow(..) => None,
        }
    }

    /// Qubit width of the values of this type, if it is first order.
    pub fn width(&self) -> Option<usize> {
        match self {
            Type::Basis(b) => Some(b.dim()),
            Type::Product(a, b) => Some(a.width()? + b.width()?),
            Type::Sharp(a) => a.width(),
            Type::Arrow(..) => None,
        }
    }

    pub fn semantics(&self) -> Option<SemSet> {
        if let Some(elements) = self.elements() {
            return Some(SemSet::Elements(elements));
        }
        match self.sharp_normalize() {
            Type::Sharp(a) => Some(SemSet::Span {
                generators: a.generators()?,
                dim: a.width()?,
            }),
            _ => None,
        }
    }

    /// Basis types and products of basis types, the duplicable ones.
    pub fn is_basis_like(&self) -> bool {
        self.is_finite()
    }
}

fn unit_norm(v: &TermDist) -> bool {
    (v.norm() - 1.0).abs() < eps()
}

fn in_unit_span(v: &TermDist, generators: &[TermDist]) -> bool {
    if !unit_norm(v) {
        return false;
    }
    let mut rest = v.clone();
    for g in generators {
        rest.add_scaled(g, -g.inner(v));
    }
    rest.norm() < eps()
}

fn orthonormal(vs: &[TermDist]) -> bool {
    vs.iter()
        .enumerate()
        .all(|(i, v)| unit_norm(v) && vs[i + 1..].iter().all(|w| v.inner(w).is_zero()))
}

/// Strict membership `v ∈ ⟦A⟧`.
pub fn is_member(v: &TermDist, ty: &Type) -> Result<bool, TypeError> {
    match ty.elements() {
        Some(elements) => Ok(elements.iter().any(|e| e == v)),
        // Every non-finite type is closed under global phase.
        None => is_member_up_to_phase(v, ty),
    }
}

/// Membership of `v` in `⟦A⟧` up to a global phase.
pub fn is_member_up_to_phase(v: &TermDist, ty: &Type) -> Result<bool, TypeError> {
    if !unit_norm(v) {
        return Ok(false);
    }
    match ty {
        Type::Basis(b) => Ok(b.elements().iter().any(|e| e.eq_up_to_phase(v))),
        Type::Sharp(a) => match a.generators() {
            Some(gens) => Ok(in_unit_span(v, &gens)),
            None => Err(TypeError::Undecidable),
        },
        Type::Product(a, b) => match v.factor_pair() {
            None => Ok(false),
            Some((l, r)) => Ok(is_member_up_to_phase(&l, a)? && is_member_up_to_phase(&r, b)?),
        },
        Type::Arrow(a, b) => arrow_member(v, a, b),
    }
}

/// Common annotation and combined body of a distribution of abstractions.
fn combined_abstraction(v: &TermDist) -> Option<(crate::basis::Basis, TermDist)> {
    let mut basis = None;
    let mut body = TermDist::zero();
    for (t, c) in v.iter() {
        let PureTerm::Lam(lam) = t else { return None };
        match &basis {
            None => basis = Some(lam.basis.clone()),
            Some(b) if *b != lam.basis => return None,
            _ => {}
        }
        body.add_scaled(&lam.body, *c);
    }
    Some((basis?, body))
}

/// Image of a combined abstraction on an argument, if defined and normalizing.
fn image(basis: &crate::basis::Basis, body: &TermDist, arg: &TermDist) -> Result<Option<TermDist>, TypeError> {
    let Ok(instance) = subst_bound(body, arg, basis) else {
        return Ok(None);
    };
    match eval(&instance, DEFAULT_FUEL).normal_form() {
        Ok(v) => Ok(Some(v.clone())),
        Err(EvalError::Stuck { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn arrow_member(v: &TermDist, dom: &Type, cod: &Type) -> Result<bool, TypeError> {
    let Some((basis, body)) = combined_abstraction(v) else {
        return Ok(false);
    };
    if let Some(elements) = dom.elements() {
        for w in &elements {
            match image(&basis, &body, w)? {
                Some(img) if is_member_up_to_phase(&img, cod)? => {}
                _ => return Ok(false),
            }
        }
        return Ok(true);
    }
    match dom.sharp_normalize() {
        Type::Sharp(inner) => {
            let gens = inner.generators().ok_or(TypeError::Undecidable)?;
            let mut images = Vec::with_capacity(gens.len());
            for g in &gens {
                match image(&basis, &body, g)? {
                    Some(img) => images.push(img),
                    None => return Ok(false),
                }
            }
            span_within(&images, cod)
        }
        _ => Err(TypeError::Undecidable),
    }
}

/// Whether every unit combination of `images` (as coefficients range over
/// the unit sphere) is a realizer of `ty`.
pub fn span_within(images: &[TermDist], ty: &Type) -> Result<bool, TypeError> {
    match images {
        [] => Ok(true),
        [single] => is_member_up_to_phase(single, ty),
        _ => {
            if !orthonormal(images) {
                return Ok(false);
            }
            match ty {
                Type::Basis(_) => Ok(false),
                Type::Sharp(inner) => match inner.generators() {
                    Some(gens) => Ok(images.iter().all(|i| in_unit_span(i, &gens))),
                    None => Err(TypeError::Undecidable),
                },
                Type::Product(a, b) => {
                    if let Some(rest) = common_left_factor(images, a)? {
                        return span_within(&rest, b);
                    }
                    let swapped: Option<Vec<_>> = images.iter().map(TermDist::swap_pairs).collect();
                    if let Some(swapped) = swapped {
                        if let Some(rest) = common_left_factor(&swapped, b)? {
                            return span_within(&rest, a);
                        }
                    }
                    Ok(false)
                }
                Type::Arrow(..) => Err(TypeError::Undecidable),
            }
        }
    }
}

/// If every image is `(p·a, bᵢ)` for one `a ∈ A` up to phase, returns the
/// right components with the phases folded in.
fn common_left_factor(images: &[TermDist], left: &Type) -> Result<Option<Vec<TermDist>>, TypeError> {
    let mut anchor: Option<TermDist> = None;
    let mut rights = Vec::with_capacity(images.len());
    for img in images {
        let Some((l, r)) = img.swap_pairs().and_then(|s| s.factor_pair()) else {
            return Ok(None);
        };
        // After swapping, `r` is the normalized left component of the
        // original pair and `l` carries its scale and phase.
        match &anchor {
            None => anchor = Some(r),
            Some(a) if *a != r => return Ok(None),
            _ => {}
        }
        rights.push(l);
    }
    match anchor {
        Some(a) if is_member_up_to_phase(&a, left)? => Ok(Some(rights)),
        _ => Ok(None),
    }
}

/// Evaluates `t` and tests the normal form against `ty` up to phase.
pub fn realizes(t: &TermDist, ty: &Type) -> Result<bool, TypeError> {
    let trace = eval(t, DEFAULT_FUEL);
    let v = trace.normal_form()?;
    is_member_up_to_phase(v, ty)
}

fn span_contains_all(vs: &[TermDist], gens: &[TermDist]) -> bool {
    vs.iter().all(|v| in_unit_span(v, gens))
}

fn same_type(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Basis(x), Type::Basis(y)) => x.same_set(y),
        (Type::Arrow(a1, a2), Type::Arrow(b1, b2)) | (Type::Product(a1, a2), Type::Product(b1, b2)) => {
            same_type(a1, b1) && same_type(a2, b2)
        }
        (Type::Sharp(x), Type::Sharp(y)) => same_type(x, y),
        _ => false,
    }
}

/// Sound, incomplete decision of `⟦A⟧ ⊆ ⟦B⟧`.
pub fn subtype(a: &Type, b: &Type) -> Tri {
    let (a, b) = (a.sharp_normalize(), b.sharp_normalize());
    if same_type(&a, &b) {
        return Tri::Yes;
    }
    if let (Some(xs), Some(ys)) = (a.elements(), b.elements()) {
        return if xs.iter().all(|x| ys.contains(x)) {
            Tri::Yes
        } else {
            Tri::No
        };
    }
    match (&a, &b) {
        (_, Type::Sharp(c)) => {
            if let (Some(ga), Some(gc)) = (a.generators(), c.generators()) {
                return if span_contains_all(&ga, &gc) { Tri::Yes } else { Tri::No };
            }
            if subtype(&a, c) == Tri::Yes {
                Tri::Yes
            } else {
                Tri::Undecided
            }
        }
        (Type::Sharp(_), _) if b.is_finite() => Tri::No,
        (Type::Sharp(inner), Type::Product(..)) => match inner.generators() {
            Some(gens) if gens.len() == 1 => match is_member_up_to_phase(&gens[0], &b) {
                Ok(true) => Tri::Yes,
                Ok(false) => Tri::No,
                Err(_) => Tri::Undecided,
            },
            _ => Tri::Undecided,
        },
        (Type::Product(a1, a2), Type::Product(b1, b2)) => {
            if subtype(a1, b1) == Tri::Yes && subtype(a2, b2) == Tri::Yes {
                Tri::Yes
            } else if a.is_finite() {
                finite_into(&a, &b)
            } else {
                Tri::Undecided
            }
        }
        (Type::Arrow(a1, a2), Type::Arrow(b1, b2)) => {
            if subtype(b1, a1) == Tri::Yes && subtype(a2, b2) == Tri::Yes {
                Tri::Yes
            } else {
                Tri::Undecided
            }
        }
        _ if a.is_finite() => finite_into(&a, &b),
        _ => Tri::Undecided,
    }
}

fn finite_into(a: &Type, b: &Type) -> Tri {
    let Some(xs) = a.elements() else { return Tri::Undecided };
    let mut all = true;
    for x in &xs {
        match is_member(x, b) {
            Ok(true) => {}
            Ok(false) => all = false,
            Err(_) => return Tri::Undecided,
        }
    }
    if all {
        Tri::Yes
    } else {
        Tri::No
    }
}

pub fn subtype_checked(a: &Type, b: &Type) -> Result<bool, TypeError> {
    match subtype(a, b) {
        Tri::Yes => Ok(true),
        Tri::No => Ok(false),
        Tri::Undecided => Err(TypeError::SubtypeUndecided),
    }
}

pub fn type_equiv(a: &Type, b: &Type) -> Tri {
    match (subtype(a, b), subtype(b, a)) {
        (Tri::Yes, Tri::Yes) => Tri::Yes,
        (Tri::No, _) | (_, Tri::No) => Tri::No,
        _ => Tri::Undecided,
    }
}

/// `v` is a unit vector orthogonal to every generator.
pub fn in_orthogonal_complement(v: &TermDist, generators: &[TermDist]) -> bool {
    unit_norm(v) && generators.iter().all(|g| g.inner(v).is_zero())
}

pub fn orthogonal_complement_membership(v: &TermDist, ty: &Type) -> Result<bool, TypeError> {
    let gens = ty.generators().ok_or(TypeError::NoFiniteGenerators)?;
    Ok(in_orthogonal_complement(v, &gens))
}

/// Scales `v` by `e^{iθ}`.
pub fn with_phase(v: &TermDist, theta: f64) -> TermDist {
    v.scale(Scalar::phase(theta))
}
