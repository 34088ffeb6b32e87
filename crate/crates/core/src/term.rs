//! Pure terms, canonical term distributions and the raw expression tree.
//!
//! Binders are stored locally nameless: a variable bound by an enclosing
//! abstraction or `let` is a de Bruijn index, free variables keep their
//! names. Alpha-equivalent terms are therefore structurally identical and
//! compare equal. Binders keep the source name as a printing hint.
//!
//! A [`TermDist`] is kept in canonical form at all times. Sums are
//! flattened and merged, zero coefficients dropped, applications and pairs
//! expanded bilinearly, `let` and `case` expanded linearly in their
//! scrutinee. Bodies of abstractions, `let` bodies and `case` branches are
//! canonical on their own but never lifted out.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::basis::{Basis, OrthoBasis};
use crate::scalar::{eps, Scalar};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermError {
    #[error("null vector has no phase")]
    NullVector,
}

#[derive(Clone, Debug)]
pub enum VarRef {
    /// De Bruijn index counted from the innermost binder. A `let` binds two
    /// indices: the second component is 0, the first is 1.
    Bound(u32),
    Free(Name),
}

#[derive(Clone, Debug)]
pub enum PureTerm {
    Ket0,
    Ket1,
    Var(VarRef),
    Pair(Box<PureTerm>, Box<PureTerm>),
    Lam(Box<Lambda>),
    App(Box<PureTerm>, Box<PureTerm>),
    LetPair(Box<LetPair>),
    Case(Box<CaseTerm>),
}

#[derive(Clone, Debug)]
pub struct Lambda {
    pub hint: Name,
    pub basis: Basis,
    pub body: TermDist,
}

#[derive(Clone, Debug)]
pub struct LetPair {
    pub hints: (Name, Name),
    pub bases: (Basis, Basis),
    pub scrutinee: PureTerm,
    pub body: TermDist,
}

#[derive(Clone, Debug)]
pub struct CaseTerm {
    pub scrutinee: PureTerm,
    pub patterns: OrthoBasis,
    pub branches: Vec<TermDist>,
}

impl VarRef {
    fn cmp_ref(&self, other: &VarRef) -> Ordering {
        match (self, other) {
            (VarRef::Bound(a), VarRef::Bound(b)) => a.cmp(b),
            (VarRef::Bound(_), VarRef::Free(_)) => Ordering::Less,
            (VarRef::Free(_), VarRef::Bound(_)) => Ordering::Greater,
            (VarRef::Free(a), VarRef::Free(b)) => a.cmp(b),
        }
    }
}

impl PureTerm {
    fn tag(&self) -> u8 {
        match self {
            PureTerm::Ket0 => 0,
            PureTerm::Ket1 => 1,
            PureTerm::Var(_) => 2,
            PureTerm::Pair(..) => 3,
            PureTerm::Lam(_) => 4,
            PureTerm::App(..) => 5,
            PureTerm::LetPair(_) => 6,
            PureTerm::Case(_) => 7,
        }
    }

    pub fn free(name: Name) -> PureTerm {
        PureTerm::Var(VarRef::Free(name))
    }

    pub fn is_value(&self) -> bool {
        match self {
            PureTerm::Ket0 | PureTerm::Ket1 | PureTerm::Var(_) | PureTerm::Lam(_) => true,
            PureTerm::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    /// Builds the right-associated tuple of kets for a bit string.
    pub fn ket_string(bits: &[bool]) -> PureTerm {
        assert!(!bits.is_empty(), "empty ket string");
        let ket = |b: bool| if b { PureTerm::Ket1 } else { PureTerm::Ket0 };
        let mut iter = bits.iter().rev();
        let mut acc = ket(*iter.next().unwrap());
        for &b in iter {
            acc = PureTerm::Pair(Box::new(ket(b)), Box::new(acc));
        }
        acc
    }

    /// Bits of a right-associated ket tuple, if this term is one.
    pub fn ket_bits(&self) -> Option<Vec<bool>> {
        let mut bits = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                PureTerm::Ket0 => {
                    bits.push(false);
                    return Some(bits);
                }
                PureTerm::Ket1 => {
                    bits.push(true);
                    return Some(bits);
                }
                PureTerm::Pair(head, tail) => {
                    bits.push(match **head {
                        PureTerm::Ket0 => false,
                        PureTerm::Ket1 => true,
                        _ => return None,
                    });
                    cur = tail;
                }
                _ => return None,
            }
        }
    }

    /// Bits of a ket tuple under any pair nesting, read left to right.
    pub fn qubit_bits(&self) -> Option<Vec<bool>> {
        fn go(t: &PureTerm, out: &mut Vec<bool>) -> Option<()> {
            match t {
                PureTerm::Ket0 => out.push(false),
                PureTerm::Ket1 => out.push(true),
                PureTerm::Pair(l, r) => {
                    go(l, out)?;
                    go(r, out)?;
                }
                _ => return None,
            }
            Some(())
        }
        let mut bits = Vec::new();
        go(self, &mut bits)?;
        Some(bits)
    }

    /// True when no abstraction occurs anywhere inside.
    pub fn is_first_order(&self) -> bool {
        match self {
            PureTerm::Ket0 | PureTerm::Ket1 | PureTerm::Var(_) => true,
            PureTerm::Pair(a, b) | PureTerm::App(a, b) => a.is_first_order() && b.is_first_order(),
            PureTerm::Lam(_) => false,
            PureTerm::LetPair(l) => l.scrutinee.is_first_order() && l.body.is_first_order(),
            PureTerm::Case(c) => c.scrutinee.is_first_order() && c.branches.iter().all(TermDist::is_first_order),
        }
    }

    fn collect_free(&self, depth: u32, out: &mut BTreeSet<Name>) {
        let _ = depth;
        match self {
            PureTerm::Ket0 | PureTerm::Ket1 => {}
            PureTerm::Var(VarRef::Free(n)) => {
                out.insert(n.clone());
            }
            PureTerm::Var(VarRef::Bound(_)) => {}
            PureTerm::Pair(a, b) | PureTerm::App(a, b) => {
                a.collect_free(depth, out);
                b.collect_free(depth, out);
            }
            PureTerm::Lam(l) => l.body.collect_free(depth + 1, out),
            PureTerm::LetPair(l) => {
                l.scrutinee.collect_free(depth, out);
                l.body.collect_free(depth + 2, out);
            }
            PureTerm::Case(c) => {
                c.scrutinee.collect_free(depth, out);
                for b in &c.branches {
                    b.collect_free(depth, out);
                }
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(0, &mut out);
        out
    }

    /// Rebuilds this term with every variable passed through `f`.
    fn map_vars(&self, depth: u32, f: &dyn Fn(&VarRef, u32) -> Option<TermDist>) -> TermDist {
        match self {
            PureTerm::Ket0 | PureTerm::Ket1 => TermDist::pure(self.clone()),
            PureTerm::Var(v) => f(v, depth).unwrap_or_else(|| TermDist::pure(self.clone())),
            PureTerm::Pair(a, b) => TermDist::pair(&a.map_vars(depth, f), &b.map_vars(depth, f)),
            PureTerm::App(a, b) => TermDist::app(&a.map_vars(depth, f), &b.map_vars(depth, f)),
            PureTerm::Lam(l) => TermDist::pure(PureTerm::Lam(Box::new(Lambda {
                hint: l.hint.clone(),
                basis: l.basis.clone(),
                body: l.body.map_vars(depth + 1, f),
            }))),
            PureTerm::LetPair(l) => {
                let scrutinee = l.scrutinee.map_vars(depth, f);
                let body = l.body.map_vars(depth + 2, f);
                TermDist::let_raw(l.hints.clone(), l.bases.clone(), &scrutinee, body)
            }
            PureTerm::Case(c) => {
                let scrutinee = c.scrutinee.map_vars(depth, f);
                let branches = c.branches.iter().map(|b| b.map_vars(depth, f)).collect();
                TermDist::case(&scrutinee, c.patterns.clone(), branches)
            }
        }
    }
}

pub(crate) fn cmp_pure(a: &PureTerm, b: &PureTerm) -> Ordering {
    let tags = a.tag().cmp(&b.tag());
    if tags != Ordering::Equal {
        return tags;
    }
    match (a, b) {
        (PureTerm::Ket0, PureTerm::Ket0) | (PureTerm::Ket1, PureTerm::Ket1) => Ordering::Equal,
        (PureTerm::Var(x), PureTerm::Var(y)) => x.cmp_ref(y),
        (PureTerm::Pair(a1, a2), PureTerm::Pair(b1, b2)) | (PureTerm::App(a1, a2), PureTerm::App(b1, b2)) => {
            cmp_pure(a1, b1).then_with(|| cmp_pure(a2, b2))
        }
        (PureTerm::Lam(x), PureTerm::Lam(y)) => x.basis.cmp(&y.basis).then_with(|| x.body.cmp(&y.body)),
        (PureTerm::LetPair(x), PureTerm::LetPair(y)) => x
            .bases
            .0
            .cmp(&y.bases.0)
            .then_with(|| x.bases.1.cmp(&y.bases.1))
            .then_with(|| cmp_pure(&x.scrutinee, &y.scrutinee))
            .then_with(|| x.body.cmp(&y.body)),
        (PureTerm::Case(x), PureTerm::Case(y)) => cmp_pure(&x.scrutinee, &y.scrutinee)
            .then_with(|| x.patterns.cmp(&y.patterns))
            .then_with(|| x.branches.cmp(&y.branches)),
        _ => unreachable!("tags already compared"),
    }
}

impl PartialEq for PureTerm {
    fn eq(&self, other: &Self) -> bool {
        cmp_pure(self, other) == Ordering::Equal
    }
}

impl Eq for PureTerm {}

impl PartialOrd for PureTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PureTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_pure(self, other)
    }
}

/// A finite linear combination of pure terms in canonical form.
#[derive(Clone, Debug, Default)]
pub struct TermDist {
    terms: BTreeMap<PureTerm, Scalar>,
}

/// A term distribution whose support consists of values only.
pub type ValueDist = TermDist;

impl PartialEq for TermDist {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TermDist {}

impl PartialOrd for TermDist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TermDist {
    fn cmp(&self, other: &Self) -> Ordering {
        for ((ka, ca), (kb, cb)) in self.terms.iter().zip(other.terms.iter()) {
            let ord = cmp_pure(ka, kb).then_with(|| ca.tolerant_cmp(*cb));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl TermDist {
    pub fn zero() -> TermDist {
        TermDist::default()
    }

    pub fn pure(term: PureTerm) -> TermDist {
        TermDist::scaled(term, Scalar::ONE)
    }

    pub fn scaled(term: PureTerm, coeff: Scalar) -> TermDist {
        let mut d = TermDist::zero();
        d.add_term(term, coeff);
        d
    }

    pub fn ket0() -> TermDist {
        TermDist::pure(PureTerm::Ket0)
    }

    pub fn ket1() -> TermDist {
        TermDist::pure(PureTerm::Ket1)
    }

    pub fn ket(bits: &[bool]) -> TermDist {
        TermDist::pure(PureTerm::ket_string(bits))
    }

    pub fn plus() -> TermDist {
        TermDist::ket0().add(&TermDist::ket1()).scale(Scalar::inv_sqrt2())
    }

    pub fn minus() -> TermDist {
        TermDist::ket0().sub(&TermDist::ket1()).scale(Scalar::inv_sqrt2())
    }

    pub fn var(n: &str) -> TermDist {
        TermDist::pure(PureTerm::free(name(n)))
    }

    /// Adds `coeff * term`, merging with an existing entry and dropping zeros.
    pub fn add_term(&mut self, term: PureTerm, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&term) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&term);
                }
            }
            None => {
                self.terms.insert(term, coeff);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &TermDist, coeff: Scalar) {
        for (t, c) in other.iter() {
            self.add_term(t.clone(), *c * coeff);
        }
    }

    pub fn add(&self, other: &TermDist) -> TermDist {
        let mut out = self.clone();
        out.add_scaled(other, Scalar::ONE);
        out
    }

    pub fn sub(&self, other: &TermDist) -> TermDist {
        let mut out = self.clone();
        out.add_scaled(other, -Scalar::ONE);
        out
    }

    pub fn scale(&self, coeff: Scalar) -> TermDist {
        let mut out = TermDist::zero();
        out.add_scaled(self, coeff);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureTerm, &Scalar)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> impl Iterator<Item = &PureTerm> {
        self.terms.keys()
    }

    pub fn coeff(&self, term: &PureTerm) -> Scalar {
        self.terms.get(term).copied().unwrap_or(Scalar::ZERO)
    }

    /// Number of summands. The empty distribution is `is_zero`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single pure term with coefficient one, if that is all there is.
    pub fn as_pure(&self) -> Option<&PureTerm> {
        match self.terms.iter().next() {
            Some((t, c)) if self.terms.len() == 1 && c.approx_eq(Scalar::ONE) => Some(t),
            _ => None,
        }
    }

    pub fn single(&self) -> Option<(&PureTerm, Scalar)> {
        match self.terms.iter().next() {
            Some((t, c)) if self.terms.len() == 1 => Some((t, *c)),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        self.terms.keys().all(PureTerm::is_value)
    }

    pub fn is_first_order(&self) -> bool {
        self.terms.keys().all(PureTerm::is_first_order)
    }

    fn collect_free(&self, depth: u32, out: &mut BTreeSet<Name>) {
        for t in self.terms.keys() {
            t.collect_free(depth, out);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(0, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn map_vars(&self, depth: u32, f: &dyn Fn(&VarRef, u32) -> Option<TermDist>) -> TermDist {
        let mut out = TermDist::zero();
        for (t, c) in self.iter() {
            out.add_scaled(&t.map_vars(depth, f), *c);
        }
        out
    }

    /// Bilinear application.
    pub fn app(fun: &TermDist, arg: &TermDist) -> TermDist {
        let mut out = TermDist::zero();
        for (f, a) in fun.iter() {
            for (g, b) in arg.iter() {
                out.add_term(PureTerm::App(Box::new(f.clone()), Box::new(g.clone())), *a * *b);
            }
        }
        out
    }

    /// Bilinear pairing.
    pub fn pair(left: &TermDist, right: &TermDist) -> TermDist {
        let mut out = TermDist::zero();
        for (f, a) in left.iter() {
            for (g, b) in right.iter() {
                out.add_term(PureTerm::Pair(Box::new(f.clone()), Box::new(g.clone())), *a * *b);
            }
        }
        out
    }

    /// `\x:basis. body`, binding the free variable `x` of `body`.
    pub fn lam(x: &str, basis: Basis, body: &TermDist) -> TermDist {
        let body = body.close(&[(name(x), 0)]);
        TermDist::pure(PureTerm::Lam(Box::new(Lambda {
            hint: name(x),
            basis,
            body,
        })))
    }

    /// `let (x:bx, y:by) = scrutinee in body`, binding free `x` and `y` of `body`.
    pub fn let_pair(x: &str, bx: Basis, y: &str, by: Basis, scrutinee: &TermDist, body: &TermDist) -> TermDist {
        let body = body.close(&[(name(x), 1), (name(y), 0)]);
        TermDist::let_raw((name(x), name(y)), (bx, by), scrutinee, body)
    }

    pub(crate) fn let_raw(
        hints: (Name, Name),
        bases: (Basis, Basis),
        scrutinee: &TermDist,
        body: TermDist,
    ) -> TermDist {
        let mut out = TermDist::zero();
        for (s, c) in scrutinee.iter() {
            let term = PureTerm::LetPair(Box::new(LetPair {
                hints: hints.clone(),
                bases: bases.clone(),
                scrutinee: s.clone(),
                body: body.clone(),
            }));
            out.add_term(term, *c);
        }
        out
    }

    pub fn case(scrutinee: &TermDist, patterns: OrthoBasis, branches: Vec<TermDist>) -> TermDist {
        assert_eq!(patterns.len(), branches.len(), "case arity mismatch");
        assert!(!branches.is_empty(), "case needs at least one branch");
        let mut out = TermDist::zero();
        for (s, c) in scrutinee.iter() {
            let term = PureTerm::Case(Box::new(CaseTerm {
                scrutinee: s.clone(),
                patterns: patterns.clone(),
                branches: branches.clone(),
            }));
            out.add_term(term, *c);
        }
        out
    }

    /// Turns free occurrences of each name into the bound index given with it.
    pub(crate) fn close(&self, names: &[(Name, u32)]) -> TermDist {
        self.map_vars(0, &|v, depth| match v {
            VarRef::Free(n) => names
                .iter()
                .find(|(m, _)| m == n)
                .map(|(_, k)| TermDist::pure(PureTerm::Var(VarRef::Bound(k + depth)))),
            VarRef::Bound(_) => None,
        })
    }

    /// Replaces the bound indices of an opened binder body. Replacements must
    /// be locally closed.
    pub(crate) fn instantiate(&self, replacements: &[(u32, &TermDist)]) -> TermDist {
        self.map_vars(0, &|v, depth| match v {
            VarRef::Bound(i) => replacements
                .iter()
                .find(|(k, _)| k + depth == *i)
                .map(|(_, r)| (*r).clone()),
            VarRef::Free(_) => None,
        })
    }

    /// Plain capture-free substitution of free variables by distributions.
    pub fn substitute(&self, bindings: &[(Name, &TermDist)]) -> TermDist {
        self.map_vars(0, &|v, _| match v {
            VarRef::Free(n) => bindings.iter().find(|(m, _)| m == n).map(|(_, r)| (*r).clone()),
            VarRef::Bound(_) => None,
        })
    }

    pub fn inner(&self, other: &TermDist) -> Scalar {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Scalar::ZERO;
        for (t, a) in small.iter() {
            if let Some(b) = large.terms.get(t) {
                acc += if flip { b.conj() * *a } else { a.conj() * *b };
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Splits off a global phase so the leading coefficient becomes real
    /// and positive.
    pub fn phase_normalize(&self) -> Result<(TermDist, Scalar), TermError> {
        let (_, lead) = self.terms.iter().next().ok_or(TermError::NullVector)?;
        let phase = Scalar::phase(lead.arg());
        Ok((self.scale(phase.conj()), phase))
    }

    /// Equality up to a global phase.
    pub fn eq_up_to_phase(&self, other: &TermDist) -> bool {
        match (self.phase_normalize(), other.phase_normalize()) {
            (Ok((a, _)), Ok((b, _))) => a == b,
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_distance(&self, other: &TermDist) -> f64 {
        let diff = self.sub(other);
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Writes the distribution as a single binary node `split⁻¹(l, r)` with
    /// `l`, `r` distributions, if it has rank one. The right factor is unit
    /// with a positive leading coefficient; scale and phase go to the left.
    pub fn factor_rank_one(
        &self,
        split: impl Fn(&PureTerm) -> Option<(&PureTerm, &PureTerm)>,
    ) -> Option<(TermDist, TermDist)> {
        let mut groups: BTreeMap<&PureTerm, TermDist> = BTreeMap::new();
        for (t, c) in self.iter() {
            let (l, r) = split(t)?;
            groups.entry(l).or_default().add_term(r.clone(), *c);
        }
        let first = groups.values().next()?;
        let (unit, _) = first.phase_normalize().ok()?;
        let unit = unit.scale(Scalar::real(1.0 / unit.norm()));
        let mut left = TermDist::zero();
        for (l, r) in &groups {
            let a = unit.inner(r);
            if r.sub(&unit.scale(a)).norm() >= eps() {
                return None;
            }
            left.add_term((*l).clone(), a);
        }
        Some((left, unit))
    }

    /// Rank-one factoring of a distribution of pairs.
    pub fn factor_pair(&self) -> Option<(TermDist, TermDist)> {
        self.factor_rank_one(|t| match t {
            PureTerm::Pair(l, r) => Some((&**l, &**r)),
            _ => None,
        })
    }

    /// Rank-one factoring of a distribution of applications.
    pub fn factor_app(&self) -> Option<(TermDist, TermDist)> {
        self.factor_rank_one(|t| match t {
            PureTerm::App(l, r) => Some((&**l, &**r)),
            _ => None,
        })
    }

    /// Swaps the components of every pair. `None` if some term is not a pair.
    pub fn swap_pairs(&self) -> Option<TermDist> {
        let mut out = TermDist::zero();
        for (t, c) in self.iter() {
            match t {
                PureTerm::Pair(l, r) => out.add_term(PureTerm::Pair(r.clone(), l.clone()), *c),
                _ => return None,
            }
        }
        Some(out)
    }

    /// Splits a distribution of pairs by its left components, keeping the
    /// right components' coefficients. `None` if some term is not a pair.
    pub fn split_pairs(&self) -> Option<Vec<(PureTerm, TermDist)>> {
        let mut groups: BTreeMap<PureTerm, TermDist> = BTreeMap::new();
        for (t, c) in self.iter() {
            match t {
                PureTerm::Pair(l, r) => groups.entry((**l).clone()).or_default().add_term((**r).clone(), *c),
                _ => return None,
            }
        }
        Some(groups.into_iter().collect())
    }
}

/// Raw syntax with explicit sums, scalars and zero.
#[derive(Clone, Debug)]
pub enum Expr {
    Zero,
    Ket0,
    Ket1,
    Var(Name),
    Lam(Name, Basis, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Let {
        vars: (Name, Name),
        bases: (Basis, Basis),
        scrutinee: Box<Expr>,
        body: Box<Expr>,
    },
    Case {
        scrutinee: Box<Expr>,
        patterns: OrthoBasis,
        branches: Vec<Expr>,
    },
    Sum(Vec<Expr>),
    Scale(Scalar, Box<Expr>),
    /// An already canonical distribution spliced into raw syntax.
    Dist(TermDist),
}

pub fn canonicalize(expr: &Expr) -> TermDist {
    match expr {
        Expr::Zero => TermDist::zero(),
        Expr::Ket0 => TermDist::ket0(),
        Expr::Ket1 => TermDist::ket1(),
        Expr::Var(n) => TermDist::pure(PureTerm::free(n.clone())),
        Expr::Lam(x, b, body) => TermDist::lam(x, b.clone(), &canonicalize(body)),
        Expr::App(f, a) => TermDist::app(&canonicalize(f), &canonicalize(a)),
        Expr::Pair(l, r) => TermDist::pair(&canonicalize(l), &canonicalize(r)),
        Expr::Let {
            vars,
            bases,
            scrutinee,
            body,
        } => TermDist::let_pair(
            &vars.0,
            bases.0.clone(),
            &vars.1,
            bases.1.clone(),
            &canonicalize(scrutinee),
            &canonicalize(body),
        ),
        Expr::Case {
            scrutinee,
            patterns,
            branches,
        } => TermDist::case(
            &canonicalize(scrutinee),
            patterns.clone(),
            branches.iter().map(canonicalize).collect(),
        ),
        Expr::Sum(items) => {
            let mut out = TermDist::zero();
            for item in items {
                out.add_scaled(&canonicalize(item), Scalar::ONE);
            }
            out
        }
        Expr::Scale(c, inner) => canonicalize(inner).scale(*c),
        Expr::Dist(d) => d.clone(),
    }
}

/// Number of right-associated qubits every support element has, if uniform.
pub fn qubit_width(v: &TermDist) -> Option<usize> {
    let mut width = None;
    for t in v.terms() {
        let n = t.ket_bits()?.len();
        match width {
            None => width = Some(n),
            Some(w) if w != n => return None,
            _ => {}
        }
    }
    width
}

/// Support must be within tolerance of unit norm.
pub fn is_unit(v: &TermDist) -> bool {
    (v.norm() - 1.0).abs() < eps()
}
