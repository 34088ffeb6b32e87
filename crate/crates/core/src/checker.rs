//! Algorithmic type checking with explicit derivation trees.
//!
//! The checker is syntax directed on canonical forms. Weakening and
//! contraction are folded into context splitting, subsumption is tried at
//! rule boundaries, and term equivalence is handled by canonicalization:
//! a distribution of applications, pairs, lets or cases sharing one shell
//! is read as a single node over a combined sub-distribution.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::basis::{computational, Basis, BasisEnv, OrthoBasis};
use crate::eval::{eval, Outcome, DEFAULT_FUEL};
use crate::scalar::{eps, Scalar};
use crate::subst::{apply_sigma, Substitution};
use crate::term::{name, qubit_width, Name, PureTerm, TermDist, VarRef};
use crate::types::{is_member, subtype, Tri, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub basis: Basis,
    pub ty: Type,
}

impl Binding {
    /// Variables whose type is a ♯-type must be used exactly once.
    pub fn is_strict(&self) -> bool {
        self.ty.is_sharp()
    }

    /// Contraction is sound when substituting any member of the type under
    /// the annotation is plain substitution of that single value.
    pub fn is_duplicable(&self) -> bool {
        let Some(elements) = self.ty.elements() else {
            return false;
        };
        elements.iter().all(|e| match &self.basis {
            Basis::Abs => e.as_pure().is_some(),
            Basis::Ortho(b) => b.contains(e),
        })
    }
}

/// Variables with their annotation basis and type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    bindings: BTreeMap<Name, Binding>,
}

impl TypingContext {
    pub fn new() -> TypingContext {
        TypingContext::default()
    }

    pub fn with(mut self, x: &str, basis: Basis, ty: Type) -> TypingContext {
        self.insert(name(x), basis, ty);
        self
    }

    pub fn insert(&mut self, x: Name, basis: Basis, ty: Type) {
        self.bindings.insert(x, Binding { basis, ty });
    }

    pub fn get(&self, x: &str) -> Option<&Binding> {
        self.bindings.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.bindings.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Binding)> {
        self.bindings.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn strict_domain(&self) -> BTreeSet<Name> {
        self.iter()
            .filter(|(_, b)| b.is_strict())
            .map(|(x, _)| x.clone())
            .collect()
    }

    pub fn restrict(&self, keep: &BTreeSet<Name>) -> TypingContext {
        let bindings = self
            .bindings
            .iter()
            .filter(|(x, _)| keep.contains(*x))
            .map(|(x, b)| (x.clone(), b.clone()))
            .collect();
        TypingContext { bindings }
    }

    /// Union of two contexts; bindings of `other` win on clashes.
    pub fn union(&self, other: &TypingContext) -> TypingContext {
        let mut out = self.clone();
        out.bindings
            .extend(other.bindings.iter().map(|(x, b)| (x.clone(), b.clone())));
        out
    }

    fn remove(&mut self, x: &str) -> Option<Binding> {
        self.bindings.remove(x)
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (x, b)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}^{}:{}", b.basis, b.ty)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Axiom,
    UnitLam,
    App,
    Pair,
    LetPair,
    LetTens,
    Case,
    UnitCase,
    Sum,
    Contr,
    Weak,
    Sub,
    Equiv,
    Phase,
    /// A closed first-order value checked by membership.
    Value,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Judgement {
    pub ctx: TypingContext,
    pub term: TermDist,
    pub ty: Type,
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.ctx.is_empty() {
            write!(f, "{} ", self.ctx)?;
        }
        write!(f, "⊢ {} : {}", self.term, self.ty)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Judgement,
    pub premises: Vec<Derivation>,
    pub side_conditions: Vec<String>,
}

impl Derivation {
    fn node(
        rule: Rule,
        ctx: &TypingContext,
        term: &TermDist,
        ty: &Type,
        premises: Vec<Derivation>,
        side_conditions: Vec<String>,
    ) -> Derivation {
        Derivation {
            rule,
            conclusion: Judgement {
                ctx: ctx.clone(),
                term: term.clone(),
                ty: ty.clone(),
            },
            premises,
            side_conditions,
        }
    }

    /// All nodes in preorder.
    pub fn nodes(&self) -> Vec<&Derivation> {
        let mut out = vec![self];
        for p in &self.premises {
            out.extend(p.nodes());
        }
        out
    }

    pub fn rules(&self) -> BTreeSet<Rule> {
        self.nodes().iter().map(|d| d.rule).collect()
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Whether some context in the tree binds a variable whose type
    /// mentions ♯.
    pub fn binds_sharp_variable(&self) -> bool {
        self.nodes()
            .iter()
            .any(|d| d.conclusion.ctx.iter().any(|(_, b)| mentions_sharp(&b.ty)))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        writeln!(out, "{pad}{}  {}", self.rule, self.conclusion).unwrap();
        for s in &self.side_conditions {
            writeln!(out, "{pad}    [{s}]").unwrap();
        }
        for p in &self.premises {
            p.render_into(out, depth + 1);
        }
    }

    pub fn to_json(&self) -> Value {
        let ctx: Vec<Value> = self
            .conclusion
            .ctx
            .iter()
            .map(|(x, b)| json!({"var": x.as_ref(), "basis": b.basis.to_string(), "type": b.ty.to_string()}))
            .collect();
        json!({
            "rule": self.rule,
            "context": ctx,
            "term": self.conclusion.term.to_string(),
            "type": self.conclusion.ty.to_string(),
            "side_conditions": self.side_conditions,
            "premises": self.premises.iter().map(Derivation::to_json).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn mentions_sharp(ty: &Type) -> bool {
    match ty {
        Type::Basis(_) => false,
        Type::Sharp(_) => true,
        Type::Arrow(a, b) | Type::Product(a, b) => mentions_sharp(a) || mentions_sharp(b),
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("linear variable dropped: {var} (in {term})")]
    LinearDropped { var: String, term: String },
    #[error("linear variable duplicated: {var} (in {term})")]
    LinearDuplicated { var: String, term: String },
    #[error("subtype check failed {sub} ≤ {sup}{} (for {term})", if *.undecided { " (undecided)" } else { "" })]
    Subtype {
        sub: String,
        sup: String,
        undecided: bool,
        term: String,
    },
    #[error("orthogonality premise failed (branches {i},{j}) at type {ty}: {witness} (in {term})")]
    Orthogonality {
        i: usize,
        j: usize,
        ty: String,
        witness: String,
        term: String,
    },
    #[error("rule not applicable: {reason} (for {term} : {ty})")]
    NotApplicable { reason: String, term: String, ty: String },
    #[error("unbound variable: {var} (in {term})")]
    Unbound { var: String, term: String },
    #[error("context not basis-enumerable: {var} : {ty}")]
    NotEnumerable { var: String, ty: String },
    #[error("evaluation failed for {term}: {message}")]
    Eval { term: String, message: String },
}

impl CheckError {
    /// Preference when several rules fail: the most specific diagnostic wins.
    fn rank(&self) -> u8 {
        match self {
            CheckError::LinearDropped { .. } | CheckError::LinearDuplicated { .. } => 4,
            CheckError::Orthogonality { .. } => 3,
            CheckError::NotEnumerable { .. } | CheckError::Eval { .. } => 2,
            CheckError::Subtype { .. } | CheckError::NotApplicable { .. } => 1,
            CheckError::Unbound { .. } => 0,
        }
    }
}

/// Term text for diagnostics, shortened when long.
fn excerpt(t: &TermDist) -> String {
    const MAX: usize = 160;
    let s = t.to_string();
    if s.chars().count() <= MAX {
        return s;
    }
    let head: String = s.chars().take(MAX).collect();
    format!("{head} ...")
}

fn not_applicable(reason: impl Into<String>, t: &TermDist, ty: &Type) -> CheckError {
    CheckError::NotApplicable {
        reason: reason.into(),
        term: excerpt(t),
        ty: ty.to_string(),
    }
}

/// A substitution from an enumeration of `⟦Γ⟧`, with printable bindings.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment(Vec<(Name, TermDist, Basis)>);

impl Assignment {
    fn substitution(&self) -> Substitution {
        let mut s = Substitution::new();
        for (x, v, b) in &self.0 {
            s.insert(x, v.clone(), b.clone());
        }
        s
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (x, v, _)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} ↦ {v}")?;
        }
        f.write_str("}")
    }
}

/// Substitutions under which two terms evaluate to non-orthogonal values.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoWitness {
    pub left: Assignment,
    pub right: Assignment,
    pub inner: Scalar,
}

impl fmt::Display for OrthoWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ = {}, τ = {}, ⟨v,w⟩ = {}", self.left, self.right, self.inner)
    }
}

#[derive(Clone, Debug)]
pub struct OrthoReport {
    pub holds: bool,
    pub witness: Option<OrthoWitness>,
    pub pairs_checked: usize,
    pub left: Derivation,
    pub right: Derivation,
}

#[derive(Clone, Debug)]
pub struct ReductionFailure {
    pub step: usize,
    pub term: TermDist,
    pub error: CheckError,
}

/// Result of re-checking every term along an evaluation trace.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub steps: usize,
    pub checked: usize,
    pub failure: Option<ReductionFailure>,
    /// Why evaluation ended, when it did not reach a normal form.
    pub incomplete: Option<String>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.incomplete.is_none()
    }
}

type CheckResult = Result<Derivation, CheckError>;

/// Combined reading of a distribution whose summands share one shell.
struct LetShell {
    hints: (Name, Name),
    bases: (Basis, Basis),
    body: TermDist,
    scrutinee: TermDist,
}

struct CaseShell {
    patterns: OrthoBasis,
    branches: Vec<TermDist>,
    scrutinee: TermDist,
}

struct LamShell {
    hint: Name,
    basis: Basis,
    body: TermDist,
}

fn lam_shell(t: &TermDist) -> Option<Result<LamShell, ()>> {
    let mut shell: Option<LamShell> = None;
    for (p, c) in t.iter() {
        let PureTerm::Lam(l) = p else { return None };
        match &mut shell {
            None => {
                shell = Some(LamShell {
                    hint: l.hint.clone(),
                    basis: l.basis.clone(),
                    body: l.body.scale(*c),
                })
            }
            Some(s) if s.basis == l.basis => s.body.add_scaled(&l.body, *c),
            Some(_) => return Some(Err(())),
        }
    }
    shell.map(Ok)
}

fn let_shell(t: &TermDist) -> Option<LetShell> {
    let mut shell: Option<LetShell> = None;
    for (p, c) in t.iter() {
        let PureTerm::LetPair(l) = p else { return None };
        match &mut shell {
            None => {
                shell = Some(LetShell {
                    hints: l.hints.clone(),
                    bases: l.bases.clone(),
                    body: l.body.clone(),
                    scrutinee: TermDist::scaled(l.scrutinee.clone(), *c),
                })
            }
            Some(s) if s.bases == l.bases && s.body == l.body => s.scrutinee.add_term(l.scrutinee.clone(), *c),
            Some(_) => return None,
        }
    }
    shell
}

fn case_shell(t: &TermDist) -> Option<CaseShell> {
    let mut shell: Option<CaseShell> = None;
    for (p, c) in t.iter() {
        let PureTerm::Case(k) = p else { return None };
        match &mut shell {
            None => {
                shell = Some(CaseShell {
                    patterns: k.patterns.clone(),
                    branches: k.branches.clone(),
                    scrutinee: TermDist::scaled(k.scrutinee.clone(), *c),
                })
            }
            Some(s) if s.patterns == k.patterns && s.branches == k.branches => {
                s.scrutinee.add_term(k.scrutinee.clone(), *c)
            }
            Some(_) => return None,
        }
    }
    shell
}

fn fresh(hint: &str, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(hint) {
        return name(hint);
    }
    (1..)
        .map(|k| format!("{hint}{k}"))
        .find(|n| !avoid.contains(n.as_str()))
        .map(|n| name(&n))
        .expect("fresh name")
}

fn unit_modulus(c: Scalar) -> bool {
    (c.norm() - 1.0).abs() < eps()
}

fn sharp_inner(ty: &Type) -> Option<&Type> {
    match ty {
        Type::Sharp(a) => Some(a),
        _ => None,
    }
}

/// Type checker holding the bases used to synthesize types of constants.
pub struct Checker {
    known: Vec<OrthoBasis>,
    fuel: usize,
    cache: RefCell<BTreeMap<(String, TermDist, String), CheckResult>>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(&BasisEnv::default())
    }
}

impl Checker {
    pub fn new(env: &BasisEnv) -> Checker {
        let mut known: Vec<OrthoBasis> = ["B", "X", "Bell"].iter().filter_map(|l| env.get(l).cloned()).collect();
        for (_, b) in env.iter() {
            if !known.contains(b) {
                known.push(b.clone());
            }
        }
        Checker {
            known,
            fuel: DEFAULT_FUEL,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn with_fuel(mut self, fuel: usize) -> Checker {
        self.fuel = fuel;
        self
    }

    /// Derives `Γ ⊢ t : A`.
    pub fn check(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> CheckResult {
        self.check_in(ctx, t, &ty.sharp_normalize())
    }

    /// Scope guard and weakening, then the syntax-directed core.
    fn check_in(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> CheckResult {
        let fv = t.free_vars();
        if let Some(x) = fv.iter().find(|x| !ctx.contains(x)) {
            return Err(CheckError::Unbound {
                var: x.to_string(),
                term: excerpt(t),
            });
        }
        let unused: Vec<(Name, Binding)> = ctx
            .iter()
            .filter(|(x, _)| !fv.contains(*x))
            .map(|(x, b)| (x.clone(), b.clone()))
            .collect();
        if let Some((x, _)) = unused.iter().find(|(_, b)| b.is_strict()) {
            return Err(CheckError::LinearDropped {
                var: x.to_string(),
                term: excerpt(t),
            });
        }
        let mut cur = ctx.restrict(&fv);
        let mut d = self.check_cached(&cur, t, ty)?;
        for (x, b) in unused {
            cur.insert(x.clone(), b.basis, b.ty);
            let side = vec![format!("{x} not free and not strict")];
            d = Derivation::node(Rule::Weak, &cur, t, ty, vec![d], side);
        }
        Ok(d)
    }

    fn check_cached(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> CheckResult {
        let key = (ctx.to_string(), t.clone(), ty.to_string());
        if let Some(r) = self.cache.borrow().get(&key) {
            return r.clone();
        }
        let r = self.check_exact(ctx, t, ty);
        self.cache.borrow_mut().insert(key, r.clone());
        r
    }

    /// `ctx` binds exactly the free variables of `t`.
    fn check_exact(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> CheckResult {
        if t.is_zero() {
            return Err(not_applicable("the null distribution has no type", t, ty));
        }
        if ctx.is_empty() && t.is_value() && t.is_first_order() {
            if let Some(d) = self.value_leaf(t, ty) {
                return Ok(d);
            }
        }
        if let Some((p, c)) = t.single() {
            if !c.approx_eq(Scalar::ONE) {
                if !unit_modulus(c) {
                    return Err(not_applicable("a single summand needs a unit coefficient", t, ty));
                }
                let d = self.check_exact(ctx, &TermDist::pure(p.clone()), ty)?;
                let side = vec![format!("θ = {}", crate::frontend::printer::format_real(c.arg()))];
                return Ok(Derivation::node(Rule::Phase, ctx, t, ty, vec![d], side));
            }
        }
        let views: [&dyn Fn() -> Option<CheckResult>; 8] = [
            &|| self.view_axiom(ctx, t, ty),
            &|| self.view_lam(ctx, t, ty),
            &|| self.view_let(ctx, t, ty),
            &|| self.view_case(ctx, t, ty),
            &|| self.view_app(ctx, t, ty),
            &|| self.view_pair(ctx, t, ty),
            &|| self.view_sum(ctx, t, ty),
            &|| self.view_synth(ctx, t, ty),
        ];
        let mut best: Option<CheckError> = None;
        for view in views {
            match view() {
                Some(Ok(d)) => return Ok(d),
                Some(Err(e)) if best.as_ref().is_none_or(|b| e.rank() > b.rank()) => best = Some(e),
                _ => {}
            }
        }
        Err(best.unwrap_or_else(|| not_applicable("no rule applies", t, ty)))
    }

    fn value_leaf(&self, v: &TermDist, ty: &Type) -> Option<Derivation> {
        let empty = TypingContext::new();
        if is_member(v, ty).unwrap_or(false) {
            let side = vec![format!("{v} ∈ ⟦{ty}⟧")];
            return Some(Derivation::node(Rule::Value, &empty, v, ty, vec![], side));
        }
        let element = ty.elements()?.into_iter().find(|e| e.eq_up_to_phase(v))?;
        let c = element.inner(v);
        let side = vec![format!("{element} ∈ ⟦{ty}⟧")];
        let leaf = Derivation::node(Rule::Value, &empty, &element, ty, vec![], side);
        let side = vec![format!("θ = {}", crate::frontend::printer::format_real(c.arg()))];
        Some(Derivation::node(Rule::Phase, &empty, v, ty, vec![leaf], side))
    }

    /// Subsumption from the conclusion of `d` to `ty`.
    fn subsume(&self, d: Derivation, ty: &Type) -> CheckResult {
        let from = d.conclusion.ty.sharp_normalize();
        if from == *ty {
            return Ok(d);
        }
        match subtype(&from, ty) {
            Tri::Yes => {
                let (ctx, term) = (d.conclusion.ctx.clone(), d.conclusion.term.clone());
                let side = vec![format!("{from} ≤ {ty}")];
                Ok(Derivation::node(Rule::Sub, &ctx, &term, ty, vec![d], side))
            }
            answer => Err(CheckError::Subtype {
                sub: from.to_string(),
                sup: ty.to_string(),
                undecided: answer == Tri::Undecided,
                term: excerpt(&d.conclusion.term),
            }),
        }
    }

    fn view_axiom(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let PureTerm::Var(VarRef::Free(x)) = t.as_pure()? else {
            return None;
        };
        let b = ctx.get(x)?;
        let side = match &b.basis {
            Basis::Abs => "X = @fun".to_string(),
            Basis::Ortho(o) => {
                let flat = Type::Basis(o.clone());
                if subtype(&flat, &b.ty) != Tri::Yes {
                    let reason = format!("axiom side condition fails: {flat} ≤ {}", b.ty);
                    return Some(Err(not_applicable(reason, t, ty)));
                }
                format!("{flat} ≤ {}", b.ty)
            }
        };
        let d = Derivation::node(Rule::Axiom, ctx, t, &b.ty, vec![], vec![side]);
        Some(self.subsume(d, ty))
    }

    fn view_lam(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let shell = match lam_shell(t)? {
            Ok(s) => s,
            Err(()) => return Some(Err(not_applicable("abstractions over different bases", t, ty))),
        };
        let (dom, cod) = match ty {
            Type::Arrow(a, b) => (a, b),
            Type::Sharp(inner) if matches!(**inner, Type::Arrow(..)) => {
                return Some(self.check_cached(ctx, t, inner).and_then(|d| self.subsume(d, ty)));
            }
            _ => {
                return Some(Err(not_applicable(
                    "abstraction checked against a non-arrow type",
                    t,
                    ty,
                )))
            }
        };
        let mut avoid: BTreeSet<Name> = ctx.names().cloned().collect();
        avoid.extend(t.free_vars());
        let x = fresh(&shell.hint, &avoid);
        let body = shell
            .body
            .instantiate(&[(0, &TermDist::pure(PureTerm::free(x.clone())))]);
        let mut ext = ctx.clone();
        ext.insert(x, shell.basis, (**dom).clone());
        Some(
            self.check_in(&ext, &body, cod)
                .map(|d| Derivation::node(Rule::UnitLam, ctx, t, ty, vec![d], vec![])),
        )
    }

    /// Checks a two-premise rule whose first premise types `first` and whose
    /// second premise uses the variables `second_fv`. Shared variables are
    /// renamed apart in `first` and merged again by contraction.
    #[allow(clippy::too_many_arguments)]
    fn split(
        &self,
        rule: Rule,
        ctx: &TypingContext,
        t: &TermDist,
        ty: &Type,
        first: &TermDist,
        second_fv: &BTreeSet<Name>,
        rebuild: &dyn Fn(&TermDist) -> TermDist,
        premises: &PremiseFn,
    ) -> CheckResult {
        let first_fv = first.free_vars();
        let shared: Vec<Name> = first_fv.intersection(second_fv).cloned().collect();
        let mut avoid: BTreeSet<Name> = ctx.names().cloned().collect();
        avoid.extend(t.free_vars());
        let mut renames = Vec::new();
        for x in &shared {
            let b = ctx.get(x).expect("scope checked");
            if !b.is_duplicable() {
                return Err(CheckError::LinearDuplicated {
                    var: x.to_string(),
                    term: excerpt(t),
                });
            }
            let x2 = fresh(&format!("{x}'"), &avoid);
            avoid.insert(x2.clone());
            renames.push((x.clone(), x2));
        }
        let bindings: Vec<(Name, TermDist)> = renames
            .iter()
            .map(|(x, x2)| (x.clone(), TermDist::pure(PureTerm::free(x2.clone()))))
            .collect();
        let refs: Vec<(Name, &TermDist)> = bindings.iter().map(|(x, v)| (x.clone(), v)).collect();
        let first2 = first.substitute(&refs);
        let mut ctx1 = ctx.restrict(&first_fv);
        let mut ext = ctx.clone();
        for (x, x2) in &renames {
            let b = ctx1.remove(x).expect("shared variable");
            ctx1.insert(x2.clone(), b.basis.clone(), b.ty.clone());
            ext.insert(x2.clone(), b.basis, b.ty);
        }
        let ctx2 = ctx.restrict(second_fv);
        let (ps, sides) = premises(&ctx1, &first2, &ctx2)?;
        let mut term = rebuild(&first2);
        let mut d = Derivation::node(rule, &ext, &term, ty, ps, sides);
        for (x, x2) in renames.iter().rev() {
            ext.remove(x2);
            term = term.substitute(&[(x2.clone(), &TermDist::pure(PureTerm::free(x.clone())))]);
            let side = vec![format!("{x2} := {x}, {x} duplicable")];
            d = Derivation::node(Rule::Contr, &ext, &term, ty, vec![d], side);
        }
        Ok(d)
    }

    fn view_app(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let (fun, arg) = t.factor_app()?;
        let mut candidates: Vec<Type> = Vec::new();
        let mut push = |c: Type| {
            let c = c.sharp_normalize();
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        };
        let mut synthesized = Vec::new();
        if let Some(a) = self.synth(ctx, &arg) {
            synthesized.push(a);
        }
        if let Some(Type::Arrow(a, _)) = self.synth(ctx, &fun) {
            synthesized.push(*a);
        }
        for a in &synthesized {
            push(a.clone());
        }
        for a in &synthesized {
            push(lift_sharp(a));
        }
        if let Some(Ok(LamShell {
            basis: Basis::Ortho(x), ..
        })) = lam_shell(&fun)
        {
            push(Type::Basis(x.clone()));
            push(Type::sharp(Type::Basis(x)));
        }
        if candidates.is_empty() {
            return Some(Err(not_applicable("cannot determine the argument type", t, ty)));
        }
        let arg_fv = arg.free_vars();
        let mut best: Option<CheckError> = None;
        for dom in candidates {
            let fun_ty = Type::arrow(dom.clone(), ty.clone());
            let r = self.split(
                Rule::App,
                ctx,
                t,
                ty,
                &fun,
                &arg_fv,
                &|f| TermDist::app(f, &arg),
                &|c1, f, c2| {
                    let d1 = self.check_in(c1, f, &fun_ty)?;
                    let d2 = self.check_in(c2, &arg, &dom)?;
                    Ok((vec![d1, d2], vec![]))
                },
            );
            match r {
                Ok(d) => return Some(Ok(d)),
                Err(e) => {
                    if best.as_ref().is_none_or(|b| e.rank() > b.rank()) {
                        best = Some(e);
                    }
                }
            }
        }
        best.map(Err)
    }

    fn view_pair(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let (l, r) = t.factor_pair()?;
        let (a, b, sharp) = match ty {
            Type::Product(a, b) => ((**a).clone(), (**b).clone(), false),
            Type::Sharp(inner) => match &**inner {
                Type::Product(a, b) => (Type::sharp((**a).clone()), Type::sharp((**b).clone()), true),
                // ♯ of a complete basis is ♯ of a computational power, which
                // splits at the width of the left component.
                Type::Basis(o) if o.is_complete() && o.dim() >= 2 => {
                    let k = self.synth(ctx, &l).and_then(|a| a.width())?;
                    if k == 0 || k >= o.dim() {
                        return None;
                    }
                    let split = Type::sharp(Type::product(
                        Type::Basis(computational_power(k)),
                        Type::Basis(computational_power(o.dim() - k)),
                    ));
                    return Some(self.check_cached(ctx, t, &split).and_then(|d| self.subsume(d, ty)));
                }
                _ => return None,
            },
            _ => return None,
        };
        let (a, b) = (a.sharp_normalize(), b.sharp_normalize());
        let target = Type::product(a.clone(), b.clone());
        let r_fv = r.free_vars();
        let d = self.split(
            Rule::Pair,
            ctx,
            t,
            &target,
            &l,
            &r_fv,
            &|x| TermDist::pair(x, &r),
            &|c1, x, c2| Ok((vec![self.check_in(c1, x, &a)?, self.check_in(c2, &r, &b)?], vec![])),
        );
        Some(if sharp { d.and_then(|d| self.subsume(d, ty)) } else { d })
    }

    fn view_let(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let shell = let_shell(t)?;
        let mut avoid: BTreeSet<Name> = ctx.names().cloned().collect();
        avoid.extend(t.free_vars());
        let x = fresh(&shell.hints.0, &avoid);
        avoid.insert(x.clone());
        let y = fresh(&shell.hints.1, &avoid);
        let body = shell.body.instantiate(&[
            (1, &TermDist::pure(PureTerm::free(x.clone()))),
            (0, &TermDist::pure(PureTerm::free(y.clone()))),
        ]);
        let sharp_target = ty.is_sharp();
        let mut candidates: Vec<(Rule, Type, Type)> = Vec::new();
        let mut push = |c: (Rule, Type, Type)| {
            let c = (c.0, c.1.sharp_normalize(), c.2.sharp_normalize());
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        };
        let scrut_ctx = ctx.restrict(&shell.scrutinee.free_vars());
        let scrut_synth = self.synth(&scrut_ctx, &shell.scrutinee).map(|s| s.sharp_normalize());
        match scrut_synth.clone() {
            Some(Type::Product(a, b)) => push((Rule::LetPair, *a, *b)),
            Some(Type::Sharp(inner)) if sharp_target => {
                if let Type::Product(a, b) = *inner {
                    push((Rule::LetTens, *a, *b))
                }
            }
            _ => {}
        }
        if let (Basis::Ortho(bx), Basis::Ortho(by)) = &shell.bases {
            let (tx, ty_) = (Type::Basis(bx.clone()), Type::Basis(by.clone()));
            push((Rule::LetPair, tx.clone(), ty_.clone()));
            push((Rule::LetPair, Type::sharp(tx.clone()), Type::sharp(ty_.clone())));
            if sharp_target {
                push((Rule::LetTens, tx, ty_));
            }
        }
        if candidates.is_empty() {
            return Some(Err(not_applicable(
                "cannot determine the type of the let scrutinee",
                t,
                ty,
            )));
        }
        let mut body_fv = body.free_vars();
        body_fv.remove(&x);
        body_fv.remove(&y);
        let mut best: Option<CheckError> = None;
        for (rule, a, b) in candidates {
            let (scrut_ty, xa, yb) = match rule {
                Rule::LetPair => (Type::product(a.clone(), b.clone()), a, b),
                _ => (
                    Type::sharp(Type::product(a.clone(), b.clone())),
                    Type::sharp(a).sharp_normalize(),
                    Type::sharp(b).sharp_normalize(),
                ),
            };
            let r = self.split(
                rule,
                ctx,
                t,
                ty,
                &shell.scrutinee,
                &body_fv,
                &|s| TermDist::let_raw(shell.hints.clone(), shell.bases.clone(), s, shell.body.clone()),
                &|c1, s, c2| {
                    let d1 = self.check_in(c1, s, &scrut_ty)?;
                    let mut inner = c2.clone();
                    inner.insert(x.clone(), shell.bases.0.clone(), xa.clone());
                    inner.insert(y.clone(), shell.bases.1.clone(), yb.clone());
                    let d2 = self.check_in(&inner, &body, ty)?;
                    Ok((vec![d1, d2], vec![]))
                },
            );
            match r {
                Ok(d) => return Some(Ok(d)),
                Err(e) => {
                    if best.as_ref().is_none_or(|b| e.rank() > b.rank()) {
                        best = Some(e);
                    }
                }
            }
        }
        if let (Some(s), false) = (&scrut_synth, sharp_target) {
            if !matches!(s, Type::Product(..)) && best.as_ref().is_none_or(|b| b.rank() <= 1) {
                let reason = format!(
                    "let scrutinee {} has non-product type {s}, and LetTens concludes a ♯-type, not {ty}",
                    shell.scrutinee
                );
                return Some(Err(not_applicable(reason, t, ty)));
            }
        }
        best.map(Err)
    }

    fn view_case(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let shell = case_shell(t)?;
        let branch_fv: BTreeSet<Name> = shell.branches.iter().flat_map(|b| b.free_vars()).collect();
        let patterns = Type::Basis(shell.patterns.clone());
        let rebuild = |s: &TermDist| TermDist::case(s, shell.patterns.clone(), shell.branches.clone());
        let plain = self.split(
            Rule::Case,
            ctx,
            t,
            ty,
            &shell.scrutinee,
            &branch_fv,
            &rebuild,
            &|c1, s, c2| {
                let mut ps = vec![self.check_in(c1, s, &patterns)?];
                for b in &shell.branches {
                    ps.push(self.check_in(c2, b, ty)?);
                }
                Ok((ps, vec![]))
            },
        );
        let Err(mut best) = plain else { return Some(plain) };
        let Some(inner) = sharp_inner(ty) else {
            return Some(Err(best));
        };
        let sharp_patterns = Type::sharp(patterns.clone());
        let mut levels = vec![inner.clone()];
        if *inner != *ty {
            levels.push(ty.clone());
        }
        for level in levels {
            let r = self.split(
                Rule::UnitCase,
                ctx,
                t,
                ty,
                &shell.scrutinee,
                &branch_fv,
                &rebuild,
                &|c1, s, c2| {
                    let mut ps = vec![self.check_in(c1, s, &sharp_patterns)?];
                    for b in &shell.branches {
                        ps.push(self.check_in(c2, b, &level)?);
                    }
                    let sides = self.pairwise_orthogonal(c2, &shell.branches, &level, t)?;
                    Ok((ps, sides))
                },
            );
            match r {
                Ok(d) => return Some(Ok(d)),
                Err(e) => {
                    if e.rank() > best.rank() {
                        best = e;
                    }
                }
            }
        }
        Some(Err(best))
    }

    fn view_sum(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        if t.len() < 2 {
            return None;
        }
        let inner = sharp_inner(ty)?;
        let weight: f64 = t.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (weight - 1.0).abs() >= eps() {
            let reason = format!(
                "Sum needs Σ|α|² = 1, found {}",
                crate::frontend::printer::format_real(weight)
            );
            return Some(Err(not_applicable(reason, t, ty)));
        }
        let mut levels = vec![inner.clone()];
        if *inner != *ty {
            levels.push(ty.clone());
        }
        let mut best: Option<CheckError> = None;
        for summands in sum_groupings(t) {
            for level in &levels {
                let attempt = || -> CheckResult {
                    let mut ps = Vec::with_capacity(summands.len());
                    for s in &summands {
                        ps.push(self.check_in(ctx, s, level)?);
                    }
                    let mut sides = vec!["Σ|α|² = 1".to_string()];
                    sides.extend(self.pairwise_orthogonal(ctx, &summands, level, t)?);
                    Ok(Derivation::node(Rule::Sum, ctx, t, ty, ps, sides))
                };
                match attempt() {
                    Ok(d) => return Some(Ok(d)),
                    Err(e) => {
                        if best.as_ref().is_none_or(|b| e.rank() > b.rank()) {
                            best = Some(e);
                        }
                    }
                }
            }
        }
        best.map(Err)
    }

    fn view_synth(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> Option<CheckResult> {
        let s = self.synth(ctx, t)?.sharp_normalize();
        if s == *ty {
            return None;
        }
        if subtype(&s, ty) != Tri::Yes {
            return Some(Err(CheckError::Subtype {
                sub: s.to_string(),
                sup: ty.to_string(),
                undecided: subtype(&s, ty) == Tri::Undecided,
                term: excerpt(t),
            }));
        }
        Some(self.check_cached(ctx, t, &s).and_then(|d| self.subsume(d, ty)))
    }

    fn pairwise_orthogonal(
        &self,
        ctx: &TypingContext,
        terms: &[TermDist],
        level: &Type,
        whole: &TermDist,
    ) -> Result<Vec<String>, CheckError> {
        let mut sides = Vec::new();
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if let Some(w) = self.orthogonal_under(ctx, &terms[i], ctx, &terms[j])?.0 {
                    return Err(CheckError::Orthogonality {
                        i,
                        j,
                        ty: level.to_string(),
                        witness: w.to_string(),
                        term: excerpt(whole),
                    });
                }
                sides.push(format!("#{i} ⊥ #{j} : {level}"));
            }
        }
        Ok(sides)
    }

    /// Enumerates `⟦Γ⟧`: elements of finite types, generators of ♯-types.
    fn enumerate(&self, ctx: &TypingContext) -> Result<Vec<Assignment>, CheckError> {
        let mut out = vec![Assignment(Vec::new())];
        for (x, b) in ctx.iter() {
            let values = match b.ty.elements() {
                Some(e) => e,
                None => match b.ty.sharp_normalize() {
                    Type::Sharp(a) => a.generators(),
                    _ => None,
                }
                .ok_or_else(|| CheckError::NotEnumerable {
                    var: x.to_string(),
                    ty: b.ty.to_string(),
                })?,
            };
            out = out
                .into_iter()
                .flat_map(|a| {
                    values.iter().map(move |v| {
                        let mut a = a.clone();
                        a.0.push((x.clone(), v.clone(), b.basis.clone()));
                        a
                    })
                })
                .collect();
        }
        Ok(out)
    }

    fn evaluate(&self, t: &TermDist, sigma: &Assignment) -> Result<TermDist, CheckError> {
        let instance = apply_sigma(t, &sigma.substitution()).map_err(|e| CheckError::Eval {
            term: excerpt(t),
            message: format!("substitution {sigma}: {e}"),
        })?;
        let trace = eval(&instance, self.fuel);
        trace.normal_form().cloned().map_err(|e| CheckError::Eval {
            term: excerpt(&instance),
            message: e.to_string(),
        })
    }

    /// Searches for substitutions making the two terms non-orthogonal.
    fn orthogonal_under(
        &self,
        ctx_t: &TypingContext,
        t: &TermDist,
        ctx_s: &TypingContext,
        s: &TermDist,
    ) -> Result<(Option<OrthoWitness>, usize), CheckError> {
        let ctx_t = ctx_t.restrict(&t.free_vars());
        let ctx_s = ctx_s.restrict(&s.free_vars());
        let left: Vec<(Assignment, TermDist)> = self
            .enumerate(&ctx_t)?
            .into_iter()
            .map(|a| self.evaluate(t, &a).map(|v| (a, v)))
            .collect::<Result<_, _>>()?;
        let right: Vec<(Assignment, TermDist)> = self
            .enumerate(&ctx_s)?
            .into_iter()
            .map(|a| self.evaluate(s, &a).map(|v| (a, v)))
            .collect::<Result<_, _>>()?;
        let mut checked = 0;
        for (a, v) in &left {
            for (b, w) in &right {
                checked += 1;
                let inner = v.inner(w);
                if inner.norm() >= eps() {
                    let witness = OrthoWitness {
                        left: a.clone(),
                        right: b.clone(),
                        inner,
                    };
                    return Ok((Some(witness), checked));
                }
            }
        }
        Ok((None, checked))
    }

    /// Decides `Γ, Δ1 ⊢ t ⊥ Γ, Δ2 ⊢ s : A` on the enumerable fragment.
    pub fn check_orthogonality(
        &self,
        shared: &TypingContext,
        left_ctx: &TypingContext,
        t: &TermDist,
        right_ctx: &TypingContext,
        s: &TermDist,
        ty: &Type,
    ) -> Result<OrthoReport, CheckError> {
        let ctx_t = shared.union(left_ctx);
        let ctx_s = shared.union(right_ctx);
        let left = self.check(&ctx_t, t, ty)?;
        let right = self.check(&ctx_s, s, ty)?;
        let (witness, pairs_checked) = self.orthogonal_under(&ctx_t, t, &ctx_s, s)?;
        Ok(OrthoReport {
            holds: witness.is_none(),
            witness,
            pairs_checked,
            left,
            right,
        })
    }

    /// Evaluates a closed term and re-checks every intermediate term.
    pub fn subject_reduction(&self, ctx: &TypingContext, t: &TermDist, ty: &Type) -> ReductionReport {
        let trace = eval(t, self.fuel);
        let mut report = ReductionReport {
            steps: trace.steps.len(),
            checked: 0,
            failure: None,
            incomplete: None,
        };
        for (step, term) in trace.terms().enumerate() {
            report.checked += 1;
            if let Err(error) = self.check(ctx, term, ty) {
                report.failure = Some(ReductionFailure {
                    step,
                    term: term.clone(),
                    error,
                });
                return report;
            }
        }
        report.incomplete = match trace.outcome {
            Outcome::NormalForm(_) => None,
            Outcome::Stuck { reason, .. } => Some(format!("stuck: {reason}")),
            Outcome::FuelExhausted(n) => Some(format!("fuel exhausted after {n} steps")),
        };
        report
    }

    // Limited synthesis.

    pub fn synth(&self, ctx: &TypingContext, t: &TermDist) -> Option<Type> {
        if t.is_zero() {
            return None;
        }
        if t.is_closed() && t.is_value() && t.is_first_order() {
            return self.synth_value(t);
        }
        if let Some((p, c)) = t.single() {
            if !c.approx_eq(Scalar::ONE) {
                return if unit_modulus(c) {
                    self.synth(ctx, &TermDist::pure(p.clone()))
                } else {
                    None
                };
            }
            if let PureTerm::Var(VarRef::Free(x)) = p {
                return ctx.get(x).map(|b| b.ty.clone());
            }
        }
        if let Some(shell) = lam_shell(t) {
            let LamShell {
                hint,
                basis: Basis::Ortho(b),
                body,
            } = shell.ok()?
            else {
                return None;
            };
            let mut avoid: BTreeSet<Name> = ctx.names().cloned().collect();
            avoid.extend(t.free_vars());
            let x = fresh(&hint, &avoid);
            let body = body.instantiate(&[(0, &TermDist::pure(PureTerm::free(x.clone())))]);
            let dom = Type::Basis(b.clone());
            let mut ext = ctx.clone();
            ext.insert(x, Basis::Ortho(b), dom.clone());
            return Some(Type::arrow(dom, self.synth(&ext, &body)?));
        }
        if let Some(shell) = let_shell(t) {
            let (a, b, sharp) = match self.synth(ctx, &shell.scrutinee)?.sharp_normalize() {
                Type::Product(a, b) => (*a, *b, false),
                Type::Sharp(inner) => match *inner {
                    Type::Product(a, b) => (
                        Type::sharp(*a).sharp_normalize(),
                        Type::sharp(*b).sharp_normalize(),
                        true,
                    ),
                    _ => return None,
                },
                _ => return None,
            };
            let mut avoid: BTreeSet<Name> = ctx.names().cloned().collect();
            avoid.extend(t.free_vars());
            let x = fresh(&shell.hints.0, &avoid);
            avoid.insert(x.clone());
            let y = fresh(&shell.hints.1, &avoid);
            let body = shell.body.instantiate(&[
                (1, &TermDist::pure(PureTerm::free(x.clone()))),
                (0, &TermDist::pure(PureTerm::free(y.clone()))),
            ]);
            let mut ext = ctx.clone();
            ext.insert(x, shell.bases.0, a);
            ext.insert(y, shell.bases.1, b);
            let c = self.synth(&ext, &body)?;
            return Some(if sharp { Type::sharp(c).sharp_normalize() } else { c });
        }
        if let Some(shell) = case_shell(t) {
            let mut common: Option<Type> = None;
            for b in &shell.branches {
                let s = self.synth(ctx, b)?.sharp_normalize();
                match &common {
                    None => common = Some(s),
                    Some(c) if *c == s => {}
                    Some(_) => return None,
                }
            }
            return common;
        }
        if let Some((fun, arg)) = t.factor_app() {
            let Type::Arrow(dom, cod) = self.synth(ctx, &fun)?.sharp_normalize() else {
                return None;
            };
            return match self.synth(ctx, &arg) {
                Some(a) if subtype(&a, &dom) != Tri::Yes => None,
                _ => Some(*cod),
            };
        }
        if let Some((l, r)) = t.factor_pair() {
            return Some(Type::product(self.synth(ctx, &l)?, self.synth(ctx, &r)?));
        }
        None
    }

    fn synth_value(&self, v: &TermDist) -> Option<Type> {
        if let Some(b) = self
            .known
            .iter()
            .find(|b| b.elements().iter().any(|e| e.eq_up_to_phase(v)))
        {
            return Some(Type::Basis(b.clone()));
        }
        if let Some((l, r)) = v.factor_pair() {
            if let (Some(a), Some(b)) = (self.synth_value(&l), self.synth_value(&r)) {
                return Some(Type::product(a, b));
            }
        }
        let width = qubit_width(v)?;
        if let Some(b) = self.known.iter().find(|b| b.dim() == width && b.is_complete()) {
            return Some(Type::sharp(Type::Basis(b.clone())));
        }
        Some(Type::sharp(Type::Basis(computational_power(width))))
    }
}

/// Builds the premises of a context-splitting rule from `(Γ₁, first, Γ₂)`.
type PremiseFn<'a> =
    dyn Fn(&TypingContext, &TermDist, &TypingContext) -> Result<(Vec<Derivation>, Vec<String>), CheckError> + 'a;

/// `T` with every basis type `[b]` replaced by `♯[b]`.
fn lift_sharp(t: &Type) -> Type {
    match t {
        Type::Basis(_) => Type::sharp(t.clone()),
        Type::Sharp(_) => t.clone(),
        Type::Arrow(a, b) => Type::arrow(lift_sharp(a), lift_sharp(b)),
        Type::Product(a, b) => Type::product(lift_sharp(a), lift_sharp(b)),
    }
}

/// Candidate splittings `t = Σ αᵢ uᵢ` for the Sum rule, each `uᵢ` of unit
/// formal norm: first the pure summands, then pair summands grouped by their
/// right, then by their left component, then all value summands merged.
fn sum_groupings(t: &TermDist) -> Vec<Vec<TermDist>> {
    let pure: Vec<TermDist> = t.terms().map(|p| TermDist::pure(p.clone())).collect();
    let mut out = vec![pure];
    for right in [true, false] {
        let mut groups: Vec<(Option<&PureTerm>, TermDist)> = Vec::new();
        for (p, c) in t.iter() {
            let key = match p {
                PureTerm::Pair(l, r) => Some(if right { &**r } else { &**l }),
                _ => None,
            };
            let single = TermDist::pure(p.clone()).scale(*c);
            match groups.iter_mut().find(|(k, _)| key.is_some() && *k == key) {
                Some((_, g)) => *g = g.add(&single),
                None => groups.push((key, single)),
            }
        }
        if groups.len() < 2 || groups.len() == t.len() {
            continue;
        }
        out.push(
            groups
                .into_iter()
                .map(|(_, g)| g.scale(Scalar::real(1.0 / g.norm())))
                .collect(),
        );
    }
    let (values, rest): (Vec<_>, Vec<_>) = t.iter().partition(|(p, _)| p.is_value());
    if values.len() >= 2 && !rest.is_empty() {
        let merged = values.iter().fold(TermDist::zero(), |acc, (p, c)| {
            acc.add(&TermDist::pure((*p).clone()).scale(**c))
        });
        let mut groups = vec![merged.scale(Scalar::real(1.0 / merged.norm()))];
        groups.extend(rest.iter().map(|(p, _)| TermDist::pure((*p).clone())));
        out.push(groups);
    }
    out
}

fn computational_power(n: usize) -> OrthoBasis {
    let mut b = computational();
    for _ in 1..n {
        b = b.product(&computational());
    }
    b
}

/// Checks with a default checker.
pub fn check(ctx: &TypingContext, t: &TermDist, ty: &Type) -> CheckResult {
    Checker::default().check(ctx, t, ty)
}

pub fn check_orthogonality(
    shared: &TypingContext,
    left_ctx: &TypingContext,
    t: &TermDist,
    right_ctx: &TypingContext,
    s: &TermDist,
    ty: &Type,
) -> Result<OrthoReport, CheckError> {
    Checker::default().check_orthogonality(shared, left_ctx, t, right_ctx, s, ty)
}

pub fn subject_reduction(ctx: &TypingContext, t: &TermDist, ty: &Type) -> ReductionReport {
    Checker::default().subject_reduction(ctx, t, ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::diagonal;
    use crate::frontend::{parse_term, parse_type};

    fn tb() -> Type {
        Type::Basis(computational())
    }

    fn ok(src: &str, ty: &str) -> Derivation {
        let t = parse_term(src).unwrap();
        let ty = parse_type(ty).unwrap();
        match check(&TypingContext::new(), &t, &ty) {
            Ok(d) => d,
            Err(e) => panic!("{src} : {ty} rejected: {e}"),
        }
    }

    fn err(src: &str, ty: &str) -> CheckError {
        let t = parse_term(src).unwrap();
        let ty = parse_type(ty).unwrap();
        check(&TypingContext::new(), &t, &ty).expect_err("expected rejection")
    }

    const HD: &str = "\\x:B. case x of { |0> -> |+> | |1> -> |-> }";

    #[test]
    fn hadamard_types_tightly_and_coarsely() {
        let d = ok(HD, "[B] -> [X]");
        assert_eq!(d.rule, Rule::UnitLam);
        assert!(d.rules().contains(&Rule::Case));
        let d = ok(HD, "#[B] -> #[B]");
        assert!(d.rules().contains(&Rule::UnitCase));
        err(HD, "[B] -> [B]");
    }

    #[test]
    fn axiom_and_subsumption() {
        let ctx = TypingContext::new().with("x", Basis::Ortho(computational()), tb());
        let d = check(&ctx, &TermDist::var("x"), &Type::sharp(tb())).unwrap();
        assert_eq!(d.rule, Rule::Sub);
        assert_eq!(d.premises[0].rule, Rule::Axiom);
        let bad = TypingContext::new().with("x", Basis::Ortho(computational()), Type::Basis(diagonal()));
        assert!(check(&bad, &TermDist::var("x"), &Type::Basis(diagonal())).is_err());
    }

    #[test]
    fn linearity_diagnostics() {
        let e = err("\\x:@fun. (x, x)", "#[B] -> #([B] * [B])");
        assert!(
            matches!(e, CheckError::LinearDuplicated { ref var, .. } if var == "x"),
            "{e}"
        );
        let e = err("\\x:B. |0>", "#[B] -> [B]");
        assert!(
            matches!(e, CheckError::LinearDropped { ref var, .. } if var == "x"),
            "{e}"
        );
        // A basis-typed variable may be duplicated and dropped.
        ok("\\x:B. (x, x)", "[B] -> [B] * [B]");
        ok("\\x:B. |0>", "[B] -> [B]");
    }

    #[test]
    fn superposed_duplication_goes_through_sum() {
        let d = ok("(\\x:B. (x, x)) |+>", "#([B] * [B])");
        assert_eq!(d.rule, Rule::Sum);
        assert!(d.rules().contains(&Rule::Contr));
    }

    #[test]
    fn phase_rule() {
        let d = ok("-|1>", "[B]");
        assert_eq!(d.rule, Rule::Phase);
        ok("e^(i*0.3)*((\\x:B. x) |0>)", "[B]");
    }

    #[test]
    fn orthogonality_examples() {
        let c = Checker::default();
        let empty = TypingContext::new();
        let sb = Type::sharp(tb());
        let r = c
            .check_orthogonality(&empty, &empty, &TermDist::plus(), &empty, &TermDist::minus(), &sb)
            .unwrap();
        assert!(r.holds);
        let r = c
            .check_orthogonality(&empty, &empty, &TermDist::ket0(), &empty, &TermDist::plus(), &sb)
            .unwrap();
        assert!(!r.holds);
        assert!((r.witness.unwrap().inner.norm() - Scalar::inv_sqrt2().norm()).abs() < 1e-12);
        let gamma = TypingContext::new().with("x", Basis::Ortho(computational()), tb());
        let l = TermDist::pair(&TermDist::var("x"), &TermDist::ket0());
        let r = TermDist::pair(&TermDist::var("x"), &TermDist::ket1());
        let rep = c
            .check_orthogonality(&gamma, &empty, &l, &empty, &r, &Type::product(tb(), tb()))
            .unwrap();
        assert!(rep.holds);
        assert_eq!(rep.pairs_checked, 4);
    }

    #[test]
    fn sum_needs_orthogonal_summands() {
        // Both summands reduce to |0>.
        let e = err("(1/sqrt2)*((\\x:B. x) |0>) + (1/sqrt2)*((\\x:B. |0>) |1>)", "#[B]");
        assert!(matches!(e, CheckError::Orthogonality { i: 0, j: 1, .. }), "{e}");
        ok("(1/sqrt2)*((\\x:B. x) |0>) + (1/sqrt2)*((\\x:B. |1>) |1>)", "#[B]");
    }

    #[test]
    fn subject_reduction_on_hadamard() {
        let t = parse_term(&format!("({HD}) |0>")).unwrap();
        let r = subject_reduction(&TypingContext::new(), &t, &Type::Basis(diagonal()));
        assert!(r.passed(), "{:?}", r.failure);
        assert_eq!(r.steps, 2);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn derivation_renders_and_serializes() {
        let d = ok(HD, "[B] -> [X]");
        let text = d.render();
        assert!(text.starts_with("UnitLam  ⊢ \\x:B. case x of"));
        assert!(text.contains("\n  Case  x^B:[B] ⊢ case x of"));
        let j = d.to_json();
        assert_eq!(j["rule"], "UnitLam");
        assert_eq!(j["premises"][0]["context"][0]["var"], "x");
    }
}
