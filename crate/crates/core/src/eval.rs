//! Deterministic weak reduction of closed term distributions.
//!
//! Each pure summand is decomposed into an evaluation context and a redex.
//! A step picks the canonically first summand that has a redex, gathers
//! every summand whose redex has the same head (the same abstraction, `let`
//! or `case` shell), adds up their arguments per context and fires the
//! head once on each combined argument. Combining is what lets a `case`
//! over a partial basis see a scrutinee such as `(|00> + |11>)/√2` whose
//! canonical form is split across two summands.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::basis::{Basis, OrthoBasis};
use crate::scalar::Scalar;
use crate::subst::{subst_bound, subst_bound_tensor, SubstError};
use crate::term::{Lambda, Name, PureTerm, TermDist, VarRef};

pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RuleTag {
    Beta,
    LetTensor,
    CaseMatch,
    CtxAppLeft,
    CtxAppRight,
    CtxPairLeft,
    CtxPairRight,
    CtxScalar,
    CtxSum,
    CtxLet,
    CtxCase,
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq, Serialize)]
pub enum StuckReason {
    #[error("argument not in annotation span")]
    NotInAnnotationSpan,
    #[error("case scrutinee outside pattern span")]
    CaseOutsideSpan,
    #[error("free variable")]
    FreeVariable,
    #[error("non-value in value position")]
    NonValue,
}

#[derive(Clone, Debug)]
pub enum StepResult {
    Reduced {
        next: TermDist,
        rule: RuleTag,
        /// Contexts crossed to reach the redex, outermost first.
        context: Vec<RuleTag>,
    },
    NormalForm(TermDist),
    Stuck {
        reason: StuckReason,
        subterm: TermDist,
    },
}

#[derive(Clone, Debug)]
enum Frame {
    AppLeft(PureTerm),
    AppRight(PureTerm),
    PairLeft(PureTerm),
    PairRight(PureTerm),
    Let {
        hints: (Name, Name),
        bases: (Basis, Basis),
        body: TermDist,
    },
    Case {
        patterns: OrthoBasis,
        branches: Vec<TermDist>,
    },
}

impl Frame {
    fn tag(&self) -> RuleTag {
        match self {
            Frame::AppLeft(_) => RuleTag::CtxAppLeft,
            Frame::AppRight(_) => RuleTag::CtxAppRight,
            Frame::PairLeft(_) => RuleTag::CtxPairLeft,
            Frame::PairRight(_) => RuleTag::CtxPairRight,
            Frame::Let { .. } => RuleTag::CtxLet,
            Frame::Case { .. } => RuleTag::CtxCase,
        }
    }

    fn same(&self, other: &Frame) -> bool {
        match (self, other) {
            (Frame::AppLeft(a), Frame::AppLeft(b))
            | (Frame::AppRight(a), Frame::AppRight(b))
            | (Frame::PairLeft(a), Frame::PairLeft(b))
            | (Frame::PairRight(a), Frame::PairRight(b)) => a == b,
            (
                Frame::Let {
                    bases: b1, body: t1, ..
                },
                Frame::Let {
                    bases: b2, body: t2, ..
                },
            ) => b1 == b2 && t1 == t2,
            (
                Frame::Case {
                    patterns: p1,
                    branches: r1,
                },
                Frame::Case {
                    patterns: p2,
                    branches: r2,
                },
            ) => p1 == p2 && r1 == r2,
            _ => false,
        }
    }

    fn plug(&self, hole: &TermDist) -> TermDist {
        match self {
            Frame::AppLeft(arg) => TermDist::app(hole, &TermDist::pure(arg.clone())),
            Frame::AppRight(fun) => TermDist::app(&TermDist::pure(fun.clone()), hole),
            Frame::PairLeft(right) => TermDist::pair(hole, &TermDist::pure(right.clone())),
            Frame::PairRight(left) => TermDist::pair(&TermDist::pure(left.clone()), hole),
            Frame::Let { hints, bases, body } => TermDist::let_raw(hints.clone(), bases.clone(), hole, body.clone()),
            Frame::Case { patterns, branches } => TermDist::case(hole, patterns.clone(), branches.clone()),
        }
    }
}

/// The head of a redex, without its argument.
#[derive(Clone, Debug)]
enum Shell {
    Beta(Lambda),
    Let {
        bases: (Basis, Basis),
        body: TermDist,
    },
    Case {
        patterns: OrthoBasis,
        branches: Vec<TermDist>,
    },
}

impl Shell {
    fn same(&self, other: &Shell) -> bool {
        match (self, other) {
            (Shell::Beta(a), Shell::Beta(b)) => a.basis == b.basis && a.body == b.body,
            (Shell::Let { bases: b1, body: t1 }, Shell::Let { bases: b2, body: t2 }) => b1 == b2 && t1 == t2,
            (
                Shell::Case {
                    patterns: p1,
                    branches: r1,
                },
                Shell::Case {
                    patterns: p2,
                    branches: r2,
                },
            ) => p1 == p2 && r1 == r2,
            _ => false,
        }
    }

    fn rule(&self) -> RuleTag {
        match self {
            Shell::Beta(_) => RuleTag::Beta,
            Shell::Let { .. } => RuleTag::LetTensor,
            Shell::Case { .. } => RuleTag::CaseMatch,
        }
    }

    fn fire(&self, arg: &TermDist) -> Result<TermDist, StuckReason> {
        match self {
            Shell::Beta(lam) => subst_bound(&lam.body, arg, &lam.basis).map_err(|_| StuckReason::NotInAnnotationSpan),
            Shell::Let { bases, body } => subst_bound_tensor(body, arg, &bases.0, &bases.1).map_err(|e| match e {
                SubstError::NotPairs => StuckReason::NonValue,
                _ => StuckReason::NotInAnnotationSpan,
            }),
            Shell::Case { patterns, branches } => {
                let d = patterns.decompose(arg).map_err(|_| StuckReason::CaseOutsideSpan)?;
                if !d.is_exact() {
                    return Err(StuckReason::CaseOutsideSpan);
                }
                let mut out = TermDist::zero();
                for (branch, c) in branches.iter().zip(d.coefficients) {
                    out.add_scaled(branch, c);
                }
                Ok(out)
            }
        }
    }
}

enum Focus {
    Value,
    Stuck(StuckReason, PureTerm),
    Redex {
        frames: Vec<Frame>,
        shell: Shell,
        arg: PureTerm,
    },
}

fn focus(term: &PureTerm) -> Focus {
    let mut frames = Vec::new();
    let mut cur = term;
    loop {
        match cur {
            PureTerm::Ket0 | PureTerm::Ket1 | PureTerm::Lam(_) => {
                return if frames.is_empty() {
                    Focus::Value
                } else {
                    unreachable!("focus only descends into non-values")
                };
            }
            PureTerm::Var(VarRef::Free(_)) | PureTerm::Var(VarRef::Bound(_)) => {
                return Focus::Stuck(StuckReason::FreeVariable, cur.clone());
            }
            PureTerm::Pair(a, b) => {
                if !a.is_value() {
                    frames.push(Frame::PairLeft((**b).clone()));
                    cur = a;
                } else if !b.is_value() {
                    frames.push(Frame::PairRight((**a).clone()));
                    cur = b;
                } else if frames.is_empty() {
                    return Focus::Value;
                } else {
                    unreachable!("focus only descends into non-values")
                }
            }
            PureTerm::App(f, a) => {
                if !a.is_value() {
                    frames.push(Frame::AppRight((**f).clone()));
                    cur = a;
                } else if !f.is_value() {
                    frames.push(Frame::AppLeft((**a).clone()));
                    cur = f;
                } else {
                    return match &**f {
                        PureTerm::Lam(lam) => Focus::Redex {
                            frames,
                            shell: Shell::Beta((**lam).clone()),
                            arg: (**a).clone(),
                        },
                        PureTerm::Var(_) => Focus::Stuck(StuckReason::FreeVariable, (**f).clone()),
                        _ => Focus::Stuck(StuckReason::NonValue, cur.clone()),
                    };
                }
            }
            PureTerm::LetPair(l) => {
                if !l.scrutinee.is_value() {
                    frames.push(Frame::Let {
                        hints: l.hints.clone(),
                        bases: l.bases.clone(),
                        body: l.body.clone(),
                    });
                    cur = &l.scrutinee;
                } else {
                    return Focus::Redex {
                        frames,
                        shell: Shell::Let {
                            bases: l.bases.clone(),
                            body: l.body.clone(),
                        },
                        arg: l.scrutinee.clone(),
                    };
                }
            }
            PureTerm::Case(c) => {
                if !c.scrutinee.is_value() {
                    frames.push(Frame::Case {
                        patterns: c.patterns.clone(),
                        branches: c.branches.clone(),
                    });
                    cur = &c.scrutinee;
                } else {
                    return Focus::Redex {
                        frames,
                        shell: Shell::Case {
                            patterns: c.patterns.clone(),
                            branches: c.branches.clone(),
                        },
                        arg: c.scrutinee.clone(),
                    };
                }
            }
        }
    }
}

struct Group {
    frames: Vec<Frame>,
    arg: TermDist,
}

fn plug_all(frames: &[Frame], hole: TermDist) -> TermDist {
    frames.iter().rev().fold(hole, |acc, f| f.plug(&acc))
}

fn outer_context(t: &TermDist, coeff: Scalar) -> Vec<RuleTag> {
    let mut ctx = Vec::new();
    if t.len() > 1 {
        ctx.push(RuleTag::CtxSum);
    }
    if !coeff.approx_eq(Scalar::ONE) {
        ctx.push(RuleTag::CtxScalar);
    }
    ctx
}

/// One reduction step. Assumes `t` is closed.
pub fn step(t: &TermDist) -> StepResult {
    let foci: Vec<(&PureTerm, Scalar, Focus)> = t.iter().map(|(p, c)| (p, *c, focus(p))).collect();
    let chosen = foci.iter().position(|(_, _, f)| matches!(f, Focus::Redex { .. }));
    let Some(chosen) = chosen else {
        return match foci.into_iter().find(|(_, _, f)| matches!(f, Focus::Stuck(..))) {
            Some((_, _, Focus::Stuck(reason, sub))) => StepResult::Stuck {
                reason,
                subterm: TermDist::pure(sub),
            },
            _ => StepResult::NormalForm(t.clone()),
        };
    };
    let (head_frames, head_shell) = match &foci[chosen].2 {
        Focus::Redex { frames, shell, .. } => (frames.clone(), shell.clone()),
        _ => unreachable!(),
    };
    let mut context = outer_context(t, foci[chosen].1);
    context.extend(head_frames.iter().map(Frame::tag));

    let mut groups: Vec<Group> = Vec::new();
    let mut rest = TermDist::zero();
    for (p, c, f) in &foci {
        match f {
            Focus::Redex { frames, shell, arg } if shell.same(&head_shell) => {
                let existing = groups
                    .iter_mut()
                    .find(|g| g.frames.len() == frames.len() && g.frames.iter().zip(frames).all(|(a, b)| a.same(b)));
                match existing {
                    Some(g) => g.arg.add_term(arg.clone(), *c),
                    None => groups.push(Group {
                        frames: frames.clone(),
                        arg: TermDist::scaled(arg.clone(), *c),
                    }),
                }
            }
            _ => rest.add_term((*p).clone(), *c),
        }
    }

    let mut next = rest;
    for g in &groups {
        match head_shell.fire(&g.arg) {
            Ok(reduced) => next.add_scaled(&plug_all(&g.frames, reduced), Scalar::ONE),
            Err(reason) => {
                return StepResult::Stuck {
                    reason,
                    subterm: redex_term(&head_shell, &g.arg),
                };
            }
        }
    }
    StepResult::Reduced {
        next,
        rule: head_shell.rule(),
        context,
    }
}

fn redex_term(shell: &Shell, arg: &TermDist) -> TermDist {
    match shell {
        Shell::Beta(lam) => TermDist::app(&TermDist::pure(PureTerm::Lam(Box::new(lam.clone()))), arg),
        Shell::Let { bases, body } => TermDist::let_raw(("x".into(), "y".into()), bases.clone(), arg, body.clone()),
        Shell::Case { patterns, branches } => TermDist::case(arg, patterns.clone(), branches.clone()),
    }
}

/// Reduces only the given summand (which must have a redex), leaving the
/// others untouched. Used to explore alternative reduction orders.
pub fn step_summand(t: &TermDist, summand: &PureTerm) -> Option<Result<TermDist, StuckReason>> {
    let coeff = t.coeff(summand);
    if coeff.is_zero() {
        return None;
    }
    match focus(summand) {
        Focus::Redex { frames, shell, arg } => Some(shell.fire(&TermDist::pure(arg)).map(|r| {
            let mut out = t.clone();
            out.add_term(summand.clone(), -coeff);
            out.add_scaled(&plug_all(&frames, r), coeff);
            out
        })),
        _ => None,
    }
}

/// Summands that currently contain a redex, in canonical order.
pub fn reducible_summands(t: &TermDist) -> Vec<PureTerm> {
    t.terms()
        .filter(|p| matches!(focus(p), Focus::Redex { .. }))
        .cloned()
        .collect()
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub term: TermDist,
    pub rule: RuleTag,
    pub context: Vec<RuleTag>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    NormalForm(TermDist),
    Stuck { reason: StuckReason, subterm: TermDist },
    FuelExhausted(usize),
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub start: TermDist,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    pub fuel_used: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("stuck: {reason}")]
    Stuck { reason: StuckReason, subterm: TermDist },
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(usize),
}

impl Trace {
    pub fn normal_form(&self) -> Result<&TermDist, EvalError> {
        match &self.outcome {
            Outcome::NormalForm(v) => Ok(v),
            Outcome::Stuck { reason, subterm } => Err(EvalError::Stuck {
                reason: *reason,
                subterm: subterm.clone(),
            }),
            Outcome::FuelExhausted(n) => Err(EvalError::FuelExhausted(*n)),
        }
    }

    /// Terms of the trace including the start, in order.
    pub fn terms(&self) -> impl Iterator<Item = &TermDist> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.term))
    }
}

pub fn eval(t: &TermDist, max_steps: usize) -> Trace {
    let mut trace = Trace {
        start: t.clone(),
        steps: Vec::new(),
        outcome: Outcome::FuelExhausted(max_steps),
        fuel_used: 0,
    };
    if let Some(x) = t.free_vars().into_iter().next() {
        trace.outcome = Outcome::Stuck {
            reason: StuckReason::FreeVariable,
            subterm: TermDist::pure(PureTerm::free(x)),
        };
        return trace;
    }
    let mut cur = t.clone();
    loop {
        match step(&cur) {
            StepResult::NormalForm(v) => {
                trace.outcome = Outcome::NormalForm(v);
                return trace;
            }
            StepResult::Stuck { reason, subterm } => {
                trace.outcome = Outcome::Stuck { reason, subterm };
                return trace;
            }
            StepResult::Reduced { next, rule, context } => {
                if trace.fuel_used == max_steps {
                    return trace;
                }
                trace.fuel_used += 1;
                trace.steps.push(TraceStep {
                    term: next.clone(),
                    rule,
                    context,
                });
                cur = next;
            }
        }
    }
}

/// Evaluates to a normal form with the default fuel.
pub fn normalize(t: &TermDist) -> Result<TermDist, EvalError> {
    eval(t, DEFAULT_FUEL).normal_form().cloned()
}
