//! `.lb` program files: basis declarations, definitions and goals.
//!
//! ```text
//! basis BB = { |00>, |01>, |10>, |11> }
//! def Hd = \x:B. case x of { |0> -> |+> | |1> -> |-> }
//! goal Hd : [B] -> [X]            // derivable
//! goal Hd !: [B] -> [B]           // not derivable
//! goal Hd :: [B] -> [X]           // semantic membership
//! goal Hd |0> ~> |+>              // normal form, up to global phase
//! goal unitary Hd
//! goal nonunitary \x:B. |0>
//! goal subtype #[B] == #[X]       // also <= and !<=
//! ```

use crate::basis::OrthoBasis;
use crate::term::{canonicalize, TermDist};
use crate::types::Type;

use super::lexer::{Span, Tok};
use super::parser::Parser;
use super::{Env, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SubtypeRelation {
    Le,
    NotLe,
    Equiv,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GoalKind {
    Check {
        term: TermDist,
        ty: Type,
    },
    Reject {
        term: TermDist,
        ty: Type,
    },
    Member {
        term: TermDist,
        ty: Type,
    },
    Eval {
        term: TermDist,
        expected: TermDist,
    },
    Unitary(TermDist),
    NonUnitary(TermDist),
    Subtype {
        lhs: Type,
        rhs: Type,
        relation: SubtypeRelation,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    /// Source text of the goal with whitespace normalized.
    pub text: String,
    pub span: Span,
    pub kind: GoalKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub name: String,
    pub term: TermDist,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisDecl {
    pub name: String,
    pub basis: OrthoBasis,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct SourceProgram {
    pub bases: Vec<BasisDecl>,
    pub defs: Vec<Definition>,
    pub goals: Vec<Goal>,
    /// Environment after all declarations, for parsing further input.
    pub env: Env,
}

fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses a program on top of `base`, whose bases and definitions stay visible.
pub fn parse_program(src: &str, base: &Env) -> Result<SourceProgram, ParseError> {
    let mut program = SourceProgram::default();
    let mut p = Parser::new(src, base)?;
    loop {
        let start = p.span();
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::BasisKw => {
                p.bump();
                let name_span = p.span();
                let name = p.ident()?;
                if p.env_mut().bases.get(&name).is_some() {
                    return Err(p.error_at(name_span, format!("basis `{name}` already declared")));
                }
                p.expect(&Tok::Eq)?;
                let basis = p.ortho_basis()?;
                p.env_mut().bases.insert(&name, basis);
                let basis = p.env_mut().bases.get(&name).cloned().expect("just inserted");
                program.bases.push(BasisDecl {
                    name,
                    basis,
                    span: start,
                });
            }
            Tok::Def => {
                p.bump();
                let name_span = p.span();
                let name = p.ident()?;
                if p.env_mut().defs.contains_key(&name) {
                    return Err(p.error_at(name_span, format!("`{name}` already defined")));
                }
                p.expect(&Tok::Eq)?;
                let term = canonicalize(&p.term()?);
                if let Some(x) = term.free_vars().into_iter().next() {
                    return Err(p.error_at(name_span, format!("definition `{name}` has free variable `{x}`")));
                }
                p.env_mut().define(&name, term.clone());
                program.defs.push(Definition {
                    name,
                    term,
                    span: start,
                });
            }
            Tok::Goal => {
                p.bump();
                let kind = goal_kind(&mut p)?;
                let end = p.prev_span().end;
                let text = normalize_whitespace(&src[start.start..end]);
                program.goals.push(Goal {
                    text,
                    span: start,
                    kind,
                });
            }
            _ => return Err(p.unexpected("`basis`, `def` or `goal`")),
        }
    }
    program.env = p.into_env();
    Ok(program)
}

fn goal_kind(p: &mut Parser) -> Result<GoalKind, ParseError> {
    if let Tok::Ident(word) = p.peek().clone() {
        match word.as_str() {
            "unitary" | "nonunitary" => {
                p.bump();
                let t = canonicalize(&p.term()?);
                return Ok(if word == "unitary" {
                    GoalKind::Unitary(t)
                } else {
                    GoalKind::NonUnitary(t)
                });
            }
            "subtype" => {
                p.bump();
                let lhs = p.ty()?;
                let relation = match p.bump() {
                    Tok::Le => SubtypeRelation::Le,
                    Tok::NotLe => SubtypeRelation::NotLe,
                    Tok::EqEq => SubtypeRelation::Equiv,
                    _ => return Err(p.error_at(p.prev_span(), "expected `<=`, `!<=` or `==`")),
                };
                let rhs = p.ty()?;
                return Ok(GoalKind::Subtype { lhs, rhs, relation });
            }
            _ => {}
        }
    }
    let term = canonicalize(&p.term()?);
    match p.bump() {
        Tok::Colon => Ok(GoalKind::Check { term, ty: p.ty()? }),
        Tok::NotColon => Ok(GoalKind::Reject { term, ty: p.ty()? }),
        Tok::ColonColon => Ok(GoalKind::Member { term, ty: p.ty()? }),
        Tok::Leadsto => Ok(GoalKind::Eval {
            term,
            expected: canonicalize(&p.term()?),
        }),
        _ => Err(p.error_at(p.prev_span(), "expected `:`, `!:`, `::` or `~>` after goal term")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_term;

    #[test]
    fn declarations_and_goals() {
        let src = "
            basis BB = { |00>, |01>, |10>, |11> }
            def Hd = \\x:B. case x of { |0> -> |+> | |1> -> |-> }
            def H2 = \\x:BB. x
            goal Hd   |0> ~> |+>
            goal Hd : [B] -> [X]
            goal subtype #[B] == #[X]
            goal unitary Hd
        ";
        let p = parse_program(src, &Env::default()).unwrap();
        assert_eq!(p.bases.len(), 1);
        assert_eq!(p.defs.len(), 2);
        assert_eq!(p.goals.len(), 4);
        assert_eq!(p.goals[0].text, "goal Hd |0> ~> |+>");
        assert_eq!(p.goals[0].span.line, 5);
        match &p.goals[0].kind {
            GoalKind::Eval { expected, .. } => assert_eq!(*expected, parse_term("|+>").unwrap()),
            k => panic!("unexpected goal {k:?}"),
        }
        assert!(matches!(
            p.goals[2].kind,
            GoalKind::Subtype {
                relation: SubtypeRelation::Equiv,
                ..
            }
        ));
    }

    #[test]
    fn names_must_be_unique_and_closed() {
        let e = parse_program("def A = |0>\ndef A = |1>", &Env::default()).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_program("basis B = { |1>, |0> }", &Env::default()).unwrap_err();
        assert!(e.message.contains("already declared"));
        let e = parse_program("def F = \\x:B. y", &Env::default()).unwrap_err();
        assert!(e.message.contains("free variable `y`"));
    }
}
