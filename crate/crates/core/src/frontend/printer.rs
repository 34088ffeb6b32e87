//! Deterministic, re-parseable rendering of terms, bases and types.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use crate::basis::{Basis, OrthoBasis};
use crate::scalar::{eps, Scalar};
use crate::term::{PureTerm, TermDist, VarRef};
use crate::types::Type;

/// Formats a real number with at most 12 significant digits.
pub fn format_real(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round trip");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < eps()
}

/// Magnitude of a positive real coefficient, exact where possible.
fn format_magnitude(x: f64) -> String {
    if close(x, std::f64::consts::FRAC_1_SQRT_2) {
        "(1/sqrt2)".to_string()
    } else if close(x, 0.5) {
        "(1/2)".to_string()
    } else {
        format_real(x)
    }
}

/// Coefficient split into a sign and a printable prefix (empty for one).
fn coefficient(c: Scalar) -> (bool, String) {
    let (re, im) = (c.re(), c.im());
    if im.abs() < eps() {
        let neg = re < 0.0;
        let m = re.abs();
        if close(m, 1.0) {
            (neg, String::new())
        } else {
            (neg, format!("{}*", format_magnitude(m)))
        }
    } else if re.abs() < eps() {
        let neg = im < 0.0;
        let m = im.abs();
        if close(m, 1.0) {
            (neg, "i*".to_string())
        } else {
            (neg, format!("{}*i*", format_magnitude(m)))
        }
    } else {
        let sign = if im < 0.0 { '-' } else { '+' };
        (
            false,
            format!("({} {} {}*i)*", format_real(re), sign, format_real(im.abs())),
        )
    }
}

/// Renders a scalar on its own, as accepted by the scalar grammar.
pub fn format_scalar(c: Scalar) -> String {
    let (neg, prefix) = coefficient(c);
    let body = match prefix.strip_suffix('*') {
        Some(p) => p.to_string(),
        None => "1".to_string(),
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

struct Printer {
    /// Display names of enclosing binders, innermost last.
    scope: Vec<String>,
    /// Names that binder display names must avoid.
    reserved: BTreeSet<String>,
}

impl Printer {
    fn new(free: BTreeSet<String>) -> Printer {
        Printer {
            scope: Vec::new(),
            reserved: free,
        }
    }

    fn fresh(&self, hint: &str) -> String {
        let taken = |n: &str| self.reserved.contains(n) || self.scope.iter().any(|s| s == n);
        if !taken(hint) {
            return hint.to_string();
        }
        (1..)
            .map(|k| format!("{hint}{k}"))
            .find(|n| !taken(n))
            .expect("fresh name")
    }

    fn dist(&mut self, out: &mut String, d: &TermDist) {
        if d.is_zero() {
            out.push('0');
            return;
        }
        let multi = d.len() > 1;
        for (k, (t, c)) in d.iter().enumerate() {
            let (neg, prefix) = coefficient(*c);
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&prefix);
            let wrap = (multi || !prefix.is_empty()) && is_binder(t);
            self.pure_wrapped(out, t, wrap);
        }
    }

    fn pure_wrapped(&mut self, out: &mut String, t: &PureTerm, wrap: bool) {
        if wrap {
            out.push('(');
            self.pure(out, t);
            out.push(')');
        } else {
            self.pure(out, t);
        }
    }

    fn pure(&mut self, out: &mut String, t: &PureTerm) {
        if let Some(bits) = t.ket_bits() {
            out.push('|');
            out.extend(bits.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('>');
            return;
        }
        match t {
            PureTerm::Ket0 | PureTerm::Ket1 => unreachable!("handled as ket strings"),
            PureTerm::Var(VarRef::Free(n)) => out.push_str(n),
            PureTerm::Var(VarRef::Bound(i)) => {
                let idx = self.scope.len().checked_sub(1 + *i as usize);
                match idx {
                    Some(idx) => out.push_str(&self.scope[idx].clone()),
                    None => write!(out, "#{i}").unwrap(),
                }
            }
            PureTerm::Pair(a, b) => {
                out.push('(');
                self.pure(out, a);
                let mut rest = &**b;
                while let (PureTerm::Pair(l, r), None) = (rest, rest.ket_bits()) {
                    out.push_str(", ");
                    self.pure(out, l);
                    rest = r;
                }
                out.push_str(", ");
                self.pure(out, rest);
                out.push(')');
            }
            PureTerm::App(f, a) => {
                let wrap_f = is_binder(f);
                self.pure_wrapped(out, f, wrap_f);
                out.push(' ');
                let wrap_a = is_binder(a) || matches!(**a, PureTerm::App(..));
                self.pure_wrapped(out, a, wrap_a);
            }
            PureTerm::Lam(l) => {
                let x = self.fresh(&l.hint);
                write!(out, "\\{x}:").unwrap();
                basis(out, &l.basis);
                out.push_str(". ");
                self.scope.push(x);
                self.dist(out, &l.body);
                self.scope.pop();
            }
            PureTerm::LetPair(l) => {
                out.push_str("let (");
                let x = self.fresh(&l.hints.0);
                self.scope.push(x.clone());
                let y = self.fresh(&l.hints.1);
                self.scope.pop();
                write!(out, "{x}:").unwrap();
                basis(out, &l.bases.0);
                write!(out, ", {y}:").unwrap();
                basis(out, &l.bases.1);
                out.push_str(") = ");
                self.pure(out, &l.scrutinee);
                out.push_str(" in ");
                self.scope.push(x);
                self.scope.push(y);
                self.dist(out, &l.body);
                self.scope.pop();
                self.scope.pop();
            }
            PureTerm::Case(c) => {
                out.push_str("case ");
                self.pure(out, &c.scrutinee);
                out.push_str(" of { ");
                for (k, (p, b)) in c.patterns.elements().iter().zip(&c.branches).enumerate() {
                    if k > 0 {
                        out.push_str(" | ");
                    }
                    self.dist(out, p);
                    out.push_str(" -> ");
                    self.dist(out, b);
                }
                out.push_str(" }");
            }
        }
    }
}

fn is_binder(t: &PureTerm) -> bool {
    matches!(t, PureTerm::Lam(_) | PureTerm::LetPair(_) | PureTerm::Case(_))
}

fn basis(out: &mut String, b: &Basis) {
    match b {
        Basis::Abs => out.push_str("@fun"),
        Basis::Ortho(o) => ortho(out, o),
    }
}

fn ortho(out: &mut String, b: &OrthoBasis) {
    if let Some(label) = b.label() {
        out.push_str(label);
        return;
    }
    out.push_str("{ ");
    for (k, e) in b.elements().iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        out.push_str(&print_term(e));
    }
    out.push_str(" }");
}

pub fn print_term(d: &TermDist) -> String {
    let free = d.free_vars().iter().map(|n| n.to_string()).collect();
    let mut out = String::new();
    Printer::new(free).dist(&mut out, d);
    out
}

pub fn print_pure(t: &PureTerm) -> String {
    print_term(&TermDist::pure(t.clone()))
}

pub fn print_basis(b: &Basis) -> String {
    let mut out = String::new();
    basis(&mut out, b);
    out
}

pub fn print_type(t: &Type) -> String {
    let mut out = String::new();
    ty(&mut out, t);
    out
}

fn ty(out: &mut String, t: &Type) {
    match t {
        Type::Basis(b) => {
            out.push('[');
            ortho(out, b);
            out.push(']');
        }
        Type::Sharp(a) => {
            out.push('#');
            ty_atom(out, a);
        }
        Type::Product(a, b) => {
            if matches!(**a, Type::Product(..) | Type::Arrow(..)) {
                ty_atom_forced(out, a);
            } else {
                ty(out, a);
            }
            out.push_str(" * ");
            if matches!(**b, Type::Arrow(..)) {
                ty_atom_forced(out, b);
            } else {
                ty(out, b);
            }
        }
        Type::Arrow(a, b) => {
            if matches!(**a, Type::Arrow(..)) {
                ty_atom_forced(out, a);
            } else {
                ty(out, a);
            }
            out.push_str(" -> ");
            ty(out, b);
        }
    }
}

fn ty_atom(out: &mut String, t: &Type) {
    match t {
        Type::Basis(_) | Type::Sharp(_) => ty(out, t),
        _ => ty_atom_forced(out, t),
    }
}

fn ty_atom_forced(out: &mut String, t: &Type) {
    out.push('(');
    ty(out, t);
    out.push(')');
}

impl fmt::Display for TermDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for PureTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_pure(self))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_basis(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{computational, phi_plus};

    #[test]
    fn plus_prints_without_sugar() {
        assert_eq!(print_term(&TermDist::plus()), "(1/sqrt2)*|0> + (1/sqrt2)*|1>");
        assert_eq!(print_term(&TermDist::minus()), "(1/sqrt2)*|0> - (1/sqrt2)*|1>");
        assert_eq!(print_term(&phi_plus()), "(1/sqrt2)*|00> + (1/sqrt2)*|11>");
    }

    #[test]
    fn coefficients() {
        assert_eq!(print_term(&TermDist::ket1().scale(-Scalar::ONE)), "-|1>");
        assert_eq!(print_term(&TermDist::ket1().scale(Scalar::I)), "i*|1>");
        assert_eq!(print_term(&TermDist::ket1().scale(-Scalar::I)), "-i*|1>");
        assert_eq!(print_term(&TermDist::ket1().scale(Scalar::real(0.6))), "0.6*|1>");
        assert_eq!(
            print_term(&TermDist::ket1().scale(Scalar::new(0.6, -0.8))),
            "(0.6 - 0.8*i)*|1>"
        );
        assert_eq!(print_term(&TermDist::zero()), "0");
        assert_eq!(format_real(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn binders_and_shadowing() {
        let b = Basis::Ortho(computational());
        let inner = TermDist::lam(
            "x",
            b.clone(),
            &TermDist::pair(&TermDist::var("x"), &TermDist::var("y")),
        );
        let outer = TermDist::lam("y", b.clone(), &inner);
        assert_eq!(print_term(&outer), "\\y:B. \\x:B. (x, y)");
        // Bind an inner variable under the same hint as the outer one.
        let inner = TermDist::lam(
            "x",
            b.clone(),
            &TermDist::pair(&TermDist::var("x"), &TermDist::var("y")),
        );
        let inner = inner.substitute(&[("y".into(), &TermDist::var("x2"))]);
        let renamed = TermDist::lam("x2", b, &inner);
        let printed = print_term(&renamed);
        assert_eq!(printed, "\\x2:B. \\x:B. (x, x2)");
    }

    #[test]
    fn types() {
        let tb = Type::Basis(computational());
        let t = Type::arrow(
            Type::sharp(tb.clone()),
            Type::product(Type::sharp(tb.clone()), tb.clone()),
        );
        assert_eq!(print_type(&t), "#[B] -> #[B] * [B]");
        let t = Type::arrow(
            Type::arrow(tb.clone(), tb.clone()),
            Type::sharp(Type::product(tb.clone(), tb)),
        );
        assert_eq!(print_type(&t), "([B] -> [B]) -> #([B] * [B])");
    }
}
