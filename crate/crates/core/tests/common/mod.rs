//! Test support: a small state-vector simulator and random generators.

#![allow(dead_code)]

use lambdab::basis::{bell, computational, diagonal, Basis, OrthoBasis};
use lambdab::frontend::{parse_term_in, Env};
use lambdab::scalar::Scalar;
use lambdab::term::{Expr, PureTerm, TermDist};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Amplitudes over `n` qubits, qubit 0 being the most significant bit.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis_state(bits: &[bool]) -> StateVector {
        let n = bits.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index(bits)] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_qubit(a: Complex64, b: Complex64) -> StateVector {
        StateVector { n: 1, amps: vec![a, b] }
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector {
            n: self.n + other.n,
            amps,
        }
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub fn apply1(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(q);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply1(q, [[s, s], [s, -s]]);
    }

    pub fn x(&mut self, q: usize) {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        self.apply1(q, [[o, l], [l, o]]);
    }

    pub fn z(&mut self, q: usize) {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        self.apply1(q, [[l, o], [o, -l]]);
    }

    /// Applies a permutation of basis states.
    pub fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[f(i)] += a;
        }
        self.amps = out;
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (self.mask(control), self.mask(target));
        self.permute(|i| if i & c != 0 { i ^ t } else { i });
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let (ma, mb) = (self.mask(a), self.mask(b));
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & ma != 0 && i & mb != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let mask = self.mask(q);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

pub fn index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Outcome bit of the textbook Deutsch circuit for `f : {0,1} → {0,1}`.
pub fn simulate_deutsch(f: [bool; 2]) -> (bool, f64) {
    let mut s = StateVector::basis_state(&[false, true]);
    s.h(0);
    s.h(1);
    // U_f |x y> = |x, y ⊕ f(x)>
    s.permute(|i| {
        let (x, y) = (i >> 1, i & 1);
        (x << 1) | (y ^ usize::from(f[x]))
    });
    s.h(0);
    let p = s.prob_one(0);
    (p > 0.5, p)
}

/// Teleportation circuit with measurements deferred into controlled
/// corrections, then the two measured qubits mapped back to Bell states.
pub fn simulate_teleport(a: Complex64, b: Complex64) -> StateVector {
    let mut s = StateVector::from_qubit(a, b).tensor(&StateVector::basis_state(&[false, false]));
    s.h(2);
    s.cnot(2, 1);
    s.cnot(0, 1);
    s.h(0);
    s.cnot(1, 2);
    s.cz(0, 2);
    s.h(0);
    s.cnot(0, 1);
    s
}

pub fn to_complex(c: Scalar) -> Complex64 {
    Complex64::new(c.re(), c.im())
}

pub fn random_scalar(rng: &mut impl Rng) -> Scalar {
    Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_phase(rng: &mut impl Rng) -> Scalar {
    Scalar::phase(rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random unit coefficient vector of length `k`.
pub fn random_unit_coefficients(rng: &mut impl Rng, k: usize) -> Vec<Scalar> {
    loop {
        let cs: Vec<Scalar> = (0..k).map(|_| random_scalar(rng)).collect();
        let norm: f64 = cs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return cs.into_iter().map(|c| c * (1.0 / norm)).collect();
        }
    }
}

/// A random unit vector in the span of `basis`, with its coordinates.
pub fn random_unit_in(rng: &mut impl Rng, basis: &OrthoBasis) -> (TermDist, Vec<Scalar>) {
    let cs = random_unit_coefficients(rng, basis.len());
    (basis.recompose(&cs), cs)
}

pub fn one_qubit_bases() -> Vec<OrthoBasis> {
    vec![computational(), diagonal()]
}

/// Bases over one and two qubits, including products and Bell.
pub fn sample_bases() -> Vec<OrthoBasis> {
    let (b, x) = (computational(), diagonal());
    vec![
        b.clone(),
        x.clone(),
        bell(),
        b.product(&b),
        x.product(&x),
        b.product(&x),
        x.product(&bell()),
    ]
}

/// Rewrites a canonical distribution into an equivalent raw expression:
/// summands reordered, coefficients split, scalars pushed into pairs and
/// applications, zero terms inserted.
pub fn shuffle(rng: &mut impl Rng, t: &TermDist) -> Expr {
    let mut parts: Vec<Expr> = Vec::new();
    for (p, &c) in t.iter() {
        let pieces = if rng.gen_bool(0.5) {
            let c2 = random_scalar(rng);
            vec![c - c2, c2]
        } else {
            vec![c]
        };
        for c in pieces {
            parts.push(scaled_into(rng, p, c));
        }
    }
    if rng.gen_bool(0.3) {
        parts.push(Expr::Zero);
    }
    if rng.gen_bool(0.3) {
        parts.push(Expr::Scale(Scalar::ZERO, Box::new(Expr::Ket1)));
    }
    parts.shuffle(rng);
    Expr::Sum(parts)
}

fn pure(p: &PureTerm) -> Expr {
    Expr::Dist(TermDist::pure(p.clone()))
}

fn scaled_into(rng: &mut impl Rng, p: &PureTerm, c: Scalar) -> Expr {
    let scale = |e: Expr| Expr::Scale(c, Box::new(e));
    match p {
        PureTerm::Pair(l, r) if rng.gen_bool(0.5) => {
            if rng.gen_bool(0.5) {
                Expr::Pair(Box::new(scale(pure(l))), Box::new(pure(r)))
            } else {
                Expr::Pair(Box::new(pure(l)), Box::new(scale(pure(r))))
            }
        }
        PureTerm::App(f, a) if rng.gen_bool(0.5) => Expr::App(Box::new(pure(f)), Box::new(scale(pure(a)))),
        _ => scale(pure(p)),
    }
}

/// Definitions of the shipped corpus.
pub fn corpus_env() -> Env {
    lambdab::corpus::shipped_program().env
}

pub fn term(env: &Env, src: &str) -> TermDist {
    parse_term_in(src, env).unwrap_or_else(|e| panic!("{src}: {e}"))
}

const ONE_QUBIT_GATES: &[&str] = &["Hd", "NOT", "Z", "ZX", "Zx", "Xx"];

/// A random closed one-qubit program built from corpus gates.
pub fn random_one_qubit(rng: &mut impl Rng, env: &Env, depth: usize) -> TermDist {
    if depth == 0 || rng.gen_bool(0.3) {
        let basis = one_qubit_bases().choose(rng).cloned().unwrap();
        return if rng.gen_bool(0.5) {
            basis.elements().choose(rng).cloned().unwrap()
        } else {
            random_unit_in(rng, &basis).0
        };
    }
    let gate = term(env, ONE_QUBIT_GATES.choose(rng).unwrap());
    TermDist::app(&gate, &random_one_qubit(rng, env, depth - 1))
}

/// A random closed two-qubit program built from corpus gates.
pub fn random_two_qubit(rng: &mut impl Rng, env: &Env, depth: usize) -> TermDist {
    let d = depth.saturating_sub(1);
    match rng.gen_range(0..4) {
        0 => TermDist::pair(&random_one_qubit(rng, env, d), &random_one_qubit(rng, env, d)),
        1 => {
            let cnot = term(env, "CNOT");
            TermDist::app(
                &TermDist::app(&cnot, &random_one_qubit(rng, env, d)),
                &random_one_qubit(rng, env, d),
            )
        }
        2 if depth > 0 => {
            let gate = ONE_QUBIT_GATES.choose(rng).unwrap();
            let body = term(env, &format!("\\s:BB. let (x:B, y:B) = s in ({gate} x, y)"));
            TermDist::app(&body, &random_two_qubit(rng, env, d))
        }
        _ => {
            let (b, _) = random_unit_in(rng, &computational().product(&computational()));
            TermDist::app(&term(env, "CNOT2"), &b)
        }
    }
}

pub fn ortho(b: &OrthoBasis) -> Basis {
    Basis::Ortho(b.clone())
}
