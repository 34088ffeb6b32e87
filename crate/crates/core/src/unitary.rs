//! Matrix extraction from basis-annotated abstractions and numerical
//! unitarity checks.

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::basis::{Basis, OrthoBasis};
use crate::eval::{eval, DEFAULT_FUEL};
use crate::frontend::format_scalar;
use crate::scalar::Scalar;
use crate::term::{qubit_width, PureTerm, TermDist};

/// Tolerance on entries of `M†M − I`.
pub const UNITARY_TOL: f64 = 1e-6;
const COLUMN_NORM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("not a closed abstraction over an orthonormal basis: {0}")]
    NotAbstraction(String),
    #[error("abstractions with different annotations")]
    MixedAnnotations,
    #[error("evaluation of f applied to input {index} failed: {message}")]
    Eval { index: usize, message: String },
    #[error("image of input {index} is not a qubit distribution: {image}")]
    NotQubit { index: usize, image: String },
    #[error("images have different widths ({expected} and {found} qubits)")]
    WidthMismatch { expected: usize, found: usize },
}

/// Columns are images of the input basis elements in computational
/// coordinates, big-endian in the ket bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedMatrix {
    pub input: OrthoBasis,
    pub qubits: usize,
    pub columns: Vec<Vec<Scalar>>,
}

impl ExtractedMatrix {
    pub fn rows(&self) -> usize {
        1 << self.qubits
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn entry(&self, row: usize, col: usize) -> Scalar {
        self.columns[col][row]
    }

    /// `M · x` for input coordinates `x` relative to the input basis.
    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(x.len(), self.cols(), "coordinate count");
        (0..self.rows())
            .map(|r| self.columns.iter().zip(x).map(|(col, &c)| col[r] * c).sum())
            .collect()
    }

    /// Gram matrix `M†M`.
    pub fn gram(&self) -> Vec<Vec<Scalar>> {
        self.columns
            .iter()
            .map(|a| {
                self.columns
                    .iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| x.conj() * *y).sum())
                    .collect()
            })
            .collect()
    }

    /// Rows as arrays of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.rows())
            .map(|r| {
                Value::Array(
                    (0..self.cols())
                        .map(|c| json!([self.entry(r, c).re(), self.entry(r, c).im()]))
                        .collect(),
                )
            })
            .collect();
        Value::Array(rows)
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| format_scalar(self.entry(r, c))).collect())
            .collect();
        let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
        cells
            .iter()
            .map(|row| {
                let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
                format!("[ {} ]", padded.join("  "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for ExtractedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Computational coordinates of a qubit distribution over `n` qubits.
pub fn computational_coordinates(v: &TermDist, n: usize) -> Option<Vec<Scalar>> {
    let mut out = vec![Scalar::ZERO; 1 << n];
    for (t, c) in v.iter() {
        let bits = t.qubit_bits()?;
        if bits.len() != n {
            return None;
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        out[index] += *c;
    }
    Some(out)
}

fn annotation(f: &TermDist) -> Result<OrthoBasis, ExtractError> {
    if !f.is_closed() {
        return Err(ExtractError::NotAbstraction(f.to_string()));
    }
    let mut basis: Option<&Basis> = None;
    for t in f.terms() {
        let PureTerm::Lam(l) = t else {
            return Err(ExtractError::NotAbstraction(f.to_string()));
        };
        match basis {
            None => basis = Some(&l.basis),
            Some(b) if *b != l.basis => return Err(ExtractError::MixedAnnotations),
            _ => {}
        }
    }
    match basis {
        Some(Basis::Ortho(b)) => Ok(b.clone()),
        _ => Err(ExtractError::NotAbstraction(f.to_string())),
    }
}

pub fn extract_matrix(f: &TermDist) -> Result<ExtractedMatrix, ExtractError> {
    let input = annotation(f)?;
    let mut qubits = None;
    let mut columns = Vec::with_capacity(input.len());
    for (index, b) in input.elements().iter().enumerate() {
        let trace = eval(&TermDist::app(f, b), DEFAULT_FUEL);
        let image = trace.normal_form().map_err(|e| ExtractError::Eval {
            index,
            message: e.to_string(),
        })?;
        let not_qubit = || ExtractError::NotQubit {
            index,
            image: image.to_string(),
        };
        let n = qubit_width(image).ok_or_else(not_qubit)?;
        if (image.norm() - 1.0).abs() >= COLUMN_NORM_TOL {
            return Err(not_qubit());
        }
        match qubits {
            None => qubits = Some(n),
            Some(expected) if expected != n => return Err(ExtractError::WidthMismatch { expected, found: n }),
            _ => {}
        }
        columns.push(computational_coordinates(image, n).ok_or_else(not_qubit)?);
    }
    let qubits = qubits.ok_or_else(|| ExtractError::NotAbstraction(f.to_string()))?;
    Ok(ExtractedMatrix { input, qubits, columns })
}

/// The entry of `M†M − I` with the largest modulus: the inner product of
/// two images, or a squared norm on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageOverlap {
    pub i: usize,
    pub j: usize,
    pub inner: Scalar,
}

impl fmt::Display for ImageOverlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨w{},w{}⟩ = {}", self.i, self.j, format_scalar(self.inner))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Square and `M†M = I` within tolerance.
    Unitary {
        max_deviation: f64,
    },
    /// Fewer inputs than output dimensions, with orthonormal images. Not
    /// unitary, and not a verdict on membership in `♯[X] ⇒ ♯[Y]`.
    Isometry {
        max_deviation: f64,
    },
    NotUnitary {
        square: bool,
        max_deviation: f64,
        witness: ImageOverlap,
    },
    NotExtractable(ExtractError),
}

impl Verdict {
    pub fn is_unitary(&self) -> bool {
        matches!(self, Verdict::Unitary { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Unitary { max_deviation } => write!(f, "unitary (max |M†M - I| = {max_deviation:.2e})"),
            Verdict::Isometry { max_deviation } => {
                write!(f, "isometry, not square (max |M†M - I| = {max_deviation:.2e})")
            }
            Verdict::NotUnitary { square, witness, .. } => {
                let what = if *square { "not unitary" } else { "not an isometry" };
                write!(f, "{what}: {witness}")
            }
            Verdict::NotExtractable(e) => write!(f, "not extractable: {e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryReport {
    pub matrix: Option<ExtractedMatrix>,
    pub verdict: Verdict,
}

impl UnitaryReport {
    pub fn to_json(&self) -> Value {
        let (verdict, deviation, witness) = match &self.verdict {
            Verdict::Unitary { max_deviation } => ("unitary", Some(*max_deviation), None),
            Verdict::Isometry { max_deviation } => ("isometry", Some(*max_deviation), None),
            Verdict::NotUnitary {
                max_deviation, witness, ..
            } => ("not_unitary", Some(*max_deviation), Some(witness)),
            Verdict::NotExtractable(_) => ("not_extractable", None, None),
        };
        json!({
            "verdict": verdict,
            "max_deviation": deviation,
            "witness": witness.map(|w| json!({"i": w.i, "j": w.j, "inner": [w.inner.re(), w.inner.im()]})),
            "message": self.verdict.to_string(),
            "matrix": self.matrix.as_ref().map(ExtractedMatrix::to_json),
        })
    }
}

pub fn check_unitary(f: &TermDist) -> UnitaryReport {
    let matrix = match extract_matrix(f) {
        Ok(m) => m,
        Err(e) => {
            return UnitaryReport {
                matrix: None,
                verdict: Verdict::NotExtractable(e),
            }
        }
    };
    let mut worst = ImageOverlap {
        i: 0,
        j: 0,
        inner: Scalar::ONE,
    };
    let mut max_deviation = 0.0;
    for (i, row) in matrix.gram().iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            let expected = if i == j { Scalar::ONE } else { Scalar::ZERO };
            let d = (g - expected).norm();
            if d > max_deviation {
                max_deviation = d;
                worst = ImageOverlap { i, j, inner: g };
            }
        }
    }
    let square = matrix.is_square();
    let verdict = match (max_deviation < UNITARY_TOL, square) {
        (true, true) => Verdict::Unitary { max_deviation },
        (true, false) => Verdict::Isometry { max_deviation },
        (false, _) => Verdict::NotUnitary {
            square,
            max_deviation,
            witness: worst,
        },
    };
    UnitaryReport {
        matrix: Some(matrix),
        verdict,
    }
}
