//! Complex amplitudes with tolerance-based comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_complex::Complex64;

pub const DEFAULT_EPS: f64 = 1e-9;

// Zero means "unset".
static EPS_BITS: AtomicU64 = AtomicU64::new(0);

/// Current comparison tolerance.
pub fn eps() -> f64 {
    match EPS_BITS.load(AtomicOrdering::Relaxed) {
        0 => DEFAULT_EPS,
        bits => f64::from_bits(bits),
    }
}

/// Sets the process-wide tolerance. Intended to be called once at startup.
pub fn set_eps(value: f64) {
    assert!(value.is_finite() && value > 0.0, "tolerance must be positive");
    EPS_BITS.store(value.to_bits(), AtomicOrdering::Relaxed);
}

/// A complex amplitude. Equality holds when the distance is below [`eps`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Scalar(Complex64);

impl Scalar {
    pub const ZERO: Scalar = Scalar(Complex64::new(0.0, 0.0));
    pub const ONE: Scalar = Scalar(Complex64::new(1.0, 0.0));
    pub const I: Scalar = Scalar(Complex64::new(0.0, 1.0));

    pub fn new(re: f64, im: f64) -> Scalar {
        assert!(re.is_finite() && im.is_finite(), "non-finite amplitude");
        Scalar(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    pub fn inv_sqrt2() -> Scalar {
        Scalar::real(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `e^{i theta}`
    pub fn phase(theta: f64) -> Scalar {
        Scalar::new(theta.cos(), theta.sin())
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn complex(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Scalar {
        Scalar(self.0.conj())
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn arg(self) -> f64 {
        self.0.arg()
    }

    pub fn is_zero(self) -> bool {
        self.norm() < eps()
    }

    pub fn approx_eq(self, other: Scalar) -> bool {
        (self.0 - other.0).norm() < eps()
    }

    pub fn approx_eq_tol(self, other: Scalar, tol: f64) -> bool {
        (self.0 - other.0).norm() < tol
    }

    /// Total order that treats values within tolerance as equal.
    pub fn tolerant_cmp(self, other: Scalar) -> Ordering {
        if self.approx_eq(other) {
            return Ordering::Equal;
        }
        let tol = eps();
        if (self.0.re - other.0.re).abs() >= tol {
            self.0.re.total_cmp(&other.0.re)
        } else {
            self.0.im.total_cmp(&other.0.im)
        }
    }
}

impl From<Complex64> for Scalar {
    fn from(value: Complex64) -> Self {
        Scalar::new(value.re, value.im)
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Scalar::real(value)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(*other)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar::from(self.0 $op rhs.0)
            }
        }
        impl $trait<f64> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: f64) -> Scalar {
                Scalar::from(self.0 $op rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self = *self + rhs;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im == 0.0 {
            write!(f, "{}", self.0.re)
        } else {
            write!(f, "{}{:+}i", self.0.re, self.0.im)
        }
    }
}
