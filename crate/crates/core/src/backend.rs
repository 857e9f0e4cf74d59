//! Arithmetic backends.
//!
//! Every exact-combinatorics computation (root-of-unity tables, state sums,
//! tangle contraction) is generic over [`Real`]. Two implementations ship:
//! native `f64` and, behind the default `extended` feature, [`Mp`], an MPFR
//! float whose precision is chosen at run time with [`set_extended_precision`].
//!
//! Complex values are `num_complex::Complex<R>`; the helpers in this module
//! add the transcendental functions that `num_complex` only provides for
//! primitive floats.

use num_complex::Complex;
use num_traits::Num;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, RemAssign, SubAssign};

/// Tag identifying an arithmetic backend in metadata, caches and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// IEEE-754 binary64.
    Double,
    /// MPFR multiple precision.
    Extended,
}

impl Backend {
    /// Lower-case name used in file names and JSON.
    pub fn name(self) -> &'static str {
        match self {
            Backend::Double => "double",
            Backend::Extended => "extended",
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Real scalar contract for the generic modules.
pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + 'static
{
    /// Which backend this type implements.
    const BACKEND: Backend;

    /// Converts from a double (exactly, for both backends).
    fn from_f64(x: f64) -> Self;
    /// Converts from an integer (exactly).
    fn from_i64(n: i64) -> Self;
    /// Rounds to the nearest double.
    fn to_f64(&self) -> f64;
    /// π at the working precision.
    fn pi() -> Self;
    /// Square root.
    fn sqrt(&self) -> Self;
    /// Exponential.
    fn exp(&self) -> Self;
    /// Natural logarithm.
    fn ln(&self) -> Self;
    /// Sine.
    fn sin(&self) -> Self;
    /// Cosine.
    fn cos(&self) -> Self;
    /// Absolute value.
    fn abs(&self) -> Self;
    /// Four-quadrant arctangent of `self / x`.
    fn atan2(&self, x: &Self) -> Self;
    /// True unless NaN or infinite.
    fn is_finite(&self) -> bool;
    /// Unit roundoff of the working precision.
    fn epsilon() -> Self;
    /// Decimal digits carried by the working precision.
    fn decimal_digits() -> u32;
    /// Decimal representation that parses back to the identical value.
    fn to_repr(&self) -> String;
    /// Inverse of [`Real::to_repr`].
    fn from_repr(s: &str) -> Option<Self>;

    /// `sin(π a / d)` with exact argument reduction (`d > 0`).
    ///
    /// The angle is folded into `[0, π/2]` with integer arithmetic before any
    /// rounding happens, so values such as `sin(π (N-1)/N)` keep full
    /// relative accuracy.
    fn sin_pi_frac(a: i64, d: i64) -> Self {
        assert!(d > 0, "denominator must be positive");
        let big_d = 2 * d;
        let mut a2 = (2 * a).rem_euclid(2 * big_d);
        let mut negative = false;
        if a2 >= big_d {
            a2 -= big_d;
            negative = true;
        }
        if 2 * a2 > big_d {
            a2 = big_d - a2;
        }
        let value = if a2 == 0 {
            Self::zero()
        } else if 2 * a2 == big_d {
            Self::one()
        } else {
            (Self::pi() * Self::from_i64(a2) / Self::from_i64(big_d)).sin()
        };
        if negative {
            -value
        } else {
            value
        }
    }

    /// `cos(π a / d)` with exact argument reduction.
    fn cos_pi_frac(a: i64, d: i64) -> Self {
        Self::sin_pi_frac(2 * a + d, 2 * d)
    }
}

impl Real for f64 {
    const BACKEND: Backend = Backend::Double;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    fn decimal_digits() -> u32 {
        15
    }
    fn to_repr(&self) -> String {
        // `{:?}` prints the shortest string that round-trips.
        format!("{:?}", self)
    }
    fn from_repr(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

#[cfg(feature = "extended")]
pub use mp::{extended_precision, set_extended_precision, Mp};

#[cfg(feature = "extended")]
mod mp {
    //! MPFR-backed scalar with a process-wide working precision.

    use super::{Backend, Real};
    use num_traits::{Num, One, Zero};
    use rug::float::Constant;
    use rug::Float;
    use std::ops::{
        Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
    };
    use std::sync::atomic::{AtomicU32, Ordering};

    static PRECISION_BITS: AtomicU32 = AtomicU32::new(256);

    /// Sets the working precision (in bits) for values created afterwards.
    ///
    /// Values are not converted retroactively; callers set the precision once
    /// before building a context.
    pub fn set_extended_precision(bits: u32) {
        let bits = bits.clamp(64, 1 << 16);
        PRECISION_BITS.store(bits, Ordering::SeqCst);
    }

    /// Current working precision in bits.
    pub fn extended_precision() -> u32 {
        PRECISION_BITS.load(Ordering::Relaxed)
    }

    /// Multiple-precision real number.
    #[derive(Clone, Debug, PartialEq, PartialOrd)]
    pub struct Mp(pub Float);

    impl Mp {
        fn wrap<T>(value: T) -> Self
        where
            Float: rug::Assign<T>,
        {
            Mp(Float::with_val(extended_precision(), value))
        }
    }

    macro_rules! binop {
        ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
            impl $tr for Mp {
                type Output = Mp;
                fn $method(self, rhs: Mp) -> Mp {
                    Mp::wrap(&self.0 $op &rhs.0)
                }
            }
            impl<'a> $tr<&'a Mp> for Mp {
                type Output = Mp;
                fn $method(self, rhs: &'a Mp) -> Mp {
                    Mp::wrap(&self.0 $op &rhs.0)
                }
            }
            impl $atr for Mp {
                fn $amethod(&mut self, rhs: Mp) {
                    self.0 = Float::with_val(extended_precision(), &self.0 $op &rhs.0);
                }
            }
        };
    }

    binop!(Add, add, AddAssign, add_assign, +);
    binop!(Sub, sub, SubAssign, sub_assign, -);
    binop!(Mul, mul, MulAssign, mul_assign, *);
    binop!(Div, div, DivAssign, div_assign, /);

    impl Rem for Mp {
        type Output = Mp;
        fn rem(self, rhs: Mp) -> Mp {
            let quotient = Float::with_val(extended_precision(), &self.0 / &rhs.0).trunc();
            Mp::wrap(&self.0 - &Float::with_val(extended_precision(), &quotient * &rhs.0))
        }
    }

    impl RemAssign for Mp {
        fn rem_assign(&mut self, rhs: Mp) {
            *self = self.clone() % rhs;
        }
    }

    impl Neg for Mp {
        type Output = Mp;
        fn neg(self) -> Mp {
            Mp(-self.0)
        }
    }

    impl Zero for Mp {
        fn zero() -> Self {
            Mp::wrap(0)
        }
        fn is_zero(&self) -> bool {
            self.0.is_zero()
        }
    }

    impl One for Mp {
        fn one() -> Self {
            Mp::wrap(1)
        }
    }

    impl Num for Mp {
        type FromStrRadixErr = String;
        fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
            Float::parse_radix(s, radix as i32)
                .map(Mp::wrap)
                .map_err(|e| e.to_string())
        }
    }

    impl Real for Mp {
        const BACKEND: Backend = Backend::Extended;

        fn from_f64(x: f64) -> Self {
            Mp::wrap(x)
        }
        fn from_i64(n: i64) -> Self {
            Mp::wrap(n)
        }
        fn to_f64(&self) -> f64 {
            self.0.to_f64()
        }
        fn pi() -> Self {
            Mp::wrap(Constant::Pi)
        }
        fn sqrt(&self) -> Self {
            Mp::wrap(self.0.sqrt_ref())
        }
        fn exp(&self) -> Self {
            Mp::wrap(self.0.exp_ref())
        }
        fn ln(&self) -> Self {
            Mp::wrap(self.0.ln_ref())
        }
        fn sin(&self) -> Self {
            Mp::wrap(self.0.sin_ref())
        }
        fn cos(&self) -> Self {
            Mp::wrap(self.0.cos_ref())
        }
        fn abs(&self) -> Self {
            Mp::wrap(self.0.abs_ref())
        }
        fn atan2(&self, x: &Self) -> Self {
            Mp::wrap(self.0.atan2_ref(&x.0))
        }
        fn is_finite(&self) -> bool {
            self.0.is_finite()
        }
        fn epsilon() -> Self {
            let bits = extended_precision() as i32;
            Mp::wrap(Float::with_val(64, 1) >> bits)
        }
        fn decimal_digits() -> u32 {
            (extended_precision() as f64 * std::f64::consts::LOG10_2).floor() as u32
        }
        fn to_repr(&self) -> String {
            self.0.to_string_radix(10, None)
        }
        fn from_repr(s: &str) -> Option<Self> {
            Float::parse(s.trim()).ok().map(Mp::wrap)
        }
    }
}

/// Tag naming the backend of `R` and, for the extended backend, its current
/// precision (`double`, `extended-256`, …). Used to key cached values.
pub fn backend_tag<R: Real>() -> String {
    match R::BACKEND {
        Backend::Double => "double".to_string(),
        #[cfg(feature = "extended")]
        Backend::Extended => format!("extended-{}", extended_precision()),
        #[cfg(not(feature = "extended"))]
        Backend::Extended => "extended".to_string(),
    }
}

/// Complex number over a backend scalar.
pub type Cx<R> = Complex<R>;

/// Builds a complex number from two doubles.
pub fn cx<R: Real>(re: f64, im: f64) -> Cx<R> {
    Complex::new(R::from_f64(re), R::from_f64(im))
}

/// Modulus `|z|`, computed without intermediate overflow.
pub fn cabs<R: Real>(z: &Cx<R>) -> R {
    let a = z.re.abs();
    let b = z.im.abs();
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big.is_zero() {
        return big;
    }
    let ratio = small / big.clone();
    big * (R::one() + ratio.clone() * ratio).sqrt()
}

/// Principal argument in `(-π, π]`.
pub fn carg<R: Real>(z: &Cx<R>) -> R {
    z.im.atan2(&z.re)
}

/// Principal logarithm.
pub fn cln<R: Real>(z: &Cx<R>) -> Cx<R> {
    Complex::new(cabs(z).ln(), carg(z))
}

/// Complex exponential.
pub fn cexp<R: Real>(z: &Cx<R>) -> Cx<R> {
    let m = z.re.exp();
    Complex::new(m.clone() * z.im.cos(), m * z.im.sin())
}

/// True when both components are finite.
pub fn cfinite<R: Real>(z: &Cx<R>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Rounds to a double-precision complex number.
pub fn to_c64<R: Real>(z: &Cx<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Neumaier-compensated complex accumulator.
///
/// Each component keeps a running correction term so that mixed-phase sums
/// with large cancellation lose at most a few ulps beyond what the summands
/// themselves carry.
#[derive(Clone, Debug)]
pub struct CompensatedSum<R: Real> {
    sum: Cx<R>,
    comp: Cx<R>,
    magnitude: R,
}

impl<R: Real> Default for CompensatedSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> CompensatedSum<R> {
    /// Empty accumulator.
    pub fn new() -> Self {
        CompensatedSum {
            sum: Complex::new(R::zero(), R::zero()),
            comp: Complex::new(R::zero(), R::zero()),
            magnitude: R::zero(),
        }
    }

    fn add_part(sum: &mut R, comp: &mut R, x: R) {
        let t = sum.clone() + x.clone();
        if sum.abs() >= x.abs() {
            *comp += (sum.clone() - t.clone()) + x;
        } else {
            *comp += (x - t.clone()) + sum.clone();
        }
        *sum = t;
    }

    /// Adds one term.
    pub fn add(&mut self, x: Cx<R>) {
        self.magnitude += cabs(&x);
        Self::add_part(&mut self.sum.re, &mut self.comp.re, x.re);
        Self::add_part(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    /// Compensated total.
    pub fn total(&self) -> Cx<R> {
        Complex::new(
            self.sum.re.clone() + self.comp.re.clone(),
            self.sum.im.clone() + self.comp.im.clone(),
        )
    }

    /// Sum of the moduli of all added terms (for condition estimates).
    pub fn magnitude(&self) -> R {
        self.magnitude.clone()
    }
}
