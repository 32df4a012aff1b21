//! Working precision, complex values with attached error bounds, and their
//! decimal serialization.

use rug::float::Round;
use rug::{Complex, Float};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub const DEFAULT_GUARD_BITS: u32 = 32;
pub const DEFAULT_TARGET_BITS: u32 = 128;
pub const MAX_TARGET_BITS: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionContext {
    pub target_bits: u32,
    pub guard_bits: u32,
}

impl PrecisionContext {
    pub fn new(target_bits: u32) -> Self {
        PrecisionContext { target_bits, guard_bits: DEFAULT_GUARD_BITS }
    }

    pub fn with_guard(target_bits: u32, guard_bits: u32) -> Self {
        PrecisionContext { target_bits, guard_bits }
    }

    /// Bits carried by intermediate values.
    pub fn work(&self) -> u32 {
        self.target_bits + self.guard_bits
    }

    /// Same context with doubled target precision.
    pub fn doubled(&self) -> Self {
        PrecisionContext { target_bits: 2 * self.target_bits, guard_bits: self.guard_bits }
    }

    /// 2^-(target + guard) as a small-precision float.
    pub fn tail_eps(&self) -> Float {
        Float::with_val(64, Float::i_exp(1, -(self.work() as i32)))
    }

    /// 2^-target.
    pub fn target_eps(&self) -> Float {
        Float::with_val(64, Float::i_exp(1, -(self.target_bits as i32)))
    }

    pub fn float(&self, x: f64) -> Float {
        Float::with_val(self.work(), x)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.work(), rug::float::Constant::Pi)
    }

    pub fn zero(&self) -> Complex {
        Complex::new(self.work())
    }

    pub fn complex(&self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.work(), (re, im))
    }

    /// 2 pi i.
    pub fn two_pi_i(&self) -> Complex {
        let p = self.pi() * 2u32;
        Complex::with_val(self.work(), (Float::new(self.work()), p))
    }
}

/// Complex value with an absolute error bound.
#[derive(Clone, Debug)]
pub struct CBall {
    pub value: Complex,
    pub err: Float,
}

impl CBall {
    pub fn new(value: Complex, err: Float) -> Self {
        CBall { value, err: Float::with_val(64, err) }
    }

    /// Attaches the rounding budget 2^-target * max(1, |v|) plus a truncation tail.
    pub fn with_rounding(value: Complex, tail: Float, ctx: &PrecisionContext) -> Self {
        let mag = abs_f(&value);
        let scale = if mag > 1 { mag } else { Float::with_val(64, 1) };
        let err = Float::with_val(64, &scale * &ctx.target_eps()) + tail;
        CBall { value, err: Float::with_val(64, err) }
    }

    pub fn exact(value: Complex) -> Self {
        CBall { value, err: Float::with_val(64, 0) }
    }

    pub fn abs(&self) -> Float {
        abs_f(&self.value)
    }

    pub fn re(&self) -> &Float {
        self.value.real()
    }

    pub fn im(&self) -> &Float {
        self.value.imag()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.value.real().to_f64(), self.value.imag().to_f64())
    }

    pub fn conj(&self) -> CBall {
        CBall { value: self.value.clone().conj(), err: self.err.clone() }
    }
}

impl Serialize for CBall {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 3)?;
        st.serialize_field("re", &decimal(self.value.real()))?;
        st.serialize_field("im", &decimal(self.value.imag()))?;
        st.serialize_field("err", &decimal_short(&self.err))?;
        st.end()
    }
}

pub fn abs_f(z: &Complex) -> Float {
    Float::with_val(64, Complex::with_val(z.prec().0, z.abs_ref()).real())
}

/// |a - b| in low precision.
pub fn dist(a: &Complex, b: &Complex) -> Float {
    let d = Complex::with_val(a.prec().0.max(b.prec().0), a - b);
    abs_f(&d)
}

/// |a - b| / |b| in low precision.
pub fn rel_dist(a: &Complex, b: &Complex) -> Float {
    let d = dist(a, b);
    let m = abs_f(b);
    if m == 0 {
        return d;
    }
    Float::with_val(64, d / m)
}

/// Decimal string with explicit exponent, enough digits to round-trip at the value's precision.
pub fn decimal(x: &Float) -> String {
    if x.is_zero() {
        return "0e0".to_string();
    }
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let s = x.to_string_radix_round(10, Some(digits), Round::Nearest);
    normalize_exponent(&s)
}

/// Short decimal string (error bounds).
pub fn decimal_short(x: &Float) -> String {
    if x.is_zero() {
        return "0e0".to_string();
    }
    let s = x.to_string_radix_round(10, Some(6), Round::Up);
    normalize_exponent(&s)
}

fn normalize_exponent(s: &str) -> String {
    if s.contains('e') {
        s.to_string()
    } else {
        format!("{s}e0")
    }
}

/// Parses a decimal string written by [`decimal`].
pub fn parse_decimal(s: &str, prec: u32) -> Option<Float> {
    Float::parse(s).ok().map(|p| Float::with_val(prec, p))
}

/// Binary exponent bound: is x below 2^e?
pub fn below_pow2(x: &Float, e: i32) -> bool {
    *x < Float::with_val(64, Float::i_exp(1, e))
}

pub fn pow2(e: i32) -> Float {
    Float::with_val(64, Float::i_exp(1, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        for prec in [64u32, 128, 256] {
            let x = Float::with_val(prec, rug::float::Constant::Pi) / 7u32 * 1e-30;
            let s = decimal(&x);
            assert!(s.contains('e'));
            let y = parse_decimal(&s, prec).unwrap();
            assert_eq!(x, y, "prec {prec}: {s}");
        }
        assert_eq!(decimal(&Float::new(64)), "0e0");
    }

    #[test]
    fn rounding_budget_scales_with_magnitude() {
        let ctx = PrecisionContext::new(64);
        let b = CBall::with_rounding(ctx.complex(1e10, 0.0), Float::new(64), &ctx);
        assert!(b.err > Float::with_val(64, 1e-10));
        let b = CBall::with_rounding(ctx.complex(1e-10, 0.0), Float::new(64), &ctx);
        assert!(b.err < Float::with_val(64, 1e-18));
    }
}
