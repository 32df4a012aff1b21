//! Imaginary quadratic fields: elements, ideals, class groups, ray class
//! groups and their characters.

mod abelian;
mod forms;
mod ideal;
mod ray;

pub use abelian::{AbelianGroup, GroupStructure};
pub use forms::{class_group, reduce_form, reduced_forms, ClassGroup, Form};
pub use ideal::{Ideal, PrimeSplitting, SplitKind};
pub use ray::{angle_to_complex, choose_f_m, ideals_up_to, totient, totient_brute, HeckeCharacter, IdeleRep, RayClassGroup, RhoConvention};

use crate::arith::{gcd, is_squarefree};
use crate::error::{reject, Result};
use rug::{Complex, Float};
use serde::Serialize;

/// An imaginary quadratic field Q(sqrt d), d < 0 squarefree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadField {
    d: i64,
    disc: i64,
    w: u32,
}

/// Integral element x + y*omega of the ring of integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadInt {
    pub x: i64,
    pub y: i64,
}

impl QuadInt {
    pub const ZERO: QuadInt = QuadInt { x: 0, y: 0 };
    pub const ONE: QuadInt = QuadInt { x: 1, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        QuadInt { x, y }
    }

    pub fn from_int(x: i64) -> Self {
        QuadInt { x, y: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn add(self, o: QuadInt) -> QuadInt {
        QuadInt::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: QuadInt) -> QuadInt {
        QuadInt::new(self.x - o.x, self.y - o.y)
    }

    pub fn neg(self) -> QuadInt {
        QuadInt::new(-self.x, -self.y)
    }

    pub fn scale(self, k: i64) -> QuadInt {
        QuadInt::new(self.x * k, self.y * k)
    }
}

/// Element of K written as num / den with den > 0 and content-free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KElem {
    pub num: QuadInt,
    pub den: i64,
}

impl KElem {
    pub fn new(num: QuadInt, den: i64) -> Self {
        assert!(den != 0);
        let s = if den < 0 { -1 } else { 1 };
        let g = gcd(gcd(num.x, num.y), den).max(1);
        KElem {
            num: QuadInt::new(s * num.x / g, s * num.y / g),
            den: s * den / g,
        }
    }

    pub fn from_int(n: QuadInt) -> Self {
        KElem::new(n, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 {
            return reject(format!("d = {d} must be negative"));
        }
        if !is_squarefree(d) {
            return reject(format!("d = {d} is not squarefree"));
        }
        let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
        let w = match disc {
            -4 => 4,
            -3 => 6,
            _ => 2,
        };
        Ok(QuadField { d, disc, w })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn w_k(&self) -> u32 {
        self.w
    }

    /// Trace of omega.
    pub fn omega_trace(&self) -> i64 {
        if self.d.rem_euclid(4) == 1 {
            1
        } else {
            0
        }
    }

    /// Norm of omega.
    pub fn omega_norm(&self) -> i64 {
        if self.d.rem_euclid(4) == 1 {
            (1 - self.d) / 4
        } else {
            -self.d
        }
    }

    pub fn mul(&self, a: QuadInt, b: QuadInt) -> QuadInt {
        let t = self.omega_trace() as i128;
        let n = self.omega_norm() as i128;
        let (a1, b1, a2, b2) = (a.x as i128, a.y as i128, b.x as i128, b.y as i128);
        let x = a1 * a2 - n * b1 * b2;
        let y = a1 * b2 + a2 * b1 + t * b1 * b2;
        QuadInt::new(
            i64::try_from(x).expect("overflow in field multiplication"),
            i64::try_from(y).expect("overflow in field multiplication"),
        )
    }

    pub fn pow(&self, a: QuadInt, e: u32) -> QuadInt {
        let mut r = QuadInt::ONE;
        for _ in 0..e {
            r = self.mul(r, a);
        }
        r
    }

    pub fn conj(&self, a: QuadInt) -> QuadInt {
        QuadInt::new(a.x + a.y * self.omega_trace(), -a.y)
    }

    pub fn norm(&self, a: QuadInt) -> i64 {
        let t = self.omega_trace() as i128;
        let n = self.omega_norm() as i128;
        let (x, y) = (a.x as i128, a.y as i128);
        i64::try_from(x * x + t * x * y + n * y * y).expect("overflow in norm")
    }

    pub fn trace(&self, a: QuadInt) -> i64 {
        2 * a.x + self.omega_trace() * a.y
    }

    pub fn omega(&self) -> QuadInt {
        QuadInt::new(0, 1)
    }

    /// Roots of unity of K.
    pub fn units(&self) -> Vec<QuadInt> {
        match self.w {
            4 => vec![
                QuadInt::new(1, 0),
                QuadInt::new(0, 1),
                QuadInt::new(-1, 0),
                QuadInt::new(0, -1),
            ],
            6 => {
                // omega = (1 + sqrt(-3))/2 is a primitive 6th root of unity
                let mut v = Vec::new();
                let mut u = QuadInt::ONE;
                for _ in 0..6 {
                    v.push(u);
                    u = self.mul(u, QuadInt::new(0, 1));
                }
                v
            }
            _ => vec![QuadInt::new(1, 0), QuadInt::new(-1, 0)],
        }
    }

    pub fn kmul(&self, a: KElem, b: KElem) -> KElem {
        KElem::new(self.mul(a.num, b.num), a.den * b.den)
    }

    pub fn kadd(&self, a: KElem, b: KElem) -> KElem {
        KElem::new(a.num.scale(b.den).add(b.num.scale(a.den)), a.den * b.den)
    }

    pub fn ksub(&self, a: KElem, b: KElem) -> KElem {
        self.kadd(a, KElem::new(b.num.neg(), b.den))
    }

    pub fn kinv(&self, a: KElem) -> KElem {
        assert!(!a.is_zero(), "inverse of zero");
        let n = self.norm(a.num);
        KElem::new(self.conj(a.num).scale(a.den), n)
    }

    pub fn kconj(&self, a: KElem) -> KElem {
        KElem::new(self.conj(a.num), a.den)
    }

    /// sqrt(d) in the embedding with positive imaginary part.
    pub fn sqrt_d(&self, prec: u32) -> Complex {
        let s = Float::with_val(prec, -self.d).sqrt();
        Complex::with_val(prec, (Float::new(prec), s))
    }

    /// sqrt(disc) in the chosen embedding.
    pub fn sqrt_disc(&self, prec: u32) -> Complex {
        let s = Float::with_val(prec, -self.disc).sqrt();
        Complex::with_val(prec, (Float::new(prec), s))
    }

    pub fn omega_complex(&self, prec: u32) -> Complex {
        let s = self.sqrt_d(prec);
        if self.omega_trace() == 1 {
            (s + 1u32) / 2u32
        } else {
            s
        }
    }

    pub fn to_complex(&self, a: QuadInt, prec: u32) -> Complex {
        let w = self.omega_complex(prec);
        w * a.y + a.x
    }

    pub fn kto_complex(&self, a: KElem, prec: u32) -> Complex {
        self.to_complex(a.num, prec) / a.den
    }

    pub fn name(&self) -> String {
        format!("Q(sqrt({}))", self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_basic_data() {
        let f = QuadField::new(-1).unwrap();
        assert_eq!((f.disc(), f.w_k()), (-4, 4));
        let f = QuadField::new(-3).unwrap();
        assert_eq!((f.disc(), f.w_k()), (-3, 6));
        let f = QuadField::new(-7).unwrap();
        assert_eq!((f.disc(), f.w_k()), (-7, 2));
        assert!(QuadField::new(-4).is_err());
        assert!(QuadField::new(5).is_err());
    }

    #[test]
    fn units_have_norm_one_and_close_under_mul() {
        for d in [-1, -3, -7, -5] {
            let f = QuadField::new(d).unwrap();
            let us = f.units();
            assert_eq!(us.len() as u32, f.w_k());
            for &u in &us {
                assert_eq!(f.norm(u), 1);
                for &v in &us {
                    assert!(us.contains(&f.mul(u, v)));
                }
            }
        }
    }

    #[test]
    fn complex_embedding_respects_multiplication() {
        let f = QuadField::new(-7).unwrap();
        let a = QuadInt::new(3, -2);
        let b = QuadInt::new(-1, 5);
        let lhs = f.to_complex(f.mul(a, b), 128);
        let rhs = f.to_complex(a, 128) * f.to_complex(b, 128);
        let diff = Complex::with_val(128, &lhs - &rhs).abs().real().to_f64();
        assert!(diff < 1e-30);
        let n = f.to_complex(a, 128).norm().real().to_f64();
        assert!((n - f.norm(a) as f64).abs() < 1e-20);
    }
}
