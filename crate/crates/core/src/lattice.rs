//! Lattices in C: exact lattices inside K (coordinates over Q) and their
//! complex embeddings.

use crate::arith::{hnf_rows, left_kernel, IMat};
use crate::error::{reject, Result};
use crate::field::{Ideal, KElem, QuadField, QuadInt};
use crate::precision::PrecisionContext;
use rug::{Complex, Integer, Rational};

/// A rank-two lattice contained in K, with oriented basis (w1, w2), Im(w1/w2) > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QLattice {
    field: QuadField,
    w1: KElem,
    w2: KElem,
}

fn q2(field: QuadField, x: KElem) -> (Rational, Rational) {
    let _ = field;
    (Rational::from((x.num.x, x.den)), Rational::from((x.num.y, x.den)))
}

fn from_q2(x: &Rational, y: &Rational) -> KElem {
    let den = Integer::from(x.denom().lcm_ref(y.denom()));
    let nx = Integer::from(x.numer() * Integer::from(&den / x.denom()));
    let ny = Integer::from(y.numer() * Integer::from(&den / y.denom()));
    KElem::new(
        QuadInt::new(nx.to_i64().expect("coordinate fits"), ny.to_i64().expect("coordinate fits")),
        den.to_i64().expect("denominator fits"),
    )
}

impl QLattice {
    /// Lattice spanned by two elements, reoriented so that Im(w1/w2) > 0.
    pub fn new(field: QuadField, a: KElem, b: KElem) -> Result<QLattice> {
        let (ax, ay) = q2(field, a);
        let (bx, by) = q2(field, b);
        // Im(a/b) has the sign of Im(a * conj b) = (ay*bx - ax*by) * Im(omega)
        let det = Rational::from(&ay * &bx) - Rational::from(&ax * &by);
        if det == 0 {
            return reject("degenerate lattice basis");
        }
        if det > 0 {
            Ok(QLattice { field, w1: a, w2: b })
        } else {
            Ok(QLattice { field, w1: KElem::new(a.num.neg(), a.den), w2: b })
        }
    }

    pub fn from_ideal(i: &Ideal) -> QLattice {
        let [e1, e2] = i.basis();
        QLattice::new(i.field(), KElem::from_int(e2), KElem::from_int(e1)).expect("ideal has rank two")
    }

    pub fn ring(field: QuadField) -> QLattice {
        QLattice::from_ideal(&Ideal::unit(field))
    }

    /// The fractional ideal a^{-1} = conj(a) / N(a).
    pub fn inverse_ideal(i: &Ideal) -> QLattice {
        QLattice::from_ideal(&i.conj()).scale(KElem::new(QuadInt::ONE, i.norm()))
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn basis(&self) -> [KElem; 2] {
        [self.w1, self.w2]
    }

    pub fn scale(&self, l: KElem) -> QLattice {
        let f = self.field;
        QLattice::new(f, f.kmul(l, self.w1), f.kmul(l, self.w2)).expect("nonzero scale")
    }

    fn from_spanning(field: QuadField, gens: &[KElem]) -> Result<QLattice> {
        let den = gens.iter().fold(1i64, |a, g| crate::arith::lcm(a, g.den));
        let rows: IMat = gens
            .iter()
            .map(|g| {
                let k = den / g.den;
                vec![Integer::from(g.num.x * k), Integer::from(g.num.y * k)]
            })
            .collect();
        let h = hnf_rows(&rows);
        if h.len() != 2 {
            return reject("generators do not span a rank-two lattice");
        }
        let v: Vec<KElem> = h
            .iter()
            .map(|r| KElem::new(QuadInt::new(r[0].to_i64().unwrap(), r[1].to_i64().unwrap()), den))
            .collect();
        QLattice::new(field, v[0], v[1])
    }

    /// Product with an integral ideal (the lattice must be an O-module).
    pub fn mul_ideal(&self, i: &Ideal) -> QLattice {
        let f = self.field;
        let mut gens = Vec::new();
        for e in i.basis() {
            for w in [self.w1, self.w2] {
                gens.push(f.kmul(KElem::from_int(e), w));
            }
        }
        QLattice::from_spanning(f, &gens).expect("rank two")
    }

    /// Product of two lattices: the span of all products.
    pub fn mul_lattice(&self, o: &QLattice) -> QLattice {
        let f = self.field;
        let mut gens = Vec::new();
        for a in [self.w1, self.w2] {
            for b in [o.w1, o.w2] {
                gens.push(f.kmul(a, b));
            }
        }
        QLattice::from_spanning(f, &gens).expect("rank two")
    }

    pub fn sum(&self, o: &QLattice) -> QLattice {
        QLattice::from_spanning(self.field, &[self.w1, self.w2, o.w1, o.w2]).expect("rank two")
    }

    pub fn intersect(&self, o: &QLattice) -> QLattice {
        let den = [self.w1, self.w2, o.w1, o.w2].iter().fold(1i64, |a, g| crate::arith::lcm(a, g.den));
        let row = |g: &KElem, s: i64| {
            let k = den / g.den * s;
            vec![Integer::from(g.num.x * k), Integer::from(g.num.y * k)]
        };
        let m: IMat = vec![row(&self.w1, 1), row(&self.w2, 1), row(&o.w1, -1), row(&o.w2, -1)];
        let ker = left_kernel(&m);
        let gens: Vec<KElem> = ker
            .iter()
            .map(|k| {
                let a = k[0].to_i64().unwrap();
                let b = k[1].to_i64().unwrap();
                self.field.kadd(
                    self.field.kmul(KElem::from_int(QuadInt::from_int(a)), self.w1),
                    self.field.kmul(KElem::from_int(QuadInt::from_int(b)), self.w2),
                )
            })
            .collect();
        QLattice::from_spanning(self.field, &gens).expect("intersection has rank two")
    }

    /// Rational coordinates (r1, r2) with x = r1*w1 + r2*w2.
    pub fn coords(&self, x: KElem) -> (Rational, Rational) {
        let (a, b) = q2(self.field, self.w1);
        let (c, d) = q2(self.field, self.w2);
        let (x0, x1) = q2(self.field, x);
        // [a c; b d] [r1; r2] = [x0; x1]
        let det = Rational::from(&a * &d) - Rational::from(&b * &c);
        let r1 = (Rational::from(&x0 * &d) - Rational::from(&c * &x1)) / &det;
        let r2 = (Rational::from(&a * &x1) - Rational::from(&b * &x0)) / det;
        (r1, r2)
    }

    pub fn point(&self, r1: &Rational, r2: &Rational) -> KElem {
        let (a, b) = q2(self.field, self.w1);
        let (c, d) = q2(self.field, self.w2);
        let x = Rational::from(r1 * &a) + Rational::from(r2 * &c);
        let y = Rational::from(r1 * &b) + Rational::from(r2 * &d);
        from_q2(&x, &y)
    }

    pub fn contains(&self, x: KElem) -> bool {
        let (r1, r2) = self.coords(x);
        r1.is_integer() && r2.is_integer()
    }

    pub fn contains_lattice(&self, o: &QLattice) -> bool {
        self.contains(o.w1) && self.contains(o.w2)
    }

    /// Integer matrix of `sub`'s basis in this lattice's coordinates (columns).
    pub fn sub_matrix(&self, sub: &QLattice) -> Option<[[i64; 2]; 2]> {
        let (a, b) = self.coords(sub.w1);
        let (c, d) = self.coords(sub.w2);
        if !(a.is_integer() && b.is_integer() && c.is_integer() && d.is_integer()) {
            return None;
        }
        let g = |r: &Rational| r.numer().to_i64().unwrap();
        Some([[g(&a), g(&c)], [g(&b), g(&d)]])
    }

    /// [self : sub] for a sublattice.
    pub fn index_of(&self, sub: &QLattice) -> Option<i64> {
        let m = self.sub_matrix(sub)?;
        Some((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs())
    }

    /// Coset representatives of self / sub, as points of self, canonical order.
    pub fn coset_reps(&self, sub: &QLattice) -> Option<Vec<KElem>> {
        let m = self.sub_matrix(sub)?;
        // column Hermite form of the sublattice in these coordinates: columns (h11, 0), (h12, h22)
        let rows: IMat = vec![
            vec![Integer::from(m[1][0]), Integer::from(m[0][0])],
            vec![Integer::from(m[1][1]), Integer::from(m[0][1])],
        ];
        let h = hnf_rows(&rows);
        // h rows are (y, x) pairs: first row has y = h22, second row has y = 0, x = h11
        let h22 = h[0][0].to_i64().unwrap();
        let h11 = h[1][1].to_i64().unwrap();
        let mut out = Vec::with_capacity((h11 * h22) as usize);
        for k in 0..h22 {
            for i in 0..h11 {
                out.push(self.point(&Rational::from(i), &Rational::from(k)));
            }
        }
        Some(out)
    }

    /// Canonical representative of x modulo the lattice (coordinates in [0,1)).
    pub fn reduce(&self, x: KElem) -> KElem {
        let (r1, r2) = self.coords(x);
        let f1 = Rational::from(&r1 - r1.clone().floor());
        let f2 = Rational::from(&r2 - r2.clone().floor());
        self.point(&f1, &f2)
    }

    /// Reduced coordinates of x modulo the lattice, as a sortable key.
    pub fn reduced_key(&self, x: KElem) -> (Rational, Rational) {
        let (r1, r2) = self.coords(x);
        (Rational::from(&r1 - r1.clone().floor()), Rational::from(&r2 - r2.clone().floor()))
    }

    pub fn to_complex(&self, prec: u32) -> ComplexLattice {
        ComplexLattice {
            w1: self.field.kto_complex(self.w1, prec),
            w2: self.field.kto_complex(self.w2, prec),
        }
    }
}

/// Oriented complex lattice basis.
#[derive(Clone, Debug)]
pub struct ComplexLattice {
    pub w1: Complex,
    pub w2: Complex,
}

impl ComplexLattice {
    pub fn new(w1: Complex, w2: Complex) -> Result<Self> {
        let t = Complex::with_val(w1.prec().0, &w1 / &w2);
        if !(*t.imag() > 0) {
            return reject("basis is not oriented: Im(w1/w2) must be positive");
        }
        Ok(ComplexLattice { w1, w2 })
    }

    pub fn standard(tau: Complex) -> Result<Self> {
        let p = tau.prec().0;
        ComplexLattice::new(tau, Complex::with_val(p, 1))
    }

    pub fn prec(&self) -> u32 {
        self.w1.prec().0
    }

    pub fn tau(&self) -> Complex {
        Complex::with_val(self.prec(), &self.w1 / &self.w2)
    }

    /// Covolume Im(w1 * conj(w2)).
    pub fn covolume(&self) -> rug::Float {
        let c = Complex::with_val(self.prec(), self.w2.conj_ref());
        let p = Complex::with_val(self.prec(), &self.w1 * &c);
        p.imag().clone()
    }

    pub fn scale(&self, l: &Complex) -> ComplexLattice {
        ComplexLattice {
            w1: Complex::with_val(self.prec(), &self.w1 * l),
            w2: Complex::with_val(self.prec(), &self.w2 * l),
        }
    }

    /// Basis with tau in the standard fundamental domain, plus the integer
    /// matrix [[a, b], [c, d]] with (w1', w2') = (a w1 + b w2, c w1 + d w2).
    pub fn reduced(&self) -> (ComplexLattice, [[i64; 2]; 2]) {
        let p = self.prec();
        let mut w1 = self.w1.clone();
        let mut w2 = self.w2.clone();
        let mut m = [[1i64, 0], [0, 1]];
        for _ in 0..10_000 {
            let tau = Complex::with_val(p, &w1 / &w2);
            let n = tau.real().to_f64().round() as i64;
            if n != 0 {
                w1 -= Complex::with_val(p, &w2 * n);
                m[0][0] -= n * m[1][0];
                m[0][1] -= n * m[1][1];
            }
            let n1 = Complex::with_val(p, w1.norm_ref()).real().to_f64();
            let n2 = Complex::with_val(p, w2.norm_ref()).real().to_f64();
            if n1 < n2 * (1.0 - 1e-12) {
                // (w1, w2) <- (-w2, w1)
                let t = w1.clone();
                w1 = -w2;
                w2 = t;
                m = [[-m[1][0], -m[1][1]], [m[0][0], m[0][1]]];
            } else {
                break;
            }
        }
        (ComplexLattice { w1, w2 }, m)
    }

    /// Reduces z modulo the lattice into the parallelogram centred at 0,
    /// returning the reduced z and the integer coordinates removed.
    pub fn reduce_point(&self, z: &Complex) -> (Complex, (i64, i64)) {
        let p = self.prec().max(z.prec().0);
        let (r1, r2) = self.real_coords(z);
        let n1 = r1.round() as i64;
        let n2 = r2.round() as i64;
        let mut out = Complex::with_val(p, z);
        out -= Complex::with_val(p, &self.w1 * n1);
        out -= Complex::with_val(p, &self.w2 * n2);
        (out, (n1, n2))
    }

    /// Real coordinates (as f64) of z in this basis.
    pub fn real_coords(&self, z: &Complex) -> (f64, f64) {
        let p = self.prec();
        // z = r1 w1 + r2 w2; Im(z conj w2) = r1 Im(w1 conj w2)
        let vol = self.covolume();
        let c1 = Complex::with_val(p, self.w1.conj_ref());
        let c2 = Complex::with_val(p, self.w2.conj_ref());
        let zc2 = Complex::with_val(p, z * &c2);
        let zc1 = Complex::with_val(p, z * &c1);
        let r1 = rug::Float::with_val(p, zc2.imag() / &vol);
        let r2 = -rug::Float::with_val(p, zc1.imag() / &vol);
        (r1.to_f64(), r2.to_f64())
    }

    /// Real coordinates at full precision.
    pub fn real_coords_exact(&self, z: &Complex) -> (rug::Float, rug::Float) {
        let p = self.prec().max(z.prec().0);
        let vol = self.covolume();
        let c1 = Complex::with_val(p, self.w1.conj_ref());
        let c2 = Complex::with_val(p, self.w2.conj_ref());
        let zc2 = Complex::with_val(p, z * &c2);
        let zc1 = Complex::with_val(p, z * &c1);
        let r1 = rug::Float::with_val(p, zc2.imag() / &vol);
        let r2 = -rug::Float::with_val(p, zc1.imag() / &vol);
        (r1, r2)
    }

    pub fn point(&self, a: i64, b: i64) -> Complex {
        let p = self.prec();
        Complex::with_val(p, &self.w1 * a) + Complex::with_val(p, &self.w2 * b)
    }

    pub fn with_prec(&self, ctx: &PrecisionContext) -> ComplexLattice {
        ComplexLattice {
            w1: Complex::with_val(ctx.work(), &self.w1),
            w2: Complex::with_val(ctx.work(), &self.w2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_lattice_index_and_cosets() {
        let f = QuadField::new(-1).unwrap();
        let o = QLattice::ring(f);
        let p = Ideal::principal(f, QuadInt::new(2, 1)).unwrap();
        let l = QLattice::from_ideal(&p);
        assert_eq!(o.index_of(&l), Some(5));
        let reps = o.coset_reps(&l).unwrap();
        assert_eq!(reps.len(), 5);
        for i in 0..5 {
            for j in 0..i {
                assert!(!l.contains(f.ksub(reps[i], reps[j])));
            }
        }
        let inv = QLattice::inverse_ideal(&p);
        assert_eq!(inv.index_of(&o), Some(5));
    }

    #[test]
    fn sum_and_intersection() {
        let f = QuadField::new(-7).unwrap();
        let a = QLattice::from_ideal(&Ideal::from_int(f, 2).unwrap());
        let b = QLattice::from_ideal(&Ideal::from_int(f, 3).unwrap());
        let s = a.sum(&b);
        assert_eq!(s.index_of(&a), Some(4));
        let i = a.intersect(&b);
        assert_eq!(QLattice::ring(f).index_of(&i), Some(36));
    }

    #[test]
    fn reduction_keeps_the_lattice() {
        let l = ComplexLattice::new(Complex::with_val(128, (7.3, 0.2)), Complex::with_val(128, (1.0, 0.0))).unwrap();
        let (r, m) = l.reduced();
        let t = r.tau();
        assert!(t.real().to_f64().abs() <= 0.5 + 1e-12);
        assert!(t.imag().to_f64() > 0.0);
        assert!(Complex::with_val(128, t.abs_ref()).real().to_f64() >= 1.0 - 1e-12);
        assert_eq!((m[0][0] * m[1][1] - m[0][1] * m[1][0]), 1);
        let w1 = l.point(m[0][0], m[0][1]);
        assert!(crate::precision::dist(&w1, &r.w1) < 1e-30);
    }
}
