use super::{KElem, QuadField, QuadInt};
use crate::arith::{factor, gcd, sqrt_mod};
use crate::error::{reject, Result};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Integral ideal with Hermite basis {a, b + c*omega}: c | a, c | b, 0 <= b < a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    field: QuadField,
    a: i64,
    b: i64,
    c: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSplitting {
    pub p: i64,
    pub kind: SplitKind,
    pub primes: Vec<Ideal>,
}

/// Hermite basis of the Z-span of vectors (x, y) meaning x + y*omega.
fn hnf2(vecs: &[(i128, i128)]) -> Option<(i64, i64, i64)> {
    fn g(a: i128, b: i128) -> i128 {
        let (mut a, mut b) = (a.abs(), b.abs());
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    fn eg(a: i128, b: i128) -> (i128, i128, i128) {
        let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i128, 0i128, 0i128, 1i128);
        while r1 != 0 {
            let q = r0.div_euclid(r1);
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 < 0 {
            (-r0, -s0, -t0)
        } else {
            (r0, s0, t0)
        }
    }
    let mut cur: Option<(i128, i128)> = None;
    let mut a: i128 = 0;
    for &(x, y) in vecs {
        if y == 0 {
            a = g(a, x);
            continue;
        }
        match cur {
            None => cur = Some((x, y)),
            Some((cx, cy)) => {
                let (gg, s, t) = eg(cy, y);
                let nx = s * cx + t * x;
                let zx = (y / gg) * cx - (cy / gg) * x;
                a = g(a, zx);
                cur = Some((nx, gg));
            }
        }
    }
    let (mut bx, mut c) = cur?;
    if c < 0 {
        bx = -bx;
        c = -c;
    }
    if a == 0 {
        return None;
    }
    let b = bx.rem_euclid(a);
    Some((a as i64, b as i64, c as i64))
}

impl Ideal {
    /// The ideal generated (as an O-module) by the given elements.
    pub fn from_generators(field: QuadField, gens: &[QuadInt]) -> Result<Ideal> {
        let mut vecs = Vec::with_capacity(gens.len() * 2);
        for &g in gens {
            let gw = field.mul(g, field.omega());
            vecs.push((g.x as i128, g.y as i128));
            vecs.push((gw.x as i128, gw.y as i128));
        }
        match hnf2(&vecs) {
            Some((a, b, c)) => Ok(Ideal { field, a, b, c }),
            None => reject("zero ideal"),
        }
    }

    pub fn principal(field: QuadField, g: QuadInt) -> Result<Ideal> {
        Ideal::from_generators(field, &[g])
    }

    pub fn unit(field: QuadField) -> Ideal {
        Ideal { field, a: 1, b: 0, c: 1 }
    }

    pub fn from_int(field: QuadField, n: i64) -> Result<Ideal> {
        Ideal::principal(field, QuadInt::from_int(n))
    }

    /// Builds an ideal from a Hermite matrix [[a, b], [0, c]], checking that it is an ideal.
    pub fn from_hnf(field: QuadField, a: i64, b: i64, c: i64) -> Result<Ideal> {
        if a <= 0 || c <= 0 {
            return reject("Hermite diagonal must be positive");
        }
        let cand = Ideal::from_generators(field, &[QuadInt::from_int(a), QuadInt::new(b, c)])?;
        if cand.norm() != a * c {
            return reject(format!("[[{a},{b}],[0,{c}]] is not an ideal basis"));
        }
        Ok(cand)
    }

    /// Z-span of two elements; used for lattices that are known to be ideals.
    pub(crate) fn from_zbasis(field: QuadField, e1: QuadInt, e2: QuadInt) -> Option<Ideal> {
        let (a, b, c) = hnf2(&[(e1.x as i128, e1.y as i128), (e2.x as i128, e2.y as i128)])?;
        Some(Ideal { field, a, b, c })
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn hnf(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [0, self.c]]
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.norm() == 1
    }

    /// Z-basis {a, b + c*omega}.
    pub fn basis(&self) -> [QuadInt; 2] {
        [QuadInt::new(self.a, 0), QuadInt::new(self.b, self.c)]
    }

    /// Smallest positive rational integer in the ideal.
    pub fn min_int(&self) -> i64 {
        self.a
    }

    pub fn mul(&self, o: &Ideal) -> Ideal {
        let f = self.field;
        let mut gens = Vec::with_capacity(4);
        for x in self.basis() {
            for y in o.basis() {
                gens.push(f.mul(x, y));
            }
        }
        let vecs: Vec<(i128, i128)> = gens.iter().map(|g| (g.x as i128, g.y as i128)).collect();
        let (a, b, c) = hnf2(&vecs).expect("product of nonzero ideals is nonzero");
        Ideal { field: f, a, b, c }
    }

    pub fn pow(&self, e: u32) -> Ideal {
        let mut r = Ideal::unit(self.field);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn add(&self, o: &Ideal) -> Ideal {
        let mut vecs = Vec::with_capacity(4);
        for x in self.basis().iter().chain(o.basis().iter()) {
            vecs.push((x.x as i128, x.y as i128));
        }
        let (a, b, c) = hnf2(&vecs).expect("sum of nonzero ideals is nonzero");
        Ideal { field: self.field, a, b, c }
    }

    pub fn conj(&self) -> Ideal {
        let f = self.field;
        let [e1, e2] = self.basis();
        Ideal::from_generators(f, &[f.conj(e1), f.conj(e2)]).expect("nonzero")
    }

    pub fn contains(&self, x: QuadInt) -> bool {
        if x.y % self.c != 0 {
            return false;
        }
        let k = x.y / self.c;
        (x.x - k * self.b) % self.a == 0
    }

    /// self | other, i.e. other is contained in self.
    pub fn divides(&self, other: &Ideal) -> bool {
        other.basis().iter().all(|&e| self.contains(e))
    }

    pub fn is_coprime(&self, other: &Ideal) -> bool {
        self.add(other).is_unit_ideal()
    }

    pub fn is_coprime_elem(&self, x: QuadInt) -> bool {
        if x.is_zero() {
            return self.is_unit_ideal();
        }
        gcd(self.field.norm(x), self.norm()) == 1
            || self.is_coprime(&Ideal::principal(self.field, x).expect("nonzero"))
    }

    /// Canonical residue of x modulo the ideal: x0 in [0, a), x1 in [0, c).
    pub fn reduce(&self, x: QuadInt) -> QuadInt {
        let k = x.y.div_euclid(self.c);
        let y = x.y - k * self.c;
        let xx = x.x - k * self.b;
        QuadInt::new(xx.rem_euclid(self.a), y)
    }

    pub fn congruent(&self, x: QuadInt, y: QuadInt) -> bool {
        self.contains(x.sub(y))
    }

    /// All residues of O modulo the ideal, in canonical order.
    pub fn residues(&self) -> Vec<QuadInt> {
        let mut v = Vec::with_capacity(self.norm() as usize);
        for y in 0..self.c {
            for x in 0..self.a {
                v.push(QuadInt::new(x, y));
            }
        }
        v
    }

    /// Invertible residues modulo the ideal.
    pub fn unit_residues(&self) -> Vec<QuadInt> {
        let primes: Vec<Ideal> = self.factorization().into_iter().map(|(p, _)| p).collect();
        self.residues()
            .into_iter()
            .filter(|&r| primes.iter().all(|p| !p.contains(r)))
            .collect()
    }

    /// Exact division by a rational integer dividing the ideal.
    pub fn div_int(&self, n: i64) -> Option<Ideal> {
        if self.a % n != 0 || self.b % n != 0 || self.c % n != 0 {
            return None;
        }
        let (a, b, c) = (self.a / n, self.b / n, self.c / n);
        Some(Ideal { field: self.field, a, b: b.rem_euclid(a), c })
    }

    /// Exact quotient self / p for a prime ideal p dividing self.
    pub fn div_prime(&self, p: &Ideal) -> Option<Ideal> {
        if !p.divides(self) {
            return None;
        }
        self.mul(&p.conj()).div_int(p.norm())
    }

    /// Exact quotient self / other when other divides self.
    pub fn div(&self, other: &Ideal) -> Option<Ideal> {
        if !other.divides(self) {
            return None;
        }
        let n = other.norm();
        self.mul(&other.conj()).div_int(n)
    }

    pub fn splitting(field: QuadField, p: i64) -> Result<PrimeSplitting> {
        if !crate::arith::is_prime(p) {
            return reject(format!("{p} is not prime"));
        }
        let t = field.omega_trace();
        let n = field.omega_norm();
        // roots of x^2 - t x + n mod p
        let roots: Vec<i64> = if p == 2 {
            (0..2).filter(|&r| (r * r - t * r + n).rem_euclid(2) == 0).collect()
        } else {
            let dd = (t * t - 4 * n).rem_euclid(p);
            match sqrt_mod(dd, p) {
                None => vec![],
                Some(s) => {
                    let inv2 = (p + 1) / 2;
                    let r1 = ((t + s) * inv2).rem_euclid(p);
                    let r2 = ((t - s) * inv2).rem_euclid(p);
                    if r1 == r2 {
                        vec![r1]
                    } else {
                        let mut v = vec![r1, r2];
                        v.sort();
                        v
                    }
                }
            }
        };
        let mk = |r: i64| Ideal::from_generators(field, &[QuadInt::from_int(p), QuadInt::new(-r, 1)]);
        let (kind, primes) = if field.disc() % p == 0 {
            (SplitKind::Ramified, vec![mk(roots[0])?])
        } else if roots.is_empty() {
            (SplitKind::Inert, vec![Ideal::from_int(field, p)?])
        } else {
            let mut v = vec![mk(roots[0])?, mk(roots[1])?];
            v.sort();
            (SplitKind::Split, v)
        };
        Ok(PrimeSplitting { p, kind, primes })
    }

    /// Prime factorization, primes ordered by norm then Hermite basis.
    pub fn factorization(&self) -> Vec<(Ideal, u32)> {
        let mut out = Vec::new();
        let mut rest = *self;
        for (p, _) in factor(self.norm()) {
            let sp = Ideal::splitting(self.field, p).expect("prime");
            for pr in sp.primes {
                let mut e = 0;
                while pr.divides(&rest) {
                    rest = rest.div_prime(&pr).expect("divisible");
                    e += 1;
                }
                if e > 0 {
                    out.push((pr, e));
                }
            }
        }
        debug_assert!(rest.is_unit_ideal());
        out.sort();
        out
    }

    pub fn prime_divisors(&self) -> Vec<Ideal> {
        self.factorization().into_iter().map(|(p, _)| p).collect()
    }

    pub fn is_prime(&self) -> bool {
        let f = self.factorization();
        f.len() == 1 && f[0].1 == 1
    }

    /// Valuation at a prime ideal of a nonzero integral element.
    pub fn valuation_int(p: &Ideal, x: QuadInt) -> i64 {
        assert!(!x.is_zero());
        let mut id = Ideal::principal(p.field, x).expect("nonzero");
        let mut v = 0;
        while p.divides(&id) {
            id = id.div_prime(p).expect("divisible");
            v += 1;
        }
        v
    }

    /// Valuation at a prime ideal of a nonzero element of K.
    pub fn valuation(p: &Ideal, x: KElem) -> i64 {
        let vnum = Ideal::valuation_int(p, x.num);
        let vden = Ideal::valuation_int(p, QuadInt::from_int(x.den));
        vnum - vden
    }

    /// Shortest nonzero vector of the ideal lattice under the norm form.
    pub fn shortest_vector(&self) -> QuadInt {
        let f = self.field;
        let [mut u, mut v] = self.basis();
        // Lagrange-Gauss reduction with the bilinear form B(x,y) = Tr(x * conj y)/2
        let bil2 = |x: QuadInt, y: QuadInt| -> i128 { f.trace(f.mul(x, f.conj(y))) as i128 };
        if f.norm(u) > f.norm(v) {
            std::mem::swap(&mut u, &mut v);
        }
        loop {
            let nu = 2 * f.norm(u) as i128;
            let bv = bil2(v, u);
            // round(B(v,u)/N(u)) = round(bv / nu)
            let q = ((2 * bv + nu).div_euclid(2 * nu)) as i64;
            v = v.sub(u.scale(q));
            if f.norm(v) < f.norm(u) {
                std::mem::swap(&mut u, &mut v);
            } else {
                break;
            }
        }
        u
    }

    /// Generator of a principal ideal, normalized among associates.
    pub fn generator(&self) -> Option<QuadInt> {
        let f = self.field;
        let s = self.shortest_vector();
        if f.norm(s) != self.norm() {
            return None;
        }
        f.units().into_iter().map(|u| f.mul(u, s)).max_by(|a, b| {
            // prefer positive x, then larger x, then smaller |y|
            (a.x, -a.y.abs(), a.y).cmp(&(b.x, -b.y.abs(), b.y))
        })
    }

    pub fn is_principal(&self) -> bool {
        self.generator().is_some()
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ideal {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.norm(), self.a, self.b, self.c).cmp(&(o.norm(), o.a, o.b, o.c))
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[0,{}]]", self.a, self.b, self.c)
    }
}

impl Serialize for Ideal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Ideal", 2)?;
        st.serialize_field("d", &self.field.d())?;
        st.serialize_field("hnf", &self.hnf())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi() -> QuadField {
        QuadField::new(-1).unwrap()
    }

    #[test]
    fn norms_of_basic_ideals() {
        let f = qi();
        assert_eq!(Ideal::principal(f, QuadInt::new(2, 1)).unwrap().norm(), 5);
        assert_eq!(Ideal::unit(f).norm(), 1);
        let g = QuadField::new(-5).unwrap();
        let p2 = Ideal::from_generators(g, &[QuadInt::from_int(2), QuadInt::new(1, 1)]).unwrap();
        assert_eq!(p2.norm(), 2);
        // brute-force index: count residues of a large box modulo the lattice
        let mut seen = std::collections::HashSet::new();
        for x in 0..8 {
            for y in 0..8 {
                seen.insert(p2.reduce(QuadInt::new(x, y)));
            }
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn splitting_over_gaussian_integers() {
        let f = qi();
        let s5 = Ideal::splitting(f, 5).unwrap();
        assert_eq!(s5.kind, SplitKind::Split);
        assert!(s5.primes.iter().all(|p| p.norm() == 5));
        assert_ne!(s5.primes[0], s5.primes[1]);
        let s2 = Ideal::splitting(f, 2).unwrap();
        assert_eq!(s2.kind, SplitKind::Ramified);
        assert_eq!(s2.primes[0].norm(), 2);
        let s3 = Ideal::splitting(f, 3).unwrap();
        assert_eq!(s3.kind, SplitKind::Inert);
        assert_eq!(s3.primes[0].norm(), 9);
    }

    #[test]
    fn factorization_reproduces_ideal() {
        let f = QuadField::new(-7).unwrap();
        let i = Ideal::principal(f, QuadInt::new(12, 5)).unwrap();
        let fac = i.factorization();
        let mut prod = Ideal::unit(f);
        for (p, e) in &fac {
            assert!(p.is_prime());
            prod = prod.mul(&p.pow(*e));
        }
        assert_eq!(prod, i);
    }

    #[test]
    fn generator_of_principal_ideal() {
        let f = qi();
        let i = Ideal::principal(f, QuadInt::new(3, 4)).unwrap();
        let g = i.generator().unwrap();
        assert_eq!(Ideal::principal(f, g).unwrap(), i);
        let g5 = QuadField::new(-5).unwrap();
        let p2 = Ideal::from_generators(g5, &[QuadInt::from_int(2), QuadInt::new(1, 1)]).unwrap();
        assert!(p2.generator().is_none());
    }

    #[test]
    fn reduce_is_canonical() {
        let f = QuadField::new(-7).unwrap();
        let i = Ideal::principal(f, QuadInt::new(3, 1)).unwrap();
        let x = QuadInt::new(17, -9);
        let r = i.reduce(x);
        assert!(i.congruent(x, r));
        let gen = QuadInt::new(3, 1);
        let y = x.add(f.mul(gen, QuadInt::new(-4, 7)));
        assert_eq!(i.reduce(y), r);
    }
}
