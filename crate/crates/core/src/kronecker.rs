//! Eisenstein-Kronecker lattice sums on torsion divisors and the lattice-sum
//! expression for L'(chi, -j).

use crate::error::{reject, Error, Result};
use crate::field::{
    angle_to_complex, choose_f_m, totient, HeckeCharacter, Ideal, IdeleRep, KElem, QuadField, RayClassGroup,
    RhoConvention,
};
use crate::lattice::{ComplexLattice, QLattice};
use crate::precision::{abs_f, CBall, PrecisionContext};
use crate::special::gamma_upper_int;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;
use std::sync::Arc;

/// A(L) = Im(w1 conj w2) / pi.
pub fn area_invariant(l: &ComplexLattice) -> Float {
    let p = l.prec();
    l.covolume() / Float::with_val(p, Constant::Pi)
}

/// (z, gamma) = exp(A^{-1}(z conj(gamma) - conj(z) gamma)) = exp(2 pi i Im(z conj gamma) / V).
pub fn pontryagin_pairing(z: &Complex, gamma: &Complex, l: &ComplexLattice) -> Complex {
    let p = l.prec().max(z.prec().0);
    let gc = Complex::with_val(p, gamma.conj_ref());
    let prod = Complex::with_val(p, z * &gc);
    let t = Float::with_val(p, prod.imag() / l.covolume());
    let ang = t * Float::with_val(p, Constant::Pi) * 2u32;
    let (s, c) = ang.sin_cos(Float::new(p));
    Complex::with_val(p, (c, s))
}

/// A point of C/L given by rational coordinates in the lattice basis, with
/// a rational multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorPoint {
    pub r1: Rational,
    pub r2: Rational,
    pub mult: Rational,
}

/// Formal Q-linear combination of torsion points of C/L.
#[derive(Clone, Debug)]
pub struct TorsionDivisor {
    pub lattice: ComplexLattice,
    pub points: Vec<DivisorPoint>,
}

fn frac(r: &Rational) -> Rational {
    Rational::from(r - r.clone().floor())
}

impl TorsionDivisor {
    pub fn zero_divisor(lattice: ComplexLattice) -> Self {
        TorsionDivisor { lattice, points: Vec::new() }
    }

    /// The divisor (x) for x = r1 w1 + r2 w2.
    pub fn point(lattice: ComplexLattice, r1: Rational, r2: Rational) -> Self {
        let mut d = TorsionDivisor::zero_divisor(lattice);
        d.add_point(r1, r2, Rational::from(1));
        d
    }

    /// The divisor (0).
    pub fn origin(lattice: ComplexLattice) -> Self {
        TorsionDivisor::point(lattice, Rational::new(), Rational::new())
    }

    /// Adds m (x), merging equal points modulo the lattice.
    pub fn add_point(&mut self, r1: Rational, r2: Rational, m: Rational) {
        let (r1, r2) = (frac(&r1), frac(&r2));
        if let Some(pt) = self.points.iter_mut().find(|q| q.r1 == r1 && q.r2 == r2) {
            pt.mult += m;
        } else {
            self.points.push(DivisorPoint { r1, r2, mult: m });
        }
        self.points.retain(|q| q.mult != 0);
    }

    pub fn add(&self, other: &TorsionDivisor) -> TorsionDivisor {
        let mut out = self.clone();
        for q in &other.points {
            out.add_point(q.r1.clone(), q.r2.clone(), q.mult.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> TorsionDivisor {
        let mut out = TorsionDivisor::zero_divisor(self.lattice.clone());
        for q in &self.points {
            out.add_point(q.r1.clone(), q.r2.clone(), Rational::from(&q.mult * c));
        }
        out
    }

    pub fn negate_points(&self) -> TorsionDivisor {
        let mut out = TorsionDivisor::zero_divisor(self.lattice.clone());
        for q in &self.points {
            out.add_point(Rational::from(-&q.r1), Rational::from(-&q.r2), q.mult.clone());
        }
        out
    }

    pub fn degree(&self) -> Rational {
        self.points.iter().fold(Rational::new(), |acc, q| acc + &q.mult)
    }

    /// Least N with every point N-torsion.
    pub fn torsion_order(&self) -> Integer {
        self.points.iter().fold(Integer::from(1), |acc, q| {
            let a = acc.lcm(q.r1.denom());
            a.lcm(q.r2.denom())
        })
    }

    pub fn complex_point(&self, q: &DivisorPoint) -> Complex {
        let p = self.lattice.prec();
        let a = Complex::with_val(p, &self.lattice.w1 * Float::with_val(p, &q.r1));
        a + Complex::with_val(p, &self.lattice.w2 * Float::with_val(p, &q.r2))
    }
}

/// sum_{0 != g in L} e(Im(x conj g)/V) |g|^{-2s} by an Ewald split on the
/// area-one rescaling of L. Returns the value and an absolute tail bound.
fn twisted_epstein(l: &ComplexLattice, r1: &Rational, r2: &Rational, s: u32, p: u32) -> (Complex, Float) {
    let pi = Float::with_val(p, Constant::Pi);
    let vol = Float::with_val(p, l.covolume());
    let sv = Float::with_val(p, vol.sqrt_ref());
    let l0 = ComplexLattice { w1: Complex::with_val(p, &l.w1 / &sv), w2: Complex::with_val(p, &l.w2 / &sv) };
    let (l0, m) = l0.reduced();
    // coordinates of x in the reduced basis: (r1, r2) = (c1, c2) M
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] * det, -m[0][1] * det], [-m[1][0] * det, m[0][0] * det]];
    let c1 = Rational::from(r1 * inv[0][0]) + Rational::from(r2 * inv[1][0]);
    let c2 = Rational::from(r1 * inv[0][1]) + Rational::from(r2 * inv[1][1]);
    let (c1, c2) = (frac(&c1), frac(&c2));
    let on_lattice = c1 == 0 && c2 == 0;
    let x0 = Complex::with_val(p, &l0.w1 * Float::with_val(p, &c1)) + Complex::with_val(p, &l0.w2 * Float::with_val(p, &c2));
    let (x0, _) = l0.reduce_point(&x0);

    let a1 = Complex::with_val(64, l0.w1.abs_ref()).real().to_f64();
    let a2 = Complex::with_val(64, l0.w2.abs_ref()).real().to_f64();
    let delta = a1 + a2;
    let r = delta + (((p + 8) as f64) * std::f64::consts::LN_2 / std::f64::consts::PI).sqrt();
    let b = ((r + delta) * std::f64::consts::SQRT_2 / a1.min(a2)).ceil() as i64 + 1;

    let si = s as i64;
    let mut sum1 = Complex::with_val(p, 0);
    let mut sum2 = Complex::with_val(p, 0);
    for a in -b..=b {
        for c in -b..=b {
            let g = l0.point(a, c);
            if a != 0 || c != 0 {
                let n = Complex::with_val(p, g.norm_ref()).real().clone();
                let t = Float::with_val(p, &n * &pi);
                let gam = gamma_upper_int(si, &t, p);
                let pw = Float::with_val(p, t.clone().pow(si as i32));
                let w = gam / pw;
                let ch = pontryagin_pairing(&x0, &g, &l0);
                sum1 += ch * w;
            }
            let y = Complex::with_val(p, &g + &x0);
            let n = Complex::with_val(p, y.norm_ref()).real().clone();
            if n.is_zero() || (on_lattice && a == 0 && c == 0) {
                continue;
            }
            let t = Float::with_val(p, &n * &pi);
            let gam = gamma_upper_int(1 - si, &t, p);
            let pw = Float::with_val(p, t.clone().pow((si - 1) as i32));
            sum2 += Complex::with_val(p, (gam * pw, 0));
        }
    }
    let mut total = sum1 + sum2;
    if on_lattice {
        total += Float::with_val(p, 1) / (s - 1);
    }
    total -= Float::with_val(p, 1) / s;
    // undo pi^{-s} Gamma(s) and the rescaling by V^{-s}
    let gamma_s = Float::with_val(p, Integer::from(Integer::factorial(s - 1)));
    let scale = Float::with_val(p, pi.clone().pow(s)) / gamma_s / Float::with_val(p, vol.clone().pow(s));
    let tail_raw = 8.0 * (-std::f64::consts::PI * (r - delta).powi(2)).exp();
    let tail = Float::with_val(64, tail_raw) * Float::with_val(64, &scale);
    (total * scale, tail)
}

/// M_j(x) = sum_{0 != g} (x, g) / |g|^{2(1+j)}, extended linearly.
pub fn kronecker_sum(x: &TorsionDivisor, j: u32, ctx: &PrecisionContext) -> Result<CBall> {
    if j == 0 {
        return reject("j = 0 gives a conditionally convergent sum and is not supported");
    }
    let p = ctx.work();
    let l = x.lattice.with_prec(ctx);
    let mut v = Complex::with_val(p, 0);
    let mut tail = Float::with_val(64, 0);
    for q in &x.points {
        let (s, t) = twisted_epstein(&l, &q.r1, &q.r2, 1 + j, p);
        let m = Float::with_val(p, &q.mult);
        tail += Float::with_val(64, &t * Float::with_val(64, m.abs_ref()));
        v += s * m;
    }
    Ok(CBall::with_rounding(v, tail, ctx))
}

/// beta' = beta - deg(beta)(0) + deg(beta)/N^2 (1 - N^{-(2+2j)})^{-1} alpha,
/// alpha = N^2 (0) - sum over the N-torsion.
pub fn eisenstein_correction(beta: &TorsionDivisor, n: u32, j: u32) -> Result<TorsionDivisor> {
    if n < 2 {
        return reject("N must be at least 2");
    }
    let deg = beta.degree();
    if deg == 0 {
        return Ok(beta.clone());
    }
    let nn = Integer::from(n) * n;
    let mut alpha = TorsionDivisor::zero_divisor(beta.lattice.clone());
    alpha.add_point(Rational::new(), Rational::new(), Rational::from(&nn));
    for a in 0..n {
        for b in 0..n {
            alpha.add_point(Rational::from((a, n)), Rational::from((b, n)), Rational::from(-1));
        }
    }
    let big = Integer::from(n).pow(2 + 2 * j);
    // (1 - N^{-e})^{-1} = N^e / (N^e - 1)
    let corr = Rational::from((big.clone(), big - 1u32));
    let coef = Rational::from(&deg / Rational::from(nn)) * corr;
    let mut out = beta.clone();
    out.add_point(Rational::new(), Rational::new(), Rational::from(-&deg));
    Ok(out.add(&alpha.scale(&coef)))
}

/// How Lambda(b_g) enters the torsion point beta_g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// beta_g = b^{-1} Omega f_m^{-1} on Gamma_g = b^{-1} Omega O.
    BInverse,
    /// beta_g = Omega f_m^{-1} on Gamma_g = b^{-1} Omega O.
    Identity,
}

impl Normalization {
    pub fn name(&self) -> &'static str {
        match self {
            Normalization::BInverse => "b-inverse",
            Normalization::Identity => "identity",
        }
    }
}

/// CM data in the class-number-one regime with Omega = 1: per ray class g
/// mod f a representative b_g and the lattice Gamma_g = b_g^{-1} O.
#[derive(Clone, Debug)]
pub struct CMData {
    pub group: Arc<RayClassGroup>,
    pub reps: Vec<(Vec<i64>, Ideal)>,
}

impl CMData {
    pub fn new(group: &Arc<RayClassGroup>) -> Result<CMData> {
        if group.class_number() != 1 {
            return Err(Error::Unsupported("lattice-sum formula needs class number one".into()));
        }
        Ok(CMData { group: group.clone(), reps: group.representatives() })
    }

    /// Replaces representatives by other integral ideals in the same classes.
    pub fn with_reps(group: &Arc<RayClassGroup>, reps: Vec<(Vec<i64>, Ideal)>) -> Result<CMData> {
        let base = CMData::new(group)?;
        if reps.len() != base.reps.len() {
            return reject("one representative per class is required");
        }
        for (v, i) in &reps {
            if &group.class_of(i)? != v {
                return reject(format!("ideal {i} is not in class {v:?}"));
            }
        }
        Ok(CMData { group: group.clone(), reps })
    }

    pub fn field(&self) -> QuadField {
        self.group.field()
    }

    pub fn lattice_of(&self, b: &Ideal) -> QLattice {
        QLattice::inverse_ideal(b)
    }

    /// The torsion divisor beta_g for the class represented by b.
    pub fn beta(&self, b: &Ideal, y: KElem, norm: Normalization, p: u32) -> Result<TorsionDivisor> {
        let f = self.field();
        let gamma = self.lattice_of(b);
        let pt = match norm {
            Normalization::Identity => y,
            Normalization::BInverse => {
                let g = b.generator().ok_or_else(|| Error::Unsupported("non-principal representative".into()))?;
                f.kmul(f.kinv(KElem::from_int(g)), y)
            }
        };
        let (r1, r2) = gamma.coords(pt);
        Ok(TorsionDivisor::point(gamma.to_complex(p), r1, r2))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KroneckerLValue {
    pub chi: String,
    pub j: u32,
    pub value: CBall,
    pub rep_ideals: Vec<Ideal>,
    pub normalization: Normalization,
    pub rho_convention: RhoConvention,
    pub f_m: String,
}

/// L'(chi, -j) from the lattice-sum formula, for chi a character of the
/// ray class group carried by `cm`.
pub fn lprime_kronecker(
    chi: &HeckeCharacter,
    j: u32,
    cm: &CMData,
    norm: Normalization,
    conv: RhoConvention,
    rho: Option<&IdeleRep>,
    ctx: &PrecisionContext,
) -> Result<KroneckerLValue> {
    if chi.is_trivial() {
        return reject("chi must be nontrivial");
    }
    if j == 0 {
        return reject("j must be positive");
    }
    if !Arc::ptr_eq(chi.group(), &cm.group) && chi.group().modulus() != cm.group.modulus() {
        return reject("character and CM data live on different ray class groups");
    }
    let p = ctx.work();
    let field = cm.field();
    let fchi = *chi.conductor();
    let rho = match rho {
        Some(r) => r.clone(),
        None => IdeleRep::canonical(&fchi)?,
    };
    let fm = choose_f_m(field, &fchi, &rho)?;
    let y = field.kinv(fm);
    let prim = chi.primitive()?;
    let (rn, rd) = prim.idele_angle(&rho, conv)?;
    let chi_rho = angle_to_complex(rn, rd, p);

    let mut sum = Complex::with_val(p, 0);
    let mut err = Float::with_val(64, 0);
    for (v, b) in &cm.reps {
        let beta = cm.beta(b, y, norm, p)?;
        let a = area_invariant(&beta.lattice);
        let m = kronecker_sum(&beta, j, ctx)?;
        let (n, d) = chi.angle(v);
        let c = angle_to_complex(n, d, p);
        let ap = Float::with_val(p, a.pow(1 + j));
        err += Float::with_val(64, &m.err * &ap);
        sum += c * m.value * ap;
    }
    // (-1)^j Phi(f_chi) (j!)^2 / Phi(f) (sqrt(d_K) N f_chi / (2 pi i))^j chi(rho)
    let phi_ratio = Rational::from((totient(&fchi), totient(cm.group.modulus())));
    let jf = Integer::from(Integer::factorial(j));
    let mut pre = Complex::with_val(p, (Float::with_val(p, &phi_ratio) * Float::with_val(p, Integer::from(&jf * &jf)), 0));
    if j % 2 == 1 {
        pre = -pre;
    }
    let two_pi_i = Complex::with_val(p, (0, Float::with_val(p, Constant::Pi) * 2u32));
    let base = field.sqrt_disc(p) * fchi.norm() / two_pi_i;
    let base = base.pow(j);
    let factor = pre * base * chi_rho;
    let value = Complex::with_val(p, &sum * &factor);
    let err = err * abs_f(&factor);
    Ok(KroneckerLValue {
        chi: chi.id_string(),
        j,
        value: CBall::with_rounding(value, err, ctx),
        rep_ideals: cm.reps.iter().map(|(_, b)| *b).collect(),
        normalization: norm,
        rho_convention: conv,
        f_m: format!("{:?}", fm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::QuadInt;

    fn gauss_lattice(p: u32) -> ComplexLattice {
        ComplexLattice::new(Complex::with_val(p, (0, 1)), Complex::with_val(p, 1)).unwrap()
    }

    /// Direct truncated summation with the integral-comparison tail bound.
    fn direct(x: &TorsionDivisor, j: u32, bound: i64) -> (f64, f64) {
        let p = 64;
        let l = &x.lattice;
        let s = 1 + j as i32;
        let mut v = Complex::with_val(p, 0);
        for a in -bound..=bound {
            for b in -bound..=bound {
                if a == 0 && b == 0 {
                    continue;
                }
                let g = l.point(a, b);
                let n = Complex::with_val(p, g.norm_ref()).real().to_f64();
                for q in &x.points {
                    let z = x.complex_point(q);
                    let c = pontryagin_pairing(&z, &g, l);
                    v += c * (q.mult.to_f64() / n.powi(s));
                }
            }
        }
        let r = bound as f64;
        let vol = l.covolume().to_f64();
        let tail = 2.0 * std::f64::consts::PI * (r - 1.5).powi(2 - 2 * s) / ((2 * s - 2) as f64 * vol);
        let mass: f64 = x.points.iter().map(|q| q.mult.to_f64().abs()).sum();
        (v.real().to_f64(), tail * mass + 4.0 * tail)
    }

    #[test]
    fn area_and_pairing_basics() {
        let p = 128;
        let l = gauss_lattice(p);
        let a = area_invariant(&l).to_f64();
        assert!((a - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let g = Complex::with_val(p, (2, 1));
        let z = Complex::with_val(p, (Float::with_val(p, 1) / 5u32, 0));
        let c = pontryagin_pairing(&z, &g, &l);
        assert!((abs_f(&c).to_f64() - 1.0).abs() < 1e-30);
        let c5 = Complex::with_val(p, c.pow(5));
        assert!(crate::precision::dist(&c5, &Complex::with_val(p, 1)) < 1e-30);
        let one = pontryagin_pairing(&g, &g, &l);
        assert!(crate::precision::dist(&one, &Complex::with_val(p, 1)) < 1e-30);
    }

    #[test]
    fn ewald_matches_direct_summation() {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let l = ComplexLattice::new(Complex::with_val(p, (0.3, 1.4)), Complex::with_val(p, 1)).unwrap();
        let x = TorsionDivisor::point(l, Rational::from((1, 3)), Rational::from((2, 5)));
        for j in 1..=2 {
            let e = kronecker_sum(&x, j, &ctx).unwrap();
            let (d, tail) = direct(&x, j, 120);
            assert!((e.re().to_f64() - d).abs() < tail, "j={j}: {} vs {d} (tail {tail})", e.re().to_f64());
            assert!(e.im().to_f64().abs() < 1e-25);
        }
    }

    #[test]
    fn correction_has_degree_zero_and_same_sum() {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let x = TorsionDivisor::point(gauss_lattice(p), Rational::from((1, 3)), Rational::from((0, 1)));
        let y = eisenstein_correction(&x, 2, 1).unwrap();
        assert_eq!(y.degree(), 0);
        let a = kronecker_sum(&x, 1, &ctx).unwrap();
        let b = kronecker_sum(&y, 1, &ctx).unwrap();
        assert!(crate::precision::dist(&a.value, &b.value) < 1e-25);
    }

    #[test]
    fn beta_normalizations_differ_only_by_the_point() {
        let f = QuadField::new(-1).unwrap();
        let g = RayClassGroup::new(f, Ideal::from_int(f, 3).unwrap()).unwrap();
        let cm = CMData::new(&g).unwrap();
        let b = Ideal::principal(f, QuadInt::new(1, 1)).unwrap();
        let y = KElem::new(QuadInt::ONE, 3);
        let a = cm.beta(&b, y, Normalization::Identity, 64).unwrap();
        let c = cm.beta(&b, y, Normalization::BInverse, 64).unwrap();
        assert_eq!(a.points.len(), 1);
        assert_ne!(a.points[0], c.points[0]);
    }
}
