//! Robert's theta ratio for a pair of lattices L inside L', with its 12th-root
//! normalization, and Kato's function attached to an ideal.

use crate::arith::{hnf_rows, IMat};
use crate::error::{reject, Error, Result};
use crate::field::Ideal;
use crate::lattice::{ComplexLattice, QLattice};
use crate::modular::{eta_lattice_raw, lattice_distance, theta_lattice_raw, wp_raw};
use crate::precision::{abs_f, CBall, PrecisionContext};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};

type M2 = [[i64; 2]; 2];

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn inv_unimodular(m: &M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    debug_assert!(det == 1 || det == -1);
    [[m[1][1] * det, -m[0][1] * det], [-m[1][0] * det, m[0][0] * det]]
}

fn mag(z: &Complex) -> f64 {
    Complex::with_val(53, z.abs_ref()).real().to_f64()
}

/// exp(2 pi i k / 12)
pub fn root_of_unity_12(k: u32, p: u32) -> Complex {
    let pi = Float::with_val(p, Constant::Pi);
    let ang = pi * (k % 12) / 6u32;
    let (s, c) = ang.sin_cos(Float::new(p));
    Complex::with_val(p, (c, s))
}

/// A pair L in L' of index prime to 6, on reduced bases, with the root of
/// unity C that makes the theta ratio independent of bases.
#[derive(Clone, Debug)]
pub struct LatticePair {
    l: ComplexLattice,
    lp: ComplexLattice,
    /// rows: basis of L in coordinates of the basis of L'
    sub: M2,
    index: i64,
    hnf: (i64, i64, i64),
    root: u32,
    prec: u32,
}

impl LatticePair {
    /// `lp` is any oriented basis of L'; rows of `sub` give an oriented basis
    /// of L in its coordinates.
    pub fn new(lp: &ComplexLattice, sub: M2, ctx: &PrecisionContext) -> Result<LatticePair> {
        let index = sub[0][0] * sub[1][1] - sub[0][1] * sub[1][0];
        if index <= 0 {
            return reject("sublattice basis must be oriented and of full rank");
        }
        if index % 2 == 0 || index % 3 == 0 {
            return reject(format!("index {index} is not prime to 6"));
        }
        let p = ctx.work();
        let lp = lp.with_prec(ctx);
        let (lpr, mp) = lp.reduced();
        let s1 = mat_mul(&sub, &inv_unimodular(&mp));
        let lraw = ComplexLattice::new(
            Complex::with_val(p, &lpr.w1 * s1[0][0]) + Complex::with_val(p, &lpr.w2 * s1[0][1]),
            Complex::with_val(p, &lpr.w1 * s1[1][0]) + Complex::with_val(p, &lpr.w2 * s1[1][1]),
        )?;
        let (lr, ml) = lraw.reduced();
        let s = mat_mul(&ml, &s1);
        let rows: IMat = s.iter().map(|r| vec![Integer::from(r[0]), Integer::from(r[1])]).collect();
        let h = hnf_rows(&rows);
        let g = |i: usize, j: usize| h[i][j].to_i64().unwrap();
        let hnf = (g(0, 0), g(0, 1).rem_euclid(g(1, 1)), g(1, 1));
        let mut pair = LatticePair { l: lr, lp: lpr, sub: s, index, hnf, root: 0, prec: p };
        pair.root = pair.determine_root(ctx)?;
        Ok(pair)
    }

    /// Pair of exact lattices inside K, L contained in L'.
    pub fn from_qlattices(l: &QLattice, lp: &QLattice, ctx: &PrecisionContext) -> Result<LatticePair> {
        let m = match lp.sub_matrix(l) {
            Some(m) => m,
            None => return reject("first lattice is not contained in the second"),
        };
        let sub = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        LatticePair::new(&lp.to_complex(ctx.work()), sub, ctx)
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn lattice(&self) -> &ComplexLattice {
        &self.l
    }

    pub fn superlattice(&self) -> &ComplexLattice {
        &self.lp
    }

    /// Rows give the reduced basis of L in the reduced basis of L'.
    pub fn sub_matrix(&self) -> [[i64; 2]; 2] {
        self.sub
    }

    /// Exponent k with C = exp(2 pi i k / 12).
    pub fn root_index(&self) -> u32 {
        self.root
    }

    pub fn root_of_unity(&self) -> Complex {
        root_of_unity_12(self.root, self.prec)
    }

    fn canonical(&self, x: i64, y: i64) -> (i64, i64) {
        let (h11, h12, h22) = self.hnf;
        let q = x.div_euclid(h11);
        let x = x - q * h11;
        let y = (y - q * h12).rem_euclid(h22);
        (x, y)
    }

    /// Coordinates (in the basis of L') of a full set of representatives of L'/L.
    pub fn coset_coords(&self) -> Vec<(i64, i64)> {
        let (h11, _, h22) = self.hnf;
        let mut out = Vec::new();
        for i in 0..h11 {
            for j in 0..h22 {
                out.push((i, j));
            }
        }
        out
    }

    /// Representatives of (L' - 0)/(+-1, L), keeping the lexicographically
    /// smaller of u and -u.
    pub fn transversal(&self) -> Vec<(i64, i64)> {
        self.coset_coords()
            .into_iter()
            .filter(|&(i, j)| {
                if (i, j) == (0, 0) {
                    return false;
                }
                (i, j) < self.canonical(-i, -j)
            })
            .collect()
    }

    pub fn point_of(&self, c: (i64, i64)) -> Complex {
        Complex::with_val(self.prec, &self.lp.w1 * c.0) + Complex::with_val(self.prec, &self.lp.w2 * c.1)
    }

    /// theta(z; L)^N / theta(z; L'), without C, with relative tail bound.
    fn ratio_raw(&self, z: &Complex) -> Result<(Complex, f64)> {
        let p = self.prec;
        let (zr, _) = self.l.reduce_point(&Complex::with_val(p, z));
        let (a, ta) = theta_lattice_raw(&zr, &self.l, p)?;
        let (b, tb) = theta_lattice_raw(&zr, &self.lp, p)?;
        let v = a.pow(&Integer::from(self.index)) / b;
        Ok((v, self.index as f64 * ta + tb))
    }

    fn pick_generic_points(&self) -> Vec<Complex> {
        let p = self.prec;
        let seeds = [(0.2371, 0.1713), (0.3119, 0.0837), (0.1447, 0.3571), (0.4129, 0.2297), (0.0931, 0.4483)];
        let scale = mag(&self.lp.w2).min(mag(&self.lp.w1));
        let mut out = Vec::new();
        for (a, b) in seeds {
            let z = Complex::with_val(p, &self.l.w1 * a) + Complex::with_val(p, &self.l.w2 * b);
            let mut ok = true;
            for m in 1..=3 {
                let zm = Complex::with_val(p, &z * m);
                for t in self.torsion(m) {
                    let zt = Complex::with_val(p, &z + &t);
                    if lattice_distance(&zt, &self.lp) < 1e-3 * scale {
                        ok = false;
                    }
                }
                if lattice_distance(&zm, &self.lp) < 1e-3 * scale {
                    ok = false;
                }
            }
            if ok {
                out.push(z);
            }
            if out.len() == 2 {
                break;
            }
        }
        out
    }

    /// The m^2 points (a w1 + b w2)/m of (1/m)L/L.
    fn torsion(&self, m: i64) -> Vec<Complex> {
        let p = self.prec;
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                let t = Complex::with_val(p, &self.l.w1 * a) + Complex::with_val(p, &self.l.w2 * b);
                out.push(t / m);
            }
        }
        out
    }

    /// Fixes C from the distribution relations for (1/2)L and (1/3)L, which
    /// by homogeneity read C^3 = R(2z)/prod R(z+t) and C^8 = R(3z)/prod R(z+t).
    fn determine_root(&self, ctx: &PrecisionContext) -> Result<u32> {
        let p = self.prec;
        let zs = self.pick_generic_points();
        if zs.is_empty() {
            return Err(Error::Numerical("no generic point found for root determination".into()));
        }
        let tol = 2f64.powi(-(ctx.target_bits as i32) / 2);
        let mut survivors: Vec<u32> = (0..12).collect();
        for z in &zs {
            let mut targets = Vec::new();
            for (m, e) in [(2i64, 3u32), (3i64, 8u32)] {
                let zm = Complex::with_val(p, z * m);
                let (num, _) = self.ratio_raw(&zm)?;
                let mut den = Complex::with_val(p, 1);
                for t in self.torsion(m) {
                    let zt = Complex::with_val(p, z + &t);
                    den *= self.ratio_raw(&zt)?.0;
                }
                targets.push((e, num / den));
            }
            survivors.retain(|&k| {
                targets.iter().all(|(e, v)| {
                    let c = root_of_unity_12(k * e, p);
                    mag(&Complex::with_val(p, &c - v)) < tol
                })
            });
        }
        match survivors.len() {
            1 => Ok(survivors[0]),
            0 => Err(Error::Numerical("no 12th root of unity satisfies the distribution relations".into())),
            n => Err(Error::Numerical(format!("{n} candidate 12th roots pass; normalization is ambiguous"))),
        }
    }

    fn check_off_divisor(&self, z: &Complex, ctx: &PrecisionContext) -> Result<()> {
        let scale = mag(&self.lp.w1).min(mag(&self.lp.w2));
        if lattice_distance(z, &self.lp) < scale * 2f64.powi(-(ctx.target_bits as i32) / 4) {
            return reject("point lies on the divisor of the theta ratio");
        }
        Ok(())
    }

    /// theta-ratio form C theta(z; w)^N / theta(z; w').
    pub fn robert_theta(&self, z: &Complex, ctx: &PrecisionContext) -> Result<CBall> {
        self.check_off_divisor(z, ctx)?;
        let (r, tail) = self.ratio_raw(z)?;
        let v = r * self.root_of_unity();
        let t = Float::with_val(64, abs_f(&v) * tail);
        Ok(CBall::with_rounding(v, t, ctx))
    }

    /// delta(L, L') = C eta(w)^N / eta(w').
    pub fn delta(&self, ctx: &PrecisionContext) -> Result<CBall> {
        let (a, ta) = eta_lattice_raw(&self.l, self.prec)?;
        let (b, tb) = eta_lattice_raw(&self.lp, self.prec)?;
        let v = a.pow(&Integer::from(self.index)) / b * self.root_of_unity();
        let t = Float::with_val(64, abs_f(&v) * (self.index as f64 * ta + tb));
        Ok(CBall::with_rounding(v, t, ctx))
    }

    /// delta(L, L') prod_{u in T} (p(z; L) - p(u; L))^{-1}.
    pub fn wp_form(&self, z: &Complex, ctx: &PrecisionContext) -> Result<CBall> {
        self.check_off_divisor(z, ctx)?;
        let p = self.prec;
        let d = self.delta(ctx)?;
        let (wz, _) = wp_raw(&Complex::with_val(p, z), &self.l, p)?;
        let mut v = d.value.clone();
        for c in self.transversal() {
            let u = self.point_of(c);
            let (wu, _) = wp_raw(&u, &self.l, p)?;
            v /= Complex::with_val(p, &wz - &wu);
        }
        let t = Float::with_val(64, &d.err * abs_f(&v) / d.abs());
        Ok(CBall::with_rounding(v, t, ctx))
    }
}

/// Relative residual of the distribution relation
/// theta(z; M, M + L') = prod_{t in M/L} theta(z + t; L, L').
pub fn distribution_residual(
    l: &QLattice,
    lp: &QLattice,
    m: &QLattice,
    zs: &[Complex],
    ctx: &PrecisionContext,
) -> Result<Float> {
    if !m.contains_lattice(l) {
        return reject("M must contain L");
    }
    if m.intersect(lp) != *l && m.intersect(lp).index_of(l) != Some(1) {
        return reject("M and L' must intersect in L");
    }
    let mp = m.sum(lp);
    let small = LatticePair::from_qlattices(l, lp, ctx)?;
    let big = LatticePair::from_qlattices(m, &mp, ctx)?;
    let reps = m.coset_reps(l).expect("L inside M");
    let p = ctx.work();
    let field = l.field();
    let mut worst = Float::with_val(64, 0);
    for z in zs {
        let lhs = big.robert_theta(z, ctx)?;
        let mut rhs = Complex::with_val(p, 1);
        for t in &reps {
            let zt = Complex::with_val(p, z + field.kto_complex(*t, p));
            rhs *= small.robert_theta(&zt, ctx)?.value;
        }
        let r = crate::precision::rel_dist(&rhs, &lhs.value);
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Kato's function Theta_a(z) = theta(z; L, a^{-1} L) for an O_K-lattice L.
pub fn kato_pair(l: &QLattice, a: &Ideal, ctx: &PrecisionContext) -> Result<LatticePair> {
    let n = a.norm();
    if n % 2 == 0 || n % 3 == 0 {
        return reject("the ideal must be prime to 6");
    }
    let lp = QLattice::inverse_ideal(a);
    let lp = l.mul_lattice(&lp);
    LatticePair::from_qlattices(l, &lp, ctx)
}

pub fn kato_theta(z: &Complex, l: &QLattice, a: &Ideal, ctx: &PrecisionContext) -> Result<CBall> {
    kato_pair(l, a, ctx)?.robert_theta(z, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{QuadField, QuadInt};
    use crate::modular::winding_number;
    use crate::precision::rel_dist;

    fn gauss() -> QuadField {
        QuadField::new(-1).unwrap()
    }

    #[test]
    fn transversal_has_half_the_nonzero_cosets() {
        let ctx = PrecisionContext::new(64);
        let f = gauss();
        let o = QLattice::ring(f);
        let l = QLattice::from_ideal(&Ideal::principal(f, QuadInt::new(2, 1)).unwrap());
        let pair = LatticePair::from_qlattices(&l, &o, &ctx).unwrap();
        assert_eq!(pair.index(), 5);
        assert_eq!(pair.transversal().len(), 2);
        assert_eq!(pair.coset_coords().len(), 5);
    }

    #[test]
    fn robert_theta_is_elliptic_and_matches_wp_form() {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let f = QuadField::new(-7).unwrap();
        let o = QLattice::ring(f);
        let l = QLattice::from_ideal(&Ideal::from_int(f, 5).unwrap()).sum(&QLattice::from_ideal(
            &Ideal::principal(f, QuadInt::new(0, 5)).unwrap(),
        ));
        let l = if o.index_of(&l) == Some(25) { l } else { panic!("index") };
        let pair = LatticePair::from_qlattices(&l, &o, &ctx).unwrap();
        for (re, im) in [(0.137, 0.291), (0.61, -0.22)] {
            let z = Complex::with_val(p, (re, im));
            let a = pair.robert_theta(&z, &ctx).unwrap();
            let w = pair.lattice().point(2, -1);
            let b = pair.robert_theta(&Complex::with_val(p, &z + &w), &ctx).unwrap();
            assert!(rel_dist(&a.value, &b.value) < 1e-25);
            let c = pair.wp_form(&z, &ctx).unwrap();
            assert!(rel_dist(&a.value, &c.value) < 1e-25, "{:?} vs {:?}", a.value, c.value);
        }
    }

    #[test]
    fn kato_order_at_origin() {
        let ctx = PrecisionContext::new(64);
        let p = ctx.work();
        let f = gauss();
        let a = Ideal::principal(f, QuadInt::new(2, 1)).unwrap();
        let pair = kato_pair(&QLattice::ring(f), &a, &ctx).unwrap();
        let zero = Complex::with_val(p, 0);
        let w = winding_number(|z| Ok(pair.robert_theta(z, &ctx)?.value), &zero, 0.05, 256).unwrap();
        assert_eq!(w, 4);
    }

    #[test]
    fn distribution_relation_index_two_superlattice() {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let f = gauss();
        let o = QLattice::ring(f);
        let l = QLattice::from_ideal(&Ideal::principal(f, QuadInt::new(2, 1)).unwrap());
        let half = crate::field::KElem::new(QuadInt::ONE, 2);
        let m = l.sum(&QLattice::new(f, f.kmul(half, l.basis()[0]), l.basis()[1]).unwrap());
        let zs = [Complex::with_val(p, (0.1234, 0.3217)), Complex::with_val(p, (-0.41, 0.07))];
        let r = distribution_residual(&l, &o, &m, &zs, &ctx).unwrap();
        assert!(r < 1e-25, "{r}");
    }
}
