//! Dedekind eta, the discriminant, the theta product and the Weierstrass
//! function, all through q-expansions.

use crate::error::{reject, Result};
use crate::lattice::ComplexLattice;
use crate::precision::{CBall, PrecisionContext};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

fn pi_c(p: u32) -> Float {
    Float::with_val(p, Constant::Pi)
}

/// exp(2 pi i w)
fn e2pii(w: &Complex, p: u32) -> Complex {
    let two_pi = pi_c(p) * 2u32;
    let arg = Complex::with_val(p, w * &two_pi);
    let arg = Complex::with_val(p, arg.mul_i_ref(false));
    arg.exp()
}

fn mag(z: &Complex) -> f64 {
    Complex::with_val(53, z.abs_ref()).real().to_f64()
}

fn check_tau(tau: &Complex) -> Result<()> {
    if !(*tau.imag() > 0) {
        return reject("tau must lie in the upper half plane");
    }
    Ok(())
}

/// prod_{n>=1} (1 - q^n), with a bound on the relative truncation error.
fn euler_product(q: &Complex, p: u32) -> (Complex, f64) {
    let aq = mag(q);
    let eps = 2f64.powi(-(p as i32) - 8);
    let mut prod = Complex::with_val(p, 1);
    let mut qn = q.clone();
    loop {
        let t = Complex::with_val(p, 1 - &qn);
        prod *= &t;
        qn *= q;
        let b = mag(&qn);
        if b < eps {
            let tail = 2.0 * b / (1.0 - aq).powi(2);
            return (prod, tail);
        }
    }
}

/// eta(tau) as a raw value with relative tail bound.
pub fn eta_raw(tau: &Complex, p: u32) -> Result<(Complex, f64)> {
    check_tau(tau)?;
    let q = e2pii(tau, p);
    let (prod, tail) = euler_product(&q, p);
    let tw = Complex::with_val(p, tau / 24u32);
    Ok((e2pii(&tw, p) * prod, tail))
}

pub fn eta(tau: &Complex, ctx: &PrecisionContext) -> Result<CBall> {
    let tau = Complex::with_val(ctx.work(), tau);
    let (v, tail) = eta_raw(&tau, ctx.work())?;
    let t = Float::with_val(64, crate::precision::abs_f(&v) * tail);
    Ok(CBall::with_rounding(v, t, ctx))
}

/// eta(w1, w2) = 2 pi / w2 * eta(w1/w2)^2 for the given (not reduced) basis.
pub fn eta_lattice_raw(l: &ComplexLattice, p: u32) -> Result<(Complex, f64)> {
    let w1 = Complex::with_val(p, &l.w1);
    let w2 = Complex::with_val(p, &l.w2);
    let tau = Complex::with_val(p, &w1 / &w2);
    let (e, tail) = eta_raw(&tau, p)?;
    let two_pi = pi_c(p) * 2u32;
    let v = Complex::with_val(p, e.square_ref()) * two_pi / w2;
    Ok((v, 2.0 * tail))
}

/// Delta(L) = eta(w1, w2)^12, computed on a reduced basis.
pub fn delta_raw(l: &ComplexLattice, p: u32) -> Result<(Complex, f64)> {
    let (r, _) = l.reduced();
    let (e, tail) = eta_lattice_raw(&r, p)?;
    Ok((e.pow(12u32), 12.0 * tail))
}

pub fn delta_lattice(l: &ComplexLattice, ctx: &PrecisionContext) -> Result<CBall> {
    let l = l.with_prec(ctx);
    let (v, tail) = delta_raw(&l, ctx.work())?;
    let t = Float::with_val(64, crate::precision::abs_f(&v) * tail);
    Ok(CBall::with_rounding(v, t, ctx))
}

/// theta(z, tau) = i exp(pi i z Im z / Im tau) q^{1/12} q_z^{-1/2} (1 - q_z)
///   prod_n (1 - q_z q^n)(1 - q_z^{-1} q^n).
pub fn theta_raw(z: &Complex, tau: &Complex, p: u32) -> Result<(Complex, f64)> {
    check_tau(tau)?;
    let z = Complex::with_val(p, z);
    let tau = Complex::with_val(p, tau);
    let pi = pi_c(p);
    let q = e2pii(&tau, p);
    let x = e2pii(&z, p);
    let zneg = Complex::with_val(p, -&z);
    let xinv = e2pii(&zneg, p);

    let ratio = Float::with_val(p, z.imag() / tau.imag());
    let quad = Complex::with_val(p, &z * &ratio) * &pi;
    let pre = Complex::with_val(p, quad.mul_i_ref(false)).exp();
    let q12 = e2pii(&Complex::with_val(p, &tau / 12u32), p);
    let half = e2pii(&Complex::with_val(p, &zneg / 2u32), p);
    let one_minus = Complex::with_val(p, 1 - &x);
    let mut v = pre * q12 * half * one_minus;
    v.mul_i_mut(false);

    let aq = mag(&q);
    let m = mag(&x).max(mag(&xinv));
    let eps = 2f64.powi(-(p as i32) - 8);
    let mut qn = q.clone();
    let mut n = 1u64;
    loop {
        let a = Complex::with_val(p, &x * &qn);
        let b = Complex::with_val(p, &xinv * &qn);
        v *= Complex::with_val(p, 1 - a);
        v *= Complex::with_val(p, 1 - b);
        qn *= &q;
        n += 1;
        let bound = mag(&qn) * m;
        if bound < eps.min(0.25) {
            return Ok((v, 4.0 * bound / (1.0 - aq)));
        }
        if n > 1_000_000 {
            return reject("theta product failed to converge");
        }
    }
}

pub fn theta(z: &Complex, tau: &Complex, ctx: &PrecisionContext) -> Result<CBall> {
    let (v, tail) = theta_raw(z, tau, ctx.work())?;
    let t = Float::with_val(64, crate::precision::abs_f(&v) * tail);
    Ok(CBall::with_rounding(v, t, ctx))
}

/// theta(z; w1, w2) = theta(z/w2, w1/w2).
pub fn theta_lattice_raw(z: &Complex, l: &ComplexLattice, p: u32) -> Result<(Complex, f64)> {
    let zz = Complex::with_val(p, z / &l.w2);
    theta_raw(&zz, &Complex::with_val(p, &l.w1 / &l.w2), p)
}

/// Distance from z to the nearest point of the lattice (low precision).
pub fn lattice_distance(z: &Complex, l: &ComplexLattice) -> f64 {
    let (r, _) = l.reduced();
    let (zr, _) = r.reduce_point(z);
    let mut best = f64::INFINITY;
    for a in -1..=1 {
        for b in -1..=1 {
            let d = Complex::with_val(64, &zr - r.point(a, b));
            best = best.min(mag(&d));
        }
    }
    best
}

/// Weierstrass p-function and its derivative on a reduced, normalized lattice.
fn wp_pair_raw(z: &Complex, l: &ComplexLattice, p: u32, want_deriv: bool) -> Result<(Complex, Complex, f64)> {
    let (r, _) = l.reduced();
    let r = ComplexLattice { w1: Complex::with_val(p, &r.w1), w2: Complex::with_val(p, &r.w2) };
    let (zr, _) = r.reduce_point(&Complex::with_val(p, z));
    let tau = r.tau();
    let u = Complex::with_val(p, &zr / &r.w2);
    let q = e2pii(&tau, p);
    let x = e2pii(&u, p);
    let xinv = e2pii(&Complex::with_val(p, -&u), p);
    let term = |y: &Complex| -> Complex {
        let d = Complex::with_val(p, 1 - y);
        Complex::with_val(p, y / d.square())
    };
    let dterm = |y: &Complex| -> Complex {
        let d = Complex::with_val(p, 1 - y);
        let num = Complex::with_val(p, y * Complex::with_val(p, 1 + y));
        num / d.pow(3u32)
    };
    let mut s = Complex::with_val(p, 1) / 12u32 + term(&x);
    let mut ds = dterm(&x);
    let aq = mag(&q);
    let m = mag(&x).max(mag(&xinv));
    let eps = 2f64.powi(-(p as i32) - 8);
    let mut qn = q.clone();
    loop {
        let a = Complex::with_val(p, &qn * &x);
        let b = Complex::with_val(p, &qn * &xinv);
        s += term(&a);
        s += term(&b);
        s -= term(&qn) * 2u32;
        if want_deriv {
            ds += dterm(&a);
            ds -= dterm(&b);
        }
        qn *= &q;
        let bound = mag(&qn) * m;
        if bound < eps.min(0.25) {
            let two_pi_i = Complex::with_val(p, (0, pi_c(p) * 2u32));
            let w2 = &r.w2;
            let f2 = Complex::with_val(p, &two_pi_i / w2).square();
            let f3 = Complex::with_val(p, &f2 * &two_pi_i) / w2;
            let scale = mag(&f2);
            // absolute tail relative to the size of the normalized series
            let tail = 8.0 * bound / (1.0 - aq).powi(3) * scale;
            return Ok((s * f2, ds * f3, tail));
        }
    }
}

pub fn wp_raw(z: &Complex, l: &ComplexLattice, p: u32) -> Result<(Complex, f64)> {
    let (v, _, t) = wp_pair_raw(z, l, p, false)?;
    Ok((v, t))
}

pub fn wp_deriv_raw(z: &Complex, l: &ComplexLattice, p: u32) -> Result<(Complex, f64)> {
    let (_, d, t) = wp_pair_raw(z, l, p, true)?;
    Ok((d, t))
}

fn check_off_lattice(z: &Complex, l: &ComplexLattice, ctx: &PrecisionContext) -> Result<()> {
    let scale = mag(&l.w1).min(mag(&l.w2));
    if lattice_distance(z, l) < scale * 2f64.powi(-(ctx.target_bits as i32) / 4) {
        return reject("point lies on the lattice (pole)");
    }
    Ok(())
}

pub fn wp(z: &Complex, l: &ComplexLattice, ctx: &PrecisionContext) -> Result<CBall> {
    check_off_lattice(z, l, ctx)?;
    let (v, tail) = wp_raw(z, &l.with_prec(ctx), ctx.work())?;
    Ok(CBall::with_rounding(v, Float::with_val(64, tail), ctx))
}

pub fn wp_deriv(z: &Complex, l: &ComplexLattice, ctx: &PrecisionContext) -> Result<CBall> {
    check_off_lattice(z, l, ctx)?;
    let (v, tail) = wp_deriv_raw(z, &l.with_prec(ctx), ctx.work())?;
    Ok(CBall::with_rounding(v, Float::with_val(64, tail), ctx))
}

/// Invariants (g2, g3) from the weight 4 and 6 Eisenstein series.
pub fn g2_g3(l: &ComplexLattice, ctx: &PrecisionContext) -> (Complex, Complex) {
    let p = ctx.work();
    let (r, _) = l.with_prec(ctx).reduced();
    let q = e2pii(&r.tau(), p);
    let mut e4 = Complex::with_val(p, 0);
    let mut e6 = Complex::with_val(p, 0);
    let eps = 2f64.powi(-(p as i32) - 16);
    let mut qn = q.clone();
    let mut n = 1u32;
    loop {
        let d = Complex::with_val(p, 1 - &qn);
        let base = Complex::with_val(p, &qn / &d);
        let n3 = Float::with_val(p, n).pow(3u32);
        let n5 = Float::with_val(p, n).pow(5u32);
        e4 += Complex::with_val(p, &base * &n3);
        e6 += Complex::with_val(p, &base * &n5);
        if mag(&qn) * (n as f64).powi(5) < eps {
            break;
        }
        qn *= &q;
        n += 1;
    }
    let e4 = e4 * 240u32 + 1u32;
    let e6 = 1u32 - e6 * 504u32;
    let two_pi = pi_c(p) * 2u32;
    let s = Complex::with_val(p, &two_pi / &r.w2);
    let s4 = Complex::with_val(p, s.square_ref()).square();
    let s6 = Complex::with_val(p, s.clone().pow(6u32));
    (s4 * e4 / 12u32, s6 * e6 / 216u32)
}

/// Winding number of f around the circle |z - c| = r, sampled at n points.
pub fn winding_number<F: Fn(&Complex) -> Result<Complex>>(f: F, c: &Complex, r: f64, n: usize) -> Result<i64> {
    let p = c.prec().0;
    let mut total = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut first = 0.0;
    for k in 0..=n {
        let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        let z = Complex::with_val(p, c + Complex::with_val(p, (r * t.cos(), r * t.sin())));
        let v = f(&z)?;
        let a = v.imag().to_f64().atan2(v.real().to_f64());
        if let Some(pa) = prev {
            let mut d = a - pa;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        } else {
            first = a;
        }
        prev = Some(a);
    }
    let _ = first;
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::dist;

    fn c(p: u32, re: f64, im: f64) -> Complex {
        Complex::with_val(p, (re, im))
    }

    #[test]
    fn eta_at_i_matches_gamma_quarter() {
        let ctx = PrecisionContext::new(128);
        let p = ctx.work();
        let v = eta(&c(p, 0.0, 1.0), &ctx).unwrap();
        // Gamma(1/4) / (2 pi^{3/4})
        let g = Float::with_val(p, 0.25).gamma();
        let pi = pi_c(p);
        let want = g / (Float::with_val(p, pi.clone().pow(0.75)) * 2u32);
        assert!(dist(&v.value, &Complex::with_val(p, want)) < 1e-35);
        assert!(v.im().to_f64().abs() < 1e-35);
    }

    #[test]
    fn eta_transformation_laws() {
        let ctx = PrecisionContext::new(128);
        let p = ctx.work();
        let tau = c(p, 0.0, 1.0);
        let t1 = c(p, 1.0, 1.0);
        let a = eta(&tau, &ctx).unwrap().value;
        let b = eta(&t1, &ctx).unwrap().value;
        let phase = e2pii(&(c(p, 1.0, 0.0) / 24u32), p);
        assert!(dist(&b, &(a * phase)) < 1e-35);

        let t = c(p, 0.0, 2.0);
        let inv = Complex::with_val(p, -1) / &t;
        let lhs = eta(&inv, &ctx).unwrap().value;
        let s = Complex::with_val(p, &t * c(p, 0.0, -1.0)).sqrt();
        let rhs = eta(&t, &ctx).unwrap().value * s;
        assert!(dist(&lhs, &rhs) < 1e-35);
    }

    #[test]
    fn delta_homogeneity_and_basis_independence() {
        let ctx = PrecisionContext::new(128);
        let p = ctx.work();
        let l = ComplexLattice::new(c(p, 0.0, 1.0), c(p, 1.0, 0.0)).unwrap();
        let d = delta_lattice(&l, &ctx).unwrap();
        assert!(*d.re() > 0);
        assert!(d.im().to_f64().abs() < 1e-40);
        let l2 = l.scale(&c(p, 2.0, 0.0));
        let d2 = delta_lattice(&l2, &ctx).unwrap();
        let want = Complex::with_val(p, &d.value / 4096u32);
        assert!(crate::precision::rel_dist(&d2.value, &want) < 1e-36);
        let l3 = ComplexLattice::new(Complex::with_val(p, &l.w1 + &l.w2), l.w2.clone()).unwrap();
        let d3 = delta_lattice(&l3, &ctx).unwrap();
        assert!(crate::precision::rel_dist(&d3.value, &d.value) < 1e-36);
    }

    #[test]
    fn theta_oddness_and_reality() {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let tau = c(p, 0.1, 1.3);
        let z = c(p, 0.23, 0.17);
        let a = theta(&z, &tau, &ctx).unwrap().value;
        let b = theta(&Complex::with_val(p, -&z), &tau, &ctx).unwrap().value;
        assert!(dist(&a, &Complex::with_val(p, -b)) < 1e-25);
        let r = theta(&c(p, 0.5, 0.0), &c(p, 0.0, 2.0), &ctx).unwrap();
        assert!(r.im().to_f64().abs() < 1e-28);
        let tau2 = c(p, 0.0, 2.0);
        let w = winding_number(|z| Ok(theta_raw(z, &tau2, p)?.0), &c(p, 0.0, 0.0), 0.05, 64).unwrap();
        assert_eq!(w, 1);
    }

    #[test]
    fn wp_is_even_periodic_and_solves_its_equation() {
        let ctx = PrecisionContext::new(128);
        let p = ctx.work();
        let l = ComplexLattice::new(c(p, 0.3, 1.1), c(p, 1.0, 0.0)).unwrap();
        let (g2, g3) = g2_g3(&l, &ctx);
        for (re, im) in [(0.21, 0.13), (0.4, -0.3), (-0.17, 0.52)] {
            let z = c(p, re, im);
            let a = wp(&z, &l, &ctx).unwrap().value;
            let b = wp(&Complex::with_val(p, -&z), &l, &ctx).unwrap().value;
            assert!(crate::precision::rel_dist(&a, &b) < 1e-36);
            let zs = Complex::with_val(p, &z + &l.w1);
            let c2 = wp(&zs, &l, &ctx).unwrap().value;
            assert!(crate::precision::rel_dist(&a, &c2) < 1e-36);
            let d = wp_deriv(&z, &l, &ctx).unwrap().value;
            let lhs = Complex::with_val(p, d.square_ref());
            let rhs = Complex::with_val(p, a.clone().pow(3u32)) * 4u32 - Complex::with_val(p, &g2 * &a) - &g3;
            assert!(crate::precision::rel_dist(&lhs, &rhs) < 1e-34);
            // finite difference of p against the analytic derivative
            let h = 1e-12;
            let zp = Complex::with_val(p, &z + h);
            let zm = Complex::with_val(p, &z - h);
            let fd = (wp(&zp, &l, &ctx).unwrap().value - wp(&zm, &l, &ctx).unwrap().value) / (2.0 * h);
            assert!(crate::precision::rel_dist(&fd, &d) < 1e-18);
        }
        assert!(wp(&l.w1, &l, &ctx).is_err());
    }
}
