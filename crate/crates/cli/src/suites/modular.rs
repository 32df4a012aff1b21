//! Transformation laws of eta, Delta, theta and wp, the distribution relation
//! of Robert's theta function and the order of Kato's function at the origin.

use super::{aux_primes, field_of, item_rng, Item};
use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{Fields, Record};
use kforge_core::field::{KElem, QuadField, QuadInt};
use kforge_core::lattice::{ComplexLattice, QLattice};
use kforge_core::modular::{delta_lattice, eta, g2_g3, theta, winding_number, wp, wp_deriv};
use kforge_core::precision::{dist, rel_dist, CBall, PrecisionContext};
use kforge_core::robert::{distribution_residual, kato_pair};
use kforge_core::units::law_tolerance;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Complex, Float};
use serde_json::json;

fn inputs(bits: u32) -> Fields {
    let mut i = Fields::default();
    i.push("bits", bits);
    i
}

fn worst(rs: impl IntoIterator<Item = Float>) -> Float {
    rs.into_iter().fold(Float::with_val(64, 0), |a, b| if b > a { b } else { a })
}

fn random_tau(rng: &mut ChaCha8Rng, p: u32) -> Complex {
    Complex::with_val(p, (rng.gen_range(-0.5..0.5), rng.gen_range(0.3..5.0)))
}

pub fn eta_at_i(ctx: &PrecisionContext) -> Record {
    let p = ctx.work();
    let rec = Record::new(Suite::ModularFns, format!("eta-at-i/P={}", ctx.target_bits), "eta-at-i", inputs(ctx.target_bits));
    let v = match eta(&Complex::with_val(p, (0, 1)), ctx) {
        Ok(v) => v,
        Err(e) => return rec.fail(&e),
    };
    // Gamma(1/4) / (2 pi^{3/4})
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let want = Float::with_val(p, Float::with_val(p, 0.25).gamma() / (Float::with_val(p, pi.pow(0.75)) * 2u32));
    let r = dist(&v.value, &Complex::with_val(p, want));
    rec.value("eta(i)", &v).judge(&r, &law_tolerance(ctx))
}

pub fn eta_laws(ctx: &PrecisionContext, seed: u64, stream: u64, count: usize) -> Record {
    let p = ctx.work();
    let mut inp = inputs(ctx.target_bits);
    inp.push("seed", seed);
    inp.push("stream", stream);
    let rec = Record::new(Suite::ModularFns, format!("eta-laws/P={}/{}", ctx.target_bits, stream), "eta-modular-laws", inp);
    let mut rng = item_rng(seed, stream);
    let mut run = || -> kforge_core::Result<(Float, CBall)> {
        let mut rs = Vec::new();
        let mut first = None;
        let phase = Complex::with_val(p, (0, Float::with_val(p, rug::float::Constant::Pi) / 12u32)).exp();
        for _ in 0..count {
            let tau = random_tau(&mut rng, p);
            let a = eta(&tau, ctx)?;
            let b = eta(&Complex::with_val(p, &tau + 1u32), ctx)?;
            rs.push(rel_dist(&b.value, &Complex::with_val(p, &a.value * &phase)));
            let inv = Complex::with_val(p, -1) / &tau;
            let c = eta(&inv, ctx)?;
            let s = Complex::with_val(p, &tau * Complex::with_val(p, (0, -1))).sqrt();
            rs.push(rel_dist(&c.value, &Complex::with_val(p, &a.value * &s)));
            first.get_or_insert(a);
        }
        Ok((worst(rs), first.expect("count > 0")))
    };
    match run() {
        Ok((r, v)) => rec.value("eta(tau_0)", &v).judge(&r, &law_tolerance(ctx)),
        Err(e) => rec.fail(&e),
    }
}

pub fn delta_invariance(ctx: &PrecisionContext, seed: u64, stream: u64) -> Record {
    let p = ctx.work();
    let mut inp = inputs(ctx.target_bits);
    inp.push("seed", seed);
    inp.push("stream", stream);
    let rec = Record::new(Suite::ModularFns, format!("delta/P={}", ctx.target_bits), "delta-homogeneity-and-basis-change", inp);
    let mut rng = item_rng(seed, stream);
    let mut run = || -> kforge_core::Result<(Float, CBall, bool)> {
        let l = ComplexLattice::new(Complex::with_val(p, (0, 1)), Complex::with_val(p, 1))?;
        let d = delta_lattice(&l, ctx)?;
        let positive = *d.re() > 0 && d.im().clone().abs() < Float::with_val(64, d.re()) * Float::with_val(64, -(ctx.target_bits as i32)).exp2();
        let mut rs = vec![rel_dist(
            &delta_lattice(&l.scale(&Complex::with_val(p, 2)), ctx)?.value,
            &Complex::with_val(p, &d.value / 4096u32),
        )];
        for _ in 0..10 {
            // random oriented unimodular change of basis
            let (mut a, mut b, mut c, mut e) = (1i64, 0i64, 0i64, 1i64);
            for _ in 0..4 {
                let k: i64 = rng.gen_range(-2..=2);
                if rng.gen_bool(0.5) {
                    a += k * c;
                    b += k * e;
                } else {
                    c += k * a;
                    e += k * b;
                }
            }
            let w1 = Complex::with_val(p, &l.w1 * a) + Complex::with_val(p, &l.w2 * b);
            let w2 = Complex::with_val(p, &l.w1 * c) + Complex::with_val(p, &l.w2 * e);
            let l2 = ComplexLattice::new(w1, w2)?;
            rs.push(rel_dist(&delta_lattice(&l2, ctx)?.value, &d.value));
        }
        Ok((worst(rs), d, positive))
    };
    match run() {
        Ok((r, d, positive)) => {
            let rec = rec.value("Delta(Z+Zi)", &d).judge(&r, &law_tolerance(ctx));
            if positive {
                rec
            } else {
                rec.exact(false)
            }
        }
        Err(e) => rec.fail(&e),
    }
}

pub fn theta_and_wp(ctx: &PrecisionContext, seed: u64, stream: u64, count: usize) -> Record {
    let p = ctx.work();
    let mut inp = inputs(ctx.target_bits);
    inp.push("seed", seed);
    inp.push("stream", stream);
    let rec = Record::new(Suite::ModularFns, format!("theta-wp/P={}", ctx.target_bits), "theta-oddness-and-wp-equation", inp);
    let mut rng = item_rng(seed, stream);
    let mut run = || -> kforge_core::Result<(Float, CBall, i64)> {
        let tau = random_tau(&mut rng, p);
        let l = ComplexLattice::standard(tau.clone())?;
        let (g2, g3) = g2_g3(&l, ctx);
        let mut rs = Vec::new();
        let mut first = None;
        for _ in 0..count {
            let z = Complex::with_val(p, (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)));
            let z = Complex::with_val(p, z.real() * Complex::with_val(p, &tau)) + Complex::with_val(p, z.imag());
            let a = theta(&z, &tau, ctx)?;
            let b = theta(&Complex::with_val(p, -&z), &tau, ctx)?;
            rs.push(rel_dist(&Complex::with_val(p, -&b.value), &a.value));
            let w = wp(&z, &l, ctx)?.value;
            let d = wp_deriv(&z, &l, ctx)?.value;
            let lhs = Complex::with_val(p, d.square_ref());
            let rhs = Complex::with_val(p, w.clone().pow(3u32)) * 4u32 - Complex::with_val(p, &g2 * &w) - &g3;
            rs.push(rel_dist(&lhs, &rhs));
            let shifted = wp(&Complex::with_val(p, &z + &l.w1), &l, ctx)?.value;
            rs.push(rel_dist(&shifted, &w));
            first.get_or_insert(a);
        }
        let order = winding_number(|z| Ok(theta(z, &tau, ctx)?.value), &Complex::with_val(p, 0), 0.05, 64)?;
        Ok((worst(rs), first.expect("count > 0"), order))
    };
    match run() {
        Ok((r, v, order)) => {
            let rec = rec.value("theta(z_0)", &v).details(&json!({ "order_at_zero": order }));
            if order == 1 {
                rec.judge(&r, &law_tolerance(ctx))
            } else {
                rec.exact(false)
            }
        }
        Err(e) => rec.fail(&e),
    }
}

/// All lattices M with L inside M of index k: M = L H^{-1} for H in Hermite form.
pub fn superlattices(l: &QLattice, k: i64) -> Vec<(QLattice, [i64; 3])> {
    let field = l.field();
    let [w1, w2] = l.basis();
    let q = |num: i64, den: i64| KElem::new(QuadInt::from_int(num), den);
    let mut out = Vec::new();
    for a in 1..=k {
        if k % a != 0 {
            continue;
        }
        let c = k / a;
        for b in 0..c {
            let e1 = field.kmul(q(1, a), w1);
            let e2 = field.kadd(field.kmul(q(-b, a * c), w1), field.kmul(q(1, c), w2));
            out.push((QLattice::new(field, e1, e2).expect("nondegenerate"), [a, b, c]));
        }
    }
    out
}

/// theta(z; M, M + L') against the product over M/L for one superlattice M.
pub fn distribution_item(
    field: QuadField,
    k: i64,
    which: usize,
    points: usize,
    ctx: &PrecisionContext,
    seed: u64,
    stream: u64,
) -> Record {
    let p = ctx.work();
    let o = QLattice::ring(field);
    let (m, h) = superlattices(&o, k).swap_remove(which);
    let mut inp = inputs(ctx.target_bits);
    inp.push("field", field.d());
    inp.push("index", k);
    inp.push("hnf", format!("{h:?}"));
    inp.push("seed", seed);
    inp.push("stream", stream);
    let id = format!("distribution/d={}/k={}/{:?}/P={}", field.d(), k, h, ctx.target_bits);
    // L' = a^{-1} O with N a prime to 6k, so that M and L' meet in O
    let a = aux_primes(field, &kforge_core::field::Ideal::from_int(field, k).expect("k > 0"), 1)[0];
    let lp = QLattice::inverse_ideal(&a);
    inp.push("a", a);
    let rec = Record::new(Suite::ModularFns, id, "distribution-relation", inp);
    let mut rng = item_rng(seed, stream);
    let lc = o.to_complex(p);
    let zs: Vec<Complex> = (0..points)
        .map(|_| {
            let (u, v) = (rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98));
            Complex::with_val(p, &lc.w1 * Float::with_val(p, u)) + Complex::with_val(p, &lc.w2 * Float::with_val(p, v))
        })
        .collect();
    match distribution_residual(&o, &lp, &m, &zs, ctx) {
        Ok(r) => rec.judge(&r, &law_tolerance(ctx)),
        Err(e) => rec.fail(&e),
    }
}

pub fn kato_order(field: QuadField, ctx: &PrecisionContext) -> Record {
    let p = ctx.work();
    let a = aux_primes(field, &kforge_core::field::Ideal::unit(field), 1)[0];
    let mut inp = inputs(ctx.target_bits);
    inp.push("field", field.d());
    inp.push("a", a);
    let rec = Record::new(Suite::ModularFns, format!("kato-order/d={}/P={}", field.d(), ctx.target_bits), "kato-order-at-origin", inp);
    let run = || -> kforge_core::Result<i64> {
        let pair = kato_pair(&QLattice::ring(field), &a, ctx)?;
        winding_number(|z| Ok(pair.robert_theta(z, ctx)?.value), &Complex::with_val(p, 0), 0.05, 256)
    };
    match run() {
        // div = N a (0) - ker[a], and 0 lies in ker[a]
        Ok(w) => rec.details(&json!({ "winding": w, "norm": a.norm() })).exact(w == a.norm() - 1),
        Err(e) => rec.fail(&e),
    }
}

pub fn items(cfg: &SuiteConfig) -> Result<Vec<Item>, ConfigError> {
    let mut items: Vec<Item> = Vec::new();
    let seed = cfg.seed;
    let points = cfg.points;
    // streams above 2^32 keep these apart from the iwasawa suite
    let mut stream = 1u64 << 32;
    let mut next = || {
        stream += 1;
        stream
    };
    for &bits in &cfg.bits {
        let ctx = PrecisionContext::new(bits);
        items.push(Box::new(move || vec![eta_at_i(&ctx)]));
        let s = next();
        items.push(Box::new(move || vec![eta_laws(&ctx, seed, s, points)]));
        let s = next();
        items.push(Box::new(move || vec![delta_invariance(&ctx, seed, s)]));
        let s = next();
        items.push(Box::new(move || vec![theta_and_wp(&ctx, seed, s, points)]));
        for &d in &cfg.fields {
            let field = field_of(d)?;
            items.push(Box::new(move || vec![kato_order(field, &ctx)]));
            for k in 2..=cfg.index_bound {
                for which in 0..superlattices(&QLattice::ring(field), k).len() {
                    let s = next();
                    items.push(Box::new(move || vec![distribution_item(field, k, which, points, &ctx, seed, s)]));
                }
            }
        }
    }
    Ok(items)
}
