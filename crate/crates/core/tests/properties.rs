use kforge_core::field::GroupStructure;
use kforge_core::iwasawa::*;
use kforge_core::lattice::ComplexLattice;
use kforge_core::modular::{delta_lattice, eta, theta};
use kforge_core::precision::{dist, rel_dist, PrecisionContext};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};

const N: u32 = 12;
const M: usize = 16;

fn el(p: u32, c: &[i64]) -> LambdaElement {
    LambdaElement::from_i64(p, N, M, c).unwrap()
}

fn distinguished(p: u32, lower: &[i64]) -> Vec<i64> {
    let mut d: Vec<i64> = lower.iter().map(|x| x * p as i64).collect();
    d.push(1);
    d
}

fn unit(p: u32, u0: i64, rest: &[i64]) -> Vec<i64> {
    let u0 = if u0 % p as i64 == 0 { u0 + 1 } else { u0 };
    let mut u = vec![u0];
    u.extend_from_slice(rest);
    u
}

fn reduce_mod(x: &Integer, m: &Integer) -> Integer {
    let mut r = Integer::from(x % m);
    if r < 0 {
        r += m;
    }
    r
}

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn preparation_round_trip(
        p in prime(),
        mu in 0u32..3,
        lower in prop::collection::vec(-20i64..20, 0..4),
        u0 in -30i64..30,
        rest in prop::collection::vec(-30i64..30, 0..4),
    ) {
        let d = distinguished(p, &lower);
        let u = unit(p, u0, &rest);
        let scale = Integer::from(p).pow(mu);
        let f = el(p, &d).mul(&el(p, &u)).scale(&scale);
        let w = weierstrass_prep(&f).unwrap();
        prop_assert_eq!(w.mu, mu);
        prop_assert_eq!(w.lambda(), lower.len());
        prop_assert!(w.precision + mu + 2 >= N);
        let pn = Integer::from(p).pow(w.precision);
        for (a, b) in w.distinguished.iter().zip(&d) {
            prop_assert_eq!(reduce_mod(a, &pn), reduce_mod(&Integer::from(*b), &pn));
        }
        prop_assert!(w.unit.is_unit());
        let back = LambdaElement::from_poly(p, w.precision, M, &w.distinguished).mul(&w.unit);
        let g = f.retruncate(w.precision + mu, M);
        let g: Vec<Integer> = g.coeffs().iter().map(|c| Integer::from(c / &scale)).collect();
        prop_assert_eq!(back, LambdaElement::new(p, w.precision, M, g).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn char_ideal_is_multiplicative(
        p in prime(),
        a in prop::collection::vec(-5i64..5, 0..3),
        b in prop::collection::vec(-5i64..5, 1..3),
        mu in 0u32..2,
    ) {
        let f = el(p, &distinguished(p, &a)).scale(&Integer::from(p).pow(mu));
        let g = el(p, &distinguished(p, &b)).mul(&el(p, &[2, 1]));
        let cf = char_ideal(&LambdaModulePresentation::cyclic(f.clone())).unwrap();
        let cg = char_ideal(&LambdaModulePresentation::cyclic(g.clone())).unwrap();
        let sum = LambdaModulePresentation::diagonal(vec![f, g]);
        let c = char_ideal(&sum).unwrap();
        prop_assert_eq!(c.mu, cf.mu + cg.mu);
        prop_assert_eq!(c.distinguished.len() - 1, (cf.distinguished.len() - 1) + (cg.distinguished.len() - 1));
        let prec = c.generator.precision().0.min(cf.generator.precision().0).min(cg.generator.precision().0) - 1;
        let prod = LambdaElement::from_poly(p, prec, M, &cf.distinguished)
            .mul(&LambdaElement::from_poly(p, prec, M, &cg.distinguished));
        prop_assert_eq!(LambdaElement::from_poly(p, prec, M, &c.distinguished), prod);
    }

    #[test]
    fn idempotents_decompose_one(p in prop::sample::select(vec![5u32, 7, 11, 13]), n in 2u32..8) {
        let g = GroupStructure { invariant_factors: vec![p as i64 - 1] };
        let mut sum = GroupAlgebraElement::zero(&g, p, n);
        let mut es = Vec::new();
        for a in 0..(p as i64 - 1) {
            let e = idempotent(&g, &[a], p, n).unwrap();
            prop_assert_eq!(e.mul(&e), e.clone());
            sum = sum.add(&e);
            es.push(e);
        }
        prop_assert_eq!(sum, GroupAlgebraElement::one(&g, p, n));
        for i in 0..es.len() {
            for j in 0..i {
                prop_assert!(es[i].mul(&es[j]).is_zero());
            }
        }
    }

    #[test]
    fn herbrand_conclusive_means_equal(seed in any::<u64>(), p in prime()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = herbrand_check(&random_sequence(p, 3, &mut rng)).unwrap();
        if let Some(eq) = r.equal {
            prop_assert!(eq, "{:?}", r);
            prop_assert!(r.char_polys_agree && r.truncation_stable);
        }
    }
}

fn tau_in_strip() -> impl Strategy<Value = (f64, f64)> {
    (-0.5f64..0.5, 0.6f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn eta_modular_laws((x, y) in tau_in_strip()) {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let tau = ctx.complex(x, y);
        let e = eta(&tau, &ctx).unwrap().value;
        let shifted = eta(&Complex::with_val(p, &tau + 1u32), &ctx).unwrap().value;
        let pi = Float::with_val(p, Constant::Pi);
        let phase = Complex::with_val(p, (Float::new(p), pi / 12u32)).exp();
        prop_assert!(dist(&shifted, &Complex::with_val(p, &e * &phase)) < 1e-25);
        let inv = eta(&Complex::with_val(p, -1 / &tau), &ctx).unwrap().value;
        let s = Complex::with_val(p, &tau * ctx.complex(0.0, -1.0)).sqrt();
        prop_assert!(dist(&inv, &Complex::with_val(p, e * s)) < 1e-25);
    }

    #[test]
    fn delta_is_homogeneous_and_basis_free(
        (x, y) in tau_in_strip(),
        (lr, li) in (0.5f64..2.0, -1.0f64..1.0),
        word in prop::collection::vec(0u8..2, 1..6),
    ) {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let l = ComplexLattice::new(ctx.complex(x, y), ctx.complex(1.0, 0.0)).unwrap();
        let d = delta_lattice(&l, &ctx).unwrap().value;
        let lam = ctx.complex(lr, li);
        let scaled = delta_lattice(&l.scale(&lam), &ctx).unwrap().value;
        let want = Complex::with_val(p, &d / Complex::with_val(p, lam.pow(12)));
        prop_assert!(rel_dist(&scaled, &want) < 1e-25);
        let (mut w1, mut w2) = (l.w1.clone(), l.w2.clone());
        for s in word {
            if s == 0 {
                w1 = Complex::with_val(p, &w1 + &w2);
            } else {
                let t = w1.clone();
                w1 = Complex::with_val(p, -&w2);
                w2 = t;
            }
        }
        let other = delta_lattice(&ComplexLattice::new(w1, w2).unwrap(), &ctx).unwrap().value;
        prop_assert!(rel_dist(&other, &d) < 1e-25);
    }

    #[test]
    fn theta_is_odd((x, y) in tau_in_strip(), (a, b) in (0.05f64..0.95, 0.05f64..0.95)) {
        let ctx = PrecisionContext::new(96);
        let p = ctx.work();
        let tau = ctx.complex(x, y);
        let z = Complex::with_val(p, &tau * a) + b;
        let t = theta(&z, &tau, &ctx).unwrap().value;
        let u = theta(&Complex::with_val(p, -&z), &tau, &ctx).unwrap().value;
        prop_assert!(dist(&t, &Complex::with_val(p, -u)) < 1e-25);
    }
}
