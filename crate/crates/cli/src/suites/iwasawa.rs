//! Randomized Herbrand-quotient instances, Weierstrass round trips and
//! idempotent identities.

use super::{item_rng, Item};
use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{Fields, Record};
use kforge_core::field::GroupStructure;
use kforge_core::iwasawa::{
    char_ideal, finite_quotient_order, herbrand_check, idempotent, random_sequence, weierstrass_prep,
    GroupAlgebraElement, LambdaElement, LambdaModulePresentation, QuotientOrder,
};
use rand::Rng;
use rug::ops::Pow;
use rug::Integer;
use serde_json::json;

fn mat(m: &[Vec<Integer>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

pub fn herbrand_instance(p: u32, seed: u64, stream: u64) -> Record {
    let mut inputs = Fields::default();
    inputs.push("p", p);
    inputs.push("seed", seed);
    inputs.push("stream", stream);
    let id = format!("herbrand/p={p}/seed={seed}/{stream}");
    let rec = Record::new(Suite::Iwasawa, id, "herbrand-quotients", inputs);
    let mut rng = item_rng(seed, stream);
    let seq = random_sequence(p, 3, &mut rng);
    let r = match herbrand_check(&seq) {
        Ok(r) => r,
        Err(e) => return rec.fail(&e),
    };
    let details = json!({
        "t_on_x": mat(&seq.x.t_action),
        "t_on_y": mat(&seq.y.t_action),
        "phi": mat(&seq.phi),
        "orders": r,
    });
    let rec = rec.details(&details);
    match r.equal {
        Some(ok) => rec.exact(ok),
        None => rec.inconclusive("an order is infinite or unstable under truncation"),
    }
}

/// Random f = p^mu * unit * distinguished, prepared and multiplied back.
pub fn weierstrass_roundtrip(p: u32, seed: u64, stream: u64) -> Record {
    let mut inputs = Fields::default();
    inputs.push("p", p);
    inputs.push("seed", seed);
    inputs.push("stream", stream);
    let id = format!("weierstrass/p={p}/seed={seed}/{stream}");
    let rec = Record::new(Suite::Iwasawa, id, "weierstrass-preparation", inputs);
    let mut rng = item_rng(seed, stream);
    let (n, m) = (24u32, 24usize);
    let lam = rng.gen_range(0..4usize);
    let mu = rng.gen_range(0..3u32);
    let pi = p as i64;
    let mut dist: Vec<i64> = (0..lam).map(|_| pi * rng.gen_range(-3..=3)).collect();
    dist.push(1);
    let mut unit: Vec<i64> = (0..5).map(|_| rng.gen_range(-9..=9)).collect();
    if unit[0] % pi == 0 {
        unit[0] += 1;
    }
    let mk = |c: &[i64]| LambdaElement::from_i64(p, n, m, c).expect("valid truncation");
    let pmu = Integer::from(p).pow(mu);
    let f = mk(&dist).mul(&mk(&unit)).scale(&pmu);
    let w = match weierstrass_prep(&f) {
        Ok(w) => w,
        Err(e) => return rec.fail(&e),
    };
    let back = LambdaElement::from_poly(p, w.precision, m, &w.distinguished).mul(&w.unit).scale(&pmu);
    let ok = w.mu == mu && w.lambda() == lam && back == f.retruncate(w.precision, m) && w.unit.is_unit();
    rec.details(&json!({ "f": f, "mu": w.mu, "lambda": w.lambda(), "preparation": w })).exact(ok)
}

/// Completeness and orthogonality of the e_chi for Delta = Z/(p-1).
pub fn idempotents(p: u32) -> Record {
    let mut inputs = Fields::default();
    inputs.push("p", p);
    let id = format!("idempotents/p={p}");
    let rec = Record::new(Suite::Iwasawa, id, "idempotent-identities", inputs);
    let n = 12;
    let g = GroupStructure { invariant_factors: vec![p as i64 - 1] };
    let es: Vec<GroupAlgebraElement> = match (0..p as i64 - 1).map(|k| idempotent(&g, &[k], p, n)).collect() {
        Ok(v) => v,
        Err(e) => return rec.fail(&e),
    };
    let mut sum = GroupAlgebraElement::zero(&g, p, n);
    let mut ok = true;
    for (i, e) in es.iter().enumerate() {
        sum = sum.add(e);
        ok &= e.mul(e) == *e;
        for f in &es[i + 1..] {
            ok &= e.mul(f).is_zero();
        }
    }
    ok &= sum == GroupAlgebraElement::one(&g, p, n);
    rec.details(&json!({ "idempotents": es })).exact(ok)
}

/// #(Lambda/(T - p) / T) = p and char(Lambda/(f) + Lambda/(g)) = f g.
pub fn small_modules(p: u32) -> Record {
    let mut inputs = Fields::default();
    inputs.push("p", p);
    let rec = Record::new(Suite::Iwasawa, format!("modules/p={p}"), "quotient-orders-and-char-ideals", inputs);
    let (n, m) = kforge_core::iwasawa::DEFAULT_TRUNCATION;
    let pi = p as i64;
    let mk = |c: &[i64]| LambdaElement::from_i64(p, n, m, c).expect("valid truncation");
    let t = mk(&[0, 1]);
    let q1 = finite_quotient_order(&LambdaModulePresentation::cyclic(mk(&[-pi, 1])), &t);
    let q2 = finite_quotient_order(&LambdaModulePresentation::cyclic(mk(&[0, 1])), &mk(&[-pi, 1]));
    let q3 = finite_quotient_order(&LambdaModulePresentation::cyclic(mk(&[-pi, 0, 1])), &t);
    let f = mk(&[pi, 1]);
    let g = mk(&[pi * pi, pi, 1]);
    let pres = LambdaModulePresentation::diagonal(vec![f.clone(), g.clone()]);
    let ch = char_ideal(&pres);
    let want = QuotientOrder::Finite(Integer::from(p));
    let ok_orders = q1 == want && q2 == want && q3 == want;
    let ok_char = matches!(&ch, Ok(c) if c.generator == f.mul(&g) && c.mu == 0);
    rec.details(&json!({
        "lambda_mod_t_minus_p_over_t": q1,
        "lambda_mod_t_over_t_minus_p": q2,
        "lambda_mod_t2_minus_p_over_t": q3,
        "char_ideal": ch.as_ref().ok(),
    }))
    .exact(ok_orders && ok_char)
}

pub fn items(cfg: &SuiteConfig) -> Result<Vec<Item>, ConfigError> {
    let mut items: Vec<Item> = Vec::new();
    let seed = cfg.seed;
    let mut stream = 0u64;
    for &p in &cfg.primes {
        items.push(Box::new(move || vec![small_modules(p), idempotents(p)]));
        for _ in 0..cfg.instances {
            let s = stream;
            items.push(Box::new(move || vec![herbrand_instance(p, seed, s)]));
            stream += 1;
        }
        for _ in 0..cfg.instances.min(10) {
            let s = stream;
            items.push(Box::new(move || vec![weierstrass_roundtrip(p, seed, s)]));
            stream += 1;
        }
    }
    Ok(items)
}
