//! Elliptic-unit laws: exchange, norm compatibility in its three cases, and
//! integrality of the Galois orbit.

use super::{aux_primes, conductors, field_of, Item};
use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{Fields, Record};
use kforge_core::field::{Ideal, QuadField};
use kforge_core::precision::{decimal_short, PrecisionContext};
use kforge_core::units::{
    elliptic_unit, recognition_tolerance, verify_exchange, verify_integrality, verify_norm_compat, LawCheck, NormCase,
};

fn base_inputs(field: QuadField, f: &Ideal, bits: u32) -> Fields {
    let mut i = Fields::default();
    i.push("field", field.d());
    i.push("conductor", f);
    i.push("bits", bits);
    i
}

fn from_law(rec: Record, r: kforge_core::Result<LawCheck>) -> Record {
    match r {
        Ok(c) => {
            let (res, tol, ok) = (c.residual.clone(), c.tolerance.clone(), c.accepted);
            rec.details(&c).judged(&res, &tol, ok)
        }
        Err(e) => rec.fail(&e),
    }
}

pub fn exchange(field: QuadField, f: &Ideal, ctx: &PrecisionContext) -> Record {
    let aux = aux_primes(field, f, 2);
    let (a, c) = (aux[0], aux[1]);
    let mut inputs = base_inputs(field, f, ctx.target_bits);
    inputs.push("a", a);
    inputs.push("c", c);
    let id = format!("exchange/d={}/f={}/P={}", field.d(), f, ctx.target_bits);
    let rec = Record::new(Suite::EllipticLaws, id, "exchange", inputs);
    let rec = match elliptic_unit(field, f, &a, ctx) {
        Ok(z) => rec.value("z_a", &z.value),
        Err(_) => rec,
    };
    from_law(rec, verify_exchange(field, f, &a, &c, ctx))
}

/// The norm law for g = p f, in whichever case (p | f, p prime to f, f = 1) applies.
pub fn norm_compat(field: QuadField, f: &Ideal, p: &Ideal, ctx: &PrecisionContext) -> Record {
    let g = p.mul(f);
    let a = aux_primes(field, &g, 1)[0];
    let case = if f.is_unit_ideal() {
        NormCase::FTrivial
    } else if f.is_coprime(p) {
        NormCase::PCoprimeF
    } else {
        NormCase::PDividesF
    };
    let mut inputs = base_inputs(field, f, ctx.target_bits);
    inputs.push("p", p);
    inputs.push("a", a);
    let id = format!("norm/d={}/f={}/p={}/P={}", field.d(), f, p, ctx.target_bits);
    let rec = Record::new(Suite::EllipticLaws, id, case.tag(), inputs);
    from_law(rec, verify_norm_compat(field, f, p, &a, ctx))
}

pub fn integrality(field: QuadField, f: &Ideal, ctx: &PrecisionContext) -> Record {
    let a = aux_primes(field, f, 1)[0];
    let mut inputs = base_inputs(field, f, ctx.target_bits);
    inputs.push("a", a);
    let id = format!("integrality/d={}/f={}/P={}", field.d(), f, ctx.target_bits);
    let rec = Record::new(Suite::EllipticLaws, id, "integrality", inputs);
    match verify_integrality(field, f, &a, ctx) {
        Ok(r) => {
            let tol = decimal_short(&recognition_tolerance(ctx));
            let (res, ok) = (r.evidence.residual.clone(), r.accepted);
            rec.details(&r).judged(&res, &tol, ok)
        }
        Err(e) => rec.fail(&e),
    }
}

pub fn items(cfg: &SuiteConfig) -> Result<Vec<Item>, ConfigError> {
    let mut items: Vec<Item> = Vec::new();
    for &d in &cfg.fields {
        let field = field_of(d)?;
        for g in conductors(cfg, field)? {
            if g.is_unit_ideal() {
                continue;
            }
            for &bits in &cfg.bits {
                let ctx = PrecisionContext::new(bits);
                items.push(Box::new(move || vec![exchange(field, &g, &ctx)]));
                for p in g.prime_divisors() {
                    let f = g.div(&p).expect("p divides g");
                    items.push(Box::new(move || vec![norm_compat(field, &f, &p, &ctx)]));
                }
            }
            let rctx = PrecisionContext::new(cfg.recognition_bits);
            items.push(Box::new(move || vec![integrality(field, &g, &rctx)]));
        }
    }
    Ok(items)
}
