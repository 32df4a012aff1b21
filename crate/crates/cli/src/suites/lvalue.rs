//! Lattice-sum values of L'(chi, -j) against the functional equation, and the
//! zeta* = covolume * rational factor identity.

use super::{conductors, field_of, Item};
use crate::config::{CharSelection, ConfigError, Suite, SuiteConfig};
use crate::report::{Fields, Record};
use kforge_core::field::{HeckeCharacter, Ideal, QuadField, RayClassGroup, RhoConvention};
use kforge_core::kronecker::{lprime_kronecker, CMData, Normalization};
use kforge_core::lfun::{covolume_motivic, functional_equation_lprime, RayClassField};
use kforge_core::precision::{abs_f, rel_dist, PrecisionContext};
use kforge_core::units::law_tolerance;
use rug::Float;
use serde_json::json;

/// Relative difference between the lattice-sum value and the oracle.
pub fn crosscheck(
    field: QuadField,
    f: &Ideal,
    chi_index: usize,
    j: u32,
    norm: Normalization,
    ctx: &PrecisionContext,
) -> Record {
    let mut inputs = Fields::default();
    inputs.push("field", field.d());
    inputs.push("conductor", f);
    inputs.push("chi", chi_index);
    inputs.push("j", j);
    inputs.push("bits", ctx.target_bits);
    inputs.push("normalization", norm.name());
    let id = format!("lvalue/d={}/f={}/chi={}/j={}/P={}/{}", field.d(), f, chi_index, j, ctx.target_bits, norm.name());
    let rec = Record::new(Suite::LvalueCrosscheck, id, "kronecker-vs-functional-equation", inputs);
    let run = || -> kforge_core::Result<Record> {
        let group = RayClassGroup::new(field, *f)?;
        let chi = HeckeCharacter::all(&group)
            .into_iter()
            .nth(chi_index)
            .ok_or_else(|| kforge_core::Error::Rejected(format!("no character with index {chi_index}")))?;
        let cm = CMData::new(&group)?;
        let k = lprime_kronecker(&chi, j, &cm, norm, RhoConvention::Inverse, None, ctx)?;
        let o = functional_equation_lprime(&chi, j, ctx)?;
        let r = rel_dist(&k.value.value, &o.value.value);
        Ok(rec
            .clone()
            .value("kronecker", &k.value)
            .value("oracle", &o.value)
            .details(&json!({ "kronecker": k, "oracle": o }))
            .judge(&r, &law_tolerance(ctx)))
    };
    run().unwrap_or_else(|e| rec.clone().fail(&e))
}

pub fn covolume_identity(field: QuadField, f: &Ideal, m: u32, ctx: &PrecisionContext) -> Record {
    let mut inputs = Fields::default();
    inputs.push("field", field.d());
    inputs.push("conductor", f);
    inputs.push("m", m);
    inputs.push("bits", ctx.target_bits);
    let id = format!("covolume/d={}/f={}/m={}/P={}", field.d(), f, m, ctx.target_bits);
    let rec = Record::new(Suite::LvalueCrosscheck, id, "zeta-star-equals-covolume-times-rational-factor", inputs);
    let run = || -> kforge_core::Result<Record> {
        let rf = RayClassField::new(field, *f)?;
        let c = covolume_motivic(&rf, m, ctx)?;
        let rel = Float::with_val(64, c.identity_residual) / abs_f(&c.zeta_star.value);
        let tol = Float::with_val(64, 8 - ctx.target_bits as i32).exp2();
        Ok(rec.clone().value("zeta_star", &c.zeta_star).value("covolume", &c.value).details(&c).judge(&rel, &tol))
    };
    run().unwrap_or_else(|e| rec.clone().fail(&e))
}

fn selected(chi: &HeckeCharacter, f: &Ideal, sel: CharSelection) -> bool {
    !chi.is_trivial() && (sel == CharSelection::Nontrivial || chi.conductor() == f)
}

pub fn items(cfg: &SuiteConfig) -> Result<Vec<Item>, ConfigError> {
    let mut items: Vec<Item> = Vec::new();
    for &d in &cfg.fields {
        let field = field_of(d)?;
        for f in conductors(cfg, field)? {
            let group = RayClassGroup::new(field, f).map_err(|e| ConfigError(format!("conductor {f}: {e}")))?;
            for &bits in &cfg.bits {
                let ctx = PrecisionContext::new(bits);
                for chi in HeckeCharacter::all(&group) {
                    if !selected(&chi, &f, cfg.chars) {
                        continue;
                    }
                    let idx = chi.index();
                    for &j in &cfg.j {
                        items.push(Box::new(move || vec![crosscheck(field, &f, idx, j, Normalization::Identity, &ctx)]));
                    }
                }
                for &m in &cfg.m {
                    items.push(Box::new(move || vec![covolume_identity(field, &f, m, &ctx)]));
                }
            }
        }
    }
    Ok(items)
}
