//! Exit gate: one PASS/FAIL line per criterion.

use kforge_cli::config::SuiteConfig;
use kforge_cli::report::{Record, Status};
use kforge_cli::suites::{self, aux_primes, field_of, laws, lvalue, modular, parse_ideal, run_suite};
use kforge_core::field::{ideals_up_to, HeckeCharacter, Ideal, RayClassGroup};
use kforge_core::iwasawa::{herbrand_check, random_sequence};
use kforge_core::kronecker::{eisenstein_correction, kronecker_sum, Normalization, TorsionDivisor};
use kforge_core::lattice::{ComplexLattice, QLattice};
use kforge_core::lfun::{lichtenbaum_rational_factor, zeta_star, RayClassField};
use kforge_core::precision::{dist, PrecisionContext};
use kforge_core::units::{verify_integrality, UnitKind};
use rug::float::Constant;
use rug::{Complex, Float, Integer, Rational};
use std::collections::HashMap;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn accepted(r: &Record) -> bool {
    r.status == Status::Accepted
}

/// Catalan's constant from sum 3/8 * 1/((2n+1)^2 C(2n,n)) + pi/8 log(2 + sqrt 3).
fn catalan(p: u32) -> Float {
    let mut s = Float::with_val(p, 0);
    let mut binom = Integer::from(1);
    for n in 0..(p as u64) {
        if n > 0 {
            binom = binom * (2 * (2 * n - 1)) / n;
        }
        let d = Integer::from((2 * n + 1) * (2 * n + 1)) * &binom;
        s += Float::with_val(p, 1) / Float::with_val(p, &d);
    }
    let three = Float::with_val(p, 3);
    let log = Float::with_val(p, three.sqrt() + 2u32).ln();
    let pi = Float::with_val(p, Constant::Pi);
    s * 3u32 / 8u32 + pi * log / 8u32
}

fn ac1_matrix() -> Vec<(i64, &'static str)> {
    vec![(-1, "3"), (-7, "prime:7:0")]
}

fn ac1() -> Outcome {
    let ctx = PrecisionContext::new(128);
    let mut lines = Vec::new();
    let mut pass = true;
    for (d, fs) in ac1_matrix() {
        let k = field_of(d).unwrap();
        let f = parse_ideal(k, fs).unwrap();
        let g = RayClassGroup::new(k, f).unwrap();
        for chi in HeckeCharacter::all(&g).into_iter().filter(|c| !c.is_trivial()) {
            let mut passing = Vec::new();
            for norm in [Normalization::Identity, Normalization::BInverse] {
                let t = Instant::now();
                let r = lvalue::crosscheck(k, &f, chi.index(), 1, norm, &ctx);
                let secs = t.elapsed().as_secs_f64();
                let rel: f64 = r.residual.parse().unwrap_or(f64::INFINITY);
                let ok = rel < 1e-8 && secs < 60.0;
                if ok {
                    passing.push(norm.name());
                }
                lines.push(format!("d={d} f={fs} chi={} {}: rel {} in {secs:.1}s", chi.index(), norm.name(), r.residual));
            }
            pass &= passing == vec!["identity"];
        }
    }
    outcome(pass, format!("exactly the identity normalization passes; {}", lines.join("; ")))
}

fn ac2() -> Outcome {
    let ctx = PrecisionContext::new(128);
    let p = ctx.work();
    let k = field_of(-1).unwrap();
    let z = zeta_star(&RayClassField::new(k, Ideal::unit(k)).unwrap(), 2, &ctx).unwrap();
    let pi = Float::with_val(p, Constant::Pi);
    let want = Float::with_val(p, -catalan(p) / (pi * 6u32));
    let diff = dist(&z.value.value, &Complex::with_val(p, &want)).to_f64();
    outcome(diff < 1e-10, format!("zeta*(-1) = {:.12}, -G/(6 pi) = {:.12}, diff {diff:.1e}", z.value.re().to_f64(), want.to_f64()))
}

fn ac3() -> Outcome {
    let ctx = PrecisionContext::new(96);
    let mut n = 0;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for d in [-1, -7] {
        let k = field_of(d).unwrap();
        for idx in 2..=25i64 {
            for which in 0..modular::superlattices(&QLattice::ring(k), idx).len() {
                let r = modular::distribution_item(k, idx, which, 20, &ctx, 3, n as u64);
                n += 1;
                worst = worst.max(r.residual.parse().unwrap_or(f64::INFINITY));
                if !accepted(&r) {
                    bad.push(r.id.clone());
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{n} superlattices x 20 points, worst residual {worst:.1e}, tolerance 2^-80; failing {bad:?}"))
}

fn ac4() -> Outcome {
    let ctx = PrecisionContext::new(128);
    let mut counts: HashMap<String, (usize, usize)> = HashMap::new();
    let mut bad = Vec::new();
    for d in [-1, -3, -7] {
        let k = field_of(d).unwrap();
        for g in ideals_up_to(k, 25).into_iter().filter(|g| !g.is_unit_ideal()) {
            let mut recs = vec![laws::exchange(k, &g, &ctx)];
            for p in g.prime_divisors() {
                recs.push(laws::norm_compat(k, &g.div(&p).unwrap(), &p, &ctx));
            }
            for r in recs {
                let e = counts.entry(r.check.clone()).or_default();
                e.0 += 1;
                if accepted(&r) {
                    e.1 += 1;
                } else {
                    bad.push(format!("{} ({:?} {})", r.id, r.status, r.residual));
                }
            }
        }
    }
    let mut keys: Vec<_> = counts.iter().map(|(k, (n, a))| format!("{k} {a}/{n}")).collect();
    keys.sort();
    let all_cases = ["exchange", "norm-compat-p-divides-f", "norm-compat-p-coprime-f", "norm-compat-f-trivial"]
        .iter()
        .all(|c| counts.get(*c).map(|x| x.0 > 0).unwrap_or(false));
    outcome(bad.is_empty() && all_cases, format!("{}; failing {bad:?}", keys.join(", ")))
}

fn ac5() -> Outcome {
    let ctx = PrecisionContext::new(256);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut two_primes = 0;
    let mut prime_powers = 0;
    for d in [-1, -3, -7] {
        let k = field_of(d).unwrap();
        for f in ideals_up_to(k, 25).into_iter().filter(|g| !g.is_unit_ideal()) {
            let primes = f.prime_divisors();
            let a = aux_primes(k, &f, 1)[0];
            let r = verify_integrality(k, &f, &a, &ctx).unwrap();
            let ev = &r.evidence;
            let res: f64 = ev.residual.parse().unwrap();
            let deg = ev.coefficients.len() - 1;
            let monic = ev.coefficient(deg) == 1 && ev.denominator == "1";
            let c0 = ev.coefficient(0).abs();
            let ok = if primes.len() >= 2 {
                two_primes += 1;
                monic && c0 == 1 && r.kind == UnitKind::Unit
            } else {
                prime_powers += 1;
                let q = kforge_core::arith::factor(primes[0].norm())[0].0;
                let mut c = c0.clone();
                while c.is_divisible_u(q as u32) && c != 0 {
                    c /= q as u32;
                }
                monic && c == 1
            };
            let ok = ok && res < 1e-10 && r.accepted;
            if !ok {
                lines.push(format!("d={d} f={f}: c0={} residual {}", ev.coefficient(0), ev.residual));
            }
            pass &= ok;
        }
    }
    outcome(
        pass && two_primes > 0,
        format!("{two_primes} conductors with two primes (unit), {prime_powers} prime powers (p-unit); failing {lines:?}"),
    )
}

fn ac6() -> Outcome {
    let ctx = PrecisionContext::new(96);
    let p = ctx.work();
    let l = ComplexLattice::new(Complex::with_val(p, (0, 1)), Complex::with_val(p, 1)).unwrap();
    let m = kronecker_sum(&TorsionDivisor::origin(l), 1, &ctx).unwrap();
    let pi = Float::with_val(p, Constant::Pi);
    let zeta2 = Float::with_val(p, pi.square_ref()) / 6u32;
    let want = zeta2 * catalan(p) * 4u32;
    let diff = dist(&m.value, &Complex::with_val(p, &want)).to_f64();
    outcome(diff < 1e-10, format!("M_1(0) = {:.12}, 4 zeta(2) beta(2) = {:.12}, diff {diff:.1e}", m.re().to_f64(), want.to_f64()))
}

fn ac7() -> Outcome {
    let ctx = PrecisionContext::new(96);
    let p = ctx.work();
    let l = ComplexLattice::new(Complex::with_val(p, (0, 1)), Complex::with_val(p, 1)).unwrap();
    let tol = Float::with_val(64, 16 - 96).exp2();
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [3i64, 5] {
        for (a, b) in [(1, 0), (1, 1), (0, 2), (2, 1)] {
            if a % n == 0 && b % n == 0 {
                continue;
            }
            let beta = TorsionDivisor::point(l.clone(), Rational::from((a, n)), Rational::from((b, n)));
            let corrected = eisenstein_correction(&beta, 2, 1).unwrap();
            let m0 = kronecker_sum(&beta, 1, &ctx).unwrap();
            let m1 = kronecker_sum(&corrected, 1, &ctx).unwrap();
            let r = dist(&m0.value, &m1.value);
            pass &= r < tol && corrected.degree() == 0;
            lines.push(format!("({a}/{n},{b}/{n}) {:.1e}", r.to_f64()));
        }
    }
    outcome(pass, format!("|M_1(beta') - M_1(beta)|: {}", lines.join(", ")))
}

fn ac8() -> Outcome {
    let mut conclusive = 0;
    let mut equal = 0;
    let mut tried = 0;
    let mut stream = 0u64;
    'outer: for p in [3u32, 5, 7].iter().cycle() {
        let mut rng = suites::item_rng(8, stream);
        stream += 1;
        tried += 1;
        let r = herbrand_check(&random_sequence(*p, 3, &mut rng)).unwrap();
        if let Some(e) = r.equal {
            conclusive += 1;
            equal += (e && r.truncation_stable && r.char_polys_agree) as usize;
        }
        if conclusive == 100 || tried > 1000 {
            break 'outer;
        }
    }
    outcome(
        conclusive == 100 && equal == 100,
        format!("{equal}/{conclusive} conclusive instances equal, truncation-stable, char polys agreeing ({tried} drawn)"),
    )
}

fn ac9() -> Outcome {
    let ctx = PrecisionContext::new(128);
    let mut lines = Vec::new();
    let mut pass = true;
    for (d, fs) in ac1_matrix() {
        let k = field_of(d).unwrap();
        let f = parse_ideal(k, fs).unwrap();
        let r = lvalue::covolume_identity(k, &f, 2, &ctx);
        pass &= accepted(&r);
        lines.push(format!("d={d} f={fs} relative residual {}", r.residual));
    }
    let k = field_of(-1).unwrap();
    let rf = lichtenbaum_rational_factor(&RayClassField::new(k, Ideal::unit(k)).unwrap(), 2).unwrap();
    pass &= rf.value == -12;
    lines.push(format!("rational factor at f = O, m = 2: {}", rf.value));
    outcome(pass, lines.join("; "))
}

fn ac10() -> Outcome {
    let lo = run_suite(&SuiteConfig::default_with_bits(128)).unwrap();
    let hi = run_suite(&SuiteConfig::default_with_bits(256)).unwrap();
    let key = |r: &Record| r.id.replace("P=256", "P=*").replace("P=128", "P=*");
    let hi_by: HashMap<String, &Record> = hi.records.iter().map(|r| (key(r), r)).collect();
    let mut compared = 0;
    let mut bad = Vec::new();
    for r in &lo.records {
        let Some(h) = hi_by.get(&key(r)) else { continue };
        for (a, b) in r.values.iter().zip(&h.values) {
            compared += 1;
            let moved = dist(&a.value.value, &b.value.value);
            if moved >= a.value.err {
                bad.push(format!("{}:{} moved {:.1e} > {:.1e}", r.id, a.name, moved.to_f64(), a.value.err.to_f64()));
            }
        }
    }
    let all_ok = lo.summary.rejected == 0 && hi.summary.rejected == 0;
    outcome(
        bad.is_empty() && compared > 0 && all_ok,
        format!("{compared} values compared between P=128 and P=256; violations {bad:?}"),
    )
}

fn main() {
    let acs: Vec<(&str, fn() -> Outcome)> = vec![
        ("AC-1", ac1),
        ("AC-2", ac2),
        ("AC-3", ac3),
        ("AC-4", ac4),
        ("AC-5", ac5),
        ("AC-6", ac6),
        ("AC-7", ac7),
        ("AC-8", ac8),
        ("AC-9", ac9),
        ("AC-10", ac10),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC-")).collect();
    let mut failed = 0;
    for (name, f) in acs {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!("{name}: {} ({secs:.1}s) {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as i32;
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
