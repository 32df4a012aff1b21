//! Suite enumeration and the concurrent runner.

pub mod iwasawa;
pub mod laws;
pub mod lvalue;
pub mod modular;

use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{Record, Summary, Timestamp, VerificationReport, CONVENTIONS};
use kforge_core::field::{ideals_up_to, Ideal, QuadField, QuadInt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// A unit of work producing one or more records.
pub type Item = Box<dyn Fn() -> Vec<Record> + Send + Sync>;

/// Reproducible generator for item `stream` of a run with seed `seed`.
pub fn item_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Parses an ideal of `field`: `n` for (n), `x,y` for (x + y w), `hnf:a,b,c`,
/// or `prime:p:k` for the k-th prime above p.
pub fn parse_ideal(field: QuadField, s: &str) -> Result<Ideal, ConfigError> {
    let bad = |why: String| ConfigError(format!("bad ideal '{s}': {why}"));
    let ints = |t: &str| -> Result<Vec<i64>, ConfigError> {
        t.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad("expected integers".into()))).collect()
    };
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let r = if let Some(rest) = s.strip_prefix("hnf:") {
        let v = ints(rest)?;
        if v.len() != 3 {
            return Err(bad("hnf needs three entries".into()));
        }
        Ideal::from_hnf(field, v[0], v[1], v[2])
    } else if let Some(rest) = s.strip_prefix("prime:") {
        let (p, k) = rest.split_once(':').unwrap_or((rest, "0"));
        let p: i64 = p.parse().map_err(|_| bad("expected a prime".into()))?;
        let k: usize = k.parse().map_err(|_| bad("expected an index".into()))?;
        if !kforge_core::arith::is_prime(p) {
            return Err(bad(format!("{p} is not prime")));
        }
        let sp = Ideal::splitting(field, p).map_err(|e| bad(e.to_string()))?;
        return sp.primes.get(k).copied().ok_or_else(|| bad(format!("only {} primes above {p}", sp.primes.len())));
    } else {
        let v = ints(s)?;
        match v.as_slice() {
            [n] => Ideal::from_int(field, *n),
            [x, y] => Ideal::principal(field, QuadInt::new(*x, *y)),
            _ => return Err(bad("expected n, x,y, hnf:a,b,c or prime:p:k".into())),
        }
    };
    r.map_err(|e| bad(e.to_string()))
}

pub fn field_of(d: i64) -> Result<QuadField, ConfigError> {
    QuadField::new(d).map_err(|e| ConfigError(format!("field {d}: {e}")))
}

/// The configured conductors for one field, unit ideal first when enumerated.
pub fn conductors(cfg: &SuiteConfig, field: QuadField) -> Result<Vec<Ideal>, ConfigError> {
    if cfg.conductors.is_empty() {
        Ok(ideals_up_to(field, cfg.conductor_norm))
    } else {
        cfg.conductors.iter().map(|s| parse_ideal(field, s)).collect()
    }
}

/// Prime ideals prime to 6 * avoid, in order of norm.
pub fn aux_primes(field: QuadField, avoid: &Ideal, count: usize) -> Vec<Ideal> {
    let six = avoid.mul(&Ideal::from_int(field, 6).expect("nonzero"));
    let mut out = Vec::new();
    let mut bound = 64usize;
    while out.len() < count {
        out.clear();
        for p in kforge_core::arith::primes_up_to(bound) {
            for q in Ideal::splitting(field, p).expect("prime").primes {
                if q.is_coprime(&six) && out.len() < count {
                    out.push(q);
                }
            }
        }
        bound *= 4;
    }
    out
}

fn items_for(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Item>, ConfigError> {
    match suite {
        Suite::LvalueCrosscheck => lvalue::items(cfg),
        Suite::EllipticLaws => laws::items(cfg),
        Suite::Iwasawa => iwasawa::items(cfg),
        Suite::ModularFns => modular::items(cfg),
    }
}

/// Runs every enabled suite. Records appear in enumeration order whatever the
/// worker count.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport, ConfigError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ConfigError(format!("worker pool: {e}")))?;
    let mut records = Vec::new();
    let mut wall = Vec::new();
    for &suite in &cfg.suites {
        let items = items_for(suite, cfg)?;
        let start = Instant::now();
        let out: Vec<Vec<Record>> = pool.install(|| items.par_iter().map(|f| f()).collect());
        wall.push((suite, format!("{:.3}", start.elapsed().as_secs_f64())));
        records.extend(out.into_iter().flatten());
    }
    let summary = Summary::tally(&records);
    Ok(VerificationReport {
        timestamp: Timestamp { generated_at: chrono::Utc::now().to_rfc3339(), wall_seconds: wall },
        version: env!("CARGO_PKG_VERSION"),
        conventions: CONVENTIONS,
        config: cfg.clone(),
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_syntax() {
        let k = field_of(-1).unwrap();
        assert_eq!(parse_ideal(k, "3").unwrap().norm(), 9);
        assert_eq!(parse_ideal(k, "(2,1)").unwrap().norm(), 5);
        assert_eq!(parse_ideal(k, "prime:5:1").unwrap().norm(), 5);
        assert_eq!(parse_ideal(k, "hnf:5,2,1").unwrap().norm(), 5);
        assert!(parse_ideal(k, "prime:4").is_err());
        assert!(parse_ideal(k, "x").is_err());
    }

    #[test]
    fn aux_primes_avoid_the_modulus() {
        let k = field_of(-1).unwrap();
        let f = parse_ideal(k, "2,1").unwrap();
        let a = aux_primes(k, &f, 3);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|q| q.is_coprime(&f) && q.norm() % 2 != 0 && q.norm() % 3 != 0));
    }
}
