//! Flat `key = value` suite configuration. Repeated keys build lists.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LvalueCrosscheck,
    EllipticLaws,
    Iwasawa,
    ModularFns,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::LvalueCrosscheck, Suite::EllipticLaws, Suite::Iwasawa, Suite::ModularFns];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::LvalueCrosscheck => "lvalue-crosscheck",
            Suite::EllipticLaws => "elliptic-laws",
            Suite::Iwasawa => "iwasawa",
            Suite::ModularFns => "modular-fns",
        }
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Suite::ALL
            .iter()
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| ConfigError(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharSelection {
    /// Every nontrivial character of the ray class group.
    Nontrivial,
    /// Only characters whose conductor is the full modulus.
    Primitive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub fields: Vec<i64>,
    /// Conductors of norm up to this bound.
    pub conductor_norm: i64,
    /// Explicit conductors (`--conductor` syntax); replace the norm bound when present.
    pub conductors: Vec<String>,
    pub chars: CharSelection,
    pub bits: Vec<u32>,
    pub j: Vec<u32>,
    pub m: Vec<u32>,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub workers: usize,
    /// Bound on [M:L] in the distribution-relation items.
    pub index_bound: i64,
    /// Random points per distribution-relation item.
    pub points: usize,
    /// Precision of the integrality recognition items.
    pub recognition_bits: u32,
    pub primes: Vec<u32>,
    /// Random Herbrand instances per prime.
    pub instances: usize,
    #[serde(skip)]
    pub out: Option<String>,
}

pub const ENV_DEFAULT_BITS: &str = "KF_DEFAULT_BITS";

/// Default precision: KF_DEFAULT_BITS if set, else 128.
pub fn default_bits() -> Result<u32, ConfigError> {
    match std::env::var(ENV_DEFAULT_BITS) {
        Ok(v) => parse_bits(v.trim()),
        Err(_) => Ok(128),
    }
}

pub fn parse_bits(s: &str) -> Result<u32, ConfigError> {
    let b: u32 = s.parse().map_err(|_| ConfigError(format!("bits must be a positive integer, got '{s}'")))?;
    if b < 16 || b > kforge_core::precision::MAX_TARGET_BITS {
        return Err(ConfigError(format!("bits must lie in 16..={}", kforge_core::precision::MAX_TARGET_BITS)));
    }
    Ok(b)
}

impl SuiteConfig {
    /// The default suite: every suite on a small matrix.
    pub fn default_with_bits(bits: u32) -> SuiteConfig {
        SuiteConfig {
            fields: vec![-1, -7],
            conductor_norm: 9,
            conductors: vec![],
            chars: CharSelection::Nontrivial,
            bits: vec![bits],
            j: vec![1],
            m: vec![2],
            suites: Suite::ALL.to_vec(),
            seed: 1,
            workers: 1,
            index_bound: 5,
            points: 4,
            recognition_bits: 2 * bits,
            primes: vec![3, 5, 7],
            instances: 10,
            out: None,
        }
    }

    pub fn parse(text: &str) -> Result<SuiteConfig, ConfigError> {
        let mut c = SuiteConfig::default_with_bits(default_bits()?);
        let mut seen: Vec<&str> = Vec::new();
        let mut recognition_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let err = |what: &str| ConfigError(format!("line {}: {k}: {what}", lineno + 1));
            let first = !seen.contains(&k);
            match k {
                "field" => {
                    if first {
                        c.fields.clear();
                    }
                    c.fields.push(v.parse().map_err(|_| err("expected an integer"))?);
                }
                "conductor" => c.conductors.push(v.to_string()),
                "conductor_norm" => c.conductor_norm = v.parse().map_err(|_| err("expected an integer"))?,
                "chars" => {
                    c.chars = match v {
                        "nontrivial" => CharSelection::Nontrivial,
                        "primitive" => CharSelection::Primitive,
                        _ => return Err(err("expected nontrivial or primitive")),
                    }
                }
                "bits" => {
                    if first {
                        c.bits.clear();
                    }
                    c.bits.push(parse_bits(v).map_err(|e| err(&e.0))?);
                }
                "j" => {
                    if first {
                        c.j.clear();
                    }
                    c.j.push(v.parse().map_err(|_| err("expected an integer"))?);
                }
                "m" => {
                    if first {
                        c.m.clear();
                    }
                    c.m.push(v.parse().map_err(|_| err("expected an integer"))?);
                }
                "suite" => {
                    if first {
                        c.suites.clear();
                    }
                    if !v.is_empty() {
                        c.suites.push(v.parse().map_err(|e: ConfigError| err(&e.0))?);
                    }
                }
                "seed" => c.seed = v.parse().map_err(|_| err("expected an integer"))?,
                "workers" => c.workers = v.parse().map_err(|_| err("expected an integer"))?,
                "index_bound" => c.index_bound = v.parse().map_err(|_| err("expected an integer"))?,
                "points" => c.points = v.parse().map_err(|_| err("expected an integer"))?,
                "recognition_bits" => {
                    c.recognition_bits = parse_bits(v).map_err(|e| err(&e.0))?;
                    recognition_set = true;
                }
                "prime" => {
                    if first {
                        c.primes.clear();
                    }
                    c.primes.push(v.parse().map_err(|_| err("expected an integer"))?);
                }
                "instances" => c.instances = v.parse().map_err(|_| err("expected an integer"))?,
                "out" => c.out = Some(v.to_string()),
                _ => return Err(ConfigError(format!("line {}: unknown key '{k}'", lineno + 1))),
            }
            if first {
                seen.push(k);
            }
        }
        if !recognition_set {
            c.recognition_bits = 2 * c.bits.iter().copied().max().unwrap_or(128);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.suites.is_empty() {
            return Err(ConfigError("no suite enabled".into()));
        }
        if self.fields.is_empty() || self.fields.iter().any(|&d| d >= 0) {
            return Err(ConfigError("fields must be a nonempty list of negative integers".into()));
        }
        if self.bits.is_empty() {
            return Err(ConfigError("at least one precision is required".into()));
        }
        if self.conductor_norm < 1 || self.index_bound < 1 || self.points == 0 || self.workers == 0 {
            return Err(ConfigError("bounds must be positive".into()));
        }
        if self.j.iter().any(|&j| j == 0) {
            return Err(ConfigError("j must be positive".into()));
        }
        if self.m.iter().any(|&m| m < 2) {
            return Err(ConfigError("m must be at least 2".into()));
        }
        if self.primes.iter().any(|&p| p < 3 || !kforge_core::arith::is_prime(p as i64)) {
            return Err(ConfigError("primes must be odd primes".into()));
        }
        let mut s = self.suites.clone();
        s.sort();
        s.dedup();
        if s.len() != self.suites.len() {
            return Err(ConfigError("a suite is listed twice".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_keys_build_lists() {
        let c = SuiteConfig::parse("field = -1\nfield = -7\nsuite = iwasawa\nbits = 64 # low\nprime = 5\n").unwrap();
        assert_eq!(c.fields, vec![-1, -7]);
        assert_eq!(c.suites, vec![Suite::Iwasawa]);
        assert_eq!(c.bits, vec![64]);
        assert_eq!(c.primes, vec![5]);
        assert_eq!(c.recognition_bits, 128);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SuiteConfig::parse("colour = red").is_err());
        assert!(SuiteConfig::parse("field = 3").is_err());
        assert!(SuiteConfig::parse("suite = nope").is_err());
        assert!(SuiteConfig::parse("m = 1").is_err());
        assert!(SuiteConfig::parse("field -1").is_err());
        assert_eq!(SuiteConfig::parse("suite =").unwrap_err().0, "no suite enabled");
    }
}
