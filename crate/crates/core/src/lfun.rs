//! Hecke L-functions of ray class characters: Dirichlet series with a
//! certified tail, L'(chi, -j) through the functional equation, and the
//! leading terms of Dedekind zeta functions of ray class fields.

use crate::error::{reject, Error, Result};
use crate::field::{angle_to_complex, ideals_up_to, totient, HeckeCharacter, Ideal, QuadField, RayClassGroup, SplitKind};
use crate::precision::{abs_f, CBall, PrecisionContext};
use crate::special::gamma_upper_int;
use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Serialize, Serializer};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LMethod {
    Dirichlet,
    FunctionalEquation,
    Kronecker,
}

/// Independent low-precision check attached to a Dirichlet-series value.
#[derive(Clone, Debug, Serialize)]
pub struct EulerCheck {
    pub value: CBall,
    pub prime_cutoff: u64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LValueResult {
    pub chi: String,
    /// "s=<value>" for L(chi, s), "L'(-j)" for derivatives.
    pub point: String,
    pub value: CBall,
    pub method: LMethod,
    pub terms_used: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_number: Option<CBall>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler_check: Option<EulerCheck>,
}

#[derive(Clone, Copy, Debug)]
pub struct LSeriesOptions {
    /// Ideals of norm up to this bound enter the partial sum.
    pub cutoff: u64,
    /// Primes up to this bound enter the Euler product check.
    pub euler_cutoff: u64,
    /// Required distance of Re(s) from 1.
    pub margin: f64,
}

impl Default for LSeriesOptions {
    fn default() -> Self {
        LSeriesOptions { cutoff: 1_000_000, euler_cutoff: 1_000_000, margin: 0.25 }
    }
}

/// Value of chi on the prime ideals above one rational prime.
enum LocalChi {
    Split(Complex64, Complex64),
    Inert(Complex64),
    Ramified(Complex64),
}

fn c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

fn chi_c64(chi: &HeckeCharacter, p: &Ideal) -> Result<Complex64> {
    if !p.is_coprime(chi.group().modulus()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (n, d) = chi.angle_of_ideal(p)?;
    let t = 2.0 * std::f64::consts::PI * (n as f64) / (d as f64);
    Ok(Complex64::new(t.cos(), t.sin()))
}

fn local_table(chi: &HeckeCharacter, bound: u64) -> Result<Vec<(u64, LocalChi)>> {
    let field = chi.group().field();
    let mut out = Vec::new();
    for p in crate::arith::primes_up_to(bound as usize) {
        let sp = Ideal::splitting(field, p)?;
        let loc = match sp.kind {
            SplitKind::Split => LocalChi::Split(chi_c64(chi, &sp.primes[0])?, chi_c64(chi, &sp.primes[1])?),
            SplitKind::Inert => LocalChi::Inert(chi_c64(chi, &sp.primes[0])?),
            SplitKind::Ramified => LocalChi::Ramified(chi_c64(chi, &sp.primes[0])?),
        };
        out.push((p as u64, loc));
    }
    Ok(out)
}

/// Sum of chi over ideals of norm p^k.
fn local_coefficient(loc: &LocalChi, k: u32) -> Complex64 {
    match loc {
        LocalChi::Split(a, b) => (0..=k).map(|i| a.powu(i) * b.powu(k - i)).sum(),
        LocalChi::Inert(a) => {
            if k % 2 == 0 {
                a.powu(k / 2)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        LocalChi::Ramified(a) => a.powu(k),
    }
}

/// sum_{n > X} d(n) n^{-sigma} <= sigma (X^{1-sigma}(ln X + 1)/(sigma-1) + X^{1-sigma}/(sigma-1)^2).
pub fn divisor_tail_bound(x: f64, sigma: f64) -> f64 {
    let e = x.powf(1.0 - sigma);
    sigma * (e * (x.ln() + 1.0) / (sigma - 1.0) + e / ((sigma - 1.0) * (sigma - 1.0)))
}

/// Dirichlet coefficients a(n) = sum_{N a = n} chi(a) for n <= cutoff.
fn coefficients(chi: &HeckeCharacter, cutoff: usize) -> Result<Vec<Complex64>> {
    let table = local_table(chi, cutoff as u64)?;
    let mut spf_idx = vec![u32::MAX; cutoff + 1];
    for (i, (p, _)) in table.iter().enumerate() {
        let p = *p as usize;
        let mut m = p;
        while m <= cutoff {
            if spf_idx[m] == u32::MAX {
                spf_idx[m] = i as u32;
            }
            m += p;
        }
    }
    let mut a = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    if cutoff >= 1 {
        a[1] = Complex64::new(1.0, 0.0);
    }
    for n in 2..=cutoff {
        let (p, loc) = &table[spf_idx[n] as usize];
        let p = *p as usize;
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        a[n] = local_coefficient(loc, k) * a[m];
    }
    Ok(a)
}

/// Euler product over prime ideals above rational primes up to `cutoff`,
/// with a bound for the omitted factors.
pub fn euler_product(chi: &HeckeCharacter, s: Complex64, cutoff: u64) -> Result<(Complex64, f64)> {
    let table = local_table(chi, cutoff)?;
    let mut log = Complex64::new(0.0, 0.0);
    let mut add = |z: Complex64, norm: f64| {
        if z.norm_sqr() > 0.0 {
            let t = z * (-s * norm.ln()).exp();
            log -= (Complex64::new(1.0, 0.0) - t).ln();
        }
    };
    for (p, loc) in &table {
        let pf = *p as f64;
        match loc {
            LocalChi::Split(a, b) => {
                add(*a, pf);
                add(*b, pf);
            }
            LocalChi::Inert(a) => add(*a, pf * pf),
            LocalChi::Ramified(a) => add(*a, pf),
        }
    }
    let sigma = s.re;
    let y = cutoff as f64;
    // |log(1 - z)| <= 1.01 |z| for |z| small; at most two primes per rational prime
    let delta = 2.02 * y.powf(1.0 - sigma) / (sigma - 1.0);
    let v = log.exp();
    Ok((v, v.norm() * (delta.exp() - 1.0)))
}

/// L(chi, s) = sum chi(a) N a^{-s} over integral ideals prime to the modulus of chi.
pub fn l_series(chi: &HeckeCharacter, s: &Complex, ctx: &PrecisionContext) -> Result<LValueResult> {
    l_series_with(chi, s, LSeriesOptions::default(), ctx)
}

pub fn l_series_with(chi: &HeckeCharacter, s: &Complex, opts: LSeriesOptions, ctx: &PrecisionContext) -> Result<LValueResult> {
    let s = c64(s);
    if !(s.re >= 1.0 + opts.margin) {
        return reject(format!("Re(s) = {} lies in or near the critical strip; use the functional equation", s.re));
    }
    let cutoff = opts.cutoff as usize;
    let a = coefficients(chi, cutoff)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    for (n, c) in a.iter().enumerate().skip(1).rev() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        terms += 1;
        let t = c * (-s * (n as f64).ln()).exp() - comp;
        let u = sum + t;
        comp = (u - sum) - t;
        sum = u;
    }
    let tail = divisor_tail_bound(cutoff as f64, s.re) + 1e-14 * (terms as f64).sqrt();
    let (e, e_err) = euler_product(chi, s, opts.euler_cutoff)?;
    let difference = (sum - e).norm();
    if difference > tail + e_err + 1e-9 {
        return Err(Error::Numerical(format!(
            "Dirichlet sum and Euler product disagree by {difference:e} (allowed {:e})",
            tail + e_err
        )));
    }
    let ball = |z: Complex64, err: f64| CBall::new(Complex::with_val(53, (z.re, z.im)), Float::with_val(53, err));
    let _ = ctx;
    Ok(LValueResult {
        chi: chi.id_string(),
        point: format!("s={}{:+}i", s.re, s.im),
        value: ball(sum, tail),
        method: LMethod::Dirichlet,
        terms_used: terms,
        root_number: None,
        euler_check: Some(EulerCheck { value: ball(e, e_err), prime_cutoff: opts.euler_cutoff, difference }),
    })
}

/// Smoothed-sum data for a primitive character: the ideals with their
/// character values and the constant c = 2 pi / sqrt(A), A = |d_K| N f.
struct Smoothed {
    c: Float,
    terms: Vec<(i64, Complex)>,
    tail: Float,
    trivial: bool,
    w: u32,
}

impl Smoothed {
    fn new(chi: &HeckeCharacter, t_min: f64, extra_pow: u32, p: u32) -> Result<Smoothed> {
        let field = chi.group().field();
        let f = *chi.group().modulus();
        let a_const = Integer::from(field.disc().abs()) * f.norm();
        let pi = Float::with_val(p, Constant::Pi);
        let c = Float::with_val(p, &pi * 2u32) / Float::with_val(p, Float::with_val(p, &a_const).sqrt());
        let cf = c.to_f64();
        // tail of sum d(n) n^k e^{-c n t}: pick X with X^{k+1} e^{-c X t} / (1 - e^{-ct})^2 below 2^{-p-8}
        let target = (p as f64 + 8.0) * std::f64::consts::LN_2;
        let geo = -2.0 * (1.0 - (-cf * t_min).exp()).ln();
        let mut x = 8.0f64;
        let cost = |x: f64| cf * t_min * x - (extra_pow as f64 + 1.0) * x.ln() - geo;
        while cost(x) < target {
            x *= 1.25;
        }
        let bound = x.ceil() as i64;
        let tail = Float::with_val(64, -cost(x)).exp();
        let mut terms = Vec::new();
        for i in ideals_up_to(field, bound) {
            if !i.is_coprime(&f) {
                continue;
            }
            let (n, d) = chi.angle_of_ideal(&i)?;
            terms.push((i.norm(), angle_to_complex(n, d, p)));
        }
        Ok(Smoothed { c, terms, tail, trivial: chi.is_trivial(), w: field.w_k() })
    }

    /// theta_chi(t) = sum chi(a) exp(-c N a t), conjugated values when `conj`.
    fn theta(&self, t: &Float, conj: bool) -> Complex {
        let p = self.c.prec();
        let mut s = Complex::with_val(p, 0);
        for (n, v) in &self.terms {
            let e = Float::with_val(p, -(&self.c * t.clone()) * *n).exp();
            if conj {
                s += Complex::with_val(p, v.conj_ref()) * e;
            } else {
                s += Complex::with_val(p, v * e);
            }
        }
        s
    }

    /// Lambda(chi, s) at an integer s (with root number w).
    fn lambda(&self, s: i64, w: &Complex) -> Complex {
        let p = self.c.prec();
        let mut first = Complex::with_val(p, 0);
        let mut second = Complex::with_val(p, 0);
        for (n, v) in &self.terms {
            let x = Float::with_val(p, &self.c * *n);
            let g1 = gamma_upper_int(s, &x, p) / Float::with_val(p, x.clone().pow(s as i32));
            let g2 = gamma_upper_int(1 - s, &x, p) * Float::with_val(p, x.clone().pow((s - 1) as i32));
            first += Complex::with_val(p, v * g1);
            second += Complex::with_val(p, v.conj_ref()) * g2;
        }
        let mut out = first + second * w;
        if self.trivial {
            let den = Float::with_val(p, self.w) * (s * (s - 1));
            out += Float::with_val(p, 1) / den;
        }
        out
    }
}

/// Root number W with theta_chi(1/t) = W t theta_conj(t), solved at two
/// values of t; both solutions and |W| = 1 must agree to 2^{-P/2}.
fn root_number(sm: &Smoothed, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.work();
    if sm.trivial {
        return Ok(Complex::with_val(p, 1));
    }
    let tol = Float::with_val(64, -(ctx.target_bits as i32) / 2).exp2();
    let mut best: Option<(Float, Complex)> = None;
    let mut sols = Vec::new();
    for t in [1.25f64, 1.5, 1.1] {
        let tf = Float::with_val(p, t);
        let inv = Float::with_val(p, 1) / &tf;
        let lhs = sm.theta(&inv, false);
        let den = sm.theta(&tf, true) * &tf;
        let mag = abs_f(&den);
        let w = Complex::with_val(p, &lhs / &den);
        sols.push(w.clone());
        if best.as_ref().map(|(m, _)| mag > *m).unwrap_or(true) {
            best = Some((mag, w));
        }
    }
    let (_, w) = best.expect("three solves");
    let spread = sols.iter().map(|s| crate::precision::dist(s, &w)).fold(Float::with_val(64, 0), |a, b| a.max(&b));
    let unit = Float::with_val(64, abs_f(&w) - 1u32).abs();
    if spread > tol || unit > tol {
        return Err(Error::Numerical(format!(
            "root number solve is ill-conditioned: spread {}, ||W|-1| {}",
            spread.to_f64(),
            unit.to_f64()
        )));
    }
    Ok(w)
}

/// L'(chi, -j) from Lambda(chi, -j), Lambda(s) = (sqrt(A)/2pi)^s Gamma(s) L(chi, s),
/// for the primitive character inducing chi.
pub fn functional_equation_lprime(chi: &HeckeCharacter, j: u32, ctx: &PrecisionContext) -> Result<LValueResult> {
    if j == 0 {
        return reject("j must be positive");
    }
    let prim = chi.primitive()?;
    let p = ctx.work();
    let sm = Smoothed::new(&prim, 1.0 / 1.5, j + 2, p)?;
    let w = root_number(&sm, ctx)?;
    let lam = sm.lambda(-(j as i64), &w);
    // 1/Gamma(s) ~ (-1)^j j! (s + j) at s = -j
    let cinv = Float::with_val(p, 1) / &sm.c;
    let mut factor = Float::with_val(p, cinv.pow(j)) * Float::with_val(p, Integer::from(Integer::factorial(j)));
    if j % 2 == 1 {
        factor = -factor;
    }
    let value = lam * &factor;
    let tail = Float::with_val(64, &sm.tail * Float::with_val(64, abs_f(&Complex::with_val(64, &factor))) * 4u32);
    Ok(LValueResult {
        chi: chi.id_string(),
        point: format!("L'(-{j})"),
        value: CBall::with_rounding(value, tail, ctx),
        method: LMethod::FunctionalEquation,
        terms_used: sm.terms.len() as u64,
        root_number: Some(CBall::with_rounding(w, Float::with_val(64, 0), ctx)),
        euler_check: None,
    })
}

/// The ray class field K(f), described by its Galois group over K.
#[derive(Clone, Debug)]
pub struct RayClassField {
    pub group: Arc<RayClassGroup>,
}

impl RayClassField {
    pub fn new(field: QuadField, conductor: Ideal) -> Result<RayClassField> {
        Ok(RayClassField { group: RayClassGroup::new(field, conductor)? })
    }

    pub fn characters(&self) -> Vec<HeckeCharacter> {
        HeckeCharacter::all(&self.group)
    }

    pub fn degree(&self) -> usize {
        self.group.order()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaStar {
    pub m: u32,
    pub value: CBall,
    pub vanishing_order: usize,
    pub factors: Vec<LValueResult>,
}

fn product(values: &[&CBall], ctx: &PrecisionContext) -> CBall {
    let p = ctx.work();
    let mut v = Complex::with_val(p, 1);
    let mut rel = 0.0f64;
    for b in values {
        v *= &b.value;
        let m = abs_f(&b.value).to_f64();
        rel += if m > 0.0 { b.err.to_f64() / m } else { f64::INFINITY };
    }
    let err = abs_f(&v).to_f64() * (rel.exp_m1());
    CBall::with_rounding(v, Float::with_val(64, err), ctx)
}

/// zeta_F^*(1 - m) = prod_chi L'(chi, 1 - m) over the characters of Gal(F/K).
pub fn zeta_star(f: &RayClassField, m: u32, ctx: &PrecisionContext) -> Result<ZetaStar> {
    if m < 2 {
        return reject("m must be at least 2");
    }
    let mut factors = Vec::new();
    for chi in f.characters() {
        let r = functional_equation_lprime(&chi, m - 1, ctx)?;
        if abs_f(&r.value.value) <= Float::with_val(64, &r.value.err) {
            return Err(Error::Numerical(format!("L'({}, {}) is indistinguishable from 0", r.chi, 1i64 - m as i64)));
        }
        factors.push(r);
    }
    let vals: Vec<&CBall> = factors.iter().map(|r| &r.value).collect();
    let value = product(&vals, ctx);
    Ok(ZetaStar { m, value, vanishing_order: factors.len(), factors })
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Rational", 2)?;
    st.serialize_field("num", &r.numer().to_string())?;
    st.serialize_field("den", &r.denom().to_string())?;
    st.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalFactorTerm {
    pub chi: String,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalFactor {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub per_character: Vec<RationalFactorTerm>,
}

impl RationalFactor {
    pub fn numerator(&self) -> Integer {
        self.value.numer().clone()
    }

    pub fn denominator(&self) -> Integer {
        self.value.denom().clone()
    }
}

fn factor_for(f: &Ideal, chi: &HeckeCharacter, m: u32) -> Rational {
    let fact = Integer::from(Integer::factorial(2 * m));
    let sign = if (m - 1) % 2 == 1 { -1 } else { 1 };
    let num = fact * totient(f) * sign;
    let den = Integer::from(2 * f.norm()).pow(m - 1) * totient(chi.conductor());
    Rational::from((num, den))
}

/// prod_chi (-1)^{1-m} (2m)! Phi(f) / ((2 N f)^{m-1} Phi(f_chi)).
pub fn lichtenbaum_rational_factor(f: &RayClassField, m: u32) -> Result<RationalFactor> {
    if m < 2 {
        return reject("m must be at least 2");
    }
    let modulus = *f.group.modulus();
    let mut value = Rational::from(1);
    let mut per = Vec::new();
    for chi in f.characters() {
        let r = factor_for(&modulus, &chi, m);
        value *= &r;
        per.push(RationalFactorTerm { chi: chi.id_string(), value: r });
    }
    Ok(RationalFactor { value, per_character: per })
}

#[derive(Clone, Debug, Serialize)]
pub struct Covolume {
    pub m: u32,
    pub value: CBall,
    pub zeta_star: CBall,
    pub rational_factor: RationalFactor,
    /// |zeta_star - covolume * rational factor|.
    pub identity_residual: f64,
}

/// prod_chi (2 N f)^{m-1} Phi(f_chi) / ((-1)^{1-m} (2m)! Phi(f)) L'(chi, 1 - m).
pub fn covolume_motivic(f: &RayClassField, m: u32, ctx: &PrecisionContext) -> Result<Covolume> {
    let z = zeta_star(f, m, ctx)?;
    let rf = lichtenbaum_rational_factor(f, m)?;
    let p = ctx.work();
    let mut v = Complex::with_val(p, 1);
    for (r, t) in z.factors.iter().zip(&rf.per_character) {
        v *= &r.value.value;
        v /= Float::with_val(p, &t.value);
    }
    let scale = Float::with_val(p, &rf.value);
    let rel = z.value.err.to_f64() / abs_f(&z.value.value).to_f64().max(f64::MIN_POSITIVE);
    let err = Float::with_val(64, abs_f(&v).to_f64() * rel);
    let back = Complex::with_val(p, &v * &scale);
    let residual = crate::precision::dist(&back, &z.value.value).to_f64();
    Ok(Covolume { m, value: CBall::with_rounding(v, err, ctx), zeta_star: z.value, rational_factor: rf, identity_residual: residual })
}
