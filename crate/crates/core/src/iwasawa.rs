//! One-variable Iwasawa algebra Z_p[[T]] at finite truncation, Weierstrass
//! preparation, characteristic ideals, eigenspace idempotents and Herbrand
//! quotients of Z_p[[T]]-module maps.

use crate::arith::{left_kernel, smith_diagonal, IMat};
use crate::error::{reject, Error, Result};
use crate::field::GroupStructure;
use rand::Rng;
use rug::ops::Pow;
use rug::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub const DEFAULT_TRUNCATION: (u32, usize) = (32, 64);
pub const BUMPED_TRUNCATION: (u32, usize) = (40, 96);

fn vp(x: &Integer, p: u32) -> u32 {
    if *x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    let mut y = x.clone();
    while y.is_divisible_u(p) {
        y /= p;
        v += 1;
    }
    v
}

/// Element of (Z/p^N)[T]/(T^M).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElement {
    p: u32,
    n: u32,
    modulus: Integer,
    coeffs: Vec<Integer>,
}

impl Serialize for LambdaElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LambdaElement", 3)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("N", &self.n)?;
        let c: Vec<String> = self.coeffs.iter().map(|x| x.to_string()).collect();
        st.serialize_field("coeffs", &c)?;
        st.end()
    }
}

impl LambdaElement {
    pub fn new(p: u32, n: u32, m: usize, coeffs: Vec<Integer>) -> Result<LambdaElement> {
        if p < 3 || !crate::arith::is_prime(p as i64) {
            return reject(format!("{p} is not an odd prime"));
        }
        if n == 0 || m == 0 {
            return reject("truncation must be positive");
        }
        let modulus = Integer::from(p).pow(n);
        let mut c = coeffs;
        c.resize(m, Integer::new());
        c.truncate(m);
        for x in c.iter_mut() {
            *x %= &modulus;
            if *x < 0 {
                *x += &modulus;
            }
        }
        Ok(LambdaElement { p, n, modulus, coeffs: c })
    }

    pub fn from_i64(p: u32, n: u32, m: usize, coeffs: &[i64]) -> Result<LambdaElement> {
        LambdaElement::new(p, n, m, coeffs.iter().map(|&x| Integer::from(x)).collect())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> (u32, usize) {
        (self.n, self.coeffs.len())
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    fn like(&self, coeffs: Vec<Integer>) -> LambdaElement {
        LambdaElement::new(self.p, self.n, self.coeffs.len(), coeffs).expect("same truncation")
    }

    pub fn zero_like(&self) -> LambdaElement {
        self.like(vec![])
    }

    pub fn one_like(&self) -> LambdaElement {
        self.like(vec![Integer::from(1)])
    }

    fn check(&self, o: &LambdaElement) {
        assert!(self.p == o.p && self.n == o.n && self.coeffs.len() == o.coeffs.len(), "truncations differ");
    }

    pub fn add(&self, o: &LambdaElement) -> LambdaElement {
        self.check(o);
        self.like(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Integer::from(a + b)).collect())
    }

    pub fn sub(&self, o: &LambdaElement) -> LambdaElement {
        self.check(o);
        self.like(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Integer::from(a - b)).collect())
    }

    pub fn neg(&self) -> LambdaElement {
        self.like(self.coeffs.iter().map(|a| Integer::from(-a)).collect())
    }

    pub fn mul(&self, o: &LambdaElement) -> LambdaElement {
        self.check(o);
        let m = self.coeffs.len();
        let mut c = vec![Integer::new(); m];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(m - i).enumerate() {
                c[i + j] += Integer::from(a * b);
            }
        }
        self.like(c)
    }

    pub fn scale(&self, k: &Integer) -> LambdaElement {
        self.like(self.coeffs.iter().map(|a| Integer::from(a * k)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn is_unit(&self) -> bool {
        !self.coeffs[0].is_divisible_u(self.p)
    }

    /// Inverse of a unit by Newton iteration on power series.
    pub fn inverse(&self) -> Result<LambdaElement> {
        if !self.is_unit() {
            return reject("not a unit: constant term divisible by p");
        }
        let c0 = self.coeffs[0].clone().invert(&self.modulus).expect("unit");
        let mut x = self.like(vec![c0]);
        let two = self.like(vec![Integer::from(2)]);
        // each step doubles the correct p-adic and T-adic precision
        for _ in 0..(2 * (self.n as usize + self.coeffs.len())).next_power_of_two().trailing_zeros() + 2 {
            x = x.mul(&two.sub(&self.mul(&x)));
        }
        debug_assert!(self.mul(&x) == self.one_like());
        Ok(x)
    }

    /// min v_p of the coefficients, None if zero in the truncation.
    pub fn mu(&self) -> Option<u32> {
        self.coeffs.iter().map(|c| vp(c, self.p)).min().filter(|&v| v != u32::MAX)
    }

    /// Least i with v_p(c_i) = mu.
    pub fn lambda(&self) -> Option<usize> {
        let mu = self.mu()?;
        self.coeffs.iter().position(|c| vp(c, self.p) == mu)
    }

    /// Same element at another truncation. Raising the p-adic precision lifts
    /// each coefficient to its representative of least absolute value.
    pub fn retruncate(&self, n: u32, m: usize) -> LambdaElement {
        let half = Integer::from(&self.modulus >> 1);
        let coeffs = if n > self.n {
            self.coeffs.iter().map(|c| if *c > half { Integer::from(c - &self.modulus) } else { c.clone() }).collect()
        } else {
            self.coeffs.clone()
        };
        LambdaElement::new(self.p, n, m, coeffs).expect("valid truncation")
    }

    pub fn from_poly(p: u32, n: u32, m: usize, poly: &[Integer]) -> LambdaElement {
        LambdaElement::new(p, n, m, poly.to_vec()).expect("valid truncation")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Weierstrass {
    pub unit: LambdaElement,
    /// Monic, lower coefficients divisible by p; constant term first.
    #[serde(serialize_with = "ser_ints")]
    pub distinguished: Vec<Integer>,
    pub mu: u32,
    /// p-adic precision of unit and polynomial.
    pub precision: u32,
}

fn ser_ints<S: Serializer>(v: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    let c: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    c.serialize(s)
}

impl Weierstrass {
    pub fn lambda(&self) -> usize {
        self.distinguished.len() - 1
    }
}

fn poly_mod(a: &mut Vec<Integer>, m: &Integer) {
    for x in a.iter_mut() {
        *x %= m;
        if *x < 0 {
            *x += m;
        }
    }
    while a.len() > 1 && a.last().map(|x| *x == 0).unwrap_or(false) {
        a.pop();
    }
}

fn poly_mul(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let mut c = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += Integer::from(x * y);
        }
    }
    c
}

fn poly_add(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| Integer::from(a.get(i).unwrap_or(&Integer::ZERO) + b.get(i).unwrap_or(&Integer::ZERO)))
        .collect()
}

/// f = p^mu * U * P with U a unit and P distinguished.
pub fn weierstrass_prep(f: &LambdaElement) -> Result<Weierstrass> {
    let p = f.p;
    let mu = f.mu().ok_or_else(|| Error::Rejected("f vanishes in the truncation".into()))?;
    if mu >= f.n {
        return reject("truncation too small to separate mu");
    }
    let n = f.n - mu;
    let pn = Integer::from(p).pow(n);
    let pp = Integer::from(p);
    let pmu = Integer::from(p).pow(mu);
    let g: Vec<Integer> = f.coeffs.iter().map(|c| Integer::from(c / &pmu)).collect();
    let lam = f.lambda().expect("nonzero");
    if lam == 0 {
        let unit = LambdaElement::new(p, n, f.coeffs.len(), g)?;
        return Ok(Weierstrass { unit, distinguished: vec![Integer::from(1)], mu, precision: n });
    }
    // Hensel lifting of g = T^lam * B mod p with B(0) a unit
    let mut a: Vec<Integer> = vec![Integer::new(); lam + 1];
    a[lam] = Integer::from(1);
    let mut b: Vec<Integer> = g[lam..].to_vec();
    // Bezout mod p: s T^lam + t B = 1, t = B^{-1} mod T^lam
    let b0inv = b[0].clone().invert(&pp).expect("unit");
    let mut t = vec![Integer::new(); lam.max(1)];
    if lam > 0 {
        t[0] = b0inv.clone();
        for k in 1..lam {
            let mut acc = Integer::new();
            for i in 1..=k {
                if i < b.len() {
                    acc += Integer::from(&b[i] * &t[k - i]);
                }
            }
            t[k] = Integer::from(-acc * &b0inv);
        }
        poly_mod(&mut t, &pp);
    } else {
        t = vec![Integer::new()];
    }
    let s: Vec<Integer> = if lam > 0 {
        let mut one_minus = poly_mul(&t, &b);
        for x in one_minus.iter_mut() {
            *x = Integer::from(-&*x);
        }
        one_minus[0] += 1;
        poly_mod(&mut one_minus, &pp);
        let mut q: Vec<Integer> = one_minus.iter().skip(lam).cloned().collect();
        if q.is_empty() {
            q.push(Integer::new());
        }
        q
    } else {
        vec![Integer::new()]
    };
    let mut pk = Integer::from(p);
    for _ in 1..n {
        // E = (g - A B) / p^k mod p
        let ab = poly_mul(&a, &b);
        let mut e: Vec<Integer> = poly_add(&g, &ab.iter().map(|x| Integer::from(-x)).collect::<Vec<_>>());
        for x in e.iter_mut() {
            debug_assert!(x.is_divisible(&pk));
            *x = Integer::from(&*x / &pk);
        }
        poly_mod(&mut e, &pp);
        let te = {
            let mut v = poly_mul(&t, &e);
            poly_mod(&mut v, &pp);
            v
        };
        let r: Vec<Integer> = (0..lam).map(|i| te.get(i).cloned().unwrap_or_default()).collect();
        let q: Vec<Integer> = if te.len() > lam { te[lam..].to_vec() } else { vec![Integer::new()] };
        let mut corr = poly_add(&poly_mul(&s, &e), &poly_mul(&q, &b));
        poly_mod(&mut corr, &pp);
        for (i, x) in r.iter().enumerate() {
            a[i] += Integer::from(x * &pk);
        }
        let corr: Vec<Integer> = corr.into_iter().map(|x| x * &pk).collect();
        b = poly_add(&b, &corr);
        poly_mod(&mut b, &Integer::from(&pk * p));
        pk *= p;
    }
    poly_mod(&mut a, &pn);
    a.resize(lam + 1, Integer::new());
    a[lam] = Integer::from(1);
    let unit = LambdaElement::new(p, n, f.coeffs.len(), b)?;
    Ok(Weierstrass { unit, distinguished: a, mu, precision: n })
}

/// Relation matrix of a finitely presented module Lambda^c / (rows).
#[derive(Clone, Debug, Serialize)]
pub struct LambdaModulePresentation {
    pub rows: Vec<Vec<LambdaElement>>,
}

impl LambdaModulePresentation {
    pub fn cyclic(f: LambdaElement) -> Self {
        LambdaModulePresentation { rows: vec![vec![f]] }
    }

    pub fn diagonal(fs: Vec<LambdaElement>) -> Self {
        let z = fs[0].zero_like();
        let n = fs.len();
        let rows = fs
            .into_iter()
            .enumerate()
            .map(|(i, f)| (0..n).map(|j| if i == j { f.clone() } else { z.clone() }).collect())
            .collect();
        LambdaModulePresentation { rows }
    }

    pub fn generators(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn direct_sum(&self, o: &LambdaModulePresentation) -> LambdaModulePresentation {
        let z = self.rows[0][0].zero_like();
        let (c1, c2) = (self.generators(), o.generators());
        let mut rows = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.extend(std::iter::repeat(z.clone()).take(c2));
            rows.push(v);
        }
        for r in &o.rows {
            let mut v: Vec<LambdaElement> = std::iter::repeat(z.clone()).take(c1).collect();
            v.extend(r.iter().cloned());
            rows.push(v);
        }
        LambdaModulePresentation { rows }
    }
}

/// Determinant by cofactor expansion in the truncated ring.
pub fn determinant(m: &[Vec<LambdaElement>]) -> LambdaElement {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = m[0][0].zero_like();
    for j in 0..n {
        let minor: Vec<Vec<LambdaElement>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][j].mul(&determinant(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct CharIdeal {
    pub mu: u32,
    /// Distinguished part, constant term first.
    #[serde(serialize_with = "ser_ints")]
    pub distinguished: Vec<Integer>,
    /// p^mu times the distinguished part.
    pub generator: LambdaElement,
}

/// Characteristic ideal of a square torsion presentation, normalized to
/// p^mu times a distinguished polynomial.
pub fn char_ideal(m: &LambdaModulePresentation) -> Result<CharIdeal> {
    let (r, c) = (m.rows.len(), m.generators());
    if r < c {
        return reject("fewer relations than generators: the module is not torsion");
    }
    if r > c {
        return Err(Error::Unsupported("only square presentations are supported".into()));
    }
    let d = determinant(&m.rows);
    if d.is_zero() {
        return reject("determinant vanishes in the truncation: not torsion");
    }
    let w = weierstrass_prep(&d)?;
    let x = &m.rows[0][0];
    let pmu = Integer::from(x.p).pow(w.mu);
    let gen = LambdaElement::from_poly(x.p, x.n, x.coeffs.len(), &w.distinguished).scale(&pmu);
    Ok(CharIdeal { mu: w.mu, distinguished: w.distinguished, generator: gen })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientOrder {
    Finite(#[serde(serialize_with = "ser_int")] Integer),
    /// The order grew when the truncation was bumped.
    Infinite,
}

fn ser_int<S: Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Order of a finite module over Z/p^N given by relation rows, by
/// elimination at a pivot of least valuation.
fn order_mod_pn(mut rel: Vec<Vec<Integer>>, cols: usize, p: u32, n: u32) -> Integer {
    let pn = Integer::from(p).pow(n);
    for r in rel.iter_mut() {
        for x in r.iter_mut() {
            *x %= &pn;
            if *x < 0 {
                *x += &pn;
            }
        }
    }
    let mut log = 0u32;
    let mut active: Vec<usize> = (0..cols).collect();
    let mut rows: Vec<Vec<Integer>> = rel;
    while !active.is_empty() {
        // pivot of least valuation
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, r) in rows.iter().enumerate() {
            for &c in &active {
                let v = vp(&r[c], p);
                if v < n && best.map(|b| v < b.0).unwrap_or(true) {
                    best = Some((v, ri, c));
                    if v == 0 {
                        break;
                    }
                }
            }
            if best.map(|b| b.0 == 0).unwrap_or(false) {
                break;
            }
        }
        let Some((v, ri, c)) = best else {
            log += n * active.len() as u32;
            break;
        };
        log += v;
        let pivot_row = rows.swap_remove(ri);
        let pv = Integer::from(p).pow(v);
        let unit = Integer::from(&pivot_row[c] / &pv);
        let uinv = unit.invert(&pn).expect("unit");
        for r in rows.iter_mut() {
            if r[c] == 0 {
                continue;
            }
            let factor = Integer::from(&r[c] / &pv) * &uinv % &pn;
            for &k in &active {
                let t = Integer::from(&factor * &pivot_row[k]);
                r[k] -= t;
                r[k] %= &pn;
                if r[k] < 0 {
                    r[k] += &pn;
                }
            }
        }
        active.retain(|&k| k != c);
    }
    Integer::from(p).pow(log)
}

fn quotient_order_at(m: &LambdaModulePresentation, g: &LambdaElement, n: u32, k: usize) -> Integer {
    let c = m.generators();
    let p = g.p;
    let mut rels: Vec<Vec<LambdaElement>> = m.rows.iter().map(|r| r.iter().map(|x| x.retruncate(n, k)).collect()).collect();
    let gk = g.retruncate(n, k);
    let z = gk.zero_like();
    for i in 0..c {
        rels.push((0..c).map(|j| if i == j { gk.clone() } else { z.clone() }).collect());
    }
    // Z-relations: T^s * rel for s < k, coordinates (generator, degree)
    let mut out = Vec::new();
    for r in &rels {
        for s in 0..k {
            let mut v = vec![Integer::new(); c * k];
            for (j, x) in r.iter().enumerate() {
                for (d, a) in x.coeffs.iter().enumerate() {
                    if d + s < k && *a != 0 {
                        v[j * k + d + s] = a.clone();
                    }
                }
            }
            out.push(v);
        }
    }
    order_mod_pn(out, c * k, p, n)
}

/// #(M / gM), certified by agreement between the default and bumped truncations.
pub fn finite_quotient_order(m: &LambdaModulePresentation, g: &LambdaElement) -> QuotientOrder {
    let (n0, k0) = DEFAULT_TRUNCATION;
    let (n1, k1) = BUMPED_TRUNCATION;
    finite_quotient_order_with(m, g, (n0, k0), (n1, k1))
}

pub fn finite_quotient_order_with(
    m: &LambdaModulePresentation,
    g: &LambdaElement,
    first: (u32, usize),
    bumped: (u32, usize),
) -> QuotientOrder {
    let a = quotient_order_at(m, g, first.0, first.1);
    let b = quotient_order_at(m, g, bumped.0, bumped.1);
    if a == b {
        QuotientOrder::Finite(a)
    } else {
        QuotientOrder::Infinite
    }
}

/// Element of (Z/p^N)[Delta], coefficients indexed like `GroupStructure::elements`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    pub group: GroupStructure,
    pub p: u32,
    pub n: u32,
    pub coeffs: Vec<Integer>,
}

impl Serialize for GroupAlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GroupAlgebraElement", 4)?;
        st.serialize_field("group", &self.group.invariant_factors)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("N", &self.n)?;
        let c: Vec<String> = self.coeffs.iter().map(|x| x.to_string()).collect();
        st.serialize_field("coeffs", &c)?;
        st.end()
    }
}

impl GroupAlgebraElement {
    fn modulus(&self) -> Integer {
        Integer::from(self.p).pow(self.n)
    }

    fn index_of(&self, e: &[i64]) -> usize {
        // coordinate 0 varies fastest
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (x, n) in e.iter().zip(&self.group.invariant_factors) {
            idx += (*x as usize) * stride;
            stride *= *n as usize;
        }
        idx
    }

    pub fn zero(group: &GroupStructure, p: u32, n: u32) -> Self {
        GroupAlgebraElement { group: group.clone(), p, n, coeffs: vec![Integer::new(); group.order() as usize] }
    }

    pub fn one(group: &GroupStructure, p: u32, n: u32) -> Self {
        let mut e = GroupAlgebraElement::zero(group, p, n);
        e.coeffs[0] = Integer::from(1);
        e
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.modulus();
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Integer::from(a + b) % &m).collect();
        GroupAlgebraElement { coeffs, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.modulus();
        let els = self.group.elements();
        let mut out = vec![Integer::new(); els.len()];
        for (i, a) in els.iter().enumerate() {
            if self.coeffs[i] == 0 {
                continue;
            }
            for (j, b) in els.iter().enumerate() {
                let k = self.index_of(&self.group.add(a, b));
                out[k] += Integer::from(&self.coeffs[i] * &o.coeffs[j]);
            }
        }
        for x in out.iter_mut() {
            *x %= &m;
        }
        GroupAlgebraElement { coeffs: out, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }
}

/// Teichmueller lift of a primitive root mod p, to precision p^n.
fn teichmuller_generator(p: u32, n: u32) -> Integer {
    let pn = Integer::from(p).pow(n);
    let g = (2..p)
        .find(|&g| {
            let f = crate::arith::factor((p - 1) as i64);
            f.iter().all(|(q, _)| crate::arith::pow_mod(g as i64, ((p - 1) as i64 / q) as u64, p as i64) != 1)
        })
        .expect("primitive root exists");
    let e = Integer::from(p).pow(n - 1);
    Integer::from(g).pow_mod(&e, &pn).expect("power")
}

/// e_chi = |Delta|^{-1} sum_tau chi(tau) tau^{-1} for a character with values
/// in the (p-1)-st roots of unity of Z_p.
pub fn idempotent(group: &GroupStructure, dual: &[i64], p: u32, n: u32) -> Result<GroupAlgebraElement> {
    let order = group.order();
    if order % p as i64 == 0 {
        return reject(format!("p = {p} divides the group order {order}"));
    }
    if dual.len() != group.invariant_factors.len() {
        return reject("character has the wrong number of coordinates");
    }
    let l = group.invariant_factors.iter().fold(1i64, |a, &n| {
        let g = Integer::from(a).gcd(&Integer::from(n)).to_i64().expect("small");
        a / g * n
    });
    if (p as i64 - 1) % l != 0 {
        return Err(Error::Unsupported(format!(
            "character values need the {l}-th roots of unity, which are not in Z_{p}"
        )));
    }
    let pn = Integer::from(p).pow(n);
    let zeta = Integer::from(teichmuller_generator(p, n).pow_mod(&Integer::from((p as i64 - 1) / l), &pn).expect("power"));
    let inv_order = Integer::from(order).invert(&pn).expect("p does not divide the order");
    let mut e = GroupAlgebraElement::zero(group, p, n);
    for tau in group.elements() {
        // chi(tau) = zeta^{sum k_i e_i l / n_i}
        let mut k = 0i64;
        for ((d, x), m) in dual.iter().zip(&tau).zip(&group.invariant_factors) {
            k += (d * x).rem_euclid(*m) * (l / m);
        }
        let val = Integer::from(zeta.pow_mod_ref(&Integer::from(k.rem_euclid(l)), &pn).expect("power"));
        let idx = e.index_of(&group.neg(&tau));
        e.coeffs[idx] = Integer::from(&val * &inv_order) % &pn;
    }
    Ok(e)
}

/// A Z_p[[T]]-module that is free of finite rank over Z_p, with T acting
/// by an integer matrix that is nilpotent mod p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpModule {
    pub t_action: IMat,
}

impl ZpModule {
    pub fn new(t_action: IMat, p: u32) -> Result<ZpModule> {
        let n = t_action.len();
        if t_action.iter().any(|r| r.len() != n) {
            return reject("T must act by a square matrix");
        }
        // nilpotent mod p: M^n = 0 mod p
        let mut pw = identity(n);
        for _ in 0..n {
            pw = mat_mul(&pw, &t_action);
            for r in pw.iter_mut() {
                for x in r.iter_mut() {
                    *x %= p;
                }
            }
        }
        if pw.iter().flatten().any(|x| *x != 0) {
            return reject("T must act topologically nilpotently");
        }
        Ok(ZpModule { t_action })
    }

    /// Lambda/(f) for f distinguished, as Z_p^deg f with the companion matrix.
    pub fn from_distinguished(f: &[i64], p: u32) -> Result<ZpModule> {
        let d = f.len() - 1;
        if f[d] != 1 || f[..d].iter().any(|c| c % p as i64 != 0) {
            return reject("polynomial is not distinguished");
        }
        let mut m = vec![vec![Integer::new(); d]; d];
        for i in 1..d {
            m[i][i - 1] = Integer::from(1);
        }
        for (i, c) in f[..d].iter().enumerate() {
            m[i][d - 1] = Integer::from(-c);
        }
        ZpModule::new(m, p)
    }

    pub fn rank(&self) -> usize {
        self.t_action.len()
    }

    /// Lambda^n / (T e_i - M e_i).
    pub fn presentation(&self, p: u32, n: u32, m: usize) -> LambdaModulePresentation {
        let k = self.rank();
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let mut c = vec![Integer::from(-&self.t_action[j][i])];
                        if i == j {
                            c.push(Integer::from(1));
                        }
                        LambdaElement::from_poly(p, n, m, &c)
                    })
                    .collect()
            })
            .collect();
        LambdaModulePresentation { rows }
    }

    /// Characteristic polynomial det(T - M), constant term first (Faddeev-LeVerrier
    /// over Q, exact).
    pub fn char_poly(&self) -> Vec<Integer> {
        let n = self.rank();
        let mut coeffs = vec![Integer::new(); n + 1];
        coeffs[n] = Integer::from(1);
        let mut mk = identity(n);
        for k in 1..=n {
            let am = mat_mul(&self.t_action, &mk);
            let tr: Integer = (0..n).map(|i| am[i][i].clone()).sum();
            let c = Integer::from(-tr) / k as u32;
            coeffs[n - k] = c.clone();
            mk = am;
            for i in 0..n {
                mk[i][i] += &c;
            }
        }
        coeffs
    }

    pub fn apply_poly(&self, g: &[i64]) -> IMat {
        let n = self.rank();
        let mut acc = vec![vec![Integer::new(); n]; n];
        let mut pw = identity(n);
        for &c in g {
            for i in 0..n {
                for j in 0..n {
                    acc[i][j] += Integer::from(&pw[i][j] * c);
                }
            }
            pw = mat_mul(&pw, &self.t_action);
        }
        acc
    }

    pub fn direct_sum(&self, o: &ZpModule) -> ZpModule {
        let (a, b) = (self.rank(), o.rank());
        let mut m = vec![vec![Integer::new(); a + b]; a + b];
        for i in 0..a {
            for j in 0..a {
                m[i][j] = self.t_action[i][j].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                m[a + i][a + j] = o.t_action[i][j].clone();
            }
        }
        ZpModule { t_action: m }
    }
}

fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect()).collect()
}

fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let m = if b.is_empty() { 0 } else { b[0].len() };
    let mut c = vec![vec![Integer::new(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += Integer::from(&a[i][k] * &bk[j]);
            }
        }
    }
    c
}

fn transpose(a: &IMat, rows: usize, cols: usize) -> IMat {
    (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect()
}

/// 0 -> A -> X -> Y -> B -> 0 with A = ker(phi), B = coker(phi).
#[derive(Clone, Debug)]
pub struct ExactSequenceData {
    pub x: ZpModule,
    pub y: ZpModule,
    /// Matrix of phi: columns are images of the basis of X.
    pub phi: IMat,
    pub p: u32,
}

impl ExactSequenceData {
    pub fn new(x: ZpModule, y: ZpModule, phi: IMat, p: u32) -> Result<ExactSequenceData> {
        if phi.len() != y.rank() || phi.iter().any(|r| r.len() != x.rank()) {
            return reject("phi has the wrong shape");
        }
        if mat_mul(&phi, &x.t_action) != mat_mul(&y.t_action, &phi) {
            return reject("phi does not commute with T");
        }
        Ok(ExactSequenceData { x, y, phi, p })
    }
}

/// p-part of an order, or None for an infinite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOrder {
    Finite(#[serde(serialize_with = "ser_int")] Integer),
    Infinite,
}

impl GroupOrder {
    pub fn finite(&self) -> Option<&Integer> {
        match self {
            GroupOrder::Finite(n) => Some(n),
            GroupOrder::Infinite => None,
        }
    }
}

fn p_part(x: &Integer, p: u32) -> Integer {
    Integer::from(p).pow(vp(x, p))
}

/// [sat : lattice] for the row span, together with its rank.
fn smith_index(rows: &IMat, p: u32) -> (usize, Integer) {
    if rows.is_empty() || rows[0].is_empty() {
        return (0, Integer::from(1));
    }
    let d = smith_diagonal(rows);
    let nz: Vec<&Integer> = d.iter().filter(|x| **x != 0).collect();
    let prod = nz.iter().fold(Integer::from(1), |a, b| a * p_part(b, p));
    (nz.len(), prod)
}

/// p-part of [big : small] for row spans with small inside big.
fn lattice_index(big: &IMat, small: &IMat, p: u32) -> GroupOrder {
    let (rb, ib) = smith_index(big, p);
    let (rs, is) = smith_index(small, p);
    if rb != rs {
        return GroupOrder::Infinite;
    }
    GroupOrder::Finite(is / ib)
}

/// Integer kernel {v : M v = 0} as rows.
fn kernel(m: &IMat, cols: usize) -> IMat {
    let t = transpose(m, m.len(), cols);
    left_kernel(&t)
}

fn apply(m: &IMat, v: &[Integer]) -> Vec<Integer> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| Integer::from(a * b)).sum()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct HerbrandRecord {
    pub ker_alpha: GroupOrder,
    pub coker_alpha: GroupOrder,
    pub ker_beta: GroupOrder,
    pub coker_beta: GroupOrder,
    /// None when some order is infinite or the truncated cross-check is unstable.
    pub equal: Option<bool>,
    pub char_polys_agree: bool,
    /// #X_Gamma and #Y_Gamma agree between the exact model and the truncated
    /// Lambda-presentation at two truncations.
    pub truncation_stable: bool,
}

impl HerbrandRecord {
    pub fn conclusive(&self) -> bool {
        self.equal.is_some()
    }
}

/// Orders of ker and coker of alpha: X^Gamma -> Y^Gamma and beta: X_Gamma -> Y_Gamma.
pub fn herbrand_check(seq: &ExactSequenceData) -> Result<HerbrandRecord> {
    let p = seq.p;
    let (n, m) = (seq.x.rank(), seq.y.rank());
    let char_polys_agree = seq.x.char_poly() == seq.y.char_poly();
    if !char_polys_agree {
        return reject("X and Y must have the same characteristic polynomial");
    }
    let mx = &seq.x.t_action;
    let my = &seq.y.t_action;
    let phi = &seq.phi;

    // X^Gamma = ker M_X, Y^Gamma = ker M_Y (saturated row bases)
    let kx = kernel(mx, n);
    let ky = kernel(my, m);
    let img: IMat = kx.iter().map(|v| apply(phi, v)).collect();
    let (rank_img, _) = smith_index(&img, p);
    let ker_alpha = if rank_img < kx.len() { GroupOrder::Infinite } else { GroupOrder::Finite(Integer::from(1)) };
    let coker_alpha = lattice_index(&ky, &img, p);

    // X_Gamma = X / M_X X; beta induced by phi
    let phi_cols = transpose(phi, m, n);
    let my_cols = transpose(my, m, m);
    let mut gens = phi_cols.clone();
    gens.extend(my_cols.iter().cloned());
    let full = identity(m);
    let coker_beta = lattice_index(&full, &gens, p);
    // preimage of M_Y Y under phi, modulo M_X X
    let mut stacked: IMat = Vec::new();
    for i in 0..m {
        let mut r: Vec<Integer> = phi[i].clone();
        r.extend(my[i].iter().map(|x| Integer::from(-x)));
        stacked.push(r);
    }
    let sol = kernel(&stacked, n + m);
    let pre: IMat = sol.iter().map(|v| v[..n].to_vec()).collect();
    let mx_cols = transpose(mx, n, n);
    let ker_beta = lattice_index(&pre, &mx_cols, p);

    let truncation_stable = coinvariants_stable(&seq.x, p) && coinvariants_stable(&seq.y, p);
    let equal = match (ker_alpha.finite(), coker_alpha.finite(), ker_beta.finite(), coker_beta.finite()) {
        (Some(a), Some(b), Some(c), Some(d)) if truncation_stable => Some(Integer::from(a * d) == Integer::from(b * c)),
        _ => None,
    };
    Ok(HerbrandRecord { ker_alpha, coker_alpha, ker_beta, coker_beta, equal, char_polys_agree, truncation_stable })
}

pub const HERBRAND_TRUNCATION: (u32, usize) = (16, 16);
pub const HERBRAND_BUMPED: (u32, usize) = (24, 24);

/// #X/TX from the exact model against the truncated presentation.
fn coinvariants_stable(x: &ZpModule, p: u32) -> bool {
    let n = x.rank();
    let exact = lattice_index(&identity(n), &transpose(&x.t_action, n, n), p);
    let (tn, tm) = HERBRAND_BUMPED;
    let pres = x.presentation(p, tn, tm);
    let t = LambdaElement::from_i64(p, tn, tm, &[0, 1]).expect("valid truncation");
    let truncated = finite_quotient_order_with(&pres, &t, HERBRAND_TRUNCATION, HERBRAND_BUMPED);
    match (exact, truncated) {
        (GroupOrder::Finite(a), QuotientOrder::Finite(b)) => a == b,
        (GroupOrder::Infinite, QuotientOrder::Infinite) => true,
        _ => false,
    }
}

fn unimodular<R: Rng>(n: usize, rng: &mut R) -> IMat {
    let mut u = identity(n);
    for _ in 0..(3 * n) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let k: i64 = rng.gen_range(-2..=2);
        for c in 0..n {
            let t = Integer::from(&u[j][c] * k);
            u[i][c] += t;
        }
    }
    u
}

fn inverse_unimodular(u: &IMat) -> IMat {
    // adjugate over Z via Gauss-Jordan on [U | I] with exact rational pivots
    let n = u.len();
    let mut a: Vec<Vec<rug::Rational>> = u
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v: Vec<rug::Rational> = r.iter().map(|x| rug::Rational::from(x)).collect();
            v.extend((0..n).map(|j| rug::Rational::from((i == j) as u32)));
            v
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| a[r][c] != 0).expect("invertible");
        a.swap(c, piv);
        let inv = rug::Rational::from(1) / a[c][c].clone();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && a[r][c] != 0 {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let t = rug::Rational::from(&f * &a[c][k]);
                    a[r][k] -= t;
                }
            }
        }
    }
    a.into_iter()
        .map(|r| r[n..].iter().map(|x| x.numer().clone()).collect())
        .collect()
}

/// Random injective phi: X -> Y between modules with equal characteristic
/// polynomials: phi = U D V, M_X = V^{-1} M' V, M_Y = U D M' D^{-1} U^{-1},
/// with D diagonal in powers of p.
pub fn random_sequence<R: Rng>(p: u32, max_rank: usize, rng: &mut R) -> ExactSequenceData {
    let n = rng.gen_range(1..=max_rank);
    let d: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let pi = p as i64;
    let mut mp = vec![vec![Integer::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let base: i64 = if j > i && rng.gen_bool(0.5) { rng.gen_range(-3..=3) } else { pi * rng.gen_range(-2..=2) };
            let shift = d[j].saturating_sub(d[i]);
            mp[i][j] = Integer::from(base) * Integer::from(p).pow(shift);
        }
    }
    let u = unimodular(n, rng);
    let v = unimodular(n, rng);
    let ui = inverse_unimodular(&u);
    let vi = inverse_unimodular(&v);
    let dm: IMat = (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as u32) * Integer::from(p).pow(d[i])).collect()).collect();
    let mx = mat_mul(&mat_mul(&vi, &mp), &v);
    let mut dmd = mp.clone();
    for i in 0..n {
        for j in 0..n {
            let e = d[i] as i64 - d[j] as i64;
            dmd[i][j] = if e >= 0 {
                Integer::from(&mp[i][j] * Integer::from(p).pow(e as u32))
            } else {
                Integer::from(&mp[i][j] / Integer::from(p).pow((-e) as u32))
            };
        }
    }
    let my = mat_mul(&mat_mul(&u, &dmd), &ui);
    let phi = mat_mul(&mat_mul(&u, &dm), &v);
    let x = ZpModule::new(mx, p).expect("nilpotent mod p by construction");
    let y = ZpModule::new(my, p).expect("similar to a nilpotent matrix");
    ExactSequenceData::new(x, y, phi, p).expect("commutes by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn el(p: u32, c: &[i64]) -> LambdaElement {
        LambdaElement::from_i64(p, 12, 16, c).unwrap()
    }

    #[test]
    fn inverse_of_unit() {
        let u = el(5, &[2, 7, -3, 11]);
        let v = u.inverse().unwrap();
        assert_eq!(u.mul(&v), u.one_like());
        assert!(el(5, &[5, 1]).inverse().is_err());
    }

    #[test]
    fn preparation_recovers_factors() {
        let p = 5;
        // 25 * (T^2 + 5T - 10) * (3 + T + 4T^3)
        let f = el(p, &[25]).mul(&el(p, &[-10, 5, 1])).mul(&el(p, &[3, 1, 0, 4]));
        let w = weierstrass_prep(&f).unwrap();
        assert_eq!(w.mu, 2);
        assert_eq!(w.lambda(), 2);
        let dist: Vec<i64> = w.distinguished.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(dist[2], 1);
        let pn = 5i64.pow(w.precision);
        assert_eq!(dist[0].rem_euclid(pn), (-10i64).rem_euclid(pn));
        assert_eq!(dist[1], 5);
        let back = LambdaElement::from_poly(p, w.precision, 16, &w.distinguished).mul(&w.unit);
        let g = f.retruncate(w.precision + 2, 16);
        let g: Vec<Integer> = g.coeffs().iter().map(|c| Integer::from(c / 25)).collect();
        assert_eq!(back, LambdaElement::new(p, w.precision, 16, g).unwrap());
    }

    #[test]
    fn preparation_errors() {
        assert!(weierstrass_prep(&el(3, &[])).is_err());
        let f = LambdaElement::from_i64(3, 2, 4, &[9, 9]).unwrap();
        assert!(weierstrass_prep(&f).is_err());
    }

    #[test]
    fn char_ideal_of_sum() {
        let p = 3;
        let m = LambdaModulePresentation::diagonal(vec![el(p, &[-3, 1]), el(p, &[6, 0, 1]).mul(&el(p, &[3]))]);
        let c = char_ideal(&m).unwrap();
        assert_eq!(c.mu, 1);
        let d: Vec<i64> = c.distinguished.iter().map(|x| x.to_i64().unwrap()).collect();
        let pn = 3i64.pow(c.generator.precision().0 - 1);
        let d: Vec<i64> = d.iter().map(|x| x.rem_euclid(pn)).collect();
        let want: Vec<i64> = [-18i64, 6, -3, 1].iter().map(|x| x.rem_euclid(pn)).collect();
        assert_eq!(d, want);
        let wide = LambdaModulePresentation { rows: vec![vec![el(p, &[1]), el(p, &[0, 1])]] };
        assert!(char_ideal(&wide).is_err());
    }

    #[test]
    fn quotient_orders() {
        let p = 5;
        let t = el(p, &[0, 1]);
        let m = LambdaModulePresentation::cyclic(el(p, &[-5, 1]));
        assert_eq!(finite_quotient_order(&m, &t), QuotientOrder::Finite(Integer::from(5)));
        let m2 = LambdaModulePresentation::cyclic(el(p, &[-25, 0, 1]));
        assert_eq!(finite_quotient_order(&m2, &t), QuotientOrder::Finite(Integer::from(25)));
        let free = LambdaModulePresentation::cyclic(el(p, &[0, 1]));
        assert_eq!(finite_quotient_order(&free, &t), QuotientOrder::Infinite);
    }

    #[test]
    fn idempotents_are_orthogonal() {
        let g = GroupStructure { invariant_factors: vec![2, 3] };
        let (p, n) = (7, 6);
        let mut sum = GroupAlgebraElement::zero(&g, p, n);
        let mut es = Vec::new();
        for a in 0..2 {
            for b in 0..3 {
                let e = idempotent(&g, &[a, b], p, n).unwrap();
                assert_eq!(e.mul(&e), e);
                sum = sum.add(&e);
                es.push(e);
            }
        }
        assert_eq!(sum, GroupAlgebraElement::one(&g, p, n));
        assert!(es[0].mul(&es[1]).is_zero());
        assert!(idempotent(&g, &[1, 1], 3, 4).is_err());
        let g5 = GroupStructure { invariant_factors: vec![5] };
        assert!(matches!(idempotent(&g5, &[1], 7, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn herbrand_unit_map() {
        let x = ZpModule::from_distinguished(&[-5, 1], 5).unwrap();
        let seq = ExactSequenceData::new(x.clone(), x.clone(), x.apply_poly(&[-2, 1]), 5).unwrap();
        let r = herbrand_check(&seq).unwrap();
        assert_eq!(r.equal, Some(true));
        assert_eq!(r.coker_beta, GroupOrder::Finite(Integer::from(1)));
        let seq = ExactSequenceData::new(x.clone(), x, vec![vec![Integer::from(5)]], 5).unwrap();
        let r = herbrand_check(&seq).unwrap();
        assert_eq!(r.ker_beta, GroupOrder::Finite(Integer::from(5)));
        assert_eq!(r.coker_beta, GroupOrder::Finite(Integer::from(5)));
        assert_eq!(r.equal, Some(true));
    }

    #[test]
    fn herbrand_trivial_action() {
        let x = ZpModule::from_distinguished(&[0, 1], 3).unwrap();
        let seq = ExactSequenceData::new(x.clone(), x, vec![vec![Integer::from(3)]], 3).unwrap();
        let r = herbrand_check(&seq).unwrap();
        assert_eq!(r.coker_alpha, GroupOrder::Finite(Integer::from(3)));
        assert!(r.truncation_stable);
        assert_eq!(r.equal, Some(true));
    }

    #[test]
    fn herbrand_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut conclusive, mut nontrivial) = (0, 0);
        for p in [3u32, 5, 7] {
            for _ in 0..20 {
                let s = random_sequence(p, 3, &mut rng);
                let r = herbrand_check(&s).unwrap();
                if let Some(eq) = r.equal {
                    assert!(eq, "{r:?}");
                    conclusive += 1;
                    if r.coker_beta != GroupOrder::Finite(Integer::from(1)) {
                        nontrivial += 1;
                    }
                }
            }
        }
        assert!(conclusive >= 30 && nontrivial >= 10);
    }
}
