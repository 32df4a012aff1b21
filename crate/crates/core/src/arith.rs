//! Small exact integer helpers: gcd, modular arithmetic, factoring by trial
//! division, and Hermite/Smith forms over `rug::Integer`.

use rug::{Assign, Integer};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// Returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

pub fn mul_mod(a: i64, b: i64, m: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(m as i128)) as i64
}

pub fn pow_mod(mut b: i64, mut e: u64, m: i64) -> i64 {
    let mut r = 1 % m;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g != 1 {
        None
    } else {
        Some(x.rem_euclid(m))
    }
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut k = 3;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

pub fn is_squarefree(n: i64) -> bool {
    let n = n.abs();
    if n == 0 {
        return false;
    }
    factor(n).iter().all(|&(_, e)| e == 1)
}

/// Trial-division factorization of |n|, primes ascending.
pub fn factor(n: i64) -> Vec<(i64, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn primes_up_to(n: usize) -> Vec<i64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut k = i * i;
            while k <= n {
                sieve[k] = false;
                k += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as i64)
        .collect()
}

/// Square root of `a` modulo an odd prime `p`, if one exists (Tonelli-Shanks).
pub fn sqrt_mod(a: i64, p: i64) -> Option<i64> {
    let a = a.rem_euclid(p);
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, ((p - 1) / 2) as u64, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, ((p - 1) / 2) as u64, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q as u64, p);
    let mut t = pow_mod(a, q as u64, p);
    let mut r = pow_mod(a, ((q + 1) / 2) as u64, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Kronecker symbol (a | n) for n > 0.
pub fn kronecker_symbol(a: i64, n: i64) -> i32 {
    assert!(n > 0);
    let mut a = a;
    let mut n = n;
    let mut res = 1i32;
    while n % 2 == 0 {
        n /= 2;
        let r = a.rem_euclid(8);
        if r == 0 || r == 2 || r == 4 || r == 6 {
            return 0;
        }
        if r == 3 || r == 5 {
            res = -res;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

pub fn binomial(n: u64, k: u64) -> Integer {
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn floor_div(a: &Integer, b: &Integer) -> Integer {
    a.clone().div_rem_floor(b.clone()).0
}

/// Integer matrix as rows.
pub type IMat = Vec<Vec<Integer>>;

pub fn imat_from_i64(rows: &[Vec<i64>]) -> IMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
        .collect()
}

fn row_combine(m: &mut IMat, i: usize, j: usize, a: &Integer, b: &Integer, c: &Integer, d: &Integer) {
    // (row_i, row_j) <- (a*row_i + b*row_j, c*row_i + d*row_j)
    let n = m[i].len();
    for k in 0..n {
        let ri = m[i][k].clone();
        let rj = m[j][k].clone();
        m[i][k] = Integer::from(a * &ri) + Integer::from(b * &rj);
        m[j][k] = Integer::from(c * &ri) + Integer::from(d * &rj);
    }
}

/// Row-style Hermite normal form: returns the nonzero rows of an echelon basis
/// of the row lattice, pivots positive, entries above pivots reduced into [0, pivot).
pub fn hnf_rows(input: &IMat) -> IMat {
    let mut m: IMat = input.clone();
    if m.is_empty() {
        return m;
    }
    let cols = m[0].len();
    let rows = m.len();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r >= rows {
            break;
        }
        // gcd-eliminate column c below row r
        for i in (r + 1)..rows {
            if m[i][c] == 0 {
                continue;
            }
            if m[r][c] == 0 {
                m.swap(r, i);
                continue;
            }
            let (g, s, t) = m[r][c].clone().extended_gcd(m[i][c].clone(), Integer::new());
            let a_over = Integer::from(m[r][c].div_exact_ref(&g));
            let b_over = Integer::from(m[i][c].div_exact_ref(&g));
            let neg_b = Integer::from(-&b_over);
            row_combine(&mut m, r, i, &s, &t, &neg_b, &a_over);
        }
        if m[r][c] == 0 {
            continue;
        }
        if m[r][c] < 0 {
            for k in 0..cols {
                let v = Integer::from(-&m[r][k]);
                m[r][k] = v;
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    m.truncate(r);
    for &(pr, pc) in &pivots {
        for i in 0..pr {
            let q = floor_div(&m[i][pc], &m[pr][pc]);
            if q != 0 {
                for k in 0..cols {
                    let sub = Integer::from(&q * &m[pr][k]);
                    m[i][k] -= sub;
                }
            }
        }
    }
    m
}

/// Basis of the integer kernel {x : x * A = 0} where A is given as rows (x is a row vector).
/// The returned basis spans a saturated sublattice.
pub fn left_kernel(a: &IMat) -> IMat {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let m = a[0].len();
    let mut aug: IMat = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = a[i].clone();
        for k in 0..n {
            row.push(Integer::from(if i == k { 1 } else { 0 }));
        }
        aug.push(row);
    }
    let h = echelon_full(&mut aug, m);
    aug.into_iter()
        .skip(h)
        .map(|r| r[m..].to_vec())
        .collect()
}

/// Echelonizes the first `cols` columns using unimodular row operations on all
/// columns; returns the number of pivot rows (those rows come first).
fn echelon_full(m: &mut IMat, cols: usize) -> usize {
    let rows = m.len();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        for i in (r + 1)..rows {
            if m[i][c] == 0 {
                continue;
            }
            if m[r][c] == 0 {
                m.swap(r, i);
                continue;
            }
            let (g, s, t) = m[r][c].clone().extended_gcd(m[i][c].clone(), Integer::new());
            let a_over = Integer::from(m[r][c].div_exact_ref(&g));
            let b_over = Integer::from(m[i][c].div_exact_ref(&g));
            let neg_b = Integer::from(-&b_over);
            row_combine(m, r, i, &s, &t, &neg_b, &a_over);
        }
        if m[r][c] != 0 {
            r += 1;
        }
    }
    r
}

/// Smith normal form diagonal of an integer matrix (nonzero and zero entries,
/// length min(rows, cols)), in divisibility order for the nonzero part.
pub fn smith_diagonal(a: &IMat) -> Vec<Integer> {
    let (d, _, _) = smith_with_transforms(a);
    d
}

/// Smith normal form D = U * A * V. Returns (diag, U, V).
pub fn smith_with_transforms(a: &IMat) -> (Vec<Integer>, IMat, IMat) {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut m = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let k = rows.min(cols);
    for t in 0..k {
        loop {
            // choose pivot of smallest nonzero absolute value in the submatrix
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 {
                        match best {
                            None => best = Some((i, j)),
                            Some((bi, bj)) => {
                                if m[i][j].clone().abs() < m[bi][bj].clone().abs() {
                                    best = Some((i, j));
                                }
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (finish_diag(&m, k), u, v);
            };
            m.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);
            let mut done = true;
            for i in (t + 1)..rows {
                if m[i][t] != 0 {
                    let q = floor_div(&m[i][t], &m[t][t]);
                    for c in 0..cols {
                        let s = Integer::from(&q * &m[t][c]);
                        m[i][c] -= s;
                    }
                    for c in 0..rows {
                        let s = Integer::from(&q * &u[t][c]);
                        u[i][c] -= s;
                    }
                    if m[i][t] != 0 {
                        done = false;
                    }
                }
            }
            for j in (t + 1)..cols {
                if m[t][j] != 0 {
                    let q = floor_div(&m[t][j], &m[t][t]);
                    for r in 0..rows {
                        let s = Integer::from(&q * &m[r][t]);
                        m[r][j] -= s;
                    }
                    for r in 0..cols {
                        let s = Integer::from(&q * &v[r][t]);
                        v[r][j] -= s;
                    }
                    if m[t][j] != 0 {
                        done = false;
                    }
                }
            }
            if !done {
                continue;
            }
            // divisibility: pivot must divide all remaining entries
            let mut bad: Option<usize> = None;
            'outer: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !m[i][j].is_divisible(&m[t][t]) {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            if let Some(i) = bad {
                for c in 0..cols {
                    let add = m[i][c].clone();
                    m[t][c] += add;
                }
                for c in 0..rows {
                    let add = u[i][c].clone();
                    u[t][c] += add;
                }
                continue;
            }
            if m[t][t] < 0 {
                for c in 0..cols {
                    let x = Integer::from(-&m[t][c]);
                    m[t][c] = x;
                }
                for c in 0..rows {
                    let x = Integer::from(-&u[t][c]);
                    u[t][c] = x;
                }
            }
            break;
        }
    }
    (finish_diag(&m, k), u, v)
}

fn finish_diag(m: &IMat, k: usize) -> Vec<Integer> {
    (0..k).map(|i| m[i][i].clone().abs()).collect()
}

fn swap_cols(m: &mut IMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Integer::from(if i == j { 1 } else { 0 }))
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let m = if b.is_empty() { 0 } else { b[0].len() };
    let inner = b.len();
    let mut out = vec![vec![Integer::new(); m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += Integer::from(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(x: &Integer, p: u32) -> u32 {
    if *x == 0 {
        return u32::MAX;
    }
    let mut y = x.clone().abs();
    let mut v = 0;
    let pp = Integer::from(p);
    while y.is_divisible(&pp) {
        y /= &pp;
        v += 1;
    }
    v
}

pub fn determinant(m: &IMat) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    // fraction-free Bareiss elimination
    let mut a = m.clone();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(sw) = ((k + 1)..n).find(|&i| a[i][k] != 0) else {
                return Integer::new();
            };
            a.swap(k, sw);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let mut t = Integer::from(&a[i][j] * &a[k][k]);
                t -= Integer::from(&a[i][k] * &a[k][j]);
                t.div_exact_mut(&prev);
                a[i][j] = t;
            }
        }
        prev.assign(&a[k][k]);
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_mod_small_primes() {
        for &p in &primes_up_to(200)[1..] {
            for a in 0..p {
                let brute = (0..p).any(|x| (x * x - a).rem_euclid(p) == 0);
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(mul_mod(r, r, p), a),
                    None => assert!(!brute, "p={p} a={a}"),
                }
            }
        }
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for &p in &primes_up_to(100)[1..] {
            for a in -20..20 {
                let e = pow_mod(a, ((p - 1) / 2) as u64, p);
                let expect = if a.rem_euclid(p) == 0 { 0 } else if e == 1 { 1 } else { -1 };
                assert_eq!(kronecker_symbol(a, p), expect);
            }
        }
    }

    #[test]
    fn smith_of_known_matrix() {
        let m = imat_from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let d = smith_diagonal(&m);
        assert_eq!(d, vec![Integer::from(2), Integer::from(6), Integer::from(12)]);
        let (d2, u, v) = smith_with_transforms(&m);
        let prod = mat_mul(&mat_mul(&u, &m), &v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { d2[i].clone() } else { Integer::new() };
                assert_eq!(prod[i][j].clone().abs(), want);
            }
        }
    }

    #[test]
    fn kernel_is_saturated() {
        let a = imat_from_i64(&[vec![2, 0], vec![4, 0], vec![0, 3]]);
        let k = left_kernel(&a);
        assert_eq!(k.len(), 1);
        let x = &k[0];
        assert_eq!(Integer::from(&x[0] * 2) + Integer::from(&x[1] * 4), 0);
        assert_eq!(x[2], 0);
        assert_eq!(x[0].clone().abs(), 2);
        assert_eq!(x[1].clone().abs(), 1);
    }

    #[test]
    fn bareiss_determinant() {
        let m = imat_from_i64(&[vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5]]);
        assert_eq!(determinant(&m), Integer::from(-90));
    }
}
