use crate::arith::{smith_with_transforms, IMat};
use rug::Integer;
use serde::Serialize;
use std::collections::HashMap;
use std::hash::Hash;

/// Invariant factors d_1 | d_2 | ... (all > 1) of a finite abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupStructure {
    pub invariant_factors: Vec<i64>,
}

impl GroupStructure {
    pub fn order(&self) -> i64 {
        self.invariant_factors.iter().product()
    }

    pub fn exponent(&self) -> i64 {
        self.invariant_factors.last().copied().unwrap_or(1)
    }

    /// Canonical reduction of an exponent vector.
    pub fn normalize(&self, v: &[i64]) -> Vec<i64> {
        v.iter()
            .zip(&self.invariant_factors)
            .map(|(x, n)| x.rem_euclid(*n))
            .collect()
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.invariant_factors
            .iter()
            .enumerate()
            .map(|(i, n)| (a[i] + b[i]).rem_euclid(*n))
            .collect()
    }

    pub fn neg(&self, a: &[i64]) -> Vec<i64> {
        self.normalize(&a.iter().map(|x| -x).collect::<Vec<_>>())
    }

    /// All elements in mixed-radix order (first coordinate fastest).
    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &n in &self.invariant_factors {
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for k in 0..n {
                for v in &out {
                    let mut w: Vec<i64> = v.clone();
                    w.push(k);
                    next.push(w);
                }
            }
            out = next;
        }
        // reorder so that coordinate 0 varies fastest
        out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        out
    }
}

/// A finite abelian group given by an explicit multiplication on labelled
/// elements, decomposed into invariant factors with a discrete-log table.
#[derive(Clone, Debug)]
pub struct AbelianGroup<E: Clone + Eq + Hash> {
    structure: GroupStructure,
    generators: Vec<E>,
    dlog: HashMap<E, Vec<i64>>,
    elements: Vec<E>,
}

impl<E: Clone + Eq + Hash> AbelianGroup<E> {
    /// Builds the decomposition. `elements` must list the whole group; its
    /// order decides generator choice and hence reproducibility.
    pub fn build(elements: &[E], identity: E, mul: impl Fn(&E, &E) -> E) -> Self {
        let mut coords: HashMap<E, Vec<i64>> = HashMap::new();
        coords.insert(identity.clone(), vec![]);
        let mut raw_gens: Vec<E> = Vec::new();
        let mut relations: Vec<Vec<i64>> = Vec::new();
        for e in elements {
            if coords.contains_key(e) {
                continue;
            }
            // smallest k with e^k in the current subgroup
            let mut k = 1;
            let mut pw = e.clone();
            while !coords.contains_key(&pw) {
                pw = mul(&pw, e);
                k += 1;
            }
            let ngen = raw_gens.len();
            let mut rel = coords[&pw].clone();
            rel.resize(ngen, 0);
            let mut rel: Vec<i64> = rel.iter().map(|x| -x).collect();
            rel.push(k);
            for r in relations.iter_mut() {
                r.push(0);
            }
            relations.push(rel);
            let old: Vec<(E, Vec<i64>)> = coords.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
            let mut new_coords = HashMap::with_capacity(old.len() * k as usize);
            let mut epow = identity.clone();
            for i in 0..k {
                for (h, v) in &old {
                    let mut w = v.clone();
                    w.resize(ngen, 0);
                    w.push(i);
                    new_coords.insert(mul(h, &epow), w);
                }
                epow = mul(&epow, e);
            }
            coords = new_coords;
            raw_gens.push(e.clone());
        }
        let n = raw_gens.len();
        if n == 0 {
            let mut dlog = HashMap::new();
            dlog.insert(identity.clone(), vec![]);
            return AbelianGroup {
                structure: GroupStructure { invariant_factors: vec![] },
                generators: vec![],
                dlog,
                elements: vec![identity],
            };
        }
        let rmat: IMat = relations
            .iter()
            .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
            .collect();
        let (diag, _u, v) = smith_with_transforms(&rmat);
        let keep: Vec<usize> = (0..n).filter(|&i| diag[i] != 1).collect();
        let inv: Vec<i64> = keep.iter().map(|&i| diag[i].to_i64().unwrap()).collect();
        let vmat: Vec<Vec<i64>> = v.iter().map(|r| r.iter().map(|x| x.to_i64().unwrap()).collect()).collect();
        let mut dlog = HashMap::with_capacity(coords.len());
        for (el, x) in &coords {
            let mut x = x.clone();
            x.resize(n, 0);
            let y: Vec<i64> = keep
                .iter()
                .zip(&inv)
                .map(|(&j, &d)| {
                    let s: i128 = (0..n).map(|i| x[i] as i128 * vmat[i][j] as i128).sum();
                    (s.rem_euclid(d as i128)) as i64
                })
                .collect();
            dlog.insert(el.clone(), y);
        }
        // invariant-factor generators: elements whose log is a unit vector
        let mut generators = vec![identity.clone(); inv.len()];
        for (el, y) in &dlog {
            for (i, gslot) in generators.iter_mut().enumerate() {
                if y.iter().enumerate().all(|(j, &c)| c == if i == j { 1 } else { 0 }) {
                    *gslot = el.clone();
                }
            }
        }
        let elements = elements.to_vec();
        AbelianGroup {
            structure: GroupStructure { invariant_factors: inv },
            generators,
            dlog,
            elements,
        }
    }

    pub fn structure(&self) -> &GroupStructure {
        &self.structure
    }

    pub fn generators(&self) -> &[E] {
        &self.generators
    }

    pub fn dlog(&self, e: &E) -> &[i64] {
        &self.dlog[e]
    }

    pub fn try_dlog(&self, e: &E) -> Option<&[i64]> {
        self.dlog.get(e).map(|v| v.as_slice())
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.dlog.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_mod_n_decompose() {
        // (Z/15)^x = Z/2 x Z/4
        let els: Vec<i64> = (1..15).filter(|x| crate::arith::gcd(*x, 15) == 1).collect();
        let g = AbelianGroup::build(&els, 1, |a, b| a * b % 15);
        assert_eq!(g.structure().invariant_factors, vec![2, 4]);
        assert_eq!(g.order(), 8);
        for &a in &els {
            for &b in &els {
                let s = g.structure().add(g.dlog(&a), g.dlog(&b));
                assert_eq!(s, g.dlog(&(a * b % 15)).to_vec());
            }
        }
        // cyclic group of order 12 given by Z/3 x Z/4 labels
        let els: Vec<(i64, i64)> = (0..3).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
        let g = AbelianGroup::build(&els, (0, 0), |x, y| ((x.0 + y.0) % 3, (x.1 + y.1) % 4));
        assert_eq!(g.structure().invariant_factors, vec![12]);
    }
}
