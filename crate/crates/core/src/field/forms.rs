use super::abelian::{AbelianGroup, GroupStructure};
use super::{Ideal, QuadField, QuadInt};
use crate::error::{reject, Result};
use std::collections::HashMap;

/// Positive definite binary quadratic form a x^2 + b x y + c y^2.
pub type Form = (i64, i64, i64);

pub fn reduce_form(f: Form) -> Form {
    let (mut a, mut b, mut c) = f;
    let disc = b * b - 4 * a * c;
    loop {
        if !(-a < b && b <= a) {
            // b <- b + 2 k a with the result in (-a, a]
            let k = (a - b).div_euclid(2 * a);
            b += 2 * k * a;
            c = (b * b - disc) / (4 * a);
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    (a, b, c)
}

/// All reduced primitive forms of a negative discriminant.
pub fn reduced_forms(disc: i64) -> Vec<Form> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            if crate::arith::gcd(crate::arith::gcd(a, b), c) != 1 {
                continue;
            }
            out.push((a, b, c));
        }
        a += 1;
    }
    out
}

/// Class group of K via reduced forms of the field discriminant.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    field: QuadField,
    forms: Vec<Form>,
    index: HashMap<Form, usize>,
    group: AbelianGroup<usize>,
}

impl ClassGroup {
    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    /// Primitive ideal attached to a form.
    pub fn ideal_of_form(field: QuadField, f: Form) -> Ideal {
        let (a, b, _) = f;
        let beta = if field.disc() % 2 != 0 {
            QuadInt::new(-(b + 1) / 2, 1)
        } else {
            QuadInt::new(-b / 2, 1)
        };
        Ideal::from_zbasis(field, QuadInt::from_int(a), beta).expect("rank two")
    }

    /// Reduced form of the class of an ideal.
    pub fn form_of_ideal(ideal: &Ideal) -> Form {
        let field = ideal.field();
        let [[a, b], [_, c]] = ideal.hnf();
        let a1 = a / c;
        let b1 = b / c;
        let beta = QuadInt::new(b1, 1);
        let tr = field.trace(beta);
        let nb = field.norm(beta);
        debug_assert_eq!(nb % a1, 0);
        reduce_form((a1, -tr, nb / a1))
    }

    pub fn class_index(&self, ideal: &Ideal) -> usize {
        self.index[&ClassGroup::form_of_ideal(ideal)]
    }

    pub fn class_ideal(&self, idx: usize) -> Ideal {
        ClassGroup::ideal_of_form(self.field, self.forms[idx])
    }

    pub fn structure(&self) -> &GroupStructure {
        self.group.structure()
    }

    pub fn dlog(&self, idx: usize) -> Vec<i64> {
        self.group.dlog(&idx).to_vec()
    }

    pub fn mul_classes(&self, i: usize, j: usize) -> usize {
        let p = self.class_ideal(i).mul(&self.class_ideal(j));
        self.class_index(&p)
    }

    pub fn identity(&self) -> usize {
        self.class_index(&Ideal::unit(self.field))
    }

    pub fn generator_ideals(&self) -> Vec<Ideal> {
        self.group.generators().iter().map(|&i| self.class_ideal(i)).collect()
    }
}

pub fn class_group(field: QuadField) -> Result<ClassGroup> {
    if field.disc().abs() > 1_000_000 {
        return reject("discriminant out of supported range |disc| <= 10^6");
    }
    let forms = reduced_forms(field.disc());
    let index: HashMap<Form, usize> = forms.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let ideals: Vec<Ideal> = forms.iter().map(|&f| ClassGroup::ideal_of_form(field, f)).collect();
    let id = index[&ClassGroup::form_of_ideal(&Ideal::unit(field))];
    let elems: Vec<usize> = (0..forms.len()).collect();
    let group = AbelianGroup::build(&elems, id, |&i, &j| {
        index[&ClassGroup::form_of_ideal(&ideals[i].mul(&ideals[j]))]
    });
    Ok(ClassGroup { field, forms, index, group })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_numbers_of_small_fields() {
        for (d, h, inv) in [
            (-1, 1, vec![]),
            (-5, 2, vec![2]),
            (-23, 3, vec![3]),
            (-7, 1, vec![]),
            (-14, 4, vec![4]),
            (-21, 4, vec![2, 2]),
        ] {
            let g = class_group(QuadField::new(d).unwrap()).unwrap();
            assert_eq!(g.order(), h, "d={d}");
            assert_eq!(g.structure().invariant_factors, inv, "d={d}");
        }
    }

    #[test]
    fn form_ideal_roundtrip() {
        let field = QuadField::new(-23).unwrap();
        for f in reduced_forms(field.disc()) {
            let i = ClassGroup::ideal_of_form(field, f);
            assert_eq!(i.norm(), f.0);
            assert_eq!(ClassGroup::form_of_ideal(&i), f);
        }
    }
}
