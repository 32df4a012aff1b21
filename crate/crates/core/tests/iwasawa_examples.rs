use kforge_core::field::GroupStructure;
use kforge_core::iwasawa::*;
use rug::Integer;

fn el(p: u32, c: &[i64]) -> LambdaElement {
    LambdaElement::from_i64(p, 10, 12, c).unwrap()
}

fn ints(v: &[i64]) -> Vec<Integer> {
    v.iter().map(|&x| Integer::from(x)).collect()
}

#[test]
fn order_two_idempotents_at_five() {
    let g = GroupStructure { invariant_factors: vec![2] };
    let plus = idempotent(&g, &[0], 5, 3).unwrap();
    let minus = idempotent(&g, &[1], 5, 3).unwrap();
    // 1/2 = 63 mod 125
    assert_eq!(plus.coeffs, ints(&[63, 63]));
    assert_eq!(minus.coeffs, ints(&[63, 62]));
    assert!(plus.mul(&minus).is_zero());
}

#[test]
fn order_four_idempotents_sum_to_one() {
    let g = GroupStructure { invariant_factors: vec![4] };
    let (p, n) = (5, 4);
    let es: Vec<_> = (0..4).map(|a| idempotent(&g, &[a], p, n).unwrap()).collect();
    let sum = es.iter().fold(GroupAlgebraElement::zero(&g, p, n), |s, e| s.add(e));
    assert_eq!(sum, GroupAlgebraElement::one(&g, p, n));
    let pn = Integer::from(625);
    for e in &es {
        assert_eq!(e.mul(e), *e);
        let inv4 = Integer::from(4).invert(&pn).unwrap();
        assert_eq!(e.coeffs[0], inv4);
    }
    // e_1 projects onto tau -> i with i^2 = -1
    let i4 = Integer::from(&es[1].coeffs[3] * 4) % &pn;
    assert_eq!((Integer::from(&i4 * &i4) + 1) % &pn, 0);
}

#[test]
fn preparation_of_linear_elements() {
    for p in [3u32, 5, 7] {
        let pi = p as i64;
        let w = weierstrass_prep(&el(p, &[pi, 1])).unwrap();
        assert_eq!((w.mu, w.lambda()), (0, 1));
        assert_eq!(w.distinguished, ints(&[pi, 1]));
        assert_eq!(w.unit, w.unit.one_like());

        let w = weierstrass_prep(&el(p, &[0, pi])).unwrap();
        assert_eq!((w.mu, w.lambda()), (1, 1));
        assert_eq!(w.distinguished, ints(&[0, 1]));

        let w = weierstrass_prep(&el(p, &[1 + pi, pi])).unwrap();
        assert_eq!((w.mu, w.lambda()), (0, 0));
    }
}

#[test]
fn quotients_of_cyclic_modules() {
    for p in [3u32, 5, 7] {
        let pi = p as i64;
        let t = el(p, &[0, 1]);
        let m = LambdaModulePresentation::cyclic(t.clone());
        assert_eq!(finite_quotient_order(&m, &el(p, &[-pi, 1])), QuotientOrder::Finite(Integer::from(p)));
        assert_eq!(finite_quotient_order(&m, &el(p, &[pi * pi, 1])), QuotientOrder::Finite(Integer::from(p * p)));
        assert_eq!(finite_quotient_order(&m, &t), QuotientOrder::Infinite);
        let c = char_ideal(&LambdaModulePresentation::cyclic(el(p, &[pi]))).unwrap();
        assert_eq!((c.mu, c.distinguished.len() - 1), (1, 0));
    }
}
