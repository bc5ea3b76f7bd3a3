use cubic_aux::scalar::int;
use cubic_aux::{CubicForm, Rational};
use proptest::prelude::*;

fn monomials(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

fn form(n: usize) -> impl Strategy<Value = CubicForm<Rational>> {
    let m = monomials(n);
    prop::collection::vec(-6i64..=6, m.len())
        .prop_map(move |v| CubicForm::new(n, m.clone().into_iter().zip(v.into_iter().map(int))).unwrap())
}

fn ivec(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-7i64..=7).prop_map(int), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneous_of_degree_three((c, x) in (1usize..=4).prop_flat_map(|n| (form(n), ivec(n))), t in -5i64..=5) {
        let tx: Vec<Rational> = x.iter().map(|v| v * int(t)).collect();
        prop_assert_eq!(c.eval(&tx).unwrap(), c.eval(&x).unwrap() * int(t * t * t));
    }

    #[test]
    fn third_derivatives_are_symmetric(c in (1usize..=4).prop_flat_map(form)) {
        let n = c.n();
        for i in 0..n { for j in 0..n { for k in 0..n {
            prop_assert_eq!(c.third_derivative(i, j, k), c.third_derivative(j, k, i));
            prop_assert_eq!(c.third_derivative(i, j, k), c.third_derivative(j, i, k));
        }}}
    }

    #[test]
    fn euler_identity((c, x) in (1usize..=4).prop_flat_map(|n| (form(n), ivec(n)))) {
        // x . grad c(x) = 3 c(x)
        let g = c.gradient(&x).unwrap();
        let lhs: Rational = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert_eq!(lhs, c.eval(&x).unwrap() * int(3));
    }

    #[test]
    fn hessian_is_scale_free((c, x) in (1usize..=4).prop_flat_map(|n| (form(n), ivec(n))), s in 1i64..=9) {
        prop_assume!(!c.is_zero());
        let scaled = c.scale(&int(s));
        prop_assert_eq!(scaled.hessian(&x).unwrap(), c.hessian(&x).unwrap());
    }

    #[test]
    fn trilinear_on_the_diagonal((c, x) in (1usize..=4).prop_flat_map(|n| (form(n), ivec(n)))) {
        // x^T H_c(x) x = 6 c(x) / ||c||
        prop_assume!(!c.is_zero());
        let norm = c.sup_norm().unwrap();
        prop_assert_eq!(c.trilinear(&x, &x, &x).unwrap() * norm, c.eval(&x).unwrap() * int(6));
    }
}
