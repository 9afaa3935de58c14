//! Property tests spanning several modules.

use crate::diff_analysis::{approx_density, lp_remainder_ladder, whitney_sieve, SampledFunction, SieveOptions};
use crate::exact_poly::rational::{int, powi, ratio, Rational};
use crate::exact_poly::{degiorgi_ratio, intmax_lower_bound, intmax_ratio, PiecewisePolynomial, Polynomial};
use crate::horizontality::{area_discrepancy, hermite_interpolant};
use crate::interval_sets::{Interval, IntervalSet};
use crate::jets::{Jet, JetTriple};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(small_rational(), 1..=max_len).prop_map(Polynomial::new)
}

fn nonzero_poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
    poly(max_len).prop_filter("nonzero", |p| !p.is_zero())
}

fn interval_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((0i64..=16, 0i64..=16, any::<bool>(), any::<bool>()), 0..5).prop_map(|raw| {
        IntervalSet::from_intervals(
            raw.into_iter()
                .map(|(a, b, lc, hc)| Interval::new(ratio(a.min(b), 16), ratio(a.max(b), 16), lc, hc))
                .collect(),
        )
    })
}

fn unit_poly(p: Polynomial) -> SampledFunction {
    SampledFunction::Exact(PiecewisePolynomial::single(p, int(-1), int(1)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_is_additive(a in interval_set(), b in interval_set()) {
        prop_assert_eq!(
            a.union(&b).measure() + a.intersect(&b).measure(),
            a.measure() + b.measure()
        );
        prop_assert_eq!(a.complement().measure(), int(1) - a.measure());
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert!(a.subtract(&b).is_subset_of(&a));
        prop_assert!(a.intersect(&b).is_subset_of(&b));
    }

    #[test]
    fn membership_follows_the_algebra(a in interval_set(), b in interval_set(), k in 0i64..=64) {
        let x = ratio(k, 64);
        prop_assert_eq!(a.union(&b).contains(&x), a.contains(&x) || b.contains(&x));
        prop_assert_eq!(a.intersect(&b).contains(&x), a.contains(&x) && b.contains(&x));
        prop_assert_eq!(a.complement().contains(&x), !a.contains(&x));
    }

    #[test]
    fn dilation_grows_and_nests(a in interval_set(), l1 in 1i64..8, l2 in 1i64..8) {
        let (small, big) = (ratio(l1.min(l2), 64), ratio(l1.max(l2), 64));
        prop_assert!(a.is_subset_of(&a.dilate(&small)));
        prop_assert!(a.dilate(&small).is_subset_of(&a.dilate(&big)));
    }

    #[test]
    fn intmax_bounds_hold(p in nonzero_poly(6)) {
        let r = intmax_ratio(&p, &int(0), &int(1)).unwrap();
        prop_assert!(r.upper() >= intmax_lower_bound(p.degree()));
        prop_assert!(r.lower() <= int(1));
    }

    #[test]
    fn truncation_is_a_projection(p in poly(7), c in small_rational(), m in 0usize..5) {
        let t = p.truncate_shifted(&c, m);
        prop_assert_eq!(t.truncate_shifted(&c, m), t.clone());
        for k in 0..=m {
            prop_assert_eq!(t.nth_derivative(k).eval(&c), p.nth_derivative(k).eval(&c));
        }
        prop_assert!(t.degree() <= m as isize);
    }

    #[test]
    fn degiorgi_ratio_ignores_scaling(p in nonzero_poly(4), s in 1i64..=9, k in 0usize..3) {
        let set = IntervalSet::closed(&ratio(1, 4), &ratio(3, 4));
        let x = ratio(1, 2);
        let r = ratio(1, 2);
        if let Ok(base) = degiorgi_ratio(&p, &x, &r, &set, k) {
            let scaled = degiorgi_ratio(&p.scale(&ratio(s, 3)), &x, &r, &set, k).unwrap();
            if base.is_exact() && scaled.is_exact() {
                prop_assert_eq!(base.value, scaled.value);
            } else {
                prop_assert!(scaled.lower() <= base.upper() && base.lower() <= scaled.upper());
            }
        }
    }

    #[test]
    fn remainders_agree_with_taylor_truncation(p in poly(6), m in 1usize..4, a in small_rational(), b in small_rational()) {
        prop_assume!(a != b);
        let sites = if a < b { vec![a.clone(), b.clone()] } else { vec![b.clone(), a.clone()] };
        let jet = Jet::from_polynomial(&p, &sites, m).unwrap();
        for k in 0..=m {
            let dk = p.nth_derivative(k);
            let oracle = dk.eval(&b) - dk.truncate_shifted(&a, m - k).eval(&b);
            prop_assert_eq!(jet.remainder(&a, &b, k).unwrap(), oracle);
        }
    }

    #[test]
    fn area_discrepancy_ignores_vertical_shift(
        f in poly(4), g in poly(4), h in poly(4), c in small_rational(), m in 1usize..3
    ) {
        let sites = vec![int(0), ratio(1, 3), int(1)];
        let t = JetTriple::from_polynomials(&f, &g, &h, &sites, m).unwrap();
        let lifted = &h + &Polynomial::constant(c);
        let s = JetTriple::from_polynomials(&f, &g, &lifted, &sites, m).unwrap();
        for (a, b) in [(int(0), ratio(1, 3)), (ratio(1, 3), int(1)), (int(0), int(1))] {
            prop_assert_eq!(area_discrepancy(&t, &a, &b).unwrap(), area_discrepancy(&s, &a, &b).unwrap());
        }
    }

    #[test]
    fn ladder_values_grow_with_p(u in poly(4), j in 1u32..4) {
        let ladder = vec![ratio(1, 1 << j), ratio(1, 1 << (j + 1))];
        let f = unit_poly(u);
        let one = lp_remainder_ladder(&f, &Polynomial::zero(), &int(0), 1, 1, &ladder).unwrap();
        let two = lp_remainder_ladder(&f, &Polynomial::zero(), &int(0), 1, 2, &ladder).unwrap();
        for (a, b) in one.entries.iter().zip(&two.entries) {
            prop_assert!(a.value >= 0.0);
            // value_1^2 <= value_2^2, with value_2^2 the exact power for p = 2
            prop_assert!(powi(&a.power.lower(), 2) <= b.power.upper());
            if a.power.is_exact() {
                prop_assert!(powi(&a.power.value, 2) <= b.power.value);
            }
        }
    }

    #[test]
    fn density_grows_with_eps(u in poly(4), e1 in 1i64..20, e2 in 1i64..20) {
        let f = unit_poly(u.clone());
        let (lo, hi) = (ratio(e1.min(e2), 8), ratio(e1.max(e2), 8));
        let x = ratio(1, 4);
        let r = ratio(1, 2);
        let a = approx_density(&f, &Polynomial::zero(), &x, 1, &lo, &r).unwrap();
        let b = approx_density(&f, &Polynomial::zero(), &x, 1, &hi, &r).unwrap();
        prop_assert!(a.lower() <= b.upper());
        let same = approx_density(&f, &u, &x, 1, &lo, &r).unwrap();
        prop_assert_eq!(same.value, int(1));
    }

    #[test]
    fn hermite_matches_both_jets(va in prop::collection::vec(small_rational(), 3), vb in prop::collection::vec(small_rational(), 3)) {
        let (a, b) = (ratio(-1, 2), ratio(2, 3));
        let p = hermite_interpolant(&a, &va, &b, &vb);
        prop_assert!(p.degree() <= 5);
        for k in 0..3 {
            prop_assert_eq!(p.nth_derivative(k).eval(&a), va[k].clone());
            prop_assert_eq!(p.nth_derivative(k).eval(&b), vb[k].clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sieve_retains_more_for_smaller_budgets(jump in 1i64..16, e in 2i64..8) {
        let at = ratio(jump, 16);
        let step = PiecewisePolynomial::new(
            vec![int(0), at, int(1)],
            vec![Polynomial::zero(), Polynomial::constant(int(1))],
        ).unwrap();
        let zero = PiecewisePolynomial::single(Polynomial::zero(), int(0), int(1)).unwrap();
        let fields = vec![
            SampledFunction::Exact(step),
            SampledFunction::Exact(zero.clone()),
            SampledFunction::Exact(zero),
        ];
        let opts = SieveOptions { grid: 128, n_max: 3, ladder: vec![ratio(1, 16)] };
        let loose = whitney_sieve(&fields, 2, &ratio(e, 8), &opts).unwrap();
        let tight = whitney_sieve(&fields, 2, &ratio(1, 8), &opts).unwrap();
        prop_assert!(loose.retained.is_subset_of(&tight.retained));
        prop_assert!(loose.retained.measure() >= int(1) - ratio(e, 8));
    }
}
