//! Integrals of `|P|`, sup-norms and the two polynomial inequalities built on them.

use num::{Signed, Zero};

use super::polynomial::Polynomial;
use super::rational::{default_tolerance, int, max, to_pq, CertifiedValue, Rational};
use super::roots::isolate_roots;
use crate::error::{Error, Result};
use crate::interval_sets::IntervalSet;

fn check_order(a: &Rational, b: &Rational) -> Result<()> {
    if a > b {
        return Err(Error::ReversedInterval { lo: to_pq(a), hi: to_pq(b) });
    }
    Ok(())
}

fn widest_bracket(iso: &super::roots::RootIsolation) -> Rational {
    iso.roots
        .iter()
        .map(|r| r.width())
        .fold(Rational::zero(), |acc, w| max(&acc, &w))
}

/// `∫_a^b |P(t)| dt` with the default error bound.
pub fn abs_integral(p: &Polynomial, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
    abs_integral_with(p, a, b, &default_tolerance())
}

/// `∫_a^b |P(t)| dt`, exact when every sign change of `P` in `(a, b)` is rational and
/// otherwise within `tol`.
pub fn abs_integral_with(
    p: &Polynomial,
    a: &Rational,
    b: &Rational,
    tol: &Rational,
) -> Result<CertifiedValue> {
    check_order(a, b)?;
    if p.is_zero() || a == b {
        return Ok(CertifiedValue::exact(Rational::zero()));
    }
    let mut iso = isolate_roots(p, a, b);
    // Moving a breakpoint by s changes the sum by at most 2 s max|P|.
    let certify = |iso: &super::roots::RootIsolation| {
        iso.roots
            .iter()
            .filter(|r| !r.is_exact())
            .fold(Rational::zero(), |acc, r| acc + r.width() * p.abs_bound(&r.lo, &r.hi))
    };
    let mut error = certify(&iso);
    while &error > tol {
        let widest = widest_bracket(&iso);
        iso.refine_to(&(widest / int(2)));
        error = certify(&iso);
    }
    let anti = p.antiderivative();
    let mut cuts = vec![a.clone()];
    cuts.extend(iso.roots.iter().map(|r| r.midpoint()));
    cuts.push(b.clone());
    let values: Vec<Rational> = cuts.iter().map(|t| anti.eval(t)).collect();
    let total = values
        .windows(2)
        .map(|w| (&w[1] - &w[0]).abs())
        .fold(Rational::zero(), |acc, v| acc + v);
    Ok(CertifiedValue::with_error(total, error))
}

/// `max_{[a,b]} |P|` with the default error bound.
pub fn sup_norm(p: &Polynomial, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
    sup_norm_with(p, a, b, &default_tolerance())
}

/// `max_{[a,b]} |P|` from the endpoints and the critical points of `P`.
pub fn sup_norm_with(
    p: &Polynomial,
    a: &Rational,
    b: &Rational,
    tol: &Rational,
) -> Result<CertifiedValue> {
    check_order(a, b)?;
    let mut best = max(&p.eval(a).abs(), &p.eval(b).abs());
    if p.degree() < 2 || a == b {
        return Ok(CertifiedValue::exact(best));
    }
    let dp = p.derivative();
    let mut iso = isolate_roots(&dp, a, b);
    let certify = |iso: &super::roots::RootIsolation| {
        iso.roots
            .iter()
            .filter(|r| !r.is_exact())
            .map(|r| r.width() / int(2) * dp.abs_bound(&r.lo, &r.hi))
            .fold(Rational::zero(), |acc, e| max(&acc, &e))
    };
    let mut error = certify(&iso);
    while &error > tol {
        let widest = widest_bracket(&iso);
        iso.refine_to(&(widest / int(2)));
        error = certify(&iso);
    }
    for r in &iso.roots {
        best = max(&best, &p.eval(&r.midpoint()).abs());
    }
    Ok(CertifiedValue::with_error(best, error))
}

/// `(⨍_a^b |P|) / ‖P‖_∞`; lies in `[1/(8n^2), 1]` for a polynomial of degree `n >= 1`.
pub fn intmax_ratio(p: &Polynomial, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if a >= b {
        return Err(Error::NotIncreasing { a: to_pq(a), b: to_pq(b) });
    }
    let integral = abs_integral(p, a, b)?.scale(&(b - a).recip());
    let sup = sup_norm(p, a, b)?;
    integral.div(&sup)
}

/// Lower bound `1/(8n^2)` of [`intmax_ratio`] for degree `n` (`1` for constants).
pub fn intmax_lower_bound(degree: isize) -> Rational {
    if degree <= 0 {
        return int(1);
    }
    Rational::new(1.into(), (8 * degree * degree).into())
}

/// `r^(1+k) |D^k P(x)| / ∫_E |P|` for `E ⊆ [x - r, x + r]`.
pub fn degiorgi_ratio(
    p: &Polynomial,
    x: &Rational,
    r: &Rational,
    set: &IntervalSet,
    k: usize,
) -> Result<CertifiedValue> {
    if !r.is_positive() {
        return Err(Error::Degenerate("radius must be positive".into()));
    }
    let ball = IntervalSet::closed(&(x - r), &(x + r));
    if !set.is_subset_of(&ball) {
        return Err(Error::Degenerate("E must lie inside [x - r, x + r]".into()));
    }
    if set.measure().is_zero() {
        return Err(Error::Degenerate("E has measure zero".into()));
    }
    let mut mass = CertifiedValue::exact(Rational::zero());
    for iv in set.intervals() {
        mass = mass.add(&abs_integral(p, &iv.lo, &iv.hi)?);
    }
    if mass.value.is_zero() && mass.is_exact() {
        return Err(Error::Degenerate("∫_E |P| vanishes".into()));
    }
    let numer = num::pow(r.clone(), 1 + k) * p.nth_derivative(k).eval(x).abs();
    CertifiedValue::exact(numer).div(&mass)
}

/// Measure of `{t in [a, b] : q(t) <= 0 for every q in polys}`.
///
/// Exact when every relevant breakpoint is rational, otherwise within `tol`.
pub fn measure_where_nonpositive(
    polys: &[Polynomial],
    a: &Rational,
    b: &Rational,
    tol: &Rational,
) -> Result<CertifiedValue> {
    check_order(a, b)?;
    if a == b {
        return Ok(CertifiedValue::exact(Rational::zero()));
    }
    let active: Vec<&Polynomial> = polys.iter().filter(|q| !q.is_zero()).collect();
    let product = active
        .iter()
        .fold(Polynomial::constant(int(1)), |acc, q| &acc * *q);
    let mut iso = isolate_roots(&product, a, b);
    let certify = |iso: &super::roots::RootIsolation| {
        iso.roots
            .iter()
            .filter(|r| !r.is_exact())
            .fold(Rational::zero(), |acc, r| acc + r.width() / int(2))
    };
    let mut error = certify(&iso);
    while &error > tol {
        let widest = widest_bracket(&iso);
        iso.refine_to(&(widest / int(2)));
        error = certify(&iso);
    }
    // Breakpoints with their certified extents.
    let mut lows = vec![a.clone()];
    let mut highs = vec![a.clone()];
    let mut reps = vec![a.clone()];
    for r in &iso.roots {
        lows.push(r.lo.clone());
        highs.push(r.hi.clone());
        reps.push(r.midpoint());
    }
    lows.push(b.clone());
    highs.push(b.clone());
    reps.push(b.clone());
    let mut total = Rational::zero();
    for i in 0..reps.len() - 1 {
        let probe = (&highs[i] + &lows[i + 1]) / int(2);
        if active.iter().all(|q| !q.eval(&probe).is_positive()) {
            total += &reps[i + 1] - &reps[i];
        }
    }
    Ok(CertifiedValue::with_error(total, error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::rational::ratio;

    #[test]
    fn abs_integral_examples() {
        let t = Polynomial::identity();
        assert_eq!(abs_integral(&t, &int(-1), &int(1)).unwrap(), CertifiedValue::exact(int(1)));
        let p = Polynomial::from_ints(&[-1, 0, 1]);
        assert_eq!(abs_integral(&p, &int(0), &int(2)).unwrap(), CertifiedValue::exact(int(2)));
        let z = Polynomial::zero();
        assert_eq!(abs_integral(&z, &int(3), &int(9)).unwrap().value, int(0));
        assert!(abs_integral(&t, &int(1), &int(0)).is_err());
    }

    #[test]
    fn abs_integral_irrational_breakpoints() {
        // ∫_0^2 |t^2 - 2| = 2(2√2 - 2)·(2/3)... computed in closed form below.
        let p = Polynomial::from_ints(&[-2, 0, 1]);
        let v = abs_integral(&p, &int(0), &int(2)).unwrap();
        assert!(!v.is_exact());
        let s = 2f64.sqrt();
        let expected = (2.0 * s - s.powi(3) / 3.0) + (8.0 / 3.0 - 4.0 - (s.powi(3) / 3.0 - 2.0 * s));
        assert!((v.to_f64() - expected).abs() < 1e-10);
        assert!(v.error <= default_tolerance());
    }

    #[test]
    fn sup_norm_examples() {
        let p = Polynomial::from_ints(&[-1, 0, 1]);
        assert_eq!(sup_norm(&p, &int(0), &int(2)).unwrap().value, int(3));
        assert_eq!(sup_norm(&Polynomial::constant(int(-4)), &int(0), &int(1)).unwrap().value, int(4));
        assert_eq!(sup_norm(&Polynomial::identity(), &int(-1), &int(1)).unwrap().value, int(1));
    }

    #[test]
    fn intmax_examples() {
        let c = Polynomial::constant(ratio(5, 3));
        assert_eq!(intmax_ratio(&c, &int(0), &int(1)).unwrap().value, int(1));
        let t = Polynomial::identity();
        assert_eq!(intmax_ratio(&t, &int(-1), &int(1)).unwrap().value, ratio(1, 2));
        let t2 = Polynomial::from_ints(&[0, 0, 1]);
        assert_eq!(intmax_ratio(&t2, &int(-1), &int(1)).unwrap().value, ratio(1, 3));
        assert_eq!(intmax_lower_bound(2), ratio(1, 32));
        assert_eq!(intmax_ratio(&Polynomial::zero(), &int(0), &int(1)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn degiorgi_examples() {
        let x = ratio(1, 2);
        let r = ratio(1, 4);
        // P = 1, k = 0, |E| = A r with A = 1/2.
        let e = IntervalSet::closed(&ratio(3, 8), &ratio(1, 2));
        let one = Polynomial::constant(int(1));
        assert_eq!(degiorgi_ratio(&one, &x, &r, &e, 0).unwrap().value, int(2));
        // P = y - x, k = 1, E = full ball.
        let lin = Polynomial::from_shifted(&[int(0), int(1)], &x);
        let ball = IntervalSet::closed(&ratio(1, 4), &ratio(3, 4));
        assert_eq!(degiorgi_ratio(&lin, &x, &r, &ball, 1).unwrap().value, int(1));
        // Degenerate: ∫_E |P| = 0.
        assert!(degiorgi_ratio(&Polynomial::zero(), &x, &r, &ball, 0).is_err());
        // E outside the ball.
        let far = IntervalSet::closed(&int(0), &ratio(1, 8));
        assert!(degiorgi_ratio(&one, &x, &r, &far, 0).is_err());
    }

    #[test]
    fn nonpositive_measure() {
        // t^2 - 1/4 <= 0 on [0, 1] has measure 1/2.
        let p = Polynomial::new(vec![ratio(-1, 4), int(0), int(1)]);
        let m = measure_where_nonpositive(std::slice::from_ref(&p), &int(0), &int(1), &default_tolerance()).unwrap();
        assert_eq!(m, CertifiedValue::exact(ratio(1, 2)));
        // Intersected with t - 1/3 <= 0.
        let q = Polynomial::new(vec![ratio(-1, 3), int(1)]);
        let m = measure_where_nonpositive(&[p, q], &int(0), &int(1), &default_tolerance()).unwrap();
        assert_eq!(m.value, ratio(1, 3));
    }
}
