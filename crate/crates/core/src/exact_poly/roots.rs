//! Real root isolation on the exact path.
//!
//! Roots are isolated with Sturm sequences and refined by sign bisection. A root is
//! reported as exact when it is rational: once an isolating bracket is narrower than
//! `1 / L^2` (with `L` the leading coefficient of the primitive integer polynomial) it
//! holds at most one rational whose denominator divides `L`, and that rational is the
//! simplest one in the bracket.

use num::{BigInt, Integer, One, Signed, Zero};

use super::polynomial::Polynomial;
use super::rational::{int, sign, Rational};

/// A real root known either exactly (`lo == hi`) or inside the open bracket `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
}

impl RealRoot {
    pub fn exact(r: Rational) -> Self {
        RealRoot { lo: r.clone(), hi: r }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Distinct real roots of a polynomial inside an open interval, in increasing order.
#[derive(Debug, Clone)]
pub struct RootIsolation {
    /// Squarefree part of the input; brackets change sign of this polynomial.
    pub squarefree: Polynomial,
    pub roots: Vec<RealRoot>,
}

impl RootIsolation {
    pub fn all_exact(&self) -> bool {
        self.roots.iter().all(RealRoot::is_exact)
    }

    /// Bisects every inexact bracket until its width is at most `width`.
    pub fn refine_to(&mut self, width: &Rational) {
        let q = &self.squarefree;
        for root in self.roots.iter_mut() {
            while !root.is_exact() && &root.width() > width {
                bisect(q, root);
            }
        }
    }
}

/// Sturm sequence of a squarefree polynomial, each member scaled by a positive factor.
pub fn sturm_sequence(q: &Polynomial) -> Vec<Polynomial> {
    let mut seq = vec![q.clone(), q.derivative().primitive()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        if seq[n - 1].degree() == 0 {
            break;
        }
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        let next = -r.primitive();
        if next.is_zero() {
            break;
        }
        seq.push(next);
    }
    seq
}

fn sign_changes(seq: &[Polynomial], x: &Rational) -> usize {
    let mut changes = 0;
    let mut last = 0i8;
    for p in seq {
        let s = sign(&p.eval(x));
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// Number of distinct roots in the open interval `(lo, hi)`.
fn count_open(seq: &[Polynomial], lo: &Rational, hi: &Rational) -> usize {
    let at_hi = seq[0].eval(hi).is_zero() as usize;
    (sign_changes(seq, lo) - sign_changes(seq, hi)) - at_hi
}

fn bisect(q: &Polynomial, root: &mut RealRoot) {
    let mid = root.midpoint();
    let v = q.eval(&mid);
    if v.is_zero() {
        *root = RealRoot::exact(mid);
        return;
    }
    if sign(&v) == sign(&q.eval(&root.lo)) {
        root.lo = mid;
    } else {
        root.hi = mid;
    }
}

/// Smallest-denominator rational strictly between `lo` and `hi` (`hi = None` is +infinity).
pub fn simplest_between(lo: &Rational, hi: Option<&Rational>) -> Rational {
    let fl = lo.floor();
    let candidate = &fl + Rational::one();
    match hi {
        None => candidate,
        Some(h) if &candidate < h => candidate,
        Some(h) => {
            let lo_frac = lo - &fl;
            let hi_frac = h - &fl;
            let new_lo = hi_frac.recip();
            let new_hi = if lo_frac.is_zero() { None } else { Some(lo_frac.recip()) };
            fl + simplest_between(&new_lo, new_hi.as_ref()).recip()
        }
    }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Leading coefficient of the primitive integer form of `q`.
fn integer_leading(q: &Polynomial) -> BigInt {
    q.primitive().leading().to_integer().abs()
}

/// Isolates the distinct real roots of `p` lying strictly inside `(a, b)`.
///
/// The zero polynomial has no isolated roots and yields an empty list.
pub fn isolate_roots(p: &Polynomial, a: &Rational, b: &Rational) -> RootIsolation {
    let q = p.squarefree();
    let mut roots = Vec::new();
    if a >= b || q.degree() <= 0 {
        return RootIsolation { squarefree: q, roots };
    }
    let inside = |r: &Rational| r > a && r < b;
    match q.degree() {
        1 => {
            let r = -q.coeff(0) / q.coeff(1);
            if inside(&r) {
                roots.push(RealRoot::exact(r));
            }
            return RootIsolation { squarefree: q, roots };
        }
        2 => {
            let (c0, c1, c2) = (q.coeff(0), q.coeff(1), q.coeff(2));
            let disc = &c1 * &c1 - int(4) * &c0 * &c2;
            if disc.is_negative() {
                return RootIsolation { squarefree: q, roots };
            }
            if let Some(s) = rational_sqrt(&disc) {
                let two_a = int(2) * &c2;
                let mut rs = vec![(-&c1 - &s) / &two_a, (-&c1 + &s) / &two_a];
                rs.sort();
                rs.dedup();
                roots.extend(rs.into_iter().filter(|r| inside(r)).map(RealRoot::exact));
                return RootIsolation { squarefree: q, roots };
            }
        }
        _ => {}
    }

    let seq = sturm_sequence(&q);
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((lo, hi)) = stack.pop() {
        let count = count_open(&seq, &lo, &hi);
        if count == 0 {
            continue;
        }
        if count == 1 && !q.eval(&lo).is_zero() && !q.eval(&hi).is_zero() {
            roots.push(RealRoot { lo, hi });
            continue;
        }
        let mid = (&lo + &hi) / int(2);
        if q.eval(&mid).is_zero() {
            roots.push(RealRoot::exact(mid.clone()));
        }
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    roots.sort_by(|x, y| x.lo.cmp(&y.lo));

    // Promote brackets that hold a rational root.
    let lead = integer_leading(&q);
    let sep = Rational::new(BigInt::one(), &lead * &lead);
    for root in roots.iter_mut() {
        while !root.is_exact() && root.width() >= sep {
            bisect(&q, root);
        }
        if !root.is_exact() {
            let s = simplest_between(&root.lo, Some(&root.hi));
            if (s.denom().is_one() || lead.is_multiple_of(s.denom())) && q.eval(&s).is_zero() {
                *root = RealRoot::exact(s);
            }
        }
    }
    RootIsolation { squarefree: q, roots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::rational::ratio;

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(&ratio(1, 2), Some(&int(1))), ratio(2, 3));
        assert_eq!(simplest_between(&ratio(3, 10), Some(&ratio(4, 10))), ratio(1, 3));
        assert_eq!(simplest_between(&ratio(-7, 2), Some(&int(5))), int(-3));
        assert_eq!(simplest_between(&int(2), None), int(3));
    }

    #[test]
    fn rational_roots_are_exact() {
        // (3t - 1)(t - 2)(t + 5)(2t - 7)
        let p = Polynomial::from_ints(&[-1, 3])
            * Polynomial::from_ints(&[-2, 1])
            * Polynomial::from_ints(&[5, 1])
            * Polynomial::from_ints(&[-7, 2]);
        let iso = isolate_roots(&p, &int(-10), &int(10));
        let rs: Vec<Rational> = iso.roots.iter().map(|r| r.lo.clone()).collect();
        assert!(iso.all_exact());
        assert_eq!(rs, vec![int(-5), ratio(1, 3), int(2), ratio(7, 2)]);
    }

    #[test]
    fn irrational_roots_are_bracketed() {
        // t^3 - 2 has the single real root 2^(1/3).
        let p = Polynomial::from_ints(&[-2, 0, 0, 1]);
        let mut iso = isolate_roots(&p, &int(0), &int(2));
        assert_eq!(iso.roots.len(), 1);
        assert!(!iso.roots[0].is_exact());
        iso.refine_to(&ratio(1, 1_000_000));
        let m = iso.roots[0].midpoint();
        let approx = crate::exact_poly::rational::to_f64(&m);
        assert!((approx - 2f64.powf(1.0 / 3.0)).abs() < 1e-6);
    }

    #[test]
    fn repeated_and_endpoint_roots() {
        // t^2 (t - 1)^3 (t - 1/2) on (0, 1): only 1/2 is interior.
        let p = Polynomial::from_ints(&[0, 0, 1])
            * Polynomial::from_ints(&[-1, 1])
            * Polynomial::from_ints(&[-1, 1])
            * Polynomial::from_ints(&[-1, 1])
            * Polynomial::from_ints(&[-1, 2]);
        let iso = isolate_roots(&p, &int(0), &int(1));
        assert_eq!(iso.roots, vec![RealRoot::exact(ratio(1, 2))]);
    }

    #[test]
    fn quadratic_surd() {
        let p = Polynomial::from_ints(&[-2, 0, 1]);
        let iso = isolate_roots(&p, &int(-2), &int(2));
        assert_eq!(iso.roots.len(), 2);
        assert!(!iso.all_exact());
    }
}
