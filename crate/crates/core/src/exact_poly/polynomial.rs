use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use super::rational::{factorial, int, to_f64, to_pq, Rational};

/// Dense univariate polynomial with exact rational coefficients, `coeffs[k]` multiplying `t^k`.
///
/// Trailing zeros are always stripped, so the zero polynomial has no coefficients
/// and degree `-1`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        Polynomial::new(vec![Rational::zero(), Rational::one()])
    }

    /// `c * t^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    /// `scale * (t - center)^k`.
    pub fn shifted_power(center: &Rational, k: usize, scale: Rational) -> Self {
        let base = Polynomial::new(vec![-center.clone(), Rational::one()]);
        let mut acc = Polynomial::constant(scale);
        for _ in 0..k {
            acc = &acc * &base;
        }
        acc
    }

    /// Polynomial given by its coefficients in powers of `(t - center)`.
    pub fn from_shifted(coeffs: &[Rational], center: &Rational) -> Self {
        Polynomial::new(coeffs.to_vec()).compose_affine(&-center.clone(), &Rational::one())
    }

    /// `sum_k values[k] / k! * (t - center)^k`.
    pub fn from_taylor(values: &[Rational], center: &Rational) -> Self {
        let coeffs: Vec<Rational> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v / factorial(k))
            .collect();
        Polynomial::from_shifted(&coeffs, center)
    }

    /// Line through `(x0, y0)` and `(x1, y1)`.
    pub fn line_through(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational) -> Self {
        let slope = (y1 - y0) / (x1 - x0);
        Polynomial::new(vec![y0 - &slope * x0, slope])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + to_f64(c))
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Polynomial {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / int(k as i64 + 1));
        }
        Polynomial::new(coeffs)
    }

    /// Signed integral over `[a, b]`.
    pub fn integral(&self, a: &Rational, b: &Rational) -> Rational {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// `P(shift + scale * t)`.
    pub fn compose_affine(&self, shift: &Rational, scale: &Rational) -> Polynomial {
        let inner = Polynomial::new(vec![shift.clone(), scale.clone()]);
        let mut acc = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Polynomial::constant(c.clone());
        }
        acc
    }

    /// Coefficients of `P` in powers of `(t - center)`.
    pub fn shifted_coeffs(&self, center: &Rational) -> Vec<Rational> {
        // Repeated synthetic division by (t - center).
        let mut work = self.coeffs.clone();
        let n = work.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let carry = &work[j + 1] * center;
                work[j] += carry;
            }
        }
        work
    }

    /// The degree `<= m` part of the expansion of `P` at `center`: `P` minus the result is
    /// divisible by `(t - center)^(m+1)`.
    pub fn truncate_shifted(&self, center: &Rational, m: usize) -> Polynomial {
        let mut shifted = self.shifted_coeffs(center);
        shifted.truncate(m + 1);
        Polynomial::from_shifted(&shifted, center)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Quotient and remainder of Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree() as usize;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.primitive();
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&lead.recip())
    }

    /// Positive rational multiple with coprime integer coefficients.
    pub fn primitive(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        use num::Integer;
        let mut den = num::BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let mut g = num::BigInt::zero();
        for c in &self.coeffs {
            let n = (c * Rational::from_integer(den.clone())).to_integer();
            g = g.gcd(&n);
        }
        let factor = Rational::new(den, g);
        self.scale(&factor)
    }

    /// `P / gcd(P, P')`: same distinct roots, all simple.
    pub fn squarefree(&self) -> Polynomial {
        if self.degree() <= 1 {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() <= 0 {
            return self.primitive();
        }
        self.div_rem(&g).0.primitive()
    }

    /// Upper bound for `|P|` on `[lo, hi]` from the expansion at the midpoint.
    pub fn abs_bound(&self, lo: &Rational, hi: &Rational) -> Rational {
        let mid = (lo + hi) / int(2);
        let half = (hi - lo).abs() / int(2);
        let mut acc = Rational::zero();
        let mut pow = Rational::one();
        for c in self.shifted_coeffs(&mid) {
            acc += c.abs() * &pow;
            pow *= &half;
        }
        acc
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => to_pq(c),
                1 => format!("({})t", to_pq(c)),
                _ => format!("({})t^{k}", to_pq(c)),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::rational::ratio;

    #[test]
    fn degree_conventions() {
        assert_eq!(Polynomial::zero().degree(), -1);
        assert_eq!(Polynomial::from_ints(&[1, 0, 0]).degree(), 0);
        assert_eq!(Polynomial::from_ints(&[0, 0, 3]).degree(), 2);
    }

    #[test]
    fn shift_roundtrip() {
        let p = Polynomial::from_ints(&[1, -2, 0, 5]);
        let c = ratio(2, 3);
        let s = p.shifted_coeffs(&c);
        assert_eq!(Polynomial::from_shifted(&s, &c), p);
        assert_eq!(s[0], p.eval(&c));
        assert_eq!(s[1], p.derivative().eval(&c));
    }

    #[test]
    fn truncate_examples() {
        let x = ratio(1, 3);
        let cube = Polynomial::shifted_power(&x, 3, int(1));
        assert!(cube.truncate_shifted(&x, 2).is_zero());

        let p = &(&Polynomial::constant(int(1)) + &Polynomial::shifted_power(&x, 1, int(1))) + &cube;
        let expected = Polynomial::from_shifted(&[int(1), int(1)], &x);
        assert_eq!(p.truncate_shifted(&x, 2), expected);

        let low = Polynomial::from_ints(&[4, 1]);
        assert_eq!(low.truncate_shifted(&x, 2), low);
    }

    #[test]
    fn division_and_gcd() {
        // (t-1)^2 (t+2)
        let p = Polynomial::from_ints(&[2, -3, 0, 1]);
        let (q, r) = p.div_rem(&Polynomial::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(q, Polynomial::from_ints(&[-2, 1, 1]));
        let sf = p.squarefree();
        assert_eq!(sf.degree(), 2);
        assert!(sf.eval(&int(1)).is_zero());
        assert!(sf.eval(&int(-2)).is_zero());
    }

    #[test]
    fn calculus_identities() {
        let p = Polynomial::from_ints(&[3, 0, -1, 7]);
        assert_eq!(p.antiderivative().derivative(), p);
        assert_eq!(Polynomial::from_ints(&[0, 2]).integral(&int(0), &int(3)), int(9));
    }
}
