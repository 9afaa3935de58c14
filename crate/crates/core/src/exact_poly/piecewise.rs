//! Piecewise polynomials on a finite partition of a closed interval.

use num::Zero;

use super::norms::{abs_integral, sup_norm};
use super::polynomial::Polynomial;
use super::rational::{max, min, to_pq, CertifiedValue, Rational};
use crate::error::{Error, Result};

/// Polynomial pieces in the global variable over `t_0 < t_1 < ... < t_N`.
///
/// Piece `i` lives on `[t_i, t_{i+1}]`. At an interior breakpoint evaluation uses the
/// piece to the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<Rational>,
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidCurve(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                pieces.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::NotIncreasing { a: to_pq(&w[0]), b: to_pq(&w[1]) });
            }
        }
        Ok(PiecewisePolynomial { breakpoints, pieces })
    }

    /// A single polynomial on `[a, b]`.
    pub fn single(p: Polynomial, a: Rational, b: Rational) -> Result<Self> {
        Self::new(vec![a, b], vec![p])
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn start(&self) -> &Rational {
        &self.breakpoints[0]
    }

    pub fn end(&self) -> &Rational {
        self.breakpoints.last().unwrap()
    }

    /// Index of the piece used to evaluate at `t`, if `t` lies in the domain.
    pub fn locate(&self, t: &Rational) -> Option<usize> {
        if t < self.start() || t > self.end() {
            return None;
        }
        let n = self.pieces.len();
        let idx = self.breakpoints.partition_point(|b| b <= t);
        Some(idx.saturating_sub(1).min(n - 1))
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        let i = self.locate(t).ok_or_else(|| Error::OutOfDomain(to_pq(t)))?;
        Ok(self.pieces[i].eval(t))
    }

    /// First interior breakpoint where adjacent pieces disagree.
    pub fn discontinuity(&self) -> Option<Rational> {
        (1..self.pieces.len())
            .find(|&i| {
                let t = &self.breakpoints[i];
                self.pieces[i - 1].eval(t) != self.pieces[i].eval(t)
            })
            .map(|i| self.breakpoints[i].clone())
    }

    pub fn map_pieces(&self, f: impl Fn(&Polynomial) -> Polynomial) -> PiecewisePolynomial {
        PiecewisePolynomial {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    pub fn derivative(&self) -> PiecewisePolynomial {
        self.map_pieces(Polynomial::derivative)
    }

    /// Continuous primitive taking the value `start_value` at the left end of the domain.
    pub fn antiderivative(&self, start_value: &Rational) -> PiecewisePolynomial {
        let mut level = start_value.clone();
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let a = &self.breakpoints[i];
            let anti = p.antiderivative();
            let shift = &level - anti.eval(a);
            let piece = &anti + &Polynomial::constant(shift);
            level = piece.eval(&self.breakpoints[i + 1]);
            pieces.push(piece);
        }
        PiecewisePolynomial { breakpoints: self.breakpoints.clone(), pieces }
    }

    /// The same function on the partition refined by `extra` (points outside the domain
    /// are ignored).
    pub fn refine(&self, extra: &[Rational]) -> PiecewisePolynomial {
        let mut bps: Vec<Rational> = self
            .breakpoints
            .iter()
            .cloned()
            .chain(extra.iter().filter(|t| *t > self.start() && *t < self.end()).cloned())
            .collect();
        bps.sort();
        bps.dedup();
        let pieces = bps
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / super::rational::int(2);
                self.pieces[self.locate(&mid).unwrap()].clone()
            })
            .collect();
        PiecewisePolynomial { breakpoints: bps, pieces }
    }

    /// Pointwise combination of two functions on the union of their partitions.
    pub fn combine(
        &self,
        other: &PiecewisePolynomial,
        f: impl Fn(&Polynomial, &Polynomial) -> Polynomial,
    ) -> Result<PiecewisePolynomial> {
        if self.start() != other.start() || self.end() != other.end() {
            return Err(Error::InvalidCurve("pieces cover different domains".into()));
        }
        let a = self.refine(&other.breakpoints);
        let b = other.refine(&self.breakpoints);
        let pieces = a.pieces.iter().zip(&b.pieces).map(|(p, q)| f(p, q)).collect();
        Ok(PiecewisePolynomial { breakpoints: a.breakpoints, pieces })
    }

    /// `∫_a^b` of the function, for `a <= b` inside the domain.
    pub fn integral(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        let mut total = Rational::zero();
        for (lo, hi, p) in self.clipped(a, b)? {
            total += p.integral(&lo, &hi);
        }
        Ok(total)
    }

    /// `∫_a^b |u|` summed over the pieces.
    pub fn abs_integral(&self, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
        let mut total = CertifiedValue::exact(Rational::zero());
        for (lo, hi, p) in self.clipped(a, b)? {
            total = total.add(&abs_integral(p, &lo, &hi)?);
        }
        Ok(total)
    }

    /// Maximum of `|u|` over the domain.
    pub fn sup_norm(&self) -> Result<CertifiedValue> {
        let mut best = CertifiedValue::exact(Rational::zero());
        for (i, p) in self.pieces.iter().enumerate() {
            let s = sup_norm(p, &self.breakpoints[i], &self.breakpoints[i + 1])?;
            if s.upper() > best.upper() {
                best = s;
            }
        }
        Ok(best)
    }

    /// The nonempty pieces of `[a, b]`, each with its polynomial.
    pub fn clipped(&self, a: &Rational, b: &Rational) -> Result<Vec<(Rational, Rational, &Polynomial)>> {
        if a > b {
            return Err(Error::ReversedInterval { lo: to_pq(a), hi: to_pq(b) });
        }
        if a < self.start() || b > self.end() {
            return Err(Error::OutOfDomain(format!("[{}, {}]", to_pq(a), to_pq(b))));
        }
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let lo = max(a, &self.breakpoints[i]);
            let hi = min(b, &self.breakpoints[i + 1]);
            if lo < hi {
                out.push((lo, hi, p));
            }
        }
        Ok(out)
    }
}
