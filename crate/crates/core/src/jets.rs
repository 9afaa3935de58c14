//! Jets of order `m` on finite sets, Taylor polynomials and Whitney remainders.

use num::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_poly::rational::{binomial, factorial, int, pow2, powi, to_pq, Exact, Rational};
use crate::exact_poly::Polynomial;

/// Values `(F^0(a), ..., F^m(a))` at each site `a` of a finite set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    m: usize,
    sites: Vec<Rational>,
    values: Vec<Vec<Rational>>,
}

impl Jet {
    pub fn new(m: usize, sites: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<Self> {
        if sites.len() != values.len() {
            return Err(Error::InvalidJet(format!(
                "{} sites but {} value vectors",
                sites.len(),
                values.len()
            )));
        }
        for w in sites.windows(2) {
            match w[0].cmp(&w[1]) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => return Err(Error::CoincidentSites),
                std::cmp::Ordering::Greater => {
                    return Err(Error::NotIncreasing { a: to_pq(&w[0]), b: to_pq(&w[1]) })
                }
            }
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.len() != m + 1) {
            return Err(Error::InvalidJet(format!(
                "site {} carries {} values, expected {}",
                to_pq(&sites[i]),
                v.len(),
                m + 1
            )));
        }
        Ok(Jet { m, sites, values })
    }

    /// The jet of a polynomial: its exact derivatives of order `0..=m` at each site.
    pub fn from_polynomial(p: &Polynomial, sites: &[Rational], m: usize) -> Result<Self> {
        let derivs: Vec<Polynomial> = (0..=m).map(|k| p.nth_derivative(k)).collect();
        let values = sites.iter().map(|a| derivs.iter().map(|d| d.eval(a)).collect()).collect();
        Self::new(m, sites.to_vec(), values)
    }

    /// The jet that is identically zero.
    pub fn zero(sites: &[Rational], m: usize) -> Result<Self> {
        Self::new(m, sites.to_vec(), vec![vec![Rational::zero(); m + 1]; sites.len()])
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn sites(&self) -> &[Rational] {
        &self.sites
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn site_index(&self, a: &Rational) -> Result<usize> {
        self.sites.binary_search(a).map_err(|_| Error::NotASite(to_pq(a)))
    }

    /// `F^k(a)`.
    pub fn value(&self, a: &Rational, k: usize) -> Result<&Rational> {
        if k > self.m {
            return Err(Error::OrderOutOfRange { k, m: self.m });
        }
        Ok(&self.values[self.site_index(a)?][k])
    }

    pub fn values_at(&self, a: &Rational) -> Result<&[Rational]> {
        Ok(&self.values[self.site_index(a)?])
    }

    /// Replaces `F^k(a)`.
    pub fn set_value(&mut self, a: &Rational, k: usize, v: Rational) -> Result<()> {
        if k > self.m {
            return Err(Error::OrderOutOfRange { k, m: self.m });
        }
        let i = self.site_index(a)?;
        self.values[i][k] = v;
        Ok(())
    }

    /// `T_a^order F(y) = Σ_{k <= order} F^k(a) (y - a)^k / k!`.
    pub fn taylor_poly(&self, a: &Rational, order: usize) -> Result<Polynomial> {
        if order > self.m {
            return Err(Error::OrderOutOfRange { k: order, m: self.m });
        }
        let vals = self.values_at(a)?;
        Ok(Polynomial::from_taylor(&vals[..=order], a))
    }

    /// `(R_a^m F)^k(b) = F^k(b) - Σ_{l <= m-k} F^{k+l}(a) (b - a)^l / l!`.
    pub fn remainder(&self, a: &Rational, b: &Rational, k: usize) -> Result<Rational> {
        if k > self.m {
            return Err(Error::OrderOutOfRange { k, m: self.m });
        }
        let va = self.values_at(a)?;
        let vb = self.values_at(b)?;
        Ok(remainder_from(va, vb, a, b, k, self.m))
    }

    /// Largest normalized remainder over site pairs with `0 < |b - a| <= δ`.
    pub fn whitney_modulus(&self, delta: &Rational) -> WhitneyModulus {
        let m = self.m;
        let n = self.sites.len();
        let empty = || WhitneyModulus {
            value: Rational::zero(),
            per_order: vec![Rational::zero(); m + 1],
            pair: None,
        };
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = empty();
                for j in (i + 1)..n {
                    let d = &self.sites[j] - &self.sites[i];
                    if &d > delta {
                        break;
                    }
                    for (a, b) in [(i, j), (j, i)] {
                        for k in 0..=m {
                            let r = remainder_from(
                                &self.values[a],
                                &self.values[b],
                                &self.sites[a],
                                &self.sites[b],
                                k,
                                m,
                            );
                            let q = r.abs() / powi(&d, m - k);
                            if acc.pair.is_none() || q > acc.value {
                                acc.value = q.clone();
                                acc.pair = Some((self.sites[a].clone(), self.sites[b].clone()));
                            }
                            if q > acc.per_order[k] {
                                acc.per_order[k] = q;
                            }
                        }
                    }
                }
                acc
            })
            .reduce(empty, WhitneyModulus::merge)
    }

    /// The modulus at every scale of a δ-ladder.
    pub fn modulus_profile(&self, ladder: &[Rational]) -> Vec<(Rational, WhitneyModulus)> {
        ladder.iter().map(|d| (d.clone(), self.whitney_modulus(d))).collect()
    }

    /// Restriction to the sites satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&Rational) -> bool) -> Jet {
        let (sites, values) = self
            .sites
            .iter()
            .zip(&self.values)
            .filter(|(a, _)| keep(a))
            .map(|(a, v)| (a.clone(), v.clone()))
            .unzip();
        Jet { m: self.m, sites, values }
    }
}

fn remainder_from(
    va: &[Rational],
    vb: &[Rational],
    a: &Rational,
    b: &Rational,
    k: usize,
    m: usize,
) -> Rational {
    let h = b - a;
    let mut sum = Rational::zero();
    let mut pow = int(1);
    for l in 0..=(m - k) {
        sum += &va[k + l] * &pow / factorial(l);
        pow *= &h;
    }
    &vb[k] - sum
}

/// Whitney modulus split by derivative order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhitneyModulus {
    /// Maximum over all orders.
    pub value: Rational,
    /// `per_order[k] = max |(R_a^m F)^k(b)| / |b - a|^(m-k)`.
    pub per_order: Vec<Rational>,
    /// A maximizing ordered pair `(a, b)`; `None` when no pair is close enough.
    pub pair: Option<(Rational, Rational)>,
}

impl WhitneyModulus {
    fn merge(self, other: WhitneyModulus) -> WhitneyModulus {
        let per_order = self
            .per_order
            .into_iter()
            .zip(other.per_order)
            .map(|(p, q)| if p >= q { p } else { q })
            .collect();
        let (value, pair) = match (&self.pair, &other.pair) {
            (None, _) => (other.value, other.pair),
            (_, None) => (self.value, self.pair),
            _ if other.value > self.value => (other.value, other.pair),
            _ => (self.value, self.pair),
        };
        WhitneyModulus { value, per_order, pair }
    }
}

/// `δ_j = 2^-j` for `j = 0..=12`.
pub fn default_ladder() -> Vec<Rational> {
    (0..=12).map(|j| pow2(-j)).collect()
}

/// Three jets `(F, G, H)` of one order on one set of sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetTriple {
    pub f: Jet,
    pub g: Jet,
    pub h: Jet,
}

impl JetTriple {
    pub fn new(f: Jet, g: Jet, h: Jet) -> Result<Self> {
        if f.m != g.m || f.m != h.m {
            return Err(Error::InvalidJet("F, G and H must share the order m".into()));
        }
        if f.sites != g.sites || f.sites != h.sites {
            return Err(Error::InvalidJet("F, G and H must share their sites".into()));
        }
        Ok(JetTriple { f, g, h })
    }

    /// Jets of three polynomials on the given sites.
    pub fn from_polynomials(
        f: &Polynomial,
        g: &Polynomial,
        h: &Polynomial,
        sites: &[Rational],
        m: usize,
    ) -> Result<Self> {
        Self::new(
            Jet::from_polynomial(f, sites, m)?,
            Jet::from_polynomial(g, sites, m)?,
            Jet::from_polynomial(h, sites, m)?,
        )
    }

    pub fn order(&self) -> usize {
        self.f.m
    }

    pub fn sites(&self) -> &[Rational] {
        &self.f.sites
    }

    /// `H^k(a) - 2 Σ_{i<k} C(k-1, i) (F^{k-i} G^i - G^{k-i} F^i)(a)`.
    pub fn ode_residual(&self, a: &Rational, k: usize) -> Result<Rational> {
        if k == 0 {
            return Err(Error::ZeroOrder);
        }
        if k > self.order() {
            return Err(Error::OrderOutOfRange { k, m: self.order() });
        }
        let i = self.f.site_index(a)?;
        let (fv, gv, hv) = (&self.f.values[i], &self.g.values[i], &self.h.values[i]);
        Ok(ode_defect(fv, gv, hv, k))
    }

    /// Largest `|ode_residual|` over all sites and `1 <= k <= m`.
    pub fn max_ode_residual(&self) -> Rational {
        let m = self.order();
        (0..self.sites().len())
            .into_par_iter()
            .map(|i| {
                let (fv, gv, hv) = (&self.f.values[i], &self.g.values[i], &self.h.values[i]);
                (1..=m).map(|k| ode_defect(fv, gv, hv, k).abs()).max().unwrap_or_else(Rational::zero)
            })
            .reduce(Rational::zero, |x, y| if x >= y { x } else { y })
    }
}

/// The defect of the order-`k` horizontality identity from derivative values at a point.
pub fn ode_defect(fv: &[Rational], gv: &[Rational], hv: &[Rational], k: usize) -> Rational {
    let mut sum = Rational::zero();
    for i in 0..k {
        let term = &fv[k - i] * &gv[i] - &gv[k - i] * &fv[i];
        sum += binomial(k - 1, i) * term;
    }
    &hv[k] - int(2) * sum
}

/// `Q(y) = c + ∫_x^y P`.
pub fn integrate_jet(p: &Polynomial, f_at_x: &Rational, x: &Rational) -> Polynomial {
    let anti = p.antiderivative();
    let shift = f_at_x - anti.eval(x);
    &anti + &Polynomial::constant(shift)
}

/// Degree-`m` truncation at `x` of `R(y) = h(x) + 2 ∫_x^y (P'Q - Q'P)`.
pub fn vertical_jet(
    p: &Polynomial,
    q: &Polynomial,
    h_at_x: &Rational,
    x: &Rational,
    m: usize,
) -> Polynomial {
    let integrand = (&(&p.derivative() * q) - &(&q.derivative() * p)).scale(&int(2));
    integrate_jet(&integrand, h_at_x, x).truncate_shifted(x, m)
}

#[derive(Serialize, Deserialize)]
struct SiteRecord {
    x: Exact,
    #[serde(rename = "F")]
    f: Vec<Exact>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<Exact>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Vec<Exact>>,
}

/// On-disk jet document: `{"m": int, "sites": [{"x", "F", "G", "H"}]}`.
#[derive(Serialize, Deserialize)]
pub struct JetDocument {
    m: usize,
    sites: Vec<SiteRecord>,
}

fn unwrap_exact(v: &[Exact]) -> Vec<Rational> {
    v.iter().map(|e| e.0.clone()).collect()
}

fn wrap_exact(v: &[Rational]) -> Vec<Exact> {
    v.iter().cloned().map(Exact).collect()
}

impl JetDocument {
    pub fn from_jet(jet: &Jet) -> Self {
        let sites = jet
            .sites
            .iter()
            .zip(&jet.values)
            .map(|(x, v)| SiteRecord { x: Exact(x.clone()), f: wrap_exact(v), g: None, h: None })
            .collect();
        JetDocument { m: jet.m, sites }
    }

    pub fn from_triple(t: &JetTriple) -> Self {
        let sites = (0..t.sites().len())
            .map(|i| SiteRecord {
                x: Exact(t.f.sites[i].clone()),
                f: wrap_exact(&t.f.values[i]),
                g: Some(wrap_exact(&t.g.values[i])),
                h: Some(wrap_exact(&t.h.values[i])),
            })
            .collect();
        JetDocument { m: t.order(), sites }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn is_triple(&self) -> bool {
        !self.sites.is_empty() && self.sites.iter().all(|s| s.g.is_some() && s.h.is_some())
    }

    pub fn to_jet(&self) -> Result<Jet> {
        let sites = self.sites.iter().map(|s| s.x.0.clone()).collect();
        let values = self.sites.iter().map(|s| unwrap_exact(&s.f)).collect();
        Jet::new(self.m, sites, values)
    }

    pub fn to_triple(&self) -> Result<JetTriple> {
        let sites: Vec<Rational> = self.sites.iter().map(|s| s.x.0.clone()).collect();
        let pick = |sel: fn(&SiteRecord) -> Option<&Vec<Exact>>, name: &str| -> Result<Jet> {
            let values = self
                .sites
                .iter()
                .map(|s| {
                    sel(s)
                        .map(|v| unwrap_exact(v))
                        .ok_or_else(|| Error::InvalidJet(format!("site {} lacks {name}", s.x)))
                })
                .collect::<Result<Vec<_>>>()?;
            Jet::new(self.m, sites.clone(), values)
        };
        JetTriple::new(pick(|s| Some(&s.f), "F")?, pick(|s| s.g.as_ref(), "G")?, pick(|s| s.h.as_ref(), "H")?)
    }
}
