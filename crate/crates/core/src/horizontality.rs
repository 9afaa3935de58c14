//! Horizontal curves in the first Heisenberg group and the extendability conditions
//! for jet triples.
//!
//! A curve `(f, g, h)` is horizontal when `h' = 2(f'g - g'f)`. Given jets `(F, G, H)`
//! on a finite set, the extension problem is governed by three conditions: each jet
//! is a Whitney field, the horizontality identity holds at every order, and the area
//! discrepancy `A(a, b)` is small against the velocity `V(a, b)`.

use num::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_poly::rational::{
    binomial, default_tolerance, factorial, int, powi, to_pq, CertifiedValue, NumberFormat, Rational,
};
use crate::exact_poly::{abs_integral, PiecewisePolynomial, Polynomial};
use crate::jets::{default_ladder, JetTriple};

/// A continuous curve `(f, g, h)` with polynomial pieces on shared breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseCurve {
    pub f: PiecewisePolynomial,
    pub g: PiecewisePolynomial,
    pub h: PiecewisePolynomial,
}

impl PiecewiseCurve {
    /// Builds a curve from three components, refining them onto one partition.
    pub fn new(f: PiecewisePolynomial, g: PiecewisePolynomial, h: PiecewisePolynomial) -> Result<Self> {
        for (name, c) in [("f", &f), ("g", &g), ("h", &h)] {
            if let Some(at) = c.discontinuity() {
                return Err(Error::Discontinuous { component: name, at: to_pq(&at) });
            }
        }
        if f.start() != g.start() || f.start() != h.start() || f.end() != g.end() || f.end() != h.end() {
            return Err(Error::InvalidCurve("components cover different domains".into()));
        }
        let mut bps: Vec<Rational> = f.breakpoints().to_vec();
        bps.extend(g.breakpoints().iter().cloned());
        bps.extend(h.breakpoints().iter().cloned());
        Ok(PiecewiseCurve { f: f.refine(&bps), g: g.refine(&bps), h: h.refine(&bps) })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        self.f.breakpoints()
    }

    pub fn eval(&self, t: &Rational) -> Result<(Rational, Rational, Rational)> {
        Ok((self.f.eval(t)?, self.g.eval(t)?, self.h.eval(t)?))
    }

    /// Per piece: `(f, g, h)` polynomials.
    pub fn pieces(&self) -> impl Iterator<Item = (&Polynomial, &Polynomial, &Polynomial)> {
        self.f.pieces().iter().zip(self.g.pieces()).zip(self.h.pieces()).map(|((f, g), h)| (f, g, h))
    }
}

/// `2(f'g - g'f)`.
pub fn area_density(f: &Polynomial, g: &Polynomial) -> Polynomial {
    (&(&f.derivative() * g) - &(&g.derivative() * f)).scale(&int(2))
}

/// The horizontal curve over `(f, g)` with `h(t_0) = h0`.
pub fn lift(f: &PiecewisePolynomial, g: &PiecewisePolynomial, h0: &Rational) -> Result<PiecewiseCurve> {
    for (name, c) in [("f", f), ("g", g)] {
        if let Some(at) = c.discontinuity() {
            return Err(Error::Discontinuous { component: name, at: to_pq(&at) });
        }
    }
    let density = f.combine(g, area_density)?;
    let h = density.antiderivative(h0);
    PiecewiseCurve::new(f.refine(h.breakpoints()), g.refine(h.breakpoints()), h)
}

/// Polynomial defect of the order-`k` horizontality identity on one piece.
pub fn horizontality_defect(f: &Polynomial, g: &Polynomial, h: &Polynomial, k: usize) -> Polynomial {
    let mut sum = Polynomial::zero();
    for i in 0..k {
        let term = &(&f.nth_derivative(k - i) * &g.nth_derivative(i))
            - &(&g.nth_derivative(k - i) * &f.nth_derivative(i));
        sum = &sum + &term.scale(&binomial(k - 1, i));
    }
    &h.nth_derivative(k) - &sum.scale(&int(2))
}

/// `max |h' - 2(f'g - g'f)|` over the curve.
pub fn horizontality_residual(c: &PiecewiseCurve) -> Result<CertifiedValue> {
    higher_horizontality_residual(c, 1)
}

/// `max |h^(k) - 2 Σ_{i<k} C(k-1, i)(f^(k-i) g^(i) - g^(k-i) f^(i))|` over the curve.
pub fn higher_horizontality_residual(c: &PiecewiseCurve, k: usize) -> Result<CertifiedValue> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    let defects: Vec<Polynomial> = c.pieces().map(|(f, g, h)| horizontality_defect(f, g, h, k)).collect();
    PiecewisePolynomial::new(c.breakpoints().to_vec(), defects)?.sup_norm()
}

fn distinct_sites(t: &JetTriple, a: &Rational, b: &Rational) -> Result<()> {
    t.f.site_index(a)?;
    t.f.site_index(b)?;
    if a == b {
        return Err(Error::CoincidentSites);
    }
    Ok(())
}

/// `A(a, b)`, exact.
pub fn area_discrepancy(t: &JetTriple, a: &Rational, b: &Rational) -> Result<Rational> {
    distinct_sites(t, a, b)?;
    let m = t.order();
    let tf = t.f.taylor_poly(a, m)?;
    let tg = t.g.taylor_poly(a, m)?;
    let dh = t.h.value(b, 0)? - t.h.value(a, 0)?;
    let swept = area_density(&tf, &tg).integral(a, b);
    let fa = t.f.value(a, 0)?;
    let ga = t.g.value(a, 0)?;
    let g_gap = t.g.value(b, 0)? - tg.eval(b);
    let f_gap = t.f.value(b, 0)? - tf.eval(b);
    Ok(dh - swept + int(2) * fa * g_gap - int(2) * ga * f_gap)
}

/// `V(a, b)` for `a < b`; exact when the critical points of the Taylor polynomials are
/// rational.
pub fn velocity(t: &JetTriple, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
    distinct_sites(t, a, b)?;
    if a >= b {
        return Err(Error::NotIncreasing { a: to_pq(a), b: to_pq(b) });
    }
    let m = t.order();
    let d = b - a;
    let tf = t.f.taylor_poly(a, m)?.derivative();
    let tg = t.g.taylor_poly(a, m)?.derivative();
    let travel = abs_integral(&tf, a, b)?.add(&abs_integral(&tg, a, b)?);
    Ok(CertifiedValue::exact(powi(&d, 2 * m)).add(&travel.scale(&powi(&d, m))))
}

/// `A(a, b) / V(a, b)` for `a < b`.
pub fn area_velocity_ratio(t: &JetTriple, a: &Rational, b: &Rational) -> Result<CertifiedValue> {
    let area = area_discrepancy(t, a, b)?;
    CertifiedValue::exact(area).div(&velocity(t, a, b)?)
}

/// One scale of a profile: the maximum over site pairs with `0 < b - a <= delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilePoint {
    pub delta: Rational,
    pub value: CertifiedValue,
    /// The maximizing pair, absent when no pair is that close.
    pub pair: Option<(Rational, Rational)>,
}

impl ProfilePoint {
    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        let mut obj = json!({
            "delta": to_pq(&self.delta),
            "value": self.value.render(fmt),
        });
        if !self.value.is_exact() {
            obj["error_bound"] = json!(fmt.render(&self.value.error));
        }
        if let Some((a, b)) = &self.pair {
            obj["pair"] = json!([fmt.render(a), fmt.render(b)]);
        }
        obj
    }
}

/// Pass thresholds for the three extendability conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tolerances {
    pub whitney: Rational,
    pub ode: Rational,
    pub area: Rational,
}

impl Default for Tolerances {
    fn default() -> Self {
        let t = default_tolerance();
        Tolerances { whitney: t.clone(), ode: t.clone(), area: t }
    }
}

/// Finite-scale evidence for the three extendability conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendabilityReport {
    /// Whitney modulus profiles of `F`, `G` and `H`.
    pub whitney: [Vec<ProfilePoint>; 3],
    pub ode_max: Rational,
    pub area_profile: Vec<ProfilePoint>,
    pub whitney_pass: [bool; 3],
    pub ode_pass: bool,
    pub area_pass: bool,
}

impl ExtendabilityReport {
    pub fn verdict(&self) -> bool {
        self.whitney_pass.iter().all(|p| *p) && self.ode_pass && self.area_pass
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        let profile = |p: &[ProfilePoint]| Value::Array(p.iter().map(|q| q.to_json(fmt)).collect());
        let names = ["F", "G", "H"];
        let mut whitney = serde_json::Map::new();
        for (i, name) in names.iter().enumerate() {
            whitney.insert(
                name.to_string(),
                json!({"profile": profile(&self.whitney[i]), "pass": self.whitney_pass[i]}),
            );
        }
        json!({
            "whitney_fields": whitney,
            "ode": {"max_abs_residual": fmt.render(&self.ode_max), "pass": self.ode_pass},
            "area_velocity": {"profile": profile(&self.area_profile), "pass": self.area_pass},
            "verdict": if self.verdict() { "pass" } else { "fail" },
        })
    }
}

/// Pass rule for a profile: small at the finest populated scale and non-increasing over
/// the last three populated scales.
pub fn profile_passes(profile: &[ProfilePoint], tol: &Rational) -> bool {
    let mut populated: Vec<&ProfilePoint> = profile.iter().filter(|p| p.pair.is_some()).collect();
    populated.sort_by(|x, y| y.delta.cmp(&x.delta));
    let Some(last) = populated.last() else {
        return true;
    };
    if &last.value.upper() > tol {
        return false;
    }
    let tail = &populated[populated.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1].value.value <= w[0].value.value)
}

fn sorted_ladder(ladder: &[Rational]) -> Vec<Rational> {
    let mut l = ladder.to_vec();
    l.sort_by(|x, y| y.cmp(x));
    l.dedup();
    l
}

/// Max of `values[i]` over pairs at distance `<= delta`, for each `delta`.
fn profile_from_pairs(ladder: &[Rational], pairs: &[(Rational, Rational, CertifiedValue)]) -> Vec<ProfilePoint> {
    ladder
        .iter()
        .map(|delta| {
            let best = pairs
                .iter()
                .filter(|(a, b, _)| &(b - a) <= delta)
                .max_by(|x, y| x.2.value.cmp(&y.2.value));
            match best {
                Some((a, b, v)) => ProfilePoint {
                    delta: delta.clone(),
                    value: v.clone(),
                    pair: Some((a.clone(), b.clone())),
                },
                None => ProfilePoint {
                    delta: delta.clone(),
                    value: CertifiedValue::exact(Rational::zero()),
                    pair: None,
                },
            }
        })
        .collect()
}

/// `|A/V|` over all ordered pairs `a < b` with `b - a <= max_delta`.
pub fn area_velocity_pairs(t: &JetTriple, max_delta: &Rational) -> Result<Vec<(Rational, Rational, CertifiedValue)>> {
    let sites = t.sites();
    let n = sites.len();
    let idx: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).take_while(move |&j| &(&sites[j] - &sites[i]) <= max_delta).map(move |j| (i, j)))
        .collect();
    idx.par_iter()
        .map(|&(i, j)| {
            let r = area_velocity_ratio(t, &sites[i], &sites[j])?;
            let abs = CertifiedValue::with_error(r.value.abs(), r.error);
            Ok((sites[i].clone(), sites[j].clone(), abs))
        })
        .collect()
}

fn whitney_profile(jet: &crate::jets::Jet, ladder: &[Rational]) -> Vec<ProfilePoint> {
    ladder
        .iter()
        .map(|delta| {
            let w = jet.whitney_modulus(delta);
            ProfilePoint { delta: delta.clone(), value: CertifiedValue::exact(w.value), pair: w.pair }
        })
        .collect()
}

/// The three-condition report on a δ-ladder (`None` uses `2^-j`, `j = 0..=12`).
pub fn extendability_report(
    t: &JetTriple,
    ladder: Option<&[Rational]>,
    tol: &Tolerances,
) -> Result<ExtendabilityReport> {
    if t.sites().len() < 2 {
        return Err(Error::InvalidJet("at least two sites are required".into()));
    }
    let ladder = sorted_ladder(ladder.map(|l| l.to_vec()).unwrap_or_else(default_ladder).as_slice());
    let whitney = [
        whitney_profile(&t.f, &ladder),
        whitney_profile(&t.g, &ladder),
        whitney_profile(&t.h, &ladder),
    ];
    let whitney_pass = [0, 1, 2].map(|i| profile_passes(&whitney[i], &tol.whitney));
    let ode_max = t.max_ode_residual();
    let ode_pass = ode_max <= tol.ode;
    let pairs = area_velocity_pairs(t, &ladder[0])?;
    let area_profile = profile_from_pairs(&ladder, &pairs);
    let area_pass = profile_passes(&area_profile, &tol.area);
    Ok(ExtendabilityReport { whitney, ode_max, area_profile, whitney_pass, ode_pass, area_pass })
}

/// The polynomial of degree `<= 2m + 1` with derivatives `va` at `a` and `vb` at `b`.
pub fn hermite_interpolant(a: &Rational, va: &[Rational], b: &Rational, vb: &[Rational]) -> Polynomial {
    let m = va.len() - 1;
    let ta = Polynomial::from_taylor(va, a);
    // P = T_a + (y - a)^(m+1) Q, with Q solved in powers of u = y - b.
    let d = b - a;
    let c: Vec<Rational> = (0..=m + 1).map(|j| binomial(m + 1, j) * powi(&d, m + 1 - j)).collect();
    let e: Vec<Rational> = (0..=m).map(|k| (&vb[k] - ta.nth_derivative(k).eval(b)) / factorial(k)).collect();
    let mut q: Vec<Rational> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut acc = e[k].clone();
        for j in 1..=k {
            acc -= &c[j] * &q[k - j];
        }
        q.push(acc / &c[0]);
    }
    let tail = &Polynomial::shifted_power(a, m + 1, int(1)) * &Polynomial::from_shifted(&q, b);
    &ta + &tail
}

/// Hermite fill of `F` and `G` on every gap, lifted from `H^0` at the first site.
pub fn hermite_gap_fill(t: &JetTriple) -> Result<PiecewiseCurve> {
    let sites = t.sites();
    if sites.len() < 2 {
        return Err(Error::InvalidJet("at least two sites are required".into()));
    }
    let fill = |jet: &crate::jets::Jet| -> Result<PiecewisePolynomial> {
        let pieces = sites
            .windows(2)
            .map(|w| Ok(hermite_interpolant(&w[0], jet.values_at(&w[0])?, &w[1], jet.values_at(&w[1])?)))
            .collect::<Result<Vec<_>>>()?;
        PiecewisePolynomial::new(sites.to_vec(), pieces)
    };
    lift(&fill(&t.f)?, &fill(&t.g)?, t.h.value(&sites[0], 0)?)
}

/// `H^0(b) - h(b)` where `h` lifts the Hermite fill on `[a, b]` from `H^0(a)`.
pub fn horizontal_repair_gap(t: &JetTriple, a: &Rational, b: &Rational) -> Result<Rational> {
    let i = t.f.site_index(a)?;
    let j = t.f.site_index(b)?;
    if j != i + 1 {
        return Err(Error::InvalidJet(format!("{} and {} are not consecutive sites", to_pq(a), to_pq(b))));
    }
    let f = hermite_interpolant(a, t.f.values_at(a)?, b, t.f.values_at(b)?);
    let g = hermite_interpolant(a, t.g.values_at(a)?, b, t.g.values_at(b)?);
    let lifted = t.h.value(a, 0)? + area_density(&f, &g).integral(a, b);
    Ok(t.h.value(b, 0)? - lifted)
}
