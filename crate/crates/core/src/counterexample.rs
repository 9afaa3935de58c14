//! A piecewise linear horizontal curve with no `C^2` horizontal Lusin approximation,
//! built exactly to a finite generation depth.
//!
//! Generation `n` places open intervals of radius `w_n` at dyadic centers `k / 2^n`
//! avoiding earlier generations. On each such interval `f` and `g` trace a square of
//! side `h_n`, so the lifted `h` climbs by `4 h_n^2` across it while `f = g = 0` at
//! both ends. Points on either side of a generation-`(n+1)` interval at distance
//! `2^-n` see a vertical jump that no `C^2` horizontal curve can match once
//! `4^n h_{n+1} >= 2`.

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_poly::rational::{int, min, pow2, powi, ratio, to_pq, CertifiedValue, NumberFormat, Rational};
use crate::exact_poly::{PiecewisePolynomial, Polynomial};
use crate::horizontality::{area_discrepancy, lift, velocity, PiecewiseCurve};
use crate::interval_sets::{Interval, IntervalSet};
use crate::jets::{Jet, JetTriple};

/// A positive, strictly decreasing sequence indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sequence {
    /// `scale * ratio^n`.
    Geometric { scale: Rational, ratio: Rational },
    /// `2^-(quad n^2 + lin n)`.
    DyadicGaussian { quad: u32, lin: u32 },
}

impl Sequence {
    pub fn term(&self, n: usize) -> Rational {
        self.family().term(n)
    }

    fn family(&self) -> Family {
        match self {
            Sequence::Geometric { scale, ratio } => Family {
                coeff: scale.clone(),
                ratio: ratio.clone(),
                quad: 0,
                lin: 0,
            },
            Sequence::DyadicGaussian { quad, lin } => Family {
                coeff: int(1),
                ratio: int(1),
                quad: *quad as i64,
                lin: *lin as i64,
            },
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Sequence::Geometric { scale, ratio } => {
                scale.is_positive() && ratio.is_positive() && ratio < &Rational::one()
            }
            Sequence::DyadicGaussian { quad, lin } => quad + lin > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} is not positive and strictly decreasing")))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sequence::Geometric { scale, ratio } => format!("{} * ({})^n", to_pq(scale), to_pq(ratio)),
            Sequence::DyadicGaussian { quad, lin } => format!("2^-({quad} n^2 + {lin} n)"),
        }
    }
}

/// Terms `coeff * ratio^k * 2^-(quad k^2 + lin k)`; closed under products.
#[derive(Debug, Clone)]
struct Family {
    coeff: Rational,
    ratio: Rational,
    quad: i64,
    lin: i64,
}

impl Family {
    fn term(&self, k: usize) -> Rational {
        let k = k as i64;
        &self.coeff * powi(&self.ratio, k as usize) * pow2(-(self.quad * k * k + self.lin * k))
    }

    fn mul(&self, other: &Family) -> Family {
        Family {
            coeff: &self.coeff * &other.coeff,
            ratio: &self.ratio * &other.ratio,
            quad: self.quad + other.quad,
            lin: self.lin + other.lin,
        }
    }

    fn pow(&self, p: usize) -> Family {
        Family {
            coeff: powi(&self.coeff, p),
            ratio: powi(&self.ratio, p),
            quad: self.quad * p as i64,
            lin: self.lin * p as i64,
        }
    }

    /// `Σ_{k > n} term(k)`: exact for geometric families, otherwise a partial sum of
    /// `TAIL_TERMS` terms with a geometric bound on the rest.
    fn tail(&self, n: usize) -> Result<CertifiedValue> {
        const TAIL_TERMS: usize = 8;
        if self.quad == 0 {
            let q = &self.ratio * pow2(-self.lin);
            if q >= Rational::one() {
                return Err(Error::InvalidParams("a required series diverges".into()));
            }
            return Ok(CertifiedValue::exact(self.term(n + 1) / (Rational::one() - q)));
        }
        let mut sum = Rational::zero();
        for k in (n + 1)..=(n + TAIL_TERMS) {
            sum += self.term(k);
        }
        // Successive term ratios decrease in k, so the rest is dominated by a geometric series.
        let k = (n + TAIL_TERMS + 1) as i64;
        let rho = &self.ratio * pow2(-self.lin - self.quad * (2 * k + 1));
        if rho >= Rational::one() {
            return Err(Error::InvalidParams("tail bound does not converge".into()));
        }
        let rest = self.term(k as usize) / (Rational::one() - rho);
        Ok(CertifiedValue::from_bounds(sum.clone(), sum + rest))
    }
}

/// Heights `h_n`, neighborhood radii `λ_n`, interval radii `w_n` and the depth `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterexampleParams {
    pub h: Sequence,
    pub lambda: Sequence,
    pub w: Sequence,
    pub depth: usize,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams {
            h: Sequence::Geometric { scale: int(1), ratio: ratio(1, 3) },
            lambda: Sequence::Geometric { scale: int(1), ratio: ratio(2, 5) },
            w: Sequence::DyadicGaussian { quad: 1, lin: 6 },
            depth: 10,
        }
    }
}

impl CounterexampleParams {
    pub fn with_depth(depth: usize) -> Self {
        CounterexampleParams { depth, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.h.validate("h")?;
        self.lambda.validate("lambda")?;
        self.w.validate("w")?;
        if self.depth == 0 {
            return Err(Error::InvalidParams("depth must be at least 1".into()));
        }
        for n in 1..=self.depth {
            if self.w.term(n) > pow2(-6 * n as i64) {
                return Err(Error::InvalidParams(format!("w_{n} exceeds 2^-{}", 6 * n)));
            }
        }
        Ok(())
    }

    pub fn h_n(&self, n: usize) -> Rational {
        self.h.term(n)
    }

    pub fn lambda_n(&self, n: usize) -> Rational {
        self.lambda.term(n)
    }

    pub fn w_n(&self, n: usize) -> Rational {
        self.w.term(n)
    }
}

/// A sequence indexed by `n = 1..=N` with the index from which it is strictly monotone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceCheck {
    pub name: String,
    pub values: Vec<CertifiedValue>,
    /// Smallest `n0` such that the sequence is certified strictly decreasing (or
    /// increasing, for growth checks) on `n0..=N`.
    pub monotone_from: Option<usize>,
    pub increasing: bool,
}

impl SequenceCheck {
    fn new(name: impl Into<String>, values: Vec<CertifiedValue>, increasing: bool) -> Self {
        let step_ok = |a: &CertifiedValue, b: &CertifiedValue| {
            if increasing {
                b.lower() > a.upper()
            } else {
                b.upper() < a.lower()
            }
        };
        let mut from = values.len();
        while from >= 2 && step_ok(&values[from - 2], &values[from - 1]) {
            from -= 1;
        }
        let monotone_from = if values.is_empty() { None } else { Some(from.max(1)) };
        SequenceCheck { name: name.into(), values, monotone_from, increasing }
    }

    /// Strictly monotone on `n0..=N`.
    pub fn monotone_from_at_most(&self, n0: usize) -> bool {
        self.monotone_from.is_some_and(|m| m <= n0)
    }

    fn to_json(&self, fmt: &NumberFormat) -> Value {
        json!({
            "name": self.name,
            "direction": if self.increasing { "increasing" } else { "decreasing" },
            "monotone_from": self.monotone_from,
            "values": self.values.iter().enumerate().map(|(i, v)| {
                let mut o = json!({"n": i + 1, "value": v.render(fmt)});
                if !v.is_exact() {
                    o["error_bound"] = json!(fmt.render(&v.error));
                }
                o
            }).collect::<Vec<_>>(),
        })
    }
}

/// Exact and certified values of every parameter condition for `n <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamReport {
    /// Partial sums `Σ_{k <= n} 2^k λ_k`.
    pub lambda_sums: Vec<Rational>,
    /// `Σ_k 2^k λ_k`.
    pub lambda_sum_limit: Rational,
    pub h_over_lambda: SequenceCheck,
    pub four_n_h: SequenceCheck,
    /// `λ_{n+1}^-2 Σ_{k > n} 2^(k-n) h_k^2`.
    pub h_tail: SequenceCheck,
    /// `λ_{n+1}^-1 Σ_{k > n} 2^(k-n) w_k`.
    pub w_tail: SequenceCheck,
    /// `λ_{n+1}^-(2p+1) Σ_{k > n} 2^(k-n) w_k h_k^p` for `p = 1..=p_max`.
    pub w_power_tails: Vec<SequenceCheck>,
    /// `w_n <= 2^-6n` for each `n`.
    pub w_small: Vec<bool>,
}

impl ParamReport {
    pub fn lambda_sums_bounded(&self) -> bool {
        self.lambda_sums.iter().all(|s| s <= &self.lambda_sum_limit)
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        json!({
            "lambda_sums": {
                "partial_sums": self.lambda_sums.iter().map(|s| fmt.render(s)).collect::<Vec<_>>(),
                "limit": fmt.render(&self.lambda_sum_limit),
                "bounded": self.lambda_sums_bounded(),
            },
            "h_over_lambda": self.h_over_lambda.to_json(fmt),
            "four_n_h": self.four_n_h.to_json(fmt),
            "h_tail": self.h_tail.to_json(fmt),
            "w_tail": self.w_tail.to_json(fmt),
            "w_power_tails": self.w_power_tails.iter().map(|c| c.to_json(fmt)).collect::<Vec<_>>(),
            "w_small": self.w_small,
        })
    }
}

/// `Σ_{k > n} 2^(k-n) s_k` for a family `s`.
fn dyadic_tail(f: &Family, n: usize) -> Result<CertifiedValue> {
    let doubled = f.mul(&Family { coeff: int(1), ratio: int(2), quad: 0, lin: 0 });
    Ok(doubled.tail(n)?.scale(&pow2(-(n as i64))))
}

pub fn check_params(p: &CounterexampleParams, p_max: usize) -> Result<ParamReport> {
    p.validate()?;
    if p_max == 0 {
        return Err(Error::InvalidParams("p_max must be at least 1".into()));
    }
    let big_n = p.depth;
    let lam = p.lambda.family();
    let two_lam = lam.mul(&Family { coeff: int(1), ratio: int(2), quad: 0, lin: 0 });
    let lambda_sum_limit = two_lam.tail(0)?.upper();
    let mut lambda_sums = Vec::with_capacity(big_n);
    let mut acc = Rational::zero();
    for n in 1..=big_n {
        acc += two_lam.term(n);
        lambda_sums.push(acc.clone());
    }
    let exact = |f: &dyn Fn(usize) -> Rational| (1..=big_n).map(|n| CertifiedValue::exact(f(n))).collect();
    let h_over_lambda = SequenceCheck::new("h_n / lambda_n", exact(&|n| p.h_n(n) / p.lambda_n(n)), false);
    let four_n_h = SequenceCheck::new("4^n h_n", exact(&|n| pow2(2 * n as i64) * p.h_n(n)), true);

    let hf = p.h.family();
    let wf = p.w.family();
    let tail_check = |name: String, fam: &Family, lam_power: usize| -> Result<SequenceCheck> {
        let values = (1..=big_n)
            .map(|n| {
                let t = dyadic_tail(fam, n)?;
                Ok(t.scale(&powi(&p.lambda_n(n + 1), lam_power).recip()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SequenceCheck::new(name, values, false))
    };
    let h_tail = tail_check("lambda_{n+1}^-2 sum 2^(k-n) h_k^2".into(), &hf.pow(2), 2)?;
    let w_tail = tail_check("lambda_{n+1}^-1 sum 2^(k-n) w_k".into(), &wf, 1)?;
    let w_power_tails = (1..=p_max)
        .map(|q| {
            tail_check(
                format!("lambda_{{n+1}}^-{} sum 2^(k-n) w_k h_k^{q}", 2 * q + 1),
                &wf.mul(&hf.pow(q)),
                2 * q + 1,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let w_small = (1..=big_n).map(|n| p.w_n(n) <= pow2(-6 * n as i64)).collect();
    Ok(ParamReport {
        lambda_sums,
        lambda_sum_limit,
        h_over_lambda,
        four_n_h,
        h_tail,
        w_tail,
        w_power_tails,
        w_small,
    })
}

/// `Σ_{n <= N} 2^n w_n`.
pub fn weighted_radius_sum(p: &CounterexampleParams, depth: usize) -> Rational {
    (1..=depth).fold(Rational::zero(), |acc, n| acc + pow2(n as i64) * p.w_n(n))
}

/// One open interval chosen at generation `level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub level: usize,
    /// Position among the components of its generation, left to right.
    pub index: usize,
    pub center: Rational,
    pub lo: Rational,
    pub hi: Rational,
}

impl Component {
    /// Quarter points `p_1 < ... < p_5`.
    pub fn quarter_points(&self) -> [Rational; 5] {
        let q = (&self.hi - &self.lo) / int(4);
        [0, 1, 2, 3, 4].map(|i| &self.lo + &q * int(i))
    }
}

/// Generations `I_1, ..., I_N` with their components.
pub fn build_components(p: &CounterexampleParams) -> Result<Vec<Vec<Component>>> {
    p.validate()?;
    let mut levels: Vec<Vec<Component>> = Vec::with_capacity(p.depth);
    // Earlier components as sorted (lo, hi) pairs of open intervals.
    let mut taken: Vec<(Rational, Rational)> = Vec::new();
    for n in 1..=p.depth {
        let w = p.w_n(n);
        let denom = 1i64 << n;
        let candidates: Vec<i64> = (1..denom).collect();
        let chosen: Vec<Component> = candidates
            .par_iter()
            .filter_map(|&k| {
                let center = ratio(k, denom);
                let lo = &center - &w;
                let hi = &center + &w;
                let idx = taken.partition_point(|(_, h)| h <= &lo);
                let hits = idx < taken.len() && taken[idx].0 < hi;
                (!hits).then_some((center, lo, hi))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .enumerate()
            .map(|(index, (center, lo, hi))| Component { level: n, index, center, lo, hi })
            .collect();
        taken.extend(chosen.iter().map(|c| (c.lo.clone(), c.hi.clone())));
        taken.sort();
        levels.push(chosen);
    }
    Ok(levels)
}

/// `I_1, ..., I_N` as interval sets.
pub fn build_intervals(p: &CounterexampleParams) -> Result<Vec<IntervalSet>> {
    Ok(build_components(p)?.iter().map(|lvl| level_set(lvl)).collect())
}

fn level_set(components: &[Component]) -> IntervalSet {
    IntervalSet::from_intervals(
        components.iter().map(|c| Interval::open(c.lo.clone(), c.hi.clone())).collect(),
    )
}

/// The constructed curve together with its interval generations.
#[derive(Debug, Clone)]
pub struct CounterexampleCurve {
    pub params: CounterexampleParams,
    pub levels: Vec<Vec<Component>>,
    pub level_sets: Vec<IntervalSet>,
    /// `I_1 ∪ ... ∪ I_N`.
    pub union: IntervalSet,
    pub curve: PiecewiseCurve,
}

/// Builds `(f, g, h)` on `[0, 1]` with `h(0) = 0`.
pub fn build_curve(p: &CounterexampleParams) -> Result<CounterexampleCurve> {
    let levels = build_components(p)?;
    let level_sets: Vec<IntervalSet> = levels.iter().map(|l| level_set(l)).collect();
    let union = level_sets.iter().fold(IntervalSet::empty(), |acc, s| acc.union(s));
    let mut all: Vec<&Component> = levels.iter().flatten().collect();
    all.sort_by(|a, b| a.lo.cmp(&b.lo));

    let mut bps = vec![Rational::zero()];
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    let zero = Polynomial::zero();
    for c in all {
        let pts = c.quarter_points();
        let hn = p.h_n(c.level);
        if &pts[0] > bps.last().unwrap() {
            bps.push(pts[0].clone());
            fs.push(zero.clone());
            gs.push(zero.clone());
        }
        let line = |i: usize, y0: &Rational, y1: &Rational| {
            Polynomial::line_through(&pts[i], y0, &pts[i + 1], y1)
        };
        let z = Rational::zero();
        let f_pieces = [zero.clone(), line(1, &z, &hn), Polynomial::constant(hn.clone()), line(3, &hn, &z)];
        let g_pieces = [line(0, &z, &hn), Polynomial::constant(hn.clone()), line(2, &hn, &z), zero.clone()];
        for i in 0..4 {
            bps.push(pts[i + 1].clone());
            fs.push(f_pieces[i].clone());
            gs.push(g_pieces[i].clone());
        }
    }
    if bps.last().unwrap() < &Rational::one() {
        bps.push(Rational::one());
        fs.push(zero.clone());
        gs.push(zero);
    }
    let f = PiecewisePolynomial::new(bps.clone(), fs)?;
    let g = PiecewisePolynomial::new(bps, gs)?;
    let curve = lift(&f, &g, &Rational::zero())?;
    Ok(CounterexampleCurve { params: p.clone(), levels, level_sets, union, curve })
}

impl CounterexampleCurve {
    pub fn depth(&self) -> usize {
        self.params.depth
    }

    pub fn eval(&self, t: &Rational) -> Result<(Rational, Rational, Rational)> {
        if t.is_negative() || t > &Rational::one() {
            return Err(Error::OutOfDomain(to_pq(t)));
        }
        self.curve.eval(t)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.levels.iter().flatten()
    }

    fn level(&self, n: usize) -> Result<&[Component]> {
        if n == 0 || n > self.depth() {
            return Err(Error::LevelOutOfRange { n, depth: self.depth() });
        }
        Ok(&self.levels[n - 1])
    }

    /// `h(hi) - h(lo)` for every component, against the expected `4 h_n^2`.
    pub fn component_increments(&self) -> Result<Vec<ComponentIncrement>> {
        self.components()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|c| {
                let increment = self.curve.h.eval(&c.hi)? - self.curve.h.eval(&c.lo)?;
                let expected = int(4) * powi(&self.params.h_n(c.level), 2);
                Ok(ComponentIncrement { component: (*c).clone(), increment, expected })
            })
            .collect()
    }

    /// Total variation of `h`, from the exact slopes of its pieces.
    pub fn h_total_variation(&self) -> Rational {
        let bps = self.curve.h.breakpoints();
        self.curve
            .h
            .pieces()
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (i, p)| acc + (p.eval(&bps[i + 1]) - p.eval(&bps[i])).abs())
    }

    pub fn measure_report(&self) -> MeasureReport {
        let big_n = self.depth();
        let mut prefix = IntervalSet::empty();
        let mut a_sets = Vec::with_capacity(big_n);
        for n in 1..=big_n {
            prefix = prefix.union(&self.level_sets[n - 1]);
            let lambda = self.params.lambda_n(n);
            let a_n = prefix.dilate(&lambda).subtract(&self.union);
            let bound = int(2) * &lambda * (pow2(n as i64) - int(1));
            a_sets.push(NeighborhoodMeasure { n, measure: a_n.measure(), bound, set: a_n });
        }
        let counts = self.levels.iter().map(|l| l.len()).collect();
        MeasureReport {
            union_measure: self.union.measure(),
            weighted_sum: weighted_radius_sum(&self.params, big_n),
            bound: ratio(1, 31),
            component_counts: counts,
            levels_disjoint: levels_disjoint(&self.level_sets),
            neighborhoods: a_sets,
        }
    }

    /// A pair `x < y` in `E ∖ I` on opposite sides of a generation-`(n+1)` component
    /// with `y - x <= 2^-n`.
    pub fn good_pair_search(&self, e: &IntervalSet, n: usize) -> Result<Option<GoodPair>> {
        let comps = self.level(n + 1)?;
        let admissible = e.subtract(&self.union);
        let budget = pow2(-(n as i64));
        for c in comps {
            let left = admissible.intersect(&IntervalSet::closed(&Rational::zero(), &c.lo));
            let right = admissible.intersect(&IntervalSet::closed(&c.hi, &Rational::one()));
            let (Some(l), Some(r)) = (left.intervals().last(), right.intervals().first()) else {
                continue;
            };
            let gap = &r.lo - &l.hi;
            let needs_slack = !l.hi_closed || !r.lo_closed;
            if gap > budget || (needs_slack && gap == budget) {
                continue;
            }
            let slack = (&budget - &gap) / int(2);
            let x = if l.hi_closed { l.hi.clone() } else { &l.hi - min(&slack, &(l.length() / int(2))) };
            let y = if r.lo_closed { r.lo.clone() } else { &r.lo + min(&slack, &(r.length() / int(2))) };
            return Ok(Some(GoodPair { x, y, component: c.clone() }));
        }
        Ok(None)
    }

    /// Two-site jets around the leftmost generation-`(n+1)` component: `F = G = 0`
    /// with order 2, sites at `c ∓ 2^-(n+1)`, and `H^0` equal to `h` at the component's
    /// left and right ends respectively.
    pub fn straddle_jets(&self, n: usize) -> Result<(Component, JetTriple)> {
        let c = self
            .level(n + 1)?
            .first()
            .ok_or_else(|| Error::InvalidParams(format!("generation {} is empty", n + 1)))?
            .clone();
        let half = pow2(-(n as i64) - 1);
        let sites = [&c.center - &half, &c.center + &half];
        let h_lo = self.curve.h.eval(&c.lo)?;
        let h_hi = self.curve.h.eval(&c.hi)?;
        let zero = Jet::zero(&sites, 2)?;
        let h = Jet::new(
            2,
            sites.to_vec(),
            vec![vec![h_lo, int(0), int(0)], vec![h_hi, int(0), int(0)]],
        )?;
        Ok((c, JetTriple::new(zero.clone(), zero, h)?))
    }

    /// `A(x, y) / V(x, y)` on [`straddle_jets`](Self::straddle_jets).
    pub fn straddle_ratio(&self, n: usize) -> Result<StraddleReport> {
        let (component, jets) = self.straddle_jets(n)?;
        let (x, y) = (jets.sites()[0].clone(), jets.sites()[1].clone());
        let area = area_discrepancy(&jets, &x, &y)?;
        let vel = velocity(&jets, &x, &y)?;
        let ratio = CertifiedValue::exact(area.clone()).div(&vel)?;
        let scaled_height = pow2(2 * n as i64) * self.params.h_n(n + 1);
        Ok(StraddleReport { n, component, x, y, area, velocity: vel, ratio, scaled_height })
    }

    /// The same ratio with the sites at the component's own ends, where `h` is the
    /// curve's actual vertical component.
    pub fn straddle_ratio_on_curve(&self, n: usize) -> Result<CertifiedValue> {
        let c = self.level(n + 1)?.first().cloned().ok_or(Error::EmptySet)?;
        let sites = [c.lo.clone(), c.hi.clone()];
        let zero = Jet::zero(&sites, 2)?;
        let h = Jet::new(
            2,
            sites.to_vec(),
            vec![
                vec![self.curve.h.eval(&c.lo)?, int(0), int(0)],
                vec![self.curve.h.eval(&c.hi)?, int(0), int(0)],
            ],
        )?;
        let jets = JetTriple::new(zero.clone(), zero, h)?;
        CertifiedValue::exact(area_discrepancy(&jets, &c.lo, &c.hi)?).div(&velocity(&jets, &c.lo, &c.hi)?)
    }

    /// Every exact check on the construction.
    pub fn verify(&self, p_max: usize) -> Result<VerifyReport> {
        let params = check_params(&self.params, p_max)?;
        let increments = self.component_increments()?;
        let measures = self.measure_report();
        let straddles = (1..self.depth())
            .map(|n| self.straddle_ratio(n))
            .collect::<Result<Vec<_>>>()?;
        let full = IntervalSet::unit();
        let pairs = (1..self.depth())
            .map(|n| Ok((n, self.good_pair_search(&full, n)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(VerifyReport { params, increments, measures, straddles, pairs })
    }
}

fn levels_disjoint(sets: &[IntervalSet]) -> bool {
    let mut acc = IntervalSet::empty();
    for s in sets {
        if !acc.intersect(s).is_empty() {
            return false;
        }
        acc = acc.union(s);
    }
    true
}

/// `2/3 + 4/31`, the measure budget that rules out a missing good pair, and whether it
/// stays below `4/5`.
pub fn good_pair_budget() -> (Rational, bool) {
    let total = ratio(2, 3) + ratio(4, 31);
    let ok = total <= ratio(4, 5);
    (total, ok)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentIncrement {
    pub component: Component,
    pub increment: Rational,
    pub expected: Rational,
}

impl ComponentIncrement {
    pub fn matches(&self) -> bool {
        self.increment == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodMeasure {
    pub n: usize,
    /// `A_n = { x in [0, 1] ∖ I : d(x, I_1 ∪ ... ∪ I_n) < λ_n }`.
    pub set: IntervalSet,
    pub measure: Rational,
    /// `2 λ_n (2^n - 1)`.
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureReport {
    pub union_measure: Rational,
    /// `Σ_{n <= N} 2^n w_n`.
    pub weighted_sum: Rational,
    /// `1/31`.
    pub bound: Rational,
    pub component_counts: Vec<usize>,
    pub levels_disjoint: bool,
    pub neighborhoods: Vec<NeighborhoodMeasure>,
}

impl MeasureReport {
    pub fn passes(&self) -> bool {
        self.weighted_sum <= self.bound
            && self.union_measure <= self.weighted_sum
            && self.levels_disjoint
            && self.component_counts.iter().enumerate().all(|(i, c)| *c <= 1usize << i)
            && self.neighborhoods.iter().all(|a| a.measure <= a.bound)
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        json!({
            "union_measure": fmt.render(&self.union_measure),
            "weighted_radius_sum": fmt.render(&self.weighted_sum),
            "bound": fmt.render(&self.bound),
            "component_counts": self.component_counts,
            "levels_disjoint": self.levels_disjoint,
            "neighborhoods": self.neighborhoods.iter().map(|a| json!({
                "n": a.n,
                "measure": fmt.render(&a.measure),
                "bound": fmt.render(&a.bound),
                "components": a.set.len(),
            })).collect::<Vec<_>>(),
            "pass": self.passes(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodPair {
    pub x: Rational,
    pub y: Rational,
    pub component: Component,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StraddleReport {
    pub n: usize,
    pub component: Component,
    pub x: Rational,
    pub y: Rational,
    pub area: Rational,
    pub velocity: CertifiedValue,
    pub ratio: CertifiedValue,
    /// `4^n h_{n+1}`.
    pub scaled_height: Rational,
}

impl StraddleReport {
    pub fn exceeds_two(&self) -> bool {
        self.scaled_height >= int(2)
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        json!({
            "n": self.n,
            "component_center": fmt.render(&self.component.center),
            "x": fmt.render(&self.x),
            "y": fmt.render(&self.y),
            "area_discrepancy": fmt.render(&self.area),
            "velocity": self.velocity.render(fmt),
            "ratio": self.ratio.render(fmt),
            "scaled_height": fmt.render(&self.scaled_height),
            "exceeds_two": self.exceeds_two(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub params: ParamReport,
    pub increments: Vec<ComponentIncrement>,
    pub measures: MeasureReport,
    pub straddles: Vec<StraddleReport>,
    pub pairs: Vec<(usize, Option<GoodPair>)>,
}

impl VerifyReport {
    pub fn increments_pass(&self) -> bool {
        self.increments.iter().all(ComponentIncrement::matches)
    }

    /// Straddle ratios equal `4 (4^n h_{n+1})^2`.
    pub fn straddles_pass(&self) -> bool {
        self.straddles
            .iter()
            .all(|s| s.ratio.is_exact() && s.ratio.value == int(4) * powi(&s.scaled_height, 2))
    }

    pub fn pairs_pass(&self) -> bool {
        self.pairs.iter().all(|(_, p)| p.is_some())
    }

    pub fn passes(&self) -> bool {
        self.increments_pass()
            && self.measures.passes()
            && self.straddles_pass()
            && self.pairs_pass()
            && self.params.lambda_sums_bounded()
            && self.params.w_small.iter().all(|b| *b)
            && good_pair_budget().1
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        let (budget, budget_ok) = good_pair_budget();
        json!({
            "parameters": self.params.to_json(fmt),
            "component_increments": {
                "components": self.increments.iter().map(|c| json!({
                    "level": c.component.level,
                    "index": c.component.index,
                    "center": fmt.render(&c.component.center),
                    "increment": fmt.render(&c.increment),
                    "expected": fmt.render(&c.expected),
                    "match": c.matches(),
                })).collect::<Vec<_>>(),
                "pass": self.increments_pass(),
            },
            "measures": self.measures.to_json(fmt),
            "straddle": {
                "levels": self.straddles.iter().map(|s| s.to_json(fmt)).collect::<Vec<_>>(),
                "pass": self.straddles_pass(),
            },
            "good_pairs": {
                "levels": self.pairs.iter().map(|(n, p)| match p {
                    Some(p) => json!({"n": n, "x": fmt.render(&p.x), "y": fmt.render(&p.y),
                        "component_center": fmt.render(&p.component.center)}),
                    None => json!({"n": n, "exhausted": true}),
                }).collect::<Vec<_>>(),
                "budget": fmt.render(&budget),
                "budget_below_four_fifths": budget_ok,
                "pass": self.pairs_pass(),
            },
            "pass": self.passes(),
        })
    }
}
