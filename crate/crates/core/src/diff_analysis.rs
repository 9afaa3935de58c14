//! Finite-scale estimators for L^p and approximate differentiability, and a
//! grid sieve for the compact sets on which a jet of candidate derivatives is
//! a Whitney field.

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_poly::norms::{abs_integral, measure_where_nonpositive};
use crate::exact_poly::rational::{
    default_tolerance, factorial, int, max, min, powi, to_f64, to_pq, CertifiedValue,
    NumberFormat, Rational,
};
use crate::exact_poly::{PiecewisePolynomial, Polynomial};
use crate::interval_sets::{Interval, IntervalSet};

/// A function on a closed interval, either exactly piecewise polynomial or
/// given by samples on a uniform grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampledFunction {
    Exact(PiecewisePolynomial),
    /// Samples at `start + i * step`, interpolated linearly.
    Grid { start: Rational, step: Rational, values: Vec<Rational> },
}

impl SampledFunction {
    pub fn grid(start: Rational, step: Rational, values: Vec<Rational>) -> Result<Self> {
        if !step.is_positive() {
            return Err(Error::InvalidParams("grid step must be positive".into()));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParams("a grid needs at least two samples".into()));
        }
        Ok(SampledFunction::Grid { start, step, values })
    }

    /// Builds a grid from `(t, value)` rows, checking that the nodes are uniform.
    pub fn from_samples(rows: &[(Rational, Rational)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidParams("a grid needs at least two samples".into()));
        }
        let step = &rows[1].0 - &rows[0].0;
        for (i, w) in rows.windows(2).enumerate() {
            if &w[1].0 - &w[0].0 != step {
                return Err(Error::InvalidParams(format!("grid is not uniform at row {}", i + 1)));
            }
        }
        Self::grid(rows[0].0.clone(), step, rows.iter().map(|r| r.1.clone()).collect())
    }

    /// The piecewise polynomial this function stands for.
    pub fn to_piecewise(&self) -> Result<PiecewisePolynomial> {
        match self {
            SampledFunction::Exact(u) => Ok(u.clone()),
            SampledFunction::Grid { start, step, values } => {
                let nodes: Vec<Rational> =
                    (0..values.len()).map(|i| start + step * int(i as i64)).collect();
                let pieces = (0..values.len() - 1)
                    .map(|i| Polynomial::line_through(&nodes[i], &values[i], &nodes[i + 1], &values[i + 1]))
                    .collect();
                PiecewisePolynomial::new(nodes, pieces)
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SampledFunction::Exact(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderEntry {
    pub rho: Rational,
    /// `(⨍_{B(x,ρ)} |u - P|^p) / ρ^{mp}`, the p-th power of the normalized remainder.
    pub power: CertifiedValue,
    /// `power^{1/p}`.
    pub value: f64,
    pub density: Option<CertifiedValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub x: Rational,
    pub m: usize,
    pub p: u32,
    pub exact_input: bool,
    /// Entries in strictly decreasing order of `ρ`.
    pub entries: Vec<LadderEntry>,
}

impl LadderReport {
    /// Strict decrease of the normalized remainder along the ladder, decided on
    /// certified enclosures of the p-th powers.
    pub fn strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].power.upper() < w[0].power.lower())
    }

    /// `last value * factor <= first value`.
    pub fn decays_by(&self, factor: &Rational) -> bool {
        match (self.entries.first(), self.entries.last()) {
            (Some(first), Some(last)) => {
                last.power.upper() * powi(factor, self.p as usize) <= first.power.lower()
            }
            _ => false,
        }
    }

    pub fn to_csv(&self, fmt: &NumberFormat) -> String {
        let mut out = String::from("rho,value,power\n");
        for e in &self.entries {
            let value = if self.p == 1 {
                e.power.render(fmt)
            } else {
                format!("{:.17e}", e.value)
            };
            out.push_str(&format!("{},{},{}\n", fmt.render(&e.rho), value, e.power.render(fmt)));
        }
        out
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                let mut obj = json!({
                    "rho": fmt.render(&e.rho),
                    "value": e.value,
                    "power": e.power.render(fmt),
                });
                if !e.power.is_exact() {
                    obj["error_bound"] = json!(fmt.render(&e.power.error));
                }
                if let Some(d) = &e.density {
                    obj["density"] = json!(d.render(fmt));
                }
                obj
            })
            .collect();
        json!({
            "x": fmt.render(&self.x),
            "m": self.m,
            "p": self.p,
            "strictly_decreasing": self.strictly_decreasing(),
            "entries": entries,
        })
    }
}

fn sorted_ladder(ladder: &[Rational]) -> Result<Vec<Rational>> {
    let mut scales: Vec<Rational> = ladder.to_vec();
    if scales.is_empty() {
        return Err(Error::InvalidParams("empty scale ladder".into()));
    }
    if scales.iter().any(|r| !r.is_positive()) {
        return Err(Error::InvalidParams("scales must be positive".into()));
    }
    scales.sort_by(|a, b| b.cmp(a));
    scales.dedup();
    Ok(scales)
}

fn p_root(power: &CertifiedValue, p: u32) -> f64 {
    let v = power.to_f64().max(0.0);
    if p == 1 {
        v
    } else {
        v.powf(1.0 / p as f64)
    }
}

/// `∫_{x-ρ}^{x+ρ} |u - P|^p`.
fn remainder_power_integral(
    u: &PiecewisePolynomial,
    poly: &Polynomial,
    x: &Rational,
    rho: &Rational,
    p: u32,
) -> Result<CertifiedValue> {
    let mut total = CertifiedValue::exact(Rational::zero());
    for (lo, hi, piece) in u.clipped(&(x - rho), &(x + rho))? {
        let d = piece - poly;
        if d.is_zero() {
            continue;
        }
        let dp = (1..p).fold(d.clone(), |acc, _| &acc * &d);
        let part = if p.is_multiple_of(2) {
            CertifiedValue::exact(dp.integral(&lo, &hi))
        } else {
            abs_integral(&dp, &lo, &hi)?
        };
        total = total.add(&part);
    }
    Ok(total)
}

/// `[⨍_{B(x,ρ)} |u - P|^p]^{1/p} / ρ^m` along a ladder of scales.
pub fn lp_remainder_ladder(
    u: &SampledFunction,
    poly: &Polynomial,
    x: &Rational,
    m: usize,
    p: u32,
    ladder: &[Rational],
) -> Result<LadderReport> {
    if p == 0 {
        return Err(Error::InvalidParams("exponent p must be at least 1".into()));
    }
    let scales = sorted_ladder(ladder)?;
    let pw = u.to_piecewise()?;
    let largest = &scales[0];
    if &(x - largest) < pw.start() || &(x + largest) > pw.end() {
        return Err(Error::ScaleOutOfDomain { x: to_pq(x), rho: to_pq(largest) });
    }
    let entries = scales
        .par_iter()
        .map(|rho| {
            let integral = remainder_power_integral(&pw, poly, x, rho, p)?;
            let norm = int(2) * rho * powi(rho, m * p as usize);
            let power = integral.scale(&(Rational::one() / norm));
            Ok(LadderEntry { rho: rho.clone(), value: p_root(&power, p), power, density: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LadderReport { x: x.clone(), m, p, exact_input: u.is_exact(), entries })
}

/// Fills the density column of a ladder with `approx_density` at radius `ρ`.
pub fn attach_density(
    report: &mut LadderReport,
    u: &SampledFunction,
    poly: &Polynomial,
    eps: &Rational,
) -> Result<()> {
    let x = report.x.clone();
    let m = report.m;
    for e in report.entries.iter_mut() {
        e.density = Some(approx_density(u, poly, &x, m, eps, &e.rho)?);
    }
    Ok(())
}

/// Fraction of `B(x, R) ∩ dom u` on which `|u(y) - P(y)| <= ε |y - x|^m`.
pub fn approx_density(
    u: &SampledFunction,
    poly: &Polynomial,
    x: &Rational,
    m: usize,
    eps: &Rational,
    radius: &Rational,
) -> Result<CertifiedValue> {
    if !eps.is_positive() || !radius.is_positive() {
        return Err(Error::InvalidParams("ε and R must be positive".into()));
    }
    let pw = u.to_piecewise()?;
    let lo = max(&(x - radius), pw.start());
    let hi = min(&(x + radius), pw.end());
    if lo >= hi {
        return Err(Error::OutOfDomain(to_pq(x)));
    }
    let tol = default_tolerance();
    let right = Polynomial::shifted_power(x, m, eps.clone());
    let sign = if m.is_multiple_of(2) { int(1) } else { int(-1) };
    let left = right.scale(&sign);
    let mut good = CertifiedValue::exact(Rational::zero());
    for (a, b, piece) in pw.clipped(&lo, &hi)? {
        let d = piece - poly;
        let neg_d = -&d;
        let halves = [(a.clone(), min(&b, x), &left), (max(&a, x), b.clone(), &right)];
        for (s, t, bound) in halves {
            if s >= t {
                continue;
            }
            let polys = [&d - bound, &neg_d - bound];
            good = good.add(&measure_where_nonpositive(&polys, &s, &t, &tol)?);
        }
    }
    good.div(&CertifiedValue::exact(hi - lo))
}

/// Knobs for `whitney_sieve`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveOptions {
    /// Number of uniform cells on `[0, 1]`; a power of two.
    pub grid: usize,
    /// Stages `n = 1..=n_max` of the schedule `(ε / 2^n, 1 / n)`.
    pub n_max: usize,
    /// Scales at which the Whitney modulus of the retained jet is reported.
    pub ladder: Vec<Rational>,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            grid: 1 << 14,
            n_max: 6,
            ladder: (4..=12).map(crate::exact_poly::rational::pow2).map(|r| Rational::one() / r).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveStage {
    pub n: usize,
    pub delta: Rational,
    pub budget: Rational,
    /// `1 / N`: every radius up to this one is tested.
    pub radius_cap: Rational,
    /// Measure of the grid cells whose centers fail some tested radius.
    pub excluded: Rational,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusPoint {
    pub delta: Rational,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveReport {
    pub grid: usize,
    pub m: usize,
    pub eps: Rational,
    pub stages: Vec<SieveStage>,
    /// Cell centers `(i + 1/2) / grid` that survive every stage.
    pub retained_points: Vec<Rational>,
    /// Union of the closed cells around the retained centers.
    pub retained: IntervalSet,
    pub modulus: Vec<ModulusPoint>,
}

impl SieveReport {
    pub fn modulus_at(&self, delta: &Rational) -> Option<f64> {
        self.modulus.iter().find(|q| &q.delta == delta).map(|q| q.value)
    }

    pub fn modulus_json(&self, fmt: &NumberFormat) -> Value {
        let profile: Vec<Value> = self
            .modulus
            .iter()
            .map(|q| json!({"delta": fmt.render(&q.delta), "value": q.value}))
            .collect();
        json!({
            "m": self.m,
            "sites": self.retained_points.len(),
            "profile": profile,
        })
    }

    pub fn to_json(&self, fmt: &NumberFormat) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                json!({
                    "n": s.n,
                    "delta": fmt.render(&s.delta),
                    "budget": fmt.render(&s.budget),
                    "radius_cap": fmt.render(&s.radius_cap),
                    "excluded": fmt.render(&s.excluded),
                    "within_budget": s.within_budget,
                })
            })
            .collect();
        json!({
            "grid": self.grid,
            "m": self.m,
            "eps": fmt.render(&self.eps),
            "stages": stages,
            "retained_measure": fmt.render(&self.retained.measure()),
            "retained": serde_json::to_value(&self.retained).unwrap_or(Value::Null),
            "modulus": self.modulus_json(fmt),
        })
    }
}

/// One piece of `u` in the local variable `s ∈ [0, 1]`, `y = lo + s w`.
struct LocalPiece {
    lo: f64,
    hi: f64,
    width: f64,
    coeffs: Vec<f64>,
    bound: f64,
}

/// Pieces grouped by the dyadic size of their sup bound, so that pieces too small
/// to matter far from `x` are never visited when the Taylor polynomial at `x` is zero.
struct PieceIndex {
    pieces: Vec<LocalPiece>,
    buckets: Vec<(f64, Vec<usize>)>,
}

impl PieceIndex {
    fn new(u: &PiecewisePolynomial) -> Self {
        let bps = u.breakpoints();
        let pieces: Vec<LocalPiece> = u
            .pieces()
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let w = &bps[i + 1] - &bps[i];
                let coeffs: Vec<f64> =
                    p.compose_affine(&bps[i], &w).coeffs().iter().map(to_f64).collect();
                let bound = coeffs.iter().map(|c| c.abs()).sum();
                LocalPiece { lo: to_f64(&bps[i]), hi: to_f64(&bps[i + 1]), width: to_f64(&w), coeffs, bound }
            })
            .collect();
        let mut buckets: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut slot = std::collections::BTreeMap::new();
        for (i, piece) in pieces.iter().enumerate() {
            if piece.bound == 0.0 {
                continue;
            }
            let key = piece.bound.log2().floor() as i32;
            let b = *slot.entry(key).or_insert_with(|| {
                buckets.push((0.0, Vec::new()));
                buckets.len() - 1
            });
            buckets[b].0 = buckets[b].0.max(piece.bound);
            buckets[b].1.push(i);
        }
        PieceIndex { pieces, buckets }
    }

    /// Indices of the pieces that can meet `W(x, r)` for some `r <= reach` and `δ >= delta`.
    fn candidates(&self, x: f64, taylor: &[f64], m: usize, delta: f64, reach: f64) -> Vec<usize> {
        if taylor.iter().any(|a| *a != 0.0) {
            return (0..self.pieces.len()).collect();
        }
        let mut out = Vec::new();
        for (bound, members) in &self.buckets {
            let r = reach.min((bound / delta).powf(1.0 / m.max(1) as f64) * (1.0 + 1e-9));
            let first = members.partition_point(|&i| self.pieces[i].hi < x - r);
            out.extend(members[first..].iter().take_while(|&&i| self.pieces[i].lo <= x + r));
        }
        out
    }
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_axpy(a: &[f64], k: f64, b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + k * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Real roots of `c` in the open interval `(a, b)`, in increasing order.
fn roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut deg = c.len();
    while deg > 0 && c[deg - 1] == 0.0 {
        deg -= 1;
    }
    let c = &c[..deg];
    if deg <= 1 {
        return Vec::new();
    }
    if deg == 2 {
        let r = -c[0] / c[1];
        return if r > a && r < b { vec![r] } else { Vec::new() };
    }
    if deg == 3 {
        return quadratic_roots(c[0], c[1], c[2]).into_iter().flatten().filter(|r| *r > a && *r < b).collect();
    }
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut knots = vec![a];
    knots.extend(roots_in(&deriv, a, b));
    knots.push(b);
    let mut out = Vec::new();
    for (i, w) in knots.windows(2).enumerate() {
        let (mut l, mut r) = (w[0], w[1]);
        let (mut fl, fr) = (poly_eval(c, l), poly_eval(c, r));
        if fl == 0.0 && i > 0 {
            out.push(l);
            continue;
        }
        if fl * fr >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            let fm = poly_eval(c, mid);
            if (fm < 0.0) == (fl < 0.0) {
                l = mid;
                fl = fm;
            } else {
                r = mid;
            }
        }
        out.push(0.5 * (l + r));
    }
    out
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> [Option<f64>; 2] {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return [None, None];
    }
    let sgn = if c1 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c1 + sgn * disc.sqrt());
    let r1 = q / c2;
    let r2 = if q != 0.0 { c0 / q } else { r1 };
    if r1 <= r2 {
        [Some(r1), Some(r2)]
    } else {
        [Some(r2), Some(r1)]
    }
}

/// Subintervals of `[a, b]` on which `c > 0`.
fn positive_parts(c: &[f64], a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let mut knots = vec![a];
    knots.extend(roots_in(c, a, b));
    knots.push(b);
    for w in knots.windows(2) {
        if w[1] > w[0] && poly_eval(c, 0.5 * (w[0] + w[1])) > 0.0 {
            out.push((w[0], w[1]));
        }
    }
}

fn piece_is_live(piece: &LocalPiece, x: f64, taylor: &[f64], m: usize, delta: f64, reach: f64) -> bool {
    let dist = (piece.lo - x).max(x - piece.hi).max(0.0);
    if dist > reach || piece.width <= 0.0 {
        return false;
    }
    let far = (piece.lo - x).abs().max((piece.hi - x).abs());
    let p_bound: f64 = taylor.iter().enumerate().map(|(k, a)| a.abs() * far.powi(k as i32)).sum();
    piece.bound + p_bound > delta * dist.powi(m as i32) * (1.0 - 1e-9)
}

/// The part of `W(x, ·) = {y : |u(y) - P(y)| > δ |y - x|^m}` inside one piece, as
/// intervals in `z = y - x`.
fn bad_parts(piece: &LocalPiece, x: f64, taylor: &[f64], m: usize, delta: f64, out: &mut Vec<(f64, f64)>) {
    let d = piece.lo - x;
    let w = piece.width;
    // y - x = d + w s
    let lin = [d, w];
    let mut power = vec![1.0];
    let mut p_local = vec![0.0];
    for (k, a) in taylor.iter().enumerate() {
        if k > 0 {
            power = poly_mul(&power, &lin);
        }
        p_local = poly_axpy(&p_local, *a, &power);
    }
    let lin_m = (0..m).fold(vec![1.0], |acc, _| poly_mul(&acc, &lin));
    let q = poly_axpy(&piece.coeffs, -1.0, &p_local);
    let neg_q: Vec<f64> = q.iter().map(|v| -v).collect();
    let split = (-d / w).clamp(0.0, 1.0);
    let mut parts = Vec::new();
    for (s0, s1, side) in [(0.0, split, -1.0f64), (split, 1.0, 1.0)] {
        if s1 <= s0 {
            continue;
        }
        // |y - x|^m = side^m (y - x)^m on this half.
        let t = delta * side.powi(m as i32);
        positive_parts(&poly_axpy(&q, -t, &lin_m), s0, s1, &mut parts);
        positive_parts(&poly_axpy(&neg_q, -t, &lin_m), s0, s1, &mut parts);
    }
    out.extend(parts.into_iter().map(|(s0, s1)| (d + w * s0, d + w * s1)));
}

fn mass_within(set: &[(f64, f64)], r: f64) -> f64 {
    set.iter().map(|&(lo, hi)| (hi.min(r) - lo.max(-r)).max(0.0)).sum()
}

/// Largest `j <= levels` such that the radius `2^{-j}` fails `L¹(W(x, r)) <= r / 4`.
///
/// The pieces themselves bound `W` from outside; the exact set is only computed
/// when that bound is not enough.
fn finest_failure(
    index: &PieceIndex,
    near: &[usize],
    x: f64,
    taylor: &[f64],
    m: usize,
    delta: f64,
    levels: u32,
) -> Option<u32> {
    let live: Vec<&LocalPiece> = near
        .iter()
        .map(|&i| &index.pieces[i])
        .filter(|p| piece_is_live(p, x, taylor, m, delta, 1.0))
        .collect();
    let hull: Vec<(f64, f64)> = live.iter().map(|p| (p.lo - x, p.lo - x + p.width)).collect();
    let mut exact: Option<Vec<(f64, f64)>> = None;
    (0..=levels).rev().find(|&j| {
        let r = (-(j as f64)).exp2();
        if mass_within(&hull, r) <= r / 4.0 {
            return false;
        }
        let bad = exact.get_or_insert_with(|| {
            let mut out = Vec::new();
            for p in &live {
                bad_parts(p, x, taylor, m, delta, &mut out);
            }
            out
        });
        mass_within(bad, r) > r / 4.0
    })
}

/// Grid approximation of a compact set on which the jet `(u_0, …, u_m)` is a
/// Whitney field, together with the modulus of the jet restricted to it.
///
/// Stage `n` uses `δ = 1/n` and keeps `B_N = {x : L¹(W(x, r)) <= r/4 for all dyadic
/// r <= 1/N}` for the smallest dyadic `N` whose excluded measure fits in `ε / 2^{n+1}`.
pub fn whitney_sieve(
    derivs: &[SampledFunction],
    m: usize,
    eps: &Rational,
    opts: &SieveOptions,
) -> Result<SieveReport> {
    if derivs.len() < m + 1 {
        return Err(Error::MissingDerivatives(format!(
            "order {} needs {} functions, got {}",
            m,
            m + 1,
            derivs.len()
        )));
    }
    if !eps.is_positive() {
        return Err(Error::InvalidParams("ε must be positive".into()));
    }
    if opts.grid < 2 || !opts.grid.is_power_of_two() || opts.n_max == 0 {
        return Err(Error::InvalidParams("grid must be a power of two and n_max positive".into()));
    }
    let fields: Vec<PiecewisePolynomial> =
        derivs[..=m].iter().map(SampledFunction::to_piecewise).collect::<Result<_>>()?;
    for u in &fields {
        if !u.start().is_zero() || !u.end().is_one() {
            return Err(Error::InvalidParams("sieve inputs must live on [0, 1]".into()));
        }
    }
    let g = opts.grid;
    let levels = g.trailing_zeros();
    let index = PieceIndex::new(&fields[0]);
    let grid_den = int(2 * g as i64);
    let centers: Vec<Rational> = (0..g).map(|i| int(2 * i as i64 + 1) / &grid_den).collect();
    let inv_fact: Vec<f64> = (0..=m).map(|k| 1.0 / to_f64(&factorial(k))).collect();

    // Per center: the jet values and, per stage, the finest failing radius.
    let per_point: Vec<(Vec<f64>, Vec<Option<u32>>)> = centers
        .par_iter()
        .map(|c| -> Result<_> {
            let jet: Vec<f64> = fields.iter().map(|u| u.eval(c).map(|v| to_f64(&v))).collect::<Result<_>>()?;
            let taylor: Vec<f64> = jet.iter().zip(&inv_fact).map(|(v, f)| v * f).collect();
            let x = to_f64(c);
            let near = index.candidates(x, &taylor, m, 1.0 / opts.n_max as f64, 1.0);
            let fails = (1..=opts.n_max)
                .map(|n| finest_failure(&index, &near, x, &taylor, m, 1.0 / n as f64, levels))
                .collect();
            Ok((jet, fails))
        })
        .collect::<Result<_>>()?;

    let cell = Rational::one() / int(g as i64);
    let mut keep = vec![true; g];
    let mut stages = Vec::with_capacity(opts.n_max);
    for n in 1..=opts.n_max {
        let budget = eps / crate::exact_poly::rational::pow2(n as i64 + 1);
        // excluded[i] = #{x : x fails some radius 2^{-j} with j >= i}
        let mut counts = vec![0usize; levels as usize + 2];
        for (_, fails) in &per_point {
            if let Some(j) = fails[n - 1] {
                counts[j as usize] += 1;
            }
        }
        for i in (0..=levels as usize).rev() {
            counts[i] += counts[i + 1];
        }
        let fits = |i: usize| &cell * int(counts[i] as i64) <= budget;
        let chosen = (0..=levels as usize).find(|&i| fits(i)).unwrap_or(levels as usize);
        for (k, (_, fails)) in per_point.iter().enumerate() {
            if matches!(fails[n - 1], Some(j) if j as usize >= chosen) {
                keep[k] = false;
            }
        }
        stages.push(SieveStage {
            n,
            delta: Rational::one() / int(n as i64),
            radius_cap: Rational::one() / crate::exact_poly::rational::pow2(chosen as i64),
            excluded: &cell * int(counts[chosen] as i64),
            within_budget: fits(chosen),
            budget,
        });
    }

    let mut runs = Vec::new();
    let mut start = None;
    for (i, kept) in keep.iter().copied().chain([false]).enumerate() {
        match (kept, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(Interval::closed(&cell * int(s as i64), &cell * int(i as i64)));
                start = None;
            }
            _ => {}
        }
    }
    let retained = IntervalSet::from_intervals(runs);
    let kept_idx: Vec<usize> = (0..g).filter(|&i| keep[i]).collect();
    let xs: Vec<f64> = kept_idx.iter().map(|&i| (i as f64 + 0.5) / g as f64).collect();
    let jets: Vec<&[f64]> = kept_idx.iter().map(|&i| per_point[i].0.as_slice()).collect();
    let modulus = grid_modulus(&xs, &jets, m, &opts.ladder)?;

    Ok(SieveReport {
        grid: g,
        m,
        eps: eps.clone(),
        stages,
        retained_points: kept_idx.iter().map(|&i| centers[i].clone()).collect(),
        retained,
        modulus,
    })
}

/// Whitney modulus of a floating-point jet over sorted sites, at every scale of a ladder.
fn grid_modulus(xs: &[f64], jets: &[&[f64]], m: usize, ladder: &[Rational]) -> Result<Vec<ModulusPoint>> {
    let mut scales = sorted_ladder(ladder)?;
    scales.reverse();
    let deltas: Vec<f64> = scales.iter().map(to_f64).collect();
    let widest = *deltas.last().unwrap();
    let inv_fact: Vec<f64> = (0..=m).map(|k| 1.0 / to_f64(&factorial(k))).collect();
    let buckets = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0f64; deltas.len()];
            for j in (i + 1)..xs.len() {
                let h = xs[j] - xs[i];
                if h > widest * (1.0 + 1e-12) {
                    break;
                }
                let bucket = deltas.iter().position(|d| *d * (1.0 + 1e-12) >= h).unwrap();
                let mut worst = 0.0f64;
                for (a, b, step) in [(i, j, h), (j, i, -h)] {
                    for k in 0..=m {
                        let taylor: f64 = (0..=m - k)
                            .map(|l| jets[a][k + l] * step.powi(l as i32) * inv_fact[l])
                            .sum();
                        let r = (jets[b][k] - taylor).abs() / h.powi((m - k) as i32);
                        worst = worst.max(r);
                    }
                }
                acc[bucket] = acc[bucket].max(worst);
            }
            acc
        })
        .reduce(
            || vec![0.0; deltas.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        );
    let mut running = 0.0f64;
    let mut out: Vec<ModulusPoint> = scales
        .iter()
        .zip(&buckets)
        .map(|(d, b)| {
            running = running.max(*b);
            ModulusPoint { delta: d.clone(), value: running }
        })
        .collect();
    out.reverse();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::rational::{pow2, ratio};

    fn cubic() -> Vec<SampledFunction> {
        [vec![0, 0, 0, 1], vec![0, 0, 3], vec![0, 6]]
            .iter()
            .map(|c| {
                SampledFunction::Exact(
                    PiecewisePolynomial::single(Polynomial::from_ints(c), int(0), int(1)).unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn cubic_ladder_is_linear_in_rho() {
        let u = SampledFunction::Exact(
            PiecewisePolynomial::single(Polynomial::from_ints(&[0, 0, 0, 1]), int(-1), int(1)).unwrap(),
        );
        let ladder: Vec<Rational> = (1..=4).map(|j| ratio(1, 1 << j)).collect();
        let rep = lp_remainder_ladder(&u, &Polynomial::zero(), &int(0), 2, 1, &ladder).unwrap();
        for e in &rep.entries {
            assert_eq!(e.power, CertifiedValue::exact(&e.rho / int(4)));
        }
        assert!(rep.strictly_decreasing());
        assert!(rep.decays_by(&int(8)));
        let err = lp_remainder_ladder(&u, &Polynomial::zero(), &ratio(1, 2), 2, 1, &[int(1)]);
        assert!(matches!(err, Err(Error::ScaleOutOfDomain { .. })));
    }

    #[test]
    fn grid_input_interpolates() {
        let rows: Vec<(Rational, Rational)> =
            (0..=4).map(|i| (ratio(i, 4), ratio((i - 2).abs(), 4))).collect();
        let u = SampledFunction::from_samples(&rows).unwrap();
        let rep = lp_remainder_ladder(&u, &Polynomial::zero(), &ratio(1, 2), 1, 1, &[ratio(1, 4)]).unwrap();
        // ⨍ |y - 1/2| over radius 1/4 is 1/8, divided by ρ.
        assert_eq!(rep.entries[0].power.value, ratio(1, 2));
        assert!(SampledFunction::from_samples(&[(int(0), int(0)), (int(1), int(0)), (int(3), int(0))]).is_err());
    }

    #[test]
    fn density_bounds() {
        let u = &cubic()[0];
        let taylor = Polynomial::from_ints(&[0, 0, 0, 1]);
        let d = approx_density(u, &taylor, &ratio(1, 2), 2, &ratio(1, 100), &ratio(1, 4)).unwrap();
        assert_eq!(d.value, int(1));
        // |y^3| <= ε y^2 exactly on |y| <= ε (inside the domain [0, 1]).
        let d = approx_density(u, &Polynomial::zero(), &int(0), 2, &ratio(1, 4), &ratio(1, 2)).unwrap();
        assert_eq!(d.value, ratio(1, 2));
    }

    #[test]
    fn float_roots() {
        let c = [2.0, -3.0, 1.0]; // (s - 1)(s - 2)
        let r = roots_in(&c, 0.0, 3.0);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
        let mut parts = Vec::new();
        positive_parts(&c, 0.0, 3.0, &mut parts);
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn sieve_keeps_polynomials_whole() {
        let opts = SieveOptions { grid: 256, n_max: 3, ladder: vec![pow2(-4), pow2(-6)] };
        let quad: Vec<SampledFunction> = [vec![1, 2, 3], vec![2, 6], vec![6]]
            .iter()
            .map(|c| {
                SampledFunction::Exact(
                    PiecewisePolynomial::single(Polynomial::from_ints(c), int(0), int(1)).unwrap(),
                )
            })
            .collect();
        let rep = whitney_sieve(&quad, 2, &ratio(1, 20), &opts).unwrap();
        assert_eq!(rep.retained, IntervalSet::unit());
        assert!(rep.modulus.iter().all(|q| q.value < 1e-9));
        let cub = whitney_sieve(&cubic(), 2, &ratio(1, 20), &opts).unwrap();
        assert!(cub.retained.measure() >= ratio(19, 20));
        assert!(matches!(
            whitney_sieve(&cubic()[..2], 2, &ratio(1, 20), &opts),
            Err(Error::MissingDerivatives(_))
        ));
    }

    #[test]
    fn sieve_cuts_around_a_jump() {
        let step = PiecewisePolynomial::new(
            vec![int(0), ratio(1, 2), int(1)],
            vec![Polynomial::zero(), Polynomial::constant(int(1))],
        )
        .unwrap();
        let zero = PiecewisePolynomial::single(Polynomial::zero(), int(0), int(1)).unwrap();
        let fields = vec![
            SampledFunction::Exact(step),
            SampledFunction::Exact(zero.clone()),
            SampledFunction::Exact(zero),
        ];
        let opts = SieveOptions { grid: 256, n_max: 2, ladder: vec![pow2(-4)] };
        let rep = whitney_sieve(&fields, 2, &ratio(1, 4), &opts).unwrap();
        let near = IntervalSet::closed(&(ratio(1, 2) - pow2(-8)), &(ratio(1, 2) + pow2(-8)));
        assert!(rep.retained.intersect(&near).measure().is_zero());
        assert!(rep.retained.measure() >= ratio(3, 4));
    }
}
