//! Refined Bohr-type sums.
//!
//! Every functional is available on two paths. The series path works on any
//! [`TruncatedSeries`] and certifies the discarded degrees through the
//! series' [`TailBound`]. The closed path works only for an
//! [`ExtremalFunction`] at a diagonal point and uses one-variable formulas,
//! so the two paths serve as oracles for each other.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::{ExtremalFunction, PointSign};
use crate::float::{Accumulator, EPS};
use crate::series::{monomial, real_powers, recenter_slack_factor, TruncatedSeries};

/// Evaluation point, polyradius and cutoff degree.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalContext {
    z: Vec<Complex64>,
    radii: Vec<f64>,
    rho: f64,
    cutoff: u32,
}

impl EvalContext {
    /// Context at `z` with polyradius `|z|`.
    pub fn new(z: Vec<Complex64>, cutoff: u32) -> Result<Self> {
        let radii = z.iter().map(|w| w.norm()).collect();
        Self::with_radii(z, radii, cutoff)
    }

    /// Context with an explicit polyradius. `𝐫` is always `‖z‖_∞`.
    pub fn with_radii(z: Vec<Complex64>, radii: Vec<f64>, cutoff: u32) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidParameter("empty evaluation point".into()));
        }
        if radii.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: z.len(), found: radii.len() });
        }
        if cutoff == 0 {
            return Err(Error::InvalidParameter("cutoff N must be at least 1".into()));
        }
        let rho = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
        if rho.is_nan() || rho >= 1.0 || radii.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::Domain(format!("‖z‖∞ = {rho} must lie in [0, 1)")));
        }
        Ok(EvalContext { z, radii, rho, cutoff })
    }

    /// `z = (σr, …, σr)` in dimension `n`.
    pub fn diagonal(n: usize, r: f64, point: PointSign, cutoff: u32) -> Result<Self> {
        Self::new(vec![Complex64::new(point.sign() * r, 0.0); n], cutoff)
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `𝐫 = ‖z‖_∞`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// `t = ⌊(N − 1)/2⌋`.
    pub fn t(&self) -> u32 {
        (self.cutoff - 1) / 2
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Result<Self> {
        Self::with_radii(self.z.clone(), self.radii.clone(), cutoff)
    }

    /// `(r, σ)` when the point is `(σr, …, σr)` with real `r` and the
    /// polyradius is `(r, …, r)`.
    pub fn diagonal_point(&self) -> Option<(f64, PointSign)> {
        let first = self.z[0];
        if first.im != 0.0 || self.z.iter().any(|&w| w != first) {
            return None;
        }
        let r = first.re.abs();
        if self.radii.iter().any(|&v| v != r) {
            return None;
        }
        let sign = if first.re < 0.0 { PointSign::Minus } else { PointSign::Plus };
        Some((r, sign))
    }
}

/// Contributions to a functional value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    /// `|f(z)|` or `|f(z)|²`.
    pub modulus: f64,
    /// `|Df(z)|`, or the sum of scaled partial derivatives.
    pub derivative: f64,
    /// `Σ_{k≥N} Σ_{|α|=k} |a_α| r^α`.
    pub majorant: f64,
    /// The `sgn(t)` group.
    pub signed_quadratic: f64,
    /// The weighted quadratic group.
    pub weighted_quadratic: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.modulus + self.derivative + self.majorant + self.signed_quadratic + self.weighted_quadratic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// Certified bound on what the discarded degrees contribute.
    pub truncation_error: f64,
    /// Worst-case floating-point error.
    pub rounding: f64,
    pub breakdown: Breakdown,
}

impl FunctionalValue {
    fn from_parts(parts: [Part; 5]) -> Self {
        let [modulus, derivative, majorant, signed, weighted] = parts;
        let breakdown = Breakdown {
            modulus: modulus.value,
            derivative: derivative.value,
            majorant: majorant.value,
            signed_quadratic: signed.value,
            weighted_quadratic: weighted.value,
        };
        let all = [modulus, derivative, majorant, signed, weighted];
        let value = breakdown.total();
        FunctionalValue {
            value,
            truncation_error: all.iter().map(|p| p.truncation).sum(),
            rounding: all.iter().map(|p| p.rounding).sum::<f64>() + 5.0 * EPS * value,
            breakdown,
        }
    }

    /// Total error bound.
    pub fn error(&self) -> f64 {
        self.truncation_error + self.rounding
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error()
    }

    pub fn lower(&self) -> f64 {
        self.value - self.error()
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Part {
    value: f64,
    truncation: f64,
    rounding: f64,
}

impl Part {
    const ZERO: Part = Part { value: 0.0, truncation: 0.0, rounding: 0.0 };

    fn scaled(self, w: f64) -> Part {
        Part {
            value: self.value * w,
            truncation: self.truncation * w,
            rounding: self.rounding * w + 2.0 * EPS * (self.value * w).abs(),
        }
    }

    fn squared(self) -> Part {
        let e = self.truncation + self.rounding;
        let v = self.value;
        // (v + e)² − v² split proportionally between the two sources
        let spread = 2.0 * v + e;
        Part {
            value: v * v,
            truncation: spread * self.truncation,
            rounding: spread * self.rounding + 2.0 * EPS * v * v,
        }
    }
}

/// The eight functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Functional {
    A1,
    A2,
    A3,
    A4,
    I,
    J,
    M,
    N,
}

impl Functional {
    pub const ALL: [Functional; 8] = [
        Functional::A1,
        Functional::A2,
        Functional::A3,
        Functional::A4,
        Functional::I,
        Functional::J,
        Functional::M,
        Functional::N,
    ];

    /// Whether the leading term is `|f(z)|²` rather than `|f(z)|`.
    pub fn squared(self) -> bool {
        matches!(self, Functional::A2 | Functional::A4 | Functional::J | Functional::N)
    }

    /// Cutoff actually used: A₃/A₄ fix `N = 1`, 𝓘/𝓙 fix `N = 2`.
    pub fn effective_cutoff(self, requested: u32) -> u32 {
        match self {
            Functional::A3 | Functional::A4 => 1,
            Functional::I | Functional::J => 2,
            _ => requested,
        }
    }

    /// Series path.
    pub fn evaluate(self, f: &TruncatedSeries, ctx: &EvalContext) -> Result<FunctionalValue> {
        check_dim(f, ctx)?;
        let ctx = &ctx.with_cutoff(self.effective_cutoff(ctx.cutoff()))?;
        let mut modulus = series_modulus(f, ctx)?;
        if self.squared() {
            modulus = modulus.squared();
        }
        let parts = match self {
            Functional::A1 | Functional::A2 | Functional::A3 | Functional::A4 => {
                let [majorant, signed, weighted] = refined_parts(f, ctx)?;
                [modulus, Part::ZERO, majorant, signed, weighted]
            }
            Functional::I | Functional::J => {
                let derivative = series_radial(f, ctx)?;
                let [majorant, signed, weighted] = refined_parts(f, ctx)?;
                [modulus, derivative, majorant, signed, weighted]
            }
            Functional::M | Functional::N => {
                [modulus, series_derivative_sum(f, ctx)?, Part::ZERO, Part::ZERO, Part::ZERO]
            }
        };
        Ok(FunctionalValue::from_parts(parts))
    }

    /// Closed path, for an extremal function at a diagonal point.
    pub fn evaluate_closed(self, w: &ExtremalFunction, ctx: &EvalContext) -> Result<FunctionalValue> {
        if w.dim() != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: w.dim(), found: ctx.dim() });
        }
        let (r, point) =
            ctx.diagonal_point().ok_or_else(|| Error::Domain("closed forms need a diagonal point".into()))?;
        let cutoff = self.effective_cutoff(ctx.cutoff());
        let closed = w.closed_eval(r, point)?;
        let n = w.dim();
        let x = n as f64 * r;
        let exact = |v: f64| Part { value: v, truncation: 0.0, rounding: 16.0 * EPS * v.abs() };
        let mut modulus = exact(closed.value.abs());
        if self.squared() {
            modulus = modulus.squared();
        }
        let t = (cutoff - 1) / 2;
        let refined = || {
            [
                exact(closed_majorant(w.a(), x, cutoff)),
                closed_signed_quadratic(w.a(), n, r, cutoff, t),
                closed_quadratic(w.a(), n, x, t + 1).scaled(weight(w.a(), r)),
            ]
        };
        let parts = match self {
            Functional::A1 | Functional::A2 | Functional::A3 | Functional::A4 => {
                let [m, s, q] = refined();
                [modulus, Part::ZERO, m, s, q]
            }
            Functional::I | Functional::J => {
                let [m, s, q] = refined();
                [modulus, exact(closed.df.abs()), m, s, q]
            }
            Functional::M | Functional::N => {
                let a = w.a();
                let wd = 1.0
                    - match w.form() {
                        crate::extremal::Form::Minus => a * closed.s,
                        crate::extremal::Form::Plus => -a * closed.s,
                    };
                if a * x >= wd {
                    return Err(Error::Domain(format!("derivative sum diverges at a = {a}, x = {x}")));
                }
                let sum = (1.0 - a * a) * a.powi(cutoff as i32 - 1) * x.powi(cutoff as i32)
                    / (wd.powi(cutoff as i32) * (wd - a * x));
                [modulus, exact(sum), Part::ZERO, Part::ZERO, Part::ZERO]
            }
        };
        Ok(FunctionalValue::from_parts(parts))
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::A1 => "A1",
            Functional::A2 => "A2",
            Functional::A3 => "A3",
            Functional::A4 => "A4",
            Functional::I => "I",
            Functional::J => "J",
            Functional::M => "M",
            Functional::N => "N",
        })
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown functional `{s}`")))
    }
}

/// `Σ_{k≥from} Σ_{|α|=k} |a_α| r^α` with a certified tail.
pub fn majorant_sum(f: &TruncatedSeries, radii: &[f64], from: u32) -> Result<FunctionalValue> {
    let part = series_majorant(f, radii, from)?;
    Ok(FunctionalValue::from_parts([Part::ZERO, Part::ZERO, part, Part::ZERO, Part::ZERO]))
}

/// The refined sum: majorant from `N`, the `sgn(t)` group and the weighted
/// quadratic group.
pub fn refined_sum(f: &TruncatedSeries, ctx: &EvalContext) -> Result<FunctionalValue> {
    check_dim(f, ctx)?;
    let [m, s, q] = refined_parts(f, ctx)?;
    Ok(FunctionalValue::from_parts([Part::ZERO, Part::ZERO, m, s, q]))
}

/// Closed-path refined sum on the extremal family.
pub fn refined_sum_closed(w: &ExtremalFunction, ctx: &EvalContext) -> Result<FunctionalValue> {
    let mut v = Functional::A1.evaluate_closed(w, ctx)?;
    v.value -= v.breakdown.modulus;
    v.breakdown.modulus = 0.0;
    Ok(v)
}

/// Right-hand side `(1 − |a₀|²) x^N / (1 − x)` of the refined-sum bound.
pub fn refined_bound(a0: f64, x: f64, cutoff: u32) -> f64 {
    (1.0 - a0 * a0) * x.powi(cutoff as i32) / (1.0 - x)
}

fn check_dim(f: &TruncatedSeries, ctx: &EvalContext) -> Result<()> {
    if f.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: ctx.dim() });
    }
    Ok(())
}

fn weight(a0: f64, rho: f64) -> f64 {
    1.0 / (1.0 + a0) + rho / (1.0 - rho)
}

fn sum_slack(f: &TruncatedSeries, total: f64) -> f64 {
    (f.table().len() + f.dim() * f.degree() as usize + 4) as f64 * EPS * total
}

fn series_modulus(f: &TruncatedSeries, ctx: &EvalContext) -> Result<Part> {
    let v = f.eval(ctx.z())?;
    Ok(Part { value: v.value.norm(), truncation: v.tail, rounding: v.rounding + 2.0 * EPS * v.value.norm() })
}

fn series_radial(f: &TruncatedSeries, ctx: &EvalContext) -> Result<Part> {
    let v = f.radial_derivative().eval(ctx.z())?;
    let radius_sum: f64 = ctx.z().iter().map(|w| w.norm()).sum();
    Ok(Part {
        value: v.value.norm(),
        truncation: f.tail().weighted_majorant(f.degree(), radius_sum),
        rounding: v.rounding + 2.0 * EPS * v.value.norm(),
    })
}

fn series_majorant(f: &TruncatedSeries, radii: &[f64], from: u32) -> Result<Part> {
    let by_degree = f.majorant_by_degree(radii)?;
    let value: f64 = by_degree.iter().skip(from as usize).sum();
    Ok(Part {
        value,
        truncation: f.tail().majorant(f.degree(), from, radii.iter().sum()),
        rounding: sum_slack(f, value),
    })
}

fn refined_parts(f: &TruncatedSeries, ctx: &EvalContext) -> Result<[Part; 3]> {
    let n = f.dim();
    let k_max = f.degree();
    let cutoff = ctx.cutoff();
    let t = ctx.t();
    let rho = ctx.rho();
    let a0 = f.constant_term().norm();
    let radius_sum: f64 = ctx.radii().iter().sum();

    let majorant = series_majorant(f, ctx.radii(), cutoff)?;

    let signed = if t == 0 {
        Part::ZERO
    } else {
        let plain = f.squares_by_degree(&vec![1.0; n])?;
        let value: f64 = plain.iter().take(t as usize + 1).skip(1).sum();
        let truncation: f64 = (k_max + 1..=t).map(|k| f.tail().degree_bound(k, n as f64).powi(2)).sum();
        Part { value, truncation, rounding: sum_slack(f, value) }.scaled(rho.powi(cutoff as i32) / (1.0 - rho))
    };

    let squares = f.squares_by_degree(ctx.radii())?;
    let value: f64 = squares.iter().skip(t as usize + 1).sum();
    let weighted =
        Part { value, truncation: f.tail().squares(k_max, t + 1, radius_sum), rounding: sum_slack(f, value) }
            .scaled(weight(a0, rho));

    Ok([majorant, signed, weighted])
}

/// `Σ_{k=N}^{∞} Σ_{|α|=k} |∂^α f(z)|/α! · |z|^α`.
///
/// The Taylor coefficients at `z` of the truncated polynomial are exact up to
/// rounding. Everything the discarded degrees `|β| > K` contribute, to any
/// `α ≤ β`, is bounded through `Σ_{α≤β} C(β,α) = 2^{|β|}` by the majorant
/// tail at `2|z|`.
fn series_derivative_sum(f: &TruncatedSeries, ctx: &EvalContext) -> Result<Part> {
    let (shifted, magnitudes) = f.recentered(ctx.z())?;
    let abs_z: Vec<f64> = ctx.z().iter().map(|w| w.norm()).collect();
    let powers = real_powers(&abs_z, f.degree());
    let factor = recenter_slack_factor(f.dim(), f.degree());
    let mut sum = Accumulator::default();
    let mut shift_error = 0.0;
    for ((alpha, b), m) in shifted.iter().zip(&magnitudes) {
        if alpha.degree() < ctx.cutoff() {
            continue;
        }
        let w = monomial(&powers, alpha);
        sum.add(b.norm() * w);
        shift_error += factor * m * w;
    }
    let radius_sum: f64 = abs_z.iter().sum();
    Ok(Part {
        value: sum.sum,
        truncation: f.tail().majorant(f.degree(), 0, 2.0 * radius_sum),
        rounding: shift_error * (1.0 + 4.0 * EPS) + sum.slack(f.dim() * f.degree() as usize),
    })
}

const CLOSED_DEGREES: usize = 400;

/// `T_n(k) = Σ_{|α|=k} (|α|!/α!)² / n^{2k}` for `k ≤ CLOSED_DEGREES`, by
/// conditioning on the last coordinate: the weights are binomial
/// probabilities with success chance `1/n`.
fn normalized_square_sums(n: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache poisoned").get(&n) {
        return t.clone();
    }
    let mut prev = vec![1.0; CLOSED_DEGREES + 1];
    for m in 2..=n {
        let p = 1.0 / m as f64;
        let q = 1.0 - p;
        let mut next = vec![0.0; CLOSED_DEGREES + 1];
        for (k, slot) in next.iter_mut().enumerate() {
            let mut pmf = q.powi(k as i32);
            let mut acc = 0.0;
            for i in 0..=k {
                acc += pmf * pmf * prev[k - i];
                pmf *= (k - i) as f64 / (i + 1) as f64 * p / q;
            }
            *slot = acc;
        }
        prev = next;
    }
    let table = Arc::new(prev);
    cache.lock().expect("cache poisoned").insert(n, table.clone());
    table
}

fn closed_majorant(a: f64, x: f64, from: u32) -> f64 {
    let start = from.max(1);
    let head = if from == 0 { a } else { 0.0 };
    if a == 0.0 {
        return head + if start == 1 { x } else { 0.0 };
    }
    head + (1.0 - a * a) * a.powi(start as i32 - 1) * x.powi(start as i32) / (1.0 - a * x)
}

/// `Σ_{k≥from} c_k² x^{2k} T_n(k)`.
fn closed_quadratic(a: f64, n: usize, x: f64, from: u32) -> Part {
    let t = normalized_square_sums(n);
    let c2 = |k: usize| {
        let c = (1.0 - a * a) * a.powi(k as i32 - 1);
        c * c
    };
    let mut acc = Accumulator::default();
    for (k, tk) in t.iter().enumerate().skip(from.max(1) as usize) {
        acc.add(c2(k) * x.powi(2 * k as i32) * tk);
    }
    let truncation = if a == 0.0 {
        0.0
    } else {
        let k = CLOSED_DEGREES + 1;
        c2(k) * x.powi(2 * k as i32) / (1.0 - a * a * x * x)
    };
    Part { value: acc.sum, truncation, rounding: acc.slack(CLOSED_DEGREES + 8) }
}

/// `Σ_{k=1}^{t} c_k² n^{2k} T_n(k) · 𝐫^N/(1 − 𝐫)`.
fn closed_signed_quadratic(a: f64, n: usize, rho: f64, cutoff: u32, t: u32) -> Part {
    if t == 0 {
        return Part::ZERO;
    }
    let table = normalized_square_sums(n);
    let mut acc = Accumulator::default();
    for k in 1..=t as usize {
        let c = (1.0 - a * a) * a.powi(k as i32 - 1);
        acc.add(c * c * (n as f64).powi(2 * k as i32) * table[k]);
    }
    Part { value: acc.sum, truncation: 0.0, rounding: acc.slack(4 * t as usize + 8) }
        .scaled(rho.powi(cutoff as i32) / (1.0 - rho))
}
