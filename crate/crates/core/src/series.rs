//! Truncated multivariate power series with a certified tail descriptor.
//!
//! A [`TruncatedSeries`] stores every coefficient `a_α` with `|α| ≤ K` in a
//! dense vector laid out in graded-lexicographic order. The discarded part
//! `Σ_{|α|>K} a_α z^α` is described by a [`TailBound`], which is what lets a
//! finite computation certify statements about the full series.

use std::collections::HashMap;
use std::io::Write;
use std::ops::Add;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::float::{Accumulator, EPS};
use crate::multiindex::{enumerate_up_to, MultiIndex};

/// Bound on the discarded degrees of a series.
///
/// `Geometric { scale, base }` certifies that for every polyradius `ρ` and
/// every degree `k > K`
///
/// ```text
/// Σ_{|α|=k} |a_α| ρ^α ≤ scale · (base · (ρ₁ + … + ρₙ))^k .
/// ```
///
/// The ratio `q = base · Σρ` is therefore only known once the evaluation
/// radius is; summing over `k > K` gives `scale · q^{K+1} / (1 − q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailBound {
    /// Nothing is known about the discarded degrees.
    Unknown,
    /// The series is a polynomial of degree at most `K`.
    Exact,
    Geometric {
        scale: f64,
        base: f64,
    },
}

impl TailBound {
    /// Per-degree ratio at a polyradius whose entries sum to `radius_sum`.
    pub fn ratio(&self, radius_sum: f64) -> Option<f64> {
        match *self {
            TailBound::Geometric { base, .. } => Some(base * radius_sum),
            _ => None,
        }
    }

    /// Bound on `Σ_{|α|=k} |a_α| ρ^α` for a single degree `k` beyond the
    /// truncation.
    pub fn degree_bound(&self, k: u32, radius_sum: f64) -> f64 {
        match *self {
            TailBound::Unknown => f64::INFINITY,
            TailBound::Exact => 0.0,
            TailBound::Geometric { scale, base } => scale * (base * radius_sum).powi(k as i32),
        }
    }

    /// Bound on `Σ_{k ≥ max(from, K+1)} Σ_{|α|=k} |a_α| ρ^α`.
    pub fn majorant(&self, truncation: u32, from: u32, radius_sum: f64) -> f64 {
        let start = from.max(truncation + 1);
        self.series(radius_sum, |q| q.powi(start as i32) / (1.0 - q))
    }

    /// Bound on `Σ_{k > K} k · Σ_{|α|=k} |a_α| ρ^α`, the tail of the radial
    /// derivative's majorant.
    pub fn weighted_majorant(&self, truncation: u32, radius_sum: f64) -> f64 {
        let m = (truncation + 1) as f64;
        self.series(radius_sum, |q| q.powi(truncation as i32 + 1) * (m - (m - 1.0) * q) / ((1.0 - q) * (1.0 - q)))
    }

    /// Bound on `Σ_{k ≥ max(from, K+1)} Σ_{|α|=k} |a_α|² ρ^{2α}`, using that a
    /// sum of squares is at most the square of the sum.
    pub fn squares(&self, truncation: u32, from: u32, radius_sum: f64) -> f64 {
        let start = from.max(truncation + 1);
        match *self {
            TailBound::Unknown => f64::INFINITY,
            TailBound::Exact => 0.0,
            TailBound::Geometric { scale, base } => {
                let q = base * radius_sum;
                if q >= 1.0 {
                    return f64::INFINITY;
                }
                scale * scale * q.powi(2 * start as i32) / (1.0 - q * q)
            }
        }
    }

    /// Bound on `Σ_{k > K} C(k, m) · Σ_{|α|=k} |a_α| ρ^α`.
    pub fn binomial_weighted(&self, truncation: u32, m: u32, radius_sum: f64) -> f64 {
        match *self {
            TailBound::Unknown => f64::INFINITY,
            TailBound::Exact => 0.0,
            TailBound::Geometric { scale, base } => {
                let q = base * radius_sum;
                if q >= 1.0 {
                    return f64::INFINITY;
                }
                if scale == 0.0 || q == 0.0 {
                    return 0.0;
                }
                // Terms t_k = C(k,m) q^k have ratio (k+1)/(k+1-m)·q, which
                // decreases in k; once it drops below one the rest is bounded
                // by a geometric series.
                let mut k = truncation + 1;
                let mut term = binomial_real(k, m) * q.powi(k as i32);
                let mut sum = 0.0;
                loop {
                    let ratio = (k + 1) as f64 / (k + 1 - m.min(k)) as f64 * q;
                    if ratio < 1.0 && term <= sum * 1e-18 {
                        sum += term / (1.0 - ratio);
                        break;
                    }
                    sum += term;
                    term *= ratio;
                    k += 1;
                    if k > truncation + 100_000 {
                        return f64::INFINITY;
                    }
                }
                scale * sum
            }
        }
    }

    /// Tail after substituting `z ↦ t·z`.
    pub fn dilate(&self, t: f64) -> TailBound {
        match *self {
            TailBound::Geometric { scale, base } => TailBound::Geometric { scale, base: base * t },
            other => other,
        }
    }

    fn series(&self, radius_sum: f64, closed: impl Fn(f64) -> f64) -> f64 {
        match *self {
            TailBound::Unknown => f64::INFINITY,
            TailBound::Exact => 0.0,
            TailBound::Geometric { scale, base } => {
                let q = base * radius_sum;
                if q >= 1.0 {
                    f64::INFINITY
                } else if scale == 0.0 {
                    0.0
                } else {
                    scale * closed(q)
                }
            }
        }
    }

    fn combine(self, other: TailBound) -> TailBound {
        use TailBound::*;
        match (self, other) {
            (Exact, t) | (t, Exact) => t,
            (Geometric { scale: s1, base: b1 }, Geometric { scale: s2, base: b2 }) => {
                Geometric { scale: s1 + s2, base: b1.max(b2) }
            }
            _ => Unknown,
        }
    }
}

fn binomial_real(k: u32, m: u32) -> f64 {
    if m > k {
        return 0.0;
    }
    let m = m.min(k - m);
    (0..m).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Dense layout of all multi-indices of dimension `n` up to degree `K`.
#[derive(Debug)]
pub struct MonomialTable {
    n: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    degree_start: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
}

type TableCache = HashMap<(usize, u32), Arc<MonomialTable>>;

impl MonomialTable {
    fn build(n: usize, max_degree: u32) -> Self {
        let indices = enumerate_up_to(n, max_degree);
        let mut degree_start = vec![0; max_degree as usize + 2];
        for (pos, alpha) in indices.iter().enumerate() {
            degree_start[alpha.degree() as usize + 1] = pos + 1;
        }
        let lookup = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        MonomialTable { n, max_degree, indices, degree_start, lookup }
    }

    /// Shared table for `(n, K)`; tables are immutable and cached.
    pub fn shared(n: usize, max_degree: u32) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<TableCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("table cache poisoned");
        guard.entry((n, max_degree)).or_insert_with(|| Arc::new(MonomialTable::build(n, max_degree))).clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Positions of the degree-`k` block.
    pub fn degree_range(&self, k: u32) -> std::ops::Range<usize> {
        self.degree_start[k as usize]..self.degree_start[k as usize + 1]
    }
}

/// Value of a series at a point with a rigorous error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on the discarded degrees at `|z|`.
    pub tail: f64,
    /// Worst-case floating-point error of the truncated sum.
    pub rounding: f64,
}

impl SeriesValue {
    pub fn error(&self) -> f64 {
        self.tail + self.rounding
    }
}

/// A power series `Σ_{|α|≤K} a_α z^α` in `n` variables.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    table: Arc<MonomialTable>,
    coeffs: Vec<Complex64>,
    tail: TailBound,
}

impl TruncatedSeries {
    pub fn zeros(n: usize, degree: u32) -> Self {
        assert!(n >= 1, "dimension must be positive");
        let table = MonomialTable::shared(n, degree);
        let coeffs = vec![Complex64::new(0.0, 0.0); table.len()];
        TruncatedSeries { table, coeffs, tail: TailBound::Exact }
    }

    /// Builds a series from explicit terms. Repeated indices accumulate. The
    /// tail is [`TailBound::Unknown`]; use [`TruncatedSeries::polynomial`] when
    /// the terms are the whole function.
    pub fn from_terms<I>(n: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zeros(n, degree);
        for (alpha, c) in terms {
            if alpha.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: alpha.dim() });
            }
            let pos =
                s.table.position(&alpha).ok_or(Error::DegreeOutOfRange { requested: alpha.degree(), max: degree })?;
            s.coeffs[pos] += c;
        }
        s.tail = TailBound::Unknown;
        Ok(s)
    }

    /// A polynomial: the given terms are the entire function.
    pub fn polynomial<I>(n: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        Ok(Self::from_terms(n, degree, terms)?.with_tail(TailBound::Exact))
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        let mut s = Self::zeros(n, 0);
        s.coeffs[0] = c;
        s
    }

    /// Builds a series from a coefficient function evaluated on every index
    /// up to `degree`.
    pub fn from_fn(n: usize, degree: u32, tail: TailBound, f: impl Fn(&MultiIndex) -> Complex64) -> Self {
        let table = MonomialTable::shared(n, degree);
        let coeffs = table.indices().iter().map(f).collect();
        TruncatedSeries { table, coeffs, tail }
    }

    pub fn with_tail(mut self, tail: TailBound) -> Self {
        self.tail = tail;
        self
    }

    pub fn dim(&self) -> usize {
        self.table.n
    }

    pub fn degree(&self) -> u32 {
        self.table.max_degree
    }

    pub fn tail(&self) -> TailBound {
        self.tail
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.table.position(alpha).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.table.indices().iter().zip(self.coeffs.iter().copied())
    }

    /// The degree-`k` slice `P_k`, in enumeration order; empty when every
    /// coefficient of that degree vanishes.
    pub fn homogeneous_part(&self, k: u32) -> Result<Vec<(MultiIndex, Complex64)>> {
        if k > self.degree() {
            return Err(Error::DegreeOutOfRange { requested: k, max: self.degree() });
        }
        let range = self.table.degree_range(k);
        if self.coeffs[range.clone()].iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
            return Ok(Vec::new());
        }
        Ok(range.map(|i| (self.table.indices()[i].clone(), self.coeffs[i])).collect())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            Err(Error::DimensionMismatch { expected: self.dim(), found })
        } else {
            Ok(())
        }
    }

    /// Truncated sum at `z`, degrees ascending, plus the tail bound at `|z|`.
    pub fn eval(&self, z: &[Complex64]) -> Result<SeriesValue> {
        self.check_dim(z.len())?;
        let powers = complex_powers(z, self.degree());
        let mut value = Complex64::new(0.0, 0.0);
        let mut magnitude = Accumulator::default();
        for (alpha, c) in self.iter() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut term = c;
            for (j, &e) in alpha.entries().iter().enumerate() {
                term *= powers[j][e as usize];
            }
            value += term;
            magnitude.add(term.norm());
        }
        let radius_sum: f64 = z.iter().map(|w| w.norm()).sum();
        Ok(SeriesValue {
            value,
            tail: self.tail.majorant(self.degree(), 0, radius_sum),
            rounding: 4.0 * magnitude.slack(self.dim() * self.degree() as usize),
        })
    }

    /// `Σ_{|α|=k} |a_α| ρ^α` for `k = 0..=K`.
    pub fn majorant_by_degree(&self, radii: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(radii.len())?;
        let powers = real_powers(radii, self.degree());
        Ok((0..=self.degree())
            .map(|k| {
                self.table
                    .degree_range(k)
                    .map(|i| self.coeffs[i].norm() * monomial(&powers, &self.table.indices()[i]))
                    .sum()
            })
            .collect())
    }

    /// `Σ_{|α|=k} |a_α|² ρ^{2α}` for `k = 0..=K`.
    pub fn squares_by_degree(&self, radii: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(radii.len())?;
        let powers = real_powers(radii, self.degree());
        Ok((0..=self.degree())
            .map(|k| {
                self.table
                    .degree_range(k)
                    .map(|i| {
                        let t = self.coeffs[i].norm() * monomial(&powers, &self.table.indices()[i]);
                        t * t
                    })
                    .sum()
            })
            .collect())
    }

    /// Euler derivative `Df = Σ z_k ∂f/∂z_k`: each coefficient is scaled by
    /// its degree. The tail is dropped.
    pub fn radial_derivative(&self) -> TruncatedSeries {
        let coeffs = self.iter().map(|(alpha, c)| c * alpha.degree() as f64).collect();
        TruncatedSeries { table: self.table.clone(), coeffs, tail: TailBound::Unknown }
    }

    /// Formal `∂^β f`, truncated at `K − |β|`. The tail is dropped.
    pub fn partial_derivative(&self, beta: &MultiIndex) -> Result<TruncatedSeries> {
        self.check_dim(beta.dim())?;
        let order = beta.degree();
        if order > self.degree() {
            return Err(Error::DegreeOutOfRange { requested: order, max: self.degree() });
        }
        let mut out = TruncatedSeries::zeros(self.dim(), self.degree() - order);
        for (pos, gamma) in out.table.clone().indices().iter().enumerate() {
            // a_{γ+β} · (γ+β)!/γ!
            let source: Vec<u32> = gamma.entries().iter().zip(beta.entries()).map(|(g, b)| g + b).collect();
            let weight: f64 = gamma
                .entries()
                .iter()
                .zip(beta.entries())
                .map(|(&g, &b)| (g + 1..=g + b).fold(1.0, |acc, v| acc * v as f64))
                .product();
            out.coeffs[pos] = self.coeff(&MultiIndex::new(source)) * weight;
        }
        out.tail = TailBound::Unknown;
        Ok(out)
    }

    /// Bound on the part of `∂^β f(z)` contributed by the discarded degrees.
    ///
    /// Uses `C(γ,β) ≤ C(|γ|,|β|)` and an auxiliary polyradius
    /// `ρ_j = max(|z_j|, ‖z‖_∞, floor)`, so coordinates at zero do not blow up
    /// the `ρ^{−β}` factor.
    pub fn partial_derivative_tail(&self, beta: &MultiIndex, z: &[Complex64], floor: f64) -> Result<f64> {
        self.check_dim(z.len())?;
        self.check_dim(beta.dim())?;
        let sup = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let rho = sup.max(floor);
        if rho <= 0.0 {
            return Ok(match self.tail {
                TailBound::Exact => 0.0,
                _ => f64::INFINITY,
            });
        }
        let radius_sum = rho * self.dim() as f64;
        let inv: f64 = beta.entries().iter().map(|&b| rho.powi(-(b as i32))).product();
        let bound = self.tail.binomial_weighted(self.degree(), beta.degree(), radius_sum);
        Ok(if bound == 0.0 { 0.0 } else { beta.factorial() * inv * bound })
    }

    /// Taylor coefficients `b_α = ∂^α f(c) / α!` of the truncated polynomial
    /// re-expanded at `center`, together with the magnitudes obtained by
    /// running the same recurrences on `|a_α|` and `|c|`, which bound the
    /// terms summed into each `b_α`.
    pub fn recentered(&self, center: &[Complex64]) -> Result<(TruncatedSeries, Vec<f64>)> {
        self.check_dim(center.len())?;
        let mut coeffs = self.coeffs.clone();
        let mut mags: Vec<Complex64> = self.coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect();
        for (j, &c) in center.iter().enumerate() {
            shift_axis(&self.table, &mut coeffs, j, c);
            shift_axis(&self.table, &mut mags, j, Complex64::new(c.norm(), 0.0));
        }
        let shifted = TruncatedSeries { table: self.table.clone(), coeffs, tail: TailBound::Unknown };
        Ok((shifted, mags.into_iter().map(|m| m.re).collect()))
    }

    /// `f(t·z)`: coefficients scaled by `t^{|α|}`.
    pub fn dilate(&self, t: f64) -> TruncatedSeries {
        let coeffs = self.iter().map(|(alpha, c)| c * t.powi(alpha.degree() as i32)).collect();
        TruncatedSeries { table: self.table.clone(), coeffs, tail: self.tail.dilate(t) }
    }

    pub fn scale(&self, factor: Complex64) -> TruncatedSeries {
        let norm = factor.norm();
        let tail = match self.tail {
            TailBound::Geometric { scale, base } => TailBound::Geometric { scale: scale * norm, base },
            other => other,
        };
        TruncatedSeries { table: self.table.clone(), coeffs: self.coeffs.iter().map(|c| c * factor).collect(), tail }
    }

    /// Relabels coordinates: variable `j` of the result is variable
    /// `perm[j]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<TruncatedSeries> {
        self.check_dim(perm.len())?;
        let mut out = TruncatedSeries::zeros(self.dim(), self.degree()).with_tail(self.tail);
        for (alpha, c) in self.iter() {
            let mut target = vec![0; self.dim()];
            for (j, &p) in perm.iter().enumerate() {
                target[j] = alpha.entries()[p];
            }
            let pos = out.table.position(&MultiIndex::new(target)).expect("same degree");
            out.coeffs[pos] = c;
        }
        Ok(out)
    }

    /// Writes the dump format: header `alpha,re,im`, one row per nonzero
    /// coefficient in enumeration order.
    pub fn write_dump<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        writer.write_record(["alpha", "re", "im"])?;
        for (alpha, c) in self.iter() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            writer.write_record([alpha.to_string(), c.re.to_string(), c.im.to_string()])?;
        }
        writer.flush()
    }
}

impl Add<&TruncatedSeries> for &TruncatedSeries {
    type Output = TruncatedSeries;

    /// # Panics
    ///
    /// Panics when the dimensions or truncation degrees differ.
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        assert_eq!(self.degree(), rhs.degree(), "truncation mismatch");
        TruncatedSeries {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            tail: self.tail.combine(rhs.tail),
        }
    }
}

fn complex_powers(z: &[Complex64], degree: u32) -> Vec<Vec<Complex64>> {
    z.iter()
        .map(|&w| {
            let mut p = Vec::with_capacity(degree as usize + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=degree {
                p.push(acc);
                acc *= w;
            }
            p
        })
        .collect()
}

pub(crate) fn real_powers(r: &[f64], degree: u32) -> Vec<Vec<f64>> {
    r.iter().map(|&w| (0..=degree).map(|e| w.powi(e as i32)).collect()).collect()
}

pub(crate) fn monomial(powers: &[Vec<f64>], alpha: &MultiIndex) -> f64 {
    alpha.entries().iter().enumerate().map(|(j, &e)| powers[j][e as usize]).product()
}

/// In-place Taylor shift `x_j ↦ x_j + c` of a dense coefficient vector.
fn shift_axis(table: &MonomialTable, coeffs: &mut [Complex64], axis: usize, c: Complex64) {
    if c == Complex64::new(0.0, 0.0) {
        return;
    }
    let k_max = table.max_degree;
    let mut fiber = Vec::new();
    let mut values = Vec::new();
    for base in table.indices() {
        if base.entries()[axis] != 0 {
            continue;
        }
        fiber.clear();
        let mut e = base.entries().to_vec();
        for _ in 0..=(k_max - base.degree()) {
            fiber.push(table.position(&MultiIndex::new(e.clone())).expect("in table"));
            e[axis] += 1;
        }
        values.clear();
        values.extend(fiber.iter().map(|&i| coeffs[i]));
        let d = values.len() - 1;
        // repeated synthetic division
        for i in 0..d {
            for k in (i..d).rev() {
                let next = values[k + 1];
                values[k] += c * next;
            }
        }
        for (&i, &v) in fiber.iter().zip(&values) {
            coeffs[i] = v;
        }
    }
}

/// Rounding slack of a recentred coefficient, relative to its magnitude bound.
pub(crate) fn recenter_slack_factor(n: usize, degree: u32) -> f64 {
    4.0 * (2 * n * (degree as usize + 2)) as f64 * EPS
}
