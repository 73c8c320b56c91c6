//! Executable checks: each inequality below its radius, its failure just
//! above the radius on the extremal family, and the coefficient,
//! Schwarz-Pick and derivative lemmas on arbitrary series.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::extremal::{ExtremalFunction, Form, PointSign};
use crate::float::EPS;
use crate::functionals::{refined_bound, refined_sum, EvalContext, Functional, FunctionalValue};
use crate::multiindex::{enumerate_up_to, MultiIndex};
use crate::radii::{CubicLeading, RadiusEquation};
use crate::series::{TailBound, TruncatedSeries};

/// Default seed for pseudo-random sampling.
pub const DEFAULT_SEED: u64 = 0x5eed_b0e1;

/// Margin a sharpness witness must clear after subtracting its error bound.
pub const SHARP_MARGIN: f64 = 1e-6;

/// Tolerance used when solving radius equations for checks.
pub const ROOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    T21a,
    T21b,
    T22a,
    T22b,
    T23i,
    T23j,
    T24m,
    T24n,
    Lemma1,
    Lemma2,
    Lemma4,
    Lemma5,
}

impl Tag {
    pub const THEOREMS: [Tag; 8] =
        [Tag::T21a, Tag::T21b, Tag::T22a, Tag::T22b, Tag::T23i, Tag::T23j, Tag::T24m, Tag::T24n];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::T21a => "2.1a",
            Tag::T21b => "2.1b",
            Tag::T22a => "2.2a",
            Tag::T22b => "2.2b",
            Tag::T23i => "2.3i",
            Tag::T23j => "2.3j",
            Tag::T24m => "2.4m",
            Tag::T24n => "2.4n",
            Tag::Lemma1 => "lemma1",
            Tag::Lemma2 => "lemma2",
            Tag::Lemma4 => "lemma4",
            Tag::Lemma5 => "lemma5",
        }
    }

    /// Whether the radius depends on `|a₀|` rather than on `N`.
    pub fn uses_a0(self) -> bool {
        matches!(self, Tag::T22a | Tag::T22b)
    }

    /// Whether the radius depends on `N`.
    pub fn uses_cutoff(self) -> bool {
        matches!(self, Tag::T21a | Tag::T21b | Tag::T24m | Tag::T24n)
    }

    pub fn is_theorem(self) -> bool {
        Tag::THEOREMS.contains(&self)
    }

    /// The functional, the extremal form and the evaluation point used for
    /// this theorem.
    pub fn pairing(self) -> Result<(Functional, Form, PointSign)> {
        Ok(match self {
            Tag::T21a => (Functional::A1, Form::Minus, PointSign::Minus),
            Tag::T21b => (Functional::A2, Form::Minus, PointSign::Minus),
            Tag::T22a => (Functional::A3, Form::Plus, PointSign::Plus),
            Tag::T22b => (Functional::A4, Form::Plus, PointSign::Plus),
            Tag::T23i => (Functional::I, Form::Plus, PointSign::Plus),
            Tag::T23j => (Functional::J, Form::Plus, PointSign::Plus),
            Tag::T24m => (Functional::M, Form::Minus, PointSign::Plus),
            Tag::T24n => (Functional::N, Form::Minus, PointSign::Plus),
            other => return Err(Error::UnsupportedTag { tag: other.to_string(), operation: "theorem check" }),
        })
    }

    /// The radius equation for the given parameters.
    pub fn equation(self, cutoff: u32, a0: f64) -> Result<RadiusEquation> {
        Ok(match self {
            Tag::T21a => RadiusEquation::Psi { cutoff },
            Tag::T21b => RadiusEquation::PsiPrime { cutoff },
            Tag::T22a => RadiusEquation::RA0Closed { a0 },
            Tag::T22b => RadiusEquation::CubicA0 { a0, leading: CubicLeading::Square },
            Tag::T23i => RadiusEquation::Sqrt17Closed,
            Tag::T23j => RadiusEquation::Quartic,
            Tag::T24m => RadiusEquation::Tilde { cutoff },
            Tag::T24n => RadiusEquation::TildePrime { cutoff },
            other => return Err(Error::UnsupportedTag { tag: other.to_string(), operation: "radius equation" }),
        })
    }

    /// Polynomial that is positive exactly where the functional exceeds one
    /// as `a → 1⁻` (or at `a = a₀` for the tags with fixed `|a₀|`),
    /// together with a rounding bound.
    pub fn limit_polynomial(self, cutoff: u32, a0: f64, x: f64) -> Result<(f64, f64)> {
        let eq = self.equation(cutoff, a0)?;
        let (v, slack) = eq.value(x);
        let factor = match self {
            Tag::T21b => 1.0 + x,
            Tag::T23i => 1.0 + x * x,
            _ => 1.0,
        };
        // oriented to be negative at the origin
        let sign = -eq.value(0.0).0.signum();
        Ok((sign * factor * v, factor * slack * (1.0 + 4.0 * EPS)))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Tag::Lemma1, Tag::Lemma2, Tag::Lemma4, Tag::Lemma5]
            .into_iter()
            .chain(Tag::THEOREMS)
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    /// Verdict for the claim `value ≤ bound` given an error bound on
    /// `value`.
    pub fn at_most(value: f64, error: f64, bound: f64) -> Verdict {
        if value + error <= bound {
            Verdict::Pass
        } else if value - error > bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    /// Verdict for `value ≤ bound` where `tail` is a one-sided certified
    /// bound and `rounding` is two-sided noise. Equality cases PASS.
    pub fn at_most_within(value: f64, tail: f64, rounding: f64, bound: f64) -> Verdict {
        if value + tail <= bound + rounding {
            Verdict::Pass
        } else if value - tail - rounding > bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    /// Verdict for the claim `value > bound`.
    pub fn above(value: f64, error: f64, bound: f64) -> Verdict {
        if value - error > bound {
            Verdict::Pass
        } else if value + error <= bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// What a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Below,
    Sharp,
    Limit,
    RefinedSum,
    Coefficients,
    SchwarzPick,
    DerivativeBound,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Below => "below",
            Check::Sharp => "sharp",
            Check::Limit => "limit",
            Check::RefinedSum => "refined-sum",
            Check::Coefficients => "coefficients",
            Check::SchwarzPick => "schwarz-pick",
            Check::DerivativeBound => "derivative-bound",
        })
    }
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub theorem: Tag,
    pub check: Check,
    pub n: usize,
    #[serde(rename = "N")]
    pub cutoff: Option<u32>,
    /// `|a₀|` of the function evaluated; for the extremal family this is
    /// its parameter `a`.
    pub a0: Option<f64>,
    /// `n·‖z‖_∞`.
    pub x: f64,
    pub value: f64,
    /// Total certified error on `value`.
    pub tail: f64,
    /// What `value` is compared against.
    pub bound: f64,
    pub verdict: Verdict,
}

impl Record {
    /// Signed slack in the direction of the claim: positive when the claim
    /// holds with room to spare.
    fn slack(&self) -> f64 {
        match self.check {
            Check::Sharp | Check::Limit => self.value - self.tail - self.bound,
            _ => self.bound - self.value - self.tail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem: Tag,
    pub check: Check,
    pub n: usize,
    #[serde(rename = "N")]
    pub cutoff: Option<u32>,
    pub a0: Option<f64>,
    pub records: Vec<Record>,
    pub verdict: Verdict,
    /// Worst slack over the records for inequality checks, best slack for
    /// sharpness checks.
    pub margin: f64,
    /// Indices of records whose verdict is not PASS.
    pub failures: Vec<usize>,
    /// The witnessing `a` of a successful sharpness check.
    pub witness: Option<f64>,
    /// Set when the check is an analogy rather than a stated result.
    pub heuristic: bool,
}

impl VerificationReport {
    fn from_records(
        theorem: Tag,
        check: Check,
        n: usize,
        cutoff: Option<u32>,
        a0: Option<f64>,
        records: Vec<Record>,
    ) -> Self {
        let verdict = records.iter().fold(Verdict::Pass, |acc, r| acc.combine(r.verdict));
        let margin = records.iter().map(Record::slack).fold(f64::INFINITY, f64::min);
        let failures = failures(&records);
        VerificationReport {
            theorem,
            check,
            n,
            cutoff,
            a0,
            records,
            verdict,
            margin,
            failures,
            witness: None,
            heuristic: false,
        }
    }
}

fn failures(records: &[Record]) -> Vec<usize> {
    records.iter().enumerate().filter(|(_, r)| r.verdict != Verdict::Pass).map(|(i, _)| i).collect()
}

/// Which evaluator the theorem checks use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    /// One-variable closed forms on the diagonal.
    Closed,
    /// Multinomial series truncated at the given degree.
    Series { degree: u32 },
}

/// Parameters of a theorem check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremCheck {
    pub tag: Tag,
    pub n: usize,
    /// `N`, for tags whose radius depends on it.
    pub cutoff: u32,
    /// `|a₀|`, for tags whose radius depends on it.
    pub a0: f64,
    pub path: Path,
}

impl TheoremCheck {
    pub fn new(tag: Tag, n: usize, cutoff: u32, a0: f64) -> Self {
        TheoremCheck { tag, n, cutoff, a0, path: Path::Closed }
    }

    pub fn with_path(mut self, path: Path) -> Self {
        self.path = path;
        self
    }

    fn validate(&self) -> Result<()> {
        self.tag.pairing()?;
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if self.tag.uses_cutoff() && self.cutoff == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.tag.uses_a0() && !(0.0..1.0).contains(&self.a0) {
            return Err(Error::InvalidParameter(format!("a0 = {} is outside [0, 1)", self.a0)));
        }
        Ok(())
    }

    fn root(&self) -> Result<f64> {
        Ok(self.tag.equation(self.cutoff, self.a0)?.solve(ROOT_TOL)?.midpoint())
    }

    fn record_cutoff(&self) -> Option<u32> {
        self.tag.uses_cutoff().then_some(self.cutoff)
    }

    /// Functional value on the paired extremal function at `x = n·𝐫`.
    pub fn evaluate(&self, a: f64, x: f64) -> Result<FunctionalValue> {
        let (functional, form, point) = self.tag.pairing()?;
        let w = ExtremalFunction::new(a, form, self.n)?;
        let ctx = EvalContext::diagonal(self.n, x / self.n as f64, point, self.cutoff.max(1))?;
        match self.path {
            Path::Closed => functional.evaluate_closed(&w, &ctx),
            Path::Series { degree } => functional.evaluate(&w.to_series(degree), &ctx),
        }
    }

    fn below_grid(&self) -> Vec<f64> {
        if self.tag.uses_a0() {
            vec![self.a0]
        } else {
            (0..10).map(|i| i as f64 / 10.0).chain([0.99]).collect()
        }
    }

    fn sharp_grid(&self) -> Vec<f64> {
        if self.tag.uses_a0() {
            vec![self.a0]
        } else {
            (1..=6).map(|j| 1.0 - 10f64.powi(-j)).collect()
        }
    }

    fn record(&self, check: Check, a: f64, x: f64, value: &FunctionalValue) -> Record {
        let verdict = match check {
            Check::Sharp => Verdict::above(value.value, value.error(), 1.0 + SHARP_MARGIN),
            _ => Verdict::at_most(value.value, value.error(), 1.0),
        };
        Record {
            theorem: self.tag,
            check,
            n: self.n,
            cutoff: self.record_cutoff(),
            a0: Some(a),
            x,
            value: value.value,
            tail: value.error(),
            bound: if check == Check::Sharp { 1.0 + SHARP_MARGIN } else { 1.0 },
            verdict,
        }
    }

    /// The inequality at `x = root·(1 − ε)` across the `a` grid.
    pub fn check_below(&self, eps: f64) -> Result<VerificationReport> {
        self.validate()?;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!("ε = {eps} is outside (0, 0.5)")));
        }
        let x = self.root()? * (1.0 - eps);
        let records = self
            .below_grid()
            .into_par_iter()
            .map(|a| Ok(self.record(Check::Below, a, x, &self.evaluate(a, x)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(VerificationReport::from_records(
            self.tag,
            Check::Below,
            self.n,
            self.record_cutoff(),
            self.tag.uses_a0().then_some(self.a0),
            records,
        ))
    }

    /// Sharpness at `x = root·(1 + ε)`.
    pub fn check_sharp(&self, eps: f64) -> Result<VerificationReport> {
        self.validate()?;
        if !(eps > 0.0 && eps < 0.2) {
            return Err(Error::InvalidParameter(format!("ε = {eps} is outside (0, 0.2)")));
        }
        self.probe_sharp(self.root()? * (1.0 + eps))
    }

    /// Searches for a sharpness witness at an arbitrary `x`. A PASS needs a
    /// witness above `1 + SHARP_MARGIN` and a positive limit polynomial.
    pub fn probe_sharp(&self, x: f64) -> Result<VerificationReport> {
        self.validate()?;
        let mut records = self
            .sharp_grid()
            .into_par_iter()
            .map(|a| {
                // beyond the radius of convergence of the derivative sum the
                // functional is infinite: that is a witness in its own right
                match self.evaluate(a, x) {
                    Ok(v) => Ok(self.record(Check::Sharp, a, x, &v)),
                    Err(Error::Domain(_)) => Ok(Record {
                        theorem: self.tag,
                        check: Check::Sharp,
                        n: self.n,
                        cutoff: self.record_cutoff(),
                        a0: Some(a),
                        x,
                        value: f64::INFINITY,
                        tail: 0.0,
                        bound: 1.0 + SHARP_MARGIN,
                        verdict: Verdict::Pass,
                    }),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let best = records
            .iter()
            .filter(|r| r.verdict == Verdict::Pass)
            .max_by(|p, q| p.slack().total_cmp(&q.slack()))
            .and_then(|r| r.a0);
        let sweep = if best.is_some() {
            Verdict::Pass
        } else if records.iter().any(|r| r.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };

        let (limit, slack) = self.tag.limit_polynomial(self.cutoff, self.a0, x)?;
        let limit_verdict = Verdict::above(limit, slack, 0.0);
        records.push(Record {
            theorem: self.tag,
            check: Check::Limit,
            n: self.n,
            cutoff: self.record_cutoff(),
            a0: self.tag.uses_a0().then_some(self.a0),
            x,
            value: limit,
            tail: slack,
            bound: 0.0,
            verdict: limit_verdict,
        });

        let margin =
            records.iter().filter(|r| r.check == Check::Sharp).map(Record::slack).fold(f64::NEG_INFINITY, f64::max);
        let failures = failures(&records);
        Ok(VerificationReport {
            theorem: self.tag,
            check: Check::Sharp,
            n: self.n,
            cutoff: self.record_cutoff(),
            a0: self.tag.uses_a0().then_some(self.a0),
            records,
            verdict: sweep.combine(limit_verdict),
            margin,
            failures,
            witness: best,
            heuristic: self.tag == Tag::T22b,
        })
    }
}

/// Shorthand for [`TheoremCheck::check_below`] on the closed path.
pub fn check_below(tag: Tag, n: usize, cutoff: u32, a0: f64, eps: f64) -> Result<VerificationReport> {
    TheoremCheck::new(tag, n, cutoff, a0).check_below(eps)
}

/// Shorthand for [`TheoremCheck::check_sharp`] on the closed path.
pub fn check_sharp(tag: Tag, n: usize, cutoff: u32, a0: f64, eps: f64) -> Result<VerificationReport> {
    TheoremCheck::new(tag, n, cutoff, a0).check_sharp(eps)
}

/// The refined-sum bound on the minus-form extremal family over a grid of
/// `a` and `x`, on the series path.
pub fn check_refined_sum(n: usize, cutoff: u32, degree: u32) -> Result<VerificationReport> {
    let grid: Vec<(f64, f64)> =
        [0.0, 0.25, 0.5, 0.75, 0.9].iter().flat_map(|&a| [0.1, 0.3, 0.5, 0.7].map(move |x| (a, x))).collect();
    let records = grid
        .into_par_iter()
        .map(|(a, x)| {
            let w = ExtremalFunction::new(a, Form::Minus, n)?;
            let ctx = EvalContext::diagonal(n, x / n as f64, PointSign::Minus, cutoff)?;
            let v = refined_sum(&w.to_series(degree), &ctx)?;
            let bound = refined_bound(a, x, cutoff);
            Ok(Record {
                theorem: Tag::Lemma5,
                check: Check::RefinedSum,
                n,
                cutoff: Some(cutoff),
                a0: Some(a),
                x,
                value: v.value,
                tail: v.error(),
                bound,
                verdict: Verdict::at_most(v.value, v.error(), bound * (1.0 + 8.0 * EPS)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_records(Tag::Lemma5, Check::RefinedSum, n, Some(cutoff), None, records))
}

fn squares_up_to(f: &TruncatedSeries) -> Vec<f64> {
    f.squares_by_degree(&vec![1.0; f.dim()]).expect("matching dimension")
}

/// Coefficient inequalities for a function bounded by one on the unit
/// polydisk: odd degrees against `n^{(2k+1)/2}(1 − Σ_{i≤k} Σ|a_α|²)`, even
/// degrees with the `1/(1+|a₀|)` weight on the middle slice.
pub fn check_coefficients(f: &TruncatedSeries) -> VerificationReport {
    let n = f.dim();
    let squares = squares_up_to(f);
    let sums = f.majorant_by_degree(&vec![1.0; n]).expect("matching dimension");
    let a0 = f.constant_term().norm();
    let slack = |v: f64| (f.table().len() + 8) as f64 * EPS * v.abs().max(1.0);
    let mut records = Vec::new();
    for degree in 1..=f.degree() {
        let k = (degree / 2) as usize;
        let (lhs, bound) = if degree % 2 == 1 {
            let head: f64 = squares[..=k].iter().sum();
            (sums[degree as usize], (n as f64).powf(degree as f64 / 2.0) * (1.0 - head))
        } else {
            let head: f64 = squares[..k].iter().sum();
            let bound = (n as f64).powi(k as i32) * (1.0 - head - squares[k] / (1.0 + a0));
            (sums[degree as usize], bound)
        };
        let err = slack(lhs) + slack(bound);
        records.push(Record {
            theorem: Tag::Lemma4,
            check: Check::Coefficients,
            n,
            cutoff: Some(degree),
            a0: Some(a0),
            x: 0.0,
            value: lhs,
            tail: err,
            bound,
            verdict: Verdict::at_most_within(lhs, 0.0, err, bound),
        });
    }
    VerificationReport::from_records(Tag::Lemma4, Check::Coefficients, n, None, Some(a0), records)
}

/// Uniform point in the polydisk of polyradius `radius`.
fn sample_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let rho = radius * rng.gen::<f64>().sqrt();
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(rho, theta)
        })
        .collect()
}

fn schwarz_pick_record(f: &TruncatedSeries, z: &[Complex64]) -> Result<Record> {
    let v = f.eval(z)?;
    let c = f.constant_term().norm();
    let rho = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let bound = (c + rho) / (1.0 + c * rho);
    let rounding = v.rounding + 8.0 * EPS * bound;
    Ok(Record {
        theorem: Tag::Lemma1,
        check: Check::SchwarzPick,
        n: f.dim(),
        cutoff: None,
        a0: Some(c),
        x: f.dim() as f64 * rho,
        value: v.value.norm(),
        tail: v.tail + rounding,
        bound,
        verdict: Verdict::at_most_within(v.value.norm(), v.tail, rounding, bound),
    })
}

/// `|f(z)| ≤ (|f(0)| + ‖z‖_∞)/(1 + |f(0)|‖z‖_∞)` at seeded random points
/// with `‖z‖_∞ ≤ 0.9`.
pub fn check_schwarz_pick(f: &TruncatedSeries, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<Complex64>> = (0..samples).map(|_| sample_point(&mut rng, f.dim(), 0.9)).collect();
    let records = points.par_iter().map(|z| schwarz_pick_record(f, z)).collect::<Result<Vec<_>>>()?;
    let c = f.constant_term().norm();
    Ok(VerificationReport::from_records(Tag::Lemma1, Check::SchwarzPick, f.dim(), None, Some(c), records))
}

/// Schwarz-Pick bound at one given point.
pub fn check_schwarz_pick_at(f: &TruncatedSeries, z: &[Complex64]) -> Result<Verdict> {
    Ok(schwarz_pick_record(f, z)?.verdict)
}

/// `|∂^β f(z)| ≤ β!(1 − |f(z)|²)(1 + ‖z‖_∞)^{|β| − N_β}/(1 − ‖z‖_∞²)^{|β|}`,
/// where `N_β` counts the nonzero entries of `β`.
pub fn check_derivative_bound(f: &TruncatedSeries, beta: &MultiIndex, z: &[Complex64]) -> Result<Record> {
    if beta.is_zero() {
        return derivative_record(f, None, beta, z);
    }
    derivative_record(f, Some(&f.partial_derivative(beta)?), beta, z)
}

fn derivative_record(
    f: &TruncatedSeries,
    derivative: Option<&TruncatedSeries>,
    beta: &MultiIndex,
    z: &[Complex64],
) -> Result<Record> {
    let rho = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if rho >= 1.0 {
        return Err(Error::Domain(format!("‖z‖∞ = {rho} must be below 1")));
    }
    let base = Record {
        theorem: Tag::Lemma2,
        check: Check::DerivativeBound,
        n: f.dim(),
        cutoff: Some(beta.degree()),
        a0: Some(f.constant_term().norm()),
        x: f.dim() as f64 * rho,
        value: 0.0,
        tail: 0.0,
        bound: 0.0,
        verdict: Verdict::Pass,
    };
    let Some(derivative) = derivative.filter(|_| !beta.is_zero()) else {
        return Ok(base);
    };
    let d = derivative.eval(z)?;
    let d_tail = f.partial_derivative_tail(beta, z, 0.5)?;
    let fz = f.eval(z)?;
    let k = beta.degree() as i32;
    let m = beta.support_size() as i32;
    let scale = beta.factorial() * (1.0 + rho).powi(k - m) / (1.0 - rho * rho).powi(k);
    let modulus = fz.value.norm();
    let bound = scale * (1.0 - modulus * modulus);
    // the bound decreases in |f(z)|, so an error in |f(z)| moves it down
    let shift = |e: f64| scale * (2.0 * modulus * e + e * e);
    let value = d.value.norm();
    let tail = d_tail + shift(fz.tail);
    let rounding = d.rounding + shift(fz.rounding) + 16.0 * EPS * (scale + value);
    Ok(Record {
        value,
        tail: tail + rounding,
        bound,
        verdict: Verdict::at_most_within(value, tail, rounding, bound),
        ..base
    })
}

/// Random polynomial of degree `degree` in `n` variables, scaled so that
/// its largest modulus over `torus_samples` seeded points of the unit torus
/// equals `target`.
pub fn random_contraction(n: usize, degree: u32, seed: u64, target: f64, torus_samples: usize) -> TruncatedSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(MultiIndex, Complex64)> = enumerate_up_to(n, degree)
        .into_iter()
        .map(|alpha| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (alpha, c)
        })
        .collect();
    let f = TruncatedSeries::polynomial(n, degree, terms).expect("indices in range");
    let sup = (0..torus_samples)
        .map(|_| {
            let z: Vec<Complex64> =
                (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
            f.eval(&z).expect("dimension").value.norm()
        })
        .fold(0.0, f64::max);
    f.scale(Complex64::new(target / sup, 0.0)).with_tail(TailBound::Exact)
}

/// The functions the lemma checks run on: the extremal family rescaled to
/// the unit polydisk, and seeded random contractions.
pub fn lemma_instances(n: usize, seed: u64, random: usize, degree: u32) -> Vec<(String, TruncatedSeries)> {
    let mut out = Vec::new();
    for form in [Form::Minus, Form::Plus] {
        for a in [0.0, 0.25, 0.5, 0.75, 0.9] {
            let w = ExtremalFunction::new(a, form, n).expect("valid parameter");
            out.push((format!("extremal-{form}-{a}"), w.to_series(degree).dilate(1.0 / n as f64)));
        }
    }
    for i in 0..random {
        let s = seed.wrapping_add(i as u64);
        out.push((format!("random-{i}"), random_contraction(n, 4, s, 0.9, 10_000)));
    }
    out
}

/// Runs a lemma tag on its standard instance set.
pub fn check_lemma(tag: Tag, n: usize, cutoff: u32, seed: u64, samples: usize) -> Result<VerificationReport> {
    if tag == Tag::Lemma5 {
        return check_refined_sum(n, cutoff, 60);
    }
    // equality cases need truncation error below rounding; low dimensions are cheap
    let degree = match n {
        1 => 400,
        2 => 120,
        _ => 60,
    };
    let instances = lemma_instances(n, seed, 10, degree);
    let check = match tag {
        Tag::Lemma1 => Check::SchwarzPick,
        Tag::Lemma2 => Check::DerivativeBound,
        Tag::Lemma4 => Check::Coefficients,
        other => return Err(Error::UnsupportedTag { tag: other.to_string(), operation: "lemma check" }),
    };
    let mut records = Vec::new();
    for (i, (_, f)) in instances.iter().enumerate() {
        let s = seed.wrapping_add(1000 + i as u64);
        match tag {
            Tag::Lemma1 => records.extend(check_schwarz_pick(f, samples, s)?.records),
            Tag::Lemma2 => {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let mut points: Vec<Vec<Complex64>> = (0..samples).map(|_| sample_point(&mut rng, n, 0.9)).collect();
                points.push(vec![Complex64::new(0.0, 0.0); n]);
                let betas: Vec<MultiIndex> = enumerate_up_to(n, 3).into_iter().skip(1).collect();
                let batch = betas
                    .par_iter()
                    .map(|b| {
                        let d = f.partial_derivative(b)?;
                        points.iter().map(|z| derivative_record(f, Some(&d), b, z)).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                records.extend(batch.into_iter().flatten());
            }
            _ => records.extend(check_coefficients(f).records),
        }
    }
    Ok(VerificationReport::from_records(tag, check, n, None, None, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for t in Tag::THEOREMS.into_iter().chain([Tag::Lemma1, Tag::Lemma2, Tag::Lemma4, Tag::Lemma5]) {
            assert_eq!(t.as_str().parse::<Tag>().unwrap(), t);
        }
        assert_eq!("bogus".parse::<Tag>(), Err(Error::UnknownTag("bogus".into())));
    }

    #[test]
    fn first_theorem_below_and_sharp_in_one_variable() {
        let r = check_below(Tag::T21a, 1, 1, 0.0, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin > 0.0);
        assert_eq!(r.records.len(), 11);
        let s = check_sharp(Tag::T21a, 1, 1, 0.0, 1e-2).unwrap();
        assert_eq!(s.verdict, Verdict::Pass, "{s:?}");
        assert!(s.witness.is_some());
    }

    #[test]
    fn explicit_sharp_value() {
        let x = (5f64.sqrt() - 2.0) * 1.01;
        let a: f64 = 0.999999;
        let v = TheoremCheck::new(Tag::T21a, 1, 1, 0.0).evaluate(a, x).unwrap();
        let expected = (a + x) / (1.0 + a * x) + (1.0 - a * a) * x / (1.0 - a * x);
        assert!(expected > 1.0);
        assert!((v.breakdown.modulus + v.breakdown.majorant - expected).abs() < 1e-14);
        assert!(v.value > 1.0);
    }

    #[test]
    fn third_theorem_below_in_two_variables() {
        let r = check_below(Tag::T23i, 2, 1, 0.0, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let far = check_below(Tag::T23i, 2, 1, 0.0, 0.49).unwrap();
        assert_eq!(far.verdict, Verdict::Pass);
        assert!(far.margin > r.margin);
    }

    #[test]
    fn sharp_probe_does_not_fire_inside() {
        for tag in Tag::THEOREMS {
            let c = TheoremCheck::new(tag, 1, 2, 0.5);
            let x = c.root().unwrap() * (1.0 - 1e-2);
            assert_ne!(c.probe_sharp(x).unwrap().verdict, Verdict::Pass, "{tag}");
        }
    }

    #[test]
    fn limit_polynomials_change_sign_at_the_root() {
        for tag in Tag::THEOREMS {
            for (cutoff, a0) in [(1, 0.0), (3, 0.5), (5, 0.9)] {
                let c = TheoremCheck::new(tag, 1, cutoff, a0);
                let root = c.root().unwrap();
                let (below, _) = tag.limit_polynomial(cutoff, a0, root * 0.99).unwrap();
                let (above, _) = tag.limit_polynomial(cutoff, a0, root * 1.01).unwrap();
                assert!(below < 0.0 && above > 0.0, "{tag} N={cutoff} a0={a0}: {below} {above}");
            }
        }
    }

    #[test]
    fn lemma_tags_are_rejected_for_theorem_checks() {
        assert!(matches!(check_below(Tag::Lemma1, 1, 1, 0.0, 1e-3), Err(Error::UnsupportedTag { .. })));
        assert!(check_below(Tag::T21a, 1, 1, 0.0, 0.6).is_err());
        assert!(check_sharp(Tag::T21a, 1, 1, 0.0, 0.3).is_err());
    }

    #[test]
    fn schwarz_pick_cases() {
        let c = TruncatedSeries::polynomial(2, 0, vec![(MultiIndex::zero(2), Complex64::new(0.3, 0.4))]).unwrap();
        assert_eq!(check_schwarz_pick(&c, 50, 1).unwrap().verdict, Verdict::Pass);
        let z1 = TruncatedSeries::polynomial(3, 1, vec![(MultiIndex::unit(3, 0), Complex64::new(1.0, 0.0))]).unwrap();
        for t in [0.1, 0.5, 0.89] {
            let z = [Complex64::new(t, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
            let r = schwarz_pick_record(&z1, &z).unwrap();
            assert_eq!(r.verdict, Verdict::Pass);
            assert!((r.value - r.bound).abs() < 1e-15);
        }
        let w = ExtremalFunction::new(0.5, Form::Plus, 1).unwrap().to_series(60);
        for t in [0.2, 0.6] {
            let r = schwarz_pick_record(&w, &[Complex64::new(t, 0.0)]).unwrap();
            assert_eq!(r.verdict, Verdict::Pass);
            assert!((r.value - r.bound).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_bound_cases() {
        let w = ExtremalFunction::new(0.5, Form::Minus, 1).unwrap().to_series(60);
        let r = check_derivative_bound(&w, &MultiIndex::new(vec![1]), &[Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.value - 0.75).abs() < 1e-15 && (r.bound - 0.75).abs() < 1e-15);
        let zero = check_derivative_bound(&w, &MultiIndex::zero(1), &[Complex64::new(0.3, 0.0)]).unwrap();
        assert_eq!(zero.verdict, Verdict::Pass);
        let w2 = ExtremalFunction::new(0.5, Form::Minus, 2).unwrap().to_series(40).dilate(0.5);
        let r = check_derivative_bound(&w2, &MultiIndex::new(vec![1, 1]), &[Complex64::new(0.0, 0.0); 2]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn coefficient_inequalities() {
        let w = ExtremalFunction::new(0.6, Form::Minus, 1).unwrap().to_series(21);
        let r = check_coefficients(&w);
        assert_eq!(r.verdict, Verdict::Pass);
        for rec in &r.records {
            assert!((rec.value - rec.bound).abs() < 1e-12, "degree {:?}", rec.cutoff);
        }
        let zero = check_coefficients(&TruncatedSeries::zeros(2, 5));
        assert_eq!(zero.verdict, Verdict::Pass);
        let odd = &zero.records[2];
        assert!((odd.bound - 2f64.powf(1.5)).abs() < 1e-12);
        let f = random_contraction(2, 4, 3, 0.9, 10_000);
        assert_eq!(check_coefficients(&f).verdict, Verdict::Pass);
    }

    #[test]
    fn reports_are_deterministic() {
        let f = random_contraction(2, 3, 11, 0.9, 2000);
        let a = check_schwarz_pick(&f, 40, 9).unwrap();
        let b = check_schwarz_pick(&random_contraction(2, 3, 11, 0.9, 2000), 40, 9).unwrap();
        assert_eq!(a, b);
    }
}
