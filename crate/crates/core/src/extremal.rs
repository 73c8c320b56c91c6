//! Möbius transforms of the linear form `s = z₁ + ⋯ + zₙ`.
//!
//! The minus form is `g(s) = (a − s)/(1 − a s)` and the plus form is
//! `g(s) = (a + s)/(1 + a s) = g₋(−s)`. Both are holomorphic and bounded by
//! one on the polydisk of polyradius `1/n`, where `|s| < 1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multiindex::{factorial_f64, multinomial_f64};
use crate::series::{TailBound, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    /// `(a − s)/(1 − a s)`
    Minus,
    /// `(a + s)/(1 + a s)`
    Plus,
}

impl Form {
    /// `+1` for the minus form, `−1` for the plus form: the plus form is the
    /// minus form composed with `s ↦ −s`.
    fn reflection(self) -> f64 {
        match self {
            Form::Minus => 1.0,
            Form::Plus => -1.0,
        }
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" | "-" => Ok(Form::Minus),
            "plus" | "+" => Ok(Form::Plus),
            other => Err(Error::InvalidParameter(format!("unknown form `{other}`"))),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Minus => "minus",
            Form::Plus => "plus",
        })
    }
}

/// Which diagonal point `z = (±r, …, ±r)` is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointSign {
    Plus,
    Minus,
}

impl PointSign {
    pub fn sign(self) -> f64 {
        match self {
            PointSign::Plus => 1.0,
            PointSign::Minus => -1.0,
        }
    }
}

impl fmt::Display for PointSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointSign::Plus => "+",
            PointSign::Minus => "-",
        })
    }
}

/// The function `z ↦ g(z₁ + ⋯ + zₙ)` for one of the two Möbius profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremalFunction {
    a: f64,
    form: Form,
    n: usize,
}

/// Exact values at a diagonal point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedValues {
    pub a: f64,
    pub form: Form,
    /// `s = σ·n·r`.
    pub s: f64,
    /// `g(s)`.
    pub value: f64,
    /// `Df(z) = s·g′(s)`.
    pub df: f64,
}

impl ClosedValues {
    /// `g^{(k)}(s)`.
    pub fn derivative(&self, k: u32) -> f64 {
        profile_derivative(self.a, self.form, k, self.s)
    }
}

fn profile_derivative(a: f64, form: Form, k: u32, s: f64) -> f64 {
    if k == 0 {
        let m = form.reflection();
        return (a - m * s) / (1.0 - m * a * s);
    }
    let base = -(1.0 - a * a) * factorial_f64(k) * a.powi(k as i32 - 1);
    match form {
        Form::Minus => base / (1.0 - a * s).powi(k as i32 + 1),
        Form::Plus => {
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * base / (1.0 + a * s).powi(k as i32 + 1)
        }
    }
}

impl ExtremalFunction {
    pub fn new(a: f64, form: Form, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!("a = {a} is outside [0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(ExtremalFunction { a, form, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Taylor coefficient `c_k` of the one-variable profile.
    pub fn profile_coefficient(&self, k: u32) -> f64 {
        if k == 0 {
            return self.a;
        }
        let magnitude = (1.0 - self.a * self.a) * self.a.powi(k as i32 - 1);
        match self.form {
            Form::Minus => -magnitude,
            Form::Plus if k % 2 == 1 => magnitude,
            Form::Plus => -magnitude,
        }
    }

    pub fn profile_coefficients(&self, degree: u32) -> Vec<f64> {
        (0..=degree).map(|k| self.profile_coefficient(k)).collect()
    }

    /// `g(s)` for complex `s`.
    pub fn profile(&self, s: Complex64) -> Complex64 {
        let m = self.form.reflection();
        (self.a - m * s) / (1.0 - m * self.a * s)
    }

    /// `f(z) = g(z₁ + ⋯ + zₙ)`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: z.len() });
        }
        Ok(self.profile(z.iter().sum()))
    }

    /// Tail descriptor of [`ExtremalFunction::to_series`]: the degree-`k`
    /// majorant is exactly `|c_k|·(Σρ)^k`.
    pub fn tail_bound(&self) -> TailBound {
        if self.a == 0.0 {
            TailBound::Geometric { scale: 1.0, base: 1.0 }
        } else {
            TailBound::Geometric { scale: (1.0 - self.a * self.a) / self.a, base: self.a }
        }
    }

    /// Multinomial expansion: the coefficient of `z^α` is
    /// `c_{|α|}·|α|!/α!`. At `a = 0` the function is linear, so any
    /// truncation of degree one or more is exact.
    pub fn to_series(&self, degree: u32) -> TruncatedSeries {
        let c = self.profile_coefficients(degree);
        let tail = if self.a == 0.0 && degree >= 1 { TailBound::Exact } else { self.tail_bound() };
        TruncatedSeries::from_fn(self.n, degree, tail, |alpha| {
            Complex64::new(c[alpha.degree() as usize] * multinomial_f64(alpha), 0.0)
        })
    }

    /// Values at `z = (σr, …, σr)`.
    pub fn closed_eval(&self, r: f64, point: PointSign) -> Result<ClosedValues> {
        let x = self.n as f64 * r;
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("n·r = {x} is outside [0, 1)")));
        }
        let s = point.sign() * x;
        Ok(ClosedValues {
            a: self.a,
            form: self.form,
            s,
            value: profile_derivative(self.a, self.form, 0, s),
            df: s * profile_derivative(self.a, self.form, 1, s),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coefficients_at_zero_parameter() {
        let w = ExtremalFunction::new(0.0, Form::Minus, 1).unwrap();
        assert_eq!(w.profile_coefficients(3), vec![0.0, -1.0, 0.0, 0.0]);
        let w = ExtremalFunction::new(0.0, Form::Plus, 1).unwrap();
        assert_eq!(w.profile_coefficients(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn coefficients_at_half() {
        let w = ExtremalFunction::new(0.5, Form::Minus, 1).unwrap();
        assert_eq!(&w.profile_coefficients(3)[1..], &[-0.75, -0.375, -0.1875]);
        let w = ExtremalFunction::new(0.5, Form::Plus, 1).unwrap();
        assert_eq!(&w.profile_coefficients(3)[1..], &[0.75, -0.375, 0.1875]);
    }

    #[test]
    fn coefficients_match_taylor_expansion() {
        // numerical Cauchy integral on a circle of radius 1/2 as the oracle
        for form in [Form::Minus, Form::Plus] {
            let w = ExtremalFunction::new(0.6, form, 1).unwrap();
            let m = 512;
            for k in 0..8u32 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    let s = Complex64::from_polar(0.5, theta);
                    acc += w.profile(s) * Complex64::from_polar(0.5f64.powi(-(k as i32)), -(k as f64) * theta);
                }
                let coeff = acc / m as f64;
                assert_abs_diff_eq!(coeff.re, w.profile_coefficient(k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn extremal_coefficient_equalities() {
        for i in 1..=9 {
            let a = i as f64 / 10.0;
            let c = ExtremalFunction::new(a, Form::Minus, 1).unwrap().profile_coefficients(21);
            for k in 0..=10usize {
                let head: f64 = c[..=k].iter().map(|v| v * v).sum();
                assert_abs_diff_eq!(c[2 * k + 1].abs(), 1.0 - head, epsilon = 1e-12);
                if k >= 1 {
                    let head: f64 = c[..k].iter().map(|v| v * v).sum();
                    let expected = 1.0 - head - c[k] * c[k] / (1.0 + c[0].abs());
                    assert_abs_diff_eq!(c[2 * k].abs(), expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn series_reduces_to_profile_in_one_variable() {
        let w = ExtremalFunction::new(0.3, Form::Plus, 1).unwrap();
        let s = w.to_series(6);
        for k in 0..=6u32 {
            assert_eq!(s.coeff(&MultiIndex::new(vec![k])).re, w.profile_coefficient(k));
        }
    }

    #[test]
    fn series_linear_case_and_cross_term() {
        let w = ExtremalFunction::new(0.0, Form::Minus, 2).unwrap();
        let s = w.to_series(2);
        for (alpha, c) in s.iter() {
            let expected = if alpha.degree() == 1 { -1.0 } else { 0.0 };
            assert_eq!(c.re, expected, "{alpha}");
        }
        let w = ExtremalFunction::new(0.5, Form::Minus, 2).unwrap();
        let s = w.to_series(4);
        assert_eq!(s.coeff(&MultiIndex::new(vec![1, 1])).re, 2.0 * w.profile_coefficient(2));
    }

    #[test]
    fn homogeneous_part_of_linear_extremal() {
        for (form, sign) in [(Form::Minus, -1.0), (Form::Plus, 1.0)] {
            let s = ExtremalFunction::new(0.0, form, 3).unwrap().to_series(3);
            let part = s.homogeneous_part(1).unwrap();
            assert_eq!(part.len(), 3);
            assert!(part.iter().all(|(_, c)| c.re == sign));
        }
    }

    #[test]
    fn series_matches_closed_form() {
        let w = ExtremalFunction::new(0.5, Form::Minus, 2).unwrap();
        let v = w.to_series(40).eval(&[Complex64::new(0.2, 0.0); 2]).unwrap();
        assert!((v.value.re - 0.125).abs() <= v.error() + 1e-15);
        for n in 1..=3 {
            for a in [0.0, 0.3, 0.7, 0.95] {
                for form in [Form::Minus, Form::Plus] {
                    let w = ExtremalFunction::new(a, form, n).unwrap();
                    let series = w.to_series(60);
                    for x in [0.1, 0.45, 0.8] {
                        let z = vec![Complex64::new(x / n as f64, 0.0); n];
                        let v = series.eval(&z).unwrap();
                        let exact = w.eval(&z).unwrap();
                        assert!((v.value - exact).norm() <= v.error() + 1e-10, "n={n} a={a} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_values() {
        let w = ExtremalFunction::new(0.5, Form::Minus, 2).unwrap();
        let v = w.closed_eval(0.1, PointSign::Minus).unwrap();
        assert_abs_diff_eq!(v.value.abs(), 0.7 / 1.1, epsilon = 1e-15);
        for form in [Form::Minus, Form::Plus] {
            let w = ExtremalFunction::new(0.0, form, 3).unwrap();
            for point in [PointSign::Plus, PointSign::Minus] {
                let v = w.closed_eval(0.2, point).unwrap();
                assert_abs_diff_eq!(v.value.abs(), 0.6, epsilon = 1e-15);
                assert_abs_diff_eq!(v.df.abs(), 0.6, epsilon = 1e-15);
            }
        }
        assert!(matches!(w.closed_eval(0.5, PointSign::Plus), Err(Error::Domain(_))));
        assert!(ExtremalFunction::new(1.0, Form::Plus, 1).is_err());
    }

    #[test]
    fn derivatives_at_origin_are_scaled_coefficients() {
        for form in [Form::Minus, Form::Plus] {
            let w = ExtremalFunction::new(0.4, form, 1).unwrap();
            let v = w.closed_eval(0.0, PointSign::Plus).unwrap();
            for k in 1..10 {
                assert_abs_diff_eq!(
                    v.derivative(k),
                    w.profile_coefficient(k) * factorial_f64(k),
                    epsilon = 1e-12 * factorial_f64(k)
                );
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for form in [Form::Minus, Form::Plus] {
            let w = ExtremalFunction::new(0.7, form, 1).unwrap();
            for s in [-0.4, 0.1, 0.5] {
                let h = 1e-5;
                for k in 1..4 {
                    let fd = (profile_derivative(0.7, form, k - 1, s + h)
                        - profile_derivative(0.7, form, k - 1, s - h))
                        / (2.0 * h);
                    let exact = profile_derivative(w.a(), form, k, s);
                    assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{form} k={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn series_derivatives_match_profile_derivatives() {
        let w = ExtremalFunction::new(0.3, Form::Minus, 2).unwrap();
        let series = w.to_series(50);
        let r = 0.15;
        let z = [Complex64::new(r, 0.0); 2];
        let closed = w.closed_eval(r, PointSign::Plus).unwrap();
        for beta in [vec![2, 0], vec![1, 1], vec![0, 2], vec![3, 0], vec![1, 2]] {
            let beta = MultiIndex::new(beta);
            let d = series.partial_derivative(&beta).unwrap().eval(&z).unwrap().value;
            let exact = closed.derivative(beta.degree());
            assert!((d.re - exact).abs() < 1e-10 * exact.abs().max(1.0), "{beta}");
        }
        let df = series.radial_derivative().eval(&z).unwrap().value;
        assert!((df.re - closed.df).abs() < 1e-12);
    }

    #[test]
    fn minus_form_at_negative_point_equals_plus_form_at_positive_point() {
        let m = ExtremalFunction::new(0.6, Form::Minus, 2).unwrap();
        let p = ExtremalFunction::new(0.6, Form::Plus, 2).unwrap();
        let vm = m.closed_eval(0.2, PointSign::Minus).unwrap();
        let vp = p.closed_eval(0.2, PointSign::Plus).unwrap();
        assert_abs_diff_eq!(vm.value, vp.value, epsilon = 1e-15);
        assert_abs_diff_eq!(vm.df, vp.df, epsilon = 1e-15);
    }

    #[test]
    fn modulus_stays_below_one() {
        for form in [Form::Minus, Form::Plus] {
            for a in [0.0, 0.5, 0.99] {
                let w = ExtremalFunction::new(a, form, 3).unwrap();
                for i in 0..100 {
                    let x = 0.99 * i as f64 / 100.0;
                    for p in [PointSign::Plus, PointSign::Minus] {
                        assert!(w.closed_eval(x / 3.0, p).unwrap().value.abs() < 1.0);
                    }
                }
            }
        }
    }
}
