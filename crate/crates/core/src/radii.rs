//! Radius equations in the variable `x = n·𝐫` and their certified roots.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::EPS;

/// Leading coefficient of the cubic for the squared-modulus functional
/// with fixed `|a₀|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CubicLeading {
    /// `1 − a₀³`
    Cube,
    /// `1 − a₀²`
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RadiusEquation {
    /// `2(1+x)x^N − (1−x)²`
    Psi { cutoff: u32 },
    /// `(1+x)x^N − (1−x)²`
    PsiPrime { cutoff: u32 },
    /// `x = 2 / (3 + a₀ + √5(1 + a₀))`
    RA0Closed { a0: f64 },
    /// `(1−a₀ᵖ)x³ − (1+2a₀)x² − 2x + 1` with `p` given by `leading`
    CubicA0 { a0: f64, leading: CubicLeading },
    /// `x = (√17 − 3)/4`
    Sqrt17Closed,
    /// `1 − 2x − x² − x³ − x⁴`
    Quartic,
    /// `(1+x)(1−2x)(1−x)^{N−1} − 2x^N`
    Tilde { cutoff: u32 },
    /// `(1+x)(1−2x)(1−x)^{N−1} − x^N`
    TildePrime { cutoff: u32 },
}

/// A bracket `[x_low, x_high]` whose endpoints carry opposite certified
/// signs. Closed-form families give a width-zero certificate; their signs
/// come from the defining polynomial just below and just above the value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootCertificate {
    pub x_low: f64,
    pub x_high: f64,
    pub residual_signs: (i8, i8),
    pub width: f64,
}

impl RootCertificate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_low + self.x_high)
    }
}

const SCAN_STEP: f64 = 1e-3;
const MIN_TOL: f64 = 1e-14;

impl RadiusEquation {
    pub fn family_name(&self) -> &'static str {
        match self {
            RadiusEquation::Psi { .. } => "psi",
            RadiusEquation::PsiPrime { .. } => "psi-prime",
            RadiusEquation::RA0Closed { .. } => "r-a0",
            RadiusEquation::CubicA0 { leading: CubicLeading::Cube, .. } => "cubic-a0",
            RadiusEquation::CubicA0 { leading: CubicLeading::Square, .. } => "cubic-a0-sq",
            RadiusEquation::Sqrt17Closed => "sqrt17",
            RadiusEquation::Quartic => "quartic",
            RadiusEquation::Tilde { .. } => "tilde",
            RadiusEquation::TildePrime { .. } => "tilde-prime",
        }
    }

    pub fn cutoff(&self) -> Option<u32> {
        match *self {
            RadiusEquation::Psi { cutoff }
            | RadiusEquation::PsiPrime { cutoff }
            | RadiusEquation::Tilde { cutoff }
            | RadiusEquation::TildePrime { cutoff } => Some(cutoff),
            _ => None,
        }
    }

    pub fn a0(&self) -> Option<f64> {
        match *self {
            RadiusEquation::RA0Closed { a0 } | RadiusEquation::CubicA0 { a0, .. } => Some(a0),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(cutoff) = self.cutoff() {
            if cutoff == 0 {
                return Err(Error::InvalidParameter("N must be at least 1".into()));
            }
        }
        if let Some(a0) = self.a0() {
            if !(0.0..1.0).contains(&a0) {
                return Err(Error::InvalidParameter(format!("a0 = {a0} is outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Closed value of `x`, for the two closed-form families.
    pub fn closed_form(&self) -> Option<f64> {
        match *self {
            RadiusEquation::RA0Closed { a0 } => Some(2.0 / (3.0 + a0 + 5f64.sqrt() * (1.0 + a0))),
            RadiusEquation::Sqrt17Closed => Some((17f64.sqrt() - 3.0) / 4.0),
            _ => None,
        }
    }

    /// The equation's left-hand side at `x` and a bound on its rounding
    /// error. Closed-form families use the polynomial whose smallest
    /// positive root is the closed value: `B̃₃(a₀, x)` and `1 − 3x − 2x²`.
    pub fn value(&self, x: f64) -> (f64, f64) {
        let (v, abs, depth) = match *self {
            RadiusEquation::Psi { cutoff } => {
                let p = 2.0 * (1.0 + x) * x.powi(cutoff as i32);
                let q = (1.0 - x) * (1.0 - x);
                (p - q, p.abs() + q.abs() + 2.0 * x.abs(), cutoff + 4)
            }
            RadiusEquation::PsiPrime { cutoff } => {
                let p = (1.0 + x) * x.powi(cutoff as i32);
                let q = (1.0 - x) * (1.0 - x);
                (p - q, p.abs() + q.abs() + 2.0 * x.abs(), cutoff + 4)
            }
            RadiusEquation::RA0Closed { a0 } => {
                let t = [(1.0 - a0 - a0 * a0) * x * x, -(3.0 + a0) * x, 1.0];
                (t.iter().sum(), t.iter().map(|v| v.abs()).sum(), 6)
            }
            RadiusEquation::CubicA0 { a0, leading } => {
                let lead = match leading {
                    CubicLeading::Cube => 1.0 - a0 * a0 * a0,
                    CubicLeading::Square => 1.0 - a0 * a0,
                };
                let t = [lead * x * x * x, -(1.0 + 2.0 * a0) * x * x, -2.0 * x, 1.0];
                (t.iter().sum(), t.iter().map(|v| v.abs()).sum(), 6)
            }
            RadiusEquation::Sqrt17Closed => {
                let t = [1.0, -3.0 * x, -2.0 * x * x];
                (t.iter().sum(), t.iter().map(|v| v.abs()).sum(), 4)
            }
            RadiusEquation::Quartic => {
                let t = [1.0, -2.0 * x, -x * x, -x.powi(3), -x.powi(4)];
                (t.iter().sum(), t.iter().map(|v| v.abs()).sum(), 6)
            }
            RadiusEquation::Tilde { cutoff } | RadiusEquation::TildePrime { cutoff } => {
                let c = if matches!(self, RadiusEquation::Tilde { .. }) { 2.0 } else { 1.0 };
                let p = (1.0 + x) * (1.0 - 2.0 * x) * (1.0 - x).powi(cutoff as i32 - 1);
                let q = c * x.powi(cutoff as i32);
                // relative condition of each factor, summed over the product
                let k = f64::from(cutoff);
                let kappa =
                    3.0 + (1.0 + 2.0 * x) / (1.0 - 2.0 * x).abs() + (k - 1.0) * (1.0 + (1.0 + x) / (1.0 - x).abs());
                (p - q, p.abs() * kappa + q.abs() * (k + 2.0), 2)
            }
        };
        (v, 2.0 * (depth as f64) * EPS * abs)
    }

    /// Sign of the equation at `x` when it exceeds the rounding slack.
    pub fn certified_sign(&self, x: f64) -> Option<i8> {
        let (v, slack) = self.value(x);
        if v > slack {
            Some(1)
        } else if v < -slack {
            Some(-1)
        } else {
            None
        }
    }

    /// Minimum positive root in `(0, 1)`, bracketed to width `tol`.
    pub fn solve(&self, tol: f64) -> Result<RootCertificate> {
        self.validate()?;
        if tol.is_nan() || tol < MIN_TOL {
            return Err(Error::InvalidParameter(format!("tolerance {tol} is below {MIN_TOL:e}")));
        }
        if let Some(x) = self.closed_form() {
            let below = self.certified_sign(x * (1.0 - 1e-9)).unwrap_or(0);
            let above = self.certified_sign(x * (1.0 + 1e-9)).unwrap_or(0);
            return Ok(RootCertificate { x_low: x, x_high: x, residual_signs: (below, above), width: 0.0 });
        }
        let no_root = || Error::NoRoot { family: self.family_name().to_string() };
        let mut lo = 0.0;
        let lo_sign = self.certified_sign(lo).ok_or_else(no_root)?;
        let mut hi = None;
        let steps = (1.0 / SCAN_STEP).round() as usize;
        for i in 1..steps {
            let x = i as f64 * SCAN_STEP;
            match self.certified_sign(x) {
                Some(s) if s == lo_sign => lo = x,
                Some(s) => {
                    hi = Some((x, s));
                    break;
                }
                None => {}
            }
        }
        let (mut hi, hi_sign) = hi.ok_or_else(no_root)?;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.certified_sign(mid) {
                Some(s) if s == lo_sign => lo = mid,
                Some(_) => hi = mid,
                None => {
                    // the midpoint sits in the rounding zone; close in from both ends
                    let width = hi - lo;
                    let mut moved = false;
                    for k in 2..=6 {
                        let step = width / f64::from(1u32 << k);
                        if self.certified_sign(lo + step) == Some(lo_sign) {
                            lo += step;
                            moved = true;
                        }
                        if self.certified_sign(hi - step) == Some(hi_sign) {
                            hi -= step;
                            moved = true;
                        }
                        if moved {
                            break;
                        }
                    }
                    if !moved {
                        break;
                    }
                }
            }
        }
        Ok(RootCertificate { x_low: lo, x_high: hi, residual_signs: (lo_sign, hi_sign), width: hi - lo })
    }

    /// `𝐫 = x/n` at the certificate midpoint.
    pub fn radius_in_r(&self, n: usize, tol: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(self.solve(tol)?.midpoint() / n as f64)
    }
}

impl fmt::Display for RadiusEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family_name())?;
        if let Some(n) = self.cutoff() {
            write!(f, "(N={n})")?;
        }
        if let Some(a0) = self.a0() {
            write!(f, "(a0={a0})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-13;

    fn root(eq: RadiusEquation) -> f64 {
        eq.solve(TOL).unwrap().midpoint()
    }

    #[test]
    fn classical_constants() {
        assert_abs_diff_eq!(root(RadiusEquation::Psi { cutoff: 1 }), 5f64.sqrt() - 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(root(RadiusEquation::PsiPrime { cutoff: 1 }), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(root(RadiusEquation::Quartic), 0.385795, epsilon = 5e-6);
        assert_abs_diff_eq!(root(RadiusEquation::Sqrt17Closed), (17f64.sqrt() - 3.0) / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(root(RadiusEquation::RA0Closed { a0: 0.0 }), (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cubic_at_zero_parameter() {
        for leading in [CubicLeading::Cube, CubicLeading::Square] {
            let x = root(RadiusEquation::CubicA0 { a0: 0.0, leading });
            assert!(x > 1.0 / 3.0 && x < 0.5);
            assert_abs_diff_eq!(x * x * x - x * x - 2.0 * x + 1.0, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(x, 0.4450418679, epsilon = 1e-9);
        }
    }

    #[test]
    fn radius_in_r_divides_by_dimension() {
        let r = RadiusEquation::Psi { cutoff: 1 }.radius_in_r(3, TOL).unwrap();
        assert_abs_diff_eq!(r, (5f64.sqrt() - 2.0) / 3.0, epsilon = 1e-11);
        let r = RadiusEquation::RA0Closed { a0: 0.0 }.radius_in_r(1, TOL).unwrap();
        assert_abs_diff_eq!(r, 0.381966, epsilon = 1e-6);
        let r = RadiusEquation::Sqrt17Closed.radius_in_r(2, TOL).unwrap();
        assert_abs_diff_eq!(r, (17f64.sqrt() - 3.0) / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn certificates_are_valid() {
        let mut eqs = vec![RadiusEquation::Quartic, RadiusEquation::Sqrt17Closed];
        for cutoff in 1..=8 {
            eqs.extend([
                RadiusEquation::Psi { cutoff },
                RadiusEquation::PsiPrime { cutoff },
                RadiusEquation::Tilde { cutoff },
                RadiusEquation::TildePrime { cutoff },
            ]);
        }
        for i in 0..10 {
            let a0 = i as f64 / 10.0;
            eqs.push(RadiusEquation::RA0Closed { a0 });
            eqs.push(RadiusEquation::CubicA0 { a0, leading: CubicLeading::Cube });
            eqs.push(RadiusEquation::CubicA0 { a0, leading: CubicLeading::Square });
        }
        for eq in eqs {
            let c = eq.solve(TOL).unwrap();
            assert!(c.residual_signs.0 * c.residual_signs.1 == -1, "{eq}");
            assert!(c.width <= TOL, "{eq}: width {}", c.width);
            if eq.closed_form().is_none() {
                assert_eq!(eq.certified_sign(c.x_low), Some(c.residual_signs.0));
                assert_eq!(eq.certified_sign(c.x_high), Some(c.residual_signs.1));
            }
        }
    }

    #[test]
    fn tilde_roots_are_minimal() {
        for cutoff in 1..=8 {
            for eq in [RadiusEquation::Tilde { cutoff }, RadiusEquation::TildePrime { cutoff }] {
                let c = eq.solve(TOL).unwrap();
                let mut x = 0.0;
                while x < c.x_low {
                    assert_eq!(eq.certified_sign(x), Some(c.residual_signs.0), "{eq} at {x}");
                    x += 1e-4;
                }
            }
        }
    }

    #[test]
    fn psi_increases_with_cutoff() {
        let roots: Vec<f64> = (1..=8).map(|cutoff| root(RadiusEquation::Psi { cutoff })).collect();
        assert!(roots.windows(2).all(|w| w[0] < w[1]), "{roots:?}");
    }

    #[test]
    fn squared_variants_have_larger_radii() {
        for cutoff in 1..=8 {
            assert!(root(RadiusEquation::PsiPrime { cutoff }) >= root(RadiusEquation::Psi { cutoff }));
            assert!(root(RadiusEquation::TildePrime { cutoff }) >= root(RadiusEquation::Tilde { cutoff }));
        }
    }

    #[test]
    fn parameter_and_tolerance_errors() {
        assert!(RadiusEquation::Psi { cutoff: 1 }.solve(1e-15).is_err());
        assert!(RadiusEquation::Psi { cutoff: 0 }.solve(TOL).is_err());
        assert!(RadiusEquation::RA0Closed { a0: 1.0 }.solve(TOL).is_err());
    }

    proptest! {
        #[test]
        fn a0_brackets(a0 in 0.0..0.999f64) {
            let r = root(RadiusEquation::RA0Closed { a0 });
            prop_assert!(r > 5f64.sqrt() - 2.0);
            for leading in [CubicLeading::Cube, CubicLeading::Square] {
                let x = root(RadiusEquation::CubicA0 { a0, leading });
                prop_assert!(x > 1.0 / 3.0 && x < 1.0 / (2.0 + a0), "{:?}: {}", leading, x);
            }
        }
    }
}
