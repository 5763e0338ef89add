//! Closed-form limit densities of the rescaled walks, their measure forms,
//! and the distance statistics used to compare them with simulations.
//!
//! The discrete-time walk with coin parameter a has X_t/t converging to the
//! Konno density sqrt(1-|a|^2)/(pi (1-x^2) sqrt(|a|^2-x^2)) on (-|a|, |a|);
//! the continuous-time walk converges to the arcsine density
//! 1/(pi sqrt(4 nu^2 - x^2)) on (-2 nu, 2 nu). Substituting z = x^2 turns
//! these even densities into measures on (0, |a|^2) and (on the unit scale)
//! (0, 1), with total masses 1/2 and nu.

use crate::error::{Error, Result};
use crate::state::EmpiricalCdf;

/// Absolute error target of the CDF quadrature.
pub const CDF_TOL: f64 = 1e-11;

/// A limit density (or measure weight) with closed-form value and
/// derivatives on the interior of its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityProfile {
    /// Discrete-time limit density on (-a_abs, a_abs).
    KonnoD { a_abs: f64 },
    /// Continuous-time limit density on (-2 nu, 2 nu).
    ArcsineC { nu: f64 },
    /// Measure form of KonnoD under z = x^2, on (0, a_abs^2), mass 1/2.
    MeasureD { a_abs: f64 },
    /// Measure form of ArcsineC on the unit scale, on (0, 1), mass nu.
    MeasureC { nu: f64 },
}

fn check_a_abs(a_abs: f64) -> Result<()> {
    if !(a_abs > 0.0 && a_abs < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a_abs",
            value: a_abs,
            expected: "a coin amplitude magnitude strictly inside (0, 1)",
        });
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: nu,
            expected: "a positive finite hopping rate",
        });
    }
    Ok(())
}

impl DensityProfile {
    pub fn konno_d(a_abs: f64) -> Result<Self> {
        check_a_abs(a_abs)?;
        Ok(Self::KonnoD { a_abs })
    }

    pub fn arcsine_c(nu: f64) -> Result<Self> {
        check_nu(nu)?;
        Ok(Self::ArcsineC { nu })
    }

    pub fn measure_d(a_abs: f64) -> Result<Self> {
        check_a_abs(a_abs)?;
        Ok(Self::MeasureD { a_abs })
    }

    pub fn measure_c(nu: f64) -> Result<Self> {
        check_nu(nu)?;
        Ok(Self::MeasureC { nu })
    }

    /// Open interval on which the density is finite and positive.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::KonnoD { a_abs } => (-a_abs, a_abs),
            Self::ArcsineC { nu } => (-2.0 * nu, 2.0 * nu),
            Self::MeasureD { a_abs } => (0.0, a_abs * a_abs),
            Self::MeasureC { .. } => (0.0, 1.0),
        }
    }

    /// Interval on which empirical and limit CDFs are compared. For the walk
    /// densities it covers the full range of X_t/t, not just the limit
    /// support; for the measures it is the support itself.
    pub fn comparison_interval(&self) -> (f64, f64) {
        match *self {
            Self::KonnoD { .. } => (-1.0, 1.0),
            _ => self.support(),
        }
    }

    fn in_support(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.support();
        if x > lo && x < hi {
            Ok(())
        } else {
            Err(Error::OutOfSupport { x, lo, hi })
        }
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Self::KonnoD { a_abs } => {
                let a2 = a_abs * a_abs;
                (1.0 - a2).sqrt() / (PI * (1.0 - x * x) * (a2 - x * x).sqrt())
            }
            Self::ArcsineC { nu } => 1.0 / (PI * (4.0 * nu * nu - x * x).sqrt()),
            Self::MeasureD { a_abs } => {
                let theta = a_abs * a_abs;
                (1.0 - theta).sqrt() / (2.0 * PI * (1.0 - x) * (x * (theta - x)).sqrt())
            }
            Self::MeasureC { nu } => nu / (PI * (x * (1.0 - x)).sqrt()),
        }
    }

    /// Logarithmic derivative d/dx ln(value) and its own derivative. Each
    /// profile is a product of powers of linear or quadratic factors, so
    /// these are short partial-fraction sums.
    fn log_deriv(&self, x: f64) -> (f64, f64) {
        match *self {
            Self::KonnoD { a_abs } => {
                let a2 = a_abs * a_abs;
                let u = 1.0 - x * x;
                let v = a2 - x * x;
                (
                    2.0 * x / u + x / v,
                    2.0 * (1.0 + x * x) / (u * u) + (a2 + x * x) / (v * v),
                )
            }
            Self::ArcsineC { nu } => {
                let v = 4.0 * nu * nu - x * x;
                (x / v, (4.0 * nu * nu + x * x) / (v * v))
            }
            Self::MeasureD { a_abs } => {
                let theta = a_abs * a_abs;
                let u = 1.0 - x;
                let v = theta - x;
                (
                    1.0 / u - 0.5 / x + 0.5 / v,
                    1.0 / (u * u) + 0.5 / (x * x) + 0.5 / (v * v),
                )
            }
            Self::MeasureC { .. } => {
                let u = 1.0 - x;
                (-0.5 / x + 0.5 / u, 0.5 / (x * x) + 0.5 / (u * u))
            }
        }
    }

    /// Density (or measure weight) at an interior point.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.in_support(x)?;
        Ok(self.value_unchecked(x))
    }

    /// First derivative of the density at an interior point.
    pub fn deriv1(&self, x: f64) -> Result<f64> {
        self.in_support(x)?;
        let (l, _) = self.log_deriv(x);
        Ok(self.value_unchecked(x) * l)
    }

    /// Second derivative of the density at an interior point.
    pub fn deriv2(&self, x: f64) -> Result<f64> {
        self.in_support(x)?;
        let (l, lp) = self.log_deriv(x);
        Ok(self.value_unchecked(x) * (l * l + lp))
    }

    /// Integrand after the substitution x = mid + half*sin(phi), which
    /// cancels the inverse-square-root endpoint singularities exactly.
    fn phi_integrand(&self, phi: f64) -> f64 {
        use std::f64::consts::PI;
        let (lo, hi) = self.support();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let x = mid + half * phi.sin();
        match *self {
            Self::KonnoD { a_abs } => {
                let a2 = a_abs * a_abs;
                (1.0 - a2).sqrt() / (PI * (1.0 - x * x))
            }
            Self::ArcsineC { .. } => 1.0 / PI,
            Self::MeasureD { a_abs } => {
                let theta = a_abs * a_abs;
                (1.0 - theta).sqrt() / (2.0 * PI * (1.0 - x))
            }
            Self::MeasureC { nu } => nu / PI,
        }
    }

    /// Unnormalized integral of the density from the lower support end to x.
    pub fn integral_from_lower_end(&self, x: f64) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        let phi_hi = if x >= hi {
            FRAC_PI_2
        } else {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            (((x - mid) / half).clamp(-1.0, 1.0)).asin()
        };
        adaptive_simpson(&|p| self.phi_integrand(p), -FRAC_PI_2, phi_hi, CDF_TOL)
    }

    /// Integral of the density over its whole support, by quadrature. The
    /// walk densities integrate to 1 and the measures to 1/2 and nu; tests
    /// hold the quadrature to those closed forms.
    pub fn total_mass(&self) -> f64 {
        self.integral_from_lower_end(self.support().1)
    }

    /// Distribution function normalized to [0, 1] (mass below x divided by
    /// the total mass). Clamps outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        (self.integral_from_lower_end(x) / self.total_mass()).clamp(0.0, 1.0)
    }
}

/// Kolmogorov-Smirnov statistic between an empirical step CDF and the
/// profile's CDF, maximized over an evenly spaced grid on the profile's
/// comparison interval.
pub fn ks_distance(empirical: &EmpiricalCdf, profile: &DensityProfile, grid: usize) -> f64 {
    assert!(grid >= 2, "need at least two grid points");
    let (lo, hi) = profile.comparison_interval();
    let mut worst = 0.0f64;
    for i in 0..grid {
        let x = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
        worst = worst.max((empirical.eval(x) - profile.cdf(x)).abs());
    }
    worst
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
