//! Second-order Fuchsian operators in canonical form and the concrete
//! instances satisfied by the limit densities.
//!
//! The four-singularity (Heun) canonical form is
//!     u'' + (gamma/z + delta/(z-1) + epsilon/(z-theta)) u'
//!        + (alpha beta z - q) / (z (z-1) (z-theta)) u = 0,
//! with the exponent-sum (Fuchs) relation alpha+beta+1 = gamma+delta+epsilon.
//! The three-singularity (Gauss hypergeometric) form is
//!     z (z-1) u'' + ((alpha+beta+1) z - gamma) u' + alpha beta u = 0.
//!
//! In the variable z = x^2 (unit-scaled for the continuous walk), the
//! discrete-time limit density satisfies a Heun equation with theta = |a|^2
//! and the continuous-time one a Gauss equation; the same holds for their
//! measure forms with shifted parameters. Residual scans turn those
//! statements into numerical checks, and the scaled-coefficient limit shows
//! the Heun instance degenerating onto the Gauss instance as the scale
//! parameter grows.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on the Fuchs relation at construction.
pub const FUCHS_TOL: f64 = 1e-12;
/// Evaluation margin around the regular singular points.
pub const SINGULARITY_MARGIN: f64 = 1e-12;
/// Additive guard in relative-residual denominators.
const RESIDUAL_FLOOR: f64 = 1e-300;

const ONE: C64 = C64::new(1.0, 0.0);

/// Parameters of the four-singularity canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunParams {
    alpha: C64,
    beta: C64,
    gamma: C64,
    delta: C64,
    epsilon: C64,
    q: C64,
    theta: C64,
}

impl HeunParams {
    /// Validates the Fuchs relation and the separation of singular points.
    pub fn new(
        alpha: C64,
        beta: C64,
        gamma: C64,
        delta: C64,
        epsilon: C64,
        q: C64,
        theta: C64,
    ) -> Result<Self> {
        let defect = (alpha + beta + ONE - gamma - delta - epsilon).norm();
        if defect > FUCHS_TOL {
            return Err(Error::InvalidParameter {
                name: "alpha+beta+1-gamma-delta-epsilon",
                value: defect,
                expected: "the exponent-sum relation to hold within 1e-12",
            });
        }
        if theta.norm() <= FUCHS_TOL || (theta - ONE).norm() <= FUCHS_TOL {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta.re,
                expected: "a singular point distinct from 0 and 1",
            });
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            q,
            theta,
        })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(
        alpha: C64,
        beta: C64,
        gamma: C64,
        delta: C64,
        epsilon: C64,
        q: C64,
        theta: C64,
    ) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            q,
            theta,
        }
    }

    fn real(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        epsilon: f64,
        q: f64,
        theta: f64,
    ) -> Result<Self> {
        Self::new(
            C64::new(alpha, 0.0),
            C64::new(beta, 0.0),
            C64::new(gamma, 0.0),
            C64::new(delta, 0.0),
            C64::new(epsilon, 0.0),
            C64::new(q, 0.0),
            C64::new(theta, 0.0),
        )
    }

    /// Instance annihilating the discrete-time limit density in z = x^2,
    /// with theta = a_abs^2.
    pub fn konno_density(a_abs: f64) -> Result<Self> {
        let theta = valid_theta(a_abs)?;
        Self::real(1.5, 1.5, 0.5, 2.0, 1.5, (2.0 * theta + 1.0) / 4.0, theta)
    }

    /// Instance annihilating the measure form of the discrete-time limit.
    pub fn konno_measure(a_abs: f64) -> Result<Self> {
        let theta = valid_theta(a_abs)?;
        Self::real(2.0, 2.0, 1.5, 2.0, 1.5, (3.0 * theta + 2.0) / 2.0, theta)
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }
    pub fn beta(&self) -> C64 {
        self.beta
    }
    pub fn gamma(&self) -> C64 {
        self.gamma
    }
    pub fn delta(&self) -> C64 {
        self.delta
    }
    pub fn epsilon(&self) -> C64 {
        self.epsilon
    }
    pub fn q(&self) -> C64 {
        self.q
    }
    pub fn theta(&self) -> C64 {
        self.theta
    }

    /// Returns a copy with a different accessory parameter (the Fuchs
    /// relation does not involve q). Used by sensitivity checks.
    pub fn with_q(&self, q: C64) -> Self {
        Self { q, ..*self }
    }

    fn check_z(&self, z: C64) -> Result<()> {
        for s in [C64::new(0.0, 0.0), ONE, self.theta] {
            if (z - s).norm() <= SINGULARITY_MARGIN {
                return Err(Error::SingularPoint {
                    z,
                    singularity: s,
                    margin: SINGULARITY_MARGIN,
                });
            }
        }
        Ok(())
    }

    /// The three additive terms of the operator applied to (u, u', u'').
    pub fn terms(&self, u: C64, u1: C64, u2: C64, z: C64) -> Result<[C64; 3]> {
        self.check_z(z)?;
        let c1 = self.gamma / z + self.delta / (z - ONE) + self.epsilon / (z - self.theta);
        let c0 = (self.alpha * self.beta * z - self.q) / (z * (z - ONE) * (z - self.theta));
        Ok([u2, c1 * u1, c0 * u])
    }

    /// Applies the operator; zero for an exact solution.
    pub fn apply(&self, u: C64, u1: C64, u2: C64, z: C64) -> Result<C64> {
        let [t2, t1, t0] = self.terms(u, u1, u2, z)?;
        Ok(t2 + t1 + t0)
    }
}

fn valid_theta(a_abs: f64) -> Result<f64> {
    if !(a_abs > 0.0 && a_abs < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a_abs",
            value: a_abs,
            expected: "a coin amplitude magnitude strictly inside (0, 1)",
        });
    }
    Ok(a_abs * a_abs)
}

/// Parameters of the three-singularity canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussParams {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

impl GaussParams {
    pub fn new(alpha: C64, beta: C64, gamma: C64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Instance annihilating the continuous-time limit density on the unit
    /// scale z = (x / 2 nu)^2.
    pub fn arcsine_density() -> Self {
        Self::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0))
    }

    /// Instance annihilating the measure form of the continuous-time limit.
    pub fn arcsine_measure() -> Self {
        Self::new(ONE, ONE, C64::new(1.5, 0.0))
    }

    fn check_z(&self, z: C64) -> Result<()> {
        for s in [C64::new(0.0, 0.0), ONE] {
            if (z - s).norm() <= SINGULARITY_MARGIN {
                return Err(Error::SingularPoint {
                    z,
                    singularity: s,
                    margin: SINGULARITY_MARGIN,
                });
            }
        }
        Ok(())
    }

    /// The three additive terms of the operator applied to (u, u', u'').
    pub fn terms(&self, u: C64, u1: C64, u2: C64, z: C64) -> Result<[C64; 3]> {
        self.check_z(z)?;
        Ok([
            z * (z - ONE) * u2,
            ((self.alpha + self.beta + ONE) * z - self.gamma) * u1,
            self.alpha * self.beta * u,
        ])
    }

    pub fn apply(&self, u: C64, u1: C64, u2: C64, z: C64) -> Result<C64> {
        let [t2, t1, t0] = self.terms(u, u1, u2, z)?;
        Ok(t2 + t1 + t0)
    }
}

/// Either canonical operator, for scan plumbing that works on both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FuchsianEquation {
    Heun(HeunParams),
    Gauss(GaussParams),
}

impl FuchsianEquation {
    pub fn terms(&self, u: C64, u1: C64, u2: C64, z: C64) -> Result<[C64; 3]> {
        match self {
            Self::Heun(p) => p.terms(u, u1, u2, z),
            Self::Gauss(p) => p.terms(u, u1, u2, z),
        }
    }
}

/// A closed-form solution together with its first two derivatives.
///
/// Each one is a product of powers of z, 1-z, theta-z, so the derivatives
/// come from short partial-fraction logarithmic derivatives and evaluation
/// extends off the real axis (principal branches).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolutionBundle {
    /// Discrete-time limit density in z: sqrt(1-theta)/(pi (1-z) sqrt(theta-z)).
    KonnoDensity { theta: f64 },
    /// Continuous-time limit density on the unit scale: 1/(2 nu pi sqrt(1-z)).
    ArcsineDensity { nu: f64 },
    /// Measure form, discrete: sqrt(1-theta)/(2 pi (1-z) sqrt(z (theta-z))).
    KonnoMeasure { theta: f64 },
    /// Measure form, continuous: nu/(pi sqrt(z (1-z))).
    ArcsineMeasure { nu: f64 },
}

impl SolutionBundle {
    /// Solution value at z.
    pub fn value(&self, z: C64) -> C64 {
        use std::f64::consts::PI;
        match *self {
            Self::KonnoDensity { theta } => {
                (1.0 - theta).sqrt() / PI / ((ONE - z) * (C64::new(theta, 0.0) - z).powf(0.5))
            }
            Self::ArcsineDensity { nu } => 1.0 / (2.0 * nu * PI) * (ONE - z).powf(-0.5),
            Self::KonnoMeasure { theta } => {
                (1.0 - theta).sqrt()
                    / (2.0 * PI)
                    / ((ONE - z) * (z * (C64::new(theta, 0.0) - z)).powf(0.5))
            }
            Self::ArcsineMeasure { nu } => nu / PI * (z * (ONE - z)).powf(-0.5),
        }
    }

    /// Logarithmic derivative and its derivative, both rational in z.
    fn log_deriv(&self, z: C64) -> (C64, C64) {
        match *self {
            Self::KonnoDensity { theta } => {
                let u = ONE - z;
                let v = C64::new(theta, 0.0) - z;
                (1.0 / u + 0.5 / v, 1.0 / (u * u) + 0.5 / (v * v))
            }
            Self::ArcsineDensity { .. } => {
                let u = ONE - z;
                (0.5 / u, 0.5 / (u * u))
            }
            Self::KonnoMeasure { theta } => {
                let u = ONE - z;
                let v = C64::new(theta, 0.0) - z;
                (
                    1.0 / u - 0.5 / z + 0.5 / v,
                    1.0 / (u * u) + 0.5 / (z * z) + 0.5 / (v * v),
                )
            }
            Self::ArcsineMeasure { .. } => {
                let u = ONE - z;
                (-0.5 / z + 0.5 / u, 0.5 / (z * z) + 0.5 / (u * u))
            }
        }
    }

    /// (value, first, second derivative) at z.
    pub fn eval(&self, z: C64) -> [C64; 3] {
        let u = self.value(z);
        let (l, lp) = self.log_deriv(z);
        [u, u * l, u * (l * l + lp)]
    }

    /// (value, first, second derivative) with the derivatives from 4th-order
    /// central finite differences of the value. The independent route for
    /// cross-checking the analytic bundle.
    pub fn eval_fd(&self, z: C64, step: f64) -> [C64; 3] {
        let h = C64::new(step, 0.0);
        let f2p = self.value(z + 2.0 * h);
        let f1p = self.value(z + h);
        let f0 = self.value(z);
        let f1m = self.value(z - h);
        let f2m = self.value(z - 2.0 * h);
        let d1 = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * step);
        let d2 = (-f2p + 16.0 * f1p - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * step * step);
        [f0, d1, d2]
    }
}

/// Scale-free residual of one operator application: |sum| over the summed
/// magnitudes of the three terms.
pub fn relative_residual(terms: [C64; 3]) -> f64 {
    let [t2, t1, t0] = terms;
    (t2 + t1 + t0).norm() / (t2.norm() + t1.norm() + t0.norm() + RESIDUAL_FLOOR)
}

/// Chebyshev-distributed sample points on the open interval (lo, hi); the
/// nodes cluster toward the endpoints without touching them.
fn chebyshev_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    use std::f64::consts::PI;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..n).map(move |k| mid + half * (PI * (2.0 * k as f64 + 1.0) / (2.0 * n as f64)).cos())
}

/// Max relative residual of the bundle under the equation over n Chebyshev
/// points in (lo, hi), using the analytic derivative bundle.
pub fn residual_scan(
    eq: &FuchsianEquation,
    bundle: &SolutionBundle,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<f64> {
    scan_impl(eq, bundle, lo, hi, n, None)
}

/// Same scan with the derivatives replaced by finite differences of the
/// closed-form value (independent of the analytic derivative route).
pub fn residual_scan_fd(
    eq: &FuchsianEquation,
    bundle: &SolutionBundle,
    lo: f64,
    hi: f64,
    n: usize,
    step: f64,
) -> Result<f64> {
    scan_impl(eq, bundle, lo, hi, n, Some(step))
}

fn scan_impl(
    eq: &FuchsianEquation,
    bundle: &SolutionBundle,
    lo: f64,
    hi: f64,
    n: usize,
    fd_step: Option<f64>,
) -> Result<f64> {
    assert!(lo < hi, "empty scan interval");
    assert!(n >= 1, "need at least one sample point");
    let mut worst = 0.0f64;
    for x in chebyshev_points(lo, hi, n) {
        let z = C64::new(x, 0.0);
        let [u, u1, u2] = match fd_step {
            None => bundle.eval(z),
            Some(h) => bundle.eval_fd(z, h),
        };
        worst = worst.max(relative_residual(eq.terms(u, u1, u2, z)?));
    }
    Ok(worst)
}

/// Coefficient polynomials (ascending powers of t) of the scaled equation
/// obtained from the discrete-density instance by z = t/tau with
/// theta = 1/tau, cleared of denominators and scaled by 4:
///     c2(t) v'' + c1(t) v' + c0(t) v = 0,
///     c2 = 4 t (1-t) (1 - t/tau),
///     c1 = 2 - (10/tau + 8) t + (16/tau) t^2,
///     c0 = -(2/tau + 1) + (9/tau) t.
/// tau may be infinite; 1/tau is then exactly zero and the polynomials are
/// the confluent limit before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledHeunCoefficients {
    tau: f64,
    c2: [f64; 4],
    c1: [f64; 3],
    c0: [f64; 2],
}

/// Builds the scaled coefficients for tau > 1 (infinity allowed).
pub fn scaled_heun(tau: f64) -> Result<ScaledHeunCoefficients> {
    if tau.is_nan() || tau <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            expected: "a scale parameter greater than 1",
        });
    }
    let r = 1.0 / tau;
    Ok(ScaledHeunCoefficients {
        tau,
        c2: [0.0, 4.0, -4.0 * (1.0 + r), 4.0 * r],
        c1: [2.0, -(10.0 * r + 8.0), 16.0 * r],
        c0: [-(2.0 * r + 1.0), 9.0 * r],
    })
}

fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

impl ScaledHeunCoefficients {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Squared coin amplitude tied to the scale: |a|^2 = 1/tau.
    pub fn a_abs2(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn c2(&self) -> [f64; 4] {
        self.c2
    }
    pub fn c1(&self) -> [f64; 3] {
        self.c1
    }
    pub fn c0(&self) -> [f64; 2] {
        self.c0
    }

    /// Coefficient values at t after normalizing the v'' coefficient to
    /// t(t-1): returns (t(t-1), c1n(t), c0n(t)).
    pub fn normalized_at(&self, t: f64) -> (f64, f64, f64) {
        let lead = t * (t - 1.0);
        let f = lead / poly_eval(&self.c2, t);
        (lead, f * poly_eval(&self.c1, t), f * poly_eval(&self.c0, t))
    }

    /// At infinite tau the normalization factor is the constant -1/4, so the
    /// normalized coefficients are again polynomials; None at finite tau.
    pub fn normalized_polys(&self) -> Option<([f64; 3], [f64; 2])> {
        if !self.tau.is_infinite() {
            return None;
        }
        Some((self.c1.map(|c| -0.25 * c), self.c0.map(|c| -0.25 * c)))
    }
}

/// Normalized coefficient values of the three-singularity target at t:
/// (t(t-1), 2t - 1/2, 1/4), the arcsine-density instance's coefficients.
pub fn confluent_limit_at(t: f64) -> (f64, f64, f64) {
    (t * (t - 1.0), 2.0 * t - 0.5, 0.25)
}

/// Max over n evenly spaced points of the deviation between the normalized
/// scaled coefficients and the confluent limit.
pub fn confluence_error(tau: f64, lo: f64, hi: f64, n: usize) -> Result<f64> {
    assert!(
        n >= 2 && lo < hi && lo > 0.0 && hi < 1.0,
        "grid must sit inside (0, 1)"
    );
    let c = scaled_heun(tau)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let (_, c1n, c0n) = c.normalized_at(t);
        let (_, l1, l0) = confluent_limit_at(t);
        worst = worst.max((c1n - l1).abs().max((c0n - l0).abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    const SCAN_N: usize = 100;
    const MARGIN: f64 = 1e-3;
    const ANALYTIC_TOL: f64 = 1e-9;
    const FD_TOL: f64 = 1e-5;
    const FD_STEP: f64 = 1e-4;
    const FD_MARGIN: f64 = 1e-2;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn density_instance_parameters_at_the_symmetric_coin() {
        let p = HeunParams::konno_density(FRAC_1_SQRT_2).unwrap();
        assert_relative_eq!(p.alpha().re, 1.5);
        assert_relative_eq!(p.beta().re, 1.5);
        assert_relative_eq!(p.gamma().re, 0.5);
        assert_relative_eq!(p.delta().re, 2.0);
        assert_relative_eq!(p.epsilon().re, 1.5);
        assert_relative_eq!(p.q().re, 0.5, max_relative = 1e-15);
        assert_relative_eq!(p.theta().re, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn measure_instance_accessory_parameter() {
        let p = HeunParams::konno_measure(0.6).unwrap();
        assert_relative_eq!(p.q().re, (3.0 * 0.36 + 2.0) / 2.0, max_relative = 1e-15);
        assert_relative_eq!(p.theta().re, 0.36, max_relative = 1e-15);
    }

    #[test]
    fn fuchs_relation_violations_are_rejected() {
        let err =
            HeunParams::new(r(1.5), r(1.5), r(0.5), r(2.0), r(1.6), r(0.5), r(0.5)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
        assert!(HeunParams::new(r(1.5), r(1.5), r(0.5), r(2.0), r(1.5), r(0.5), r(0.0)).is_err());
        assert!(HeunParams::new(r(1.5), r(1.5), r(0.5), r(2.0), r(1.5), r(0.5), r(1.0)).is_err());
    }

    #[test]
    fn zero_function_is_annihilated_everywhere() {
        let p = HeunParams::konno_density(0.5).unwrap();
        let zero = C64::new(0.0, 0.0);
        for &x in &[0.07, 0.2, 0.9, -3.0] {
            assert_eq!(p.apply(zero, zero, zero, r(x)).unwrap(), zero);
        }
    }

    #[test]
    fn evaluation_at_singular_points_is_refused() {
        let p = HeunParams::konno_density(0.5).unwrap();
        for &s in &[0.0, 1.0, 0.25] {
            let err = p.apply(r(1.0), r(0.0), r(0.0), r(s)).unwrap_err();
            assert!(matches!(err, Error::SingularPoint { .. }));
        }
        assert!(p.apply(r(1.0), r(0.0), r(0.0), r(1e-13)).is_err());
        let g = GaussParams::arcsine_density();
        assert!(g.apply(r(1.0), r(0.0), r(0.0), r(1.0)).is_err());
    }

    #[test]
    fn density_bundles_solve_their_equations() {
        for &theta in &[0.25f64, 0.5, 0.75] {
            let a = theta.sqrt();
            let eq = FuchsianEquation::Heun(HeunParams::konno_density(a).unwrap());
            let bundle = SolutionBundle::KonnoDensity { theta };
            let res = residual_scan(&eq, &bundle, MARGIN, theta - MARGIN, SCAN_N).unwrap();
            assert!(res <= ANALYTIC_TOL, "theta = {theta}: residual {res:.3e}");
        }
        let eq = FuchsianEquation::Gauss(GaussParams::arcsine_density());
        let bundle = SolutionBundle::ArcsineDensity {
            nu: 0.5 * FRAC_1_SQRT_2,
        };
        let res = residual_scan(&eq, &bundle, MARGIN, 1.0 - MARGIN, SCAN_N).unwrap();
        assert!(res <= ANALYTIC_TOL, "residual {res:.3e}");
    }

    #[test]
    fn measure_bundles_solve_their_equations() {
        for &theta in &[0.25f64, 0.5, 0.75] {
            let a = theta.sqrt();
            let eq = FuchsianEquation::Heun(HeunParams::konno_measure(a).unwrap());
            let bundle = SolutionBundle::KonnoMeasure { theta };
            let res = residual_scan(&eq, &bundle, MARGIN, theta - MARGIN, SCAN_N).unwrap();
            assert!(res <= ANALYTIC_TOL, "theta = {theta}: residual {res:.3e}");
        }
        let eq = FuchsianEquation::Gauss(GaussParams::arcsine_measure());
        let bundle = SolutionBundle::ArcsineMeasure { nu: 0.4 };
        let res = residual_scan(&eq, &bundle, MARGIN, 1.0 - MARGIN, SCAN_N).unwrap();
        assert!(res <= ANALYTIC_TOL, "residual {res:.3e}");
    }

    #[test]
    fn density_bundle_continues_past_its_support() {
        // Between theta and 1 the closed form turns complex (the square
        // root's argument goes negative) but still solves the equation.
        let theta = 0.5f64;
        let eq = FuchsianEquation::Heun(HeunParams::konno_density(theta.sqrt()).unwrap());
        let bundle = SolutionBundle::KonnoDensity { theta };
        let res = residual_scan(&eq, &bundle, theta + MARGIN, 1.0 - MARGIN, SCAN_N).unwrap();
        assert!(res <= ANALYTIC_TOL, "residual {res:.3e}");
        let sample = bundle.value(r(0.75));
        assert!(sample.im.abs() > 1e-3, "continuation should be complex");
    }

    #[test]
    fn finite_difference_route_agrees_with_the_analytic_bundles() {
        let cases: Vec<(FuchsianEquation, SolutionBundle, f64)> = vec![
            (
                FuchsianEquation::Heun(HeunParams::konno_density(0.5f64.sqrt()).unwrap()),
                SolutionBundle::KonnoDensity { theta: 0.5 },
                0.5,
            ),
            (
                FuchsianEquation::Heun(HeunParams::konno_measure(0.5f64.sqrt()).unwrap()),
                SolutionBundle::KonnoMeasure { theta: 0.5 },
                0.5,
            ),
            (
                FuchsianEquation::Gauss(GaussParams::arcsine_density()),
                SolutionBundle::ArcsineDensity { nu: 0.3 },
                1.0,
            ),
            (
                FuchsianEquation::Gauss(GaussParams::arcsine_measure()),
                SolutionBundle::ArcsineMeasure { nu: 0.7 },
                1.0,
            ),
        ];
        for (eq, bundle, hi) in &cases {
            let res =
                residual_scan_fd(eq, bundle, FD_MARGIN, hi - FD_MARGIN, SCAN_N, FD_STEP).unwrap();
            assert!(res <= FD_TOL, "{bundle:?}: FD residual {res:.3e}");
        }
    }

    #[test]
    fn perturbed_parameters_are_detected() {
        let theta = 0.5f64;
        let base = HeunParams::konno_density(theta.sqrt()).unwrap();
        let bundle = SolutionBundle::KonnoDensity { theta };
        let scan = |p: HeunParams| {
            residual_scan(
                &FuchsianEquation::Heun(p),
                &bundle,
                MARGIN,
                theta - MARGIN,
                SCAN_N,
            )
            .unwrap()
        };
        let d = r(0.01);
        let perturbed = [
            HeunParams::unchecked(
                base.alpha + d,
                base.beta,
                base.gamma,
                base.delta,
                base.epsilon,
                base.q,
                base.theta,
            ),
            HeunParams::unchecked(
                base.alpha,
                base.beta + d,
                base.gamma,
                base.delta,
                base.epsilon,
                base.q,
                base.theta,
            ),
            HeunParams::unchecked(
                base.alpha,
                base.beta,
                base.gamma + d,
                base.delta,
                base.epsilon,
                base.q,
                base.theta,
            ),
            HeunParams::unchecked(
                base.alpha,
                base.beta,
                base.gamma,
                base.delta + d,
                base.epsilon,
                base.q,
                base.theta,
            ),
            HeunParams::unchecked(
                base.alpha,
                base.beta,
                base.gamma,
                base.delta,
                base.epsilon + d,
                base.q,
                base.theta,
            ),
            base.with_q(base.q + d),
            HeunParams::unchecked(
                base.alpha,
                base.beta,
                base.gamma,
                base.delta,
                base.epsilon,
                base.q,
                base.theta + d,
            ),
        ];
        for p in perturbed {
            let res = scan(p);
            assert!(
                res > 1e-4,
                "perturbation went undetected: residual {res:.3e}"
            );
        }

        let gbundle = SolutionBundle::ArcsineDensity { nu: 0.4 };
        let gbase = GaussParams::arcsine_density();
        for idx in 0..3 {
            let mut p = gbase;
            match idx {
                0 => p.alpha += d,
                1 => p.beta += d,
                _ => p.gamma += d,
            }
            let res = residual_scan(
                &FuchsianEquation::Gauss(p),
                &gbundle,
                MARGIN,
                1.0 - MARGIN,
                SCAN_N,
            )
            .unwrap();
            assert!(
                res > 1e-4,
                "perturbation went undetected: residual {res:.3e}"
            );
        }
    }

    #[test]
    fn scaled_coefficients_match_the_cleared_operator() {
        // Independent route: clear denominators of the density instance at
        // z = t/tau with theta = 1/tau, scale by 4, and compare values.
        let tau = 50.0;
        let c = scaled_heun(tau).unwrap();
        let p = HeunParams::konno_density((1.0 / tau).sqrt()).unwrap();
        let (al, be, ga, de, ep, q) = (
            p.alpha().re,
            p.beta().re,
            p.gamma().re,
            p.delta().re,
            p.epsilon().re,
            p.q().re,
        );
        let th = 1.0 / tau;
        for &t in &[0.1, 0.37, 0.52, 0.81, 0.99] {
            let z = t / tau;
            let want2 = 4.0 * z * (z - 1.0) * (z - th) * tau * tau;
            let want1 =
                4.0 * (ga * (z - 1.0) * (z - th) + de * z * (z - th) + ep * z * (z - 1.0)) * tau;
            let want0 = 4.0 * (al * be * z - q);
            assert_relative_eq!(poly_eval(&c.c2(), t), want2, max_relative = 1e-12);
            assert_relative_eq!(poly_eval(&c.c1(), t), want1, max_relative = 1e-12);
            assert_relative_eq!(poly_eval(&c.c0(), t), want0, max_relative = 1e-12);
        }
        // Spot-check the stated lowest-order coefficients.
        assert_relative_eq!(c.c0()[0], -(2.0 / tau + 1.0));
        assert_relative_eq!(c.c0()[1], 9.0 / tau);
    }

    #[test]
    fn infinite_scale_reaches_the_limit_coefficients_exactly() {
        let c = scaled_heun(f64::INFINITY).unwrap();
        let (c1n, c0n) = c.normalized_polys().unwrap();
        assert_eq!(c1n, [-0.5, 2.0, 0.0]);
        assert_eq!(c0n, [0.25, 0.0]);
        for &t in &[0.1, 0.33, 0.5, 0.77] {
            let (lead, v1, v0) = c.normalized_at(t);
            let (wlead, w1, w0) = confluent_limit_at(t);
            assert_eq!(lead, wlead);
            assert_abs_diff_eq!(v1, w1, epsilon = 1e-15);
            assert_abs_diff_eq!(v0, w0, epsilon = 1e-15);
        }
        assert!(scaled_heun(f64::INFINITY)
            .unwrap()
            .normalized_polys()
            .is_some());
        assert!(scaled_heun(100.0).unwrap().normalized_polys().is_none());
    }

    #[test]
    fn confluence_error_shrinks_like_one_over_tau() {
        let errs: Vec<f64> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&tau| confluence_error(tau, 0.05, 0.95, 181).unwrap())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (5.0..=20.0).contains(&ratio),
                "decade ratio {ratio:.2} outside [5, 20]: {errs:?}"
            );
        }
        assert_eq!(
            confluence_error(f64::INFINITY, 0.05, 0.95, 181).unwrap(),
            0.0
        );
    }

    proptest! {
        // Completing epsilon from the exponent-sum relation always builds a
        // valid parameter set; breaking it beyond tolerance never does.
        #[test]
        fn fuchs_completion_validates_and_violation_rejects(
            alpha in -3.0..3.0f64,
            beta in -3.0..3.0f64,
            gamma in -3.0..3.0f64,
            delta in -3.0..3.0f64,
            q in -2.0..2.0f64,
            theta in 0.05..0.95f64,
            bump in 1e-6..1.0f64,
        ) {
            let epsilon = alpha + beta + 1.0 - gamma - delta;
            let ok = HeunParams::new(r(alpha), r(beta), r(gamma), r(delta), r(epsilon), r(q), r(theta));
            prop_assert!(ok.is_ok());
            let bad = HeunParams::new(r(alpha), r(beta), r(gamma), r(delta), r(epsilon + bump), r(q), r(theta));
            prop_assert!(bad.is_err());
        }

        // The operator is linear in the solution bundle.
        #[test]
        fn operator_is_linear(
            scale in 0.1..10.0f64,
            x in 0.05..0.2f64,
        ) {
            let p = HeunParams::konno_density(0.5f64.sqrt()).unwrap();
            let b = SolutionBundle::KonnoMeasure { theta: 0.3 };
            let [u, u1, u2] = b.eval(r(x));
            let one = p.apply(u, u1, u2, r(x)).unwrap();
            let scaled = p.apply(scale * u, scale * u1, scale * u2, r(x)).unwrap();
            prop_assert!((scaled - scale * one).norm() <= 1e-12 * (1.0 + scaled.norm()));
        }
    }
}
