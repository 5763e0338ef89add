//! One-particle elliptic quantum Hamiltonian whose eigenfunction is a gauge
//! transform of the discrete-time limit density.
//!
//! The Hamiltonian is H = -d^2/dx^2 + sum_j l_j (l_j + 1) wp(x + w_j) with
//! shifts (0, w1, w2, w3). On the lattice solved from theta = |a|^2 the
//! function g(x) = u(z(x)) (z-1)^(3/4) (z-theta)^(1/2), built from the Heun
//! solution u through the elliptic coordinate
//!     z(x) = (wp(x) - e1)/(e2 - e1),
//! satisfies H g = E g with E = ((2 - theta)/12)(e1 - e2), for couplings
//! (-1/4, 0, 3/4, 0).
//!
//! The residual check samples the open segment from w1 toward w3, where z
//! runs through (0, theta). Along that segment z is real up to rounding
//! noise; the noise is snapped to a +0 imaginary part so the principal
//! branches of the fractional powers are taken consistently on the cuts.
//! The second derivative is formed from a sixth-order central stencil taken
//! along the segment direction, because stepping off the segment in the real
//! direction would flip the sign of the rounding noise and with it the
//! branch. At double precision the stencil leaves a floor near 1e-9, well
//! inside the 1e-6 acceptance band.

use num_complex::Complex64 as C64;

use crate::elliptic::{solve_lattice, Lattice};
use crate::error::{Error, Result};
use crate::fuchsian::SolutionBundle;

/// Evaluation margin around the branch points z = theta and z = 1.
pub const BRANCH_MARGIN: f64 = 1e-10;
/// Imaginary parts below this (relative) size are snapped onto the real axis.
pub const SNAP_TOL: f64 = 1e-10;

/// Sixth-order central second-derivative stencil on offsets -3..=3.
const STENCIL: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    1.5,
    -49.0 / 18.0,
    1.5,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// Exponent parameters (l_0, l_1, l_2, l_3) of the four coupling terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InozemtsevParams {
    l: [f64; 4],
}

impl InozemtsevParams {
    pub fn new(l: [f64; 4]) -> Self {
        Self { l }
    }

    /// Exponents (-1/2, 0, -3/2, 0).
    pub fn preset_a() -> Self {
        Self::new([-0.5, 0.0, -1.5, 0.0])
    }

    /// Exponents (-1/2, -1, -3/2, -1); the shifted l_1, l_3 leave the
    /// couplings unchanged because l(l+1) has the symmetry l -> -1-l.
    pub fn preset_b() -> Self {
        Self::new([-0.5, -1.0, -1.5, -1.0])
    }

    pub fn l(&self) -> [f64; 4] {
        self.l
    }

    /// Coupling constants l_j (l_j + 1) in front of the four wp terms.
    pub fn couplings(&self) -> [f64; 4] {
        self.l.map(|lj| lj * (lj + 1.0))
    }
}

fn snap_real(z: C64) -> C64 {
    if z.im.abs() < SNAP_TOL * (1.0 + z.norm()) {
        C64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Elliptic coordinate z(x) = (wp(x) - e1)/(e2 - e1). Takes 0, 1 and the
/// cross-ratio at the half-periods w1, w2 and w3.
pub fn z_map(lat: &Lattice, x: C64) -> Result<C64> {
    let p = lat.wp(x)?;
    Ok(snap_real((p - lat.e1()) / (lat.e2() - lat.e1())))
}

/// Gauge-transformed solution g(x) = u(z) (z-1)^(3/4) (z-theta)^(1/2) with u
/// the discrete-density solution for theta = a_abs2. The fractional powers
/// branch at z = theta and z = 1; z = 0 is a regular point of g.
pub fn gauge_g(lat: &Lattice, a_abs2: f64, x: C64) -> Result<C64> {
    let z = z_map(lat, x)?;
    let theta = C64::new(a_abs2, 0.0);
    for branch in [theta, C64::new(1.0, 0.0)] {
        if (z - branch).norm() < BRANCH_MARGIN {
            return Err(Error::BranchPoint {
                z,
                branch,
                margin: BRANCH_MARGIN,
            });
        }
    }
    let u = SolutionBundle::KonnoDensity { theta: a_abs2 }.value(z);
    Ok(u * (z - C64::new(1.0, 0.0)).powf(0.75) * (z - theta).powf(0.5))
}

/// Directional second derivative from the sixth-order stencil: offsets are
/// k h dir and the quotient carries 1/(h dir)^2.
fn second_derivative_along(
    f: &impl Fn(C64) -> Result<C64>,
    x: C64,
    h: f64,
    dir: C64,
) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (i, &c) in STENCIL.iter().enumerate() {
        let k = i as f64 - 3.0;
        acc += c * f(x + k * h * dir)?;
    }
    let hd = h * dir;
    Ok(acc / (hd * hd))
}

/// Potential sum_j l_j (l_j + 1) wp(x + w_j); zero couplings contribute
/// nothing and their shifted arguments are never evaluated.
pub fn potential(lat: &Lattice, params: &InozemtsevParams, x: C64) -> Result<C64> {
    let zero = C64::new(0.0, 0.0);
    let shifts = [zero, lat.w1(), lat.w2(), lat.w3()];
    let mut acc = zero;
    for (c, w) in params.couplings().into_iter().zip(shifts) {
        if c != 0.0 {
            acc += c * lat.wp(x + w)?;
        }
    }
    Ok(acc)
}

/// Applies H f = -f'' + V f at x, with the second derivative taken along
/// the given unit direction. For analytic f any direction gives the same
/// complex second derivative.
pub fn hamiltonian_apply_along(
    lat: &Lattice,
    params: &InozemtsevParams,
    f: impl Fn(C64) -> Result<C64>,
    x: C64,
    h: f64,
    dir: C64,
) -> Result<C64> {
    let fpp = second_derivative_along(&f, x, h, dir)?;
    Ok(-fpp + potential(lat, params, x)? * f(x)?)
}

/// Applies H f at x with the stencil along the real direction.
pub fn hamiltonian_apply(
    lat: &Lattice,
    params: &InozemtsevParams,
    f: impl Fn(C64) -> Result<C64>,
    x: C64,
    h: f64,
) -> Result<C64> {
    hamiltonian_apply_along(lat, params, f, x, h, C64::new(1.0, 0.0))
}

/// Closed-form eigenvalue ((2 - theta)/12)(e1 - e2) on the lattice whose
/// cross-ratio is theta.
pub fn eigenvalue(lat: &Lattice) -> C64 {
    let theta = lat.cross_ratio();
    ((2.0 - theta) / 12.0) * (lat.e1() - lat.e2())
}

/// Step for the eigenfunction stencil at relative position frac along the
/// segment, scaled down near the endpoints and clamped to the plateau where
/// truncation and roundoff are balanced at double precision.
fn default_step(lat: &Lattice, frac: f64) -> f64 {
    let w1 = lat.w1().norm();
    let seg = (lat.w3() - lat.w1()).norm() / w1;
    let d = frac.min(1.0 - frac) * seg;
    (d / 100.0).clamp(1e-5, 1e-3) * w1
}

/// Max relative defect of (H - energy) g over n evenly spaced sample points
/// x = w1 + frac (w3 - w1), frac in [0.1, 0.9]. The defect at each point is
/// normalized by |energy g| + |g''| so it is scale-free. A step overrides
/// the default stencil spacing when given.
pub fn eigen_defect(
    lat: &Lattice,
    params: &InozemtsevParams,
    a_abs2: f64,
    energy: C64,
    n: usize,
    step: Option<f64>,
) -> Result<f64> {
    assert!(n >= 2, "need at least two sample points");
    let seg = lat.w3() - lat.w1();
    let dir = seg / seg.norm();
    let g = |y: C64| gauge_g(lat, a_abs2, y);
    let mut worst = 0.0f64;
    for i in 0..n {
        let frac = 0.1 + 0.8 * i as f64 / (n - 1) as f64;
        let x = lat.w1() + frac * seg;
        let h = step.unwrap_or_else(|| default_step(lat, frac));
        let fpp = second_derivative_along(&g, x, h, dir)?;
        let g0 = g(x)?;
        let hg = -fpp + potential(lat, params, x)? * g0;
        let eg = energy * g0;
        let defect = (hg - eg).norm() / (eg.norm() + fpp.norm() + 1e-300);
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Solves the lattice for theta = a_abs2 and measures how well the gauge
/// function satisfies the eigenvalue relation with the closed-form energy.
pub fn eigen_residual(a_abs2: f64, n: usize) -> Result<f64> {
    let lat = solve_lattice(a_abs2)?;
    eigen_defect(
        &lat,
        &InozemtsevParams::preset_a(),
        a_abs2,
        eigenvalue(&lat),
        n,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const RESIDUAL_TOL: f64 = 1e-6;

    #[test]
    fn both_presets_share_the_same_couplings() {
        let a = InozemtsevParams::preset_a().couplings();
        let b = InozemtsevParams::preset_b().couplings();
        assert_eq!(a, [-0.25, 0.0, 0.75, 0.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn coordinate_map_hits_the_half_period_values() {
        let theta = 0.5;
        let lat = solve_lattice(theta).unwrap();
        let z1 = z_map(&lat, lat.w1()).unwrap();
        let z2 = z_map(&lat, lat.w2()).unwrap();
        let z3 = z_map(&lat, lat.w3()).unwrap();
        assert!(z1.norm() < 1e-9, "z(w1) = {z1}");
        assert!((z2 - C64::new(1.0, 0.0)).norm() < 1e-9, "z(w2) = {z2}");
        assert!((z3 - C64::new(theta, 0.0)).norm() < 1e-9, "z(w3) = {z3}");
    }

    #[test]
    fn gauge_branch_points_are_refused_and_the_regular_point_is_not() {
        let theta = 0.5;
        let lat = solve_lattice(theta).unwrap();
        // z(w3) = theta and z(w2) = 1 sit on the branch points.
        for w in [lat.w3(), lat.w2()] {
            assert!(matches!(
                gauge_g(&lat, theta, w),
                Err(Error::BranchPoint { .. })
            ));
        }
        // z(w1) = 0 is a regular point of the gauge function.
        let g = gauge_g(&lat, theta, lat.w1()).unwrap();
        assert!(g.norm() > 0.0 && g.norm().is_finite());
    }

    #[test]
    fn zero_function_is_annihilated() {
        let lat = solve_lattice(0.5).unwrap();
        let params = InozemtsevParams::preset_a();
        let zero = |_: C64| Ok(C64::new(0.0, 0.0));
        let x = C64::new(0.4, 0.3);
        let out = hamiltonian_apply(&lat, &params, zero, x, 1e-3).unwrap();
        assert_eq!(out, C64::new(0.0, 0.0));
    }

    #[test]
    fn constant_function_sees_only_the_potential() {
        let lat = solve_lattice(0.5).unwrap();
        let params = InozemtsevParams::preset_a();
        let one = |_: C64| Ok(C64::new(1.0, 0.0));
        let x = C64::new(0.4, 0.3);
        let out = hamiltonian_apply(&lat, &params, one, x, 1e-3).unwrap();
        let v = potential(&lat, &params, x).unwrap();
        assert!((out - v).norm() < 1e-8);
    }

    #[test]
    fn directional_stencils_agree_on_an_entire_function() {
        // f(x) = exp(0.3 x) has f'' = 0.09 f everywhere; the stencil along
        // any unit direction must find the same complex second derivative.
        let f = |x: C64| Ok((0.3 * x).exp());
        let x = C64::new(0.7, 0.4);
        let want = 0.09 * (0.3 * x).exp();
        // Roundoff through the 1/h^2 quotient leaves a floor near 1e-9.
        for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let got = second_derivative_along(&f, x, 1e-3, dir).unwrap();
            assert!((got - want).norm() < 1e-8 * want.norm().max(1.0));
        }
    }

    #[test]
    fn gauge_function_satisfies_the_eigen_relation() {
        for &theta in &[0.25, 0.5, 0.75] {
            let res = eigen_residual(theta, 9).unwrap();
            assert!(res <= RESIDUAL_TOL, "theta = {theta}: residual {res:.3e}");
        }
    }

    #[test]
    fn preset_b_produces_the_same_residual() {
        let theta = 0.5;
        let lat = solve_lattice(theta).unwrap();
        let e = eigenvalue(&lat);
        let res_a = eigen_defect(&lat, &InozemtsevParams::preset_a(), theta, e, 9, None).unwrap();
        let res_b = eigen_defect(&lat, &InozemtsevParams::preset_b(), theta, e, 9, None).unwrap();
        assert_abs_diff_eq!(res_a, res_b, epsilon = 1e-15);
        assert!(res_b <= RESIDUAL_TOL);
    }

    #[test]
    fn perturbed_energy_is_detected() {
        let theta = 0.5;
        let lat = solve_lattice(theta).unwrap();
        let e = eigenvalue(&lat) * 1.001;
        let res = eigen_defect(&lat, &InozemtsevParams::preset_a(), theta, e, 9, None).unwrap();
        assert!(res > 1e-4, "perturbed energy went undetected: {res:.3e}");
    }

    #[test]
    fn residual_is_stable_across_stencil_steps() {
        let theta = 0.5;
        let lat = solve_lattice(theta).unwrap();
        let e = eigenvalue(&lat);
        let params = InozemtsevParams::preset_a();
        for h in [1e-3, 4e-3] {
            let res = eigen_defect(&lat, &params, theta, e, 9, Some(h)).unwrap();
            assert!(res <= RESIDUAL_TOL, "h = {h}: residual {res:.3e}");
        }
    }
}
