//! Weierstrass elliptic functions on rectangular lattices, computed through
//! Jacobi theta quotients in the nome.
//!
//! A lattice is generated by half-periods (w1, w3) with w1 = 1 real and
//! w3 = w1 (1 + i s); as a point set it is the rectangular lattice
//! 2 w1 Z + 2 i s w1 Z, and w3 names the corner half-period. The third
//! half-period w2 = -w1 - w3 is congruent to the purely imaginary one. With
//! this labeling the e-values satisfy e2 < e3 < e1 and the cross-ratio
//! (e3 - e1)/(e2 - e1) runs monotonically through (0, 1) as s grows, which
//! is what lets a bisection hit any prescribed value.
//!
//! The nome q = exp(i pi w3/w1) = -exp(-pi s) is real and negative. Each
//! theta quotient used here pairs one factor of theta1 or theta2 in the
//! numerator with one in the denominator, so the fractional power q^(1/4)
//! cancels and every series below involves only integer powers of q.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Evaluation is refused within this distance (times |w1|) of a lattice point.
pub const POLE_MARGIN: f64 = 1e-6;

/// Relative term size at which the theta series are truncated.
const SERIES_TOL: f64 = 1e-17;
const SERIES_CAP: usize = 400;

/// theta1 with the factor q^(1/4) removed:
/// 2 sum (-1)^n q^(n(n+1)) sin((2n+1)u).
fn theta1_hat(u: C64, q: f64) -> C64 {
    odd_series(u, q, |n, x| if n % 2 == 0 { x.sin() } else { -x.sin() })
}

/// Derivative of theta1_hat in u.
fn theta1_hat_du(u: C64, q: f64) -> C64 {
    odd_series(u, q, |n, x| {
        let k = (2 * n + 1) as f64;
        if n % 2 == 0 {
            k * x.cos()
        } else {
            -k * x.cos()
        }
    })
}

/// theta2 with the factor q^(1/4) removed: 2 sum q^(n(n+1)) cos((2n+1)u).
fn theta2_hat(u: C64, q: f64) -> C64 {
    odd_series(u, q, |_, x| x.cos())
}

fn theta2_hat_du(u: C64, q: f64) -> C64 {
    odd_series(u, q, |n, x| -((2 * n + 1) as f64) * x.sin())
}

/// theta3 = 1 + 2 sum q^(n^2) cos(2nu).
fn theta3(u: C64, q: f64) -> C64 {
    even_series(u, q, |_, x| x.cos())
}

fn theta3_du(u: C64, q: f64) -> C64 {
    even_series_zero_base(u, q, |n, x| -(2.0 * n as f64) * x.sin())
}

/// theta4 = 1 + 2 sum (-1)^n q^(n^2) cos(2nu).
fn theta4(u: C64, q: f64) -> C64 {
    even_series(u, q, |n, x| if n % 2 == 0 { x.cos() } else { -x.cos() })
}

fn theta4_du(u: C64, q: f64) -> C64 {
    even_series_zero_base(u, q, |n, x| {
        let f = -(2.0 * n as f64);
        if n % 2 == 0 {
            f * x.sin()
        } else {
            -f * x.sin()
        }
    })
}

/// Sum over odd characteristics: 2 sum_n q^(n(n+1)) term(n, (2n+1)u).
fn odd_series(u: C64, q: f64, term: impl Fn(usize, C64) -> C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let mut pw = 1.0f64; // q^(n(n+1))
    let mut fac = 1.0f64; // q^(2n)
    let mut quiet = 0;
    for n in 0..SERIES_CAP {
        let t = pw * term(n, (2 * n + 1) as f64 * u);
        acc += t;
        if t.norm() < SERIES_TOL * (1.0 + acc.norm()) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        fac *= q * q;
        pw *= fac;
    }
    2.0 * acc
}

/// Sum over even characteristics with unit base term:
/// 1 + 2 sum_{n>=1} q^(n^2) term(n, 2nu).
fn even_series(u: C64, q: f64, term: impl Fn(usize, C64) -> C64) -> C64 {
    C64::new(1.0, 0.0) + even_series_zero_base(u, q, term)
}

/// 2 sum_{n>=1} q^(n^2) term(n, 2nu).
fn even_series_zero_base(u: C64, q: f64, term: impl Fn(usize, C64) -> C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    // The nome underflows for extreme aspects; every remaining term is zero.
    if q == 0.0 {
        return acc;
    }
    let mut pw = 1.0f64; // q^(n^2)
    let mut fac = 1.0f64; // q^(2n-1)
    let mut quiet = 0;
    for n in 1..SERIES_CAP {
        fac *= q * q;
        pw *= fac / q; // q^(n^2) = q^((n-1)^2) * q^(2n-1)
        let t = pw * term(n, 2.0 * n as f64 * u);
        acc += t;
        if t.norm() < SERIES_TOL * (1.0 + acc.norm()) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    2.0 * acc
}

/// Half-period data of a rectangular lattice together with the theta nulls
/// and e-values needed for evaluation.
#[derive(Debug, Clone)]
pub struct Lattice {
    w1: C64,
    w2: C64,
    w3: C64,
    s: f64,
    q: f64,
    t2h0: f64,
    t30: f64,
    t40: f64,
    e1: C64,
    e2: C64,
    e3: C64,
}

impl Lattice {
    /// Lattice with w1 = 1 and corner half-period w3 = 1 + i s.
    pub fn rectangular(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                expected: "a positive finite rectangle aspect",
            });
        }
        let w1 = C64::new(1.0, 0.0);
        let w3 = C64::new(1.0, s);
        let w2 = -w1 - w3;
        let q = -(-PI * s).exp();
        let zero = C64::new(0.0, 0.0);
        let t2h0 = theta2_hat(zero, q).re;
        let t30 = theta3(zero, q).re;
        let t40 = theta4(zero, q).re;
        let mut lat = Self {
            w1,
            w2,
            w3,
            s,
            q,
            t2h0,
            t30,
            t40,
            e1: zero,
            e2: zero,
            e3: zero,
        };
        lat.e1 = lat.wp(w1)?;
        lat.e2 = lat.wp(w2)?;
        lat.e3 = lat.wp(w3)?;
        Ok(lat)
    }

    pub fn w1(&self) -> C64 {
        self.w1
    }
    pub fn w2(&self) -> C64 {
        self.w2
    }
    pub fn w3(&self) -> C64 {
        self.w3
    }
    pub fn e1(&self) -> C64 {
        self.e1
    }
    pub fn e2(&self) -> C64 {
        self.e2
    }
    pub fn e3(&self) -> C64 {
        self.e3
    }

    /// Nome exp(i pi w3/w1); real and negative for these lattices.
    pub fn nome(&self) -> C64 {
        C64::new(self.q, 0.0)
    }

    /// Ratio of the imaginary rectangle generator to the real one,
    /// (w3 - w1)/w1 = i s; equal to i exactly when the rectangle is square.
    pub fn rectangle_ratio(&self) -> C64 {
        (self.w3 - self.w1) / self.w1
    }

    /// (e3 - e1)/(e2 - e1), real in (0, 1), strictly increasing in s.
    pub fn cross_ratio(&self) -> f64 {
        ((self.e3 - self.e1) / (self.e2 - self.e1)).re
    }

    /// Maps x into the fundamental rectangle centered on the origin. The
    /// nearest lattice point of the reduced argument is then the origin.
    fn reduce(&self, x: C64) -> Result<C64> {
        let w1 = self.w1.re;
        let m = (x.re / (2.0 * w1)).round();
        let n = (x.im / (2.0 * self.s * w1)).round();
        let xr = C64::new(x.re - 2.0 * m * w1, x.im - 2.0 * n * self.s * w1);
        if xr.norm() < POLE_MARGIN * w1 {
            return Err(Error::PolePoint {
                x,
                margin: POLE_MARGIN * w1,
            });
        }
        Ok(xr)
    }

    /// The three quotient squares c (K_j N_j(u)/theta1(u))^2, each equal to
    /// wp - e_j; their mean is wp because e1 + e2 + e3 = 0.
    fn quotient_squares(&self, u: C64) -> [C64; 3] {
        let c = (PI / (2.0 * self.w1.re)).powi(2);
        let t1 = theta1_hat(u, self.q);
        let nums = [
            self.t30 * self.t40 * theta2_hat(u, self.q),
            self.t2h0 * self.t40 * theta3(u, self.q),
            self.t2h0 * self.t30 * theta4(u, self.q),
        ];
        nums.map(|n| {
            let r = n / t1;
            c * r * r
        })
    }

    /// Weierstrass elliptic function at x.
    pub fn wp(&self, x: C64) -> Result<C64> {
        let xr = self.reduce(x)?;
        let u = PI * xr / (2.0 * self.w1.re);
        let [a1, a2, a3] = self.quotient_squares(u);
        Ok((a1 + a2 + a3) / 3.0)
    }

    /// Derivative of wp at x, from the derivatives of the theta quotients.
    pub fn wp_derivative(&self, x: C64) -> Result<C64> {
        let xr = self.reduce(x)?;
        let du_dx = PI / (2.0 * self.w1.re);
        let u = du_dx * xr;
        let c = du_dx * du_dx;
        let t1 = theta1_hat(u, self.q);
        let t1d = theta1_hat_du(u, self.q);
        let parts = [
            (
                self.t30 * self.t40,
                theta2_hat(u, self.q),
                theta2_hat_du(u, self.q),
            ),
            (
                self.t2h0 * self.t40,
                theta3(u, self.q),
                theta3_du(u, self.q),
            ),
            (
                self.t2h0 * self.t30,
                theta4(u, self.q),
                theta4_du(u, self.q),
            ),
        ];
        let mut acc = C64::new(0.0, 0.0);
        for (k, n, nd) in parts {
            let r = n / t1;
            let rd = (nd * t1 - n * t1d) / (t1 * t1);
            // d/dx of c (k r)^2 with u = x * du_dx
            acc += 2.0 * c * k * k * r * rd * du_dx;
        }
        Ok(acc / 3.0)
    }
}

/// Finds the rectangular lattice whose cross-ratio equals a_abs2, by
/// bisection on the rectangle aspect.
pub fn solve_lattice(a_abs2: f64) -> Result<Lattice> {
    if !(a_abs2 > 0.0 && a_abs2 < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a_abs2",
            value: a_abs2,
            expected: "a squared coin amplitude strictly inside (0, 1)",
        });
    }
    const MAX_ITER: u32 = 200;
    let mut lo = 0.02f64;
    let mut hi = 50.0f64;
    let cr = |s: f64| -> Result<f64> { Ok(Lattice::rectangular(s)?.cross_ratio()) };
    if !(cr(lo)? < a_abs2 && a_abs2 < cr(hi)?) {
        return Err(Error::NoConvergence {
            what: "lattice aspect bracketing",
            iterations: 0,
            best: f64::NAN,
        });
    }
    let mut iterations = 0;
    while iterations < MAX_ITER && (hi - lo) > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if cr(mid)? < a_abs2 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lat = Lattice::rectangular(0.5 * (lo + hi))?;
    let best = lat.cross_ratio();
    if (best - a_abs2).abs() > 1e-10 {
        return Err(Error::NoConvergence {
            what: "lattice aspect bisection",
            iterations,
            best,
        });
    }
    Ok(lat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng, lat: &Lattice) -> C64 {
        // Stay inside the fundamental rectangle, away from the origin pole.
        loop {
            let x = C64::new(
                rng.gen_range(-0.95..0.95),
                lat.s * rng.gen_range(-0.95..0.95),
            );
            if x.norm() > 0.15 {
                return x;
            }
        }
    }

    #[test]
    fn leading_laurent_coefficient_is_one() {
        let lat = Lattice::rectangular(1.0).unwrap();
        for &x in &[
            C64::new(1e-3, 0.0),
            C64::new(7e-4, 7e-4),
            C64::new(0.0, 1e-3),
        ] {
            let p = lat.wp(x).unwrap();
            assert!((p * x * x - C64::new(1.0, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn wp_is_periodic_in_both_generators() {
        let lat = Lattice::rectangular(0.8).unwrap();
        let x = C64::new(0.31, 0.22);
        let p = lat.wp(x).unwrap();
        let along_real = lat.wp(x + C64::new(2.0, 0.0)).unwrap();
        let along_imag = lat.wp(x + C64::new(0.0, 2.0 * 0.8)).unwrap();
        let along_corner = lat.wp(x + 2.0 * lat.w3()).unwrap();
        assert!((p - along_real).norm() < 1e-10 * p.norm());
        assert!((p - along_imag).norm() < 1e-10 * p.norm());
        assert!((p - along_corner).norm() < 1e-10 * p.norm());
    }

    #[test]
    fn wp_is_even_and_derivative_odd() {
        let lat = Lattice::rectangular(1.2).unwrap();
        for &x in &[
            C64::new(0.4, 0.3),
            C64::new(-0.2, 0.9),
            C64::new(0.77, -0.5),
        ] {
            let p = lat.wp(x).unwrap();
            let pm = lat.wp(-x).unwrap();
            assert!((p - pm).norm() <= 1e-12 * (1.0 + p.norm()));
            let d = lat.wp_derivative(x).unwrap();
            let dm = lat.wp_derivative(-x).unwrap();
            assert!((d + dm).norm() <= 1e-12 * (1.0 + d.norm()));
        }
    }

    #[test]
    fn e_values_sum_to_zero_and_sit_at_critical_points() {
        for &s in &[0.7, 1.0, 1.3] {
            let lat = Lattice::rectangular(s).unwrap();
            let sum = lat.e1() + lat.e2() + lat.e3();
            assert!(sum.norm() < 1e-10, "s = {s}: e-sum {sum}");
            for w in [lat.w1(), lat.w2(), lat.w3()] {
                let d = lat.wp_derivative(w).unwrap();
                assert!(d.norm() < 1e-8, "s = {s}: wp' at half-period {d}");
            }
            // Real axis, imaginary axis, corner: strictly ordered values.
            assert!(lat.e2().re < lat.e3().re && lat.e3().re < lat.e1().re);
        }
    }

    #[test]
    fn wp_satisfies_its_differential_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe111_ecc4);
        for &s in &[0.75, 1.0, 1.4] {
            let lat = Lattice::rectangular(s).unwrap();
            for _ in 0..20 {
                let x = random_point(&mut rng, &lat);
                let p = lat.wp(x).unwrap();
                let d = lat.wp_derivative(x).unwrap();
                let lhs = d * d;
                let rhs = 4.0 * (p - lat.e1()) * (p - lat.e2()) * (p - lat.e3());
                let scale = lhs.norm().max(rhs.norm()).max(1e-30);
                assert!(
                    (lhs - rhs).norm() / scale < 1e-10,
                    "s = {s}, x = {x}: relative defect {:.3e}",
                    (lhs - rhs).norm() / scale
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences_of_wp() {
        let lat = Lattice::rectangular(0.9).unwrap();
        let h = 1e-6;
        for &x in &[C64::new(0.5, 0.3), C64::new(-0.3, 0.6), C64::new(0.9, -0.8)] {
            let fd = (lat.wp(x + C64::new(h, 0.0)).unwrap()
                - lat.wp(x - C64::new(h, 0.0)).unwrap())
                / (2.0 * h);
            let an = lat.wp_derivative(x).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm());
        }
    }

    #[test]
    fn square_lattice_halves_the_cross_ratio() {
        let lat = Lattice::rectangular(1.0).unwrap();
        assert_abs_diff_eq!(lat.cross_ratio(), 0.5, epsilon = 1e-12);
        // Frozen from an independent high-precision evaluation.
        assert_relative_eq!(lat.e1().re, 1.718796454505093, max_relative = 1e-10);
        assert!(lat.e1().im.abs() < 1e-12);
    }

    #[test]
    fn pole_points_are_refused() {
        let lat = Lattice::rectangular(1.0).unwrap();
        for &x in &[
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(2.0, 2.0),
            C64::new(1e-7, 0.0),
        ] {
            assert!(matches!(lat.wp(x), Err(Error::PolePoint { .. })), "x = {x}");
        }
        assert!(lat.wp(C64::new(1e-5, 0.0)).is_ok());
    }

    #[test]
    fn solved_lattices_match_frozen_aspects() {
        // Frozen from an independent high-precision bisection.
        let cases = [
            (0.25, 0.7817009613480558),
            (0.5, 1.0),
            (0.75, 1.2792615711710065),
        ];
        for &(theta, s) in &cases {
            let lat = solve_lattice(theta).unwrap();
            assert_abs_diff_eq!(lat.w3().im, s, epsilon = 1e-8);
            assert_abs_diff_eq!(lat.cross_ratio(), theta, epsilon = 1e-10);
        }
    }

    #[test]
    fn solver_round_trips_across_the_parameter_range() {
        for &theta in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let lat = solve_lattice(theta).unwrap();
            assert_abs_diff_eq!(lat.cross_ratio(), theta, epsilon = 1e-10);
            let sum = lat.e1() + lat.e2() + lat.e3();
            assert!(sum.norm() < 1e-10);
        }
    }

    #[test]
    fn swapping_rectangle_sides_mirrors_the_parameter() {
        // Rotating the rectangle by a quarter turn swaps the roles of the
        // two axes, which maps the target value to its complement.
        let s3 = solve_lattice(0.3).unwrap().w3().im;
        let s7 = solve_lattice(0.7).unwrap().w3().im;
        assert_relative_eq!(s3 * s7, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn square_aspect_solves_the_symmetric_parameter() {
        let lat = solve_lattice(0.5).unwrap();
        let ratio = lat.rectangle_ratio();
        assert!((ratio - C64::new(0.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            solve_lattice(0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            solve_lattice(1.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(Lattice::rectangular(-1.0).is_err());
    }
}
