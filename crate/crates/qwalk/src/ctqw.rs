//! Continuous-time quantum walk on the integer line.
//!
//! The state obeys d psi/dt = i nu (psi(x-1) - 2 psi(x) + psi(x+1)) from
//! psi_0 = delta_0. Two backends compute it: a Bessel closed form
//! psi_t(x) = exp(-2 i nu t) i^|x| J_|x|(2 nu t), and a fourth-order
//! Runge-Kutta integrator on a truncated window.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::state::CtqwState;

/// Largest boundary amplitude the integrator tolerates before declaring its
/// window too small.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Step size that keeps the integrator's norm drift below 1e-8 over the
/// parameter region nu * t <= 200.
pub fn default_step(nu: f64) -> f64 {
    (0.1 / nu).min(0.01)
}

/// Window radius holding the wavefront (which travels at speed 2 nu) plus
/// slack for the exponential tail.
pub fn truncation_radius(nu: f64, t: f64) -> i64 {
    let front = 2.0 * nu * t;
    front.ceil() as i64 + (40i64).max((0.2 * front).ceil() as i64)
}

/// Bessel functions J_0(z) .. J_n_max(z) for z >= 0 by backward recurrence
/// with even-order normalization (J_0 + 2 sum J_2k = 1).
pub fn bessel_j_array(z: f64, n_max: usize) -> Vec<f64> {
    assert!(
        z >= 0.0 && z.is_finite(),
        "argument must be finite and nonnegative"
    );
    let mut out = vec![0.0; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // Start far enough above both the target order and the turning point
    // n = z that the seed's error has decayed away by order n_max.
    let mut m = n_max.max(z.ceil() as usize) + 150;
    if !m.is_multiple_of(2) {
        m += 1;
    }
    let mut jp = 0.0f64; // J_{k+1}
    let mut j = 1e-30f64; // J_k, arbitrary seed
    let mut even_sum = 0.0f64;
    for k in (0..=m).rev() {
        if k <= n_max {
            out[k] = j;
        }
        if k % 2 == 0 {
            even_sum += if k == 0 { j } else { 2.0 * j };
        }
        if k > 0 {
            let jm = (2.0 * k as f64 / z) * j - jp;
            jp = j;
            j = jm;
            if j.abs() > 1e250 {
                j *= 1e-250;
                jp *= 1e-250;
                even_sum *= 1e-250;
                for v in out.iter_mut() {
                    *v *= 1e-250;
                }
            }
        }
    }
    for v in out.iter_mut() {
        *v /= even_sum;
    }
    out
}

fn check_params(nu: f64, t: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: nu,
            expected: "a positive finite hopping rate",
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            expected: "a nonnegative finite time",
        });
    }
    Ok(())
}

/// Evaluates the closed form on the window [-radius, radius].
pub fn closed_form(nu: f64, t: f64, radius: i64) -> Result<CtqwState> {
    check_params(nu, t)?;
    if radius < 0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius as f64,
            expected: "a nonnegative window radius",
        });
    }
    let z = 2.0 * nu * t;
    let bessel = bessel_j_array(z, radius as usize);
    let phase = C64::from_polar(1.0, -z);
    // i^n cycles with period 4
    let unit_i = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let amps = (-radius..=radius)
        .map(|x| {
            let n = x.unsigned_abs() as usize;
            phase * unit_i[n % 4] * bessel[n]
        })
        .collect();
    Ok(CtqwState::from_amps(nu, t, radius, amps))
}

/// Discrete Laplacian times i nu, with zero amplitude outside the window.
fn apply_generator(nu: f64, src: &[C64], dst: &mut [C64]) {
    let n = src.len();
    for i in 0..n {
        let left = if i > 0 {
            src[i - 1]
        } else {
            C64::new(0.0, 0.0)
        };
        let right = if i + 1 < n {
            src[i + 1]
        } else {
            C64::new(0.0, 0.0)
        };
        let w = left + right - 2.0 * src[i];
        dst[i] = C64::new(-nu * w.im, nu * w.re);
    }
}

/// Integrates the walk to time t with fourth-order Runge-Kutta at the given
/// step, on the window chosen by truncation_radius. Fails with
/// TruncationTooSmall if the boundary sites pick up amplitude above
/// BOUNDARY_TOL, so a reported state is always trustworthy.
pub fn integrate(nu: f64, t: f64, step: f64) -> Result<CtqwState> {
    check_params(nu, t)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            expected: "a positive finite step size",
        });
    }
    integrate_on_window(nu, t, step, truncation_radius(nu, t))
}

pub(crate) fn integrate_on_window(nu: f64, t: f64, step: f64, radius: i64) -> Result<CtqwState> {
    let n = (2 * radius + 1) as usize;
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[radius as usize] = C64::new(1.0, 0.0);

    let n_steps = (t / step).ceil() as usize;
    if n_steps > 0 {
        let dt = t / n_steps as f64;
        let mut k1 = vec![C64::new(0.0, 0.0); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        for s in 0..n_steps {
            apply_generator(nu, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * dt * k1[i];
            }
            apply_generator(nu, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * dt * k2[i];
            }
            apply_generator(nu, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + dt * k3[i];
            }
            apply_generator(nu, &tmp, &mut k4);
            let w = dt / 6.0;
            for i in 0..n {
                y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            // Leakage is checked every step so a burst through the boundary
            // cannot reflect back in and then hide.
            let boundary = y[0].norm().max(y[n - 1].norm());
            if boundary > BOUNDARY_TOL {
                return Err(Error::TruncationTooSmall {
                    radius,
                    amplitude: boundary,
                    limit: BOUNDARY_TOL,
                    t: (s + 1) as f64 * dt,
                });
            }
        }
    }

    Ok(CtqwState::from_amps(nu, t, radius, y))
}
