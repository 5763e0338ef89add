//! Walk states and the observables read off them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

/// State of the discrete-time walk after `t` steps: one amplitude pair per
/// position in the window [-t, t]. Index `x + t` holds position `x`.
#[derive(Debug, Clone)]
pub struct DtqwState {
    t: usize,
    amps: Vec<[C64; 2]>,
}

impl DtqwState {
    /// psi_0(0) = (1/sqrt(2), i/sqrt(2)); the initial state whose Hadamard
    /// walk is symmetric in distribution.
    pub fn symmetric_initial() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            t: 0,
            amps: vec![[C64::new(r, 0.0), C64::new(0.0, r)]],
        }
    }

    pub(crate) fn from_amps(t: usize, amps: Vec<[C64; 2]>) -> Self {
        debug_assert_eq!(amps.len(), 2 * t + 1);
        Self { t, amps }
    }

    /// Number of steps taken.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Positions carrying amplitude: [-t, t].
    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        -(self.t as i64)..=self.t as i64
    }

    /// Amplitude pair at position x; zero outside the window.
    pub fn amplitude(&self, x: i64) -> [C64; 2] {
        let idx = x + self.t as i64;
        if idx < 0 || idx as usize >= self.amps.len() {
            return [C64::new(0.0, 0.0); 2];
        }
        self.amps[idx as usize]
    }

    pub(crate) fn amps(&self) -> &[[C64; 2]] {
        &self.amps
    }

    /// Probability mass per position, restricted to positions of the same
    /// parity as t (the off-parity sites are exactly zero).
    pub fn distribution(&self) -> BTreeMap<i64, f64> {
        let t = self.t as i64;
        self.window()
            .filter(|x| (x + t) % 2 == 0)
            .map(|x| {
                let a = self.amplitude(x);
                (x, a[0].norm_sqr() + a[1].norm_sqr())
            })
            .collect()
    }

    /// Sum of |psi|^2 over the window.
    pub fn total_probability(&self) -> f64 {
        self.amps
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }

    /// Distribution of X_t / t as a right-continuous step function.
    ///
    /// Panics if t = 0 (nothing to rescale).
    pub fn rescaled_cdf(&self) -> EmpiricalCdf {
        assert!(self.t > 0, "rescaled CDF needs at least one step");
        let t = self.t as f64;
        EmpiricalCdf::from_masses(
            self.distribution()
                .into_iter()
                .map(|(x, p)| (x as f64 / t, p)),
        )
    }
}

/// State of the continuous-time walk at time `t`, truncated to the window
/// [-radius, radius]. Index `x + radius` holds position `x`.
#[derive(Debug, Clone)]
pub struct CtqwState {
    nu: f64,
    t: f64,
    radius: i64,
    amps: Vec<C64>,
}

impl CtqwState {
    pub(crate) fn from_amps(nu: f64, t: f64, radius: i64, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), (2 * radius + 1) as usize);
        Self {
            nu,
            t,
            radius,
            amps,
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        -self.radius..=self.radius
    }

    /// Amplitude at position x; zero outside the window.
    pub fn amplitude(&self, x: i64) -> C64 {
        let idx = x + self.radius;
        if idx < 0 || idx as usize >= self.amps.len() {
            return C64::new(0.0, 0.0);
        }
        self.amps[idx as usize]
    }

    pub fn distribution(&self) -> BTreeMap<i64, f64> {
        self.window()
            .map(|x| (x, self.amplitude(x).norm_sqr()))
            .collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Distribution of X_t / t as a right-continuous step function.
    ///
    /// Panics if t <= 0.
    pub fn rescaled_cdf(&self) -> EmpiricalCdf {
        assert!(self.t > 0.0, "rescaled CDF needs t > 0");
        let t = self.t;
        EmpiricalCdf::from_masses(
            self.distribution()
                .into_iter()
                .map(|(x, p)| (x as f64 / t, p)),
        )
    }
}

/// Right-continuous step function F(x) = sum of masses at points <= x.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    // (position, cumulative mass up to and including it), ascending
    steps: Vec<(f64, f64)>,
}

impl EmpiricalCdf {
    /// Builds from (position, mass) pairs; positions must come in ascending
    /// order (BTreeMap iteration already guarantees that).
    pub fn from_masses(masses: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut cum = 0.0;
        let mut steps = Vec::new();
        for (x, m) in masses {
            if let Some(&(last, _)) = steps.last() {
                debug_assert!(x >= last, "positions must be ascending");
            }
            cum += m;
            steps.push((x, cum));
        }
        Self { steps }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // last step position <= x
        match self.steps.partition_point(|&(pos, _)| pos <= x) {
            0 => 0.0,
            k => self.steps[k - 1].1,
        }
    }

    /// Total mass (value of the last step).
    pub fn total(&self) -> f64 {
        self.steps.last().map_or(0.0, |&(_, c)| c)
    }
}
