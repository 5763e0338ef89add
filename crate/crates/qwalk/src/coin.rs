//! Coin operators for the discrete-time walk.
//!
//! A coin is a 2x2 unitary
//!
//! ```text
//!     U = | a  b |
//!         | c  d |
//! ```
//!
//! split into the chirality projections P = [[a, b], [0, 0]] (mass moving
//! left) and Q = [[0, 0], [c, d]] (mass moving right), so that one time step
//! is psi_{t+1}(x) = P psi_t(x+1) + Q psi_t(x-1).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Max allowed entrywise deviation of U*U from the identity.
pub const UNITARITY_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator {
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    all_entries_nonzero: bool,
}

impl CoinOperator {
    /// Validates unitarity to [`UNITARITY_TOL`] and records whether every
    /// entry is nonzero (the limit-density formulas need |a| in (0,1)).
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        // U*U entries, conjugate-transpose times U
        let g11 = a.conj() * a + c.conj() * c;
        let g12 = a.conj() * b + c.conj() * d;
        let g21 = b.conj() * a + d.conj() * c;
        let g22 = b.conj() * b + d.conj() * d;
        let deviation = [
            (g11 - C64::new(1.0, 0.0)).norm(),
            g12.norm(),
            g21.norm(),
            (g22 - C64::new(1.0, 0.0)).norm(),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        if deviation > UNITARITY_TOL {
            return Err(Error::NonUnitary {
                deviation,
                tolerance: UNITARITY_TOL,
            });
        }
        let all_entries_nonzero =
            a.norm_sqr() > 0.0 && b.norm_sqr() > 0.0 && c.norm_sqr() > 0.0 && d.norm_sqr() > 0.0;
        Ok(Self {
            a,
            b,
            c,
            d,
            all_entries_nonzero,
        })
    }

    /// a = b = c = 1/sqrt(2), d = -1/sqrt(2).
    pub fn hadamard() -> Self {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            a: r,
            b: r,
            c: r,
            d: -r,
            all_entries_nonzero: true,
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn d(&self) -> C64 {
        self.d
    }

    /// Whether a, b, c, d are all nonzero, i.e. the walk is not a pure
    /// transport and the limit density is defined.
    pub fn all_entries_nonzero(&self) -> bool {
        self.all_entries_nonzero
    }

    /// |a|, the parameter the limit density depends on.
    pub fn a_abs(&self) -> f64 {
        self.a.norm()
    }

    /// Applies P = [[a, b], [0, 0]].
    pub fn apply_p(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], C64::new(0.0, 0.0)]
    }

    /// Applies Q = [[0, 0], [c, d]].
    pub fn apply_q(&self, v: [C64; 2]) -> [C64; 2] {
        [C64::new(0.0, 0.0), self.c * v[0] + self.d * v[1]]
    }
}
