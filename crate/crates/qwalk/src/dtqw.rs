//! Discrete-time quantum walk on the integer line.
//!
//! One step maps psi_{t+1}(x) = P psi_t(x+1) + Q psi_t(x-1), where P is the
//! top row of the coin and Q the bottom row. The window grows by one site on
//! each side per step.

use num_complex::Complex64 as C64;

use crate::coin::CoinOperator;
use crate::state::DtqwState;

/// Advances the walk by one step.
pub fn step(coin: &CoinOperator, state: &DtqwState) -> DtqwState {
    let t = state.t();
    let old = state.amps();
    let n = 2 * (t + 1) + 1;
    let mut amps = vec![[C64::new(0.0, 0.0); 2]; n];
    // New index for position x is x + t + 1; old index is x + t.
    for (i, &pair) in old.iter().enumerate() {
        // Mass moving left lands at old position - 1 = new index i.
        let p = coin.apply_p(pair);
        amps[i][0] += p[0];
        amps[i][1] += p[1];
        // Mass moving right lands at old position + 1 = new index i + 2.
        let q = coin.apply_q(pair);
        amps[i + 2][0] += q[0];
        amps[i + 2][1] += q[1];
    }
    DtqwState::from_amps(t + 1, amps)
}

/// Runs `steps` steps from the given state.
pub fn evolve(coin: &CoinOperator, state: &DtqwState, steps: usize) -> DtqwState {
    let mut s = state.clone();
    for _ in 0..steps {
        s = step(coin, &s);
    }
    s
}
