//! Shared inputs for the benchmarks.

use cojump::sim::{simulate, SimScenario};

/// One simulated day of `d` correlated return series of length `n`.
pub fn returns(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = SimScenario::bivariate(n, 1, 0.01, 0.6, seed);
    s.instruments = (0..d).map(|i| format!("x{i}")).collect();
    s.sigma = vec![0.01; d];
    s.mu = vec![0.0; d];
    s.noise_sd = vec![0.0; d];
    simulate(&s).expect("valid scenario").remove(0).observed
}

#[cfg(test)]
mod tests {
    #[test]
    fn shapes() {
        let r = super::returns(64, 3, 1);
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|s| s.len() == 64));
    }
}
