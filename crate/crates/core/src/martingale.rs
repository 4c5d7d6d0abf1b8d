//! The betting-supermartingale engine.
//!
//! Starting from unit wealth, each audited ballot multiplies the wealth by
//!
//! ```text
//! T_i = 1 + λ_i (x_i - 1/2),    λ_i ∈ [0, 2],
//! ```
//!
//! where `x_i` is the overstatement assorter of the i-th draw and the bet
//! `λ_i` may depend only on draws 1..i-1. Under the complementary null
//! (population mean ≤ 1/2) the product is a nonnegative supermartingale,
//! so by Ville's inequality the truncated reciprocal
//! `P_t = min(1, 1/M_t)` is a sequentially valid P-value: it can be
//! checked after every draw and the audit stops the first time `P_t ≤ α`.
//!
//! A weighted average of such products (one component per bet) is again a
//! supermartingale; [`WagerState`] tracks either a single component or a
//! mixture. Wealth is accumulated in log space per component because
//! stopping times run into the thousands of draws and linear-space
//! products overflow; a component whose factor hits exactly zero is
//! "broke" (log-wealth `-inf`) and stays broke. When every component is
//! broke the state is *stalled*: the P-value is 1 forever and the audit
//! must escalate to a full hand count.

use crate::assort::ContestSpec;
use crate::error::{AuditError, Result};

/// Running wealth of a betting supermartingale (or mixture of them).
#[derive(Debug, Clone, PartialEq)]
pub struct WagerState {
    /// Per-component log wealth; `-inf` marks a broke component.
    log_wealth: Vec<f64>,
    /// Per-component log mixture weight, `ln θ_b`.
    log_weights: Vec<f64>,
    /// Cached `max_b (ln θ_b + log_wealth_b)`; `-inf` iff stalled.
    max_score: f64,
    /// `ln B`, the worst-case gap between the max score and the mixture total.
    log_components: f64,
    draws_seen: u64,
}

impl WagerState {
    /// Fresh single-component state with unit wealth.
    pub fn single() -> Self {
        Self {
            log_wealth: vec![0.0],
            log_weights: vec![0.0],
            max_score: 0.0,
            log_components: 0.0,
            draws_seen: 0,
        }
    }

    /// Fresh mixture with the given component weights (nonnegative,
    /// summing to 1 within 1e-9).
    pub fn mixture(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(AuditError::input("weights", "mixture has no components"));
        }
        let mut sum = 0.0;
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(AuditError::input(
                    "weights",
                    format!("{w} is not a nonnegative weight"),
                ));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(AuditError::input(
                "weights",
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        let log_weights: Vec<f64> = weights.iter().map(|&w| w.ln()).collect();
        let max_score = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            log_wealth: vec![0.0; weights.len()],
            log_weights,
            max_score,
            log_components: (weights.len() as f64).ln(),
            draws_seen: 0,
        })
    }

    pub fn components(&self) -> usize {
        self.log_wealth.len()
    }

    pub fn draws_seen(&self) -> u64 {
        self.draws_seen
    }

    /// True once total wealth is exactly zero (every component broke).
    pub fn stalled(&self) -> bool {
        self.max_score == f64::NEG_INFINITY
    }

    /// Per-component log wealth.
    pub fn component_log_wealth(&self) -> &[f64] {
        &self.log_wealth
    }

    /// Log of the mixture wealth `ln Σ_b θ_b exp(log_wealth_b)`,
    /// computed with a max-shifted log-sum-exp.
    pub fn log_wealth(&self) -> f64 {
        if self.stalled() {
            return f64::NEG_INFINITY;
        }
        if self.log_wealth.len() == 1 {
            return self.log_wealth[0];
        }
        let max = self.max_score;
        let sum: f64 = self
            .log_wealth
            .iter()
            .zip(self.log_weights.iter())
            .map(|(lw, lt)| {
                let score = lw + lt;
                if score == f64::NEG_INFINITY {
                    0.0
                } else {
                    (score - max).exp()
                }
            })
            .sum();
        max + sum.ln()
    }

    /// Sequential P-value `min(1, 1/M_t)`; 1 for a stalled state.
    pub fn p_value(&self) -> f64 {
        if self.stalled() {
            return 1.0;
        }
        (-self.log_wealth()).exp().min(1.0)
    }

    /// Whether the state rejects the null at risk limit `alpha`
    /// (`P ≤ α`, i.e. wealth ≥ 1/α; ties count as rejection).
    ///
    /// The exact mixture total is only computed when the cached maximum
    /// score puts the total within `ln B` of the threshold.
    pub fn rejects(&self, alpha: f64) -> bool {
        let threshold = -alpha.ln();
        if self.max_score >= threshold {
            return true;
        }
        if self.max_score + self.log_components < threshold {
            return false;
        }
        self.log_wealth() >= threshold
    }

    /// Advance the state by one draw with assorter value `x` and one bet
    /// per component. Consumes the state and returns the successor; a
    /// component whose factor is exactly zero goes permanently broke.
    pub fn update(mut self, x: f64, bets: &[f64]) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(AuditError::input(
                "x",
                format!("{x} is not a nonnegative assorter value"),
            ));
        }
        if bets.len() != self.log_wealth.len() {
            return Err(AuditError::input(
                "bets",
                format!(
                    "{} bets supplied for {} components",
                    bets.len(),
                    self.log_wealth.len()
                ),
            ));
        }
        let mut max_score = f64::NEG_INFINITY;
        for ((lw, &lt), &lambda) in self
            .log_wealth
            .iter_mut()
            .zip(self.log_weights.iter())
            .zip(bets.iter())
        {
            if !(0.0..=2.0).contains(&lambda) {
                return Err(AuditError::input(
                    "lambda",
                    format!("{lambda} is not in [0, 2]"),
                ));
            }
            let factor = 1.0 + lambda * (x - 0.5);
            // λ ≤ 2 and x ≥ 0 guarantee the factor cannot go negative;
            // a negative value here means corrupted state, not bad input.
            assert!(
                factor >= 0.0,
                "negative wealth factor {factor} from lambda={lambda}, x={x}"
            );
            if factor == 0.0 {
                *lw = f64::NEG_INFINITY;
            } else {
                *lw += factor.ln();
            }
            let score = *lw + lt;
            if score > max_score {
                max_score = score;
            }
        }
        self.max_score = max_score;
        self.draws_seen += 1;
        Ok(self)
    }

    #[cfg(test)]
    pub(crate) fn with_log_wealth(log_wealth: Vec<f64>, weights: &[f64]) -> Self {
        let log_weights: Vec<f64> = weights.iter().map(|&w| w.ln()).collect();
        let max_score = log_wealth
            .iter()
            .zip(log_weights.iter())
            .map(|(lw, lt)| lw + lt)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            max_score,
            log_components: (log_wealth.len() as f64).ln(),
            draws_seen: 0,
            log_wealth,
            log_weights,
        }
    }
}

/// ALPHA-parameter view of a bet: `η = (1 + λ(u - 1/2)) / 2` where
/// `u = 2a` is the population upper bound. `λ = 0` maps to the null mean
/// 1/2 and `λ = 2` maps to `u`.
pub fn alpha_eta(lambda: f64, spec: &ContestSpec) -> f64 {
    let u = spec.upper_bound();
    0.5 * (1.0 + lambda * (u - 0.5))
}

/// Inverse of [`alpha_eta`]: the bet corresponding to an ALPHA parameter.
pub fn alpha_lambda(eta: f64, spec: &ContestSpec) -> f64 {
    let u = spec.upper_bound();
    (2.0 * eta - 1.0) / (u - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(v: f64) -> ContestSpec {
        ContestSpec::new(v, 10_000, 0.05).unwrap()
    }

    #[test]
    fn zero_bet_leaves_wealth_unchanged() {
        let mut state = WagerState::single();
        for &x in &[0.0, 0.3, 0.9, 1.05] {
            state = state.update(x, &[0.0]).unwrap();
        }
        assert_eq!(state.log_wealth(), 0.0);
        assert_eq!(state.p_value(), 1.0);
        assert_eq!(state.draws_seen(), 4);
    }

    #[test]
    fn maximal_bet_on_two_vote_overstatement_stalls() {
        let state = WagerState::single().update(0.0, &[2.0]).unwrap();
        assert!(state.stalled());
        assert_eq!(state.p_value(), 1.0);
        // Broke is permanent, whatever comes next.
        let state = state.update(1.0, &[2.0]).unwrap();
        assert!(state.stalled());
        assert_eq!(state.p_value(), 1.0);
        assert!(!state.rejects(0.05));
    }

    #[test]
    fn error_free_maximal_betting_rejects_at_twenty_nine() {
        // v = 0.20: every error-free draw multiplies wealth by 2a, so the
        // P-value first crosses 0.05 at draw 29.
        let s = spec(0.20);
        let a = s.noerror();
        let mut state = WagerState::single();
        let mut stop = None;
        for i in 1..=40 {
            state = state.update(a, &[2.0]).unwrap();
            assert_relative_eq!(
                state.log_wealth(),
                i as f64 * (2.0 * a).ln(),
                max_relative = 1e-12
            );
            if stop.is_none() && state.rejects(0.05) {
                stop = Some(i);
            }
        }
        assert_eq!(stop, Some(29));
    }

    #[test]
    fn p_value_is_truncated_reciprocal() {
        let fresh = WagerState::single();
        assert_eq!(fresh.p_value(), 1.0);

        let state = WagerState::with_log_wealth(vec![20.0f64.ln()], &[1.0]);
        assert_relative_eq!(state.p_value(), 0.05, epsilon = 1e-12);
        assert!(state.rejects(0.05));

        // Wealth below 1 truncates to 1.
        let state = WagerState::with_log_wealth(vec![-2.0], &[1.0]);
        assert_eq!(state.p_value(), 1.0);
    }

    #[test]
    fn update_moves_wealth_with_the_draw() {
        let up = WagerState::single().update(0.9, &[1.0]).unwrap();
        assert!(up.log_wealth() > 0.0);
        let down = WagerState::single().update(0.1, &[1.0]).unwrap();
        assert!(down.log_wealth() < 0.0);
    }

    #[test]
    fn degenerate_mixture_matches_single_component() {
        let s = spec(0.10);
        let a = s.noerror();
        let b = 7;
        let weights = vec![1.0 / b as f64; b];
        let mut mix = WagerState::mixture(&weights).unwrap();
        let mut single = WagerState::single();
        let bets = vec![1.3; b];
        for &x in &[a, 0.5 * a, a, a, 0.0, a, 0.5 * a, a] {
            mix = mix.update(x, &bets).unwrap();
            single = single.update(x, &[1.3]).unwrap();
            assert_relative_eq!(mix.log_wealth(), single.log_wealth(), max_relative = 1e-9);
            assert_relative_eq!(mix.p_value(), single.p_value(), max_relative = 1e-9);
        }
    }

    #[test]
    fn mixture_survives_one_broke_component() {
        let weights = [0.5, 0.5];
        let mut state = WagerState::mixture(&weights).unwrap();
        // First component goes broke on a two-vote overstatement; the
        // second keeps the mixture alive.
        state = state.update(0.0, &[2.0, 0.5]).unwrap();
        assert!(!state.stalled());
        assert!(state.p_value() < 1.0 + 1e-12);
        assert_eq!(state.component_log_wealth()[0], f64::NEG_INFINITY);
        // Total wealth is θ_2 · 0.75.
        assert_relative_eq!(state.log_wealth(), (0.5 * 0.75).ln(), max_relative = 1e-12);
    }

    #[test]
    fn mixture_weight_validation() {
        assert!(WagerState::mixture(&[]).is_err());
        assert!(WagerState::mixture(&[0.5, 0.6]).is_err());
        assert!(WagerState::mixture(&[-0.5, 1.5]).is_err());
        assert!(WagerState::mixture(&[0.25; 4]).is_ok());
    }

    #[test]
    fn update_rejects_bad_inputs() {
        let state = WagerState::single();
        assert!(state.clone().update(-0.1, &[1.0]).is_err());
        assert!(state.clone().update(0.5, &[2.1]).is_err());
        assert!(state.clone().update(0.5, &[-0.1]).is_err());
        assert!(state.update(0.5, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn supermartingale_mean_is_one_on_the_null_boundary() {
        // Three-point population with mean exactly 1/2 (p1 + 2 p2 = v):
        // the average factor over many draws should sit within 3 standard
        // errors of 1 for any fixed bet.
        use rand::Rng;
        use rand::SeedableRng;
        let s = spec(0.10);
        let a = s.noerror();
        let (p1, p2) = (0.04, 0.03);
        let lambda = 1.2f64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let u: f64 = rng.random();
            let x = if u < p2 {
                0.0
            } else if u < p1 + p2 {
                0.5 * a
            } else {
                a
            };
            let t = 1.0 + lambda * (x - 0.5);
            sum += t;
            sumsq += t * t;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se,
            "mean factor {mean} departs from 1 by more than 3 SE ({se})"
        );
    }

    #[test]
    fn alpha_eta_endpoints_and_round_trip() {
        let s = spec(0.10);
        assert_relative_eq!(alpha_eta(2.0, &s), s.upper_bound(), epsilon = 1e-15);
        assert_relative_eq!(alpha_eta(0.0, &s), 0.5, epsilon = 1e-15);
        assert_relative_eq!(alpha_eta(1.6, &s), 0.942105, epsilon = 1e-6);
        for &lambda in &[0.0, 0.3, 1.0, 1.6, 2.0] {
            assert_relative_eq!(
                alpha_lambda(alpha_eta(lambda, &s), &s),
                lambda,
                epsilon = 1e-12
            );
        }
    }
}
