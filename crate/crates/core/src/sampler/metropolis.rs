use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Random-walk Metropolis chain state for a scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetropolisState {
    pub current: f64,
    pub proposal_sd: f64,
    pub accepts: u64,
    pub attempts: u64,
}

impl MetropolisState {
    pub fn new(current: f64, proposal_sd: f64) -> Self {
        Self {
            current,
            proposal_sd,
            accepts: 0,
            attempts: 0,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepts as f64 / self.attempts as f64
        }
    }
}

/// Burn-in tuner nudging the proposal scale toward 0.3 to 0.5 acceptance.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProposalTuner {
    window_accepts: u64,
    window_attempts: u64,
}

impl ProposalTuner {
    pub const WINDOW: u64 = 50;

    pub fn record(&mut self, state: &mut MetropolisState, accepted: bool) {
        self.window_attempts += 1;
        if accepted {
            self.window_accepts += 1;
        }
        if self.window_attempts == Self::WINDOW {
            let rate = self.window_accepts as f64 / self.window_attempts as f64;
            if rate < 0.3 {
                state.proposal_sd *= 0.7;
            } else if rate > 0.5 {
                state.proposal_sd *= 1.3;
            }
            state.proposal_sd = state.proposal_sd.clamp(1e-4, 10.0);
            self.window_accepts = 0;
            self.window_attempts = 0;
        }
    }
}

/// One random-walk step; returns whether the proposal was accepted.
///
/// `current_log_target` is the log target at `state.current`. Proposals outside
/// `(lower, upper)` or with a NaN target count as rejections.
pub fn rw_metropolis_step<R, F>(
    state: &mut MetropolisState,
    current_log_target: f64,
    mut log_target: F,
    lower: f64,
    upper: f64,
    rng: &mut R,
) -> (bool, f64)
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    state.attempts += 1;
    let eps: f64 = StandardNormal.sample(rng);
    let proposal = state.current + state.proposal_sd * eps;
    let u: f64 = rng.random();
    if !(proposal > lower && proposal < upper) {
        return (false, current_log_target);
    }
    let lp = log_target(proposal);
    if lp.is_nan() {
        return (false, current_log_target);
    }
    if u.ln() < lp - current_log_target {
        state.current = proposal;
        state.accepts += 1;
        (true, lp)
    } else {
        (false, current_log_target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::RngStream;

    #[test]
    fn flat_target_accepts_inside_proposals() {
        let mut rng = RngStream::new(21, 0).rng();
        let mut state = MetropolisState::new(0.5, 0.4);
        let mut inside = 0;
        let mut probe = RngStream::new(21, 0).rng();
        for _ in 0..10_000 {
            let eps: f64 = StandardNormal.sample(&mut probe);
            let prop = state.current + state.proposal_sd * eps;
            let _: f64 = probe.random();
            if prop > 0.0 && prop < 1.0 {
                inside += 1;
            }
            let before = state.accepts;
            rw_metropolis_step(&mut state, 0.0, |_| 0.0, 0.0, 1.0, &mut rng);
            assert_eq!(state.accepts - before, u64::from(prop > 0.0 && prop < 1.0));
        }
        assert_eq!(state.accepts, inside);
        assert!(state.accepts <= state.attempts);
    }

    #[test]
    fn zero_proposal_never_moves() {
        let mut rng = RngStream::new(22, 0).rng();
        let mut state = MetropolisState::new(0.3, 0.0);
        for _ in 0..1000 {
            rw_metropolis_step(&mut state, 0.0, |_| 0.0, 0.0, 1.0, &mut rng);
        }
        assert_eq!(state.current, 0.3);
        assert_eq!(state.acceptance_rate(), 1.0);
    }

    #[test]
    fn standard_normal_target_variance() {
        let mut rng = RngStream::new(23, 0).rng();
        let mut state = MetropolisState::new(0.0, 2.4);
        let target = |x: f64| -0.5 * x * x;
        let mut lp = target(0.0);
        let mut draws = Vec::with_capacity(100_000);
        for _ in 0..1000 {
            lp = rw_metropolis_step(&mut state, lp, target, f64::NEG_INFINITY, f64::INFINITY, &mut rng).1;
        }
        for _ in 0..100_000 {
            lp = rw_metropolis_step(&mut state, lp, target, f64::NEG_INFINITY, f64::INFINITY, &mut rng).1;
            draws.push(state.current);
        }
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!((v - 1.0).abs() < 0.1, "variance {v}");
    }

    #[test]
    fn nan_target_is_rejected() {
        let mut rng = RngStream::new(24, 0).rng();
        let mut state = MetropolisState::new(0.0, 1.0);
        for _ in 0..100 {
            rw_metropolis_step(&mut state, 0.0, |_| f64::NAN, f64::NEG_INFINITY, f64::INFINITY, &mut rng);
        }
        assert_eq!(state.accepts, 0);
        assert_eq!(state.current, 0.0);
    }

    #[test]
    fn tuner_shrinks_on_low_acceptance() {
        let mut state = MetropolisState::new(0.0, 1.0);
        let mut tuner = ProposalTuner::default();
        for _ in 0..ProposalTuner::WINDOW {
            tuner.record(&mut state, false);
        }
        assert!((state.proposal_sd - 0.7).abs() < 1e-12);
    }
}
