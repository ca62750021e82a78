use std::time::Instant;

use super::{Decision, Policy, SplitEnv};
use crate::error::{Error, Result};
use crate::measures::{distance, Measure};
use crate::search::SearchOutcome;
use crate::trajectory::Point;

/// Splitting search driven by a trained policy (no skip actions).
pub fn rls_search(t: &[Point], q: &[Point], measure: Measure, policy: &Policy) -> Result<SearchOutcome> {
    rls_search_traced(t, q, measure, policy).map(|(out, _)| out)
}

pub fn rls_search_traced(
    t: &[Point],
    q: &[Point],
    measure: Measure,
    policy: &Policy,
) -> Result<(SearchOutcome, Vec<Decision>)> {
    if policy.k != 0 {
        return Err(Error::PolicyMismatch(format!("rls needs a k = 0 policy, got k = {}", policy.k)));
    }
    drive(t, q, measure, policy)
}

/// Splitting search with skip actions. The returned dissimilarity is
/// re-evaluated from scratch on the returned interval.
pub fn rls_skip_search(t: &[Point], q: &[Point], measure: Measure, policy: &Policy, k: usize) -> Result<SearchOutcome> {
    rls_skip_search_traced(t, q, measure, policy, k).map(|(out, _)| out)
}

pub fn rls_skip_search_traced(
    t: &[Point],
    q: &[Point],
    measure: Measure,
    policy: &Policy,
    k: usize,
) -> Result<(SearchOutcome, Vec<Decision>)> {
    if policy.k != k {
        return Err(Error::PolicyMismatch(format!("policy has k = {}, requested k = {k}", policy.k)));
    }
    drive(t, q, measure, policy)
}

fn drive(t: &[Point], q: &[Point], measure: Measure, policy: &Policy) -> Result<(SearchOutcome, Vec<Decision>)> {
    if measure.kind() != policy.measure {
        return Err(Error::PolicyMismatch(format!(
            "policy trained for {:?}, used with {}",
            policy.measure,
            measure.name()
        )));
    }
    let started = Instant::now();
    let mut env = SplitEnv::new(t, q, measure, policy.features, policy.k);
    let mut state = env.state();
    while !env.is_done() {
        let action = policy.act(&state)?;
        state = env.step(action)?.state;
    }
    let (interval, internal) = env.best().expect("episode scanned at least one point");
    let dissimilarity = if env.skipped() == 0 { internal } else { distance(measure, &t[interval.range()], q) };
    let out = SearchOutcome {
        interval,
        dissimilarity,
        explored: env.explored(),
        skipped: env.skipped(),
        elapsed: started.elapsed(),
    };
    Ok((out, env.trace().to_vec()))
}
