use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::wilson_interval;
use crate::rng::{SessionRng, StreamKind};
use crate::source::{Block, SourceModel};

use super::session::{hybrid_run, Protocol};
use super::{AbortCause, SessionOutcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub trials: u64,
    pub agreed: u64,
    pub reliability: f64,
    /// 95% Wilson interval for the reliability.
    pub reliability_ci: (f64, f64),
    pub failure_rate: f64,
    /// Binomial standard error of the failure rate.
    pub failure_sigma: f64,
    pub aborts: BTreeMap<AbortCause, u64>,
    pub constant_keys: u64,
    pub mean_stop_round: f64,
    pub mean_physical_bits: f64,
    pub mean_log_cardinality: f64,
}

fn run_trials(
    source: &SourceModel,
    slice_count: usize,
    trials: u64,
    master: u64,
    mut session: impl FnMut(&Block, &SessionRng) -> Result<SessionOutcome>,
    mut observe: impl FnMut(u64, &SessionOutcome),
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let mut agreed = 0;
    let mut aborts = BTreeMap::new();
    let mut constant_keys = 0;
    let (mut stop, mut phys, mut card) = (0.0, 0.0, 0.0);
    for t in 0..trials {
        let rng = SessionRng::new(master, t);
        let block = source.sample(&mut rng.stream(StreamKind::Source));
        let out = session(&block, &rng)?;
        if out.agreed() {
            agreed += 1;
        }
        if out.constant_key {
            constant_keys += 1;
        }
        *aborts.entry(out.abort).or_insert(0) += 1;
        stop += out.stop_round as f64;
        phys += out.transcript.physical_bits() as f64;
        card += out.transcript.log_cardinality(slice_count);
        observe(t, &out);
    }
    let n = trials as f64;
    let reliability = agreed as f64 / n;
    let failure_rate = 1.0 - reliability;
    Ok(McReport {
        trials,
        agreed,
        reliability,
        reliability_ci: wilson_interval(agreed, trials, 1.959964),
        failure_rate,
        failure_sigma: (failure_rate * reliability / n).sqrt(),
        aborts,
        constant_keys,
        mean_stop_round: stop / n,
        mean_physical_bits: phys / n,
        mean_log_cardinality: card / n,
    })
}

/// Run `trials` independent sessions; session `t` draws its block and all
/// protocol randomness from `SessionRng::new(master, t)`.
pub fn monte_carlo(protocol: &Protocol, trials: u64, master: u64) -> Result<McReport> {
    monte_carlo_traced(protocol, trials, master, |_, _| {})
}

/// As [`monte_carlo`], handing every session outcome to `observe`.
pub fn monte_carlo_traced(
    protocol: &Protocol,
    trials: u64,
    master: u64,
    observe: impl FnMut(u64, &SessionOutcome),
) -> Result<McReport> {
    run_trials(
        protocol.source(),
        protocol.config().slices.count(),
        trials,
        master,
        |b, r| protocol.run(b, r),
        observe,
    )
}

/// Monte Carlo over the hybrid of two protocols on the same source.
pub fn monte_carlo_hybrid(first: &Protocol, second: &Protocol, theta: f64, trials: u64, master: u64) -> Result<McReport> {
    run_trials(
        first.source(),
        first.config().slices.count().max(second.config().slices.count()),
        trials,
        master,
        |b, r| hybrid_run(first, second, theta, b, r),
        |_, _| {},
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::JointPmf;
    use crate::protocol::{SessionConfig, Variant};
    use crate::reconciliation::SliceSpec;

    fn equal_bits() -> Protocol {
        let src = SourceModel::iid(JointPmf::from_xy(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap(), 8).unwrap();
        let cfg = SessionConfig::new(SliceSpec::new(0.0, 1.0, 1.0).unwrap(), 3.0, 0.0, 4, Variant::P1).unwrap();
        Protocol::new(src, cfg).unwrap()
    }

    #[test]
    fn deterministic_success() {
        let r = monte_carlo(&equal_bits(), 500, 1).unwrap();
        assert_eq!(r.reliability, 1.0);
        assert_eq!(r.failure_sigma, 0.0);
        assert_eq!(r.aborts.get(&AbortCause::None), Some(&500));
        assert_eq!(r.mean_stop_round, 1.0);
    }

    #[test]
    fn single_trial() {
        let r = monte_carlo(&equal_bits(), 1, 1).unwrap();
        assert_eq!(r.trials, 1);
        assert!(r.reliability_ci.0 < 1.0 && r.reliability_ci.1 == 1.0);
        assert!(monte_carlo(&equal_bits(), 0, 1).is_err());
    }

    #[test]
    fn reproducible() {
        assert_eq!(monte_carlo(&equal_bits(), 50, 9).unwrap(), monte_carlo(&equal_bits(), 50, 9).unwrap());
    }
}
