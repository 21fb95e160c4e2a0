//! Bayesian maximum-likelihood classification of adoption events.
//!
//! The likelihood of an ego trajectory factorises over steps (the process is
//! Markovian), so every hypothesis reduces to a sum of per-step log terms.
//! All computation stays in log space with explicit `-inf`: trajectories run
//! to thousands of steps and linear-space products underflow.

use serde::{Deserialize, Serialize};

use crate::contagion::{threshold_reached, CascadeRecord, Mechanism};
use crate::error::{Error, Result};
use crate::features::EgoObservation;
use crate::netgen::DegreeLaw;
use crate::scalar::Real;

/// How the threshold condition of a complex hypothesis is evaluated.
///
/// `Strict` mirrors the simulator (the infected count must exceed `phi * k`)
/// and is the right rule when the true parameters are known. `Inclusive`
/// additionally accepts equality (and requires at least one infected
/// neighbour); it is used with plug-in estimates, where `phi_hat` equals the
/// adoption-time infected fraction exactly and a strict test could never
/// fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdRule {
    Strict,
    Inclusive,
}

impl ThresholdRule {
    pub fn met<T: Real>(self, n_inf: usize, k: usize, phi: T) -> bool {
        match self {
            ThresholdRule::Strict => threshold_reached(n_inf, k, phi),
            ThresholdRule::Inclusive => {
                n_inf >= 1
                    && T::from_count(n_inf) - phi * T::from_count(k)
                        > -T::from_config(1e-9)
            }
        }
    }
}

/// A candidate explanation for one ego trajectory. The spontaneous variants
/// model an ego that carries the peer-driven assignment but fired through
/// the background rate; both map to the `St` class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypothesis<T> {
    Simple { beta: T },
    Complex { phi: T, rule: ThresholdRule },
    SpontaneousSimple { beta: T },
    SpontaneousComplex { phi: T, rule: ThresholdRule },
}

impl<T: Real> Hypothesis<T> {
    pub fn tag(&self) -> Mechanism {
        match self {
            Hypothesis::Simple { .. } => Mechanism::Sm,
            Hypothesis::Complex { .. } => Mechanism::Cx,
            Hypothesis::SpontaneousSimple { .. } | Hypothesis::SpontaneousComplex { .. } => {
                Mechanism::St
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match self {
            Hypothesis::Simple { beta } | Hypothesis::SpontaneousSimple { beta } => *beta,
            Hypothesis::Complex { phi, .. } | Hypothesis::SpontaneousComplex { phi, .. } => *phi,
        };
        if p < T::zero() || p > T::one() {
            return Err(Error::Config(format!("hypothesis parameter {p} not in [0, 1]")));
        }
        Ok(())
    }
}

/// One ego state transition between consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// 0 -> 0
    StaySusceptible,
    /// 0 -> 1
    Adopt,
    /// 1 -> 1
    StayInfected,
}

fn ln_checked<T: Real>(x: T) -> T {
    if x > T::zero() {
        x.ln()
    } else {
        T::neg_infinity()
    }
}

/// Log-probability of one transition given `n_inf` infected neighbours at
/// the previous step. `spontaneous_r = None` selects the two-mechanism form
/// (no background adoption, experiment-1 style); `Some(r)` selects the
/// four-scenario form where every susceptible step first survives (or uses)
/// the background rate.
pub fn step_loglik<T: Real>(
    transition: Transition,
    n_inf: usize,
    k: usize,
    hyp: &Hypothesis<T>,
    spontaneous_r: Option<T>,
) -> Result<T> {
    hyp.validate()?;
    if n_inf > k {
        return Err(Error::Config(format!("n_inf = {n_inf} exceeds degree {k}")));
    }
    if spontaneous_r.is_none()
        && matches!(
            hyp,
            Hypothesis::SpontaneousSimple { .. } | Hypothesis::SpontaneousComplex { .. }
        )
    {
        return Err(Error::Config(
            "spontaneous hypotheses need a background rate".into(),
        ));
    }
    if let Some(r) = spontaneous_r {
        if r < T::zero() || r > T::one() {
            return Err(Error::Config(format!("r = {r} not in [0, 1]")));
        }
    }
    if transition == Transition::StayInfected {
        return Ok(T::zero());
    }

    let one = T::one();
    // P(no transmission this step) under a simple mechanism.
    let escape = |beta: T| (one - beta).powi(n_inf as i32);
    let ln_stay_bg = spontaneous_r.map_or(T::zero(), |r| ln_checked(one - r));

    let ll = match (hyp, transition) {
        (Hypothesis::Simple { beta }, Transition::StaySusceptible) => {
            ln_stay_bg + ln_checked(escape(*beta))
        }
        (Hypothesis::Simple { beta }, Transition::Adopt) => {
            ln_stay_bg + ln_checked(one - escape(*beta))
        }
        (Hypothesis::SpontaneousSimple { beta }, Transition::StaySusceptible) => {
            ln_stay_bg + ln_checked(escape(*beta))
        }
        (Hypothesis::SpontaneousSimple { beta }, Transition::Adopt) => {
            ln_checked(spontaneous_r.unwrap()) + ln_checked(escape(*beta))
        }
        (Hypothesis::Complex { phi, rule }, Transition::StaySusceptible)
        | (Hypothesis::SpontaneousComplex { phi, rule }, Transition::StaySusceptible) => {
            if rule.met(n_inf, k, *phi) {
                T::neg_infinity()
            } else {
                ln_stay_bg
            }
        }
        (Hypothesis::Complex { phi, rule }, Transition::Adopt) => {
            if rule.met(n_inf, k, *phi) {
                T::zero()
            } else {
                T::neg_infinity()
            }
        }
        (Hypothesis::SpontaneousComplex { phi, rule }, Transition::Adopt) => {
            if rule.met(n_inf, k, *phi) {
                T::neg_infinity()
            } else {
                ln_checked(spontaneous_r.unwrap())
            }
        }
        (_, Transition::StayInfected) => unreachable!(),
    };
    Ok(ll)
}

/// Sums [`step_loglik`] over the observed trajectory `t = 0 .. t_a`; the
/// final step is the adoption, every earlier one a stay. `-inf` propagates
/// and short-circuits.
pub fn trajectory_loglik<T: Real>(
    obs: &EgoObservation,
    hyp: &Hypothesis<T>,
    spontaneous_r: Option<T>,
) -> Result<T> {
    let t_a = obs.adoption_time;
    let k = obs.degree;
    let mut times: Vec<u32> = obs.neighbor_infection_times.iter().flatten().copied().collect();
    times.sort_unstable();

    let mut total = T::zero();
    let mut n_inf = 0usize;
    let mut next = 0usize;
    let mut t = 0u32;
    while t < t_a {
        while next < times.len() && times[next] <= t {
            n_inf += 1;
            next += 1;
        }
        let transition = if t + 1 == t_a {
            Transition::Adopt
        } else {
            Transition::StaySusceptible
        };
        // constant-count stretches of stay steps collapse into one evaluation
        let run_end = if transition == Transition::Adopt {
            t + 1
        } else {
            let next_change = times.get(next).copied().unwrap_or(t_a - 1).min(t_a - 1);
            next_change.max(t + 1)
        };
        let step = step_loglik(transition, n_inf, k, hyp, spontaneous_r)?;
        if step == T::neg_infinity() {
            return Ok(T::neg_infinity());
        }
        total = total + step * T::from_f64((run_end - t) as f64).unwrap();
        t = run_end;
    }
    Ok(total)
}

/// True mechanism parameters supplied to the known-parameter classifier.
#[derive(Debug, Clone, Copy)]
pub struct KnownParams<T> {
    pub beta: T,
    pub phi: T,
    /// Background rate; required for the three-class comparison.
    pub r: Option<T>,
}

/// Outcome of one maximum-likelihood classification.
#[derive(Debug, Clone)]
pub struct ClassificationResult<T> {
    pub predicted: Mechanism,
    /// Log-likelihood per class, indexed by [`Mechanism::index`]; classes
    /// outside the comparison stay at `-inf`.
    pub log_likelihoods: [T; 3],
    /// Best minus second-best log-likelihood among the compared classes.
    pub margin: T,
}

fn argmax_with_priority<T: Real>(lls: &[T; 3], n_classes: usize) -> (Mechanism, T) {
    let order = [Mechanism::Sm, Mechanism::Cx, Mechanism::St];
    let mut best = order[0];
    for &m in order.iter().take(n_classes).skip(1) {
        if lls[m.index()] > lls[best.index()] {
            best = m;
        }
    }
    let mut second = T::neg_infinity();
    for &m in order.iter().take(n_classes) {
        if m != best && lls[m.index()] > second {
            second = lls[m.index()];
        }
    }
    let margin = if lls[best.index()] == T::neg_infinity() {
        T::zero()
    } else {
        lls[best.index()] - second
    };
    (best, margin)
}

/// Classifies an adoption with known parameters. Two classes (Sm vs Cx)
/// reproduce the experiment-1 comparison; three classes add the spontaneous
/// hypothesis, whose likelihood is the better of its simple-assigned and
/// complex-assigned scenario chains.
pub fn classify_known<T: Real>(
    obs: &EgoObservation,
    params: &KnownParams<T>,
    n_classes: usize,
) -> Result<ClassificationResult<T>> {
    let mut lls = [T::neg_infinity(); 3];
    match n_classes {
        2 => {
            lls[Mechanism::Sm.index()] =
                trajectory_loglik(obs, &Hypothesis::Simple { beta: params.beta }, None)?;
            lls[Mechanism::Cx.index()] = trajectory_loglik(
                obs,
                &Hypothesis::Complex {
                    phi: params.phi,
                    rule: ThresholdRule::Strict,
                },
                None,
            )?;
        }
        3 => {
            let r = params.r.ok_or_else(|| {
                Error::Config("three-class comparison needs the background rate r".into())
            })?;
            let rule = ThresholdRule::Strict;
            lls[Mechanism::Sm.index()] =
                trajectory_loglik(obs, &Hypothesis::Simple { beta: params.beta }, Some(r))?;
            lls[Mechanism::Cx.index()] = trajectory_loglik(
                obs,
                &Hypothesis::Complex { phi: params.phi, rule },
                Some(r),
            )?;
            let st_sm = trajectory_loglik(
                obs,
                &Hypothesis::SpontaneousSimple { beta: params.beta },
                Some(r),
            )?;
            let st_cx = trajectory_loglik(
                obs,
                &Hypothesis::SpontaneousComplex { phi: params.phi, rule },
                Some(r),
            )?;
            lls[Mechanism::St.index()] = st_sm.max(st_cx);
        }
        n => return Err(Error::Config(format!("n_classes = {n} not in {{2, 3}}"))),
    }
    let (predicted, margin) = argmax_with_priority(&lls, n_classes);
    Ok(ClassificationResult {
        predicted,
        log_likelihoods: lls,
        margin,
    })
}

/// Plug-in parameter estimates: `beta_hat` is the inverse of the received
/// stimulus count (undefined without stimuli), `phi_hat` the infected
/// fraction at adoption.
pub fn estimate_params<T: Real>(obs: &EgoObservation) -> (Option<T>, T) {
    let f4 = obs.sum_stimuli();
    let beta_hat = if f4 >= 1 {
        Some(T::one() / T::from_f64(f4 as f64).unwrap())
    } else {
        None
    };
    let phi_hat = T::from_count(obs.n_infected_neighbors()) / T::from_count(obs.degree.max(1));
    (beta_hat, phi_hat)
}

/// Literal background-rate estimator: the fraction of pre-adoption time an
/// ego spent susceptible with at least one infected neighbour, averaged over
/// egos. Egos with no susceptible time are excluded.
pub fn estimate_r_literal<'a, T: Real>(
    observations: impl IntoIterator<Item = &'a EgoObservation>,
) -> T {
    let mut sum = T::zero();
    let mut n = 0usize;
    for obs in observations {
        if obs.adoption_time == 0 {
            continue;
        }
        sum = sum
            + T::from_f64(obs.exposure_steps() as f64).unwrap()
                / T::from_f64(obs.adoption_time as f64).unwrap();
        n += 1;
    }
    if n == 0 {
        T::zero()
    } else {
        sum / T::from_count(n)
    }
}

/// Frequency-based alternative: spontaneous firings over susceptible
/// node-steps, pooled over cascades.
pub fn estimate_r_alt<'a, T: Real + 'a>(
    records: impl IntoIterator<Item = &'a CascadeRecord<T>>,
) -> T {
    let mut st = 0usize;
    let mut steps = 0usize;
    for c in records {
        st += c.count_fired(Mechanism::St);
        steps += c.susceptible_node_steps();
    }
    if steps == 0 {
        T::zero()
    } else {
        T::from_count(st) / T::from_count(steps)
    }
}

/// Three-class classification with estimated parameters. The complex
/// hypothesis uses the inclusive threshold rule (`phi_hat` equals the
/// adoption fraction exactly); an ego without any received stimulus has no
/// defined `beta_hat` and is compared against the spontaneous route only.
pub fn classify_unknown<T: Real>(
    obs: &EgoObservation,
    r_hat: T,
) -> Result<ClassificationResult<T>> {
    let (beta_hat, phi_hat) = estimate_params(obs);
    let rule = ThresholdRule::Inclusive;
    let mut lls = [T::neg_infinity(); 3];
    let mut st = T::neg_infinity();
    if let Some(beta) = beta_hat {
        lls[Mechanism::Sm.index()] =
            trajectory_loglik(obs, &Hypothesis::Simple { beta }, Some(r_hat))?;
        st = trajectory_loglik(obs, &Hypothesis::SpontaneousSimple { beta }, Some(r_hat))?;
    }
    lls[Mechanism::Cx.index()] =
        trajectory_loglik(obs, &Hypothesis::Complex { phi: phi_hat, rule }, Some(r_hat))?;
    let st_cx = trajectory_loglik(
        obs,
        &Hypothesis::SpontaneousComplex { phi: phi_hat, rule },
        Some(r_hat),
    )?;
    lls[Mechanism::St.index()] = st.max(st_cx);
    let (predicted, margin) = argmax_with_priority(&lls, 3);
    Ok(ClassificationResult {
        predicted,
        log_likelihoods: lls,
        margin,
    })
}

/// Smallest infected-neighbour count that satisfies the simulator's strict
/// threshold; `None` when even `k` infected neighbours cannot.
fn required_count<T: Real>(k: usize, phi: T) -> Option<usize> {
    (1..=k).find(|&n| threshold_reached(n, k, phi))
}

/// Closed-form two-class accuracy of the likelihood classifier on a degree-k
/// star. A simple ego is misclassified exactly when it adopts at the first
/// step after its m-th neighbour infection, having survived each earlier
/// stage; each stage is a race between two geometric clocks with success
/// probabilities `p_n = 1 - (1-r)^(k-n)` (next neighbour infection) and
/// `b_n = 1 - (1-beta)^n` (ego adoption). Complex egos are always classified
/// correctly, so ACC = 1 - P(miss | Sm) / 2. When the threshold is
/// unreachable the complex hypothesis never fires and the accuracy is 1.
pub fn analytic_accuracy<T: Real>(k: usize, beta: T, phi: T, r: T) -> T {
    let one = T::one();
    let half = T::from_config(0.5);
    let Some(m) = required_count(k, phi) else {
        return one;
    };
    let b = |n: usize| one - (one - beta).powi(n as i32);
    let p = |n: usize| one - (one - r).powi((k - n) as i32);
    let mut product = one;
    for n in 1..m {
        let (pn, bn) = (p(n), b(n));
        let denom = bn + pn - pn * bn;
        if denom <= T::zero() {
            return one;
        }
        product = product * (pn - pn * bn) / denom;
    }
    one - half * product * b(m)
}

/// Grid-level analytic accuracy: the star-degree law averages the per-degree
/// closed form.
pub fn analytic_accuracy_over_degrees<T: Real>(law: &DegreeLaw, beta: T, phi: T, r: T) -> T {
    law.pmf()
        .iter()
        .map(|&(k, w)| T::from_config(w) * analytic_accuracy(k, beta, phi, r))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ClockSemantics;
    use approx::assert_relative_eq;

    fn sync_obs(times: Vec<Option<u32>>, t_a: u32) -> EgoObservation {
        let stimuli = times
            .iter()
            .map(|t| t.map_or(0, |x| t_a.saturating_sub(x)))
            .collect();
        EgoObservation {
            ego: 0,
            degree: times.len(),
            adoption_time: t_a,
            neighbor_infection_times: times,
            neighbor_stimuli: stimuli,
            clock: ClockSemantics::Synchronous,
        }
    }

    #[test]
    fn step_values_match_direct_substitution() {
        // Sm stay with two infected neighbours: (1 - 0.3)^2 = 0.49
        let ll = step_loglik(
            Transition::StaySusceptible,
            2,
            4,
            &Hypothesis::Simple { beta: 0.3 },
            None,
        )
        .unwrap();
        assert_relative_eq!(ll, 0.49f64.ln(), epsilon = 1e-12);

        // Sm adopt with background survival: 0.995 * (1 - 0.49) = 0.50745
        let ll = step_loglik(
            Transition::Adopt,
            2,
            4,
            &Hypothesis::Simple { beta: 0.3 },
            Some(0.005),
        )
        .unwrap();
        assert_relative_eq!(ll, 0.50745f64.ln(), epsilon = 1e-12);

        // Cx adopt below threshold has probability zero
        let ll = step_loglik(
            Transition::Adopt,
            1,
            4,
            &Hypothesis::Complex {
                phi: 0.5,
                rule: ThresholdRule::Strict,
            },
            None,
        )
        .unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);

        // staying infected is certain
        let ll = step_loglik(
            Transition::StayInfected,
            0,
            4,
            &Hypothesis::Simple { beta: 0.3 },
            None,
        )
        .unwrap();
        assert_eq!(ll, 0.0);
    }

    #[test]
    fn single_step_simple_adoption() {
        let obs = sync_obs(vec![Some(0)], 1);
        let ll = trajectory_loglik(&obs, &Hypothesis::Simple { beta: 0.5 }, None).unwrap();
        assert_relative_eq!(ll, 0.5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn complex_trajectory_collects_only_background_stays() {
        // phi = 0.5, k = 2, neighbours at {3, 9}, adoption at 10: nine stay
        // steps carry (1 - r) each, the adoption step carries probability 1.
        let obs = sync_obs(vec![Some(3), Some(9)], 10);
        let r = 0.005f64;
        let ll = trajectory_loglik(
            &obs,
            &Hypothesis::Complex {
                phi: 0.5,
                rule: ThresholdRule::Strict,
            },
            Some(r),
        )
        .unwrap();
        assert_relative_eq!(ll, 9.0 * (1.0 - r).ln(), epsilon = 1e-12);
    }

    #[test]
    fn stay_after_crossing_kills_the_complex_hypothesis() {
        // threshold crossed at t = 3 (1/1 > 0.5) but adoption only at 6
        let obs = sync_obs(vec![Some(3)], 6);
        let ll = trajectory_loglik(
            &obs,
            &Hypothesis::Complex {
                phi: 0.5,
                rule: ThresholdRule::Strict,
            },
            Some(0.01),
        )
        .unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn loglik_is_additive_over_steps() {
        let obs = sync_obs(vec![Some(2), Some(5), None], 7);
        for hyp in [
            Hypothesis::Simple { beta: 0.3 },
            Hypothesis::SpontaneousSimple { beta: 0.3 },
        ] {
            let total = trajectory_loglik(&obs, &hyp, Some(0.01)).unwrap();
            let mut manual = 0.0;
            for t in 0..obs.adoption_time {
                let n_inf = obs.infected_at(t);
                let tr = if t + 1 == obs.adoption_time {
                    Transition::Adopt
                } else {
                    Transition::StaySusceptible
                };
                manual += step_loglik(tr, n_inf, 3, &hyp, Some(0.01)).unwrap();
            }
            assert_relative_eq!(total, manual, epsilon = 1e-10);
        }
    }

    #[test]
    fn known_two_class_prefers_the_generating_mechanism() {
        // Cx-consistent trajectory: adoption right after the second neighbour
        let cx_like = sync_obs(vec![Some(3), Some(9)], 10);
        let params = KnownParams { beta: 0.5, phi: 0.5, r: None };
        let res = classify_known(&cx_like, &params, 2).unwrap();
        assert_eq!(res.predicted, Mechanism::Cx);
        assert_eq!(res.log_likelihoods[Mechanism::Cx.index()], 0.0);

        // a stay step after crossing forces the simple explanation
        let sm_like = sync_obs(vec![Some(3), Some(5)], 9);
        let res = classify_known(&sm_like, &params, 2).unwrap();
        assert_eq!(res.predicted, Mechanism::Sm);
    }

    #[test]
    fn estimates_follow_their_definitions() {
        let obs = sync_obs(vec![Some(2), Some(5), None], 7);
        let (beta_hat, phi_hat): (Option<f64>, f64) = estimate_params(&obs);
        assert_relative_eq!(beta_hat.unwrap(), 1.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(phi_hat, 2.0 / 3.0, epsilon = 1e-12);

        // f4 = 5 over a degree-k ego with 2 of 5 infected
        let mut obs2 = sync_obs(vec![Some(1), None, None, None, Some(4)], 6);
        obs2.neighbor_stimuli = vec![5, 0, 0, 0, 0];
        let (b2, p2): (Option<f64>, f64) = estimate_params(&obs2);
        assert_relative_eq!(b2.unwrap(), 0.2);
        assert_relative_eq!(p2, 0.4);

        let single = sync_obs(vec![Some(0)], 1);
        let (b3, _): (Option<f64>, f64) = estimate_params(&single);
        assert_relative_eq!(b3.unwrap(), 1.0);
    }

    #[test]
    fn literal_r_estimator_is_the_stated_fraction() {
        // susceptible 10 steps, 4 of them with an infected neighbour
        let obs = sync_obs(vec![Some(6)], 10);
        assert_relative_eq!(estimate_r_literal::<f64>([&obs]), 0.4);
    }

    #[test]
    fn unknown_mode_never_calls_cx_with_late_adoption() {
        // time since last infected neighbour > 1: a stay step follows the
        // crossing under phi_hat, so the complex likelihood is -inf.
        let obs = sync_obs(vec![Some(2), Some(4)], 8);
        let res = classify_unknown(&obs, 0.01f64).unwrap();
        assert_eq!(res.log_likelihoods[Mechanism::Cx.index()], f64::NEG_INFINITY);
        assert_ne!(res.predicted, Mechanism::Cx);
    }

    #[test]
    fn unknown_mode_routes_stimulus_free_egos_to_spontaneous() {
        let obs = sync_obs(vec![None, None], 5);
        let res = classify_unknown(&obs, 0.02f64).unwrap();
        assert_eq!(res.predicted, Mechanism::St);
        assert_eq!(res.log_likelihoods[Mechanism::Sm.index()], f64::NEG_INFINITY);
        assert_eq!(res.log_likelihoods[Mechanism::Cx.index()], f64::NEG_INFINITY);
        assert!(res.log_likelihoods[Mechanism::St.index()].is_finite());
    }

    #[test]
    fn unknown_mode_accepts_immediate_adoption_as_complex() {
        // last infection one step before adoption: the inclusive rule lets
        // phi_hat fire exactly at the adoption step.
        let obs = sync_obs(vec![Some(3), Some(9)], 10);
        let res = classify_unknown(&obs, 0.005f64).unwrap();
        assert!(res.log_likelihoods[Mechanism::Cx.index()].is_finite());
        assert_eq!(res.predicted, Mechanism::Cx);
    }

    #[test]
    fn analytic_accuracy_known_points() {
        // m = 1 cells collapse to 1 - b_1 / 2
        assert_relative_eq!(analytic_accuracy(4, 0.9f64, 0.1, 0.05), 0.55, epsilon = 1e-12);
        // indistinguishable limit: beta = 1 with m = 1
        assert_relative_eq!(analytic_accuracy(4, 1.0f64, 0.1, 0.05), 0.5, epsilon = 1e-12);
        // hand-evaluated interior point (k = 4, beta = phi = 0.5, r = 0.05):
        // m = 3, stages 0.1248139 and 0.0314770, b_3 = 0.875
        assert_relative_eq!(
            analytic_accuracy(4, 0.5f64, 0.5, 0.05),
            0.99828115,
            epsilon = 1e-6
        );
    }

    #[test]
    fn analytic_accuracy_monotone_in_beta_and_phi() {
        let law = DegreeLaw::TruncatedBinomial { n: 1000, p: 0.004 };
        let grid = [0.1f64, 0.3, 0.5, 0.7, 0.9];
        // The beta trend carries a wobble of a few thousandths at phi = 0.5,
        // where integer k*phi cells make the required count jump; assert the
        // trend with that slack.
        for phi in grid {
            let accs: Vec<f64> = grid
                .iter()
                .map(|&b| analytic_accuracy_over_degrees(&law, b, phi, 0.05))
                .collect();
            assert!(
                accs.windows(2).all(|w| w[0] >= w[1] - 5e-3),
                "beta trend at phi={phi}: {accs:?}"
            );
            for &acc in &accs {
                assert!((0.5..=1.0).contains(&acc));
            }
        }
        for beta in grid {
            let accs: Vec<f64> = grid
                .iter()
                .map(|&p| analytic_accuracy_over_degrees(&law, beta, p, 0.05))
                .collect();
            assert!(
                accs.windows(2).all(|w| w[0] <= w[1] + 5e-3),
                "phi trend at beta={beta}: {accs:?}"
            );
        }
    }

    /// Independent Monte-Carlo oracle for the analytic formula: simulate the
    /// star race directly (geometric neighbour infections, per-step ego
    /// draws) and count trajectories that look complex-consistent. Written
    /// against the probabilistic definition, not the engine.
    #[test]
    fn analytic_accuracy_matches_monte_carlo_oracle() {
        use rand::Rng;
        let (k, beta, phi, r) = (4usize, 0.5f64, 0.5, 0.05);
        let m = required_count(k, phi).unwrap();
        let mut rng = crate::seeds::rng_for(0xacc, &[]);
        let reps = 100_000;
        let mut miss = 0usize;
        for _ in 0..reps {
            // A simple ego looks complex-consistent iff it adopts at a step
            // where the threshold holds and it never stayed susceptible
            // through an earlier crossing step.
            let mut n_inf = 0usize;
            let mut stayed_through_crossing = false;
            loop {
                let crossed = n_inf >= m;
                let ego_fires =
                    n_inf > 0 && rng.gen::<f64>() < 1.0 - (1.0 - beta).powi(n_inf as i32);
                if ego_fires {
                    if crossed && !stayed_through_crossing {
                        miss += 1;
                    }
                    break;
                }
                if crossed {
                    stayed_through_crossing = true;
                }
                for _ in n_inf..k {
                    if rng.gen::<f64>() < r {
                        n_inf += 1;
                    }
                }
            }
        }
        let simulated_acc = 1.0 - 0.5 * miss as f64 / reps as f64;
        let formula = analytic_accuracy(k, beta, phi, r);
        assert!(
            (simulated_acc - formula).abs() < 0.01,
            "oracle {simulated_acc} vs formula {formula}"
        );
    }

    #[test]
    fn unreachable_threshold_returns_certainty() {
        // phi = 1 can never be strictly exceeded
        assert_eq!(analytic_accuracy(4, 0.5f64, 1.0, 0.05), 1.0);
    }
}
