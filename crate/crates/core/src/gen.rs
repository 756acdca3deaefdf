//! Seeded instance generation.
//!
//! Produces oracle specs whose truth sets satisfy the structural
//! requirements the extraction guarantees rely on, by rejection sampling
//! with per-member retries. Generation is fully determined by
//! `(params, seed)`; see [`crate::seed`] for the derivation discipline.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::Classifier;
use crate::cost::transport_cost;
use crate::error::{Error, Result};
use crate::oracle::{check_assumptions, DistanceKind, GrayPolicy, OracleSpec};
use crate::rational::{exceeds_scaled_sqrt, rat, Rat};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Truth sets satisfy the full structural requirements (balance and
    /// quadrant margins); extraction verifiers are guaranteed to pass.
    Structured,
    /// Relaxed: pairwise cost separation instead of quadrant margins.
    /// Exploratory only, no pass guarantee.
    SeparationOnly,
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    pub delta: Rat,
    pub distance: DistanceKind,
    pub gray: GrayPolicy,
    pub context_count: usize,
    pub seed: u64,
    pub mode: GenMode,
}

const MEMBER_ATTEMPTS: usize = 600;
const SET_ATTEMPTS: usize = 400;

/// Least count strictly above `sqrt(coeff) * n`, or `None` if no count up to
/// `n` qualifies.
fn least_exceeding(coeff: Rat, n: usize) -> Option<u64> {
    (0..=n as u64).find(|&s| exceeds_scaled_sqrt(s, coeff, n))
}

pub fn gen_instance(params: &GenParams) -> Result<OracleSpec> {
    if params.n < 4 {
        return Err(Error::GenerationFailed(format!(
            "universe size {} too small: need n >= 4",
            params.n
        )));
    }
    if params.m < 1 {
        return Err(Error::GenerationFailed("need at least one truth member".into()));
    }
    if params.context_count < 1 {
        return Err(Error::GenerationFailed("need at least one context".into()));
    }
    crate::classifier::Universe::new(params.n)?;

    let truth = match (params.distance, params.mode) {
        (DistanceKind::Strong, _) => sample_unconstrained(params)?,
        (DistanceKind::Hamming, _) => sample_hamming_separated(params)?,
        (DistanceKind::Transport | DistanceKind::SymmetricTransport, GenMode::Structured) => {
            sample_structured(params)?
        }
        (DistanceKind::Transport | DistanceKind::SymmetricTransport, GenMode::SeparationOnly) => {
            sample_separation_only(params)?
        }
    };

    let mut ctx_rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "gen/contexts"));
    let accepting: Vec<BTreeSet<usize>> = (0..truth.len())
        .map(|_| BTreeSet::from([ctx_rng.gen_range(0..params.context_count)]))
        .collect();

    // Flip rejection is what makes the structural guarantees hold for
    // transport kinds; Hamming and strong oracles do not use it.
    let enforce_flip_rejection = matches!(
        params.distance,
        DistanceKind::Transport | DistanceKind::SymmetricTransport
    );

    let spec = OracleSpec::new(
        truth,
        params.delta,
        params.distance,
        params.context_count,
        accepting,
        params.gray,
        enforce_flip_rejection,
    )?;

    if matches!(params.mode, GenMode::Structured) {
        let report = check_assumptions(&spec);
        if !report.all_ok() {
            return Err(Error::GenerationFailed(format!(
                "generated spec fails structural checks: {}",
                report.violations.join("; ")
            )));
        }
    }
    Ok(spec)
}

fn truth_rng(params: &GenParams) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "gen/truth"))
}

fn sample_unconstrained(params: &GenParams) -> Result<Vec<Classifier>> {
    let mut rng = truth_rng(params);
    let mask = if params.n == 64 {
        u64::MAX
    } else {
        (1u64 << params.n) - 1
    };
    let mut truth = Vec::with_capacity(params.m);
    for _ in 0..params.m {
        let mut placed = false;
        for _ in 0..MEMBER_ATTEMPTS {
            let c = Classifier::from_bits(params.n, rng.gen::<u64>() & mask)?;
            if !truth.contains(&c) {
                truth.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::GenerationFailed(format!(
                "could not draw {} distinct classifiers at n = {}",
                params.m, params.n
            )));
        }
    }
    Ok(truth)
}

fn sample_hamming_separated(params: &GenParams) -> Result<Vec<Classifier>> {
    let mut rng = truth_rng(params);
    let mask = if params.n == 64 {
        u64::MAX
    } else {
        (1u64 << params.n) - 1
    };
    let four_delta = rat(4, 1) * params.delta;
    let mut separation_rejections = 0u64;
    for _ in 0..SET_ATTEMPTS {
        let mut truth: Vec<Classifier> = Vec::with_capacity(params.m);
        let mut ok = true;
        for _ in 0..params.m {
            let mut placed = false;
            'member: for _ in 0..MEMBER_ATTEMPTS {
                let c = Classifier::from_bits(params.n, rng.gen::<u64>() & mask)?;
                if truth.contains(&c) {
                    continue;
                }
                for u in &truth {
                    let d = u.hamming(&c)?;
                    if Rat::from_integer(d as i128) <= four_delta {
                        separation_rejections += 1;
                        continue 'member;
                    }
                }
                truth.push(c);
                placed = true;
                break;
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(truth);
        }
    }
    Err(Error::GenerationFailed(format!(
        "pairwise Hamming separation d_H > 4*delta infeasible after {} set attempts \
         ({} separation rejections): n = {}, m = {}, 4*delta = {}",
        SET_ATTEMPTS,
        separation_rejections,
        params.n,
        params.m,
        crate::rational::format_rat(&four_delta),
    )))
}

/// Samples balanced truth members whose pairwise quadrants all sit strictly
/// above the `2*sqrt(2*delta)*n` margin.
fn sample_structured(params: &GenParams) -> Result<Vec<Classifier>> {
    let n = params.n;
    // Both the 4*delta-balance side bound and the quadrant margin reduce to
    // the same threshold: counts strictly above sqrt(8*delta)*n.
    let margin_coeff = rat(8, 1) * params.delta;
    let s_min = least_exceeding(margin_coeff, n).unwrap_or(n as u64 + 1);
    if params.m >= 2 && 4 * s_min > n as u64 {
        return Err(Error::GenerationFailed(format!(
            "assumption-1(2) infeasible: four quadrants strictly above \
             2*sqrt(2*delta)*n need n >= {} but n = {n}",
            4 * s_min
        )));
    }
    if 2 * s_min > n as u64 {
        return Err(Error::GenerationFailed(format!(
            "assumption-1(1) infeasible: 4*delta-balance needs both sides >= {s_min} \
             but n = {n}"
        )));
    }

    let mut rng = truth_rng(params);
    let mut margin_rejections = 0u64;
    let mut distinct_rejections = 0u64;
    for _ in 0..SET_ATTEMPTS {
        let mut truth: Vec<Classifier> = Vec::with_capacity(params.m);
        let mut ok = true;
        for _ in 0..params.m {
            let mut placed = false;
            'member: for _ in 0..MEMBER_ATTEMPTS {
                let k = rng.gen_range(s_min..=(n as u64 - s_min)) as usize;
                let ones: Vec<usize> = index::sample(&mut rng, n, k).into_vec();
                let c = Classifier::from_ones(n, &ones)?;
                // Flip pairs are kept out of T so every truth member owns a
                // plain orbit of its own.
                if truth.contains(&c) || truth.contains(&c.flip()) {
                    distinct_rejections += 1;
                    continue;
                }
                for u in &truth {
                    let q = u.quadrants(&c)?;
                    for g in [q.g00(), q.g01(), q.g10(), q.g11()] {
                        if !exceeds_scaled_sqrt(g, margin_coeff, n) {
                            margin_rejections += 1;
                            continue 'member;
                        }
                    }
                }
                truth.push(c);
                placed = true;
                break;
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(truth);
        }
    }
    let binding = if margin_rejections >= distinct_rejections {
        "assumption-1(2) quadrant margins"
    } else {
        "distinctness"
    };
    Err(Error::GenerationFailed(format!(
        "sampling exhausted after {SET_ATTEMPTS} set attempts; binding constraint: {binding} \
         (margin rejections {margin_rejections}, distinctness rejections {distinct_rejections})"
    )))
}

/// Relaxed sampler: balance is kept, quadrant margins are replaced by
/// pairwise transportation-cost separation in both directions.
fn sample_separation_only(params: &GenParams) -> Result<Vec<Classifier>> {
    let n = params.n;
    let balance_coeff = rat(8, 1) * params.delta;
    let s_min = least_exceeding(balance_coeff, n).unwrap_or(n as u64 + 1);
    if 2 * s_min > n as u64 {
        return Err(Error::GenerationFailed(format!(
            "assumption-1(1) infeasible: 4*delta-balance needs both sides >= {s_min} \
             but n = {n}"
        )));
    }
    let four_delta = rat(4, 1) * params.delta;
    let mut rng = truth_rng(params);
    let mut separation_rejections = 0u64;
    for _ in 0..SET_ATTEMPTS {
        let mut truth: Vec<Classifier> = Vec::with_capacity(params.m);
        let mut ok = true;
        for _ in 0..params.m {
            let mut placed = false;
            'member: for _ in 0..MEMBER_ATTEMPTS {
                let k = rng.gen_range(s_min..=(n as u64 - s_min)) as usize;
                let ones: Vec<usize> = index::sample(&mut rng, n, k).into_vec();
                let c = Classifier::from_ones(n, &ones)?;
                if truth.contains(&c) || truth.contains(&c.flip()) {
                    continue;
                }
                for u in &truth {
                    if !transport_cost(u, &c)?.exceeds(four_delta)
                        || !transport_cost(&c, u)?.exceeds(four_delta)
                    {
                        separation_rejections += 1;
                        continue 'member;
                    }
                }
                truth.push(c);
                placed = true;
                break;
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(truth);
        }
    }
    Err(Error::GenerationFailed(format!(
        "cost separation C > 4*delta (both directions) infeasible after {SET_ATTEMPTS} set \
         attempts ({separation_rejections} separation rejections)"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_params() -> GenParams {
        GenParams {
            n: 8,
            m: 2,
            delta: rat(1, 200),
            distance: DistanceKind::Transport,
            gray: GrayPolicy::reject_all(),
            context_count: 2,
            seed: 7,
            mode: GenMode::Structured,
        }
    }

    #[test]
    fn structured_instance_passes_checks_with_quadrant_margins() {
        let spec = gen_instance(&base_params()).unwrap();
        assert_eq!(spec.truth().len(), 2);
        let report = check_assumptions(&spec);
        assert!(report.all_ok(), "{:?}", report.violations);
        // All quadrants strictly above 2*sqrt(2*delta)*8 = 1.6, i.e. >= 2.
        let q = spec.truth()[0].quadrants(&spec.truth()[1]).unwrap();
        for g in [q.g00(), q.g01(), q.g10(), q.g11()] {
            assert!(g >= 2, "quadrant {g}");
        }
    }

    #[test]
    fn infeasible_parameters_name_the_binding_constraint() {
        let mut p = base_params();
        p.n = 4;
        p.m = 6;
        p.delta = rat(1, 10);
        let err = gen_instance(&p).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("assumption-1(2)"), "{msg}");
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = gen_instance(&base_params()).unwrap();
        let b = gen_instance(&base_params()).unwrap();
        assert_eq!(a, b);
        let mut p = base_params();
        p.seed = 8;
        let c = gen_instance(&p).unwrap();
        assert_ne!(a.truth(), c.truth());
    }

    #[test]
    fn hamming_instances_are_separated() {
        let p = GenParams {
            n: 12,
            m: 3,
            delta: rat(1, 1),
            distance: DistanceKind::Hamming,
            gray: GrayPolicy::accept_all(),
            context_count: 2,
            seed: 3,
            mode: GenMode::Structured,
        };
        let spec = gen_instance(&p).unwrap();
        let t = spec.truth();
        for i in 0..t.len() {
            for j in (i + 1)..t.len() {
                assert!(t[i].hamming(&t[j]).unwrap() > 4);
            }
        }
        assert!(!spec.enforces_flip_rejection());
        assert!(check_assumptions(&spec).all_ok());
    }

    #[test]
    fn separation_only_mode_can_violate_quadrant_margins() {
        let p = GenParams {
            mode: GenMode::SeparationOnly,
            m: 3,
            n: 10,
            delta: rat(1, 500),
            ..base_params()
        };
        let spec = gen_instance(&p).unwrap();
        assert_eq!(spec.truth().len(), 3);
        for (i, t) in spec.truth().iter().enumerate() {
            for u in spec.truth().iter().skip(i + 1) {
                assert!(transport_cost(t, u).unwrap().exceeds(rat(4, 500)));
            }
        }
    }

    #[test]
    fn strong_instances_need_no_structure() {
        let p = GenParams {
            distance: DistanceKind::Strong,
            m: 5,
            n: 6,
            ..base_params()
        };
        let spec = gen_instance(&p).unwrap();
        assert_eq!(spec.truth().len(), 5);
    }
}
