//! Deterministic strong and weak fairness oracles built from explicit
//! specifications.
//!
//! An [`OracleSpec`] pins down a truth set `T`, a tolerance `delta`, a
//! distance notion, a finite context set, a gray-zone policy and an optional
//! flip-rejection rule; together these determine one deterministic oracle.
//! A weak oracle accepts everything the underlying strong oracle accepts and
//! rejects classifiers far from every member of `T`; the gray zone in
//! between is governed by the policy.
//!
//! Extraction code talks to oracles through [`OracleHandle`], which exposes
//! queries only; the truth set is not reachable through the handle.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, Universe};
use crate::cost::{in_close_alignment, is_balanced, is_faithful, symmetric_cost, transport_cost};
use crate::error::{Error, Result};
use crate::rational::{rat, rat_serde, Rat};
use crate::seed::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    #[serde(rename = "strong")]
    Strong,
    #[serde(rename = "hamming")]
    Hamming,
    #[serde(rename = "transport")]
    Transport,
    #[serde(rename = "symmetric-transport")]
    SymmetricTransport,
}

impl DistanceKind {
    pub fn is_weak(&self) -> bool {
        !matches!(self, DistanceKind::Strong)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceKind::Strong => "strong",
            DistanceKind::Hamming => "hamming",
            DistanceKind::Transport => "transport",
            DistanceKind::SymmetricTransport => "symmetric-transport",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrayKind {
    #[serde(rename = "accept-all")]
    AcceptAll,
    #[serde(rename = "reject-all")]
    RejectAll,
    #[serde(rename = "seeded-random")]
    SeededRandom,
    #[serde(rename = "adversarial-flip-favoring")]
    AdversarialFlipFavoring,
}

/// Gray-zone behavior: how the oracle answers on classifiers it is neither
/// forced to accept nor forced to reject. Responses are a deterministic pure
/// function of (policy, context, classifier bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayPolicy {
    pub kind: GrayKind,
    #[serde(with = "rat_serde")]
    pub accept_probability: Rat,
    pub seed: u64,
}

impl GrayPolicy {
    pub fn accept_all() -> Self {
        GrayPolicy {
            kind: GrayKind::AcceptAll,
            accept_probability: rat(1, 1),
            seed: 0,
        }
    }

    pub fn reject_all() -> Self {
        GrayPolicy {
            kind: GrayKind::RejectAll,
            accept_probability: rat(0, 1),
            seed: 0,
        }
    }

    pub fn seeded(accept_probability: Rat, seed: u64) -> Self {
        GrayPolicy {
            kind: GrayKind::SeededRandom,
            accept_probability,
            seed,
        }
    }

    /// Accepts exactly the gray-zone classifiers in close alignment with the
    /// flip of some truth member: the ones extraction is most easily
    /// confused by.
    pub fn adversarial_flip_favoring() -> Self {
        GrayPolicy {
            kind: GrayKind::AdversarialFlipFavoring,
            accept_probability: rat(0, 1),
            seed: 0,
        }
    }

    fn coin(&self, ctx: usize, c: &Classifier) -> bool {
        let mut h = splitmix64(self.seed);
        h = splitmix64(h ^ ctx as u64);
        h = splitmix64(h ^ c.bits());
        h = splitmix64(h ^ c.len() as u64);
        // 53 uniform bits against an exact rational probability.
        rat((h >> 11) as i128, 1i128 << 53) < self.accept_probability
    }
}

/// Full specification of one deterministic oracle. Immutable after
/// validation; queries are pure functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    universe: Universe,
    truth: Vec<Classifier>,
    delta: Rat,
    distance: DistanceKind,
    context_count: usize,
    accepting_contexts: Vec<BTreeSet<usize>>,
    gray: GrayPolicy,
    enforce_flip_rejection: bool,
}

impl OracleSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        truth: Vec<Classifier>,
        delta: Rat,
        distance: DistanceKind,
        context_count: usize,
        accepting_contexts: Vec<BTreeSet<usize>>,
        gray: GrayPolicy,
        enforce_flip_rejection: bool,
    ) -> Result<Self> {
        let first = truth
            .first()
            .ok_or_else(|| Error::SpecInvalid("truth set is empty".into()))?;
        let universe = first.universe();
        for t in &truth {
            if t.len() != universe.size() {
                return Err(Error::SpecInvalid(format!(
                    "truth member {t} has length {}, expected {}",
                    t.len(),
                    universe.size()
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &truth {
            if !seen.insert(*t) {
                return Err(Error::SpecInvalid(format!("duplicate truth member {t}")));
            }
        }
        if delta < rat(0, 1) {
            return Err(Error::SpecInvalid("delta must be non-negative".into()));
        }
        if matches!(
            distance,
            DistanceKind::Transport | DistanceKind::SymmetricTransport
        ) && delta > rat(1, 1)
        {
            return Err(Error::SpecInvalid(
                "transport deltas are fractions of C(n,2) and must lie in [0, 1]".into(),
            ));
        }
        if context_count == 0 {
            return Err(Error::SpecInvalid("context_count must be positive".into()));
        }
        if accepting_contexts.len() != truth.len() {
            return Err(Error::SpecInvalid(format!(
                "accepting_contexts has {} entries for {} truth members",
                accepting_contexts.len(),
                truth.len()
            )));
        }
        for (i, ctxs) in accepting_contexts.iter().enumerate() {
            if ctxs.is_empty() {
                return Err(Error::SpecInvalid(format!(
                    "truth member {} has no accepting context",
                    truth[i]
                )));
            }
            for &ctx in ctxs {
                if ctx >= context_count {
                    return Err(Error::SpecInvalid(format!(
                        "context {ctx} out of range for context_count {context_count}"
                    )));
                }
            }
        }
        if !matches!(gray.kind, GrayKind::SeededRandom) {
            // probability is carried but only read by seeded-random
        } else if gray.accept_probability < rat(0, 1) || gray.accept_probability > rat(1, 1) {
            return Err(Error::SpecInvalid(
                "accept_probability must lie in [0, 1]".into(),
            ));
        }

        let spec = OracleSpec {
            universe,
            truth,
            delta,
            distance,
            context_count,
            accepting_contexts,
            gray,
            enforce_flip_rejection,
        };

        // Forced flip rejection must never contradict strong acceptance:
        // such a spec would reject something it is required to accept and is
        // not a weak oracle at all.
        if spec.enforce_flip_rejection && spec.distance.is_weak() {
            for u in &spec.truth {
                if spec.flip_rejected(u)? {
                    return Err(Error::SpecInconsistent(format!(
                        "truth member {u} is in close alignment with the flip of a truth \
                         member whose flip is outside T; forced rejection contradicts \
                         strong acceptance"
                    )));
                }
            }
        }
        Ok(spec)
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn truth(&self) -> &[Classifier] {
        &self.truth
    }

    pub fn delta(&self) -> Rat {
        self.delta
    }

    pub fn distance(&self) -> DistanceKind {
        self.distance
    }

    pub fn contexts(&self) -> usize {
        self.context_count
    }

    pub fn accepting_contexts(&self) -> &[BTreeSet<usize>] {
        &self.accepting_contexts
    }

    pub fn gray_policy(&self) -> GrayPolicy {
        self.gray
    }

    pub fn enforces_flip_rejection(&self) -> bool {
        self.enforce_flip_rejection
    }

    fn strong_accepts(&self, ctx: usize, c: &Classifier) -> bool {
        self.truth
            .iter()
            .position(|t| t == c)
            .is_some_and(|i| self.accepting_contexts[i].contains(&ctx))
    }

    /// True iff `c` is far from every truth member under this spec's
    /// distance: the regime where a weak oracle must answer false.
    pub fn far_from_all(&self, c: &Classifier) -> Result<bool> {
        for t in &self.truth {
            let far = match self.distance {
                DistanceKind::Strong => {
                    return Err(Error::SpecInvalid(
                        "strong oracles have no distance notion".into(),
                    ))
                }
                DistanceKind::Hamming => Rat::from_integer(t.hamming(c)? as i128) > self.delta,
                DistanceKind::Transport => transport_cost(t, c)?.exceeds(self.delta),
                DistanceKind::SymmetricTransport => symmetric_cost(t, c)?.exceeds(self.delta),
            };
            if !far {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff `c` is in close alignment with the flip of some truth member
    /// whose flip lies outside `T`: the classifiers the flip-rejection rule
    /// forces to false.
    fn flip_rejected(&self, c: &Classifier) -> Result<bool> {
        for t in &self.truth {
            let f = t.flip();
            if !self.truth.contains(&f) && in_close_alignment(c, &f, self.delta)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn gray_accepts(&self, ctx: usize, c: &Classifier) -> Result<bool> {
        Ok(match self.gray.kind {
            GrayKind::AcceptAll => true,
            GrayKind::RejectAll => false,
            GrayKind::SeededRandom => self.gray.coin(ctx, c),
            GrayKind::AdversarialFlipFavoring => {
                let mut aligned = false;
                for t in &self.truth {
                    if in_close_alignment(c, &t.flip(), self.delta)? {
                        aligned = true;
                        break;
                    }
                }
                aligned
            }
        })
    }

    /// The oracle's answer on a (context, classifier) pair.
    ///
    /// Strong kind: accept iff `c` is a truth member and `ctx` is one of its
    /// accepting contexts. Weak kinds: accept whatever the strong oracle
    /// accepts; reject classifiers far from all of `T`; force-reject
    /// flip-aligned classifiers when the spec says so; otherwise defer to
    /// the gray policy.
    pub fn query(&self, ctx: usize, c: &Classifier) -> Result<bool> {
        if ctx >= self.context_count {
            return Err(Error::InvalidContext {
                context: ctx,
                context_count: self.context_count,
            });
        }
        if c.len() != self.universe.size() {
            return Err(Error::DimensionMismatch {
                left: c.len(),
                right: self.universe.size(),
            });
        }
        let strong = self.strong_accepts(ctx, c);
        if matches!(self.distance, DistanceKind::Strong) {
            return Ok(strong);
        }
        if strong {
            return Ok(true);
        }
        if self.far_from_all(c)? {
            return Ok(false);
        }
        if self.enforce_flip_rejection && self.flip_rejected(c)? {
            return Ok(false);
        }
        self.gray_accepts(ctx, c)
    }

    /// Exact delta-neighborhood of `t`: all classifiers delta-faithful to
    /// `t`, by brute force over all bit sequences. Verification oracle only.
    pub fn neighborhood(t: &Classifier, delta: Rat, budget: u64) -> Result<BTreeSet<Classifier>> {
        let universe = t.universe();
        let required = universe.classifier_count();
        if required > budget {
            return Err(Error::ResourceExceeded { required, budget });
        }
        let mut out = BTreeSet::new();
        for c in universe.classifiers() {
            if is_faithful(&c, t, delta)? {
                out.insert(c);
            }
        }
        Ok(out)
    }

    /// Ground-truth orbit map, computed from the definitions directly (not
    /// via the extraction algorithms): for each truth member, the accepted
    /// balanced classifiers faithful to it, split by alignment side.
    pub fn ground_truth_orbits(&self, budget: u64) -> Result<Vec<TruthNeighborhood>> {
        let accepted = enumerate_accepted(self, budget)?;
        let balanced: BTreeSet<Classifier> = accepted
            .iter()
            .filter(|c| is_balanced(c, self.delta))
            .copied()
            .collect();
        let mut out = Vec::with_capacity(self.truth.len());
        for (index, t) in self.truth.iter().enumerate() {
            let mut faithful = BTreeSet::new();
            let mut aligned = BTreeSet::new();
            let mut flip_aligned = BTreeSet::new();
            for c in &balanced {
                if is_faithful(c, t, self.delta)? {
                    faithful.insert(*c);
                    if in_close_alignment(c, t, self.delta)? {
                        aligned.insert(*c);
                    }
                    if in_close_alignment(c, &t.flip(), self.delta)? {
                        flip_aligned.insert(*c);
                    }
                }
            }
            out.push(TruthNeighborhood {
                truth_index: index,
                faithful,
                aligned,
                flip_aligned,
            });
        }
        Ok(out)
    }
}

/// Per-truth-member ground truth: accepted balanced classifiers faithful to
/// the member, and their alignment sides.
#[derive(Debug, Clone)]
pub struct TruthNeighborhood {
    pub truth_index: usize,
    pub faithful: BTreeSet<Classifier>,
    pub aligned: BTreeSet<Classifier>,
    pub flip_aligned: BTreeSet<Classifier>,
}

/// Query-only access to an oracle. Extraction algorithms are generic over
/// this trait, which keeps them honest: nothing but accept/reject answers
/// flows through.
pub trait OracleHandle {
    fn universe_size(&self) -> usize;
    fn context_count(&self) -> usize;
    fn query(&self, ctx: usize, c: &Classifier) -> Result<bool>;
}

impl OracleHandle for OracleSpec {
    fn universe_size(&self) -> usize {
        self.universe.size()
    }

    fn context_count(&self) -> usize {
        self.context_count
    }

    fn query(&self, ctx: usize, c: &Classifier) -> Result<bool> {
        OracleSpec::query(self, ctx, c)
    }
}

/// Wraps a handle and counts queries; the count lands in extraction reports.
pub struct CountingOracle<'a, H: OracleHandle + ?Sized> {
    inner: &'a H,
    count: AtomicU64,
}

impl<'a, H: OracleHandle + ?Sized> CountingOracle<'a, H> {
    pub fn new(inner: &'a H) -> Self {
        CountingOracle {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl<H: OracleHandle + ?Sized> OracleHandle for CountingOracle<'_, H> {
    fn universe_size(&self) -> usize {
        self.inner.universe_size()
    }

    fn context_count(&self) -> usize {
        self.inner.context_count()
    }

    fn query(&self, ctx: usize, c: &Classifier) -> Result<bool> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.query(ctx, c)
    }
}

/// Classifiers accepted under at least one context, via queries only. The
/// result is canonical (lexicographically sorted) regardless of evaluation
/// schedule.
pub fn enumerate_accepted<H: OracleHandle + ?Sized>(
    handle: &H,
    budget: u64,
) -> Result<BTreeSet<Classifier>> {
    let universe = Universe::new(handle.universe_size())?;
    let required = universe
        .classifier_count()
        .saturating_mul(handle.context_count() as u64);
    if required > budget {
        return Err(Error::ResourceExceeded { required, budget });
    }
    let mut out = BTreeSet::new();
    for c in universe.classifiers() {
        for ctx in 0..handle.context_count() {
            if handle.query(ctx, &c)? {
                out.insert(c);
                break;
            }
        }
    }
    Ok(out)
}

/// Structural findings about a spec's truth set: balance of each member,
/// quadrant margins of each pair, and flip-rejection consistency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub clause1_ok: bool,
    pub clause2_ok: bool,
    pub clause3_consistent: bool,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the structural requirements the extraction guarantees lean on.
///
/// Transport kinds: (1) every non-constant truth member is 4*delta-balanced;
/// (2) for every truth pair that is not a flip pair, at most one quadrant is
/// empty and non-empty quadrants hold strictly more than `2*sqrt(2*delta)*n`
/// elements; (3) flip rejection is in force (or vacuous) and consistent.
/// Hamming kind: pairwise separation `d_H > 4*delta` stands in for (2);
/// balance is not required. Strong kind: nothing to check.
pub fn check_assumptions(spec: &OracleSpec) -> AssumptionReport {
    let mut violations = Vec::new();
    let mut clause1_ok = true;
    let mut clause2_ok = true;
    let mut clause3_consistent = true;
    let n = spec.universe().size();
    let delta = spec.delta();

    match spec.distance() {
        DistanceKind::Strong => {}
        DistanceKind::Hamming => {
            let four_delta = rat(4, 1) * delta;
            for (i, t) in spec.truth().iter().enumerate() {
                for u in spec.truth().iter().skip(i + 1) {
                    let d = t.hamming(u).expect("same universe");
                    if Rat::from_integer(d as i128) <= four_delta {
                        clause2_ok = false;
                        violations.push(format!(
                            "separation violation: d_H({t}, {u}) = {d} <= 4*delta"
                        ));
                    }
                }
            }
        }
        DistanceKind::Transport | DistanceKind::SymmetricTransport => {
            let four_delta = rat(4, 1) * delta;
            for t in spec.truth() {
                if !t.is_constant() && !is_balanced(t, four_delta) {
                    clause1_ok = false;
                    violations.push(format!(
                        "clause 1: {t} is not 4*delta-balanced (sides {} and {})",
                        t.zeros_count(),
                        t.ones_count()
                    ));
                }
            }
            let quadrant_coeff = rat(8, 1) * delta; // (2*sqrt(2*delta)*n)^2 = 8*delta*n^2
            for (i, t) in spec.truth().iter().enumerate() {
                for u in spec.truth().iter().skip(i + 1) {
                    if *u == t.flip() {
                        continue; // flip pairs are exempt
                    }
                    let q = t.quadrants(u).expect("same universe");
                    if q.empty_count() > 1 {
                        clause2_ok = false;
                        violations.push(format!(
                            "clause 2: pair ({t}, {u}) has {} empty quadrants",
                            q.empty_count()
                        ));
                        continue;
                    }
                    for (name, g) in [
                        ("g00", q.g00()),
                        ("g01", q.g01()),
                        ("g10", q.g10()),
                        ("g11", q.g11()),
                    ] {
                        if g > 0 && !crate::rational::exceeds_scaled_sqrt(g, quadrant_coeff, n) {
                            clause2_ok = false;
                            violations.push(format!(
                                "clause 2: pair ({t}, {u}) quadrant {name} = {g} is non-empty \
                                 but not strictly above 2*sqrt(2*delta)*n"
                            ));
                        }
                    }
                }
            }
            // Clause 3 is vacuous when every flip is itself in T; otherwise
            // the spec must enforce flip rejection. Conflicts with strong
            // acceptance are already ruled out at validation.
            let vacuous = spec
                .truth()
                .iter()
                .all(|t| spec.truth().contains(&t.flip()));
            if !vacuous && !spec.enforces_flip_rejection() {
                clause3_consistent = false;
                violations.push(
                    "clause 3: spec does not enforce rejection of classifiers in close \
                     alignment with flips of truth members outside T"
                        .into(),
                );
            }
        }
    }

    AssumptionReport {
        clause1_ok,
        clause2_ok,
        clause3_consistent,
        violations,
    }
}
