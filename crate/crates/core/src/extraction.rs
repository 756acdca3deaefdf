//! Extraction algorithms: exhaustive strong extraction, Hamming cluster
//! extraction, orbit construction (fuzzy extraction), merge-screened sharp
//! extraction, and the partition-valued variant for symmetrized-cost
//! oracles.
//!
//! All algorithms interact with the oracle exclusively through
//! [`OracleHandle`] queries. They run on any deterministic oracle; the
//! recovery guarantees additionally require the structural conditions
//! checked by [`crate::oracle::check_assumptions`].

use std::collections::BTreeSet;

use crate::classifier::{merge_ones, merge_zeros, Classifier, Universe};
use crate::cost::is_balanced;
use crate::error::{Error, Result};
use crate::oracle::{enumerate_accepted, OracleHandle};
use crate::rational::{exceeds_scaled_sqrt, rat, within_scaled_sqrt, Rat};

/// One orbit pair: classifiers grouped around a shared neighborhood, split
/// into the pivot-aligned side and the flip-aligned side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPair {
    pub orbit: BTreeSet<Classifier>,
    pub flip_orbit: BTreeSet<Classifier>,
}

/// Output of fuzzy extraction: disjoint orbit pairs over the accepted
/// balanced classifiers, plus singleton orbits for whichever constant
/// classifiers were accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitFamily {
    pub pairs: Vec<OrbitPair>,
    /// `(ones side, zeros side)`; present when a constant classifier was
    /// accepted, each side holding its constant only if actually accepted.
    pub constant_pair: Option<(BTreeSet<Classifier>, BTreeSet<Classifier>)>,
}

impl OrbitFamily {
    /// Every orbit set, plain orbits first in pair order, then flip orbits,
    /// then the constant sides.
    pub fn all_sets(&self) -> Vec<&BTreeSet<Classifier>> {
        let mut out: Vec<&BTreeSet<Classifier>> = self.pairs.iter().map(|p| &p.orbit).collect();
        out.extend(self.pairs.iter().map(|p| &p.flip_orbit));
        if let Some((ones, zeros)) = &self.constant_pair {
            out.push(ones);
            out.push(zeros);
        }
        out
    }
}

/// Exhaustive extraction from a strong oracle: every classifier accepted
/// under at least one context. For a strong oracle this is exactly the
/// truth set.
pub fn strong_extract<H: OracleHandle + ?Sized>(
    handle: &H,
    budget: u64,
) -> Result<BTreeSet<Classifier>> {
    enumerate_accepted(handle, budget)
}

#[derive(Debug, Clone)]
pub struct HammingCluster {
    pub members: BTreeSet<Classifier>,
    pub representative: Classifier,
}

#[derive(Debug, Clone)]
pub struct HammingClusters {
    pub clusters: Vec<HammingCluster>,
    /// True when every cluster has pairwise diameter at most `2*delta`, the
    /// structural signature of well-separated truth members. When false the
    /// separation precondition was violated and the clusters are unverified.
    pub diameter_ok: bool,
}

/// Clusters the accepted set by connectivity at Hamming radius `2*delta` and
/// reports each component with its lexicographically smallest member as
/// representative. Under pairwise truth separation `d_H > 4*delta` the
/// components biject with the truth members.
pub fn hamming_extract<H: OracleHandle + ?Sized>(
    handle: &H,
    delta: Rat,
    budget: u64,
) -> Result<HammingClusters> {
    let accepted: Vec<Classifier> = enumerate_accepted(handle, budget)?.into_iter().collect();
    let two_delta = rat(2, 1) * delta;
    let radius_ok =
        |a: &Classifier, b: &Classifier| -> Result<bool> {
            Ok(Rat::from_integer(a.hamming(b)? as i128) <= two_delta)
        };

    let mut parent: Vec<usize> = (0..accepted.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..accepted.len() {
        for j in (i + 1)..accepted.len() {
            if radius_ok(&accepted[i], &accepted[j])? {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, BTreeSet<Classifier>> = Default::default();
    for (i, member) in accepted.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().insert(*member);
    }
    let mut clusters: Vec<HammingCluster> = groups
        .into_values()
        .map(|members| {
            let representative = *members.first().expect("non-empty component");
            HammingCluster {
                members,
                representative,
            }
        })
        .collect();
    clusters.sort_by_key(|c| c.representative);

    let mut diameter_ok = true;
    'outer: for cluster in &clusters {
        let members: Vec<&Classifier> = cluster.members.iter().collect();
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                if !radius_ok(members[i], members[j])? {
                    diameter_ok = false;
                    break 'outer;
                }
            }
        }
    }

    Ok(HammingClusters {
        clusters,
        diameter_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SituationA {
    Holds,
    DoesNotHold,
}

impl SituationA {
    pub fn holds(&self) -> bool {
        matches!(self, SituationA::Holds)
    }
}

/// Quadrant test for a shared neighborhood: with quadrants of the ordered
/// pair `(u, v)` and threshold `thr = sqrt(2*delta)*n`, both
/// `min{g00,g01} <= thr < max{g00,g01}` and
/// `min{g10,g11} <= thr < max{g10,g11}` must hold. Comparisons are exact.
pub fn check_situation_a(u: &Classifier, v: &Classifier, delta: Rat) -> Result<SituationA> {
    let q = u.quadrants(v)?;
    let n = u.len();
    let coeff = rat(2, 1) * delta;
    let straddles = |a: u64, b: u64| {
        within_scaled_sqrt(a.min(b), coeff, n) && exceeds_scaled_sqrt(a.max(b), coeff, n)
    };
    Ok(
        if straddles(q.g00(), q.g01()) && straddles(q.g10(), q.g11()) {
            SituationA::Holds
        } else {
            SituationA::DoesNotHold
        },
    )
}

/// The complementary disjunction for classifiers from different
/// neighborhoods: `min{g00,g01} > thr` or `min{g10,g11} > thr`.
pub fn situation_b_holds(u: &Classifier, v: &Classifier, delta: Rat) -> Result<bool> {
    let q = u.quadrants(v)?;
    let n = u.len();
    let coeff = rat(2, 1) * delta;
    Ok(exceeds_scaled_sqrt(q.g00().min(q.g01()), coeff, n)
        || exceeds_scaled_sqrt(q.g10().min(q.g11()), coeff, n))
}

/// Orbit construction over the accepted balanced classifiers.
///
/// Repeatedly takes the canonically smallest remaining classifier as pivot,
/// seeds an orbit pair with it (and its flip, when present), and routes every
/// remaining classifier that passes the shared-neighborhood test to the
/// pivot side or the flip side according to whether `g00 > thr >= g01` for
/// the ordered pair (pivot, candidate); the candidate's flip, when still
/// unassigned, goes to the opposite side. Constant classifiers accepted by
/// the oracle are appended as singleton orbits.
pub fn fuzzy_extract<H: OracleHandle + ?Sized>(
    handle: &H,
    delta: Rat,
    budget: u64,
) -> Result<OrbitFamily> {
    fuzzy_extract_with_pivots(handle, delta, budget, &[])
}

/// [`fuzzy_extract`] with an explicit pivot preference list: when choosing a
/// pivot, the first preferred classifier still unassigned wins; otherwise
/// the canonical (lexicographically smallest) one is taken. The default
/// canonical order is a reproducibility choice, not a correctness
/// requirement, and this entry point exists to test exactly that.
pub fn fuzzy_extract_with_pivots<H: OracleHandle + ?Sized>(
    handle: &H,
    delta: Rat,
    budget: u64,
    preferred_pivots: &[Classifier],
) -> Result<OrbitFamily> {
    let n = handle.universe_size();
    let universe = Universe::new(n)?;
    let accepted = enumerate_accepted(handle, budget)?;
    let mut live: BTreeSet<Classifier> = accepted
        .iter()
        .filter(|c| is_balanced(c, delta))
        .copied()
        .collect();

    let coeff = rat(2, 1) * delta;
    let mut pairs = Vec::new();
    let mut preference = preferred_pivots.iter();
    while !live.is_empty() {
        let pivot = preference
            .by_ref()
            .find(|p| live.contains(p))
            .copied()
            .unwrap_or_else(|| *live.first().expect("non-empty"));
        live.remove(&pivot);
        let mut orbit = BTreeSet::from([pivot]);
        let mut flip_orbit = BTreeSet::new();
        let pivot_flip = pivot.flip();
        if live.remove(&pivot_flip) {
            flip_orbit.insert(pivot_flip);
        }

        let snapshot: Vec<Classifier> = live.iter().copied().collect();
        for c in snapshot {
            if !live.contains(&c) {
                continue; // already routed as someone's flip
            }
            if !check_situation_a(&pivot, &c, delta)?.holds() {
                continue;
            }
            let q = pivot.quadrants(&c)?;
            let pivot_side = exceeds_scaled_sqrt(q.g00(), coeff, n)
                && within_scaled_sqrt(q.g01(), coeff, n);
            live.remove(&c);
            let c_flip = c.flip();
            let flip_unassigned = live.remove(&c_flip);
            if pivot_side {
                orbit.insert(c);
                if flip_unassigned {
                    flip_orbit.insert(c_flip);
                }
            } else {
                flip_orbit.insert(c);
                if flip_unassigned {
                    orbit.insert(c_flip);
                }
            }
        }
        pairs.push(OrbitPair { orbit, flip_orbit });
    }

    let all_ones = Classifier::all_ones(universe.size())?;
    let all_zeros = Classifier::all_zeros(universe.size())?;
    let ones_accepted = accepted.contains(&all_ones);
    let zeros_accepted = accepted.contains(&all_zeros);
    let constant_pair = if ones_accepted || zeros_accepted {
        let mut ones_set = BTreeSet::new();
        let mut zeros_set = BTreeSet::new();
        if ones_accepted {
            ones_set.insert(all_ones);
        }
        if zeros_accepted {
            zeros_set.insert(all_zeros);
        }
        Some((ones_set, zeros_set))
    } else {
        None
    };

    Ok(OrbitFamily {
        pairs,
        constant_pair,
    })
}

/// Per-index intermediates of sharp extraction. The `*_closed` sets are the
/// orbit members that survive the merge-membership screen (all merges with
/// fellow members stay inside the orbit); the `*_merge` classifiers are the
/// merges over those survivors, absent when the source set is empty.
#[derive(Debug, Clone)]
pub struct SharpIndexDetail {
    pub ones_closed: BTreeSet<Classifier>,
    pub zeros_closed: BTreeSet<Classifier>,
    pub flip_zeros_closed: BTreeSet<Classifier>,
    pub flip_ones_closed: BTreeSet<Classifier>,
    pub ones_merge: Option<Classifier>,
    pub flip_zeros_merge: Option<Classifier>,
    pub zeros_merge: Option<Classifier>,
    pub flip_ones_merge: Option<Classifier>,
}

/// Output of sharp extraction: one `(P_j, Q_j)` pair per non-constant orbit
/// pair, `P_j` recovering the zeros side and `Q_j` the ones side of a truth
/// member (up to orientation), plus the intermediates and the underlying
/// orbit family.
#[derive(Debug, Clone)]
pub struct SharpOutput {
    pub p: Vec<Classifier>,
    pub q: Vec<Classifier>,
    pub details: Vec<SharpIndexDetail>,
    pub family: OrbitFamily,
}

/// Picks the recovered classifier from the two merge candidates. The plain
/// candidate wins ties; an absent candidate loses automatically; both absent
/// is a degenerate orbit.
fn choose_candidate(
    plain: Option<Classifier>,
    flipped: Option<Classifier>,
    plain_score: impl Fn(&Classifier) -> u64,
    flipped_score: impl Fn(&Classifier) -> u64,
    index: usize,
    side: &'static str,
) -> Result<Classifier> {
    match (plain, flipped) {
        (Some(a), Some(b)) => {
            if plain_score(&a) >= flipped_score(&b) {
                Ok(a)
            } else {
                Ok(b.flip())
            }
        }
        (Some(a), None) => Ok(a),
        (None, Some(b)) => Ok(b.flip()),
        (None, None) => Err(Error::DegenerateOrbit { index, side }),
    }
}

/// The merge-membership screen and final candidate selection, applied to an
/// existing orbit family. Exposed separately so orbit families from
/// non-canonical pivot orders can be driven through the same pipeline.
pub fn sharp_from_family(family: OrbitFamily) -> Result<SharpOutput> {
    let mut p = Vec::new();
    let mut q = Vec::new();
    let mut details = Vec::new();

    for (index, pair) in family.pairs.iter().enumerate() {
        let screen = |set: &BTreeSet<Classifier>,
                      merge: fn(&Classifier, &Classifier) -> Classifier|
         -> BTreeSet<Classifier> {
            set.iter()
                .filter(|cand| set.iter().all(|other| set.contains(&merge(cand, other))))
                .copied()
                .collect()
        };
        let mones = |a: &Classifier, b: &Classifier| merge_ones([a, b]).expect("same universe");
        let mzeros = |a: &Classifier, b: &Classifier| merge_zeros([a, b]).expect("same universe");

        let ones_closed = screen(&pair.orbit, mones);
        let zeros_closed = screen(&pair.orbit, mzeros);
        let flip_zeros_closed = screen(&pair.flip_orbit, mzeros);
        let flip_ones_closed = screen(&pair.flip_orbit, mones);

        let merge_over = |set: &BTreeSet<Classifier>,
                          op: fn(std::collections::btree_set::Iter<Classifier>) -> Result<Classifier>|
         -> Option<Classifier> {
            if set.is_empty() {
                None
            } else {
                Some(op(set.iter()).expect("non-empty, same universe"))
            }
        };
        let ones_merge = merge_over(&ones_closed, |it| merge_ones(it));
        let flip_zeros_merge = merge_over(&flip_zeros_closed, |it| merge_zeros(it));
        let zeros_merge = merge_over(&zeros_closed, |it| merge_zeros(it));
        let flip_ones_merge = merge_over(&flip_ones_closed, |it| merge_ones(it));

        // P_j = u_j when |u_j^0| >= |v_j^1|, else flip(v_j);
        // Q_j = w_j when |w_j^1| >= |x_j^0|, else flip(x_j).
        let p_j = choose_candidate(
            ones_merge,
            flip_zeros_merge,
            |u| u.zeros_count(),
            |v| v.ones_count(),
            index,
            "P",
        )?;
        let q_j = choose_candidate(
            zeros_merge,
            flip_ones_merge,
            |w| w.ones_count(),
            |x| x.zeros_count(),
            index,
            "Q",
        )?;

        p.push(p_j);
        q.push(q_j);
        details.push(SharpIndexDetail {
            ones_closed,
            zeros_closed,
            flip_zeros_closed,
            flip_ones_closed,
            ones_merge,
            flip_zeros_merge,
            zeros_merge,
            flip_ones_merge,
        });
    }

    Ok(SharpOutput {
        p,
        q,
        details,
        family,
    })
}

/// Fuzzy extraction followed by the merge-membership screen: for each orbit
/// pair, members whose merges stay inside the orbit are merged into the
/// recovered pair `(P_j, Q_j)`.
pub fn sharp_extract<H: OracleHandle + ?Sized>(
    handle: &H,
    delta: Rat,
    budget: u64,
) -> Result<SharpOutput> {
    let family = fuzzy_extract(handle, delta, budget)?;
    sharp_from_family(family)
}

/// Output of extraction from a symmetrized-cost oracle: partitions rather
/// than classifiers, since the symmetrized cost cannot distinguish a
/// classifier from its flip.
#[derive(Debug, Clone)]
pub struct SymmetricOutput {
    /// Each partition reported as the lexicographically smaller of the
    /// recovered classifier and its flip, in orbit order, deduplicated.
    pub partitions: Vec<Classifier>,
    pub sharp: SharpOutput,
}

/// Runs the sharp pipeline and collapses each recovered index (`P_j`,
/// `Q_j` and their flips) to a single canonical partition.
pub fn symmetric_extract<H: OracleHandle + ?Sized>(
    handle: &H,
    delta: Rat,
    budget: u64,
) -> Result<SymmetricOutput> {
    let sharp = sharp_extract(handle, delta, budget)?;
    let mut partitions: Vec<Classifier> = Vec::new();
    for p_j in &sharp.p {
        let canon = p_j.canonical_partition();
        if !partitions.contains(&canon) {
            partitions.push(canon);
        }
    }
    Ok(SymmetricOutput { partitions, sharp })
}
