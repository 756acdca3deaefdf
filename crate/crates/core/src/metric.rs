//! Coarse metrics induced by classifiers and their amplification through
//! threshold families.
//!
//! A classifier induces a {0,1}-valued pseudometric: individuals on the same
//! side are at distance zero, individuals on different sides at distance
//! one. A richer metric can be approximated by a stack of such coarse
//! relations at nested thresholds; combining the stack by the
//! fraction-of-thresholds-exceeded rule recovers the source metric to
//! within `1/k`.

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::rational::{rat, rat_zero, Rat};

/// Symmetric matrix of rationals with zero diagonal, stored as the strict
/// upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    #[serde(with = "crate::rational::rat_vec_serde")]
    upper: Vec<Rat>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            upper: vec![rat_zero(); n * (n - 1) / 2],
        }
    }

    /// Builds from the strict upper triangle (pairs (0,1), (0,2), ...,
    /// (n-2,n-1) in row-major order).
    pub fn from_upper(n: usize, upper: Vec<Rat>) -> Result<Self> {
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidMetric(format!(
                "expected {} upper-triangle entries for n = {n}, got {}",
                n * (n - 1) / 2,
                upper.len()
            )));
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn upper_triangle(&self) -> &[Rat] {
        &self.upper
    }

    fn idx(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < v && v < self.n);
        // offset of row u plus column distance
        u * self.n - u * (u + 1) / 2 + (v - u - 1)
    }

    pub fn get(&self, u: usize, v: usize) -> Rat {
        if u == v {
            return rat_zero();
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.upper[self.idx(a, b)]
    }

    pub fn set(&mut self, u: usize, v: usize, value: Rat) {
        assert_ne!(u, v, "diagonal is fixed at zero");
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let i = self.idx(a, b);
        self.upper[i] = value;
    }

    /// All entries within [0, 1]?
    pub fn in_unit_range(&self) -> bool {
        self.upper
            .iter()
            .all(|r| *r >= rat_zero() && *r <= rat(1, 1))
    }
}

/// The two-class pseudometric induced by a classifier's partition. The flip
/// induces the identical metric, so the canonical representative is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoarseMetric {
    partition: Classifier,
}

impl CoarseMetric {
    pub fn partition(&self) -> Classifier {
        self.partition
    }

    /// 0 when the two individuals receive the same decision, 1 otherwise.
    pub fn lookup(&self, u: usize, v: usize) -> u8 {
        u8::from(self.partition.bit(u) != self.partition.bit(v))
    }

    pub fn matrix(&self) -> SymMatrix {
        let n = self.partition.len();
        let mut m = SymMatrix::zeros(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if self.lookup(u, v) == 1 {
                    m.set(u, v, rat(1, 1));
                }
            }
        }
        m
    }
}

/// The coarse metric induced by `c`: distance 0 within a side, 1 across.
pub fn coarse_metric(c: &Classifier) -> CoarseMetric {
    CoarseMetric {
        partition: c.canonical_partition(),
    }
}

/// One threshold level: the symmetric {0,1} relation `d(u,v) > theta`; when
/// that relation happens to be a two-class partition, its classifier.
#[derive(Debug, Clone)]
pub struct ThresholdLevel {
    n: usize,
    /// Strict upper triangle of the 0/1 relation.
    ones: Vec<bool>,
    /// Present when the relation is partition-consistent (the 1-pattern is a
    /// complete bipartite graph); raw relations from an arbitrary source
    /// metric usually are not.
    pub partition: Option<Classifier>,
}

impl ThresholdLevel {
    fn idx(&self, u: usize, v: usize) -> usize {
        u * self.n - u * (u + 1) / 2 + (v - u - 1)
    }

    pub fn lookup(&self, u: usize, v: usize) -> u8 {
        if u == v {
            return 0;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        u8::from(self.ones[self.idx(a, b)])
    }

    pub fn is_partition_consistent(&self) -> bool {
        self.partition.is_some()
    }

    /// Tries to realize the relation as a two-class partition: color
    /// individual 0 with 0, everything it is separated from with 1, and
    /// check the whole relation matches.
    fn extract_partition(&self) -> Option<Classifier> {
        let n = self.n;
        let mut ones = Vec::new();
        for v in 1..n {
            if self.lookup(0, v) == 1 {
                ones.push(v);
            }
        }
        let candidate = Classifier::from_ones(n, &ones).ok()?;
        for u in 0..n {
            for v in (u + 1)..n {
                let want = u8::from(candidate.bit(u) != candidate.bit(v));
                if self.lookup(u, v) != want {
                    return None;
                }
            }
        }
        Some(candidate.canonical_partition())
    }
}

/// A stack of `k` threshold relations, level `i` (1-based) holding the
/// relation `d(u,v) > i/k`. Levels are nested: a pair separated at level `i`
/// is separated at every level below.
#[derive(Debug, Clone)]
pub struct ThresholdStack {
    pub k: usize,
    pub n: usize,
    pub levels: Vec<ThresholdLevel>,
}

impl ThresholdStack {
    /// Monotone consistency: level i distance 1 implies level i-1 distance 1.
    pub fn check_monotone(&self) -> Result<()> {
        for level in 1..self.levels.len() {
            for u in 0..self.n {
                for v in (u + 1)..self.n {
                    if self.levels[level].lookup(u, v) == 1
                        && self.levels[level - 1].lookup(u, v) == 0
                    {
                        return Err(Error::NonMonotoneStack {
                            level: level + 1,
                            u,
                            v,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the `k`-level threshold stack of a source metric: level `i` sets
/// distance 1 on `(u,v)` iff `d(u,v) > i/k`.
pub fn threshold_family(d: &SymMatrix, k: usize) -> Result<ThresholdStack> {
    if k == 0 {
        return Err(Error::InvalidMetric("threshold count k must be positive".into()));
    }
    if !d.in_unit_range() {
        return Err(Error::InvalidMetric(
            "source metric entries must lie in [0, 1]".into(),
        ));
    }
    let n = d.size();
    let mut levels = Vec::with_capacity(k);
    for i in 1..=k {
        let theta = rat(i as i128, k as i128);
        let mut ones = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                ones.push(d.get(u, v) > theta);
            }
        }
        let mut level = ThresholdLevel {
            n,
            ones,
            partition: None,
        };
        level.partition = level.extract_partition();
        levels.push(level);
    }
    Ok(ThresholdStack { k, n, levels })
}

/// Combines a monotone stack into an approximate metric by the
/// fraction-of-thresholds-exceeded rule: `d_hat(u,v) = (#levels at 1) / k`.
/// Satisfies `0 <= d - d_hat <= 1/k` elementwise against the source.
pub fn combine_thresholds(stack: &ThresholdStack) -> Result<SymMatrix> {
    stack.check_monotone()?;
    let mut out = SymMatrix::zeros(stack.n);
    for u in 0..stack.n {
        for v in (u + 1)..stack.n {
            let count = stack
                .levels
                .iter()
                .filter(|level| level.lookup(u, v) == 1)
                .count();
            out.set(u, v, rat(count as i128, stack.k as i128));
        }
    }
    Ok(out)
}
