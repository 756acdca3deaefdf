//! Versioned file formats: oracle spec files, extraction reports and
//! verification reports.
//!
//! All files are canonical JSON (fixed field order, pretty-printed, trailing
//! newline), so identical inputs produce byte-identical files. Classifiers
//! serialize as bitstrings with index 0 leftmost; rationals as `"p/q"`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::extraction::{HammingClusters, OrbitFamily, OrbitPair, SharpOutput, SymmetricOutput};
use crate::oracle::{DistanceKind, GrayPolicy, OracleSpec};
use crate::rational::{rat_serde, Rat};
use crate::verify::{Check, RecoveryReport};

pub const SPEC_FORMAT_VERSION: u32 = 1;

/// On-disk oracle specification.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpecFile {
    pub version: u32,
    pub n: usize,
    #[serde(with = "rat_serde")]
    pub delta: Rat,
    pub distance_kind: DistanceKind,
    #[serde(rename = "T")]
    pub truth: Vec<Classifier>,
    pub context_count: usize,
    /// Map from truth index to its accepting contexts.
    pub accepting_contexts: BTreeMap<usize, Vec<usize>>,
    pub gray_policy: GrayPolicy,
    pub enforce_flip_rejection: bool,
}

impl SpecFile {
    pub fn from_spec(spec: &OracleSpec) -> Self {
        SpecFile {
            version: SPEC_FORMAT_VERSION,
            n: spec.universe().size(),
            delta: spec.delta(),
            distance_kind: spec.distance(),
            truth: spec.truth().to_vec(),
            context_count: spec.contexts(),
            accepting_contexts: spec
                .accepting_contexts()
                .iter()
                .enumerate()
                .map(|(i, ctxs)| (i, ctxs.iter().copied().collect()))
                .collect(),
            gray_policy: spec.gray_policy(),
            enforce_flip_rejection: spec.enforces_flip_rejection(),
        }
    }

    pub fn into_spec(self) -> Result<OracleSpec> {
        if self.version != SPEC_FORMAT_VERSION {
            return Err(Error::SpecInvalid(format!(
                "unsupported spec file version {} (expected {SPEC_FORMAT_VERSION})",
                self.version
            )));
        }
        for t in &self.truth {
            if t.len() != self.n {
                return Err(Error::SpecInvalid(format!(
                    "truth member {t} does not match n = {}",
                    self.n
                )));
            }
        }
        let mut accepting: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.truth.len()];
        for (index, ctxs) in self.accepting_contexts {
            if index >= self.truth.len() {
                return Err(Error::SpecInvalid(format!(
                    "accepting_contexts index {index} out of range"
                )));
            }
            accepting[index] = ctxs.into_iter().collect();
        }
        OracleSpec::new(
            self.truth,
            self.delta,
            self.distance_kind,
            self.context_count,
            accepting,
            self.gray_policy,
            self.enforce_flip_rejection,
        )
    }

    /// Canonical serialized bytes: pretty JSON plus trailing newline.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("spec file serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("spec file: {e}")))
    }
}

/// Hex SHA-256 of a file's bytes; reports carry the digest of the spec file
/// they were produced from, and verification refuses mismatches.
pub fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_encode(&hasher.finalize())
}

fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// On-disk extraction report. `orbits` lists the plain orbits first, then
/// the flip orbits in the same pair order, then (when present) the accepted
/// constant orbits; `orbit_pairs` is the pair count needed to reassemble the
/// structure. `runtime_ms` is pinned to zero in the file so that reruns are
/// byte-identical; wall-clock timing goes to stderr instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub algorithm: String,
    pub spec_digest: String,
    pub n: usize,
    #[serde(with = "rat_serde")]
    pub delta: Rat,
    pub orbit_pairs: usize,
    pub has_constant_orbits: bool,
    pub orbits: Vec<Vec<Classifier>>,
    #[serde(rename = "P")]
    pub p: Vec<Classifier>,
    #[serde(rename = "Q")]
    pub q: Vec<Classifier>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<Classifier>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_bounds: Option<RecoveryReport>,
    /// True when Hamming clusters all have diameter within 2*delta.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter_ok: Option<bool>,
    pub runtime_ms: u64,
    pub query_count: u64,
}

impl ReportFile {
    fn base(algorithm: &str, spec_digest: String, n: usize, delta: Rat, query_count: u64) -> Self {
        ReportFile {
            algorithm: algorithm.into(),
            spec_digest,
            n,
            delta,
            orbit_pairs: 0,
            has_constant_orbits: false,
            orbits: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            partitions: None,
            recovery_bounds: None,
            diameter_ok: None,
            runtime_ms: 0,
            query_count,
        }
    }

    pub fn for_strong(
        spec_digest: String,
        n: usize,
        delta: Rat,
        extracted: &BTreeSet<Classifier>,
        query_count: u64,
    ) -> Self {
        let mut r = Self::base("strong", spec_digest, n, delta, query_count);
        r.orbits = vec![extracted.iter().copied().collect()];
        r
    }

    pub fn for_hamming(
        spec_digest: String,
        n: usize,
        delta: Rat,
        clusters: &HammingClusters,
        query_count: u64,
    ) -> Self {
        let mut r = Self::base("hamming", spec_digest, n, delta, query_count);
        r.orbits = clusters
            .clusters
            .iter()
            .map(|c| c.members.iter().copied().collect())
            .collect();
        r.diameter_ok = Some(clusters.diameter_ok);
        r
    }

    fn family_orbits(family: &OrbitFamily) -> (usize, bool, Vec<Vec<Classifier>>) {
        let mut orbits: Vec<Vec<Classifier>> = family
            .pairs
            .iter()
            .map(|p| p.orbit.iter().copied().collect())
            .collect();
        orbits.extend(
            family
                .pairs
                .iter()
                .map(|p| p.flip_orbit.iter().copied().collect::<Vec<_>>()),
        );
        let has_constants = family.constant_pair.is_some();
        if let Some((ones, zeros)) = &family.constant_pair {
            orbits.push(ones.iter().copied().collect());
            orbits.push(zeros.iter().copied().collect());
        }
        (family.pairs.len(), has_constants, orbits)
    }

    pub fn for_fuzzy(
        spec_digest: String,
        n: usize,
        delta: Rat,
        family: &OrbitFamily,
        query_count: u64,
    ) -> Self {
        let mut r = Self::base("fuzzy", spec_digest, n, delta, query_count);
        let (pairs, constants, orbits) = Self::family_orbits(family);
        r.orbit_pairs = pairs;
        r.has_constant_orbits = constants;
        r.orbits = orbits;
        r
    }

    pub fn for_sharp(
        spec_digest: String,
        n: usize,
        delta: Rat,
        out: &SharpOutput,
        bounds: Option<RecoveryReport>,
        query_count: u64,
    ) -> Self {
        let mut r = Self::base("sharp", spec_digest, n, delta, query_count);
        let (pairs, constants, orbits) = Self::family_orbits(&out.family);
        r.orbit_pairs = pairs;
        r.has_constant_orbits = constants;
        r.orbits = orbits;
        r.p = out.p.clone();
        r.q = out.q.clone();
        r.recovery_bounds = bounds;
        r
    }

    pub fn for_symmetric(
        spec_digest: String,
        n: usize,
        delta: Rat,
        out: &SymmetricOutput,
        bounds: Option<RecoveryReport>,
        query_count: u64,
    ) -> Self {
        let mut r = Self::for_sharp(spec_digest, n, delta, &out.sharp, bounds, query_count);
        r.algorithm = "symmetric".into();
        r.partitions = Some(out.partitions.clone());
        r
    }

    /// Reassembles the orbit family encoded in `orbits`.
    pub fn to_family(&self) -> Result<OrbitFamily> {
        let expected = 2 * self.orbit_pairs + if self.has_constant_orbits { 2 } else { 0 };
        if self.orbits.len() != expected {
            return Err(Error::Parse(format!(
                "report encodes {} orbit sets, expected {expected}",
                self.orbits.len()
            )));
        }
        let pairs: Vec<OrbitPair> = (0..self.orbit_pairs)
            .map(|j| OrbitPair {
                orbit: self.orbits[j].iter().copied().collect(),
                flip_orbit: self.orbits[self.orbit_pairs + j].iter().copied().collect(),
            })
            .collect();
        let constant_pair = if self.has_constant_orbits {
            Some((
                self.orbits[2 * self.orbit_pairs].iter().copied().collect(),
                self.orbits[2 * self.orbit_pairs + 1].iter().copied().collect(),
            ))
        } else {
            None
        };
        Ok(OrbitFamily {
            pairs,
            constant_pair,
        })
    }

    /// Reassembles a sharp output (without intermediates) for re-verification.
    pub fn to_sharp(&self) -> Result<SharpOutput> {
        Ok(SharpOutput {
            p: self.p.clone(),
            q: self.q.clone(),
            details: Vec::new(),
            family: self.to_family()?,
        })
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("report file: {e}")))
    }
}

/// On-disk verification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationFile {
    pub algorithm: String,
    pub spec_digest: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_bounds: Option<RecoveryReport>,
    pub pass: bool,
}

impl VerificationFile {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("verification serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("verification file: {e}")))
    }
}
