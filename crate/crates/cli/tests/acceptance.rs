//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS/FAIL line. Everything is exact at desk scale: expected
//! values come from independent brute-force computation, never from the
//! algorithms under test.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use fairex_core::cost::{
    missplit_product_sum, symmetric_cost, transport_cost,
};
use fairex_core::extraction::{fuzzy_extract, hamming_extract, sharp_extract, strong_extract};
use fairex_core::gen::{gen_instance, GenMode, GenParams};
use fairex_core::metric::{coarse_metric, combine_thresholds, threshold_family, SymMatrix};
use fairex_core::rational::{rat, rat_zero};
use fairex_core::seed::{derive_seed, splitmix64};
use fairex_core::verify::{verify_hamming, verify_orbits, verify_recovery_bounds};
use fairex_core::{Classifier, DistanceKind, GrayPolicy, OracleSpec, Rat, Universe};

const BUDGET: u64 = 1 << 20;

fn criterion(number: u32, label: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("ACCEPTANCE {number} [PASS] {label}"),
        Err(reason) => {
            println!("ACCEPTANCE {number} [FAIL] {label}: {reason}");
            panic!("acceptance criterion {number} failed: {reason}");
        }
    }
}

fn ensure(cond: bool, msg: impl Fn() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn policies() -> [GrayPolicy; 4] {
    [
        GrayPolicy::accept_all(),
        GrayPolicy::reject_all(),
        GrayPolicy::seeded(rat(1, 2), 0xfa1e),
        GrayPolicy::adversarial_flip_favoring(),
    ]
}

fn policy_name(i: usize) -> &'static str {
    ["accept-all", "reject-all", "seeded-random", "adversarial-flip-favoring"][i]
}

/// Feasible (n, m, delta) combinations for structured transport instances.
fn transport_shapes() -> [(usize, usize, Rat); 6] {
    [
        (8, 1, rat(1, 200)),
        (8, 2, rat(1, 200)),
        (10, 2, rat(1, 300)),
        (10, 3, rat(1, 300)),
        (12, 2, rat(1, 500)),
        (12, 3, rat(1, 500)),
    ]
}

fn strong_accepted(spec: &OracleSpec, ctx: usize, c: &Classifier) -> bool {
    spec.truth()
        .iter()
        .position(|t| t == c)
        .is_some_and(|i| spec.accepting_contexts()[i].contains(&ctx))
}

#[test]
fn acceptance_1_strong_extraction_exactness() {
    criterion(
        1,
        "strong extraction returns exactly T for 50 seeded specs (n <= 12, |T| <= 5, contexts <= 3)",
        || {
            for seed in 0..50u64 {
                let h = splitmix64(seed ^ 0xace1);
                let n = 6 + (h % 7) as usize; // 6..=12
                let m = 1 + ((h >> 8) % 5) as usize; // 1..=5
                let contexts = 1 + ((h >> 16) % 3) as usize; // 1..=3
                let spec = gen_instance(&GenParams {
                    n,
                    m,
                    delta: rat_zero(),
                    distance: DistanceKind::Strong,
                    gray: GrayPolicy::reject_all(),
                    context_count: contexts,
                    seed,
                    mode: GenMode::Structured,
                })
                .map_err(|e| format!("seed {seed}: generation failed: {e}"))?;
                let extracted = strong_extract(&spec, BUDGET)
                    .map_err(|e| format!("seed {seed}: {e}"))?;
                let expected: BTreeSet<Classifier> = spec.truth().iter().copied().collect();
                ensure(extracted == expected, || {
                    format!("seed {seed}: extracted set differs from T")
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_2_weak_oracle_contract() {
    criterion(
        2,
        "weak-oracle contract (strong-accepted => accepted, far => rejected) exhaustively at n <= 10",
        || {
            for kind in [
                DistanceKind::Hamming,
                DistanceKind::Transport,
                DistanceKind::SymmetricTransport,
            ] {
                for seed in 0..20u64 {
                    let h = splitmix64(seed ^ 0xcafe);
                    let gray = policies()[(h % 4) as usize];
                    let (n, m, delta) = match kind {
                        DistanceKind::Hamming => (8 + (h >> 8) as usize % 3, 2, rat(1, 1)),
                        _ => (8 + (h >> 8) as usize % 3, 1 + (h >> 16) as usize % 2, rat(1, 300)),
                    };
                    let spec = gen_instance(&GenParams {
                        n,
                        m,
                        delta,
                        distance: kind,
                        gray,
                        context_count: 2,
                        seed: derive_seed(seed, "acceptance/contract"),
                        mode: GenMode::Structured,
                    })
                    .map_err(|e| format!("{kind:?} seed {seed}: generation failed: {e}"))?;
                    for c in spec.universe().classifiers() {
                        let far = spec.far_from_all(&c).map_err(|e| e.to_string())?;
                        for ctx in 0..spec.contexts() {
                            let answer = spec.query(ctx, &c).map_err(|e| e.to_string())?;
                            ensure(!(strong_accepted(&spec, ctx, &c) && !answer), || {
                                format!("{kind:?} seed {seed}: strong-accepted ({ctx}, {c}) rejected")
                            })?;
                            ensure(!(far && answer), || {
                                format!("{kind:?} seed {seed}: far classifier {c} accepted")
                            })?;
                        }
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_3_hamming_extraction() {
    criterion(
        3,
        "Hamming extraction: components biject with T, representatives within delta, every gray policy",
        || {
            let shapes = [(10usize, 2usize, 1i128), (11, 3, 1), (12, 4, 1), (12, 2, 2)];
            for (pi, gray) in policies().into_iter().enumerate() {
                for seed in 0..30u64 {
                    let (n, m, delta_count) = shapes[(seed % 4) as usize];
                    let delta = rat(delta_count, 1);
                    let spec = gen_instance(&GenParams {
                        n,
                        m,
                        delta,
                        distance: DistanceKind::Hamming,
                        gray,
                        context_count: 2,
                        seed: derive_seed(seed, "acceptance/hamming"),
                        mode: GenMode::Structured,
                    })
                    .map_err(|e| format!("policy {pi} seed {seed}: generation failed: {e}"))?;
                    let clusters = hamming_extract(&spec, delta, BUDGET)
                        .map_err(|e| format!("policy {pi} seed {seed}: {e}"))?;
                    ensure(clusters.clusters.len() == spec.truth().len(), || {
                        format!(
                            "{} seed {seed}: {} components for {} truth members",
                            policy_name(pi),
                            clusters.clusters.len(),
                            spec.truth().len()
                        )
                    })?;
                    let verification = verify_hamming(&spec, &clusters)
                        .map_err(|e| e.to_string())?;
                    ensure(verification.pass, || {
                        format!(
                            "{} seed {seed}: {:?}",
                            policy_name(pi),
                            verification
                                .checks
                                .iter()
                                .filter(|c| !c.pass)
                                .collect::<Vec<_>>()
                        )
                    })?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_4_fuzzy_extraction() {
    criterion(
        4,
        "fuzzy extraction: orbits disjoint, cover accepted balanced set, faithful per truth member",
        || {
            let shapes = transport_shapes();
            for (pi, gray) in policies().into_iter().enumerate() {
                for seed in 0..30u64 {
                    let (n, m, delta) = shapes[(seed % 6) as usize];
                    let spec = gen_instance(&GenParams {
                        n,
                        m,
                        delta,
                        distance: DistanceKind::Transport,
                        gray,
                        context_count: 2,
                        seed: derive_seed(seed, "acceptance/fuzzy"),
                        mode: GenMode::Structured,
                    })
                    .map_err(|e| format!("policy {pi} seed {seed}: generation failed: {e}"))?;
                    let family = fuzzy_extract(&spec, delta, BUDGET)
                        .map_err(|e| format!("policy {pi} seed {seed}: {e}"))?;
                    let verification = verify_orbits(&spec, &family, BUDGET)
                        .map_err(|e| e.to_string())?;
                    ensure(verification.pass, || {
                        format!(
                            "{} seed {seed} (n={n}, m={m}): {:?}",
                            policy_name(pi),
                            verification
                                .checks
                                .iter()
                                .filter(|c| !c.pass)
                                .collect::<Vec<_>>()
                        )
                    })?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_5_sharp_extraction() {
    criterion(
        5,
        "sharp extraction: subset relations, error caps and injective matching; worked n=8 instance exact",
        || {
            // The hand-traced instance recovers T exactly.
            let t1: Classifier = "00001111".parse().unwrap();
            let t2: Classifier = "00110011".parse().unwrap();
            let worked = OracleSpec::new(
                vec![t1, t2],
                rat(1, 200),
                DistanceKind::Transport,
                2,
                vec![BTreeSet::from([0]), BTreeSet::from([1])],
                GrayPolicy::reject_all(),
                true,
            )
            .map_err(|e| e.to_string())?;
            let out = sharp_extract(&worked, worked.delta(), BUDGET).map_err(|e| e.to_string())?;
            ensure(out.p == vec![t1, t2] && out.q == vec![t1, t2], || {
                format!("worked instance recovered P={:?} Q={:?}", out.p, out.q)
            })?;
            let report = verify_recovery_bounds(&worked, &out).map_err(|e| e.to_string())?;
            ensure(report.pass, || "worked instance fails recovery bounds".into())?;

            let shapes = transport_shapes();
            for (pi, gray) in policies().into_iter().enumerate() {
                for seed in 0..30u64 {
                    let (n, m, delta) = shapes[(seed % 6) as usize];
                    let spec = gen_instance(&GenParams {
                        n,
                        m,
                        delta,
                        distance: DistanceKind::Transport,
                        gray,
                        context_count: 2,
                        seed: derive_seed(seed, "acceptance/fuzzy"),
                        mode: GenMode::Structured,
                    })
                    .map_err(|e| format!("policy {pi} seed {seed}: generation failed: {e}"))?;
                    let out = sharp_extract(&spec, delta, BUDGET)
                        .map_err(|e| format!("policy {pi} seed {seed}: {e}"))?;
                    let report = verify_recovery_bounds(&spec, &out)
                        .map_err(|e| e.to_string())?;
                    ensure(report.pass, || {
                        format!(
                            "{} seed {seed} (n={n}, m={m}): {:?}",
                            policy_name(pi),
                            report.per_index.iter().filter(|r| !r.pass).collect::<Vec<_>>()
                        )
                    })?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_6_cost_algebra() {
    criterion(
        6,
        "cost algebra: quadrant formula vs enumeration, flip invariance, fixed witnesses, mis-split identity",
        || {
            // Quadrant-product formula equals direct pair enumeration for
            // every classifier pair at n <= 6.
            for n in 2..=6usize {
                let universe = Universe::new(n).unwrap();
                for t in universe.classifiers() {
                    for c in universe.classifiers() {
                        let fast = transport_cost(&t, &c).map_err(|e| e.to_string())?;
                        let mut broken = 0u64;
                        for i in 0..n {
                            for j in (i + 1)..n {
                                if t.bit(i) == t.bit(j) && c.bit(i) != c.bit(j) {
                                    broken += 1;
                                }
                            }
                        }
                        ensure(fast.broken_pairs == broken, || {
                            format!("quadrant formula disagrees at t={t} c={c}")
                        })?;
                    }
                }
            }

            // C(t -> flip(t)) = 0 for every t at n <= 10.
            for n in 2..=10usize {
                let universe = Universe::new(n).unwrap();
                for t in universe.classifiers() {
                    let cost = transport_cost(&t, &t.flip()).map_err(|e| e.to_string())?;
                    ensure(cost.is_zero(), || format!("flip cost nonzero at {t}"))?;
                }
            }

            // Fixed asymmetry witness.
            let a: Classifier = "0000".parse().unwrap();
            let b: Classifier = "0001".parse().unwrap();
            let fwd = transport_cost(&a, &b).unwrap();
            let bwd = transport_cost(&b, &a).unwrap();
            ensure(
                fwd.as_ratio() == rat(1, 2) && bwd.as_ratio() == rat_zero(),
                || format!("asymmetry witness: {fwd:?} / {bwd:?}"),
            )?;

            // Fixed triangle-violation witness (legs measured from the
            // anchor b): C(b->a) + C(b->c) < C(a->c).
            let b: Classifier = "0101".parse().unwrap();
            let c: Classifier = "0011".parse().unwrap();
            let ba = transport_cost(&b, &a).unwrap().as_ratio();
            let bc = transport_cost(&b, &c).unwrap().as_ratio();
            let ac = transport_cost(&a, &c).unwrap().as_ratio();
            ensure(ac > ba + bc, || {
                format!("triangle witness failed: {ac} <= {ba} + {bc}")
            })?;

            // Symmetrized cost: symmetric, zero exactly on flip pairs.
            let u: Classifier = "011010".parse().unwrap();
            ensure(
                symmetric_cost(&u, &u.flip()).unwrap().is_zero()
                    && symmetric_cost(&u, &u).unwrap().is_zero(),
                || "symmetric cost not flip-blind".into(),
            )?;

            // Mis-split identity within 1e-12 on a 100-point grid.
            for &delta in &[0.001f64, 0.01, 0.02] {
                let lo = (2.0 * delta).sqrt();
                let hi = 1.0 - lo;
                for k in 0..=100 {
                    let tau = lo + (hi - lo) * k as f64 / 100.0;
                    let got = missplit_product_sum(tau, delta);
                    ensure((got - delta).abs() < 1e-12, || {
                        format!("mis-split identity off at tau={tau}, delta={delta}: {got}")
                    })?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_7_metric_amplification() {
    criterion(
        7,
        "amplification: 0 <= d - d_hat <= 1/k for 100 random matrices (n=50, k=10); pseudometric axioms at n=20",
        || {
            let n = 50usize;
            let k = 10usize;
            for matrix_index in 0..100u64 {
                let mut d = SymMatrix::zeros(n);
                let mut state = splitmix64(matrix_index ^ 0xa3f1);
                for u in 0..n {
                    for v in (u + 1)..n {
                        state = splitmix64(state);
                        d.set(u, v, rat((state % 1001) as i128, 1000));
                    }
                }
                let stack = threshold_family(&d, k).map_err(|e| e.to_string())?;
                let combined = combine_thresholds(&stack).map_err(|e| e.to_string())?;
                for u in 0..n {
                    for v in (u + 1)..n {
                        let diff = d.get(u, v) - combined.get(u, v);
                        ensure(diff >= rat_zero() && diff <= rat(1, k as i128), || {
                            format!("matrix {matrix_index}: |d - d_hat| out of range at ({u},{v})")
                        })?;
                    }
                }
            }

            // Pseudometric axioms over all triples at n = 20.
            let n = 20usize;
            for seed in 0..5u64 {
                let bits = splitmix64(seed ^ 0xbeef) & ((1 << n) - 1);
                let part = Classifier::from_bits(n, bits).map_err(|e| e.to_string())?;
                let metric = coarse_metric(&part);
                for u in 0..n {
                    ensure(metric.lookup(u, u) == 0, || "nonzero self-distance".into())?;
                    for v in 0..n {
                        ensure(metric.lookup(u, v) == metric.lookup(v, u), || {
                            "asymmetric coarse metric".into()
                        })?;
                        for w in 0..n {
                            ensure(
                                metric.lookup(u, w) <= metric.lookup(u, v) + metric.lookup(v, w),
                                || "triangle inequality violated".into(),
                            )?;
                        }
                    }
                }
            }
            Ok(())
        },
    );
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fairex")
}

fn run_in(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fairex-acc-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn acceptance_8_end_to_end_determinism() {
    criterion(
        8,
        "every command rerun at thread counts {1, 8} yields byte-identical output files",
        || {
            let dir = tempdir("determinism");
            let gen_args = [
                "gen", "--n", "10", "--m", "2", "--delta", "1/300", "--distance", "transport",
                "--policy", "seeded-random", "--seed", "42", "--out", "spec.json",
            ];
            ensure(run_in(&dir, &gen_args).status.success(), || "gen failed".into())?;
            let spec1 = std::fs::read(dir.join("spec.json")).unwrap();
            ensure(run_in(&dir, &gen_args).status.success(), || "gen rerun failed".into())?;
            ensure(spec1 == std::fs::read(dir.join("spec.json")).unwrap(), || {
                "gen outputs differ across reruns".into()
            })?;

            for algo in ["sharp", "fuzzy"] {
                let mut outputs = Vec::new();
                for threads in ["1", "8"] {
                    let name = format!("report-{algo}-{threads}.json");
                    let extract = run_in(
                        &dir,
                        &[
                            "extract", "--spec", "spec.json", "--algo", algo, "--threads",
                            threads, "--out", &name,
                        ],
                    );
                    ensure(extract.status.success(), || format!("extract {algo} failed"))?;
                    outputs.push(std::fs::read(dir.join(&name)).unwrap());
                }
                ensure(outputs[0] == outputs[1], || {
                    format!("{algo} reports differ across thread counts")
                })?;
            }

            let verify_args = [
                "verify", "--spec", "spec.json", "--report", "report-sharp-1.json", "--out",
                "v.json",
            ];
            ensure(run_in(&dir, &verify_args).status.success(), || "verify failed".into())?;
            let v1 = std::fs::read(dir.join("v.json")).unwrap();
            ensure(run_in(&dir, &verify_args).status.success(), || "verify rerun failed".into())?;
            ensure(v1 == std::fs::read(dir.join("v.json")).unwrap(), || {
                "verification files differ across reruns".into()
            })?;

            let mut summaries = Vec::new();
            for threads in ["1", "8"] {
                let name = format!("summary-{threads}.json");
                let sweep = run_in(
                    &dir,
                    &[
                        "sweep", "--n", "8,10", "--m", "1,2", "--delta", "1/300", "--distance",
                        "transport", "--policy", "accept-all,seeded-random", "--seeds", "3",
                        "--seed", "5", "--algo", "sharp", "--threads", threads, "--out", &name,
                    ],
                );
                ensure(sweep.status.success(), || "sweep failed".into())?;
                summaries.push(std::fs::read(dir.join(&name)).unwrap());
            }
            ensure(summaries[0] == summaries[1], || {
                "sweep summaries differ across thread counts".into()
            })?;
            Ok(())
        },
    );
}
