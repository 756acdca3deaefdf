//! Seed-derivation discipline.
//!
//! All randomness in the toolkit flows from one 64-bit master seed. Each
//! component derives its own seed as
//! `splitmix64(master ^ fnv1a(label))` with a fixed textual label
//! (e.g. `"gen/truth"`, `"sweep/<point>"`), and feeds it to a ChaCha8 stream.
//! Derivations are position-independent, so adding a component never
//! perturbs the draws of another.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Per-component seed derived from the master seed and a component label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a(label.as_bytes()))
}
