//! Deterministic, platform-stable seed derivation.
//!
//! Every random draw in this crate comes from a ChaCha8 stream whose seed is
//! derived from a master seed with the fixed 64-bit mixes below (splitmix64
//! finalizer over FNV-1a folds). The scheme is pure integer arithmetic, so
//! identical inputs produce identical streams on every platform, and distinct
//! (purpose, index) pairs get statistically independent streams.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// splitmix64 finalizer.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a parent seed and a purpose/index word.
pub fn combine(seed: u64, word: u64) -> u64 {
    mix64(seed ^ mix64(word))
}

/// Derive a sub-seed from a seed and a string key (FNV-1a over the bytes).
pub fn combine_str(seed: u64, key: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in key.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    combine(seed, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen outputs: these values pin the derivation scheme. If any of them
    // changes, every seeded artifact in the project changes with it.
    #[test]
    fn derivation_is_frozen() {
        assert_eq!(mix64(0), 16294208416658607535);
        assert_eq!(mix64(1), 10451216379200822465);
        assert_eq!(combine(42, 7), 7974615062405353404);
        assert_eq!(combine(7, 42), 1587005860896957696);
        assert_eq!(combine_str(42, "case-00000"), 1804699312227659455);
        assert_eq!(combine_str(42, "case-00001"), 5306135947447669227);
    }

    #[test]
    fn distinct_words_give_distinct_seeds() {
        let a: Vec<u64> = (0..100).map(|i| combine(5, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}
