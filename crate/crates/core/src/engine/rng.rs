use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every trial.
pub type TrialRng = ChaCha8Rng;

/// `(master seed, stream id)`: a trial's randomness is a pure function of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngContract {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngContract {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngContract {
            master_seed,
            stream_id,
        }
    }

    pub fn generator(&self) -> TrialRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Number of 32-bit words drawn so far.
pub fn position(rng: &TrialRng) -> u128 {
    rng.get_word_pos()
}

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Key of the `index`-th child of the node keyed `parent`.
#[inline]
pub(crate) fn child_key(parent: u64, index: u32) -> u64 {
    mix64(parent.rotate_left(17) ^ mix64(index as u64 + 1))
}

/// Generator for one node of a keyed tree: same seed, per-node stream.
#[inline]
pub(crate) fn node_rng(tree_seed: &[u8; 32], key: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::from_seed(*tree_seed);
    rng.set_stream(key);
    rng
}
