use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for path `stream` of a run seeded with `master_seed`.
///
/// Each (master_seed, stream) pair addresses its own ChaCha keystream, so
/// path `i` draws the same numbers no matter which worker evaluates it or in
/// which order.
pub fn path_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
