use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams per pipeline stage, all derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Classes = 1,
    Relations = 2,
    Typing = 3,
    Triples = 4,
}

pub fn stage_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
