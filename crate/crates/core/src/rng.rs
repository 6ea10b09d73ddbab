//! Per-process coin flips: a seeded ChaCha stream or an injected sequence.

use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forest::ProcId;

#[derive(Clone, Debug)]
pub enum FlipSource {
    Seeded(ChaCha8Rng),
    /// Replays `bits` in order, then continues with `fallback`.
    Script { bits: Vec<bool>, pos: usize, fallback: ChaCha8Rng },
}

impl FlipSource {
    /// Independent stream for `proc` under the run-level `seed`.
    pub fn for_proc(seed: u64, proc: ProcId) -> Self {
        FlipSource::Seeded(stream(seed, proc))
    }

    pub fn scripted(bits: Vec<bool>, seed: u64, proc: ProcId) -> Self {
        FlipSource::Script { bits, pos: 0, fallback: stream(seed, proc) }
    }

    /// A fair bit; `true` is heads.
    pub fn flip(&mut self) -> bool {
        match self {
            FlipSource::Seeded(r) => r.gen(),
            FlipSource::Script { bits, pos, fallback } => {
                if let Some(&b) = bits.get(*pos) {
                    *pos += 1;
                    b
                } else {
                    fallback.gen()
                }
            }
        }
    }
}

fn stream(seed: u64, proc: ProcId) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(proc.get() as u64);
    r
}

fn hash_rng<H: Hasher>(r: &ChaCha8Rng, state: &mut H) {
    r.get_seed().hash(state);
    r.get_stream().hash(state);
    r.get_word_pos().hash(state);
}

impl Hash for FlipSource {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            FlipSource::Seeded(r) => {
                0u8.hash(state);
                hash_rng(r, state);
            }
            FlipSource::Script { bits, pos, fallback } => {
                1u8.hash(state);
                bits.hash(state);
                pos.hash(state);
                hash_rng(fallback, state);
            }
        }
    }
}

impl PartialEq for FlipSource {
    fn eq(&self, other: &Self) -> bool {
        let key = |r: &ChaCha8Rng| (r.get_seed(), r.get_stream(), r.get_word_pos());
        match (self, other) {
            (FlipSource::Seeded(a), FlipSource::Seeded(b)) => key(a) == key(b),
            (
                FlipSource::Script { bits: a, pos: i, fallback: fa },
                FlipSource::Script { bits: b, pos: j, fallback: fb },
            ) => a == b && i == j && key(fa) == key(fb),
            _ => false,
        }
    }
}

impl Eq for FlipSource {}
