//! Seeded random streams. One 64-bit root seed fans out into named,
//! independent ChaCha streams so each component can be reproduced on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRoot(pub u64);

impl SeedRoot {
    pub fn stream(self, name: &str) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }

    /// Stream for one trial of a repeated experiment.
    pub fn trial(self, name: &str, trial: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0 ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
