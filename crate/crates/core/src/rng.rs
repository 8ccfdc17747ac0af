//! Counter-based seed splitting.
//!
//! Every random consumer in the crate gets its own `ChaCha8Rng`, seeded from
//! a master seed and a path of integer labels. Seeds never depend on
//! execution order, so trials may run in any order or concurrently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A position in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedPath(u64);

impl SeedPath {
    pub fn root(master: u64) -> Self {
        SeedPath(splitmix(master ^ 0x5EED_0000_0000_0001))
    }

    pub fn child(self, label: u64) -> Self {
        SeedPath(splitmix(self.0 ^ splitmix(label.wrapping_add(0xA5A5_A5A5))))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Convenience: the rng for `label` under `master`.
pub fn derive_rng(master: u64, label: u64) -> Rng {
    SeedPath::root(master).child(label).rng()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn same_path_same_stream() {
        let a: u64 = SeedPath::root(7).child(3).rng().random();
        let b: u64 = SeedPath::root(7).child(3).rng().random();
        assert_eq!(a, b);
    }

    #[test]
    fn sibling_paths_differ() {
        let a: u64 = SeedPath::root(7).child(3).rng().random();
        let b: u64 = SeedPath::root(7).child(4).rng().random();
        assert_ne!(a, b);
    }
}
