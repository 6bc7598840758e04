//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mavkit_core::catalog::{Catalog, GlobalPosition, MavMessage};
use mavkit_core::Endpoint;

/// `n` random bytes from a fixed seed.
pub fn random_bytes(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

/// A telemetry-like stream of `n` GLOBAL_POSITION frames, signed when
/// `endpoint` carries a signer.
pub fn position_stream(endpoint: &mut Endpoint, n: usize) -> Vec<u8> {
    let mut out = Vec::new();
    for i in 0..n {
        let msg: MavMessage = GlobalPosition {
            hdg: (i % 36000) as u16,
            lat: 246_877_300 + i as i32,
            lon: 467_218_500,
            alt: 622_000,
            relative_alt: 10_000,
            ..Default::default()
        }
        .into();
        out.extend(endpoint.encode(&msg));
    }
    out
}

pub fn catalog() -> &'static Catalog {
    Catalog::standard()
}
