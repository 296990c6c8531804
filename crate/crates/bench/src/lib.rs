//! Shared inputs for the benchmarks.

use ncl_core::graph::{build_knn_graph, Metric};
use ncl_core::sdp::{init, step, SdpParams};
use ncl_core::WeightedDigraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Motion graph of an SDP state after `frames` steps.
pub fn sdp_graph(n: usize, k: usize, eta: f64, frames: usize, seed: u64) -> WeightedDigraph {
    let params = SdpParams {
        n_particles: n,
        k_neighbors: k,
        eta,
        ..SdpParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = init(&params, &mut rng);
    for _ in 0..frames {
        state = step(&state, &params, &mut rng);
    }
    build_knn_graph(
        &state.positions,
        &state.velocities(params.speed),
        k,
        Metric::Torus { side: params.box_side },
    )
    .expect("valid SDP graph")
}
