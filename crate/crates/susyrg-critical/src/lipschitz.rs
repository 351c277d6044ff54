use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use susyrg_rgflow::{Flow, FlowState};

use crate::sequence::{apply_f, sequence_distance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub ratios: Vec<f64>,
    pub max: f64,
}

/// ‖F(s) − F(s')‖ / ‖s − s'‖ for random pairs in the box-norm ball of the
/// given radius, with g̃_{n0} shared by both members of a pair.
pub fn lipschitz_samples(
    flow: &Flow,
    g_tilde_n0: f64,
    n0: u32,
    horizon: usize,
    pairs: usize,
    radius: f64,
    seed: u64,
) -> LipschitzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gw = radius * flow.params.nu * flow.g_bar;
    let mw = radius * flow.g_bar.powf(2.0 - flow.params.delta_exp);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<FlowState> {
        (0..=horizon)
            .map(|i| {
                let g = if i == 0 {
                    g_tilde_n0
                } else {
                    rng.gen_range(-gw..gw)
                };
                FlowState::new(n0 + i as u32, g, rng.gen_range(-mw..mw))
            })
            .collect()
    };
    let ratios: Vec<f64> = (0..pairs)
        .map(|_| {
            let (s, t) = (sample(&mut rng), sample(&mut rng));
            let num = sequence_distance(
                flow,
                &apply_f(flow, g_tilde_n0, &s),
                &apply_f(flow, g_tilde_n0, &t),
            );
            num / sequence_distance(flow, &s, &t)
        })
        .collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    LipschitzReport { ratios, max }
}
