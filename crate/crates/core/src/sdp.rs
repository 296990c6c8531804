//! Self-driven particle (Vicsek) simulation on a periodic square, with an
//! optional population of noise particles that pick a fresh random heading
//! every frame.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, periodic_delta, Metric, Vec2};
use crate::ncl::{graph_collectiveness_both, measure, NclConfig, Strategy, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpParams {
    pub n_particles: usize,
    pub k_neighbors: usize,
    pub box_side: f64,
    pub speed: f64,
    pub radius: f64,
    pub eta: f64,
    pub noise_ratio: f64,
    pub max_frames: usize,
    pub gt_stop: f64,
}

impl Default for SdpParams {
    fn default() -> Self {
        Self {
            n_particles: 400,
            k_neighbors: 20,
            box_side: 7.0,
            speed: 0.03,
            radius: 1.0,
            eta: 0.0,
            noise_ratio: 0.0,
            max_frames: 100,
            gt_stop: 0.95,
        }
    }
}

impl SdpParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let fail = |m: String| Err(Error::Parameter(m));
        if p.n_particles < 2 {
            return fail(format!("N = {} must be at least 2", p.n_particles));
        }
        if p.k_neighbors == 0 || p.k_neighbors > p.n_particles - 1 {
            return fail(format!("K = {} outside 1..={}", p.k_neighbors, p.n_particles - 1));
        }
        if !(p.box_side > 0.0 && p.box_side.is_finite()) {
            return fail(format!("box side {} must be positive", p.box_side));
        }
        if !(p.speed > 0.0 && p.speed.is_finite()) {
            return fail(format!("speed {} must be positive", p.speed));
        }
        if !(p.radius > 0.0 && p.radius.is_finite()) {
            return fail(format!("radius {} must be positive", p.radius));
        }
        if !(0.0..=1.0).contains(&p.eta) {
            return fail(format!("eta {} outside [0, 1]", p.eta));
        }
        if !(0.0..=1.0).contains(&p.noise_ratio) {
            return fail(format!("noise ratio {} outside [0, 1]", p.noise_ratio));
        }
        if p.max_frames == 0 {
            return fail("max_frames must be at least 1".into());
        }
        if p.gt_stop.is_nan() {
            return fail("gt_stop is NaN".into());
        }
        Ok(())
    }

    pub fn n_noise(&self) -> usize {
        (self.noise_ratio * self.n_particles as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpState {
    pub positions: Vec<Vec2>,
    /// Radians in `[0, 2pi)`.
    pub headings: Vec<f64>,
    pub is_noise: Vec<bool>,
    pub frame: usize,
}

impl SdpState {
    pub fn velocities(&self, speed: f64) -> Vec<Vec2> {
        self.headings
            .iter()
            .map(|&t| [speed * t.cos(), speed * t.sin()])
            .collect()
    }
}

fn wrap(x: f64, side: f64) -> f64 {
    let w = x.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs.
    if w >= side {
        0.0
    } else {
        w
    }
}

fn wrap_angle(t: f64) -> f64 {
    wrap(t, TAU)
}

/// Random initial state; the first `round(noise_ratio * N)` ids are noise
/// particles.
pub fn init(params: &SdpParams, rng: &mut impl Rng) -> SdpState {
    let n = params.n_particles;
    let l = params.box_side;
    let positions = (0..n)
        .map(|_| [wrap(rng.random::<f64>() * l, l), wrap(rng.random::<f64>() * l, l)])
        .collect();
    let headings = (0..n).map(|_| wrap_angle(rng.random::<f64>() * TAU)).collect();
    let n_noise = params.n_noise();
    SdpState {
        positions,
        headings,
        is_noise: (0..n).map(|i| i < n_noise).collect(),
        frame: 1,
    }
}

/// Initial state from a seed alone.
pub fn init_seeded(params: &SdpParams, seed: u64) -> SdpState {
    init(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Advances one frame: all new headings are computed from the current
/// frame, then every particle moves.
pub fn step(state: &SdpState, params: &SdpParams, rng: &mut impl Rng) -> SdpState {
    let n = state.positions.len();
    let l = params.box_side;
    let r2 = params.radius * params.radius;
    let mut headings = Vec::with_capacity(n);
    let (sin, cos): (Vec<f64>, Vec<f64>) = state.headings.iter().map(|t| t.sin_cos()).unzip();
    for i in 0..n {
        // One draw per particle per frame keeps the stream aligned.
        let u: f64 = rng.random();
        if state.is_noise[i] {
            headings.push(wrap_angle(u * TAU));
            continue;
        }
        let pi = state.positions[i];
        let (mut sy, mut sx) = (0.0, 0.0);
        for j in 0..n {
            let pj = state.positions[j];
            let dx = periodic_delta(pi[0] - pj[0], l);
            let dy = periodic_delta(pi[1] - pj[1], l);
            if dx * dx + dy * dy <= r2 {
                sy += sin[j];
                sx += cos[j];
            }
        }
        let noise = (2.0 * u - 1.0) * params.eta * PI;
        headings.push(wrap_angle(sy.atan2(sx) + noise));
    }
    let positions = state
        .positions
        .iter()
        .zip(&headings)
        .map(|(p, &t)| {
            [
                wrap(p[0] + params.speed * t.cos(), l),
                wrap(p[1] + params.speed * t.sin(), l),
            ]
        })
        .collect();
    SdpState {
        positions,
        headings,
        is_noise: state.is_noise.clone(),
        frame: state.frame + 1,
    }
}

/// Magnitude of the mean unit heading vector of the normal particles.
pub fn ground_truth(state: &SdpState) -> Result<f64> {
    let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
    for (t, &noise) in state.headings.iter().zip(&state.is_noise) {
        if !noise {
            let (s, c) = t.sin_cos();
            sx += c;
            sy += s;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Undefined("ground truth with no normal particles"));
    }
    let m = (sx * sx + sy * sy).sqrt() / count as f64;
    Ok(m.min(1.0))
}

/// One simulated frame's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub measured_phi: f64,
    pub ground_truth: f64,
}

/// A simulated run: the state at each recorded frame with its ground truth.
#[derive(Debug, Clone)]
pub struct SdpTrace {
    pub params: SdpParams,
    pub states: Vec<SdpState>,
    pub ground_truth: Vec<f64>,
}

impl SdpTrace {
    /// Simulates until `max_frames` states are recorded or the ground truth
    /// exceeds `gt_stop`. The initial state is frame 1.
    pub fn simulate(params: &SdpParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if params.n_noise() == params.n_particles {
            return Err(Error::Undefined("ground truth with no normal particles"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = init(params, &mut rng);
        let mut states = Vec::new();
        let mut truth = Vec::new();
        loop {
            let gt = ground_truth(&state)?;
            let stop = gt > params.gt_stop || states.len() + 1 >= params.max_frames;
            let next = if stop { None } else { Some(step(&state, params, &mut rng)) };
            states.push(state);
            truth.push(gt);
            match next {
                Some(s) => state = s,
                None => break,
            }
        }
        Ok(Self {
            params: params.clone(),
            states,
            ground_truth: truth,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn frame_graph(&self, state: &SdpState, k: usize) -> Result<crate::graph::WeightedDigraph> {
        let metric = Metric::Torus {
            side: self.params.box_side,
        };
        build_knn_graph(&state.positions, &state.velocities(self.params.speed), k, metric)
    }

    /// Measured graph collectiveness of every frame under `cfg`, using a
    /// K-NN graph over all particles.
    pub fn measure(&self, k: usize, cfg: &NclConfig) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| Ok(measure(&self.frame_graph(s, k)?, cfg)?.capital_phi))
            .collect()
    }

    /// Measured series for all four variants at one threshold, indexed like
    /// [`Variant::ALL`]. Cliques are shared between the two schemes.
    pub fn measure_variants(&self, k: usize, lambda: f64) -> Result<[Vec<f64>; 4]> {
        self.measure_selected(k, lambda, &Variant::ALL)
    }

    /// Like [`measure_variants`](Self::measure_variants) but only learns
    /// cliques for the strategies that `wanted` needs; other series are empty.
    pub fn measure_selected(&self, k: usize, lambda: f64, wanted: &[Variant]) -> Result<[Vec<f64>; 4]> {
        let mut out: [Vec<f64>; 4] = Default::default();
        for strategy in [Strategy::Avg, Strategy::Min] {
            if !wanted.iter().any(|v| v.strategy() == strategy) {
                continue;
            }
            for s in &self.states {
                let [p1, p2] = graph_collectiveness_both(&self.frame_graph(s, k)?, lambda, strategy)?;
                for (idx, v) in Variant::ALL.iter().enumerate() {
                    if v.strategy() == strategy && wanted.contains(v) {
                        out[idx].push(if v.scheme() == crate::ncl::Scheme::Ncl1 { p1 } else { p2 });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn records(&self, measured: &[f64]) -> Vec<FrameRecord> {
        self.states
            .iter()
            .zip(measured)
            .zip(&self.ground_truth)
            .map(|((s, &m), &g)| FrameRecord {
                frame: s.frame,
                measured_phi: m,
                ground_truth: g,
            })
            .collect()
    }
}

/// Simulates one run and measures every frame.
pub fn run(params: &SdpParams, cfg: &NclConfig, seed: u64) -> Result<Vec<FrameRecord>> {
    cfg.validate()?;
    let trace = SdpTrace::simulate(params, seed)?;
    let measured = trace.measure(params.k_neighbors, cfg)?;
    Ok(trace.records(&measured))
}

/// Writes `run,frame,phi,ground_truth` rows for several runs.
pub fn write_frames_csv(runs: &[Vec<FrameRecord>], path: &Path) -> Result<()> {
    let mut body = String::from("run,frame,phi,ground_truth\n");
    for (run, records) in runs.iter().enumerate() {
        for r in records {
            body.push_str(&format!(
                "{run},{},{},{}\n",
                r.frame,
                crate::fmt::sig(r.measured_phi, 10),
                crate::fmt::sig(r.ground_truth, 10)
            ));
        }
    }
    crate::ncl::write_file(path, &body)
}
