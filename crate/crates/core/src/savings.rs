//! Saving values and the saving pair list.
//!
//! The saving of an ordered customer pair combines three terms:
//!
//! ```text
//! S(i,j) = (d_i0 + d_0j - λ d_ij) / d_max
//!        + μ cos θ_ij |d_max - (d_i0 - d_0j) / 2| / d_max
//!        + ϑ (Γ_i + Γ_j) / Γ_mean
//! ```
//!
//! where θ_ij is the angle at the depot between the rays to `i` and `j`,
//! `d_max` is the largest pairwise distance (depot included) and `Γ_mean`
//! the mean customer reward. The first term is the classical distance
//! saving with a route-shape factor, the second favours pairs lying in a
//! similar direction from the depot, and the third lifts high-reward pairs.

use std::cmp::Ordering;

use crate::instance::{Instance, DEPOT};
use crate::model::{cos_polar_angle, DistanceMatrix, Model};

/// Weights of the three saving terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingParams {
    pub lambda: f64,
    pub mu: f64,
    pub vartheta: f64,
}

impl SavingParams {
    pub const fn new(lambda: f64, mu: f64, vartheta: f64) -> Self {
        SavingParams {
            lambda,
            mu,
            vartheta,
        }
    }
}

/// An ordered pair of customers with its saving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingPair {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

const SHAPE_WEIGHTS: [f64; 3] = [0.0, 0.7, 1.4];
const REWARD_WEIGHTS: [f64; 6] = [0.0, 0.7, 1.4, 2.1, 2.8, 3.5];

/// The 54 weight triplets, `λ` outermost, then `μ`, then `ϑ`.
pub fn parameter_grid() -> Vec<SavingParams> {
    let mut grid = Vec::with_capacity(SHAPE_WEIGHTS.len().pow(2) * REWARD_WEIGHTS.len());
    for &lambda in &SHAPE_WEIGHTS {
        for &mu in &SHAPE_WEIGHTS {
            for &vartheta in &REWARD_WEIGHTS {
                grid.push(SavingParams::new(lambda, mu, vartheta));
            }
        }
    }
    grid
}

/// Largest pairwise distance, depot included.
pub fn max_distance(d: &DistanceMatrix) -> f64 {
    d.max()
}

/// Mean reward over customers; 0 without customers.
pub fn mean_reward(instance: &Instance) -> f64 {
    let n = instance.customers();
    if n == 0 {
        return 0.0;
    }
    instance.vertices[1..].iter().map(|v| v.reward).sum::<f64>() / n as f64
}

/// Saving of the ordered pair `(i, j)`.
///
/// Degenerate normalizers are tolerated: with `d_max = 0` the two distance
/// terms vanish, with `gamma_bar = 0` the reward term vanishes.
pub fn saving_value(
    i: usize,
    j: usize,
    instance: &Instance,
    d: &DistanceMatrix,
    params: SavingParams,
    d_max: f64,
    gamma_bar: f64,
) -> f64 {
    let (di0, d0j, dij) = (d.get(i, DEPOT), d.get(DEPOT, j), d.get(i, j));
    let mut s = 0.0;
    if d_max > 0.0 {
        let depot = instance.vertices[DEPOT].position();
        let cos = cos_polar_angle(
            instance.vertices[i].position(),
            instance.vertices[j].position(),
            depot,
        );
        s += (di0 + d0j - params.lambda * dij) / d_max;
        s += params.mu * (cos * (d_max - (di0 - d0j) / 2.0).abs()) / d_max;
    }
    if gamma_bar > 0.0 {
        let (gi, gj) = (instance.vertices[i].reward, instance.vertices[j].reward);
        s += params.vartheta * ((gi + gj) / gamma_bar);
    }
    s
}

/// Descending by value; ties by smaller `i`, then smaller `j`.
pub fn compare_pairs(a: &SavingPair, b: &SavingPair) -> Ordering {
    b.value
        .total_cmp(&a.value)
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
}

/// All ordered customer pairs whose arc is feasible, sorted by saving.
pub fn calc_saving_pairs(model: &Model, params: SavingParams) -> Vec<SavingPair> {
    let instance = &model.instance;
    let d = &model.distances;
    let d_max = max_distance(d);
    let gamma_bar = mean_reward(instance);
    let mut pairs = Vec::new();
    for i in instance.customer_ids() {
        for &j in model.arcs.out_neighbors(i) {
            if j == DEPOT {
                continue;
            }
            pairs.push(SavingPair {
                i,
                j,
                value: saving_value(i, j, instance, d, params, d_max, gamma_bar),
            });
        }
    }
    pairs.sort_by(compare_pairs);
    pairs
}
