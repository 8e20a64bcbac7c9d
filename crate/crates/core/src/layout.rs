//! Incremental force-directed layout (Fruchterman–Reingold force laws).
//!
//! With `n` nodes in an `L × L` frame the ideal edge length is
//! `k = C·sqrt(L²/n)`. Every pair repels with `k²/d`, every edge attracts
//! with `d²/k`, and per sweep each node moves along its net force by at most
//! the current temperature, which then decays geometrically. Nodes are swept
//! in ascending id order so a fixed seed gives bit-identical traces.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fixed::Point3;
use crate::graph::GraphSnapshot;

/// Distances are clamped to this before evaluating forces.
pub const MIN_DISTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("invalid layout parameters: {0}")]
    InvalidParams(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    /// Side of the square layout frame, in layout units.
    pub side: f64,
    /// Scale applied to the ideal edge length.
    pub spring_scale: f64,
    pub initial_temperature: f64,
    /// Temperature multiplier applied after every sweep.
    pub cooling: f64,
    /// A run is stable once the largest displacement drops below this.
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self::with_side(1000.0, 0)
    }
}

impl LayoutParams {
    /// Defaults derived from the frame size: `t0 = L/10`, `eps = L/1000`.
    pub fn with_side(side: f64, seed: u64) -> Self {
        Self {
            side,
            spring_scale: 1.0,
            initial_temperature: side / 10.0,
            cooling: 0.95,
            epsilon: 0.001 * side,
            max_iters: 2000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |what: &str| Err(LayoutError::InvalidParams(what.to_string()));
        if !(self.side > 0.0 && self.side.is_finite()) {
            return bad("side must be positive");
        }
        if !(self.spring_scale > 0.0 && self.spring_scale.is_finite()) {
            return bad("spring scale must be positive");
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling must lie in (0, 1)");
        }
        // Infinite epsilon is allowed: it means "one sweep is enough".
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if !(self.initial_temperature >= 0.0 && self.initial_temperature.is_finite()) {
            return bad("initial temperature must be finite and non-negative");
        }
        Ok(())
    }

    /// Ideal edge length for `n` nodes.
    pub fn ideal_length(&self, n: usize) -> f64 {
        self.spring_scale * (self.side * self.side / n.max(1) as f64).sqrt()
    }
}

/// Positions, temperature and generator state of one layout.
#[derive(Debug, Clone)]
pub struct LayoutState {
    positions: BTreeMap<String, (f64, f64)>,
    temperature: f64,
    rng: ChaCha8Rng,
    params: LayoutParams,
}

impl LayoutState {
    pub fn new(params: &LayoutParams) -> Result<Self, LayoutError> {
        params.validate()?;
        Ok(Self {
            positions: BTreeMap::new(),
            temperature: params.initial_temperature,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params: params.clone(),
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn position(&self, id: &str) -> Option<(f64, f64)> {
        self.positions.get(id).copied()
    }

    pub fn positions(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.positions
    }

    pub fn is_placed(&self, id: &str) -> bool {
        self.positions.contains_key(id)
    }

    /// Positions rounded to the published three-decimal precision.
    pub fn published_positions(&self) -> BTreeMap<String, Point3> {
        self.positions
            .iter()
            .map(|(id, &(x, y))| (id.clone(), Point3::quantized(x, y)))
            .collect()
    }

    /// Places a node at an explicit position.
    pub fn place_at(&mut self, id: &str, x: f64, y: f64) -> Result<(), LayoutError> {
        if self.positions.contains_key(id) {
            return Err(LayoutError::Contract(format!("node `{id}` is already placed")));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(LayoutError::Contract(format!("non-finite position for `{id}`")));
        }
        self.positions.insert(id.to_string(), (x, y));
        Ok(())
    }

    /// Places a new node next to `neighbor` (uniformly within `k/4` of it) or,
    /// without a neighbor, uniformly in the frame.
    pub fn place_new_node(&mut self, id: &str, neighbor: Option<&str>) -> Result<(f64, f64), LayoutError> {
        if self.positions.contains_key(id) {
            return Err(LayoutError::Contract(format!("node `{id}` is already placed")));
        }
        let position = match neighbor {
            Some(other) => {
                let (cx, cy) = self
                    .position(other)
                    .ok_or_else(|| LayoutError::Contract(format!("neighbor `{other}` of `{id}` is not placed")))?;
                let radius = self.params.ideal_length(self.positions.len() + 1) / 4.0;
                let r = radius * self.rng.random::<f64>().sqrt();
                let angle = std::f64::consts::TAU * self.rng.random::<f64>();
                (cx + r * angle.cos(), cy + r * angle.sin())
            }
            None => {
                let side = self.params.side;
                (self.rng.random::<f64>() * side, self.rng.random::<f64>() * side)
            }
        };
        self.positions.insert(id.to_string(), position);
        Ok(position)
    }

    /// Drops positions of nodes no longer in the graph.
    pub fn retain_nodes(&mut self, snapshot: &GraphSnapshot) {
        self.positions.retain(|id, _| snapshot.nodes.contains_key(id));
    }

    /// One force sweep over `snapshot`; returns the largest node displacement.
    pub fn step(&mut self, snapshot: &GraphSnapshot, params: &LayoutParams) -> Result<f64, LayoutError> {
        self.retain_nodes(snapshot);
        let ids: Vec<&str> = snapshot.nodes.keys().map(String::as_str).collect();
        let mut pos = Vec::with_capacity(ids.len());
        for id in &ids {
            let p = self
                .position(id)
                .ok_or_else(|| LayoutError::Contract(format!("node `{id}` has no position")))?;
            pos.push(p);
        }
        let n = ids.len();
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

        let k = params.ideal_length(n);
        let k_sq = k * k;
        let mut disp = vec![(0.0f64, 0.0f64); n];

        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let dist = dx.hypot(dy);
                // Coincident nodes are split along x, lower id to the right.
                let (ux, uy) = if dist > 0.0 { (dx / dist, dy / dist) } else { (1.0, 0.0) };
                let force = k_sq / dist.max(MIN_DISTANCE);
                disp[i].0 += ux * force;
                disp[i].1 += uy * force;
                disp[j].0 -= ux * force;
                disp[j].1 -= uy * force;
            }
        }

        for edge in snapshot.edges.values() {
            let (Some(&a), Some(&b)) = (index.get(edge.from.as_str()), index.get(edge.to.as_str())) else {
                continue;
            };
            let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            let dist = dx.hypot(dy);
            if dist == 0.0 {
                continue;
            }
            let d = dist.max(MIN_DISTANCE);
            let force = d * d / k;
            let (ux, uy) = (dx / dist, dy / dist);
            disp[a].0 -= ux * force;
            disp[a].1 -= uy * force;
            disp[b].0 += ux * force;
            disp[b].1 += uy * force;
        }

        let mut max_step = 0.0f64;
        for (i, id) in ids.iter().enumerate() {
            let (fx, fy) = disp[i];
            let magnitude = fx.hypot(fy);
            if magnitude == 0.0 || !magnitude.is_finite() {
                continue;
            }
            let moved = magnitude.min(self.temperature);
            let (x, y) = pos[i];
            let next = (x + fx / magnitude * moved, y + fy / magnitude * moved);
            if !(next.0.is_finite() && next.1.is_finite()) {
                return Err(LayoutError::Contract(format!("non-finite position for `{id}`")));
            }
            self.positions.insert((*id).to_string(), next);
            max_step = max_step.max(moved);
        }
        self.temperature *= params.cooling;
        Ok(max_step)
    }

    /// Sweeps until the largest displacement drops below `epsilon` or
    /// `max_iters` sweeps have run. Returns the number of sweeps.
    pub fn run_until_stable(&mut self, snapshot: &GraphSnapshot, params: &LayoutParams) -> Result<usize, LayoutError> {
        let mut iterations = 0;
        while iterations < params.max_iters {
            let moved = self.step(snapshot, params)?;
            iterations += 1;
            if moved < params.epsilon {
                break;
            }
        }
        Ok(iterations)
    }
}
