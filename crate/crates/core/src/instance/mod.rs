//! Problem instances: benchmark parsing, truncation, requirement augmentation
//! and the normalized COPTW text format.
//!
//! Vertices are indexed by their position; index 0 is always the depot.

mod benchmark;
mod format;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{InstanceError, ParseError};

pub use benchmark::{parse_benchmark, parse_cordeau, parse_solomon, Layout};
pub use format::{read_coptw, write_coptw};

/// Index of the depot in every instance.
pub const DEPOT: usize = 0;

/// One location of a benchmark file.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    /// Label found in the source file.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub service: f64,
    pub reward: f64,
    pub open: f64,
    pub close: f64,
}

impl Vertex {
    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// A benchmark instance before cooperative requirements are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub vertices: Vec<Vertex>,
    pub horizon: f64,
}

impl RawInstance {
    pub fn customers(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn depot(&self) -> &Vertex {
        &self.vertices[DEPOT]
    }

    /// Checks the structural invariants shared by every parser.
    pub fn validate(&self) -> Result<(), ParseError> {
        validate_vertices(&self.vertices, self.horizon)
    }
}

pub(crate) fn validate_vertices(vertices: &[Vertex], horizon: f64) -> Result<(), ParseError> {
    let depot = vertices
        .first()
        .ok_or_else(|| ParseError::Invalid("no depot row".into()))?;
    for v in vertices {
        let fields = [v.x, v.y, v.service, v.reward, v.open, v.close];
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(ParseError::Invalid(format!(
                "vertex {} has a non-finite field",
                v.id
            )));
        }
        if v.service < 0.0 || v.open < 0.0 || v.close < 0.0 || v.reward < 0.0 {
            return Err(ParseError::Invalid(format!(
                "vertex {} has a negative time or reward",
                v.id
            )));
        }
        if v.open > v.close {
            return Err(ParseError::Invalid(format!(
                "vertex {} has an inverted time window [{}, {}]",
                v.id, v.open, v.close
            )));
        }
    }
    if depot.reward != 0.0 || depot.service != 0.0 {
        return Err(ParseError::Invalid(
            "depot must have zero reward and zero service duration".into(),
        ));
    }
    if horizon != depot.close {
        return Err(ParseError::Invalid(format!(
            "horizon {} differs from depot closing time {}",
            horizon, depot.close
        )));
    }
    Ok(())
}

/// A cooperative instance: a benchmark layout plus per-vertex member
/// requirements, the team size and the travel velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub vertices: Vec<Vertex>,
    /// Members required at each vertex; the depot entry is 0.
    pub requirements: Vec<usize>,
    pub team_size: usize,
    pub velocity: f64,
    pub horizon: f64,
}

impl Instance {
    pub fn new(
        raw: RawInstance,
        requirements: Vec<usize>,
        team_size: usize,
        velocity: f64,
    ) -> Result<Self, InstanceError> {
        if requirements.len() != raw.vertices.len() {
            return Err(InstanceError::RequirementLength {
                expected: raw.vertices.len(),
                found: requirements.len(),
            });
        }
        if requirements[DEPOT] != 0 {
            return Err(InstanceError::DepotRequirement);
        }
        if team_size == 0 {
            return Err(InstanceError::ZeroTeam);
        }
        if !(velocity.is_finite() && velocity > 0.0) {
            return Err(InstanceError::Velocity(velocity));
        }
        Ok(Instance {
            vertices: raw.vertices,
            requirements,
            team_size,
            velocity,
            horizon: raw.horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn customers(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Customer indices, `1..n`.
    pub fn customer_ids(&self) -> std::ops::Range<usize> {
        1..self.vertices.len()
    }

    pub fn with_team_size(mut self, team_size: usize) -> Result<Self, InstanceError> {
        if team_size == 0 {
            return Err(InstanceError::ZeroTeam);
        }
        self.team_size = team_size;
        Ok(self)
    }

    pub fn with_velocity(mut self, velocity: f64) -> Result<Self, InstanceError> {
        if !(velocity.is_finite() && velocity > 0.0) {
            return Err(InstanceError::Velocity(velocity));
        }
        self.velocity = velocity;
        Ok(self)
    }

    /// Replaces every customer requirement by 1, turning the instance into a
    /// plain team orienteering instance.
    pub fn with_unit_requirements(mut self) -> Self {
        for r in self.requirements.iter_mut().skip(1) {
            *r = 1;
        }
        self
    }

    /// The benchmark part of the instance.
    pub fn raw(&self) -> RawInstance {
        RawInstance {
            vertices: self.vertices.clone(),
            horizon: self.horizon,
        }
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        validate_vertices(&self.vertices, self.horizon)?;
        if self.requirements.len() != self.vertices.len() {
            return Err(ParseError::Invalid("requirement count mismatch".into()));
        }
        if self.requirements[DEPOT] != 0 {
            return Err(ParseError::Invalid("depot must have requirement 0".into()));
        }
        if self.team_size == 0 {
            return Err(ParseError::Invalid("team size must be at least 1".into()));
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return Err(ParseError::Invalid(format!(
                "velocity must be positive, got {}",
                self.velocity
            )));
        }
        Ok(())
    }
}

/// Keeps the depot and the first `n` customers in file order.
pub fn truncate(raw: &RawInstance, n: usize) -> Result<RawInstance, InstanceError> {
    let available = raw.customers();
    if n == 0 || n > available {
        return Err(InstanceError::TruncateRange {
            requested: n,
            available,
        });
    }
    Ok(RawInstance {
        vertices: raw.vertices[..=n].to_vec(),
        horizon: raw.horizon,
    })
}

/// Draws a requirement for every customer uniformly from `1..=r_max`.
///
/// The generator is ChaCha with 8 rounds, seeded through
/// `SeedableRng::seed_from_u64`, which has a value-stable stream on every
/// platform. Customers are drawn in index order, so truncating before or
/// after augmentation yields the same requirements for the kept prefix.
///
/// The returned instance has `team_size = r_max` and `velocity = 1`; callers
/// adjust both with [`Instance::with_team_size`] and
/// [`Instance::with_velocity`].
pub fn augment(raw: &RawInstance, seed: u64, r_max: usize) -> Result<Instance, InstanceError> {
    if r_max == 0 {
        return Err(InstanceError::ZeroRequirement);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut requirements = Vec::with_capacity(raw.vertices.len());
    requirements.push(0);
    for _ in 1..raw.vertices.len() {
        requirements.push(1 + uniform_below(&mut rng, r_max as u64) as usize);
    }
    Instance::new(raw.clone(), requirements, r_max, 1.0)
}

/// Unbiased draw from `0..n` by rejection on the low end of the 64-bit range.
fn uniform_below(rng: &mut impl RngCore, n: u64) -> u64 {
    debug_assert!(n > 0);
    let threshold = n.wrapping_neg() % n;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % n;
        }
    }
}
