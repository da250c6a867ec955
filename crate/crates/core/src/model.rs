//! Geometry and arc feasibility shared by every solver component.

use crate::instance::{Instance, DEPOT};

/// How Euclidean distances are rounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DistanceConvention {
    /// Full double precision.
    #[default]
    Exact,
    /// Truncated to one decimal, as in several Solomon-based studies. This
    /// breaks the triangle inequality, which the exact search relies on.
    TruncateOneDecimal,
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[(f64, f64)], convention: DistanceConvention) -> Self {
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                let mut d = (dx * dx + dy * dy).sqrt();
                if convention == DistanceConvention::TruncateOneDecimal {
                    d = (d * 10.0).floor() / 10.0;
                }
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Largest entry of the matrix.
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

pub fn build_distance_matrix(instance: &Instance) -> DistanceMatrix {
    build_distance_matrix_with(instance, DistanceConvention::Exact)
}

pub fn build_distance_matrix_with(
    instance: &Instance,
    convention: DistanceConvention,
) -> DistanceMatrix {
    let points: Vec<_> = instance.vertices.iter().map(|v| v.position()).collect();
    DistanceMatrix::from_points(&points, convention)
}

/// Ordered arcs a member may traverse.
///
/// `(i, j)` is feasible when a member leaving `i` right after the earliest
/// possible service reaches `j` before it closes, and `j` itself can be
/// served and left early enough to reach the depot by the horizon:
/// `o_i + a_i + d_ij / V <= c_j` and `o_j + a_j + d_j0 / V <= T_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    n: usize,
    feasible: Vec<bool>,
    out_neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
}

impl ArcSet {
    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.feasible[i * self.n + j]
    }

    /// Vertices reachable from `i` by a feasible arc.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_neighbors[i]
    }

    /// Vertices with a feasible arc into `j`.
    pub fn in_neighbors(&self, j: usize) -> &[usize] {
        &self.in_neighbors[j]
    }

    pub fn len(&self) -> usize {
        self.feasible.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The arc predicate, exact floating comparison.
#[inline]
pub fn arc_is_feasible(instance: &Instance, d: &DistanceMatrix, i: usize, j: usize) -> bool {
    if i == j {
        return false;
    }
    let v = instance.velocity;
    let (vi, vj) = (&instance.vertices[i], &instance.vertices[j]);
    vj.open + vj.service + d.get(j, DEPOT) / v <= instance.horizon
        && vi.open + vi.service + d.get(i, j) / v <= vj.close
}

pub fn build_arc_set(instance: &Instance, d: &DistanceMatrix) -> ArcSet {
    let n = instance.vertices.len();
    let mut feasible = vec![false; n * n];
    let mut out_neighbors = vec![Vec::new(); n];
    let mut in_neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if arc_is_feasible(instance, d, i, j) {
                feasible[i * n + j] = true;
                out_neighbors[i].push(j);
                in_neighbors[j].push(i);
            }
        }
    }
    ArcSet {
        n,
        feasible,
        out_neighbors,
        in_neighbors,
    }
}

/// Cosine of the angle at `depot` between the rays towards `i` and `j`.
///
/// A point coincident with the depot has no direction; the cosine is then
/// defined as 1.
pub fn cos_polar_angle(i: (f64, f64), j: (f64, f64), depot: (f64, f64)) -> f64 {
    let (ax, ay) = (i.0 - depot.0, i.1 - depot.1);
    let (bx, by) = (j.0 - depot.0, j.1 - depot.1);
    let na = (ax * ax + ay * ay).sqrt();
    let nb = (bx * bx + by * by).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    ((ax * bx + ay * by) / (na * nb)).clamp(-1.0, 1.0)
}

/// An instance bundled with its distance matrix, travel times and arc set.
#[derive(Debug, Clone)]
pub struct Model {
    pub instance: Instance,
    pub distances: DistanceMatrix,
    pub arcs: ArcSet,
    travel: Vec<f64>,
    n: usize,
}

impl Model {
    pub fn new(instance: Instance) -> Self {
        Self::with_convention(instance, DistanceConvention::Exact)
    }

    pub fn with_convention(instance: Instance, convention: DistanceConvention) -> Self {
        let distances = build_distance_matrix_with(&instance, convention);
        let arcs = build_arc_set(&instance, &distances);
        let n = instance.vertices.len();
        let mut travel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                travel[i * n + j] = distances.get(i, j) / instance.velocity;
            }
        }
        Model {
            instance,
            distances,
            arcs,
            travel,
            n,
        }
    }

    /// Travel time `d_ij / V`.
    #[inline]
    pub fn travel(&self, i: usize, j: usize) -> f64 {
        self.travel[i * self.n + j]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn open(&self, v: usize) -> f64 {
        self.instance.vertices[v].open
    }

    #[inline]
    pub fn close(&self, v: usize) -> f64 {
        self.instance.vertices[v].close
    }

    #[inline]
    pub fn service(&self, v: usize) -> f64 {
        self.instance.vertices[v].service
    }

    #[inline]
    pub fn reward(&self, v: usize) -> f64 {
        self.instance.vertices[v].reward
    }

    #[inline]
    pub fn requirement(&self, v: usize) -> usize {
        self.instance.requirements[v]
    }

    pub fn team_size(&self) -> usize {
        self.instance.team_size
    }

    pub fn horizon(&self) -> f64 {
        self.instance.horizon
    }
}
