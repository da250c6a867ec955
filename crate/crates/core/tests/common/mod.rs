//! Test support: synthetic benchmark files shaped like the published
//! Solomon and Cordeau sets, and a prune-free exhaustive enumerator.
#![allow(dead_code)]

use std::fmt::Write as _;

use coptw::instance::{augment, truncate};
use coptw::{check_solution, objective, Instance, Model, RawInstance, Solution, Vertex};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Benchmark families. Type 1 sets have short horizons, type 2 long ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    C1,
    R1,
    Rc1,
    C2,
    R2,
    Rc2,
    Pr,
}

impl Class {
    pub const SOLOMON: [Class; 6] = [
        Class::C1,
        Class::R1,
        Class::Rc1,
        Class::C2,
        Class::R2,
        Class::Rc2,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Class::C1 => "c1",
            Class::R1 => "r1",
            Class::Rc1 => "rc1",
            Class::C2 => "c2",
            Class::R2 => "r2",
            Class::Rc2 => "rc2",
            Class::Pr => "pr",
        }
    }

    fn horizon(self) -> f64 {
        match self {
            Class::C1 => 1236.0,
            Class::R1 => 230.0,
            Class::Rc1 => 240.0,
            Class::C2 => 3390.0,
            Class::R2 => 1000.0,
            Class::Rc2 => 960.0,
            Class::Pr => 1000.0,
        }
    }

    /// Range of window half-widths.
    fn half_width(self) -> (f64, f64) {
        match self {
            Class::C1 => (25.0, 60.0),
            Class::R1 | Class::Rc1 => (5.0, 30.0),
            Class::C2 => (80.0, 320.0),
            Class::R2 | Class::Rc2 => (50.0, 250.0),
            Class::Pr => (30.0, 120.0),
        }
    }
}

/// A synthetic benchmark instance with `customers` customers.
pub fn synthetic(class: Class, customers: usize, seed: u64) -> RawInstance {
    let mut rng = StdRng::seed_from_u64(seed);
    let horizon = class.horizon();
    let depot = match class {
        Class::Pr => (0.0, 0.0),
        Class::C1 | Class::C2 => (40.0, 50.0),
        _ => (35.0, 35.0),
    };
    let centres: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.random_range(10.0..90.0), rng.random_range(10.0..90.0)))
        .collect();
    let mut vertices = vec![Vertex {
        id: 0,
        x: depot.0,
        y: depot.1,
        service: 0.0,
        reward: 0.0,
        open: 0.0,
        close: horizon,
    }];
    for id in 1..=customers {
        let clustered = match class {
            Class::C1 | Class::C2 => true,
            Class::Rc1 | Class::Rc2 => id % 2 == 0,
            _ => false,
        };
        let (x, y): (f64, f64) = if class == Class::Pr {
            (
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
            )
        } else if clustered {
            let c = centres[rng.random_range(0..centres.len())];
            (
                (c.0 + rng.random_range(-8.0..8.0)).round(),
                (c.1 + rng.random_range(-8.0..8.0)).round(),
            )
        } else {
            (
                rng.random_range(0.0..100.0f64).round(),
                rng.random_range(0.0..100.0f64).round(),
            )
        };
        let (x, y) = if class == Class::Pr {
            ((x * 1000.0).round() / 1000.0, (y * 1000.0).round() / 1000.0)
        } else {
            (x, y)
        };
        let service = match class {
            Class::C1 | Class::C2 => 90.0,
            Class::Pr => rng.random_range(1..=25) as f64,
            _ => 10.0,
        };
        let reward = match class {
            Class::C1 | Class::C2 => 10.0 * rng.random_range(1..=5) as f64,
            _ => rng.random_range(1..=50) as f64,
        };
        let t0 = ((x - depot.0).powi(2) + (y - depot.1).powi(2)).sqrt();
        let latest = (horizon - service - t0).max(t0);
        let centre = rng.random_range(t0..=latest);
        let (lo, hi) = class.half_width();
        let half = rng.random_range(lo..hi);
        let open = (centre - half).max(0.0).floor();
        let close = (centre + half).min(horizon).ceil().max(open);
        vertices.push(Vertex {
            id,
            x,
            y,
            service,
            reward,
            open,
            close,
        });
    }
    RawInstance { vertices, horizon }
}

/// Numeric TOPTW layout (Solomon-derived files).
pub fn solomon_text(raw: &RawInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "1 4 {} 1", raw.customers());
    let _ = writeln!(s, "0 0");
    for v in &raw.vertices {
        let _ = writeln!(
            s,
            "{} {} {} {} {} 0 1 1 {} {}",
            v.id, v.x, v.y, v.service, v.reward, v.open, v.close
        );
    }
    s
}

/// Cordeau layout.
pub fn cordeau_text(raw: &RawInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "2 4 {} 1", raw.customers());
    let _ = writeln!(s, "0 200");
    for v in &raw.vertices {
        let _ = writeln!(
            s,
            "{} {} {} {} {} 0 1 1 {} {}",
            v.id, v.x, v.y, v.service, v.reward, v.open, v.close
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct DeskInstance {
    pub name: String,
    pub instance: Instance,
}

/// Base files per family: name, class, customers in the file.
pub fn desk_files() -> Vec<(String, Class, usize)> {
    let mut files = Vec::new();
    for class in Class::SOLOMON {
        let size = if matches!(class, Class::C1 | Class::R1 | Class::Rc1) {
            12
        } else {
            26
        };
        for k in 1..=4 {
            files.push((format!("{}{:02}", class.prefix(), k), class, size));
        }
    }
    for k in 1..=4 {
        files.push((format!("pr{:02}", k), Class::Pr, 12));
    }
    for k in 11..=14 {
        files.push((format!("pr{:02}", k), Class::Pr, 21));
    }
    files
}

fn file_seed(name: &str) -> u64 {
    name.bytes().fold(1469598103934665603u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(1099511628211)
    })
}

/// The synthetic desk suite: every base file truncated to its three
/// largest sizes and augmented with requirements in {1,2,3}, for teams of
/// 3 and 4 members.
pub fn desk_suite(seed: u64) -> Vec<DeskInstance> {
    let mut out = Vec::new();
    for (name, class, size) in desk_files() {
        let raw = synthetic(class, size, file_seed(&name));
        for n in size - 2..=size {
            let small = truncate(&raw, n).unwrap();
            for p in [3, 4] {
                let instance = augment(&small, seed ^ file_seed(&name), 3)
                    .unwrap()
                    .with_team_size(p)
                    .unwrap();
                out.push(DeskInstance {
                    name: format!("{name}-n{n}-p{p}"),
                    instance,
                });
            }
        }
    }
    out
}

/// A small random cooperative instance with tight enough windows that the
/// timing constraints matter.
pub fn micro_instance(seed: u64, customers: usize, team: usize) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let horizon = 100.0;
    let mut vertices = vec![Vertex {
        id: 0,
        x: 0.0,
        y: 0.0,
        service: 0.0,
        reward: 0.0,
        open: 0.0,
        close: horizon,
    }];
    for id in 1..=customers {
        let x = rng.random_range(-20.0..20.0f64).round();
        let y = rng.random_range(-20.0..20.0f64).round();
        let open = rng.random_range(0.0..60.0f64).round();
        let close = (open + rng.random_range(5.0..40.0f64)).round().min(horizon);
        vertices.push(Vertex {
            id,
            x,
            y,
            service: rng.random_range(1..=10) as f64,
            reward: rng.random_range(1..=20) as f64,
            open,
            close,
        });
    }
    let raw = RawInstance { vertices, horizon };
    augment(&raw, seed, team)
        .unwrap()
        .with_team_size(team)
        .unwrap()
}

/// Best score over every routing reachable by appending, one customer at a
/// time, a visit by exactly the required number of members, in every order
/// and with every member subset. Each candidate is judged by the checker
/// alone; nothing is pruned.
pub fn enumerate_best(model: &Model) -> (f64, Solution) {
    let p = model.team_size();
    let mut routes = vec![Vec::new(); p];
    let mut used = vec![false; model.len()];
    let mut best = (0.0, Solution::empty(p));
    enumerate(model, &mut routes, &mut used, &mut best);
    best
}

fn enumerate(
    model: &Model,
    routes: &mut Vec<Vec<usize>>,
    used: &mut [bool],
    best: &mut (f64, Solution),
) {
    let candidate = Solution::from_routes(routes.clone());
    if check_solution(model, &candidate).feasible() {
        let score = objective(&model.instance, &candidate);
        if score > best.0 {
            *best = (score, candidate);
        }
    }
    let p = routes.len();
    for v in 1..model.len() {
        let r = model.requirement(v);
        if used[v] || r > p {
            continue;
        }
        used[v] = true;
        for mask in 0u32..(1 << p) {
            if mask.count_ones() as usize != r {
                continue;
            }
            for (k, route) in routes.iter_mut().enumerate() {
                if mask & (1 << k) != 0 {
                    route.push(v);
                }
            }
            enumerate(model, routes, used, best);
            for (k, route) in routes.iter_mut().enumerate() {
                if mask & (1 << k) != 0 {
                    route.pop();
                }
            }
        }
        used[v] = false;
    }
}
