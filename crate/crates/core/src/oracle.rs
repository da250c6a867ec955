//! Exact depth-first branch-and-bound for small instances.
//!
//! Every feasible routing can be listed as a sequence of service events
//! sorted by start time, each event being a customer together with the set
//! of members serving it. The search grows such sequences one event at a
//! time: it picks a customer and a subset of members of the required size,
//! starts service at the latest member arrival (or the opening time), and
//! only accepts events that start no earlier than the previous one. Every
//! node of the tree is therefore a complete feasible routing, and the start
//! order makes each customer whose window closes before the current time
//! permanently unreachable.
//!
//! Members are interchangeable, so members sitting at the same place and
//! becoming free at the same time are only ever chosen lowest index first.
//!
//! Two bounds are available. `RewardSum` adds the rewards of all customers
//! that can still start after the current event time. `ReachabilityFiltered`
//! also drops customers that too few members can still reach before they
//! close, and caps the total with a fractional knapsack over the members'
//! remaining working time. The reachability filter relies on the triangle
//! inequality and is therefore only exact for unrounded Euclidean distances.

use std::time::{Duration, Instant};

use crate::instance::DEPOT;
use crate::model::Model;
use crate::solution::{objective, Solution};

/// Slack used when a bound test depends on sums of travel times.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    RewardSum,
    ReachabilityFiltered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub node_limit: u64,
    pub time_limit: Duration,
    pub bound: BoundMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            node_limit: u64::MAX,
            time_limit: Duration::from_secs(300),
            bound: BoundMode::ReachabilityFiltered,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_score: f64,
    pub best_solution: Solution,
    pub proven_optimal: bool,
    pub explored_nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Member {
    at: usize,
    free: f64,
}

struct Search<'a> {
    model: &'a Model,
    config: OracleConfig,
    started: Instant,
    /// Smallest travel time into each vertex from any other vertex.
    min_inbound: Vec<f64>,
    members: Vec<Member>,
    routes: Vec<Vec<usize>>,
    served: Vec<bool>,
    score: f64,
    last_start: f64,
    best_score: f64,
    best_routes: Vec<Vec<usize>>,
    nodes: u64,
    aborted: bool,
}

/// A customer that can be served next, with the members able to reach it.
struct Candidate {
    vertex: usize,
    earliest: f64,
    arrivals: Vec<Option<f64>>,
}

impl<'a> Search<'a> {
    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.nodes >= self.config.node_limit
            || (self.nodes.is_multiple_of(1024) && self.started.elapsed() >= self.config.time_limit)
        {
            self.aborted = true;
        }
        self.aborted
    }

    fn dfs(&mut self) {
        self.nodes += 1;
        if self.score > self.best_score {
            self.best_score = self.score;
            self.best_routes = self.routes.clone();
        }
        if self.out_of_budget() {
            return;
        }
        let candidates = self.candidates();
        if self.score + self.bound() <= self.best_score + BOUND_SLACK * self.best_score.max(1.0) {
            return;
        }
        for c in &candidates {
            self.branch(c);
            if self.aborted {
                return;
            }
        }
    }

    fn candidates(&self) -> Vec<Candidate> {
        let m = self.model;
        let p = self.members.len();
        let mut out = Vec::new();
        for v in 1..m.len() {
            let r = m.requirement(v);
            if self.served[v] || r == 0 || r > p || m.close(v) < self.last_start {
                continue;
            }
            let arrivals: Vec<Option<f64>> = self
                .members
                .iter()
                .map(|mb| {
                    if !m.arcs.contains(mb.at, v) {
                        return None;
                    }
                    let t = mb.free + m.travel(mb.at, v);
                    (t <= m.close(v)).then_some(t)
                })
                .collect();
            let mut times: Vec<f64> = arrivals.iter().flatten().copied().collect();
            if times.len() < r {
                continue;
            }
            times.sort_by(f64::total_cmp);
            let earliest = times[r - 1].max(m.open(v)).max(self.last_start);
            out.push(Candidate {
                vertex: v,
                earliest,
                arrivals,
            });
        }
        out.sort_by(|a, b| {
            a.earliest
                .total_cmp(&b.earliest)
                .then(a.vertex.cmp(&b.vertex))
        });
        out
    }

    /// Upper bound on the reward still collectable.
    fn bound(&self) -> f64 {
        let m = self.model;
        match self.config.bound {
            BoundMode::RewardSum => {
                // every customer that may still start later, reachable or not
                (1..m.len())
                    .filter(|&v| {
                        !self.served[v]
                            && (1..=self.members.len()).contains(&m.requirement(v))
                            && m.close(v) >= self.last_start
                    })
                    .map(|v| m.reward(v))
                    .sum()
            }
            BoundMode::ReachabilityFiltered => {
                let mut items: Vec<(f64, f64)> = Vec::new();
                for v in 1..m.len() {
                    let r = m.requirement(v);
                    if self.served[v] || r == 0 || r > self.members.len() {
                        continue;
                    }
                    if let Some(weight) = self.reachable_weight(v, r) {
                        items.push((m.reward(v), weight));
                    }
                }
                let capacity: f64 = self
                    .members
                    .iter()
                    .map(|mb| (m.horizon() - mb.free).max(0.0))
                    .sum::<f64>()
                    + BOUND_SLACK * m.horizon().max(1.0) * self.members.len() as f64;
                fractional_knapsack(&mut items, capacity)
            }
        }
    }

    /// Working time `v` would consume over all its members, or `None` when
    /// fewer than `r` members can still reach it in time.
    fn reachable_weight(&self, v: usize, r: usize) -> Option<f64> {
        let m = self.model;
        let close = m.close(v) + BOUND_SLACK * m.close(v).max(1.0);
        if m.open(v).max(self.last_start) > close {
            return None;
        }
        let mut times: Vec<f64> = self
            .members
            .iter()
            .map(|mb| mb.free + m.travel(mb.at, v))
            .filter(|&t| t <= close)
            .collect();
        if times.len() < r {
            return None;
        }
        times.sort_by(f64::total_cmp);
        let start = times[r - 1].max(m.open(v)).max(self.last_start);
        let back = start + m.service(v) + m.travel(v, DEPOT);
        if back > m.horizon() + BOUND_SLACK * m.horizon().max(1.0) {
            return None;
        }
        Some(r as f64 * (m.service(v) + self.min_inbound[v]))
    }

    fn branch(&mut self, c: &Candidate) {
        let m = self.model;
        let v = c.vertex;
        let r = m.requirement(v);
        let p = self.members.len();
        for mask in 0u32..(1u32 << p) {
            if mask.count_ones() as usize != r {
                continue;
            }
            if !self.canonical(mask) {
                continue;
            }
            let mut start = m.open(v);
            let mut ok = true;
            for k in 0..p {
                if mask & (1 << k) != 0 {
                    match c.arrivals[k] {
                        Some(t) => start = start.max(t),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if !ok || start < self.last_start || start > m.close(v) {
                continue;
            }
            let depart = start + m.service(v);
            if depart + m.travel(v, DEPOT) > m.horizon() {
                continue;
            }

            let saved_members = self.members.clone();
            let saved_last = self.last_start;
            for k in 0..p {
                if mask & (1 << k) != 0 {
                    self.members[k] = Member {
                        at: v,
                        free: depart,
                    };
                    self.routes[k].push(v);
                }
            }
            self.served[v] = true;
            self.score += m.reward(v);
            self.last_start = start;

            self.dfs();

            self.score -= m.reward(v);
            self.served[v] = false;
            self.last_start = saved_last;
            for k in 0..p {
                if mask & (1 << k) != 0 {
                    self.routes[k].pop();
                }
            }
            self.members = saved_members;
            if self.aborted {
                return;
            }
        }
    }

    /// Among members in identical states, only lowest-index-first choices.
    fn canonical(&self, mask: u32) -> bool {
        let p = self.members.len();
        for k in 0..p {
            if mask & (1 << k) == 0 {
                continue;
            }
            for q in 0..k {
                if mask & (1 << q) == 0 && self.members[q] == self.members[k] {
                    return false;
                }
            }
        }
        true
    }
}

/// Greedy fractional knapsack; items are `(value, weight)`.
fn fractional_knapsack(items: &mut [(f64, f64)], capacity: f64) -> f64 {
    items.sort_by(|a, b| {
        // value density descending; zero weight first
        (b.0 * a.1).total_cmp(&(a.0 * b.1))
    });
    let mut left = capacity;
    let mut total = 0.0;
    for &(value, weight) in items.iter() {
        if weight <= left {
            total += value;
            left -= weight;
        } else {
            if weight > 0.0 {
                total += value * (left / weight);
            }
            break;
        }
    }
    total
}

/// Solves the instance to optimality within the configured limits.
///
/// Member subsets are enumerated as bit masks, so the team size is limited
/// to 31.
pub fn exact_solve(model: &Model, config: OracleConfig) -> OracleResult {
    let p = model.team_size();
    assert!(p < 32, "exact search supports at most 31 members");
    let n = model.len();
    let min_inbound = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v)
                .map(|u| model.travel(u, v))
                .fold(f64::INFINITY, f64::min)
        })
        .map(|t| if t.is_finite() { t } else { 0.0 })
        .collect();
    let depot = Member {
        at: DEPOT,
        free: model.open(DEPOT),
    };
    let mut search = Search {
        model,
        config,
        started: Instant::now(),
        min_inbound,
        members: vec![depot; p],
        routes: vec![Vec::new(); p],
        served: vec![false; n],
        score: 0.0,
        last_start: f64::NEG_INFINITY,
        best_score: 0.0,
        best_routes: vec![Vec::new(); p],
        nodes: 0,
        aborted: false,
    };
    search.dfs();
    let best_solution = Solution::from_routes(search.best_routes);
    OracleResult {
        best_score: objective(&model.instance, &best_solution),
        best_solution,
        proven_optimal: !search.aborted,
        explored_nodes: search.nodes,
    }
}

/// Relative distance of a heuristic score to the optimum, in percent.
///
/// Panics when the heuristic beats a proven optimum, which can only mean a
/// bug in the checker or the exact search.
pub fn optimality_gap(heuristic_score: f64, optimal_score: f64) -> f64 {
    assert!(
        heuristic_score <= optimal_score + 1e-9 * optimal_score.abs().max(1.0),
        "heuristic score {heuristic_score} exceeds the proven optimum {optimal_score}"
    );
    if optimal_score == 0.0 {
        return 0.0;
    }
    (100.0 * (optimal_score - heuristic_score) / optimal_score).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, RawInstance, Vertex};
    use crate::schedule::check_solution;

    /// (x, y, service, reward, open, close, requirement)
    type Row = (f64, f64, f64, f64, f64, f64, usize);

    fn model(rows: &[Row], horizon: f64, team: usize) -> Model {
        let mut vertices = vec![Vertex {
            id: 0,
            x: 0.0,
            y: 0.0,
            service: 0.0,
            reward: 0.0,
            open: 0.0,
            close: horizon,
        }];
        let mut req = vec![0];
        for (k, &(x, y, service, reward, open, close, r)) in rows.iter().enumerate() {
            vertices.push(Vertex {
                id: k + 1,
                x,
                y,
                service,
                reward,
                open,
                close,
            });
            req.push(r);
        }
        Model::new(Instance::new(RawInstance { vertices, horizon }, req, team, 1.0).unwrap())
    }

    #[test]
    fn single_reachable_customer() {
        let m = model(&[(3.0, 4.0, 1.0, 17.0, 0.0, 50.0, 1)], 100.0, 1);
        let res = exact_solve(&m, OracleConfig::default());
        assert_eq!(res.best_score, 17.0);
        assert!(res.proven_optimal);
        assert!(check_solution(&m, &res.best_solution).feasible());
    }

    #[test]
    fn unmeetable_requirement() {
        let m = model(&[(3.0, 4.0, 1.0, 17.0, 0.0, 50.0, 2)], 100.0, 1);
        let res = exact_solve(&m, OracleConfig::default());
        assert_eq!(res.best_score, 0.0);
        assert!(res.proven_optimal);
        assert_eq!(res.best_solution, Solution::empty(1));
    }

    #[test]
    fn cooperative_choice() {
        // both members are needed at 1 (reward 30), which rules out 2 and 3
        // (rewards 12 each, one member each, tight windows elsewhere)
        let m = model(
            &[
                (10.0, 0.0, 20.0, 30.0, 0.0, 15.0, 2),
                (0.0, 10.0, 5.0, 12.0, 10.0, 15.0, 1),
                (0.0, -10.0, 5.0, 12.0, 10.0, 15.0, 1),
            ],
            100.0,
            2,
        );
        for bound in [BoundMode::RewardSum, BoundMode::ReachabilityFiltered] {
            let res = exact_solve(
                &m,
                OracleConfig {
                    bound,
                    ..OracleConfig::default()
                },
            );
            assert_eq!(res.best_score, 30.0);
            assert!(res.proven_optimal);
            assert!(check_solution(&m, &res.best_solution).feasible());
        }
    }

    #[test]
    fn node_limit_keeps_incumbent() {
        let rows: Vec<Row> = (0..8)
            .map(|k| {
                (
                    k as f64 * 3.0,
                    10.0,
                    1.0,
                    1.0 + k as f64,
                    0.0,
                    500.0,
                    1 + k % 2,
                )
            })
            .collect();
        let m = model(&rows, 500.0, 2);
        let res = exact_solve(
            &m,
            OracleConfig {
                node_limit: 5,
                ..OracleConfig::default()
            },
        );
        assert!(!res.proven_optimal);
        assert_eq!(res.explored_nodes, 5);
        assert!(check_solution(&m, &res.best_solution).feasible());
    }

    #[test]
    fn gap_arithmetic() {
        assert_eq!(optimality_gap(100.0, 100.0), 0.0);
        assert!((optimality_gap(97.0, 100.0) - 3.0).abs() < 1e-12);
        assert_eq!(optimality_gap(0.0, 0.0), 0.0);
    }

    #[test]
    #[should_panic(expected = "exceeds the proven optimum")]
    fn gap_rejects_heuristic_above_optimum() {
        optimality_gap(101.0, 100.0);
    }

    #[test]
    fn knapsack_bound() {
        let mut items = vec![(10.0, 5.0), (6.0, 2.0), (4.0, 0.0)];
        // 4 (free) + 6 (w 2) + 10 * 3/5
        assert_eq!(fractional_knapsack(&mut items, 5.0), 16.0);
    }
}
