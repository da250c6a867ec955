//! Modified Clarke-Wright heuristic.
//!
//! Construction walks the saving pair list and places member visits of each
//! pair's customers into the routes, first at route ends, then at the
//! cheapest feasible interior position. A placement is kept only if the
//! whole routing still has a feasible cooperative schedule. Customers that
//! end the pass with fewer members than they require are removed. A single
//! improvement pass then tries to insert unvisited customers, trading a
//! served customer of no higher reward whose removal makes room.
//! [`solve`] repeats both steps for every weight triplet of
//! [`parameter_grid`] and keeps the best result.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::instance::DEPOT;
use crate::model::Model;
use crate::savings::{calc_saving_pairs, parameter_grid, SavingParams};
use crate::schedule::{check_solution, relax, ConstraintFamily, Relaxed};
use crate::solution::{objective, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McwConfig {
    /// Evaluate grid triplets on the rayon pool.
    pub parallel: bool,
    /// Run the full checker after every committed move and panic on a
    /// violation. Slow; meant for tests.
    pub verify_commits: bool,
}

impl Default for McwConfig {
    fn default() -> Self {
        McwConfig {
            parallel: true,
            verify_commits: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletScore {
    pub params: SavingParams,
    pub construct_score: f64,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub best_solution: Solution,
    pub best_score: f64,
    pub best_params: SavingParams,
    pub per_triplet: Vec<TripletScore>,
    pub elapsed: Duration,
}

/// Where a member visit goes: before position `pos` of route `route`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Slot {
    route: usize,
    pos: usize,
    cost: f64,
}

/// Mutable routing with committed start times.
#[derive(Clone)]
struct Workspace<'a> {
    model: &'a Model,
    routes: Vec<Vec<usize>>,
    counts: Vec<usize>,
    /// Start times of the committed routing; lower bounds for any
    /// extension of it.
    start: Vec<f64>,
    scratch: Vec<f64>,
    verify: bool,
    /// Whether partially staffed vertices are legal in the current phase.
    allow_partial: bool,
}

impl<'a> Workspace<'a> {
    fn new(model: &'a Model, routes: Vec<Vec<usize>>, verify: bool) -> Self {
        let n = model.len();
        let mut counts = vec![0; n];
        for &v in routes.iter().flatten() {
            counts[v] += 1;
        }
        let mut ws = Workspace {
            model,
            routes,
            counts,
            start: vec![0.0; n],
            scratch: vec![0.0; n],
            verify,
            allow_partial: true,
        };
        let outcome = relax(model, &ws.routes, &mut ws.start, true);
        assert!(
            matches!(outcome, Relaxed::Converged { .. }),
            "workspace seeded with an infeasible routing"
        );
        ws
    }

    fn neighbors(&self, route: usize, pos: usize) -> (usize, usize) {
        let r = &self.routes[route];
        let prev = if pos == 0 { DEPOT } else { r[pos - 1] };
        let next = if pos == r.len() { DEPOT } else { r[pos] };
        (prev, next)
    }

    fn insertion_cost(&self, route: usize, pos: usize, v: usize) -> f64 {
        let d = &self.model.distances;
        let (prev, next) = self.neighbors(route, pos);
        d.get(prev, v) + d.get(v, next) - d.get(prev, next)
    }

    /// Necessary conditions for inserting `v` at the slot, evaluated on the
    /// committed start times.
    fn locally_feasible(&self, route: usize, pos: usize, v: usize) -> bool {
        let m = self.model;
        let (prev, next) = self.neighbors(route, pos);
        if !m.arcs.contains(prev, v) || !m.arcs.contains(v, next) {
            return false;
        }
        let depart = if prev == DEPOT {
            m.open(DEPOT)
        } else {
            self.start[prev] + m.service(prev)
        };
        let sv = self.start[v].max(depart + m.travel(prev, v));
        if sv > m.close(v) {
            return false;
        }
        let arrival = sv + m.service(v) + m.travel(v, next);
        if next == DEPOT {
            arrival <= m.horizon()
        } else {
            arrival <= m.close(next)
        }
    }

    fn slots(&self, v: usize, ends: bool) -> Vec<Slot> {
        let mut slots = Vec::new();
        for (k, r) in self.routes.iter().enumerate() {
            if r.contains(&v) {
                continue;
            }
            let positions: Vec<usize> = if ends {
                if r.is_empty() {
                    vec![0]
                } else {
                    vec![0, r.len()]
                }
            } else {
                (1..r.len()).collect()
            };
            for pos in positions {
                slots.push(Slot {
                    route: k,
                    pos,
                    cost: self.insertion_cost(k, pos, v),
                });
            }
        }
        slots
    }

    /// Inserts `v` if the resulting routing stays feasible.
    fn try_insert(&mut self, slot: Slot, v: usize) -> bool {
        if !self.locally_feasible(slot.route, slot.pos, v) {
            return false;
        }
        self.routes[slot.route].insert(slot.pos, v);
        match relax(self.model, &self.routes, &mut self.scratch, true) {
            Relaxed::Converged { .. } => {
                std::mem::swap(&mut self.start, &mut self.scratch);
                self.counts[v] += 1;
                self.after_commit();
                true
            }
            _ => {
                self.routes[slot.route].remove(slot.pos);
                false
            }
        }
    }

    /// Places one member visit of `v`: route ends first, preferring the end
    /// adjacent to `partner`, then the cheapest interior slot.
    fn place_one(&mut self, v: usize, partner: Option<usize>) -> bool {
        let mut ends = self.slots(v, true);
        let adjacent = |ws: &Self, s: &Slot| -> bool {
            let Some(p) = partner else { return false };
            let r = &ws.routes[s.route];
            (s.pos == r.len() && r.last() == Some(&p)) || (s.pos == 0 && r.first() == Some(&p))
        };
        let mut keyed: Vec<(bool, Slot)> =
            ends.drain(..).map(|s| (!adjacent(self, &s), s)).collect();
        keyed.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.cost.total_cmp(&b.1.cost))
                .then(a.1.route.cmp(&b.1.route))
                .then(a.1.pos.cmp(&b.1.pos))
        });
        for (_, slot) in keyed {
            if self.try_insert(slot, v) {
                return true;
            }
        }
        let mut inner = self.slots(v, false);
        sort_slots(&mut inner);
        for slot in inner {
            if self.try_insert(slot, v) {
                return true;
            }
        }
        false
    }

    /// Adds member visits of `v` until its requirement is met or no route
    /// accepts another one.
    fn top_up(&mut self, v: usize, partner: Option<usize>) {
        let r = self.model.requirement(v);
        if r == 0 || r > self.model.team_size() {
            return;
        }
        while self.counts[v] < r {
            if !self.place_one(v, partner) {
                break;
            }
        }
    }

    fn remove_vertex(&mut self, v: usize) {
        for r in &mut self.routes {
            r.retain(|&u| u != v);
        }
        self.counts[v] = 0;
    }

    /// Recomputes committed start times; returns whether the routing is
    /// feasible.
    fn refresh(&mut self) -> bool {
        matches!(
            relax(self.model, &self.routes, &mut self.start, true),
            Relaxed::Converged { .. }
        )
    }

    fn served(&self) -> BTreeSet<usize> {
        (1..self.model.len())
            .filter(|&v| self.counts[v] > 0 && self.counts[v] == self.model.requirement(v))
            .collect()
    }

    fn solution(&self) -> Solution {
        Solution {
            routes: self.routes.clone(),
            served: self.served(),
        }
    }

    fn after_commit(&self) {
        if !self.verify {
            return;
        }
        let report = check_solution(self.model, &self.solution());
        let bad: Vec<_> = report
            .violations
            .iter()
            .filter(|v| !(self.allow_partial && v.family == ConstraintFamily::Requirement))
            .collect();
        assert!(bad.is_empty(), "committed an infeasible routing: {bad:?}");
    }
}

fn sort_slots(slots: &mut [Slot]) {
    slots.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.route.cmp(&b.route))
            .then(a.pos.cmp(&b.pos))
    });
}

/// Builds a routing for one weight triplet.
pub fn construct(model: &Model, params: SavingParams) -> Solution {
    construct_with(model, params, McwConfig::default())
}

pub fn construct_with(model: &Model, params: SavingParams, config: McwConfig) -> Solution {
    let p = model.team_size();
    let mut ws = Workspace::new(model, vec![Vec::new(); p], config.verify_commits);
    let pairs = calc_saving_pairs(model, params);
    let mut paired = vec![false; model.len()];
    for pair in &pairs {
        paired[pair.i] = true;
        paired[pair.j] = true;
        ws.top_up(pair.i, Some(pair.j));
        ws.top_up(pair.j, Some(pair.i));
    }
    // customers without any feasible partner still start on their own
    let mut singles: Vec<usize> = model
        .instance
        .customer_ids()
        .filter(|&v| !paired[v])
        .collect();
    singles.sort_by(|&a, &b| model.reward(b).total_cmp(&model.reward(a)).then(a.cmp(&b)));
    for v in singles {
        ws.top_up(v, None);
    }

    let partial: Vec<usize> = (1..model.len())
        .filter(|&v| ws.counts[v] > 0 && ws.counts[v] < model.requirement(v))
        .collect();
    for v in partial {
        ws.remove_vertex(v);
    }
    let feasible = ws.refresh();
    debug_assert!(feasible, "removing visits cannot break a feasible routing");
    ws.allow_partial = false;
    ws.after_commit();
    ws.solution()
}

/// One pass over the unvisited customers, highest reward first: each is
/// inserted with all its required members if the routing stays feasible,
/// otherwise swapped against the cheapest served customer whose removal
/// makes room, provided that customer's reward is not higher.
pub fn improve(model: &Model, solution: Solution) -> Solution {
    improve_with(model, solution, McwConfig::default())
}

pub fn improve_with(model: &Model, solution: Solution, config: McwConfig) -> Solution {
    let mut ws = Workspace::new(model, solution.routes, config.verify_commits);
    ws.allow_partial = true;
    let p = model.team_size();
    let mut candidates: Vec<usize> = model
        .instance
        .customer_ids()
        .filter(|&v| ws.counts[v] == 0)
        .filter(|&v| (1..=p).contains(&model.requirement(v)))
        .collect();
    candidates.sort_by(|&a, &b| model.reward(b).total_cmp(&model.reward(a)).then(a.cmp(&b)));

    for i in candidates {
        let snapshot = ws.clone();
        let r = model.requirement(i);
        while ws.counts[i] < r && ws.place_one(i, None) {}
        if ws.counts[i] == r {
            continue;
        }
        if !swap_in(&mut ws, &snapshot, i) {
            ws = snapshot;
        }
    }
    ws.allow_partial = false;
    ws.after_commit();
    ws.solution()
}

/// Tries to serve `i` by giving up one served customer `j` with
/// `Γ_j <= Γ_i`: `j` is removed and `i` placed with the feasible insertion
/// rule. Victims are tried by ascending reward, then index. On success `ws`
/// holds the swapped routing.
fn swap_in<'a>(ws: &mut Workspace<'a>, snapshot: &Workspace<'a>, i: usize) -> bool {
    let m = snapshot.model;
    let r = m.requirement(i);
    let mut victims: Vec<usize> = snapshot
        .served()
        .into_iter()
        .filter(|&j| m.reward(j) <= m.reward(i))
        .collect();
    victims.sort_by(|&a, &b| m.reward(a).total_cmp(&m.reward(b)).then(a.cmp(&b)));
    for j in victims {
        *ws = snapshot.clone();
        ws.remove_vertex(j);
        let feasible = ws.refresh();
        debug_assert!(feasible, "removing visits cannot break a feasible routing");
        while ws.counts[i] < r && ws.place_one(i, None) {}
        if ws.counts[i] == r {
            return true;
        }
    }
    false
}

/// Runs construction and improvement for every weight triplet and keeps the
/// best solution; ties go to the earliest triplet in grid order.
pub fn solve(model: &Model) -> SolverResult {
    solve_with(model, McwConfig::default())
}

pub fn solve_with(model: &Model, config: McwConfig) -> SolverResult {
    let started = Instant::now();
    let grid = parameter_grid();
    let run = |params: &SavingParams| {
        let built = construct_with(model, *params, config);
        let construct_score = objective(&model.instance, &built);
        let improved = improve_with(model, built, config);
        let score = objective(&model.instance, &improved);
        (improved, construct_score, score)
    };
    let results: Vec<(Solution, f64, f64)> = if config.parallel {
        grid.par_iter().map(run).collect()
    } else {
        grid.iter().map(run).collect()
    };

    let mut best = 0;
    for (k, r) in results.iter().enumerate() {
        if r.2 > results[best].2 {
            best = k;
        }
    }
    let per_triplet = grid
        .iter()
        .zip(&results)
        .map(|(&params, r)| TripletScore {
            params,
            construct_score: r.1,
            score: r.2,
        })
        .collect();
    let (best_solution, _, best_score) = results[best].clone();
    SolverResult {
        best_solution,
        best_score,
        best_params: grid[best],
        per_triplet,
        elapsed: started.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, RawInstance, Vertex};

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

    const VERIFY: McwConfig = McwConfig {
        parallel: false,
        verify_commits: true,
    };

    #[test]
    fn nothing_reachable() {
        let m = model(
            &[
                (50.0, 0.0, 1.0, 10.0, 0.0, 20.0, 1),
                (0.0, 60.0, 1.0, 10.0, 0.0, 20.0, 1),
            ],
            200.0,
            2,
        );
        let sol = construct_with(&m, SavingParams::new(0.0, 0.0, 0.0), VERIFY);
        assert_eq!(sol, Solution::empty(2));
        assert_eq!(solve_with(&m, VERIFY).best_score, 0.0);
    }

    #[test]
    fn single_customer_two_members() {
        let m = model(&[(3.0, 4.0, 2.0, 25.0, 0.0, 100.0, 2)], 100.0, 3);
        let sol = construct_with(&m, SavingParams::new(0.0, 0.0, 0.0), VERIFY);
        assert_eq!(sol.visit_counts(2)[1], 2);
        assert!(sol.served.contains(&1));
        assert!(check_solution(&m, &sol).feasible());
        assert_eq!(objective(&m.instance, &sol), 25.0);
    }

    #[test]
    fn requirement_above_team_size_is_never_served() {
        let m = model(
            &[
                (3.0, 4.0, 2.0, 25.0, 0.0, 100.0, 3),
                (4.0, 3.0, 2.0, 5.0, 0.0, 100.0, 1),
            ],
            100.0,
            2,
        );
        let sol = construct_with(&m, SavingParams::new(0.0, 0.0, 0.0), VERIFY);
        assert_eq!(sol.visit_counts(3)[1], 0);
        assert!(sol.served.contains(&2));
        let best = solve_with(&m, VERIFY);
        assert_eq!(best.best_score, 5.0);
    }

    #[test]
    fn partial_visits_are_removed() {
        // vertex 2 needs both members but the second one is busy at vertex 1
        // until it is too late
        let m = model(
            &[
                (10.0, 0.0, 50.0, 100.0, 0.0, 20.0, 1),
                (10.0, 1.0, 1.0, 10.0, 0.0, 30.0, 2),
            ],
            200.0,
            2,
        );
        let sol = construct_with(&m, SavingParams::new(0.0, 0.0, 0.0), VERIFY);
        let counts = sol.visit_counts(3);
        assert!(counts[2] == 0 || counts[2] == 2);
        assert!(check_solution(&m, &sol).feasible());
    }

    #[test]
    fn improve_swaps_lower_reward_vertex() {
        // one member; serving 1 (Γ=10) blocks 3 (Γ=30); vertex 2 is off in
        // another direction and untouched
        let m = model(
            &[
                (10.0, 0.0, 10.0, 10.0, 0.0, 15.0, 1),
                (-10.0, 0.0, 1.0, 5.0, 0.0, 100.0, 1),
                (0.0, 10.0, 10.0, 30.0, 10.0, 15.0, 1),
            ],
            200.0,
            1,
        );
        let start = Solution::from_routes(vec![vec![1]]);
        assert!(check_solution(&m, &start).feasible());
        let out = improve_with(&m, start, VERIFY);
        assert!(check_solution(&m, &out).feasible());
        assert!(out.served.contains(&3));
        assert!(!out.served.contains(&1));
        assert_eq!(objective(&m.instance, &out), 30.0 + 5.0);
    }

    #[test]
    fn improve_rolls_back_expensive_swaps() {
        let m = model(
            &[
                (10.0, 0.0, 10.0, 40.0, 0.0, 15.0, 1),
                (0.0, 10.0, 10.0, 30.0, 10.0, 15.0, 1),
            ],
            200.0,
            1,
        );
        let start = Solution::from_routes(vec![vec![1]]);
        let out = improve_with(&m, start.clone(), VERIFY);
        assert_eq!(out, start);
    }

    #[test]
    fn improve_is_identity_without_candidates() {
        let m = model(&[(10.0, 0.0, 1.0, 40.0, 0.0, 100.0, 1)], 200.0, 1);
        let start = Solution::from_routes(vec![vec![1]]);
        assert_eq!(improve_with(&m, start.clone(), VERIFY), start);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let rows: Vec<Row> = (0..9)
            .map(|k| {
                let a = k as f64 * 0.7;
                (
                    20.0 * a.cos(),
                    20.0 * a.sin(),
                    3.0,
                    5.0 + k as f64,
                    (k * 7 % 40) as f64,
                    (k * 7 % 40 + 60) as f64,
                    1 + k % 3,
                )
            })
            .collect();
        let m = model(&rows, 200.0, 3);
        let a = solve_with(
            &m,
            McwConfig {
                parallel: true,
                verify_commits: true,
            },
        );
        let b = solve_with(&m, VERIFY);
        assert_eq!(a.best_solution, b.best_solution);
        assert_eq!(a.best_score, b.best_score);
        assert_eq!(a.per_triplet, b.per_triplet);
        assert!(a.best_score >= a.per_triplet[0].score);
        assert!(check_solution(&m, &a.best_solution).feasible());
    }
}
