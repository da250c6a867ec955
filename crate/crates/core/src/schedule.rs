//! Cooperative service start times and full solution verification.
//!
//! Every member leaves the depot at its opening time. A member's arrival at
//! its next stop is the previous stop's start plus its service duration plus
//! the travel time; a vertex starts service once it has opened and every
//! member assigned to it has arrived. Routes depend on one another through
//! shared vertices, so start times are computed by monotone relaxation to
//! the least fixed point. A circular wait between routes never converges
//! and is reported as a deadlock after `visits + 1` rounds.

use std::fmt;

use thiserror::Error;

use crate::instance::DEPOT;
use crate::model::Model;
use crate::solution::{route_arcs, Solution};

/// Start times of a feasible routing.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Service start per vertex; `None` for vertices no route visits.
    pub start: Vec<Option<f64>>,
    /// Arrival time of each member at each stop of its route.
    pub arrivals: Vec<Vec<f64>>,
    /// Time each member is back at the depot.
    pub returns: Vec<f64>,
    /// Relaxation rounds until convergence, including the final quiet round.
    pub rounds: usize,
}

impl Schedule {
    /// Idle time of `member` at its `stop`-th vertex before service starts.
    pub fn waiting(&self, solution: &Solution, member: usize, stop: usize) -> f64 {
        let v = solution.routes[member][stop];
        self.start[v].unwrap_or(f64::NAN) - self.arrivals[member][stop]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("vertex {vertex} starts at {start} after it closes at {close}")]
    WindowClose {
        vertex: usize,
        start: f64,
        close: f64,
    },
    #[error("member {member} returns at {time} after the horizon {horizon}")]
    Horizon {
        member: usize,
        time: f64,
        horizon: f64,
    },
    #[error("routes wait on each other in a cycle; no convergence after {rounds} rounds")]
    Deadlock { rounds: usize },
}

/// Result of a relaxation run on the working buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relaxed {
    Converged {
        rounds: usize,
    },
    /// Some start or return exceeded its bound (only with early abort).
    Violated,
    Deadlock {
        rounds: usize,
    },
}

/// Computes start times for `routes` into `start` (indexed by vertex).
///
/// Entries of unvisited vertices are left at their opening time. With
/// `abort` set, stops as soon as a start time passes its closing time or a
/// return passes the horizon; both only grow, so the routing is infeasible.
pub(crate) fn relax(
    model: &Model,
    routes: &[Vec<usize>],
    start: &mut [f64],
    abort: bool,
) -> Relaxed {
    for (v, s) in start.iter_mut().enumerate() {
        *s = model.open(v);
    }
    let visits: usize = routes.iter().map(Vec::len).sum();
    let limit = visits + 1;
    let depot_departure = model.open(DEPOT);
    let horizon = model.horizon();
    for round in 1..=limit {
        let mut changed = false;
        for route in routes {
            let mut prev = DEPOT;
            let mut depart = depot_departure;
            for &v in route {
                let arrival = depart + model.travel(prev, v);
                if arrival > start[v] {
                    start[v] = arrival;
                    changed = true;
                    if abort && arrival > model.close(v) {
                        return Relaxed::Violated;
                    }
                }
                depart = start[v] + model.service(v);
                prev = v;
            }
            if abort && !route.is_empty() && depart + model.travel(prev, DEPOT) > horizon {
                return Relaxed::Violated;
            }
        }
        if !changed {
            return Relaxed::Converged { rounds: round };
        }
    }
    Relaxed::Deadlock { rounds: limit }
}

/// Least fixed-point start times, without judging windows or the horizon.
/// The only possible error is a deadlock.
pub fn fixed_point(model: &Model, solution: &Solution) -> Result<Schedule, ScheduleError> {
    let n = model.len();
    let mut start = vec![0.0; n];
    let rounds = match relax(model, &solution.routes, &mut start, false) {
        Relaxed::Converged { rounds } => rounds,
        Relaxed::Deadlock { rounds } => return Err(ScheduleError::Deadlock { rounds }),
        Relaxed::Violated => unreachable!("relaxation without abort never reports violations"),
    };
    let mut visited = vec![false; n];
    let mut arrivals = Vec::with_capacity(solution.routes.len());
    let mut returns = Vec::with_capacity(solution.routes.len());
    for route in &solution.routes {
        let mut prev = DEPOT;
        let mut depart = model.open(DEPOT);
        let mut times = Vec::with_capacity(route.len());
        for &v in route {
            visited[v] = true;
            times.push(depart + model.travel(prev, v));
            depart = start[v] + model.service(v);
            prev = v;
        }
        returns.push(if route.is_empty() {
            depart
        } else {
            depart + model.travel(prev, DEPOT)
        });
        arrivals.push(times);
    }
    let start = start
        .into_iter()
        .zip(visited)
        .map(|(s, seen)| seen.then_some(s))
        .collect();
    Ok(Schedule {
        start,
        arrivals,
        returns,
        rounds,
    })
}

/// Computes the cooperative schedule of a structurally valid solution.
///
/// Fails with the lowest-indexed vertex that starts after it closes, the
/// first member returning after the horizon, or a deadlock diagnosis.
pub fn propagate_schedule(model: &Model, solution: &Solution) -> Result<Schedule, ScheduleError> {
    let schedule = fixed_point(model, solution)?;
    for (v, s) in schedule.start.iter().enumerate() {
        if let Some(s) = *s {
            if s > model.close(v) {
                return Err(ScheduleError::WindowClose {
                    vertex: v,
                    start: s,
                    close: model.close(v),
                });
            }
        }
    }
    for (member, &time) in schedule.returns.iter().enumerate() {
        if time > model.horizon() {
            return Err(ScheduleError::Horizon {
                member,
                time,
                horizon: model.horizon(),
            });
        }
    }
    Ok(schedule)
}

/// Constraint families of the integer model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintFamily {
    /// Exactly P members leave and return to the depot.
    DepotFlow,
    /// Routes are simple paths over valid customer indices.
    Conservation,
    /// Served vertices receive exactly their required members; no other
    /// vertex is visited.
    Requirement,
    WindowOpen,
    WindowClose,
    /// Service at a vertex starts only after the previous stop is served
    /// and the member has travelled; violated by circular waits.
    Precedence,
    Horizon,
    ArcFeasibility,
}

impl ConstraintFamily {
    pub fn tag(self) -> &'static str {
        match self {
            ConstraintFamily::DepotFlow => "depot-flow",
            ConstraintFamily::Conservation => "conservation",
            ConstraintFamily::Requirement => "requirement",
            ConstraintFamily::WindowOpen => "window-open",
            ConstraintFamily::WindowClose => "window-close",
            ConstraintFamily::Precedence => "precedence",
            ConstraintFamily::Horizon => "horizon",
            ConstraintFamily::ArcFeasibility => "arc-feasibility",
        }
    }
}

/// What a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Offender {
    Solution,
    Route(usize),
    Vertex(usize),
    Arc(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub offender: Offender,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = match self.offender {
            Offender::Solution => "solution".to_string(),
            Offender::Route(k) => format!("member {}", k + 1),
            Offender::Vertex(v) => format!("vertex {v}"),
            Offender::Arc(i, j) => format!("arc ({i}, {j})"),
        };
        write!(f, "{} at {}: {}", self.family.tag(), at, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, family: ConstraintFamily) -> bool {
        self.violations.iter().any(|v| v.family == family)
    }

    /// Distinct violated families in declaration order.
    pub fn families(&self) -> Vec<ConstraintFamily> {
        let mut f: Vec<_> = self.violations.iter().map(|v| v.family).collect();
        f.sort();
        f.dedup();
        f
    }

    fn push(&mut self, family: ConstraintFamily, offender: Offender, detail: impl Into<String>) {
        self.violations.push(Violation {
            family,
            offender,
            detail: detail.into(),
        });
    }
}

/// Checks a solution against every constraint family. Never panics on
/// malformed input; problems become report entries.
pub fn check_solution(model: &Model, solution: &Solution) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let structural = check_structure(model, solution, &mut report);
    if structural {
        match fixed_point(model, solution) {
            Ok(schedule) => check_timing(model, solution, &schedule, &mut report),
            Err(e) => report.push(
                ConstraintFamily::Precedence,
                Offender::Solution,
                e.to_string(),
            ),
        }
    }
    report
}

/// Checks a solution together with externally supplied start times.
pub fn check_schedule(
    model: &Model,
    solution: &Solution,
    schedule: &Schedule,
) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    if check_structure(model, solution, &mut report) {
        check_timing(model, solution, schedule, &mut report);
    }
    report
}

/// Flow, conservation, requirement and arc checks. Returns whether routes
/// are well-formed enough for timing checks.
fn check_structure(model: &Model, solution: &Solution, report: &mut FeasibilityReport) -> bool {
    use ConstraintFamily::*;
    let n = model.len();
    let p = model.team_size();
    if solution.routes.len() != p {
        report.push(
            DepotFlow,
            Offender::Solution,
            format!("{} routes for a team of {p}", solution.routes.len()),
        );
    }
    let mut well_formed = true;
    for (k, route) in solution.routes.iter().enumerate() {
        let mut seen = std::collections::BTreeSet::new();
        for &v in route {
            if v == DEPOT || v >= n {
                report.push(
                    Conservation,
                    Offender::Route(k),
                    format!("vertex {v} is not a customer"),
                );
                well_formed = false;
            } else if !seen.insert(v) {
                report.push(
                    Conservation,
                    Offender::Route(k),
                    format!("vertex {v} visited twice"),
                );
                well_formed = false;
            }
        }
    }
    let counts = solution.visit_counts(n);
    for &v in &solution.served {
        // bad route entries are already reported as conservation problems
        if (v == DEPOT || v >= n) && well_formed {
            report.push(
                Requirement,
                Offender::Vertex(v),
                "served vertex is not a customer",
            );
        }
    }
    for (v, &count) in counts.iter().enumerate().skip(1) {
        let served = solution.served.contains(&v);
        let r = model.requirement(v);
        if served && count != r {
            report.push(
                Requirement,
                Offender::Vertex(v),
                format!("served by {count} members, requires {r}"),
            );
        } else if !served && count > 0 {
            report.push(
                Requirement,
                Offender::Vertex(v),
                format!("visited by {count} members but not served"),
            );
        }
    }
    if well_formed {
        for route in &solution.routes {
            for (i, j) in route_arcs(route) {
                if !model.arcs.contains(i, j) {
                    report.push(ArcFeasibility, Offender::Arc(i, j), "arc not traversable");
                }
            }
        }
    }
    well_formed
}

fn check_timing(
    model: &Model,
    solution: &Solution,
    schedule: &Schedule,
    report: &mut FeasibilityReport,
) {
    use ConstraintFamily::*;
    let n = model.len();
    let start_of = |v: usize| schedule.start.get(v).copied().flatten();
    for v in 1..n {
        let visited = solution.routes.iter().any(|r| r.contains(&v));
        if !visited {
            continue;
        }
        match start_of(v) {
            None => report.push(Precedence, Offender::Vertex(v), "no start time"),
            Some(s) => {
                if s < model.open(v) {
                    report.push(
                        WindowOpen,
                        Offender::Vertex(v),
                        format!("starts at {s} before opening at {}", model.open(v)),
                    );
                }
                if s > model.close(v) {
                    report.push(
                        WindowClose,
                        Offender::Vertex(v),
                        format!("starts at {s} after closing at {}", model.close(v)),
                    );
                }
            }
        }
    }
    for (k, route) in solution.routes.iter().enumerate() {
        let mut prev = DEPOT;
        let mut depart = model.open(DEPOT);
        for &v in route {
            let Some(s) = start_of(v) else {
                return;
            };
            let arrival = depart + model.travel(prev, v);
            if arrival > s {
                report.push(
                    Precedence,
                    Offender::Arc(prev, v),
                    format!("member {} arrives at {arrival} after start {s}", k + 1),
                );
            }
            depart = s + model.service(v);
            prev = v;
        }
        if !route.is_empty() {
            let back = depart + model.travel(prev, DEPOT);
            if back > model.horizon() {
                report.push(
                    Horizon,
                    Offender::Route(k),
                    format!("returns at {back} after horizon {}", model.horizon()),
                );
            }
        }
    }
}
