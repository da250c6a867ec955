//! Solutions and their text serialization.
//!
//! ```text
//! member 1: 5 3 8
//! member 2: 5 3
//! member 3:
//! score: 40
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::SolutionParseError;
use crate::instance::Instance;

/// One route per team member plus the set of served vertices.
///
/// Routes list customers only; every route implicitly starts and ends at
/// the depot. An empty route keeps the member at the depot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Solution {
    pub routes: Vec<Vec<usize>>,
    pub served: BTreeSet<usize>,
}

impl Solution {
    /// `members` empty routes.
    pub fn empty(members: usize) -> Self {
        Solution {
            routes: vec![Vec::new(); members],
            served: BTreeSet::new(),
        }
    }

    /// Builds a solution whose served set is every visited vertex.
    pub fn from_routes(routes: Vec<Vec<usize>>) -> Self {
        let served = routes.iter().flatten().copied().collect();
        Solution { routes, served }
    }

    /// Number of routes visiting each vertex, indexed `0..n`.
    /// Out-of-range vertices are ignored.
    pub fn visit_counts(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; n];
        for route in &self.routes {
            for &v in route {
                if v < n {
                    counts[v] += 1;
                }
            }
        }
        counts
    }

    pub fn visits(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    /// Number of routes traversing each arc, including depot legs: the
    /// `x_ij` of the integer model.
    pub fn arc_flows(&self) -> Vec<((usize, usize), usize)> {
        let mut flows = std::collections::BTreeMap::new();
        for route in &self.routes {
            for (u, v) in route_arcs(route) {
                *flows.entry((u, v)).or_insert(0) += 1;
            }
        }
        flows.into_iter().collect()
    }
}

/// Consecutive arcs of a route including both depot legs.
pub(crate) fn route_arcs(route: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let depot = crate::instance::DEPOT;
    let inner = route.windows(2).map(|w| (w[0], w[1]));
    let legs = if route.is_empty() {
        None
    } else {
        Some((depot, route[0]))
    };
    let back = route.last().map(|&l| (l, depot));
    legs.into_iter().chain(inner).chain(back)
}

/// Sum of rewards over served vertices.
pub fn objective(instance: &Instance, solution: &Solution) -> f64 {
    solution
        .served
        .iter()
        .filter_map(|&v| instance.vertices.get(v))
        .map(|v| v.reward)
        .sum()
}

pub fn write_solution(solution: &Solution, score: f64) -> String {
    let mut out = String::new();
    for (k, route) in solution.routes.iter().enumerate() {
        let _ = write!(out, "member {}:", k + 1);
        for v in route {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "score: {score}");
    out
}

/// Reads a serialized solution. The served set is every visited vertex;
/// the claimed score, when present, is returned alongside.
pub fn read_solution(text: &str) -> Result<(Solution, Option<f64>), SolutionParseError> {
    let mut routes: Vec<Option<Vec<usize>>> = Vec::new();
    let mut score = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let malformed = |message: String| SolutionParseError::Malformed { line, message };
        let (head, tail) = raw
            .split_once(':')
            .ok_or_else(|| malformed("expected `member k: ...` or `score: S`".into()))?;
        let head = head.trim();
        if head == "score" {
            let s: f64 = tail
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad score `{}`", tail.trim())))?;
            score = Some(s);
            continue;
        }
        let member = head
            .strip_prefix("member")
            .map(str::trim)
            .and_then(|m| m.parse::<usize>().ok())
            .filter(|&m| m >= 1)
            .ok_or_else(|| malformed(format!("bad member label `{head}`")))?;
        let route = tail
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| malformed(format!("bad vertex `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if routes.len() < member {
            routes.resize(member, None);
        }
        if routes[member - 1].is_some() {
            return Err(SolutionParseError::DuplicateMember(member));
        }
        routes[member - 1] = Some(route);
    }
    let expected = routes.len();
    let routes = routes
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            r.ok_or(SolutionParseError::MissingMember {
                expected,
                missing: k + 1,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Solution::from_routes(routes), score))
}
