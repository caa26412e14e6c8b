use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::Point3;

use super::links::LinkTable;

/// What the placement search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize users whose best SINR meets the threshold.
    Coverage,
    /// Cover everyone, then minimize summed service time.
    HoverTime,
}

/// Lexicographic score, smaller is better: uncovered users first, then
/// (for the hover objective) total service time of covered users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    pub uncovered: usize,
    pub cost: f64,
}

impl Score {
    pub fn better_than(&self, other: &Score) -> bool {
        match self.uncovered.cmp(&other.uncovered) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.cost < other.cost - 1e-12 * other.cost.abs(),
        }
    }
}

/// Best-link bookkeeping for one user with a single drone left out.
#[derive(Clone, Copy)]
struct Others {
    best: f64,
    best_idx: usize,
    /// Sum over the other drones excluding `best`.
    rest: f64,
}

/// Scores replacements of drone `moving` with the rest held fixed.
pub(crate) struct MoveContext<'t, 'a> {
    table: &'t LinkTable<'a>,
    objective: Objective,
    moving: usize,
    others: Vec<Option<Others>>,
}

impl<'t, 'a> MoveContext<'t, 'a> {
    pub fn new(
        table: &'t LinkTable<'a>,
        objective: Objective,
        gains: &[Arc<[f64]>],
        moving: usize,
    ) -> Self {
        let n_users = table.users.len();
        let others = (0..n_users)
            .map(|i| {
                let mut best: Option<(f64, usize)> = None;
                for (j, g) in gains.iter().enumerate() {
                    if j == moving {
                        continue;
                    }
                    if best.is_none_or(|(b, _)| g[i] > b) {
                        best = Some((g[i], j));
                    }
                }
                best.map(|(b, bi)| {
                    let rest = gains
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != moving && *j != bi)
                        .map(|(_, g)| g[i])
                        .sum();
                    Others {
                        best: b,
                        best_idx: bi,
                        rest,
                    }
                })
            })
            .collect();
        MoveContext {
            table,
            objective,
            moving,
            others,
        }
    }

    pub fn score(&self, g: &[f64]) -> Score {
        let mut uncovered = 0;
        let mut cost = 0.0;
        let noise = self.table.noise;
        for (i, o) in self.others.iter().enumerate() {
            let sinr = match o {
                None => g[i] / noise,
                Some(o) => {
                    let moving_wins = g[i] > o.best || (g[i] == o.best && self.moving < o.best_idx);
                    if moving_wins {
                        g[i] / (o.rest + o.best + noise)
                    } else {
                        o.best / (o.rest + g[i] + noise)
                    }
                }
            };
            accumulate(
                self.table,
                self.objective,
                i,
                sinr,
                &mut uncovered,
                &mut cost,
            );
        }
        Score { uncovered, cost }
    }
}

fn accumulate(
    table: &LinkTable<'_>,
    objective: Objective,
    user: usize,
    sinr: f64,
    uncovered: &mut usize,
    cost: &mut f64,
) {
    if sinr >= table.threshold {
        if objective == Objective::HoverTime {
            *cost += table.users[user].load_bits / crate::channel::rate_linear(table.params, sinr);
        }
    } else {
        *uncovered += 1;
    }
}

/// Per-user serving drone (argmax received power, lowest index on ties)
/// and its SINR.
pub(crate) fn best_links(table: &LinkTable<'_>, gains: &[Arc<[f64]>]) -> Vec<(usize, f64)> {
    (0..table.users.len())
        .map(|i| {
            let mut best = 0;
            for j in 1..gains.len() {
                if gains[j][i] > gains[best][i] {
                    best = j;
                }
            }
            let interference: f64 = gains
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != best)
                .map(|(_, g)| g[i])
                .sum();
            (best, gains[best][i] / (interference + table.noise))
        })
        .collect()
}

pub(crate) fn full_score(
    table: &LinkTable<'_>,
    objective: Objective,
    gains: &[Arc<[f64]>],
) -> Score {
    let mut uncovered = 0;
    let mut cost = 0.0;
    for (i, (_, sinr)) in best_links(table, gains).into_iter().enumerate() {
        accumulate(table, objective, i, sinr, &mut uncovered, &mut cost);
    }
    Score { uncovered, cost }
}

fn same_spot(a: &Point3, b: &Point3) -> bool {
    (a.x - b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6 && (a.z - b.z).abs() < 1e-6
}

/// Round-robin coordinate search. Each drone in turn moves to the best point
/// of `neighborhood(current)` with the others fixed; passes repeat until no
/// drone moves or `pass_limit` is reached. Moves must strictly improve, and
/// two drones never share a position.
pub(crate) fn coordinate_search<F>(
    table: &LinkTable<'_>,
    objective: Objective,
    seeds: Vec<Point3>,
    pass_limit: usize,
    neighborhood: F,
) -> (Vec<Point3>, Score)
where
    F: Fn(&Point3) -> Vec<Point3> + Sync,
{
    let mut positions = seeds;
    let mut gains: Vec<Arc<[f64]>> = positions.iter().map(|p| table.gains(p)).collect();
    let mut score = full_score(table, objective, &gains);

    for _ in 0..pass_limit {
        let mut moved = false;
        for k in 0..positions.len() {
            let ctx = MoveContext::new(table, objective, &gains, k);
            let options: Vec<Point3> = neighborhood(&positions[k])
                .into_iter()
                .filter(|c| {
                    positions
                        .iter()
                        .enumerate()
                        .all(|(j, p)| j == k || !same_spot(p, c))
                })
                .collect();
            let scored: Vec<(Score, Arc<[f64]>)> = options
                .par_iter()
                .map(|c| {
                    let g = table.gains(c);
                    (ctx.score(&g), g)
                })
                .collect();
            let mut best: Option<usize> = None;
            let mut best_score = score;
            for (idx, (s, _)) in scored.iter().enumerate() {
                if s.better_than(&best_score) {
                    best = Some(idx);
                    best_score = *s;
                }
            }
            if let Some(idx) = best {
                positions[k] = options[idx];
                gains[k] = Arc::clone(&scored[idx].1);
                // recompute from scratch so the incremental path cannot drift
                score = full_score(table, objective, &gains);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    (positions, score)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Best `m`-subset of `candidates` by full evaluation, first in
/// lexicographic order among equals.
pub(crate) fn exhaustive(
    table: &LinkTable<'_>,
    objective: Objective,
    candidates: &[Point3],
    m: usize,
) -> (Vec<usize>, Score) {
    let gains: Vec<Arc<[f64]>> = candidates.par_iter().map(|c| table.gains(c)).collect();
    let n = candidates.len();
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best = idx.clone();
    let mut best_score: Option<Score> = None;
    loop {
        let sel: Vec<Arc<[f64]>> = idx.iter().map(|&i| Arc::clone(&gains[i])).collect();
        let s = full_score(table, objective, &sel);
        if best_score.is_none_or(|b| s.better_than(&b)) {
            best_score = Some(s);
            best.clone_from(&idx);
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return (best, best_score.expect("at least one combination"));
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
