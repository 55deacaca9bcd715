use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{RankConfig, UserStats};
use crate::corpus::FollowerGraph;
use crate::error::{Error, Result};

/// Sparse follower-to-friend transition probabilities among candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    users: Vec<String>,
    index: HashMap<String, usize>,
    /// `rows[i]` holds `(j, P(i, j))` for each candidate friend j of i, by j.
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    /// A matrix over `users` from explicit `(i, j, p)` entries.
    pub fn from_entries(users: Vec<String>, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let n = users.len();
        let index: HashMap<String, usize> = users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        if index.len() != n {
            return Err(Error::InvalidArgument("duplicate user in transition matrix".into()));
        }
        let mut rows = vec![Vec::new(); n];
        for &(i, j, p) in entries {
            if i >= n || j >= n || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("bad transition entry ({i}, {j}, {p})")));
            }
            rows[i].push((j, p));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        Ok(TransitionMatrix { users, index, rows })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.index.get(user).copied()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `P(i, j)`, zero when i does not follow j.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map_or(0.0, |pos| self.rows[i][pos].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                out[i][j] = p;
            }
        }
        out
    }
}

/// For each candidate-to-candidate edge (i follows j):
/// `P(i, j) = R(j) / sum of R over i's candidate friends * (1 - |v(i) - v(j)|)`.
pub fn build_transition(candidates: &[UserStats], graph: &FollowerGraph) -> TransitionMatrix {
    let users: Vec<String> = candidates.iter().map(|s| s.user_id.clone()).collect();
    let index: HashMap<String, usize> = users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
    let mut friends: Vec<Vec<usize>> = vec![Vec::new(); users.len()];
    for (follower, friend) in graph.edges() {
        if let (Some(&i), Some(&j)) = (index.get(follower), index.get(friend)) {
            friends[i].push(j);
        }
    }
    let rows = friends
        .into_iter()
        .enumerate()
        .map(|(i, mut js)| {
            js.sort_unstable();
            let denom: u64 = js.iter().map(|&j| candidates[j].relevant_count).sum();
            js.into_iter()
                .map(|j| {
                    let share = candidates[j].relevant_count as f64 / denom as f64;
                    let sim = 1.0 - (candidates[i].v - candidates[j].v).abs();
                    (j, share * sim)
                })
                .collect()
        })
        .collect();
    TransitionMatrix { users, index, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub users: Vec<String>,
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// L1 residual after each iteration.
    pub residuals: Vec<f64>,
}

impl RankVector {
    pub fn score(&self, user: &str) -> Option<f64> {
        self.users.iter().position(|u| u == user).map(|i| self.scores[i])
    }
}

/// Iterates `x <- gamma * P^T x + (1 - gamma) * teleport` from `start` until
/// the L1 change is at most `config.tol` or `config.max_iter` steps pass.
pub fn power_iterate(p: &TransitionMatrix, teleport: &[f64], start: &[f64], config: &RankConfig) -> Result<RankVector> {
    let n = p.len();
    if teleport.len() != n || start.len() != n {
        return Err(Error::InvalidArgument("vector length does not match the matrix".into()));
    }
    if !(config.gamma > 0.0 && config.gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {}", config.gamma)));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", config.tol)));
    }
    let gamma = config.gamma;
    let mut x = start.to_vec();
    let mut next = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    while residuals.len() < config.max_iter {
        for (j, t) in teleport.iter().enumerate() {
            next[j] = (1.0 - gamma) * t;
        }
        for (i, row) in p.rows.iter().enumerate() {
            let flow = gamma * x[i];
            for &(j, pij) in row {
                next[j] += pij * flow;
            }
        }
        let residual: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        residuals.push(residual);
        if residual <= config.tol {
            converged = true;
            break;
        }
    }
    Ok(RankVector {
        users: p.users.clone(),
        scores: x,
        iterations: residuals.len(),
        final_residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        converged,
        residuals,
    })
}

/// Single-topic TwitterRank with teleportation `E = v` and `TR_0 = E`.
pub fn twitterrank(p: &TransitionMatrix, stats: &[UserStats], config: &RankConfig) -> Result<RankVector> {
    if stats.len() != p.len() || stats.iter().zip(&p.users).any(|(s, u)| s.user_id != *u) {
        return Err(Error::InvalidArgument("stats do not match the transition matrix users".into()));
    }
    let teleport: Vec<f64> = stats.iter().map(|s| s.v).collect();
    let sum: f64 = teleport.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || teleport.iter().any(|&v| v < 0.0) {
        return Err(Error::TeleportNotNormalized(sum));
    }
    power_iterate(p, &teleport, &teleport, config)
}
