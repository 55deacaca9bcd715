use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::FollowerGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    /// Weakly connected components, each sorted, largest first (ties by first member).
    pub components: Vec<Vec<String>>,
    /// Mutual-follow pairs `(a, b)` with `a < b`, sorted.
    pub friend_pairs: Vec<(String, String)>,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Components of the graph restricted to `candidates`. Candidates without
/// any candidate edge form singleton components.
pub fn connected_components(graph: &FollowerGraph, candidates: &HashSet<String>) -> ComponentSummary {
    let mut users: Vec<&String> = candidates.iter().collect();
    users.sort();
    let index: BTreeMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let mut uf = UnionFind::new(users.len());
    let mut friend_pairs = Vec::new();
    for (a, b) in graph.edges() {
        if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
            uf.union(i, j);
            if a < b && graph.contains_edge(b, a) {
                friend_pairs.push((a.to_string(), b.to_string()));
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, u) in users.iter().enumerate() {
        let root = uf.find(i);
        groups.entry(root).or_default().push((*u).clone());
    }
    let mut components: Vec<Vec<String>> = groups.into_values().collect();
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    friend_pairs.sort();
    ComponentSummary {
        components,
        friend_pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(edges: &[(&str, &str)], cands: &[&str]) -> ComponentSummary {
        let mut g = FollowerGraph::new();
        for (a, b) in edges {
            g.add_edge(a, b).unwrap();
        }
        connected_components(&g, &cands.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn single_edge() {
        let s = run(&[("a", "b")], &["a", "b"]);
        assert_eq!(s.components, vec![vec!["a".to_string(), "b".to_string()]]);
        assert!(s.friend_pairs.is_empty());
    }

    #[test]
    fn mutual_follow() {
        let s = run(&[("a", "b"), ("b", "a")], &["a", "b"]);
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.friend_pairs, vec![("a".to_string(), "b".to_string())]);
    }

    #[test]
    fn non_candidates_do_not_bridge() {
        let s = run(&[("a", "x"), ("x", "b"), ("c", "d")], &["a", "b", "c", "d"]);
        assert_eq!(s.components.len(), 3);
        assert_eq!(s.components[0], vec!["c".to_string(), "d".to_string()]);
    }
}
