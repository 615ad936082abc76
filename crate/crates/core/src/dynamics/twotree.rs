use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices pairwise at distance at least 2, connected in the square graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTree {
    pub vertices: Vec<usize>,
}

impl TwoTree {
    pub fn is_valid(&self, adj: &[Vec<usize>]) -> bool {
        let set: BTreeSet<usize> = self.vertices.iter().copied().collect();
        if self
            .vertices
            .iter()
            .any(|&v| adj[v].iter().any(|w| set.contains(w)))
        {
            return false;
        }
        let Some(&root) = self.vertices.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &set {
                if !seen.contains(&w) && distance_at_most_two(adj, v, w) {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
        }
        seen.len() == set.len()
    }
}

fn distance_at_most_two(adj: &[Vec<usize>], a: usize, b: usize) -> bool {
    a == b || adj[a].contains(&b) || adj[a].iter().any(|&m| adj[m].contains(&b))
}

pub fn graph_max_degree(adj: &[Vec<usize>]) -> usize {
    adj.iter().map(Vec::len).max().unwrap_or(0)
}

/// (eD²)^{j−1}/2.
pub fn two_tree_count_bound(d: usize, j: usize) -> f64 {
    (std::f64::consts::E * (d * d) as f64).powi(j as i32 - 1) / 2.0
}

/// Greedy maximal 2-tree: take the root, drop its closed neighbourhood, then
/// repeatedly take the remaining vertex closest to the tree (lowest index on
/// ties) and drop its closed neighbourhood.
pub fn construct_2tree(adj: &[Vec<usize>], component: &[usize], root: usize) -> Result<TwoTree> {
    let mut remaining: BTreeSet<usize> = component.iter().copied().collect();
    if !remaining.contains(&root) {
        return Err(Error::param(format!("root {root} is not in the component")));
    }
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut tree = Vec::new();
    let mut add = |v: usize, remaining: &mut BTreeSet<usize>, dist: &mut Vec<usize>| {
        tree.push(v);
        remaining.remove(&v);
        for &w in &adj[v] {
            remaining.remove(&w);
        }
        // multi-source BFS update from the new tree vertex
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for &w in &adj[x] {
                if dist[w] > dist[x] + 1 {
                    dist[w] = dist[x] + 1;
                    queue.push_back(w);
                }
            }
        }
    };
    add(root, &mut remaining, &mut dist);
    while let Some(&next) = remaining.iter().min_by_key(|&&v| (dist[v], v)) {
        if dist[next] == usize::MAX {
            return Err(Error::invalid("component is not connected"));
        }
        add(next, &mut remaining, &mut dist);
    }
    let t = TwoTree { vertices: tree };
    let floor = component.len() / (graph_max_degree(adj) + 1);
    if t.vertices.len() < floor {
        return Err(Error::invalid(format!(
            "greedy 2-tree of size {} below {floor}",
            t.vertices.len()
        )));
    }
    Ok(t)
}

/// Number of 2-trees of size `j` containing `root`, by include/exclude
/// branching on square-graph neighbours of the current set.
pub fn count_2trees(adj: &[Vec<usize>], root: usize, j: usize) -> Result<u64> {
    if j < 2 {
        return Err(Error::param("2-tree size must be at least 2"));
    }
    if root >= adj.len() {
        return Err(Error::param(format!("root {root} out of range")));
    }
    let n = adj.len();
    // square-graph neighbours at distance exactly 2
    let sq: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut s: BTreeSet<usize> = adj[v]
                .iter()
                .flat_map(|&m| adj[m].iter().copied())
                .collect();
            s.remove(&v);
            for w in &adj[v] {
                s.remove(w);
            }
            s.into_iter().collect()
        })
        .collect();

    struct Search<'a> {
        adj: &'a [Vec<usize>],
        sq: &'a [Vec<usize>],
        j: usize,
        count: u64,
    }
    impl Search<'_> {
        // `blocked[v] > 0`: v is in the set, adjacent to it, or excluded
        fn go(&mut self, size: usize, frontier: &mut Vec<usize>, blocked: &mut [u32]) {
            if size == self.j {
                self.count += 1;
                return;
            }
            let Some(pos) = frontier.iter().position(|&w| blocked[w] == 0) else {
                return;
            };
            let w = frontier[pos];
            // include w
            let saved = frontier.len();
            let mut touched = vec![w];
            touched.extend(self.adj[w].iter().copied());
            for &x in &touched {
                blocked[x] += 1;
            }
            frontier.extend(self.sq[w].iter().copied().filter(|&x| blocked[x] == 0));
            self.go(size + 1, frontier, blocked);
            frontier.truncate(saved);
            for &x in &touched {
                blocked[x] -= 1;
            }
            // exclude w
            blocked[w] += 1;
            self.go(size, frontier, blocked);
            blocked[w] -= 1;
        }
    }
    let mut blocked = vec![0u32; n];
    blocked[root] += 1;
    for &w in &adj[root] {
        blocked[w] += 1;
    }
    let mut frontier: Vec<usize> = sq[root].clone();
    let mut s = Search {
        adj,
        sq: &sq,
        j,
        count: 0,
    };
    s.go(1, &mut frontier, &mut blocked);
    Ok(s.count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(adj: &[Vec<usize>], root: usize, j: usize) -> u64 {
        let n = adj.len();
        let mut count = 0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != j || mask & (1 << root) == 0 {
                continue;
            }
            let t = TwoTree {
                vertices: (0..n).filter(|&v| mask & (1 << v) != 0).collect(),
            };
            count += t.is_valid(adj) as u64;
        }
        count
    }

    fn path(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|v| {
                [v.checked_sub(1), (v + 1 < n).then_some(v + 1)]
                    .into_iter()
                    .flatten()
                    .collect()
            })
            .collect()
    }

    #[test]
    fn small_cases() {
        let p3 = path(3);
        assert_eq!(
            construct_2tree(&p3, &[0, 1, 2], 0).unwrap().vertices,
            vec![0, 2]
        );
        assert_eq!(
            construct_2tree(&[vec![]], &[0], 0).unwrap().vertices,
            vec![0]
        );
        assert!(construct_2tree(&p3, &[0, 1], 2).is_err());
        assert_eq!(count_2trees(&p3, 0, 2).unwrap(), 1);
        let star = vec![vec![1, 2, 3], vec![0], vec![0], vec![0]];
        assert_eq!(count_2trees(&star, 0, 2).unwrap(), 0);
        assert_eq!(count_2trees(&star, 1, 3).unwrap(), 1);
    }

    #[test]
    fn matches_brute_force() {
        let p7 = path(7);
        let cycle: Vec<Vec<usize>> = (0..8).map(|v| vec![(v + 7) % 8, (v + 1) % 8]).collect();
        let grid: Vec<Vec<usize>> = (0..9)
            .map(|v| {
                let (r, c) = (v / 3, v % 3);
                let mut nb = vec![];
                if r > 0 {
                    nb.push(v - 3)
                }
                if r < 2 {
                    nb.push(v + 3)
                }
                if c > 0 {
                    nb.push(v - 1)
                }
                if c < 2 {
                    nb.push(v + 1)
                }
                nb
            })
            .collect();
        for g in [p7, cycle, grid] {
            for root in 0..g.len() {
                for j in 2..=5 {
                    assert_eq!(count_2trees(&g, root, j).unwrap(), brute(&g, root, j));
                }
            }
            let all: Vec<usize> = (0..g.len()).collect();
            let t = construct_2tree(&g, &all, 0).unwrap();
            assert!(t.is_valid(&g));
        }
    }
}
