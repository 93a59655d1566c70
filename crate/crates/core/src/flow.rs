//! Exact max-flow (Edmonds–Karp) over rational capacities.
//!
//! Shortest augmenting paths bound the number of augmentations by `O(V·E)`
//! independently of the capacities, so termination holds over the rationals.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<Rational>,
    capacity: Vec<Rational>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes], to: Vec::new(), residual: Vec::new(), capacity: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u → v`; returns the edge id.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: Rational) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.residual.push(cap.clone());
        self.capacity.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.residual.push(Rational::zero());
        self.capacity.push(Rational::zero());
        self.adj[v].push(id + 1);
        id
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> Rational {
        let mut total = Rational::zero();
        if s == t {
            return total;
        }
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !seen[v] && self.residual[e].is_positive() {
                        seen[v] = true;
                        pred[v] = Some(e);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut path = Vec::new();
            let mut v = t;
            while let Some(e) = pred[v] {
                path.push(e);
                v = self.to[e ^ 1];
            }
            let push = path.iter().map(|&e| &self.residual[e]).min().cloned().unwrap_or_default();
            for &e in &path {
                self.residual[e] -= &push;
                self.residual[e ^ 1] += &push;
            }
            total += push;
        }
    }

    /// Flow currently carried by an edge returned from `add_edge`.
    pub fn flow(&self, edge: usize) -> Rational {
        &self.capacity[edge] - &self.residual[edge]
    }

    /// Nodes reachable from `s` in the residual graph.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.residual[e].is_positive() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Maximum-weight closure of a bipartite system.
///
/// Choosing item `i` gains `gain[i]` and forces every resource in `needs[i]`,
/// each costing `cost[r]`. Returns the optimal value and the chosen items and
/// resources (the minimal optimal closure).
pub fn max_closure(
    gain: &[Rational],
    needs: &[Vec<usize>],
    cost: &[Rational],
) -> (Rational, Vec<usize>, Vec<usize>) {
    let n = gain.len();
    let m = cost.len();
    let s = n + m;
    let t = s + 1;
    let mut net = FlowNetwork::new(n + m + 2);
    let total: Rational = gain.iter().fold(Rational::zero(), |a, g| a + g);
    let infinite = &total + Rational::from_integer(1.into());
    for (i, g) in gain.iter().enumerate() {
        if g.is_positive() {
            net.add_edge(s, i, g.clone());
        }
        for &r in &needs[i] {
            net.add_edge(i, n + r, infinite.clone());
        }
    }
    for (r, c) in cost.iter().enumerate() {
        if c.is_positive() {
            net.add_edge(n + r, t, c.clone());
        }
    }
    let cut = net.max_flow(s, t);
    let side = net.source_side(s);
    let items = (0..n).filter(|&i| side[i]).collect();
    let resources = (0..m).filter(|&r| side[n + r]).collect();
    (total - cut, items, resources)
}
