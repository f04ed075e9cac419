//! Integral max-flow (Dinic) on small graphs.

use std::collections::VecDeque;

pub(crate) const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    residual: i64,
    cap: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Returns the id of the forward edge; its reverse is `id ^ 1`.
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, residual: cap, cap });
        self.edges.push(Edge { to: from, residual: 0, cap: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub(crate) fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge].cap - self.edges[edge].residual
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, residual, .. } = self.edges[e];
                if residual > 0 && self.level[to] < 0 {
                    self.level[to] = self.level[u] + 1;
                    q.push_back(to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i64) -> i64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let Edge { to, residual, .. } = self.edges[e];
            if residual > 0 && self.level[to] == self.level[u] + 1 {
                let d = self.dfs(to, t, pushed.min(residual));
                if d > 0 {
                    self.edges[e].residual -= d;
                    self.edges[e ^ 1].residual += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, INF);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes from which `t` is reachable in the residual graph.
    pub(crate) fn can_reach(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut q = VecDeque::from([t]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                // e goes v -> w; its reverse w -> v has residual edges[e ^ 1]
                let w = self.edges[e].to;
                if !seen[w] && self.edges[e ^ 1].residual > 0 {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_bipartite() {
        // s=0, agents 1,2, goods 3,4, t=5
        let mut net = FlowNetwork::new(6);
        net.add_edge(0, 1, 2);
        net.add_edge(0, 2, 2);
        net.add_edge(1, 3, INF);
        net.add_edge(2, 3, INF);
        net.add_edge(2, 4, INF);
        net.add_edge(3, 5, 1);
        net.add_edge(4, 5, 1);
        assert_eq!(net.max_flow(0, 5), 2);
        let reach = net.can_reach(5);
        assert!(reach[5]);
        assert!(!reach[3] && !reach[4]);
    }

    #[test]
    fn classic_graph() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, 3);
        net.add_edge(0, 2, 2);
        net.add_edge(1, 2, 5);
        net.add_edge(1, 3, 2);
        net.add_edge(2, 3, 3);
        assert_eq!(net.max_flow(0, 3), 5);
    }
}
