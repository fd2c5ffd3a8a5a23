use num::{One, Signed, Zero};

use crate::exactnum::Rational;

/// Residual network over exact rational capacities. Augmenting paths are
/// found by breadth-first search (shortest path by edge count), which keeps
/// the augmentation count polynomial independent of capacity values.
#[derive(Clone, Debug)]
pub(crate) struct ResidualNet {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<Rational>,
    original: Vec<Rational>,
}

impl ResidualNet {
    pub fn new(node_count: usize) -> Self {
        ResidualNet {
            adj: vec![Vec::new(); node_count],
            to: Vec::new(),
            residual: Vec::new(),
            original: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Add a forward edge with the given capacity. Returns the forward
    /// edge index; the paired reverse edge is at `index ^ 1`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: Rational) -> usize {
        debug_assert!(!cap.is_negative());
        let idx = self.to.len();
        self.adj[u].push(idx);
        self.to.push(v);
        self.residual.push(cap.clone());
        self.original.push(cap);
        self.adj[v].push(idx + 1);
        self.to.push(u);
        self.residual.push(Rational::zero());
        self.original.push(Rational::zero());
        idx
    }

    pub fn flow_on(&self, forward_idx: usize) -> Rational {
        debug_assert_eq!(forward_idx % 2, 0);
        &self.original[forward_idx] - &self.residual[forward_idx]
    }

    /// Install a flow value on a forward edge (used for warm starts).
    /// Returns false when the value violates the capacity.
    pub fn set_flow(&mut self, forward_idx: usize, value: &Rational) -> bool {
        debug_assert_eq!(forward_idx % 2, 0);
        if value.is_negative() || value > &self.original[forward_idx] {
            return false;
        }
        self.residual[forward_idx] = &self.original[forward_idx] - value;
        self.residual[forward_idx + 1] = value.clone();
        true
    }

    /// Augment from `s` to `t` until no residual path remains. Returns the
    /// value added.
    pub fn augment_to_max(&mut self, s: usize, t: usize) -> Rational {
        let mut added = Rational::zero();
        loop {
            let Some(path) = self.shortest_path(s, t) else {
                return added;
            };
            let mut bottleneck: Option<Rational> = None;
            for &e in &path {
                let r = &self.residual[e];
                if bottleneck.as_ref().map_or(true, |b| r < b) {
                    bottleneck = Some(r.clone());
                }
            }
            let q = bottleneck.expect("path is nonempty");
            debug_assert!(q.is_positive());
            for &e in &path {
                self.residual[e] -= &q;
                self.residual[e ^ 1] += &q;
            }
            added += q;
        }
    }

    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut incoming: Vec<Option<usize>> = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut queue = std::collections::VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &e in &self.adj[v] {
                let w = self.to[e];
                if !seen[w] && self.residual[e].is_positive() {
                    seen[w] = true;
                    incoming[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let e = incoming[v].expect("reached node has an incoming edge");
            path.push(e);
            v = self.to[e ^ 1];
        }
        path.reverse();
        Some(path)
    }

    /// Nodes with a residual path to `t` (their complement is the maximal
    /// min-cut source side after a max flow).
    pub fn reaching(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![t];
        seen[t] = true;
        while let Some(v) = stack.pop() {
            // Walk backwards: u reaches v when the edge u->v has residual.
            for &e in &self.adj[v] {
                // e points v -> w; its pair w -> v is e ^ 1.
                let w = self.to[e];
                if !seen[w] && self.residual[e ^ 1].is_positive() {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// A capacity strictly larger than any possible flow value.
pub(crate) fn infinite_cap(source_caps: &[Rational]) -> Rational {
    source_caps.iter().fold(Rational::one(), |acc, c| acc + c)
}
