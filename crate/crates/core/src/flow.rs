//! Edmonds–Karp maximum flow, generic over the capacity type so the same code
//! serves exact rational networks and integer networks.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

use num_traits::Zero;

pub trait Capacity: Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T> Capacity for T where T: Clone + PartialOrd + Zero + Add<Output = T> + Sub<Output = T> {}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc<C> {
    pub from: usize,
    pub to: usize,
    pub cap: C,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork<C> {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<Arc<C>>,
}

#[derive(Clone, Debug)]
pub struct FlowResult<C> {
    pub value: C,
    /// Flow on each arc, aligned with [`FlowNetwork::arcs`].
    pub flow: Vec<C>,
    /// Nodes reachable from the source in the final residual graph. These form
    /// the source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl<C: Capacity> FlowNetwork<C> {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork { nodes, source, sink, arcs: Vec::new() }
    }

    /// Adds an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: C) -> usize {
        debug_assert!(from < self.nodes && to < self.nodes);
        self.arcs.push(Arc { from, to, cap });
        self.arcs.len() - 1
    }

    pub fn max_flow(&self) -> FlowResult<C> {
        // Residual arcs come in pairs: 2a is arc a, 2a+1 its reverse.
        let mut residual: Vec<C> = Vec::with_capacity(2 * self.arcs.len());
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes];
        for (a, arc) in self.arcs.iter().enumerate() {
            residual.push(arc.cap.clone());
            residual.push(C::zero());
            adj[arc.from].push(2 * a);
            adj[arc.to].push(2 * a + 1);
        }
        let head = |r: usize| {
            let arc = &self.arcs[r / 2];
            if r % 2 == 0 {
                arc.to
            } else {
                arc.from
            }
        };
        let mut value = C::zero();
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; self.nodes];
            let mut seen = vec![false; self.nodes];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                if u == self.sink {
                    break;
                }
                for &r in &adj[u] {
                    let v = head(r);
                    if !seen[v] && residual[r] > C::zero() {
                        seen[v] = true;
                        parent[v] = Some(r);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[self.sink] || self.source == self.sink {
                let flow = self
                    .arcs
                    .iter()
                    .enumerate()
                    .map(|(a, _)| residual[2 * a + 1].clone())
                    .collect();
                return FlowResult { value, flow, source_side: seen };
            }
            let mut bottleneck: Option<C> = None;
            let mut v = self.sink;
            while let Some(r) = parent[v] {
                let c = residual[r].clone();
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= c => b,
                    _ => c,
                });
                v = head(r ^ 1);
            }
            let b = bottleneck.expect("path has at least one arc");
            let mut v = self.sink;
            while let Some(r) = parent[v] {
                residual[r] = residual[r].clone() - b.clone();
                residual[r ^ 1] = residual[r ^ 1].clone() + b.clone();
                v = head(r ^ 1);
            }
            value = value + b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, Rational};

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, rat(3, 7));
        let r = net.max_flow();
        assert_eq!(r.value, rat(3, 7));
        assert_eq!(r.flow, vec![rat(3, 7)]);
    }

    #[test]
    fn disconnected_sink() {
        let mut net: FlowNetwork<Rational> = FlowNetwork::new(3, 0, 2);
        net.add_arc(0, 1, rat(1, 1));
        assert_eq!(net.max_flow().value, rat(0, 1));
    }

    #[test]
    fn needs_reverse_arc() {
        // Classic instance where a greedy path must be undone.
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, 1i64);
        net.add_arc(0, 2, 1);
        net.add_arc(1, 2, 1);
        net.add_arc(1, 3, 1);
        net.add_arc(2, 3, 1);
        let r = net.max_flow();
        assert_eq!(r.value, 2);
        assert!(r.source_side[0] && !r.source_side[3]);
    }
}
