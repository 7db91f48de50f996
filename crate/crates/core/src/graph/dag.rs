use super::{EdgeMark, MixedGraph};
use crate::{Error, Result};

/// Directed acyclic graph whose nodes are split into observed and latent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    latent: Vec<bool>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(n_nodes: usize) -> Self {
        Dag {
            latent: vec![false; n_nodes],
            parents: vec![Vec::new(); n_nodes],
            children: vec![Vec::new(); n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.latent.len()
    }

    pub fn set_latent(&mut self, v: usize, latent: bool) {
        self.latent[v] = latent;
    }

    pub fn is_latent(&self, v: usize) -> bool {
        self.latent[v]
    }

    pub fn observed(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&v| !self.latent[v]).collect()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.children[parent].contains(&child)
    }

    /// Adds `parent -> child`, refusing edges that would close a cycle.
    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check(parent)?;
        self.check(child)?;
        if parent == child || self.reaches(child, parent) {
            return Err(Error::Cycle(parent, child));
        }
        if !self.has_edge(parent, child) {
            self.children[parent].push(child);
            self.parents[child].push(parent);
        }
        Ok(())
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.children[v].iter().copied());
        }
        false
    }

    /// Indicator of the ancestors of `set`, including `set` itself.
    pub fn ancestors_of(&self, set: &[usize]) -> Vec<bool> {
        let mut anc = vec![false; self.n_nodes()];
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut anc[v], true) {
                continue;
            }
            stack.extend(self.parents[v].iter().copied());
        }
        anc
    }

    pub(crate) fn check(&self, v: usize) -> Result<()> {
        if v < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: v, size: self.n_nodes() })
        }
    }
}

/// Maximal ancestral graph: a mixed graph with head and tail marks only that
/// has neither directed nor almost-directed cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mag {
    graph: MixedGraph,
}

impl Mag {
    pub fn new(graph: MixedGraph) -> Result<Self> {
        let n = graph.n_nodes();
        for a in 0..n {
            for b in graph.neighbors(a) {
                if graph.mark_at(a, b) == Some(EdgeMark::Circle) {
                    return Err(Error::InvalidMag(format!("circle mark on edge {a}-{b}")));
                }
                if graph.mark_at(a, b) == Some(EdgeMark::Tail)
                    && graph.mark_at(b, a) == Some(EdgeMark::Tail)
                {
                    return Err(Error::InvalidMag(format!("undirected edge {a}-{b}")));
                }
            }
        }
        let mag = Mag { graph };
        let anc: Vec<Vec<bool>> = (0..n).map(|b| mag.ancestors_of(&[b])).collect();
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a && anc[b][a]) {
                // a is a strict ancestor of b, so no edge may point into a from b
                if mag.graph.mark_at(a, b) == Some(EdgeMark::Head) {
                    return Err(Error::InvalidMag(format!(
                        "{a} is an ancestor of {b} yet has an arrowhead on their edge"
                    )));
                }
            }
        }
        Ok(mag)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    /// Indicator of ancestors of `set` along directed edges, including `set`.
    pub fn ancestors_of(&self, set: &[usize]) -> Vec<bool> {
        let n = self.graph.n_nodes();
        let mut anc = vec![false; n];
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut anc[v], true) {
                continue;
            }
            for p in self.graph.neighbors(v) {
                if self.graph.is_directed(p, v) {
                    stack.push(p);
                }
            }
        }
        anc
    }

    pub fn is_bidirected(&self, a: usize, b: usize) -> bool {
        self.graph.mark_at(a, b) == Some(EdgeMark::Head)
            && self.graph.mark_at(b, a) == Some(EdgeMark::Head)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_rejects_cycles() {
        let mut g = Dag::new(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        assert!(matches!(g.add_edge(2, 0), Err(Error::Cycle(2, 0))));
        assert!(g.add_edge(0, 0).is_err());
        assert!(g.add_edge(0, 7).is_err());
    }

    #[test]
    fn ancestors_include_self() {
        let mut g = Dag::new(4);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        let anc = g.ancestors_of(&[2]);
        assert_eq!(anc, vec![true, true, true, false]);
    }

    #[test]
    fn mag_validation() {
        let mut g = MixedGraph::new(3);
        g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Head);
        g.add_edge(1, 2, EdgeMark::Head, EdgeMark::Head);
        assert!(Mag::new(g.clone()).is_ok());

        // almost directed cycle: 0 -> 1 -> 2, 0 <-> 2
        let mut bad = MixedGraph::new(3);
        bad.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Head);
        bad.add_edge(1, 2, EdgeMark::Tail, EdgeMark::Head);
        bad.add_edge(0, 2, EdgeMark::Head, EdgeMark::Head);
        assert!(Mag::new(bad).is_err());

        let mut circ = MixedGraph::new(2);
        circ.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Head);
        assert!(Mag::new(circ).is_err());
    }
}
