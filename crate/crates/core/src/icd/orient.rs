//! Edge-mark orientation of a skeleton with separating sets.
//!
//! Marks are written to whole homology classes. A circle is the only mark that
//! may be overwritten; when a rule proposes a different non-circle mark the
//! existing one is kept and the disagreement is reported.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{representative, DynamicPag, EdgeMark, MixedGraph, TimedNode};

use EdgeMark::{Circle, Head, Tail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R0,
    R1,
    R2,
    R3,
    R4,
    R8,
    R9,
    R10,
}

/// A rule asked for a mark that contradicts one already in place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkConflict {
    pub rule: Rule,
    pub at: TimedNode,
    pub other: TimedNode,
    pub existing: EdgeMark,
    pub proposed: EdgeMark,
}

struct Orienter<'a> {
    pag: &'a mut DynamicPag,
    conflicts: Vec<MarkConflict>,
    seen_conflicts: BTreeSet<((TimedNode, TimedNode), bool, u8)>,
}

fn mark_code(m: EdgeMark) -> u8 {
    match m {
        Circle => 0,
        Head => 1,
        Tail => 2,
    }
}

impl Orienter<'_> {
    #[inline]
    fn g(&self) -> &MixedGraph {
        self.pag.graph()
    }

    #[inline]
    fn m(&self, at: usize, other: usize) -> Option<EdgeMark> {
        self.pag.graph().mark_at(at, other)
    }

    #[inline]
    fn adj(&self, a: usize, b: usize) -> bool {
        self.pag.graph().is_adjacent(a, b)
    }

    fn nbrs(&self, v: usize) -> Vec<usize> {
        self.pag.graph().neighbors(v).collect()
    }

    /// Edge `a`–`b` is possibly directed from `a` to `b`.
    #[inline]
    fn pd(&self, a: usize, b: usize) -> bool {
        matches!(self.m(a, b), Some(Tail | Circle)) && matches!(self.m(b, a), Some(Head | Circle))
    }

    fn sepset_contains(&self, a: usize, b: usize, v: usize) -> Option<bool> {
        let (x, y, z) = (self.pag.node(a), self.pag.node(b), self.pag.node(v));
        self.pag.sepsets.contains(x, y, z)
    }

    /// Writes `mark` at `at` on `at`–`other`. Returns whether anything changed.
    fn set(&mut self, rule: Rule, at: usize, other: usize, mark: EdgeMark) -> bool {
        let Some(cur) = self.m(at, other) else {
            return false;
        };
        if cur == mark {
            return false;
        }
        let (x, y) = (self.pag.node(at), self.pag.node(other));
        if cur != Circle || DynamicPag::is_fixed(x, y) {
            let (rep, shift) = representative(x, y);
            let at_first = rep.0 == TimedNode::new(x.var, x.lag - shift);
            if self.seen_conflicts.insert((rep, at_first, mark_code(mark))) {
                self.conflicts.push(MarkConflict { rule, at: x, other: y, existing: cur, proposed: mark });
            }
            return false;
        }
        self.pag
            .set_mark_homologous(x, y, mark)
            .expect("orientation writes only to existing non-fixed marks");
        true
    }

    fn r0(&mut self) {
        let n = self.g().n_nodes();
        for beta in 0..n {
            let nb = self.nbrs(beta);
            for (i, &alpha) in nb.iter().enumerate() {
                for &gamma in &nb[i + 1..] {
                    if self.adj(alpha, gamma) {
                        continue;
                    }
                    if self.sepset_contains(alpha, gamma, beta) == Some(false) {
                        self.set(Rule::R0, beta, alpha, Head);
                        self.set(Rule::R0, beta, gamma, Head);
                    }
                }
            }
        }
    }

    /// α *-> β o-* γ, α and γ not adjacent: β -> γ.
    fn r1(&mut self) -> bool {
        let mut changed = false;
        for beta in 0..self.g().n_nodes() {
            let nb = self.nbrs(beta);
            for &alpha in &nb {
                if self.m(beta, alpha) != Some(Head) {
                    continue;
                }
                for &gamma in &nb {
                    if gamma == alpha || self.adj(alpha, gamma) || self.m(beta, gamma) != Some(Circle) {
                        continue;
                    }
                    changed |= self.set(Rule::R1, beta, gamma, Tail);
                    changed |= self.set(Rule::R1, gamma, beta, Head);
                }
            }
        }
        changed
    }

    /// α -> β *-> γ or α *-> β -> γ, with α *-o γ: α *-> γ.
    fn r2(&mut self) -> bool {
        let mut changed = false;
        for alpha in 0..self.g().n_nodes() {
            for gamma in self.nbrs(alpha) {
                if self.m(gamma, alpha) != Some(Circle) {
                    continue;
                }
                let hit = self.nbrs(alpha).into_iter().any(|beta| {
                    beta != gamma
                        && self.adj(beta, gamma)
                        && self.m(gamma, beta) == Some(Head)
                        && ((self.m(alpha, beta) == Some(Tail) && self.m(beta, alpha) == Some(Head))
                            || (self.m(beta, alpha) == Some(Head) && self.m(beta, gamma) == Some(Tail)))
                });
                if hit {
                    changed |= self.set(Rule::R2, gamma, alpha, Head);
                }
            }
        }
        changed
    }

    /// α *-> β <-* γ, α *-o θ o-* γ, α and γ not adjacent, θ *-o β: θ *-> β.
    fn r3(&mut self) -> bool {
        let mut changed = false;
        for beta in 0..self.g().n_nodes() {
            let nb = self.nbrs(beta);
            for &theta in &nb {
                if self.m(beta, theta) != Some(Circle) {
                    continue;
                }
                let hit = nb.iter().enumerate().any(|(i, &alpha)| {
                    nb[i + 1..].iter().any(|&gamma| {
                        alpha != theta
                            && gamma != theta
                            && !self.adj(alpha, gamma)
                            && self.m(beta, alpha) == Some(Head)
                            && self.m(beta, gamma) == Some(Head)
                            && self.m(theta, alpha) == Some(Circle)
                            && self.m(theta, gamma) == Some(Circle)
                    })
                });
                if hit {
                    changed |= self.set(Rule::R3, beta, theta, Head);
                }
            }
        }
        changed
    }

    /// Discriminating path for `beta` ending in `alpha -> gamma`: returns the
    /// far endpoint θ. Every interior node is a collider and a parent of γ.
    fn discriminating(&self, alpha: usize, beta: usize, gamma: usize) -> Option<usize> {
        let n = self.g().n_nodes();
        let mut visited = vec![false; n];
        visited[alpha] = true;
        visited[beta] = true;
        visited[gamma] = true;
        let mut queue = VecDeque::from([(alpha, beta)]);
        while let Some((v, next)) = queue.pop_front() {
            if self.m(v, next) != Some(Head) {
                continue;
            }
            for p in self.nbrs(v) {
                if visited[p] || self.m(v, p) != Some(Head) {
                    continue;
                }
                if !self.adj(p, gamma) {
                    return Some(p);
                }
                if self.g().is_directed(p, gamma) {
                    visited[p] = true;
                    queue.push_back((p, v));
                }
            }
        }
        None
    }

    fn r4(&mut self) -> bool {
        let mut changed = false;
        for beta in 0..self.g().n_nodes() {
            for gamma in self.nbrs(beta) {
                if self.m(beta, gamma) != Some(Circle) {
                    continue;
                }
                for alpha in self.nbrs(gamma) {
                    if alpha == beta
                        || !self.adj(alpha, beta)
                        || !self.g().is_directed(alpha, gamma)
                        || self.m(alpha, beta) != Some(Head)
                    {
                        continue;
                    }
                    let Some(theta) = self.discriminating(alpha, beta, gamma) else {
                        continue;
                    };
                    match self.sepset_contains(theta, gamma, beta) {
                        Some(true) => {
                            changed |= self.set(Rule::R4, beta, gamma, Tail);
                            changed |= self.set(Rule::R4, gamma, beta, Head);
                        }
                        Some(false) => {
                            changed |= self.set(Rule::R4, beta, alpha, Head);
                            changed |= self.set(Rule::R4, beta, gamma, Head);
                            changed |= self.set(Rule::R4, gamma, beta, Head);
                        }
                        None => {}
                    }
                    break;
                }
            }
        }
        changed
    }

    /// α -> β -> γ or α -o β -> γ, with α o-> γ: α -> γ.
    fn r8(&mut self) -> bool {
        let mut changed = false;
        for alpha in 0..self.g().n_nodes() {
            for gamma in self.nbrs(alpha) {
                if self.m(alpha, gamma) != Some(Circle) || self.m(gamma, alpha) != Some(Head) {
                    continue;
                }
                let hit = self.nbrs(alpha).into_iter().any(|beta| {
                    beta != gamma
                        && self.m(alpha, beta) == Some(Tail)
                        && matches!(self.m(beta, alpha), Some(Head | Circle))
                        && self.g().is_directed(beta, gamma)
                });
                if hit {
                    changed |= self.set(Rule::R8, alpha, gamma, Tail);
                }
            }
        }
        changed
    }

    /// Nodes reached from `start` by uncovered possibly directed paths that
    /// begin with the edge `from`–`start` and never visit `avoid`.
    fn upd_reach(&self, from: usize, start: usize, avoid: usize) -> Vec<bool> {
        let n = self.g().n_nodes();
        let mut reached = vec![false; n];
        reached[start] = true;
        let mut on_path = vec![false; n];
        on_path[from] = true;
        on_path[start] = true;
        on_path[avoid] = true;
        let mut path = vec![from, start];
        self.upd_dfs(&mut path, &mut on_path, &mut reached, None);
        reached
    }

    /// Whether an uncovered possibly directed path `from, start, ..., target`
    /// exists whose last step enters `target`.
    fn upd_path_to(&self, from: usize, start: usize, target: usize) -> bool {
        let n = self.g().n_nodes();
        let mut reached = vec![false; n];
        let mut on_path = vec![false; n];
        on_path[from] = true;
        on_path[start] = true;
        let mut path = vec![from, start];
        self.upd_dfs(&mut path, &mut on_path, &mut reached, Some(target));
        reached[target]
    }

    fn upd_dfs(&self, path: &mut Vec<usize>, on_path: &mut [bool], reached: &mut [bool], target: Option<usize>) {
        if let Some(t) = target {
            if reached[t] {
                return;
            }
        }
        let len = path.len();
        let (prev, v) = (path[len - 2], path[len - 1]);
        for w in self.nbrs(v) {
            if on_path[w] || self.adj(prev, w) || !self.pd(v, w) {
                continue;
            }
            reached[w] = true;
            if target == Some(w) {
                return;
            }
            on_path[w] = true;
            path.push(w);
            self.upd_dfs(path, on_path, reached, target);
            path.pop();
            on_path[w] = false;
        }
    }

    /// α o-> γ and an uncovered possibly directed path α, β, ..., γ with β
    /// and γ not adjacent: α -> γ.
    fn r9(&mut self) -> bool {
        let mut changed = false;
        for alpha in 0..self.g().n_nodes() {
            for gamma in self.nbrs(alpha) {
                if self.m(alpha, gamma) != Some(Circle) || self.m(gamma, alpha) != Some(Head) {
                    continue;
                }
                let hit = self.nbrs(alpha).into_iter().any(|beta| {
                    beta != gamma && !self.adj(beta, gamma) && self.pd(alpha, beta) && self.upd_path_to(alpha, beta, gamma)
                });
                if hit {
                    changed |= self.set(Rule::R9, alpha, gamma, Tail);
                }
            }
        }
        changed
    }

    /// α o-> γ, β -> γ <- θ, uncovered possibly directed paths from α to β
    /// and to θ whose second nodes μ, ω are distinct and not adjacent: α -> γ.
    fn r10(&mut self) -> bool {
        let mut changed = false;
        for alpha in 0..self.g().n_nodes() {
            for gamma in self.nbrs(alpha) {
                if self.m(alpha, gamma) != Some(Circle) || self.m(gamma, alpha) != Some(Head) {
                    continue;
                }
                let parents: Vec<usize> = self
                    .nbrs(gamma)
                    .into_iter()
                    .filter(|&p| p != alpha && self.g().is_directed(p, gamma))
                    .collect();
                if parents.len() < 2 {
                    continue;
                }
                let firsts: Vec<(usize, Vec<usize>)> = self
                    .nbrs(alpha)
                    .into_iter()
                    .filter(|&mu| mu != gamma && self.pd(alpha, mu))
                    .map(|mu| {
                        let reach = self.upd_reach(alpha, mu, gamma);
                        (mu, parents.iter().copied().filter(|&p| reach[p]).collect())
                    })
                    .filter(|(_, hits): &(usize, Vec<usize>)| !hits.is_empty())
                    .collect();
                let hit = firsts.iter().enumerate().any(|(i, (mu, hb))| {
                    firsts[i + 1..].iter().any(|(omega, ht)| {
                        !self.adj(*mu, *omega)
                            && hb.iter().any(|&b| ht.iter().any(|&t| t != b))
                    })
                });
                if hit {
                    changed |= self.set(Rule::R10, alpha, gamma, Tail);
                }
            }
        }
        changed
    }
}

/// Orients the skeleton of `pag` from scratch using its separating sets.
///
/// Non-fixed marks are reset to circles, unshielded colliders are placed, and
/// the propagation rules 1-4 and 8-10 run to a fixpoint in a fixed order.
/// Returns the conflicts met along the way, one per homology class and mark.
pub fn orient(pag: &mut DynamicPag) -> Vec<MarkConflict> {
    pag.reset_marks();
    let mut o = Orienter { pag, conflicts: Vec::new(), seen_conflicts: BTreeSet::new() };
    o.r0();
    loop {
        let mut changed = o.r1();
        changed |= o.r2();
        changed |= o.r3();
        changed |= o.r4();
        changed |= o.r8();
        changed |= o.r9();
        changed |= o.r10();
        if !changed {
            break;
        }
    }
    o.conflicts
}
