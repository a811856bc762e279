//! The preference graph of a zero-sum game and its strongly connected
//! components.
//!
//! Nodes are the pure profiles in row-major order. There is an arc `p → q`
//! whenever `p` and `q` are comparable and `W_{p,q} ≤ 0`, i.e. the deviating
//! player weakly prefers `q`. Ties produce a pair of antiparallel 0-weight
//! arcs. Everything here is decided in exact rational arithmetic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{Game, Mode, Profile, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    /// `|W_{source,target}|`.
    pub weight: Rational,
}

#[derive(Clone, Debug)]
pub struct PreferenceGraph {
    mode: Mode,
    nodes: Vec<Profile>,
    labels: Vec<String>,
    arcs: Vec<Arc>,
    succ: Vec<Vec<usize>>,
}

impl PreferenceGraph {
    pub fn build(game: &Game) -> Self {
        let nodes = game.profiles();
        let labels = nodes.iter().map(|&p| game.profile_label(p)).collect();
        let mut arcs = Vec::new();
        for (i, &p) in nodes.iter().enumerate() {
            for (j, &q) in nodes.iter().enumerate().skip(i + 1) {
                let Ok(w) = game.weight(p, q) else { continue };
                let weight = w.abs();
                if !w.is_positive() {
                    arcs.push(Arc {
                        source: i,
                        target: j,
                        weight: weight.clone(),
                    });
                }
                if !w.is_negative() {
                    arcs.push(Arc {
                        source: j,
                        target: i,
                        weight,
                    });
                }
            }
        }
        arcs.sort_by_key(|a| (a.source, a.target));

        let mut succ = vec![Vec::new(); nodes.len()];
        for a in &arcs {
            succ[a.source].push(a.target);
        }
        Self {
            mode: game.mode(),
            nodes,
            labels,
            arcs,
            succ,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nodes(&self) -> &[Profile] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    pub fn has_arc(&self, source: usize, target: usize) -> bool {
        self.succ[source].contains(&target)
    }

    pub fn node_of(&self, p: Profile) -> Option<usize> {
        self.nodes.binary_search(&p).ok()
    }

    /// Pairs of nodes joined by antiparallel 0-weight arcs, each listed once.
    pub fn ties(&self) -> Vec<(usize, usize)> {
        self.arcs
            .iter()
            .filter(|a| a.source < a.target && a.weight.is_zero())
            .map(|a| (a.source, a.target))
            .collect()
    }

    pub fn scc(&self) -> SccPartition {
        SccPartition::compute(&self.succ)
    }

    /// The unique sink component as a sorted list of profiles.
    ///
    /// More than one sink means the input was not a zero-sum game (or the
    /// graph was built incorrectly) and is reported as a certification error.
    pub fn sink_component(&self) -> Result<Vec<Profile>> {
        let part = self.scc();
        match part.sinks() {
            [only] => Ok(part.members(*only).iter().map(|&v| self.nodes[v]).collect()),
            sinks => {
                let listing: Vec<String> = sinks
                    .iter()
                    .map(|&c| {
                        let names: Vec<&str> =
                            part.members(c).iter().map(|&v| self.label(v)).collect();
                        format!("{{{}}}", names.join(" "))
                    })
                    .collect();
                Err(Error::Certification(format!(
                    "expected exactly one sink component, found {}: {}",
                    sinks.len(),
                    listing.join(", ")
                )))
            }
        }
    }

    /// Whether the subgraph induced on `subset` is strongly connected.
    pub fn is_strongly_connected(&self, subset: &[Profile]) -> Result<bool> {
        if subset.is_empty() {
            return Err(Error::InvalidGame(
                "strong connectivity of an empty set".into(),
            ));
        }
        let mut inside = vec![false; self.nodes.len()];
        for &p in subset {
            let v = self
                .node_of(p)
                .ok_or_else(|| Error::Dimension(format!("{p:?} is not a node of this graph")))?;
            inside[v] = true;
        }
        let start = self.node_of(subset[0]).unwrap();
        let count = inside.iter().filter(|&&b| b).count();

        let mut pred = vec![Vec::new(); self.nodes.len()];
        for a in &self.arcs {
            pred[a.target].push(a.source);
        }
        let forward = reach(start, &self.succ, &inside);
        let backward = reach(start, &pred, &inside);
        Ok(forward == count && backward == count)
    }

    /// Graphviz rendering. Nodes in `highlight` are shaded; arcs carry
    /// their weights.
    pub fn to_dot(&self, highlight: &[Profile]) -> String {
        let shaded: BTreeSet<Profile> = highlight.iter().copied().collect();
        let mut out = String::from("digraph preference {\n");
        for (v, p) in self.nodes.iter().enumerate() {
            let label = escape(&self.labels[v]);
            if shaded.contains(p) {
                let _ = writeln!(out, "  \"{label}\" [style=filled, fillcolor=lightgray];");
            } else {
                let _ = writeln!(out, "  \"{label}\";");
            }
        }
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                escape(&self.labels[a.source]),
                escape(&self.labels[a.target]),
                a.weight
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn reach(start: usize, adj: &[Vec<usize>], inside: &[bool]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if inside[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}

/// Strongly connected components with their condensation DAG.
///
/// Components are numbered in increasing order of their smallest node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccPartition {
    component: Vec<usize>,
    members: Vec<Vec<usize>>,
    condensation: Vec<BTreeSet<usize>>,
    sinks: Vec<usize>,
}

impl SccPartition {
    pub fn compute(succ: &[Vec<usize>]) -> Self {
        let mut comps = tarjan(succ);
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort_unstable_by_key(|c| c[0]);

        let mut component = vec![0; succ.len()];
        for (id, c) in comps.iter().enumerate() {
            for &v in c {
                component[v] = id;
            }
        }
        let mut condensation = vec![BTreeSet::new(); comps.len()];
        for (v, targets) in succ.iter().enumerate() {
            for &w in targets {
                if component[v] != component[w] {
                    condensation[component[v]].insert(component[w]);
                }
            }
        }
        let sinks = (0..comps.len())
            .filter(|&c| condensation[c].is_empty())
            .collect();
        Self {
            component,
            members: comps,
            condensation,
            sinks,
        }
    }

    pub fn component_of(&self, node: usize) -> usize {
        self.component[node]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self, component: usize) -> &[usize] {
        &self.members[component]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// Outgoing condensation edges of a component.
    pub fn successors(&self, component: usize) -> &BTreeSet<usize> {
        &self.condensation[component]
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }
}

struct Tarjan<'a> {
    succ: &'a [Vec<usize>],
    next: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    out: Vec<Vec<usize>>,
}

fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut t = Tarjan {
        succ,
        next: 0,
        index: vec![None; n],
        low: vec![0; n],
        stack: Vec::new(),
        on_stack: vec![false; n],
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    t.out
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next);
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for &w in &self.succ[v] {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                Some(_) => {}
            }
        }

        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.out.push(comp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{matching_pennies, rock_paper_scissors};

    fn arc_set(pg: &PreferenceGraph) -> BTreeSet<(String, String)> {
        pg.arcs()
            .iter()
            .map(|a| {
                (
                    pg.label(a.source).to_string(),
                    pg.label(a.target).to_string(),
                )
            })
            .collect()
    }

    fn pairs(v: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        v.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn matching_pennies_is_a_four_cycle() {
        let pg = PreferenceGraph::build(&matching_pennies());
        assert_eq!(pg.node_count(), 4);
        assert_eq!(
            arc_set(&pg),
            pairs(&[
                ("H,H", "H,T"),
                ("H,T", "T,T"),
                ("T,T", "T,H"),
                ("T,H", "H,H")
            ])
        );
        assert!(pg
            .arcs()
            .iter()
            .all(|a| a.weight == Rational::from_integer(2.into())));
        let scc = pg.scc();
        assert_eq!(scc.len(), 1);
        assert_eq!(scc.sinks(), &[0]);
        assert_eq!(pg.sink_component().unwrap().len(), 4);
    }

    #[test]
    fn rps_is_a_three_cycle() {
        let pg = PreferenceGraph::build(&rock_paper_scissors());
        assert_eq!(arc_set(&pg), pairs(&[("R", "P"), ("P", "S"), ("S", "R")]));
        assert_eq!(pg.scc().len(), 1);
    }

    #[test]
    fn single_profile_game() {
        let g = Game::from_integers(Mode::NonSymmetric, &[vec![7]]).unwrap();
        let pg = PreferenceGraph::build(&g);
        assert_eq!(pg.node_count(), 1);
        assert!(pg.arcs().is_empty());
        assert_eq!(pg.sink_component().unwrap(), vec![Profile::Pair(0, 0)]);
    }

    #[test]
    fn ties_give_antiparallel_zero_arcs() {
        let g = Game::from_integers(Mode::NonSymmetric, &[vec![1, 1], vec![1, 0]]).unwrap();
        let pg = PreferenceGraph::build(&g);
        assert!(pg.has_arc(0, 1) && pg.has_arc(1, 0));
        assert!(pg.has_arc(0, 2) && pg.has_arc(2, 0));
        assert_eq!(pg.ties(), vec![(0, 1), (0, 2)]);
        // (1,1) pays 0: player 1 leaves it for (0,1); player 2 moves into it from (1,0).
        assert!(pg.has_arc(3, 1) && !pg.has_arc(1, 3));
        assert!(pg.has_arc(2, 3) && !pg.has_arc(3, 2));
        // 2 -> 3 -> 1 -> 0 -> 2 closes a cycle through every profile.
        assert_eq!(pg.sink_component().unwrap().len(), 4);
    }

    #[test]
    fn multiple_sinks_are_reported() {
        // Coordination-style relation (not producible by a zero-sum game):
        // build the partition directly.
        let succ = vec![vec![], vec![0, 2], vec![]];
        let part = SccPartition::compute(&succ);
        assert_eq!(part.sinks(), &[0, 2]);
        assert_eq!(
            part.successors(1).iter().copied().collect::<Vec<_>>(),
            vec![0, 2]
        );
    }

    #[test]
    fn scc_numbering_by_smallest_node() {
        let succ = vec![vec![1], vec![0], vec![3, 0], vec![2]];
        let part = SccPartition::compute(&succ);
        assert_eq!(part.components(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(part.sinks(), &[0]);
        assert_eq!(part.component_of(3), 1);
    }

    #[test]
    fn strong_connectivity_of_subsets() {
        let pg = PreferenceGraph::build(&matching_pennies());
        assert!(pg.is_strongly_connected(&[Profile::Pair(1, 1)]).unwrap());
        assert!(!pg
            .is_strongly_connected(&[Profile::Pair(0, 0), Profile::Pair(1, 1)])
            .unwrap());
        assert!(pg.is_strongly_connected(pg.nodes()).unwrap());
        assert!(pg.is_strongly_connected(&[]).is_err());
        assert!(pg.is_strongly_connected(&[Profile::Pair(5, 0)]).is_err());
    }

    #[test]
    fn dot_output() {
        let pg = PreferenceGraph::build(&matching_pennies());
        let dot = pg.to_dot(&[]);
        assert!(dot.starts_with("digraph preference {\n"));
        assert_eq!(dot.matches(" -> ").count(), 4);
        assert!(!dot.contains("filled"));
        assert!(dot.contains("\"H,H\" -> \"H,T\" [label=\"2\"];"));

        let sink = pg.sink_component().unwrap();
        let dot = pg.to_dot(&sink);
        assert_eq!(dot.matches("fillcolor=lightgray").count(), 4);

        let rps = PreferenceGraph::build(&rock_paper_scissors()).to_dot(&[]);
        assert_eq!(rps.lines().filter(|l| l.ends_with("\";")).count(), 3);
    }
}
