use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::HierarchyError;
use crate::corpus::SeedTaxonomy;

pub const MAX_LEVEL: u8 = 5;
/// Level of a non-seed concept without parents.
pub const ORPHAN_LEVEL: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyEdge {
    pub child: String,
    pub parent: String,
    pub rc: f64,
    /// Taken from the curated L0/L1 list rather than computed.
    pub curated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LeveledDag {
    pub nodes: BTreeSet<String>,
    /// Sorted by `(child, parent)`.
    pub edges: Vec<HierarchyEdge>,
    pub levels: BTreeMap<String, u8>,
}

impl LeveledDag {
    pub fn parents_of<'a>(&'a self, child: &'a str) -> impl Iterator<Item = &'a HierarchyEdge> + 'a {
        let start = self.edges.partition_point(|e| e.child.as_str() < child);
        self.edges[start..].iter().take_while(move |e| e.child == child)
    }

    pub fn has_edge(&self, child: &str, parent: &str) -> bool {
        self.parents_of(child).any(|e| e.parent == parent)
    }
}

/// Result of a topological pass over a DAG.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DagDiagnostics {
    pub acyclic: bool,
    /// One offending cycle, first node repeated at the end.
    pub cycle: Option<Vec<String>>,
    /// Parents before children.
    pub topological_order: Vec<String>,
    /// Parentless nodes other than level-0 ones.
    pub orphan_count: usize,
    /// Node count of the longest child-to-root path.
    pub max_depth: usize,
    /// That path, from the deepest child up to its root.
    pub longest_path: Vec<String>,
    /// Node counts for levels 0..=5.
    pub level_histogram: [usize; 6],
}

struct Graph<'a> {
    names: Vec<&'a str>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl<'a> Graph<'a> {
    fn new(nodes: &'a BTreeSet<String>, edges: &'a [HierarchyEdge]) -> Self {
        let mut all: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
        for e in edges {
            all.insert(&e.child);
            all.insert(&e.parent);
        }
        let names: Vec<&str> = all.into_iter().collect();
        let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut parents = vec![Vec::new(); names.len()];
        let mut children = vec![Vec::new(); names.len()];
        for e in edges {
            let (c, p) = (pos[e.child.as_str()], pos[e.parent.as_str()]);
            parents[c].push(p);
            children[p].push(c);
        }
        Graph {
            names,
            parents,
            children,
        }
    }

    /// Kahn's algorithm, roots first, ties in name order. Returns the order
    /// and, when it is incomplete, a cycle among the remaining nodes.
    fn topological(&self) -> (Vec<usize>, Option<Vec<usize>>) {
        let n = self.names.len();
        let mut pending: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop_first() {
            order.push(next);
            for &c in &self.children[next] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            return (order, None);
        }
        // Every leftover node keeps a leftover parent; walking parents must
        // revisit a node.
        let start = (0..n).find(|&i| pending[i] > 0).expect("leftover node");
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut walk = vec![start];
        let mut at = start;
        loop {
            seen.insert(at, walk.len() - 1);
            at = *self.parents[at]
                .iter()
                .filter(|&&p| pending[p] > 0)
                .min()
                .expect("leftover node has a leftover parent");
            if let Some(&first) = seen.get(&at) {
                let mut cycle: Vec<usize> = walk[first..].to_vec();
                cycle.reverse();
                cycle.push(cycle[0]);
                return (order, Some(cycle));
            }
            walk.push(at);
        }
    }
}

/// Levels: L0 seeds 0, L1 seeds 1, other concepts one below their deepest
/// parent (capped at 5), parentless concepts 2.
pub fn assign_levels(
    nodes: &BTreeSet<String>,
    edges: &[HierarchyEdge],
    seeds: &SeedTaxonomy,
) -> Result<BTreeMap<String, u8>, HierarchyError> {
    let graph = Graph::new(nodes, edges);
    let (order, cycle) = graph.topological();
    if let Some(cycle) = cycle {
        return Err(HierarchyError::Cycle(
            cycle.into_iter().map(|i| graph.names[i].to_owned()).collect(),
        ));
    }
    let mut level = vec![0u8; graph.names.len()];
    for i in order {
        let name = graph.names[i];
        level[i] = if seeds.is_l0(name) {
            0
        } else if seeds.is_l1(name) {
            1
        } else if graph.parents[i].is_empty() {
            ORPHAN_LEVEL
        } else {
            let deepest = graph.parents[i].iter().map(|&p| level[p]).max().unwrap_or(0);
            (deepest + 1).min(MAX_LEVEL)
        };
    }
    Ok(graph
        .names
        .iter()
        .zip(level)
        .map(|(n, l)| ((*n).to_owned(), l))
        .collect())
}

pub fn check_dag(dag: &LeveledDag) -> DagDiagnostics {
    let graph = Graph::new(&dag.nodes, &dag.edges);
    let (order, cycle) = graph.topological();
    let mut diagnostics = DagDiagnostics {
        acyclic: cycle.is_none(),
        cycle: cycle.map(|c| c.into_iter().map(|i| graph.names[i].to_owned()).collect()),
        topological_order: order.iter().map(|&i| graph.names[i].to_owned()).collect(),
        ..Default::default()
    };
    for l in dag.levels.values() {
        diagnostics.level_histogram[usize::from((*l).min(MAX_LEVEL))] += 1;
    }
    diagnostics.orphan_count = (0..graph.names.len())
        .filter(|&i| graph.parents[i].is_empty() && dag.levels.get(graph.names[i]) != Some(&0))
        .count();
    if diagnostics.acyclic {
        // depth[i] = nodes on the longest path from i up to a root.
        let mut depth = vec![1usize; graph.names.len()];
        let mut via: Vec<Option<usize>> = vec![None; graph.names.len()];
        for &i in &order {
            for &p in &graph.parents[i] {
                if depth[p] + 1 > depth[i] {
                    depth[i] = depth[p] + 1;
                    via[i] = Some(p);
                }
            }
        }
        if let Some(deepest) = (0..graph.names.len()).max_by_key(|&i| (depth[i], std::cmp::Reverse(i))) {
            diagnostics.max_depth = depth[deepest];
            let mut at = Some(deepest);
            while let Some(i) = at {
                diagnostics.longest_path.push(graph.names[i].to_owned());
                at = via[i];
            }
        }
    }
    diagnostics
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(child: &str, parent: &str) -> HierarchyEdge {
        HierarchyEdge { child: child.into(), parent: parent.into(), rc: 0.5, curated: false }
    }

    fn dag(edges: &[(&str, &str)]) -> LeveledDag {
        let mut edges: Vec<HierarchyEdge> = edges.iter().map(|(c, p)| edge(c, p)).collect();
        edges.sort_by(|a, b| (&a.child, &a.parent).cmp(&(&b.child, &b.parent)));
        LeveledDag { nodes: BTreeSet::new(), edges, levels: BTreeMap::new() }
    }

    fn seeds(l0: &[&str], l1: &[&str]) -> SeedTaxonomy {
        SeedTaxonomy {
            l0: l0.iter().map(|s| s.to_string()).collect(),
            l1: l1.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn empty_dag_is_acyclic() {
        let d = check_dag(&LeveledDag::default());
        assert!(d.acyclic);
        assert_eq!(d.max_depth, 0);
    }

    #[test]
    fn three_cycle_is_reported() {
        let d = check_dag(&dag(&[("a", "b"), ("b", "c"), ("c", "a"), ("x", "a")]));
        assert!(!d.acyclic);
        let cycle = d.cycle.unwrap();
        assert_eq!(cycle.len(), 4);
        assert_eq!(cycle.first(), cycle.last());
        let members: BTreeSet<&str> = cycle.iter().map(String::as_str).collect();
        assert_eq!(members, ["a", "b", "c"].into());
        let err = assign_levels(&BTreeSet::new(), &dag(&[("a", "b"), ("b", "a")]).edges, &seeds(&[], &[]));
        assert!(matches!(err, Err(HierarchyError::Cycle(_))));
    }

    #[test]
    fn sample_chain_has_depth_four() {
        let d = dag(&[
            ("deep learning", "artificial neural network"),
            ("artificial neural network", "machine learning"),
            ("machine learning", "computer science"),
        ]);
        let diag = check_dag(&d);
        assert!(diag.acyclic);
        assert_eq!(diag.max_depth, 4);
        assert_eq!(
            diag.longest_path,
            ["deep learning", "artificial neural network", "machine learning", "computer science"]
        );
    }

    #[test]
    fn chain_levels_are_capped() {
        let d = dag(&[("a", "root"), ("b", "a"), ("c", "b"), ("d", "c"), ("e", "d"), ("f", "e")]);
        let levels = assign_levels(&BTreeSet::new(), &d.edges, &seeds(&["root"], &[])).unwrap();
        let got: Vec<u8> = ["root", "a", "b", "c", "d", "e", "f"].iter().map(|n| levels[*n]).collect();
        assert_eq!(got, [0, 1, 2, 3, 4, 5, 5]);
    }

    #[test]
    fn orphans_and_max_rule() {
        let d = dag(&[("l1", "root"), ("m", "l1"), ("n", "m"), ("x", "l1"), ("x", "n")]);
        let nodes: BTreeSet<String> = ["lonely".to_string()].into();
        let levels = assign_levels(&nodes, &d.edges, &seeds(&["root"], &["l1"])).unwrap();
        assert_eq!(levels["lonely"], ORPHAN_LEVEL);
        assert_eq!(levels["n"], 3);
        assert_eq!(levels["x"], 4);
        let leveled = LeveledDag { nodes, levels, ..d };
        let diag = check_dag(&leveled);
        assert_eq!(diag.orphan_count, 1);
        assert_eq!(diag.level_histogram, [1, 1, 2, 1, 1, 0]);
    }

    #[test]
    fn parents_lookup() {
        let d = dag(&[("a", "p"), ("a", "q"), ("b", "p")]);
        let parents: Vec<&str> = d.parents_of("a").map(|e| e.parent.as_str()).collect();
        assert_eq!(parents, ["p", "q"]);
        assert!(d.has_edge("b", "p"));
        assert!(!d.has_edge("p", "b"));
    }
}
