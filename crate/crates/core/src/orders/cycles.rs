//! Strongly connected components and elementary cycles.

use std::collections::BTreeMap;

use serde::Serialize;

use super::OrderError;
use crate::eord::Eord;

pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// Dense adjacency over node indices `0..n`, successors sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub adj: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            adj[a].push(b);
        }
        for s in &mut adj {
            s.sort_unstable();
            s.dedup();
        }
        Digraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Components in reverse topological order of the condensation; each
    /// component's members sorted.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        self.sccs_within(&vec![true; self.len()])
    }

    /// Tarjan's algorithm restricted to nodes with `keep[v]`.
    fn sccs_within(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut next = 0;
        for root in 0..n {
            if !keep[root] || index[root] != usize::MAX {
                continue;
            }
            // (node, next successor position)
            let mut work = vec![(root, 0usize)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = work.last_mut() {
                if let Some(&w) = self.adj[v].get(*pos) {
                    *pos += 1;
                    if !keep[w] {
                        continue;
                    }
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
        out
    }

    fn has_self_loop(&self, v: usize) -> bool {
        self.adj[v].binary_search(&v).is_ok()
    }

    /// Elementary cycles as node sequences (first node smallest, not repeated
    /// at the end), in discovery order of Johnson's algorithm.
    pub fn elementary_cycles(&self, cap: usize) -> Result<Vec<Vec<usize>>, usize> {
        let n = self.len();
        let mut cycles = Vec::new();
        for s in 0..n {
            let keep: Vec<bool> = (0..n).map(|v| v >= s).collect();
            let Some(comp) = self.sccs_within(&keep).into_iter().find(|c| c.contains(&s)) else {
                continue;
            };
            if comp.len() == 1 && !self.has_self_loop(s) {
                continue;
            }
            let mut in_comp = vec![false; n];
            for &v in &comp {
                in_comp[v] = true;
            }
            let mut search = Johnson {
                g: self,
                in_comp: &in_comp,
                blocked: vec![false; n],
                b: vec![Vec::new(); n],
                path: Vec::new(),
                start: s,
                cycles: &mut cycles,
                cap,
            };
            search.circuit(s)?;
        }
        Ok(cycles)
    }
}

struct Johnson<'a> {
    g: &'a Digraph,
    in_comp: &'a [bool],
    blocked: Vec<bool>,
    b: Vec<Vec<usize>>,
    path: Vec<usize>,
    start: usize,
    cycles: &'a mut Vec<Vec<usize>>,
    cap: usize,
}

impl Johnson<'_> {
    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            work.extend(std::mem::take(&mut self.b[u]));
        }
    }

    fn circuit(&mut self, v: usize) -> Result<bool, usize> {
        let mut found = false;
        self.path.push(v);
        self.blocked[v] = true;
        for &w in &self.g.adj[v] {
            if !self.in_comp[w] {
                continue;
            }
            if w == self.start {
                if self.cycles.len() >= self.cap {
                    return Err(self.cap);
                }
                self.cycles.push(self.path.clone());
                found = true;
            } else if !self.blocked[w] && self.circuit(w)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &self.g.adj[v] {
                if self.in_comp[w] && !self.b[w].contains(&v) {
                    self.b[w].push(v);
                }
            }
        }
        self.path.pop();
        Ok(found)
    }
}

/// Strongly connected component of an [`Eord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scc {
    /// Sorted class names.
    pub classes: Vec<String>,
    /// Size at least two, or a self-loop.
    pub nontrivial: bool,
}

/// Components sorted by their smallest class name.
pub fn tarjan_scc(eord: &Eord) -> Vec<Scc> {
    let (_, adj) = eord.adjacency();
    let g = Digraph::new(
        adj.len(),
        adj.iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (a, b))),
    );
    let mut out: Vec<Scc> = g
        .sccs()
        .into_iter()
        .map(|c| Scc {
            nontrivial: c.len() > 1 || g.has_self_loop(c[0]),
            classes: c.into_iter().map(|i| eord.nodes[i].clone()).collect(),
        })
        .collect();
    out.sort_by(|a, b| a.classes.cmp(&b.classes));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSet {
    /// Each cycle lists its classes once, starting from the smallest.
    pub cycles: Vec<Vec<String>>,
    /// Number of cycles through each edge.
    pub edge_counts: BTreeMap<(String, String), usize>,
}

impl CycleSet {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn count(&self, from: &str, to: &str) -> usize {
        self.edge_counts
            .get(&(from.to_string(), to.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// All elementary cycles among `classes` (normally one nontrivial SCC).
pub fn enumerate_cycles(
    eord: &Eord,
    classes: &[String],
    cap: usize,
) -> Result<CycleSet, OrderError> {
    let mut names: Vec<&str> = classes.iter().map(String::as_str).collect();
    names.sort_unstable();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let edges = eord
        .edges
        .iter()
        .filter_map(|e| Some((*index.get(e.from.as_str())?, *index.get(e.to.as_str())?)));
    let g = Digraph::new(names.len(), edges);
    let raw = g
        .elementary_cycles(cap)
        .map_err(|cap| OrderError::CycleCap { cap })?;
    Ok(cycle_set(&raw, &names))
}

pub(crate) fn cycle_set(raw: &[Vec<usize>], names: &[&str]) -> CycleSet {
    let mut edge_counts = BTreeMap::new();
    let mut cycles: Vec<Vec<String>> = Vec::with_capacity(raw.len());
    for c in raw {
        for (k, &a) in c.iter().enumerate() {
            let b = c[(k + 1) % c.len()];
            *edge_counts
                .entry((names[a].to_string(), names[b].to_string()))
                .or_insert(0) += 1;
        }
        cycles.push(c.iter().map(|&i| names[i].to_string()).collect());
    }
    cycles.sort();
    CycleSet {
        cycles,
        edge_counts,
    }
}
