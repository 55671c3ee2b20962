//! Labelled acyclic diagrams.
//!
//! A [`Diagram`] is a finite digraph whose nodes carry algebra objects and
//! whose edges carry a pair of labels: an arrow from the diagram's theory
//! and a participant tag. The graph is acyclic, has no self loops, and has
//! at most one edge per ordered node pair. Nodes are kept sorted by id and
//! edges by `(src, dst)`, so every traversal and report is deterministic.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{AlgebraArrow, AlgebraObject, AlgebraTheory};
use crate::error::{Error, Result};
use crate::lattice::{same_universe, ParticipantUniverse, Tag};

/// Default ceiling on enumerated paths between one node pair.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// A named vertex carrying an algebra object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub object: AlgebraObject,
}

/// A labelled edge between two node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub arrow: AlgebraArrow,
    pub tag: Tag,
}

/// A lightweight reference to an edge by endpoint ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EdgeRef {
    pub dst: String,
    pub src: String,
}

impl EdgeRef {
    pub fn new(src: impl Into<String>, dst: impl Into<String>) -> EdgeRef {
        EdgeRef {
            dst: dst.into(),
            src: src.into(),
        }
    }
}

impl std::fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

/// A directed path, stored as edge indices into a diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRef {
    edges: Vec<usize>,
}

impl PathRef {
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Endpoint references of each edge along the path.
    pub fn edge_refs(&self, d: &Diagram) -> Vec<EdgeRef> {
        self.edges
            .iter()
            .map(|&i| {
                let e = &d.edges[i];
                EdgeRef::new(e.src.clone(), e.dst.clone())
            })
            .collect()
    }

    /// Node ids visited, in order.
    pub fn node_ids<'d>(&self, d: &'d Diagram) -> Vec<&'d str> {
        let mut ids = Vec::with_capacity(self.edges.len() + 1);
        if let Some(&first) = self.edges.first() {
            ids.push(d.edges[first].src.as_str());
        }
        for &i in &self.edges {
            ids.push(d.edges[i].dst.as_str());
        }
        ids
    }

    /// Human readable form `a -> b -> c`.
    pub fn render(&self, d: &Diagram) -> String {
        self.node_ids(d).join(" -> ")
    }
}

/// An acyclic diagram over one universe and one theory.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    universe: Arc<ParticipantUniverse>,
    theory: AlgebraTheory,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: BTreeMap<String, usize>,
    /// Outgoing edge indices per node, sorted by destination id.
    out: Vec<Vec<usize>>,
    /// Incoming edge indices per node.
    inc: Vec<Vec<usize>>,
}

impl Diagram {
    /// Validates and indexes a diagram.
    ///
    /// Checks performed: distinct node ids, node objects admitted by the
    /// theory, known endpoints, no self loops, at most one edge per ordered
    /// pair, arrows normalized and typed against their endpoints, tags from
    /// the diagram's universe, and acyclicity of the underlying digraph.
    pub fn build(
        universe: Arc<ParticipantUniverse>,
        theory: AlgebraTheory,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
    ) -> Result<Diagram> {
        let mut nodes = nodes;
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut node_index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.id.is_empty() {
                return Err(Error::bad_params("node ids must be non-empty"));
            }
            if node_index.insert(node.id.clone(), i).is_some() {
                return Err(Error::DuplicateNodeId {
                    id: node.id.clone(),
                });
            }
            if !theory.valid_object(node.object) {
                return Err(Error::TypeMismatch {
                    src: node.id.clone(),
                    dst: node.id.clone(),
                    reason: format!("object {} does not belong to this theory", node.object),
                });
            }
        }

        let mut edges = edges;
        edges.sort_by(|a, b| (&a.src, &a.dst).cmp(&(&b.src, &b.dst)));
        let mut seen: Option<(&str, &str)> = None;
        let mut normalized = Vec::with_capacity(edges.len());
        for edge in &edges {
            let si = *node_index
                .get(&edge.src)
                .ok_or_else(|| Error::UnknownNode {
                    id: edge.src.clone(),
                })?;
            let di = *node_index
                .get(&edge.dst)
                .ok_or_else(|| Error::UnknownNode {
                    id: edge.dst.clone(),
                })?;
            if si == di {
                return Err(Error::SelfLoop {
                    id: edge.src.clone(),
                });
            }
            if seen == Some((edge.src.as_str(), edge.dst.as_str())) {
                return Err(Error::ParallelEdge {
                    src: edge.src.clone(),
                    dst: edge.dst.clone(),
                });
            }
            seen = Some((edge.src.as_str(), edge.dst.as_str()));
            let arrow = theory.normalize(&edge.arrow)?;
            let (src_obj, dst_obj) = theory.objects_of(&arrow)?;
            if nodes[si].object != src_obj || nodes[di].object != dst_obj {
                return Err(Error::TypeMismatch {
                    src: edge.src.clone(),
                    dst: edge.dst.clone(),
                    reason: format!(
                        "arrow {} runs {} -> {} but endpoints are {} -> {}",
                        arrow, src_obj, dst_obj, nodes[si].object, nodes[di].object
                    ),
                });
            }
            same_universe(edge.tag.universe(), &universe)?;
            normalized.push(Edge {
                src: edge.src.clone(),
                dst: edge.dst.clone(),
                arrow,
                // Re-bind the tag to the diagram's shared universe handle.
                tag: Tag::from_bits(&universe, edge.tag.bits()),
            });
        }
        let edges = normalized;

        let mut out = vec![Vec::new(); nodes.len()];
        let mut inc = vec![Vec::new(); nodes.len()];
        for (i, edge) in edges.iter().enumerate() {
            out[node_index[&edge.src]].push(i);
            inc[node_index[&edge.dst]].push(i);
        }

        let d = Diagram {
            universe,
            theory,
            nodes,
            edges,
            node_index,
            out,
            inc,
        };
        if let Some(cycle) = d.find_cycle() {
            return Err(Error::CycleDetected { cycle });
        }
        Ok(d)
    }

    /// Replaces edge tags, keeping everything else; tags must already
    /// belong to the diagram's universe.
    pub(crate) fn with_tags(&self, tags: Vec<Tag>) -> Diagram {
        debug_assert_eq!(tags.len(), self.edges.len());
        let mut d = self.clone();
        for (edge, tag) in d.edges.iter_mut().zip(tags) {
            debug_assert!(same_universe(tag.universe(), &self.universe).is_ok());
            edge.tag = Tag::from_bits(&self.universe, tag.bits());
        }
        d
    }

    pub fn universe(&self) -> &Arc<ParticipantUniverse> {
        &self.universe
    }

    pub fn theory(&self) -> &AlgebraTheory {
        &self.theory
    }

    /// Nodes sorted by id.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Edges sorted by `(src, dst)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub(crate) fn node_pos(&self, id: &str) -> Result<usize> {
        self.node_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode { id: id.into() })
    }

    /// Index of the edge between two ids, if present.
    pub fn edge_between(&self, src: &str, dst: &str) -> Option<usize> {
        self.edges
            .binary_search_by(|e| (e.src.as_str(), e.dst.as_str()).cmp(&(src, dst)))
            .ok()
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn edge_ref(&self, idx: usize) -> EdgeRef {
        EdgeRef::new(self.edges[idx].src.clone(), self.edges[idx].dst.clone())
    }

    /// Kahn's algorithm; on failure returns a witness cycle as node ids.
    fn find_cycle(&self) -> Option<Vec<String>> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = vec![0; n];
        for e in &self.edges {
            indeg[self.node_index[&e.dst]] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut removed = 0;
        while let Some(u) = queue.pop() {
            removed += 1;
            for &eidx in &self.out[u] {
                let v = self.node_index[&self.edges[eidx].dst];
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if removed == n {
            return None;
        }
        // Walk inside the leftover subgraph until a node repeats.
        let leftover: Vec<bool> = indeg.iter().map(|&d| d > 0).collect();
        let start = (0..n).find(|&i| leftover[i])?;
        let mut seen_at: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order: Vec<usize> = Vec::new();
        let mut u = start;
        loop {
            if let Some(&pos) = seen_at.get(&u) {
                let mut cycle: Vec<String> = order[pos..]
                    .iter()
                    .map(|&i| self.nodes[i].id.clone())
                    .collect();
                cycle.push(self.nodes[u].id.clone());
                return Some(cycle);
            }
            seen_at.insert(u, order.len());
            order.push(u);
            u = self.out[u]
                .iter()
                .map(|&e| self.node_index[&self.edges[e].dst])
                .find(|&v| leftover[v])
                .expect("leftover nodes of a Kahn residue keep an out-edge into the residue");
        }
    }

    /// All directed paths from `src` to `dst`, in lexicographic order by
    /// destination ids, under the default cap.
    pub fn all_paths(&self, src: &str, dst: &str) -> Result<Vec<PathRef>> {
        self.all_paths_capped(src, dst, DEFAULT_PATH_CAP)
    }

    /// All directed paths from `src` to `dst` with an explicit cap.
    pub fn all_paths_capped(&self, src: &str, dst: &str, cap: usize) -> Result<Vec<PathRef>> {
        let s = self.node_pos(src)?;
        let t = self.node_pos(dst)?;
        self.collect_paths(s, t, cap)
    }

    fn collect_paths(&self, s: usize, t: usize, cap: usize) -> Result<Vec<PathRef>> {
        let n = self.nodes.len();
        // Prune the search to nodes that can still reach the target.
        let mut reaches = vec![false; n];
        reaches[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            for &eidx in &self.inc[v] {
                let u = self.node_index[&self.edges[eidx].src];
                if !reaches[u] {
                    reaches[u] = true;
                    stack.push(u);
                }
            }
        }
        let mut paths = Vec::new();
        if !reaches[s] || s == t {
            return Ok(paths);
        }
        let mut current = Vec::new();
        self.dfs_paths(s, t, cap, &reaches, &mut current, &mut paths)?;
        Ok(paths)
    }

    fn dfs_paths(
        &self,
        u: usize,
        t: usize,
        cap: usize,
        reaches: &[bool],
        current: &mut Vec<usize>,
        paths: &mut Vec<PathRef>,
    ) -> Result<()> {
        if u == t {
            if paths.len() >= cap {
                let src = current
                    .first()
                    .map(|&e| self.edges[e].src.clone())
                    .unwrap_or_default();
                return Err(Error::PathExplosion {
                    src,
                    dst: self.nodes[t].id.clone(),
                    cap,
                });
            }
            paths.push(PathRef {
                edges: current.clone(),
            });
            return Ok(());
        }
        for &eidx in &self.out[u] {
            let v = self.node_index[&self.edges[eidx].dst];
            if reaches[v] {
                current.push(eidx);
                self.dfs_paths(v, t, cap, reaches, current, paths)?;
                current.pop();
            }
        }
        Ok(())
    }

    /// Paths parallel to an edge: same endpoints, length at least two.
    pub fn parallel_paths(&self, edge_idx: usize) -> Result<Vec<PathRef>> {
        let e = &self.edges[edge_idx];
        let mut paths = self.all_paths(&e.src, &e.dst)?;
        paths.retain(|p| p.edges.len() >= 2);
        Ok(paths)
    }

    /// Composite arrow and meet of tags along a non-empty path.
    pub fn path_label(&self, path: &PathRef) -> Result<(AlgebraArrow, Tag)> {
        let first = *path.edges.first().ok_or_else(|| Error::Composition {
            reason: "empty path has no label".into(),
        })?;
        let mut arrow = self.edges[first].arrow.clone();
        let mut tag = self.edges[first].tag.clone();
        for &i in &path.edges[1..] {
            arrow = self.theory.compose(&arrow, &self.edges[i].arrow)?;
            tag = crate::lattice::tag_meet(&tag, &self.edges[i].tag)?;
        }
        Ok((arrow, tag))
    }

    /// Composite arrow along a non-empty path, without the tag meet.
    pub fn path_arrow(&self, path: &PathRef) -> Result<AlgebraArrow> {
        Ok(self.path_label(path)?.0)
    }
}

/// Two paths with the same endpoints whose composites differ.
#[derive(Debug, Clone, Serialize)]
pub struct CommuteViolation {
    pub dst: String,
    pub left: Vec<EdgeRef>,
    pub left_arrow: AlgebraArrow,
    pub right: Vec<EdgeRef>,
    pub right_arrow: AlgebraArrow,
    pub src: String,
}

/// Outcome of the commutation check.
#[derive(Debug, Clone, Serialize)]
pub struct CommuteReport {
    pub ok: bool,
    pub violations: Vec<CommuteViolation>,
}

/// Violations discovered from one source node, in destination order.
fn commute_violations_from(d: &Diagram, s: usize) -> Result<Vec<CommuteViolation>> {
    let mut out = Vec::new();
    let src_id = d.nodes[s].id.clone();
    for t in 0..d.nodes.len() {
        if t == s {
            continue;
        }
        let paths = d.collect_paths(s, t, DEFAULT_PATH_CAP)?;
        if paths.len() < 2 {
            continue;
        }
        // Group paths into arrow-equivalence classes; each class beyond the
        // first yields one violation against the first class's witness.
        let mut classes: Vec<(AlgebraArrow, usize)> = Vec::new();
        for (pi, p) in paths.iter().enumerate() {
            let arrow = d.path_arrow(p)?;
            let mut found = false;
            for (repr, _) in &classes {
                if d.theory.arrows_equal(repr, &arrow)? {
                    found = true;
                    break;
                }
            }
            if !found {
                if let Some((first_arrow, first_pi)) = classes.first() {
                    out.push(CommuteViolation {
                        dst: d.nodes[t].id.clone(),
                        left: paths[*first_pi].edge_refs(d),
                        left_arrow: first_arrow.clone(),
                        right: p.edge_refs(d),
                        right_arrow: arrow.clone(),
                        src: src_id.clone(),
                    });
                }
                classes.push((arrow, pi));
            }
        }
    }
    Ok(out)
}

/// Checks that any two paths with the same endpoints compose to equal
/// arrows. Sequential reference implementation.
pub fn check_commutes_sequential(d: &Diagram) -> Result<CommuteReport> {
    let mut violations = Vec::new();
    for s in 0..d.nodes.len() {
        violations.extend(commute_violations_from(d, s)?);
    }
    Ok(CommuteReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Checks that any two paths with the same endpoints compose to equal
/// arrows. Runs per-source work in parallel when the `parallel` feature
/// is enabled; results are identical to the sequential check.
#[cfg(feature = "parallel")]
pub fn check_commutes(d: &Diagram) -> Result<CommuteReport> {
    use rayon::prelude::*;
    let per_source: Result<Vec<Vec<CommuteViolation>>> = (0..d.nodes.len())
        .into_par_iter()
        .map(|s| commute_violations_from(d, s))
        .collect();
    let violations: Vec<CommuteViolation> = per_source?.into_iter().flatten().collect();
    Ok(CommuteReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Checks that any two paths with the same endpoints compose to equal
/// arrows.
#[cfg(not(feature = "parallel"))]
pub fn check_commutes(d: &Diagram) -> Result<CommuteReport> {
    check_commutes_sequential(d)
}

/// The refinement order on diagrams sharing a universe and theory:
/// `a <= b` when `b` contains every node of `a` with the same object and,
/// for each edge of `a`, an edge with the same endpoints, an equal arrow,
/// and a tag at least as large.
pub fn diagram_leq(a: &Diagram, b: &Diagram) -> Result<bool> {
    same_universe(&a.universe, &b.universe)?;
    if a.theory != b.theory {
        return Err(Error::StructuralMismatch {
            details: vec!["diagrams use different theories".into()],
        });
    }
    for node in &a.nodes {
        match b.node(&node.id) {
            Some(n) if n.object == node.object => {}
            _ => return Ok(false),
        }
    }
    for edge in &a.edges {
        let Some(bi) = b.edge_between(&edge.src, &edge.dst) else {
            return Ok(false);
        };
        let other = b.edge(bi);
        if !a.theory.arrows_equal(&edge.arrow, &other.arrow)? {
            return Ok(false);
        }
        if !crate::lattice::tag_leq(&edge.tag, &other.tag)? {
            return Ok(false);
        }
    }
    Ok(true)
}
