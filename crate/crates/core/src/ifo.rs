//! The information-flow condition and its completion.
//!
//! An edge satisfies the flow condition when every parallel path (same
//! endpoints, length at least two) composes to the same arrow and carries
//! a tag meet below the edge's tag: whoever can perform the shortcut could
//! already perform the long way around. [`check_ifo`] reports violations
//! of both kinds; [`complete_ifo`] grows tags to the least diagram above
//! the input that satisfies the condition, which exists exactly when the
//! diagram commutes.

use serde::Serialize;

use crate::diagram::{check_commutes, check_commutes_sequential, Diagram, EdgeRef};
use crate::error::{Error, Result};
use crate::lattice::{tag_join, tag_leq, Tag};

/// Which half of the flow condition an edge/path pair breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    /// The path composite differs from the edge arrow.
    Algebraic,
    /// The meet of path tags is not below the edge tag.
    Epistemic,
}

/// One edge/path pair breaking the flow condition.
#[derive(Debug, Clone, Serialize)]
pub struct IfoViolation {
    pub edge: EdgeRef,
    pub edge_arrow: crate::algebra::AlgebraArrow,
    pub edge_tag: Tag,
    pub kind: ViolationKind,
    pub path: Vec<EdgeRef>,
    pub path_arrow: crate::algebra::AlgebraArrow,
    pub path_tag: Tag,
}

/// Join of parallel-path meets for one edge.
#[derive(Debug, Clone, Serialize)]
pub struct ExplainedTag {
    pub edge: EdgeRef,
    pub tag: Tag,
}

/// Outcome of the flow check.
#[derive(Debug, Clone, Serialize)]
pub struct IfoReport {
    /// One entry per edge, in canonical edge order.
    pub explained: Vec<ExplainedTag>,
    pub ok: bool,
    pub violations: Vec<IfoViolation>,
}

/// Violations and explained tag for a single edge.
fn check_edge(d: &Diagram, idx: usize) -> Result<(Vec<IfoViolation>, ExplainedTag)> {
    let edge = d.edge(idx);
    let mut violations = Vec::new();
    let mut explained = Tag::empty(d.universe());
    for path in d.parallel_paths(idx)? {
        let (path_arrow, path_tag) = d.path_label(&path)?;
        if !d.theory().arrows_equal(&path_arrow, &edge.arrow)? {
            violations.push(IfoViolation {
                edge: d.edge_ref(idx),
                edge_arrow: edge.arrow.clone(),
                edge_tag: edge.tag.clone(),
                kind: ViolationKind::Algebraic,
                path: path.edge_refs(d),
                path_arrow: path_arrow.clone(),
                path_tag: path_tag.clone(),
            });
        }
        if !tag_leq(&path_tag, &edge.tag)? {
            violations.push(IfoViolation {
                edge: d.edge_ref(idx),
                edge_arrow: edge.arrow.clone(),
                edge_tag: edge.tag.clone(),
                kind: ViolationKind::Epistemic,
                path: path.edge_refs(d),
                path_arrow,
                path_tag: path_tag.clone(),
            });
        }
        explained = tag_join(&explained, &path_tag)?;
    }
    Ok((
        violations,
        ExplainedTag {
            edge: d.edge_ref(idx),
            tag: explained,
        },
    ))
}

fn assemble(per_edge: Vec<(Vec<IfoViolation>, ExplainedTag)>) -> IfoReport {
    let mut violations = Vec::new();
    let mut explained = Vec::with_capacity(per_edge.len());
    for (vs, ex) in per_edge {
        violations.extend(vs);
        explained.push(ex);
    }
    IfoReport {
        explained,
        ok: violations.is_empty(),
        violations,
    }
}

/// Checks the flow condition on every edge. Sequential reference
/// implementation.
pub fn check_ifo_sequential(d: &Diagram) -> Result<IfoReport> {
    let per_edge: Result<Vec<_>> = (0..d.edges().len()).map(|i| check_edge(d, i)).collect();
    Ok(assemble(per_edge?))
}

/// Checks the flow condition on every edge. Runs per-edge work in
/// parallel when the `parallel` feature is enabled; results are identical
/// to the sequential check.
#[cfg(feature = "parallel")]
pub fn check_ifo(d: &Diagram) -> Result<IfoReport> {
    use rayon::prelude::*;
    let per_edge: Result<Vec<_>> = (0..d.edges().len())
        .into_par_iter()
        .map(|i| check_edge(d, i))
        .collect();
    Ok(assemble(per_edge?))
}

/// Checks the flow condition on every edge.
#[cfg(not(feature = "parallel"))]
pub fn check_ifo(d: &Diagram) -> Result<IfoReport> {
    check_ifo_sequential(d)
}

/// Parallel-path edge lists for every edge, enumerated once.
fn parallel_path_table(d: &Diagram, parallel: bool) -> Result<Vec<Vec<Vec<usize>>>> {
    let collect_one = |i: usize| -> Result<Vec<Vec<usize>>> {
        Ok(d.parallel_paths(i)?
            .into_iter()
            .map(|p| p.edges().to_vec())
            .collect())
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..d.edges().len())
            .into_par_iter()
            .map(collect_one)
            .collect();
    }
    let _ = parallel;
    (0..d.edges().len()).map(collect_one).collect()
}

fn complete_with(d: &Diagram, parallel: bool) -> Result<Diagram> {
    let commute = if parallel {
        check_commutes(d)?
    } else {
        check_commutes_sequential(d)?
    };
    if let Some(v) = commute.violations.first() {
        return Err(Error::NoIfoAbove {
            src: v.src.clone(),
            dst: v.dst.clone(),
        });
    }
    let table = parallel_path_table(d, parallel)?;
    // Least fixpoint of tag(e) := tag(e) v V_p /\ tags(p), computed on raw
    // bitsets. Updates are applied in place within a pass; the operator is
    // monotone, so the fixpoint reached is the least one regardless of
    // update order.
    let mut bits: Vec<u64> = d.edges().iter().map(|e| e.tag.bits()).collect();
    loop {
        let mut changed = false;
        for (i, paths) in table.iter().enumerate() {
            let mut acc = bits[i];
            for path in paths {
                let meet = path.iter().fold(u64::MAX, |m, &e| m & bits[e]);
                acc |= meet;
            }
            if acc != bits[i] {
                bits[i] = acc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let tags: Vec<Tag> = bits
        .into_iter()
        .map(|b| Tag::from_bits(d.universe(), b))
        .collect();
    Ok(d.with_tags(tags))
}

/// Least diagram above the input satisfying the flow condition: tags grow
/// by the join of parallel-path meets until a fixpoint; arrows and graph
/// shape never change. Fails with [`Error::NoIfoAbove`] when the diagram
/// does not commute, because no amount of tag growth repairs unequal
/// arrows.
pub fn complete_ifo(d: &Diagram) -> Result<Diagram> {
    complete_with(d, cfg!(feature = "parallel"))
}

/// Sequential reference implementation of [`complete_ifo`].
pub fn complete_ifo_sequential(d: &Diagram) -> Result<Diagram> {
    complete_with(d, false)
}

/// Builds the strict precedence relation between edges and reports whether
/// it is acyclic.
///
/// Edge `f` strictly precedes edge `e` when `f` lies on a parallel path of
/// `e` whose tag meet is strictly below the tag of `e` and the label pair
/// of `f` differs from that of `e`: performing `e` then reveals something
/// to participants who could not complete the path on their own. In a
/// valid acyclic diagram the relation embeds into reachability, so this
/// check is expected to return true; it exists to certify that expectation
/// on arbitrary inputs.
pub fn strict_cycle_check(d: &Diagram) -> Result<bool> {
    let m = d.edges().len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (e, pred) in preds.iter_mut().enumerate() {
        let edge = d.edge(e);
        for path in d.parallel_paths(e)? {
            let (_, path_tag) = d.path_label(&path)?;
            let strict = tag_leq(&path_tag, &edge.tag)? && path_tag != edge.tag;
            if !strict {
                continue;
            }
            for &f in path.edges() {
                let other = d.edge(f);
                let same_label =
                    other.tag == edge.tag && d.theory().arrows_equal(&other.arrow, &edge.arrow)?;
                if !same_label && !pred.contains(&f) {
                    pred.push(f);
                }
            }
        }
    }
    // Depth-first search with three colors over the precedence digraph.
    let mut color = vec![0u8; m];
    for start in 0..m {
        if color[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < preds[u].len() {
                let v = preds[u][*next];
                *next += 1;
                match color[v] {
                    0 => {
                        color[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => return Ok(false),
                    _ => {}
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraArrow, AlgebraObject, AlgebraTheory, ModExpTheory};
    use crate::diagram::{diagram_leq, Edge, Node};
    use crate::lattice::ParticipantUniverse;
    use std::sync::Arc;

    fn universe() -> Arc<ParticipantUniverse> {
        ParticipantUniverse::new(vec!["A", "B", "E"]).unwrap()
    }

    fn theory(p: u64) -> AlgebraTheory {
        AlgebraTheory::ModExp(ModExpTheory::new(p).unwrap())
    }

    fn carrier(id: &str) -> Node {
        Node {
            id: id.into(),
            object: AlgebraObject::Carrier,
        }
    }

    fn pow_edge(
        u: &Arc<ParticipantUniverse>,
        src: &str,
        dst: &str,
        e: u64,
        names: &[&str],
    ) -> Edge {
        Edge {
            src: src.into(),
            dst: dst.into(),
            arrow: AlgebraArrow::Pow(e),
            tag: Tag::from_names(u, names).unwrap(),
        }
    }

    /// Triangle over Z_11 with a shortcut edge whose tag is adjustable.
    fn triangle(u: &Arc<ParticipantUniverse>, shortcut: &[&str]) -> Diagram {
        Diagram::build(
            Arc::clone(u),
            theory(11),
            vec![carrier("a"), carrier("b"), carrier("c")],
            vec![
                pow_edge(u, "a", "b", 2, &["A", "B"]),
                pow_edge(u, "a", "c", 6, shortcut),
                pow_edge(u, "b", "c", 3, &["A", "E"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn flow_check_accepts_dominating_tags() {
        let u = universe();
        let d = triangle(&u, &["A", "B", "E"]);
        let report = check_ifo(&d).unwrap();
        assert!(report.ok);
        assert!(report.violations.is_empty());
        // Explained tag of the shortcut is the path meet {A}.
        let shortcut = report
            .explained
            .iter()
            .find(|x| x.edge == EdgeRef::new("a", "c"))
            .unwrap();
        assert_eq!(shortcut.tag, Tag::from_names(&u, &["A"]).unwrap());
    }

    #[test]
    fn flow_check_flags_epistemic_violations() {
        let u = universe();
        let d = triangle(&u, &["B"]);
        let report = check_ifo(&d).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.kind, ViolationKind::Epistemic);
        assert_eq!(v.edge, EdgeRef::new("a", "c"));
        assert_eq!(v.path_tag, Tag::from_names(&u, &["A"]).unwrap());
    }

    #[test]
    fn flow_check_flags_algebraic_violations() {
        let u = universe();
        let d = Diagram::build(
            Arc::clone(&u),
            theory(11),
            vec![carrier("a"), carrier("b"), carrier("c")],
            vec![
                pow_edge(&u, "a", "b", 2, &[]),
                pow_edge(&u, "a", "c", 5, &[]),
                pow_edge(&u, "b", "c", 3, &[]),
            ],
        )
        .unwrap();
        let report = check_ifo(&d).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.kind, ViolationKind::Algebraic);
        assert_eq!(v.path_arrow, AlgebraArrow::Pow(6));
        assert_eq!(v.edge_arrow, AlgebraArrow::Pow(5));
    }

    #[test]
    fn one_pair_can_break_both_halves() {
        let u = universe();
        let d = Diagram::build(
            Arc::clone(&u),
            theory(11),
            vec![carrier("a"), carrier("b"), carrier("c")],
            vec![
                pow_edge(&u, "a", "b", 2, &["A"]),
                pow_edge(&u, "a", "c", 5, &["B"]),
                pow_edge(&u, "b", "c", 3, &["A"]),
            ],
        )
        .unwrap();
        let report = check_ifo(&d).unwrap();
        let kinds: Vec<ViolationKind> = report.violations.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![ViolationKind::Algebraic, ViolationKind::Epistemic]
        );
    }

    #[test]
    fn completion_grows_tags_to_the_least_fixpoint() {
        let u = universe();
        let d = triangle(&u, &[]);
        let completed = complete_ifo(&d).unwrap();
        assert!(check_ifo(&completed).unwrap().ok);
        // Shortcut gained exactly the path meet {A}.
        let i = completed.edge_between("a", "c").unwrap();
        assert_eq!(completed.edge(i).tag, Tag::from_names(&u, &["A"]).unwrap());
        // Other edges kept their tags.
        let i = completed.edge_between("a", "b").unwrap();
        assert_eq!(
            completed.edge(i).tag,
            Tag::from_names(&u, &["A", "B"]).unwrap()
        );
        // Completion is extensive and idempotent.
        assert!(diagram_leq(&d, &completed).unwrap());
        assert_eq!(complete_ifo(&completed).unwrap(), completed);
        assert_eq!(complete_ifo_sequential(&d).unwrap(), completed);
    }

    #[test]
    fn completion_propagates_through_chained_shortcuts() {
        // Two stacked triangles: the outer shortcut only gains its tag after
        // the inner one does, forcing a second fixpoint pass.
        let u = universe();
        let d = Diagram::build(
            Arc::clone(&u),
            theory(11),
            vec![carrier("a"), carrier("b"), carrier("c"), carrier("d")],
            vec![
                pow_edge(&u, "a", "b", 2, &["A", "B"]),
                pow_edge(&u, "a", "c", 6, &[]),
                pow_edge(&u, "a", "d", 4, &[]),
                pow_edge(&u, "b", "c", 3, &["A", "B"]),
                pow_edge(&u, "c", "d", 4, &["A"]),
            ],
        )
        .unwrap();
        let completed = complete_ifo(&d).unwrap();
        let ac = completed.edge(completed.edge_between("a", "c").unwrap());
        assert_eq!(ac.tag, Tag::from_names(&u, &["A", "B"]).unwrap());
        let ad = completed.edge(completed.edge_between("a", "d").unwrap());
        assert_eq!(ad.tag, Tag::from_names(&u, &["A"]).unwrap());
        assert!(check_ifo(&completed).unwrap().ok);
    }

    #[test]
    fn completion_refuses_non_commuting_diagrams() {
        let u = universe();
        let d = Diagram::build(
            Arc::clone(&u),
            theory(11),
            vec![carrier("a"), carrier("b"), carrier("c")],
            vec![
                pow_edge(&u, "a", "b", 2, &[]),
                pow_edge(&u, "a", "c", 5, &[]),
                pow_edge(&u, "b", "c", 3, &[]),
            ],
        )
        .unwrap();
        assert!(matches!(complete_ifo(&d), Err(Error::NoIfoAbove { .. })));
        assert!(matches!(
            complete_ifo_sequential(&d),
            Err(Error::NoIfoAbove { .. })
        ));
    }

    #[test]
    fn strict_precedence_is_acyclic_on_valid_diagrams() {
        let u = universe();
        assert!(strict_cycle_check(&triangle(&u, &["A", "B", "E"])).unwrap());
        assert!(strict_cycle_check(&triangle(&u, &[])).unwrap());
        let completed = complete_ifo(&triangle(&u, &[])).unwrap();
        assert!(strict_cycle_check(&completed).unwrap());
    }
}
