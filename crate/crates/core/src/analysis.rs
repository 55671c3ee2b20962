//! Protocol analysis on top of the flow condition.
//!
//! Edges of a diagram that satisfies the flow condition fall into three
//! event classes. A *primitive* edge has no parallel path. A *computation*
//! is fully explained: the join of its parallel-path meets equals its tag,
//! so everyone tagged can reach the value through some path. An
//! *announcement* carries participants no path explains; they must have
//! been told. This module classifies events, restricts diagrams to a
//! participant's view, propagates leaked capabilities, expands an edge
//! into its triangulation scenarios, and enumerates the temporal
//! orderings of selection events.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::AlgebraObject;
use crate::diagram::{Diagram, Edge, EdgeRef};
use crate::error::{Error, Result};
use crate::ifo::{check_ifo, complete_ifo};
use crate::lattice::{same_universe, tag_join, tag_leq, tag_meet, tag_minus, Tag};

/// Ceiling on enumerated triangulations of one polygon.
pub const SCENARIO_BOUND: u64 = 1_000_000;

/// Ceiling on the number of orderings counted before giving up.
pub const ORDERING_BOUND: u64 = 10_000_000;

/// Ceiling on distinct prefix states visited while counting orderings.
const ORDERING_STATE_BOUND: usize = 4_000_000;

/// How an edge relates to its parallel paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventClass {
    Primitive,
    Computation,
    Announcement,
}

/// One parallel path whose tag meet is non-empty: participants in the
/// meet can reach the edge's value this way.
#[derive(Debug, Clone, Serialize)]
pub struct EventRoute {
    pub meet: Tag,
    pub path: Vec<EdgeRef>,
}

/// Classification of one edge.
#[derive(Debug, Clone, Serialize)]
pub struct EventEntry {
    pub class: EventClass,
    pub edge: EdgeRef,
    /// Join of parallel-path meets.
    pub explained: Tag,
    /// Tag members no route explains; empty unless announcing.
    pub newly_informed: Tag,
    pub routes: Vec<EventRoute>,
}

/// Event classification of every edge, in canonical edge order.
#[derive(Debug, Clone, Serialize)]
pub struct EventReport {
    pub events: Vec<EventEntry>,
}

/// Classifies every edge of a diagram satisfying the flow condition.
pub fn classify_events(d: &Diagram) -> Result<EventReport> {
    if !check_ifo(d)?.ok {
        return Err(Error::NotIfo);
    }
    let mut events = Vec::with_capacity(d.edges().len());
    for (i, edge) in d.edges().iter().enumerate() {
        let paths = d.parallel_paths(i)?;
        let mut explained = Tag::empty(d.universe());
        let mut routes = Vec::new();
        for p in &paths {
            let (_, meet) = d.path_label(p)?;
            explained = tag_join(&explained, &meet)?;
            if !meet.is_empty() {
                routes.push(EventRoute {
                    meet,
                    path: p.edge_refs(d),
                });
            }
        }
        let class = if paths.is_empty() {
            EventClass::Primitive
        } else if explained == edge.tag {
            EventClass::Computation
        } else {
            EventClass::Announcement
        };
        events.push(EventEntry {
            class,
            edge: d.edge_ref(i),
            newly_informed: tag_minus(&edge.tag, &explained)?,
            explained,
            routes,
        });
    }
    Ok(EventReport { events })
}

/// Restricts a diagram to what a group can see: edges whose tag contains
/// every member of `who`. All nodes are kept. The empty group sees
/// everything, so an empty `who` returns the diagram unchanged.
pub fn restrict_view(d: &Diagram, who: &Tag) -> Result<Diagram> {
    same_universe(who.universe(), d.universe())?;
    let edges: Vec<Edge> = d
        .edges()
        .iter()
        .filter(|e| tag_leq(who, &e.tag).expect("tags of one diagram share its universe"))
        .cloned()
        .collect();
    Diagram::build(
        d.universe().clone(),
        d.theory().clone(),
        d.nodes().to_vec(),
        edges,
    )
}

/// A leak rule: edges matching every present matcher gain the `add` tag.
///
/// With both matchers absent the rule matches every edge.
#[derive(Debug, Clone)]
pub struct LeakRule {
    /// Match edges whose arrow equals this one semantically.
    pub arrow: Option<crate::algebra::AlgebraArrow>,
    /// Match edges whose tag equals this one exactly.
    pub tag_is: Option<Tag>,
    /// Participants granted to matching edges.
    pub add: Tag,
}

/// One edge whose tag changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagChange {
    pub edge: EdgeRef,
    pub new: Tag,
    pub old: Tag,
}

/// What a leak did: direct substitutions, then completion consequences.
#[derive(Debug, Clone, Serialize)]
pub struct LeakDiff {
    /// Tag growth forced by re-establishing the flow condition.
    pub consequences: Vec<TagChange>,
    /// Tag growth applied directly by the rules.
    pub substitutions: Vec<TagChange>,
}

/// Applies leak rules and re-completes the diagram.
///
/// Every matching edge's tag is joined with the rule's `add` tag; the
/// substituted diagram is then closed under the flow condition and both
/// waves of changes are reported separately.
pub fn apply_leak(d: &Diagram, rules: &[LeakRule]) -> Result<(Diagram, LeakDiff)> {
    for rule in rules {
        same_universe(rule.add.universe(), d.universe())?;
        if let Some(t) = &rule.tag_is {
            same_universe(t.universe(), d.universe())?;
        }
        if let Some(a) = &rule.arrow {
            d.theory().normalize(a)?;
        }
    }
    let mut tags = Vec::with_capacity(d.edges().len());
    let mut substitutions = Vec::new();
    for (i, edge) in d.edges().iter().enumerate() {
        let mut tag = edge.tag.clone();
        for rule in rules {
            let arrow_ok = match &rule.arrow {
                Some(a) => d.theory().arrows_equal(a, &edge.arrow)?,
                None => true,
            };
            let tag_ok = match &rule.tag_is {
                Some(t) => *t == edge.tag,
                None => true,
            };
            if arrow_ok && tag_ok {
                tag = tag_join(&tag, &rule.add)?;
            }
        }
        if tag != edge.tag {
            substitutions.push(TagChange {
                edge: d.edge_ref(i),
                new: tag.clone(),
                old: edge.tag.clone(),
            });
        }
        tags.push(tag);
    }
    let substituted = d.with_tags(tags);
    let completed = complete_ifo(&substituted)?;
    let mut consequences = Vec::new();
    for (i, (before, after)) in substituted
        .edges()
        .iter()
        .zip(completed.edges())
        .enumerate()
    {
        if before.tag != after.tag {
            consequences.push(TagChange {
                edge: completed.edge_ref(i),
                new: after.tag.clone(),
                old: before.tag.clone(),
            });
        }
    }
    Ok((
        completed,
        LeakDiff {
            consequences,
            substitutions,
        },
    ))
}

/// Tag policy for chords inserted by triangulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordPolicy {
    /// Inherit the target edge's tag: announce to the same audience.
    Audience,
    /// Meet of the two subtending sides: only those who can compute it.
    Minimal,
}

/// One triangle of a scenario, with its derived announcement data.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioTriangle {
    /// Meet of the two side tags: who could compute the apex value.
    pub announcers: Tag,
    pub apex: EdgeRef,
    /// Tag of the apex edge: who ends up holding the value.
    pub audience: Tag,
    /// True when the sides do not explain the full audience.
    pub is_announcement: bool,
    pub left: EdgeRef,
    pub right: EdgeRef,
}

/// One triangulation of the polygon spanned by a target edge.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Every chord of the triangulation, pre-existing ones included.
    pub chords: Vec<EdgeRef>,
    pub diagram: Diagram,
    /// Chords that were not edges of the input diagram.
    pub inserted: Vec<EdgeRef>,
    /// Triangles ordered by span, smallest first.
    pub triangles: Vec<ScenarioTriangle>,
}

/// Exact Catalan number, or `None` past the bound.
fn catalan_capped(m: usize, bound: u64) -> Option<u64> {
    let mut c: u128 = 1;
    for k in 0..m {
        c = c * 2 * (2 * k as u128 + 1) / (k as u128 + 2);
        if c > bound as u128 {
            return None;
        }
    }
    Some(c as u64)
}

/// All triangulations of the fan `(lo..=hi)`, each as a triangle list.
fn triangulations(lo: usize, hi: usize) -> Vec<Vec<(usize, usize, usize)>> {
    if hi - lo == 1 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in lo + 1..hi {
        for left in triangulations(lo, k) {
            for right in triangulations(k, hi) {
                let mut t = left.clone();
                t.extend(right.iter().copied());
                t.push((lo, k, hi));
                out.push(t);
            }
        }
    }
    out
}

/// Enumerates the triangulation scenarios of one edge.
///
/// The edge must have parallel paths, and among them a unique maximal one
/// by node-set inclusion; that path and the edge bound the polygon. Every
/// triangulation of the polygon that keeps all pre-existing chords yields
/// a scenario: missing chords are inserted with the composite arrow of the
/// subpath they subtend and a tag chosen by `policy`, and each triangle is
/// read as a potential announcement of its apex value by the participants
/// who could compute it from the sides.
pub fn enumerate_scenarios(
    d: &Diagram,
    src: &str,
    dst: &str,
    policy: ChordPolicy,
) -> Result<Vec<Scenario>> {
    let target_idx = d.edge_between(src, dst).ok_or_else(|| Error::UnknownEdge {
        src: src.into(),
        dst: dst.into(),
    })?;
    let paths = d.parallel_paths(target_idx)?;
    if paths.is_empty() {
        return Err(Error::NoParallelPath {
            src: src.into(),
            dst: dst.into(),
        });
    }

    // The polygon is bounded by the unique maximal parallel path. Distinct
    // paths have distinct node sets, so "maximal" is unambiguous as long
    // as exactly one path has no strict superset.
    let node_sets: Vec<std::collections::BTreeSet<&str>> = paths
        .iter()
        .map(|p| p.node_ids(d).into_iter().collect())
        .collect();
    let maximal: Vec<usize> = (0..paths.len())
        .filter(|&i| !(0..paths.len()).any(|j| j != i && node_sets[j].is_superset(&node_sets[i])))
        .collect();
    if maximal.len() != 1 {
        return Err(Error::AmbiguousPolygon {
            src: src.into(),
            dst: dst.into(),
            paths: maximal.iter().map(|&i| paths[i].render(d)).collect(),
        });
    }
    let rim = &paths[maximal[0]];
    let rim_nodes: Vec<String> = rim.node_ids(d).iter().map(|s| s.to_string()).collect();
    let n = rim.len();

    if catalan_capped(n - 1, SCENARIO_BOUND).is_none() {
        return Err(Error::CountExplosion {
            bound: SCENARIO_BOUND,
        });
    }

    // Pre-existing chords of the polygon, by rim position pair.
    let pos_of: BTreeMap<&str, usize> = rim_nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut existing: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (ei, edge) in d.edges().iter().enumerate() {
        let (Some(&i), Some(&j)) = (pos_of.get(edge.src.as_str()), pos_of.get(edge.dst.as_str()))
        else {
            continue;
        };
        debug_assert!(i < j, "rim positions follow the topological order");
        if j - i >= 2 && (i, j) != (0, n) {
            existing.insert((i, j), ei);
        }
    }

    // Composite arrow of the rim subpath between two positions.
    let span_arrow = |i: usize, j: usize| -> Result<crate::algebra::AlgebraArrow> {
        let mut arrow = d.edge(rim.edges()[i]).arrow.clone();
        for &e in &rim.edges()[i + 1..j] {
            arrow = d.theory().compose(&arrow, &d.edge(e).arrow)?;
        }
        Ok(arrow)
    };

    let target_tag = d.edge(target_idx).tag.clone();
    let mut scenarios = Vec::new();
    for mut triangles in triangulations(0, n) {
        triangles.sort_by_key(|&(i, _, j)| (j - i, i));
        let chord_pairs: Vec<(usize, usize)> = {
            let mut pairs: Vec<(usize, usize)> = triangles
                .iter()
                .flat_map(|&(i, k, j)| [(i, k), (k, j)])
                .filter(|&(i, j)| j - i >= 2)
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            pairs
        };
        if !existing.keys().all(|pair| chord_pairs.contains(pair)) {
            continue;
        }

        // Tags for chords, bottom up by span so triangle sides are ready.
        let mut span_tag: BTreeMap<(usize, usize), Tag> = BTreeMap::new();
        for (i, &e) in rim.edges().iter().enumerate() {
            span_tag.insert((i, i + 1), d.edge(e).tag.clone());
        }
        for (pair, &e) in &existing {
            span_tag.insert(*pair, d.edge(e).tag.clone());
        }
        span_tag.insert((0, n), target_tag.clone());
        let mut inserted_edges: Vec<Edge> = Vec::new();
        let mut inserted_refs: Vec<EdgeRef> = Vec::new();
        for &(i, k, j) in &triangles {
            if (i, j) == (0, n) || span_tag.contains_key(&(i, j)) {
                continue;
            }
            let tag = match policy {
                ChordPolicy::Audience => target_tag.clone(),
                ChordPolicy::Minimal => tag_meet(&span_tag[&(i, k)], &span_tag[&(k, j)])?,
            };
            span_tag.insert((i, j), tag.clone());
            inserted_edges.push(Edge {
                src: rim_nodes[i].clone(),
                dst: rim_nodes[j].clone(),
                arrow: span_arrow(i, j)?,
                tag,
            });
            inserted_refs.push(EdgeRef::new(rim_nodes[i].clone(), rim_nodes[j].clone()));
        }

        let mut edges = d.edges().to_vec();
        edges.extend(inserted_edges);
        let diagram = Diagram::build(
            d.universe().clone(),
            d.theory().clone(),
            d.nodes().to_vec(),
            edges,
        )?;

        let tri_entries: Result<Vec<ScenarioTriangle>> = triangles
            .iter()
            .map(|&(i, k, j)| {
                let announcers = tag_meet(&span_tag[&(i, k)], &span_tag[&(k, j)])?;
                let audience = span_tag[&(i, j)].clone();
                Ok(ScenarioTriangle {
                    is_announcement: announcers != audience,
                    announcers,
                    apex: EdgeRef::new(rim_nodes[i].clone(), rim_nodes[j].clone()),
                    audience,
                    left: EdgeRef::new(rim_nodes[i].clone(), rim_nodes[k].clone()),
                    right: EdgeRef::new(rim_nodes[k].clone(), rim_nodes[j].clone()),
                })
            })
            .collect();

        scenarios.push(Scenario {
            chords: chord_pairs
                .iter()
                .map(|&(i, j)| EdgeRef::new(rim_nodes[i].clone(), rim_nodes[j].clone()))
                .collect(),
            diagram,
            inserted: inserted_refs,
            triangles: tri_entries?,
        });
    }
    Ok(scenarios)
}

/// Temporal orderings of the selection events of a diagram.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingsReport {
    /// Exact number of admissible orderings.
    pub count: u64,
    /// Selection edges, in canonical edge order; orderings index into this.
    pub events: Vec<EdgeRef>,
    /// Lexicographically first orderings, up to the requested limit.
    pub orderings: Vec<Vec<usize>>,
}

/// Enumerates orders in which selection events can happen.
///
/// Events are edges out of a `unit` object. Event `f` must precede event
/// `e` when `f` lies on a parallel path of `e`: the path's inputs have to
/// exist before the shortcut's value can. The count is exact; at most
/// `limit` orderings are listed, in lexicographic order by event index.
pub fn enumerate_orderings(d: &Diagram, limit: usize) -> Result<OrderingsReport> {
    let mut events: Vec<usize> = Vec::new();
    for (i, edge) in d.edges().iter().enumerate() {
        if d.theory().objects_of(&edge.arrow)?.0 == AlgebraObject::Unit {
            events.push(i);
        }
    }
    if events.len() > 128 {
        return Err(Error::bad_params(format!(
            "{} selection events exceed the supported maximum of 128",
            events.len()
        )));
    }
    let event_pos: BTreeMap<usize, usize> = events
        .iter()
        .enumerate()
        .map(|(pos, &e)| (e, pos))
        .collect();
    // deps[e] is the mask of events that must precede event e.
    let mut deps: Vec<u128> = vec![0; events.len()];
    for (pos, &e) in events.iter().enumerate() {
        for path in d.parallel_paths(e)? {
            for &f in path.edges() {
                if let Some(&fpos) = event_pos.get(&f) {
                    deps[pos] |= 1u128 << fpos;
                }
            }
        }
    }

    let full: u128 = if events.len() == 128 {
        u128::MAX
    } else {
        (1u128 << events.len()) - 1
    };
    let mut memo: HashMap<u128, u64> = HashMap::new();
    let count = count_extensions(full, &deps, &mut memo)?;

    let mut orderings = Vec::new();
    if limit > 0 {
        let mut prefix = Vec::new();
        list_extensions(0, full, &deps, &mut prefix, &mut orderings, limit);
    }
    Ok(OrderingsReport {
        count,
        events: events.into_iter().map(|e| d.edge_ref(e)).collect(),
        orderings,
    })
}

fn count_extensions(full: u128, deps: &[u128], memo: &mut HashMap<u128, u64>) -> Result<u64> {
    fn go(placed: u128, full: u128, deps: &[u128], memo: &mut HashMap<u128, u64>) -> Result<u64> {
        if placed == full {
            return Ok(1);
        }
        if let Some(&c) = memo.get(&placed) {
            return Ok(c);
        }
        let mut acc: u64 = 0;
        for (pos, &need) in deps.iter().enumerate() {
            let bit = 1u128 << pos;
            if placed & bit == 0 && need & !placed == 0 {
                acc = acc
                    .checked_add(go(placed | bit, full, deps, memo)?)
                    .filter(|&c| c <= ORDERING_BOUND)
                    .ok_or(Error::CountExplosion {
                        bound: ORDERING_BOUND,
                    })?;
            }
        }
        if memo.len() >= ORDERING_STATE_BOUND {
            return Err(Error::CountExplosion {
                bound: ORDERING_BOUND,
            });
        }
        memo.insert(placed, acc);
        Ok(acc)
    }
    go(0, full, deps, memo)
}

fn list_extensions(
    placed: u128,
    full: u128,
    deps: &[u128],
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if placed == full {
        out.push(prefix.clone());
        return;
    }
    for (pos, &need) in deps.iter().enumerate() {
        let bit = 1u128 << pos;
        if placed & bit == 0 && need & !placed == 0 {
            prefix.push(pos);
            list_extensions(placed | bit, full, deps, prefix, out, limit);
            prefix.pop();
            if out.len() >= limit {
                return;
            }
        }
    }
}
