//! Canonical JSON documents and DOT export.
//!
//! A document wraps one diagram plus free-form string metadata. The
//! serialized form is canonical: object keys appear in alphabetical
//! order, nodes sort by id, edges by `(src, dst)`, and tags list members
//! in universe order, so equal diagrams serialize to identical bytes.
//! Parsing is strict: unknown fields, bad versions, and ill-typed shapes
//! are schema errors, and everything else goes through the same
//! validation as programmatic construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    AlgebraArrow, AlgebraObject, AlgebraTheory, ElemRef, Matrix, MatrixMonoidTheory, ModExpTheory,
};
use crate::analysis::EventReport;
use crate::diagram::{Diagram, Edge, EdgeRef, Node};
use crate::error::{Error, Result};
use crate::ifo::IfoReport;
use crate::lattice::{ParticipantUniverse, Tag};

/// Version string of the document format.
pub const FORMAT_VERSION: &str = "1";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    diagram: RawDiagram,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    version: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagram {
    edges: Vec<RawEdge>,
    nodes: Vec<RawNode>,
    theory: RawTheory,
    universe: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    object: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    arrow: RawArrow,
    dst: String,
    src: String,
    tag: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrow {
    #[serde(default)]
    exp: Option<u64>,
    #[serde(default)]
    matrix: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    name: Option<String>,
    op: String,
    #[serde(default)]
    value: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheory {
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    elements: Option<BTreeMap<String, Vec<Vec<u64>>>>,
    kind: String,
    #[serde(default)]
    modulus: Option<u64>,
    #[serde(default)]
    p: Option<u64>,
    #[serde(default)]
    pools: Option<BTreeMap<String, Vec<String>>>,
}

fn arrow_from_raw(raw: &RawArrow, context: &str) -> Result<AlgebraArrow> {
    let forbid = |cond: bool, field: &str| -> Result<()> {
        if cond {
            Err(Error::schema(
                context,
                format!("field {field:?} does not belong to op {:?}", raw.op),
            ))
        } else {
            Ok(())
        }
    };
    match raw.op.as_str() {
        "pow" => {
            forbid(raw.matrix.is_some(), "matrix")?;
            forbid(raw.name.is_some(), "name")?;
            forbid(raw.value.is_some(), "value")?;
            let exp = raw
                .exp
                .ok_or_else(|| Error::schema(context, "op \"pow\" requires field \"exp\""))?;
            Ok(AlgebraArrow::Pow(exp))
        }
        "select" => {
            forbid(raw.exp.is_some(), "exp")?;
            forbid(raw.matrix.is_some(), "matrix")?;
            forbid(raw.name.is_some(), "name")?;
            let value = raw
                .value
                .ok_or_else(|| Error::schema(context, "op \"select\" requires field \"value\""))?;
            Ok(AlgebraArrow::Select(value))
        }
        "elem" => {
            forbid(raw.exp.is_some(), "exp")?;
            forbid(raw.value.is_some(), "value")?;
            match (&raw.name, &raw.matrix) {
                (Some(name), None) => Ok(AlgebraArrow::Elem(ElemRef::Named(name.clone()))),
                (None, Some(rows)) => {
                    let dim = rows.len();
                    // Dimension and modulus are validated against the
                    // theory when the diagram is built; entries pass
                    // through unreduced here.
                    let m = Matrix::from_rows(rows, dim, u64::MAX)
                        .map_err(|e| Error::schema(context, e.to_string()))?;
                    Ok(AlgebraArrow::Elem(ElemRef::Lit(m)))
                }
                _ => Err(Error::schema(
                    context,
                    "op \"elem\" requires exactly one of \"name\" or \"matrix\"",
                )),
            }
        }
        other => Err(Error::schema(context, format!("unknown op {other:?}"))),
    }
}

/// Parses one arrow from its JSON value form, e.g. `{"exp":3,"op":"pow"}`.
pub fn parse_arrow_value(value: &serde_json::Value, context: &str) -> Result<AlgebraArrow> {
    let raw: RawArrow =
        serde_json::from_value(value.clone()).map_err(|e| Error::schema(context, e.to_string()))?;
    arrow_from_raw(&raw, context)
}

fn theory_from_raw(raw: &RawTheory) -> Result<AlgebraTheory> {
    let context = "diagram.theory";
    match raw.kind.as_str() {
        "modexp" => {
            if raw.dim.is_some()
                || raw.elements.is_some()
                || raw.modulus.is_some()
                || raw.pools.is_some()
            {
                return Err(Error::schema(
                    context,
                    "kind \"modexp\" admits only field \"p\"",
                ));
            }
            let p = raw
                .p
                .ok_or_else(|| Error::schema(context, "kind \"modexp\" requires field \"p\""))?;
            Ok(AlgebraTheory::ModExp(ModExpTheory::new(p)?))
        }
        "matrix-monoid" => {
            if raw.p.is_some() {
                return Err(Error::schema(
                    context,
                    "kind \"matrix-monoid\" does not admit field \"p\"",
                ));
            }
            let dim = raw.dim.ok_or_else(|| {
                Error::schema(context, "kind \"matrix-monoid\" requires field \"dim\"")
            })?;
            let modulus = raw.modulus.ok_or_else(|| {
                Error::schema(context, "kind \"matrix-monoid\" requires field \"modulus\"")
            })?;
            let mut elements = BTreeMap::new();
            for (name, rows) in raw.elements.clone().unwrap_or_default() {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::schema(
                        format!("{context}.elements.{name}"),
                        format!("matrix is not {dim}x{dim}"),
                    ));
                }
                if rows.iter().flatten().any(|&v| v >= modulus) {
                    return Err(Error::schema(
                        format!("{context}.elements.{name}"),
                        format!("entries outside Z_{modulus}"),
                    ));
                }
                elements.insert(name, Matrix::from_rows(&rows, dim, modulus)?);
            }
            Ok(AlgebraTheory::MatrixMonoid(MatrixMonoidTheory::new(
                modulus,
                dim,
                elements,
                raw.pools.clone().unwrap_or_default(),
            )?))
        }
        other => Err(Error::schema(
            context,
            format!("unknown theory kind {other:?}"),
        )),
    }
}

fn diagram_from_raw(raw: RawDocument) -> Result<(Diagram, BTreeMap<String, String>)> {
    if raw.version != FORMAT_VERSION {
        return Err(Error::schema(
            "version",
            format!("expected {FORMAT_VERSION:?}, got {:?}", raw.version),
        ));
    }
    let universe = ParticipantUniverse::new(raw.diagram.universe.clone())?;
    let theory = theory_from_raw(&raw.diagram.theory)?;
    let mut nodes = Vec::with_capacity(raw.diagram.nodes.len());
    for n in &raw.diagram.nodes {
        let object = AlgebraObject::parse(&n.object).ok_or_else(|| {
            Error::schema(
                format!("diagram.nodes.{}", n.id),
                format!("unknown object {:?}", n.object),
            )
        })?;
        nodes.push(Node {
            id: n.id.clone(),
            object,
        });
    }
    let mut edges = Vec::with_capacity(raw.diagram.edges.len());
    for e in &raw.diagram.edges {
        let context = format!("diagram.edges.{}->{}", e.src, e.dst);
        let arrow = arrow_from_raw(&e.arrow, &context)?;
        let tag = Tag::from_names(&universe, &e.tag)?;
        edges.push(Edge {
            src: e.src.clone(),
            dst: e.dst.clone(),
            arrow,
            tag,
        });
    }
    let diagram = Diagram::build(universe, theory, nodes, edges)?;
    Ok((diagram, raw.metadata))
}

/// Parses a document from JSON text.
pub fn parse_document(text: &str) -> Result<(Diagram, BTreeMap<String, String>)> {
    let raw: RawDocument = serde_json::from_str(text).map_err(classify_json_error)?;
    diagram_from_raw(raw)
}

/// Parses a document from an already-decoded JSON value.
pub fn parse_document_value(
    value: serde_json::Value,
) -> Result<(Diagram, BTreeMap<String, String>)> {
    let raw: RawDocument = serde_json::from_value(value).map_err(|e| Error::Schema {
        context: "document".into(),
        reason: e.to_string(),
    })?;
    diagram_from_raw(raw)
}

/// Parses a bare diagram, discarding metadata.
pub fn parse_diagram(text: &str) -> Result<Diagram> {
    Ok(parse_document(text)?.0)
}

fn classify_json_error(e: serde_json::Error) -> Error {
    if e.classify() == serde_json::error::Category::Data {
        Error::Schema {
            context: "document".into(),
            reason: e.to_string(),
        }
    } else {
        Error::Syntax { source: e }
    }
}

#[derive(Serialize)]
struct OutDocument<'a> {
    diagram: OutDiagram<'a>,
    metadata: &'a BTreeMap<String, String>,
    version: &'static str,
}

#[derive(Serialize)]
struct OutDiagram<'a> {
    edges: Vec<OutEdge<'a>>,
    nodes: Vec<OutNode<'a>>,
    theory: OutTheory<'a>,
    universe: &'a [String],
}

#[derive(Serialize)]
struct OutNode<'a> {
    id: &'a str,
    object: AlgebraObject,
}

#[derive(Serialize)]
struct OutEdge<'a> {
    arrow: &'a AlgebraArrow,
    dst: &'a str,
    src: &'a str,
    tag: &'a Tag,
}

#[derive(Serialize)]
#[serde(untagged)]
enum OutTheory<'a> {
    ModExp {
        kind: &'static str,
        p: u64,
    },
    MatrixMonoid {
        dim: usize,
        elements: &'a BTreeMap<String, Matrix>,
        kind: &'static str,
        modulus: u64,
        pools: &'a BTreeMap<String, Vec<String>>,
    },
}

fn out_document<'a>(d: &'a Diagram, metadata: &'a BTreeMap<String, String>) -> OutDocument<'a> {
    let theory = match d.theory() {
        AlgebraTheory::ModExp(t) => OutTheory::ModExp {
            kind: "modexp",
            p: t.p(),
        },
        AlgebraTheory::MatrixMonoid(t) => OutTheory::MatrixMonoid {
            dim: t.dim(),
            elements: t.elements(),
            kind: "matrix-monoid",
            modulus: t.modulus(),
            pools: t.pools(),
        },
    };
    OutDocument {
        diagram: OutDiagram {
            edges: d
                .edges()
                .iter()
                .map(|e| OutEdge {
                    arrow: &e.arrow,
                    dst: &e.dst,
                    src: &e.src,
                    tag: &e.tag,
                })
                .collect(),
            nodes: d
                .nodes()
                .iter()
                .map(|n| OutNode {
                    id: &n.id,
                    object: n.object,
                })
                .collect(),
            theory,
            universe: d.universe().names(),
        },
        metadata,
        version: FORMAT_VERSION,
    }
}

/// Serializes a document to canonical pretty JSON ending in a newline.
pub fn serialize_document(d: &Diagram, metadata: &BTreeMap<String, String>) -> String {
    let mut text = serde_json::to_string_pretty(&out_document(d, metadata))
        .expect("canonical document serialization cannot fail");
    text.push('\n');
    text
}

/// Serializes a bare diagram with empty metadata.
pub fn serialize_diagram(d: &Diagram) -> String {
    serialize_document(d, &BTreeMap::new())
}

/// Document as a JSON value, for embedding into larger reports.
pub fn document_value(d: &Diagram, metadata: &BTreeMap<String, String>) -> serde_json::Value {
    serde_json::to_value(out_document(d, metadata))
        .expect("canonical document serialization cannot fail")
}

/// Extra decoration for DOT export.
#[derive(Debug, Clone, Copy, Default)]
pub enum DotAnnotations<'a> {
    #[default]
    None,
    /// Color edges that violate the flow condition.
    Flow(&'a IfoReport),
    /// Color announcement and computation edges.
    Events(&'a EventReport),
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a diagram in Graphviz DOT format.
pub fn export_dot(d: &Diagram, annotations: DotAnnotations<'_>) -> String {
    use std::collections::BTreeSet;
    use std::fmt::Write;

    let mut flagged: BTreeSet<EdgeRef> = BTreeSet::new();
    let mut announcements: BTreeSet<EdgeRef> = BTreeSet::new();
    let mut computations: BTreeSet<EdgeRef> = BTreeSet::new();
    match annotations {
        DotAnnotations::None => {}
        DotAnnotations::Flow(report) => {
            flagged.extend(report.violations.iter().map(|v| v.edge.clone()));
        }
        DotAnnotations::Events(report) => {
            for e in &report.events {
                match e.class {
                    crate::analysis::EventClass::Announcement => {
                        announcements.insert(e.edge.clone());
                    }
                    crate::analysis::EventClass::Computation => {
                        computations.insert(e.edge.clone());
                    }
                    crate::analysis::EventClass::Primitive => {}
                }
            }
        }
    }

    let mut out = String::new();
    out.push_str("digraph diagram {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\"];\n");
    for node in d.nodes() {
        let id = dot_escape(&node.id);
        match node.object {
            AlgebraObject::Unit => {
                let _ = writeln!(out, "  \"{id}\" [shape=point, xlabel=\"{id}\"];");
            }
            _ => {
                let _ = writeln!(out, "  \"{id}\" [shape=ellipse];");
            }
        }
    }
    for (i, edge) in d.edges().iter().enumerate() {
        let r = d.edge_ref(i);
        let mut attrs = format!(
            "label=\"{} {}\"",
            dot_escape(&edge.arrow.to_string()),
            dot_escape(&edge.tag.to_string())
        );
        if flagged.contains(&r) {
            attrs.push_str(", color=\"red\", penwidth=\"2.0\"");
        } else if announcements.contains(&r) {
            attrs.push_str(", color=\"blue\", style=\"bold\"");
        } else if computations.contains(&r) {
            attrs.push_str(", color=\"darkgreen\"");
        }
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [{attrs}];",
            dot_escape(&edge.src),
            dot_escape(&edge.dst)
        );
    }
    out.push_str("}\n");
    out
}

/// Tag differences between two structurally identical diagrams.
///
/// The diagrams must share universe, theory, node set, edge set, and
/// arrows; anything else is a [`Error::StructuralMismatch`]. Returns one
/// [`crate::analysis::TagChange`] per edge whose tag differs, old taken
/// from `a`, new from `b`.
pub fn diff_diagrams(a: &Diagram, b: &Diagram) -> Result<Vec<crate::analysis::TagChange>> {
    crate::lattice::same_universe(a.universe(), b.universe())?;
    let mut details = Vec::new();
    if a.theory() != b.theory() {
        details.push("theories differ".to_string());
    }
    for n in a.nodes() {
        match b.node(&n.id) {
            Some(other) if other.object == n.object => {}
            Some(_) => details.push(format!("node {:?} changes object", n.id)),
            None => details.push(format!("node {:?} missing from right", n.id)),
        }
    }
    for n in b.nodes() {
        if a.node(&n.id).is_none() {
            details.push(format!("node {:?} missing from left", n.id));
        }
    }
    for (i, e) in a.edges().iter().enumerate() {
        match b.edge_between(&e.src, &e.dst) {
            Some(j) => {
                if details.is_empty() && !a.theory().arrows_equal(&e.arrow, &b.edge(j).arrow)? {
                    details.push(format!("edge {} changes arrow", a.edge_ref(i)));
                }
            }
            None => details.push(format!("edge {} missing from right", a.edge_ref(i))),
        }
    }
    for (j, e) in b.edges().iter().enumerate() {
        if a.edge_between(&e.src, &e.dst).is_none() {
            details.push(format!("edge {} missing from left", b.edge_ref(j)));
        }
    }
    if !details.is_empty() {
        return Err(Error::StructuralMismatch { details });
    }
    let mut changes = Vec::new();
    for (i, e) in a.edges().iter().enumerate() {
        let j = b
            .edge_between(&e.src, &e.dst)
            .expect("edge sets were just checked equal");
        if e.tag != b.edge(j).tag {
            changes.push(crate::analysis::TagChange {
                edge: a.edge_ref(i),
                new: b.edge(j).tag.clone(),
                old: e.tag.clone(),
            });
        }
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::tag_join;
    use crate::protocols::{cake_matrix_demo, gen_cake, gen_dh2, DhParams};

    fn two_party() -> Diagram {
        gen_dh2(&DhParams::new(
            11,
            2,
            vec![("A".into(), 3), ("B".into(), 4)],
        ))
        .unwrap()
    }

    #[test]
    fn documents_round_trip() {
        let d = two_party();
        let text = serialize_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        assert_eq!(d, back);
        assert_eq!(serialize_diagram(&back), text);
    }

    #[test]
    fn matrix_documents_round_trip() {
        let d = gen_cake(&cake_matrix_demo().unwrap()).unwrap();
        let text = serialize_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        assert_eq!(d, back);
        assert_eq!(serialize_diagram(&back), text);
    }

    #[test]
    fn metadata_round_trips_and_sorts() {
        let d = two_party();
        let mut meta = BTreeMap::new();
        meta.insert("zeta".to_string(), "1".to_string());
        meta.insert("alpha".to_string(), "2".to_string());
        let text = serialize_document(&d, &meta);
        let zeta = text.find("\"zeta\"").unwrap();
        let alpha = text.find("\"alpha\"").unwrap();
        assert!(alpha < zeta);
        let (back, back_meta) = parse_document(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back_meta, meta);
    }

    #[test]
    fn serialization_is_canonical() {
        let d = two_party();
        let text = serialize_diagram(&d);
        assert!(text.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        fn keys_sorted(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Object(map) => {
                    let keys: Vec<&String> = map.keys().collect();
                    let mut sorted = keys.clone();
                    sorted.sort();
                    keys == sorted && map.values().all(keys_sorted)
                }
                serde_json::Value::Array(items) => items.iter().all(keys_sorted),
                _ => true,
            }
        }
        assert!(keys_sorted(&value));
        // Edges are sorted by (src, dst).
        let edges = value["diagram"]["edges"].as_array().unwrap();
        let pairs: Vec<(String, String)> = edges
            .iter()
            .map(|e| {
                (
                    e["src"].as_str().unwrap().to_string(),
                    e["dst"].as_str().unwrap().to_string(),
                )
            })
            .collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
        assert_eq!(value["version"], "1");
    }

    #[test]
    fn syntax_and_schema_errors_are_distinguished() {
        assert!(matches!(parse_diagram("{"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_diagram("{]"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_diagram("42"), Err(Error::Schema { .. })));
        let d = two_party();
        let text = serialize_diagram(&d);
        // Wrong version.
        let wrong = text.replace("\"version\": \"1\"", "\"version\": \"2\"");
        assert!(matches!(parse_diagram(&wrong), Err(Error::Schema { .. })));
        // Unknown field.
        let extra = text.replace("\"version\": \"1\"", "\"version\": \"1\", \"zzz\": 0");
        assert!(matches!(parse_diagram(&extra), Err(Error::Schema { .. })));
        // Unknown op.
        let bad_op = text.replace("\"op\": \"select\"", "\"op\": \"frobnicate\"");
        assert!(matches!(parse_diagram(&bad_op), Err(Error::Schema { .. })));
        // Field from the wrong op.
        let mixed = text.replace(
            "\"exp\": 3,\n          \"op\": \"pow\"",
            "\"exp\": 3,\n          \"op\": \"pow\",\n          \"value\": 1",
        );
        assert_ne!(mixed, text);
        assert!(matches!(parse_diagram(&mixed), Err(Error::Schema { .. })));
    }

    #[test]
    fn semantic_validation_still_applies_to_parsed_input() {
        let d = two_party();
        let text = serialize_diagram(&d);
        // Sabotage one arrow so the diagram no longer type-checks: a pow
        // out of the unit object.
        let bad = text.replace(
            "\"op\": \"select\",\n          \"value\": 2",
            "\"exp\": 2,\n          \"op\": \"pow\"",
        );
        assert_ne!(bad, text);
        assert!(matches!(
            parse_diagram(&bad),
            Err(Error::TypeMismatch { .. })
        ));
        // Unknown participant in a tag.
        let ghost = text.replace(
            "\"tag\": [\n          \"A\"\n        ]",
            "\"tag\": [\n          \"Z\"\n        ]",
        );
        assert_ne!(ghost, text);
        assert!(matches!(
            parse_diagram(&ghost),
            Err(Error::UnknownParticipant { .. })
        ));
    }

    #[test]
    fn dot_export_is_deterministic_and_annotated() {
        let d = two_party();
        let plain = export_dot(&d, DotAnnotations::None);
        assert_eq!(plain, export_dot(&d, DotAnnotations::None));
        assert!(plain.starts_with("digraph diagram {"));
        assert!(plain.contains("\"star\" -> \"g\""));
        assert!(plain.contains("select(2)"));
        assert!(!plain.contains("color="));

        let events = crate::analysis::classify_events(&d).unwrap();
        let annotated = export_dot(&d, DotAnnotations::Events(&events));
        assert!(annotated.contains("color=\"blue\""));
        assert!(annotated.contains("color=\"darkgreen\""));

        // A flow violation turns red.
        let mut tags: Vec<Tag> = d.edges().iter().map(|e| e.tag.clone()).collect();
        let i = d.edge_between("star", "g^A").unwrap();
        tags[i] = Tag::empty(d.universe());
        let broken = d.with_tags(tags);
        let report = crate::ifo::check_ifo(&broken).unwrap();
        assert!(!report.ok);
        let red = export_dot(&broken, DotAnnotations::Flow(&report));
        assert!(red.contains("color=\"red\""));
    }

    #[test]
    fn diff_reports_tag_changes_only() {
        let d = two_party();
        let mut tags: Vec<Tag> = d.edges().iter().map(|e| e.tag.clone()).collect();
        let i = d.edge_between("g", "g^A").unwrap();
        let e_tag = Tag::from_names(d.universe(), &["E"]).unwrap();
        tags[i] = tag_join(&tags[i], &e_tag).unwrap();
        let changed = d.with_tags(tags);
        let changes = diff_diagrams(&d, &changed).unwrap();
        assert_eq!(changes.len(), 1);
        assert_eq!(changes[0].edge, EdgeRef::new("g", "g^A"));
        assert_eq!(changes[0].old.members(), vec!["A"]);
        assert_eq!(changes[0].new.members(), vec!["A", "E"]);
        assert!(diff_diagrams(&d, &d).unwrap().is_empty());
    }

    #[test]
    fn diff_rejects_structural_changes() {
        let d = two_party();
        let smaller =
            crate::analysis::restrict_view(&d, &Tag::from_names(d.universe(), &["A"]).unwrap())
                .unwrap();
        match diff_diagrams(&d, &smaller) {
            Err(Error::StructuralMismatch { details }) => {
                assert!(details.iter().any(|s| s.contains("missing from right")));
            }
            other => panic!("expected structural mismatch, got {other:?}"),
        }
        let other_theory = gen_dh2(&DhParams::new(
            13,
            2,
            vec![("A".into(), 3), ("B".into(), 4)],
        ))
        .unwrap();
        assert!(matches!(
            diff_diagrams(&d, &other_theory),
            Err(Error::StructuralMismatch { .. })
        ));
    }
}
