//! Seeded random diagrams that commute by construction.
//!
//! Exponents live in the unit group mod 10 and selection values are
//! powers of the primitive root 2 mod 11, so every composite between two
//! nodes telescopes to the same arrow no matter which path it takes.
//! That makes the generators useful as test corpora: commutation holds
//! for free while tags, shape, and density vary with the seed.

use rand::Rng;

use crate::algebra::{
    modpow, AlgebraArrow, AlgebraObject, AlgebraTheory, ElemRef, Matrix, ModExpTheory,
};
use crate::diagram::{Diagram, Edge, Node};
use crate::error::{Error, Result};
use crate::lattice::{tag_join, ParticipantUniverse, Tag};
use crate::protocols::cake_matrix_demo;

/// Exponent classes that are invertible mod 10.
const UNIT_EXPONENTS: [u64; 4] = [1, 3, 7, 9];

/// Inverse of a unit mod 10.
fn unit_inverse(t: u64) -> u64 {
    match t {
        1 => 1,
        3 => 7,
        7 => 3,
        9 => 9,
        _ => unreachable!("exponent classes are drawn from UNIT_EXPONENTS"),
    }
}

/// Shape and density knobs for the random generators.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    /// Number of carrier nodes.
    pub carriers: usize,
    /// Number of participants in the universe.
    pub participants: usize,
    /// Probability of each non-spine carrier edge.
    pub edge_density: f64,
    /// Probability of a selection edge into each carrier past the first.
    pub select_density: f64,
    /// Probability of each participant appearing in an edge tag.
    pub tag_density: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            carriers: 8,
            participants: 4,
            edge_density: 0.4,
            select_density: 0.6,
            tag_density: 0.4,
        }
    }
}

impl CorpusConfig {
    fn validate(&self) -> Result<()> {
        if self.carriers == 0 {
            return Err(Error::bad_params("corpus needs at least one carrier node"));
        }
        if self.carriers > 40 {
            return Err(Error::bad_params("corpus carrier count is capped at 40"));
        }
        if self.participants == 0 || self.participants > 26 {
            return Err(Error::bad_params(
                "corpus participant count must be between 1 and 26",
            ));
        }
        for (name, p) in [
            ("edge_density", self.edge_density),
            ("select_density", self.select_density),
            ("tag_density", self.tag_density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::bad_params(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    fn universe(&self) -> Result<std::sync::Arc<ParticipantUniverse>> {
        let names: Vec<String> = (0..self.participants)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect();
        ParticipantUniverse::new(names)
    }
}

fn random_tag(
    rng: &mut impl Rng,
    universe: &std::sync::Arc<ParticipantUniverse>,
    density: f64,
) -> Tag {
    let mut tag = Tag::empty(universe);
    for name in universe.names() {
        if rng.gen_bool(density) {
            tag.insert(name).expect("name comes from the same universe");
        }
    }
    tag
}

fn carrier_id(i: usize) -> String {
    format!("c{i:02}")
}

/// Random acyclic diagram over exponentiation mod 11 that commutes.
///
/// Carrier node `i` holds the value `2^(t_i) mod 11` for a unit exponent
/// class `t_i`, the spine edge `i -> i+1` always exists, and every edge
/// `u -> v` carries `pow(t_v * t_u^-1 mod 10)`, so all composites between
/// two nodes agree and every selection matches its target value.
pub fn random_commuting_diagram(rng: &mut impl Rng, cfg: &CorpusConfig) -> Result<Diagram> {
    cfg.validate()?;
    let universe = cfg.universe()?;
    let theory = AlgebraTheory::ModExp(ModExpTheory::new(11)?);

    let classes: Vec<u64> = (0..cfg.carriers)
        .map(|_| UNIT_EXPONENTS[rng.gen_range(0..UNIT_EXPONENTS.len())])
        .collect();

    let mut nodes = vec![Node {
        id: "star".to_string(),
        object: AlgebraObject::Unit,
    }];
    for i in 0..cfg.carriers {
        nodes.push(Node {
            id: carrier_id(i),
            object: AlgebraObject::Carrier,
        });
    }

    let mut edges = Vec::new();
    for (i, &t) in classes.iter().enumerate() {
        if i == 0 || rng.gen_bool(cfg.select_density) {
            edges.push(Edge {
                src: "star".to_string(),
                dst: carrier_id(i),
                arrow: AlgebraArrow::Select(modpow(2, t, 11)),
                tag: random_tag(rng, &universe, cfg.tag_density),
            });
        }
    }
    for u in 0..cfg.carriers {
        for v in (u + 1)..cfg.carriers {
            if v == u + 1 || rng.gen_bool(cfg.edge_density) {
                let exp = classes[v] * unit_inverse(classes[u]) % 10;
                edges.push(Edge {
                    src: carrier_id(u),
                    dst: carrier_id(v),
                    arrow: AlgebraArrow::Pow(exp),
                    tag: random_tag(rng, &universe, cfg.tag_density),
                });
            }
        }
    }

    Diagram::build(universe, theory, nodes, edges)
}

/// Joins every edge tag with a fresh random tag, growing tags pointwise.
pub fn grow_tags(rng: &mut impl Rng, d: &Diagram, density: f64) -> Result<Diagram> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::bad_params(format!(
            "density must lie in [0, 1], got {density}"
        )));
    }
    let tags = d
        .edges()
        .iter()
        .map(|e| tag_join(&e.tag, &random_tag(rng, d.universe(), density)))
        .collect::<Result<Vec<Tag>>>()?;
    Ok(d.with_tags(tags))
}

/// Random chain-with-shortcuts diagram over the demo matrix monoid.
///
/// Spine steps pick named generators at random; each shortcut carries the
/// literal product of the spine segment it spans, composed right to left,
/// so the diagram commutes by construction.
pub fn random_monoid_diagram(rng: &mut impl Rng) -> Result<Diagram> {
    let params = cake_matrix_demo()?;
    let theory = params.theory;
    let universe = ParticipantUniverse::new(["A", "B", "E"])?;

    let len = rng.gen_range(3..=7usize);
    let step_names: Vec<String> = {
        let names: Vec<&String> = theory.elements().keys().collect();
        (0..len)
            .map(|_| names[rng.gen_range(0..names.len())].clone())
            .collect()
    };
    let steps: Vec<Matrix> = step_names
        .iter()
        .map(|n| {
            theory
                .resolve(&ElemRef::Named(n.clone()))
                .expect("name comes from the theory")
        })
        .collect();
    let step_refs: Vec<ElemRef> = step_names.iter().cloned().map(ElemRef::Named).collect();

    let mut nodes = Vec::new();
    for i in 0..=len {
        nodes.push(Node {
            id: format!("m{i:02}"),
            object: AlgebraObject::Dot,
        });
    }

    let mut edges = Vec::new();
    for (i, r) in step_refs.iter().enumerate() {
        edges.push(Edge {
            src: format!("m{i:02}"),
            dst: format!("m{:02}", i + 1),
            arrow: AlgebraArrow::Elem(r.clone()),
            tag: random_tag(rng, &universe, 0.4),
        });
    }
    for i in 0..len {
        for j in (i + 2)..=len {
            if rng.gen_bool(0.35) {
                let mut prod = Matrix::identity(theory.dim());
                for step in &steps[i..j] {
                    prod = step.mul(&prod, theory.modulus());
                }
                edges.push(Edge {
                    src: format!("m{i:02}"),
                    dst: format!("m{j:02}"),
                    arrow: AlgebraArrow::Elem(ElemRef::Lit(prod)),
                    tag: random_tag(rng, &universe, 0.4),
                });
            }
        }
    }

    Diagram::build(universe, AlgebraTheory::MatrixMonoid(theory), nodes, edges)
}
