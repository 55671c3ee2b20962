//! Generators for key-agreement diagrams.
//!
//! Each generator builds a diagram whose nodes hold intermediate group
//! values, whose exponentiation edges are tagged with the key owner, and
//! whose selection edges record which value is announced to whom. The
//! exponential families cover two-party agreement, the pairwise mesh, the
//! cyclic ring, and the general subset scheme where every group of `k`
//! owners ends up with a shared secret. A conjugation-style agreement
//! over a matrix monoid with commuting element pools is also provided.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{
    check_pointwise_commuting, modpow, AlgebraArrow, AlgebraObject, AlgebraTheory, ElemRef, Matrix,
    MatrixMonoidTheory, ModExpTheory,
};
use crate::diagram::{Diagram, Edge, Node};
use crate::error::{Error, Result};
use crate::lattice::{ParticipantUniverse, Tag};

/// Parameters of the exponential generators.
#[derive(Debug, Clone)]
pub struct DhParams {
    /// Prime modulus.
    pub p: u64,
    /// Group generator, `1 <= g < p`.
    pub g: u64,
    /// Key owners in protocol order with their private exponents.
    pub keys: Vec<(String, u64)>,
    /// Passive observers added to every public announcement.
    pub eavesdroppers: Vec<String>,
}

impl DhParams {
    /// Parameters with the single default eavesdropper `E`.
    pub fn new(p: u64, g: u64, keys: Vec<(String, u64)>) -> DhParams {
        DhParams {
            p,
            g,
            keys,
            eavesdroppers: vec!["E".into()],
        }
    }

    fn validate(&self, min_owners: usize) -> Result<(Arc<ParticipantUniverse>, ModExpTheory)> {
        let theory = ModExpTheory::new(self.p)?;
        if self.g == 0 || self.g >= self.p {
            return Err(Error::bad_params(format!(
                "generator {} outside 1..{}",
                self.g, self.p
            )));
        }
        if self.keys.len() < min_owners {
            return Err(Error::bad_params(format!(
                "need at least {min_owners} key owners, got {}",
                self.keys.len()
            )));
        }
        for (name, key) in &self.keys {
            if name.is_empty() {
                return Err(Error::bad_params("owner names must be non-empty"));
            }
            if *key == 0 {
                return Err(Error::bad_params(format!(
                    "exponent of {name:?} must be at least 1"
                )));
            }
        }
        let names: Vec<String> = self
            .keys
            .iter()
            .map(|(n, _)| n.clone())
            .chain(self.eavesdroppers.iter().cloned())
            .collect();
        // Universe construction rejects duplicates across owners and
        // eavesdroppers in one place.
        let universe = ParticipantUniverse::new(names)?;
        Ok((universe, theory))
    }

    /// Value of `g` raised to the keys of every owner in `subset`.
    fn value(&self, subset: &[usize]) -> u64 {
        let mut v = self.g % self.p;
        for &i in subset {
            v = modpow(v, self.keys[i].1, self.p);
        }
        v
    }

    /// Node id for the value raised to the given owners, in listed order.
    fn node_id(&self, subset: &[usize]) -> String {
        if subset.is_empty() {
            return "g".into();
        }
        let mut id = String::from("g^");
        for &i in subset {
            id.push_str(&self.keys[i].0);
        }
        id
    }
}

/// Tag containing the given owners plus every eavesdropper.
fn owners_plus_eavesdroppers(
    u: &Arc<ParticipantUniverse>,
    params: &DhParams,
    owners: &[usize],
) -> Result<Tag> {
    let mut tag = Tag::empty(u);
    for &i in owners {
        tag.insert(&params.keys[i].0)?;
    }
    for e in &params.eavesdroppers {
        tag.insert(e)?;
    }
    Ok(tag)
}

/// Tag containing exactly the given owners.
fn owners_only(u: &Arc<ParticipantUniverse>, params: &DhParams, owners: &[usize]) -> Result<Tag> {
    let mut tag = Tag::empty(u);
    for &i in owners {
        tag.insert(&params.keys[i].0)?;
    }
    Ok(tag)
}

/// All size-`k` subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in start..n {
            prefix.push(i);
            go(i + 1, n, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Two-party agreement: the subset scheme with two owners.
pub fn gen_dh2(params: &DhParams) -> Result<Diagram> {
    if params.keys.len() != 2 {
        return Err(Error::bad_params(format!(
            "two-party agreement needs exactly 2 owners, got {}",
            params.keys.len()
        )));
    }
    gen_dh_subsets(params, 2)
}

/// Pairwise mesh: every pair of owners derives its own secret. This is
/// the subset scheme with groups of two.
pub fn gen_dh_pairwise(params: &DhParams) -> Result<Diagram> {
    gen_dh_subsets(params, 2)
}

/// Subset scheme: every intermediate value `g` raised to a proper subset
/// of fewer than `k` keys is broadcast; every size-`k` subset of owners
/// shares a secret only they hold.
pub fn gen_dh_subsets(params: &DhParams, k: usize) -> Result<Diagram> {
    let (universe, theory) = params.validate(2)?;
    let n = params.keys.len();
    if k < 2 || k > n {
        return Err(Error::bad_params(format!("group size {k} outside 2..={n}")));
    }
    let top = Tag::full(&universe);
    let mut nodes = vec![Node {
        id: "star".into(),
        object: AlgebraObject::Unit,
    }];
    let mut edges = Vec::new();

    // The base value and its broadcast.
    nodes.push(Node {
        id: "g".into(),
        object: AlgebraObject::Carrier,
    });
    edges.push(Edge {
        src: "star".into(),
        dst: "g".into(),
        arrow: AlgebraArrow::Select(params.g % params.p),
        tag: top.clone(),
    });

    for size in 1..=k {
        for subset in subsets(n, size) {
            let id = params.node_id(&subset);
            nodes.push(Node {
                id: id.clone(),
                object: AlgebraObject::Carrier,
            });
            // One exponentiation per member, from the subset without it.
            for (pos, &owner) in subset.iter().enumerate() {
                let mut rest = subset.clone();
                rest.remove(pos);
                edges.push(Edge {
                    src: params.node_id(&rest),
                    dst: id.clone(),
                    arrow: AlgebraArrow::Pow(params.keys[owner].1),
                    tag: owners_only(&universe, params, &[owner])?,
                });
            }
            // Intermediate values are broadcast; full groups keep theirs.
            let tag = if size < k {
                top.clone()
            } else {
                owners_only(&universe, params, &subset)?
            };
            edges.push(Edge {
                src: "star".into(),
                dst: id,
                arrow: AlgebraArrow::Select(params.value(&subset)),
                tag,
            });
        }
    }
    Diagram::build(universe, AlgebraTheory::ModExp(theory), nodes, edges)
}

/// Ring scheme: owner `i` repeatedly raises the value it received to its
/// key and passes the result to its successor, so the value for the
/// cyclic interval starting at `i` travels around the ring. Every owner
/// ends up with `g` raised to all keys.
pub fn gen_dh_ring(params: &DhParams) -> Result<Diagram> {
    let (universe, theory) = params.validate(3)?;
    let n = params.keys.len();
    let top = Tag::full(&universe);

    // Cyclic interval of length `len` starting at owner `start`.
    let interval =
        |start: usize, len: usize| -> Vec<usize> { (0..len).map(|o| (start + o) % n).collect() };

    let mut nodes = vec![
        Node {
            id: "star".into(),
            object: AlgebraObject::Unit,
        },
        Node {
            id: "g".into(),
            object: AlgebraObject::Carrier,
        },
    ];
    let mut edges = vec![Edge {
        src: "star".into(),
        dst: "g".into(),
        arrow: AlgebraArrow::Select(params.g % params.p),
        tag: top.clone(),
    }];

    // The full interval is one shared node, named from owner 0.
    let full_subset = interval(0, n);
    let full_id = params.node_id(&full_subset);
    nodes.push(Node {
        id: full_id.clone(),
        object: AlgebraObject::Carrier,
    });
    edges.push(Edge {
        src: "star".into(),
        dst: full_id.clone(),
        arrow: AlgebraArrow::Select(params.value(&full_subset)),
        tag: owners_only(&universe, params, &full_subset)?,
    });

    for start in 0..n {
        for len in 1..n {
            let subset = interval(start, len);
            let id = params.node_id(&subset);
            nodes.push(Node {
                id: id.clone(),
                object: AlgebraObject::Carrier,
            });
            // Dealer of the interval value is its last owner, who sends it
            // onward to the next owner around the ring; eavesdroppers see
            // every transmission.
            let last = subset[len - 1];
            let next = (last + 1) % n;
            edges.push(Edge {
                src: "star".into(),
                dst: id.clone(),
                arrow: AlgebraArrow::Select(params.value(&subset)),
                tag: owners_plus_eavesdroppers(&universe, params, &[last, next])?,
            });
            // Growing the interval by its next owner. The full interval is
            // the shared final node under its canonical name.
            let grown = interval(start, len + 1);
            let grown_id = if len + 1 == n {
                full_id.clone()
            } else {
                params.node_id(&grown)
            };
            let grower = grown[len];
            edges.push(Edge {
                src: id,
                dst: grown_id,
                arrow: AlgebraArrow::Pow(params.keys[grower].1),
                tag: owners_only(&universe, params, &[grower])?,
            });
        }
        // The first exponentiation of each chain starts at the base value.
        let first = interval(start, 1);
        edges.push(Edge {
            src: "g".into(),
            dst: params.node_id(&first),
            arrow: AlgebraArrow::Pow(params.keys[start].1),
            tag: owners_only(&universe, params, &[start])?,
        });
    }
    Diagram::build(universe, AlgebraTheory::ModExp(theory), nodes, edges)
}

/// Parameters of the commuting-pool agreement over a matrix monoid.
#[derive(Debug, Clone)]
pub struct CakeParams {
    pub theory: MatrixMonoidTheory,
    /// First participant and the element pool only they know.
    pub alice: String,
    pub alpha1: String,
    pub alpha2: String,
    /// Second participant and their pool.
    pub bob: String,
    pub beta1: String,
    pub beta2: String,
    /// Public middle element.
    pub gamma: String,
    pub eavesdroppers: Vec<String>,
}

/// Commuting-pool agreement: Alice wraps the public value in her pool
/// elements, Bob in his, and because the pools commute pointwise both
/// arrive at the same secret `alpha1 * beta1 * gamma * beta2 * alpha2`.
pub fn gen_cake(params: &CakeParams) -> Result<Diagram> {
    let t = &params.theory;
    let names: Vec<String> = [params.alice.clone(), params.bob.clone()]
        .into_iter()
        .chain(params.eavesdroppers.iter().cloned())
        .collect();
    let universe = ParticipantUniverse::new(names)?;
    let pool_a = [params.alpha1.clone(), params.alpha2.clone()];
    let pool_b = [params.beta1.clone(), params.beta2.clone()];
    check_pointwise_commuting(t, &pool_a, &pool_b)?;

    let a1 = t.resolve(&ElemRef::Named(params.alpha1.clone()))?;
    let a2 = t.resolve(&ElemRef::Named(params.alpha2.clone()))?;
    let b1 = t.resolve(&ElemRef::Named(params.beta1.clone()))?;
    let b2 = t.resolve(&ElemRef::Named(params.beta2.clone()))?;
    let gm = t.resolve(&ElemRef::Named(params.gamma.clone()))?;
    let m = t.modulus();
    // Wrapped values, as products applied right to left.
    let p_a = a1.mul(&gm, m).mul(&a2, m);
    let p_b = b1.mul(&gm, m).mul(&b2, m);
    let sigma = a1.mul(&b1, m).mul(&gm, m).mul(&b2, m).mul(&a2, m);

    let dot = |id: &str| Node {
        id: id.into(),
        object: AlgebraObject::Dot,
    };
    let tag_a = Tag::from_names(&universe, &[params.alice.as_str()])?;
    let tag_b = Tag::from_names(&universe, &[params.bob.as_str()])?;
    let tag_ab = crate::lattice::tag_join(&tag_a, &tag_b)?;
    let top = Tag::full(&universe);
    let named = |n: &str| AlgebraArrow::Elem(ElemRef::Named(n.into()));
    let lit = |m: Matrix| AlgebraArrow::Elem(ElemRef::Lit(m));

    let edge = |src: &str, dst: &str, arrow: AlgebraArrow, tag: &Tag| Edge {
        src: src.into(),
        dst: dst.into(),
        arrow,
        tag: tag.clone(),
    };
    let nodes = vec![
        dot("s"),
        dot("a1"),
        dot("a2"),
        dot("b1"),
        dot("b2"),
        dot("m1"),
        dot("m2"),
        dot("t"),
    ];
    let edges = vec![
        // Alice's wing: wrap, receive Bob's wrapped value, unwrap.
        edge("s", "a1", named(&params.alpha2), &tag_a),
        edge("a1", "a2", lit(p_b.clone()), &top),
        edge("a2", "t", named(&params.alpha1), &tag_a),
        // Bob's wing.
        edge("s", "b1", named(&params.beta2), &tag_b),
        edge("b1", "b2", lit(p_a.clone()), &top),
        edge("b2", "t", named(&params.beta1), &tag_b),
        // The public middle, reached from either wing.
        edge("a1", "m1", named(&params.beta2), &tag_b),
        edge("b1", "m1", named(&params.alpha2), &tag_a),
        edge("m1", "m2", named(&params.gamma), &top),
        edge("m2", "a2", named(&params.beta1), &tag_b),
        edge("m2", "b2", named(&params.alpha1), &tag_a),
        // The agreed secret.
        edge("s", "t", lit(sigma), &tag_ab),
    ];
    Diagram::build(
        universe,
        AlgebraTheory::MatrixMonoid(t.clone()),
        nodes,
        edges,
    )
}

/// A small worked instance over 2x2 matrices mod 5: diagonal pools
/// commute pointwise while the middle element commutes with neither.
pub fn cake_matrix_demo() -> Result<CakeParams> {
    let m = 5;
    let mut elements = BTreeMap::new();
    elements.insert(
        "alpha1".into(),
        Matrix::from_rows(&[vec![2, 0], vec![0, 1]], 2, m)?,
    );
    elements.insert(
        "alpha2".into(),
        Matrix::from_rows(&[vec![3, 0], vec![0, 1]], 2, m)?,
    );
    elements.insert(
        "beta1".into(),
        Matrix::from_rows(&[vec![1, 0], vec![0, 2]], 2, m)?,
    );
    elements.insert(
        "beta2".into(),
        Matrix::from_rows(&[vec![1, 0], vec![0, 4]], 2, m)?,
    );
    elements.insert(
        "gamma".into(),
        Matrix::from_rows(&[vec![1, 1], vec![1, 0]], 2, m)?,
    );
    let mut pools = BTreeMap::new();
    pools.insert(
        "A".to_string(),
        vec!["alpha1".to_string(), "alpha2".to_string()],
    );
    pools.insert(
        "B".to_string(),
        vec!["beta1".to_string(), "beta2".to_string()],
    );
    Ok(CakeParams {
        theory: MatrixMonoidTheory::new(m, 2, elements, pools)?,
        alice: "A".into(),
        alpha1: "alpha1".into(),
        alpha2: "alpha2".into(),
        bob: "B".into(),
        beta1: "beta1".into(),
        beta2: "beta2".into(),
        gamma: "gamma".into(),
        eavesdroppers: vec!["E".into()],
    })
}
