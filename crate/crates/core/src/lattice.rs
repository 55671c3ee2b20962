//! Finite powerset lattice of participant sets.
//!
//! A [`ParticipantUniverse`] fixes an ordered list of participant names.
//! A [`Tag`] is a subset of one universe, packed into a `u64` bitset, with
//! meet (intersection), join (union) and the subset order. Operations on
//! tags from different universes are rejected rather than coerced.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Hard cap on universe size so a tag fits in a `u64` bitset.
pub const MAX_PARTICIPANTS: usize = 64;

/// An ordered, duplicate-free list of participant names.
///
/// Universes are shared behind an [`Arc`]; every tag keeps a handle to the
/// universe it lives in. Two universes are interchangeable exactly when
/// their name lists are equal, order included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticipantUniverse {
    names: Vec<String>,
}

impl ParticipantUniverse {
    /// Builds a universe from names, keeping the given order.
    pub fn new<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidUniverse {
                reason: "universe must name at least one participant".into(),
            });
        }
        if names.len() > MAX_PARTICIPANTS {
            return Err(Error::InvalidUniverse {
                reason: format!(
                    "universe has {} participants, maximum is {MAX_PARTICIPANTS}",
                    names.len()
                ),
            });
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidUniverse {
                    reason: "participant names must be non-empty".into(),
                });
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidUniverse {
                    reason: format!("duplicate participant {name:?}"),
                });
            }
        }
        Ok(Arc::new(ParticipantUniverse { names }))
    }

    /// Number of participants.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Always false: empty universes are rejected at construction.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Participant names in universe order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Position of a name, if present.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn render(&self) -> String {
        format!("{{{}}}", self.names.join(","))
    }
}

/// Checks that two universes agree, with a cheap pointer fast path.
pub(crate) fn same_universe(
    a: &Arc<ParticipantUniverse>,
    b: &Arc<ParticipantUniverse>,
) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::UniverseMismatch {
            left: a.render(),
            right: b.render(),
        })
    }
}

/// A subset of one participant universe.
#[derive(Debug, Clone)]
pub struct Tag {
    universe: Arc<ParticipantUniverse>,
    bits: u64,
}

impl Tag {
    /// The empty set, the lattice bottom.
    pub fn empty(universe: &Arc<ParticipantUniverse>) -> Tag {
        Tag {
            universe: Arc::clone(universe),
            bits: 0,
        }
    }

    /// The whole universe, the lattice top.
    pub fn full(universe: &Arc<ParticipantUniverse>) -> Tag {
        let len = universe.len();
        let bits = if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        Tag {
            universe: Arc::clone(universe),
            bits,
        }
    }

    /// Builds a tag from member names.
    pub fn from_names<S: AsRef<str>>(
        universe: &Arc<ParticipantUniverse>,
        names: &[S],
    ) -> Result<Tag> {
        let mut tag = Tag::empty(universe);
        for name in names {
            tag.insert(name.as_ref())?;
        }
        Ok(tag)
    }

    /// Adds one participant by name.
    pub fn insert(&mut self, name: &str) -> Result<()> {
        match self.universe.index_of(name) {
            Some(i) => {
                self.bits |= 1u64 << i;
                Ok(())
            }
            None => Err(Error::UnknownParticipant { name: name.into() }),
        }
    }

    /// The universe this tag lives in.
    pub fn universe(&self) -> &Arc<ParticipantUniverse> {
        &self.universe
    }

    /// Membership test by name; false for names outside the universe.
    pub fn contains(&self, name: &str) -> bool {
        match self.universe.index_of(name) {
            Some(i) => self.bits & (1u64 << i) != 0,
            None => false,
        }
    }

    /// Member names in universe order.
    pub fn members(&self) -> Vec<&str> {
        self.universe
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| self.bits & (1u64 << i) != 0)
            .map(|(_, n)| n.as_str())
            .collect()
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// True for the lattice bottom.
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// True for the lattice top.
    pub fn is_full(&self) -> bool {
        self.bits == Tag::full(&self.universe).bits
    }

    pub(crate) fn bits(&self) -> u64 {
        self.bits
    }

    pub(crate) fn from_bits(universe: &Arc<ParticipantUniverse>, bits: u64) -> Tag {
        debug_assert_eq!(bits & !Tag::full(universe).bits, 0);
        Tag {
            universe: Arc::clone(universe),
            bits,
        }
    }
}

impl PartialEq for Tag {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
            && (Arc::ptr_eq(&self.universe, &other.universe) || self.universe == other.universe)
    }
}

impl Eq for Tag {}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.members().join(","))
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let members = self.members();
        let mut seq = serializer.serialize_seq(Some(members.len()))?;
        for name in members {
            seq.serialize_element(name)?;
        }
        seq.end()
    }
}

/// Meet: set intersection.
pub fn tag_meet(a: &Tag, b: &Tag) -> Result<Tag> {
    same_universe(&a.universe, &b.universe)?;
    Ok(Tag::from_bits(&a.universe, a.bits & b.bits))
}

/// Join: set union.
pub fn tag_join(a: &Tag, b: &Tag) -> Result<Tag> {
    same_universe(&a.universe, &b.universe)?;
    Ok(Tag::from_bits(&a.universe, a.bits | b.bits))
}

/// Order: subset inclusion, `a <= b`.
pub fn tag_leq(a: &Tag, b: &Tag) -> Result<bool> {
    same_universe(&a.universe, &b.universe)?;
    Ok(a.bits & !b.bits == 0)
}

/// Set difference `a \ b`.
pub fn tag_minus(a: &Tag, b: &Tag) -> Result<Tag> {
    same_universe(&a.universe, &b.universe)?;
    Ok(Tag::from_bits(&a.universe, a.bits & !b.bits))
}
