//! Property suite over seeded random commuting diagrams.
//!
//! Each property rebuilds its diagram from a seed through the corpus
//! generators, so failures shrink to a reproducible seed and shape.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aediag::analysis::{classify_events, restrict_view, EventClass};
use aediag::corpus::{grow_tags, random_commuting_diagram, random_monoid_diagram, CorpusConfig};
use aediag::diagram::{check_commutes, diagram_leq, Diagram};
use aediag::ifo::{check_ifo, complete_ifo, strict_cycle_check};
use aediag::io::{parse_diagram, serialize_diagram};
use aediag::lattice::{tag_leq, Tag};

fn corpus_diagram(seed: u64, carriers: usize, participants: usize, density: f64) -> Diagram {
    let cfg = CorpusConfig {
        carriers,
        participants,
        edge_density: density,
        select_density: 0.6,
        tag_density: 0.4,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_commuting_diagram(&mut rng, &cfg).expect("corpus generation succeeds")
}

fn tags_of(d: &Diagram) -> Vec<Tag> {
    d.edges().iter().map(|e| e.tag.clone()).collect()
}

proptest! {
    #[test]
    fn completion_is_extensive_idempotent_and_sound(
        seed in 0u64..10_000,
        carriers in 3usize..=7,
        participants in 1usize..=4,
        density in prop::sample::select(vec![0.2, 0.4, 0.7]),
    ) {
        let d = corpus_diagram(seed, carriers, participants, density);
        prop_assert!(check_commutes(&d).unwrap().ok);
        let completed = complete_ifo(&d).unwrap();
        // Extensive: every tag grows pointwise.
        for (before, after) in d.edges().iter().zip(completed.edges()) {
            prop_assert!(tag_leq(&before.tag, &after.tag).unwrap());
        }
        // Sound: the result satisfies the flow condition.
        prop_assert!(check_ifo(&completed).unwrap().ok);
        // Idempotent: completing again changes nothing.
        let twice = complete_ifo(&completed).unwrap();
        prop_assert_eq!(tags_of(&completed), tags_of(&twice));
    }

    #[test]
    fn completion_is_monotone(
        seed in 0u64..10_000,
        carriers in 3usize..=7,
        participants in 2usize..=4,
        grow in prop::sample::select(vec![0.2, 0.5]),
    ) {
        let d = corpus_diagram(seed, carriers, participants, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let bigger = grow_tags(&mut rng, &d, grow).unwrap();
        let low = complete_ifo(&d).unwrap();
        let high = complete_ifo(&bigger).unwrap();
        for (a, b) in low.edges().iter().zip(high.edges()) {
            prop_assert!(tag_leq(&a.tag, &b.tag).unwrap());
        }
    }

    #[test]
    fn documents_round_trip(
        seed in 0u64..10_000,
        carriers in 3usize..=7,
        participants in 1usize..=4,
    ) {
        let d = corpus_diagram(seed, carriers, participants, 0.4);
        let text = serialize_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(serialize_diagram(&back), text);
    }

    #[test]
    fn monoid_documents_commute_and_round_trip(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_monoid_diagram(&mut rng).unwrap();
        prop_assert!(check_commutes(&d).unwrap().ok);
        let text = serialize_diagram(&d);
        prop_assert_eq!(&parse_diagram(&text).unwrap(), &d);
    }

    #[test]
    fn views_of_completed_diagrams_nest_and_stay_sound(
        seed in 0u64..10_000,
        carriers in 3usize..=6,
        who_bits in 0u8..16,
        more_bits in 0u8..16,
    ) {
        let d = corpus_diagram(seed, carriers, 4, 0.4);
        let completed = complete_ifo(&d).unwrap();
        let names = completed.universe().names();
        let pick = |bits: u8| -> Tag {
            let chosen: Vec<&str> = names
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, n)| n.as_str())
                .collect();
            Tag::from_names(completed.universe(), &chosen).unwrap()
        };
        let who = pick(who_bits);
        let wider = pick(who_bits | more_bits);
        let small = restrict_view(&completed, &who).unwrap();
        let large = restrict_view(&completed, &wider).unwrap();
        // Views satisfy the flow condition and refine the original.
        prop_assert!(check_ifo(&small).unwrap().ok);
        prop_assert!(diagram_leq(&small, &completed).unwrap());
        // A larger audience sees at most as much: more members, fewer edges.
        prop_assert!(diagram_leq(&large, &small).unwrap());
    }

    #[test]
    fn completed_diagrams_have_no_strict_cycles(
        seed in 0u64..10_000,
        carriers in 3usize..=7,
    ) {
        let d = corpus_diagram(seed, carriers, 4, 0.4);
        let completed = complete_ifo(&d).unwrap();
        prop_assert!(strict_cycle_check(&completed).unwrap());
    }

    #[test]
    fn event_reports_are_internally_consistent(
        seed in 0u64..10_000,
        carriers in 3usize..=7,
    ) {
        let d = corpus_diagram(seed, carriers, 4, 0.4);
        let completed = complete_ifo(&d).unwrap();
        let report = classify_events(&completed).unwrap();
        for e in &report.events {
            let tag = &completed.edges()[completed
                .edges()
                .iter()
                .position(|x| x.src == e.edge.src && x.dst == e.edge.dst)
                .unwrap()]
            .tag;
            prop_assert!(tag_leq(&e.explained, tag).unwrap());
            match e.class {
                EventClass::Primitive => prop_assert!(e.routes.is_empty()),
                EventClass::Computation => {
                    prop_assert_eq!(&e.explained, tag);
                    prop_assert!(e.newly_informed.is_empty());
                }
                EventClass::Announcement => {
                    prop_assert!(!e.newly_informed.is_empty());
                    prop_assert!(e.explained != *tag);
                }
            }
            // Every route meet is non-empty and below the explained join.
            for r in &e.routes {
                prop_assert!(!r.meet.is_empty());
                prop_assert!(tag_leq(&r.meet, &e.explained).unwrap());
            }
        }
    }
}
