use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sqd_core::bits::{ComponentSet, IndexSet};
use sqd_core::diagnosis::DiagnosisSet;
use sqd_core::logic::{parse_formula, Formula, KnowledgeBase, Reasoner};
use sqd_core::measures::{entropy_measure, split_measure, QcmKind, QcmSpec, QsmKind, QsmSpec, SentenceCost};
use sqd_core::minimize::quick_xplain;
use sqd_core::p1::optimize_qpartition;
use sqd_core::p2::minimal_hitting_sets;
use sqd_core::qspace::{
    canonical_components, enumerate_cqps, partition_of_components, reachable_cqps, trait_classes, QPartition, Query,
};

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop::sample::select(&ATOMS[..]).prop_map(Formula::atom);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn assignments() -> impl Iterator<Item = BTreeMap<String, bool>> {
    (0u32..1 << ATOMS.len()).map(|m| ATOMS.iter().enumerate().map(|(i, a)| (a.to_string(), m & (1 << i) != 0)).collect())
}

/// Truth-table entailment over the fixed atom set.
fn tt_entails(kb: &[Formula], goal: &Formula) -> bool {
    assignments().all(|v| !kb.iter().all(|f| f.eval(&v)) || goal.eval(&v))
}

/// Random ⊆-antichain of component sets with positive masses.
fn diagnosis_set(max_diags: usize, comps: usize) -> impl Strategy<Value = DiagnosisSet> {
    prop::collection::vec((prop::collection::btree_set(0..comps, 1..=4), 1u32..20), 2..=max_diags).prop_filter_map(
        "need an antichain of at least two",
        move |raw| {
            let mut sets: Vec<(ComponentSet, f64)> = Vec::new();
            for (s, w) in raw {
                let c = ComponentSet::from_indices(comps, s);
                if sets.iter().all(|(o, _)| !o.is_subset(&c) && !c.is_subset(o)) {
                    sets.push((c, w as f64));
                }
            }
            (sets.len() >= 2).then(|| {
                let (d, m): (Vec<_>, Vec<_>) = sets.into_iter().unzip();
                DiagnosisSet::with_masses(d, m, true).unwrap()
            })
        },
    )
}

/// Every distinct partition induced by a non-empty proper seed with a
/// non-empty canonical query.
fn brute_force_cqps(d: &DiagnosisSet) -> BTreeSet<QPartition> {
    let n = d.len();
    (1u32..(1 << n) - 1)
        .filter_map(|m| {
            let seed = IndexSet::from_indices(n, (0..n).filter(|i| m & (1 << i) != 0));
            let x = canonical_components(d, &seed).unwrap();
            (!x.is_empty()).then(|| partition_of_components(d, &x))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_parse_round_trip(f in formula()) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn reasoner_matches_truth_table(kb in prop::collection::vec(formula(), 0..4), goal in formula()) {
        let r = Reasoner::new();
        let k: KnowledgeBase = kb.iter().cloned().collect();
        let consistent = assignments().any(|v| kb.iter().all(|f| f.eval(&v)));
        prop_assert_eq!(r.is_consistent(&k), consistent);
        prop_assert_eq!(r.entails(&k, [&goal]), tt_entails(&kb, &goal));
    }

    #[test]
    fn index_set_matches_btree(a in prop::collection::btree_set(0usize..40, 0..12), b in prop::collection::btree_set(0usize..40, 0..12)) {
        let (x, y) = (IndexSet::from_indices(40, a.iter().copied()), IndexSet::from_indices(40, b.iter().copied()));
        let to = |s: &IndexSet| s.iter().collect::<BTreeSet<_>>();
        prop_assert_eq!(to(&x.union(&y)), a.union(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(to(&x.intersection(&y)), a.intersection(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(to(&x.difference(&y)), a.difference(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(x.is_subset(&y), a.is_subset(&b));
        prop_assert_eq!(x.cmp(&y), a.iter().collect::<Vec<_>>().cmp(&b.iter().collect::<Vec<_>>()));
    }

    #[test]
    fn quick_xplain_is_minimal(gens in prop::collection::vec(1u32..256, 1..4)) {
        let holds = |s: &[u32]| {
            let mask: u32 = s.iter().map(|i| 1 << i).sum();
            gens.iter().any(|g| g & mask == *g)
        };
        let items: Vec<u32> = (0..8).collect();
        let got = quick_xplain(&items, holds).unwrap();
        prop_assert!(holds(&got));
        for i in 0..got.len() {
            let mut smaller = got.clone();
            smaller.remove(i);
            prop_assert!(!holds(&smaller));
        }
    }

    #[test]
    fn entropy_shape(x in 0.0f64..=1.0, y in 0.0f64..=0.5) {
        let m = entropy_measure(x);
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!((m - entropy_measure(1.0 - x)).abs() < 1e-12);
        if x < y && y <= 0.5 && y - x > 1e-9 {
            prop_assert!(entropy_measure(x) > entropy_measure(y));
        }
    }

    #[test]
    fn split_is_symmetric(d in diagnosis_set(6, 8)) {
        for p in enumerate_cqps(&d).unwrap() {
            let swapped = QPartition { dplus: p.dminus.clone(), dminus: p.dplus.clone(), dzero: p.dzero.clone() };
            prop_assert_eq!(split_measure(&p), split_measure(&swapped));
        }
    }

    #[test]
    fn card_is_sum_of_unit_costs(fs in prop::collection::btree_set(formula(), 1..6)) {
        let q = Query::from_sentences(fs);
        let unit = QcmSpec { kind: QcmKind::Sum, cost: SentenceCost::Unit };
        prop_assert_eq!(unit.value(&q).unwrap(), QcmSpec::new(QcmKind::Card).value(&q).unwrap());
    }

    #[test]
    fn successor_search_reaches_every_cqp(d in diagnosis_set(6, 8)) {
        let all = enumerate_cqps(&d).unwrap();
        prop_assert_eq!(&reachable_cqps(&d).unwrap(), &all);
        prop_assert_eq!(all.iter().cloned().collect::<BTreeSet<_>>(), brute_force_cqps(&d));
        for p in &all {
            prop_assert!(p.is_canonical() && p.is_query_partition());
            // minimal-trait classes are exactly those not strictly above another
            let tc = trait_classes(&d, p).unwrap();
            for c in &tc.0 {
                prop_assert!(!c.components.is_empty());
                prop_assert_eq!(c.minimal, !tc.0.iter().any(|o| o.components.is_proper_subset(&c.components)));
            }
        }
    }

    #[test]
    fn partition_search_is_complete(d in diagnosis_set(6, 8)) {
        let all = enumerate_cqps(&d).unwrap();
        for kind in [QsmKind::Ent, QsmKind::Spl] {
            let qsm = QsmSpec::new(kind, 0.0).unwrap();
            let r = optimize_qpartition(&d, qsm, None).unwrap();
            prop_assert!(all.contains(&r.partition));
            let min = all.iter().map(|p| qsm.value(p, &d).unwrap()).fold(f64::INFINITY, f64::min);
            prop_assert!((r.m - min).abs() < 1e-9, "{:?}: got {} want {}", kind, r.m, min);
        }
    }

    #[test]
    fn hitting_sets_match_subset_enumeration(sets in prop::collection::vec(prop::collection::btree_set(0usize..7, 1..4), 1..5)) {
        let sets: Vec<ComponentSet> = sets.into_iter().map(|s| ComponentSet::from_indices(7, s)).collect();
        let hits = |h: &ComponentSet| sets.iter().all(|s| !s.is_disjoint(h));
        let all: Vec<ComponentSet> = (0u32..1 << 7)
            .map(|m| ComponentSet::from_indices(7, (0..7).filter(|i| m & (1 << i) != 0)))
            .filter(|h| hits(h))
            .collect();
        let minimal: BTreeSet<ComponentSet> =
            all.iter().filter(|h| !all.iter().any(|g| g.is_proper_subset(h))).cloned().collect();
        prop_assert_eq!(minimal_hitting_sets(&sets).into_iter().collect::<BTreeSet<_>>(), minimal);
    }
}
