//! Acceptance gate. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails.
//!
//! Run with `cargo test -p sqd --test acceptance -- --nocapture`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use sqd::bench::{measure, random_corpus, summarize, write_csv, Measurement};
use sqd::format::parse_dpi;
use sqd::options::{Qsm, QueryOptions};
use sqd_core::bits::{ComponentSet, IndexSet};
use sqd_core::diagnosis::{leading_diagnoses, DiagnosisSet, SearchOrder};
use sqd_core::dpi::Dpi;
use sqd_core::logic::{parse_formula, Formula, Reasoner};
use sqd_core::measures::{QcmKind, QcmSpec, QsmKind, QsmSpec};
use sqd_core::p1::optimize_qpartition;
use sqd_core::p2::optimize_query_for_qpartition;
use sqd_core::p3::{expand_query, opti_minimize_query, P3Config};
use sqd_core::qspace::{
    canonical_query, count_cqps, disc_components, enumerate_cqps, partition_canonical, partition_reasoned, reachable_cqps,
    successors, trait_classes, QPartition,
};
use sqd_core::random::{random_dpi, RandomDpiConfig};
use sqd_core::session::{run_session, Oracle};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn example() -> Dpi {
    parse_dpi(include_str!("../data/example.dpi.json")).unwrap()
}

fn comps(dpi: &Dpi, names: &[&str]) -> ComponentSet {
    dpi.component_set(names.iter().copied()).unwrap()
}

fn qp(size: usize, plus: &[usize], minus: &[usize]) -> QPartition {
    QPartition {
        dplus: IndexSet::from_indices(size, plus.iter().copied()),
        dminus: IndexSet::from_indices(size, minus.iter().copied()),
        dzero: IndexSet::empty(size),
    }
}

fn beh(dpi: &Dpi, x: &ComponentSet) -> BTreeSet<Formula> {
    x.iter().map(|c| dpi.behavior(c).clone()).collect()
}

fn parse_set(v: &[&str]) -> BTreeSet<Formula> {
    v.iter().map(|s| parse_formula(s).unwrap()).collect()
}

fn golden() -> Outcome {
    let start = Instant::now();
    let dpi = example();
    let r = Reasoner::new();
    let d = leading_diagnoses(&dpi, &r, 10, SearchOrder::UniformCostProbability, 0).map_err(|e| e.to_string())?;
    let want = [comps(&dpi, &["c1", "c2", "c5"]), comps(&dpi, &["c1", "c3", "c5"]), comps(&dpi, &["c3", "c4", "c5"])];
    ensure!(d.diagnoses() == want, "diagnoses {:?}", d.diagnoses());

    ensure!(disc_components(&d) == comps(&dpi, &["c1", "c2", "c3", "c4"]), "disc");
    let p1 = qp(3, &[0], &[1, 2]);
    let q1 = canonical_query(&dpi, &d, &IndexSet::from_indices(3, [0])).unwrap().ok_or("no canonical query for {D1}")?;
    ensure!(q1.components == Some(comps(&dpi, &["c3", "c4"])), "canonical query of {{D1}}");
    ensure!(partition_canonical(&d, &q1).unwrap() == p1, "partition of canonical query");
    ensure!(canonical_query(&dpi, &d, &IndexSet::from_indices(3, [0, 2])).unwrap().is_none(), "{{D1,D3}} has a query");

    let tc = trait_classes(&d, &p1).unwrap();
    let classes: BTreeSet<(ComponentSet, bool)> = tc.0.iter().map(|c| (c.components.clone(), c.minimal)).collect();
    let want: BTreeSet<_> = [(comps(&dpi, &["c3"]), true), (comps(&dpi, &["c3", "c4"]), false)].into();
    ensure!(classes == want, "trait classes {classes:?}");
    ensure!(successors(&d, &p1).unwrap() == [qp(3, &[0, 1], &[2])], "successors");
    ensure!(count_cqps(&d).unwrap() == 5 && enumerate_cqps(&d).unwrap().len() == 5, "cqp count");

    let card = QcmSpec::new(QcmKind::Card);
    let q = optimize_query_for_qpartition(&dpi, &d, &p1, &card).map_err(|e| e.to_string())?;
    ensure!(q.sentences == beh(&dpi, &comps(&dpi, &["c3"])), "P2 on first partition: {:?}", q.sentences);
    let p3 = qp(3, &[1], &[0, 2]);
    let q = optimize_query_for_qpartition(&dpi, &d, &p3, &card).map_err(|e| e.to_string())?;
    ensure!(q.sentences == beh(&dpi, &comps(&dpi, &["c2", "c4"])), "P2 on third partition: {:?}", q.sentences);

    let exp = expand_query(&dpi, &d, &p1, &P3Config::default(), &r).map_err(|e| e.to_string())?;
    ensure!(exp.added == parse_set(&["B -> H", "F -> H", "L -> H"]), "expansion {:?}", exp.added);
    let q = opti_minimize_query(&dpi, &d, &p1, &exp, &r).map_err(|e| e.to_string())?;
    ensure!(q.sentences == parse_set(&["F -> H"]), "minimized {:?}", q.sentences);

    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    Ok(format!("all exact, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn timing_corpus() -> Vec<Measurement> {
    let config = RandomDpiConfig { components: 30, atoms: Some(12), negatives: 6, ..RandomDpiConfig::default() };
    let options = QueryOptions { leading: 20, enhance: true, ..QueryOptions::default() };
    random_corpus(&config, 10, 20, 20, 0)
        .into_iter()
        .map(|(seed, dpi)| measure(&format!("random:{seed}"), &format!("r{seed}"), &dpi, &options).unwrap())
        .collect()
}

fn zero_inference(ms: &[Measurement]) -> Outcome {
    ensure!(ms.len() == 10, "only {} DPIs with 20 diagnoses", ms.len());
    for m in ms {
        let r = &m.row;
        ensure!(r.diagnoses == 20, "{}: |D| = {}", r.name, r.diagnoses);
        ensure!(r.reasoner_calls_p1p2 == 0, "{}: {} reasoner calls in P1+P2", r.name, r.reasoner_calls_p1p2);
        ensure!(r.time_p1p2_ms < 100.0, "{}: P1+P2 took {:.2} ms", r.name, r.time_p1p2_ms);
        ensure!(r.time_p3_ms < 10_000.0, "{}: P3 took {:.0} ms", r.name, r.time_p3_ms);
        ensure!(
            r.reasoner_calls_p3 <= m.p3_call_ceiling,
            "{}: P3 used {} calls, ceiling {}",
            r.name,
            r.reasoner_calls_p3,
            m.p3_call_ceiling
        );
    }
    let s = summarize(ms);
    Ok(format!(
        "{} runs, 0 calls in P1+P2, max P1+P2 {:.3} ms, max P3 {:.1} ms",
        s.rows, s.max_time_p1p2_ms, s.max_time_p3_ms
    ))
}

/// Truth tables over at most seven atoms, one bit per assignment.
struct Truth {
    atoms: Vec<String>,
    cache: HashMap<Formula, u128>,
}

impl Truth {
    fn new(dpi: &Dpi) -> Self {
        let mut atoms = BTreeSet::new();
        let measurements = dpi.pos().iter().chain(dpi.neg()).flatten();
        for f in dpi.behaviors().iter().chain(dpi.sd_extra()).chain(dpi.obs()).chain(measurements) {
            atoms.extend(f.atoms());
        }
        assert!(atoms.len() <= 7, "too many atoms for a 128-row truth table");
        Self { atoms: atoms.into_iter().collect(), cache: HashMap::new() }
    }

    fn rows(&self) -> u128 {
        if self.atoms.len() == 7 { u128::MAX } else { (1u128 << (1 << self.atoms.len())) - 1 }
    }

    fn mask(&mut self, f: &Formula) -> u128 {
        if let Some(&m) = self.cache.get(f) {
            return m;
        }
        let mut m = 0u128;
        for row in 0..1u32 << self.atoms.len() {
            let v: BTreeMap<String, bool> =
                self.atoms.iter().enumerate().map(|(i, a)| (a.clone(), row & (1 << i) != 0)).collect();
            if f.eval(&v) {
                m |= 1 << row;
            }
        }
        self.cache.insert(f.clone(), m);
        m
    }

    fn all<'a>(&mut self, fs: impl IntoIterator<Item = &'a Formula>) -> u128 {
        let mut m = self.rows();
        for f in fs {
            m &= self.mask(f);
        }
        m
    }
}

/// Partition by truth tables: `D+` entails `x`, `D-` is inconsistent with
/// `x` or entails a negative measurement with it.
fn tt_partition(truth: &mut Truth, dpi: &Dpi, d: &DiagnosisSet, x: &BTreeSet<Formula>) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let xm = truth.all(x);
    let negs: Vec<u128> = dpi.neg().iter().map(|n| truth.all(n)).collect();
    let (mut plus, mut minus, mut zero) = (Vec::new(), Vec::new(), Vec::new());
    for (i, delta) in d.diagnoses().iter().enumerate() {
        let models = truth.all(dpi.sdaa(delta).iter());
        let with = models & xm;
        if models & !xm == 0 {
            plus.push(i);
        } else if with == 0 || negs.iter().any(|n| with & !n == 0) {
            minus.push(i);
        } else {
            zero.push(i);
        }
    }
    (plus, minus, zero)
}

fn split(p: &QPartition) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    (p.dplus.to_vec(), p.dminus.to_vec(), p.dzero.to_vec())
}

fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (0u32..1 << items.len()).map(move |m| (0..items.len()).filter(|i| m & (1 << i) != 0).map(|i| items[i].clone()).collect())
}

#[derive(Default)]
struct OracleStats {
    instances: usize,
    cqps: usize,
    cqs: usize,
    p2_checks: usize,
    p3_checks: usize,
    preferred_oracle_skipped: usize,
    reasoned_only: usize,
}

fn oracle_instance(dpi: &Dpi, d: &DiagnosisSet, stats: &mut OracleStats) -> Result<(), String> {
    let n = d.len();
    let r = Reasoner::new();
    let mut truth = Truth::new(dpi);
    let sets: Vec<BTreeSet<usize>> = d.diagnoses().iter().map(|x| x.iter().collect()).collect();
    let union: BTreeSet<usize> = sets.iter().flatten().copied().collect();
    let inter: BTreeSet<usize> = union.iter().copied().filter(|c| sets.iter().all(|s| s.contains(c))).collect();
    let disc: BTreeSet<usize> = union.difference(&inter).copied().collect();

    // canonical partitions from every seed
    let mut brute = BTreeSet::new();
    for mask in 1u32..(1 << n) - 1 {
        let seed: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let used: BTreeSet<usize> = seed.iter().flat_map(|&i| sets[i].iter().copied()).collect();
        let x: BTreeSet<usize> = disc.difference(&used).copied().collect();
        if x.is_empty() {
            continue;
        }
        let plus: Vec<usize> = (0..n).filter(|&i| sets[i].is_disjoint(&x)).collect();
        let minus: Vec<usize> = (0..n).filter(|&i| !sets[i].is_disjoint(&x)).collect();
        let q = canonical_query(dpi, d, &IndexSet::from_indices(n, seed.iter().copied()))
            .map_err(|e| e.to_string())?
            .ok_or("canonical query missing")?;
        let by_components = split(&partition_canonical(d, &q).map_err(|e| e.to_string())?);
        let by_reasoner = split(&partition_reasoned(dpi, &r, d, &q.sentences.iter().cloned().collect::<Vec<_>>()));
        let by_tt = tt_partition(&mut truth, dpi, d, &q.sentences);
        ensure!(by_components == (plus.clone(), minus.clone(), vec![]), "canonical partition of seed {seed:?}");
        ensure!(by_reasoner == by_components, "reasoned partition differs for seed {seed:?}");
        ensure!(by_tt == by_components, "truth-table partition differs for seed {seed:?}");
        stats.cqs += 1;
        brute.insert((plus, minus));
    }
    let reach: BTreeSet<(Vec<usize>, Vec<usize>)> = reachable_cqps(d)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| (p.dplus.to_vec(), p.dminus.to_vec()))
        .collect();
    ensure!(reach == brute, "reachable {reach:?} vs seeds {brute:?}");
    stats.cqps += brute.len();
    let cqps = enumerate_cqps(d).map_err(|e| e.to_string())?;

    // P1 against the exhaustive minimum
    let prob = |idx: &[usize]| idx.iter().map(|&i| d.probability(i)).sum::<f64>();
    let ent = |p: f64| {
        let t = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
        1.0 + t(p) + t(1.0 - p)
    };
    let min_ent = brute.iter().map(|(p, _)| ent(prob(p))).fold(f64::INFINITY, f64::min);
    let min_spl = brute.iter().map(|(p, m)| p.len().abs_diff(m.len()) as f64).fold(f64::INFINITY, f64::min);
    let mut p1_results = Vec::new();
    for (kind, min) in [(QsmKind::Ent, min_ent), (QsmKind::Spl, min_spl)] {
        let res = optimize_qpartition(d, QsmSpec::new(kind, 0.0).unwrap(), None).map_err(|e| e.to_string())?;
        ensure!((res.m - min).abs() < 1e-9, "{kind:?}: P1 found {} but minimum is {min}", res.m);
        ensure!(brute.contains(&(res.partition.dplus.to_vec(), res.partition.dminus.to_vec())), "P1 result is no CQP");
        p1_results.push(res.partition);
    }

    // P2 on every CQP and cost measure
    for p in &cqps {
        let plus_union: BTreeSet<usize> = p.dplus.iter().flat_map(|i| sets[i].iter().copied()).collect();
        let traits: Vec<BTreeSet<usize>> = p.dminus.iter().map(|i| sets[i].difference(&plus_union).copied().collect()).collect();
        let allowed: Vec<usize> = disc.difference(&plus_union).copied().collect();
        let hits = |x: &BTreeSet<usize>| traits.iter().all(|t| !t.is_disjoint(x));
        for kind in [QcmKind::Sum, QcmKind::Max, QcmKind::Card] {
            let qcm = QcmSpec::new(kind);
            let cost = |x: &BTreeSet<usize>| {
                let costs: Vec<u64> = x.iter().map(|&c| qcm.sentence_cost(dpi.behavior(c))).collect();
                match kind {
                    QcmKind::Sum => costs.iter().sum(),
                    QcmKind::Max => costs.iter().copied().max().unwrap_or(0),
                    QcmKind::Card => costs.len() as u64,
                }
            };
            let best = subsets(&allowed)
                .map(|v| v.into_iter().collect::<BTreeSet<_>>())
                .filter(|x| hits(x))
                .map(|x| cost(&x))
                .min()
                .ok_or("no hitting set")?;
            let q = optimize_query_for_qpartition(dpi, d, p, &qcm).map_err(|e| e.to_string())?;
            let x: BTreeSet<usize> = q.components.as_ref().ok_or("P2 query without components")?.iter().collect();
            ensure!(hits(&x), "{kind:?}: {x:?} misses a trait");
            for c in &x {
                let mut smaller = x.clone();
                smaller.remove(c);
                ensure!(!hits(&smaller), "{kind:?}: {x:?} is not minimal");
            }
            ensure!(cost(&x) == best, "{kind:?}: cost {} but optimum {best}", cost(&x));
            ensure!(partition_canonical(d, &q).map_err(|e| e.to_string())? == *p, "{kind:?}: canonical partition changed");
            let sentences: Vec<Formula> = q.sentences.iter().cloned().collect();
            ensure!(partition_reasoned(dpi, &r, d, &sentences) == *p, "{kind:?}: reasoned partition changed");
            ensure!(tt_partition(&mut truth, dpi, d, &q.sentences) == split(p), "{kind:?}: truth-table partition changed");
            stats.p2_checks += 1;
        }
    }

    // P3 on the partitions chosen by P1
    let cqp_set: BTreeSet<(Vec<usize>, Vec<usize>)> = brute;
    for p in &p1_results {
        let cfg = P3Config::default();
        let exp = expand_query(dpi, d, p, &cfg, &r).map_err(|e| e.to_string())?;
        let u: BTreeSet<Formula> = dpi.sdaa(&d.union()).iter().cloned().collect();
        let with_k: BTreeSet<Formula> = u.iter().chain(&exp.canonical.sentences).cloned().collect();
        let models_k = truth.all(&with_k);
        ensure!(models_k != 0, "background with canonical query is inconsistent");
        let models_u = truth.all(&u);
        for f in &exp.added {
            let fm = truth.mask(f);
            ensure!(models_k & !fm == 0, "{f} is not entailed");
            ensure!(models_u & !fm != 0, "{f} is entailed by the background alone");
        }
        let expanded = exp.expanded();
        ensure!(tt_partition(&mut truth, dpi, d, &expanded) == split(p), "expansion changes the partition");
        let q = opti_minimize_query(dpi, d, p, &exp, &r).map_err(|e| e.to_string())?;
        ensure!(q.sentences.is_subset(&expanded), "minimized query leaves the expansion");
        ensure!(tt_partition(&mut truth, dpi, d, &q.sentences) == split(p), "minimized query changes the partition");
        let found: Vec<Formula> = q.sentences.iter().cloned().collect();
        for sub in subsets(&found).filter(|s| s.len() < found.len()) {
            let sub: BTreeSet<Formula> = sub.into_iter().collect();
            ensure!(tt_partition(&mut truth, dpi, d, &sub) != split(p), "proper subset {sub:?} also preserves it");
        }

        // exhaustive search for a preferred-only subset
        let preferred: Vec<Formula> = exp.preferred.clone();
        if preferred.len() > 10 {
            stats.preferred_oracle_skipped += 1;
        } else {
            let mut preferred_exists = false;
            for sub in subsets(&preferred).skip(1) {
                let sub: BTreeSet<Formula> = sub.into_iter().collect();
                let part = tt_partition(&mut truth, dpi, d, &sub);
                if part == split(p) {
                    preferred_exists = true;
                }
                if part.2.is_empty() && !part.0.is_empty() && !part.1.is_empty() && !cqp_set.contains(&(part.0, part.1)) {
                    stats.reasoned_only += 1;
                }
            }
            if preferred_exists {
                ensure!(found.iter().all(|f| cfg.preferred.matches(f)), "preferred-only subset exists but got {found:?}");
            }
        }
        stats.p3_checks += 1;
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut stats = OracleStats::default();
    let mut seed = 0u64;
    while stats.instances < 200 {
        seed += 1;
        ensure!(seed < 5000, "ran out of seeds at {} instances", stats.instances);
        let config = RandomDpiConfig {
            components: 4 + (seed % 5) as usize,
            negatives: 1 + (seed % 3) as usize,
            ..RandomDpiConfig::default()
        };
        let dpi = random_dpi(&config, seed);
        let r = Reasoner::new();
        let d = leading_diagnoses(&dpi, &r, 6, SearchOrder::UniformCostProbability, seed).map_err(|e| e.to_string())?;
        if d.len() < 2 {
            continue;
        }
        oracle_instance(&dpi, &d, &mut stats).map_err(|e| format!("seed {seed}: {e}"))?;
        stats.instances += 1;
    }
    Ok(format!(
        "{} instances, {} CQs, {} CQPs, {} P2 checks, {} P3 checks, preferred oracle skipped {}, reasoned-only QPs {}",
        stats.instances, stats.cqs, stats.cqps, stats.p2_checks, stats.p3_checks, stats.preferred_oracle_skipped, stats.reasoned_only
    ))
}

fn median(v: &[usize]) -> f64 {
    sqd::bench::median(&v.iter().map(|&x| x as f64).collect::<Vec<_>>()).unwrap_or(0.0)
}

fn sequential_convergence() -> Outcome {
    let mut counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut over_bound = Vec::new();
    let mut sessions = 0;
    let mut seed = 1000u64;
    while sessions < 100 {
        seed += 1;
        ensure!(seed < 6000, "ran out of seeds at {sessions} sessions");
        let config = RandomDpiConfig { negatives: 3, ..RandomDpiConfig::default() };
        let dpi = random_dpi(&config, seed);
        let r = Reasoner::new();
        let all = leading_diagnoses(&dpi, &r, 10, SearchOrder::UniformCostProbability, 0).map_err(|e| e.to_string())?;
        if all.len() < 2 {
            continue;
        }
        let actual = all.get((seed as usize * 7) % all.len()).clone();
        for (name, qsm) in [("ent", Qsm::Ent), ("spl", Qsm::Spl)] {
            let options = QueryOptions { qsm, ..QueryOptions::default() };
            let cfg = options.session_config().map_err(|e| e.to_string())?;
            let s = run_session(dpi.clone(), cfg, &Oracle::Simulated(actual.clone())).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(s.result() == Some(&actual), "seed {seed} {name}: ended with {:?}, actual {actual:?}", s.leading().diagnoses());
            let queries = s.history().len();
            let initial = s.history().first().map_or(1, |h| h.leading.len());
            if queries > initial.saturating_sub(1) {
                over_bound.push(format!("{seed}/{name}: {queries} > {}", initial - 1));
            }
            counts.entry(name).or_default().push(queries);
        }
        sessions += 1;
    }
    let (ent, spl) = (median(&counts["ent"]), median(&counts["spl"]));
    let detail = format!("{sessions} sessions x ENT/SPL all converged to the actual diagnosis, median queries ENT {ent} SPL {spl}");
    ensure!(ent <= spl, "{detail}; ENT median above SPL");
    ensure!(
        over_bound.is_empty(),
        "{detail}; query count above |initial diagnoses| - 1 in {} of {} runs (e.g. {})",
        over_bound.len(),
        2 * sessions,
        over_bound.iter().take(3).cloned().collect::<Vec<_>>().join(", ")
    );
    Ok(detail)
}

fn median_query_size(ms: &[Measurement]) -> Outcome {
    let s = summarize(ms);
    let median = s.median_query_size.ok_or("no median")?;
    let mut buf = Vec::new();
    write_csv(&mut buf, ms).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    let header = text.lines().next().unwrap_or_default();
    ensure!(header.split(',').any(|c| c == "query_size"), "CSV header {header}");
    Ok(format!("median final query size {median} over {} runs", s.rows))
}

#[test]
fn acceptance() {
    let ms = timing_corpus();
    let results: Vec<(&str, Outcome)> = vec![
        ("golden example instance", golden()),
        ("zero reasoner calls in P1+P2, timing", zero_inference(&ms)),
        ("oracle equivalence", oracle_equivalence()),
        ("sequential convergence", sequential_convergence()),
        ("median query size statistic", median_query_size(&ms)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
