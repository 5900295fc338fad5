mod common;

use common::*;
use housing::mechanisms::*;
use housing::properties::*;
use housing::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Brute-force oracles. They only use bundle ranks and build allocations from owner
// columns, independently of the checkers under test.

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn all_allocations(s: MarketShape) -> Vec<Allocation> {
    let ps = perms(s.agents());
    let mut out = vec![Vec::<Vec<usize>>::new()];
    for _ in 0..s.types() {
        out = out
            .into_iter()
            .flat_map(|cols| {
                ps.iter().map(move |p| {
                    let mut c = cols.clone();
                    c.push(p.clone());
                    c
                })
            })
            .collect();
    }
    out.into_iter().map(|cols| Allocation::from_columns(s, &cols).unwrap()).collect()
}

fn rank(m: &Market, i: usize, a: &Allocation) -> usize {
    m.preference(i).rank_of(a.allotment(i))
}

fn dominates(m: &Market, y: &Allocation, x: &Allocation) -> bool {
    let n = m.agents();
    (0..n).all(|i| rank(m, i, y) <= rank(m, i, x)) && (0..n).any(|i| rank(m, i, y) < rank(m, i, x))
}

fn differing(x: &Allocation, y: &Allocation) -> usize {
    (0..x.types()).filter(|&t| x.column(t) != y.column(t)).count()
}

fn oracle_ir(m: &Market, x: &Allocation) -> bool {
    let e = Allocation::endowment(m.shape());
    (0..m.agents()).all(|i| rank(m, i, x) <= rank(m, i, &e))
}

fn oracle_pe(m: &Market, x: &Allocation, all: &[Allocation]) -> bool {
    !all.iter().any(|y| dominates(m, y, x))
}

fn oracle_ce(m: &Market, x: &Allocation, all: &[Allocation]) -> bool {
    !all.iter().any(|y| differing(x, y) == 1 && dominates(m, y, x))
}

/// `x` with agents `i` and `j` exchanging their objects of the types in `ts`.
fn exchange(m: &Market, x: &Allocation, i: usize, j: usize, ts: &[usize]) -> Allocation {
    let cols: Vec<Vec<usize>> = (0..x.types())
        .map(|t| {
            let mut c = x.column(t);
            if ts.contains(&t) {
                c.swap(i, j);
            }
            c
        })
        .collect();
    Allocation::from_columns(m.shape(), &cols).unwrap()
}

fn both_gain(m: &Market, x: &Allocation, y: &Allocation, i: usize, j: usize) -> bool {
    rank(m, i, y) < rank(m, i, x) && rank(m, j, y) < rank(m, j, x)
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn oracle_pce(m: &Market, x: &Allocation) -> bool {
    !pairs(m.agents())
        .into_iter()
        .any(|(i, j)| (0..m.types()).any(|t| both_gain(m, x, &exchange(m, x, i, j, &[t]), i, j)))
}

fn oracle_tpe(m: &Market, x: &Allocation) -> bool {
    let k = m.types();
    let subsets: Vec<Vec<usize>> = (1..(1usize << k) - 1)
        .map(|mask| (0..k).filter(|t| mask >> t & 1 == 1).collect())
        .collect();
    !pairs(m.agents())
        .into_iter()
        .any(|(i, j)| subsets.iter().any(|ts| both_gain(m, x, &exchange(m, x, i, j, ts), i, j)))
}

fn oracle_pe2(m: &Market, x: &Allocation) -> bool {
    let all: Vec<usize> = (0..m.types()).collect();
    !pairs(m.agents())
        .into_iter()
        .any(|(i, j)| both_gain(m, x, &exchange(m, x, i, j, &all), i, j))
}

/// Some ordered sequence of distinct agents, each strictly preferring the next one's
/// allotment (cyclically).
fn oracle_coal(m: &Market, x: &Allocation) -> bool {
    let n = m.agents();
    let wants = |a: usize, b: usize| m.preference(a).prefers(x.allotment(b), x.allotment(a));
    fn extend(path: &mut Vec<usize>, n: usize, wants: &dyn Fn(usize, usize) -> bool) -> bool {
        let last = *path.last().unwrap();
        if path.len() >= 2 && wants(last, path[0]) {
            return true;
        }
        for k in 0..n {
            if !path.contains(&k) && wants(last, k) {
                path.push(k);
                if extend(path, n, wants) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    !(0..n).any(|start| extend(&mut vec![start], n, &wants))
}

fn oracle_unan(m: &Market, x: &Allocation, all: &[Allocation]) -> bool {
    let n = m.agents();
    match all.iter().find(|y| (0..n).all(|i| rank(m, i, y) == 0)) {
        None => true,
        Some(best) => best == x,
    }
}

fn strict_profiles() -> (ProfileDomain, Vec<Allocation>) {
    let s = shape(2, 2);
    let d = ProfileDomain::full(s, DomainTag::Strict, &Guards::default()).unwrap();
    (d, all_allocations(s))
}

fn random_strict(s: MarketShape, rng: &mut ChaCha8Rng) -> Market {
    let k = s.bundle_count().unwrap();
    let profile = (0..s.agents())
        .map(|_| {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(rng);
            Preference::from_indices(s, order).unwrap()
        })
        .collect();
    Market::new(s, profile, DomainTag::Strict).unwrap()
}

fn random_allocation(s: MarketShape, rng: &mut ChaCha8Rng) -> Allocation {
    let cols: Vec<Vec<usize>> = (0..s.types())
        .map(|_| {
            let mut c: Vec<usize> = (0..s.agents()).collect();
            c.shuffle(rng);
            c
        })
        .collect();
    Allocation::from_columns(s, &cols).unwrap()
}

fn check_witness(v: Verdict<ImprovementWitness>, x: &Allocation, m: &Market) -> bool {
    match v {
        Verdict::Satisfied => true,
        Verdict::Violated(w) => {
            assert!(w.certifies(x, m), "{w:?} does not certify at {m:?}");
            false
        }
    }
}

/// Every checker against its oracle, certifying every witness on the way.
fn compare_all(m: &Market, x: &Allocation, all: &[Allocation]) {
    assert_eq!(individual_rationality(x, m).is_satisfied(), oracle_ir(m, x));
    assert_eq!(check_witness(pareto_efficiency(x, m), x, m), oracle_pe(m, x, all), "pe");
    assert_eq!(check_witness(coordinatewise_efficiency(x, m), x, m), oracle_ce(m, x, all), "ce");
    assert_eq!(check_witness(pairwise_coordinatewise_efficiency(x, m), x, m), oracle_pce(m, x), "pce");
    assert_eq!(check_witness(pairwise_efficiency(x, m), x, m), oracle_pe2(m, x), "pe2");
    assert_eq!(check_witness(tprime_pairwise_efficiency(x, m), x, m), oracle_tpe(m, x), "tpe");
    assert_eq!(check_witness(coalitional_efficiency(x, m), x, m), oracle_coal(m, x), "coal");
    assert_eq!(check_witness(unanimity(x, m), x, m), oracle_unan(m, x, all), "unan");
}

#[test]
fn checkers_match_oracles_on_every_strict_two_by_two_instance() {
    let (d, all) = strict_profiles();
    assert_eq!(d.len(), 576);
    for p in 0..d.len() {
        let m = d.market(p);
        for x in &all {
            compare_all(&m, x, &all);
        }
    }
}

#[test]
fn checkers_match_oracles_on_sampled_larger_markets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, k) in [(3, 2), (2, 3), (3, 1), (4, 1)] {
        let s = shape(n, k);
        let all = all_allocations(s);
        for _ in 0..60 {
            let m = random_strict(s, &mut rng);
            for _ in 0..6 {
                compare_all(&m, &random_allocation(s, &mut rng), &all);
            }
        }
    }
}

struct Flags {
    pe: bool,
    ce: bool,
    pce: bool,
    unan: bool,
    coal: bool,
    pe2: bool,
}

fn flags(m: &Market, x: &Allocation) -> Flags {
    Flags {
        pe: pareto_efficiency(x, m).is_satisfied(),
        ce: coordinatewise_efficiency(x, m).is_satisfied(),
        pce: pairwise_coordinatewise_efficiency(x, m).is_satisfied(),
        unan: unanimity(x, m).is_satisfied(),
        coal: coalitional_efficiency(x, m).is_satisfied(),
        pe2: pairwise_efficiency(x, m).is_satisfied(),
    }
}

#[test]
fn implication_chain_on_every_two_by_two_domain() {
    let g = Guards::default();
    let s = shape(2, 2);
    let all = all_allocations(s);
    for tag in DomainTag::ALL {
        let d = ProfileDomain::full(s, tag, &g).unwrap();
        for p in 0..d.len() {
            let m = d.market(p);
            for x in &all {
                let f = flags(&m, x);
                assert!(!f.pe || f.ce, "{tag}");
                assert!(!f.ce || f.pce, "{tag}");
                assert!(!f.pe || f.coal, "{tag}");
                assert!(!f.coal || f.pe2, "{tag}");
                assert!(!f.pe || f.unan, "{tag}");
                if tag != DomainTag::Strict {
                    assert!(!f.pce || f.unan, "{tag}");
                }
            }
        }
    }
}

#[test]
fn single_type_efficiency_does_not_imply_unanimity_without_separability() {
    // Both agents rank their own endowment first and the mixed bundles last; the full
    // swap is pairwise-coordinatewise and coordinatewise efficient but not the unanimous
    // best allocation.
    let s = shape(2, 2);
    let b = |h: usize, c: usize| Bundle::from_owners(vec![h - 1, c - 1]);
    let p1 = Preference::strict(s, vec![b(1, 1), b(2, 2), b(1, 2), b(2, 1)]).unwrap();
    let p2 = Preference::strict(s, vec![b(2, 2), b(1, 1), b(1, 2), b(2, 1)]).unwrap();
    let m = Market::new(s, vec![p1, p2], DomainTag::Strict).unwrap();
    let x = alloc(s, &[&[2, 2], &[1, 1]]);
    let f = flags(&m, &x);
    assert!(f.ce && f.pce && !f.unan);
    let w = unanimity(&x, &m).into_witness().unwrap();
    assert_eq!(w.improved, Allocation::endowment(s));
    assert!(w.certifies(&x, &m));
}

#[test]
fn tprime_and_pairwise_coordinatewise_coincide_with_two_types() {
    let (d, all) = strict_profiles();
    for p in 0..d.len() {
        let m = d.market(p);
        for x in &all {
            assert_eq!(
                tprime_pairwise_efficiency(x, &m).is_satisfied(),
                pairwise_coordinatewise_efficiency(x, &m).is_satisfied()
            );
        }
    }
}

#[test]
fn two_agent_efficiency_verdicts() {
    let s = shape(2, 2);
    let e = Allocation::endowment(s);
    let x = alloc(s, &[&[2, 2], &[1, 1]]);
    let r = two_agent_r();
    assert!(individual_rationality(&x, &r).is_satisfied());
    assert!(individual_rationality(&e, &r).is_satisfied());
    let w = pareto_efficiency(&e, &r).into_witness().unwrap();
    assert_eq!(w.improved, x);
    assert_eq!(w.agents, vec![0, 1]);
    let w = pairwise_efficiency(&e, &r).into_witness().unwrap();
    assert_eq!((w.improved, w.agents), (x.clone(), vec![0, 1]));
    assert!(coordinatewise_efficiency(&x, &r).is_satisfied());

    let r_hat = two_agent_r_hat();
    assert!(!coordinatewise_efficiency(&e, &r_hat).is_satisfied());
    let w = pairwise_coordinatewise_efficiency(&e, &r_hat).into_witness().unwrap();
    assert_eq!(w.agents, vec![0, 1]);
    assert_eq!(w.types, vec![1]);
    assert_eq!(w.improved, alloc(s, &[&[1, 2], &[2, 1]]));
}

#[test]
fn serial_dictatorship_can_break_rationality() {
    let s = shape(2, 2);
    let m = market(s, &["H2,H1,C2,C1", "H2,H1,C2,C1"]);
    let x = serial_dictatorship(&m, &[0, 1]);
    assert_eq!(individual_rationality(&x, &m), Verdict::Violated(1));
}

#[test]
fn serial_dictatorship_is_pareto_efficient_on_strict_two_by_two() {
    let (d, _) = strict_profiles();
    for p in 0..d.len() {
        let m = d.market(p);
        for order in [[0, 1], [1, 0]] {
            assert!(pareto_efficiency(&serial_dictatorship(&m, &order), &m).is_satisfied());
        }
    }
}

#[test]
fn three_cycle_of_endowment_tops() {
    let s = shape(3, 2);
    let m = market(s, &["H2,H1,H3,C2,C1,C3", "H3,H2,H1,C3,C2,C1", "H1,H3,H2,C1,C3,C2"]);
    let e = Allocation::endowment(s);
    assert!(pairwise_efficiency(&e, &m).is_satisfied());
    let w = coalitional_efficiency(&e, &m).into_witness().unwrap();
    assert_eq!(w.agents, vec![0, 1, 2]);
    assert_eq!(w.improved, alloc(s, &[&[2, 2], &[3, 3], &[1, 1]]));
    assert!(w.certifies(&e, &m));
    // Read literally, the condition flags the reverse cycle, which improves nobody.
    let literal = coalitional_literal_violation(&e, &m).unwrap();
    assert_eq!(literal, vec![0, 2, 1]);
    assert!(!e.rotate(&literal).rows().iter().enumerate().any(|(i, b)| m.preference(i).prefers(b, e.allotment(i))));
}

#[test]
fn bttc_is_pairwise_and_coalitionally_efficient_on_lex_domains() {
    let g = Guards::default();
    for (n, k) in [(2, 2), (2, 3), (3, 2)] {
        let d = ProfileDomain::full(shape(n, k), DomainTag::Lexicographic, &g).unwrap();
        let step = (d.len() / 4000).max(1);
        for p in (0..d.len()).step_by(step) {
            let m = d.market(p);
            let x = bttc(&m);
            assert!(pairwise_efficiency(&x, &m).is_satisfied());
            assert!(coalitional_efficiency(&x, &m).is_satisfied());
        }
    }
}

#[test]
fn cttc_is_coordinatewise_efficient_on_separable_markets() {
    let g = Guards::default();
    let d = ProfileDomain::full(shape(2, 2), DomainTag::Separable, &g).unwrap();
    for p in 0..d.len() {
        let m = d.market(p);
        assert!(coordinatewise_efficiency(&cttc(&m).unwrap(), &m).is_satisfied());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, k) in [(2, 3), (3, 2)] {
        let s = shape(n, k);
        let prefs: Vec<Preference> = enumerate_preferences(s, DomainTag::Separable, &g).unwrap().collect();
        for _ in 0..2000 {
            let profile = (0..n).map(|_| prefs.choose(&mut rng).unwrap().clone()).collect();
            let m = Market::new(s, profile, DomainTag::Separable).unwrap();
            assert!(coordinatewise_efficiency(&cttc(&m).unwrap(), &m).is_satisfied());
        }
    }
}

fn model(d: ProfileDomain) -> DomainModel {
    DomainModel::new(d, &Guards::default()).unwrap()
}

#[test]
fn msir_misreport_witness() {
    let s = shape(2, 2);
    let g = Guards::default();
    let d = ProfileDomain::from_options(
        s,
        DomainTag::Lexicographic,
        vec![vec![lex(s, MSIR_R1)], vec![lex(s, MSIR_R2), lex(s, MSIR_R2_PRIME)]],
        &g,
    )
    .unwrap();
    let model = model(d);
    let mech = MultipleSerialIr::new(vec![0, 1], g.max_allocations);
    let table = OutcomeTable::build(&mech, &model).unwrap();
    let w = strategy_proofness(&model, &table).into_witness().unwrap();
    assert_eq!(w.coalition, vec![1]);
    assert_eq!(w.honest, msir_r());
    assert_eq!(w.reported, msir_r_prime());
    assert!(w.certifies(&mech));
}

#[test]
fn cttc_group_manipulation_of_the_two_agent_market() {
    let s = shape(2, 2);
    let g = Guards::default();
    let model = model(ProfileDomain::full(s, DomainTag::Separable, &g).unwrap());
    let table = OutcomeTable::build(&Cttc, &model).unwrap();
    assert!(strategy_proofness(&model, &table).is_satisfied());
    let w = group_strategy_proofness(&model, &table, &g).unwrap().into_witness().unwrap();
    assert!(w.certifies(&Cttc));

    let w = DeviationWitness {
        property: DeviationKind::GroupStrategyProofness,
        coalition: vec![0, 1],
        honest: two_agent_r(),
        reported: two_agent_r_bar(),
        honest_outcome: Allocation::endowment(s),
        reported_outcome: alloc(s, &[&[2, 2], &[1, 1]]),
    };
    assert!(w.certifies(&Cttc));
}

#[test]
fn no_trade_is_incentive_compatible() {
    let g = Guards::default();
    for tag in DomainTag::ALL {
        let model = model(ProfileDomain::full(shape(2, 2), tag, &g).unwrap());
        let table = OutcomeTable::build(&NoTrade, &model).unwrap();
        assert!(strategy_proofness(&model, &table).is_satisfied());
        assert!(non_bossiness(&model, &table).is_satisfied());
        assert!(group_strategy_proofness(&model, &table, &g).unwrap().is_satisfied());
    }
}

fn registry(n: usize) -> Vec<Box<dyn Mechanism>> {
    let opts = MechanismOptions::default();
    let mut out: Vec<Box<dyn Mechanism>> = ["no-trade", "serial-dictatorship", "msir", "bossy-hybrid", "cttc", "bttc"]
        .into_iter()
        .map(|name| by_name(name, n, &opts).unwrap())
        .collect();
    out.push(Box::new(SerialDictatorship::new((0..n).rev().collect())));
    out.push(Box::new(MultipleSerialIr::new((0..n).rev().collect(), opts.guards.max_allocations)));
    out
}

#[test]
fn group_strategy_proofness_implies_strategy_proofness_and_non_bossiness() {
    let g = Guards::default();
    for (n, k, tag) in [
        (2, 2, DomainTag::Strict),
        (2, 2, DomainTag::Separable),
        (2, 2, DomainTag::Lexicographic),
        (2, 2, DomainTag::LexCommon),
        (2, 3, DomainTag::Lexicographic),
        (3, 2, DomainTag::Lexicographic),
    ] {
        let model = model(ProfileDomain::full(shape(n, k), tag, &g).unwrap());
        let mut audited = 0;
        let mechanisms: Vec<Box<dyn Mechanism>> = if n == 3 {
            vec![Box::new(NoTrade), Box::new(Bttc), Box::new(BossyHybrid)]
        } else {
            registry(n)
        };
        for mech in mechanisms {
            let Ok(table) = OutcomeTable::build(&mech, &model) else { continue };
            audited += 1;
            let sp = strategy_proofness(&model, &table).is_satisfied();
            let nb = non_bossiness(&model, &table).is_satisfied();
            let gsp = group_strategy_proofness(&model, &table, &g).unwrap();
            if let Some(w) = gsp.witness() {
                assert!(w.certifies(&mech));
            }
            if gsp.is_satisfied() {
                assert!(sp && nb, "{} on {tag} {n}x{k}", mech.name());
            }
            if tag == DomainTag::Strict {
                assert_eq!(sp && nb, gsp.is_satisfied(), "{} on strict", mech.name());
            }
        }
        assert!(audited >= 3, "{tag} {n}x{k}");
    }
}

#[test]
fn lemma_checks_on_known_mechanisms() {
    let g = Guards::default();
    let s = shape(2, 2);
    let lex = model(ProfileDomain::full(s, DomainTag::Lexicographic, &g).unwrap());
    let report = lemma_checks(&lex, &OutcomeTable::build(&Bttc, &lex).unwrap());
    assert!(report.strategy_proof && report.non_bossy);
    assert_eq!(report.sp_nb_monotonic, Implication::Holds);
    assert_eq!(report.leading_type_invariance, Some(Implication::Holds));

    let sep = model(ProfileDomain::full(s, DomainTag::Separable, &g).unwrap());
    let table = OutcomeTable::build(&Cttc, &sep).unwrap();
    let report = lemma_checks(&sep, &table);
    assert_eq!(report.sp_nb_monotonic, Implication::Holds);
    assert!(monotonicity(&sep, &table).is_satisfied());
    assert_eq!(report.leading_type_invariance, None);

    let lex3 = model(ProfileDomain::full(shape(3, 2), DomainTag::Lexicographic, &g).unwrap());
    let table = OutcomeTable::build(&BossyHybrid, &lex3).unwrap();
    let w = non_bossiness(&lex3, &table).into_witness().unwrap();
    assert!(w.certifies(&BossyHybrid));
    assert_eq!(lemma_checks(&lex3, &table).sp_nb_monotonic, Implication::NotApplicable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_replay(n in 2usize..4, k in 1usize..3, seed in any::<u64>()) {
        let s = shape(n, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_strict(s, &mut rng);
        let x = random_allocation(s, &mut rng);
        for v in [
            pareto_efficiency(&x, &m),
            coordinatewise_efficiency(&x, &m),
            pairwise_coordinatewise_efficiency(&x, &m),
            pairwise_efficiency(&x, &m),
            tprime_pairwise_efficiency(&x, &m),
            coalitional_efficiency(&x, &m),
            unanimity(&x, &m),
        ] {
            if let Some(w) = v.witness() {
                prop_assert!(w.certifies(&x, &m));
            }
        }
    }

    #[test]
    fn single_type_collapse(n in 2usize..6, seed in any::<u64>()) {
        let s = shape(n, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_strict(s, &mut rng);
        let x = random_allocation(s, &mut rng);
        prop_assert_eq!(
            coordinatewise_efficiency(&x, &m).is_satisfied(),
            pareto_efficiency(&x, &m).is_satisfied()
        );
        prop_assert_eq!(
            pairwise_coordinatewise_efficiency(&x, &m).is_satisfied(),
            pairwise_efficiency(&x, &m).is_satisfied()
        );
        // Shapley-Scarf: no two agents each prefer the other's house.
        let houses: Vec<usize> = x.column(0);
        let swap = (0..n).any(|i| (0..n).any(|j| i != j && {
            let pi = m.preference(i);
            let pj = m.preference(j);
            pi.rank(houses[j]) < pi.rank(houses[i]) && pj.rank(houses[i]) < pj.rank(houses[j])
        }));
        prop_assert_eq!(pairwise_efficiency(&x, &m).is_satisfied(), !swap);
        prop_assert!(tprime_pairwise_efficiency(&x, &m).is_satisfied());
    }
}
