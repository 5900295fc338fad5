mod common;

use common::*;
use housing::mechanisms::*;
use housing::{Allocation, DomainTag, Guards, Market, ProfileDomain};

#[test]
fn two_agent_outcomes() {
    let s = shape(2, 2);
    let e = Allocation::endowment(s);
    let x = alloc(s, &[&[2, 2], &[1, 1]]);
    assert_eq!(cttc(&two_agent_r()).unwrap(), e);
    assert_eq!(bttc(&two_agent_r()), x);
    assert_eq!(cttc(&two_agent_r_bar()).unwrap(), x);
    assert_eq!(cttc(&two_agent_r_hat()).unwrap(), alloc(s, &[&[1, 2], &[2, 1]]));
    assert_eq!(bttc(&two_agent_r_hat()), e);
}

#[test]
fn two_agent_serial_dictatorship_second_agent_first() {
    let s = shape(2, 2);
    let out = serial_dictatorship(&two_agent_r(), &[1, 0]);
    assert_eq!(out, alloc(s, &[&[1, 2], &[2, 1]]));
}

#[test]
fn stepwise_trace_matches_worked_example() {
    let (a, trace) = bttc_stepwise(&bttc_example()).unwrap();
    assert_eq!(a, alloc(shape(3, 2), &[&[2, 2], &[1, 1], &[3, 3]]));
    assert_eq!(trace.len(), 2);
    assert_eq!(trace[0].step, 1);
    assert_eq!(trace[0].to_string(), "0->t0:1->1->t1:0->0");
    assert_eq!(trace[1].step, 2);
    assert_eq!(trace[1].to_string(), "2->t0:2->2");
}

#[test]
fn house_ttc_of_worked_example() {
    let m = bttc_example();
    let marginals: Vec<_> = m.profile().iter().map(|p| &p.marginals().unwrap()[0]).collect();
    let out = ttc_single_type(&marginals, &[0, 1, 2]);
    assert_eq!(out.assignment, vec![0, 2, 1]);
}

#[test]
fn msir_outcomes() {
    let s = shape(2, 2);
    let g = Guards::default();
    assert_eq!(
        multiple_serial_ir(&msir_r(), &[0, 1], g.max_allocations).unwrap(),
        alloc(s, &[&[2, 2], &[1, 1]])
    );
    assert_eq!(
        multiple_serial_ir(&msir_r_prime(), &[0, 1], g.max_allocations).unwrap(),
        alloc(s, &[&[2, 1], &[1, 2]])
    );
}

#[test]
fn msir_returns_endowment_when_it_is_the_only_ir_allocation() {
    let s = shape(2, 2);
    let m = market(s, &["H1,H2,C1,C2", "H2,H1,C2,C1"]);
    assert_eq!(multiple_serial_ir(&m, &[0, 1], 100).unwrap(), Allocation::endowment(s));
}

#[test]
fn no_trade_is_endowment() {
    assert_eq!(no_trade(&bttc_example()), Allocation::endowment(shape(3, 2)));
}

#[test]
fn cttc_rejects_strict_markets() {
    let m = two_agent_r();
    let strict = Market::new(m.shape(), m.profile().iter().map(|p| p.as_strict()).collect(), DomainTag::Strict).unwrap();
    assert!(cttc(&strict).is_err());
    assert_eq!(bttc(&strict), bttc(&m));
}

#[test]
fn y_unanimity_cases() {
    let s = shape(2, 2);
    let x = alloc(s, &[&[2, 2], &[1, 1]]);
    let e = Allocation::endowment(s);
    assert_eq!(y_restricted_unanimity(&two_agent_r(), &x).unwrap(), x);
    assert_eq!(y_restricted_unanimity(&two_agent_r_hat(), &x).unwrap(), e);
    assert_eq!(y_restricted_unanimity(&two_agent_r(), &e).unwrap(), e);
}

#[test]
fn house_then_car_penalizes_first_agent() {
    let s = shape(2, 2);
    // agent 1 trades houses and tops its own car: it must point at car 2.
    let m = Market::new(s, vec![lex(s, "H2,H1,C1,C2"), lex(s, "H1,H2,C2,C1")], DomainTag::LexCommon).unwrap();
    assert_eq!(house_then_penalized_car(&m).unwrap(), alloc(s, &[&[2, 1], &[1, 2]]));
    let m = Market::new(s, vec![lex(s, "H2,H1,C1,C2"), lex(s, "H1,H2,C1,C2")], DomainTag::LexCommon).unwrap();
    assert_eq!(house_then_penalized_car(&m).unwrap(), alloc(s, &[&[2, 2], &[1, 1]]));
    assert_eq!(cttc(&m).unwrap(), alloc(s, &[&[2, 1], &[1, 2]]));
    // agent 1 keeps its house: identical to cTTC.
    let m = Market::new(s, vec![lex(s, "H1,H2,C2,C1"), lex(s, "H2,H1,C1,C2")], DomainTag::LexCommon).unwrap();
    assert_eq!(house_then_penalized_car(&m).unwrap(), cttc(&m).unwrap());
    assert!(house_then_penalized_car(&two_agent_r()).is_err());
}

#[test]
fn bossy_hybrid_falls_back_to_bttc_outside_its_region() {
    let m = bttc_example();
    // agent 1 ranks e_2 first, y = (e_2, (H1,C3), (H3,C1)); agent 3 prefers e_3 to (H3,C1)?
    let out = bossy_hybrid(&m).unwrap();
    assert!(out == bttc(&m) || out == alloc(shape(3, 2), &[&[2, 2], &[1, 3], &[3, 1]]));
    let own = market(shape(3, 2), &["H1,H2,H3,C1,C2,C3", "C1,C2,C3,H3,H2,H1", "H2,H1,H3,C1,C3,C2"]);
    assert_eq!(bossy_hybrid(&own).unwrap(), bttc(&own));
    assert!(bossy_hybrid(&two_agent_r()).is_err());
}

#[test]
fn bttc_constructions_agree_exhaustively() {
    let g = Guards::default();
    for (n, m) in [(2, 2), (2, 3), (3, 2)] {
        let d = ProfileDomain::full(shape(n, m), DomainTag::Lexicographic, &g).unwrap();
        let step = (d.len() / 5000).max(1);
        for p in (0..d.len()).step_by(step) {
            let market = d.market(p);
            assert_eq!(bttc(&market), bttc_stepwise(&market).unwrap().0);
        }
    }
}

#[test]
fn registry_resolves_aliases() {
    let opts = MechanismOptions::default();
    assert_eq!(by_name("nt", 2, &opts).unwrap().name(), "no-trade");
    assert_eq!(by_name("sd", 3, &opts).unwrap().name(), "serial-dictatorship(1,2,3)");
    assert!(matches!(by_name("bttcc", 2, &opts), Err(RegistryError::Unknown(_))));
    assert!(matches!(by_name("y-unanimity", 2, &opts), Err(RegistryError::MissingTarget(_))));
}
