#![allow(dead_code)]

use housing::{Allocation, Bundle, DomainTag, Market, MarketShape, Preference, TypedObject};

pub fn shape(n: usize, m: usize) -> MarketShape {
    MarketShape::new(n, m).unwrap()
}

fn type_index(c: char) -> usize {
    match c {
        'H' => 0,
        'C' => 1,
        other => (other as u8 - b'A') as usize,
    }
}

/// Lexicographic preference from a listing such as "H2,H3,H1,C3,C2,C1".
pub fn lex(s: MarketShape, listing: &str) -> Preference {
    let objects: Vec<TypedObject> = listing
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            let ty = type_index(tok.chars().next().unwrap());
            let owner: usize = tok[1..].parse().unwrap();
            TypedObject { ty, owner: owner - 1 }
        })
        .collect();
    Preference::from_object_listing(s, &objects).unwrap()
}

pub fn market(s: MarketShape, listings: &[&str]) -> Market {
    Market::new(s, listings.iter().map(|l| lex(s, l)).collect(), DomainTag::Lexicographic).unwrap()
}

/// Allocation from 1-based owner rows, e.g. `&[&[2, 2], &[1, 1]]`.
pub fn alloc(s: MarketShape, rows: &[&[usize]]) -> Allocation {
    Allocation::new(
        s,
        rows.iter()
            .map(|r| Bundle::from_owners(r.iter().map(|o| o - 1).collect()))
            .collect(),
    )
    .unwrap()
}

pub fn two_agent_r() -> Market {
    market(shape(2, 2), &["H2,H1,C1,C2", "C1,C2,H2,H1"])
}

pub fn two_agent_r_bar() -> Market {
    market(shape(2, 2), &["H2,H1,C2,C1", "H1,H2,C1,C2"])
}

pub fn two_agent_r_hat() -> Market {
    market(shape(2, 2), &["H1,H2,C2,C1", "H2,H1,C1,C2"])
}

pub fn bttc_example() -> Market {
    market(shape(3, 2), &["H2,H3,H1,C3,C2,C1", "C1,C2,C3,H3,H2,H1", "H2,H1,H3,C1,C3,C2"])
}

pub const MSIR_R1: &str = "H2,H1,C2,C1";
pub const MSIR_R2: &str = "H1,H2,C2,C1";
pub const MSIR_R2_PRIME: &str = "C2,C1,H1,H2";

pub fn msir_r() -> Market {
    market(shape(2, 2), &[MSIR_R1, MSIR_R2])
}

pub fn msir_r_prime() -> Market {
    market(shape(2, 2), &[MSIR_R1, MSIR_R2_PRIME])
}
