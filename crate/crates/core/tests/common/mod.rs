#![allow(dead_code)]

use siegel_eis::characters::DirichletCharacter;
use siegel_eis::exactnum::rational::{self, Rational};

fn mult_order(g: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut x = g % m;
    let mut o = 1;
    while x != 1 {
        x = x * g % m;
        o += 1;
    }
    o
}

/// Every Dirichlet character mod m, from all turn choices on the canonical generators.
pub fn all_characters(m: u64) -> Vec<DirichletCharacter> {
    let gens = DirichletCharacter::trivial(m).generators();
    let orders: Vec<u64> = gens.iter().map(|&g| mult_order(g, m)).collect();
    let mut out = vec![];
    let total: u64 = orders.iter().product();
    for mut idx in 0..total {
        let turns: Vec<Rational> = orders
            .iter()
            .map(|&o| {
                let j = idx % o;
                idx /= o;
                rational::rat(j as i64, o as i64)
            })
            .collect();
        out.push(DirichletCharacter::from_turns(m, turns).expect("turns of generator order are valid"));
    }
    out
}
