//! Seeded generators for formulas and sequents, used by the regression
//! corpus and the property tests.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::Formula;
use crate::sequent::{Mode, Sequent, SuccElem};

/// A random formula over `atoms` with modal degree at most `max_md` and at
/// most `max_connectives` connectives (counting `□`/`◇` but not `⊤`/`⊥`).
pub fn random_formula<R: Rng>(
    rng: &mut R,
    atoms: &[&str],
    max_md: u32,
    max_connectives: usize,
) -> Formula {
    if max_connectives == 0 {
        return random_leaf(rng, atoms);
    }
    // Leaves stay possible at every size so formulas vary in shape.
    let modal_allowed = max_md > 0;
    let top = if modal_allowed { 10 } else { 8 };
    match rng.gen_range(0..top) {
        0 | 1 => random_leaf(rng, atoms),
        2 | 3 => binary(rng, atoms, max_md, max_connectives, Formula::and),
        4 | 5 => binary(rng, atoms, max_md, max_connectives, Formula::or),
        6 | 7 => binary(rng, atoms, max_md, max_connectives, Formula::imp),
        8 => Formula::boxed(random_formula(rng, atoms, max_md - 1, max_connectives - 1)),
        _ => Formula::dia(random_formula(rng, atoms, max_md - 1, max_connectives - 1)),
    }
}

fn random_leaf<R: Rng>(rng: &mut R, atoms: &[&str]) -> Formula {
    match rng.gen_range(0..10) {
        0 => Formula::Top,
        1 => Formula::Bot,
        _ => Formula::atom(atoms[rng.gen_range(0..atoms.len())]),
    }
}

fn binary<R: Rng>(
    rng: &mut R,
    atoms: &[&str],
    max_md: u32,
    max_connectives: usize,
    combine: fn(Formula, Formula) -> Formula,
) -> Formula {
    let budget = max_connectives - 1;
    let left = rng.gen_range(0..=budget);
    combine(
        random_formula(rng, atoms, max_md, left),
        random_formula(rng, atoms, max_md, budget - left),
    )
}

/// A random set-based bi-nested sequent: a few formulas on each side plus
/// up to two implication and two modal blocks per level down to `depth`.
pub fn random_sequent<R: Rng>(rng: &mut R, atoms: &[&str], depth: usize) -> Sequent {
    let mut ant = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        ant.push(random_formula(rng, atoms, 1, 3));
    }
    let mut suc = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        suc.push(SuccElem::Form(random_formula(rng, atoms, 1, 3)));
    }
    let mut s = Sequent::new(Mode::Set, ant, suc);
    if depth > 0 {
        for _ in 0..rng.gen_range(0..2) {
            s.push_imp_block(random_sequent(rng, atoms, depth - 1));
        }
        for _ in 0..rng.gen_range(0..2) {
            s.push_mod_block(random_sequent(rng, atoms, depth - 1));
        }
    }
    s
}

/// The deterministic regression corpus: `count` distinct formulas over
/// `p`, `q`, `r` with modal degree at most 2 and at most 12 connectives.
pub fn corpus(seed: u64, count: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let f = random_formula(&mut rng, &["p", "q", "r"], 2, 12);
        if seen.insert(f.clone()) {
            out.push(f);
        }
    }
    out
}
