//! Seeded random generation of formulae and sequents for the property
//! suites. A small hand-rolled SplitMix64 keeps runs reproducible without
//! external dependencies.

use crate::calculus::CalculusId;
use crate::formula::Formula;
use crate::sequent::{MetaFormula, Sequent, Stoup, TreeTerm};

/// SplitMix64.
pub struct Rng(pub u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }
}

const VARS: [&str; 4] = ["p", "q", "r", "s"];

/// A random formula within the calculus' fragment, at most `depth` deep.
pub fn formula(rng: &mut Rng, c: &CalculusId, depth: usize) -> Formula {
    let f = &c.features;
    if depth == 0 || rng.chance(45) {
        if f.has_unit && rng.chance(10) {
            return Formula::Unit;
        }
        return Formula::var(VARS[rng.below(VARS.len())]);
    }
    let mut choices: Vec<u8> = vec![0, 1]; // the divisions
    if !f.one_division {
        choices.push(2);
    }
    if f.has_additives && !f.one_division {
        choices.extend([3, 4]);
    }
    if f.bang.is_some() {
        choices.push(5);
    }
    if f.has_brackets {
        choices.extend([6, 7]);
    }
    match choices[rng.below(choices.len())] {
        0 => Formula::rdiv(formula(rng, c, depth - 1), formula(rng, c, depth - 1)),
        1 if f.one_division => {
            Formula::rdiv(formula(rng, c, depth - 1), formula(rng, c, depth - 1))
        }
        1 => Formula::ldiv(formula(rng, c, depth - 1), formula(rng, c, depth - 1)),
        2 => Formula::prod(formula(rng, c, depth - 1), formula(rng, c, depth - 1)),
        3 => Formula::conj(formula(rng, c, depth - 1), formula(rng, c, depth - 1)),
        4 => Formula::disj(formula(rng, c, depth - 1), formula(rng, c, depth - 1)),
        5 => Formula::bang(formula(rng, c, depth - 1)),
        6 => Formula::dia(formula(rng, c, depth - 1)),
        _ => Formula::boxinv(formula(rng, c, depth - 1)),
    }
}

/// A random meta-formula within the fragment.
pub fn meta(rng: &mut Rng, c: &CalculusId, depth: usize, max_items: usize) -> MetaFormula {
    let f = &c.features;
    let stoup = if f.has_stoups && rng.chance(25) {
        Stoup::from((0..rng.below(2) + 1).map(|_| formula(rng, c, depth.min(2))).collect())
    } else {
        Stoup::empty()
    };
    let n = rng.below(max_items + 1);
    let items = (0..n)
        .map(|_| {
            if f.has_brackets && depth > 0 && rng.chance(20) {
                TreeTerm::Bracketed(meta(rng, c, depth - 1, max_items.saturating_sub(1)))
            } else {
                TreeTerm::Leaf(formula(rng, c, depth))
            }
        })
        .collect();
    MetaFormula::new(stoup, items)
}

/// A random sequent within the fragment.
pub fn sequent(rng: &mut Rng, c: &CalculusId, depth: usize, max_items: usize) -> Sequent {
    Sequent::new(meta(rng, c, depth, max_items), formula(rng, c, depth))
}
