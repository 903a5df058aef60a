//! Sequents in Morrill's h-sequent syntax.
//!
//! An antecedent is a *meta-formula* `ζ; Γ`: a stoup `ζ` (multiset of
//! formulae, one per bracketed zone) together with an ordered sequence of
//! *tree terms*, each either a formula or a bracketed meta-formula `[Ξ]`.
//! Calculi without stoups or without brackets use the same representation
//! with those parts empty.

use crate::formula::Formula;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// A multiset of formulae. Elements keep their insertion order so rule
/// instantiations can address occurrences by index, but equality, ordering
/// and hashing all go through the sorted view.
#[derive(Clone, Debug, Default)]
pub struct Stoup {
    pub members: Vec<Formula>,
}

impl Stoup {
    pub fn empty() -> Stoup {
        Stoup { members: Vec::new() }
    }
    pub fn from(members: Vec<Formula>) -> Stoup {
        Stoup { members }
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    fn sorted(&self) -> Vec<&Formula> {
        let mut v: Vec<&Formula> = self.members.iter().collect();
        v.sort();
        v
    }
    /// Members selected by `indices`, in index order.
    pub fn select(&self, indices: &[usize]) -> Option<Vec<Formula>> {
        let mut out = Vec::with_capacity(indices.len());
        for &i in indices {
            out.push(self.members.get(i)?.clone());
        }
        Some(out)
    }
    /// The stoup without the members at `indices`.
    pub fn without(&self, indices: &[usize]) -> Stoup {
        let drop: BTreeSet<usize> = indices.iter().copied().collect();
        Stoup {
            members: self
                .members
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, f)| f.clone())
                .collect(),
        }
    }
}

impl PartialEq for Stoup {
    fn eq(&self, other: &Self) -> bool {
        self.sorted() == other.sorted()
    }
}
impl Eq for Stoup {}
impl PartialOrd for Stoup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Stoup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sorted().cmp(&other.sorted())
    }
}
impl Hash for Stoup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for f in self.sorted() {
            f.hash(state);
        }
    }
}

/// One entry of an antecedent item sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeTerm {
    Leaf(Formula),
    Bracketed(MetaFormula),
}

impl TreeTerm {
    pub fn leaf(f: Formula) -> TreeTerm {
        TreeTerm::Leaf(f)
    }
    pub fn bracket(m: MetaFormula) -> TreeTerm {
        TreeTerm::Bracketed(m)
    }
    pub fn as_leaf(&self) -> Option<&Formula> {
        match self {
            TreeTerm::Leaf(f) => Some(f),
            TreeTerm::Bracketed(_) => None,
        }
    }
    pub fn as_bracket(&self) -> Option<&MetaFormula> {
        match self {
            TreeTerm::Bracketed(m) => Some(m),
            TreeTerm::Leaf(_) => None,
        }
    }
    /// Is this item a `!`-rooted formula (and thus movable by permutation rules)?
    pub fn is_bang_leaf(&self) -> bool {
        matches!(self, TreeTerm::Leaf(Formula::Bang(_)))
    }
}

/// A stoup plus a sequence of tree terms: the zone structure `ζ; Γ`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaFormula {
    pub stoup: Stoup,
    pub items: Vec<TreeTerm>,
}

impl MetaFormula {
    pub fn empty() -> MetaFormula {
        MetaFormula::default()
    }
    pub fn of_items(items: Vec<TreeTerm>) -> MetaFormula {
        MetaFormula { stoup: Stoup::empty(), items }
    }
    pub fn of_formulas(fs: Vec<Formula>) -> MetaFormula {
        MetaFormula::of_items(fs.into_iter().map(TreeTerm::Leaf).collect())
    }
    pub fn new(stoup: Stoup, items: Vec<TreeTerm>) -> MetaFormula {
        MetaFormula { stoup, items }
    }

    /// Non-empty in the sense of Lambek's restriction: stoup or items present.
    pub fn is_nonempty(&self) -> bool {
        !self.stoup.is_empty() || !self.items.is_empty()
    }

    /// All formulae stored anywhere in this meta-formula.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = self.stoup.members.iter().collect();
        for item in &self.items {
            match item {
                TreeTerm::Leaf(f) => out.push(f),
                TreeTerm::Bracketed(m) => out.extend(m.formulas()),
            }
        }
        out
    }

    /// Total formula-node count.
    pub fn size(&self) -> usize {
        self.formulas().iter().map(|f| f.size()).sum()
    }

    /// Paths of all zones (this one and every bracketed descendant), pre-order.
    pub fn zone_paths(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for (i, item) in self.items.iter().enumerate() {
            if let TreeTerm::Bracketed(m) = item {
                for mut p in m.zone_paths() {
                    p.insert(0, i);
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn zone(&self, steps: &[usize]) -> Result<&MetaFormula, PathError> {
        match steps.split_first() {
            None => Ok(self),
            Some((&i, rest)) => match self.items.get(i) {
                Some(TreeTerm::Bracketed(m)) => m.zone(rest),
                _ => Err(PathError::InvalidStep(i)),
            },
        }
    }

    /// Functional update of the zone at `steps`.
    pub fn with_zone(
        &self,
        steps: &[usize],
        f: &mut dyn FnMut(&MetaFormula) -> MetaFormula,
    ) -> Result<MetaFormula, PathError> {
        match steps.split_first() {
            None => Ok(f(self)),
            Some((&i, rest)) => match self.items.get(i) {
                Some(TreeTerm::Bracketed(m)) => {
                    let mut clone = self.clone();
                    clone.items[i] = TreeTerm::Bracketed(m.with_zone(rest, f)?);
                    Ok(clone)
                }
                _ => Err(PathError::InvalidStep(i)),
            },
        }
    }
}

/// An h-sequent `Ξ => A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub antecedent: MetaFormula,
    pub succedent: Formula,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("path step {0} does not select a bracketed item")]
    InvalidStep(usize),
    #[error("span out of bounds")]
    SpanOutOfBounds,
}

/// Address of a nested zone, with an optional item span and stoup index
/// inside the final zone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZonePath {
    pub steps: Vec<usize>,
    pub span: Option<(usize, usize)>,
    pub stoup_index: Option<usize>,
}

impl ZonePath {
    pub fn root() -> ZonePath {
        ZonePath::default()
    }
    pub fn at(steps: Vec<usize>) -> ZonePath {
        ZonePath { steps, span: None, stoup_index: None }
    }
}

/// The zone addressed by `p` inside the antecedent of `s`.
pub fn zone_at<'a>(s: &'a Sequent, p: &ZonePath) -> Result<&'a MetaFormula, PathError> {
    let zone = s.antecedent.zone(&p.steps)?;
    if let Some((start, len)) = p.span {
        if start + len > zone.items.len() {
            return Err(PathError::SpanOutOfBounds);
        }
    }
    if let Some(i) = p.stoup_index {
        if i >= zone.stoup.len() {
            return Err(PathError::SpanOutOfBounds);
        }
    }
    Ok(zone)
}

/// `s` with the zone addressed by `p` replaced by `m`.
pub fn replace_zone(s: &Sequent, p: &ZonePath, m: &MetaFormula) -> Result<Sequent, PathError> {
    zone_at(s, p)?;
    let antecedent = s.antecedent.with_zone(&p.steps, &mut |_| m.clone())?;
    Ok(Sequent { antecedent, succedent: s.succedent.clone() })
}

impl Sequent {
    pub fn new(antecedent: MetaFormula, succedent: Formula) -> Sequent {
        Sequent { antecedent, succedent }
    }

    /// Total formula-node count over antecedent and succedent.
    pub fn size(&self) -> usize {
        self.antecedent.size() + self.succedent.size()
    }

    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = self.antecedent.formulas();
        out.push(&self.succedent);
        out
    }
}

/// Lambek's non-emptiness restriction: the whole antecedent and every
/// bracketed zone are non-empty, and the unit constant occurs nowhere.
pub fn lambek_restriction_holds(s: &Sequent) -> bool {
    fn zones_nonempty(m: &MetaFormula) -> bool {
        m.is_nonempty()
            && m.items.iter().all(|item| match item {
                TreeTerm::Leaf(_) => true,
                TreeTerm::Bracketed(inner) => zones_nonempty(inner),
            })
    }
    zones_nonempty(&s.antecedent) && s.formulas().iter().all(|f| !f.contains_unit())
}

/// Smallest set containing every formula of `s` and closed under immediate
/// subformulae.
pub fn subformula_closure(s: &Sequent) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Formula> = s.formulas().into_iter().cloned().collect();
    while let Some(f) = stack.pop() {
        if out.contains(&f) {
            continue;
        }
        for sub in f.immediate_subformulas() {
            stack.push(sub.clone());
        }
        out.insert(f);
    }
    out
}

// ---------------------------------------------------------------------------
// rendering

fn write_item(item: &TreeTerm, out: &mut String) {
    match item {
        TreeTerm::Leaf(f) => {
            let rendered = f.to_string();
            // A leading '[' would re-parse as a bracketed island.
            if rendered.starts_with('[') {
                out.push('(');
                out.push_str(&rendered);
                out.push(')');
            } else {
                out.push_str(&rendered);
            }
        }
        TreeTerm::Bracketed(m) => {
            out.push('[');
            write_meta(m, out);
            out.push(']');
        }
    }
}

fn write_meta(m: &MetaFormula, out: &mut String) {
    if !m.stoup.is_empty() {
        out.push('{');
        for (i, f) in m.stoup.members.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&f.to_string());
        }
        out.push_str("};");
        if !m.items.is_empty() {
            out.push(' ');
        }
    }
    for (i, item) in m.items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_item(item, out);
    }
}

impl fmt::Display for MetaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_meta(self, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.antecedent.is_nonempty() {
            write!(f, "{} => {}", self.antecedent, self.succedent)
        } else {
            write!(f, "=> {}", self.succedent)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_sequent};

    #[test]
    fn stoup_equality_is_multiset() {
        let a = Stoup::from(vec![Formula::var("p"), Formula::var("q")]);
        let b = Stoup::from(vec![Formula::var("q"), Formula::var("p")]);
        assert_eq!(a, b);
        let c = Stoup::from(vec![Formula::var("p")]);
        assert_ne!(a, c);
    }

    #[test]
    fn restriction_spots_empty_islands() {
        let s = parse_sequent("CN, [[ X, [[ ]], Y ]] => CN").unwrap();
        assert!(!lambek_restriction_holds(&s));
        let t = parse_sequent("p => p").unwrap();
        assert!(lambek_restriction_holds(&t));
        let u = parse_sequent("{p}; => p").unwrap();
        assert!(lambek_restriction_holds(&u));
        let v = parse_sequent("=> p/p").unwrap();
        assert!(!lambek_restriction_holds(&v));
    }

    #[test]
    fn closure_of_simple_sequent() {
        let s = parse_sequent("p/q, q => p").unwrap();
        let cl = subformula_closure(&s);
        let expect: BTreeSet<Formula> = [
            parse_formula("p/q").unwrap(),
            parse_formula("p").unwrap(),
            parse_formula("q").unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(cl, expect);
    }

    #[test]
    fn zone_addressing_round_trip() {
        let s = parse_sequent("[p], q => r").unwrap();
        let p = ZonePath::at(vec![0]);
        let z = zone_at(&s, &p).unwrap().clone();
        assert_eq!(z, MetaFormula::of_formulas(vec![Formula::var("p")]));
        assert_eq!(replace_zone(&s, &p, &z).unwrap(), s);
        let wider = MetaFormula::of_formulas(vec![Formula::var("p"), Formula::var("p")]);
        let t = replace_zone(&s, &p, &wider).unwrap();
        assert_eq!(t.to_string(), "[p, p], q => r");
        assert!(zone_at(&s, &ZonePath::at(vec![5])).is_err());
    }
}
