//! Categorial-grammar recognition on top of the calculi.
//!
//! s-recognition derives the type sequence as given; t-recognition tries
//! every well-nested insertion of up to a bounded number of bracket pairs
//! around contiguous word spans (bracket induction is an open problem, so
//! the bound is mandatory).

use crate::calculus::CalculusId;
use crate::formula::Formula;
use crate::parse::{parse_formula, ParseError};
use crate::search::{Cap, SearchBudget, SearchError, SearchSession, SearchVerdict};
use crate::sequent::{MetaFormula, Sequent, TreeTerm};
use std::collections::BTreeMap;
use thiserror::Error;

/// A finite relation from words to formulae, plus the goal type.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    pub entries: BTreeMap<String, Vec<Formula>>,
    pub goal: Formula,
}

#[derive(Debug, Error, PartialEq)]
pub enum LexiconError {
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("lexicon line {line}: expected `word: Formula`")]
    BadLine { line: usize },
    #[error("lexicon has no goal")]
    NoGoal,
    #[error("{0}")]
    Formula(#[from] ParseError),
}

impl Lexicon {
    pub fn new(goal: Formula) -> Lexicon {
        Lexicon { entries: BTreeMap::new(), goal }
    }

    pub fn add(&mut self, word: impl Into<String>, formula: Formula) {
        self.entries.entry(word.into()).or_default().push(formula);
    }

    pub fn with_goal(&self, goal: Formula) -> Lexicon {
        Lexicon { entries: self.entries.clone(), goal }
    }

    pub fn types_of(&self, word: &str) -> Result<&[Formula], LexiconError> {
        self.entries
            .get(word)
            .map(Vec::as_slice)
            .ok_or_else(|| LexiconError::UnknownWord(word.to_string()))
    }

    /// Parse the lexicon file format: lines `word: Formula` (repeatable per
    /// word) and one `goal: Formula`.
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut entries: BTreeMap<String, Vec<Formula>> = BTreeMap::new();
        let mut goal = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, ty) = line
                .split_once(':')
                .ok_or(LexiconError::BadLine { line: i + 1 })?;
            let formula = parse_formula(ty.trim())?;
            if word.trim() == "goal" {
                goal = Some(formula);
            } else {
                entries.entry(word.trim().to_string()).or_default().push(formula);
            }
        }
        Ok(Lexicon { entries, goal: goal.ok_or(LexiconError::NoGoal)? })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (word, tys) in &self.entries {
            for ty in tys {
                out.push_str(&format!("{word}: {ty}\n"));
            }
        }
        out.push_str(&format!("goal: {}\n", self.goal));
        out
    }
}

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// All type assignments for the phrase, in lexicon order.
fn assignments(lex: &Lexicon, words: &[&str]) -> Result<Vec<Vec<Formula>>, LexiconError> {
    let mut out: Vec<Vec<Formula>> = vec![vec![]];
    for word in words {
        let tys = lex.types_of(word)?;
        let mut next = Vec::with_capacity(out.len() * tys.len());
        for prefix in &out {
            for ty in tys {
                let mut row = prefix.clone();
                row.push(ty.clone());
                next.push(row);
            }
        }
        out = next;
    }
    Ok(out)
}

fn combine(verdicts: Vec<SearchVerdict>) -> SearchVerdict {
    let mut cap: Option<Cap> = None;
    for v in verdicts {
        match v {
            SearchVerdict::Derivable(d) => return SearchVerdict::Derivable(d),
            SearchVerdict::Unknown(c) => cap = cap.or(Some(c)),
            SearchVerdict::Underivable => {}
        }
    }
    match cap {
        None => SearchVerdict::Underivable,
        Some(c) => SearchVerdict::Unknown(c),
    }
}

/// Derive `A1, ..., An => goal` for some type assignment.
pub fn s_recognize(
    c: &CalculusId,
    lex: &Lexicon,
    words: &[&str],
    budget: &SearchBudget,
) -> Result<SearchVerdict, RecognizeError> {
    let mut session = SearchSession::new(c, budget)?;
    let mut verdicts = Vec::new();
    for types in assignments(lex, words)? {
        let goal = Sequent::new(MetaFormula::of_formulas(types), lex.goal.clone());
        let v = session.verdict(&goal)?;
        if v.is_derivable() {
            return Ok(v);
        }
        verdicts.push(v);
    }
    Ok(combine(verdicts))
}

/// A bracketing: a well-nested multiset of spans over word positions. Equal
/// spans nest (a strong island is the same span twice).
type Bracketing = Vec<(usize, usize)>;

fn compatible(a: (usize, usize), b: (usize, usize)) -> bool {
    let nested = |x: (usize, usize), y: (usize, usize)| y.0 <= x.0 && x.1 <= y.1;
    let disjoint = a.1 <= b.0 || b.1 <= a.0;
    nested(a, b) || nested(b, a) || disjoint
}

/// All well-nested bracketings with at most `max_pairs` spans, smallest
/// count first. Zero-length spans (empty islands) only when allowed.
fn bracketings(n: usize, max_pairs: usize, allow_empty: bool) -> Vec<Bracketing> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for i in 0..=n {
        for j in i..=n {
            if i == j && !allow_empty {
                continue;
            }
            if i == 0 && j == n && n > 0 {
                // Bracketing the whole phrase never changes recognisability
                // of the bracket-stripped sequent, but keep it: goals like
                // <>-headed types need it.
            }
            spans.push((i, j));
        }
    }
    let mut out: Vec<Bracketing> = Vec::new();
    let mut cur: Bracketing = Vec::new();
    fn go(
        spans: &[(usize, usize)],
        from: usize,
        left: usize,
        cur: &mut Bracketing,
        out: &mut Vec<Bracketing>,
    ) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for k in from..spans.len() {
            let s = spans[k];
            if cur.iter().all(|&t| compatible(s, t)) {
                cur.push(s);
                go(spans, k, left - 1, cur, out);
                cur.pop();
            }
        }
    }
    go(&spans, 0, max_pairs, &mut cur, &mut out);
    // Smallest count first. Within a count group, candidates with repeated
    // spans (strong islands, the shape the 2018 contraction consumes) come
    // early and empty islands late; this only affects how soon a derivable
    // bracketing is found, never which ones are tried.
    out.sort_by_key(|b| {
        let distinct: BTreeMap<(usize, usize), usize> =
            b.iter().fold(BTreeMap::new(), |mut m, &s| {
                *m.entry(s).or_default() += 1;
                m
            });
        let empties = b.iter().filter(|(i, j)| i == j).count();
        (b.len(), distinct.len(), empties, b.clone())
    });
    out
}

/// Wrap the type sequence into the antecedent described by `bracketing`.
pub fn bracketed_antecedent(types: &[Formula], bracketing: &Bracketing) -> MetaFormula {
    fn build(types: &[Formula], offset: usize, spans: &[(usize, usize)], lo: usize, hi: usize) -> MetaFormula {
        // Outermost spans covering exactly [lo, hi) nest directly.
        let mut spans: Vec<(usize, usize)> = spans.to_vec();
        if let Some(pos) = spans.iter().position(|&s| s == (lo, hi)) {
            spans.remove(pos);
            return MetaFormula::of_items(vec![TreeTerm::Bracketed(build(
                types, offset, &spans, lo, hi,
            ))]);
        }
        let mut items = Vec::new();
        let mut i = lo;
        while i < hi {
            // A maximal span starting here becomes one bracketed item.
            let starting: Vec<(usize, usize)> =
                spans.iter().copied().filter(|&(a, _)| a == i).collect();
            if let Some(&(a, b)) = starting.iter().max_by_key(|&&(_, b)| b) {
                let inner: Vec<(usize, usize)> = spans
                    .iter()
                    .copied()
                    .filter(|&s| s != (a, b) && a <= s.0 && s.1 <= b)
                    .collect();
                let mut once_removed = inner.clone();
                // Keep duplicates of (a,b) beyond the one we consumed.
                let dup_count = spans.iter().filter(|&&s| s == (a, b)).count() - 1;
                for _ in 0..dup_count {
                    once_removed.push((a, b));
                }
                items.push(TreeTerm::Bracketed(build(types, offset, &once_removed, a, b)));
                spans.retain(|&s| !(a <= s.0 && s.1 <= b));
                if a == b {
                    // empty island: no word consumed
                    continue;
                }
                i = b;
            } else {
                items.push(TreeTerm::Leaf(types[i].clone()));
                i += 1;
            }
        }
        MetaFormula::of_items(items)
    }
    build(types, 0, bracketing, 0, types.len())
}

/// t-recognition: try every bracketing of up to `max_pairs` pairs and every
/// type assignment.
pub fn t_recognize(
    c: &CalculusId,
    lex: &Lexicon,
    words: &[&str],
    budget: &SearchBudget,
    max_pairs: usize,
) -> Result<SearchVerdict, RecognizeError> {
    let allow_empty = !c.features.lambek_restricted;
    let all = bracketings(words.len(), max_pairs, allow_empty);
    let mut session = SearchSession::new(c, budget)?;
    let mut verdicts = Vec::new();
    for types in assignments(lex, words)? {
        for bracketing in &all {
            let antecedent = bracketed_antecedent(&types, bracketing);
            let goal = Sequent::new(antecedent, lex.goal.clone());
            let v = session.verdict(&goal)?;
            if v.is_derivable() {
                return Ok(v);
            }
            verdicts.push(v);
        }
    }
    Ok(combine(verdicts))
}

/// The bracket-erasure of an antecedent: the type sequence with islands
/// flattened and modalities kept.
pub fn flatten_types(m: &MetaFormula) -> Vec<Formula> {
    let mut out = Vec::new();
    fn go(m: &MetaFormula, out: &mut Vec<Formula>) {
        for f in &m.stoup.members {
            out.push(f.clone());
        }
        for item in &m.items {
            match item {
                TreeTerm::Leaf(f) => out.push(f.clone()),
                TreeTerm::Bracketed(inner) => go(inner, out),
            }
        }
    }
    go(m, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketing_enumeration_is_well_nested_and_ordered() {
        let all = bracketings(3, 2, false);
        assert!(all.windows(2).all(|w| w[0].len() <= w[1].len()));
        // the strong island [[who likes]] over words 1..3
        assert!(all.contains(&vec![(1, 3), (1, 3)]));
        // crossing spans are excluded
        assert!(!all.iter().any(|b| b.contains(&(0, 2)) && b.contains(&(1, 3))));
    }

    #[test]
    fn antecedent_construction_nests() {
        let types: Vec<Formula> =
            ["a", "b", "c"].iter().map(|v| Formula::var(*v)).collect();
        let m = bracketed_antecedent(&types, &vec![(1, 3), (1, 3)]);
        assert_eq!(
            Sequent::new(m, Formula::var("x")).to_string(),
            "a, [[b, c]] => x"
        );
        let with_empty = bracketed_antecedent(&types, &vec![(1, 1), (1, 1)]);
        assert_eq!(
            Sequent::new(with_empty, Formula::var("x")).to_string(),
            "a, [[]], b, c => x"
        );
    }

    #[test]
    fn lexicon_file_round_trip() {
        let text = "the: N/CN\npaper: CN\ngoal: N\n";
        let lex = Lexicon::parse(text).unwrap();
        assert_eq!(lex.types_of("the").unwrap().len(), 1);
        assert!(lex.types_of("zzz").is_err());
        assert_eq!(Lexicon::parse(&lex.render()).unwrap(), lex);
    }
}
