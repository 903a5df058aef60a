//! Type-0 grammar (semi-Thue) machinery: internalising finite sets of
//! formulae into a single meta-formula, synthesizing derivations from
//! rewriting traces, extracting traces back out of derivations, Buszkowski's
//! one-division encoding, and the r.e.-language grammar construction.
//!
//! Membership on the rewriting side is decided only by bounded breadth-first
//! search; the logic side never claims non-membership.

use crate::calculus::{b_formula, BRule, CalculusId, RuleId};
use crate::derivation::{check, Derivation};
use crate::formula::Formula;
use crate::grammar::Lexicon;
#[cfg(test)]
use crate::parse::parse_formula;
use crate::rules::{find_app, premises_of};
use crate::search::{search, SearchBudget, SearchVerdict};
use crate::sequent::{MetaFormula, Sequent, Stoup, TreeTerm};
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

// ---------------------------------------------------------------------------
// grammars and rewriting

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
}

/// An unrestricted (type-0) rewriting grammar: a semi-Thue system with a
/// start symbol and a terminal sub-alphabet. Left-hand sides are non-empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type0Grammar {
    pub alphabet: BTreeSet<String>,
    pub terminals: BTreeSet<String>,
    pub start: String,
    pub productions: Vec<Production>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GrammarError {
    #[error("production {0} has an empty left-hand side")]
    EmptyLhs(usize),
    #[error("symbol `{0}` is reserved (contains '#' or '~')")]
    ReservedSpelling(String),
    #[error("terminal `{0}` is not in the alphabet")]
    UnknownTerminal(String),
    #[error("start symbol `{0}` is not in the alphabet")]
    UnknownStart(String),
    #[error("grammar line {0}: expected `x1 x2 -> y1 y2`, `start: s` or `terminals: ...`")]
    BadLine(usize),
    #[error("grammar has no start symbol")]
    NoStart,
}

impl Type0Grammar {
    pub fn new(
        start: impl Into<String>,
        terminals: &[&str],
        productions: Vec<(Vec<&str>, Vec<&str>)>,
    ) -> Result<Type0Grammar, GrammarError> {
        let productions: Vec<Production> = productions
            .into_iter()
            .map(|(lhs, rhs)| Production {
                lhs: lhs.into_iter().map(String::from).collect(),
                rhs: rhs.into_iter().map(String::from).collect(),
            })
            .collect();
        let mut alphabet: BTreeSet<String> = BTreeSet::new();
        let start = start.into();
        alphabet.insert(start.clone());
        for p in &productions {
            alphabet.extend(p.lhs.iter().cloned());
            alphabet.extend(p.rhs.iter().cloned());
        }
        alphabet.extend(terminals.iter().map(|t| t.to_string()));
        let g = Type0Grammar {
            alphabet,
            terminals: terminals.iter().map(|t| t.to_string()).collect(),
            start,
            productions,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        for (i, p) in self.productions.iter().enumerate() {
            if p.lhs.is_empty() {
                return Err(GrammarError::EmptyLhs(i));
            }
        }
        for sym in &self.alphabet {
            if sym.contains('#') || sym.contains('~') {
                return Err(GrammarError::ReservedSpelling(sym.clone()));
            }
        }
        for t in &self.terminals {
            if !self.alphabet.contains(t) {
                return Err(GrammarError::UnknownTerminal(t.clone()));
            }
        }
        if !self.alphabet.contains(&self.start) {
            return Err(GrammarError::UnknownStart(self.start.clone()));
        }
        Ok(())
    }

    /// Lines `x1 x2 -> y1 y2` (rhs may be empty), `start: s`,
    /// `terminals: a b`.
    pub fn parse(text: &str) -> Result<Type0Grammar, GrammarError> {
        let mut productions = Vec::new();
        let mut start = None;
        let mut terminals: BTreeSet<String> = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("start:") {
                start = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("terminals:") {
                terminals.extend(rest.split_whitespace().map(String::from));
            } else if let Some((lhs, rhs)) = line.split_once("->") {
                productions.push(Production {
                    lhs: lhs.split_whitespace().map(String::from).collect(),
                    rhs: rhs.split_whitespace().map(String::from).collect(),
                });
            } else {
                return Err(GrammarError::BadLine(i + 1));
            }
        }
        let start = start.ok_or(GrammarError::NoStart)?;
        let mut alphabet = terminals.clone();
        alphabet.insert(start.clone());
        for p in &productions {
            alphabet.extend(p.lhs.iter().cloned());
            alphabet.extend(p.rhs.iter().cloned());
        }
        let g = Type0Grammar { alphabet, terminals, start, productions };
        g.validate()?;
        Ok(g)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("start: {}\n", self.start));
        out.push_str(&format!(
            "terminals: {}\n",
            self.terminals.iter().cloned().collect::<Vec<_>>().join(" ")
        ));
        for p in &self.productions {
            out.push_str(&format!("{} -> {}\n", p.lhs.join(" "), p.rhs.join(" ")));
        }
        out
    }
}

/// One rewriting step: production `production` applied at `position`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub production: usize,
    pub position: usize,
}

/// A rewriting history from `start` through `steps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteTrace {
    pub start: Vec<String>,
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    /// All words the trace passes through; errors if any step is invalid.
    pub fn replay(&self, g: &Type0Grammar) -> Result<Vec<Vec<String>>, EncodeError> {
        let mut words = vec![self.start.clone()];
        let mut cur = self.start.clone();
        for (n, step) in self.steps.iter().enumerate() {
            let p = g
                .productions
                .get(step.production)
                .ok_or_else(|| EncodeError::BadTrace(format!("step {n}: no such production")))?;
            if step.position + p.lhs.len() > cur.len()
                || cur[step.position..step.position + p.lhs.len()] != p.lhs[..]
            {
                return Err(EncodeError::BadTrace(format!(
                    "step {n}: `{}` does not match at {}",
                    p.lhs.join(" "),
                    step.position
                )));
            }
            let mut next = cur[..step.position].to_vec();
            next.extend(p.rhs.iter().cloned());
            next.extend(cur[step.position + p.lhs.len()..].iter().cloned());
            words.push(next.clone());
            cur = next;
        }
        Ok(words)
    }

    pub fn final_word(&self, g: &Type0Grammar) -> Result<Vec<String>, EncodeError> {
        Ok(self.replay(g)?.pop().unwrap())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BfsLimits {
    /// Words longer than this are not expanded further.
    pub max_word_len: usize,
    /// Total number of distinct words explored.
    pub max_words: usize,
}

impl Default for BfsLimits {
    fn default() -> BfsLimits {
        BfsLimits { max_word_len: 12, max_words: 200_000 }
    }
}

/// Verdict of the bounded rewriting search.
#[derive(Clone, Debug)]
pub enum BfsOutcome {
    Found(RewriteTrace),
    /// The reachable set within the caps was exhausted.
    NotFoundExhausted,
    /// A cap fired; nothing can be claimed.
    NotFoundCapped,
}

/// Breadth-first rewriting from the start symbol towards `target`.
pub fn bfs_trace(g: &Type0Grammar, target: &[String], limits: &BfsLimits) -> BfsOutcome {
    let start = vec![g.start.clone()];
    let mut parent: HashMap<Vec<String>, (Vec<String>, RewriteStep)> = HashMap::new();
    let mut seen: HashSet<Vec<String>> = [start.clone()].into();
    let mut queue: VecDeque<Vec<String>> = [start.clone()].into();
    let mut capped = false;
    while let Some(word) = queue.pop_front() {
        if word[..] == *target {
            // walk parents back to the start
            let mut steps = Vec::new();
            let mut cur = word;
            while let Some((prev, step)) = parent.get(&cur) {
                steps.push(*step);
                cur = prev.clone();
            }
            steps.reverse();
            return BfsOutcome::Found(RewriteTrace { start, steps });
        }
        for (pi, p) in g.productions.iter().enumerate() {
            if p.lhs.len() > word.len() {
                continue;
            }
            for pos in 0..=(word.len() - p.lhs.len()) {
                if word[pos..pos + p.lhs.len()] != p.lhs[..] {
                    continue;
                }
                let mut next = word[..pos].to_vec();
                next.extend(p.rhs.iter().cloned());
                next.extend(word[pos + p.lhs.len()..].iter().cloned());
                if next.len() > limits.max_word_len {
                    capped = true;
                    continue;
                }
                if seen.len() >= limits.max_words {
                    capped = true;
                    continue;
                }
                if seen.insert(next.clone()) {
                    parent.insert(next.clone(), (word.clone(), RewriteStep { production: pi, position: pos }));
                    queue.push_back(next);
                }
            }
        }
    }
    if capped {
        BfsOutcome::NotFoundCapped
    } else {
        BfsOutcome::NotFoundExhausted
    }
}

// ---------------------------------------------------------------------------
// the encoding formulas

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("the designated variable `{0}` occurs in the input formulas")]
    QOccurs(String),
    #[error("no rewriting trace found within the search budget; membership unknown")]
    NoTrace,
    #[error("invalid rewriting trace: {0}")]
    BadTrace(String),
    #[error("derivation is not of the encoding shape: {0}")]
    Shape(String),
    #[error("scheme `{0:?}` does not support this operation")]
    Scheme(Scheme),
    #[error("internalization self-test failed at {item}: {message}")]
    Selftest { item: &'static str, message: String },
    #[error("internal: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Full exponential, no brackets.
    Malc,
    /// Relevant modality, no brackets.
    Relevant,
    /// The 2015 bracketed system without stoups.
    B2015,
    /// The 2018 bracketed system without stoups.
    B2018,
    /// The original 2018 stoup system (extra `!` on the `Z` formulas).
    B2018st,
    /// Buszkowski's one-division B-rules.
    Buszkowski,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Scheme> {
        Some(match s {
            "malc" => Scheme::Malc,
            "relevant" => Scheme::Relevant,
            "b2015" => Scheme::B2015,
            "b2018" => Scheme::B2018,
            "b2018st" => Scheme::B2018st,
            "buszkowski" => Scheme::Buszkowski,
            _ => return None,
        })
    }

    /// The calculus the encoding derivations live in (additive-free).
    pub fn calculus(self) -> CalculusId {
        let name = match self {
            Scheme::Malc => "!malc*+additives=off",
            Scheme::Relevant => "!r-malc*+additives=off",
            Scheme::B2015 => "b2015+additives=off",
            Scheme::B2018 => "b2018+additives=off",
            Scheme::B2018st => "b2018st+additives=off",
            Scheme::Buszkowski => "l*(/)",
        };
        CalculusId::by_name(name).unwrap()
    }
}

/// One formula per production: `x1 ... xk => y1 ... ym` becomes
/// `(x1*...*xk)/(y1*...*ym)`; an ε-rule contributes the bare product.
pub fn grammar_formulas(g: &Type0Grammar) -> Vec<Formula> {
    g.productions
        .iter()
        .map(|p| {
            let lhs = product_of_vars(&p.lhs);
            if p.rhs.is_empty() {
                lhs
            } else {
                Formula::rdiv(lhs, product_of_vars(&p.rhs))
            }
        })
        .collect()
}

fn product_of_vars(word: &[String]) -> Formula {
    let mut it = word.iter();
    let first = Formula::var(it.next().expect("non-empty word").clone());
    it.fold(first, |acc, v| Formula::prod(acc, Formula::var(v.clone())))
}

fn ss() -> Formula {
    Formula::rdiv(Formula::var("s"), Formula::var("s"))
}

fn diadia(q: &str) -> Formula {
    Formula::dia(Formula::dia(Formula::var(q)))
}

/// `Z_i = ([](!A_i * <><>q))/q`.
fn z_formula(a: &Formula, q: &str) -> Formula {
    Formula::rdiv(
        Formula::boxinv(Formula::prod(Formula::bang(a.clone()), diadia(q))),
        Formula::var(q),
    )
}

/// The double-bracketed item `[[q]]`.
fn qq_island(q: &str) -> TreeTerm {
    TreeTerm::Bracketed(MetaFormula::of_items(vec![TreeTerm::Bracketed(
        MetaFormula::of_formulas(vec![Formula::var(q)]),
    )]))
}

/// The meta-formula internalising `a` in the scheme's calculus.
pub fn internalizer(a: &[Formula], scheme: Scheme, q: &str) -> Result<MetaFormula, EncodeError> {
    if a.iter().any(|f| formula_mentions(f, q)) {
        return Err(EncodeError::QOccurs(q.to_string()));
    }
    let mut items: Vec<TreeTerm> = Vec::new();
    match scheme {
        Scheme::Malc => {
            for f in a {
                items.push(TreeTerm::Leaf(Formula::bang(f.clone())));
            }
            Ok(MetaFormula::of_items(items))
        }
        Scheme::Relevant => {
            for f in a {
                let banged = Formula::bang(f.clone());
                items.push(TreeTerm::Leaf(Formula::rdiv(Formula::Unit, banged.clone())));
                items.push(TreeTerm::Leaf(banged));
            }
            Ok(MetaFormula::of_items(items))
        }
        Scheme::B2015 => {
            for f in a {
                let x = Formula::bang(Formula::boxinv(f.clone()));
                items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), x.clone()))));
                items.push(TreeTerm::Leaf(x));
            }
            Ok(MetaFormula::of_items(items))
        }
        Scheme::B2018 => {
            for f in a {
                let z = Formula::bang(z_formula(f, q));
                items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), z.clone()))));
                items.push(TreeTerm::Leaf(z));
            }
            items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), diadia(q)))));
            items.push(qq_island(q));
            Ok(MetaFormula::of_items(items))
        }
        Scheme::B2018st => {
            let mut members = Vec::new();
            for f in a {
                let z = Formula::bang(z_formula(f, q));
                members.push(Formula::rdiv(ss(), z.clone()));
                members.push(z);
            }
            members.push(Formula::rdiv(ss(), diadia(q)));
            Ok(MetaFormula::new(Stoup::from(members), vec![qq_island(q)]))
        }
        Scheme::Buszkowski => Err(EncodeError::Scheme(scheme)),
    }
}

/// The meta-formula V-internalising the B-formulas `bs` for goal variables
/// `ts`: `!((s/s)/!Z_{i,j}), !Z_{i,j}, ..., !((s/s)/<><>q), !<><>q` with
/// `Z_{i,j} = ([](t_j/((t_j/!B_i)/!<><>q)))/q`.
pub fn v_internalizer(bs: &[Formula], ts: &[String], q: &str) -> Result<MetaFormula, EncodeError> {
    if bs.iter().any(|f| formula_mentions(f, q)) {
        return Err(EncodeError::QOccurs(q.to_string()));
    }
    let mut items = Vec::new();
    for t in ts {
        for b in bs {
            let tj = Formula::var(t.clone());
            let z = Formula::bang(Formula::rdiv(
                Formula::boxinv(Formula::rdiv(
                    tj.clone(),
                    Formula::rdiv(
                        Formula::rdiv(tj, Formula::bang(b.clone())),
                        Formula::bang(diadia(q)),
                    ),
                )),
                Formula::var(q),
            ));
            items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), z.clone()))));
            items.push(TreeTerm::Leaf(z));
        }
    }
    items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), diadia(q)))));
    items.push(TreeTerm::Leaf(Formula::bang(diadia(q))));
    Ok(MetaFormula::of_items(items))
}

fn formula_mentions(f: &Formula, q: &str) -> bool {
    match f {
        Formula::Var(v) => v == q,
        Formula::Unit => false,
        Formula::LDiv(a, b)
        | Formula::RDiv(a, b)
        | Formula::Prod(a, b)
        | Formula::Conj(a, b)
        | Formula::Disj(a, b) => formula_mentions(a, q) || formula_mentions(b, q),
        Formula::Bang(a) | Formula::Dia(a) | Formula::Box(a) => formula_mentions(a, q),
    }
}

/// `∏Γ` with `∏[Γ] = <>(∏Γ)`; stoup members contribute `!`-factors first.
pub fn big_product(m: &MetaFormula) -> Result<Formula, EncodeError> {
    let mut factors: Vec<Formula> = m
        .stoup
        .members
        .iter()
        .map(|f| Formula::bang(f.clone()))
        .collect();
    for item in &m.items {
        factors.push(match item {
            TreeTerm::Leaf(f) => f.clone(),
            TreeTerm::Bracketed(inner) => Formula::dia(big_product(inner)?),
        });
    }
    let mut it = factors.into_iter();
    let first = it.next().ok_or_else(|| {
        EncodeError::Internal("product of an empty meta-formula".into())
    })?;
    Ok(it.fold(first, |acc, f| Formula::prod(acc, f)))
}

// ---------------------------------------------------------------------------
// construction helpers

fn rebuild(
    c: &CalculusId,
    rule: RuleId,
    concl: Sequent,
    children: Vec<Derivation>,
) -> Result<Derivation, EncodeError> {
    let kids: Vec<Sequent> = children.iter().map(|d| d.sequent.clone()).collect();
    let app = find_app(c, &concl, rule, &kids).ok_or_else(|| {
        EncodeError::Internal(format!("no {rule} instance derives `{concl}`"))
    })?;
    Ok(Derivation::new(concl, app, children))
}

fn var_ax(v: &str) -> Derivation {
    let f = Formula::var(v);
    Derivation::leaf(
        Sequent::new(MetaFormula::of_formulas(vec![f.clone()]), f),
        RuleId::Id,
    )
}

fn formula_ax(f: &Formula) -> Derivation {
    Derivation::leaf(
        Sequent::new(MetaFormula::of_formulas(vec![f.clone()]), f.clone()),
        RuleId::Id,
    )
}

/// `y1, ..., yk => y1*...*yk` by a left-nested `*R` tree over axioms.
fn word_product_derivation(c: &CalculusId, word: &[String]) -> Result<Derivation, EncodeError> {
    if word.len() == 1 {
        return Ok(var_ax(&word[0]));
    }
    let left = word_product_derivation(c, &word[..word.len() - 1])?;
    let right = var_ax(&word[word.len() - 1]);
    let concl = Sequent::new(
        MetaFormula::of_formulas(word.iter().map(|v| Formula::var(v.clone())).collect()),
        product_of_vars(word),
    );
    rebuild(c, RuleId::ProdR, concl, vec![left, right])
}

/// Sequent `Φ ⊕ word => s` (word appended as variable items).
fn phi_word_sequent(phi: &MetaFormula, word: &[String], goal: &str) -> Sequent {
    let mut items = phi.items.clone();
    items.extend(word.iter().map(|v| TreeTerm::Leaf(Formula::var(v.clone()))));
    Sequent::new(
        MetaFormula::new(phi.stoup.clone(), items),
        Formula::var(goal),
    )
}

/// `[[q]] => <><>q`.
fn qq_derivation(c: &CalculusId, q: &str) -> Result<Derivation, EncodeError> {
    let inner_ax = var_ax(q);
    let one = rebuild(
        c,
        RuleId::DiaR,
        Sequent::new(
            MetaFormula::of_items(vec![TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                Formula::var(q),
            ]))]),
            Formula::dia(Formula::var(q)),
        ),
        vec![inner_ax],
    )?;
    rebuild(
        c,
        RuleId::DiaR,
        Sequent::new(MetaFormula::of_items(vec![qq_island(q)]), diadia(q)),
        vec![one],
    )
}

/// The `s/s, ..., s/s, s => s` chain.
fn ss_chain(c: &CalculusId, n: usize) -> Result<Derivation, EncodeError> {
    let mut der = var_ax("s");
    for k in 1..=n {
        let mut items: Vec<Formula> = std::iter::repeat(ss()).take(k).collect();
        items.push(Formula::var("s"));
        let concl = Sequent::new(MetaFormula::of_formulas(items), Formula::var("s"));
        der = rebuild(c, RuleId::RDivL, concl, vec![var_ax("s"), der])?;
    }
    Ok(der)
}

// ---------------------------------------------------------------------------
// per-scheme templates: the base sequent Φ, s => s and the landing rule

/// Structure of an internalizer output, recovered from the meta-formula so
/// the self-test exercises exactly the Φ it was given.
struct PhiShape {
    /// The encoded hypotheses, in order, with the item index (or stoup
    /// index) of the `!`-element the landing rule contracts.
    anchors: Vec<(Formula, usize)>,
}

fn phi_shape(phi: &MetaFormula, scheme: Scheme, q: &str) -> Result<PhiShape, EncodeError> {
    let fail = |msg: &str| EncodeError::Selftest { item: "base", message: msg.to_string() };
    let mut anchors = Vec::new();
    match scheme {
        Scheme::Malc => {
            for (i, item) in phi.items.iter().enumerate() {
                match item.as_leaf() {
                    Some(Formula::Bang(a)) => anchors.push(((**a).clone(), i)),
                    _ => return Err(fail("expected a !-item")),
                }
            }
        }
        Scheme::Relevant => {
            for (i, pair) in phi.items.chunks(2).enumerate() {
                let [guard, banged] = pair else { return Err(fail("expected pairs")) };
                let Some(Formula::Bang(a)) = banged.as_leaf() else {
                    return Err(fail("expected !A as the second pair element"));
                };
                if guard.as_leaf()
                    != Some(&Formula::rdiv(Formula::Unit, Formula::bang((**a).clone())))
                {
                    return Err(fail("expected 1/!A as the first pair element"));
                }
                anchors.push(((**a).clone(), 2 * i + 1));
            }
        }
        Scheme::B2015 => {
            for (i, pair) in phi.items.chunks(2).enumerate() {
                let [head, banged] = pair else { return Err(fail("expected pairs")) };
                let Some(Formula::Bang(x)) = banged.as_leaf() else {
                    return Err(fail("expected ![]A"));
                };
                let Formula::Box(a) = &**x else { return Err(fail("expected ![]A")) };
                let expect = Formula::bang(Formula::rdiv(ss(), Formula::bang((**x).clone())));
                if head.as_leaf() != Some(&expect) {
                    return Err(fail("expected !((s/s)/![]A)"));
                }
                anchors.push(((**a).clone(), 2 * i + 1));
            }
        }
        Scheme::B2018 => {
            if phi.items.len() < 2 {
                return Err(fail("meta-formula too short"));
            }
            let n = (phi.items.len() - 2) / 2;
            for i in 0..n {
                let Some(Formula::Bang(z)) = phi.items[2 * i + 1].as_leaf() else {
                    return Err(fail("expected !Z"));
                };
                let a = z_payload(z).ok_or_else(|| fail("malformed Z formula"))?;
                anchors.push((a, 2 * i + 1));
            }
            if phi.items[phi.items.len() - 1] != qq_island(q) {
                return Err(fail("expected the trailing [[q]]"));
            }
        }
        Scheme::B2018st => {
            let members = &phi.stoup.members;
            if members.is_empty() || phi.items.len() != 1 || phi.items[0] != qq_island(q) {
                return Err(fail("expected a stoup plus [[q]]"));
            }
            let n = (members.len() - 1) / 2;
            for i in 0..n {
                let Formula::Bang(z) = &members[2 * i + 1] else {
                    return Err(fail("expected !Z in the stoup"));
                };
                let a = z_payload(z).ok_or_else(|| fail("malformed Z formula"))?;
                anchors.push((a, 2 * i + 1));
            }
        }
        Scheme::Buszkowski => return Err(EncodeError::Scheme(scheme)),
    }
    Ok(PhiShape { anchors })
}

/// The `A` inside `Z = ([](!A * <><>q))/q`.
fn z_payload(z: &Formula) -> Option<Formula> {
    let Formula::RDiv(num, _) = z else { return None };
    let Formula::Box(inner) = &**num else { return None };
    let Formula::Prod(banged, _) = &**inner else { return None };
    let Formula::Bang(a) = &**banged else { return None };
    Some((**a).clone())
}

/// Derivation of `Φ, s => s`.
fn phi_base_derivation(
    c: &CalculusId,
    phi: &MetaFormula,
    scheme: Scheme,
    q: &str,
) -> Result<Derivation, EncodeError> {
    match scheme {
        Scheme::Malc => {
            let mut der = var_ax("s");
            for k in (0..phi.items.len()).rev() {
                let mut items: Vec<TreeTerm> = phi.items[k..].to_vec();
                items.push(TreeTerm::Leaf(Formula::var("s")));
                let concl =
                    Sequent::new(MetaFormula::of_items(items), Formula::var("s"));
                der = rebuild(c, RuleId::BangW, concl, vec![der])?;
            }
            Ok(der)
        }
        Scheme::Relevant => {
            let mut der = var_ax("s");
            for pair in phi.items.chunks(2).rev() {
                let banged = pair[1].as_leaf().unwrap().clone();
                // 1, <rest> => s
                let mut unit_items = vec![TreeTerm::Leaf(Formula::Unit)];
                unit_items.extend(der.sequent.antecedent.items.clone());
                let unit_seq =
                    Sequent::new(MetaFormula::of_items(unit_items), Formula::var("s"));
                der = rebuild(c, RuleId::UnitL, unit_seq, vec![der])?;
                let mut items = pair.to_vec();
                items.extend(der.sequent.antecedent.items[1..].iter().cloned());
                let concl = Sequent::new(MetaFormula::of_items(items), Formula::var("s"));
                der = rebuild(c, RuleId::RDivL, concl, vec![formula_ax(&banged), der])?;
            }
            Ok(der)
        }
        Scheme::B2015 | Scheme::B2018 => {
            let is_head = |f: &Formula| {
                matches!(f, Formula::Bang(inner)
                    if matches!(&**inner, Formula::RDiv(num, _) if **num == ss()))
            };
            // the phi items with the (s/s)-heads still unbanged
            let unbanged: Vec<TreeTerm> = phi
                .items
                .iter()
                .map(|it| match it.as_leaf() {
                    Some(f @ Formula::Bang(inner)) if is_head(f) => {
                        TreeTerm::Leaf((**inner).clone())
                    }
                    _ => it.clone(),
                })
                .collect();
            let head_positions: Vec<usize> = phi
                .items
                .iter()
                .enumerate()
                .filter(|(_, it)| it.as_leaf().is_some_and(is_head))
                .map(|(i, _)| i)
                .collect();
            // /L cascade: the i-th head fires once everything to its left
            // has already become s/s
            let mut der = ss_chain(c, head_positions.len())?;
            for (i, &h) in head_positions.iter().enumerate().rev() {
                let Some(Formula::RDiv(_, arg)) = unbanged[h].as_leaf() else {
                    unreachable!()
                };
                let left = match &**arg {
                    Formula::Dia(_) => qq_derivation(c, q)?,
                    other => formula_ax(other),
                };
                let mut items: Vec<TreeTerm> =
                    std::iter::repeat(TreeTerm::Leaf(ss())).take(i).collect();
                items.extend(unbanged[h..].iter().cloned());
                items.push(TreeTerm::Leaf(Formula::var("s")));
                let concl = Sequent::new(MetaFormula::of_items(items), Formula::var("s"));
                der = rebuild(c, RuleId::RDivL, concl, vec![left, der])?;
            }
            // wrap every head with !L, left to right
            let mut items = unbanged;
            for &h in &head_positions {
                items[h] = phi.items[h].clone();
                let mut with_s = items.clone();
                with_s.push(TreeTerm::Leaf(Formula::var("s")));
                let concl = Sequent::new(MetaFormula::of_items(with_s), Formula::var("s"));
                der = rebuild(c, RuleId::BangL, concl, vec![der])?;
            }
            Ok(der)
        }
        Scheme::B2018st => {
            let members = &phi.stoup.members;
            let n = (members.len() - 1) / 2;
            // item form: members as items, then [[q]], then s
            let chain = ss_chain(c, n + 1)?;
            let mut der = chain;
            // build the /L cascade: heads consume their arguments
            // rightmost first: the (s/s)/<><>q head against [[q]]
            {
                let head = members[members.len() - 1].clone();
                let mut items = vec![TreeTerm::Leaf(head)];
                items.push(qq_island(q));
                let mut with_chain: Vec<TreeTerm> =
                    std::iter::repeat(TreeTerm::Leaf(ss())).take(n).collect();
                with_chain.extend(items);
                with_chain.push(TreeTerm::Leaf(Formula::var("s")));
                let concl =
                    Sequent::new(MetaFormula::of_items(with_chain), Formula::var("s"));
                der = rebuild(c, RuleId::RDivL, concl, vec![qq_derivation(c, q)?, der])?;
            }
            for i in (0..n).rev() {
                let head = members[2 * i].clone();
                let banged = members[2 * i + 1].clone();
                let mut items: Vec<TreeTerm> =
                    std::iter::repeat(TreeTerm::Leaf(ss())).take(i).collect();
                items.push(TreeTerm::Leaf(head));
                items.push(TreeTerm::Leaf(banged.clone()));
                for j in i + 1..n {
                    items.push(TreeTerm::Leaf(members[2 * j].clone()));
                    items.push(TreeTerm::Leaf(members[2 * j + 1].clone()));
                }
                items.push(TreeTerm::Leaf(members[members.len() - 1].clone()));
                items.push(qq_island(q));
                items.push(TreeTerm::Leaf(Formula::var("s")));
                let concl = Sequent::new(MetaFormula::of_items(items), Formula::var("s"));
                der = rebuild(c, RuleId::RDivL, concl, vec![formula_ax(&banged), der])?;
            }
            // move every member into the stoup, front to back
            for k in 0..members.len() {
                let mut stoup = Stoup::from(members[..k + 1].to_vec());
                let mut items: Vec<TreeTerm> = members[k + 1..]
                    .iter()
                    .map(|f| TreeTerm::Leaf(f.clone()))
                    .collect();
                items.push(qq_island(q));
                items.push(TreeTerm::Leaf(Formula::var("s")));
                let concl = Sequent::new(
                    MetaFormula::new(std::mem::take(&mut stoup), items),
                    Formula::var("s"),
                );
                der = rebuild(c, RuleId::BangP, concl, vec![der])?;
            }
            Ok(der)
        }
        Scheme::Buszkowski => Err(EncodeError::Scheme(scheme)),
    }
}

/// The landing rule: from a derivation of `Φ, Δ1, A_i, Δ2 => C` build
/// `Φ, Δ1, Δ2 => C`. `a_pos` is the item position of the `A_i` occurrence in
/// the premise.
fn land(
    c: &CalculusId,
    phi: &MetaFormula,
    scheme: Scheme,
    q: &str,
    anchor: usize,
    a: &Formula,
    premise: Derivation,
    a_pos: usize,
) -> Result<Derivation, EncodeError> {
    let succ = premise.sequent.succedent.clone();
    let items = premise.sequent.antecedent.items.clone();
    let stoup = premise.sequent.antecedent.stoup.clone();
    let mk = |items: Vec<TreeTerm>| Sequent::new(MetaFormula::of_items(items), succ.clone());
    let mk_st =
        |st: Stoup, items: Vec<TreeTerm>| Sequent::new(MetaFormula::new(st, items), succ.clone());
    match scheme {
        Scheme::Malc | Scheme::Relevant => {
            // !L then contract against the Φ copy.
            let mut banged = items.clone();
            banged[a_pos] = TreeTerm::Leaf(Formula::bang(a.clone()));
            let der = rebuild(c, RuleId::BangL, mk(banged), vec![premise])?;
            let mut contracted = items.clone();
            contracted.remove(a_pos);
            let concl = mk(contracted);
            let kids = vec![der.sequent.clone()];
            for rule in [RuleId::BangC, RuleId::BangNC1, RuleId::BangNC2] {
                if let Some(app) = find_app(c, &concl, rule, &kids) {
                    return Ok(Derivation::new(concl, app, vec![der]));
                }
            }
            Err(EncodeError::Selftest {
                item: "landing",
                message: format!("no contraction absorbs the copy of !{a}"),
            })
        }
        Scheme::B2015 => {
            let x = Formula::boxinv(a.clone());
            // bracket the bare A
            let mut bracketed = items.clone();
            bracketed[a_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![x.clone()]));
            let der = rebuild(c, RuleId::BoxL, mk(bracketed.clone()), vec![premise])?;
            let mut banged = items.clone();
            banged[a_pos] =
                TreeTerm::Bracketed(MetaFormula::of_formulas(vec![Formula::bang(x.clone())]));
            let der = rebuild(c, RuleId::BangL, mk(banged), vec![der])?;
            let mut contracted = items.clone();
            contracted.remove(a_pos);
            if phi.items.get(anchor).and_then(TreeTerm::as_leaf)
                != Some(&Formula::bang(x.clone()))
            {
                return Err(EncodeError::Selftest {
                    item: "landing",
                    message: format!("![]({a}) is not in the meta-formula"),
                });
            }
            rebuild(c, RuleId::BangC, mk(contracted), vec![der]).map_err(|e| {
                EncodeError::Selftest { item: "landing", message: e.to_string() }
            })
        }
        Scheme::B2018 => {
            let z = z_formula(a, q);
            let phi_len = phi.items.len();
            let island_pos = phi_len - 1; // the [[q]] inside Φ
            if phi.items.get(anchor).and_then(TreeTerm::as_leaf)
                != Some(&Formula::bang(z.clone()))
            {
                return Err(EncodeError::Selftest {
                    item: "landing",
                    message: format!("!Z for {a} is not in the meta-formula"),
                });
            }
            // downward: <>L twice turns [[q]] into <><>q
            let step = |items: Vec<TreeTerm>| mk(items);
            let mut cur = premise;
            let mut with_inner = items.clone();
            with_inner[island_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                Formula::dia(Formula::var(q)),
            ]));
            cur = rebuild(c, RuleId::DiaL, step(with_inner), vec![cur])?;
            let mut with_dd = items.clone();
            with_dd[island_pos] = TreeTerm::Leaf(diadia(q));
            cur = rebuild(c, RuleId::DiaL, step(with_dd.clone()), vec![cur])?;
            // !L: the A occurrence becomes !A
            let mut banged = with_dd.clone();
            banged[a_pos] = TreeTerm::Leaf(Formula::bang(a.clone()));
            cur = rebuild(c, RuleId::BangL, step(banged.clone()), vec![cur])?;
            // move !A next to <><>q
            let mut adjacent = banged.clone();
            let moved = adjacent.remove(a_pos);
            adjacent.insert(island_pos, moved);
            cur = crate::project::permute_to(c, cur, &step(adjacent.clone()))
                .map_err(|e| EncodeError::Internal(e.to_string()))?;
            // *L: !A * <><>q
            let mut prod = adjacent.clone();
            prod.remove(island_pos + 1);
            prod[island_pos] =
                TreeTerm::Leaf(Formula::prod(Formula::bang(a.clone()), diadia(q)));
            cur = rebuild(c, RuleId::ProdL, step(prod.clone()), vec![cur])?;
            // []L
            let mut boxed = prod.clone();
            boxed[island_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                Formula::boxinv(Formula::prod(Formula::bang(a.clone()), diadia(q))),
            ]));
            cur = rebuild(c, RuleId::BoxL, step(boxed.clone()), vec![cur])?;
            // /L against q
            let mut with_z = boxed.clone();
            with_z[island_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                z.clone(),
                Formula::var(q),
            ]));
            cur = rebuild(c, RuleId::RDivL, step(with_z.clone()), vec![var_ax(q), cur])?;
            // !L inside the island
            let mut with_bz = with_z.clone();
            with_bz[island_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                Formula::bang(z.clone()),
                Formula::var(q),
            ]));
            cur = rebuild(c, RuleId::BangL, step(with_bz.clone()), vec![cur])?;
            // !C against the Φ copy restores [[q]]
            let mut final_items = with_bz;
            final_items[island_pos] = qq_island(q);
            rebuild(c, RuleId::BangC, step(final_items), vec![cur]).map_err(|e| {
                EncodeError::Selftest { item: "landing", message: e.to_string() }
            })
        }
        Scheme::B2018st => {
            let z = Formula::bang(z_formula(a, q));
            if phi.stoup.members.get(anchor) != Some(&z) {
                return Err(EncodeError::Selftest {
                    item: "landing",
                    message: format!("!Z for {a} is not in the stoup"),
                });
            }
            let Formula::Bang(z_core) = &z else { unreachable!() };
            let island_pos = 0usize; // the [[q]] is the first item
            // downward: <>L twice
            let mut cur = premise;
            let mut with_inner = items.clone();
            with_inner[island_pos] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                Formula::dia(Formula::var(q)),
            ]));
            cur = rebuild(c, RuleId::DiaL, mk_st(stoup.clone(), with_inner), vec![cur])?;
            let mut with_dd = items.clone();
            with_dd[island_pos] = TreeTerm::Leaf(diadia(q));
            cur = rebuild(c, RuleId::DiaL, mk_st(stoup.clone(), with_dd.clone()), vec![cur])?;
            // !P downward: A moves into the stoup
            let mut st_a = stoup.clone();
            st_a.members.push(a.clone());
            let mut without_a = with_dd.clone();
            without_a.remove(a_pos);
            cur = rebuild(c, RuleId::BangP, mk_st(st_a, without_a.clone()), vec![cur])?;
            // !L downward: the stoup member leaves as !A in front
            let mut banged_front = without_a.clone();
            banged_front.insert(0, TreeTerm::Leaf(Formula::bang(a.clone())));
            cur = rebuild(c, RuleId::BangL, mk_st(stoup.clone(), banged_front.clone()), vec![cur])?;
            // *L
            let mut prod = banged_front.clone();
            prod.remove(1);
            prod[0] = TreeTerm::Leaf(Formula::prod(Formula::bang(a.clone()), diadia(q)));
            cur = rebuild(c, RuleId::ProdL, mk_st(stoup.clone(), prod.clone()), vec![cur])?;
            // []L
            let mut boxed = prod.clone();
            boxed[0] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![Formula::boxinv(
                Formula::prod(Formula::bang(a.clone()), diadia(q)),
            )]));
            cur = rebuild(c, RuleId::BoxL, mk_st(stoup.clone(), boxed.clone()), vec![cur])?;
            // /L against q
            let mut with_z = boxed.clone();
            with_z[0] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                (**z_core).clone(),
                Formula::var(q),
            ]));
            cur = rebuild(c, RuleId::RDivL, mk_st(stoup.clone(), with_z.clone()), vec![var_ax(q), cur])?;
            // !P downward inside the island: Z into the island stoup
            let mut with_zst = with_z.clone();
            with_zst[0] = TreeTerm::Bracketed(MetaFormula::new(
                Stoup::from(vec![(**z_core).clone()]),
                vec![TreeTerm::Leaf(Formula::var(q))],
            ));
            cur = rebuild(c, RuleId::BangP, mk_st(stoup.clone(), with_zst.clone()), vec![cur])?;
            // !L downward inside the island: the member leaves as !Z
            let mut with_bz = with_z.clone();
            with_bz[0] = TreeTerm::Bracketed(MetaFormula::of_formulas(vec![
                z.clone(),
                Formula::var(q),
            ]));
            cur = rebuild(c, RuleId::BangL, mk_st(stoup.clone(), with_bz.clone()), vec![cur])?;
            // !P downward: the island's !Z item came from the island stoup
            let mut with_bzst = with_z.clone();
            with_bzst[0] = TreeTerm::Bracketed(MetaFormula::new(
                Stoup::from(vec![z.clone()]),
                vec![TreeTerm::Leaf(Formula::var(q))],
            ));
            cur = rebuild(c, RuleId::BangP, mk_st(stoup.clone(), with_bzst.clone()), vec![cur])?;
            // !C against the stoup copy restores [[q]]
            let mut final_items = with_z;
            final_items[0] = qq_island(q);
            rebuild(c, RuleId::BangC, mk_st(stoup.clone(), final_items), vec![cur]).map_err(
                |e| EncodeError::Selftest { item: "landing", message: e.to_string() },
            )
        }
        Scheme::Buszkowski => Err(EncodeError::Scheme(scheme)),
    }
}

// ---------------------------------------------------------------------------
// the internalization self-test

/// Check that a node's subtree is locally valid, tolerating designated
/// unproven leaves (used to validate landing templates schematically).
fn check_below(
    c: &CalculusId,
    d: &Derivation,
    open: &Sequent,
) -> Result<(), String> {
    if d.sequent == *open && d.children.is_empty() {
        return Ok(());
    }
    let premises = premises_of(c, &d.sequent, &d.rule).map_err(|e| e.to_string())?;
    if premises.len() != d.children.len() {
        return Err(format!("arity mismatch at `{}`", d.sequent));
    }
    for (want, ch) in premises.iter().zip(&d.children) {
        if *want != ch.sequent {
            return Err(format!("premise mismatch at `{}`", d.sequent));
        }
        check_below(c, ch, open)?;
    }
    Ok(())
}

/// Verify that `phi` internalises `a`: (i) `Φ, s => s` is derivable by the
/// template; (ii) the landing rule template checks for each `A_i`;
/// (iii) `!A_1, ..., !A_N => ∏π_q(Φ)` is derivable in the full-exponential
/// calculus by search.
pub fn internalization_selftest(
    phi: &MetaFormula,
    a: &[Formula],
    scheme: Scheme,
    q: &str,
) -> Result<(), EncodeError> {
    let c = scheme.calculus();
    let shape = phi_shape(phi, scheme, q)?;

    // (i) the base sequent
    let base = phi_base_derivation(&c, phi, scheme, q)
        .map_err(|e| EncodeError::Selftest { item: "base", message: e.to_string() })?;
    if base.sequent != phi_word_sequent(phi, &["s".to_string()], "s") {
        return Err(EncodeError::Selftest {
            item: "base",
            message: format!("template proves `{}`", base.sequent),
        });
    }
    check(&c, &base).map_err(|e| EncodeError::Selftest { item: "base", message: e.to_string() })?;

    // (ii) the landing rule, schematically: Δ1 = Λ, Δ2 = s, C = s
    for ai in a {
        let (anchor, _) = shape
            .anchors
            .iter()
            .find(|(f, _)| f == ai)
            .map(|(f, k)| (*k, f.clone()))
            .ok_or_else(|| EncodeError::Selftest {
                item: "landing",
                message: format!("`{ai}` has no anchor in the meta-formula"),
            })?;
        let a_pos = phi.items.len();
        let mut items = phi.items.clone();
        items.push(TreeTerm::Leaf(ai.clone()));
        items.push(TreeTerm::Leaf(Formula::var("s")));
        let open = Sequent::new(
            MetaFormula::new(phi.stoup.clone(), items),
            Formula::var("s"),
        );
        let placeholder = Derivation::leaf(open.clone(), RuleId::Id);
        let landed = land(&c, phi, scheme, q, anchor, ai, placeholder, a_pos)?;
        if landed.sequent != phi_word_sequent(phi, &["s".to_string()], "s") {
            return Err(EncodeError::Selftest {
                item: "landing",
                message: format!("template lands at `{}`", landed.sequent),
            });
        }
        check_below(&c, &landed, &open)
            .map_err(|e| EncodeError::Selftest { item: "landing", message: e })?;
    }

    // (iii) the projected hypotheses derive the projected meta-formula:
    // each product factor is searched separately (the factors are small),
    // then a *R spine composes the witnesses into a checked derivation of
    // `!A1, ..., !AN => prod(pi_q(phi))`.
    let projected = crate::project::project_meta(phi, crate::project::ProjMode::PiQ, q);
    let target = CalculusId::by_name("!malc*+additives=off").unwrap();
    let budget = SearchBudget { max_depth: 48, ..Default::default() };
    let factors: Vec<Formula> = projected
        .items
        .iter()
        .map(|it| it.as_leaf().cloned().ok_or_else(|| EncodeError::Internal("bracket survived projection".into())))
        .collect::<Result<_, _>>()?;
    let hypotheses: Vec<Formula> = a.iter().map(|f| Formula::bang(f.clone())).collect();
    let mut next_hyp = 0usize;
    let mut pieces: Vec<Derivation> = Vec::new();
    for factor in &factors {
        let empty = Sequent::new(MetaFormula::empty(), factor.clone());
        if let Ok(SearchVerdict::Derivable(d)) =
            search(&target, &empty, &budget).map_err(|e| EncodeError::Internal(e.to_string()))
        {
            pieces.push(d);
            continue;
        }
        let Some(h) = hypotheses.get(next_hyp) else {
            return Err(EncodeError::Selftest {
                item: "projection",
                message: format!("no hypothesis left to derive `{factor}`"),
            });
        };
        let from_hyp = Sequent::new(MetaFormula::of_formulas(vec![h.clone()]), factor.clone());
        match search(&target, &from_hyp, &budget)
            .map_err(|e| EncodeError::Internal(e.to_string()))?
        {
            SearchVerdict::Derivable(d) => {
                next_hyp += 1;
                pieces.push(d);
            }
            v => {
                return Err(EncodeError::Selftest {
                    item: "projection",
                    message: format!("`{from_hyp}` not found derivable: {v:?}"),
                })
            }
        }
    }
    if next_hyp != hypotheses.len() {
        return Err(EncodeError::Selftest {
            item: "projection",
            message: "some hypotheses were never consumed".into(),
        });
    }
    let mut it = pieces.into_iter();
    let mut der = it.next().ok_or_else(|| EncodeError::Internal("empty product".into()))?;
    for piece in it {
        let mut items = der.sequent.antecedent.items.clone();
        items.extend(piece.sequent.antecedent.items.iter().cloned());
        let concl = Sequent::new(
            MetaFormula::of_items(items),
            Formula::prod(der.sequent.succedent.clone(), piece.sequent.succedent.clone()),
        );
        der = rebuild(&target, RuleId::ProdR, concl, vec![der, piece])?;
    }
    check(&target, &der)
        .map_err(|e| EncodeError::Selftest { item: "projection", message: e.to_string() })?;
    let want = Sequent::new(
        MetaFormula::of_formulas(hypotheses),
        big_product(&projected)?,
    );
    if der.sequent != want {
        return Err(EncodeError::Selftest {
            item: "projection",
            message: format!("composed `{}`, wanted `{want}`", der.sequent),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// derivation synthesis from rewriting traces

pub struct Synthesis {
    pub calculus: CalculusId,
    pub derivation: Derivation,
    pub trace: RewriteTrace,
}

/// Build a checked derivation of `Φ_G, a1, ..., an => s` (or the B-rule
/// sequent `z1, ..., zn => s`) from a rewriting trace found by bounded BFS.
pub fn synthesize_sequent_derivation(
    g: &Type0Grammar,
    word: &[String],
    scheme: Scheme,
    q: &str,
    limits: &BfsLimits,
) -> Result<Synthesis, EncodeError> {
    let trace = match bfs_trace(g, word, limits) {
        BfsOutcome::Found(t) => t,
        _ => return Err(EncodeError::NoTrace),
    };
    synthesize_from_trace(g, &trace, scheme, q)
}

pub fn synthesize_from_trace(
    g: &Type0Grammar,
    trace: &RewriteTrace,
    scheme: Scheme,
    q: &str,
) -> Result<Synthesis, EncodeError> {
    if scheme == Scheme::Buszkowski {
        return synthesize_buszkowski(g, trace);
    }
    let c = scheme.calculus();
    let formulas = grammar_formulas(g);
    let phi = internalizer(&formulas, scheme, q)?;
    let shape = phi_shape(&phi, scheme, q)?;
    let words = trace.replay(g)?;
    let mut der = phi_base_derivation(&c, &phi, scheme, q)?;
    let item_offset = phi.items.len();
    for (t, step) in trace.steps.iter().enumerate() {
        let before = &words[t];
        let after = &words[t + 1];
        let p = &g.productions[step.production];
        let pos = step.position;
        // 1. collapse the lhs items into their product
        let mut cur = der;
        if p.lhs.len() > 1 {
            for k in (1..p.lhs.len()).rev() {
                // conclusion: prefix ++ [product of lhs[..k+1] partially] ...
                let collapsed = product_of_vars(&p.lhs[..k + 1]);
                let mut word_items: Vec<Formula> = before[..pos]
                    .iter()
                    .map(|v| Formula::var(v.clone()))
                    .collect();
                word_items.push(collapsed);
                word_items.extend(
                    p.lhs[k + 1..].iter().map(|v| Formula::var(v.clone())),
                );
                word_items.extend(
                    before[pos + p.lhs.len()..].iter().map(|v| Formula::var(v.clone())),
                );
                let mut items = phi.items.clone();
                items.extend(word_items.into_iter().map(TreeTerm::Leaf));
                let concl = Sequent::new(
                    MetaFormula::new(phi.stoup.clone(), items),
                    Formula::var("s"),
                );
                cur = rebuild(&c, RuleId::ProdL, concl, vec![cur])?;
            }
        }
        // 2. /L against the rhs product (absent for ε-rules)
        let a_formula = &formulas[step.production];
        if !p.rhs.is_empty() {
            let rhs_der = word_product_derivation(&c, &p.rhs)?;
            let mut word_items: Vec<Formula> =
                after[..pos].iter().map(|v| Formula::var(v.clone())).collect();
            word_items.push(a_formula.clone());
            word_items.extend(after[pos..].iter().map(|v| Formula::var(v.clone())));
            let mut items = phi.items.clone();
            items.extend(word_items.into_iter().map(TreeTerm::Leaf));
            let concl = Sequent::new(
                MetaFormula::new(phi.stoup.clone(), items),
                Formula::var("s"),
            );
            cur = rebuild(&c, RuleId::RDivL, concl, vec![rhs_der, cur])?;
        }
        // 3. land the production formula back into Φ
        let (_, anchor) = shape
            .anchors
            .iter()
            .find(|(f, _)| f == a_formula)
            .ok_or_else(|| EncodeError::Internal("production formula has no anchor".into()))?
            .clone();
        der = land(&c, &phi, scheme, q, anchor, a_formula, cur, item_offset + pos)?;
        debug_assert_eq!(der.sequent, phi_word_sequent(&phi, after, "s"));
    }
    Ok(Synthesis { calculus: c, derivation: der, trace: trace.clone() })
}

// ---------------------------------------------------------------------------
// Buszkowski's one-division encoding

fn mangle(sym: &str, production: usize) -> String {
    format!("{sym}#{production}")
}

fn barred(sym: &str, production: usize) -> String {
    format!("{sym}~#{production}")
}

/// The seven B-rule families of one production: (1),(3),(5),(7) once each,
/// (2),(4),(6) once per alphabet symbol.
pub fn buszkowski_rules(g: &Type0Grammar) -> Vec<BRule> {
    let s = g.start.clone();
    let mut out = Vec::new();
    for (pi, p) in g.productions.iter().enumerate() {
        let a = mangle("a", pi);
        let b = mangle("b", pi);
        let cc = mangle("c", pi);
        let e = mangle("e", pi);
        let f = mangle("f", pi);
        // (1): e, Δ => a from Δ => s
        out.push(BRule { qs: vec![], r: s.clone(), ps: vec![e.clone()], t: a.clone() });
        // (2): ȳ, Δ => a from Δ, y => a
        for y in &g.alphabet {
            out.push(BRule {
                qs: vec![y.clone()],
                r: a.clone(),
                ps: vec![barred(y, pi)],
                t: a.clone(),
            });
        }
        // (3): w̄1..w̄k, Δ => b from Δ, v1..vm => a
        out.push(BRule {
            qs: p.lhs.clone(),
            r: a.clone(),
            ps: p.rhs.iter().map(|w| barred(w, pi)).collect(),
            t: b.clone(),
        });
        // (4): ȳ, Δ => b from Δ, y => b
        for y in &g.alphabet {
            out.push(BRule {
                qs: vec![y.clone()],
                r: b.clone(),
                ps: vec![barred(y, pi)],
                t: b.clone(),
            });
        }
        // (5): f, Δ => c from Δ, e => b
        out.push(BRule { qs: vec![e.clone()], r: b.clone(), ps: vec![f.clone()], t: cc.clone() });
        // (6): y, Δ => c from Δ, ȳ => c
        for y in &g.alphabet {
            out.push(BRule {
                qs: vec![barred(y, pi)],
                r: cc.clone(),
                ps: vec![y.clone()],
                t: cc.clone(),
            });
        }
        // (7): Δ => s from Δ, f => c
        out.push(BRule { qs: vec![f.clone()], r: cc.clone(), ps: vec![], t: s.clone() });
    }
    out
}

/// The calculus `l*(/)` extended with the grammar's B-rules.
pub fn buszkowski_calculus(g: &Type0Grammar, primed: bool) -> CalculusId {
    CalculusId::by_name("l*(/)")
        .unwrap()
        .extend_with_b_rules(buszkowski_rules(g), primed)
        .unwrap()
}

fn word_sequent(word: &[String], goal: &str) -> Sequent {
    Sequent::new(
        MetaFormula::of_formulas(word.iter().map(|v| Formula::var(v.clone())).collect()),
        Formula::var(goal),
    )
}

fn synthesize_buszkowski(g: &Type0Grammar, trace: &RewriteTrace) -> Result<Synthesis, EncodeError> {
    let c = buszkowski_calculus(g, false);
    let words = trace.replay(g)?;
    let mut der = var_ax(&g.start);
    for (t, step) in trace.steps.iter().enumerate() {
        let before = &words[t];
        let after = &words[t + 1];
        let p = &g.productions[step.production];
        let pi = step.production;
        let pos = step.position;
        let prefix: Vec<String> = before[..pos].to_vec();
        let suffix: Vec<String> = before[pos + p.lhs.len()..].to_vec();
        // (1): e, before => a
        let mut word: Vec<String> = vec![mangle("e", pi)];
        word.extend(before.iter().cloned());
        der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("a", pi)), vec![der])?;
        // (2) repeatedly: rotate the suffix symbols to the front, barred
        for _ in 0..suffix.len() {
            let last = word.pop().unwrap();
            word.insert(0, barred(&last, pi));
            der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("a", pi)), vec![der])?;
        }
        // (3): replace the lhs block (now a suffix) by the barred rhs
        word.truncate(word.len() - p.lhs.len());
        for w in p.rhs.iter().rev() {
            word.insert(0, barred(w, pi));
        }
        der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("b", pi)), vec![der])?;
        // (4): rotate the prefix symbols
        for _ in 0..prefix.len() {
            let last = word.pop().unwrap();
            word.insert(0, barred(&last, pi));
            der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("b", pi)), vec![der])?;
        }
        // (5): e rotates out, f comes in
        assert_eq!(word.pop().as_deref(), Some(mangle("e", pi).as_str()));
        word.insert(0, mangle("f", pi));
        der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("c", pi)), vec![der])?;
        // (6): un-bar everything
        let barred_count = prefix.len() + p.rhs.len() + suffix.len();
        for _ in 0..barred_count {
            let last = word.pop().unwrap();
            let bare = last
                .strip_suffix(&format!("~#{pi}"))
                .ok_or_else(|| EncodeError::Internal("expected a barred symbol".into()))?;
            word.insert(0, bare.to_string());
            der = rebuild(&c, RuleId::B, word_sequent(&word, &mangle("c", pi)), vec![der])?;
        }
        // (7): f rotates out, back to s
        assert_eq!(word.pop().as_deref(), Some(mangle("f", pi).as_str()));
        der = rebuild(&c, RuleId::B, word_sequent(&word, &g.start), vec![der])?;
        debug_assert_eq!(word, *after);
    }
    Ok(Synthesis { calculus: c, derivation: der, trace: trace.clone() })
}

// ---------------------------------------------------------------------------
// the B-rule equivalence self-test

/// `r/q1...qm, q1, ..., qm => r`.
fn rq_applications(c: &CalculusId, rule: &BRule) -> Result<Derivation, EncodeError> {
    fn rq(rule: &BRule, from: usize) -> Formula {
        let mut acc = Formula::var(rule.r.clone());
        for qv in rule.qs[from..].iter().rev() {
            acc = Formula::rdiv(acc, Formula::var(qv.clone()));
        }
        acc
    }
    let mut der = var_ax(&rule.r);
    for k in (0..rule.qs.len()).rev() {
        let mut items = vec![rq(rule, k)];
        items.extend(rule.qs[k..].iter().map(|v| Formula::var(v.clone())));
        let concl = Sequent::new(MetaFormula::of_formulas(items), Formula::var(rule.r.clone()));
        der = rebuild(c, RuleId::RDivL, concl, vec![var_ax(&rule.qs[k]), der])?;
    }
    Ok(der)
}

/// The B'-to-B-axiom template: `B-formula, p1, ..., pk, r/q1..qm => t`
/// derivable in the pure one-division calculus from the given formula.
pub fn b_axiom_template(rule: &BRule, formula: &Formula) -> Result<Derivation, EncodeError> {
    let c = CalculusId::by_name("l*(/)").unwrap();
    let rq_formula = {
        let mut acc = Formula::var(rule.r.clone());
        for qv in rule.qs.iter().rev() {
            acc = Formula::rdiv(acc, Formula::var(qv.clone()));
        }
        acc
    };
    // Δ => r/q1...qm with Δ = [r/q1..qm]
    let mut der = rq_applications(&c, rule)?;
    for k in (0..rule.qs.len()).rev() {
        let mut inner = Formula::var(rule.r.clone());
        for qv in rule.qs[k..].iter().rev() {
            inner = Formula::rdiv(inner, Formula::var(qv.clone()));
        }
        let mut items = vec![rq_formula.clone()];
        items.extend(rule.qs[..k].iter().map(|v| Formula::var(v.clone())));
        let concl = Sequent::new(MetaFormula::of_formulas(items), inner);
        der = rebuild(&c, RuleId::RDivR, concl, vec![der])?;
    }
    // t/(r/q1..qm), r/q1..qm => t
    let t_head = Formula::rdiv(Formula::var(rule.t.clone()), rq_formula.clone());
    let concl = Sequent::new(
        MetaFormula::of_formulas(vec![t_head.clone(), rq_formula.clone()]),
        Formula::var(rule.t.clone()),
    );
    der = rebuild(&c, RuleId::RDivL, concl, vec![der, var_ax(&rule.t)])?;
    // unwrap the ps
    let mut acc = t_head;
    let mut der = der;
    for k in (0..rule.ps.len()).rev() {
        acc = Formula::rdiv(acc, Formula::var(rule.ps[k].clone()));
        let mut items = vec![acc.clone()];
        items.extend(rule.ps[k..].iter().map(|v| Formula::var(v.clone())));
        items.push(rq_formula.clone());
        let concl = Sequent::new(MetaFormula::of_formulas(items), Formula::var(rule.t.clone()));
        der = rebuild(&c, RuleId::RDivL, concl, vec![var_ax(&rule.ps[k]), der])?;
    }
    // the supplied formula must be the accumulated one
    if *formula != acc {
        return Err(EncodeError::Selftest {
            item: "b-formula",
            message: format!("expected `{acc}`, got `{formula}`"),
        });
    }
    Ok(der)
}

/// B-axioms derived by B-rules: `=> B-formula` in `l*(/)` + B-rules.
pub fn b_axiom_by_rule(g_calculus: &CalculusId, rule: &BRule) -> Result<Derivation, EncodeError> {
    let rq_formula = {
        let mut acc = Formula::var(rule.r.clone());
        for qv in rule.qs.iter().rev() {
            acc = Formula::rdiv(acc, Formula::var(qv.clone()));
        }
        acc
    };
    let e1 = rq_applications(g_calculus, rule)?;
    // B-rule: p1, ..., pk, r/q1..qm => t
    let mut items: Vec<Formula> = rule.ps.iter().map(|v| Formula::var(v.clone())).collect();
    items.push(rq_formula.clone());
    let concl = Sequent::new(MetaFormula::of_formulas(items), Formula::var(rule.t.clone()));
    let e2 = rebuild(g_calculus, RuleId::B, concl, vec![e1])?;
    // /R up to the closed axiom
    let mut der = e2;
    let mut succ = Formula::rdiv(Formula::var(rule.t.clone()), rq_formula);
    let mut left: Vec<Formula> = rule.ps.iter().map(|v| Formula::var(v.clone())).collect();
    loop {
        let concl = Sequent::new(
            MetaFormula::of_formulas(left.clone()),
            succ.clone(),
        );
        der = rebuild(g_calculus, RuleId::RDivR, concl, vec![der])?;
        match left.pop() {
            Some(p) => succ = Formula::rdiv(succ, p),
            None => break,
        }
    }
    Ok(der)
}

/// B' simulation of a B-rule instance: `p1, .., pk, r/q1..qm => t` with
/// axiom left premises.
pub fn b_prime_template(g: &Type0Grammar, rule: &BRule) -> Result<Derivation, EncodeError> {
    let c = buszkowski_calculus(g, true);
    let e1 = rq_applications(&c, rule)?;
    let mut children: Vec<Derivation> = rule.ps.iter().map(|p| var_ax(p)).collect();
    children.push(e1);
    let rq_formula = {
        let mut acc = Formula::var(rule.r.clone());
        for qv in rule.qs.iter().rev() {
            acc = Formula::rdiv(acc, Formula::var(qv.clone()));
        }
        acc
    };
    let mut items: Vec<Formula> = rule.ps.iter().map(|v| Formula::var(v.clone())).collect();
    items.push(rq_formula);
    let concl = Sequent::new(MetaFormula::of_formulas(items), Formula::var(rule.t.clone()));
    rebuild(&c, RuleId::BPrime, concl, children)
}

/// Instantiate and check the three equivalence templates for every rule.
pub fn brule_equivalence_selftest(g: &Type0Grammar) -> Result<(), EncodeError> {
    let rules = buszkowski_rules(g);
    let pure = CalculusId::by_name("l*(/)").unwrap();
    let with_b = buszkowski_calculus(g, false);
    let with_bp = buszkowski_calculus(g, true);
    for rule in &rules {
        let t1 = b_axiom_template(rule, &b_formula(rule))?;
        check(&pure, &t1).map_err(|e| EncodeError::Selftest {
            item: "b-axiom-template",
            message: format!("{rule:?}: {e}"),
        })?;
        let t2 = b_axiom_by_rule(&with_b, rule)?;
        check(&with_b, &t2).map_err(|e| EncodeError::Selftest {
            item: "b-axiom-by-rule",
            message: format!("{rule:?}: {e}"),
        })?;
        let t3 = b_prime_template(g, rule)?;
        check(&with_bp, &t3).map_err(|e| EncodeError::Selftest {
            item: "b-prime",
            message: format!("{rule:?}: {e}"),
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// extraction: from a derivation back to a rewriting trace

/// Atoms visible to the extraction (products flatten; anything containing a
/// division, `!` or the unit is hidden).
fn visible(f: &Formula) -> Option<Vec<String>> {
    match f {
        Formula::Var(v) => Some(vec![v.clone()]),
        Formula::Prod(a, b) => {
            let mut out = visible(a)?;
            out.extend(visible(b)?);
            Some(out)
        }
        _ => None,
    }
}

fn visible_items(items: &[TreeTerm]) -> Result<Vec<Option<Vec<String>>>, EncodeError> {
    items
        .iter()
        .map(|it| match it {
            TreeTerm::Leaf(f) => Ok(visible(f)),
            TreeTerm::Bracketed(_) => {
                Err(EncodeError::Shape("brackets in an exponential-only derivation".into()))
            }
        })
        .collect()
}

fn antecedent_word(s: &Sequent) -> Result<Vec<String>, EncodeError> {
    let mut out = Vec::new();
    for v in visible_items(&s.antecedent.items)? {
        if let Some(mut w) = v {
            out.append(&mut w);
        }
    }
    Ok(out)
}

fn prefix_width(s: &Sequent, upto: usize) -> Result<usize, EncodeError> {
    Ok(visible_items(&s.antecedent.items[..upto])?
        .into_iter()
        .flatten()
        .map(|w| w.len())
        .sum())
}

struct Extraction {
    from: Vec<String>,
    steps: Vec<RewriteStep>,
}

fn offset_steps(steps: &mut [RewriteStep], offset: usize) {
    for st in steps {
        st.position += offset;
    }
}

/// Recover the rewriting trace from a cut-free derivation of
/// `!A1, ..., !AN, a1, ..., an => s` in the full-exponential calculus.
pub fn extract_rewriting(g: &Type0Grammar, d: &Derivation) -> Result<RewriteTrace, EncodeError> {
    let formulas = grammar_formulas(g);
    let by_formula: HashMap<&Formula, usize> =
        formulas.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let ext = extract_node(d, &by_formula)?;
    let trace = RewriteTrace { start: ext.from, steps: ext.steps };
    // validate by replay and endpoint comparison
    let final_word = trace.final_word(g)?;
    if final_word != antecedent_word(&d.sequent)? {
        return Err(EncodeError::Shape("extracted trace does not replay to the antecedent".into()));
    }
    Ok(trace)
}

fn extract_node(
    d: &Derivation,
    by_formula: &HashMap<&Formula, usize>,
) -> Result<Extraction, EncodeError> {
    use RuleId::*;
    match d.rule.rule {
        Id => {
            let word = antecedent_word(&d.sequent)?;
            if word.is_empty() {
                return Err(EncodeError::Shape("axiom on a hidden formula".into()));
            }
            Ok(Extraction { from: word, steps: vec![] })
        }
        ProdL | BangP1 | BangP2 | BangC | BangNC1 | BangNC2 | BangW => {
            // visible content is untouched (moved items are all !-prefixed)
            extract_node(&d.children[0], by_formula)
        }
        BangL => {
            let k = d.rule.params.index.unwrap_or(0);
            let child = &d.children[0];
            // peeling ! off an ε-rule product makes it visible: that is an
            // application of the ε-production, read downward
            let inner = child.sequent.antecedent.items[k]
                .as_leaf()
                .ok_or_else(|| EncodeError::Shape("!L on a bracket".into()))?;
            let mut ext = extract_node(child, by_formula)?;
            if let Some(word) = visible(inner) {
                let production = *by_formula.get(inner).ok_or_else(|| {
                    EncodeError::Shape(format!("visible `{inner}` is not a grammar formula"))
                })?;
                let position = prefix_width(&child.sequent, k)?;
                ext.steps.push(RewriteStep { production, position });
                let _ = word;
            }
            Ok(ext)
        }
        RDivL => {
            let (st, _) = d.rule.params.span.unwrap_or((0, 0));
            let active_pos = st - 1;
            let active = d.sequent.antecedent.items[active_pos]
                .as_leaf()
                .ok_or_else(|| EncodeError::Shape("/L on a bracket".into()))?;
            let production = *by_formula.get(active).ok_or_else(|| {
                EncodeError::Shape(format!("`{active}` is not a grammar formula"))
            })?;
            let left = extract_node(&d.children[0], by_formula)?;
            let right = extract_node(&d.children[1], by_formula)?;
            // position of the replaced occurrence in the right premise
            let position = prefix_width(&d.children[1].sequent, active_pos)?;
            let mut steps = right.steps;
            steps.push(RewriteStep { production, position });
            // the left trace rewrites the fresh rhs in place
            let mut embedded = left.steps.clone();
            offset_steps(&mut embedded, position);
            steps.extend(embedded);
            Ok(Extraction { from: right.from, steps })
        }
        ProdR => {
            // run the left trace first, then the right one shifted past the
            // left part's final word
            let left = extract_node(&d.children[0], by_formula)?;
            let right = extract_node(&d.children[1], by_formula)?;
            let left_final = antecedent_word(&d.children[0].sequent)?;
            let mut from = left.from.clone();
            from.extend(right.from.iter().cloned());
            let mut steps = left.steps;
            let mut right_steps = right.steps;
            offset_steps(&mut right_steps, left_final.len());
            steps.append(&mut right_steps);
            Ok(Extraction { from, steps })
        }
        other => Err(EncodeError::Shape(format!("rule {other} is outside the encoding fragment"))),
    }
}

// ---------------------------------------------------------------------------
// the r.e. grammar construction

/// Identity lexicon over the terminals plus the goal `∏Φ_G \ s`.
pub fn build_grammar_from_type0(
    g: &Type0Grammar,
    scheme: Scheme,
    q: &str,
) -> Result<(Lexicon, Formula), EncodeError> {
    let phi = match scheme {
        Scheme::B2018st => {
            // the stoup variant needs an extra ! on the Z formulas
            let formulas = grammar_formulas(g);
            let mut items = Vec::new();
            for f in &formulas {
                let z = Formula::bang(z_formula(f, q));
                items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), z.clone()))));
                items.push(TreeTerm::Leaf(Formula::bang(z)));
            }
            items.push(TreeTerm::Leaf(Formula::bang(Formula::rdiv(ss(), diadia(q)))));
            items.push(qq_island(q));
            MetaFormula::of_items(items)
        }
        Scheme::Buszkowski => return Err(EncodeError::Scheme(scheme)),
        _ => internalizer(&grammar_formulas(g), scheme, q)?,
    };
    let goal = Formula::ldiv(big_product(&phi)?, Formula::var(g.start.clone()));
    let mut lex = Lexicon::new(goal.clone());
    for t in &g.terminals {
        lex.add(t.clone(), Formula::var(t.clone()));
    }
    Ok((lex, goal))
}

/// A checked derivation of the grammar-acceptance sequent
/// `a1, ..., an => prod(Phi_G) \ s`, built from a synthesized encoding
/// derivation by folding the meta-formula with `*L` and finishing with `\R`.
pub fn acceptance_derivation(
    g: &Type0Grammar,
    word: &[String],
    scheme: Scheme,
    q: &str,
    limits: &BfsLimits,
) -> Result<(CalculusId, Derivation), EncodeError> {
    if scheme == Scheme::Buszkowski || scheme == Scheme::B2018st {
        return Err(EncodeError::Scheme(scheme));
    }
    let syn = synthesize_sequent_derivation(g, word, scheme, q, limits)?;
    let c = syn.calculus;
    let phi = internalizer(&grammar_formulas(g), scheme, q)?;
    let n_phi = phi.items.len();
    let mut der = syn.derivation;
    // fold the leading phi items into their product, left pair first
    for k in (1..n_phi).rev() {
        let folded = big_product(&MetaFormula::of_items(phi.items[..k + 1].to_vec()))?;
        let mut items = vec![TreeTerm::Leaf(folded)];
        items.extend(phi.items[k + 1..].iter().cloned());
        items.extend(word.iter().map(|v| TreeTerm::Leaf(Formula::var(v.clone()))));
        let concl = Sequent::new(MetaFormula::of_items(items), Formula::var(g.start.clone()));
        der = rebuild(&c, RuleId::ProdL, concl, vec![der])?;
    }
    // peel back the bracket product factors: <>(prod) items arise from <>L
    loop {
        let first = der.sequent.antecedent.items[0].clone();
        let TreeTerm::Bracketed(_) = first else { break };
        // the bracketed island [X] came from the item <>X
        let inner = match &first {
            TreeTerm::Bracketed(m) => big_product(m)?,
            TreeTerm::Leaf(_) => unreachable!(),
        };
        let mut items = vec![TreeTerm::Leaf(Formula::dia(inner))];
        items.extend(der.sequent.antecedent.items[1..].iter().cloned());
        let concl = Sequent::new(MetaFormula::of_items(items), der.sequent.succedent.clone());
        der = rebuild(&c, RuleId::DiaL, concl, vec![der])?;
    }
    let product = big_product(&phi)?;
    let goal = Formula::ldiv(product, Formula::var(g.start.clone()));
    let concl = Sequent::new(
        MetaFormula::of_formulas(word.iter().map(|v| Formula::var(v.clone())).collect()),
        goal,
    );
    der = rebuild(&c, RuleId::LDivR, concl, vec![der])?;
    Ok((c, der))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g_ab() -> Type0Grammar {
        Type0Grammar::new("s", &["a", "b"], vec![(vec!["s"], vec!["a", "b"])]).unwrap()
    }

    fn g_anbn() -> Type0Grammar {
        Type0Grammar::new(
            "s",
            &["a", "b"],
            vec![(vec!["s"], vec!["a", "s", "b"]), (vec!["s"], vec!["a", "b"])],
        )
        .unwrap()
    }

    fn word(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn grammar_formulas_shapes() {
        let g = g_ab();
        assert_eq!(grammar_formulas(&g), vec![parse_formula("s/(a*b)").unwrap()]);
        let eps = Type0Grammar::new("s", &[], vec![(vec!["a", "b"], vec![])]).unwrap();
        assert_eq!(grammar_formulas(&eps), vec![parse_formula("a*b").unwrap()]);
        let idp = Type0Grammar::new("s", &[], vec![(vec!["s"], vec!["s"])]).unwrap();
        assert_eq!(grammar_formulas(&idp), vec![parse_formula("s/s").unwrap()]);
    }

    #[test]
    fn internalizer_matches_displayed_forms() {
        let a = vec![parse_formula("s/(a*b)").unwrap()];
        let phi = internalizer(&a, Scheme::B2015, "q").unwrap();
        assert_eq!(
            Sequent::new(phi, Formula::var("s")).to_string(),
            "!((s/s)/![](s/(a*b))), ![](s/(a*b)) => s"
        );
        let phi18 = internalizer(&a, Scheme::B2018, "q").unwrap();
        let z1 = parse_formula("([](!(s/(a*b))*<><>q))/q").unwrap();
        assert_eq!(phi18.items.len(), 4);
        assert_eq!(phi18.items[1].as_leaf(), Some(&Formula::bang(z1.clone())));
        assert_eq!(
            phi18.items[0].as_leaf(),
            Some(&Formula::bang(Formula::rdiv(ss(), Formula::bang(z1))))
        );
        assert_eq!(phi18.items[3], qq_island("q"));
        let phi_full = internalizer(&[parse_formula("B").unwrap()], Scheme::Malc, "q").unwrap();
        assert_eq!(phi_full.items.len(), 1);
        assert_eq!(phi_full.items[0].as_leaf(), Some(&parse_formula("!B").unwrap()));
        assert!(matches!(
            internalizer(&[parse_formula("q/q").unwrap()], Scheme::B2018, "q"),
            Err(EncodeError::QOccurs(_))
        ));
    }

    #[test]
    fn bfs_finds_traces_and_rejects_nonmembers() {
        let g = g_anbn();
        let limits = BfsLimits { max_word_len: 8, max_words: 10_000 };
        match bfs_trace(&g, &word(&["a", "a", "b", "b"]), &limits) {
            BfsOutcome::Found(trace) => {
                assert_eq!(trace.final_word(&g).unwrap(), word(&["a", "a", "b", "b"]));
                assert_eq!(trace.steps.len(), 2);
            }
            other => panic!("expected a trace, got {other:?}"),
        }
        assert!(matches!(
            bfs_trace(&g, &word(&["b", "a"]), &limits),
            BfsOutcome::NotFoundCapped | BfsOutcome::NotFoundExhausted
        ));
    }

    #[test]
    fn selftest_b2015() {
        let a = grammar_formulas(&g_ab());
        let phi = internalizer(&a, Scheme::B2015, "q").unwrap();
        internalization_selftest(&phi, &a, Scheme::B2015, "q").unwrap();
    }

    #[test]
    fn selftest_fails_on_corrupted_phi() {
        let a = grammar_formulas(&g_ab());
        let mut phi = internalizer(&a, Scheme::Malc, "q").unwrap();
        phi.items.remove(0);
        match internalization_selftest(&phi, &a, Scheme::Malc, "q") {
            Err(EncodeError::Selftest { item: "landing", .. }) => {}
            other => panic!("expected a landing failure, got {other:?}"),
        }
    }

    #[test]
    fn synthesize_ab_in_b2015() {
        let g = g_ab();
        let syn = synthesize_sequent_derivation(
            &g,
            &word(&["a", "b"]),
            Scheme::B2015,
            "q",
            &BfsLimits::default(),
        )
        .unwrap();
        check(&syn.calculus, &syn.derivation).unwrap();
    }

    #[test]
    fn synthesize_buszkowski_anbn() {
        let g = g_anbn();
        let syn = synthesize_sequent_derivation(
            &g,
            &word(&["a", "a", "b", "b"]),
            Scheme::Buszkowski,
            "q",
            &BfsLimits::default(),
        )
        .unwrap();
        check(&syn.calculus, &syn.derivation).unwrap();
        assert_eq!(syn.derivation.sequent, word_sequent(&word(&["a", "a", "b", "b"]), "s"));
    }

    #[test]
    fn extraction_inverts_synthesis() {
        let g = g_anbn();
        let syn = synthesize_sequent_derivation(
            &g,
            &word(&["a", "a", "b", "b"]),
            Scheme::Malc,
            "q",
            &BfsLimits::default(),
        )
        .unwrap();
        check(&syn.calculus, &syn.derivation).unwrap();
        let trace = extract_rewriting(&g, &syn.derivation).unwrap();
        assert_eq!(trace.start, word(&["s"]));
        assert_eq!(trace.final_word(&g).unwrap(), word(&["a", "a", "b", "b"]));
    }

    #[test]
    fn buszkowski_rule_inventory() {
        let g = g_ab();
        let rules = buszkowski_rules(&g);
        // 4 singleton families + 3 per-symbol families over {a, b, s}
        assert_eq!(rules.len(), 4 + 3 * 3);
        let r1 = &rules[0];
        assert_eq!((r1.qs.len(), &r1.r, &r1.ps[0], &r1.t), (0, &"s".into(), &"e#0".into(), &"a#0".into()));
        assert_eq!(b_formula(r1), parse_formula("(a#0/s)/e#0").unwrap());
    }

    #[test]
    fn brule_selftest_and_corruption() {
        let g = g_ab();
        brule_equivalence_selftest(&g).unwrap();
        let rules = buszkowski_rules(&g);
        let bad = parse_formula("(a#0/s)/f#0").unwrap();
        assert!(b_axiom_template(&rules[0], &bad).is_err());
    }

    #[test]
    fn v_internalizer_shape() {
        let bs = vec![parse_formula("(a#0/s)/e#0").unwrap()];
        let ts = vec!["a#0".to_string(), "s".to_string()];
        let psi = v_internalizer(&bs, &ts, "q").unwrap();
        // one (head, !Z) pair per (goal variable, formula), plus the two
        // closing items; every element is a !-formula
        assert_eq!(psi.items.len(), 2 * 2 + 2);
        assert!(psi.items.iter().all(TreeTerm::is_bang_leaf));
        let z00 = parse_formula("([](a#0/((a#0/!((a#0/s)/e#0))/!(<><>q))))/q").unwrap();
        assert_eq!(psi.items[1].as_leaf(), Some(&Formula::bang(z00)));
        assert_eq!(
            psi.items.last().unwrap().as_leaf(),
            Some(&Formula::bang(diadia("q")))
        );
    }

    #[test]
    fn grammar_file_round_trip() {
        let g = g_anbn();
        let text = g.render();
        assert_eq!(Type0Grammar::parse(&text).unwrap(), g);
        assert!(Type0Grammar::parse("a# -> b\nstart: a#").is_err());
    }
}
