//! Bounded backward cut-free proof search with three-valued verdicts.
//!
//! Derivability is undecidable in general, so exhaustive search needs
//! budgets. `Underivable` is reported only when the whole backward tree was
//! explored (with ancestor-repetition pruning) and no budget cap fired
//! anywhere; a cap anywhere downgrades the verdict to `Unknown`.

use crate::calculus::{CalculusId, RuleId};
use crate::derivation::Derivation;
use crate::rules::{enumerate_rule_apps, RuleApp, SEARCH_ORDER};
use crate::sequent::Sequent;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchBudget {
    pub max_depth: usize,
    /// `!C`/`!C'`/`!NC` applications allowed per branch.
    pub max_contractions: usize,
    /// Total formula-node count any explored sequent may have.
    pub max_sequent_size: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> SearchBudget {
        SearchBudget {
            max_depth: 64,
            max_contractions: 3,
            max_sequent_size: 256,
            time_limit: None,
        }
    }
}

/// Which budget cap fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cap {
    Depth,
    Contractions,
    SequentSize,
    Time,
}

/// Set of caps that fired in a subtree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct CapSet(u8);

impl CapSet {
    fn add(&mut self, cap: Cap) {
        self.0 |= 1 << cap as u8;
    }
    fn union(&mut self, other: CapSet) {
        self.0 |= other.0;
    }
    fn contains(self, cap: Cap) -> bool {
        self.0 & (1 << cap as u8) != 0
    }
    fn first(self) -> Option<Cap> {
        [Cap::Depth, Cap::Contractions, Cap::SequentSize, Cap::Time]
            .into_iter()
            .find(|&c| self.contains(c))
    }
}

#[derive(Clone, Debug)]
pub enum SearchVerdict {
    Derivable(Derivation),
    /// The search space was exhausted without hitting any cap.
    Underivable,
    /// A cap fired somewhere; nothing can be claimed.
    Unknown(Cap),
}

impl SearchVerdict {
    pub fn is_derivable(&self) -> bool {
        matches!(self, SearchVerdict::Derivable(_))
    }
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            SearchVerdict::Derivable(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("backward search is cut-free; disable cut in the calculus")]
    CutEnabled,
    #[error("goal sequent lies outside the calculus fragment")]
    Fragment,
}

enum Outcome {
    Proved(Derivation),
    /// `deps` holds the stack indices of ancestors that repetition prunes
    /// matched anywhere inside the failed subtree.
    Failed { caps: CapSet, deps: Vec<usize> },
}

/// A recorded failure, reusable when its `deps` sequents are on the path
/// again (the subtree's repetition prunes matched exactly those ancestors).
///
/// A cap-free certificate summarizes an exhaustion the budgets never
/// constrained, so it is valid at any headroom. When a cap fired, the
/// certificate also records the headroom it had for that budget;
/// re-exploration with no more headroom explores a subset of the recorded
/// tree, so the failure (and its caps) carries over.
struct FailCert {
    deps: Vec<Sequent>,
    caps: CapSet,
    depth_left: usize,
    contractions_left: usize,
}

const MAX_CERT_DEPS: usize = 8;
const MAX_CERTS_PER_SEQUENT: usize = 64;

struct Engine<'a> {
    calculus: &'a CalculusId,
    budget: &'a SearchBudget,
    started: Instant,
    proved: HashMap<Sequent, Derivation>,
    failed: HashMap<Sequent, Vec<FailCert>>,
    nodes: usize,
}

impl<'a> Engine<'a> {
    fn out_of_time(&self) -> bool {
        self.budget
            .time_limit
            .is_some_and(|limit| self.started.elapsed() >= limit)
    }

    /// Every sequent reachable from `s` by `!P1`/`!P2` moves alone, paired
    /// with a shortest move chain. Any proof decomposes into a maximal block
    /// of permutation moves followed by a non-permutation rule, so searching
    /// over this closure instead of single moves avoids enumerating paths
    /// through the (reversible) permutation graph.
    fn perm_closure(&self, s: &Sequent) -> Vec<(Sequent, Vec<RuleApp>)> {
        let mut out: Vec<(Sequent, Vec<RuleApp>)> = vec![(s.clone(), vec![])];
        let mut seen: HashSet<Sequent> = [s.clone()].into();
        let mut frontier = 0usize;
        while frontier < out.len() {
            let (cur, chain) = out[frontier].clone();
            frontier += 1;
            for rule in [RuleId::BangP1, RuleId::BangP2] {
                if !self.calculus.has_rule(rule) {
                    continue;
                }
                for (app, premises) in enumerate_rule_apps(self.calculus, &cur, rule) {
                    let next = premises.into_iter().next().expect("!P has one premise");
                    if seen.insert(next.clone()) {
                        let mut chain = chain.clone();
                        chain.push(app);
                        out.push((next, chain));
                    }
                }
            }
        }
        out
    }

    fn prove(
        &mut self,
        goal: &Sequent,
        depth: usize,
        contractions: usize,
        ancestors: &mut Vec<Sequent>,
    ) -> Outcome {
        self.nodes += 1;
        if self.out_of_time() {
            let mut caps = CapSet::default();
            caps.add(Cap::Time);
            return Outcome::Failed { caps, deps: vec![] };
        }
        if let Some(d) = self.proved.get(goal) {
            return Outcome::Proved(d.clone());
        }
        let depth_left = self.budget.max_depth.saturating_sub(depth);
        let contractions_left = self.budget.max_contractions.saturating_sub(contractions);
        if let Some(certs) = self.failed.get(goal) {
            for cert in certs {
                let headroom_ok = (!cert.caps.contains(Cap::Depth)
                    || depth_left <= cert.depth_left)
                    && (!cert.caps.contains(Cap::Contractions)
                        || contractions_left <= cert.contractions_left);
                if headroom_ok && cert.deps.iter().all(|d| ancestors.contains(d)) {
                    let deps = cert
                        .deps
                        .iter()
                        .map(|d| ancestors.iter().position(|a| a == d).unwrap())
                        .collect();
                    return Outcome::Failed { caps: cert.caps, deps };
                }
            }
        }
        // Minimal proofs never repeat a sequent along a branch.
        if let Some(i) = ancestors.iter().position(|a| a == goal) {
            return Outcome::Failed { caps: CapSet::default(), deps: vec![i] };
        }
        if depth >= self.budget.max_depth {
            let mut caps = CapSet::default();
            caps.add(Cap::Depth);
            return Outcome::Failed { caps, deps: vec![] };
        }

        let here = ancestors.len();
        let mut caps = CapSet::default();
        let mut deps: Vec<usize> = Vec::new();

        // Permutation closure, pruned against the path; each target keeps its
        // chain of moves and the sequents the chain passes through.
        let mut targets: Vec<(Sequent, Vec<RuleApp>, Vec<Sequent>)> = Vec::new();
        for (target, chain) in self.perm_closure(goal) {
            if target != *goal {
                if let Some(i) = ancestors.iter().position(|a| *a == target) {
                    if !deps.contains(&i) {
                        deps.push(i);
                    }
                    continue;
                }
            }
            if depth + chain.len() >= self.budget.max_depth {
                caps.add(Cap::Depth);
                continue;
            }
            let mut intermediates = Vec::with_capacity(chain.len());
            let mut cur = goal.clone();
            for app in &chain {
                cur = crate::rules::premises_of(self.calculus, &cur, app)
                    .expect("closure step replays")
                    .pop()
                    .expect("!P has one premise");
                intermediates.push(cur.clone());
            }
            targets.push((target, chain, intermediates));
        }

        let rule_set = self.calculus.rules();
        let mut seen_premises: HashSet<Vec<Sequent>> = HashSet::new();
        for &rule in SEARCH_ORDER {
            if matches!(rule, RuleId::BangP1 | RuleId::BangP2) || !rule_set.contains(&rule) {
                continue;
            }
            for (target, chain, intermediates) in &targets {
                'apps: for (app, premises) in enumerate_rule_apps(self.calculus, target, rule) {
                    if !seen_premises.insert(premises.clone()) {
                        continue;
                    }
                    let mut contractions = contractions;
                    if rule.is_contraction() {
                        if contractions >= self.budget.max_contractions {
                            caps.add(Cap::Contractions);
                            continue;
                        }
                        contractions += 1;
                    }
                    if premises.iter().any(|p| p.size() > self.budget.max_sequent_size) {
                        caps.add(Cap::SequentSize);
                        continue;
                    }
                    ancestors.push(goal.clone());
                    ancestors.extend(intermediates.iter().cloned());
                    let mut children = Vec::with_capacity(premises.len());
                    for premise in &premises {
                        match self.prove(premise, depth + chain.len() + 1, contractions, ancestors)
                        {
                            Outcome::Proved(d) => children.push(d),
                            Outcome::Failed { caps: c, deps: d } => {
                                caps.union(c);
                                for i in d {
                                    if !deps.contains(&i) {
                                        deps.push(i);
                                    }
                                }
                                ancestors.truncate(here);
                                continue 'apps;
                            }
                        }
                    }
                    ancestors.truncate(here);
                    // Wrap the found proof back into the permutation chain.
                    let mut proof = Derivation::new(target.clone(), app, children);
                    for (app, concl) in chain
                        .iter()
                        .zip(std::iter::once(goal).chain(intermediates.iter()))
                        .collect::<Vec<_>>()
                        .into_iter()
                        .rev()
                    {
                        proof = Derivation::new(concl.clone(), app.clone(), vec![proof]);
                    }
                    self.proved.insert(goal.clone(), proof.clone());
                    return Outcome::Proved(proof);
                }
            }
        }
        // Dependencies on this node itself stay internal.
        deps.retain(|&i| i < here);
        if deps.len() <= MAX_CERT_DEPS && !caps.contains(Cap::Time) {
            let certs = self.failed.entry(goal.clone()).or_default();
            if certs.len() < MAX_CERTS_PER_SEQUENT {
                certs.push(FailCert {
                    deps: deps.iter().map(|&i| ancestors[i].clone()).collect(),
                    caps,
                    depth_left,
                    contractions_left,
                });
            }
        }
        Outcome::Failed { caps, deps }
    }
}

/// A reusable search context. Proof and refutation certificates are facts
/// about the calculus alone, so related goals (type assignments, candidate
/// bracketings) share them profitably.
pub struct SearchSession<'a> {
    engine: Engine<'a>,
}

impl<'a> SearchSession<'a> {
    pub fn new(c: &'a CalculusId, budget: &'a SearchBudget) -> Result<SearchSession<'a>, SearchError> {
        if c.features.cut_enabled {
            return Err(SearchError::CutEnabled);
        }
        Ok(SearchSession {
            engine: Engine {
                calculus: c,
                budget,
                started: Instant::now(),
                proved: HashMap::new(),
                failed: HashMap::new(),
                nodes: 0,
            },
        })
    }

    pub fn verdict(&mut self, goal: &Sequent) -> Result<SearchVerdict, SearchError> {
        if !self.engine.calculus.fragment_ok(goal) {
            return Err(SearchError::Fragment);
        }
        self.engine.started = Instant::now();
        Ok(match self.engine.prove(goal, 0, 0, &mut Vec::new()) {
            Outcome::Proved(d) => SearchVerdict::Derivable(d),
            Outcome::Failed { caps, .. } => match caps.first() {
                None => SearchVerdict::Underivable,
                Some(cap) => SearchVerdict::Unknown(cap),
            },
        })
    }

    pub fn nodes(&self) -> usize {
        self.engine.nodes
    }
}

/// Search `goal` backward in `c`. The calculus must not have cut enabled.
pub fn search(
    c: &CalculusId,
    goal: &Sequent,
    budget: &SearchBudget,
) -> Result<SearchVerdict, SearchError> {
    let mut session = SearchSession::new(c, budget)?;
    session.verdict(goal)
}

/// Like [`search`], also reporting how many nodes were explored.
pub fn search_with_stats(
    c: &CalculusId,
    goal: &Sequent,
    budget: &SearchBudget,
) -> Result<(SearchVerdict, usize), SearchError> {
    let mut session = SearchSession::new(c, budget)?;
    let verdict = session.verdict(goal)?;
    Ok((verdict, session.nodes()))
}

/// Convenience wrapper returning the witness derivation, if any.
pub fn prove(c: &CalculusId, goal: &Sequent, budget: &SearchBudget) -> Option<Derivation> {
    match search(c, goal, budget) {
        Ok(SearchVerdict::Derivable(d)) => Some(d),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::check;
    use crate::parse::parse_sequent;

    fn run(calculus: &str, goal: &str) -> SearchVerdict {
        let c = CalculusId::by_name(calculus).unwrap();
        let goal = parse_sequent(goal).unwrap();
        search(&c, &goal, &SearchBudget::default()).unwrap()
    }

    #[test]
    fn cut_counterexample_2018_is_underivable() {
        // The 2018 rules admit this only with cut; cut-free space is finite.
        match run("b2018st", "!p, q => q * !p") {
            SearchVerdict::Underivable => {}
            v => panic!("expected Underivable, got {v:?}"),
        }
    }

    #[test]
    fn cut_counterexample_2018_derivable_in_primed_system() {
        let c = CalculusId::by_name("b2018st-prime").unwrap();
        let goal = parse_sequent("!p, q => q * !p").unwrap();
        match search(&c, &goal, &SearchBudget::default()).unwrap() {
            SearchVerdict::Derivable(d) => {
                assert!(check(&c, &d).is_ok());
                assert_eq!(d.cut_count(), 0);
            }
            v => panic!("expected Derivable, got {v:?}"),
        }
    }

    #[test]
    fn cut_counterexample_2015_is_underivable() {
        match run("b2015st", "q => <>q") {
            SearchVerdict::Underivable => {}
            v => panic!("expected Underivable, got {v:?}"),
        }
    }

    #[test]
    fn rejects_cut_enabled_calculus() {
        let c = CalculusId::by_name("b2015st+cut").unwrap();
        let goal = parse_sequent("p => p").unwrap();
        assert_eq!(
            search(&c, &goal, &SearchBudget::default()).unwrap_err(),
            SearchError::CutEnabled
        );
    }

    #[test]
    fn simple_goals() {
        assert!(run("malc*", "p/q, q => p").is_derivable());
        assert!(run("malc*", "=> 1").is_derivable());
        assert!(matches!(run("malc*", "p => q"), SearchVerdict::Underivable));
        assert!(run("!r-malc*", "!p, q => q * !p").is_derivable());
    }
}
