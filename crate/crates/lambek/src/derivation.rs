//! Derivation trees and forward verification against a calculus.

use crate::calculus::{CalculusId, RuleId};
use crate::formula::Formula;
use crate::parse::parse_sequent;
use crate::rules::{premises_of, RuleApp, RuleError, RuleParams};
use crate::sequent::{lambek_restriction_holds, subformula_closure, Sequent};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// A rule-labelled proof tree. Children follow the rule's left-to-right
/// premise order.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub sequent: Sequent,
    pub rule: RuleApp,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn new(sequent: Sequent, rule: RuleApp, children: Vec<Derivation>) -> Derivation {
        Derivation { sequent, rule, children }
    }

    pub fn leaf(sequent: Sequent, rule: RuleId) -> Derivation {
        Derivation::new(sequent, RuleApp::new(rule), vec![])
    }

    /// Number of nodes, axioms included.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Derivation::node_count).sum::<usize>()
    }

    /// Number of cut nodes.
    pub fn cut_count(&self) -> usize {
        let own = usize::from(self.rule.rule == RuleId::Cut);
        own + self.children.iter().map(Derivation::cut_count).sum::<usize>()
    }

    pub fn uses_rule(&self, rule: RuleId) -> bool {
        self.rule.rule == rule || self.children.iter().any(|d| d.uses_rule(rule))
    }

    /// Pre-order walk.
    pub fn walk(&self, f: &mut dyn FnMut(&Derivation)) {
        f(self);
        for child in &self.children {
            child.walk(f);
        }
    }

    /// Indented one-node-per-line rendering.
    pub fn render_tree(&self) -> String {
        fn go(d: &Derivation, depth: usize, out: &mut String) {
            let _ = writeln!(out, "{}{}  {}", "  ".repeat(depth), d.rule.rule, d.sequent);
            for child in &d.children {
                go(child, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("node {path:?}: {source}")]
    Rule {
        path: Vec<usize>,
        #[source]
        source: RuleError,
    },
    #[error("node {path:?}: rule {rule} expects {expected} premises, derivation has {actual}")]
    Arity { path: Vec<usize>, rule: RuleId, expected: usize, actual: usize },
    #[error("node {path:?}: premise {premise} should be `{expected}`, derivation has `{actual}`")]
    PremiseMismatch { path: Vec<usize>, premise: usize, expected: String, actual: String },
    #[error("node {path:?}: sequent violates Lambek's restriction")]
    Restriction { path: Vec<usize> },
    #[error("node {path:?}: sequent outside the calculus fragment")]
    Fragment { path: Vec<usize> },
}

/// Verify that every node's children are exactly the premises its rule
/// application determines.
pub fn check(c: &CalculusId, d: &Derivation) -> Result<(), CheckError> {
    let mut path = Vec::new();
    check_at(c, d, &mut path)
}

fn check_at(c: &CalculusId, d: &Derivation, path: &mut Vec<usize>) -> Result<(), CheckError> {
    if !c.fragment_ok(&d.sequent) {
        return Err(CheckError::Fragment { path: path.clone() });
    }
    if c.features.lambek_restricted && !lambek_restriction_holds(&d.sequent) {
        return Err(CheckError::Restriction { path: path.clone() });
    }
    let premises = premises_of(c, &d.sequent, &d.rule)
        .map_err(|source| CheckError::Rule { path: path.clone(), source })?;
    if premises.len() != d.children.len() {
        return Err(CheckError::Arity {
            path: path.clone(),
            rule: d.rule.rule,
            expected: premises.len(),
            actual: d.children.len(),
        });
    }
    for (i, (expected, child)) in premises.iter().zip(&d.children).enumerate() {
        if *expected != child.sequent {
            return Err(CheckError::PremiseMismatch {
                path: path.clone(),
                premise: i,
                expected: expected.to_string(),
                actual: child.sequent.to_string(),
            });
        }
        path.push(i);
        check_at(c, child, path)?;
        path.pop();
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq)]
pub enum SubformulaError {
    #[error("precondition: derivation contains a cut")]
    HasCut,
    #[error("precondition: derivation uses B-rules")]
    HasBRules,
    #[error("node {path:?}: formula `{formula}` is not a subformula of the end-sequent")]
    Violation { path: Vec<usize>, formula: Formula },
}

/// Every formula of every node must lie in the subformula closure of the
/// end-sequent. Requires a cut-free, B-rule-free derivation.
pub fn assert_subformula_property(d: &Derivation) -> Result<(), SubformulaError> {
    if d.cut_count() > 0 {
        return Err(SubformulaError::HasCut);
    }
    if d.uses_rule(RuleId::B) || d.uses_rule(RuleId::BPrime) {
        return Err(SubformulaError::HasBRules);
    }
    let closure = subformula_closure(&d.sequent);
    fn go(
        d: &Derivation,
        closure: &std::collections::BTreeSet<Formula>,
        path: &mut Vec<usize>,
    ) -> Result<(), SubformulaError> {
        for f in d.sequent.formulas() {
            if !closure.contains(f) {
                return Err(SubformulaError::Violation {
                    path: path.clone(),
                    formula: f.clone(),
                });
            }
        }
        for (i, child) in d.children.iter().enumerate() {
            path.push(i);
            go(child, closure, path)?;
            path.pop();
        }
        Ok(())
    }
    go(d, &closure, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// interchange format

#[derive(Serialize, Deserialize)]
struct NodeDto {
    rule: String,
    #[serde(default, skip_serializing_if = "params_empty")]
    params: RuleParams,
    sequent: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    premises: Vec<NodeDto>,
}

fn params_empty(p: &RuleParams) -> bool {
    *p == RuleParams::default()
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown rule name `{0}`")]
    UnknownRule(String),
    #[error("{0}")]
    Sequent(#[from] crate::parse::ParseError),
}

fn to_dto(d: &Derivation) -> NodeDto {
    NodeDto {
        rule: d.rule.rule.as_str().to_string(),
        params: d.rule.params.clone(),
        sequent: d.sequent.to_string(),
        premises: d.children.iter().map(to_dto).collect(),
    }
}

fn from_dto(dto: NodeDto) -> Result<Derivation, CodecError> {
    let rule = RuleId::from_str_name(&dto.rule)
        .ok_or_else(|| CodecError::UnknownRule(dto.rule.clone()))?;
    Ok(Derivation {
        sequent: parse_sequent(&dto.sequent)?,
        rule: RuleApp { rule, params: dto.params },
        children: dto.premises.into_iter().map(from_dto).collect::<Result<_, _>>()?,
    })
}

pub fn to_json(d: &Derivation) -> String {
    serde_json::to_string_pretty(&to_dto(d)).expect("derivation serializes")
}

pub fn from_json(text: &str) -> Result<Derivation, CodecError> {
    from_dto(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::find_app;

    fn by_rule(c: &CalculusId, rule: RuleId, concl: &str, children: Vec<Derivation>) -> Derivation {
        let sequent = parse_sequent(concl).unwrap();
        let kids: Vec<Sequent> = children.iter().map(|d| d.sequent.clone()).collect();
        let app = find_app(c, &sequent, rule, &kids)
            .unwrap_or_else(|| panic!("no {rule} instance fits `{concl}`"));
        Derivation::new(sequent, app, children)
    }

    #[test]
    fn checks_a_two_step_derivation() {
        let c = CalculusId::by_name("malc*+additives=off").unwrap();
        let ax_q = Derivation::leaf(parse_sequent("q => q").unwrap(), RuleId::Id);
        let ax_p = Derivation::leaf(parse_sequent("p => p").unwrap(), RuleId::Id);
        let d = by_rule(&c, RuleId::RDivL, "p/q, q => p", vec![ax_q, ax_p]);
        assert!(check(&c, &d).is_ok());
        assert_eq!(d.cut_count(), 0);
        assert!(assert_subformula_property(&d).is_ok());

        // serialization round trip re-checks identically
        let json = to_json(&d);
        let back = from_json(&json).unwrap();
        assert_eq!(back, d);
        assert!(check(&c, &back).is_ok());
    }

    #[test]
    fn rejects_wrong_premises() {
        let c = CalculusId::by_name("malc*+additives=off").unwrap();
        let bad = Derivation::new(
            parse_sequent("p => p").unwrap(),
            RuleApp::new(RuleId::UnitR),
            vec![],
        );
        assert!(check(&c, &bad).is_err());
    }
}
