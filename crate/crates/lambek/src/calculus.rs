//! The calculus registry: every variant of the system is a feature vector
//! selecting its rule set and the behaviour of the `!`-rules.

use crate::formula::Formula;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Behaviour of the subexponential rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BangProfile {
    /// Permutation, contraction and weakening (no brackets).
    FullExponential,
    /// Permutation and contraction but no weakening (no brackets).
    Relevant,
    /// The 2015 bracket-aware rules: `!R` on stoup-only antecedents,
    /// multi-contraction creating an island.
    Morrill2015,
    /// The 2018 bracket-aware rules: `!R` on a single `!`-item, contraction
    /// into a given double-bracketed island.
    Morrill2018,
    /// 2015 rules fixed for cut elimination (`!R'` needs a non-empty stoup,
    /// `!C'` leaves extra stoup material in the island).
    Primed2015,
    /// 2018 rules fixed for cut elimination (`!R'` on a singleton stoup,
    /// `!C'` allows a stoup on the island).
    Primed2018,
}

/// One of Buszkowski's rules `B_{q1..qm,r; p1..pk,t}`:
/// from `Δ, q1, ..., qm => r` derive `p1, ..., pk, Δ => t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BRule {
    pub qs: Vec<String>,
    pub r: String,
    pub ps: Vec<String>,
    pub t: String,
}

/// Feature vector of a calculus variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub has_stoups: bool,
    pub has_brackets: bool,
    pub has_additives: bool,
    pub has_unit: bool,
    pub lambek_restricted: bool,
    pub one_division: bool,
    pub bang: Option<BangProfile>,
    pub cut_enabled: bool,
    /// Attached B-rules (`true` = the B'-rule reading with extra premises).
    pub b_rules: Option<(Vec<BRule>, bool)>,
}

/// A named calculus variant.
#[derive(Clone, Debug, PartialEq)]
pub struct CalculusId {
    pub name: String,
    pub features: Features,
}

#[derive(Debug, Error, PartialEq)]
pub enum CalculusError {
    #[error("unknown calculus name `{0}`")]
    UnknownName(String),
    #[error("inconsistent features: {0}")]
    BadFeatures(String),
    #[error("B-rules can only extend the one-division calculus l*(/)")]
    NotOneDivision,
}

/// Rule labels. Primed rule variants reuse the `!R`/`!C` labels; the calculus
/// decides which schema the label means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    Id,
    UnitL,
    UnitR,
    LDivL,
    LDivR,
    RDivL,
    RDivR,
    ProdL,
    ProdR,
    ConjL1,
    ConjL2,
    ConjR,
    DisjL,
    DisjR1,
    DisjR2,
    DiaL,
    DiaR,
    BoxL,
    BoxR,
    BangL,
    BangR,
    BangP,
    BangP1,
    BangP2,
    BangC,
    BangNC1,
    BangNC2,
    BangW,
    Cut,
    B,
    BPrime,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        use RuleId::*;
        match self {
            Id => "id",
            UnitL => "1L",
            UnitR => "1R",
            LDivL => "\\L",
            LDivR => "\\R",
            RDivL => "/L",
            RDivR => "/R",
            ProdL => "*L",
            ProdR => "*R",
            ConjL1 => "&L1",
            ConjL2 => "&L2",
            ConjR => "&R",
            DisjL => "|L",
            DisjR1 => "|R1",
            DisjR2 => "|R2",
            DiaL => "<>L",
            DiaR => "<>R",
            BoxL => "[]L",
            BoxR => "[]R",
            BangL => "!L",
            BangR => "!R",
            BangP => "!P",
            BangP1 => "!P1",
            BangP2 => "!P2",
            BangC => "!C",
            BangNC1 => "!NC1",
            BangNC2 => "!NC2",
            BangW => "!W",
            Cut => "cut",
            B => "B",
            BPrime => "B'",
        }
    }

    pub fn from_str_name(s: &str) -> Option<RuleId> {
        use RuleId::*;
        Some(match s {
            "id" => Id,
            "1L" => UnitL,
            "1R" => UnitR,
            "\\L" => LDivL,
            "\\R" => LDivR,
            "/L" => RDivL,
            "/R" => RDivR,
            "*L" => ProdL,
            "*R" => ProdR,
            "&L1" => ConjL1,
            "&L2" => ConjL2,
            "&R" => ConjR,
            "|L" => DisjL,
            "|R1" => DisjR1,
            "|R2" => DisjR2,
            "<>L" => DiaL,
            "<>R" => DiaR,
            "[]L" => BoxL,
            "[]R" => BoxR,
            "!L" => BangL,
            "!R" => BangR,
            "!P" => BangP,
            "!P1" => BangP1,
            "!P2" => BangP2,
            "!C" => BangC,
            "!NC1" => BangNC1,
            "!NC2" => BangNC2,
            "!W" => BangW,
            "cut" => Cut,
            "B" => B,
            "B'" => BPrime,
            _ => return None,
        })
    }

    /// Does this label count against the contraction budget?
    pub fn is_contraction(self) -> bool {
        matches!(self, RuleId::BangC | RuleId::BangNC1 | RuleId::BangNC2)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl CalculusId {
    pub fn new(name: impl Into<String>, features: Features) -> Result<CalculusId, CalculusError> {
        if features.lambek_restricted && features.has_unit {
            return Err(CalculusError::BadFeatures(
                "Lambek's restriction requires removing the unit".into(),
            ));
        }
        if features.has_stoups && !features.has_brackets {
            return Err(CalculusError::BadFeatures("stoups require brackets".into()));
        }
        Ok(CalculusId { name: name.into(), features })
    }

    /// Resolve a CLI spelling like `b2018st-prime-lr+cut+additives=off`.
    pub fn by_name(spec: &str) -> Result<CalculusId, CalculusError> {
        let mut parts = spec.split('+');
        let base = parts.next().unwrap_or_default();
        let mut features = base_features(base).ok_or_else(|| {
            CalculusError::UnknownName(base.to_string())
        })?;
        for part in parts {
            match part {
                "cut" => features.cut_enabled = true,
                "additives=off" => features.has_additives = false,
                other => return Err(CalculusError::UnknownName(format!("+{other}"))),
            }
        }
        CalculusId::new(spec, features)
    }

    /// The rules licensed by the feature vector. Does not list `B`/`B'`
    /// instances individually; one label covers the attached family.
    pub fn rules(&self) -> Vec<RuleId> {
        use RuleId::*;
        let f = &self.features;
        let mut out = vec![Id, RDivL, RDivR];
        if !f.one_division {
            out.extend([LDivL, LDivR, ProdL, ProdR]);
        }
        if f.has_unit {
            out.extend([UnitL, UnitR]);
        }
        if f.has_additives && !f.one_division {
            out.extend([ConjL1, ConjL2, ConjR, DisjL, DisjR1, DisjR2]);
        }
        if f.has_brackets {
            out.extend([DiaL, DiaR, BoxL, BoxR]);
        }
        match f.bang {
            None => {}
            Some(BangProfile::FullExponential) => {
                out.extend([BangL, BangR, BangP1, BangP2, BangC, BangNC1, BangNC2, BangW])
            }
            Some(BangProfile::Relevant) => {
                out.extend([BangL, BangR, BangP1, BangP2, BangC, BangNC1, BangNC2])
            }
            Some(_) if f.has_stoups => out.extend([BangL, BangR, BangP, BangC]),
            Some(_) => out.extend([BangL, BangR, BangP1, BangP2, BangC]),
        }
        if f.cut_enabled {
            out.push(Cut);
        }
        if let Some((_, primed)) = &f.b_rules {
            out.push(if *primed { BPrime } else { B });
        }
        out
    }

    pub fn has_rule(&self, rule: RuleId) -> bool {
        self.rules().contains(&rule)
    }

    /// A copy with cut enabled.
    pub fn with_cut(&self) -> CalculusId {
        let mut c = self.clone();
        if !c.features.cut_enabled {
            c.features.cut_enabled = true;
            c.name.push_str("+cut");
        }
        c
    }

    /// Attach B-rules (or B'-rules) to the one-division calculus.
    pub fn extend_with_b_rules(
        &self,
        rules: Vec<BRule>,
        primed: bool,
    ) -> Result<CalculusId, CalculusError> {
        if !self.features.one_division {
            return Err(CalculusError::NotOneDivision);
        }
        let mut c = self.clone();
        c.features.b_rules = Some((rules, primed));
        c.name.push_str(if primed { "+brules:prime" } else { "+brules" });
        Ok(c)
    }

    /// Does the sequent stay inside this calculus' fragment (connective set,
    /// stoups, brackets)?
    pub fn fragment_ok(&self, s: &crate::sequent::Sequent) -> bool {
        use crate::sequent::{MetaFormula, TreeTerm};
        let f = &self.features;
        fn meta_ok(c: &Features, m: &MetaFormula) -> bool {
            (c.has_stoups || m.stoup.is_empty())
                && m.items.iter().all(|item| match item {
                    TreeTerm::Leaf(_) => true,
                    TreeTerm::Bracketed(inner) => c.has_brackets && meta_ok(c, inner),
                })
        }
        meta_ok(f, &s.antecedent)
            && s.formulas().iter().all(|fm| {
                fm.uses_only(
                    f.has_unit,
                    f.has_additives,
                    f.has_brackets,
                    f.bang.is_some(),
                    f.one_division,
                )
            })
    }
}

fn base_features(name: &str) -> Option<Features> {
    let plain = Features {
        has_stoups: false,
        has_brackets: false,
        has_additives: true,
        has_unit: true,
        lambek_restricted: false,
        one_division: false,
        bang: None,
        cut_enabled: false,
        b_rules: None,
    };
    Some(match name {
        "malc*" => plain,
        "!malc*" => Features { bang: Some(BangProfile::FullExponential), ..plain },
        "!r-malc*" => Features { bang: Some(BangProfile::Relevant), ..plain },
        "l*(/)" => Features {
            has_additives: false,
            has_unit: false,
            one_division: true,
            ..plain
        },
        "b2015st" => Features {
            has_stoups: true,
            has_brackets: true,
            bang: Some(BangProfile::Morrill2015),
            ..plain
        },
        "b2018st" => Features {
            has_stoups: true,
            has_brackets: true,
            bang: Some(BangProfile::Morrill2018),
            ..plain
        },
        "b2015st-prime" => Features {
            has_stoups: true,
            has_brackets: true,
            bang: Some(BangProfile::Primed2015),
            ..plain
        },
        "b2018st-prime" => Features {
            has_stoups: true,
            has_brackets: true,
            bang: Some(BangProfile::Primed2018),
            ..plain
        },
        "b2018st-prime-lr" => Features {
            has_stoups: true,
            has_brackets: true,
            has_unit: false,
            lambek_restricted: true,
            bang: Some(BangProfile::Primed2018),
            ..plain
        },
        "b2015" => Features {
            has_brackets: true,
            bang: Some(BangProfile::Morrill2015),
            ..plain
        },
        "b2018" => Features {
            has_brackets: true,
            bang: Some(BangProfile::Morrill2018),
            ..plain
        },
        "b2018-lr" => Features {
            has_brackets: true,
            has_unit: false,
            lambek_restricted: true,
            bang: Some(BangProfile::Morrill2018),
            ..plain
        },
        _ => return None,
    })
}

/// The B-formula `(t / (r / q1 ... qm)) / p1 ... pk` of a B-rule, with
/// `E / F1 ... Fn` short for `(E / Fn) / ... / F1`.
pub fn b_formula(rule: &BRule) -> Formula {
    fn div_chain(head: Formula, args: &[String]) -> Formula {
        let mut acc = head;
        for a in args.iter().rev() {
            acc = Formula::rdiv(acc, Formula::var(a.clone()));
        }
        acc
    }
    let inner = div_chain(Formula::var(rule.r.clone()), &rule.qs);
    div_chain(Formula::rdiv(Formula::var(rule.t.clone()), inner), &rule.ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    #[test]
    fn rule_sets_match_profiles() {
        let full = CalculusId::by_name("!malc*").unwrap();
        assert!(full.has_rule(RuleId::BangW));
        let relevant = CalculusId::by_name("!r-malc*").unwrap();
        assert!(!relevant.has_rule(RuleId::BangW));
        assert!(relevant.has_rule(RuleId::BangC));
        assert!(relevant.has_rule(RuleId::BangP1));
        assert!(relevant.has_rule(RuleId::BangP2));
        let lr = CalculusId::by_name("b2018st-prime-lr").unwrap();
        assert!(!lr.has_rule(RuleId::UnitL));
        assert!(!lr.has_rule(RuleId::UnitR));
        let one = CalculusId::by_name("l*(/)").unwrap();
        assert!(!one.has_rule(RuleId::LDivL));
        assert!(one.has_rule(RuleId::RDivL));
    }

    #[test]
    fn suffixes() {
        let c = CalculusId::by_name("b2015st+cut").unwrap();
        assert!(c.features.cut_enabled);
        let c = CalculusId::by_name("!r-malc*+additives=off").unwrap();
        assert!(!c.features.has_additives);
        assert!(CalculusId::by_name("nonsense").is_err());
    }

    #[test]
    fn b_formula_shapes() {
        let r1 = BRule { qs: vec![], r: "s".into(), ps: vec!["e#0".into()], t: "a#0".into() };
        assert_eq!(b_formula(&r1), parse_formula("(a#0/s)/e#0").unwrap());

        let degenerate = BRule { qs: vec![], r: "r".into(), ps: vec![], t: "t".into() };
        assert_eq!(b_formula(&degenerate), parse_formula("t/r").unwrap());

        let k2 = BRule {
            qs: vec!["q1".into()],
            r: "r".into(),
            ps: vec!["p1".into(), "p2".into()],
            t: "t".into(),
        };
        assert_eq!(b_formula(&k2), parse_formula("((t/(r/q1))/p2)/p1").unwrap());
    }
}
