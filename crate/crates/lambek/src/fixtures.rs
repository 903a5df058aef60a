//! Bundled derivations, lexicons and grammars: transcriptions of the worked
//! examples that ship with the repository and anchor the test suite.

use crate::calculus::{CalculusId, RuleId};
use crate::derivation::Derivation;
use crate::grammar::Lexicon;
use crate::parse::{parse_formula, parse_sequent};
use crate::rules::find_app;

/// Types used by the bracketed examples.
pub const T_REL: &str = "([][](CN\\CN))/(S/!N)";
pub const V_TV: &str = "(<>N\\S)/N";
pub const W_WITHOUT: &str = "([]((<>N\\S)\\(<>N\\S)))/(<>N\\S)";

/// Build a node by conclusion text, resolving the rule parameters against the
/// children. Panics if no instance of `rule` fits; fixtures are static.
pub fn by_rule(c: &CalculusId, rule: RuleId, concl: &str, children: Vec<Derivation>) -> Derivation {
    let sequent = parse_sequent(concl).unwrap_or_else(|e| panic!("fixture sequent `{concl}`: {e}"));
    let kids: Vec<_> = children.iter().map(|d| d.sequent.clone()).collect();
    let app = find_app(c, &sequent, rule, &kids)
        .unwrap_or_else(|| panic!("no {rule} instance derives `{concl}` from {kids:?}"));
    Derivation::new(sequent, app, children)
}

/// An `id` axiom leaf.
pub fn ax(concl: &str) -> Derivation {
    Derivation::leaf(parse_sequent(concl).unwrap(), RuleId::Id)
}

pub fn fig1_calculus() -> CalculusId {
    CalculusId::by_name("!r-malc*+additives=off").unwrap()
}

/// "the paper that John signed without reading" in the relevant system
/// without brackets.
pub fn fig1() -> Derivation {
    let c = &fig1_calculus();
    let l9 = by_rule(c, RuleId::LDivL, "N, N\\S => S", vec![ax("N => N"), ax("S => S")]);
    let l8 = by_rule(
        c,
        RuleId::LDivL,
        "N, N\\S, (N\\S)\\(N\\S) => S",
        vec![ax("N\\S => N\\S"), l9],
    );
    let l7 = by_rule(
        c,
        RuleId::RDivL,
        "N, N\\S, ((N\\S)\\(N\\S))/(N\\S), N\\S => S",
        vec![ax("N\\S => N\\S"), l8],
    );
    let l6 = by_rule(
        c,
        RuleId::RDivL,
        "N, N\\S, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N, N => S",
        vec![ax("N => N"), l7],
    );
    let l5 = by_rule(
        c,
        RuleId::RDivL,
        "N, (N\\S)/N, N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N, N => S",
        vec![ax("N => N"), l6],
    );
    let l4 = by_rule(
        c,
        RuleId::BangL,
        "N, (N\\S)/N, N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N, !N => S",
        vec![l5],
    );
    let l3 = by_rule(
        c,
        RuleId::BangL,
        "N, (N\\S)/N, !N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N, !N => S",
        vec![l4],
    );
    let l2 = by_rule(
        c,
        RuleId::BangNC1,
        "N, (N\\S)/N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N, !N => S",
        vec![l3],
    );
    let l1 = by_rule(
        c,
        RuleId::RDivR,
        "N, (N\\S)/N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N => S/!N",
        vec![l2],
    );
    let r2 = by_rule(c, RuleId::RDivL, "N/CN, CN => N", vec![ax("CN => CN"), ax("N => N")]);
    let r1 = by_rule(c, RuleId::LDivL, "N/CN, CN, CN\\CN => N", vec![ax("CN => CN"), r2]);
    by_rule(
        c,
        RuleId::RDivL,
        "N/CN, CN, (CN\\CN)/(S/!N), N, (N\\S)/N, ((N\\S)\\(N\\S))/(N\\S), (N\\S)/N => N",
        vec![l1, r1],
    )
}

pub fn fig2_calculus() -> CalculusId {
    CalculusId::by_name("b2018st").unwrap()
}

/// The relative-clause branch shared by Figs. 2-4:
/// `CN, [[ [][](CN\CN) ]] => CN`.
fn relative_clause_branch(c: &CalculusId) -> Derivation {
    let r2 = by_rule(
        c,
        RuleId::LDivL,
        "CN, CN\\CN => CN",
        vec![ax("CN => CN"), ax("CN => CN")],
    );
    let r1 = by_rule(c, RuleId::BoxL, "CN, [ ([](CN\\CN)) ] => CN", vec![r2]);
    by_rule(c, RuleId::BoxL, "CN, [[ ([][](CN\\CN)) ]] => CN", vec![r1])
}

/// "the paper that John signed without reading" in the 2018 stoup system,
/// with the without-clause given as a strong island.
pub fn fig2() -> Derivation {
    let c = &fig2_calculus();
    let (t, v, w) = (T_REL, V_TV, W_WITHOUT);
    let f14 = by_rule(c, RuleId::DiaR, "[N] => <>N", vec![ax("N => N")]);
    let f13 = by_rule(c, RuleId::LDivL, "[N], <>N\\S => S", vec![f14, ax("S => S")]);
    let f12 = by_rule(
        c,
        RuleId::LDivL,
        "[N], <>N\\S, (<>N\\S)\\(<>N\\S) => S",
        vec![ax("<>N\\S => <>N\\S"), f13],
    );
    let f11 = by_rule(
        c,
        RuleId::RDivL,
        &format!("[N], {v}, N, (<>N\\S)\\(<>N\\S) => S"),
        vec![ax("N => N"), f12],
    );
    let f10 = by_rule(
        c,
        RuleId::BoxL,
        &format!("[N], {v}, N, [ ([]((<>N\\S)\\(<>N\\S))) ] => S"),
        vec![f11],
    );
    let f9 = by_rule(
        c,
        RuleId::RDivL,
        &format!("[N], {v}, N, [ {w}, <>N\\S ] => S"),
        vec![ax("<>N\\S => <>N\\S"), f10],
    );
    let f8 = by_rule(
        c,
        RuleId::RDivL,
        &format!("[N], {v}, N, [ {w}, {v}, N ] => S"),
        vec![ax("N => N"), f9],
    );
    let f7 = by_rule(c, RuleId::BangP, &format!("[N], {v}, N, [ {{N}}; {w}, {v} ] => S"), vec![f8]);
    let f6 = by_rule(
        c,
        RuleId::BangP,
        &format!("{{N}}; [N], {v}, [ {{N}}; {w}, {v} ] => S"),
        vec![f7],
    );
    let f5 = by_rule(
        c,
        RuleId::BangC,
        &format!("{{N}}; [N], {v}, [[ {w}, {v} ]] => S"),
        vec![f6],
    );
    let f4 = by_rule(c, RuleId::BangL, &format!("[N], {v}, [[ {w}, {v} ]], !N => S"), vec![f5]);
    let f3 = by_rule(c, RuleId::RDivR, &format!("[N], {v}, [[ {w}, {v} ]] => S/!N"), vec![f4]);
    let rel = relative_clause_branch(c);
    let f2 = by_rule(
        c,
        RuleId::RDivL,
        &format!("CN, [[ {t}, [N], {v}, [[ {w}, {v} ]] ]] => CN"),
        vec![f3, rel],
    );
    by_rule(
        c,
        RuleId::RDivL,
        &format!("N/CN, CN, [[ {t}, [N], {v}, [[ {w}, {v} ]] ]] => N"),
        vec![f2, ax("N => N")],
    )
}

pub fn fig3_calculus() -> CalculusId {
    CalculusId::by_name("b2015st").unwrap()
}

/// *"man who likes" parsed by the 2015 system: the contraction itself
/// creates the empty subject island.
pub fn fig3() -> Derivation {
    let c = &fig3_calculus();
    let (t, v) = (T_REL, V_TV);
    let g8 = by_rule(c, RuleId::DiaR, "[N] => <>N", vec![ax("N => N")]);
    let g7 = by_rule(c, RuleId::LDivL, "[N], <>N\\S => S", vec![g8, ax("S => S")]);
    let g6 = by_rule(c, RuleId::RDivL, &format!("[N], {v}, N => S"), vec![ax("N => N"), g7]);
    let g5 = by_rule(c, RuleId::BangP, &format!("[{{N}};], {v}, N => S"), vec![g6]);
    let g4 = by_rule(c, RuleId::BangP, &format!("{{N}}; [{{N}};], {v} => S"), vec![g5]);
    let g3 = by_rule(c, RuleId::BangC, &format!("{{N}}; {v} => S"), vec![g4]);
    let g2 = by_rule(c, RuleId::BangL, &format!("{v}, !N => S"), vec![g3]);
    let g1 = by_rule(c, RuleId::RDivR, &format!("{v} => S/!N"), vec![g2]);
    let rel = relative_clause_branch(c);
    by_rule(c, RuleId::RDivL, &format!("CN, [[ {t}, {v} ]] => CN"), vec![g1, rel])
}

pub fn fig4_calculus() -> CalculusId {
    CalculusId::by_name("b2018st").unwrap()
}

/// *"man [[who [[ ]] likes]]" in the 2018 system: parseable only because the
/// bracketing declares an empty subject island.
pub fn fig4() -> Derivation {
    let c = &fig4_calculus();
    let (t, v) = (T_REL, V_TV);
    let h8 = by_rule(c, RuleId::DiaR, "[N] => <>N", vec![ax("N => N")]);
    let h7 = by_rule(c, RuleId::LDivL, "[N], <>N\\S => S", vec![h8, ax("S => S")]);
    let h6 = by_rule(c, RuleId::RDivL, &format!("[N], {v}, N => S"), vec![ax("N => N"), h7]);
    let h5 = by_rule(c, RuleId::BangP, &format!("[{{N}};], {v}, N => S"), vec![h6]);
    let h4 = by_rule(c, RuleId::BangP, &format!("{{N}}; [{{N}};], {v} => S"), vec![h5]);
    let h3 = by_rule(c, RuleId::BangC, &format!("{{N}}; [[ ]], {v} => S"), vec![h4]);
    let h2 = by_rule(c, RuleId::BangL, &format!("[[ ]], {v}, !N => S"), vec![h3]);
    let h1 = by_rule(c, RuleId::RDivR, &format!("[[ ]], {v} => S/!N"), vec![h2]);
    let rel = relative_clause_branch(c);
    by_rule(c, RuleId::RDivL, &format!("CN, [[ {t}, [[ ]], {v} ]] => CN"), vec![h1, rel])
}

pub fn cut2018_calculus() -> CalculusId {
    CalculusId::by_name("b2018st+cut").unwrap()
}

/// `!p, q => q*!p` is derivable in the 2018 system only with cut.
pub fn cut2018() -> Derivation {
    let c = &cut2018_calculus();
    let left = by_rule(c, RuleId::BangR, "!p => !!p", vec![ax("!p => !p")]);
    let c3 = by_rule(c, RuleId::ProdR, "q, !p => q*!p", vec![ax("q => q"), ax("!p => !p")]);
    let c2 = by_rule(c, RuleId::BangP, "{!p}; q => q*!p", vec![c3]);
    let c1 = by_rule(c, RuleId::BangL, "!!p, q => q*!p", vec![c2]);
    by_rule(c, RuleId::Cut, "!p, q => q*!p", vec![left, c1])
}

pub fn cut2015_calculus() -> CalculusId {
    CalculusId::by_name("b2015st+cut").unwrap()
}

/// `q => <>q` is derivable in the 2015 system only with a cut against
/// `=> !1`, whose contraction step fakes non-emptiness with the unit.
pub fn cut2015() -> Derivation {
    let c = &cut2015_calculus();
    let unit = Derivation::leaf(parse_sequent("=> 1").unwrap(), RuleId::UnitR);
    let left = by_rule(c, RuleId::BangR, "=> !1", vec![unit]);
    let e5 = by_rule(c, RuleId::DiaR, "[q] => <>q", vec![ax("q => q")]);
    let e4 = by_rule(c, RuleId::UnitL, "[1, q] => <>q", vec![e5]);
    let e3 = by_rule(c, RuleId::UnitL, "1, [1, q] => <>q", vec![e4]);
    let e2 = by_rule(c, RuleId::BangP, "1, [{1}; q] => <>q", vec![e3]);
    let e1 = by_rule(c, RuleId::BangP, "{1}; [{1}; q] => <>q", vec![e2]);
    let e0 = by_rule(c, RuleId::BangC, "{1}; q => <>q", vec![e1]);
    let d1 = by_rule(c, RuleId::BangL, "!1, q => <>q", vec![e0]);
    by_rule(c, RuleId::Cut, "q => <>q", vec![left, d1])
}

/// Every golden derivation with the calculus it checks in.
pub fn all_golden() -> Vec<(&'static str, CalculusId, Derivation)> {
    vec![
        ("fig1", fig1_calculus(), fig1()),
        ("fig2", fig2_calculus(), fig2()),
        ("fig3", fig3_calculus(), fig3()),
        ("fig4", fig4_calculus(), fig4()),
        ("cut2018", cut2018_calculus(), cut2018()),
        ("cut2015", cut2015_calculus(), cut2015()),
    ]
}

/// The extraction lexicon (bracket-free types).
pub fn section2_lexicon() -> Lexicon {
    let mut lex = Lexicon::new(parse_formula("N").unwrap());
    for (word, ty) in [
        ("the", "N/CN"),
        ("paper", "CN"),
        ("that", "(CN\\CN)/(S/!N)"),
        ("John", "N"),
        ("signed", "(N\\S)/N"),
        ("reading", "(N\\S)/N"),
        ("without", "((N\\S)\\(N\\S))/(N\\S)"),
    ] {
        lex.add(word, parse_formula(ty).unwrap());
    }
    lex
}

/// The bracketed lexicon of the island examples.
pub fn section3_lexicon() -> Lexicon {
    let mut lex = Lexicon::new(parse_formula("N").unwrap());
    for (word, ty) in [
        ("the", "N/CN"),
        ("man", "CN"),
        ("paper", "CN"),
        ("likes", V_TV),
        ("signed", V_TV),
        ("reading", V_TV),
        ("without", W_WITHOUT),
        ("who", T_REL),
        ("that", T_REL),
        ("John", "<>N"),
    ] {
        lex.add(word, parse_formula(ty).unwrap());
    }
    lex
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{assert_subformula_property, check};

    #[test]
    fn golden_derivations_check() {
        for (name, c, d) in all_golden() {
            check(&c, &d).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn fig4_fails_under_lambek_restriction() {
        let lr = CalculusId::by_name("b2018st-prime-lr").unwrap();
        assert!(check(&lr, &fig4()).is_err());
        // Fig. 2 survives: every island is inhabited.
        assert!(check(&lr, &fig2()).is_ok());
    }

    #[test]
    fn cut_counts() {
        assert_eq!(fig2().cut_count(), 0);
        assert_eq!(cut2018().cut_count(), 1);
        assert_eq!(cut2015().cut_count(), 1);
    }

    #[test]
    fn subformula_property_on_cut_free_figures() {
        for d in [fig1(), fig2(), fig3(), fig4()] {
            assert!(assert_subformula_property(&d).is_ok());
        }
    }
}
