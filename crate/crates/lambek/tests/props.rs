//! Randomized property suites: parse/render round trips, forward/backward
//! rule coherence, multiset and restriction laws, and search oracles.

use lambek::gen::{self, Rng};
use lambek::rules::{enumerate_backward, enumerate_rule_apps, premises_of, RuleApp, RuleParams};
use lambek::search::{search, SearchBudget, SearchVerdict};
use lambek::sequent::{lambek_restriction_holds, subformula_closure, Sequent, Stoup, TreeTerm};
use lambek::{parse_formula, parse_sequent, CalculusId, RuleId};

fn calculi() -> Vec<CalculusId> {
    ["malc*", "!malc*", "!r-malc*", "b2015st", "b2018st", "b2015st-prime", "b2018st-prime", "b2018", "b2015", "l*(/)"]
        .iter()
        .map(|n| CalculusId::by_name(n).unwrap())
        .collect()
}

#[test]
fn parse_render_round_trip() {
    let mut rng = Rng::new(0xfeed_0001);
    let all = calculi();
    for i in 0..1000 {
        let c = &all[i % all.len()];
        let f = gen::formula(&mut rng, c, 1 + i % 7);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{f}");
        let s = gen::sequent(&mut rng, c, 3, 4);
        assert_eq!(parse_sequent(&s.to_string()).unwrap(), s, "{s}");
    }
}

#[test]
fn stoup_multiset_law() {
    let mut rng = Rng::new(0xfeed_0002);
    let c = CalculusId::by_name("b2018st").unwrap();
    for _ in 0..200 {
        let mut members = Vec::new();
        for _ in 0..rng.below(5) {
            members.push(gen::formula(&mut rng, &c, 2));
        }
        let a = Stoup::from(members.clone());
        // rotate and swap
        let mut permuted = members.clone();
        if permuted.len() > 1 {
            let by = 1 + rng.below(permuted.len() - 1);
            permuted.rotate_left(by);
            let with = rng.below(permuted.len());
            permuted.swap(0, with);
        }
        assert_eq!(a, Stoup::from(permuted));
    }
}

#[test]
fn restriction_is_monotone_under_insertion() {
    let mut rng = Rng::new(0xfeed_0003);
    let c = CalculusId::by_name("b2018st-prime-lr").unwrap();
    for _ in 0..200 {
        let s = gen::sequent(&mut rng, &c, 2, 3);
        if !lambek_restriction_holds(&s) {
            continue;
        }
        // insert a fresh formula into a random zone
        let zones = s.antecedent.zone_paths();
        let path = zones[rng.below(zones.len())].clone();
        let extra = gen::formula(&mut rng, &c, 1);
        let grown = s
            .antecedent
            .with_zone(&path, &mut |z| {
                let mut items = z.items.clone();
                let at = if items.is_empty() { 0 } else { rng.0 as usize % (items.len() + 1) };
                items.insert(at, TreeTerm::Leaf(extra.clone()));
                lambek::MetaFormula::new(z.stoup.clone(), items)
            })
            .unwrap();
        assert!(lambek_restriction_holds(&Sequent::new(grown, s.succedent.clone())));
    }
}

/// Every enumerated application replays through `premises_of`, without
/// duplicate (application, premises) pairs, staying in the subformula
/// closure (cut- and B-free rules), and respecting Lambek's restriction
/// when the calculus imposes it.
#[test]
fn forward_backward_coherence() {
    let mut rng = Rng::new(0xfeed_0004);
    let all = calculi();
    for i in 0..500 {
        let c = &all[i % all.len()];
        let goal = gen::sequent(&mut rng, c, 2, 3);
        let apps = enumerate_backward(c, &goal);
        let mut seen = std::collections::HashSet::new();
        let closure = subformula_closure(&goal);
        for (app, premises) in &apps {
            assert_eq!(
                premises_of(c, &goal, app).as_ref(),
                Ok(premises),
                "{}: {:?} on `{goal}`",
                c.name,
                app.rule
            );
            assert!(
                seen.insert(format!("{app:?}")),
                "duplicate application {app:?} on `{goal}`"
            );
            for p in premises {
                for f in p.formulas() {
                    assert!(
                        closure.contains(f),
                        "{}: {} premise formula `{f}` escapes the closure of `{goal}`",
                        c.name,
                        app.rule
                    );
                }
                if c.features.lambek_restricted && lambek_restriction_holds(&goal) {
                    assert!(lambek_restriction_holds(p));
                }
            }
        }
    }
}

/// Conversely: randomly generated parameter bundles that `premises_of`
/// accepts are found by the enumeration.
#[test]
fn random_applications_are_enumerated() {
    let mut rng = Rng::new(0xfeed_0005);
    let all = calculi();
    let mut accepted = 0usize;
    for i in 0..4000 {
        let c = &all[i % all.len()];
        let goal = gen::sequent(&mut rng, c, 2, 3);
        let rules = c.rules();
        let rule = rules[rng.below(rules.len())];
        if rule == RuleId::Cut {
            continue;
        }
        let zones = goal.antecedent.zone_paths();
        let zone = zones[rng.below(zones.len())].clone();
        let stoup_len = goal.antecedent.zone(&zone).unwrap().stoup.len();
        let len = goal.antecedent.zone(&zone).unwrap().items.len();
        let mut sel: Vec<usize> = (0..stoup_len).filter(|_| rng.chance(50)).collect();
        sel.dedup();
        let app = RuleApp::with(
            rule,
            RuleParams {
                zone,
                index: Some(rng.below(len + 1)),
                span: Some((rng.below(len + 1), rng.below(len + 1))),
                stoup_index: if stoup_len > 0 { Some(rng.below(stoup_len)) } else { None },
                stoup_sel: Some(sel),
                stoup_sel2: Some(vec![]),
                split: Some(rng.below(len + 2)),
                split2: Some(rng.below(len + 2)),
                splits: None,
                b_index: None,
                cut_formula: None,
            },
        );
        if let Ok(premises) = premises_of(c, &goal, &app) {
            accepted += 1;
            let found = enumerate_rule_apps(c, &goal, rule)
                .into_iter()
                .any(|(_, ps)| ps == premises);
            assert!(found, "{}: accepted {:?} on `{goal}` not enumerated", c.name, app.rule);
        }
    }
    assert!(accepted > 50, "too few random applications validated ({accepted})");
}

/// A naive bounded prover with no pruning or memoization, used as an oracle:
/// whatever it proves, the engine must prove too.
fn naive_provable(c: &CalculusId, goal: &Sequent, depth: usize) -> bool {
    if depth == 0 {
        return false;
    }
    for (_, premises) in enumerate_backward(c, goal) {
        if premises.iter().all(|p| naive_provable(c, p, depth - 1)) {
            return true;
        }
    }
    false
}

#[test]
fn pruning_never_loses_small_proofs() {
    let mut rng = Rng::new(0xfeed_0006);
    let all = calculi();
    let budget = SearchBudget::default();
    let mut checked = 0usize;
    for i in 0..240 {
        let c = &all[i % all.len()];
        let goal = if i % 3 == 0 {
            // seed with shapes that are likely derivable
            let f = gen::formula(&mut rng, c, 2);
            let g = gen::formula(&mut rng, c, 1);
            match rng.below(3) {
                0 => parse_sequent(&format!("({f}), ({f})\\({g}) => {g}")).unwrap(),
                1 => parse_sequent(&format!("({g})/({f}), ({f}) => {g}")).unwrap(),
                _ => parse_sequent(&format!("({f}) => {f}")).unwrap(),
            }
        } else {
            gen::sequent(&mut rng, c, 2, 2)
        };
        if goal.size() > 16 || !c.fragment_ok(&goal) {
            continue;
        }
        if naive_provable(c, &goal, 4) {
            checked += 1;
            match search(c, &goal, &budget).unwrap() {
                SearchVerdict::Derivable(d) => {
                    assert!(lambek::check(c, &d).is_ok(), "witness fails on `{goal}`")
                }
                v => panic!("naively provable `{goal}` in {} got {v:?}", c.name),
            }
        }
    }
    assert!(checked > 20, "oracle only exercised {checked} goals");
}

/// Goals with golden derivations never come back underivable, whatever the
/// budget.
#[test]
fn golden_goals_are_never_underivable() {
    for (name, calculus, d) in lambek::fixtures::all_golden() {
        if calculus.features.cut_enabled {
            continue; // search rejects cut-enabled calculi
        }
        for depth in [2usize, 6, 12] {
            let budget = SearchBudget { max_depth: depth, ..Default::default() };
            match search(&calculus, &d.sequent, &budget).unwrap() {
                SearchVerdict::Underivable => {
                    panic!("{name}: goal flipped to underivable at depth {depth}")
                }
                _ => {}
            }
        }
    }
}
