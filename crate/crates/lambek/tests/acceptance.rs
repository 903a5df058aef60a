//! Acceptance suite: one test per criterion, each printing a pass line with
//! its runtime and asserting its stated budget.

use lambek::cutelim::eliminate_cuts;
use lambek::derivation::{assert_subformula_property, from_json};
use lambek::encode::{
    bfs_trace, brule_equivalence_selftest, buszkowski_rules, grammar_formulas,
    internalization_selftest, internalizer, synthesize_sequent_derivation, BfsLimits, BfsOutcome,
    Scheme, Type0Grammar,
};
use lambek::fixtures;
use lambek::gen::{self, Rng};
use lambek::grammar::t_recognize;
use lambek::project::{destoup_derivation, enstoup_derivation, project_derivation, ProjMode};
use lambek::rules::{enumerate_backward, premises_of};
use lambek::search::{search, SearchBudget, SearchVerdict};
use lambek::sequent::lambek_restriction_holds;
use lambek::{check, parse_formula, parse_sequent, CalculusId, Derivation};
use std::time::{Duration, Instant};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name),
    )
    .unwrap()
}

fn anbn() -> Type0Grammar {
    Type0Grammar::parse(&fixture("grammars/anbn.txt")).unwrap()
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(String::from).collect()
}

/// Random stoup-free sequents derivable in `c`, with their witnesses.
fn random_derivable(
    c: &CalculusId,
    seed: u64,
    want: usize,
    max_size: usize,
) -> Vec<(lambek::Sequent, Derivation)> {
    let mut rng = Rng::new(seed);
    let budget = SearchBudget {
        max_depth: 24,
        max_contractions: 2,
        max_sequent_size: 64,
        time_limit: Some(Duration::from_millis(300)),
    };
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < want && attempts < 4000 {
        attempts += 1;
        let goal = gen::sequent(&mut rng, c, 2, 3);
        if goal.size() > max_size || !c.fragment_ok(&goal) {
            continue;
        }
        if let Ok(SearchVerdict::Derivable(d)) = search(c, &goal, &budget) {
            out.push((goal, d));
        }
    }
    assert!(out.len() >= want, "only found {} derivable sequents", out.len());
    out
}

#[test]
fn criterion_1_golden_derivations() {
    let t0 = Instant::now();
    for (name, calculus, _) in fixtures::all_golden() {
        let d = from_json(&fixture(&format!("derivations/{name}.json"))).unwrap();
        check(&calculus, &d).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1 (golden derivations check): pass in {elapsed:?}");
}

#[test]
fn criterion_2_cut_counterexamples() {
    let budget = SearchBudget::default();
    let cases: [(&str, &str, bool); 3] = [
        ("b2018st", "!p, q => q * !p", false),
        ("b2018st-prime", "!p, q => q * !p", true),
        ("b2015st", "q => <>q", false),
    ];
    let mut total = Duration::ZERO;
    for (name, goal, expect_derivable) in cases {
        let c = CalculusId::by_name(name).unwrap();
        let goal = parse_sequent(goal).unwrap();
        let t0 = Instant::now();
        let verdict = search(&c, &goal, &budget).unwrap();
        let elapsed = t0.elapsed();
        assert!(elapsed < Duration::from_secs(5), "{name} took {elapsed:?}");
        total += elapsed;
        match (expect_derivable, verdict) {
            (true, SearchVerdict::Derivable(d)) => check(&c, &d).unwrap(),
            (false, SearchVerdict::Underivable) => {}
            (want, got) => panic!("{name}: wanted derivable={want}, got {got:?}"),
        }
    }
    println!("criterion 2 (cut counterexamples): pass in {total:?}");
}

#[test]
fn criterion_3_cut_elimination() {
    let t0 = Instant::now();

    // The cut-admissible form of the counterexample, in both primed systems.
    for name in ["b2018st-prime", "b2015st-prime"] {
        let base = CalculusId::by_name(name).unwrap();
        let c = base.with_cut();
        let lp = fixtures::by_rule(&c, lambek::RuleId::BangP, "{p}; => p", vec![fixtures::ax("p => p")]);
        let lp = fixtures::by_rule(&c, lambek::RuleId::BangR, "{p}; => !p", vec![lp]);
        let lp = fixtures::by_rule(&c, lambek::RuleId::BangR, "{p}; => !!p", vec![lp]);
        let left = fixtures::by_rule(&c, lambek::RuleId::BangL, "!p => !!p", vec![lp]);
        let r = fixtures::by_rule(
            &c,
            lambek::RuleId::ProdR,
            "q, !p => q*!p",
            vec![fixtures::ax("q => q"), fixtures::ax("!p => !p")],
        );
        let r = fixtures::by_rule(&c, lambek::RuleId::BangP, "{!p}; q => q*!p", vec![r]);
        let r = fixtures::by_rule(&c, lambek::RuleId::BangL, "!!p, q => q*!p", vec![r]);
        let cut = fixtures::by_rule(&c, lambek::RuleId::Cut, "!p, q => q*!p", vec![left, r]);
        let (out, log) = eliminate_cuts(&base, &cut).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, cut.sequent);
        check(&base, &out).unwrap();
        assert!(!log.is_empty());
    }

    // At least 20 enstoup-generated cut-bearing derivations, plus the
    // flattened Fig. 2 pipeline. The random goals are shaped so their proofs
    // really move `!`-formulas (the rules whose simulation needs cut).
    let b2018 = CalculusId::by_name("b2018").unwrap();
    let primed = CalculusId::by_name("b2018st-prime").unwrap();
    let mut eliminated = 0usize;
    let src = fixtures::fig2_calculus();
    let (_, flat) = destoup_derivation(&src, &fixtures::fig2()).unwrap();
    let mut inputs: Vec<Derivation> = vec![flat];
    {
        let mut rng = Rng::new(0xacce_0003);
        let budget = SearchBudget {
            max_depth: 24,
            max_contractions: 2,
            max_sequent_size: 64,
            time_limit: Some(Duration::from_millis(500)),
        };
        while inputs.len() < 45 {
            let f = gen::formula(&mut rng, &b2018, 1);
            let g = gen::formula(&mut rng, &b2018, 1);
            let text = match inputs.len() % 3 {
                0 => format!("!({f}), ({g}) => ({g}) * !({f})"),
                1 => format!("({g}), !({f}) => !({f}) * ({g})"),
                _ => format!("!({f}) => !(!({f}))"),
            };
            let goal = parse_sequent(&text).unwrap();
            if let Ok(SearchVerdict::Derivable(d)) = search(&b2018, &goal, &budget) {
                inputs.push(d);
            }
        }
    }
    for d in inputs {
        let (_, stouped) = enstoup_derivation(&b2018, &d).unwrap();
        if stouped.cut_count() == 0 {
            continue;
        }
        let (out, _log) = eliminate_cuts(&primed, &stouped).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, d.sequent);
        check(&primed, &out).unwrap();
        eliminated += 1;
    }
    assert!(eliminated >= 20, "only {eliminated} cut-bearing inputs");

    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 3 (cut elimination, {eliminated} enstouped inputs): pass in {elapsed:?}");
}

#[test]
fn criterion_4_round_trips() {
    let t0 = Instant::now();
    let b2018 = CalculusId::by_name("b2018").unwrap();
    let primed = CalculusId::by_name("b2018st-prime").unwrap();
    let budget = SearchBudget::default();
    let sample = random_derivable(&b2018, 0xacce_0004, 50, 10);
    for (goal, witness) in &sample {
        check(&b2018, witness).unwrap();
        match search(&primed, goal, &budget).unwrap() {
            SearchVerdict::Derivable(d) => check(&primed, &d).unwrap(),
            v => panic!("`{goal}` derivable in b2018 but {v:?} in b2018st-prime"),
        }
    }
    // and the other direction on definitively underivable goals
    let mut rng = Rng::new(0xacce_0044);
    let mut refuted = 0usize;
    while refuted < 20 {
        let goal = gen::sequent(&mut rng, &b2018, 2, 3);
        if goal.size() > 10 {
            continue;
        }
        if let SearchVerdict::Underivable = search(&b2018, &goal, &budget).unwrap() {
            refuted += 1;
            assert!(
                !search(&primed, &goal, &budget).unwrap().is_derivable(),
                "`{goal}` underivable in b2018 but derivable in b2018st-prime"
            );
        }
    }
    let elapsed = t0.elapsed();
    println!(
        "criterion 4 (b2018 <-> b2018st-prime on {} sequents, zero disagreements): pass in {elapsed:?}",
        sample.len()
    );
}

#[test]
fn criterion_5_pi_q_soundness_sweep() {
    let t0 = Instant::now();
    let target = CalculusId::by_name("!malc*").unwrap();
    let mut swept = 0usize;

    let mut sweep = |src: &CalculusId, d: &Derivation| {
        check(src, d).unwrap();
        for mode in [ProjMode::Pi, ProjMode::PiQ] {
            let (_, projected) = project_derivation(src, d, mode, "q").unwrap();
            check(&target, &projected).unwrap_or_else(|e| {
                panic!("projection of `{}` fails: {e}", d.sequent)
            });
        }
        swept += 1;
    };

    // flattened golden derivations
    let (b2018, flat2) = destoup_derivation(&fixtures::fig2_calculus(), &fixtures::fig2()).unwrap();
    sweep(&b2018, &flat2);
    let prime15 = CalculusId::by_name("b2015st-prime").unwrap();
    let (b2015, flat3) = destoup_derivation(&prime15, &fixtures::fig3()).unwrap();
    sweep(&b2015, &flat3);

    // random stoup-free witnesses
    let c18 = CalculusId::by_name("b2018").unwrap();
    for (_, d) in random_derivable(&c18, 0xacce_0005, 25, 12) {
        sweep(&c18, &d);
    }

    // synthesized encodings
    let g = anbn();
    for word in ["a b", "a a b b"] {
        for scheme in [Scheme::B2015, Scheme::B2018] {
            let syn =
                synthesize_sequent_derivation(&g, &words(word), scheme, "q", &BfsLimits::default())
                    .unwrap();
            sweep(&syn.calculus, &syn.derivation);
        }
    }

    let elapsed = t0.elapsed();
    println!("criterion 5 (pi/pi_q soundness on {swept} derivations, zero failures): pass in {elapsed:?}");
}

#[test]
fn criterion_6_lambek_restriction() {
    let t0 = Instant::now();
    let lr = CalculusId::by_name("b2018st-prime-lr").unwrap();
    let fig4 = from_json(&fixture("derivations/fig4.json")).unwrap();
    assert!(check(&lr, &fig4).is_err(), "the empty island must be rejected");
    let fig2 = from_json(&fixture("derivations/fig2.json")).unwrap();
    check(&lr, &fig2).unwrap();
    let mut all_restricted = true;
    fig2.walk(&mut |node| all_restricted &= lambek_restriction_holds(&node.sequent));
    assert!(all_restricted);
    let elapsed = t0.elapsed();
    println!("criterion 6 (Lambek restriction accepts Fig. 2, rejects Fig. 4): pass in {elapsed:?}");
}

#[test]
fn criterion_7_encoding_end_to_end() {
    let t0 = Instant::now();
    let g = anbn();
    let formulas = grammar_formulas(&g);
    let limits = BfsLimits::default();
    let restricted = CalculusId::by_name("b2018-lr").unwrap();

    for scheme in [Scheme::B2015, Scheme::B2018, Scheme::B2018st] {
        let phi = internalizer(&formulas, scheme, "q").unwrap();
        internalization_selftest(&phi, &formulas, scheme, "q")
            .unwrap_or_else(|e| panic!("{scheme:?}: {e}"));
        for word in ["a b", "a a b b", "a a a b b b"] {
            let syn =
                synthesize_sequent_derivation(&g, &words(word), scheme, "q", &limits).unwrap();
            check(&syn.calculus, &syn.derivation)
                .unwrap_or_else(|e| panic!("{scheme:?} on `{word}`: {e}"));
            // membership agreement with the rewriting oracle
            assert!(matches!(bfs_trace(&g, &words(word), &limits), BfsOutcome::Found(_)));
            if scheme == Scheme::B2018 {
                check(&restricted, &syn.derivation).unwrap_or_else(|e| {
                    panic!("b2018 synthesis violates the restriction on `{word}`: {e}")
                });
            }
        }
    }
    // non-members are never found by the oracle
    for word in ["b a", "a a b", "a b b b"] {
        assert!(!matches!(bfs_trace(&g, &words(word), &limits), BfsOutcome::Found(_)));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 7 (encoding end-to-end, 3 schemes x 3 words): pass in {elapsed:?}");
}

#[test]
fn criterion_8_buszkowski() {
    let t0 = Instant::now();
    let g = anbn();
    brule_equivalence_selftest(&g).unwrap();
    for word in ["a b", "a a b b", "a a a b b b"] {
        let syn = synthesize_sequent_derivation(
            &g,
            &words(word),
            Scheme::Buszkowski,
            "q",
            &BfsLimits::default(),
        )
        .unwrap();
        check(&syn.calculus, &syn.derivation).unwrap();
    }
    // the B-axiom template checks for every generated rule
    let pure = CalculusId::by_name("l*(/)").unwrap();
    for rule in buszkowski_rules(&g) {
        let t = lambek::encode::b_axiom_template(&rule, &lambek::calculus::b_formula(&rule)).unwrap();
        check(&pure, &t).unwrap();
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 8 (Buszkowski one-division encoding): pass in {elapsed:?}");
}

#[test]
fn criterion_9_grammar_frontend() {
    let t0 = Instant::now();
    let budget = SearchBudget::default();
    let lex = fixtures::section3_lexicon();
    let phrase: Vec<&str> = "the paper that John signed without reading".split(' ').collect();
    let c2018 = CalculusId::by_name("b2018st").unwrap();
    match t_recognize(&c2018, &lex, &phrase, &budget, 4).unwrap() {
        SearchVerdict::Derivable(d) => {
            check(&c2018, &d).unwrap();
            // the bracket-erasure of the witness is the assigned types
            let types = lambek::grammar::flatten_types(&d.sequent.antecedent);
            let assigned: Vec<_> = phrase
                .iter()
                .map(|w| lex.types_of(w).unwrap()[0].clone())
                .collect();
            assert_eq!(types, assigned);
        }
        v => panic!("Fig. 2 phrase not t-recognized: {v:?}"),
    }

    let lex_cn = lex.with_goal(parse_formula("CN").unwrap());
    let c2015 = CalculusId::by_name("b2015st").unwrap();
    match t_recognize(&c2015, &lex_cn, &["man", "who", "likes"], &budget, 4).unwrap() {
        SearchVerdict::Derivable(d) => check(&c2015, &d).unwrap(),
        v => panic!("\"man who likes\" not accepted by the 2015 system: {v:?}"),
    }
    let lr = CalculusId::by_name("b2018st-prime-lr").unwrap();
    match t_recognize(&lr, &lex_cn, &["man", "who", "likes"], &budget, 4).unwrap() {
        SearchVerdict::Underivable => {}
        v => panic!("the restricted system must exhaustively reject it, got {v:?}"),
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 9 (t-recognition of the island examples): pass in {elapsed:?}");
}

#[test]
fn criterion_10_property_suites() {
    let t0 = Instant::now();

    // parse/render round trip on 1000 random terms
    let mut rng = Rng::new(0xacce_0010);
    let cals: Vec<CalculusId> = ["malc*", "!r-malc*", "b2018st", "b2015st-prime", "l*(/)"]
        .iter()
        .map(|n| CalculusId::by_name(n).unwrap())
        .collect();
    for i in 0..1000 {
        let c = &cals[i % cals.len()];
        let f = gen::formula(&mut rng, c, 1 + i % 6);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        let s = gen::sequent(&mut rng, c, 3, 4);
        assert_eq!(parse_sequent(&s.to_string()).unwrap(), s);
    }

    // forward/backward coherence on 500 random sequents
    for i in 0..500 {
        let c = &cals[i % cals.len()];
        let goal = gen::sequent(&mut rng, c, 2, 3);
        for (app, premises) in enumerate_backward(c, &goal) {
            assert_eq!(premises_of(c, &goal, &app), Ok(premises));
        }
    }

    // subformula property on the cut-free golden derivations
    for (name, _, d) in fixtures::all_golden() {
        if d.cut_count() == 0 {
            assert_subformula_property(&d).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    let elapsed = t0.elapsed();
    println!("criterion 10 (property suites): pass in {elapsed:?}");
}
