//! Constructive cut elimination for the primed systems.
//!
//! Cuts are removed innermost-first. Each elimination recurses on a pair of
//! cut-free premise derivations with a designated occurrence of the cut
//! formula, by nested induction on (κ, σ): the size of the cut formula, then
//! the combined size of the two premises. The `!`-case performs the deep,
//! non-local step: the occurrence parked in the stoup by `!L` is traced
//! upward to the `!P` applications that planted it, each of which turns into
//! a smaller cut on the boxed formula.

use crate::calculus::{BangProfile, CalculusId, RuleId};
use crate::derivation::{check, Derivation};
use crate::formula::Formula;
use crate::rules::{find_app, premises_of};
use crate::sequent::{MetaFormula, Sequent, TreeTerm};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CutElimError {
    #[error(
        "no cut-elimination procedure for `{0}`: the unprimed 2015/2018 rules admit cuts \
         with no cut-free counterpart (e.g. `!p, q => q*!p` and `q => <>q`)"
    )]
    Unsupported(String),
    #[error("input does not check: {0}")]
    BadInput(String),
    #[error("measure (kappa, sigma) failed to decrease: {0:?} -> {1:?} at {2}")]
    MeasureIncrease((usize, usize), (usize, usize), String),
    #[error("internal: {0}")]
    Internal(String),
}

/// One step of the (κ, σ) log.
#[derive(Clone, Debug)]
pub struct Step {
    pub case: &'static str,
    pub kappa: usize,
    pub sigma: usize,
}

/// Address of an item occurrence in an antecedent.
type Occ = (Vec<usize>, usize);

fn cut_conclusion(left: &Sequent, right: &Sequent, occ: &Occ) -> Result<Sequent, CutElimError> {
    let ante = right
        .antecedent
        .with_zone(&occ.0, &mut |z| {
            let mut stoup = z.stoup.clone();
            stoup.members.extend(left.antecedent.stoup.members.iter().cloned());
            let mut items = z.items[..occ.1].to_vec();
            items.extend(left.antecedent.items.iter().cloned());
            items.extend(z.items[occ.1 + 1..].iter().cloned());
            MetaFormula::new(stoup, items)
        })
        .map_err(|e| CutElimError::Internal(e.to_string()))?;
    Ok(Sequent::new(ante, right.succedent.clone()))
}

struct Eliminator<'a> {
    calculus: &'a CalculusId, // cut-free
    log: Vec<Step>,
}

/// Marker planted in stoups (case 1) or item lists (case 4) to track the
/// designated occurrence through `premises_of`.
fn marker() -> Formula {
    Formula::Var("\u{1}cut-trace".into())
}

fn find_item(s: &Sequent, f: &Formula) -> Option<Occ> {
    fn go(m: &MetaFormula, path: &mut Vec<usize>, f: &Formula) -> Option<Occ> {
        for (i, item) in m.items.iter().enumerate() {
            match item {
                TreeTerm::Leaf(g) if g == f => return Some((path.clone(), i)),
                TreeTerm::Bracketed(inner) => {
                    path.push(i);
                    if let Some(hit) = go(inner, path, f) {
                        return Some(hit);
                    }
                    path.pop();
                }
                TreeTerm::Leaf(_) => {}
            }
        }
        None
    }
    go(&s.antecedent, &mut Vec::new(), f)
}

fn stoup_has_marker(s: &Sequent) -> bool {
    fn go(m: &MetaFormula) -> bool {
        m.stoup.members.contains(&marker())
            || m.items.iter().any(|it| match it {
                TreeTerm::Bracketed(inner) => go(inner),
                TreeTerm::Leaf(_) => false,
            })
    }
    go(&s.antecedent)
}

/// Replace every marker stoup member by the members of `xi`.
fn realize(s: &Sequent, xi: &[Formula]) -> Sequent {
    fn go(m: &MetaFormula, xi: &[Formula]) -> MetaFormula {
        let mut members = Vec::new();
        for f in &m.stoup.members {
            if *f == marker() {
                members.extend(xi.iter().cloned());
            } else {
                members.push(f.clone());
            }
        }
        let items = m
            .items
            .iter()
            .map(|it| match it {
                TreeTerm::Leaf(f) => TreeTerm::Leaf(f.clone()),
                TreeTerm::Bracketed(inner) => TreeTerm::Bracketed(go(inner, xi)),
            })
            .collect();
        MetaFormula::new(crate::sequent::Stoup::from(members), items)
    }
    Sequent::new(go(&s.antecedent, xi), s.succedent.clone())
}

impl<'a> Eliminator<'a> {
    fn rebuild(
        &self,
        rule: RuleId,
        concl: Sequent,
        children: Vec<Derivation>,
    ) -> Result<Derivation, CutElimError> {
        let kids: Vec<Sequent> = children.iter().map(|d| d.sequent.clone()).collect();
        let app = find_app(self.calculus, &concl, rule, &kids).ok_or_else(|| {
            CutElimError::Internal(format!("no {rule} instance derives `{concl}`"))
        })?;
        Ok(Derivation::new(concl, app, children))
    }

    /// Is the lowermost rule of the left premise principal (introducing the
    /// succedent)?
    fn left_principal(rule: RuleId) -> bool {
        use RuleId::*;
        matches!(
            rule,
            LDivR | RDivR | ProdR | UnitR | ConjR | DisjR1 | DisjR2 | DiaR | BoxR | BangR
        )
    }

    /// Does the lowermost rule of the right premise introduce exactly the
    /// designated occurrence?
    fn right_principal(d: &Derivation, occ: &Occ) -> bool {
        use RuleId::*;
        let p = &d.rule.params;
        match d.rule.rule {
            UnitL | ProdL | ConjL1 | ConjL2 | DisjL | BangL | DiaL => {
                p.zone == occ.0 && p.index == Some(occ.1)
            }
            LDivL => {
                let Some((st, ln)) = p.span else { return false };
                p.zone == occ.0 && st + ln == occ.1
            }
            RDivL => {
                let Some((st, _)) = p.span else { return false };
                p.zone == occ.0 && st == occ.1 + 1
            }
            BoxL => {
                // introduces the []A inside the bracket it opens
                let Some(k) = p.index else { return false };
                let mut inner = p.zone.clone();
                inner.push(k);
                occ.0 == inner && occ.1 == 0
            }
            _ => false,
        }
    }

    /// Eliminate a single cut between cut-free `left` (proving `ξ; Π => A`)
    /// and cut-free `right` with the designated `A` item at `occ`.
    fn elim(
        &mut self,
        left: &Derivation,
        right: &Derivation,
        occ: &Occ,
        parent: Option<(usize, usize)>,
    ) -> Result<Derivation, CutElimError> {
        let cut_formula = left.sequent.succedent.clone();
        let kappa = cut_formula.size();
        let sigma = left.node_count() + right.node_count();
        if let Some(pm) = parent {
            if (kappa, sigma) >= pm {
                return Err(CutElimError::MeasureIncrease(
                    pm,
                    (kappa, sigma),
                    format!("cut on `{cut_formula}`"),
                ));
            }
        }
        let goal = cut_conclusion(&left.sequent, &right.sequent, occ)?;
        let measure = (kappa, sigma);
        let out = self.elim_cases(left, right, occ, measure, &goal)?;
        if out.sequent != goal {
            return Err(CutElimError::Internal(format!(
                "cut elimination landed at `{}`, wanted `{goal}`",
                out.sequent
            )));
        }
        Ok(out)
    }

    fn log(&mut self, case: &'static str, measure: (usize, usize)) {
        self.log.push(Step { case, kappa: measure.0, sigma: measure.1 });
    }

    fn elim_cases(
        &mut self,
        left: &Derivation,
        right: &Derivation,
        occ: &Occ,
        measure: (usize, usize),
        goal: &Sequent,
    ) -> Result<Derivation, CutElimError> {
        use RuleId::*;
        let pm = Some(measure);

        // Case 5: an axiom premise makes the cut disappear.
        if left.rule.rule == Id {
            self.log("axiom-left", measure);
            return Ok(right.clone());
        }
        if right.rule.rule == Id {
            self.log("axiom-right", measure);
            return Ok(left.clone());
        }

        let lrule = left.rule.rule;
        if Self::left_principal(lrule) && Self::right_principal(right, occ) {
            // Case 1: the deep step for `!`.
            if lrule == BangR {
                self.log("deep", measure);
                let promoted = &left.children[0]; // ξ; Λ => A'
                let r0 = &right.children[0];
                // the !L premise appended A' at the end of the zone's stoup
                let zone_stoup = right
                    .sequent
                    .antecedent
                    .zone(&occ.0)
                    .map_err(|e| CutElimError::Internal(e.to_string()))?
                    .stoup
                    .len();
                let marked = mark_stoup(&r0.sequent, &occ.0, zone_stoup)?;
                return self.deep(r0, &marked, promoted, pm);
            }
            // Case 2: principal on both sides.
            return self.principal(left, right, occ, measure);
        }

        if !Self::left_principal(lrule) {
            // Case 3: commute with the left premise's lowermost (left) rule.
            self.log("commute-left", measure);
            let sides: usize = match lrule {
                LDivL | RDivL => 1,
                _ => 0,
            };
            let mut children = Vec::with_capacity(left.children.len());
            for (i, ch) in left.children.iter().enumerate() {
                if i < sides {
                    children.push(ch.clone());
                } else {
                    children.push(self.elim(ch, right, occ, pm)?);
                }
            }
            return self.rebuild(lrule, goal.clone(), children);
        }

        // Case 4: commute with the right premise's lowermost rule.
        self.log("commute-right", measure);
        let marked_right = {
            let ante = right
                .sequent
                .antecedent
                .with_zone(&occ.0, &mut |z| {
                    let mut items = z.items.clone();
                    items[occ.1] = TreeTerm::Leaf(marker());
                    MetaFormula::new(z.stoup.clone(), items)
                })
                .map_err(|e| CutElimError::Internal(e.to_string()))?;
            Sequent::new(ante, right.sequent.succedent.clone())
        };
        let premises_marked = premises_of(self.calculus, &marked_right, &right.rule)
            .map_err(|e| CutElimError::Internal(format!("marked premises: {e}")))?;
        let mut children = Vec::with_capacity(right.children.len());
        for (pm_seq, ch) in premises_marked.iter().zip(&right.children) {
            match find_item(pm_seq, &marker()) {
                Some(child_occ) => children.push(self.elim(left, ch, &child_occ, pm)?),
                None => children.push(ch.clone()),
            }
        }
        self.rebuild(right.rule.rule, goal.clone(), children)
    }

    /// Case 2: both lowermost rules introduce the cut formula.
    fn principal(
        &mut self,
        left: &Derivation,
        right: &Derivation,
        occ: &Occ,
        measure: (usize, usize),
    ) -> Result<Derivation, CutElimError> {
        use RuleId::*;
        let pm = Some(measure);
        match (&left.sequent.succedent, left.rule.rule, right.rule.rule) {
            (Formula::LDiv(..), LDivR, LDivL) | (Formula::RDiv(..), RDivR, RDivL) => {
                self.log("principal-div", measure);
                // left child: argument extended premise; right children:
                // [argument derivation, context with the result formula].
                let l0 = &left.children[0];
                let arg = &right.children[0];
                let ctx = &right.children[1];
                let span = right.rule.params.span.ok_or_else(|| {
                    CutElimError::Internal("division without span".into())
                })?;
                let res_pos = span.0.min(occ.1);
                let inner_occ = (right.rule.params.zone.clone(), res_pos);
                let inner = self.elim(l0, ctx, &inner_occ, pm)?;
                // The argument formula sits at the edge of the spliced-in
                // left antecedent: front for `\R`, back for `/R`.
                let arg_pos = match left.rule.rule {
                    LDivR => res_pos,
                    _ => res_pos + l0.sequent.antecedent.items.len() - 1,
                };
                self.elim(arg, &inner, &(right.rule.params.zone.clone(), arg_pos), pm)
            }
            (Formula::Prod(..), ProdR, ProdL) => {
                self.log("principal-prod", measure);
                let l1 = &left.children[0];
                let l2 = &left.children[1];
                let r0 = &right.children[0];
                let k = right.rule.params.index.unwrap_or(occ.1);
                let inner = self.elim(l2, r0, &(occ.0.clone(), k + 1), pm)?;
                self.elim(l1, &inner, &(occ.0.clone(), k), pm)
            }
            (Formula::Unit, UnitR, UnitL) => {
                self.log("principal-unit", measure);
                Ok(right.children[0].clone())
            }
            (Formula::Disj(..), DisjR1 | DisjR2, DisjL) => {
                self.log("principal-disj", measure);
                let side = usize::from(left.rule.rule == DisjR2);
                self.elim(&left.children[0], &right.children[side], occ, pm)
            }
            (Formula::Conj(..), ConjR, ConjL1 | ConjL2) => {
                self.log("principal-conj", measure);
                let side = usize::from(right.rule.rule == ConjL2);
                self.elim(&left.children[side], &right.children[0], occ, pm)
            }
            (Formula::Dia(..), DiaR, DiaL) => {
                self.log("principal-dia", measure);
                let mut inner_occ = occ.0.clone();
                inner_occ.push(occ.1);
                self.elim(&left.children[0], &right.children[0], &(inner_occ, 0), pm)
            }
            (Formula::Box(..), BoxR, BoxL) => {
                self.log("principal-box", measure);
                // occ addresses the []A inside the bracket; the premise has
                // the bare A at the bracket's own position.
                let zone = occ.0[..occ.0.len() - 1].to_vec();
                let k = *occ.0.last().unwrap();
                self.elim(&left.children[0], &right.children[0], &(zone, k), pm)
            }
            (f, l, r) => Err(CutElimError::Internal(format!(
                "unexpected principal pair {l}/{r} on `{f}`"
            ))),
        }
    }

    /// Case 1: trace the marked stoup occurrences of `A'` upward; `!P`
    /// applications that move a marked occurrence become cuts on `A'`
    /// against `promoted` (`ξ; Λ => A'`).
    fn deep(
        &mut self,
        d: &Derivation,
        marked: &Sequent,
        promoted: &Derivation,
        pm: Option<(usize, usize)>,
    ) -> Result<Derivation, CutElimError> {
        let xi = promoted.sequent.antecedent.stoup.members.clone();
        if !stoup_has_marker(marked) {
            return Ok(d.clone());
        }
        // An endpoint: this !P moves a marked stoup member out as an item.
        if d.rule.rule == RuleId::BangP {
            let zone = &d.rule.params.zone;
            let sigma = d.rule.params.stoup_index.unwrap_or(0);
            let landing = d.rule.params.split.unwrap_or(0);
            let is_marked = marked
                .antecedent
                .zone(zone)
                .ok()
                .and_then(|z| z.stoup.members.get(sigma))
                .is_some_and(|m| *m == marker());
            if is_marked {
                self.log("deep-endpoint", pm.unwrap_or((0, 0)));
                let child_marked = premises_of(self.calculus, marked, &d.rule)
                    .map_err(|e| CutElimError::Internal(format!("trace endpoint: {e}")))?
                    .pop()
                    .unwrap();
                // the landed marker item is really A'
                let fixed = {
                    let ante = child_marked
                        .antecedent
                        .with_zone(zone, &mut |z| {
                            let mut items = z.items.clone();
                            items[landing] =
                                TreeTerm::Leaf(promoted.sequent.succedent.clone());
                            MetaFormula::new(z.stoup.clone(), items)
                        })
                        .map_err(|e| CutElimError::Internal(e.to_string()))?;
                    Sequent::new(ante, child_marked.succedent.clone())
                };
                let sub = self.deep(&d.children[0], &fixed, promoted, pm)?;
                return self.elim(promoted, &sub, &(zone.clone(), landing), pm);
            }
        }
        // Otherwise the trace continues into the premises (branching at a
        // contraction of the marked member).
        let premises_marked = premises_of(self.calculus, marked, &d.rule)
            .map_err(|e| CutElimError::Internal(format!("trace step {}: {e}", d.rule.rule)))?;
        let mut children = Vec::with_capacity(d.children.len());
        for (pm_seq, ch) in premises_marked.iter().zip(&d.children) {
            children.push(self.deep(ch, pm_seq, promoted, pm)?);
        }
        let concl = realize(marked, &xi);
        self.rebuild(d.rule.rule, concl, children)
    }
}

/// Plant the marker at stoup position `index` of the zone at `path`.
fn mark_stoup(s: &Sequent, path: &[usize], index: usize) -> Result<Sequent, CutElimError> {
    let ante = s
        .antecedent
        .with_zone(path, &mut |z| {
            let mut stoup = z.stoup.clone();
            stoup.members[index] = marker();
            MetaFormula::new(stoup, z.items.clone())
        })
        .map_err(|e| CutElimError::Internal(e.to_string()))?;
    Ok(Sequent::new(ante, s.succedent.clone()))
}

fn supported(c: &CalculusId) -> bool {
    c.features.has_stoups
        && matches!(
            c.features.bang,
            Some(BangProfile::Primed2018) | Some(BangProfile::Primed2015)
        )
}

fn find_innermost_cut(d: &Derivation, path: &mut Vec<usize>) -> Option<Vec<usize>> {
    for (i, ch) in d.children.iter().enumerate() {
        path.push(i);
        if let Some(found) = find_innermost_cut(ch, path) {
            return Some(found);
        }
        path.pop();
    }
    if d.rule.rule == RuleId::Cut {
        Some(path.clone())
    } else {
        None
    }
}

fn subtree<'a>(d: &'a Derivation, path: &[usize]) -> &'a Derivation {
    path.iter().fold(d, |n, &i| &n.children[i])
}

fn replace_subtree(d: &Derivation, path: &[usize], new: Derivation) -> Derivation {
    match path.split_first() {
        None => new,
        Some((&i, rest)) => {
            let mut out = d.clone();
            out.children[i] = replace_subtree(&d.children[i], rest, new);
            out
        }
    }
}

/// Eliminate the topmost cut (one whose premises are cut-free), returning a
/// cut-free derivation of the same conclusion.
pub fn eliminate_topmost_cut(
    c: &CalculusId,
    node: &Derivation,
) -> Result<(Derivation, Vec<Step>), CutElimError> {
    if node.rule.rule != RuleId::Cut
        || node.children.iter().any(|ch| ch.cut_count() > 0)
    {
        return Err(CutElimError::Internal(
            "expected a cut node with cut-free premises".into(),
        ));
    }
    let mut cut_free = c.clone();
    cut_free.features.cut_enabled = false;
    let span = node.rule.params.span.ok_or_else(|| {
        CutElimError::Internal("cut without a span".into())
    })?;
    let occ = (node.rule.params.zone.clone(), span.0);
    let mut engine = Eliminator { calculus: &cut_free, log: Vec::new() };
    let out = engine.elim(&node.children[0], &node.children[1], &occ, None)?;
    Ok((out, engine.log))
}

/// Eliminate every cut, innermost first. The result proves the same
/// end-sequent and checks in the calculus without cut.
pub fn eliminate_cuts(c: &CalculusId, d: &Derivation) -> Result<(Derivation, Vec<Step>), CutElimError> {
    if !supported(c) {
        return Err(CutElimError::Unsupported(c.name.clone()));
    }
    let with_cut = c.with_cut();
    check(&with_cut, d).map_err(|e| CutElimError::BadInput(e.to_string()))?;
    let mut current = d.clone();
    let mut log = Vec::new();
    while let Some(path) = find_innermost_cut(&current, &mut Vec::new()) {
        let node = subtree(&current, &path);
        let (replacement, steps) = eliminate_topmost_cut(c, node)?;
        log.extend(steps);
        current = replace_subtree(&current, &path, replacement);
    }
    Ok((current, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ax, by_rule};

    /// The `!p, q => q*!p` cut derivation transcribed into a primed system:
    /// the promotion of `!p => !!p` uses the primed `!R'` through the stoup.
    fn primed_cut_example(name: &str) -> (CalculusId, Derivation) {
        let c = CalculusId::by_name(&format!("{name}+cut")).unwrap();
        let lp0 = ax("p => p");
        let lp1 = by_rule(&c, RuleId::BangP, "{p}; => p", vec![lp0]);
        let lp2 = by_rule(&c, RuleId::BangR, "{p}; => !p", vec![lp1]);
        let lp3 = by_rule(&c, RuleId::BangR, "{p}; => !!p", vec![lp2]);
        let left = by_rule(&c, RuleId::BangL, "!p => !!p", vec![lp3]);
        let r0 = by_rule(&c, RuleId::ProdR, "q, !p => q*!p", vec![ax("q => q"), ax("!p => !p")]);
        let r1 = by_rule(&c, RuleId::BangP, "{!p}; q => q*!p", vec![r0]);
        let r2 = by_rule(&c, RuleId::BangL, "!!p, q => q*!p", vec![r1]);
        let root = by_rule(&c, RuleId::Cut, "!p, q => q*!p", vec![left, r2]);
        (c, root)
    }

    #[test]
    fn eliminates_the_primed_2018_cut_example() {
        let (_, d) = primed_cut_example("b2018st-prime");
        let base = CalculusId::by_name("b2018st-prime").unwrap();
        let (out, log) = eliminate_cuts(&base, &d).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, d.sequent);
        check(&base, &out).unwrap();
        assert!(!log.is_empty());
    }

    #[test]
    fn eliminates_the_primed_2015_cut_example() {
        let (_, d) = primed_cut_example("b2015st-prime");
        let base = CalculusId::by_name("b2015st-prime").unwrap();
        let (out, _) = eliminate_cuts(&base, &d).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, d.sequent);
        check(&base, &out).unwrap();
    }

    #[test]
    fn axiom_cut_is_spliced_out() {
        let c = CalculusId::by_name("b2018st-prime+cut").unwrap();
        let base = CalculusId::by_name("b2018st-prime").unwrap();
        let left = ax("p => p");
        let right = by_rule(
            &c,
            RuleId::RDivL,
            "p/p, p => p",
            vec![ax("p => p"), ax("p => p")],
        );
        let cut = by_rule(&c, RuleId::Cut, "p/p, p => p", vec![right.clone(), ax("p => p")]);
        let (out, _) = eliminate_cuts(&base, &cut).unwrap();
        assert_eq!(out, right);
        let _ = left;
    }

    #[test]
    fn unit_cut_removes_the_detour() {
        let c = CalculusId::by_name("b2018st-prime+cut").unwrap();
        let base = CalculusId::by_name("b2018st-prime").unwrap();
        let unit = Derivation::leaf(
            crate::parse::parse_sequent("=> 1").unwrap(),
            RuleId::UnitR,
        );
        let inner = ax("p => p");
        let right = by_rule(&c, RuleId::UnitL, "1, p => p", vec![inner.clone()]);
        let cut = by_rule(&c, RuleId::Cut, "p => p", vec![unit, right]);
        let (out, _) = eliminate_cuts(&base, &cut).unwrap();
        assert_eq!(out, inner);
    }

    #[test]
    fn deep_step_introduces_one_cut_per_traced_endpoint() {
        let (_, d) = primed_cut_example("b2018st-prime");
        let base = CalculusId::by_name("b2018st-prime").unwrap();
        let (_, log) = eliminate_cuts(&base, &d).unwrap();
        let deep = log.iter().filter(|s| s.case == "deep").count();
        let endpoints = log.iter().filter(|s| s.case == "deep-endpoint").count();
        // the promoted formula is parked in the stoup by one !P only
        assert_eq!(deep, endpoints);
        assert!(endpoints >= 1);
    }

    #[test]
    fn principal_division_cuts() {
        let c = CalculusId::by_name("b2018st-prime+cut").unwrap();
        let base = CalculusId::by_name("b2018st-prime").unwrap();
        // cut on p\(p*q), principal \R against \L
        let l0 = by_rule(&c, RuleId::ProdR, "p, q => p*q", vec![ax("p => p"), ax("q => q")]);
        let left = by_rule(&c, RuleId::LDivR, "q => p\\(p*q)", vec![l0]);
        let r_ctx = by_rule(
            &c,
            RuleId::RDivL,
            "x/(p*q), p*q => x",
            vec![ax("p*q => p*q"), ax("x => x")],
        );
        let right = by_rule(
            &c,
            RuleId::LDivL,
            "x/(p*q), p, p\\(p*q) => x",
            vec![ax("p => p"), r_ctx],
        );
        let cut = by_rule(&c, RuleId::Cut, "x/(p*q), p, q => x", vec![left, right]);
        let (out, _) = eliminate_cuts(&base, &cut).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, cut.sequent);
        check(&base, &out).unwrap();

        // cut on (p*q)/p, principal /R against /L
        let l0 = by_rule(&c, RuleId::ProdR, "q, p => q*p", vec![ax("q => q"), ax("p => p")]);
        let left = by_rule(&c, RuleId::RDivR, "q => (q*p)/p", vec![l0]);
        let r_ctx = by_rule(
            &c,
            RuleId::RDivL,
            "x/(q*p), q*p => x",
            vec![ax("q*p => q*p"), ax("x => x")],
        );
        let right = by_rule(
            &c,
            RuleId::RDivL,
            "x/(q*p), (q*p)/p, p => x",
            vec![ax("p => p"), r_ctx],
        );
        let cut = by_rule(&c, RuleId::Cut, "x/(q*p), q, p => x", vec![left, right]);
        let (out, _) = eliminate_cuts(&base, &cut).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, cut.sequent);
        check(&base, &out).unwrap();
    }

    #[test]
    fn rejects_unprimed_systems() {
        let d = crate::fixtures::cut2018();
        let c = CalculusId::by_name("b2018st").unwrap();
        assert!(matches!(
            eliminate_cuts(&c, &d),
            Err(CutElimError::Unsupported(_))
        ));
    }

    #[test]
    fn eliminates_enstoup_cuts_on_fig2() {
        let src = crate::fixtures::fig2_calculus();
        let d = crate::fixtures::fig2();
        let (no_stoup, flat) = crate::project::destoup_derivation(&src, &d).unwrap();
        let (primed_cut, stouped) =
            crate::project::enstoup_derivation(&no_stoup, &flat).unwrap();
        let mut base = primed_cut.clone();
        base.features.cut_enabled = false;
        base.name = "b2018st-prime".into();
        let (out, log) = eliminate_cuts(&base, &stouped).unwrap();
        assert_eq!(out.cut_count(), 0);
        assert_eq!(out.sequent, d.sequent);
        check(&base, &out).unwrap();
        assert!(log.iter().any(|s| s.case == "deep"));
    }
}
