//! Rule applications: forward expansion (`premises_of`) and complete backward
//! enumeration (`enumerate_backward`).
//!
//! A `RuleApp` pins down every choice a rule schema leaves open (acting zone,
//! item positions, context splits, stoup bipartitions), so the premises are a
//! function of the conclusion and the application.

use crate::calculus::{BangProfile, CalculusId, RuleId};
use crate::formula::Formula;
use crate::sequent::{lambek_restriction_holds, MetaFormula, Sequent, Stoup, TreeTerm};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Path to the acting zone; `[]` is the whole antecedent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zone: Vec<usize>,
    /// Active item position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// `(start, len)` of the side context `Γ`/`Π` or of a `!`-item block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
    /// A designated stoup member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stoup_index: Option<usize>,
    /// Stoup members routed to the left premise (or contracted, or cut away).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stoup_sel: Option<Vec<usize>>,
    /// Second stoup selection (`ζ'` of the primed 2015 contraction).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stoup_sel2: Option<Vec<usize>>,
    /// A split or landing position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<usize>,
    /// A second split position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split2: Option<usize>,
    /// Premise boundaries of a B'-rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<Vec<usize>>,
    /// Which attached B-rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_index: Option<usize>,
    /// The formula cut away.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_formula: Option<Formula>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleApp {
    pub rule: RuleId,
    pub params: RuleParams,
}

impl RuleApp {
    pub fn new(rule: RuleId) -> RuleApp {
        RuleApp { rule, params: RuleParams::default() }
    }
    pub fn with(rule: RuleId, params: RuleParams) -> RuleApp {
        RuleApp { rule, params }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule {0} is not part of this calculus")]
    NotInCalculus(RuleId),
    #[error("parameter mismatch: {0}")]
    Params(String),
    #[error("side condition violated: {0}")]
    SideCondition(String),
}

type RResult<T> = Result<T, RuleError>;

fn params_err<T>(msg: impl Into<String>) -> RResult<T> {
    Err(RuleError::Params(msg.into()))
}

fn side_err<T>(msg: impl Into<String>) -> RResult<T> {
    Err(RuleError::SideCondition(msg.into()))
}

/// Functional edit of the zone at `steps`.
fn zone_edit(
    s: &Sequent,
    steps: &[usize],
    f: impl FnOnce(&MetaFormula) -> RResult<MetaFormula>,
) -> RResult<Sequent> {
    fn go(
        m: &MetaFormula,
        steps: &[usize],
        f: Box<dyn FnOnce(&MetaFormula) -> RResult<MetaFormula> + '_>,
    ) -> RResult<MetaFormula> {
        match steps.split_first() {
            None => f(m),
            Some((&i, rest)) => match m.items.get(i) {
                Some(TreeTerm::Bracketed(inner)) => {
                    let mut out = m.clone();
                    out.items[i] = TreeTerm::Bracketed(go(inner, rest, f)?);
                    Ok(out)
                }
                _ => params_err("zone path does not select a bracketed item"),
            },
        }
    }
    Ok(Sequent::new(go(&s.antecedent, steps, Box::new(f))?, s.succedent.clone()))
}

fn checked_sel<'a>(sel: &'a Option<Vec<usize>>, stoup: &Stoup) -> RResult<&'a [usize]> {
    let sel = sel.as_deref().unwrap_or(&[]);
    let strictly_increasing = sel.windows(2).all(|w| w[0] < w[1]);
    if !strictly_increasing || sel.iter().any(|&i| i >= stoup.len()) {
        return params_err("stoup selection out of range");
    }
    Ok(sel)
}

fn splice(items: &[TreeTerm], start: usize, len: usize, mid: Vec<TreeTerm>) -> Vec<TreeTerm> {
    let mut out = Vec::with_capacity(items.len() - len + mid.len());
    out.extend_from_slice(&items[..start]);
    out.extend(mid);
    out.extend_from_slice(&items[start + len..]);
    out
}

fn leaf_at<'a>(zone: &'a MetaFormula, k: usize) -> RResult<&'a Formula> {
    zone.items
        .get(k)
        .and_then(TreeTerm::as_leaf)
        .ok_or_else(|| RuleError::Params(format!("no formula item at position {k}")))
}

/// The inner meta-formula of a double-bracketed island `[[ ... ]]` at `k`.
/// The outer layer must carry no stoup.
fn double_bracket_at<'a>(zone: &'a MetaFormula, k: usize) -> RResult<&'a MetaFormula> {
    let outer = zone
        .items
        .get(k)
        .and_then(TreeTerm::as_bracket)
        .ok_or_else(|| RuleError::Params(format!("no island at position {k}")))?;
    if !outer.stoup.is_empty() || outer.items.len() != 1 {
        return params_err("island is not double-bracketed");
    }
    outer.items[0]
        .as_bracket()
        .ok_or_else(|| RuleError::Params("island is not double-bracketed".into()))
}

/// The premises determined by applying `app` to `conclusion` in `c`.
pub fn premises_of(c: &CalculusId, conclusion: &Sequent, app: &RuleApp) -> RResult<Vec<Sequent>> {
    if !c.has_rule(app.rule) {
        return Err(RuleError::NotInCalculus(app.rule));
    }
    let premises = premises_unrestricted(c, conclusion, app)?;
    if c.features.lambek_restricted {
        if let Some(bad) = premises.iter().find(|p| !lambek_restriction_holds(p)) {
            return side_err(format!("premise `{bad}` violates Lambek's restriction"));
        }
    }
    Ok(premises)
}

fn premises_unrestricted(
    c: &CalculusId,
    concl: &Sequent,
    app: &RuleApp,
) -> RResult<Vec<Sequent>> {
    use RuleId::*;
    let p = &app.params;
    let root = &concl.antecedent;
    let succ = &concl.succedent;
    let require_root = || -> RResult<()> {
        if p.zone.is_empty() {
            Ok(())
        } else {
            params_err("rule acts on the whole antecedent")
        }
    };

    match app.rule {
        Id => {
            require_root()?;
            if root.stoup.is_empty() && root.items.len() == 1 {
                if let TreeTerm::Leaf(a) = &root.items[0] {
                    if a == succ {
                        return Ok(vec![]);
                    }
                }
            }
            params_err("axiom requires A => A")
        }
        UnitR => {
            require_root()?;
            if !root.is_nonempty() && *succ == Formula::Unit {
                Ok(vec![])
            } else {
                params_err("axiom requires => 1")
            }
        }
        LDivR => {
            require_root()?;
            let Formula::LDiv(a, b) = succ else {
                return params_err("succedent is not a left division");
            };
            if c.features.lambek_restricted && !root.is_nonempty() {
                return side_err("\\R needs a non-empty antecedent");
            }
            let mut items = vec![TreeTerm::Leaf((**a).clone())];
            items.extend(root.items.iter().cloned());
            Ok(vec![Sequent::new(MetaFormula::new(root.stoup.clone(), items), (**b).clone())])
        }
        RDivR => {
            require_root()?;
            let Formula::RDiv(b, a) = succ else {
                return params_err("succedent is not a right division");
            };
            if c.features.lambek_restricted && !root.is_nonempty() {
                return side_err("/R needs a non-empty antecedent");
            }
            let mut items = root.items.clone();
            items.push(TreeTerm::Leaf((**a).clone()));
            Ok(vec![Sequent::new(MetaFormula::new(root.stoup.clone(), items), (**b).clone())])
        }
        ConjR => {
            require_root()?;
            let Formula::Conj(a1, a2) = succ else {
                return params_err("succedent is not a conjunction");
            };
            Ok(vec![
                Sequent::new(root.clone(), (**a1).clone()),
                Sequent::new(root.clone(), (**a2).clone()),
            ])
        }
        DisjR1 | DisjR2 => {
            require_root()?;
            let Formula::Disj(a1, a2) = succ else {
                return params_err("succedent is not a disjunction");
            };
            let chosen = if app.rule == DisjR1 { a1 } else { a2 };
            Ok(vec![Sequent::new(root.clone(), (**chosen).clone())])
        }
        DiaR => {
            require_root()?;
            let Formula::Dia(a) = succ else {
                return params_err("succedent is not <>A");
            };
            if root.stoup.is_empty() && root.items.len() == 1 {
                if let TreeTerm::Bracketed(inner) = &root.items[0] {
                    return Ok(vec![Sequent::new(inner.clone(), (**a).clone())]);
                }
            }
            params_err("<>R requires the antecedent [Xi]")
        }
        BoxR => {
            require_root()?;
            let Formula::Box(a) = succ else {
                return params_err("succedent is not []A");
            };
            Ok(vec![Sequent::new(
                MetaFormula::of_items(vec![TreeTerm::Bracketed(root.clone())]),
                (**a).clone(),
            )])
        }
        BangR => {
            require_root()?;
            let Formula::Bang(b) = succ else {
                return params_err("succedent is not !B");
            };
            bang_right_shape(c, root)?;
            Ok(vec![Sequent::new(root.clone(), (**b).clone())])
        }
        ProdR => {
            require_root()?;
            let Formula::Prod(a, b) = succ else {
                return params_err("succedent is not a product");
            };
            let m = p.split.ok_or_else(|| RuleError::Params("*R needs a split".into()))?;
            if m > root.items.len() {
                return params_err("*R split out of range");
            }
            let sel = checked_sel(&p.stoup_sel, &root.stoup)?;
            let left_stoup = Stoup::from(root.stoup.select(sel).unwrap());
            let right_stoup = root.stoup.without(sel);
            Ok(vec![
                Sequent::new(
                    MetaFormula::new(left_stoup, root.items[..m].to_vec()),
                    (**a).clone(),
                ),
                Sequent::new(
                    MetaFormula::new(right_stoup, root.items[m..].to_vec()),
                    (**b).clone(),
                ),
            ])
        }
        LDivL | RDivL => {
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let (start, len) =
                p.span.ok_or_else(|| RuleError::Params("division rule needs a span".into()))?;
            if start + len > zone.items.len() {
                return params_err("span out of range");
            }
            // \L: Γ sits immediately left of the active item; /L: to its right.
            let k = if app.rule == LDivL {
                start + len
            } else {
                if start == 0 {
                    return params_err("/L has the active item before the span");
                }
                start - 1
            };
            let (arg, res) = match (app.rule, leaf_at(zone, k)?) {
                (LDivL, Formula::LDiv(a, cc)) => ((**a).clone(), (**cc).clone()),
                (RDivL, Formula::RDiv(cc, a)) => ((**a).clone(), (**cc).clone()),
                _ => return params_err("active item is not the right division"),
            };
            let sel = checked_sel(&p.stoup_sel, &zone.stoup)?;
            let left_stoup = Stoup::from(zone.stoup.select(sel).unwrap());
            let gamma = zone.items[start..start + len].to_vec();
            let left = Sequent::new(MetaFormula::new(left_stoup, gamma), arg);
            let lo = start.min(k);
            let right = zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(
                    z.stoup.without(sel),
                    splice(&z.items, lo, len + 1, vec![TreeTerm::Leaf(res.clone())]),
                ))
            })?;
            Ok(vec![left, right])
        }
        ProdL => {
            let k = p.index.ok_or_else(|| RuleError::Params("*L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Prod(a, b) = leaf_at(zone, k)? else {
                return params_err("active item is not a product");
            };
            let (a, b) = ((**a).clone(), (**b).clone());
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(
                    z.stoup.clone(),
                    splice(&z.items, k, 1, vec![TreeTerm::Leaf(a), TreeTerm::Leaf(b)]),
                ))
            })?])
        }
        UnitL => {
            let k = p.index.ok_or_else(|| RuleError::Params("1L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            if *leaf_at(zone, k)? != Formula::Unit {
                return params_err("active item is not 1");
            }
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(z.stoup.clone(), splice(&z.items, k, 1, vec![])))
            })?])
        }
        ConjL1 | ConjL2 => {
            let k = p.index.ok_or_else(|| RuleError::Params("&L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Conj(a1, a2) = leaf_at(zone, k)? else {
                return params_err("active item is not a conjunction");
            };
            let chosen = if app.rule == ConjL1 { (**a1).clone() } else { (**a2).clone() };
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(
                    z.stoup.clone(),
                    splice(&z.items, k, 1, vec![TreeTerm::Leaf(chosen)]),
                ))
            })?])
        }
        DisjL => {
            let k = p.index.ok_or_else(|| RuleError::Params("|L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Disj(a1, a2) = leaf_at(zone, k)? else {
                return params_err("active item is not a disjunction");
            };
            let (a1, a2) = ((**a1).clone(), (**a2).clone());
            let mk = |f: Formula| {
                zone_edit(concl, &p.zone, |z| {
                    Ok(MetaFormula::new(
                        z.stoup.clone(),
                        splice(&z.items, k, 1, vec![TreeTerm::Leaf(f)]),
                    ))
                })
            };
            Ok(vec![mk(a1)?, mk(a2)?])
        }
        DiaL => {
            let k = p.index.ok_or_else(|| RuleError::Params("<>L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Dia(a) = leaf_at(zone, k)? else {
                return params_err("active item is not <>A");
            };
            let bracket =
                TreeTerm::Bracketed(MetaFormula::of_items(vec![TreeTerm::Leaf((**a).clone())]));
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(z.stoup.clone(), splice(&z.items, k, 1, vec![bracket])))
            })?])
        }
        BoxL => {
            let k = p.index.ok_or_else(|| RuleError::Params("[]L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let inner = zone
                .items
                .get(k)
                .and_then(TreeTerm::as_bracket)
                .ok_or_else(|| RuleError::Params("active item is not a bracket".into()))?;
            if !inner.stoup.is_empty() || inner.items.len() != 1 {
                return params_err("[]L requires the island [ []A ]");
            }
            let Some(Formula::Box(a)) = inner.items[0].as_leaf() else {
                return params_err("[]L requires the island [ []A ]");
            };
            let a = (**a).clone();
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(
                    z.stoup.clone(),
                    splice(&z.items, k, 1, vec![TreeTerm::Leaf(a)]),
                ))
            })?])
        }
        BangL => {
            let k = p.index.ok_or_else(|| RuleError::Params("!L needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Bang(a) = leaf_at(zone, k)? else {
                return params_err("active item is not !A");
            };
            let a = (**a).clone();
            if c.features.has_stoups {
                Ok(vec![zone_edit(concl, &p.zone, |z| {
                    let mut stoup = z.stoup.clone();
                    stoup.members.push(a);
                    Ok(MetaFormula::new(stoup, splice(&z.items, k, 1, vec![])))
                })?])
            } else {
                Ok(vec![zone_edit(concl, &p.zone, |z| {
                    Ok(MetaFormula::new(
                        z.stoup.clone(),
                        splice(&z.items, k, 1, vec![TreeTerm::Leaf(a)]),
                    ))
                })?])
            }
        }
        BangP => {
            let sigma =
                p.stoup_index.ok_or_else(|| RuleError::Params("!P needs a stoup index".into()))?;
            let m = p.split.ok_or_else(|| RuleError::Params("!P needs a landing split".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Some(a) = zone.stoup.members.get(sigma).cloned() else {
                return params_err("stoup index out of range");
            };
            if m > zone.items.len() {
                return params_err("landing split out of range");
            }
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                items.insert(m, TreeTerm::Leaf(a.clone()));
                Ok(MetaFormula::new(z.stoup.without(&[sigma]), items))
            })?])
        }
        BangP1 | BangP2 => {
            let k = p.index.ok_or_else(|| RuleError::Params("!P needs an index".into()))?;
            let j = p.split.ok_or_else(|| RuleError::Params("!P needs a target".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Bang(_) = leaf_at(zone, k)? else {
                return params_err("only !-formulae may move");
            };
            if app.rule == BangP1 && j >= k {
                return side_err("!P1 moves the formula left in the premise");
            }
            if app.rule == BangP2 && (j <= k || j >= zone.items.len()) {
                return side_err("!P2 moves the formula right in the premise");
            }
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                let item = items.remove(k);
                items.insert(j, item);
                Ok(MetaFormula::new(z.stoup.clone(), items))
            })?])
        }
        BangW => {
            let k = p.index.ok_or_else(|| RuleError::Params("!W needs an index".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let Formula::Bang(_) = leaf_at(zone, k)? else {
                return params_err("only !-formulae weaken");
            };
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(z.stoup.clone(), splice(&z.items, k, 1, vec![])))
            })?])
        }
        BangNC1 | BangNC2 => {
            let k = p.index.ok_or_else(|| RuleError::Params("!NC needs an index".into()))?;
            let m = p.split.ok_or_else(|| RuleError::Params("!NC needs a split".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            let bang = match leaf_at(zone, k)? {
                f @ Formula::Bang(_) => f.clone(),
                _ => return params_err("only !-formulae contract"),
            };
            if app.rule == BangNC1 && m >= k {
                return side_err("!NC1 inserts the copy strictly left");
            }
            if app.rule == BangNC2 && (m <= k + 1 || m > zone.items.len()) {
                return side_err("!NC2 inserts the copy strictly right");
            }
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                items.insert(m, TreeTerm::Leaf(bang.clone()));
                Ok(MetaFormula::new(z.stoup.clone(), items))
            })?])
        }
        BangC => contraction_premises(c, concl, app),
        Cut => {
            let (start, len) =
                p.span.ok_or_else(|| RuleError::Params("cut needs a span".into()))?;
            let a = p
                .cut_formula
                .clone()
                .ok_or_else(|| RuleError::Params("cut needs its formula".into()))?;
            let zone = root.zone(&p.zone).map_err(|e| RuleError::Params(e.to_string()))?;
            if start + len > zone.items.len() {
                return params_err("cut span out of range");
            }
            let sel = checked_sel(&p.stoup_sel, &zone.stoup)?;
            let xi = Stoup::from(zone.stoup.select(sel).unwrap());
            let left =
                Sequent::new(MetaFormula::new(xi, zone.items[start..start + len].to_vec()), a.clone());
            let right = zone_edit(concl, &p.zone, |z| {
                Ok(MetaFormula::new(
                    z.stoup.without(sel),
                    splice(&z.items, start, len, vec![TreeTerm::Leaf(a.clone())]),
                ))
            })?;
            Ok(vec![left, right])
        }
        B | BPrime => b_rule_premises(c, concl, app),
    }
}

/// Validate the `!R` conclusion antecedent per profile.
fn bang_right_shape(c: &CalculusId, root: &MetaFormula) -> RResult<()> {
    let all_bang = || root.items.iter().all(TreeTerm::is_bang_leaf);
    match (c.features.bang, c.features.has_stoups) {
        (Some(BangProfile::FullExponential | BangProfile::Relevant), _) => {
            if root.stoup.is_empty() && all_bang() {
                Ok(())
            } else {
                params_err("!R requires !A1, ..., !An => !B")
            }
        }
        (Some(BangProfile::Morrill2015), false) => {
            if root.stoup.is_empty() && all_bang() && !root.items.is_empty() {
                Ok(())
            } else {
                side_err("!R requires !A1, ..., !An (n >= 1) => !B")
            }
        }
        (Some(BangProfile::Morrill2018), false) => {
            if root.stoup.is_empty() && root.items.len() == 1 && all_bang() {
                Ok(())
            } else {
                params_err("!R requires !A => !B")
            }
        }
        (Some(BangProfile::Morrill2015), true) => {
            if root.items.is_empty() {
                Ok(())
            } else {
                params_err("!R requires an item-free antecedent")
            }
        }
        (Some(BangProfile::Morrill2018), true) => {
            if root.stoup.is_empty() && root.items.len() == 1 && all_bang() {
                Ok(())
            } else {
                params_err("!R requires !A => !B")
            }
        }
        (Some(BangProfile::Primed2015), true) => {
            if !root.items.is_empty() {
                params_err("!R' requires an item-free antecedent")
            } else if root.stoup.is_empty() {
                side_err("!R' requires a non-empty stoup")
            } else {
                Ok(())
            }
        }
        (Some(BangProfile::Primed2018), true) => {
            if root.items.is_empty() && root.stoup.len() == 1 {
                Ok(())
            } else {
                params_err("!R' requires a singleton stoup and no items")
            }
        }
        _ => params_err("no !R in this calculus"),
    }
}

fn contraction_premises(c: &CalculusId, concl: &Sequent, app: &RuleApp) -> RResult<Vec<Sequent>> {
    let p = &app.params;
    let zone = concl
        .antecedent
        .zone(&p.zone)
        .map_err(|e| RuleError::Params(e.to_string()))?;
    match (c.features.bang, c.features.has_stoups) {
        // Plain contraction: duplicate the !-item in place.
        (Some(BangProfile::FullExponential | BangProfile::Relevant), _) => {
            let k = p.index.ok_or_else(|| RuleError::Params("!C needs an index".into()))?;
            let bang = match leaf_at(zone, k)? {
                f @ Formula::Bang(_) => f.clone(),
                _ => return params_err("only !-formulae contract"),
            };
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                items.insert(k, TreeTerm::Leaf(bang.clone()));
                Ok(MetaFormula::new(z.stoup.clone(), items))
            })?])
        }
        // 2015 without stoups: a block of !-items is copied into a fresh island.
        (Some(BangProfile::Morrill2015), false) => {
            let (start, n) =
                p.span.ok_or_else(|| RuleError::Params("!C needs the !-block span".into()))?;
            let i = p.split.ok_or_else(|| RuleError::Params("!C needs island start".into()))?;
            let j = p.split2.ok_or_else(|| RuleError::Params("!C needs island end".into()))?;
            if n == 0 {
                return side_err("!C contracts at least one formula");
            }
            if start + n > zone.items.len() || i < start + n || j < i || j > zone.items.len() {
                return params_err("!C region out of range");
            }
            if !zone.items[start..start + n].iter().all(TreeTerm::is_bang_leaf) {
                return params_err("!C block must consist of !-formulae");
            }
            let block = zone.items[start..start + n].to_vec();
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut island_items = block.clone();
                island_items.extend_from_slice(&z.items[i..j]);
                let island = TreeTerm::Bracketed(MetaFormula::of_items(island_items));
                Ok(MetaFormula::new(z.stoup.clone(), splice(&z.items, i, j - i, vec![island])))
            })?])
        }
        // 2018 without stoups: the !-item lands in a given double-bracketed island.
        (Some(BangProfile::Morrill2018), false) => {
            let kb = p.index.ok_or_else(|| RuleError::Params("!C needs the !-item".into()))?;
            let ki = p.split.ok_or_else(|| RuleError::Params("!C needs the island".into()))?;
            let bang = match leaf_at(zone, kb)? {
                f @ Formula::Bang(_) => f.clone(),
                _ => return params_err("only !-formulae contract"),
            };
            if ki <= kb {
                return params_err("the island must follow the !-formula");
            }
            let inner = double_bracket_at(zone, ki)?;
            if !inner.stoup.is_empty() {
                return params_err("2018 !C requires a stoup-free island");
            }
            if c.features.lambek_restricted && inner.items.is_empty() {
                return side_err("!C may not target an empty island");
            }
            let mut island_items = vec![TreeTerm::Leaf(bang)];
            island_items.extend(inner.items.iter().cloned());
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                items[ki] = TreeTerm::Bracketed(MetaFormula::of_items(island_items));
                Ok(MetaFormula::new(z.stoup.clone(), items))
            })?])
        }
        // 2015 with stoups: a sub-multiset of the stoup is copied onto a fresh island.
        (Some(BangProfile::Morrill2015), true) => {
            let sel = checked_sel(&p.stoup_sel, &zone.stoup)?;
            if sel.is_empty() {
                return side_err("!C contracts at least one stoup formula");
            }
            let i = p.split.ok_or_else(|| RuleError::Params("!C needs island start".into()))?;
            let j = p.split2.ok_or_else(|| RuleError::Params("!C needs island end".into()))?;
            if i > j || j > zone.items.len() {
                return params_err("!C region out of range");
            }
            let zeta2 = Stoup::from(zone.stoup.select(sel).unwrap());
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let island = TreeTerm::Bracketed(MetaFormula::new(zeta2, z.items[i..j].to_vec()));
                Ok(MetaFormula::new(z.stoup.clone(), splice(&z.items, i, j - i, vec![island])))
            })?])
        }
        // 2018 with stoups, original or primed: one stoup formula lands in the island.
        (Some(BangProfile::Morrill2018 | BangProfile::Primed2018), true) => {
            let sigma =
                p.stoup_index.ok_or_else(|| RuleError::Params("!C needs a stoup index".into()))?;
            let ki = p.index.ok_or_else(|| RuleError::Params("!C needs the island".into()))?;
            let Some(a) = zone.stoup.members.get(sigma).cloned() else {
                return params_err("stoup index out of range");
            };
            let inner = double_bracket_at(zone, ki)?;
            if c.features.bang == Some(BangProfile::Morrill2018) && !inner.stoup.is_empty() {
                return params_err("2018 !C requires a stoup-free island");
            }
            if c.features.lambek_restricted && !inner.is_nonempty() {
                return side_err("!C' may not target an empty island");
            }
            let mut island_stoup = inner.stoup.clone();
            island_stoup.members.push(a);
            let island = TreeTerm::Bracketed(MetaFormula::new(island_stoup, inner.items.clone()));
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let mut items = z.items.clone();
                items[ki] = island;
                Ok(MetaFormula::new(z.stoup.clone(), items))
            })?])
        }
        // Primed 2015: ζ₂ is copied, ζ' moves wholly into the island.
        (Some(BangProfile::Primed2015), true) => {
            let sel2 = checked_sel(&p.stoup_sel, &zone.stoup)?.to_vec();
            let selp = checked_sel(&p.stoup_sel2, &zone.stoup)?.to_vec();
            if sel2.is_empty() {
                return side_err("!C' contracts at least one stoup formula");
            }
            if sel2.iter().any(|i| selp.contains(i)) {
                return params_err("!C' selections must be disjoint");
            }
            let i = p.split.ok_or_else(|| RuleError::Params("!C' needs island start".into()))?;
            let j = p.split2.ok_or_else(|| RuleError::Params("!C' needs island end".into()))?;
            if i > j || j > zone.items.len() {
                return params_err("!C' region out of range");
            }
            let mut island_stoup = zone.stoup.select(&selp).unwrap();
            island_stoup.extend(zone.stoup.select(&sel2).unwrap());
            Ok(vec![zone_edit(concl, &p.zone, |z| {
                let island =
                    TreeTerm::Bracketed(MetaFormula::new(Stoup::from(island_stoup), z.items[i..j].to_vec()));
                Ok(MetaFormula::new(
                    z.stoup.without(&selp),
                    splice(&z.items, i, j - i, vec![island]),
                ))
            })?])
        }
        _ => params_err("no contraction rule in this calculus"),
    }
}

fn b_rule_premises(c: &CalculusId, concl: &Sequent, app: &RuleApp) -> RResult<Vec<Sequent>> {
    let p = &app.params;
    let Some((rules, primed)) = &c.features.b_rules else {
        return params_err("no B-rules attached");
    };
    if (app.rule == RuleId::BPrime) != *primed {
        return Err(RuleError::NotInCalculus(app.rule));
    }
    let bi = p.b_index.ok_or_else(|| RuleError::Params("which B-rule?".into()))?;
    let Some(rule) = rules.get(bi) else {
        return params_err("B-rule index out of range");
    };
    if concl.succedent != Formula::var(rule.t.clone()) {
        return params_err("succedent does not match the B-rule");
    }
    let root = &concl.antecedent;
    if !root.stoup.is_empty() {
        return params_err("B-rules act on stoup-free sequents");
    }
    let qs_items: Vec<TreeTerm> =
        rule.qs.iter().map(|q| TreeTerm::Leaf(Formula::var(q.clone()))).collect();
    if app.rule == RuleId::B {
        let k = rule.ps.len();
        if root.items.len() < k {
            return params_err("antecedent shorter than the B-rule prefix");
        }
        for (i, q) in rule.ps.iter().enumerate() {
            if root.items[i].as_leaf() != Some(&Formula::var(q.clone())) {
                return params_err("antecedent prefix does not match the B-rule");
            }
        }
        let mut items = root.items[k..].to_vec();
        items.extend(qs_items);
        Ok(vec![Sequent::new(MetaFormula::of_items(items), Formula::var(rule.r.clone()))])
    } else {
        let bounds =
            p.splits.clone().ok_or_else(|| RuleError::Params("B' needs premise bounds".into()))?;
        if bounds.len() != rule.ps.len()
            || bounds.windows(2).any(|w| w[0] > w[1])
            || bounds.last().is_some_and(|&e| e > root.items.len())
        {
            return params_err("bad B' premise bounds");
        }
        let mut premises = Vec::new();
        let mut prev = 0usize;
        for (i, &e) in bounds.iter().enumerate() {
            premises.push(Sequent::new(
                MetaFormula::of_items(root.items[prev..e].to_vec()),
                Formula::var(rule.ps[i].clone()),
            ));
            prev = e;
        }
        let mut items = root.items[prev..].to_vec();
        items.extend(qs_items);
        premises.push(Sequent::new(MetaFormula::of_items(items), Formula::var(rule.r.clone())));
        Ok(premises)
    }
}

// ---------------------------------------------------------------------------
// backward enumeration

fn subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << n);
    for bits in 0u32..(1u32 << n) {
        out.push((0..n).filter(|i| bits & (1 << i) != 0).collect());
    }
    out
}

/// All valid applications of `rule` against `goal`, with their premises.
pub fn enumerate_rule_apps(
    c: &CalculusId,
    goal: &Sequent,
    rule: RuleId,
) -> Vec<(RuleApp, Vec<Sequent>)> {
    let mut candidates: Vec<RuleParams> = Vec::new();
    let zones = goal.antecedent.zone_paths();
    let root_len = goal.antecedent.items.len();
    let root_stoup = goal.antecedent.stoup.len();
    use RuleId::*;
    match rule {
        Id | UnitR | LDivR | RDivR | ConjR | DisjR1 | DisjR2 | DiaR | BoxR | BangR => {
            candidates.push(RuleParams::default());
        }
        ProdR => {
            for m in 0..=root_len {
                for sel in subsets(root_stoup) {
                    candidates.push(RuleParams {
                        split: Some(m),
                        stoup_sel: Some(sel),
                        ..Default::default()
                    });
                }
            }
        }
        B | BPrime => {
            if let Some((rules, primed)) = &c.features.b_rules {
                for (bi, r) in rules.iter().enumerate() {
                    if *primed {
                        for bounds in nondecreasing(r.ps.len(), root_len) {
                            candidates.push(RuleParams {
                                b_index: Some(bi),
                                splits: Some(bounds),
                                ..Default::default()
                            });
                        }
                    } else {
                        candidates.push(RuleParams { b_index: Some(bi), ..Default::default() });
                    }
                }
            }
        }
        Cut => {} // backward search is cut-free
        _ => {
            for zp in &zones {
                let zone = goal.antecedent.zone(zp).unwrap();
                let len = zone.items.len();
                let ns = zone.stoup.len();
                let base = RuleParams { zone: zp.clone(), ..Default::default() };
                match rule {
                    ProdL | UnitL | ConjL1 | ConjL2 | DisjL | DiaL | BoxL | BangL | BangW => {
                        for k in 0..len {
                            candidates.push(RuleParams { index: Some(k), ..base.clone() });
                        }
                    }
                    LDivL => {
                        for k in 0..len {
                            for st in 0..=k {
                                for sel in subsets(ns) {
                                    candidates.push(RuleParams {
                                        span: Some((st, k - st)),
                                        stoup_sel: Some(sel),
                                        ..base.clone()
                                    });
                                }
                            }
                        }
                    }
                    RDivL => {
                        for k in 0..len {
                            for en in k + 1..=len {
                                for sel in subsets(ns) {
                                    candidates.push(RuleParams {
                                        span: Some((k + 1, en - k - 1)),
                                        stoup_sel: Some(sel),
                                        ..base.clone()
                                    });
                                }
                            }
                        }
                    }
                    BangP => {
                        for sigma in 0..ns {
                            for m in 0..=len {
                                candidates.push(RuleParams {
                                    stoup_index: Some(sigma),
                                    split: Some(m),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                    BangP1 => {
                        for k in 0..len {
                            for j in 0..k {
                                candidates.push(RuleParams {
                                    index: Some(k),
                                    split: Some(j),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                    BangP2 => {
                        for k in 0..len {
                            for j in k + 1..len {
                                candidates.push(RuleParams {
                                    index: Some(k),
                                    split: Some(j),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                    BangNC1 => {
                        for k in 0..len {
                            for m in 0..k {
                                candidates.push(RuleParams {
                                    index: Some(k),
                                    split: Some(m),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                    BangNC2 => {
                        for k in 0..len {
                            for m in k + 2..=len {
                                candidates.push(RuleParams {
                                    index: Some(k),
                                    split: Some(m),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                    BangC => enumerate_contraction(c, zone, &base, &mut candidates),
                    _ => {}
                }
            }
        }
    }
    let app_of = |params: RuleParams| RuleApp { rule, params };
    candidates
        .into_iter()
        .filter_map(|params| {
            let app = app_of(params);
            premises_of(c, goal, &app).ok().map(|ps| (app, ps))
        })
        .collect()
}

fn enumerate_contraction(
    c: &CalculusId,
    zone: &MetaFormula,
    base: &RuleParams,
    out: &mut Vec<RuleParams>,
) {
    let len = zone.items.len();
    let ns = zone.stoup.len();
    match (c.features.bang, c.features.has_stoups) {
        (Some(BangProfile::FullExponential | BangProfile::Relevant), _) => {
            for k in 0..len {
                out.push(RuleParams { index: Some(k), ..base.clone() });
            }
        }
        (Some(BangProfile::Morrill2015), false) => {
            for start in 0..len {
                for n in 1..=(len - start) {
                    for i in start + n..=len {
                        for j in i..=len {
                            out.push(RuleParams {
                                span: Some((start, n)),
                                split: Some(i),
                                split2: Some(j),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        (Some(BangProfile::Morrill2018), false) => {
            for kb in 0..len {
                for ki in kb + 1..len {
                    out.push(RuleParams { index: Some(kb), split: Some(ki), ..base.clone() });
                }
            }
        }
        (Some(BangProfile::Morrill2015), true) => {
            for sel in subsets(ns) {
                if sel.is_empty() {
                    continue;
                }
                for i in 0..=len {
                    for j in i..=len {
                        out.push(RuleParams {
                            stoup_sel: Some(sel.clone()),
                            split: Some(i),
                            split2: Some(j),
                            ..base.clone()
                        });
                    }
                }
            }
        }
        (Some(BangProfile::Morrill2018 | BangProfile::Primed2018), true) => {
            for sigma in 0..ns {
                for ki in 0..len {
                    out.push(RuleParams {
                        stoup_index: Some(sigma),
                        index: Some(ki),
                        ..base.clone()
                    });
                }
            }
        }
        (Some(BangProfile::Primed2015), true) => {
            for sel2 in subsets(ns) {
                if sel2.is_empty() {
                    continue;
                }
                for selp in subsets(ns) {
                    if selp.iter().any(|i| sel2.contains(i)) {
                        continue;
                    }
                    for i in 0..=len {
                        for j in i..=len {
                            out.push(RuleParams {
                                stoup_sel: Some(sel2.clone()),
                                stoup_sel2: Some(selp.clone()),
                                split: Some(i),
                                split2: Some(j),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        _ => {}
    }
}

fn nondecreasing(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(k: usize, max: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for e in lo..=max {
            cur.push(e);
            go(k, max, e, cur, out);
            cur.pop();
        }
    }
    go(k, max, 0, &mut cur, &mut out);
    out
}

/// Search order: axioms, then deterministic one-premise left rules, then
/// branching left rules, then right rules, then stoup moves, contraction last.
pub const SEARCH_ORDER: &[RuleId] = &[
    RuleId::Id,
    RuleId::UnitR,
    RuleId::UnitL,
    RuleId::ProdL,
    RuleId::BangL,
    RuleId::BoxL,
    RuleId::DiaL,
    RuleId::ConjL1,
    RuleId::ConjL2,
    RuleId::LDivL,
    RuleId::RDivL,
    RuleId::DisjL,
    RuleId::B,
    RuleId::BPrime,
    RuleId::LDivR,
    RuleId::RDivR,
    RuleId::ProdR,
    RuleId::ConjR,
    RuleId::DisjR1,
    RuleId::DisjR2,
    RuleId::DiaR,
    RuleId::BoxR,
    RuleId::BangR,
    RuleId::BangW,
    RuleId::BangP,
    RuleId::BangP1,
    RuleId::BangP2,
    RuleId::BangC,
    RuleId::BangNC1,
    RuleId::BangNC2,
];

/// Every rule application (never cut) whose conclusion is `goal`.
pub fn enumerate_backward(c: &CalculusId, goal: &Sequent) -> Vec<(RuleApp, Vec<Sequent>)> {
    let rules = c.rules();
    let mut out = Vec::new();
    for &rule in SEARCH_ORDER {
        if rules.contains(&rule) {
            out.extend(enumerate_rule_apps(c, goal, rule));
        }
    }
    out
}

/// Find an application of `rule` on `conclusion` whose premises are exactly
/// `children`. Used to reconstruct rule instances after a transformation.
pub fn find_app(
    c: &CalculusId,
    conclusion: &Sequent,
    rule: RuleId,
    children: &[Sequent],
) -> Option<RuleApp> {
    if rule == RuleId::Cut {
        return find_cut_app(c, conclusion, children);
    }
    enumerate_rule_apps(c, conclusion, rule)
        .into_iter()
        .find(|(_, ps)| ps == children)
        .map(|(app, _)| app)
}

fn find_cut_app(c: &CalculusId, conclusion: &Sequent, children: &[Sequent]) -> Option<RuleApp> {
    let [left, _right] = children else { return None };
    let pi = &left.antecedent.items;
    for zp in conclusion.antecedent.zone_paths() {
        let zone = conclusion.antecedent.zone(&zp).unwrap();
        // ξ must match a sub-multiset of the zone stoup, by value.
        let Some(sel) = match_submultiset(&zone.stoup, &left.antecedent.stoup) else {
            continue;
        };
        if pi.len() > zone.items.len() {
            continue;
        }
        for start in 0..=(zone.items.len() - pi.len()) {
            if &zone.items[start..start + pi.len()] != pi.as_slice() {
                continue;
            }
            let app = RuleApp::with(
                RuleId::Cut,
                RuleParams {
                    zone: zp.clone(),
                    span: Some((start, pi.len())),
                    stoup_sel: Some(sel.clone()),
                    cut_formula: Some(left.succedent.clone()),
                    ..Default::default()
                },
            );
            if premises_of(c, conclusion, &app).is_ok_and(|ps| ps == children) {
                return Some(app);
            }
        }
    }
    None
}

/// Indices in `big` forming a sub-multiset equal to `small`.
fn match_submultiset(big: &Stoup, small: &Stoup) -> Option<Vec<usize>> {
    let mut used = vec![false; big.members.len()];
    for f in &small.members {
        let i = big
            .members
            .iter()
            .enumerate()
            .position(|(i, g)| !used[i] && g == f)?;
        used[i] = true;
    }
    Some(used.iter().enumerate().filter(|(_, u)| **u).map(|(i, _)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_sequent;

    fn seq(s: &str) -> Sequent {
        parse_sequent(s).unwrap()
    }

    #[test]
    fn morrill2018_contraction_step_of_fig2() {
        // The !C step of the "John signed without reading" derivation.
        let c = CalculusId::by_name("b2018st").unwrap();
        let w = "([]((<>N\\S)\\(<>N\\S)))/(<>N\\S)";
        let concl = seq(&format!(
            "{{N}}; [N], (<>N\\S)/N, [[ {w}, (<>N\\S)/N ]] => S"
        ));
        let want = seq(&format!(
            "{{N}}; [N], (<>N\\S)/N, [ {{N}}; {w}, (<>N\\S)/N ] => S"
        ));
        let app = RuleApp::with(
            RuleId::BangC,
            RuleParams { stoup_index: Some(0), index: Some(2), ..Default::default() },
        );
        assert_eq!(premises_of(&c, &concl, &app).unwrap(), vec![want.clone()]);
        assert!(enumerate_backward(&c, &concl).iter().any(|(_, ps)| ps == &vec![want.clone()]));
    }

    #[test]
    fn primed_2018_bang_right() {
        let c = CalculusId::by_name("b2018st-prime").unwrap();
        let concl = seq("{p}; => !p");
        let app = RuleApp::new(RuleId::BangR);
        assert_eq!(premises_of(&c, &concl, &app).unwrap(), vec![seq("{p}; => p")]);
    }

    #[test]
    fn restricted_right_division_blocks_empty_antecedent() {
        let c = CalculusId::by_name("b2018st-prime-lr").unwrap();
        let concl = seq("=> p/p");
        let app = RuleApp::new(RuleId::RDivR);
        assert!(matches!(
            premises_of(&c, &concl, &app),
            Err(RuleError::SideCondition(_))
        ));
    }

    #[test]
    fn backward_enumeration_of_simple_lambek_goal() {
        // p/q, q => p has exactly one application in the bang-free fragment:
        // /L with the span covering q.
        let c = CalculusId::by_name("malc*+additives=off").unwrap();
        let goal = seq("p/q, q => p");
        let apps = enumerate_backward(&c, &goal);
        let decomposing: Vec<_> = apps
            .iter()
            .filter(|(app, _)| app.rule == RuleId::RDivL)
            .collect();
        assert_eq!(decomposing.len(), 2); // spans q and the empty span
        assert!(apps
            .iter()
            .any(|(_, ps)| ps == &vec![seq("q => q"), seq("p => p")]));
        // the id axiom on p => p
        let axiom = enumerate_backward(&c, &seq("p => p"));
        assert!(axiom.iter().any(|(app, ps)| app.rule == RuleId::Id && ps.is_empty()));
    }

    #[test]
    fn coherence_on_fig2_contraction_conclusion() {
        let c = CalculusId::by_name("b2018st").unwrap();
        let goal = seq("{N}; [N], (<>N\\S)/N, [[ q, (<>N\\S)/N ]] => S");
        for (app, ps) in enumerate_backward(&c, &goal) {
            assert_eq!(premises_of(&c, &goal, &app).unwrap(), ps);
        }
    }

    #[test]
    fn cut_app_reconstruction() {
        let c = CalculusId::by_name("b2018st+cut").unwrap();
        let concl = seq("!p, q => q*!p");
        let left = seq("!p => !!p");
        let right = seq("!!p, q => q*!p");
        let app = find_app(&c, &concl, RuleId::Cut, &[left.clone(), right.clone()]).unwrap();
        assert_eq!(premises_of(&c, &concl, &app).unwrap(), vec![left, right]);
    }
}
