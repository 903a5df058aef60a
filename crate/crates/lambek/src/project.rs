//! Bracket-forgetting projections and the translations between the stoup and
//! no-stoup presentations of the calculi.
//!
//! `project` erases brackets and bracket modalities (π), optionally sending a
//! designated variable to the unit (π_q). `destoup_derivation` flattens
//! stoups into `!`-prefixed items per the round-trip between the primed stoup
//! systems and their stoup-free formulations; `enstoup_derivation` goes the
//! other way by simulating the `!`-rules with cuts against `A; => !A`.

use crate::calculus::{BangProfile, CalculusId, RuleId};
use crate::derivation::Derivation;
use crate::formula::Formula;
use crate::rules::{find_app, premises_of, RuleApp, RuleParams};
use crate::sequent::{MetaFormula, Sequent, Stoup, TreeTerm};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjMode {
    Pi,
    PiQ,
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("source derivation has non-empty stoups; flatten first")]
    HasStoups,
    #[error("end-sequent has a non-empty stoup")]
    StoupInEndSequent,
    #[error("input derivation contains a cut")]
    HasCut,
    #[error("calculus `{0}` is not supported by this translation")]
    Calculus(String),
    #[error("internal reconstruction failed: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// the π / π_q projections

pub fn project_formula(f: &Formula, mode: ProjMode, q: &str) -> Formula {
    let go = |x: &Formula| project_formula(x, mode, q);
    match f {
        Formula::Var(v) if mode == ProjMode::PiQ && v == q => Formula::Unit,
        Formula::Var(v) => Formula::Var(v.clone()),
        Formula::Unit => Formula::Unit,
        Formula::LDiv(a, b) => Formula::ldiv(go(a), go(b)),
        Formula::RDiv(b, a) => Formula::rdiv(go(b), go(a)),
        Formula::Prod(a, b) => Formula::prod(go(a), go(b)),
        Formula::Conj(a, b) => Formula::conj(go(a), go(b)),
        Formula::Disj(a, b) => Formula::disj(go(a), go(b)),
        Formula::Bang(a) => Formula::bang(go(a)),
        Formula::Dia(a) => go(a),
        Formula::Box(a) => go(a),
    }
}

/// Brackets are erased; stoup members become `!`-prefixed items in place.
pub fn project_meta(m: &MetaFormula, mode: ProjMode, q: &str) -> MetaFormula {
    let mut items = Vec::new();
    for f in &m.stoup.members {
        items.push(TreeTerm::Leaf(Formula::bang(project_formula(f, mode, q))));
    }
    for item in &m.items {
        match item {
            TreeTerm::Leaf(f) => items.push(TreeTerm::Leaf(project_formula(f, mode, q))),
            TreeTerm::Bracketed(inner) => {
                items.extend(project_meta(inner, mode, q).items);
            }
        }
    }
    MetaFormula::of_items(items)
}

pub fn project_sequent(s: &Sequent, mode: ProjMode, q: &str) -> Sequent {
    Sequent::new(
        project_meta(&s.antecedent, mode, q),
        project_formula(&s.succedent, mode, q),
    )
}

// ---------------------------------------------------------------------------
// permutation plumbing

fn is_bang(item: &TreeTerm) -> bool {
    item.is_bang_leaf()
}

/// Single-zone move plan turning `cur` into `tgt` by relocating `!`-items.
/// Precondition: equal multisets with non-`!` items in the same order.
fn plan_moves(cur: &[TreeTerm], tgt: &[TreeTerm]) -> Result<Vec<(usize, usize)>, TransformError> {
    let mut cur: Vec<TreeTerm> = cur.to_vec();
    let mut moves = Vec::new();
    if cur.len() != tgt.len() {
        return Err(TransformError::Internal("permutation targets differ in length".into()));
    }
    loop {
        let Some(i) = (0..cur.len()).find(|&i| cur[i] != tgt[i]) else {
            return Ok(moves);
        };
        if is_bang(&tgt[i]) {
            if let Some(j) = (i + 1..cur.len()).find(|&j| cur[j] == tgt[i]) {
                let item = cur.remove(j);
                cur.insert(i, item);
                moves.push((j, i));
                continue;
            }
        }
        // The wanted item is an anchor; the blocking item must be movable.
        if !is_bang(&cur[i]) || i + 1 >= cur.len() {
            return Err(TransformError::Internal(format!(
                "items are not a !-permutation of the target at position {i}"
            )));
        }
        let item = cur.remove(i);
        cur.insert(i + 1, item);
        moves.push((i, i + 1));
    }
}

/// Bracketed items of a zone, in order.
fn bracket_positions(m: &MetaFormula) -> Vec<usize> {
    m.items
        .iter()
        .enumerate()
        .filter(|(_, it)| matches!(it, TreeTerm::Bracketed(_)))
        .map(|(i, _)| i)
        .collect()
}

/// Extend `der` downward with `!P1`/`!P2` nodes until its end-sequent equals
/// `target`. The two sequents must agree up to `!`-item placement within
/// zones (inner zones are aligned first, pairing brackets by order).
pub(crate) fn permute_to(
    c: &CalculusId,
    mut der: Derivation,
    target: &Sequent,
) -> Result<Derivation, TransformError> {
    fn fix_zone(
        c: &CalculusId,
        mut der: Derivation,
        path: Vec<usize>,
        target: &Sequent,
        tgt_path: &[usize],
    ) -> Result<Derivation, TransformError> {
        // Inner zones first: afterwards bracketed items compare equal.
        let cur_zone = der
            .sequent
            .antecedent
            .zone(&path)
            .map_err(|e| TransformError::Internal(e.to_string()))?
            .clone();
        let tgt_zone = target
            .antecedent
            .zone(tgt_path)
            .map_err(|e| TransformError::Internal(e.to_string()))?
            .clone();
        let cur_brackets = bracket_positions(&cur_zone);
        let tgt_brackets = bracket_positions(&tgt_zone);
        if cur_brackets.len() != tgt_brackets.len() {
            return Err(TransformError::Internal("bracket structure mismatch".into()));
        }
        for (cb, tb) in cur_brackets.iter().zip(&tgt_brackets) {
            let mut sub_path = path.clone();
            sub_path.push(*cb);
            let mut sub_tgt = tgt_path.to_vec();
            sub_tgt.push(*tb);
            der = fix_zone(c, der, sub_path, target, &sub_tgt)?;
        }
        let cur_zone = der.sequent.antecedent.zone(&path).unwrap().clone();
        for (from, to) in plan_moves(&cur_zone.items, &tgt_zone.items)? {
            let rule = if from < to { RuleId::BangP1 } else { RuleId::BangP2 };
            let app = RuleApp::with(
                rule,
                RuleParams {
                    zone: path.clone(),
                    index: Some(to),
                    split: Some(from),
                    ..Default::default()
                },
            );
            let current = der.sequent.clone();
            let concl = {
                let mut moved = current.antecedent.zone(&path).unwrap().items.clone();
                let item = moved.remove(from);
                moved.insert(to, item);
                let ante = current
                    .antecedent
                    .with_zone(&path, &mut |z| MetaFormula::new(z.stoup.clone(), moved.clone()))
                    .unwrap();
                Sequent::new(ante, current.succedent.clone())
            };
            debug_assert_eq!(premises_of(c, &concl, &app), Ok(vec![current]));
            der = Derivation::new(concl, app, vec![der]);
        }
        Ok(der)
    }
    der = fix_zone(c, der, vec![], target, &[])?;
    if der.sequent != *target {
        return Err(TransformError::Internal(format!(
            "permutation failed: got `{}`, wanted `{target}`",
            der.sequent
        )));
    }
    Ok(der)
}

// ---------------------------------------------------------------------------
// derivation projection into the full-exponential calculus

fn assert_no_stoups(d: &Derivation) -> Result<(), TransformError> {
    let mut ok = true;
    d.walk(&mut |n| {
        fn stoup_free(m: &MetaFormula) -> bool {
            m.stoup.is_empty()
                && m.items.iter().all(|it| match it {
                    TreeTerm::Leaf(_) => true,
                    TreeTerm::Bracketed(inner) => stoup_free(inner),
                })
        }
        ok &= stoup_free(&n.sequent.antecedent);
    });
    if ok {
        Ok(())
    } else {
        Err(TransformError::HasStoups)
    }
}

/// Rebuild a node in `c` from a known conclusion and already-built children.
fn rebuild(
    c: &CalculusId,
    rule: RuleId,
    concl: Sequent,
    children: Vec<Derivation>,
) -> Result<Derivation, TransformError> {
    let kid_seqs: Vec<Sequent> = children.iter().map(|d| d.sequent.clone()).collect();
    let app = find_app(c, &concl, rule, &kid_seqs).ok_or_else(|| {
        TransformError::Internal(format!("no {rule} instance derives `{concl}`"))
    })?;
    Ok(Derivation::new(concl, app, children))
}

/// Rebuild with the first rule from `rules` that fits.
fn rebuild_any(
    c: &CalculusId,
    rules: &[RuleId],
    concl: Sequent,
    children: Vec<Derivation>,
) -> Result<Derivation, TransformError> {
    let kid_seqs: Vec<Sequent> = children.iter().map(|d| d.sequent.clone()).collect();
    for &rule in rules {
        if let Some(app) = find_app(c, &concl, rule, &kid_seqs) {
            return Ok(Derivation::new(concl, app, children));
        }
    }
    Err(TransformError::Internal(format!(
        "no rule of {rules:?} derives `{concl}`"
    )))
}

/// Project a checked derivation of a no-stoup bracketed calculus into the
/// full-exponential calculus without brackets. Bracket-modal rules become
/// no-ops; the bracket-aware contractions become plain (non-local)
/// contractions.
pub fn project_derivation(
    src: &CalculusId,
    d: &Derivation,
    mode: ProjMode,
    q: &str,
) -> Result<(CalculusId, Derivation), TransformError> {
    if src.features.has_stoups {
        return Err(TransformError::HasStoups);
    }
    assert_no_stoups(d)?;
    let target = CalculusId::by_name("!malc*").unwrap();
    let out = project_node(src, &target, d, mode, q)?;
    Ok((target, out))
}

fn project_node(
    src: &CalculusId,
    tgt: &CalculusId,
    d: &Derivation,
    mode: ProjMode,
    q: &str,
) -> Result<Derivation, TransformError> {
    use RuleId::*;
    let concl = project_sequent(&d.sequent, mode, q);
    match d.rule.rule {
        // Bracket-modal rules vanish: premise and conclusion project alike.
        DiaL | DiaR | BoxL | BoxR => project_node(src, tgt, &d.children[0], mode, q),
        Id => {
            if concl.antecedent.items.len() == 1
                && concl.antecedent.items[0].as_leaf() == Some(&concl.succedent)
            {
                Ok(Derivation::leaf(concl, Id))
            } else if concl.succedent == Formula::Unit {
                // the axiom q => q projects to the derivable 1 => 1
                let top = Derivation::leaf(
                    Sequent::new(MetaFormula::empty(), Formula::Unit),
                    UnitR,
                );
                rebuild(tgt, UnitL, concl, vec![top])
            } else {
                Err(TransformError::Internal(format!("projected axiom `{concl}`")))
            }
        }
        UnitR => Ok(Derivation::leaf(concl, UnitR)),
        BangP1 | BangP2 => {
            let child = project_node(src, tgt, &d.children[0], mode, q)?;
            if child.sequent == concl {
                // the move happened across an erased bracket
                return Ok(child);
            }
            rebuild_any(tgt, &[BangP1, BangP2], concl, vec![child])
        }
        BangC => project_contraction(src, tgt, d, mode, q),
        rule => {
            let children = d
                .children
                .iter()
                .map(|ch| project_node(src, tgt, ch, mode, q))
                .collect::<Result<Vec<_>, _>>()?;
            rebuild(tgt, rule, concl, children)
        }
    }
}

fn project_contraction(
    src: &CalculusId,
    tgt: &CalculusId,
    d: &Derivation,
    mode: ProjMode,
    q: &str,
) -> Result<Derivation, TransformError> {
    let child = project_node(src, tgt, &d.children[0], mode, q)?;
    let concl = project_sequent(&d.sequent, mode, q);
    match src.features.bang {
        Some(BangProfile::Morrill2018) => {
            rebuild_any(tgt, &[RuleId::BangC, RuleId::BangNC1, RuleId::BangNC2], concl, vec![child])
        }
        Some(BangProfile::Morrill2015) => {
            // The block contraction becomes one plain contraction per member.
            let p = &d.rule.params;
            let (start, n) = p.span.ok_or_else(|| {
                TransformError::Internal("2015 contraction without a block span".into())
            })?;
            let island_at = p.split.unwrap_or(0);
            let zone = d
                .sequent
                .antecedent
                .zone(&p.zone)
                .map_err(|e| TransformError::Internal(e.to_string()))?;
            let block: Vec<TreeTerm> = zone.items[start..start + n]
                .iter()
                .map(|it| match it {
                    TreeTerm::Leaf(f) => TreeTerm::Leaf(project_formula(f, mode, q)),
                    TreeTerm::Bracketed(_) => it.clone(),
                })
                .collect();
            // Flat offset where the island copy sits in the projection.
            let insert_at = flat_offset(&d.sequent.antecedent, &p.zone, island_at, mode, q)?;
            let mut der = child;
            for j in 1..=n {
                let mut items = concl.antecedent.items.clone();
                for (k, item) in block[j..].iter().enumerate() {
                    items.insert(insert_at + k, item.clone());
                }
                let step = Sequent::new(MetaFormula::of_items(items), concl.succedent.clone());
                der = rebuild_any(
                    tgt,
                    &[RuleId::BangC, RuleId::BangNC1, RuleId::BangNC2],
                    step,
                    vec![der],
                )?;
            }
            Ok(der)
        }
        _ => Err(TransformError::Calculus(src.name.clone())),
    }
}

/// Position in the projected item list where item `index` of the addressed
/// zone lands.
fn flat_offset(
    m: &MetaFormula,
    zone: &[usize],
    index: usize,
    mode: ProjMode,
    q: &str,
) -> Result<usize, TransformError> {
    fn width(item: &TreeTerm, mode: ProjMode, q: &str) -> usize {
        match item {
            TreeTerm::Leaf(_) => 1,
            TreeTerm::Bracketed(inner) => project_meta(inner, mode, q).items.len(),
        }
    }
    match zone.split_first() {
        None => Ok(m.stoup.len()
            + m.items[..index].iter().map(|it| width(it, mode, q)).sum::<usize>()),
        Some((&step, rest)) => {
            let Some(TreeTerm::Bracketed(inner)) = m.items.get(step) else {
                return Err(TransformError::Internal("bad zone path".into()));
            };
            let before: usize =
                m.stoup.len() + m.items[..step].iter().map(|it| width(it, mode, q)).sum::<usize>();
            Ok(before + flat_offset(inner, rest, index, mode, q)?)
        }
    }
}

// ---------------------------------------------------------------------------
// destoup: primed stoup systems -> stoup-free systems

/// Stoups flattened into `!`-prefixed items at the front of their zone.
pub fn flatten_meta(m: &MetaFormula) -> MetaFormula {
    let mut items: Vec<TreeTerm> = m
        .stoup
        .members
        .iter()
        .map(|f| TreeTerm::Leaf(Formula::bang(f.clone())))
        .collect();
    for item in &m.items {
        match item {
            TreeTerm::Leaf(f) => items.push(TreeTerm::Leaf(f.clone())),
            TreeTerm::Bracketed(inner) => items.push(TreeTerm::Bracketed(flatten_meta(inner))),
        }
    }
    MetaFormula::of_items(items)
}

pub fn flatten_sequent(s: &Sequent) -> Sequent {
    Sequent::new(flatten_meta(&s.antecedent), s.succedent.clone())
}

fn destoup_target(src: &CalculusId) -> Result<CalculusId, TransformError> {
    if !src.features.has_stoups {
        return Err(TransformError::Calculus(src.name.clone()));
    }
    let name = match (src.features.bang, src.features.lambek_restricted) {
        (Some(BangProfile::Primed2018), false) | (Some(BangProfile::Morrill2018), false) => {
            "b2018"
        }
        (Some(BangProfile::Primed2018), true) => "b2018-lr",
        (Some(BangProfile::Primed2015), false) => "b2015",
        _ => return Err(TransformError::Calculus(src.name.clone())),
    };
    Ok(CalculusId::by_name(name).unwrap())
}

/// Translate a cut-free stoup derivation whose end-sequent has empty stoups
/// into the matching stoup-free calculus.
pub fn destoup_derivation(
    src: &CalculusId,
    d: &Derivation,
) -> Result<(CalculusId, Derivation), TransformError> {
    let tgt = destoup_target(src)?;
    if d.cut_count() > 0 {
        return Err(TransformError::HasCut);
    }
    if flatten_sequent(&d.sequent) != d.sequent {
        return Err(TransformError::StoupInEndSequent);
    }
    let out = destoup_node(src, &tgt, d)?;
    Ok((tgt, out))
}

fn destoup_node(
    src: &CalculusId,
    tgt: &CalculusId,
    d: &Derivation,
) -> Result<Derivation, TransformError> {
    use RuleId::*;
    let flat = flatten_sequent(&d.sequent);
    match d.rule.rule {
        Id | UnitR => Ok(Derivation::leaf(flat, d.rule.rule)),
        // `!L` turns into a pure permutation after flattening.
        BangL => {
            let child = destoup_node(src, tgt, &d.children[0])?;
            permute_to(tgt, child, &flat)
        }
        // `!P` becomes the stoup-free `!L` plus permutations.
        BangP => {
            let child = destoup_node(src, tgt, &d.children[0])?;
            let p = &d.rule.params;
            let landing = p.split.ok_or_else(|| {
                TransformError::Internal("!P without a landing split".into())
            })?;
            // In the flattened premise, the landed formula A sits at the
            // landing index shifted by the stoup block; replace it by !A.
            let child_src = &d.children[0].sequent;
            let zone_stoup = child_src
                .antecedent
                .zone(&p.zone)
                .map_err(|e| TransformError::Internal(e.to_string()))?
                .stoup
                .len();
            let mid = {
                let flat_child = flatten_sequent(child_src);
                let ante = flat_child
                    .antecedent
                    .with_zone(&flat_path(child_src, &p.zone), &mut |z| {
                        let mut items = z.items.clone();
                        let k = zone_stoup + landing;
                        if let TreeTerm::Leaf(f) = &items[k] {
                            items[k] = TreeTerm::Leaf(Formula::bang(f.clone()));
                        }
                        MetaFormula::new(z.stoup.clone(), items)
                    })
                    .map_err(|e| TransformError::Internal(e.to_string()))?;
                Sequent::new(ante, flat_child.succedent.clone())
            };
            let node = rebuild(tgt, BangL, mid, vec![child])?;
            permute_to(tgt, node, &flat)
        }
        BangR => {
            let child = destoup_node(src, tgt, &d.children[0])?;
            rebuild(tgt, BangR, flat, vec![child])
        }
        BangC => destoup_contraction(src, tgt, d, &flat),
        LDivR => {
            // flatten(child) = !ζ, A, Γ; the stoup-free rule wants A first.
            let child = destoup_node(src, tgt, &d.children[0])?;
            let child_src = &d.children[0].sequent;
            let mut items = flatten_meta(&child_src.antecedent).items;
            let stoup_len = child_src.antecedent.stoup.len();
            let moved = items.remove(stoup_len);
            items.insert(0, moved);
            let mid = Sequent::new(MetaFormula::of_items(items), child_src.succedent.clone());
            let child = permute_to(tgt, child, &mid)?;
            rebuild(tgt, LDivR, flat, vec![child])
        }
        RDivR => {
            let child = destoup_node(src, tgt, &d.children[0])?;
            rebuild(tgt, RDivR, flat, vec![child])
        }
        LDivL | RDivL | ProdR => {
            // Place the left-premise stoup block next to its item span, apply
            // the rule there, and permute the conclusion into flat form.
            let children = d
                .children
                .iter()
                .map(|ch| destoup_node(src, tgt, ch))
                .collect::<Result<Vec<_>, _>>()?;
            let star = split_rule_star(d)?;
            let node = rebuild(tgt, d.rule.rule, star, children)?;
            permute_to(tgt, node, &flat)
        }
        Cut => Err(TransformError::HasCut),
        rule => {
            let children = d
                .children
                .iter()
                .map(|ch| destoup_node(src, tgt, ch))
                .collect::<Result<Vec<_>, _>>()?;
            rebuild(tgt, rule, flat, children)
        }
    }
}

/// Zone path re-addressed into the flattened antecedent (item indices shift
/// by the stoup sizes of the zones passed through).
fn flat_path(s: &Sequent, zone: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(zone.len());
    let mut m = &s.antecedent;
    for &step in zone {
        out.push(step + m.stoup.len());
        m = match &m.items[step] {
            TreeTerm::Bracketed(inner) => inner,
            TreeTerm::Leaf(_) => m, // unreachable for valid paths
        };
    }
    out
}

/// The conclusion variant used to translate `\L`, `/L` and `*R`: the zone is
/// flattened with the left-premise stoup selection placed right next to its
/// item span instead of in the front block.
fn split_rule_star(d: &Derivation) -> Result<Sequent, TransformError> {
    let p = &d.rule.params;
    let sel: Vec<usize> = p.stoup_sel.clone().unwrap_or_default();
    let src_zone = d
        .sequent
        .antecedent
        .zone(&p.zone)
        .map_err(|e| TransformError::Internal(e.to_string()))?;
    let left_bangs: Vec<TreeTerm> = src_zone
        .stoup
        .select(&sel)
        .ok_or_else(|| TransformError::Internal("bad stoup selection".into()))?
        .into_iter()
        .map(|f| TreeTerm::Leaf(Formula::bang(f)))
        .collect();
    let rest = src_zone.stoup.without(&sel);
    // Where the left premise's span starts in the source zone's items.
    let insert_at = match d.rule.rule {
        RuleId::LDivL | RuleId::RDivL => {
            p.span
                .ok_or_else(|| TransformError::Internal("division without span".into()))?
                .0
        }
        RuleId::ProdR => 0,
        _ => return Err(TransformError::Internal("not a splitting rule".into())),
    };
    let star_zone = {
        let mut items: Vec<TreeTerm> = rest
            .members
            .iter()
            .map(|f| TreeTerm::Leaf(Formula::bang(f.clone())))
            .collect();
        for (k, item) in src_zone.items.iter().enumerate() {
            if k == insert_at {
                items.extend(left_bangs.iter().cloned());
            }
            items.push(match item {
                TreeTerm::Leaf(f) => TreeTerm::Leaf(f.clone()),
                TreeTerm::Bracketed(inner) => TreeTerm::Bracketed(flatten_meta(inner)),
            });
        }
        if insert_at == src_zone.items.len() {
            items.extend(left_bangs.iter().cloned());
        }
        MetaFormula::of_items(items)
    };
    let ante = flatten_meta(&d.sequent.antecedent);
    let ante = ante
        .with_zone(&flat_path(&d.sequent, &p.zone), &mut |_| star_zone.clone())
        .map_err(|e| TransformError::Internal(e.to_string()))?;
    Ok(Sequent::new(ante, d.sequent.succedent.clone()))
}

fn destoup_contraction(
    src: &CalculusId,
    tgt: &CalculusId,
    d: &Derivation,
    flat: &Sequent,
) -> Result<Derivation, TransformError> {
    let child = destoup_node(src, tgt, &d.children[0])?;
    let p = &d.rule.params;
    let child_src = &d.children[0].sequent;
    match src.features.bang {
        // One stoup formula contracted into a double-bracketed island.
        Some(BangProfile::Primed2018 | BangProfile::Morrill2018) => {
            let sigma = p.stoup_index.unwrap_or(0);
            let island = p.index.unwrap_or(0);
            let zone = d
                .sequent
                .antecedent
                .zone(&p.zone)
                .map_err(|e| TransformError::Internal(e.to_string()))?;
            let a = zone.stoup.members[sigma].clone();
            // Premise variant with the island's copy of !A moved first.
            let fp = flat_path(child_src, &p.zone);
            let flat_child = flatten_sequent(child_src);
            let star_premise = {
                let ante = flat_child
                    .antecedent
                    .with_zone(&fp, &mut |z| {
                        let mut items = z.items.clone();
                        let island_flat = island + zone.stoup.len();
                        if let TreeTerm::Bracketed(inner) = &items[island_flat] {
                            let mut inner_items = inner.items.clone();
                            let pos = inner_items
                                .iter()
                                .position(|it| it.as_leaf() == Some(&Formula::bang(a.clone())))
                                .unwrap_or(0);
                            let moved = inner_items.remove(pos);
                            inner_items.insert(0, moved);
                            items[island_flat] =
                                TreeTerm::Bracketed(MetaFormula::of_items(inner_items));
                        }
                        MetaFormula::new(z.stoup.clone(), items)
                    })
                    .map_err(|e| TransformError::Internal(e.to_string()))?;
                Sequent::new(ante, flat_child.succedent.clone())
            };
            let child = permute_to(tgt, child, &star_premise)?;
            rebuild(tgt, RuleId::BangC, flat.clone(), vec![child])
        }
        // ζ₂ contracted into a fresh island, ζ' moved out of it.
        Some(BangProfile::Primed2015) => {
            let sel2: Vec<usize> = p.stoup_sel.clone().unwrap_or_default();
            let selp: Vec<usize> = p.stoup_sel2.clone().unwrap_or_default();
            let i = p.split.unwrap_or(0);
            let zone = d
                .sequent
                .antecedent
                .zone(&p.zone)
                .map_err(|e| TransformError::Internal(e.to_string()))?;
            let zeta2: Vec<TreeTerm> = zone
                .stoup
                .select(&sel2)
                .ok_or_else(|| TransformError::Internal("bad selection".into()))?
                .into_iter()
                .map(|f| TreeTerm::Leaf(Formula::bang(f)))
                .collect();
            let zetap: Vec<TreeTerm> = zone
                .stoup
                .select(&selp)
                .ok_or_else(|| TransformError::Internal("bad selection".into()))?
                .into_iter()
                .map(|f| TreeTerm::Leaf(Formula::bang(f)))
                .collect();
            let zeta1 = {
                let mut drop = sel2.clone();
                drop.extend(selp.iter().copied());
                drop.sort_unstable();
                zone.stoup.without(&drop)
            };
            // Premise variant: outer [ζ₂ ζ₁ | Γ₁ [ζ₂ ζ' Γ₂] Γ₃ ].
            let fp = flat_path(child_src, &p.zone);
            let premise_zone_src = child_src
                .antecedent
                .zone(&p.zone)
                .map_err(|e| TransformError::Internal(e.to_string()))?;
            let star_premise = {
                let mut items: Vec<TreeTerm> = zeta2.clone();
                items.extend(
                    zeta1
                        .members
                        .iter()
                        .map(|f| TreeTerm::Leaf(Formula::bang(f.clone()))),
                );
                for (k, item) in premise_zone_src.items.iter().enumerate() {
                    if k == i {
                        // the island created by the contraction
                        let TreeTerm::Bracketed(isl) = item else {
                            return Err(TransformError::Internal(
                                "contraction premise has no island".into(),
                            ));
                        };
                        let mut inner: Vec<TreeTerm> = zeta2.clone();
                        inner.extend(zetap.iter().cloned());
                        inner.extend(isl.items.iter().map(|it| match it {
                            TreeTerm::Leaf(f) => TreeTerm::Leaf(f.clone()),
                            TreeTerm::Bracketed(b) => TreeTerm::Bracketed(flatten_meta(b)),
                        }));
                        items.push(TreeTerm::Bracketed(MetaFormula::of_items(inner)));
                    } else {
                        items.push(match item {
                            TreeTerm::Leaf(f) => TreeTerm::Leaf(f.clone()),
                            TreeTerm::Bracketed(b) => TreeTerm::Bracketed(flatten_meta(b)),
                        });
                    }
                }
                let ante = flatten_meta(&child_src.antecedent)
                    .with_zone(&fp, &mut |_| MetaFormula::of_items(items.clone()))
                    .map_err(|e| TransformError::Internal(e.to_string()))?;
                Sequent::new(ante, child_src.succedent.clone())
            };
            let child = permute_to(tgt, child, &star_premise)?;
            // Conclusion of the stoup-free contraction before final permuting.
            let star_concl = {
                let mut items: Vec<TreeTerm> = zeta2.clone();
                items.extend(
                    zeta1
                        .members
                        .iter()
                        .map(|f| TreeTerm::Leaf(Formula::bang(f.clone()))),
                );
                for (k, item) in zone.items.iter().enumerate() {
                    if k == i {
                        items.extend(zetap.iter().cloned());
                    }
                    items.push(match item {
                        TreeTerm::Leaf(f) => TreeTerm::Leaf(f.clone()),
                        TreeTerm::Bracketed(b) => TreeTerm::Bracketed(flatten_meta(b)),
                    });
                }
                if i == zone.items.len() {
                    items.extend(zetap.iter().cloned());
                }
                let ante = flatten_meta(&d.sequent.antecedent)
                    .with_zone(&flat_path(&d.sequent, &p.zone), &mut |_| {
                        MetaFormula::of_items(items.clone())
                    })
                    .map_err(|e| TransformError::Internal(e.to_string()))?;
                Sequent::new(ante, d.sequent.succedent.clone())
            };
            let node = rebuild(tgt, RuleId::BangC, star_concl, vec![child])?;
            permute_to(tgt, node, flat)
        }
        _ => Err(TransformError::Calculus(src.name.clone())),
    }
}

// ---------------------------------------------------------------------------
// enstoup: stoup-free systems -> primed stoup systems, using cut

fn enstoup_target(src: &CalculusId) -> Result<CalculusId, TransformError> {
    if src.features.has_stoups {
        return Err(TransformError::Calculus(src.name.clone()));
    }
    let name = match (src.features.bang, src.features.lambek_restricted) {
        (Some(BangProfile::Morrill2018), false) => "b2018st-prime+cut",
        (Some(BangProfile::Morrill2018), true) => "b2018st-prime-lr+cut",
        (Some(BangProfile::Morrill2015), false) => "b2015st-prime+cut",
        _ => return Err(TransformError::Calculus(src.name.clone())),
    };
    CalculusId::by_name(name).map_err(|e| TransformError::Internal(e.to_string()))
}

/// `{A}; => !A`, the key sequent of the simulation.
fn bang_intro(tgt: &CalculusId, a: &Formula) -> Result<Derivation, TransformError> {
    let ax = Derivation::leaf(
        Sequent::new(MetaFormula::of_formulas(vec![a.clone()]), a.clone()),
        RuleId::Id,
    );
    let stouped = Sequent::new(
        MetaFormula::new(Stoup::from(vec![a.clone()]), vec![]),
        a.clone(),
    );
    let p = rebuild(tgt, RuleId::BangP, stouped.clone(), vec![ax])?;
    let promoted = Sequent::new(stouped.antecedent.clone(), Formula::bang(a.clone()));
    rebuild(tgt, RuleId::BangR, promoted, vec![p])
}

/// Cut `{A}; => !A` against `d` (which must have a `!A` item at `(zone, k)`),
/// yielding the sequent with that item removed and `A` in the zone's stoup.
fn cut_bang_away(
    tgt: &CalculusId,
    d: Derivation,
    zone: &[usize],
    k: usize,
) -> Result<Derivation, TransformError> {
    let seq = d.sequent.clone();
    let z = seq
        .antecedent
        .zone(zone)
        .map_err(|e| TransformError::Internal(e.to_string()))?;
    let Some(Formula::Bang(a)) = z.items.get(k).and_then(TreeTerm::as_leaf) else {
        return Err(TransformError::Internal("no !-item to cut away".into()));
    };
    let a = (**a).clone();
    let intro = bang_intro(tgt, &a)?;
    let concl = {
        let ante = seq
            .antecedent
            .with_zone(zone, &mut |zz| {
                let mut stoup = zz.stoup.clone();
                stoup.members.push(a.clone());
                let mut items = zz.items.clone();
                items.remove(k);
                MetaFormula::new(stoup, items)
            })
            .map_err(|e| TransformError::Internal(e.to_string()))?;
        Sequent::new(ante, seq.succedent.clone())
    };
    rebuild(tgt, RuleId::Cut, concl, vec![intro, d])
}

/// Translate a (possibly cut-bearing) stoup-free derivation into the primed
/// stoup calculus with cut; the end-sequent is unchanged.
pub fn enstoup_derivation(
    src: &CalculusId,
    d: &Derivation,
) -> Result<(CalculusId, Derivation), TransformError> {
    let tgt = enstoup_target(src)?;
    let out = enstoup_node(src, &tgt, d)?;
    Ok((tgt, out))
}

fn enstoup_node(
    src: &CalculusId,
    tgt: &CalculusId,
    d: &Derivation,
) -> Result<Derivation, TransformError> {
    use RuleId::*;
    match d.rule.rule {
        Id | UnitR => Ok(Derivation::leaf(d.sequent.clone(), d.rule.rule)),
        // !L: move the formula through the stoup, no cut needed.
        BangL => {
            let child = enstoup_node(src, tgt, &d.children[0])?;
            let p = &d.rule.params;
            let k = p.index.unwrap_or(0);
            let mid = {
                let ante = d
                    .sequent
                    .antecedent
                    .with_zone(&p.zone, &mut |z| {
                        let mut stoup = z.stoup.clone();
                        if let Some(Formula::Bang(a)) =
                            z.items.get(k).and_then(TreeTerm::as_leaf)
                        {
                            stoup.members.push((**a).clone());
                        }
                        let mut items = z.items.clone();
                        items.remove(k);
                        MetaFormula::new(stoup, items)
                    })
                    .map_err(|e| TransformError::Internal(e.to_string()))?;
                Sequent::new(ante, d.sequent.succedent.clone())
            };
            let inner = rebuild(tgt, BangP, mid.clone(), vec![child])?;
            rebuild(tgt, BangL, d.sequent.clone(), vec![inner])
        }
        // !P1/!P2: cut against {A}; => !A, then reintroduce with !L.
        BangP1 | BangP2 => {
            let child = enstoup_node(src, tgt, &d.children[0])?;
            let p = &d.rule.params;
            let premise_pos = p.split.unwrap_or(0);
            let mid = cut_bang_away(tgt, child, &p.zone, premise_pos)?;
            rebuild(tgt, BangL, d.sequent.clone(), vec![mid])
        }
        BangR => {
            let child = enstoup_node(src, tgt, &d.children[0])?;
            match src.features.bang {
                Some(BangProfile::Morrill2018) => {
                    let mid = cut_bang_away(tgt, child, &[], 0)?;
                    let promoted =
                        Sequent::new(mid.sequent.antecedent.clone(), d.sequent.succedent.clone());
                    let r = rebuild(tgt, BangR, promoted, vec![mid])?;
                    rebuild(tgt, BangL, d.sequent.clone(), vec![r])
                }
                Some(BangProfile::Morrill2015) => {
                    let n = d.children[0].sequent.antecedent.items.len();
                    let mut cur = child;
                    for _ in 0..n {
                        cur = cut_bang_away(tgt, cur, &[], 0)?;
                    }
                    let promoted =
                        Sequent::new(cur.sequent.antecedent.clone(), d.sequent.succedent.clone());
                    let der = rebuild(tgt, BangR, promoted, vec![cur])?;
                    unstoup_all(tgt, der, d.sequent.clone())
                }
                _ => Err(TransformError::Calculus(src.name.clone())),
            }
        }
        BangC => {
            let child = enstoup_node(src, tgt, &d.children[0])?;
            match src.features.bang {
                Some(BangProfile::Morrill2018) => {
                    let p = &d.rule.params;
                    let kb = p.index.unwrap_or(0);
                    let ki = p.split.unwrap_or(0);
                    // island copy first (inside the bracket), then the outer one
                    let mut island_zone = p.zone.clone();
                    island_zone.push(ki);
                    let cut1 = cut_bang_away(tgt, child, &island_zone, 0)?;
                    let cut2 = cut_bang_away(tgt, cut1, &p.zone, kb)?;
                    let concl_c = {
                        let ante = d
                            .sequent
                            .antecedent
                            .with_zone(&p.zone, &mut |z| {
                                let mut stoup = z.stoup.clone();
                                if let Some(Formula::Bang(a)) =
                                    z.items.get(kb).and_then(TreeTerm::as_leaf)
                                {
                                    stoup.members.push((**a).clone());
                                }
                                let mut items = z.items.clone();
                                items.remove(kb);
                                MetaFormula::new(stoup, items)
                            })
                            .map_err(|e| TransformError::Internal(e.to_string()))?;
                        Sequent::new(ante, d.sequent.succedent.clone())
                    };
                    let c = rebuild(tgt, BangC, concl_c, vec![cut2])?;
                    rebuild(tgt, BangL, d.sequent.clone(), vec![c])
                }
                Some(BangProfile::Morrill2015) => {
                    let p = &d.rule.params;
                    let (start, n) = p.span.unwrap_or((0, 0));
                    let island_i = p.split.unwrap_or(0);
                    let mut cur = child;
                    let mut island_zone = p.zone.clone();
                    island_zone.push(island_i);
                    for _ in 0..n {
                        cur = cut_bang_away(tgt, cur, &island_zone, 0)?;
                    }
                    for _ in 0..n {
                        cur = cut_bang_away(tgt, cur, &p.zone, start)?;
                    }
                    let concl_c = {
                        let zone = d
                            .sequent
                            .antecedent
                            .zone(&p.zone)
                            .map_err(|e| TransformError::Internal(e.to_string()))?;
                        let members: Vec<Formula> = zone.items[start..start + n]
                            .iter()
                            .filter_map(|it| match it.as_leaf() {
                                Some(Formula::Bang(a)) => Some((**a).clone()),
                                _ => None,
                            })
                            .collect();
                        let ante = d
                            .sequent
                            .antecedent
                            .with_zone(&p.zone, &mut |z| {
                                let mut stoup = z.stoup.clone();
                                stoup.members.extend(members.iter().cloned());
                                let mut items = z.items.clone();
                                items.drain(start..start + n);
                                MetaFormula::new(stoup, items)
                            })
                            .map_err(|e| TransformError::Internal(e.to_string()))?;
                        Sequent::new(ante, d.sequent.succedent.clone())
                    };
                    let c = rebuild(tgt, BangC, concl_c, vec![cur])?;
                    // The contraction may act below other !-items; the final
                    // !L chain brings the stoup back out in front.
                    let mut der = c;
                    loop {
                        if der.sequent == d.sequent {
                            break;
                        }
                        let stoup_len = der.sequent.antecedent.zone(&p.zone).map(|z| z.stoup.len());
                        match stoup_len {
                            Ok(len) if len > 0 => {
                                let member = der
                                    .sequent
                                    .antecedent
                                    .zone(&p.zone)
                                    .unwrap()
                                    .stoup
                                    .members[len - 1]
                                    .clone();
                                let concl = {
                                    let ante = der
                                        .sequent
                                        .antecedent
                                        .with_zone(&p.zone, &mut |z| {
                                            let mut stoup = z.stoup.clone();
                                            stoup.members.pop();
                                            let mut items = z.items.clone();
                                            items.insert(
                                                start,
                                                TreeTerm::Leaf(Formula::bang(member.clone())),
                                            );
                                            MetaFormula::new(stoup, items)
                                        })
                                        .map_err(|e| TransformError::Internal(e.to_string()))?;
                                    Sequent::new(ante, der.sequent.succedent.clone())
                                };
                                der = rebuild(tgt, BangL, concl, vec![der])?;
                            }
                            _ => {
                                return Err(TransformError::Internal(format!(
                                    "contraction gadget landed at `{}`, wanted `{}`",
                                    der.sequent, d.sequent
                                )))
                            }
                        }
                    }
                    Ok(der)
                }
                _ => Err(TransformError::Calculus(src.name.clone())),
            }
        }
        rule => {
            let children = d
                .children
                .iter()
                .map(|ch| enstoup_node(src, tgt, ch))
                .collect::<Result<Vec<_>, _>>()?;
            rebuild(tgt, rule, d.sequent.clone(), children)
        }
    }
}

/// Chain of `!L` nodes moving every stoup member of the root zone back out
/// as a `!`-item at the front, ending exactly at `target`.
fn unstoup_all(
    tgt: &CalculusId,
    mut der: Derivation,
    target: Sequent,
) -> Result<Derivation, TransformError> {
    loop {
        let stoup_len = der.sequent.antecedent.stoup.len();
        if stoup_len == 0 {
            break;
        }
        let member = der.sequent.antecedent.stoup.members[stoup_len - 1].clone();
        let mut stoup = der.sequent.antecedent.stoup.clone();
        stoup.members.pop();
        let mut items = der.sequent.antecedent.items.clone();
        items.insert(0, TreeTerm::Leaf(Formula::bang(member)));
        let concl = Sequent::new(
            MetaFormula::new(stoup, items),
            der.sequent.succedent.clone(),
        );
        der = rebuild(tgt, RuleId::BangL, concl, vec![der])?;
    }
    if der.sequent != target {
        return Err(TransformError::Internal(format!(
            "unstoup landed at `{}`, wanted `{target}`",
            der.sequent
        )));
    }
    Ok(der)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::check;
    use crate::fixtures;
    use crate::parse::{parse_formula, parse_sequent};

    #[test]
    fn pi_erases_modalities() {
        let f = parse_formula("[]((<>N\\S)\\(<>N\\S))").unwrap();
        assert_eq!(
            project_formula(&f, ProjMode::Pi, "q"),
            parse_formula("(N\\S)\\(N\\S)").unwrap()
        );
        let w = parse_formula(fixtures::W_WITHOUT).unwrap();
        assert_eq!(
            project_formula(&w, ProjMode::Pi, "q"),
            parse_formula("((N\\S)\\(N\\S))/(N\\S)").unwrap()
        );
    }

    #[test]
    fn pi_q_sends_q_to_unit() {
        assert_eq!(
            project_formula(&Formula::var("q"), ProjMode::PiQ, "q"),
            Formula::Unit
        );
        assert_eq!(
            project_formula(&Formula::var("p"), ProjMode::PiQ, "q"),
            Formula::var("p")
        );
    }

    #[test]
    fn pi_on_sequents() {
        let s = parse_sequent("<>p => p").unwrap();
        assert_eq!(
            project_sequent(&s, ProjMode::Pi, "q"),
            parse_sequent("p => p").unwrap()
        );
    }

    #[test]
    fn destoup_then_check_fig2() {
        let src = fixtures::fig2_calculus();
        let d = fixtures::fig2();
        let (tgt, out) = destoup_derivation(&src, &d).unwrap();
        assert_eq!(tgt.name, "b2018");
        assert_eq!(out.sequent, d.sequent);
        check(&tgt, &out).unwrap();
    }

    #[test]
    fn destoup_then_check_fig3() {
        let src = CalculusId::by_name("b2015st-prime").unwrap();
        // Fig. 3 checks in the primed 2015 system too (its !C is the
        // special case ζ' = ∅) and can then be flattened.
        let d = fixtures::fig3();
        check(&src, &d).unwrap();
        let (tgt, out) = destoup_derivation(&src, &d).unwrap();
        assert_eq!(tgt.name, "b2015");
        assert_eq!(out.sequent, d.sequent);
        check(&tgt, &out).unwrap();
    }

    #[test]
    fn project_fig2_after_destoup() {
        let src = fixtures::fig2_calculus();
        let d = fixtures::fig2();
        let (no_stoup, flat) = destoup_derivation(&src, &d).unwrap();
        let (tgt, projected) = project_derivation(&no_stoup, &flat, ProjMode::Pi, "q").unwrap();
        check(&tgt, &projected).unwrap();
        assert_eq!(
            projected.sequent,
            project_sequent(&d.sequent, ProjMode::Pi, "q")
        );
    }

    #[test]
    fn pi_q_of_axiom_becomes_unit_derivation() {
        let src = CalculusId::by_name("b2018").unwrap();
        let ax = fixtures::ax("q => q");
        let (tgt, out) = project_derivation(&src, &ax, ProjMode::PiQ, "q").unwrap();
        assert_eq!(out.sequent, parse_sequent("1 => 1").unwrap());
        check(&tgt, &out).unwrap();
    }

    #[test]
    fn destoup_of_stoup_free_input_is_identity() {
        let src = CalculusId::by_name("b2018st-prime").unwrap();
        let d = fixtures::by_rule(
            &src,
            crate::calculus::RuleId::RDivL,
            "p/q, q => p",
            vec![fixtures::ax("q => q"), fixtures::ax("p => p")],
        );
        let (_, out) = destoup_derivation(&src, &d).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn enstoup_round_trip_on_fig2() {
        let src = fixtures::fig2_calculus();
        let d = fixtures::fig2();
        let (no_stoup, flat) = destoup_derivation(&src, &d).unwrap();
        let (primed, stouped) = enstoup_derivation(&no_stoup, &flat).unwrap();
        assert_eq!(stouped.sequent, d.sequent);
        assert!(stouped.cut_count() > 0);
        check(&primed, &stouped).unwrap();
    }
}
