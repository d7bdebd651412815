//! Bounded syntactic derivation of order facts `s <= t`, used to discharge
//! modular-law side conditions and Order-rewrite premises.
//!
//! This is deliberately not a decision procedure for the word problem; it
//! covers reflexivity, hypotheses (modulo unfolding definitions), meet
//! lower bounds, join upper bounds, monotonicity, and transitivity through
//! midpoints drawn from subterms and definition bodies.

use std::collections::HashMap;
use std::fmt;

use crate::rules::Context;
use crate::term::{ac_canonical, equal_mod_ac, Flat, OpKind, Term, to_flat};

/// Depth budget used when no explicit budget is given. Every side condition
/// in the bundled corpus derives within depth 3.
pub const DEFAULT_DEPTH: usize = 6;

/// An order fact `lhs <= rhs` (or `lhs < rhs` when `strict`). Strict facts
/// are stored strict but consumed non-strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderFact {
    pub lhs: Term,
    pub rhs: Term,
    pub strict: bool,
}

impl OrderFact {
    pub fn non_strict(lhs: Term, rhs: Term) -> OrderFact {
        OrderFact { lhs, rhs, strict: false }
    }

    pub fn strict(lhs: Term, rhs: Term) -> OrderFact {
        OrderFact { lhs, rhs, strict: true }
    }
}

impl fmt::Display for OrderFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, if self.strict { "<" } else { "<=" }, self.rhs)
    }
}

/// How one node of a [`Derivation`] concludes its fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivationRule {
    Hypothesis,
    MeetLower,
    JoinUpper,
    Reflexivity,
    Transitivity,
    Monotonicity,
    DefExpand,
}

impl DerivationRule {
    pub fn name(self) -> &'static str {
        match self {
            DerivationRule::Hypothesis => "Hypothesis",
            DerivationRule::MeetLower => "MeetLower",
            DerivationRule::JoinUpper => "JoinUpper",
            DerivationRule::Reflexivity => "Reflexivity",
            DerivationRule::Transitivity => "Transitivity",
            DerivationRule::Monotonicity => "Monotonicity",
            DerivationRule::DefExpand => "DefExpand",
        }
    }
}

/// Proof object for a derived order fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub conclusion: OrderFact,
    pub rule: DerivationRule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: DerivationRule, lhs: &Term, rhs: &Term) -> Derivation {
        Derivation {
            conclusion: OrderFact::non_strict(lhs.clone(), rhs.clone()),
            rule,
            premises: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Derivation::depth).max().unwrap_or(0)
    }

    /// Indented one-line-per-node rendering.
    pub fn render(&self) -> String {
        fn go(d: &Derivation, indent: usize, out: &mut String) {
            out.push_str(&"  ".repeat(indent));
            out.push_str(&format!("{}: {}\n", d.rule.name(), d.conclusion));
            for p in &d.premises {
                go(p, indent + 1, out);
            }
        }
        let mut s = String::new();
        go(self, 0, &mut s);
        s
    }
}

/// Multiset inclusion of `inner`'s op-factors in `outer`'s.
fn factor_multiset(t: &Term, kind: OpKind) -> Vec<Flat> {
    match to_flat(t) {
        Flat::Op(k, args) if k == kind => args,
        other => vec![other],
    }
}

fn multiset_subset(small: &[Flat], big: &[Flat]) -> bool {
    let mut pool: Vec<&Flat> = big.iter().collect();
    for s in small {
        match pool.iter().position(|b| *b == s) {
            Some(i) => {
                pool.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

fn multiset_difference(big: &[Flat], small: &[Flat]) -> Option<Vec<Flat>> {
    let mut pool: Vec<Flat> = big.to_vec();
    for s in small {
        let i = pool.iter().position(|b| b == s)?;
        pool.swap_remove(i);
    }
    Some(pool)
}

fn regroup(kind: OpKind, mut factors: Vec<Flat>) -> Term {
    factors.sort();
    crate::term::from_flat(&Flat::node(kind, factors))
}

struct Session<'a> {
    ctx: &'a Context,
    memo: HashMap<(Term, Term, usize), Option<Derivation>>,
}

impl<'a> Session<'a> {
    fn derive(&mut self, s: &Term, t: &Term, depth: usize) -> Option<Derivation> {
        let key = (ac_canonical(s), ac_canonical(t), depth);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        // Guard against cyclic re-entry through transitivity.
        self.memo.insert(key.clone(), None);
        let result = self.derive_uncached(s, t, depth);
        self.memo.insert(key, result.clone());
        result
    }

    fn derive_uncached(&mut self, s: &Term, t: &Term, depth: usize) -> Option<Derivation> {
        if equal_mod_ac(s, t) {
            return Some(Derivation::leaf(DerivationRule::Reflexivity, s, t));
        }
        if depth == 0 {
            return None;
        }

        // Views of the pair with defined names expanded on either side.
        let s_unf = self.ctx.unfold_all(s);
        let t_unf = self.ctx.unfold_all(t);
        let mut views: Vec<(Term, Term, bool)> = vec![(s.clone(), t.clone(), false)];
        if !equal_mod_ac(&s_unf, s) || !equal_mod_ac(&t_unf, t) {
            views.push((s_unf, t_unf, true));
        }

        for (vs, vt, expanded) in &views {
            if let Some(d) = self.direct(vs, vt, depth) {
                return Some(if *expanded {
                    Derivation {
                        conclusion: OrderFact::non_strict(s.clone(), t.clone()),
                        rule: DerivationRule::DefExpand,
                        premises: vec![d],
                    }
                } else {
                    d
                });
            }
        }

        // Transitivity through midpoints drawn from subterms of both sides
        // and definition bodies.
        let mut midpoints: Vec<Term> = Vec::new();
        let push_subterms = |t: &Term, midpoints: &mut Vec<Term>| {
            for pos in t.positions() {
                let sub = t.subterm_at(&pos).expect("enumerated position");
                let canon = ac_canonical(sub);
                if !midpoints.contains(&canon) {
                    midpoints.push(canon);
                }
            }
        };
        push_subterms(s, &mut midpoints);
        push_subterms(t, &mut midpoints);
        for (name, body) in self.ctx.definitions() {
            let var = Term::var(name.clone());
            if !midpoints.contains(&var) {
                midpoints.push(var);
            }
            let canon = ac_canonical(body);
            if !midpoints.contains(&canon) {
                midpoints.push(canon);
            }
        }
        for mid in midpoints {
            if equal_mod_ac(&mid, s) || equal_mod_ac(&mid, t) {
                continue;
            }
            if let Some(left) = self.derive(s, &mid, depth - 1) {
                if let Some(right) = self.derive(&mid, t, depth - 1) {
                    return Some(Derivation {
                        conclusion: OrderFact::non_strict(s.clone(), t.clone()),
                        rule: DerivationRule::Transitivity,
                        premises: vec![left, right],
                    });
                }
            }
        }
        None
    }

    /// Non-transitivity rules on one view of the pair.
    fn direct(&mut self, s: &Term, t: &Term, depth: usize) -> Option<Derivation> {
        if equal_mod_ac(s, t) {
            return Some(Derivation::leaf(DerivationRule::Reflexivity, s, t));
        }
        for fact in &self.ctx.hypotheses {
            let direct_match = equal_mod_ac(s, &fact.lhs) && equal_mod_ac(t, &fact.rhs);
            let expanded_match = equal_mod_ac(&self.ctx.unfold_all(s), &self.ctx.unfold_all(&fact.lhs))
                && equal_mod_ac(&self.ctx.unfold_all(t), &self.ctx.unfold_all(&fact.rhs));
            if direct_match || expanded_match {
                return Some(Derivation::leaf(DerivationRule::Hypothesis, s, t));
            }
        }
        // MeetLower: s = t /\ u modulo AC.
        let s_meet = factor_multiset(s, OpKind::Meet);
        let t_meet = factor_multiset(t, OpKind::Meet);
        if t_meet.len() < s_meet.len() && multiset_subset(&t_meet, &s_meet) {
            return Some(Derivation::leaf(DerivationRule::MeetLower, s, t));
        }
        // JoinUpper: t = s \/ u modulo AC.
        let s_join = factor_multiset(s, OpKind::Join);
        let t_join = factor_multiset(t, OpKind::Join);
        if s_join.len() < t_join.len() && multiset_subset(&s_join, &t_join) {
            return Some(Derivation::leaf(DerivationRule::JoinUpper, s, t));
        }
        // Monotonicity: s = x ∘ u, t = y ∘ u with x <= y.
        if depth > 0 {
            for kind in [OpKind::Meet, OpKind::Join] {
                let fs = factor_multiset(s, kind);
                let ft = factor_multiset(t, kind);
                if fs.len() < 2 && ft.len() < 2 {
                    continue;
                }
                let mut common: Vec<Flat> = Vec::new();
                {
                    let mut pool = ft.clone();
                    for f in &fs {
                        if let Some(i) = pool.iter().position(|g| g == f) {
                            pool.swap_remove(i);
                            common.push(f.clone());
                        }
                    }
                }
                if common.is_empty() {
                    continue;
                }
                let rest_s = multiset_difference(&fs, &common)?;
                let rest_t = multiset_difference(&ft, &common)?;
                if rest_s.is_empty() || rest_t.is_empty() {
                    continue;
                }
                let x = regroup(kind, rest_s);
                let y = regroup(kind, rest_t);
                if let Some(inner) = self.derive(&x, &y, depth - 1) {
                    return Some(Derivation {
                        conclusion: OrderFact::non_strict(s.clone(), t.clone()),
                        rule: DerivationRule::Monotonicity,
                        premises: vec![inner],
                    });
                }
            }
        }
        None
    }
}

/// Derive `s <= t` within the given depth budget, or return `None`.
///
/// `not-derivable` is a normal outcome; passing `depth = 0` is a misuse and
/// also returns `None`.
pub fn derive_leq(ctx: &Context, s: &Term, t: &Term, depth: usize) -> Option<Derivation> {
    if depth == 0 {
        return None;
    }
    let mut session = Session { ctx, memo: HashMap::new() };
    session.derive(s, t, depth)
}

/// Discharge the side condition of an M-family instance: `c <= a` for the
/// primal forms, `a <= c` for the dual ones.
pub fn check_side_condition(
    ctx: &Context,
    inst: &crate::rules::RuleInstance,
) -> Option<Derivation> {
    match &inst.app {
        crate::rules::RuleApp::Schema { id, form, bindings, .. } if id.is_m_family() => {
            let side = if *form == OpKind::Meet {
                crate::rules::SideCondition::CLeqA
            } else {
                crate::rules::SideCondition::ALeqC
            };
            let (lo, hi) = crate::rules::side_condition_terms(side, bindings)?;
            derive_leq(ctx, &lo, &hi, DEFAULT_DEPTH)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn reflexivity_at_depth_one() {
        let ctx = Context::new();
        let d = derive_leq(&ctx, &t("a /\\ b"), &t("b /\\ a"), 1).unwrap();
        assert_eq!(d.rule, DerivationRule::Reflexivity);
    }

    #[test]
    fn hypothesis_at_depth_one() {
        let mut ctx = Context::new();
        ctx.add_hypothesis(OrderFact::strict(Term::var("p"), Term::var("q")));
        let d = derive_leq(&ctx, &Term::var("p"), &Term::var("q"), 1).unwrap();
        assert_eq!(d.rule, DerivationRule::Hypothesis);
    }

    #[test]
    fn transitivity_through_meet_and_join() {
        // f /\ d <= f <= e \/ f
        let ctx = Context::new();
        let d = derive_leq(&ctx, &t("f /\\ d"), &t("e \\/ f"), 3).unwrap();
        assert_eq!(d.rule, DerivationRule::Transitivity);
        assert_eq!(d.premises[0].rule, DerivationRule::MeetLower);
        assert_eq!(d.premises[1].rule, DerivationRule::JoinUpper);
    }

    #[test]
    fn transitivity_via_shared_variable() {
        // d /\ f <= d <= d \/ (e /\ f)
        let ctx = Context::new();
        let d = derive_leq(&ctx, &t("d /\\ f"), &t("d \\/ (e /\\ f)"), 3).unwrap();
        assert_eq!(d.rule, DerivationRule::Transitivity);
    }

    #[test]
    fn independent_variables_not_derivable() {
        let ctx = Context::new();
        assert!(derive_leq(&ctx, &Term::var("d"), &Term::var("e"), 5).is_none());
    }

    #[test]
    fn meet_lower_handles_commuted_factors() {
        let ctx = Context::new();
        let d = derive_leq(&ctx, &t("f /\\ d"), &Term::var("d"), 1).unwrap();
        assert_eq!(d.rule, DerivationRule::MeetLower);
    }

    #[test]
    fn join_upper_with_multiset_factors() {
        // (d /\ e) \/ (f /\ d) <= (d /\ e) \/ (e /\ f) \/ (f /\ d)
        let ctx = Context::new();
        let d = derive_leq(
            &ctx,
            &t("(d /\\ e) \\/ (f /\\ d)"),
            &t("(d /\\ e) \\/ (e /\\ f) \\/ (f /\\ d)"),
            2,
        )
        .unwrap();
        assert_eq!(d.rule, DerivationRule::JoinUpper);
    }

    #[test]
    fn def_expansion_reaches_hypothesis_and_bodies() {
        let mut ctx = Context::new();
        ctx.define("p", t("(d /\\ e) \\/ (e /\\ f) \\/ (f /\\ d)")).unwrap();
        ctx.add_hypothesis(OrderFact::strict(Term::var("p"), Term::var("q")));
        // (d /\ e) \/ (f /\ d) <= p needs the definition of p.
        let d = derive_leq(&ctx, &t("(d /\\ e) \\/ (f /\\ d)"), &Term::var("p"), 3).unwrap();
        assert_eq!(d.rule, DerivationRule::DefExpand);
        // The unfolded hypothesis is also usable.
        let body = t("(d /\\ e) \\/ (e /\\ f) \\/ (f /\\ d)");
        assert!(derive_leq(&ctx, &body, &Term::var("q"), 2).is_some());
    }

    #[test]
    fn monotonicity_descends_into_shared_factor() {
        // d /\ x <= (d \/ e) /\ x needs d <= d \/ e under the shared x.
        let ctx = Context::new();
        let d = derive_leq(&ctx, &t("d /\\ x"), &t("(d \\/ e) /\\ x"), 3).unwrap();
        assert!(matches!(
            d.rule,
            DerivationRule::Monotonicity | DerivationRule::Transitivity
        ));
    }

    #[test]
    fn monotone_in_depth() {
        let ctx = Context::new();
        let s = t("f /\\ d");
        let u = t("e \\/ f");
        for depth in 3..=8 {
            assert!(derive_leq(&ctx, &s, &u, depth).is_some(), "depth {depth}");
        }
    }
}
