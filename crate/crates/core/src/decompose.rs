//! Expansion of compound proof steps into single-rule chains, and the
//! resulting proof poset (a chain ordered from the unfolded start of the
//! goal down to its right-hand side).
//!
//! Each script step is decomposed by an anchored search: the cited non-AC
//! rules must fire in citation order, node-exactly, with shortest L1/L2
//! glue in between; the budget caps the glue depth of each segment. A step
//! that is pure glue (only associativity/commutativity cited) becomes a
//! direct shortest path. The concatenation over steps, with shared
//! endpoints deduplicated, is the decomposed proof.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::rules::{enumerate_rewrites, Context, RuleId, RuleInstance};
use crate::script::{
    compose_step, resolve_citation, verify_script, Justification, Mode, ProofScript,
};
use crate::term::{to_flat, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("budget must be at least 1")]
    BadBudget,
    #[error("script `{0}` does not verify in lenient mode")]
    NotVerified(String),
    #[error("step {step} is not decomposable within budget {budget}")]
    StepUndecomposable { step: usize, budget: usize },
}

/// A proof refined to one rule per transition.
#[derive(Debug, Clone)]
pub struct DecomposedProof {
    pub name: String,
    /// First statement is the unfolded start (the first displayed step when
    /// the proof opens by unfolding definitions of the goal), last is the
    /// goal right-hand side.
    pub statements: Vec<Term>,
    /// One rule per consecutive statement pair.
    pub edges: Vec<RuleInstance>,
    /// Definition unfoldings folded into the top statement (the transition
    /// from the goal left-hand side to the first statement).
    pub lead_in: Vec<(RuleInstance, Term)>,
    pub goal: (Term, Term),
}

/// The chain poset of a decomposed proof, top (unfolded start) to bottom.
#[derive(Debug, Clone)]
pub struct ProofPoset {
    pub vertices: Vec<Term>,
    /// Label of the covering relation `vertices[i] > vertices[i+1]`.
    pub labels: Vec<RuleId>,
}

impl ProofPoset {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Plain-text cover list.
    pub fn cover_list(&self) -> String {
        let mut out = String::new();
        out.push_str("vertices:\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!("v{}: {}\n", i + 1, v));
        }
        out.push_str("covers:\n");
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("v{} > v{} : {}\n", i + 1, i + 2, label));
        }
        out
    }
}

type Chain = Vec<(RuleInstance, Term)>;

fn glue_rules() -> BTreeSet<RuleId> {
    [RuleId::L1, RuleId::L2].into_iter().collect()
}

/// Shortest chain of single-rule rewrites from `from` to `to` over the
/// allowed rules (all rules when `None`), found by breadth-first search up
/// to `budget` rewrites. `Ok(None)` when no chain exists within budget.
pub fn decompose_step(
    from: &Term,
    to: &Term,
    allowed: Option<&BTreeSet<RuleId>>,
    ctx: &Context,
    budget: usize,
) -> Result<Option<Chain>, DecomposeError> {
    if budget == 0 {
        return Err(DecomposeError::BadBudget);
    }
    let all: BTreeSet<RuleId> = RuleId::ALL.into_iter().collect();
    let rules = allowed.unwrap_or(&all);
    if from == to {
        return Ok(Some(Vec::new()));
    }
    let mut parents: HashMap<Term, (Term, RuleInstance)> = HashMap::new();
    let mut frontier: Vec<Term> = vec![from.clone()];
    for _level in 0..budget {
        let mut next_frontier: Vec<Term> = Vec::new();
        for term in &frontier {
            for (inst, next) in enumerate_rewrites(term, ctx, rules) {
                if next == *from || parents.contains_key(&next) {
                    continue;
                }
                parents.insert(next.clone(), (term.clone(), inst));
                if next == *to {
                    return Ok(Some(reconstruct(from, to, &parents)));
                }
                next_frontier.push(next);
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        frontier = next_frontier;
    }
    Ok(None)
}

fn reconstruct(from: &Term, to: &Term, parents: &HashMap<Term, (Term, RuleInstance)>) -> Chain {
    let mut chain = Vec::new();
    let mut cur = to.clone();
    while cur != *from {
        let (prev, inst) = parents.get(&cur).expect("parent chain").clone();
        chain.push((inst, cur));
        cur = prev;
    }
    chain.reverse();
    chain
}

// ---------------------------------------------------------------------------
// Anchored per-step search
// ---------------------------------------------------------------------------

/// Shortest-total chain from `from` to `to` that fires the cited non-AC
/// rules in order with L1/L2 glue between them; each glue run is capped at
/// `glue_cap` moves.
fn search_chain(
    from: &Term,
    to: &Term,
    citations: &[&Justification],
    ctx: &Context,
    glue_cap: usize,
) -> Option<Chain> {
    let effective: Vec<&&Justification> = citations
        .iter()
        .filter(|j| !matches!(j, Justification::Rule { id, .. } if id.is_ac()))
        .collect();
    let mut frontier: BTreeMap<Term, Chain> = BTreeMap::new();
    frontier.insert(from.clone(), Vec::new());
    for cit in effective {
        let compiled = compile_citation(cit, ctx)?;
        let seed = match cit {
            Justification::Rule { bindings, .. } => bindings.clone(),
            _ => crate::rules::Bindings::new(),
        };
        frontier = advance_segment(&frontier, &compiled, &seed, ctx, glue_cap);
        if frontier.is_empty() {
            return None;
        }
    }
    glue_to_target(&frontier, to, ctx, glue_cap)
}

/// How far past the first firing the glue ball keeps growing: a costlier
/// arrangement before the fire can save moves afterwards, but never more
/// than the AC distance between fired variants.
const SEGMENT_SLACK: usize = 2;
/// Hard cap on explored arrangements per segment.
const STATE_CAP: usize = 200_000;

/// A citation pre-resolved against the context so that firing it at a term
/// costs no more than a subtree scan: fixed redex/replacement pairs for
/// fully-bound citations, pattern schemas for the open idempotency and
/// absorption forms. Side conditions are discharged once, here.
enum CompiledCitation {
    Fixed(Vec<(Term, Term, crate::rules::RuleApp)>),
    Patterns(Vec<(&'static crate::rules::Schema, crate::rules::Direction)>),
}

fn compile_citation(cit: &Justification, ctx: &Context) -> Option<CompiledCitation> {
    use crate::order;
    use crate::rules::{find_schema, Direction, RuleApp, SchemaVar, SideCondition};
    use crate::term::OpKind;
    match cit {
        Justification::Rule { id, bindings, form, reverse, .. } if id.is_m_family() => {
            let a = bindings.get(&SchemaVar::A)?;
            let c = bindings.get(&SchemaVar::C)?;
            bindings.get(&SchemaVar::B)?;
            let forms = match form {
                Some(f) => vec![*f],
                None => vec![OpKind::Meet, OpKind::Join],
            };
            let mut fires = Vec::new();
            for f in forms {
                let side = if f == OpKind::Meet { SideCondition::CLeqA } else { SideCondition::ALeqC };
                let (lo, hi) = match side {
                    SideCondition::CLeqA => (c, a),
                    SideCondition::ALeqC => (a, c),
                };
                if order::derive_leq(ctx, lo, hi, order::DEFAULT_DEPTH).is_none() {
                    continue;
                }
                let schema = find_schema(*id, f)?;
                let dirs = if *reverse {
                    vec![Direction::Reverse]
                } else {
                    vec![Direction::Forward, Direction::Reverse]
                };
                for dir in dirs {
                    let (src, dst) = match dir {
                        Direction::Forward => (&schema.lhs, &schema.rhs),
                        Direction::Reverse => (&schema.rhs, &schema.lhs),
                    };
                    let redex = src.instantiate(bindings)?;
                    let repl = dst.instantiate(bindings)?;
                    fires.push((
                        redex,
                        repl,
                        RuleApp::Schema { id: *id, form: f, direction: dir, bindings: bindings.clone() },
                    ));
                }
            }
            Some(CompiledCitation::Fixed(fires))
        }
        Justification::Rule { id, bindings, reverse, .. } => {
            // L3 / L4; open schema variables are resolved during the scan.
            let mut pats = Vec::new();
            let dirs = if *reverse {
                vec![Direction::Reverse]
            } else {
                vec![Direction::Forward, Direction::Reverse]
            };
            for f in [OpKind::Meet, OpKind::Join] {
                if let Some(schema) = find_schema(*id, f) {
                    for dir in &dirs {
                        pats.push((schema, *dir));
                    }
                }
            }
            let _ = bindings;
            Some(CompiledCitation::Patterns(pats))
        }
        Justification::Def { name, direction, .. } => {
            let body = ctx.definition(name)?.clone();
            let var = Term::var(name.clone());
            let mut fires = Vec::new();
            let dirs = match direction {
                Some(d) => vec![*d],
                None => vec![Direction::Forward, Direction::Reverse],
            };
            for dir in dirs {
                let (redex, repl) = match dir {
                    Direction::Forward => (var.clone(), body.clone()),
                    Direction::Reverse => (body.clone(), var.clone()),
                };
                fires.push((redex, repl, RuleApp::Def { name: name.clone(), direction: dir }));
            }
            Some(CompiledCitation::Fixed(fires))
        }
        Justification::Order { fact, .. } => {
            order::derive_leq(ctx, &fact.lhs, &fact.rhs, order::DEFAULT_DEPTH)?;
            let nf = crate::order::OrderFact::non_strict(fact.lhs.clone(), fact.rhs.clone());
            let mut fires = Vec::new();
            for op in [OpKind::Join, OpKind::Meet] {
                let combined = Term::op(op, fact.lhs.clone(), fact.rhs.clone());
                let collapsed = match op {
                    OpKind::Join => fact.rhs.clone(),
                    OpKind::Meet => fact.lhs.clone(),
                };
                for dir in [Direction::Forward, Direction::Reverse] {
                    let (redex, repl) = match dir {
                        Direction::Forward => (combined.clone(), collapsed.clone()),
                        Direction::Reverse => (collapsed.clone(), combined.clone()),
                    };
                    fires.push((redex, repl, RuleApp::Order { fact: nf.clone(), op, direction: dir }));
                }
            }
            Some(CompiledCitation::Fixed(fires))
        }
    }
}

impl CompiledCitation {
    /// All node-exact firings on `t`, in deterministic order.
    fn fire(&self, t: &Term, bindings_seed: &crate::rules::Bindings) -> Vec<(RuleInstance, Term)> {
        let mut out = Vec::new();
        match self {
            CompiledCitation::Fixed(fires) => {
                for pos in t.positions() {
                    let sub = t.subterm_at(&pos).expect("enumerated position");
                    for (redex, repl, app) in fires {
                        if sub == redex {
                            let next = t.replace_at(&pos, repl.clone()).expect("valid position");
                            out.push((
                                RuleInstance { app: app.clone(), position: pos.clone() },
                                next,
                            ));
                        }
                    }
                }
            }
            CompiledCitation::Patterns(pats) => {
                for pos in t.positions() {
                    let sub = t.subterm_at(&pos).expect("enumerated position");
                    for (schema, dir) in pats {
                        let (src, dst) = match dir {
                            crate::rules::Direction::Forward => (&schema.lhs, &schema.rhs),
                            crate::rules::Direction::Reverse => (&schema.rhs, &schema.lhs),
                        };
                        let mut b = bindings_seed.clone();
                        if !src.matches(sub, &mut b) {
                            continue;
                        }
                        let Some(repl) = dst.instantiate(&b) else { continue };
                        let next = t.replace_at(&pos, repl).expect("valid position");
                        out.push((
                            RuleInstance {
                                app: crate::rules::RuleApp::Schema {
                                    id: schema.id,
                                    form: schema.form,
                                    direction: *dir,
                                    bindings: b,
                                },
                                position: pos.clone(),
                            },
                            next,
                        ));
                    }
                }
            }
        }
        out
    }
}

struct SearchNode {
    term: Term,
    cost: usize,
    glue_depth: usize,
    parent: Option<(usize, RuleInstance)>,
    root: usize,
}

struct GlueSearch<'a> {
    nodes: Vec<SearchNode>,
    index: HashMap<Term, usize>,
    buckets: BTreeMap<usize, Vec<usize>>,
    source_chains: Vec<&'a Chain>,
}

impl<'a> GlueSearch<'a> {
    fn seed(sources: &'a BTreeMap<Term, Chain>) -> GlueSearch<'a> {
        let mut search = GlueSearch {
            nodes: Vec::new(),
            index: HashMap::new(),
            buckets: BTreeMap::new(),
            source_chains: Vec::new(),
        };
        for (term, chain) in sources {
            let root = search.source_chains.len();
            search.source_chains.push(chain);
            let id = search.nodes.len();
            search.nodes.push(SearchNode {
                term: term.clone(),
                cost: chain.len(),
                glue_depth: 0,
                parent: None,
                root,
            });
            search.index.insert(term.clone(), id);
            search.buckets.entry(chain.len()).or_default().push(id);
        }
        search
    }

    fn chain_to(&self, id: usize) -> Chain {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some((pid, inst)) = self.nodes[cur].parent.clone() {
            steps.push((inst, self.nodes[cur].term.clone()));
            cur = pid;
        }
        steps.reverse();
        let mut chain = self.source_chains[self.nodes[cur].root].clone();
        chain.extend(steps);
        chain
    }

    fn expand(&mut self, id: usize, ctx: &Context, glue: &BTreeSet<RuleId>, glue_cap: usize) {
        let (term, cost, depth, root) = {
            let n = &self.nodes[id];
            (n.term.clone(), n.cost, n.glue_depth, n.root)
        };
        if depth >= glue_cap || self.nodes.len() >= STATE_CAP {
            return;
        }
        for (inst, next) in enumerate_rewrites(&term, ctx, glue) {
            if self.index.contains_key(&next) {
                continue; // first arrival is minimal under bucket order
            }
            let nid = self.nodes.len();
            self.nodes.push(SearchNode {
                term: next.clone(),
                cost: cost + 1,
                glue_depth: depth + 1,
                parent: Some((id, inst)),
                root,
            });
            self.index.insert(next, nid);
            self.buckets.entry(cost + 1).or_default().push(nid);
        }
    }
}

/// Multi-source shortest-path over glue moves; at every reached arrangement
/// the citation fires node-exactly, producing the next anchor frontier.
fn advance_segment(
    sources: &BTreeMap<Term, Chain>,
    cit: &CompiledCitation,
    seed: &crate::rules::Bindings,
    ctx: &Context,
    glue_cap: usize,
) -> BTreeMap<Term, Chain> {
    let glue = glue_rules();
    let mut search = GlueSearch::seed(sources);
    let mut fired: BTreeMap<Term, Chain> = BTreeMap::new();
    let mut first_fire: Option<usize> = None;
    while let Some((&cost, _)) = search.buckets.iter().next() {
        if let Some(ff) = first_fire {
            if cost > ff + SEGMENT_SLACK {
                break;
            }
        }
        let ids = search.buckets.remove(&cost).unwrap();
        for id in ids {
            for (inst, result) in cit.fire(&search.nodes[id].term, seed) {
                let better = match fired.get(&result) {
                    Some(existing) => existing.len() > cost + 1,
                    None => true,
                };
                if better {
                    let mut chain = search.chain_to(id);
                    chain.push((inst, result.clone()));
                    fired.insert(result, chain);
                    first_fire.get_or_insert(cost);
                }
            }
            search.expand(id, ctx, &glue, glue_cap);
        }
    }
    fired
}

/// Cheapest glue path from any source to the exact target term.
fn glue_to_target(
    sources: &BTreeMap<Term, Chain>,
    to: &Term,
    ctx: &Context,
    glue_cap: usize,
) -> Option<Chain> {
    let glue = glue_rules();
    let mut search = GlueSearch::seed(sources);
    while let Some((&cost, _)) = search.buckets.iter().next() {
        let ids = search.buckets.remove(&cost).unwrap();
        for id in ids {
            if search.nodes[id].term == *to {
                return Some(search.chain_to(id));
            }
            search.expand(id, ctx, &glue, glue_cap);
        }
    }
    None
}

/// Decompose every step of a lenient-verified script into single-rule
/// chains. The budget caps the glue depth of each anchored segment.
pub fn decompose_proof(
    script: &ProofScript,
    budget: usize,
) -> Result<DecomposedProof, DecomposeError> {
    if budget == 0 {
        return Err(DecomposeError::BadBudget);
    }
    if !verify_script(script, Mode::Lenient).accepted() {
        return Err(DecomposeError::NotVerified(script.name.clone()));
    }
    let ctx = &script.context;
    let mut statements: Vec<Term> = Vec::new();
    let mut edges: Vec<RuleInstance> = Vec::new();
    let mut lead_in: Chain = Vec::new();
    let mut prev = script.goal.0.clone();
    if script.steps.is_empty() {
        let chain = search_chain(&script.goal.0, &script.goal.1, &[], ctx, budget)
            .ok_or(DecomposeError::StepUndecomposable { step: 1, budget })?;
        statements.push(prev.clone());
        for (inst, term) in chain {
            edges.push(inst);
            statements.push(term);
        }
        return Ok(DecomposedProof {
            name: script.name.clone(),
            statements,
            edges,
            lead_in,
            goal: script.goal.clone(),
        });
    }
    let last = script.steps.len() - 1;
    for (i, step) in script.steps.iter().enumerate() {
        let justs: Vec<&Justification> = step.justifications.iter().collect();
        let opens_by_unfolding = i == 0
            && !step.justifications.is_empty()
            && step
                .justifications
                .iter()
                .all(|j| matches!(j, Justification::Def { .. }));
        if opens_by_unfolding {
            // The unfolded start is the top statement; the unfold chain is
            // kept but contributes no covering edges.
            lead_in = search_chain(&prev, &step.term, &justs, ctx, budget).ok_or(
                DecomposeError::StepUndecomposable { step: i + 1, budget },
            )?;
            statements.push(step.term.clone());
            prev = step.term.clone();
            continue;
        }
        if statements.is_empty() {
            statements.push(prev.clone());
        }
        let chain = if i == last {
            // The final step may pass through its stated term and close on
            // the goal right-hand side; split at the first prefix of the
            // composition that reaches the stated term.
            let composed = compose_step(ctx, &prev, &step.justifications)
                .map_err(|_| DecomposeError::NotVerified(script.name.clone()))?;
            let step_flat = to_flat(&step.term);
            let touch = composed
                .frontiers
                .iter()
                .position(|f| f.contains(&step_flat))
                .ok_or(DecomposeError::StepUndecomposable { step: i + 1, budget })?;
            let mut chain = search_chain(&prev, &step.term, &justs[..touch], ctx, budget)
                .ok_or(DecomposeError::StepUndecomposable { step: i + 1, budget })?;
            let closing = search_chain(&step.term, &script.goal.1, &justs[touch..], ctx, budget)
                .ok_or(DecomposeError::StepUndecomposable { step: i + 1, budget })?;
            chain.extend(closing);
            chain
        } else {
            search_chain(&prev, &step.term, &justs, ctx, budget)
                .ok_or(DecomposeError::StepUndecomposable { step: i + 1, budget })?
        };
        for (inst, term) in chain {
            edges.push(inst);
            statements.push(term);
        }
        prev = step.term.clone();
    }
    Ok(DecomposedProof {
        name: script.name.clone(),
        statements,
        edges,
        lead_in,
        goal: script.goal.clone(),
    })
}

/// The chain poset of a decomposed proof.
pub fn build_poset(d: &DecomposedProof) -> ProofPoset {
    ProofPoset {
        vertices: d.statements.clone(),
        labels: d.edges.iter().map(RuleInstance::rule_id).collect(),
    }
}

/// Emit the fully decomposed proof in the script grammar, one rule per
/// step, suitable for strict re-verification.
pub fn emit_script(d: &DecomposedProof, original: &ProofScript) -> String {
    let mut out = String::new();
    out.push_str(&format!("# fully decomposed from {}\n", d.name));
    out.push_str(&format!("proof {}\n", d.name));
    for (name, body) in original.context.definitions() {
        out.push_str(&format!("def {name} := {body}\n"));
    }
    for hyp in &original.context.hypotheses {
        out.push_str(&format!("hyp {hyp}\n"));
    }
    out.push_str(&format!("goal {} = {}\n", d.goal.0, d.goal.1));
    // The lead-in ends exactly at statements[0]; every later statement is
    // reached by one edge.
    for (inst, term) in &d.lead_in {
        out.push_str(&format!("step {term} by {inst}\n"));
    }
    for (k, stmt) in d.statements.iter().enumerate().skip(1) {
        out.push_str(&format!("step {stmt} by {}\n", d.edges[k - 1]));
    }
    out.push_str("qed\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn single_absorption_step() {
        let ctx = Context::new();
        let from = parse_term("d /\\ (d \\/ e)").unwrap();
        let to = parse_term("d").unwrap();
        let allowed: BTreeSet<RuleId> = [RuleId::L4].into_iter().collect();
        let chain = decompose_step(&from, &to, Some(&allowed), &ctx, 2)
            .unwrap()
            .unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain[0].0.rule_id(), RuleId::L4);
    }

    #[test]
    fn budget_zero_is_an_input_error() {
        let ctx = Context::new();
        let t = parse_term("d").unwrap();
        assert!(matches!(
            decompose_step(&t, &t, None, &ctx, 0),
            Err(DecomposeError::BadBudget)
        ));
    }

    #[test]
    fn unreachable_within_budget_is_none() {
        let ctx = Context::new();
        let from = parse_term("(a /\\ a) /\\ (a /\\ a)").unwrap();
        let to = parse_term("a").unwrap();
        // needs three contractions; budget 1 cannot reach it
        let allowed: BTreeSet<RuleId> = [RuleId::L3].into_iter().collect();
        assert!(decompose_step(&from, &to, Some(&allowed), &ctx, 1)
            .unwrap()
            .is_none());
        assert!(decompose_step(&from, &to, Some(&allowed), &ctx, 3)
            .unwrap()
            .is_some());
    }
}
