//! Proof scripts: the line-oriented file format, and the step verifier.
//!
//! A script declares definitions and order hypotheses, states one goal
//! equation, and lists steps. Each step gives the next term and a
//! justification list. Strict verification demands exactly one node-exact
//! rule application per step; lenient verification composes the cited rules
//! in order modulo associativity/commutativity, so unmentioned A/C shuffles
//! are tolerated and L1/L2 citations are absorbed into the comparison.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::acrewrite::{absorption_contractions, idempotency_contractions, replace_occurrences};
use crate::order::{self, Derivation, OrderFact};
use crate::rules::{
    apply_rule, find_schema, Bindings, Context, ContextError, Direction, Pat, RuleApp, RuleId,
    RuleInstance, SchemaVar,
};
use crate::term::{
    lex_line, to_flat, Flat, OpKind, Position, SpannedTok, Term, TermError, Tok, TokStream,
};

/// One cited rule in a step's justification list. Positions and bindings may
/// be partial; strict verification resolves them against the step pair,
/// lenient verification searches modulo AC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Rule {
        id: RuleId,
        position: Option<Position>,
        bindings: Bindings,
        /// `Some(Join)` selects the dual (join-primal) modular forms.
        form: Option<OpKind>,
        reverse: bool,
    },
    Def {
        name: String,
        position: Option<Position>,
        direction: Option<Direction>,
    },
    Order {
        fact: OrderFact,
        position: Option<Position>,
    },
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Rule { id, position, bindings, form, reverse } => {
                write!(f, "{id}")?;
                if let Some(p) = position {
                    write!(f, " at {p}")?;
                }
                if *form == Some(OpKind::Join) && id.is_m_family() {
                    write!(f, " dual")?;
                }
                if *reverse {
                    write!(f, " reverse")?;
                }
                if !bindings.is_empty() {
                    let parts: Vec<String> = bindings
                        .iter()
                        .map(|(v, t)| format!("{} := {}", v.name(), t))
                        .collect();
                    write!(f, " with {}", parts.join(", "))?;
                }
                Ok(())
            }
            Justification::Def { name, position, direction } => {
                write!(f, "Def {name}")?;
                if let Some(p) = position {
                    write!(f, " at {p}")?;
                }
                match direction {
                    Some(Direction::Forward) => write!(f, " unfold"),
                    Some(Direction::Reverse) => write!(f, " fold"),
                    None => Ok(()),
                }
            }
            Justification::Order { fact, position } => {
                write!(f, "Order {} <= {}", fact.lhs, fact.rhs)?;
                if let Some(p) = position {
                    write!(f, " at {p}")?;
                }
                Ok(())
            }
        }
    }
}

/// One proof step: the term reached and how.
#[derive(Debug, Clone)]
pub struct Step {
    pub term: Term,
    /// Verbatim source text of the term, brackets preserved; this is what
    /// the proof-count metric counts.
    pub text: String,
    pub justifications: Vec<Justification>,
}

/// A parsed proof script.
#[derive(Debug, Clone)]
pub struct ProofScript {
    pub name: String,
    pub context: Context,
    pub goal: (Term, Term),
    pub goal_lhs_text: String,
    pub goal_rhs_text: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("line {line}: unknown rule id `{name}`")]
    UnknownRule { line: usize, name: String },
    #[error("line {line}: malformed binding: {msg}")]
    MalformedBinding { line: usize, msg: String },
    #[error("script has no `goal` line")]
    MissingGoal,
    #[error("line {line}: {source}")]
    Context { line: usize, source: ContextError },
    #[error("bundled file `{file}` failed its integrity check")]
    CorpusIntegrity { file: String },
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct LineParser<'a> {
    st: TokStream<'a>,
    src: &'a str,
    line_no: usize,
}

impl<'a> LineParser<'a> {
    fn keyword(&mut self) -> Option<String> {
        match self.st.peek() {
            Some(SpannedTok { tok: Tok::Ident(w), .. }) => {
                let w = w.clone();
                self.st.next_tok();
                Some(w)
            }
            _ => None,
        }
    }

    /// Parse a term and return it with its verbatim source slice.
    fn term_with_text(&mut self) -> Result<(Term, String), ScriptError> {
        let start_tok = self.st.pos;
        let term = self.st.parse_term()?;
        let end_tok = self.st.pos;
        let start = self.st.toks[start_tok].start;
        let end = self.st.toks[end_tok - 1].end;
        Ok((term, self.src[start..end].to_string()))
    }

    fn err(&self, msg: impl Into<String>) -> ScriptError {
        ScriptError::Line { line: self.line_no, msg: msg.into() }
    }

    fn expect_ident(&mut self, want: &str) -> Result<(), ScriptError> {
        match self.st.next_tok() {
            Some(SpannedTok { tok: Tok::Ident(w), .. }) if w == want => Ok(()),
            _ => Err(self.err(format!("expected `{want}`"))),
        }
    }

    fn parse_position(&mut self) -> Result<Position, ScriptError> {
        match self.st.next_tok() {
            Some(SpannedTok { tok: Tok::Open('['), .. }) => {}
            _ => return Err(self.err("expected `[` after `at`")),
        }
        let mut path = Vec::new();
        loop {
            match self.st.next_tok().cloned() {
                Some(SpannedTok { tok: Tok::Close(']'), .. }) => break,
                Some(SpannedTok { tok: Tok::Number(n), .. }) => {
                    for d in n.chars() {
                        let step = d.to_digit(10).unwrap() as u8;
                        if step != 1 && step != 2 {
                            return Err(self.err("position steps must be 1 or 2"));
                        }
                        path.push(step);
                    }
                    match self.st.peek() {
                        Some(SpannedTok { tok: Tok::Dot, .. }) => {
                            self.st.next_tok();
                        }
                        Some(SpannedTok { tok: Tok::Close(']'), .. }) => {}
                        _ => return Err(self.err("expected `.` or `]` in position")),
                    }
                }
                _ => return Err(self.err("expected digits or `]` in position")),
            }
        }
        Ok(Position::new(path))
    }

    fn parse_justification(&mut self) -> Result<Justification, ScriptError> {
        let name = match self.st.next_tok().cloned() {
            Some(SpannedTok { tok: Tok::RuleIdent(n), .. }) => n,
            Some(SpannedTok { tok, .. }) => {
                return Err(self.err(format!("expected a rule id, found {tok:?}")))
            }
            None => return Err(self.err("expected a rule id")),
        };
        if name == "Def" {
            let def_name = match self.st.next_tok().cloned() {
                Some(SpannedTok { tok: Tok::Ident(n), .. }) => n,
                _ => return Err(self.err("expected a defined name after `Def`")),
            };
            let mut position = None;
            let mut direction = None;
            while let Some(SpannedTok { tok: Tok::Ident(w), .. }) = self.st.peek() {
                match w.as_str() {
                    "at" => {
                        self.st.next_tok();
                        position = Some(self.parse_position()?);
                    }
                    "fold" => {
                        self.st.next_tok();
                        direction = Some(Direction::Reverse);
                    }
                    "unfold" => {
                        self.st.next_tok();
                        direction = Some(Direction::Forward);
                    }
                    _ => break,
                }
            }
            return Ok(Justification::Def { name: def_name, position, direction });
        }
        if name == "Order" {
            let (lhs, _) = self.term_with_text()?;
            let strict = match self.st.next_tok() {
                Some(SpannedTok { tok: Tok::Le, .. }) => false,
                Some(SpannedTok { tok: Tok::Lt, .. }) => true,
                _ => return Err(self.err("expected `<=` or `<` in Order justification")),
            };
            let (rhs, _) = self.term_with_text()?;
            let mut position = None;
            if let Some(SpannedTok { tok: Tok::Ident(w), .. }) = self.st.peek() {
                if w == "at" {
                    self.st.next_tok();
                    position = Some(self.parse_position()?);
                }
            }
            let fact = if strict { OrderFact::strict(lhs, rhs) } else { OrderFact::non_strict(lhs, rhs) };
            return Ok(Justification::Order { fact, position });
        }
        let id = RuleId::from_name(&name)
            .ok_or_else(|| ScriptError::UnknownRule { line: self.line_no, name: name.clone() })?;
        let mut position = None;
        let mut form = None;
        let mut reverse = false;
        let mut bindings = Bindings::new();
        while let Some(SpannedTok { tok: Tok::Ident(w), .. }) = self.st.peek() {
            match w.as_str() {
                "at" => {
                    self.st.next_tok();
                    position = Some(self.parse_position()?);
                }
                "dual" => {
                    self.st.next_tok();
                    form = Some(OpKind::Join);
                }
                "reverse" => {
                    self.st.next_tok();
                    reverse = true;
                }
                "with" => {
                    self.st.next_tok();
                    loop {
                        let key = match self.st.next_tok().cloned() {
                            Some(SpannedTok { tok: Tok::Ident(k), .. }) => {
                                SchemaVar::from_name(&k).ok_or_else(|| {
                                    ScriptError::MalformedBinding {
                                        line: self.line_no,
                                        msg: format!("unknown schema variable `{k}`"),
                                    }
                                })?
                            }
                            _ => {
                                return Err(ScriptError::MalformedBinding {
                                    line: self.line_no,
                                    msg: "expected a schema variable".into(),
                                })
                            }
                        };
                        match self.st.next_tok() {
                            Some(SpannedTok { tok: Tok::Assign, .. }) => {}
                            _ => {
                                return Err(ScriptError::MalformedBinding {
                                    line: self.line_no,
                                    msg: "expected `:=`".into(),
                                })
                            }
                        }
                        let (t, _) = self.term_with_text()?;
                        bindings.insert(key, t);
                        match self.st.peek() {
                            Some(SpannedTok { tok: Tok::Comma, .. }) => {
                                self.st.next_tok();
                            }
                            _ => break,
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(Justification::Rule { id, position, bindings, form, reverse })
    }
}

/// Parse a proof script.
pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    let mut name = None;
    let mut ctx = Context::new();
    let mut goal = None;
    let mut goal_texts = (String::new(), String::new());
    let mut steps: Vec<Step> = Vec::new();
    let mut saw_qed = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks = lex_line(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        if saw_qed {
            return Err(ScriptError::Line { line: line_no, msg: "content after `qed`".into() });
        }
        let mut lp = LineParser { st: TokStream::new(&toks, line_no), src: raw, line_no };
        let kw = lp
            .keyword()
            .ok_or_else(|| lp.err("expected a directive (proof/def/hyp/goal/step/qed)"))?;
        match kw.as_str() {
            "proof" => {
                let n = match lp.st.next_tok().cloned() {
                    Some(SpannedTok { tok: Tok::Ident(n), .. }) => n,
                    _ => return Err(lp.err("expected a name after `proof`")),
                };
                name = Some(n);
            }
            "def" => {
                let n = match lp.st.next_tok().cloned() {
                    Some(SpannedTok { tok: Tok::Ident(n), .. }) => n,
                    _ => return Err(lp.err("expected a name after `def`")),
                };
                match lp.st.next_tok() {
                    Some(SpannedTok { tok: Tok::Assign, .. }) => {}
                    _ => return Err(lp.err("expected `:=`")),
                }
                let (body, _) = lp.term_with_text()?;
                ctx.define(n, body)
                    .map_err(|source| ScriptError::Context { line: line_no, source })?;
            }
            "hyp" => {
                let (lhs, _) = lp.term_with_text()?;
                let strict = match lp.st.next_tok() {
                    Some(SpannedTok { tok: Tok::Le, .. }) => false,
                    Some(SpannedTok { tok: Tok::Lt, .. }) => true,
                    _ => return Err(lp.err("expected `<=` or `<`")),
                };
                let (rhs, _) = lp.term_with_text()?;
                ctx.add_hypothesis(if strict {
                    OrderFact::strict(lhs, rhs)
                } else {
                    OrderFact::non_strict(lhs, rhs)
                });
            }
            "goal" => {
                let (lhs, lhs_text) = lp.term_with_text()?;
                match lp.st.next_tok() {
                    Some(SpannedTok { tok: Tok::Equals, .. }) => {}
                    _ => return Err(lp.err("expected `=` in goal")),
                }
                let (rhs, rhs_text) = lp.term_with_text()?;
                goal = Some((lhs, rhs));
                goal_texts = (lhs_text, rhs_text);
            }
            "step" => {
                if goal.is_none() {
                    return Err(lp.err("`step` before `goal`"));
                }
                let (term, term_text) = lp.term_with_text()?;
                lp.expect_ident("by")?;
                let mut justifications = vec![lp.parse_justification()?];
                while let Some(SpannedTok { tok: Tok::Semi, .. }) = lp.st.peek() {
                    lp.st.next_tok();
                    justifications.push(lp.parse_justification()?);
                }
                if lp.st.peek().is_some() {
                    return Err(lp.err("trailing input after justification list"));
                }
                steps.push(Step { term, text: term_text, justifications });
            }
            "qed" => {
                saw_qed = true;
            }
            other => {
                return Err(lp.err(format!("unknown directive `{other}`")));
            }
        }
    }
    let goal = goal.ok_or(ScriptError::MissingGoal)?;
    Ok(ProofScript {
        name: name.unwrap_or_else(|| "unnamed".into()),
        context: ctx,
        goal,
        goal_lhs_text: goal_texts.0,
        goal_rhs_text: goal_texts.1,
        steps,
    })
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepStatus {
    Verified,
    RuleMismatch(String),
    SideConditionUnproven(String),
    ResidualDifference(String),
}

impl StepStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, StepStatus::Verified)
    }

    pub fn label(&self) -> &'static str {
        match self {
            StepStatus::Verified => "verified",
            StepStatus::RuleMismatch(_) => "rule-mismatch",
            StepStatus::SideConditionUnproven(_) => "side-condition-unproven",
            StepStatus::ResidualDifference(_) => "residual-difference",
        }
    }
}

/// One rule firing recorded while checking a step.
#[derive(Debug, Clone)]
pub struct Firing {
    pub rule: RuleId,
    /// True when the dual (join-primal) modular form fired.
    pub dual: bool,
    /// L1/L2 citations absorbed by AC-tolerant comparison.
    pub absorbed_ac: bool,
    pub detail: String,
    pub side_condition: Option<Derivation>,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub index: usize,
    pub status: StepStatus,
    pub fired: Vec<Firing>,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub mode: Mode,
    pub steps: Vec<StepReport>,
}

impl VerificationReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    /// Total M-family rule firings recorded over all steps.
    pub fn m_family_firings(&self) -> usize {
        self.steps
            .iter()
            .flat_map(|s| &s.fired)
            .filter(|f| f.rule.is_m_family() && !f.absorbed_ac)
            .count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verdict: {}\n",
            match self.verdict {
                Verdict::Accepted => "accepted",
                Verdict::Rejected => "rejected",
            }
        ));
        for s in &self.steps {
            out.push_str(&format!("step {}: {}", s.index, s.status.label()));
            match &s.status {
                StepStatus::Verified => {}
                StepStatus::RuleMismatch(m)
                | StepStatus::SideConditionUnproven(m)
                | StepStatus::ResidualDifference(m) => out.push_str(&format!(" ({m})")),
            }
            out.push('\n');
            for f in &s.fired {
                if f.absorbed_ac {
                    out.push_str(&format!("    {} absorbed into AC comparison\n", f.rule));
                } else {
                    out.push_str(&format!("    fired {}\n", f.detail));
                    if let Some(d) = &f.side_condition {
                        for line in d.render().lines() {
                            out.push_str(&format!("      {line}\n"));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Verify a script in strict or lenient mode. Failures are report entries,
/// not errors.
pub fn verify_script(script: &ProofScript, mode: Mode) -> VerificationReport {
    match mode {
        Mode::Strict => verify_strict(script),
        Mode::Lenient => verify_lenient(script),
    }
}

// --- strict ---------------------------------------------------------------

/// All fully-bound instances consistent with a citation that apply on `t`,
/// with their results, in deterministic order.
pub(crate) fn resolve_citation(
    t: &Term,
    just: &Justification,
    ctx: &Context,
) -> (Vec<(RuleInstance, Term)>, Option<StepStatus>) {
    let mut out = Vec::new();
    let mut side_failure = None;
    let positions: Vec<Position> = match citation_position(just) {
        Some(p) => vec![p.clone()],
        None => t.positions(),
    };
    match just {
        Justification::Rule { id, bindings, form, reverse, .. } => {
            let forms: Vec<OpKind> = match form {
                Some(f) => vec![*f],
                None => vec![OpKind::Meet, OpKind::Join],
            };
            let directions: Vec<Direction> = if *reverse {
                vec![Direction::Reverse]
            } else {
                vec![Direction::Forward, Direction::Reverse]
            };
            for pos in &positions {
                let Ok(sub) = t.subterm_at(pos) else { continue };
                for f in &forms {
                    let Some(schema) = find_schema(*id, *f) else { continue };
                    for dir in &directions {
                        let src: &Pat = match dir {
                            Direction::Forward => &schema.lhs,
                            Direction::Reverse => &schema.rhs,
                        };
                        let mut b = bindings.clone();
                        if !src.matches(sub, &mut b) {
                            continue;
                        }
                        let inst = RuleInstance {
                            app: RuleApp::Schema {
                                id: *id,
                                form: *f,
                                direction: *dir,
                                bindings: b,
                            },
                            position: pos.clone(),
                        };
                        match apply_rule(t, &inst, ctx) {
                            Ok(next) => out.push((inst, next)),
                            Err(crate::rules::RuleError::SideConditionUnproven(msg)) => {
                                side_failure.get_or_insert(StepStatus::SideConditionUnproven(msg));
                            }
                            Err(_) => {}
                        }
                    }
                }
            }
        }
        Justification::Def { name, direction, .. } => {
            let dirs = match direction {
                Some(d) => vec![*d],
                None => vec![Direction::Forward, Direction::Reverse],
            };
            for pos in &positions {
                for dir in &dirs {
                    let inst = RuleInstance {
                        app: RuleApp::Def { name: name.clone(), direction: *dir },
                        position: pos.clone(),
                    };
                    if let Ok(next) = apply_rule(t, &inst, ctx) {
                        out.push((inst, next));
                    }
                }
            }
        }
        Justification::Order { fact, .. } => {
            for pos in &positions {
                for op in [OpKind::Meet, OpKind::Join] {
                    for dir in [Direction::Forward, Direction::Reverse] {
                        let inst = RuleInstance {
                            app: RuleApp::Order {
                                fact: OrderFact::non_strict(fact.lhs.clone(), fact.rhs.clone()),
                                op,
                                direction: dir,
                            },
                            position: pos.clone(),
                        };
                        match apply_rule(t, &inst, ctx) {
                            Ok(next) => out.push((inst, next)),
                            Err(crate::rules::RuleError::SideConditionUnproven(msg)) => {
                                side_failure.get_or_insert(StepStatus::SideConditionUnproven(msg));
                            }
                            Err(_) => {}
                        }
                    }
                }
            }
        }
    }
    (out, side_failure)
}

fn citation_position(just: &Justification) -> Option<&Position> {
    match just {
        Justification::Rule { position, .. }
        | Justification::Def { position, .. }
        | Justification::Order { position, .. } => position.as_ref(),
    }
}

fn firing_for(inst: &RuleInstance, ctx: &Context) -> Firing {
    let side = order::check_side_condition(ctx, inst).or_else(|| match &inst.app {
        RuleApp::Order { fact, .. } => {
            order::derive_leq(ctx, &fact.lhs, &fact.rhs, order::DEFAULT_DEPTH)
        }
        _ => None,
    });
    let dual = matches!(
        &inst.app,
        RuleApp::Schema { id, form: OpKind::Join, .. } if id.is_m_family()
    );
    Firing {
        rule: inst.rule_id(),
        dual,
        absorbed_ac: false,
        detail: inst.to_string(),
        side_condition: side,
    }
}

fn verify_strict(script: &ProofScript) -> VerificationReport {
    let ctx = &script.context;
    let mut reports = Vec::new();
    let mut prev = script.goal.0.clone();
    let mut all_ok = true;
    for (i, step) in script.steps.iter().enumerate() {
        let index = i + 1;
        if step.justifications.len() != 1 {
            reports.push(StepReport {
                index,
                status: StepStatus::RuleMismatch(
                    "strict mode requires exactly one rule per step".into(),
                ),
                fired: Vec::new(),
            });
            all_ok = false;
            prev = step.term.clone();
            continue;
        }
        let just = &step.justifications[0];
        let (candidates, side_failure) = resolve_citation(&prev, just, ctx);
        let hit = candidates.iter().find(|(_, next)| *next == step.term);
        let report = match hit {
            Some((inst, _)) => StepReport {
                index,
                status: StepStatus::Verified,
                fired: vec![firing_for(inst, ctx)],
            },
            None => {
                all_ok = false;
                let status = if !candidates.is_empty() {
                    StepStatus::ResidualDifference(format!(
                        "no application of `{just}` yields the stated term"
                    ))
                } else if let Some(side) = side_failure {
                    side
                } else {
                    StepStatus::RuleMismatch(format!("`{just}` does not match"))
                };
                StepReport { index, status, fired: Vec::new() }
            }
        };
        reports.push(report);
        prev = step.term.clone();
    }
    if all_ok && prev != script.goal.1 {
        all_ok = false;
        reports.push(StepReport {
            index: script.steps.len() + 1,
            status: StepStatus::ResidualDifference(format!(
                "final term `{prev}` is not the goal right-hand side"
            )),
            fired: Vec::new(),
        });
    }
    VerificationReport {
        verdict: if all_ok { Verdict::Accepted } else { Verdict::Rejected },
        mode: Mode::Strict,
        steps: reports,
    }
}

// --- lenient ----------------------------------------------------------------

const FRONTIER_CAP: usize = 2048;

pub(crate) struct ComposedStep {
    /// Frontier of AC classes after each justification; index 0 is the start.
    pub frontiers: Vec<Vec<Flat>>,
    pub fired: Vec<Firing>,
}

/// Compose a step's justifications in order, modulo AC.
pub(crate) fn compose_step(
    ctx: &Context,
    start: &Term,
    justifications: &[Justification],
) -> Result<ComposedStep, (StepStatus, Vec<Firing>)> {
    let mut frontiers: Vec<Vec<Flat>> = vec![vec![to_flat(start)]];
    let mut fired: Vec<Firing> = Vec::new();
    for just in justifications {
        let frontier = frontiers.last().unwrap().clone();
        match just {
            Justification::Rule { id, .. } if id.is_ac() => {
                fired.push(Firing {
                    rule: *id,
                    dual: false,
                    absorbed_ac: true,
                    detail: just.to_string(),
                    side_condition: None,
                });
                frontiers.push(frontier);
            }
            _ => {
                let (next, firing) = fire_mod_ac(ctx, &frontier, just)
                    .map_err(|status| (status, fired.clone()))?;
                fired.push(firing);
                frontiers.push(next);
            }
        }
    }
    Ok(ComposedStep { frontiers, fired })
}

/// Fire one non-AC citation on every frontier member, modulo AC.
fn fire_mod_ac(
    ctx: &Context,
    frontier: &[Flat],
    just: &Justification,
) -> Result<(Vec<Flat>, Firing), StepStatus> {
    let mut results: BTreeSet<Flat> = BTreeSet::new();
    let mut firing = Firing {
        rule: RuleId::L1,
        dual: false,
        absorbed_ac: false,
        detail: just.to_string(),
        side_condition: None,
    };
    match just {
        Justification::Rule { id, bindings, form, reverse, .. } => {
            firing.rule = *id;
            if id.is_m_family() {
                let a = bindings.get(&SchemaVar::A);
                let b = bindings.get(&SchemaVar::B);
                let c = bindings.get(&SchemaVar::C);
                let (Some(a), Some(_), Some(c)) = (a, b, c) else {
                    return Err(StepStatus::RuleMismatch(format!(
                        "`{just}`: modular-law citations need a, b and c bindings"
                    )));
                };
                let forms = match form {
                    Some(f) => vec![*f],
                    None => vec![OpKind::Meet, OpKind::Join],
                };
                let mut any_side_ok = false;
                for f in forms {
                    let (lo, hi) = if f == OpKind::Meet { (c, a) } else { (a, c) };
                    let Some(derivation) = order::derive_leq(ctx, lo, hi, order::DEFAULT_DEPTH)
                    else {
                        continue;
                    };
                    any_side_ok = true;
                    let schema = find_schema(*id, f).expect("m-family schema");
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
                        let redex = to_flat(&src.instantiate(bindings).expect("abc bound"));
                        let repl = to_flat(&dst.instantiate(bindings).expect("abc bound"));
                        let mut fired_here = false;
                        for t in frontier {
                            for r in replace_occurrences(t, &redex, &repl) {
                                results.insert(r);
                                fired_here = true;
                            }
                        }
                        if fired_here && firing.side_condition.is_none() {
                            firing.dual = f == OpKind::Join;
                            firing.side_condition = Some(derivation.clone());
                        }
                    }
                }
                if results.is_empty() {
                    return Err(if any_side_ok {
                        StepStatus::RuleMismatch(format!("`{just}` fires nowhere"))
                    } else {
                        StepStatus::SideConditionUnproven(format!(
                            "side condition of `{just}` is not derivable"
                        ))
                    });
                }
            } else if *id == RuleId::L3 {
                let want_x = bindings.get(&SchemaVar::X).map(to_flat);
                if *reverse {
                    let Some(x) = &want_x else {
                        return Err(StepStatus::RuleMismatch(format!(
                            "`{just}`: idempotency expansion needs an x binding"
                        )));
                    };
                    for kind in [OpKind::Meet, OpKind::Join] {
                        let doubled = Flat::Op(kind, vec![x.clone(), x.clone()]);
                        for t in frontier {
                            for r in replace_occurrences(t, x, &doubled) {
                                results.insert(r);
                            }
                        }
                    }
                } else {
                    for t in frontier {
                        for (x, r) in idempotency_contractions(t) {
                            if want_x.as_ref().map_or(true, |w| *w == x) {
                                results.insert(r);
                            }
                        }
                    }
                }
                if results.is_empty() {
                    return Err(StepStatus::RuleMismatch(format!("`{just}` fires nowhere")));
                }
            } else if *id == RuleId::L4 {
                let want_x = bindings.get(&SchemaVar::X).map(to_flat);
                let want_y = bindings.get(&SchemaVar::Y).map(to_flat);
                if *reverse {
                    let (Some(x), Some(y)) = (bindings.get(&SchemaVar::X), bindings.get(&SchemaVar::Y))
                    else {
                        return Err(StepStatus::RuleMismatch(format!(
                            "`{just}`: absorption expansion needs x and y bindings"
                        )));
                    };
                    for kind in [OpKind::Meet, OpKind::Join] {
                        let expanded = to_flat(&Term::op(
                            kind,
                            x.clone(),
                            Term::op(kind.dual(), x.clone(), y.clone()),
                        ));
                        let xf = to_flat(x);
                        for t in frontier {
                            for r in replace_occurrences(t, &xf, &expanded) {
                                results.insert(r);
                            }
                        }
                    }
                } else {
                    for t in frontier {
                        for (x, y, _, r) in absorption_contractions(t) {
                            let x_ok = want_x.as_ref().map_or(true, |w| *w == x);
                            let y_ok = want_y.as_ref().map_or(true, |w| *w == y);
                            if x_ok && y_ok {
                                results.insert(r);
                            }
                        }
                    }
                }
                if results.is_empty() {
                    return Err(StepStatus::RuleMismatch(format!("`{just}` fires nowhere")));
                }
            } else {
                // L1/L2 handled by the caller.
                unreachable!("AC citations are absorbed before firing");
            }
        }
        Justification::Def { name, direction, .. } => {
            firing.rule = RuleId::Def;
            let Some(body) = ctx.definition(name) else {
                return Err(StepStatus::RuleMismatch(format!("unknown definition `{name}`")));
            };
            let var = Flat::Var(name.clone());
            let body_flat = to_flat(body);
            let dirs = match direction {
                Some(d) => vec![*d],
                None => vec![Direction::Forward, Direction::Reverse],
            };
            for dir in dirs {
                let (redex, repl) = match dir {
                    Direction::Forward => (&var, &body_flat),
                    Direction::Reverse => (&body_flat, &var),
                };
                for t in frontier {
                    for r in replace_occurrences(t, redex, repl) {
                        results.insert(r);
                    }
                }
            }
            if results.is_empty() {
                return Err(StepStatus::RuleMismatch(format!("`{just}` fires nowhere")));
            }
        }
        Justification::Order { fact, .. } => {
            firing.rule = RuleId::Order;
            let Some(derivation) =
                order::derive_leq(ctx, &fact.lhs, &fact.rhs, order::DEFAULT_DEPTH)
            else {
                return Err(StepStatus::SideConditionUnproven(format!(
                    "order fact `{} <= {}` is not derivable",
                    fact.lhs, fact.rhs
                )));
            };
            firing.side_condition = Some(derivation);
            let s = to_flat(&fact.lhs);
            let t_ = to_flat(&fact.rhs);
            let join = Flat::node(OpKind::Join, vec![s.clone(), t_.clone()]);
            let meet = Flat::node(OpKind::Meet, vec![s.clone(), t_.clone()]);
            let rewrites = [(join.clone(), t_.clone()), (meet.clone(), s.clone()), (t_, join), (s, meet)];
            for (redex, repl) in &rewrites {
                for t in frontier {
                    for r in replace_occurrences(t, redex, repl) {
                        results.insert(r);
                    }
                }
            }
            if results.is_empty() {
                return Err(StepStatus::RuleMismatch(format!("`{just}` fires nowhere")));
            }
        }
    }
    let mut out: Vec<Flat> = results.into_iter().collect();
    out.truncate(FRONTIER_CAP);
    Ok((out, firing))
}

fn verify_lenient(script: &ProofScript) -> VerificationReport {
    let ctx = &script.context;
    let mut reports = Vec::new();
    let mut all_ok = true;
    let mut prev = script.goal.0.clone();
    let last_index = script.steps.len().saturating_sub(1);
    for (i, step) in script.steps.iter().enumerate() {
        let index = i + 1;
        let is_final = i == last_index;
        match compose_step(ctx, &prev, &step.justifications) {
            Err((status, fired)) => {
                all_ok = false;
                reports.push(StepReport { index, status, fired });
            }
            Ok(composed) => {
                let step_flat = to_flat(&step.term);
                let status = if is_final {
                    let touch = composed.frontiers.iter().any(|f| f.contains(&step_flat));
                    let closes = composed
                        .frontiers
                        .last()
                        .unwrap()
                        .contains(&to_flat(&script.goal.1));
                    if touch && closes {
                        StepStatus::Verified
                    } else if !touch {
                        StepStatus::ResidualDifference(
                            "no composition prefix reaches the stated term modulo AC".into(),
                        )
                    } else {
                        StepStatus::ResidualDifference(
                            "the justifications do not close onto the goal right-hand side".into(),
                        )
                    }
                } else if composed.frontiers.last().unwrap().contains(&step_flat) {
                    StepStatus::Verified
                } else {
                    StepStatus::ResidualDifference(
                        "terms differ beyond AC after firing all cited rules".into(),
                    )
                };
                if !status.is_ok() {
                    all_ok = false;
                }
                reports.push(StepReport { index, status, fired: composed.fired });
            }
        }
        prev = step.term.clone();
    }
    if script.steps.is_empty() {
        let ok = crate::term::equal_mod_ac(&script.goal.0, &script.goal.1);
        if !ok {
            all_ok = false;
            reports.push(StepReport {
                index: 1,
                status: StepStatus::ResidualDifference("empty proof of a non-trivial goal".into()),
                fired: Vec::new(),
            });
        }
    }
    VerificationReport {
        verdict: if all_ok { Verdict::Accepted } else { Verdict::Rejected },
        mode: Mode::Lenient,
        steps: reports,
    }
}

