//! The basic-rule catalog and its application: the four lattice-axiom
//! families (L1 associativity, L2 commutativity, L3 idempotency, L4
//! absorption), the modular law with its four commuted combinations
//! (M, M1..M4) in primal and dual form, definition substitution (Def)
//! and order-based rewrites (Order).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::order::{self, OrderFact};
use crate::term::{OpKind, Position, Term};

/// Identifiers exactly as they appear in proof scripts and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    L1,
    L2,
    L3,
    L4,
    M,
    M1,
    M2,
    M3,
    M4,
    Def,
    Order,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::L1,
        RuleId::L2,
        RuleId::L3,
        RuleId::L4,
        RuleId::M,
        RuleId::M1,
        RuleId::M2,
        RuleId::M3,
        RuleId::M4,
        RuleId::Def,
        RuleId::Order,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::L1 => "L1",
            RuleId::L2 => "L2",
            RuleId::L3 => "L3",
            RuleId::L4 => "L4",
            RuleId::M => "M",
            RuleId::M1 => "M1",
            RuleId::M2 => "M2",
            RuleId::M3 => "M3",
            RuleId::M4 => "M4",
            RuleId::Def => "Def",
            RuleId::Order => "Order",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.iter().copied().find(|r| r.name() == s)
    }

    pub fn is_m_family(self) -> bool {
        matches!(self, RuleId::M | RuleId::M1 | RuleId::M2 | RuleId::M3 | RuleId::M4)
    }

    pub fn is_axiom(self) -> bool {
        matches!(self, RuleId::L1 | RuleId::L2 | RuleId::L3 | RuleId::L4)
    }

    /// Pure associativity/commutativity shuffles, tolerated implicitly by
    /// lenient verification.
    pub fn is_ac(self) -> bool {
        matches!(self, RuleId::L1 | RuleId::L2)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// Schema variables a rule instance binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemaVar {
    A,
    B,
    C,
    X,
    Y,
}

impl SchemaVar {
    pub fn name(self) -> &'static str {
        match self {
            SchemaVar::A => "a",
            SchemaVar::B => "b",
            SchemaVar::C => "c",
            SchemaVar::X => "x",
            SchemaVar::Y => "y",
        }
    }

    pub fn from_name(s: &str) -> Option<SchemaVar> {
        match s {
            "a" => Some(SchemaVar::A),
            "b" => Some(SchemaVar::B),
            "c" => Some(SchemaVar::C),
            "x" => Some(SchemaVar::X),
            "y" => Some(SchemaVar::Y),
            _ => None,
        }
    }
}

pub type Bindings = BTreeMap<SchemaVar, Term>;

/// Rule schema pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pat {
    V(SchemaVar),
    Op(OpKind, Box<Pat>, Box<Pat>),
}

impl Pat {
    fn v(sv: SchemaVar) -> Pat {
        Pat::V(sv)
    }

    fn op(kind: OpKind, l: Pat, r: Pat) -> Pat {
        Pat::Op(kind, Box::new(l), Box::new(r))
    }

    pub fn render(&self) -> String {
        fn wrap(p: &Pat) -> String {
            match p {
                Pat::V(v) => v.name().to_string(),
                Pat::Op(..) => format!("({})", p.render()),
            }
        }
        match self {
            Pat::V(v) => v.name().to_string(),
            Pat::Op(kind, l, r) => format!("{} {} {}", wrap(l), kind.symbol(), wrap(r)),
        }
    }

    pub fn instantiate(&self, b: &Bindings) -> Option<Term> {
        match self {
            Pat::V(v) => b.get(v).cloned(),
            Pat::Op(kind, l, r) => Some(Term::op(*kind, l.instantiate(b)?, r.instantiate(b)?)),
        }
    }

    /// Node-exact match, binding schema variables positionally; repeated
    /// variables must bind equal subterms.
    pub fn matches(&self, t: &Term, b: &mut Bindings) -> bool {
        match self {
            Pat::V(v) => match b.get(v) {
                Some(bound) => bound == t,
                None => {
                    b.insert(*v, t.clone());
                    true
                }
            },
            Pat::Op(kind, l, r) => match t {
                Term::Op(k, tl, tr) if k == kind => l.matches(tl, b) && r.matches(tr, b),
                _ => false,
            },
        }
    }
}

/// Which inequality an M-family application must discharge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideCondition {
    /// c <= a (primal modular forms)
    CLeqA,
    /// a <= c (dual modular forms)
    ALeqC,
}

/// One catalog schema, stated in its canonical left-to-right direction.
#[derive(Debug, Clone)]
pub struct Schema {
    pub id: RuleId,
    /// `Meet` is the primal family (meet-leading modular law, `x /\ (x \/ y)`
    /// absorption, meet associativity...), `Join` the dual one.
    pub form: OpKind,
    pub lhs: Pat,
    pub rhs: Pat,
    pub side: Option<SideCondition>,
}

fn axiom_schemas(kind: OpKind) -> Vec<Schema> {
    use SchemaVar::*;
    let dual = kind.dual();
    vec![
        // L1: (a ∘ b) ∘ c = a ∘ (b ∘ c)
        Schema {
            id: RuleId::L1,
            form: kind,
            lhs: Pat::op(kind, Pat::op(kind, Pat::v(A), Pat::v(B)), Pat::v(C)),
            rhs: Pat::op(kind, Pat::v(A), Pat::op(kind, Pat::v(B), Pat::v(C))),
            side: None,
        },
        // L2: a ∘ b = b ∘ a
        Schema {
            id: RuleId::L2,
            form: kind,
            lhs: Pat::op(kind, Pat::v(A), Pat::v(B)),
            rhs: Pat::op(kind, Pat::v(B), Pat::v(A)),
            side: None,
        },
        // L3: x ∘ x = x
        Schema {
            id: RuleId::L3,
            form: kind,
            lhs: Pat::op(kind, Pat::v(X), Pat::v(X)),
            rhs: Pat::v(X),
            side: None,
        },
        // L4: x ∘ (x ∘' y) = x
        Schema {
            id: RuleId::L4,
            form: kind,
            lhs: Pat::op(kind, Pat::v(X), Pat::op(dual, Pat::v(X), Pat::v(Y))),
            rhs: Pat::v(X),
            side: None,
        },
    ]
}

fn modular_schemas(form: OpKind) -> Vec<Schema> {
    use SchemaVar::*;
    // Primal (form = Meet): for a >= c,
    //   M : a /\ (b \/ c) = (a /\ b) \/ c
    //   M1: a /\ (c \/ b) = (a /\ b) \/ c
    //   M2: (b \/ c) /\ a = (a /\ b) \/ c
    //   M3: (b /\ a) \/ c = a /\ (b \/ c)
    //   M4: c \/ (a /\ b) = a /\ (b \/ c)
    // The dual (form = Join) swaps the operators and requires a <= c.
    let mt = form;
    let jn = form.dual();
    let side = Some(if form == OpKind::Meet {
        SideCondition::CLeqA
    } else {
        SideCondition::ALeqC
    });
    let a_mt_b_jn_c = Pat::op(jn, Pat::op(mt, Pat::v(A), Pat::v(B)), Pat::v(C));
    let a_mt_b_or_c = Pat::op(mt, Pat::v(A), Pat::op(jn, Pat::v(B), Pat::v(C)));
    vec![
        Schema {
            id: RuleId::M,
            form,
            lhs: a_mt_b_or_c.clone(),
            rhs: a_mt_b_jn_c.clone(),
            side,
        },
        Schema {
            id: RuleId::M1,
            form,
            lhs: Pat::op(mt, Pat::v(A), Pat::op(jn, Pat::v(C), Pat::v(B))),
            rhs: a_mt_b_jn_c.clone(),
            side,
        },
        Schema {
            id: RuleId::M2,
            form,
            lhs: Pat::op(mt, Pat::op(jn, Pat::v(B), Pat::v(C)), Pat::v(A)),
            rhs: a_mt_b_jn_c,
            side,
        },
        Schema {
            id: RuleId::M3,
            form,
            lhs: Pat::op(jn, Pat::op(mt, Pat::v(B), Pat::v(A)), Pat::v(C)),
            rhs: a_mt_b_or_c.clone(),
            side,
        },
        Schema {
            id: RuleId::M4,
            form,
            lhs: Pat::op(jn, Pat::v(C), Pat::op(mt, Pat::v(A), Pat::v(B))),
            rhs: a_mt_b_or_c,
            side,
        },
    ]
}

/// Static pattern schemas for the L and M families, in catalog order.
pub fn pattern_schemas() -> &'static [Schema] {
    static SCHEMAS: std::sync::OnceLock<Vec<Schema>> = std::sync::OnceLock::new();
    SCHEMAS.get_or_init(|| {
        let mut v = Vec::new();
        for id in [RuleId::L1, RuleId::L2, RuleId::L3, RuleId::L4] {
            for kind in [OpKind::Meet, OpKind::Join] {
                v.extend(axiom_schemas(kind).into_iter().filter(|s| s.id == id));
            }
        }
        for id in [RuleId::M, RuleId::M1, RuleId::M2, RuleId::M3, RuleId::M4] {
            for form in [OpKind::Meet, OpKind::Join] {
                v.extend(modular_schemas(form).into_iter().filter(|s| s.id == id));
            }
        }
        v
    })
}

/// One line of the full static catalog, direction-expanded.
#[derive(Debug, Clone)]
pub struct SchemaEntry {
    pub id: RuleId,
    pub form: OpKind,
    pub direction: Direction,
    pub lhs: String,
    pub rhs: String,
    pub side_condition: Option<String>,
}

/// The full static catalog: every rule family, operator kind / primal-dual
/// form, and direction, including the definition and Connecting-Lemma
/// rewrites.
pub fn rule_schemas() -> Vec<SchemaEntry> {
    let mut out = Vec::new();
    for s in pattern_schemas().iter() {
        let side = s.side.map(|sc| {
            match sc {
                SideCondition::CLeqA => "c <= a",
                SideCondition::ALeqC => "a <= c",
            }
            .to_string()
        });
        for direction in [Direction::Forward, Direction::Reverse] {
            let (lhs, rhs) = match direction {
                Direction::Forward => (s.lhs.render(), s.rhs.render()),
                Direction::Reverse => (s.rhs.render(), s.lhs.render()),
            };
            out.push(SchemaEntry {
                id: s.id,
                form: s.form,
                direction,
                lhs,
                rhs,
                side_condition: side.clone(),
            });
        }
    }
    for direction in [Direction::Forward, Direction::Reverse] {
        let (lhs, rhs) = match direction {
            Direction::Forward => ("n", "body of n"),
            Direction::Reverse => ("body of n", "n"),
        };
        out.push(SchemaEntry {
            id: RuleId::Def,
            form: OpKind::Meet,
            direction,
            lhs: lhs.into(),
            rhs: rhs.into(),
            side_condition: None,
        });
    }
    for (form, l, r) in [
        (OpKind::Join, "s \\/ t", "t"),
        (OpKind::Meet, "s /\\ t", "s"),
    ] {
        for direction in [Direction::Forward, Direction::Reverse] {
            let (lhs, rhs) = match direction {
                Direction::Forward => (l.to_string(), r.to_string()),
                Direction::Reverse => (r.to_string(), l.to_string()),
            };
            out.push(SchemaEntry {
                id: RuleId::Order,
                form,
                direction,
                lhs,
                rhs,
                side_condition: Some("s <= t".into()),
            });
        }
    }
    out
}

pub(crate) fn find_schema(id: RuleId, form: OpKind) -> Option<&'static Schema> {
    pattern_schemas().iter().find(|s| s.id == id && s.form == form)
}

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContextError {
    #[error("`{0}` is already defined")]
    Redefined(String),
    #[error("definition of `{0}` mentions itself")]
    SelfReference(String),
}

/// Definitions plus order hypotheses shared by a proof.
#[derive(Debug, Clone, Default)]
pub struct Context {
    defs: Vec<(String, Term)>,
    pub hypotheses: Vec<OrderFact>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    /// Add a definition. Bodies may mention only variables and previously
    /// defined names, so the definition order is acyclic by construction.
    pub fn define(&mut self, name: impl Into<String>, body: Term) -> Result<(), ContextError> {
        let name = name.into();
        if self.defs.iter().any(|(n, _)| *n == name) {
            return Err(ContextError::Redefined(name));
        }
        if body.free_vars().contains(&name) {
            return Err(ContextError::SelfReference(name));
        }
        self.defs.push((name, body));
        Ok(())
    }

    pub fn definition(&self, name: &str) -> Option<&Term> {
        self.defs.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn definitions(&self) -> &[(String, Term)] {
        &self.defs
    }

    pub fn add_hypothesis(&mut self, fact: OrderFact) {
        self.hypotheses.push(fact);
    }

    /// Substitute every defined name by its body, to a fixpoint.
    pub fn unfold_all(&self, t: &Term) -> Term {
        fn subst(ctx: &Context, t: &Term) -> Term {
            match t {
                Term::Var(n) => match ctx.definition(n) {
                    Some(body) => subst(ctx, body),
                    None => t.clone(),
                },
                Term::Op(kind, l, r) => Term::op(*kind, subst(ctx, l), subst(ctx, r)),
            }
        }
        subst(self, t)
    }
}

// ---------------------------------------------------------------------------
// Rule instances and application
// ---------------------------------------------------------------------------

/// One basic-rule application: what fires, and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub app: RuleApp,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleApp {
    /// L1..L4 / M..M4 with full bindings.
    Schema {
        id: RuleId,
        form: OpKind,
        direction: Direction,
        bindings: Bindings,
    },
    /// Definition substitution; `Forward` unfolds the name, `Reverse` folds
    /// the body back into the name.
    Def { name: String, direction: Direction },
    /// Connecting-Lemma rewrite backed by a derivable order fact.
    /// Forward + Join: s \/ t -> t; Forward + Meet: s /\ t -> s.
    Order {
        fact: OrderFact,
        op: OpKind,
        direction: Direction,
    },
}

impl RuleInstance {
    pub fn rule_id(&self) -> RuleId {
        match &self.app {
            RuleApp::Schema { id, .. } => *id,
            RuleApp::Def { .. } => RuleId::Def,
            RuleApp::Order { .. } => RuleId::Order,
        }
    }

    /// The inverse instance at the same position.
    pub fn inverse(&self) -> RuleInstance {
        let app = match &self.app {
            RuleApp::Schema { id, form, direction, bindings } => RuleApp::Schema {
                id: *id,
                form: *form,
                direction: direction.flip(),
                bindings: bindings.clone(),
            },
            RuleApp::Def { name, direction } => RuleApp::Def {
                name: name.clone(),
                direction: direction.flip(),
            },
            RuleApp::Order { fact, op, direction } => RuleApp::Order {
                fact: fact.clone(),
                op: *op,
                direction: direction.flip(),
            },
        };
        RuleInstance { app, position: self.position.clone() }
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.app {
            RuleApp::Schema { id, form, direction, bindings } => {
                write!(f, "{id} at {}", self.position)?;
                if id.is_m_family() && *form == OpKind::Join {
                    write!(f, " dual")?;
                }
                if *direction == Direction::Reverse {
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
            RuleApp::Def { name, direction } => write!(
                f,
                "Def {name} at {} {}",
                self.position,
                if *direction == Direction::Forward { "unfold" } else { "fold" }
            ),
            RuleApp::Order { fact, direction, .. } => {
                write!(f, "Order {} <= {} at {}", fact.lhs, fact.rhs, self.position)?;
                if *direction == Direction::Reverse {
                    write!(f, " reverse")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule does not match at {position}: {detail}")]
    NoMatch { position: Position, detail: String },
    #[error("side condition {0} not derivable")]
    SideConditionUnproven(String),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
    #[error(transparent)]
    Term(#[from] crate::term::TermError),
}

/// Apply one fully-bound rule instance; node-exact, no implicit AC moves.
pub fn apply_rule(t: &Term, inst: &RuleInstance, ctx: &Context) -> Result<Term, RuleError> {
    let sub = t.subterm_at(&inst.position)?;
    let replacement = match &inst.app {
        RuleApp::Schema { id, form, direction, bindings } => {
            let schema = find_schema(*id, *form).ok_or_else(|| RuleError::NoMatch {
                position: inst.position.clone(),
                detail: format!("no schema for {id}"),
            })?;
            let (src, dst) = match direction {
                Direction::Forward => (&schema.lhs, &schema.rhs),
                Direction::Reverse => (&schema.rhs, &schema.lhs),
            };
            let expected = src.instantiate(bindings).ok_or_else(|| RuleError::NoMatch {
                position: inst.position.clone(),
                detail: "incomplete bindings".into(),
            })?;
            if expected != *sub {
                return Err(RuleError::NoMatch {
                    position: inst.position.clone(),
                    detail: format!("expected `{expected}`, found `{sub}`"),
                });
            }
            if let Some(side) = schema.side {
                let (lo, hi) = side_condition_terms(side, bindings).ok_or_else(|| {
                    RuleError::NoMatch {
                        position: inst.position.clone(),
                        detail: "incomplete bindings".into(),
                    }
                })?;
                if order::derive_leq(ctx, &lo, &hi, order::DEFAULT_DEPTH).is_none() {
                    return Err(RuleError::SideConditionUnproven(format!("{lo} <= {hi}")));
                }
            }
            // Reverse directions of contracting schemas (x for x /\ x, the
            // absorbed x /\ (x \/ y)) need the introduced variables bound
            // explicitly; refuse the application otherwise.
            dst.instantiate(bindings).ok_or_else(|| RuleError::NoMatch {
                position: inst.position.clone(),
                detail: "bindings do not cover the introduced schema variables".into(),
            })?
        }
        RuleApp::Def { name, direction } => {
            let body = ctx
                .definition(name)
                .ok_or_else(|| RuleError::UnknownDefinition(name.clone()))?;
            match direction {
                Direction::Forward => {
                    if *sub != Term::Var(name.clone()) {
                        return Err(RuleError::NoMatch {
                            position: inst.position.clone(),
                            detail: format!("expected `{name}`, found `{sub}`"),
                        });
                    }
                    body.clone()
                }
                Direction::Reverse => {
                    if sub != body {
                        return Err(RuleError::NoMatch {
                            position: inst.position.clone(),
                            detail: format!("expected the body of `{name}`, found `{sub}`"),
                        });
                    }
                    Term::Var(name.clone())
                }
            }
        }
        RuleApp::Order { fact, op, direction } => {
            if order::derive_leq(ctx, &fact.lhs, &fact.rhs, order::DEFAULT_DEPTH).is_none() {
                return Err(RuleError::SideConditionUnproven(format!(
                    "{} <= {}",
                    fact.lhs, fact.rhs
                )));
            }
            let combined = Term::op(*op, fact.lhs.clone(), fact.rhs.clone());
            let collapsed = match op {
                OpKind::Join => fact.rhs.clone(),
                OpKind::Meet => fact.lhs.clone(),
            };
            let (src, dst) = match direction {
                Direction::Forward => (combined, collapsed),
                Direction::Reverse => (collapsed, combined),
            };
            if *sub != src {
                return Err(RuleError::NoMatch {
                    position: inst.position.clone(),
                    detail: format!("expected `{src}`, found `{sub}`"),
                });
            }
            dst
        }
    };
    Ok(t.replace_at(&inst.position, replacement)?)
}

pub(crate) fn side_condition_terms(side: SideCondition, b: &Bindings) -> Option<(Term, Term)> {
    let a = b.get(&SchemaVar::A)?.clone();
    let c = b.get(&SchemaVar::C)?.clone();
    Some(match side {
        SideCondition::CLeqA => (c, a),
        SideCondition::ALeqC => (a, c),
    })
}

/// All single-rule successors of `t` over the allowed rules, in
/// position-major, rule-id-minor order, deduplicated by node-exact result.
///
/// Only contracting / forward directions fire here; expansion directions
/// (L3/L4/Order reverse) need their introduced term supplied explicitly and
/// are enumerated by [`enumerate_expansions`].
pub fn enumerate_rewrites(
    t: &Term,
    ctx: &Context,
    rules: &BTreeSet<RuleId>,
) -> Vec<(RuleInstance, Term)> {
    let schemas: Vec<&Schema> = pattern_schemas()
        .iter()
        .filter(|s| rules.contains(&s.id))
        .collect();
    let mut out: Vec<(RuleInstance, Term)> = Vec::new();
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    for pos in t.positions() {
        let sub = t.subterm_at(&pos).expect("enumerated position");
        for schema in &schemas {
            let mut bindings = Bindings::new();
            if !schema.lhs.matches(sub, &mut bindings) {
                continue;
            }
            if let Some(side) = schema.side {
                let Some((lo, hi)) = side_condition_terms(side, &bindings) else {
                    continue;
                };
                if order::derive_leq(ctx, &lo, &hi, order::DEFAULT_DEPTH).is_none() {
                    continue;
                }
            }
            let inst = RuleInstance {
                app: RuleApp::Schema {
                    id: schema.id,
                    form: schema.form,
                    direction: Direction::Forward,
                    bindings,
                },
                position: pos.clone(),
            };
            if let Ok(next) = apply_rule(t, &inst, ctx) {
                if seen.insert(next.clone()) {
                    out.push((inst, next));
                }
            }
        }
        if rules.contains(&RuleId::Def) {
            for (name, body) in ctx.definitions() {
                let (direction, fires) = if *sub == Term::Var(name.clone()) {
                    (Direction::Forward, true)
                } else if sub == body {
                    (Direction::Reverse, true)
                } else {
                    (Direction::Forward, false)
                };
                if !fires {
                    continue;
                }
                let inst = RuleInstance {
                    app: RuleApp::Def { name: name.clone(), direction },
                    position: pos.clone(),
                };
                if let Ok(next) = apply_rule(t, &inst, ctx) {
                    if seen.insert(next.clone()) {
                        out.push((inst, next));
                    }
                }
            }
        }
        if rules.contains(&RuleId::Order) {
            if let Term::Op(kind, l, r) = sub {
                if order::derive_leq(ctx, l, r, order::DEFAULT_DEPTH).is_some() {
                    let inst = RuleInstance {
                        app: RuleApp::Order {
                            fact: OrderFact::non_strict((**l).clone(), (**r).clone()),
                            op: *kind,
                            direction: Direction::Forward,
                        },
                        position: pos.clone(),
                    };
                    if let Ok(next) = apply_rule(t, &inst, ctx) {
                        if seen.insert(next.clone()) {
                            out.push((inst, next));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Expansion-direction successors (L3 reverse, L4 reverse, Order reverse,
/// Def fold is already covered by `enumerate_rewrites`). The introduced
/// subterm ranges over `pool`.
pub fn enumerate_expansions(
    t: &Term,
    ctx: &Context,
    rules: &BTreeSet<RuleId>,
    pool: &[Term],
) -> Vec<(RuleInstance, Term)> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    for pos in t.positions() {
        let sub = t.subterm_at(&pos).expect("enumerated position").clone();
        if rules.contains(&RuleId::L3) {
            for kind in [OpKind::Meet, OpKind::Join] {
                let mut bindings = Bindings::new();
                bindings.insert(SchemaVar::X, sub.clone());
                let inst = RuleInstance {
                    app: RuleApp::Schema {
                        id: RuleId::L3,
                        form: kind,
                        direction: Direction::Reverse,
                        bindings,
                    },
                    position: pos.clone(),
                };
                if let Ok(next) = apply_rule(t, &inst, ctx) {
                    if seen.insert(next.clone()) {
                        out.push((inst, next));
                    }
                }
            }
        }
        if rules.contains(&RuleId::L4) {
            for kind in [OpKind::Meet, OpKind::Join] {
                for y in pool {
                    let mut bindings = Bindings::new();
                    bindings.insert(SchemaVar::X, sub.clone());
                    bindings.insert(SchemaVar::Y, y.clone());
                    let inst = RuleInstance {
                        app: RuleApp::Schema {
                            id: RuleId::L4,
                            form: kind,
                            direction: Direction::Reverse,
                            bindings,
                        },
                        position: pos.clone(),
                    };
                    if let Ok(next) = apply_rule(t, &inst, ctx) {
                        if seen.insert(next.clone()) {
                            out.push((inst, next));
                        }
                    }
                }
            }
        }
        if rules.contains(&RuleId::Order) {
            for other in pool {
                // t -> s \/ t given s <= t, and s -> s /\ t given s <= t
                let candidates = [
                    (OpKind::Join, OrderFact::non_strict(other.clone(), sub.clone())),
                    (OpKind::Meet, OrderFact::non_strict(sub.clone(), other.clone())),
                ];
                for (op, fact) in candidates {
                    if order::derive_leq(ctx, &fact.lhs, &fact.rhs, order::DEFAULT_DEPTH).is_none() {
                        continue;
                    }
                    let inst = RuleInstance {
                        app: RuleApp::Order { fact, op, direction: Direction::Reverse },
                        position: pos.clone(),
                    };
                    if let Ok(next) = apply_rule(t, &inst, ctx) {
                        if seen.insert(next.clone()) {
                            out.push((inst, next));
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn ctx_corpus() -> Context {
        let mut ctx = Context::new();
        ctx.define("p", parse_term("(d /\\ e) \\/ (e /\\ f) \\/ (f /\\ d)").unwrap())
            .unwrap();
        ctx.define("q", parse_term("(d \\/ e) /\\ (e \\/ f) /\\ (f \\/ d)").unwrap())
            .unwrap();
        ctx.define("u", parse_term("(d /\\ q) \\/ p").unwrap()).unwrap();
        ctx.define("v", parse_term("(e /\\ q) \\/ p").unwrap()).unwrap();
        ctx.define("w", parse_term("(f /\\ q) \\/ p").unwrap()).unwrap();
        ctx.add_hypothesis(OrderFact::strict(Term::var("p"), Term::var("q")));
        ctx
    }

    #[test]
    fn catalog_contains_expected_schemas() {
        let entries = rule_schemas();
        let m = entries
            .iter()
            .find(|e| e.id == RuleId::M && e.form == OpKind::Meet && e.direction == Direction::Forward)
            .unwrap();
        assert_eq!(m.lhs, "a /\\ (b \\/ c)");
        assert_eq!(m.rhs, "(a /\\ b) \\/ c");
        assert_eq!(m.side_condition.as_deref(), Some("c <= a"));

        let l4 = entries
            .iter()
            .find(|e| e.id == RuleId::L4 && e.form == OpKind::Meet && e.direction == Direction::Forward)
            .unwrap();
        assert_eq!(l4.lhs, "x /\\ (x \\/ y)");
        assert_eq!(l4.rhs, "x");

        let ord = entries
            .iter()
            .find(|e| e.id == RuleId::Order && e.form == OpKind::Join && e.direction == Direction::Forward)
            .unwrap();
        assert_eq!(ord.lhs, "s \\/ t");
        assert_eq!(ord.rhs, "t");
        assert_eq!(ord.side_condition.as_deref(), Some("s <= t"));

        // Every L and M family member appears with both forms and directions.
        for id in [RuleId::L1, RuleId::L2, RuleId::L3, RuleId::L4, RuleId::M, RuleId::M1, RuleId::M2, RuleId::M3, RuleId::M4] {
            assert_eq!(entries.iter().filter(|e| e.id == id).count(), 4, "{id}");
        }
    }

    #[test]
    fn apply_m3_reproduces_inner_modular_step() {
        // (e /\ q) \/ p -> q /\ (e \/ p) with a=q, b=e, c=p given p <= q
        let ctx = ctx_corpus();
        let t = parse_term("((e /\\ q) \\/ p) /\\ x").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert(SchemaVar::A, Term::var("q"));
        bindings.insert(SchemaVar::B, Term::var("e"));
        bindings.insert(SchemaVar::C, Term::var("p"));
        let inst = RuleInstance {
            app: RuleApp::Schema {
                id: RuleId::M3,
                form: OpKind::Meet,
                direction: Direction::Forward,
                bindings,
            },
            position: Position::new(vec![1]),
        };
        let out = apply_rule(&t, &inst, &ctx).unwrap();
        assert_eq!(out, parse_term("(q /\\ (e \\/ p)) /\\ x").unwrap());
    }

    #[test]
    fn apply_l3_contract() {
        let ctx = Context::new();
        let t = parse_term("q /\\ q").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert(SchemaVar::X, Term::var("q"));
        let inst = RuleInstance {
            app: RuleApp::Schema {
                id: RuleId::L3,
                form: OpKind::Meet,
                direction: Direction::Forward,
                bindings,
            },
            position: Position::root(),
        };
        assert_eq!(apply_rule(&t, &inst, &ctx).unwrap(), Term::var("q"));
    }

    #[test]
    fn modular_side_condition_must_be_derivable() {
        // a=e, b=d, c=q under an empty context: e >= q is not derivable.
        let ctx = Context::new();
        let t = parse_term("e /\\ (d \\/ q)").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert(SchemaVar::A, Term::var("e"));
        bindings.insert(SchemaVar::B, Term::var("d"));
        bindings.insert(SchemaVar::C, Term::var("q"));
        let inst = RuleInstance {
            app: RuleApp::Schema {
                id: RuleId::M,
                form: OpKind::Meet,
                direction: Direction::Forward,
                bindings,
            },
            position: Position::root(),
        };
        assert!(matches!(
            apply_rule(&t, &inst, &ctx),
            Err(RuleError::SideConditionUnproven(_))
        ));
    }

    #[test]
    fn enumerate_finds_absorption_at_root() {
        let ctx = Context::new();
        let t = parse_term("d /\\ (d \\/ e)").unwrap();
        let rules: BTreeSet<RuleId> = [RuleId::L4].into_iter().collect();
        let found = enumerate_rewrites(&t, &ctx, &rules);
        assert!(found
            .iter()
            .any(|(inst, next)| inst.position.is_root() && *next == Term::var("d")));
    }

    #[test]
    fn enumerate_def_unfoldings() {
        let ctx = ctx_corpus();
        let t = parse_term("u /\\ v").unwrap();
        let rules: BTreeSet<RuleId> = [RuleId::Def].into_iter().collect();
        let found = enumerate_rewrites(&t, &ctx, &rules);
        let results: Vec<&Term> = found.iter().map(|(_, t)| t).collect();
        let u_unfolded = parse_term("((d /\\ q) \\/ p) /\\ v").unwrap();
        let v_unfolded = parse_term("u /\\ ((e /\\ q) \\/ p)").unwrap();
        assert!(results.contains(&&u_unfolded));
        assert!(results.contains(&&v_unfolded));
    }

    #[test]
    fn bare_variable_has_no_contracting_successors() {
        let ctx = ctx_corpus();
        let rules: BTreeSet<RuleId> = [
            RuleId::L1,
            RuleId::L2,
            RuleId::L4,
            RuleId::M,
            RuleId::M1,
            RuleId::M2,
            RuleId::M3,
            RuleId::M4,
        ]
        .into_iter()
        .collect();
        assert!(enumerate_rewrites(&Term::var("d"), &ctx, &rules).is_empty());
    }

    #[test]
    fn instances_invert() {
        let ctx = ctx_corpus();
        let t = parse_term("u /\\ v").unwrap();
        let rules: BTreeSet<RuleId> = RuleId::ALL.into_iter().collect();
        for (inst, next) in enumerate_rewrites(&t, &ctx, &rules) {
            let back = apply_rule(&next, &inst.inverse(), &ctx).unwrap();
            assert_eq!(back, t, "inverse of {inst}");
        }
    }
}
