//! Lattice expressions: binary meet/join trees over named variables.
//!
//! Concrete syntax uses `/\` for meet and `\/` for join. Mixing the two
//! operators at one grouping level is a parse error; a same-operator chain
//! like `x \/ y \/ z` is sugar for the left-associated tree. `[` `]` and
//! `{` `}` are accepted as alternative grouping characters and erased in
//! the parsed tree.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// The two lattice operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Meet,
    Join,
}

impl OpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Meet => "/\\",
            OpKind::Join => "\\/",
        }
    }

    pub fn dual(self) -> OpKind {
        match self {
            OpKind::Meet => OpKind::Join,
            OpKind::Join => OpKind::Meet,
        }
    }
}

/// A lattice expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Op(OpKind, Box<Term>, Box<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("position {pos} does not address a subterm of `{term}`")]
    PositionOutOfRange { pos: Position, term: String },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn op(kind: OpKind, left: Term, right: Term) -> Term {
        Term::Op(kind, Box::new(left), Box::new(right))
    }

    pub fn meet(left: Term, right: Term) -> Term {
        Term::op(OpKind::Meet, left, right)
    }

    pub fn join(left: Term, right: Term) -> Term {
        Term::op(OpKind::Join, left, right)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Op(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Op(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(n) => {
                out.insert(n.clone());
            }
            Term::Op(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// The subterm addressed by `pos` (1 = left child, 2 = right child).
    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &step in &pos.0 {
            match cur {
                Term::Op(_, l, r) => cur = if step == 1 { l } else { r },
                Term::Var(_) => {
                    return Err(TermError::PositionOutOfRange {
                        pos: pos.clone(),
                        term: format_term(self),
                    })
                }
            }
        }
        Ok(cur)
    }

    /// `self` with the subterm at `pos` replaced by `s`.
    pub fn replace_at(&self, pos: &Position, s: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[u8], s: Term, whole: &Term, pos: &Position) -> Result<Term, TermError> {
            match path.split_first() {
                None => Ok(s),
                Some((&step, rest)) => match t {
                    Term::Op(kind, l, r) => {
                        if step == 1 {
                            Ok(Term::op(*kind, go(l, rest, s, whole, pos)?, (**r).clone()))
                        } else {
                            Ok(Term::op(*kind, (**l).clone(), go(r, rest, s, whole, pos)?))
                        }
                    }
                    Term::Var(_) => Err(TermError::PositionOutOfRange {
                        pos: pos.clone(),
                        term: format_term(whole),
                    }),
                },
            }
        }
        go(self, &pos.0, s, self, pos)
    }

    /// All positions of `self` in pre-order (root first, left before right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Position::root())];
        while let Some((t, p)) = stack.pop() {
            out.push(p.clone());
            if let Term::Op(_, l, r) = t {
                stack.push((r, p.child(2)));
                stack.push((l, p.child(1)));
            }
        }
        out.sort();
        out
    }

    pub fn contains(&self, sub: &Term) -> bool {
        if self == sub {
            return true;
        }
        match self {
            Term::Var(_) => false,
            Term::Op(_, l, r) => l.contains(sub) || r.contains(sub),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_term(self))
    }
}

/// A path from the root of a term: 1 = left child, 2 = right child.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<u8>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn new(path: Vec<u8>) -> Position {
        debug_assert!(path.iter().all(|&s| s == 1 || s == 2));
        Position(path)
    }

    pub fn child(&self, step: u8) -> Position {
        let mut p = self.0.clone();
        p.push(step);
        Position(p)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn path(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// Deterministic printer; `parse_term(format_term(t))` is `t` node-for-node.
pub fn format_term(t: &Term) -> String {
    fn wrap(t: &Term) -> String {
        match t {
            Term::Var(n) => n.clone(),
            Term::Op(..) => format!("({})", format_term(t)),
        }
    }
    match t {
        Term::Var(n) => n.clone(),
        Term::Op(kind, l, r) => format!("{} {} {}", wrap(l), kind.symbol(), wrap(r)),
    }
}

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    RuleIdent(String),
    Number(String),
    Op(OpKind),
    Open(char),
    Close(char),
    Assign, // :=
    Le,     // <=
    Lt,     // <
    Equals, // =
    Semi,
    Comma,
    Dot,
}

#[derive(Debug, Clone)]
pub(crate) struct SpannedTok {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// byte offsets into the source line, for verbatim slicing
    pub start: usize,
    pub end: usize,
}

pub(crate) fn closing(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        '{' => '}',
        _ => unreachable!(),
    }
}

/// Tokenize one source line.
pub(crate) fn lex_line(src: &str, line_no: usize) -> Result<Vec<SpannedTok>, TermError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        let mut push = |tok: Tok, len: usize| {
            toks.push(SpannedTok { tok, line: line_no, col, start: i, end: i + len });
        };
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
            }
            '#' => break,
            '(' | '[' | '{' => {
                push(Tok::Open(c), 1);
                i += 1;
            }
            ')' | ']' | '}' => {
                push(Tok::Close(c), 1);
                i += 1;
            }
            ';' => {
                push(Tok::Semi, 1);
                i += 1;
            }
            ',' => {
                push(Tok::Comma, 1);
                i += 1;
            }
            '.' => {
                push(Tok::Dot, 1);
                i += 1;
            }
            '=' => {
                push(Tok::Equals, 1);
                i += 1;
            }
            '/' => {
                if bytes.get(i + 1) == Some(&b'\\') {
                    push(Tok::Op(OpKind::Meet), 2);
                    i += 2;
                } else {
                    return Err(TermError::Syntax {
                        line: line_no,
                        col,
                        msg: "expected `/\\`".into(),
                    });
                }
            }
            '\\' => {
                if bytes.get(i + 1) == Some(&b'/') {
                    push(Tok::Op(OpKind::Join), 2);
                    i += 2;
                } else {
                    return Err(TermError::Syntax {
                        line: line_no,
                        col,
                        msg: "expected `\\/`".into(),
                    });
                }
            }
            ':' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push(Tok::Assign, 2);
                    i += 2;
                } else {
                    return Err(TermError::Syntax {
                        line: line_no,
                        col,
                        msg: "expected `:=`".into(),
                    });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push(Tok::Le, 2);
                    i += 2;
                } else {
                    push(Tok::Lt, 1);
                    i += 1;
                }
            }
            'a'..='z' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && matches!(bytes[j] as char, 'a'..='z' | '0'..='9' | '_')
                {
                    j += 1;
                }
                push(Tok::Ident(src[i..j].to_string()), j - i);
                i = j;
            }
            'A'..='Z' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && matches!(bytes[j] as char, 'a'..='z' | 'A'..='Z' | '0'..='9')
                {
                    j += 1;
                }
                push(Tok::RuleIdent(src[i..j].to_string()), j - i);
                i = j;
            }
            '0'..='9' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    j += 1;
                }
                push(Tok::Number(src[i..j].to_string()), j - i);
                i = j;
            }
            other => {
                return Err(TermError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub(crate) struct TokStream<'a> {
    pub toks: &'a [SpannedTok],
    pub pos: usize,
    pub line: usize,
}

impl<'a> TokStream<'a> {
    pub fn new(toks: &'a [SpannedTok], line: usize) -> Self {
        TokStream { toks, pos: 0, line }
    }

    pub fn peek(&self) -> Option<&SpannedTok> {
        self.toks.get(self.pos)
    }

    pub fn next_tok(&mut self) -> Option<&SpannedTok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, msg: impl Into<String>) -> TermError {
        let (line, col) = match self.peek() {
            Some(t) => (t.line, t.col),
            None => (
                self.line,
                self.toks.last().map(|t| t.end + 1).unwrap_or(1),
            ),
        };
        TermError::Syntax { line, col, msg: msg.into() }
    }

    /// Parse a term. Same-operator chains associate to the left; mixing
    /// operators at one level is an error.
    pub fn parse_term(&mut self) -> Result<Term, TermError> {
        let first = self.parse_atom()?;
        let mut kind = None;
        let mut acc = first;
        while let Some(SpannedTok { tok: Tok::Op(k), .. }) = self.peek() {
            let k = *k;
            match kind {
                None => kind = Some(k),
                Some(prev) if prev != k => {
                    return Err(self.err(
                        "ambiguous mixed operators without grouping; parenthesize explicitly",
                    ));
                }
                _ => {}
            }
            self.next_tok();
            let rhs = self.parse_atom()?;
            acc = Term::op(k, acc, rhs);
        }
        Ok(acc)
    }

    fn parse_atom(&mut self) -> Result<Term, TermError> {
        match self.peek().cloned() {
            Some(SpannedTok { tok: Tok::Ident(name), .. }) => {
                self.next_tok();
                Ok(Term::Var(name))
            }
            Some(SpannedTok { tok: Tok::Open(open), .. }) => {
                self.next_tok();
                let inner = self.parse_term()?;
                match self.peek() {
                    Some(SpannedTok { tok: Tok::Close(c), .. }) if *c == closing(open) => {
                        self.next_tok();
                        Ok(inner)
                    }
                    _ => Err(self.err(format!("unbalanced grouping: expected `{}`", closing(open)))),
                }
            }
            _ => Err(self.err("expected a variable or a grouped term")),
        }
    }
}

/// Parse a lattice expression.
pub fn parse_term(text: &str) -> Result<Term, TermError> {
    let toks = lex_line(text, 1)?;
    if toks.is_empty() {
        return Err(TermError::Syntax { line: 1, col: 1, msg: "empty input".into() });
    }
    let mut st = TokStream::new(&toks, 1);
    let t = st.parse_term()?;
    if st.peek().is_some() {
        return Err(st.err("trailing input after term"));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// AC canonicalization
// ---------------------------------------------------------------------------

/// Flattened view of a term: maximal same-operator chains collapse into one
/// node whose arguments are sorted by their canonical printed form. This is
/// the canonical representative of the associativity+commutativity class;
/// idempotency and absorption are not applied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Flat {
    Var(String),
    Op(OpKind, Vec<Flat>),
}

impl Flat {
    /// Sorted-argument constructor; merges same-kind children and collapses
    /// singleton chains.
    pub fn node(kind: OpKind, args: Vec<Flat>) -> Flat {
        let mut flat_args = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Flat::Op(k, inner) if k == kind => flat_args.extend(inner),
                other => flat_args.push(other),
            }
        }
        if flat_args.len() == 1 {
            return flat_args.into_iter().next().unwrap();
        }
        flat_args.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Flat::Op(kind, flat_args)
    }

    fn sort_key(&self) -> String {
        fmt_flat(self)
    }
}

/// Printed form of the left-associated rebuild of a flat term; used as the
/// argument sort key so the canonical order is implementation-independent.
pub(crate) fn fmt_flat(f: &Flat) -> String {
    fn wrap(f: &Flat) -> String {
        match f {
            Flat::Var(n) => n.clone(),
            Flat::Op(..) => format!("({})", fmt_flat(f)),
        }
    }
    match f {
        Flat::Var(n) => n.clone(),
        Flat::Op(kind, args) => {
            let mut s = format!("{} {} {}", wrap(&args[0]), kind.symbol(), wrap(&args[1]));
            for a in &args[2..] {
                s = format!("({}) {} {}", s, kind.symbol(), wrap(a));
            }
            s
        }
    }
}

pub(crate) fn to_flat(t: &Term) -> Flat {
    match t {
        Term::Var(n) => Flat::Var(n.clone()),
        Term::Op(kind, l, r) => Flat::node(*kind, vec![to_flat(l), to_flat(r)]),
    }
}

pub(crate) fn from_flat(f: &Flat) -> Term {
    match f {
        Flat::Var(n) => Term::Var(n.clone()),
        Flat::Op(kind, args) => {
            let mut it = args.iter();
            let mut acc = from_flat(it.next().unwrap());
            for a in it {
                acc = Term::op(*kind, acc, from_flat(a));
            }
            acc
        }
    }
}

/// Canonical representative under associativity and commutativity only:
/// flatten maximal same-operator chains, sort arguments, re-associate left.
pub fn ac_canonical(t: &Term) -> Term {
    from_flat(&to_flat(t))
}

/// Equality modulo associativity and commutativity.
pub fn equal_mod_ac(s: &Term, t: &Term) -> bool {
    to_flat(s) == to_flat(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn parse_simple_join_of_meet() {
        let t = parse_term("(d /\\ e) \\/ f").unwrap();
        assert_eq!(t, Term::join(Term::meet(v("d"), v("e")), v("f")));
    }

    #[test]
    fn parse_proof_start_term() {
        let t = parse_term("((d /\\ q) \\/ p) /\\ ((e /\\ q) \\/ p)").unwrap();
        let lhs = Term::join(Term::meet(v("d"), v("q")), v("p"));
        let rhs = Term::join(Term::meet(v("e"), v("q")), v("p"));
        assert_eq!(t, Term::meet(lhs, rhs));
    }

    #[test]
    fn mixed_operators_rejected() {
        let err = parse_term("d /\\ e \\/ f").unwrap_err();
        match err {
            TermError::Syntax { msg, .. } => assert!(msg.contains("mixed operators")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(parse_term("").is_err());
        assert!(parse_term("   ").is_err());
    }

    #[test]
    fn unbalanced_grouping_rejected() {
        assert!(parse_term("(d /\\ e").is_err());
        assert!(parse_term("(d /\\ e]").is_err());
    }

    #[test]
    fn flat_chain_sugar_left_associates() {
        let sugar = parse_term("x \\/ y \\/ z").unwrap();
        let explicit = parse_term("(x \\/ y) \\/ z").unwrap();
        assert_eq!(sugar, explicit);
    }

    #[test]
    fn alternative_brackets_are_erased() {
        let a = parse_term("[d /\\ q] \\/ {p}").unwrap();
        let b = parse_term("(d /\\ q) \\/ p").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn format_meet_of_vars() {
        assert_eq!(format_term(&Term::meet(v("u"), v("v"))), "u /\\ v");
        assert_eq!(format_term(&v("d")), "d");
    }

    #[test]
    fn format_flat_chain_term() {
        // (d /\ e) \/ (e /\ f) \/ (f /\ d), left-associated
        let t = parse_term("(d /\\ e) \\/ (e /\\ f) \\/ (f /\\ d)").unwrap();
        assert_eq!(
            format_term(&t),
            "((d /\\ e) \\/ (e /\\ f)) \\/ (f /\\ d)"
        );
    }

    #[test]
    fn subterm_and_replace() {
        let t = parse_term("(d /\\ q) \\/ p").unwrap();
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
        assert_eq!(
            t.subterm_at(&Position::new(vec![1])).unwrap(),
            &Term::meet(v("d"), v("q"))
        );
        assert!(v("d").subterm_at(&Position::new(vec![1])).is_err());

        let r = t.replace_at(&Position::new(vec![2]), v("q")).unwrap();
        assert_eq!(r, parse_term("(d /\\ q) \\/ q").unwrap());
        let r2 = Term::meet(v("u"), v("v"))
            .replace_at(&Position::root(), v("p"))
            .unwrap();
        assert_eq!(r2, v("p"));
    }

    #[test]
    fn ac_commutativity_and_associativity() {
        let a = parse_term("b /\\ a").unwrap();
        let b = parse_term("a /\\ b").unwrap();
        assert_eq!(ac_canonical(&a), ac_canonical(&b));

        let l = parse_term("(d /\\ e) \\/ ((e /\\ f) \\/ (f /\\ d))").unwrap();
        let r = parse_term("((d /\\ e) \\/ (e /\\ f)) \\/ (f /\\ d)").unwrap();
        assert_eq!(ac_canonical(&l), ac_canonical(&r));
        assert!(equal_mod_ac(&l, &r));
    }

    #[test]
    fn ac_does_not_apply_idempotency() {
        let a = parse_term("a /\\ a").unwrap();
        assert_ne!(ac_canonical(&a), ac_canonical(&v("a")));
    }

    #[test]
    fn equal_mod_ac_examples() {
        let s = parse_term("q /\\ (e \\/ p)").unwrap();
        let t = parse_term("(e \\/ p) /\\ q").unwrap();
        assert!(equal_mod_ac(&s, &t));
        assert!(!equal_mod_ac(&v("p"), &v("q")));
    }
}
