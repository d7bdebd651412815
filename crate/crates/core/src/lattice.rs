//! Brute-force ground truth on finite lattices: explicit meet/join tables,
//! modularity and distributivity tests, M3/N5 sublattice detection,
//! enumeration of all lattices up to isomorphism at desk scale, evaluation
//! of terms, and exhaustive checks of the lemmas, the `u /\ v = p`
//! identity, and both constructive halves of the forbidden-sublattice
//! theorem.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::Term;

pub const MAX_ENUM_SIZE: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("size {0} is out of range (1..={MAX_ENUM_SIZE})")]
    SizeOutOfRange(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("not a poset: `{a}` and `{b}` are in a cycle")]
    NotAPoset { a: String, b: String },
    #[error("not a lattice: `{a}` and `{b}` have no {which}")]
    NotALattice { a: String, b: String, which: &'static str },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Assignment of lattice elements to term variables.
pub type Assignment = BTreeMap<String, usize>;

/// A finite lattice: the order relation plus its meet and join tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    pub n: usize,
    pub labels: Vec<String>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
}

impl FiniteLattice {
    /// Build and validate a lattice from `<=` given as a full relation
    /// (must already be reflexive and transitive).
    pub fn from_leq(labels: Vec<String>, leq: Vec<bool>) -> Result<FiniteLattice, LatticeError> {
        let n = labels.len();
        assert_eq!(leq.len(), n * n);
        for a in 0..n {
            for b in 0..n {
                if a != b && leq[a * n + b] && leq[b * n + a] {
                    return Err(LatticeError::NotAPoset {
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                    });
                }
            }
        }
        let mut meet = vec![0usize; n * n];
        let mut join = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                let lower: Vec<usize> =
                    (0..n).filter(|&c| leq[c * n + a] && leq[c * n + b]).collect();
                let glb: Vec<usize> = lower
                    .iter()
                    .copied()
                    .filter(|&c| lower.iter().all(|&d| leq[d * n + c]))
                    .collect();
                if glb.len() != 1 {
                    return Err(LatticeError::NotALattice {
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        which: "meet",
                    });
                }
                meet[a * n + b] = glb[0];
                let upper: Vec<usize> =
                    (0..n).filter(|&c| leq[a * n + c] && leq[b * n + c]).collect();
                let lub: Vec<usize> = upper
                    .iter()
                    .copied()
                    .filter(|&c| upper.iter().all(|&d| leq[c * n + d]))
                    .collect();
                if lub.len() != 1 {
                    return Err(LatticeError::NotALattice {
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        which: "join",
                    });
                }
                join[a * n + b] = lub[0];
            }
        }
        Ok(FiniteLattice { n, labels, leq, meet, join })
    }

    /// Build from cover pairs `(lower, upper)` over `0..labels.len()`.
    pub fn from_covers(
        labels: Vec<String>,
        covers: &[(usize, usize)],
    ) -> Result<FiniteLattice, LatticeError> {
        let n = labels.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            leq[a * n + a] = true;
        }
        for &(lo, hi) in covers {
            leq[lo * n + hi] = true;
        }
        // transitive closure
        for k in 0..n {
            for a in 0..n {
                if leq[a * n + k] {
                    for b in 0..n {
                        if leq[k * n + b] {
                            leq[a * n + b] = true;
                        }
                    }
                }
            }
        }
        FiniteLattice::from_leq(labels, leq)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn bottom(&self) -> usize {
        (0..self.n).find(|&b| (0..self.n).all(|x| self.leq(b, x))).expect("lattice has a bottom")
    }

    pub fn top(&self) -> usize {
        (0..self.n).find(|&t| (0..self.n).all(|x| self.leq(x, t))).expect("lattice has a top")
    }

    /// The order-dual lattice (meet and join swapped).
    pub fn dual(&self) -> FiniteLattice {
        let n = self.n;
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq(b, a);
            }
        }
        FiniteLattice {
            n,
            labels: self.labels.clone(),
            leq,
            meet: self.join.clone(),
            join: self.meet.clone(),
        }
    }

    /// First triple (in lexicographic order) violating the modular law, if
    /// any: `a >= c` but `a /\ (b \/ c) != (a /\ b) \/ c`.
    pub fn modularity_counterexample(&self) -> Option<(usize, usize, usize)> {
        for a in 0..self.n {
            for b in 0..self.n {
                for c in 0..self.n {
                    if self.leq(c, a)
                        && self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), c)
                    {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn is_modular(&self) -> bool {
        self.modularity_counterexample().is_none()
    }

    /// First triple violating distributivity, if any.
    pub fn distributivity_counterexample(&self) -> Option<(usize, usize, usize)> {
        for a in 0..self.n {
            for b in 0..self.n {
                for c in 0..self.n {
                    if self.meet(a, self.join(b, c))
                        != self.join(self.meet(a, b), self.meet(a, c))
                    {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn is_distributive(&self) -> bool {
        self.distributivity_counterexample().is_none()
    }

    fn canonical_key(&self, fix_ends: bool) -> u64 {
        let n = self.n;
        let mut best = u64::MAX;
        let mut perm: Vec<usize> = (0..n).collect();
        let (bot, top) = (self.bottom(), self.top());
        let mut consider = |perm: &[usize]| {
            // perm maps new index -> old index
            let mut key = 0u64;
            for a in 0..n {
                for b in 0..n {
                    key <<= 1;
                    if self.leq(perm[a], perm[b]) {
                        key |= 1;
                    }
                }
            }
            if key < best {
                best = key;
            }
        };
        if fix_ends && n >= 2 {
            let middles: Vec<usize> = (0..n).filter(|&x| x != bot && x != top).collect();
            permute(&middles, &mut |mid_perm| {
                let mut p = Vec::with_capacity(n);
                p.push(bot);
                p.extend_from_slice(mid_perm);
                p.push(top);
                consider(&p);
            });
        } else {
            permute(&perm.clone(), &mut |p| consider(p));
        }
        let _ = &mut perm;
        best
    }
}

impl fmt::Display for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "elements: {}", self.labels.join(" "))?;
        writeln!(f, "covers:")?;
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b
                    && self.leq(a, b)
                    && !(0..self.n)
                        .any(|m| m != a && m != b && self.leq(a, m) && self.leq(m, b))
                {
                    writeln!(f, "{} < {}", self.labels[a], self.labels[b])?;
                }
            }
        }
        Ok(())
    }
}

fn permute(items: &[usize], f: &mut impl FnMut(&[usize])) {
    let mut items = items.to_vec();
    let k = items.len();
    if k == 0 {
        f(&[]);
        return;
    }
    fn heap(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k {
            heap(items, k - 1, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(&mut items, k, f);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse the line-oriented lattice format: `elements:` then `covers:` with
/// one `<label> < <label>` cover pair per line. `#` starts a comment.
pub fn parse_lattice(text: &str) -> Result<FiniteLattice, LatticeError> {
    let mut labels: Vec<String> = Vec::new();
    let mut covers: Vec<(usize, usize)> = Vec::new();
    let mut in_covers = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("elements:") {
            for tok in rest.split_whitespace() {
                if labels.iter().any(|l| l == tok) {
                    return Err(LatticeError::Parse {
                        line: line_no,
                        msg: format!("duplicate element `{tok}`"),
                    });
                }
                labels.push(tok.to_string());
            }
        } else if line == "covers:" {
            in_covers = true;
        } else if in_covers {
            let parts: Vec<&str> = line.split('<').map(str::trim).collect();
            if parts.len() != 2 || parts[0].is_empty() || parts[1].is_empty() {
                return Err(LatticeError::Parse {
                    line: line_no,
                    msg: "expected `<label> < <label>`".into(),
                });
            }
            let idx = |label: &str| {
                labels.iter().position(|l| l == label).ok_or(LatticeError::Parse {
                    line: line_no,
                    msg: format!("unknown element `{label}`"),
                })
            };
            covers.push((idx(parts[0])?, idx(parts[1])?));
        } else {
            return Err(LatticeError::Parse {
                line: line_no,
                msg: format!("unexpected line `{line}`"),
            });
        }
    }
    if labels.is_empty() {
        return Err(LatticeError::Parse { line: 1, msg: "no elements declared".into() });
    }
    FiniteLattice::from_covers(labels, &covers)
}

/// Evaluate a term bottom-up through the meet/join tables.
pub fn eval_term(
    lattice: &FiniteLattice,
    t: &Term,
    assignment: &Assignment,
) -> Result<usize, LatticeError> {
    match t {
        Term::Var(name) => assignment
            .get(name)
            .copied()
            .ok_or_else(|| LatticeError::UnboundVariable(name.clone())),
        Term::Op(kind, l, r) => {
            let lv = eval_term(lattice, l, assignment)?;
            let rv = eval_term(lattice, r, assignment)?;
            Ok(match kind {
                crate::term::OpKind::Meet => lattice.meet(lv, rv),
                crate::term::OpKind::Join => lattice.join(lv, rv),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// All lattices on `n` elements up to isomorphism, in a deterministic
/// canonical order. Elements are labeled `e0..` with `e0` the bottom and
/// the last element the top.
pub fn enumerate_lattices(n: usize) -> Result<Vec<FiniteLattice>, LatticeError> {
    if n == 0 || n > MAX_ENUM_SIZE {
        return Err(LatticeError::SizeOutOfRange(n));
    }
    let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    if n == 1 {
        return Ok(vec![FiniteLattice::from_leq(labels, vec![true]).unwrap()]);
    }
    // Element i's down-set is a subset of 0..i, always containing 0; each
    // prefix must have all pairwise meets, and the final element is the top.
    let mut found: BTreeMap<u64, FiniteLattice> = BTreeMap::new();
    let mut down: Vec<u32> = vec![1]; // bitmask down-sets, down[i] includes i
    fn extend(
        n: usize,
        down: &mut Vec<u32>,
        labels: &[String],
        found: &mut BTreeMap<u64, FiniteLattice>,
    ) {
        let i = down.len();
        if i == n {
            if down[n - 1] != (1u32 << n) - 1 {
                return;
            }
            let mut leq = vec![false; n * n];
            for b in 0..n {
                for a in 0..n {
                    if down[b] >> a & 1 == 1 {
                        leq[a * n + b] = true;
                    }
                }
            }
            if let Ok(lat) = FiniteLattice::from_leq(labels.to_vec(), leq) {
                let key = lat.canonical_key(true);
                found.entry(key).or_insert(lat);
            }
            return;
        }
        'mask: for mask in 0..(1u32 << i) {
            if mask & 1 == 0 {
                continue;
            }
            // downward closed: every member's down-set is included
            for j in 0..i {
                if mask >> j & 1 == 1 && down[j] & !mask != 0 {
                    continue 'mask;
                }
            }
            // meets with all previous elements must exist:
            // meet(i, j) = unique maximal element of mask ∩ down[j]
            for j in 0..i {
                let common = mask & down[j];
                let mut maximal = 0;
                for c in 0..i {
                    if common >> c & 1 == 1 {
                        let mut is_max = true;
                        for d in 0..i {
                            if d != c && common >> d & 1 == 1 && down[d] >> c & 1 == 1 {
                                is_max = false;
                                break;
                            }
                        }
                        if is_max {
                            maximal += 1;
                        }
                    }
                }
                if maximal != 1 {
                    continue 'mask;
                }
            }
            down.push(mask | (1u32 << i));
            extend(n, down, labels, found);
            down.pop();
        }
    }
    extend(n, &mut down, &labels, &mut found);
    Ok(found.into_values().collect())
}

/// Slow reference enumeration for cross-checking at `n <= 5`: generate every
/// relation on pairs `i < j`, filter to transitive lattice orders, and
/// deduplicate by a full-permutation canonical form.
pub fn enumerate_lattices_naive(n: usize) -> Result<Vec<FiniteLattice>, LatticeError> {
    if n == 0 || n > 5 {
        return Err(LatticeError::SizeOutOfRange(n));
    }
    let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut found: BTreeMap<u64, FiniteLattice> = BTreeMap::new();
    for mask in 0..(1u64 << pairs.len()) {
        let mut leq = vec![false; n * n];
        for a in 0..n {
            leq[a * n + a] = true;
        }
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                leq[i * n + j] = true;
            }
        }
        // transitivity filter
        let mut transitive = true;
        'outer: for a in 0..n {
            for b in 0..n {
                if a != b && leq[a * n + b] {
                    for c in 0..n {
                        if b != c && leq[b * n + c] && !leq[a * n + c] {
                            transitive = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !transitive {
            continue;
        }
        if let Ok(lat) = FiniteLattice::from_leq(labels.clone(), leq) {
            let key = lat.canonical_key(false);
            found.entry(key).or_insert(lat);
        }
    }
    Ok(found.into_values().collect())
}

// ---------------------------------------------------------------------------
// Patterns and sublattices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    M3,
    N5,
}

impl Pattern {
    pub fn lattice(self) -> FiniteLattice {
        match self {
            Pattern::M3 => crate::corpus::M3_LAT.parse_pattern(),
            Pattern::N5 => crate::corpus::N5_LAT.parse_pattern(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pattern::M3 => "m3",
            Pattern::N5 => "n5",
        }
    }
}

trait ParsePattern {
    fn parse_pattern(&self) -> FiniteLattice;
}

impl ParsePattern for &str {
    fn parse_pattern(&self) -> FiniteLattice {
        parse_lattice(self).expect("bundled pattern parses")
    }
}

/// Search, in deterministic order, for a 5-element subset closed under meet
/// and join whose induced structure is isomorphic to the pattern. Returns
/// the embedding as pattern-element -> lattice-element indices.
pub fn find_sublattice(lattice: &FiniteLattice, pattern: Pattern) -> Option<[usize; 5]> {
    let pat = pattern.lattice();
    if lattice.n < 5 {
        return None;
    }
    let n = lattice.n;
    let mut subset = [0usize; 5];
    fn combos(
        n: usize,
        start: usize,
        depth: usize,
        subset: &mut [usize; 5],
        lattice: &FiniteLattice,
        pat: &FiniteLattice,
    ) -> Option<[usize; 5]> {
        if depth == 5 {
            // closure under meet and join
            for i in 0..5 {
                for j in 0..5 {
                    let m = lattice.meet(subset[i], subset[j]);
                    let jn = lattice.join(subset[i], subset[j]);
                    if !subset.contains(&m) || !subset.contains(&jn) {
                        return None;
                    }
                }
            }
            return embed(subset, lattice, pat);
        }
        for x in start..n {
            subset[depth] = x;
            if let Some(found) = combos(n, x + 1, depth + 1, subset, lattice, pat) {
                return Some(found);
            }
        }
        None
    }
    fn embed(
        subset: &[usize; 5],
        lattice: &FiniteLattice,
        pat: &FiniteLattice,
    ) -> Option<[usize; 5]> {
        let idxs = [0usize, 1, 2, 3, 4];
        let mut perm = idxs;
        // iterate permutations in lexicographic order for determinism
        loop {
            let ok = (0..5).all(|a| {
                (0..5).all(|b| {
                    let m = lattice.meet(subset[perm[a]], subset[perm[b]]);
                    let j = lattice.join(subset[perm[a]], subset[perm[b]]);
                    let pm = subset[perm[pat_meet(pat, a, b)]];
                    let pj = subset[perm[pat_join(pat, a, b)]];
                    m == pm && j == pj
                })
            });
            if ok {
                let mut out = [0usize; 5];
                for (i, o) in out.iter_mut().enumerate() {
                    *o = subset[perm[i]];
                }
                return Some(out);
            }
            if !next_permutation(&mut perm) {
                return None;
            }
        }
    }
    fn pat_meet(pat: &FiniteLattice, a: usize, b: usize) -> usize {
        pat.meet(a, b)
    }
    fn pat_join(pat: &FiniteLattice, a: usize, b: usize) -> usize {
        pat.join(a, b)
    }
    combos(n, 0, 0, &mut subset, lattice, &pat)
}

fn next_permutation(perm: &mut [usize; 5]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// Witness constructions
// ---------------------------------------------------------------------------

/// Outcome of the pentagon construction in a non-modular lattice.
#[derive(Debug, Clone)]
pub struct N5Witness {
    pub triple: (usize, usize, usize),
    pub a: usize,
    pub b: usize,
    pub p: usize,
    pub q: usize,
    pub e: usize,
    /// The sublattice {p, q, a, b, e}.
    pub elements: [usize; 5],
}

/// For a non-modular lattice, take the first failing triple `(d, e, f)` with
/// `d > f` and `d /\ (e \/ f) > (d /\ e) \/ f`, set `a = (d /\ e) \/ f`,
/// `b = d /\ (e \/ f)`, `p = a /\ e`, `q = a \/ e`, and return the verified
/// pentagon `{p, q, a, b, e}`.
pub fn construct_n5_witness(lattice: &FiniteLattice) -> Result<N5Witness, LatticeError> {
    if lattice.is_modular() {
        return Err(LatticeError::Precondition("the lattice is modular".into()));
    }
    let n = lattice.n;
    for d in 0..n {
        for e in 0..n {
            for f in 0..n {
                if d == f || !lattice.leq(f, d) {
                    continue;
                }
                let a = lattice.join(lattice.meet(d, e), f);
                let b = lattice.meet(d, lattice.join(e, f));
                if a == b {
                    continue;
                }
                let p = lattice.meet(a, e);
                let q = lattice.join(a, e);
                let elements = [p, q, a, b, e];
                let mut distinct = true;
                for i in 0..5 {
                    for j in (i + 1)..5 {
                        if elements[i] == elements[j] {
                            distinct = false;
                        }
                    }
                }
                if !distinct {
                    continue;
                }
                let equalities =
                    lattice.meet(a, e) == lattice.meet(b, e) && lattice.join(a, e) == lattice.join(b, e);
                let closed = elements.iter().all(|&x| {
                    elements
                        .iter()
                        .all(|&y| elements.contains(&lattice.meet(x, y)) && elements.contains(&lattice.join(x, y)))
                });
                let pentagon = is_pentagon(lattice, &elements);
                if equalities && closed && pentagon {
                    return Ok(N5Witness { triple: (d, e, f), a, b, p, q, e, elements });
                }
            }
        }
    }
    Err(LatticeError::Precondition(
        "no pentagon witness found despite non-modularity".into(),
    ))
}

fn is_pentagon(lattice: &FiniteLattice, k: &[usize; 5]) -> bool {
    // {p, q, a, b, e} with p bottom, q top, a < b on one side, e on the other
    let [p, q, a, b, e] = *k;
    lattice.leq(p, a)
        && lattice.leq(a, b)
        && lattice.leq(b, q)
        && lattice.leq(p, e)
        && lattice.leq(e, q)
        && !lattice.leq(a, e)
        && !lattice.leq(e, a)
        && !lattice.leq(b, e)
        && !lattice.leq(e, b)
        && a != b
        && lattice.meet(b, e) == p
        && lattice.join(a, e) == q
}

/// Outcome of the diamond construction in a modular non-distributive lattice.
#[derive(Debug, Clone)]
pub struct M3Witness {
    pub triple: (usize, usize, usize),
    pub p: usize,
    pub q: usize,
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

impl M3Witness {
    pub fn elements(&self) -> [usize; 5] {
        [self.p, self.q, self.u, self.v, self.w]
    }
}

/// Evaluate the five defining expressions over a witness triple.
pub fn diamond_elements(
    lattice: &FiniteLattice,
    d: usize,
    e: usize,
    f: usize,
) -> (usize, usize, usize, usize, usize) {
    let p = lattice.join(
        lattice.join(lattice.meet(d, e), lattice.meet(e, f)),
        lattice.meet(f, d),
    );
    let q = lattice.meet(
        lattice.meet(lattice.join(d, e), lattice.join(e, f)),
        lattice.join(f, d),
    );
    let u = lattice.join(lattice.meet(d, q), p);
    let v = lattice.join(lattice.meet(e, q), p);
    let w = lattice.join(lattice.meet(f, q), p);
    (p, q, u, v, w)
}

/// For a modular non-distributive lattice, take the first triple with
/// `d /\ (e \/ f) > (d /\ e) \/ (d /\ f)`, evaluate p, q, u, v, w, and
/// verify the five diamond properties.
pub fn construct_m3_witness(lattice: &FiniteLattice) -> Result<M3Witness, LatticeError> {
    if !lattice.is_modular() {
        return Err(LatticeError::Precondition("the lattice is not modular".into()));
    }
    if lattice.is_distributive() {
        return Err(LatticeError::Precondition("the lattice is distributive".into()));
    }
    let n = lattice.n;
    for d in 0..n {
        for e in 0..n {
            for f in 0..n {
                let lhs = lattice.meet(d, lattice.join(e, f));
                let rhs = lattice.join(lattice.meet(d, e), lattice.meet(d, f));
                if lhs == rhs {
                    continue;
                }
                let (p, q, u, v, w) = diamond_elements(lattice, d, e, f);
                let props = lattice.leq(p, q)
                    && p != q
                    && [u, v, w]
                        .iter()
                        .all(|&x| lattice.leq(p, x) && lattice.leq(x, q))
                    && lattice.meet(u, v) == p
                    && lattice.meet(v, w) == p
                    && lattice.meet(w, u) == p
                    && lattice.join(u, v) == q
                    && lattice.join(v, w) == q
                    && lattice.join(w, u) == q
                    && {
                        let k = [p, q, u, v, w];
                        (0..5).all(|i| ((i + 1)..5).all(|j| k[i] != k[j]))
                    };
                if props {
                    return Ok(M3Witness { triple: (d, e, f), p, q, u, v, w });
                }
            }
        }
    }
    Err(LatticeError::Precondition(
        "no diamond witness found despite non-distributivity".into(),
    ))
}

// ---------------------------------------------------------------------------
// Exhaustive checks
// ---------------------------------------------------------------------------

/// Exhaustive check of `u /\ v = p` over every triple of lattice elements.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub triples: usize,
    /// `(d, e, f, u /\ v, p)` for every failing triple.
    pub failures: Vec<(usize, usize, usize, usize, usize)>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn check_identity_uvp(lattice: &FiniteLattice) -> IdentityReport {
    let n = lattice.n;
    let mut failures = Vec::new();
    for d in 0..n {
        for e in 0..n {
            for f in 0..n {
                let (p, _, u, v, _) = diamond_elements(lattice, d, e, f);
                let uv = lattice.meet(u, v);
                if uv != p {
                    failures.push((d, e, f, uv, p));
                }
            }
        }
    }
    IdentityReport { triples: n * n * n, failures }
}

/// Exhaustive check of the Connecting Lemma equivalences, both half-way
/// lemma parts, and the strict sharpenings used by the witness search.
#[derive(Debug, Clone, Default)]
pub struct LemmaReport {
    pub connecting_failures: Vec<(usize, usize)>,
    pub halfway1_failures: Vec<(usize, usize, usize)>,
    pub halfway2_failures: Vec<(usize, usize, usize)>,
    pub sharpening_failures: Vec<(usize, usize, usize)>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.connecting_failures.is_empty()
            && self.halfway1_failures.is_empty()
            && self.halfway2_failures.is_empty()
            && self.sharpening_failures.is_empty()
    }
}

pub fn check_lemmas(lattice: &FiniteLattice) -> LemmaReport {
    let n = lattice.n;
    let mut report = LemmaReport::default();
    for a in 0..n {
        for b in 0..n {
            let leq = lattice.leq(a, b);
            let join_absorbs = lattice.join(a, b) == b;
            let meet_absorbs = lattice.meet(a, b) == a;
            if leq != join_absorbs || leq != meet_absorbs {
                report.connecting_failures.push((a, b));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs1 = lattice.meet(a, lattice.join(b, c));
                let rhs1 = lattice.join(lattice.meet(a, b), lattice.meet(a, c));
                if !lattice.leq(rhs1, lhs1) {
                    report.halfway1_failures.push((a, b, c));
                }
                if lattice.leq(c, a) {
                    let rhs2 = lattice.join(lattice.meet(a, b), c);
                    if !lattice.leq(rhs2, lhs1) {
                        report.halfway2_failures.push((a, b, c));
                    }
                    // inequality plus the half-way bound forces strict order
                    if lhs1 != rhs2 && !(lattice.leq(rhs2, lhs1) && rhs2 != lhs1) {
                        report.sharpening_failures.push((a, b, c));
                    }
                }
                if lhs1 != rhs1 && !(lattice.leq(rhs1, lhs1) && rhs1 != lhs1) {
                    report.sharpening_failures.push((a, b, c));
                }
            }
        }
    }
    report
}

/// Per-size outcome of the forbidden-sublattice checks.
#[derive(Debug, Clone)]
pub struct SizeReport {
    pub n: usize,
    pub lattices: usize,
    pub non_modular: usize,
    pub non_distributive: usize,
    /// Lattices where "non-modular iff N5 embeds" failed.
    pub modular_mismatches: usize,
    /// Lattices where "non-distributive iff N5 or M3 embeds" failed.
    pub distributive_mismatches: usize,
}

#[derive(Debug, Clone)]
pub struct M3N5Report {
    pub sizes: Vec<SizeReport>,
}

impl M3N5Report {
    pub fn consistent(&self) -> bool {
        self.sizes
            .iter()
            .all(|s| s.modular_mismatches == 0 && s.distributive_mismatches == 0)
    }
}

/// For every lattice up to `max_n`, check both biconditionals:
/// non-modular iff N5 embeds; non-distributive iff N5 or M3 embeds.
pub fn verify_m3n5(max_n: usize) -> Result<M3N5Report, LatticeError> {
    if max_n == 0 || max_n > MAX_ENUM_SIZE {
        return Err(LatticeError::SizeOutOfRange(max_n));
    }
    let mut sizes = Vec::new();
    for n in 1..=max_n {
        let lattices = enumerate_lattices(n)?;
        let mut report = SizeReport {
            n,
            lattices: lattices.len(),
            non_modular: 0,
            non_distributive: 0,
            modular_mismatches: 0,
            distributive_mismatches: 0,
        };
        for lat in &lattices {
            let non_modular = !lat.is_modular();
            let non_distributive = !lat.is_distributive();
            let has_n5 = find_sublattice(lat, Pattern::N5).is_some();
            let has_m3 = find_sublattice(lat, Pattern::M3).is_some();
            if non_modular {
                report.non_modular += 1;
            }
            if non_distributive {
                report.non_distributive += 1;
            }
            if non_modular != has_n5 {
                report.modular_mismatches += 1;
            }
            if non_distributive != (has_n5 || has_m3) {
                report.distributive_mismatches += 1;
            }
        }
        sizes.push(report);
    }
    Ok(M3N5Report { sizes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn m3() -> FiniteLattice {
        parse_lattice(corpus::M3_LAT).unwrap()
    }

    fn n5() -> FiniteLattice {
        parse_lattice(corpus::N5_LAT).unwrap()
    }

    #[test]
    fn bundled_lattices_parse_and_classify() {
        let m3 = m3();
        assert!(m3.is_modular());
        assert!(!m3.is_distributive());
        let n5 = n5();
        assert!(!n5.is_modular());
        assert!(!n5.is_distributive());
        let c2 = parse_lattice(corpus::CHAIN2_LAT).unwrap();
        assert!(c2.is_distributive());
        let c3 = parse_lattice(corpus::CHAIN3_LAT).unwrap();
        assert!(c3.is_distributive() && c3.is_modular());
    }

    #[test]
    fn bowtie_is_not_a_lattice() {
        let text = "elements: a b c d\ncovers:\na < c\na < d\nb < c\nb < d\n";
        match parse_lattice(text) {
            Err(LatticeError::NotALattice { .. }) => {}
            other => panic!("expected not-a-lattice, got {other:?}"),
        }
    }

    #[test]
    fn cycle_is_not_a_poset() {
        let text = "elements: a b\ncovers:\na < b\nb < a\n";
        match parse_lattice(text) {
            Err(LatticeError::NotAPoset { .. }) => {}
            other => panic!("expected not-a-poset, got {other:?}"),
        }
    }

    #[test]
    fn eval_diamond_expressions_in_m3() {
        // with d, e, f the three atoms: p evaluates to bottom, q to top
        let m3 = m3();
        let (d, e, f) = (1, 2, 3);
        let (p, q, u, v, w) = diamond_elements(&m3, d, e, f);
        assert_eq!(p, 0);
        assert_eq!(q, 4);
        assert_eq!((u, v, w), (1, 2, 3));
    }

    #[test]
    fn eval_term_idempotent_variable() {
        let m3 = m3();
        let t = crate::term::parse_term("x /\\ x").unwrap();
        for x in 0..m3.n {
            let mut a = Assignment::new();
            a.insert("x".into(), x);
            assert_eq!(eval_term(&m3, &t, &a).unwrap(), x);
        }
        let unbound = eval_term(&m3, &Term::var("zz"), &Assignment::new());
        assert!(matches!(unbound, Err(LatticeError::UnboundVariable(_))));
    }

    #[test]
    fn dual_preserves_modularity_class() {
        for n in 1..=5 {
            for lat in enumerate_lattices(n).unwrap() {
                assert_eq!(lat.is_modular(), lat.dual().is_modular());
                assert_eq!(lat.is_distributive(), lat.dual().is_distributive());
            }
        }
    }

    #[test]
    fn pattern_self_detection() {
        assert!(find_sublattice(&n5(), Pattern::N5).is_some());
        assert!(find_sublattice(&m3(), Pattern::M3).is_some());
        assert!(find_sublattice(&m3(), Pattern::N5).is_none());
        assert!(find_sublattice(&n5(), Pattern::M3).is_none());
    }

    #[test]
    fn witness_in_m3_uses_the_atoms() {
        let w = construct_m3_witness(&m3()).unwrap();
        assert_eq!(w.triple, (1, 2, 3));
        assert_eq!((w.p, w.q), (0, 4));
        assert_eq!((w.u, w.v, w.w), (1, 2, 3));
    }

    #[test]
    fn witness_in_n5_is_the_whole_pentagon() {
        let w = construct_n5_witness(&n5()).unwrap();
        let mut elems = w.elements;
        elems.sort();
        assert_eq!(elems, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn witness_preconditions() {
        assert!(construct_n5_witness(&m3()).is_err());
        let c3 = parse_lattice(corpus::CHAIN3_LAT).unwrap();
        assert!(construct_m3_witness(&c3).is_err());
    }
}
