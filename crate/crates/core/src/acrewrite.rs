//! Single-rule rewriting modulo associativity and commutativity, on the
//! flattened term view. The lenient verifier composes justifications with
//! this machinery so that unmentioned A/C shuffles never block a proof step.

use std::collections::BTreeSet;

use crate::term::{Flat, OpKind};

/// All results of replacing one occurrence of `redex` in `target` by
/// `replacement`, modulo AC. An occurrence is either a whole flat subterm
/// equal to the redex or, when the redex has the same operator as a chain
/// node, a sub-multiset grouping of that chain's arguments.
pub(crate) fn replace_occurrences(target: &Flat, redex: &Flat, replacement: &Flat) -> Vec<Flat> {
    let mut out: BTreeSet<Flat> = BTreeSet::new();
    if target == redex {
        out.insert(replacement.clone());
    }
    if let Flat::Op(kind, args) = target {
        if let Flat::Op(rk, rargs) = redex {
            if rk == kind && rargs.len() < args.len() && multiset_subset(rargs, args) {
                let mut rest = multiset_difference(args, rargs);
                rest.push(replacement.clone());
                out.insert(Flat::node(*kind, rest));
            }
        }
        for (i, arg) in args.iter().enumerate() {
            for sub in replace_occurrences(arg, redex, replacement) {
                let mut new_args = args.clone();
                new_args[i] = sub;
                out.insert(Flat::node(*kind, new_args));
            }
        }
    }
    out.into_iter().collect()
}

/// All idempotency contractions `x ∘ x -> x` modulo AC, with the contracted
/// group. A group is any nonempty sub-multiset occurring twice in a chain.
pub(crate) fn idempotency_contractions(target: &Flat) -> Vec<(Flat, Flat)> {
    let mut out: BTreeSet<(Flat, Flat)> = BTreeSet::new();
    if let Flat::Op(kind, args) = target {
        for group in duplicated_groups(args) {
            let rest = multiset_difference(args, &doubled(&group));
            let mut kept = rest;
            kept.extend(group.iter().cloned());
            let x = Flat::node(*kind, group.clone());
            out.insert((x, Flat::node(*kind, kept)));
        }
        for (i, arg) in args.iter().enumerate() {
            for (x, sub) in idempotency_contractions(arg) {
                let mut new_args = args.clone();
                new_args[i] = sub;
                out.insert((x, Flat::node(*kind, new_args)));
            }
        }
    }
    out.into_iter().collect()
}

/// All absorption contractions `x ∘ (x ∘' y) -> x` modulo AC, returning
/// `(x, y, outer kind, result)`.
pub(crate) fn absorption_contractions(target: &Flat) -> Vec<(Flat, Flat, OpKind, Flat)> {
    let mut out: BTreeSet<(Flat, Flat, OpKind, Flat)> = BTreeSet::new();
    if let Flat::Op(kind, args) = target {
        let dual = kind.dual();
        for (j, candidate) in args.iter().enumerate() {
            let Flat::Op(ck, cargs) = candidate else { continue };
            if *ck != dual {
                continue;
            }
            let mut others = args.clone();
            others.remove(j);
            for group in nonempty_sub_multisets(&others) {
                let x = Flat::node(*kind, group);
                let y = match &x {
                    Flat::Op(xk, xargs) if *xk == dual => {
                        if xargs.len() < cargs.len() && multiset_subset(xargs, cargs) {
                            Some(Flat::node(dual, multiset_difference(cargs, xargs)))
                        } else {
                            None
                        }
                    }
                    _ => {
                        if cargs.len() >= 2 && cargs.contains(&x) {
                            let rest = multiset_difference(cargs, std::slice::from_ref(&x));
                            Some(Flat::node(dual, rest))
                        } else {
                            None
                        }
                    }
                };
                if let Some(y) = y {
                    out.insert((x, y, *kind, Flat::node(*kind, others.clone())));
                }
            }
        }
        for (i, arg) in args.iter().enumerate() {
            for (x, y, k, sub) in absorption_contractions(arg) {
                let mut new_args = args.clone();
                new_args[i] = sub;
                out.insert((x, y, k, Flat::node(*kind, new_args)));
            }
        }
    }
    out.into_iter().collect()
}

fn doubled(group: &[Flat]) -> Vec<Flat> {
    let mut v = group.to_vec();
    v.extend(group.iter().cloned());
    v
}

pub(crate) fn multiset_subset(small: &[Flat], big: &[Flat]) -> bool {
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

pub(crate) fn multiset_difference(big: &[Flat], small: &[Flat]) -> Vec<Flat> {
    let mut pool: Vec<Flat> = big.to_vec();
    for s in small {
        if let Some(i) = pool.iter().position(|b| b == s) {
            pool.swap_remove(i);
        }
    }
    pool
}

/// Nonempty sub-multisets `G` of `args` with `G ⊎ G ⊆ args`.
fn duplicated_groups(args: &[Flat]) -> Vec<Vec<Flat>> {
    let mut distinct: Vec<(Flat, usize)> = Vec::new();
    for a in args {
        match distinct.iter_mut().find(|(d, _)| d == a) {
            Some((_, n)) => *n += 1,
            None => distinct.push((a.clone(), 1)),
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<Flat> = Vec::new();
    fn go(
        distinct: &[(Flat, usize)],
        idx: usize,
        current: &mut Vec<Flat>,
        out: &mut Vec<Vec<Flat>>,
    ) {
        if idx == distinct.len() {
            if !current.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        let (elem, count) = &distinct[idx];
        let max_copies = count / 2;
        for copies in 0..=max_copies {
            for _ in 0..copies {
                current.push(elem.clone());
            }
            go(distinct, idx + 1, current, out);
            for _ in 0..copies {
                current.pop();
            }
        }
    }
    go(&distinct, 0, &mut current, &mut out);
    out
}

/// Nonempty sub-multisets of `args`.
fn nonempty_sub_multisets(args: &[Flat]) -> Vec<Vec<Flat>> {
    let mut distinct: Vec<(Flat, usize)> = Vec::new();
    for a in args {
        match distinct.iter_mut().find(|(d, _)| d == a) {
            Some((_, n)) => *n += 1,
            None => distinct.push((a.clone(), 1)),
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<Flat> = Vec::new();
    fn go(
        distinct: &[(Flat, usize)],
        idx: usize,
        current: &mut Vec<Flat>,
        out: &mut Vec<Vec<Flat>>,
    ) {
        if idx == distinct.len() {
            if !current.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        let (elem, count) = &distinct[idx];
        for copies in 0..=*count {
            for _ in 0..copies {
                current.push(elem.clone());
            }
            go(distinct, idx + 1, current, out);
            for _ in 0..copies {
                current.pop();
            }
        }
    }
    go(&distinct, 0, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{equal_mod_ac, from_flat, parse_term, to_flat, Term};

    fn flat(s: &str) -> Flat {
        to_flat(&parse_term(s).unwrap())
    }

    #[test]
    fn replace_full_subterm() {
        let t = flat("(d /\\ q) \\/ p");
        let results = replace_occurrences(&t, &flat("d /\\ q"), &Flat::Var("z".into()));
        assert!(results.contains(&flat("z \\/ p")));
    }

    #[test]
    fn replace_partial_grouping_of_chain() {
        // fold (a \/ b) out of the chain a \/ b \/ c
        let t = flat("a \\/ b \\/ c");
        let results = replace_occurrences(&t, &flat("a \\/ b"), &Flat::Var("z".into()));
        assert!(results.contains(&flat("z \\/ c")));
    }

    #[test]
    fn idempotency_inside_chain() {
        let t = flat("q /\\ ((e \\/ p) /\\ q)");
        let found = idempotency_contractions(&t);
        let expected = flat("q /\\ (e \\/ p)");
        assert!(found.iter().any(|(x, r)| {
            *x == Flat::Var("q".into()) && *r == expected
        }));
    }

    #[test]
    fn absorption_with_commuted_inner() {
        // e \/ (d /\ e) contracts to e even though the inner meet is commuted
        let t = flat("e \\/ (d /\\ e)");
        let found = absorption_contractions(&t);
        assert!(found
            .iter()
            .any(|(x, _, _, r)| *x == Flat::Var("e".into()) && *r == Flat::Var("e".into())));
    }

    #[test]
    fn absorption_inside_flattened_context() {
        // d /\ q-body: d /\ ((d \/ e) /\ (e \/ f) /\ (f \/ d)) absorbs (d \/ e)
        let t = flat("d /\\ ((d \\/ e) /\\ (e \\/ f) /\\ (f \\/ d))");
        let found = absorption_contractions(&t);
        let target = flat("d /\\ ((e \\/ f) /\\ (f \\/ d))");
        assert!(found.iter().any(|(_, _, _, r)| *r == target));
        // and (f \/ d) as well, with x = d occurring commuted in the join
        let target2 = flat("d /\\ ((d \\/ e) /\\ (e \\/ f))");
        assert!(found.iter().any(|(_, _, _, r)| *r == target2));
    }

    #[test]
    fn absorption_group_x() {
        // (a /\ b) /\ ((a /\ b) \/ y) -> a /\ b with x a two-element group
        let t = flat("(a /\\ b) /\\ ((a /\\ b) \\/ y)");
        let found = absorption_contractions(&t);
        assert!(found
            .iter()
            .any(|(_, _, _, r)| equal_mod_ac(&from_flat(r), &parse_term("a /\\ b").unwrap())));
        let _ = Term::var("unused");
    }
}
