//! Finite signatures, oriented rewrite rules, and depth-bounded term carriers.
//!
//! Ground terms are atoms: `Term(op, args)` nodes over `Var(payload)` leaves.
//! Rule patterns use named variables; a rule is admitted only when its
//! operation count strictly decreases and no variable occurs more often on
//! the right, which makes every rewrite sequence terminate.

use std::collections::{BTreeMap, BTreeSet};

use crate::atom::Atom;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    /// Operation name → arity.
    pub ops: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new(ops: impl IntoIterator<Item = (String, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, arity) in ops {
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::InvalidPresentation(format!(
                    "duplicate operation symbol {name}"
                )));
            }
        }
        Ok(Signature { ops: map })
    }

    pub fn has_proper_op(&self) -> bool {
        self.ops.values().any(|a| *a >= 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    App(String, Vec<Pattern>),
}

impl Pattern {
    fn vars(&self, out: &mut BTreeMap<String, usize>) {
        match self {
            Pattern::Var(v) => *out.entry(v.clone()).or_insert(0) += 1,
            Pattern::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn op_count(&self) -> usize {
        match self {
            Pattern::Var(_) => 0,
            Pattern::App(_, args) => 1 + args.iter().map(Pattern::op_count).sum::<usize>(),
        }
    }

    fn check_ops(&self, sig: &Signature) -> Result<()> {
        if let Pattern::App(op, args) = self {
            match sig.ops.get(op) {
                Some(&arity) if arity == args.len() => {}
                Some(&arity) => {
                    return Err(Error::InvalidPresentation(format!(
                        "{op} used with {} arguments, arity is {arity}",
                        args.len()
                    )))
                }
                None => {
                    return Err(Error::InvalidPresentation(format!(
                        "unknown operation {op} in rule"
                    )))
                }
            }
            for a in args {
                a.check_ops(sig)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Pattern,
    pub rhs: Pattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

impl Presentation {
    /// Validates the termination measure (operation count strictly decreases,
    /// variable occurrences do not grow) and spot-checks local confluence by
    /// rewriting all small terms every possible way.
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Result<Self> {
        for rule in &rules {
            rule.lhs.check_ops(&signature)?;
            rule.rhs.check_ops(&signature)?;
            if matches!(rule.lhs, Pattern::Var(_)) {
                return Err(Error::InvalidPresentation(
                    "rule left-hand side must be an operation application".into(),
                ));
            }
            let mut lvars = BTreeMap::new();
            let mut rvars = BTreeMap::new();
            rule.lhs.vars(&mut lvars);
            rule.rhs.vars(&mut rvars);
            for (v, n) in &rvars {
                if lvars.get(v).copied().unwrap_or(0) < *n {
                    return Err(Error::InvalidPresentation(format!(
                        "variable {v} occurs more often on the right-hand side"
                    )));
                }
            }
            if rule.rhs.op_count() >= rule.lhs.op_count() {
                return Err(Error::InvalidPresentation(
                    "right-hand side does not decrease the operation count".into(),
                ));
            }
        }
        let pres = Presentation { signature, rules };
        pres.confluence_spot_check()?;
        Ok(pres)
    }

    pub fn free(signature: Signature) -> Self {
        Presentation {
            signature,
            rules: Vec::new(),
        }
    }

    /// Empirical local-confluence check: every one-step rewrite of every term
    /// up to depth 3 over two fresh leaves normalizes to the same result.
    fn confluence_spot_check(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Ok(());
        }
        let leaves: BTreeSet<Atom> = [Atom::sym("?z1"), Atom::sym("?z2")].into_iter().collect();
        let terms = enumerate_terms(&leaves, &self.signature, 3, 2_000);
        for t in &terms {
            let peaks = one_step_rewrites(t, &self.rules);
            if peaks.len() < 2 {
                continue;
            }
            let mut nfs: BTreeSet<Atom> = BTreeSet::new();
            for p in &peaks {
                nfs.insert(normalize(p, self)?);
            }
            if nfs.len() > 1 {
                return Err(Error::InvalidPresentation(format!(
                    "rules are not locally confluent at {t}: normal forms {nfs:?}"
                )));
            }
        }
        Ok(())
    }
}

fn match_pattern(pat: &Pattern, t: &Atom, binding: &mut BTreeMap<String, Atom>) -> bool {
    match (pat, t) {
        (Pattern::Var(v), _) => match binding.get(v) {
            Some(bound) => bound == t,
            None => {
                binding.insert(v.clone(), t.clone());
                true
            }
        },
        (Pattern::App(op, args), Atom::Term(top, targs)) => {
            op == top
                && args.len() == targs.len()
                && args
                    .iter()
                    .zip(targs)
                    .all(|(p, sub)| match_pattern(p, sub, binding))
        }
        _ => false,
    }
}

fn instantiate(pat: &Pattern, binding: &BTreeMap<String, Atom>) -> Atom {
    match pat {
        Pattern::Var(v) => binding[v].clone(),
        Pattern::App(op, args) => Atom::term(
            op.clone(),
            args.iter().map(|a| instantiate(a, binding)).collect(),
        ),
    }
}

fn rewrite_root(t: &Atom, rules: &[Rule]) -> Option<Atom> {
    for rule in rules {
        let mut binding = BTreeMap::new();
        if match_pattern(&rule.lhs, t, &mut binding) {
            return Some(instantiate(&rule.rhs, &binding));
        }
    }
    None
}

/// All single rewrite steps at any position.
pub fn one_step_rewrites(t: &Atom, rules: &[Rule]) -> Vec<Atom> {
    let mut out = Vec::new();
    if let Some(r) = rewrite_root(t, rules) {
        out.push(r);
    }
    if let Atom::Term(op, args) = t {
        for (i, arg) in args.iter().enumerate() {
            for sub in one_step_rewrites(arg, rules) {
                let mut new_args = args.clone();
                new_args[i] = sub;
                out.push(Atom::term(op.clone(), new_args));
            }
        }
    }
    out
}

/// Leftmost-innermost normalization. Termination is guaranteed by the
/// admission measure; the fuel guard turns a violated measure into an error
/// instead of a hang.
pub fn normalize(t: &Atom, pres: &Presentation) -> Result<Atom> {
    let mut fuel = 10_000usize;
    normalize_inner(t, pres, &mut fuel)
}

fn normalize_inner(t: &Atom, pres: &Presentation, fuel: &mut usize) -> Result<Atom> {
    match t {
        Atom::Term(op, args) => {
            let args = args
                .iter()
                .map(|a| normalize_inner(a, pres, fuel))
                .collect::<Result<Vec<_>>>()?;
            let mut cur = Atom::term(op.clone(), args);
            while let Some(next) = rewrite_root(&cur, &pres.rules) {
                if *fuel == 0 {
                    return Err(Error::NonTerminatingRules(format!(
                        "normalization fuel exhausted at {cur}"
                    )));
                }
                *fuel -= 1;
                cur = normalize_inner(&next, pres, fuel)?;
            }
            Ok(cur)
        }
        other => Ok(other.clone()),
    }
}

pub fn is_normal(t: &Atom, rules: &[Rule]) -> bool {
    match t {
        Atom::Term(_, args) => {
            rewrite_root(t, rules).is_none() && args.iter().all(|a| is_normal(a, rules))
        }
        _ => true,
    }
}

/// Depth of a ground term; leaves have depth 0.
pub fn term_depth(t: &Atom) -> usize {
    match t {
        Atom::Term(_, args) => 1 + args.iter().map(term_depth).max().unwrap_or(0),
        _ => 0,
    }
}

/// All terms over the given leaf atoms up to `depth`, capped at `max_count`
/// atoms (enumeration simply stops growing past the cap).
pub fn enumerate_terms(
    leaves: &BTreeSet<Atom>,
    sig: &Signature,
    depth: usize,
    max_count: usize,
) -> BTreeSet<Atom> {
    let mut cur: BTreeSet<Atom> = leaves.iter().cloned().map(Atom::var).collect();
    for _ in 0..depth {
        let mut next = cur.clone();
        for (op, &arity) in &sig.ops {
            let pool: Vec<&Atom> = cur.iter().collect();
            let mut stack: Vec<Vec<Atom>> = vec![Vec::new()];
            for _ in 0..arity {
                let mut grown = Vec::new();
                for partial in &stack {
                    for item in &pool {
                        let mut p = partial.clone();
                        p.push((*item).clone());
                        grown.push(p);
                        if grown.len() + next.len() > max_count * 4 {
                            break;
                        }
                    }
                }
                stack = grown;
            }
            for args in stack {
                if args.len() == arity {
                    next.insert(Atom::term(op.clone(), args));
                }
                if next.len() > max_count {
                    break;
                }
            }
        }
        if next == cur || next.len() > max_count {
            cur = next;
            break;
        }
        cur = next;
    }
    cur
}

/// Normal forms of terms over the leaves up to `depth`, plus a flag telling
/// whether the depth bound binds (one more layer would add a normal form).
pub fn enumerate_normal_forms(
    leaves: &BTreeSet<Atom>,
    pres: &Presentation,
    depth: usize,
    max_count: usize,
) -> (BTreeSet<Atom>, bool) {
    let all = enumerate_terms(leaves, &pres.signature, depth, max_count);
    let nfs: BTreeSet<Atom> = all
        .into_iter()
        .filter(|t| is_normal(t, &pres.rules))
        .collect();
    let deepest: Vec<&Atom> = nfs.iter().filter(|t| term_depth(t) == depth).collect();
    let truncated = if deepest.is_empty() || !pres.signature.has_proper_op() {
        false
    } else {
        // Probe one more layer when cheap; otherwise assume the bound binds.
        let probe_budget = 50_000usize;
        let arities: Vec<usize> = pres.signature.ops.values().copied().collect();
        let worst: usize = arities
            .iter()
            .map(|a| nfs.len().saturating_pow(*a as u32))
            .sum();
        if worst <= probe_budget {
            let mut found = false;
            'outer: for (op, &arity) in &pres.signature.ops {
                if arity == 0 {
                    continue;
                }
                let pool: Vec<&Atom> = nfs.iter().collect();
                let mut idx = vec![0usize; arity];
                loop {
                    let args: Vec<Atom> = idx.iter().map(|&i| pool[i].clone()).collect();
                    if args.iter().any(|a| term_depth(a) == depth) {
                        let cand = Atom::term(op.clone(), args);
                        if is_normal(&cand, &pres.rules) {
                            found = true;
                            break 'outer;
                        }
                    }
                    let mut carry = arity;
                    while carry > 0 {
                        idx[carry - 1] += 1;
                        if idx[carry - 1] < pool.len() {
                            break;
                        }
                        idx[carry - 1] = 0;
                        carry -= 1;
                    }
                    if carry == 0 {
                        break;
                    }
                }
            }
            found
        } else {
            true
        }
    };
    (nfs, truncated)
}

/// Renames the leaf payloads of a term.
pub fn map_leaves(t: &Atom, f: &impl Fn(&Atom) -> Atom) -> Atom {
    match t {
        Atom::Var(inner) => Atom::var(f(inner)),
        Atom::Term(op, args) => {
            Atom::term(op.clone(), args.iter().map(|a| map_leaves(a, f)).collect())
        }
        other => other.clone(),
    }
}

/// Substitution: a term whose leaf payloads are themselves terms flattens by
/// splicing each payload in place of its leaf.
pub fn flatten_term(t: &Atom) -> Atom {
    match t {
        Atom::Var(inner) => (**inner).clone(),
        Atom::Term(op, args) => Atom::term(op.clone(), args.iter().map(flatten_term).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary_sig() -> Signature {
        Signature::new([("s".to_string(), 1)]).unwrap()
    }

    fn leaves(names: &[&str]) -> BTreeSet<Atom> {
        names.iter().map(|n| Atom::sym(*n)).collect()
    }

    #[test]
    fn unary_enumeration_depth_three() {
        let terms = enumerate_terms(&leaves(&["a"]), &unary_sig(), 3, 1_000);
        // a, s a, s s a, s s s a
        assert_eq!(terms.len(), 4);
        assert_eq!(terms.iter().map(term_depth).max(), Some(3));
    }

    #[test]
    fn constant_signature_closes_at_depth_one() {
        let sig = Signature::new([("c".to_string(), 0)]).unwrap();
        let pres = Presentation::free(sig);
        let (nfs, truncated) = enumerate_normal_forms(&leaves(&["a", "b"]), &pres, 3, 1_000);
        assert_eq!(nfs.len(), 3);
        assert!(!truncated);
    }

    #[test]
    fn idempotence_rule_excludes_squares() {
        let sig = Signature::new([("m".to_string(), 2)]).unwrap();
        let rule = Rule {
            lhs: Pattern::App(
                "m".into(),
                vec![Pattern::Var("x".into()), Pattern::Var("x".into())],
            ),
            rhs: Pattern::Var("x".into()),
        };
        let pres = Presentation::new(sig, vec![rule]).unwrap();
        let (nfs, _) = enumerate_normal_forms(&leaves(&["a"]), &pres, 2, 10_000);
        // Over one leaf everything collapses to the leaf itself.
        assert_eq!(nfs.len(), 1);
        let m_aa = Atom::term(
            "m",
            vec![Atom::var(Atom::sym("a")), Atom::var(Atom::sym("a"))],
        );
        assert!(!nfs.contains(&m_aa));
        assert_eq!(normalize(&m_aa, &pres).unwrap(), Atom::var(Atom::sym("a")));
    }

    #[test]
    fn collapsing_rule_reaches_exact_closure() {
        let sig = unary_sig();
        let rule = Rule {
            lhs: Pattern::App(
                "s".into(),
                vec![Pattern::App("s".into(), vec![Pattern::Var("x".into())])],
            ),
            rhs: Pattern::App("s".into(), vec![Pattern::Var("x".into())]),
        };
        let pres = Presentation::new(sig, vec![rule]).unwrap();
        let (nfs, truncated) = enumerate_normal_forms(&leaves(&["a"]), &pres, 3, 1_000);
        assert_eq!(nfs.len(), 2); // a, s a
        assert!(!truncated);
    }

    #[test]
    fn growth_rule_is_rejected() {
        let sig = unary_sig();
        let rule = Rule {
            lhs: Pattern::App("s".into(), vec![Pattern::Var("x".into())]),
            rhs: Pattern::App(
                "s".into(),
                vec![Pattern::App("s".into(), vec![Pattern::Var("x".into())])],
            ),
        };
        assert!(Presentation::new(sig, vec![rule]).is_err());
    }

    #[test]
    fn flatten_splices_leaf_payload_terms() {
        let inner = Atom::term("s", vec![Atom::var(Atom::sym("a"))]);
        let outer = Atom::term("s", vec![Atom::var(inner.clone())]);
        let flat = flatten_term(&outer);
        assert_eq!(flat, Atom::term("s", vec![inner]));
        assert_eq!(term_depth(&flat), 2);
    }
}
