//! Tagged atoms: the element currency of every finite object in the crate.
//!
//! All constructions (coproducts, functor images, term carriers, quotients)
//! produce atoms built from these constructors, so injections are literal and
//! equality of atoms is structural. The derived `Ord` gives every object a
//! canonical element order, which the rest of the crate uses for deterministic
//! tie-breaking (sections, class representatives, witness injections).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    /// A named base atom.
    Sym(String),
    /// Coproduct injection: summand tag plus payload.
    Inj(u32, Box<Atom>),
    /// Ordered pair (writer-style products).
    Pair(Box<Atom>, Box<Atom>),
    /// Canonical finite set of atoms (powerset-style values).
    Set(BTreeSet<Atom>),
    /// Finite sequence (function tables in a fixed key order).
    Seq(Vec<Atom>),
    /// Operation applied to arguments; leaves are `Var`-wrapped atoms.
    Term(String, Vec<Atom>),
    /// A carrier atom embedded as a term leaf. Keeps terms-over-terms
    /// unambiguous: a leaf that happens to be a term is still a leaf.
    Var(Box<Atom>),
}

impl Atom {
    pub fn sym(name: impl Into<String>) -> Self {
        Atom::Sym(name.into())
    }

    pub fn inj(tag: u32, inner: Atom) -> Self {
        Atom::Inj(tag, Box::new(inner))
    }

    pub fn pair(a: Atom, b: Atom) -> Self {
        Atom::Pair(Box::new(a), Box::new(b))
    }

    pub fn term(op: impl Into<String>, args: Vec<Atom>) -> Self {
        Atom::Term(op.into(), args)
    }

    pub fn var(inner: Atom) -> Self {
        Atom::Var(Box::new(inner))
    }

    pub fn set(items: impl IntoIterator<Item = Atom>) -> Self {
        Atom::Set(items.into_iter().collect())
    }

    /// Tag of the outermost injection, if any.
    pub fn inj_tag(&self) -> Option<u32> {
        match self {
            Atom::Inj(t, _) => Some(*t),
            _ => None,
        }
    }

    /// Payload of the outermost injection, if any.
    pub fn inj_payload(&self) -> Option<&Atom> {
        match self {
            Atom::Inj(_, inner) => Some(inner),
            _ => None,
        }
    }

    /// Strips all structural wrapping down to the innermost non-`Inj` atom.
    pub fn strip_inj(&self) -> &Atom {
        let mut cur = self;
        while let Atom::Inj(_, inner) = cur {
            cur = inner;
        }
        cur
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sym(s) => write!(f, "{s}"),
            Atom::Inj(tag, inner) => write!(f, "{tag}#{inner}"),
            Atom::Pair(a, b) => write!(f, "({a},{b})"),
            Atom::Set(items) => {
                write!(f, "{{")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")
            }
            Atom::Seq(items) => {
                write!(f, "[")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
            Atom::Term(op, args) => {
                if args.is_empty() {
                    write!(f, "{op}()")
                } else {
                    write!(f, "{op}(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")
                }
            }
            // Leaves print as their payload; the wrapper is representation,
            // not content.
            Atom::Var(inner) => write!(f, "{inner}"),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
