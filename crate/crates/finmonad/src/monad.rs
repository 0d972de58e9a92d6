//! Concrete monads on finite carriers: builtins, presented (term) monads,
//! monad morphisms, law checking, unit complements, and the (split epi,
//! mono)-factorization of monad morphisms.
//!
//! Monads are represented semantically: an object map plus pointwise unit,
//! multiplication and morphism actions, so builtins and presented monads
//! share one interface. Full function tables are materialized on demand.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atom::Atom;
use crate::base::{
    all_morphisms, tagged_union, BaseMor, BaseObj, Component, ObjData, Variant,
};
use crate::error::{Error, Result};
use crate::functor::{DynFunctor, Endofunctor};
use crate::report::{LawReport, Outcome};
use crate::term::{
    enumerate_normal_forms, flatten_term, map_leaves, normalize,
    Presentation,
};

/// Pointwise semantics of a monad on finite objects.
pub trait MonadOps: Send + Sync {
    fn variant(&self) -> Variant;
    fn name(&self) -> String;
    /// Object map `A ↦ T A`.
    fn apply_obj(&self, a: &BaseObj) -> BaseObj;
    /// `T f` applied to one atom of `T(dom f)`.
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom;
    /// `η_A` applied to one atom of `A`.
    fn unit_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom;
    /// `μ_A` applied to one atom of `T T A`. The result is the mathematically
    /// correct value even when it falls outside a depth-truncated carrier;
    /// table builders detect the escape.
    fn mult_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom;
    fn preserves_monos_claimed(&self) -> bool {
        true
    }
    /// Predicted `|T A|` from `A`, when cheap.
    fn size_hint(&self, _a: &BaseObj) -> Option<u128> {
        None
    }
    /// Uniform-ish random atom of `T A` without enumerating it; only monads
    /// whose carriers explode need to implement this.
    fn sample_atom(&self, _a: &BaseObj, _rng: &mut ChaCha8Rng) -> Option<Atom> {
        None
    }
}

/// Shared handle to a monad.
#[derive(Clone)]
pub struct MonadRep(pub Arc<dyn MonadOps>);

impl MonadRep {
    pub fn new(ops: impl MonadOps + 'static) -> Self {
        MonadRep(Arc::new(ops))
    }

    pub fn variant(&self) -> Variant {
        self.0.variant()
    }

    pub fn name(&self) -> String {
        self.0.name()
    }

    pub fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        self.0.apply_obj(a)
    }

    pub fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        self.0.map_atom(f, comp, x)
    }

    pub fn unit_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        self.0.unit_atom(a, comp, x)
    }

    pub fn mult_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        self.0.mult_atom(a, comp, x)
    }

    /// Full table of `T f`.
    pub fn map_mor(&self, f: &BaseMor) -> BaseMor {
        let dom = self.apply_obj(&f.dom);
        let cod = self.apply_obj(&f.cod);
        BaseMor::from_fn(&dom, &cod, |comp, x| self.map_atom(f, comp, x))
            .expect("functor action stays in the carrier")
    }

    /// Full table of `η_A : A → T A`.
    pub fn unit(&self, a: &BaseObj) -> BaseMor {
        let ta = self.apply_obj(a);
        BaseMor::from_fn(a, &ta, |comp, x| self.unit_atom(a, comp, x))
            .expect("unit lands in the carrier")
    }

    /// Full table of `μ_A : T T A → T A`. Fails when a depth-truncated
    /// carrier cannot hold a multiplication image.
    pub fn mult(&self, a: &BaseObj) -> Result<BaseMor> {
        let ta = self.apply_obj(a);
        let tta = self.apply_obj(&ta);
        BaseMor::from_fn(&tta, &ta, |comp, x| self.mult_atom(a, comp, x))
    }

    /// The underlying endofunctor.
    pub fn functor(&self) -> DynFunctor {
        Arc::new(MonadFunctor(self.clone()))
    }
}

/// Endofunctor view of a monad.
pub struct MonadFunctor(pub MonadRep);

impl Endofunctor for MonadFunctor {
    fn variant(&self) -> Variant {
        self.0.variant()
    }
    fn name(&self) -> String {
        self.0.name()
    }
    fn on_obj(&self, x: &BaseObj) -> BaseObj {
        self.0.apply_obj(x)
    }
    fn on_mor(&self, f: &BaseMor) -> BaseMor {
        self.0.map_mor(f)
    }
    fn preserves_monos_claimed(&self) -> bool {
        self.0 .0.preserves_monos_claimed()
    }
    fn size_hint(&self, input: &BaseObj) -> Option<u128> {
        self.0 .0.size_hint(input)
    }
}

/// A finite monoid given by its multiplication table.
#[derive(Clone, Debug)]
pub struct MonoidTable {
    pub name: String,
    pub elems: BTreeSet<Atom>,
    pub unit: Atom,
    table: BTreeMap<(Atom, Atom), Atom>,
}

impl MonoidTable {
    pub fn new(
        name: impl Into<String>,
        elems: impl IntoIterator<Item = Atom>,
        unit: Atom,
        entries: impl IntoIterator<Item = ((Atom, Atom), Atom)>,
    ) -> Result<Self> {
        let m = MonoidTable {
            name: name.into(),
            elems: elems.into_iter().collect(),
            unit,
            table: entries.into_iter().collect(),
        };
        if !m.elems.contains(&m.unit) {
            return Err(Error::InvalidPresentation("monoid unit not an element".into()));
        }
        for a in &m.elems {
            for b in &m.elems {
                let ab = m.table.get(&(a.clone(), b.clone())).ok_or_else(|| {
                    Error::InvalidPresentation(format!("monoid table missing {a}·{b}"))
                })?;
                if !m.elems.contains(ab) {
                    return Err(Error::InvalidPresentation("monoid not closed".into()));
                }
            }
            if m.mul(&m.unit, a) != *a || m.mul(a, &m.unit) != *a {
                return Err(Error::InvalidPresentation("monoid unit law fails".into()));
            }
            for b in &m.elems {
                for c in &m.elems {
                    if m.mul(&m.mul(a, b), c) != m.mul(a, &m.mul(b, c)) {
                        return Err(Error::InvalidPresentation(
                            "monoid multiplication not associative".into(),
                        ));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn mul(&self, a: &Atom, b: &Atom) -> Atom {
        self.table[&(a.clone(), b.clone())].clone()
    }

    /// The two-element group.
    pub fn z2() -> Self {
        let zero = Atom::sym("0");
        let one = Atom::sym("1");
        MonoidTable::new(
            "Z2",
            [zero.clone(), one.clone()],
            zero.clone(),
            [
                ((zero.clone(), zero.clone()), zero.clone()),
                ((zero.clone(), one.clone()), one.clone()),
                ((one.clone(), zero.clone()), one.clone()),
                ((one.clone(), one.clone()), zero),
            ],
        )
        .expect("Z2 is a monoid")
    }
}

#[derive(Clone, Debug)]
pub enum BuiltinKind {
    Exception(BaseObj),
    ExceptionZero(BaseObj),
    Terminal,
    TerminalZero,
    Reader(BaseObj),
    Writer(MonoidTable),
    NonemptyPowerset,
}

/// Constructs a builtin monad on the chosen base-category variant.
pub fn builtin_monad(kind: BuiltinKind, variant: Variant) -> Result<MonadRep> {
    match kind {
        BuiltinKind::Exception(e) | BuiltinKind::ExceptionZero(e)
            if e.variant() != variant =>
        {
            Err(Error::MixedVariants(
                variant.to_string(),
                e.variant().to_string(),
            ))
        }
        BuiltinKind::Exception(e) => Ok(MonadRep::new(ExceptionMonad { e, zero: false })),
        BuiltinKind::ExceptionZero(e) => Ok(MonadRep::new(ExceptionMonad { e, zero: true })),
        BuiltinKind::Terminal => Ok(MonadRep::new(TerminalMonad {
            variant,
            zero: false,
        })),
        BuiltinKind::TerminalZero => Ok(MonadRep::new(TerminalMonad {
            variant,
            zero: true,
        })),
        BuiltinKind::Reader(env) => {
            if variant != Variant::FinSet || env.variant() != Variant::FinSet {
                return Err(Error::Unsupported("reader monad lives over finite sets".into()));
            }
            if env.is_empty() {
                return Err(Error::Unsupported("reader environment must be nonempty".into()));
            }
            Ok(MonadRep::new(ReaderMonad { env }))
        }
        BuiltinKind::Writer(monoid) => {
            if variant != Variant::FinSet {
                return Err(Error::Unsupported("writer monad lives over finite sets".into()));
            }
            Ok(MonadRep::new(WriterMonad { monoid }))
        }
        BuiltinKind::NonemptyPowerset => {
            if variant != Variant::FinSet {
                return Err(Error::Unsupported(
                    "powerset monad lives over finite sets".into(),
                ));
            }
            Ok(MonadRep::new(PowersetMonad))
        }
    }
}

/// `T X = X + E` with tags 0 (unit) and 1 (exceptions); the zero flavour
/// sends the empty object to itself.
pub struct ExceptionMonad {
    pub e: BaseObj,
    pub zero: bool,
}

impl ExceptionMonad {
    fn degenerate(&self, a: &BaseObj) -> bool {
        self.zero && a.is_empty()
    }
}

impl MonadOps for ExceptionMonad {
    fn variant(&self) -> Variant {
        self.e.variant()
    }
    fn name(&self) -> String {
        format!(
            "exception{}({})",
            if self.zero { "0" } else { "" },
            self.e
        )
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        if self.degenerate(a) {
            return a.clone();
        }
        tagged_union(self.variant(), &[(0, a), (1, &self.e)])
            .expect("same variant")
            .0
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        if self.degenerate(&f.dom) {
            unreachable!("no atoms in T∅");
        }
        if self.degenerate(&f.cod) {
            unreachable!("maps out of a nonempty carrier land in a nonempty one");
        }
        match x {
            Atom::Inj(0, inner) => Atom::inj(0, f.apply(comp, inner)),
            Atom::Inj(1, inner) => Atom::inj(1, (**inner).clone()),
            _ => unreachable!("exception carrier atoms are tagged"),
        }
    }
    fn unit_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        Atom::inj(0, x.clone())
    }
    fn mult_atom(&self, a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        if self.degenerate(a) {
            unreachable!("no atoms in TT∅");
        }
        match x {
            Atom::Inj(0, inner) => (**inner).clone(),
            Atom::Inj(1, inner) => Atom::inj(1, (**inner).clone()),
            _ => unreachable!("exception carrier atoms are tagged"),
        }
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        Some(a.size() as u128 + self.e.size() as u128)
    }
}

/// `T X = 1`; the zero flavour sends the empty object to itself. Its unit
/// collapses, so this monad is not consistent (and not separated).
pub struct TerminalMonad {
    pub variant: Variant,
    pub zero: bool,
}

impl MonadOps for TerminalMonad {
    fn variant(&self) -> Variant {
        self.variant
    }
    fn name(&self) -> String {
        format!("terminal{}", if self.zero { "0" } else { "" })
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        if self.zero && a.is_empty() {
            a.clone()
        } else {
            BaseObj::terminal(self.variant)
        }
    }
    fn map_atom(&self, _f: &BaseMor, _comp: &Component, x: &Atom) -> Atom {
        x.clone()
    }
    fn unit_atom(&self, _a: &BaseObj, comp: &Component, _x: &Atom) -> Atom {
        match comp {
            Component::Edge => Atom::sym("*e"),
            _ => Atom::sym("*"),
        }
    }
    fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        x.clone()
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        if self.zero && a.is_empty() {
            Some(0)
        } else {
            Some(BaseObj::terminal(self.variant).size() as u128)
        }
    }
}

/// `T X = X^E` for a fixed nonempty finite environment; carriers are value
/// sequences in the sorted order of `E`.
pub struct ReaderMonad {
    pub env: BaseObj,
}

impl ReaderMonad {
    fn env_len(&self) -> usize {
        self.env.size()
    }
}

impl MonadOps for ReaderMonad {
    fn variant(&self) -> Variant {
        Variant::FinSet
    }
    fn name(&self) -> String {
        format!("reader({})", self.env)
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        let atoms: Vec<&Atom> = a.atoms(&Component::Single).iter().collect();
        let n = self.env_len();
        let mut out: Vec<Vec<Atom>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for partial in &out {
                for v in &atoms {
                    let mut p = partial.clone();
                    p.push((*v).clone());
                    next.push(p);
                }
            }
            out = next;
        }
        let obj = BaseObj::finset(out.into_iter().map(Atom::Seq));
        if a.truncated {
            obj.mark_truncated()
        } else {
            obj
        }
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Seq(vs) => Atom::Seq(vs.iter().map(|v| f.apply(comp, v)).collect()),
            _ => unreachable!("reader carrier atoms are sequences"),
        }
    }
    fn unit_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        Atom::Seq(vec![x.clone(); self.env_len()])
    }
    fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Seq(ts) => Atom::Seq(
                ts.iter()
                    .enumerate()
                    .map(|(i, t)| match t {
                        Atom::Seq(vs) => vs[i].clone(),
                        _ => unreachable!("inner reader atoms are sequences"),
                    })
                    .collect(),
            ),
            _ => unreachable!("reader carrier atoms are sequences"),
        }
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        (a.size() as u128).checked_pow(self.env_len() as u32)
    }
}

/// `T X = M × X` for a finite monoid `M`; multiplication combines labels.
pub struct WriterMonad {
    pub monoid: MonoidTable,
}

impl MonadOps for WriterMonad {
    fn variant(&self) -> Variant {
        Variant::FinSet
    }
    fn name(&self) -> String {
        format!("writer({})", self.monoid.name)
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        let obj = BaseObj::finset(
            self.monoid
                .elems
                .iter()
                .flat_map(|m| {
                    a.atoms(&Component::Single)
                        .iter()
                        .map(move |x| Atom::pair(m.clone(), x.clone()))
                })
                .collect::<BTreeSet<_>>(),
        );
        if a.truncated {
            obj.mark_truncated()
        } else {
            obj
        }
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Pair(m, inner) => Atom::pair((**m).clone(), f.apply(comp, inner)),
            _ => unreachable!("writer carrier atoms are pairs"),
        }
    }
    fn unit_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        Atom::pair(self.monoid.unit.clone(), x.clone())
    }
    fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Pair(m, inner) => match &**inner {
                Atom::Pair(n, y) => Atom::pair(self.monoid.mul(m, n), (**y).clone()),
                _ => unreachable!("inner writer atoms are pairs"),
            },
            _ => unreachable!("writer carrier atoms are pairs"),
        }
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        Some(self.monoid.elems.len() as u128 * a.size() as u128)
    }
}

/// Nonempty-powerset monad: `T X` is the set of nonempty subsets, unit is
/// singleton, multiplication is union.
pub struct PowersetMonad;

impl MonadOps for PowersetMonad {
    fn variant(&self) -> Variant {
        Variant::FinSet
    }
    fn name(&self) -> String {
        "powerset+".into()
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        let atoms: Vec<&Atom> = a.atoms(&Component::Single).iter().collect();
        let mut subsets: Vec<BTreeSet<Atom>> = vec![BTreeSet::new()];
        for x in atoms {
            let mut next = Vec::new();
            for s in &subsets {
                next.push(s.clone());
                let mut with = s.clone();
                with.insert(x.clone());
                next.push(with);
            }
            subsets = next;
        }
        let obj = BaseObj::finset(
            subsets
                .into_iter()
                .filter(|s| !s.is_empty())
                .map(Atom::Set),
        );
        if a.truncated {
            obj.mark_truncated()
        } else {
            obj
        }
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Set(s) => Atom::Set(s.iter().map(|v| f.apply(comp, v)).collect()),
            _ => unreachable!("powerset carrier atoms are sets"),
        }
    }
    fn unit_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        Atom::set([x.clone()])
    }
    fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        match x {
            Atom::Set(s) => {
                let mut out = BTreeSet::new();
                for member in s {
                    match member {
                        Atom::Set(inner) => out.extend(inner.iter().cloned()),
                        _ => unreachable!("inner powerset atoms are sets"),
                    }
                }
                Atom::Set(out)
            }
            _ => unreachable!("powerset carrier atoms are sets"),
        }
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        if a.size() >= 127 {
            None
        } else {
            Some((1u128 << a.size()) - 1)
        }
    }
    fn sample_atom(&self, a: &BaseObj, rng: &mut ChaCha8Rng) -> Option<Atom> {
        let atoms: Vec<&Atom> = a.atoms(&Component::Single).iter().collect();
        if atoms.is_empty() {
            return None;
        }
        loop {
            let s: BTreeSet<Atom> = atoms
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|x| (*x).clone())
                .collect();
            if !s.is_empty() {
                return Some(Atom::Set(s));
            }
        }
    }
}

/// Finitely presented monad: carriers are normal forms of terms over the
/// object's atoms, cut at a depth bound; unit is the leaf embedding and
/// multiplication is substitution followed by normalization.
pub struct PresentedMonad {
    pub pres: Presentation,
    pub depth: usize,
    pub max_carrier: usize,
}

impl PresentedMonad {
    pub fn new(pres: Presentation, depth: usize) -> Self {
        PresentedMonad {
            pres,
            depth,
            max_carrier: 500_000,
        }
    }
}

pub fn presented_monad(pres: Presentation, depth: usize) -> MonadRep {
    MonadRep::new(PresentedMonad::new(pres, depth))
}

impl MonadOps for PresentedMonad {
    fn variant(&self) -> Variant {
        Variant::FinSet
    }
    fn name(&self) -> String {
        let ops: Vec<String> = self
            .pres
            .signature
            .ops
            .iter()
            .map(|(o, a)| format!("{o}/{a}"))
            .collect();
        format!("presented({};depth {})", ops.join(","), self.depth)
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        let leaves = a.atoms(&Component::Single).clone();
        let (nfs, truncated) =
            enumerate_normal_forms(&leaves, &self.pres, self.depth, self.max_carrier);
        let obj = BaseObj::finset(nfs);
        if truncated || a.truncated {
            obj.mark_truncated()
        } else {
            obj
        }
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        let renamed = map_leaves(x, &|leaf| f.apply(comp, leaf));
        normalize(&renamed, &self.pres).expect("admitted rules terminate")
    }
    fn unit_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        Atom::var(x.clone())
    }
    fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
        // Leaves of x carry terms; flattening splices them in place.
        let spliced = flatten_term(&map_leaves(x, &|leaf| leaf.clone()));
        normalize(&spliced, &self.pres).expect("admitted rules terminate")
    }
    fn size_hint(&self, a: &BaseObj) -> Option<u128> {
        let mut count = a.size() as u128;
        for _ in 0..self.depth {
            let mut next = count;
            for arity in self.pres.signature.ops.values() {
                next = next.saturating_add(count.saturating_pow(*arity as u32));
            }
            count = next;
            if count > u64::MAX as u128 {
                return Some(count);
            }
        }
        Some(count)
    }
}

/// A monad morphism given componentwise.
#[derive(Clone)]
pub struct MonadMorphism {
    pub source: MonadRep,
    pub target: MonadRep,
    pub name: String,
    comp: Arc<dyn Fn(&BaseObj) -> BaseMor + Send + Sync>,
}

impl MonadMorphism {
    pub fn new(
        source: MonadRep,
        target: MonadRep,
        name: impl Into<String>,
        comp: Arc<dyn Fn(&BaseObj) -> BaseMor + Send + Sync>,
    ) -> Self {
        MonadMorphism {
            source,
            target,
            name: name.into(),
            comp,
        }
    }

    /// Builds components from a per-atom translation.
    pub fn from_atom_fn(
        source: MonadRep,
        target: MonadRep,
        name: impl Into<String>,
        f: Arc<dyn Fn(&BaseObj, &Component, &Atom) -> Atom + Send + Sync>,
    ) -> Self {
        let src = source.clone();
        let tgt = target.clone();
        MonadMorphism::new(
            source,
            target,
            name,
            Arc::new(move |a: &BaseObj| {
                let dom = src.apply_obj(a);
                let cod = tgt.apply_obj(a);
                BaseMor::from_fn(&dom, &cod, |comp, x| f(a, comp, x))
                    .expect("morphism component lands in the target carrier")
            }),
        )
    }

    pub fn identity(m: &MonadRep) -> Self {
        let m2 = m.clone();
        MonadMorphism::new(
            m.clone(),
            m.clone(),
            format!("id_{}", m.name()),
            Arc::new(move |a| BaseMor::identity(&m2.apply_obj(a))),
        )
    }

    /// Component at an object.
    pub fn component(&self, a: &BaseObj) -> BaseMor {
        (self.comp)(a)
    }
}

/// Morphism of exception monads induced by a map of exception objects.
pub fn exception_morphism(
    source: &MonadRep,
    target: &MonadRep,
    e_map: BaseMor,
) -> MonadMorphism {
    MonadMorphism::from_atom_fn(
        source.clone(),
        target.clone(),
        format!("exc[{}→{}]", e_map.dom, e_map.cod),
        Arc::new(move |_a, comp, x| match x {
            Atom::Inj(0, inner) => Atom::inj(0, (**inner).clone()),
            Atom::Inj(1, inner) => Atom::inj(1, e_map.apply(comp, inner)),
            _ => unreachable!("exception carrier atoms are tagged"),
        }),
    )
}

/// Morphism of presented monads induced by an operation-to-pattern map; the
/// translated term is normalized in the target.
pub fn symbol_map_morphism(
    source: &MonadRep,
    target_pres: Presentation,
    target: &MonadRep,
    symbol_map: BTreeMap<String, crate::term::Pattern>,
    name: impl Into<String>,
) -> MonadMorphism {
    fn translate(
        t: &Atom,
        symbol_map: &BTreeMap<String, crate::term::Pattern>,
    ) -> Atom {
        match t {
            Atom::Term(op, args) => {
                let translated: Vec<Atom> =
                    args.iter().map(|a| translate(a, symbol_map)).collect();
                match symbol_map.get(op) {
                    Some(pat) => instantiate_positional(pat, &translated),
                    None => Atom::term(op.clone(), translated),
                }
            }
            other => other.clone(),
        }
    }
    fn instantiate_positional(pat: &crate::term::Pattern, args: &[Atom]) -> Atom {
        match pat {
            crate::term::Pattern::Var(v) => {
                let idx: usize = v
                    .trim_start_matches('x')
                    .parse::<usize>()
                    .expect("positional variables are x1..xn");
                args[idx - 1].clone()
            }
            crate::term::Pattern::App(op, ps) => Atom::term(
                op.clone(),
                ps.iter().map(|p| instantiate_positional(p, args)).collect(),
            ),
        }
    }
    MonadMorphism::from_atom_fn(
        source.clone(),
        target.clone(),
        name,
        Arc::new(move |_a, _comp, x| {
            let translated = translate(x, &symbol_map);
            normalize(&translated, &target_pres).expect("admitted rules terminate")
        }),
    )
}

/// Inclusion of an exception monad into a presented monad whose signature has
/// one constant per exception.
pub fn exception_to_presented_morphism(
    source: &MonadRep,
    target_pres: Presentation,
    target: &MonadRep,
    const_of: BTreeMap<Atom, String>,
) -> MonadMorphism {
    MonadMorphism::from_atom_fn(
        source.clone(),
        target.clone(),
        "exc→presented",
        Arc::new(move |_a, _comp, x| match x {
            Atom::Inj(0, inner) => Atom::var((**inner).clone()),
            Atom::Inj(1, inner) => {
                let c = const_of
                    .get(inner)
                    .unwrap_or_else(|| panic!("no constant for exception {inner}"));
                normalize(&Atom::term(c.clone(), vec![]), &target_pres)
                    .expect("admitted rules terminate")
            }
            _ => unreachable!("exception carrier atoms are tagged"),
        }),
    )
}

/// How exhaustively law checks run.
#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    /// Diagrams whose domain has at most this many atoms are enumerated.
    pub ceiling: usize,
    /// Sample count for domains past the ceiling.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            ceiling: 200_000,
            samples: 3_000,
            seed: 0xF1A7,
        }
    }
}

fn domain_size_label(hint: Option<u128>) -> String {
    match hint {
        Some(n) => n.to_string(),
        None => "unknown".into(),
    }
}

/// Exhaustive unit/associativity/naturality verification on the sample
/// objects and all morphisms between them. Associativity domains past the
/// ceiling are checked on a seeded sample and recorded as such.
pub fn monad_law_check(t: &MonadRep, samples: &[BaseObj], config: CheckConfig) -> LawReport {
    let mut report = LawReport::new(t.name());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for a in samples {
        let site = format!("A={a}");
        let ta = t.apply_obj(a);
        let unit_a = t.unit(a);

        // μ ∘ η_{TA} = id and μ ∘ Tη = id.
        let mut cases = 0;
        let mut failed = None;
        for comp in ta.components() {
            for x in ta.atoms(&comp) {
                cases += 1;
                let left = t.mult_atom(a, &comp, &t.unit_atom(&ta, &comp, x));
                if &left != x {
                    failed = Some(format!("μ(η_TA({x})) = {left} ≠ {x}"));
                }
                let right = t.mult_atom(a, &comp, &t.map_atom(&unit_a, &comp, x));
                if &right != x {
                    failed = failed.or(Some(format!("μ(Tη({x})) = {right} ≠ {x}")));
                }
            }
        }
        report.push(
            "unit",
            &site,
            match failed {
                None => Outcome::Pass { cases },
                Some(c) => Outcome::Fail { counterexample: c },
            },
        );

        // Associativity μ ∘ Tμ = μ ∘ μT on T T T A.
        let tta = t.apply_obj(&ta);
        if tta.size() > config.ceiling {
            report.push(
                "associativity",
                &site,
                Outcome::Skipped {
                    reason: format!("|TTA| = {} exceeds the ceiling", tta.size()),
                },
            );
        } else {
            let mult_a = t.mult(a);
            match mult_a {
                Err(e) => report.push(
                    "associativity",
                    &site,
                    Outcome::Skipped {
                        reason: format!("μ table not materializable: {e}"),
                    },
                ),
                Ok(mult_a) => {
                    let ttta_hint = t.0.size_hint(&tta);
                    let exhaustive = match ttta_hint {
                        Some(n) => n <= config.ceiling as u128,
                        None => true,
                    };
                    let mut cases = 0;
                    let mut failed = None;
                    let mut check_one = |z: &Atom, comp: &Component| {
                        cases += 1;
                        let lhs = t.mult_atom(a, comp, &t.map_atom(&mult_a, comp, z));
                        let rhs = t.mult_atom(a, comp, &t.mult_atom(&ta, comp, z));
                        if lhs != rhs {
                            failed = Some(format!("μ(Tμ({z})) = {lhs} ≠ μ(μT({z})) = {rhs}"));
                        }
                    };
                    if exhaustive {
                        let ttta = t.apply_obj(&tta);
                        for comp in ttta.components() {
                            for z in ttta.atoms(&comp) {
                                check_one(z, &comp);
                            }
                        }
                        report.push(
                            "associativity",
                            &site,
                            match failed {
                                None => Outcome::Pass { cases },
                                Some(c) => Outcome::Fail { counterexample: c },
                            },
                        );
                    } else {
                        for _ in 0..config.samples {
                            match t.0.sample_atom(&tta, &mut rng) {
                                Some(z) => check_one(&z, &Component::Single),
                                None => break,
                            }
                        }
                        let outcome = match failed {
                            Some(c) => Outcome::Fail { counterexample: c },
                            None if cases == 0 => Outcome::Skipped {
                                reason: format!(
                                    "domain {} too large and the monad cannot sample",
                                    domain_size_label(ttta_hint)
                                ),
                            },
                            None => Outcome::Sampled {
                                cases,
                                domain: domain_size_label(ttta_hint),
                            },
                        };
                        report.push("associativity", &site, outcome);
                    }
                }
            }
        }
    }

    // Naturality of unit and multiplication over all morphisms between
    // samples.
    for a in samples {
        for b in samples {
            for f in all_morphisms(a, b) {
                let site = format!("f: {a} → {b}");
                let mut cases = 0;
                let mut failed = None;
                for comp in a.components() {
                    for x in a.atoms(&comp) {
                        cases += 1;
                        let lhs = t.map_atom(&f, &comp, &t.unit_atom(a, &comp, x));
                        let rhs = t.unit_atom(b, &comp, &f.apply(&comp, x));
                        if lhs != rhs {
                            failed = Some(format!("Tf(η({x})) ≠ η(f({x}))"));
                        }
                    }
                }
                report.push(
                    "unit-naturality",
                    &site,
                    match failed {
                        None => Outcome::Pass { cases },
                        Some(c) => Outcome::Fail { counterexample: c },
                    },
                );

                let ta = t.apply_obj(a);
                let tta = t.apply_obj(&ta);
                if tta.size() > config.ceiling {
                    report.push(
                        "mult-naturality",
                        &site,
                        Outcome::Skipped {
                            reason: format!("|TTA| = {} exceeds the ceiling", tta.size()),
                        },
                    );
                    continue;
                }
                let tf = t.map_mor(&f);
                let mut cases = 0;
                let mut failed = None;
                for comp in tta.components() {
                    for z in tta.atoms(&comp) {
                        cases += 1;
                        let lhs = t.map_atom(&f, &comp, &t.mult_atom(a, &comp, z));
                        let rhs = t.mult_atom(b, &comp, &t.map_atom(&tf, &comp, z));
                        if lhs != rhs {
                            failed = Some(format!("Tf(μ({z})) ≠ μ(TTf({z}))"));
                        }
                    }
                }
                report.push(
                    "mult-naturality",
                    &site,
                    match failed {
                        None => Outcome::Pass { cases },
                        Some(c) => Outcome::Fail { counterexample: c },
                    },
                );
            }
        }
    }
    report
}

/// Verifies that a monad morphism preserves unit and multiplication and is
/// natural, exhaustively on the samples.
pub fn morphism_law_check(
    h: &MonadMorphism,
    samples: &[BaseObj],
    _config: CheckConfig,
) -> LawReport {
    let mut report = LawReport::new(format!(
        "{}: {} → {}",
        h.name,
        h.source.name(),
        h.target.name()
    ));
    let s = &h.source;
    let t = &h.target;
    for a in samples {
        let site = format!("A={a}");
        let ha = h.component(a);

        let mut cases = 0;
        let mut failed = None;
        for comp in a.components() {
            for x in a.atoms(&comp) {
                cases += 1;
                let lhs = ha.apply(&comp, &s.unit_atom(a, &comp, x));
                let rhs = t.unit_atom(a, &comp, x);
                if lhs != rhs {
                    failed = Some(format!("h(η^S({x})) = {lhs} ≠ η^T({x}) = {rhs}"));
                }
            }
        }
        report.push(
            "unit-preservation",
            &site,
            match failed {
                None => Outcome::Pass { cases },
                Some(c) => Outcome::Fail { counterexample: c },
            },
        );

        // h ∘ μ^S = μ^T ∘ (h ∗ h) with h ∗ h = h_{TA} ∘ S(h_A).
        let sa = s.apply_obj(a);
        let ssa = s.apply_obj(&sa);
        let h_ta = h.component(&t.apply_obj(a));
        let s_ha = s.map_mor(&ha);
        let mut cases = 0;
        let mut failed = None;
        for comp in ssa.components() {
            for z in ssa.atoms(&comp) {
                cases += 1;
                let lhs = ha.apply(&comp, &s.mult_atom(a, &comp, z));
                let hh = h_ta.apply(&comp, &s_ha.apply(&comp, z));
                let rhs = t.mult_atom(a, &comp, &hh);
                if lhs != rhs {
                    failed = Some(format!("h(μ^S({z})) = {lhs} ≠ μ^T(h∗h({z})) = {rhs}"));
                }
            }
        }
        report.push(
            "mult-preservation",
            &site,
            match failed {
                None => Outcome::Pass { cases },
                Some(c) => Outcome::Fail { counterexample: c },
            },
        );
    }
    for a in samples {
        for b in samples {
            for f in all_morphisms(a, b) {
                let site = format!("f: {a} → {b}");
                let ha = h.component(a);
                let hb = h.component(b);
                let sf = s.map_mor(&f);
                let mut cases = 0;
                let mut failed = None;
                for comp in sf.dom.components() {
                    for x in sf.dom.atoms(&comp) {
                        cases += 1;
                        let lhs = hb.apply(&comp, &sf.apply(&comp, x));
                        let rhs = t.map_atom(&f, &comp, &ha.apply(&comp, x));
                        if lhs != rhs {
                            failed = Some(format!("h natural fails at {x}"));
                        }
                    }
                }
                report.push(
                    "naturality",
                    &site,
                    match failed {
                        None => Outcome::Pass { cases },
                        Some(c) => Outcome::Fail { counterexample: c },
                    },
                );
            }
        }
    }
    report
}

/// A separated monad: the unit has a complement on objects and monos.
#[derive(Clone)]
pub struct SeparatedRep {
    pub monad: MonadRep,
}

impl SeparatedRep {
    /// `S̄ A = S A ∖ η_A[A]`, atomwise; fails when the unit is not injective
    /// or the leftover atoms do not form a subobject.
    pub fn comp_obj(&self, a: &BaseObj) -> Result<BaseObj> {
        let ta = self.monad.apply_obj(a);
        let unit = self.monad.unit(a);
        if !unit.is_injective() {
            return Err(Error::NonMonicUnit(format!("{a}")));
        }
        let mut image: BTreeMap<Component, BTreeSet<Atom>> = BTreeMap::new();
        for comp in a.components() {
            let entry = image.entry(comp.clone()).or_default();
            for x in a.atoms(&comp) {
                entry.insert(unit.apply(&comp, x));
            }
        }
        let obj = match &ta.data {
            ObjData::Set(atoms) => {
                let img = image.remove(&Component::Single).unwrap_or_default();
                BaseObj::finset(atoms.difference(&img).cloned())
            }
            ObjData::Sorted(sorts) => BaseObj::sorted(sorts.iter().map(|(name, atoms)| {
                let img = image
                    .get(&Component::Sort(name.clone()))
                    .cloned()
                    .unwrap_or_default();
                (name.clone(), atoms.difference(&img).cloned().collect())
            })),
            ObjData::Graph {
                vertices, edges, ..
            } => {
                let vimg = image.get(&Component::Vertex).cloned().unwrap_or_default();
                let eimg = image.get(&Component::Edge).cloned().unwrap_or_default();
                let vs: BTreeSet<Atom> = vertices.difference(&vimg).cloned().collect();
                let mut es = Vec::new();
                for e in edges.difference(&eimg) {
                    let s = ta.edge_src(e);
                    let t = ta.edge_tgt(e);
                    if !vs.contains(s) || !vs.contains(t) {
                        return Err(Error::NotSeparated(format!(
                            "complement of the unit at {a} is not a subgraph"
                        )));
                    }
                    es.push((e.clone(), s.clone(), t.clone()));
                }
                BaseObj::graph(vs, es)?
            }
        };
        Ok(if ta.truncated { obj.mark_truncated() } else { obj })
    }

    /// Action on a monomorphism by restricting `S m` to the complements.
    pub fn comp_mor(&self, m: &BaseMor) -> Result<BaseMor> {
        if !m.is_injective() {
            return Err(Error::MonoViolation(
                "complement functor only acts on monomorphisms".into(),
            ));
        }
        let dom = self.comp_obj(&m.dom)?;
        let cod = self.comp_obj(&m.cod)?;
        let restricted = BaseMor::from_fn(&dom, &cod, |comp, x| {
            self.monad.map_atom(m, comp, x)
        })
        .map_err(|_| {
            Error::NotSeparated(format!(
                "S({}) does not restrict to the unit complements",
                m.dom
            ))
        })?;
        if !restricted.is_injective() {
            return Err(Error::NotSeparated(
                "restricted action is not injective".into(),
            ));
        }
        Ok(restricted)
    }
}

/// Builds the unit complement and certifies it on the sample objects: the
/// carrier splits as unit image ⊎ complement, and `S m` restricts to the
/// complements for every sampled injection.
pub fn unit_complement(t: &MonadRep, samples: &[BaseObj]) -> Result<SeparatedRep> {
    let sep = SeparatedRep { monad: t.clone() };
    for a in samples {
        let comp_obj = sep.comp_obj(a)?;
        let ta = t.apply_obj(a);
        let unit = t.unit(a);
        for comp in ta.components() {
            let mut covered: BTreeSet<Atom> = comp_obj.atoms(&comp).clone();
            for x in a.atoms(&comp) {
                let u = unit.apply(&comp, x);
                if !covered.insert(u.clone()) {
                    return Err(Error::NotSeparated(format!(
                        "unit image and complement overlap at {u}"
                    )));
                }
            }
            if &covered != ta.atoms(&comp) {
                return Err(Error::NotSeparated(format!(
                    "unit image and complement do not cover S({a})"
                )));
            }
        }
    }
    for a in samples {
        for b in samples {
            for m in crate::base::all_injections(a, b) {
                sep.comp_mor(&m)?;
            }
        }
    }
    Ok(sep)
}

/// Image monad of a morphism: object map `X ↦ f_X[S X]`, structure restricted
/// from the target.
pub struct ImageMonad {
    pub through: MonadMorphism,
}

impl MonadOps for ImageMonad {
    fn variant(&self) -> Variant {
        self.through.target.variant()
    }
    fn name(&self) -> String {
        format!("im({})", self.through.name)
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        self.through.component(a).image()
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        self.through.target.map_atom(f, comp, x)
    }
    fn unit_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        // η^R = e ∘ η^S by construction.
        let unit_s = self.through.source.unit_atom(a, comp, x);
        self.through.component(a).apply(comp, &unit_s)
    }
    fn mult_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        self.through.target.mult_atom(a, comp, x)
    }
    fn preserves_monos_claimed(&self) -> bool {
        true
    }
}

/// (split epi, mono)-factorization of a monad morphism through its
/// componentwise image. The image monad's multiplication is the diagonal
/// fill-in; `FillInFailure` reports a multiplication image escaping the
/// image carrier on a sampled object.
pub fn factorize_monad_morphism(
    f: &MonadMorphism,
    samples: &[BaseObj],
) -> Result<(MonadMorphism, MonadMorphism, MonadRep)> {
    let r = MonadRep::new(ImageMonad { through: f.clone() });
    // Well-definedness of the fill-in: μ^T maps R R A into R A.
    for a in samples {
        let ra = r.apply_obj(a);
        let rra = r.apply_obj(&ra);
        for comp in rra.components() {
            for z in rra.atoms(&comp) {
                let img = f.target.mult_atom(a, &comp, z);
                if !ra.contains(&comp, &img) {
                    return Err(Error::FillInFailure(format!(
                        "μ^T({z}) = {img} escapes the image carrier at A={a}"
                    )));
                }
            }
        }
    }
    let fe = f.clone();
    let e = MonadMorphism::new(
        f.source.clone(),
        r.clone(),
        format!("epi({})", f.name),
        Arc::new(move |a| {
            let comp_f = fe.component(a);
            let img = comp_f.image();
            BaseMor::from_fn(&comp_f.dom, &img, |comp, x| comp_f.apply(comp, x))
                .expect("co-restriction to the image")
        }),
    );
    let fm = f.clone();
    let rm = r.clone();
    let m = MonadMorphism::new(
        r.clone(),
        f.target.clone(),
        format!("mono({})", f.name),
        Arc::new(move |a| {
            let img = rm.apply_obj(a);
            let cod = fm.target.apply_obj(a);
            BaseMor::from_fn(&img, &cod, |_, x| x.clone()).expect("inclusion")
        }),
    );
    for a in samples {
        let ea = e.component(a);
        let ma = m.component(a);
        if !ea.is_surjective() {
            return Err(Error::FillInFailure(format!("e not surjective at {a}")));
        }
        if !ma.is_injective() {
            return Err(Error::FillInFailure(format!("m not injective at {a}")));
        }
        let composite = ea.then(&ma)?;
        if composite != f.component(a) {
            return Err(Error::FillInFailure(format!("m ∘ e ≠ f at {a}")));
        }
    }
    Ok((e, m, r))
}

/// Checks the decomposition of a free (rule-less) presented monad: carrier =
/// leaf part ⊎ operation-rooted part with the unit hitting the leaf part
/// bijectively, and injectivity of the functor action on injections.
pub fn free_monad_decomposition_check(
    pres: &Presentation,
    depth: usize,
    samples: &[BaseObj],
) -> LawReport {
    let mut report = LawReport::new(format!("free-monad decomposition ({depth})"));
    if !pres.rules.is_empty() {
        report.push(
            "precondition",
            "-",
            Outcome::Fail {
                counterexample: "presentation has rules; decomposition check is for free monads"
                    .into(),
            },
        );
        return report;
    }
    let t = presented_monad(pres.clone(), depth);
    for a in samples {
        let site = format!("A={a}");
        let fa = t.apply_obj(a);
        let mut leaf_payloads = BTreeSet::new();
        let mut proper = 0usize;
        let mut bad = None;
        for x in fa.atoms(&Component::Single) {
            match x {
                Atom::Var(inner) => {
                    leaf_payloads.insert((**inner).clone());
                }
                Atom::Term(_, _) => proper += 1,
                other => bad = Some(format!("unclassified atom {other}")),
            }
        }
        let ok = bad.is_none() && &leaf_payloads == a.atoms(&Component::Single);
        report.push(
            "carrier-splits-as-id-plus-layer",
            &site,
            if ok {
                Outcome::Pass {
                    cases: leaf_payloads.len() + proper,
                }
            } else {
                Outcome::Fail {
                    counterexample: bad
                        .unwrap_or_else(|| "leaf part differs from A".into()),
                }
            },
        );
        let unit = t.unit(a);
        let unit_ok = unit.is_injective()
            && a.atoms(&Component::Single)
                .iter()
                .all(|x| matches!(unit.apply(&Component::Single, x), Atom::Var(_)));
        report.push(
            "unit-is-leaf-injection",
            &site,
            if unit_ok {
                Outcome::Pass { cases: a.size() }
            } else {
                Outcome::Fail {
                    counterexample: "unit does not embed A as the leaf part".into(),
                }
            },
        );
    }
    for a in samples {
        for b in samples {
            for m in crate::base::all_injections(a, b) {
                let fm = t.map_mor(&m);
                report.push(
                    "functor-preserves-monos",
                    format!("m: {a} ↪ {b}"),
                    if fm.is_injective() {
                        Outcome::Pass {
                            cases: fm.dom.size(),
                        }
                    } else {
                        Outcome::Fail {
                            counterexample: format!("F(m) not injective for m: {a} → {b}"),
                        }
                    },
                );
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::canonical_finset;
    use crate::term::{Pattern, Rule, Signature};

    fn named(names: &[&str]) -> BaseObj {
        BaseObj::finset(names.iter().map(|n| Atom::sym(*n)))
    }

    fn small_samples() -> Vec<BaseObj> {
        (0..=3).map(canonical_finset).collect()
    }

    #[test]
    fn exception_carrier() {
        let t = builtin_monad(
            BuiltinKind::Exception(named(&["e1", "e2"])),
            Variant::FinSet,
        )
        .unwrap();
        let ta = t.apply_obj(&named(&["a"]));
        assert_eq!(ta.size(), 3);
    }

    #[test]
    fn exception_laws_clean() {
        let t = builtin_monad(
            BuiltinKind::Exception(named(&["e1", "e2"])),
            Variant::FinSet,
        )
        .unwrap();
        let report = monad_law_check(&t, &small_samples(), CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn terminal_carrier_is_point() {
        let t = builtin_monad(BuiltinKind::Terminal, Variant::FinSet).unwrap();
        for a in small_samples() {
            assert_eq!(t.apply_obj(&a).size(), 1);
        }
    }

    #[test]
    fn writer_z2_carrier_and_mult() {
        let t = builtin_monad(BuiltinKind::Writer(MonoidTable::z2()), Variant::FinSet).unwrap();
        let a = named(&["a"]);
        let ta = t.apply_obj(&a);
        assert_eq!(ta.size(), 2);
        // μ((1, (1, a))) = (0, a): the labels add in Z2.
        let z = Atom::pair(
            Atom::sym("1"),
            Atom::pair(Atom::sym("1"), Atom::sym("a")),
        );
        assert_eq!(
            t.mult_atom(&a, &Component::Single, &z),
            Atom::pair(Atom::sym("0"), Atom::sym("a"))
        );
    }

    #[test]
    fn broken_writer_mult_fails_laws() {
        // Projection instead of monoid multiplication.
        struct BrokenWriter(MonoidTable);
        impl MonadOps for BrokenWriter {
            fn variant(&self) -> Variant {
                Variant::FinSet
            }
            fn name(&self) -> String {
                "broken-writer".into()
            }
            fn apply_obj(&self, a: &BaseObj) -> BaseObj {
                WriterMonad {
                    monoid: self.0.clone(),
                }
                .apply_obj(a)
            }
            fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
                WriterMonad {
                    monoid: self.0.clone(),
                }
                .map_atom(f, comp, x)
            }
            fn unit_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
                WriterMonad {
                    monoid: self.0.clone(),
                }
                .unit_atom(a, comp, x)
            }
            fn mult_atom(&self, _a: &BaseObj, _comp: &Component, x: &Atom) -> Atom {
                match x {
                    Atom::Pair(m, inner) => match &**inner {
                        Atom::Pair(_, y) => Atom::pair((**m).clone(), (**y).clone()),
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                }
            }
        }
        let t = MonadRep::new(BrokenWriter(MonoidTable::z2()));
        let report = monad_law_check(&t, &[canonical_finset(1)], CheckConfig::default());
        assert!(!report.is_clean());
    }

    #[test]
    fn reader_laws_clean_small() {
        let t = builtin_monad(BuiltinKind::Reader(named(&["p", "q"])), Variant::FinSet).unwrap();
        let samples: Vec<BaseObj> = (1..=2).map(canonical_finset).collect();
        let report = monad_law_check(&t, &samples, CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn powerset_laws_clean_small() {
        let t = builtin_monad(BuiltinKind::NonemptyPowerset, Variant::FinSet).unwrap();
        let samples: Vec<BaseObj> = (0..=2).map(canonical_finset).collect();
        let report = monad_law_check(&t, &samples, CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn presented_unary_depth_three() {
        let sig = Signature::new([("s".to_string(), 1)]).unwrap();
        let t = presented_monad(Presentation::free(sig), 3);
        let ta = t.apply_obj(&named(&["a"]));
        assert_eq!(ta.size(), 4);
        assert!(ta.truncated);
    }

    #[test]
    fn presented_constant_matches_exception_shape() {
        let sig = Signature::new([("c".to_string(), 0)]).unwrap();
        let t = presented_monad(Presentation::free(sig), 3);
        let a = named(&["a", "b"]);
        let ta = t.apply_obj(&a);
        assert_eq!(ta.size(), 3);
        assert!(!ta.truncated);
        let report = monad_law_check(&t, &[a], CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn exception_morphism_is_lawful() {
        let e = named(&["e1", "e2"]);
        let f = named(&["f"]);
        let s = builtin_monad(BuiltinKind::Exception(e.clone()), Variant::FinSet).unwrap();
        let t = builtin_monad(BuiltinKind::Exception(f.clone()), Variant::FinSet).unwrap();
        let e_map = BaseMor::from_fn(&e, &f, |_, _| Atom::sym("f")).unwrap();
        let h = exception_morphism(&s, &t, e_map);
        let report = morphism_law_check(&h, &small_samples(), CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn exception_complement_is_constant() {
        let e = named(&["e1", "e2"]);
        let t = builtin_monad(BuiltinKind::Exception(e.clone()), Variant::FinSet).unwrap();
        let sep = unit_complement(&t, &small_samples()).unwrap();
        for a in small_samples() {
            let c = sep.comp_obj(&a).unwrap();
            assert_eq!(c.size(), 2);
        }
    }

    #[test]
    fn terminal_unit_is_not_monic() {
        let t = builtin_monad(BuiltinKind::Terminal, Variant::FinSet).unwrap();
        let sep = SeparatedRep { monad: t };
        assert!(matches!(
            sep.comp_obj(&named(&["a", "b"])),
            Err(Error::NonMonicUnit(_))
        ));
    }

    #[test]
    fn presented_complement_removes_leaves() {
        let sig = Signature::new([("s".to_string(), 1)]).unwrap();
        let t = presented_monad(Presentation::free(sig), 2);
        let sep = unit_complement(&t, &[named(&["a"])]).unwrap();
        let c = sep.comp_obj(&named(&["a"])).unwrap();
        // s a and s s a.
        assert_eq!(c.size(), 2);
    }

    #[test]
    fn factorize_collapsing_exception_morphism() {
        let e2 = named(&["e1", "e2"]);
        let e1 = named(&["e"]);
        let s = builtin_monad(BuiltinKind::Exception(e2.clone()), Variant::FinSet).unwrap();
        let t = builtin_monad(BuiltinKind::Exception(e1.clone()), Variant::FinSet).unwrap();
        let e_map = BaseMor::from_fn(&e2, &e1, |_, _| Atom::sym("e")).unwrap();
        let h = exception_morphism(&s, &t, e_map);
        let samples = small_samples();
        let (e, m, r) = factorize_monad_morphism(&h, &samples).unwrap();
        for a in &samples {
            assert!(e.component(a).is_surjective());
            assert!(m.component(a).is_injective());
            // R ≅ Exception({e}) here: same carrier sizes.
            assert_eq!(r.apply_obj(a).size(), t.apply_obj(a).size());
        }
        let report = monad_law_check(&r, &samples, CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }

    #[test]
    fn factorize_injective_morphism_gives_iso_epi() {
        let e = named(&["e1"]);
        let f = named(&["f1", "f2"]);
        let s = builtin_monad(BuiltinKind::Exception(e.clone()), Variant::FinSet).unwrap();
        let t = builtin_monad(BuiltinKind::Exception(f.clone()), Variant::FinSet).unwrap();
        let e_map = BaseMor::from_fn(&e, &f, |_, _| Atom::sym("f1")).unwrap();
        let h = exception_morphism(&s, &t, e_map);
        let samples = small_samples();
        let (e, _m, r) = factorize_monad_morphism(&h, &samples).unwrap();
        for a in &samples {
            assert!(e.component(a).is_bijective());
            assert_eq!(r.apply_obj(a).size(), s.apply_obj(a).size());
        }
    }

    #[test]
    fn factorize_presented_quotient() {
        let sig = Signature::new([("s".to_string(), 1)]).unwrap();
        let free = presented_monad(Presentation::free(sig.clone()), 3);
        let rule = Rule {
            lhs: Pattern::App(
                "s".into(),
                vec![Pattern::App("s".into(), vec![Pattern::Var("x".into())])],
            ),
            rhs: Pattern::App("s".into(), vec![Pattern::Var("x".into())]),
        };
        let pres_q = Presentation::new(sig, vec![rule]).unwrap();
        let quot = presented_monad(pres_q.clone(), 3);
        let h = symbol_map_morphism(
            &free,
            pres_q,
            &quot,
            BTreeMap::new(),
            "collapse",
        );
        let samples = vec![canonical_finset(1), canonical_finset(2)];
        let (e, m, r) = factorize_monad_morphism(&h, &samples).unwrap();
        for a in &samples {
            assert!(e.component(a).is_surjective());
            assert!(m.component(a).is_injective());
            // The image is everything: the quotient map is surjective.
            assert_eq!(r.apply_obj(a).size(), quot.apply_obj(a).size());
        }
    }

    #[test]
    fn decomposition_check_unary() {
        let sig = Signature::new([("s".to_string(), 1)]).unwrap();
        let pres = Presentation::free(sig);
        let samples = vec![canonical_finset(1), canonical_finset(2)];
        let report = free_monad_decomposition_check(&pres, 3, &samples);
        assert!(report.is_clean(), "{}", report.render_text());
        // Complement count for |A| = 1 at depth 3 is 3: s a, s s a, s s s a.
        let t = presented_monad(pres, 3);
        let fa = t.apply_obj(&canonical_finset(1));
        let proper = fa
            .atoms(&Component::Single)
            .iter()
            .filter(|x| matches!(x, Atom::Term(_, _)))
            .count();
        assert_eq!(proper, 3);
    }

    #[test]
    fn exception_to_presented_inclusion_lawful() {
        let e = named(&["e1", "e2"]);
        let s = builtin_monad(BuiltinKind::Exception(e.clone()), Variant::FinSet).unwrap();
        let sig = Signature::new([("e1".to_string(), 0), ("e2".to_string(), 0)]).unwrap();
        let pres = Presentation::free(sig);
        let t = presented_monad(pres.clone(), 2);
        let consts: BTreeMap<Atom, String> = [
            (Atom::sym("e1"), "e1".to_string()),
            (Atom::sym("e2"), "e2".to_string()),
        ]
        .into_iter()
        .collect();
        let h = exception_to_presented_morphism(&s, pres, &t, consts);
        let report = morphism_law_check(&h, &small_samples(), CheckConfig::default());
        assert!(report.is_clean(), "{}", report.render_text());
    }
}
