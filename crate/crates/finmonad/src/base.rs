//! Finite base categories: finite sets, finite sorted sets, finite graphs.
//!
//! Objects carry explicit atom sets per component; morphisms are total
//! function tables. Coproducts tag atoms with their summand, so coproduct
//! injections are injective by construction and convergence of chains reduces
//! to bijectivity of connecting maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::atom::Atom;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Variant {
    FinSet,
    SortedFinSet,
    FinGraph,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::FinSet => write!(f, "finset"),
            Variant::SortedFinSet => write!(f, "sorted"),
            Variant::FinGraph => write!(f, "graph"),
        }
    }
}

/// Addressable piece of an object: the single carrier of a finite set, one
/// sort of a sorted set, or the vertex/edge part of a graph.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Component {
    Single,
    Sort(String),
    Vertex,
    Edge,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Single => write!(f, "·"),
            Component::Sort(s) => write!(f, "{s}"),
            Component::Vertex => write!(f, "v"),
            Component::Edge => write!(f, "e"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ObjData {
    Set(BTreeSet<Atom>),
    Sorted(BTreeMap<String, BTreeSet<Atom>>),
    Graph {
        vertices: BTreeSet<Atom>,
        edges: BTreeSet<Atom>,
        src: BTreeMap<Atom, Atom>,
        tgt: BTreeMap<Atom, Atom>,
    },
}

/// A finite object of one of the three base categories.
///
/// `truncated` marks carriers that are only a depth-bounded approximation of
/// an infinite value (free-monad carriers, exhausted chain stages). It is
/// propagated through constructions but ignored by atom-level comparisons.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BaseObj {
    pub data: ObjData,
    pub truncated: bool,
}

impl BaseObj {
    pub fn finset(atoms: impl IntoIterator<Item = Atom>) -> Self {
        BaseObj {
            data: ObjData::Set(atoms.into_iter().collect()),
            truncated: false,
        }
    }

    pub fn sorted(sorts: impl IntoIterator<Item = (String, BTreeSet<Atom>)>) -> Self {
        BaseObj {
            data: ObjData::Sorted(sorts.into_iter().collect()),
            truncated: false,
        }
    }

    /// Builds a finite graph; `src`/`tgt` must be total on `edges` and land in
    /// `vertices`.
    pub fn graph(
        vertices: impl IntoIterator<Item = Atom>,
        edges: impl IntoIterator<Item = (Atom, Atom, Atom)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<Atom> = vertices.into_iter().collect();
        let mut es = BTreeSet::new();
        let mut src = BTreeMap::new();
        let mut tgt = BTreeMap::new();
        for (e, s, t) in edges {
            if !vertices.contains(&s) || !vertices.contains(&t) {
                return Err(Error::IllFormedMorphism(format!(
                    "edge {e} has endpoint outside the vertex set"
                )));
            }
            src.insert(e.clone(), s);
            tgt.insert(e.clone(), t);
            es.insert(e);
        }
        Ok(BaseObj {
            data: ObjData::Graph {
                vertices,
                edges: es,
                src,
                tgt,
            },
            truncated: false,
        })
    }

    pub fn initial(variant: Variant) -> Self {
        match variant {
            Variant::FinSet => BaseObj::finset([]),
            Variant::SortedFinSet => BaseObj::sorted([]),
            Variant::FinGraph => BaseObj::graph([], []).unwrap(),
        }
    }

    /// Terminal object: a point, all-singleton sorts make no sense without a
    /// fixed sort set, so the sorted terminal takes the sort names to use.
    pub fn terminal(variant: Variant) -> Self {
        let star = Atom::sym("*");
        match variant {
            Variant::FinSet => BaseObj::finset([star]),
            Variant::SortedFinSet => BaseObj::sorted([]),
            Variant::FinGraph => {
                BaseObj::graph([star.clone()], [(Atom::sym("*e"), star.clone(), star)]).unwrap()
            }
        }
    }

    pub fn variant(&self) -> Variant {
        match &self.data {
            ObjData::Set(_) => Variant::FinSet,
            ObjData::Sorted(_) => Variant::SortedFinSet,
            ObjData::Graph { .. } => Variant::FinGraph,
        }
    }

    pub fn components(&self) -> Vec<Component> {
        match &self.data {
            ObjData::Set(_) => vec![Component::Single],
            ObjData::Sorted(sorts) => sorts.keys().map(|s| Component::Sort(s.clone())).collect(),
            ObjData::Graph { .. } => vec![Component::Vertex, Component::Edge],
        }
    }

    pub fn atoms(&self, comp: &Component) -> &BTreeSet<Atom> {
        static EMPTY: std::sync::OnceLock<BTreeSet<Atom>> = std::sync::OnceLock::new();
        match (&self.data, comp) {
            (ObjData::Set(s), Component::Single) => s,
            (ObjData::Sorted(sorts), Component::Sort(name)) => sorts
                .get(name)
                .unwrap_or_else(|| EMPTY.get_or_init(BTreeSet::new)),
            (ObjData::Graph { vertices, .. }, Component::Vertex) => vertices,
            (ObjData::Graph { edges, .. }, Component::Edge) => edges,
            _ => panic!("component {comp} does not exist in a {} object", self.variant()),
        }
    }

    /// All elements as (component, atom) pairs, in component order.
    pub fn elements(&self) -> Vec<(Component, Atom)> {
        let mut out = Vec::new();
        for comp in self.components() {
            for a in self.atoms(&comp) {
                out.push((comp.clone(), a.clone()));
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.components().iter().map(|c| self.atoms(c).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn contains(&self, comp: &Component, a: &Atom) -> bool {
        self.atoms(comp).contains(a)
    }

    /// Atom-level equality, ignoring truncation markers.
    pub fn same_atoms(&self, other: &BaseObj) -> bool {
        self.data == other.data
    }

    pub fn mark_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    /// Source vertex of a graph edge.
    pub fn edge_src(&self, e: &Atom) -> &Atom {
        match &self.data {
            ObjData::Graph { src, .. } => &src[e],
            _ => panic!("edge_src on a non-graph object"),
        }
    }

    /// Target vertex of a graph edge.
    pub fn edge_tgt(&self, e: &Atom) -> &Atom {
        match &self.data {
            ObjData::Graph { tgt, .. } => &tgt[e],
            _ => panic!("edge_tgt on a non-graph object"),
        }
    }

    /// Loops of a graph: the equalizer of source and target.
    pub fn loops(&self) -> BTreeSet<Atom> {
        match &self.data {
            ObjData::Graph { edges, src, tgt, .. } => edges
                .iter()
                .filter(|e| src[*e] == tgt[*e])
                .cloned()
                .collect(),
            _ => panic!("loops on a non-graph object"),
        }
    }
}

impl fmt::Display for BaseObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            ObjData::Set(s) => {
                write!(f, "{{")?;
                for (i, a) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")?;
            }
            ObjData::Sorted(sorts) => {
                for (i, (name, atoms)) in sorts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{name}:{{")?;
                    for (j, a) in atoms.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, "}}")?;
                }
            }
            ObjData::Graph {
                vertices,
                edges,
                src,
                tgt,
            } => {
                write!(f, "V={{")?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}} E={{")?;
                for (i, e) in edges.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}:{}→{}", src[e], tgt[e])?;
                }
                write!(f, "}}")?;
            }
        }
        if self.truncated {
            write!(f, " (truncated)")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MorData {
    Set(BTreeMap<Atom, Atom>),
    Sorted(BTreeMap<String, BTreeMap<Atom, Atom>>),
    Graph {
        v: BTreeMap<Atom, Atom>,
        e: BTreeMap<Atom, Atom>,
    },
}

/// A morphism of the base category: a total function table from `dom` to
/// `cod`, per component; graph morphisms must commute with source and target.
#[derive(Clone, Debug)]
pub struct BaseMor {
    pub dom: BaseObj,
    pub cod: BaseObj,
    pub map: MorData,
}

impl PartialEq for BaseMor {
    fn eq(&self, other: &Self) -> bool {
        self.dom.same_atoms(&other.dom) && self.cod.same_atoms(&other.cod) && self.map == other.map
    }
}
impl Eq for BaseMor {}

impl BaseMor {
    pub fn new(dom: BaseObj, cod: BaseObj, map: MorData) -> Result<Self> {
        let mor = BaseMor { dom, cod, map };
        mor.validate()?;
        Ok(mor)
    }

    /// Builds the table by evaluating `f` on every element of `dom`.
    pub fn from_fn(
        dom: &BaseObj,
        cod: &BaseObj,
        mut f: impl FnMut(&Component, &Atom) -> Atom,
    ) -> Result<Self> {
        let map = match &dom.data {
            ObjData::Set(atoms) => MorData::Set(
                atoms
                    .iter()
                    .map(|a| (a.clone(), f(&Component::Single, a)))
                    .collect(),
            ),
            ObjData::Sorted(sorts) => MorData::Sorted(
                sorts
                    .iter()
                    .map(|(name, atoms)| {
                        let comp = Component::Sort(name.clone());
                        (
                            name.clone(),
                            atoms.iter().map(|a| (a.clone(), f(&comp, a))).collect(),
                        )
                    })
                    .collect(),
            ),
            ObjData::Graph {
                vertices, edges, ..
            } => MorData::Graph {
                v: vertices
                    .iter()
                    .map(|a| (a.clone(), f(&Component::Vertex, a)))
                    .collect(),
                e: edges
                    .iter()
                    .map(|a| (a.clone(), f(&Component::Edge, a)))
                    .collect(),
            },
        };
        BaseMor::new(dom.clone(), cod.clone(), map)
    }

    pub fn identity(obj: &BaseObj) -> Self {
        BaseMor::from_fn(obj, obj, |_, a| a.clone()).expect("identity is always well-formed")
    }

    /// The unique morphism out of the initial object.
    pub fn from_initial(cod: &BaseObj) -> Self {
        let dom = BaseObj::initial(cod.variant());
        BaseMor::from_fn(&dom, cod, |_, _| unreachable!()).expect("empty table")
    }

    fn table(&self, comp: &Component) -> &BTreeMap<Atom, Atom> {
        match (&self.map, comp) {
            (MorData::Set(t), Component::Single) => t,
            (MorData::Sorted(sorts), Component::Sort(name)) => sorts
                .get(name)
                .unwrap_or_else(|| panic!("no table for sort {name}")),
            (MorData::Graph { v, .. }, Component::Vertex) => v,
            (MorData::Graph { e, .. }, Component::Edge) => e,
            _ => panic!("component mismatch in morphism table lookup"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dom.variant() != self.cod.variant() {
            return Err(Error::MixedVariants(
                self.dom.variant().to_string(),
                self.cod.variant().to_string(),
            ));
        }
        for comp in self.dom.components() {
            let table = self.table(&comp);
            for a in self.dom.atoms(&comp) {
                match table.get(a) {
                    None => {
                        return Err(Error::IllFormedMorphism(format!(
                            "no image for {a} in component {comp}"
                        )))
                    }
                    Some(b) if !self.cod.contains(&comp, b) => {
                        return Err(Error::IllFormedMorphism(format!(
                            "image {b} of {a} is outside the codomain (component {comp})"
                        )))
                    }
                    _ => {}
                }
            }
            if table.len() != self.dom.atoms(&comp).len() {
                return Err(Error::IllFormedMorphism(format!(
                    "table for component {comp} has entries outside the domain"
                )));
            }
        }
        if let MorData::Graph { v, e } = &self.map {
            for (edge, img) in e {
                let s = self.dom.edge_src(edge);
                let t = self.dom.edge_tgt(edge);
                if v[s] != *self.cod.edge_src(img) || v[t] != *self.cod.edge_tgt(img) {
                    return Err(Error::IllFormedMorphism(format!(
                        "edge map does not commute with source/target at {edge}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, comp: &Component, a: &Atom) -> Atom {
        self.table(comp)
            .get(a)
            .unwrap_or_else(|| panic!("atom {a} not in domain (component {comp})"))
            .clone()
    }

    /// Application for single-component (finite set) morphisms.
    pub fn apply1(&self, a: &Atom) -> Atom {
        self.apply(&Component::Single, a)
    }

    /// Composition in diagram order: `self.then(g)` is `g ∘ self`.
    pub fn then(&self, g: &BaseMor) -> Result<BaseMor> {
        if !self.cod.same_atoms(&g.dom) {
            return Err(Error::IllFormedMorphism(
                "composition of non-composable morphisms".into(),
            ));
        }
        BaseMor::from_fn(&self.dom, &g.cod, |comp, a| {
            g.apply(comp, &self.apply(comp, a))
        })
    }

    pub fn is_injective(&self) -> bool {
        self.dom.components().iter().all(|comp| {
            let table = self.table(comp);
            let imgs: BTreeSet<&Atom> = table.values().collect();
            imgs.len() == table.len()
        })
    }

    pub fn is_surjective(&self) -> bool {
        self.dom.components().iter().all(|comp| {
            let imgs: BTreeSet<&Atom> = self.table(comp).values().collect();
            imgs.len() == self.cod.atoms(comp).len()
        })
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Inverse of a bijective morphism.
    pub fn inverse(&self) -> Result<BaseMor> {
        if !self.is_bijective() {
            return Err(Error::IllFormedMorphism("inverse of a non-bijection".into()));
        }
        BaseMor::from_fn(&self.cod, &self.dom, |comp, b| {
            self.table(comp)
                .iter()
                .find(|(_, img)| *img == b)
                .map(|(a, _)| a.clone())
                .expect("surjectivity")
        })
    }

    /// The image subobject of the codomain.
    pub fn image(&self) -> BaseObj {
        let obj = match (&self.map, &self.cod.data) {
            (MorData::Set(t), ObjData::Set(_)) => {
                BaseObj::finset(t.values().cloned().collect::<BTreeSet<_>>())
            }
            (MorData::Sorted(sorts), ObjData::Sorted(_)) => BaseObj::sorted(
                sorts
                    .iter()
                    .map(|(name, t)| (name.clone(), t.values().cloned().collect())),
            ),
            (MorData::Graph { v, e }, ObjData::Graph { .. }) => {
                let vs: BTreeSet<Atom> = v.values().cloned().collect();
                let es: Vec<(Atom, Atom, Atom)> = e
                    .values()
                    .map(|img| {
                        (
                            img.clone(),
                            self.cod.edge_src(img).clone(),
                            self.cod.edge_tgt(img).clone(),
                        )
                    })
                    .collect();
                BaseObj::graph(vs, es).expect("image of a graph morphism is a subgraph")
            }
            _ => unreachable!("validated morphism"),
        };
        if self.cod.truncated {
            obj.mark_truncated()
        } else {
            obj
        }
    }

    /// Section of a surjective morphism: picks the least preimage of every
    /// codomain atom.
    pub fn section(&self) -> Result<BaseMor> {
        if !self.is_surjective() {
            return Err(Error::IllFormedMorphism("section of a non-surjection".into()));
        }
        BaseMor::from_fn(&self.cod, &self.dom, |comp, b| {
            self.table(comp)
                .iter()
                .find(|(_, img)| *img == b)
                .map(|(a, _)| a.clone())
                .expect("surjectivity")
        })
    }
}

/// A morphism together with the result of an injectivity check.
#[derive(Clone, Debug)]
pub struct InjectionWitness {
    pub mor: BaseMor,
    pub mono_checked: bool,
}

impl InjectionWitness {
    pub fn check(mor: BaseMor) -> Result<Self> {
        if mor.is_injective() {
            Ok(InjectionWitness {
                mor,
                mono_checked: true,
            })
        } else {
            Err(Error::MonoViolation(
                "morphism is not componentwise injective".into(),
            ))
        }
    }
}

/// Coproduct as a tagged disjoint union; injections wrap atoms in `Inj(i, ·)`.
pub fn coproduct(variant: Variant, parts: &[BaseObj]) -> Result<(BaseObj, Vec<InjectionWitness>)> {
    let tagged: Vec<(u32, &BaseObj)> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| (i as u32, p))
        .collect();
    let (obj, injs) = tagged_union(variant, &tagged)?;
    let witnesses = injs
        .into_iter()
        .map(InjectionWitness::check)
        .collect::<Result<Vec<_>>>()?;
    Ok((obj, witnesses))
}

/// Disjoint union with caller-chosen tags; used where summands must keep a
/// stable identity across chain levels.
pub fn tagged_union(
    variant: Variant,
    parts: &[(u32, &BaseObj)],
) -> Result<(BaseObj, Vec<BaseMor>)> {
    for (_, p) in parts {
        if p.variant() != variant {
            return Err(Error::MixedVariants(
                variant.to_string(),
                p.variant().to_string(),
            ));
        }
    }
    let mut tags = BTreeSet::new();
    for (t, _) in parts {
        if !tags.insert(*t) {
            return Err(Error::IllFormedMorphism(format!("duplicate coproduct tag {t}")));
        }
    }
    let truncated = parts.iter().any(|(_, p)| p.truncated);
    let sum = match variant {
        Variant::FinSet => {
            let mut atoms = BTreeSet::new();
            for (t, p) in parts {
                atoms.extend(p.atoms(&Component::Single).iter().map(|a| Atom::inj(*t, a.clone())));
            }
            BaseObj::finset(atoms)
        }
        Variant::SortedFinSet => {
            let mut sorts: BTreeMap<String, BTreeSet<Atom>> = BTreeMap::new();
            for (t, p) in parts {
                if let ObjData::Sorted(ss) = &p.data {
                    for (name, atoms) in ss {
                        sorts
                            .entry(name.clone())
                            .or_default()
                            .extend(atoms.iter().map(|a| Atom::inj(*t, a.clone())));
                    }
                }
            }
            BaseObj::sorted(sorts)
        }
        Variant::FinGraph => {
            let mut vs = BTreeSet::new();
            let mut es = Vec::new();
            for (t, p) in parts {
                vs.extend(p.atoms(&Component::Vertex).iter().map(|a| Atom::inj(*t, a.clone())));
                for e in p.atoms(&Component::Edge) {
                    es.push((
                        Atom::inj(*t, e.clone()),
                        Atom::inj(*t, p.edge_src(e).clone()),
                        Atom::inj(*t, p.edge_tgt(e).clone()),
                    ));
                }
            }
            BaseObj::graph(vs, es)?
        }
    };
    let sum = if truncated { sum.mark_truncated() } else { sum };
    let injections = parts
        .iter()
        .map(|(t, p)| BaseMor::from_fn(p, &sum, |_, a| Atom::inj(*t, a.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok((sum, injections))
}

/// Quotient of an object by the least (graph-)congruence containing the given
/// pairs. Returns the quotient object and the projection; quotient atoms are
/// the least representative of each class.
pub fn quotient_by_pairs(
    obj: &BaseObj,
    pairs: &[(Component, Atom, Atom)],
) -> Result<(BaseObj, BaseMor)> {
    let mut uf = UnionFind::new(obj);
    for (comp, a, b) in pairs {
        uf.union(comp, a, b);
    }
    // For graphs, merged edges force their sources and targets to merge.
    if obj.variant() == Variant::FinGraph {
        loop {
            let mut changed = false;
            let classes = uf.classes(&Component::Edge);
            for class in classes.values() {
                for pair in class.windows(2) {
                    changed |= uf.union(
                        &Component::Vertex,
                        obj.edge_src(&pair[0]),
                        obj.edge_src(&pair[1]),
                    );
                    changed |= uf.union(
                        &Component::Vertex,
                        obj.edge_tgt(&pair[0]),
                        obj.edge_tgt(&pair[1]),
                    );
                }
            }
            if !changed {
                break;
            }
        }
    }
    let quotient = match &obj.data {
        ObjData::Set(_) => BaseObj::finset(
            obj.atoms(&Component::Single)
                .iter()
                .map(|a| uf.rep(&Component::Single, a))
                .collect::<BTreeSet<_>>(),
        ),
        ObjData::Sorted(sorts) => BaseObj::sorted(sorts.keys().map(|name| {
            let comp = Component::Sort(name.clone());
            (
                name.clone(),
                obj.atoms(&comp).iter().map(|a| uf.rep(&comp, a)).collect(),
            )
        })),
        ObjData::Graph { vertices, edges, .. } => {
            let vs: BTreeSet<Atom> = vertices.iter().map(|v| uf.rep(&Component::Vertex, v)).collect();
            let es: BTreeMap<Atom, (Atom, Atom)> = edges
                .iter()
                .map(|e| {
                    (
                        uf.rep(&Component::Edge, e),
                        (
                            uf.rep(&Component::Vertex, obj.edge_src(e)),
                            uf.rep(&Component::Vertex, obj.edge_tgt(e)),
                        ),
                    )
                })
                .collect();
            BaseObj::graph(vs, es.into_iter().map(|(e, (s, t))| (e, s, t)))?
        }
    };
    let quotient = if obj.truncated {
        quotient.mark_truncated()
    } else {
        quotient
    };
    let proj = BaseMor::from_fn(obj, &quotient, |comp, a| uf.rep(comp, a))?;
    Ok((quotient, proj))
}

/// Coequalizer of a parallel pair: quotient of the codomain by the least
/// congruence merging `f(x)` with `g(x)` for every `x`.
pub fn coequalize_morphisms(f: &BaseMor, g: &BaseMor) -> Result<(BaseObj, BaseMor)> {
    if !f.dom.same_atoms(&g.dom) || !f.cod.same_atoms(&g.cod) {
        return Err(Error::NotParallel);
    }
    let mut pairs = Vec::new();
    for comp in f.dom.components() {
        for a in f.dom.atoms(&comp) {
            pairs.push((comp.clone(), f.apply(&comp, a), g.apply(&comp, a)));
        }
    }
    quotient_by_pairs(&f.cod, &pairs)
}

/// (split epi, mono)-factorization: `f = m ∘ e` with `e` surjective (a section
/// is available on demand) and `m` injective.
pub fn factorize(f: &BaseMor) -> Result<(BaseMor, InjectionWitness)> {
    let img = f.image();
    let e = BaseMor::from_fn(&f.dom, &img, |comp, a| f.apply(comp, a))?;
    let m = BaseMor::from_fn(&img, &f.cod, |_, a| a.clone())?;
    Ok((e, InjectionWitness::check(m)?))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChainStatus {
    /// Link `k` is bijective; stage `k` is the colimit.
    Converged(usize),
    BudgetExhausted,
}

/// Colimit of a chain of injections: returns stage `k` for the first
/// bijective link `k`, or the last computed stage marked truncated.
pub fn chain_colimit(
    variant: Variant,
    links: &[InjectionWitness],
    budget: usize,
) -> Result<(BaseObj, ChainStatus)> {
    if links.is_empty() {
        return Ok((BaseObj::initial(variant), ChainStatus::Converged(0)));
    }
    for (i, w) in links.iter().enumerate() {
        if !w.mor.is_injective() || !w.mono_checked {
            return Err(Error::NonMonoInChain(i));
        }
        if i + 1 < links.len() && !w.mor.cod.same_atoms(&links[i + 1].mor.dom) {
            return Err(Error::IllFormedMorphism(format!(
                "links {i} and {} are not composable",
                i + 1
            )));
        }
    }
    for (i, w) in links.iter().enumerate().take(budget) {
        if w.mor.is_bijective() {
            return Ok((w.mor.dom.clone(), ChainStatus::Converged(i)));
        }
    }
    let last = links[links.len().min(budget) - 1].mor.cod.clone();
    Ok((last.mark_truncated(), ChainStatus::BudgetExhausted))
}

/// Union-find keyed by (component, atom); representatives are least atoms.
pub struct UnionFind {
    index: BTreeMap<(Component, Atom), usize>,
    atoms: Vec<(Component, Atom)>,
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(obj: &BaseObj) -> Self {
        let mut index = BTreeMap::new();
        let mut atoms = Vec::new();
        for (comp, a) in obj.elements() {
            index.insert((comp.clone(), a.clone()), atoms.len());
            atoms.push((comp, a));
        }
        let parent = (0..atoms.len()).collect();
        UnionFind {
            index,
            atoms,
            parent,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges two classes; returns true when they were distinct.
    pub fn union(&mut self, comp: &Component, a: &Atom, b: &Atom) -> bool {
        let ia = self.index[&(comp.clone(), a.clone())];
        let ib = self.index[&(comp.clone(), b.clone())];
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra == rb {
            return false;
        }
        // Keep the atom-least element as root so representatives are canonical.
        let (keep, drop) = if self.atoms[ra].1 <= self.atoms[rb].1 {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[drop] = keep;
        true
    }

    pub fn same(&mut self, comp: &Component, a: &Atom, b: &Atom) -> bool {
        let ia = self.index[&(comp.clone(), a.clone())];
        let ib = self.index[&(comp.clone(), b.clone())];
        self.find(ia) == self.find(ib)
    }

    /// Least atom of the class of `a`.
    pub fn rep(&mut self, comp: &Component, a: &Atom) -> Atom {
        let i = self.index[&(comp.clone(), a.clone())];
        let r = self.find(i);
        self.atoms[r].1.clone()
    }

    /// Classes of one component, keyed by representative.
    pub fn classes(&mut self, comp: &Component) -> BTreeMap<Atom, Vec<Atom>> {
        let mut out: BTreeMap<Atom, Vec<Atom>> = BTreeMap::new();
        for i in 0..self.atoms.len() {
            if &self.atoms[i].0 != comp {
                continue;
            }
            let r = self.find(i);
            let atom = self.atoms[i].1.clone();
            out.entry(self.atoms[r].1.clone()).or_default().push(atom);
        }
        out
    }

    pub fn class_count(&mut self) -> usize {
        (0..self.atoms.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Canonical finite set with atoms `x0..x{n-1}`.
pub fn canonical_finset(n: usize) -> BaseObj {
    BaseObj::finset((0..n).map(|i| Atom::sym(format!("x{i}"))))
}

/// All morphisms between two objects (graphs: only maps commuting with
/// source/target).
pub fn all_morphisms(dom: &BaseObj, cod: &BaseObj) -> Vec<BaseMor> {
    fn tables(dom_atoms: &BTreeSet<Atom>, cod_atoms: &BTreeSet<Atom>) -> Vec<BTreeMap<Atom, Atom>> {
        let doms: Vec<&Atom> = dom_atoms.iter().collect();
        let cods: Vec<&Atom> = cod_atoms.iter().collect();
        if doms.is_empty() {
            return vec![BTreeMap::new()];
        }
        if cods.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BTreeMap::new()];
        for d in doms {
            let mut next = Vec::new();
            for partial in &out {
                for c in &cods {
                    let mut t = partial.clone();
                    t.insert((*d).clone(), (**c).clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    match (&dom.data, &cod.data) {
        (ObjData::Set(d), ObjData::Set(c)) => tables(d, c)
            .into_iter()
            .map(|t| BaseMor::new(dom.clone(), cod.clone(), MorData::Set(t)).unwrap())
            .collect(),
        (ObjData::Sorted(ds), ObjData::Sorted(cs)) => {
            if ds.keys().ne(cs.keys()) {
                return Vec::new();
            }
            let mut out: Vec<BTreeMap<String, BTreeMap<Atom, Atom>>> = vec![BTreeMap::new()];
            for (name, datoms) in ds {
                let choices = tables(datoms, &cs[name]);
                let mut next = Vec::new();
                for partial in &out {
                    for choice in &choices {
                        let mut p = partial.clone();
                        p.insert(name.clone(), choice.clone());
                        next.push(p);
                    }
                }
                out = next;
            }
            out.into_iter()
                .map(|t| BaseMor::new(dom.clone(), cod.clone(), MorData::Sorted(t)).unwrap())
                .collect()
        }
        (ObjData::Graph { .. }, ObjData::Graph { .. }) => {
            let vmaps = tables(dom.atoms(&Component::Vertex), cod.atoms(&Component::Vertex));
            let emaps = tables(dom.atoms(&Component::Edge), cod.atoms(&Component::Edge));
            let mut out = Vec::new();
            for v in &vmaps {
                for e in &emaps {
                    let cand = BaseMor {
                        dom: dom.clone(),
                        cod: cod.clone(),
                        map: MorData::Graph {
                            v: v.clone(),
                            e: e.clone(),
                        },
                    };
                    if cand.validate().is_ok() {
                        out.push(cand);
                    }
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// All injective morphisms between two objects.
pub fn all_injections(dom: &BaseObj, cod: &BaseObj) -> Vec<BaseMor> {
    all_morphisms(dom, cod)
        .into_iter()
        .filter(BaseMor::is_injective)
        .collect()
}

/// All graphs with at most `max_v` vertices and `max_e` edges, canonical atom
/// names.
pub fn all_graphs(max_v: usize, max_e: usize) -> Vec<BaseObj> {
    let mut out = Vec::new();
    for nv in 0..=max_v {
        let vs: Vec<Atom> = (0..nv).map(|i| Atom::sym(format!("v{i}"))).collect();
        for ne in 0..=max_e {
            if nv == 0 && ne > 0 {
                continue;
            }
            // Each edge independently picks a (source, target) pair.
            let mut assignments: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
            for _ in 0..ne {
                let mut next = Vec::new();
                for partial in &assignments {
                    for s in 0..nv {
                        for t in 0..nv {
                            let mut p = partial.clone();
                            p.push((s, t));
                            next.push(p);
                        }
                    }
                }
                assignments = next;
            }
            for assign in assignments {
                let edges: Vec<(Atom, Atom, Atom)> = assign
                    .iter()
                    .enumerate()
                    .map(|(i, (s, t))| {
                        (
                            Atom::sym(format!("e{i}")),
                            vs[*s].clone(),
                            vs[*t].clone(),
                        )
                    })
                    .collect();
                out.push(BaseObj::graph(vs.clone(), edges).unwrap());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(names: &[&str]) -> BaseObj {
        BaseObj::finset(names.iter().map(|n| Atom::sym(*n)))
    }

    #[test]
    fn coproduct_disjoint_union() {
        let (sum, injs) = coproduct(Variant::FinSet, &[named(&["a"]), named(&["b", "c"])]).unwrap();
        assert_eq!(sum.size(), 3);
        assert_eq!(injs.len(), 2);
        assert!(injs.iter().all(|w| w.mono_checked));
        // Injections are jointly surjective with pairwise disjoint images.
        let mut seen = BTreeSet::new();
        for w in &injs {
            for a in w.mor.dom.atoms(&Component::Single) {
                assert!(seen.insert(w.mor.apply1(a)));
            }
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn coproduct_empty_is_initial() {
        let (sum, injs) = coproduct(Variant::FinSet, &[]).unwrap();
        assert!(sum.is_empty());
        assert!(injs.is_empty());
    }

    #[test]
    fn coproduct_of_loop_graphs() {
        let one_loop = BaseObj::graph(
            [Atom::sym("v")],
            [(Atom::sym("l"), Atom::sym("v"), Atom::sym("v"))],
        )
        .unwrap();
        let (sum, _) = coproduct(Variant::FinGraph, &[one_loop.clone(), one_loop]).unwrap();
        assert_eq!(sum.atoms(&Component::Vertex).len(), 2);
        assert_eq!(sum.loops().len(), 2);
    }

    #[test]
    fn coproduct_rejects_mixed_variants() {
        let err = coproduct(Variant::FinSet, &[named(&["a"]), BaseObj::initial(Variant::FinGraph)]);
        assert!(matches!(err, Err(Error::MixedVariants(_, _))));
    }

    #[test]
    fn coequalize_equal_pair_is_identity_quotient() {
        let a = named(&["a", "b"]);
        let f = BaseMor::identity(&a);
        let (q, proj) = coequalize_morphisms(&f, &f).unwrap();
        assert!(q.same_atoms(&a));
        assert!(proj.is_bijective());
    }

    #[test]
    fn coequalize_one_merge() {
        let e = named(&["e"]);
        let f2 = named(&["f1", "f2"]);
        let f = BaseMor::from_fn(&e, &f2, |_, _| Atom::sym("f1")).unwrap();
        let g = BaseMor::from_fn(&e, &f2, |_, _| Atom::sym("f2")).unwrap();
        let (q, proj) = coequalize_morphisms(&f, &g).unwrap();
        assert_eq!(q.size(), 1);
        assert!(proj.is_surjective());
    }

    #[test]
    fn graph_quotient_retargets_consistently() {
        // Two vertices, a loop at v0 and an edge v0 → v1; merging the loop
        // with the edge must merge v0 with v1 so source/target stay total.
        let g = BaseObj::graph(
            [Atom::sym("v0"), Atom::sym("v1")],
            [
                (Atom::sym("l"), Atom::sym("v0"), Atom::sym("v0")),
                (Atom::sym("k"), Atom::sym("v0"), Atom::sym("v1")),
            ],
        )
        .unwrap();
        let (q, proj) = quotient_by_pairs(
            &g,
            &[(Component::Edge, Atom::sym("l"), Atom::sym("k"))],
        )
        .unwrap();
        assert_eq!(q.atoms(&Component::Vertex).len(), 1);
        assert_eq!(q.atoms(&Component::Edge).len(), 1);
        assert!(proj.validate().is_ok());
        assert!(proj.is_surjective());
    }

    #[test]
    fn factorize_injective_gives_iso_epi() {
        let a = named(&["a", "b"]);
        let c = named(&["a", "b", "c"]);
        let f = BaseMor::from_fn(&a, &c, |_, x| x.clone()).unwrap();
        let (e, m) = factorize(&f).unwrap();
        assert!(e.is_bijective());
        assert!(m.mono_checked);
        assert_eq!(e.then(&m.mor).unwrap(), f);
    }

    #[test]
    fn factorize_constant_map() {
        let a = named(&["a", "b", "c"]);
        let f = BaseMor::from_fn(&a, &a, |_, _| Atom::sym("a")).unwrap();
        let (e, m) = factorize(&f).unwrap();
        assert_eq!(e.cod.size(), 1);
        assert!(e.is_surjective());
        let s = e.section().unwrap();
        assert_eq!(s.then(&e).unwrap(), BaseMor::identity(&e.cod));
        assert_eq!(e.then(&m.mor).unwrap(), f);
    }

    #[test]
    fn factorize_graph_collapsing_loops() {
        let two_loops = BaseObj::graph(
            [Atom::sym("v")],
            [
                (Atom::sym("l0"), Atom::sym("v"), Atom::sym("v")),
                (Atom::sym("l1"), Atom::sym("v"), Atom::sym("v")),
            ],
        )
        .unwrap();
        let f = BaseMor::from_fn(&two_loops, &two_loops, |comp, _| match comp {
            Component::Vertex => Atom::sym("v"),
            _ => Atom::sym("l0"),
        })
        .unwrap();
        let (e, m) = factorize(&f).unwrap();
        assert_eq!(e.cod.atoms(&Component::Edge).len(), 1);
        assert_eq!(e.cod.loops().len(), 1);
        assert!(m.mono_checked);
    }

    #[test]
    fn chain_constant_converges_at_zero() {
        let x = named(&["a"]);
        let id = InjectionWitness::check(BaseMor::identity(&x)).unwrap();
        let links = vec![id.clone(), id.clone(), id];
        let (obj, status) = chain_colimit(Variant::FinSet, &links, 16).unwrap();
        assert_eq!(status, ChainStatus::Converged(0));
        assert!(obj.same_atoms(&x));
    }

    #[test]
    fn chain_budget_exhaustion_marks_truncation() {
        // Strictly growing chain of inclusions.
        let stages: Vec<BaseObj> = (1..=4).map(canonical_finset).collect();
        let links: Vec<InjectionWitness> = stages
            .windows(2)
            .map(|w| {
                InjectionWitness::check(
                    BaseMor::from_fn(&w[0], &w[1], |_, a| a.clone()).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let (obj, status) = chain_colimit(Variant::FinSet, &links, 3).unwrap();
        assert_eq!(status, ChainStatus::BudgetExhausted);
        assert!(obj.truncated);
        assert_eq!(obj.size(), 4);
    }

    #[test]
    fn chain_stabilizing_at_two() {
        let s0 = canonical_finset(1);
        let s1 = canonical_finset(2);
        let s2 = canonical_finset(3);
        let s3 = canonical_finset(3);
        let links = vec![
            InjectionWitness::check(BaseMor::from_fn(&s0, &s1, |_, a| a.clone()).unwrap()).unwrap(),
            InjectionWitness::check(BaseMor::from_fn(&s1, &s2, |_, a| a.clone()).unwrap()).unwrap(),
            InjectionWitness::check(BaseMor::from_fn(&s2, &s3, |_, a| a.clone()).unwrap()).unwrap(),
        ];
        let (obj, status) = chain_colimit(Variant::FinSet, &links, 16).unwrap();
        assert_eq!(status, ChainStatus::Converged(2));
        assert!(obj.same_atoms(&s2));
    }

    #[test]
    fn chain_rejects_non_mono_link() {
        let a = named(&["a", "b"]);
        let one = named(&["a"]);
        let collapse = BaseMor::from_fn(&a, &one, |_, _| Atom::sym("a")).unwrap();
        let links = vec![InjectionWitness {
            mor: collapse,
            mono_checked: false,
        }];
        assert!(matches!(
            chain_colimit(Variant::FinSet, &links, 4),
            Err(Error::NonMonoInChain(0))
        ));
    }

    #[test]
    fn sorted_coproduct_per_sort() {
        let a = BaseObj::sorted([
            ("s".to_string(), [Atom::sym("a")].into_iter().collect()),
            ("t".to_string(), BTreeSet::new()),
        ]);
        let b = BaseObj::sorted([
            ("s".to_string(), BTreeSet::new()),
            ("t".to_string(), [Atom::sym("b")].into_iter().collect()),
        ]);
        let (sum, injs) = coproduct(Variant::SortedFinSet, &[a, b]).unwrap();
        assert_eq!(sum.atoms(&Component::Sort("s".into())).len(), 1);
        assert_eq!(sum.atoms(&Component::Sort("t".into())).len(), 1);
        assert!(injs.iter().all(|w| w.mono_checked));
    }

    #[test]
    fn all_morphisms_counts() {
        let a = canonical_finset(2);
        let b = canonical_finset(3);
        assert_eq!(all_morphisms(&a, &b).len(), 9);
        assert_eq!(all_injections(&a, &b).len(), 6);
    }
}
