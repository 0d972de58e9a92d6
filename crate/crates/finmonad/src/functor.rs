//! Endofunctors on a base category, the free-algebra chain, and initial
//! algebras with the invertibility check of the structure map.

use std::sync::Arc;

use crate::atom::Atom;
use crate::base::{
    coproduct, tagged_union, BaseMor, BaseObj, ChainStatus, InjectionWitness, Variant,
};
use crate::error::{Error, Result};

pub trait Endofunctor: Send + Sync {
    fn variant(&self) -> Variant;
    fn name(&self) -> String;
    fn on_obj(&self, x: &BaseObj) -> BaseObj;
    fn on_mor(&self, f: &BaseMor) -> BaseMor;
    fn preserves_monos_claimed(&self) -> bool {
        true
    }
    /// Upper bound on `|on_obj(x)|` given `|x|` per component, when cheap to
    /// predict; used to stop chains before materializing huge powersets.
    fn size_hint(&self, _input: &BaseObj) -> Option<u128> {
        None
    }
}

pub type DynFunctor = Arc<dyn Endofunctor>;

/// Step and atom ceilings for chain constructions.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_steps: usize,
    pub max_atoms: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 16,
            max_atoms: 1_000_000,
        }
    }
}

impl Budget {
    pub fn steps(max_steps: usize) -> Self {
        Budget {
            max_steps,
            ..Budget::default()
        }
    }
}

/// Constant endofunctor with a fixed value; every morphism goes to the
/// identity on that value.
pub struct ConstantFunctor {
    pub value: BaseObj,
}

impl Endofunctor for ConstantFunctor {
    fn variant(&self) -> Variant {
        self.value.variant()
    }
    fn name(&self) -> String {
        format!("const({})", self.value)
    }
    fn on_obj(&self, _x: &BaseObj) -> BaseObj {
        self.value.clone()
    }
    fn on_mor(&self, _f: &BaseMor) -> BaseMor {
        BaseMor::identity(&self.value)
    }
    fn size_hint(&self, _input: &BaseObj) -> Option<u128> {
        Some(self.value.size() as u128)
    }
}

pub struct IdentityFunctor {
    pub variant: Variant,
}

impl Endofunctor for IdentityFunctor {
    fn variant(&self) -> Variant {
        self.variant
    }
    fn name(&self) -> String {
        "id".into()
    }
    fn on_obj(&self, x: &BaseObj) -> BaseObj {
        x.clone()
    }
    fn on_mor(&self, f: &BaseMor) -> BaseMor {
        f.clone()
    }
    fn size_hint(&self, input: &BaseObj) -> Option<u128> {
        Some(input.size() as u128)
    }
}

/// Pointwise coproduct of endofunctors: `(H0+…+Hk)(X) = H0 X + … + Hk X`.
pub struct CoproductFunctor {
    pub parts: Vec<DynFunctor>,
}

impl Endofunctor for CoproductFunctor {
    fn variant(&self) -> Variant {
        self.parts[0].variant()
    }
    fn name(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|p| p.name()).collect();
        names.join("+")
    }
    fn on_obj(&self, x: &BaseObj) -> BaseObj {
        let images: Vec<BaseObj> = self.parts.iter().map(|p| p.on_obj(x)).collect();
        coproduct(self.variant(), &images)
            .expect("same-variant coproduct")
            .0
    }
    fn on_mor(&self, f: &BaseMor) -> BaseMor {
        let dom = self.on_obj(&f.dom);
        let cod = self.on_obj(&f.cod);
        let part_mors: Vec<BaseMor> = self.parts.iter().map(|p| p.on_mor(f)).collect();
        BaseMor::from_fn(&dom, &cod, |comp, a| match a {
            Atom::Inj(tag, inner) => {
                Atom::inj(*tag, part_mors[*tag as usize].apply(comp, inner))
            }
            _ => unreachable!("coproduct atoms are tagged"),
        })
        .expect("componentwise image")
    }
    fn preserves_monos_claimed(&self) -> bool {
        self.parts.iter().all(|p| p.preserves_monos_claimed())
    }
    fn size_hint(&self, input: &BaseObj) -> Option<u128> {
        self.parts
            .iter()
            .map(|p| p.size_hint(input))
            .sum::<Option<u128>>()
    }
}

/// Composite `F ∘ G`.
pub struct ComposeFunctor {
    pub outer: DynFunctor,
    pub inner: DynFunctor,
}

impl Endofunctor for ComposeFunctor {
    fn variant(&self) -> Variant {
        self.inner.variant()
    }
    fn name(&self) -> String {
        format!("{}∘{}", self.outer.name(), self.inner.name())
    }
    fn on_obj(&self, x: &BaseObj) -> BaseObj {
        self.outer.on_obj(&self.inner.on_obj(x))
    }
    fn on_mor(&self, f: &BaseMor) -> BaseMor {
        self.outer.on_mor(&self.inner.on_mor(f))
    }
    fn preserves_monos_claimed(&self) -> bool {
        self.outer.preserves_monos_claimed() && self.inner.preserves_monos_claimed()
    }
    fn size_hint(&self, input: &BaseObj) -> Option<u128> {
        // Only a real bound when the inner image can be materialized cheaply.
        let inner = self.inner.on_obj(input);
        self.outer.size_hint(&inner)
    }
}

#[derive(Clone, Debug)]
pub struct FreeChain {
    /// Stages `W_0, W_1, …` as far as computed.
    pub stages: Vec<BaseObj>,
    /// Connecting injections `w_k : W_k → W_{k+1}`.
    pub links: Vec<InjectionWitness>,
    pub status: ChainStatus,
}

impl FreeChain {
    /// The chain colimit: stage `k` when converged at `k`, otherwise the last
    /// stage marked truncated.
    pub fn carrier(&self) -> BaseObj {
        match self.status {
            ChainStatus::Converged(k) => self.stages[k].clone(),
            ChainStatus::BudgetExhausted => {
                self.stages.last().expect("nonempty chain").clone().mark_truncated()
            }
        }
    }

    /// Per-stage total sizes, for divergence profiles.
    pub fn sizes(&self) -> Vec<usize> {
        self.stages.iter().map(BaseObj::size).collect()
    }
}

/// The free-algebra chain `W_0 = X`, `W_{k+1} = X + H W_k`, with links
/// `w_0 = inl` and `w_{k+1} = id_X + H w_k`. Converges at the first bijective
/// link; the converged stage carries the free algebra on `X`.
pub fn free_algebra_chain(h: &dyn Endofunctor, x: &BaseObj, budget: Budget) -> Result<FreeChain> {
    if !h.preserves_monos_claimed() {
        return Err(Error::MonoViolation(format!(
            "functor {} does not claim to preserve monos",
            h.name()
        )));
    }
    let mut stages = vec![x.clone()];
    let mut links: Vec<InjectionWitness> = Vec::new();
    for step in 0..budget.max_steps {
        let prev = stages.last().unwrap().clone();
        if let Some(bound) = h.size_hint(&prev) {
            if bound + x.size() as u128 > budget.max_atoms {
                return Ok(FreeChain {
                    stages,
                    links,
                    status: ChainStatus::BudgetExhausted,
                });
            }
        }
        let h_prev = h.on_obj(&prev);
        let (next, injs) = coproduct(h.variant(), &[x.clone(), h_prev])?;
        let link = if step == 0 {
            // w_0 : X → X + HX is the left coproduct injection.
            injs[0].mor.clone()
        } else {
            // w_{k+1} = id_X + H w_k.
            let h_link = h.on_mor(&links[step - 1].mor);
            BaseMor::from_fn(&prev, &next, |comp, a| match a {
                Atom::Inj(0, inner) => Atom::inj(0, (**inner).clone()),
                Atom::Inj(1, inner) => Atom::inj(1, h_link.apply(comp, inner)),
                _ => unreachable!("stage atoms are tagged"),
            })?
        };
        let witness = InjectionWitness::check(link).map_err(|_| {
            Error::MonoViolation(format!(
                "functor {} failed to preserve a mono at chain step {step}",
                h.name()
            ))
        })?;
        let converged = witness.mor.is_bijective();
        stages.push(next);
        links.push(witness);
        if converged {
            return Ok(FreeChain {
                stages,
                links,
                status: ChainStatus::Converged(step),
            });
        }
        if stages.last().unwrap().size() as u128 > budget.max_atoms {
            return Ok(FreeChain {
                stages,
                links,
                status: ChainStatus::BudgetExhausted,
            });
        }
    }
    Ok(FreeChain {
        stages,
        links,
        status: ChainStatus::BudgetExhausted,
    })
}

#[derive(Clone, Debug)]
pub struct InitialAlgebraResult {
    pub carrier: BaseObj,
    /// `H(μH) → μH`, invertible by Lambek's lemma.
    pub structure: BaseMor,
    pub structure_inverse: BaseMor,
    pub stage: usize,
}

/// Initial algebra via the free-algebra chain on the initial object. The
/// structure map and its inverse are materialized and verified.
pub fn initial_algebra(h: &dyn Endofunctor, budget: Budget) -> Result<InitialAlgebraResult> {
    let zero = BaseObj::initial(h.variant());
    let chain = free_algebra_chain(h, &zero, budget)?;
    let k = match chain.status {
        ChainStatus::Converged(k) => k,
        ChainStatus::BudgetExhausted => {
            return Err(Error::BudgetExhausted {
                steps: chain.links.len(),
                detail: format!(
                    "no initial algebra found; stage sizes {:?}",
                    chain.sizes()
                ),
            })
        }
    };
    let carrier = chain.stages[k].clone();
    let link_inv = chain.links[k].mor.inverse()?;
    // Stage k+1 is 0 + H W_k; the structure map factors through the tag-1
    // injection.
    let h_carrier = h.on_obj(&carrier);
    let structure = BaseMor::from_fn(&h_carrier, &carrier, |comp, a| {
        link_inv.apply(comp, &Atom::inj(1, a.clone()))
    })?;
    let structure_inverse = structure.inverse()?;
    if structure.then(&structure_inverse)? != BaseMor::identity(&h_carrier)
        || structure_inverse.then(&structure)? != BaseMor::identity(&carrier)
    {
        return Err(Error::IllFormedMorphism(
            "initial-algebra structure is not invertible".into(),
        ));
    }
    Ok(InitialAlgebraResult {
        carrier,
        structure,
        structure_inverse,
        stage: k,
    })
}

/// Chain iteration of `H` itself from the initial object: `Z_0 = 0`,
/// `Z_{m+1} = H Z_m`, links by functoriality. No coproduct wrapper, so stage
/// atoms are exactly the functor's own values — used where stagewise atom
/// comparison matters.
pub fn direct_initial_chain(h: &dyn Endofunctor, budget: Budget) -> Result<FreeChain> {
    let zero = BaseObj::initial(h.variant());
    let mut stages = vec![zero.clone()];
    let mut links: Vec<InjectionWitness> = Vec::new();
    for step in 0..budget.max_steps {
        let prev = stages.last().unwrap().clone();
        if let Some(bound) = h.size_hint(&prev) {
            if bound > budget.max_atoms {
                return Ok(FreeChain {
                    stages,
                    links,
                    status: ChainStatus::BudgetExhausted,
                });
            }
        }
        let next = h.on_obj(&prev);
        let link = if step == 0 {
            BaseMor::from_initial(&next)
        } else {
            h.on_mor(&links[step - 1].mor)
        };
        let witness = InjectionWitness::check(link)?;
        let converged = witness.mor.is_bijective();
        stages.push(next);
        links.push(witness);
        if converged {
            return Ok(FreeChain {
                stages,
                links,
                status: ChainStatus::Converged(step),
            });
        }
        if stages.last().unwrap().size() as u128 > budget.max_atoms {
            return Ok(FreeChain {
                stages,
                links,
                status: ChainStatus::BudgetExhausted,
            });
        }
    }
    Ok(FreeChain {
        stages,
        links,
        status: ChainStatus::BudgetExhausted,
    })
}

/// Decides whether `H Z ↪ Z` by componentwise cardinality, and materializes a
/// witness injection (least-atom order) when one exists.
pub fn is_prefixpoint(h: &dyn Endofunctor, z: &BaseObj) -> (bool, Option<BaseMor>) {
    let hz = h.on_obj(z);
    for comp in z.components() {
        if hz.atoms(&comp).len() > z.atoms(&comp).len() {
            return (false, None);
        }
    }
    // For graphs a cardinality comparison is not enough: build the injection
    // explicitly and check it is a graph morphism; for sets/sorted sets the
    // order embedding always works.
    match z.variant() {
        Variant::FinGraph => {
            for cand in crate::base::all_injections(&hz, z) {
                return (true, Some(cand));
            }
            (false, None)
        }
        _ => {
            let mor = BaseMor::from_fn(&hz, z, |comp, a| {
                let pos = hz.atoms(comp).iter().position(|x| x == a).unwrap();
                z.atoms(comp).iter().nth(pos).unwrap().clone()
            })
            .expect("order embedding");
            (true, Some(mor))
        }
    }
}

/// One violation found by `functor_law_check`.
#[derive(Clone, Debug)]
pub struct FunctorLawViolation {
    pub law: String,
    pub detail: String,
}

/// Spot-checks identity/composition preservation and (when claimed) mono
/// preservation over all morphisms between the sample objects.
pub fn functor_law_check(
    h: &dyn Endofunctor,
    samples: &[BaseObj],
) -> Vec<FunctorLawViolation> {
    let mut violations = Vec::new();
    for x in samples {
        let id = BaseMor::identity(x);
        let h_id = h.on_mor(&id);
        if h_id != BaseMor::identity(&h.on_obj(x)) {
            violations.push(FunctorLawViolation {
                law: "identity".into(),
                detail: format!("H(id_{x}) ≠ id_H{x}"),
            });
        }
    }
    for x in samples {
        for y in samples {
            for f in crate::base::all_morphisms(x, y) {
                if h.preserves_monos_claimed() && f.is_injective() && !h.on_mor(&f).is_injective()
                {
                    violations.push(FunctorLawViolation {
                        law: "mono-preservation".into(),
                        detail: format!("H of an injection {x} → {y} is not injective"),
                    });
                }
                for z in samples {
                    for g in crate::base::all_morphisms(y, z) {
                        let lhs = h.on_mor(&f.then(&g).unwrap());
                        let rhs = h.on_mor(&f).then(&h.on_mor(&g)).unwrap();
                        if lhs != rhs {
                            violations.push(FunctorLawViolation {
                                law: "composition".into(),
                                detail: format!(
                                    "H(g∘f) ≠ H(g)∘H(f) for some {x} → {y} → {z}"
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    violations
}

/// Families of objects (one per index) with componentwise monomorphisms, and
/// endofunctors on them: the ambient setting of the mutual-recursion chain.
pub trait FamilyEndofunctor: Send + Sync {
    fn arity(&self) -> usize;
    fn variant(&self) -> Variant;
    fn on_obj(&self, xs: &[BaseObj]) -> Result<Vec<BaseObj>>;
    /// Action on families of monomorphisms.
    fn on_mono(&self, fs: &[BaseMor]) -> Result<Vec<BaseMor>>;
}

/// Pairing functor `(V, W) ↦ (F W, G V)`.
pub struct PairSwapFunctor {
    pub f: DynFunctor,
    pub g: DynFunctor,
}

impl FamilyEndofunctor for PairSwapFunctor {
    fn arity(&self) -> usize {
        2
    }
    fn variant(&self) -> Variant {
        self.f.variant()
    }
    fn on_obj(&self, xs: &[BaseObj]) -> Result<Vec<BaseObj>> {
        Ok(vec![self.f.on_obj(&xs[1]), self.g.on_obj(&xs[0])])
    }
    fn on_mono(&self, fs: &[BaseMor]) -> Result<Vec<BaseMor>> {
        Ok(vec![self.f.on_mor(&fs[1]), self.g.on_mor(&fs[0])])
    }
}

#[derive(Clone, Debug)]
pub struct FamilyChain {
    /// `levels[k][i]` is component `i` at level `k`; level 0 is all-empty.
    pub levels: Vec<Vec<BaseObj>>,
    /// `links[k][i]` connects component `i` of level `k` to level `k+1`.
    pub links: Vec<Vec<BaseMor>>,
    pub status: ChainStatus,
}

impl FamilyChain {
    pub fn final_components(&self) -> Vec<BaseObj> {
        match self.status {
            ChainStatus::Converged(k) => self.levels[k].clone(),
            ChainStatus::BudgetExhausted => self
                .levels
                .last()
                .expect("nonempty")
                .iter()
                .map(|o| o.clone().mark_truncated())
                .collect(),
        }
    }

    /// Per-level total sizes across components.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|comps| comps.iter().map(BaseObj::size).sum())
            .collect()
    }
}

/// Initial-algebra chain of a family endofunctor from the all-empty family;
/// converged when every component link at some level is bijective.
pub fn family_initial_chain(
    h: &dyn FamilyEndofunctor,
    budget: Budget,
) -> Result<FamilyChain> {
    let n = h.arity();
    let zero = vec![BaseObj::initial(h.variant()); n];
    let mut levels = vec![zero];
    let mut links: Vec<Vec<BaseMor>> = Vec::new();
    for step in 0..budget.max_steps {
        let prev = levels.last().unwrap().clone();
        let next = h.on_obj(&prev)?;
        let level_links = if step == 0 {
            next.iter().map(BaseMor::from_initial).collect::<Vec<_>>()
        } else {
            h.on_mono(&links[step - 1])?
        };
        for (i, l) in level_links.iter().enumerate() {
            if !l.is_injective() {
                return Err(Error::NonMonoInChain(i));
            }
        }
        let converged = level_links.iter().all(BaseMor::is_bijective);
        let total: usize = next.iter().map(BaseObj::size).sum();
        levels.push(next);
        links.push(level_links);
        if converged {
            return Ok(FamilyChain {
                levels,
                links,
                status: ChainStatus::Converged(step),
            });
        }
        if total as u128 > budget.max_atoms {
            return Ok(FamilyChain {
                levels,
                links,
                status: ChainStatus::BudgetExhausted,
            });
        }
    }
    Ok(FamilyChain {
        levels,
        links,
        status: ChainStatus::BudgetExhausted,
    })
}

/// Helper for building the `tag 0 ↦ A, tag 1+j ↦ X_j`-style unions the
/// separated-coproduct machinery uses everywhere.
pub fn base_plus_layers(
    variant: Variant,
    base: &BaseObj,
    layers: &[(u32, &BaseObj)],
) -> Result<(BaseObj, Vec<BaseMor>)> {
    let mut parts: Vec<(u32, &BaseObj)> = vec![(0, base)];
    parts.extend(layers.iter().copied());
    tagged_union(variant, &parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::canonical_finset;

    fn named(names: &[&str]) -> BaseObj {
        BaseObj::finset(names.iter().map(|n| Atom::sym(*n)))
    }

    #[test]
    fn constant_functor_chain_converges_at_one() {
        let h = ConstantFunctor {
            value: named(&["e"]),
        };
        let x = named(&["a", "b"]);
        let chain = free_algebra_chain(&h, &x, Budget::default()).unwrap();
        assert_eq!(chain.status, ChainStatus::Converged(1));
        // W_1 = X + E.
        assert_eq!(chain.stages[1].size(), 3);
        assert!(chain.carrier().same_atoms(&chain.stages[1]));
    }

    #[test]
    fn constant_initial_algebra_is_the_constant() {
        let h = ConstantFunctor {
            value: named(&["e1", "e2"]),
        };
        let result = initial_algebra(&h, Budget::default()).unwrap();
        assert_eq!(result.carrier.size(), 2);
        assert!(result.structure.is_bijective());
        assert_eq!(
            result
                .structure
                .then(&result.structure_inverse)
                .unwrap(),
            BaseMor::identity(&result.structure.dom)
        );
    }

    #[test]
    fn pairing_of_constants_has_componentwise_constant_fixpoint() {
        let e = named(&["e"]);
        let h = PairSwapFunctor {
            f: Arc::new(ConstantFunctor { value: e.clone() }),
            g: Arc::new(ConstantFunctor { value: e.clone() }),
        };
        let chain = family_initial_chain(&h, Budget::default()).unwrap();
        assert!(matches!(chain.status, ChainStatus::Converged(_)));
        let comps = chain.final_components();
        assert!(comps[0].same_atoms(&e));
        assert!(comps[1].same_atoms(&e));
    }

    #[test]
    fn prefixpoint_constant_and_identity() {
        let h = ConstantFunctor {
            value: named(&["e"]),
        };
        let z = named(&["a"]);
        let (ok, wit) = is_prefixpoint(&h, &z);
        assert!(ok);
        assert!(wit.unwrap().is_injective());

        let idf = IdentityFunctor {
            variant: Variant::FinSet,
        };
        let (ok, _) = is_prefixpoint(&idf, &canonical_finset(3));
        assert!(ok);
    }

    #[test]
    fn functor_law_check_flags_broken_action() {
        struct Broken;
        impl Endofunctor for Broken {
            fn variant(&self) -> Variant {
                Variant::FinSet
            }
            fn name(&self) -> String {
                "broken".into()
            }
            fn on_obj(&self, x: &BaseObj) -> BaseObj {
                x.clone()
            }
            fn on_mor(&self, f: &BaseMor) -> BaseMor {
                // Collapses everything to the least codomain atom: breaks
                // identity preservation on objects with ≥ 2 atoms.
                let least = f
                    .cod
                    .atoms(&crate::base::Component::Single)
                    .iter()
                    .next()
                    .cloned();
                match least {
                    Some(l) => BaseMor::from_fn(&f.dom, &f.cod, |_, _| l.clone()).unwrap(),
                    None => f.clone(),
                }
            }
        }
        let violations = functor_law_check(&Broken, &[canonical_finset(2)]);
        assert!(violations.iter().any(|v| v.law == "identity"));
    }

    #[test]
    fn clean_report_for_constant_functor() {
        let h = ConstantFunctor {
            value: named(&["e"]),
        };
        let samples = [canonical_finset(0), canonical_finset(1), canonical_finset(2)];
        assert!(functor_law_check(&h, &samples).is_empty());
    }
}
