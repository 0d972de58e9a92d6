//! Colimits of monads over set-like bases: coequalizers, cointersections and
//! weakly-terminal-object colimits, computed per object by congruence closure
//! on the free Eilenberg–Moore algebra and certified by law checks.
//!
//! The engine quotients `T A` by the least T-algebra congruence containing
//! seed pairs, re-tests the defining subcategory condition on the quotient,
//! and repeats to a fixpoint. Quotient atoms are least class representatives,
//! which are atoms of `T A`; all monads here take atomwise subsets to
//! atomwise subsets, so the induced algebra structure is the projected
//! multiplication.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::atom::Atom;
use crate::base::{BaseMor, BaseObj, Component, UnionFind, Variant};
use crate::error::{Error, Result};
use crate::monad::{
    monad_law_check, morphism_law_check, CheckConfig, MonadMorphism, MonadOps, MonadRep,
};
use crate::report::{LawReport, Outcome};

/// One reflected object: the quotient of `T A` into the engine's subcategory.
#[derive(Clone, Debug)]
pub struct Reflection {
    /// `T A`.
    pub base_carrier: BaseObj,
    /// The quotient `R A`; atoms are least class representatives.
    pub quotient: BaseObj,
    /// Projection `T A → R A`.
    pub proj: BaseMor,
    /// Induced algebra structure `T(R A) → R A`.
    pub structure: BaseMor,
    /// Outer closure/retest rounds used.
    pub rounds: usize,
}

type SeedFn = dyn Fn(&BaseObj, &BaseObj) -> Result<Vec<(Component, Atom, Atom)>> + Send + Sync;
type RetestFn = dyn Fn(&BaseObj, &Reflection) -> Result<Vec<(Component, Atom, Atom)>> + Send + Sync;

/// A monad arising as an objectwise reflection quotient of a base monad.
pub struct QuotientMonad {
    pub base: MonadRep,
    pub label: String,
    seeds: Arc<SeedFn>,
    retest: Arc<RetestFn>,
    budget: usize,
    cache: Mutex<BTreeMap<String, Arc<Reflection>>>,
}

impl QuotientMonad {
    pub fn new(
        base: MonadRep,
        label: impl Into<String>,
        seeds: Arc<SeedFn>,
        retest: Arc<RetestFn>,
        budget: usize,
    ) -> Self {
        QuotientMonad {
            base,
            label: label.into(),
            seeds,
            retest,
            budget,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    /// Runs the closure/retest loop at one object.
    pub fn reflect_at(&self, a: &BaseObj) -> Result<Arc<Reflection>> {
        let key = format!("{a}|{}", a.truncated);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let refl = Arc::new(self.reflect_uncached(a)?);
        self.cache
            .lock()
            .unwrap()
            .insert(key, refl.clone());
        Ok(refl)
    }

    fn reflect_uncached(&self, a: &BaseObj) -> Result<Reflection> {
        if self.base.variant() == Variant::FinGraph {
            return Err(Error::Unsupported(
                "the congruence engine requires a set-like base".into(),
            ));
        }
        let t = &self.base;
        let ta = t.apply_obj(a);
        let tta = t.apply_obj(&ta);
        let mut uf = UnionFind::new(&ta);
        for (comp, x, y) in (self.seeds)(a, &ta)? {
            uf.union(&comp, &x, &y);
        }
        let mut rounds = 0usize;
        loop {
            // T-algebra congruence closure: whenever two elements of T T A
            // become identified under T(proj), their multiplications merge.
            loop {
                rounds += 1;
                if rounds > self.budget + ta.size() + 2 {
                    return Err(Error::BudgetExhausted {
                        steps: rounds,
                        detail: format!("congruence closure did not stabilize at {a}"),
                    });
                }
                let refl = materialize(t, a, &ta, &mut uf)?;
                let t_proj = t.map_mor(&refl.proj);
                let mut changed = false;
                for comp in tta.components() {
                    let mut buckets: BTreeMap<Atom, Atom> = BTreeMap::new();
                    for z in tta.atoms(&comp) {
                        let image = t_proj.apply(&comp, z);
                        let mu = t.mult_atom(a, &comp, z);
                        match buckets.get(&image) {
                            Some(first_mu) => {
                                changed |= uf.union(&comp, first_mu, &mu);
                            }
                            None => {
                                buckets.insert(image, mu);
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            // Re-test the subcategory condition on the quotient.
            let refl = materialize(t, a, &ta, &mut uf)?;
            let extra = (self.retest)(a, &refl)?;
            let mut changed = false;
            for (comp, x, y) in extra {
                changed |= uf.union(&comp, &x, &y);
            }
            if !changed {
                let mut done = refl;
                done.rounds = rounds;
                return Ok(done);
            }
        }
    }
}

/// Builds the quotient object, projection, and induced structure from the
/// current union-find state.
fn materialize(
    t: &MonadRep,
    a: &BaseObj,
    ta: &BaseObj,
    uf: &mut UnionFind,
) -> Result<Reflection> {
    let reps: Vec<(Component, Atom)> = ta
        .elements()
        .into_iter()
        .map(|(comp, x)| {
            let r = uf.rep(&comp, &x);
            (comp, r)
        })
        .collect();
    let quotient = match ta.variant() {
        Variant::FinSet => BaseObj::finset(
            reps.iter()
                .filter(|(c, _)| *c == Component::Single)
                .map(|(_, r)| r.clone()),
        ),
        Variant::SortedFinSet => {
            let mut sorts: BTreeMap<String, std::collections::BTreeSet<Atom>> = BTreeMap::new();
            if let crate::base::ObjData::Sorted(ss) = &ta.data {
                for name in ss.keys() {
                    sorts.insert(name.clone(), Default::default());
                }
            }
            for (c, r) in &reps {
                if let Component::Sort(name) = c {
                    sorts.get_mut(name).unwrap().insert(r.clone());
                }
            }
            BaseObj::sorted(sorts)
        }
        Variant::FinGraph => unreachable!("rejected earlier"),
    };
    let quotient = if ta.truncated {
        quotient.mark_truncated()
    } else {
        quotient
    };
    let proj = BaseMor::from_fn(ta, &quotient, |comp, x| uf.rep(comp, x))?;
    // Quotient atoms are T A atoms, so T(quotient) sits atomwise inside
    // T T A and the induced structure is the projected multiplication.
    let t_quotient = t.apply_obj(&quotient);
    let tta = t.apply_obj(ta);
    for comp in t_quotient.components() {
        for z in t_quotient.atoms(&comp) {
            if !tta.contains(&comp, z) {
                return Err(Error::Unsupported(format!(
                    "monad {} does not preserve atomwise subsets at {z}",
                    t.name()
                )));
            }
        }
    }
    let structure = BaseMor::from_fn(&t_quotient, &quotient, |comp, z| {
        let mu = t.mult_atom(a, comp, z);
        proj.apply(comp, &mu)
    })?;
    Ok(Reflection {
        base_carrier: ta.clone(),
        quotient,
        proj,
        structure,
        rounds: 0,
    })
}

impl MonadOps for QuotientMonad {
    fn variant(&self) -> Variant {
        self.base.variant()
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn apply_obj(&self, a: &BaseObj) -> BaseObj {
        self.reflect_at(a)
            .expect("congruence closure failed")
            .quotient
            .clone()
    }
    fn map_atom(&self, f: &BaseMor, comp: &Component, x: &Atom) -> Atom {
        // x is a representative in T(dom f); push forward and project.
        let image = self.base.map_atom(f, comp, x);
        self.reflect_at(&f.cod)
            .expect("congruence closure failed")
            .proj
            .apply(comp, &image)
    }
    fn unit_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        let u = self.base.unit_atom(a, comp, x);
        self.reflect_at(a)
            .expect("congruence closure failed")
            .proj
            .apply(comp, &u)
    }
    fn mult_atom(&self, a: &BaseObj, comp: &Component, x: &Atom) -> Atom {
        // x ∈ R R A is a representative in T(R A) ⊆ T T A; its projected
        // multiplication is the induced value.
        let mu = self.base.mult_atom(a, comp, x);
        self.reflect_at(a)
            .expect("congruence closure failed")
            .proj
            .apply(comp, &mu)
    }
    fn preserves_monos_claimed(&self) -> bool {
        true
    }
}

/// A diagram in the category of monads.
pub struct DiagramOfMonads {
    pub nodes: Vec<MonadRep>,
    pub arrows: Vec<DiagramArrow>,
}

pub struct DiagramArrow {
    pub src: usize,
    pub dst: usize,
    pub mor: MonadMorphism,
}

/// An object with one Eilenberg–Moore structure per monad of a diagram.
pub struct MultiAlgebra {
    pub carrier: BaseObj,
    pub structures: Vec<BaseMor>,
}

/// Checks the Eilenberg–Moore laws of `(carrier, beta)` for `t`, skipping the
/// associativity instances a truncated carrier cannot represent. Returns
/// (cases, skipped, violation).
pub fn check_em_algebra(
    t: &MonadRep,
    carrier: &BaseObj,
    beta: &BaseMor,
) -> (usize, usize, Option<String>) {
    let mut cases = 0;
    let mut skipped = 0;
    let tb = t.apply_obj(carrier);
    for comp in carrier.components() {
        for x in carrier.atoms(&comp) {
            cases += 1;
            let u = t.unit_atom(carrier, &comp, x);
            if beta.apply(&comp, &u) != *x {
                return (cases, skipped, Some(format!("β(η({x})) ≠ {x}")));
            }
        }
    }
    let ttb = t.apply_obj(&tb);
    let t_beta = t.map_mor(beta);
    for comp in ttb.components() {
        for z in ttb.atoms(&comp) {
            cases += 1;
            let mu = t.mult_atom(carrier, &comp, z);
            if !tb.contains(&comp, &mu) {
                // Depth-truncated carrier: this instance is out of range.
                skipped += 1;
                continue;
            }
            let lhs = beta.apply(&comp, &mu);
            let rhs = beta.apply(&comp, &t_beta.apply(&comp, z));
            if lhs != rhs {
                return (
                    cases,
                    skipped,
                    Some(format!("β(μ({z})) = {lhs} ≠ β(Tβ({z})) = {rhs}")),
                );
            }
        }
    }
    (cases, skipped, None)
}

impl MultiAlgebra {
    /// Validates every Eilenberg–Moore structure and every compatibility
    /// triangle `a_i = a_j ∘ (Df)_carrier`.
    pub fn validate(&self, nodes: &[MonadRep], arrows: &[DiagramArrow]) -> Result<()> {
        for (i, t) in nodes.iter().enumerate() {
            let (_, _, violation) = check_em_algebra(t, &self.carrier, &self.structures[i]);
            if let Some(v) = violation {
                return Err(Error::IllFormedMorphism(format!(
                    "structure {i} is not an Eilenberg–Moore algebra: {v}"
                )));
            }
        }
        for arrow in arrows {
            let f_at = arrow.mor.component(&self.carrier);
            let via = f_at.then(&self.structures[arrow.dst])?;
            if via != self.structures[arrow.src] {
                return Err(Error::IllFormedMorphism(format!(
                    "triangle fails for arrow {} → {}",
                    arrow.src, arrow.dst
                )));
            }
        }
        Ok(())
    }
}

/// Result of a monad-colimit computation, with its certification report.
pub struct ColimitResult {
    pub monad: MonadRep,
    /// Projection from the weakly terminal node's monad.
    pub projection: MonadMorphism,
    /// Cocone components, one per diagram node (coequalizer: source then
    /// target; cointersection: one per quotient).
    pub injections: Vec<MonadMorphism>,
    pub report: LawReport,
    pub rounds_max: usize,
}

fn quotient_monad_for(
    base: &MonadRep,
    label: String,
    seeds: Arc<SeedFn>,
    retest: Arc<RetestFn>,
    budget: usize,
) -> Arc<QuotientMonad> {
    Arc::new(QuotientMonad::new(
        base.clone(),
        label,
        seeds,
        retest,
        budget,
    ))
}

fn projection_morphism(base: &MonadRep, q: &Arc<QuotientMonad>, r: &MonadRep) -> MonadMorphism {
    let qm = q.clone();
    MonadMorphism::new(
        base.clone(),
        r.clone(),
        format!("proj→{}", r.name()),
        Arc::new(move |a| {
            qm.reflect_at(a)
                .expect("congruence closure failed")
                .proj
                .clone()
        }),
    )
}

/// Coequalizer of a parallel pair of monad morphisms. The reflection merges
/// `μ(p_{TA}(x))` with `μ(q_{TA}(x))` for all `x ∈ S(T A)`, closes under the
/// algebra congruence, then re-tests `b∘p_B = b∘q_B` on the quotient.
pub fn coequalize_monads(
    p: &MonadMorphism,
    q: &MonadMorphism,
    samples: &[BaseObj],
    budget: usize,
) -> Result<ColimitResult> {
    if p.source.name() != q.source.name() || p.target.name() != q.target.name() {
        return Err(Error::NotParallel);
    }
    let t = p.target.clone();
    let s = p.source.clone();
    let (ps, qs) = (p.clone(), q.clone());
    let (tm, sm) = (t.clone(), s.clone());
    let seeds: Arc<SeedFn> = Arc::new(move |a, ta| {
        let sta = sm.apply_obj(ta);
        let p_ta = ps.component(ta);
        let q_ta = qs.component(ta);
        let mut pairs = Vec::new();
        for comp in sta.components() {
            for x in sta.atoms(&comp) {
                let via_p = tm.mult_atom(a, &comp, &p_ta.apply(&comp, x));
                let via_q = tm.mult_atom(a, &comp, &q_ta.apply(&comp, x));
                pairs.push((comp.clone(), via_p, via_q));
            }
        }
        Ok(pairs)
    });
    let (pr, qr) = (p.clone(), q.clone());
    let sr = s.clone();
    let retest: Arc<RetestFn> = Arc::new(move |_a, refl| {
        let qobj = &refl.quotient;
        let s_q = sr.apply_obj(qobj);
        let p_q = pr.component(qobj);
        let q_q = qr.component(qobj);
        let mut pairs = Vec::new();
        for comp in s_q.components() {
            for y in s_q.atoms(&comp) {
                let u = refl.structure.apply(&comp, &p_q.apply(&comp, y));
                let v = refl.structure.apply(&comp, &q_q.apply(&comp, y));
                if u != v {
                    pairs.push((comp.clone(), u, v));
                }
            }
        }
        Ok(pairs)
    });
    let label = format!("coeq({}, {})", p.name, q.name);
    let qmonad = quotient_monad_for(&t, label, seeds, retest, budget);
    let r = MonadRep(qmonad.clone() as Arc<dyn MonadOps>);
    let projection = projection_morphism(&t, &qmonad, &r);

    let mut report = LawReport::new(format!("coequalizer of {} and {}", p.name, q.name));
    let mut rounds_max = 0;
    for a in samples {
        let refl = qmonad.reflect_at(a)?;
        rounds_max = rounds_max.max(refl.rounds);
        let bound = refl.base_carrier.size() + 1;
        report.push(
            "closure-rounds",
            format!("A={a}"),
            if refl.rounds <= bound {
                Outcome::Pass { cases: refl.rounds }
            } else {
                Outcome::Fail {
                    counterexample: format!("{} rounds > |T A| bound {bound}", refl.rounds),
                }
            },
        );
        if refl.base_carrier.truncated {
            report.push(
                "exactness",
                format!("A={a}"),
                Outcome::Skipped {
                    reason: "carrier is depth-truncated; result is per-depth only".into(),
                },
            );
        }
        // proj ∘ p = proj ∘ q at this object.
        let pa = p.component(a);
        let qa = q.component(a);
        let lhs = pa.then(&refl.proj)?;
        let rhs = qa.then(&refl.proj)?;
        report.push(
            "projection-coequalizes",
            format!("A={a}"),
            if lhs == rhs {
                Outcome::Pass {
                    cases: pa.dom.size(),
                }
            } else {
                Outcome::Fail {
                    counterexample: "proj∘p ≠ proj∘q".into(),
                }
            },
        );
    }
    report.merge(monad_law_check(&r, samples, CheckConfig::default()));
    report.merge(morphism_law_check(&projection, samples, CheckConfig::default()));
    let injections = vec![
        MonadMorphism::new(
            s.clone(),
            r.clone(),
            "into-coequalizer",
            {
                let (pp, proj) = (p.clone(), projection.clone());
                Arc::new(move |a: &BaseObj| {
                    pp.component(a).then(&proj.component(a)).expect("composable")
                })
            },
        ),
        projection.clone(),
    ];
    Ok(ColimitResult {
        monad: r,
        projection,
        injections,
        report,
        rounds_max,
    })
}

/// Cointersection (wide pushout) of morphisms with surjective components and
/// a common source. Seeds are the kernel pairs of every component; the
/// re-test requires the quotient structure to factor through each component.
pub fn cointersection(
    es: &[MonadMorphism],
    samples: &[BaseObj],
    budget: usize,
) -> Result<ColimitResult> {
    if es.is_empty() {
        return Err(Error::Unsupported("cointersection of no morphisms".into()));
    }
    let t = es[0].source.clone();
    for e in es {
        if e.source.name() != t.name() {
            return Err(Error::NotParallel);
        }
        for a in samples {
            if !e.component(a).is_surjective() {
                return Err(Error::IllFormedMorphism(format!(
                    "{} is not componentwise surjective at {a}",
                    e.name
                )));
            }
        }
    }
    // The kernel pairs live at the object A itself: (e_i)_A : T A → S_i A.
    let es_seed: Vec<MonadMorphism> = es.to_vec();
    let seeds: Arc<SeedFn> = Arc::new(move |a, _ta| {
        let mut pairs = Vec::new();
        for e in &es_seed {
            let ea = e.component(a);
            let mut buckets: BTreeMap<(Component, Atom), Atom> = BTreeMap::new();
            for comp in ea.dom.components() {
                for x in ea.dom.atoms(&comp) {
                    let image = ea.apply(&comp, x);
                    match buckets.get(&(comp.clone(), image.clone())) {
                        Some(first) => pairs.push((comp.clone(), first.clone(), x.clone())),
                        None => {
                            buckets.insert((comp.clone(), image), x.clone());
                        }
                    }
                }
            }
        }
        Ok(pairs)
    });
    let es_retest: Vec<MonadMorphism> = es.to_vec();
    let tr = t.clone();
    let retest: Arc<RetestFn> = Arc::new(move |_a, refl| {
        let qobj = &refl.quotient;
        let tq = tr.apply_obj(qobj);
        let mut pairs = Vec::new();
        for e in &es_retest {
            let eq = e.component(qobj);
            let mut buckets: BTreeMap<(Component, Atom), Atom> = BTreeMap::new();
            for comp in tq.components() {
                for y in tq.atoms(&comp) {
                    let image = eq.apply(&comp, y);
                    let value = refl.structure.apply(&comp, y);
                    match buckets.get(&(comp.clone(), image.clone())) {
                        Some(first) if *first != value => {
                            pairs.push((comp.clone(), first.clone(), value));
                        }
                        Some(_) => {}
                        None => {
                            buckets.insert((comp.clone(), image), value);
                        }
                    }
                }
            }
        }
        Ok(pairs)
    });
    let names: Vec<String> = es.iter().map(|e| e.name.clone()).collect();
    let qmonad = quotient_monad_for(
        &t,
        format!("cointersection({})", names.join(",")),
        seeds,
        retest,
        budget,
    );
    let r = MonadRep(qmonad.clone() as Arc<dyn MonadOps>);
    let projection = projection_morphism(&t, &qmonad, &r);
    let mut report = LawReport::new(format!("cointersection of {}", names.join(", ")));
    let mut rounds_max = 0;
    let mut injections = Vec::new();
    for e in es {
        let qm = qmonad.clone();
        let e2 = e.clone();
        let inj = MonadMorphism::new(
            e.target.clone(),
            r.clone(),
            format!("through-{}", e.name),
            Arc::new(move |a: &BaseObj| {
                let refl = qm.reflect_at(a).expect("congruence closure failed");
                let ea = e2.component(a);
                let section = ea.section().expect("surjective component");
                section.then(&refl.proj).expect("composable")
            }),
        );
        injections.push(inj);
    }
    for a in samples {
        let refl = qmonad.reflect_at(a)?;
        rounds_max = rounds_max.max(refl.rounds);
        // r_i ∘ e_i = proj for every i.
        for (e, inj) in es.iter().zip(&injections) {
            let composite = e.component(a).then(&inj.component(a))?;
            report.push(
                "pushout-commutes",
                format!("{} at A={a}", e.name),
                if composite == refl.proj {
                    Outcome::Pass {
                        cases: composite.dom.size(),
                    }
                } else {
                    Outcome::Fail {
                        counterexample: "r_i ∘ e_i ≠ proj".into(),
                    }
                },
            );
        }
    }
    report.merge(monad_law_check(&r, samples, CheckConfig::default()));
    report.merge(morphism_law_check(&projection, samples, CheckConfig::default()));
    for inj in &injections {
        report.merge(morphism_law_check(inj, samples, CheckConfig::default()));
    }
    Ok(ColimitResult {
        monad: r,
        projection,
        injections,
        report,
        rounds_max,
    })
}

/// Colimit of a diagram with a weakly terminal node `j`: every node must have
/// an arrow into `j`. The subcategory condition equalizes every parallel pair
/// of arrows into `j`.
pub fn colimit_weakly_terminal(
    d: &DiagramOfMonads,
    j: usize,
    samples: &[BaseObj],
    budget: usize,
) -> Result<ColimitResult> {
    let n = d.nodes.len();
    let mut arrows_into_j: Vec<Vec<&DiagramArrow>> = vec![Vec::new(); n];
    for arrow in &d.arrows {
        if arrow.dst == j {
            arrows_into_j[arrow.src].push(arrow);
        }
    }
    for i in 0..n {
        if i != j && arrows_into_j[i].is_empty() {
            return Err(Error::NotWeaklyTerminal(i));
        }
    }
    let tj = d.nodes[j].clone();

    // Parallel pairs of connecting morphisms into j, per source node.
    let mut pairs_of_arrows: Vec<(MonadMorphism, MonadMorphism, MonadRep)> = Vec::new();
    for (i, arrows) in arrows_into_j.iter().enumerate() {
        for (x, ax) in arrows.iter().enumerate() {
            for ay in arrows.iter().skip(x + 1) {
                pairs_of_arrows.push((ax.mor.clone(), ay.mor.clone(), d.nodes[i].clone()));
            }
        }
        // An explicit endo-arrow on j is also parallel to the identity.
        if i == j {
            for ax in arrows {
                pairs_of_arrows.push((
                    ax.mor.clone(),
                    MonadMorphism::identity(&tj),
                    d.nodes[j].clone(),
                ));
            }
        }
    }
    let seed_pairs = pairs_of_arrows.clone();
    let tseed = tj.clone();
    let seeds: Arc<SeedFn> = Arc::new(move |a, ta| {
        let mut out = Vec::new();
        for (f, g, si) in &seed_pairs {
            let sta = si.apply_obj(ta);
            let f_ta = f.component(ta);
            let g_ta = g.component(ta);
            for comp in sta.components() {
                for x in sta.atoms(&comp) {
                    let u = tseed.mult_atom(a, &comp, &f_ta.apply(&comp, x));
                    let v = tseed.mult_atom(a, &comp, &g_ta.apply(&comp, x));
                    out.push((comp.clone(), u, v));
                }
            }
        }
        Ok(out)
    });
    let retest_pairs = pairs_of_arrows.clone();
    let retest: Arc<RetestFn> = Arc::new(move |_a, refl| {
        let qobj = &refl.quotient;
        let mut out = Vec::new();
        for (f, g, si) in &retest_pairs {
            let s_q = si.apply_obj(qobj);
            let f_q = f.component(qobj);
            let g_q = g.component(qobj);
            for comp in s_q.components() {
                for y in s_q.atoms(&comp) {
                    let u = refl.structure.apply(&comp, &f_q.apply(&comp, y));
                    let v = refl.structure.apply(&comp, &g_q.apply(&comp, y));
                    if u != v {
                        out.push((comp.clone(), u, v));
                    }
                }
            }
        }
        Ok(out)
    });
    let qmonad = quotient_monad_for(
        &tj,
        format!("colim(via node {j})"),
        seeds,
        retest,
        budget,
    );
    let r = MonadRep(qmonad.clone() as Arc<dyn MonadOps>);
    let projection = projection_morphism(&tj, &qmonad, &r);
    let mut report = LawReport::new(format!("colimit via weakly terminal node {j}"));
    let mut rounds_max = 0;

    // Cocone: u_i = proj ∘ (first arrow i → j); independence of the choice is
    // checked below.
    let mut injections = Vec::new();
    for (i, node) in d.nodes.iter().enumerate() {
        let inj = if i == j {
            projection.clone()
        } else {
            let arrow = arrows_into_j[i][0].mor.clone();
            let proj = projection.clone();
            MonadMorphism::new(
                node.clone(),
                r.clone(),
                format!("cocone-{i}"),
                Arc::new(move |a: &BaseObj| {
                    arrow
                        .component(a)
                        .then(&proj.component(a))
                        .expect("composable")
                }),
            )
        };
        injections.push(inj);
    }
    for a in samples {
        let refl = qmonad.reflect_at(a)?;
        rounds_max = rounds_max.max(refl.rounds);
        for (i, arrows) in arrows_into_j.iter().enumerate() {
            for arrow in arrows.iter().skip(1) {
                let via = arrow.mor.component(a).then(&refl.proj)?;
                let chosen = injections[i].component(a);
                report.push(
                    "cocone-independent-of-arrow",
                    format!("node {i} at A={a}"),
                    if via == chosen {
                        Outcome::Pass {
                            cases: via.dom.size(),
                        }
                    } else {
                        Outcome::Fail {
                            counterexample: format!("two arrows {i} → {j} give different cocones"),
                        }
                    },
                );
            }
        }
    }
    report.merge(monad_law_check(&r, samples, CheckConfig::default()));
    report.merge(morphism_law_check(&projection, samples, CheckConfig::default()));
    Ok(ColimitResult {
        monad: r,
        projection,
        injections,
        report,
        rounds_max,
    })
}

/// Candidate free object for the universal-property check: the reflected
/// carrier at one generator object.
pub struct FreeObjectCandidate {
    pub ambient: MonadRep,
    pub at: BaseObj,
    pub carrier: BaseObj,
    /// `A → carrier` (unit of the adjunction being certified).
    pub unit_arrow: BaseMor,
    /// `T(carrier) → carrier`.
    pub structure: BaseMor,
}

/// Exhaustively verifies existence and uniqueness of mediating homomorphisms:
/// for every algebra `(B, β)` with `|B| ≤ bound` satisfying `condition` and
/// every `f : A → B`, exactly one homomorphism `h : carrier → B` with
/// `h ∘ unit_arrow = f` exists.
pub fn check_colimit_universal(
    cand: &FreeObjectCandidate,
    condition: &dyn Fn(&BaseObj, &BaseMor) -> bool,
    bound: usize,
) -> LawReport {
    let mut report = LawReport::new(format!("universal property at A={}", cand.at));
    let t = &cand.ambient;
    for size in 0..=bound {
        let b = crate::base::canonical_finset(size);
        let tb = t.apply_obj(&b);
        let mut algebras = Vec::new();
        for beta in crate::base::all_morphisms(&tb, &b) {
            let (_, _, violation) = check_em_algebra(t, &b, &beta);
            if violation.is_none() && condition(&b, &beta) {
                algebras.push(beta);
            }
        }
        let mut cases = 0;
        let mut failure = None;
        for beta in &algebras {
            for f in crate::base::all_morphisms(&cand.at, &b) {
                cases += 1;
                let mut mediating = 0;
                for h in crate::base::all_morphisms(&cand.carrier, &b) {
                    if cand.unit_arrow.then(&h).unwrap() != f {
                        continue;
                    }
                    // Homomorphism: h ∘ structure = β ∘ T(h).
                    let th = t.map_mor(&h);
                    let lhs = cand.structure.then(&h).unwrap();
                    let rhs = th.then(beta).unwrap();
                    if lhs == rhs {
                        mediating += 1;
                    }
                }
                if mediating != 1 {
                    failure = Some(format!(
                        "found {mediating} mediating homomorphisms into |B|={size} for some f"
                    ));
                }
            }
        }
        report.push(
            "mediating-hom-exists-uniquely",
            format!("|B|={size} ({} algebras)", algebras.len()),
            match failure {
                None => Outcome::Pass { cases },
                Some(c) => Outcome::Fail { counterexample: c },
            },
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::{builtin_monad, exception_morphism, BuiltinKind};

    fn named(names: &[&str]) -> BaseObj {
        BaseObj::finset(names.iter().map(|n| Atom::sym(*n)))
    }

    fn exc(names: &[&str]) -> MonadRep {
        builtin_monad(BuiltinKind::Exception(named(names)), Variant::FinSet).unwrap()
    }

    fn samples() -> Vec<BaseObj> {
        (0..=2).map(crate::base::canonical_finset).collect()
    }

    /// p, q : Exception({e}) → Exception({f1,f2}) sending e to f1 resp. f2.
    fn merge_pair() -> (MonadMorphism, MonadMorphism) {
        let s = exc(&["e"]);
        let t = exc(&["f1", "f2"]);
        let e = named(&["e"]);
        let f = named(&["f1", "f2"]);
        let to_f1 = BaseMor::from_fn(&e, &f, |_, _| Atom::sym("f1")).unwrap();
        let to_f2 = BaseMor::from_fn(&e, &f, |_, _| Atom::sym("f2")).unwrap();
        (
            exception_morphism(&s, &t, to_f1),
            exception_morphism(&s, &t, to_f2),
        )
    }

    #[test]
    fn coequalizer_of_equal_pair_is_identity() {
        let s = exc(&["e"]);
        let t = exc(&["f1", "f2"]);
        let e = named(&["e"]);
        let f = named(&["f1", "f2"]);
        let u = BaseMor::from_fn(&e, &f, |_, _| Atom::sym("f1")).unwrap();
        let p = exception_morphism(&s, &t, u.clone());
        let q = exception_morphism(&s, &t, u);
        let result = coequalize_monads(&p, &q, &samples(), 32).unwrap();
        assert!(result.report.is_clean(), "{}", result.report.render_text());
        for a in samples() {
            assert_eq!(result.monad.apply_obj(&a).size(), t.apply_obj(&a).size());
            assert!(result.projection.component(&a).is_bijective());
        }
    }

    #[test]
    fn coequalizer_merges_exceptions() {
        let (p, q) = merge_pair();
        let result = coequalize_monads(&p, &q, &samples(), 32).unwrap();
        assert!(result.report.is_clean(), "{}", result.report.render_text());
        for a in samples() {
            // One exception left: |R A| = |A| + 1.
            assert_eq!(result.monad.apply_obj(&a).size(), a.size() + 1);
        }
    }

    #[test]
    fn cointersection_of_single_quotient_is_codomain() {
        let t = exc(&["e1", "e2"]);
        let s = exc(&["e"]);
        let e2 = named(&["e1", "e2"]);
        let e1 = named(&["e"]);
        let collapse = BaseMor::from_fn(&e2, &e1, |_, _| Atom::sym("e")).unwrap();
        let e = exception_morphism(&t, &s, collapse);
        let result = cointersection(&[e], &samples(), 32).unwrap();
        assert!(result.report.is_clean(), "{}", result.report.render_text());
        for a in samples() {
            assert_eq!(result.monad.apply_obj(&a).size(), s.apply_obj(&a).size());
        }
    }

    #[test]
    fn cointersection_joins_partitions() {
        // Quotients of Exception({e1,e2,e3}) merging {e1,e2} resp. {e2,e3};
        // the join merges everything.
        let t = exc(&["e1", "e2", "e3"]);
        let s12 = exc(&["z12", "e3"]);
        let s23 = exc(&["e1", "z23"]);
        let e3 = named(&["e1", "e2", "e3"]);
        let m12 = BaseMor::from_fn(&e3, &named(&["z12", "e3"]), |_, x| {
            if *x == Atom::sym("e3") {
                Atom::sym("e3")
            } else {
                Atom::sym("z12")
            }
        })
        .unwrap();
        let m23 = BaseMor::from_fn(&e3, &named(&["e1", "z23"]), |_, x| {
            if *x == Atom::sym("e1") {
                Atom::sym("e1")
            } else {
                Atom::sym("z23")
            }
        })
        .unwrap();
        let e12 = exception_morphism(&t, &s12, m12);
        let e23 = exception_morphism(&t, &s23, m23);
        let result = cointersection(&[e12, e23], &samples(), 32).unwrap();
        assert!(result.report.is_clean(), "{}", result.report.render_text());
        for a in samples() {
            assert_eq!(result.monad.apply_obj(&a).size(), a.size() + 1);
        }
    }

    #[test]
    fn weakly_terminal_single_node_identity() {
        let t = exc(&["e1"]);
        let d = DiagramOfMonads {
            nodes: vec![t.clone()],
            arrows: vec![DiagramArrow {
                src: 0,
                dst: 0,
                mor: MonadMorphism::identity(&t),
            }],
        };
        let result = colimit_weakly_terminal(&d, 0, &samples(), 32).unwrap();
        assert!(result.report.is_clean(), "{}", result.report.render_text());
        for a in samples() {
            assert_eq!(result.monad.apply_obj(&a).size(), t.apply_obj(&a).size());
        }
    }

    #[test]
    fn weakly_terminal_matches_coequalizer_atomwise() {
        let (p, q) = merge_pair();
        let d = DiagramOfMonads {
            nodes: vec![p.source.clone(), p.target.clone()],
            arrows: vec![
                DiagramArrow {
                    src: 0,
                    dst: 1,
                    mor: p.clone(),
                },
                DiagramArrow {
                    src: 0,
                    dst: 1,
                    mor: q.clone(),
                },
            ],
        };
        let colim = colimit_weakly_terminal(&d, 1, &samples(), 32).unwrap();
        let coeq = coequalize_monads(&p, &q, &samples(), 32).unwrap();
        for a in samples() {
            assert!(colim
                .monad
                .apply_obj(&a)
                .same_atoms(&coeq.monad.apply_obj(&a)));
        }
    }

    #[test]
    fn universal_property_of_merged_exception() {
        let (p, q) = merge_pair();
        let a = named(&["a"]);
        let result = coequalize_monads(&p, &q, &[a.clone()], 32).unwrap();
        let r_a = result.monad.apply_obj(&a);
        let unit_arrow = result.monad.unit(&a);
        let structure = {
            let t = &p.target;
            let t_ra = t.apply_obj(&r_a);
            let proj = result.projection.component(&a);
            BaseMor::from_fn(&t_ra, &r_a, |comp, z| {
                proj.apply(comp, &t.mult_atom(&a, comp, z))
            })
            .unwrap()
        };
        let cand = FreeObjectCandidate {
            ambient: p.target.clone(),
            at: a.clone(),
            carrier: r_a.clone(),
            unit_arrow: unit_arrow.clone(),
            structure: structure.clone(),
        };
        let (pc, qc) = (p.clone(), q.clone());
        let condition = move |b: &BaseObj, beta: &BaseMor| {
            let sb = pc.source.apply_obj(b);
            let p_b = pc.component(b);
            let q_b = qc.component(b);
            sb.components().iter().all(|comp| {
                sb.atoms(comp).iter().all(|y| {
                    beta.apply(comp, &p_b.apply(comp, y))
                        == beta.apply(comp, &q_b.apply(comp, y))
                })
            })
        };
        let report = check_colimit_universal(&cand, &condition, 2);
        assert!(report.is_clean(), "{}", report.render_text());

        // Negative control: an extra junk atom breaks uniqueness.
        let mut atoms: Vec<Atom> = r_a.atoms(&Component::Single).iter().cloned().collect();
        atoms.push(Atom::sym("junk"));
        let bloated = BaseObj::finset(atoms);
        let t = &p.target;
        let t_bloated = t.apply_obj(&bloated);
        let proj = result.projection.component(&a);
        let bloated_structure = BaseMor::from_fn(&t_bloated, &bloated, |comp, z| match z {
            Atom::Inj(0, inner) => (**inner).clone(),
            Atom::Inj(1, _) => proj.apply(comp, &Atom::inj(1, Atom::sym("f1"))),
            _ => unreachable!(),
        })
        .unwrap();
        let bloated_unit =
            BaseMor::from_fn(&a, &bloated, |comp, x| unit_arrow.apply(comp, x)).unwrap();
        let bad = FreeObjectCandidate {
            ambient: p.target.clone(),
            at: a,
            carrier: bloated,
            unit_arrow: bloated_unit,
            structure: bloated_structure,
        };
        let report = check_colimit_universal(&bad, &condition, 2);
        assert!(!report.is_clean());
    }

    #[test]
    fn closure_is_least_congruence() {
        // All partitions of T{a} = {a, f1, f2} that contain the seed pair,
        // are algebra congruences, and satisfy the condition must be coarser
        // than the computed one.
        let (p, q) = merge_pair();
        let a = named(&["a"]);
        let t = p.target.clone();
        let ta = t.apply_obj(&a);
        let atoms: Vec<Atom> = ta.atoms(&Component::Single).iter().cloned().collect();
        let result = coequalize_monads(&p, &q, &[a.clone()], 32).unwrap();
        let our_proj = {
            let refl_obj = result.monad.apply_obj(&a);
            BaseMor::from_fn(&ta, &refl_obj, |comp, x| {
                result.projection.component(&a).apply(comp, x)
            })
            .unwrap()
        };

        fn partitions(n: usize) -> Vec<Vec<usize>> {
            // Block index per element.
            let mut out = vec![vec![]];
            for i in 0..n {
                let mut next = Vec::new();
                for p in &out {
                    let max = p.iter().copied().max().map_or(0, |m| m + 1);
                    for b in 0..=max {
                        let mut q = p.clone();
                        q.push(b);
                        next.push(q);
                    }
                    let _ = i;
                }
                out = next;
            }
            out
        }

        let tta = t.apply_obj(&ta);
        let mut qualifying = 0;
        for part in partitions(atoms.len()) {
            let block = |x: &Atom| part[atoms.iter().position(|a| a == x).unwrap()];
            // Seed pair merged?
            if block(&Atom::inj(1, Atom::sym("f1"))) != block(&Atom::inj(1, Atom::sym("f2"))) {
                continue;
            }
            // Algebra congruence?
            let mut congruent = true;
            let zs: Vec<Atom> = tta.atoms(&Component::Single).iter().cloned().collect();
            for u in &zs {
                for v in &zs {
                    let tu = t.map_atom(&our_dummy_proj(&ta, &atoms, &part), &Component::Single, u);
                    let tv = t.map_atom(&our_dummy_proj(&ta, &atoms, &part), &Component::Single, v);
                    if tu == tv {
                        let mu = t.mult_atom(&a, &Component::Single, u);
                        let mv = t.mult_atom(&a, &Component::Single, v);
                        if block(&mu) != block(&mv) {
                            congruent = false;
                        }
                    }
                }
            }
            if !congruent {
                continue;
            }
            qualifying += 1;
            // Our partition must refine it.
            for x in &atoms {
                for y in &atoms {
                    if our_proj.apply1(x) == our_proj.apply1(y) {
                        assert_eq!(block(x), block(y), "computed congruence is not least");
                    }
                }
            }
        }
        assert!(qualifying >= 1);

        fn our_dummy_proj(ta: &BaseObj, atoms: &[Atom], part: &[usize]) -> BaseMor {
            // Representative = least atom of the block.
            let rep = |x: &Atom| {
                let b = part[atoms.iter().position(|a| a == x).unwrap()];
                atoms
                    .iter()
                    .filter(|a| part[atoms.iter().position(|b2| b2 == *a).unwrap()] == b)
                    .min()
                    .unwrap()
                    .clone()
            };
            let q = BaseObj::finset(atoms.iter().map(&rep).collect::<std::collections::BTreeSet<_>>());
            BaseMor::from_fn(ta, &q, |_, x| rep(x)).unwrap()
        }
    }

    #[test]
    fn rounds_stay_within_carrier_bound() {
        let (p, q) = merge_pair();
        let result = coequalize_monads(&p, &q, &samples(), 32).unwrap();
        for a in samples() {
            let bound = p.target.apply_obj(&a).size();
            assert!(result.rounds_max <= bound + 2);
        }
    }
}
