//! The Boolean ring of idempotents, its finite Stone space, Pierce
//! stalks and sections, the global-sections isomorphism, the regular
//! ideal lattice, and von Neumann regularity.
//!
//! Everything here is the finite-spectrum case: the Boolean ring is
//! required to be enumerated exhaustively, so the Stone space is a finite
//! discrete set of atoms and all the topology collapses to finite set
//! maps. Stalks are materialized as `e(-1)V` with vacuum `e` rather than
//! as quotient cosets.

use crate::basering::{Payload, RingDescriptor, RingElement};
use crate::linalg::SpanTracker;
use crate::report::GridReport;
use crate::structure::{
    component_by_idempotent_mapped, enumerate_all_states, find_idempotents, principal_ideal,
    ComponentMap, IdealData, IdempotentSet, StructureError,
};
use crate::vertexcore::{Instance, LabelId, State};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PierceError {
    #[error("idempotent enumeration was not exhaustive")]
    NotExhaustive,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// The idempotents of `V` as a Boolean ring under
/// `e (+) f := e + f - 2ef` and `e ^ f := ef`.
pub struct BooleanRingFinite<'a> {
    inst: &'a Instance,
    pub elements: Vec<State>,
    pub axioms: GridReport,
}

impl<'a> BooleanRingFinite<'a> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn mul(&self, e: &State, f: &State) -> State {
        self.inst
            .product(e, -1, f)
            .expect("idempotents are weight zero; products stay in the window")
    }

    pub fn xor(&self, e: &State, f: &State) -> State {
        // e + f - 2ef
        let ef = self.mul(e, f);
        e.add(f).sub(&ef.scale_int(&BigInt::from(2)))
    }

    pub fn or(&self, e: &State, f: &State) -> State {
        let ef = self.mul(e, f);
        e.add(f).sub(&ef)
    }

    pub fn complement(&self, e: &State) -> State {
        self.inst.vacuum.sub(e)
    }
}

/// Verified Boolean ring structure on an exhaustive idempotent set.
pub fn boolean_ring<'a>(
    inst: &'a Instance,
    idems: &IdempotentSet,
) -> Result<BooleanRingFinite<'a>, PierceError> {
    if !idems.exhaustive {
        return Err(PierceError::NotExhaustive);
    }
    let b = BooleanRingFinite { inst, elements: idems.elements.clone(), axioms: GridReport::new("") };
    let set: BTreeSet<State> = b.elements.iter().cloned().collect();
    let mut rep = GridReport::new("boolean-ring-axioms");
    let els = b.elements.clone();
    for e in &els {
        // e (+) e = 0, e ^ e = e, e (+) (1 - e) = 1
        rep.record_bool(Ok(b.xor(e, e).is_zero()), || "e (+) e != 0".to_string());
        rep.record_bool(Ok(&b.mul(e, e) == e), || "e ^ e != e".to_string());
        rep.record_bool(Ok(b.xor(e, &b.complement(e)) == inst.vacuum), || {
            "e (+) e' != 1".to_string()
        });
        for f in &els {
            // closure and commutativity
            rep.record_bool(Ok(set.contains(&b.xor(e, f))), || "xor not closed".to_string());
            rep.record_bool(Ok(set.contains(&b.mul(e, f))), || "mul not closed".to_string());
            rep.record_bool(Ok(b.xor(e, f) == b.xor(f, e)), || "xor not commutative".to_string());
            rep.record_bool(Ok(b.mul(e, f) == b.mul(f, e)), || "mul not commutative".to_string());
            for g in &els {
                rep.record_bool(
                    Ok(b.xor(&b.xor(e, f), g) == b.xor(e, &b.xor(f, g))),
                    || "xor not associative".to_string(),
                );
                rep.record_bool(
                    Ok(b.mul(&b.mul(e, f), g) == b.mul(e, &b.mul(f, g))),
                    || "mul not associative".to_string(),
                );
                rep.record_bool(
                    Ok(b.mul(e, &b.xor(f, g)) == b.xor(&b.mul(e, f), &b.mul(e, g))),
                    || "distributivity fails".to_string(),
                );
            }
        }
    }
    Ok(BooleanRingFinite { axioms: rep, ..b })
}

/// A point of the finite Stone space: a maximal ideal of the Boolean
/// ring, represented by its complementary atom.
#[derive(Clone, Debug)]
pub struct StonePointFinite {
    pub atom: State,
    /// The maximal ideal `M = { e in B : e ^ atom = 0 }`.
    pub ideal: Vec<State>,
}

/// The atoms of the Boolean ring, with the finite partition property
/// verified: pairwise orthogonal, summing to the vacuum.
pub fn stone_space(b: &BooleanRingFinite<'_>) -> (Vec<StonePointFinite>, GridReport) {
    let mut atoms: Vec<State> = Vec::new();
    'cand: for e in &b.elements {
        if e.is_zero() {
            continue;
        }
        for f in &b.elements {
            let meet = b.mul(e, f);
            if !(meet.is_zero() || &meet == e) {
                continue 'cand;
            }
        }
        atoms.push(e.clone());
    }
    let mut rep = GridReport::new("partition-property");
    for (i, a) in atoms.iter().enumerate() {
        for (j, c) in atoms.iter().enumerate() {
            if i < j {
                rep.record_bool(Ok(b.mul(a, c).is_zero()), || {
                    "atoms are not orthogonal".to_string()
                });
            }
        }
    }
    let mut total = State::zero();
    for a in &atoms {
        total = total.add(a);
    }
    rep.record_bool(Ok(total == b.inst.vacuum), || "atoms do not sum to 1".to_string());
    let points = atoms
        .into_iter()
        .map(|atom| {
            let ideal = b
                .elements
                .iter()
                .filter(|e| b.mul(e, &atom).is_zero())
                .cloned()
                .collect();
            StonePointFinite { atom, ideal }
        })
        .collect();
    (points, rep)
}

/// The regular ideal `Mbar = (1 - e_M)(-1)V` attached to a Stone point,
/// together with two-sidedness evidence (closure of the generating set
/// was already checked by `principal_ideal`).
pub fn regular_ideal_mbar(
    inst: &Instance,
    point: &StonePointFinite,
    finite_limit: u64,
) -> IdealData {
    let complement = inst.vacuum.sub(&point.atom);
    principal_ideal(inst, &complement, finite_limit)
}

/// One Pierce stalk: the component instance plus the projection data.
pub struct Stalk {
    pub atom: State,
    pub instance: Instance,
    map: ComponentMap,
}

impl Stalk {
    /// `pi_M(s) = e_M(-1)s`, expressed in stalk coordinates.
    pub fn project(&self, parent: &Instance, s: &State) -> State {
        let es = parent
            .product(&self.atom, -1, s)
            .expect("projection by a weight-zero idempotent stays available");
        match &self.map {
            ComponentMap::Subset(orig_to_stalk) => {
                let mut out = State::zero();
                for (id, c) in &es.coeffs {
                    out.insert_add(orig_to_stalk[id], c);
                }
                out
            }
            ComponentMap::CommSplit => {
                let mut out = State::zero();
                if let Some(c) = es.coeffs.get(&0) {
                    out.insert_add(0, &split_project(&self.instance.base, c));
                }
                out
            }
        }
    }

    /// Section lift: embeds a stalk state back into the parent.
    pub fn lift(&self, parent: &Instance, s: &State) -> State {
        match &self.map {
            ComponentMap::Subset(orig_to_stalk) => {
                let stalk_to_orig: BTreeMap<LabelId, LabelId> =
                    orig_to_stalk.iter().map(|(o, n)| (*n, *o)).collect();
                let mut out = State::zero();
                for (id, c) in &s.coeffs {
                    out.insert_add(stalk_to_orig[id], c);
                }
                out
            }
            ComponentMap::CommSplit => {
                let atom_c = self.atom.coeffs.values().next().unwrap();
                let mut out = State::zero();
                if let Some(k) = s.coeffs.get(&0) {
                    out.insert_add(0, &split_lift(&parent.base, atom_c, k));
                }
                out
            }
        }
    }
}

/// Coefficient transport for a rank-one split: `x -> x mod ord(e)`.
/// Sound because an idempotent is congruent to 1 modulo the order of the
/// component it generates.
fn split_project(stalk_base: &RingDescriptor, x: &RingElement) -> RingElement {
    match (&x.payload, stalk_base) {
        (Payload::Residue(r), _) => stalk_base.from_bigint(&BigInt::from(*r)),
        (Payload::Int(k), _) => stalk_base.from_bigint(k),
        (Payload::Tuple(t), RingDescriptor::Product(fs)) => {
            // nonzero components line up with the stalk product factors
            let mut parts = Vec::new();
            let mut fi = 0;
            for comp in t {
                if comp.is_zero() {
                    continue;
                }
                parts.push(split_project(&fs[fi], comp));
                fi += 1;
            }
            RingElement { descriptor: stalk_base.clone(), payload: Payload::Tuple(parts) }
        }
        (Payload::Tuple(t), single) => {
            // single surviving component
            let comp = t.iter().find(|c| !c.is_zero());
            match comp {
                Some(c) => split_project(single, c),
                None => single.zero(),
            }
        }
        _ => unreachable!("unsupported split payload"),
    }
}

/// Inverse transport: `k -> k * e` in the parent base.
fn split_lift(parent_base: &RingDescriptor, e: &RingElement, k: &RingElement) -> RingElement {
    match (&k.payload, parent_base) {
        (Payload::Residue(r), _) => e.scale_int(&BigInt::from(*r)),
        (Payload::Int(x), _) => e.scale_int(x),
        (Payload::Tuple(kt), RingDescriptor::Product(fs)) => {
            let et = match &e.payload {
                Payload::Tuple(t) => t,
                _ => unreachable!(),
            };
            let mut out = Vec::with_capacity(fs.len());
            let mut ki = 0;
            for (f, ec) in fs.iter().zip(et) {
                if ec.is_zero() {
                    out.push(f.zero());
                } else {
                    out.push(split_lift(f, ec, &kt[ki]));
                    ki += 1;
                }
            }
            RingElement { descriptor: parent_base.clone(), payload: Payload::Tuple(out) }
        }
        _ => unreachable!("unsupported lift payload"),
    }
}

pub struct PierceBundleFinite {
    pub points: Vec<StonePointFinite>,
    pub stalks: Vec<Stalk>,
    pub partition: GridReport,
}

/// Builds the Pierce bundle over the finite Stone space: one stalk
/// `e_M(-1)V` per atom.
pub fn build_pierce_bundle(
    inst: &Instance,
    b: &BooleanRingFinite<'_>,
) -> Result<PierceBundleFinite, PierceError> {
    let (points, partition) = stone_space(b);
    let mut stalks = Vec::with_capacity(points.len());
    for p in &points {
        let (instance, map) = component_by_idempotent_mapped(inst, &p.atom)?;
        stalks.push(Stalk { atom: p.atom.clone(), instance, map });
    }
    Ok(PierceBundleFinite { points, stalks, partition })
}

/// Every stalk has only the trivial idempotents.
pub fn check_stalk_indecomposable(bundle: &PierceBundleFinite) -> Result<GridReport, PierceError> {
    let mut rep = GridReport::new("stalks-indecomposable");
    for stalk in &bundle.stalks {
        let idems = find_idempotents(&stalk.instance, &[])?;
        if !idems.exhaustive {
            return Err(PierceError::NotExhaustive);
        }
        let trivial: BTreeSet<State> =
            [State::zero(), stalk.instance.vacuum.clone()].into_iter().collect();
        let found: BTreeSet<State> = idems.elements.into_iter().collect();
        rep.record_bool(Ok(found == trivial), || {
            format!("stalk at {} has nontrivial idempotents", bundle_atom_name(stalk))
        });
    }
    Ok(rep)
}

fn bundle_atom_name(stalk: &Stalk) -> String {
    stalk
        .atom
        .coeffs
        .iter()
        .map(|(id, c)| format!("{c}*#{id}"))
        .collect::<Vec<_>>()
        .join("+")
}

#[derive(Clone, Debug)]
pub struct SectionsReport {
    pub injective: GridReport,
    pub surjective: GridReport,
    pub multiplicative: GridReport,
    pub dimension_count: GridReport,
}

impl SectionsReport {
    pub fn ok(&self) -> bool {
        self.injective.ok()
            && self.surjective.ok()
            && self.multiplicative.ok()
            && self.dimension_count.ok()
    }
}

/// The global-sections isomorphism `xi : V -> Gamma(X, R)`, `v -> sigma_v`:
/// injectivity (the intersection of the `Mbar` is zero), surjectivity
/// (every stalk-basis section has an explicit preimage), the morphism
/// property `sigma_{u(n)v} = sigma_u (n) sigma_v`, and the
/// dimension/cardinality bookkeeping `dim V = sum dim stalks`.
pub fn check_global_sections_iso(
    inst: &Instance,
    bundle: &PierceBundleFinite,
    finite_limit: u64,
) -> SectionsReport {
    // Injectivity.
    let mut injective = GridReport::new("sections-injective");
    if let Some(all) = enumerate_all_states(inst, finite_limit) {
        for s in &all {
            if s.is_zero() {
                continue;
            }
            let killed = bundle
                .stalks
                .iter()
                .all(|st| st.project(inst, s).is_zero());
            injective.record_bool(Ok(!killed), || {
                format!("nonzero {} lies in every Mbar", inst.render_state(s))
            });
        }
    } else {
        // Per-weight kernel of the stacked projections, via unit-pivot
        // rank of the images.
        for (&w, ids) in &inst.by_weight {
            if ids.is_empty() {
                continue;
            }
            let mut tracker = SpanTracker::new(ids.len());
            let mut rank = 0usize;
            // Build the matrix of combined projections: for injectivity
            // on a free module it suffices that the map separating v into
            // its components has full column rank; equivalently the sum
            // of the stalk embeddings spans the weight space. Use
            // e_M(-1) images: v = sum_M e_M(-1) v by the partition
            // property, so check that identity holds per basis label.
            for &id in ids {
                let v = inst.basis_state(id);
                let mut recomposed = State::zero();
                for st in &bundle.stalks {
                    let proj = inst
                        .product(&st.atom, -1, &v)
                        .expect("weight-zero projection available");
                    recomposed.add_assign(&proj);
                }
                injective.record_bool(Ok(recomposed == v), || {
                    format!(
                        "partition of unity fails on {}",
                        inst.labels[id as usize].name
                    )
                });
                let coords: Vec<RingElement> = ids
                    .iter()
                    .map(|i| v.coeffs.get(i).cloned().unwrap_or_else(|| inst.base.zero()))
                    .collect();
                if tracker.insert(&coords) {
                    rank += 1;
                }
            }
            injective.record_bool(Ok(rank == ids.len()), || {
                format!("weight {w} basis degenerate")
            });
        }
    }

    // Surjectivity: stalk-basis sections come from explicit lifts.
    let mut surjective = GridReport::new("sections-surjective");
    for (si, st) in bundle.stalks.iter().enumerate() {
        for id in st.instance.all_labels() {
            let target = st.instance.basis_state(id);
            let lifted = st.lift(inst, &target);
            // the lift projects to the target on this stalk and to zero
            // on every other stalk
            let back = st.project(inst, &lifted);
            surjective.record_bool(Ok(back == target), || {
                format!(
                    "lift of stalk {si} label {} does not project back",
                    st.instance.labels[id as usize].name
                )
            });
            for (sj, other) in bundle.stalks.iter().enumerate() {
                if si == sj {
                    continue;
                }
                let elsewhere = other.project(inst, &lifted);
                surjective.record_bool(Ok(elsewhere.is_zero()), || {
                    format!("lift of stalk {si} leaks into stalk {sj}")
                });
            }
        }
    }

    // Morphism property on the available grid.
    let mut multiplicative = GridReport::new("sections-multiplicative");
    for u in inst.all_labels() {
        let us = inst.basis_state(u);
        for v in inst.all_labels() {
            let vs = inst.basis_state(v);
            let e = inst.pair(u, v);
            for n in e.lo..e.n0 {
                for st in &bundle.stalks {
                    let res = (|| -> crate::vertexcore::Avail<State> {
                        let uv = inst.product(&us, n, &vs)?;
                        let lhs = st.project(inst, &uv);
                        let pu = st.project(inst, &us);
                        let pv = st.project(inst, &vs);
                        let rhs = st.instance.product(&pu, n, &pv)?;
                        Ok(lhs.sub(&rhs))
                    })();
                    multiplicative.record_residual(res, |z| {
                        format!(
                            "sigma_{{u({n})v}} != sigma_u({n})sigma_v at a stalk: {}",
                            st.instance.render_state(z)
                        )
                    });
                }
            }
        }
    }

    // Cardinality / dimension count.
    let mut dimension_count = GridReport::new("sections-count");
    if let Some(card) = inst.base.cardinality() {
        let v_count = (card as u128).pow(inst.labels.len() as u32);
        let mut stalk_count: u128 = 1;
        let mut same_base = true;
        for st in &bundle.stalks {
            match st.instance.base.cardinality() {
                Some(c) => stalk_count *= (c as u128).pow(st.instance.labels.len() as u32),
                None => same_base = false,
            }
        }
        if same_base {
            dimension_count.record_bool(Ok(v_count == stalk_count), || {
                format!("|V| = {v_count} but the stalks multiply to {stalk_count}")
            });
        }
    } else {
        for (&w, ids) in &inst.by_weight {
            let total: usize = bundle
                .stalks
                .iter()
                .map(|st| {
                    st.instance
                        .by_weight
                        .get(&w)
                        .map(|v| v.len())
                        .unwrap_or(0)
                })
                .sum();
            dimension_count.record_bool(Ok(total == ids.len()), || {
                format!("weight {w}: dim V = {} but stalks sum to {total}", ids.len())
            });
        }
    }

    SectionsReport { injective, surjective, multiplicative, dimension_count }
}

#[derive(Clone, Debug)]
pub struct LatticeReport {
    /// One ideal per subset of the Stone space.
    pub regular_ideal_count: usize,
    pub round_trips: GridReport,
    pub exact_sequences: GridReport,
}

impl LatticeReport {
    pub fn ok(&self) -> bool {
        self.round_trips.ok() && self.exact_sequences.ok()
    }
}

/// The lattice of regular ideals of a finite instance: subsets `U` of the
/// Stone space give `J[U] = e_U(-1)V`, the round trips `U[J[U]] = U` and
/// `J[U[J]] = J` hold, and each closed subset yields a short exact
/// sequence `0 -> J[Y'] -> Gamma_X -> Gamma_Y -> 0` (verified by
/// counting).
pub fn regular_ideal_lattice(
    inst: &Instance,
    bundle: &PierceBundleFinite,
    finite_limit: u64,
) -> Result<LatticeReport, PierceError> {
    let Some(all_states) = enumerate_all_states(inst, finite_limit) else {
        return Err(PierceError::PreconditionFailed(
            "regular ideal lattice needs a small finite instance".to_string(),
        ));
    };
    let atoms: Vec<&State> = bundle.points.iter().map(|p| &p.atom).collect();
    let npoints = atoms.len();
    let mut round_trips = GridReport::new("lattice-round-trips");
    let mut seen: BTreeSet<Vec<State>> = BTreeSet::new();
    let mut exact_sequences = GridReport::new("short-exact-sequences");

    for mask in 0u32..(1 << npoints) {
        let e_u = {
            let mut acc = State::zero();
            for (i, a) in atoms.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc = acc.add(a);
                }
            }
            acc
        };
        // J[U] as a set: the image of e_U(-1).
        let ideal: BTreeSet<State> = all_states
            .iter()
            .map(|s| inst.product(&e_u, -1, s).expect("weight-zero projection"))
            .collect();
        seen.insert(ideal.iter().cloned().collect());

        // U[J[U]] = U: the support of the ideal is exactly the masked
        // atom set.
        let mut support_mask = 0u32;
        for s in &ideal {
            for (i, st) in bundle.stalks.iter().enumerate() {
                if !st.project(inst, s).is_zero() {
                    support_mask |= 1 << i;
                }
            }
        }
        round_trips.record_bool(Ok(support_mask == mask), || {
            format!("U[J[U]] = {support_mask:b} but U = {mask:b}")
        });

        // J[U[J]] = J: regenerate from the support.
        let regenerated: BTreeSet<State> = all_states
            .iter()
            .map(|s| {
                let mut acc = State::zero();
                for (i, a) in atoms.iter().enumerate() {
                    if support_mask & (1 << i) != 0 {
                        acc = acc.add(&inst.product(a, -1, s).unwrap());
                    }
                }
                acc
            })
            .collect();
        round_trips.record_bool(Ok(regenerated == ideal), || "J[U[J]] != J".to_string());

        // Short exact sequence for the closed set Y = complement(U):
        // |J[U]| * |Gamma_Y| = |V| and restriction to Y is surjective.
        let y_mask = !mask & ((1 << npoints) - 1);
        let mut gamma_y: u128 = 1;
        for (i, st) in bundle.stalks.iter().enumerate() {
            if y_mask & (1 << i) != 0 {
                let c = st.instance.base.cardinality().unwrap_or(0) as u128;
                gamma_y *= c.pow(st.instance.labels.len() as u32);
            }
        }
        let total = all_states.len() as u128;
        exact_sequences.record_bool(Ok(ideal.len() as u128 * gamma_y == total), || {
            format!(
                "|J[U']| * |Gamma_Y| = {} * {} != |V| = {}",
                ideal.len(),
                gamma_y,
                total
            )
        });
    }

    Ok(LatticeReport {
        regular_ideal_count: seen.len(),
        round_trips,
        exact_sequences,
    })
}

#[derive(Clone, Debug)]
pub struct VnrReport {
    pub vnr: bool,
    /// A state generating a principal ideal that is not of the form
    /// `e(-1)V`, when one exists.
    pub witness: Option<State>,
    /// True when the verdict came from exhausting every state.
    pub exhaustive: bool,
}

/// Is every principal 2-sided ideal generated by an idempotent? Finite
/// instances get an exhaustive verdict; larger ones are refused.
pub fn is_vnr(
    inst: &Instance,
    idems: &IdempotentSet,
    finite_limit: u64,
) -> Result<VnrReport, PierceError> {
    if !idems.exhaustive {
        return Err(PierceError::NotExhaustive);
    }
    let Some(all_states) = enumerate_all_states(inst, finite_limit) else {
        return Err(PierceError::PreconditionFailed(
            "exhaustive von Neumann regularity needs a small finite instance".to_string(),
        ));
    };
    // The candidate ideals e(-1)V.
    let idempotent_ideals: Vec<BTreeSet<State>> = idems
        .elements
        .iter()
        .map(|e| {
            all_states
                .iter()
                .map(|s| inst.product(e, -1, s).expect("weight-zero projection"))
                .collect()
        })
        .collect();
    for v in &all_states {
        let ideal = match principal_ideal(inst, v, finite_limit) {
            IdealData::FiniteSet(set) => set.into_iter().collect::<BTreeSet<State>>(),
            IdealData::PerWeight(_) => unreachable!("finite path guaranteed above"),
        };
        if !idempotent_ideals.iter().any(|cand| cand == &ideal) {
            return Ok(VnrReport { vnr: false, witness: Some(v.clone()), exhaustive: true });
        }
    }
    Ok(VnrReport { vnr: true, witness: None, exhaustive: true })
}

/// Is a finite stalk simple: does every nonzero state generate the whole
/// stalk as a 2-sided ideal?
pub fn is_simple_finite(inst: &Instance, finite_limit: u64) -> Result<bool, PierceError> {
    let Some(all_states) = enumerate_all_states(inst, finite_limit) else {
        return Err(PierceError::PreconditionFailed(
            "simplicity check needs a small finite instance".to_string(),
        ));
    };
    let whole: BTreeSet<State> = all_states.iter().cloned().collect();
    for v in &all_states {
        if v.is_zero() {
            continue;
        }
        let ideal = match principal_ideal(inst, v, finite_limit) {
            IdealData::FiniteSet(set) => set.into_iter().collect::<BTreeSet<State>>(),
            IdealData::PerWeight(_) => unreachable!(),
        };
        if ideal != whole {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct VnrStalksReport {
    pub vnr: bool,
    pub all_stalks_simple: bool,
    pub stalk_simplicity: Vec<bool>,
    /// The biconditional: von Neumann regular iff every stalk is simple.
    pub equivalent: bool,
}

/// The finite-scale biconditional: `V` is von Neumann regular exactly
/// when every Pierce stalk is simple.
pub fn check_vnr_simple_stalks(
    inst: &Instance,
    idems: &IdempotentSet,
    bundle: &PierceBundleFinite,
    finite_limit: u64,
) -> Result<VnrStalksReport, PierceError> {
    let vnr = is_vnr(inst, idems, finite_limit)?;
    let mut stalk_simplicity = Vec::with_capacity(bundle.stalks.len());
    for st in &bundle.stalks {
        stalk_simplicity.push(is_simple_finite(&st.instance, finite_limit)?);
    }
    let all_simple = stalk_simplicity.iter().all(|x| *x);
    Ok(VnrStalksReport {
        vnr: vnr.vnr,
        all_stalks_simple: all_simple,
        stalk_simplicity,
        equivalent: vnr.vnr == all_simple,
    })
}

/// The center of a von Neumann regular vertex ring is a commutative von
/// Neumann regular ring. Scope: instances whose nonnegative modes vanish
/// (so the center is the whole ring viewed commutatively).
pub fn check_center_vnr(
    inst: &Instance,
    idems: &IdempotentSet,
    finite_limit: u64,
) -> Result<VnrReport, PierceError> {
    let vnr = is_vnr(inst, idems, finite_limit)?;
    if !vnr.vnr {
        return Err(PierceError::PreconditionFailed(
            "instance is not von Neumann regular".to_string(),
        ));
    }
    if crate::hsderiv::recover_hs_comm(inst).is_err() {
        return Err(PierceError::PreconditionFailed(
            "center-as-instance is only materialized for commutative instances".to_string(),
        ));
    }
    // For a commutative instance the center is the whole ring.
    is_vnr(inst, idems, finite_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsderiv::commutative_ring_instance;
    use crate::structure::direct_sum;
    use crate::vertexcore::checks::{check_jacobi, check_vacuum_theorem, GridConfig};
    use crate::virasoro::{build, VirasoroParams};

    fn comm(n: u64) -> Instance {
        commutative_ring_instance(&RingDescriptor::modn(n))
    }

    fn bundle_of(inst: &Instance) -> (IdempotentSet, PierceBundleFinite) {
        let idems = find_idempotents(inst, &[]).unwrap();
        let b = boolean_ring(inst, &idems).unwrap();
        assert!(b.axioms.ok(), "{}", b.axioms.summary());
        let bundle = build_pierce_bundle(inst, &b).unwrap();
        assert!(bundle.partition.ok());
        (idems, bundle)
    }

    #[test]
    fn boolean_ring_mod30() {
        let inst = comm(30);
        let idems = find_idempotents(&inst, &[]).unwrap();
        let b = boolean_ring(&inst, &idems).unwrap();
        assert_eq!(b.len(), 8);
        assert!(b.axioms.ok(), "{}", b.axioms.summary());
        // e (+) (1-e) = 1 spot check on e = 6
        let base = RingDescriptor::modn(30);
        let six = inst.basis_state(0).scale(&base.from_i64(6));
        assert_eq!(b.xor(&six, &b.complement(&six)), inst.vacuum);
    }

    #[test]
    fn stone_space_sizes() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        assert_eq!(bundle.points.len(), 3);
        let inst = comm(7);
        let (_, bundle) = bundle_of(&inst);
        assert_eq!(bundle.points.len(), 1);
        let prod = commutative_ring_instance(&RingDescriptor::product(vec![
            RingDescriptor::modn(4),
            RingDescriptor::modn(3),
        ]));
        let (_, bundle) = bundle_of(&prod);
        assert_eq!(bundle.points.len(), 2);
    }

    #[test]
    fn stalks_of_mod60() {
        let inst = comm(60);
        let (_, bundle) = bundle_of(&inst);
        let mut bases: Vec<String> =
            bundle.stalks.iter().map(|s| s.instance.base.to_string()).collect();
        bases.sort();
        assert_eq!(bases, vec!["zmod:3", "zmod:4", "zmod:5"]);
        // each stalk is itself a vertex ring
        for st in &bundle.stalks {
            assert!(check_vacuum_theorem(&st.instance).ok());
            let cfg = GridConfig::default_for(&st.instance);
            assert!(check_jacobi(&st.instance, &cfg).ok());
        }
    }

    #[test]
    fn stalks_of_mod30_are_fields() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        let mut bases: Vec<String> =
            bundle.stalks.iter().map(|s| s.instance.base.to_string()).collect();
        bases.sort();
        assert_eq!(bases, vec!["zmod:2", "zmod:3", "zmod:5"]);
    }

    #[test]
    fn stalk_indecomposability() {
        let inst = comm(60);
        let (_, bundle) = bundle_of(&inst);
        let rep = check_stalk_indecomposable(&bundle).unwrap();
        assert!(rep.ok(), "{}", rep.summary());
        // negative control: Z/6 itself is decomposable
        let six = comm(6);
        let idems = find_idempotents(&six, &[]).unwrap();
        assert_eq!(idems.elements.len(), 4);
    }

    #[test]
    fn mbar_of_mod30() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        for p in &bundle.points {
            let ideal = regular_ideal_mbar(&inst, p, 4096);
            match ideal {
                IdealData::FiniteSet(set) => {
                    // |Mbar| * |stalk| = |V|
                    let stalk = bundle
                        .stalks
                        .iter()
                        .find(|s| s.atom == p.atom)
                        .unwrap();
                    let sc = stalk.instance.base.cardinality().unwrap();
                    assert_eq!(set.len() as u64 * sc, 30);
                    // explicit 2-sidedness: closed under all left modes
                    // and the canonical derivations
                    let as_set: BTreeSet<State> = set.iter().cloned().collect();
                    let hs = inst.canonical_hs();
                    for x in &set {
                        for a in inst.all_labels() {
                            let ab = inst.basis_state(a);
                            let hi = inst.n0_states(&ab, x);
                            for n in -2..hi {
                                let t = inst.product(&ab, n, x).unwrap();
                                assert!(as_set.contains(&t));
                            }
                        }
                        for mm in 1..=hs.cutoff {
                            let t = hs.apply(mm, x).unwrap();
                            assert!(as_set.contains(&t));
                        }
                    }
                }
                _ => panic!("expected finite ideal"),
            }
        }
    }

    #[test]
    fn global_sections_mod30() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        let rep = check_global_sections_iso(&inst, &bundle, 4096);
        assert!(rep.injective.ok(), "{}", rep.injective.summary());
        assert!(rep.surjective.ok(), "{}", rep.surjective.summary());
        assert!(rep.multiplicative.ok(), "{}", rep.multiplicative.summary());
        assert!(rep.dimension_count.ok(), "{}", rep.dimension_count.summary());
    }

    #[test]
    fn global_sections_dsum_with_virasoro() {
        let m = build(&VirasoroParams {
            base: RingDescriptor::modn(3),
            cprime: BigInt::from(1),
            lift: None,
            max_weight: 6,
        });
        let c = comm(3);
        let d = direct_sum(&c, &m.instance).unwrap();
        let (_, bundle) = bundle_of(&d);
        assert_eq!(bundle.points.len(), 2);
        let rep = check_global_sections_iso(&d, &bundle, 4096);
        assert!(rep.ok(), "inj {} surj {} mult {} count {}",
            rep.injective.summary(), rep.surjective.summary(),
            rep.multiplicative.summary(), rep.dimension_count.summary());
        assert!(rep.multiplicative.passed > 0);
    }

    #[test]
    fn lattice_mod30() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        let rep = regular_ideal_lattice(&inst, &bundle, 4096).unwrap();
        assert_eq!(rep.regular_ideal_count, 8);
        assert!(rep.ok(), "{} / {}", rep.round_trips.summary(), rep.exact_sequences.summary());
    }

    #[test]
    fn lattice_mod60_has_nonregular_ideals() {
        let inst = comm(60);
        let (_, bundle) = bundle_of(&inst);
        let rep = regular_ideal_lattice(&inst, &bundle, 8192).unwrap();
        assert_eq!(rep.regular_ideal_count, 8);
        assert!(rep.ok());
        // (2) is an ideal that no idempotent generates
        let base = RingDescriptor::modn(60);
        let two = inst.basis_state(0).scale(&base.from_i64(2));
        let ideal = match principal_ideal(&inst, &two, 8192) {
            IdealData::FiniteSet(set) => set.into_iter().collect::<BTreeSet<State>>(),
            _ => unreachable!(),
        };
        assert_eq!(ideal.len(), 30);
        let idems = find_idempotents(&inst, &[]).unwrap();
        for e in &idems.elements {
            let im: BTreeSet<State> = enumerate_all_states(&inst, 8192)
                .unwrap()
                .iter()
                .map(|s| inst.product(e, -1, s).unwrap())
                .collect();
            assert_ne!(im, ideal, "(2) matched the image of an idempotent");
        }
    }

    #[test]
    fn vnr_verdicts() {
        let inst = comm(30);
        let (idems, _) = bundle_of(&inst);
        let rep = is_vnr(&inst, &idems, 4096).unwrap();
        assert!(rep.vnr && rep.exhaustive);

        let inst = comm(60);
        let (idems, _) = bundle_of(&inst);
        let rep = is_vnr(&inst, &idems, 8192).unwrap();
        assert!(!rep.vnr);
        // ascending enumeration makes 2 the first witness
        let base = RingDescriptor::modn(60);
        let two = inst.basis_state(0).scale(&base.from_i64(2));
        assert_eq!(rep.witness, Some(two));

        // fields are always von Neumann regular
        let inst = comm(7);
        let (idems, _) = bundle_of(&inst);
        assert!(is_vnr(&inst, &idems, 4096).unwrap().vnr);
    }

    #[test]
    fn vnr_iff_simple_stalks() {
        let inst = comm(30);
        let (idems, bundle) = bundle_of(&inst);
        let rep = check_vnr_simple_stalks(&inst, &idems, &bundle, 4096).unwrap();
        assert!(rep.vnr && rep.all_stalks_simple && rep.equivalent);

        let inst = comm(60);
        let (idems, bundle) = bundle_of(&inst);
        let rep = check_vnr_simple_stalks(&inst, &idems, &bundle, 8192).unwrap();
        assert!(!rep.vnr && !rep.all_stalks_simple && rep.equivalent);
        // the failing stalk is Z/4
        for (st, simple) in bundle.stalks.iter().zip(&rep.stalk_simplicity) {
            if st.instance.base == RingDescriptor::modn(4) {
                assert!(!simple);
            } else {
                assert!(simple);
            }
        }
    }

    #[test]
    fn sum_of_fields_is_vnr() {
        // F2 (+) F3 as the product ring viewed as one vertex ring
        let d = commutative_ring_instance(&RingDescriptor::product(vec![
            RingDescriptor::modn(2),
            RingDescriptor::modn(3),
        ]));
        let (idems, bundle) = bundle_of(&d);
        let rep = check_vnr_simple_stalks(&d, &idems, &bundle, 4096).unwrap();
        assert!(rep.vnr && rep.all_stalks_simple && rep.equivalent);
        // F2 (+) F5 has a von Neumann regular center
        let d = commutative_ring_instance(&RingDescriptor::product(vec![
            RingDescriptor::modn(2),
            RingDescriptor::modn(5),
        ]));
        let (idems, _) = bundle_of(&d);
        let center = check_center_vnr(&d, &idems, 4096).unwrap();
        assert!(center.vnr);
    }

    #[test]
    fn center_vnr_rejects_nonregular() {
        let inst = comm(60);
        let (idems, _) = bundle_of(&inst);
        assert!(matches!(
            check_center_vnr(&inst, &idems, 8192),
            Err(PierceError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn mbar_intersection_trivial() {
        let inst = comm(30);
        let (_, bundle) = bundle_of(&inst);
        // intersection of all Mbar is zero: every nonzero state survives
        // in some stalk (this is the injectivity input)
        for s in enumerate_all_states(&inst, 4096).unwrap() {
            if s.is_zero() {
                continue;
            }
            assert!(bundle.stalks.iter().any(|st| !st.project(&inst, &s).is_zero()));
        }
    }
}
