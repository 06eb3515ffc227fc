//! Truncated vertex rings over an exact base ring.
//!
//! An [`Instance`] is a weight-graded basis together with a table of
//! n-th products between basis states. Products are total only inside
//! the truncation window; a mode whose value would escape the window is
//! *escaped*, never silently zero. Checker grids (see [`checks`]) treat
//! escaped evaluations as skipped, so an identity is only ever asserted
//! when every intermediate term provably stays inside the truncation.

pub mod checks;

use crate::basering::{RingDescriptor, RingElement};
use crate::hsderiv::HsFamily;
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub type LabelId = u32;

/// A mode evaluation left the truncation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("truncation escape")]
pub struct TruncationEscape;

/// Result of a product or checker evaluation: exact value, or escaped.
pub type Avail<T> = Result<T, TruncationEscape>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub name: String,
    pub weight: i64,
}

/// Finitely supported coordinate vector over an instance basis.
/// No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct State {
    pub coeffs: BTreeMap<LabelId, RingElement>,
}

impl State {
    pub fn zero() -> Self {
        State { coeffs: BTreeMap::new() }
    }

    pub fn basis(id: LabelId, base: &RingDescriptor) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(id, base.one());
        State { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn insert_add(&mut self, id: LabelId, c: &RingElement) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&id) {
            Some(existing) => {
                *existing = existing.add(c).expect("mixed base rings in one state");
                if existing.is_zero() {
                    self.coeffs.remove(&id);
                }
            }
            None => {
                self.coeffs.insert(id, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (id, c) in &other.coeffs {
            out.insert_add(*id, c);
        }
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (id, c) in &other.coeffs {
            self.insert_add(*id, c);
        }
    }

    pub fn neg(&self) -> Self {
        State { coeffs: self.coeffs.iter().map(|(id, c)| (*id, c.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RingElement) -> Self {
        let mut out = State::zero();
        for (id, x) in &self.coeffs {
            out.insert_add(*id, &x.mul(c).expect("mixed base rings in one state"));
        }
        out
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        let mut out = State::zero();
        for (id, x) in &self.coeffs {
            out.insert_add(*id, &x.scale_int(k));
        }
        out
    }

    pub fn add_scaled_int(&mut self, other: &Self, k: &BigInt) {
        for (id, c) in &other.coeffs {
            self.insert_add(*id, &c.scale_int(k));
        }
    }
}

/// What `u(n)v` is for modes below the explicit window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Below {
    /// All modes below the window are exactly zero.
    Zero,
    /// Modes below the window would leave the truncation.
    Escaped,
}

/// Mode data for one ordered pair of basis labels.
///
/// `u(n)v = 0` exactly for all `n >= n0`. Modes `n` in `[lo, n0)` are
/// described by `values` (absent means zero) unless listed in `escaped`.
/// Modes below `lo` follow the `below` policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairEntry {
    pub n0: i64,
    pub lo: i64,
    pub below: Below,
    pub values: BTreeMap<i64, State>,
    pub escaped: BTreeSet<i64>,
}

impl PairEntry {
    /// A pair whose products are zero for every mode.
    pub fn all_zero() -> Self {
        PairEntry { n0: 0, lo: 0, below: Below::Zero, values: BTreeMap::new(), escaped: BTreeSet::new() }
    }

    /// A pair about which nothing is certified: every mode is escaped.
    /// The sentinel keeps `u(n)v = 0 for n >= n0` vacuously true on any
    /// mode a checker can reach.
    pub fn opaque() -> Self {
        PairEntry {
            n0: OPAQUE_MODE_BOUND,
            lo: OPAQUE_MODE_BOUND,
            below: Below::Escaped,
            values: BTreeMap::new(),
            escaped: BTreeSet::new(),
        }
    }

    pub fn is_opaque(&self) -> bool {
        self.n0 >= OPAQUE_MODE_BOUND
    }
}

/// Mode bound marking a window as opaque; far outside any reachable grid.
pub const OPAQUE_MODE_BOUND: i64 = i64::MAX / 4;

pub struct Instance {
    pub name: String,
    pub base: RingDescriptor,
    pub min_weight: i64,
    pub max_weight: i64,
    pub graded: bool,
    pub labels: Vec<Label>,
    pub by_weight: BTreeMap<i64, Vec<LabelId>>,
    pub vacuum: State,
    /// Set when the vacuum is a single basis label with coefficient one.
    pub vacuum_label: Option<LabelId>,
    pairs: Vec<Vec<PairEntry>>,
    /// Distinguished generating states, if the builder declared them.
    pub generators: Vec<LabelId>,
    /// For each label, a word `u_1(m_1)...u_k(m_k) 1` over the generators
    /// producing it, innermost application last.
    pub generator_words: BTreeMap<LabelId, Vec<(LabelId, i64)>>,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels.iter().position(|l| l.name == name).map(|i| i as LabelId)
    }

    pub fn weight(&self, id: LabelId) -> i64 {
        self.labels[id as usize].weight
    }

    pub fn graded_dimensions(&self) -> BTreeMap<i64, usize> {
        self.by_weight.iter().map(|(w, ids)| (*w, ids.len())).collect()
    }

    pub fn basis_state(&self, id: LabelId) -> State {
        State::basis(id, &self.base)
    }

    pub fn all_labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        (0..self.labels.len() as LabelId).map(|i| i)
    }

    pub fn labels_up_to_weight(&self, w: i64) -> Vec<LabelId> {
        self.all_labels().filter(|&id| self.weight(id) <= w).collect()
    }

    pub fn pair(&self, u: LabelId, v: LabelId) -> &PairEntry {
        &self.pairs[u as usize][v as usize]
    }

    /// `u(n)v` for basis labels.
    pub fn product_labels(&self, u: LabelId, n: i64, v: LabelId) -> Avail<State> {
        let e = self.pair(u, v);
        if n >= e.n0 {
            return Ok(State::zero());
        }
        if n < e.lo {
            return match e.below {
                Below::Zero => Ok(State::zero()),
                Below::Escaped => Err(TruncationEscape),
            };
        }
        if e.escaped.contains(&n) {
            return Err(TruncationEscape);
        }
        Ok(e.values.get(&n).cloned().unwrap_or_else(State::zero))
    }

    /// Bilinear extension of the product to general states.
    pub fn product(&self, u: &State, n: i64, v: &State) -> Avail<State> {
        let mut out = State::zero();
        for (uid, uc) in &u.coeffs {
            for (vid, vc) in &v.coeffs {
                let term = self.product_labels(*uid, n, *vid)?;
                let c = uc.mul(vc).expect("mixed base rings");
                out.add_assign(&term.scale(&c));
            }
        }
        Ok(out)
    }

    /// Alias for the bilinear product.
    pub fn nth_product(&self, u: &State, n: i64, v: &State) -> Avail<State> {
        self.product(u, n, v)
    }

    /// An exact bound: `u(n)v = 0` for all `n >= n0_states(u, v)`.
    pub fn n0_states(&self, u: &State, v: &State) -> i64 {
        let mut n0 = 0;
        for uid in u.coeffs.keys() {
            for vid in v.coeffs.keys() {
                n0 = n0.max(self.pair(*uid, *vid).n0);
            }
        }
        n0
    }

    /// Splits a state into homogeneous components by weight.
    pub fn homogeneous_components(&self, s: &State) -> BTreeMap<i64, State> {
        let mut out: BTreeMap<i64, State> = BTreeMap::new();
        for (id, c) in &s.coeffs {
            out.entry(self.weight(*id)).or_insert_with(State::zero).insert_add(*id, c);
        }
        out
    }

    /// Weight of a homogeneous state; `None` for zero or mixed states.
    pub fn state_weight(&self, s: &State) -> Option<i64> {
        let mut w = None;
        for id in s.coeffs.keys() {
            let lw = self.weight(*id);
            match w {
                None => w = Some(lw),
                Some(x) if x != lw => return None,
                _ => {}
            }
        }
        w
    }

    /// True when no mode of any pair is escaped: the instance represents a
    /// complete vertex ring, not a truncation of one.
    pub fn fully_exact(&self) -> bool {
        self.pairs.iter().flatten().all(|e| e.below == Below::Zero && e.escaped.is_empty())
    }

    /// The canonical family `D_m(u) = u(-m-1) 1`, with iterativity and
    /// triviality flags computed from the table.
    pub fn canonical_hs(&self) -> HsFamily {
        let cutoff = (self.max_weight - self.min_weight).max(0);
        HsFamily::canonical_of(self, cutoff)
    }

    pub fn render_state(&self, s: &State) -> String {
        if s.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (id, c) in &s.coeffs {
            parts.push(format!("{}*{}", c, self.labels[*id as usize].name));
        }
        parts.join(" + ")
    }

    /// Test fixture: corrupts one structure constant so that negative
    /// controls can observe a failing identity. Not used by any
    /// construction path.
    pub fn corrupt_for_testing(&mut self) {
        'outer: for row in self.pairs.iter_mut() {
            for e in row.iter_mut() {
                if let Some((_, v)) = e.values.iter_mut().next() {
                    let bumped = v.scale_int(&BigInt::from(2));
                    if bumped != *v {
                        *v = bumped;
                        break 'outer;
                    }
                }
            }
        }
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("name", &self.name)
            .field("base", &self.base.to_string())
            .field("dims", &self.graded_dimensions())
            .finish()
    }
}

pub struct InstanceBuilder {
    name: String,
    base: RingDescriptor,
    min_weight: i64,
    max_weight: i64,
    graded: bool,
    labels: Vec<Label>,
    vacuum: Option<State>,
    pairs: BTreeMap<(LabelId, LabelId), PairEntry>,
    generators: Vec<LabelId>,
    generator_words: BTreeMap<LabelId, Vec<(LabelId, i64)>>,
}

impl InstanceBuilder {
    pub fn new(
        name: &str,
        base: RingDescriptor,
        min_weight: i64,
        max_weight: i64,
        graded: bool,
    ) -> Self {
        InstanceBuilder {
            name: name.to_string(),
            base,
            min_weight,
            max_weight,
            graded,
            labels: Vec::new(),
            vacuum: None,
            pairs: BTreeMap::new(),
            generators: Vec::new(),
            generator_words: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> &RingDescriptor {
        &self.base
    }

    pub fn add_label(&mut self, name: &str, weight: i64) -> LabelId {
        let id = self.labels.len() as LabelId;
        self.labels.push(Label { name: name.to_string(), weight });
        id
    }

    pub fn set_vacuum(&mut self, vacuum: State) {
        self.vacuum = Some(vacuum);
    }

    pub fn set_pair(&mut self, u: LabelId, v: LabelId, entry: PairEntry) {
        self.pairs.insert((u, v), entry);
    }

    pub fn set_generators(&mut self, gens: Vec<LabelId>) {
        self.generators = gens;
    }

    pub fn set_generator_word(&mut self, label: LabelId, word: Vec<(LabelId, i64)>) {
        self.generator_words.insert(label, word);
    }

    pub fn finish(self) -> Instance {
        let n = self.labels.len();
        let vacuum = self.vacuum.expect("builder must set a vacuum");
        let mut by_weight: BTreeMap<i64, Vec<LabelId>> = BTreeMap::new();
        for (i, l) in self.labels.iter().enumerate() {
            by_weight.entry(l.weight).or_default().push(i as LabelId);
        }
        let mut pairs: Vec<Vec<PairEntry>> = Vec::with_capacity(n);
        for u in 0..n as LabelId {
            let mut row = Vec::with_capacity(n);
            for v in 0..n as LabelId {
                row.push(
                    self.pairs
                        .get(&(u, v))
                        .cloned()
                        .unwrap_or_else(PairEntry::all_zero),
                );
            }
            pairs.push(row);
        }
        let vacuum_label = if vacuum.coeffs.len() == 1 {
            let (id, c) = vacuum.coeffs.iter().next().unwrap();
            if c.is_one() {
                Some(*id)
            } else {
                None
            }
        } else {
            None
        };
        let inst = Instance {
            name: self.name,
            base: self.base,
            min_weight: self.min_weight,
            max_weight: self.max_weight,
            graded: self.graded,
            labels: self.labels,
            by_weight,
            vacuum,
            vacuum_label,
            pairs,
            generators: self.generators,
            generator_words: self.generator_words,
        };
        // Creation axiom: u(-1)1 = u and u(n)1 = 0 for n >= 0, for every
        // basis label. Builders must produce tables satisfying this.
        for id in inst.all_labels() {
            let u = inst.basis_state(id);
            let created = inst
                .product(&u, -1, &inst.vacuum)
                .expect("u(-1)1 must be available inside the truncation");
            assert_eq!(created, u, "creation axiom violated for label {}", id);
            let n0 = inst.n0_states(&u, &inst.vacuum);
            for n in 0..n0 {
                let x = inst.product(&u, n, &inst.vacuum);
                assert_eq!(
                    x,
                    Ok(State::zero()),
                    "u(n)1 must vanish for n >= 0 (label {}, n {})",
                    id,
                    n
                );
            }
        }
        inst
    }
}

/// Structural comparison of two instances after mapping coefficients of
/// the first through `map_coeff`. Label names, weights, windows and all
/// stored products must agree. Used for base-change coherence and
/// decomposition round-trips.
pub fn compare_structure_constants(
    a: &Instance,
    b: &Instance,
    map_coeff: impl Fn(&RingElement) -> RingElement,
) -> Result<(), String> {
    if a.labels.len() != b.labels.len() {
        return Err(format!("label counts differ: {} vs {}", a.labels.len(), b.labels.len()));
    }
    for (la, lb) in a.labels.iter().zip(&b.labels) {
        if la.name != lb.name || la.weight != lb.weight {
            return Err(format!("label mismatch: {}/{} vs {}/{}", la.name, la.weight, lb.name, lb.weight));
        }
    }
    let map_state = |s: &State| -> State {
        let mut out = State::zero();
        for (id, c) in &s.coeffs {
            out.insert_add(*id, &map_coeff(c));
        }
        out
    };
    for u in a.all_labels() {
        for v in a.all_labels() {
            let ea = a.pair(u, v);
            let eb = b.pair(u, v);
            if ea.n0 != eb.n0 || ea.lo != eb.lo || ea.below != eb.below || ea.escaped != eb.escaped
            {
                return Err(format!("window mismatch on pair ({u}, {v})"));
            }
            for n in ea.lo..ea.n0 {
                if ea.escaped.contains(&n) {
                    continue;
                }
                let va = map_state(&ea.values.get(&n).cloned().unwrap_or_else(State::zero));
                let vb = eb.values.get(&n).cloned().unwrap_or_else(State::zero);
                if va != vb {
                    return Err(format!(
                        "product mismatch ({}, {}, {}): {} vs {}",
                        a.labels[u as usize].name,
                        n,
                        a.labels[v as usize].name,
                        b.render_state(&va),
                        b.render_state(&vb)
                    ));
                }
            }
        }
    }
    Ok(())
}
