//! Truncated fields on a graded module, residue products, and the
//! constructive content of the existence theorems: creation, locality
//! preservation under residue products, the delta derivation on fields,
//! translation-covariance closure, the null-field lemma, and the
//! reconstruction of all vertex operators from generating fields.
//!
//! A [`Field`] stores one mode column per basis label with the same
//! window discipline as instance products: a mode is either exactly
//! known (possibly zero) or escaped. Nested residue products shrink the
//! usable window; identities are asserted only where both sides are
//! available.

use crate::exactnum::binom_i64;
use crate::hsderiv::HsFamily;
use crate::report::GridReport;
use crate::vertexcore::checks::GridConfig;
use crate::vertexcore::{Avail, Below, Instance, LabelId, PairEntry, State, TruncationEscape};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldsError {
    #[error("hypothesis not verified: {0}")]
    HypothesisUnverified(String),
}

fn sign(i: i64) -> BigInt {
    if i.rem_euclid(2) == 0 {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}

/// A truncated field `a(z) = sum a(n) z^(-n-1)`: per basis label, the
/// modes applied to that label, with a window and availability flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    /// Upper bound on the operator weight: a mode `a(n)` sends weight
    /// `l` to at most `l + weight - n - 1`. Exact for homogeneous
    /// fields; the maximum of the component weights otherwise.
    pub weight: Option<i64>,
    /// One window per basis label, same encoding as instance pairs.
    pub columns: Vec<PairEntry>,
}

impl Field {
    /// `a(n)` applied to a basis label.
    pub fn apply_label(&self, n: i64, v: LabelId) -> Avail<State> {
        let col = &self.columns[v as usize];
        if n >= col.n0 {
            return Ok(State::zero());
        }
        if n < col.lo {
            return match col.below {
                Below::Zero => Ok(State::zero()),
                Below::Escaped => Err(TruncationEscape),
            };
        }
        if col.escaped.contains(&n) {
            return Err(TruncationEscape);
        }
        Ok(col.values.get(&n).cloned().unwrap_or_else(State::zero))
    }

    /// `a(n)` applied to a general state.
    pub fn apply(&self, n: i64, s: &State) -> Avail<State> {
        let mut out = State::zero();
        for (id, c) in &s.coeffs {
            let img = self.apply_label(n, *id)?;
            out.add_assign(&img.scale(c));
        }
        Ok(out)
    }

    /// True zero bound on a state: `a(n)s = 0` for `n >= n0_state(s)`.
    pub fn n0_state(&self, s: &State) -> i64 {
        s.coeffs
            .keys()
            .map(|id| self.columns[*id as usize].n0)
            .max()
            .unwrap_or(0)
    }

    fn lo_state(&self, s: &State) -> i64 {
        s.coeffs
            .keys()
            .map(|id| self.columns[*id as usize].lo)
            .min()
            .unwrap_or(0)
    }

    /// Mode-by-mode sum of two fields.
    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.columns.len(), other.columns.len());
        let weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                if a.is_opaque() || b.is_opaque() {
                    return PairEntry::opaque();
                }
                let n0 = a.n0.max(b.n0);
                let lo = a.lo.min(b.lo);
                let below = if a.below == Below::Zero && b.below == Below::Zero {
                    Below::Zero
                } else {
                    Below::Escaped
                };
                let mut values = BTreeMap::new();
                let mut escaped = BTreeSet::new();
                for n in lo..n0 {
                    let va = lookup(a, n);
                    let vb = lookup(b, n);
                    match (va, vb) {
                        (Ok(x), Ok(y)) => {
                            let s = x.add(&y);
                            if !s.is_zero() {
                                values.insert(n, s);
                            }
                        }
                        _ => {
                            escaped.insert(n);
                        }
                    }
                }
                PairEntry { n0, lo, below, values, escaped }
            })
            .collect();
        Field { weight, columns }
    }

    pub fn neg(&self) -> Field {
        Field {
            weight: self.weight,
            columns: self
                .columns
                .iter()
                .map(|c| PairEntry {
                    n0: c.n0,
                    lo: c.lo,
                    below: c.below,
                    values: c.values.iter().map(|(n, s)| (*n, s.neg())).collect(),
                    escaped: c.escaped.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.neg())
    }
}

impl Field {
    /// The zero field: every mode of every column is known zero.
    pub fn zero_field(nlabels: usize) -> Field {
        Field { weight: None, columns: vec![PairEntry::all_zero(); nlabels] }
    }

    /// True when every mode is known to be zero.
    pub fn is_zero_field(&self) -> bool {
        self.columns.iter().all(|c| {
            !c.is_opaque()
                && c.below == Below::Zero
                && c.values.is_empty()
                && c.escaped.is_empty()
                && c.lo >= c.n0
        })
    }
}

fn lookup(col: &PairEntry, n: i64) -> Avail<State> {
    if n >= col.n0 {
        return Ok(State::zero());
    }
    if n < col.lo {
        return match col.below {
            Below::Zero => Ok(State::zero()),
            Below::Escaped => Err(TruncationEscape),
        };
    }
    if col.escaped.contains(&n) {
        return Err(TruncationEscape);
    }
    Ok(col.values.get(&n).cloned().unwrap_or_else(State::zero))
}

/// `Y(u, z)` restricted to the truncation.
pub fn field_of_state(inst: &Instance, u: &State) -> Field {
    let nlabels = inst.labels.len();
    let mut columns = Vec::with_capacity(nlabels);
    for v in 0..nlabels as LabelId {
        if u.is_zero() {
            columns.push(PairEntry::all_zero());
            continue;
        }
        let mut n0 = i64::MIN;
        let mut lo = i64::MAX;
        let mut below = Below::Zero;
        for uid in u.coeffs.keys() {
            let e = inst.pair(*uid, v);
            n0 = n0.max(e.n0);
            lo = lo.min(e.lo);
            if e.below == Below::Escaped {
                below = Below::Escaped;
            }
        }
        let mut values = BTreeMap::new();
        let mut escaped = BTreeSet::new();
        for n in lo..n0 {
            match inst.product(u, n, &inst.basis_state(v)) {
                Ok(s) => {
                    if !s.is_zero() {
                        values.insert(n, s);
                    }
                }
                Err(_) => {
                    escaped.insert(n);
                }
            }
        }
        columns.push(PairEntry { n0, lo, below, values, escaped });
    }
    let weight = u.coeffs.keys().map(|id| inst.weight(*id)).max();
    Field { weight, columns }
}

/// The identity field `Y(1, z) = Id`.
pub fn identity_field(inst: &Instance) -> Field {
    field_of_state(inst, &inst.vacuum)
}

/// `delta_z^(i)`: the divided i-th derivative, acting on modes by
/// `a(n) -> (-1)^i C(n,i) a(n-i)`.
pub fn delta(field: &Field, i: i64) -> Field {
    assert!(i >= 0);
    if i == 0 {
        return field.clone();
    }
    let columns = field
        .columns
        .iter()
        .map(|c| {
            if c.is_opaque() {
                return PairEntry::opaque();
            }
            let n0 = c.n0 + i;
            let lo = c.lo + i;
            let mut values = BTreeMap::new();
            let mut escaped = BTreeSet::new();
            for n in lo..n0 {
                match lookup(c, n - i) {
                    Ok(s) => {
                        let scaled = s.scale_int(&(sign(i) * binom_i64(n, i)));
                        if !scaled.is_zero() {
                            values.insert(n, scaled);
                        }
                    }
                    Err(_) => {
                        escaped.insert(n);
                    }
                }
            }
            PairEntry { n0, lo, below: c.below, values, escaped }
        })
        .collect();
    Field { weight: field.weight.map(|w| w + i), columns }
}

/// The m-th residue product `a(z)_m b(z)`, with mode `n` given by
/// `sum_i (-1)^i C(m,i) { a(m-i) b(n+i) - (-1)^m b(m+n-i) a(i) }`.
///
/// Modes whose evaluation would leave the truncation are marked escaped,
/// not zero; the per-column window is cut by weight arithmetic on graded
/// instances and by the exact derivation depth on fully exact ones.
pub fn residue_product(inst: &Instance, a: &Field, m: i64, b: &Field) -> Field {
    if a.is_zero_field() || b.is_zero_field() {
        return Field::zero_field(inst.labels.len());
    }
    let weight = match (a.weight, b.weight) {
        (Some(x), Some(y)) => Some(x + y - m - 1),
        _ => None,
    };
    let nlabels = inst.labels.len();
    let fully_exact = inst.fully_exact();
    let span = inst.max_weight - inst.min_weight;
    let mut columns = Vec::with_capacity(nlabels);
    for v in 0..nlabels as LabelId {
        if a.columns[v as usize].is_opaque() || b.columns[v as usize].is_opaque() {
            columns.push(PairEntry::opaque());
            continue;
        }
        let vb = inst.basis_state(v);
        // True zero bound for the new column.
        let i2_cut = if m >= 0 {
            a.columns[v as usize].n0.min(m + 1)
        } else {
            a.columns[v as usize].n0
        };
        let mut n0 = b.columns[v as usize].n0;
        let mut bound_ok = true;
        for i in 0..i2_cut.max(0) {
            match a.apply_label(i, v) {
                Ok(s) if s.is_zero() => {}
                Ok(s) => n0 = n0.max(b.n0_state(&s) + i - m),
                Err(_) => {
                    bound_ok = false;
                    break;
                }
            }
        }
        if !bound_ok || n0 >= crate::vertexcore::OPAQUE_MODE_BOUND / 2 {
            // Cannot certify a zero bound: the whole column is opaque.
            columns.push(PairEntry::opaque());
            continue;
        }
        let (lo, below) = if fully_exact {
            // Residue products of state fields are state fields, whose
            // derivation depth is bounded by the weight span.
            ((-(span + 2)).min(b.lo_state(&vb) + m.min(0)), Below::Zero)
        } else if let Some(wf) = weight {
            (inst.weight(v) + wf - 1 - inst.max_weight, Below::Escaped)
        } else {
            (n0, Below::Escaped)
        };

        let mut values = BTreeMap::new();
        let mut escaped = BTreeSet::new();
        for n in lo..n0 {
            let val = (|| -> Avail<State> {
                let mut acc = State::zero();
                // series 1: a(m-i) (b(n+i) v)
                let mut i_hi = b.columns[v as usize].n0 - n - 1;
                if m >= 0 {
                    i_hi = i_hi.min(m);
                }
                for i in 0..=i_hi {
                    let bv = b.apply_label(n + i, v)?;
                    if bv.is_zero() {
                        continue;
                    }
                    let term = a.apply(m - i, &bv)?;
                    acc.add_scaled_int(&term, &(sign(i) * binom_i64(m, i)));
                }
                // series 2: -(-1)^m b(m+n-i) (a(i) v)
                let mut i_hi = a.columns[v as usize].n0 - 1;
                if m >= 0 {
                    i_hi = i_hi.min(m);
                }
                for i in 0..=i_hi {
                    let av = a.apply_label(i, v)?;
                    if av.is_zero() {
                        continue;
                    }
                    let term = b.apply(m + n - i, &av)?;
                    acc.add_scaled_int(&term, &(-sign(m + i) * binom_i64(m, i)));
                }
                Ok(acc)
            })();
            match val {
                Ok(s) => {
                    if !s.is_zero() {
                        values.insert(n, s);
                    }
                }
                Err(_) => {
                    escaped.insert(n);
                }
            }
        }
        columns.push(PairEntry { n0, lo, below, values, escaped });
    }
    Field { weight, columns }
}

/// Is the field creative with respect to the vacuum, and which state does
/// it create? Returns the created state when `a(n)1 = 0` holds for all
/// available `n >= 0`.
pub fn created_state(inst: &Instance, a: &Field) -> Result<State, FieldsError> {
    if inst
        .vacuum
        .coeffs
        .keys()
        .any(|id| a.columns[*id as usize].is_opaque())
    {
        return Err(FieldsError::HypothesisUnverified(
            "creativity cannot be certified: opaque vacuum column".to_string(),
        ));
    }
    let hi = a.n0_state(&inst.vacuum);
    for n in 0..hi {
        match a.apply(n, &inst.vacuum) {
            Ok(s) if s.is_zero() => {}
            Ok(s) => {
                return Err(FieldsError::HypothesisUnverified(format!(
                    "field is not creative: mode {n} on the vacuum gives {}",
                    inst.render_state(&s)
                )));
            }
            Err(_) => {
                return Err(FieldsError::HypothesisUnverified(format!(
                    "creativity of mode {n} cannot be certified inside the truncation"
                )));
            }
        }
    }
    a.apply(-1, &inst.vacuum).map_err(|_| {
        FieldsError::HypothesisUnverified("created state escapes the truncation".to_string())
    })
}

/// Residue products create the expected states:
/// `(a_m b)(n) 1 = delta_{n,-1} a(m)(state created by b)`.
pub fn check_residue_creation(
    inst: &Instance,
    a: &Field,
    m: i64,
    b: &Field,
) -> Result<GridReport, FieldsError> {
    let created_b = created_state(inst, b)?;
    created_state(inst, a)?;
    let mut rep = GridReport::new("residue-creation");
    let ab = residue_product(inst, a, m, b);
    if inst
        .vacuum
        .coeffs
        .keys()
        .any(|id| ab.columns[*id as usize].is_opaque())
    {
        let mut rep = GridReport::new("residue-creation");
        rep.skip();
        return Ok(rep);
    }
    let expected_created = a.apply(m, &created_b);
    // Creativity constrains the modes n >= -1 only: the deeper modes on
    // the vacuum carry the canonical derivation of the created state.
    let hi = ab.n0_state(&inst.vacuum);
    for n in -1..hi {
        let res = (|| -> Avail<State> {
            let got = ab.apply(n, &inst.vacuum)?;
            let expected = if n == -1 {
                expected_created.clone()?
            } else {
                State::zero()
            };
            Ok(got.sub(&expected))
        })();
        rep.record_residual(res, |z| {
            format!("(a_{m} b)({n}) 1 off by {}", inst.render_state(z))
        });
    }
    Ok(rep)
}

/// The order-`t` locality sum between two abstract fields, applied to `x`.
pub fn field_locality_residual(
    f: &Field,
    g: &Field,
    r: i64,
    s: i64,
    t: i64,
    x: &State,
) -> Avail<State> {
    assert!(t >= 0);
    let mut acc = State::zero();
    for i in 0..=t {
        let c = sign(i) * binom_i64(t, i);
        let gx = g.apply(s + i, x)?;
        let term1 = f.apply(r + t - i, &gx)?;
        acc.add_scaled_int(&term1, &c);
        let fx = f.apply(r + i, x)?;
        let term2 = g.apply(s + t - i, &fx)?;
        acc.add_scaled_int(&term2, &(-sign(t) * c));
    }
    Ok(acc)
}

/// Ascending scan for the mutual-locality order of two fields.
pub fn field_locality_order(
    inst: &Instance,
    f: &Field,
    g: &Field,
    t_max: i64,
    cfg: &GridConfig,
) -> Option<i64> {
    let labels = cfg.labels(inst);
    'outer: for t in 0..=t_max {
        for r in cfg.modes() {
            for s in cfg.modes() {
                for &xl in &labels {
                    let x = inst.basis_state(xl);
                    match field_locality_residual(f, g, r, s, t, &x) {
                        Ok(res) if res.is_zero() => {}
                        Ok(_) => continue 'outer,
                        Err(_) => {}
                    }
                }
            }
        }
        return Some(t);
    }
    None
}

/// Locality is preserved by residue products: returns the found order of
/// `(a_m b, c)` after confirming the three inputs are pairwise local
/// within `t_max`.
pub fn check_dong_locality(
    inst: &Instance,
    a: &Field,
    b: &Field,
    c: &Field,
    m: i64,
    t_max: i64,
    cfg: &GridConfig,
) -> Result<Option<i64>, FieldsError> {
    for (name, f, g) in [("a~b", a, b), ("a~c", a, c), ("b~c", b, c)] {
        if field_locality_order(inst, f, g, t_max, cfg).is_none() {
            return Err(FieldsError::HypothesisUnverified(format!(
                "pairwise locality {name} not found within t <= {t_max}"
            )));
        }
    }
    let ab = residue_product(inst, a, m, b);
    Ok(field_locality_order(inst, &ab, c, t_max, cfg))
}

/// The divided derivative is an HS derivation of every residue product:
/// `delta^(l)(a_m b) = sum_{i+j=l} (delta^(i) a)_m (delta^(j) b)`,
/// compared mode-by-mode wherever both sides are available.
pub fn check_delta_hs_on_fields(
    inst: &Instance,
    a: &Field,
    b: &Field,
    m: i64,
    l: i64,
) -> GridReport {
    let mut rep = GridReport::new("delta-hs-on-fields");
    let lhs = delta(&residue_product(inst, a, m, b), l);
    let mut rhs: Option<Field> = None;
    for i in 0..=l {
        let term = residue_product(inst, &delta(a, i), m, &delta(b, l - i));
        rhs = Some(match rhs {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    let rhs = rhs.expect("l >= 0 always yields at least one term");
    for v in 0..inst.labels.len() as LabelId {
        let cl = &lhs.columns[v as usize];
        let cr = &rhs.columns[v as usize];
        if cl.is_opaque() || cr.is_opaque() {
            rep.skip();
            continue;
        }
        let lo = cl.lo.max(cr.lo);
        let hi = cl.n0.max(cr.n0);
        for n in lo..hi {
            let res = (|| -> Avail<State> {
                let x = lookup(cl, n)?;
                let y = lookup(cr, n)?;
                Ok(x.sub(&y))
            })();
            rep.record_residual(res, |z| {
                format!(
                    "delta^({l}) of residue product, mode {n} on {}: off by {}",
                    inst.labels[v as usize].name,
                    inst.render_state(z)
                )
            });
        }
    }
    rep
}

/// Per-mode translation covariance of an abstract field against a family:
/// `[D_l, f(n)]w = sum_{i=1}^l (-1)^i C(n,i) f(n-i) D_{l-i} w`.
pub fn field_tc_residual(
    hs: &HsFamily,
    f: &Field,
    l: i64,
    n: i64,
    w: &State,
) -> Avail<State> {
    let fw = f.apply(n, w)?;
    let d_fw = hs.apply(l, &fw)?;
    let dw = hs.apply(l, w)?;
    let f_dw = f.apply(n, &dw)?;
    let lhs = d_fw.sub(&f_dw);
    let mut rhs = State::zero();
    for i in 1..=l {
        let dliw = hs.apply(l - i, w)?;
        let term = f.apply(n - i, &dliw)?;
        rhs.add_scaled_int(&term, &(sign(i) * binom_i64(n, i)));
    }
    Ok(lhs.sub(&rhs))
}

pub fn check_field_tc(
    inst: &Instance,
    hs: &HsFamily,
    f: &Field,
    cfg: &GridConfig,
) -> GridReport {
    let mut rep = GridReport::new("field-tc");
    let labels = cfg.labels(inst);
    for l in 0..=hs.cutoff.min(cfg.mode_max.max(3)) {
        for n in cfg.modes() {
            for &wl in &labels {
                let w = inst.basis_state(wl);
                let res = field_tc_residual(hs, f, l, n, &w);
                rep.record_residual(res, |z| {
                    format!(
                        "field tc (l={l}, n={n}, w={}): off by {}",
                        inst.labels[wl as usize].name,
                        inst.render_state(z)
                    )
                });
            }
        }
    }
    rep
}

/// Residue products of translation-covariant fields stay translation
/// covariant. Both inputs are checked first.
pub fn check_tc_closure(
    inst: &Instance,
    a: &Field,
    b: &Field,
    hs: &HsFamily,
    m: i64,
    cfg: &GridConfig,
) -> Result<GridReport, FieldsError> {
    for (name, f) in [("a", a), ("b", b)] {
        let rep = check_field_tc(inst, hs, f, cfg);
        if !rep.ok() {
            return Err(FieldsError::HypothesisUnverified(format!(
                "input field {name} is not translation covariant: {}",
                rep.summary()
            )));
        }
    }
    let ab = residue_product(inst, a, m, b);
    Ok(check_field_tc(inst, hs, &ab, cfg))
}

/// The null-field lemma: a creative, translation-covariant field that is
/// mutually local with all basis fields and creates `0` vanishes on the
/// whole truncation. Hypotheses are verified first; the conclusion is
/// checked constructively.
pub fn check_null_field_lemma(
    inst: &Instance,
    d: &Field,
    hs: &HsFamily,
    t_max: i64,
    cfg: &GridConfig,
) -> Result<GridReport, FieldsError> {
    let created = created_state(inst, d)?;
    if !created.is_zero() {
        return Err(FieldsError::HypothesisUnverified(format!(
            "field creates {} rather than 0; lemma inapplicable",
            inst.render_state(&created)
        )));
    }
    let tc = check_field_tc(inst, hs, d, cfg);
    if !tc.ok() {
        return Err(FieldsError::HypothesisUnverified(format!(
            "field is not translation covariant: {}",
            tc.summary()
        )));
    }
    for &vl in cfg.labels(inst).iter() {
        let g = field_of_state(inst, &inst.basis_state(vl));
        if field_locality_order(inst, d, &g, t_max, cfg).is_none() {
            return Err(FieldsError::HypothesisUnverified(format!(
                "no locality order against Y({}) within t <= {t_max}",
                inst.labels[vl as usize].name
            )));
        }
    }
    // Conclusion part 1: d(z) 1 = 0 entirely (the D_m recursion pushes
    // creation of 0 down to every mode on the vacuum). Part 2: d
    // annihilates every basis state on all available modes.
    let mut rep = GridReport::new("null-field");
    for v in inst.all_labels() {
        let col = &d.columns[v as usize];
        if col.is_opaque() {
            rep.skip();
            continue;
        }
        for n in col.lo..col.n0 {
            let res = d.apply_label(n, v);
            rep.record_residual(res, |z| {
                format!(
                    "null field has d({n}) {} = {}",
                    inst.labels[v as usize].name,
                    inst.render_state(z)
                )
            });
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    /// Mode agreement between the reconstructed field and the
    /// state-field correspondence, per basis label.
    pub per_label: BTreeMap<LabelId, GridReport>,
    pub overall: GridReport,
}

impl ReconstructionReport {
    pub fn ok(&self) -> bool {
        self.overall.ok()
    }
}

/// Rebuilds every basis vertex operator from the declared generators by
/// nested residue products,
/// `Y(u) = Y(u_1)_{m_1} ( ... (Y(u_k)_{m_k} Id) ... )`,
/// and compares mode-by-mode with `field_of_state`. The generator fields
/// are first verified pairwise local, creative and translation covariant,
/// mirroring the existence theorem's hypotheses.
pub fn reconstruct_from_generators(
    inst: &Instance,
    t_max: i64,
    cfg: &GridConfig,
) -> Result<ReconstructionReport, FieldsError> {
    let hs = inst.canonical_hs();
    let gen_fields: BTreeMap<LabelId, Field> = inst
        .generators
        .iter()
        .map(|&g| (g, field_of_state(inst, &inst.basis_state(g))))
        .collect();
    for (&g, f) in &gen_fields {
        let s = created_state(inst, f)?;
        if s != inst.basis_state(g) {
            return Err(FieldsError::HypothesisUnverified(format!(
                "generator field {} creates {}",
                inst.labels[g as usize].name,
                inst.render_state(&s)
            )));
        }
        let tc = check_field_tc(inst, &hs, f, cfg);
        if !tc.ok() {
            return Err(FieldsError::HypothesisUnverified(format!(
                "generator field {} is not translation covariant: {}",
                inst.labels[g as usize].name,
                tc.summary()
            )));
        }
        for (&g2, f2) in &gen_fields {
            if field_locality_order(inst, f, f2, t_max, cfg).is_none() {
                return Err(FieldsError::HypothesisUnverified(format!(
                    "generator fields {} and {} have no locality order within {t_max}",
                    inst.labels[g as usize].name, inst.labels[g2 as usize].name
                )));
            }
        }
    }

    let id_field = identity_field(inst);
    let mut per_label = BTreeMap::new();
    let mut overall = GridReport::new("reconstruction");
    for id in inst.all_labels() {
        let Some(word) = inst.generator_words.get(&id) else {
            continue;
        };
        let mut built = id_field.clone();
        for &(g, m) in word.iter().rev() {
            built = residue_product(inst, &gen_fields[&g], m, &built);
        }
        let direct = field_of_state(inst, &inst.basis_state(id));
        let mut rep = GridReport::new(&format!(
            "reconstruction of {}",
            inst.labels[id as usize].name
        ));
        for v in inst.all_labels() {
            let cb = &built.columns[v as usize];
            let cd = &direct.columns[v as usize];
            if cb.is_opaque() || cd.is_opaque() {
                rep.skip();
                continue;
            }
            let lo = cb.lo.min(cd.lo);
            let hi = cb.n0.max(cd.n0);
            for n in lo..hi {
                let res = (|| -> Avail<State> {
                    let x = lookup(cb, n)?;
                    let y = lookup(cd, n)?;
                    Ok(x.sub(&y))
                })();
                rep.record_residual(res, |z| {
                    format!(
                        "mode {n} on {} differs by {}",
                        inst.labels[v as usize].name,
                        inst.render_state(z)
                    )
                });
            }
        }
        overall.absorb(&rep);
        per_label.insert(id, rep);
    }
    Ok(ReconstructionReport { per_label, overall })
}

/// `sum_{i+j=p} (-1)^j D_i (u(n) (D_j w)) = (-1)^p C(n,p) u(n-p) w`:
/// the coefficient-wise form of the formal Taylor expansion
/// `Y(u, z+y) = (sum D_m y^m) Y(u, z) (sum (-y)^m D_m)`.
pub fn formal_taylor_residual(
    inst: &Instance,
    hs: &HsFamily,
    u: &State,
    p: i64,
    n: i64,
    w: &State,
) -> Avail<State> {
    let mut lhs = State::zero();
    for j in 0..=p {
        let djw = hs.apply(j, w)?;
        let u_djw = inst.product(u, n, &djw)?;
        let term = hs.apply(p - j, &u_djw)?;
        lhs.add_scaled_int(&term, &sign(j));
    }
    let rhs = inst.product(u, n - p, w)?.scale_int(&(sign(p) * binom_i64(n, p)));
    Ok(lhs.sub(&rhs))
}

pub fn check_formal_taylor(
    inst: &Instance,
    hs: &HsFamily,
    p_max: i64,
    cfg: &GridConfig,
) -> GridReport {
    let mut rep = GridReport::new("formal-taylor");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for p in 0..=p_max.min(hs.cutoff) {
            for n in cfg.modes() {
                for &wl in &labels {
                    let w = inst.basis_state(wl);
                    let res = formal_taylor_residual(inst, hs, &u, p, n, &w);
                    rep.record_residual(res, |z| {
                        format!(
                            "formal taylor (u={}, p={p}, n={n}, w={}): off by {}",
                            inst.labels[ul as usize].name,
                            inst.labels[wl as usize].name,
                            inst.render_state(z)
                        )
                    });
                }
            }
        }
    }
    rep
}

/// If `Y(u,z)` and `Y(v,z)` are mutually local of order `t` then
/// `u(n)v = 0` for all `n >= t`; verified directly from the table.
pub fn check_field_property_from_locality(
    inst: &Instance,
    u: &State,
    v: &State,
    t: i64,
) -> GridReport {
    let mut rep = GridReport::new("field-property-from-locality");
    let hi = inst.n0_states(u, v);
    for n in t..hi.max(t) {
        let res = inst.product(u, n, v);
        rep.record_residual(res, |z| {
            format!("u({n})v = {} though locality order is {t}", inst.render_state(z))
        });
    }
    rep
}
