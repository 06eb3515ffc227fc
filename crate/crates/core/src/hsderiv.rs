//! Hasse-Schmidt derivations on commutative carriers and truncated
//! modules, and the two-way bridge between commutative rings with an
//! iterative HS derivation and vertex rings whose nonnegative modes all
//! vanish.

use crate::basering::RingDescriptor;
use crate::exactnum::binom_i64;
use crate::report::GridReport;
use crate::vertexcore::{
    Avail, Below, Instance, InstanceBuilder, Label, LabelId, PairEntry, State, TruncationEscape,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HsError {
    #[error("family is not flagged iterative")]
    NotIterative,
    #[error("HS property failed on the carrier: {0}")]
    HsPropertyFailed(String),
    #[error("nonvanishing nonnegative mode: {0}")]
    NonvanishingPositiveMode(String),
}

/// A sequence `(Id, D_1, ..., D_cutoff)` of endomorphisms stored as
/// explicit tables on basis labels. Absent entries are zero; entries in
/// `escaped` could not be computed inside the truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HsFamily {
    pub cutoff: i64,
    maps: Vec<BTreeMap<LabelId, State>>,
    escaped: BTreeSet<(i64, LabelId)>,
    pub iterative: bool,
    pub trivial: bool,
    /// True when `D_m = 0` for every `m > cutoff` is known exactly, so the
    /// family describes the full derivation and not a truncated view.
    pub complete: bool,
}

impl HsFamily {
    /// The trivial derivation `(Id, 0, 0, ...)`.
    pub fn trivial(cutoff: i64) -> Self {
        HsFamily {
            cutoff,
            maps: vec![BTreeMap::new(); (cutoff + 1).max(1) as usize],
            escaped: BTreeSet::new(),
            iterative: true,
            trivial: true,
            complete: true,
        }
    }

    /// The divided-power derivation on a truncated polynomial carrier:
    /// `D_m(x^j) = C(j, m) x^(j-m)`.
    pub fn divided_power(carrier: &CommCarrier, cutoff: i64) -> Self {
        let mut maps = vec![BTreeMap::new(); (cutoff + 1).max(1) as usize];
        for m in 1..=cutoff {
            for (id, label) in carrier.labels.iter().enumerate() {
                let j = label.weight;
                if m > j {
                    continue;
                }
                let target = carrier
                    .label_of_degree(j - m)
                    .expect("lower-degree monomial must exist");
                let c = carrier.base.from_bigint(&binom_i64(j, m));
                let mut s = State::zero();
                s.insert_add(target, &c);
                if !s.is_zero() {
                    maps[m as usize].insert(id as LabelId, s);
                }
            }
        }
        let mut fam = HsFamily {
            cutoff,
            maps,
            escaped: BTreeSet::new(),
            iterative: false,
            trivial: false,
            // D_m kills every monomial of degree < m, and the carrier is
            // truncated at cutoff >= top degree.
            complete: cutoff >= carrier.max_degree(),
        };
        let samples: Vec<State> = (0..carrier.labels.len())
            .map(|i| State::basis(i as LabelId, &carrier.base))
            .collect();
        fam.iterative = check_iterative(&fam, &samples).ok();
        fam
    }

    /// The canonical family `D_m(u) = u(-m-1) 1` of an instance.
    pub fn canonical_of(inst: &Instance, cutoff: i64) -> Self {
        let mut maps = vec![BTreeMap::new(); (cutoff + 1).max(1) as usize];
        let mut escaped = BTreeSet::new();
        for m in 1..=cutoff {
            for id in inst.all_labels() {
                let u = inst.basis_state(id);
                match inst.product(&u, -m - 1, &inst.vacuum) {
                    Ok(s) => {
                        if !s.is_zero() {
                            maps[m as usize].insert(id, s);
                        }
                    }
                    Err(_) => {
                        escaped.insert((m, id));
                    }
                }
            }
        }
        let trivial = escaped.is_empty() && maps.iter().all(|m| m.is_empty());
        // The family is complete when the table knows D_m(u) = 0 exactly
        // for every m beyond the cutoff: that is the below-window policy
        // of each pair (u, vacuum-support label).
        let complete = escaped.is_empty()
            && inst.all_labels().all(|u| {
                inst.vacuum
                    .coeffs
                    .keys()
                    .all(|o| inst.pair(u, *o).below == Below::Zero)
            });
        let mut fam = HsFamily {
            cutoff,
            maps,
            escaped,
            iterative: false,
            trivial,
            complete,
        };
        let samples: Vec<State> =
            inst.all_labels().map(|id| inst.basis_state(id)).collect();
        fam.iterative = check_iterative(&fam, &samples).ok();
        fam
    }

    /// `D_m` on a basis label, `m >= 1`. Use [`HsFamily::apply`] for m = 0.
    pub fn apply_label(&self, m: i64, id: LabelId) -> Avail<State> {
        assert!(m >= 1);
        if self.trivial {
            return Ok(State::zero());
        }
        if m > self.cutoff {
            return if self.complete { Ok(State::zero()) } else { Err(TruncationEscape) };
        }
        if self.escaped.contains(&(m, id)) {
            return Err(TruncationEscape);
        }
        Ok(self.maps[m as usize].get(&id).cloned().unwrap_or_else(State::zero))
    }

    pub fn apply(&self, m: i64, s: &State) -> Avail<State> {
        assert!(m >= 0);
        if m == 0 {
            return Ok(s.clone());
        }
        let mut out = State::zero();
        for (id, c) in &s.coeffs {
            let img = self.apply_label(m, *id)?;
            out.add_assign(&img.scale(c));
        }
        Ok(out)
    }

    /// Largest `m` with `D_m(u)` possibly nonzero for the given label.
    fn top_nonzero(&self, id: LabelId) -> i64 {
        let mut top = 0;
        for m in 1..=self.cutoff {
            if self.maps[m as usize].contains_key(&id) || self.escaped.contains(&(m, id)) {
                top = m;
            }
        }
        top
    }
}

/// A commutative, associative carrier with identity: a free module over
/// the base with a materialized multiplication table. `None` entries are
/// products escaping the degree truncation.
pub struct CommCarrier {
    pub base: RingDescriptor,
    pub labels: Vec<Label>,
    pub one_label: LabelId,
    mul: Vec<Vec<Option<State>>>,
    pub var: Option<String>,
}

impl CommCarrier {
    /// The base ring itself: one basis label of degree zero.
    pub fn unit(base: RingDescriptor) -> Self {
        let one = State::basis(0, &base);
        CommCarrier {
            base,
            labels: vec![Label { name: "1".to_string(), weight: 0 }],
            one_label: 0,
            mul: vec![vec![Some(one)]],
            var: None,
        }
    }

    /// `k[var]` truncated at degree <= bound.
    pub fn poly_truncated(base: RingDescriptor, var: &str, bound: i64) -> Self {
        assert!(bound >= 0);
        let labels: Vec<Label> = (0..=bound)
            .map(|j| Label {
                name: match j {
                    0 => "1".to_string(),
                    1 => var.to_string(),
                    _ => format!("{var}^{j}"),
                },
                weight: j,
            })
            .collect();
        let mut mul = Vec::with_capacity(labels.len());
        for a in 0..=bound {
            let mut row = Vec::with_capacity(labels.len());
            for b in 0..=bound {
                row.push(if a + b <= bound {
                    Some(State::basis((a + b) as LabelId, &base))
                } else {
                    None
                });
            }
            mul.push(row);
        }
        CommCarrier { base, labels, one_label: 0, mul, var: Some(var.to_string()) }
    }

    pub fn max_degree(&self) -> i64 {
        self.labels.iter().map(|l| l.weight).max().unwrap_or(0)
    }

    pub fn label_of_degree(&self, d: i64) -> Option<LabelId> {
        self.labels.iter().position(|l| l.weight == d).map(|i| i as LabelId)
    }

    pub fn one_state(&self) -> State {
        State::basis(self.one_label, &self.base)
    }

    pub fn mul_labels(&self, a: LabelId, b: LabelId) -> Avail<State> {
        self.mul[a as usize][b as usize].clone().ok_or(TruncationEscape)
    }

    pub fn mul(&self, a: &State, b: &State) -> Avail<State> {
        let mut out = State::zero();
        for (ia, ca) in &a.coeffs {
            for (ib, cb) in &b.coeffs {
                let t = self.mul_labels(*ia, *ib)?;
                out.add_assign(&t.scale(&ca.mul(cb).unwrap()));
            }
        }
        Ok(out)
    }

    pub fn basis_states(&self) -> Vec<State> {
        (0..self.labels.len()).map(|i| State::basis(i as LabelId, &self.base)).collect()
    }
}

/// Verifies `D_m(uv) = sum_{i+j=m} D_i(u) D_j(v)` for all `m <= cutoff`
/// over the sample pairs. Escaping terms are skipped, not failed.
pub fn check_hs_property(
    family: &HsFamily,
    product: impl Fn(&State, &State) -> Avail<State>,
    samples: &[(State, State)],
) -> GridReport {
    let mut report = GridReport::new("hs-property");
    for (u, v) in samples {
        for m in 1..=family.cutoff {
            let point = (|| -> Avail<State> {
                let uv = product(u, v)?;
                let lhs = family.apply(m, &uv)?;
                let mut rhs = State::zero();
                for i in 0..=m {
                    let du = family.apply(i, u)?;
                    let dv = family.apply(m - i, v)?;
                    rhs.add_assign(&product(&du, &dv)?);
                }
                Ok(lhs.sub(&rhs))
            })();
            report.record_residual(point, |r| format!("m={m}, residual has {} terms", r.coeffs.len()));
        }
    }
    report
}

/// Verifies `D_i . D_j = C(i+j, i) D_{i+j}` on the samples for
/// `i + j <= cutoff`.
pub fn check_iterative(family: &HsFamily, samples: &[State]) -> GridReport {
    let mut report = GridReport::new("iterative");
    for u in samples {
        for i in 0..=family.cutoff {
            for j in 0..=(family.cutoff - i) {
                let point = (|| -> Avail<State> {
                    let inner = family.apply(j, u)?;
                    let lhs = family.apply(i, &inner)?;
                    let rhs = family.apply(i + j, u)?.scale_int(&binom_i64(i + j, i));
                    Ok(lhs.sub(&rhs))
                })();
                report.record_residual(point, |_| format!("i={i}, j={j}"));
            }
        }
    }
    report
}

/// For iterative families: `sum_{i+j=p} (-1)^j D_i(D_j(u)) = 0` for all
/// `1 <= p <= cutoff`, i.e. the series `sum D_m z^m` and `sum D_m (-z)^m`
/// are mutually inverse.
pub fn check_inverse_series(family: &HsFamily, samples: &[State]) -> Result<GridReport, HsError> {
    if !family.iterative {
        return Err(HsError::NotIterative);
    }
    let mut report = GridReport::new("inverse-series");
    for u in samples {
        for p in 1..=family.cutoff {
            let point = (|| -> Avail<State> {
                let mut acc = State::zero();
                for j in 0..=p {
                    let inner = family.apply(j, u)?;
                    let term = family.apply(p - j, &inner)?;
                    if j % 2 == 0 {
                        acc.add_assign(&term);
                    } else {
                        acc.add_assign(&term.neg());
                    }
                }
                Ok(acc)
            })();
            report.record_residual(point, |_| format!("p={p}"));
        }
    }
    Ok(report)
}

/// Builds the vertex ring of a commutative carrier with an iterative HS
/// derivation: `u(n)v = D_(-n-1)(u) v` for `n < 0` and `u(n)v = 0` for
/// `n >= 0`. The carrier identity becomes the vacuum.
pub fn vertex_from_hs_comm(
    name: &str,
    carrier: &CommCarrier,
    family: &HsFamily,
) -> Result<Instance, HsError> {
    if !family.iterative {
        return Err(HsError::NotIterative);
    }
    let sample_pairs: Vec<(State, State)> = {
        let basis = carrier.basis_states();
        let mut pairs = Vec::new();
        for u in &basis {
            for v in &basis {
                pairs.push((u.clone(), v.clone()));
            }
        }
        pairs
    };
    let hs_report = check_hs_property(family, |a, b| carrier.mul(a, b), &sample_pairs);
    if !hs_report.ok() {
        return Err(HsError::HsPropertyFailed(hs_report.summary()));
    }

    let max_degree = carrier.max_degree();
    let mut b = InstanceBuilder::new(
        name,
        carrier.base.clone(),
        0,
        max_degree,
        // Degree is a pseudo-weight here, not a vertex-ring grading.
        false,
    );
    for l in &carrier.labels {
        b.add_label(&l.name, l.weight);
    }
    b.set_vacuum(State::basis(carrier.one_label, &carrier.base));

    let nlabels = carrier.labels.len() as LabelId;
    for u in 0..nlabels {
        for v in 0..nlabels {
            let top = if family.complete {
                family.top_nonzero(u)
            } else {
                family.cutoff
            };
            let lo = -(top + 2);
            let below = if family.complete { Below::Zero } else { Below::Escaped };
            let mut values = BTreeMap::new();
            let mut escaped = BTreeSet::new();
            for n in lo..0 {
                let m = -n - 1;
                let val = (|| -> Avail<State> {
                    let du = if m == 0 {
                        State::basis(u, &carrier.base)
                    } else {
                        family.apply_label(m, u)?
                    };
                    carrier.mul(&du, &State::basis(v, &carrier.base))
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
            b.set_pair(u, v, PairEntry { n0: 0, lo, below, values, escaped });
        }
    }

    // Generator words: a monomial carrier is generated by its variable.
    if let Some(_) = &carrier.var {
        if let Some(x) = carrier.label_of_degree(1) {
            b.set_generators(vec![x]);
            for (i, l) in carrier.labels.iter().enumerate() {
                let word = vec![(x, -1i64); l.weight as usize];
                b.set_generator_word(i as LabelId, word);
            }
        }
    }
    Ok(b.finish())
}

/// The converse direction: checks that every nonnegative mode vanishes
/// and returns the `-1`-product carrier with the canonical HS derivation.
pub fn recover_hs_comm(inst: &Instance) -> Result<(CommCarrier, HsFamily), HsError> {
    for u in inst.all_labels() {
        for v in inst.all_labels() {
            let n0 = inst.pair(u, v).n0;
            for n in 0..n0 {
                match inst.product_labels(u, n, v) {
                    Ok(s) if s.is_zero() => {}
                    Ok(s) => {
                        return Err(HsError::NonvanishingPositiveMode(format!(
                            "{}({}){}  =  {}",
                            inst.labels[u as usize].name,
                            n,
                            inst.labels[v as usize].name,
                            inst.render_state(&s)
                        )));
                    }
                    Err(_) => {
                        return Err(HsError::NonvanishingPositiveMode(format!(
                            "{}({}){} escapes the truncation, cannot certify vanishing",
                            inst.labels[u as usize].name, n, inst.labels[v as usize].name
                        )));
                    }
                }
            }
        }
    }
    let one_label = inst
        .vacuum_label
        .expect("recover_hs_comm requires a basis vacuum");
    let n = inst.labels.len();
    let mut mul = Vec::with_capacity(n);
    for u in 0..n as LabelId {
        let mut row = Vec::with_capacity(n);
        for v in 0..n as LabelId {
            row.push(inst.product_labels(u, -1, v).ok());
        }
        mul.push(row);
    }
    let carrier = CommCarrier {
        base: inst.base.clone(),
        labels: inst.labels.clone(),
        one_label,
        mul,
        var: None,
    };
    let hs = inst.canonical_hs();
    Ok((carrier, hs))
}

/// The base ring viewed as a vertex ring (trivial HS derivation): all
/// products vanish except `u(-1)v = uv`.
pub fn commutative_ring_instance(base: &RingDescriptor) -> Instance {
    let carrier = CommCarrier::unit(base.clone());
    let family = HsFamily::trivial(0);
    vertex_from_hs_comm(&format!("comm:{base}"), &carrier, &family)
        .expect("trivial HS derivation always satisfies the hypotheses")
}

/// `k[x]` truncated at the given degree, with the divided-power HS
/// derivation.
pub fn divided_power_instance(
    base: &RingDescriptor,
    var: &str,
    degree: i64,
    cutoff: i64,
) -> Instance {
    let carrier = CommCarrier::poly_truncated(base.clone(), var, degree);
    let family = HsFamily::divided_power(&carrier, cutoff.max(degree));
    vertex_from_hs_comm(
        &format!("commhs:poly:{base}:{var}:deg={degree}"),
        &carrier,
        &family,
    )
    .expect("divided powers satisfy the hypotheses")
}
