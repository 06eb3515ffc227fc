//! The battery of identity checkers: Jacobi, commutator, associator,
//! locality, vacuum theorem, mode shift, skew-symmetry, translation
//! covariance, the commuting-vector criterion, generated subrings and
//! weak associativity.
//!
//! Every sum over `i >= 0` is cut at the truncation-axiom witness of the
//! relevant pair, never at an arbitrary constant, so the evaluated finite
//! sums equal the identities' formal infinite sums exactly. A point whose
//! evaluation leaves the truncation is reported skipped, never failed.

use super::{Avail, Instance, LabelId, State};
use crate::exactnum::binom_i64;
use crate::hsderiv::HsFamily;
use crate::linalg::SpanTracker;
use crate::report::GridReport;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

fn sign(i: i64) -> BigInt {
    if i.rem_euclid(2) == 0 {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}

/// Grid bounds for checker sweeps.
#[derive(Clone, Debug)]
pub struct GridConfig {
    /// Include basis labels of weight up to this bound.
    pub max_state_weight: i64,
    /// Inclusive range for each integer mode parameter (r, s, t, n).
    pub mode_min: i64,
    pub mode_max: i64,
}

impl GridConfig {
    pub fn default_for(inst: &Instance) -> Self {
        GridConfig {
            max_state_weight: inst.max_weight.min(6),
            mode_min: -3,
            mode_max: 3,
        }
    }

    pub fn with_modes(mut self, lo: i64, hi: i64) -> Self {
        self.mode_min = lo;
        self.mode_max = hi;
        self
    }

    pub fn with_max_weight(mut self, w: i64) -> Self {
        self.max_state_weight = w;
        self
    }

    pub fn labels(&self, inst: &Instance) -> Vec<LabelId> {
        inst.labels_up_to_weight(self.max_state_weight)
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        self.mode_min..=self.mode_max
    }
}

/// Left side minus right side of the Jacobi identity applied to `w`.
pub fn jacobi_residual(
    inst: &Instance,
    u: &State,
    v: &State,
    w: &State,
    r: i64,
    s: i64,
    t: i64,
) -> Avail<State> {
    let mut lhs = State::zero();
    let mut i_hi = inst.n0_states(u, v) - t - 1;
    if r >= 0 {
        i_hi = i_hi.min(r);
    }
    for i in 0..=i_hi {
        let uv = inst.product(u, t + i, v)?;
        let term = inst.product(&uv, r + s - i, w)?;
        lhs.add_scaled_int(&term, &binom_i64(r, i));
    }

    let mut rhs = State::zero();
    let mut i1 = inst.n0_states(v, w) - s - 1;
    if t >= 0 {
        i1 = i1.min(t);
    }
    for i in 0..=i1 {
        let vw = inst.product(v, s + i, w)?;
        let term = inst.product(u, r + t - i, &vw)?;
        rhs.add_scaled_int(&term, &(sign(i) * binom_i64(t, i)));
    }
    let mut i2 = inst.n0_states(u, w) - r - 1;
    if t >= 0 {
        i2 = i2.min(t);
    }
    for i in 0..=i2 {
        let uw = inst.product(u, r + i, w)?;
        let term = inst.product(v, s + t - i, &uw)?;
        rhs.add_scaled_int(&term, &(-sign(t + i) * binom_i64(t, i)));
    }

    Ok(lhs.sub(&rhs))
}

pub fn check_jacobi(inst: &Instance, cfg: &GridConfig) -> GridReport {
    let mut rep = GridReport::new("jacobi");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for &vl in &labels {
            let v = inst.basis_state(vl);
            for &wl in &labels {
                let w = inst.basis_state(wl);
                let wsum = inst.weight(ul) + inst.weight(vl) + inst.weight(wl);
                for r in cfg.modes() {
                    for s in cfg.modes() {
                        for t in cfg.modes() {
                            // Fast reject: the result weight already
                            // escapes, so every evaluation path does too.
                            if inst.graded && wsum - r - s - t - 2 > inst.max_weight {
                                rep.skip();
                                continue;
                            }
                            let res = jacobi_residual(inst, &u, &v, &w, r, s, t);
                            rep.record_residual(res, |x| {
                                format!(
                                    "jacobi(u={}, v={}, w={}, r={r}, s={s}, t={t}) = {}",
                                    inst.labels[ul as usize].name,
                                    inst.labels[vl as usize].name,
                                    inst.labels[wl as usize].name,
                                    inst.render_state(x)
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    rep
}

/// `[u(r), v(s)]x - sum_i C(r,i) (u(i)v)(r+s-i) x`.
pub fn commutator_residual(
    inst: &Instance,
    u: &State,
    v: &State,
    r: i64,
    s: i64,
    x: &State,
) -> Avail<State> {
    let vx = inst.product(v, s, x)?;
    let uvx = inst.product(u, r, &vx)?;
    let ux = inst.product(u, r, x)?;
    let vux = inst.product(v, s, &ux)?;
    let bracket = uvx.sub(&vux);

    let mut i_hi = inst.n0_states(u, v) - 1;
    if r >= 0 {
        i_hi = i_hi.min(r);
    }
    let mut sum = State::zero();
    for i in 0..=i_hi {
        let uv = inst.product(u, i, v)?;
        let term = inst.product(&uv, r + s - i, x)?;
        sum.add_scaled_int(&term, &binom_i64(r, i));
    }
    Ok(bracket.sub(&sum))
}

pub fn check_commutator(inst: &Instance, cfg: &GridConfig) -> GridReport {
    let mut rep = GridReport::new("commutator");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for &vl in &labels {
            let v = inst.basis_state(vl);
            for &xl in &labels {
                let x = inst.basis_state(xl);
                for r in cfg.modes() {
                    for s in cfg.modes() {
                        let res = commutator_residual(inst, &u, &v, r, s, &x);
                        rep.record_residual(res, |z| {
                            format!(
                                "commutator(u={}, v={}, r={r}, s={s}, x={}) = {}",
                                inst.labels[ul as usize].name,
                                inst.labels[vl as usize].name,
                                inst.labels[xl as usize].name,
                                inst.render_state(z)
                            )
                        });
                    }
                }
            }
        }
    }
    rep
}

/// `(u(t)v)(s)x - sum_i (-1)^i C(t,i) { u(t-i)(v(s+i)x) - (-1)^t v(s+t-i)(u(i)x) }`.
pub fn associator_residual(
    inst: &Instance,
    u: &State,
    v: &State,
    s: i64,
    t: i64,
    x: &State,
) -> Avail<State> {
    let uv = inst.product(u, t, v)?;
    let lhs = inst.product(&uv, s, x)?;

    let mut rhs = State::zero();
    let mut i1 = inst.n0_states(v, x) - s - 1;
    if t >= 0 {
        i1 = i1.min(t);
    }
    for i in 0..=i1 {
        let vx = inst.product(v, s + i, x)?;
        let term = inst.product(u, t - i, &vx)?;
        rhs.add_scaled_int(&term, &(sign(i) * binom_i64(t, i)));
    }
    let mut i2 = inst.n0_states(u, x) - 1;
    if t >= 0 {
        i2 = i2.min(t);
    }
    for i in 0..=i2 {
        let ux = inst.product(u, i, x)?;
        let term = inst.product(v, s + t - i, &ux)?;
        rhs.add_scaled_int(&term, &(-sign(t + i) * binom_i64(t, i)));
    }
    Ok(lhs.sub(&rhs))
}

pub fn check_associator(inst: &Instance, cfg: &GridConfig) -> GridReport {
    let mut rep = GridReport::new("associator");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for &vl in &labels {
            let v = inst.basis_state(vl);
            for &xl in &labels {
                let x = inst.basis_state(xl);
                for s in cfg.modes() {
                    for t in cfg.modes() {
                        let res = associator_residual(inst, &u, &v, s, t, &x);
                        rep.record_residual(res, |z| {
                            format!(
                                "associator(u={}, v={}, s={s}, t={t}, x={}) = {}",
                                inst.labels[ul as usize].name,
                                inst.labels[vl as usize].name,
                                inst.labels[xl as usize].name,
                                inst.render_state(z)
                            )
                        });
                    }
                }
            }
        }
    }
    rep
}

/// The order-`t` locality sum applied to `x`:
/// `sum_{i=0}^t (-1)^i C(t,i) { u(r+t-i)(v(s+i)x) - (-1)^t v(s+t-i)(u(r+i)x) }`.
pub fn locality_residual(
    inst: &Instance,
    u: &State,
    v: &State,
    r: i64,
    s: i64,
    t: i64,
    x: &State,
) -> Avail<State> {
    assert!(t >= 0);
    let mut acc = State::zero();
    for i in 0..=t {
        let c = sign(i) * binom_i64(t, i);
        let vx = inst.product(v, s + i, x)?;
        let term1 = inst.product(u, r + t - i, &vx)?;
        acc.add_scaled_int(&term1, &c);
        let ux = inst.product(u, r + i, x)?;
        let term2 = inst.product(v, s + t - i, &ux)?;
        acc.add_scaled_int(&term2, &(-sign(t) * c));
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct LocalityScan {
    /// Smallest order passing the whole grid, if one was found.
    pub order: Option<i64>,
    /// Per-order grid reports, index = tested order.
    pub reports: Vec<GridReport>,
}

/// Ascending scan for the locality order of `Y(u, z)` and `Y(v, z)`.
/// Returns the first `t <= t_max` whose locality sum annihilates every
/// admissible `(r, s, x)` in the grid; minimality is witnessed by the
/// recorded failure at `t - 1`.
pub fn locality_order(
    inst: &Instance,
    u: &State,
    v: &State,
    t_max: i64,
    cfg: &GridConfig,
) -> LocalityScan {
    let labels = cfg.labels(inst);
    let mut reports = Vec::new();
    for t in 0..=t_max {
        let mut rep = GridReport::new(&format!("locality(t={t})"));
        for r in cfg.modes() {
            for s in cfg.modes() {
                for &xl in &labels {
                    let x = inst.basis_state(xl);
                    let res = locality_residual(inst, u, v, r, s, t, &x);
                    rep.record_residual(res, |z| {
                        format!(
                            "locality t={t} fails at (r={r}, s={s}, x={}): {}",
                            inst.labels[xl as usize].name,
                            inst.render_state(z)
                        )
                    });
                }
            }
        }
        let pass = rep.ok();
        reports.push(rep);
        if pass {
            return LocalityScan { order: Some(t), reports };
        }
    }
    LocalityScan { order: None, reports }
}

/// Vacuum theorem `1(n) = delta_{n,-1} Id` on every basis label, plus the
/// creation axioms `u(-1)1 = u`, `u(n)1 = 0` for `n >= 0`.
pub fn check_vacuum_theorem(inst: &Instance) -> GridReport {
    let mut rep = GridReport::new("vacuum");
    for vl in inst.all_labels() {
        let v = inst.basis_state(vl);
        let hi = inst.n0_states(&inst.vacuum, &v);
        let lo = lowest_window(inst, &inst.vacuum, &v) - 2;
        for n in lo..hi {
            let expected = if n == -1 { v.clone() } else { State::zero() };
            let res = inst
                .product(&inst.vacuum, n, &v)
                .map(|got| got.sub(&expected));
            rep.record_residual(res, |z| {
                format!(
                    "1({n}){} differs by {}",
                    inst.labels[vl as usize].name,
                    inst.render_state(z)
                )
            });
        }
        // Creation axioms for this label.
        let hi = inst.n0_states(&v, &inst.vacuum);
        for n in -1..hi {
            let expected = if n == -1 { v.clone() } else { State::zero() };
            let res = inst.product(&v, n, &inst.vacuum).map(|got| got.sub(&expected));
            rep.record_residual(res, |z| {
                format!(
                    "{}({n})1 differs by {}",
                    inst.labels[vl as usize].name,
                    inst.render_state(z)
                )
            });
        }
    }
    rep
}

fn lowest_window(inst: &Instance, u: &State, v: &State) -> i64 {
    let mut lo = -1;
    for uid in u.coeffs.keys() {
        for vid in v.coeffs.keys() {
            lo = lo.min(inst.pair(*uid, *vid).lo);
        }
    }
    lo
}

/// The smallest witness `n0 >= 0` certified by descending scan:
/// `u(n)v = 0` for all `n >= n0`.
pub fn truncation_axiom_witness(inst: &Instance, u: &State, v: &State) -> i64 {
    let mut n0 = inst.n0_states(u, v).max(0);
    while n0 > 0 {
        match inst.product(u, n0 - 1, v) {
            Ok(z) if z.is_zero() => n0 -= 1,
            _ => break,
        }
    }
    n0
}

/// `(D_i u)(n) w - (-1)^i C(n,i) u(n-i) w`.
pub fn mode_shift_residual(
    inst: &Instance,
    hs: &HsFamily,
    u: &State,
    i: i64,
    n: i64,
    w: &State,
) -> Avail<State> {
    let du = hs.apply(i, u)?;
    let lhs = inst.product(&du, n, w)?;
    let rhs = inst.product(u, n - i, w)?;
    Ok(lhs.sub(&rhs.scale_int(&(sign(i) * binom_i64(n, i)))))
}

pub fn check_mode_shift(inst: &Instance, hs: &HsFamily, cfg: &GridConfig) -> GridReport {
    let mut rep = GridReport::new("mode-shift");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for i in 0..=hs.cutoff.min(cfg.mode_max.max(2)) {
            for n in cfg.modes() {
                for &wl in &labels {
                    let w = inst.basis_state(wl);
                    let res = mode_shift_residual(inst, hs, &u, i, n, &w);
                    rep.record_residual(res, |z| {
                        format!(
                            "mode-shift(u={}, i={i}, n={n}, w={}) = {}",
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

/// `v(n)u - (-1)^(n+1) sum_i (-1)^i D_i(u(n+i)v)`.
pub fn skew_symmetry_residual(
    inst: &Instance,
    hs: &HsFamily,
    u: &State,
    v: &State,
    n: i64,
) -> Avail<State> {
    let lhs = inst.product(v, n, u)?;
    let i_hi = inst.n0_states(u, v) - n - 1;
    let mut sum = State::zero();
    for i in 0..=i_hi {
        let uv = inst.product(u, n + i, v)?;
        let term = hs.apply(i, &uv)?;
        sum.add_scaled_int(&term, &sign(i));
    }
    Ok(lhs.sub(&sum.scale_int(&sign(n + 1))))
}

pub fn check_skew_symmetry(inst: &Instance, hs: &HsFamily, cfg: &GridConfig) -> GridReport {
    let mut rep = GridReport::new("skew-symmetry");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for &vl in &labels {
            let v = inst.basis_state(vl);
            for n in cfg.modes() {
                let res = skew_symmetry_residual(inst, hs, &u, &v, n);
                rep.record_residual(res, |z| {
                    format!(
                        "skew(u={}, v={}, n={n}) = {}",
                        inst.labels[ul as usize].name,
                        inst.labels[vl as usize].name,
                        inst.render_state(z)
                    )
                });
            }
        }
    }
    rep
}

/// `[D_m, u(n)]w - sum_{i=1}^m (-1)^i C(n,i) u(n-i) D_{m-i} w`.
pub fn translation_covariance_residual(
    inst: &Instance,
    hs: &HsFamily,
    u: &State,
    m: i64,
    n: i64,
    w: &State,
) -> Avail<State> {
    let unw = inst.product(u, n, w)?;
    let d_unw = hs.apply(m, &unw)?;
    let dw = hs.apply(m, w)?;
    let u_dw = inst.product(u, n, &dw)?;
    let lhs = d_unw.sub(&u_dw);

    let mut rhs = State::zero();
    for i in 1..=m {
        let dmi_w = hs.apply(m - i, w)?;
        let term = inst.product(u, n - i, &dmi_w)?;
        rhs.add_scaled_int(&term, &(sign(i) * binom_i64(n, i)));
    }
    Ok(lhs.sub(&rhs))
}

pub fn check_translation_covariance(
    inst: &Instance,
    hs: &HsFamily,
    cfg: &GridConfig,
) -> GridReport {
    let mut rep = GridReport::new("translation-covariance");
    let labels = cfg.labels(inst);
    for &ul in &labels {
        let u = inst.basis_state(ul);
        for m in 0..=hs.cutoff.min(cfg.mode_max.max(3)) {
            for n in cfg.modes() {
                for &wl in &labels {
                    let w = inst.basis_state(wl);
                    let res = translation_covariance_residual(inst, hs, &u, m, n, &w);
                    rep.record_residual(res, |z| {
                        format!(
                            "tc(u={}, m={m}, n={n}, w={}) = {}",
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

#[derive(Clone, Debug)]
pub struct CommutingReport {
    pub bracket_report: GridReport,
    pub product_report: GridReport,
    /// All evaluated brackets `[u(r), v(s)]` vanish.
    pub brackets_vanish: bool,
    /// All `u(n)v` for `n >= 0` vanish.
    pub nonneg_products_vanish: bool,
    /// The two conditions agree on the evaluated grid.
    pub equivalent: bool,
}

/// The commuting-vector criterion: `[u(r), v(s)] = 0` for all `r, s` iff
/// `u(n)v = 0` for all `n >= 0`. Both sides are evaluated on the grid and
/// compared.
pub fn check_commuting_criterion(
    inst: &Instance,
    u: &State,
    v: &State,
    cfg: &GridConfig,
) -> CommutingReport {
    let mut bracket_report = GridReport::new("commuting-brackets");
    let labels = cfg.labels(inst);
    for r in cfg.modes() {
        for s in cfg.modes() {
            for &xl in &labels {
                let x = inst.basis_state(xl);
                let res = (|| -> Avail<State> {
                    let vx = inst.product(v, s, &x)?;
                    let uvx = inst.product(u, r, &vx)?;
                    let ux = inst.product(u, r, &x)?;
                    let vux = inst.product(v, s, &ux)?;
                    Ok(uvx.sub(&vux))
                })();
                bracket_report.record_residual(res, |z| {
                    format!(
                        "[u({r}), v({s})]{} = {}",
                        inst.labels[xl as usize].name,
                        inst.render_state(z)
                    )
                });
            }
        }
    }
    let mut product_report = GridReport::new("commuting-products");
    let n0 = inst.n0_states(u, v);
    for n in 0..n0 {
        let res = inst.product(u, n, v);
        product_report.record_residual(res, |z| {
            format!("u({n})v = {}", inst.render_state(z))
        });
    }
    let brackets_vanish = bracket_report.ok();
    let nonneg_products_vanish = product_report.ok();
    CommutingReport {
        brackets_vanish,
        nonneg_products_vanish,
        equivalent: brackets_vanish == nonneg_products_vanish,
        bracket_report,
        product_report,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpan {
    pub dim: usize,
    pub rank: usize,
    pub full: bool,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct SubringReport {
    pub per_weight: BTreeMap<i64, WeightSpan>,
}

impl SubringReport {
    pub fn full_everywhere(&self) -> bool {
        self.per_weight.values().all(|w| w.full)
    }
}

/// Span closure of `u_1(i_1)...u_k(i_k) 1` over the generators, within
/// the truncation. Generators are split into homogeneous components; the
/// returned ranks are per weight (lower bounds when a vector without a
/// unit pivot shows up, flagged by `exact = false`).
pub fn generated_subring(inst: &Instance, generators: &[State]) -> SubringReport {
    let mut gens: Vec<State> = Vec::new();
    for g in generators {
        for (_, comp) in inst.homogeneous_components(g) {
            gens.push(comp);
        }
    }
    let mut trackers: BTreeMap<i64, SpanTracker> = inst
        .by_weight
        .iter()
        .map(|(w, ids)| (*w, SpanTracker::new(ids.len())))
        .collect();
    let coords = |w: i64, s: &State| -> Vec<crate::basering::RingElement> {
        let ids = &inst.by_weight[&w];
        ids.iter()
            .map(|id| s.coeffs.get(id).cloned().unwrap_or_else(|| inst.base.zero()))
            .collect()
    };

    let mut frontier: Vec<State> = Vec::new();
    for (w, comp) in inst.homogeneous_components(&inst.vacuum) {
        if trackers.get_mut(&w).unwrap().insert(&coords(w, &comp)) {
            frontier.push(comp);
        }
    }
    while let Some(s) = frontier.pop() {
        for g in &gens {
            let lo = lowest_window(inst, g, &s);
            let hi = inst.n0_states(g, &s);
            for n in lo..hi {
                let Ok(prod) = inst.product(g, n, &s) else { continue };
                if prod.is_zero() {
                    continue;
                }
                for (w, comp) in inst.homogeneous_components(&prod) {
                    if trackers.get_mut(&w).unwrap().insert(&coords(w, &comp)) {
                        frontier.push(comp);
                    }
                }
            }
        }
    }

    SubringReport {
        per_weight: trackers
            .into_iter()
            .map(|(w, t)| {
                let dim = inst.by_weight[&w].len();
                (
                    w,
                    WeightSpan { dim, rank: t.rank(), full: t.is_full(), exact: t.exact },
                )
            })
            .collect(),
    }
}

/// Weak associativity at order `t >= 0`: compares the coefficient of
/// `z^A w^B` on both sides of
/// `(z+w)^t Y(Y(u,z)v, w)x = (z+w)^t Y(u, z+w) Y(v, w)x`
/// under the convention that `(z+w)^m` expands in nonnegative powers of
/// the second variable. Excluded from default suites.
pub fn check_weak_associativity(
    inst: &Instance,
    u: &State,
    v: &State,
    x: &State,
    t: i64,
    a_range: std::ops::RangeInclusive<i64>,
    b_range: std::ops::RangeInclusive<i64>,
) -> GridReport {
    assert!(t >= 0);
    let mut rep = GridReport::new("weak-associativity");
    let n0_vx = inst.n0_states(v, x);
    for big_a in a_range.clone() {
        for big_b in b_range.clone() {
            let point = (|| -> Avail<State> {
                let mut lhs = State::zero();
                for k in 0..=t {
                    let m = t - k - big_a - 1;
                    let n = k - big_b - 1;
                    let uv = inst.product(u, m, v)?;
                    let term = inst.product(&uv, n, x)?;
                    lhs.add_scaled_int(&term, &binom_i64(t, k));
                }
                let mut rhs = State::zero();
                for j in 0..=(n0_vx + big_b).max(-1) {
                    let c = binom_i64(big_a + j, j);
                    if c.is_zero() {
                        continue;
                    }
                    let vx = inst.product(v, j - big_b - 1, x)?;
                    let term = inst.product(u, t - big_a - j - 1, &vx)?;
                    rhs.add_scaled_int(&term, &c);
                }
                Ok(lhs.sub(&rhs))
            })();
            rep.record_residual(point, |z| {
                format!("weak-assoc coeff z^{big_a} w^{big_b}: {}", inst.render_state(z))
            });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basering::RingDescriptor;
    use crate::hsderiv::{commutative_ring_instance, divided_power_instance};

    fn z() -> RingDescriptor {
        RingDescriptor::Integers
    }

    #[test]
    fn commutative_ring_passes_all() {
        let inst = commutative_ring_instance(&RingDescriptor::modn(30));
        let cfg = GridConfig::default_for(&inst);
        assert!(check_vacuum_theorem(&inst).ok());
        let rep = check_jacobi(&inst, &cfg);
        assert!(rep.ok(), "{}", rep.summary());
        assert!(rep.passed > 0);
        assert!(check_commutator(&inst, &cfg).ok());
        assert!(check_associator(&inst, &cfg).ok());
        let hs = inst.canonical_hs();
        assert!(hs.trivial);
        assert!(check_skew_symmetry(&inst, &hs, &cfg).ok());
        assert!(check_mode_shift(&inst, &hs, &cfg).ok());
        assert!(check_translation_covariance(&inst, &hs, &cfg).ok());
    }

    #[test]
    fn divided_power_instance_passes_all() {
        let inst = divided_power_instance(&z(), "x", 8, 8);
        let cfg = GridConfig::default_for(&inst).with_max_weight(4).with_modes(-3, 2);
        assert!(check_vacuum_theorem(&inst).ok());
        let rep = check_jacobi(&inst, &cfg);
        assert!(rep.ok(), "{}", rep.summary());
        assert!(rep.passed > 0, "grid must not be vacuous");
        let hs = inst.canonical_hs();
        assert!(hs.iterative);
        assert!(!hs.trivial);
        let rep = check_skew_symmetry(&inst, &hs, &cfg);
        assert!(rep.ok(), "{}", rep.summary());
        let rep = check_mode_shift(&inst, &hs, &cfg);
        assert!(rep.ok(), "{}", rep.summary());
        let rep = check_translation_covariance(&inst, &hs, &cfg);
        assert!(rep.ok(), "{}", rep.summary());
    }

    #[test]
    fn jacobi_specializations_match() {
        // t = 0 reproduces the commutator formula, r = 0 the associator.
        let inst = divided_power_instance(&z(), "x", 8, 8);
        let x = inst.basis_state(inst.label_id("x").unwrap());
        let x2 = inst.basis_state(inst.label_id("x^2").unwrap());
        let one = inst.basis_state(inst.label_id("1").unwrap());
        for r in -3..=2 {
            for s in -3..=2 {
                let jac = jacobi_residual(&inst, &x, &x2, &one, r, s, 0);
                let comm = commutator_residual(&inst, &x, &x2, r, s, &one);
                match (jac, comm) {
                    (Ok(a), Ok(b)) => assert_eq!(a.neg(), b),
                    (Err(_), Err(_)) => {}
                    other => panic!("availability mismatch: {other:?}"),
                }
                let jac = jacobi_residual(&inst, &x, &x2, &one, 0, s, r);
                let assoc = associator_residual(&inst, &x, &x2, s, r, &one);
                match (jac, assoc) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b),
                    (Err(_), Err(_)) => {}
                    other => panic!("availability mismatch: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn jacobi_xxx_closed_form_point() {
        // u = v = w = x, (r, s, t) = (-1, -1, -1) evaluates cleanly to 0.
        let inst = divided_power_instance(&z(), "x", 12, 12);
        let x = inst.basis_state(inst.label_id("x").unwrap());
        let res = jacobi_residual(&inst, &x, &x, &x, -1, -1, -1).unwrap();
        assert!(res.is_zero());
    }

    #[test]
    fn commutative_locality_is_zero() {
        let inst = commutative_ring_instance(&RingDescriptor::modn(30));
        let one = inst.basis_state(0);
        let cfg = GridConfig::default_for(&inst);
        let scan = locality_order(&inst, &one, &one, 4, &cfg);
        assert_eq!(scan.order, Some(0));
    }

    #[test]
    fn truncation_witness_commutative() {
        let inst = commutative_ring_instance(&RingDescriptor::modn(30));
        let one = inst.basis_state(0);
        assert_eq!(truncation_axiom_witness(&inst, &one, &one), 0);
    }

    #[test]
    fn corrupted_instance_fails_vacuum() {
        let mut inst = commutative_ring_instance(&RingDescriptor::modn(7));
        inst.corrupt_for_testing();
        let rep = check_vacuum_theorem(&inst);
        assert!(!rep.ok());
        assert!(rep.first_failure.is_some());
    }

    #[test]
    fn commuting_criterion_commutative() {
        let inst = commutative_ring_instance(&RingDescriptor::modn(6));
        let one = inst.basis_state(0);
        let cfg = GridConfig::default_for(&inst);
        let rep = check_commuting_criterion(&inst, &one, &one, &cfg);
        assert!(rep.brackets_vanish && rep.nonneg_products_vanish && rep.equivalent);
    }

    #[test]
    fn generated_subring_poly() {
        let inst = divided_power_instance(&z(), "x", 6, 6);
        let x = inst.basis_state(inst.label_id("x").unwrap());
        let rep = generated_subring(&inst, &[x]);
        assert!(rep.full_everywhere(), "{:?}", rep.per_weight);
        // empty generator set spans the vacuum only
        let rep = generated_subring(&inst, &[]);
        assert_eq!(rep.per_weight[&0].rank, 1);
        assert!(rep.per_weight.iter().filter(|(w, _)| **w > 0).all(|(_, s)| s.rank == 0));
    }

    #[test]
    fn weak_associativity_poly() {
        let inst = divided_power_instance(&z(), "x", 10, 10);
        let x = inst.basis_state(inst.label_id("x").unwrap());
        let one = inst.basis_state(inst.label_id("1").unwrap());
        let rep = check_weak_associativity(&inst, &x, &x, &one, 2, -8..=8, -8..=8);
        assert!(rep.ok(), "{}", rep.summary());
        assert!(rep.passed > 0);
    }
}
