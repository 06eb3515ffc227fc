//! Exact linear algebra over the supported base rings.
//!
//! Kernels over the integers are computed by unimodular column reduction;
//! kernels mod n reduce to an integer kernel of the matrix stacked with
//! `n*I`. Products are handled componentwise. Only the zero matrix is
//! supported over polynomial bases, which is all the callers need (a
//! trivial HS derivation has zero maps).

use crate::basering::{Payload, RingDescriptor, RingElement, RingError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Basis of the integer kernel `{x : A x = 0}` of a rows-by-cols matrix.
pub fn kernel_int(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    // Column reduction: bring A into column echelon form by unimodular
    // column operations, mirroring them on an identity matrix U. Columns
    // of U over the zero columns of A*U form a kernel basis.
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    for r in &mut a {
        r.resize(ncols, BigInt::zero());
    }
    let nrows = a.len();
    let mut u: Vec<Vec<BigInt>> = (0..ncols)
        .map(|i| {
            let mut col = vec![BigInt::zero(); ncols];
            col[i] = BigInt::from(1);
            col
        })
        .collect();
    // Work column-major on A for convenience.
    let mut cols: Vec<Vec<BigInt>> = (0..ncols)
        .map(|j| (0..nrows).map(|i| a[i][j].clone()).collect())
        .collect();

    let mut fixed = 0usize; // columns 0..fixed hold pivots
    for row in 0..nrows {
        // Euclid over the entries of this row among free columns.
        loop {
            let mut best: Option<usize> = None;
            for j in fixed..ncols {
                if !cols[j][row].is_zero() {
                    best = match best {
                        None => Some(j),
                        Some(b) => {
                            if cols[j][row].abs() < cols[b][row].abs() {
                                Some(j)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(p) = best else { break };
            let mut others_cleared = true;
            for j in fixed..ncols {
                if j == p || cols[j][row].is_zero() {
                    continue;
                }
                let q = div_round(&cols[j][row], &cols[p][row]);
                if !q.is_zero() {
                    for i in 0..nrows {
                        let t = &cols[p][i] * &q;
                        cols[j][i] -= t;
                    }
                    for i in 0..ncols {
                        let t = &u[p][i] * &q;
                        u[j][i] -= t;
                    }
                }
                if !cols[j][row].is_zero() {
                    others_cleared = false;
                }
            }
            if others_cleared {
                cols.swap(fixed, p);
                u.swap(fixed, p);
                fixed += 1;
                break;
            }
        }
        if fixed == ncols {
            break;
        }
    }

    (fixed..ncols)
        .filter(|&j| cols[j].iter().all(|x| x.is_zero()))
        .map(|j| u[j].clone())
        .collect()
}

/// Rounded division used to shrink remainders during column reduction.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if &r.abs() * 2 > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Generators of the kernel of `A` over `Z/n`, as vectors of residues.
pub fn kernel_mod(rows: &[Vec<BigInt>], ncols: usize, n: u64) -> Vec<Vec<BigInt>> {
    // A x = 0 (mod n)  <=>  exists y with A x + n y = 0 over Z.
    let nrows = rows.len();
    let nbig = BigInt::from(n);
    let mut stacked: Vec<Vec<BigInt>> = Vec::with_capacity(nrows);
    for (i, r) in rows.iter().enumerate() {
        let mut row = r.clone();
        row.resize(ncols, BigInt::zero());
        row.extend((0..nrows).map(|j| if i == j { nbig.clone() } else { BigInt::zero() }));
        stacked.push(row);
    }
    let gens = kernel_int(&stacked, ncols + nrows);
    let mut out: Vec<Vec<BigInt>> = gens
        .into_iter()
        .map(|g| g[..ncols].iter().map(|x| x.mod_floor(&nbig)).collect())
        .filter(|g: &Vec<BigInt>| g.iter().any(|x| !x.is_zero()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Generators of the kernel of a matrix with entries in `ring`.
///
/// The returned vectors generate all solutions of `A x = 0` as a module
/// over the ring.
pub fn kernel_ring(
    ring: &RingDescriptor,
    rows: &[Vec<RingElement>],
    ncols: usize,
) -> Result<Vec<Vec<RingElement>>, RingError> {
    if rows.iter().all(|r| r.iter().all(|x| x.is_zero())) {
        // Zero matrix over any ring: the standard basis generates.
        return Ok((0..ncols)
            .map(|i| {
                (0..ncols)
                    .map(|j| if i == j { ring.one() } else { ring.zero() })
                    .collect()
            })
            .collect());
    }
    match ring {
        RingDescriptor::Integers => {
            let int_rows: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().map(|x| as_int(x)).collect())
                .collect();
            Ok(kernel_int(&int_rows, ncols)
                .into_iter()
                .map(|v| v.into_iter().map(|k| ring.from_bigint(&k)).collect())
                .collect())
        }
        RingDescriptor::ModN(n) => {
            let int_rows: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().map(|x| as_int(x)).collect())
                .collect();
            Ok(kernel_mod(&int_rows, ncols, *n)
                .into_iter()
                .map(|v| v.into_iter().map(|k| ring.from_bigint(&k)).collect())
                .collect())
        }
        RingDescriptor::Product(factors) => {
            // Solve per component and embed with zeros elsewhere.
            let mut out = Vec::new();
            for (ci, factor) in factors.iter().enumerate() {
                let comp_rows: Vec<Vec<RingElement>> = rows
                    .iter()
                    .map(|r| r.iter().map(|x| tuple_component(x, ci)).collect())
                    .collect();
                for gen in kernel_ring(factor, &comp_rows, ncols)? {
                    let vec: Vec<RingElement> = gen
                        .into_iter()
                        .map(|g| embed_component(ring, factors, ci, g))
                        .collect();
                    out.push(vec);
                }
            }
            Ok(out)
        }
        RingDescriptor::Poly { .. } => Err(RingError::UnsupportedRing(ring.to_string())),
    }
}

fn as_int(x: &RingElement) -> BigInt {
    match &x.payload {
        Payload::Int(k) => k.clone(),
        Payload::Residue(r) => BigInt::from(*r),
        _ => panic!("expected integer-like ring element"),
    }
}

fn tuple_component(x: &RingElement, i: usize) -> RingElement {
    match &x.payload {
        Payload::Tuple(t) => t[i].clone(),
        _ => panic!("expected tuple ring element"),
    }
}

fn embed_component(
    ring: &RingDescriptor,
    factors: &[RingDescriptor],
    i: usize,
    value: RingElement,
) -> RingElement {
    let tuple = factors
        .iter()
        .enumerate()
        .map(|(j, f)| if j == i { value.clone() } else { f.zero() })
        .collect();
    RingElement { descriptor: ring.clone(), payload: Payload::Tuple(tuple) }
}

/// Incremental row-echelon span over a base ring, restricted to unit
/// pivots. `insert` returns true when the vector enlarges the unit-pivot
/// echelon. A nonzero vector with no unit coordinate after reduction is
/// rejected (returns false) and marks the tracker inexact: from then on
/// the rank is a lower bound.
pub struct SpanTracker {
    ncols: usize,
    /// (pivot column, reduced row) with unit pivot normalized to 1.
    rows: Vec<(usize, Vec<RingElement>)>,
    pub exact: bool,
}

impl SpanTracker {
    pub fn new(ncols: usize) -> Self {
        SpanTracker { ncols, rows: Vec::new(), exact: true }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, vec: &[RingElement]) -> bool {
        assert_eq!(vec.len(), self.ncols);
        let mut v = vec.to_vec();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let c = v[*pivot].clone();
                for j in 0..self.ncols {
                    let t = row[j].mul(&c).unwrap();
                    v[j] = v[j].sub(&t).unwrap();
                }
            }
        }
        if v.iter().all(|x| x.is_zero()) {
            return false;
        }
        // Find a unit coordinate to pivot on.
        let pivot = (0..self.ncols)
            .find(|&j| !v[j].is_zero() && v[j].is_unit().unwrap_or(false));
        match pivot {
            Some(p) => {
                let inv = v[p].unit_inverse().unwrap();
                for x in v.iter_mut() {
                    *x = x.mul(&inv).unwrap();
                }
                // Back-substitute into existing rows.
                for (_, row) in self.rows.iter_mut() {
                    if !row[p].is_zero() {
                        let c = row[p].clone();
                        for j in 0..self.ncols {
                            let t = v[j].mul(&c).unwrap();
                            row[j] = row[j].sub(&t).unwrap();
                        }
                    }
                }
                self.rows.push((p, v));
                self.rows.sort_by_key(|(p, _)| *p);
                true
            }
            None => {
                // Genuinely new direction but no unit pivot available;
                // not stored, so the rank becomes a lower bound.
                self.exact = false;
                false
            }
        }
    }

    /// True when the span is the full space. A complete unit-pivot
    /// echelon certifies this even if some vectors were rejected: they
    /// lie in the span of the pivot rows regardless.
    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Does the vector reduce to zero through the unit pivots? A `true`
    /// certifies membership in the tracked span.
    pub fn reduces_to_zero(&self, vec: &[RingElement]) -> bool {
        assert_eq!(vec.len(), self.ncols);
        let mut v = vec.to_vec();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let c = v[*pivot].clone();
                for j in 0..self.ncols {
                    let t = row[j].mul(&c).unwrap();
                    v[j] = v[j].sub(&t).unwrap();
                }
            }
        }
        v.iter().all(|x| x.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn integer_kernel_simple() {
        // kernel of [1 2 3] is rank 2
        let rows = vec![vec![bi(1), bi(2), bi(3)]];
        let k = kernel_int(&rows, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let combo: BigInt = &v[0] + &v[1] * 2 + &v[2] * 3;
            assert!(combo.is_zero());
        }
    }

    #[test]
    fn integer_kernel_none() {
        let rows = vec![vec![bi(1), bi(0)], vec![bi(0), bi(1)]];
        assert!(kernel_int(&rows, 2).is_empty());
    }

    #[test]
    fn integer_kernel_lattice() {
        // 2x + 4y = 0 over Z: kernel generated by (2, -1), not (1, -1/2).
        let rows = vec![vec![bi(2), bi(4)]];
        let k = kernel_int(&rows, 2);
        assert_eq!(k.len(), 1);
        let g = &k[0];
        let combo: BigInt = &g[0] * 2 + &g[1] * 4;
        assert!(combo.is_zero());
        assert_eq!(g[1].abs(), bi(1)); // primitive generator
    }

    #[test]
    fn mod_kernel_includes_torsion() {
        // x = 0 over Z gives kernel 0, but 2x = 0 over Z/4 has solution x = 2.
        let rows = vec![vec![bi(2)]];
        let k = kernel_mod(&rows, 1, 4);
        assert_eq!(k, vec![vec![bi(2)]]);
    }

    #[test]
    fn ring_dispatch_product() {
        let ring =
            RingDescriptor::product(vec![RingDescriptor::modn(2), RingDescriptor::modn(3)]);
        // over Z/2 x Z/3, the matrix [ (1,0) ] kills the second component only
        let one_zero = RingElement {
            descriptor: ring.clone(),
            payload: crate::basering::Payload::Tuple(vec![
                RingDescriptor::modn(2).from_i64(1),
                RingDescriptor::modn(3).from_i64(0),
            ]),
        };
        let rows = vec![vec![one_zero]];
        let gens = kernel_ring(&ring, &rows, 1).unwrap();
        // solutions: x with first component 0: generated by (0,1)
        assert!(!gens.is_empty());
        for g in &gens {
            let prod = rows[0][0].mul(&g[0]).unwrap();
            assert!(prod.is_zero());
        }
    }

    #[test]
    fn span_tracker_basic() {
        let z = RingDescriptor::Integers;
        let mut t = SpanTracker::new(3);
        let v1 = vec![z.from_i64(1), z.from_i64(2), z.from_i64(0)];
        let v2 = vec![z.from_i64(0), z.from_i64(1), z.from_i64(0)];
        assert!(t.insert(&v1));
        assert!(t.insert(&v2));
        assert!(!t.insert(&v1));
        assert_eq!(t.rank(), 2);
        assert!(!t.is_full());
        let v3 = vec![z.from_i64(0), z.from_i64(0), z.from_i64(-1)];
        assert!(t.insert(&v3));
        assert!(t.is_full());
    }
}
