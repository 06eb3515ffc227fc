//! Exact integer arithmetic and generalized binomial coefficients.
//!
//! Binomial coefficients here take an arbitrary integer upper argument:
//! `binom(m, n)` is `m(m-1)...(m-n+1)/n!` for `n >= 1`, `1` for `n = 0`
//! and `0` for `n < 0`. The division is always exact. Note that the
//! familiar symmetry `binom(m, n) = binom(m, m-n)` does *not* hold for
//! negative `m`, so nothing in this crate relies on it.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;

/// A formal binomial coefficient with integer upper and lower argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binomial {
    pub upper: BigInt,
    pub lower: BigInt,
}

impl Binomial {
    pub fn new(upper: impl Into<BigInt>, lower: impl Into<BigInt>) -> Self {
        Binomial { upper: upper.into(), lower: lower.into() }
    }

    /// Exact integer value of the coefficient.
    pub fn eval(&self) -> BigInt {
        binom(&self.upper, &self.lower)
    }
}

/// `binom(m, n)` for arbitrary integers. Zero for `n < 0`, one for `n = 0`.
pub fn binom(m: &BigInt, n: &BigInt) -> BigInt {
    if n.is_negative() {
        return BigInt::zero();
    }
    if n.is_zero() {
        return BigInt::one();
    }
    // For 0 <= m < n the falling factorial contains the factor 0.
    if !m.is_negative() && m < n {
        return BigInt::zero();
    }
    let steps = n
        .to_u64()
        .expect("binomial lower argument too large for iteration");
    // Incremental product keeps every intermediate value integral:
    // C(m, k+1) = C(m, k) * (m - k) / (k + 1).
    let mut acc = BigInt::one();
    let mut factor = m.clone();
    for k in 0..steps {
        acc *= &factor;
        acc /= BigInt::from(k + 1);
        factor -= 1;
        if acc.is_zero() {
            return acc;
        }
    }
    acc
}

/// Convenience form for machine-sized arguments.
pub fn binom_i64(m: i64, n: i64) -> BigInt {
    binom(&BigInt::from(m), &BigInt::from(n))
}

/// `[C(m,0), C(m,1), ..., C(m,max_power)]`: the coefficients of the
/// expansion of `(z+w)^m` in nonnegative powers of the second variable.
pub fn binomial_expansion_coeffs(m: &BigInt, max_power: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(max_power as usize + 1);
    let mut acc = BigInt::one();
    let mut factor = m.clone();
    out.push(acc.clone());
    for k in 0..max_power {
        acc *= &factor;
        acc /= BigInt::from(k + 1);
        factor -= 1;
        out.push(acc.clone());
    }
    out
}

/// Outcome of checking one binomial identity over an exhaustive grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub identity: &'static str,
    pub cases: u64,
    pub pass: bool,
    /// `(m, r, n)` of the first failing grid point, if any.
    pub counterexample: Option<(i64, i64, i64)>,
}

/// Exhaustively verifies the four binomial identities
/// on the grid `|m| <= range_m`, `|r| <= range_r`, `0 <= n <= range_n`:
///
/// 1. `C(m,n) = (-1)^n C(n-m-1, n)`
/// 2. `C(m,n) = C(m-1,n) + C(m-1,n-1)`
/// 3. `C(m,n) = sum_i C(r,i) C(m-r, n-i)`
/// 4. `C(m,n) = sum_i (-1)^i C(r,i) C(r+m-i, n-i)`
pub fn check_binomial_identities(range_m: i64, range_r: i64, range_n: i64) -> Vec<IdentityReport> {
    assert!(range_m >= 0 && range_r >= 0 && range_n >= 0);
    let mut memo: HashMap<(i64, i64), BigInt> = HashMap::new();
    let c = |m: i64, n: i64, memo: &mut HashMap<(i64, i64), BigInt>| -> BigInt {
        if let Some(v) = memo.get(&(m, n)) {
            return v.clone();
        }
        let v = binom_i64(m, n);
        memo.insert((m, n), v.clone());
        v
    };

    let mut bi1 = IdentityReport { identity: "bi1", cases: 0, pass: true, counterexample: None };
    let mut bi2 = IdentityReport { identity: "bi2", cases: 0, pass: true, counterexample: None };
    let mut bi3 = IdentityReport { identity: "bi3", cases: 0, pass: true, counterexample: None };
    let mut bi4 = IdentityReport { identity: "bi4", cases: 0, pass: true, counterexample: None };

    for m in -range_m..=range_m {
        for n in 0..=range_n {
            let lhs = c(m, n, &mut memo);

            bi1.cases += 1;
            if bi1.pass {
                let mut rhs = c(n - m - 1, n, &mut memo);
                if n % 2 != 0 {
                    rhs = -rhs;
                }
                if lhs != rhs {
                    bi1.pass = false;
                    bi1.counterexample = Some((m, 0, n));
                }
            }

            bi2.cases += 1;
            if bi2.pass {
                let rhs = c(m - 1, n, &mut memo) + c(m - 1, n - 1, &mut memo);
                if lhs != rhs {
                    bi2.pass = false;
                    bi2.counterexample = Some((m, 0, n));
                }
            }

            for r in -range_r..=range_r {
                bi3.cases += 1;
                if bi3.pass {
                    let mut rhs = BigInt::zero();
                    for i in 0..=n {
                        rhs += c(r, i, &mut memo) * c(m - r, n - i, &mut memo);
                    }
                    if lhs != rhs {
                        bi3.pass = false;
                        bi3.counterexample = Some((m, r, n));
                    }
                }

                bi4.cases += 1;
                if bi4.pass {
                    let mut rhs = BigInt::zero();
                    for i in 0..=n {
                        let term = c(r, i, &mut memo) * c(r + m - i, n - i, &mut memo);
                        if i % 2 == 0 {
                            rhs += term;
                        } else {
                            rhs -= term;
                        }
                    }
                    if lhs != rhs {
                        bi4.pass = false;
                        bi4.counterexample = Some((m, r, n));
                    }
                }
            }
        }
    }

    vec![bi1, bi2, bi3, bi4]
}
