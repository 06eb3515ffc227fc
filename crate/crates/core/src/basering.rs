//! Exact commutative base rings: the integers, modular residues,
//! univariate polynomial rings, and finite direct products of these.
//!
//! Every coefficient that appears in a truncated vertex ring lives in one
//! of these rings. Elements are self-describing (they carry their ring
//! descriptor) so that mixed-ring arithmetic is rejected rather than
//! silently coerced.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("ring descriptor mismatch: {0} vs {1}")]
    DescriptorMismatch(String, String),
    #[error("ring {0} is infinite; exhaustive enumeration not possible")]
    InfiniteRing(String),
    #[error("{0} is not a unit in {1}")]
    NotAUnit(String, String),
    #[error("operation not supported over {0}")]
    UnsupportedRing(String),
    #[error("cannot parse ring descriptor {0:?}: {1}")]
    Parse(String, String),
}

/// Tagged description of a base ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingDescriptor {
    /// The ring of rational integers.
    Integers,
    /// Integers modulo `n`, `n >= 2`.
    ModN(u64),
    /// Univariate polynomials over `Integers` or `ModN`.
    Poly { base: Box<RingDescriptor>, var: String },
    /// Finite direct product, at least one factor.
    Product(Vec<RingDescriptor>),
}

impl RingDescriptor {
    pub fn modn(n: u64) -> Self {
        assert!(n >= 2, "ModN requires n >= 2");
        RingDescriptor::ModN(n)
    }

    pub fn poly(base: RingDescriptor, var: &str) -> Self {
        assert!(
            matches!(base, RingDescriptor::Integers | RingDescriptor::ModN(_)),
            "polynomial base must be Integers or ModN"
        );
        RingDescriptor::Poly { base: Box::new(base), var: var.to_string() }
    }

    pub fn product(factors: Vec<RingDescriptor>) -> Self {
        assert!(!factors.is_empty(), "Product requires at least one factor");
        RingDescriptor::Product(factors)
    }

    pub fn zero(&self) -> RingElement {
        match self {
            RingDescriptor::Integers => RingElement {
                descriptor: self.clone(),
                payload: Payload::Int(BigInt::zero()),
            },
            RingDescriptor::ModN(_) => {
                RingElement { descriptor: self.clone(), payload: Payload::Residue(0) }
            }
            RingDescriptor::Poly { .. } => {
                RingElement { descriptor: self.clone(), payload: Payload::Poly(BTreeMap::new()) }
            }
            RingDescriptor::Product(fs) => RingElement {
                descriptor: self.clone(),
                payload: Payload::Tuple(fs.iter().map(|f| f.zero()).collect()),
            },
        }
    }

    pub fn one(&self) -> RingElement {
        self.from_bigint(&BigInt::one())
    }

    /// Image of an integer under the characteristic map `n -> n*1`.
    pub fn from_bigint(&self, k: &BigInt) -> RingElement {
        match self {
            RingDescriptor::Integers => {
                RingElement { descriptor: self.clone(), payload: Payload::Int(k.clone()) }
            }
            RingDescriptor::ModN(n) => {
                let r = k.mod_floor(&BigInt::from(*n)).to_u64().unwrap();
                RingElement { descriptor: self.clone(), payload: Payload::Residue(r) }
            }
            RingDescriptor::Poly { base, .. } => {
                let c = base.from_bigint(k);
                let mut coeffs = BTreeMap::new();
                if !c.is_zero() {
                    coeffs.insert(0u64, c.into_bigint());
                }
                RingElement { descriptor: self.clone(), payload: Payload::Poly(coeffs) }
            }
            RingDescriptor::Product(fs) => RingElement {
                descriptor: self.clone(),
                payload: Payload::Tuple(fs.iter().map(|f| f.from_bigint(k)).collect()),
            },
        }
    }

    pub fn from_i64(&self, k: i64) -> RingElement {
        self.from_bigint(&BigInt::from(k))
    }

    /// Smallest `p > 0` with `p * 1 = 0`, or `0` if none exists.
    pub fn characteristic(&self) -> u64 {
        match self {
            RingDescriptor::Integers => 0,
            RingDescriptor::ModN(n) => *n,
            RingDescriptor::Poly { base, .. } => base.characteristic(),
            RingDescriptor::Product(fs) => {
                let mut acc: u64 = 1;
                for f in fs {
                    let c = f.characteristic();
                    if c == 0 {
                        return 0;
                    }
                    acc = acc.lcm(&c);
                }
                acc
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            RingDescriptor::Integers | RingDescriptor::Poly { .. } => false,
            RingDescriptor::ModN(_) => true,
            RingDescriptor::Product(fs) => fs.iter().all(|f| f.is_finite()),
        }
    }

    /// Number of elements of a finite ring.
    pub fn cardinality(&self) -> Option<u64> {
        match self {
            RingDescriptor::ModN(n) => Some(*n),
            RingDescriptor::Product(fs) => {
                fs.iter().try_fold(1u64, |acc, f| f.cardinality().map(|c| acc * c))
            }
            _ => None,
        }
    }

    /// All elements of a finite ring, in canonical order.
    pub fn enumerate_elements(&self) -> Result<Vec<RingElement>, RingError> {
        match self {
            RingDescriptor::ModN(n) => Ok((0..*n)
                .map(|r| RingElement { descriptor: self.clone(), payload: Payload::Residue(r) })
                .collect()),
            RingDescriptor::Product(fs) => {
                let mut out = vec![Vec::new()];
                for f in fs {
                    let elems = f.enumerate_elements()?;
                    let mut next = Vec::with_capacity(out.len() * elems.len());
                    for prefix in &out {
                        for e in &elems {
                            let mut p = prefix.clone();
                            p.push(e.clone());
                            next.push(p);
                        }
                    }
                    out = next;
                }
                Ok(out
                    .into_iter()
                    .map(|t| RingElement { descriptor: self.clone(), payload: Payload::Tuple(t) })
                    .collect())
            }
            _ => Err(RingError::InfiniteRing(self.to_string())),
        }
    }

    /// All idempotents of a finite ring, by exhaustive search, sorted
    /// canonically by payload.
    pub fn enumerate_idempotents(&self) -> Result<Vec<RingElement>, RingError> {
        let mut out: Vec<RingElement> = self
            .enumerate_elements()?
            .into_iter()
            .filter(|e| e.mul(e).unwrap() == *e)
            .collect();
        out.sort();
        Ok(out)
    }

    /// Parses the serialized forms `z`, `zmod:30`, `poly:z:x`,
    /// `prod:zmod:4,zmod:3`.
    pub fn parse(s: &str) -> Result<Self, RingError> {
        let err = |msg: &str| RingError::Parse(s.to_string(), msg.to_string());
        if s == "z" {
            return Ok(RingDescriptor::Integers);
        }
        if let Some(rest) = s.strip_prefix("zmod:") {
            let n: u64 = rest.parse().map_err(|_| err("modulus must be an integer"))?;
            if n < 2 {
                return Err(err("modulus must be at least 2"));
            }
            return Ok(RingDescriptor::ModN(n));
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let (base_str, var) =
                rest.rsplit_once(':').ok_or_else(|| err("expected poly:<base>:<var>"))?;
            if var.is_empty() || !var.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(err("variable name must be alphanumeric"));
            }
            let base = RingDescriptor::parse(base_str)?;
            if !matches!(base, RingDescriptor::Integers | RingDescriptor::ModN(_)) {
                return Err(err("polynomial base must be z or zmod:n"));
            }
            return Ok(RingDescriptor::poly(base, var));
        }
        if let Some(rest) = s.strip_prefix("prod:") {
            // The grammar is flat: factors are z, zmod:n, or poly, never
            // nested products.
            let factors: Result<Vec<_>, _> =
                rest.split(',').map(RingDescriptor::parse).collect();
            let factors = factors?;
            if factors.is_empty() {
                return Err(err("product needs at least one factor"));
            }
            return Ok(RingDescriptor::Product(factors));
        }
        Err(err("unknown ring tag"))
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::Integers => write!(f, "z"),
            RingDescriptor::ModN(n) => write!(f, "zmod:{n}"),
            RingDescriptor::Poly { base, var } => write!(f, "poly:{base}:{var}"),
            RingDescriptor::Product(fs) => {
                write!(f, "prod:")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// Payload of a ring element. Residues are reduced to `[0, n)`; polynomials
/// store no zero coefficients; tuple arity matches the product arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    Int(BigInt),
    Residue(u64),
    /// degree -> coefficient; coefficients are reduced mod n when the
    /// polynomial base is `ModN(n)`.
    Poly(BTreeMap<u64, BigInt>),
    Tuple(Vec<RingElement>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub descriptor: RingDescriptor,
    pub payload: Payload,
}

impl RingElement {
    fn check_same(&self, other: &Self) -> Result<(), RingError> {
        if self.descriptor != other.descriptor {
            return Err(RingError::DescriptorMismatch(
                self.descriptor.to_string(),
                other.descriptor.to_string(),
            ));
        }
        Ok(())
    }

    fn into_bigint(self) -> BigInt {
        match self.payload {
            Payload::Int(k) => k,
            Payload::Residue(r) => BigInt::from(r),
            _ => panic!("not an integer-like payload"),
        }
    }

    fn poly_base(&self) -> &RingDescriptor {
        match &self.descriptor {
            RingDescriptor::Poly { base, .. } => base,
            _ => unreachable!(),
        }
    }

    fn normalize_poly_coeff(base: &RingDescriptor, c: BigInt) -> BigInt {
        match base {
            RingDescriptor::ModN(n) => c.mod_floor(&BigInt::from(*n)),
            _ => c,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.payload {
            Payload::Int(k) => k.is_zero(),
            Payload::Residue(r) => *r == 0,
            Payload::Poly(cs) => cs.is_empty(),
            Payload::Tuple(t) => t.iter().all(|x| x.is_zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.descriptor.one()
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check_same(other)?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Int(a), Payload::Int(b)) => Payload::Int(a + b),
            (Payload::Residue(a), Payload::Residue(b)) => {
                let n = match self.descriptor {
                    RingDescriptor::ModN(n) => n,
                    _ => unreachable!(),
                };
                Payload::Residue((a + b) % n)
            }
            (Payload::Poly(a), Payload::Poly(b)) => {
                let base = self.poly_base();
                let mut out = a.clone();
                for (deg, c) in b {
                    let entry = out.entry(*deg).or_insert_with(BigInt::zero);
                    *entry = Self::normalize_poly_coeff(base, std::mem::take(entry) + c);
                    if entry.is_zero() {
                        out.remove(deg);
                    }
                }
                Payload::Poly(out)
            }
            (Payload::Tuple(a), Payload::Tuple(b)) => Payload::Tuple(
                a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<_, _>>()?,
            ),
            _ => unreachable!("payload shape does not match descriptor"),
        };
        Ok(RingElement { descriptor: self.descriptor.clone(), payload })
    }

    pub fn neg(&self) -> Self {
        let payload = match &self.payload {
            Payload::Int(a) => Payload::Int(-a),
            Payload::Residue(a) => {
                let n = match self.descriptor {
                    RingDescriptor::ModN(n) => n,
                    _ => unreachable!(),
                };
                Payload::Residue(if *a == 0 { 0 } else { n - a })
            }
            Payload::Poly(a) => {
                let base = self.poly_base();
                Payload::Poly(
                    a.iter()
                        .map(|(d, c)| (*d, Self::normalize_poly_coeff(base, -c)))
                        .collect(),
                )
            }
            Payload::Tuple(a) => Payload::Tuple(a.iter().map(|x| x.neg()).collect()),
        };
        RingElement { descriptor: self.descriptor.clone(), payload }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check_same(other)?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Int(a), Payload::Int(b)) => Payload::Int(a * b),
            (Payload::Residue(a), Payload::Residue(b)) => {
                let n = match self.descriptor {
                    RingDescriptor::ModN(n) => n,
                    _ => unreachable!(),
                };
                Payload::Residue(((*a as u128 * *b as u128) % n as u128) as u64)
            }
            (Payload::Poly(a), Payload::Poly(b)) => {
                let base = self.poly_base();
                let mut out: BTreeMap<u64, BigInt> = BTreeMap::new();
                for (da, ca) in a {
                    for (db, cb) in b {
                        let entry = out.entry(da + db).or_insert_with(BigInt::zero);
                        *entry =
                            Self::normalize_poly_coeff(base, std::mem::take(entry) + ca * cb);
                    }
                }
                out.retain(|_, c| !c.is_zero());
                Payload::Poly(out)
            }
            (Payload::Tuple(a), Payload::Tuple(b)) => Payload::Tuple(
                a.iter().zip(b).map(|(x, y)| x.mul(y)).collect::<Result<_, _>>()?,
            ),
            _ => unreachable!("payload shape does not match descriptor"),
        };
        Ok(RingElement { descriptor: self.descriptor.clone(), payload })
    }

    /// Scale by an integer via the characteristic map.
    pub fn scale_int(&self, k: &BigInt) -> Self {
        self.mul(&self.descriptor.from_bigint(k)).unwrap()
    }

    /// True if some `y` satisfies `x * y = 1`.
    pub fn is_unit(&self) -> Result<bool, RingError> {
        Ok(self.unit_inverse_opt()?.is_some())
    }

    /// Multiplicative inverse, or `NotAUnit`.
    pub fn unit_inverse(&self) -> Result<Self, RingError> {
        self.unit_inverse_opt()?.ok_or_else(|| {
            RingError::NotAUnit(self.to_string(), self.descriptor.to_string())
        })
    }

    fn unit_inverse_opt(&self) -> Result<Option<Self>, RingError> {
        match (&self.descriptor, &self.payload) {
            (RingDescriptor::Integers, Payload::Int(k)) => {
                if k.abs().is_one() {
                    Ok(Some(self.clone()))
                } else {
                    Ok(None)
                }
            }
            (RingDescriptor::ModN(n), Payload::Residue(r)) => {
                let (g, x, _) = ext_gcd(*r as i128, *n as i128);
                if g == 1 {
                    let inv = x.rem_euclid(*n as i128) as u64;
                    Ok(Some(RingElement {
                        descriptor: self.descriptor.clone(),
                        payload: Payload::Residue(inv),
                    }))
                } else {
                    Ok(None)
                }
            }
            (RingDescriptor::Poly { base, .. }, Payload::Poly(cs)) => {
                if **base != RingDescriptor::Integers {
                    return Err(RingError::UnsupportedRing(self.descriptor.to_string()));
                }
                // Over Z[x] the units are the constants +-1.
                if cs.len() == 1 {
                    if let Some(c) = cs.get(&0) {
                        if c.abs().is_one() {
                            return Ok(Some(self.clone()));
                        }
                    }
                }
                Ok(None)
            }
            (RingDescriptor::Product(_), Payload::Tuple(t)) => {
                let mut inv = Vec::with_capacity(t.len());
                for x in t {
                    match x.unit_inverse_opt()? {
                        Some(y) => inv.push(y),
                        None => return Ok(None),
                    }
                }
                Ok(Some(RingElement {
                    descriptor: self.descriptor.clone(),
                    payload: Payload::Tuple(inv),
                }))
            }
            _ => unreachable!("payload shape does not match descriptor"),
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Int(k) => write!(f, "{k}"),
            Payload::Residue(r) => write!(f, "{r}"),
            Payload::Poly(cs) => {
                if cs.is_empty() {
                    return write!(f, "0");
                }
                let var = match &self.descriptor {
                    RingDescriptor::Poly { var, .. } => var.as_str(),
                    _ => "x",
                };
                let mut first = true;
                for (deg, c) in cs.iter().rev() {
                    if !first {
                        if c.is_negative() {
                            write!(f, "-")?;
                        } else {
                            write!(f, "+")?;
                        }
                    } else if c.is_negative() {
                        write!(f, "-")?;
                    }
                    first = false;
                    let a = c.abs();
                    match deg {
                        0 => write!(f, "{a}")?,
                        1 => {
                            if a.is_one() {
                                write!(f, "{var}")?;
                            } else {
                                write!(f, "{a}*{var}")?;
                            }
                        }
                        d => {
                            if a.is_one() {
                                write!(f, "{var}^{d}")?;
                            } else {
                                write!(f, "{a}*{var}^{d}")?;
                            }
                        }
                    }
                }
                Ok(())
            }
            Payload::Tuple(t) => {
                write!(f, "(")?;
                for (i, x) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod30_arithmetic() {
        let r = RingDescriptor::modn(30);
        let six = r.from_i64(6);
        let ten = r.from_i64(10);
        assert!(six.mul(&ten).unwrap().is_zero());
        assert_eq!(r.from_i64(-1), r.from_i64(29));
    }

    #[test]
    fn poly_monomial_product() {
        let r = RingDescriptor::poly(RingDescriptor::Integers, "x");
        let x = RingElement {
            descriptor: r.clone(),
            payload: Payload::Poly([(1u64, BigInt::from(1))].into_iter().collect()),
        };
        let x2 = x.mul(&x).unwrap();
        assert_eq!(x2.to_string(), "x^2");
    }

    #[test]
    fn product_componentwise() {
        let r = RingDescriptor::product(vec![RingDescriptor::modn(4), RingDescriptor::modn(3)]);
        let a = RingElement {
            descriptor: r.clone(),
            payload: Payload::Tuple(vec![
                RingDescriptor::modn(4).from_i64(3),
                RingDescriptor::modn(3).from_i64(2),
            ]),
        };
        let b = RingElement {
            descriptor: r.clone(),
            payload: Payload::Tuple(vec![
                RingDescriptor::modn(4).from_i64(1),
                RingDescriptor::modn(3).from_i64(1),
            ]),
        };
        assert!(a.add(&b).unwrap().is_zero());
    }

    #[test]
    fn characteristics() {
        assert_eq!(RingDescriptor::Integers.characteristic(), 0);
        assert_eq!(RingDescriptor::modn(30).characteristic(), 30);
        let r = RingDescriptor::product(vec![RingDescriptor::modn(4), RingDescriptor::modn(6)]);
        assert_eq!(r.characteristic(), 12);
        let rz = RingDescriptor::product(vec![RingDescriptor::modn(4), RingDescriptor::Integers]);
        assert_eq!(rz.characteristic(), 0);
    }

    #[test]
    fn idempotents_mod30() {
        let r = RingDescriptor::modn(30);
        let idems: Vec<u64> = r
            .enumerate_idempotents()
            .unwrap()
            .into_iter()
            .map(|e| match e.payload {
                Payload::Residue(v) => v,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(idems, vec![0, 1, 6, 10, 15, 16, 21, 25]);
    }

    #[test]
    fn idempotents_prime_power() {
        assert_eq!(RingDescriptor::modn(7).enumerate_idempotents().unwrap().len(), 2);
        assert_eq!(RingDescriptor::modn(4).enumerate_idempotents().unwrap().len(), 2);
    }

    #[test]
    fn idempotent_count_matches_prime_factors() {
        // 2^(number of distinct primes dividing n), against trial
        // factorization, for every modulus up to 10^4
        for n in 2u64..=10_000 {
            let mut m = n;
            let mut primes = 0;
            let mut p = 2;
            while p * p <= m {
                if m % p == 0 {
                    primes += 1;
                    while m % p == 0 {
                        m /= p;
                    }
                }
                p += 1;
            }
            if m > 1 {
                primes += 1;
            }
            let count = RingDescriptor::modn(n).enumerate_idempotents().unwrap().len();
            assert_eq!(count, 1usize << primes, "n = {n}");
        }
    }

    #[test]
    fn complement_of_idempotent() {
        let r = RingDescriptor::modn(30);
        let one = r.one();
        for e in r.enumerate_idempotents().unwrap() {
            let f = one.sub(&e).unwrap();
            assert_eq!(f.mul(&f).unwrap(), f);
            assert!(e.mul(&f).unwrap().is_zero());
        }
    }

    #[test]
    fn units() {
        let r = RingDescriptor::modn(30);
        let seven = r.from_i64(7);
        assert_eq!(seven.unit_inverse().unwrap(), r.from_i64(13));
        assert!(!RingDescriptor::Integers.from_i64(2).is_unit().unwrap());
        let p = RingDescriptor::poly(RingDescriptor::Integers, "x");
        let x = RingElement {
            descriptor: p.clone(),
            payload: Payload::Poly([(1u64, BigInt::one())].into_iter().collect()),
        };
        assert!(!x.is_unit().unwrap());
        assert!(p.from_i64(-1).is_unit().unwrap());
    }

    #[test]
    fn descriptor_strings_round_trip() {
        for s in ["z", "zmod:30", "poly:z:x", "poly:zmod:5:t", "prod:zmod:4,zmod:3"] {
            let d = RingDescriptor::parse(s).unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!(RingDescriptor::parse("zmod:1").is_err());
        assert!(RingDescriptor::parse("q").is_err());
    }

    #[test]
    fn descriptor_mismatch_rejected() {
        let a = RingDescriptor::modn(4).from_i64(1);
        let b = RingDescriptor::modn(6).from_i64(1);
        assert!(matches!(a.add(&b), Err(RingError::DescriptorMismatch(_, _))));
    }
}
