//! Instance-spec strings and their builders.
//!
//! Grammar:
//!   comm:<ring>
//!   commhs:poly:<base>:<var>:deg=<d>
//!   virasoro:<base>:<cprime>[:lift=<k>]
//!   dsum(<spec>,<spec>)
//!   tensor(<spec>,<spec>)
//! where <ring> is one of `z`, `zmod:<n>`, `poly:<base>:<var>`,
//! `prod:<ring>,<ring>,...`.

use num_bigint::BigInt;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;
use vrx_core::basering::RingDescriptor;
use vrx_core::hsderiv::{commutative_ring_instance, divided_power_instance};
use vrx_core::structure;
use vrx_core::vertexcore::Instance;
use vrx_core::virasoro::{self, VirasoroParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("parse error at position {0}: {1}")]
    Parse(usize, String),
    #[error("build error: {0}")]
    Build(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceSpec {
    Comm(RingDescriptor),
    CommHs { base: RingDescriptor, var: String, degree: i64 },
    Virasoro { base: RingDescriptor, cprime: BigInt, lift: Option<BigInt> },
    DSum(Box<InstanceSpec>, Box<InstanceSpec>),
    Tensor(Box<InstanceSpec>, Box<InstanceSpec>),
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSpec::Comm(r) => write!(f, "comm:{r}"),
            InstanceSpec::CommHs { base, var, degree } => {
                write!(f, "commhs:poly:{base}:{var}:deg={degree}")
            }
            InstanceSpec::Virasoro { base, cprime, lift } => {
                write!(f, "virasoro:{base}:{cprime}")?;
                if let Some(l) = lift {
                    write!(f, ":lift={l}")?;
                }
                Ok(())
            }
            InstanceSpec::DSum(a, b) => write!(f, "dsum({a},{b})"),
            InstanceSpec::Tensor(a, b) => write!(f, "tensor({a},{b})"),
        }
    }
}

/// Splits `a,b` at the top level (parentheses nest).
fn split_two(s: &str, offset: usize) -> Result<(&str, &str), SpecError> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth = depth.checked_sub(1).ok_or_else(|| {
                    SpecError::Parse(offset + i, "unbalanced parenthesis".to_string())
                })?;
            }
            ',' if depth == 0 => {
                return Ok((&s[..i], &s[i + 1..]));
            }
            _ => {}
        }
    }
    Err(SpecError::Parse(
        offset + s.len(),
        "expected two comma-separated specs".to_string(),
    ))
}

fn parse_at(s: &str, offset: usize) -> Result<InstanceSpec, SpecError> {
    let err = |pos: usize, msg: &str| SpecError::Parse(offset + pos, msg.to_string());
    for (tag, pair) in [("dsum(", true), ("tensor(", true)] {
        if let Some(rest) = s.strip_prefix(tag) {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| err(s.len(), "missing closing parenthesis"))?;
            let (a, b) = split_two(inner, offset + tag.len())?;
            let left = parse_at(a, offset + tag.len())?;
            let right = parse_at(b, offset + tag.len() + a.len() + 1)?;
            let _ = pair;
            return Ok(if tag.starts_with("dsum") {
                InstanceSpec::DSum(Box::new(left), Box::new(right))
            } else {
                InstanceSpec::Tensor(Box::new(left), Box::new(right))
            });
        }
    }
    if let Some(rest) = s.strip_prefix("comm:") {
        let ring = RingDescriptor::parse(rest)
            .map_err(|e| err("comm:".len(), &e.to_string()))?;
        return Ok(InstanceSpec::Comm(ring));
    }
    if let Some(rest) = s.strip_prefix("commhs:") {
        // commhs:poly:<base>:<var>:deg=<d>
        let (ring_part, deg_part) = rest
            .rsplit_once(':')
            .ok_or_else(|| err(s.len(), "expected :deg=<d>"))?;
        let degree: i64 = deg_part
            .strip_prefix("deg=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| err(s.len() - deg_part.len(), "expected deg=<integer>"))?;
        if degree < 0 {
            return Err(err(0, "degree must be nonnegative"));
        }
        let ring = RingDescriptor::parse(ring_part)
            .map_err(|e| err("commhs:".len(), &e.to_string()))?;
        let RingDescriptor::Poly { base, var } = ring else {
            return Err(err("commhs:".len(), "commhs needs a polynomial ring"));
        };
        return Ok(InstanceSpec::CommHs { base: *base, var, degree });
    }
    if let Some(rest) = s.strip_prefix("virasoro:") {
        let mut tail = rest;
        let mut lift = None;
        if let Some((head, l)) = tail.rsplit_once(":lift=") {
            lift = Some(
                BigInt::from_str(l)
                    .map_err(|_| err(s.len() - l.len(), "lift must be an integer"))?,
            );
            tail = head;
        }
        let (base_part, cp_part) = tail
            .rsplit_once(':')
            .ok_or_else(|| err(s.len(), "expected virasoro:<base>:<cprime>"))?;
        let cprime = BigInt::from_str(cp_part)
            .map_err(|_| err(s.len() - cp_part.len(), "quasicentral charge must be an integer"))?;
        let base = RingDescriptor::parse(base_part)
            .map_err(|e| err("virasoro:".len(), &e.to_string()))?;
        return Ok(InstanceSpec::Virasoro { base, cprime, lift });
    }
    Err(err(0, "unknown instance tag"))
}

/// Parses an instance spec, reporting the error position on failure.
pub fn parse_instance(s: &str) -> Result<InstanceSpec, SpecError> {
    parse_at(s.trim(), 0)
}

impl InstanceSpec {
    /// Builds the instance. `max_weight` is the truncation bound for
    /// graded constructions and the cap for tensor products; commutative
    /// carriers keep their declared degree.
    pub fn build(&self, max_weight: i64) -> Result<Instance, SpecError> {
        match self {
            InstanceSpec::Comm(r) => Ok(commutative_ring_instance(r)),
            InstanceSpec::CommHs { base, var, degree } => {
                Ok(divided_power_instance(base, var, *degree, *degree))
            }
            InstanceSpec::Virasoro { base, cprime, lift } => {
                let b = virasoro::build(&VirasoroParams {
                    base: base.clone(),
                    cprime: cprime.clone(),
                    lift: lift.clone(),
                    max_weight,
                });
                Ok(b.instance)
            }
            InstanceSpec::DSum(a, b) => {
                let left = a.build(max_weight)?;
                let right = b.build(max_weight)?;
                structure::direct_sum(&left, &right).map_err(|e| SpecError::Build(e.to_string()))
            }
            InstanceSpec::Tensor(a, b) => {
                let left = a.build(max_weight)?;
                let right = b.build(max_weight)?;
                structure::tensor_product(&left, &right, Some(max_weight))
                    .map_err(|e| SpecError::Build(e.to_string()))
            }
        }
    }
}
