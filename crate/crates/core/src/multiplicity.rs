//! Edge-class multiplicities: a positive integer or the countable infinity `omega`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Number of star edges of one class at a vertex, or a count of target edges
/// covered by a cell.
///
/// Finite values are at least one; `Omega` absorbs under both sum and product
/// and dominates every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Finite(u32),
    Omega,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity::Finite(1);

    pub fn finite(self) -> Option<u32> {
        match self {
            Multiplicity::Finite(n) => Some(n),
            Multiplicity::Omega => None,
        }
    }

    pub fn is_omega(self) -> bool {
        matches!(self, Multiplicity::Omega)
    }

    /// True when the value is at least `k`.
    pub fn at_least(self, k: u32) -> bool {
        match self {
            Multiplicity::Finite(n) => n >= k,
            Multiplicity::Omega => true,
        }
    }

    /// Subtracts a finite amount, saturating at zero. `Omega` is unchanged.
    pub fn saturating_sub(self, k: u32) -> Multiplicity {
        match self {
            Multiplicity::Finite(n) => Multiplicity::Finite(n.saturating_sub(k)),
            Multiplicity::Omega => Multiplicity::Omega,
        }
    }

    /// Number of instances to materialize in a concrete ball, replacing
    /// `Omega` by `cap`.
    pub fn capped(self, cap: u32) -> u32 {
        match self {
            Multiplicity::Finite(n) => n,
            Multiplicity::Omega => cap,
        }
    }

    /// Sum of an iterator of multiplicities; the empty sum is `Finite(0)`.
    pub fn sum<I: IntoIterator<Item = Multiplicity>>(iter: I) -> Multiplicity {
        iter.into_iter().fold(Multiplicity::Finite(0), |a, b| a + b)
    }
}

impl Add for Multiplicity {
    type Output = Multiplicity;

    fn add(self, rhs: Multiplicity) -> Multiplicity {
        match (self, rhs) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => a
                .checked_add(b)
                .map(Multiplicity::Finite)
                .unwrap_or(Multiplicity::Omega),
            _ => Multiplicity::Omega,
        }
    }
}

impl Mul for Multiplicity {
    type Output = Multiplicity;

    fn mul(self, rhs: Multiplicity) -> Multiplicity {
        match (self, rhs) {
            (Multiplicity::Finite(0), _) | (_, Multiplicity::Finite(0)) => Multiplicity::Finite(0),
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => a
                .checked_mul(b)
                .map(Multiplicity::Finite)
                .unwrap_or(Multiplicity::Omega),
            _ => Multiplicity::Omega,
        }
    }
}

impl PartialOrd for Multiplicity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Multiplicity {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => a.cmp(b),
            (Multiplicity::Finite(_), Multiplicity::Omega) => Ordering::Less,
            (Multiplicity::Omega, Multiplicity::Finite(_)) => Ordering::Greater,
            (Multiplicity::Omega, Multiplicity::Omega) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Omega => f.write_str("omega"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(n) => serializer.serialize_u32(*n),
            Multiplicity::Omega => serializer.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MultVisitor;

        impl Visitor<'_> for MultVisitor {
            type Value = Multiplicity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or the string \"omega\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Multiplicity, E> {
                if v == 0 {
                    return Err(E::custom("multiplicity must be at least 1"));
                }
                u32::try_from(v)
                    .map(Multiplicity::Finite)
                    .map_err(|_| E::custom("multiplicity too large; use \"omega\""))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Multiplicity, E> {
                if v <= 0 {
                    return Err(E::custom("multiplicity must be at least 1"));
                }
                self.visit_u64(v as u64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Multiplicity, E> {
                if v == "omega" {
                    Ok(Multiplicity::Omega)
                } else {
                    Err(E::custom(format!("unknown multiplicity symbol {v:?}")))
                }
            }
        }

        deserializer.deserialize_any(MultVisitor)
    }
}
