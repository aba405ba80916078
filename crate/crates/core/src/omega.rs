//! Markings extended with ω.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::net::{Marking, PetriNet, TransitionId};

/// A natural number or ω. `Finite(_) < Omega`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaValue {
    Finite(BigUint),
    Omega,
}

impl OmegaValue {
    pub fn is_omega(&self) -> bool {
        matches!(self, OmegaValue::Omega)
    }

    pub fn ge_finite(&self, k: &BigUint) -> bool {
        match self {
            OmegaValue::Omega => true,
            OmegaValue::Finite(v) => v >= k,
        }
    }

    /// `self ⊕ k`.
    pub fn add(&self, k: &BigUint) -> OmegaValue {
        match self {
            OmegaValue::Omega => OmegaValue::Omega,
            OmegaValue::Finite(v) => OmegaValue::Finite(v + k),
        }
    }

    /// `self ⊖ k`, assuming `self ≥ k`.
    pub fn sub(&self, k: &BigUint) -> OmegaValue {
        match self {
            OmegaValue::Omega => OmegaValue::Omega,
            OmegaValue::Finite(v) => OmegaValue::Finite(v - k),
        }
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            OmegaValue::Finite(v) => Some(v),
            OmegaValue::Omega => None,
        }
    }
}

impl fmt::Display for OmegaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaValue::Finite(v) => write!(f, "{v}"),
            OmegaValue::Omega => f.write_str("ω"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmegaMarking(Vec<OmegaValue>);

impl OmegaMarking {
    pub fn from_values(values: Vec<OmegaValue>) -> Self {
        OmegaMarking(values)
    }

    pub fn values(&self) -> &[OmegaValue] {
        &self.0
    }

    pub fn get(&self, p: usize) -> &OmegaValue {
        &self.0[p]
    }

    pub fn set(&mut self, p: usize, v: OmegaValue) {
        self.0[p] = v;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Point-wise `self ≥ m`.
    pub fn covers_marking(&self, m: &Marking) -> bool {
        self.0.iter().zip(m.counts()).all(|(a, b)| a.ge_finite(b))
    }

    /// Point-wise `self ≤ other`.
    pub fn le(&self, other: &OmegaMarking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Point-wise comparison; `None` when incomparable.
    pub fn partial_cmp_pointwise(&self, other: &OmegaMarking) -> Option<Ordering> {
        let le = self.le(other);
        let ge = other.le(self);
        match (le, ge) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    pub fn omega_places(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, v)| v.is_omega()).map(|(p, _)| p)
    }

    pub fn is_enabled(&self, net: &PetriNet, t: TransitionId) -> bool {
        net.transition(t).pre.iter().zip(&self.0).all(|(w, v)| v.ge_finite(w))
    }

    /// ω-firing: `ω − k = ω`, `ω + k = ω`. Assumes `t` is enabled.
    pub fn fire(&self, net: &PetriNet, t: TransitionId) -> OmegaMarking {
        let tr = net.transition(t);
        OmegaMarking(
            self.0
                .iter()
                .zip(tr.pre.iter().zip(&tr.post))
                .map(|(v, (pre, post))| v.sub(pre).add(post))
                .collect(),
        )
    }

    /// Replaces every value above `cutoff` by ω.
    pub fn cut(mut self, cutoff: &BigUint) -> OmegaMarking {
        for v in &mut self.0 {
            if let OmegaValue::Finite(x) = v {
                if &*x > cutoff {
                    *v = OmegaValue::Omega;
                }
            }
        }
        self
    }

    /// Accelerates against a smaller ancestor: ω on every strictly larger place.
    pub fn accelerate_against(&mut self, ancestor: &OmegaMarking) -> bool {
        if !(ancestor.le(self) && ancestor != self) {
            return false;
        }
        let mut changed = false;
        for (v, a) in self.0.iter_mut().zip(&ancestor.0) {
            if &*v > a && !v.is_omega() {
                *v = OmegaValue::Omega;
                changed = true;
            }
        }
        changed
    }

    pub fn display<'a>(&'a self, net: &'a PetriNet) -> OmegaDisplay<'a> {
        OmegaDisplay { marking: self, net }
    }
}

impl From<&Marking> for OmegaMarking {
    fn from(m: &Marking) -> Self {
        OmegaMarking(m.counts().iter().cloned().map(OmegaValue::Finite).collect())
    }
}

pub struct OmegaDisplay<'a> {
    marking: &'a OmegaMarking,
    net: &'a PetriNet,
}

impl fmt::Display for OmegaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        let mut first = true;
        for (p, v) in self.marking.0.iter().enumerate() {
            if matches!(v, OmegaValue::Finite(x) if x.is_zero()) {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}:{}", self.net.place_name(p), v)?;
        }
        f.write_str(")")
    }
}

/// Inserts `m` into an antichain of maximal elements; returns false when
/// `m` is already dominated.
pub fn insert_maximal(set: &mut Vec<OmegaMarking>, m: OmegaMarking) -> bool {
    if set.iter().any(|s| m.le(s)) {
        return false;
    }
    set.retain(|s| !s.le(&m));
    set.push(m);
    true
}
