//! Runtime-tagged groups for the CLI and the Python bindings, where the
//! instance is chosen by name and mixed-instance calls must be rejected.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{
    AdditiveReals, FreeGroup2, Heisenberg, HeisenbergElement, LogPositive, MetricGroup,
    MultPositiveReals, Word,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    AdditiveReals,
    MultPositiveReals,
    FreeGroup2,
    Heisenberg,
}

impl GroupKind {
    pub const ALL: [GroupKind; 4] = [
        GroupKind::AdditiveReals,
        GroupKind::MultPositiveReals,
        GroupKind::FreeGroup2,
        GroupKind::Heisenberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupKind::AdditiveReals => "additive-reals",
            GroupKind::MultPositiveReals => "mult-positive-reals",
            GroupKind::FreeGroup2 => "free-group-2",
            GroupKind::Heisenberg => "heisenberg",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown group instance {0:?}")]
pub struct UnknownGroup(pub String);

impl FromStr for GroupKind {
    type Err = UnknownGroup;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownGroup(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyElement {
    Real(f64),
    Positive(LogPositive),
    Word(Word),
    Heisenberg(HeisenbergElement),
}

impl AnyElement {
    pub fn kind(&self) -> GroupKind {
        match self {
            AnyElement::Real(_) => GroupKind::AdditiveReals,
            AnyElement::Positive(_) => GroupKind::MultPositiveReals,
            AnyElement::Word(_) => GroupKind::FreeGroup2,
            AnyElement::Heisenberg(_) => GroupKind::Heisenberg,
        }
    }
}

impl fmt::Display for AnyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyElement::Real(v) => write!(f, "{v}"),
            AnyElement::Positive(p) => write!(f, "{p}"),
            AnyElement::Word(w) => write!(f, "{w}"),
            AnyElement::Heisenberg(h) => write!(f, "({}, {}, {})", h.x, h.y, h.z),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("element of {found} used with group {expected}")]
pub struct GroupMismatch {
    pub expected: GroupKind,
    pub found: GroupKind,
}

/// A group chosen at runtime. Every operation checks that its operands
/// belong to this instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnyGroup {
    kind: GroupKind,
}

macro_rules! dispatch {
    ($self:ident, $grp:ident, $wrap:ident, $body:expr) => {
        match $self.kind {
            GroupKind::AdditiveReals => {
                let $grp = AdditiveReals::new();
                let $wrap = AnyElement::Real;
                $body
            }
            GroupKind::MultPositiveReals => {
                let $grp = MultPositiveReals::new();
                let $wrap = AnyElement::Positive;
                $body
            }
            GroupKind::FreeGroup2 => {
                let $grp = FreeGroup2;
                let $wrap = AnyElement::Word;
                $body
            }
            GroupKind::Heisenberg => {
                let $grp = Heisenberg::new();
                let $wrap = AnyElement::Heisenberg;
                $body
            }
        }
    };
}

impl AnyGroup {
    pub fn new(kind: GroupKind) -> Self {
        Self { kind }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn check<'a>(&self, a: &'a AnyElement) -> Result<&'a AnyElement, GroupMismatch> {
        if a.kind() == self.kind {
            Ok(a)
        } else {
            Err(GroupMismatch { expected: self.kind, found: a.kind() })
        }
    }

    pub fn identity(&self) -> AnyElement {
        dispatch!(self, g, wrap, wrap(g.identity()))
    }

    pub fn tolerance(&self) -> f64 {
        dispatch!(self, g, _wrap, g.tolerance())
    }

    pub fn is_commutative(&self) -> bool {
        dispatch!(self, g, _wrap, g.is_commutative())
    }

    pub fn op(&self, a: &AnyElement, b: &AnyElement) -> Result<AnyElement, GroupMismatch> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (AnyElement::Real(x), AnyElement::Real(y)) => AnyElement::Real(AdditiveReals::new().op(x, y)),
            (AnyElement::Positive(x), AnyElement::Positive(y)) => {
                AnyElement::Positive(MultPositiveReals::new().op(x, y))
            }
            (AnyElement::Word(x), AnyElement::Word(y)) => AnyElement::Word(FreeGroup2.op(x, y)),
            (AnyElement::Heisenberg(x), AnyElement::Heisenberg(y)) => {
                AnyElement::Heisenberg(Heisenberg::new().op(x, y))
            }
            _ => unreachable!("kinds checked above"),
        })
    }

    pub fn inv(&self, a: &AnyElement) -> Result<AnyElement, GroupMismatch> {
        Ok(match self.check(a)? {
            AnyElement::Real(x) => AnyElement::Real(-x),
            AnyElement::Positive(x) => AnyElement::Positive(MultPositiveReals::new().inv(x)),
            AnyElement::Word(x) => AnyElement::Word(x.inverse()),
            AnyElement::Heisenberg(x) => AnyElement::Heisenberg(Heisenberg::new().inv(x)),
        })
    }

    pub fn dist(&self, a: &AnyElement, b: &AnyElement) -> Result<f64, GroupMismatch> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (AnyElement::Real(x), AnyElement::Real(y)) => AdditiveReals::new().dist(x, y),
            (AnyElement::Positive(x), AnyElement::Positive(y)) => MultPositiveReals::new().dist(x, y),
            (AnyElement::Word(x), AnyElement::Word(y)) => FreeGroup2.dist(x, y),
            (AnyElement::Heisenberg(x), AnyElement::Heisenberg(y)) => Heisenberg::new().dist(x, y),
            _ => unreachable!("kinds checked above"),
        })
    }

    /// `a_n · … · a_p` for `elements = [a_p, …, a_n]`.
    pub fn ordered_product(&self, elements: &[AnyElement]) -> Result<AnyElement, GroupMismatch> {
        for a in elements {
            self.check(a)?;
        }
        Ok(match self.kind {
            GroupKind::AdditiveReals => AnyElement::Real(
                AdditiveReals::new().ordered_product(&unwrap_all(elements, |a| match a {
                    AnyElement::Real(x) => *x,
                    _ => unreachable!(),
                })),
            ),
            GroupKind::MultPositiveReals => AnyElement::Positive(
                MultPositiveReals::new().ordered_product(&unwrap_all(elements, |a| match a {
                    AnyElement::Positive(x) => *x,
                    _ => unreachable!(),
                })),
            ),
            GroupKind::FreeGroup2 => AnyElement::Word(FreeGroup2.ordered_product(&unwrap_all(
                elements,
                |a| match a {
                    AnyElement::Word(x) => x.clone(),
                    _ => unreachable!(),
                },
            ))),
            GroupKind::Heisenberg => AnyElement::Heisenberg(
                Heisenberg::new().ordered_product(&unwrap_all(elements, |a| match a {
                    AnyElement::Heisenberg(x) => *x,
                    _ => unreachable!(),
                })),
            ),
        })
    }
}

fn unwrap_all<T>(elements: &[AnyElement], f: impl Fn(&AnyElement) -> T) -> Vec<T> {
    elements.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in GroupKind::ALL {
            assert_eq!(k.name().parse::<GroupKind>().unwrap(), k);
        }
        assert!("klein-four".parse::<GroupKind>().is_err());
    }

    #[test]
    fn mixing_instances_is_rejected() {
        let g = AnyGroup::new(GroupKind::AdditiveReals);
        let w = AnyElement::Word("ab".parse().unwrap());
        let err = g.op(&AnyElement::Real(1.0), &w).unwrap_err();
        assert_eq!(err.found, GroupKind::FreeGroup2);
        assert!(g.inv(&w).is_err());
        assert!(g.dist(&w, &w).is_err());
        assert!(g.ordered_product(&[AnyElement::Real(1.0), w]).is_err());
    }

    #[test]
    fn dispatches_to_the_typed_instance() {
        let f = AnyGroup::new(GroupKind::FreeGroup2);
        let a = AnyElement::Word("a".parse().unwrap());
        let b = AnyElement::Word("b".parse().unwrap());
        assert_eq!(f.ordered_product(&[a, b]).unwrap().to_string(), "ba");
        assert_eq!(f.identity().to_string(), "e");
        assert_eq!(AnyGroup::new(GroupKind::FreeGroup2).tolerance(), 0.0);
    }
}
