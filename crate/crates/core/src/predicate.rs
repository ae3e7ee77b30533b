use std::fmt;

use crate::qstate::BasisState;

/// Boolean condition over the bits of a basis state.
///
/// Serves both as the membership test of a two-outcome measurement and as the
/// classical control of a composite move operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    True,
    /// Bit is set (square or ancilla occupied).
    Occupied(usize),
    Not(Box<Predicate>),
    All(Vec<Predicate>),
    Any(Vec<Predicate>),
}

impl Predicate {
    pub fn occupied(i: usize) -> Predicate {
        Predicate::Occupied(i)
    }

    pub fn empty(i: usize) -> Predicate {
        Predicate::Not(Box::new(Predicate::Occupied(i)))
    }

    /// Every listed bit clear; true for an empty list.
    pub fn all_empty(bits: &[usize]) -> Predicate {
        Predicate::All(bits.iter().map(|&i| Predicate::empty(i)).collect())
    }

    /// At least one listed bit set; false for an empty list.
    pub fn any_occupied(bits: &[usize]) -> Predicate {
        Predicate::Any(bits.iter().map(|&i| Predicate::occupied(i)).collect())
    }

    pub fn and(self, other: Predicate) -> Predicate {
        Predicate::All(vec![self, other])
    }

    pub fn or(self, other: Predicate) -> Predicate {
        Predicate::Any(vec![self, other])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Predicate {
        Predicate::Not(Box::new(self))
    }

    pub fn eval(&self, b: &BasisState) -> bool {
        match self {
            Predicate::True => true,
            Predicate::Occupied(i) => b.get(*i),
            Predicate::Not(p) => !p.eval(b),
            Predicate::All(ps) => ps.iter().all(|p| p.eval(b)),
            Predicate::Any(ps) => ps.iter().any(|p| p.eval(b)),
        }
    }

    /// Largest bit index the predicate reads.
    pub fn max_bit(&self) -> Option<usize> {
        match self {
            Predicate::True => None,
            Predicate::Occupied(i) => Some(*i),
            Predicate::Not(p) => p.max_bit(),
            Predicate::All(ps) | Predicate::Any(ps) => {
                ps.iter().filter_map(Predicate::max_bit).max()
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |f: &mut fmt::Formatter<'_>, i: usize| match crate::Square::new(i as u8) {
            Some(s) if i < 64 => write!(f, "{s}"),
            _ => write!(f, "#{i}"),
        };
        let list = |f: &mut fmt::Formatter<'_>, ps: &[Predicate], sep: &str| {
            write!(f, "(")?;
            for (k, p) in ps.iter().enumerate() {
                if k > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            Predicate::True => write!(f, "true"),
            Predicate::Occupied(i) => bit(f, *i),
            Predicate::Not(p) => write!(f, "!{p}"),
            Predicate::All(ps) => list(f, ps, "&"),
            Predicate::Any(ps) => list(f, ps, "|"),
        }
    }
}
