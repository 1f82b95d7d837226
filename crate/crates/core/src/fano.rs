//! Family records, cyclic quotient singularities and the lcm criterion.

use crate::error::{invalid, Error, Result};
use crate::exactmath::IntMatrix2xN;
use crate::polyring::{Polynomial, Ring};
use num_integer::Integer;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CentreType {
    I,
    II2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Centre {
    pub coordinate: String,
    pub kind: CentreType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinate {
    pub name: String,
    pub weight: i64,
}

/// Equations of the blown-up model, in the ring of the grading columns.
#[derive(Clone, Debug)]
pub struct LiftedEquations {
    pub ring: Arc<Ring>,
    pub polys: Vec<Polynomial>,
}

/// One family record with its optional payloads.
#[derive(Clone, Debug)]
pub struct FanoFamily {
    pub id: String,
    pub fano_index: i64,
    pub coordinates: Vec<Coordinate>,
    pub centre: Option<Centre>,
    pub grading: Option<IntMatrix2xN>,
    pub equations: Option<LiftedEquations>,
}

impl FanoFamily {
    pub fn weights(&self) -> Vec<i64> {
        self.coordinates.iter().map(|c| c.weight).collect()
    }

    pub fn sorted_weights(&self) -> Vec<i64> {
        let mut w = self.weights();
        w.sort_unstable();
        w
    }

    pub fn weight_of(&self, name: &str) -> Option<i64> {
        self.coordinates.iter().find(|c| c.name == name).map(|c| c.weight)
    }

    /// Checks the record invariants: positive weights, distinct names, the centre
    /// among the coordinates, and bihomogeneous equations.
    pub fn validate(&self) -> Result<()> {
        if self.fano_index < 1 {
            return invalid(format!("{}: fano_index must be positive", self.id));
        }
        for (i, c) in self.coordinates.iter().enumerate() {
            if c.weight <= 0 {
                return invalid(format!("{}: coordinate {} has weight {}", self.id, c.name, c.weight));
            }
            if self.coordinates[..i].iter().any(|d| d.name == c.name) {
                return invalid(format!("{}: duplicate coordinate {}", self.id, c.name));
            }
        }
        if let Some(c) = &self.centre {
            if self.weight_of(&c.coordinate).is_none() {
                return invalid(format!("{}: centre {} is not a coordinate", self.id, c.coordinate));
            }
        }
        if let Some(eq) = &self.equations {
            let g = self
                .grading
                .as_ref()
                .ok_or_else(|| Error::Invalid(format!("{}: equations need a grading", self.id)))?;
            let rows: Vec<Vec<i64>> = eq
                .ring
                .names()
                .iter()
                .map(|n| g.column(n).map(|(a, b)| vec![a, b]))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Invalid(format!("{}: equation ring differs from grading", self.id)))?;
            let rows = vec![
                rows.iter().map(|c| c[0]).collect::<Vec<_>>(),
                rows.iter().map(|c| c[1]).collect::<Vec<_>>(),
            ];
            for (k, p) in eq.polys.iter().enumerate() {
                if p.multidegree(&rows)?.is_none() {
                    return invalid(format!("{}: equation {} is not homogeneous: {}", self.id, k + 1, p));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solidity {
    NonSolid,
    Inconclusive,
}

/// NONSOLID iff lcm of the two smallest weights is below the index.
pub fn lcm_criterion(weights: &[i64], index: i64) -> Result<Solidity> {
    if weights.len() < 2 {
        return invalid("lcm criterion needs at least two weights");
    }
    let mut w = weights.to_vec();
    w.sort_unstable();
    Ok(if w[0].lcm(&w[1]) < index { Solidity::NonSolid } else { Solidity::Inconclusive })
}

pub fn weight_one_count(family: &FanoFamily) -> usize {
    family.coordinates.iter().filter(|c| c.weight == 1).count()
}

/// Cyclic quotient singularity 1/r(a, b, c).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSingularity {
    pub r: i64,
    pub weights: [i64; 3],
}

impl fmt::Display for QuotientSingularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.weights;
        write!(f, "1/{}({},{},{})", self.r, a, b, c)
    }
}

/// Rescales so the first weight is 1: 1/r(1, kb mod r, kc mod r).
pub fn normalize_quotient(r: i64, w: [i64; 3]) -> Result<QuotientSingularity> {
    if r < 1 {
        return invalid("quotient order must be positive");
    }
    let a = w[0].rem_euclid(r);
    let e = a.extended_gcd(&r);
    if e.gcd != 1 {
        return invalid(format!("weight {} is not invertible mod {}", w[0], r));
    }
    if (w[1] + w[2]).rem_euclid(r) != 0 {
        return invalid(format!("1/{r}({},{},{}) is not in reducible form", w[0], w[1], w[2]));
    }
    let k = e.x.rem_euclid(r);
    let b = (k * w[1]).rem_euclid(r);
    let c = (k * w[2]).rem_euclid(r);
    Ok(QuotientSingularity { r, weights: [1, b, c] })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TerminalCheck {
    Ok,
    Reject(String),
}

/// Index-2 centres must have odd order and be isolated.
pub fn terminal_odd_order_check(s: &QuotientSingularity, index: i64) -> TerminalCheck {
    if index == 2 && s.r % 2 == 0 {
        return TerminalCheck::Reject(format!("even order {}", s.r));
    }
    if s.weights.iter().any(|&w| w.gcd(&s.r) != 1) {
        return TerminalCheck::Reject(format!("{s} is not isolated"));
    }
    TerminalCheck::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_criterion(&[1, 1, 1, 2, 2, 2, 3, 3], 2).unwrap(), Solidity::NonSolid);
        assert_eq!(lcm_criterion(&[2, 2, 3, 5, 5, 7, 12, 17], 2).unwrap(), Solidity::Inconclusive);
        assert_eq!(lcm_criterion(&[3, 2, 5], 7).unwrap(), Solidity::NonSolid);
        assert!(lcm_criterion(&[1], 2).is_err());
    }

    #[test]
    fn quotient_examples() {
        let q = normalize_quotient(5, [2, 4, 1]).unwrap();
        assert_eq!(q.to_string(), "1/5(1,2,3)");
        assert_eq!(normalize_quotient(3, [1, 1, 2]).unwrap().weights, [1, 1, 2]);
        assert_eq!(normalize_quotient(17, [2, 12, 5]).unwrap().weights, [1, 6, 11]);
        assert!(normalize_quotient(4, [2, 1, 3]).is_err());
        assert!(normalize_quotient(5, [1, 1, 1]).is_err());
    }

    #[test]
    fn terminal_examples() {
        let q = |r, w| QuotientSingularity { r, weights: w };
        assert_eq!(terminal_odd_order_check(&q(5, [1, 2, 3]), 2), TerminalCheck::Ok);
        assert!(matches!(terminal_odd_order_check(&q(4, [1, 1, 3]), 2), TerminalCheck::Reject(_)));
        assert_eq!(terminal_odd_order_check(&q(2, [1, 1, 1]), 1), TerminalCheck::Ok);
        assert!(matches!(terminal_odd_order_check(&q(9, [1, 3, 6]), 2), TerminalCheck::Reject(_)));
    }
}
