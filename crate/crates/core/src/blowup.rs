//! Kawamata blowup of a Type I centre: orbinates, lifted section classes and
//! the classes of the lifted equations.

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, ivec2, rat, solve_basis_change, IntMatrix2xN, Mat2, Rational, Vec2};
use crate::fano::{normalize_quotient, CentreType, FanoFamily, QuotientSingularity};
use crate::format::{unprojection_equation, unprojection_shape_check, UnprojectionRoles};
use crate::polyring::{Polynomial, Ring};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Name of the exceptional coordinate of the blowup.
pub const EXCEPTIONAL: &str = "t";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentreNormalForm {
    pub singularity: QuotientSingularity,
    pub s: String,
    pub xi: String,
    pub x1: String,
    pub x2: String,
}

/// Ideal coordinates of the unprojection divisor (named y1..y4 in the corpus).
pub fn ideal_coordinates(family: &FanoFamily) -> Vec<String> {
    let mut ys: Vec<String> =
        family.coordinates.iter().filter(|c| c.name.starts_with('y')).map(|c| c.name.clone()).collect();
    ys.sort();
    ys
}

pub fn centre_normal_form(family: &FanoFamily) -> Result<CentreNormalForm> {
    let id = &family.id;
    if family.fano_index != 2 {
        return invalid(format!("{id}: centre normal form needs index 2"));
    }
    let centre = match &family.centre {
        Some(c) if c.kind == CentreType::I => c,
        _ => return invalid(format!("{id}: no Type I centre")),
    };
    let a_s = family.weight_of(&centre.coordinate).unwrap();
    let ys = ideal_coordinates(family);
    let orb: Vec<(&str, i64)> = family
        .coordinates
        .iter()
        .filter(|c| c.name != centre.coordinate && !ys.contains(&c.name))
        .map(|c| (c.name.as_str(), c.weight))
        .collect();
    let Some(&(xi, _)) = orb.iter().find(|(n, w)| *n == "xi" && *w == 2) else {
        return invalid(format!("{id}: no weight-2 orbinate xi"));
    };
    let rest: Vec<&(&str, i64)> = orb.iter().filter(|(n, _)| *n != xi).collect();
    if rest.len() != 2 {
        return invalid(format!("{id}: expected three orbinates, found {}", orb.len()));
    }
    let (even, odd): (Vec<&&(&str, i64)>, Vec<_>) = rest.iter().partition(|(_, w)| w % 2 == 0);
    if even.len() != 1 || odd.len() != 1 {
        return invalid(format!("{id}: no valid orbinate parity split"));
    }
    let (x1, a1) = **even[0];
    let (x2, _) = **odd[0];
    // the local weights depend on a1 only: 1/a_s(1, a1/2, a_s - a1/2)
    let singularity = normalize_quotient(a_s, [2, a1, a_s - a1])?;
    Ok(CentreNormalForm {
        singularity,
        s: centre.coordinate.clone(),
        xi: xi.to_string(),
        x1: x1.to_string(),
        x2: x2.to_string(),
    })
}

/// Class k1 (-K_Y) + k2 E of a Cox coordinate of the blowup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionClass {
    pub k1: Rational,
    pub k2: Rational,
    /// False when k2 is only an upper bound.
    pub exact: bool,
}

impl SectionClass {
    pub fn vector(&self) -> Vec2 {
        [self.k1.clone(), self.k2.clone()]
    }
}

#[derive(Clone, Debug)]
pub struct Lift {
    pub centre: CentreNormalForm,
    pub classes: BTreeMap<String, SectionClass>,
    /// Vanishing orders along E, in units of E.
    pub orders: BTreeMap<String, Rational>,
    /// Ideal coordinates whose unprojection equation has no pure (xi, x1) monomial.
    pub impure: Vec<String>,
    pub fixpoint_iterations: usize,
}

const FIXPOINT_CAP: usize = 32;

/// Equations of the family with the exceptional variable set to 1.
pub fn unlifted_equations(family: &FanoFamily) -> Option<Vec<Polynomial>> {
    let eq = family.equations.as_ref()?;
    let t = eq.ring.index_of(EXCEPTIONAL)?;
    Some(eq.polys.iter().map(|p| p.substitute_value(t, &int(1))).collect())
}

fn monomial_order(e: &[u32], ring: &Ring, orders: &BTreeMap<String, Rational>) -> Option<Rational> {
    let mut o = int(0);
    for (i, &k) in e.iter().enumerate() {
        if k > 0 {
            o += orders.get(&ring.names()[i])? * int(k as i64);
        }
    }
    Some(o)
}

/// Section classes of all coordinates of the blowup.
///
/// Ideal coordinates with a pure (xi, x1) monomial get order d_j / 2a_s. The others
/// start at the bound m = 1/2 and are raised to the least monomial order of their
/// unprojection equation until stable; without equations they keep the bound.
pub fn lift_classes(family: &FanoFamily) -> Result<Lift> {
    let centre = centre_normal_form(family)?;
    let q = &centre.singularity;
    let a_s = q.r;
    let w = |n: &str| family.weight_of(n).ok_or_else(|| Error::Invalid(format!("no coordinate {n}")));
    let ys = ideal_coordinates(family);
    let mut orders: BTreeMap<String, Rational> = BTreeMap::new();
    orders.insert(centre.xi.clone(), rat(1, a_s));
    orders.insert(centre.x1.clone(), rat(q.weights[1], a_s));
    orders.insert(centre.x2.clone(), rat(w(&centre.x2)?, 2 * a_s) + rat(1, 2));
    orders.insert(centre.s.clone(), int(0));
    let mut pure: BTreeMap<String, bool> = BTreeMap::new();
    let xeqs = unlifted_equations(family);
    match (&family.equations, &xeqs) {
        (Some(eq), Some(_)) => {
            let weights: BTreeMap<String, i64> = family.coordinates.iter().map(|c| (c.name.clone(), c.weight)).collect();
            let roles = UnprojectionRoles {
                s: centre.s.clone(),
                ys: ys.clone(),
                xi: centre.xi.clone(),
                x1: centre.x1.clone(),
                t: Some(EXCEPTIONAL.to_string()),
            };
            let report = unprojection_shape_check(&eq.polys, &roles, &weights)?;
            for f in report.flags {
                pure.insert(f.y, f.has_pure_f);
            }
        }
        _ => {
            // parity: s y_j can only meet an even pure monomial when wt(s y_j) is even
            for y in &ys {
                pure.insert(y.clone(), (w(&centre.s)? + w(y)?) % 2 == 0);
            }
        }
    }
    let impure: Vec<String> = ys.iter().filter(|y| !pure[*y]).cloned().collect();
    for y in &ys {
        let wy = w(y)?;
        let o = if pure[y] { rat(a_s + wy, 2 * a_s) } else { rat(wy, 2 * a_s) + rat(1, 2) };
        orders.insert(y.clone(), o);
    }
    let mut iterations = 0;
    let mut converged = false;
    if let (Some(eq), Some(xeqs)) = (&family.equations, &xeqs) {
        let ring = &eq.ring;
        let s = ring.index_of(&centre.s).ok_or_else(|| Error::Invalid("centre not in equation ring".into()))?;
        while iterations < FIXPOINT_CAP {
            iterations += 1;
            let mut changed = false;
            for y in &impure {
                let yi = ring.index_of(y).ok_or_else(|| Error::Invalid(format!("{y} not in equation ring")))?;
                let Some(k) = unprojection_equation(&eq.polys, s, yi) else {
                    return invalid(format!("{}: no unprojection equation for {y}", family.id));
                };
                let mut best: Option<Rational> = None;
                for (e, _) in xeqs[k].terms() {
                    if e[s] == 1 && e[yi] == 1 && e.iter().sum::<u32>() == 2 {
                        continue;
                    }
                    let Some(o) = monomial_order(e, ring, &orders) else { continue };
                    best = Some(match best {
                        Some(b) if b <= o => b,
                        _ => o,
                    });
                }
                let new = best.ok_or_else(|| Error::Invalid(format!("empty unprojection equation for {y}")))?;
                if new > orders[y] {
                    orders.insert(y.clone(), new);
                    changed = true;
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }
    }
    let mut classes = BTreeMap::new();
    for c in &family.coordinates {
        let o = &orders[&c.name];
        let k2 = rat(c.weight, 2 * a_s) - o;
        let exact = !impure.contains(&c.name) || converged;
        classes.insert(c.name.clone(), SectionClass { k1: rat(c.weight, 2), k2, exact });
    }
    classes.insert(EXCEPTIONAL.to_string(), SectionClass { k1: int(0), k2: int(1), exact: true });
    Ok(Lift { centre, classes, orders, impure, fixpoint_iterations: iterations })
}

/// Outcome of matching lifted classes against a published grading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    /// R class = column for every exact class; `flipped` when the second row of
    /// the grading was negated first. `implied` lists the E-part forced on each
    /// inexact class.
    Solved { r: Mat2, flipped: bool, implied: BTreeMap<String, Rational> },
    Mismatch,
}

pub fn grading_consistency(grading: &IntMatrix2xN, classes: &BTreeMap<String, SectionClass>) -> Result<Consistency> {
    for flip in [false, true] {
        let col = |n: &str| -> Option<Vec2> {
            let (a, b) = grading.column(n)?;
            Some(ivec2(a, if flip { -b } else { b }))
        };
        let mut pairs = Vec::new();
        for (n, c) in classes {
            if !c.exact {
                continue;
            }
            let Some(v) = col(n) else {
                return invalid(format!("grading has no column {n}"));
            };
            pairs.push((c.vector(), v));
        }
        let Some(r) = solve_basis_change(&pairs)? else { continue };
        let inv = r.inverse().expect("invertible");
        let mut implied = BTreeMap::new();
        let mut ok = true;
        for (n, c) in classes.iter().filter(|(_, c)| !c.exact) {
            let v = col(n).ok_or_else(|| Error::Invalid(format!("grading has no column {n}")))?;
            let [k1, k2] = inv.apply(&v);
            // the class must agree in k1 and respect the bound on k2
            ok &= k1 == c.k1 && k2 <= c.k2;
            implied.insert(n.clone(), k2);
        }
        if ok && grading.labels().iter().all(|l| classes.contains_key(l)) {
            return Ok(Consistency::Solved { r, flipped: flip, implied });
        }
    }
    Ok(Consistency::Mismatch)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationClass {
    pub index: usize,
    pub m1: Rational,
    pub m2: Rational,
    /// The ideal coordinate y with s y in this equation, if any.
    pub unprojection: Option<String>,
}

#[derive(Clone, Debug)]
pub struct EquationClasses {
    pub classes: Vec<EquationClass>,
    pub three_free: bool,
}

/// Classes m1 (-K_Y) + m2 E of the lifted equations, read in the frame of the
/// xi and t columns of the grading.
pub fn equation_classes(family: &FanoFamily) -> Result<EquationClasses> {
    let eq = family.equations.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no equations", family.id)))?;
    let g = family.grading.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no grading", family.id)))?;
    let centre = centre_normal_form(family)?;
    let colv = |n: &str| g.column(n).ok_or_else(|| Error::Invalid(format!("grading has no column {n}")));
    let (xi, t) = (colv(&centre.xi)?, colv(EXCEPTIONAL)?);
    let r = Mat2::from_columns(&ivec2(xi.0, xi.1), &ivec2(t.0, t.1));
    let inv = r.inverse().ok_or(Error::RankDeficient)?;
    let rows: Vec<Vec<i64>> = (0..2)
        .map(|k| eq.ring.names().iter().map(|n| colv(n).map(|c| if k == 0 { c.0 } else { c.1 })).collect())
        .collect::<Result<_>>()?;
    let s = eq.ring.index_of(&centre.s).ok_or_else(|| Error::Invalid("centre not in equation ring".into()))?;
    let ys = ideal_coordinates(family);
    let mut classes = Vec::new();
    for (i, p) in eq.polys.iter().enumerate() {
        let Some(d) = p.multidegree(&rows)? else {
            return invalid(format!("{}: lifted equation {} is not bihomogeneous", family.id, i + 1));
        };
        let [m1, m2] = inv.apply(&ivec2(d[0], d[1]));
        let unprojection = ys
            .iter()
            .find(|y| eq.ring.index_of(y).is_some_and(|yi| unprojection_equation(&eq.polys[i..=i], s, yi).is_some()))
            .cloned();
        classes.push(EquationClass { index: i, m1, m2, unprojection });
    }
    Ok(EquationClasses { three_free: three_free(&classes), classes })
}

/// Exactly three unprojection equations free of E, every other equation with negative E-part.
pub fn three_free(classes: &[EquationClass]) -> bool {
    let free = classes.iter().filter(|c| c.unprojection.is_some() && c.m2.is_zero()).count();
    let pf_negative = classes.iter().filter(|c| c.unprojection.is_none()).all(|c| c.m2.is_negative());
    free == 3 && pf_negative
}

/// Pullback of the unlifted equations: each monomial is multiplied by the power of
/// t that brings its E-part up to the largest one in its equation.
pub fn pullback_equations(family: &FanoFamily, lift: &Lift) -> Result<(Arc<Ring>, Vec<Polynomial>)> {
    let eq = family.equations.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no equations", family.id)))?;
    let xeqs = unlifted_equations(family).ok_or_else(|| Error::Invalid("no exceptional variable".into()))?;
    let ring = eq.ring.clone();
    let t = ring.index_of(EXCEPTIONAL).unwrap();
    let k2: Vec<Rational> = ring
        .names()
        .iter()
        .map(|n| lift.classes.get(n).map(|c| c.k2.clone()).ok_or_else(|| Error::Invalid(format!("no class for {n}"))))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for p in &xeqs {
        let parts: Vec<(Vec<u32>, Rational, Rational)> = p
            .terms()
            .map(|(e, c)| {
                let mut s = int(0);
                for (i, &k) in e.iter().enumerate() {
                    s += &k2[i] * int(k as i64);
                }
                (e.clone(), c.clone(), s)
            })
            .collect();
        let top = parts.iter().map(|x| x.2.clone()).max().ok_or(Error::ZeroPolynomial)?;
        let mut terms = Vec::new();
        for (mut e, c, s) in parts {
            let gap = &top - &s;
            if !gap.is_integer() {
                return invalid(format!("{}: {} has no integral t-homogenization", family.id, p));
            }
            e[t] += crate::exactmath::to_i64(&gap).unwrap() as u32;
            terms.push((e, c));
        }
        out.push(Polynomial::from_terms(&ring, terms));
    }
    Ok((ring, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fano::{Centre, Coordinate};

    fn toy(coords: &[(&str, i64)], s: &str) -> FanoFamily {
        FanoFamily {
            id: "toy".into(),
            fano_index: 2,
            coordinates: coords.iter().map(|(n, w)| Coordinate { name: n.to_string(), weight: *w }).collect(),
            centre: Some(Centre { coordinate: s.into(), kind: CentreType::I }),
            grading: None,
            equations: None,
        }
    }

    #[test]
    fn normal_forms() {
        let f = toy(&[("x2", 1), ("xi", 2), ("y4", 2), ("y1", 3), ("x1", 4), ("y2", 5), ("y3", 7), ("s", 5)], "s");
        let c = centre_normal_form(&f).unwrap();
        assert_eq!(c.singularity.to_string(), "1/5(1,2,3)");
        assert_eq!((c.x1.as_str(), c.x2.as_str()), ("x1", "x2"));
        let f = toy(&[("y1", 1), ("y2", 1), ("x2", 1), ("xi", 2), ("y4", 2), ("x1", 2), ("y3", 3), ("s", 3)], "s");
        assert_eq!(centre_normal_form(&f).unwrap().singularity.to_string(), "1/3(1,1,2)");
        let f = toy(&[("x2", 2), ("xi", 2), ("x1", 4), ("y1", 3), ("s", 5)], "s");
        assert!(centre_normal_form(&f).is_err());
    }

    #[test]
    fn classes_without_equations() {
        let f = toy(&[("x2", 1), ("xi", 2), ("y4", 2), ("y1", 3), ("x1", 4), ("y2", 5), ("y3", 7), ("s", 5)], "s");
        let l = lift_classes(&f).unwrap();
        let c = |n: &str| l.classes[n].clone();
        assert_eq!((c("xi").k1, c("xi").k2), (int(1), int(0)));
        assert_eq!((c("x1").k1, c("x1").k2), (int(2), int(0)));
        assert_eq!((c("x2").k1, c("x2").k2), (rat(1, 2), rat(-1, 2)));
        assert_eq!((c("s").k1, c("s").k2), (rat(5, 2), rat(1, 2)));
        assert_eq!((c("y1").k1, c("y1").k2), (rat(3, 2), rat(-1, 2)));
        assert!(!c("y4").exact);
        assert_eq!(l.impure, vec!["y4"]);
    }

    #[test]
    fn consistency_identity_and_mismatch() {
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), SectionClass { k1: int(1), k2: int(0), exact: true });
        m.insert("b".to_string(), SectionClass { k1: int(0), k2: int(1), exact: true });
        let g = IntMatrix2xN::new(vec!["a".into(), "b".into()], vec![1, 0], vec![0, 1]).unwrap();
        match grading_consistency(&g, &m).unwrap() {
            Consistency::Solved { r, flipped, .. } => {
                assert_eq!(r, Mat2::identity());
                assert!(!flipped);
            }
            Consistency::Mismatch => panic!(),
        }
        m.insert("c".to_string(), SectionClass { k1: int(1), k2: int(1), exact: true });
        let g = IntMatrix2xN::new(vec!["a".into(), "b".into(), "c".into()], vec![1, 0, 1], vec![0, 1, 2]).unwrap();
        assert_eq!(grading_consistency(&g, &m).unwrap(), Consistency::Mismatch);
    }

    fn family(id: &str) -> FanoFamily {
        crate::corpus::Corpus::embedded().unwrap().record(id).unwrap().family().unwrap()
    }

    #[test]
    fn lift_39961() {
        let f = family("#39961");
        let l = lift_classes(&f).unwrap();
        let c = |n: &str| (l.classes[n].k1.clone(), l.classes[n].k2.clone(), l.classes[n].exact);
        assert_eq!(c("xi"), (int(1), int(0), true));
        assert_eq!(c("y1"), (rat(3, 2), rat(-1, 2), true));
        assert_eq!(c("y4"), (int(1), int(-1), true));
        assert_eq!(c("t"), (int(0), int(1), true));
        let ec = equation_classes(&f).unwrap();
        assert!(ec.three_free);
        assert!(ec.classes.iter().filter(|c| c.unprojection.is_none()).all(|c| c.m2 < int(0)));
        let free: Vec<_> = ec.classes.iter().filter(|c| c.m2.is_zero()).map(|c| c.m1.clone()).collect();
        assert_eq!(free, vec![int(4), int(5), int(6)]);
    }

    #[test]
    fn consistency_39961() {
        let f = family("#39961");
        let l = lift_classes(&f).unwrap();
        let g = f.grading.clone().unwrap();
        let Consistency::Solved { r, .. } = grading_consistency(&g, &l.classes).unwrap() else { panic!() };
        assert_eq!(r.apply(&l.classes["xi"].vector()), ivec2(2, 1));
        assert_eq!(r.apply(&l.classes["y3"].vector()), ivec2(7, 3));
        let mut bottom = g.rows()[1].clone();
        bottom[4] += 1;
        let bad = IntMatrix2xN::new(g.labels().to_vec(), g.rows()[0].clone(), bottom).unwrap();
        assert_eq!(grading_consistency(&bad, &l.classes).unwrap(), Consistency::Mismatch);
    }

    #[test]
    fn four_free_is_not_three_free() {
        let c = |m2: i64, u: Option<&str>| EquationClass { index: 0, m1: int(4), m2: int(m2), unprojection: u.map(String::from) };
        let mut v = vec![c(0, Some("y1")), c(0, Some("y2")), c(0, Some("y3")), c(-1, Some("y4")), c(-1, None)];
        assert!(three_free(&v));
        v[3].m2 = int(0);
        assert!(!three_free(&v));
    }

    #[test]
    fn pullback_saturates_to_lifted_equations() {
        use crate::polyring::{Budget, Ideal, MonomialOrder};
        let f = family("#39961");
        let l = lift_classes(&f).unwrap();
        let (ring, pb) = pullback_equations(&f, &l).unwrap();
        let g = f.grading.as_ref().unwrap();
        let w: Vec<i64> = ring.names().iter().map(|n| g.column(n).map(|(a, b)| a + b).unwrap()).collect();
        let order = MonomialOrder::Grevlex(w.clone());
        let mut b = Budget::new(2_000_000);
        let sat = Ideal::new(&ring, pb).saturate(ring.index_of("t").unwrap(), Some(&w), &mut b).unwrap();
        let y = Ideal::new(&ring, f.equations.clone().unwrap().polys).with_default_order(order);
        assert!(sat.equals(&y, &mut b).unwrap());
    }
}
