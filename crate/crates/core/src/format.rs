//! Tom formats, weight configurations and the shape of unprojection equations.

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, Rational};
use crate::polyring::{Degree, DegreeMatrix, GradedSkewMatrix, Polynomial, Ring};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Tom_k: every entry off row and column k lies in the ideal of `ideal_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TomFormat {
    pub k: usize,
    pub ideal_vars: Vec<String>,
}

impl TomFormat {
    pub fn new(k: usize, ideal_vars: Vec<String>) -> Result<Self> {
        if !(1..=5).contains(&k) {
            return invalid(format!("Tom index {k} out of range"));
        }
        Ok(TomFormat { k, ideal_vars })
    }

    /// Indices in Tom_1 position order: k first, then the rest ascending (0-based).
    pub fn labeling(&self) -> [usize; 5] {
        tom_labeling(self.k)
    }

    pub fn check(&self, m: &GradedSkewMatrix) -> Result<bool> {
        let ring = m.ring();
        let ideal: Vec<usize> = self
            .ideal_vars
            .iter()
            .map(|v| ring.index_of(v).ok_or_else(|| Error::Invalid(format!("unknown ideal variable {v}"))))
            .collect::<Result<_>>()?;
        let k = self.k - 1;
        for i in 0..5 {
            for j in i + 1..5 {
                if i == k || j == k {
                    continue;
                }
                let in_ideal = m.entries()[i][j].terms().all(|(e, _)| ideal.iter().any(|&v| e[v] > 0));
                if !in_ideal {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn tom_labeling(k: usize) -> [usize; 5] {
    let mut p = [0; 5];
    p[0] = k - 1;
    let mut n = 1;
    for i in 0..5 {
        if i != k - 1 {
            p[n] = i;
            n += 1;
        }
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigLabel {
    A,
    B,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightConfiguration {
    pub label: ConfigLabel,
    pub pivot: Option<i64>,
}

impl fmt::Display for WeightConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.label, self.pivot) {
            (ConfigLabel::A, Some(p)) => write!(f, "A (pi = {p})"),
            (ConfigLabel::B, Some(p)) => write!(f, "B (pi = {p})"),
            _ => write!(f, "NONE"),
        }
    }
}

fn entry(deg: &DegreeMatrix, p: &[usize; 5], i: usize, j: usize) -> Option<i64> {
    let (a, b) = (p[i - 1], p[j - 1]);
    deg[a][b].or(deg[b][a])
}

/// Configuration of the degree matrix of a Tom_k matrix, read in Tom_1 labels.
pub fn detect_configuration(deg: &DegreeMatrix, k: usize) -> Result<WeightConfiguration> {
    if !(1..=5).contains(&k) {
        return invalid(format!("Tom index {k} out of range"));
    }
    let p = tom_labeling(k);
    let e = |i, j| entry(deg, &p, i, j);
    let four = [e(2, 4), e(2, 5), e(3, 4), e(3, 5)];
    if let Some(pi) = four[0] {
        if four.iter().all(|x| *x == Some(pi)) {
            return Ok(WeightConfiguration { label: ConfigLabel::A, pivot: Some(pi) });
        }
    }
    match (e(2, 5), e(3, 4)) {
        (Some(a), Some(b)) if a == b => Ok(WeightConfiguration { label: ConfigLabel::B, pivot: Some(a) }),
        _ => Ok(WeightConfiguration { label: ConfigLabel::None, pivot: None }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FindingKind {
    Square,
    Product,
    QuadraticForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub variables: Vec<String>,
    pub kind: FindingKind,
    pub pfaffian: usize,
    /// The monomial (or rank-2 form) was located in the Pfaffian of a filled matrix.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct PowerReport {
    pub configuration: WeightConfiguration,
    pub findings: Vec<Finding>,
}

/// Pure powers forced in Pf_k by the weight configuration. Each finding is checked
/// against the Pfaffian of a matrix filled as in the configuration's construction.
pub fn pure_power_report(deg: &DegreeMatrix, k: usize, ideal: &[(String, i64)]) -> Result<PowerReport> {
    let configuration = detect_configuration(deg, k)?;
    let Some(pi) = configuration.pivot else {
        return Ok(PowerReport { configuration, findings: vec![] });
    };
    let ys: Vec<String> = ideal.iter().filter(|(_, w)| *w == pi).map(|(n, _)| n.clone()).collect();
    let f = |vars: &[&String], kind| Finding {
        variables: vars.iter().map(|s| s.to_string()).collect(),
        kind,
        pfaffian: k,
        certified: false,
    };
    let mut findings = match (configuration.label, ys.len()) {
        (ConfigLabel::B, 1) => vec![f(&[&ys[0]], FindingKind::Square)],
        (ConfigLabel::B, 2) => vec![f(&[&ys[0], &ys[1]], FindingKind::Product)],
        (ConfigLabel::A, 2) => vec![f(&[&ys[0], &ys[1]], FindingKind::QuadraticForm)],
        (ConfigLabel::A, 3) => vec![
            f(&[&ys[2]], FindingKind::Square),
            f(&[&ys[0], &ys[1]], FindingKind::QuadraticForm),
        ],
        _ => vec![],
    };
    if findings.is_empty() {
        return Ok(PowerReport { configuration, findings });
    }
    let pf = filled_matrix(configuration.label, k, &ys)?.pfaffians()?.swap_remove(k - 1);
    for fd in &mut findings {
        fd.certified = locate(&pf, fd)?;
    }
    Ok(PowerReport { configuration, findings })
}

/// Matrix with generic entries except the pivot entries, filled with the ideal variables.
fn filled_matrix(label: ConfigLabel, k: usize, ys: &[String]) -> Result<GradedSkewMatrix> {
    let p = tom_labeling(k);
    let mut names: Vec<String> = ys.to_vec();
    for i in 1..=5 {
        for j in i + 1..=5 {
            names.push(format!("m{i}{j}"));
        }
    }
    let ring = Ring::new(&names);
    let v = |n: usize| Polynomial::var(&ring, n);
    let mut slot: BTreeMap<(usize, usize), Polynomial> = BTreeMap::new();
    let mut n = ys.len();
    for i in 1..=5 {
        for j in i + 1..=5 {
            slot.insert((i, j), v(n));
            n += 1;
        }
    }
    match (label, ys.len()) {
        (ConfigLabel::B, 1) => {
            slot.insert((2, 5), v(0));
            slot.insert((3, 4), v(0));
        }
        (ConfigLabel::B, 2) => {
            slot.insert((2, 5), v(0));
            slot.insert((3, 4), v(1));
        }
        (ConfigLabel::A, 2 | 3) => {
            let y3 = if ys.len() == 3 { v(2) } else { Polynomial::zero(&ring) };
            slot.insert((2, 4), v(0));
            slot.insert((3, 5), v(1));
            slot.insert((2, 5), &(&v(0) + &v(1)) + &y3);
            slot.insert((3, 4), &(&v(0) - &v(1)) + &y3);
        }
        _ => return invalid("no filling for this configuration"),
    }
    let mut m = vec![vec![Polynomial::zero(&ring); 5]; 5];
    for ((i, j), e) in slot {
        let (a, b) = (p[i - 1], p[j - 1]);
        m[b][a] = -&e;
        m[a][b] = e;
    }
    GradedSkewMatrix::new(m, None, None)
}

fn locate(pf: &Polynomial, f: &Finding) -> Result<bool> {
    let ring = pf.ring();
    let idx = |s: &String| ring.index_of(s).ok_or_else(|| Error::Invalid(format!("unknown variable {s}")));
    let n = ring.nvars();
    match f.kind {
        FindingKind::Square | FindingKind::Product => {
            let mut e = vec![0u32; n];
            for v in &f.variables {
                e[idx(v)?] += 1;
            }
            if f.kind == FindingKind::Square {
                e[idx(&f.variables[0])?] = 2;
            }
            Ok(!pf.coefficient(&e).is_zero())
        }
        FindingKind::QuadraticForm => {
            let keep: Vec<usize> = f.variables.iter().map(idx).collect::<Result<_>>()?;
            let vals: Vec<(usize, Rational)> =
                (0..n).filter(|i| !keep.contains(i)).map(|i| (i, int(0))).collect();
            let mut q = pf.clone();
            for (i, c) in &vals {
                q = q.substitute_value(*i, c);
            }
            let (a, b) = (keep[0], keep[1]);
            let mono = |i: u32, j: u32| {
                let mut e = vec![0u32; n];
                e[a] = i;
                e[b] = j;
                q.coefficient(&e)
            };
            let (qa, qb, qc) = (mono(2, 0), mono(1, 1), mono(0, 2));
            let quadratic = q.terms().all(|(e, _)| e[a] + e[b] == 2);
            Ok(quadratic && &qb * &qb - int(4) * &qa * &qc != int(0))
        }
    }
}

/// Names playing the roles of the unprojection variable, the ideal variables
/// and the orbinates.
#[derive(Clone, Debug)]
pub struct UnprojectionRoles {
    pub s: String,
    pub ys: Vec<String>,
    pub xi: String,
    pub x1: String,
    /// Exceptional variable tolerated in pure monomials of lifted equations.
    pub t: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeFlag {
    pub y: String,
    pub equation: usize,
    pub has_pure_f: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeReport {
    pub flags: Vec<ShapeFlag>,
    pub pass: bool,
}

/// Index of the equation containing the monomial s*y, if any.
pub fn unprojection_equation(eqs: &[Polynomial], s: usize, y: usize) -> Option<usize> {
    let n = eqs.first()?.ring().nvars();
    let mut e = vec![0u32; n];
    e[s] = 1;
    e[y] = 1;
    eqs.iter().position(|p| !p.coefficient(&e).is_zero())
}

/// Flags each unprojection equation s y_j = g_j whose g_j has a monomial purely
/// in the two even orbinates; PASS iff at least three are flagged.
pub fn unprojection_shape_check(
    eqs: &[Polynomial],
    roles: &UnprojectionRoles,
    weights: &BTreeMap<String, i64>,
) -> Result<ShapeReport> {
    let Some(ring) = eqs.first().map(|p| p.ring().clone()) else {
        return invalid("no equations");
    };
    let idx = |s: &str| ring.index_of(s).ok_or_else(|| Error::Invalid(format!("unknown variable {s}")));
    let w = |s: &str| weights.get(s).copied().ok_or_else(|| Error::Invalid(format!("no weight for {s}")));
    if w(&roles.x1)? % 2 != 0 {
        return invalid("unprojection shape check needs wt(x1) even");
    }
    let s = idx(&roles.s)?;
    let pure: Vec<usize> = [Some(&roles.xi), Some(&roles.x1), roles.t.as_ref()]
        .into_iter()
        .flatten()
        .map(|v| idx(v))
        .collect::<Result<_>>()?;
    let (xi, x1) = (idx(&roles.xi)?, idx(&roles.x1)?);
    let mut flags = Vec::new();
    for y in &roles.ys {
        let yi = idx(y)?;
        let Some(k) = unprojection_equation(eqs, s, yi) else { continue };
        let even = (w(&roles.s)? + w(y)?) % 2 == 0;
        let has = eqs[k].terms().any(|(e, _)| {
            e.iter().enumerate().all(|(i, &x)| x == 0 || pure.contains(&i)) && (e[xi] > 0 || e[x1] > 0)
        });
        flags.push(ShapeFlag { y: y.clone(), equation: k, has_pure_f: even && has });
    }
    if flags.len() < 4 {
        return invalid(format!("found {} unprojection equations, expected 4", flags.len()));
    }
    let pass = flags.iter().filter(|f| f.has_pure_f).count() >= 3;
    Ok(ShapeReport { flags, pass })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommonZero {
    Empty,
    /// Common zero at the point where x1 vanishes, where xi vanishes, or on the
    /// torus (with the degree of the gcd of the dehomogenized forms).
    NonEmpty { at_xi_point: bool, at_x1_point: bool, torus_degree: usize },
}

/// Decides whether binary forms in (xi, x1) have a common zero on P(a_xi, a_x1).
pub fn common_zero_check(fs: &[Polynomial], xi: usize, x1: usize, weights: (i64, i64)) -> Result<CommonZero> {
    let (a, b) = weights;
    if a <= 0 || b <= 0 {
        return invalid("weights must be positive");
    }
    // xi exponents of one form differ by multiples of b1
    let b1 = b / num_integer::gcd(a, b);
    let mut xi_pt = true;
    let mut x1_pt = true;
    let mut gcd: Option<Vec<Rational>> = None;
    for f in fs {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if f.terms().any(|(e, _)| e.iter().enumerate().any(|(i, &x)| x > 0 && i != xi && i != x1)) {
            return invalid(format!("{f} involves variables other than the two orbinates"));
        }
        if f.weighted_degree(&axis_weights(f.ring().nvars(), xi, x1, a, b))? == Degree::Nonhomogeneous {
            return invalid(format!("{f} is not homogeneous"));
        }
        // the point (1:0) kills every term containing x1
        if f.terms().any(|(e, _)| e[x1] == 0) {
            xi_pt = false;
        }
        if f.terms().any(|(e, _)| e[xi] == 0) {
            x1_pt = false;
        }
        // f = xi^i0 x1^j * F(u) with u = xi^b1 / x1^a1
        let i0 = f.terms().map(|(e, _)| e[xi]).min().unwrap() as i64;
        let mut coeffs: Vec<Rational> = Vec::new();
        for (e, c) in f.terms() {
            let k = ((e[xi] as i64 - i0) / b1) as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, int(0));
            }
            coeffs[k] = c.clone();
        }
        let poly = monic(coeffs);
        gcd = Some(match gcd {
            None => poly,
            Some(h) => upoly_gcd(h, poly),
        });
    }
    let torus_degree = gcd.map(|h| h.len().saturating_sub(1)).unwrap_or(0);
    if !xi_pt && !x1_pt && torus_degree == 0 {
        Ok(CommonZero::Empty)
    } else {
        Ok(CommonZero::NonEmpty { at_xi_point: xi_pt, at_x1_point: x1_pt, torus_degree })
    }
}

fn axis_weights(n: usize, xi: usize, x1: usize, a: i64, b: i64) -> Vec<i64> {
    let mut w = vec![0; n];
    w[xi] = a;
    w[x1] = b;
    w
}

fn monic(mut p: Vec<Rational>) -> Vec<Rational> {
    if let Some(l) = p.last().cloned() {
        for c in &mut p {
            *c = &*c / &l;
        }
    }
    p
}

fn upoly_gcd(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Vec<Rational> {
    while !b.is_empty() {
        let mut r = a.clone();
        while r.len() >= b.len() && !r.is_empty() {
            let q = r.last().unwrap() / b.last().unwrap();
            let shift = r.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &q * c;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        a = b;
        b = r;
    }
    monic(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(rows: [[i64; 4]; 4]) -> DegreeMatrix {
        let mut m: DegreeMatrix = [[None; 5]; 5];
        for i in 0..4 {
            for j in i..4 {
                m[i][j + 1] = Some(rows[i][j - i]);
                m[j + 1][i] = Some(rows[i][j - i]);
            }
        }
        m
    }

    #[test]
    fn configurations() {
        let m1405 = d([[3, 3, 4, 4], [4, 5, 5, 0], [5, 5, 0, 0], [6, 0, 0, 0]]);
        let c = detect_configuration(&m1405, 1).unwrap();
        assert_eq!((c.label, c.pivot), (ConfigLabel::A, Some(5)));
        let m569 = d([[3, 4, 5, 6], [5, 6, 7, 0], [7, 8, 0, 0], [9, 0, 0, 0]]);
        let c = detect_configuration(&m569, 1).unwrap();
        assert_eq!((c.label, c.pivot), (ConfigLabel::B, Some(7)));
        let distinct = d([[1, 2, 3, 4], [5, 6, 7, 0], [8, 9, 0, 0], [10, 0, 0, 0]]);
        assert_eq!(detect_configuration(&distinct, 1).unwrap().label, ConfigLabel::None);
    }

    #[test]
    fn reports() {
        let m569 = d([[3, 4, 5, 6], [5, 6, 7, 0], [7, 8, 0, 0], [9, 0, 0, 0]]);
        let r = pure_power_report(&m569, 1, &[("y3".into(), 7), ("y1".into(), 3)]).unwrap();
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].kind, FindingKind::Square);
        assert_eq!(r.findings[0].variables, vec!["y3"]);
        assert!(r.findings[0].certified);
        let m1405 = d([[3, 3, 4, 4], [4, 5, 5, 0], [5, 5, 0, 0], [6, 0, 0, 0]]);
        let ys: Vec<(String, i64)> = ["y1", "y2", "y3"].iter().map(|s| (s.to_string(), 5)).collect();
        let r = pure_power_report(&m1405, 1, &ys).unwrap();
        assert_eq!(r.findings[0].kind, FindingKind::Square);
        assert_eq!(r.findings[0].variables, vec!["y3"]);
        assert_eq!(r.findings[1].kind, FindingKind::QuadraticForm);
        assert!(r.findings.iter().all(|f| f.certified));
        let distinct = d([[1, 2, 3, 4], [5, 6, 7, 0], [8, 9, 0, 0], [10, 0, 0, 0]]);
        assert!(pure_power_report(&distinct, 1, &ys).unwrap().findings.is_empty());
    }

    #[test]
    fn common_zeros() {
        let r = Ring::new(&["xi", "x1"]);
        let p = |s| r.parse(s).unwrap();
        assert_eq!(common_zero_check(&[p("x1^2"), p("xi^6")], 0, 1, (2, 4)).unwrap(), CommonZero::Empty);
        assert!(matches!(common_zero_check(&[p("xi*x1")], 0, 1, (2, 4)).unwrap(), CommonZero::NonEmpty { .. }));
        assert_eq!(common_zero_check(&[p("xi^4 - x1^2"), p("xi^4 + x1^2")], 0, 1, (2, 4)).unwrap(), CommonZero::Empty);
        assert_eq!(
            common_zero_check(&[p("xi^4 - x1^2"), p("xi^6 - xi^2*x1^2")], 0, 1, (2, 4)).unwrap(),
            CommonZero::NonEmpty { at_xi_point: false, at_x1_point: false, torus_degree: 2 }
        );
        assert!(common_zero_check(&[Polynomial::zero(&r)], 0, 1, (2, 4)).is_err());
    }
}
