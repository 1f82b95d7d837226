//! Rank-2 GIT fans: ray scan, movable cone, endpoints and toric intersection numbers.

use crate::error::{invalid, Error, Result};
use crate::exactmath::{content, det2, gl2z_normalize, rat, IntMatrix2xN, NormalMode, Rational};
use num_integer::Integer;
use std::cmp::Ordering;
use std::fmt;

/// A ray of the fan with the grading columns lying on it, in input order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub direction: (i64, i64),
    pub columns: Vec<usize>,
}

impl Ray {
    pub fn multiplicity(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Clone, Debug)]
pub struct ChamberFan {
    grading: IntMatrix2xN,
    rays: Vec<Ray>,
    mov: (usize, usize),
}

fn primitive(v: (i64, i64)) -> (i64, i64) {
    let g = content(v);
    (v.0 / g, v.1 / g)
}

fn same_ray(u: (i64, i64), v: (i64, i64)) -> bool {
    det2(u, v) == 0 && u.0 * v.0 + u.1 * v.1 > 0
}

/// Sorts the columns into rays. The order starts at the ray of `t` when that
/// ray is extreme, otherwise at the clockwise-most ray.
pub fn ray_scan(grading: &IntMatrix2xN) -> Result<ChamberFan> {
    let n = grading.len();
    if n == 0 {
        return invalid("empty grading");
    }
    let cols: Vec<(i64, i64)> = (0..n).map(|i| grading.col(i)).collect();
    // a column with every other column weakly counterclockwise of it, within a half-turn
    let start = cols
        .iter()
        .find(|&&c| cols.iter().all(|&v| det2(c, v) > 0 || same_ray(c, v)))
        .copied()
        .ok_or(Error::NotPointed)?;
    let mut dirs: Vec<(i64, i64)> = Vec::new();
    for &c in &cols {
        let p = primitive(c);
        if !dirs.contains(&p) {
            dirs.push(p);
        }
    }
    dirs.sort_by(|&u, &v| {
        if u == v {
            Ordering::Equal
        } else if same_ray(u, start) || det2(u, v) > 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    });
    if dirs.len() > 1 && det2(dirs[0], *dirs.last().unwrap()) <= 0 {
        return Err(Error::NotPointed);
    }
    let mut rays: Vec<Ray> = dirs
        .into_iter()
        .map(|d| Ray { direction: d, columns: (0..n).filter(|&i| primitive(cols[i]) == d).collect() })
        .collect();
    if let Some(t) = grading.index_of("t") {
        if rays.last().is_some_and(|r| r.columns.contains(&t)) && rays.len() > 1 {
            rays.reverse();
        }
    }
    let m = rays.len();
    let m1 = if rays[0].multiplicity() >= 2 { 0 } else { 1 };
    let m2 = if rays[m - 1].multiplicity() >= 2 { m - 1 } else { m.saturating_sub(2) };
    if m < 2 || m1 >= m2 {
        return invalid("movable cone is empty");
    }
    Ok(ChamberFan { grading: grading.clone(), rays, mov: (m1, m2) })
}

impl ChamberFan {
    pub fn grading(&self) -> &IntMatrix2xN {
        &self.grading
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    /// Ray indices spanning the effective cone.
    pub fn eff(&self) -> (usize, usize) {
        (0, self.rays.len() - 1)
    }

    /// Ray indices spanning the movable cone.
    pub fn mov(&self) -> (usize, usize) {
        self.mov
    }

    /// Sign of det between consecutive rays: +1 counterclockwise, -1 clockwise.
    pub fn orientation(&self) -> i64 {
        det2(self.rays[0].direction, self.rays[1].direction).signum()
    }

    /// Interior walls of the movable cone, as ray indices in game order.
    pub fn walls(&self) -> std::ops::Range<usize> {
        self.mov.0 + 1..self.mov.1
    }

    /// Consecutive ray pairs tiling the movable cone.
    pub fn chambers(&self) -> Vec<(usize, usize)> {
        (self.mov.0..self.mov.1).map(|i| (i, i + 1)).collect()
    }

    pub fn ray_of(&self, label: &str) -> Option<usize> {
        let c = self.grading.index_of(label)?;
        self.rays.iter().position(|r| r.columns.contains(&c))
    }

    pub fn labels(&self, ray: usize) -> Vec<&str> {
        self.rays[ray].columns.iter().map(|&c| self.grading.labels()[c].as_str()).collect()
    }

    /// Columns on rays strictly before / strictly after `ray`.
    pub fn columns_before(&self, ray: usize) -> Vec<usize> {
        self.rays[..ray].iter().flat_map(|r| r.columns.iter().copied()).collect()
    }

    pub fn columns_after(&self, ray: usize) -> Vec<usize> {
        self.rays[ray + 1..].iter().flat_map(|r| r.columns.iter().copied()).collect()
    }

    /// Wall vector oriented so the first ray lies on its positive side.
    pub fn wall_vector(&self, ray: usize) -> (i64, i64) {
        let w = self.rays[ray].direction;
        if det2(w, self.rays[0].direction) >= 0 {
            w
        } else {
            (-w.0, -w.1)
        }
    }

    /// True when the ray direction lies in the closed cone spanned by rays a and b.
    pub fn in_cone(&self, v: (i64, i64), a: usize, b: usize) -> bool {
        let (u, w) = (self.rays[a].direction, self.rays[b].direction);
        let o = det2(u, w).signum();
        if o == 0 {
            return same_ray(u, v);
        }
        det2(u, v).signum() * o >= 0 && det2(v, w).signum() * o >= 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndpointClass {
    Fibration,
    DivToPoint,
    DivToCurve,
}

impl fmt::Display for EndpointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndpointClass::Fibration => "FIBRATION",
            EndpointClass::DivToPoint => "DIV_TO_POINT",
            EndpointClass::DivToCurve => "DIV_TO_CURVE",
        })
    }
}

/// Trichotomy decided at the far end of the movable cone.
pub fn endpoint_classify(fan: &ChamberFan) -> EndpointClass {
    let last = fan.rays.len() - 1;
    if fan.mov.1 == last {
        EndpointClass::Fibration
    } else if fan.rays[fan.mov.1].multiplicity() == 1 {
        EndpointClass::DivToPoint
    } else {
        EndpointClass::DivToCurve
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EndpointData {
    /// Base P(base) from the last ray; the fiber coordinates carry the second row.
    Fibration { base: Vec<(String, i64)>, fiber: Vec<(String, i64)> },
    /// Contraction of (z5 = 0) in the frame A [z4 | z5] = [[0, -d5], [d4, 0]].
    Contraction {
        z4: String,
        z5: String,
        z3: Option<String>,
        d: i64,
        d4: i64,
        d5: i64,
        kappa: Vec<(String, i64)>,
        lambda: Vec<(String, i64)>,
        /// Weights of the target ambient: lambda followed by d4.
        target: Vec<i64>,
        /// Order of the cyclic quotient of the target when d5 > d4.
        quotient: Option<i64>,
        /// The curve P(lambda(z3), d4) for contractions to a curve.
        curve: Option<[i64; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endpoint {
    pub class: EndpointClass,
    pub a: [[i64; 2]; 2],
    pub normalized: IntMatrix2xN,
    pub data: EndpointData,
}

impl Endpoint {
    /// Signs of det(c_i, c_j), i < j, over the normalized columns in ray order.
    pub fn minor_signs(&self, fan: &ChamberFan) -> (bool, bool) {
        let order: Vec<usize> = fan.rays.iter().flat_map(|r| r.columns.iter().copied()).collect();
        let mut nonpos = true;
        let mut nonneg = true;
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                let m = det2(self.normalized.col(i), self.normalized.col(j));
                nonpos &= m <= 0;
                nonneg &= m >= 0;
            }
        }
        (nonpos, nonneg)
    }
}

/// Row-normalizes the grading at the far end of the movable cone.
pub fn endpoint_normalize(fan: &ChamberFan, class: EndpointClass) -> Result<Endpoint> {
    let g = &fan.grading;
    let name = |c: usize| g.labels()[c].clone();
    let last = fan.rays.len() - 1;
    match class {
        EndpointClass::Fibration => {
            let block = &fan.rays[last].columns;
            let cols: Vec<(i64, i64)> = block.iter().map(|&c| g.col(c)).collect();
            let mut a = crate::exactmath::fibration_frame(&cols)?;
            let t = g.index_of("t").unwrap_or(fan.rays[0].columns[0]);
            let (x, y) = g.col(t);
            if a[1][0] * x + a[1][1] * y < 0 {
                a[1] = [-a[1][0], -a[1][1]];
            }
            let normalized = g.transform(&a);
            let base = block.iter().map(|&c| (name(c), normalized.col(c).0)).collect();
            let fiber = (0..g.len())
                .filter(|c| !block.contains(c))
                .map(|c| (name(c), normalized.col(c).1))
                .collect::<Vec<_>>();
            if fiber.iter().any(|(_, w)| *w <= 0) {
                return invalid("fiber weights are not positive");
            }
            Ok(Endpoint { class, a, normalized, data: EndpointData::Fibration { base, fiber } })
        }
        EndpointClass::DivToPoint | EndpointClass::DivToCurve => {
            if fan.mov.1 != last - 1 {
                return invalid("contraction endpoint needs a single ray past the movable cone");
            }
            let z5 = fan.rays[last].columns[0];
            let on_m2 = &fan.rays[fan.mov.1].columns;
            let z4 = *on_m2
                .iter()
                .min_by_key(|&&c| det2(g.col(c), g.col(z5)).abs())
                .expect("nonempty ray");
            let rest: Vec<usize> = on_m2.iter().copied().filter(|&c| c != z4).collect();
            if class == EndpointClass::DivToPoint && !rest.is_empty() {
                return invalid("more than one column on the contracted ray");
            }
            if class == EndpointClass::DivToCurve && rest.len() != 1 {
                return invalid("contraction to a curve needs exactly two columns on the last movable ray");
            }
            let (v4, v5) = (g.col(z4), g.col(z5));
            let nf = gl2z_normalize([[v4.0, v5.0], [v4.1, v5.1]], NormalMode::Contraction)?;
            let normalized = g.transform(&nf.a);
            let others: Vec<usize> = (0..g.len()).filter(|&c| c != z4 && c != z5).collect();
            let kappa: Vec<(String, i64)> = others.iter().map(|&c| (name(c), normalized.col(c).0)).collect();
            let lambda: Vec<(String, i64)> = others.iter().map(|&c| (name(c), normalized.col(c).1)).collect();
            let mut target: Vec<i64> = lambda.iter().map(|(_, l)| *l).collect();
            target.push(nf.d4);
            let quotient = (nf.d5 > nf.d4 && nf.d5 % nf.d4 == 0).then_some(nf.d5 / nf.d4);
            let z3 = rest.first().copied();
            let curve = match z3 {
                Some(c) => {
                    let l = normalized.col(c).1;
                    if l.gcd(&nf.d4) != 1 {
                        return invalid("non-terminal: line of singularities");
                    }
                    Some([l, nf.d4])
                }
                None => None,
            };
            Ok(Endpoint {
                class,
                a: nf.a,
                normalized,
                data: EndpointData::Contraction {
                    z4: name(z4),
                    z5: name(z5),
                    z3: z3.map(name),
                    d: nf.d,
                    d4: nf.d4,
                    d5: nf.d5,
                    kappa,
                    lambda,
                    target,
                    quotient,
                    curve,
                },
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Contracted,
    Extracted,
}

/// delta . C for the toric curve C spanned by two coordinates beside the wall w.
pub fn toric_curve_intersection(
    delta: (i64, i64),
    w: (i64, i64),
    va: (i64, i64),
    vb: (i64, i64),
    side: Side,
) -> Result<Rational> {
    let (da, db) = (det2(w, va), det2(w, vb));
    if da == 0 || db == 0 {
        return invalid("curve coordinate lies on the wall");
    }
    if da.signum() != db.signum() {
        return invalid("curve coordinates lie on opposite sides of the wall");
    }
    let dd = det2(w, delta);
    let sign = dd.signum() * if side == Side::Contracted { 1 } else { -1 };
    Ok(rat(sign * dd.abs(), da.abs() * db.abs()))
}
