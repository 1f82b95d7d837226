//! Exact rationals and 2x2 lattice algebra.

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use std::fmt;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("bad rational {s:?}") };
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Converts an integral rational to `i64`.
pub fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        i64::try_from(r.numer()).ok()
    } else {
        None
    }
}

pub type Vec2 = [Rational; 2];

pub fn vec2(a: Rational, b: Rational) -> Vec2 {
    [a, b]
}

pub fn ivec2(a: i64, b: i64) -> Vec2 {
    [int(a), int(b)]
}

/// A 2x2 rational matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2(pub [[Rational; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Mat2 {
        Mat2([[int(1), int(0)], [int(0), int(1)]])
    }

    pub fn from_columns(c0: &Vec2, c1: &Vec2) -> Mat2 {
        Mat2([[c0[0].clone(), c1[0].clone()], [c0[1].clone(), c1[1].clone()]])
    }

    pub fn det(&self) -> Rational {
        let m = &self.0;
        &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [&m[1][1] / &d, -&m[0][1] / &d],
            [-&m[1][0] / &d, &m[0][0] / &d],
        ]))
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let m = &self.0;
        [&m[0][0] * &v[0] + &m[0][1] * &v[1], &m[1][0] * &v[0] + &m[1][1] * &v[1]]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let c0 = self.apply(&[o.0[0][0].clone(), o.0[1][0].clone()]);
        let c1 = self.apply(&[o.0[0][1].clone(), o.0[1][1].clone()]);
        Mat2::from_columns(&c0, &c1)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

/// Integer 2-row matrix with labelled columns, e.g. a Cox ring bi-grading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix2xN {
    labels: Vec<String>,
    rows: [Vec<i64>; 2],
}

impl IntMatrix2xN {
    pub fn new(labels: Vec<String>, top: Vec<i64>, bottom: Vec<i64>) -> Result<Self> {
        if labels.len() != top.len() || top.len() != bottom.len() {
            return invalid("grading rows and labels differ in length");
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return invalid(format!("duplicate column label {l}"));
            }
            if top[i] == 0 && bottom[i] == 0 {
                return invalid(format!("zero column {l}"));
            }
        }
        Ok(IntMatrix2xN { labels, rows: [top, bottom] })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<i64>; 2] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn col(&self, i: usize) -> (i64, i64) {
        (self.rows[0][i], self.rows[1][i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn column(&self, label: &str) -> Option<(i64, i64)> {
        self.index_of(label).map(|i| self.col(i))
    }

    /// Left multiplication by an integer matrix.
    pub fn transform(&self, a: &[[i64; 2]; 2]) -> IntMatrix2xN {
        let (mut top, mut bottom) = (Vec::new(), Vec::new());
        for i in 0..self.len() {
            let (x, y) = self.col(i);
            top.push(a[0][0] * x + a[0][1] * y);
            bottom.push(a[1][0] * x + a[1][1] * y);
        }
        IntMatrix2xN { labels: self.labels.clone(), rows: [top, bottom] }
    }
}

pub fn det2(u: (i64, i64), v: (i64, i64)) -> i64 {
    u.0 * v.1 - u.1 * v.0
}

pub fn content(v: (i64, i64)) -> i64 {
    v.0.gcd(&v.1)
}

/// Returns (g, x, y) with g = gcd(a, b) >= 0 and x a + y b = g.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Finds R with R * source = target for every pair.
///
/// `Ok(None)` means the pairs are inconsistent (or force a singular R).
pub fn solve_basis_change(pairs: &[(Vec2, Vec2)]) -> Result<Option<Mat2>> {
    if pairs.len() < 2 {
        return invalid("solve_basis_change needs at least two pairs");
    }
    let mut basis = None;
    'outer: for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let s = Mat2::from_columns(&pairs[i].0, &pairs[j].0);
            if !s.det().is_zero() {
                basis = Some((i, j, s));
                break 'outer;
            }
        }
    }
    let (i, j, s) = basis.ok_or(Error::RankDeficient)?;
    let t = Mat2::from_columns(&pairs[i].1, &pairs[j].1);
    let r = t.mul(&s.inverse().expect("nonsingular"));
    if r.det().is_zero() {
        return Ok(None);
    }
    if pairs.iter().all(|(src, tgt)| r.apply(src) == *tgt) {
        Ok(Some(r))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalMode {
    Fibration,
    Contraction,
}

/// Output of [`gl2z_normalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub a: [[i64; 2]; 2],
    pub ab: [[i64; 2]; 2],
    /// |det B| (0 for fibrations).
    pub d: i64,
    /// Contents of the two columns of B.
    pub d4: i64,
    pub d5: i64,
}

pub fn mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn idet(a: &[[i64; 2]; 2]) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Unimodular A sending every column (all parallel, not all zero) to the first axis,
/// with the first nonzero image entry positive.
pub fn fibration_frame(cols: &[(i64, i64)]) -> Result<[[i64; 2]; 2]> {
    let Some(&(p, q)) = cols.iter().find(|c| **c != (0, 0)) else {
        return invalid("zero matrix");
    };
    if cols.iter().any(|c| det2((p, q), *c) != 0) {
        return invalid("fibration normal form needs parallel columns");
    }
    let (g, x, y) = ext_gcd(p, q);
    let mut a = [[x, y], [-q / g, p / g]];
    // x p + y q = g > 0, so the image of (p, q) is (g, 0)
    if a[1][0] * p + a[1][1] * q != 0 {
        return invalid("internal: fibration frame");
    }
    if det2((a[0][0], a[0][1]), (a[1][0], a[1][1])) < 0 {
        a[1] = [-a[1][0], -a[1][1]];
    }
    Ok(a)
}

/// Row-reduces B by a unimodular A into the fibration or contraction normal form.
///
/// FIBRATION gives AB = [[a, b], [0, 0]] with a >= 0. CONTRACTION gives
/// AB = [[0, -d5], [d4, 0]] where d4, d5 are the column contents; this needs
/// |det B| = d4 d5, and d = |det B|.
pub fn gl2z_normalize(b: [[i64; 2]; 2], mode: NormalMode) -> Result<Normalized> {
    if b == [[0, 0], [0, 0]] {
        return invalid("zero matrix");
    }
    let v4 = (b[0][0], b[1][0]);
    let v5 = (b[0][1], b[1][1]);
    let det = idet(&b);
    match mode {
        NormalMode::Fibration => {
            if det != 0 {
                return invalid("FIBRATION mode needs det B = 0");
            }
            let a = fibration_frame(&[v4, v5])?;
            let ab = mat_mul(&a, &b);
            Ok(Normalized { a, ab, d: 0, d4: content(v4), d5: content(v5) })
        }
        NormalMode::Contraction => {
            if det == 0 {
                return invalid("CONTRACTION mode needs det B != 0");
            }
            let (d4, d5) = (content(v4), content(v5));
            let u4 = (v4.0 / d4, v4.1 / d4);
            let u5 = (v5.0 / d5, v5.1 / d5);
            // A^{-1} has columns -u5, u4
            let inv = [[-u5.0, u4.0], [-u5.1, u4.1]];
            let e = idet(&inv);
            if e.abs() != 1 {
                return invalid(format!(
                    "columns {v4:?}, {v5:?} admit no unimodular contraction frame"
                ));
            }
            let a = [[inv[1][1] * e, -inv[0][1] * e], [-inv[1][0] * e, inv[0][0] * e]];
            let ab = mat_mul(&a, &b);
            debug_assert_eq!(ab, [[0, -d5], [d4, 0]]);
            Ok(Normalized { a, ab, d: det.abs(), d4, d5 })
        }
    }
}
