use super::{Degree, Polynomial, Ring};
use crate::error::{invalid, Result};
use std::sync::Arc;

pub type DegreeMatrix = [[Option<i64>; 5]; 5];

/// 5x5 antisymmetric matrix of polynomials with optional prescribed entry degrees.
#[derive(Clone, Debug)]
pub struct GradedSkewMatrix {
    entries: Vec<Vec<Polynomial>>,
    degrees: Option<DegreeMatrix>,
}

impl GradedSkewMatrix {
    pub fn new(entries: Vec<Vec<Polynomial>>, degrees: Option<DegreeMatrix>, weights: Option<&[i64]>) -> Result<Self> {
        check_skew(&entries)?;
        if let (Some(d), Some(w)) = (&degrees, weights) {
            for i in 0..5 {
                for j in 0..5 {
                    let e = &entries[i][j];
                    if i == j || e.is_zero() {
                        continue;
                    }
                    match (e.weighted_degree(w)?, d[i][j]) {
                        (Degree::Homogeneous(k), Some(want)) if k == want => {}
                        _ => return invalid(format!("entry a{}{} does not have its prescribed degree", i + 1, j + 1)),
                    }
                }
            }
        }
        Ok(GradedSkewMatrix { entries, degrees })
    }

    /// The matrix whose entry a_ij (i<j) is a fresh variable of degree `deg[i][j]`.
    pub fn generic(deg: &DegreeMatrix) -> Result<(Self, Vec<i64>)> {
        let mut names = Vec::new();
        let mut weights = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                names.push(format!("a{}{}", i + 1, j + 1));
                weights.push(deg[i][j].ok_or_else(|| crate::error::Error::Invalid("missing degree".into()))?);
            }
        }
        let ring = Ring::new(&names);
        let mut entries = vec![vec![Polynomial::zero(&ring); 5]; 5];
        let mut k = 0;
        for i in 0..5 {
            for j in i + 1..5 {
                entries[i][j] = Polynomial::var(&ring, k);
                entries[j][i] = -&entries[i][j];
                k += 1;
            }
        }
        Ok((GradedSkewMatrix::new(entries, Some(*deg), Some(&weights))?, weights))
    }

    pub fn entries(&self) -> &[Vec<Polynomial>] {
        &self.entries
    }

    pub fn degrees(&self) -> Option<&DegreeMatrix> {
        self.degrees.as_ref()
    }

    pub fn ring(&self) -> &Arc<Ring> {
        self.entries[0][0].ring()
    }

    pub fn pfaffians(&self) -> Result<Vec<Polynomial>> {
        pfaffians5(&self.entries)
    }
}

fn check_skew(m: &[Vec<Polynomial>]) -> Result<()> {
    if m.len() != 5 || m.iter().any(|r| r.len() != 5) {
        return invalid("expected a 5x5 matrix");
    }
    for i in 0..5 {
        for j in 0..5 {
            if m[i][j] != -&m[j][i] {
                return invalid(format!("matrix is not antisymmetric at ({}, {})", i + 1, j + 1));
            }
        }
    }
    Ok(())
}

/// a_ab a_cd - a_ac a_bd + a_ad a_bc for indices a < b < c < d.
pub fn pfaffian4(m: &[Vec<Polynomial>], [a, b, c, d]: [usize; 4]) -> Polynomial {
    let t1 = &m[a][b] * &m[c][d];
    let t2 = &m[a][c] * &m[b][d];
    let t3 = &m[a][d] * &m[b][c];
    &(&t1 - &t2) + &t3
}

/// The five maximal Pfaffians; Pf_k omits row and column k.
pub fn pfaffians5(m: &[Vec<Polynomial>]) -> Result<Vec<Polynomial>> {
    check_skew(m)?;
    Ok((0..5)
        .map(|k| {
            let idx: Vec<usize> = (0..5).filter(|&i| i != k).collect();
            pfaffian4(m, [idx[0], idx[1], idx[2], idx[3]])
        })
        .collect())
}

/// Degree of each Pfaffian predicted from entry degrees, `None` if its terms disagree.
pub fn pfaffian_degrees(deg: &DegreeMatrix) -> Vec<Option<i64>> {
    (0..5)
        .map(|k| {
            let v: Vec<usize> = (0..5).filter(|&i| i != k).collect();
            let pair = |i: usize, j: usize, p: usize, q: usize| Some(deg[v[i]][v[j]]? + deg[v[p]][v[q]]?);
            let terms = [pair(0, 1, 2, 3), pair(0, 2, 1, 3), pair(0, 3, 1, 2)];
            let d = terms[0]?;
            terms.iter().all(|t| *t == Some(d)).then_some(d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_upper(rows: [&[i64]; 4]) -> DegreeMatrix {
        let mut d = [[None; 5]; 5];
        for (i, r) in rows.iter().enumerate() {
            for (k, &v) in r.iter().enumerate() {
                let j = i + 1 + k;
                d[i][j] = Some(v);
                d[j][i] = Some(v);
            }
        }
        d
    }

    #[test]
    fn generic_pf1() {
        let deg = from_upper([&[3, 3, 4, 4], &[4, 5, 5], &[5, 5], &[6]]);
        let (m, w) = GradedSkewMatrix::generic(&deg).unwrap();
        let pf = m.pfaffians().unwrap();
        let r = m.ring();
        assert_eq!(pf[0], r.parse("a23*a45 - a24*a35 + a25*a34").unwrap());
        for p in &pf {
            assert!(matches!(p.weighted_degree(&w).unwrap(), Degree::Homogeneous(_)));
        }
        assert_eq!(pf[0].weighted_degree(&w).unwrap(), Degree::Homogeneous(10));
        assert_eq!(pfaffian_degrees(&deg)[0], Some(10));
    }

    #[test]
    fn rejects_non_skew() {
        let r = Ring::new(&["x"]);
        let mut m = vec![vec![Polynomial::zero(&r); 5]; 5];
        m[0][1] = Polynomial::var(&r, 0);
        assert!(pfaffians5(&m).is_err());
    }
}
