//! Buchberger's algorithm over Q with the Gebauer-Moeller pair criteria and sugar selection.

use super::{dot, MonomialOrder, Polynomial};
use crate::error::{Error, Result};
use crate::exactmath::Rational;
use num_traits::{One, Zero};
use std::cmp::Ordering;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Caps the number of reduction steps a computation may take.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    /// Reads `TWO_RAY_BUDGET`, falling back to [`DEFAULT_BUDGET`].
    pub fn from_env() -> Self {
        let limit = std::env::var("TWO_RAY_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET);
        Budget::new(limit)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::from_env()
    }
}

#[derive(Clone, Debug)]
struct Term {
    e: Box<[u32]>,
    c: Rational,
}

/// Terms sorted descending by the active order.
type Terms = Vec<Term>;

struct Engine<'a> {
    order: &'a MonomialOrder,
    weights: Vec<i64>,
    polys: Vec<Terms>,
    sugar: Vec<i64>,
    active: Vec<bool>,
    budget: &'a mut Budget,
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Box<[u32]>,
    sugar: i64,
}

fn lcm(a: &[u32], b: &[u32]) -> Box<[u32]> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn shift(t: &[Term], m: &[u32], q: &Rational) -> Terms {
    t.iter()
        .map(|x| Term { e: x.e.iter().zip(m).map(|(a, b)| a + b).collect(), c: &x.c * q })
        .collect()
}

impl Engine<'_> {
    /// a - q * m * b, both descending.
    fn sub_mul(&self, a: &[Term], q: &Rational, m: &[u32], b: &[Term]) -> Terms {
        let b = shift(b, m, &-q.clone());
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match self.order.cmp(&a[i].e, &b[j].e) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].c + &b[j].c;
                    if !c.is_zero() {
                        out.push(Term { e: a[i].e.clone(), c });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b.into_iter().skip(j));
        out
    }

    fn find_reducer(&self, e: &[u32]) -> Option<usize> {
        (0..self.polys.len()).find(|&k| self.active[k] && divides(&self.polys[k][0].e, e))
    }

    /// Full reduction against the active polynomials (all monic).
    fn reduce(&mut self, mut p: Terms) -> Result<Terms> {
        let mut rem = Vec::new();
        let mut start = 0;
        while start < p.len() {
            match self.find_reducer(&p[start].e) {
                Some(k) => {
                    self.budget.tick()?;
                    let g = &self.polys[k];
                    let m: Vec<u32> = p[start].e.iter().zip(g[0].e.iter()).map(|(a, b)| a - b).collect();
                    let q = p[start].c.clone();
                    p = self.sub_mul(&p[start + 1..], &q, &m, &g[1..]);
                    start = 0;
                }
                None => {
                    rem.push(p[start].clone());
                    start += 1;
                }
            }
        }
        Ok(rem)
    }

    fn deg(&self, e: &[u32]) -> i64 {
        dot(e, &self.weights)
    }

    fn make_pair(&self, i: usize, j: usize) -> Pair {
        let (a, b) = (&self.polys[i][0].e, &self.polys[j][0].e);
        let l = lcm(a, b);
        let dl = self.deg(&l);
        let sugar = (self.sugar[i] + dl - self.deg(a)).max(self.sugar[j] + dl - self.deg(b));
        Pair { i, j, lcm: l, sugar }
    }

    /// Gebauer-Moeller update after inserting polynomial `h`.
    fn update(&mut self, pairs: &mut Vec<Pair>, h: usize) {
        let lh = self.polys[h][0].e.clone();
        let cands: Vec<usize> = (0..h).filter(|&k| self.active[k]).collect();
        let mut kept: Vec<usize> = Vec::new();
        for (idx, &g1) in cands.iter().enumerate() {
            let l1 = lcm(&lh, &self.polys[g1][0].e);
            if coprime(&lh, &self.polys[g1][0].e) {
                kept.push(g1);
                continue;
            }
            let dominated = cands[idx + 1..]
                .iter()
                .chain(kept.iter())
                .any(|&g2| divides(&lcm(&lh, &self.polys[g2][0].e), &l1));
            if !dominated {
                kept.push(g1);
            }
        }
        pairs.retain(|p| {
            !(divides(&lh, &p.lcm)
                && *lcm(&self.polys[p.i][0].e, &lh) != *p.lcm
                && *lcm(&self.polys[p.j][0].e, &lh) != *p.lcm)
        });
        for g in kept {
            if !coprime(&lh, &self.polys[g][0].e) {
                pairs.push(self.make_pair(g, h));
            }
        }
        for k in 0..h {
            if self.active[k] && divides(&lh, &self.polys[k][0].e) {
                self.active[k] = false;
            }
        }
    }

    fn insert(&mut self, mut t: Terms, sugar: i64, pairs: &mut Vec<Pair>) {
        let inv = t[0].c.recip();
        for x in t.iter_mut() {
            x.c *= &inv;
        }
        self.polys.push(t);
        self.sugar.push(sugar);
        self.active.push(true);
        let h = self.polys.len() - 1;
        self.update(pairs, h);
    }
}

/// Reduced Groebner basis of the polynomials for `order`.
///
/// Returns `[1]` for the unit ideal and an empty list for the zero ideal.
pub fn groebner_basis(
    gens: &[Polynomial],
    order: &MonomialOrder,
    budget: &mut Budget,
) -> Result<Vec<Polynomial>> {
    let Some(first) = gens.first() else {
        return Ok(Vec::new());
    };
    let ring = first.ring().clone();
    let n = ring.nvars();
    let weights = order.sugar_weights(n);
    let mut eng = Engine { order, weights, polys: Vec::new(), sugar: Vec::new(), active: Vec::new(), budget };
    let unit = || Ok(vec![Polynomial::one(&ring)]);

    let mut inputs: Vec<Terms> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let mut t: Terms = g.terms().map(|(e, c)| Term { e: e.clone().into(), c: c.clone() }).collect();
            t.sort_by(|a, b| order.cmp(&b.e, &a.e));
            t
        })
        .collect();
    inputs.sort_by(|a, b| order.cmp(&a[0].e, &b[0].e));
    let mut pairs = Vec::new();
    for t in inputs {
        let sugar = t.iter().map(|x| eng.deg(&x.e)).max().unwrap();
        let r = eng.reduce(t)?;
        if r.is_empty() {
            continue;
        }
        if r[0].e.iter().all(|&k| k == 0) {
            return unit();
        }
        eng.insert(r, sugar, &mut pairs);
    }

    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                pairs[a].sugar.cmp(&pairs[b].sugar).then_with(|| order.cmp(&pairs[a].lcm, &pairs[b].lcm))
            })
            .unwrap();
        let p = pairs.swap_remove(best);
        let (gi, gj) = (&eng.polys[p.i], &eng.polys[p.j]);
        let mi: Vec<u32> = p.lcm.iter().zip(gi[0].e.iter()).map(|(a, b)| a - b).collect();
        let mj: Vec<u32> = p.lcm.iter().zip(gj[0].e.iter()).map(|(a, b)| a - b).collect();
        let a = shift(&gi[1..], &mi, &Rational::one());
        let s = eng.sub_mul(&a, &Rational::one(), &mj, &gj[1..]);
        let h = eng.reduce(s)?;
        if h.is_empty() {
            continue;
        }
        if h[0].e.iter().all(|&k| k == 0) {
            return unit();
        }
        eng.insert(h, p.sugar, &mut pairs);
    }

    // interreduce the minimal basis
    let idx: Vec<usize> = (0..eng.polys.len()).filter(|&k| eng.active[k]).collect();
    let mut out = Vec::new();
    for &k in &idx {
        let g = eng.polys[k].clone();
        eng.active[k] = false;
        let tail = eng.reduce(g[1..].to_vec())?;
        eng.active[k] = true;
        let mut full = vec![g[0].clone()];
        full.extend(tail);
        out.push(full);
    }
    out.sort_by(|a, b| order.cmp(&b[0].e, &a[0].e));
    Ok(out
        .into_iter()
        .map(|t| Polynomial::from_terms(&ring, t.into_iter().map(|x| (x.e.into_vec(), x.c))))
        .collect())
}
