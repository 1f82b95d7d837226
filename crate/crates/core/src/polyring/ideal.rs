use super::{groebner_basis, Budget, MonomialOrder, Polynomial, Ring};
use crate::error::{invalid, Result};
use std::sync::{Arc, OnceLock};

/// Ideal with a lazily attached Groebner basis.
#[derive(Debug)]
pub struct Ideal {
    ring: Arc<Ring>,
    gens: Vec<Polynomial>,
    basis: OnceLock<(MonomialOrder, Vec<Polynomial>)>,
    order: Option<MonomialOrder>,
}

impl Clone for Ideal {
    fn clone(&self) -> Self {
        let basis = OnceLock::new();
        if let Some(b) = self.basis.get() {
            let _ = basis.set(b.clone());
        }
        Ideal { ring: self.ring.clone(), gens: self.gens.clone(), basis, order: self.order.clone() }
    }
}

impl Ideal {
    pub fn new(ring: &Arc<Ring>, gens: Vec<Polynomial>) -> Self {
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal { ring: ring.clone(), gens, basis: OnceLock::new(), order: None }
    }

    /// Order used when a basis is needed implicitly (membership, dimension).
    pub fn with_default_order(mut self, order: MonomialOrder) -> Self {
        self.order = Some(order);
        self
    }

    fn with_basis(ring: &Arc<Ring>, order: MonomialOrder, basis: Vec<Polynomial>) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set((order, basis.clone()));
        Ideal { ring: ring.clone(), gens: basis, basis: cell, order: None }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    /// Cached basis and its order, if one has been computed.
    pub fn basis(&self) -> Option<(&MonomialOrder, &[Polynomial])> {
        self.basis.get().map(|(o, b)| (o, b.as_slice()))
    }

    /// Reduced Groebner basis for `order`; the first basis computed is cached.
    pub fn groebner(&self, order: &MonomialOrder, budget: &mut Budget) -> Result<Vec<Polynomial>> {
        if let Some((o, b)) = self.basis.get() {
            if o == order {
                return Ok(b.clone());
            }
            return groebner_basis(&self.gens, order, budget);
        }
        let b = groebner_basis(&self.gens, order, budget)?;
        let _ = self.basis.set((order.clone(), b.clone()));
        Ok(b)
    }

    /// A new ideal whose generators are the reduced basis for `order`.
    pub fn with_groebner(&self, order: &MonomialOrder, budget: &mut Budget) -> Result<Ideal> {
        let b = groebner_basis(&self.gens, order, budget)?;
        Ok(Ideal::with_basis(&self.ring, order.clone(), b))
    }

    fn default_basis(&self, budget: &mut Budget) -> Result<&[Polynomial]> {
        if self.basis.get().is_none() {
            let order = self.order.clone().unwrap_or_else(|| MonomialOrder::grevlex_unit(self.ring.nvars()));
            self.groebner(&order, budget)?;
        }
        Ok(&self.basis.get().unwrap().1)
    }

    pub fn is_unit(&self, budget: &mut Budget) -> Result<bool> {
        let b = self.default_basis(budget)?;
        Ok(b.len() == 1 && b[0].as_constant().is_some())
    }

    /// Normal form of `p` against the cached (or default) basis.
    pub fn reduce(&self, p: &Polynomial, budget: &mut Budget) -> Result<Polynomial> {
        let _ = self.default_basis(budget)?;
        let (order, b) = self.basis.get().unwrap();
        normal_form(p, b, order)
    }

    pub fn contains(&self, p: &Polynomial, budget: &mut Budget) -> Result<bool> {
        Ok(self.reduce(p, budget)?.is_zero())
    }

    /// Same ideal, decided by mutual membership.
    pub fn equals(&self, o: &Ideal, budget: &mut Budget) -> Result<bool> {
        for g in &o.gens {
            if !self.contains(g, budget)? {
                return Ok(false);
            }
        }
        for g in &self.gens {
            if !o.contains(g, budget)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// (I : v^inf). Homogeneous input for positive `weights` uses a reverse-lex
    /// basis with v last; otherwise w v - 1 is adjoined and w eliminated.
    pub fn saturate(&self, var: usize, weights: Option<&[i64]>, budget: &mut Budget) -> Result<Ideal> {
        let n = self.ring.nvars();
        if var >= n {
            return invalid("saturation variable not in ring");
        }
        if let Some(w) = weights {
            let graded = w.len() == n
                && w.iter().all(|&x| x > 0)
                && self.gens.iter().all(|g| {
                    matches!(g.weighted_degree(w), Ok(super::Degree::Homogeneous(_)))
                });
            if graded {
                return self.saturate_graded(var, w, budget);
            }
        }
        let mut names: Vec<String> = self.ring.names().to_vec();
        let mut w = String::from("w_sat");
        while names.contains(&w) {
            w.push('_');
        }
        names.push(w);
        let big = Ring::new(&names);
        let map: Vec<Option<usize>> = (0..n).map(Some).collect();
        let mut gens = Vec::new();
        for g in &self.gens {
            gens.push(g.map_ring(&big, &map)?);
        }
        let aux = &(&Polynomial::var(&big, n) * &Polynomial::var(&big, var)) - &Polynomial::one(&big);
        gens.push(aux);
        let mut wts: Vec<i64> = weights.map(|w| w.to_vec()).unwrap_or_else(|| vec![1; n]);
        wts.push(1);
        let mut elim = vec![false; n];
        elim.push(true);
        let order = MonomialOrder::Block { elim, weights: wts.clone() };
        let basis = groebner_basis(&gens, &order, budget)?;
        let back: Vec<Option<usize>> = (0..=n).map(|i| (i < n).then_some(i)).collect();
        let kept = basis
            .iter()
            .filter(|g| !g.uses(n))
            .map(|g| g.map_ring(&self.ring, &back))
            .collect::<Result<Vec<_>>>()?;
        wts.pop();
        Ok(Ideal::with_basis(&self.ring, MonomialOrder::Grevlex(wts), kept))
    }

    fn saturate_graded(&self, var: usize, w: &[i64], budget: &mut Budget) -> Result<Ideal> {
        let n = self.ring.nvars();
        let perm: Vec<usize> = (0..n).filter(|&i| i != var).chain([var]).collect();
        let names: Vec<String> = perm.iter().map(|&i| self.ring.names()[i].clone()).collect();
        let moved = Ring::new(&names);
        let mut to = vec![None; n];
        for (k, &i) in perm.iter().enumerate() {
            to[i] = Some(k);
        }
        let gens = self.gens.iter().map(|g| g.map_ring(&moved, &to)).collect::<Result<Vec<_>>>()?;
        let pw: Vec<i64> = perm.iter().map(|&i| w[i]).collect();
        let basis = groebner_basis(&gens, &MonomialOrder::Grevlex(pw), budget)?;
        let back: Vec<Option<usize>> = perm.iter().map(|&i| Some(i)).collect();
        let mut out = Vec::new();
        for g in basis {
            let k = g.terms().map(|(e, _)| e[n - 1]).min().unwrap_or(0);
            let mut m = vec![0; n];
            m[n - 1] = k;
            out.push(g.divide_monomial(&m).unwrap().map_ring(&self.ring, &back)?);
        }
        Ok(Ideal::new(&self.ring, out).with_default_order(MonomialOrder::Grevlex(w.to_vec())))
    }

    /// I intersected with the subring avoiding `vars`.
    pub fn eliminate(&self, vars: &[usize], weights: Option<&[i64]>, budget: &mut Budget) -> Result<Ideal> {
        let n = self.ring.nvars();
        let mut elim = vec![false; n];
        for &v in vars {
            if v >= n {
                return invalid("elimination variable not in ring");
            }
            elim[v] = true;
        }
        let wts: Vec<i64> = weights.map(|w| w.to_vec()).unwrap_or_else(|| vec![1; n]);
        let order = MonomialOrder::Block { elim: elim.clone(), weights: wts.clone() };
        let basis = groebner_basis(&self.gens, &order, budget)?;
        let kept: Vec<Polynomial> =
            basis.into_iter().filter(|g| vars.iter().all(|&v| !g.uses(v))).collect();
        Ok(Ideal::with_basis(&self.ring, order, kept))
    }

    /// Krull dimension of R/I via maximal independent sets of the leading-term ideal;
    /// -1 for the unit ideal.
    pub fn dimension(&self, budget: &mut Budget) -> Result<i64> {
        let _ = self.default_basis(budget)?;
        let (order, b) = self.basis.get().unwrap();
        let n = self.ring.nvars();
        if b.iter().any(|g| g.as_constant().is_some()) {
            return Ok(-1);
        }
        let lms: Vec<Vec<u32>> = b.iter().map(|g| g.leading(order).unwrap().0.clone()).collect();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as i64;
            if size <= best {
                continue;
            }
            let indep = lms.iter().all(|m| (0..n).any(|i| m[i] > 0 && mask & (1 << i) == 0));
            if indep {
                best = size;
            }
        }
        Ok(best)
    }
}

/// Remainder of `p` on division by a Groebner basis.
pub fn normal_form(p: &Polynomial, basis: &[Polynomial], order: &MonomialOrder) -> Result<Polynomial> {
    let ring = p.ring().clone();
    let lts: Vec<_> = basis.iter().map(|g| {
        let (e, c) = g.leading(order).unwrap();
        (e.clone(), c.clone())
    }).collect();
    let mut rem = Polynomial::zero(&ring);
    let mut p = p.clone();
    while let Some((e, c)) = p.leading(order).map(|(e, c)| (e.clone(), c.clone())) {
        let hit = lts.iter().position(|(m, _)| m.iter().zip(&e).all(|(a, b)| a <= b));
        match hit {
            Some(k) => {
                let m: Vec<u32> = e.iter().zip(&lts[k].0).map(|(a, b)| a - b).collect();
                let q = Polynomial::monomial(&ring, m, &c / &lts[k].1);
                p = &p - &(&q * &basis[k]);
            }
            None => {
                let t = Polynomial::monomial(&ring, e, c);
                p = &p - &t;
                rem = &rem + &t;
            }
        }
    }
    Ok(rem)
}
