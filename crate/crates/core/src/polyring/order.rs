use std::cmp::Ordering;

/// Monomial orders used by the Groebner engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Weighted degree, ties broken reverse-lexicographically.
    Grevlex(Vec<i64>),
    /// Variables flagged in `elim` are compared first (weighted grevlex on that block).
    Block { elim: Vec<bool>, weights: Vec<i64> },
    /// Pure lex; variables listed from most to least significant.
    Lex(Vec<usize>),
}

impl MonomialOrder {
    pub fn grevlex_unit(n: usize) -> Self {
        MonomialOrder::Grevlex(vec![1; n])
    }

    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Grevlex(w) => grevlex(a, b, w, |_| true),
            MonomialOrder::Block { elim, weights } => grevlex(a, b, weights, |i| elim[i])
                .then_with(|| grevlex(a, b, weights, |i| !elim[i])),
            MonomialOrder::Lex(perm) => {
                for &i in perm {
                    match a[i].cmp(&b[i]) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            }
        }
    }

    /// The grading used for sugar degrees.
    pub fn sugar_weights(&self, n: usize) -> Vec<i64> {
        match self {
            MonomialOrder::Grevlex(w) | MonomialOrder::Block { weights: w, .. } => w.clone(),
            MonomialOrder::Lex(_) => vec![1; n],
        }
    }
}

fn grevlex(a: &[u32], b: &[u32], w: &[i64], keep: impl Fn(usize) -> bool) -> Ordering {
    let deg = |m: &[u32]| -> i64 {
        m.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(i, &e)| w[i] * e as i64).sum()
    };
    match deg(a).cmp(&deg(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    for i in (0..a.len()).rev() {
        if !keep(i) {
            continue;
        }
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_basics() {
        let o = MonomialOrder::grevlex_unit(3);
        // x^2 > xy > y^2 > xz
        assert_eq!(o.cmp(&[2, 0, 0], &[1, 1, 0]), Ordering::Greater);
        assert_eq!(o.cmp(&[0, 2, 0], &[1, 0, 1]), Ordering::Greater);
        let w = MonomialOrder::Grevlex(vec![1, 3, 1]);
        assert_eq!(w.cmp(&[2, 0, 0], &[0, 1, 0]), Ordering::Less);
        let b = MonomialOrder::Block { elim: vec![false, true, false], weights: vec![1; 3] };
        assert_eq!(b.cmp(&[5, 0, 5], &[0, 1, 0]), Ordering::Less);
        let l = MonomialOrder::Lex(vec![2, 0, 1]);
        assert_eq!(l.cmp(&[9, 9, 0], &[0, 0, 1]), Ordering::Less);
    }
}
