use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::Rational;

/// Sparse bivariate polynomial `sum c_{ij} X1^i X2^j` with exact rational
/// coefficients. Zero coefficients are never stored; iteration order is the
/// lexicographic order of exponent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: Rational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, coeff);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((i, j)) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(d)` if every stored monomial has total degree `d`; `None` for
    /// the zero polynomial or mixed degrees.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|(i, j)| i + j);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn eval(&self, x1: &Rational, x2: &Rational) -> Rational {
        let mut sum = Rational::zero();
        for (&(i, j), c) in &self.terms {
            sum += c * pow(x1, i) * pow(x2, j);
        }
        sum
    }
}

/// `x^e` with `0^0 = 1`.
pub(crate) fn pow(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl<'a> Add<&'a BivarPoly> for &'a BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a BivarPoly> for &'a BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a BivarPoly> for &'a BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for BivarPoly {
    type Output = BivarPoly;
    fn neg(mut self) -> BivarPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "*X1^{i}")?;
            }
            if j > 0 {
                write!(f, "*X2^{j}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = BivarPoly::monomial(q(3, 2), 1, 0);
        let b = BivarPoly::monomial(q(3, 2), 1, 0);
        assert!((&a - &b).is_zero());
        assert_eq!((&a - &b).homogeneous_degree(), None);
    }

    #[test]
    fn product_and_eval() {
        // (X1 + X2)(X1 - X2) = X1^2 - X2^2
        let mut s = BivarPoly::monomial(q(1, 1), 1, 0);
        s.add_term(0, 1, q(1, 1));
        let mut d = BivarPoly::monomial(q(1, 1), 1, 0);
        d.add_term(0, 1, q(-1, 1));
        let p = &s * &d;
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(2, 0), q(1, 1));
        assert_eq!(p.coeff(0, 2), q(-1, 1));
        assert_eq!(p.coeff(1, 1), q(0, 1));
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(p.eval(&q(1, 2), &q(1, 3)), q(1, 4) - q(1, 9));
    }

    #[test]
    fn zero_power_is_one() {
        assert_eq!(pow(&q(0, 1), 0), q(1, 1));
        let c = BivarPoly::monomial(q(5, 7), 0, 0);
        assert_eq!(c.eval(&q(0, 1), &q(0, 1)), q(5, 7));
    }
}
