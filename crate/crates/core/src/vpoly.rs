//! Laurent polynomials in the formal parameter `v` with integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sparse map from `v`-degree to a nonzero integer coefficient.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct VPoly {
    terms: BTreeMap<i32, BigInt>,
}

impl VPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(0, c)
    }

    /// `c * v^degree`.
    pub fn monomial(degree: i32, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(degree, c);
        }
        Self { terms }
    }

    /// `v^degree`.
    pub fn v_pow(degree: i32) -> Self {
        Self::monomial(degree, 1)
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, C)>,
        C: Into<BigInt>,
    {
        let mut out = Self::zero();
        for (d, c) in terms {
            out.add_term(d, c.into());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(One::is_one)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigInt)> {
        self.terms.iter().map(|(&d, c)| (d, c))
    }

    pub fn coeff(&self, degree: i32) -> BigInt {
        self.terms.get(&degree).cloned().unwrap_or_default()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// Membership in `Z[v^-1]`: no positive powers of `v`.
    pub fn is_in_z_vinv(&self) -> bool {
        self.max_degree().is_none_or(|d| d <= 0)
    }

    pub fn add_term(&mut self, degree: i32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(degree) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// Multiply by `v^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        Self { terms: self.terms.iter().map(|(&d, c)| (d + shift, c.clone())).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(&d, c)| (d, c * k)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact substitution `v := q`.
    pub fn evaluate(&self, q: &BigRational) -> BigRational {
        assert!(!q.is_zero(), "evaluation point must be nonzero");
        let mut acc = BigRational::zero();
        for (&d, c) in &self.terms {
            let p = if d >= 0 { pow_rat(q, d as u32) } else { pow_rat(&q.recip(), d.unsigned_abs()) };
            acc += p * BigRational::from_integer(c.clone());
        }
        acc
    }
}

fn pow_rat(q: &BigRational, n: u32) -> BigRational {
    num_traits::pow(q.clone(), n as usize)
}

impl fmt::Debug for VPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VPoly {
    /// Descending degree, e.g. `1 - v^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (&d, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let unit = mag.is_one();
            match d {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !unit {
                        write!(f, "{mag}*")?;
                    }
                    if d == 1 {
                        f.write_str("v")?;
                    } else {
                        write!(f, "v^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl AddAssign<&VPoly> for VPoly {
    fn add_assign(&mut self, rhs: &VPoly) {
        for (&d, c) in &rhs.terms {
            self.add_term(d, c.clone());
        }
    }
}

impl SubAssign<&VPoly> for VPoly {
    fn sub_assign(&mut self, rhs: &VPoly) {
        for (&d, c) in &rhs.terms {
            self.add_term(d, -c);
        }
    }
}

impl Add for &VPoly {
    type Output = VPoly;
    fn add(self, rhs: &VPoly) -> VPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &VPoly {
    type Output = VPoly;
    fn sub(self, rhs: &VPoly) -> VPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &VPoly {
    type Output = VPoly;
    fn neg(self) -> VPoly {
        VPoly { terms: self.terms.iter().map(|(&d, c)| (d, -c)).collect() }
    }
}

impl Neg for VPoly {
    type Output = VPoly;
    fn neg(mut self) -> VPoly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Mul for &VPoly {
    type Output = VPoly;
    fn mul(self, rhs: &VPoly) -> VPoly {
        let mut out = VPoly::zero();
        for (&da, ca) in &self.terms {
            for (&db, cb) in &rhs.terms {
                out.add_term(da + db, ca * cb);
            }
        }
        out
    }
}
