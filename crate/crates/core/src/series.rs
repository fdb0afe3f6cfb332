//! Anchored, depth-truncated formal series `sum_beta c_beta e^{Lambda - beta}`
//! with coefficients in `Z[v, v^-1]`.
//!
//! A series is anchored at a coweight `Lambda`, recorded only through its
//! labels `<a_i, Lambda>`, and stores displacements `beta` over the simple
//! coroots. Truncation is by total height `ht(beta) = sum beta_i`: a series
//! of depth `D` is correct at every `beta` with `ht(beta) <= D` and says
//! nothing beyond.
//!
//! Series carrying the exact flag are finite Laurent polynomials with no
//! truncation; only they may hold displacements with negative entries.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rootdata::RootSystemSpec;
use crate::vpoly::VPoly;

/// Displacement below the anchor, in simple-coroot coordinates.
pub type Beta = Vec<i64>;

pub fn height(beta: &[i64]) -> i64 {
    beta.iter().sum()
}

#[derive(Clone, PartialEq, Eq)]
pub struct AnchoredSeries {
    spec: RootSystemSpec,
    anchor: Vec<i64>,
    depth: u32,
    exact: bool,
    terms: BTreeMap<Beta, VPoly>,
}

/// First position where two series disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub beta: Beta,
    pub left: String,
    pub right: String,
}

impl AnchoredSeries {
    /// Exact finite series from arbitrary terms; zero coefficients are dropped.
    pub fn exact<I>(spec: RootSystemSpec, anchor: Vec<i64>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Beta, VPoly)>,
    {
        let n = spec.generator_count();
        check_dim(n, &anchor)?;
        let mut map: BTreeMap<Beta, VPoly> = BTreeMap::new();
        for (beta, c) in terms {
            check_dim(n, &beta)?;
            accumulate(&mut map, beta, &c);
        }
        Ok(Self::exact_from_map(spec, anchor, map))
    }

    /// Truncated series; terms above `depth` are discarded, terms outside the
    /// anchor cone are rejected.
    pub fn truncated<I>(spec: RootSystemSpec, anchor: Vec<i64>, depth: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Beta, VPoly)>,
    {
        let n = spec.generator_count();
        check_dim(n, &anchor)?;
        let mut map: BTreeMap<Beta, VPoly> = BTreeMap::new();
        for (beta, c) in terms {
            check_dim(n, &beta)?;
            if height(&beta) <= i64::from(depth) {
                accumulate(&mut map, beta, &c);
            }
        }
        check_cone(&map)?;
        Ok(Self { spec, anchor, depth, exact: false, terms: map })
    }

    pub(crate) fn exact_from_map(
        spec: RootSystemSpec,
        anchor: Vec<i64>,
        mut terms: BTreeMap<Beta, VPoly>,
    ) -> Self {
        terms.retain(|_, c| !c.is_zero());
        let depth = terms.keys().map(|b| height(b)).max().unwrap_or(0).max(0) as u32;
        Self { spec, anchor, depth, exact: true, terms }
    }

    /// `c * e^{Lambda - beta}` as an exact series.
    pub fn monomial(spec: RootSystemSpec, anchor: Vec<i64>, beta: Beta, c: VPoly) -> Result<Self> {
        Self::exact(spec, anchor, [(beta, c)])
    }

    /// The unit `e^0`, anchored at 0.
    pub fn one(spec: RootSystemSpec) -> Self {
        let n = spec.generator_count();
        Self::exact_from_map(spec, vec![0; n], BTreeMap::from([(vec![0; n], VPoly::one())]))
    }

    /// The exact binomial `1 - u e^{-beta}` anchored at 0.
    pub fn one_minus(spec: RootSystemSpec, u: &VPoly, beta: &[i64]) -> Result<Self> {
        let n = spec.generator_count();
        Self::exact(spec, vec![0; n], [(vec![0; n], VPoly::one()), (beta.to_vec(), -u)])
    }

    pub fn zero_like(&self) -> Self {
        Self { terms: BTreeMap::new(), ..self.clone() }
    }

    pub fn spec(&self) -> RootSystemSpec {
        self.spec
    }

    pub fn anchor(&self) -> &[i64] {
        &self.anchor
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn terms(&self) -> &BTreeMap<Beta, VPoly> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_height(&self) -> Option<i64> {
        self.terms.keys().map(|b| height(b)).min()
    }

    pub fn max_height(&self) -> Option<i64> {
        self.terms.keys().map(|b| height(b)).max()
    }

    /// `<a_i, Lambda - beta>` for the 0-based generator `i`, given the
    /// Cartan matrix row of `a_i`.
    #[inline]
    pub(crate) fn pairing_with(row: &[i64], label: i64, beta: &[i64]) -> i64 {
        label - row.iter().zip(beta).map(|(a, b)| a * b).sum::<i64>()
    }

    /// Every coefficient lies in `Z[v^-1]`.
    pub fn coefficients_in_z_vinv(&self) -> bool {
        self.terms.values().all(VPoly::is_in_z_vinv)
    }

    /// Every stored displacement is componentwise nonnegative.
    pub fn in_anchor_cone(&self) -> bool {
        self.terms.keys().all(|b| b.iter().all(|&x| x >= 0))
    }

    /// `[e^{Lambda - beta}] s`; zero when absent.
    pub fn coefficient(&self, beta: &[i64]) -> Result<VPoly> {
        check_dim(self.spec.generator_count(), beta)?;
        let h = height(beta);
        if !self.exact && h > i64::from(self.depth) {
            return Err(Error::OutOfTruncation { height: h, depth: self.depth });
        }
        Ok(self.terms.get(beta).cloned().unwrap_or_default())
    }

    /// Drop everything above `depth`; the result is no longer exact.
    pub fn truncate(&self, depth: u32) -> Result<Self> {
        let depth = if self.exact { depth } else { depth.min(self.depth) };
        let terms: BTreeMap<Beta, VPoly> = self
            .terms
            .iter()
            .filter(|(b, _)| height(b) <= i64::from(depth))
            .map(|(b, c)| (b.clone(), c.clone()))
            .collect();
        check_cone(&terms)?;
        Ok(Self { spec: self.spec, anchor: self.anchor.clone(), depth, exact: false, terms })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch {
                left: self.spec.to_string(),
                right: other.spec.to_string(),
            });
        }
        Ok(())
    }

    fn check_same_anchor(&self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.anchor != other.anchor {
            return Err(Error::AnchorMismatch { left: self.anchor.clone(), right: other.anchor.clone() });
        }
        Ok(())
    }

    /// Depth at which a binary result is valid: exact operands impose no
    /// bound, truncated ones bound it by their own depth.
    fn joint_depth(&self, other: &Self) -> Option<u32> {
        match (self.exact, other.exact) {
            (true, true) => None,
            (true, false) => Some(other.depth),
            (false, true) => Some(self.depth),
            (false, false) => Some(self.depth.min(other.depth)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_anchor(other)?;
        let mut terms = self.terms.clone();
        for (b, c) in &other.terms {
            accumulate(&mut terms, b.clone(), c);
        }
        self.finish_linear(other, terms)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn finish_linear(&self, other: &Self, terms: BTreeMap<Beta, VPoly>) -> Result<Self> {
        match self.joint_depth(other) {
            None => Ok(Self::exact_from_map(self.spec, self.anchor.clone(), terms)),
            Some(depth) => Self::truncated(self.spec, self.anchor.clone(), depth, terms),
        }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(b, c)| (b.clone(), -c)).collect(), ..self.clone() }
    }

    /// Multiply every coefficient by a scalar from `Z[v, v^-1]`.
    pub fn scale(&self, k: &VPoly) -> Self {
        let mut terms = BTreeMap::new();
        for (b, c) in &self.terms {
            let p = c * k;
            if !p.is_zero() {
                terms.insert(b.clone(), p);
            }
        }
        Self { terms, ..self.clone() }
    }

    /// Product; anchors add. Exact times exact is exact. Otherwise the
    /// result depth is the smallest truncated depth, lowered by any negative
    /// heights carried by the other (exact) operand.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let anchor: Vec<i64> = self.anchor.iter().zip(&other.anchor).map(|(a, b)| a + b).collect();
        let bound_from = |trunc: &Self, partner: &Self| -> i64 {
            let partner_min = if partner.exact { partner.min_height().unwrap_or(0).min(0) } else { 0 };
            i64::from(trunc.depth) + partner_min
        };
        let limit = match (self.exact, other.exact) {
            (true, true) => None,
            (false, true) => Some(bound_from(self, other)),
            (true, false) => Some(bound_from(other, self)),
            (false, false) => Some(bound_from(self, other).min(bound_from(other, self))),
        };
        if let Some(l) = limit {
            if l < 0 {
                return Err(Error::NegativeDepth(l));
            }
        }
        let lhs = by_height(&self.terms);
        let rhs = by_height(&other.terms);
        let mut acc: HashMap<Beta, VPoly> = HashMap::new();
        for (ha, ba, ca) in &lhs {
            for (hb, bb, cb) in &rhs {
                if let Some(l) = limit {
                    if ha + hb > l {
                        break;
                    }
                }
                let beta: Beta = ba.iter().zip(bb.iter()).map(|(x, y)| x + y).collect();
                let p = *ca * *cb;
                match acc.get_mut(&beta) {
                    Some(slot) => *slot += &p,
                    None => {
                        acc.insert(beta, p);
                    }
                }
            }
        }
        let terms: BTreeMap<Beta, VPoly> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        match limit {
            None => Ok(Self::exact_from_map(self.spec, anchor, terms)),
            Some(l) => Self::truncated(self.spec, anchor, l as u32, terms),
        }
    }

    /// Re-anchor at `Lambda + delta` without moving any term, i.e. multiply by
    /// `e^{delta}` where `delta` is given by its labels.
    pub fn shift_anchor(&self, delta_labels: &[i64]) -> Result<Self> {
        check_dim(self.spec.generator_count(), delta_labels)?;
        let anchor = self.anchor.iter().zip(delta_labels).map(|(a, b)| a + b).collect();
        Ok(Self { anchor, ..self.clone() })
    }

    /// Exact substitution `v := q` in every coefficient.
    pub fn evaluate_v(&self, q: &BigRational) -> Result<BTreeMap<Beta, BigRational>> {
        if q.is_zero() {
            return Err(Error::ZeroParameter);
        }
        Ok(self
            .terms
            .iter()
            .map(|(b, c)| (b.clone(), c.evaluate(q)))
            .filter(|(_, r)| !r.is_zero())
            .collect())
    }

    /// Exact quotient `Q` with `self = (1 - e^{-beta}) Q`, by prefix sums
    /// along every line parallel to `beta`. Fails unless each line sums to 0.
    pub fn divide_by_one_minus(&self, beta: &[i64]) -> Result<Self> {
        if !self.exact {
            return Err(Error::NotExact);
        }
        check_dim(self.spec.generator_count(), beta)?;
        let Some(p) = beta.iter().position(|&x| x > 0) else {
            return Err(Error::ZeroHeightDisplacement);
        };
        let mut lines: BTreeMap<Beta, BTreeMap<i64, &VPoly>> = BTreeMap::new();
        for (b, c) in &self.terms {
            let t = b[p].div_euclid(beta[p]);
            let base: Beta = b.iter().zip(beta).map(|(x, y)| x - t * y).collect();
            lines.entry(base).or_default().insert(t, c);
        }
        let mut terms = BTreeMap::new();
        for (base, line) in lines {
            let mut running = VPoly::zero();
            let (&lo, &hi) = (line.keys().next().unwrap(), line.keys().next_back().unwrap());
            for t in lo..=hi {
                if let Some(c) = line.get(&t) {
                    running += *c;
                }
                if t < hi && !running.is_zero() {
                    terms.insert(base.iter().zip(beta).map(|(x, y)| x + t * y).collect(), running.clone());
                }
            }
            if !running.is_zero() {
                return Err(Error::NotDivisible { beta: base });
            }
        }
        Ok(Self::exact_from_map(self.spec, self.anchor.clone(), terms))
    }

    /// Coefficientwise comparison at every `beta` with `ht(beta) <= bound`,
    /// where `bound` defaults to the depth both sides are valid to. Returns
    /// the lexicographically first disagreement.
    pub fn first_difference(&self, other: &Self, bound: Option<i64>) -> Result<Option<Witness>> {
        self.check_same_anchor(other)?;
        let natural = self.joint_depth(other).map(i64::from);
        let bound = match (bound, natural) {
            (Some(b), Some(n)) => Some(b.min(n)),
            (b, n) => b.or(n),
        };
        let within = |b: &Beta| bound.is_none_or(|l| height(b) <= l);
        let zero = VPoly::zero();
        let mut keys: Vec<&Beta> = self.terms.keys().chain(other.terms.keys()).filter(|b| within(b)).collect();
        keys.sort();
        keys.dedup();
        for b in keys {
            let l = self.terms.get(b).unwrap_or(&zero);
            let r = other.terms.get(b).unwrap_or(&zero);
            if l != r {
                return Ok(Some(Witness { beta: b.clone(), left: l.to_string(), right: r.to_string() }));
            }
        }
        Ok(None)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(b, c)| {
                let coeff: Vec<Value> =
                    c.terms().map(|(d, k)| Value::Array(vec![Value::from(d), bigint_to_json(k)])).collect();
                serde_json::json!({ "beta": b, "coeff": coeff })
            })
            .collect();
        serde_json::json!({
            "spec": self.spec.to_string(),
            "anchor_labels": self.anchor,
            "depth": self.depth,
            "exact": self.exact,
            "terms": terms,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let wire: SeriesWire = serde_json::from_value(value.clone())?;
        let mut terms = Vec::with_capacity(wire.terms.len());
        for t in wire.terms {
            let mut c = VPoly::zero();
            for (d, k) in t.coeff {
                c.add_term(d, json_to_bigint(&k)?);
            }
            terms.push((t.beta, c));
        }
        if wire.exact {
            Self::exact(wire.spec, wire.anchor_labels, terms)
        } else {
            Self::truncated(wire.spec, wire.anchor_labels, wire.depth, terms)
        }
    }
}

#[derive(Deserialize)]
struct SeriesWire {
    spec: RootSystemSpec,
    anchor_labels: Vec<i64>,
    depth: u32,
    exact: bool,
    terms: Vec<TermWire>,
}

#[derive(Deserialize)]
struct TermWire {
    beta: Vec<i64>,
    coeff: Vec<(i32, Value)>,
}

/// Integers that fit in `i64` are plain JSON numbers, larger ones decimal strings.
fn bigint_to_json(k: &BigInt) -> Value {
    match k.to_i64() {
        Some(x) => Value::from(x),
        None => Value::from(k.to_string()),
    }
}

fn json_to_bigint(v: &Value) -> Result<BigInt> {
    let bad = || Error::Parse { what: "integer coefficient", input: v.to_string() };
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(bad),
        Value::String(s) => s.parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn by_height(terms: &BTreeMap<Beta, VPoly>) -> Vec<(i64, &Beta, &VPoly)> {
    let mut v: Vec<_> = terms.iter().map(|(b, c)| (height(b), b, c)).collect();
    v.sort_by_key(|t| t.0);
    v
}

pub(crate) fn accumulate(map: &mut BTreeMap<Beta, VPoly>, beta: Beta, c: &VPoly) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(beta) {
        Entry::Vacant(slot) => {
            slot.insert(c.clone());
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

fn check_dim(n: usize, v: &[i64]) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: n, got: v.len() })
    }
}

fn check_cone(terms: &BTreeMap<Beta, VPoly>) -> Result<()> {
    match terms.keys().find(|b| b.iter().any(|&x| x < 0)) {
        Some(b) => Err(Error::OutsideAnchorCone { beta: b.clone() }),
        None => Ok(()),
    }
}

/// `sum_{j >= 0, j ht(beta) <= depth} u^j e^{-j beta}`, the expansion of
/// `1 / (1 - u e^{-beta})`, anchored at 0.
pub fn geometric_inverse(spec: RootSystemSpec, u: &VPoly, beta: &[i64], depth: u32) -> Result<AnchoredSeries> {
    check_dim(spec.generator_count(), beta)?;
    let h = height(beta);
    if h <= 0 {
        return Err(Error::ZeroHeightDisplacement);
    }
    let n = spec.generator_count();
    let mut terms = Vec::new();
    let mut power = VPoly::one();
    let mut j = 0i64;
    while j * h <= i64::from(depth) {
        terms.push((beta.iter().map(|x| x * j).collect::<Beta>(), power.clone()));
        power = &power * u;
        j += 1;
    }
    AnchoredSeries::truncated(spec, vec![0; n], depth, terms)
}

impl fmt::Debug for AnchoredSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnchoredSeries[{} @ {:?}, ", self.spec, self.anchor)?;
        if self.exact {
            f.write_str("exact]")?;
        } else {
            write!(f, "depth {}]", self.depth)?;
        }
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for AnchoredSeries {
    /// Terms ordered by height, e.g. `(1) e^[0,0] + (-v^-1) e^[1,0]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (_, b, c)) in by_height(&self.terms).into_iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c}) e^-{b:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> RootSystemSpec {
        "A1".parse().unwrap()
    }

    fn vinv() -> VPoly {
        VPoly::v_pow(-1)
    }

    fn one_minus_vinv() -> VPoly {
        &VPoly::one() - &vinv()
    }

    #[test]
    fn geometric_series_telescopes() {
        for depth in 0..6 {
            let g = geometric_inverse(a1(), &VPoly::one(), &[1], depth).unwrap();
            let f = AnchoredSeries::one_minus(a1(), &VPoly::one(), &[1]).unwrap();
            let p = f.mul(&g).unwrap();
            assert_eq!(p.depth(), depth);
            assert_eq!(p.terms().len(), 1);
            assert!(p.coefficient(&[0]).unwrap().is_one());
        }
    }

    #[test]
    fn a1_product_example() {
        let lhs = AnchoredSeries::one_minus(a1(), &vinv(), &[1]).unwrap();
        let rhs = AnchoredSeries::exact(a1(), vec![0], [(vec![0], VPoly::one()), (vec![1], VPoly::one())]).unwrap();
        let p = lhs.mul(&rhs).unwrap();
        assert!(p.is_exact());
        assert!(p.coefficient(&[0]).unwrap().is_one());
        assert_eq!(p.coefficient(&[1]).unwrap(), one_minus_vinv());
        assert_eq!(p.coefficient(&[2]).unwrap(), -vinv());
        let at2 = p.evaluate_v(&BigRational::from_integer(2.into())).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(at2[&vec![0]], BigRational::from_integer(1.into()));
        assert_eq!(at2[&vec![1]], half);
        assert_eq!(at2[&vec![2]], -half);
    }

    #[test]
    fn identity_product() {
        let s = AnchoredSeries::monomial(a1(), vec![2], vec![0], VPoly::one()).unwrap();
        assert_eq!(s.mul(&AnchoredSeries::one(a1())).unwrap(), s);
    }

    #[test]
    fn geometric_inverse_examples() {
        let g = geometric_inverse(a1(), &VPoly::one(), &[1], 2).unwrap();
        assert_eq!(g.len(), 3);
        let aff: RootSystemSpec = "A1!".parse().unwrap();
        let g = geometric_inverse(aff, &vinv(), &[1, 1], 5).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.coefficient(&[2, 2]).unwrap(), VPoly::v_pow(-2));
        assert!(matches!(geometric_inverse(aff, &vinv(), &[0, 0], 5), Err(Error::ZeroHeightDisplacement)));
    }

    #[test]
    fn out_of_depth_query() {
        let g = geometric_inverse(a1(), &VPoly::one(), &[1], 2).unwrap();
        assert!(matches!(g.coefficient(&[3]), Err(Error::OutOfTruncation { .. })));
        assert!(AnchoredSeries::one(a1()).coefficient(&[0]).unwrap().is_one());
    }

    #[test]
    fn exact_with_negative_height_lowers_depth() {
        let g = geometric_inverse(a1(), &VPoly::one(), &[1], 4).unwrap();
        let up = AnchoredSeries::monomial(a1(), vec![0], vec![-1], VPoly::one()).unwrap();
        // e^{a} * sum e^{-ja} leaves the anchor cone at beta = -1
        assert!(matches!(up.mul(&g), Err(Error::OutsideAnchorCone { .. })));
        let shifted = up.mul(&AnchoredSeries::monomial(a1(), vec![0], vec![1], VPoly::one()).unwrap()).unwrap();
        assert_eq!(shifted, AnchoredSeries::one(a1()));
    }

    #[test]
    fn json_layout_is_stable() {
        let s = AnchoredSeries::one_minus(a1(), &vinv(), &[1]).unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"anchor_labels":[0],"depth":1,"exact":true,"spec":"A1","terms":[{"beta":[0],"coeff":[[0,1]]},{"beta":[1],"coeff":[[-1,-1]]}]}"#
        );
        assert_eq!(AnchoredSeries::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn spec_mismatch() {
        let aff: RootSystemSpec = "A1!".parse().unwrap();
        let err = AnchoredSeries::one(a1()).mul(&AnchoredSeries::one(aff));
        assert!(matches!(err, Err(Error::SpecMismatch { .. })));
    }
}
