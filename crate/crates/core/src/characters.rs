//! Weyl-Kac characters, the denominator `D` and its deformation `D_v`, the
//! Gindikin-Karpelevich product `Delta` and the correction factor `m_v`, all
//! as truncated anchored series.
//!
//! The shift `rho` appearing in the character and denominator formulas is
//! taken to be the coweight `rho^vee` with every label equal to 1; that is
//! the only reading that lives in the coweight group algebra.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rootdata::{Coroot, RootDatum};
use crate::series::{accumulate, geometric_inverse, height, AnchoredSeries, Beta};
use crate::vpoly::VPoly;
use crate::weyl::{LayerWalker, DEFAULT_LAYER_CAP};

fn deformation(deformed: bool) -> VPoly {
    if deformed {
        VPoly::v_pow(-1)
    } else {
        VPoly::one()
    }
}

fn product(datum: &RootDatum, depth: u32, factors: impl IntoIterator<Item = AnchoredSeries>) -> Result<AnchoredSeries> {
    let mut acc = AnchoredSeries::one(datum.spec()).truncate(depth)?;
    for f in factors {
        acc = acc.mul(&f)?;
    }
    Ok(acc)
}

fn repeated(s: AnchoredSeries, times: u32) -> impl Iterator<Item = AnchoredSeries> {
    std::iter::repeat_n(s, times as usize)
}

/// `prod_{a > 0, ht(a) <= depth} (1 - u e^{-a})^{m(a)}` with `u = 1`, or
/// `u = v^-1` for the deformed denominator `D_v`.
pub fn denominator(datum: &RootDatum, depth: u32, deformed: bool) -> Result<AnchoredSeries> {
    let u = deformation(deformed);
    let mut factors = Vec::new();
    for root in datum.positive_coroots_up_to(depth) {
        let f = AnchoredSeries::one_minus(datum.spec(), &u, &root.coords)?;
        factors.extend(repeated(f, root.multiplicity));
    }
    product(datum, depth, factors)
}

/// `1 / D` (or `1 / D_v`), factor by factor through geometric series.
pub fn inverse_denominator(datum: &RootDatum, depth: u32, deformed: bool) -> Result<AnchoredSeries> {
    let u = deformation(deformed);
    let mut factors = Vec::new();
    for root in datum.positive_coroots_up_to(depth) {
        let g = geometric_inverse(datum.spec(), &u, &root.coords, depth)?;
        factors.extend(repeated(g, root.multiplicity));
    }
    product(datum, depth, factors)
}

/// `Delta = prod_{a > 0} ((1 - v^-1 e^{-a}) / (1 - e^{-a}))^{m(a)}`.
pub fn gk_delta(datum: &RootDatum, depth: u32) -> Result<AnchoredSeries> {
    let vinv = VPoly::v_pow(-1);
    let mut factors = Vec::new();
    for root in datum.positive_coroots_up_to(depth) {
        let num = AnchoredSeries::one_minus(datum.spec(), &vinv, &root.coords)?;
        let den = geometric_inverse(datum.spec(), &VPoly::one(), &root.coords, depth)?;
        factors.extend(repeated(num.mul(&den)?, root.multiplicity));
    }
    product(datum, depth, factors)
}

/// Which way up the imaginary-root correction product is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    /// `prod (1 - v^{-m_i - 1} e^{-jc}) / (1 - v^{-m_i} e^{-jc})`.
    #[default]
    Direct,
    /// `prod (1 - v^{-m_i} e^{-jc}) / (1 - v^{-m_i - 1} e^{-jc})`, the inverse.
    Reciprocal,
}

impl std::str::FromStr for Correction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "reciprocal" => Ok(Self::Reciprocal),
            _ => Err(Error::Parse { what: "correction", input: s.to_string() }),
        }
    }
}

impl std::fmt::Display for Correction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Reciprocal => "reciprocal",
        })
    }
}

/// `m_v = prod_{i=1}^{l} prod_{j >= 1} (1 - v^{-m_i - 1} e^{-jc}) / (1 - v^{-m_i} e^{-jc})`
/// over the exponents `m_i` of the finite part.
pub fn m_factor(datum: &RootDatum, depth: u32) -> Result<AnchoredSeries> {
    correction_factor(datum, depth, Correction::Direct)
}

/// [`m_factor`] or its inverse.
pub fn correction_factor(datum: &RootDatum, depth: u32, which: Correction) -> Result<AnchoredSeries> {
    let c = datum
        .null_root()
        .ok_or_else(|| Error::WrongKind { spec: datum.spec().to_string(), expected: "affine" })?;
    let hc = height(&c);
    let mut factors = Vec::new();
    for &m in &datum.exponents().values {
        let m = m as i32;
        let (top, bottom) = match which {
            Correction::Direct => (-m - 1, -m),
            Correction::Reciprocal => (-m, -m - 1),
        };
        for j in 1..=i64::from(depth) / hc {
            let jc: Beta = c.iter().map(|x| x * j).collect();
            let num = AnchoredSeries::one_minus(datum.spec(), &VPoly::v_pow(top), &jc)?;
            let den = geometric_inverse(datum.spec(), &VPoly::v_pow(bottom), &jc, depth)?;
            factors.push(num.mul(&den)?);
        }
    }
    product(datum, depth, factors)
}

pub fn check_dominant(datum: &RootDatum, labels: &[i64]) -> Result<()> {
    datum.check_len(labels)?;
    if labels.iter().any(|&x| x < 0) {
        return Err(Error::NotDominant(labels.to_vec()));
    }
    Ok(())
}

/// `sum_w (-1)^{l(w)} e^{w(Lambda + rho) - rho}` truncated to `depth`,
/// anchored at `Lambda`.
///
/// `Lambda + rho` is regular dominant, so `ht((Lambda + rho) - w(Lambda + rho)) >= l(w)`
/// and the walk can drop every element whose key exceeds the depth.
pub fn weyl_kac_numerator(datum: &RootDatum, labels: &[i64], depth: u32) -> Result<AnchoredSeries> {
    check_dominant(datum, labels)?;
    let shifted: Vec<i64> = labels.iter().map(|x| x + 1).collect();
    let mut walker = LayerWalker::with_point(datum, shifted, usize::MAX)?.prune_above(i64::from(depth));
    let mut terms: BTreeMap<Beta, VPoly> = BTreeMap::new();
    loop {
        let layer = walker.current();
        let sign = VPoly::constant(if layer.length % 2 == 0 { 1 } else { -1 });
        for w in &layer.elements {
            accumulate(&mut terms, w.orbit_key.clone(), &sign);
        }
        if !walker.advance()? {
            break;
        }
    }
    AnchoredSeries::truncated(datum.spec(), labels.to_vec(), depth, terms)
}

/// `chi_Lambda = N / D` to the given depth.
pub fn weyl_kac_character(datum: &RootDatum, labels: &[i64], depth: u32) -> Result<AnchoredSeries> {
    let numerator = weyl_kac_numerator(datum, labels, depth)?;
    numerator.mul(&inverse_denominator(datum, depth, false)?)
}

/// The finite-dimensional character as an exact Laurent polynomial: the
/// numerator over all of `W`, divided exactly by each `1 - e^{-a}`.
pub fn finite_character_exact(datum: &RootDatum, labels: &[i64]) -> Result<AnchoredSeries> {
    if datum.is_affine() {
        return Err(Error::WrongKind { spec: datum.spec().to_string(), expected: "finite" });
    }
    check_dominant(datum, labels)?;
    let shifted: Vec<i64> = labels.iter().map(|x| x + 1).collect();
    let depth = lowest_weight_height(datum, &shifted)?;
    let numerator = weyl_kac_numerator(datum, labels, depth)?;
    let mut chi = AnchoredSeries::exact(datum.spec(), labels.to_vec(), numerator.terms().clone())?;
    for root in datum.finite_positive_roots() {
        chi = chi.divide_by_one_minus(root)?;
    }
    Ok(chi)
}

/// `ht(Lambda - w_0 Lambda)` by walking the whole finite group.
fn lowest_weight_height(datum: &RootDatum, labels: &[i64]) -> Result<u32> {
    let mut walker = LayerWalker::new(datum, DEFAULT_LAYER_CAP);
    let mut best = 0i64;
    loop {
        for w in &walker.current().elements {
            let beta = w.word.iter().rev().fold(vec![0; labels.len()], |acc, &i| {
                crate::weyl::reflect_raw(datum.cartan(), i - 1, labels, &acc)
            });
            best = best.max(height(&beta));
        }
        if !walker.advance()? {
            break;
        }
    }
    Ok(best as u32)
}

/// `D^{w_i} = -e^{a_i} D` up to `depth`.
///
/// `D^{w_i}` is recomputed by reflecting every factor `1 - e^{-a}` of `D`
/// through `w_i`; multiplying both sides by `e^{-a_i}` keeps them inside the
/// anchor cone. Every factor whose image can land at height `<= depth` is
/// included.
pub fn check_denominator_wtwist(datum: &RootDatum, i: usize, depth: u32) -> Result<bool> {
    let g = datum.check_generator(i)?;
    let cartan = datum.cartan();
    let mut simple = vec![0; datum.generator_count()];
    simple[g] = 1;
    // heights of preimages of everything that can matter
    let reach = datum
        .positive_coroots_up_to(depth)
        .iter()
        .map(|r| height(&cartan.reflect_coroot(g, &r.coords)))
        .max()
        .unwrap_or(0)
        .max(i64::from(depth));
    let mut lhs_factors: Vec<AnchoredSeries> = Vec::new();
    // e^{-a_i} (1 - e^{a_i}) = -(1 - e^{-a_i})
    lhs_factors.push(AnchoredSeries::one_minus(datum.spec(), &VPoly::one(), &simple)?.neg());
    for root in datum.positive_coroots_up_to(reach as u32) {
        if root.coords == simple {
            continue;
        }
        let image = cartan.reflect_coroot(g, &root.coords);
        if image.iter().any(|&x| x < 0) {
            return Ok(false);
        }
        if height(&image) > i64::from(depth) {
            continue;
        }
        let f = AnchoredSeries::one_minus(datum.spec(), &VPoly::one(), &image)?;
        lhs_factors.extend(repeated(f, root.multiplicity));
    }
    let lhs = product(datum, depth, lhs_factors)?;
    let rhs = denominator(datum, depth, false)?.neg();
    Ok(lhs.first_difference(&rhs, None)?.is_none())
}

/// Positive coroots, for callers that only need the list.
pub fn positive_coroots(datum: &RootDatum, depth: u32) -> Vec<Coroot> {
    datum.positive_coroots_up_to(depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(s: &str) -> RootDatum {
        RootDatum::new(s.parse().unwrap())
    }

    fn series(d: &RootDatum, anchor: Vec<i64>, depth: u32, terms: Vec<(Vec<i64>, VPoly)>) -> AnchoredSeries {
        AnchoredSeries::truncated(d.spec(), anchor, depth, terms).unwrap()
    }

    fn vinv() -> VPoly {
        VPoly::v_pow(-1)
    }

    #[test]
    fn denominator_examples() {
        let a1 = datum("A1");
        assert_eq!(
            denominator(&a1, 1, false).unwrap(),
            series(&a1, vec![0], 1, vec![(vec![0], VPoly::one()), (vec![1], VPoly::constant(-1))])
        );

        let aff = datum("A1!");
        let expected = series(
            &aff,
            vec![0, 0],
            2,
            vec![
                (vec![0, 0], VPoly::one()),
                (vec![1, 0], -vinv()),
                (vec![0, 1], -vinv()),
                (vec![1, 1], VPoly::from_terms([(-2, 1), (-1, -1)])),
            ],
        );
        assert_eq!(denominator(&aff, 2, true).unwrap(), expected);

        // the theta factor cancels the cross term: e^{-a1-a2} has coefficient 0
        let a2 = datum("A2");
        let expected = series(
            &a2,
            vec![0, 0],
            2,
            vec![
                (vec![0, 0], VPoly::one()),
                (vec![1, 0], VPoly::constant(-1)),
                (vec![0, 1], VPoly::constant(-1)),
            ],
        );
        assert_eq!(denominator(&a2, 2, false).unwrap(), expected);
    }

    #[test]
    fn gk_delta_examples() {
        let a1 = datum("A1");
        let one_minus = &VPoly::one() - &vinv();
        assert_eq!(
            gk_delta(&a1, 2).unwrap(),
            series(&a1, vec![0], 2, vec![(vec![0], VPoly::one()), (vec![1], one_minus.clone()), (vec![2], one_minus)])
        );
        assert_eq!(gk_delta(&a1, 0).unwrap(), series(&a1, vec![0], 0, vec![(vec![0], VPoly::one())]));
        for s in ["A2", "A1!", "A2!"] {
            let d = datum(s);
            let lhs = gk_delta(&d, 5).unwrap().mul(&denominator(&d, 5, false).unwrap()).unwrap();
            assert_eq!(lhs, denominator(&d, 5, true).unwrap(), "{s}");
        }
    }

    #[test]
    fn m_factor_examples() {
        let aff = datum("A1!");
        let one = series(&aff, vec![0, 0], 1, vec![(vec![0, 0], VPoly::one())]);
        assert_eq!(m_factor(&aff, 1).unwrap(), one);
        let m2 = m_factor(&aff, 2).unwrap();
        assert_eq!(m2.coefficient(&[1, 1]).unwrap(), VPoly::from_terms([(-1, 1), (-2, -1)]));
        assert_eq!(m2.len(), 2);
        let a2 = datum("A2!");
        assert_eq!(m_factor(&a2, 2).unwrap().len(), 1);
        assert!(m_factor(&datum("A2"), 3).is_err());
    }

    #[test]
    fn character_examples() {
        let a1 = datum("A1");
        let trivial = weyl_kac_character(&a1, &[0], 2).unwrap();
        assert_eq!(trivial, series(&a1, vec![0], 2, vec![(vec![0], VPoly::one())]));
        let adjoint = finite_character_exact(&a1, &[2]).unwrap();
        let expected = AnchoredSeries::exact(
            a1.spec(),
            vec![2],
            [(vec![0], VPoly::one()), (vec![1], VPoly::one()), (vec![2], VPoly::one())],
        )
        .unwrap();
        assert_eq!(adjoint, expected);
        assert!(matches!(weyl_kac_character(&a1, &[-1], 2), Err(Error::NotDominant(_))));
    }

    #[test]
    fn wtwist_identity() {
        assert!(check_denominator_wtwist(&datum("A1"), 1, 3).unwrap());
        for i in 1..=2 {
            assert!(check_denominator_wtwist(&datum("A2"), i, 4).unwrap());
            assert!(check_denominator_wtwist(&datum("A1!"), i, 6).unwrap());
        }
        for i in 1..=3 {
            assert!(check_denominator_wtwist(&datum("A2!"), i, 5).unwrap());
        }
    }
}
