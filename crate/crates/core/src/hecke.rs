//! Demazure-Lusztig operators on the coweight group algebra.
//!
//! For a simple coroot `a = a_i^vee`,
//!
//! ```text
//! T_a  = (1 - v^-1 e^{-a}) / (1 - e^{a}) [w_a] + (v^-1 - 1) / (1 - e^{a}) [1]
//! T'_a = (1 - v e^{a})     / (1 - e^{a}) [w_a] + (v - 1)    / (1 - e^{a}) [1]
//! ```
//!
//! Both are applied to finite series by assembling the numerator and
//! dividing it exactly by `1 - e^{a}`; a nonzero remainder is an error, never
//! silently expanded away.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootdata::RootDatum;
use crate::series::{accumulate, AnchoredSeries, Beta};
use crate::vpoly::VPoly;
use crate::weyl::{LayerWalker, DEFAULT_LAYER_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DLKind {
    T,
    TPrime,
}

/// `T_i(s)` or `T'_i(s)` for an exact series `s` (1-based generator `i`).
pub fn apply_t(datum: &RootDatum, i: usize, s: &AnchoredSeries, kind: DLKind) -> Result<AnchoredSeries> {
    if !s.is_exact() {
        return Err(Error::NotExact);
    }
    let g = datum.check_generator(i)?;
    let terms = apply_t_terms(datum, g, s.anchor(), s.terms(), kind)?;
    Ok(AnchoredSeries::exact_from_map(s.spec(), s.anchor().to_vec(), terms))
}

/// `T_i` applied to the stored terms of a truncated series, with the result
/// kept only up to `depth - buffer`. Raising terms of `T_i` can pull
/// unstored terms from above the depth into range; `buffer` must cover the
/// largest such shift.
pub fn apply_t_truncated(
    datum: &RootDatum,
    i: usize,
    s: &AnchoredSeries,
    kind: DLKind,
    buffer: u32,
) -> Result<AnchoredSeries> {
    let g = datum.check_generator(i)?;
    let depth = i64::from(s.depth()) - i64::from(buffer);
    if depth < 0 {
        return Err(Error::NegativeDepth(depth));
    }
    let terms = apply_t_terms(datum, g, s.anchor(), s.terms(), kind)?;
    AnchoredSeries::truncated(s.spec(), s.anchor().to_vec(), depth as u32, terms)
}

fn apply_t_terms(
    datum: &RootDatum,
    g: usize,
    labels: &[i64],
    terms: &BTreeMap<Beta, VPoly>,
    kind: DLKind,
) -> Result<BTreeMap<Beta, VPoly>> {
    let row = &datum.cartan().rows()[g];
    // numerator coefficients: e^{mu} -> (1 - u e^{sigma a}) e^{w_a mu} + (u - 1) e^{mu}
    let (u, sigma) = match kind {
        DLKind::T => (VPoly::v_pow(-1), 1i64),
        DLKind::TPrime => (VPoly::v_pow(1), -1i64),
    };
    let u_minus_one = &u - &VPoly::one();
    let mut numerator: BTreeMap<Beta, VPoly> = BTreeMap::new();
    for (beta, c) in terms {
        let k = AnchoredSeries::pairing_with(row, labels[g], beta);
        let mut image = beta.clone();
        image[g] += k;
        let mut shifted = image.clone();
        shifted[g] += sigma;
        accumulate(&mut numerator, image, c);
        accumulate(&mut numerator, shifted, &-(c * &u));
        accumulate(&mut numerator, beta.clone(), &(c * &u_minus_one));
    }
    divide_by_one_minus_raise(g, numerator)
}

/// Exact division by `1 - e^{a_g}` in the Laurent ring.
///
/// Writing `y = e^{-a_g}`, each line `beta + Z e_g` carries a Laurent
/// polynomial `N(y)`, and `N / (1 - y^-1) = y N / (y - 1)`. The quotient's
/// coefficient at `y^t` is the suffix sum `sum_{s >= t} c_s`; the remainder
/// is `N(1)` and must vanish.
fn divide_by_one_minus_raise(g: usize, numerator: BTreeMap<Beta, VPoly>) -> Result<BTreeMap<Beta, VPoly>> {
    let mut lines: BTreeMap<Beta, BTreeMap<i64, VPoly>> = BTreeMap::new();
    for (mut beta, c) in numerator {
        let t = beta[g];
        beta[g] = 0;
        lines.entry(beta).or_default().insert(t, c);
    }
    let mut out = BTreeMap::new();
    for (line, coeffs) in lines {
        let (&t_min, _) = coeffs.first_key_value().expect("lines are nonempty");
        let (&t_max, _) = coeffs.last_key_value().expect("lines are nonempty");
        let mut running = VPoly::zero();
        for t in (t_min + 1..=t_max).rev() {
            if let Some(c) = coeffs.get(&t) {
                running += c;
            }
            if !running.is_zero() {
                let mut beta = line.clone();
                beta[g] = t;
                out.insert(beta, running.clone());
            }
        }
        running += &coeffs[&t_min];
        if !running.is_zero() {
            let mut beta = line;
            beta[g] = t_min;
            return Err(Error::NonExactDivision { generator: g + 1, beta });
        }
    }
    Ok(out)
}

/// `T_w(s)` for `w = w_{i_1} ... w_{i_r}`: the rightmost letter acts first.
pub fn apply_t_word(datum: &RootDatum, word: &[usize], s: &AnchoredSeries, kind: DLKind) -> Result<AnchoredSeries> {
    word.iter().rev().try_fold(s.clone(), |acc, &i| apply_t(datum, i, &acc, kind))
}

/// `T^2 = (v^-1 - 1) T + v^-1`, or `T'^2 = (v - 1) T' + v`, on `s`.
pub fn check_quadratic(datum: &RootDatum, i: usize, s: &AnchoredSeries, kind: DLKind) -> Result<bool> {
    let once = apply_t(datum, i, s, kind)?;
    let twice = apply_t(datum, i, &once, kind)?;
    let u = match kind {
        DLKind::T => VPoly::v_pow(-1),
        DLKind::TPrime => VPoly::v_pow(1),
    };
    let rhs = once.scale(&(&u - &VPoly::one())).add(&s.scale(&u))?;
    Ok(twice == rhs)
}

/// Braid relation between generators `i` and `j` on `s`: commuting when the
/// nodes are not joined, the length-three relation when they are. Returns
/// `None` when `w_i w_j` has infinite order.
pub fn check_braid(datum: &RootDatum, i: usize, j: usize, s: &AnchoredSeries, kind: DLKind) -> Result<Option<bool>> {
    let (gi, gj) = (datum.check_generator(i)?, datum.check_generator(j)?);
    let m = match datum.cartan().entry(gi, gj) * datum.cartan().entry(gj, gi) {
        0 => 2,
        1 => 3,
        _ => return Ok(None),
    };
    let word = |first: usize, second: usize| -> Vec<usize> {
        (0..m).map(|k| if k % 2 == 0 { first } else { second }).collect()
    };
    let lhs = apply_t_word(datum, &word(i, j), s, kind)?;
    let rhs = apply_t_word(datum, &word(j, i), s, kind)?;
    Ok(Some(lhs == rhs))
}

/// `e^{-rho} T'_i (e^{rho} s) = -v T_i(s)`. Multiplying by `e^{rho}` raises
/// every pairing `<a_j, mu>` by one, which is how it is realized here.
pub fn check_conjugation(datum: &RootDatum, i: usize, s: &AnchoredSeries) -> Result<bool> {
    let n = datum.generator_count();
    let up = s.shift_anchor(&vec![1; n])?;
    let lhs = apply_t(datum, i, &up, DLKind::TPrime)?.shift_anchor(&vec![-1; n])?;
    let rhs = apply_t(datum, i, s, DLKind::T)?.scale(&-VPoly::v_pow(1));
    Ok(lhs == rhs)
}

/// `e^{Lambda}` as an exact series.
pub fn highest_term(datum: &RootDatum, labels: &[i64]) -> Result<AnchoredSeries> {
    datum.check_len(labels)?;
    AnchoredSeries::monomial(datum.spec(), labels.to_vec(), vec![0; datum.generator_count()], VPoly::one())
}

/// `P_L(s) = sum_{l(w) <= L} T_w(s)` exactly, together with the
/// contribution of each layer.
pub fn symmetrizer_partial(
    datum: &RootDatum,
    seed: &AnchoredSeries,
    max_length: usize,
    cap: usize,
) -> Result<(AnchoredSeries, Vec<AnchoredSeries>)> {
    let mut run = SymmetrizerRun::new(datum, seed, cap)?;
    let mut deltas = vec![seed.clone()];
    let mut sum = seed.clone();
    for _ in 0..max_length {
        let Some(delta) = run.next_layer()? else { break };
        sum = sum.add(&delta)?;
        deltas.push(delta);
    }
    Ok((sum, deltas))
}

/// `P_L(e^Lambda)` for anchor labels `Lambda`.
pub fn symmetrizer_partial_at(
    datum: &RootDatum,
    labels: &[i64],
    max_length: usize,
) -> Result<(AnchoredSeries, Vec<AnchoredSeries>)> {
    symmetrizer_partial(datum, &highest_term(datum, labels)?, max_length, DEFAULT_LAYER_CAP)
}

/// Controls for [`symmetrizer_stabilized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StabilizeConfig {
    /// Consecutive layers that must contribute nothing up to the depth.
    pub margin: usize,
    /// Largest admissible layer size.
    pub layer_cap: usize,
    /// Longest elements ever visited.
    pub max_length: usize,
}

impl Default for StabilizeConfig {
    fn default() -> Self {
        Self { margin: 2, layer_cap: DEFAULT_LAYER_CAP, max_length: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct Stabilized {
    /// The partial sum truncated to the requested depth.
    pub series: AnchoredSeries,
    /// Length of the last layer that changed a coefficient in range.
    pub achieved_length: usize,
    /// Length of the last layer visited.
    pub walked_length: usize,
    pub stabilized: bool,
}

/// Sum `T_w(seed)` layer by layer until `margin` consecutive layers leave
/// every coefficient of height at most `depth` unchanged, or the group is
/// exhausted. Hitting the layer cap or the length cap yields an
/// unstabilized result rather than an error.
pub fn symmetrizer_stabilized(
    datum: &RootDatum,
    seed: &AnchoredSeries,
    depth: u32,
    config: StabilizeConfig,
) -> Result<Stabilized> {
    let margin = config.margin.max(1);
    let mut run = SymmetrizerRun::new(datum, seed, config.layer_cap)?;
    let mut sum = seed.truncate(depth)?;
    let mut achieved = 0;
    let mut quiet = 0;
    let mut length = 0;
    loop {
        if length >= config.max_length {
            return Ok(Stabilized { series: sum, achieved_length: achieved, walked_length: length, stabilized: false });
        }
        let delta = match run.next_layer() {
            Ok(Some(d)) => d,
            Ok(None) => {
                return Ok(Stabilized { series: sum, achieved_length: achieved, walked_length: length, stabilized: true });
            }
            Err(Error::LayerCapExceeded { .. }) => {
                return Ok(Stabilized { series: sum, achieved_length: achieved, walked_length: length, stabilized: false });
            }
            Err(e) => return Err(e),
        };
        length += 1;
        let visible = delta.truncate(depth)?;
        if visible.is_empty() {
            quiet += 1;
            if quiet >= margin {
                return Ok(Stabilized { series: sum, achieved_length: achieved, walked_length: length, stabilized: true });
            }
        } else {
            quiet = 0;
            achieved = length;
            sum = sum.add(&visible)?;
        }
    }
}

/// Stabilized `P(e^Lambda)` at the given depth.
pub fn symmetrizer_stabilized_at(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
) -> Result<Stabilized> {
    symmetrizer_stabilized(datum, &highest_term(datum, labels)?, depth, config)
}

/// Incremental evaluation of `T_w(seed)` over BFS layers. Each new element
/// `w = w_i w'` reuses `T_{w'}(seed)` from the previous layer, so only two
/// layers of images are alive at once.
struct SymmetrizerRun<'a> {
    datum: &'a RootDatum,
    walker: LayerWalker<'a>,
    images: Vec<AnchoredSeries>,
}

impl<'a> SymmetrizerRun<'a> {
    fn new(datum: &'a RootDatum, seed: &AnchoredSeries, cap: usize) -> Result<Self> {
        if !seed.is_exact() {
            return Err(Error::NotExact);
        }
        if seed.spec() != datum.spec() {
            return Err(Error::SpecMismatch { left: seed.spec().to_string(), right: datum.spec().to_string() });
        }
        Ok(Self { datum, walker: LayerWalker::new(datum, cap), images: vec![seed.clone()] })
    }

    /// Sum of `T_w(seed)` over the next layer, or `None` once `W` is exhausted.
    fn next_layer(&mut self) -> Result<Option<AnchoredSeries>> {
        if !self.walker.advance()? {
            return Ok(None);
        }
        let layer = self.walker.current();
        let mut images = Vec::with_capacity(layer.elements.len());
        let mut delta: BTreeMap<Beta, VPoly> = BTreeMap::new();
        for (w, &parent) in layer.elements.iter().zip(&layer.parents) {
            let i = w.left_descent()?;
            let image = apply_t(self.datum, i, &self.images[parent], DLKind::T)?;
            for (b, c) in image.terms() {
                accumulate(&mut delta, b.clone(), c);
            }
            images.push(image);
        }
        self.images = images;
        let spec = self.images[0].spec();
        let anchor = self.images[0].anchor().to_vec();
        Ok(Some(AnchoredSeries::exact_from_map(spec, anchor, delta)))
    }
}

/// Largest amount by which `T_i` can raise a stored term of `s` (towards
/// smaller height), over all generators: a term with pairing `-n < 0`
/// reaches `n - 1` steps up.
pub fn max_raise(datum: &RootDatum, s: &AnchoredSeries) -> i64 {
    let rows = datum.cartan().rows();
    let mut best = 0;
    for beta in s.terms().keys() {
        for (g, row) in rows.iter().enumerate() {
            let k = AnchoredSeries::pairing_with(row, s.anchor()[g], beta);
            best = best.max(-k - 1);
        }
    }
    best
}
