//! Executable checks of the Casselman-Shalika identities and the lemmas
//! behind them. Every check returns a [`VerificationReport`]; a failing
//! report carries the first coefficient where the two sides disagree.
//!
//! All identities are checked without the `q^{<rho, Lambda>}` prefactor,
//! which depends on coordinates of `Lambda` the label representation does
//! not carry.

use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::characters::{
    check_denominator_wtwist, check_dominant, correction_factor, denominator, finite_character_exact,
    gk_delta, inverse_denominator, weyl_kac_character, weyl_kac_numerator, Correction,
};
use crate::error::{Error, Result};
use crate::hecke::{
    apply_t, apply_t_word, highest_term, symmetrizer_partial, symmetrizer_stabilized, symmetrizer_stabilized_at,
    DLKind, StabilizeConfig, Stabilized,
};
use crate::rootdata::RootDatum;
use crate::series::{height, AnchoredSeries, Beta, Witness};
use crate::vpoly::VPoly;
use crate::weyl::{act_word, enumerate_layers, reflect_series_truncated};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unstabilized,
}

impl Verdict {
    /// Process exit code for a run whose worst verdict is `self`.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Unstabilized => 2,
        }
    }

    /// Fail dominates unstabilized, which dominates pass.
    pub fn worst(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        verdicts.into_iter().fold(Self::Pass, |acc, v| match (acc, v) {
            (Self::Fail, _) | (_, Self::Fail) => Self::Fail,
            (Self::Unstabilized, _) | (_, Self::Unstabilized) => Self::Unstabilized,
            _ => Self::Pass,
        })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Unstabilized => "unstabilized",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub spec: String,
    pub params: Value,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(rename = "achieved_L", skip_serializing_if = "Option::is_none", default)]
    pub achieved_l: Option<usize>,
    pub ms: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn new(check: &str, datum: &RootDatum, params: Value, started: Instant) -> Self {
        Self {
            check: check.to_string(),
            spec: datum.spec().to_string(),
            params,
            verdict: Verdict::Pass,
            witness: None,
            achieved_l: None,
            ms: started.elapsed().as_millis() as u64,
            notes: Vec::new(),
        }
    }

    fn judged(mut self, witness: Option<Witness>) -> Self {
        self.verdict = if witness.is_some() { Verdict::Fail } else { Verdict::Pass };
        self.witness = witness;
        self
    }

    fn unstabilized(mut self, st: &Stabilized) -> Self {
        self.verdict = Verdict::Unstabilized;
        self.achieved_l = Some(st.achieved_length);
        self.notes.push(format!("walked {} layers without meeting the margin", st.walked_length));
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One-line summary for text output.
    pub fn summary(&self) -> String {
        let mut line = format!("{} {} {} {}", self.verdict, self.check, self.spec, self.params);
        if let Some(l) = self.achieved_l {
            line.push_str(&format!(" L={l}"));
        }
        if let Some(w) = &self.witness {
            line.push_str(&format!(" at beta={:?}: {} vs {}", w.beta, w.left, w.right));
        }
        line.push_str(&format!(" ({} ms)", self.ms));
        line
    }
}

fn labels_json(labels: &[i64]) -> Value {
    json!(labels)
}

fn witness_note(beta: &[i64], left: impl ToString, right: impl ToString) -> Witness {
    Witness { beta: beta.to_vec(), left: left.to_string(), right: right.to_string() }
}

fn whole_group_length(datum: &RootDatum) -> usize {
    datum.finite_positive_roots().len()
}

/// `sum_w T_w(e^Lambda)`: exact over the finite Weyl group, or the
/// stabilized partial sum to `depth` in the affine case. The
/// `q^{<rho, Lambda>}` prefactor is left out.
pub fn whittaker_normalized(
    datum: &RootDatum,
    labels: &[i64],
    depth: Option<u32>,
    config: StabilizeConfig,
) -> Result<Stabilized> {
    check_dominant(datum, labels)?;
    if datum.is_affine() {
        let depth = depth.ok_or(Error::NotExact)?;
        return symmetrizer_stabilized_at(datum, labels, depth, config);
    }
    let length = whole_group_length(datum);
    let (sum, _) = symmetrizer_partial(datum, &highest_term(datum, labels)?, length, config.layer_cap)?;
    let series = match depth {
        Some(d) => sum.truncate(d)?,
        None => sum,
    };
    Ok(Stabilized { series, achieved_length: length, walked_length: length, stabilized: true })
}

/// The symbolic prefactor the Whittaker function carries in front of
/// [`whittaker_normalized`].
pub const PREFACTOR: &str = "q^<rho, Lambda>";

/// `prod_{a in R_+} (1 - v^-1 e^{-a})` over the finite positive coroots, exactly.
pub fn finite_deformed_denominator(datum: &RootDatum) -> Result<AnchoredSeries> {
    let mut acc = AnchoredSeries::one(datum.spec());
    for root in datum.finite_positive_roots() {
        acc = acc.mul(&AnchoredSeries::one_minus(datum.spec(), &VPoly::v_pow(-1), root)?)?;
    }
    Ok(acc)
}

/// `sum_{w in W} T_w(e^Lambda) = prod (1 - v^-1 e^{-a}) chi_Lambda` exactly.
pub fn verify_finite_cs(datum: &RootDatum, labels: &[i64]) -> Result<VerificationReport> {
    let started = Instant::now();
    if datum.is_affine() {
        return Err(Error::WrongKind { spec: datum.spec().to_string(), expected: "finite" });
    }
    let lhs = whittaker_normalized(datum, labels, None, StabilizeConfig::default())?.series;
    let rhs = finite_deformed_denominator(datum)?.mul(&finite_character_exact(datum, labels)?)?;
    let witness = lhs.first_difference(&rhs, None)?;
    let params = json!({ "labels": labels_json(labels) });
    let mut report = VerificationReport::new("finite-cs", datum, params, started).judged(witness);
    report.achieved_l = Some(whole_group_length(datum));
    Ok(report.note(format!("prefactor {PREFACTOR} not included")))
}

/// Both sides of `sum_w T_w(e^Lambda) = m_v D_v chi_Lambda` to `depth`.
pub struct AffineSides {
    pub lhs: Stabilized,
    pub rhs: AnchoredSeries,
}

pub fn affine_cs_sides(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
    correction: Correction,
) -> Result<AffineSides> {
    if !datum.is_affine() {
        return Err(Error::WrongKind { spec: datum.spec().to_string(), expected: "affine" });
    }
    let lhs = whittaker_normalized(datum, labels, Some(depth), config)?;
    let rhs = correction_factor(datum, depth, correction)?
        .mul(&denominator(datum, depth, true)?)?
        .mul(&weyl_kac_character(datum, labels, depth)?)?;
    Ok(AffineSides { lhs, rhs })
}

/// First disagreement after substituting `v := q` on both sides.
pub fn difference_at_q(lhs: &AnchoredSeries, rhs: &AnchoredSeries, q: &BigRational, bound: i64) -> Result<Option<Witness>> {
    let l = lhs.evaluate_v(q)?;
    let r = rhs.evaluate_v(q)?;
    let zero = BigRational::from_integer(0.into());
    let mut keys: Vec<&Beta> = l.keys().chain(r.keys()).filter(|b| height(b) <= bound).collect();
    keys.sort();
    keys.dedup();
    for b in keys {
        let x = l.get(b).unwrap_or(&zero);
        let y = r.get(b).unwrap_or(&zero);
        if x != y {
            return Ok(Some(witness_note(b, x, y)));
        }
    }
    Ok(None)
}

fn affine_params(labels: &[i64], depth: u32, config: StabilizeConfig, correction: Correction) -> Value {
    json!({
        "labels": labels_json(labels),
        "depth": depth,
        "margin": config.margin,
        "layer_cap": config.layer_cap,
        "correction": correction.to_string(),
    })
}

/// Coefficientwise check of the affine identity to `depth`, plus exact
/// spot evaluations at each `v := q`.
pub fn verify_affine_cs(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
    correction: Correction,
    qs: &[BigRational],
) -> Result<VerificationReport> {
    let started = Instant::now();
    let sides = affine_cs_sides(datum, labels, depth, config, correction)?;
    let mut params = affine_params(labels, depth, config, correction);
    params["q"] = json!(qs.iter().map(ToString::to_string).collect::<Vec<_>>());
    let report = VerificationReport::new("affine-cs", datum, params, started);
    if !sides.lhs.stabilized {
        return Ok(report.unstabilized(&sides.lhs));
    }
    let bound = i64::from(depth);
    let mut witness = sides.lhs.series.first_difference(&sides.rhs, Some(bound))?;
    let mut notes = Vec::new();
    for q in qs {
        match difference_at_q(&sides.lhs.series, &sides.rhs, q, bound)? {
            None => notes.push(format!("v = {q}: equal")),
            Some(w) => {
                notes.push(format!("v = {q}: differ at {:?}", w.beta));
                witness = witness.or(Some(w));
            }
        }
    }
    let mut report = report.judged(witness);
    report.ms = started.elapsed().as_millis() as u64;
    report.achieved_l = Some(sides.lhs.achieved_length);
    report.notes = notes;
    Ok(report.note(format!("prefactor {PREFACTOR} not included")))
}

/// The identity of [`verify_affine_cs`] judged only through `v := q`.
pub fn verify_affine_cs_specialized(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
    correction: Correction,
    qs: &[BigRational],
) -> Result<VerificationReport> {
    let started = Instant::now();
    let sides = affine_cs_sides(datum, labels, depth, config, correction)?;
    let mut params = affine_params(labels, depth, config, correction);
    params["q"] = json!(qs.iter().map(ToString::to_string).collect::<Vec<_>>());
    let report = VerificationReport::new("affine-cs-at-q", datum, params, started);
    if !sides.lhs.stabilized {
        return Ok(report.unstabilized(&sides.lhs));
    }
    let mut witness = None;
    for q in qs {
        witness = witness.or(difference_at_q(&sides.lhs.series, &sides.rhs, q, i64::from(depth))?);
    }
    let mut report = report.judged(witness);
    report.ms = started.elapsed().as_millis() as u64;
    report.achieved_l = Some(sides.lhs.achieved_length);
    Ok(report)
}

/// Orbit key of the element spelled by `word` (leftmost letter applied
/// last), or the first letter that fails to lengthen it.
fn replay_key(datum: &RootDatum, word: &[usize]) -> Result<Beta> {
    let n = datum.generator_count();
    let mut key = vec![0i64; n];
    for (pos, &i) in word.iter().enumerate().rev() {
        let g = datum.check_generator(i)?;
        let p = 1 - datum.cartan().pair(g, &key);
        if p <= 0 {
            return Err(Error::LengthCondition { generator: i, word: word[pos + 1..].to_vec() });
        }
        key[g] += p;
    }
    Ok(key)
}

/// `l(w_i w) = l(w) + 1` for the element spelled by the reduced word `word`.
pub fn lengthens(datum: &RootDatum, word: &[usize], i: usize) -> Result<bool> {
    let g = datum.check_generator(i)?;
    let key = replay_key(datum, word)?;
    Ok(1 - datum.cartan().pair(g, &key) > 0)
}

/// `T_i(x)` by assembling `(1 - v^-1 e^{-a}) w_i(x) + (v^-1 - 1) x` with
/// ring operations and multiplying by the expansion
/// `1 / (1 - e^{a}) = -sum_{j >= 1} e^{-ja}`, cut off past the span of the
/// numerator. The cut is exact exactly when the division is.
pub fn t_by_assembly(datum: &RootDatum, i: usize, x: &AnchoredSeries) -> Result<AnchoredSeries> {
    let g = datum.check_generator(i)?;
    let spec = datum.spec();
    let n = datum.generator_count();
    let mut a = vec![0i64; n];
    a[g] = 1;
    let vinv = VPoly::v_pow(-1);
    let reflected = act_word(datum, &[i], x)?;
    let numerator = AnchoredSeries::one_minus(spec, &vinv, &a)?
        .mul(&reflected)?
        .add(&x.scale(&(&vinv - &VPoly::one())))?;
    if numerator.is_empty() {
        return Ok(numerator);
    }
    // extent of every a-line of the numerator
    let mut lines: BTreeMap<Beta, (i64, i64)> = BTreeMap::new();
    for beta in numerator.terms().keys() {
        let mut key = beta.clone();
        key[g] = 0;
        let t = beta[g];
        let e = lines.entry(key).or_insert((t, t));
        e.0 = e.0.min(t);
        e.1 = e.1.max(t);
    }
    let span = lines.values().map(|(lo, hi)| hi - lo).max().unwrap_or(0) + 1;
    let expansion = AnchoredSeries::exact(
        spec,
        vec![0; n],
        (1..=span).map(|j| {
            let mut b = vec![0; n];
            b[g] = j;
            (b, VPoly::constant(-1))
        }),
    )?;
    let full = expansion.mul(&numerator)?;
    let mut kept = BTreeMap::new();
    for (beta, c) in full.terms() {
        let mut key = beta.clone();
        key[g] = 0;
        let top = lines[&key].1;
        if beta[g] <= top {
            kept.insert(beta.clone(), c.clone());
        } else if beta[g] == top + 1 {
            return Err(Error::NonExactDivision { generator: i, beta: beta.clone() });
        }
    }
    let quotient = AnchoredSeries::exact(spec, x.anchor().to_vec(), kept)?;
    let mut minus_a = vec![0i64; n];
    minus_a[g] = -1;
    let back = AnchoredSeries::one_minus(spec, &VPoly::one(), &minus_a)?.mul(&quotient)?;
    if let Some(w) = back.first_difference(&numerator, None)? {
        return Err(Error::NonExactDivision { generator: i, beta: w.beta });
    }
    Ok(quotient)
}

/// `T_w(s)` through [`t_by_assembly`], rightmost letter first.
pub fn t_word_by_assembly(datum: &RootDatum, word: &[usize], s: &AnchoredSeries) -> Result<AnchoredSeries> {
    word.iter().rev().try_fold(s.clone(), |acc, &i| t_by_assembly(datum, i, &acc))
}

/// `T_{w_i w'}(e^Lambda) = c(a_i) T_{w'}(e^Lambda)^{w_i} + b(a_i) T_{w'}(e^Lambda)`,
/// the left side through [`apply_t_word`], the right side through
/// [`t_by_assembly`].
pub fn verify_recursion(datum: &RootDatum, labels: &[i64], w_prime: &[usize], i: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    check_dominant(datum, labels)?;
    replay_key(datum, w_prime)?;
    if !lengthens(datum, w_prime, i)? {
        return Err(Error::LengthCondition { generator: i, word: w_prime.to_vec() });
    }
    let seed = highest_term(datum, labels)?;
    let mut word = vec![i];
    word.extend_from_slice(w_prime);
    let lhs = apply_t_word(datum, &word, &seed, DLKind::T)?;
    let inner = t_word_by_assembly(datum, w_prime, &seed)?;
    let rhs = t_by_assembly(datum, i, &inner)?;
    let params = json!({ "labels": labels_json(labels), "w_prime": w_prime, "generator": i });
    Ok(VerificationReport::new("recursion", datum, params, started).judged(lhs.first_difference(&rhs, None)?))
}

/// [`verify_recursion`] for every `(w', i)` with `l(w') <= max_length` and
/// `l(w_i w') = l(w') + 1`, summarized in one report.
pub fn verify_recursion_upto(datum: &RootDatum, labels: &[i64], max_length: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    let layers = enumerate_layers(datum, max_length, crate::weyl::DEFAULT_LAYER_CAP)?;
    let mut pairs = 0;
    let mut witness = None;
    let mut failing = None;
    for w in layers.iter().flatten() {
        for i in 1..=datum.generator_count() {
            if !lengthens(datum, &w.word, i)? {
                continue;
            }
            pairs += 1;
            let r = verify_recursion(datum, labels, &w.word, i)?;
            if witness.is_none() && r.witness.is_some() {
                witness = r.witness;
                failing = Some((w.word.clone(), i));
            }
        }
    }
    let params = json!({ "labels": labels_json(labels), "max_length": max_length });
    let mut report = VerificationReport::new("recursion", datum, params, started).judged(witness);
    report = report.note(format!("{pairs} (w', i) pairs"));
    if let Some((word, i)) = failing {
        report = report.note(format!("first failure at w' = {word:?}, i = {i}"));
    }
    Ok(report)
}

/// Depth to which `P(e^Lambda)` must be known for every term that can reach
/// height `h` under one `w_a` or `T_a`. Targets range over the truncated
/// cone, widened by one step above the anchor in the direction of `a`; the
/// preimage height is linear in the target, so the corners suffice.
pub fn reflection_reach(datum: &RootDatum, labels: &[i64], h: u32) -> i64 {
    let h = i64::from(h);
    let n = datum.generator_count();
    let cartan = datum.cartan();
    let mut reach = h;
    for a in 0..n {
        let mut corners = vec![vec![0; n]];
        let mut below = vec![0; n];
        below[a] = -1;
        corners.push(below.clone());
        for j in 0..n {
            let mut top = vec![0; n];
            top[j] = h;
            corners.push(top);
            if j != a {
                let mut side = below.clone();
                side[j] = h + 1;
                corners.push(side);
            }
        }
        for t in corners {
            let k = labels[a] - cartan.pair(a, &t);
            reach = reach.max(height(&t) + k);
        }
    }
    reach
}

/// Checks, for every generator `a` and up to depth `D - B`:
///
/// 1. `T_a P(e^Lambda) = v^-1 P(e^Lambda)`
/// 2. `P(T_a e^Lambda) = v^-1 P(e^Lambda)`
/// 3. `w_a P(e^Lambda) = ((v^-1 - b(a)) / c(a)) P(e^Lambda)
///    = ((1 - v^-1 e^{a}) / (1 - v^-1 e^{-a})) P(e^Lambda)`, checked as
///    `(e^{-a} - v^-1 e^{-2a}) w_a P = (e^{-a} - v^-1) P` since `w_a P` reaches
///    one step above the anchor
/// 4. `w_a (P(e^Lambda) / D_v) = P(e^Lambda) / D_v`
///
/// A fifth report, `symmetrizer-reflection-c`, checks the factor
/// `c(-a) = (1 - v^-1 e^{a}) / (1 - e^{-a})` in place of the one in 3; that
/// version does not hold, already for `A1` and `Lambda = 0`.
///
/// `P(e^Lambda)` itself is computed to the depth returned by
/// [`reflection_reach`], so that nothing outside the stored range can feed
/// the compared coefficients.
pub fn verify_symmetrizer_properties(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    buffer: u32,
    config: StabilizeConfig,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    check_dominant(datum, labels)?;
    let h = i64::from(depth) - i64::from(buffer);
    if h < 0 {
        return Err(Error::NegativeDepth(h));
    }
    let h = h as u32;
    let reach = reflection_reach(datum, labels, h) as u32;
    let params = json!({
        "labels": labels_json(labels),
        "depth": depth,
        "buffer": buffer,
        "compared_to": h,
        "computed_to": reach,
        "margin": config.margin,
    });
    let names = [
        "symmetrizer-t-eigen",
        "symmetrizer-p-after-t",
        "symmetrizer-reflection",
        "symmetrizer-invariance",
        "symmetrizer-reflection-c",
    ];
    let p = whittaker_normalized(datum, labels, Some(reach), config)?;
    if !p.stabilized {
        let base = VerificationReport::new(names[0], datum, params.clone(), started).unstabilized(&p);
        return Ok(names
            .iter()
            .map(|n| VerificationReport { check: n.to_string(), ..base.clone() })
            .collect());
    }
    let spec = datum.spec();
    let n = datum.generator_count();
    let vinv = VPoly::v_pow(-1);
    let target = p.series.truncate(h)?.scale(&vinv);
    let p_over_dv = p.series.mul(&inverse_denominator(datum, reach, true)?)?;
    let mut witnesses: [Option<Witness>; 5] = Default::default();
    let mut notes: [Vec<String>; 5] = Default::default();
    for i in 1..=n {
        let g = i - 1;
        let mut a = vec![0i64; n];
        a[g] = 1;
        let tag = |w: Witness| Witness { left: format!("[a_{i}] {}", w.left), ..w };

        // (1) T_a on the stored terms; every source of a kept term is stored
        let raw = apply_t(datum, i, &exact_copy(&p.series)?, DLKind::T)?;
        let first = truncated_copy(&raw, h)?;
        if let Some(w) = first.first_difference(&target, Some(i64::from(h)))? {
            witnesses[0].get_or_insert(tag(w));
        }

        // (2)
        let seed = apply_t(datum, i, &highest_term(datum, labels)?, DLKind::T)?;
        let q = symmetrizer_stabilized(datum, &seed, h, config)?;
        if !q.stabilized {
            notes[1].push(format!("generator {i}: P(T_a e^Lambda) unstabilized"));
        }
        if let Some(w) = q.series.first_difference(&target, Some(i64::from(h)))? {
            witnesses[1].get_or_insert(tag(w));
        }

        // (3)
        let mut reflected = BTreeMap::new();
        for (beta, c) in p.series.terms() {
            let image = crate::weyl::reflect_raw(datum.cartan(), g, labels, beta);
            if height(&image) <= i64::from(h) {
                if image[g] < -1 || image.iter().enumerate().any(|(j, &x)| j != g && x < 0) {
                    witnesses[2].get_or_insert(witness_note(&image, format!("[a_{i}] reflected term {c}"), "beyond one step above the anchor"));
                }
                reflected.insert(image, c.clone());
            }
        }
        let reflected = AnchoredSeries::exact(spec, labels.to_vec(), reflected)?;
        let mut two_a = a.clone();
        two_a[g] = 2;
        let right_factor = AnchoredSeries::exact(spec, vec![0; n], [(a.clone(), VPoly::one()), (vec![0; n], -&vinv)])?;
        let rhs = right_factor.mul(&p.series)?.truncate(h)?;
        for (slot, u) in [(2, vinv.clone()), (4, VPoly::one())] {
            let left_factor = AnchoredSeries::exact(spec, vec![0; n], [(a.clone(), VPoly::one()), (two_a.clone(), -&u)])?;
            let lhs = truncated_copy(&left_factor.mul(&reflected)?, h)?;
            if let Some(w) = lhs.first_difference(&rhs, Some(i64::from(h)))? {
                witnesses[slot].get_or_insert(tag(w));
            }
        }

        // (4)
        match reflect_series_truncated(datum, i, &p_over_dv, h) {
            Ok(reflected) => {
                if let Some(w) = reflected.first_difference(&p_over_dv.truncate(h)?, Some(i64::from(h)))? {
                    witnesses[3].get_or_insert(tag(w));
                }
            }
            Err(Error::OutsideAnchorCone { beta }) => {
                witnesses[3].get_or_insert(witness_note(&beta, format!("[a_{i}] reflected term"), "outside the anchor cone"));
            }
            Err(e) => return Err(e),
        }
    }
    let elapsed = started.elapsed().as_millis() as u64;
    Ok(names
        .iter()
        .zip(witnesses)
        .zip(notes)
        .map(|((name, w), notes)| {
            let mut r = VerificationReport::new(name, datum, params.clone(), started).judged(w);
            r.ms = elapsed;
            r.achieved_l = Some(p.achieved_length);
            r.notes = notes;
            r
        })
        .collect())
}

/// Truncated series viewed as exact, so that exact-only operators accept it.
/// Only the coefficients up to a caller-chosen bound are meaningful afterwards.
fn exact_copy(s: &AnchoredSeries) -> Result<AnchoredSeries> {
    AnchoredSeries::exact(s.spec(), s.anchor().to_vec(), s.terms().clone())
}

fn truncated_copy(s: &AnchoredSeries, depth: u32) -> Result<AnchoredSeries> {
    AnchoredSeries::truncated(s.spec(), s.anchor().to_vec(), depth, s.terms().iter().map(|(b, c)| (b.clone(), c.clone())))
}

/// `P(e^Lambda) / (D_v chi_Lambda)` to `depth`, by peeling off the lowest
/// remaining term of the dividend. The quotient is anchored at 0 and must
/// be supported on `Z_{>=0} c` (on `{0}` for finite specs).
pub fn extract_proportionality(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
) -> Result<AnchoredSeries> {
    let p = whittaker_normalized(datum, labels, Some(depth), config)?;
    if !p.stabilized {
        return Err(Error::Unstabilized { walked: p.walked_length });
    }
    let divisor = denominator(datum, depth, true)?.mul(&weyl_kac_character(datum, labels, depth)?)?;
    let quotient = divide_series(&p.series, &divisor, depth)?;
    let axis = datum.null_root().unwrap_or_else(|| vec![0; datum.generator_count()]);
    for beta in quotient.terms().keys() {
        if !on_axis(beta, &axis) {
            return Err(Error::OffImaginaryAxis { beta: beta.clone() });
        }
    }
    Ok(quotient)
}

fn on_axis(beta: &[i64], axis: &[i64]) -> bool {
    let ha = height(axis);
    if ha == 0 {
        return beta.iter().all(|&x| x == 0);
    }
    let hb = height(beta);
    hb % ha == 0 && beta.iter().zip(axis).all(|(b, a)| *b == a * (hb / ha))
}

/// `dividend / divisor` with both anchored alike and the divisor's constant
/// term equal to 1; the quotient is anchored at 0.
pub fn divide_series(dividend: &AnchoredSeries, divisor: &AnchoredSeries, depth: u32) -> Result<AnchoredSeries> {
    let n = dividend.spec().generator_count();
    let lead = divisor.terms().get(&vec![0; n]).cloned().unwrap_or_default();
    if !lead.is_one() {
        return Err(Error::DivisionLeadingTerm(lead.to_string()));
    }
    let bound = i64::from(depth);
    let mut rest: BTreeMap<Beta, VPoly> = dividend.terms().iter().filter(|(b, _)| height(b) <= bound).map(|(b, c)| (b.clone(), c.clone())).collect();
    let mut quotient: BTreeMap<Beta, VPoly> = BTreeMap::new();
    while let Some(beta) = rest.keys().min_by_key(|b| (height(b), (*b).clone())).cloned() {
        let c = rest[&beta].clone();
        for (gamma, d) in divisor.terms() {
            let sum: Beta = beta.iter().zip(gamma).map(|(x, y)| x + y).collect();
            if height(&sum) > bound {
                continue;
            }
            let slot = rest.entry(sum.clone()).or_default();
            *slot -= &(&c * d);
            if slot.is_zero() {
                rest.remove(&sum);
            }
        }
        quotient.insert(beta, c);
    }
    AnchoredSeries::truncated(dividend.spec(), vec![0; n], depth, quotient)
}

/// Proportionality constant compared with the correction product.
pub fn verify_proportionality(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
    correction: Correction,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let params = affine_params(labels, depth, config, correction);
    let report = VerificationReport::new("proportionality", datum, params, started);
    let quotient = match extract_proportionality(datum, labels, depth, config) {
        Ok(q) => q,
        Err(Error::OffImaginaryAxis { beta }) => {
            return Ok(report.judged(Some(witness_note(&beta, "quotient term", "off the imaginary axis"))));
        }
        Err(Error::Unstabilized { walked }) => {
            let mut r = report;
            r.verdict = Verdict::Unstabilized;
            return Ok(r.note(format!("walked {walked} layers without meeting the margin")));
        }
        Err(e) => return Err(e),
    };
    let expected = if datum.is_affine() {
        correction_factor(datum, depth, correction)?
    } else {
        AnchoredSeries::one(datum.spec()).truncate(depth)?
    };
    let mut report = report.judged(quotient.first_difference(&expected, Some(i64::from(depth)))?);
    report.ms = started.elapsed().as_millis() as u64;
    Ok(report.note("quotient supported on multiples of c"))
}

/// Largest number of label doublings tried by [`verify_gk_limit`].
pub const GK_DOUBLINGS: u32 = 6;

/// For `Lambda = 2^k (1, ..., 1)`, `k = 0, 1, ...`, read off
/// `[e^{Lambda - nu}] sum_w T_w(e^Lambda)` until it is unchanged twice in a
/// row, then compare with `[e^{-nu}]` of `Delta` (finite) or of the
/// correction product times `Delta` (affine).
pub fn verify_gk_limit(
    datum: &RootDatum,
    nu: &[i64],
    depth: u32,
    config: StabilizeConfig,
    correction: Correction,
) -> Result<VerificationReport> {
    let started = Instant::now();
    datum.check_len(nu)?;
    let h = height(nu);
    if h > i64::from(depth) || nu.iter().any(|&x| x < 0) {
        return Err(Error::OutOfTruncation { height: h, depth });
    }
    let h = h as u32;
    let n = datum.generator_count();
    let mut params = json!({ "nu": nu, "depth": depth, "margin": config.margin });
    if datum.is_affine() {
        params["correction"] = json!(correction.to_string());
    }
    let mut history: Vec<VPoly> = Vec::new();
    let mut settled = None;
    let mut achieved = 0;
    for k in 0..=GK_DOUBLINGS {
        let labels = vec![1i64 << k; n];
        let p = whittaker_normalized(datum, &labels, Some(h), config)?;
        if !p.stabilized {
            let report = VerificationReport::new("gk-limit", datum, params, started);
            return Ok(report.unstabilized(&p).note(format!("at labels {labels:?}")));
        }
        achieved = achieved.max(p.achieved_length);
        history.push(p.series.coefficient(nu)?);
        let m = history.len();
        if m >= 3 && history[m - 1] == history[m - 2] && history[m - 2] == history[m - 3] {
            settled = Some((k, labels));
            break;
        }
    }
    let mut expected = gk_delta(datum, h)?;
    if datum.is_affine() {
        expected = correction_factor(datum, h, correction)?.mul(&expected)?;
    }
    let expected = expected.coefficient(nu)?;
    let report = VerificationReport::new("gk-limit", datum, params, started);
    let Some((k, labels)) = settled else {
        let mut r = report.unstabilized(&Stabilized {
            series: AnchoredSeries::one(datum.spec()),
            achieved_length: achieved,
            walked_length: achieved,
            stabilized: false,
        });
        r.notes = vec![format!("coefficient still moving after {GK_DOUBLINGS} doublings")];
        return Ok(r);
    };
    let got = history.last().cloned().unwrap_or_default();
    let witness = (got != expected).then(|| witness_note(nu, &got, &expected));
    let mut report = report.judged(witness);
    report.achieved_l = Some(achieved);
    Ok(report.note(format!("settled after {k} doublings at labels {labels:?}")))
}

/// Quadratic relations for `T` and `T'`, braid relations for every pair of
/// generators of finite order, and `e^{-rho} T'_a e^{rho} = -v T_a`, on
/// `count` random monomials drawn from a seeded generator.
pub fn verify_hecke_relations(datum: &RootDatum, seed: u64, count: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    let n = datum.generator_count();
    let spec = datum.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witness = None;
    let mut notes = Vec::new();
    let mut skipped = std::collections::BTreeSet::new();
    let fail = |w: Option<Witness>, what: String, witness: &mut Option<Witness>| {
        if let Some(w) = w {
            if witness.is_none() {
                *witness = Some(Witness { left: format!("[{what}] {}", w.left), ..w });
            }
        }
    };
    for _ in 0..count {
        let labels: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
        let s = AnchoredSeries::monomial(spec, labels.clone(), vec![0; n], VPoly::one())?;
        for i in 1..=n {
            for (kind, u) in [(DLKind::T, VPoly::v_pow(-1)), (DLKind::TPrime, VPoly::v_pow(1))] {
                let once = apply_t(datum, i, &s, kind)?;
                let twice = apply_t(datum, i, &once, kind)?;
                let rhs = once.scale(&(&u - &VPoly::one())).add(&s.scale(&u))?;
                fail(twice.first_difference(&rhs, None)?, format!("quadratic {kind:?} {i} on {labels:?}"), &mut witness);
            }
            let up = s.shift_anchor(&vec![1; n])?;
            let lhs = apply_t(datum, i, &up, DLKind::TPrime)?.shift_anchor(&vec![-1; n])?;
            let rhs = apply_t(datum, i, &s, DLKind::T)?.scale(&-VPoly::v_pow(1));
            fail(lhs.first_difference(&rhs, None)?, format!("conjugation {i} on {labels:?}"), &mut witness);
            for j in i + 1..=n {
                let product = datum.cartan().entry(i - 1, j - 1) * datum.cartan().entry(j - 1, i - 1);
                let m = match product {
                    0 => 2,
                    1 => 3,
                    _ => {
                        skipped.insert((i, j));
                        continue;
                    }
                };
                let word = |x: usize, y: usize| -> Vec<usize> { (0..m).map(|k| if k % 2 == 0 { x } else { y }).collect() };
                for kind in [DLKind::T, DLKind::TPrime] {
                    let l = apply_t_word(datum, &word(i, j), &s, kind)?;
                    let r = apply_t_word(datum, &word(j, i), &s, kind)?;
                    fail(l.first_difference(&r, None)?, format!("braid {kind:?} {i},{j} on {labels:?}"), &mut witness);
                }
            }
        }
    }
    for (i, j) in skipped {
        notes.push(format!("no braid relation between {i} and {j} (infinite order)"));
    }
    let params = json!({ "seed": seed, "monomials": count });
    let mut report = VerificationReport::new("hecke-relations", datum, params, started).judged(witness);
    report.notes = notes;
    Ok(report)
}

/// `sum_w (-1)^{l(w)} e^{w rho - rho} = D` to `depth`, together with
/// `D^{w_i} = -e^{a_i} D` for every generator.
pub fn verify_denominator_identity(datum: &RootDatum, depth: u32) -> Result<VerificationReport> {
    let started = Instant::now();
    let n = datum.generator_count();
    let numerator = weyl_kac_numerator(datum, &vec![0; n], depth)?;
    let d = denominator(datum, depth, false)?;
    let mut witness = numerator.first_difference(&d, Some(i64::from(depth)))?;
    let mut notes = Vec::new();
    for i in 1..=n {
        if check_denominator_wtwist(datum, i, depth)? {
            notes.push(format!("w_{i} twist holds"));
        } else {
            notes.push(format!("w_{i} twist fails"));
            witness = witness.or(Some(witness_note(&[], format!("D^(w_{i})"), "-e^(a_i) D")));
        }
    }
    let params = json!({ "depth": depth });
    let mut report = VerificationReport::new("denominator-identity", datum, params, started).judged(witness);
    report.notes = notes;
    Ok(report)
}

/// Every coefficient of the stabilized `sum_w T_w(e^Lambda)` lies in `Z[v^-1]`.
pub fn verify_polynomiality(
    datum: &RootDatum,
    labels: &[i64],
    depth: u32,
    config: StabilizeConfig,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let p = whittaker_normalized(datum, labels, Some(depth), config)?;
    let params = json!({ "labels": labels_json(labels), "depth": depth, "margin": config.margin });
    let report = VerificationReport::new("polynomiality", datum, params, started);
    if !p.stabilized {
        return Ok(report.unstabilized(&p));
    }
    let witness = p
        .series
        .terms()
        .iter()
        .find(|(_, c)| !c.is_in_z_vinv())
        .map(|(b, c)| witness_note(b, c, "no positive powers of v"));
    let mut report = report.judged(witness);
    report.achieved_l = Some(p.achieved_length);
    report.ms = started.elapsed().as_millis() as u64;
    Ok(report)
}
