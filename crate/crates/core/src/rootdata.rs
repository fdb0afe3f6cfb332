//! Simply-laced root data of finite type (A, D, E) and their untwisted
//! affinizations.
//!
//! Conventions used throughout the crate:
//!
//! * the Cartan matrix is `A[i][j] = <a_i, a_j^vee>`;
//! * finite nodes are numbered `1..=l` in Bourbaki order and the affine
//!   node, when present, is node `l + 1`;
//! * coroots are stored as integer coordinates over the simple coroots and
//!   every pairing goes through the Cartan matrix. No realization of the
//!   Cartan subalgebra is ever built.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

/// A simply-laced finite type, optionally affinized.
///
/// The textual form is the family letter, the rank, and a trailing `!` for
/// the untwisted affine diagram: `A1`, `A2!`, `D4!`, `E8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootSystemSpec {
    family: Family,
    rank: usize,
    affine: bool,
}

impl RootSystemSpec {
    /// Validates the family/rank combination. `D3` is canonicalized to `A3`.
    pub fn new(family: Family, rank: usize, affine: bool) -> Result<Self> {
        let bad = |why: &str| Err(Error::InvalidSpec(format!("{family:?}{rank}: {why}")));
        match family {
            Family::A if rank == 0 => return bad("rank must be positive"),
            Family::D if rank < 3 => return bad("type D needs rank at least 3"),
            Family::D if rank == 3 => {
                return Ok(Self { family: Family::A, rank: 3, affine });
            }
            Family::E if !(6..=8).contains(&rank) => return bad("type E needs rank 6, 7 or 8"),
            _ => {}
        }
        Ok(Self { family, rank, affine })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The rank `l` of the underlying finite root system.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    /// Number of simple (co)roots: `l + 1` for affine specs, `l` otherwise.
    pub fn generator_count(&self) -> usize {
        self.rank + usize::from(self.affine)
    }

    /// The underlying finite spec.
    pub fn finite_part(&self) -> Self {
        Self { affine: false, ..*self }
    }

    pub fn affinization(&self) -> Self {
        Self { affine: true, ..*self }
    }

    /// Hex SHA-256 of the canonical spec string together with the Cartan
    /// matrix convention. Used to key on-disk caches and report headers.
    pub fn spec_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"cartan:A[i][j]=<a_i,a_j^vee>;");
        hasher.update(self.to_string().as_bytes());
        hex::encode(hasher.finalize())
    }
}

impl fmt::Display for RootSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)?;
        if self.affine {
            f.write_str("!")?;
        }
        Ok(())
    }
}

impl FromStr for RootSystemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidSpec(s.to_string());
        let s_trim = s.trim();
        let (body, affine) = match s_trim.strip_suffix('!') {
            Some(body) => (body, true),
            None => (s_trim, false),
        };
        let mut chars = body.chars();
        let family = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('D') => Family::D,
            Some('E') => Family::E,
            _ => return Err(invalid()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let rank = digits.parse().map_err(|_| invalid())?;
        Self::new(family, rank, affine)
    }
}

impl Serialize for RootSystemSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RootSystemSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Square integer matrix with `entries[i][j] = <a_i, a_j^vee>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanMatrix {
    entries: Vec<Vec<i64>>,
}

impl CartanMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// `<a_i, beta>` for a coroot-lattice vector `beta` (0-based `i`).
    #[inline]
    pub fn pair(&self, i: usize, beta: &[i64]) -> i64 {
        self.entries[i].iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    /// `A * beta`.
    pub fn apply(&self, beta: &[i64]) -> Vec<i64> {
        (0..self.size()).map(|i| self.pair(i, beta)).collect()
    }

    /// Simple reflection of a coroot-lattice vector (0-based `i`).
    pub fn reflect_coroot(&self, i: usize, beta: &[i64]) -> Vec<i64> {
        let k = self.pair(i, beta);
        let mut out = beta.to_vec();
        out[i] -= k;
        out
    }

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut entries = vec![vec![0; n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = 2;
        }
        for &(a, b) in edges {
            entries[a - 1][b - 1] = -1;
            entries[b - 1][a - 1] = -1;
        }
        Self { entries }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Real,
    Imaginary,
}

/// A positive coroot in simple-coroot coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coroot {
    pub coords: Vec<i64>,
    pub kind: RootKind,
    pub multiplicity: u32,
}

impl Coroot {
    pub fn height(&self) -> i64 {
        self.coords.iter().sum()
    }
}

/// Sorted exponents `m_1 <= ... <= m_l` of a finite root system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentList {
    pub values: Vec<u32>,
}

impl ExponentList {
    /// `prod (m_i + 1)`, the order of the finite Weyl group.
    pub fn weyl_group_order(&self) -> u128 {
        self.values.iter().map(|&m| u128::from(m) + 1).product()
    }

    pub fn sum(&self) -> u32 {
        self.values.iter().sum()
    }
}

fn finite_cartan(spec: &RootSystemSpec) -> CartanMatrix {
    let l = spec.rank;
    let mut edges = Vec::new();
    match spec.family {
        Family::A => edges.extend((1..l).map(|i| (i, i + 1))),
        Family::D => {
            edges.extend((1..l - 1).map(|i| (i, i + 1)));
            edges.push((l - 2, l));
        }
        Family::E => {
            edges.push((1, 3));
            edges.push((2, 4));
            edges.extend((3..l).map(|i| (i, i + 1)));
        }
    }
    CartanMatrix::from_edges(l, &edges)
}

/// All positive roots of a finite Cartan matrix, by closure of the simple
/// roots under height-raising simple reflections.
fn finite_positive_roots(cartan: &CartanMatrix) -> Vec<Vec<i64>> {
    real_roots_up_to(cartan, i64::MAX)
}

/// Positive real (co)roots of height at most `max_height`.
///
/// Every non-simple positive real root has a simple reflection lowering its
/// height while staying positive, so climbing from the simple roots through
/// height-raising reflections reaches every one of them.
fn real_roots_up_to(cartan: &CartanMatrix, max_height: i64) -> Vec<Vec<i64>> {
    let n = cartan.size();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    if max_height >= 1 {
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            seen.insert(e.clone());
            queue.push_back(e);
        }
    }
    while let Some(root) = queue.pop_front() {
        let height: i64 = root.iter().sum();
        for i in 0..n {
            let k = cartan.pair(i, &root);
            if k >= 0 || height - k > max_height {
                continue;
            }
            let image = cartan.reflect_coroot(i, &root);
            if seen.insert(image.clone()) {
                queue.push_back(image);
            }
        }
    }
    let mut roots: Vec<_> = seen.into_iter().collect();
    roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
    roots
}

/// Immutable bundle of everything derived from a [`RootSystemSpec`].
#[derive(Debug, Clone)]
pub struct RootDatum {
    spec: RootSystemSpec,
    cartan: CartanMatrix,
    finite_roots: Vec<Vec<i64>>,
    theta: Vec<i64>,
    exponents: ExponentList,
}

impl RootDatum {
    pub fn new(spec: RootSystemSpec) -> Self {
        let finite = finite_cartan(&spec);
        let finite_roots = finite_positive_roots(&finite);
        let theta = finite_roots
            .last()
            .cloned()
            .expect("a finite root system has positive roots");
        let exponents = exponents_from_heights(&finite_roots);
        let cartan = if spec.affine { affinize(&finite, &theta) } else { finite };
        Self { spec, cartan, finite_roots, theta, exponents }
    }

    pub fn spec(&self) -> RootSystemSpec {
        self.spec
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn generator_count(&self) -> usize {
        self.cartan.size()
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn is_affine(&self) -> bool {
        self.spec.affine
    }

    /// Positive roots of the underlying finite system, in finite coordinates.
    pub fn finite_positive_roots(&self) -> &[Vec<i64>] {
        &self.finite_roots
    }

    /// Highest root of the underlying finite system.
    pub fn highest_root(&self) -> Coroot {
        Coroot { coords: self.theta.clone(), kind: RootKind::Real, multiplicity: 1 }
    }

    pub fn exponents(&self) -> &ExponentList {
        &self.exponents
    }

    /// The minimal imaginary coroot `c = theta + a_{l+1}`, or `None` for a
    /// finite spec.
    pub fn null_root(&self) -> Option<Vec<i64>> {
        self.spec.affine.then(|| {
            let mut c = self.theta.clone();
            c.push(1);
            c
        })
    }

    pub fn coxeter_height_of_c(&self) -> Result<i64> {
        self.null_root()
            .map(|c| c.iter().sum())
            .ok_or_else(|| Error::WrongKind { spec: self.spec.to_string(), expected: "affine" })
    }

    /// Positive coroots of height at most `depth`, each with its
    /// multiplicity, sorted by height and then coordinates.
    pub fn positive_coroots_up_to(&self, depth: u32) -> Vec<Coroot> {
        let depth = i64::from(depth);
        let mut out: Vec<Coroot> = if self.spec.affine {
            real_roots_up_to(&self.cartan, depth)
        } else {
            self.finite_roots.iter().filter(|r| r.iter().sum::<i64>() <= depth).cloned().collect()
        }
        .into_iter()
        .map(|coords| Coroot { coords, kind: RootKind::Real, multiplicity: 1 })
        .collect();
        if let Some(c) = self.null_root() {
            let hc: i64 = c.iter().sum();
            let mult = self.spec.rank as u32;
            for j in 1..=depth / hc {
                out.push(Coroot {
                    coords: c.iter().map(|x| x * j).collect(),
                    kind: RootKind::Imaginary,
                    multiplicity: mult,
                });
            }
        }
        out.sort_by_key(|r| (r.height(), r.coords.clone()));
        out
    }

    pub fn check_generator(&self, i: usize) -> Result<usize> {
        if (1..=self.generator_count()).contains(&i) {
            Ok(i - 1)
        } else {
            Err(Error::BadGenerator { index: i, count: self.generator_count() })
        }
    }

    pub fn check_len(&self, v: &[i64]) -> Result<()> {
        if v.len() == self.generator_count() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.generator_count(), got: v.len() })
        }
    }
}

fn affinize(finite: &CartanMatrix, theta: &[i64]) -> CartanMatrix {
    let l = finite.size();
    let mut entries: Vec<Vec<i64>> = finite.entries.to_vec();
    // <a_{l+1}, a_j^vee> = <delta - theta, a_j^vee> = -<theta, a_j^vee>
    let extra: Vec<i64> = finite.apply(theta).into_iter().map(|x| -x).collect();
    for (row, &x) in entries.iter_mut().zip(&extra) {
        row.push(x);
    }
    let mut last = extra;
    last.push(2);
    entries.push(last);
    debug_assert_eq!(entries.len(), l + 1);
    CartanMatrix { entries }
}

/// Exponents as the conjugate of the partition formed by the number of
/// positive roots at each height.
fn exponents_from_heights(roots: &[Vec<i64>]) -> ExponentList {
    let max_height = roots.iter().map(|r| r.iter().sum::<i64>()).max().unwrap_or(0) as usize;
    let mut histogram = vec![0usize; max_height + 1];
    for r in roots {
        histogram[r.iter().sum::<i64>() as usize] += 1;
    }
    let parts = &histogram[1..];
    let largest = parts.iter().copied().max().unwrap_or(0);
    let mut values: Vec<u32> =
        (1..=largest).map(|j| parts.iter().filter(|&&n| n >= j).count() as u32).collect();
    values.sort_unstable();
    ExponentList { values }
}

pub fn build_cartan(spec: RootSystemSpec) -> CartanMatrix {
    RootDatum::new(spec).cartan
}

pub fn highest_root(spec: RootSystemSpec) -> Result<Coroot> {
    if spec.affine {
        return Err(Error::WrongKind { spec: spec.to_string(), expected: "finite" });
    }
    Ok(RootDatum::new(spec).highest_root())
}

pub fn positive_coroots_up_to(spec: RootSystemSpec, depth: u32) -> Vec<Coroot> {
    RootDatum::new(spec).positive_coroots_up_to(depth)
}

pub fn exponents(spec: RootSystemSpec) -> Result<ExponentList> {
    if spec.affine {
        return Err(Error::WrongKind { spec: spec.to_string(), expected: "finite" });
    }
    Ok(RootDatum::new(spec).exponents)
}

pub fn coxeter_height_of_c(spec: RootSystemSpec) -> Result<i64> {
    RootDatum::new(spec).coxeter_height_of_c()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> RootSystemSpec {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_canonicalizes() {
        assert_eq!(spec("A2!").to_string(), "A2!");
        assert_eq!(spec("d3").to_string(), "A3");
        assert!("D2".parse::<RootSystemSpec>().is_err());
        assert!("E9".parse::<RootSystemSpec>().is_err());
        assert!("A0".parse::<RootSystemSpec>().is_err());
        assert!("B2".parse::<RootSystemSpec>().is_err());
        assert!("A".parse::<RootSystemSpec>().is_err());
        assert_eq!(spec("E8!").generator_count(), 9);
    }

    #[test]
    fn cartan_examples() {
        assert_eq!(build_cartan(spec("A1")).rows(), &[vec![2]]);
        assert_eq!(build_cartan(spec("A1!")).rows(), &[vec![2, -2], vec![-2, 2]]);
        assert_eq!(build_cartan(spec("A2")).rows(), &[vec![2, -1], vec![-1, 2]]);
    }

    #[test]
    fn cartan_is_symmetric_with_unit_diagonal_pairs() {
        for s in ["A4", "D5", "E6", "E7", "E8", "A3!", "D4!", "E6!"] {
            let a = build_cartan(spec(s));
            for i in 0..a.size() {
                assert_eq!(a.entry(i, i), 2);
                for j in 0..a.size() {
                    assert_eq!(a.entry(i, j), a.entry(j, i));
                    if i != j {
                        assert!([0, -1].contains(&a.entry(i, j)), "{s} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn highest_roots() {
        assert_eq!(highest_root(spec("A1")).unwrap().coords, vec![1]);
        assert_eq!(highest_root(spec("A2")).unwrap().coords, vec![1, 1]);
        assert_eq!(highest_root(spec("D4")).unwrap().coords, vec![1, 2, 1, 1]);
        assert_eq!(highest_root(spec("E8")).unwrap().height(), 29);
        assert!(highest_root(spec("A1!")).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(exponents(spec("A1")).unwrap().values, vec![1]);
        assert_eq!(exponents(spec("A2")).unwrap().values, vec![1, 2]);
        assert_eq!(exponents(spec("D4")).unwrap().values, vec![1, 3, 3, 5]);
        assert_eq!(exponents(spec("E6")).unwrap().values, vec![1, 4, 5, 7, 8, 11]);
        assert_eq!(exponents(spec("E8")).unwrap().values, vec![1, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn exponent_sum_counts_roots() {
        for s in ["A1", "A4", "D4", "D6", "E6", "E7", "E8"] {
            let d = RootDatum::new(spec(s));
            assert_eq!(d.exponents().sum() as usize, d.finite_positive_roots().len());
        }
    }

    #[test]
    fn heights_of_c() {
        assert_eq!(coxeter_height_of_c(spec("A1!")).unwrap(), 2);
        assert_eq!(coxeter_height_of_c(spec("A2!")).unwrap(), 3);
        assert_eq!(coxeter_height_of_c(spec("D4!")).unwrap(), 6);
        assert!(coxeter_height_of_c(spec("A2")).is_err());
    }

    #[test]
    fn affine_cartan_kills_c() {
        for s in ["A1!", "A2!", "A5!", "D4!", "D5!", "E6!", "E7!", "E8!"] {
            let d = RootDatum::new(spec(s));
            let c = d.null_root().unwrap();
            assert!(d.cartan().apply(&c).iter().all(|&x| x == 0), "{s}");
        }
    }

    #[test]
    fn coroot_examples() {
        let coords = |s: &str, depth| -> Vec<(Vec<i64>, RootKind, u32)> {
            positive_coroots_up_to(spec(s), depth)
                .into_iter()
                .map(|r| (r.coords, r.kind, r.multiplicity))
                .collect()
        };
        assert_eq!(coords("A1", 1), vec![(vec![1], RootKind::Real, 1)]);
        assert_eq!(
            coords("A2", 2),
            vec![
                (vec![0, 1], RootKind::Real, 1),
                (vec![1, 0], RootKind::Real, 1),
                (vec![1, 1], RootKind::Real, 1)
            ]
        );
        assert_eq!(
            coords("A1!", 2),
            vec![
                (vec![0, 1], RootKind::Real, 1),
                (vec![1, 0], RootKind::Real, 1),
                (vec![1, 1], RootKind::Imaginary, 1)
            ]
        );
    }

    #[test]
    fn imaginary_multiplicity_is_rank() {
        let roots = positive_coroots_up_to(spec("A2!"), 9);
        let imag: Vec<_> = roots.iter().filter(|r| r.kind == RootKind::Imaginary).collect();
        assert_eq!(imag.len(), 3);
        assert!(imag.iter().all(|r| r.multiplicity == 2));
    }
}
