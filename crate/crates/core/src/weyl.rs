//! Weyl group elements as reduced words, breadth-first enumeration by
//! length, and the action on anchored exponents.
//!
//! Elements are identified by their orbit key `x - w(x)` for a regular
//! dominant point `x` (by default `rho^vee`, all labels 1). Since `x` is
//! regular the map `w -> w(x)` is injective, so keys deduplicate elements
//! without building any matrix representation.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootdata::{CartanMatrix, RootDatum};
use crate::series::{height, AnchoredSeries, Beta};

pub const DEFAULT_LAYER_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylElement {
    /// Reduced word, 1-based generator indices, leftmost letter first.
    pub word: Vec<usize>,
    /// Coordinates of `x - w(x)` over the simple coroots.
    pub orbit_key: Vec<i64>,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        Self { word: Vec::new(), orbit_key: vec![0; n] }
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    /// `(-1)^{l(w)}`
    pub fn sign(&self) -> i64 {
        if self.word.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// A generator `i` with `w = w_i w'` and `l(w') = l(w) - 1`.
    pub fn left_descent(&self) -> Result<usize> {
        self.word.first().copied().ok_or(Error::IdentityHasNoDescent)
    }
}

/// `beta' = beta + (label_i - (A beta)_i) e_i`: the displacement of
/// `w_i(Lambda - beta)` below `Lambda`. Self-inverse.
pub fn reflect(datum: &RootDatum, i: usize, labels: &[i64], beta: &[i64]) -> Result<Beta> {
    let g = datum.check_generator(i)?;
    datum.check_len(labels)?;
    datum.check_len(beta)?;
    Ok(reflect_raw(datum.cartan(), g, labels, beta))
}

#[inline]
pub(crate) fn reflect_raw(cartan: &CartanMatrix, g: usize, labels: &[i64], beta: &[i64]) -> Beta {
    let k = labels[g] - cartan.pair(g, beta);
    let mut out = beta.to_vec();
    out[g] += k;
    out
}

/// One BFS layer: the elements of a given length, each with the index of
/// the element it was extended from (in the previous layer).
#[derive(Debug, Clone)]
pub struct Layer {
    pub length: usize,
    pub elements: Vec<WeylElement>,
    pub parents: Vec<usize>,
}

/// Breadth-first walk over `W` by left multiplication.
///
/// Layer `k + 1` is built by extending every element of layer `k`, in
/// order, by every generator that raises the length, keeping the first word
/// found for each new key. Only the current frontier is held in memory.
#[derive(Debug, Clone)]
pub struct LayerWalker<'a> {
    cartan: &'a CartanMatrix,
    point: Vec<i64>,
    prune_height: Option<i64>,
    cap: usize,
    current: Layer,
}

impl<'a> LayerWalker<'a> {
    /// Walk keyed by `rho^vee`.
    pub fn new(datum: &'a RootDatum, cap: usize) -> Self {
        Self::with_point(datum, vec![1; datum.generator_count()], cap)
            .expect("rho is regular dominant")
    }

    /// Walk keyed by a regular dominant point given by its labels (all >= 1).
    pub fn with_point(datum: &'a RootDatum, point: Vec<i64>, cap: usize) -> Result<Self> {
        datum.check_len(&point)?;
        if point.iter().any(|&x| x < 1) {
            return Err(Error::NotDominant(point));
        }
        let n = datum.generator_count();
        Ok(Self {
            cartan: datum.cartan(),
            point,
            prune_height: None,
            cap,
            current: Layer { length: 0, elements: vec![WeylElement::identity(n)], parents: vec![0] },
        })
    }

    /// Skip elements whose key height exceeds `h`. Keys only grow along
    /// length-raising extensions, so no element below the bound is lost.
    pub fn prune_above(mut self, h: i64) -> Self {
        self.prune_height = Some(h);
        self
    }

    pub fn current(&self) -> &Layer {
        &self.current
    }

    /// Replace the current layer with the next one. Returns `false` once
    /// the group is exhausted (the new layer is empty).
    pub fn advance(&mut self) -> Result<bool> {
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut elements = Vec::new();
        let mut parents = Vec::new();
        for (pi, w) in self.current.elements.iter().enumerate() {
            for g in 0..self.cartan.size() {
                let p = self.point[g] - self.cartan.pair(g, &w.orbit_key);
                if p <= 0 {
                    continue;
                }
                let mut key = w.orbit_key.clone();
                key[g] += p;
                if self.prune_height.is_some_and(|h| height(&key) > h) {
                    continue;
                }
                if index.contains_key(&key) {
                    continue;
                }
                index.insert(key.clone(), elements.len());
                let mut word = Vec::with_capacity(w.word.len() + 1);
                word.push(g + 1);
                word.extend_from_slice(&w.word);
                elements.push(WeylElement { word, orbit_key: key });
                parents.push(pi);
            }
        }
        let length = self.current.length + 1;
        if elements.len() > self.cap {
            return Err(Error::LayerCapExceeded { length, size: elements.len(), cap: self.cap });
        }
        let nonempty = !elements.is_empty();
        self.current = Layer { length, elements, parents };
        Ok(nonempty)
    }
}

/// Layers `0..=max_length` of `W`, keyed by `rho^vee`. For a finite group
/// the list stops early once the group is exhausted.
pub fn enumerate_layers(datum: &RootDatum, max_length: usize, cap: usize) -> Result<Vec<Vec<WeylElement>>> {
    let mut walker = LayerWalker::new(datum, cap);
    let mut out = vec![walker.current().elements.clone()];
    for _ in 0..max_length {
        if !walker.advance()? {
            break;
        }
        out.push(walker.current().elements.clone());
    }
    Ok(out)
}

/// Apply `w` to every exponent of an exact series, rightmost letter first.
pub fn act_on_series(datum: &RootDatum, w: &WeylElement, s: &AnchoredSeries) -> Result<AnchoredSeries> {
    act_word(datum, &w.word, s)
}

pub fn act_word(datum: &RootDatum, word: &[usize], s: &AnchoredSeries) -> Result<AnchoredSeries> {
    if !s.is_exact() {
        return Err(Error::NotExact);
    }
    let gens: Vec<usize> = word.iter().map(|&i| datum.check_generator(i)).collect::<Result<_>>()?;
    let labels = s.anchor();
    let terms = s.terms().iter().map(|(b, c)| {
        let beta = gens.iter().rev().fold(b.clone(), |acc, &g| reflect_raw(datum.cartan(), g, labels, &acc));
        (beta, c.clone())
    });
    AnchoredSeries::exact(s.spec(), labels.to_vec(), terms)
}

/// `w_i` applied to the stored terms of a possibly truncated series, keeping
/// images of height at most `target_depth`. Only meaningful where no term
/// beyond the stored depth can reflect into the kept range; callers choose
/// `target_depth` accordingly.
pub fn reflect_series_truncated(
    datum: &RootDatum,
    i: usize,
    s: &AnchoredSeries,
    target_depth: u32,
) -> Result<AnchoredSeries> {
    let g = datum.check_generator(i)?;
    let labels = s.anchor();
    let terms = s.terms().iter().map(|(b, c)| (reflect_raw(datum.cartan(), g, labels, b), c.clone()));
    let kept: Vec<_> = terms.filter(|(b, _)| height(b) <= i64::from(target_depth)).collect();
    AnchoredSeries::truncated(s.spec(), labels.to_vec(), target_depth, kept)
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheHeader {
    spec: String,
    spec_hash: String,
    max_length: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    length: usize,
    word: Vec<usize>,
    orbit_key: Vec<i64>,
}

/// On-disk cache of Weyl layers, one JSON object per line.
///
/// The first line is a header `{"max_length", "spec", "spec_hash"}`; every
/// further line is `{"length", "orbit_key", "word"}` in BFS order. A file
/// whose header hash does not match the requested spec is recomputed.
#[derive(Debug, Clone)]
pub struct LayerCache {
    dir: PathBuf,
}

impl LayerCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, datum: &RootDatum, max_length: usize) -> PathBuf {
        let spec = datum.spec().to_string().replace('!', "-affine");
        self.dir.join(format!("weyl-{spec}-L{max_length}.jsonl"))
    }

    /// Cached layers when the file is present and valid, freshly computed
    /// (and written) otherwise.
    pub fn load_or_compute(&self, datum: &RootDatum, max_length: usize, cap: usize) -> Result<Vec<Vec<WeylElement>>> {
        let path = self.path_for(datum, max_length);
        if let Some(layers) = read_cache(&path, datum, max_length)? {
            return Ok(layers);
        }
        let layers = enumerate_layers(datum, max_length, cap)?;
        fs::create_dir_all(&self.dir)?;
        write_cache(&path, datum, max_length, &layers)?;
        Ok(layers)
    }
}

fn read_cache(path: &Path, datum: &RootDatum, max_length: usize) -> Result<Option<Vec<Vec<WeylElement>>>> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(file).lines();
    let Some(first) = lines.next() else { return Ok(None) };
    let header: CacheHeader = match serde_json::from_str(&first?) {
        Ok(h) => h,
        Err(_) => return Ok(None),
    };
    if header.spec_hash != datum.spec().spec_hash() || header.max_length != max_length {
        return Ok(None);
    }
    let mut layers: Vec<Vec<WeylElement>> = Vec::new();
    for line in lines {
        let rec: CacheRecord = match serde_json::from_str(&line?) {
            Ok(r) => r,
            Err(_) => return Ok(None),
        };
        if rec.length > layers.len() {
            return Ok(None);
        }
        if rec.length == layers.len() {
            layers.push(Vec::new());
        }
        layers[rec.length].push(WeylElement { word: rec.word, orbit_key: rec.orbit_key });
    }
    Ok((!layers.is_empty()).then_some(layers))
}

fn write_cache(path: &Path, datum: &RootDatum, max_length: usize, layers: &[Vec<WeylElement>]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        let header = CacheHeader {
            spec: datum.spec().to_string(),
            spec_hash: datum.spec().spec_hash(),
            max_length,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for (length, layer) in layers.iter().enumerate() {
            for w in layer {
                let rec = CacheRecord { length, word: w.word.clone(), orbit_key: w.orbit_key.clone() };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n")?;
            }
        }
        out.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vpoly::VPoly;

    fn datum(s: &str) -> RootDatum {
        RootDatum::new(s.parse().unwrap())
    }

    fn sizes(s: &str, l: usize) -> Vec<usize> {
        enumerate_layers(&datum(s), l, DEFAULT_LAYER_CAP).unwrap().iter().map(Vec::len).collect()
    }

    #[test]
    fn layer_size_examples() {
        assert_eq!(sizes("A2", 3), vec![1, 2, 2, 1]);
        assert_eq!(sizes("A1", 1), vec![1, 1]);
        assert_eq!(sizes("A1!", 5), vec![1, 2, 2, 2, 2, 2]);
        // exhausted before the requested length
        assert_eq!(sizes("A2", 10), vec![1, 2, 2, 1]);
    }

    #[test]
    fn reflect_examples() {
        let a1 = datum("A1");
        assert_eq!(reflect(&a1, 1, &[2], &[0]).unwrap(), vec![2]);
        assert_eq!(reflect(&a1, 1, &[0], &[0]).unwrap(), vec![0]);
        let aff = datum("A1!");
        assert_eq!(reflect(&aff, 2, &[0, 1], &[0, 0]).unwrap(), vec![0, 1]);
        assert!(matches!(reflect(&aff, 3, &[0, 1], &[0, 0]), Err(Error::BadGenerator { .. })));
    }

    #[test]
    fn descent_examples() {
        let w = WeylElement { word: vec![1, 2], orbit_key: vec![] };
        assert_eq!(w.left_descent().unwrap(), 1);
        let w = WeylElement { word: vec![2], orbit_key: vec![] };
        assert_eq!(w.left_descent().unwrap(), 2);
        assert!(WeylElement::identity(2).left_descent().is_err());
    }

    #[test]
    fn keys_replay_from_words() {
        let d = datum("A2!");
        let rho = vec![1; 3];
        for layer in enumerate_layers(&d, 6, DEFAULT_LAYER_CAP).unwrap() {
            for w in layer {
                let zero = vec![0; 3];
                let image = w.word.iter().rev().fold(zero, |acc, &i| reflect(&d, i, &rho, &acc).unwrap());
                assert_eq!(image, w.orbit_key);
                assert!(height(&w.orbit_key) >= w.length() as i64);
            }
        }
    }

    #[test]
    fn layer_cap_is_enforced() {
        let err = enumerate_layers(&datum("A3!"), 8, 5);
        assert!(matches!(err, Err(Error::LayerCapExceeded { .. })));
    }

    #[test]
    fn act_examples() {
        let d = datum("A1");
        let spec = d.spec();
        let s = AnchoredSeries::monomial(spec, vec![2], vec![0], VPoly::one()).unwrap();
        let id = WeylElement::identity(1);
        assert_eq!(act_on_series(&d, &id, &s).unwrap(), s);
        let w1 = WeylElement { word: vec![1], orbit_key: vec![1] };
        let image = act_on_series(&d, &w1, &s).unwrap();
        assert!(image.coefficient(&[2]).unwrap().is_one());
        assert_eq!(act_on_series(&d, &w1, &image).unwrap(), s);
        let trunc = s.truncate(3).unwrap();
        assert!(matches!(act_on_series(&d, &w1, &trunc), Err(Error::NotExact)));
    }

    #[test]
    fn cache_round_trip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LayerCache::new(dir.path());
        let d = datum("A1!");
        let first = cache.load_or_compute(&d, 4, DEFAULT_LAYER_CAP).unwrap();
        let path = cache.path_for(&d, 4);
        assert!(path.exists());
        let again = cache.load_or_compute(&d, 4, DEFAULT_LAYER_CAP).unwrap();
        assert_eq!(first, again);

        let text = fs::read_to_string(&path).unwrap();
        let tampered = text.replacen(&d.spec().spec_hash(), "deadbeef", 1);
        fs::write(&path, tampered).unwrap();
        let rebuilt = cache.load_or_compute(&d, 4, DEFAULT_LAYER_CAP).unwrap();
        assert_eq!(first, rebuilt);
        assert!(fs::read_to_string(&path).unwrap().contains(&d.spec().spec_hash()));
    }
}
