//! Library results against independently computed values.

use std::collections::BTreeSet;

use affine_cs::characters::{finite_character_exact, weyl_kac_character};
use affine_cs::hecke::{apply_t, highest_term};
use affine_cs::weyl::enumerate_layers;
use affine_cs::{AnchoredSeries, DLKind, RootDatum, RootKind, VPoly};

fn datum(s: &str) -> RootDatum {
    RootDatum::new(s.parse().unwrap())
}

/// Positive roots of `A_n` are the sums over contiguous runs of nodes.
fn type_a_roots(n: usize) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i..n {
            out.insert((0..n).map(|k| i64::from(i <= k && k <= j)).collect());
        }
    }
    out
}

#[test]
fn finite_roots_type_a() {
    for n in 1..=5 {
        let d = datum(&format!("A{n}"));
        let got: BTreeSet<Vec<i64>> = d.finite_positive_roots().iter().cloned().collect();
        assert_eq!(got, type_a_roots(n), "A{n}");
    }
}

#[test]
fn finite_root_counts() {
    for (s, count) in [("D4", 12), ("D5", 20), ("E6", 36), ("E7", 63), ("E8", 120)] {
        assert_eq!(datum(s).finite_positive_roots().len(), count, "{s}");
    }
}

/// Affine positive coroots are `alpha + j c` (j >= 0), `-alpha + j c`
/// (j >= 1) with multiplicity one, and `j c` (j >= 1) with multiplicity
/// equal to the rank.
#[test]
fn affine_roots_match_catalogue() {
    for (s, depth) in [("A1!", 9), ("A2!", 8), ("A3!", 7)] {
        let d = datum(s);
        let n = d.rank();
        let c = d.null_root().unwrap();
        let mut expected = BTreeSet::new();
        for j in 0..=depth {
            let jc: Vec<i64> = c.iter().map(|x| x * j).collect();
            if j >= 1 && jc.iter().sum::<i64>() <= depth {
                expected.insert((jc.clone(), n as u32));
            }
            for alpha in type_a_roots(n) {
                let mut plus = alpha.clone();
                plus.push(0);
                let plus: Vec<i64> = plus.iter().zip(&jc).map(|(a, b)| a + b).collect();
                if plus.iter().sum::<i64>() <= depth {
                    expected.insert((plus, 1));
                }
                if j >= 1 {
                    let mut minus: Vec<i64> = alpha.iter().map(|a| -a).collect();
                    minus.push(0);
                    let minus: Vec<i64> = minus.iter().zip(&jc).map(|(a, b)| a + b).collect();
                    if minus.iter().sum::<i64>() <= depth {
                        expected.insert((minus, 1));
                    }
                }
            }
        }
        let got: BTreeSet<(Vec<i64>, u32)> = d
            .positive_coroots_up_to(depth as u32)
            .into_iter()
            .map(|r| {
                let imaginary = r.kind == RootKind::Imaginary;
                assert_eq!(imaginary, r.multiplicity as usize == n && r.coords.iter().all(|&x| x > 0) && {
                    let k = r.coords[n];
                    r.coords.iter().zip(&c).all(|(a, b)| *a == k * b)
                });
                (r.coords, r.multiplicity)
            })
            .collect();
        assert_eq!(got, expected, "{s}");
    }
}

#[test]
fn exponent_tables() {
    for (s, e) in [
        ("A1", vec![1]),
        ("A4", vec![1, 2, 3, 4]),
        ("D4", vec![1, 3, 3, 5]),
        ("D5", vec![1, 3, 4, 5, 7]),
        ("E6", vec![1, 4, 5, 7, 8, 11]),
        ("E7", vec![1, 5, 7, 9, 11, 13, 17]),
        ("E8", vec![1, 7, 11, 13, 17, 19, 23, 29]),
    ] {
        assert_eq!(datum(s).exponents().values, e, "{s}");
    }
}

#[test]
fn weyl_group_orders() {
    for (s, order) in [("A1", 2u128), ("A2", 6), ("A3", 24), ("A4", 120), ("D4", 192)] {
        let d = datum(s);
        let n = d.finite_positive_roots().len();
        let layers = enumerate_layers(&d, n + 1, usize::MAX).unwrap();
        let total: usize = layers.iter().map(Vec::len).sum();
        assert_eq!(total as u128, order, "{s}");
        assert_eq!(d.exponents().weyl_group_order(), order, "{s}");
        assert_eq!(layers[n].len(), 1, "{s}: unique longest element");
        assert!(layers.len() == n + 1 || layers[n + 1].is_empty(), "{s}");
    }
}

/// Bott's formula `prod_i (1 - t^{m_i + 1}) / ((1 - t)(1 - t^{m_i}))` for the
/// length generating function of an affine Weyl group, to order `n`.
fn bott_series(exponents: &[u32], n: usize) -> Vec<i64> {
    let mul = |a: &[i64], b: &[i64]| {
        let mut out = vec![0i64; n + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate().take(n + 1 - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    let geometric = |step: usize| (0..=n).map(|k| i64::from(k % step == 0)).collect::<Vec<_>>();
    let mut series = vec![0i64; n + 1];
    series[0] = 1;
    for &m in exponents {
        let mut top = vec![0i64; n + 1];
        top[0] = 1;
        if (m as usize) < n {
            top[m as usize + 1] = -1;
        }
        series = mul(&series, &top);
        series = mul(&series, &geometric(1));
        series = mul(&series, &geometric(m as usize));
    }
    series
}

#[test]
fn affine_layer_sizes_follow_bott() {
    for (s, n) in [("A1!", 8), ("A2!", 7), ("A3!", 5), ("D4!", 4)] {
        let d = datum(s);
        let sizes: Vec<i64> =
            enumerate_layers(&d, n, usize::MAX).unwrap().iter().map(|l| l.len() as i64).collect();
        assert_eq!(sizes, bott_series(&d.exponents().values, n), "{s}");
    }
}

fn vinv() -> VPoly {
    VPoly::v_pow(-1)
}

/// `T_i(e^mu)` in terms of `X = e^{-a_i}` and `n = <a_i, mu>`:
/// `(1 - v^-1) (X + ... + X^n) - v^-1 X^{n+1}` for `n >= 0`, and
/// `v^-1 (X^{2-m} + ... + X^0) - (X^{1-m} + ... + X^0)` for `n = -m < 0`.
fn closed_form_t(n: i64) -> Vec<(i64, VPoly)> {
    let one_minus = &VPoly::one() - &vinv();
    let mut out = Vec::new();
    if n >= 0 {
        for k in 1..=n {
            out.push((k, one_minus.clone()));
        }
        out.push((n + 1, -vinv()));
    } else {
        let m = -n;
        for k in (1 - m)..=0 {
            let mut c = VPoly::constant(-1);
            if k >= 2 - m {
                c += &vinv();
            }
            out.push((k, c));
        }
    }
    out
}

#[test]
fn t_operator_closed_form() {
    for (s, base) in [("A1", vec![0]), ("A2!", vec![1, 0, 2]), ("D4", vec![0, 1, 0, 0])] {
        let d = datum(s);
        for i in 1..=d.generator_count() {
            for n in -6..=6 {
                let mut labels = base.clone();
                labels[i - 1] = n;
                let got = apply_t(&d, i, &highest_term(&d, &labels).unwrap(), DLKind::T).unwrap();
                let terms = closed_form_t(n).into_iter().map(|(k, c)| {
                    let mut beta = vec![0; d.generator_count()];
                    beta[i - 1] = k;
                    (beta, c)
                });
                let expected = AnchoredSeries::exact(d.spec(), labels.clone(), terms).unwrap();
                assert_eq!(got, expected, "{s} i={i} n={n}");
            }
        }
    }
}

fn partitions(n: usize) -> Vec<i64> {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p
}

/// Basic representation of affine `A1`: the weights are
/// `Lambda_0 + m a_1 - (m^2 + n) c` with multiplicity `p(n)`.
#[test]
fn basic_representation_of_affine_a1() {
    let depth = 14;
    let d = datum("A1!");
    let chi = weyl_kac_character(&d, &[0, 1], depth).unwrap();
    let p = partitions(depth as usize);
    let mut expected = Vec::new();
    for m in -4i64..=4 {
        for n in 0..=depth as i64 {
            let beta = vec![m * m + n - m, m * m + n];
            if beta.iter().sum::<i64>() <= i64::from(depth) {
                expected.push((beta, VPoly::constant(p[n as usize])));
            }
        }
    }
    let expected = AnchoredSeries::truncated(d.spec(), vec![0, 1], depth, expected).unwrap();
    assert_eq!(chi, expected);
}

/// `dim V(lambda) = prod_a <lambda + rho, a> / <rho, a>` with type-A roots
/// taken from the contiguous-run description.
#[test]
fn finite_dimensions_type_a() {
    for n in 1..=3 {
        let d = datum(&format!("A{n}"));
        let roots = type_a_roots(n);
        let mut labels = vec![0i64; n];
        loop {
            let chi = finite_character_exact(&d, &labels).unwrap();
            let dim: i64 = chi.terms().values().map(|c| i64::try_from(c.coeff(0)).unwrap()).sum();
            let (mut num, mut den) = (1i64, 1i64);
            for a in &roots {
                num *= a.iter().zip(&labels).map(|(x, l)| x * (l + 1)).sum::<i64>();
                den *= a.iter().sum::<i64>();
            }
            assert_eq!(dim, num / den, "A{n} {labels:?}");
            let Some(pos) = labels.iter().position(|&x| x < 3) else { break };
            labels[pos] += 1;
            labels[..pos].iter_mut().for_each(|x| *x = 0);
        }
    }
}

#[test]
fn d4_adjoint_and_vector() {
    let d = datum("D4");
    let adjoint = finite_character_exact(&d, &[0, 1, 0, 0]).unwrap();
    let total: i64 = adjoint.terms().values().map(|c| i64::try_from(c.coeff(0)).unwrap()).sum();
    assert_eq!(total, 28);
    assert_eq!(adjoint.coefficient(&[1, 2, 1, 1]).unwrap(), VPoly::constant(4));
    let vector = finite_character_exact(&d, &[1, 0, 0, 0]).unwrap();
    assert_eq!(vector.len(), 8);
}
