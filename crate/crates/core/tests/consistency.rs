use affine_cs::characters::{finite_character_exact, weyl_kac_character, Correction};
use affine_cs::verify::{affine_cs_sides, extract_proportionality, verify_affine_cs};
use affine_cs::{RootDatum, StabilizeConfig, Verdict};

fn datum(s: &str) -> RootDatum {
    RootDatum::new(s.parse().unwrap())
}

#[test]
fn deeper_runs_agree_below_the_shallower_depth() {
    let cfg = StabilizeConfig::default();
    for (s, labels, depth) in [("A1!", vec![0, 1], 4u32), ("A1!", vec![2, 1], 4), ("A2!", vec![1, 0, 1], 3)] {
        let d = datum(s);
        let shallow = affine_cs_sides(&d, &labels, depth, cfg, Correction::Direct).unwrap();
        let deep = affine_cs_sides(&d, &labels, depth + 2, cfg, Correction::Direct).unwrap();
        assert_eq!(deep.lhs.series.truncate(depth).unwrap(), shallow.lhs.series, "{s} {labels:?}");
        assert_eq!(deep.rhs.truncate(depth).unwrap(), shallow.rhs, "{s} {labels:?}");
    }
}

#[test]
fn truncated_and_exact_finite_characters_agree() {
    for (s, labels) in [("A2", vec![2, 1]), ("A3", vec![1, 0, 1]), ("D4", vec![0, 1, 0, 0])] {
        let d = datum(s);
        let exact = finite_character_exact(&d, &labels).unwrap();
        let top = exact.max_height().unwrap() as u32;
        for depth in [0, top / 2, top] {
            let truncated = weyl_kac_character(&d, &labels, depth).unwrap();
            assert_eq!(exact.truncate(depth).unwrap(), truncated, "{s} {labels:?} depth {depth}");
        }
    }
}

#[test]
fn proportionality_lives_on_multiples_of_c() {
    let d = datum("A1!");
    let c = d.null_root().unwrap();
    for labels in [[0, 1], [1, 1], [3, 2]] {
        let ratio = extract_proportionality(&d, &labels, 6, StabilizeConfig::default()).unwrap();
        for beta in ratio.terms().keys() {
            let k = beta[1];
            assert_eq!(beta, &vec![k * c[0], k * c[1]], "{labels:?}");
        }
    }
}

/// Agreement with the reciprocal factor does not depend on the anchor or
/// the depth.
#[test]
fn reciprocal_factor_holds_across_anchors() {
    let d = datum("A1!");
    for labels in [[0, 1], [1, 0], [1, 2], [3, 1]] {
        for depth in [2, 5, 7] {
            let r = verify_affine_cs(&d, &labels, depth, StabilizeConfig::default(), Correction::Reciprocal, &[])
                .unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{labels:?} depth {depth}: {}", r.summary());
        }
    }
}
