//! Property tests over random words, subgroups, covers and trees.

use boxdim::boxspace::{assemble_box, BoxFamily};
use boxdim::covers::{quotient_structure, Cover};
use boxdim::dimsolve::dim_profile;
use boxdim::extension::{rho_map, ExtensionData};
use boxdim::formats::{parse_group, read_cover, read_edge_list, write_cover, write_group_record, write_quotient_edges};
use boxdim::groups::{Family, GroupElement, IntMatrix, MarkedGroup};
use boxdim::hirsch::{hirsch_length, parse_tree, ExtensionTree, Hirsch};
use boxdim::metric::cycle;
use boxdim::quotients::{build_quotient, SubgroupSpec};
use boxdim::scalar::int;
use boxdim::separation::is_semi_conjugacy_separating;
use boxdim::Limits;
use proptest::collection::vec;
use proptest::prelude::*;

fn families() -> Vec<MarkedGroup> {
    [
        Family::FreeAbelian(2),
        Family::Heisenberg3,
        Family::InfiniteDihedral,
        Family::WreathLamp(2),
        Family::SemidirectZnZ(IntMatrix::new(2, vec![2, 1, 1, 1]).unwrap()),
    ]
    .into_iter()
    .map(|f| MarkedGroup::standard(f).unwrap())
    .collect()
}

/// A word as (generator index, inverted) letters.
fn word(max_len: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    vec((0..8usize, any::<bool>()), 0..=max_len)
}

fn eval(g: &MarkedGroup, w: &[(usize, bool)]) -> GroupElement {
    let gens = g.generators();
    w.iter().fold(g.identity(), |acc, &(i, inv)| {
        let s = &gens[i % gens.len()];
        let s = if inv { g.inverse(s).unwrap() } else { s.clone() };
        g.multiply(&acc, &s).unwrap()
    })
}

fn congruence(g: &MarkedGroup, m: u64) -> SubgroupSpec {
    let m = match g.family() {
        Family::SemidirectZnZ(_) | Family::Heisenberg3 => m.min(3),
        Family::WreathLamp(_) => m.min(4),
        _ => m,
    };
    SubgroupSpec::congruence(g, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn word_metric_is_right_invariant(fam in 0..5usize, a in word(4), b in word(4), c in word(4)) {
        let g = &families()[fam];
        let (x, y, z) = (eval(g, &a), eval(g, &b), eval(g, &c));
        let d = g.word_distance(&x, &y).unwrap();
        let xz = g.multiply(&x, &z).unwrap();
        let yz = g.multiply(&y, &z).unwrap();
        prop_assert_eq!(g.word_distance(&xz, &yz).unwrap(), d);
        prop_assert!(g.word_distance(&x, &z).unwrap() <= d + g.word_distance(&y, &z).unwrap());
        prop_assert!(g.word_length(&x).unwrap() <= int(a.len() as i64));
    }

    #[test]
    fn free_abelian_metric_is_l1(v in vec(-6i64..=6, 1..=3)) {
        let g = MarkedGroup::standard(Family::FreeAbelian(v.len())).unwrap();
        let l1: i64 = v.iter().map(|x| x.abs()).sum();
        prop_assert_eq!(g.word_length(&GroupElement::Abelian(v)).unwrap(), int(l1));
    }

    #[test]
    fn quotient_map_is_one_lipschitz(fam in 0..5usize, m in 2..6u64, a in word(5), b in word(5)) {
        let g = &families()[fam];
        let q = build_quotient(&congruence(g, m)).unwrap();
        let (x, y) = (eval(g, &a), eval(g, &b));
        prop_assert!(q.distance(q.project(&x), q.project(&y)) <= g.word_distance(&x, &y).unwrap());
    }

    #[test]
    fn torus_distance_is_window_minimum(a in 1..7i64, b in 1..7i64, x in -8i64..8, y in -8i64..8) {
        let g = MarkedGroup::standard(Family::FreeAbelian(2)).unwrap();
        let q = build_quotient(&SubgroupSpec::coordinate_levels(&g, &[a as u64, b as u64]).unwrap()).unwrap();
        let oracle = (-10..=10)
            .flat_map(|i| (-10..=10).map(move |j| (x + i * a).abs() + (y + j * b).abs()))
            .min()
            .unwrap();
        let c = q.project(&GroupElement::Abelian(vec![x, y]));
        prop_assert_eq!(q.distance(0, c), int(oracle));
    }

    #[test]
    fn separation_modes_agree(fam in 0..5usize, levels in vec(1..6u64, 1..4), f in vec(word(3), 1..3)) {
        let g = &families()[fam];
        let sigma: Vec<SubgroupSpec> = levels.iter().map(|&m| congruence(g, m)).collect();
        let f: Vec<GroupElement> = f.iter().map(|w| eval(g, w)).collect();
        let verdicts: Vec<bool> = (1..=3).map(|m| is_semi_conjugacy_separating(&sigma, &f, m).unwrap().verdict).collect();
        prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]));
    }

    #[test]
    fn reflection_modes_agree(n in 1..9u64, j in 0..9i64, f in vec(word(4), 1..3)) {
        let d = MarkedGroup::standard(Family::InfiniteDihedral).unwrap();
        let sigma = [SubgroupSpec::dihedral_with_reflection(&d, n, j).unwrap()];
        let f: Vec<GroupElement> = f.iter().map(|w| eval(&d, w)).collect();
        let verdicts: Vec<bool> = (1..=3).map(|m| is_semi_conjugacy_separating(&sigma, &f, m).unwrap().verdict).collect();
        prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]));
    }

    #[test]
    fn rho_is_one_lipschitz(a in 1..6u64, b in 1..6u64, dihedral in any::<bool>()) {
        let (g, h) = if dihedral {
            let g = MarkedGroup::standard(Family::InfiniteDihedral).unwrap();
            let h = SubgroupSpec::dihedral_with_reflection(&g, a, b as i64).unwrap();
            (g, h)
        } else {
            let g = MarkedGroup::standard(Family::FreeAbelian(2)).unwrap();
            let h = SubgroupSpec::coordinate_levels(&g, &[a, b]).unwrap();
            (g, h)
        };
        let rt = rho_map(&ExtensionData::standard(&g).unwrap(), &h).unwrap();
        let (qg, qk) = (rt.quotient_g(), rt.quotient_k());
        for x in 0..qg.index() {
            for y in 0..qg.index() {
                prop_assert!(qk.distance(rt.map()[x], rt.map()[y]) <= qg.distance(x, y));
            }
        }
        let total: usize = rt.fibers().iter().map(Vec::len).sum();
        prop_assert_eq!(total, qg.index());
    }

    #[test]
    fn cover_checks_agree_with_counting(m in 3..14usize, arcs in vec((0..14usize, 1..8usize), 1..6), r in 0..4i64) {
        let c = cycle(m);
        let members: Vec<Vec<usize>> = arcs.iter().map(|&(s, len)| (0..len.min(m)).map(|k| (s + k) % m).collect()).collect();
        let mut all = members.clone();
        all.push((0..m).collect());
        let cover = Cover::new(&c, all, int(r), int(m as i64)).unwrap();
        let counted = (0..m).map(|p| cover.members().iter().filter(|mem| mem.contains(&p)).count()).max().unwrap();
        prop_assert_eq!(cover.multiplicity(), counted);
        let lim = Limits::default();
        prop_assert!(cover.lebesgue_at_least(&c, &int(r), &lim).unwrap());
        let partial = Cover::new(&c, members.iter().cloned().chain((0..m).map(|p| vec![p])).collect(), int(r), int(m as i64)).unwrap();
        if partial.lebesgue_at_least(&c, &int(r + 1), &lim).unwrap() {
            prop_assert!(partial.lebesgue_at_least(&c, &int(r), &lim).unwrap());
        }
    }

    #[test]
    fn box_metric_axioms(levels in vec(1..5u64, 1..4), base in 1..4i64) {
        let g = MarkedGroup::standard(Family::FreeAbelian(1)).unwrap();
        let sigma: Vec<SubgroupSpec> = levels.iter().map(|&m| SubgroupSpec::congruence(&g, m).unwrap()).collect();
        let family = BoxFamily::new(&g, &sigma).unwrap();
        let lambda: Vec<_> = (0..levels.len()).map(|k| int(base * 2i64.pow(k as u32 + 1))).collect();
        if let Ok(b) = assemble_box(&family, &lambda) {
            let n = b.to_space().unwrap().len();
            for p in 0..n {
                for q in 0..n {
                    prop_assert_eq!(b.dist(p, q), b.dist(q, p));
                    prop_assert_eq!(b.dist(p, q) == int(0), p == q);
                    for r in 0..n {
                        prop_assert!(b.dist(p, r) <= b.dist(p, q) + b.dist(q, r));
                    }
                }
            }
        }
    }

    #[test]
    fn coalescing_keeps_the_profile(levels in vec(prop::sample::select(vec![2u64, 4, 8, 16]), 1..6), r in 1..4i64) {
        let g = MarkedGroup::standard(Family::FreeAbelian(1)).unwrap();
        let sigma: Vec<SubgroupSpec> = levels.iter().map(|&m| SubgroupSpec::congruence(&g, m).unwrap()).collect();
        let family = BoxFamily::new(&g, &sigma).unwrap();
        let merged = family.coalesced();
        let mut distinct = levels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        prop_assert_eq!(merged.len(), distinct.len());
        let spaces = |f: &BoxFamily| f.members().iter().map(|q| (q.space().clone(), quotient_structure(q))).collect::<Vec<_>>();
        let lim = Limits::default();
        let s_max = int(4 * r);
        let a = dim_profile(&spaces(&family), &int(r), &s_max, &lim).unwrap();
        let b = dim_profile(&spaces(&merged), &int(r), &s_max, &lim).unwrap();
        prop_assert_eq!((a.n, a.s), (b.n, b.s));
    }

    #[test]
    fn formats_round_trip(m in 2..7u64, fam in 0..5usize, arcs in vec((0..12usize, 1..5usize), 1..5)) {
        let g = &families()[fam];
        let q = build_quotient(&congruence(g, m)).unwrap();
        let mut text = Vec::new();
        write_quotient_edges(&q, &mut text).unwrap();
        let back = read_edge_list(std::str::from_utf8(&text).unwrap()).unwrap();
        prop_assert_eq!(back.len(), q.index());
        for x in 0..q.index() {
            for y in 0..q.index() {
                prop_assert_eq!(back.dist(x, y), q.distance(x, y));
            }
        }
        let n = q.index();
        let mut members: Vec<Vec<usize>> = arcs.iter().map(|&(s, len)| (0..len).map(|k| (s + k) % n).collect()).collect();
        members.push((0..n).collect());
        let cover = Cover::new(q.space(), members, int(1), q.space().diameter()).unwrap();
        let mut text = Vec::new();
        write_cover(&cover, &mut text).unwrap();
        let again = read_cover(std::str::from_utf8(&text).unwrap(), q.space()).unwrap();
        prop_assert_eq!(again.members(), cover.members());
        let record = write_group_record(g);
        let parsed = parse_group(&record, &Limits::default()).unwrap();
        prop_assert_eq!(parsed.family(), g.family());
        prop_assert_eq!(parsed.generators(), g.generators());
    }
}

fn tree() -> impl Strategy<Value = ExtensionTree> {
    let leaf = prop_oneof![
        (0..4u64, vec(1..6u64, 0..3)).prop_map(|(rank, torsion)| ExtensionTree::AbelianLeaf { rank, torsion }),
        (1..40u64).prop_map(ExtensionTree::FiniteLeaf),
    ];
    leaf.prop_recursive(4, 20, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ExtensionTree::extension(a, b)),
            (vec(inner, 1..4), any::<bool>()).prop_map(|(members, continues)| ExtensionTree::DirectedUnion { members, continues }),
        ]
    })
}

proptest! {
    #[test]
    fn hirsch_is_additive(a in tree(), b in tree()) {
        let joined = ExtensionTree::extension(a.clone(), b.clone());
        prop_assert_eq!(hirsch_length(&joined), hirsch_length(&a) + hirsch_length(&b));
        prop_assert_eq!(parse_tree(&joined.to_string()).unwrap(), joined);
        let union = ExtensionTree::DirectedUnion { members: vec![a.clone(), b.clone()], continues: false };
        prop_assert_eq!(hirsch_length(&union), hirsch_length(&a).max(hirsch_length(&b)));
    }

    #[test]
    fn finite_trees_have_finite_length(a in tree()) {
        let h = hirsch_length(&a);
        let has_growing_union = a.to_string().contains("...");
        prop_assert!(has_growing_union || h != Hirsch::Infinite);
    }
}
