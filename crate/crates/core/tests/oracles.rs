//! Worked values checked against independent brute-force oracles that share
//! no code with the library beyond element constructors.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use boxdim::covers::{self, Cover};
use boxdim::dimsolve::{colors_to_cover, exact_min_colors, exact_min_multiplicity, Shape};
use boxdim::extension::{pushforward_family, rho_map, ExtensionData};
use boxdim::groups::{parse_word, Family, GroupElement, MarkedGroup};
use boxdim::metric::{cycle, torus};
use boxdim::quotients::{build_quotient, SubgroupSpec};
use boxdim::scalar::int;
use boxdim::separation::{injectivity_radius, verify_isometry_lemma};
use boxdim::{Limits, Scalar};

fn group(f: Family) -> MarkedGroup {
    MarkedGroup::standard(f).unwrap()
}

/// Breadth-first ball of radius `r` in a Cayley graph given by a product
/// function and a symmetric generating set.
fn bfs<T: Clone + Eq + Hash>(id: T, gens: &[T], mul: impl Fn(&T, &T) -> T, r: usize) -> HashMap<T, usize> {
    let mut dist = HashMap::from([(id.clone(), 0)]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == r {
            continue;
        }
        for g in gens {
            let y = mul(&x, g);
            if !dist.contains_key(&y) {
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn ball_set(g: &MarkedGroup, r: i64) -> HashMap<GroupElement, usize> {
    g.ball_lengths(g.threshold(&int(r)).unwrap())
        .unwrap()
        .into_iter()
        .map(|(x, l)| (x, l as usize))
        .collect()
}

type Mat = [[i64; 3]; 3];

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn unitri(a: i64, b: i64, c: i64) -> Mat {
    [[1, a, c], [0, 1, b], [0, 0, 1]]
}

fn heis(m: &Mat) -> GroupElement {
    GroupElement::Heisenberg([m[0][1], m[1][2], m[0][2]])
}

fn heis_gens() -> Vec<Mat> {
    vec![unitri(1, 0, 0), unitri(-1, 0, 0), unitri(0, 1, 0), unitri(0, -1, 0)]
}

#[test]
fn heisenberg_commutator_is_central() {
    let [x, xi, y, yi] = heis_gens().try_into().unwrap();
    let oracle = matmul(&matmul(&matmul(&x, &y), &xi), &yi);
    assert_eq!(oracle, unitri(0, 0, 1));
    let g = group(Family::Heisenberg3);
    assert_eq!(parse_word(g.family(), "x y x^-1 y^-1").unwrap(), heis(&oracle));
}

#[test]
fn heisenberg_balls_match_matrix_bfs() {
    let g = group(Family::Heisenberg3);
    let oracle = bfs(unitri(0, 0, 0), &heis_gens(), matmul, 4);
    let z = unitri(0, 0, 1);
    assert_eq!(oracle[&z], 4);
    assert_eq!(g.word_length(&heis(&z)).unwrap(), int(4));
    for r in 0..=4 {
        let want: HashMap<GroupElement, usize> = oracle.iter().filter(|(_, &d)| d <= r).map(|(m, &d)| (heis(m), d)).collect();
        assert_eq!(ball_set(&g, r as i64), want, "radius {r}");
    }
    assert_eq!(oracle.values().filter(|&&d| d <= 2).count(), 17);
}

/// `(ε, t)` is the affine map `x ↦ εx + t`; `r = (1, 1)`, `s = (-1, 0)`.
fn affine(a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
    (a.0 * b.0, a.1 + a.0 * b.1)
}

#[test]
fn dihedral_distances_match_affine_bfs() {
    let g = group(Family::InfiniteDihedral);
    let oracle = bfs((1, 0), &[(1, 1), (1, -1), (-1, 0)], affine, 6);
    let to_elt = |&(e, t): &(i64, i64)| GroupElement::Dihedral { rot: t, flip: e < 0 };
    assert_eq!(oracle[&(-1, 2)], 3);
    assert_eq!(g.word_length(&parse_word(g.family(), "r r s").unwrap()).unwrap(), int(3));
    let want: HashMap<GroupElement, usize> = oracle.iter().map(|(k, &d)| (to_elt(k), d)).collect();
    assert_eq!(ball_set(&g, 6), want);
}

/// Lamplighter walker: `(lamps, position)`, right multiplication by `t`
/// moves, by `a` switches the lamp under the walker.
type Walker = (BTreeMap<i64, u64>, i64);

fn walk(k: u64) -> impl Fn(&Walker, &Walker) -> Walker {
    move |x, g| {
        let (mut lamps, pos) = x.clone();
        if let Some(&v) = g.0.get(&0) {
            let e = lamps.entry(pos).or_insert(0);
            *e = (*e + v) % k;
            if *e == 0 {
                lamps.remove(&pos);
            }
        }
        (lamps, pos + g.1)
    }
}

fn walker_gens(k: u64) -> Vec<Walker> {
    vec![
        (BTreeMap::new(), 1),
        (BTreeMap::new(), -1),
        (BTreeMap::from([(0, 1)]), 0),
        (BTreeMap::from([(0, k - 1)]), 0),
    ]
}

#[test]
fn lamplighter_ball_matches_walker_bfs() {
    let g = group(Family::WreathLamp(2));
    let oracle = bfs((BTreeMap::new(), 0), &walker_gens(2), walk(2), 3);
    let want: HashMap<GroupElement, usize> = oracle
        .into_iter()
        .filter(|(_, d)| *d <= 2)
        .map(|((lamps, shift), d)| (GroupElement::Lamp { lamps, shift }, d))
        .collect();
    let ball = ball_set(&g, 2);
    assert_eq!(ball, want);
    let lamp0 = BTreeMap::from([(0, 1)]);
    for (lamps, shift) in [(lamp0.clone(), 0), (BTreeMap::new(), 1), (BTreeMap::new(), -2), (lamp0.clone(), -1), (lamp0, 1)] {
        assert!(ball.contains_key(&GroupElement::Lamp { lamps, shift }));
    }
}

#[test]
fn finite_quotient_orders_match_enumeration() {
    let h = group(Family::Heisenberg3);
    let mod2 = |m: &Mat| m.map(|row| row.map(|v| v.rem_euclid(2)));
    let oracle = bfs(unitri(0, 0, 0), &heis_gens(), |a, b| mod2(&matmul(a, b)), 100);
    assert_eq!(oracle.len(), 8);
    assert_eq!(build_quotient(&SubgroupSpec::heisenberg_mod(&h, 2).unwrap()).unwrap().index(), 8);

    let l = group(Family::WreathLamp(2));
    let fold = |x: &Walker, g: &Walker| {
        let (lamps, pos) = walk(2)(x, g);
        let mut folded = BTreeMap::new();
        for (i, v) in lamps {
            let e = folded.entry(i.rem_euclid(3)).or_insert(0);
            *e = (*e + v) % 2;
        }
        folded.retain(|_, v| *v != 0);
        (folded, pos.rem_euclid(3))
    };
    let oracle = bfs((BTreeMap::new(), 0), &walker_gens(2), fold, 100);
    assert_eq!(oracle.len(), 24);
    assert_eq!(build_quotient(&SubgroupSpec::wreath_level(&l, 3).unwrap()).unwrap().index(), 24);
}

#[test]
fn torus_quotient_distance_is_min_over_representatives() {
    let g = group(Family::FreeAbelian(2));
    let q = build_quotient(&SubgroupSpec::coordinate_levels(&g, &[3, 2]).unwrap()).unwrap();
    let oracle = |dx: i64, dy: i64| {
        (-4..=4)
            .flat_map(|i| (-4..=4).map(move |j| (dx + 3 * i).abs() + (dy + 2 * j).abs()))
            .min()
            .unwrap()
    };
    let p = |x: i64, y: i64| q.project(&GroupElement::Abelian(vec![x, y]));
    assert_eq!(q.distance(p(0, 0), p(2, 1)), int(2));
    for (x0, y0) in (0..3).flat_map(|x| (0..2).map(move |y| (x, y))) {
        for (x1, y1) in (0..3).flat_map(|x| (0..2).map(move |y| (x, y))) {
            assert_eq!(q.distance(p(x0, y0), p(x1, y1)), int(oracle(x1 - x0, y1 - y0)));
        }
    }
}

#[test]
fn dihedral_pushforward_matches_enumeration() {
    let d = group(Family::InfiniteDihedral);
    let ext = ExtensionData::standard(&d).unwrap();
    let h = SubgroupSpec::dihedral_with_reflection(&d, 3, 0).unwrap();
    let pf = pushforward_family(&ext, std::slice::from_ref(&h)).unwrap();
    assert_eq!(build_quotient(&pf.pi_sigma[0]).unwrap().index(), 1);
    assert_eq!(pf.sigma_hat.len(), 1);
    // N ∩ g H g^-1 over all g: r^k lies in every conjugate iff 3 | k.
    for k in -9i64..=9 {
        let rk = GroupElement::Dihedral { rot: k, flip: false };
        let in_all = (-3..=3).all(|j| {
            let g = GroupElement::Dihedral { rot: j, flip: j % 2 == 0 };
            h.contains(&d.multiply(&d.multiply(&d.inverse(&g).unwrap(), &rk).unwrap(), &g).unwrap())
        });
        assert_eq!(in_all, k % 3 == 0);
        assert_eq!(pf.sigma_hat[0].contains(&GroupElement::Abelian(vec![k])), k % 3 == 0, "k = {k}");
    }
}

#[test]
fn reflection_family_fails_on_s() {
    let d = group(Family::InfiniteDihedral);
    let s = parse_word(d.family(), "s").unwrap();
    for n in 1..=8 {
        let h = SubgroupSpec::dihedral_with_reflection(&d, n, 0).unwrap();
        assert!(h.contains(&s));
    }
    let q = build_quotient(&SubgroupSpec::dihedral_with_reflection(&d, 3, 0).unwrap()).unwrap();
    assert_eq!(q.project(&d.identity()), q.project(&s));
    assert_eq!(injectivity_radius(&q).unwrap(), Some(int(0)));
}

#[test]
fn cyclic_injectivity_radius_matches_brute_force() {
    let z = group(Family::FreeAbelian(1));
    for n in 1..=64i64 {
        let oracle = (0..=n)
            .take_while(|&r| (-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).all(|(a, b)| a == b || (a - b) % n != 0))
            .last()
            .unwrap();
        let q = build_quotient(&SubgroupSpec::congruence(&z, n as u64).unwrap()).unwrap();
        assert_eq!(injectivity_radius(&q).unwrap(), Some(int(oracle)), "Z/{n}");
    }
    let q12 = build_quotient(&SubgroupSpec::congruence(&z, 12).unwrap()).unwrap();
    assert_eq!(injectivity_radius(&q12).unwrap(), Some(int(5)));
    let c = verify_isometry_lemma(&q12, &int(2)).unwrap();
    assert!(c.holds && c.vacuous);
    let q64 = build_quotient(&SubgroupSpec::congruence(&z, 64).unwrap()).unwrap();
    let c = verify_isometry_lemma(&q64, &int(10)).unwrap();
    assert!(c.holds && !c.vacuous);
    for x in -10i64..=10 {
        for y in -10i64..=10 {
            let (px, py) = (q64.project(&GroupElement::Abelian(vec![x])), q64.project(&GroupElement::Abelian(vec![y])));
            assert_eq!(q64.distance(px, py), int((x - y).abs()));
        }
    }
}

fn mask(points: &[usize]) -> u64 {
    points.iter().fold(0, |acc, p| acc | 1 << p)
}

/// Inclusion-maximal subsets of `C_m` with cycle diameter at most `r`, as bitmasks.
fn small_sets(m: usize, r: usize) -> Vec<u64> {
    let d = |a: usize, b: usize| ((a + m - b) % m).min((b + m - a) % m);
    let all: Vec<u64> = (1u64..1 << m)
        .filter(|&x| {
            let pts: Vec<usize> = (0..m).filter(|p| x >> p & 1 == 1).collect();
            pts.iter().all(|&a| pts.iter().all(|&b| d(a, b) <= r))
        })
        .collect();
    all.iter().copied().filter(|&x| !all.iter().any(|&y| y != x && x & y == x)).collect()
}

fn has_lebesgue(sets: &[u64], arcs: &[u64]) -> bool {
    sets.iter().all(|&x| arcs.iter().any(|&a| x & a == x))
}

#[test]
fn four_arc_cover_windows() {
    let arcs: Vec<Vec<usize>> = vec![(0..6).collect(), (3..9).collect(), (6..12).collect(), vec![9, 10, 11, 0, 1, 2]];
    let masks: Vec<u64> = arcs.iter().map(|a| mask(a)).collect();
    assert!(has_lebesgue(&small_sets(12, 3), &masks));
    assert!(!has_lebesgue(&small_sets(12, 6), &masks));
    let c12 = cycle(12);
    let cover = Cover::new(&c12, arcs, int(3), int(5)).unwrap();
    assert_eq!(cover.multiplicity(), 2);
    assert!(cover.lebesgue_at_least(&c12, &int(3), &Limits::default()).unwrap());
    assert!(!cover.lebesgue_at_least(&c12, &int(6), &Limits::default()).unwrap());
}

/// Least multiplicity over all families of proper arcs of `C_m` with at most
/// `s + 1` points containing every subset of diameter `<= r`; `None` when no
/// family does.
fn min_arc_multiplicity(m: usize, r: usize, s: usize) -> Option<usize> {
    let arcs: Vec<u64> = (0..m)
        .flat_map(|a| (1..m.min(s + 2)).map(move |len| mask(&(0..len).map(|k| (a + k) % m).collect::<Vec<_>>())))
        .collect();
    assert!(arcs.len() <= 20, "oracle is exponential");
    let sets = small_sets(m, r);
    (1u32..1 << arcs.len())
        .filter_map(|choice| {
            let chosen: Vec<u64> = (0..arcs.len()).filter(|i| choice >> i & 1 == 1).map(|i| arcs[i]).collect();
            has_lebesgue(&sets, &chosen).then(|| (0..m).map(|p| chosen.iter().filter(|a| *a >> p & 1 == 1).count()).max().unwrap())
        })
        .min()
}

#[test]
fn arc_search_matches_subset_enumeration() {
    let lim = Limits::default();
    for (m, r, s) in [(4, 1, 3), (5, 1, 2), (6, 1, 2), (6, 2, 2), (7, 1, 1), (8, 1, 1)] {
        let w = exact_min_multiplicity(&cycle(m), &int(r as i64), &int(s as i64), Shape::Arcs, &lim);
        assert_eq!(w.ok().map(|w| w.value), min_arc_multiplicity(m, r, s), "C_{m} R={r} S={s}");
    }
    let w = exact_min_multiplicity(&cycle(12), &int(3), &int(5), Shape::Arcs, &lim).unwrap();
    assert_eq!(w.value, 2);
}

/// Least number of colors such that each color class splits, under the
/// `r`-proximity relation, into pieces of diameter at most `s`.
fn min_colors(space: &boxdim::FiniteMetricSpace, r: &Scalar, s: &Scalar) -> usize {
    let n = space.len();
    let ok = |colors: &[usize], k: usize| {
        (0..k).all(|c| {
            let pts: Vec<usize> = (0..n).filter(|&p| colors[p] == c).collect();
            space.components_within(&pts, r).iter().all(|comp| space.diameter_of(comp) <= *s)
        })
    };
    for k in 1usize.. {
        let total = k.pow(n as u32);
        for code in 0..total {
            let colors: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
            if ok(&colors, k) {
                return k;
            }
        }
    }
    unreachable!()
}

#[test]
fn coloring_matches_brute_force() {
    let lim = Limits::default();
    let c12 = cycle(12);
    assert_eq!(min_colors(&c12, &int(3), &int(5)), 2);
    let w = exact_min_colors(&c12, &int(3), &int(5), &lim).unwrap();
    assert_eq!(w.value, 2);
    let cover = colors_to_cover(&c12, &w, &lim).unwrap();
    assert!(cover.multiplicity() <= 2);
    assert!(cover.bound(&c12).unwrap() <= int(8));
    assert!(cover.lebesgue_at_least(&c12, &Scalar::new(3, 2), &lim).unwrap());

    let c32 = cycle(32);
    let w = exact_min_colors(&c32, &int(4), &int(12), &lim).unwrap();
    assert_eq!(w.value, 2);
    let cover = colors_to_cover(&c32, &w, &lim).unwrap();
    assert_eq!(cover.multiplicity(), 2);
    assert!(cover.lebesgue_at_least(&c32, &int(2), &lim).unwrap());

    let t = torus(3, 3);
    assert_eq!(exact_min_colors(&t, &int(1), &int(1), &lim).unwrap().value, min_colors(&t, &int(1), &int(1)));
}

#[test]
fn slab_and_brick_constructions() {
    let lim = Limits::default();
    let z = group(Family::FreeAbelian(1));
    let q = build_quotient(&SubgroupSpec::congruence(&z, 32).unwrap()).unwrap();
    let c = covers::greedy_slab_cover(&q, &int(4)).unwrap();
    let check = c.verify(q.space(), &lim).unwrap();
    assert_eq!(check.multiplicity, 2);
    assert!(check.bound <= int(16));
    let z2 = group(Family::FreeAbelian(2));
    let q = build_quotient(&SubgroupSpec::congruence(&z2, 12).unwrap()).unwrap();
    let c = covers::greedy_slab_cover(&q, &int(2)).unwrap();
    assert_eq!(c.verify(q.space(), &lim).unwrap().multiplicity, 3);
}

#[test]
fn rho_matches_coordinate_projection() {
    let z2 = group(Family::FreeAbelian(2));
    let ext = ExtensionData::standard(&z2).unwrap();
    let rt = rho_map(&ext, &SubgroupSpec::coordinate_levels(&z2, &[3, 2]).unwrap()).unwrap();
    let qg = rt.quotient_g();
    assert_eq!((qg.index(), rt.quotient_k().index()), (6, 2));
    let window: Vec<(i64, i64)> = (-4..=4).flat_map(|x| (-4..=4).map(move |y| (x, y))).collect();
    for &(x0, y0) in &window {
        for &(x1, y1) in &window {
            let c0 = qg.project(&GroupElement::Abelian(vec![x0, y0]));
            let c1 = qg.project(&GroupElement::Abelian(vec![x1, y1]));
            assert_eq!(rt.map()[c0] == rt.map()[c1], (y0 - y1) % 2 == 0);
        }
    }
    let sizes: BTreeSet<usize> = rt.fibers().iter().map(Vec::len).collect();
    assert_eq!(sizes, BTreeSet::from([3]));

    let d = group(Family::InfiniteDihedral);
    let ext = ExtensionData::standard(&d).unwrap();
    let rt = rho_map(&ext, &SubgroupSpec::dihedral_rotations(&d, 4).unwrap()).unwrap();
    assert_eq!((rt.quotient_g().index(), rt.quotient_k().index()), (8, 2));
    for k in -6..=6 {
        for flip in [false, true] {
            let g = GroupElement::Dihedral { rot: k, flip };
            let s = GroupElement::Dihedral { rot: 0, flip: true };
            let (cg, cs) = (rt.quotient_g().project(&g), rt.quotient_g().project(&s));
            assert_eq!(rt.map()[cg] == rt.map()[cs], flip);
        }
    }
    assert!(rt.fibers().iter().all(|f| f.len() == 4));
}
