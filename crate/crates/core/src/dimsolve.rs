//! Scale-`R` dimension solvers: exact colorings and exact minimum-multiplicity
//! covers by branch and bound, and uniform profiles over families.

use std::collections::VecDeque;

use crate::covers::{self, Cover, Structure};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::metric::FiniteMetricSpace;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Cover,
    Coloring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    Exact,
    UpperBoundOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Arcs,
    AllSubsets,
}

#[derive(Debug, Clone)]
pub struct ScaleDimWitness {
    pub label: String,
    pub r: Scalar,
    pub s: Scalar,
    pub kind: WitnessKind,
    /// Minimal multiplicity (covers) or color count (colorings) found.
    pub value: usize,
    pub cover: Option<Cover>,
    /// Color of each point, for coloring witnesses.
    pub coloring: Option<Vec<usize>>,
    pub optimality: Optimality,
    /// Search nodes spent on refuting smaller values.
    pub nodes: u64,
}

/// Diameter of the `R`-component of `p` among points of color `c`.
struct ColorState<'a> {
    space: &'a FiniteMetricSpace,
    adj: Vec<Vec<usize>>,
    color: Vec<Option<usize>>,
    st: u64,
}

impl ColorState<'_> {
    fn component_ok(&self, p: usize, c: usize) -> bool {
        let mut comp = vec![p];
        let mut seen = vec![false; self.adj.len()];
        seen[p] = true;
        let mut queue = VecDeque::from([p]);
        while let Some(a) = queue.pop_front() {
            for &b in &self.adj[a] {
                if !seen[b] && self.color[b] == Some(c) {
                    seen[b] = true;
                    if comp.iter().any(|&q| self.space.ticks(b, q) > self.st) {
                        return false;
                    }
                    comp.push(b);
                    queue.push_back(b);
                }
            }
        }
        true
    }
}

fn check_size(space: &FiniteMetricSpace, limits: &Limits) -> Result<()> {
    if space.len() > limits.search_points {
        return Err(Error::Resource {
            what: "exact search points".into(),
            cap: limits.search_points,
            attained: Some(space.len().to_string()),
        });
    }
    Ok(())
}

/// Point order for the searches: decreasing eccentricity, then index.
fn search_order(space: &FiniteMetricSpace) -> Vec<usize> {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(space.eccentricity_ticks(i)), i));
    order
}

/// Least `k` such that the points can be colored with `k` colors so that
/// every monochromatic `R`-component has diameter at most `S`. Distinct
/// components of one color are then `R`-separated, so each color class is an
/// `R`-disjoint `S`-bounded family.
pub fn exact_min_colors(space: &FiniteMetricSpace, r: &Scalar, s: &Scalar, limits: &Limits) -> Result<ScaleDimWitness> {
    check_size(space, limits)?;
    let n = space.len();
    let order = search_order(space);
    let mut state = ColorState {
        space,
        adj: space.proximity_graph(r),
        color: vec![None; n],
        st: space.threshold(s),
    };
    // First-fit upper bound.
    for &p in &order {
        let mut c = 0;
        loop {
            state.color[p] = Some(c);
            if state.component_ok(p, c) {
                break;
            }
            c += 1;
        }
    }
    let mut best: Vec<usize> = state.color.iter().map(|c| c.expect("colored")).collect();
    let mut ub = best.iter().max().map_or(0, |m| m + 1);
    let mut nodes = 0u64;
    let mut exact = true;
    while ub > 1 {
        let k = ub - 1;
        state.color = vec![None; n];
        match color_search(&mut state, &order, 0, k, 0, &mut nodes, limits.search_nodes) {
            Some(true) => {
                best = state.color.iter().map(|c| c.expect("colored")).collect();
                ub = best.iter().max().map_or(0, |m| m + 1);
            }
            Some(false) => break,
            None => {
                exact = false;
                break;
            }
        }
    }
    Ok(ScaleDimWitness {
        label: space.label().to_string(),
        r: *r,
        s: *s,
        kind: WitnessKind::Coloring,
        value: ub.max(usize::from(n > 0)),
        cover: None,
        coloring: Some(best),
        optimality: if exact { Optimality::Exact } else { Optimality::UpperBoundOnly },
        nodes,
    })
}

/// `Some(found)`, or `None` when the node budget runs out.
fn color_search(state: &mut ColorState, order: &[usize], depth: usize, k: usize, used: usize, nodes: &mut u64, cap: u64) -> Option<bool> {
    if depth == order.len() {
        return Some(true);
    }
    *nodes += 1;
    if *nodes > cap {
        return None;
    }
    let p = order[depth];
    for c in 0..k.min(used + 1) {
        state.color[p] = Some(c);
        if state.component_ok(p, c) {
            match color_search(state, order, depth + 1, k, used.max(c + 1), nodes, cap) {
                Some(false) => {}
                other => return other,
            }
        }
    }
    state.color[p] = None;
    Some(false)
}

/// Enlarges each monochromatic component by `R/2`. The result has
/// multiplicity at most `k`, bound at most `S + R` and Lebesgue number at
/// least `R/2`; all three are checked before returning.
pub fn colors_to_cover(space: &FiniteMetricSpace, w: &ScaleDimWitness, limits: &Limits) -> Result<Cover> {
    let coloring = match (w.kind, &w.coloring) {
        (WitnessKind::Coloring, Some(c)) if c.len() == space.len() => c,
        _ => return Err(Error::Domain("expected a coloring witness for this space".into())),
    };
    let half = w.r / scalar::int(2);
    let ht = space.threshold(&half);
    let k = coloring.iter().max().map_or(0, |m| m + 1);
    let mut members = Vec::new();
    for c in 0..k {
        let class: Vec<usize> = (0..space.len()).filter(|&p| coloring[p] == c).collect();
        for comp in space.components_within(&class, &w.r) {
            let nbhd: Vec<usize> = (0..space.len())
                .filter(|&p| comp.iter().any(|&q| space.ticks(p, q) <= ht))
                .collect();
            members.push(nbhd);
        }
    }
    let cover = Cover::new(space, members, half, w.s + w.r)?;
    let check = cover.verify(space, limits)?;
    if check.multiplicity > k {
        return Err(Error::Integrity("enlarged coloring exceeds its color count".into()));
    }
    Ok(cover)
}

fn arc_candidates(space: &FiniteMetricSpace, order: &[usize], st: u64) -> Vec<Vec<usize>> {
    let m = order.len();
    if m == 1 {
        return vec![vec![order[0]]];
    }
    let mut out = Vec::new();
    for len in (1..m).rev() {
        for start in 0..m {
            let arc: Vec<usize> = (0..len).map(|k| order[(start + k) % m]).collect();
            if space.diameter_ticks_of(&arc) <= st {
                out.push(arc);
            }
        }
    }
    out
}

fn subset_candidates(space: &FiniteMetricSpace, st: u64, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = space.len();
    let mut out = Vec::new();
    fn grow(space: &FiniteMetricSpace, st: u64, cur: &mut Vec<usize>, next: usize, out: &mut Vec<Vec<usize>>, cap: usize) -> Result<()> {
        for p in next..space.len() {
            if cur.iter().all(|&q| space.ticks(p, q) <= st) {
                cur.push(p);
                out.push(cur.clone());
                if out.len() > cap {
                    return Err(Error::resource("bounded subset enumeration", cap));
                }
                grow(space, st, cur, p + 1, out, cap)?;
                cur.pop();
            }
        }
        Ok(())
    }
    let _ = n;
    grow(space, st, &mut Vec::new(), 0, &mut out, cap)?;
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Exact search for a cover with multiplicity at most `t` drawn from
/// `candidates`, with every maximal clique inside a chosen member.
struct MultSearch<'a> {
    cliques: &'a [Vec<usize>],
    candidates: &'a [Vec<usize>],
    by_point: Vec<Vec<usize>>,
    member_sets: Vec<Vec<bool>>,
    counts: Vec<usize>,
    chosen: Vec<usize>,
    covered_by: Vec<usize>,
    nodes: u64,
    cap: u64,
}

impl MultSearch<'_> {
    fn contains(&self, cand: usize, clique: &[usize]) -> bool {
        clique.iter().all(|&p| self.member_sets[cand][p])
    }

    fn run(&mut self, t: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return None;
        }
        let Some(ci) = (0..self.cliques.len()).find(|&i| self.covered_by[i] == 0) else {
            return Some(true);
        };
        let clique = &self.cliques[ci];
        let options: Vec<usize> = self.by_point[clique[0]]
            .iter()
            .copied()
            .filter(|&c| self.contains(c, clique))
            .collect();
        for cand in options {
            if self.chosen.contains(&cand) || self.candidates[cand].iter().any(|&p| self.counts[p] >= t) {
                continue;
            }
            self.apply(cand, true);
            match self.run(t) {
                Some(false) => self.apply(cand, false),
                other => return other,
            }
        }
        Some(false)
    }

    fn apply(&mut self, cand: usize, add: bool) {
        for &p in &self.candidates[cand] {
            if add {
                self.counts[p] += 1;
            } else {
                self.counts[p] -= 1;
            }
        }
        for i in 0..self.cliques.len() {
            if self.contains(cand, &self.cliques[i]) {
                if add {
                    self.covered_by[i] += 1;
                } else {
                    self.covered_by[i] -= 1;
                }
            }
        }
        if add {
            self.chosen.push(cand);
        } else {
            self.chosen.pop();
        }
    }
}

/// Least multiplicity of an `S`-bounded cover with Lebesgue number `>= R`,
/// over members of the given shape: proper arcs of a cycle, or arbitrary
/// subsets of diameter at most `S`.
pub fn exact_min_multiplicity(
    space: &FiniteMetricSpace,
    r: &Scalar,
    s: &Scalar,
    shape: Shape,
    limits: &Limits,
) -> Result<ScaleDimWitness> {
    check_size(space, limits)?;
    let st = space.threshold(s);
    let cliques = covers::maximal_cliques(space, r, limits)?;
    if let Some(c) = cliques.iter().find(|c| space.diameter_ticks_of(c) > st) {
        return Err(Error::Precondition(format!(
            "the {}-clique {:?} has diameter above S = {}",
            scalar::fmt_scalar(r),
            c,
            scalar::fmt_scalar(s)
        )));
    }
    let (candidates, upper) = match shape {
        Shape::Arcs => {
            let order = covers::cycle_order(space)
                .ok_or_else(|| Error::Unsupported(format!("{} is not a cycle", space.label())))?;
            let upper = arc_upper_bound(space, &order, r, s);
            (arc_candidates(space, &order, st), upper)
        }
        Shape::AllSubsets => {
            if space.len() > 20 {
                return Err(Error::Resource {
                    what: "all-subsets search points".into(),
                    cap: 20,
                    attained: Some(space.len().to_string()),
                });
            }
            let upper = covers::greedy_cover(space, r, s, limits).ok();
            (subset_candidates(space, st, limits.cliques)?, upper)
        }
    };
    let n = space.len();
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut member_sets = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        let mut set = vec![false; n];
        for &p in c {
            by_point[p].push(i);
            set[p] = true;
        }
        member_sets.push(set);
    }
    let mut search = MultSearch {
        cliques: &cliques,
        candidates: &candidates,
        by_point,
        member_sets,
        counts: vec![0; n],
        chosen: Vec::new(),
        covered_by: vec![0; cliques.len()],
        nodes: 0,
        cap: limits.search_nodes,
    };
    let ub = upper.as_ref().map(|c| c.multiplicity());
    let limit = ub.unwrap_or(cliques.len().max(1) + 1);
    let mut found: Option<(usize, Cover)> = None;
    let mut exact = true;
    for t in 1..limit {
        match search.run(t) {
            Some(true) => {
                let members = search.chosen.iter().map(|&i| candidates[i].clone()).collect();
                found = Some((t, Cover::new(space, members, *r, *s)?));
                break;
            }
            Some(false) => {}
            None => {
                exact = false;
                break;
            }
        }
    }
    let (value, cover) = match (found, upper) {
        (Some(f), _) => f,
        (None, Some(u)) => (u.multiplicity(), u),
        (None, None) => {
            return Err(Error::Precondition(format!(
                "no {}-bounded cover of this shape with Lebesgue number {} exists",
                scalar::fmt_scalar(s),
                scalar::fmt_scalar(r)
            )))
        }
    };
    cover.verify(space, limits)?;
    Ok(ScaleDimWitness {
        label: space.label().to_string(),
        r: *r,
        s: *s,
        kind: WitnessKind::Cover,
        value,
        cover: Some(cover),
        coloring: None,
        optimality: if exact { Optimality::Exact } else { Optimality::UpperBoundOnly },
        nodes: search.nodes,
    })
}

/// A two-layer arc cover inside the arc class, when the slab arithmetic
/// allows one: at least two blocks of at least `R` steps, extended by `R`.
fn arc_upper_bound(space: &FiniteMetricSpace, order: &[usize], r: &Scalar, s: &Scalar) -> Option<Cover> {
    let m = order.len();
    if m < 2 {
        return None;
    }
    let step = space.ticks(order[0], order[1]).max(1);
    let rs = (space.threshold(r) / step) as usize;
    let ss = (space.threshold(s) / step) as usize;
    if rs == 0 {
        return Cover::new(space, order.iter().map(|&p| vec![p]).collect(), *r, *s).ok();
    }
    let max_block = (ss + 1).checked_sub(rs)?;
    if max_block < rs {
        return None;
    }
    let q = m.div_ceil(max_block).max(2);
    if m / q < rs || m / q + usize::from(!m.is_multiple_of(q)) + rs > m - 1 {
        return None;
    }
    let mut members = Vec::with_capacity(q);
    let mut start = 0;
    for i in 0..q {
        let len = m / q + usize::from(i < m % q);
        members.push((0..len + rs).map(|k| order[(start + k) % m]).collect());
        start += len;
    }
    let cover = Cover::new(space, members, *r, *s).ok()?;
    cover.verify(space, &Limits::default()).ok()?;
    Some(cover)
}

/// Per-space result of a uniform profile.
#[derive(Debug, Clone)]
pub struct ProfileEntry {
    pub label: String,
    /// Least multiplicity certified impossible to beat under the budget.
    pub lower: usize,
    pub witness: ScaleDimWitness,
}

#[derive(Debug, Clone)]
pub struct DimProfile {
    pub r: Scalar,
    /// The budget every member's bound must respect.
    pub s_max: Scalar,
    /// Least `n` (multiplicity `n + 1`) achieved by every member.
    pub n: usize,
    /// The uniform bound actually used.
    pub s: Scalar,
    pub optimality: Optimality,
    pub entries: Vec<ProfileEntry>,
}

/// Candidate covers of one space at scale `R` within the budget, from every
/// applicable constructor.
pub fn candidate_covers(
    space: &FiniteMetricSpace,
    structure: Option<&Structure>,
    r: &Scalar,
    s_max: &Scalar,
    limits: &Limits,
) -> Result<Vec<Cover>> {
    let mut out = Vec::new();
    let comps = space.components(r);
    let comp_bound = comps.iter().map(|c| space.diameter_of(c)).max().unwrap_or_default();
    out.push(Cover::new(space, comps, *r, comp_bound)?);
    match structure {
        Some(Structure::Fibered { base_len, position, step }) => {
            out.extend(covers::fibered_candidates(space, *base_len, position, *step, r)?);
        }
        Some(st) => {
            if let Ok(c) = covers::slab_cover(space, st, r, limits) {
                out.push(c);
            }
        }
        None => {}
    }
    if let Some(order) = covers::cycle_order(space) {
        if let Ok(c) = covers::slab_cycle(space, &order, r) {
            out.push(c);
        }
    }
    if space.len() <= limits.search_points {
        match covers::greedy_cover(space, r, s_max, limits) {
            Ok(c) => out.push(c),
            Err(Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut kept = Vec::new();
    for mut c in out {
        let b = c.bound(space)?;
        if b <= *s_max && c.lebesgue_at_least(space, r, limits)? {
            c.s = b;
            kept.push(c);
        }
    }
    Ok(kept)
}

/// The least `n` such that every space has an `S`-bounded cover with
/// Lebesgue number `>= R` and multiplicity `<= n + 1`, for a single
/// `S <= s_max`; `S` is then minimized. Multiplicity 1 is possible exactly
/// when every `R`-component has diameter at most the budget, which gives the
/// exact lower bound reported per space.
pub fn dim_profile(
    spaces: &[(FiniteMetricSpace, Option<Structure>)],
    r: &Scalar,
    s_max: &Scalar,
    limits: &Limits,
) -> Result<DimProfile> {
    let mut per_space: Vec<(usize, Vec<Cover>)> = Vec::with_capacity(spaces.len());
    for (space, structure) in spaces {
        let comp_diam = space.components(r).iter().map(|c| space.diameter_of(c)).max().unwrap_or_default();
        let lower = if comp_diam <= *s_max { 1 } else { 2 };
        let cands = candidate_covers(space, structure.as_ref(), r, s_max, limits)?;
        if cands.is_empty() {
            return Err(Error::Unsupported(format!(
                "no constructor found a cover of {} within S = {}",
                space.label(),
                scalar::fmt_scalar(s_max)
            )));
        }
        per_space.push((lower, cands));
    }
    let target = per_space
        .iter()
        .map(|(_, c)| c.iter().map(|c| c.multiplicity()).min().expect("nonempty"))
        .max()
        .unwrap_or(1);
    let lower_all = per_space.iter().map(|(l, _)| *l).max().unwrap_or(1);
    let mut entries = Vec::with_capacity(spaces.len());
    let mut s_used = scalar::int(0);
    for ((space, _), (lower, cands)) in spaces.iter().zip(per_space) {
        let best = cands
            .into_iter()
            .filter(|c| c.multiplicity() <= target)
            .min_by(|a, b| a.s.cmp(&b.s).then(a.multiplicity().cmp(&b.multiplicity())))
            .expect("the target is reached by every space");
        s_used = s_used.max(best.s);
        let value = best.multiplicity();
        entries.push(ProfileEntry {
            label: space.label().to_string(),
            lower,
            witness: ScaleDimWitness {
                label: space.label().to_string(),
                r: *r,
                s: best.s,
                kind: WitnessKind::Cover,
                value,
                cover: Some(best),
                coloring: None,
                optimality: if value == lower { Optimality::Exact } else { Optimality::UpperBoundOnly },
                nodes: 0,
            },
        });
    }
    Ok(DimProfile {
        r: *r,
        s_max: *s_max,
        n: target.saturating_sub(1),
        s: s_used,
        optimality: if lower_all == target { Optimality::Exact } else { Optimality::UpperBoundOnly },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::cycle;
    use crate::scalar::int;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn colors_on_c12() {
        let w = exact_min_colors(&cycle(12), &int(3), &int(5), &lim()).unwrap();
        assert_eq!(w.value, 2);
        assert_eq!(w.optimality, Optimality::Exact);
        let cover = colors_to_cover(&cycle(12), &w, &lim()).unwrap();
        assert!(cover.multiplicity() <= 2);
        assert!(cover.bound(&cycle(12)).unwrap() <= int(8));
        assert!(cover.lebesgue_at_least(&cycle(12), &Scalar::new(3, 2), &lim()).unwrap());
    }

    #[test]
    fn small_colorings() {
        assert_eq!(exact_min_colors(&cycle(5), &int(1), &int(2), &lim()).unwrap().value, 1);
        let two = FiniteMetricSpace::new("pair", vec!["a".into(), "b".into()], &[vec![int(0), int(3)], vec![int(3), int(0)]]).unwrap();
        assert_eq!(exact_min_colors(&two, &int(3), &int(2), &lim()).unwrap().value, 2);
        assert_eq!(exact_min_colors(&two, &int(2), &int(2), &lim()).unwrap().value, 1);
        assert_eq!(exact_min_colors(&two, &int(3), &int(3), &lim()).unwrap().value, 1);
    }

    #[test]
    fn arc_multiplicity() {
        let w = exact_min_multiplicity(&cycle(12), &int(3), &int(5), Shape::Arcs, &lim()).unwrap();
        assert_eq!((w.value, w.optimality), (2, Optimality::Exact));
        let w = exact_min_multiplicity(&cycle(4), &int(1), &int(3), Shape::Arcs, &lim()).unwrap();
        assert_eq!((w.value, w.optimality), (2, Optimality::Exact));
        let point = cycle(1);
        for shape in [Shape::Arcs, Shape::AllSubsets] {
            assert_eq!(exact_min_multiplicity(&point, &int(2), &int(1), shape, &lim()).unwrap().value, 1);
        }
    }

    #[test]
    fn cycle_profile() {
        let spaces: Vec<_> = (1..=5).map(|k| (cycle(1 << k), None)).collect();
        let p = dim_profile(&spaces, &int(2), &int(8), &lim()).unwrap();
        assert_eq!(p.n, 1);
        assert!(p.s <= int(8));
        assert_eq!(p.optimality, Optimality::Exact);
        let points = vec![(cycle(1), None), (cycle(1), None)];
        assert_eq!(dim_profile(&points, &int(3), &int(1), &lim()).unwrap().n, 0);
    }
}
