//! Covers of finite metric spaces: exact multiplicity, bound and Lebesgue
//! checks, slab and greedy constructors, and lifting covers from a quotient
//! back to the group.

use std::collections::{BTreeMap, HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::groups::{Ball, GroupElement};
use crate::limits::Limits;
use crate::metric::FiniteMetricSpace;
use crate::quotients::FiniteQuotient;
use crate::scalar::{self, Scalar};
use crate::separation;

/// A finite family of nonempty point sets covering a space, with the scale
/// `r` (Lebesgue target) and bound `s` it was built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub label: String,
    points: usize,
    members: Vec<Vec<usize>>,
    pub r: Scalar,
    pub s: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCheck {
    pub multiplicity: usize,
    pub bound: Scalar,
    pub lebesgue: bool,
}

impl CoverCheck {
    /// Whether the cover meets its declared parameters.
    pub fn meets(&self, r_ok: bool, s: &Scalar) -> bool {
        r_ok && self.lebesgue && self.bound <= *s
    }
}

impl Cover {
    /// Members are sorted and deduplicated internally; the family itself may
    /// contain repeated members.
    pub fn new(space: &FiniteMetricSpace, members: Vec<Vec<usize>>, r: Scalar, s: Scalar) -> Result<Self> {
        let n = space.len();
        let mut seen = vec![false; n];
        let mut clean = Vec::with_capacity(members.len());
        for mut m in members {
            m.sort_unstable();
            m.dedup();
            if m.is_empty() {
                return Err(Error::Domain("cover members must be nonempty".into()));
            }
            if let Some(&bad) = m.iter().find(|&&p| p >= n) {
                return Err(Error::Domain(format!("point {bad} is outside the space")));
            }
            for &p in &m {
                seen[p] = true;
            }
            clean.push(m);
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(format!("point {} is not covered", space.name(p))));
        }
        Ok(Cover {
            label: space.label().to_string(),
            points: n,
            members: clean,
            r,
            s,
        })
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    fn same_space(&self, space: &FiniteMetricSpace) -> Result<()> {
        if space.len() != self.points {
            return Err(Error::Domain(format!(
                "cover has {} points but the space has {}",
                self.points,
                space.len()
            )));
        }
        Ok(())
    }

    /// Number of members containing each point.
    pub fn point_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.points];
        for m in &self.members {
            for &p in m {
                counts[p] += 1;
            }
        }
        counts
    }

    pub fn multiplicity(&self) -> usize {
        self.point_counts().into_iter().max().unwrap_or(0)
    }

    /// Whether some `k` distinct members (by position) share a point, found by
    /// searching member subsets with running intersections.
    pub fn k_members_meet(&self, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        let sets: Vec<FixedBitSet> = self.members.iter().map(|m| bitset(self.points, m)).collect();
        fn go(sets: &[FixedBitSet], start: usize, acc: &FixedBitSet, left: usize) -> bool {
            if left == 0 {
                return true;
            }
            for i in start..sets.len() {
                if sets.len() - i < left {
                    break;
                }
                let mut next = acc.clone();
                next.intersect_with(&sets[i]);
                if !next.is_clear() && go(sets, i + 1, &next, left - 1) {
                    return true;
                }
            }
            false
        }
        let mut all = FixedBitSet::with_capacity(self.points);
        all.insert_range(..);
        go(&sets, 0, &all, k)
    }

    pub fn bound(&self, space: &FiniteMetricSpace) -> Result<Scalar> {
        self.same_space(space)?;
        Ok(space.to_scalar(self.members.iter().map(|m| space.diameter_ticks_of(m)).max().unwrap_or(0)))
    }

    /// A maximal `r`-clique (restricted to `within` if given) lying in no
    /// member, or `None` when the Lebesgue number is at least `r`.
    pub fn lebesgue_failure(
        &self,
        space: &FiniteMetricSpace,
        r: &Scalar,
        within: Option<&[usize]>,
        limits: &Limits,
    ) -> Result<Option<Vec<usize>>> {
        self.same_space(space)?;
        let n = self.points;
        let sets: Vec<FixedBitSet> = self.members.iter().map(|m| bitset(n, m)).collect();
        let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, m) in self.members.iter().enumerate() {
            for &p in m {
                containing[p].push(i);
            }
        }
        let mut failure = None;
        for_each_maximal_clique(space, r, within, limits.cliques, |clique| {
            let inside = containing[clique[0]]
                .iter()
                .any(|&i| clique.iter().all(|&p| sets[i].contains(p)));
            if !inside {
                failure = Some(clique.to_vec());
            }
            inside
        })?;
        Ok(failure)
    }

    pub fn lebesgue_at_least(&self, space: &FiniteMetricSpace, r: &Scalar, limits: &Limits) -> Result<bool> {
        Ok(self.lebesgue_failure(space, r, None, limits)?.is_none())
    }

    /// Multiplicity, bound and the Lebesgue check at the cover's own `r`.
    pub fn check(&self, space: &FiniteMetricSpace, limits: &Limits) -> Result<CoverCheck> {
        Ok(CoverCheck {
            multiplicity: self.multiplicity(),
            bound: self.bound(space)?,
            lebesgue: self.lebesgue_at_least(space, &self.r, limits)?,
        })
    }

    /// Errors unless the cover has Lebesgue number `>= r` and bound `<= s`.
    pub fn verify(&self, space: &FiniteMetricSpace, limits: &Limits) -> Result<CoverCheck> {
        let c = self.check(space, limits)?;
        if !c.lebesgue {
            return Err(Error::Integrity(format!(
                "cover of {} has Lebesgue number below {}",
                self.label,
                scalar::fmt_scalar(&self.r)
            )));
        }
        if c.bound > self.s {
            return Err(Error::Integrity(format!(
                "cover of {} has bound {} above {}",
                self.label,
                scalar::fmt_scalar(&c.bound),
                scalar::fmt_scalar(&self.s)
            )));
        }
        Ok(c)
    }
}

pub fn multiplicity(c: &Cover) -> usize {
    c.multiplicity()
}

pub fn bound(c: &Cover, space: &FiniteMetricSpace) -> Result<Scalar> {
    c.bound(space)
}

pub fn lebesgue_at_least(c: &Cover, space: &FiniteMetricSpace, r: &Scalar, limits: &Limits) -> Result<bool> {
    c.lebesgue_at_least(space, r, limits)
}

fn bitset(n: usize, pts: &[usize]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for &p in pts {
        b.insert(p);
    }
    b
}

/// Calls `f` on every maximal clique of the `r`-proximity graph restricted to
/// `within` (all points if `None`), until `f` returns false. Bron–Kerbosch
/// with pivoting; more than `cap` cliques is a resource error.
pub fn for_each_maximal_clique(
    space: &FiniteMetricSpace,
    r: &Scalar,
    within: Option<&[usize]>,
    cap: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> Result<()> {
    let n = space.len();
    let t = space.threshold(r);
    let allowed = match within {
        Some(pts) => bitset(n, pts),
        None => {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert_range(..);
            b
        }
    };
    let adj: Vec<FixedBitSet> = (0..n)
        .map(|i| {
            let mut b = FixedBitSet::with_capacity(n);
            if allowed.contains(i) {
                for j in allowed.ones() {
                    if j != i && space.ticks(i, j) <= t {
                        b.insert(j);
                    }
                }
            }
            b
        })
        .collect();
    struct Search<'a, F> {
        adj: &'a [FixedBitSet],
        count: usize,
        cap: usize,
        stop: bool,
        f: F,
    }
    impl<F: FnMut(&[usize]) -> bool> Search<'_, F> {
        fn run(&mut self, r: &mut Vec<usize>, mut p: FixedBitSet, mut x: FixedBitSet) -> Result<()> {
            if self.stop {
                return Ok(());
            }
            if p.is_clear() && x.is_clear() {
                self.count += 1;
                if self.count > self.cap {
                    return Err(Error::resource("maximal clique enumeration", self.cap));
                }
                if !(self.f)(r) {
                    self.stop = true;
                }
                return Ok(());
            }
            let pivot = p
                .ones()
                .chain(x.ones())
                .max_by_key(|&u| p.intersection(&self.adj[u]).count())
                .expect("p or x is nonempty");
            let candidates: Vec<usize> = p.difference(&self.adj[pivot]).collect();
            for v in candidates {
                r.push(v);
                let mut np = p.clone();
                np.intersect_with(&self.adj[v]);
                let mut nx = x.clone();
                nx.intersect_with(&self.adj[v]);
                self.run(r, np, nx)?;
                r.pop();
                if self.stop {
                    return Ok(());
                }
                p.set(v, false);
                x.insert(v);
            }
            Ok(())
        }
    }
    let mut s = Search {
        adj: &adj,
        count: 0,
        cap,
        stop: false,
        f: |c: &[usize]| {
            let mut c = c.to_vec();
            c.sort_unstable();
            f(&c)
        },
    };
    let mut r = Vec::new();
    s.run(&mut r, allowed, FixedBitSet::with_capacity(n))
}

/// All maximal `r`-cliques, each sorted, in discovery order.
pub fn maximal_cliques(space: &FiniteMetricSpace, r: &Scalar, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for_each_maximal_clique(space, r, None, limits.cliques, |c| {
        out.push(c.to_vec());
        true
    })?;
    Ok(out)
}

/// Coordinate structure that the slab and pullback constructors exploit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    /// Points listed in cyclic order of a cycle metric.
    Cycle(Vec<usize>),
    /// `C_a x C_b` with the l1 metric; `index[y * a + x]` is a point.
    Grid { a: usize, b: usize, index: Vec<usize> },
    /// A 1-Lipschitz map onto a cycle of `base_len` positions whose
    /// consecutive positions are `step` ticks apart.
    Fibered { base_len: usize, position: Vec<usize>, step: u64 },
}

/// Recognizes a cycle metric: points at the least positive distance form a
/// single cycle and all distances are multiples of it along the cycle.
pub fn cycle_order(space: &FiniteMetricSpace) -> Option<Vec<usize>> {
    let m = space.len();
    if m <= 2 {
        return Some((0..m).collect());
    }
    let d0 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| space.ticks(i, j)).min()?;
    let nbrs: Vec<Vec<usize>> = (0..m).map(|i| (0..m).filter(|&j| j != i && space.ticks(i, j) == d0).collect()).collect();
    if nbrs.iter().any(|v| v.len() != 2) {
        return None;
    }
    let mut order = vec![0, nbrs[0][0]];
    while order.len() < m {
        let (prev, cur) = (order[order.len() - 2], order[order.len() - 1]);
        let next = if nbrs[cur][0] == prev { nbrs[cur][1] } else { nbrs[cur][0] };
        if next == 0 {
            return None;
        }
        order.push(next);
    }
    for i in 0..m {
        for j in 0..m {
            let k = i.abs_diff(j);
            if space.ticks(order[i], order[j]) != d0 * k.min(m - k) as u64 {
                return None;
            }
        }
    }
    Some(order)
}

/// Structure of a quotient of standard `Z` or `Z^2` by coordinate levels.
pub fn quotient_structure(q: &FiniteQuotient) -> Option<Structure> {
    let Some(grid) = q.grid_structure() else {
        return shift_fibration(q);
    };
    match grid.levels.as_slice() {
        [m] => {
            let mut order = vec![0; *m as usize];
            for (c, x) in grid.coords.iter().enumerate() {
                order[x[0] as usize] = c;
            }
            Some(Structure::Cycle(order))
        }
        [a, b] => {
            let (a, b) = (*a as usize, *b as usize);
            let mut index = vec![0; a * b];
            for (c, x) in grid.coords.iter().enumerate() {
                index[x[1] as usize * a + x[0] as usize] = c;
            }
            Some(Structure::Grid { a, b, index })
        }
        _ => None,
    }
}

fn shift_of(g: &GroupElement) -> Option<i64> {
    match g {
        GroupElement::Lamp { shift, .. } | GroupElement::Semidirect { shift, .. } => Some(*shift),
        _ => None,
    }
}

/// The shift homomorphism onto `Z`, reduced mod the largest `n` through
/// which it factors over the quotient.
fn shift_fibration(q: &FiniteQuotient) -> Option<Structure> {
    let host = q.host();
    let heights: Vec<i64> = q.reps().iter().map(shift_of).collect::<Option<_>>()?;
    let mut n = 0i64;
    let mut step = u64::MAX;
    for (s, w) in host.generators().iter().zip(host.weights()) {
        let k = shift_of(s)?;
        if k != 0 {
            step = step.min(q.space().threshold(w) / k.unsigned_abs());
        }
        for (c, h) in heights.iter().enumerate() {
            n = num_integer::gcd(n, h + k - heights[q.act(s, c)]);
        }
    }
    if n < 2 || step == 0 || step == u64::MAX {
        return None;
    }
    let position = heights.iter().map(|h| h.rem_euclid(n) as usize).collect();
    Some(Structure::Fibered {
        base_len: n as usize,
        position,
        step,
    })
}

/// Arcs of a cycle of length `m`: `q` blocks of near-equal length, each
/// extended `ext` positions forward.
fn block_arcs(m: usize, q: usize, ext: usize) -> Vec<Vec<usize>> {
    if q <= 1 {
        return vec![(0..m).collect()];
    }
    let mut out = Vec::with_capacity(q);
    let mut start = 0;
    for i in 0..q {
        let len = m / q + usize::from(i < m % q);
        let span = (len + ext).min(m);
        out.push((0..span).map(|k| (start + k) % m).collect());
        start += len;
    }
    out
}

/// Slab cover of a cycle: blocks of at least `R` steps, each extended by `R`
/// steps, so multiplicity is at most 2 and the bound at most `4R`.
pub fn slab_cycle(space: &FiniteMetricSpace, order: &[usize], r: &Scalar) -> Result<Cover> {
    let rs = cycle_steps(space, order, r);
    let members = cycle_slabs(order, rs, 3 * rs + 1);
    let cover = Cover::new(space, members, *r, *r * scalar::int(4))?;
    cover.verify(space, &Limits::default())?;
    Ok(cover)
}

/// Slab cover of a cycle with blocks of at most `max_block` points; the
/// declared bound is the measured one.
pub fn slab_cycle_blocks(space: &FiniteMetricSpace, order: &[usize], r: &Scalar, max_block: usize) -> Result<Cover> {
    let rs = cycle_steps(space, order, r);
    if rs > 0 && max_block < rs {
        return Err(Error::Parameter(format!("blocks of {max_block} points cannot reach scale {}", scalar::fmt_scalar(r))));
    }
    let members = cycle_slabs(order, rs, max_block.max(1));
    let bt = members.iter().map(|m| space.diameter_ticks_of(m)).max().unwrap_or(0);
    let cover = Cover::new(space, members, *r, space.to_scalar(bt))?;
    cover.verify(space, &Limits::default())?;
    Ok(cover)
}

fn cycle_steps(space: &FiniteMetricSpace, order: &[usize], r: &Scalar) -> usize {
    let step = if order.len() >= 2 { space.ticks(order[0], order[1]) } else { 1 };
    (space.threshold(r) / step.max(1)) as usize
}

fn cycle_slabs(order: &[usize], rs: usize, max_block: usize) -> Vec<Vec<usize>> {
    let m = order.len();
    if rs == 0 {
        return order.iter().map(|&p| vec![p]).collect();
    }
    let q = if m <= max_block { 1 } else { m.div_ceil(max_block) };
    block_arcs(m, q, rs)
        .into_iter()
        .map(|arc| arc.into_iter().map(|i| order[i]).collect())
        .collect()
}

fn parts(total: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = total / k + usize::from(i < total % k);
        out.push((start, len));
        start += len;
    }
    out
}

/// Brick cover of an l1 torus: rows of height `>= 2R`, alternate rows shifted
/// by half a brick, members the `R`-neighbourhoods of bricks. Among brick
/// layouts with multiplicity at most 3 and bound at most `8R`, the finest is
/// returned.
pub fn slab_grid(space: &FiniteMetricSpace, a: usize, b: usize, index: &[usize], r: &Scalar, limits: &Limits) -> Result<Cover> {
    let step = if a >= 2 {
        space.ticks(index[0], index[1])
    } else if b >= 2 {
        space.ticks(index[0], index[a])
    } else {
        1
    };
    let rt = space.threshold(r);
    let rs = (rt / step.max(1)) as usize;
    let s = *r * scalar::int(8);
    let st = space.threshold(&s);
    let n = space.len();
    let mut best: Option<(usize, u64, Cover)> = None;
    let row_counts: Vec<usize> = std::iter::once(1)
        .chain((2..=b / (2 * rs).max(1)).filter(|k| k % 2 == 0))
        .collect();
    let col_max = (a / (4 * rs).saturating_sub(2).max(1)).max(1);
    for &nr in &row_counts {
        for nc in 1..=col_max {
            let cols = parts(a, nc);
            let shift = if nc >= 2 { cols.iter().map(|c| c.1).min().unwrap_or(0) / 2 } else { 0 };
            let mut members = Vec::new();
            for (row, (y0, h)) in parts(b, nr).into_iter().enumerate() {
                let off = if row % 2 == 1 { shift } else { 0 };
                for &(x0, w) in &cols {
                    let brick: Vec<usize> = (0..h)
                        .flat_map(|dy| (0..w).map(move |dx| ((x0 + dx + off) % a, (y0 + dy) % b)))
                        .map(|(x, y)| index[y * a + x])
                        .collect();
                    let nbhd: Vec<usize> = (0..n).filter(|&p| brick.iter().any(|&q| space.ticks(p, q) <= rt)).collect();
                    members.push(nbhd);
                }
            }
            let cover = Cover::new(space, members, *r, s)?;
            let mult = cover.multiplicity();
            let bt = cover.members().iter().map(|m| space.diameter_ticks_of(m)).max().unwrap_or(0);
            if mult > 3 || bt > st {
                continue;
            }
            let better = match &best {
                None => true,
                Some((len, b0, _)) => cover.len() > *len || (cover.len() == *len && bt < *b0),
            };
            if better {
                best = Some((cover.len(), bt, cover));
            }
        }
    }
    let (_, _, cover) = best.ok_or_else(|| Error::Unsupported("no brick layout meets the multiplicity and bound targets".into()))?;
    cover.verify(space, limits)?;
    Ok(cover)
}

/// Slab or brick cover of a recognized cyclic or toral quotient.
pub fn greedy_slab_cover(q: &FiniteQuotient, r: &Scalar) -> Result<Cover> {
    let structure = quotient_structure(q)
        .ok_or_else(|| Error::Unsupported(format!("no coordinate structure recognized on {}", q.label())))?;
    slab_cover(q.space(), &structure, r, q.host().limits())
}

pub fn slab_cover(space: &FiniteMetricSpace, structure: &Structure, r: &Scalar, limits: &Limits) -> Result<Cover> {
    match structure {
        Structure::Cycle(order) => slab_cycle(space, order, r),
        Structure::Grid { a, b, index } => slab_grid(space, *a, *b, index, r, limits),
        Structure::Fibered { .. } => Err(Error::Unsupported("slab covers need a cycle or grid".into())),
    }
}

/// Greedy cover: maximal `R`-cliques merged first-fit while the merged
/// diameter stays at most `S`. Lebesgue number `>= R` holds by construction.
pub fn greedy_cover(space: &FiniteMetricSpace, r: &Scalar, s: &Scalar, limits: &Limits) -> Result<Cover> {
    let st = space.threshold(s);
    let cliques = maximal_cliques(space, r, limits)?;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for c in cliques {
        if space.diameter_ticks_of(&c) > st {
            return Err(Error::Precondition(format!(
                "an {}-clique of {} has diameter above {}",
                scalar::fmt_scalar(r),
                space.label(),
                scalar::fmt_scalar(s)
            )));
        }
        let fits = groups.iter().position(|g| {
            c.iter()
                .all(|&p| g.contains(&p) || g.iter().all(|&q| space.ticks(p, q) <= st))
        });
        match fits {
            Some(i) => {
                for p in c {
                    if !groups[i].contains(&p) {
                        groups[i].push(p);
                    }
                }
            }
            None => groups.push(c),
        }
    }
    let cover = Cover::new(space, groups, *r, *s)?;
    cover.verify(space, limits)?;
    Ok(cover)
}

/// Connected components (at scale `R`) of the preimages of base arcs.
/// Multiplicity is at most that of the arc family; the Lebesgue number is at
/// least `R` when the arcs have Lebesgue number at least `R` on the base.
pub fn pullback_cover(
    space: &FiniteMetricSpace,
    position: &[usize],
    arcs: &[Vec<usize>],
    r: &Scalar,
    s: &Scalar,
) -> Result<Cover> {
    let n = space.len();
    let t = space.threshold(r);
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && space.ticks(i, j) <= t).collect()).collect();
    let members = pullback_members(&adj, position, arcs);
    Cover::new(space, members, *r, *s)
}

fn pullback_members(adj: &[Vec<usize>], position: &[usize], arcs: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let base_len = position.iter().max().map_or(0, |m| m + 1);
    let mut members = Vec::new();
    for arc in arcs {
        let mut in_arc = vec![false; base_len];
        for &i in arc {
            in_arc[i] = true;
        }
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] || !in_arc[position[s]] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                for &b in &adj[a] {
                    if !seen[b] && in_arc[position[b]] {
                        seen[b] = true;
                        comp.push(b);
                        queue.push_back(b);
                    }
                }
            }
            members.push(comp);
        }
    }
    members
}

/// The whole base cycle, then every layout of `q >= 2` blocks extended by
/// `rs` steps (singletons when `rs = 0`).
fn arc_layouts(base_len: usize, rs: usize) -> Vec<Vec<Vec<usize>>> {
    let mut layouts = vec![block_arcs(base_len, 1, 0)];
    match base_len.checked_div(rs) {
        None => layouts.push((0..base_len).map(|i| vec![i]).collect()),
        Some(most) => layouts.extend((2..=most).map(|q| block_arcs(base_len, q, rs))),
    }
    layouts
}

/// Pullback covers over every block layout of the base cycle; returns the
/// one with the least bound among those of least multiplicity.
pub fn fibered_cover(
    space: &FiniteMetricSpace,
    base_len: usize,
    position: &[usize],
    step: u64,
    r: &Scalar,
    limits: &Limits,
) -> Result<Cover> {
    let n = space.len();
    let t = space.threshold(r);
    let rs = (t / step.max(1)) as usize;
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && space.ticks(i, j) <= t).collect()).collect();
    let mut best: Option<(usize, u64, Vec<Vec<usize>>)> = None;
    let layouts = arc_layouts(base_len, rs);
    for arcs in layouts {
        let members = pullback_members(&adj, position, &arcs);
        let mut counts = vec![0usize; n];
        for m in &members {
            for &p in m {
                counts[p] += 1;
            }
        }
        let mult = counts.into_iter().max().unwrap_or(0);
        let bt = members.iter().map(|m| space.diameter_ticks_of(m)).max().unwrap_or(0);
        let better = match &best {
            None => true,
            Some((m0, b0, _)) => (mult, bt) < (*m0, *b0),
        };
        if better {
            best = Some((mult, bt, members));
        }
    }
    let (_, bt, members) = best.expect("at least one layout");
    let cover = Cover::new(space, members, *r, space.to_scalar(bt))?;
    cover.verify(space, limits)?;
    Ok(cover)
}

/// All pullback covers over block layouts, as (multiplicity, bound ticks,
/// cover), for callers that trade multiplicity against bound themselves.
pub fn fibered_candidates(
    space: &FiniteMetricSpace,
    base_len: usize,
    position: &[usize],
    step: u64,
    r: &Scalar,
) -> Result<Vec<Cover>> {
    let n = space.len();
    let t = space.threshold(r);
    let rs = (t / step.max(1)) as usize;
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && space.ticks(i, j) <= t).collect()).collect();
    let layouts = arc_layouts(base_len, rs);
    layouts
        .into_iter()
        .map(|arcs| {
            let members = pullback_members(&adj, position, &arcs);
            let bt = members.iter().map(|m| space.diameter_ticks_of(m)).max().unwrap_or(0);
            Cover::new(space, members, *r, space.to_scalar(bt))
        })
        .collect()
}

/// A cover of a window in `G` lifted from a cover of `G/H`.
#[derive(Debug, Clone)]
pub struct LiftedCover {
    pub cover: Cover,
    /// Window points within the nominal radius.
    pub nominal: Vec<usize>,
    /// For each lifted member, the quotient member it came from and the
    /// translating element `h ∈ H`.
    pub origin: Vec<(usize, GroupElement)>,
}

/// Lifts `u` (a cover of `q` with bound `s`) to the window: the member
/// `Ũ = π^-1(U) ∩ B_S(g_U)` and its translates `Ũ h`, `h ∈ H`, restricted to
/// the window. `g_U` is the shortest coset representative of the first point
/// of `U`. Requires `π_H` injective on every `B_{3S}(g)`.
pub fn lift_cover(q: &FiniteQuotient, u: &Cover, window: &Ball, nominal_radius: &Scalar, s: &Scalar) -> Result<LiftedCover> {
    let host = q.host();
    if u.points() != q.index() {
        return Err(Error::Domain("cover does not live on this quotient".into()));
    }
    let bound = u.bound(q.space())?;
    if bound > *s {
        return Err(Error::Precondition(format!(
            "cover bound {} exceeds S = {}",
            scalar::fmt_scalar(&bound),
            scalar::fmt_scalar(s)
        )));
    }
    let needed = *s * scalar::int(3);
    if let Some(radius) = separation::injectivity_radius(q)? {
        if radius < needed {
            return Err(Error::Precondition(format!(
                "injectivity radius {} is below 3S = {}",
                scalar::fmt_scalar(&radius),
                scalar::fmt_scalar(&needed)
            )));
        }
    }
    if window.center != host.identity() {
        return Err(Error::Domain("the window must be a ball around the identity".into()));
    }
    if window.radius < *nominal_radius + *s {
        return Err(Error::Precondition("window margin is smaller than S".into()));
    }
    let sball = host.ball_lengths(host.threshold(s)?)?;
    let v_inv: Vec<GroupElement> = sball.iter().map(|(v, _)| host.inv(v)).collect();
    let cosets: Vec<usize> = window.elements.iter().map(|w| q.project(w)).collect();
    let mut by_coset: Vec<Vec<usize>> = vec![Vec::new(); q.index()];
    for (i, m) in u.members().iter().enumerate() {
        for &c in m {
            by_coset[c].push(i);
        }
    }
    let mut slots: BTreeMap<(usize, GroupElement), usize> = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut origin = Vec::new();
    let bases: Vec<GroupElement> = u.members().iter().map(|m| host.inv(&q.reps()[m[0]])).collect();
    for (wi, w) in window.elements.iter().enumerate() {
        for &ui in &by_coset[cosets[wi]] {
            for vi in &v_inv {
                let h = host.mul(&bases[ui], &host.mul(vi, w));
                if !q.spec().contains(&h) {
                    continue;
                }
                let key = (ui, h);
                let slot = *slots.entry(key.clone()).or_insert_with(|| {
                    members.push(Vec::new());
                    origin.push(key);
                    members.len() - 1
                });
                if members[slot].last() != Some(&wi) {
                    members[slot].push(wi);
                }
            }
        }
    }
    let nominal_t = window.space.threshold(nominal_radius);
    let center = window.position(&window.center).expect("center lies in its ball");
    let nominal = (0..window.len()).filter(|&i| window.space.ticks(center, i) <= nominal_t).collect();
    let cover = Cover::new(&window.space, members, u.r, *s)?;
    Ok(LiftedCover { cover, nominal, origin })
}

/// Diameter of each lifted member next to the diameter of its image in `G/H`.
pub fn lifted_diameters(q: &FiniteQuotient, window: &Ball, lifted: &LiftedCover) -> Vec<(Scalar, Scalar)> {
    let cosets: HashMap<usize, usize> = (0..window.len()).map(|i| (i, q.project(&window.elements[i]))).collect();
    lifted
        .cover
        .members()
        .iter()
        .map(|m| {
            let mut image: Vec<usize> = m.iter().map(|i| cosets[i]).collect();
            image.sort_unstable();
            image.dedup();
            (window.space.diameter_of(m), q.space().diameter_of(&image))
        })
        .collect()
}
