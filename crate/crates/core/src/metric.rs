//! Finite metric spaces with exact rational distances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// A finite metric space. Distances are stored as integer multiples of
/// `1/unit`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    label: String,
    names: Vec<String>,
    ticks: Vec<u64>,
    unit: i64,
}

impl FiniteMetricSpace {
    /// Builds a space from a full distance matrix, checking the metric axioms.
    pub fn new(label: impl Into<String>, names: Vec<String>, dist: &[Vec<Scalar>]) -> Result<Self> {
        let n = names.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Domain("distance matrix shape does not match point count".into()));
        }
        if dist.iter().flatten().any(|d| d.is_negative()) {
            return Err(Error::Domain("negative distance".into()));
        }
        let unit = scalar::common_unit(dist.iter().flatten());
        let ticks = dist
            .iter()
            .flatten()
            .map(|d| scalar::floor_ticks(d, unit).expect("nonnegative"))
            .collect();
        Self::from_ticks(label, names, ticks, unit)
    }

    pub fn from_ticks(label: impl Into<String>, names: Vec<String>, ticks: Vec<u64>, unit: i64) -> Result<Self> {
        let space = Self::from_ticks_unchecked(label, names, ticks, unit);
        space.validate()?;
        Ok(space)
    }

    /// Skips the cubic triangle-inequality check; used for shortest-path
    /// metrics, which satisfy it by construction.
    pub(crate) fn from_ticks_unchecked(label: impl Into<String>, names: Vec<String>, ticks: Vec<u64>, unit: i64) -> Self {
        debug_assert_eq!(ticks.len(), names.len() * names.len());
        FiniteMetricSpace {
            label: label.into(),
            names,
            ticks,
            unit: unit.max(1),
        }
    }

    /// Shortest-path metric of a weighted undirected graph.
    pub fn from_graph(label: impl Into<String>, names: Vec<String>, edges: &[(usize, usize, Scalar)]) -> Result<Self> {
        let n = names.len();
        if edges.iter().any(|(_, _, w)| !w.is_positive()) {
            return Err(Error::Domain("edge weights must be positive".into()));
        }
        if edges.iter().any(|&(a, b, _)| a >= n || b >= n) {
            return Err(Error::Domain("edge endpoint out of range".into()));
        }
        let unit = scalar::common_unit(edges.iter().map(|e| &e.2));
        let mut adj = vec![Vec::new(); n];
        for (a, b, w) in edges {
            let t = scalar::floor_ticks(w, unit).expect("positive");
            adj[*a].push((*b, t));
            adj[*b].push((*a, t));
        }
        let ticks = all_pairs(&adj).ok_or_else(|| Error::Domain("graph is disconnected".into()))?;
        Ok(Self::from_ticks_unchecked(label, names, ticks, unit))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.ticks(i, i) != 0 {
                return Err(Error::Domain(format!("d(x,x) != 0 at point {i}")));
            }
            for j in 0..n {
                if self.ticks(i, j) != self.ticks(j, i) {
                    return Err(Error::Domain(format!("asymmetric distance between {i} and {j}")));
                }
                if i != j && self.ticks(i, j) == 0 {
                    return Err(Error::Domain(format!("distinct points {i} and {j} at distance 0")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = self.ticks(i, k);
                for j in 0..n {
                    if self.ticks(i, j) > dik + self.ticks(k, j) {
                        return Err(Error::Domain(format!("triangle inequality fails for ({i},{k},{j})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Distances are multiples of `1 / unit`.
    pub fn unit(&self) -> i64 {
        self.unit
    }

    #[inline]
    pub fn ticks(&self, i: usize, j: usize) -> u64 {
        self.ticks[i * self.names.len() + j]
    }

    pub fn dist(&self, i: usize, j: usize) -> Scalar {
        scalar::from_ticks(self.ticks(i, j), self.unit)
    }

    /// Largest tick count `t` with `t / unit <= r`.
    pub fn threshold(&self, r: &Scalar) -> u64 {
        scalar::floor_ticks(r, self.unit).unwrap_or(0)
    }

    pub fn to_scalar(&self, ticks: u64) -> Scalar {
        scalar::from_ticks(ticks, self.unit)
    }

    pub fn diameter_ticks_of(&self, pts: &[usize]) -> u64 {
        let mut best = 0;
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                best = best.max(self.ticks(i, j));
            }
        }
        best
    }

    pub fn diameter_of(&self, pts: &[usize]) -> Scalar {
        self.to_scalar(self.diameter_ticks_of(pts))
    }

    pub fn diameter(&self) -> Scalar {
        self.to_scalar(self.ticks.iter().copied().max().unwrap_or(0))
    }

    pub fn eccentricity_ticks(&self, i: usize) -> u64 {
        (0..self.len()).map(|j| self.ticks(i, j)).max().unwrap_or(0)
    }

    /// Induced metric on a subset of points.
    pub fn subspace(&self, pts: &[usize], label: impl Into<String>) -> FiniteMetricSpace {
        let names = pts.iter().map(|&i| self.names[i].clone()).collect();
        let ticks = pts
            .iter()
            .flat_map(|&i| pts.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.ticks(i, j))
            .collect();
        Self::from_ticks_unchecked(label, names, ticks, self.unit)
    }

    /// Same space with distances expressed in a finer unit (a multiple of the current one).
    pub fn rescaled(&self, unit: i64) -> FiniteMetricSpace {
        assert!(unit % self.unit == 0, "new unit must be a multiple of the old one");
        let f = (unit / self.unit) as u64;
        Self::from_ticks_unchecked(
            self.label.clone(),
            self.names.clone(),
            self.ticks.iter().map(|t| t * f).collect(),
            unit,
        )
    }

    /// Adjacency lists of the graph joining distinct points at distance `<= r`.
    pub fn proximity_graph(&self, r: &Scalar) -> Vec<Vec<usize>> {
        let t = self.threshold(r);
        let n = self.len();
        (0..n)
            .map(|i| (0..n).filter(|&j| j != i && self.ticks(i, j) <= t).collect())
            .collect()
    }

    /// Connected components of the `r`-proximity graph restricted to `pts`.
    pub fn components_within(&self, pts: &[usize], r: &Scalar) -> Vec<Vec<usize>> {
        let t = self.threshold(r);
        let mut seen = vec![false; pts.len()];
        let mut out = Vec::new();
        for s in 0..pts.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![pts[s]];
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                for b in 0..pts.len() {
                    if !seen[b] && self.ticks(pts[a], pts[b]) <= t {
                        seen[b] = true;
                        comp.push(pts[b]);
                        queue.push_back(b);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn components(&self, r: &Scalar) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.components_within(&all, r)
    }
}

/// All-pairs shortest paths on a graph with positive integer weights.
/// Returns `None` if the graph is disconnected.
pub(crate) fn all_pairs(adj: &[Vec<(usize, u64)>]) -> Option<Vec<u64>> {
    let n = adj.len();
    let uniform = {
        let mut ws = adj.iter().flatten().map(|e| e.1);
        match ws.next() {
            Some(w0) => ws.all(|w| w == w0).then_some(w0),
            None => Some(1),
        }
    };
    let mut out = vec![0u64; n * n];
    for s in 0..n {
        let row = match uniform {
            Some(w) => bfs(adj, s, w),
            None => dijkstra(adj, s),
        };
        if row.contains(&u64::MAX) {
            return None;
        }
        out[s * n..(s + 1) * n].copy_from_slice(&row);
    }
    Some(out)
}

fn bfs(adj: &[Vec<(usize, u64)>], s: usize, w: u64) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adj.len()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(a) = q.pop_front() {
        for &(b, _) in &adj[a] {
            if dist[b] == u64::MAX {
                dist[b] = dist[a] + w;
                q.push_back(b);
            }
        }
    }
    dist
}

pub(crate) fn dijkstra(adj: &[Vec<(usize, u64)>], s: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adj.len()];
    dist[s] = 0;
    let mut heap = BinaryHeap::from([Reverse((0u64, s))]);
    while let Some(Reverse((d, a))) = heap.pop() {
        if d > dist[a] {
            continue;
        }
        for &(b, w) in &adj[a] {
            let nd = d + w;
            if nd < dist[b] {
                dist[b] = nd;
                heap.push(Reverse((nd, b)));
            }
        }
    }
    dist
}

/// The cycle `C_m` with its path metric; point `i` is named `i`.
pub fn cycle(m: usize) -> FiniteMetricSpace {
    let names = (0..m).map(|i| i.to_string()).collect();
    let ticks = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| {
            let d = i.abs_diff(j);
            d.min(m - d) as u64
        })
        .collect();
    FiniteMetricSpace::from_ticks_unchecked(format!("C{m}"), names, ticks, 1)
}

/// The product `C_a x C_b` with the l1 metric; point `(x, y)` has index `y * a + x`.
pub fn torus(a: usize, b: usize) -> FiniteMetricSpace {
    let n = a * b;
    let names = (0..n).map(|i| format!("({},{})", i % a, i / a)).collect();
    let cyc = |d: usize, m: usize| d.min(m - d) as u64;
    let ticks = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cyc((i % a).abs_diff(j % a), a) + cyc((i / a).abs_diff(j / a), b))
        .collect();
    FiniteMetricSpace::from_ticks_unchecked(format!("C{a}xC{b}"), names, ticks, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn cycle_metric() {
        let c = cycle(12);
        assert_eq!(c.dist(1, 11), int(2));
        assert_eq!(c.dist(0, 6), int(6));
        assert_eq!(c.diameter(), int(6));
        c.validate().unwrap();
    }

    #[test]
    fn graph_metric_matches_cycle() {
        let names = (0..7).map(|i| i.to_string()).collect();
        let edges: Vec<_> = (0..7).map(|i| (i, (i + 1) % 7, int(1))).collect();
        let g = FiniteMetricSpace::from_graph("c7", names, &edges).unwrap();
        assert_eq!(g, {
            let mut c = cycle(7);
            c.set_label("c7");
            c
        });
    }

    #[test]
    fn rejects_non_metrics() {
        let names = vec!["a".into(), "b".into(), "c".into()];
        let d = vec![
            vec![int(0), int(1), int(5)],
            vec![int(1), int(0), int(1)],
            vec![int(5), int(1), int(0)],
        ];
        assert!(FiniteMetricSpace::new("bad", names.clone(), &d).is_err());
        let disconnected = FiniteMetricSpace::from_graph("g", names, &[(0, 1, int(1))]);
        assert!(disconnected.is_err());
    }

    #[test]
    fn rational_weights() {
        let names = vec!["a".into(), "b".into(), "c".into()];
        let g = FiniteMetricSpace::from_graph(
            "w",
            names,
            &[(0, 1, Scalar::new(1, 2)), (1, 2, Scalar::new(1, 3)), (0, 2, int(1))],
        )
        .unwrap();
        assert_eq!(g.dist(0, 2), Scalar::new(5, 6));
        assert_eq!(g.unit(), 6);
    }

    #[test]
    fn components_at_scale() {
        let c = cycle(12);
        let pts = [0, 1, 2, 6, 7];
        let comps = c.components_within(&pts, &int(1));
        assert_eq!(comps, vec![vec![0, 1, 2], vec![6, 7]]);
        assert_eq!(c.components(&int(1)).len(), 1);
    }

    #[test]
    fn torus_is_l1() {
        let t = torus(12, 12);
        assert_eq!(t.len(), 144);
        assert_eq!(t.dist(0, 6 + 12 * 6), int(12));
        assert_eq!(t.dist(0, 11 + 12 * 11), int(2));
    }
}
