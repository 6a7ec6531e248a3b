//! Finite quotients `G/H` realized as Schreier graphs.
//!
//! A subgroup is always the preimage `H = φ^-1(T_H)` of a subgroup `T_H` of a
//! permutation group under a homomorphism `φ` given by images of the host's
//! canonical generators. Cosets are left cosets `gH`; the Schreier graph joins
//! `gH` to `s gH`, and its path metric is the quotient metric
//! `d(xH, yH) = min d_G(xh, yh')`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::groups::{Family, GroupElement, MarkedGroup};
use crate::metric::{self, FiniteMetricSpace};
use crate::perm::{Perm, PermSubgroup};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct SubgroupSpec {
    host: MarkedGroup,
    images: Vec<Perm>,
    subgroup: PermSubgroup,
    label: String,
    grid: Option<Vec<u64>>,
}

fn rotation(m: u64, k: i64) -> Perm {
    let m = m as usize;
    Perm::from_fn(m, |i| (i as i64 + k).rem_euclid(m as i64) as usize).expect("rotation")
}

impl SubgroupSpec {
    /// `H = φ^-1(<subgroup_gens>)` where `φ` sends the `i`-th canonical
    /// generator of the host family to `images[i]`.
    pub fn new(host: MarkedGroup, images: Vec<Perm>, subgroup_gens: &[Perm], label: impl Into<String>) -> Result<Self> {
        if let Some(v) = host.family().relation_violation(&images) {
            return Err(Error::Domain(format!("images do not define a homomorphism: {v}")));
        }
        let degree = images[0].degree();
        if subgroup_gens.iter().any(|p| p.degree() != degree) {
            return Err(Error::Domain("subgroup generators have the wrong degree".into()));
        }
        let subgroup = PermSubgroup::generated(degree, subgroup_gens, host.limits().target_order)?;
        Ok(SubgroupSpec {
            host,
            images,
            subgroup,
            label: label.into(),
            grid: None,
        })
    }

    pub(crate) fn from_parts(host: MarkedGroup, images: Vec<Perm>, subgroup: PermSubgroup, label: String) -> Self {
        SubgroupSpec {
            host,
            images,
            subgroup,
            label,
            grid: None,
        }
    }

    /// `H = G`.
    pub fn whole(host: &MarkedGroup) -> Self {
        let k = host.family().canonical_generators().len();
        let id = Perm::identity(1);
        SubgroupSpec::from_parts(host.clone(), vec![id.clone(); k], PermSubgroup::from_elements(1, vec![id]), "G".into())
    }

    /// `k_1 Z ⊕ .. ⊕ k_n Z` in a free abelian group, or the analogous
    /// subgroup of a finite cyclic product (each `k_i` dividing the order).
    pub fn coordinate_levels(host: &MarkedGroup, levels: &[u64]) -> Result<Self> {
        let n = match host.family() {
            Family::FreeAbelian(n) => *n,
            Family::FiniteCyclicProduct(ks) => {
                if levels.len() == ks.len() && levels.iter().zip(ks).any(|(l, k)| *l == 0 || k % l != 0) {
                    return Err(Error::Domain("levels must divide the cyclic orders".into()));
                }
                ks.len()
            }
            f => return Err(Error::Domain(format!("coordinate levels need an abelian host, not {}", f.name()))),
        };
        if levels.len() != n || levels.contains(&0) {
            return Err(Error::Domain(format!("expected {n} positive levels")));
        }
        let degree: u64 = levels.iter().sum();
        let mut offset = 0usize;
        let mut images = Vec::with_capacity(n);
        for &l in levels {
            let l = l as usize;
            let p = Perm::from_fn(degree as usize, |i| {
                if i >= offset && i < offset + l {
                    offset + (i - offset + 1) % l
                } else {
                    i
                }
            })?;
            images.push(p);
            offset += l;
        }
        let label = levels.iter().map(|l| format!("{l}Z")).collect::<Vec<_>>().join("+");
        let mut spec = SubgroupSpec::new(host.clone(), images, &[], label)?;
        spec.grid = Some(levels.to_vec());
        Ok(spec)
    }

    /// Kernel of `v ↦ Σ c_i v_i mod m` on an abelian host.
    pub fn abelian_character(host: &MarkedGroup, m: u64, coeffs: &[i64]) -> Result<Self> {
        if !matches!(host.family(), Family::FreeAbelian(_) | Family::FiniteCyclicProduct(_)) || m == 0 {
            return Err(Error::Domain("a character needs an abelian host and m > 0".into()));
        }
        let images = coeffs.iter().map(|&c| rotation(m, c)).collect();
        let terms: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
        SubgroupSpec::new(host.clone(), images, &[], format!("ker({}) mod {m}", terms.join(",")))
    }

    /// Kernel of entrywise reduction mod `m` of the Heisenberg group.
    pub fn heisenberg_mod(host: &MarkedGroup, m: u64) -> Result<Self> {
        if *host.family() != Family::Heisenberg3 || m == 0 {
            return Err(Error::Domain("expected the Heisenberg group and m > 0".into()));
        }
        // The matrix (a,b,c) acts on (u,v) by (u + a v + c, v + b).
        let mu = m as usize;
        let x = Perm::from_fn(mu * mu, |i| {
            let (u, v) = (i % mu, i / mu);
            (u + v) % mu + v * mu
        })?;
        let y = Perm::from_fn(mu * mu, |i| {
            let (u, v) = (i % mu, i / mu);
            u + ((v + 1) % mu) * mu
        })?;
        SubgroupSpec::new(host.clone(), vec![x, y], &[], format!("Gamma({m})"))
    }

    /// Kernel of `Z/k ≀ Z -> Z/k ≀ Z/n`.
    pub fn wreath_level(host: &MarkedGroup, n: u64) -> Result<Self> {
        let Family::WreathLamp(k) = host.family() else {
            return Err(Error::Domain("expected a lamplighter host".into()));
        };
        if n == 0 {
            return Err(Error::Domain("wreath level must be positive".into()));
        }
        // (f, m) acts on (i, x) in Z/n x Z/k by (i + m, x + f(i + m)).
        let (n, k) = (n as usize, *k as usize);
        let t = Perm::from_fn(n * k, |p| {
            let (i, x) = (p % n, p / n);
            (i + 1) % n + x * n
        })?;
        let a = Perm::from_fn(n * k, |p| {
            let (i, x) = (p % n, p / n);
            if i == 0 {
                i + ((x + 1) % k) * n
            } else {
                p
            }
        })?;
        SubgroupSpec::new(host.clone(), vec![t, a], &[], format!("W({n})"))
    }

    /// Kernel of `Z^n ⋊_A Z -> (Z/m)^n ⋊ Z/l`; `l` must be a multiple of the
    /// order of `A` mod `m`.
    pub fn semidirect_level(host: &MarkedGroup, m: u64, l: u64) -> Result<Self> {
        let Family::SemidirectZnZ(a) = host.family() else {
            return Err(Error::Domain("expected a semidirect host".into()));
        };
        if m == 0 || l == 0 {
            return Err(Error::Domain("levels must be positive".into()));
        }
        let n = a.dim();
        let mi = m as i64;
        let reduced: Vec<i64> = a.power(l as i64).iter().map(|x| x.rem_euclid(mi)).collect();
        let id: Vec<i64> = (0..n * n).map(|i| i64::from(i % (n + 1) == 0)).map(|x| x % mi).collect();
        if reduced != id {
            return Err(Error::Domain(format!("A^{l} is not the identity mod {m}")));
        }
        let cells = (m as usize).pow(n as u32);
        let degree = cells * l as usize;
        let decode = |p: usize| -> (Vec<i64>, usize) {
            let (mut c, j) = (p % cells, p / cells);
            let mut u = vec![0; n];
            for x in u.iter_mut() {
                *x = (c % m as usize) as i64;
                c /= m as usize;
            }
            (u, j)
        };
        let encode = |u: &[i64], j: usize| -> usize {
            let mut c = 0usize;
            for x in u.iter().rev() {
                c = c * m as usize + x.rem_euclid(mi) as usize;
            }
            c + (j % l as usize) * cells
        };
        // (v, k) acts on (u, j) by (v + A^k u, j + k).
        let mut images = Vec::with_capacity(n + 1);
        for i in 0..n {
            images.push(Perm::from_fn(degree, |p| {
                let (mut u, j) = decode(p);
                u[i] += 1;
                encode(&u, j)
            })?);
        }
        images.push(Perm::from_fn(degree, |p| {
            let (u, j) = decode(p);
            encode(&a.apply_power(1, &u), j + 1)
        })?);
        SubgroupSpec::new(host.clone(), images, &[], format!("Gamma({m},{l})"))
    }

    /// Smallest `l >= 1` with `A^l = I` mod `m`, if below `cap`.
    pub fn matrix_order_mod(host: &MarkedGroup, m: u64, cap: u64) -> Option<u64> {
        let Family::SemidirectZnZ(a) = host.family() else {
            return None;
        };
        let n = a.dim();
        let mi = m as i64;
        let step: Vec<i64> = a.entries().iter().map(|x| x.rem_euclid(mi)).collect();
        let id: Vec<i64> = (0..n * n).map(|i| i64::from(i % (n + 1) == 0) % mi).collect();
        let mut cur = step.clone();
        for l in 1..=cap {
            if cur == id {
                return Some(l);
            }
            let mut next = vec![0; n * n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        next[i * n + j] = (next[i * n + j] + cur[i * n + k] * step[k * n + j]).rem_euclid(mi);
                    }
                }
            }
            cur = next;
        }
        None
    }

    fn dihedral_images(n: u64) -> Vec<Perm> {
        // r^k s^f acts on (i, e) in Z/n x Z/2 by (k + (-1)^f i, e + f).
        let n = n as usize;
        let r = Perm::from_fn(2 * n, |p| (p % n + 1) % n + (p / n) * n).expect("r");
        let s = Perm::from_fn(2 * n, |p| (n - p % n) % n + (1 - p / n) * n).expect("s");
        vec![r, s]
    }

    /// `<r^n>` in the infinite dihedral group.
    pub fn dihedral_rotations(host: &MarkedGroup, n: u64) -> Result<Self> {
        if *host.family() != Family::InfiniteDihedral || n == 0 {
            return Err(Error::Domain("expected the infinite dihedral group and n > 0".into()));
        }
        SubgroupSpec::new(host.clone(), Self::dihedral_images(n), &[], format!("<r^{n}>"))
    }

    /// `<r^n, r^j s>` in the infinite dihedral group.
    pub fn dihedral_with_reflection(host: &MarkedGroup, n: u64, j: i64) -> Result<Self> {
        if *host.family() != Family::InfiniteDihedral || n == 0 {
            return Err(Error::Domain("expected the infinite dihedral group and n > 0".into()));
        }
        let images = Self::dihedral_images(n);
        let gen = images[0].pow(j).compose(&images[1]);
        let label = if j == 0 { format!("<r^{n},s>") } else { format!("<r^{n},r^{j}s>") };
        SubgroupSpec::new(host.clone(), images, &[gen], label)
    }

    /// The standard congruence subgroup of level `m` for the host family.
    pub fn congruence(host: &MarkedGroup, m: u64) -> Result<Self> {
        match host.family() {
            Family::FreeAbelian(n) => Self::coordinate_levels(host, &vec![m; *n]),
            Family::FiniteCyclicProduct(ks) => Self::coordinate_levels(host, &vec![m; ks.len()]),
            Family::Heisenberg3 => Self::heisenberg_mod(host, m),
            Family::InfiniteDihedral => Self::dihedral_rotations(host, m),
            Family::WreathLamp(_) => Self::wreath_level(host, m),
            Family::SemidirectZnZ(_) => {
                let l = Self::matrix_order_mod(host, m, host.limits().target_order as u64)
                    .ok_or_else(|| Error::resource("matrix order search", host.limits().target_order))?;
                Self::semidirect_level(host, m, l)
            }
        }
    }

    pub fn host(&self) -> &MarkedGroup {
        &self.host
    }

    /// Images of the canonical generators.
    pub fn images(&self) -> &[Perm] {
        &self.images
    }

    /// `T_H`, the subgroup of the target whose preimage is `H`.
    pub fn subgroup(&self) -> &PermSubgroup {
        &self.subgroup
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn degree(&self) -> usize {
        self.images[0].degree()
    }

    /// Coordinate levels when `H` was built as `k_1 Z ⊕ .. ⊕ k_n Z`.
    pub fn levels(&self) -> Option<&[u64]> {
        self.grid.as_deref()
    }

    pub fn phi(&self, g: &GroupElement) -> Perm {
        self.host.evaluate(g, &self.images)
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.subgroup.contains(&self.phi(g))
    }

    /// The target group `φ(G)`.
    pub fn target(&self) -> Result<PermSubgroup> {
        PermSubgroup::generated(self.degree(), &self.images, self.host.limits().target_order)
    }

    /// Whether `T_H` is normalized by the image of `G`; then `H` is normal.
    pub fn is_normal(&self) -> bool {
        self.images.iter().all(|x| {
            self.subgroup
                .elements()
                .iter()
                .all(|h| self.subgroup.contains(&h.conjugate_by(x)))
        })
    }

    /// `g H g^-1`.
    pub fn conjugate(&self, g: &GroupElement) -> SubgroupSpec {
        let k = self.phi(g);
        let mut out = SubgroupSpec::from_parts(
            self.host.clone(),
            self.images.clone(),
            self.subgroup.conjugate(&k),
            format!("{g}.{}.{g}^-1", self.label),
        );
        out.grid = self.grid.clone();
        out
    }

    /// Two specs sharing the same homomorphism describe the same subgroup iff
    /// their target subgroups coincide; this is the coalescing key.
    pub fn key(&self) -> (Vec<Perm>, Vec<Perm>) {
        (self.images.clone(), self.subgroup.key())
    }
}

/// Coordinates of a quotient of `Z^n` by `k_1 Z ⊕ .. ⊕ k_n Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridStructure {
    pub levels: Vec<u64>,
    /// Coordinates of every coset, each in `0..levels[i]`.
    pub coords: Vec<Vec<u64>>,
}

/// The coset space `G/H` with its Schreier graph and exact quotient metric.
#[derive(Debug, Clone)]
pub struct FiniteQuotient {
    spec: SubgroupSpec,
    keys: Vec<Perm>,
    lookup: HashMap<Perm, usize>,
    reps: Vec<GroupElement>,
    step_images: Vec<Perm>,
    edges: Vec<Vec<usize>>,
    space: FiniteMetricSpace,
}

/// Builds `G/H`. Coset 0 is `H`; every coset is represented by a shortest
/// element, found by Dijkstra over the Schreier graph.
pub fn build_quotient(spec: &SubgroupSpec) -> Result<FiniteQuotient> {
    FiniteQuotient::build(spec)
}

impl FiniteQuotient {
    pub fn build(spec: &SubgroupSpec) -> Result<Self> {
        let host = spec.host();
        let cap = host.limits().quotient_index;
        let steps = host.steps();
        let step_images: Vec<Perm> = steps.iter().map(|s| spec.phi(&s.element)).collect();
        let base = spec.subgroup.coset_key(&Perm::identity(spec.degree()));
        let mut keys = vec![base.clone()];
        let mut lookup = HashMap::from([(base, 0usize)]);
        let mut dist = vec![0u64];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let mut heap = BinaryHeap::from([Reverse((0u64, 0usize))]);
        let mut order = Vec::new();
        let mut done = vec![false];
        while let Some(Reverse((d, c))) = heap.pop() {
            if done[c] || d > dist[c] {
                continue;
            }
            done[c] = true;
            order.push(c);
            for (k, img) in step_images.iter().enumerate() {
                let key = spec.subgroup.coset_key(&img.compose(&keys[c]));
                let nd = d + steps[k].ticks;
                let target = match lookup.get(&key) {
                    Some(&t) => t,
                    None => {
                        if keys.len() >= cap {
                            return Err(Error::Resource {
                                what: "quotient index".into(),
                                cap,
                                attained: None,
                            });
                        }
                        keys.push(key.clone());
                        lookup.insert(key, keys.len() - 1);
                        dist.push(u64::MAX);
                        parent.push(None);
                        done.push(false);
                        keys.len() - 1
                    }
                };
                if nd < dist[target] {
                    dist[target] = nd;
                    parent[target] = Some((c, k));
                    heap.push(Reverse((nd, target)));
                }
            }
        }
        // Renumber cosets in settling order so indices follow distance from H.
        let mut new_index = vec![0usize; keys.len()];
        for (i, &c) in order.iter().enumerate() {
            new_index[c] = i;
        }
        let n = keys.len();
        let mut reps: Vec<Option<GroupElement>> = vec![None; n];
        for &c in &order {
            let rep = match parent[c] {
                None => host.identity(),
                Some((p, k)) => host.mul(&steps[k].element, reps[new_index[p]].as_ref().expect("settled first")),
            };
            reps[new_index[c]] = Some(rep);
        }
        let reps: Vec<GroupElement> = reps.into_iter().map(|r| r.expect("all settled")).collect();
        let mut new_keys = vec![Perm::identity(1); n];
        for (c, key) in keys.into_iter().enumerate() {
            new_keys[new_index[c]] = key;
        }
        let lookup = new_keys.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect::<HashMap<_, _>>();
        let edges: Vec<Vec<usize>> = new_keys
            .iter()
            .map(|key| {
                step_images
                    .iter()
                    .map(|img| lookup[&spec.subgroup.coset_key(&img.compose(key))])
                    .collect()
            })
            .collect();
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (c, row) in edges.iter().enumerate() {
            for (k, &t) in row.iter().enumerate() {
                if t != c {
                    adj[c].push((t, steps[k].ticks));
                }
            }
        }
        let ticks = metric::all_pairs(&adj)
            .ok_or_else(|| Error::Integrity("Schreier graph is disconnected".into()))?;
        let names = reps.iter().map(|g| g.to_string()).collect();
        let label = format!("{}/{}", host.family().name(), spec.label());
        let space = FiniteMetricSpace::from_ticks_unchecked(label, names, ticks, host.unit());
        Ok(FiniteQuotient {
            spec: spec.clone(),
            keys: new_keys,
            lookup,
            reps,
            step_images,
            edges,
            space,
        })
    }

    pub fn spec(&self) -> &SubgroupSpec {
        &self.spec
    }

    pub fn host(&self) -> &MarkedGroup {
        self.spec.host()
    }

    pub fn index(&self) -> usize {
        self.keys.len()
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn label(&self) -> &str {
        self.space.label()
    }

    /// Shortest representative of each coset.
    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    /// Canonical target element of coset `c`.
    pub fn key(&self, c: usize) -> &Perm {
        &self.keys[c]
    }

    /// `edges()[c][k]` is the coset reached from `c` by step `k` of the host.
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn step_images(&self) -> &[Perm] {
        &self.step_images
    }

    /// The coset containing a target element.
    pub fn coset_of_target(&self, p: &Perm) -> Option<usize> {
        self.lookup.get(&self.spec.subgroup.coset_key(p)).copied()
    }

    /// `π_H(g) = gH`.
    pub fn project(&self, g: &GroupElement) -> usize {
        self.coset_of_target(&self.spec.phi(g)).expect("φ(G) acts transitively on the enumerated cosets")
    }

    /// `g · c` for the left action of `G` on cosets.
    pub fn act(&self, g: &GroupElement, c: usize) -> usize {
        self.act_target(&self.spec.phi(g), c)
    }

    pub fn act_target(&self, p: &Perm, c: usize) -> usize {
        self.coset_of_target(&p.compose(&self.keys[c])).expect("cosets are closed under the action")
    }

    pub fn distance(&self, x: usize, y: usize) -> Scalar {
        self.space.dist(x, y)
    }

    /// Recognizes quotients of standard `Z^n` by coordinate levels.
    pub fn grid_structure(&self) -> Option<GridStructure> {
        let levels = self.spec.levels()?;
        if !matches!(self.host().family(), Family::FreeAbelian(_)) || !self.host().is_standard() {
            return None;
        }
        let coords = self
            .reps
            .iter()
            .map(|g| match g {
                GroupElement::Abelian(v) => v
                    .iter()
                    .zip(levels)
                    .map(|(&x, &l)| x.rem_euclid(l as i64) as u64)
                    .collect(),
                _ => unreachable!("free abelian host"),
            })
            .collect();
        Some(GridStructure {
            levels: levels.to_vec(),
            coords,
        })
    }
}

/// `d_{G/H}(x, y)`.
pub fn quotient_distance(q: &FiniteQuotient, x: usize, y: usize) -> Scalar {
    q.distance(x, y)
}
