//! Concrete finitely generated groups: normal forms, products and weighted
//! word metrics.
//!
//! The word metric is right-invariant: `d(g, h) = |g h^-1|`, and the Cayley
//! graph joins `x` to `s x` for every generator `s`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::metric::FiniteMetricSpace;
use crate::perm::{GroupLike, Perm};
use crate::scalar::{self, Scalar};

/// Square integer matrix with integer inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
    inverse: Vec<i64>,
}

impl IntMatrix {
    /// Row-major entries. Fails unless the determinant is `±1`.
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::Domain(format!("expected {} matrix entries", n * n)));
        }
        let inverse = integer_inverse(n, &entries)
            .ok_or_else(|| Error::Domain("matrix must have determinant ±1".into()))?;
        Ok(IntMatrix { n, entries, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        IntMatrix {
            n,
            entries: e.clone(),
            inverse: e,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    fn mul_raw(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
        out
    }

    /// `A^e` for any integer `e`, as raw row-major entries.
    pub fn power(&self, e: i64) -> Vec<i64> {
        let n = self.n;
        let mut base = if e < 0 { self.inverse.clone() } else { self.entries.clone() };
        let mut acc = IntMatrix::identity(n).entries;
        let mut e = e.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = Self::mul_raw(n, &acc, &base);
            }
            base = Self::mul_raw(n, &base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn apply_power(&self, e: i64, v: &[i64]) -> Vec<i64> {
        if e == 0 {
            return v.to_vec();
        }
        let m = self.power(e);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| m[i * self.n + j] * v[j]).sum())
            .collect()
    }
}

fn integer_inverse(n: usize, entries: &[i64]) -> Option<Vec<i64>> {
    type Q = Ratio<i128>;
    let mut a: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        Q::from_integer(entries[i * n + j] as i128)
                    } else if j - n == i {
                        Q::one()
                    } else {
                        Q::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut det = Q::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for x in a[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in 0..2 * n {
                    let v = a[col][c] * f;
                    a[r][c] -= v;
                }
            }
        }
    }
    if det.abs() != Q::one() {
        return None;
    }
    let mut inv = Vec::with_capacity(n * n);
    for row in &a {
        for x in &row[n..] {
            if !x.is_integer() {
                return None;
            }
            inv.push(x.to_integer() as i64);
        }
    }
    Some(inv)
}

/// The supported group families.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `Z^n`.
    FreeAbelian(usize),
    /// `Z/k_1 x .. x Z/k_m`.
    FiniteCyclicProduct(Vec<u64>),
    /// Integer upper unitriangular 3x3 matrices.
    Heisenberg3,
    /// `Z ⋊ Z/2`, generated by a rotation `r` and a reflection `s`.
    InfiniteDihedral,
    /// `Z/k ≀ Z`, generated by the shift `t` and the lamp `a` at the origin.
    WreathLamp(u64),
    /// `Z^n ⋊_A Z` with `t e_i t^-1 = A e_i`.
    SemidirectZnZ(IntMatrix),
}

/// Canonical normal forms; equal elements have identical normal forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Coordinate vector for free abelian groups and finite cyclic products
    /// (the latter reduced into `0..k_i`).
    Abelian(Vec<i64>),
    /// `(a, b, c)` is the matrix `[[1, a, c], [0, 1, b], [0, 0, 1]]`.
    Heisenberg([i64; 3]),
    /// `r^rot s^flip`.
    Dihedral { rot: i64, flip: bool },
    /// Lamp configuration (nonzero values only) and head position; the
    /// element is `prod_i t^i a^lamps(i) t^-i * t^shift`.
    Lamp { lamps: BTreeMap<i64, u64>, shift: i64 },
    /// `(v, m)` with product `(v, m)(w, k) = (v + A^m w, m + k)`.
    Semidirect { v: Vec<i64>, shift: i64 },
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            GroupElement::Abelian(v) => write!(f, "({})", join(v)),
            GroupElement::Heisenberg(v) => write!(f, "({})", join(v)),
            GroupElement::Dihedral { rot, flip } => write!(f, "r^{rot}{}", if *flip { "s" } else { "" }),
            GroupElement::Lamp { lamps, shift } => {
                let l: Vec<String> = lamps.iter().map(|(i, v)| format!("{i}:{v}")).collect();
                write!(f, "[{}]@{shift}", l.join(","))
            }
            GroupElement::Semidirect { v, shift } => write!(f, "({})@{shift}", join(v)),
        }
    }
}

fn modp(x: i64, k: u64) -> i64 {
    x.rem_euclid(k as i64)
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::FreeAbelian(_) => "free-abelian",
            Family::FiniteCyclicProduct(_) => "cyclic",
            Family::Heisenberg3 => "heisenberg",
            Family::InfiniteDihedral => "dihedral",
            Family::WreathLamp(_) => "lamplighter",
            Family::SemidirectZnZ(_) => "semidirect",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Family::FreeAbelian(n) if *n == 0 => Err(Error::Domain("Z^0 is not supported".into())),
            Family::FiniteCyclicProduct(ks) if ks.is_empty() || ks.contains(&0) => {
                Err(Error::Domain("cyclic orders must be positive".into()))
            }
            Family::WreathLamp(k) if *k < 2 => Err(Error::Domain("lamp group order must be at least 2".into())),
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Family::FreeAbelian(n) => GroupElement::Abelian(vec![0; *n]),
            Family::FiniteCyclicProduct(ks) => GroupElement::Abelian(vec![0; ks.len()]),
            Family::Heisenberg3 => GroupElement::Heisenberg([0; 3]),
            Family::InfiniteDihedral => GroupElement::Dihedral { rot: 0, flip: false },
            Family::WreathLamp(_) => GroupElement::Lamp {
                lamps: BTreeMap::new(),
                shift: 0,
            },
            Family::SemidirectZnZ(a) => GroupElement::Semidirect {
                v: vec![0; a.dim()],
                shift: 0,
            },
        }
    }

    /// Canonical generators with their labels.
    pub fn canonical_generators(&self) -> Vec<(GroupElement, String)> {
        let unit = |n: usize, i: usize| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        };
        match self {
            Family::FreeAbelian(n) => (0..*n)
                .map(|i| (GroupElement::Abelian(unit(*n, i)), format!("e{}", i + 1)))
                .collect(),
            Family::FiniteCyclicProduct(ks) => (0..ks.len())
                .map(|i| {
                    let g = self.normalize(GroupElement::Abelian(unit(ks.len(), i)));
                    (g, format!("e{}", i + 1))
                })
                .collect(),
            Family::Heisenberg3 => vec![
                (GroupElement::Heisenberg([1, 0, 0]), "x".into()),
                (GroupElement::Heisenberg([0, 1, 0]), "y".into()),
            ],
            Family::InfiniteDihedral => vec![
                (GroupElement::Dihedral { rot: 1, flip: false }, "r".into()),
                (GroupElement::Dihedral { rot: 0, flip: true }, "s".into()),
            ],
            Family::WreathLamp(_) => vec![
                (
                    GroupElement::Lamp {
                        lamps: BTreeMap::new(),
                        shift: 1,
                    },
                    "t".into(),
                ),
                (
                    GroupElement::Lamp {
                        lamps: BTreeMap::from([(0, 1)]),
                        shift: 0,
                    },
                    "a".into(),
                ),
            ],
            Family::SemidirectZnZ(a) => {
                let n = a.dim();
                let mut gens: Vec<_> = (0..n)
                    .map(|i| {
                        (
                            GroupElement::Semidirect { v: unit(n, i), shift: 0 },
                            format!("e{}", i + 1),
                        )
                    })
                    .collect();
                gens.push((GroupElement::Semidirect { v: vec![0; n], shift: 1 }, "t".into()));
                gens
            }
        }
    }

    fn normalize(&self, g: GroupElement) -> GroupElement {
        match (self, g) {
            (Family::FiniteCyclicProduct(ks), GroupElement::Abelian(v)) => {
                GroupElement::Abelian(v.iter().zip(ks).map(|(&x, &k)| modp(x, k)).collect())
            }
            (Family::WreathLamp(k), GroupElement::Lamp { lamps, shift }) => GroupElement::Lamp {
                lamps: lamps
                    .into_iter()
                    .map(|(i, v)| (i, v % k))
                    .filter(|&(_, v)| v != 0)
                    .collect(),
                shift,
            },
            (_, g) => g,
        }
    }

    /// Whether `g` is a well-formed normal form of this family.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (Family::FreeAbelian(n), GroupElement::Abelian(v)) => v.len() == *n,
            (Family::FiniteCyclicProduct(ks), GroupElement::Abelian(v)) => {
                v.len() == ks.len() && v.iter().zip(ks).all(|(&x, &k)| x >= 0 && (x as u64) < k)
            }
            (Family::Heisenberg3, GroupElement::Heisenberg(_)) => true,
            (Family::InfiniteDihedral, GroupElement::Dihedral { .. }) => true,
            (Family::WreathLamp(k), GroupElement::Lamp { lamps, .. }) => lamps.values().all(|&v| v != 0 && v < *k),
            (Family::SemidirectZnZ(a), GroupElement::Semidirect { v, .. }) => v.len() == a.dim(),
            _ => false,
        }
    }

    /// Brings a possibly unreduced element (e.g. parsed text) into normal form.
    pub fn reduce(&self, g: GroupElement) -> Result<GroupElement> {
        let g = self.normalize(g);
        if self.contains(&g) {
            Ok(g)
        } else {
            Err(Error::Domain(format!("{g} is not an element of {}", self.name())))
        }
    }

    /// Product of two well-formed elements of this family.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        use GroupElement::*;
        match (self, g, h) {
            (Family::FreeAbelian(_), Abelian(a), Abelian(b)) => Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            (Family::FiniteCyclicProduct(ks), Abelian(a), Abelian(b)) => Abelian(
                a.iter()
                    .zip(b)
                    .zip(ks)
                    .map(|((x, y), &k)| modp(x + y, k))
                    .collect(),
            ),
            (Family::Heisenberg3, Heisenberg([a, b, c]), Heisenberg([a2, b2, c2])) => {
                Heisenberg([a + a2, b + b2, c + c2 + a * b2])
            }
            (Family::InfiniteDihedral, Dihedral { rot: k, flip: f }, Dihedral { rot: k2, flip: f2 }) => Dihedral {
                rot: if *f { k - k2 } else { k + k2 },
                flip: f ^ f2,
            },
            (Family::WreathLamp(k), Lamp { lamps: l1, shift: m1 }, Lamp { lamps: l2, shift: m2 }) => {
                let mut lamps = l1.clone();
                for (&i, &v) in l2 {
                    let slot = lamps.entry(i + m1).or_insert(0);
                    *slot = (*slot + v) % k;
                }
                lamps.retain(|_, v| *v != 0);
                Lamp { lamps, shift: m1 + m2 }
            }
            (Family::SemidirectZnZ(a), Semidirect { v: v1, shift: m1 }, Semidirect { v: v2, shift: m2 }) => {
                let w = a.apply_power(*m1, v2);
                Semidirect {
                    v: v1.iter().zip(&w).map(|(x, y)| x + y).collect(),
                    shift: m1 + m2,
                }
            }
            _ => panic!("mul called with elements outside {}", self.name()),
        }
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        use GroupElement::*;
        match (self, g) {
            (Family::FreeAbelian(_), Abelian(a)) => Abelian(a.iter().map(|x| -x).collect()),
            (Family::FiniteCyclicProduct(ks), Abelian(a)) => {
                Abelian(a.iter().zip(ks).map(|(&x, &k)| modp(-x, k)).collect())
            }
            (Family::Heisenberg3, Heisenberg([a, b, c])) => Heisenberg([-a, -b, -c + a * b]),
            (Family::InfiniteDihedral, Dihedral { rot, flip }) => Dihedral {
                rot: if *flip { *rot } else { -rot },
                flip: *flip,
            },
            (Family::WreathLamp(k), Lamp { lamps, shift }) => Lamp {
                lamps: lamps.iter().map(|(&i, &v)| (i - shift, (k - v) % k)).collect(),
                shift: -shift,
            },
            (Family::SemidirectZnZ(a), Semidirect { v, shift }) => {
                let w = a.apply_power(-shift, v);
                Semidirect {
                    v: w.iter().map(|x| -x).collect(),
                    shift: -shift,
                }
            }
            _ => panic!("inv called with an element outside {}", self.name()),
        }
    }

    /// Evaluates the homomorphism determined by `images` of the canonical
    /// generators at `g`. The images are assumed to satisfy the defining
    /// relations (see [`Family::relation_violation`]).
    pub fn evaluate<T: GroupLike>(&self, g: &GroupElement, images: &[T]) -> T {
        use GroupElement::*;
        let id = images[0].identity_like();
        match (self, g) {
            (Family::FreeAbelian(_) | Family::FiniteCyclicProduct(_), Abelian(v)) => v
                .iter()
                .zip(images)
                .fold(id, |acc, (&e, img)| acc.mul(&img.pow(e))),
            (Family::Heisenberg3, Heisenberg([a, b, c])) => {
                let (x, y) = (&images[0], &images[1]);
                let z = x.mul(y).mul(&x.inv()).mul(&y.inv());
                x.pow(*a).mul(&y.pow(*b)).mul(&z.pow(c - a * b))
            }
            (Family::InfiniteDihedral, Dihedral { rot, flip }) => {
                let r = images[0].pow(*rot);
                if *flip {
                    r.mul(&images[1])
                } else {
                    r
                }
            }
            (Family::WreathLamp(_), Lamp { lamps, shift }) => {
                let (t, a) = (&images[0], &images[1]);
                let mut acc = id;
                for (&i, &v) in lamps {
                    acc = acc.mul(&t.pow(i)).mul(&a.pow(v as i64)).mul(&t.pow(-i));
                }
                acc.mul(&t.pow(*shift))
            }
            (Family::SemidirectZnZ(_), Semidirect { v, shift }) => {
                let n = v.len();
                let acc = v
                    .iter()
                    .zip(&images[..n])
                    .fold(id, |acc, (&e, img)| acc.mul(&img.pow(e)));
                acc.mul(&images[n].pow(*shift))
            }
            _ => panic!("evaluate called with an element outside {}", self.name()),
        }
    }

    /// Checks the defining relations of the family on permutation images of
    /// the canonical generators. Returns a description of the first violated
    /// relation.
    pub fn relation_violation(&self, images: &[Perm]) -> Option<String> {
        let k = self.canonical_generators().len();
        if images.len() != k {
            return Some(format!("expected {k} generator images, got {}", images.len()));
        }
        let deg = images[0].degree();
        if images.iter().any(|p| p.degree() != deg) {
            return Some("generator images have different degrees".into());
        }
        let commute = |a: &Perm, b: &Perm| a.compose(b) == b.compose(a);
        let all_commute = |imgs: &[Perm]| {
            for i in 0..imgs.len() {
                for j in i + 1..imgs.len() {
                    if !commute(&imgs[i], &imgs[j]) {
                        return Some(format!("generators {} and {} do not commute", i + 1, j + 1));
                    }
                }
            }
            None
        };
        match self {
            Family::FreeAbelian(_) => all_commute(images),
            Family::FiniteCyclicProduct(ks) => {
                for (i, (img, &order)) in images.iter().zip(ks).enumerate() {
                    if !img.pow(order as i64).is_identity() {
                        return Some(format!("generator {} does not have order dividing {order}", i + 1));
                    }
                }
                all_commute(images)
            }
            Family::Heisenberg3 => {
                let (x, y) = (&images[0], &images[1]);
                let z = x.compose(y).compose(&x.inverse()).compose(&y.inverse());
                if !commute(&z, x) || !commute(&z, y) {
                    return Some("[x,y] is not central".into());
                }
                None
            }
            Family::InfiniteDihedral => {
                let (r, s) = (&images[0], &images[1]);
                if !s.pow(2).is_identity() {
                    return Some("s^2 != 1".into());
                }
                if s.compose(r).compose(s) != r.inverse() {
                    return Some("s r s != r^-1".into());
                }
                None
            }
            Family::WreathLamp(order) => {
                let (t, a) = (&images[0], &images[1]);
                if !a.pow(*order as i64).is_identity() {
                    return Some(format!("a^{order} != 1"));
                }
                let mut tj = Perm::identity(deg);
                loop {
                    let conj = tj.compose(a).compose(&tj.inverse());
                    if !commute(a, &conj) {
                        return Some("lamps at different positions do not commute".into());
                    }
                    tj = tj.compose(t);
                    if tj.is_identity() {
                        return None;
                    }
                }
            }
            Family::SemidirectZnZ(m) => {
                let n = m.dim();
                if let Some(v) = all_commute(&images[..n]) {
                    return Some(v);
                }
                let t = &images[n];
                for i in 0..n {
                    let lhs = t.compose(&images[i]).compose(&t.inverse());
                    let rhs = (0..n).fold(Perm::identity(deg), |acc, j| acc.compose(&images[j].pow(m.entry(j, i))));
                    if lhs != rhs {
                        return Some(format!("t e{} t^-1 != A e{}", i + 1, i + 1));
                    }
                }
                None
            }
        }
    }

    /// Width of the lamp support window, for lamplighter elements.
    fn lamp_width(g: &GroupElement) -> i64 {
        match g {
            GroupElement::Lamp { lamps, .. } => match (lamps.keys().next(), lamps.keys().next_back()) {
                (Some(lo), Some(hi)) => hi - lo + 1,
                _ => 0,
            },
            _ => 0,
        }
    }
}

/// An element together with its family, so that homomorphisms into a
/// supported group can be evaluated with [`Family::evaluate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InGroup<'a> {
    pub family: &'a Family,
    pub element: GroupElement,
}

impl GroupLike for InGroup<'_> {
    fn identity_like(&self) -> Self {
        InGroup {
            family: self.family,
            element: self.family.identity(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        InGroup {
            family: self.family,
            element: self.family.mul(&self.element, &other.element),
        }
    }

    fn inv(&self) -> Self {
        InGroup {
            family: self.family,
            element: self.family.inv(&self.element),
        }
    }
}

/// One step of the symmetrized generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub element: GroupElement,
    pub weight: Scalar,
    /// Weight in units of `1 / MarkedGroup::unit()`.
    pub ticks: u64,
    pub label: String,
}

/// A group from one of the supported families with a finite weighted
/// generating set. The set is closed under inverses internally.
#[derive(Clone, Debug)]
pub struct MarkedGroup {
    family: Family,
    generators: Vec<GroupElement>,
    labels: Vec<String>,
    weights: Vec<Scalar>,
    steps: Vec<Step>,
    unit: i64,
    limits: Limits,
}

impl PartialEq for MarkedGroup {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.generators == other.generators && self.weights == other.weights
    }
}

impl MarkedGroup {
    /// The family with its canonical generators, all of weight 1.
    pub fn standard(family: Family) -> Result<Self> {
        family.validate()?;
        let gens = family.canonical_generators();
        let (elems, labels): (Vec<_>, Vec<_>) = gens.into_iter().unzip();
        let weights = vec![scalar::int(1); elems.len()];
        Self::build(family, elems, labels, weights, Limits::default())
    }

    /// An explicit marking. The generating property is checked by searching
    /// for every canonical generator in a word ball of the proposed marking.
    pub fn with_generators(
        family: Family,
        generators: Vec<GroupElement>,
        labels: Vec<String>,
        weights: Vec<Scalar>,
        limits: Limits,
    ) -> Result<Self> {
        family.validate()?;
        if generators.is_empty() || generators.len() != weights.len() || generators.len() != labels.len() {
            return Err(Error::Domain("generators, labels and weights must have equal nonzero length".into()));
        }
        let mut reduced = Vec::with_capacity(generators.len());
        for g in generators {
            reduced.push(family.reduce(g)?);
        }
        let g = Self::build(family, reduced, labels, weights, limits)?;
        for (c, label) in g.family.canonical_generators() {
            g.word_length(&c).map_err(|e| match e {
                Error::Resource { .. } => Error::Domain(format!(
                    "could not confirm that the generators reach {label}; they may not generate"
                )),
                other => other,
            })?;
        }
        Ok(g)
    }

    fn build(
        family: Family,
        generators: Vec<GroupElement>,
        labels: Vec<String>,
        weights: Vec<Scalar>,
        limits: Limits,
    ) -> Result<Self> {
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::Domain("generator weights must be strictly positive".into()));
        }
        let unit = scalar::common_unit(&weights);
        let id = family.identity();
        let mut steps: Vec<Step> = Vec::new();
        let mut push = |element: GroupElement, weight: Scalar, label: String| {
            if element == id {
                return;
            }
            match steps.iter_mut().find(|s| s.element == element) {
                Some(s) if s.weight <= weight => {}
                Some(s) => {
                    s.weight = weight;
                    s.label = label;
                }
                None => steps.push(Step {
                    element,
                    weight,
                    ticks: 0,
                    label,
                }),
            }
        };
        for ((g, w), l) in generators.iter().zip(&weights).zip(&labels) {
            push(g.clone(), *w, l.clone());
            push(family.inv(g), *w, format!("{l}^-1"));
        }
        for s in &mut steps {
            s.ticks = scalar::floor_ticks(&s.weight, unit).expect("positive");
        }
        Ok(MarkedGroup {
            family,
            generators,
            labels,
            weights,
            steps,
            unit,
            limits,
        })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    /// The symmetric generating set used for word lengths.
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn unit(&self) -> i64 {
        self.unit
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn identity(&self) -> GroupElement {
        self.family.identity()
    }

    /// True when every generator is canonical and has weight 1.
    pub fn is_standard(&self) -> bool {
        let canon: Vec<_> = self.family.canonical_generators().into_iter().map(|g| g.0).collect();
        canon == self.generators && self.weights.iter().all(|w| *w == scalar::int(1))
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if !self.family.contains(g) {
            return Err(Error::Domain(format!("{g} is not a normal form of {}", self.family.name())));
        }
        Ok(())
    }

    fn check_window(&self, g: &GroupElement) -> Result<()> {
        let w = Family::lamp_width(g);
        if w > self.limits.lamp_window {
            return Err(Error::Resource {
                what: "lamp support window".into(),
                cap: self.limits.lamp_window as usize,
                attained: Some(w.to_string()),
            });
        }
        Ok(())
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        let p = self.family.mul(g, h);
        self.check_window(&p)?;
        Ok(p)
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(self.family.inv(g))
    }

    /// `g h^-1`, the element whose length is `d(g, h)`.
    pub fn quotient(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.multiply(g, &self.inverse(h)?)
    }

    pub(crate) fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.family.mul(g, h)
    }

    pub(crate) fn inv(&self, g: &GroupElement) -> GroupElement {
        self.family.inv(g)
    }

    pub fn to_scalar(&self, ticks: u64) -> Scalar {
        scalar::from_ticks(ticks, self.unit)
    }

    pub fn threshold(&self, r: &Scalar) -> Result<u64> {
        scalar::floor_ticks(r, self.unit).ok_or_else(|| Error::Parameter("radius must be nonnegative".into()))
    }

    /// Word length in ticks.
    pub fn word_length_ticks(&self, g: &GroupElement) -> Result<u64> {
        self.check(g)?;
        let id = self.identity();
        if *g == id {
            return Ok(0);
        }
        let mut dist: HashMap<GroupElement, u64> = HashMap::from([(id.clone(), 0)]);
        let mut heap = BinaryHeap::from([Reverse((0u64, id))]);
        let mut reached: u64;
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist.get(&x).is_some_and(|&best| best < d) {
                continue;
            }
            reached = d;
            if x == *g {
                return Ok(d);
            }
            for s in &self.steps {
                let y = self.family.mul(&s.element, &x);
                self.check_window(&y)?;
                let nd = d + s.ticks;
                if dist.get(&y).is_none_or(|&best| nd < best) {
                    if dist.len() >= self.limits.ball_elements {
                        return Err(Error::Resource {
                            what: "word-length search".into(),
                            cap: self.limits.ball_elements,
                            attained: Some(scalar::fmt_scalar(&self.to_scalar(reached))),
                        });
                    }
                    dist.insert(y.clone(), nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        Err(Error::Integrity(format!("{g} unreachable from the identity")))
    }

    pub fn word_length(&self, g: &GroupElement) -> Result<Scalar> {
        Ok(self.to_scalar(self.word_length_ticks(g)?))
    }

    /// `d_G(g, h) = |g h^-1|`.
    pub fn word_distance(&self, g: &GroupElement, h: &GroupElement) -> Result<Scalar> {
        self.word_length(&self.quotient(g, h)?)
    }

    /// All elements of length at most `radius` ticks with their lengths,
    /// ordered by (length, normal form).
    pub fn ball_lengths(&self, radius: u64) -> Result<Vec<(GroupElement, u64)>> {
        let id = self.identity();
        let mut dist: HashMap<GroupElement, u64> = HashMap::from([(id.clone(), 0)]);
        let mut heap = BinaryHeap::from([Reverse((0u64, id))]);
        let mut settled = Vec::new();
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist.get(&x).is_some_and(|&best| best < d) {
                continue;
            }
            settled.push((x.clone(), d));
            for s in &self.steps {
                let nd = d + s.ticks;
                if nd > radius {
                    continue;
                }
                let y = self.family.mul(&s.element, &x);
                self.check_window(&y)?;
                if dist.get(&y).is_none_or(|&best| nd < best) {
                    if dist.len() >= self.limits.ball_elements {
                        return Err(Error::Resource {
                            what: "word ball".into(),
                            cap: self.limits.ball_elements,
                            attained: Some(scalar::fmt_scalar(&self.to_scalar(d))),
                        });
                    }
                    dist.insert(y.clone(), nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        settled.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(settled)
    }

    /// The closed ball `B_R(center)` with exact pairwise word distances.
    /// Distances between points of the ball are at most `2R`, so they are
    /// read off a ball of radius `2R` around the identity.
    pub fn word_ball(&self, center: &GroupElement, r: &Scalar) -> Result<Ball> {
        self.check(center)?;
        let rt = self.threshold(r)?;
        let big = self.ball_lengths(2 * rt)?;
        let lengths: HashMap<&GroupElement, u64> = big.iter().map(|(g, d)| (g, *d)).collect();
        let offsets: Vec<&GroupElement> = big.iter().take_while(|(_, d)| *d <= rt).map(|(g, _)| g).collect();
        let n = offsets.len();
        let mut ticks = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = self.family.mul(offsets[i], &self.family.inv(offsets[j]));
                ticks[i * n + j] = *lengths
                    .get(&q)
                    .ok_or_else(|| Error::Integrity("ball distance exceeds twice the radius".into()))?;
            }
        }
        let elements: Vec<GroupElement> = offsets.iter().map(|x| self.family.mul(x, center)).collect();
        let names = elements.iter().map(|g| g.to_string()).collect();
        let label = format!("B_{}({center}) in {}", scalar::fmt_scalar(r), self.family.name());
        Ok(Ball {
            center: center.clone(),
            radius: *r,
            offsets: offsets.into_iter().cloned().collect(),
            elements,
            space: FiniteMetricSpace::from_ticks_unchecked(label, names, ticks, self.unit),
        })
    }

    /// Image of `g` under the homomorphism given by images of the canonical generators.
    pub fn evaluate<T: GroupLike>(&self, g: &GroupElement, images: &[T]) -> T {
        self.family.evaluate(g, images)
    }
}

/// A word ball `B_R(center)`; point `i` is `offsets[i] * center`.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: GroupElement,
    pub radius: Scalar,
    pub offsets: Vec<GroupElement>,
    pub elements: Vec<GroupElement>,
    pub space: FiniteMetricSpace,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|x| x == g)
    }
}

/// Parses an element in the display format of its family.
pub fn parse_element(family: &Family, text: &str) -> Result<GroupElement> {
    let text = text.trim();
    let bad = || Error::Parse(format!("cannot parse {text:?} as an element of {}", family.name()));
    let ints = |s: &str| -> Result<Vec<i64>> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect()
    };
    let g = match family {
        Family::FreeAbelian(_) | Family::FiniteCyclicProduct(_) => GroupElement::Abelian(ints(text)?),
        Family::Heisenberg3 => {
            let v = ints(text)?;
            GroupElement::Heisenberg(v.try_into().map_err(|_| bad())?)
        }
        Family::InfiniteDihedral => {
            let body = text.strip_prefix("r^").ok_or_else(bad)?;
            let (num, flip) = match body.strip_suffix('s') {
                Some(b) => (b, true),
                None => (body, false),
            };
            GroupElement::Dihedral {
                rot: num.trim().parse().map_err(|_| bad())?,
                flip,
            }
        }
        Family::WreathLamp(_) => {
            let (lamps, shift) = text.split_once('@').ok_or_else(bad)?;
            let inner = lamps.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(bad)?;
            let mut map = BTreeMap::new();
            for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (i, v) = item.split_once(':').ok_or_else(bad)?;
                let i: i64 = i.trim().parse().map_err(|_| bad())?;
                let v: i64 = v.trim().parse().map_err(|_| bad())?;
                if let Family::WreathLamp(k) = family {
                    let v = modp(v, *k) as u64;
                    if v != 0 {
                        map.insert(i, v);
                    }
                }
            }
            GroupElement::Lamp {
                lamps: map,
                shift: shift.trim().parse().map_err(|_| bad())?,
            }
        }
        Family::SemidirectZnZ(_) => {
            let (v, shift) = text.split_once('@').ok_or_else(bad)?;
            GroupElement::Semidirect {
                v: ints(v)?,
                shift: shift.trim().parse().map_err(|_| bad())?,
            }
        }
    };
    family.reduce(g)
}

/// Evaluates a word such as `x y^-1 x^2` over the canonical generator labels.
pub fn parse_word(family: &Family, text: &str) -> Result<GroupElement> {
    let gens = family.canonical_generators();
    let mut acc = family.identity();
    for token in text.split_whitespace() {
        let (name, exp) = match token.split_once('^') {
            Some((n, e)) => (n, e.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?),
            None => (token, 1),
        };
        let (g, _) = gens
            .iter()
            .find(|(_, l)| l == name)
            .ok_or_else(|| Error::Parse(format!("unknown generator {name:?} for {}", family.name())))?;
        let base = if exp < 0 { family.inv(g) } else { g.clone() };
        for _ in 0..exp.unsigned_abs() {
            acc = family.mul(&acc, &base);
        }
    }
    Ok(acc)
}
