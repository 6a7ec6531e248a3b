//! Permutations of `{0, .., n-1}` and the finite groups they generate.
//!
//! These are the finite targets of the homomorphisms that define
//! finite-index subgroups.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// A permutation, stored as its image list. Products compose right to left:
/// `(p * q)(i) = p(q(i))`, so a left action `g . x` is a homomorphism into
/// this product.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            let i = i as usize;
            if i >= n || seen[i] {
                return Err(Error::Domain(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation from a total function on `0..n`.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::from_images((0..n).map(|i| f(i) as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&j| self.0[j as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, e: i64) -> Perm {
        let mut base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    pub fn conjugate_by(&self, k: &Perm) -> Perm {
        k.compose(self).compose(&k.inverse())
    }
}

/// Values a group homomorphism can land in.
pub trait GroupLike: Clone {
    fn identity_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inv(&self) -> Self;
    fn pow(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.identity_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl GroupLike for Perm {
    fn identity_like(&self) -> Self {
        Perm::identity(self.degree())
    }
    fn mul(&self, other: &Self) -> Self {
        self.compose(other)
    }
    fn inv(&self) -> Self {
        self.inverse()
    }
    fn pow(&self, e: i64) -> Self {
        Perm::pow(self, e)
    }
}

/// All elements of the group generated by `gens` (identity first), in BFS order.
pub fn closure(degree: usize, gens: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::resource("finite group order", cap));
                }
                seen.insert(y.clone());
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}

/// Orbit of `x` under conjugation by the group generated by `gens`.
pub fn conjugacy_class(x: &Perm, gens: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let mut seen: HashSet<Perm> = HashSet::from([x.clone()]);
    let mut out = vec![x.clone()];
    let mut queue = VecDeque::from([x.clone()]);
    while let Some(y) = queue.pop_front() {
        for g in gens {
            let z = y.conjugate_by(g);
            if seen.insert(z.clone()) {
                if seen.len() > cap {
                    return Err(Error::resource("conjugacy class", cap));
                }
                out.push(z.clone());
                queue.push_back(z);
            }
        }
    }
    Ok(out)
}

/// The normal closure of `sub` in the group generated by `ambient`.
pub fn normal_closure(degree: usize, sub: &[Perm], ambient: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let mut gens: Vec<Perm> = Vec::new();
    let mut seen = HashSet::new();
    for s in sub {
        for c in conjugacy_class(s, ambient, cap)? {
            if seen.insert(c.clone()) {
                gens.push(c);
            }
        }
    }
    closure(degree, &gens, cap)
}

/// A subgroup of a permutation group, stored by its full element set.
#[derive(Debug, Clone)]
pub struct PermSubgroup {
    degree: usize,
    elements: Vec<Perm>,
    members: HashSet<Perm>,
}

impl PermSubgroup {
    pub fn generated(degree: usize, gens: &[Perm], cap: usize) -> Result<Self> {
        Ok(Self::from_elements(degree, closure(degree, gens, cap)?))
    }

    pub(crate) fn from_elements(degree: usize, elements: Vec<Perm>) -> Self {
        let members = elements.iter().cloned().collect();
        PermSubgroup {
            degree,
            elements,
            members,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.members.contains(p)
    }

    /// Canonical representative of the left coset `x * self`: its least element.
    pub fn coset_key(&self, x: &Perm) -> Perm {
        if self.elements.len() == 1 {
            return x.clone();
        }
        self.elements
            .iter()
            .map(|h| x.compose(h))
            .min()
            .expect("subgroup contains the identity")
    }

    pub fn intersection(&self, other: &PermSubgroup) -> PermSubgroup {
        let elements = self.elements.iter().filter(|p| other.contains(p)).cloned().collect();
        Self::from_elements(self.degree, elements)
    }

    pub fn conjugate(&self, k: &Perm) -> PermSubgroup {
        let elements = self.elements.iter().map(|h| h.conjugate_by(k)).collect();
        Self::from_elements(self.degree, elements)
    }

    pub fn is_subset_of(&self, other: &PermSubgroup) -> bool {
        self.elements.iter().all(|p| other.contains(p))
    }

    /// Sorted element list; equal subgroups have equal keys.
    pub fn key(&self) -> Vec<Perm> {
        let mut v = self.elements.clone();
        v.sort();
        v
    }

    /// Checks closure under products and inverses.
    pub fn check_subgroup(&self) -> Result<()> {
        if !self.contains(&Perm::identity(self.degree)) {
            return Err(Error::Domain("subgroup lacks the identity".into()));
        }
        for a in &self.elements {
            if !self.contains(&a.inverse()) {
                return Err(Error::Domain("subgroup not closed under inverses".into()));
            }
            for b in &self.elements {
                if !self.contains(&a.compose(b)) {
                    return Err(Error::Domain("subgroup not closed under products".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(n: usize, k: usize) -> Perm {
        Perm::from_fn(n, |i| (i + k) % n).unwrap()
    }

    fn refl(n: usize) -> Perm {
        Perm::from_fn(n, |i| (n - i) % n).unwrap()
    }

    #[test]
    fn composition_applies_right_first() {
        let r = rot(5, 1);
        let s = refl(5);
        // s r s = r^-1
        assert_eq!(s.compose(&r).compose(&s), r.inverse());
        assert_eq!(r.pow(5), Perm::identity(5));
        assert_eq!(r.pow(-2), rot(5, 3));
    }

    #[test]
    fn dihedral_closure_and_classes() {
        let g = closure(6, &[rot(6, 1), refl(6)], 1000).unwrap();
        assert_eq!(g.len(), 12);
        let class = conjugacy_class(&rot(6, 1), &[rot(6, 1), refl(6)], 100).unwrap();
        assert_eq!(class.len(), 2);
        let nc = normal_closure(6, &[rot(6, 2)], &[rot(6, 1), refl(6)], 100).unwrap();
        assert_eq!(nc.len(), 3);
        let sub = PermSubgroup::generated(6, &[refl(6)], 10).unwrap();
        sub.check_subgroup().unwrap();
        assert_eq!(sub.order(), 2);
        assert_eq!(sub.coset_key(&refl(6)), Perm::identity(6));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_images(vec![2, 0]).is_err());
    }

    #[test]
    fn closure_respects_cap() {
        assert!(closure(7, &[rot(7, 1)], 3).is_err());
    }
}
