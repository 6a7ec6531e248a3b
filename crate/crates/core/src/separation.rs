//! Separating and semi-conjugacy-separating families, injectivity radii and
//! the isometry check for quotient maps.
//!
//! Every condition is decided on hom-images inside the finite target group,
//! so no conjugacy class of the infinite group is ever enumerated.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::perm::{conjugacy_class, Perm};
use crate::quotients::{build_quotient, FiniteQuotient, SubgroupSpec};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Separating,
    /// Semi-conjugacy-separating, decided in one of three equivalent ways:
    /// 1. the conjugacy class of `g` misses `H`;
    /// 2. `g` lies in no conjugate `k H k^-1`;
    /// 3. `g` fixes no coset, i.e. the quotient map is injective on `{1, g} k` for every `k`.
    Scs(u8),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Separating => write!(f, "separating"),
            Condition::Scs(m) => write!(f, "scs{m}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub condition: Condition,
    pub test_set: Vec<GroupElement>,
    /// Position in the family and the member satisfying the condition for `F`.
    pub witness: Option<(usize, SubgroupSpec)>,
    pub verdict: bool,
}

impl SeparationReport {
    /// Re-checks the witness against the claimed condition.
    pub fn recheck(&self) -> Result<bool> {
        match &self.witness {
            None => Ok(!self.verdict),
            Some((_, spec)) => member_satisfies(spec, &self.test_set, self.condition),
        }
    }
}

fn nontrivial<'a>(spec: &SubgroupSpec, f: &'a [GroupElement]) -> impl Iterator<Item = &'a GroupElement> {
    let id = spec.host().identity();
    f.iter().filter(move |g| **g != id)
}

/// Union of the conjugates `k T_H k^-1` over the target group.
pub fn conjugate_union(spec: &SubgroupSpec) -> Result<HashSet<Perm>> {
    let cap = spec.host().limits().target_order;
    let mut out: HashSet<Perm> = HashSet::new();
    for h in spec.subgroup().elements() {
        if out.contains(h) {
            continue;
        }
        out.extend(conjugacy_class(h, spec.images(), cap)?);
        if out.len() > cap {
            return Err(Error::resource("union of conjugate subgroups", cap));
        }
    }
    Ok(out)
}

/// Whether one member satisfies the condition for `F`.
pub fn member_satisfies(spec: &SubgroupSpec, f: &[GroupElement], condition: Condition) -> Result<bool> {
    let cap = spec.host().limits().target_order;
    match condition {
        Condition::Separating => Ok(nontrivial(spec, f).all(|g| !spec.contains(g))),
        Condition::Scs(1) => {
            for g in nontrivial(spec, f) {
                let class = conjugacy_class(&spec.phi(g), spec.images(), cap)?;
                if class.iter().any(|x| spec.subgroup().contains(x)) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Condition::Scs(2) => {
            let union = conjugate_union(spec)?;
            Ok(nontrivial(spec, f).all(|g| !union.contains(&spec.phi(g))))
        }
        Condition::Scs(3) => {
            let q = build_quotient(spec)?;
            for g in nontrivial(spec, f) {
                let p = spec.phi(g);
                if (0..q.index()).any(|c| q.act_target(&p, c) == c) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Condition::Scs(m) => Err(Error::Parameter(format!("mode must be 1, 2 or 3, got {m}"))),
    }
}

fn decide(sigma: &[SubgroupSpec], f: &[GroupElement], condition: Condition) -> Result<SeparationReport> {
    for spec in sigma {
        for g in f {
            if !spec.host().family().contains(g) {
                return Err(Error::Domain(format!("{g} is not an element of the host group")));
            }
        }
    }
    let mut witness = None;
    for (i, spec) in sigma.iter().enumerate() {
        if member_satisfies(spec, f, condition)? {
            witness = Some((i, spec.clone()));
            break;
        }
    }
    Ok(SeparationReport {
        condition,
        test_set: f.to_vec(),
        verdict: witness.is_some(),
        witness,
    })
}

/// True iff some member contains no element of `F \ {1}`.
pub fn is_separating(sigma: &[SubgroupSpec], f: &[GroupElement]) -> Result<SeparationReport> {
    decide(sigma, f, Condition::Separating)
}

/// True iff some member satisfies the semi-conjugacy condition for every
/// `g ∈ F \ {1}`, decided in the given mode.
pub fn is_semi_conjugacy_separating(sigma: &[SubgroupSpec], f: &[GroupElement], mode: u8) -> Result<SeparationReport> {
    decide(sigma, f, Condition::Scs(mode))
}

/// Whether `π_H` is injective on every translate `F k`.
pub fn injective_on_translates(q: &FiniteQuotient, f: &[GroupElement]) -> bool {
    let distinct: HashSet<&GroupElement> = f.iter().collect();
    let images: Vec<Perm> = distinct.into_iter().map(|g| q.spec().phi(g)).collect();
    (0..q.index()).all(|c| {
        let mut seen = HashSet::new();
        images.iter().all(|p| seen.insert(q.act_target(p, c)))
    })
}

/// The least `max(|a|, |b|)` in ticks over pairs `a != b` whose translates
/// `a k`, `b k` collide under `π_H` for some `k`. `None` when no collision
/// exists at all, which happens only for finite hosts.
pub fn collision_ticks(q: &FiniteQuotient) -> Result<Option<u64>> {
    let spec = q.spec();
    let host = spec.host();
    let union = conjugate_union(spec)?;
    let min_step = host.steps().iter().map(|s| s.ticks).min().unwrap_or(1);
    let mut radius = min_step;
    let mut last_size = 0usize;
    loop {
        let ball = host.ball_lengths(radius)?;
        let images: Vec<Perm> = ball.iter().map(|(g, _)| spec.phi(g)).collect();
        let inverses: Vec<Perm> = images.iter().map(|p| p.inverse()).collect();
        for j in 1..ball.len() {
            for i in 0..j {
                if union.contains(&inverses[i].compose(&images[j])) {
                    return Ok(Some(ball[j].1));
                }
            }
        }
        if ball.len() == last_size {
            return Ok(None);
        }
        last_size = ball.len();
        radius *= 2;
    }
}

/// Largest multiple of the least generator weight at which `π_H` is
/// injective on every ball `B_R(g)`. `None` means injective on all of `G`.
pub fn injectivity_radius(q: &FiniteQuotient) -> Result<Option<Scalar>> {
    let host = q.host();
    let min_w = host.weights().iter().min().copied().expect("nonempty generating set");
    Ok(collision_ticks(q)?.map(|c| {
        let c = host.to_scalar(c);
        let k = (c / min_w).ceil() - scalar::int(1);
        k * min_w
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryCheck {
    pub holds: bool,
    /// Set when `π_H` is not injective on some `B_{3R}(g)`; the check is then vacuous.
    pub vacuous: bool,
    pub pairs_checked: usize,
}

/// Checks that `π_H` is an isometry on every `B_R(g)` provided it is
/// injective on every `B_{3R}(g)`.
pub fn verify_isometry_lemma(q: &FiniteQuotient, r: &Scalar) -> Result<IsometryCheck> {
    let host = q.host();
    let rt = host.threshold(r)?;
    let big = host.ball_lengths(3 * rt)?;
    let big_images: Vec<Perm> = big.iter().map(|(g, _)| q.spec().phi(g)).collect();
    for c in 0..q.index() {
        let mut seen = HashSet::new();
        if !big_images.iter().all(|p| seen.insert(q.act_target(p, c))) {
            return Ok(IsometryCheck {
                holds: true,
                vacuous: true,
                pairs_checked: 0,
            });
        }
    }
    let ball = host.word_ball(&host.identity(), r)?;
    let images: Vec<Perm> = ball.offsets.iter().map(|g| q.spec().phi(g)).collect();
    let qs = q.space();
    let qunit = qs.unit();
    let bunit = ball.space.unit();
    let mut pairs = 0;
    for c in 0..q.index() {
        let cosets: Vec<usize> = images.iter().map(|p| q.act_target(p, c)).collect();
        for i in 0..ball.len() {
            for j in i + 1..ball.len() {
                pairs += 1;
                // Compare as rationals without allocating.
                let dg = ball.space.ticks(i, j) as i128 * qunit as i128;
                let dq = qs.ticks(cosets[i], cosets[j]) as i128 * bunit as i128;
                if dg != dq {
                    return Ok(IsometryCheck {
                        holds: false,
                        vacuous: false,
                        pairs_checked: pairs,
                    });
                }
            }
        }
    }
    Ok(IsometryCheck {
        holds: true,
        vacuous: false,
        pairs_checked: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Family, MarkedGroup};
    use crate::scalar::int;

    fn z() -> MarkedGroup {
        MarkedGroup::standard(Family::FreeAbelian(1)).unwrap()
    }

    fn zel(k: i64) -> GroupElement {
        GroupElement::Abelian(vec![k])
    }

    fn dihedral() -> MarkedGroup {
        MarkedGroup::standard(Family::InfiniteDihedral).unwrap()
    }

    const S: GroupElement = GroupElement::Dihedral { rot: 0, flip: true };

    #[test]
    fn separating_on_z() {
        let g = z();
        let two_three = [SubgroupSpec::congruence(&g, 2).unwrap(), SubgroupSpec::congruence(&g, 3).unwrap()];
        assert!(!is_separating(&two_three, &[zel(6)]).unwrap().verdict);
        let four = [SubgroupSpec::congruence(&g, 4).unwrap()];
        let rep = is_separating(&four, &[zel(2), zel(3)]).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.witness.as_ref().unwrap().1.label(), "4Z");
        assert!(rep.recheck().unwrap());
    }

    #[test]
    fn reflections_are_never_separated() {
        let g = dihedral();
        let sigma: Vec<_> = (1..=8).map(|n| SubgroupSpec::dihedral_with_reflection(&g, n, 0).unwrap()).collect();
        assert!(!is_separating(&sigma, &[S]).unwrap().verdict);
    }

    #[test]
    fn dihedral_counterexample_in_every_mode() {
        let g = dihedral();
        let sigma = [SubgroupSpec::dihedral_with_reflection(&g, 3, 0).unwrap()];
        for mode in 1..=3 {
            assert!(!is_semi_conjugacy_separating(&sigma, &[g.identity(), S], mode).unwrap().verdict);
        }
        let q = build_quotient(&sigma[0]).unwrap();
        assert!(!injective_on_translates(&q, &[g.identity(), S]));
    }

    #[test]
    fn unknown_mode_is_a_parameter_error() {
        let g = z();
        let sigma = [SubgroupSpec::congruence(&g, 4).unwrap()];
        assert!(is_semi_conjugacy_separating(&sigma, &[zel(1)], 4).is_err());
    }

    #[test]
    fn injectivity_radii() {
        let g = z();
        let q12 = build_quotient(&SubgroupSpec::congruence(&g, 12).unwrap()).unwrap();
        assert_eq!(injectivity_radius(&q12).unwrap(), Some(int(5)));
        let q2 = build_quotient(&SubgroupSpec::congruence(&g, 2).unwrap()).unwrap();
        assert_eq!(injectivity_radius(&q2).unwrap(), Some(int(0)));
        let d = dihedral();
        let qd = build_quotient(&SubgroupSpec::dihedral_with_reflection(&d, 3, 0).unwrap()).unwrap();
        assert_eq!(injectivity_radius(&qd).unwrap(), Some(int(0)));
    }

    #[test]
    fn finite_host_with_trivial_subgroup_is_globally_injective() {
        let g = MarkedGroup::standard(Family::FiniteCyclicProduct(vec![6])).unwrap();
        let q = build_quotient(&SubgroupSpec::congruence(&g, 6).unwrap()).unwrap();
        assert_eq!(injectivity_radius(&q).unwrap(), None);
    }

    #[test]
    fn isometry_checks() {
        let g = z();
        let q64 = build_quotient(&SubgroupSpec::congruence(&g, 64).unwrap()).unwrap();
        let ok = verify_isometry_lemma(&q64, &int(10)).unwrap();
        assert!(ok.holds && !ok.vacuous);
        let q12 = build_quotient(&SubgroupSpec::congruence(&g, 12).unwrap()).unwrap();
        let vac = verify_isometry_lemma(&q12, &int(2)).unwrap();
        assert!(vac.holds && vac.vacuous);
        let zero = verify_isometry_lemma(&q12, &int(0)).unwrap();
        assert!(zero.holds && !zero.vacuous);
    }
}
