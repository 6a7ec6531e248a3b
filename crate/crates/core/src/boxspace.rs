//! Box families and their metrized disjoint unions.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_traits::Signed;

use crate::covers::quotient_structure;
use crate::dimsolve::{dim_profile, DimProfile, Optimality};
use crate::error::{Error, Result};
use crate::formats;
use crate::groups::MarkedGroup;
use crate::limits::Limits;
use crate::metric::FiniteMetricSpace;
use crate::quotients::{build_quotient, FiniteQuotient, SubgroupSpec};
use crate::scalar::{self, fmt_scalar, Scalar};
use crate::separation::injectivity_radius;

/// The quotients `G/G_α` of one marked group, in order.
#[derive(Debug, Clone)]
pub struct BoxFamily {
    group: MarkedGroup,
    members: Vec<FiniteQuotient>,
}

impl BoxFamily {
    pub fn new(group: &MarkedGroup, sigma: &[SubgroupSpec]) -> Result<Self> {
        let members = sigma.iter().map(build_quotient).collect::<Result<Vec<_>>>()?;
        Self::from_quotients(group, members)
    }

    pub fn from_quotients(group: &MarkedGroup, members: Vec<FiniteQuotient>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("a box family needs at least one member".into()));
        }
        if let Some(q) = members.iter().find(|q| q.host() != group) {
            return Err(Error::Domain(format!("{} is not a quotient of the family's group", q.label())));
        }
        Ok(BoxFamily {
            group: group.clone(),
            members,
        })
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn members(&self) -> &[FiniteQuotient] {
        &self.members
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|q| q.spec().label().to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Drops repeated members, keeping first occurrences.
    pub fn coalesced(&self) -> BoxFamily {
        let mut seen = HashSet::new();
        let members = self
            .members
            .iter()
            .filter(|q| seen.insert(q.spec().key()))
            .cloned()
            .collect();
        BoxFamily {
            group: self.group.clone(),
            members,
        }
    }
}

/// `λ_k = 2^k`.
pub fn default_lambda(len: usize) -> Vec<Scalar> {
    (0..len).map(|k| scalar::int(1i64 << k.min(62))).collect()
}

/// The disjoint union of a box family. Inside a component the distance is
/// the quotient metric; components `n < n'` are at distance
/// `λ_(n+1) + .. + λ_(n')`.
#[derive(Debug, Clone)]
pub struct BoxMetric {
    family: BoxFamily,
    lambda: Vec<Scalar>,
    offsets: Vec<usize>,
}

/// Glues a family with the given `λ` prefix.
///
/// Because cross distances do not depend on the points, the triangle
/// inequality holds exactly when every component's diameter is at most
/// twice its distance to the nearest other component; families violating
/// this are rejected.
pub fn assemble_box(family: &BoxFamily, lambda: &[Scalar]) -> Result<BoxMetric> {
    if lambda.len() != family.len() {
        return Err(Error::Parameter(format!(
            "λ has {} entries for {} components",
            lambda.len(),
            family.len()
        )));
    }
    if lambda.iter().any(|l| !l.is_positive()) || lambda.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("λ must be positive and strictly increasing".into()));
    }
    let mut offsets = Vec::with_capacity(family.len() + 1);
    let mut total = 0;
    for q in family.members() {
        offsets.push(total);
        total += q.index();
    }
    offsets.push(total);
    let b = BoxMetric {
        family: family.clone(),
        lambda: lambda.to_vec(),
        offsets,
    };
    for (n, q) in family.members().iter().enumerate() {
        let gap = (0..family.len()).filter(|&m| m != n).map(|m| b.cross_distance(n, m)).min();
        if let Some(gap) = gap {
            if q.space().diameter() > gap * scalar::int(2) {
                return Err(Error::Parameter(format!(
                    "component {n} has diameter {} above twice its gap {}; the glued distance would not be a metric",
                    fmt_scalar(&q.space().diameter()),
                    fmt_scalar(&gap)
                )));
            }
        }
    }
    Ok(b)
}

impl BoxMetric {
    pub fn family(&self) -> &BoxFamily {
        &self.family
    }

    pub fn lambda(&self) -> &[Scalar] {
        &self.lambda
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        *self.offsets.last().expect("offsets end with the total")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global index of point `c` of component `n`.
    pub fn point(&self, n: usize, c: usize) -> usize {
        self.offsets[n] + c
    }

    /// `(component, coset)` of a global point.
    pub fn locate(&self, p: usize) -> (usize, usize) {
        let n = self.offsets.partition_point(|&o| o <= p) - 1;
        (n, p - self.offsets[n])
    }

    /// `Σ_{k = min+1}^{max} λ_k`, zero on the diagonal.
    pub fn cross_distance(&self, n: usize, m: usize) -> Scalar {
        let (a, b) = if n <= m { (n, m) } else { (m, n) };
        self.lambda[a + 1..=b].iter().sum()
    }

    pub fn dist(&self, p: usize, q: usize) -> Scalar {
        let (n, x) = self.locate(p);
        let (m, y) = self.locate(q);
        if n == m {
            self.family.members[n].distance(x, y)
        } else {
            self.cross_distance(n, m)
        }
    }

    /// The whole glued space as one finite metric space.
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let n = self.len();
        let mut names = Vec::with_capacity(n);
        for (k, q) in self.family.members.iter().enumerate() {
            for c in 0..q.index() {
                names.push(format!("{k}:{}", q.space().name(c)));
            }
        }
        let dist: Vec<Vec<Scalar>> = (0..n).map(|p| (0..n).map(|q| self.dist(p, q)).collect()).collect();
        FiniteMetricSpace::new(format!("box({})", self.family.labels().join(",")), names, &dist)
    }

    /// Header lines recording the family, `λ` and the metric convention.
    pub fn header(&self) -> Vec<String> {
        let lambda: Vec<String> = self.lambda.iter().map(fmt_scalar).collect();
        vec![
            format!("box group={}", self.family.group.family().name()),
            format!("box sigma={}", self.family.labels().join(";")),
            format!("box lambda={}", lambda.join(",")),
        ]
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Writes the `R`-proximity graph of the glued space.
pub fn export_box_scale_graph(b: &BoxMetric, r: &Scalar, path: &Path) -> Result<()> {
    let space = b.to_space()?;
    write_file(path, |out| formats::write_proximity_edges(&space, r, &b.header(), out))
}

/// Writes the `R`-proximity graph of one quotient.
pub fn export_quotient_scale_graph(q: &FiniteQuotient, r: &Scalar, path: &Path) -> Result<()> {
    let header = vec![format!("quotient spec={}", q.spec().label())];
    write_file(path, |out| formats::write_proximity_edges(q.space(), r, &header, out))
}

#[derive(Debug, Clone)]
pub struct BoxReport {
    pub labels: Vec<String>,
    pub profiles: Vec<DimProfile>,
    /// Injectivity radius of each member; `None` when globally injective.
    /// Members whose radius could not be computed within the caps are
    /// listed in `radius_failures`.
    pub injectivity: Vec<Option<Scalar>>,
    pub radius_failures: Vec<usize>,
    /// Some profile is only an upper bound.
    pub partial: bool,
}

/// Uniform profiles over the family at each `(R, s_max)`, with injectivity
/// radii of the members.
pub fn box_dim_report(family: &BoxFamily, scales: &[(Scalar, Scalar)], limits: &Limits) -> Result<BoxReport> {
    let spaces: Vec<_> = family
        .members
        .iter()
        .map(|q| (q.space().clone(), quotient_structure(q)))
        .collect();
    let profiles = scales
        .iter()
        .map(|(r, s_max)| dim_profile(&spaces, r, s_max, limits))
        .collect::<Result<Vec<_>>>()?;
    let mut injectivity = Vec::with_capacity(family.len());
    let mut radius_failures = Vec::new();
    for (i, q) in family.members.iter().enumerate() {
        match injectivity_radius(q) {
            Ok(r) => injectivity.push(r),
            Err(Error::Resource { .. }) => {
                injectivity.push(None);
                radius_failures.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    let partial = profiles.iter().any(|p| p.optimality == Optimality::UpperBoundOnly);
    Ok(BoxReport {
        labels: family.labels(),
        profiles,
        injectivity,
        radius_failures,
        partial,
    })
}
