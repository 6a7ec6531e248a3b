//! Text formats: edge lists, cover and witness files, group records.
//!
//! Comment lines start with `#`. Points are referred to by their index.

use std::io::Write;

use crate::covers::Cover;
use crate::dimsolve::{Optimality, ScaleDimWitness, WitnessKind};
use crate::error::{Error, Result};
use crate::groups::{parse_word, Family, IntMatrix, MarkedGroup};
use crate::limits::Limits;
use crate::metric::FiniteMetricSpace;
use crate::quotients::{FiniteQuotient, SubgroupSpec};
use crate::scalar::{self, fmt_scalar, Scalar};

/// One line per Schreier edge, `from to weight label`.
pub fn write_quotient_edges(q: &FiniteQuotient, out: &mut impl Write) -> Result<()> {
    writeln!(out, "# quotient label={} index={}", q.label(), q.index())?;
    let steps = q.host().steps();
    for (c, row) in q.edges().iter().enumerate() {
        for (k, &t) in row.iter().enumerate() {
            writeln!(out, "{c} {t} {} {}", fmt_scalar(&steps[k].weight), steps[k].label)?;
        }
    }
    Ok(())
}

/// The `R`-proximity graph: one line `i j d near` per pair `i < j` at
/// distance at most `R`, after the given header lines.
pub fn write_proximity_edges(space: &FiniteMetricSpace, r: &Scalar, header: &[String], out: &mut impl Write) -> Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    writeln!(out, "# proximity label={} index={} R={}", space.label(), space.len(), fmt_scalar(r))?;
    let t = space.threshold(r);
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            if space.ticks(i, j) <= t {
                writeln!(out, "{i} {j} {} near", fmt_scalar(&space.dist(i, j)))?;
            }
        }
    }
    Ok(())
}

fn header_field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
}

/// Reads an edge list as the shortest-path metric of the weighted graph.
/// The point count comes from an `index=` header field, or else from the
/// largest endpoint.
pub fn read_edge_list(text: &str) -> Result<FiniteMetricSpace> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    let mut label = String::from("edges");
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(h) = line.strip_prefix('#') {
            if let Some(n) = header_field(h, "index") {
                declared = Some(n.parse().map_err(|_| Error::Parse(format!("bad index {n:?} in header")))?);
            }
            if let Some(l) = header_field(h, "label") {
                label = l.to_string();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("line {}: expected `from to weight [label]`", lineno + 1));
        if f.len() < 3 {
            return Err(bad());
        }
        let a: usize = f[0].parse().map_err(|_| bad())?;
        let b: usize = f[1].parse().map_err(|_| bad())?;
        let w = scalar::parse_scalar(f[2])?;
        if a != b {
            edges.push((a, b, w));
        }
    }
    let n = declared.unwrap_or_else(|| edges.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(1));
    let names = (0..n).map(|i| i.to_string()).collect();
    FiniteMetricSpace::from_graph(label, names, &edges)
}

/// Header `space=<label> R=<r> S=<s>`, then `id: p1 p2 ..` per member.
pub fn write_cover(cover: &Cover, out: &mut impl Write) -> Result<()> {
    writeln!(out, "space={} R={} S={}", cover.label, fmt_scalar(&cover.r), fmt_scalar(&cover.s))?;
    for (i, m) in cover.members().iter().enumerate() {
        let pts: Vec<String> = m.iter().map(|p| p.to_string()).collect();
        writeln!(out, "{i}: {}", pts.join(" "))?;
    }
    Ok(())
}

/// Reads a cover of `space`; comment lines are skipped.
pub fn read_cover(text: &str, space: &FiniteMetricSpace) -> Result<Cover> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty cover file".into()))?;
    let field = |k: &str| header_field(header, k).ok_or_else(|| Error::Parse(format!("cover header lacks {k}=")));
    let r = scalar::parse_nonneg(field("R")?)?;
    let s = scalar::parse_nonneg(field("S")?)?;
    let mut members = Vec::new();
    for line in lines {
        let (_, pts) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("member line {line:?} lacks ':'")))?;
        let m = pts
            .split_whitespace()
            .map(|p| p.parse::<usize>().map_err(|_| Error::Parse(format!("bad point {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        members.push(m);
    }
    let mut cover = Cover::new(space, members, r, s)?;
    if let Some(l) = header_field(header, "space") {
        cover.label = l.to_string();
    }
    Ok(cover)
}

/// A witness header line followed by its cover. Colorings are written as
/// the cover they induce, so every witness file is a checkable cover.
pub fn write_witness(w: &ScaleDimWitness, cover: &Cover, out: &mut impl Write) -> Result<()> {
    let kind = match w.kind {
        WitnessKind::Cover => "cover",
        WitnessKind::Coloring => "coloring",
    };
    let opt = match w.optimality {
        Optimality::Exact => "exact",
        Optimality::UpperBoundOnly => "upper-bound",
    };
    writeln!(
        out,
        "# witness kind={kind} value={} optimality={opt} nodes={} R={} S={}",
        w.value,
        w.nodes,
        fmt_scalar(&w.r),
        fmt_scalar(&w.s)
    )?;
    if let Some(colors) = &w.coloring {
        let c: Vec<String> = colors.iter().map(|c| c.to_string()).collect();
        writeln!(out, "# colors {}", c.join(" "))?;
    }
    write_cover(cover, out)
}

/// The witness header fields (`kind`, `value`, ..) and the certificate cover.
pub fn read_witness(text: &str, space: &FiniteMetricSpace) -> Result<(Vec<(String, String)>, Cover)> {
    let header = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# witness"))
        .ok_or_else(|| Error::Parse("missing witness header".into()))?;
    let fields = header
        .split_whitespace()
        .filter_map(|w| w.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect();
    Ok((fields, read_cover(text, space)?))
}

/// Parses a group as a record (`family = ..`, `params = ..`, `generators =
/// ..`, `weights = ..`, one per line) or as a shorthand: `z`, `z2`, `zN`,
/// `heis`, `dinf`, `lampK`, `cyc:K1,K2,..`, `semi:A11,A12,..`.
pub fn parse_group(text: &str, limits: &Limits) -> Result<MarkedGroup> {
    if text.contains('=') {
        return parse_group_record(text, limits);
    }
    let t = text.trim();
    let ints = |s: &str| -> Result<Vec<i64>> {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad integer {x:?} in {t:?}"))))
            .collect()
    };
    let family = if t == "z" {
        Family::FreeAbelian(1)
    } else if t == "heis" {
        Family::Heisenberg3
    } else if t == "dinf" {
        Family::InfiniteDihedral
    } else if let Some(k) = t.strip_prefix("lamp") {
        Family::WreathLamp(k.parse().map_err(|_| Error::Parse(format!("bad lamp order in {t:?}")))?)
    } else if let Some(ks) = t.strip_prefix("cyc:") {
        Family::FiniteCyclicProduct(ints(ks)?.into_iter().map(|k| k as u64).collect())
    } else if let Some(a) = t.strip_prefix("semi:") {
        semidirect(ints(a)?)?
    } else if let Some(n) = t.strip_prefix('z') {
        Family::FreeAbelian(n.parse().map_err(|_| Error::Parse(format!("unknown group {t:?}")))?)
    } else {
        return Err(Error::Parse(format!("unknown group {t:?}")));
    };
    Ok(MarkedGroup::standard(family)?.with_limits(limits.clone()))
}

fn semidirect(entries: Vec<i64>) -> Result<Family> {
    let n = (1..=entries.len()).find(|n| n * n == entries.len()).ok_or_else(|| {
        Error::Parse(format!("{} matrix entries do not form a square matrix", entries.len()))
    })?;
    Ok(Family::SemidirectZnZ(IntMatrix::new(n, entries)?))
}

fn parse_group_record(text: &str, limits: &Limits) -> Result<MarkedGroup> {
    let mut family = None;
    let mut params = Vec::new();
    let mut generators = None;
    let mut weights = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected `key = value`, got {line:?}")))?;
        let v = v.trim();
        match k.trim() {
            "family" => family = Some(v.to_string()),
            "params" => {
                params = v
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<i64>().map_err(|_| Error::Parse(format!("bad param {s:?}"))))
                    .collect::<Result<Vec<_>>>()?
            }
            "generators" => generators = Some(v.to_string()),
            "weights" => {
                weights = Some(
                    v.split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(scalar::parse_scalar)
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            other => return Err(Error::Parse(format!("unknown group field {other:?}"))),
        }
    }
    let name = family.ok_or_else(|| Error::Parse("group record lacks `family`".into()))?;
    let one = |p: &[i64]| -> Result<u64> {
        match p {
            [n] if *n > 0 => Ok(*n as u64),
            _ => Err(Error::Parse(format!("{name} takes one positive parameter"))),
        }
    };
    let family = match name.as_str() {
        "free-abelian" => Family::FreeAbelian(one(&params)? as usize),
        "cyclic" => Family::FiniteCyclicProduct(params.iter().map(|&k| k as u64).collect()),
        "heisenberg" => Family::Heisenberg3,
        "dihedral" => Family::InfiniteDihedral,
        "lamplighter" => Family::WreathLamp(one(&params)?),
        "semidirect" => semidirect(params.clone())?,
        other => return Err(Error::Parse(format!("unknown family {other:?}"))),
    };
    match generators.as_deref() {
        None | Some("default") => {
            let g = MarkedGroup::standard(family)?.with_limits(limits.clone());
            match weights {
                None => Ok(g),
                Some(w) => MarkedGroup::with_generators(
                    g.family().clone(),
                    g.generators().to_vec(),
                    g.labels().to_vec(),
                    w,
                    limits.clone(),
                ),
            }
        }
        Some(list) => {
            let words: Vec<&str> = list.split(';').map(str::trim).filter(|w| !w.is_empty()).collect();
            let gens = words.iter().map(|w| parse_word(&family, w)).collect::<Result<Vec<_>>>()?;
            let w = weights.unwrap_or_else(|| vec![scalar::int(1); gens.len()]);
            let labels = words.iter().map(|w| w.replace(' ', "")).collect();
            MarkedGroup::with_generators(family, gens, labels, w, limits.clone())
        }
    }
}

/// The record form of a marked group, readable by [`parse_group`]. Explicit
/// generators are written as words in the canonical ones.
pub fn write_group_record(g: &MarkedGroup) -> String {
    let params: Vec<String> = match g.family() {
        Family::FreeAbelian(n) => vec![n.to_string()],
        Family::FiniteCyclicProduct(ks) => ks.iter().map(|k| k.to_string()).collect(),
        Family::WreathLamp(k) => vec![k.to_string()],
        Family::SemidirectZnZ(a) => a.entries().iter().map(|x| x.to_string()).collect(),
        Family::Heisenberg3 | Family::InfiniteDihedral => Vec::new(),
    };
    let gens = if g.is_standard() {
        "default".to_string()
    } else {
        let canon = g.family().canonical_generators();
        g.generators()
            .iter()
            .map(|x| canonical_word(&canon, x))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let weights: Vec<String> = g.weights().iter().map(fmt_scalar).collect();
    format!(
        "family = {}\nparams = {}\ngenerators = {gens}\nweights = {}\n",
        g.family().name(),
        params.join(" "),
        weights.join(" ")
    )
}

fn canonical_word(canon: &[(crate::groups::GroupElement, String)], x: &crate::groups::GroupElement) -> String {
    use crate::groups::GroupElement::*;
    let term = |label: &str, e: i64| match e {
        0 => None,
        1 => Some(label.to_string()),
        e => Some(format!("{label}^{e}")),
    };
    let label = |i: usize| canon[i].1.as_str();
    let parts: Vec<String> = match x {
        Abelian(v) => v.iter().enumerate().filter_map(|(i, &e)| term(label(i), e)).collect(),
        Heisenberg([a, b, c]) => {
            let z = c - a * b;
            let mut p: Vec<String> = [term("x", *a), term("y", *b)].into_iter().flatten().collect();
            let (zx, zy) = if z >= 0 { ("x y x^-1 y^-1", z) } else { ("y x y^-1 x^-1", -z) };
            p.extend(std::iter::repeat_n(zx.to_string(), zy as usize));
            p
        }
        Dihedral { rot, flip } => [term("r", *rot), if *flip { Some("s".to_string()) } else { None }]
            .into_iter()
            .flatten()
            .collect(),
        Lamp { lamps, shift } => {
            let mut p = Vec::new();
            for (&i, &v) in lamps {
                p.extend(term("t", i));
                p.extend(term("a", v as i64));
                p.extend(term("t", -i));
            }
            p.extend(term("t", *shift));
            p
        }
        Semidirect { v, shift } => {
            let mut p: Vec<String> = v.iter().enumerate().filter_map(|(i, &e)| term(label(i), e)).collect();
            p.extend(term(label(v.len()), *shift));
            p
        }
    };
    parts.join(" ")
}

/// Parses a subgroup of `g`: `whole`, `levels:K1,K2,..`, `congruence:M`,
/// `char:M:C1,C2,..`, `wreath:N`, `semi:M:L`, `rot:N` (`<r^N>`) or
/// `refl:N:J` (`<r^N, r^J s>`).
pub fn parse_subgroup(g: &MarkedGroup, text: &str) -> Result<SubgroupSpec> {
    let t = text.trim();
    let parts: Vec<&str> = t.split(':').collect();
    let bad = || Error::Parse(format!("cannot parse subgroup {t:?}"));
    let ints = |s: &str| -> Result<Vec<i64>> {
        s.split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| bad()))
            .collect()
    };
    let uint = |s: &str| -> Result<u64> { s.trim().parse::<u64>().map_err(|_| bad()) };
    match parts.as_slice() {
        ["whole"] => Ok(SubgroupSpec::whole(g)),
        ["levels", ks] => {
            let ks: Vec<u64> = ints(ks)?.into_iter().map(|k| k.max(0) as u64).collect();
            SubgroupSpec::coordinate_levels(g, &ks)
        }
        ["congruence", m] => SubgroupSpec::congruence(g, uint(m)?),
        ["char", m, cs] => SubgroupSpec::abelian_character(g, uint(m)?, &ints(cs)?),
        ["wreath", n] => SubgroupSpec::wreath_level(g, uint(n)?),
        ["semi", m, l] => SubgroupSpec::semidirect_level(g, uint(m)?, uint(l)?),
        ["rot", n] => SubgroupSpec::dihedral_rotations(g, uint(n)?),
        ["refl", n, j] => SubgroupSpec::dihedral_with_reflection(g, uint(n)?, j.trim().parse().map_err(|_| bad())?),
        _ => Err(bad()),
    }
}
