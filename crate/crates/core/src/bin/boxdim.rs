//! Command-line front end. Exit status: 0 on success, 1 when a checked
//! property is false, 2 on errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use boxdim::boxspace::{self, BoxFamily};
use boxdim::covers;
use boxdim::dimsolve::{self, Optimality, ScaleDimWitness, Shape, WitnessKind};
use boxdim::extension::{verify_key_lemma, ExtensionData};
use boxdim::formats::{self, parse_group, parse_subgroup};
use boxdim::groups::{parse_element, MarkedGroup};
use boxdim::hirsch::{self, hirsch_length, parse_tree};
use boxdim::quotients::{build_quotient, SubgroupSpec};
use boxdim::scalar::{fmt_scalar, parse_nonneg, Scalar};
use boxdim::separation;
use boxdim::{Error, Limits, Result};

#[derive(Parser)]
#[command(name = "boxdim", version, about = "Box spaces and asymptotic dimension at finite scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Word balls of a marked group.
    Group {
        #[command(subcommand)]
        action: GroupAction,
    },
    /// Finite quotients G/H.
    Quotient {
        #[command(subcommand)]
        action: QuotientAction,
    },
    /// Distances in an edge-list space.
    Metric {
        #[command(subcommand)]
        action: MetricAction,
    },
    /// Separation properties of a subgroup family on a test set.
    Check {
        #[arg(value_enum)]
        condition: CheckKind,
        #[arg(long)]
        group: String,
        /// Subgroup specs separated by ';'.
        #[arg(long)]
        sigma: String,
        /// Elements separated by ';'.
        #[arg(long = "F")]
        f: String,
        /// Semi-conjugacy mode (1, 2 or 3).
        #[arg(long, default_value_t = 1)]
        mode: u8,
    },
    /// Injectivity radius of a quotient map, or the isometry check at scale R.
    Radius {
        #[arg(value_enum)]
        kind: RadiusKind,
        #[arg(long)]
        group: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long = "R")]
        r: Option<String>,
    },
    /// Minimal multiplicity (or colors) at scale R with bound S.
    DimAtScale {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "R")]
        r: String,
        #[arg(long = "S")]
        s: String,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = ShapeArg::All)]
        shape: ShapeArg,
        /// Solve the coloring formulation instead of covers.
        #[arg(long)]
        coloring: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lifts a cover of G/H to a window of G.
    LiftCover {
        #[arg(long)]
        group: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long)]
        cover: PathBuf,
        /// Radius of the region where the lift is claimed to have Lebesgue number R.
        #[arg(long)]
        nominal: String,
        #[arg(long = "S")]
        s: String,
        #[arg(long)]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks of extension structure.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// Hirsch length of a tree expression or a built-in group.
    Hirsch {
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        group: Option<String>,
    },
    /// Box families.
    Box {
        #[arg(value_enum)]
        action: BoxAction,
        #[arg(long)]
        group: String,
        #[arg(long)]
        sigma: String,
        /// λ prefix separated by ','; defaults to 2^k.
        #[arg(long)]
        lambda: Option<String>,
        /// Scales separated by ','.
        #[arg(long = "R")]
        r: Option<String>,
        /// Bound budgets separated by ',', one per scale.
        #[arg(long = "S")]
        s: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GroupAction {
    Ball {
        #[arg(long)]
        group: String,
        #[arg(long = "R")]
        r: String,
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QuotientAction {
    Build {
        #[arg(long)]
        group: String,
        #[arg(long = "H")]
        h: Option<String>,
        /// Coordinate level(s) separated by ','; one value is used for every coordinate.
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MetricAction {
    Dist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    KeyLemma {
        /// The group of the catalog extension.
        #[arg(long)]
        ext: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long = "R")]
        r: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Separating,
    Scs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusKind {
    Inj,
    Iso,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Arcs,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoxAction {
    Assemble,
    Export,
    Report,
}

/// What a subcommand established.
enum Verdict {
    Done,
    False,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match Limits::from_env().and_then(|limits| run(cli.command, &limits)) {
        Ok(Verdict::Done) => ExitCode::SUCCESS,
        Ok(Verdict::False) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn scalars(text: &str) -> Result<Vec<Scalar>> {
    text.split(',').map(parse_nonneg).collect()
}

fn subgroups(g: &MarkedGroup, text: &str) -> Result<Vec<SubgroupSpec>> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(|s| parse_subgroup(g, s)).collect()
}

fn write_out(path: Option<&Path>, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    match path {
        Some(p) => fs::write(p, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn summary(pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        println!("{k}={v}");
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Done
    } else {
        Verdict::False
    }
}

fn run(command: Command, limits: &Limits) -> Result<Verdict> {
    match command {
        Command::Group {
            action: GroupAction::Ball { group, r, center, out },
        } => {
            let g = parse_group(&group, limits)?;
            let c = match center {
                Some(c) => parse_element(g.family(), &c)?,
                None => g.identity(),
            };
            let ball = g.word_ball(&c, &parse_nonneg(&r)?)?;
            write_out(out.as_deref(), |w| {
                for (i, x) in ball.elements.iter().enumerate() {
                    writeln!(w, "{i} {x} {}", fmt_scalar(&ball.space.dist(0, i)))?;
                }
                Ok(())
            })?;
            if out.is_some() {
                summary(&[("points", ball.len().to_string())]);
            }
            Ok(Verdict::Done)
        }
        Command::Quotient {
            action: QuotientAction::Build { group, h, level, out },
        } => {
            let g = parse_group(&group, limits)?;
            let spec = match (h, level) {
                (Some(h), None) => parse_subgroup(&g, &h)?,
                (None, Some(l)) => {
                    let mut ks: Vec<u64> = l
                        .split(',')
                        .map(|x| x.trim().parse().map_err(|_| Error::Parameter(format!("bad level {x:?}"))))
                        .collect::<Result<_>>()?;
                    let n = g.family().canonical_generators().len();
                    if ks.len() == 1 {
                        ks = vec![ks[0]; n];
                    }
                    SubgroupSpec::coordinate_levels(&g, &ks)?
                }
                _ => return Err(Error::Parameter("give exactly one of --H and --level".into())),
            };
            let q = build_quotient(&spec)?;
            write_out(out.as_deref(), |w| formats::write_quotient_edges(&q, w))?;
            if out.is_some() {
                summary(&[("index", q.index().to_string()), ("diameter", fmt_scalar(&q.space().diameter()))]);
            }
            Ok(Verdict::Done)
        }
        Command::Metric {
            action: MetricAction::Dist { space, x, y },
        } => {
            let s = formats::read_edge_list(&fs::read_to_string(space)?)?;
            if x >= s.len() || y >= s.len() {
                return Err(Error::Parameter(format!("points must be below {}", s.len())));
            }
            summary(&[("distance", fmt_scalar(&s.dist(x, y)))]);
            Ok(Verdict::Done)
        }
        Command::Check {
            condition,
            group,
            sigma,
            f,
            mode,
        } => {
            let g = parse_group(&group, limits)?;
            let sigma = subgroups(&g, &sigma)?;
            let f = f
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_element(g.family(), s))
                .collect::<Result<Vec<_>>>()?;
            let report = match condition {
                CheckKind::Separating => separation::is_separating(&sigma, &f)?,
                CheckKind::Scs => separation::is_semi_conjugacy_separating(&sigma, &f, mode)?,
            };
            let witness = report.witness.as_ref().map_or("none".to_string(), |(i, s)| format!("{i}:{}", s.label()));
            summary(&[
                ("condition", report.condition.to_string()),
                ("verdict", report.verdict.to_string()),
                ("witness", witness),
            ]);
            Ok(verdict(report.verdict))
        }
        Command::Radius { kind, group, h, r } => {
            let g = parse_group(&group, limits)?;
            let q = build_quotient(&parse_subgroup(&g, &h)?)?;
            match kind {
                RadiusKind::Inj => {
                    let radius = separation::injectivity_radius(&q)?;
                    summary(&[("radius", radius.map_or("inf".to_string(), |x| fmt_scalar(&x)))]);
                    Ok(Verdict::Done)
                }
                RadiusKind::Iso => {
                    let r = parse_nonneg(r.as_deref().ok_or_else(|| Error::Parameter("--R is required".into()))?)?;
                    let check = separation::verify_isometry_lemma(&q, &r)?;
                    summary(&[
                        ("holds", check.holds.to_string()),
                        ("vacuous", check.vacuous.to_string()),
                        ("pairs", check.pairs_checked.to_string()),
                    ]);
                    Ok(verdict(check.holds))
                }
            }
        }
        Command::DimAtScale {
            space,
            r,
            s,
            mode,
            shape,
            coloring,
            out,
        } => {
            let space = formats::read_edge_list(&fs::read_to_string(space)?)?;
            let (r, s) = (parse_nonneg(&r)?, parse_nonneg(&s)?);
            let shape = match shape {
                ShapeArg::Arcs => Shape::Arcs,
                ShapeArg::All => Shape::AllSubsets,
            };
            let (w, cover) = if coloring {
                let w = dimsolve::exact_min_colors(&space, &r, &s, limits)?;
                let c = dimsolve::colors_to_cover(&space, &w, limits)?;
                (w, c)
            } else if mode == Mode::Greedy {
                let c = covers::greedy_cover(&space, &r, &s, limits)?;
                let w = ScaleDimWitness {
                    label: space.label().to_string(),
                    r,
                    s,
                    kind: WitnessKind::Cover,
                    value: c.multiplicity(),
                    cover: Some(c.clone()),
                    coloring: None,
                    optimality: Optimality::UpperBoundOnly,
                    nodes: 0,
                };
                (w, c)
            } else {
                let w = dimsolve::exact_min_multiplicity(&space, &r, &s, shape, limits)?;
                let c = w.cover.clone().ok_or_else(|| Error::Integrity("solver returned no cover".into()))?;
                (w, c)
            };
            cover.verify(&space, limits)?;
            if let Some(p) = &out {
                write_out(Some(p), |buf| formats::write_witness(&w, &cover, buf))?;
            }
            summary(&[
                ("value", w.value.to_string()),
                (
                    "optimality",
                    match w.optimality {
                        Optimality::Exact => "exact",
                        Optimality::UpperBoundOnly => "upper-bound",
                    }
                    .to_string(),
                ),
                ("nodes", w.nodes.to_string()),
            ]);
            Ok(Verdict::Done)
        }
        Command::LiftCover {
            group,
            h,
            cover,
            nominal,
            s,
            window,
            out,
        } => {
            let g = parse_group(&group, limits)?;
            let q = build_quotient(&parse_subgroup(&g, &h)?)?;
            let u = formats::read_cover(&fs::read_to_string(cover)?, q.space())?;
            let ball = g.word_ball(&g.identity(), &parse_nonneg(&window)?)?;
            let lifted = covers::lift_cover(&q, &u, &ball, &parse_nonneg(&nominal)?, &parse_nonneg(&s)?)?;
            write_out(out.as_deref(), |w| formats::write_cover(&lifted.cover, w))?;
            if out.is_some() {
                summary(&[
                    ("members", lifted.cover.len().to_string()),
                    ("multiplicity", lifted.cover.multiplicity().to_string()),
                ]);
            }
            Ok(Verdict::Done)
        }
        Command::Verify {
            action: VerifyAction::KeyLemma { ext, h, r, out },
        } => {
            let g = parse_group(&ext, limits)?;
            let e = ExtensionData::standard(&g)?;
            let report = verify_key_lemma(&e, &parse_subgroup(&g, &h)?, &parse_nonneg(&r)?)?;
            let text = key_lemma_text(&report);
            match &out {
                Some(p) => fs::write(p, &text)?,
                None => print!("{text}"),
            }
            if out.is_some() {
                summary(&[("passed", report.passed().to_string())]);
            }
            Ok(verdict(report.passed()))
        }
        Command::Hirsch { tree, group } => {
            let h = match (tree, group) {
                (Some(t), None) => hirsch_length(&parse_tree(&t)?),
                (None, Some(g)) => hirsch::Hirsch::Finite(hirsch::hirsch_of_builtin(&parse_group(&g, limits)?)),
                _ => return Err(Error::Parameter("give exactly one of --tree and --group".into())),
            };
            summary(&[("hirsch", h.to_string())]);
            Ok(Verdict::Done)
        }
        Command::Box {
            action,
            group,
            sigma,
            lambda,
            r,
            s,
            out,
        } => {
            let g = parse_group(&group, limits)?;
            let family = BoxFamily::new(&g, &subgroups(&g, &sigma)?)?;
            let lambda = match lambda {
                Some(l) => scalars(&l)?,
                None => boxspace::default_lambda(family.len()),
            };
            match action {
                BoxAction::Assemble => {
                    let b = boxspace::assemble_box(&family, &lambda)?;
                    for h in b.header() {
                        println!("{h}");
                    }
                    summary(&[("points", b.len().to_string())]);
                }
                BoxAction::Export => {
                    let b = boxspace::assemble_box(&family, &lambda)?;
                    let r = parse_nonneg(r.as_deref().ok_or_else(|| Error::Parameter("--R is required".into()))?)?;
                    let path = out.ok_or_else(|| Error::Parameter("--out is required".into()))?;
                    boxspace::export_box_scale_graph(&b, &r, &path)?;
                    summary(&[("points", b.len().to_string())]);
                }
                BoxAction::Report => {
                    let rs = scalars(r.as_deref().ok_or_else(|| Error::Parameter("--R is required".into()))?)?;
                    let ss = scalars(s.as_deref().ok_or_else(|| Error::Parameter("--S is required".into()))?)?;
                    if rs.len() != ss.len() {
                        return Err(Error::Parameter("--R and --S need the same number of entries".into()));
                    }
                    let scales: Vec<(Scalar, Scalar)> = rs.into_iter().zip(ss).collect();
                    let report = boxspace::box_dim_report(&family, &scales, limits)?;
                    for p in &report.profiles {
                        println!(
                            "R={} s_max={} n={} S={} optimality={}",
                            fmt_scalar(&p.r),
                            fmt_scalar(&p.s_max),
                            p.n,
                            fmt_scalar(&p.s),
                            if p.optimality == Optimality::Exact { "exact" } else { "upper-bound" }
                        );
                    }
                    for (label, inj) in report.labels.iter().zip(&report.injectivity) {
                        println!("member={label} injectivity={}", inj.map_or("inf".to_string(), |x| fmt_scalar(&x)));
                    }
                    summary(&[("partial", report.partial.to_string())]);
                }
            }
            Ok(Verdict::Done)
        }
    }
}

fn key_lemma_text(report: &boxdim::extension::KeyLemmaReport) -> String {
    let mut s = format!(
        "# key-lemma {} R={} index_g={} index_k={} window_limited={}\n",
        report.label,
        fmt_scalar(&report.r),
        report.index_g,
        report.index_k,
        report.window_limited
    );
    for c in &report.clauses {
        s.push_str(&format!(
            "clause {} {} {}\n",
            c.clause,
            if c.passed { "pass" } else { "fail" },
            c.detail
        ));
    }
    s
}
