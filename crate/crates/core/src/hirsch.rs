//! Hirsch length of elementary amenable groups described as extension trees.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::groups::{Family, MarkedGroup};

/// How a group is assembled from abelian and finite pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionTree {
    /// `Z^rank ⊕ (finite abelian group with the given cyclic orders)`.
    AbelianLeaf { rank: u64, torsion: Vec<u64> },
    FiniteLeaf(u64),
    /// `1 -> normal -> G -> quotient -> 1`.
    Extension { normal: Box<ExtensionTree>, quotient: Box<ExtensionTree> },
    /// An increasing union. With `continues` set the listed members are the
    /// start of an infinite chain extrapolated from its last two members.
    DirectedUnion { members: Vec<ExtensionTree>, continues: bool },
}

/// A Hirsch length; `Infinite` for unbounded directed unions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hirsch {
    Finite(u64),
    Infinite,
}

impl Add for Hirsch {
    type Output = Hirsch;

    fn add(self, other: Hirsch) -> Hirsch {
        match (self, other) {
            (Hirsch::Finite(a), Hirsch::Finite(b)) => Hirsch::Finite(a + b),
            _ => Hirsch::Infinite,
        }
    }
}

impl fmt::Display for Hirsch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hirsch::Finite(n) => write!(f, "{n}"),
            Hirsch::Infinite => write!(f, "inf"),
        }
    }
}

impl ExtensionTree {
    pub fn abelian(rank: u64) -> Self {
        ExtensionTree::AbelianLeaf {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn extension(normal: ExtensionTree, quotient: ExtensionTree) -> Self {
        ExtensionTree::Extension {
            normal: Box::new(normal),
            quotient: Box::new(quotient),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExtensionTree::AbelianLeaf { torsion, .. } => {
                if torsion.contains(&0) {
                    return Err(Error::Domain("torsion orders must be positive".into()));
                }
            }
            ExtensionTree::FiniteLeaf(order) => {
                if *order == 0 {
                    return Err(Error::Domain("finite leaves have order at least 1".into()));
                }
            }
            ExtensionTree::Extension { normal, quotient } => {
                normal.validate()?;
                quotient.validate()?;
            }
            ExtensionTree::DirectedUnion { members, .. } => {
                if members.is_empty() {
                    return Err(Error::Domain("a directed union needs at least one member".into()));
                }
                for m in members {
                    m.validate()?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExtensionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionTree::AbelianLeaf { rank, torsion } => {
                write!(f, "ab({rank}")?;
                for t in torsion {
                    write!(f, ", {t}")?;
                }
                write!(f, ")")
            }
            ExtensionTree::FiniteLeaf(n) => write!(f, "fin({n})"),
            ExtensionTree::Extension { normal, quotient } => write!(f, "ext({normal}, {quotient})"),
            ExtensionTree::DirectedUnion { members, continues } => {
                let parts: Vec<String> = members.iter().map(|m| m.to_string()).collect();
                write!(f, "union({}{})", parts.join(", "), if *continues { ", ..." } else { "" })
            }
        }
    }
}

/// `h(A) = dim_Q(A ⊗ Q)` on leaves, additive over extensions, supremum over
/// unions. A continuing union whose last two members still grow is unbounded.
pub fn hirsch_length(t: &ExtensionTree) -> Hirsch {
    match t {
        ExtensionTree::AbelianLeaf { rank, .. } => Hirsch::Finite(*rank),
        ExtensionTree::FiniteLeaf(_) => Hirsch::Finite(0),
        ExtensionTree::Extension { normal, quotient } => hirsch_length(normal) + hirsch_length(quotient),
        ExtensionTree::DirectedUnion { members, continues } => {
            let values: Vec<Hirsch> = members.iter().map(hirsch_length).collect();
            let growing = values.len() >= 2 && values[values.len() - 1] > values[values.len() - 2];
            if *continues && growing {
                Hirsch::Infinite
            } else {
                values.into_iter().max().expect("validated unions are nonempty")
            }
        }
    }
}

/// The canonical tree of a supported family.
pub fn builtin_tree(family: &Family) -> ExtensionTree {
    use ExtensionTree as T;
    let lamps = |k: u64| T::DirectedUnion {
        members: (1..=3).map(|i| T::FiniteLeaf(k.pow(i))).collect(),
        continues: true,
    };
    match family {
        Family::FreeAbelian(n) => T::abelian(*n as u64),
        Family::FiniteCyclicProduct(ks) => T::AbelianLeaf {
            rank: 0,
            torsion: ks.clone(),
        },
        Family::Heisenberg3 => T::extension(T::abelian(1), T::abelian(2)),
        Family::InfiniteDihedral => T::extension(T::abelian(1), T::FiniteLeaf(2)),
        Family::WreathLamp(k) => T::extension(lamps(*k), T::abelian(1)),
        Family::SemidirectZnZ(a) => T::extension(T::abelian(a.dim() as u64), T::abelian(1)),
    }
}

pub fn hirsch_of_builtin(g: &MarkedGroup) -> u64 {
    match hirsch_length(&builtin_tree(g.family())) {
        Hirsch::Finite(n) => n,
        Hirsch::Infinite => unreachable!("built-in groups have finite Hirsch length"),
    }
}

/// Parses `ext(a, b)`, `ab(n)`, `ab(n, t1, t2, ..)`, `fin(n)` and
/// `union(a, b, ..)`, where a trailing `...` marks a continuing union.
pub fn parse_tree(text: &str) -> Result<ExtensionTree> {
    let mut p = Parser { s: text.as_bytes(), i: 0 };
    let t = p.tree()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.error("trailing input"));
    }
    t.validate()?;
    Ok(t)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

enum Item {
    Tree(ExtensionTree),
    Number(u64),
    Ellipsis,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} of the tree expression", self.i))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> &str {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i]).expect("ascii")
    }

    fn item(&mut self) -> Result<Item> {
        self.ws();
        if self.s[self.i..].starts_with(b"...") {
            self.i += 3;
            return Ok(Item::Ellipsis);
        }
        if self.s.get(self.i).is_some_and(|c| c.is_ascii_digit()) {
            let w = self.word().to_string();
            return w.parse().map(Item::Number).map_err(|_| self.error("bad number"));
        }
        self.tree().map(Item::Tree)
    }

    fn tree(&mut self) -> Result<ExtensionTree> {
        let head = self.word().to_string();
        if !self.eat(b'(') {
            return Err(self.error("expected '('"));
        }
        let mut items = Vec::new();
        if !self.eat(b')') {
            loop {
                items.push(self.item()?);
                if self.eat(b')') {
                    break;
                }
                if !self.eat(b',') {
                    return Err(self.error("expected ',' or ')'"));
                }
            }
        }
        let numbers = |items: &[Item]| -> Option<Vec<u64>> {
            items
                .iter()
                .map(|it| match it {
                    Item::Number(n) => Some(*n),
                    _ => None,
                })
                .collect()
        };
        match head.as_str() {
            "ab" => match numbers(&items).as_deref() {
                Some([rank, torsion @ ..]) => Ok(ExtensionTree::AbelianLeaf {
                    rank: *rank,
                    torsion: torsion.to_vec(),
                }),
                _ => Err(self.error("ab takes a rank and optional torsion orders")),
            },
            "fin" => match numbers(&items).as_deref() {
                Some([n]) => Ok(ExtensionTree::FiniteLeaf(*n)),
                _ => Err(self.error("fin takes one order")),
            },
            "ext" => {
                let mut it = items.into_iter();
                match (it.next(), it.next(), it.next()) {
                    (Some(Item::Tree(a)), Some(Item::Tree(b)), None) => Ok(ExtensionTree::extension(a, b)),
                    _ => Err(self.error("ext takes two trees")),
                }
            }
            "union" => {
                let mut members = Vec::new();
                let mut continues = false;
                for it in items {
                    match it {
                        Item::Tree(t) if !continues => members.push(t),
                        Item::Ellipsis if !continues && !members.is_empty() => continues = true,
                        _ => return Err(self.error("union takes trees, optionally followed by '...'")),
                    }
                }
                Ok(ExtensionTree::DirectedUnion { members, continues })
            }
            _ => Err(self.error("unknown node")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::IntMatrix;

    #[test]
    fn examples() {
        assert_eq!(hirsch_length(&ExtensionTree::abelian(3)), Hirsch::Finite(3));
        assert_eq!(hirsch_length(&parse_tree("ext(ab(1), ab(2))").unwrap()), Hirsch::Finite(3));
        let lamp = parse_tree("ext(union(fin(2), fin(4), fin(8), ...), ab(1))").unwrap();
        assert_eq!(hirsch_length(&lamp), Hirsch::Finite(1));
    }

    #[test]
    fn unbounded_union() {
        let t = parse_tree("union(ab(1), ab(2), ...)").unwrap();
        assert_eq!(hirsch_length(&t), Hirsch::Infinite);
        let t = parse_tree("union(ab(1), ab(2))").unwrap();
        assert_eq!(hirsch_length(&t), Hirsch::Finite(2));
    }

    #[test]
    fn builtins() {
        let g = |f| MarkedGroup::standard(f).unwrap();
        assert_eq!(hirsch_of_builtin(&g(Family::FreeAbelian(4))), 4);
        let a = IntMatrix::new(2, vec![2, 1, 1, 1]).unwrap();
        assert_eq!(hirsch_of_builtin(&g(Family::SemidirectZnZ(a))), 3);
        assert_eq!(hirsch_of_builtin(&g(Family::FiniteCyclicProduct(vec![2, 3]))), 0);
        assert_eq!(hirsch_of_builtin(&g(Family::Heisenberg3)), 3);
        assert_eq!(hirsch_of_builtin(&g(Family::InfiniteDihedral)), 1);
        assert_eq!(hirsch_of_builtin(&g(Family::WreathLamp(2))), 1);
    }

    #[test]
    fn round_trip() {
        for s in ["ab(2, 3, 4)", "ext(fin(6), union(ab(0), ab(1), ...))", "union(fin(2))"] {
            let t = parse_tree(s).unwrap();
            assert_eq!(parse_tree(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn rejects() {
        for s in ["ab()", "fin(0)", "union()", "ext(ab(1))", "foo(1)", "union(...)", "ab(1) x"] {
            assert!(parse_tree(s).is_err(), "{s}");
        }
    }
}
