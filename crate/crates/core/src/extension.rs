//! Split extensions `1 -> N -> G -> K -> 1`, the induced map
//! `ρ: G/H -> K/π(H)` and the fibre structure of finite quotients.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::covers::Cover;
use crate::error::{Error, Result};
use crate::groups::{Family, GroupElement, InGroup, MarkedGroup};
use crate::perm::{closure, normal_closure, Perm, PermSubgroup};
use crate::quotients::{build_quotient, FiniteQuotient, SubgroupSpec};
use crate::scalar::{self, Scalar};

/// A split extension of one of the supported families over its standard
/// normal subgroup.
#[derive(Debug, Clone)]
pub struct ExtensionData {
    label: String,
    g: MarkedGroup,
    k: MarkedGroup,
    /// `N` with its own marking; absent when `N` is not finitely generated.
    n: Option<MarkedGroup>,
    /// Elements of `G` whose normal closure is `N`.
    n_words: Vec<GroupElement>,
    /// `π` on the canonical generators of `G`.
    pi_images: Vec<GroupElement>,
    /// The section on the canonical generators of `K`.
    section_images: Vec<GroupElement>,
    /// The inclusion on the canonical generators of `N`.
    embed_images: Vec<GroupElement>,
}

fn unit_vector(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

impl ExtensionData {
    /// The catalog extension for the family of `g`:
    ///
    /// * `Z^n` over `Z^(n-1) x 0` with quotient `Z` (the last coordinate),
    /// * `D∞` over `<r>` with quotient `Z/2`,
    /// * `Z/k ≀ Z` over the lamp group with quotient `Z`,
    /// * `Z^n ⋊_A Z` over `Z^n` with quotient `Z`.
    pub fn standard(g: &MarkedGroup) -> Result<Self> {
        use GroupElement::{Abelian, Dihedral, Lamp, Semidirect};
        let z = Family::FreeAbelian(1);
        let (label, k_family, n_family, n_words, pi_images, section_images, embed_images) = match g.family() {
            Family::FreeAbelian(n) if *n >= 2 => {
                let n = *n;
                let pi = (0..n).map(|i| Abelian(vec![(i == n - 1) as i64])).collect();
                let embed: Vec<GroupElement> = (0..n - 1).map(|i| Abelian(unit_vector(n, i))).collect();
                (
                    format!("Z^{n} over Z^{}", n - 1),
                    z,
                    Some(Family::FreeAbelian(n - 1)),
                    embed.clone(),
                    pi,
                    vec![Abelian(unit_vector(n, n - 1))],
                    embed,
                )
            }
            Family::InfiniteDihedral => {
                let r = Dihedral { rot: 1, flip: false };
                (
                    "D_inf over <r>".to_string(),
                    Family::FiniteCyclicProduct(vec![2]),
                    Some(z),
                    vec![r.clone()],
                    vec![Abelian(vec![0]), Abelian(vec![1])],
                    vec![Dihedral { rot: 0, flip: true }],
                    vec![r],
                )
            }
            Family::WreathLamp(k) => {
                let a = Lamp {
                    lamps: BTreeMap::from([(0, 1)]),
                    shift: 0,
                };
                (
                    format!("Z/{k} wr Z over its lamp group"),
                    z,
                    None,
                    vec![a],
                    vec![Abelian(vec![1]), Abelian(vec![0])],
                    vec![Lamp {
                        lamps: BTreeMap::new(),
                        shift: 1,
                    }],
                    Vec::new(),
                )
            }
            Family::SemidirectZnZ(a) => {
                let n = a.dim();
                let embed: Vec<GroupElement> = (0..n)
                    .map(|i| Semidirect {
                        v: unit_vector(n, i),
                        shift: 0,
                    })
                    .collect();
                let mut pi: Vec<GroupElement> = vec![Abelian(vec![0]); n];
                pi.push(Abelian(vec![1]));
                (
                    format!("Z^{n} : Z over Z^{n}"),
                    z,
                    Some(Family::FreeAbelian(n)),
                    embed.clone(),
                    pi,
                    vec![Semidirect {
                        v: vec![0; n],
                        shift: 1,
                    }],
                    embed,
                )
            }
            f => {
                return Err(Error::Unsupported(format!(
                    "no catalog extension for {}",
                    f.name()
                )))
            }
        };
        // K carries the image marking, so that its word metric is the
        // quotient metric of G.
        let mut k_gens = Vec::new();
        let mut k_labels = Vec::new();
        let mut k_weights = Vec::new();
        let g_family = g.family();
        for ((x, label), w) in g.generators().iter().zip(g.labels()).zip(g.weights()) {
            let img = g_family
                .evaluate(x, &Self::wrap(&k_family, &pi_images))
                .element;
            if img != k_family.identity() {
                k_gens.push(img);
                k_labels.push(format!("pi({label})"));
                k_weights.push(*w);
            }
        }
        let k = if k_gens.is_empty() {
            return Err(Error::Domain("the marking of G projects trivially".into()));
        } else {
            MarkedGroup::with_generators(k_family, k_gens, k_labels, k_weights, g.limits().clone())?
        };
        let n = match n_family {
            Some(f) => Some(MarkedGroup::standard(f)?.with_limits(g.limits().clone())),
            None => None,
        };
        let ext = ExtensionData {
            label,
            g: g.clone(),
            k,
            n,
            n_words,
            pi_images,
            section_images,
            embed_images,
        };
        ext.validate(&scalar::int(2))?;
        Ok(ext)
    }

    fn wrap<'a>(family: &'a Family, elements: &[GroupElement]) -> Vec<InGroup<'a>> {
        elements
            .iter()
            .map(|e| InGroup {
                family,
                element: e.clone(),
            })
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn g(&self) -> &MarkedGroup {
        &self.g
    }

    pub fn k(&self) -> &MarkedGroup {
        &self.k
    }

    pub fn n(&self) -> Option<&MarkedGroup> {
        self.n.as_ref()
    }

    /// Elements of `G` whose normal closure is `N`.
    pub fn n_words(&self) -> &[GroupElement] {
        &self.n_words
    }

    /// `π(g)`.
    pub fn project(&self, g: &GroupElement) -> GroupElement {
        self.g
            .family()
            .evaluate(g, &Self::wrap(self.k.family(), &self.pi_images))
            .element
    }

    /// The section `K -> G`.
    pub fn section(&self, k: &GroupElement) -> GroupElement {
        self.k
            .family()
            .evaluate(k, &Self::wrap(self.g.family(), &self.section_images))
            .element
    }

    /// The inclusion `N -> G`.
    pub fn embed(&self, n: &GroupElement) -> Result<GroupElement> {
        let nm = self
            .n
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("N is not finitely generated in {}", self.label)))?;
        Ok(nm
            .family()
            .evaluate(n, &Self::wrap(self.g.family(), &self.embed_images))
            .element)
    }

    /// Membership in `N` by normal form, independent of `π`.
    pub fn in_normal(&self, g: &GroupElement) -> bool {
        match g {
            GroupElement::Abelian(v) => *v.last().expect("nonempty") == 0,
            GroupElement::Dihedral { flip, .. } => !flip,
            GroupElement::Lamp { shift, .. } | GroupElement::Semidirect { shift, .. } => *shift == 0,
            GroupElement::Heisenberg(_) => false,
        }
    }

    /// Checks on the ball `B_r(e)` of `G` that `π` is a homomorphism with
    /// kernel `N`, that the section splits `π`, and that `N` is normal.
    pub fn validate(&self, r: &Scalar) -> Result<()> {
        let g = &self.g;
        let kf = self.k.family();
        let ball: Vec<GroupElement> = g.ball_lengths(g.threshold(r)?)?.into_iter().map(|(x, _)| x).collect();
        let images: Vec<GroupElement> = ball.iter().map(|x| self.project(x)).collect();
        for (x, px) in ball.iter().zip(&images) {
            if (*px == kf.identity()) != self.in_normal(x) {
                return Err(Error::Integrity(format!("kernel of π differs from N at {x}")));
            }
            if self.project(&self.section(px)) != *px {
                return Err(Error::Integrity(format!("section does not split π at {px}")));
            }
            for (y, py) in ball.iter().zip(&images) {
                if self.project(&g.mul(x, y)) != kf.mul(px, py) {
                    return Err(Error::Integrity(format!("π is not multiplicative at ({x}, {y})")));
                }
            }
        }
        for nw in &self.n_words {
            if !self.in_normal(nw) {
                return Err(Error::Integrity(format!("generator {nw} of N is not in N")));
            }
            for s in g.steps() {
                let c = g.mul(&g.mul(&s.element, nw), &g.inv(&s.element));
                if !self.in_normal(&c) {
                    return Err(Error::Integrity(format!("N is not normal: {} conjugates {nw} outside", s.label)));
                }
            }
        }
        Ok(())
    }
}

/// The map `ρ: G/H -> K/π(H)` with its fibres.
#[derive(Debug, Clone)]
pub struct RhoTable {
    ext: ExtensionData,
    q_g: FiniteQuotient,
    q_k: FiniteQuotient,
    /// `φ(N)` inside the target of `H`'s homomorphism.
    phi_n: PermSubgroup,
    map: Vec<usize>,
    fibers: Vec<Vec<usize>>,
}

impl RhoTable {
    pub fn ext(&self) -> &ExtensionData {
        &self.ext
    }

    pub fn h(&self) -> &SubgroupSpec {
        self.q_g.spec()
    }

    /// `π(H)` as a subgroup of `K`.
    pub fn pi_h(&self) -> &SubgroupSpec {
        self.q_k.spec()
    }

    pub fn quotient_g(&self) -> &FiniteQuotient {
        &self.q_g
    }

    pub fn quotient_k(&self) -> &FiniteQuotient {
        &self.q_k
    }

    pub fn phi_n(&self) -> &PermSubgroup {
        &self.phi_n
    }

    /// `map()[c]` is `ρ(c)`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `fibers()[y]` is `ρ^-1(y)`, sorted.
    pub fn fibers(&self) -> &[Vec<usize>] {
        &self.fibers
    }

    /// `N` acting on a coset of `G/H` through `φ(N)`: the set `p_G(gN)`
    /// for `c = gH`, since `N` is normal.
    pub fn n_orbit(&self, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .phi_n
            .elements()
            .iter()
            .map(|p| self.q_g.act_target(p, c))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

struct Induced {
    spec: SubgroupSpec,
    phi_n: PermSubgroup,
    /// `M = φ(N) T_H`; points of `G/NH` are its left cosets.
    m: PermSubgroup,
    points: HashMap<Perm, usize>,
}

/// `π(H)` as a subgroup spec on `K`: the stabilizer of the base point of
/// `K` acting on `G/NH` through the section.
fn induced_spec(ext: &ExtensionData, h: &SubgroupSpec) -> Result<Induced> {
    let cap = ext.g.limits().target_order;
    let degree = h.degree();
    let n_images: Vec<Perm> = ext.n_words.iter().map(|x| h.phi(x)).collect();
    let phi_n = PermSubgroup::from_elements(degree, normal_closure(degree, &n_images, h.images(), cap)?);
    let mut gens: Vec<Perm> = phi_n.elements().to_vec();
    gens.extend(h.subgroup().elements().iter().cloned());
    let m = PermSubgroup::generated(degree, &gens, cap)?;
    let start = m.coset_key(&Perm::identity(degree));
    let mut points = vec![start.clone()];
    let mut lookup = HashMap::from([(start, 0usize)]);
    let mut i = 0;
    while i < points.len() {
        for img in h.images() {
            let key = m.coset_key(&img.compose(&points[i]));
            if !lookup.contains_key(&key) {
                lookup.insert(key.clone(), points.len());
                points.push(key);
            }
        }
        i += 1;
    }
    let k_images: Vec<Perm> = ext
        .k
        .family()
        .canonical_generators()
        .iter()
        .map(|(kappa, _)| {
            let p = h.phi(&ext.section(kappa));
            Perm::from_fn(points.len(), |i| lookup[&m.coset_key(&p.compose(&points[i]))])
        })
        .collect::<Result<_>>()?;
    let image = closure(points.len(), &k_images, cap)?;
    let stabilizer: Vec<Perm> = image.into_iter().filter(|p| p.apply(0) == 0).collect();
    let spec = SubgroupSpec::new(ext.k.clone(), k_images, &stabilizer, format!("pi({})", h.label()))
        .map_err(|e| Error::Integrity(format!("π(H) is inconsistent: {e}")))?;
    Ok(Induced {
        spec,
        phi_n,
        m,
        points: lookup,
    })
}

/// `π(H)` for a subgroup `H` of `G`.
pub fn induced_subgroup(ext: &ExtensionData, h: &SubgroupSpec) -> Result<SubgroupSpec> {
    Ok(induced_spec(ext, h)?.spec)
}

/// Builds `ρ` by projecting shortest coset representatives. Each coset is
/// also sent to `G/NH` through its key alone; agreement of the two routes
/// shows `ρ` is constant on cosets.
pub fn rho_map(ext: &ExtensionData, h: &SubgroupSpec) -> Result<RhoTable> {
    if h.host() != &ext.g {
        return Err(Error::Domain("H must be a subgroup of the extension's G".into()));
    }
    let induced = induced_spec(ext, h)?;
    let q_g = build_quotient(h)?;
    let q_k = build_quotient(&induced.spec)?;
    if q_k.index() != induced.points.len() {
        return Err(Error::Integrity("K/π(H) and G/NH have different sizes".into()));
    }
    let mut map = Vec::with_capacity(q_g.index());
    for (c, rep) in q_g.reps().iter().enumerate() {
        let y = q_k.project(&ext.project(rep));
        let point = induced.points[&induced.m.coset_key(q_g.key(c))];
        if q_k.key(y).apply(0) != point {
            return Err(Error::Integrity(format!("ρ is not constant on the coset {c}")));
        }
        map.push(y);
    }
    let mut fibers = vec![Vec::new(); q_k.index()];
    for (c, &y) in map.iter().enumerate() {
        fibers[y].push(c);
    }
    if fibers.iter().any(|f| f.is_empty()) {
        return Err(Error::Integrity("ρ is not surjective".into()));
    }
    Ok(RhoTable {
        ext: ext.clone(),
        q_g,
        q_k,
        phi_n: induced.phi_n,
        map,
        fibers,
    })
}

/// Outcome of one clause of the key lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseResult {
    pub clause: u8,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct KeyLemmaReport {
    pub label: String,
    pub r: Scalar,
    pub index_g: usize,
    pub index_k: usize,
    pub clauses: Vec<ClauseResult>,
    /// Set when some clause could only be checked on a window of `G`.
    /// Every check below is exhaustive on the finite quotients, so this
    /// stays false; it is kept so reports from other sources can set it.
    pub window_limited: bool,
}

impl KeyLemmaReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }
}

fn clause(clause: u8, failure: Option<String>, ok: String) -> ClauseResult {
    match failure {
        None => ClauseResult {
            clause,
            passed: true,
            detail: ok,
        },
        Some(detail) => ClauseResult {
            clause,
            passed: false,
            detail,
        },
    }
}

/// Checks the five clauses of the key lemma for `H` at scale `r`.
pub fn verify_key_lemma(ext: &ExtensionData, h: &SubgroupSpec, r: &Scalar) -> Result<KeyLemmaReport> {
    let rt = rho_map(ext, h)?;
    let (qg, qk) = (&rt.q_g, &rt.q_k);
    let g = &ext.g;
    let r_ticks = g.threshold(r)?;
    let mut clauses = Vec::with_capacity(5);

    // (1) ρ ∘ p_G = p_K ∘ π on a window, equivariance, and ρ(H) = π(H).
    let max_step = g.steps().iter().map(|s| s.ticks).max().unwrap_or(0);
    let window = g.ball_lengths(r_ticks.max(max_step))?;
    let mut fail = None;
    if rt.map[0] != 0 {
        fail = Some("ρ(H) is not the base coset".to_string());
    }
    for (x, _) in &window {
        if fail.is_some() {
            break;
        }
        if rt.map[qg.project(x)] != qk.project(&ext.project(x)) {
            fail = Some(format!("ρ(p_G({x})) != p_K(π({x}))"));
        }
    }
    for (c, row) in qg.edges().iter().enumerate() {
        if fail.is_some() {
            break;
        }
        for (k, &d) in row.iter().enumerate() {
            let s = &g.steps()[k];
            if rt.map[d] != qk.act(&ext.project(&s.element), rt.map[c]) {
                fail = Some(format!("ρ is not equivariant under {} at coset {c}", s.label));
                break;
            }
        }
    }
    clauses.push(clause(
        1,
        fail,
        format!("commutes on {} window elements, equivariant on {} cosets", window.len(), qg.index()),
    ));

    // (2) every fibre is p_G(gN).
    let mut fail = None;
    for (y, fiber) in rt.fibers.iter().enumerate() {
        if rt.n_orbit(fiber[0]) != *fiber {
            fail = Some(format!("fibre over {y} is not an N-orbit"));
            break;
        }
    }
    clauses.push(clause(2, fail, format!("{} fibres are N-orbits", rt.fibers.len())));

    // (3) [G:H] = [K:π(H)] [N : N ∩ H], and fibre sizes are [N : N ∩ gHg^-1].
    let pn = &rt.phi_n;
    let base_index = pn.order() / pn.intersection(h.subgroup()).order();
    let mut fail = None;
    if qg.index() != qk.index() * base_index {
        fail = Some(format!("{} != {} * {}", qg.index(), qk.index(), base_index));
    }
    for fiber in &rt.fibers {
        let conj = h.subgroup().conjugate(&h.phi(&qg.reps()[fiber[0]]));
        let expected = pn.order() / pn.intersection(&conj).order();
        if fail.is_none() && fiber.len() != expected {
            fail = Some(format!("fibre of size {} where [N : N∩gHg^-1] = {expected}", fiber.len()));
        }
    }
    clauses.push(clause(
        3,
        fail,
        format!("{} = {} * {}", qg.index(), qk.index(), base_index),
    ));

    // (4) d_K(y, y') = min over the fibres of d_G.
    let mut fail = None;
    'pairs: for y in 0..qk.index() {
        for z in y..qk.index() {
            let min = rt.fibers[y]
                .iter()
                .flat_map(|&a| rt.fibers[z].iter().map(move |&b| (a, b)))
                .map(|(a, b)| qg.space().ticks(a, b))
                .min()
                .expect("fibres are nonempty");
            let dk = qk.space().ticks(y, z);
            if qg.space().to_scalar(min) != qk.space().to_scalar(dk) {
                fail = Some(format!("d_K({y},{z}) differs from the fibre distance"));
                break 'pairs;
            }
        }
    }
    clauses.push(clause(
        4,
        fail,
        format!("{} coset pairs", qk.index() * (qk.index() + 1) / 2),
    ));

    // (5) ρ^-1(P(y; R)) = p_G(P(N; R) g), the fibre is an R-net in it, and
    // the fibre is isometric to the N-orbit of gHg^-1 in G/gHg^-1.
    let ball: Vec<GroupElement> = g.ball_lengths(r_ticks)?.into_iter().map(|(x, _)| x).collect();
    let r_k = qk.space().threshold(r);
    let mut fail = None;
    for (y, fiber) in rt.fibers.iter().enumerate() {
        let mut pre: Vec<usize> = (0..qk.index())
            .filter(|&z| qk.space().ticks(y, z) <= r_k)
            .flat_map(|z| rt.fibers[z].iter().copied())
            .collect();
        pre.sort_unstable();
        let mut swept: Vec<usize> = ball
            .iter()
            .flat_map(|v| fiber.iter().map(move |&f| (v, f)))
            .map(|(v, f)| qg.act(v, f))
            .collect();
        swept.sort_unstable();
        swept.dedup();
        if pre != swept {
            fail = Some(format!("ρ^-1(P({y};R)) differs from p_G(P(N;R)g)"));
            break;
        }
        let r_g = qg.space().threshold(r);
        if let Some(&x) = pre.iter().find(|&&x| fiber.iter().all(|&f| qg.space().ticks(x, f) > r_g)) {
            fail = Some(format!("coset {x} is farther than R from the fibre over {y}"));
            break;
        }
        if let Some(why) = fiber_isometry_failure(&rt, fiber[0])? {
            fail = Some(why);
            break;
        }
    }
    clauses.push(clause(
        5,
        fail,
        format!("{} fibres, ball of {} elements", rt.fibers.len(), ball.len()),
    ));

    Ok(KeyLemmaReport {
        label: format!("{} / {}", ext.label, h.label()),
        r: *r,
        index_g: qg.index(),
        index_k: qk.index(),
        clauses,
        window_limited: false,
    })
}

/// Compares the fibre through `c = gH` with the `N`-orbit of the base coset
/// of `G/gHg^-1`, matched through `nH ↦ n gHg^-1`.
fn fiber_isometry_failure(rt: &RhoTable, c: usize) -> Result<Option<String>> {
    let qg = &rt.q_g;
    let g = &qg.reps()[c];
    let model = build_quotient(&qg.spec().conjugate(g))?;
    let mut pairs: HashMap<usize, usize> = HashMap::new();
    for p in rt.phi_n.elements() {
        let a = qg.act_target(p, c);
        let b = model.act_target(p, 0);
        if *pairs.entry(a).or_insert(b) != b {
            return Ok(Some(format!("fibre through {c} does not match its model")));
        }
    }
    let images: HashSet<usize> = pairs.values().copied().collect();
    if images.len() != pairs.len() {
        return Ok(Some(format!("fibre through {c} is not injective into its model")));
    }
    for (&a, &b) in &pairs {
        for (&a2, &b2) in &pairs {
            if qg.distance(a, a2) != model.distance(b, b2) {
                return Ok(Some(format!("fibre through {c} is not isometric to its model")));
            }
        }
    }
    Ok(None)
}

/// Assembles a cover of `G/H` from a cover of `K/π(H)` and one cover per
/// fibre. Member `(U, j)` is the union of the `j`-th member of every fibre
/// over `U`. Fibre covers use local indices into `rt.fibers()[y]`.
pub fn fiber_product_cover(rt: &RhoTable, base: &Cover, fiber_covers: &[Cover]) -> Result<Cover> {
    if fiber_covers.len() != rt.fibers.len() {
        return Err(Error::Domain(format!(
            "expected {} fibre covers, got {}",
            rt.fibers.len(),
            fiber_covers.len()
        )));
    }
    let width = fiber_covers.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut members = Vec::new();
    for u in base.members() {
        for j in 0..width {
            let mut member: Vec<usize> = u
                .iter()
                .filter_map(|&y| fiber_covers[y].members().get(j).map(|v| (y, v)))
                .flat_map(|(y, v)| v.iter().map(move |&i| rt.fibers[y][i]))
                .collect();
            member.sort_unstable();
            member.dedup();
            if !member.is_empty() {
                members.push(member);
            }
        }
    }
    let space = rt.q_g.space();
    let s = members
        .iter()
        .map(|m| space.diameter_ticks_of(m))
        .max()
        .unwrap_or(0);
    Cover::new(space, members, scalar::int(0), space.to_scalar(s))
}

/// The induced families of a family `σ` of subgroups of `G`.
#[derive(Debug, Clone)]
pub struct Pushforward {
    /// `π(G_α)` for every member, repetitions kept.
    pub pi_sigma: Vec<SubgroupSpec>,
    /// `N ∩ g G_α g^-1` over coset representatives of `G / N G_α`, coalesced.
    pub sigma_hat: Vec<SubgroupSpec>,
}

/// Computes `π(σ)` and `σ̂`. The latter needs a finitely generated `N`.
pub fn pushforward_family(ext: &ExtensionData, sigma: &[SubgroupSpec]) -> Result<Pushforward> {
    let n_group = ext.n.as_ref().ok_or_else(|| {
        Error::Unsupported(format!("σ̂ needs a finitely generated N, which {} lacks", ext.label))
    })?;
    let n_gens = n_group.family().canonical_generators();
    let mut pi_sigma = Vec::with_capacity(sigma.len());
    let mut sigma_hat: Vec<SubgroupSpec> = Vec::new();
    let mut seen = HashSet::new();
    for h in sigma {
        if h.host() != &ext.g {
            return Err(Error::Domain(format!("{} is not a subgroup of G", h.label())));
        }
        let induced = induced_spec(ext, h)?;
        let q_k = build_quotient(&induced.spec)?;
        let images: Vec<Perm> = n_gens
            .iter()
            .map(|(x, _)| Ok(h.phi(&ext.embed(x)?)))
            .collect::<Result<_>>()?;
        for k_rep in q_k.reps() {
            let g = ext.section(k_rep);
            let conj = h.subgroup().conjugate(&h.phi(&g));
            let meet = induced.phi_n.intersection(&conj);
            let label = format!("N∩{g}({}){g}^-1", h.label());
            let spec = SubgroupSpec::new(n_group.clone(), images.clone(), meet.elements(), label)?;
            if seen.insert(spec.key()) {
                sigma_hat.push(spec);
            }
        }
        pi_sigma.push(induced.spec);
    }
    Ok(Pushforward { pi_sigma, sigma_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimsolve::{exact_min_multiplicity, Shape};
    use crate::limits::Limits;

    fn z2() -> ExtensionData {
        ExtensionData::standard(&MarkedGroup::standard(Family::FreeAbelian(2)).unwrap()).unwrap()
    }

    fn dinf() -> ExtensionData {
        ExtensionData::standard(&MarkedGroup::standard(Family::InfiniteDihedral).unwrap()).unwrap()
    }

    #[test]
    fn rho_on_z2() {
        let ext = z2();
        let h = SubgroupSpec::coordinate_levels(ext.g(), &[3, 2]).unwrap();
        let rt = rho_map(&ext, &h).unwrap();
        assert_eq!(rt.quotient_g().index(), 6);
        assert_eq!(rt.quotient_k().index(), 2);
        assert!(rt.fibers().iter().all(|f| f.len() == 3));
    }

    #[test]
    fn rho_on_dihedral() {
        let ext = dinf();
        let h = SubgroupSpec::dihedral_rotations(ext.g(), 4).unwrap();
        let rt = rho_map(&ext, &h).unwrap();
        assert_eq!(rt.quotient_g().index(), 8);
        assert_eq!(rt.quotient_k().index(), 2);
        assert!(rt.fibers().iter().all(|f| f.len() == 4));
    }

    #[test]
    fn whole_group_is_trivial() {
        for ext in [z2(), dinf()] {
            let h = SubgroupSpec::whole(ext.g());
            let rt = rho_map(&ext, &h).unwrap();
            assert_eq!(rt.map(), &[0]);
            let report = verify_key_lemma(&ext, &h, &scalar::int(3)).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn key_lemma_examples() {
        let ext = z2();
        let h = SubgroupSpec::coordinate_levels(ext.g(), &[3, 2]).unwrap();
        let report = verify_key_lemma(&ext, &h, &scalar::int(1)).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.clauses.len(), 5);

        let ext = dinf();
        let h = SubgroupSpec::dihedral_rotations(ext.g(), 4).unwrap();
        let report = verify_key_lemma(&ext, &h, &scalar::int(2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn fibre_of_z2_is_a_three_cycle() {
        let ext = z2();
        let h = SubgroupSpec::coordinate_levels(ext.g(), &[3, 2]).unwrap();
        let rt = rho_map(&ext, &h).unwrap();
        let fiber = rt.quotient_g().space().subspace(&rt.fibers()[0], "fibre");
        let one = scalar::int(1);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(fiber.dist(i, j), if i == j { scalar::int(0) } else { one });
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let ext = z2();
        let h = SubgroupSpec::coordinate_levels(ext.g(), &[3, 2]).unwrap();
        let pf = pushforward_family(&ext, &[h.clone(), h]).unwrap();
        assert_eq!(pf.pi_sigma.len(), 2);
        assert_eq!(build_quotient(&pf.pi_sigma[0]).unwrap().index(), 2);
        assert_eq!(pf.sigma_hat.len(), 1);
        assert_eq!(build_quotient(&pf.sigma_hat[0]).unwrap().index(), 3);

        let ext = dinf();
        let h = SubgroupSpec::dihedral_with_reflection(ext.g(), 3, 0).unwrap();
        let pf = pushforward_family(&ext, &[h]).unwrap();
        assert_eq!(build_quotient(&pf.pi_sigma[0]).unwrap().index(), 1);
        assert_eq!(pf.sigma_hat.len(), 1);
        let n = ext.n().unwrap();
        let q = build_quotient(&pf.sigma_hat[0]).unwrap();
        assert_eq!(q.index(), 3);
        assert!(pf.sigma_hat[0].contains(&GroupElement::Abelian(vec![3])));
        assert!(!pf.sigma_hat[0].contains(&GroupElement::Abelian(vec![1])));
        assert_eq!(q.host(), n);
    }

    #[test]
    fn lamplighter_has_no_sigma_hat() {
        let g = MarkedGroup::standard(Family::WreathLamp(2)).unwrap();
        let ext = ExtensionData::standard(&g).unwrap();
        let h = SubgroupSpec::wreath_level(&g, 2).unwrap();
        assert!(matches!(pushforward_family(&ext, std::slice::from_ref(&h)), Err(Error::Unsupported(_))));
        assert_eq!(induced_subgroup(&ext, &h).map(|s| build_quotient(&s).unwrap().index()).unwrap(), 2);
    }

    #[test]
    fn product_cover_on_z2() {
        let ext = z2();
        let h = SubgroupSpec::coordinate_levels(ext.g(), &[3, 2]).unwrap();
        let rt = rho_map(&ext, &h).unwrap();
        let qk = rt.quotient_k().space();
        // The 2-arc cover of a 2-cycle: the whole space, twice.
        let base = Cover::new(qk, vec![vec![0, 1], vec![1, 0]], scalar::int(1), scalar::int(1)).unwrap();
        let fibre_cover = |y: usize| {
            let sub = rt.quotient_g().space().subspace(&rt.fibers()[y], "fibre");
            Cover::new(&sub, vec![vec![0, 1], vec![1, 2], vec![2, 0]], scalar::int(0), scalar::int(1)).unwrap()
        };
        let fibres: Vec<Cover> = (0..2).map(fibre_cover).collect();
        let product = fiber_product_cover(&rt, &base, &fibres).unwrap();
        assert_eq!(product.multiplicity(), 4);
        assert_eq!(product.len(), 6);
        let direct = exact_min_multiplicity(
            rt.quotient_g().space(),
            &scalar::int(1),
            &scalar::int(1),
            Shape::AllSubsets,
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(direct.value, 2);
    }

    #[test]
    fn singleton_fibres_keep_base_multiplicity() {
        let ext = dinf();
        let h = SubgroupSpec::dihedral_rotations(ext.g(), 4).unwrap();
        let rt = rho_map(&ext, &h).unwrap();
        let base = Cover::new(rt.quotient_k().space(), vec![vec![0, 1], vec![0]], scalar::int(0), scalar::int(1)).unwrap();
        let fibres: Vec<Cover> = rt
            .fibers()
            .iter()
            .map(|f| {
                let sub = rt.quotient_g().space().subspace(f, "fibre");
                Cover::new(&sub, (0..f.len()).map(|i| vec![i]).collect(), scalar::int(0), scalar::int(0)).unwrap()
            })
            .collect();
        let product = fiber_product_cover(&rt, &base, &fibres).unwrap();
        assert_eq!(product.multiplicity(), base.multiplicity());
    }

    #[test]
    fn catalog_validates() {
        let semi = Family::SemidirectZnZ(crate::groups::IntMatrix::new(2, vec![2, 1, 1, 1]).unwrap());
        for f in [Family::FreeAbelian(3), Family::WreathLamp(3), semi] {
            let g = MarkedGroup::standard(f).unwrap();
            let ext = ExtensionData::standard(&g).unwrap();
            let h = SubgroupSpec::congruence(&g, 2).unwrap();
            let report = verify_key_lemma(&ext, &h, &scalar::int(2)).unwrap();
            assert!(report.passed(), "{report:?}");
        }
        assert!(ExtensionData::standard(&MarkedGroup::standard(Family::Heisenberg3).unwrap()).is_err());
    }
}
