//! Finite polymodal frames: J-frame conditions, planes, J-trees, hereditary
//! roots and bounded model search.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use crate::embed::jmap_check;
use crate::logic::{eval_kripke, Formula, NodeValuation};

/// Errors raised by frame operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    /// The frame fails the J-frame conditions or is not a J-tree.
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}

/// A finite frame on nodes `0..n` with relations `R_0, …, R_{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "FrameRepr", try_from = "FrameRepr")
)]
pub struct JFrame {
    n: usize,
    rel: Vec<Vec<Vec<bool>>>,
}

/// Edge-list form of a frame.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameRepr {
    /// Node count.
    pub nodes: usize,
    /// One edge list per relation.
    pub rels: Vec<Vec<(usize, usize)>>,
}

impl From<JFrame> for FrameRepr {
    fn from(f: JFrame) -> Self {
        FrameRepr {
            nodes: f.n,
            rels: f.edges(),
        }
    }
}

impl TryFrom<FrameRepr> for JFrame {
    type Error = FrameError;

    fn try_from(r: FrameRepr) -> Result<Self, FrameError> {
        if r.rels.iter().flatten().any(|&(x, y)| x >= r.nodes || y >= r.nodes) {
            return Err(FrameError::InvalidFrame("edge endpoint out of range".into()));
        }
        Ok(JFrame::from_edges(r.nodes, &r.rels))
    }
}

impl JFrame {
    /// `n` nodes and `k` empty relations.
    pub fn new(n: usize, k: usize) -> Self {
        JFrame {
            n,
            rel: vec![vec![vec![false; n]; n]; k],
        }
    }

    /// Builds a frame from edge lists, one list per relation.
    pub fn from_edges(n: usize, edges: &[Vec<(usize, usize)>]) -> Self {
        let mut f = JFrame::new(n, edges.len());
        for (k, es) in edges.iter().enumerate() {
            for &(x, y) in es {
                f.add(k, x, y);
            }
        }
        f
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True if there are no nodes.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of relations.
    pub fn rels(&self) -> usize {
        self.rel.len()
    }

    /// Adds `x R_k y`.
    pub fn add(&mut self, k: usize, x: usize, y: usize) {
        self.rel[k][x][y] = true;
    }

    /// `x R_k y`.
    pub fn r(&self, k: usize, x: usize, y: usize) -> bool {
        self.rel[k][x][y]
    }

    /// `R_k`-successors of `x`.
    pub fn successors(&self, k: usize, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&y| self.rel[k][x][y])
    }

    /// Edge lists per relation.
    pub fn edges(&self) -> Vec<Vec<(usize, usize)>> {
        self.rel
            .iter()
            .map(|m| {
                let mut v = Vec::new();
                for (x, row) in m.iter().enumerate() {
                    for (y, &b) in row.iter().enumerate() {
                        if b {
                            v.push((x, y));
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// Least extension closed under transitivity, (I) and (J).
    pub fn j_closure(&self) -> JFrame {
        let mut f = self.clone();
        let k = f.rels();
        loop {
            let mut changed = false;
            let mut set = |f: &mut JFrame, m: usize, x: usize, y: usize| {
                if !f.rel[m][x][y] {
                    f.rel[m][x][y] = true;
                    changed = true;
                }
            };
            for m in 0..k {
                for x in 0..f.n {
                    for y in 0..f.n {
                        if !f.rel[m][x][y] {
                            continue;
                        }
                        for z in 0..f.n {
                            if f.rel[m][y][z] {
                                set(&mut f, m, x, z);
                            }
                            for nn in m + 1..k {
                                if f.rel[nn][y][z] {
                                    set(&mut f, m, x, z);
                                }
                            }
                        }
                    }
                }
            }
            for nn in 0..k {
                for x in 0..f.n {
                    for y in 0..f.n {
                        if !f.rel[nn][x][y] {
                            continue;
                        }
                        for m in 0..nn {
                            for z in 0..f.n {
                                if f.rel[m][x][z] {
                                    set(&mut f, m, y, z);
                                }
                                if f.rel[m][y][z] {
                                    set(&mut f, m, x, z);
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                return f;
            }
        }
    }

    /// The frame restricted to relations `from..`, renumbered from 0.
    pub fn drop_relations(&self, from: usize) -> JFrame {
        JFrame {
            n: self.n,
            rel: self.rel[from..].to_vec(),
        }
    }

    /// The subframe on `nodes` (in the given order).
    pub fn restrict(&self, nodes: &[usize]) -> JFrame {
        let mut f = JFrame::new(nodes.len(), self.rels());
        for k in 0..self.rels() {
            for (i, &x) in nodes.iter().enumerate() {
                for (j, &y) in nodes.iter().enumerate() {
                    f.rel[k][i][j] = self.rel[k][x][y];
                }
            }
        }
        f
    }

    /// Nodes reachable from `x` through any relation, `x` first.
    pub fn generated(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[x] = true;
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            let y = out[i];
            for k in 0..self.rels() {
                for z in 0..self.n {
                    if self.rel[k][y][z] && !seen[z] {
                        seen[z] = true;
                        out.push(z);
                    }
                }
            }
            i += 1;
        }
        out
    }
}

/// A J-frame condition failure with its witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `x R_k x`.
    Reflexive {
        /// Relation.
        k: usize,
        /// Node.
        x: usize,
    },
    /// `x R_k y R_k z` without `x R_k z`.
    NotTransitive {
        /// Relation.
        k: usize,
        /// Witnesses.
        x: usize,
        /// Witnesses.
        y: usize,
        /// Witnesses.
        z: usize,
    },
    /// `x <_n y` but `x <_m z` and `y <_m z` disagree.
    ConditionI {
        /// Lower relation.
        m: usize,
        /// Upper relation.
        n: usize,
        /// Witnesses.
        x: usize,
        /// Witnesses.
        y: usize,
        /// Witnesses.
        z: usize,
    },
    /// `x <_m y <_n z` without `x <_m z`.
    ConditionJ {
        /// Lower relation.
        m: usize,
        /// Upper relation.
        n: usize,
        /// Witnesses.
        x: usize,
        /// Witnesses.
        y: usize,
        /// Witnesses.
        z: usize,
    },
}

/// Result of [`validate_jframe`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JFrameReport {
    /// All violations found.
    pub violations: Vec<Violation>,
}

impl JFrameReport {
    /// True if no violation was found.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks irreflexivity, transitivity, (I) and (J).
pub fn validate_jframe(f: &JFrame) -> JFrameReport {
    let mut v = Vec::new();
    let n = f.len();
    let k = f.rels();
    for r in 0..k {
        for x in 0..n {
            if f.r(r, x, x) {
                v.push(Violation::Reflexive { k: r, x });
            }
            for y in 0..n {
                if !f.r(r, x, y) {
                    continue;
                }
                for z in 0..n {
                    if f.r(r, y, z) && !f.r(r, x, z) {
                        v.push(Violation::NotTransitive { k: r, x, y, z });
                    }
                }
            }
        }
    }
    for hi in 0..k {
        for m in 0..hi {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if f.r(hi, x, y) && f.r(m, x, z) != f.r(m, y, z) {
                            v.push(Violation::ConditionI { m, n: hi, x, y, z });
                        }
                        if f.r(m, x, y) && f.r(hi, y, z) && !f.r(m, x, z) {
                            v.push(Violation::ConditionJ { m, n: hi, x, y, z });
                        }
                    }
                }
            }
        }
    }
    JFrameReport { violations: v }
}

/// The `n`-planes of a frame and the order `≺` on the `(n+1)`-planes inside
/// each of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneDecomposition {
    /// The level `n`.
    pub n: usize,
    /// The `n`-planes as sorted node lists.
    pub planes: Vec<Vec<usize>>,
    /// Index into `planes` for each node.
    pub plane_of: Vec<usize>,
    /// The `(n+1)`-planes as sorted node lists.
    pub subplanes: Vec<Vec<usize>>,
    /// Index into `subplanes` for each node.
    pub subplane_of: Vec<usize>,
    /// Pairs `(a, b)` of subplane indices with `a ≺ b`.
    pub prec: BTreeSet<(usize, usize)>,
}

fn components(f: &JFrame, from: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = f.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut members = Vec::new();
        while let Some(x) = stack.pop() {
            members.push(x);
            for k in from..f.rels() {
                for y in 0..n {
                    if (f.r(k, x, y) || f.r(k, y, x)) && comp[y] == usize::MAX {
                        comp[y] = id;
                        stack.push(y);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    (out, comp)
}

/// Plane decomposition at level `n`.
pub fn planes(f: &JFrame, n: usize) -> Result<PlaneDecomposition, FrameError> {
    if !validate_jframe(f).is_valid() {
        return Err(FrameError::InvalidFrame("not a J-frame".into()));
    }
    let (planes, plane_of) = components(f, n);
    let (subplanes, subplane_of) = components(f, n + 1);
    let mut prec = BTreeSet::new();
    if n < f.rels() {
        for x in 0..f.len() {
            for y in f.successors(n, x) {
                prec.insert((subplane_of[x], subplane_of[y]));
            }
        }
    }
    Ok(PlaneDecomposition {
        n,
        planes,
        plane_of,
        subplanes,
        subplane_of,
        prec,
    })
}

/// True if the frame is a J-frame, connected, and at every level the
/// `(n+1)`-planes of each `n`-plane form a tree under `R_n` with uniform
/// edges.
pub fn is_jtree(f: &JFrame) -> Result<bool, FrameError> {
    if !validate_jframe(f).is_valid() {
        return Err(FrameError::InvalidFrame("not a J-frame".into()));
    }
    if f.is_empty() || components(f, 0).0.len() != 1 {
        return Ok(false);
    }
    for n in 0..f.rels() {
        let d = planes(f, n)?;
        for &(a, b) in &d.prec {
            for &x in &d.subplanes[a] {
                for &y in &d.subplanes[b] {
                    if !f.r(n, x, y) {
                        return Ok(false);
                    }
                }
            }
        }
        for plane in &d.planes {
            let subs: BTreeSet<usize> = plane.iter().map(|&x| d.subplane_of[x]).collect();
            let roots: Vec<usize> = subs
                .iter()
                .copied()
                .filter(|&b| !subs.iter().any(|&a| d.prec.contains(&(a, b))))
                .collect();
            if roots.len() != 1 {
                return Ok(false);
            }
            for &b in &subs {
                let preds: Vec<usize> = subs
                    .iter()
                    .copied()
                    .filter(|&a| d.prec.contains(&(a, b)))
                    .collect();
                for &a in &preds {
                    for &c in &preds {
                        if a != c && !d.prec.contains(&(a, c)) && !d.prec.contains(&(c, a)) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The root of a J-tree: the unique node with no predecessor in any relation.
pub fn root(f: &JFrame) -> Option<usize> {
    let roots: Vec<usize> = (0..f.len())
        .filter(|&y| !(0..f.rels()).any(|k| (0..f.len()).any(|x| f.r(k, x, y))))
        .collect();
    (roots.len() == 1).then(|| roots[0])
}

/// Nodes that are the root of their `(k+1)`-plane: no `R_j`-predecessor
/// for any `j > k`.
pub fn hereditary_roots(f: &JFrame, k: usize) -> Result<BTreeSet<usize>, FrameError> {
    if !is_jtree(f)? {
        return Err(FrameError::InvalidFrame("not a J-tree".into()));
    }
    Ok((0..f.len())
        .filter(|&x| (k + 1..f.rels()).all(|j| (0..f.len()).all(|y| !f.r(j, y, x))))
        .collect())
}

/// A finite tree with root 0 given by child lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RootedTree {
    children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// A tree from child lists; node 0 must be the root.
    pub fn new(children: Vec<Vec<usize>>) -> Result<Self, FrameError> {
        let n = children.len();
        if n == 0 {
            return Err(FrameError::InvalidFrame("empty tree".into()));
        }
        let mut parent = vec![None; n];
        for (p, cs) in children.iter().enumerate() {
            for &c in cs {
                if c >= n || c == 0 || parent[c].is_some() {
                    return Err(FrameError::InvalidFrame("not a tree".into()));
                }
                parent[c] = Some(p);
            }
        }
        if (1..n).any(|c| parent[c].is_none()) {
            return Err(FrameError::InvalidFrame("disconnected".into()));
        }
        let t = RootedTree { children };
        let lt = t.strict_order();
        if (0..n).any(|x| lt[x][x]) {
            return Err(FrameError::InvalidFrame("cycle".into()));
        }
        Ok(t)
    }

    /// A single node.
    pub fn single() -> Self {
        RootedTree { children: vec![vec![]] }
    }

    /// The chain `0 < 1 < … < n-1`.
    pub fn chain(n: usize) -> Self {
        let children = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![] }).collect();
        RootedTree { children }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.children.len()
    }

    /// Always false; trees have a root.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The root, node 0.
    pub fn root(&self) -> usize {
        0
    }

    /// Children of `x`.
    pub fn children(&self, x: usize) -> &[usize] {
        &self.children[x]
    }

    /// Height of the subtree at `x` (leaves have height 0).
    pub fn height(&self, x: usize) -> usize {
        self.children[x].iter().map(|&c| self.height(c) + 1).max().unwrap_or(0)
    }

    /// `lt[s][t]` iff `t` lies strictly above `s`.
    pub fn strict_order(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut lt = vec![vec![false; n]; n];
        for s in 0..n {
            let mut stack: Vec<usize> = self.children[s].clone();
            let mut steps = 0;
            while let Some(t) = stack.pop() {
                steps += 1;
                if steps > n * n {
                    lt[s][s] = true;
                    break;
                }
                if !lt[s][t] {
                    lt[s][t] = true;
                    stack.extend(self.children[t].iter().copied());
                }
            }
        }
        lt
    }

    /// The tree as a one-relation frame.
    pub fn to_frame(&self) -> JFrame {
        let lt = self.strict_order();
        let mut f = JFrame::new(self.len(), 1);
        for (s, row) in lt.iter().enumerate() {
            for (t, &b) in row.iter().enumerate() {
                if b {
                    f.add(0, s, t);
                }
            }
        }
        f
    }

    /// All rooted trees with `n` nodes, up to isomorphism, nodes numbered
    /// in preorder.
    pub fn all_of_size(n: usize) -> Vec<RootedTree> {
        let mut out = Vec::new();
        for shape in shapes(n) {
            let mut children = Vec::new();
            build(&shape, &mut children);
            out.push(RootedTree { children });
        }
        out
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Shape(Vec<Shape>);

fn shapes(n: usize) -> Vec<Shape> {
    if n == 0 {
        return Vec::new();
    }
    forests(n - 1, n - 1).into_iter().map(Shape).collect()
}

// Forests of total size `n` whose trees are listed in non-increasing order
// and have size at most `cap`.
fn forests(n: usize, cap: usize) -> Vec<Vec<Shape>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=cap.min(n)).rev() {
        for t in shapes(first) {
            for rest in forests(n - first, first) {
                if rest.first().is_some_and(|r| shape_size(r) == first && *r > t) {
                    continue;
                }
                let mut v = vec![t.clone()];
                v.extend(rest);
                out.push(v);
            }
        }
    }
    out
}

fn shape_size(s: &Shape) -> usize {
    1 + s.0.iter().map(shape_size).sum::<usize>()
}

fn build(s: &Shape, children: &mut Vec<Vec<usize>>) -> usize {
    let id = children.len();
    children.push(Vec::new());
    for c in &s.0 {
        let cid = build(c, children);
        children[id].push(cid);
    }
    id
}

/// All J-trees with `size` nodes over `k` relations, generated plane by
/// plane: a tree under `R_0` of J-trees over the remaining relations.
pub fn all_jtrees(size: usize, k: usize) -> Vec<JFrame> {
    let mut memo = BTreeMap::new();
    jtrees_memo(size, k, &mut memo)
}

fn jtrees_memo(size: usize, k: usize, memo: &mut BTreeMap<(usize, usize), Vec<JFrame>>) -> Vec<JFrame> {
    if let Some(v) = memo.get(&(size, k)) {
        return v.clone();
    }
    let out = if k == 0 {
        if size == 1 {
            vec![JFrame::new(1, 0)]
        } else {
            Vec::new()
        }
    } else {
        let mut out = Vec::new();
        for planes in 1..=size {
            for shape in RootedTree::all_of_size(planes) {
                for sizes in compositions(size, planes) {
                    let mut choices: Vec<Vec<JFrame>> = Vec::new();
                    for &s in &sizes {
                        choices.push(jtrees_memo(s, k - 1, memo));
                    }
                    for pick in product(&choices) {
                        out.push(assemble(&shape, &pick, k));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    };
    memo.insert((size, k), out.clone());
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product(choices: &[Vec<JFrame>]) -> Vec<Vec<JFrame>> {
    let mut out: Vec<Vec<JFrame>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::new();
        for prefix in &out {
            for f in c {
                let mut p = prefix.clone();
                p.push(f.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn assemble(shape: &RootedTree, parts: &[JFrame], k: usize) -> JFrame {
    let total: usize = parts.iter().map(JFrame::len).sum();
    let mut offset = Vec::with_capacity(parts.len());
    let mut acc = 0;
    for p in parts {
        offset.push(acc);
        acc += p.len();
    }
    let mut f = JFrame::new(total, k);
    for (i, p) in parts.iter().enumerate() {
        for r in 0..p.rels() {
            for x in 0..p.len() {
                for y in p.successors(r, x) {
                    f.add(r + 1, offset[i] + x, offset[i] + y);
                }
            }
        }
    }
    let lt = shape.strict_order();
    for a in 0..parts.len() {
        for b in 0..parts.len() {
            if lt[a][b] {
                for x in 0..parts[a].len() {
                    for y in 0..parts[b].len() {
                        f.add(0, offset[a] + x, offset[b] + y);
                    }
                }
            }
        }
    }
    f
}

/// A J-tree model found by [`find_jtree_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoundModel {
    /// The frame.
    pub frame: JFrame,
    /// The node where the formula holds (the root).
    pub node: usize,
    /// The satisfying valuation.
    pub valuation: NodeValuation,
}

/// Searches J-trees with at most `max_nodes` nodes, smallest first, for one
/// whose root satisfies `phi` under some valuation of its variables.
/// Valuation spaces above `2^20` are sampled with `budget` random draws.
pub fn find_jtree_model(phi: &Formula, max_nodes: usize, budget: usize, seed: u64) -> Option<FoundModel> {
    use rand::{Rng, SeedableRng};
    let k = phi
        .indices()
        .iter()
        .map(|i| i.to_u64().map(|v| v as usize + 1))
        .max()
        .unwrap_or(Some(0))?;
    let vars: Vec<u32> = phi.vars().into_iter().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for size in 1..=max_nodes {
        for frame in all_jtrees(size, k.max(1)) {
            let r = root(&frame)?;
            let bits = size * vars.len();
            let check = |mask: u64| -> Option<NodeValuation> {
                let v: NodeValuation = vars
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let s = (0..size).filter(|&x| mask >> (i * size + x) & 1 == 1).collect();
                        (p, s)
                    })
                    .collect();
                let sat = eval_kripke(phi, &frame, &v).ok()?;
                sat[r].then_some(v)
            };
            if bits <= 20 {
                for mask in 0..(1u64 << bits) {
                    if let Some(v) = check(mask) {
                        return Some(FoundModel { frame, node: r, valuation: v });
                    }
                }
            } else {
                for _ in 0..budget {
                    let mask = rng.gen::<u64>() & ((1u64 << bits.min(63)) - 1);
                    if let Some(v) = check(mask) {
                        return Some(FoundModel { frame, node: r, valuation: v });
                    }
                }
            }
        }
    }
    None
}
