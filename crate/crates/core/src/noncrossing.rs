//! Noncrossing trees on the `n`-th roots of unity and the bijection with decorated
//! plane trees.
//!
//! Vertex `i` sits at `exp(-2 i pi i / n)`, so vertex 0 is the complex number 1 and
//! indices increase clockwise. A vertex with label `l` owns a contiguous arc of
//! positions: the subtrees of its first `l` children come first, then the vertex
//! itself, then the remaining subtrees. A child is "left" of its parent exactly when
//! its index is smaller.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offspring::{critical_pair, WeightSeq};
use crate::samplers::{ModifiedBgwSampler, SamplerOptions};
use crate::tree::{all_trees, PlaneTree};

/// Left-children counts `l_1, ..., l_{n-1}` of the non-root vertices, in preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Decoration {
    pub l: Vec<usize>,
}

impl Decoration {
    pub fn new(l: Vec<usize>) -> Self {
        Decoration { l }
    }

    /// All zeros: every child folded to the right.
    pub fn zero(tree: &PlaneTree) -> Self {
        Decoration {
            l: vec![0; tree.len() - 1],
        }
    }

    /// Checks `0 <= l_j <= k_{u(j)}` and the length.
    pub fn check(&self, tree: &PlaneTree) -> Result<()> {
        if self.l.len() + 1 != tree.len() {
            return Err(Error::IncompatibleDecoration(format!(
                "{} labels for {} non-root vertices",
                self.l.len(),
                tree.len() - 1
            )));
        }
        for (j, (&l, &k)) in self.l.iter().zip(&tree.kids()[1..]).enumerate() {
            if l > k {
                return Err(Error::IncompatibleDecoration(format!(
                    "vertex {} has {k} children but label {l}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Label of preorder vertex `i` (the root carries 0).
    pub fn label(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.l[i - 1]
        }
    }
}

/// `#C(tau) = prod over non-root u of (k_u + 1)`.
pub fn decoration_count(tree: &PlaneTree) -> u128 {
    tree.kids()[1..].iter().map(|&k| k as u128 + 1).product()
}

/// All decorations of a tree, in lexicographic order.
pub fn all_decorations(tree: &PlaneTree) -> Vec<Decoration> {
    let bounds = &tree.kids()[1..];
    let mut out = Vec::new();
    let mut cur = vec![0usize; bounds.len()];
    loop {
        out.push(Decoration { l: cur.clone() });
        let mut i = bounds.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bounds[i] {
                cur[i] += 1;
                for c in &mut cur[i + 1..] {
                    *c = 0;
                }
                break;
            }
        }
    }
}

/// Tree drawn on the `n`-th roots of unity with straight noncrossing edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawNc")]
pub struct NoncrossingTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawNc {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawNc> for NoncrossingTree {
    type Error = Error;

    fn try_from(raw: RawNc) -> Result<Self> {
        NoncrossingTree::new(raw.n, raw.edges)
    }
}

impl NoncrossingTree {
    /// Normalizes edges to `(min, max)`, sorts them and checks tree + noncrossing.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let edges = normalize(edges);
        check_tree(n, &edges)?;
        if let Some((a, b)) = find_crossing(&edges) {
            return Err(Error::CrossingEdges(a, b));
        }
        Ok(NoncrossingTree { n, edges })
    }

    fn from_sorted_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        NoncrossingTree { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(p, q)` with `p < q`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

fn normalize(edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(p, q)| if p <= q { (p, q) } else { (q, p) })
        .collect();
    edges.sort_unstable();
    edges
}

fn check_tree(n: usize, edges: &[(usize, usize)]) -> Result<()> {
    if n == 0 {
        return Err(Error::NotATree("no vertices".into()));
    }
    if edges.len() + 1 != n {
        return Err(Error::NotATree(format!(
            "{} edges on {n} vertices",
            edges.len()
        )));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(p, q) in edges {
        if q >= n {
            return Err(Error::NotATree(format!("vertex {q} out of range")));
        }
        if p == q {
            return Err(Error::NotATree(format!("loop at {p}")));
        }
        let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
        if rp == rq {
            return Err(Error::NotATree(format!("edge {{{p},{q}}} closes a cycle")));
        }
        parent[rp] = rq;
    }
    Ok(())
}

/// `{a, b}` and `{c, d}` cross iff exactly one of `c, d` lies strictly inside `(a, b)`
/// and the other strictly outside `[a, b]`.
pub fn chords_cross(x: (usize, usize), y: (usize, usize)) -> bool {
    let (a, b) = (x.0.min(x.1), x.0.max(x.1));
    let (c, d) = (y.0.min(y.1), y.0.max(y.1));
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

/// A crossing pair among chords given as `(p, q)` with `p < q`, if any. `O(E log E)`:
/// chords sorted by left end (longest first) must form a nested stack.
pub fn find_crossing(chords: &[(usize, usize)]) -> Option<((usize, usize), (usize, usize))> {
    let mut sorted: Vec<(usize, usize)> = chords
        .iter()
        .map(|&(p, q)| (p.min(q), p.max(q)))
        .collect();
    sorted.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for c in sorted {
        while let Some(&top) = stack.last() {
            if top.1 <= c.0 {
                stack.pop();
            } else {
                break;
            }
        }
        if let Some(&top) = stack.last() {
            if top.1 < c.1 {
                return Some((top, c));
            }
        }
        stack.push(c);
    }
    None
}

/// True iff the candidate edge set is a noncrossing spanning tree on `n` points.
pub fn validate(n: usize, edges: &[(usize, usize)]) -> bool {
    let edges = normalize(edges.to_vec());
    check_tree(n, &edges).is_ok() && find_crossing(&edges).is_none()
}

/// Position of every preorder vertex under the recursive arc placement.
pub fn positions(tree: &PlaneTree, dec: &Decoration) -> Result<Vec<usize>> {
    dec.check(tree)?;
    let n = tree.len();
    let kids = tree.kids();
    let sizes = tree.subtree_sizes();
    let mut start = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        let l = dec.label(v);
        let mut offset = start[v];
        let mut child = v + 1;
        for i in 0..kids[v] {
            if i == l {
                pos[v] = offset;
                offset += 1;
            }
            start[child] = offset;
            offset += sizes[child] + 1;
            child += sizes[child] + 1;
        }
        if l == kids[v] {
            pos[v] = offset;
        }
    }
    Ok(pos)
}

/// The inverse bijection: decorated plane tree to noncrossing tree.
pub fn embed(tree: &PlaneTree, dec: &Decoration) -> Result<NoncrossingTree> {
    let pos = positions(tree, dec)?;
    let parents = tree.parents();
    let edges = parents
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.map(|p| (pos[p], pos[v])))
        .collect();
    Ok(NoncrossingTree::from_sorted_unchecked(tree.len(), normalize(edges)))
}

/// The bijection: noncrossing tree to (shape rooted at 0, left-children counts).
pub fn extract(nc: &NoncrossingTree) -> Result<(PlaneTree, Decoration)> {
    let n = nc.n;
    check_tree(n, &nc.edges)?;
    if let Some((a, b)) = find_crossing(&nc.edges) {
        return Err(Error::CrossingEdges(a, b));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, q) in &nc.edges {
        adj[p].push(q);
        adj[q].push(p);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut kids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n.saturating_sub(1));
    // (vertex, parent) in preorder; children pushed in reverse so the smallest index pops first
    let mut stack = vec![(0usize, usize::MAX)];
    while let Some((v, parent)) = stack.pop() {
        let children: Vec<usize> = adj[v].iter().copied().filter(|&c| c != parent).collect();
        kids.push(children.len());
        if parent != usize::MAX {
            labels.push(children.iter().filter(|&&c| c < v).count());
        }
        for &c in children.iter().rev() {
            stack.push((c, v));
        }
    }
    Ok((PlaneTree::new(kids)?, Decoration { l: labels }))
}

/// Independent labels, `l_j` uniform on `{0, ..., k_{u(j)}}`.
pub fn uniform_decoration<R: Rng + ?Sized>(tree: &PlaneTree, rng: &mut R) -> Decoration {
    Decoration {
        l: tree.kids()[1..]
            .iter()
            .map(|&k| rng.random_range(0..=k))
            .collect(),
    }
}

/// Uniform embedding of a plane tree.
pub fn theta_uniform<R: Rng + ?Sized>(tree: &PlaneTree, rng: &mut R) -> NoncrossingTree {
    let dec = uniform_decoration(tree, rng);
    embed(tree, &dec).expect("uniform decorations are compatible")
}

/// Reusable exact sampler of simply generated noncrossing trees of size `n`.
pub struct SimplyGeneratedSampler {
    n: usize,
    shape: Option<ModifiedBgwSampler>,
}

impl SimplyGeneratedSampler {
    pub fn new(w: &WeightSeq, n: usize) -> Result<Self> {
        Self::with_options(w, n, SamplerOptions::default())
    }

    pub fn with_options(w: &WeightSeq, n: usize, opts: SamplerOptions) -> Result<Self> {
        let pair = critical_pair(w)?;
        if n == 0 {
            return Err(Error::Infeasible("n must be >= 1".into()));
        }
        let shape = if n == 1 {
            None
        } else {
            Some(ModifiedBgwSampler::new(&pair, n, opts)?)
        };
        Ok(SimplyGeneratedSampler { n, shape })
    }

    /// Shape and decoration of one draw.
    pub fn sample_decorated<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(PlaneTree, Decoration)> {
        match &mut self.shape {
            None => Ok((PlaneTree::singleton(), Decoration { l: Vec::new() })),
            Some(s) => {
                let tree = s.sample(rng)?;
                let dec = uniform_decoration(&tree, rng);
                Ok((tree, dec))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<NoncrossingTree> {
        let (tree, dec) = self.sample_decorated(rng)?;
        debug_assert_eq!(tree.len(), self.n);
        embed(&tree, &dec)
    }
}

/// One exact draw from the simply generated law with weights `w` on `NC_n`.
pub fn sample_simply_generated<R: Rng + ?Sized>(
    w: &WeightSeq,
    n: usize,
    rng: &mut R,
) -> Result<NoncrossingTree> {
    SimplyGeneratedSampler::new(w, n)?.sample(rng)
}

/// Largest `n` accepted by [`enumerate_all`].
pub const ENUMERATION_LIMIT: usize = 12;

/// Every noncrossing tree on `n` points whose vertex degrees lie in `degrees` (all
/// trees when `None`), sorted.
pub fn enumerate_all(n: usize, degrees: Option<&[usize]>) -> Result<Vec<NoncrossingTree>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let allowed = |d: usize| degrees.is_none_or(|a| a.contains(&d));
    let mut out = BTreeSet::new();
    for tree in all_trees(n) {
        let kids = tree.kids();
        if n > 1 && !(allowed(kids[0]) && kids[1..].iter().all(|&k| allowed(k + 1))) {
            continue;
        }
        for dec in all_decorations(&tree) {
            out.insert(embed(&tree, &dec)?);
        }
    }
    Ok(out.into_iter().collect())
}
