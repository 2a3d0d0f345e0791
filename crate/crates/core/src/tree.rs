//! Plane trees stored as preorder children counts, and their Lukasiewicz coding.
//!
//! A tree with `n` vertices is the sequence `k_{u(0)}, ..., k_{u(n-1)}` of
//! children counts listed in lexicographical (depth-first) order. Every query
//! below works on this sequence or on the associated Lukasiewicz path, so no
//! pointer structure is ever built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rooted ordered tree, as preorder children counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct PlaneTree {
    kids: Vec<usize>,
}

#[derive(Deserialize)]
struct RawTree {
    kids: Vec<usize>,
}

impl TryFrom<RawTree> for PlaneTree {
    type Error = Error;

    fn try_from(raw: RawTree) -> Result<Self> {
        PlaneTree::new(raw.kids)
    }
}

impl PlaneTree {
    /// Checks the preorder feasibility conditions.
    pub fn new(kids: Vec<usize>) -> Result<Self> {
        if kids.is_empty() {
            return Err(Error::InvalidTree("empty children sequence".into()));
        }
        // open = number of vertices announced but not yet visited
        let mut open: usize = 1;
        for (j, &k) in kids.iter().enumerate() {
            if open == 0 {
                return Err(Error::InvalidTree(format!(
                    "preorder closes before vertex {j}"
                )));
            }
            open = open - 1 + k;
        }
        if open != 0 {
            return Err(Error::InvalidTree(format!(
                "children sum to {} but n - 1 = {}",
                kids.iter().sum::<usize>(),
                kids.len() - 1
            )));
        }
        Ok(PlaneTree { kids })
    }

    /// Single vertex.
    pub fn singleton() -> Self {
        PlaneTree { kids: vec![0] }
    }

    /// Path with `n` vertices (each vertex has one child except the last).
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        let mut kids = vec![1; n];
        kids[n - 1] = 0;
        PlaneTree { kids }
    }

    /// Star: a root with `n - 1` leaf children.
    pub fn star(n: usize) -> Self {
        assert!(n >= 1);
        let mut kids = vec![0; n];
        kids[0] = n - 1;
        PlaneTree { kids }
    }

    pub(crate) fn from_kids_unchecked(kids: Vec<usize>) -> Self {
        debug_assert!(PlaneTree::new(kids.clone()).is_ok());
        PlaneTree { kids }
    }

    pub fn kids(&self) -> &[usize] {
        &self.kids
    }

    pub fn into_kids(self) -> Vec<usize> {
        self.kids
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.kids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root_degree(&self) -> usize {
        self.kids[0]
    }

    /// Lukasiewicz path `W_0 = 0, W_{j+1} = W_j + k_{u(j)} - 1`.
    pub fn encode(&self) -> LukasiewiczPath {
        let mut w = Vec::with_capacity(self.kids.len() + 1);
        let mut cur: i64 = 0;
        w.push(cur);
        for &k in &self.kids {
            cur += k as i64 - 1;
            w.push(cur);
        }
        LukasiewiczPath { w }
    }

    /// Maximal generation `max |u|`.
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Generation of every vertex, in preorder.
    pub fn depths(&self) -> Vec<usize> {
        let n = self.kids.len();
        let mut depth = Vec::with_capacity(n);
        // stack of (depth of pending children, how many remain)
        let mut stack: Vec<(usize, usize)> = Vec::new();
        depth.push(0);
        if self.kids[0] > 0 {
            stack.push((1, self.kids[0]));
        }
        for &k in &self.kids[1..] {
            let top = stack.last_mut().expect("feasible preorder");
            let d = top.0;
            top.1 -= 1;
            if top.1 == 0 {
                stack.pop();
            }
            depth.push(d);
            if k > 0 {
                stack.push((d + 1, k));
            }
        }
        depth
    }

    /// Preorder index of the parent of every vertex (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let n = self.kids.len();
        let mut parent = vec![None; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        if self.kids[0] > 0 {
            stack.push((0, self.kids[0]));
        }
        for (j, &k) in self.kids.iter().enumerate().skip(1) {
            let top = stack.last_mut().expect("feasible preorder");
            parent[j] = Some(top.0);
            top.1 -= 1;
            if top.1 == 0 {
                stack.pop();
            }
            if k > 0 {
                stack.push((j, k));
            }
        }
        parent
    }

    /// Number of strict descendants of each vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        self.encode().subtree_sizes()
    }

    /// Preorder indices of the children of vertex `i`, given subtree sizes.
    pub fn children_of(&self, i: usize, sizes: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.kids[i]);
        let mut j = i + 1;
        for _ in 0..self.kids[i] {
            out.push(j);
            j += sizes[j] + 1;
        }
        out
    }
}

/// Integer excursion coding a plane tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct LukasiewiczPath {
    w: Vec<i64>,
}

#[derive(Deserialize)]
struct RawPath {
    w: Vec<i64>,
}

impl TryFrom<RawPath> for LukasiewiczPath {
    type Error = Error;

    fn try_from(raw: RawPath) -> Result<Self> {
        LukasiewiczPath::new(raw.w)
    }
}

impl LukasiewiczPath {
    /// Validates `W_0 = 0`, `W_n = -1`, `W_j >= 0` before the end, increments `>= -1`.
    pub fn new(w: Vec<i64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::InvalidPath("need at least two values".into()));
        }
        if w[0] != 0 {
            return Err(Error::InvalidPath(format!("W_0 = {} != 0", w[0])));
        }
        let n = w.len() - 1;
        for j in 0..n {
            if w[j + 1] - w[j] < -1 {
                return Err(Error::InvalidPath(format!(
                    "increment {} at step {j}",
                    w[j + 1] - w[j]
                )));
            }
            if w[j] < 0 {
                return Err(Error::InvalidPath(format!("W_{j} = {} < 0", w[j])));
            }
        }
        if w[n] != -1 {
            return Err(Error::InvalidPath(format!("W_n = {} != -1", w[n])));
        }
        Ok(LukasiewiczPath { w })
    }

    pub fn values(&self) -> &[i64] {
        &self.w
    }

    /// Number of vertices of the coded tree.
    pub fn len(&self) -> usize {
        self.w.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn decode(&self) -> PlaneTree {
        let kids = self
            .w
            .windows(2)
            .map(|p| (p[1] - p[0] + 1) as usize)
            .collect();
        PlaneTree::from_kids_unchecked(kids)
    }

    /// `S_k = min{j > k : W_j < W_k} - k - 1`, in one right-to-left stack sweep.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let n = self.len();
        let mut sizes = vec![0usize; n];
        // indices j > k with strictly increasing W from the bottom of the stack
        let mut stack: Vec<usize> = vec![n];
        for k in (0..n).rev() {
            while let Some(&top) = stack.last() {
                if self.w[top] >= self.w[k] {
                    stack.pop();
                } else {
                    break;
                }
            }
            let next_lower = *stack.last().expect("W_n = -1 is below every earlier value");
            sizes[k] = next_lower - k - 1;
            stack.push(k);
        }
        sizes
    }

    /// `u(i)` is an ancestor of `u(j)` iff `i <= j` and `W_i = min_{[i, j]} W`.
    pub fn is_ancestor(&self, i: usize, j: usize) -> Result<bool> {
        let n = self.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if i > j {
            return Ok(false);
        }
        let wi = self.w[i];
        Ok(self.w[i..=j].iter().all(|&x| x >= wi))
    }
}

/// Every plane tree with `n` vertices, in lexicographic order of `kids`.
pub fn all_trees(n: usize) -> Vec<PlaneTree> {
    fn rec(n: usize, open: usize, cur: &mut Vec<usize>, out: &mut Vec<PlaneTree>) {
        let left = n - cur.len();
        if left == 0 {
            if open == 0 {
                out.push(PlaneTree { kids: cur.clone() });
            }
            return;
        }
        if open == 0 {
            return;
        }
        // after this vertex, `left - 1` vertices remain and all open slots must fit
        for k in 0..left {
            let next_open = open - 1 + k;
            if next_open > left - 1 {
                break;
            }
            cur.push(k);
            rec(n, next_open, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, 1, &mut Vec::with_capacity(n), &mut out);
    out
}
