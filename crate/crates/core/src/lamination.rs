//! Discrete laminations coded by Lukasiewicz paths, their faces and triangulations,
//! and the Hausdorff distance between chord unions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noncrossing::{find_crossing, Decoration, NoncrossingTree};
use crate::rng::StreamKey;
use crate::tree::{LukasiewiczPath, PlaneTree};

/// Noncrossing chords between the points `p/m` of the circle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLamination")]
pub struct Lamination {
    m: usize,
    chords: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawLamination {
    m: usize,
    chords: Vec<(usize, usize)>,
}

impl TryFrom<RawLamination> for Lamination {
    type Error = Error;

    fn try_from(raw: RawLamination) -> Result<Self> {
        Lamination::new(raw.m, raw.chords)
    }
}

impl Lamination {
    /// Reduces endpoints mod `m`, drops degenerate pairs and duplicates, rejects crossings.
    pub fn new(m: usize, chords: Vec<(usize, usize)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("resolution must be positive".into()));
        }
        let chords = canonical(m, chords);
        if let Some((a, b)) = find_crossing(&chords) {
            return Err(Error::CrossingEdges(a, b));
        }
        Ok(Lamination { m, chords })
    }

    pub(crate) fn from_canonical_unchecked(m: usize, chords: Vec<(usize, usize)>) -> Self {
        debug_assert!(find_crossing(&chords).is_none());
        Lamination { m, chords }
    }

    pub fn empty(m: usize) -> Self {
        Lamination {
            m,
            chords: Vec::new(),
        }
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    /// Chords as `(p, q)` with `p < q`, sorted and distinct.
    pub fn chords(&self) -> &[(usize, usize)] {
        &self.chords
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn is_noncrossing(&self) -> bool {
        find_crossing(&self.chords).is_none()
    }

    /// Sorted distinct chord endpoints.
    pub fn endpoints(&self) -> Vec<usize> {
        let mut pts: Vec<usize> = self.chords.iter().flat_map(|&(p, q)| [p, q]).collect();
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    /// Union of chord sets at the same resolution.
    pub fn union(&self, other: &Lamination) -> Result<Lamination> {
        if self.m != other.m {
            return Err(Error::Domain(format!(
                "resolutions {} and {} differ",
                self.m, other.m
            )));
        }
        let mut chords = self.chords.clone();
        chords.extend_from_slice(&other.chords);
        Lamination::new(self.m, chords)
    }

    /// Point `p/m` of the circle, `exp(-2 i pi p / m)`.
    pub fn point(&self, p: usize) -> (f64, f64) {
        circle_point(p, self.m)
    }
}

pub(crate) fn circle_point(p: usize, m: usize) -> (f64, f64) {
    let a = -2.0 * PI * p as f64 / m as f64;
    (a.cos(), a.sin())
}

fn canonical(m: usize, chords: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = chords
        .into_iter()
        .map(|(p, q)| (p % m, q % m))
        .filter(|(p, q)| p != q)
        .map(|(p, q)| (p.min(q), p.max(q)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Face of the lamination coded by a path, indexed by the jump (vertex) `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub jump: usize,
    /// `u, j_1, ..., j_k, u + S_u + 1` reduced mod `n`, with the wraparound duplicate of the
    /// root face removed.
    pub boundary: Vec<usize>,
    pub special: Option<usize>,
}

/// Chords `{i, i + S_i + 1 mod n}` for every non-root vertex `i`.
pub fn lamination_from_tree(path: &LukasiewiczPath) -> Lamination {
    let n = path.len();
    let sizes = path.subtree_sizes();
    let chords = (1..n).map(|i| (i, (i + sizes[i] + 1) % n)).collect();
    Lamination::from_canonical_unchecked(n, canonical(n, chords))
}

fn face_boundary(kids: &[usize], sizes: &[usize], i: usize) -> Vec<usize> {
    let n = kids.len();
    let mut b = Vec::with_capacity(kids[i] + 2);
    b.push(i);
    let mut j = i + 1;
    for _ in 0..kids[i] {
        b.push(j);
        j += sizes[j] + 1;
    }
    if j % n != i {
        b.push(j % n);
    }
    b
}

/// One face per vertex with at least one child.
pub fn faces(path: &LukasiewiczPath) -> Vec<Face> {
    let tree = path.decode();
    let sizes = path.subtree_sizes();
    let kids = tree.kids();
    (0..kids.len())
        .filter(|&i| kids[i] > 0)
        .map(|i| Face {
            jump: i,
            boundary: face_boundary(kids, &sizes, i),
            special: None,
        })
        .collect()
}

/// Rule assigning a label in `[0, 1]` to every vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpsLabelling {
    /// I.i.d. uniform labels drawn from the stream of `seed`.
    Uniform(u64),
    /// All labels 0: every face is fanned from its leftmost vertex.
    Zero,
    /// Labels by vertex index.
    Explicit(BTreeMap<usize, f64>),
}

impl JumpsLabelling {
    /// Left-count `L_i = min(k_i, floor(l_i (k_i + 1)))` for every vertex.
    pub fn resolve(&self, tree: &PlaneTree) -> Result<Vec<usize>> {
        let kids = tree.kids();
        let to_count = |l: f64, k: usize| ((l * (k as f64 + 1.0)).floor() as usize).min(k);
        match self {
            JumpsLabelling::Zero => Ok(vec![0; kids.len()]),
            JumpsLabelling::Uniform(seed) => {
                let mut rng = StreamKey::new(*seed).child("labelling", 0).rng();
                Ok(kids
                    .iter()
                    .map(|&k| if k == 0 { 0 } else { to_count(rng.random(), k) })
                    .collect())
            }
            JumpsLabelling::Explicit(map) => {
                if let Some(&i) = map.keys().find(|&&i| i >= kids.len()) {
                    return Err(Error::IncompatibleLabelling(format!(
                        "vertex {i} out of range"
                    )));
                }
                kids.iter()
                    .enumerate()
                    .map(|(i, &k)| match map.get(&i) {
                        Some(&l) if (0.0..=1.0).contains(&l) => Ok(to_count(l, k)),
                        Some(&l) => Err(Error::IncompatibleLabelling(format!(
                            "label {l} at vertex {i} outside [0, 1]"
                        ))),
                        None if k == 0 => Ok(0),
                        None => Err(Error::IncompatibleLabelling(format!(
                            "no label for vertex {i}"
                        ))),
                    })
                    .collect()
            }
        }
    }
}

/// Per-vertex left counts of a decoration, the root carrying 0.
pub fn left_counts(tree: &PlaneTree, dec: &Decoration) -> Result<Vec<usize>> {
    dec.check(tree)
        .map_err(|e| Error::IncompatibleLabelling(e.to_string()))?;
    Ok((0..tree.len()).map(|i| dec.label(i)).collect())
}

/// Faces with their special vertex `p_i = j_{L_i + 1}` (or the closing point when `L_i = k_i`).
pub fn special_faces(path: &LukasiewiczPath, left: &[usize]) -> Result<Vec<Face>> {
    let tree = path.decode();
    let kids = tree.kids();
    if left.len() != kids.len() {
        return Err(Error::IncompatibleLabelling(format!(
            "{} labels for {} vertices",
            left.len(),
            kids.len()
        )));
    }
    let mut out = faces(path);
    for face in &mut out {
        let i = face.jump;
        let l = left[i];
        if l > kids[i] {
            return Err(Error::IncompatibleLabelling(format!(
                "label {l} exceeds the {} children of vertex {i}",
                kids[i]
            )));
        }
        // boundary = [i, j_1, ..., j_k, close]; the root's close coincides with i
        face.special = Some(if l < kids[i] {
            face.boundary[l + 1]
        } else {
            face.boundary.get(kids[i] + 1).copied().unwrap_or(i)
        });
    }
    Ok(out)
}

/// Triangulation of the lamination coded by `path`, each face fanned from its special
/// vertex. The side `{i, i + 1}` joining a vertex to its first child is added as well, so
/// the result is a full triangulation of the `n` marked points.
pub fn triangulate(path: &LukasiewiczPath, left: &[usize]) -> Result<Lamination> {
    let n = path.len();
    let base = lamination_from_tree(path);
    let mut chords = base.chords;
    for face in special_faces(path, left)? {
        let p = face.special.expect("filled above");
        chords.extend(face.boundary.iter().map(|&q| (p, q)));
        chords.push((face.jump, face.jump + 1));
    }
    let chords = canonical(n, chords);
    debug_assert!(find_crossing(&chords).is_none());
    Ok(Lamination::from_canonical_unchecked(n, chords))
}

/// Triangulation driven by a decoration (the root uses `L_0 = 0`).
pub fn triangulate_decorated(tree: &PlaneTree, dec: &Decoration) -> Result<Lamination> {
    triangulate(&tree.encode(), &left_counts(tree, dec)?)
}

/// Triangulation driven by a jumps labelling.
pub fn triangulate_labelled(tree: &PlaneTree, labelling: &JumpsLabelling) -> Result<Lamination> {
    triangulate(&tree.encode(), &labelling.resolve(tree)?)
}

/// No chord between two marked points can be added: a noncrossing set on `P` points in
/// convex position is maximal iff it has `2P - 3` chords.
pub fn is_maximal(lam: &Lamination, points: &[usize]) -> bool {
    let mut pts: Vec<usize> = points.iter().map(|p| p % lam.m).collect();
    pts.sort_unstable();
    pts.dedup();
    if lam
        .chords
        .iter()
        .any(|(p, q)| pts.binary_search(p).is_err() || pts.binary_search(q).is_err())
    {
        return false;
    }
    let full = match pts.len() {
        0 | 1 => 0,
        2 => 1,
        k => 2 * k - 3,
    };
    lam.is_noncrossing() && lam.chords.len() == full
}

/// The edges of a noncrossing tree, as chords at resolution `n`.
pub fn nc_to_lamination(nc: &NoncrossingTree) -> Lamination {
    Lamination::from_canonical_unchecked(nc.n(), nc.edges().to_vec())
}

/// Default sampling step `2 pi / (64 m)` for [`hausdorff_distance`].
pub fn default_delta(m: usize) -> f64 {
    2.0 * PI / (64.0 * m as f64)
}

type Seg = ((f64, f64), (f64, f64));

fn segments(lam: &Lamination) -> Vec<Seg> {
    lam.chords
        .iter()
        .map(|&(p, q)| (lam.point(p), lam.point(q)))
        .collect()
}

fn point_segment_distance(c: (f64, f64), s: &Seg) -> f64 {
    let ((ax, ay), (bx, by)) = *s;
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((c.0 - ax) * dx + (c.1 - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let (px, py) = (ax + t * dx, ay + t * dy);
    ((c.0 - px).powi(2) + (c.1 - py).powi(2)).sqrt()
}

/// Uniform grid over `[-1, 1]^2` listing the segments that meet each cell.
struct SegmentIndex {
    segs: Vec<Seg>,
    g: usize,
    cell: f64,
    cells: Vec<Vec<u32>>,
}

impl SegmentIndex {
    fn new(segs: Vec<Seg>) -> Self {
        let g = ((segs.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let cell = 2.0 / g as f64;
        let mut cells = vec![Vec::new(); g * g];
        for (id, s) in segs.iter().enumerate() {
            for c in crate::stats::grid_cells(s.0, s.1, g) {
                cells[c].push(id as u32);
            }
        }
        SegmentIndex {
            segs,
            g,
            cell,
            cells,
        }
    }

    fn cell_of(&self, v: f64) -> usize {
        (((v + 1.0) / self.cell).floor().max(0.0) as usize).min(self.g - 1)
    }

    /// Distance from `c` (inside the unit disk) to the nearest indexed segment.
    fn distance(&self, c: (f64, f64)) -> f64 {
        let (cx, cy) = (self.cell_of(c.0) as i64, self.cell_of(c.1) as i64);
        let g = self.g as i64;
        let mut best = f64::INFINITY;
        for r in 0..=g {
            for x in (cx - r)..=(cx + r) {
                if x < 0 || x >= g {
                    continue;
                }
                let on_edge = x == cx - r || x == cx + r;
                let ys: Vec<i64> = if on_edge {
                    ((cy - r)..=(cy + r)).collect()
                } else {
                    vec![cy - r, cy + r]
                };
                for y in ys {
                    if y < 0 || y >= g {
                        continue;
                    }
                    for &id in &self.cells[(x * g + y) as usize] {
                        best = best.min(point_segment_distance(c, &self.segs[id as usize]));
                    }
                }
            }
            // every cell at ring r + 1 is at least r cells away from c
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

/// `sup_{a in A} d(a, B)`, to within `delta`, by branch and bound on sub-segments.
fn directed(a: &[Seg], b: &SegmentIndex, delta: f64) -> f64 {
    let mut lower: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    let len = |s: &Seg| ((s.1 .0 - s.0 .0).powi(2) + (s.1 .1 - s.0 .1).powi(2)).sqrt();
    order.sort_by(|&i, &j| len(&a[j]).total_cmp(&len(&a[i])));
    let mut stack: Vec<(f64, f64)> = Vec::new();
    for &i in &order {
        let ((ax, ay), (bx, by)) = a[i];
        let l = len(&a[i]);
        let at = |t: f64| (ax + t * (bx - ax), ay + t * (by - ay));
        for t in [0.0, 1.0] {
            lower = lower.max(b.distance(at(t)));
        }
        stack.clear();
        stack.push((0.0, 1.0));
        while let Some((t0, t1)) = stack.pop() {
            let mid = 0.5 * (t0 + t1);
            let half = 0.5 * (t1 - t0) * l;
            let d = b.distance(at(mid));
            lower = lower.max(d);
            if d + half <= lower || half < 0.5 * delta {
                continue;
            }
            stack.push((t0, mid));
            stack.push((mid, t1));
        }
    }
    lower
}

/// Symmetric Hausdorff distance between the chord unions, accurate to `delta`.
pub fn hausdorff_distance(a: &Lamination, b: &Lamination, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(f64::INFINITY),
        _ => {}
    }
    if a.m == b.m && a.chords == b.chords {
        return Ok(0.0);
    }
    let sa = segments(a);
    let sb = segments(b);
    let ia = SegmentIndex::new(sa.clone());
    let ib = SegmentIndex::new(sb.clone());
    Ok(directed(&sa, &ib, delta).max(directed(&sb, &ia, delta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noncrossing::{all_decorations, embed};
    use crate::tree::all_trees;

    fn lam(m: usize, c: &[(usize, usize)]) -> Lamination {
        Lamination::new(m, c.to_vec()).unwrap()
    }

    fn path(kids: &[usize]) -> LukasiewiczPath {
        PlaneTree::new(kids.to_vec()).unwrap().encode()
    }

    #[test]
    fn lamination_examples() {
        assert_eq!(lamination_from_tree(&path(&[2, 0, 0])), lam(3, &[(1, 2), (2, 0)]));
        assert!(lamination_from_tree(&path(&[0])).is_empty());
        assert!(Lamination::new(4, vec![(0, 2), (1, 3)]).is_err());
        assert_eq!(lam(4, &[(0, 5), (1, 4), (4, 1), (2, 6)]).chords(), &[(0, 1)]);
    }

    #[test]
    fn faces_examples() {
        let f = faces(&path(&[2, 0, 0]));
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].boundary, vec![0, 1, 2]);
        let f = faces(&path(&[1, 0]));
        assert_eq!(f[0].boundary, vec![0, 1]);
        for n in 1..=8 {
            for t in all_trees(n) {
                let total: usize = faces(&t.encode())
                    .iter()
                    .map(|f| f.boundary.len() - 2 + usize::from(f.jump == 0))
                    .sum();
                assert_eq!(total, n - 1);
            }
        }
    }

    #[test]
    fn triangulate_examples() {
        let t = triangulate(&path(&[2, 0, 0]), &[0, 0, 0]).unwrap();
        assert_eq!(t, lam(3, &[(0, 1), (1, 2), (0, 2)]));
        for l in 0..=1 {
            assert_eq!(triangulate(&path(&[1, 0]), &[l, 0]).unwrap(), lam(2, &[(0, 1)]));
        }
        let tree = PlaneTree::new(vec![3, 1, 0, 0, 0]).unwrap();
        let zero = JumpsLabelling::Zero.resolve(&tree).unwrap();
        for f in special_faces(&tree.encode(), &zero).unwrap() {
            assert_eq!(f.special, Some(f.jump + 1));
        }
        assert!(matches!(
            triangulate(&path(&[1, 0]), &[2, 0]),
            Err(Error::IncompatibleLabelling(_))
        ));
    }

    #[test]
    fn spec_rule_alone_is_not_maximal() {
        // without the first-child sides, a face fanned from a later child leaves {i, i+1} open
        let kids = [1, 2, 0, 0];
        let p = path(&kids);
        let left = [0, 1, 0, 0];
        let base = lamination_from_tree(&p);
        let mut chords = base.chords().to_vec();
        for f in special_faces(&p, &left).unwrap() {
            let s = f.special.unwrap();
            chords.extend(f.boundary.iter().map(|&q| (s, q)));
        }
        let without = lam(4, &chords);
        assert!(!is_maximal(&without, &[0, 1, 2, 3]));
        assert!(without.chords().binary_search(&(1, 2)).is_err());
        let with = triangulate(&p, &left).unwrap();
        assert!(is_maximal(&with, &with.endpoints()));
    }

    fn addable_bruteforce(l: &Lamination, pts: &[usize]) -> bool {
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                if l.chords().binary_search(&(p, q)).is_ok() {
                    continue;
                }
                if l.chords()
                    .iter()
                    .all(|&c| !crate::noncrossing::chords_cross(c, (p, q)))
                {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn maximal_examples() {
        assert!(is_maximal(&lam(3, &[(0, 1), (1, 2), (2, 0)]), &[0, 1, 2]));
        assert!(!is_maximal(&lam(4, &[(0, 2)]), &[0, 1, 2, 3]));
        assert!(is_maximal(&lam(4, &[(0, 2)]), &[0, 2]));
    }

    #[test]
    fn exhaustive_triangulations() {
        for n in 2..=7 {
            for t in all_trees(n) {
                let p = t.encode();
                let mut count = None;
                for dec in all_decorations(&t) {
                    let tri = triangulate_decorated(&t, &dec).unwrap();
                    assert!(tri.is_noncrossing());
                    let pts = tri.endpoints();
                    assert!(is_maximal(&tri, &pts));
                    assert!(!addable_bruteforce(&tri, &pts));
                    assert_eq!(pts.len(), n);
                    let c = *count.get_or_insert(tri.len());
                    assert_eq!(c, tri.len());
                    let base = lamination_from_tree(&p);
                    assert!(base.chords().iter().all(|c| tri.chords().contains(c)));
                }
            }
        }
    }

    #[test]
    fn hausdorff_examples() {
        let h = lam(8, &[(0, 4)]);
        let v = lam(8, &[(2, 6)]);
        let d = default_delta(8);
        assert_eq!(hausdorff_distance(&h, &h, d).unwrap(), 0.0);
        let x = hausdorff_distance(&h, &v, d).unwrap();
        assert!((x - 1.0).abs() <= d, "{x}");
        let tri = lam(3, &[(0, 1), (1, 2), (0, 2)]);
        let star = nc_to_lamination(&embed(&PlaneTree::star(3), &Decoration::new(vec![0, 0])).unwrap());
        // the side {1,2} is at distance sin(pi/6) = 1/2 from the center... from {0,1} u {0,2}
        let e = hausdorff_distance(&tri, &star, 1e-6).unwrap();
        let (p1, p2) = (circle_point(1, 3), circle_point(2, 3));
        let mid = ((p1.0 + p2.0) / 2.0, (p1.1 + p2.1) / 2.0);
        let expect = point_segment_distance(mid, &((1.0, 0.0), p1));
        assert!((e - expect).abs() < 1e-6, "{e} vs {expect}");
    }

    #[test]
    fn hausdorff_metric_properties() {
        let mut rng = StreamKey::new(21).rng();
        let random_lam = |rng: &mut crate::rng::StreamRng| {
            let t = crate::tree::all_trees(7);
            let tree = &t[rng.random_range(0..t.len())];
            let dec = crate::noncrossing::uniform_decoration(tree, rng);
            triangulate_decorated(tree, &dec).unwrap()
        };
        let delta = 1e-3;
        for _ in 0..30 {
            let (a, b, c) = (random_lam(&mut rng), random_lam(&mut rng), random_lam(&mut rng));
            let ab = hausdorff_distance(&a, &b, delta).unwrap();
            let ba = hausdorff_distance(&b, &a, delta).unwrap();
            let bc = hausdorff_distance(&b, &c, delta).unwrap();
            let ac = hausdorff_distance(&a, &c, delta).unwrap();
            assert_eq!(ab, ba);
            assert!(ac <= ab + bc + 3.0 * delta);
        }
    }

    #[test]
    fn json_shape() {
        let l = lam(3, &[(1, 2), (0, 2)]);
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"m":3,"chords":[[0,2],[1,2]]}"#);
        assert_eq!(serde_json::from_str::<Lamination>(&s).unwrap(), l);
    }
}
