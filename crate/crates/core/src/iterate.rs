//! Decorated laminations, composition by insertion into faces, and iterated stable
//! laminations.
//!
//! A face is stored as the increasing list of marked points on its boundary; the
//! list doubles as the order-preserving surjection that carries an inserted
//! lamination of matching resolution (point `t` goes to the `t`-th boundary point).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lamination::{lamination_from_tree, Lamination};
use crate::noncrossing::find_crossing;
use crate::offspring::{build_pair, Pmf, StableOffspring, WeightSeq};
use crate::rng::StreamKey;
use crate::samplers::{ForestSampler, SamplerOptions};

/// Boundary points of every face of a chord set drawn on all `m` marked points
/// (polygon sides count as boundary). Two-point faces are dropped.
pub fn geometric_faces(lam: &Lamination) -> Vec<Vec<usize>> {
    let m = lam.resolution();
    // all chords from p, sorted decreasing, to walk inside nested chords
    let mut from: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(p, q) in lam.chords() {
        from[p].push(q);
    }
    for f in &mut from {
        f.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut out = Vec::new();
    let walk = |a: usize, b: usize, include_b: bool| {
        let mut face = vec![a];
        let mut x = a;
        while x < b {
            // the longest chord from x that stays inside [x, b], excluding (a, b) itself
            let next = from[x]
                .iter()
                .copied()
                .find(|&y| y <= b && !(x == a && y == b))
                .unwrap_or(x + 1);
            x = next;
            if x < b || include_b {
                face.push(x);
            }
        }
        face
    };
    if m >= 3 {
        let outer = walk(0, m, false);
        if outer.len() >= 3 {
            out.push(outer);
        }
    }
    for &(p, q) in lam.chords() {
        if q - p >= 2 {
            out.push(walk(p, q, true));
        }
    }
    out
}

/// Lamination with a decoration (boundary enumeration) on every face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoratedLamination {
    pub lam: Lamination,
    pub faces: Vec<Vec<usize>>,
}

impl DecoratedLamination {
    /// Faces read off the geometry, each decorated by its increasing boundary list.
    pub fn from_lamination(lam: Lamination) -> Self {
        let faces = geometric_faces(&lam);
        DecoratedLamination { lam, faces }
    }
}

/// Inserts `inserts[f]` into face `f` through its boundary enumeration. The faces of the
/// result are listed base face by base face: the mapped faces of its insert, or the face
/// itself when nothing is inserted.
pub fn compose(
    base: &DecoratedLamination,
    inserts: &BTreeMap<usize, DecoratedLamination>,
) -> Result<DecoratedLamination> {
    let mut chords = base.lam.chords().to_vec();
    let mut faces = Vec::with_capacity(base.faces.len());
    for (id, face) in base.faces.iter().enumerate() {
        match inserts.get(&id) {
            None => faces.push(face.clone()),
            Some(ins) => {
                if ins.lam.resolution() != face.len() {
                    return Err(Error::ResolutionMismatch {
                        expected: face.len(),
                        got: ins.lam.resolution(),
                    });
                }
                chords.extend(ins.lam.chords().iter().map(|&(p, q)| (face[p], face[q])));
                faces.extend(
                    ins.faces
                        .iter()
                        .map(|f| f.iter().map(|&t| face[t]).collect::<Vec<_>>()),
                );
            }
        }
    }
    if let Some(id) = inserts.keys().find(|&&id| id >= base.faces.len()) {
        return Err(Error::Domain(format!("no face with id {id}")));
    }
    let lam = Lamination::new(base.lam.resolution(), chords).map_err(|_| Error::CrossingAfterMap)?;
    debug_assert!(find_crossing(lam.chords()).is_none());
    Ok(DecoratedLamination { lam, faces })
}

/// [`compose`] with undecorated inserts, whose faces are read off their geometry.
pub fn compose_plain(
    base: &DecoratedLamination,
    inserts: &BTreeMap<usize, Lamination>,
) -> Result<DecoratedLamination> {
    let decorated = inserts
        .iter()
        .map(|(&f, l)| (f, DecoratedLamination::from_lamination(l.clone())))
        .collect();
    compose(base, &decorated)
}

/// Stable indices `(alpha_1, ..., alpha_q)`, all in `(1, 2)` except the last, in `(1, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Domain("at least one alpha is required".into()));
        }
        let last = alphas.len() - 1;
        for (i, &a) in alphas.iter().enumerate() {
            let ok = if i < last {
                a > 1.0 && a < 2.0
            } else {
                a > 1.0 && a <= 2.0
            };
            if !ok {
                return Err(Error::Domain(format!("alpha_{} = {a} out of range", i + 1)));
            }
        }
        Ok(AlphaVector(alphas))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl std::str::FromStr for AlphaVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        AlphaVector::new(v)
    }
}

/// Conjectured Hausdorff dimension of the iterated lamination:
/// `max(2 - 1/a_1, max_i 1 + (1 - 1/a_i) / (a_1 ... a_{i-1}))`.
pub fn dim_formula(alphas: &[f64]) -> Result<f64> {
    let v = AlphaVector::new(alphas.to_vec())?;
    let a = v.values();
    let mut best = 2.0 - 1.0 / a[0];
    let mut prod = a[0];
    for &ai in &a[1..] {
        best = best.max(1.0 + (1.0 - 1.0 / ai) / prod);
        prod *= ai;
    }
    Ok(best)
}

/// Offspring law standing for index `alpha`: the power-law family below 2, and the
/// critical law of uniform weights (finite variance) at 2.
pub fn offspring_for_alpha(alpha: f64) -> Result<Pmf> {
    if alpha == 2.0 {
        Ok(build_pair(&WeightSeq::uniform(), 1.0 / 3.0)?.mu)
    } else {
        Ok(StableOffspring::new(alpha)?.pmf())
    }
}

/// Caches conditioned samplers by tree size for one offspring law.
struct SizedSamplers {
    mu: Pmf,
    by_size: HashMap<usize, ForestSampler>,
}

impl SizedSamplers {
    fn lamination(&mut self, size: usize, key: &StreamKey) -> Result<Lamination> {
        let sampler = match self.by_size.entry(size) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(ForestSampler::new(&self.mu, size, SamplerOptions::default())?)
            }
        };
        let tree = sampler.tree(&mut key.rng())?;
        Ok(lamination_from_tree(&tree.encode()))
    }
}

/// Per-level output of [`sample_iterated_levels`].
#[derive(Clone, Debug)]
pub struct IteratedSample {
    /// Decorated lamination after each level.
    pub levels: Vec<DecoratedLamination>,
}

impl IteratedSample {
    pub fn last(&self) -> &DecoratedLamination {
        self.levels.last().expect("at least one level")
    }
}

/// Level 1 codes a conditioned `alpha_1` tree with `n` vertices; level `q` inserts an
/// independent conditioned `alpha_q` lamination of resolution `beta` into every face
/// with `beta >= 4` boundary points. Streams: `key / level q / face f`.
pub fn sample_iterated_levels(alphas: &AlphaVector, n: usize, key: &StreamKey) -> Result<IteratedSample> {
    if n < 3 {
        return Err(Error::Domain(format!("base size {n} must be >= 3")));
    }
    let a = alphas.values();
    let mut first = SizedSamplers {
        mu: offspring_for_alpha(a[0])?,
        by_size: HashMap::new(),
    };
    let base = first.lamination(n, &key.child("level", 1).child("face", 0))?;
    let mut levels = vec![DecoratedLamination::from_lamination(base)];
    for (q, &alpha) in a.iter().enumerate().skip(1) {
        let mut samplers = SizedSamplers {
            mu: offspring_for_alpha(alpha)?,
            by_size: HashMap::new(),
        };
        let cur = levels.last().expect("nonempty");
        let mut inserts = BTreeMap::new();
        for (f, face) in cur.faces.iter().enumerate() {
            let beta = face.len();
            if beta < 4 {
                continue;
            }
            let stream = key.child("level", q as u64 + 1).child("face", f as u64);
            let lam = samplers.lamination(beta, &stream)?;
            inserts.insert(f, DecoratedLamination::from_lamination(lam));
        }
        let next = compose(cur, &inserts)?;
        levels.push(next);
    }
    Ok(IteratedSample { levels })
}

/// The final lamination of [`sample_iterated_levels`].
pub fn sample_iterated(alphas: &AlphaVector, n: usize, key: &StreamKey) -> Result<Lamination> {
    Ok(sample_iterated_levels(alphas, n, key)?.last().lam.clone())
}
