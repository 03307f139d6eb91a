//! Agglomerative clustering under Ward's minimum-variance criterion.

use super::{renumber, ClusterMethod, ClusterParams, ClusterResult, Label};
use crate::error::{Error, Result};
use crate::geom::PlanarPoint;

/// Condensed symmetric matrix of merge costs.
struct Dissim {
    n: usize,
    d: Vec<f64>,
}

impl Dissim {
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.d[k] = v;
    }
}

/// Merges clusters by the Lance-Williams Ward update on squared distances until
/// `k` remain. A merged cluster keeps the slot of its lowest point index; equal
/// costs go to the lexicographically smallest slot pair.
pub fn ward_cluster(points: &[PlanarPoint], k: usize) -> Result<ClusterResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("{k} is outside 1..={n}")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput("non-finite point".into()));
    }
    let mut dm = Dissim {
        n,
        d: vec![0.0; n * n.saturating_sub(1) / 2],
    };
    for i in 0..n {
        for j in (i + 1)..n {
            dm.set(i, j, points[i].dist2(&points[j]));
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();

    // Per-slot minimum over higher active slots: (cost, partner).
    let row_min = |dm: &Dissim, active: &[bool], i: usize| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (j, _) in active.iter().enumerate().skip(i + 1).filter(|(_, a)| **a) {
            let v = dm.get(i, j);
            if best.map_or(true, |(b, _)| v < b) {
                best = Some((v, j));
            }
        }
        best
    };
    let mut cache: Vec<Option<(f64, usize)>> = (0..n).map(|i| row_min(&dm, &active, i)).collect();

    for _ in 0..(n - k) {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Some((v, j)) = cache[i] {
                if pick.map_or(true, |(b, _, _)| v < b) {
                    pick = Some((v, i, j));
                }
            }
        }
        let (_, a, b) = pick.expect("at least two active clusters remain");

        for m in 0..n {
            if !active[m] || m == a || m == b {
                continue;
            }
            let (na, nb, nm) = (size[a] as f64, size[b] as f64, size[m] as f64);
            let v = ((na + nm) * dm.get(m, a) + (nb + nm) * dm.get(m, b) - nm * dm.get(a, b))
                / (na + nb + nm);
            dm.set(m, a, v);
        }
        size[a] += size[b];
        active[b] = false;
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }

        cache[b] = None;
        cache[a] = row_min(&dm, &active, a);
        for m in 0..a {
            if !active[m] {
                continue;
            }
            match cache[m] {
                Some((_, j)) if j == a || j == b => cache[m] = row_min(&dm, &active, m),
                Some((v, j)) => {
                    let nv = dm.get(m, a);
                    if nv < v || (nv == v && a < j) {
                        cache[m] = Some((nv, a));
                    }
                }
                None => cache[m] = row_min(&dm, &active, m),
            }
        }
        for m in (a + 1)..b {
            if active[m] && matches!(cache[m], Some((_, j)) if j == b) {
                cache[m] = row_min(&dm, &active, m);
            }
        }
    }

    let mut labels: Vec<Label> = owner.into_iter().map(Label::Cluster).collect();
    let clusters = renumber(&mut labels);
    Ok(ClusterResult {
        labels,
        k: clusters,
        method: ClusterMethod::Ward,
        params: ClusterParams {
            eps: Vec::new(),
            min_pts: None,
            k: Some(k),
        },
    })
}
