//! Density and hierarchical clustering of planar points, plus hull construction.
//!
//! DBSCAN assigns a border point to the cluster of its nearest core point (ties by
//! core coordinates), so labels do not depend on input order beyond cluster numbering.
//! Cluster ids are numbered by the first point, in input order, that carries them.

mod hull;
mod ward;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PlanarPoint;

pub use hull::{concave_hull, convex_hull, Hull, HullKind};
pub use ward::ward_cluster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Cluster(usize),
    Noise,
}

impl Label {
    pub fn cluster(&self) -> Option<usize> {
        match self {
            Label::Cluster(c) => Some(*c),
            Label::Noise => None,
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(self, Label::Noise)
    }

    /// Cluster id, or -1 for noise.
    pub fn as_i64(&self) -> i64 {
        self.cluster().map_or(-1, |c| c as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterMethod {
    Dbscan,
    Dmdbscan,
    Ward,
}

impl ClusterMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "dbscan" => Ok(Self::Dbscan),
            "dmdbscan" => Ok(Self::Dmdbscan),
            "ward" => Ok(Self::Ward),
            other => Err(Error::Config(format!("unknown cluster method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterParams {
    pub eps: Vec<f64>,
    pub min_pts: Option<usize>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub labels: Vec<Label>,
    pub k: usize,
    pub method: ClusterMethod,
    pub params: ClusterParams,
}

impl ClusterResult {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_noise()).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for l in &self.labels {
            if let Some(c) = l.cluster() {
                sizes[c] += 1;
            }
        }
        sizes
    }

    /// CSV with header `point_index,x,y,label`; noise is written as -1.
    pub fn to_csv(&self, points: &[PlanarPoint]) -> Result<String> {
        if points.len() != self.labels.len() {
            return Err(Error::param(
                "points",
                format!("{} points for {} labels", points.len(), self.labels.len()),
            ));
        }
        let mut out = String::from("point_index,x,y,label\n");
        for (i, (p, l)) in points.iter().zip(&self.labels).enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", p.x, p.y, l.as_i64());
        }
        Ok(out)
    }
}

/// Renumbers cluster ids by first appearance in input order.
fn renumber(labels: &mut [Label]) -> usize {
    let mut map: Vec<Option<usize>> = Vec::new();
    let mut next = 0;
    for l in labels.iter_mut() {
        if let Label::Cluster(c) = *l {
            if c >= map.len() {
                map.resize(c + 1, None);
            }
            let id = *map[c].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            *l = Label::Cluster(id);
        }
    }
    next
}

fn check_points(points: &[PlanarPoint]) -> Result<()> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(i) => Err(Error::DegenerateInput(format!("point {i} is not finite"))),
        None => Ok(()),
    }
}

/// Neighbor lists (including self) within `eps`, in ascending index order,
/// found through a uniform grid of `eps`-sized buckets.
fn neighborhoods(points: &[PlanarPoint], eps: f64) -> Vec<Vec<u32>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let eps2 = eps * eps;
    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let key = |p: &PlanarPoint| -> (i64, i64) {
        (
            ((p.x - min_x) / eps).floor() as i64,
            ((p.y - min_y) / eps).floor() as i64,
        )
    };
    let mut buckets: std::collections::HashMap<(i64, i64), Vec<u32>> =
        std::collections::HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i as u32);
    }
    points
        .par_iter()
        .map(|p| {
            let (kx, ky) = key(p);
            let mut out = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(b) = buckets.get(&(kx + dx, ky + dy)) {
                        out.extend(
                            b.iter()
                                .copied()
                                .filter(|&j| p.dist2(&points[j as usize]) <= eps2),
                        );
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// Density-based clustering: a point is core when at least `min_pts` points,
/// itself included, lie within `eps`.
pub fn dbscan(points: &[PlanarPoint], eps: f64, min_pts: usize) -> Result<ClusterResult> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param("eps", format!("{eps} is not > 0")));
    }
    if min_pts == 0 {
        return Err(Error::param("min_pts", "must be at least 1"));
    }
    check_points(points)?;
    let nbrs = neighborhoods(points, eps);
    let n = points.len();
    let core: Vec<bool> = nbrs.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![Label::Noise; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != Label::Noise {
            continue;
        }
        labels[seed] = Label::Cluster(next);
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            for &j in &nbrs[i] {
                let j = j as usize;
                if core[j] && labels[j] == Label::Noise {
                    labels[j] = Label::Cluster(next);
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }

    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest = nbrs[i]
            .iter()
            .map(|&j| j as usize)
            .filter(|&j| core[j])
            .min_by(|&a, &b| {
                let (pa, pb) = (points[a], points[b]);
                points[i]
                    .dist2(&pa)
                    .total_cmp(&points[i].dist2(&pb))
                    .then(pa.x.total_cmp(&pb.x))
                    .then(pa.y.total_cmp(&pb.y))
            });
        if let Some(c) = nearest {
            labels[i] = labels[c];
        }
    }

    let k = renumber(&mut labels);
    Ok(ClusterResult {
        labels,
        k,
        method: ClusterMethod::Dbscan,
        params: ClusterParams {
            eps: vec![eps],
            min_pts: Some(min_pts),
            k: None,
        },
    })
}

/// Distance from each point to its `k`-th nearest other point.
pub fn k_distances(points: &[PlanarPoint], k: usize) -> Result<Vec<f64>> {
    if k == 0 || points.len() <= k {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot have a {k}-th nearest neighbor",
            points.len()
        )));
    }
    check_points(points)?;
    Ok(points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<f64> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| p.dist2(q))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect())
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Knee positions of a sorted k-distance curve. A knee is the last index before
/// a jump: the second difference of the log curve exceeds both 3x its median
/// magnitude and ln 2 (a doubling). Adjacent candidates collapse to the strongest.
fn knees(sorted: &[f64], min_segment: usize) -> Vec<usize> {
    let n = sorted.len();
    if n < 3 {
        return Vec::new();
    }
    let floor = sorted.iter().copied().find(|v| *v > 0.0).unwrap_or(1.0);
    let logs: Vec<f64> = sorted.iter().map(|v| v.max(floor).ln()).collect();
    let s: Vec<f64> = (1..n - 1)
        .map(|i| logs[i - 1] - 2.0 * logs[i] + logs[i + 1])
        .collect();
    let mut mags: Vec<f64> = s.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let threshold = (3.0 * median_sorted(&mags)).max(std::f64::consts::LN_2);

    let mut candidates: Vec<usize> = Vec::new();
    let mut run: Option<usize> = None;
    for (k, v) in s.iter().enumerate() {
        let i = k + 1;
        if *v > threshold {
            run = Some(match run {
                Some(best) if s[best - 1] >= *v => best,
                _ => i,
            });
        } else if let Some(best) = run.take() {
            candidates.push(best);
        }
    }
    candidates.extend(run);

    let mut accepted = Vec::new();
    let mut start = 0;
    for knee in candidates {
        if knee + 1 - start >= min_segment && n - (knee + 1) >= min_segment {
            accepted.push(knee);
            start = knee + 1;
        }
    }
    accepted
}

/// Eps levels for multi-density clustering: the sorted k-distance curve is cut at
/// its knees and each segment contributes its median, ascending.
pub fn dmdbscan_eps_levels(points: &[PlanarPoint], min_pts: usize) -> Result<Vec<f64>> {
    if min_pts == 0 {
        return Err(Error::param("min_pts", "must be at least 1"));
    }
    let mut kd = k_distances(points, min_pts)?;
    kd.sort_by(f64::total_cmp);
    if kd[kd.len() - 1] == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let mut levels = Vec::new();
    let mut start = 0;
    for knee in knees(&kd, min_pts + 1)
        .into_iter()
        .chain(std::iter::once(kd.len() - 1))
    {
        levels.push(median_sorted(&kd[start..=knee]));
        start = knee + 1;
    }
    // A segment of coincident points has median 0; eps must stay positive.
    let smallest = kd
        .iter()
        .copied()
        .find(|v| *v > 0.0)
        .unwrap_or(f64::MIN_POSITIVE);
    for l in levels.iter_mut() {
        *l = l.max(smallest);
    }
    levels.dedup();
    Ok(levels)
}

/// DBSCAN at each eps level in ascending order, each pass over the points still
/// unlabeled; later clusters are numbered after earlier ones.
pub fn dmdbscan(points: &[PlanarPoint], min_pts: usize) -> Result<ClusterResult> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("no points to cluster".into()));
    }
    let levels = dmdbscan_eps_levels(points, min_pts)?;
    dmdbscan_with_levels(points, min_pts, &levels)
}

pub fn dmdbscan_with_levels(
    points: &[PlanarPoint],
    min_pts: usize,
    levels: &[f64],
) -> Result<ClusterResult> {
    let mut labels = vec![Label::Noise; points.len()];
    let mut offset = 0;
    for &eps in levels {
        let remaining: Vec<usize> = (0..points.len())
            .filter(|&i| labels[i].is_noise())
            .collect();
        if remaining.is_empty() {
            break;
        }
        let subset: Vec<PlanarPoint> = remaining.iter().map(|&i| points[i]).collect();
        let r = dbscan(&subset, eps, min_pts)?;
        for (&i, l) in remaining.iter().zip(&r.labels) {
            if let Label::Cluster(c) = l {
                labels[i] = Label::Cluster(offset + c);
            }
        }
        offset += r.k;
    }
    Ok(ClusterResult {
        labels,
        k: offset,
        method: ClusterMethod::Dmdbscan,
        params: ClusterParams {
            eps: levels.to_vec(),
            min_pts: Some(min_pts),
            k: None,
        },
    })
}

/// Members of the most populous cluster; ties go to the lowest cluster id.
pub fn largest_cluster(result: &ClusterResult, points: &[PlanarPoint]) -> Result<Vec<PlanarPoint>> {
    if points.len() != result.labels.len() {
        return Err(Error::param("points", "length differs from labels"));
    }
    let sizes = result.sizes();
    let best = sizes
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
        .ok_or(Error::AllNoise)?;
    Ok(points
        .iter()
        .zip(&result.labels)
        .filter(|(_, l)| l.cluster() == Some(best))
        .map(|(p, _)| *p)
        .collect())
}
