use serde::{Deserialize, Serialize};

use super::Detection;
use crate::imaging::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupParams {
    pub min_neighbors: usize,
    pub eps: f64,
}

impl Default for GroupParams {
    fn default() -> Self {
        Self {
            min_neighbors: 3,
            eps: 0.2,
        }
    }
}

/// Two boxes are similar when x, y, w and h each differ by at most
/// `eps` times their mean extent.
pub fn similar(a: &Rect, b: &Rect, eps: f64) -> bool {
    let delta = eps * (a.w as f64 + a.h as f64 + b.w as f64 + b.h as f64) / 4.0;
    let close = |p: u32, q: u32| (p as f64 - q as f64).abs() <= delta;
    close(a.x, b.x) && close(a.y, b.y) && close(a.w, b.w) && close(a.h, b.h)
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root so labels follow input order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the similarity graph as member index lists,
/// ordered by first member.
pub fn partition(rects: &[Rect], eps: f64) -> Vec<Vec<usize>> {
    let mut ds = DisjointSet::new(rects.len());
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if similar(&rects[i], &rects[j], eps) {
                ds.union(i, j);
            }
        }
    }
    let mut slot = vec![usize::MAX; rects.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..rects.len() {
        let root = ds.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Merges similar detections. Clusters with fewer than `min_neighbors + 1`
/// members are dropped; survivors take the rounded mean of their members'
/// left, top, right and bottom edges.
pub fn group_detections(dets: &[Detection], min_neighbors: usize, eps: f64) -> Vec<Detection> {
    let rects: Vec<Rect> = dets.iter().map(|d| d.bbox).collect();
    partition(&rects, eps)
        .into_iter()
        .filter(|g| g.len() > min_neighbors)
        .map(|g| {
            let n = g.len() as f64;
            let mean = |f: &dyn Fn(&Rect) -> u32| {
                (g.iter().map(|&i| f(&rects[i]) as f64).sum::<f64>() / n).round() as u32
            };
            let x = mean(&|r| r.x);
            let y = mean(&|r| r.y);
            let right = mean(&|r| r.right());
            let bottom = mean(&|r| r.bottom());
            let best = g
                .iter()
                .map(|&i| &dets[i])
                .max_by(|a, b| a.score.total_cmp(&b.score))
                .expect("clusters are nonempty");
            Detection {
                bbox: Rect::new(x, y, (right - x).max(1), (bottom - y).max(1)),
                stages_passed: best.stages_passed,
                score: best.score,
                neighbors: g.len(),
            }
        })
        .collect()
}
