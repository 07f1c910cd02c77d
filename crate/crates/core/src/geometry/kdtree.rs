//! Minimal static 3-d kd-tree for k-nearest-neighbour queries.
//!
//! Built once over a point set; nodes live implicitly at the midpoint of
//! their index range, so no heap-allocated tree structure is needed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Vector3;

pub struct KdTree3 {
    pts: Vec<Vector3<f64>>,
    idx: Vec<u32>,
    axis: Vec<u8>,
}

#[derive(PartialEq)]
struct HeapItem {
    d2: f64,
    idx: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic on (distance, index): among equidistant candidates the
        // larger index is considered "worse", so ties resolve deterministically
        // toward lower indices.
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree3 {
    pub fn build(points: &[Vector3<f64>]) -> Self {
        let mut tree = KdTree3 {
            pts: points.to_vec(),
            idx: (0..points.len() as u32).collect(),
            axis: vec![0; points.len()],
        };
        if !points.is_empty() {
            let n = tree.idx.len();
            tree.split(0, n);
        }
        tree
    }

    fn split(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let axis = self.widest_axis(lo, hi);
        let mid = (lo + hi) / 2;
        let pts = &self.pts;
        self.idx[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            pts[a as usize][axis as usize]
                .total_cmp(&pts[b as usize][axis as usize])
                .then(a.cmp(&b))
        });
        self.axis[mid] = axis;
        self.split(lo, mid);
        self.split(mid + 1, hi);
    }

    fn widest_axis(&self, lo: usize, hi: usize) -> u8 {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &i in &self.idx[lo..hi] {
            let p = &self.pts[i as usize];
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let mut best = 0;
        for a in 1..3 {
            if max[a] - min[a] > max[best] - min[best] {
                best = a;
            }
        }
        best as u8
    }

    /// Indices of the `k` nearest points to `query`, excluding `exclude` if
    /// given. Sorted by ascending distance; equal distances break toward the
    /// lower index.
    pub fn knn(&self, query: &Vector3<f64>, k: usize, exclude: Option<usize>) -> Vec<usize> {
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.idx.is_empty() {
            self.search(0, self.idx.len(), query, k, exclude, &mut heap);
        }
        let mut out: Vec<HeapItem> = heap.into_vec();
        out.sort_unstable();
        out.into_iter().map(|h| h.idx as usize).collect()
    }

    fn search(
        &self,
        lo: usize,
        hi: usize,
        query: &Vector3<f64>,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<HeapItem>,
    ) {
        if hi <= lo {
            return;
        }
        let mid = (lo + hi) / 2;
        let node = self.idx[mid] as usize;
        if Some(node) != exclude {
            let d2 = (self.pts[node] - query).norm_squared();
            if heap.len() < k {
                heap.push(HeapItem {
                    d2,
                    idx: node as u32,
                });
            } else {
                let item = HeapItem {
                    d2,
                    idx: node as u32,
                };
                if item < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(item);
                }
            }
        }
        if hi - lo == 1 {
            return;
        }
        let axis = self.axis[mid] as usize;
        let delta = query[axis] - self.pts[node][axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.search(near_lo, near_hi, query, k, exclude, heap);
        let need_far = heap.len() < k || delta * delta <= heap.peek().unwrap().d2;
        if need_far {
            self.search(far_lo, far_hi, query, k, exclude, heap);
        }
    }
}
