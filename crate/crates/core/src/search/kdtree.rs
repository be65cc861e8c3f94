//! Exact k-nearest-neighbour search over a fixed point set.
//!
//! Splits are on the dimension of largest spread at the median, with buckets at
//! the leaves. Queries descend depth first and track the squared distance from
//! the query to each cell incrementally (one offset per dimension), so a cell is
//! skipped only when that lower bound exceeds the current k-th best distance.
//! Candidates are ordered by `(distance², entry index)`, which is exactly the
//! brute-force ordering, so both paths return the same list.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const BUCKET: usize = 8;

/// Squared Euclidean distance, summed in dimension order.
///
/// Stops early once the running sum exceeds `bound`; the partial sum is then
/// returned (still greater than `bound`).
#[inline]
pub(crate) fn dist2_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    let mut acc = 0.0;
    for (chunk_a, chunk_b) in a.chunks(8).zip(b.chunks(8)) {
        for (x, y) in chunk_a.iter().zip(chunk_b) {
            let d = x - y;
            acc += d * d;
        }
        if acc > bound {
            return acc;
        }
    }
    acc
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    pub dist2: f64,
    pub index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

/// The `k` smallest candidates seen so far.
pub(crate) struct KBest {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl KBest {
    pub fn new(k: usize) -> Self {
        Self { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    /// Squared distance a new point must not exceed to enter.
    #[inline]
    pub fn bound(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |c| c.dist2)
        }
    }

    #[inline]
    pub fn offer(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(top) = self.heap.peek() {
            if c < *top {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    pub fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct KdTree {
    dim: usize,
    nodes: Vec<Node>,
    /// Entry indices in leaf order.
    order: Vec<usize>,
    /// Copy of the points in leaf order, so a bucket is one contiguous read.
    packed: Vec<f64>,
}

impl KdTree {
    /// Builds over `points`, a flat array of `points.len() / dim` rows.
    pub fn build(points: &[f64], dim: usize) -> Self {
        let n = points.len() / dim;
        let mut tree =
            KdTree { dim, nodes: Vec::with_capacity(2 * n / BUCKET + 1), order: (0..n).collect(), packed: Vec::new() };
        if n > 0 {
            tree.build_node(points, 0, n);
        }
        tree.packed = tree.order.iter().flat_map(|&i| points[i * dim..(i + 1) * dim].iter().copied()).collect();
        tree
    }

    fn build_node(&mut self, points: &[f64], start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= BUCKET {
            return id;
        }
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (d, &v) in points[i * dim..(i + 1) * dim].iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        let (split_dim, spread) =
            (0..dim)
                .map(|d| (d, hi[d] - lo[d]))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(spread > 0.0) {
            return id;
        }
        let mid = start + (end - start) / 2;
        let key = |i: usize| points[i * dim + split_dim];
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let value = key(self.order[mid]);
        let left = self.build_node(points, start, mid);
        let right = self.build_node(points, mid, end);
        self.nodes[id] = Node::Split { dim: split_dim, value, left, right };
        id
    }

    pub fn knn(&self, query: &[f64], k: usize) -> Vec<Candidate> {
        let mut best = KBest::new(k);
        if !self.nodes.is_empty() {
            let mut offsets = vec![0.0; self.dim];
            self.search(0, query, 0.0, &mut offsets, &mut best);
        }
        best.into_sorted()
    }

    fn search(&self, node: usize, query: &[f64], rd: f64, offsets: &mut [f64], best: &mut KBest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let dim = self.dim;
                let rows = self.packed[start * dim..end * dim].chunks_exact(dim);
                for (&i, p) in self.order[start..end].iter().zip(rows) {
                    let bound = best.bound();
                    let d2 = dist2_bounded(p, query, bound);
                    if d2 <= bound {
                        best.offer(Candidate { dist2: d2, index: i });
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = query[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, rd, offsets, best);
                let old = offsets[dim];
                let far_rd = rd - old * old + diff * diff;
                // Slack keeps rounding in the incremental bound from pruning an
                // exact tie.
                if far_rd <= best.bound() * (1.0 + 1e-12) + 1e-300 {
                    offsets[dim] = diff;
                    self.search(far, query, far_rd, offsets, best);
                    offsets[dim] = old;
                }
            }
        }
    }
}

/// Exhaustive scan with the same ordering as [`KdTree::knn`].
pub(crate) fn brute_force_knn(points: &[f64], dim: usize, query: &[f64], k: usize) -> Vec<Candidate> {
    let mut best = KBest::new(k);
    for (i, p) in points.chunks_exact(dim).enumerate() {
        let bound = best.bound();
        let d2 = dist2_bounded(p, query, bound);
        if d2 <= bound {
            best.offer(Candidate { dist2: d2, index: i });
        }
    }
    best.into_sorted()
}
