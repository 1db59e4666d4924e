use crate::torus::MAX_DIM;

pub(crate) type Point = [f64; MAX_DIM];

/// Bucket index over points in a box of `R^d`.
pub(crate) struct LocalIndex {
    d: usize,
    lo: Point,
    side: f64,
    dims: [usize; MAX_DIM],
    start: Vec<u32>,
    pts: Vec<Point>,
    ids: Vec<u32>,
}

impl LocalIndex {
    /// `side` is the preferred bucket width; it grows if the box would need
    /// more than about four million buckets.
    pub(crate) fn new(points: &[Point], d: usize, lo: Point, hi: Point, side: f64) -> Self {
        let mut side = side.max(1e-12);
        let extent = |s: f64| -> [usize; MAX_DIM] {
            let mut dims = [1; MAX_DIM];
            for i in 0..d {
                dims[i] = (((hi[i] - lo[i]) / s).ceil() as usize).max(1);
            }
            dims
        };
        let mut dims = extent(side);
        while dims[..d].iter().map(|&x| x as f64).product::<f64>() > 4e6 {
            side *= 2.0;
            dims = extent(side);
        }
        let total: usize = dims[..d].iter().product();
        let mut index = Self {
            d,
            lo,
            side,
            dims,
            start: vec![0; total + 1],
            pts: Vec::with_capacity(points.len()),
            ids: Vec::with_capacity(points.len()),
        };
        let buckets: Vec<usize> = points.iter().map(|p| index.bucket(p)).collect();
        for &b in &buckets {
            index.start[b + 1] += 1;
        }
        for i in 0..total {
            index.start[i + 1] += index.start[i];
        }
        let mut fill = index.start.clone();
        index.pts.resize(points.len(), [0.0; MAX_DIM]);
        index.ids.resize(points.len(), 0);
        for (i, (&b, p)) in buckets.iter().zip(points).enumerate() {
            let slot = fill[b] as usize;
            index.pts[slot] = *p;
            index.ids[slot] = i as u32;
            fill[b] += 1;
        }
        index
    }

    fn coord(&self, x: f64, axis: usize) -> usize {
        let c = ((x - self.lo[axis]) / self.side).floor();
        (c.max(0.0) as usize).min(self.dims[axis] - 1)
    }

    fn bucket(&self, p: &Point) -> usize {
        (0..self.d).rev().fold(0, |acc, i| acc * self.dims[i] + self.coord(p[i], i))
    }

    /// Calls `f(id, dist_sq)` for every point within `radius` of `q`; stops
    /// early when `f` returns `false`.
    pub(crate) fn visit_within(&self, q: &Point, radius: f64, mut f: impl FnMut(u32, f64) -> bool) {
        let r2 = radius * radius;
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for i in 0..self.d {
            lo[i] = self.coord(q[i] - radius, i);
            hi[i] = self.coord(q[i] + radius, i);
        }
        let mut cur = lo;
        loop {
            let b = (0..self.d).rev().fold(0, |acc, i| acc * self.dims[i] + cur[i]);
            for slot in self.start[b] as usize..self.start[b + 1] as usize {
                let p = &self.pts[slot];
                let dist2: f64 = (0..self.d).map(|i| (p[i] - q[i]).powi(2)).sum();
                if dist2 <= r2 && !f(self.ids[slot], dist2) {
                    return;
                }
            }
            let mut axis = 0;
            loop {
                if axis == self.d {
                    return;
                }
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    pub(crate) fn any_within(&self, q: &Point, radius: f64) -> bool {
        let mut hit = false;
        self.visit_within(q, radius, |_, _| {
            hit = true;
            false
        });
        hit
    }
}
