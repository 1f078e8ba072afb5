use rayon::prelude::*;

use super::SetError;
use crate::Complex;

/// Above this many target points the directed distance switches from brute
/// force to a sorted-projection search.
pub const BUCKET_THRESHOLD: usize = 10_000;

const CHUNK: usize = 256;

/// Points of ℝ^dim stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Self {
        let mut c = Self::new(dim);
        for r in rows {
            c.push(r);
        }
        c
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim, "point dimension");
        self.coords.extend_from_slice(p);
    }

    pub fn push_complex(&mut self, p: &[Complex]) {
        assert_eq!(2 * p.len(), self.dim, "point dimension");
        for z in p {
            self.coords.push(z.re);
            self.coords.push(z.im);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Keeps the points inside the axis-aligned box `[lo, hi]`.
    pub fn clipped(&self, lo: &[f64], hi: &[f64]) -> Self {
        let mut c = Self::new(self.dim);
        for p in self.iter() {
            if p.iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h)
            {
                c.push(p);
            }
        }
        c
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Nearest-point search structure over a fixed target cloud.
enum Index<'a> {
    Brute(&'a PointCloud),
    /// Targets sorted along the coordinate of largest spread.
    Sorted {
        cloud: &'a PointCloud,
        axis: usize,
        order: Vec<usize>,
        keys: Vec<f64>,
    },
}

impl<'a> Index<'a> {
    fn new(cloud: &'a PointCloud) -> Self {
        if cloud.len() <= BUCKET_THRESHOLD {
            return Index::Brute(cloud);
        }
        let axis = (0..cloud.dim())
            .max_by(|&a, &b| spread(cloud, a).total_cmp(&spread(cloud, b)))
            .unwrap_or(0);
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.sort_by(|&i, &j| cloud.point(i)[axis].total_cmp(&cloud.point(j)[axis]));
        let keys = order.iter().map(|&i| cloud.point(i)[axis]).collect();
        Index::Sorted {
            cloud,
            axis,
            order,
            keys,
        }
    }

    /// Distance from `p` to the target set; stops early once it is known to be
    /// at most `stop`, returning some value `<= stop` in that case.
    fn nearest(&self, p: &[f64], stop: f64) -> f64 {
        match self {
            Index::Brute(cloud) => {
                let mut best = f64::INFINITY;
                for q in cloud.iter() {
                    best = best.min(dist(p, q));
                    if best <= stop {
                        break;
                    }
                }
                best
            }
            Index::Sorted {
                cloud,
                axis,
                order,
                keys,
            } => {
                let x = p[*axis];
                let start = keys.partition_point(|&k| k < x);
                let mut best = f64::INFINITY;
                let (mut lo, mut hi) = (start, start);
                loop {
                    let lo_gap = if lo > 0 { x - keys[lo - 1] } else { f64::INFINITY };
                    let hi_gap = if hi < keys.len() { keys[hi] - x } else { f64::INFINITY };
                    let gap = lo_gap.min(hi_gap);
                    if gap >= best || gap == f64::INFINITY {
                        break;
                    }
                    let idx = if lo_gap <= hi_gap {
                        lo -= 1;
                        lo
                    } else {
                        hi += 1;
                        hi - 1
                    };
                    best = best.min(dist(p, cloud.point(order[idx])));
                    if best <= stop {
                        break;
                    }
                }
                best
            }
        }
    }
}

fn spread(c: &PointCloud, axis: usize) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in c.iter() {
        lo = lo.min(p[axis]);
        hi = hi.max(p[axis]);
    }
    hi - lo
}

/// `max_{p in from} min_{q in to} |p - q|` for nonempty clouds.
///
/// Exact: points that cannot raise the running maximum are abandoned early,
/// which only skips work. Parallel over chunks with an order-independent max.
pub fn directed_hausdorff(from: &PointCloud, to: &PointCloud) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    let index = Index::new(to);
    let n = from.len();
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut local = 0.0f64;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let d = index.nearest(from.point(i), local);
                local = local.max(d);
            }
            local
        })
        .reduce(|| 0.0, f64::max)
}

/// Smallest distance between two clouds (infinite if either is empty).
pub fn set_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let index = Index::new(b);
    (0..a.len())
        .into_par_iter()
        .map(|i| index.nearest(a.point(i), 0.0))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Extended Hausdorff distance in the Euclidean norm.
///
/// `0` if both sets are empty, `ambient_diam + 1` if exactly one is, and the
/// larger of the two directed distances otherwise.
pub fn hausdorff(
    e: &PointCloud,
    f: &PointCloud,
    ambient_diam: Option<f64>,
) -> Result<f64, SetError> {
    match (e.is_empty(), f.is_empty()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => ambient_diam
            .map(|d| d + 1.0)
            .ok_or(SetError::MissingAmbientDiam),
        (false, false) => {
            if e.dim() != f.dim() {
                return Err(SetError::DimensionMismatch {
                    expected: e.dim(),
                    found: f.dim(),
                });
            }
            Ok(directed_hausdorff(e, f).max(directed_hausdorff(f, e)))
        }
    }
}

/// Hausdorff distance between two nonempty finite subsets of ℂ.
pub fn hausdorff_complex(a: &[Complex], b: &[Complex]) -> f64 {
    let directed = |x: &[Complex], y: &[Complex]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud1(xs: &[f64]) -> PointCloud {
        PointCloud::from_rows(1, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    #[test]
    fn basic_values() {
        let e = cloud1(&[0.0]);
        let f = cloud1(&[3.0]);
        assert_eq!(hausdorff(&e, &f, None).unwrap(), 3.0);
        assert_eq!(hausdorff(&e, &e, None).unwrap(), 0.0);
        let empty = PointCloud::new(1);
        assert_eq!(hausdorff(&empty, &f, Some(2.0)).unwrap(), 3.0);
        assert_eq!(hausdorff(&empty, &empty, None).unwrap(), 0.0);
        assert_eq!(
            hausdorff(&empty, &f, None),
            Err(SetError::MissingAmbientDiam)
        );
    }

    #[test]
    fn asymmetric_directed_parts() {
        let e = cloud1(&[0.0, 1.0]);
        let f = cloud1(&[0.0, 1.0, 5.0]);
        assert_eq!(directed_hausdorff(&e, &f), 0.0);
        assert_eq!(directed_hausdorff(&f, &e), 4.0);
        assert_eq!(hausdorff(&e, &f, None).unwrap(), 4.0);
    }

    #[test]
    fn sorted_index_matches_brute_force() {
        // deterministic pseudo-random clouds above the bucketing threshold
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut a = PointCloud::new(3);
        let mut b = PointCloud::new(3);
        for _ in 0..300 {
            a.push(&[next(), 2.0 * next(), next()]);
        }
        for _ in 0..(BUCKET_THRESHOLD + 500) {
            b.push(&[next() * 1.2, next(), next() - 0.1]);
        }
        let fast = directed_hausdorff(&a, &b);
        let brute = a
            .iter()
            .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(fast, brute);
        let sd = set_distance(&a, &b);
        let brute_sd = a
            .iter()
            .flat_map(|p| b.iter().map(move |q| dist(p, q)))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(sd, brute_sd);
    }

    #[test]
    fn complex_fibers() {
        let a = [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];
        let b = [Complex::new(1.0, 0.5), Complex::new(-1.0, 0.5)];
        assert_eq!(hausdorff_complex(&a, &b), 0.5);
    }
}
