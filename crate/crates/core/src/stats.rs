//! Statistical characterization of point patterns: nearest-neighbour
//! distances, rasterized Voronoi cell areas, marks over repeated runs,
//! histograms with cross-run error bars, and the comparison utilities the
//! evaluations are built on.

use crate::error::{Error, Result};
use crate::kernels::StateSpace;
use crate::numerics::special::student_t_cdf;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) {
            return Err(Error::InvalidInput(format!(
                "degenerate bounding box [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }
}

/// The state-space extent padded by half the median nearest-neighbour
/// spacing (half a grid spacing on regular grids).
pub fn default_bbox(space: &StateSpace) -> Result<BBox> {
    if space.is_empty() {
        return Err(Error::InvalidInput("empty state space has no bounding box".into()));
    }
    let m = space.len();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in space.points() {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let pad = if m < 2 {
        0.5
    } else {
        let mut nn: Vec<f64> = (0..m)
            .map(|i| {
                (0..m)
                    .filter(|&j| j != i)
                    .map(|j| space.dist2(i, j))
                    .fold(f64::MAX, f64::min)
                    .sqrt()
            })
            .collect();
        nn.sort_by(|a, b| a.partial_cmp(b).unwrap());
        0.5 * nn[m / 2].max(f64::MIN_POSITIVE)
    };
    BBox::new(xmin - pad, xmax + pad, ymin - pad, ymax + pad)
}

fn check_selection(space: &StateSpace, selected: &[usize]) -> Result<()> {
    for (i, &a) in selected.iter().enumerate() {
        if a >= space.len() {
            return Err(Error::InvalidInput(format!(
                "selected index {a} out of range for {} points",
                space.len()
            )));
        }
        if selected[..i].contains(&a) {
            return Err(Error::InvalidInput(format!("selected index {a} repeated")));
        }
    }
    Ok(())
}

/// Per-point distance to the nearest other selected point.
pub fn nnd(space: &StateSpace, selected: &[usize]) -> Result<Vec<f64>> {
    check_selection(space, selected)?;
    if selected.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "nearest-neighbour distances need at least 2 points, got {}",
            selected.len()
        )));
    }
    Ok(selected
        .iter()
        .map(|&i| {
            selected
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| space.dist2(i, j))
                .fold(f64::MAX, f64::min)
                .sqrt()
        })
        .collect())
}

/// Rasterized Voronoi cell areas over a bounding box.
///
/// The box is divided into `resolution x resolution` pixels; each pixel
/// belongs to the nearest selected point, ties resolving to the lowest
/// index. Areas are pixel counts times the pixel area, so they sum to the
/// box area by construction.
pub fn voronoi_areas(
    space: &StateSpace,
    selected: &[usize],
    bbox: &BBox,
    resolution: usize,
) -> Result<Vec<f64>> {
    check_selection(space, selected)?;
    if selected.is_empty() {
        return Err(Error::InvalidInput("voronoi areas need at least one point".into()));
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let sites: Vec<(f64, f64)> = selected.iter().map(|&i| space.coords(i)).collect();
    for (k, &(x, y)) in sites.iter().enumerate() {
        if !bbox.contains(x, y) {
            return Err(Error::InvalidInput(format!(
                "selected point {} at ({x}, {y}) lies outside the bounding box",
                selected[k]
            )));
        }
    }
    let px = bbox.width() / resolution as f64;
    let py = bbox.height() / resolution as f64;
    let mut counts = vec![0u64; sites.len()];
    for r in 0..resolution {
        let y = bbox.ymin + (r as f64 + 0.5) * py;
        for c in 0..resolution {
            let x = bbox.xmin + (c as f64 + 0.5) * px;
            let mut best = 0usize;
            let mut best_d = f64::MAX;
            for (k, &(sx, sy)) in sites.iter().enumerate() {
                let d = (x - sx) * (x - sx) + (y - sy) * (y - sy);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            counts[best] += 1;
        }
    }
    let pixel_area = px * py;
    Ok(counts.iter().map(|&c| c as f64 * pixel_area).collect())
}

/// Raster assignment of pixel centers to their nearest selected point;
/// row-major `resolution x resolution` grid of site positions. Feeds the
/// shaded Voronoi rendering.
pub fn voronoi_raster(
    space: &StateSpace,
    selected: &[usize],
    bbox: &BBox,
    resolution: usize,
) -> Result<Vec<u32>> {
    check_selection(space, selected)?;
    if selected.is_empty() || resolution == 0 {
        return Err(Error::InvalidInput("raster needs points and a positive resolution".into()));
    }
    let sites: Vec<(f64, f64)> = selected.iter().map(|&i| space.coords(i)).collect();
    let px = bbox.width() / resolution as f64;
    let py = bbox.height() / resolution as f64;
    let mut owner = vec![0u32; resolution * resolution];
    for r in 0..resolution {
        let y = bbox.ymin + (r as f64 + 0.5) * py;
        for c in 0..resolution {
            let x = bbox.xmin + (c as f64 + 0.5) * px;
            let mut best = 0u32;
            let mut best_d = f64::MAX;
            for (k, &(sx, sy)) in sites.iter().enumerate() {
                let d = (x - sx) * (x - sx) + (y - sy) * (y - sy);
                if d < best_d {
                    best_d = d;
                    best = k as u32;
                }
            }
            owner[r * resolution + c] = best;
        }
    }
    Ok(owner)
}

/// Per-point appearance counts across a batch of samples.
pub fn marks(samples: &[Vec<usize>], m: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; m];
    for sample in samples {
        for &i in sample {
            if i >= m {
                return Err(Error::InvalidInput(format!(
                    "sample index {i} out of range for {m} points"
                )));
            }
            counts[i] += 1;
        }
    }
    Ok(counts)
}

/// Total variation distance between two distributions on the same support.
pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "supports of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (name, dist) in [("first", p), ("second", q)] {
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{name} distribution sums to {total}, not 1"
            )));
        }
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0)
}

/// Histogram of per-run value batches: per-run normalized frequencies plus
/// their cross-run mean and standard deviation per bin.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub per_run: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// `bins + 1` uniform edges covering `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::InvalidInput(format!("bad histogram range [{lo}, {hi}] / {bins} bins")));
    }
    Ok((0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect())
}

/// Bins each run, normalizes per run, and aggregates across runs.
///
/// Values outside the edge range are clipped into the end bins with a
/// warning.
pub fn histogram(batches: &[Vec<f64>], edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("edges must be strictly increasing".into()));
    }
    if batches.is_empty() {
        return Err(Error::InvalidInput("histogram needs at least one run".into()));
    }
    let bins = edges.len() - 1;
    let mut per_run = Vec::with_capacity(batches.len());
    let mut clipped = 0usize;
    for batch in batches {
        if batch.is_empty() {
            return Err(Error::InvalidInput("histogram runs must be non-empty".into()));
        }
        let mut counts = vec![0u64; bins];
        for &v in batch {
            let idx = if v < edges[0] {
                clipped += 1;
                0
            } else if v >= edges[bins] {
                if v > edges[bins] {
                    clipped += 1;
                }
                bins - 1
            } else {
                edges.partition_point(|&e| e <= v) - 1
            };
            counts[idx] += 1;
        }
        let n = batch.len() as f64;
        per_run.push(counts.iter().map(|&c| c as f64 / n).collect::<Vec<f64>>());
    }
    if clipped > 0 {
        log::warn!("{clipped} histogram values fell outside the edges and were clipped");
    }
    let runs = per_run.len() as f64;
    let mean: Vec<f64> =
        (0..bins).map(|b| per_run.iter().map(|r| r[b]).sum::<f64>() / runs).collect();
    let std: Vec<f64> = (0..bins)
        .map(|b| (per_run.iter().map(|r| (r[b] - mean[b]).powi(2)).sum::<f64>() / runs).sqrt())
        .collect();
    Ok(Histogram { edges: edges.to_vec(), per_run, mean, std })
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// One-sided Welch test: p-value against the alternative
/// `mean(a) < mean(b)`.
pub fn welch_less_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("Welch test needs at least 2 values per side".into()));
    }
    let (ma, va) = mean_and_var(a);
    let (mb, vb) = mean_and_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 <= 0.0 {
        return Ok(if mb > ma { 0.0 } else { 1.0 });
    }
    let t = (mb - ma) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    Ok(1.0 - student_t_cdf(t, df))
}

/// One-sided paired test: p-value against the alternative
/// `mean(a) < mean(b)` over paired observations.
pub fn paired_less_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "paired test with {} vs {} observations",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("paired test needs at least 2 pairs".into()));
    }
    let diffs: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let (md, vd) = mean_and_var(&diffs);
    let n = diffs.len() as f64;
    if vd <= 0.0 {
        return Ok(if md > 0.0 { 0.0 } else { 1.0 });
    }
    let t = md / (vd / n).sqrt();
    Ok(1.0 - student_t_cdf(t, n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{grid_space, SpacePoint};

    fn space(coords: &[(f64, f64)]) -> StateSpace {
        StateSpace::new(
            coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| SpacePoint { id: format!("p{i}"), x, y })
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn nnd_examples() {
        let s = space(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(nnd(&s, &[0, 1]).unwrap(), vec![1.0, 1.0]);

        let s = space(&[(0.0, 0.0), (0.0, 1.0), (5.0, 5.0)]);
        let d = nnd(&s, &[0, 1, 2]).unwrap();
        assert_eq!(d[0], 1.0);
        assert_eq!(d[1], 1.0);
        assert!((d[2] - 41.0_f64.sqrt()).abs() < 1e-12);

        let s = space(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(nnd(&s, &[0, 1, 2]).unwrap(), vec![1.0, 1.0, 1.0]);

        assert!(nnd(&s, &[0]).is_err());
    }

    #[test]
    fn nnd_mutual_pairs_symmetric() {
        let s = space(&[(0.0, 0.0), (0.3, 0.4), (9.0, 9.0), (9.5, 9.0)]);
        let d = nnd(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(d[0], d[1]);
        assert_eq!(d[2], d[3]);
    }

    #[test]
    fn voronoi_single_point_takes_box() {
        let s = space(&[(0.5, 0.5)]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let areas = voronoi_areas(&s, &[0], &bbox, 64).unwrap();
        assert!((areas[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn voronoi_mirror_symmetric_pair() {
        let s = space(&[(0.25, 0.5), (0.75, 0.5)]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let areas = voronoi_areas(&s, &[0, 1], &bbox, 128).unwrap();
        assert!((areas[0] - 0.5).abs() < 1e-12);
        assert!((areas[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn voronoi_quadrant_centers() {
        let s = space(&[(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let res = 128;
        let areas = voronoi_areas(&s, &[0, 1, 2, 3], &bbox, res).unwrap();
        for a in &areas {
            assert!((a - 0.25).abs() <= 2.0 / res as f64, "area {a}");
        }
    }

    #[test]
    fn voronoi_conserves_box_area() {
        let s = space(&[(0.1, 0.9), (0.47, 0.13), (0.81, 0.55)]);
        let bbox = BBox::new(0.0, 1.3, 0.0, 1.1).unwrap();
        for res in [7usize, 64, 111, 512] {
            let areas = voronoi_areas(&s, &[0, 1, 2], &bbox, res).unwrap();
            let total: f64 = areas.iter().sum();
            assert!(
                (total - bbox.area()).abs() <= 1e-12 * bbox.area(),
                "res {res}: total {total}"
            );
        }
    }

    #[test]
    fn voronoi_resolution_refinement() {
        // doubling the resolution moves each area by at most the
        // pixel-perimeter bound
        let s = space(&[(0.25, 0.5), (0.75, 0.5)]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let coarse = voronoi_areas(&s, &[0, 1], &bbox, 64).unwrap();
        let fine = voronoi_areas(&s, &[0, 1], &bbox, 128).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() <= 4.0 * (1.0 / 64.0), "coarse {a} fine {b}");
        }
    }

    #[test]
    fn voronoi_rejects_outside_site() {
        let s = space(&[(2.0, 2.0)]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(voronoi_areas(&s, &[0], &bbox, 16).is_err());
    }

    #[test]
    fn marks_examples() {
        assert_eq!(marks(&[], 3).unwrap(), vec![0, 0, 0]);
        assert_eq!(marks(&[vec![1, 3]], 4).unwrap(), vec![0, 1, 0, 1]);
        let everywhere: Vec<Vec<usize>> = (0..100).map(|_| vec![2]).collect();
        assert_eq!(marks(&everywhere, 3).unwrap()[2], 100);
        assert!(marks(&[vec![5]], 3).is_err());
    }

    #[test]
    fn tvd_examples() {
        assert_eq!(tvd(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(tvd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((tvd(&[0.5, 0.5], &[0.75, 0.25]).unwrap() - 0.25).abs() < 1e-12);
        assert!(tvd(&[0.5, 0.5], &[0.9, 0.2]).is_err());
        assert!(tvd(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[vec![0.2, 0.3, 0.25]], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(h.per_run[0], vec![1.0, 0.0]);

        let h = histogram(&[vec![0.1, 0.9], vec![0.1, 0.9]], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(h.std, vec![0.0, 0.0]);

        let h = histogram(&[vec![0.1], vec![0.9]], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(h.mean, vec![0.5, 0.5]);
        assert_eq!(h.std, vec![0.5, 0.5]);
    }

    #[test]
    fn histogram_clips_to_end_bins() {
        let h = histogram(&[vec![-1.0, 0.2, 7.0]], &[0.0, 0.5, 1.0]).unwrap();
        assert!((h.per_run[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((h.per_run[0][1] - 1.0 / 3.0).abs() < 1e-12);
        let total: f64 = h.per_run[0].iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_bbox_pads_grid_by_half_spacing() {
        let g = grid_space(3, 3, 2.0).unwrap();
        let b = default_bbox(&g).unwrap();
        assert!((b.xmin + 1.0).abs() < 1e-12);
        assert!((b.xmax - 5.0).abs() < 1e-12);
        assert!((b.ymax - 5.0).abs() < 1e-12);
    }

    #[test]
    fn welch_detects_separation() {
        let a = [1.0, 1.1, 0.9, 1.05, 0.95, 1.02];
        let b = [2.0, 2.1, 1.9, 2.05, 1.95, 2.02];
        let p = welch_less_p(&a, &b).unwrap();
        assert!(p < 1e-6, "p = {p}");
        let p_rev = welch_less_p(&b, &a).unwrap();
        assert!(p_rev > 0.999, "p = {p_rev}");
        let p_same = welch_less_p(&a, &a).unwrap();
        assert!((p_same - 0.5).abs() < 1e-9);
    }

    #[test]
    fn paired_test_detects_consistent_improvement() {
        let base: Vec<f64> = (0..30).map(|i| 1.0 + 0.01 * i as f64).collect();
        let better: Vec<f64> = base.iter().map(|v| v + 0.2).collect();
        let p = paired_less_p(&base, &better).unwrap();
        assert!(p < 1e-9, "p = {p}");
        let p = paired_less_p(&better, &base).unwrap();
        assert!(p > 0.999);
    }
}
