//! Application pipelines: clustered-point seeding for k-means++ and
//! correlated-stock subset selection.

use crate::encoding::{encode, solve_scale, InputFlavor};
use crate::error::{Error, Result};
use crate::kernels::{correlation_kernel, rbf_kernel, ReturnsTable, SpacePoint, StateSpace};
use crate::numerics::{sym_eig, RealSymMatrix};
use crate::rng::RngStream;
use crate::samplers::{sample_ppp, ClassicalSampler, DppSampler, TppChainSampler};
use crate::stats::BBox;

/// Beyond this many points the exact chain sampler gives way to the
/// thresholded classical (permanental) sampler.
pub const TPP_EXACT_MODE_CAP: usize = 200;

/// Attempt cap for the "resample until at least k points" loop.
const RESAMPLE_CAP: usize = 1000;

/// A planar dataset, with the generating centers kept when synthetic.
#[derive(Debug, Clone)]
pub struct Dataset2D {
    pub points: Vec<(f64, f64)>,
    pub true_centers: Option<Vec<(f64, f64)>>,
}

impl Dataset2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pooled per-axis standard deviation; the default RBF bandwidth.
    pub fn std(&self) -> f64 {
        let n = self.points.len() as f64;
        let (mx, my) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x / n, ay + y / n));
        let var = self
            .points
            .iter()
            .map(|&(x, y)| ((x - mx).powi(2) + (y - my).powi(2)) / 2.0)
            .sum::<f64>()
            / n;
        var.sqrt()
    }

    pub fn to_space(&self) -> StateSpace {
        StateSpace::new(
            self.points
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| SpacePoint { id: i.to_string(), x, y })
                .collect(),
            None,
        )
        .expect("indices are unique ids")
    }
}

/// `k` uniform cluster centers in the box, `per_cluster` isotropic Gaussian
/// points around each.
pub fn synth_blobs(
    k: usize,
    per_cluster: usize,
    spread: f64,
    bbox: &BBox,
    rng: &mut RngStream,
) -> Result<Dataset2D> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one cluster".into()));
    }
    if !(spread >= 0.0) {
        return Err(Error::InvalidInput(format!("spread must be non-negative, got {spread}")));
    }
    let centers: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            (
                bbox.xmin + bbox.width() * rng.uniform(),
                bbox.ymin + bbox.height() * rng.uniform(),
            )
        })
        .collect();
    let mut points = Vec::with_capacity(k * per_cluster);
    for &(cx, cy) in &centers {
        for _ in 0..per_cluster {
            points.push((cx + spread * rng.normal(), cy + spread * rng.normal()));
        }
    }
    Ok(Dataset2D { points, true_centers: Some(centers) })
}

/// Standard k-means++ seeding: the first seed is uniform, each further seed
/// is drawn with probability proportional to its squared distance to the
/// nearest seed so far.
pub fn kmeanspp_seeds(
    points: &[(f64, f64)],
    k: usize,
    rng: &mut RngStream,
) -> Result<Vec<(f64, f64)>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("cannot draw {k} seeds from {n} points")));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    chosen.push(rng.below(n as u64) as usize);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, points[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match rng.weighted_index(&d2) {
            Some(i) => i,
            // remaining points all coincide with a seed; fall back to the
            // first unchosen index
            None => (0..n)
                .find(|i| !chosen.contains(i))
                .expect("k <= n leaves an unchosen point"),
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist2(points[i], points[next]));
        }
    }
    Ok(chosen.into_iter().map(|i| points[i]).collect())
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Result of Lloyd iteration.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centers: Vec<(f64, f64)>,
    pub inertia: f64,
    /// Inertia after each assignment step; non-increasing.
    pub inertia_history: Vec<f64>,
}

/// Lloyd's alternation from the given seeds until the centers move less
/// than `tol` or `max_iter` is reached. An emptied cluster is re-seeded to
/// the point farthest from its assigned center.
pub fn lloyd(
    points: &[(f64, f64)],
    seeds: &[(f64, f64)],
    max_iter: usize,
    tol: f64,
) -> Result<Clustering> {
    let k = seeds.len();
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("{k} seeds for {n} points")));
    }
    for (i, a) in seeds.iter().enumerate() {
        if seeds[..i].contains(a) {
            return Err(Error::InvalidInput("seeds must be distinct".into()));
        }
    }
    let mut centers: Vec<(f64, f64)> = seeds.to_vec();
    let mut assignments = vec![0usize; n];
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut inertia = 0.0;
        for (i, &p) in points.iter().enumerate() {
            let (best, best_d) = centers
                .iter()
                .enumerate()
                .map(|(c, &ctr)| (c, dist2(p, ctr)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assignments[i] = best;
            inertia += best_d;
        }
        history.push(inertia);

        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (i, &p) in points.iter().enumerate() {
            let s = &mut sums[assignments[i]];
            s.0 += p.0;
            s.1 += p.1;
            s.2 += 1;
        }
        let mut next = centers.clone();
        for (c, &(sx, sy, cnt)) in sums.iter().enumerate() {
            if cnt > 0 {
                next[c] = (sx / cnt as f64, sy / cnt as f64);
            } else {
                // farthest point from its own center restarts the cluster
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(points[a], centers[assignments[a]])
                            .partial_cmp(&dist2(points[b], centers[assignments[b]]))
                            .unwrap()
                    })
                    .unwrap();
                next[c] = points[far];
            }
        }
        let movement = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(*a, *b).sqrt())
            .fold(0.0_f64, f64::max);
        centers = next;
        if movement < tol {
            break;
        }
    }
    // final assignment under the settled centers
    let mut inertia = 0.0;
    for (i, &p) in points.iter().enumerate() {
        let (best, best_d) = centers
            .iter()
            .enumerate()
            .map(|(c, &ctr)| (c, dist2(p, ctr)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        assignments[i] = best;
        inertia += best_d;
    }
    history.push(inertia);
    Ok(Clustering { assignments, centers, inertia, inertia_history: history })
}

/// Output of the point-process-assisted seeding pipeline.
#[derive(Debug, Clone)]
pub struct SeededRun {
    pub selected: Vec<usize>,
    pub seeds: Vec<(f64, f64)>,
    pub clustering: Clustering,
    /// True when the classical sampler substituted for the exact chain.
    pub used_fallback: bool,
}

/// Samples one clustered subset of the dataset, seeds k-means++ on it, and
/// runs Lloyd on the full dataset from those seeds.
///
/// The subset comes from the thermal threshold process over an RBF kernel
/// with bandwidth `sigma`, rescaled to `mean_points` expected photons.
/// Beyond [`TPP_EXACT_MODE_CAP`] points the thresholded classical sampler
/// substitutes for the chain sampler. `mean_points >= n` degenerates to
/// selecting every point, which reduces the pipeline to plain k-means++.
pub fn tpp_seeded_kmeans(
    data: &Dataset2D,
    k: usize,
    sigma: f64,
    mean_points: f64,
    rng: &mut RngStream,
) -> Result<SeededRun> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("{k} clusters for {n} points")));
    }
    if mean_points < k as f64 {
        return Err(Error::InvalidInput(format!(
            "mean_points {mean_points} below cluster count {k}"
        )));
    }
    let (selected, used_fallback) = if mean_points >= n as f64 {
        ((0..n).collect::<Vec<usize>>(), false)
    } else {
        let space = data.to_space();
        let kernel = rbf_kernel(&space, sigma)?;
        let spectrum = sym_eig(&kernel)?;
        let c = solve_scale(&spectrum.values, InputFlavor::Thermal, mean_points)?;
        sample_at_least(&kernel, c, k, n, rng)?
    };
    let subset_points: Vec<(f64, f64)> = selected.iter().map(|&i| data.points[i]).collect();
    let seeds = kmeanspp_seeds(&subset_points, k, rng)?;
    let clustering = lloyd(&data.points, &seeds, 100, 1e-9)?;
    Ok(SeededRun { selected, seeds, clustering, used_fallback })
}

fn sample_at_least(
    kernel: &RealSymMatrix,
    scale_c: f64,
    k: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<(Vec<usize>, bool)> {
    if n <= TPP_EXACT_MODE_CAP {
        let state = encode(kernel, InputFlavor::Thermal, scale_c)?;
        let sampler = TppChainSampler::new(&state);
        for _ in 0..RESAMPLE_CAP {
            let pattern = sampler.sample(rng)?;
            if pattern.count() >= k {
                return Ok((pattern.selected(), false));
            }
        }
    } else {
        let sampler = ClassicalSampler::from_kernel(kernel, InputFlavor::Thermal, scale_c)?;
        for _ in 0..RESAMPLE_CAP {
            let pattern = sampler.sample(rng).threshold();
            if pattern.count() >= k {
                return Ok((pattern.selected(), true));
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "no sample reached {k} points within {RESAMPLE_CAP} attempts"
    )))
}

/// Greedy closest-pair matching between seeds and reference centers; the
/// mean matched distance scores seed quality.
pub fn seed_center_distance(seeds: &[(f64, f64)], centers: &[(f64, f64)]) -> f64 {
    let mut free_s: Vec<usize> = (0..seeds.len()).collect();
    let mut free_c: Vec<usize> = (0..centers.len()).collect();
    let mut total = 0.0;
    let mut matched = 0usize;
    while !free_s.is_empty() && !free_c.is_empty() {
        let (si, ci, d) = free_s
            .iter()
            .flat_map(|&s| free_c.iter().map(move |&c| (s, c, dist2(seeds[s], centers[c]))))
            .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
            .unwrap();
        total += d.sqrt();
        matched += 1;
        free_s.retain(|&s| s != si);
        free_c.retain(|&c| c != ci);
    }
    total / matched.max(1) as f64
}

/// Process choices for stock selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionProcess {
    Tpp,
    Dpp,
    Ppp,
}

impl std::fmt::Display for SelectionProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionProcess::Tpp => "tpp",
            SelectionProcess::Dpp => "dpp",
            SelectionProcess::Ppp => "ppp",
        })
    }
}

/// One stock-selection run: the chosen tickers, their correlation
/// submatrix, and its mean absolute off-diagonal entry.
#[derive(Debug, Clone)]
pub struct StockRun {
    pub indices: Vec<usize>,
    pub tickers: Vec<String>,
    pub submatrix: Vec<Vec<f64>>,
    pub mean_abs_offdiag: f64,
    pub used_fallback: bool,
}

/// Repeatedly samples ticker subsets under the chosen process, using the
/// standardized correlation matrix as the kernel, scaled to the target
/// subset size.
pub fn select_stocks(
    returns: &ReturnsTable,
    target_size: f64,
    runs: usize,
    process: SelectionProcess,
    rng: &mut RngStream,
) -> Result<Vec<StockRun>> {
    let kernel = correlation_kernel(returns, true)?;
    let m = kernel.dim();
    if !(target_size > 0.0) || target_size > m as f64 {
        return Err(Error::InvalidInput(format!(
            "target size {target_size} out of range for {m} tickers"
        )));
    }
    let spectrum = sym_eig(&kernel)?;

    enum Prepared<'a> {
        TppExact(crate::encoding::GaussianState),
        TppClassical(ClassicalSampler),
        Dpp(DppSampler),
        Ppp(&'a StateSpace),
    }
    // placeholder space for PPP index draws
    let dummy_space = StateSpace::new(
        (0..m)
            .map(|i| SpacePoint { id: i.to_string(), x: i as f64, y: 0.0 })
            .collect(),
        None,
    )?;
    let prepared = match process {
        SelectionProcess::Tpp => {
            let c = solve_scale(&spectrum.values, InputFlavor::Thermal, target_size)?;
            if m <= TPP_EXACT_MODE_CAP {
                Prepared::TppExact(encode(&kernel, InputFlavor::Thermal, c)?)
            } else {
                Prepared::TppClassical(ClassicalSampler::from_kernel(
                    &kernel,
                    InputFlavor::Thermal,
                    c,
                )?)
            }
        }
        SelectionProcess::Dpp => {
            let c = crate::samplers::solve_dpp_scale(&spectrum.values, target_size)?;
            Prepared::Dpp(DppSampler::new(&kernel.scaled(c))?)
        }
        SelectionProcess::Ppp => Prepared::Ppp(&dummy_space),
    };

    let mut out = Vec::with_capacity(runs);
    for _ in 0..runs {
        let (indices, used_fallback) = match &prepared {
            Prepared::TppExact(state) => {
                (TppChainSampler::new(state).sample(rng)?.selected(), false)
            }
            Prepared::TppClassical(sampler) => (sampler.sample(rng).threshold().selected(), true),
            Prepared::Dpp(sampler) => (sampler.sample(rng)?, false),
            Prepared::Ppp(space) => (sample_ppp(space, target_size, rng)?, false),
        };
        let tickers: Vec<String> = indices.iter().map(|&i| returns.tickers[i].clone()).collect();
        let submatrix: Vec<Vec<f64>> = indices
            .iter()
            .map(|&a| indices.iter().map(|&b| kernel.get(a, b)).collect())
            .collect();
        let mean_abs_offdiag = mean_abs_offdiag(&submatrix);
        out.push(StockRun { indices, tickers, submatrix, mean_abs_offdiag, used_fallback });
    }
    Ok(out)
}

fn mean_abs_offdiag(sub: &[Vec<f64>]) -> f64 {
    let n = sub.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += sub[i][j].abs();
            }
        }
    }
    total / (n * (n - 1)) as f64
}
