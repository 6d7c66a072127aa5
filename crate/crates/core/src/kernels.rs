//! State spaces and kernel matrices: RBF kernels on point sets,
//! density-rescaled variants, and correlation kernels built from returns
//! tables, together with the CSV ingestion for both.

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::RealSymMatrix;
use crate::rng::RngStream;

/// One indexed point of a discrete state space.
#[derive(Debug, Clone)]
pub struct SpacePoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// A finite set of 2-D points, optionally weighted by a per-point density.
#[derive(Debug, Clone)]
pub struct StateSpace {
    points: Vec<SpacePoint>,
    densities: Option<Vec<f64>>,
}

impl StateSpace {
    pub fn new(points: Vec<SpacePoint>, densities: Option<Vec<f64>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &points {
            if !seen.insert(p.id.clone()) {
                return Err(Error::InvalidInput(format!("duplicate point id {:?}", p.id)));
            }
        }
        if let Some(d) = &densities {
            if d.len() != points.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} densities for {} points",
                    d.len(),
                    points.len()
                )));
            }
            if d.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidInput("densities must be finite and >= 0".into()));
            }
        }
        Ok(Self { points, densities })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    pub fn densities(&self) -> Option<&[f64]> {
        self.densities.as_deref()
    }

    pub fn coords(&self, i: usize) -> (f64, f64) {
        (self.points[i].x, self.points[i].y)
    }

    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        let dx = self.points[i].x - self.points[j].x;
        let dy = self.points[i].y - self.points[j].y;
        dx * dx + dy * dy
    }
}

/// Row-major lattice of `nx` columns by `ny` rows with the given spacing.
/// Point ids are `"row,col"`.
pub fn grid_space(nx: usize, ny: usize, spacing: f64) -> Result<StateSpace> {
    if nx * ny == 0 {
        return Err(Error::InvalidInput("grid must contain at least one point".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!("grid spacing must be positive, got {spacing}")));
    }
    let mut points = Vec::with_capacity(nx * ny);
    for r in 0..ny {
        for c in 0..nx {
            points.push(SpacePoint {
                id: format!("{r},{c}"),
                x: c as f64 * spacing,
                y: r as f64 * spacing,
            });
        }
    }
    StateSpace::new(points, None)
}

/// Gaussian similarity kernel `K_ij = exp(-|r_i - r_j|^2 / sigma^2)`.
///
/// Unit diagonal; positive semidefinite by construction.
pub fn rbf_kernel(space: &StateSpace, sigma: f64) -> Result<RealSymMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let inv = 1.0 / (sigma * sigma);
    Ok(RealSymMatrix::from_fn(space.len(), |i, j| (-space.dist2(i, j) * inv).exp()))
}

/// Density-rescaled RBF kernel `K_ij = lambda_i lambda_j exp(-|r_i - r_j|^2 / sigma^2)`.
pub fn density_kernel(space: &StateSpace, sigma: f64) -> Result<RealSymMatrix> {
    let Some(d) = space.densities() else {
        return Err(Error::InvalidInput("density kernel needs a space with densities".into()));
    };
    let base = rbf_kernel(space, sigma)?;
    Ok(RealSymMatrix::from_fn(space.len(), |i, j| d[i] * d[j] * base.get(i, j)))
}

/// Daily returns for a set of tickers; `values[day][ticker]`.
#[derive(Debug, Clone)]
pub struct ReturnsTable {
    pub tickers: Vec<String>,
    pub days: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ReturnsTable {
    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }
}

/// Correlation kernel `(1/n) sum_j R_j R_j^T` over day vectors; positive
/// semidefinite by construction.
///
/// With `standardize` each ticker is first centered and scaled to unit
/// variance, making the result a correlation matrix with unit diagonal.
/// Without it the raw second-moment kernel is returned.
pub fn correlation_kernel(returns: &ReturnsTable, standardize: bool) -> Result<RealSymMatrix> {
    let n_days = returns.n_days();
    let n = returns.n_tickers();
    if n_days < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 days, got {n_days}")));
    }
    let mut values = returns.values.clone();
    if standardize {
        for t in 0..n {
            let mean: f64 = values.iter().map(|row| row[t]).sum::<f64>() / n_days as f64;
            for row in values.iter_mut() {
                row[t] -= mean;
            }
            let var: f64 = values.iter().map(|row| row[t] * row[t]).sum::<f64>() / n_days as f64;
            if var <= 0.0 {
                return Err(Error::ZeroVariance(returns.tickers[t].clone()));
            }
            let inv = 1.0 / var.sqrt();
            for row in values.iter_mut() {
                row[t] *= inv;
            }
        }
    }
    Ok(RealSymMatrix::from_fn(n, |a, b| {
        values.iter().map(|row| row[a] * row[b]).sum::<f64>() / n_days as f64
    }))
}

fn split_csv_line(line: &str) -> Vec<String> {
    line.split(',').map(|f| f.trim().to_string()).collect()
}

/// Loads a state space from CSV with header `id,x,y` or `id,x,y,density`.
pub fn load_space(path: impl AsRef<Path>) -> Result<StateSpace> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Parse { line: 1, msg: "empty space file".into() }),
    };
    let cols = split_csv_line(&header.to_ascii_lowercase());
    let with_density = match cols.as_slice() {
        [a, b, c] if a == "id" && b == "x" && c == "y" => false,
        [a, b, c, d] if a == "id" && b == "x" && c == "y" && d == "density" => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header id,x,y[,density], got {header:?}"),
            })
        }
    };
    let mut points = Vec::new();
    let mut densities = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        let expected = if with_density { 4 } else { 3 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {expected} fields, got {}", fields.len()),
            });
        }
        let x: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad x value {:?}", fields[1]),
        })?;
        let y: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad y value {:?}", fields[2]),
        })?;
        if with_density {
            let d: f64 = fields[3].parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad density value {:?}", fields[3]),
            })?;
            densities.push(d);
        }
        points.push(SpacePoint { id: fields[0].clone(), x, y });
    }
    StateSpace::new(points, if with_density { Some(densities) } else { None })
}

/// Interpretation of a returns CSV body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnsMode {
    /// Body rows hold prices; converted to log-returns `ln(p_t / p_{t-1})`.
    Prices,
    /// Body rows already hold returns.
    Returns,
}

impl std::str::FromStr for ReturnsMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prices" => Ok(ReturnsMode::Prices),
            "returns" => Ok(ReturnsMode::Returns),
            other => Err(Error::InvalidInput(format!("unknown returns mode {other:?}"))),
        }
    }
}

/// Loads a returns table from CSV with header `date,<ticker>,...`.
///
/// Tickers with a missing or unparsable value on any day are dropped with a
/// warning; in prices mode the surviving columns are converted to
/// log-returns.
pub fn load_returns(path: impl AsRef<Path>, mode: ReturnsMode) -> Result<ReturnsTable> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Parse { line: 1, msg: "empty returns file".into() }),
    };
    let cols = split_csv_line(&header);
    if cols.len() < 2 || !cols[0].eq_ignore_ascii_case("date") {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header date,<ticker>,..., got {header:?}"),
        });
    }
    let tickers: Vec<String> = cols[1..].to_vec();
    let mut days = Vec::new();
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        if fields.len() != tickers.len() + 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} fields, got {}", tickers.len() + 1, fields.len()),
            });
        }
        days.push(fields[0].clone());
        let row: Vec<f64> = fields[1..]
            .iter()
            .map(|f| if f.is_empty() { f64::NAN } else { f.parse().unwrap_or(f64::NAN) })
            .collect();
        raw.push(row);
    }

    // drop tickers that are absent (or unusable) on any day
    let keep: Vec<usize> = (0..tickers.len())
        .filter(|&t| {
            let ok = raw.iter().all(|row| {
                row[t].is_finite() && (mode == ReturnsMode::Returns || row[t] > 0.0)
            });
            if !ok {
                log::warn!("dropping ticker {} with missing or unusable values", tickers[t]);
            }
            ok
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput("no ticker has a complete series".into()));
    }
    let tickers: Vec<String> = keep.iter().map(|&t| tickers[t].clone()).collect();
    let filtered: Vec<Vec<f64>> =
        raw.iter().map(|row| keep.iter().map(|&t| row[t]).collect()).collect();

    let (days, values) = match mode {
        ReturnsMode::Returns => (days, filtered),
        ReturnsMode::Prices => {
            let rets: Vec<Vec<f64>> = filtered
                .windows(2)
                .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b / a).ln()).collect())
                .collect();
            (days.into_iter().skip(1).collect(), rets)
        }
    };
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 usable days of returns, got {}",
            values.len()
        )));
    }
    Ok(ReturnsTable { tickers, days, values })
}

/// Synthetic block-correlated returns: tickers are grouped into blocks of
/// `block_size`, and tickers in a block share a common factor with weight
/// `rho`.
pub fn synth_returns(
    n_tickers: usize,
    n_days: usize,
    block_size: usize,
    rho: f64,
    rng: &mut RngStream,
) -> Result<ReturnsTable> {
    if n_tickers == 0 || n_days < 2 || block_size == 0 {
        return Err(Error::InvalidInput("need tickers, block size and >= 2 days".into()));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidInput(format!("rho must lie in [0, 1], got {rho}")));
    }
    let n_blocks = n_tickers.div_ceil(block_size);
    let tickers: Vec<String> = (0..n_tickers).map(|i| format!("S{i:03}")).collect();
    let days: Vec<String> = (0..n_days).map(|d| format!("2020-01-{:02}", d % 28 + 1)).collect();
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let values: Vec<Vec<f64>> = (0..n_days)
        .map(|_| {
            let factors: Vec<f64> = (0..n_blocks).map(|_| rng.normal()).collect();
            (0..n_tickers).map(|t| a * factors[t / block_size] + b * rng.normal()).collect()
        })
        .collect();
    Ok(ReturnsTable { tickers, days, values })
}
