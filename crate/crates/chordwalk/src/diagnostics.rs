//! Statistical verification of chain output: moments, empirical
//! total-variation against oracles, autocorrelation, batch-means CLT
//! scaling and the iterated-logarithm envelope.
//!
//! These are diagnostics, not certificates; pass bands are engineering
//! choices documented at the call sites. The CLT variance `D` of a chain
//! observable has no closed form here, so only its `1/batch_length`
//! scaling is testable.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("sample set is empty")]
    EmptySamples,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("series of length {len} is too short: {need}")]
    SeriesTooShort { len: usize, need: String },
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("invalid binning: {0}")]
    BadBinning(String),
}

/// Sample moments with per-entry standard errors of the mean.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub n: usize,
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub std_errors: Vec<f64>,
}

/// Mean, covariance and standard errors of a sample buffer.
pub fn moment_report(samples: &[Vec<f64>]) -> Result<MomentReport, DiagnosticsError> {
    let n = samples.len();
    if n == 0 {
        return Err(DiagnosticsError::EmptySamples);
    }
    let d = samples[0].len();
    let mut mean = vec![0.0; d];
    for x in samples {
        if x.len() != d {
            return Err(DiagnosticsError::DimensionMismatch { expected: d, got: x.len() });
        }
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov: DMatrix<f64> = DMatrix::zeros(d, d);
    for x in samples {
        for i in 0..d {
            let di = x[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += di * (x[j] - mean[j]);
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let std_errors: Vec<f64> = (0..d).map(|i| (cov[(i, i)] / n as f64).sqrt()).collect();
    Ok(MomentReport {
        n,
        mean,
        covariance: cov,
        std_errors,
    })
}

impl MomentReport {
    /// Pooled report of two disjoint sample sets; associative up to
    /// floating-point rounding, so chains can be merged in any order.
    pub fn merge(&self, other: &MomentReport) -> MomentReport {
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let n = n1 + n2;
        let d = self.mean.len();
        let mean: Vec<f64> = (0..d)
            .map(|i| (n1 * self.mean[i] + n2 * other.mean[i]) / n)
            .collect();
        let mut cov: DMatrix<f64> = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let cross = (self.mean[i] - other.mean[i]) * (self.mean[j] - other.mean[j]);
                cov[(i, j)] = ((n1 - 1.0) * self.covariance[(i, j)]
                    + (n2 - 1.0) * other.covariance[(i, j)]
                    + n1 * n2 / n * cross)
                    / (n - 1.0);
            }
        }
        let std_errors = (0..d).map(|i| (cov[(i, i)] / n).sqrt()).collect();
        MomentReport {
            n: self.n + other.n,
            mean,
            covariance: cov,
            std_errors,
        }
    }

    /// Smallest eigenvalue of the covariance matrix (PSD check).
    pub fn covariance_min_eigenvalue(&self) -> f64 {
        self.covariance
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Empirical total-variation distance `(1/2) sum_bins |p_a - p_b|` on a
/// regular grid of `bins[k]` cells per axis over `[lo[k], hi[k]]`; points
/// outside are clamped to the edge cells. Symmetric, in `[0, 1]`.
pub fn histogram_tv(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    bins: &[usize],
    lo: &[f64],
    hi: &[f64],
) -> Result<f64, DiagnosticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(DiagnosticsError::EmptySamples);
    }
    let d = bins.len();
    if lo.len() != d || hi.len() != d {
        return Err(DiagnosticsError::BadBinning(
            "bins, lo and hi must have equal lengths".into(),
        ));
    }
    if a[0].len() != d || b[0].len() != d {
        return Err(DiagnosticsError::DimensionMismatch {
            expected: d,
            got: a[0].len(),
        });
    }
    let mut total = 1usize;
    for (k, &count) in bins.iter().enumerate() {
        if count == 0 || !(hi[k] > lo[k]) {
            return Err(DiagnosticsError::BadBinning(format!(
                "axis {k}: bins must be positive and hi > lo"
            )));
        }
        total = total.checked_mul(count).ok_or_else(|| {
            DiagnosticsError::BadBinning("bin grid overflows".into())
        })?;
    }
    let index = |x: &[f64]| -> usize {
        let mut idx = 0;
        for k in 0..d {
            let scaled = (x[k] - lo[k]) / (hi[k] - lo[k]) * bins[k] as f64;
            let cell = (scaled.floor() as isize).clamp(0, bins[k] as isize - 1) as usize;
            idx = idx * bins[k] + cell;
        }
        idx
    };
    let mut count_a = vec![0u64; total];
    let mut count_b = vec![0u64; total];
    for x in a {
        count_a[index(x)] += 1;
    }
    for x in b {
        count_b[index(x)] += 1;
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let tv = count_a
        .iter()
        .zip(&count_b)
        .map(|(&ca, &cb)| (ca as f64 / na - cb as f64 / nb).abs())
        .sum::<f64>()
        / 2.0;
    Ok(tv)
}

/// TV on a 2-D coordinate projection with a square grid spanning both
/// sample clouds.
pub fn projected_tv(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    axes: (usize, usize),
    bins_per_axis: usize,
) -> Result<f64, DiagnosticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(DiagnosticsError::EmptySamples);
    }
    let project = |set: &[Vec<f64>]| -> Vec<Vec<f64>> {
        set.iter().map(|x| vec![x[axes.0], x[axes.1]]).collect()
    };
    let pa = project(a);
    let pb = project(b);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for x in pa.iter().chain(&pb) {
        for k in 0..2 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    for k in 0..2 {
        let pad = 1e-9 * (hi[k] - lo[k]).max(1.0);
        lo[k] -= pad;
        hi[k] += pad;
    }
    histogram_tv(&pa, &pb, &[bins_per_axis, bins_per_axis], &lo, &hi)
}

/// Batch-means summary: variance of the batch means and an
/// Anderson-Darling statistic of the standardized batch means against the
/// normal law.
#[derive(Debug, Clone, Copy)]
pub struct BatchMeansReport {
    pub batch_count: usize,
    pub batch_len: usize,
    pub batch_variance: f64,
    pub normality_stat: f64,
}

/// Splits the series into `batch_count` equal batches (tail remainder
/// dropped) and summarizes the batch means.
pub fn clt_batch_means(
    series: &[f64],
    batch_count: usize,
) -> Result<BatchMeansReport, DiagnosticsError> {
    if batch_count < 2 {
        return Err(DiagnosticsError::BadBinning("need at least 2 batches".into()));
    }
    if series.len() < 2 * batch_count {
        return Err(DiagnosticsError::SeriesTooShort {
            len: series.len(),
            need: format!("at least 2 per batch for {batch_count} batches"),
        });
    }
    let batch_len = series.len() / batch_count;
    let means: Vec<f64> = (0..batch_count)
        .map(|b| series[b * batch_len..(b + 1) * batch_len].iter().sum::<f64>() / batch_len as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batch_count as f64;
    let batch_variance =
        means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (batch_count as f64 - 1.0);
    let sd = batch_variance.sqrt();
    let normality_stat = if sd == 0.0 {
        0.0
    } else {
        let mut z: Vec<f64> = means.iter().map(|m| (m - grand) / sd).collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        anderson_darling(&z)
    };
    Ok(BatchMeansReport {
        batch_count,
        batch_len,
        batch_variance,
        normality_stat,
    })
}

/// A^2 statistic of sorted standardized values against N(0, 1).
fn anderson_darling(z_sorted: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = z_sorted.len();
    let nf = n as f64;
    let mut acc = 0.0;
    for (i, &z) in z_sorted.iter().enumerate() {
        let phi = normal.cdf(z).clamp(1e-300, 1.0 - 1e-16);
        let phi_rev = normal.cdf(z_sorted[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        acc += (2.0 * (i as f64) + 1.0) * (phi.ln() + (1.0 - phi_rev).ln());
    }
    -nf - acc / nf
}

/// Iterated-logarithm diagnostic: running maximum over `n >= 100` of
/// `|S_n| / sqrt(2 n log log n)`. Bounded for chains with geometric decay;
/// reported as a boundedness check, not a convergence proof.
pub fn lil_envelope(series: &[f64]) -> Result<f64, DiagnosticsError> {
    if series.len() < 100 {
        return Err(DiagnosticsError::SeriesTooShort {
            len: series.len(),
            need: "at least 100 terms".into(),
        });
    }
    let mut partial = 0.0;
    let mut worst = 0.0f64;
    for (i, x) in series.iter().enumerate() {
        partial += x;
        let n = (i + 1) as f64;
        if i + 1 >= 100 {
            let scale = (2.0 * n * n.ln().ln()).sqrt();
            worst = worst.max(partial.abs() / scale);
        }
    }
    Ok(worst)
}

/// Biased autocorrelation estimates at lags `0..=max_lag`, normalized to
/// `rho(0) = 1`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    if series.len() <= max_lag {
        return Err(DiagnosticsError::SeriesTooShort {
            len: series.len(),
            need: format!("more than max_lag = {max_lag} terms"),
        });
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var: f64 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if var == 0.0 {
        return Err(DiagnosticsError::DegenerateSeries);
    }
    Ok((0..=max_lag)
        .map(|lag| {
            let cov: f64 = centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            cov / var
        })
        .collect())
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64, DiagnosticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(DiagnosticsError::EmptySamples);
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        // Step past ties in both samples before comparing the CDFs.
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == v {
            i += 1;
        }
        while j < xb.len() && xb[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
