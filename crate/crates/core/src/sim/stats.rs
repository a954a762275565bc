use super::path::PathResult;

/// Pairwise (cascade) summation; error grows like `log n` rather than `n`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and unbiased standard deviation (0 for a single sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if xs.iter().all(|x| *x == xs[0]) {
        return (xs[0], 0.0);
    }
    let mean = pairwise_sum(xs) / n as f64;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1) as f64).sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (mean, std) = mean_std(xs);
    (mean, std / (xs.len() as f64).sqrt())
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n_paths: usize,
    pub pnl_mean: f64,
    pub pnl_std: f64,
    pub pnl_se: f64,
    pub pnl_min: f64,
    pub pnl_max: f64,
    /// At [`QUANTILE_LEVELS`].
    pub pnl_quantiles: [f64; 5],
    pub q_mean: f64,
    pub q_std: f64,
    pub q_se: f64,
    pub utility_mean: f64,
    pub utility_se: f64,
    pub buys_mean: f64,
    pub sells_mean: f64,
    pub buys_se: f64,
    pub sells_se: f64,
    pub grid_escapes: u64,
}

impl SummaryStats {
    pub fn from_paths(paths: &[PathResult]) -> Self {
        let column = |f: fn(&PathResult) -> f64| paths.iter().map(f).collect::<Vec<_>>();
        let pnl = column(|p| p.pnl);
        let (pnl_mean, pnl_std) = mean_std(&pnl);
        let mut sorted = pnl.clone();
        sorted.sort_by(f64::total_cmp);
        let (q_mean, q_std) = mean_std(&column(|p| p.q_t as f64));
        let (utility_mean, utility_se) = mean_se(&column(|p| p.utility));
        let (buys_mean, buys_se) = mean_se(&column(|p| p.n_buys as f64));
        let (sells_mean, sells_se) = mean_se(&column(|p| p.n_sells as f64));
        let root_n = (paths.len() as f64).sqrt();
        SummaryStats {
            n_paths: paths.len(),
            pnl_mean,
            pnl_std,
            pnl_se: pnl_std / root_n,
            pnl_min: sorted.first().copied().unwrap_or(f64::NAN),
            pnl_max: sorted.last().copied().unwrap_or(f64::NAN),
            pnl_quantiles: QUANTILE_LEVELS.map(|p| quantile_sorted(&sorted, p)),
            q_mean,
            q_std,
            q_se: q_std / root_n,
            utility_mean,
            utility_se,
            buys_mean,
            sells_mean,
            buys_se,
            sells_se,
            grid_escapes: paths.iter().map(|p| p.grid_escapes).sum(),
        }
    }
}
