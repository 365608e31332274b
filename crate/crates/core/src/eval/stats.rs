//! Correlation statistics, generic over the float scalar.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Real;

/// Pearson correlation coefficient over paired samples. `None` when fewer
/// than two pairs or either side has zero variance.
pub fn pearson<R: Real>(xs: &[R], ys: &[R]) -> Option<R> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = R::from_usize(xs.len())?;
    let mean_x = xs.iter().copied().sum::<R>() / n;
    let mean_y = ys.iter().copied().sum::<R>() / n;
    let mut cov = R::zero();
    let mut var_x = R::zero();
    let mut var_y = R::zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = *x - mean_x;
        let dy = *y - mean_y;
        cov = cov + dx * dy;
        var_x = var_x + dx * dx;
        var_y = var_y + dy * dy;
    }
    let denom = (var_x * var_y).sqrt();
    if denom <= R::zero() {
        return None;
    }
    Some(cov / denom)
}

/// Percentile bootstrap confidence interval for the Pearson coefficient:
/// resample pairs with replacement `iterations` times and take the
/// `(alpha/2, 1-alpha/2)` percentiles. Seeded and fully deterministic.
/// Degenerate resamples (zero variance) are skipped.
pub fn bootstrap_pearson_ci<R: Real>(
    pairs: &[(R, R)],
    iterations: u32,
    seed: u64,
    alpha: R,
) -> Option<(R, R)> {
    if pairs.len() < 2 || iterations == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(iterations as usize);
    let mut xs = vec![R::zero(); pairs.len()];
    let mut ys = vec![R::zero(); pairs.len()];
    for _ in 0..iterations {
        for i in 0..pairs.len() {
            let j = rng.gen_range(0..pairs.len());
            xs[i] = pairs[j].0;
            ys[i] = pairs[j].1;
        }
        if let Some(r) = pearson(&xs, &ys) {
            stats.push(r);
        }
    }
    if stats.is_empty() {
        return None;
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let n = stats.len();
    let half = alpha / R::from_f64(2.0)?;
    let lower_idx = (half * R::from_usize(n)?).to_usize()?.min(n - 1);
    let upper_idx = ((R::one() - half) * R::from_usize(n)?)
        .to_usize()?
        .min(n - 1);
    Some((stats[lower_idx], stats[upper_idx]))
}
