use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Latin hypercube sample of `n` points in `dims` dimensions.
///
/// Row `i` is one point. In every column exactly one value falls in each
/// stratum `[k/n, (k+1)/n)`; strata are permuted independently per column.
/// All values lie strictly inside `(0, 1)`.
pub fn lhs_sample<R: Rng + ?Sized>(n: usize, dims: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::param("LHS sample count must be at least 1"));
    }
    if dims == 0 {
        return Err(Error::param("LHS dimension must be at least 1"));
    }
    let mut points = vec![vec![0.0; dims]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    let width = 1.0 / n as f64;
    for d in 0..dims {
        strata.shuffle(rng);
        for (point, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.sample(Open01);
            // stay inside the stratum even after rounding
            point[d] = ((k as f64 + u) * width).clamp(k as f64 * width, (k as f64 + 1.0) * width);
        }
    }
    Ok(points)
}
