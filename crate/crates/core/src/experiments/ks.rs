use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Evenly spaced evaluation points `start, start + step, …` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for XGrid {
    fn default() -> Self {
        Self {
            start: -3.0,
            stop: 6.0,
            step: 0.05,
        }
    }
}

impl XGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.start <= self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(domain!(
                "grid must be finite with start <= stop and step > 0 (start={}, stop={}, step={})",
                self.start,
                self.stop,
                self.step
            ));
        }
        if (self.stop - self.start) / self.step > 1e7 {
            return Err(domain!("grid has more than 1e7 points"));
        }
        Ok(())
    }

    /// Points computed as `start + i·step` so that no error accumulates.
    pub fn points(&self) -> Vec<f64> {
        let m = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=m).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain!("evaluation grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain!("evaluation grid must be strictly increasing"));
    }
    Ok(())
}

/// Fraction of `sorted` at or below each grid point.
pub fn empirical_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let m = sorted.len() as f64;
    let mut k = 0;
    grid.iter()
        .map(|&x| {
            while k < sorted.len() && sorted[k] <= x {
                k += 1;
            }
            k as f64 / m
        })
        .collect()
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(domain!("KS distance needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain!("samples contain NaN"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `max_{x ∈ grid} |F_emp(x) − F(x)|`.
pub fn ks_distance<F: Fn(f64) -> Result<f64>>(samples: &[f64], reference: F, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let s = sorted(samples)?;
    let emp = empirical_cdf(&s, grid);
    let mut ks = 0.0f64;
    for (&x, e) in grid.iter().zip(emp) {
        ks = ks.max((e - reference(x)?).abs());
    }
    Ok(ks)
}

/// Grid distance between the empirical CDFs of two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64], grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let (a, b) = (sorted(a)?, sorted(b)?);
    Ok(empirical_cdf(&a, grid)
        .into_iter()
        .zip(empirical_cdf(&b, grid))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::{gumbel_cdf, gumbel_quantile};
    use crate::rng::entity_rng;
    use rand::Rng;

    #[test]
    fn default_grid() {
        let g = XGrid::default().points();
        assert_eq!(g.len(), 181);
        assert_eq!(g[0], -3.0);
        assert!((g[180] - 6.0).abs() < 1e-12);
        assert!(XGrid { start: 0.0, stop: 1.0, step: 0.0 }.validate().is_err());
    }

    #[test]
    fn quantile_samples() {
        let m = 200;
        let samples: Vec<f64> = (1..=m).map(|i| gumbel_quantile(i as f64 / (m + 1) as f64)).collect();
        let grid = XGrid::default().points();
        let ks = ks_distance(&samples, |x| Ok(gumbel_cdf(x)), &grid).unwrap();
        assert!(ks <= 1.0 / (m + 1) as f64 + 0.05 * 0.37, "{ks}");
    }

    #[test]
    fn point_mass_below_zero() {
        let grid = XGrid::default().points();
        let ks = ks_distance(&[1.0, 2.0, 3.0], |x| Ok(if x >= -1.0 { 1.0 } else { 0.0 }), &grid).unwrap();
        assert_eq!(ks, 1.0);
    }

    #[test]
    fn gumbel_inverse_cdf_samples() {
        let mut rng = entity_rng(77, 0);
        let samples: Vec<f64> = (0..100_000).map(|_| gumbel_quantile(rng.random::<f64>().max(1e-300))).collect();
        let grid = XGrid::default().points();
        assert!(ks_distance(&samples, |x| Ok(gumbel_cdf(x)), &grid).unwrap() <= 0.01);
    }

    #[test]
    fn errors_and_two_sample() {
        let grid = [0.0, 1.0];
        assert!(ks_distance(&[], |_| Ok(0.5), &grid).is_err());
        assert!(ks_distance(&[0.5], |_| Ok(0.5), &[1.0, 0.0]).is_err());
        assert_eq!(ks_two_sample(&[0.5, 0.5], &[0.5], &grid).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[-1.0], &[0.5], &grid).unwrap(), 1.0);
    }
}
