//! Means with normal-approximation 95% confidence intervals.

use std::fmt;

use levelgen_core::Archive;

/// Mean of `n` values and the half-width 1.96·sd/√n. There is no interval
/// for a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ci {
    pub n: usize,
    pub mean: f64,
    pub half_width: Option<f64>,
}

/// Values are sorted before summing so the result does not depend on the
/// order runs finished in.
pub fn mean_ci(values: &[f64]) -> Ci {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return Ci {
            n,
            mean: f64::NAN,
            half_width: None,
        };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let half_width = (n > 1).then(|| {
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    });
    Ci { n, mean, half_width }
}

impl Ci {
    /// `[low, high]` as CSV fields, `NA` when there is no interval.
    pub fn csv_bounds(&self) -> String {
        match self.half_width {
            Some(h) => format!("{},{}", self.mean - h, self.mean + h),
            None => "NA,NA".into(),
        }
    }
}

impl fmt::Display for Ci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.half_width {
            Some(h) => write!(f, "{:.3} ± {:.3}", self.mean, h),
            None => write!(f, "{:.3} (n={}, no CI)", self.mean, self.n),
        }
    }
}

/// Share of elites that are solvable (fitness above zero).
pub fn beatable_fraction(archive: &Archive) -> f64 {
    if archive.filled() == 0 {
        return 0.0;
    }
    archive.elites().filter(|e| e.fitness > 0.0).count() as f64 / archive.filled() as f64
}
