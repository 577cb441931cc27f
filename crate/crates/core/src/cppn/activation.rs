use rand::Rng;
use serde::{Deserialize, Serialize};

/// The ten CPPN activation functions.
///
/// | kind              | f(x)                                   |
/// |-------------------|----------------------------------------|
/// | `Sawtooth`        | x − 2·floor((x + 1) / 2), period 2     |
/// | `LinearPiecewise` | clamp(x, −1, 1)                        |
/// | `Identity`        | x                                      |
/// | `Square`          | +1 if (x mod 2) < 1, else −1           |
/// | `Cosine`          | cos x                                  |
/// | `Sine`            | sin x                                  |
/// | `Sigmoid`         | 2 / (1 + e^−x) − 1                     |
/// | `Gaussian`        | exp(−2x²)                              |
/// | `Triangle`        | 1 − 2·abs(sawtooth(x)), period 2       |
/// | `Absolute`        | abs(x)                                 |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Sawtooth,
    LinearPiecewise,
    Identity,
    Square,
    Cosine,
    Sine,
    Sigmoid,
    Gaussian,
    Triangle,
    Absolute,
}

impl ActivationKind {
    pub const ALL: [Self; 10] = [
        Self::Sawtooth,
        Self::LinearPiecewise,
        Self::Identity,
        Self::Square,
        Self::Cosine,
        Self::Sine,
        Self::Sigmoid,
        Self::Gaussian,
        Self::Triangle,
        Self::Absolute,
    ];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Sawtooth => sawtooth(x),
            Self::LinearPiecewise => x.clamp(-1.0, 1.0),
            Self::Identity => x,
            Self::Square => {
                if x.rem_euclid(2.0) < 1.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::Cosine => x.cos(),
            Self::Sine => x.sin(),
            Self::Sigmoid => 2.0 / (1.0 + (-x).exp()) - 1.0,
            Self::Gaussian => (-2.0 * x * x).exp(),
            Self::Triangle => 1.0 - 2.0 * sawtooth(x).abs(),
            Self::Absolute => x.abs(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.random_range(0..Self::ALL.len())]
    }

    /// A uniformly chosen kind different from `self`.
    pub fn random_other<R: Rng + ?Sized>(self, rng: &mut R) -> Self {
        let others: Vec<_> = Self::ALL.into_iter().filter(|&k| k != self).collect();
        others[rng.random_range(0..others.len())]
    }
}

#[inline]
fn sawtooth(x: f64) -> f64 {
    x - 2.0 * ((x + 1.0) / 2.0).floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ten_distinct_kinds() {
        let set: std::collections::BTreeSet<_> = ActivationKind::ALL.into_iter().collect();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn gaussian_peaks_at_zero() {
        let peak = ActivationKind::Gaussian.apply(0.0);
        assert_eq!(peak, 1.0);
        for i in -100..=100 {
            let x = f64::from(i) * 0.05;
            assert!(ActivationKind::Gaussian.apply(x) <= peak);
        }
    }

    #[test]
    fn sine_and_cosine_are_two_pi_periodic() {
        for i in 0..100 {
            let x = -5.0 + 0.1 * f64::from(i);
            for k in [ActivationKind::Sine, ActivationKind::Cosine] {
                assert!((k.apply(x) - k.apply(x + 2.0 * PI)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wave_functions_have_period_two_and_unit_range() {
        for i in 0..400 {
            let x = -10.0 + 0.05 * f64::from(i) + 0.013;
            for k in [ActivationKind::Sawtooth, ActivationKind::Triangle, ActivationKind::Square] {
                let y = k.apply(x);
                assert!((-1.0..=1.0).contains(&y), "{k:?}({x}) = {y}");
                assert!((y - k.apply(x + 2.0)).abs() < 1e-9, "{k:?} not periodic at {x}");
            }
        }
    }

    #[test]
    fn sigmoid_is_centered() {
        assert_eq!(ActivationKind::Sigmoid.apply(0.0), 0.0);
        assert!(ActivationKind::Sigmoid.apply(40.0) > 0.999);
        assert!(ActivationKind::Sigmoid.apply(-40.0) < -0.999);
    }

    #[test]
    fn random_other_never_repeats() {
        let mut rng = crate::rng::seeded(3);
        for k in ActivationKind::ALL {
            for _ in 0..20 {
                assert_ne!(k.random_other(&mut rng), k);
            }
        }
    }
}
