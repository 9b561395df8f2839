use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled first derivative of a Gaussian, for directional smoothing
/// derivatives along a ray.
///
/// Taps are indexed by offset `k` in `-half..=half` (stored at `k + half`)
/// and sit at `k * step` mm. They are odd-symmetric, sum to zero and are
/// scaled so that convolving a unit ramp yields exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivKernel {
    sigma: f64,
    step: f64,
    taps: Vec<f64>,
}

impl DerivKernel {
    pub fn new(sigma: f64, step: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParam(format!("kernel sigma must be > 0, got {sigma}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParam(format!("kernel step must be > 0, got {step}")));
        }
        if sigma < step / 2.0 {
            return Err(Error::InvalidParam(format!(
                "kernel sigma {sigma} is below half the step {step}"
            )));
        }
        let half = (3.0 * sigma / step).ceil() as usize;
        let mut taps = vec![0.0; 2 * half + 1];
        let s2 = sigma * sigma;
        for k in 1..=half {
            let x = k as f64 * step;
            let w = -x / s2 * (-x * x / (2.0 * s2)).exp();
            taps[half + k] = w;
            taps[half - k] = -w;
        }
        // Exact odd symmetry already makes the sum vanish; rescale for a unit
        // ramp response.
        let ramp: f64 = (1..=half)
            .map(|k| {
                let x = k as f64 * step;
                -(taps[half + k] * x) - taps[half - k] * (-x)
            })
            .sum();
        for t in &mut taps {
            *t /= ramp;
        }
        Ok(DerivKernel { sigma, step, taps })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn half_width(&self) -> usize {
        self.taps.len() / 2
    }

    /// Tap weight at signed offset `k`.
    pub fn tap(&self, k: isize) -> f64 {
        self.taps[(k + self.half_width() as isize) as usize]
    }

    /// Convolve a 1D profile at the origin: `sum_k tap(k) * profile(-k * step)`.
    ///
    /// `profile` returns `None` where the signal is unavailable; those
    /// samples take the value of the nearest available sample. Returns 0 when
    /// no sample is available.
    pub fn convolve<F>(&self, mut profile: F) -> f64
    where
        F: FnMut(f64) -> Option<f64>,
    {
        let half = self.half_width() as isize;
        let values: Vec<Option<f64>> = (-half..=half)
            .map(|k| profile(-(k as f64) * self.step))
            .collect();
        if values.iter().all(Option::is_none) {
            return 0.0;
        }
        let nearest = |idx: usize| -> f64 {
            (1..values.len())
                .find_map(|d| {
                    let lo = idx.checked_sub(d).and_then(|i| values[i]);
                    let hi = values.get(idx + d).copied().flatten();
                    lo.or(hi)
                })
                .unwrap_or(0.0)
        };
        let mut acc = 0.0;
        for (idx, v) in values.iter().enumerate() {
            let val = v.unwrap_or_else(|| nearest(idx));
            acc += self.taps[idx] * val;
        }
        acc
    }
}
