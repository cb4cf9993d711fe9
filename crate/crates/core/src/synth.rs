//! Seeded synthetic series used as oracles.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! through `SeedableRng::seed_from_u64`. Normal variates use the Ziggurat
//! sampler of `rand_distr::StandardNormal`; Pareto variates use inverse-CDF
//! sampling on `1 - u` with `u` the 53-bit uniform of `rand`. Synthetic
//! timestamps start at `start_time` and are one second apart.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::{Millis, PricePoint};

pub const DEFAULT_INTERVAL_MS: Millis = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Process {
    /// `p ± step` with equal probability; a step that would reach zero or
    /// below is taken upwards instead.
    ArithmeticRandomWalk { start: f64, step: f64 },
    /// `p_{t+1} = p_t exp(mu - sigma²/2 + sigma z_t)`, per-step parameters.
    GeometricBrownianMotion { start: f64, mu: f64, sigma: f64 },
    /// Alternating exact `+amplitude`, `-amplitude` fractional moves, up first.
    Sawtooth { start: f64, amplitude: f64 },
    /// Pareto density `∝ x^-alpha` on `[x_min, ∞)`.
    Pareto { alpha: f64, x_min: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub process: Process,
    pub n: usize,
    pub seed: u64,
    pub start_time: Millis,
}

impl GeneratorSpec {
    pub fn new(process: Process, n: usize, seed: u64) -> Self {
        Self {
            process,
            n,
            seed,
            start_time: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        match self.process {
            Process::ArithmeticRandomWalk { start, step } => {
                positive("start", start)?;
                positive("step", step)
            }
            Process::GeometricBrownianMotion { start, mu, sigma } => {
                positive("start", start)?;
                if !mu.is_finite() {
                    return Err(Error::param("mu", "must be finite"));
                }
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::param("sigma", format!("must be non-negative, got {sigma}")));
                }
                Ok(())
            }
            Process::Sawtooth { start, amplitude } => {
                positive("start", start)?;
                if !(amplitude > 0.0 && amplitude < 1.0) {
                    return Err(Error::param(
                        "amplitude",
                        format!("must lie in (0, 1), got {amplitude}"),
                    ));
                }
                Ok(())
            }
            Process::Pareto { alpha, x_min } => {
                if !(alpha > 1.0 && alpha.is_finite()) {
                    return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
                }
                positive("x_min", x_min)
            }
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Generates `spec.n` price points.
pub fn generate_series(spec: &GeneratorSpec) -> Result<Vec<PricePoint>> {
    spec.validate()?;
    let prices: Vec<f64> = match spec.process {
        Process::ArithmeticRandomWalk { start, step } => {
            let mut rng = spec.rng();
            walk(start, spec.n, |p| {
                let down = rng.next_u64() >> 63 == 0;
                if down && p - step > 0.0 {
                    p - step
                } else {
                    p + step
                }
            })
        }
        Process::GeometricBrownianMotion { start, mu, sigma } => {
            let mut rng = spec.rng();
            let drift = mu - 0.5 * sigma * sigma;
            walk(start, spec.n, |p| {
                let z: f64 = rng.sample(StandardNormal);
                p * (drift + sigma * z).exp()
            })
        }
        Process::Sawtooth { start, amplitude } => {
            let mut up = false;
            walk(start, spec.n, |p| {
                up = !up;
                if up {
                    p * (1.0 + amplitude)
                } else {
                    p * (1.0 - amplitude)
                }
            })
        }
        Process::Pareto { .. } => return Err(Error::param("kind", "pareto produces samples, not a price series")),
    };
    prices
        .into_iter()
        .enumerate()
        .map(|(i, price)| {
            let time = spec.start_time + i as Millis * DEFAULT_INTERVAL_MS;
            PricePoint::new(time, price)
        })
        .collect()
}

fn walk(start: f64, n: usize, mut next: impl FnMut(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut p = start;
    for _ in 0..n {
        out.push(p);
        p = next(p);
    }
    out
}

/// Draws `spec.n` Pareto samples, `x = x_min u^(-1/(alpha - 1))`.
pub fn generate_pareto(spec: &GeneratorSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let Process::Pareto { alpha, x_min } = spec.process else {
        return Err(Error::param("kind", "expected a pareto spec"));
    };
    let mut rng = spec.rng();
    let exponent = -1.0 / (alpha - 1.0);
    Ok((0..spec.n)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            x_min * u.powf(exponent)
        })
        .collect())
}
