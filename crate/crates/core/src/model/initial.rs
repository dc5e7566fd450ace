use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Field, Grid};
use crate::error::{KelsimError, Result};

/// Recipe for a nonnegative initial field.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant(f64),
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
    /// Uniform white noise smoothed by `cutoff` passes of the
    /// nearest-neighbour averaging stencil, then rescaled onto `[0, amplitude]`.
    FilteredNoise { seed: u64, amplitude: f64, cutoff: u32 },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialData::Constant(c) => c >= 0.0 && c.is_finite(),
            InitialData::Gaussian {
                amplitude,
                center,
                width,
            } => {
                amplitude >= 0.0
                    && amplitude.is_finite()
                    && center.iter().all(|c| c.is_finite())
                    && width > 0.0
                    && width.is_finite()
            }
            InitialData::FilteredNoise { amplitude, .. } => {
                amplitude >= 0.0 && amplitude.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(KelsimError::Config(format!("invalid initial data {self:?}")))
        }
    }
}

/// Deterministic generator for stream `stream` of `seed`.
///
/// ChaCha8 is counter based and its output is fixed across platforms, so
/// every seeded quantity in the crate reproduces bit-identically.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn make_initial(grid: &Grid, spec: &InitialData) -> Result<Field> {
    spec.validate()?;
    match *spec {
        InitialData::Constant(c) => Ok(Field::constant(grid, c)),
        InitialData::Gaussian {
            amplitude,
            center,
            width,
        } => {
            let two_w2 = 2.0 * width * width;
            let dim = grid.dim();
            Field::from_fn(grid, |x| {
                let mut r2 = 0.0;
                for axis in 0..dim {
                    let d = x[axis] - center[axis];
                    r2 += d * d;
                }
                amplitude * (-r2 / two_w2).exp()
            })
        }
        InitialData::FilteredNoise {
            seed,
            amplitude,
            cutoff,
        } => {
            let mut rng = seeded_rng(seed, 0);
            let mut values: Vec<f64> = (0..grid.cell_count()).map(|_| rng.gen::<f64>()).collect();
            for _ in 0..cutoff {
                values = neighbour_average(grid, &values);
            }
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            for v in values.iter_mut() {
                let s = if range > 0.0 { (*v - lo) / range } else { 0.5 };
                *v = (amplitude * s).clamp(0.0, amplitude);
            }
            Field::from_values(grid, values)
        }
    }
}

/// One pass of the reflecting nearest-neighbour mean (self plus neighbours).
fn neighbour_average(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let nx = grid.nx();
    let ny = grid.ny();
    let two_d = grid.dim() == 2;
    let mut out = vec![0.0; values.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            let c = values[k];
            let w = if i > 0 { values[k - 1] } else { c };
            let e = if i + 1 < nx { values[k + 1] } else { c };
            out[k] = if two_d {
                let s = if j > 0 { values[k - nx] } else { c };
                let n = if j + 1 < ny { values[k + nx] } else { c };
                (c + w + e + s + n) / 5.0
            } else {
                (c + w + e) / 3.0
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Grid {
        Grid::new(2, &[16, 12], &[1.0, 2.0]).unwrap()
    }

    #[test]
    fn constant_fills_every_cell() {
        let f = make_initial(&grid2(), &InitialData::Constant(1.0)).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_amplitude_gaussian_is_zero() {
        let spec = InitialData::Gaussian {
            amplitude: 0.0,
            center: [0.5, 0.5],
            width: 0.1,
        };
        let f = make_initial(&grid2(), &spec).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn filtered_noise_is_reproducible_and_in_range() {
        let spec = InitialData::FilteredNoise {
            seed: 42,
            amplitude: 3.0,
            cutoff: 4,
        };
        let a = make_initial(&grid2(), &spec).unwrap();
        let b = make_initial(&grid2(), &spec).unwrap();
        let bits = |f: &Field| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert!(a.values().iter().all(|&v| (0.0..=3.0).contains(&v)));
        assert_eq!(a.max(), 3.0);
        assert_eq!(a.min(), 0.0);

        let other = make_initial(
            &grid2(),
            &InitialData::FilteredNoise {
                seed: 43,
                amplitude: 3.0,
                cutoff: 4,
            },
        )
        .unwrap();
        assert_ne!(bits(&a), bits(&other));
    }

    #[test]
    fn smoothing_preserves_constants() {
        let g = grid2();
        let out = neighbour_average(&g, &vec![2.5; g.cell_count()]);
        assert!(out.iter().all(|&v| (v - 2.5).abs() < 1e-15));
    }

    #[test]
    fn rejects_negative_data() {
        assert!(make_initial(&grid2(), &InitialData::Constant(-1.0)).is_err());
    }
}
