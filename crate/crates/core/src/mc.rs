//! Monte Carlo estimates over Hilbert-Schmidt random two-qubit (complex) and
//! two-rebit (real) density matrices.
//!
//! Seed contract: sample `i` of a run with seed `s` draws from ChaCha8
//! seeded with `s` (via `seed_from_u64`) on stream `i`. Results therefore do
//! not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, Matrix4, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::HalfIntegerAlpha;
use crate::moments::MomentFamily;

/// Minimum sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 10_000;
const CHUNK: usize = 4096;

type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn alpha(self) -> HalfIntegerAlpha {
        match self {
            Field::Real => HalfIntegerAlpha::REBIT,
            Field::Complex => HalfIntegerAlpha::QUBIT,
        }
    }

    pub fn for_alpha(alpha: HalfIntegerAlpha) -> Result<Self> {
        match alpha.two_alpha() {
            1 => Ok(Field::Real),
            2 => Ok(Field::Complex),
            _ => Err(Error::InvalidArgument(format!(
                "Monte Carlo sampling supports alpha 0.5 (real) and 1 (complex), not {alpha}"
            ))),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            _ => Err(Error::Parse {
                what: "field",
                input: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampledDensityMatrix {
    pub entries: Matrix4<C64>,
    pub det_rho: f64,
    pub det_rho_pt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
}

/// Transpose on the second tensor factor: `ρ_{(i,j),(k,l)} -> ρ_{(i,l),(k,j)}`.
pub fn partial_transpose(rho: &Matrix4<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        rho[(2 * i + l, 2 * k + j)]
    })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `G G† / tr(G G†)`. Complex entries use a square 4×4 Ginibre matrix. For
/// real entries the induced measure with a square `G` is not the
/// Hilbert-Schmidt one; the flat measure needs a 4×5 real `G`.
fn ginibre_state(field: Field, rng: &mut ChaCha8Rng) -> Matrix4<C64> {
    let gg = match field {
        Field::Complex => {
            let g = Matrix4::<C64>::from_fn(|_, _| C64::new(normal(rng), normal(rng)));
            g * g.adjoint()
        }
        Field::Real => {
            let g = SMatrix::<f64, 4, 5>::from_fn(|_, _| normal(rng));
            (g * g.transpose()).map(|x| C64::new(x, 0.0))
        }
    };
    let trace = gg.trace().re;
    gg / C64::new(trace, 0.0)
}

fn sample_indexed(field: Field, seed: u64, index: u64) -> SampledDensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let entries = ginibre_state(field, &mut rng);
    let det_rho = entries.determinant().re;
    let det_rho_pt = partial_transpose(&entries).determinant().re;
    SampledDensityMatrix {
        entries,
        det_rho,
        det_rho_pt,
    }
}

/// One Hilbert-Schmidt random density matrix (stream 0 of `seed`).
pub fn sample_hs(field: Field, seed: u64) -> SampledDensityMatrix {
    sample_indexed(field, seed, 0)
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Accumulator {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Sample mean of `statistic` with its standard error. Chunks are reduced in
/// index order so the floating-point result is schedule independent.
fn estimate<F>(field: Field, samples: usize, seed: u64, statistic: F) -> Result<McEstimate>
where
    F: Fn(&SampledDensityMatrix) -> f64 + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let chunks: Vec<Accumulator> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                acc.push(statistic(&sample_indexed(field, seed, i as u64)));
            }
            acc
        })
        .collect();
    let total = chunks
        .into_iter()
        .fold(Accumulator::default(), Accumulator::merge);
    let variance = total.m2 / (total.count - 1.0);
    Ok(McEstimate {
        mean: total.mean,
        standard_error: (variance / total.count).sqrt(),
        samples,
    })
}

/// Estimates `<(|ρ||ρ^PT|)^n>` (balanced) or `<|ρ^PT|^n>` (unbalanced).
pub fn estimate_moment(
    family: MomentFamily,
    field: Field,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let power = i32::try_from(n)
        .map_err(|_| Error::InvalidArgument(format!("moment order {n} too large")))?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be positive".into(),
        ));
    }
    match family {
        MomentFamily::Balanced => estimate(field, samples, seed, |s| {
            (s.det_rho * s.det_rho_pt).powi(power)
        }),
        MomentFamily::Unbalanced => estimate(field, samples, seed, |s| s.det_rho_pt.powi(power)),
        MomentFamily::RhoDet => Err(Error::InvalidArgument(
            "Monte Carlo estimates cover the balanced and unbalanced families".into(),
        )),
    }
}

/// Fraction of samples with `det ρ^PT ≥ 0`.
pub fn separability_fraction(field: Field, samples: usize, seed: u64) -> Result<McEstimate> {
    estimate(field, samples, seed, |s| {
        if s.det_rho_pt >= 0.0 {
            1.0
        } else {
            0.0
        }
    })
}
