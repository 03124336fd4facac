//! Monte-Carlo engine: Haar-random orthogonal conjugation of the fixed
//! complex structure, projection to subsystems and singular values of the
//! projected blocks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::{entropy_deficit, total_deficit, EntropyBreakdown, Partition, Spectrum};

const ORTHONORMALITY_TOLERANCE: f64 = 1e-12;
const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;
const PAIRING_TOLERANCE: f64 = 1e-8;

/// Samples are processed in fixed chunks so the reduction order does not
/// depend on the number of workers.
const CHUNK: usize = 4096;

/// Random stream of sample `index` under `seed`. Streams of different
/// indices are independent, so any partition of the work across threads
/// draws the same numbers.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// First `2m` rows of a Haar-distributed matrix in `O(2N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFrame {
    matrix: DMatrix<f64>,
}

impl RandomFrame {
    /// Wraps an existing matrix after checking that its rows are orthonormal.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let defect = orthonormality_defect(&matrix);
        if defect > ORTHONORMALITY_TOLERANCE {
            return Err(Error::RankDeficient { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

fn orthonormality_defect(f: &DMatrix<f64>) -> f64 {
    let gram = f * f.transpose();
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Haar frame from the QR factorization of a Gaussian `2N x 2m` matrix,
/// with column signs fixed so that `R` has a positive diagonal.
pub fn sample_frame<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<RandomFrame> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "frame needs 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut last_defect = f64::NAN;
    for _ in 0..2 {
        let g = DMatrix::<f64>::from_fn(2 * n, 2 * m, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..2 * m {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        let frame = q.transpose();
        let defect = orthonormality_defect(&frame);
        if defect <= ORTHONORMALITY_TOLERANCE && (0..2 * m).all(|j| r[(j, j)] != 0.0) {
            return Ok(RandomFrame { matrix: frame });
        }
        last_defect = defect;
    }
    Err(Error::RankDeficient {
        defect: last_defect,
    })
}

/// Real antisymmetric `2m x 2m` block of the conjugated complex structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedStructure {
    matrix: DMatrix<f64>,
}

impl ProjectedStructure {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Domain(
                "projected structure must be square of even size".into(),
            ));
        }
        let defect = (&matrix + matrix.transpose()).amax();
        if defect > ANTISYMMETRY_TOLERANCE {
            return Err(Error::Domain(format!(
                "matrix is not antisymmetric (defect {defect:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// `F B` for the block-diagonal `B` with blocks `[[0, y_k], [-y_k, 0]]`.
fn right_multiply_structure(f: &DMatrix<f64>, spectrum: &Spectrum) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(f.nrows(), f.ncols());
    for (k, &y) in spectrum.values().iter().enumerate() {
        for r in 0..f.nrows() {
            out[(r, 2 * k)] = -y * f[(r, 2 * k + 1)];
            out[(r, 2 * k + 1)] = y * f[(r, 2 * k)];
        }
    }
    out
}

fn antisymmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a - a.transpose()) * 0.5
}

/// `A = F B F^T`.
pub fn project_structure(spectrum: &Spectrum, frame: &RandomFrame) -> Result<ProjectedStructure> {
    if frame.cols() != 2 * spectrum.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * spectrum.n(),
            found: frame.cols(),
        });
    }
    let f = frame.matrix();
    let a = right_multiply_structure(f, spectrum) * f.transpose();
    Ok(ProjectedStructure {
        matrix: antisymmetrize(a),
    })
}

/// The `m` distinct singular values of a `2m x 2m` antisymmetric matrix,
/// ascending and clamped to `[0, 1]`.
///
/// Computed from the SVD (each value appears twice); the pairing is checked.
pub fn singular_values_antisymmetric(a: &ProjectedStructure) -> Result<Vec<f64>> {
    paired_singular_values(a.matrix())
}

fn paired_singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let scale = sv.last().copied().unwrap_or(0.0).max(1.0);
    let mut out = Vec::with_capacity(sv.len() / 2);
    for (index, pair) in sv.chunks_exact(2).enumerate() {
        if (pair[1] - pair[0]).abs() > PAIRING_TOLERANCE * scale {
            return Err(Error::Pairing {
                index,
                first: pair[0],
                second: pair[1],
            });
        }
        out.push((0.5 * (pair[0] + pair[1])).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Singular values of the A block (first `2 N_A` Majorana directions) and
/// B block (the rest) of one Haar conjugation.
pub fn sample_block_singular_values<R: Rng + ?Sized>(
    spectrum: &Spectrum,
    partition: Partition,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = spectrum.n();
    if partition.n() != n {
        return Err(Error::DimensionMismatch {
            expected: partition.n(),
            found: n,
        });
    }
    let m = sample_frame(n, n, rng)?;
    let full = right_multiply_structure(m.matrix(), spectrum) * m.matrix().transpose();
    let full = antisymmetrize(full);
    let split = 2 * partition.n_a();
    let a = full.view((0, 0), (split, split)).into_owned();
    let b = full
        .view((split, split), (2 * n - split, 2 * n - split))
        .into_owned();
    Ok((paired_singular_values(&a)?, paired_singular_values(&b)?))
}

/// Singular values of the leading `2m x 2m` block only.
pub fn sample_projected_values<R: Rng + ?Sized>(
    spectrum: &Spectrum,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let frame = sample_frame(spectrum.n(), m, rng)?;
    singular_values_antisymmetric(&project_structure(spectrum, &frame)?)
}

/// Entropies of one Haar draw, both blocks from the same rotation.
pub fn sample_breakdown<R: Rng + ?Sized>(
    spectrum: &Spectrum,
    partition: Partition,
    rng: &mut R,
) -> Result<EntropyBreakdown> {
    let (a, b) = sample_block_singular_values(spectrum, partition, rng)?;
    let d_a: f64 = a.iter().map(|&x| entropy_deficit(x)).sum();
    let d_b: f64 = b.iter().map(|&x| entropy_deficit(x)).sum();
    Ok(EntropyBreakdown::from_deficits(
        partition,
        d_a,
        d_b,
        total_deficit(spectrum),
    ))
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Estimates for every field of [`EntropyBreakdown`]; the total entropy is
/// deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownEstimate {
    pub s_a: McEstimate,
    pub s_b: McEstimate,
    pub mutual_information: McEstimate,
    pub s_total: f64,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
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

    fn stderr(&self) -> f64 {
        if self.count < 2.0 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1.0)).sqrt() / self.count.sqrt()
    }
}

/// Deficits `(d_A, d_B, I)` are accumulated so that a maximally mixed
/// state yields exact zeros.
#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    d_a: Moments,
    d_b: Moments,
    mi: Moments,
}

fn run_chunk(
    spectrum: &Spectrum,
    partition: Partition,
    seed: u64,
    range: std::ops::Range<usize>,
) -> Result<ChunkStats> {
    let mut stats = ChunkStats::default();
    let d_total = total_deficit(spectrum);
    for index in range {
        let mut rng = sample_stream(seed, index as u64);
        let (a, b) = sample_block_singular_values(spectrum, partition, &mut rng)?;
        let d_a: f64 = a.iter().map(|&x| entropy_deficit(x)).sum();
        let d_b: f64 = b.iter().map(|&x| entropy_deficit(x)).sum();
        stats.d_a.push(d_a);
        stats.d_b.push(d_b);
        stats.mi.push(d_total - d_a - d_b);
    }
    Ok(stats)
}

/// Monte-Carlo estimate over `samples` independent draws. The result is
/// bit-identical for a given `(seed, samples)` whatever `workers` is.
pub fn estimate(
    spectrum: &Spectrum,
    partition: Partition,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<BreakdownEstimate> {
    if samples < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    if spectrum.n() != partition.n() {
        return Err(Error::DimensionMismatch {
            expected: partition.n(),
            found: spectrum.n(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Result<ChunkStats>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                run_chunk(
                    spectrum,
                    partition,
                    seed,
                    c * CHUNK..((c + 1) * CHUNK).min(samples),
                )
            })
            .collect()
    });
    let mut total = ChunkStats::default();
    for chunk in per_chunk {
        let chunk = chunk?;
        total.d_a = total.d_a.merge(chunk.d_a);
        total.d_b = total.d_b.merge(chunk.d_b);
        total.mi = total.mi.merge(chunk.mi);
    }
    let ln2 = std::f64::consts::LN_2;
    let make = |mean: f64, m: &Moments| McEstimate {
        mean,
        stderr: m.stderr(),
        samples,
        seed,
    };
    Ok(BreakdownEstimate {
        s_a: make(partition.n_a() as f64 * ln2 - total.d_a.mean, &total.d_a),
        s_b: make(partition.n_b() as f64 * ln2 - total.d_b.mean, &total.d_b),
        mutual_information: make(total.mi.mean, &total.mi),
        s_total: partition.n() as f64 * ln2 - total_deficit(spectrum),
    })
}
