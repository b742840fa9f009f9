//! Seeded random objects: Haar isometries, unit vectors, density matrices.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{Operator, C64};

pub type SeededRng = ChaCha8Rng;

/// Independent deterministic stream for `(seed, stream)`.
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    Operator::from(DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng)))
}

/// Haar-random unit vector in `C^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(d, |_, _| complex_gaussian(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

/// Haar-random isometry `rows x cols` (QR of a Gaussian matrix with phase fixing).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = gaussian_matrix(rows, cols, rng).into_inner();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            let mut col = q.column_mut(k);
            col *= phase;
        }
    }
    Operator::from(q)
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    haar_isometry(d, d, rng)
}

/// Random positive semidefinite matrix `G G^dag`.
pub fn random_psd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = gaussian_matrix(d, d, rng);
    &g * g.dagger()
}

/// Random density matrix of the given rank (Ginibre ensemble).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let g = gaussian_matrix(d, rank.max(1), rng);
    let m = &g * g.dagger();
    let t = m.trace().re;
    m.scale(1.0 / t)
}

pub fn random_pure_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    Operator::projector_onto(&random_unit_vector(d, rng))
}
