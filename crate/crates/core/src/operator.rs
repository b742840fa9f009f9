//! Dense complex linear algebra on which the rest of the crate is built.
//!
//! [`Operator`] is a thin newtype over a column-major `nalgebra` matrix. Bases of
//! bipartite spaces are ordered with the first factor as the major index, so
//! `|a, b>` sits at row `a * d_b + b`, matching [`tensor`].

use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dims, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative cutoff below which eigenvalues are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Eigenvalue floor used by positivity checks.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Deref for Operator {
    type Target = DMatrix<C64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl DerefMut for Operator {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl From<DMatrix<C64>> for Operator {
    fn from(m: DMatrix<C64>) -> Self {
        Operator(m)
    }
}

impl From<Operator> for DMatrix<C64> {
    fn from(op: Operator) -> Self {
        op.0
    }
}

impl Operator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Operator(DMatrix::zeros(rows, cols))
    }

    pub fn identity(d: usize) -> Self {
        Operator(DMatrix::identity(d, d))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds an operator from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "Operator::from_row_major",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Ok(Operator(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Operator::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let d = values.len();
        Operator::from_fn(d, d, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// `|u><v|`.
    pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> Self {
        Operator(u * v.adjoint())
    }

    /// `|v><v|`.
    pub fn projector_onto(v: &DVector<C64>) -> Self {
        Operator::outer(v, v)
    }

    /// Column matrix `|k>` of dimension `d`.
    pub fn basis_ket(d: usize, k: usize) -> Self {
        Operator::from_fn(d, 1, |i, _| if i == k { ONE } else { ZERO })
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn dagger(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn transpose(&self) -> Operator {
        Operator(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn fro_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> Operator {
        Operator(&self.0 * s)
    }

    /// Hilbert-Schmidt inner product `tr(A^dag B)`.
    pub fn hs_inner(&self, other: &Operator) -> C64 {
        self.0.dotc(&other.0)
    }

    /// Largest entrywise deviation `max |M - M^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        Operator((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn ensure_shape(&self, rows: usize, cols: usize, context: &'static str) -> Result<()> {
        if self.rows() != rows || self.cols() != cols {
            return Err(Error::DimensionMismatch {
                context,
                expected: dims(rows, cols),
                found: dims(self.rows(), self.cols()),
            });
        }
        Ok(())
    }

    pub fn ensure_square(&self, d: usize, context: &'static str) -> Result<()> {
        self.ensure_shape(d, d, context)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                Operator(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                Operator(self.0 $op rhs.0)
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                Operator(self.0 $op &rhs.0)
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                Operator(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-self.0)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        operator_from_nested(&rows).map_err(serde::de::Error::custom)
    }
}

/// Parses row-major nested `[re, im]` pairs.
pub fn operator_from_nested(rows: &[Vec<[f64; 2]>]) -> Result<Operator> {
    let r = rows.len();
    if r == 0 {
        return Err(Error::Schema("matrix has no rows".into()));
    }
    let c = rows[0].len();
    if c == 0 {
        return Err(Error::Schema("matrix has an empty row".into()));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(Error::Schema(format!(
            "ragged matrix: row {i} has {} entries, row 0 has {c}",
            row.len()
        )));
    }
    Ok(Operator::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

pub fn tensor_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    a.kronecker(b)
}

fn ensure_bipartite(m: &Operator, d_a: usize, d_b: usize, context: &'static str) -> Result<()> {
    let n = d_a * d_b;
    if n == 0 {
        return Err(Error::DimensionMismatch {
            context,
            expected: "positive subsystem dimensions".into(),
            found: format!("d_a={d_a}, d_b={d_b}"),
        });
    }
    m.ensure_square(n, context)
}

/// `tr_B` over the second tensor factor.
pub fn partial_trace_b(m: &Operator, d_a: usize, d_b: usize) -> Result<Operator> {
    ensure_bipartite(m, d_a, d_b, "partial_trace_b")?;
    Ok(Operator::from_fn(d_a, d_a, |i, j| {
        (0..d_b).map(|b| m[(i * d_b + b, j * d_b + b)]).sum()
    }))
}

/// `tr_A` over the first tensor factor.
pub fn partial_trace_a(m: &Operator, d_a: usize, d_b: usize) -> Result<Operator> {
    ensure_bipartite(m, d_a, d_b, "partial_trace_a")?;
    Ok(Operator::from_fn(d_b, d_b, |i, j| {
        (0..d_a).map(|a| m[(a * d_b + i, a * d_b + j)]).sum()
    }))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the same order as `eigenvalues`.
    pub eigenvectors: Operator,
}

impl HermitianEigenSystem {
    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `Σ g(λ_k) |v_k><v_k|`.
    pub fn map_spectrum(&self, mut g: impl FnMut(f64) -> f64) -> Operator {
        let n = self.eigenvectors.rows();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = g(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()) * C64::new(w, 0.0);
        }
        Operator(out)
    }

    /// Number of eigenvalues above `rel_tol * λ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.max_eigenvalue().max(0.0);
        self.eigenvalues.iter().filter(|&&l| l > cut && l > 0.0).count()
    }
}

/// Diagonalizes `m`, which must be Hermitian up to `1e-9 · max(1, ‖m‖_F)`.
pub fn hermitian_eigen(m: &Operator) -> Result<HermitianEigenSystem> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigen",
            expected: "square matrix".into(),
            found: dims(m.rows(), m.cols()),
        });
    }
    let defect = m.hermiticity_defect();
    if defect > 1e-9 * m.fro_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    Ok(hermitian_eigen_unchecked(&m.hermitian_part()))
}

pub(crate) fn hermitian_eigen_unchecked(m: &Operator) -> HermitianEigenSystem {
    let eig = m.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let n = m.rows();
    let eigenvectors = Operator::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    HermitianEigenSystem {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors,
    }
}

/// Pseudo-inverse square root: eigenvalues above `tol · λ_max` map to `λ^{-1/2}`,
/// everything else to zero.
pub fn inv_sqrt_on_support(m: &Operator, tol: f64) -> Result<Operator> {
    let eig = hermitian_eigen(m)?;
    let cut = tol * eig.max_eigenvalue().max(0.0);
    Ok(eig.map_spectrum(|l| if l > cut && l > 0.0 { l.powf(-0.5) } else { 0.0 }))
}

/// Projector onto the eigenvectors with eigenvalue above `tol · λ_max`.
pub fn support_projector(m: &Operator, tol: f64) -> Result<Operator> {
    let eig = hermitian_eigen(m)?;
    let cut = tol * eig.max_eigenvalue().max(0.0);
    Ok(eig.map_spectrum(|l| if l > cut && l > 0.0 { 1.0 } else { 0.0 }))
}

/// Orthonormal basis (as columns) of the support of a PSD matrix.
pub fn support_basis(m: &Operator, tol: f64) -> Result<Operator> {
    let eig = hermitian_eigen(m)?;
    let r = eig.rank(tol);
    let n = m.rows();
    Ok(Operator::from_fn(n, r, |i, k| eig.eigenvectors[(i, k)]))
}

/// Square root of a PSD matrix; negative eigenvalues within the floor are clipped.
pub fn sqrt_psd(m: &Operator) -> Result<Operator> {
    let eig = hermitian_eigen(m)?;
    let scale = eig.max_eigenvalue().abs().max(1.0);
    if eig.min_eigenvalue() < -PSD_TOL * scale {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Largest singular value.
pub fn operator_norm(m: &Operator) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(m: &Operator) -> f64 {
    singular_values(m).into_iter().sum()
}

pub fn singular_values(m: &Operator) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    m.0.clone().singular_values().iter().copied().collect()
}

/// Trace norm of a Hermitian matrix via its spectrum.
pub fn trace_norm_hermitian(m: &Operator) -> f64 {
    hermitian_eigen_unchecked(&m.hermitian_part())
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}

fn ensure_psd(m: &Operator, context: &'static str) -> Result<HermitianEigenSystem> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context,
            expected: "square matrix".into(),
            found: dims(m.rows(), m.cols()),
        });
    }
    let eig = hermitian_eigen(m)?;
    if eig.min_eigenvalue() < -PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    Ok(eig)
}

/// Uhlmann fidelity `tr √(√ρ σ √ρ)`.
///
/// When `rho` has rank one the pure-state form `√<ψ|σ|ψ>` is used.
pub fn fidelity(rho: &Operator, sigma: &Operator) -> Result<f64> {
    let er = ensure_psd(rho, "fidelity")?;
    let es = ensure_psd(sigma, "fidelity")?;
    if rho.rows() != sigma.rows() {
        return Err(Error::DimensionMismatch {
            context: "fidelity",
            expected: dims(rho.rows(), rho.rows()),
            found: dims(sigma.rows(), sigma.cols()),
        });
    }
    if er.rank(1e-12) == 1 {
        let psi = er.vector(0) * C64::new(er.max_eigenvalue().sqrt(), 0.0);
        return Ok(expectation(sigma, &psi).max(0.0).sqrt());
    }
    if es.rank(1e-12) == 1 {
        let phi = es.vector(0) * C64::new(es.max_eigenvalue().sqrt(), 0.0);
        return Ok(expectation(rho, &phi).max(0.0).sqrt());
    }
    let root = er.map_spectrum(|l| l.max(0.0).sqrt());
    let inner = (&root * sigma * &root).hermitian_part();
    Ok(hermitian_eigen_unchecked(&inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum())
}

/// `Re <v|M|v>`.
pub fn expectation(m: &Operator, v: &DVector<C64>) -> f64 {
    v.dotc(&(m.matrix() * v)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_psd, seeded_rng};

    fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn pauli_z() -> Operator {
        Operator::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        assert_eq!(tensor(&Operator::identity(2), &Operator::identity(2)), Operator::identity(4));
        let d = tensor(&Operator::diag_real(&[1.0, 0.0]), &Operator::identity(2));
        assert_eq!(d, Operator::diag_real(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn tensor_x_z_block_structure() {
        // [[0, Z], [Z, 0]] expanded by hand.
        let expected = Operator::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
        ]);
        assert_eq!(tensor(&pauli_x(), &pauli_z()), expected);
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = seeded_rng(3, 0);
        let ra = random_density(2, 2, &mut rng);
        let rb = random_psd(3, &mut rng);
        let pt = partial_trace_b(&tensor(&ra, &rb), 2, 3).unwrap();
        assert!(pt.max_abs_diff(&ra.scale_c(rb.trace())) < 1e-12);

        let mixed = Operator::identity(4).scale(0.25);
        let half = partial_trace_b(&mixed, 2, 2).unwrap();
        assert!(half.max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);

        // |Φ+> = (|00> + |11>)/√2 in the computational basis.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = DVector::from_vec(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let reduced = partial_trace_b(&Operator::projector_onto(&phi), 2, 2).unwrap();
        assert!(reduced.max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = Operator::identity(6);
        assert!(matches!(
            partial_trace_b(&m, 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inv_sqrt_examples() {
        let i = Operator::identity(3);
        assert!(inv_sqrt_on_support(&i, SUPPORT_TOL).unwrap().max_abs_diff(&i) < 1e-14);
        let r = inv_sqrt_on_support(&Operator::diag_real(&[4.0, 0.0]), SUPPORT_TOL).unwrap();
        assert!(r.max_abs_diff(&Operator::diag_real(&[0.5, 0.0])) < 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_non_hermitian() {
        let m = Operator::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            inv_sqrt_on_support(&m, SUPPORT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn norms_of_diagonals() {
        assert!((operator_norm(&Operator::identity(4)) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&Operator::diag_real(&[3.0, -5.0])) - 5.0).abs() < 1e-14);
        assert!((trace_norm(&Operator::diag_real(&[1.0, -1.0])) - 2.0).abs() < 1e-14);
        assert_eq!(trace_norm(&Operator::zeros(3, 3)), 0.0);
    }

    #[test]
    fn fidelity_examples() {
        let zero = Operator::diag_real(&[1.0, 0.0]);
        let one = Operator::diag_real(&[0.0, 1.0]);
        let mixed = Operator::identity(2).scale(0.5);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let mut rng = seeded_rng(4, 0);
        let rho = random_density(3, 3, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_rejects_negative_input() {
        let bad = Operator::diag_real(&[1.5, -0.5]);
        let ok = Operator::identity(2).scale(0.5);
        assert!(matches!(fidelity(&bad, &ok), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn eigen_system_invariants() {
        let mut rng = seeded_rng(5, 0);
        let m = random_psd(5, &mut rng) - Operator::identity(5).scale(0.3);
        let eig = hermitian_eigen(&m).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let v = &eig.eigenvectors;
        let recon = eig.map_spectrum(|l| l);
        assert!((&recon - &m).fro_norm() <= 1e-10 * m.fro_norm());
        assert!((v.dagger() * v - Operator::identity(5)).fro_norm() <= 1e-10);
    }
}
