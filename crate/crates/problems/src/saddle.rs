//! Randomized quadratic saddle instances: `n` affine members
//! `B_i = [[M_i, Q_i^T], [-Q_i, N]]`, `r_i = (b_i, c_i)`, with prescribed
//! spectra on the symmetric blocks. The skew blocks cancel in the symmetric
//! part, so every member's strong monotonicity modulus is exactly the
//! smallest prescribed eigenvalue.

use crate::ProblemError;
use operator_core::{AffineOperator, Matrix, Operator, OperatorEnsemble, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Recipe for one instance. Spectra are `eig_base^l` for
/// `l = 0..block dimension`; offsets are entrywise
/// `Normal(normal_mean, normal_var)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSpec {
    pub n: usize,
    pub d_y: usize,
    pub d_z: usize,
    pub seed: u64,
    pub eig_base: f64,
    pub normal_mean: f64,
    pub normal_var: f64,
}

impl SaddleSpec {
    /// The reference scale: 200 members, a 3-dimensional primal block and a
    /// 4-dimensional dual block, spectra `{1, 10, 100}` and
    /// `{1, 10, 100, 1000}`.
    pub fn default_with_seed(seed: u64) -> Self {
        Self {
            n: 200,
            d_y: 3,
            d_z: 4,
            seed,
            eig_base: 10.0,
            normal_mean: 1.0,
            normal_var: 5.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.d_y + self.d_z
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n < 1 || self.d_y < 1 || self.d_z < 1 {
            return Err(ProblemError::InvalidSpec(format!(
                "n = {}, d_y = {}, d_z = {} must all be at least 1",
                self.n, self.d_y, self.d_z
            )));
        }
        if !(self.eig_base > 0.0 && self.eig_base.is_finite()) {
            return Err(ProblemError::InvalidSpec(format!(
                "eig_base {} must be positive",
                self.eig_base
            )));
        }
        if !(self.normal_var >= 0.0 && self.normal_var.is_finite())
            || !self.normal_mean.is_finite()
        {
            return Err(ProblemError::InvalidSpec(
                "offset distribution parameters must be finite, variance nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Standard-normal matrix, entries drawn column by column.
fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// the sign ambiguity fixed by forcing a nonnegative R diagonal.
fn haar_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let qr = normal_matrix(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// `Q diag(eigenvalues) Q^T` for a random orthogonal `Q` — symmetric with
/// exactly the requested spectrum.
pub fn random_matrix_with_spectrum(
    d: usize,
    eigenvalues: &[f64],
    rng: &mut ChaCha8Rng,
) -> Matrix {
    assert_eq!(d, eigenvalues.len(), "one eigenvalue per dimension");
    let q = haar_orthogonal(d, rng);
    let lambda = Matrix::from_diagonal(&Vector::from_row_slice(eigenvalues));
    &q * lambda * q.transpose()
}

fn spectrum(d: usize, base: f64) -> Vec<f64> {
    (0..d).map(|l| base.powi(l as i32)).collect()
}

/// Offset vector with entries `mean + sqrt(var) * z`, `z` standard normal.
fn offset_vector(d: usize, mean: f64, var: f64, rng: &mut ChaCha8Rng) -> Vector {
    let sd = var.sqrt();
    Vector::from_fn(d, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        mean + sd * z
    })
}

/// Builds the instance. The dual block `N` is drawn once and shared by all
/// members, while `M_i`, `Q_i`, and the offsets are fresh per member: the
/// shared block keeps the member deviations `B_i - B_bar` well below the
/// largest eigenvalue, which is what makes the similarity constant small
/// against the Lipschitz constant. The root of the mean operator is computed
/// and stored on the returned ensemble.
pub fn generate_saddle_instance(spec: &SaddleSpec) -> Result<OperatorEnsemble, ProblemError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (d_y, d_z) = (spec.d_y, spec.d_z);
    let d = spec.dim();

    let n_block = random_matrix_with_spectrum(d_z, &spectrum(d_z, spec.eig_base), &mut rng);

    let mut members = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let m_block = random_matrix_with_spectrum(d_y, &spectrum(d_y, spec.eig_base), &mut rng);
        // Coupling block: standard-normal entries, columns scaled to unit
        // Euclidean norm.
        let mut q_block = normal_matrix(d_z, d_y, &mut rng);
        for j in 0..d_y {
            let norm = q_block.column(j).norm();
            for i in 0..d_z {
                q_block[(i, j)] /= norm;
            }
        }
        let b_off = offset_vector(d_y, spec.normal_mean, spec.normal_var, &mut rng);
        let c_off = offset_vector(d_z, spec.normal_mean, spec.normal_var, &mut rng);

        let mut b = Matrix::zeros(d, d);
        b.view_mut((0, 0), (d_y, d_y)).copy_from(&m_block);
        b.view_mut((0, d_y), (d_y, d_z))
            .copy_from(&q_block.transpose());
        b.view_mut((d_y, 0), (d_z, d_y)).copy_from(&(-&q_block));
        b.view_mut((d_y, d_y), (d_z, d_z)).copy_from(&n_block);

        let mut r = Vector::zeros(d);
        r.rows_mut(0, d_y).copy_from(&b_off);
        r.rows_mut(d_y, d_z).copy_from(&c_off);

        members.push(Operator::Affine(AffineOperator::new(b, r)?));
    }

    let mut ens = OperatorEnsemble::new(members)?;
    let root = ens.compute_root()?;
    ens.set_root(root);
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_spectrum_is_the_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = random_matrix_with_spectrum(1, &[7.0], &mut rng);
        assert!((m[(0, 0)] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_survives_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eigs = [1.0, 10.0, 100.0];
        let m = random_matrix_with_spectrum(3, &eigs, &mut rng);
        let sym = (&m + m.transpose()) * 0.5;
        let mut found = nalgebra::SymmetricEigen::new(sym).eigenvalues.as_slice().to_vec();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (f, e) in found.iter().zip(eigs) {
            assert!((f - e).abs() <= 1e-9 * e, "eigenvalue {f} vs {e}");
        }
    }

    #[test]
    fn orthogonal_factor_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = haar_orthogonal(5, &mut rng);
        let gram = q.transpose() * &q;
        assert!((gram - Matrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_specs() {
        let mut spec = SaddleSpec::default_with_seed(0);
        spec.d_y = 0;
        assert!(generate_saddle_instance(&spec).is_err());
        let mut spec = SaddleSpec::default_with_seed(0);
        spec.n = 0;
        assert!(generate_saddle_instance(&spec).is_err());
    }
}
