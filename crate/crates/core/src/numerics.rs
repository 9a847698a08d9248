//! Dense complex matrices and seeded Gaussian sampling.
//!
//! Everything downstream (channels, pilots, covariances) lives in a
//! [`ComplexMatrix`]. Storage is row-major, but [`vec`] / [`unvec`] use
//! column stacking so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)` holds.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            n,
            |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// An `n × 1` column vector.
    pub fn column_vector(data: Vec<C64>) -> Self {
        Self {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (i, &a) in self.row(r).iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(i)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, "subtract", |a, b| a - b)
    }

    fn zip_with(&self, rhs: &ComplexMatrix, what: &str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Main diagonal.
    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Column-stacking vectorization into an `(rows·cols) × 1` vector.
pub fn vec(a: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(a.len());
    for c in 0..a.cols {
        for r in 0..a.rows {
            data.push(a[(r, c)]);
        }
    }
    ComplexMatrix::column_vector(data)
}

/// Inverse of [`vec`]. Accepts a row or column vector of length `rows · cols`.
pub fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.rows.min(v.cols) > 1 || v.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "cannot unvec a {}x{} input into {rows}x{cols}",
            v.rows, v.cols
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| v.data[c * rows + r]))
}

/// Reproducible random substream descriptor.
///
/// A `(seed, stream_id)` pair names a ChaCha12 keystream, so two equal
/// descriptors always yield identical draws and the draws of trial `t` do
/// not depend on which worker runs it or in what order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
}

impl RandomStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream `index` of this stream. Children of distinct parents or
    /// with distinct indices map to distinct keystreams (up to 64-bit hash collisions).
    pub fn substream(&self, index: u64) -> Self {
        let id = splitmix64(splitmix64(self.stream_id) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        Self {
            seed: self.seed,
            stream_id: id,
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `rows × cols` matrix of i.i.d. CN(0, `variance`) entries drawn from `stream`.
pub fn sample_cn(rows: usize, cols: usize, variance: f64, stream: RandomStream) -> ComplexMatrix {
    sample_cn_with(&mut stream.rng(), rows, cols, variance)
}

/// Same as [`sample_cn`] but draws from a caller-owned generator.
pub fn sample_cn_with<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> ComplexMatrix {
    assert!(variance >= 0.0, "variance must be nonnegative, got {variance}");
    let sd = (variance / 2.0).sqrt();
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(sd * re, sd * im)
        })
        .collect();
    ComplexMatrix { rows, cols, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random(rows: usize, cols: usize, id: u64) -> ComplexMatrix {
        sample_cn(rows, cols, 1.0, RandomStream::new(11, id))
    }

    #[test]
    fn zero_variance_gives_zero_matrix() {
        let z = sample_cn(3, 5, 0.0, RandomStream::new(1, 1));
        assert_eq!(z, ComplexMatrix::zeros(3, 5));
    }

    #[test]
    fn empty_shapes_are_allowed() {
        let z = sample_cn(0, 4, 1.0, RandomStream::new(1, 1));
        assert!(z.is_empty());
        assert_eq!(z.shape(), (0, 4));
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let a = sample_cn(8, 8, 1.0, RandomStream::new(7, 3));
        let b = sample_cn(8, 8, 1.0, RandomStream::new(7, 3));
        assert_eq!(a, b);
        let other = sample_cn(8, 8, 1.0, RandomStream::new(7, 4));
        assert_ne!(a, other);
    }

    #[test]
    fn substreams_are_distinct_and_stable() {
        let base = RandomStream::new(5, 0);
        assert_eq!(base.substream(3), base.substream(3));
        assert_ne!(base.substream(3), base.substream(4));
        assert_ne!(base.substream(3).substream(0), base.substream(0).substream(3));
    }

    #[test]
    fn second_moment_and_circularity() {
        let n = 100_000;
        let z = sample_cn(n, 1, 1.0, RandomStream::new(2024, 0));
        let p: Vec<f64> = z.as_slice().iter().map(|v| v.norm_sqr()).collect();
        let mean = p.iter().sum::<f64>() / n as f64;
        let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 0.01, "mean |z|^2 = {mean}");
        assert!((mean - 1.0).abs() < 3.0 * se);

        // pseudo-covariance E{z^2} should vanish
        let pc: C64 = z.as_slice().iter().map(|v| v * v).sum::<C64>() / n as f64;
        // Re(z^2) and Im(z^2) each have variance 1/2 for unit-variance CN
        let se_pc = (0.5 / n as f64).sqrt();
        assert!(pc.re.abs() < 3.0 * se_pc && pc.im.abs() < 3.0 * se_pc, "{pc}");
    }

    #[test]
    fn kron_identity_and_scalar() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)),
            ComplexMatrix::identity(6)
        );
        let b = random(2, 3, 1);
        let two = ComplexMatrix::from_real(1, 1, &[2.0]).unwrap();
        assert!(kron(&two, &b).max_abs_diff(&b.scale(2.0)) < 1e-15);
    }

    #[test]
    fn kron_vec_identity_by_expansion() {
        // (Bᵀ ⊗ A) vec(X) = vec(A X B)
        let a = random(2, 2, 1);
        let x = random(2, 2, 2);
        let b = random(2, 2, 3);
        let lhs = kron(&b.transpose(), &a).matmul(&vec(&x)).unwrap();
        // entries of A X B written out by hand
        let mut axb = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for p in 0..2 {
                    for q in 0..2 {
                        acc += a[(i, p)] * x[(p, q)] * b[(q, j)];
                    }
                }
                axb[(i, j)] = acc;
            }
        }
        assert!(lhs.max_abs_diff(&vec(&axb)) < 1e-12);
    }

    #[test]
    fn vec_is_column_major() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 3.0, 2.0, 4.0]).unwrap();
        let v = vec(&a);
        assert_eq!(v.shape(), (4, 1));
        let expected: Vec<C64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&x| c(x, 0.0)).collect();
        assert_eq!(v.as_slice(), expected.as_slice());
    }

    #[test]
    fn vec_of_scalar_is_itself() {
        let a = ComplexMatrix::new(1, 1, vec![c(0.5, -2.0)]).unwrap();
        assert_eq!(vec(&a), a);
    }

    #[test]
    fn unvec_inverts_vec() {
        let a = random(4, 3, 9);
        assert_eq!(unvec(&vec(&a), 4, 3).unwrap(), a);
    }

    #[test]
    fn unvec_rejects_wrong_length() {
        let v = ComplexMatrix::column_vector(vec![c(1.0, 0.0); 5]);
        assert!(matches!(unvec(&v, 2, 3), Err(Error::Dimension(_))));
        assert!(matches!(unvec(&random(2, 3, 0), 2, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn matmul_shape_mismatch() {
        assert!(random(2, 3, 0).matmul(&random(2, 3, 1)).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
    }

    proptest! {
        #[test]
        fn mixed_product_identity(seed in any::<u64>()) {
            // (A⊗B)(C⊗D) = (AC)⊗(BD)
            let s = RandomStream::new(seed, 0);
            let a = sample_cn(2, 3, 1.0, s.substream(0));
            let b = sample_cn(3, 2, 1.0, s.substream(1));
            let cm = sample_cn(3, 2, 1.0, s.substream(2));
            let d = sample_cn(2, 2, 1.0, s.substream(3));
            let lhs = kron(&a, &b).matmul(&kron(&cm, &d)).unwrap();
            let rhs = kron(&a.matmul(&cm).unwrap(), &b.matmul(&d).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn adjoint_is_involution(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let a = sample_cn(rows, cols, 2.0, RandomStream::new(seed, 1));
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            prop_assert_eq!(a.conj().conj(), a);
        }
    }
}
