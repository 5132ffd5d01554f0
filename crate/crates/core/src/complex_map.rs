//! Complex-to-real mappings between the signal domain and the crossbar domain.
//!
//! Conductance arrays store and multiply real numbers, so every complex
//! matrix `A` is handled through its real block image
//! `[[Re(A), -Im(A)], [Im(A), Re(A)]]` and every complex vector `x` through
//! the stacked form `[Re(x); Im(x)]`. The block mapping is a ring
//! homomorphism (`real_mapping(A*B) == real_mapping(A)*real_mapping(B)`) and
//! is compatible with the vector mapping
//! (`real_mapping(A)*vector_mapping(x) == vector_mapping(A*x)`), which is
//! what makes the analog circuits compute the complex-domain results. The
//! stacked layout is real part on top everywhere; all downstream modules rely
//! on that single convention.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix. Only the handful of products the
/// simulator needs are provided; this is not a linear-algebra library.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                format!("{rows}x{cols} ({} entries)", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("complex matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::ONE;
        }
        m
    }

    /// Entries produced by `f(row, col)`; `f` must return finite values.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                format!("lhs cols == rhs rows ({})", self.cols),
                format!("{}", rhs.rows),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.get(k, c);
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::shape(format!("{} entries", self.cols), format!("{}", v.len())));
        }
        let mut out = vec![Complex64::ZERO; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = Complex64::ZERO;
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[r] = acc;
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Largest |entry| (complex modulus).
    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max deviation of `self * self^H` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.mul(&self.hermitian()).expect("square product");
        let mut worst = 0.0f64;
        for r in 0..p.rows {
            for c in 0..p.cols {
                let want = if r == c { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((p.get(r, c) - want).norm());
            }
        }
        worst
    }
}

/// Real block image of a K x L complex matrix: a 2K x 2L row-major real
/// matrix. Images produced by [`real_mapping`] satisfy the block structure
/// exactly; matrices read back from noisy hardware satisfy it approximately,
/// which is why the structure is checked by [`block_asymmetry`] rather than
/// enforced at construction.
///
/// [`block_asymmetry`]: RealBlockMatrix::block_asymmetry
#[derive(Debug, Clone, PartialEq)]
pub struct RealBlockMatrix {
    source_rows: usize,
    source_cols: usize,
    data: Vec<f64>,
}

impl RealBlockMatrix {
    pub fn from_raw(source_rows: usize, source_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != 4 * source_rows * source_cols {
            return Err(Error::shape(
                format!("{}x{} entries", 2 * source_rows, 2 * source_cols),
                format!("{}", data.len()),
            ));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("real block matrix entry"));
        }
        Ok(Self {
            source_rows,
            source_cols,
            data,
        })
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn source_cols(&self) -> usize {
        self.source_cols
    }

    pub fn rows(&self) -> usize {
        2 * self.source_rows
    }

    pub fn cols(&self) -> usize {
        2 * self.source_cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let cols = self.cols();
        if v.len() != cols {
            return Err(Error::shape(format!("{cols} entries"), format!("{}", v.len())));
        }
        let mut out = vec![0.0; self.rows()];
        for r in 0..self.rows() {
            let row = &self.data[r * cols..(r + 1) * cols];
            out[r] = row.iter().zip(v).map(|(a, x)| a * x).sum();
        }
        Ok(out)
    }

    pub fn transpose(&self) -> RealBlockMatrix {
        let mut data = vec![0.0; self.data.len()];
        let (rows, cols) = (self.rows(), self.cols());
        for r in 0..rows {
            for c in 0..cols {
                data[c * rows + r] = self.get(r, c);
            }
        }
        RealBlockMatrix {
            source_rows: self.source_cols,
            source_cols: self.source_rows,
            data,
        }
    }

    /// Largest violation of the block structure: top-left must equal
    /// bottom-right, top-right must equal the negated bottom-left.
    pub fn block_asymmetry(&self) -> f64 {
        let (k, l) = (self.source_rows, self.source_cols);
        let mut worst = 0.0f64;
        for r in 0..k {
            for c in 0..l {
                worst = worst.max((self.get(r, c) - self.get(r + k, c + l)).abs());
                worst = worst.max((self.get(r, c + l) + self.get(r + k, c)).abs());
            }
        }
        worst
    }
}

/// Stacked real image of a complex vector: `[Re(x); Im(x)]`, always of even
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct RealStackedVector {
    data: Vec<f64>,
}

impl RealStackedVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.len() % 2 != 0 {
            return Err(Error::OddLength(data.len()));
        }
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Length of the complex vector this stacks.
    pub fn source_len(&self) -> usize {
        self.data.len() / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// Real block image of a complex matrix.
pub fn real_mapping(a: &ComplexMatrix) -> RealBlockMatrix {
    let (k, l) = (a.rows(), a.cols());
    let cols = 2 * l;
    let mut data = vec![0.0; 4 * k * l];
    for r in 0..k {
        for c in 0..l {
            let z = a.get(r, c);
            data[r * cols + c] = z.re;
            data[r * cols + c + l] = -z.im;
            data[(r + k) * cols + c] = z.im;
            data[(r + k) * cols + c + l] = z.re;
        }
    }
    RealBlockMatrix {
        source_rows: k,
        source_cols: l,
        data,
    }
}

/// Least-squares projection back to a complex matrix: averages the two real
/// blocks and the two (sign-flipped) imaginary blocks, so it is exact on
/// `real_mapping` images and sensible on noisy hardware readouts.
pub fn inverse_real_mapping(m: &RealBlockMatrix) -> ComplexMatrix {
    let (k, l) = (m.source_rows(), m.source_cols());
    ComplexMatrix::from_fn(k, l, |r, c| {
        let re = 0.5 * (m.get(r, c) + m.get(r + k, c + l));
        let im = 0.5 * (m.get(r + k, c) - m.get(r, c + l));
        Complex64::new(re, im)
    })
}

/// Stacked real image of a complex vector.
pub fn vector_mapping(x: &[Complex64]) -> RealStackedVector {
    let mut data = Vec::with_capacity(2 * x.len());
    data.extend(x.iter().map(|z| z.re));
    data.extend(x.iter().map(|z| z.im));
    RealStackedVector { data }
}

/// Inverse of [`vector_mapping`]; fails on odd-length input.
pub fn inverse_vector_mapping(v: &[f64]) -> Result<Vec<Complex64>> {
    if v.len() % 2 != 0 {
        return Err(Error::OddLength(v.len()));
    }
    let k = v.len() / 2;
    Ok((0..k).map(|i| Complex64::new(v[i], v[k + i])).collect())
}
