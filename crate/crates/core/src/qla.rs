//! Numerical kernel: dense complex matrices, Kronecker products, Hermitian
//! matrix exponentials, Liouville vectorization, spectral norms, and random
//! state generation.
//!
//! Conventions used throughout the toolkit:
//! * `vec` is row-major stacking in the computational basis, so the induced
//!   inner product `<<A|B>> = vec(A)^dag vec(B)` equals `Tr(A^dag B)`.
//! * Multi-part systems are ordered with subsystem 0 slowest (leftmost
//!   Kronecker factor).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Tolerance for Hermiticity preconditions.
pub const HERM_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Projector onto the computational basis state `|k>` of a `d`-level system.
pub fn basis_projector(d: usize, k: usize) -> CMat {
    let mut m = zeros(d, d);
    m[(k, k)] = c(1., 0.);
    m
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Maximum entrywise deviation from Hermiticity, `max |A - A^dag|`.
pub fn herm_deviation(a: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn check_hermitian(a: &CMat, tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let deviation = herm_deviation(a);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    Ok(())
}

fn symmetrize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Kronecker product with `(a ⊗ b)[i*rows_b + k, j*cols_b + l] = a[i,j] b[k,l]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMat]) -> CMat {
    let mut out = identity(1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, the k-th
/// column of the returned matrix is the k-th eigenvector.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(a, HERM_TOL)?;
    let se = symmetrize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = a.nrows();
    let mut vecs = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok((vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    check_hermitian(a, HERM_TOL)?;
    let mut vals: Vec<f64> = symmetrize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}

/// `exp(i * scale * h)` for Hermitian `h`, via eigendecomposition. The result
/// is unitary by construction.
pub fn herm_expm(h: &CMat, scale: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(h)?;
    let n = h.nrows();
    let mut out = zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        let phase = c(0.0, scale * lambda).exp();
        let v = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += phase * v[i] * v[j].conj();
            }
        }
    }
    Ok(out)
}

/// Principal (PSD) square root of a Hermitian PSD matrix. Slightly negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(a: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(a)?;
    let n = a.nrows();
    let mut out = zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let v = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += c(s, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    Ok(out)
}

/// Spectral norm (max |eigenvalue|) of a Hermitian matrix.
pub fn spectral_norm_herm(a: &CMat) -> Result<f64> {
    let vals = eigvalsh(a)?;
    Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
}

/// Row-major vectorization: `vec(A)[i*d + j] = A[i,j]`.
pub fn vec_rm(a: &CMat) -> Result<CVec> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let d = a.nrows();
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            v[i * d + j] = a[(i, j)];
        }
    }
    Ok(v)
}

/// Inverse of [`vec_rm`]; the length must be a perfect square matching `d*d`.
pub fn unvec_rm(v: &CVec, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(Error::Dimension {
            expected: format!("vector of length {}", d * d),
            got: format!("length {}", v.len()),
        });
    }
    let mut m = zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = v[i * d + j];
        }
    }
    Ok(m)
}

/// Hilbert-Schmidt inner product `<<A|B>> = Tr(A^dag B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    let mut s = c(0., 0.);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

pub fn trace(a: &CMat) -> Complex64 {
    let mut s = c(0., 0.);
    for i in 0..a.nrows() {
        s += a[(i, i)];
    }
    s
}

/// Condition number from the singular value spectrum; `f64::INFINITY` for a
/// numerically singular matrix.
pub fn condition_number(a: &CMat) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, &v| m.max(v));
    let min = sv.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min <= max * 1e-300 || min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Applies `op ⊗ 1_rest` where `op` acts on slot `site` of a vector indexed
/// by mixed-radix digits `dims` (slot 0 slowest).
pub fn apply_local(op: &CMat, v: &CVec, dims: &[usize], site: usize) -> CVec {
    let n = dims[site];
    debug_assert_eq!(op.nrows(), n);
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let mut out = CVec::zeros(v.len());
    for l in 0..left {
        for r in 0..right {
            let base = l * n * right + r;
            for i in 0..n {
                let mut acc = c(0., 0.);
                for j in 0..n {
                    acc += op[(i, j)] * v[base + j * right];
                }
                out[base + i * right] = acc;
            }
        }
    }
    out
}

/// Applies `⊗_s op_s` to a vector with slot dimensions `dims`; `None` slots
/// act as identity.
pub fn apply_slotwise(ops: &[Option<&CMat>], dims: &[usize], v: &CVec) -> CVec {
    let mut cur = v.clone();
    for (s, op) in ops.iter().enumerate() {
        if let Some(m) = op {
            cur = apply_local(m, &cur, dims, s);
        }
    }
    cur
}

/// Permutes the row-major vec of an operator on a multi-part system into
/// per-subsystem slot ordering: slot `j` has dimension `d_j^2` with digit
/// `i_j * d_j + j_j`, slot 0 slowest. In this ordering the vectorization of
/// a tensor product equals the tensor product of the vectorizations, so
/// slot-wise dynamics can act factor by factor.
pub fn vec_to_slots(v: &CVec, dims: &[usize]) -> CVec {
    let total: usize = dims.iter().product();
    debug_assert_eq!(v.len(), total * total);
    let slot_dims: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let mut out = CVec::zeros(v.len());
    for bra in 0..total {
        let bi = split_index(bra, dims);
        for ket in 0..total {
            let ki = split_index(ket, dims);
            let digits: Vec<usize> = bi
                .iter()
                .zip(ki.iter())
                .zip(dims.iter())
                .map(|((&i, &j), &d)| i * d + j)
                .collect();
            out[join_index(&digits, &slot_dims)] = v[bra * total + ket];
        }
    }
    out
}

/// Inverse of [`vec_to_slots`].
pub fn slots_to_vec(v: &CVec, dims: &[usize]) -> CVec {
    let total: usize = dims.iter().product();
    debug_assert_eq!(v.len(), total * total);
    let slot_dims: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let mut out = CVec::zeros(v.len());
    for bra in 0..total {
        let bi = split_index(bra, dims);
        for ket in 0..total {
            let ki = split_index(ket, dims);
            let digits: Vec<usize> = bi
                .iter()
                .zip(ki.iter())
                .zip(dims.iter())
                .map(|((&i, &j), &d)| i * d + j)
                .collect();
            out[bra * total + ket] = v[join_index(&digits, &slot_dims)];
        }
    }
    out
}

/// Decomposes a joint row-major index into per-slot digits.
pub fn split_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for s in (0..dims.len()).rev() {
        out[s] = idx % dims[s];
        idx /= dims[s];
    }
    out
}

/// Joins per-slot digits into a joint row-major index.
pub fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (s, &x) in digits.iter().enumerate() {
        idx = idx * dims[s] + x;
    }
    idx
}

/// A normalized pure state on a multi-part system.
#[derive(Debug, Clone)]
pub struct PureState {
    dims: Vec<usize>,
    amps: CVec,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: CVec) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || amps.len() != total {
            return Err(Error::Dimension {
                expected: format!("amplitude vector of length {total}"),
                got: format!("length {}", amps.len()),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidRange {
                param: "state norm",
                value: norm,
            });
        }
        Ok(Self { dims, amps })
    }

    /// Builds the state after dividing out the Euclidean norm.
    pub fn new_normalized(dims: Vec<usize>, amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidRange {
                param: "state norm",
                value: 0.0,
            });
        }
        Self::new(dims, amps.unscale(norm))
    }

    /// Computational basis state `|k>`.
    pub fn basis(dims: Vec<usize>, k: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut amps = CVec::zeros(total);
        amps[k] = c(1., 0.);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.amps.len();
        let mut m = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix {
            dims: self.dims.clone(),
            mat: m,
        }
    }

    /// Reduced density matrix on the listed sites (ascending order kept).
    pub fn reduced_density(&self, keep: &[usize]) -> DensityMatrix {
        self.to_density_on(keep)
    }

    fn to_density_on(&self, keep: &[usize]) -> DensityMatrix {
        let keep_dims: Vec<usize> = keep.iter().map(|&s| self.dims[s]).collect();
        let kd: usize = keep_dims.iter().product();
        let mut m = zeros(kd, kd);
        let total = self.total_dim();
        for gi in 0..total {
            if self.amps[gi].norm_sqr() == 0.0 {
                continue;
            }
            let di = split_index(gi, &self.dims);
            for gj in 0..total {
                let dj = split_index(gj, &self.dims);
                let traced_match = (0..self.dims.len())
                    .all(|s| keep.contains(&s) || di[s] == dj[s]);
                if traced_match {
                    let ki: Vec<usize> = keep.iter().map(|&s| di[s]).collect();
                    let kj: Vec<usize> = keep.iter().map(|&s| dj[s]).collect();
                    m[(join_index(&ki, &keep_dims), join_index(&kj, &keep_dims))] +=
                        self.amps[gi] * self.amps[gj].conj();
                }
            }
        }
        DensityMatrix {
            dims: keep_dims,
            mat: m,
        }
    }
}

/// A trace-one PSD Hermitian operator on a multi-part system.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: CMat) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || mat.nrows() != total || mat.ncols() != total {
            return Err(Error::Dimension {
                expected: format!("{total}x{total} matrix"),
                got: format!("{}x{}", mat.nrows(), mat.ncols()),
            });
        }
        check_hermitian(&mat, 1e-12)?;
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidRange {
                param: "trace",
                value: tr.re,
            });
        }
        let min_eig = eigvalsh(&mat)?[0];
        if min_eig < -1e-10 {
            return Err(Error::InvalidRange {
                param: "min eigenvalue",
                value: min_eig,
            });
        }
        Ok(Self { dims, mat })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn purity(&self) -> f64 {
        hs_inner(&self.mat, &self.mat).re
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        Self {
            dims,
            mat: identity(total).unscale(total as f64),
        }
    }

    /// Partial trace keeping the listed sites.
    pub fn partial_trace(&self, keep: &[usize]) -> DensityMatrix {
        let keep_dims: Vec<usize> = keep.iter().map(|&s| self.dims[s]).collect();
        let kd: usize = keep_dims.iter().product();
        let mut out = zeros(kd, kd);
        let total = self.total_dim();
        for gi in 0..total {
            let di = split_index(gi, &self.dims);
            for gj in 0..total {
                let dj = split_index(gj, &self.dims);
                let traced_match = (0..self.dims.len())
                    .all(|s| keep.contains(&s) || di[s] == dj[s]);
                if traced_match {
                    let ki: Vec<usize> = keep.iter().map(|&s| di[s]).collect();
                    let kj: Vec<usize> = keep.iter().map(|&s| dj[s]).collect();
                    out[(join_index(&ki, &keep_dims), join_index(&kj, &keep_dims))] +=
                        self.mat[(gi, gj)];
                }
            }
        }
        DensityMatrix {
            dims: keep_dims,
            mat: out,
        }
    }
}

/// Haar-random pure state: a normalized vector of i.i.d. complex Gaussians.
pub fn haar_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let total: usize = dims.iter().product();
    let mut amps = CVec::zeros(total);
    for i in 0..total {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        amps[i] = c(re, im);
    }
    PureState::new_normalized(dims.to_vec(), amps).expect("gaussian vector is nonzero")
}

/// Hilbert-Schmidt-ensemble mixed state: `G G^dag / Tr(G G^dag)` with `G`
/// square complex Gaussian.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix {
    let total: usize = dims.iter().product();
    let mut g = zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = c(re, im);
        }
    }
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    DensityMatrix {
        dims: dims.to_vec(),
        mat: w.unscale(tr),
    }
}

/// Random Hermitian matrix with independent Gaussian entries (test utility).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let mut g = zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = c(re, im);
        }
    }
    symmetrize(&g)
}
