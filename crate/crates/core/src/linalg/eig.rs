//! Eigendecomposition of general (non-normal) complex matrices.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, single-shift complex QR with Wilkinson shifts down to triangular
//! Schur form `T = Z†·A·Z`, eigenvectors of `T` by back-substitution, then
//! back-transformation, normalization, phase fixing and sorting.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::hermitian::spectral_norm;
use super::lu::inverse;
use super::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Tolerances controlling [`eig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    /// Relative tolerance for the reconstruction and inverse residuals.
    pub tol_eig: f64,
    /// Largest accepted condition number of the eigenvector matrix.
    pub kappa_max: f64,
    /// Total QR iteration budget; `None` means `30 · dim`.
    pub max_iterations: Option<usize>,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol_eig: 1e-10,
            kappa_max: 1e8,
            max_iterations: None,
        }
    }
}

/// `H = P·diag(λ)·P⁻¹` together with its diagnostics.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// The decomposed matrix, kept so that splits can be formed by a single
    /// subtraction from it.
    pub h: ComplexMatrix,
    /// Sorted by descending imaginary part, then ascending real part.
    pub eigenvalues: Vec<Complex64>,
    /// Columns are unit-norm right eigenvectors.
    pub p: ComplexMatrix,
    pub p_inv: ComplexMatrix,
    /// Spectral-norm condition number of `p`.
    pub kappa: f64,
    /// `‖H·P − P·D‖_F / ‖H‖_F`.
    pub residual: f64,
    /// `‖P·P⁻¹ − I‖_F`.
    pub inverse_residual: f64,
    pub warnings: Vec<String>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// Eigenvector `|λ_i⟩`.
    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.p.column(i)
    }

    /// `P · diag(f(λ_i)) · P⁻¹`.
    pub fn spectral_map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let mut scaled = self.p.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.scale_column(j, f(lam));
        }
        &scaled * &self.p_inv
    }

    /// Expansion coefficients `a_i` of `psi` in the eigenbasis, `P⁻¹·ψ`.
    pub fn coefficients(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.p_inv.mat_vec(psi)
    }

    /// Rebuilds a decomposition with the eigenvector columns rescaled by
    /// `c_i`. Used to probe invariance under the free normalization of `P`.
    pub fn with_rescaled_columns(&self, c: &[Complex64]) -> Result<Self> {
        if c.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: c.len(),
            });
        }
        let mut p = self.p.clone();
        let mut p_inv = self.p_inv.clone();
        for (j, &cj) in c.iter().enumerate() {
            if cj.norm() == 0.0 {
                return Err(Error::InvalidInput("rescaling factor must be nonzero".into()));
            }
            p.scale_column(j, cj);
            for k in 0..self.dim() {
                p_inv[(j, k)] /= cj;
            }
        }
        let kappa = spectral_norm(&p) * spectral_norm(&p_inv);
        Ok(Self {
            h: self.h.clone(),
            eigenvalues: self.eigenvalues.clone(),
            p,
            p_inv,
            kappa,
            residual: self.residual,
            inverse_residual: self.inverse_residual,
            warnings: self.warnings.clone(),
        })
    }
}

/// Computes the sorted, phase-fixed eigendecomposition of `h`.
pub fn eig(h: &ComplexMatrix, opts: &EigOptions) -> Result<SpectralDecomposition> {
    if !h.is_finite() {
        return Err(Error::NonFinite("eig input"));
    }
    let n = h.dim();
    let max_iter = opts.max_iterations.unwrap_or(30 * n);

    let mut a = h.clone();
    let scaling = balance(&mut a);
    let mut z = hessenberg(&mut a);
    schur(&mut a, &mut z, max_iter)?;

    let x = triangular_eigenvectors(&a);
    let mut v = &z * &x;
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] *= scaling[i];
        }
    }

    let raw: Vec<Complex64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| spectral_order(raw[i], raw[j]).then(i.cmp(&j)));

    let mut p = ComplexMatrix::zeros(n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(raw[src]);
        let col = normalize_column(&v.column(src));
        for (i, value) in col.into_iter().enumerate() {
            p[(i, dst)] = value;
        }
    }

    let p_inv = match inverse(&p) {
        Ok(inv) => inv,
        Err(Error::Singular { .. }) => {
            return Err(Error::NonDiagonalizable {
                kappa: f64::INFINITY,
                kappa_max: opts.kappa_max,
            })
        }
        Err(e) => return Err(e),
    };
    let kappa = spectral_norm(&p) * spectral_norm(&p_inv);
    if !kappa.is_finite() || kappa > opts.kappa_max {
        return Err(Error::NonDiagonalizable {
            kappa,
            kappa_max: opts.kappa_max,
        });
    }

    let hnorm = h.norm();
    let d = ComplexMatrix::from_diagonal(&eigenvalues);
    let recon = (h * &p).distance(&(&p * &d));
    let residual = if hnorm > 0.0 { recon / hnorm } else { recon };
    let inverse_residual = (&p * &p_inv).distance(&ComplexMatrix::identity(n));

    let mut warnings = Vec::new();
    if residual > opts.tol_eig {
        warnings.push(format!(
            "reconstruction residual {residual:.3e} exceeds tol_eig {:.1e}",
            opts.tol_eig
        ));
    }
    if inverse_residual > opts.tol_eig {
        warnings.push(format!(
            "inverse residual {inverse_residual:.3e} exceeds tol_eig {:.1e}",
            opts.tol_eig
        ));
    }
    let degenerate_tol = 1e-8 * hnorm;
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() < degenerate_tol {
                warnings.push(format!(
                    "near-degenerate eigenvalues {i} and {j}; metric depends on the eigenvector convention"
                ));
            }
        }
    }

    Ok(SpectralDecomposition {
        h: h.clone(),
        eigenvalues,
        p,
        p_inv,
        kappa,
        residual,
        inverse_residual,
        warnings,
    })
}

/// Descending imaginary part, then ascending real part.
pub fn spectral_order(a: Complex64, b: Complex64) -> Ordering {
    b.im.total_cmp(&a.im).then(a.re.total_cmp(&b.re))
}

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Parlett–Reinsch scaling by powers of two; returns the diagonal `D` with
/// `A_balanced = D⁻¹·A·D`.
fn balance(a: &mut ComplexMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.dim();
    let mut d = vec![1.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r / f) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    d
}

/// Householder reduction to upper Hessenberg form in place; returns the
/// accumulated unitary `Z` with `A_in = Z·A_out·Z†`.
fn hessenberg(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut z = ComplexMatrix::identity(n);
    if n < 3 {
        return z;
    }
    for k in 0..(n - 2) {
        let x: Vec<Complex64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A ← (I − 2vv†) A
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * a[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= *vr * s * 2.0;
            }
        }
        // A ← A (I − 2vv†), Z ← Z (I − 2vv†)
        for m in [&mut *a, &mut z] {
            for i in 0..n {
                let s: Complex64 = v.iter().enumerate().map(|(r, vr)| m[(i, k + 1 + r)] * vr).sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= s * vr.conj() * 2.0;
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            a[(i, k)] = ZERO;
        }
    }
    z
}

/// Rotation `G = [[c, s], [−s̄, c]]` with `G·(a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    let nrm = an.hypot(bn);
    let c = an / nrm;
    let s = (a / an) * b.conj() / nrm;
    (c, s)
}

/// Complex Schur form of an upper Hessenberg matrix by shifted QR sweeps.
fn schur(a: &mut ComplexMatrix, z: &mut ComplexMatrix, max_iter: usize) -> Result<()> {
    let n = a.dim();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = a.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut since_deflation = 0usize;

    while hi > 0 {
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let mut scale = abs1(a[(lo - 1, lo - 1)]) + abs1(a[(lo, lo)]);
            if scale == 0.0 {
                scale = anorm;
            }
            if abs1(a[(lo, lo - 1)]) <= eps * scale {
                a[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= max_iter {
            return Err(Error::NonConvergence { iterations: total });
        }
        total += 1;
        since_deflation += 1;

        let shift = if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            a[(hi, hi)] + abs1(a[(hi, hi - 1)]) * 0.75
        } else {
            wilkinson_shift(a[(hi - 1, hi - 1)], a[(hi - 1, hi)], a[(hi, hi - 1)], a[(hi, hi)])
        };

        for k in lo..=hi {
            a[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(a[(k, k)], a[(k + 1, k)]);
            for j in k..n {
                let x = a[(k, j)];
                let y = a[(k + 1, j)];
                a[(k, j)] = x * c + s * y;
                a[(k + 1, j)] = -s.conj() * x + y * c;
            }
            a[(k + 1, k)] = ZERO;
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let u = a[(i, k)];
                let v = a[(i, k + 1)];
                a[(i, k)] = u * c + v * s.conj();
                a[(i, k + 1)] = -u * s + v * c;
            }
            for i in 0..n {
                let u = z[(i, k)];
                let v = z[(i, k + 1)];
                z[(i, k)] = u * c + v * s.conj();
                z[(i, k + 1)] = -u * s + v * c;
            }
        }
        for k in lo..=hi {
            a[(k, k)] += shift;
        }
    }

    // clean the strictly lower part
    for i in 1..n {
        for j in 0..i {
            a[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let r1 = m + disc;
    let r2 = m - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Right eigenvectors of an upper triangular matrix, one per column, by
/// back-substitution. Small denominators are replaced by `ε·‖T‖`, which
/// makes the vectors of a defective matrix nearly parallel instead of NaN.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let smin = (f64::EPSILON * t.norm()).max(1e-150);
    let mut x = ComplexMatrix::zeros(n);
    for k in 0..n {
        let tkk = t[(k, k)];
        let mut col = vec![ZERO; k + 1];
        col[k] = ONE;
        for i in (0..k).rev() {
            let rhs: Complex64 = ((i + 1)..=k).map(|j| t[(i, j)] * col[j]).sum();
            let mut denom = t[(i, i)] - tkk;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            col[i] = -rhs / denom;
            let big = col.iter().map(|c| abs1(*c)).fold(0.0, f64::max);
            if big > 1e100 {
                for c in col.iter_mut() {
                    *c /= big;
                }
            }
        }
        for (i, c) in col.into_iter().enumerate() {
            x[(i, k)] = c;
        }
    }
    x
}

/// Unit Euclidean norm with the first (near-)largest component made real
/// and positive.
fn normalize_column(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut out: Vec<Complex64> = v.iter().map(|c| c / norm).collect();
    let max = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = out.iter().position(|c| c.norm() >= max * (1.0 - 1e-10)).unwrap_or(0);
    let mag = out[pivot].norm();
    let phase = out[pivot].conj() / mag;
    for c in out.iter_mut() {
        *c *= phase;
    }
    out[pivot] = Complex64::new(mag, 0.0);
    out
}

/// `expm`-free propagator `P·diag(e^{s·λ_i})·P⁻¹`.
pub fn spectral_exp(d: &SpectralDecomposition, s: Complex64) -> ComplexMatrix {
    d.spectral_map(|lam| (s * lam).exp())
}
