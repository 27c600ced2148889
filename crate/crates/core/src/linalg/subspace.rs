use super::{ComplexMatrix, C64};
use crate::error::{invalid, Error, Result};

/// Columns of `basis` are orthonormal; the basis stands for its column span.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    basis: ComplexMatrix,
}

const ORTHONORMAL_TOL: f64 = 1e-10;

impl OrthonormalBasis {
    /// Checks `B* B = I` entrywise to `1e-10`.
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        if basis.cols() > basis.rows() {
            return Err(invalid(format!(
                "basis has {} columns in ambient dimension {}",
                basis.cols(),
                basis.rows()
            )));
        }
        let gram = basis.adjoint_matmul(&basis)?;
        let r = basis.cols();
        for j in 0..r {
            for k in 0..r {
                let want = if j == k { 1.0 } else { 0.0 };
                if (gram[(j, k)] - C64::new(want, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(invalid("basis columns are not orthonormal"));
                }
            }
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_trusted(basis: ComplexMatrix) -> Self {
        Self { basis }
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.basis
    }
}

/// Orthonormal basis of `range(A)` for a full-column-rank `A`, via thin QR.
pub fn orthonormal_range(a: &ComplexMatrix) -> Result<OrthonormalBasis> {
    if a.cols() == 0 || a.cols() > a.rows() {
        return Err(invalid(format!(
            "range of a {}x{} matrix cannot have full column rank",
            a.rows(),
            a.cols()
        )));
    }
    let qr = a.to_faer().qr();
    let r = qr.thin_R();
    let diag: Vec<f64> = (0..a.cols()).map(|k| r[(k, k)].norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * max) {
        return Err(Error::IllConditioned { sigma_min: min, sigma_max: max });
    }
    Ok(OrthonormalBasis::from_trusted(ComplexMatrix::from_faer(&qr.compute_thin_Q())))
}

/// Thin SVD `M = U diag(s) V*` with `k = min(rows, cols)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl FullSvd {
    /// Keeps the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Result<TruncatedSvd> {
        if r == 0 || r > self.s.len() {
            return Err(invalid(format!(
                "truncation rank {r} outside 1..={}",
                self.s.len()
            )));
        }
        let left = ComplexMatrix::from_fn(self.u.rows(), r, |j, k| self.u[(j, k)]);
        let right = ComplexMatrix::from_fn(self.v.rows(), r, |j, k| self.v[(j, k)]);
        Ok(TruncatedSvd {
            left: OrthonormalBasis::from_trusted(left),
            values: self.s[..r].to_vec(),
            right: OrthonormalBasis::from_trusted(right),
        })
    }
}

pub fn full_svd(m: &ComplexMatrix) -> Result<FullSvd> {
    let svd = m
        .to_faer()
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    Ok(FullSvd {
        u: ComplexMatrix::from_faer_ref(svd.U()),
        s: (0..s.nrows()).map(|k| s[k].re).collect(),
        v: ComplexMatrix::from_faer_ref(svd.V()),
    })
}

/// Singular values and the thin left singular vectors; `V` is never formed,
/// which saves roughly half the work of [`full_svd`].
pub fn left_svd(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    use faer::dyn_stack::{MemBuffer, MemStack};
    use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors};

    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Err(invalid("SVD of an empty matrix"));
    }
    let a = m.to_faer();
    let k = rows.min(cols);
    let mut s = faer::diag::Diag::<C64>::zeros(k);
    let mut u = faer::Mat::<C64>::zeros(rows, k);
    let par = faer::Par::Seq;
    let mut buf = MemBuffer::new(svd_scratch::<C64>(
        rows,
        cols,
        ComputeSvdVectors::Thin,
        ComputeSvdVectors::No,
        par,
        Default::default(),
    ));
    svd(a.as_ref(), s.as_mut(), Some(u.as_mut()), None, par, MemStack::new(&mut buf), Default::default())
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let sv = s.column_vector();
    Ok((ComplexMatrix::from_faer(&u), (0..k).map(|j| sv[j].re).collect()))
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    m.to_faer()
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

/// Leading rank-`r` part of an SVD.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub left: OrthonormalBasis,
    pub values: Vec<f64>,
    pub right: OrthonormalBasis,
}

impl TruncatedSvd {
    /// `U diag(σ) V*`, the best rank-`r` Frobenius approximant.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = self.left.matrix();
        let v = self.right.matrix();
        let us = ComplexMatrix::from_fn(u.rows(), u.cols(), |j, k| u[(j, k)] * self.values[k]);
        let a = us.to_faer();
        let b = v.to_faer();
        ComplexMatrix::from_faer(&(a * b.adjoint()))
    }
}

pub fn truncated_svd(m: &ComplexMatrix, r: usize) -> Result<TruncatedSvd> {
    let k = m.rows().min(m.cols());
    if r == 0 || r > k {
        return Err(invalid(format!("truncation rank {r} outside 1..={k}")));
    }
    full_svd(m)?.truncate(r)
}

/// `A⁺ B` for a full-column-rank `A` (minimum-norm least squares, columnwise).
pub fn least_squares_inverse_apply(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() {
        return Err(invalid(format!(
            "least squares: A has {} rows, B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if a.cols() == 0 || a.cols() > a.rows() {
        return Err(invalid(format!(
            "least squares needs a tall full-column-rank A, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let svd = full_svd(a)?;
    let sigma_max = svd.s[0];
    let sigma_min = *svd.s.last().unwrap();
    if !(sigma_min > 1e-10 * sigma_max) {
        return Err(Error::IllConditioned { sigma_min, sigma_max });
    }
    let uhb = svd.u.adjoint_matmul(b)?;
    let scaled = ComplexMatrix::from_fn(uhb.rows(), uhb.cols(), |j, k| uhb[(j, k)] / svd.s[j]);
    svd.v.matmul(&scaled)
}

/// Norms of the diagonal sine matrix of principal angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinTheta {
    pub spectral: f64,
    pub frobenius: f64,
}

pub fn sin_theta(u: &OrthonormalBasis, w: &OrthonormalBasis) -> Result<SinTheta> {
    if u.ambient() != w.ambient() || u.dim() != w.dim() {
        return Err(invalid(format!(
            "sin_theta needs equal shapes, got {}x{} and {}x{}",
            u.ambient(),
            u.dim(),
            w.ambient(),
            w.dim()
        )));
    }
    // sines are the singular values of (I − UU*)W; going through the
    // cosines would lose everything below ~1e-8
    let (um, wm) = (u.matrix(), w.matrix());
    let residual = wm.sub(&um.matmul(&um.adjoint_matmul(wm)?)?)?;
    let sines = singular_values(&residual)?;
    Ok(SinTheta {
        spectral: sines.iter().copied().fold(0.0, f64::max).min(1.0),
        frobenius: residual.fro_norm(),
    })
}

/// `|{k : σ_k ≥ ε σ_1}|`, zero when `σ_1 = 0` or `σ` is empty.
pub fn eps_rank(sigma: &[f64], eps: f64) -> usize {
    match sigma.first() {
        Some(&top) if top > 0.0 => sigma.iter().filter(|&&s| s >= eps * top).count(),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn real_diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diagonal(&values.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>())
    }

    fn basis(cols: &[&[C64]]) -> OrthonormalBasis {
        let n = cols[0].len();
        OrthonormalBasis::new(ComplexMatrix::from_fn(n, cols.len(), |j, k| cols[k][j])).unwrap()
    }

    #[test]
    fn truncated_svd_examples() {
        let svd = truncated_svd(&real_diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!((svd.values[0] - 3.0).abs() < 1e-14);
        assert!((svd.values[1] - 2.0).abs() < 1e-14);
        let u = [C64::new(1.0, 2.0), C64::new(-1.0, 0.5), C64::new(0.0, 3.0)];
        let v = [C64::new(2.0, 0.0), C64::new(0.0, -1.0)];
        let outer = ComplexMatrix::from_fn(3, 2, |j, k| u[j] * v[k].conj());
        let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let svd = truncated_svd(&outer, 1).unwrap();
        assert!((svd.values[0] - nu * nv).abs() < 1e-12);
        assert!(truncated_svd(&outer, 3).is_err());
        assert!(truncated_svd(&outer, 0).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let b = ComplexMatrix::from_fn(3, 2, |j, k| C64::new(j as f64, k as f64));
        let x = least_squares_inverse_apply(&ComplexMatrix::identity(3), &b).unwrap();
        assert!(x.sub(&b).unwrap().fro_norm() < 1e-14);
        let s = FRAC_1_SQRT_2;
        let q = ComplexMatrix::from_fn(3, 2, |j, k| match (j, k) {
            (0, 0) | (1, 0) => C64::new(s, 0.0),
            (2, 1) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        });
        let x = least_squares_inverse_apply(&q, &b).unwrap();
        assert!(x.sub(&q.adjoint_matmul(&b).unwrap()).unwrap().fro_norm() < 1e-14);
        let singular = ComplexMatrix::from_fn(3, 2, |_, _| C64::new(1.0, 0.0));
        assert!(matches!(
            least_squares_inverse_apply(&singular, &b),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn sin_theta_examples() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let e1 = basis(&[&[one, zero]]);
        let e2 = basis(&[&[zero, one]]);
        let st = sin_theta(&e1, &e1).unwrap();
        assert!(st.spectral < 1e-7 && st.frobenius < 1e-7);
        let st = sin_theta(&e1, &e2).unwrap();
        assert!((st.spectral - 1.0).abs() < 1e-14 && (st.frobenius - 1.0).abs() < 1e-14);
        let diag = basis(&[&[C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]]);
        let st = sin_theta(&e1, &diag).unwrap();
        assert!((st.spectral - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((st.frobenius - FRAC_1_SQRT_2).abs() < 1e-14);
        let plane = basis(&[&[one, zero, zero], &[zero, one, zero]]);
        assert!(sin_theta(&e1, &plane).is_err());
    }

    #[test]
    fn eps_rank_examples() {
        let s = [1.0, 0.5, 1e-8];
        assert_eq!(eps_rank(&s, 1e-6), 2);
        assert_eq!(eps_rank(&s, 1e-2), 2);
        assert_eq!(eps_rank(&s, 1e-8), 3);
        assert_eq!(eps_rank(&[0.0, 0.0], 0.5), 0);
        assert_eq!(eps_rank(&[], 0.5), 0);
    }

    #[test]
    fn orthonormal_range_spans_input() {
        let a = ComplexMatrix::from_fn(5, 2, |j, k| C64::new((j * k) as f64 + 1.0, j as f64));
        let q = orthonormal_range(&a).unwrap();
        assert!(OrthonormalBasis::new(q.matrix().clone()).is_ok());
        let proj = q.matrix().matmul(&q.matrix().adjoint_matmul(&a).unwrap()).unwrap();
        assert!(proj.sub(&a).unwrap().fro_norm() < 1e-12 * a.fro_norm());
        let rank_one = ComplexMatrix::from_fn(4, 2, |_, _| C64::new(1.0, 0.0));
        assert!(orthonormal_range(&rank_one).is_err());
    }
}
