use super::{Matrix, Result, StatsError};

/// Relative pivot magnitude below which a design column is treated as a
/// linear combination of the columns before it.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

/// Standard-error flavor for least-squares coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeKind {
    /// Model-based: residual variance times the diagonal of (XᵀX)⁻¹.
    #[default]
    Classical,
    /// Heteroskedasticity-consistent sandwich with the n / (n - p) correction.
    Hc1,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OlsOptions {
    pub se: SeKind,
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// RSS / (n - p).
    pub residual_variance: f64,
    pub n: usize,
    pub rank: usize,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Centered total sum of squares of the response.
    pub tss: f64,
    pub column_names: Vec<String>,
}

impl OlsFit {
    /// Coefficient of determination against the intercept-only model.
    pub fn r_squared(&self) -> f64 {
        if self.tss == 0.0 {
            0.0
        } else {
            1.0 - self.rss / self.tss
        }
    }

    pub fn coefficient(&self, name: &str) -> Option<(f64, f64)> {
        self.column_names
            .iter()
            .position(|n| n == name)
            .map(|j| (self.coefficients[j], self.standard_errors[j]))
    }
}

pub fn ols_fit(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    ols_fit_with(design, response, OlsOptions::default())
}

/// Least squares through a Householder QR factorization of the design.
///
/// Columns are processed in order without pivoting, so a collinearity error
/// names the first column that is (numerically) spanned by its predecessors.
pub fn ols_fit_with(design: &Matrix, response: &[f64], options: OlsOptions) -> Result<OlsFit> {
    let n = design.rows();
    let p = design.cols();
    if response.len() != n {
        return Err(StatsError::Dimension(format!(
            "response has {} rows, design has {n}",
            response.len()
        )));
    }
    if n <= p {
        return Err(StatsError::TooFewObservations { need: p + 1, got: n });
    }
    if let Some(i) = response.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::Domain(format!("non-finite response at row {i}")));
    }

    let qr = Householder::factor(design)?;
    let coefficients = qr.solve(response);

    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let fitted: f64 = design.row(i).iter().zip(&coefficients).map(|(x, b)| x * b).sum();
        residuals.push(response[i] - fitted);
    }
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let residual_variance = rss / (n - p) as f64;
    let ybar = response.iter().sum::<f64>() / n as f64;
    let tss = response.iter().map(|y| (y - ybar) * (y - ybar)).sum();

    let r_inv = qr.r_inverse();
    let standard_errors = match options.se {
        SeKind::Classical => (0..p)
            .map(|j| {
                let d: f64 = (j..p).map(|k| r_inv[j * p + k].powi(2)).sum();
                (residual_variance * d).sqrt()
            })
            .collect(),
        SeKind::Hc1 => hc1_errors(design, &residuals, &r_inv),
    };

    Ok(OlsFit {
        coefficients,
        standard_errors,
        residual_variance,
        n,
        rank: p,
        residuals,
        rss,
        tss,
        column_names: design.names().to_vec(),
    })
}

// cov = R⁻¹ (Σ e² q qᵀ) R⁻ᵀ · n/(n-p), with q the rows of X R⁻¹.
fn hc1_errors(design: &Matrix, residuals: &[f64], r_inv: &[f64]) -> Vec<f64> {
    let n = design.rows();
    let p = design.cols();
    let mut meat = vec![0.0; p * p];
    let mut q = vec![0.0; p];
    for i in 0..n {
        let x = design.row(i);
        for (k, qk) in q.iter_mut().enumerate() {
            *qk = (0..=k).map(|j| x[j] * r_inv[j * p + k]).sum();
        }
        let w = residuals[i] * residuals[i];
        for a in 0..p {
            for b in 0..p {
                meat[a * p + b] += w * q[a] * q[b];
            }
        }
    }
    let scale = n as f64 / (n - p) as f64;
    (0..p)
        .map(|j| {
            let mut v = 0.0;
            for a in j..p {
                for b in j..p {
                    v += r_inv[j * p + a] * meat[a * p + b] * r_inv[j * p + b];
                }
            }
            (scale * v).sqrt()
        })
        .collect()
}

struct Householder {
    n: usize,
    p: usize,
    // column-major, reflectors below the diagonal, R strictly above
    qr: Vec<f64>,
    rdiag: Vec<f64>,
}

impl Householder {
    fn factor(design: &Matrix) -> Result<Self> {
        let n = design.rows();
        let p = design.cols();
        let mut qr = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                qr[j * n + i] = design.get(i, j);
            }
        }
        let col_norms: Vec<f64> = (0..p)
            .map(|j| qr[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut rdiag = vec![0.0; p];

        for k in 0..p {
            let mut nrm = 0.0f64;
            for i in k..n {
                nrm = nrm.hypot(qr[k * n + i]);
            }
            if nrm <= COLLINEARITY_TOLERANCE * col_norms[k] || nrm == 0.0 {
                return Err(StatsError::Collinear {
                    index: k,
                    name: design.names()[k].clone(),
                });
            }
            if qr[k * n + k] < 0.0 {
                nrm = -nrm;
            }
            for i in k..n {
                qr[k * n + i] /= nrm;
            }
            qr[k * n + k] += 1.0;
            for j in (k + 1)..p {
                let mut s = 0.0;
                for i in k..n {
                    s += qr[k * n + i] * qr[j * n + i];
                }
                s = -s / qr[k * n + k];
                for i in k..n {
                    qr[j * n + i] += s * qr[k * n + i];
                }
            }
            rdiag[k] = -nrm;
        }
        Ok(Self { n, p, qr, rdiag })
    }

    fn solve(&self, response: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let mut y = response.to_vec();
        for k in 0..p {
            let mut s = 0.0;
            for i in k..n {
                s += self.qr[k * n + i] * y[i];
            }
            s = -s / self.qr[k * n + k];
            for i in k..n {
                y[i] += s * self.qr[k * n + i];
            }
        }
        let mut b = vec![0.0; p];
        for k in (0..p).rev() {
            let mut v = y[k];
            for j in (k + 1)..p {
                v -= self.qr[j * n + k] * b[j];
            }
            b[k] = v / self.rdiag[k];
        }
        b
    }

    /// Row-major inverse of the upper-triangular R factor.
    fn r_inverse(&self) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let r = |i: usize, j: usize| if i == j { self.rdiag[i] } else { self.qr[j * n + i] };
        let mut inv = vec![0.0; p * p];
        for j in 0..p {
            inv[j * p + j] = 1.0 / r(j, j);
            for i in (0..j).rev() {
                let s: f64 = ((i + 1)..=j).map(|k| r(i, k) * inv[k * p + j]).sum();
                inv[i * p + j] = -s / r(i, i);
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(cols: &[(&str, &[f64])]) -> Matrix {
        Matrix::with_intercept(cols[0].1.len(), cols).unwrap()
    }

    #[test]
    fn intercept_only_is_the_mean() {
        let x = Matrix::new(3, 1, vec![1.0; 3]).unwrap();
        let fit = ols_fit(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        // s² = 1, (XᵀX)⁻¹ = 1/3
        assert!((fit.standard_errors[0] - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn arm_indicator_is_difference_of_means() {
        let arm = [0.0, 0.0, 1.0, 1.0];
        let fit = ols_fit(&design(&[("arm", &arm)]), &[0.0, 2.0, 3.0, 5.0]).unwrap();
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-14);
        assert_eq!(fit.coefficient("arm").unwrap().0, fit.coefficients[1]);
    }

    // Brute-force oracle: explicit cofactor inverse of the 3x3 normal
    // equations matrix.
    fn normal_equations_3x3(rows: &[[f64; 3]], y: &[f64]) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut xtx = [[0.0; 3]; 3];
        let mut xty = [0.0; 3];
        for (r, &yi) in rows.iter().zip(y) {
            for a in 0..3 {
                xty[a] += r[a] * yi;
                for b in 0..3 {
                    xtx[a][b] += r[a] * r[b];
                }
            }
        }
        let m = xtx;
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
        let mut b = [0.0; 3];
        for i in 0..3 {
            b[i] = (0..3).map(|j| inv[i][j] * xty[j]).sum();
        }
        (b, inv)
    }

    #[test]
    fn matches_hand_solved_normal_equations() {
        let rows = [
            [1.0, 0.5, -1.2],
            [1.0, 1.7, 0.3],
            [1.0, -0.4, 2.2],
            [1.0, 2.9, 1.1],
            [1.0, 0.0, -0.7],
            [1.0, 1.1, 0.9],
        ];
        let y = [1.3, 2.8, 0.4, 4.9, 0.2, 2.5];
        let x = Matrix::new(6, 3, rows.iter().flatten().copied().collect()).unwrap();
        let fit = ols_fit(&x, &y).unwrap();
        let (b, inv) = normal_equations_3x3(&rows, &y);
        for j in 0..3 {
            assert!((fit.coefficients[j] - b[j]).abs() < 1e-10, "coef {j}");
            let se = (fit.residual_variance * inv[j][j]).sqrt();
            assert!((fit.standard_errors[j] - se).abs() < 1e-10, "se {j}");
        }
    }

    #[test]
    fn collinear_column_is_named() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let err = ols_fit(&design(&[("a", &a), ("twice_a", &b)]), &[1.0, 0.0, 1.0, 0.0, 2.0])
            .unwrap_err();
        assert_eq!(err, StatsError::Collinear { index: 2, name: "twice_a".into() });
        let c = [3.0; 5];
        let err = ols_fit(&design(&[("const", &c)]), &[1.0, 0.0, 1.0, 0.0, 2.0]).unwrap_err();
        assert!(matches!(err, StatsError::Collinear { index: 1, .. }));
    }

    #[test]
    fn rejects_underdetermined_and_mismatched() {
        let x = Matrix::new(2, 2, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(ols_fit(&x, &[1.0, 2.0]), Err(StatsError::TooFewObservations { .. })));
        let x = Matrix::new(3, 1, vec![1.0; 3]).unwrap();
        assert!(matches!(ols_fit(&x, &[1.0, 2.0]), Err(StatsError::Dimension(_))));
    }

    #[test]
    fn hc1_matches_direct_sandwich() {
        let xv = [0.1, 1.4, -0.3, 2.2, 0.9, -1.1, 0.5, 1.8];
        let y = [0.3, 2.0, -0.5, 5.1, 1.0, -0.9, 0.2, 3.9];
        let x = design(&[("x", &xv)]);
        let fit = ols_fit_with(&x, &y, OlsOptions { se: SeKind::Hc1 }).unwrap();
        // 2x2 sandwich by hand
        let n = xv.len() as f64;
        let (sx, sxx) = (xv.iter().sum::<f64>(), xv.iter().map(|v| v * v).sum::<f64>());
        let det = n * sxx - sx * sx;
        let inv = [[sxx / det, -sx / det], [-sx / det, n / det]];
        let mut meat = [[0.0; 2]; 2];
        for (i, &xi) in xv.iter().enumerate() {
            let r = [1.0, xi];
            let e2 = fit.residuals[i].powi(2);
            for a in 0..2 {
                for b in 0..2 {
                    meat[a][b] += e2 * r[a] * r[b];
                }
            }
        }
        for j in 0..2 {
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    v += inv[j][a] * meat[a][b] * inv[b][j];
                }
            }
            let se = (v * n / (n - 2.0)).sqrt();
            assert!((fit.standard_errors[j] - se).abs() < 1e-12);
        }
    }

    #[test]
    fn adding_a_covariate_never_increases_rss() {
        let x1 = [0.3, -1.2, 0.8, 2.1, -0.4, 1.5, 0.0, -2.2, 0.9, 1.1];
        let x2 = [1.0, 0.2, -0.7, 0.4, 1.9, -1.3, 0.6, 0.1, -0.2, 0.8];
        let y = [1.2, -0.8, 0.9, 3.0, 0.7, 0.9, 0.4, -2.0, 0.6, 2.2];
        let small = ols_fit(&design(&[("x1", &x1)]), &y).unwrap();
        let big = ols_fit(&design(&[("x1", &x1), ("x2", &x2)]), &y).unwrap();
        assert!(big.rss <= small.rss + 1e-12);
        assert!(big.r_squared() >= small.r_squared() - 1e-12);
    }
}
