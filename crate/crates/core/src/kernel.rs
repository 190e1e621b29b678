//! Kernel matrices and the energy principle.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::SupportSet;

/// Relative asymmetry tolerated on input before exact symmetrization.
const SYMMETRY_RTOL: f64 = 1e-12;

/// Evidence that a matrix satisfies the energy principle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdCertificate {
    /// Smallest squared pivot of the completed Cholesky factorization.
    pub min_pivot: f64,
    /// Rayleigh-quotient estimate of the smallest eigenvalue from inverse
    /// iteration on the factor. It bounds the true value from above.
    pub min_eigenvalue_estimate: f64,
}

/// A symmetric, nonnegative, strictly positive definite kernel on a finite
/// node set. Construction fails unless all three properties hold.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    entries: DMatrix<f64>,
    certificate: PdCertificate,
}

impl KernelMatrix {
    pub fn new(mut entries: DMatrix<f64>) -> Result<Self> {
        let m = entries.nrows();
        if m == 0 || entries.ncols() != m {
            return Err(Error::SizeMismatch {
                expected: m,
                found: entries.ncols(),
            });
        }
        for i in 0..m {
            for j in 0..m {
                let v = entries[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > SYMMETRY_RTOL * a.abs().max(b.abs()) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                let mean = 0.5 * (a + b);
                entries[(i, j)] = mean;
                entries[(j, i)] = mean;
            }
        }
        let certificate = check_energy_principle(&entries)?;
        Ok(Self {
            entries,
            certificate,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        for row in rows {
            if row.len() != m {
                return Err(Error::SizeMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    /// Reads a row-major, header-free CSV matrix.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidParameter(format!("bad CSV entry {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn certificate(&self) -> PdCertificate {
        self.certificate
    }

    /// Principal submatrix on `set`.
    pub fn restrict(&self, set: &SupportSet) -> DMatrix<f64> {
        let idx = set.indices();
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.entries[(idx[a], idx[b])])
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// Verifies the energy principle by Cholesky factorization.
///
/// On failure the returned witness is the eigenvector of the smallest
/// eigenvalue, scaled to unit max-norm with a positive leading entry.
pub fn check_energy_principle(matrix: &DMatrix<f64>) -> Result<PdCertificate> {
    let m = matrix.nrows();
    if matrix.ncols() != m {
        return Err(Error::SizeMismatch {
            expected: m,
            found: matrix.ncols(),
        });
    }
    match matrix.clone().cholesky() {
        Some(chol) => {
            let l = chol.l_dirty();
            let min_pivot = (0..m).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
            if !(min_pivot > 0.0) {
                return Err(witness(matrix));
            }
            // Inverse iteration: v <- K^{-1} v, then Rayleigh quotient.
            let mut v = DVector::from_fn(m, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
            v /= v.norm();
            for _ in 0..30 {
                let mut next = chol.solve(&v);
                let nrm = next.norm();
                if !(nrm > 0.0) || !nrm.is_finite() {
                    break;
                }
                next /= nrm;
                v = next;
            }
            let rq = v.dot(&(matrix * &v));
            if !(rq > 0.0) {
                return Err(witness(matrix));
            }
            Ok(PdCertificate {
                min_pivot,
                min_eigenvalue_estimate: rq,
            })
        }
        None => Err(witness(matrix)),
    }
}

fn witness(matrix: &DMatrix<f64>) -> Error {
    let eig = SymmetricEigen::new(matrix.clone());
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut w: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
    let scale = w.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let lead = w.iter().copied().find(|x| x.abs() > 1e-12 * scale).unwrap_or(1.0);
    let s = lead.signum() / scale;
    w.iter_mut().for_each(|x| *x *= s);
    let wv = DVector::from_vec(w.clone());
    let energy = wv.dot(&(matrix * &wv));
    Error::NotPositiveDefinite { witness: w, energy }
}
