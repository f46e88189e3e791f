//! Incremental kernel interpolation with exact power-function bookkeeping.
//!
//! A [`GreedyModel`] interpolates a target on a growing set of centers drawn
//! from a fixed candidate cloud. Instead of re-solving the kernel system at
//! every step, it maintains a Newton basis — an orthonormal basis of the
//! span of the chosen kernel translates — so that adding one center costs
//! `O(M * N)` for `M` candidates and `N` current centers, and the squared
//! power function (the worst-case pointwise error norm) is updated exactly
//! alongside.
//!
//! The cached per-candidate Newton values form, restricted to the chosen
//! centers, a lower-triangular factor `L` with `A = L * L^T` for the kernel
//! matrix `A` — the same factor a pivoted Cholesky would produce. All
//! arbitrary-point quantities (interpolant values, power function, cardinal
//! functions, derivative-enriched power) come from triangular solves
//! against `L`.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::kernels::Kernel;
use crate::target::TargetFunction;

/// Threshold on the squared power below which a candidate counts as
/// numerically dependent on the current centers: selecting it would divide
/// by (nearly) zero and destroy the factorization.
pub const POWER_FLOOR: f64 = 1e-14;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An incremental kernel interpolant over a fixed candidate cloud.
#[derive(Debug, Clone)]
pub struct GreedyModel {
    kernel: Kernel,
    candidates: PointCloud,
    /// Target values on the candidates; `None` for power-only models.
    target_values: Option<Vec<f64>>,
    /// Indices (into `candidates`) of the chosen centers, in order.
    center_indices: Vec<usize>,
    /// Newton-basis values per candidate: row `x` holds `v_0(x)..v_{N-1}(x)`.
    newton_rows: Vec<Vec<f64>>,
    /// Squared power function per candidate, clamped at zero.
    power_sq: Vec<f64>,
    /// Interpolant values per candidate (all zero without a target).
    interp_values: Vec<f64>,
    /// Lower-triangular factor of the center kernel matrix; row `k` has
    /// `k + 1` entries and `A = L * L^T`.
    factor_rows: Vec<Vec<f64>>,
    /// Projection coefficients of the target in the Newton basis.
    newton_coeffs: Vec<f64>,
    /// Target values at the centers, in selection order.
    center_values: Vec<f64>,
    /// Running minimum over steps of the squared power of the point being
    /// added (an upper bound for the smallest eigenvalue of `A`).
    lambda_min_upper: f64,
}

impl GreedyModel {
    /// Empty model over a candidate cloud. The cloud must be non-empty and
    /// free of duplicate points; a tabulated target must match its length.
    pub fn new(
        kernel: Kernel,
        candidates: PointCloud,
        target: Option<&TargetFunction>,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::EmptySet);
        }
        candidates.ensure_distinct()?;
        let target_values = match target {
            Some(t) => Some(t.values_on(&candidates)?),
            None => None,
        };
        let m = candidates.len();
        let power_sq = candidates.iter().map(|p| kernel.eval(p, p)).collect();
        Ok(GreedyModel {
            kernel,
            candidates,
            target_values,
            center_indices: Vec::new(),
            newton_rows: vec![Vec::new(); m],
            power_sq,
            interp_values: vec![0.0; m],
            factor_rows: Vec::new(),
            newton_coeffs: Vec::new(),
            center_values: Vec::new(),
            lambda_min_upper: f64::INFINITY,
        })
    }

    /// Number of centers chosen so far.
    pub fn len(&self) -> usize {
        self.center_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.candidates.dim()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn candidates(&self) -> &PointCloud {
        &self.candidates
    }

    pub fn center_indices(&self) -> &[usize] {
        &self.center_indices
    }

    /// The chosen centers as their own cloud, in selection order.
    pub fn centers(&self) -> PointCloud {
        self.candidates.subset(&self.center_indices)
    }

    /// Squared power function on the candidates (exact bookkeeping).
    pub fn power_sq(&self) -> &[f64] {
        &self.power_sq
    }

    /// Interpolant values on the candidates (zeros without a target).
    pub fn interp_values(&self) -> &[f64] {
        &self.interp_values
    }

    pub fn target_values(&self) -> Option<&[f64]> {
        self.target_values.as_deref()
    }

    /// Target values at the centers, in selection order.
    pub fn center_values(&self) -> &[f64] {
        &self.center_values
    }

    /// Diagonal of the triangular factor: the power of each center at the
    /// moment it was selected.
    pub fn factor_diag(&self) -> Vec<f64> {
        self.factor_rows
            .iter()
            .map(|row| *row.last().expect("factor rows are never empty"))
            .collect()
    }

    /// Running upper bound for the smallest eigenvalue of the center kernel
    /// matrix: the minimum over steps of the squared power of the added
    /// point. `INFINITY` while no center has been added.
    pub fn lambda_min_upper(&self) -> f64 {
        self.lambda_min_upper
    }

    /// Maximum of the power function over the candidates.
    pub fn max_power(&self) -> f64 {
        self.power_sq.iter().cloned().fold(0.0f64, f64::max).sqrt()
    }

    /// Residuals `f - s` on the candidates; `None` without a target.
    pub fn candidate_residuals(&self) -> Option<Vec<f64>> {
        self.target_values.as_ref().map(|f| {
            f.iter()
                .zip(&self.interp_values)
                .map(|(fv, sv)| fv - sv)
                .collect()
        })
    }

    /// Maximum absolute residual on the candidates; `None` without a target.
    pub fn max_residual(&self) -> Option<f64> {
        self.target_values.as_ref().map(|f| {
            f.iter()
                .zip(&self.interp_values)
                .map(|(fv, sv)| (fv - sv).abs())
                .fold(0.0f64, f64::max)
        })
    }

    /// Promote candidate `index` to a center, updating every candidate's
    /// Newton row, squared power, and interpolant value in one `O(M * N)`
    /// sweep.
    ///
    /// Fails with [`Error::NumericallySingular`] if the candidate's squared
    /// power is at or below [`POWER_FLOOR`].
    pub fn add_center(&mut self, index: usize) -> Result<()> {
        assert!(index < self.candidates.len(), "center index out of range");
        let p2 = self.power_sq[index];
        if p2 <= POWER_FLOOR {
            return Err(Error::NumericallySingular {
                index,
                power_sq: p2,
            });
        }
        let beta = p2.sqrt();
        let row_m = self.newton_rows[index].clone();
        let point_m = self.candidates.point(index).to_vec();
        // Projection coefficient of the target onto the new basis function,
        // read off before any interpolant value changes.
        let coeff = self
            .target_values
            .as_ref()
            .map(|f| (f[index] - self.interp_values[index]) / beta);

        for (i, p) in self.candidates.iter().enumerate() {
            let row = &mut self.newton_rows[i];
            let v = (self.kernel.eval(p, &point_m) - dot(row, &row_m)) / beta;
            row.push(v);
            self.power_sq[i] = (self.power_sq[i] - v * v).max(0.0);
            if let Some(c) = coeff {
                self.interp_values[i] += c * v;
            }
        }

        // The factor row is the new center's Newton values with its own
        // power on the diagonal; A = L * L^T extends exactly.
        let mut factor_row = row_m;
        factor_row.push(beta);
        self.factor_rows.push(factor_row);
        self.center_indices.push(index);
        self.lambda_min_upper = self.lambda_min_upper.min(p2);
        if let Some(c) = coeff {
            self.newton_coeffs.push(c);
            self.center_values
                .push(self.target_values.as_ref().unwrap()[index]);
        }
        Ok(())
    }

    /// Newton-basis values `v_0(p)..v_{N-1}(p)` at an arbitrary point, via a
    /// forward solve of `L v = z` with `z_k = k(p, x_k)`.
    pub fn newton_values_at(&self, p: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut u = Vec::with_capacity(n);
        for k in 0..n {
            let row = &self.factor_rows[k];
            let z = self
                .kernel
                .eval(p, self.candidates.point(self.center_indices[k]));
            let v = (z - dot(&row[..k], &u)) / row[k];
            u.push(v);
        }
        u
    }

    fn check_dim(&self, points: &PointCloud) -> Result<()> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: points.dim(),
            });
        }
        Ok(())
    }

    /// Interpolant values at arbitrary points. (On the candidates
    /// themselves, prefer the cached [`GreedyModel::interp_values`].)
    pub fn evaluate(&self, points: &PointCloud) -> Result<Vec<f64>> {
        self.check_dim(points)?;
        Ok(points
            .iter()
            .map(|p| dot(&self.newton_values_at(p), &self.newton_coeffs))
            .collect())
    }

    /// Power function values at arbitrary points:
    /// `P(p)^2 = k(p, p) - sum_k v_k(p)^2`, clamped at zero.
    pub fn power_at(&self, points: &PointCloud) -> Result<Vec<f64>> {
        self.check_dim(points)?;
        Ok(points
            .iter()
            .map(|p| {
                let u = self.newton_values_at(p);
                (self.kernel.eval(p, p) - dot(&u, &u)).max(0.0).sqrt()
            })
            .collect())
    }

    /// Expansion coefficients of the interpolant in the kernel-translate
    /// basis, via a back solve of `L^T alpha = c`. `None` without a target.
    pub fn coefficients(&self) -> Option<Vec<f64>> {
        self.target_values.as_ref()?;
        Some(self.back_solve(&self.newton_coeffs))
    }

    /// Solve `L^T out = rhs` for the current factor.
    fn back_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for (row, o) in self.factor_rows.iter().zip(&out).skip(k + 1) {
                s -= row[k] * o;
            }
            out[k] = s / self.factor_rows[k][k];
        }
        out
    }

    /// Partial derivative of the interpolant along `axis` at arbitrary
    /// points, through the kernel-translate expansion.
    pub fn evaluate_partial(&self, points: &PointCloud, axis: usize) -> Result<Vec<f64>> {
        self.check_dim(points)?;
        let alpha = self.coefficients().ok_or(Error::TargetRequired)?;
        points
            .iter()
            .map(|p| {
                let mut s = 0.0;
                for (k, &ci) in self.center_indices.iter().enumerate() {
                    s += alpha[k] * self.kernel.eval_grad1(p, self.candidates.point(ci), axis)?;
                }
                Ok(s)
            })
            .collect()
    }

    /// Cardinal (Lagrange) function values at arbitrary points: entry `k` of
    /// row `i` is the value at `points[i]` of the interpolant that is one at
    /// center `k` and zero at the others. Computed per point by the two
    /// triangular solves of `L L^T l = z`.
    pub fn cardinal_functions(&self, points: &PointCloud) -> Result<Vec<Vec<f64>>> {
        self.check_dim(points)?;
        Ok(points
            .iter()
            .map(|p| self.back_solve(&self.newton_values_at(p)))
            .collect())
    }

    /// Lebesgue constant over the given evaluation points: the maximum over
    /// points of the sum of absolute cardinal values. Bounds how much
    /// interpolation can amplify data errors.
    pub fn lebesgue_constant(&self, points: &PointCloud) -> Result<f64> {
        if points.is_empty() || self.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(self
            .cardinal_functions(points)?
            .iter()
            .map(|l| l.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max))
    }

    /// Power function of the derivative functional `f -> (d f / d x_axis)(p)`:
    /// the worst-case error of reading a partial derivative off the
    /// interpolant, per unit of native-space norm. Needs a kernel with
    /// mixed second derivatives.
    pub fn derivative_power(&self, p: &[f64], axis: usize) -> Result<f64> {
        let diag = self.kernel.eval_hess12(p, p, axis)?;
        let n = self.len();
        let mut u = Vec::with_capacity(n);
        for k in 0..n {
            let row = &self.factor_rows[k];
            let z =
                self.kernel
                    .eval_grad1(p, self.candidates.point(self.center_indices[k]), axis)?;
            let v = (z - dot(&row[..k], &u)) / row[k];
            u.push(v);
        }
        Ok((diag - dot(&u, &u)).max(0.0).sqrt())
    }

    /// Kernel matrix of the current centers (dense, selection order).
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.kernel.eval(
                self.candidates.point(self.center_indices[i]),
                self.candidates.point(self.center_indices[j]),
            )
        })
    }

    /// Spectral diagnostics of the center kernel matrix via a dense
    /// symmetric eigensolve: `O(N^3)`, so call sparingly on large models.
    pub fn condition_diagnostics(&self) -> Result<ConditionDiagnostics> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let eigs = self.gram_matrix().symmetric_eigenvalues();
        let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda_max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cond = if lambda_min > 0.0 {
            lambda_max / lambda_min
        } else {
            f64::INFINITY
        };
        Ok(ConditionDiagnostics {
            lambda_min,
            lambda_max,
            cond,
            lambda_min_upper: self.lambda_min_upper,
        })
    }

    /// Serializable snapshot of the fitted interpolant. Fails without a
    /// target only in the sense that coefficients come out empty.
    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            kernel: self.kernel.to_string(),
            dim: self.dim(),
            centers: self.centers().iter().map(|p| p.to_vec()).collect(),
            alpha: self.coefficients().unwrap_or_default(),
            diag_l: self.factor_diag(),
            center_values: self.center_values.clone(),
        }
    }

    /// Write the fitted interpolant as JSON.
    pub fn save_model(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self.to_model_file())?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

/// Spectral diagnostics of a center kernel matrix.
#[derive(Debug, Clone, Copy)]
pub struct ConditionDiagnostics {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_max / lambda_min`, or `INFINITY` if the matrix is not
    /// numerically positive definite.
    pub cond: f64,
    /// The model's running bound `min_k P_{k-1}(x_k)^2 >= lambda_min`.
    pub lambda_min_upper: f64,
}

/// On-disk form of a fitted interpolant: kernel descriptor, centers,
/// expansion coefficients, factor diagonal, and the interpolated values.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub kernel: String,
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub diag_l: Vec<f64>,
    pub center_values: Vec<f64>,
}

/// A model read back from disk, validated and ready to evaluate.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub kernel: Kernel,
    pub centers: PointCloud,
    pub alpha: Vec<f64>,
    pub diag_l: Vec<f64>,
    pub center_values: Vec<f64>,
}

impl LoadedModel {
    /// Validate a deserialized [`ModelFile`]. Rebuilds the kernel matrix and
    /// checks `max |A alpha - b|` against `1e-8`, relaxed only by the
    /// floating-point backward-error scale `32 n eps |alpha|_1` so that
    /// models with legitimately huge coefficients (deliberately unstable
    /// runs) still round-trip.
    pub fn from_file(file: ModelFile) -> Result<Self> {
        let kernel: Kernel = file.kernel.parse()?;
        let centers = PointCloud::from_rows(&file.centers)?;
        if centers.dim() != file.dim {
            return Err(Error::DimensionMismatch {
                expected: file.dim,
                got: centers.dim(),
            });
        }
        let n = centers.len();
        if file.diag_l.len() != n {
            return Err(Error::Parse {
                what: "model file",
                detail: format!("diag_l has {} entries for {} centers", file.diag_l.len(), n),
            });
        }
        if !file.alpha.is_empty() {
            if file.alpha.len() != n || file.center_values.len() != n {
                return Err(Error::Parse {
                    what: "model file",
                    detail: "alpha / center_values length does not match centers".to_string(),
                });
            }
            let mut residual = 0.0f64;
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += kernel.eval(centers.point(i), centers.point(j)) * file.alpha[j];
                }
                residual = residual.max((s - file.center_values[i]).abs());
            }
            let alpha_l1: f64 = file.alpha.iter().map(|a| a.abs()).sum();
            let tolerance = 1e-8f64.max(32.0 * n as f64 * f64::EPSILON * alpha_l1);
            if residual > tolerance {
                return Err(Error::ModelValidation {
                    residual,
                    tolerance,
                });
            }
        }
        Ok(LoadedModel {
            kernel,
            centers,
            alpha: file.alpha,
            diag_l: file.diag_l,
            center_values: file.center_values,
        })
    }

    /// Read and validate a model file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(BufReader::new(std::fs::File::open(path)?))?;
        Self::from_file(file)
    }

    /// Evaluate the loaded interpolant. Fails if the model was saved
    /// without a target (no coefficients).
    pub fn evaluate(&self, points: &PointCloud) -> Result<Vec<f64>> {
        if self.alpha.is_empty() {
            return Err(Error::TargetRequired);
        }
        if points.dim() != self.centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.centers.dim(),
                got: points.dim(),
            });
        }
        Ok(points
            .iter()
            .map(|p| {
                self.alpha
                    .iter()
                    .zip(self.centers.iter())
                    .map(|(a, c)| a * self.kernel.eval(p, c))
                    .sum()
            })
            .collect())
    }
}

/// A function built as a finite combination of kernel translates:
/// `f(x) = sum_i w_i k(x, y_i)`. Such functions live in the kernel's
/// native space with exactly computable norm, which makes them the natural
/// ground truth for error-bound tests.
#[derive(Debug, Clone)]
pub struct KernelCombination {
    kernel: Kernel,
    nodes: PointCloud,
    weights: Vec<f64>,
}

impl KernelCombination {
    pub fn new(kernel: Kernel, nodes: PointCloud, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptySet);
        }
        if nodes.len() != weights.len() {
            return Err(Error::TargetLengthMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        Ok(KernelCombination {
            kernel,
            nodes,
            weights,
        })
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(self.nodes.iter())
            .map(|(w, y)| w * self.kernel.eval(p, y))
            .sum()
    }

    /// Partial derivative along `axis`.
    pub fn partial(&self, p: &[f64], axis: usize) -> Result<f64> {
        let mut s = 0.0;
        for (w, y) in self.weights.iter().zip(self.nodes.iter()) {
            s += w * self.kernel.eval_grad1(p, y, axis)?;
        }
        Ok(s)
    }

    pub fn values_on(&self, cloud: &PointCloud) -> Vec<f64> {
        cloud.iter().map(|p| self.eval(p)).collect()
    }

    /// Exact native-space norm: `sqrt(w^T K w)` over the combination's own
    /// nodes (clamped at zero against rounding).
    pub fn native_norm(&self) -> f64 {
        let n = self.nodes.len();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += self.weights[i]
                    * self.weights[j]
                    * self.kernel.eval(self.nodes.point(i), self.nodes.point(j));
            }
        }
        q.max(0.0).sqrt()
    }
}
