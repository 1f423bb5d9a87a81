//! Spatial grid and discrete derivative operators.
//!
//! The grid covers the truncated log-moneyness interval `[−L, L]` with `N`
//! uniform intervals, `x_n = −L + n δx`. On it the module provides
//!
//! * second-order central differences `Δₓ` and `Δₓ²`,
//! * the fourth-order compact first derivative: interior rows solve
//!   `¼uₓ_{i−1} + uₓ_i + ¼uₓ_{i+1} = (3/4δx)(u_{i+1} − u_{i−1})`, with
//!   explicit fourth-order one-sided five-point formulas closing the two
//!   boundary rows so the system stays tridiagonal,
//! * the elimination identity `uₓₓ = 2Δₓ²u − Δₓuₓ`, which expresses the
//!   fourth-order second derivative through values and first derivatives,
//! * a Thomas solver for tridiagonal systems, plus a reusable factorisation
//!   for the constant matrices that appear once per grid and are applied
//!   every time step.

use crate::{Error, Result};

/// Uniform space–time grid specification.
///
/// `x_n = −L + n δx` for `n = 0..N` with `δx = 2L/N`, and `τ_m = m δτ` for
/// `m = 0..M` with `δτ = T/M`. `N` must be even (composite Simpson needs an
/// even interval count) and at least 8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Domain half-width L in log-moneyness units.
    pub half_width: f64,
    /// Number of space intervals N (even).
    pub intervals: usize,
    /// Number of time steps M.
    pub steps: usize,
    /// Space step δx = 2L/N.
    pub dx: f64,
    /// Time step δτ = T/M.
    pub dtau: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, intervals: usize, steps: usize, maturity: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if intervals < 8 || intervals % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "need an even number of intervals ≥ 8, got {intervals}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 time steps, got {steps}"
            )));
        }
        if !maturity.is_finite() || maturity <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "maturity must be positive, got {maturity}"
            )));
        }
        let dx = 2.0 * half_width / intervals as f64;
        let dtau = maturity / steps as f64;
        Ok(Self {
            half_width,
            intervals,
            steps,
            dx,
            dtau,
        })
    }

    /// Build a grid from a target parabolic mesh ratio `ρ = δτ/δx²`:
    /// `M` is the nearest integer to `T/(ρ δx²)`, at least 2.
    pub fn with_mesh_ratio(
        half_width: f64,
        intervals: usize,
        maturity: f64,
        mesh_ratio: f64,
    ) -> Result<Self> {
        if !mesh_ratio.is_finite() || mesh_ratio <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "mesh ratio must be positive, got {mesh_ratio}"
            )));
        }
        if intervals == 0 {
            return Err(Error::InvalidGrid("need a positive interval count".into()));
        }
        let dx = 2.0 * half_width / intervals as f64;
        let steps = (maturity / (mesh_ratio * dx * dx)).round().max(2.0) as usize;
        Self::new(half_width, intervals, steps, maturity)
    }

    /// Node coordinate `x_n = −L + n δx`.
    pub fn node(&self, n: usize) -> f64 {
        -self.half_width + n as f64 * self.dx
    }

    /// All `N + 1` node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|n| self.node(n)).collect()
    }

    /// Time level `τ_m = m δτ`.
    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dtau
    }

    /// Realised parabolic mesh ratio `δτ/δx²`.
    pub fn mesh_ratio(&self) -> f64 {
        self.dtau / (self.dx * self.dx)
    }

    /// Maturity `T = M δτ`.
    pub fn maturity(&self) -> f64 {
        self.steps as f64 * self.dtau
    }
}

/// A tridiagonal linear system `A x = rhs`, with `sub`/`sup` one entry
/// shorter than `main`. Single-use: solving consumes it.
#[derive(Clone, Debug)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub main: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, main: Vec<f64>, sup: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = main.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty tridiagonal system".into()));
        }
        if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "inconsistent tridiagonal dimensions: main {n}, sub {}, sup {}, rhs {}",
                sub.len(),
                sup.len(),
                rhs.len()
            )));
        }
        Ok(Self {
            sub,
            main,
            sup,
            rhs,
        })
    }

    /// Strict row diagonal dominance, |b_i| > |a_i| + |c_i|.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.main.len();
        (0..n).all(|i| {
            let left = if i > 0 { self.sub[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.sup[i].abs() } else { 0.0 };
            self.main[i].abs() > left + right
        })
    }
}

/// Thomas algorithm: O(N) forward elimination and back substitution.
/// Fails on a vanishing pivot, which for the systems assembled here would
/// signal a construction bug (they are strictly diagonally dominant).
pub fn thomas_solve(system: TridiagonalSystem) -> Result<Vec<f64>> {
    let TridiagonalSystem {
        sub,
        main,
        sup,
        mut rhs,
    } = system;
    let n = main.len();
    let mut diag = main;
    for i in 1..n {
        if diag[i - 1] == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zero pivot at row {}: tridiagonal system is not diagonally dominant",
                i - 1
            )));
        }
        let factor = sub[i - 1] / diag[i - 1];
        diag[i] -= factor * sup[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    if diag[n - 1] == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "zero pivot at row {}: tridiagonal system is not diagonally dominant",
            n - 1
        )));
    }
    let mut x = rhs;
    x[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (x[i] - sup[i] * x[i + 1]) / diag[i];
    }
    Ok(x)
}

/// LU-style factorisation of a constant tridiagonal matrix, reused across
/// all time steps and inner iterations.
#[derive(Clone, Debug)]
pub struct FactoredTridiagonal {
    sub: Vec<f64>,
    inv_diag: Vec<f64>,
    sup: Vec<f64>,
}

impl FactoredTridiagonal {
    pub fn new(sub: &[f64], main: &[f64], sup: &[f64]) -> Result<Self> {
        let n = main.len();
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::InvalidArgument(
                "inconsistent tridiagonal dimensions".into(),
            ));
        }
        let mut inv_diag = vec![0.0; n];
        let mut diag = main[0];
        for i in 0..n {
            if i > 0 {
                diag = main[i] - sub[i - 1] * inv_diag[i - 1] * sup[i - 1];
            }
            if diag == 0.0 {
                return Err(Error::InvalidArgument(format!("zero pivot at row {i}")));
            }
            inv_diag[i] = 1.0 / diag;
        }
        Ok(Self {
            sub: sub.to_vec(),
            inv_diag,
            sup: sup.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.inv_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_diag.is_empty()
    }

    /// Solve in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.inv_diag.len();
        assert_eq!(x.len(), n, "rhs length mismatch");
        for i in 1..n {
            x[i] -= self.sub[i - 1] * self.inv_diag[i - 1] * x[i - 1];
        }
        x[n - 1] *= self.inv_diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) * self.inv_diag[i];
        }
    }
}

/// Second-order central first difference. Interior nodes get
/// `(u_{i+1} − u_{i−1})/(2δx)`; the endpoints use one-sided second-order
/// formulas (diagnostics only, the scheme never reads them).
pub fn central_first(values: &[f64], dx: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 values, got {n}"
        )));
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    Ok(out)
}

/// Second-order central second difference, `(u_{i+1} − 2u_i + u_{i−1})/δx²`
/// at interior nodes; one-sided variants at the endpoints.
pub fn central_second(values: &[f64], dx: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 values, got {n}"
        )));
    }
    let dx2 = dx * dx;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / dx2;
    }
    if n >= 4 {
        out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / dx2;
        out[n - 1] =
            (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / dx2;
    } else {
        out[0] = out[1];
        out[n - 1] = out[1];
    }
    Ok(out)
}

/// Reusable fourth-order compact first-derivative operator for a fixed grid
/// size: the interior (¼, 1, ¼) rows are factored once.
#[derive(Clone, Debug)]
pub struct CompactDerivative {
    len: usize,
    dx: f64,
    factor: FactoredTridiagonal,
}

impl CompactDerivative {
    pub fn new(len: usize, dx: f64) -> Result<Self> {
        if len < 5 {
            return Err(Error::InvalidArgument(format!(
                "compact derivative needs at least 5 nodes, got {len}"
            )));
        }
        if !dx.is_finite() || dx <= 0.0 {
            return Err(Error::InvalidArgument(format!("δx must be positive, got {dx}")));
        }
        let interior = len - 2;
        let factor = FactoredTridiagonal::new(
            &vec![0.25; interior - 1],
            &vec![1.0; interior],
            &vec![0.25; interior - 1],
        )?;
        Ok(Self { len, dx, factor })
    }

    /// Derivative at every node, written into `out`.
    ///
    /// Boundary nodes use the explicit fourth-order five-point one-sided
    /// formula `uₓ₀ = (−25u₀ + 48u₁ − 36u₂ + 16u₃ − 3u₄)/(12δx)` (mirrored
    /// at the far end), which decouples them from the tridiagonal solve.
    pub fn compute_into(&self, values: &[f64], out: &mut [f64]) {
        let n = self.len;
        assert_eq!(values.len(), n, "value length mismatch");
        assert_eq!(out.len(), n, "output length mismatch");
        let dx = self.dx;
        out[0] = (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3]
            - 3.0 * values[4])
            / (12.0 * dx);
        out[n - 1] = (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3]
            - 16.0 * values[n - 4]
            + 3.0 * values[n - 5])
            / (12.0 * dx);
        let scale = 3.0 / (4.0 * dx);
        for i in 1..n - 1 {
            out[i] = scale * (values[i + 1] - values[i - 1]);
        }
        out[1] -= 0.25 * out[0];
        out[n - 2] -= 0.25 * out[n - 1];
        self.factor.solve_in_place(&mut out[1..n - 1]);
    }
}

/// Fourth-order compact first derivative at all nodes (one-shot).
pub fn compact_first_derivative(values: &[f64], dx: f64) -> Result<Vec<f64>> {
    let op = CompactDerivative::new(values.len(), dx)?;
    let mut out = vec![0.0; values.len()];
    op.compute_into(values, &mut out);
    Ok(out)
}

/// Second-derivative elimination identity `uₓₓ = 2Δₓ²u − Δₓuₓ`, applied with
/// a supplied first-derivative vector.
pub fn second_derivative_elim(values: &[f64], first_derivs: &[f64], dx: f64) -> Result<Vec<f64>> {
    if values.len() != first_derivs.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} values vs {} derivatives",
            values.len(),
            first_derivs.len()
        )));
    }
    let d2 = central_second(values, dx)?;
    let d1 = central_first(first_derivs, dx)?;
    Ok(d2
        .iter()
        .zip(d1.iter())
        .map(|(&s, &f)| 2.0 * s - f)
        .collect())
}
