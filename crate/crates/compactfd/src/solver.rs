//! The fully discrete three-time-level compact scheme.
//!
//! With `a = σ²/2`, `b = r − σ²/2 − λζ` and the elimination identity
//! `uₓₓ = 2Δₓ²u − Δₓuₓ`, the scheme advances interior nodes through
//!
//! ```text
//! (I − δτσ²Δₓ²) U^{m+1} = δτ [ −a Δₓ + b ] Uₓ^{m+1}
//!                       + δτ [ σ²Δₓ²U^{m−1} − a ΔₓUₓ^{m−1} + b Uₓ^{m−1} ]
//!                       + U^{m−1} + 2δτ 𝕀_δU^m − 2δτ (r+λ) U^m,
//! ```
//!
//! i.e. the differential part is averaged over the outer levels, the jump
//! integral and reaction ride explicitly on the middle level. The left-hand
//! matrix is constant and tridiagonal; it is factored once. The right-hand
//! side depends on the unknown level's own compact derivative `Uₓ^{m+1}`,
//! which the correcting-to-convergence loop resolves: start from
//! `U^{m+1} = U^m`, `Uₓ^{m+1} = Uₓ^m`, then alternate solve / derivative
//! refresh until the sup-norm update drops below the inner tolerance.
//!
//! The first level is bootstrapped by one implicit–explicit Euler step
//! (differential part implicit, integral and reaction explicit), after
//! which the three-level recursion takes over.
//!
//! A plain second-order variant (central differences everywhere, same time
//! stepping, no inner iteration) is provided behind [`Scheme::SecondOrderFd`]
//! for efficiency comparisons.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crate::model::{Contract, ModelParams};
use crate::operators::{CompactDerivative, FactoredTridiagonal, GridSpec};
use crate::quadrature::JumpConvolutionOperator;
use crate::smoothing::{self, SmoothingKernel};
use crate::{Error, Result};

/// Coefficients of the semi-discrete operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeCoefficients {
    /// Diffusion coefficient `a = σ²/2`.
    pub diffusion: f64,
    /// Convection coefficient `b = r − σ²/2 − λζ`.
    pub convection: f64,
    /// Reaction coefficient `r + λ`.
    pub reaction: f64,
    /// Jump intensity `λ`.
    pub intensity: f64,
    pub dx: f64,
    pub dtau: f64,
}

impl SchemeCoefficients {
    pub fn new(params: &ModelParams, dx: f64, dtau: f64) -> Self {
        let a = 0.5 * params.sigma * params.sigma;
        Self {
            diffusion: a,
            convection: params.rate - a - params.intensity * params.zeta(),
            reaction: params.rate + params.intensity,
            intensity: params.intensity,
            dx,
            dtau,
        }
    }

    /// Von Neumann time-step bound `1/(4λ + 2r)` under which the
    /// amplification roots stay within `1 + 2(r + 2λ)δτ`.
    pub fn stable_dtau_bound(&self) -> f64 {
        let rate = self.reaction - self.intensity;
        1.0 / (4.0 * self.intensity + 2.0 * rate)
    }
}

/// Spatial discretisation variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Fourth-order compact derivatives with the inner correction loop.
    Compact,
    /// Plain second-order central differences, no inner loop.
    SecondOrderFd,
}

/// Solver options.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Mollify the payoff around its kink before stepping.
    pub smoothing: bool,
    /// Sup-norm tolerance ε of the correcting-to-convergence loop.
    pub inner_tolerance: f64,
    /// Iteration budget per time step.
    pub max_inner_iterations: usize,
    pub scheme: Scheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            smoothing: true,
            inner_tolerance: 1e-12,
            max_inner_iterations: 100,
            scheme: Scheme::Compact,
        }
    }
}

/// Output of a solve: the final-level vector and run diagnostics.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub grid: GridSpec,
    /// `U^M ≈ u(·, T)` at all `N + 1` nodes.
    pub values: Vec<f64>,
    /// Inner iterations per level advance (bootstrap first).
    pub iteration_counts: Vec<usize>,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn average_iterations(&self) -> f64 {
        if self.iteration_counts.is_empty() {
            return 0.0;
        }
        self.iteration_counts.iter().sum::<usize>() as f64 / self.iteration_counts.len() as f64
    }

    pub fn max_iterations(&self) -> usize {
        self.iteration_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Callback filling a per-interior-node vector at time τ.
pub type FillAt = dyn Fn(f64, &mut [f64]);

/// A fully specified discrete problem. `boundary` maps τ to the Dirichlet
/// pair, `tail` fills `Υ(x_n, τ)` at the `N − 1` interior nodes, and
/// `source`, when present, adds a forcing term at the middle level.
pub struct PideProblem<'a> {
    pub grid: GridSpec,
    pub coefficients: SchemeCoefficients,
    pub jump: &'a JumpConvolutionOperator,
    pub initial: Vec<f64>,
    pub boundary: &'a dyn Fn(f64) -> (f64, f64),
    pub tail: &'a FillAt,
    pub source: Option<&'a FillAt>,
}

pub(crate) struct Engine<'a> {
    problem: &'a PideProblem<'a>,
    options: SolveOptions,
    implicit: FactoredTridiagonal,
    compact: Option<CompactDerivative>,
    /// Completed level advances; state holds levels `level − 1` and `level`.
    level: usize,
    u_prev: Vec<f64>,
    u_curr: Vec<f64>,
    ux_prev: Vec<f64>,
    ux_curr: Vec<f64>,
    tail_buf: Vec<f64>,
    source_buf: Vec<f64>,
    iterations: Vec<usize>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(problem: &'a PideProblem<'a>, options: &SolveOptions) -> Result<Self> {
        let grid = &problem.grid;
        let n = grid.intervals;
        if problem.initial.len() != n + 1 {
            return Err(Error::InvalidArgument(format!(
                "initial data has {} entries, expected {}",
                problem.initial.len(),
                n + 1
            )));
        }
        if problem.jump.intervals() != n {
            return Err(Error::InvalidArgument(
                "jump operator was built for a different grid".into(),
            ));
        }
        let c = &problem.coefficients;
        let interior = n - 1;
        let implicit = match options.scheme {
            Scheme::Compact => {
                // I − δτ σ² Δₓ²
                let k = 2.0 * c.diffusion * c.dtau / (c.dx * c.dx);
                FactoredTridiagonal::new(
                    &vec![-k; interior - 1],
                    &vec![1.0 + 2.0 * k; interior],
                    &vec![-k; interior - 1],
                )?
            }
            Scheme::SecondOrderFd => {
                // I − δτ (a Δₓ² + b Δₓ)
                let kd = c.diffusion * c.dtau / (c.dx * c.dx);
                let kc = c.convection * c.dtau / (2.0 * c.dx);
                FactoredTridiagonal::new(
                    &vec![-(kd - kc); interior - 1],
                    &vec![1.0 + 2.0 * kd; interior],
                    &vec![-(kd + kc); interior - 1],
                )?
            }
        };
        let compact = match options.scheme {
            Scheme::Compact => Some(CompactDerivative::new(n + 1, c.dx)?),
            Scheme::SecondOrderFd => None,
        };
        let mut engine = Self {
            problem,
            options: *options,
            implicit,
            compact,
            level: 0,
            u_prev: vec![0.0; n + 1],
            u_curr: problem.initial.clone(),
            ux_prev: vec![0.0; n + 1],
            ux_curr: vec![0.0; n + 1],
            tail_buf: vec![0.0; interior],
            source_buf: vec![0.0; interior],
            iterations: Vec::with_capacity(grid.steps.min(1 << 20)),
        };
        if let Some(op) = &engine.compact {
            op.compute_into(&engine.u_curr, &mut engine.ux_curr);
        }
        Ok(engine)
    }

    /// Construct mid-run state for step-level tests: levels `level − 1` and
    /// `level` are supplied directly.
    #[cfg(test)]
    pub(crate) fn with_levels(
        problem: &'a PideProblem<'a>,
        options: &SolveOptions,
        level: usize,
        u_prev: Vec<f64>,
        u_curr: Vec<f64>,
    ) -> Result<Self> {
        let mut engine = Self::new(problem, options)?;
        engine.level = level;
        engine.u_prev = u_prev;
        engine.u_curr = u_curr;
        if let Some(op) = &engine.compact {
            op.compute_into(&engine.u_prev, &mut engine.ux_prev);
            op.compute_into(&engine.u_curr, &mut engine.ux_curr);
        }
        Ok(engine)
    }

    fn explicit_middle_terms(&mut self, tau: f64) -> Result<Vec<f64>> {
        (self.problem.tail)(tau, &mut self.tail_buf);
        let mut mid = self.problem.jump.apply(&self.u_curr, &self.tail_buf)?;
        let reaction = self.problem.coefficients.reaction;
        for (i, v) in mid.iter_mut().enumerate() {
            *v -= reaction * self.u_curr[i + 1];
        }
        if let Some(source) = self.problem.source {
            source(tau, &mut self.source_buf);
            for (v, s) in mid.iter_mut().zip(self.source_buf.iter()) {
                *v += s;
            }
        }
        Ok(mid)
    }

    /// One implicit–explicit Euler step from the initial data to level 1.
    pub(crate) fn bootstrap(&mut self) -> Result<()> {
        assert_eq!(self.level, 0, "bootstrap applies to the initial level");
        let c = self.problem.coefficients;
        let dtau = c.dtau;
        let explicit = self.explicit_middle_terms(0.0)?;
        let fixed: Vec<f64> = (0..explicit.len())
            .map(|i| self.u_curr[i + 1] + dtau * explicit[i])
            .collect();
        let u0 = self.u_curr.clone();
        let ux0 = self.ux_curr.clone();
        self.advance_implicit(&fixed, dtau, &u0, &ux0)?;
        Ok(())
    }

    /// One three-level step from `(U^{m−1}, U^m)` to `U^{m+1}`.
    pub(crate) fn step_once(&mut self) -> Result<()> {
        assert!(self.level >= 1, "bootstrap the first level before stepping");
        let c = self.problem.coefficients;
        let n = self.problem.grid.intervals;
        let dtau = c.dtau;
        let dx = c.dx;
        let tau_mid = self.problem.grid.time(self.level);

        let explicit = self.explicit_middle_terms(tau_mid)?;
        let mut fixed = vec![0.0; n - 1];
        match self.options.scheme {
            Scheme::Compact => {
                let a = c.diffusion;
                let b = c.convection;
                for i in 1..n {
                    let d2 = (self.u_prev[i + 1] - 2.0 * self.u_prev[i] + self.u_prev[i - 1])
                        / (dx * dx);
                    let d1x = (self.ux_prev[i + 1] - self.ux_prev[i - 1]) / (2.0 * dx);
                    fixed[i - 1] = self.u_prev[i]
                        + dtau * (2.0 * a * d2 - a * d1x + b * self.ux_prev[i])
                        + 2.0 * dtau * explicit[i - 1];
                }
            }
            Scheme::SecondOrderFd => {
                let a = c.diffusion;
                let b = c.convection;
                for i in 1..n {
                    let d2 = (self.u_prev[i + 1] - 2.0 * self.u_prev[i] + self.u_prev[i - 1])
                        / (dx * dx);
                    let d1 = (self.u_prev[i + 1] - self.u_prev[i - 1]) / (2.0 * dx);
                    fixed[i - 1] =
                        self.u_prev[i] + dtau * (a * d2 + b * d1) + 2.0 * dtau * explicit[i - 1];
                }
            }
        }
        let guess = self.u_curr.clone();
        let guess_ux = self.ux_curr.clone();
        self.advance_implicit(&fixed, dtau, &guess, &guess_ux)?;
        Ok(())
    }

    /// Solve the implicit system for the next level, iterating on its own
    /// compact derivative, then rotate the state.
    ///
    /// `fixed` holds every right-hand-side term that does not involve the
    /// unknown level; `deriv_weight` is the δτ factor multiplying the
    /// implicit derivative terms (δτ both for the bootstrap and, after the
    /// 2δτ normalisation, for the three-level step).
    fn advance_implicit(
        &mut self,
        fixed: &[f64],
        deriv_weight: f64,
        guess: &[f64],
        guess_ux: &[f64],
    ) -> Result<()> {
        let c = self.problem.coefficients;
        let n = self.problem.grid.intervals;
        let dx = c.dx;
        let tau_next = self.problem.grid.time(self.level + 1);
        let (left, right) = (self.problem.boundary)(tau_next);

        let mut u_next = guess.to_vec();
        u_next[0] = left;
        u_next[n] = right;
        let mut rhs = vec![0.0; n - 1];

        let count = match self.options.scheme {
            Scheme::Compact => {
                let a = c.diffusion;
                let b = c.convection;
                let k = 2.0 * a * deriv_weight / (dx * dx);
                let compact = self.compact.as_ref().expect("compact operator present");
                let mut ux_next = guess_ux.to_vec();
                let mut old_interior: Vec<f64> = guess[1..n].to_vec();
                let mut count = 0;
                loop {
                    count += 1;
                    for i in 1..n {
                        let d1x = (ux_next[i + 1] - ux_next[i - 1]) / (2.0 * dx);
                        rhs[i - 1] =
                            fixed[i - 1] + deriv_weight * (-a * d1x + b * ux_next[i]);
                    }
                    rhs[0] += k * left;
                    rhs[n - 2] += k * right;
                    self.implicit.solve_in_place(&mut rhs);
                    let mut change = 0.0_f64;
                    for i in 0..n - 1 {
                        change = change.max((rhs[i] - old_interior[i]).abs());
                        old_interior[i] = rhs[i];
                        u_next[i + 1] = rhs[i];
                    }
                    compact.compute_into(&u_next, &mut ux_next);
                    if change < self.options.inner_tolerance {
                        break;
                    }
                    if count >= self.options.max_inner_iterations {
                        return Err(Error::NonConvergence {
                            step: self.level + 1,
                            iterations: count,
                            residual: change,
                        });
                    }
                }
                std::mem::swap(&mut self.ux_prev, &mut self.ux_curr);
                self.ux_curr.copy_from_slice(&ux_next);
                count
            }
            Scheme::SecondOrderFd => {
                let kd = c.diffusion * deriv_weight / (dx * dx);
                let kc = c.convection * deriv_weight / (2.0 * dx);
                rhs.copy_from_slice(fixed);
                rhs[0] += (kd - kc) * left;
                rhs[n - 2] += (kd + kc) * right;
                self.implicit.solve_in_place(&mut rhs);
                u_next[1..n].copy_from_slice(&rhs);
                1
            }
        };

        for (node, &v) in u_next.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Divergence {
                    step: self.level + 1,
                    node,
                });
            }
        }
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        self.u_curr.copy_from_slice(&u_next);
        self.level += 1;
        self.iterations.push(count);
        Ok(())
    }

    fn into_result(self, wall_time: Duration) -> SolveResult {
        SolveResult {
            grid: self.problem.grid,
            values: self.u_curr,
            iteration_counts: self.iterations,
            wall_time,
        }
    }

    #[cfg(test)]
    pub(crate) fn current(&self) -> &[f64] {
        &self.u_curr
    }
}

/// Run the scheme over all `M` levels of a fully specified problem.
pub fn run_scheme(problem: &PideProblem, options: &SolveOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let c = &problem.coefficients;
    let bound = c.stable_dtau_bound();
    if c.dtau > bound {
        log::warn!(
            "time step {:.3e} exceeds the von Neumann bound 1/(4λ+2r) = {:.3e}",
            c.dtau,
            bound
        );
    }
    let mut engine = Engine::new(problem, options)?;
    engine.bootstrap()?;
    for _ in 1..problem.grid.steps {
        engine.step_once()?;
    }
    Ok(engine.into_result(start.elapsed()))
}

/// Bootstrap alone: the IMEX Euler value `U¹` and its compact derivative.
pub fn bootstrap_first_level(
    problem: &PideProblem,
    options: &SolveOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut engine = Engine::new(problem, options)?;
    engine.bootstrap()?;
    let u1 = engine.u_curr.clone();
    let ux1 = engine.ux_curr.clone();
    Ok((u1, ux1))
}

static DEFAULT_KERNEL: OnceLock<SmoothingKernel> = OnceLock::new();

/// Shared payoff mollifier (built once; resolution 1024).
pub fn default_smoothing_kernel() -> &'static SmoothingKernel {
    DEFAULT_KERNEL.get_or_init(|| {
        SmoothingKernel::build(1024).expect("default kernel resolution is admissible")
    })
}

/// Price a European option: assembles the discrete problem (payoff,
/// optional mollification, Dirichlet asymptotics, tail corrections, jump
/// operator) and runs the scheme to maturity.
pub fn solve(
    params: &ModelParams,
    contract: &Contract,
    grid: &GridSpec,
    options: &SolveOptions,
) -> Result<SolveResult> {
    if (grid.maturity() - contract.maturity).abs() > 1e-9 * contract.maturity {
        return Err(Error::InvalidArgument(format!(
            "grid maturity {} disagrees with contract maturity {}",
            grid.maturity(),
            contract.maturity
        )));
    }
    let n = grid.intervals;
    let mut initial: Vec<f64> = grid.nodes().iter().map(|&x| contract.payoff(x)).collect();
    if options.smoothing {
        let kink = contract.kink();
        let window = smoothing::SUPPORT * grid.dx;
        let nodes: Vec<usize> = (0..=n)
            .filter(|&i| {
                let x = grid.node(i);
                (x - kink).abs() <= window + 1e-12
                    && x - window > -grid.half_width
                    && x + window < grid.half_width
            })
            .collect();
        if !nodes.is_empty() {
            let payoff = |x: f64| contract.payoff(x);
            let replaced = smoothing::smooth_initial_condition(
                default_smoothing_kernel(),
                &payoff,
                Some(kink),
                grid,
                &nodes,
            )?;
            for (&node, &value) in nodes.iter().zip(replaced.iter()) {
                initial[node] = value;
            }
        }
    }
    let (b0_left, b0_right) = (
        contract.boundary_value(params, -grid.half_width, 0.0),
        contract.boundary_value(params, grid.half_width, 0.0),
    );
    initial[0] = b0_left;
    initial[n] = b0_right;

    let jump = JumpConvolutionOperator::new(grid, params)?;
    let coefficients = SchemeCoefficients::new(params, grid.dx, grid.dtau);

    // Υ(x, τ, L) = e^{−rτ}·strike_part + spot_part per interior node
    let mut strike_parts = Vec::with_capacity(n - 1);
    let mut spot_parts = Vec::with_capacity(n - 1);
    for i in 1..n {
        let (ks, ss) =
            crate::model::tail_correction_parts(contract, params, grid.node(i), grid.half_width);
        strike_parts.push(ks);
        spot_parts.push(ss);
    }
    let rate = params.rate;
    let tail = move |tau: f64, out: &mut [f64]| {
        let discount = (-rate * tau).exp();
        for ((o, &ks), &ss) in out.iter_mut().zip(&strike_parts).zip(&spot_parts) {
            *o = discount * ks + ss;
        }
    };
    let params_c = *params;
    let contract_c = *contract;
    let half_width = grid.half_width;
    let boundary = move |tau: f64| {
        (
            contract_c.boundary_value(&params_c, -half_width, tau),
            contract_c.boundary_value(&params_c, half_width, tau),
        )
    };
    let problem = PideProblem {
        grid: *grid,
        coefficients,
        jump: &jump,
        initial,
        boundary: &boundary,
        tail: &tail,
        source: None,
    };
    run_scheme(&problem, options)
}

/// Price at an off-grid spot by degree-5 Lagrange interpolation over the
/// six nearest nodes. `ln(S/S₀)` must stay 3δx clear of the boundaries.
pub fn price_at(result: &SolveResult, contract: &Contract, spot: f64) -> Result<f64> {
    if !spot.is_finite() || spot <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "spot must be positive, got {spot}"
        )));
    }
    let grid = &result.grid;
    let x = (spot / contract.spot).ln();
    let l = grid.half_width;
    if x <= -l + 3.0 * grid.dx || x >= l - 3.0 * grid.dx {
        return Err(Error::InvalidArgument(format!(
            "spot {spot} maps to x = {x:.4}, outside the safe interpolation range"
        )));
    }
    let pos = (x + l) / grid.dx;
    let nearest = pos.round() as usize;
    if (x - grid.node(nearest)).abs() < 1e-13 {
        return Ok(result.values[nearest]);
    }
    let base = (pos.floor() as usize)
        .saturating_sub(2)
        .min(grid.intervals - 5);
    let mut value = 0.0;
    for i in base..base + 6 {
        let mut weight = 1.0;
        for j in base..base + 6 {
            if j != i {
                weight *= (x - grid.node(j)) / (grid.node(i) - grid.node(j));
            }
        }
        value += weight * result.values[i];
    }
    Ok(value)
}
