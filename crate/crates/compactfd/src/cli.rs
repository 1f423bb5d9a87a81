//! Experiment drivers behind the command-line interface: a JSON
//! configuration maps onto the model/contract/grid/solver types, and each
//! command writes one CSV (UTF-8, comma-separated, LF, header row naming
//! units; floats carry 12 significant digits).

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis;
use crate::model::{merton_series_price, Contract, JumpDensity, ModelParams, OptionSide};
use crate::operators::GridSpec;
use crate::quadrature::JumpConvolutionOperator;
use crate::solver::{self, Scheme, SchemeCoefficients, SolveOptions};
use crate::{Error, Result};

/// Jump-density block of the configuration. For the Kou model `p` is the
/// probability of an upward jump.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Merton { mu_j: f64, sigma_j: f64 },
    Kou { lambda_plus: f64, lambda_minus: f64, p: f64 },
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SideConfig {
    Call,
    Put,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SchemeConfig {
    Compact,
    Fd2,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ContractConfig {
    pub side: SideConfig,
    pub strike: f64,
    pub spot: f64,
    pub maturity: f64,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self {
            side: SideConfig::Put,
            strike: 100.0,
            spot: 100.0,
            maturity: 0.25,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub intervals: usize,
    pub mesh_ratio: f64,
    /// Explicit time-step count; overrides the mesh ratio when set.
    pub time_steps: Option<usize>,
    /// Doubling sequence used by the convergence command.
    pub intervals_sequence: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 2.0,
            intervals: 1536,
            mesh_ratio: 0.4,
            time_steps: None,
            intervals_sequence: vec![128, 256, 512, 1024],
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsConfig {
    pub smoothing: bool,
    pub inner_tolerance: f64,
    pub max_inner_iterations: usize,
    pub scheme: SchemeConfig,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        Self {
            smoothing: true,
            inner_tolerance: 1e-12,
            max_inner_iterations: 100,
            scheme: SchemeConfig::Compact,
        }
    }
}

/// Full experiment configuration. The defaults reproduce the benchmark
/// parameter set used throughout (σ = 0.15, r = 0.05, λ = 0.1, T = 0.25,
/// K = S₀ = 100, ρ = 0.4, L = 2, ε = 1e−12).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub sigma: f64,
    pub rate: f64,
    pub intensity: f64,
    pub contract: ContractConfig,
    pub grid: GridConfig,
    pub options: OptionsConfig,
    /// Spot prices the price command reports on.
    pub spots: Vec<f64>,
    pub output_dir: PathBuf,
    /// Time step for the stability sweep; defaults to the von Neumann
    /// threshold `1/(4λ + 2r)`.
    pub stability_dtau: Option<f64>,
    /// Accuracy targets for the efficiency command.
    pub efficiency_targets: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::merton_default()
    }
}

impl RunConfig {
    /// Benchmark Merton configuration (μ_J = −0.9, σ_J = 0.45).
    pub fn merton_default() -> Self {
        Self {
            model: ModelConfig::Merton {
                mu_j: -0.90,
                sigma_j: 0.45,
            },
            sigma: 0.15,
            rate: 0.05,
            intensity: 0.10,
            contract: ContractConfig::default(),
            grid: GridConfig::default(),
            options: OptionsConfig::default(),
            spots: vec![90.0, 100.0, 110.0],
            output_dir: PathBuf::from("out"),
            stability_dtau: None,
            efficiency_targets: vec![1e-3],
        }
    }

    /// Benchmark Kou configuration (λ⁺ = 3.0465, λ⁻ = 3.0775, p = 0.3445).
    pub fn kou_default() -> Self {
        Self {
            model: ModelConfig::Kou {
                lambda_plus: 3.0465,
                lambda_minus: 3.0775,
                p: 0.3445,
            },
            ..Self::merton_default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let density = match self.model {
            ModelConfig::Merton { mu_j, sigma_j } => JumpDensity::Merton { mu_j, sigma_j },
            ModelConfig::Kou {
                lambda_plus,
                lambda_minus,
                p,
            } => JumpDensity::Kou {
                lambda_plus,
                lambda_minus,
                p_up: p,
            },
        };
        ModelParams::new(self.sigma, self.rate, self.intensity, density)
    }

    pub fn contract(&self) -> Result<Contract> {
        let side = match self.contract.side {
            SideConfig::Call => OptionSide::Call,
            SideConfig::Put => OptionSide::Put,
        };
        Contract::new(
            side,
            self.contract.strike,
            self.contract.spot,
            self.contract.maturity,
        )
    }

    pub fn grid(&self) -> Result<GridSpec> {
        match self.grid.time_steps {
            Some(steps) => GridSpec::new(
                self.grid.half_width,
                self.grid.intervals,
                steps,
                self.contract.maturity,
            ),
            None => GridSpec::with_mesh_ratio(
                self.grid.half_width,
                self.grid.intervals,
                self.contract.maturity,
                self.grid.mesh_ratio,
            ),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            smoothing: self.options.smoothing,
            inner_tolerance: self.options.inner_tolerance,
            max_inner_iterations: self.options.max_inner_iterations,
            scheme: match self.options.scheme {
                SchemeConfig::Compact => Scheme::Compact,
                SchemeConfig::Fd2 => Scheme::SecondOrderFd,
            },
        }
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let _ = writeln!(text, "{}", row.join(","));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reference prices for the Kou benchmark parameter set, literature values
/// quoted to six decimals.
const KOU_REFERENCE_PUT: [(f64, f64); 3] =
    [(90.0, 9.430457), (100.0, 2.731259), (110.0, 0.552363)];
const KOU_REFERENCE_CALL: [(f64, f64); 3] =
    [(90.0, 0.672677), (100.0, 3.973479), (110.0, 11.794583)];

fn kou_is_benchmark(cfg: &RunConfig) -> bool {
    cfg.model
        == ModelConfig::Kou {
            lambda_plus: 3.0465,
            lambda_minus: 3.0775,
            p: 0.3445,
        }
        && cfg.sigma == 0.15
        && cfg.rate == 0.05
        && cfg.intensity == 0.10
        && cfg.contract.strike == 100.0
        && cfg.contract.spot == 100.0
        && cfg.contract.maturity == 0.25
}

fn reference_price(cfg: &RunConfig, params: &ModelParams, contract: &Contract, spot: f64) -> Result<Option<f64>> {
    match cfg.model {
        ModelConfig::Merton { .. } => {
            Ok(Some(merton_series_price(contract, params, spot, 200)?))
        }
        ModelConfig::Kou { .. } => {
            if !kou_is_benchmark(cfg) {
                return Ok(None);
            }
            let table = match contract.side {
                OptionSide::Put => &KOU_REFERENCE_PUT,
                OptionSide::Call => &KOU_REFERENCE_CALL,
            };
            Ok(table
                .iter()
                .find(|(s, _)| (s - spot).abs() < 1e-9)
                .map(|&(_, v)| v))
        }
    }
}

/// Price the configured contract and write `prices.csv`
/// (spot, price, reference when available, absolute difference).
pub fn cmd_price(cfg: &RunConfig) -> Result<PathBuf> {
    let path = cfg.output_dir.join("prices.csv");
    let header = "spot[currency],price[currency],reference[currency],abs_diff[currency]";
    if cfg.spots.is_empty() {
        write_csv(&path, header, &[])?;
        return Ok(path);
    }
    let params = cfg.model_params()?;
    let contract = cfg.contract()?;
    let grid = cfg.grid()?;
    let result = solver::solve(&params, &contract, &grid, &cfg.solve_options())?;
    let mut rows = Vec::new();
    for &spot in &cfg.spots {
        let price = solver::price_at(&result, &contract, spot)?;
        let reference = reference_price(cfg, &params, &contract, spot)?;
        let (ref_cell, diff_cell) = match reference {
            Some(r) => (fmt_float(r), fmt_float((price - r).abs())),
            None => (String::new(), String::new()),
        };
        rows.push(vec![fmt_float(spot), fmt_float(price), ref_cell, diff_cell]);
    }
    write_csv(&path, header, &rows)?;
    Ok(path)
}

/// Run the doubling-grid convergence study and write `convergence.csv`.
pub fn cmd_converge(cfg: &RunConfig) -> Result<PathBuf> {
    let params = cfg.model_params()?;
    let contract = cfg.contract()?;
    let report = analysis::estimate_order(
        &params,
        &contract,
        &cfg.grid.intervals_sequence,
        cfg.grid.half_width,
        cfg.grid.mesh_ratio,
        &cfg.solve_options(),
    )?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.intervals.to_string(),
                fmt_float(r.dx),
                fmt_float(r.dtau),
                r.l2_diff.map(fmt_float).unwrap_or_default(),
                r.order.map(fmt_float).unwrap_or_default(),
            ]
        })
        .collect();
    let path = cfg.output_dir.join("convergence.csv");
    write_csv(
        &path,
        "intervals[count],dx[log_moneyness],dtau[years],l2_diff[currency],order[log2_ratio]",
        &rows,
    )?;
    Ok(path)
}

/// Sweep the amplification roots over 1024 phases at the configured (or
/// threshold) δτ and write `stability.csv`; the footer row records the
/// worst excess over the von Neumann bound.
pub fn cmd_stability(cfg: &RunConfig) -> Result<PathBuf> {
    let params = cfg.model_params()?;
    let grid = GridSpec::new(
        cfg.grid.half_width,
        cfg.grid.intervals,
        2,
        cfg.contract.maturity,
    )?;
    let jump = JumpConvolutionOperator::new(&grid, &params)?;
    let dtau = cfg
        .stability_dtau
        .unwrap_or(1.0 / (4.0 * params.intensity + 2.0 * params.rate));
    let coefficients = SchemeCoefficients::new(&params, grid.dx, dtau);
    let sweep = 1024;
    let mut rows = Vec::with_capacity(sweep + 1);
    let mut max_excess = f64::NEG_INFINITY;
    for j in 1..=sweep {
        let theta = j as f64 * std::f64::consts::PI / sweep as f64;
        let sample = analysis::amplification_roots(&coefficients, jump.quadrature_symbol(theta), theta);
        max_excess = max_excess.max(sample.max_root_modulus() - sample.bound);
        rows.push(vec![
            fmt_float(theta),
            fmt_float(sample.roots[0].norm()),
            fmt_float(sample.roots[1].norm()),
            fmt_float(sample.bound),
        ]);
    }
    rows.push(vec![
        "max_excess".into(),
        fmt_float(max_excess),
        String::new(),
        String::new(),
    ]);
    let path = cfg.output_dir.join("stability.csv");
    write_csv(
        &path,
        "theta[radians],root1_modulus[1],root2_modulus[1],bound[1]",
        &rows,
    )?;
    Ok(path)
}

/// Write the modified-wavenumber resolution curves to `wavenumber.csv`.
pub fn cmd_wavenumber(cfg: &RunConfig) -> Result<PathBuf> {
    let sweep = 512;
    let thetas: Vec<f64> = (1..=sweep)
        .map(|j| j as f64 * std::f64::consts::PI / sweep as f64)
        .collect();
    let curve = analysis::wavenumber_curves(&thetas);
    let rows: Vec<Vec<String>> = (0..curve.theta.len())
        .map(|i| {
            vec![
                fmt_float(curve.theta[i]),
                fmt_float(curve.exact_first[i]),
                fmt_float(curve.fd_first[i]),
                fmt_float(curve.compact_first[i]),
                fmt_float(curve.exact_second[i]),
                fmt_float(curve.fd_second[i]),
                fmt_float(curve.compact_second[i]),
            ]
        })
        .collect();
    let path = cfg.output_dir.join("wavenumber.csv");
    write_csv(
        &path,
        "theta[radians],exact_first[per_dx],central_first[per_dx],compact_first[per_dx],\
         exact_second[per_dx2],central_second[per_dx2],compact_second[per_dx2]",
        &rows,
    )?;
    Ok(path)
}

/// Time compact vs second-order central schemes to the configured accuracy
/// targets and write `efficiency.csv` (wall-clock column is
/// machine-dependent by nature).
pub fn cmd_efficiency(cfg: &RunConfig) -> Result<PathBuf> {
    let params = cfg.model_params()?;
    let contract = cfg.contract()?;
    let rows_data = analysis::efficiency_comparison(
        &params,
        &contract,
        &cfg.efficiency_targets,
        cfg.grid.half_width,
        cfg.grid.mesh_ratio,
    )?;
    let rows: Vec<Vec<String>> = rows_data
        .iter()
        .map(|r| {
            vec![
                match r.scheme {
                    Scheme::Compact => "compact".to_string(),
                    Scheme::SecondOrderFd => "fd2".to_string(),
                },
                fmt_float(r.target),
                r.intervals.to_string(),
                fmt_float(r.error),
                fmt_float(r.seconds),
            ]
        })
        .collect();
    let path = cfg.output_dir.join("efficiency.csv");
    write_csv(
        &path,
        "scheme[name],target[currency_l2],intervals[count],error[currency_l2],cpu[seconds]",
        &rows,
    )?;
    Ok(path)
}
