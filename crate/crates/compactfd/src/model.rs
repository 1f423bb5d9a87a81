//! Jump-diffusion model definitions.
//!
//! Two log-jump-size densities are supported:
//!
//! * Merton — Gaussian jumps,
//!   `g(x) = exp(−(x − μ_J)² / 2σ_J²) / (σ_J √(2π))`;
//! * Kou — double-exponential jumps,
//!   `g(x) = p λ⁺ e^{−λ⁺x}` for `x ≥ 0` and `(1 − p) λ⁻ e^{λ⁻x}` for
//!   `x < 0`, with `p` the probability of an upward jump.
//!
//! Besides the densities this module carries the expected relative jump
//! `ζ = ∫ (eˣ − 1) g(x) dx` in closed form, payoffs and far-field
//! asymptotics in log-moneyness coordinates, the closed-form corrections
//! `Υ(x, τ, L)` for the part of the jump convolution that falls outside the
//! truncated domain `(−L, L)`, and the Merton series price used as the
//! analytic reference.

use crate::{Error, Result};

/// Call or put.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptionSide {
    Call,
    Put,
}

/// Log-jump-size density of the compound Poisson component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JumpDensity {
    /// Gaussian jump sizes with mean `mu_j` and standard deviation `sigma_j`.
    Merton { mu_j: f64, sigma_j: f64 },
    /// Double-exponential jump sizes. `p_up` is the probability of an upward
    /// jump; `lambda_plus` and `lambda_minus` are the decay rates of the up
    /// and down tails. `lambda_plus > 1` is required so that ζ is finite.
    Kou {
        lambda_plus: f64,
        lambda_minus: f64,
        p_up: f64,
    },
}

impl JumpDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpDensity::Merton { sigma_j, .. } => {
                if !sigma_j.is_finite() || sigma_j <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "Merton jump standard deviation must be positive, got {sigma_j}"
                    )));
                }
            }
            JumpDensity::Kou {
                lambda_plus,
                lambda_minus,
                p_up,
            } => {
                if !lambda_plus.is_finite() || lambda_plus <= 1.0 {
                    return Err(Error::InvalidModel(format!(
                        "Kou lambda_plus must exceed 1 (ζ diverges otherwise), got {lambda_plus}"
                    )));
                }
                if !lambda_minus.is_finite() || lambda_minus <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "Kou lambda_minus must be positive, got {lambda_minus}"
                    )));
                }
                if !(0.0..=1.0).contains(&p_up) {
                    return Err(Error::InvalidModel(format!(
                        "Kou up-jump probability must lie in [0, 1], got {p_up}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Density value `g(x)`. The Kou density assigns `x = 0` to the upward
    /// branch.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            JumpDensity::Merton { mu_j, sigma_j } => {
                let z = (x - mu_j) / sigma_j;
                (-0.5 * z * z).exp() / (sigma_j * (2.0 * std::f64::consts::PI).sqrt())
            }
            JumpDensity::Kou {
                lambda_plus,
                lambda_minus,
                p_up,
            } => {
                if x >= 0.0 {
                    p_up * lambda_plus * (-lambda_plus * x).exp()
                } else {
                    (1.0 - p_up) * lambda_minus * (lambda_minus * x).exp()
                }
            }
        }
    }
}

/// Expected relative jump `ζ = ∫ (eˣ − 1) g(x) dx` in closed form.
pub fn compute_zeta(density: &JumpDensity) -> Result<f64> {
    density.validate()?;
    Ok(match *density {
        JumpDensity::Merton { mu_j, sigma_j } => (mu_j + 0.5 * sigma_j * sigma_j).exp() - 1.0,
        JumpDensity::Kou {
            lambda_plus,
            lambda_minus,
            p_up,
        } => {
            p_up * lambda_plus / (lambda_plus - 1.0)
                + (1.0 - p_up) * lambda_minus / (lambda_minus + 1.0)
                - 1.0
        }
    })
}

/// Market and jump-process parameters with the derived ζ cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Diffusive volatility σ (per √year).
    pub sigma: f64,
    /// Risk-free rate r (per year).
    pub rate: f64,
    /// Jump intensity λ (per year).
    pub intensity: f64,
    /// Log-jump-size density.
    pub jump_density: JumpDensity,
    zeta: f64,
}

impl ModelParams {
    pub fn new(sigma: f64, rate: f64, intensity: f64, jump_density: JumpDensity) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "volatility must be positive, got {sigma}"
            )));
        }
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::InvalidModel(format!(
                "jump intensity must be non-negative, got {intensity}"
            )));
        }
        if !rate.is_finite() {
            return Err(Error::InvalidModel(format!("rate must be finite, got {rate}")));
        }
        let zeta = compute_zeta(&jump_density)?;
        Ok(Self {
            sigma,
            rate,
            intensity,
            jump_density,
            zeta,
        })
    }

    /// Cached expected relative jump ζ.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

/// A European option contract anchored at spot `S₀`, so that the
/// log-moneyness coordinate is `x = ln(S/S₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contract {
    pub side: OptionSide,
    pub strike: f64,
    /// Spot anchor S₀. Defaults to the strike elsewhere so the payoff kink
    /// sits at `x = 0`, an even-N grid node.
    pub spot: f64,
    /// Maturity T in years.
    pub maturity: f64,
}

impl Contract {
    pub fn new(side: OptionSide, strike: f64, spot: f64, maturity: f64) -> Result<Self> {
        if !strike.is_finite() || strike <= 0.0 {
            return Err(Error::InvalidContract(format!(
                "strike must be positive, got {strike}"
            )));
        }
        if !spot.is_finite() || spot <= 0.0 {
            return Err(Error::InvalidContract(format!(
                "spot anchor must be positive, got {spot}"
            )));
        }
        if !maturity.is_finite() || maturity <= 0.0 {
            return Err(Error::InvalidContract(format!(
                "maturity must be positive, got {maturity}"
            )));
        }
        Ok(Self {
            side,
            strike,
            spot,
            maturity,
        })
    }

    /// Log-moneyness of the payoff kink, `ln(K/S₀)`.
    pub fn kink(&self) -> f64 {
        (self.strike / self.spot).ln()
    }

    /// Payoff in log-moneyness coordinates:
    /// `max(S₀eˣ − K, 0)` for calls, `max(K − S₀eˣ, 0)` for puts.
    pub fn payoff(&self, x: f64) -> f64 {
        let s = self.spot * x.exp();
        match self.side {
            OptionSide::Call => (s - self.strike).max(0.0),
            OptionSide::Put => (self.strike - s).max(0.0),
        }
    }

    /// Far-field (Dirichlet) value at log-moneyness `x` and time-to-maturity
    /// `τ`. The branch is selected by the sign of `x`: negative `x` takes the
    /// left asymptote, non-negative `x` the right one.
    ///
    /// Put: `K e^{−rτ} − S₀eˣ` on the left, `0` on the right.
    /// Call: `0` on the left, `S₀eˣ − K e^{−rτ}` on the right.
    pub fn boundary_value(&self, params: &ModelParams, x: f64, tau: f64) -> f64 {
        let discounted_strike = self.strike * (-params.rate * tau).exp();
        match (self.side, x < 0.0) {
            (OptionSide::Put, true) => discounted_strike - self.spot * x.exp(),
            (OptionSide::Put, false) => 0.0,
            (OptionSide::Call, true) => 0.0,
            (OptionSide::Call, false) => self.spot * x.exp() - discounted_strike,
        }
    }
}

/// Standard normal cumulative distribution function.
fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Closed-form value of the jump convolution taken over the exterior of the
/// truncated domain, `Υ(x, τ, L)`, with the far-field asymptote substituted
/// for the unknown solution.
///
/// For puts only the left tail `y < −L` contributes (the right asymptote is
/// zero); for calls only the right tail `y > L` does. The Merton forms use
/// the standard normal CDF, the Kou forms the one-sided exponential moments.
pub fn tail_correction(
    contract: &Contract,
    params: &ModelParams,
    x: f64,
    tau: f64,
    half_width: f64,
) -> Result<f64> {
    if !half_width.is_finite() || half_width <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "domain half-width must be positive, got {half_width}"
        )));
    }
    let (strike_part, spot_part) = tail_correction_parts(contract, params, x, half_width);
    Ok((-params.rate * tau).exp() * strike_part + spot_part)
}

/// Υ split into the discounted-strike part and the τ-independent spot part:
/// `Υ(x, τ, L) = e^{−rτ}·strike_part(x, L) + spot_part(x, L)`.
///
/// The split lets the solver refresh Υ each time step with one exponential
/// instead of re-evaluating the CDFs.
pub(crate) fn tail_correction_parts(
    contract: &Contract,
    params: &ModelParams,
    x: f64,
    half_width: f64,
) -> (f64, f64) {
    let k = contract.strike;
    let s0 = contract.spot;
    let l = half_width;
    match (params.jump_density, contract.side) {
        (JumpDensity::Merton { mu_j, sigma_j }, OptionSide::Put) => {
            // ∫_{y<−L} (K e^{−rτ} − S₀ e^y) g(y − x) dy
            let strike_part = k * norm_cdf(-(x + mu_j + l) / sigma_j);
            let spot_part = -s0
                * (x + 0.5 * sigma_j * sigma_j + mu_j).exp()
                * norm_cdf(-(x + sigma_j * sigma_j + mu_j + l) / sigma_j);
            (strike_part, spot_part)
        }
        (JumpDensity::Merton { mu_j, sigma_j }, OptionSide::Call) => {
            // ∫_{y>L} (S₀ e^y − K e^{−rτ}) g(y − x) dy
            let spot_part = s0
                * (x + 0.5 * sigma_j * sigma_j + mu_j).exp()
                * norm_cdf((x + mu_j + sigma_j * sigma_j - l) / sigma_j);
            let strike_part = -k * norm_cdf((x + mu_j - l) / sigma_j);
            (strike_part, spot_part)
        }
        (
            JumpDensity::Kou {
                lambda_minus, p_up, ..
            },
            OptionSide::Put,
        ) => {
            let q = 1.0 - p_up; // weight of the downward branch
            let strike_part = k * q * (-lambda_minus * (l + x)).exp();
            let spot_part = -s0 * q * lambda_minus / (lambda_minus + 1.0)
                * (-lambda_minus * x - (lambda_minus + 1.0) * l).exp();
            (strike_part, spot_part)
        }
        (
            JumpDensity::Kou {
                lambda_plus, p_up, ..
            },
            OptionSide::Call,
        ) => {
            let spot_part = s0 * p_up * lambda_plus / (lambda_plus - 1.0)
                * (lambda_plus * x + (1.0 - lambda_plus) * l).exp();
            let strike_part = -k * p_up * (-lambda_plus * (l - x)).exp();
            (strike_part, spot_part)
        }
    }
}

/// Black–Scholes price of a European option.
pub fn black_scholes_price(
    side: OptionSide,
    spot: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
) -> f64 {
    let sqrt_t = maturity.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * maturity) / (sigma * sqrt_t);
    let d2 = d1 - sigma * sqrt_t;
    let discounted_strike = strike * (-rate * maturity).exp();
    match side {
        OptionSide::Call => spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2),
        OptionSide::Put => discounted_strike * norm_cdf(-d2) - spot * norm_cdf(-d1),
    }
}

/// Merton reference price: the Poisson-weighted Black–Scholes mixture
///
/// ```text
/// Σₙ e^{−λ'T} (λ'T)ⁿ/n! · BS(S, K, rₙ, σₙ, T),
/// λ' = λ(1 + ζ), σₙ² = σ² + n σ_J²/T, rₙ = r − λζ + n ln(1 + ζ)/T.
/// ```
///
/// The series is truncated once a term drops below `1e−14` of the running
/// sum, or after `n_terms` terms, whichever comes first.
pub fn merton_series_price(
    contract: &Contract,
    params: &ModelParams,
    spot: f64,
    n_terms: usize,
) -> Result<f64> {
    let JumpDensity::Merton { mu_j: _, sigma_j } = params.jump_density else {
        return Err(Error::InvalidArgument(
            "the series price applies to the Merton density only".into(),
        ));
    };
    if n_terms < 1 {
        return Err(Error::InvalidArgument(
            "the series needs at least one term".into(),
        ));
    }
    let t = contract.maturity;
    let zeta = params.zeta();
    let lambda_prime = params.intensity * (1.0 + zeta);
    let log_one_plus_zeta = (1.0 + zeta).ln();

    let mut weight = (-lambda_prime * t).exp();
    let mut total = 0.0;
    for n in 0..n_terms {
        let nf = n as f64;
        let sigma_n = (params.sigma * params.sigma + nf * sigma_j * sigma_j / t).sqrt();
        let rate_n = params.rate - params.intensity * zeta + nf * log_one_plus_zeta / t;
        let term = weight
            * black_scholes_price(contract.side, spot, contract.strike, rate_n, sigma_n, t);
        total += term;
        if n > 0 && term.abs() < 1e-14 * total.abs() {
            break;
        }
        weight *= lambda_prime * t / (nf + 1.0);
    }
    Ok(total)
}
