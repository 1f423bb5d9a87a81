//! Shared fixtures and independent oracles for the integration suites.
//! Oracles here must not touch the implementation paths they judge.

use std::sync::OnceLock;

use compactfd::model::{Contract, JumpDensity, ModelParams, OptionSide};
use compactfd::operators::GridSpec;
use compactfd::solver::{price_at, solve, SolveOptions, SolveResult};

pub const TABLE_SPOTS: [f64; 3] = [90.0, 100.0, 110.0];

pub fn merton_params() -> ModelParams {
    ModelParams::new(
        0.15,
        0.05,
        0.10,
        JumpDensity::Merton {
            mu_j: -0.90,
            sigma_j: 0.45,
        },
    )
    .unwrap()
}

pub fn kou_params() -> ModelParams {
    ModelParams::new(
        0.15,
        0.05,
        0.10,
        JumpDensity::Kou {
            lambda_plus: 3.0465,
            lambda_minus: 3.0775,
            p_up: 0.3445,
        },
    )
    .unwrap()
}

pub fn contract(side: OptionSide) -> Contract {
    Contract::new(side, 100.0, 100.0, 0.25).unwrap()
}

/// A benchmark-scale run (N = 1536, ρ = 0.4, L = 2, smoothing on) with the
/// three table prices. Cached so the price criteria and the iteration
/// criterion share one solve.
pub struct TableRun {
    pub result: SolveResult,
    pub prices: [f64; 3],
}

fn table_run(params: ModelParams, side: OptionSide) -> TableRun {
    let contract = contract(side);
    let grid = GridSpec::with_mesh_ratio(2.0, 1536, contract.maturity, 0.4).unwrap();
    let result = solve(&params, &contract, &grid, &SolveOptions::default()).unwrap();
    let prices = TABLE_SPOTS.map(|s| price_at(&result, &contract, s).unwrap());
    TableRun { result, prices }
}

macro_rules! cached_run {
    ($name:ident, $params:expr, $side:expr) => {
        pub fn $name() -> &'static TableRun {
            static CELL: OnceLock<TableRun> = OnceLock::new();
            CELL.get_or_init(|| table_run($params, $side))
        }
    };
}

cached_run!(merton_put_run, merton_params(), OptionSide::Put);
cached_run!(merton_call_run, merton_params(), OptionSide::Call);
cached_run!(kou_put_run, kou_params(), OptionSide::Put);
cached_run!(kou_call_run, kou_params(), OptionSide::Call);

/// Adaptive Simpson quadrature with Richardson acceptance test.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Adaptive Simpson per unit panel (robust for localised integrands).
pub fn adaptive_simpson_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut left = a;
    while left < b {
        let right = (left + 1.0).min(b);
        total += adaptive_simpson(f, left, right, tol);
        left = right;
    }
    total
}

/// Independent Black–Scholes value: discounted lognormal expectation of the
/// payoff, by quadrature in the standard normal variable.
pub fn black_scholes_by_quadrature(
    side: OptionSide,
    spot: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
) -> f64 {
    let drift = (rate - 0.5 * sigma * sigma) * maturity;
    let vol = sigma * maturity.sqrt();
    let norm_pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let integrand = move |z: f64| {
        let terminal = spot * (drift + vol * z).exp();
        let payoff = match side {
            OptionSide::Call => (terminal - strike).max(0.0),
            OptionSide::Put => (strike - terminal).max(0.0),
        };
        payoff * norm_pdf(z)
    };
    (-rate * maturity).exp() * adaptive_simpson_panels(&integrand, -14.0, 14.0, 1e-13)
}

/// Dense Toeplitz matvec oracle.
pub fn dense_toeplitz_matvec(first_col: &[f64], first_row: &[f64], v: &[f64]) -> Vec<f64> {
    let n = first_col.len();
    let mut out = vec![0.0; n];
    for (i, out_i) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            let entry = if j >= i {
                first_row[j - i]
            } else {
                first_col[i - j]
            };
            acc += entry * vj;
        }
        *out_i = acc;
    }
    out
}

/// Print one verdict line per criterion and fail the test on a miss.
pub fn report(criterion: &str, pass: bool, details: &str) {
    println!(
        "{criterion}: {} — {details}",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {details}");
}
