//! Subcommand implementations. Each returns the `outputs` section of the
//! report plus an optional domain diagnostic.

use qef_core::ccr::CcrMatrix;
use qef_core::lie::{factorize_2x2, product_chain, quad_commutator};
use qef_core::matrix::{c, CMat};
use qef_core::moments::{product_moment_ey, product_moment_eyy};
use qef_core::oracles::{fock_expectation, mc_product_moment, mc_qef, McEstimate};
use qef_core::qef::{compute_qef, sweep, QefProblem, QefReport};
use qef_core::recursion::{RecursionState, StepRecord};
use qef_core::state::GaussianState;
use qef_core::Error;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::problem::{complex_matrix, real_matrix, ProblemFile};
use crate::report::{complex, complex_matrix as complex_json, number, real_matrix as real_json};
use crate::CliError;

pub struct Outcome {
    pub outputs: Value,
    /// Present when the problem is well formed but mathematically rejected.
    pub diagnostic: Option<String>,
}

impl Outcome {
    fn ok(outputs: Value) -> Self {
        Self {
            outputs,
            diagnostic: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub seed: u64,
    pub samples: Option<usize>,
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    pub force: bool,
}

const MC_SIGMAS: f64 = 3.0;

fn ccr(p: &ProblemFile) -> Result<CcrMatrix, CliError> {
    let theta = real_matrix(ProblemFile::require(&p.theta, "theta")?, "theta")?;
    Ok(CcrMatrix::validate(theta)?)
}

fn state(p: &ProblemFile) -> Result<GaussianState, CliError> {
    let ccr = ccr(p)?;
    let pm = real_matrix(ProblemFile::require(&p.p, "P")?, "P")?;
    Ok(GaussianState::admissible(pm, ccr)?)
}

fn qef_problem(p: &ProblemFile) -> Result<QefProblem, CliError> {
    let st = state(p)?;
    let pi = real_matrix(ProblemFile::require(&p.pi, "Pi")?, "Pi")?;
    let problem = QefProblem::new(st, pi)?;
    Ok(match p.risk {
        Some(theta) => problem.with_risk(theta)?,
        None => problem,
    })
}

fn mc_json(est: &McEstimate, target: Complex64) -> Value {
    json!({
        "mean": complex(est.mean),
        "std_error": est.std_error,
        "samples": est.samples,
        "rejected": est.rejected,
        "seed": est.seed,
        "within_3_std_errors": est.within(target, MC_SIGMAS),
    })
}

fn qef_json(r: &QefReport) -> Value {
    json!({
        "xi": complex(r.xi),
        "feasible": r.feasible,
        "spectral_radius": number(r.spectral_radius),
        "complex_spectral_radius": number(r.complex_spectral_radius),
        "sufficient_condition": {"margin": number(r.sufficient.margin), "holds": r.sufficient.holds},
        "classical_limit": r.classical_limit.map_or(Value::Null, number),
        "symplectic_eigenvalues": r.lambdas,
        "alphas": r.alphas.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        "betas": r.betas.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        "determinant": complex(r.determinant),
        "degenerate_spectrum": r.degenerate_spectrum,
        "risk": r.risk,
    })
}

pub fn qef(p: &ProblemFile, s: &Settings) -> Result<Outcome, CliError> {
    let problem = qef_problem(p)?;
    if let Some(sw) = &p.sweep {
        if sw.parameter != "risk_theta" {
            return Err(CliError::Malformed(format!(
                "problem file field `sweep.parameter`: unsupported parameter `{}`, expected `risk_theta`",
                sw.parameter
            )));
        }
        return sweep_table(&problem, &sw.grid);
    }
    let r = compute_qef(&problem)?;
    let mut out = qef_json(&r);
    if let Some(n) = s.samples.filter(|&n| n > 0) {
        out["monte_carlo"] = match mc_qef(&problem, n, s.seed, s.force) {
            Ok(est) => mc_json(&est, r.xi),
            Err(e @ Error::Infeasible(_)) => json!({"refused": e.to_string()}),
            Err(e) => return Err(e.into()),
        };
    }
    let diagnostic = (!r.feasible).then(|| Error::Infeasible(r.spectral_radius).to_string());
    Ok(Outcome {
        outputs: out,
        diagnostic,
    })
}

fn sweep_table(problem: &QefProblem, grid: &[f64]) -> Result<Outcome, CliError> {
    if grid.is_empty() {
        return Err(CliError::Malformed("problem file field `sweep.grid` is empty".into()));
    }
    let results = sweep(problem, grid);
    let mut rows = Vec::with_capacity(grid.len());
    let mut flags = Vec::with_capacity(grid.len());
    for (&theta, r) in grid.iter().zip(results) {
        match r {
            Ok(r) => {
                flags.push(Some(r.feasible));
                rows.push(json!({
                    "risk_theta": theta,
                    "xi": complex(r.xi),
                    "feasible": r.feasible,
                    "spectral_radius": number(r.spectral_radius),
                    "sufficient_condition": r.sufficient.holds,
                    "classical_limit": r.classical_limit.map_or(Value::Null, number),
                }));
            }
            Err(e) if e.is_malformed_input() => return Err(e.into()),
            Err(e) => {
                flags.push(None);
                rows.push(json!({"risk_theta": theta, "error": e.to_string()}));
            }
        }
    }
    let boundaries: Vec<Value> = flags
        .windows(2)
        .zip(grid.windows(2))
        .filter_map(|(f, g)| match (f[0], f[1]) {
            (Some(a), Some(b)) if a != b => Some(json!({"between": [g[0], g[1]], "feasible_before": a})),
            _ => None,
        })
        .collect();
    Ok(Outcome::ok(json!({
        "sweep": {"parameter": "risk_theta", "rows": rows, "feasibility_boundaries": boundaries}
    })))
}

pub fn product_moment(p: &ProblemFile, s: &Settings) -> Result<Outcome, CliError> {
    let st = state(p)?;
    let ey = product_moment_ey(&st)?;
    let eyy = product_moment_eyy(&st)?;
    let mut out = json!({
        "ey": complex(ey),
        "eyy": {
            "value": eyy.value,
            "imaginary_part": eyy.imaginary_part,
            "upper_bound": eyy.upper_bound,
            "determinant": complex(eyy.determinant),
        },
    });
    if let Some(n) = s.samples.filter(|&n| n > 0) {
        out["monte_carlo_ey"] = mc_json(&mc_product_moment(&st, n, s.seed)?, ey);
    }
    Ok(Outcome::ok(out))
}

pub fn factorize2(a: f64, b: f64, theta: f64, s: &Settings) -> Result<Outcome, CliError> {
    let f = factorize_2x2(a, b, theta)?;
    let tol = s.tol.unwrap_or(1e-12);
    Ok(Outcome::ok(json!({
        "alpha": f.alpha,
        "beta": f.beta,
        "residual": f.residual,
        "dense_residual": f.dense_residual,
        "tolerance": tol,
        "within_tolerance": f.residual < tol,
    })))
}

fn coefficient(p: &Option<crate::problem::ComplexRows>, name: &str) -> Result<CMat, CliError> {
    complex_matrix(ProblemFile::require(p, name)?, name)
}

pub fn commutator(p: &ProblemFile) -> Result<Outcome, CliError> {
    let ccr = ccr(p)?;
    let cm = quad_commutator(&coefficient(&p.a, "A")?, &coefficient(&p.b, "B")?, &ccr)?;
    Ok(Outcome::ok(json!({"C": complex_json(&cm)})))
}

pub fn product(p: &ProblemFile) -> Result<Outcome, CliError> {
    let ccr = ccr(p)?;
    let factors = match &p.factors {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(k, m)| complex_matrix(m, &format!("factors[{k}]")))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![coefficient(&p.a, "A")?, coefficient(&p.b, "B")?],
    };
    let lp = product_chain(&factors, &ccr)?;
    Ok(Outcome::ok(json!({
        "E": complex_json(&lp.e),
        "asymmetry_residual": lp.asymmetry_residual,
        "exp_residual": lp.exp_residual,
        "guard_norm": lp.guard_norm,
        "branch_risk": lp.branch_risk,
    })))
}

fn record_json(r: &StepRecord) -> Value {
    json!({
        "horizon": r.horizon,
        "imaginary_residual": r.imaginary_residual,
        "asymmetry_residual": r.asymmetry_residual,
        "symplectic_residual": r.symplectic_residual,
        "guard_norm": r.guard_norm,
        "branch_risk": r.branch_risk,
    })
}

fn recursion_json(st: &RecursionState) -> Value {
    json!({
        "horizon": st.horizon(),
        "Pi": real_json(st.pi()),
        "trace": st.trace().iter().map(record_json).collect::<Vec<_>>(),
    })
}

pub fn recursion(p: &ProblemFile) -> Result<Outcome, CliError> {
    let theta0 = real_matrix(ProblemFile::require(&p.theta, "theta")?, "theta")?;
    let c0 = real_matrix(ProblemFile::require(&p.c0, "C0")?, "C0")?;
    let mut st = RecursionState::init(theta0, c0)?;
    for (k, w) in p.weights.iter().flatten().enumerate() {
        let field = |name: &str| format!("weights[{k}].{name}");
        let sigma = real_matrix(&w.sigma, &field("sigma"))?;
        let theta = real_matrix(&w.theta_block, &field("theta_block"))?;
        let next = match (&w.c, &w.d) {
            (Some(cm), None) => st.step_general(&real_matrix(cm, &field("C"))?, sigma, theta),
            (None, Some(d)) => st.step_current(&real_matrix(d, &field("D"))?, sigma, theta),
            _ => {
                return Err(CliError::Malformed(format!(
                    "problem file field `weights[{k}]` needs exactly one of `C` or `D`"
                )))
            }
        };
        st = match next {
            Ok(next) => next,
            Err(e) if e.is_malformed_input() => {
                return Err(CliError::Malformed(format!("weights[{k}]: {e}")));
            }
            Err(e) => {
                return Ok(Outcome {
                    outputs: recursion_json(&st),
                    diagnostic: Some(format!("step {}: {e}", k + 1)),
                })
            }
        };
    }
    Ok(Outcome::ok(recursion_json(&st)))
}

fn unit(n: usize, k: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(k, k)] = c(-0.5, 0.0);
    m
}

struct Check {
    quantity: &'static str,
    formula: Complex64,
    fock_factors: Vec<CMat>,
    monte_carlo: Option<McEstimate>,
}

pub fn oracle_check(p: &ProblemFile, s: &Settings) -> Result<Outcome, CliError> {
    let st = state(p)?;
    let n = st.order();
    let modes = n / 2;
    let tol = s.tol.unwrap_or(1e-6);
    let samples = s.samples.unwrap_or(100_000);
    let truncation = s.truncation.unwrap_or(if modes == 1 { 80 } else { 30 });

    let y: Vec<CMat> = (0..n).map(|k| unit(n, k)).collect();
    let yy: Vec<CMat> = y.iter().chain(y.iter().rev()).cloned().collect();
    let ey = product_moment_ey(&st)?;
    let mut checks = vec![
        Check {
            quantity: "product_moment_ey",
            formula: ey,
            fock_factors: y,
            monte_carlo: (samples > 0).then(|| mc_product_moment(&st, samples, s.seed)).transpose()?,
        },
        Check {
            quantity: "product_moment_eyy",
            formula: c(product_moment_eyy(&st)?.value, 0.0),
            fock_factors: yy,
            monte_carlo: None,
        },
    ];
    let mut notes = Vec::new();
    if p.pi.is_some() {
        let problem = qef_problem(p)?;
        let r = compute_qef(&problem)?;
        let mc = if samples == 0 {
            None
        } else {
            match mc_qef(&problem, samples, s.seed, s.force) {
                Ok(est) => Some(est),
                Err(e @ Error::Infeasible(_)) => {
                    notes.push(format!("qef Monte Carlo skipped: {e}"));
                    None
                }
                Err(e) => return Err(e.into()),
            }
        };
        checks.push(Check {
            quantity: "qef",
            formula: r.xi,
            fock_factors: vec![qef_core::matrix::to_complex(&problem.effective_pi())],
            monte_carlo: mc,
        });
    }
    if modes > 2 {
        notes.push(format!("Fock oracle skipped: {modes} modes, at most 2 supported"));
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ch in checks {
        let mut row = json!({"quantity": ch.quantity, "formula": complex(ch.formula)});
        if modes <= 2 {
            let est = fock_expectation(st.ccr(), st.p(), &ch.fock_factors, truncation)?;
            let err = (est.value - ch.formula).norm();
            let agrees = err < tol;
            if !agrees {
                failures.push(format!("{} (Fock)", ch.quantity));
            }
            if est.truncation_error > tol {
                notes.push(format!(
                    "{}: truncation at {} levels may be inadequate (change {:.3e} against {} levels)",
                    ch.quantity,
                    truncation,
                    est.truncation_error,
                    truncation.saturating_sub(10)
                ));
            }
            row["fock"] = json!({
                "value": complex(est.value),
                "error": err,
                "truncation_error": est.truncation_error,
                "levels": est.levels,
                "agrees": agrees,
            });
        }
        if let Some(est) = &ch.monte_carlo {
            if !est.within(ch.formula, MC_SIGMAS) {
                failures.push(format!("{} (Monte Carlo)", ch.quantity));
            }
            row["monte_carlo"] = mc_json(est, ch.formula);
        }
        rows.push(row);
    }
    let diagnostic = (!failures.is_empty()).then(|| format!("oracle disagreement: {}", failures.join(", ")));
    Ok(Outcome {
        outputs: json!({
            "tolerance": tol,
            "checks": rows,
            "all_agree": failures.is_empty(),
            "notes": notes,
        }),
        diagnostic,
    })
}
