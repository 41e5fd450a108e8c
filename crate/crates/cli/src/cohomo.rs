//! `blidkit cohomo solve` and `blidkit cohomo resonances`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use blidkit::cohomo::{check_resonances, eigenvalues, solve_cohomological, CohomologicalProblem, RESONANCE_TOL};

use crate::output::{require_input, Failure, Outcome, Output};
use crate::Common;

/// Points per axis in the `g` profile CSV.
const PROFILE_POINTS: usize = 121;

pub fn solve(common: &Common, out: &Output) -> Result<Outcome, Failure> {
    let mut problem: CohomologicalProblem = require_input(common)?;
    if let Some(tol) = common.tol {
        problem.tol = tol;
    }
    if let Some(n) = common.samples {
        problem.samples = n;
    }
    problem.validate().map_err(Failure::invalid)?;
    let (solution, report) = solve_cohomological(&problem, RESONANCE_TOL)?;

    let m = problem.dim();
    let w = problem.half_width;
    let mut csv = String::from("axis,t,g\n");
    for axis in 0..m {
        for i in 0..PROFILE_POINTS {
            let t = -w + 2.0 * w * i as f64 / (PROFILE_POINTS - 1) as f64;
            let mut x = vec![0.0; m];
            x[axis] = t;
            csv.push_str(&format!("{axis},{t},{}\n", solution.eval(&x)));
        }
    }
    out.write_text("cohomo_profile.csv", &csv)?;

    let passed = report.passed;
    let value = json!({
        "report": report,
        "formal_terms": solution.formal_terms,
        "csv": "cohomo_profile.csv",
    });
    Ok(Outcome::new("cohomo_solve", value, passed))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceQuery {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(alias = "degree_cap")]
    pub n_max: usize,
    #[serde(default)]
    pub resonance_tol: Option<f64>,
}

pub fn resonances(common: &Common, _out: &Output) -> Result<Outcome, Failure> {
    let query: ResonanceQuery = require_input(common)?;
    let m = query.a.len();
    if m == 0 || query.a.iter().any(|row| row.len() != m) {
        return Err(Failure::parse("A must be a non-empty square matrix"));
    }
    if query.n_max > blidkit::polyalg::MAX_DEGREE {
        return Err(Failure::parse(format!(
            "n_max {} exceeds the cap {}",
            query.n_max,
            blidkit::polyalg::MAX_DEGREE
        )));
    }
    let a = DMatrix::from_fn(m, m, |i, j| query.a[i][j]);
    let tol = common.tol.or(query.resonance_tol).unwrap_or(RESONANCE_TOL);
    let eig = eigenvalues(&a);
    let hits = check_resonances(&eig, query.n_max, tol);
    let value = json!({
        "eigenvalues": eig.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "n_max": query.n_max,
        "tol": tol,
        "resonances": hits,
    });
    Ok(Outcome::new("cohomo_resonances", value, true))
}
