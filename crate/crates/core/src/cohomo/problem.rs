//! Problem files, reports and the end-to-end solver.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bump::ScalarCutoff;
use crate::polyalg::HomPolyMap;
use crate::{Error, Result};

use super::formal::{eval_taylor, solve_formal};
use super::pipeline::{box_samples, globalize, residual_stats, solve_flat_local, ResidualStats};
use super::resonance::{check_resonances, Resonance, RESONANCE_TOL};
use super::series::ScalarFn;
use super::splitting::{split_hyperbolic, HyperbolicSplitting, DEFAULT_MARGIN};

const DEFAULT_HALF_WIDTH: f64 = 3.0;
const DEFAULT_SAMPLES: usize = 10_000;
const LOCAL_TOL: f64 = 1e-10;

/// Non-polynomial addition to the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlatTerm {
    /// `coeff * exp(-1 / |x|^2) * x_coord`, flat at 0.
    ExpInvSq { coeff: f64, coord: usize },
    /// `coeff * max(0, |x| - radius)^3 * x_coord`, zero on the ball.
    BallVanishing { coeff: f64, radius: f64, coord: usize },
}

impl FlatTerm {
    fn coord(&self) -> usize {
        match *self {
            FlatTerm::ExpInvSq { coord, .. } | FlatTerm::BallVanishing { coord, .. } => coord,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            FlatTerm::ExpInvSq { coeff, coord } => {
                if r2 == 0.0 {
                    0.0
                } else {
                    coeff * (-1.0 / r2).exp() * x[coord]
                }
            }
            FlatTerm::BallVanishing { coeff, radius, coord } => {
                coeff * (r2.sqrt() - radius).max(0.0).powi(3) * x[coord]
            }
        }
    }
}

/// `g(Ax) - g(x) = f(x)` with `f = sum_n P_n / n! + flat_term`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologicalProblem {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub terms: Vec<HomPolyMap>,
    #[serde(default)]
    pub flat_term: Option<FlatTerm>,
    pub degree_cap: usize,
    pub tol: f64,
    /// Half-width of the box on which the residual is checked.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cutoff: Option<ScalarCutoff>,
}

fn default_half_width() -> f64 {
    DEFAULT_HALF_WIDTH
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl CohomologicalProblem {
    pub fn new(a: &DMatrix<f64>, terms: Vec<HomPolyMap>, degree_cap: usize, tol: f64) -> Self {
        CohomologicalProblem {
            a: (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect(),
            terms,
            flat_term: None,
            degree_cap,
            tol,
            half_width: DEFAULT_HALF_WIDTH,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            cutoff: None,
        }
    }

    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.a.len();
        if m == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for row in &self.a {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
        }
        Ok(DMatrix::from_fn(m, m, |i, j| self.a[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn cutoff(&self) -> ScalarCutoff {
        self.cutoff.unwrap_or_else(ScalarCutoff::standard)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.matrix()?.nrows();
        for p in &self.terms {
            if p.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.dim(),
                });
            }
            if p.codim() != 1 {
                return Err(Error::InvalidInput("right-hand side must be scalar-valued".into()));
            }
            if p.degree() == 0 && !p.is_zero() {
                return Err(Error::InvalidInput("f(0) must vanish: degree-0 term present".into()));
            }
            if p.degree() > self.degree_cap {
                return Err(Error::CapExceeded {
                    what: "term degree",
                    value: p.degree(),
                    cap: self.degree_cap,
                });
            }
        }
        if let Some(t) = &self.flat_term {
            if t.coord() >= m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: t.coord() + 1,
                });
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    /// The right-hand side as an evaluator.
    pub fn rhs(&self) -> ScalarFn {
        let terms: Vec<HomPolyMap> = self.terms.iter().filter(|p| !p.is_zero()).cloned().collect();
        let flat = self.flat_term;
        Arc::new(move |x: &[f64]| eval_taylor(&terms, x) + flat.map_or(0.0, |t| t.eval(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResidual {
    pub stage: String,
    #[serde(flatten)]
    pub stats: ResidualStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomoReport {
    pub q: f64,
    pub horizon: usize,
    /// Eigenvalues as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub resonances: Vec<Resonance>,
    pub residuals: Vec<StageResidual>,
    pub k0: Option<usize>,
    pub local_radius: Option<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Solution of a [`CohomologicalProblem`].
#[derive(Clone)]
pub struct CohomologicalSolution {
    pub g: ScalarFn,
    pub formal_terms: Vec<HomPolyMap>,
    pub split: HyperbolicSplitting,
}

impl std::fmt::Debug for CohomologicalSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CohomologicalSolution")
            .field("formal_terms", &self.formal_terms)
            .finish_non_exhaustive()
    }
}

impl CohomologicalSolution {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }
}

/// Solve the problem: formal solution degree by degree, then (when a flat
/// term is present) a local flat solution and globalization on the box.
pub fn solve_cohomological(problem: &CohomologicalProblem, tol: f64) -> Result<(CohomologicalSolution, CohomoReport)> {
    problem.validate()?;
    let a = problem.matrix()?;
    let m = a.nrows();
    let split = split_hyperbolic(&a, DEFAULT_MARGIN)?;
    let resonances = check_resonances(split.eigenvalues(), problem.degree_cap, RESONANCE_TOL);

    let mut formal_terms = Vec::new();
    for p in problem.terms.iter().filter(|p| !p.is_zero()) {
        formal_terms.push(solve_formal(&a, p, tol)?);
    }
    let g0: ScalarFn = {
        let q = formal_terms.clone();
        Arc::new(move |x: &[f64]| eval_taylor(&q, x))
    };

    let points = box_samples(m, problem.half_width, problem.samples, problem.seed);
    let poly_rhs: ScalarFn = {
        let terms: Vec<HomPolyMap> = problem.terms.iter().filter(|p| !p.is_zero()).cloned().collect();
        Arc::new(move |x: &[f64]| eval_taylor(&terms, x))
    };
    let mut residuals = vec![StageResidual {
        stage: "formal".into(),
        stats: residual_stats(&split, &g0, &poly_rhs, &points),
    }];
    let mut k0 = None;
    let mut local_radius = None;

    let g = match problem.flat_term {
        None => g0,
        Some(term) => {
            let tau = problem.cutoff();
            let rhs = problem.rhs();
            let (gamma0, delta): (ScalarFn, f64) = match term {
                FlatTerm::ExpInvSq { .. } => {
                    let flat: ScalarFn = Arc::new(move |x: &[f64]| term.eval(x));
                    let local = solve_flat_local(flat.clone(), &split, &tau, LOCAL_TOL)?;
                    let near = super::pipeline::ball_samples(m, 0.999 * local.radius, 256, problem.seed ^ 1);
                    residuals.push(StageResidual {
                        stage: "local".into(),
                        stats: residual_stats(&split, &local.w, &flat, &near),
                    });
                    let w = local.w.clone();
                    let g0 = g0.clone();
                    (Arc::new(move |x: &[f64]| g0(x) + w(x)), local.radius)
                }
                FlatTerm::BallVanishing { radius, .. } => (g0.clone(), radius),
            };
            local_radius = Some(delta);
            let global = globalize(gamma0, rhs, &split, delta, problem.half_width, &tau)?;
            k0 = Some(global.k0());
            global.g
        }
    };

    let rhs = problem.rhs();
    let final_stats = residual_stats(&split, &g, &rhs, &points);
    let passed = final_stats.max_residual <= problem.tol;
    residuals.push(StageResidual {
        stage: "global".into(),
        stats: final_stats,
    });
    let report = CohomoReport {
        q: split.q(),
        horizon: split.horizon(),
        eigenvalues: split.eigenvalues().iter().map(|z| [z.re, z.im]).collect(),
        resonances,
        residuals,
        k0,
        local_radius,
        tol: problem.tol,
        passed,
    };
    Ok((
        CohomologicalSolution {
            g,
            formal_terms,
            split,
        },
        report,
    ))
}
