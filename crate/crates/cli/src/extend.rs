//! `blidkit extend`: the integral functional on C[0,1] and a ball example on R^m.

use serde::{Deserialize, Serialize};
use serde_json::json;

use blidkit::bump::ScalarCutoff;
use blidkit::funcspace::{integral_functional, GridFunction};
use blidkit::germ::{extend_by_bump, LocalMap};
use blidkit::rng;

use crate::output::{cell, read_input, Failure, Outcome, Output};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant,
    Sine { frequency: f64 },
    Ramp,
}

impl Profile {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::Sine { frequency } => (2.0 * std::f64::consts::PI * frequency * t).sin(),
            Profile::Ramp => 2.0 * t - 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendConfig {
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "ScalarCutoff::standard")]
    pub cutoff: ScalarCutoff,
    /// Direction of the ray `x_s = s u`, normalized to `|u| = 1`.
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default = "default_max_scale")]
    pub max_scale: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Constant at which the extended functional is evaluated far from 0.
    #[serde(default = "default_far")]
    pub far_value: f64,
    /// Dimension of the ball example.
    #[serde(default = "default_dim")]
    pub ball_dim: usize,
}

fn default_grid() -> usize {
    200
}
fn default_profile() -> Profile {
    Profile::Constant
}
fn default_max_scale() -> f64 {
    1.5
}
fn default_points() -> usize {
    61
}
fn default_far() -> f64 {
    10.0
}
fn default_dim() -> usize {
    2
}

impl Default for ExtendConfig {
    fn default() -> Self {
        ExtendConfig {
            grid_size: default_grid(),
            cutoff: ScalarCutoff::standard(),
            profile: default_profile(),
            max_scale: default_max_scale(),
            points: default_points(),
            far_value: default_far(),
            ball_dim: default_dim(),
        }
    }
}

pub fn run(common: &Common, out: &Output) -> Result<Outcome, Failure> {
    let cfg: ExtendConfig = read_input(common)?.unwrap_or_default();
    if cfg.points < 2 || !(cfg.max_scale > 0.0) || cfg.ball_dim == 0 {
        return Err(Failure::parse("need points >= 2, max_scale > 0 and ball_dim >= 1"));
    }
    let tol = common.tol.unwrap_or(0.0);
    let samples = common.samples.unwrap_or(500);
    let h = cfg.cutoff;
    let a = h.inner_radius();

    let u = GridFunction::from_fn(cfg.grid_size, |t| cfg.profile.eval(t)).map_err(Failure::invalid)?;
    let norm = u.sup_norm();
    if norm == 0.0 {
        return Err(Failure::parse("profile vanishes identically"));
    }
    let u = u.map(|v| v / norm);

    // ray through the integral functional
    let mut csv = String::from("scale,sup_norm,f,F,difference\n");
    let mut ray_worst = 0.0f64;
    for i in 0..cfg.points {
        let s = cfg.max_scale * i as f64 / (cfg.points - 1) as f64;
        let x = u.map(|v| s * v);
        let big_f = integral_functional(&x, true, &h)?;
        let f = integral_functional(&x, false, &h).ok();
        let diff = f.map(|f| (big_f - f).abs());
        if x.sup_norm() < a {
            ray_worst = ray_worst.max(diff.unwrap_or(f64::INFINITY));
        }
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            s,
            x.sup_norm(),
            cell(f.unwrap_or(f64::NAN)),
            cell(big_f),
            cell(diff.unwrap_or(f64::NAN))
        ));
    }
    out.write_text("extend.csv", &csv)?;

    // random functions strictly inside the identity threshold
    let mut r = rng::seeded(common.seed);
    let mut random_worst = 0.0f64;
    let mut worst_sample = None;
    for k in 0..samples {
        let level = a * rng::uniform_vec(&mut r, 1, 1.0)[0].abs();
        let raw = GridFunction::from_values(rng::uniform_vec(&mut r, cfg.grid_size + 1, 1.0)).map_err(Failure::invalid)?;
        let rn = raw.sup_norm();
        let x = if rn > 0.0 { raw.map(|v| level * v / rn) } else { raw };
        if x.sup_norm() >= a {
            continue;
        }
        let d = (integral_functional(&x, true, &h)? - integral_functional(&x, false, &h)?).abs();
        if d > random_worst || d.is_nan() {
            random_worst = d;
            worst_sample = Some(json!({"sample": k, "sup_norm": x.sup_norm()}));
        }
    }

    let far = GridFunction::constant(cfg.grid_size, cfg.far_value).map_err(Failure::invalid)?;
    let far_extended = integral_functional(&far, true, &h)?;
    let far_raw = integral_functional(&far, false, &h).err().map(|e| e.to_string());
    let far_ok = far_extended.is_finite() && (cfg.far_value < 1.0 || far_raw.is_some());

    // ball example: f(x) = 1 / (1 - |x|^2) on the open unit ball
    let local = LocalMap::new(1.0, |x: &Vec<f64>| vec![1.0 / (1.0 - x.iter().map(|v| v * v).sum::<f64>())])?;
    let global = extend_by_bump(&local, &h)?;
    let radius = global.local_radius().unwrap_or(0.0);
    let mut ball_csv = String::from("norm,f,F,difference\n");
    let mut ball_worst = 0.0f64;
    for i in 0..cfg.points {
        let s = cfg.max_scale * i as f64 / (cfg.points - 1) as f64;
        let mut x = vec![0.0; cfg.ball_dim];
        x[0] = s;
        let big_f = global.eval(&x)[0];
        let f = local.eval(&x).ok().map(|v| v[0]);
        let diff = f.map(|f| (big_f - f).abs());
        if s < radius {
            ball_worst = ball_worst.max(diff.unwrap_or(f64::INFINITY));
        }
        ball_csv.push_str(&format!(
            "{},{},{},{}\n",
            s,
            cell(f.unwrap_or(f64::NAN)),
            cell(big_f),
            cell(diff.unwrap_or(f64::NAN))
        ));
    }
    out.write_text("extend_ball.csv", &ball_csv)?;

    let passed = ray_worst <= tol && random_worst <= tol && ball_worst <= tol && far_ok;
    let report = json!({
        "config": cfg,
        "identity_threshold": a,
        "tol": tol,
        "ray": {"max_difference_inside": ray_worst, "csv": "extend.csv"},
        "random": {"samples": samples, "seed": common.seed, "max_difference": random_worst, "worst": worst_sample},
        "far": {"value": cfg.far_value, "extended": far_extended, "raw_error": far_raw, "passed": far_ok},
        "ball": {"identity_radius": radius, "max_difference_inside": ball_worst, "csv": "extend_ball.csv"},
    });
    Ok(Outcome::new("extend", report, passed))
}
