//! `blidkit borel`: realize a jet and read it back by finite differences.

use serde::Deserialize;
use serde_json::json;

use blidkit::bump::ScalarCutoff;
use blidkit::germ::{jet_extract, realize_jet, JetSpec};
use blidkit::rng;

use crate::output::{require_input, Failure, Outcome, Output};
use crate::Common;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum BorelInput {
    Wrapped {
        jet: JetSpec,
        #[serde(default)]
        cutoff: Option<ScalarCutoff>,
        /// Radius of the sphere on which boundedness is checked.
        #[serde(default)]
        far_radius: Option<f64>,
    },
    Bare(JetSpec),
}

pub fn run(common: &Common, out: &Output) -> Result<Outcome, Failure> {
    let (jet, cutoff, far_radius) = match require_input::<BorelInput>(common)? {
        BorelInput::Wrapped { jet, cutoff, far_radius } => (jet, cutoff, far_radius),
        BorelInput::Bare(jet) => (jet, None, None),
    };
    let tau = cutoff.unwrap_or_else(ScalarCutoff::standard);
    let far_radius = far_radius.unwrap_or(100.0);
    let tol = common.tol.unwrap_or(1e-4);
    let directions = common.samples.unwrap_or(20);
    let realized = realize_jet(&jet, &tau)?;
    let m = jet.dim();

    let mut r = rng::seeded(common.seed);
    let mut csv = String::from("order,direction,coord,extracted,expected,rel_error\n");
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for d in 0..directions {
        let dir = rng::unit_vec(&mut r, m);
        for p in jet.polys() {
            let n = p.degree();
            let want = p.eval(&dir)?;
            let got = jet_extract(&realized.map, &dir, n)?;
            for (c, (g, w)) in got.iter().zip(&want).enumerate() {
                let rel = (g - w).abs() / w.abs().max(1.0);
                if rel > worst || rel.is_nan() {
                    worst = rel;
                    worst_at = Some(json!({"order": n, "direction": dir, "coord": c}));
                }
                csv.push_str(&format!("{n},{d},{c},{g},{w},{rel}\n"));
            }
        }
    }
    out.write_text("borel.csv", &csv)?;

    let bound: f64 = realized.summand_bounds.iter().sum();
    let mut far_max = 0.0f64;
    for _ in 0..directions.max(1) * 10 {
        let x: Vec<f64> = rng::unit_vec(&mut r, m).into_iter().map(|v| v * far_radius).collect();
        let v = realized.map.eval(&x).iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
        far_max = far_max.max(v);
    }
    let bounded = far_max <= bound * (1.0 + 1e-12);

    let passed = worst <= tol && bounded;
    let report = json!({
        "dim": m,
        "truncation": jet.truncation(),
        "cutoff": tau,
        "eps": realized.eps,
        "summand_bounds": realized.summand_bounds,
        "identity_radius": realized.identity_radius,
        "tol": tol,
        "directions": directions,
        "seed": common.seed,
        "max_rel_error": worst,
        "worst": worst_at,
        "far_field": {"radius": far_radius, "max_abs": far_max, "bound": bound, "passed": bounded},
        "csv": "borel.csv",
    });
    Ok(Outcome::new("borel", report, passed))
}
