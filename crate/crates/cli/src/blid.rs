//! `blidkit blid show`: cutoff and blid profiles.

use serde::Deserialize;
use serde_json::json;

use blidkit::bump::{ScalarCutoff, MAX_ORDER};
use blidkit::funcspace::{euclidean_norm, BallBlid, Blid};

use crate::output::{read_input, Failure, Outcome, Output};
use crate::Common;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShowConfig {
    #[serde(default = "ScalarCutoff::standard")]
    cutoff: ScalarCutoff,
    /// Profiles cover `[-extent * b, extent * b]`.
    #[serde(default = "default_extent")]
    extent: f64,
}

fn default_extent() -> f64 {
    1.5
}

pub fn show(common: &Common, out: &Output) -> Result<Outcome, Failure> {
    let cfg: ShowConfig = read_input(common)?.unwrap_or(ShowConfig {
        cutoff: ScalarCutoff::standard(),
        extent: default_extent(),
    });
    if !(cfg.extent > 0.0) {
        return Err(Failure::parse("extent must be positive"));
    }
    let points = common.samples.unwrap_or(601).max(2);
    let tau = cfg.cutoff;
    let (a, b) = (tau.inner_radius(), tau.outer_radius());
    let ball = BallBlid::new(tau);
    let tol = common.tol.unwrap_or(0.0);

    let mut header = String::from("s,tau");
    for k in 1..=MAX_ORDER {
        header.push_str(&format!(",tau_d{k}"));
    }
    header.push_str(",blid,ball_blid_norm\n");
    let mut csv = header;
    let mut violations = Vec::new();
    let span = cfg.extent * b;
    for i in 0..points {
        let s = -span + 2.0 * span * i as f64 / (points - 1) as f64;
        let mut row = vec![s, tau.value(s)];
        for k in 1..=MAX_ORDER {
            row.push(tau.eval(s, k)?);
        }
        let h = tau.blid(s);
        let hb = euclidean_norm(&ball.apply(&vec![s, 0.0]));
        row.push(h);
        row.push(hb);
        let t = row[1];
        if !(0.0..=1.0).contains(&t) {
            violations.push(json!({"invariant": "0 <= tau <= 1", "s": s, "value": t}));
        }
        if h.abs() > b {
            violations.push(json!({"invariant": "|h(s)| <= b", "s": s, "value": h}));
        }
        if s.abs() < a && (h - s).abs() > tol {
            violations.push(json!({"invariant": "h(s) = s for |s| < a", "s": s, "value": h}));
        }
        if hb > ball.bound() {
            violations.push(json!({"invariant": "|H(x)| <= sqrt(b)", "s": s, "value": hb}));
        }
        if s.abs() < ball.identity_radius() && (hb - s.abs()).abs() > tol {
            violations.push(json!({"invariant": "H(x) = x for |x| < sqrt(a)", "s": s, "value": hb}));
        }
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    out.write_text("blid_profile.csv", &csv)?;
    let passed = violations.is_empty();
    let value = json!({
        "cutoff": tau,
        "points": points,
        "tol": tol,
        "ball_identity_radius": ball.identity_radius(),
        "ball_bound": ball.bound(),
        "violations": violations,
        "csv": "blid_profile.csv",
    });
    Ok(Outcome::new("blid_show", value, passed))
}
