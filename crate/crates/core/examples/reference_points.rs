//! Prints the model's response at operating points as JSON: a trace summary
//! with the AES at 0.15 N*m, plus the optimized AES stiffness.
//!
//! Usage: `cargo run --release --example reference_points [CONFIG [F:K2 ...]]`
//!
//! Without points, a fixed set spanning the usual frequency range is used.

use serde_json::{json, Value};
use wirefish_core::optimizer::{optimize_run, OptOptions};
use wirefish_core::output::summarize;
use wirefish_core::{simulate, Config};

const DEFAULT_POINTS: [(f64, f64); 5] = [(2.0, 0.164), (4.0, 1.31), (4.0, 2.565), (6.0, 10.51), (7.5, 10.51)];

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (f, k) = s.split_once(':').ok_or_else(|| format!("expected F:K2, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    Ok((num(f)?, num(k)?))
}

fn evaluate(cfg: &Config, f: f64, k2: f64) -> Value {
    let model = cfg.model.with_pes_stiffness(k2);
    let trace = match simulate(&model, &cfg.sim.with_frequency(f), 0.15) {
        Ok(t) => t,
        Err(e) => return json!({ "frequency": f, "k2": k2, "error": e.to_string() }),
    };
    let opt = optimize_run(&trace.tail, &model, &OptOptions::default())
        .map(|r| serde_json::to_value(r).unwrap_or_default())
        .unwrap_or_else(|e| json!({ "error": e.to_string() }));
    json!({ "frequency": f, "k2": k2, "summary": summarize(&trace), "optimum": opt })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = match args.first() {
        Some(path) => Config::load(path)?,
        None => Config::shipped(),
    };
    let points = if args.len() > 1 {
        args[1..].iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?
    } else {
        DEFAULT_POINTS.to_vec()
    };
    let out: Vec<Value> = points.iter().map(|&(f, k2)| evaluate(&cfg, f, k2)).collect();
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
