//! Subcommand bodies. Each returns the process exit code on success and an
//! error (classified in `main`) otherwise.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use flowtoll::duals::{certify, duality_gap, equilibrium_check, verify_certificate};
use flowtoll::io::{cost_json, parse_instance, parse_scalar, Instance};
use flowtoll::oracle::{compare, earliest_arrival_check, window_around};
use flowtoll::schedule::value_curve;
use flowtoll::{
    solve, DualCertificate, Ext, FlowOverTime, Network, Rational, Scalar, SchedulingCost, Solution, SspDecomposition,
    TollSchedule,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{file_stem, OutDir};

pub const OK: u8 = 0;
pub const CHECK_FAILED: u8 = 3;

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| flowtoll::Error::Input(format!("{}: malformed JSON: {e}", path.display())))
        .map_err(Into::into)
}

pub fn load_instance(path: &Path) -> Result<Instance<Rational>> {
    let raw = read_json(path)?;
    parse_instance(&raw).with_context(|| format!("invalid instance {}", path.display()))
}

/// Same instance with `ρ(θ) = −αθ` before the deadline and `+∞` after it.
pub fn with_earliest_arrival(instance: Instance<Rational>) -> Result<Instance<Rational>> {
    let cost = SchedulingCost::earliest_arrival(instance.cost.alpha().clone())?;
    Ok(Instance { cost, ..instance })
}

fn is_earliest_arrival(cost: &SchedulingCost) -> bool {
    SchedulingCost::earliest_arrival(cost.alpha().clone()).is_ok_and(|eaf| eaf.normalized() == cost.normalized())
}

fn path_cost(s: &Solution, j: usize) -> Rational {
    let offset = s.cost.alpha().clone() * s.schedule.delay(j).clone();
    let mut total = Rational::from_int(0);
    for (a, b) in s.schedule.arrivals(j).parts() {
        let rho = match s.cost.integral(a, b) {
            Ext::Finite(v) => v,
            Ext::Infinity => unreachable!("arrivals lie in a bounded sublevel set"),
        };
        total = total + rho + offset.clone() * (b.clone() - a.clone());
    }
    total * s.schedule.amount(j).clone()
}

fn summary(network: &Network, s: &Solution) -> Value {
    let paths: Vec<Value> = (1..=s.schedule.len())
        .map(|j| {
            json!({
                "index": j,
                "arcs": s.decomposition.path(j).iter().map(|st| {
                    let id = &network.arc(st.arc).name;
                    if st.forward { id.clone() } else { format!("-{id}") }
                }).collect::<Vec<_>>(),
                "delay": s.schedule.delay(j).to_string(),
                "amount": s.schedule.amount(j).to_string(),
                "departures": s.schedule.departures(j).to_strings(),
                "arrivals": s.schedule.arrivals(j).to_strings(),
                "cost": path_cost(s, j).to_string(),
            })
        })
        .collect();
    json!({
        "value": s.value.to_string(),
        "horizon": s.horizon().to_string(),
        "delta": s.schedule.delta().to_string(),
        "primal_cost": s.primal_cost.to_string(),
        "cost": cost_json(&s.cost),
        "paths": paths,
    })
}

fn rate_csv(flow: &FlowOverTime, e: flowtoll::network::ArcId) -> String {
    let mut out = String::from("from,to,rate\n");
    for (lo, hi, p) in flow.rate(e).cells() {
        if let (Some(lo), Some(hi)) = (lo, hi) {
            out.push_str(&format!("{lo},{hi},{}\n", p.intercept));
        }
    }
    out
}

fn toll_csv(tolls: &TollSchedule, e: flowtoll::network::ArcId) -> String {
    let mut out = String::from("from,to,slope,intercept\n");
    for (lo, hi, p) in tolls.toll(e).cells() {
        if let (Some(lo), Some(hi)) = (lo, hi) {
            out.push_str(&format!("{lo},{hi},{},{}\n", p.slope, p.intercept));
        }
    }
    out
}

fn arc_file(network: &Network, e: flowtoll::network::ArcId) -> String {
    format!("{}-{}.csv", e.0, file_stem(&network.arc(e).name))
}

pub fn cmd_solve(instance: &Instance<Rational>, out: &Path) -> Result<u8> {
    let network = &instance.network;
    let s = solve(network, &instance.cost, &instance.target)?;
    let dir = OutDir::create(out)?;
    dir.write_json("flow.json", &s.flow.to_json(network))?;
    dir.write_json("schedule.json", &s.schedule.to_json(&s.decomposition, network))?;
    dir.write_json("decomposition.json", &s.decomposition.to_json(network))?;
    dir.write_json("summary.json", &summary(network, &s))?;
    for e in network.arc_ids() {
        dir.write(&format!("rates/{}", arc_file(network, e)), &rate_csv(&s.flow, e))?;
    }
    println!("value {} horizon {} cost {}", s.value, s.horizon(), s.primal_cost);
    Ok(OK)
}

pub fn cmd_tolls(instance: &Instance<Rational>, out: &Path, samples: usize, seed: u64) -> Result<u8> {
    let network = &instance.network;
    let s = solve(network, &instance.cost, &instance.target)?;
    let c = certify(network, &s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eq = equilibrium_check(
        network,
        &s.flow,
        &s.schedule,
        &c.certificate,
        &c.tolls,
        &s.cost,
        samples,
        &mut rng,
    );
    let dir = OutDir::create(out)?;
    dir.write_json("potentials.json", &c.certificate.to_json(network))?;
    dir.write_json("tolls.json", &c.tolls.to_json(network))?;
    for e in network.arc_ids() {
        dir.write(&format!("tolls/{}", arc_file(network, e)), &toll_csv(&c.tolls, e))?;
    }
    let passed = c.passed() && eq.passed();
    dir.write_json(
        "certificate_report.json",
        &json!({
            "passed": passed,
            "gap": c.gap.to_string(),
            "conditions": serde_json::to_value(&c.report)?,
            "equilibrium": serde_json::to_value(&eq)?,
        }),
    )?;
    println!("certificate {} gap {}", if passed { "passed" } else { "FAILED" }, c.gap);
    Ok(if passed { OK } else { CHECK_FAILED })
}

/// Breakpoints of `C ↦ Q(C)` on `C >= 0`, with left limits where the curve
/// jumps, and the inverse as `(Q, C)` pairs.
pub fn cmd_curve(instance: &Instance<Rational>, out: &Path) -> Result<u8> {
    let network = &instance.network;
    let cost = instance.cost.normalized();
    let decomp = SspDecomposition::compute(network)?;
    let mut points = Vec::new();
    let mut inverse = Vec::new();
    let mut final_slope = Rational::from_int(0);
    if !decomp.is_empty() {
        let curve = value_curve(&decomp, &cost)?;
        let zero = Rational::from_int(0);
        let mut xs = vec![zero.clone()];
        xs.extend(curve.breaks().iter().filter(|b| **b > zero).cloned());
        for c in &xs {
            let value = curve.eval(c);
            let left = if *c == zero { value.clone() } else { curve.left_limit(c) };
            points.push(json!({
                "horizon": c.to_string(),
                "value": value.to_string(),
                "value_left": left.to_string(),
                "slope_right": curve.piece_right_of(c).slope.to_string(),
            }));
            inverse.push(json!({"value": value.to_string(), "horizon": c.to_string()}));
        }
        final_slope = curve.piece_right_of(xs.last().expect("nonempty")).slope.clone();
    }
    let dir = OutDir::create(out)?;
    dir.write_json(
        "curve.json",
        &json!({
            "points": points,
            "final_slope": final_slope.to_string(),
            "inverse": inverse,
            "cost": cost_json(&cost),
        }),
    )?;
    println!("{} curve breakpoints", points.len());
    Ok(OK)
}

pub fn parse_deltas(text: &str) -> Result<Vec<Rational>> {
    let mut deltas = Vec::new();
    for part in text.split(',') {
        let d: Rational = parse_scalar(&Value::String(part.trim().into()))
            .map_err(|e| flowtoll::Error::Input(format!("--deltas: {e}")))?;
        if d <= Rational::from_int(0) {
            return Err(flowtoll::Error::Input(format!("--deltas: step {d} must be positive")).into());
        }
        deltas.push(d);
    }
    Ok(deltas)
}

pub fn cmd_oracle(instance: &Instance<Rational>, out: &Path, deltas: &[Rational]) -> Result<u8> {
    let network = &instance.network;
    for d in deltas {
        for a in network.arcs() {
            if !(a.delay.clone() / d.clone()).is_integral() {
                return Err(flowtoll::Error::Input(format!(
                    "step {d} does not divide the delay {} of arc `{}`",
                    a.delay, a.name
                ))
                .into());
            }
        }
    }
    let s = solve(network, &instance.cost, &instance.target)?;
    let times: Vec<Rational> = s.flow.rates().iter().flat_map(|f| f.breaks().to_vec()).collect();
    let (mut lo, mut hi) = window_around(network, &times);
    // Widen outward until every step divides both ends.
    while let Some(d) = deltas
        .iter()
        .find(|d| !(lo.clone() / (*d).clone()).is_integral() || !(hi.clone() / (*d).clone()).is_integral())
    {
        lo = (lo.clone() / d.clone()).floor_int() * d.clone();
        hi = (hi.clone() / d.clone()).ceil_int() * d.clone();
    }
    let report = compare(network, &s.cost, &s.value, &s.primal_cost, (&lo, &hi), deltas)?;
    let mut passed = report.dominance;
    let mut body = serde_json::to_value(&report)?;
    if is_earliest_arrival(&instance.cost) {
        let checks = earliest_arrival_check(network, &s.cost, &s.schedule)?;
        passed &= checks.iter().all(|c| c.matches);
        body["deadlines"] = serde_json::to_value(&checks)?;
    }
    body["passed"] = Value::Bool(passed);
    OutDir::create(out)?.write_json("oracle_report.json", &body)?;
    println!("oracle {}", if passed { "passed" } else { "FAILED" });
    Ok(if passed { OK } else { CHECK_FAILED })
}

/// Re-checks a written flow and its potentials against the instance
/// without solving.
pub fn cmd_verify(
    instance: &Instance<Rational>,
    flow_path: &Path,
    potentials_path: &Path,
    out: Option<&Path>,
) -> Result<u8> {
    let network = &instance.network;
    let cost = instance.cost.normalized();
    let flow = FlowOverTime::from_json(network, &read_json(flow_path)?)
        .with_context(|| format!("invalid flow {}", flow_path.display()))?;
    let cert = DualCertificate::from_json(network, &read_json(potentials_path)?)
        .with_context(|| format!("invalid potentials {}", potentials_path.display()))?;
    let feasible = flow
        .check_capacity(network)
        .and_then(|_| flow.check_conservation(network));
    let report = verify_certificate(network, &flow, &cert, &cost);
    let value = flow.value(network)?;
    let primal = flow.arc_cost(network, &cost)?;
    let tolls = TollSchedule::build(network, &cert, cost.alpha());
    let gap = duality_gap(network, &primal, &value, &cert, &tolls)?;
    let passed = feasible.is_ok() && report.passed() && gap == Rational::from_int(0);
    let body = json!({
        "passed": passed,
        "feasible": feasible.as_ref().map_or_else(|e| e.to_string(), |_| "ok".into()),
        "value": value.to_string(),
        "primal_cost": primal.to_string(),
        "gap": gap.to_string(),
        "conditions": serde_json::to_value(&report)?,
    });
    match out {
        Some(dir) => OutDir::create(dir)?.write_json("verify_report.json", &body)?,
        None => println!("{}", serde_json::to_string_pretty(&body)?),
    }
    if !passed {
        report_failure(&body);
    }
    Ok(if passed { OK } else { CHECK_FAILED })
}

fn report_failure(body: &Value) {
    if body["feasible"] != "ok" {
        eprintln!("flow infeasible: {}", body["feasible"]);
    }
    if body["gap"] != "0" {
        eprintln!("duality gap {}", body["gap"]);
    }
    if body["conditions"]["witnesses"]
        .as_array()
        .is_some_and(|w| !w.is_empty())
    {
        eprintln!("certificate conditions violated, see witnesses");
    }
}
