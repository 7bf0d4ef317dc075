//! JSON encoding of instances and exact scalars.
//!
//! Scalars are written as strings (`"p/q"` or integers) and read from
//! strings, integers or decimal literals.

use serde_json::{json, Value};

use crate::cost::{CostPiece, SchedulingCost};
use crate::error::{input, Result};
use crate::network::Network;
use crate::pwl::Affine;
use crate::scalar::Scalar;
use crate::solve::Target;

/// Reads an exact scalar from a JSON string or number.
pub fn parse_scalar<T: Scalar>(v: &Value) -> Result<T, String> {
    match v {
        Value::String(s) => T::parse_exact(s).ok_or_else(|| format!("`{s}` is not a rational number")),
        Value::Number(n) => T::parse_exact(&n.to_string()).ok_or_else(|| format!("`{n}` is not a rational number")),
        Value::Null => Err("missing number".into()),
        other => Err(format!("expected a number, found `{other}`")),
    }
}

/// Writes an exact scalar as a JSON string.
pub fn scalar_json<T: Scalar>(v: &T) -> Value {
    Value::String(v.to_string())
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    match v.get(key) {
        Some(x) if !x.is_null() => Ok(x),
        _ => Err(input(format!("missing field `{path}{key}`"))),
    }
}

fn scalar_field<T: Scalar>(v: &Value, key: &str, path: &str) -> Result<T> {
    parse_scalar(field(v, key, path)?).map_err(|e| input(format!("field `{path}{key}`: {e}")))
}

fn name_field(v: &Value, key: &str, path: &str) -> Result<String> {
    match field(v, key, path)? {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(input(format!("field `{path}{key}` must be a string or integer id"))),
    }
}

/// `{"nodes": [...], "arcs": [{"id","tail","head","capacity","delay"}],
/// "source", "sink"}`.
pub fn parse_network<T: Scalar>(v: &Value) -> Result<Network<T>> {
    let nodes = field(v, "nodes", "network.")?
        .as_array()
        .ok_or_else(|| input("field `network.nodes` must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, n)| match n {
            Value::String(s) => Ok(s.clone()),
            Value::Number(x) => Ok(x.to_string()),
            _ => Err(input(format!(
                "field `network.nodes[{i}]` must be a string or integer id"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let arcs = field(v, "arcs", "network.")?
        .as_array()
        .ok_or_else(|| input("field `network.arcs` must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let path = format!("network.arcs[{i}].");
            Ok((
                name_field(a, "id", &path)?,
                name_field(a, "tail", &path)?,
                name_field(a, "head", &path)?,
                scalar_field(a, "capacity", &path)?,
                scalar_field(a, "delay", &path)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let source = name_field(v, "source", "network.")?;
    let sink = name_field(v, "sink", "network.")?;
    Network::new(nodes, arcs, &source, &sink)
}

pub fn network_json<T: Scalar>(network: &Network<T>) -> Value {
    json!({
        "nodes": network.nodes().map(|v| network.node_name(v)).collect::<Vec<_>>(),
        "arcs": network.arcs().iter().map(|a| json!({
            "id": a.name,
            "tail": network.node_name(a.tail),
            "head": network.node_name(a.head),
            "capacity": a.capacity.to_string(),
            "delay": a.delay.to_string(),
        })).collect::<Vec<_>>(),
        "source": network.node_name(network.source()),
        "sink": network.node_name(network.sink()),
    })
}

fn optional_slope<T: Scalar>(v: &Value, key: &str) -> Result<Option<T>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if matches!(s.trim(), "inf" | "+inf" | "infinity") => Ok(None),
        Some(x) => parse_scalar(x)
            .map(Some)
            .map_err(|e| input(format!("field `cost.{key}`: {e}"))),
    }
}

/// Either a preset (`{"alpha", "preset": "standard", "beta", "gamma"}`,
/// `{"alpha", "preset": "eaf"}`, or `"preset": "standard(beta, gamma)"`) or
/// explicit pieces `{"alpha", "pieces": [{"from","to","slope","intercept"}],
/// "plus_infinity_left", "plus_infinity_right"}` where each piece is
/// `θ ↦ slope·θ + intercept` and a missing `from`/`to` is unbounded.
pub fn parse_cost<T: Scalar>(v: &Value) -> Result<SchedulingCost<T>> {
    let alpha: T = scalar_field(v, "alpha", "cost.")?;
    if let Some(preset) = v.get("preset") {
        let preset = preset
            .as_str()
            .ok_or_else(|| input("field `cost.preset` must be a string"))?
            .trim();
        if preset == "eaf" {
            return SchedulingCost::earliest_arrival(alpha);
        }
        if preset == "standard" {
            let beta = scalar_field(v, "beta", "cost.")?;
            return SchedulingCost::standard(alpha, beta, optional_slope(v, "gamma")?);
        }
        if let Some(args) = preset.strip_prefix("standard(").and_then(|r| r.strip_suffix(')')) {
            let (b, g) = args
                .split_once(',')
                .ok_or_else(|| input("preset `standard(beta, gamma)` needs two arguments"))?;
            let beta = T::parse_exact(b).ok_or_else(|| input(format!("`{b}` is not a rational number")))?;
            let gamma = match g.trim() {
                "inf" | "+inf" | "infinity" => None,
                g => Some(T::parse_exact(g).ok_or_else(|| input(format!("`{g}` is not a rational number")))?),
            };
            return SchedulingCost::standard(alpha, beta, gamma);
        }
        return Err(input(format!("unknown cost preset `{preset}`")));
    }
    let pieces = field(v, "pieces", "cost.")?
        .as_array()
        .ok_or_else(|| input("field `cost.pieces` must be an array"))?;
    if pieces.is_empty() {
        return Err(input("field `cost.pieces` must not be empty"));
    }
    let bound = |p: &Value, key: &str, i: usize| -> Result<Option<T>> {
        match p.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(x) => parse_scalar(x)
                .map(Some)
                .map_err(|e| input(format!("field `cost.pieces[{i}].{key}`: {e}"))),
        }
    };
    let flag = |key: &str| v.get(key).and_then(Value::as_bool).unwrap_or(false);
    let mut breaks = Vec::new();
    let mut out = Vec::new();
    let mut prev_to: Option<Option<T>> = None;
    for (i, p) in pieces.iter().enumerate() {
        let path = format!("cost.pieces[{i}].");
        let from = bound(p, "from", i)?;
        let to = bound(p, "to", i)?;
        let piece = CostPiece::Linear(Affine::new(
            scalar_field(p, "slope", &path)?,
            scalar_field(p, "intercept", &path)?,
        ));
        match (&prev_to, &from) {
            (None, None) => {}
            (None, Some(f)) => {
                if !flag("plus_infinity_left") {
                    return Err(input(format!(
                        "cost undefined left of {f}; set `plus_infinity_left` or start the first piece unbounded"
                    )));
                }
                out.push(CostPiece::Infinite);
                breaks.push(f.clone());
            }
            (Some(Some(t)), Some(f)) if t == f => breaks.push(f.clone()),
            _ => {
                return Err(input(format!(
                    "field `cost.pieces[{i}].from` must equal the previous `to`"
                )))
            }
        }
        if let (Some(f), Some(t)) = (&from, &to) {
            if f >= t {
                return Err(input(format!("field `cost.pieces[{i}]` has an empty range")));
            }
        }
        if prev_to == Some(None) {
            return Err(input(format!("field `cost.pieces[{i}]` follows an unbounded piece")));
        }
        out.push(piece);
        prev_to = Some(to);
    }
    if let Some(Some(t)) = prev_to {
        if !flag("plus_infinity_right") {
            return Err(input(format!(
                "cost undefined right of {t}; set `plus_infinity_right` or end the last piece unbounded"
            )));
        }
        breaks.push(t);
        out.push(CostPiece::Infinite);
    }
    SchedulingCost::from_pieces(alpha, breaks, out)
}

/// Explicit-pieces form of a cost, accepted back by [`parse_cost`].
pub fn cost_json<T: Scalar>(cost: &SchedulingCost<T>) -> Value {
    let b = cost.breaks();
    let mut pieces = Vec::new();
    let (mut left_inf, mut right_inf) = (false, false);
    for (k, p) in cost.pieces().iter().enumerate() {
        let from = if k == 0 { None } else { Some(&b[k - 1]) };
        let to = b.get(k);
        match p {
            CostPiece::Linear(a) => pieces.push(json!({
                "from": from.map(|x| x.to_string()),
                "to": to.map(|x| x.to_string()),
                "slope": a.slope.to_string(),
                "intercept": a.intercept.to_string(),
            })),
            CostPiece::Infinite if k == 0 => left_inf = true,
            CostPiece::Infinite => right_inf = true,
        }
    }
    let n = cost.normalization();
    json!({
        "alpha": cost.alpha().to_string(),
        "pieces": pieces,
        "plus_infinity_left": left_inf,
        "plus_infinity_right": right_inf,
        "normalization": {
            "growth_normalized": n.growth_normalized,
            "time_shift": n.time_shift.to_string(),
            "value_shift": n.value_shift.to_string(),
        },
    })
}

/// A parsed instance file.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub network: Network<T>,
    pub cost: SchedulingCost<T>,
    pub target: Target<T>,
}

/// `{"network": {...}, "cost": {...}, "target": {"demand": Q} | {"horizon": C}}`.
pub fn parse_instance<T: Scalar>(v: &Value) -> Result<Instance<T>> {
    let network = parse_network(field(v, "network", "")?)?;
    let cost = parse_cost(field(v, "cost", "")?)?;
    let target = field(v, "target", "")?;
    let target = match (target.get("demand"), target.get("horizon")) {
        (Some(_), None) => Target::Demand(scalar_field(target, "demand", "target.")?),
        (None, Some(_)) => Target::Horizon(scalar_field(target, "horizon", "target.")?),
        _ => return Err(input("field `target` needs exactly one of `demand` and `horizon`")),
    };
    Ok(Instance { network, cost, target })
}

pub fn instance_json<T: Scalar>(instance: &Instance<T>) -> Value {
    let target = match &instance.target {
        Target::Demand(q) => json!({"demand": q.to_string()}),
        Target::Horizon(c) => json!({"horizon": c.to_string()}),
    };
    json!({
        "network": network_json(&instance.network),
        "cost": cost_json(&instance.cost),
        "target": target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ext;
    use num_rational::BigRational as Q;

    fn two_route_instance() -> Value {
        json!({
            "network": {
                "nodes": ["s", "a", "t"],
                "arcs": [
                    {"id": "e", "tail": "s", "head": "a", "capacity": 2, "delay": 0},
                    {"id": "f", "tail": "a", "head": "t", "capacity": "2", "delay": "1"},
                    {"id": "g", "tail": "a", "head": "t", "capacity": 1, "delay": 0}
                ],
                "source": "s",
                "sink": "t"
            },
            "cost": {"alpha": 1, "preset": "standard", "beta": "1/2", "gamma": 2},
            "target": {"demand": "15/2"}
        })
    }

    #[test]
    fn parses_instance() {
        let inst: Instance<Q> = parse_instance(&two_route_instance()).unwrap();
        assert_eq!(inst.network.arcs().len(), 3);
        assert_eq!(inst.target, Target::Demand(Q::ratio(15, 2)));
        assert_eq!(inst.cost.evaluate(&Q::from_int(-2)), Ext::Finite(Q::from_int(1)));
    }

    #[test]
    fn round_trips_instance() {
        let inst: Instance<Q> = parse_instance(&two_route_instance()).unwrap();
        let back: Instance<Q> = parse_instance(&instance_json(&inst)).unwrap();
        assert_eq!(back.cost, inst.cost);
        assert_eq!(back.network.arcs(), inst.network.arcs());
    }

    #[test]
    fn presets() {
        let eaf: SchedulingCost<Q> = parse_cost(&json!({"alpha": 1, "preset": "eaf"})).unwrap();
        assert_eq!(eaf.evaluate(&Q::from_int(1)), Ext::Infinity);
        let s: SchedulingCost<Q> = parse_cost(&json!({"alpha": 1, "preset": "standard(1/2, inf)"})).unwrap();
        assert_eq!(s.evaluate(&Q::from_int(1)), Ext::Infinity);
        assert!(parse_cost::<Q>(&json!({"alpha": 1, "preset": "bogus"})).is_err());
    }

    #[test]
    fn explicit_pieces() {
        let c: SchedulingCost<Q> = parse_cost(&json!({
            "alpha": 1,
            "pieces": [
                {"to": 0, "slope": "-1/2", "intercept": 0},
                {"from": 0, "to": 1, "slope": 2, "intercept": 0}
            ],
            "plus_infinity_right": true
        }))
        .unwrap();
        assert_eq!(c.evaluate(&Q::ratio(1, 2)), Ext::Finite(Q::from_int(1)));
        assert_eq!(c.evaluate(&Q::from_int(2)), Ext::Infinity);
        assert!(parse_cost::<Q>(&json!({"alpha": 1, "pieces": [{"from": 0, "slope": 1, "intercept": 0}]})).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let mut v = two_route_instance();
        v["network"]["arcs"][1]["capacity"] = json!("two");
        let err = parse_instance::<Q>(&v).unwrap_err().to_string();
        assert!(err.contains("network.arcs[1].capacity"), "{err}");
        let mut v = two_route_instance();
        v["target"] = json!({"demand": 1, "horizon": 2});
        assert!(parse_instance::<Q>(&v).is_err());
    }
}
