//! Successive shortest paths with the full per-stage distance tables.

use serde_json::{json, Value};

use crate::error::{invariant, Error, Result};
use crate::network::{residual, ArcId, Network, NodeId, ResidualStep, StaticFlow};
use crate::scalar::{Ext, Scalar};

/// Paths `P_1..P_m`, amounts `x_j`, cumulative flows `f^(0)..f^(m)` and the
/// distance tables `d_j(v,s)`, `d_j(v,t)` for `j = 0..m`.
#[derive(Clone, Debug)]
pub struct SspDecomposition<T> {
    paths: Vec<Vec<ResidualStep>>,
    amounts: Vec<T>,
    to_source: Vec<Vec<Ext<T>>>,
    to_sink: Vec<Vec<Ext<T>>>,
    flows: Vec<StaticFlow<T>>,
    source: NodeId,
}

impl<T: Scalar> SspDecomposition<T> {
    /// Runs successive shortest paths up to a maximum flow.
    pub fn compute(network: &Network<T>) -> Result<Self> {
        let (s, t) = (network.source(), network.sink());
        let mut flow = StaticFlow::zero(network);
        let mut out = Self {
            paths: Vec::new(),
            amounts: Vec::new(),
            to_source: Vec::new(),
            to_sink: Vec::new(),
            flows: Vec::new(),
            source: s,
        };
        loop {
            let g = residual(network, &flow)?;
            let to_sink = g.distances_to(t)?;
            let to_source = g.distances_to(s)?;
            let path = g.lexicographic_path(&to_sink, s, t);
            out.to_sink.push(to_sink);
            out.to_source.push(to_source);
            out.flows.push(flow.clone());
            let Some(path) = path else { break };
            let amount = path
                .iter()
                .map(|step| g.find(*step).expect("path uses residual arcs").capacity.clone())
                .min()
                .ok_or_else(|| invariant("empty s-t path"))?;
            let mut values = flow.values().to_vec();
            for step in &path {
                let v = &mut values[step.arc.0];
                *v = if step.forward {
                    v.clone() + amount.clone()
                } else {
                    v.clone() - amount.clone()
                };
            }
            flow = StaticFlow::new(network, values)?;
            out.paths.push(path);
            out.amounts.push(amount);
        }
        Ok(out)
    }

    /// Number of paths `m`.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Path `P_j`, `j` in `1..=m`.
    pub fn path(&self, j: usize) -> &[ResidualStep] {
        &self.paths[j - 1]
    }

    /// Amount `x_j`, `j` in `1..=m`.
    pub fn amount(&self, j: usize) -> &T {
        &self.amounts[j - 1]
    }

    /// `d_j(v,s)`, `j` in `0..=m`.
    pub fn to_source(&self, j: usize, v: NodeId) -> &Ext<T> {
        &self.to_source[j][v.0]
    }

    /// `d_j(v,t)`, `j` in `0..=m`.
    pub fn to_sink(&self, j: usize, v: NodeId) -> &Ext<T> {
        &self.to_sink[j][v.0]
    }

    /// Cumulative flow `f^(j)`, `j` in `0..=m`.
    pub fn stage(&self, j: usize) -> &StaticFlow<T> {
        &self.flows[j]
    }

    /// `d_{j-1}(s,t)`, the length of `P_j`, `j` in `1..=m`.
    pub fn path_delay(&self, j: usize) -> T {
        self.to_sink[j - 1][self.source.0]
            .clone()
            .into_finite()
            .expect("every path has finite length")
    }

    /// Maximum flow value `Σ x_j`.
    pub fn max_flow_value(&self) -> T {
        self.amounts.iter().fold(T::zero(), |a, x| a + x.clone())
    }

    /// Minimum-cost static flow of value `q` by truncating the decomposition.
    pub fn stage_flow(&self, network: &Network<T>, q: &T) -> Result<StaticFlow<T>> {
        if q.is_negative() {
            return Err(crate::error::input("flow value must be nonnegative"));
        }
        if q > &self.max_flow_value() {
            return Err(Error::DemandInfeasible(format!(
                "value {q} exceeds the maximum flow {}",
                self.max_flow_value()
            )));
        }
        let mut values = vec![T::zero(); network.arcs().len()];
        let mut left = q.clone();
        for (path, x) in self.paths.iter().zip(&self.amounts) {
            if !left.is_positive() {
                break;
            }
            let take = std::cmp::min(left.clone(), x.clone());
            left = left - take.clone();
            for step in path {
                let v = &mut values[step.arc.0];
                *v = if step.forward {
                    v.clone() + take.clone()
                } else {
                    v.clone() - take.clone()
                };
            }
        }
        StaticFlow::new(network, values)
    }

    /// Checks the structural lemmas: path lengths nondecrease, `d_j(v,s)`
    /// is nonincreasing in `j`, and `d_{j-1}(v,t) − d_{j-1}(s,t) = d_j(v,s)`
    /// wherever `d_{j-1}(v,t)` is finite.
    pub fn check_lemmas(&self) -> Result<()> {
        let m = self.len();
        for j in 2..=m {
            if self.path_delay(j) < self.path_delay(j - 1) {
                return Err(invariant(format!("path {j} is shorter than path {}", j - 1)));
            }
        }
        let n = self.to_source[0].len();
        for j in 1..=m {
            let dst = self.path_delay(j);
            for v in 0..n {
                if self.to_source[j][v] > self.to_source[j - 1][v] {
                    return Err(invariant(format!("d_{j}(v,s) increased at node {v}")));
                }
                if let Ext::Finite(dvt) = &self.to_sink[j - 1][v] {
                    let want = Ext::Finite(dvt.clone() - dst.clone());
                    if self.to_source[j][v] != want {
                        return Err(invariant(format!(
                            "distance identity fails at stage {j}, node {v}: {} vs {want}",
                            self.to_source[j][v]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Arcs of `P_j` with orientation as `(arc, forward)` pairs.
    pub fn path_arcs(&self, j: usize) -> impl Iterator<Item = (ArcId, bool)> + '_ {
        self.path(j).iter().map(|s| (s.arc, s.forward))
    }

    /// Debug dump: paths with orientation, amounts and distance tables.
    pub fn to_json(&self, network: &Network<T>) -> Value {
        let paths: Vec<Value> = (1..=self.len())
            .map(|j| {
                json!({
                    "arcs": self.path(j).iter().map(|s| json!({
                        "arc_id": network.arc(s.arc).name,
                        "forward": s.forward,
                    })).collect::<Vec<_>>(),
                    "amount": self.amount(j).to_string(),
                    "delay": self.path_delay(j).to_string(),
                })
            })
            .collect();
        let table = |rows: &Vec<Vec<Ext<T>>>| -> Vec<Value> {
            rows.iter()
                .map(|row| {
                    let obj: serde_json::Map<String, Value> = network
                        .nodes()
                        .map(|v| (network.node_name(v).to_string(), Value::String(row[v.0].to_string())))
                        .collect();
                    Value::Object(obj)
                })
                .collect()
        };
        json!({
            "paths": paths,
            "max_flow_value": self.max_flow_value().to_string(),
            "distances_to_source": table(&self.to_source),
            "distances_to_sink": table(&self.to_sink),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{single_arc, two_route};
    use num_rational::BigRational as Q;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    #[test]
    fn two_route_decomposition() {
        let net = two_route::<Q>();
        let d = SspDecomposition::compute(&net).unwrap();
        assert_eq!(d.len(), 2);
        let names = |j| {
            d.path(j)
                .iter()
                .map(|s| net.arc(s.arc).name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(names(1), ["e", "g"]);
        assert_eq!(names(2), ["e", "f"]);
        assert_eq!((d.path_delay(1), d.path_delay(2)), (q(0), q(1)));
        assert_eq!((d.amount(1), d.amount(2)), (&q(1), &q(1)));
        let a = net.node_by_name("a").unwrap();
        assert_eq!(d.to_sink(1, a), &Ext::Finite(q(1)));
        assert_eq!(d.to_source(2, a), &Ext::Finite(q(0)));
        d.check_lemmas().unwrap();
    }

    #[test]
    fn single_arc_decomposition() {
        let net = single_arc::<Q>(1, 3);
        let d = SspDecomposition::compute(&net).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.path_delay(1), q(3));
        assert_eq!(d.amount(1), &q(1));
    }

    #[test]
    fn unreachable_sink_gives_empty_decomposition() {
        let net = Network::<Q>::new(
            vec!["s".into(), "t".into()],
            vec![("ts".into(), "t".into(), "s".into(), q(1), q(1))],
            "s",
            "t",
        )
        .unwrap();
        let d = SspDecomposition::compute(&net).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.max_flow_value(), q(0));
    }

    #[test]
    fn stage_flow_truncates() {
        let net = two_route::<Q>();
        let d = SspDecomposition::compute(&net).unwrap();
        let one = d.stage_flow(&net, &q(1)).unwrap();
        assert_eq!(one.values(), &[q(1), q(0), q(1)]);
        assert_eq!(one.delay_cost(&net), q(0));
        let two = d.stage_flow(&net, &q(2)).unwrap();
        assert_eq!(two.values(), &[q(2), q(1), q(1)]);
        assert_eq!(two.delay_cost(&net), q(1));
        assert!(d.stage_flow(&net, &q(0)).unwrap().values().iter().all(|v| v == &q(0)));
        assert!(matches!(d.stage_flow(&net, &q(3)), Err(Error::DemandInfeasible(_))));
    }
}
