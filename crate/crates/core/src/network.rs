//! Directed multigraph with capacities and delays, static flows, residual
//! networks and negative-delay shortest paths.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, invariant, Result};
use crate::scalar::{Ext, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// Position of an arc in the input order. Arc ids order shortest-path ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArcId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc<T> {
    pub name: String,
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: T,
    pub delay: T,
}

#[derive(Clone, Debug)]
pub struct Network<T> {
    node_names: Vec<String>,
    arcs: Vec<Arc<T>>,
    source: NodeId,
    sink: NodeId,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
}

impl<T: Scalar> Network<T> {
    /// `arcs` are `(name, tail, head, capacity, delay)` with node names.
    pub fn new(
        nodes: Vec<String>,
        arcs: Vec<(String, String, String, T, T)>,
        source: &str,
        sink: &str,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), NodeId(i)).is_some() {
                return Err(input(format!("duplicate node id `{n}`")));
            }
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| input(format!("unknown node id `{n}`")))
        };
        let source = lookup(source)?;
        let sink = lookup(sink)?;
        if source == sink {
            return Err(input("source and sink must differ"));
        }
        let mut names = HashMap::new();
        let mut built = Vec::with_capacity(arcs.len());
        for (name, tail, head, capacity, delay) in arcs {
            if names.insert(name.clone(), ()).is_some() {
                return Err(input(format!("duplicate arc id `{name}`")));
            }
            if capacity.is_negative() {
                return Err(input(format!("arc `{name}` has negative capacity")));
            }
            if delay.is_negative() {
                return Err(input(format!("arc `{name}` has negative delay")));
            }
            built.push(Arc {
                tail: lookup(&tail)?,
                head: lookup(&head)?,
                name,
                capacity,
                delay,
            });
        }
        Ok(Self::from_parts(nodes, built, source, sink))
    }

    pub(crate) fn from_parts(node_names: Vec<String>, arcs: Vec<Arc<T>>, source: NodeId, sink: NodeId) -> Self {
        let n = node_names.len();
        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        for (i, a) in arcs.iter().enumerate() {
            out_arcs[a.tail.0].push(ArcId(i));
            in_arcs[a.head.0].push(ArcId(i));
        }
        Self {
            node_names,
            arcs,
            source,
            sink,
            out_arcs,
            in_arcs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_names.len()).map(NodeId)
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.node_names[v.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name).map(NodeId)
    }

    pub fn arcs(&self) -> &[Arc<T>] {
        &self.arcs
    }

    pub fn arc(&self, e: ArcId) -> &Arc<T> {
        &self.arcs[e.0]
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> {
        (0..self.arcs.len()).map(ArcId)
    }

    pub fn arc_by_name(&self, name: &str) -> Option<ArcId> {
        self.arcs.iter().position(|a| a.name == name).map(ArcId)
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn out_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.out_arcs[v.0]
    }

    pub fn in_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.in_arcs[v.0]
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.node_names.len()
    }

    pub fn max_delay(&self) -> T {
        self.arcs.iter().map(|a| a.delay.clone()).max().unwrap_or_else(T::zero)
    }
}

/// A feasible static s-t flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticFlow<T> {
    values: Vec<T>,
    value: T,
}

impl<T: Scalar> StaticFlow<T> {
    pub fn zero(network: &Network<T>) -> Self {
        Self {
            values: vec![T::zero(); network.arcs().len()],
            value: T::zero(),
        }
    }

    /// Validates capacity bounds and conservation at every inner node.
    pub fn new(network: &Network<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != network.arcs().len() {
            return Err(input("flow must assign one value per arc"));
        }
        for (a, f) in network.arcs().iter().zip(&values) {
            if f.is_negative() || f > &a.capacity {
                return Err(input(format!(
                    "flow {f} on arc `{}` outside [0, {}]",
                    a.name, a.capacity
                )));
            }
        }
        let provisional = Self {
            values,
            value: T::zero(),
        };
        for v in network.nodes() {
            if v != network.source() && v != network.sink() {
                let nf = provisional.net_flow(network, v)?;
                if !nf.is_zero() {
                    return Err(input(format!(
                        "flow not conserved at node `{}` (net {nf})",
                        network.node_name(v)
                    )));
                }
            }
        }
        let value = provisional.net_flow(network, network.sink())?;
        let out = -provisional.net_flow(network, network.source())?;
        if value != out {
            return Err(invariant("sink inflow differs from source outflow"));
        }
        Ok(Self { value, ..provisional })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, e: ArcId) -> &T {
        &self.values[e.0]
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    /// Inflow minus outflow at `v`.
    pub fn net_flow(&self, network: &Network<T>, v: NodeId) -> Result<T> {
        if !network.contains(v) {
            return Err(input(format!("unknown node {v}")));
        }
        let inflow = network
            .in_arcs(v)
            .iter()
            .fold(T::zero(), |acc, e| acc + self.values[e.0].clone());
        let outflow = network
            .out_arcs(v)
            .iter()
            .fold(T::zero(), |acc, e| acc + self.values[e.0].clone());
        Ok(inflow - outflow)
    }

    /// `Σ_e τ_e f_e`.
    pub fn delay_cost(&self, network: &Network<T>) -> T {
        network
            .arcs()
            .iter()
            .zip(&self.values)
            .fold(T::zero(), |acc, (a, f)| acc + a.delay.clone() * f.clone())
    }
}

/// A residual arc: the forward or backward copy of an original arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResidualStep {
    pub arc: ArcId,
    pub forward: bool,
}

impl ResidualStep {
    /// Tie-break key: arc id, then forward before backward.
    fn key(&self) -> (usize, bool) {
        (self.arc.0, !self.forward)
    }

    pub fn tail<T>(&self, network: &Network<T>) -> NodeId {
        let a = &network.arcs[self.arc.0];
        if self.forward {
            a.tail
        } else {
            a.head
        }
    }

    pub fn head<T>(&self, network: &Network<T>) -> NodeId {
        let a = &network.arcs[self.arc.0];
        if self.forward {
            a.head
        } else {
            a.tail
        }
    }

    pub fn delay<T: Scalar>(&self, network: &Network<T>) -> T {
        let d = network.arcs[self.arc.0].delay.clone();
        if self.forward {
            d
        } else {
            -d
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualArc<T> {
    pub step: ResidualStep,
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: T,
    pub delay: T,
}

#[derive(Clone, Debug)]
pub struct ResidualGraph<T> {
    node_count: usize,
    arcs: Vec<ResidualArc<T>>,
    out: Vec<Vec<usize>>,
}

impl<T: Scalar> ResidualGraph<T> {
    pub fn arcs(&self) -> &[ResidualArc<T>] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn find(&self, step: ResidualStep) -> Option<&ResidualArc<T>> {
        self.arcs.iter().find(|a| a.step == step)
    }

    /// Shortest-path distances from every node to `target`; `Infinity` where
    /// `target` is unreachable.
    pub fn distances_to(&self, target: NodeId) -> Result<Vec<Ext<T>>> {
        self.label_correcting(target, true)
    }

    /// Shortest-path distances from `origin` to every node.
    pub fn distances_from(&self, origin: NodeId) -> Result<Vec<Ext<T>>> {
        self.label_correcting(origin, false)
    }

    // Bellman-Ford with a |V|-round cap; an improvement in the final round
    // means a negative cycle.
    fn label_correcting(&self, root: NodeId, reverse: bool) -> Result<Vec<Ext<T>>> {
        let n = self.node_count;
        let mut dist = vec![Ext::<T>::Infinity; n];
        dist[root.0] = Ext::zero();
        for round in 1..=n.max(1) {
            let mut changed = false;
            for a in &self.arcs {
                let (from, to) = if reverse { (a.head, a.tail) } else { (a.tail, a.head) };
                if let Ext::Finite(d) = &dist[from.0] {
                    let cand = Ext::Finite(d.clone() + a.delay.clone());
                    if cand < dist[to.0] {
                        dist[to.0] = cand;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(dist);
            }
            if round == n {
                return Err(invariant("negative-delay cycle in residual network"));
            }
        }
        Ok(dist)
    }

    /// Shortest `from`-`to` path; among shortest paths the one whose arc-id
    /// sequence is lexicographically smallest.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<(Ext<T>, Option<Vec<ResidualStep>>)> {
        let dist = self.distances_to(to)?;
        let path = self.lexicographic_path(&dist, from, to);
        Ok((dist[from.0].clone(), path))
    }

    /// Walks tight arcs greedily by arc id, only entering nodes from which
    /// `to` stays reachable over tight arcs without revisiting a node.
    pub(crate) fn lexicographic_path(&self, dist_to: &[Ext<T>], from: NodeId, to: NodeId) -> Option<Vec<ResidualStep>> {
        if !dist_to[from.0].is_finite() {
            return None;
        }
        let tight = |a: &ResidualArc<T>| match (&dist_to[a.tail.0], &dist_to[a.head.0]) {
            (Ext::Finite(du), Ext::Finite(dv)) => *du == dv.clone() + a.delay.clone(),
            _ => false,
        };
        let n = self.node_count;
        let mut visited = vec![false; n];
        let mut path = Vec::new();
        let mut cur = from;
        visited[cur.0] = true;
        while cur != to {
            let next = self.out[cur.0]
                .iter()
                .map(|&i| &self.arcs[i])
                .find(|a| !visited[a.head.0] && tight(a) && self.reaches(a.head, to, &visited, &tight))?;
            path.push(next.step);
            cur = next.head;
            visited[cur.0] = true;
        }
        Some(path)
    }

    fn reaches(&self, start: NodeId, goal: NodeId, blocked: &[bool], tight: &impl Fn(&ResidualArc<T>) -> bool) -> bool {
        let mut seen = blocked.to_vec();
        seen[start.0] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if u == goal {
                return true;
            }
            for &i in &self.out[u.0] {
                let a = &self.arcs[i];
                if !seen[a.head.0] && tight(a) {
                    seen[a.head.0] = true;
                    queue.push_back(a.head);
                }
            }
        }
        false
    }
}

/// The residual network of `flow`.
pub fn residual<T: Scalar>(network: &Network<T>, flow: &StaticFlow<T>) -> Result<ResidualGraph<T>> {
    if flow.values().len() != network.arcs().len() {
        return Err(input("flow does not match network"));
    }
    let mut arcs = Vec::new();
    for (i, a) in network.arcs().iter().enumerate() {
        let f = &flow.values()[i];
        if f.is_negative() || f > &a.capacity {
            return Err(input(format!("infeasible flow on arc `{}`", a.name)));
        }
        if f < &a.capacity {
            arcs.push(ResidualArc {
                step: ResidualStep {
                    arc: ArcId(i),
                    forward: true,
                },
                tail: a.tail,
                head: a.head,
                capacity: a.capacity.clone() - f.clone(),
                delay: a.delay.clone(),
            });
        }
        if f.is_positive() {
            arcs.push(ResidualArc {
                step: ResidualStep {
                    arc: ArcId(i),
                    forward: false,
                },
                tail: a.head,
                head: a.tail,
                capacity: f.clone(),
                delay: -a.delay.clone(),
            });
        }
    }
    let mut out = vec![Vec::new(); network.node_count()];
    for (i, a) in arcs.iter().enumerate() {
        out[a.tail.0].push(i);
    }
    for list in &mut out {
        list.sort_by_key(|&i| arcs[i].step.key());
    }
    Ok(ResidualGraph {
        node_count: network.node_count(),
        arcs,
        out,
    })
}

/// Shortest path in a residual network; see [`ResidualGraph::shortest_path`].
pub fn shortest_path<T: Scalar>(
    residual: &ResidualGraph<T>,
    from: NodeId,
    to: NodeId,
) -> Result<(Ext<T>, Option<Vec<ResidualStep>>)> {
    residual.shortest_path(from, to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_route;
    use num_rational::BigRational as Q;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn arc(net: &Network<Q>, name: &str) -> ArcId {
        net.arc_by_name(name).unwrap()
    }

    fn path_flow(net: &Network<Q>, names: &[&str], amount: i64) -> StaticFlow<Q> {
        let mut v = vec![q(0); net.arcs().len()];
        for n in names {
            v[arc(net, n).0] = q(amount);
        }
        StaticFlow::new(net, v).unwrap()
    }

    #[test]
    fn net_flow_examples() {
        let net = two_route();
        let zero = StaticFlow::zero(&net);
        for v in net.nodes() {
            assert_eq!(zero.net_flow(&net, v).unwrap(), q(0));
        }
        let f = path_flow(&net, &["e", "g"], 1);
        let a = net.node_by_name("a").unwrap();
        assert_eq!(f.net_flow(&net, a).unwrap(), q(0));
        assert_eq!(f.net_flow(&net, net.sink()).unwrap(), q(1));
        assert!(f.net_flow(&net, NodeId(99)).is_err());
    }

    #[test]
    fn static_flow_rejects_infeasible() {
        let net = two_route();
        let mut v = vec![q(0); 3];
        v[arc(&net, "g").0] = q(2);
        v[arc(&net, "e").0] = q(2);
        assert!(StaticFlow::new(&net, v).is_err());
        let mut v = vec![q(0); 3];
        v[arc(&net, "e").0] = q(1);
        assert!(StaticFlow::new(&net, v).is_err());
    }

    #[test]
    fn residual_of_zero_flow_is_forward_copy() {
        let net = two_route::<Q>();
        let r = residual(&net, &StaticFlow::zero(&net)).unwrap();
        assert_eq!(r.arcs().len(), 3);
        for (ra, a) in r.arcs().iter().zip(net.arcs()) {
            assert!(ra.step.forward);
            assert_eq!(ra.capacity, a.capacity);
        }
    }

    #[test]
    fn residual_with_saturated_arc() {
        let net = two_route();
        let f = path_flow(&net, &["e", "g"], 1);
        let r = residual(&net, &f).unwrap();
        let g = arc(&net, "g");
        assert!(r.find(ResidualStep { arc: g, forward: true }).is_none());
        let back = r.find(ResidualStep { arc: g, forward: false }).unwrap();
        assert_eq!(back.tail, net.sink());
        assert_eq!(back.head, net.node_by_name("a").unwrap());
        assert_eq!(back.capacity, q(1));
        assert_eq!(back.delay, q(0));
        // e strictly between 0 and capacity: both directions
        let e = arc(&net, "e");
        assert!(r.find(ResidualStep { arc: e, forward: true }).is_some());
        assert!(r.find(ResidualStep { arc: e, forward: false }).is_some());
    }

    #[test]
    fn shortest_path_examples() {
        let net = two_route();
        let (s, t) = (net.source(), net.sink());
        let r0 = residual(&net, &StaticFlow::zero(&net)).unwrap();
        let (d, p) = shortest_path(&r0, s, t).unwrap();
        assert_eq!(d, Ext::Finite(q(0)));
        let fwd = |n| ResidualStep {
            arc: arc(&net, n),
            forward: true,
        };
        assert_eq!(p.unwrap(), vec![fwd("e"), fwd("g")]);

        let r1 = residual(&net, &path_flow(&net, &["e", "g"], 1)).unwrap();
        let (d, p) = shortest_path(&r1, s, t).unwrap();
        assert_eq!(d, Ext::Finite(q(1)));
        assert_eq!(p.unwrap(), vec![fwd("e"), fwd("f")]);

        let (d, p) = shortest_path(&r1, s, s).unwrap();
        assert_eq!(d, Ext::Finite(q(0)));
        assert_eq!(p.unwrap(), vec![]);
    }

    #[test]
    fn unreachable_is_infinite() {
        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![("x".into(), "t".into(), "s".into(), q(1), q(1))],
            "s",
            "t",
        )
        .unwrap();
        let r = residual(&net, &StaticFlow::zero(&net)).unwrap();
        let (d, p) = shortest_path(&r, net.source(), net.sink()).unwrap();
        assert_eq!(d, Ext::Infinity);
        assert!(p.is_none());
    }

    #[test]
    fn negative_cycle_is_reported() {
        // a zero-flow residual never has negative arcs; build one directly
        let net = Network::new(
            vec!["s".into(), "a".into(), "t".into()],
            vec![
                ("p".into(), "s".into(), "a".into(), q(1), q(5)),
                ("r".into(), "a".into(), "s".into(), q(1), q(0)),
                ("x".into(), "a".into(), "t".into(), q(1), q(0)),
            ],
            "s",
            "t",
        )
        .unwrap();
        // forward p (5) plus backward r (-0) is fine; saturate r to make a backward arc
        let mut r = residual(&net, &StaticFlow::zero(&net)).unwrap();
        r.arcs[0].delay = q(-5);
        r.arcs[1].delay = q(1);
        assert!(matches!(r.distances_to(NodeId(2)), Err(crate::Error::Invariant(_))));
    }

    #[test]
    fn parallel_arcs_break_ties_by_arc_id() {
        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![
                ("late".into(), "s".into(), "t".into(), q(1), q(2)),
                ("b".into(), "s".into(), "t".into(), q(1), q(1)),
                ("a".into(), "s".into(), "t".into(), q(1), q(1)),
            ],
            "s",
            "t",
        )
        .unwrap();
        let r = residual(&net, &StaticFlow::zero(&net)).unwrap();
        let (_, p) = shortest_path(&r, net.source(), net.sink()).unwrap();
        assert_eq!(p.unwrap()[0].arc, ArcId(1));
    }

    #[test]
    fn rejects_bad_networks() {
        let nodes = || vec!["s".to_string(), "t".to_string()];
        assert!(Network::<Q>::new(nodes(), vec![], "s", "s").is_err());
        assert!(Network::<Q>::new(nodes(), vec![], "s", "u").is_err());
        assert!(Network::new(
            nodes(),
            vec![("x".into(), "s".into(), "t".into(), q(-1), q(0))],
            "s",
            "t"
        )
        .is_err());
        assert!(Network::new(
            nodes(),
            vec![
                ("x".into(), "s".into(), "t".into(), q(1), q(0)),
                ("x".into(), "s".into(), "t".into(), q(1), q(0))
            ],
            "s",
            "t"
        )
        .is_err());
    }
}
