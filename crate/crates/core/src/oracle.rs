//! Discrete validation: the time-expanded network, its minimum-cost flow
//! and the comparison with the continuous optimum.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::cost::SchedulingCost;
use crate::error::{input, Error, Result};
use crate::network::Network;
use crate::scalar::{Ext, Scalar};
use crate::schedule::PathSchedule;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExpandedKind {
    Movement,
    Waiting,
    Departure,
    Arrival,
}

#[derive(Clone, Debug)]
pub struct ExpandedArc<T> {
    pub tail: usize,
    pub head: usize,
    /// `None` means uncapacitated.
    pub capacity: Option<T>,
    pub cost: T,
    pub kind: ExpandedKind,
}

/// Layer `i` stands for the time interval `[iΔ, (i+1)Δ)`; node `(v, i)` has
/// index `(i − first) · n + v`, followed by the supersource and supersink.
#[derive(Clone, Debug)]
pub struct TimeExpandedGraph<T> {
    step: T,
    first: i64,
    layers: usize,
    nodes_per_layer: usize,
    arcs: Vec<ExpandedArc<T>>,
}

impl<T: Scalar> TimeExpandedGraph<T> {
    /// Expands over `[lo, hi]` (both multiples of `step`). Movement arcs
    /// carry `ν_e Δ` per layer at cost `ατ_e`, waiting at intermediate nodes
    /// costs `αΔ`, and leaving the sink from layer `i` costs the average of
    /// `ρ` over that layer (omitted where the average is infinite).
    pub fn expand(network: &Network<T>, cost: &SchedulingCost<T>, step: &T, lo: &T, hi: &T) -> Result<Self> {
        Self::expand_with(network, cost, step, lo, hi, true)
    }

    fn expand_with(
        network: &Network<T>,
        cost: &SchedulingCost<T>,
        step: &T,
        lo: &T,
        hi: &T,
        sink_costs: bool,
    ) -> Result<Self> {
        if !step.is_positive() {
            return Err(input("time step must be positive"));
        }
        let layer_of = |x: &T, what: &str| -> Result<i64> {
            let k = x.clone() / step.clone();
            if !k.is_integral() {
                return Err(input(format!("{what} {x} is not a multiple of the time step {step}")));
            }
            k.to_i64().ok_or_else(|| input("time window too large"))
        };
        let mut shifts = Vec::with_capacity(network.arcs().len());
        for a in network.arcs() {
            shifts.push(layer_of(&a.delay, &format!("delay of arc `{}`", a.name))? as usize);
        }
        let first = layer_of(lo, "window start")?;
        let last = layer_of(hi, "window end")?;
        let layers = (last - first).max(0) as usize;
        let n = network.node_count();
        let alpha = cost.alpha();
        let mut arcs = Vec::new();
        let source = layers * n;
        let sink = source + 1;
        for i in 0..layers {
            for (a, &shift) in network.arcs().iter().zip(&shifts) {
                if i + shift < layers {
                    arcs.push(ExpandedArc {
                        tail: i * n + a.tail.0,
                        head: (i + shift) * n + a.head.0,
                        capacity: Some(a.capacity.clone() * step.clone()),
                        cost: alpha.clone() * a.delay.clone(),
                        kind: ExpandedKind::Movement,
                    });
                }
            }
            if i + 1 < layers {
                for v in network.nodes() {
                    if v != network.source() && v != network.sink() {
                        arcs.push(ExpandedArc {
                            tail: i * n + v.0,
                            head: (i + 1) * n + v.0,
                            capacity: None,
                            cost: alpha.clone() * step.clone(),
                            kind: ExpandedKind::Waiting,
                        });
                    }
                }
            }
            arcs.push(ExpandedArc {
                tail: source,
                head: i * n + network.source().0,
                capacity: None,
                cost: T::zero(),
                kind: ExpandedKind::Departure,
            });
            let start = step.clone() * T::from_int(first + i as i64);
            let end = start.clone() + step.clone();
            let exit = if sink_costs {
                match cost.integral(&start, &end) {
                    Ext::Finite(v) => Some(v / step.clone()),
                    Ext::Infinity => None,
                }
            } else if end <= T::zero() {
                Some(T::zero())
            } else {
                None
            };
            if let Some(c) = exit {
                arcs.push(ExpandedArc {
                    tail: i * n + network.sink().0,
                    head: sink,
                    capacity: None,
                    cost: c,
                    kind: ExpandedKind::Arrival,
                });
            }
        }
        Ok(Self {
            step: step.clone(),
            first,
            layers,
            nodes_per_layer: n,
            arcs,
        })
    }

    pub fn step(&self) -> &T {
        &self.step
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Index of the first layer (`lo / Δ`).
    pub fn first_layer(&self) -> i64 {
        self.first
    }

    pub fn node_count(&self) -> usize {
        self.layers * self.nodes_per_layer + 2
    }

    pub fn arcs(&self) -> &[ExpandedArc<T>] {
        &self.arcs
    }

    pub fn count(&self, kind: ExpandedKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }

    /// Minimum-cost flow of value `demand` (or a maximum flow when `demand`
    /// is `None`) from the supersource to the supersink.
    pub fn min_cost_flow(&self, demand: Option<&T>) -> Result<DiscreteFlow<T>> {
        let source = self.layers * self.nodes_per_layer;
        MinCostFlow::new(self.node_count(), &self.arcs).run(source, source + 1, demand)
    }
}

/// Result of a discrete solve: value, cost and the flow per expanded arc.
#[derive(Clone, Debug)]
pub struct DiscreteFlow<T> {
    pub value: T,
    pub cost: T,
    pub flows: Vec<T>,
}

struct Edge<T> {
    to: usize,
    cap: Ext<T>,
    cost: T,
}

/// Successive shortest paths with reduced costs (Dijkstra and node
/// potentials); valid because every expanded arc cost is nonnegative.
struct MinCostFlow<T> {
    edges: Vec<Edge<T>>,
    adj: Vec<Vec<usize>>,
}

impl<T: Scalar> MinCostFlow<T> {
    fn new(n: usize, arcs: &[ExpandedArc<T>]) -> Self {
        let mut edges = Vec::with_capacity(2 * arcs.len());
        let mut adj = vec![Vec::new(); n];
        for a in arcs {
            adj[a.tail].push(edges.len());
            edges.push(Edge {
                to: a.head,
                cap: a.capacity.clone().map_or(Ext::Infinity, Ext::Finite),
                cost: a.cost.clone(),
            });
            adj[a.head].push(edges.len());
            edges.push(Edge {
                to: a.tail,
                cap: Ext::zero(),
                cost: -a.cost.clone(),
            });
        }
        Self { edges, adj }
    }

    fn run(mut self, s: usize, t: usize, demand: Option<&T>) -> Result<DiscreteFlow<T>> {
        let n = self.adj.len();
        let mut potential = vec![T::zero(); n];
        let mut value = T::zero();
        let mut total = T::zero();
        loop {
            let remaining = match demand {
                Some(d) if &value >= d => break,
                Some(d) => Ext::Finite(d.clone() - value.clone()),
                None => Ext::Infinity,
            };
            let mut dist: Vec<Option<T>> = vec![None; n];
            let mut pred: Vec<Option<usize>> = vec![None; n];
            let mut done = vec![false; n];
            dist[s] = Some(T::zero());
            let mut heap = BinaryHeap::from([Reverse((T::zero(), s))]);
            while let Some(Reverse((d, u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &id in &self.adj[u] {
                    let e = &self.edges[id];
                    if e.cap <= Ext::zero() || done[e.to] {
                        continue;
                    }
                    let nd = d.clone() + e.cost.clone() + potential[u].clone() - potential[e.to].clone();
                    if dist[e.to].as_ref().is_none_or(|old| &nd < old) {
                        dist[e.to] = Some(nd.clone());
                        pred[e.to] = Some(id);
                        heap.push(Reverse((nd, e.to)));
                    }
                }
            }
            if dist[t].is_none() {
                if demand.is_some() {
                    return Err(Error::DemandInfeasible(format!(
                        "time-expanded network carries at most {value} within the window"
                    )));
                }
                break;
            }
            for v in 0..n {
                if let Some(d) = &dist[v] {
                    potential[v] = potential[v].clone() + d.clone();
                }
            }
            let mut push = remaining;
            let mut v = t;
            while v != s {
                let id = pred[v].expect("reached nodes have predecessors");
                push = std::cmp::min(push, self.edges[id].cap.clone());
                v = self.edges[id ^ 1].to;
            }
            let push = push
                .into_finite()
                .ok_or_else(|| input("unbounded flow in the time-expanded network"))?;
            let mut v = t;
            while v != s {
                let id = pred[v].expect("reached nodes have predecessors");
                self.edges[id].cap = self.edges[id].cap.clone().add_finite(&-push.clone());
                self.edges[id ^ 1].cap = self.edges[id ^ 1].cap.clone().add_finite(&push);
                total = total + push.clone() * self.edges[id].cost.clone();
                v = self.edges[id ^ 1].to;
            }
            value = value + push;
        }
        let flows = (0..self.edges.len() / 2)
            .map(|i| match &self.edges[2 * i + 1].cap {
                Ext::Finite(v) => v.clone(),
                Ext::Infinity => unreachable!("reverse edges start at zero"),
            })
            .collect();
        Ok(DiscreteFlow {
            value,
            cost: total,
            flows,
        })
    }
}

/// Time window `[min − d − 1, max + d + 1]` around `times`, `d` the largest
/// arc delay, rounded outward to integers so every dyadic step divides it.
pub fn window_around<T: Scalar>(network: &Network<T>, times: &[T]) -> (T, T) {
    let d = network.max_delay();
    let lo = times.iter().min().cloned().unwrap_or_else(T::zero) - d.clone() - T::one();
    let hi = times.iter().max().cloned().unwrap_or_else(T::zero) + d + T::one();
    (lo.floor_int(), hi.ceil_int())
}

/// One discretization level of the comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleLevel {
    pub delta: String,
    pub discrete_cost: String,
    pub continuous_cost: String,
    pub gap: String,
    pub dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub window: [String; 2],
    pub levels: Vec<OracleLevel>,
    pub dominance: bool,
    pub gap_nonincreasing: bool,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.dominance && self.gap_nonincreasing
    }
}

/// Solves the discrete problem at every step in `deltas` (in the given
/// order) for the same demand and window and compares with `continuous`.
pub fn compare<T: Scalar>(
    network: &Network<T>,
    cost: &SchedulingCost<T>,
    demand: &T,
    continuous: &T,
    window: (&T, &T),
    deltas: &[T],
) -> Result<OracleReport> {
    let mut levels = Vec::new();
    let mut gaps: Vec<T> = Vec::new();
    for delta in deltas {
        let teg = TimeExpandedGraph::expand(network, cost, delta, window.0, window.1)?;
        let discrete = teg.min_cost_flow(Some(demand))?;
        let gap = discrete.cost.clone() - continuous.clone();
        levels.push(OracleLevel {
            delta: delta.to_string(),
            discrete_cost: discrete.cost.to_string(),
            continuous_cost: continuous.to_string(),
            gap: gap.to_string(),
            dominates: !gap.is_negative(),
        });
        gaps.push(gap);
    }
    Ok(OracleReport {
        window: [window.0.to_string(), window.1.to_string()],
        dominance: levels.iter().all(|l| l.dominates),
        gap_nonincreasing: gaps.windows(2).all(|w| w[1] <= w[0]),
        levels,
    })
}

/// Per-deadline comparison for the earliest-arrival cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeadlineCheck {
    pub lead_time: String,
    pub continuous: String,
    pub discrete: String,
    pub matches: bool,
}

/// Earliest-arrival cross-check in reversed time: for every integer lead
/// time `r` up to `C/α`, the amount the continuous solution sends from the
/// source during `[−r, 0]` equals the maximum amount the unit-step
/// time-expanded network moves from `s` to `t` within `[−r, 0]`.
pub fn earliest_arrival_check<T: Scalar>(
    network: &Network<T>,
    cost: &SchedulingCost<T>,
    schedule: &PathSchedule<T>,
) -> Result<Vec<DeadlineCheck>> {
    let max_lead = (schedule.horizon().clone() / cost.alpha().clone()).floor_int();
    let max_lead = max_lead.to_i64().ok_or_else(|| input("horizon too large"))?;
    let mut out = Vec::new();
    for r in 0..=max_lead {
        let lead = T::from_int(r);
        let mut continuous = T::zero();
        for j in 1..=schedule.len() {
            let since = schedule.departures(j).measure_within(&-lead.clone(), &T::zero());
            continuous = continuous + schedule.amount(j).clone() * since;
        }
        let teg = TimeExpandedGraph::expand_with(network, cost, &T::one(), &-lead.clone(), &T::zero(), false)?;
        let discrete = teg.min_cost_flow(None)?.value;
        out.push(DeadlineCheck {
            lead_time: lead.to_string(),
            matches: continuous == discrete,
            continuous: continuous.to_string(),
            discrete: discrete.to_string(),
        });
    }
    Ok(out)
}
