//! Assembly of the flow over time from a path schedule, the J-index
//! characterization and the primal objective.

use serde_json::{json, Value};

use crate::cost::SchedulingCost;
use crate::error::{input, invariant, Result};
use crate::interval::IntervalUnion;
use crate::network::{ArcId, Network, NodeId};
use crate::pwl::Pwl;
use crate::scalar::{Ext, Scalar};
use crate::schedule::PathSchedule;
use crate::ssp::SspDecomposition;

/// `θ ↦ J(v,θ) = max{j : θ + d_{j-1}(v,t) ∈ A_j}` (0 if no such `j`) as a
/// step function.
#[derive(Clone, Debug)]
pub struct JIndex<T> {
    node: NodeId,
    steps: Pwl<T>,
}

impl<T: Scalar> JIndex<T> {
    pub fn new(decomp: &SspDecomposition<T>, schedule: &PathSchedule<T>, v: NodeId) -> Self {
        let mut steps = Pwl::zero();
        for j in 1..=decomp.len() {
            if let Ext::Finite(d) = decomp.to_sink(j - 1, v) {
                let window = schedule.arrivals(j).shift(&-d.clone());
                steps = steps.max_with(&Pwl::indicator(&window, T::from_int(j as i64)));
            }
        }
        Self { node: v, steps }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn at(&self, theta: &T) -> usize {
        self.steps
            .eval(theta)
            .to_usize()
            .expect("stage indices are small integers")
    }

    /// Breakpoints of the step function.
    pub fn breaks(&self) -> &[T] {
        self.steps.breaks()
    }

    /// `{θ : J(v,θ) >= j}`.
    pub fn at_least(&self, j: usize) -> IntervalUnion<T> {
        let level = T::from_int(j as i64);
        let mut raw = Vec::new();
        for (lo, hi, p) in self.steps.cells() {
            if p.intercept >= level {
                if let (Some(l), Some(h)) = (lo, hi) {
                    raw.push((l.clone(), h.clone()));
                }
            }
        }
        for (b, v) in self.steps.breaks().iter().zip(self.steps.points()) {
            if *v >= level {
                raw.push((b.clone(), b.clone()));
            }
        }
        IntervalUnion::from_intervals(raw)
    }
}

/// Exact piecewise-constant arc inflow rates.
#[derive(Clone, Debug)]
pub struct FlowOverTime<T> {
    rates: Vec<Pwl<T>>,
}

impl<T: Scalar> FlowOverTime<T> {
    pub fn from_rates(network: &Network<T>, rates: Vec<Pwl<T>>) -> Result<Self> {
        if rates.len() != network.arcs().len() {
            return Err(input("one rate function per arc required"));
        }
        for (a, f) in network.arcs().iter().zip(&rates) {
            if !f.pieces().iter().all(|p| p.slope.is_zero()) {
                return Err(input(format!("rate on arc `{}` is not piecewise constant", a.name)));
            }
            if !f.has_compact_support() {
                return Err(input(format!("rate on arc `{}` lacks compact support", a.name)));
            }
        }
        Ok(Self { rates })
    }

    /// Superposes `±x_j` along every path during its departure set shifted
    /// to the time the path reaches each arc.
    pub fn assemble(network: &Network<T>, decomp: &SspDecomposition<T>, schedule: &PathSchedule<T>) -> Result<Self> {
        let mut rates = vec![Pwl::zero(); network.arcs().len()];
        for j in 1..=decomp.len() {
            let departures = schedule.departures(j);
            if departures.is_empty() {
                continue;
            }
            let x = schedule.amount(j).clone();
            let mut offset = T::zero();
            for step in decomp.path(j) {
                let next = offset.clone() + step.delay(network);
                let (at, sign) = if step.forward {
                    (&offset, x.clone())
                } else {
                    (&next, -x.clone())
                };
                let window = departures.shift(at);
                let e = &mut rates[step.arc.0];
                *e = e.add(&Pwl::indicator(&window, sign));
                offset = next;
            }
        }
        let flow = Self { rates };
        flow.check_capacity(network)?;
        Ok(flow)
    }

    pub fn rate(&self, e: ArcId) -> &Pwl<T> {
        &self.rates[e.0]
    }

    pub fn rates(&self) -> &[Pwl<T>] {
        &self.rates
    }

    /// Every rate lies in `[0, ν_e]`, including values at breakpoints.
    pub fn check_capacity(&self, network: &Network<T>) -> Result<()> {
        for (a, f) in network.arcs().iter().zip(&self.rates) {
            let values = f.pieces().iter().map(|p| &p.intercept).chain(f.points());
            for v in values {
                if v.is_negative() || v > &a.capacity {
                    return Err(invariant(format!(
                        "rate {v} on arc `{}` outside [0, {}]",
                        a.name, a.capacity
                    )));
                }
            }
        }
        Ok(())
    }

    /// `∇f_v(θ) = Σ_{e into v} f_e(θ − τ_e) − Σ_{e out of v} f_e(θ)`.
    pub fn net_inflow(&self, network: &Network<T>, v: NodeId) -> Pwl<T> {
        let mut total = Pwl::zero();
        for &e in network.in_arcs(v) {
            total = total.add(&self.rates[e.0].shift(&-network.arc(e).delay.clone()));
        }
        for &e in network.out_arcs(v) {
            total = total.sub(&self.rates[e.0]);
        }
        total
    }

    /// No waiting: `∇f_v ≡ 0` at every node other than `s` and `t`.
    pub fn check_conservation(&self, network: &Network<T>) -> Result<()> {
        for v in network.nodes() {
            if v == network.source() || v == network.sink() {
                continue;
            }
            let nabla = self.net_inflow(network, v);
            if !nabla.is_zero() {
                return Err(invariant(format!(
                    "flow is not conserved at node `{}`",
                    network.node_name(v)
                )));
            }
        }
        Ok(())
    }

    /// `∫ ∇f_t`.
    pub fn value(&self, network: &Network<T>) -> Result<T> {
        self.net_inflow(network, network.sink()).integral()
    }

    /// `f_vw(θ) = f^{(J(v,θ))}_vw` at every breakpoint of either side, at
    /// every cell midpoint and at the extra sample times.
    pub fn check_j_characterization(
        &self,
        network: &Network<T>,
        decomp: &SspDecomposition<T>,
        schedule: &PathSchedule<T>,
        extra: &[T],
    ) -> Result<usize> {
        let mut checked = 0;
        let indices: Vec<JIndex<T>> = network.nodes().map(|v| JIndex::new(decomp, schedule, v)).collect();
        for e in network.arc_ids() {
            let j = &indices[network.arc(e).tail.0];
            let mut times: Vec<T> = j.breaks().to_vec();
            times.extend(self.rates[e.0].breaks().iter().cloned());
            times.extend(extra.iter().cloned());
            let mut grid = crate::pwl::sort_dedup(times.clone());
            for w in grid.clone().windows(2) {
                grid.push(T::midpoint(&w[0], &w[1]));
            }
            if let (Some(lo), Some(hi)) = (times.iter().min(), times.iter().max()) {
                grid.push(lo.clone() - T::one());
                grid.push(hi.clone() + T::one());
            }
            for theta in grid {
                let stage = j.at(&theta);
                let want = decomp.stage(stage).get(e);
                let got = self.rates[e.0].eval(&theta);
                if &got != want {
                    return Err(invariant(format!(
                        "arc `{}` at {theta}: rate {got} but stage {stage} flow {want}",
                        network.arc(e).name
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Arc-based objective `∫ρ ∇f_t + α Σ_e τ_e ∫ f_e`.
    pub fn arc_cost(&self, network: &Network<T>, cost: &SchedulingCost<T>) -> Result<T> {
        let nabla = self.net_inflow(network, network.sink());
        let mut total = T::zero();
        for (lo, hi, p) in nabla.cells() {
            if p.intercept.is_zero() {
                continue;
            }
            let (Some(lo), Some(hi)) = (lo, hi) else {
                return Err(invariant("sink inflow without compact support"));
            };
            let integral = cost
                .integral(lo, hi)
                .into_finite()
                .ok_or_else(|| invariant("flow arrives where the scheduling cost is infinite"))?;
            total = total + p.intercept.clone() * integral;
        }
        for (a, f) in network.arcs().iter().zip(&self.rates) {
            total = total + cost.alpha().clone() * a.delay.clone() * f.integral()?;
        }
        Ok(total)
    }

    pub fn to_json(&self, network: &Network<T>) -> Value {
        let arcs: Vec<Value> = network
            .arcs()
            .iter()
            .zip(&self.rates)
            .map(|(a, f)| {
                let pieces: Vec<Value> = f
                    .cells()
                    .filter_map(|(lo, hi, p)| {
                        let (lo, hi) = (lo?, hi?);
                        (!p.is_zero()).then(
                            || json!({"from": lo.to_string(), "to": hi.to_string(), "rate": p.intercept.to_string()}),
                        )
                    })
                    .collect();
                let points: Vec<Value> = f
                    .breaks()
                    .iter()
                    .zip(f.points())
                    .map(|(b, v)| json!({"at": b.to_string(), "value": v.to_string()}))
                    .collect();
                json!({"arc_id": a.name, "pieces": pieces, "points": points})
            })
            .collect();
        json!({ "arcs": arcs })
    }

    pub fn from_json(network: &Network<T>, v: &Value) -> Result<Self> {
        let list = v
            .get("arcs")
            .and_then(Value::as_array)
            .ok_or_else(|| input("flow needs an `arcs` array"))?;
        let mut rates = vec![Pwl::zero(); network.arcs().len()];
        for item in list {
            let name = item
                .get("arc_id")
                .and_then(Value::as_str)
                .ok_or_else(|| input("flow entry needs `arc_id`"))?;
            let e = network
                .arc_by_name(name)
                .ok_or_else(|| input(format!("unknown arc id `{name}`")))?;
            rates[e.0] = Pwl::from_json(item)?;
        }
        Self::from_rates(network, rates)
    }

    /// `arc_id,from,to,rate` rows for plotting.
    pub fn to_csv(&self, network: &Network<T>) -> String {
        let mut out = String::from("arc_id,from,to,rate\n");
        for (a, f) in network.arcs().iter().zip(&self.rates) {
            for (lo, hi, p) in f.cells() {
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    out.push_str(&format!("{},{lo},{hi},{}\n", a.name, p.intercept));
                }
            }
        }
        out
    }
}

/// Exact objective computed arc-wise and path-wise; the two must agree.
pub fn primal_cost<T: Scalar>(
    network: &Network<T>,
    flow: &FlowOverTime<T>,
    schedule: &PathSchedule<T>,
    cost: &SchedulingCost<T>,
) -> Result<T> {
    let by_arcs = flow.arc_cost(network, cost)?;
    let by_paths = schedule.path_cost(cost)?;
    if by_arcs != by_paths {
        return Err(invariant(format!(
            "arc-based cost {by_arcs} differs from path-based cost {by_paths}"
        )));
    }
    Ok(by_arcs)
}
