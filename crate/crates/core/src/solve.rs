//! End-to-end pipeline: normalize the cost, run successive shortest paths,
//! pick the horizon, assemble and check the flow.

use crate::cost::SchedulingCost;
use crate::error::{input, invariant, Result};
use crate::flow::{primal_cost, FlowOverTime};
use crate::network::Network;
use crate::scalar::Scalar;
use crate::schedule::PathSchedule;
use crate::ssp::SspDecomposition;

/// What the caller prescribes: the amount of flow or the common cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target<T> {
    Demand(T),
    Horizon(T),
}

/// A solved instance. Times and costs refer to the normalized scheduling
/// cost (see [`SchedulingCost::normalization`]).
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub cost: SchedulingCost<T>,
    pub decomposition: SspDecomposition<T>,
    pub schedule: PathSchedule<T>,
    pub flow: FlowOverTime<T>,
    pub value: T,
    pub primal_cost: T,
}

impl<T: Scalar> Solution<T> {
    pub fn horizon(&self) -> &T {
        self.schedule.horizon()
    }
}

pub fn solve<T: Scalar>(network: &Network<T>, cost: &SchedulingCost<T>, target: &Target<T>) -> Result<Solution<T>> {
    let cost = cost.normalized();
    if !cost.has_compact_sublevels() {
        return Err(input("scheduling cost must grow without bound in both directions"));
    }
    let decomposition = SspDecomposition::compute(network)?;
    decomposition.check_lemmas()?;
    let schedule = match target {
        Target::Demand(q) => PathSchedule::for_demand(&decomposition, &cost, q)?,
        Target::Horizon(c) => PathSchedule::for_horizon(&decomposition, &cost, c)?,
    };
    let flow = FlowOverTime::assemble(network, &decomposition, &schedule)?;
    flow.check_conservation(network)?;
    let value = flow.value(network)?;
    if value != schedule.value() {
        return Err(invariant(format!(
            "assembled value {value} differs from scheduled value {}",
            schedule.value()
        )));
    }
    let primal_cost = primal_cost(network, &flow, &schedule, &cost)?;
    Ok(Solution {
        cost,
        decomposition,
        schedule,
        flow,
        value,
        primal_cost,
    })
}
