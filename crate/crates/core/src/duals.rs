//! Dual potentials, optimal tolls and the optimality certificate.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cost::{CostPiece, SchedulingCost};
use crate::flow::{FlowOverTime, JIndex};
use crate::network::{ArcId, Network, NodeId};
use crate::pwl::{cell_sample, sort_dedup, Affine, Pwl};
use crate::scalar::{Ext, Scalar};
use crate::schedule::PathSchedule;
use crate::solve::Solution;
use crate::ssp::SspDecomposition;

/// Node potentials `π_v(θ)` for one cost horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate<T> {
    horizon: T,
    potentials: Vec<Pwl<T>>,
}

/// Per-arc tolls `δ_e(θ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TollSchedule<T> {
    tolls: Vec<Pwl<T>>,
}

impl<T: Scalar> DualCertificate<T> {
    /// `π_v(θ) = max{−α d_J(v,s), C − α d_J(v,t) − ρ(θ + d_J(v,t)), 0}` with
    /// `J = J(v,θ)`; infinite distances drop their term.
    pub fn build(
        network: &Network<T>,
        decomp: &SspDecomposition<T>,
        schedule: &PathSchedule<T>,
        cost: &SchedulingCost<T>,
    ) -> Self {
        let c = schedule.horizon().clone();
        let potentials = network
            .nodes()
            .map(|v| potential(decomp, schedule, cost, &c, v))
            .collect();
        Self { horizon: c, potentials }
    }

    pub fn from_parts(horizon: T, potentials: Vec<Pwl<T>>) -> Self {
        Self { horizon, potentials }
    }

    pub fn horizon(&self) -> &T {
        &self.horizon
    }

    pub fn potential(&self, v: NodeId) -> &Pwl<T> {
        &self.potentials[v.0]
    }

    pub fn potentials(&self) -> &[Pwl<T>] {
        &self.potentials
    }

    /// Replaces one potential; used to build perturbed certificates.
    pub fn with_potential(&self, v: NodeId, pi: Pwl<T>) -> Self {
        let mut out = self.clone();
        out.potentials[v.0] = pi;
        out
    }

    pub fn to_json(&self, network: &Network<T>) -> Value {
        let nodes: Vec<Value> = network
            .nodes()
            .map(|v| {
                let mut p = self.potentials[v.0].to_json();
                p["node"] = Value::String(network.node_name(v).to_string());
                p
            })
            .collect();
        json!({"horizon": self.horizon.to_string(), "nodes": nodes})
    }

    pub fn from_json(network: &Network<T>, v: &Value) -> crate::error::Result<Self> {
        use crate::error::input;
        let horizon = crate::io::parse_scalar(&v["horizon"]).map_err(|e| input(format!("horizon: {e}")))?;
        let list = v
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| input("potentials need a `nodes` array"))?;
        let mut potentials = vec![Pwl::zero(); network.node_count()];
        for item in list {
            let name = item
                .get("node")
                .and_then(Value::as_str)
                .ok_or_else(|| input("potential entry needs `node`"))?;
            let v = network
                .node_by_name(name)
                .ok_or_else(|| input(format!("unknown node id `{name}`")))?;
            potentials[v.0] = Pwl::from_json(item)?;
        }
        Ok(Self { horizon, potentials })
    }
}

fn potential<T: Scalar>(
    decomp: &SspDecomposition<T>,
    schedule: &PathSchedule<T>,
    cost: &SchedulingCost<T>,
    c: &T,
    v: NodeId,
) -> Pwl<T> {
    let alpha = cost.alpha();
    let j_index = JIndex::new(decomp, schedule, v);
    let mut breaks: Vec<T> = j_index.breaks().to_vec();
    for j in 0..=decomp.len() {
        if let Ext::Finite(d) = decomp.to_sink(j, v) {
            breaks.extend(cost.breaks().iter().map(|b| b.clone() - d.clone()));
        }
    }
    let breaks = sort_dedup(breaks);
    let candidates = (0..=breaks.len())
        .map(|k| {
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let x = cell_sample(lo, breaks.get(k));
            let j = j_index.at(&x);
            let mut cands = vec![Affine::zero()];
            if let Ext::Finite(ds) = decomp.to_source(j, v) {
                cands.push(Affine::constant(-alpha.clone() * ds.clone()));
            }
            if let Ext::Finite(dt) = decomp.to_sink(j, v) {
                if let CostPiece::Linear(p) = cost.piece_right_of(&(x.clone() + dt.clone())) {
                    let rho = p.shift(dt);
                    cands.push(Affine::constant(c.clone() - alpha.clone() * dt.clone()).sub(&rho));
                }
            }
            cands
        })
        .collect();
    let points = breaks
        .iter()
        .map(|b| potential_at(decomp, cost, c, v, j_index.at(b), b))
        .collect();
    Pwl::envelope(breaks, candidates, points)
}

fn potential_at<T: Scalar>(
    decomp: &SspDecomposition<T>,
    cost: &SchedulingCost<T>,
    c: &T,
    v: NodeId,
    j: usize,
    theta: &T,
) -> T {
    let alpha = cost.alpha();
    let mut best = T::zero();
    if let Ext::Finite(ds) = decomp.to_source(j, v) {
        best = std::cmp::max(best, -alpha.clone() * ds.clone());
    }
    if let Ext::Finite(dt) = decomp.to_sink(j, v) {
        if let Ext::Finite(rho) = cost.evaluate(&(theta.clone() + dt.clone())) {
            best = std::cmp::max(best, c.clone() - alpha.clone() * dt.clone() - rho);
        }
    }
    best
}

impl<T: Scalar> TollSchedule<T> {
    /// `δ_vw(θ) = (π_w(θ + τ_vw) − π_v(θ) − ατ_vw)^+`.
    pub fn build(network: &Network<T>, cert: &DualCertificate<T>, alpha: &T) -> Self {
        let tolls = network
            .arc_ids()
            .map(|e| reduced_cost(network, cert, alpha, e).positive_part())
            .collect();
        Self { tolls }
    }

    pub fn toll(&self, e: ArcId) -> &Pwl<T> {
        &self.tolls[e.0]
    }

    pub fn tolls(&self) -> &[Pwl<T>] {
        &self.tolls
    }

    /// `Σ_e ν_e ∫ δ_e`.
    pub fn capacity_weighted_total(&self, network: &Network<T>) -> crate::error::Result<T> {
        let mut total = T::zero();
        for (a, d) in network.arcs().iter().zip(&self.tolls) {
            total = total + a.capacity.clone() * d.integral()?;
        }
        Ok(total)
    }

    pub fn to_json(&self, network: &Network<T>) -> Value {
        let arcs: Vec<Value> = network
            .arcs()
            .iter()
            .zip(&self.tolls)
            .map(|(a, d)| {
                let mut p = d.to_json();
                p["arc_id"] = Value::String(a.name.clone());
                p
            })
            .collect();
        json!({ "arcs": arcs })
    }

    /// `arc_id,from,to,slope,intercept` rows for plotting.
    pub fn to_csv(&self, network: &Network<T>) -> String {
        let mut out = String::from("arc_id,from,to,slope,intercept\n");
        for (a, d) in network.arcs().iter().zip(&self.tolls) {
            for (lo, hi, p) in d.cells() {
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    out.push_str(&format!("{},{lo},{hi},{},{}\n", a.name, p.slope, p.intercept));
                }
            }
        }
        out
    }
}

/// `π_w(θ + τ_vw) − π_v(θ) − ατ_vw` for arc `e = vw`.
pub fn reduced_cost<T: Scalar>(network: &Network<T>, cert: &DualCertificate<T>, alpha: &T, e: ArcId) -> Pwl<T> {
    let a = network.arc(e);
    cert.potential(a.head)
        .shift(&a.delay)
        .sub(cert.potential(a.tail))
        .add_const(&-(alpha.clone() * a.delay.clone()))
}

/// A concrete violation found by a check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub condition: String,
    pub subject: String,
    pub theta: String,
    pub detail: String,
}

/// Outcome of the four optimality conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub slope_bound: bool,
    pub residual_arcs: bool,
    pub source_potential: bool,
    pub sink_potential: bool,
    pub cells_checked: usize,
    pub witnesses: Vec<Witness>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.slope_bound && self.residual_arcs && self.source_potential && self.sink_potential
    }
}

/// A point of the open cell `(lo, hi)` where `p > 0`, if any.
fn positive_witness<T: Scalar>(p: &Affine<T>, lo: Option<&T>, hi: Option<&T>) -> Option<T> {
    if p.slope.is_zero() {
        return p.intercept.is_positive().then(|| cell_sample(lo, hi));
    }
    let root = -p.intercept.clone() / p.slope.clone();
    if p.slope.is_positive() {
        let from = match lo {
            Some(l) if l > &root => l.clone(),
            _ => root,
        };
        hi.is_none_or(|h| &from < h).then(|| cell_sample(Some(&from), hi))
    } else {
        let to = match hi {
            Some(h) if h < &root => h.clone(),
            _ => root,
        };
        lo.is_none_or(|l| l < &to).then(|| cell_sample(lo, Some(&to)))
    }
}

/// Checks the optimality conditions exactly, cell by cell:
/// (i) `θ ↦ π_v(θ) − αθ` is nonincreasing; (ii) `π_w(θ+τ) <= π_v(θ) + ατ`
/// on every residual arc at every time; (iii) `π_s ≡ 0`; (iv)
/// `π_t = (C − ρ)^+` and nothing arrives where `ρ > C`.
pub fn verify_certificate<T: Scalar>(
    network: &Network<T>,
    flow: &FlowOverTime<T>,
    cert: &DualCertificate<T>,
    cost: &SchedulingCost<T>,
) -> CertificateReport {
    let alpha = cost.alpha();
    let mut w = Vec::new();
    let mut cells = 0;
    let mut witness = |condition: &str, subject: &str, theta: &T, detail: String| {
        w.push(Witness {
            condition: condition.into(),
            subject: subject.into(),
            theta: theta.to_string(),
            detail,
        })
    };

    let mut slope_bound = true;
    for v in network.nodes() {
        let pi = cert.potential(v);
        let name = network.node_name(v);
        for (lo, hi, p) in pi.cells() {
            cells += 1;
            if &p.slope > alpha {
                slope_bound = false;
                witness(
                    "slope_bound",
                    name,
                    &cell_sample(lo, hi),
                    format!("slope {} exceeds {alpha}", p.slope),
                );
            }
        }
        for (b, val) in pi.breaks().iter().zip(pi.points()) {
            let (l, r) = (pi.left_limit(b), pi.right_limit(b));
            if &l < val || val < &r {
                slope_bound = false;
                witness(
                    "slope_bound",
                    name,
                    b,
                    format!("upward jump: left {l}, value {val}, right {r}"),
                );
            }
        }
    }

    let mut residual_arcs = true;
    for e in network.arc_ids() {
        let a = network.arc(e);
        let g = reduced_cost(network, cert, alpha, e);
        let f = flow.rate(e);
        let (breaks, g_pieces, g_points) = g.refined(f.breaks());
        let (_, f_pieces, f_points) = f.refined(g.breaks());
        for k in 0..=breaks.len() {
            cells += 1;
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let hi = breaks.get(k);
            let rate = &f_pieces[k].intercept;
            if rate < &a.capacity {
                if let Some(th) = positive_witness(&g_pieces[k], lo, hi) {
                    residual_arcs = false;
                    witness(
                        "residual_arcs",
                        &a.name,
                        &th,
                        format!("forward arc below capacity ({rate}) has positive reduced cost"),
                    );
                }
            }
            if rate.is_positive() {
                if let Some(th) = positive_witness(&g_pieces[k].scale(&-T::one()), lo, hi) {
                    residual_arcs = false;
                    witness(
                        "residual_arcs",
                        &a.name,
                        &th,
                        format!("backward arc of flow {rate} has negative reduced cost"),
                    );
                }
            }
        }
        for (b, (gv, fv)) in breaks.iter().zip(g_points.iter().zip(&f_points)) {
            if (fv < &a.capacity && gv.is_positive()) || (fv.is_positive() && gv.is_negative()) {
                residual_arcs = false;
                witness("residual_arcs", &a.name, b, format!("reduced cost {gv} at rate {fv}"));
            }
        }
    }

    let source_potential = cert.potential(network.source()).is_zero();
    if !source_potential {
        let pi = cert.potential(network.source());
        let th = pi.breaks().first().cloned().unwrap_or_else(T::zero);
        witness(
            "source_potential",
            network.node_name(network.source()),
            &th,
            "source potential is not zero".into(),
        );
    }

    let mut sink_potential = true;
    let t_name = network.node_name(network.sink());
    let expected = cost.slack_below(cert.horizon());
    let diff = cert.potential(network.sink()).sub(&expected);
    if !diff.is_zero() {
        sink_potential = false;
        let th = diff
            .breaks()
            .iter()
            .zip(diff.points())
            .find(|(_, v)| !v.is_zero())
            .map(|(b, _)| b.clone())
            .or_else(|| {
                diff.cells()
                    .find(|(_, _, p)| !p.is_zero())
                    .map(|(lo, hi, _)| cell_sample(lo, hi))
            })
            .unwrap_or_else(T::zero);
        witness(
            "sink_potential",
            t_name,
            &th,
            "sink potential differs from (C − ρ)^+".into(),
        );
    }
    let allowed = cost.sublevel(cert.horizon()).unwrap_or_default();
    let arrivals = flow.net_inflow(network, network.sink());
    for (lo, hi, p) in arrivals.cells() {
        cells += 1;
        if p.intercept.is_zero() {
            continue;
        }
        let (Some(lo), Some(hi)) = (lo, hi) else {
            sink_potential = false;
            witness(
                "sink_potential",
                t_name,
                &cell_sample(lo, hi),
                "arrivals without compact support".into(),
            );
            continue;
        };
        if let Some(th) = uncovered_point(&allowed, lo, hi) {
            sink_potential = false;
            witness(
                "sink_potential",
                t_name,
                &th,
                format!("arrival rate {} where ρ exceeds C", p.intercept),
            );
        }
    }
    for (b, v) in arrivals.breaks().iter().zip(arrivals.points()) {
        if !v.is_zero() && !allowed.contains(b) {
            sink_potential = false;
            witness(
                "sink_potential",
                t_name,
                b,
                format!("arrival rate {v} where ρ exceeds C"),
            );
        }
    }

    CertificateReport {
        slope_bound,
        residual_arcs,
        source_potential,
        sink_potential,
        cells_checked: cells,
        witnesses: w,
    }
}

/// A point of `(lo, hi)` outside `set`, if any.
fn uncovered_point<T: Scalar>(set: &crate::interval::IntervalUnion<T>, lo: &T, hi: &T) -> Option<T> {
    let mut cur = lo.clone();
    for (l, r) in set.parts() {
        if r <= &cur {
            continue;
        }
        if l > &cur {
            let end = std::cmp::min(l.clone(), hi.clone());
            return Some(T::midpoint(&cur, &end));
        }
        cur = r.clone();
        if &cur >= hi {
            return None;
        }
    }
    (&cur < hi).then(|| T::midpoint(&cur, hi))
}

/// `primal − (C·Q − Σ_e ν_e ∫δ_e)`; zero exactly for an optimal flow with a
/// valid certificate.
pub fn duality_gap<T: Scalar>(
    network: &Network<T>,
    primal: &T,
    value: &T,
    cert: &DualCertificate<T>,
    tolls: &TollSchedule<T>,
) -> crate::error::Result<T> {
    let dual = cert.horizon().clone() * value.clone() - tolls.capacity_weighted_total(network)?;
    Ok(primal.clone() - dual)
}

/// Sampled check that tolls make the flow an equilibrium.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub samples: usize,
    pub routes_checked: usize,
    pub flow_walks: usize,
    pub violations: Vec<Witness>,
}

impl EquilibriumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn random_in<T: Scalar, R: Rng>(rng: &mut R, lo: &T, hi: &T) -> T {
    let k = rng.gen_range(1..1000);
    lo.clone() + (hi.clone() - lo.clone()) * T::ratio(k, 1000)
}

/// Cost `ρ(θ_t) + α(θ_t − θ) + Σ δ_e` of following `route` from time `θ`,
/// waiting `waits[i]` before arc `i`.
pub fn route_cost<T: Scalar>(
    network: &Network<T>,
    tolls: &TollSchedule<T>,
    cost: &SchedulingCost<T>,
    route: &[ArcId],
    waits: &[T],
    theta: &T,
) -> Ext<T> {
    let mut now = theta.clone();
    let mut paid = T::zero();
    for (i, &e) in route.iter().enumerate() {
        if let Some(w) = waits.get(i) {
            now = now + w.clone();
        }
        paid = paid + tolls.toll(e).eval(&now);
        now = now + network.arc(e).delay.clone();
    }
    let travel = cost.alpha().clone() * (now.clone() - theta.clone());
    cost.evaluate(&now).add_finite(&(paid + travel))
}

fn simple_routes<T: Scalar>(network: &Network<T>, from: NodeId, limit: usize) -> Vec<Vec<ArcId>> {
    let mut out = Vec::new();
    let mut on_path = vec![false; network.node_count()];
    let mut stack = Vec::new();
    fn dfs<T: Scalar>(
        network: &Network<T>,
        u: NodeId,
        on_path: &mut Vec<bool>,
        stack: &mut Vec<ArcId>,
        out: &mut Vec<Vec<ArcId>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if u == network.sink() {
            out.push(stack.clone());
            return;
        }
        on_path[u.0] = true;
        for &e in network.out_arcs(u) {
            let w = network.arc(e).head;
            if !on_path[w.0] {
                stack.push(e);
                dfs(network, w, on_path, stack, out, limit);
                stack.pop();
            }
        }
        on_path[u.0] = false;
    }
    dfs(network, from, &mut on_path, &mut stack, &mut out, limit);
    out
}

/// For `samples` random `(v, θ)`: every simple `v`-`t` route, with and without
/// random waiting, costs at least `C − π_v(θ)`; and `samples` walks along
/// flow-carrying arcs from the source cost exactly `C`.
#[allow(clippy::too_many_arguments)]
pub fn equilibrium_check<T: Scalar, R: Rng>(
    network: &Network<T>,
    flow: &FlowOverTime<T>,
    schedule: &PathSchedule<T>,
    cert: &DualCertificate<T>,
    tolls: &TollSchedule<T>,
    cost: &SchedulingCost<T>,
    samples: usize,
    rng: &mut R,
) -> EquilibriumReport {
    let c = cert.horizon().clone();
    let mut report = EquilibriumReport {
        samples,
        routes_checked: 0,
        flow_walks: 0,
        violations: Vec::new(),
    };
    let mut all_breaks: Vec<T> = cost.breaks().to_vec();
    for f in flow.rates() {
        all_breaks.extend(f.breaks().iter().cloned());
    }
    let lo = all_breaks.iter().min().cloned().unwrap_or_else(T::zero) - T::two();
    let hi = all_breaks.iter().max().cloned().unwrap_or_else(T::zero) + T::two();
    let routes: Vec<Vec<Vec<ArcId>>> = network.nodes().map(|v| simple_routes(network, v, 64)).collect();
    let nodes: Vec<NodeId> = network.nodes().collect();

    for _ in 0..samples {
        let v = nodes[rng.gen_range(0..nodes.len())];
        let theta = random_in(rng, &lo, &hi);
        let bound = c.clone() - cert.potential(v).eval(&theta);
        for route in &routes[v.0] {
            let no_wait = vec![T::zero(); route.len()];
            let waits: Vec<T> = route
                .iter()
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        T::ratio(rng.gen_range(0..16), 8)
                    } else {
                        T::zero()
                    }
                })
                .collect();
            for w in [&no_wait, &waits] {
                report.routes_checked += 1;
                let paid = route_cost(network, tolls, cost, route, w, &theta);
                if paid < Ext::Finite(bound.clone()) {
                    report.violations.push(Witness {
                        condition: "lower_bound".into(),
                        subject: network.node_name(v).into(),
                        theta: theta.to_string(),
                        detail: format!("route cost {paid} below C − π = {bound}"),
                    });
                }
            }
        }
    }

    let active: Vec<usize> = (1..=schedule.len())
        .filter(|&j| schedule.departures(j).measure().is_positive())
        .collect();
    if active.is_empty() {
        return report;
    }
    let max_steps = 4 * network.arcs().len() + 4;
    for _ in 0..samples {
        let j = active[rng.gen_range(0..active.len())];
        let parts: Vec<(T, T)> = schedule
            .departures(j)
            .parts()
            .iter()
            .filter(|(l, r)| l < r)
            .cloned()
            .collect();
        let (l, r) = &parts[rng.gen_range(0..parts.len())];
        let start = random_in(rng, l, r);
        let mut u = network.source();
        let mut now = start.clone();
        let mut route = Vec::new();
        while u != network.sink() && route.len() < max_steps {
            let carrying: Vec<ArcId> = network
                .out_arcs(u)
                .iter()
                .copied()
                .filter(|&e| flow.rate(e).eval(&now).is_positive())
                .collect();
            if carrying.is_empty() {
                break;
            }
            let e = carrying[rng.gen_range(0..carrying.len())];
            route.push(e);
            now = now + network.arc(e).delay.clone();
            u = network.arc(e).head;
        }
        if u != network.sink() {
            report.violations.push(Witness {
                condition: "flow_walk".into(),
                subject: network.node_name(u).into(),
                theta: now.to_string(),
                detail: "flow-carrying walk from the source does not reach the sink".into(),
            });
            continue;
        }
        report.flow_walks += 1;
        let paid = route_cost(network, tolls, cost, &route, &[], &start);
        if paid != Ext::Finite(c.clone()) {
            report.violations.push(Witness {
                condition: "flow_walk".into(),
                subject: network.node_name(network.source()).into(),
                theta: start.to_string(),
                detail: format!("flow-carrying route costs {paid}, not C = {c}"),
            });
        }
    }
    report
}

/// Potentials, tolls, the condition report and the duality gap of a solved
/// instance.
#[derive(Clone, Debug)]
pub struct Certification<T> {
    pub certificate: DualCertificate<T>,
    pub tolls: TollSchedule<T>,
    pub report: CertificateReport,
    pub gap: T,
}

impl<T: Scalar> Certification<T> {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.gap.is_zero()
    }
}

pub fn certify<T: Scalar>(network: &Network<T>, solution: &Solution<T>) -> crate::error::Result<Certification<T>> {
    let certificate = DualCertificate::build(network, &solution.decomposition, &solution.schedule, &solution.cost);
    let tolls = TollSchedule::build(network, &certificate, solution.cost.alpha());
    let report = verify_certificate(network, &solution.flow, &certificate, &solution.cost);
    let gap = duality_gap(network, &solution.primal_cost, &solution.value, &certificate, &tolls)?;
    Ok(Certification {
        certificate,
        tolls,
        report,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{single_arc, two_route};
    use crate::solve::{solve, Target};
    use num_rational::BigRational as Q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn r(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn standard() -> SchedulingCost<Q> {
        SchedulingCost::standard(q(1), r(1, 2), Some(q(2))).unwrap()
    }

    fn certify(net: &Network<Q>, c: Q) -> (Solution<Q>, DualCertificate<Q>, TollSchedule<Q>) {
        let s = solve(net, &standard(), &Target::Horizon(c)).unwrap();
        let cert = DualCertificate::build(net, &s.decomposition, &s.schedule, &s.cost);
        let tolls = TollSchedule::build(net, &cert, s.cost.alpha());
        (s, cert, tolls)
    }

    #[test]
    fn two_route_certificate_passes() {
        let net = two_route::<Q>();
        let (s, cert, tolls) = certify(&net, q(2));
        assert!(cert.potential(net.source()).is_zero());
        assert_eq!(cert.potential(net.sink()), &s.cost.slack_below(&q(2)));
        let report = verify_certificate(&net, &s.flow, &cert, &s.cost);
        assert!(report.passed(), "{:?}", report.witnesses);
        let gap = duality_gap(&net, &s.primal_cost, &s.value, &cert, &tolls).unwrap();
        assert_eq!(gap, q(0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eq = equilibrium_check(&net, &s.flow, &s.schedule, &cert, &tolls, &s.cost, 200, &mut rng);
        assert!(eq.passed(), "{:?}", eq.violations);
        assert!(eq.flow_walks > 0);
    }

    #[test]
    fn two_route_node_a_potential_on_two_path_region() {
        let net = two_route::<Q>();
        let (s, cert, _) = certify(&net, q(2));
        let a = net.node_by_name("a").unwrap();
        let j = JIndex::new(&s.decomposition, &s.schedule, a);
        // on J(a,θ) = 2 the first candidate is −α·d_2(a,s) = 0
        assert_eq!(s.decomposition.to_source(2, a), &Ext::Finite(q(0)));
        for th in [r(-5, 2), q(-2), r(-3, 2)] {
            assert_eq!(j.at(&th), 2);
            assert!(cert.potential(a).eval(&th) >= q(0));
        }
    }

    #[test]
    fn single_arc_gap_is_zero() {
        let net = single_arc::<Q>(1, 0);
        let (s, cert, tolls) = certify(&net, q(1));
        assert_eq!(tolls.toll(ArcId(0)), &s.cost.slack_below(&q(1)));
        assert!(verify_certificate(&net, &s.flow, &cert, &s.cost).passed());
        assert_eq!(
            duality_gap(&net, &s.primal_cost, &s.value, &cert, &tolls).unwrap(),
            q(0)
        );
    }

    #[test]
    fn perturbed_potential_is_detected() {
        let net = two_route::<Q>();
        let (s, cert, _) = certify(&net, q(2));
        let t = net.sink();
        let pi = cert.potential(t);
        let bump = Pwl::from_parts(
            vec![q(-1), r(-1, 2)],
            vec![Affine::zero(), Affine::constant(r(1, 10)), Affine::zero()],
            vec![q(0), q(0)],
        );
        let bad = cert.with_potential(t, pi.add(&bump));
        let report = verify_certificate(&net, &s.flow, &bad, &s.cost);
        assert!(!report.passed());
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn arrivals_outside_sublevel_are_detected() {
        let net = single_arc::<Q>(1, 0);
        let (s, cert, _) = certify(&net, q(1));
        let late = Pwl::indicator(&crate::interval::IntervalUnion::single(q(3), q(4)), q(1));
        let flow = FlowOverTime::from_rates(&net, vec![s.flow.rate(ArcId(0)).add(&late)]).unwrap();
        let report = verify_certificate(&net, &flow, &cert, &s.cost);
        assert!(!report.sink_potential);
    }

    #[test]
    fn suboptimal_flow_has_positive_gap() {
        // move everything P_1 sends over g onto f instead
        let net = two_route::<Q>();
        let (s, cert, tolls) = certify(&net, q(2));
        let f = net.arc_by_name("f").unwrap();
        let mut rates = s.flow.rates().to_vec();
        let g = net.arc_by_name("g").unwrap();
        let shifted = rates[g.0].clone();
        rates[g.0] = Pwl::zero();
        rates[f.0] = rates[f.0].add(&shifted);
        let bad = FlowOverTime::from_rates(&net, rates).unwrap();
        let arrivals_cost = bad.arc_cost(&net, &s.cost).unwrap();
        let gap = duality_gap(&net, &arrivals_cost, &bad.value(&net).unwrap(), &cert, &tolls).unwrap();
        assert!(gap > q(0));
    }

    #[test]
    fn zero_horizon_certificate() {
        let net = two_route::<Q>();
        let (s, cert, tolls) = certify(&net, q(0));
        assert!(verify_certificate(&net, &s.flow, &cert, &s.cost).passed());
        assert_eq!(
            duality_gap(&net, &s.primal_cost, &s.value, &cert, &tolls).unwrap(),
            q(0)
        );
    }

    #[test]
    fn late_departure_on_second_path_costs_more() {
        let net = two_route::<Q>();
        let (s, _, tolls) = certify(&net, q(2));
        let route = [net.arc_by_name("e").unwrap(), net.arc_by_name("f").unwrap()];
        let inside = route_cost(&net, &tolls, &s.cost, &route, &[], &q(-2));
        assert_eq!(inside, Ext::Finite(q(2)));
        let outside = route_cost(&net, &tolls, &s.cost, &route, &[], &q(0));
        assert!(outside > Ext::Finite(q(2)));
    }
}
