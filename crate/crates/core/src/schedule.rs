//! Departure schedules for the decomposition paths, the value curve
//! `C ↦ Q(C)` and its exact inversion.

use serde_json::{json, Value};

use crate::cost::SchedulingCost;
use crate::error::{input, Error, Result};
use crate::interval::IntervalUnion;
use crate::network::Network;
use crate::pwl::Pwl;
use crate::scalar::Scalar;
use crate::ssp::SspDecomposition;

/// Per path `j`: the arrival set `A_j` at the sink, the departure set
/// `S_j = A_j − d_{j-1}(s,t)`, the path length and its amount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSchedule<T> {
    horizon: T,
    delta: T,
    arrivals: Vec<IntervalUnion<T>>,
    delays: Vec<T>,
    amounts: Vec<T>,
}

impl<T: Scalar> PathSchedule<T> {
    /// Maximal departure sets for cost horizon `C`: path `j` departs whenever
    /// `αd_{j-1}(s,t) + ρ(ξ + d_{j-1}(s,t)) <= C`.
    pub fn for_horizon(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>, c: &T) -> Result<Self> {
        Self::interpolated(decomp, cost, c, &T::one())
    }

    /// Sets interpolated between the minimal (closure of the strict
    /// sublevel set) and maximal (sublevel set) choice at horizon `C`.
    pub fn interpolated(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>, c: &T, delta: &T) -> Result<Self> {
        if c.is_negative() {
            return Err(input("cost horizon must be nonnegative"));
        }
        if delta.is_negative() || delta > &T::one() {
            return Err(input("interpolation parameter must lie in [0, 1]"));
        }
        let mut arrivals = Vec::with_capacity(decomp.len());
        let mut delays = Vec::with_capacity(decomp.len());
        let mut amounts = Vec::with_capacity(decomp.len());
        for j in 1..=decomp.len() {
            let d = decomp.path_delay(j);
            let level = c.clone() - cost.alpha().clone() * d.clone();
            let set = if level.is_negative() {
                IntervalUnion::empty()
            } else {
                let max = cost.sublevel(&level)?;
                if delta.is_one() {
                    max
                } else {
                    let min = cost.strict_sublevel_closure(&level)?;
                    interpolate(&min, &max, delta)
                }
            };
            arrivals.push(set);
            delays.push(d);
            amounts.push(decomp.amount(j).clone());
        }
        Ok(Self {
            horizon: c.clone(),
            delta: delta.clone(),
            arrivals,
            delays,
            amounts,
        })
    }

    /// Schedule of value exactly `q`: minimal horizon from the exact value
    /// curve, with interpolation when `q` falls into a jump of the curve.
    pub fn for_demand(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>, q: &T) -> Result<Self> {
        let (c, delta) = horizon_for_demand(decomp, cost, q)?;
        let schedule = Self::interpolated(decomp, cost, &c, &delta)?;
        if schedule.value() != *q {
            return Err(crate::error::invariant(format!(
                "schedule value {} differs from demand {q}",
                schedule.value()
            )));
        }
        Ok(schedule)
    }

    pub fn horizon(&self) -> &T {
        &self.horizon
    }

    /// Interpolation parameter; 1 means maximal sets.
    pub fn delta(&self) -> &T {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Arrival set `A_j` at the sink, `j` in `1..=m`.
    pub fn arrivals(&self, j: usize) -> &IntervalUnion<T> {
        &self.arrivals[j - 1]
    }

    /// Departure set `S_j` at the source, `j` in `1..=m`.
    pub fn departures(&self, j: usize) -> IntervalUnion<T> {
        self.arrivals[j - 1].shift(&-self.delays[j - 1].clone())
    }

    /// `d_{j-1}(s,t)`.
    pub fn delay(&self, j: usize) -> &T {
        &self.delays[j - 1]
    }

    pub fn amount(&self, j: usize) -> &T {
        &self.amounts[j - 1]
    }

    /// `Σ_j x_j |S_j|`.
    pub fn value(&self) -> T {
        self.arrivals
            .iter()
            .zip(&self.amounts)
            .fold(T::zero(), |acc, (a, x)| acc + x.clone() * a.measure())
    }

    /// `Σ_j x_j (α d_j |S_j| + ∫_{A_j} ρ)`.
    pub fn path_cost(&self, cost: &SchedulingCost<T>) -> Result<T> {
        let mut total = T::zero();
        for j in 1..=self.len() {
            let a = self.arrivals(j);
            let mut c = cost.alpha().clone() * self.delay(j).clone() * a.measure();
            for (l, r) in a.parts() {
                c = c + cost
                    .integral(l, r)
                    .into_finite()
                    .ok_or_else(|| crate::error::invariant("path scheduled where ρ is infinite"))?;
            }
            total = total + self.amount(j).clone() * c;
        }
        Ok(total)
    }

    pub fn to_json(&self, decomp: &SspDecomposition<T>, network: &Network<T>) -> Value {
        let paths: Vec<Value> = (1..=self.len())
            .map(|j| {
                json!({
                    "arcs": decomp.path(j).iter().map(|s| json!({
                        "arc_id": network.arc(s.arc).name,
                        "forward": s.forward,
                    })).collect::<Vec<_>>(),
                    "amount": self.amount(j).to_string(),
                    "delay": self.delay(j).to_string(),
                    "intervals": self.departures(j).to_strings(),
                    "arrival_intervals": self.arrivals(j).to_strings(),
                })
            })
            .collect();
        json!({
            "horizon": self.horizon.to_string(),
            "delta": self.delta.to_string(),
            "value": self.value().to_string(),
            "paths": paths,
        })
    }
}

/// Grows `min ⊆ max` toward `max` by the fraction `delta` of every gap:
/// a gap left of the first minimal part grows leftward from it, every other
/// gap (and a component without minimal part) fills from its left end.
pub(crate) fn interpolate<T: Scalar>(min: &IntervalUnion<T>, max: &IntervalUnion<T>, delta: &T) -> IntervalUnion<T> {
    let mut raw: Vec<(T, T)> = min.parts().to_vec();
    for (ul, ur) in max.parts() {
        let inner: Vec<&(T, T)> = min.parts().iter().filter(|(l, r)| l >= ul && r <= ur).collect();
        let grow_right = |from: &T, to: &T| (from.clone(), from.clone() + delta.clone() * (to.clone() - from.clone()));
        match inner.first() {
            None => raw.push(grow_right(ul, ur)),
            Some((first_l, _)) => {
                let len = first_l.clone() - ul.clone();
                raw.push((first_l.clone() - delta.clone() * len, first_l.clone()));
                for w in inner.windows(2) {
                    raw.push(grow_right(&w[0].1, &w[1].0));
                }
                let last_r = &inner[inner.len() - 1].1;
                raw.push(grow_right(last_r, ur));
            }
        }
    }
    raw.retain(|(l, r)| l <= r);
    IntervalUnion::from_intervals(raw)
}

/// `Q(C)` for one horizon.
pub fn value_of_horizon<T: Scalar>(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>, c: &T) -> Result<T> {
    Ok(PathSchedule::for_horizon(decomp, cost, c)?.value())
}

/// The exact value curve `C ↦ Q(C) = Σ_j x_j W(C − αd_{j-1}(s,t))` where
/// `W` is the sublevel measure of `ρ`. Right-continuous; jumps occur at
/// levels of flat pieces.
pub fn value_curve<T: Scalar>(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>) -> Result<Pwl<T>> {
    let w = cost.sublevel_measure()?;
    let mut total = Pwl::zero();
    for j in 1..=decomp.len() {
        let offset = cost.alpha().clone() * decomp.path_delay(j);
        total = total.add(&w.shift(&-offset).scale(decomp.amount(j)));
    }
    Ok(total)
}

/// Minimal `C >= 0` with `Q(C) >= q` and the interpolation parameter `δ`
/// that hits `q` exactly when `q` lies inside a jump at `C`.
pub fn horizon_for_demand<T: Scalar>(decomp: &SspDecomposition<T>, cost: &SchedulingCost<T>, q: &T) -> Result<(T, T)> {
    if q.is_negative() {
        return Err(input("demand must be nonnegative"));
    }
    let curve = value_curve(decomp, cost)?;
    let c = invert_curve(&curve, q)?;
    let at = curve.eval(&c);
    let before = if c.is_zero() { T::zero() } else { curve.left_limit(&c) };
    let delta = if at == *q || at == before {
        T::one()
    } else {
        (q.clone() - before.clone()) / (at - before)
    };
    Ok((c, delta))
}

fn invert_curve<T: Scalar>(curve: &Pwl<T>, q: &T) -> Result<T> {
    let zero = T::zero();
    if curve.eval(&zero) >= *q {
        return Ok(zero);
    }
    let mut xs: Vec<T> = curve.breaks().iter().filter(|b| b.is_positive()).cloned().collect();
    xs.insert(0, zero);
    for k in 0..xs.len() {
        let lo = &xs[k];
        let piece = curve.piece_right_of(lo);
        if let Some(hi) = xs.get(k + 1) {
            if piece.eval(hi) >= *q && piece.slope.is_positive() {
                let c = lo.clone() + (q.clone() - piece.eval(lo)) / piece.slope.clone();
                if &c < hi {
                    return Ok(c);
                }
            }
            if curve.eval(hi) >= *q {
                return Ok(hi.clone());
            }
        } else if piece.slope.is_positive() {
            return Ok(lo.clone() + (q.clone() - piece.eval(lo)) / piece.slope.clone());
        }
    }
    Err(Error::DemandInfeasible(format!(
        "demand {q} exceeds the largest value {} reachable at any cost horizon",
        curve.right_limit(xs.last().expect("nonempty"))
    )))
}

/// Rational bisection on `Q(C)` until the bracket is at most `tol` wide;
/// returns the upper end of the bracket. Diagnostic cross-check only.
pub fn horizon_by_bisection<T: Scalar>(
    decomp: &SspDecomposition<T>,
    cost: &SchedulingCost<T>,
    q: &T,
    tol: &T,
) -> Result<T> {
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut doublings = 0;
    while value_of_horizon(decomp, cost, &hi)? < *q {
        lo = hi.clone();
        hi = hi * T::two();
        doublings += 1;
        if doublings > 200 {
            return Err(Error::DemandInfeasible(format!("no horizon reaches demand {q}")));
        }
    }
    if value_of_horizon(decomp, cost, &lo)? >= *q {
        return Ok(lo);
    }
    while hi.clone() - lo.clone() > *tol {
        let mid = T::midpoint(&lo, &hi);
        if value_of_horizon(decomp, cost, &mid)? >= *q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{CostPiece, SchedulingCost};
    use crate::fixtures::{single_arc, two_route};
    use crate::pwl::Affine;
    use num_rational::BigRational as Q;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn r(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn standard() -> SchedulingCost<Q> {
        SchedulingCost::standard(q(1), r(1, 2), Some(q(2))).unwrap()
    }

    fn flat_right() -> SchedulingCost<Q> {
        SchedulingCost::from_pieces(
            q(1),
            vec![q(0), q(1), q(2)],
            vec![
                CostPiece::Linear(Affine::new(q(-1), q(0))),
                CostPiece::Linear(Affine::new(q(1), q(0))),
                CostPiece::Linear(Affine::constant(q(1))),
                CostPiece::Linear(Affine::new(q(1), q(-1))),
            ],
        )
        .unwrap()
    }

    fn decomp(net: &Network<Q>) -> SspDecomposition<Q> {
        SspDecomposition::compute(net).unwrap()
    }

    #[test]
    fn single_arc_schedule() {
        let d = decomp(&single_arc(1, 0));
        let s = PathSchedule::for_horizon(&d, &standard(), &q(1)).unwrap();
        assert_eq!(s.departures(1).parts(), &[(q(-2), r(1, 2))]);
        assert_eq!(s.value(), r(5, 2));
        assert_eq!(s.path_cost(&standard()).unwrap(), r(5, 4));
    }

    #[test]
    fn two_route_schedules() {
        let d = decomp(&two_route());
        let s = PathSchedule::for_horizon(&d, &standard(), &q(1)).unwrap();
        assert_eq!(s.departures(1).parts(), &[(q(-2), r(1, 2))]);
        assert_eq!(s.departures(2).parts(), &[(q(-1), q(-1))]);
        assert_eq!(s.path_cost(&standard()).unwrap(), r(5, 4));
        let s2 = PathSchedule::for_horizon(&d, &standard(), &q(2)).unwrap();
        assert_eq!(s2.departures(1).parts(), &[(q(-4), q(1))]);
        assert_eq!(s2.departures(2).parts(), &[(q(-3), r(-1, 2))]);
        assert_eq!(s2.value(), r(15, 2));
    }

    #[test]
    fn zero_horizon_has_zero_value() {
        let d = decomp(&two_route());
        assert_eq!(value_of_horizon(&d, &standard(), &q(0)).unwrap(), q(0));
    }

    #[test]
    fn demand_inversion_examples() {
        let d = decomp(&single_arc(1, 0));
        assert_eq!(horizon_for_demand(&d, &standard(), &r(5, 2)).unwrap(), (q(1), q(1)));
        assert_eq!(horizon_for_demand(&d, &standard(), &q(0)).unwrap().0, q(0));
        let f = decomp(&two_route());
        assert_eq!(horizon_for_demand(&f, &standard(), &r(15, 2)).unwrap(), (q(2), q(1)));
        let bis = horizon_by_bisection(&f, &standard(), &r(15, 2), &r(1, 1 << 20)).unwrap();
        assert!(bis >= q(2) && bis - q(2) <= r(1, 1 << 20));
    }

    #[test]
    fn curve_matches_pointwise_values() {
        let f = decomp(&two_route());
        let curve = value_curve(&f, &standard()).unwrap();
        for i in 0..40 {
            let c = r(i, 7);
            assert_eq!(curve.eval(&c), value_of_horizon(&f, &standard(), &c).unwrap());
        }
    }

    #[test]
    fn earliest_arrival_windows_end_at_zero() {
        let d = decomp(&two_route());
        let eaf = SchedulingCost::earliest_arrival(q(1)).unwrap();
        let s = PathSchedule::for_horizon(&d, &eaf, &q(3)).unwrap();
        assert_eq!(s.departures(1).parts(), &[(q(-3), q(0))]);
        assert_eq!(s.departures(2).parts(), &[(q(-3), q(-1))]);
    }

    #[test]
    fn flat_piece_interpolation() {
        let d = decomp(&single_arc(1, 0));
        let c = flat_right();
        assert_eq!(horizon_for_demand(&d, &c, &q(3)).unwrap(), (q(1), q(1)));
        assert_eq!(horizon_for_demand(&d, &c, &q(2)).unwrap(), (q(1), q(0)));
        let (h, delta) = horizon_for_demand(&d, &c, &r(5, 2)).unwrap();
        assert_eq!((h, delta.clone()), (q(1), r(1, 2)));
        let s = PathSchedule::for_demand(&d, &c, &r(5, 2)).unwrap();
        assert_eq!(s.departures(1).parts(), &[(q(-1), r(3, 2))]);
    }

    #[test]
    fn interpolation_is_affine_in_delta() {
        let min = IntervalUnion::from_intervals(vec![(q(0), q(1)), (q(3), q(4))]);
        let max = IntervalUnion::from_intervals(vec![(q(-2), q(6)), (q(8), q(9))]);
        for k in 0..=4 {
            let delta = r(k, 4);
            let m = interpolate(&min, &max, &delta).measure();
            assert_eq!(m, q(2) + delta.clone() * q(7));
            assert!(min.is_subset_of(&interpolate(&min, &max, &delta)));
            assert!(interpolate(&min, &max, &delta).is_subset_of(&max));
        }
    }

    #[test]
    fn demand_without_paths_is_infeasible() {
        let d = decomp(&single_arc(1, 0));
        let net = Network::<Q>::new(vec!["s".into(), "t".into()], vec![], "s", "t").unwrap();
        let empty = decomp(&net);
        assert!(matches!(
            horizon_for_demand(&empty, &standard(), &q(1)),
            Err(Error::DemandInfeasible(_))
        ));
        assert!(horizon_for_demand(&d, &standard(), &q(-1)).is_err());
    }
}
