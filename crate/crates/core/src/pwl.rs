//! Exact piecewise-linear functions on the real line.
//!
//! A [`Pwl`] is given by strictly increasing breakpoints `b_0 < ... < b_{n-1}`,
//! one affine piece per open cell (`n + 1` cells including both unbounded
//! tails) and an explicit value at every breakpoint. Storing breakpoint values
//! separately lets the same type hold step functions built from closed
//! intervals and functions with jump discontinuities, with exact point
//! semantics.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::error::{input, invariant, Result};
use crate::interval::IntervalUnion;
use crate::scalar::Scalar;

/// `x ↦ slope·x + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> Affine<T> {
    pub fn new(slope: T, intercept: T) -> Self {
        Self { slope, intercept }
    }

    pub fn constant(c: T) -> Self {
        Self::new(T::zero(), c)
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// The affine function through `(x0, y0)` and `(x1, y1)`, `x0 != x1`.
    pub fn through(x0: &T, y0: &T, x1: &T, y1: &T) -> Self {
        let slope = (y1.clone() - y0.clone()) / (x1.clone() - x0.clone());
        let intercept = y0.clone() - slope.clone() * x0.clone();
        Self::new(slope, intercept)
    }

    pub fn eval(&self, x: &T) -> T {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.slope.is_zero() && self.intercept.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.slope.clone() + o.slope.clone(),
            self.intercept.clone() + o.intercept.clone(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(
            self.slope.clone() - o.slope.clone(),
            self.intercept.clone() - o.intercept.clone(),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.slope.clone() * c.clone(), self.intercept.clone() * c.clone())
    }

    pub fn add_const(&self, c: &T) -> Self {
        Self::new(self.slope.clone(), self.intercept.clone() + c.clone())
    }

    /// `x ↦ self(x + d)`.
    pub fn shift(&self, d: &T) -> Self {
        Self::new(
            self.slope.clone(),
            self.intercept.clone() + self.slope.clone() * d.clone(),
        )
    }

    /// Abscissa where the two lines meet, if they are not parallel.
    pub fn crossing(&self, o: &Self) -> Option<T> {
        let ds = self.slope.clone() - o.slope.clone();
        if ds.is_zero() {
            None
        } else {
            Some((o.intercept.clone() - self.intercept.clone()) / ds)
        }
    }

    /// `∫_a^b self`.
    pub fn integral(&self, a: &T, b: &T) -> T {
        let width = b.clone() - a.clone();
        (self.eval(a) + self.eval(b)) * width / T::two()
    }
}

/// Position of an abscissa relative to the breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    /// Exactly on breakpoint `i`.
    Point(usize),
    /// Inside open cell `k` (between breakpoints `k-1` and `k`).
    Cell(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pwl<T> {
    breaks: Vec<T>,
    pieces: Vec<Affine<T>>,
    points: Vec<T>,
}

/// A representative abscissa strictly inside the cell `(lo, hi)`.
pub(crate) fn cell_sample<T: Scalar>(lo: Option<&T>, hi: Option<&T>) -> T {
    match (lo, hi) {
        (Some(l), Some(h)) => T::midpoint(l, h),
        (Some(l), None) => l.clone() + T::one(),
        (None, Some(h)) => h.clone() - T::one(),
        (None, None) => T::zero(),
    }
}

fn sorted_union<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Less => {
                    i += 1;
                    x
                }
                Ordering::Greater => {
                    j += 1;
                    y
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(x), None) => {
                i += 1;
                x
            }
            (None, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}

/// Sorts and deduplicates a list of abscissae.
pub(crate) fn sort_dedup<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl<T: Scalar> Default for Pwl<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Pwl<T> {
    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self {
            breaks: Vec::new(),
            pieces: vec![Affine::constant(c)],
            points: Vec::new(),
        }
    }

    /// Builds a function from raw parts and canonicalizes it.
    ///
    /// Panics if the lengths are inconsistent or breakpoints are not strictly
    /// increasing.
    pub fn from_parts(breaks: Vec<T>, pieces: Vec<Affine<T>>, points: Vec<T>) -> Self {
        assert_eq!(pieces.len(), breaks.len() + 1, "one piece per cell");
        assert_eq!(points.len(), breaks.len(), "one value per breakpoint");
        assert!(
            breaks.windows(2).all(|w| w[0] < w[1]),
            "breakpoints must be strictly increasing"
        );
        Self { breaks, pieces, points }.canonical()
    }

    /// Builds the pointwise maximum of per-cell affine candidates, inserting
    /// the crossing points of the upper envelope as new breakpoints.
    /// `point_value` supplies the value at every final breakpoint that lies on
    /// one of the original `breaks`; values at inserted crossings come from
    /// the (continuous) envelope.
    pub fn envelope(breaks: Vec<T>, candidates: Vec<Vec<Affine<T>>>, points: Vec<T>) -> Self {
        assert_eq!(candidates.len(), breaks.len() + 1);
        assert_eq!(points.len(), breaks.len());
        let mut out_breaks = Vec::new();
        let mut out_pieces = Vec::new();
        let mut out_points = Vec::new();
        for (k, cands) in candidates.iter().enumerate() {
            assert!(!cands.is_empty(), "every cell needs a candidate");
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let hi = breaks.get(k);
            let mut cuts = Vec::new();
            for (i, a) in cands.iter().enumerate() {
                for b in &cands[i + 1..] {
                    if let Some(x) = a.crossing(b) {
                        let inside = lo.is_none_or(|l| &x > l) && hi.is_none_or(|h| &x < h);
                        if inside {
                            cuts.push(x);
                        }
                    }
                }
            }
            let cuts = sort_dedup(cuts);
            let mut sub_lo = lo.cloned();
            for idx in 0..=cuts.len() {
                let sub_hi = cuts.get(idx).cloned().or_else(|| hi.cloned());
                let x = cell_sample(sub_lo.as_ref(), sub_hi.as_ref());
                let best = cands
                    .iter()
                    .max_by(|a, b| a.eval(&x).cmp(&b.eval(&x)))
                    .expect("nonempty")
                    .clone();
                out_pieces.push(best.clone());
                if let Some(c) = cuts.get(idx) {
                    out_breaks.push(c.clone());
                    out_points.push(best.eval(c));
                }
                sub_lo = sub_hi;
            }
            if let Some(h) = hi {
                out_breaks.push(h.clone());
                out_points.push(points[k].clone());
            }
        }
        Self::from_parts(out_breaks, out_pieces, out_points)
    }

    /// Step function equal to `value` on every interval of `set` (closed)
    /// and zero elsewhere.
    pub fn indicator(set: &IntervalUnion<T>, value: T) -> Self {
        let mut breaks = Vec::new();
        let mut pieces = vec![Affine::zero()];
        let mut points = Vec::new();
        for (l, r) in set.parts() {
            breaks.push(l.clone());
            points.push(value.clone());
            if l != r {
                pieces.push(Affine::constant(value.clone()));
                breaks.push(r.clone());
                points.push(value.clone());
            }
            pieces.push(Affine::zero());
        }
        Self::from_parts(breaks, pieces, points)
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Affine<T>] {
        &self.pieces
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Open cells as `(lo, hi, piece)`; `None` bounds are infinite.
    pub fn cells(&self) -> impl Iterator<Item = (Option<&T>, Option<&T>, &Affine<T>)> + '_ {
        self.pieces.iter().enumerate().map(move |(k, p)| {
            let lo = if k == 0 { None } else { Some(&self.breaks[k - 1]) };
            (lo, self.breaks.get(k), p)
        })
    }

    pub fn locate(&self, x: &T) -> Loc {
        match self.breaks.binary_search(x) {
            Ok(i) => Loc::Point(i),
            Err(k) => Loc::Cell(k),
        }
    }

    pub fn eval(&self, x: &T) -> T {
        match self.locate(x) {
            Loc::Point(i) => self.points[i].clone(),
            Loc::Cell(k) => self.pieces[k].eval(x),
        }
    }

    pub fn left_limit(&self, x: &T) -> T {
        match self.locate(x) {
            Loc::Point(i) => self.pieces[i].eval(x),
            Loc::Cell(k) => self.pieces[k].eval(x),
        }
    }

    pub fn right_limit(&self, x: &T) -> T {
        match self.locate(x) {
            Loc::Point(i) => self.pieces[i + 1].eval(x),
            Loc::Cell(k) => self.pieces[k].eval(x),
        }
    }

    /// The piece governing the cell just right of `x`.
    pub fn piece_right_of(&self, x: &T) -> &Affine<T> {
        match self.locate(x) {
            Loc::Point(i) => &self.pieces[i + 1],
            Loc::Cell(k) => &self.pieces[k],
        }
    }

    /// The piece governing the cell just left of `x`.
    pub fn piece_left_of(&self, x: &T) -> &Affine<T> {
        match self.locate(x) {
            Loc::Point(i) => &self.pieces[i],
            Loc::Cell(k) => &self.pieces[k],
        }
    }

    /// The piece active on the open cell `(lo, hi)`, which must not contain
    /// a breakpoint of `self`.
    fn piece_on(&self, lo: Option<&T>, hi: Option<&T>) -> &Affine<T> {
        match self.locate(&cell_sample(lo, hi)) {
            Loc::Cell(k) => &self.pieces[k],
            Loc::Point(i) => &self.pieces[i + 1],
        }
    }

    /// Applies an affine-preserving binary operation cell by cell.
    pub fn zip_with(
        &self,
        other: &Self,
        piece_op: impl Fn(&Affine<T>, &Affine<T>) -> Affine<T>,
        point_op: impl Fn(T, T) -> T,
    ) -> Self {
        let breaks = sorted_union(&self.breaks, &other.breaks);
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for k in 0..=breaks.len() {
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let hi = breaks.get(k);
            pieces.push(piece_op(self.piece_on(lo, hi), other.piece_on(lo, hi)));
        }
        let points = breaks.iter().map(|b| point_op(self.eval(b), other.eval(b))).collect();
        Self::from_parts(breaks, pieces, points)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, Affine::add, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, Affine::sub, |a, b| a - b)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_parts(
            self.breaks.clone(),
            self.pieces.iter().map(|p| p.scale(c)).collect(),
            self.points.iter().map(|v| v.clone() * c.clone()).collect(),
        )
    }

    pub fn add_const(&self, c: &T) -> Self {
        Self::from_parts(
            self.breaks.clone(),
            self.pieces.iter().map(|p| p.add_const(c)).collect(),
            self.points.iter().map(|v| v.clone() + c.clone()).collect(),
        )
    }

    /// `x ↦ self(x + d)`.
    pub fn shift(&self, d: &T) -> Self {
        Self {
            breaks: self.breaks.iter().map(|b| b.clone() - d.clone()).collect(),
            pieces: self.pieces.iter().map(|p| p.shift(d)).collect(),
            points: self.points.clone(),
        }
    }

    /// Pointwise maximum.
    pub fn max_with(&self, other: &Self) -> Self {
        let breaks = sorted_union(&self.breaks, &other.breaks);
        let mut cands = Vec::with_capacity(breaks.len() + 1);
        for k in 0..=breaks.len() {
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let hi = breaks.get(k);
            cands.push(vec![self.piece_on(lo, hi).clone(), other.piece_on(lo, hi).clone()]);
        }
        let points = breaks
            .iter()
            .map(|b| std::cmp::max(self.eval(b), other.eval(b)))
            .collect();
        Self::envelope(breaks, cands, points)
    }

    /// `x ↦ max(self(x), 0)`.
    pub fn positive_part(&self) -> Self {
        self.max_with(&Self::zero())
    }

    /// Adds breakpoints (without changing the function).
    pub fn refined(&self, extra: &[T]) -> (Vec<T>, Vec<Affine<T>>, Vec<T>) {
        let breaks = sorted_union(&self.breaks, &sort_dedup(extra.to_vec()));
        let pieces = (0..=breaks.len())
            .map(|k| {
                let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
                self.piece_on(lo, breaks.get(k)).clone()
            })
            .collect();
        let points = breaks.iter().map(|b| self.eval(b)).collect();
        (breaks, pieces, points)
    }

    fn canonical(self) -> Self {
        let Self { breaks, pieces, points } = self;
        let mut out_breaks = Vec::with_capacity(breaks.len());
        let mut out_points = Vec::with_capacity(points.len());
        let mut out_pieces = Vec::with_capacity(pieces.len());
        let mut pieces = pieces.into_iter();
        out_pieces.push(pieces.next().expect("at least one piece"));
        for ((b, v), next) in breaks.into_iter().zip(points).zip(pieces) {
            let last = out_pieces.last().expect("nonempty");
            if *last == next && last.eval(&b) == v {
                continue;
            }
            out_breaks.push(b);
            out_points.push(v);
            out_pieces.push(next);
        }
        Self {
            breaks: out_breaks,
            pieces: out_pieces,
            points: out_points,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.breaks.is_empty() && self.pieces[0].is_zero()
    }

    /// Both unbounded tails are identically zero.
    pub fn has_compact_support(&self) -> bool {
        self.pieces[0].is_zero() && self.pieces[self.pieces.len() - 1].is_zero()
    }

    /// `∫_ℝ self`; requires compact support.
    pub fn integral(&self) -> Result<T> {
        if !self.has_compact_support() {
            return Err(invariant("integral of a function without compact support"));
        }
        Ok(self
            .cells()
            .filter_map(|(lo, hi, p)| Some(p.integral(lo?, hi?)))
            .fold(T::zero(), |a, b| a + b))
    }

    /// `∫_a^b self` for `a <= b`.
    pub fn integral_over(&self, a: &T, b: &T) -> T {
        let mut total = T::zero();
        for (lo, hi, p) in self.cells() {
            let l = match lo {
                Some(l) if l > a => l,
                _ => a,
            };
            let h = match hi {
                Some(h) if h < b => h,
                _ => b,
            };
            if l < h {
                total = total + p.integral(l, h);
            }
        }
        total
    }

    pub fn max_abs_slope(&self) -> T {
        self.pieces.iter().map(|p| p.slope.abs()).max().unwrap_or_else(T::zero)
    }

    pub fn to_json(&self) -> Value {
        let pieces: Vec<Value> = self
            .cells()
            .filter_map(|(lo, hi, p)| {
                let (lo, hi) = (lo?, hi?);
                (!p.is_zero()).then(|| {
                    json!({
                        "from": lo.to_string(),
                        "to": hi.to_string(),
                        "slope": p.slope.to_string(),
                        "intercept": p.intercept.to_string(),
                    })
                })
            })
            .collect();
        let points: Vec<Value> = self
            .breaks
            .iter()
            .zip(&self.points)
            .map(|(b, v)| json!({"at": b.to_string(), "value": v.to_string()}))
            .collect();
        json!({"pieces": pieces, "points": points})
    }

    /// Inverse of [`Pwl::to_json`] for compactly supported functions.
    pub fn from_json(v: &Value) -> Result<Self> {
        let parse = |v: &Value, what: &str| -> Result<T> {
            crate::io::parse_scalar(v).map_err(|e| input(format!("{what}: {e}")))
        };
        let points = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| input("missing `points` array"))?;
        let mut breaks = Vec::with_capacity(points.len());
        let mut values = Vec::with_capacity(points.len());
        for p in points {
            breaks.push(parse(&p["at"], "points.at")?);
            values.push(parse(&p["value"], "points.value")?);
        }
        if !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(input("`points` must be strictly increasing"));
        }
        let mut pieces = vec![Affine::zero(); breaks.len() + 1];
        if let Some(list) = v.get("pieces").and_then(Value::as_array) {
            for p in list {
                let from = parse(&p["from"], "pieces.from")?;
                let to = parse(&p["to"], "pieces.to")?;
                let slope = match p.get("slope") {
                    Some(s) => parse(s, "pieces.slope")?,
                    None => T::zero(),
                };
                let intercept = match (p.get("intercept"), p.get("rate")) {
                    (Some(c), _) | (None, Some(c)) => parse(c, "pieces.intercept")?,
                    (None, None) => return Err(input("piece needs `intercept` or `rate`")),
                };
                let k = match breaks.binary_search(&from) {
                    Ok(i) if breaks.get(i + 1) == Some(&to) => i + 1,
                    _ => return Err(input(format!("piece [{from}, {to}] does not span consecutive points"))),
                };
                pieces[k] = Affine::new(slope, intercept);
            }
        }
        Ok(Self::from_parts(breaks, pieces, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational as Q;
    use proptest::prelude::*;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn hat() -> Pwl<Q> {
        // 0 outside [-1, 1], peak 1 at 0
        Pwl::from_parts(
            vec![q(-1), q(0), q(1)],
            vec![
                Affine::zero(),
                Affine::new(q(1), q(1)),
                Affine::new(q(-1), q(1)),
                Affine::zero(),
            ],
            vec![q(0), q(1), q(0)],
        )
    }

    #[test]
    fn eval_limits_and_integral() {
        let h = hat();
        assert_eq!(h.eval(&Q::ratio(1, 2)), Q::ratio(1, 2));
        assert_eq!(h.eval(&q(0)), q(1));
        assert_eq!(h.integral().unwrap(), q(1));
        assert_eq!(h.integral_over(&q(0), &q(5)), Q::ratio(1, 2));
    }

    #[test]
    fn canonical_drops_redundant_breaks() {
        let f = Pwl::from_parts(vec![q(0), q(1)], vec![Affine::constant(q(2)); 3], vec![q(2), q(2)]);
        assert_eq!(f, Pwl::constant(q(2)));
    }

    #[test]
    fn indicator_keeps_point_values() {
        let set = IntervalUnion::from_intervals(vec![(q(0), q(1)), (q(3), q(3))]);
        let f = Pwl::indicator(&set, q(2));
        assert_eq!(f.eval(&q(0)), q(2));
        assert_eq!(f.eval(&q(3)), q(2));
        assert_eq!(f.eval(&Q::ratio(5, 2)), q(0));
        assert_eq!(f.left_limit(&q(0)), q(0));
        assert_eq!(f.integral().unwrap(), q(2));
    }

    #[test]
    fn positive_part_inserts_crossings() {
        let f = hat().add_const(&Q::ratio(-1, 2)).positive_part();
        assert_eq!(f.breaks(), &[Q::ratio(-1, 2), q(0), Q::ratio(1, 2)]);
        assert_eq!(f.integral().unwrap(), Q::ratio(1, 4));
    }

    #[test]
    fn json_round_trip() {
        let f = hat().shift(&Q::ratio(1, 3));
        let back = Pwl::<Q>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    fn arb_pwl() -> impl Strategy<Value = Pwl<Q>> {
        prop::collection::vec((-6i64..6, -4i64..4, -4i64..4, -4i64..4), 0..5).prop_map(|raw| {
            let breaks = sort_dedup(raw.iter().map(|r| q(r.0)).collect());
            let n = breaks.len();
            let pieces = (0..=n)
                .map(|k| {
                    if k == 0 || k == n {
                        Affine::zero()
                    } else {
                        let r = raw[k % raw.len()];
                        Affine::new(q(r.1), q(r.2))
                    }
                })
                .collect();
            let points = (0..n).map(|k| q(raw[k].3)).collect();
            Pwl::from_parts(breaks, pieces, points)
        })
    }

    proptest! {
        #[test]
        fn max_is_pointwise(f in arb_pwl(), g in arb_pwl(), x in -80i64..80) {
            let m = f.max_with(&g);
            let x = Q::ratio(x, 8);
            prop_assert_eq!(m.eval(&x), std::cmp::max(f.eval(&x), g.eval(&x)));
        }

        #[test]
        fn add_sub_shift_are_pointwise(f in arb_pwl(), g in arb_pwl(), x in -80i64..80, d in -8i64..8) {
            let x = Q::ratio(x, 8);
            let d = Q::ratio(d, 3);
            prop_assert_eq!(f.add(&g).eval(&x), f.eval(&x) + g.eval(&x));
            prop_assert_eq!(f.sub(&g).eval(&x), f.eval(&x) - g.eval(&x));
            prop_assert_eq!(f.shift(&d).eval(&x), f.eval(&(x.clone() + d.clone())));
            prop_assert!(f.sub(&f).is_zero());
        }
    }
}
