//! Piecewise-linear scheduling cost `ρ` together with the value of time `α`.
//!
//! The value at a breakpoint is never stored: costs are lower
//! semicontinuous, so it is the smaller of the two adjacent one-sided limits.

use crate::error::{input, Result};
use crate::interval::IntervalUnion;
use crate::pwl::{cell_sample, sort_dedup, Affine, Pwl};
use crate::scalar::{Ext, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostPiece<T> {
    Linear(Affine<T>),
    Infinite,
}

impl<T: Scalar> CostPiece<T> {
    fn eval(&self, x: &T) -> Ext<T> {
        match self {
            CostPiece::Linear(a) => Ext::Finite(a.eval(x)),
            CostPiece::Infinite => Ext::Infinity,
        }
    }

    fn shift(&self, d: &T) -> Self {
        match self {
            CostPiece::Linear(a) => CostPiece::Linear(a.shift(d)),
            CostPiece::Infinite => CostPiece::Infinite,
        }
    }
}

/// What was done to the input cost to bring it into standard form:
/// `ρ_input(θ) = ρ(θ − time_shift) + value_shift` after growth normalization.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Normalization<T> {
    pub growth_normalized: bool,
    pub time_shift: T,
    pub value_shift: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulingCost<T> {
    alpha: T,
    breaks: Vec<T>,
    pieces: Vec<CostPiece<T>>,
    normalization: Normalization<T>,
}

impl<T: Scalar> SchedulingCost<T> {
    /// Validates and canonicalizes a raw cost. Requires `α > 0` and `ρ >= 0`.
    pub fn from_pieces(alpha: T, breaks: Vec<T>, pieces: Vec<CostPiece<T>>) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(input("alpha must be positive"));
        }
        if pieces.len() != breaks.len() + 1 {
            return Err(input("cost needs exactly one piece per cell"));
        }
        if !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(input("cost breakpoints must be strictly increasing"));
        }
        let n = breaks.len();
        for (k, p) in pieces.iter().enumerate() {
            let CostPiece::Linear(a) = p else { continue };
            let lo = if k == 0 { None } else { Some(&breaks[k - 1]) };
            let hi = breaks.get(k);
            if lo.is_none() && a.slope.is_positive() || hi.is_none() && a.slope.is_negative() {
                return Err(input("scheduling cost must be nonnegative (unbounded tail)"));
            }
            for end in [lo, hi].into_iter().flatten() {
                if a.eval(end).is_negative() {
                    return Err(input(format!("scheduling cost negative near {end}")));
                }
            }
            if n == 0 && a.intercept.is_negative() {
                return Err(input("scheduling cost must be nonnegative"));
            }
        }
        let mut cost = Self {
            alpha,
            breaks,
            pieces,
            normalization: Normalization {
                growth_normalized: false,
                time_shift: T::zero(),
                value_shift: T::zero(),
            },
        };
        cost.canonicalize();
        Ok(cost)
    }

    /// `ρ(θ) = −βθ` for `θ <= 0`, `γθ` for `θ > 0` (`γ = None` is `+∞`),
    /// growth-normalized.
    pub fn standard(alpha: T, beta: T, gamma: Option<T>) -> Result<Self> {
        if !beta.is_positive() {
            return Err(input("beta must be positive"));
        }
        if let Some(g) = &gamma {
            if !g.is_positive() {
                return Err(input("gamma must be positive"));
            }
        }
        let right = match gamma {
            Some(g) => CostPiece::Linear(Affine::new(g, T::zero())),
            None => CostPiece::Infinite,
        };
        let raw = Self::from_pieces(
            alpha,
            vec![T::zero()],
            vec![CostPiece::Linear(Affine::new(-beta, T::zero())), right],
        )?;
        Ok(raw.growth_normalize())
    }

    /// `ρ(θ) = −αθ` for `θ <= 0`, `+∞` after: the earliest-arrival cost.
    pub fn earliest_arrival(alpha: T) -> Result<Self> {
        Self::standard(alpha.clone(), alpha, None)
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[CostPiece<T>] {
        &self.pieces
    }

    pub fn normalization(&self) -> &Normalization<T> {
        &self.normalization
    }

    fn canonicalize(&mut self) {
        let mut breaks = Vec::new();
        let mut pieces = vec![self.pieces[0].clone()];
        for (b, p) in self.breaks.iter().zip(&self.pieces[1..]) {
            if pieces.last() != Some(p) {
                breaks.push(b.clone());
                pieces.push(p.clone());
            }
        }
        self.breaks = breaks;
        self.pieces = pieces;
    }

    fn cell(&self, k: usize) -> (Option<&T>, Option<&T>) {
        let lo = if k == 0 { None } else { Some(&self.breaks[k - 1]) };
        (lo, self.breaks.get(k))
    }

    fn left_limit_at(&self, i: usize) -> Ext<T> {
        self.pieces[i].eval(&self.breaks[i])
    }

    fn right_limit_at(&self, i: usize) -> Ext<T> {
        self.pieces[i + 1].eval(&self.breaks[i])
    }

    /// Exact lower-semicontinuous evaluation.
    pub fn evaluate(&self, theta: &T) -> Ext<T> {
        match self.breaks.binary_search(theta) {
            Ok(i) => std::cmp::min(self.left_limit_at(i), self.right_limit_at(i)),
            Err(k) => self.pieces[k].eval(theta),
        }
    }

    /// The piece governing the open cell containing `theta` (or to the right
    /// of `theta` when it is a breakpoint).
    pub(crate) fn piece_right_of(&self, theta: &T) -> &CostPiece<T> {
        match self.breaks.binary_search(theta) {
            Ok(i) => &self.pieces[i + 1],
            Err(k) => &self.pieces[k],
        }
    }

    /// `θ ↦ ρ(θ) + αθ` is nondecreasing.
    pub fn satisfies_growth_bound(&self) -> bool {
        let alpha = &self.alpha;
        let slopes_ok = self.pieces.iter().all(|p| match p {
            CostPiece::Linear(a) => a.slope >= -alpha.clone(),
            CostPiece::Infinite => true,
        });
        // a jump down from left to right breaks monotonicity of ρ + αθ
        let jumps_ok = (0..self.breaks.len()).all(|i| self.left_limit_at(i) <= self.right_limit_at(i));
        // an infinite piece followed by a finite one also breaks it
        let inf_ok = self
            .pieces
            .windows(2)
            .all(|w| !(w[0] == CostPiece::Infinite && w[1] != CostPiece::Infinite));
        slopes_ok && jumps_ok && inf_ok
    }

    /// `ρ̂(θ) = min_{ξ >= θ} ρ(ξ) + α(ξ − θ)`.
    pub fn growth_normalize(&self) -> Self {
        let alpha = self.alpha.clone();
        let n = self.breaks.len();
        // pieces of M(θ) = min_{ξ>=θ} ρ(ξ)+αξ, built right to left
        let mut rev_pieces: Vec<(Option<T>, CostPiece<T>)> = Vec::new();
        let mut m_hi: Ext<T> = Ext::Infinity;
        for k in (0..=n).rev() {
            let (lo, hi) = self.cell(k);
            let (lo, hi) = (lo.cloned(), hi.cloned());
            let mut cell_pieces: Vec<(Option<T>, CostPiece<T>)> = Vec::new();
            match &self.pieces[k] {
                CostPiece::Infinite => cell_pieces.push((lo.clone(), const_piece(&m_hi))),
                CostPiece::Linear(a) => {
                    let g = Affine::new(a.slope.clone() + alpha.clone(), a.intercept.clone());
                    if g.slope.is_negative() {
                        let inf = g.eval(hi.as_ref().expect("validated: right tail slope >= 0"));
                        cell_pieces.push((lo.clone(), const_piece(&std::cmp::min(Ext::Finite(inf), m_hi.clone()))));
                    } else {
                        match &m_hi {
                            Ext::Infinity => cell_pieces.push((lo.clone(), CostPiece::Linear(g.clone()))),
                            Ext::Finite(m) => {
                                if g.slope.is_zero() {
                                    let v = std::cmp::min(g.intercept.clone(), m.clone());
                                    cell_pieces.push((lo.clone(), CostPiece::Linear(Affine::constant(v))));
                                } else {
                                    let cross = (m.clone() - g.intercept.clone()) / g.slope.clone();
                                    let inside = lo.as_ref().is_none_or(|l| &cross > l)
                                        && hi.as_ref().is_none_or(|h| &cross < h);
                                    let below_all = hi.as_ref().is_some_and(|h| &cross >= h);
                                    if inside {
                                        // right part constant m, left part g
                                        cell_pieces.push((
                                            Some(cross.clone()),
                                            CostPiece::Linear(Affine::constant(m.clone())),
                                        ));
                                        cell_pieces.push((lo.clone(), CostPiece::Linear(g.clone())));
                                    } else if below_all {
                                        cell_pieces.push((lo.clone(), CostPiece::Linear(g.clone())));
                                    } else {
                                        cell_pieces.push((lo.clone(), CostPiece::Linear(Affine::constant(m.clone()))));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            // value of M at lo: min(g(lo), M(lo+))
            if let Some(l) = &lo {
                let right_val = cell_pieces.last().expect("nonempty").1.eval(l);
                let g_at = self.evaluate(l).add_finite(&(alpha.clone() * l.clone()));
                m_hi = std::cmp::min(right_val, g_at);
            }
            rev_pieces.extend(cell_pieces);
        }
        rev_pieces.reverse();
        // rev_pieces now ordered left to right with their left bounds
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        for (i, (lo, p)) in rev_pieces.into_iter().enumerate() {
            if i > 0 {
                breaks.push(lo.expect("only the first piece is unbounded on the left"));
            }
            let rho_hat = match p {
                CostPiece::Linear(a) => CostPiece::Linear(Affine::new(a.slope - alpha.clone(), a.intercept)),
                CostPiece::Infinite => CostPiece::Infinite,
            };
            pieces.push(rho_hat);
        }
        let mut out = Self {
            alpha,
            breaks,
            pieces,
            normalization: self.normalization.clone(),
        };
        out.canonicalize();
        if out != *self {
            out.normalization.growth_normalized = true;
        }
        out
    }

    /// Minimum value of `ρ` and the point of the minimizing set nearest to 0.
    fn minimum(&self) -> (T, T) {
        let mut best: Option<(T, T)> = None;
        let mut offer = |v: T, at: T| {
            let better = match &best {
                None => true,
                Some((bv, bat)) => v < *bv || (v == *bv && at.abs() < bat.abs()),
            };
            if better {
                best = Some((v, at));
            }
        };
        for i in 0..self.breaks.len() {
            if let Ext::Finite(v) = self.evaluate(&self.breaks[i]) {
                offer(v, self.breaks[i].clone());
            }
        }
        for (k, p) in self.pieces.iter().enumerate() {
            if let CostPiece::Linear(a) = p {
                if a.slope.is_zero() {
                    let (lo, hi) = self.cell(k);
                    let at = match (lo, hi) {
                        (Some(l), _) if l.is_positive() => l.clone(),
                        (_, Some(h)) if h.is_negative() => h.clone(),
                        _ => T::zero(),
                    };
                    offer(a.intercept.clone(), at);
                }
            }
        }
        best.expect("a nonnegative piecewise-linear cost attains its minimum")
    }

    /// Growth-normalizes, then shifts so that `min ρ = ρ(0) = 0`. The shift is
    /// recorded in [`SchedulingCost::normalization`].
    pub fn normalized(&self) -> Self {
        let grown = self.growth_normalize();
        let (min, at) = grown.minimum();
        if min.is_zero() && grown.evaluate(&T::zero()) == Ext::zero() {
            return grown;
        }
        let at = if grown.evaluate(&T::zero()) == Ext::Finite(min.clone()) {
            T::zero()
        } else {
            at
        };
        let mut out = Self {
            alpha: grown.alpha.clone(),
            breaks: grown.breaks.iter().map(|b| b.clone() - at.clone()).collect(),
            pieces: grown
                .pieces
                .iter()
                .map(|p| match p.shift(&at) {
                    CostPiece::Linear(a) => CostPiece::Linear(a.add_const(&-min.clone())),
                    CostPiece::Infinite => CostPiece::Infinite,
                })
                .collect(),
            normalization: grown.normalization.clone(),
        };
        out.normalization.time_shift = out.normalization.time_shift.clone() + at;
        out.normalization.value_shift = out.normalization.value_shift.clone() + min;
        out.canonicalize();
        out
    }

    /// Both tails grow without bound (or are infinite), so every sublevel set
    /// is compact.
    pub fn has_compact_sublevels(&self) -> bool {
        let left = match &self.pieces[0] {
            CostPiece::Infinite => true,
            CostPiece::Linear(a) => a.slope.is_negative(),
        };
        let right = match &self.pieces[self.pieces.len() - 1] {
            CostPiece::Infinite => true,
            CostPiece::Linear(a) => a.slope.is_positive(),
        };
        left && right
    }

    /// Nonincreasing up to 0 and nondecreasing after (flat stretches allowed).
    pub fn is_unimodal(&self) -> bool {
        self.unimodal_with(|s: &T| !s.is_positive(), |s: &T| !s.is_negative())
    }

    /// Strictly decreasing up to 0 and strictly increasing after.
    pub fn is_strongly_unimodal(&self) -> bool {
        self.unimodal_with(|s: &T| s.is_negative(), |s: &T| s.is_positive())
    }

    fn unimodal_with(&self, left_ok: impl Fn(&T) -> bool, right_ok: impl Fn(&T) -> bool) -> bool {
        if self.evaluate(&T::zero()) != Ext::zero() {
            return false;
        }
        let zero = T::zero();
        for (k, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = self.cell(k);
            let CostPiece::Linear(a) = p else {
                // infinite pieces only on the outside
                let outer_left = self.pieces[..=k].iter().all(|q| *q == CostPiece::Infinite);
                let outer_right = self.pieces[k..].iter().all(|q| *q == CostPiece::Infinite);
                if !(outer_left || outer_right) {
                    return false;
                }
                continue;
            };
            if hi.is_some_and(|h| h <= &zero) && !left_ok(&a.slope) {
                return false;
            }
            if lo.is_some_and(|l| l >= &zero) && !right_ok(&a.slope) {
                return false;
            }
            // a cell around 0 must be the flat minimum itself
            if lo.is_none_or(|l| l < &zero) && hi.is_none_or(|h| h > &zero) && !a.slope.is_zero() {
                return false;
            }
        }
        for (i, b) in self.breaks.iter().enumerate() {
            let (l, r) = (self.left_limit_at(i), self.right_limit_at(i));
            if b < &zero && l < r || b > &zero && l > r {
                return false;
            }
        }
        true
    }

    /// `{θ : ρ(θ) <= z}` (or the closure of `{θ : ρ(θ) < z}` when `strict`).
    pub(crate) fn level_set(&self, z: &T, strict: bool) -> Result<IntervalUnion<T>> {
        let mut raw: Vec<(T, T)> = Vec::new();
        let unbounded = || input(format!("sublevel set at level {z} is unbounded"));
        for (k, p) in self.pieces.iter().enumerate() {
            let CostPiece::Linear(a) = p else { continue };
            let (lo, hi) = self.cell(k);
            if a.slope.is_zero() {
                let inside = if strict { &a.intercept < z } else { &a.intercept <= z };
                if inside {
                    match (lo, hi) {
                        (Some(l), Some(h)) => raw.push((l.clone(), h.clone())),
                        _ => return Err(unbounded()),
                    }
                }
                continue;
            }
            let x = (z.clone() - a.intercept.clone()) / a.slope.clone();
            if a.slope.is_positive() {
                // θ <= x within (lo, hi)
                let Some(l) = lo else { return Err(unbounded()) };
                let r = match hi {
                    Some(h) if h < &x => h.clone(),
                    _ => x.clone(),
                };
                if &r > l {
                    raw.push((l.clone(), r));
                }
            } else {
                let Some(h) = hi else { return Err(unbounded()) };
                let l = match lo {
                    Some(l) if l > &x => l.clone(),
                    _ => x.clone(),
                };
                if &l < h {
                    raw.push((l, h.clone()));
                }
            }
        }
        if !strict {
            for b in &self.breaks {
                if self.evaluate(b) <= Ext::Finite(z.clone()) {
                    raw.push((b.clone(), b.clone()));
                }
            }
        }
        Ok(IntervalUnion::from_intervals(raw))
    }

    /// Exact sublevel set `{θ : ρ(θ) <= z}`.
    pub fn sublevel(&self, z: &T) -> Result<IntervalUnion<T>> {
        if z.is_negative() {
            return Err(input("sublevel requires a nonnegative level"));
        }
        self.level_set(z, false)
    }

    /// Closure of `{θ : ρ(θ) < z}`: the minimal departure window at a level.
    pub fn strict_sublevel_closure(&self, z: &T) -> Result<IntervalUnion<T>> {
        if !z.is_positive() {
            return Ok(IntervalUnion::empty());
        }
        self.level_set(z, true)
    }

    /// `∫_a^b ρ`, infinite if `ρ` is infinite on a set of positive measure.
    pub fn integral(&self, a: &T, b: &T) -> Ext<T> {
        let mut total = T::zero();
        for (k, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = self.cell(k);
            let l = match lo {
                Some(l) if l > a => l,
                _ => a,
            };
            let h = match hi {
                Some(h) if h < b => h,
                _ => b,
            };
            if l < h {
                match p {
                    CostPiece::Linear(f) => total = total + f.integral(l, h),
                    CostPiece::Infinite => return Ext::Infinity,
                }
            }
        }
        Ext::Finite(total)
    }

    /// All finite values `ρ` takes as one-sided limits at breakpoints, plus
    /// flat-piece levels and 0.
    fn critical_levels(&self) -> Vec<T> {
        let mut z = vec![T::zero()];
        for i in 0..self.breaks.len() {
            for v in [self.left_limit_at(i), self.right_limit_at(i)] {
                if let Ext::Finite(v) = v {
                    z.push(v);
                }
            }
        }
        for p in &self.pieces {
            if let CostPiece::Linear(a) = p {
                if a.slope.is_zero() {
                    z.push(a.intercept.clone());
                }
            }
        }
        z.retain(|v| !v.is_negative());
        sort_dedup(z)
    }

    /// `z ↦ |{θ : ρ(θ) <= z}|` as an exact right-continuous function of the
    /// level (zero for negative levels). Requires compact sublevel sets.
    pub fn sublevel_measure(&self) -> Result<Pwl<T>> {
        if !self.has_compact_sublevels() {
            return Err(input("scheduling cost must grow without bound on both sides"));
        }
        let levels = self.critical_levels();
        let mut closed = Vec::with_capacity(levels.len());
        let mut open = Vec::with_capacity(levels.len());
        for z in &levels {
            closed.push(self.level_set(z, false)?.measure());
            open.push(self.strict_sublevel_closure(z)?.measure());
        }
        let n = levels.len();
        let mut pieces = vec![Affine::zero()];
        for k in 0..n {
            let piece = if k + 1 < n {
                Affine::through(&levels[k], &closed[k], &levels[k + 1], &open[k + 1])
            } else {
                let z1 = levels[k].clone() + T::one();
                let w1 = self.level_set(&z1, false)?.measure();
                Affine::through(&levels[k], &closed[k], &z1, &w1)
            };
            pieces.push(piece);
        }
        // cell left of 0 must be zero; if 0 is not the first level, levels[0] is 0 anyway
        Ok(Pwl::from_parts(levels, pieces, closed))
    }

    /// `(C − ρ)^+` as an exact piecewise-linear function.
    pub fn slack_below(&self, c: &T) -> Pwl<T> {
        let cands = (0..=self.breaks.len())
            .map(|k| match &self.pieces[k] {
                CostPiece::Linear(a) => vec![Affine::zero(), Affine::constant(c.clone()).sub(a)],
                CostPiece::Infinite => vec![Affine::zero()],
            })
            .collect();
        let points = self
            .breaks
            .iter()
            .map(|b| match self.evaluate(b) {
                Ext::Finite(v) => std::cmp::max(c.clone() - v, T::zero()),
                Ext::Infinity => T::zero(),
            })
            .collect();
        Pwl::envelope(self.breaks.clone(), cands, points)
    }

    /// A point inside every open cell, used by sampling tests.
    pub fn cell_samples(&self) -> Vec<T> {
        (0..=self.breaks.len())
            .map(|k| {
                let (lo, hi) = self.cell(k);
                cell_sample(lo, hi)
            })
            .collect()
    }
}

fn const_piece<T: Scalar>(v: &Ext<T>) -> CostPiece<T> {
    match v {
        Ext::Finite(v) => CostPiece::Linear(Affine::constant(v.clone())),
        Ext::Infinity => CostPiece::Infinite,
    }
}
