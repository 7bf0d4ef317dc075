//! Finite unions of closed intervals.

use serde::Serialize;

use crate::scalar::Scalar;

/// Finitely many disjoint, sorted closed intervals `[l, r]` with `l <= r`.
/// Degenerate intervals `[a, a]` are allowed and denote single points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalUnion<T> {
    parts: Vec<(T, T)>,
}

impl<T: Scalar> Default for IntervalUnion<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> IntervalUnion<T> {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn single(l: T, r: T) -> Self {
        assert!(l <= r, "interval endpoints out of order");
        Self { parts: vec![(l, r)] }
    }

    /// Builds the union of arbitrary (possibly overlapping) closed intervals.
    /// Touching intervals are merged.
    pub fn from_intervals(mut raw: Vec<(T, T)>) -> Self {
        raw.retain(|(l, r)| l <= r);
        raw.sort();
        let mut parts: Vec<(T, T)> = Vec::with_capacity(raw.len());
        for (l, r) in raw {
            match parts.last_mut() {
                Some(last) if l <= last.1 => {
                    if r > last.1 {
                        last.1 = r;
                    }
                }
                _ => parts.push((l, r)),
            }
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[(T, T)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn measure(&self) -> T {
        self.parts
            .iter()
            .fold(T::zero(), |acc, (l, r)| acc + r.clone() - l.clone())
    }

    /// Measure of the intersection with `[a, b]`.
    pub fn measure_within(&self, a: &T, b: &T) -> T {
        self.parts.iter().fold(T::zero(), |acc, (l, r)| {
            let lo = std::cmp::max(l, a);
            let hi = std::cmp::min(r, b);
            if lo < hi {
                acc + hi.clone() - lo.clone()
            } else {
                acc
            }
        })
    }

    pub fn contains(&self, x: &T) -> bool {
        // parts are sorted by left endpoint
        let idx = self.parts.partition_point(|(l, _)| l <= x);
        idx > 0 && &self.parts[idx - 1].1 >= x
    }

    /// `{x + d : x in self}`.
    pub fn shift(&self, d: &T) -> Self {
        Self {
            parts: self
                .parts
                .iter()
                .map(|(l, r)| (l.clone() + d.clone(), r.clone() + d.clone()))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.parts.clone();
        all.extend(other.parts.iter().cloned());
        Self::from_intervals(all)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.parts
            .iter()
            .all(|(l, r)| other.parts.iter().any(|(ol, or)| ol <= l && r <= or))
    }

    pub fn min(&self) -> Option<&T> {
        self.parts.first().map(|p| &p.0)
    }

    pub fn max(&self) -> Option<&T> {
        self.parts.last().map(|p| &p.1)
    }

    /// All interval endpoints, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.parts.len() * 2);
        for (l, r) in &self.parts {
            out.push(l.clone());
            if r != l {
                out.push(r.clone());
            }
        }
        out
    }

    pub fn to_strings(&self) -> Vec<[String; 2]> {
        self.parts.iter().map(|(l, r)| [l.to_string(), r.to_string()]).collect()
    }
}

impl<T: Scalar> Serialize for IntervalUnion<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}
