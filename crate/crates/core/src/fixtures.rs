//! Small reference instances used by tests and documentation.

use crate::network::Network;
use crate::scalar::Scalar;

fn arc<T: Scalar>(id: &str, tail: &str, head: &str, cap: i64, delay: i64) -> (String, String, String, T, T) {
    (
        id.into(),
        tail.into(),
        head.into(),
        T::from_int(cap),
        T::from_int(delay),
    )
}

/// Three nodes `s, a, t`; `e: s→a` (ν=2, τ=0), `f: a→t` (ν=2, τ=1),
/// `g: a→t` (ν=1, τ=0).
pub fn two_route<T: Scalar>() -> Network<T> {
    Network::new(
        vec!["s".into(), "a".into(), "t".into()],
        vec![
            arc("e", "s", "a", 2, 0),
            arc("f", "a", "t", 2, 1),
            arc("g", "a", "t", 1, 0),
        ],
        "s",
        "t",
    )
    .expect("valid fixture")
}

/// One arc `s→t` with the given capacity and delay.
pub fn single_arc<T: Scalar>(capacity: i64, delay: i64) -> Network<T> {
    Network::new(
        vec!["s".into(), "t".into()],
        vec![arc("st", "s", "t", capacity, delay)],
        "s",
        "t",
    )
    .expect("valid fixture")
}
