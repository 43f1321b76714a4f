//! Fixtures shared by the benchmarks.

use pecbound::rational::ratio;
use pecbound::{ErasureModel, MultiInputPEC};

pub fn xor_channel() -> MultiInputPEC {
    MultiInputPEC::xor_example(ratio(1, 2), ratio(9, 10)).expect("valid example")
}

/// `m` independent subchannels to `k` destinations with distinct erasures.
pub fn independent_channel(k: usize, m: usize) -> MultiInputPEC {
    let subchannels = (0..m)
        .map(|i| ErasureModel::independent((0..k).map(|j| ratio((1 + (3 * i + 5 * j) % 9) as i64, 10))))
        .collect();
    MultiInputPEC::new(k, subchannels).expect("valid channel")
}
